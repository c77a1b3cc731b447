//! Instance validation.

use std::collections::{BTreeSet, HashMap, HashSet};

use roxmltree::{Document, Node, NodeId};

use crate::model::*;
use crate::simple;
use crate::Diagnostic;

const XSI_NS: &str = "http://www.w3.org/2001/XMLSchema-instance";
const XML_NS: &str = "http://www.w3.org/XML/1998/namespace";

#[derive(Clone, Copy)]
enum SimpleCheck<'s> {
    Ref(&'s SimpleTypeRef),
    Def(&'s SimpleType),
}

enum Resolved<'s> {
    Simple(SimpleCheck<'s>),
    Complex(&'s ComplexType),
    Any,
}

enum Found<'s> {
    Decl(&'s ElementDecl),
    Wildcard(ProcessContents),
}

#[derive(Default)]
struct MatchTrace {
    farthest: usize,
    expected: BTreeSet<String>,
}

impl MatchTrace {
    fn reached(&mut self, pos: usize) {
        if pos > self.farthest {
            self.farthest = pos;
            self.expected.clear();
        }
    }

    fn expect(&mut self, pos: usize, name: &str) {
        self.reached(pos);
        if pos == self.farthest {
            self.expected.insert(name.to_owned());
        }
    }
}

struct PendingKeyRef<'a, 'input> {
    node: Node<'a, 'input>,
    constraint: &'a IdentityConstraint,
}

pub(crate) struct Validator<'s, 'input> {
    schema: &'s Schema,
    diagnostics: Vec<Diagnostic>,
    key_tables: HashMap<(NodeId, String), HashSet<Vec<String>>>,
    pending: Vec<PendingKeyRef<'s, 'input>>,
}

impl<'s, 'input> Validator<'s, 'input> {
    pub(crate) fn new(schema: &'s Schema) -> Self {
        Validator {
            schema,
            diagnostics: Vec::new(),
            key_tables: HashMap::new(),
            pending: Vec::new(),
        }
    }

    pub(crate) fn run(mut self, doc: &'s Document<'input>) -> Vec<Diagnostic> {
        let root = doc.root_element();
        let name = root.tag_name().name();
        match self.schema.elements.get(name) {
            Some(decl) if root.tag_name().namespace() == self.schema.target_namespace.as_deref() => {
                self.element(root, decl, format!("/{name}"));
            }
            _ => self.report(root, format!("/{name}"), format!("no global declaration for root element '{name}'")),
        }
        self.resolve_keyrefs();
        self.diagnostics
    }

    fn report(&mut self, node: Node, path: String, message: String) {
        let pos = node.document().text_pos_at(node.range().start);
        self.diagnostics.push(Diagnostic {
            line: pos.row,
            column: pos.col,
            path,
            message,
        });
    }

    fn resolve_type(&self, ty: &'s TypeRef) -> Result<Resolved<'s>, String> {
        match ty {
            TypeRef::AnyType => Ok(Resolved::Any),
            TypeRef::Simple(s) => Ok(Resolved::Simple(SimpleCheck::Ref(s))),
            TypeRef::InlineComplex(ct) => Ok(Resolved::Complex(ct)),
            TypeRef::Named(name) => match self.schema.types.get(name) {
                Some(TypeDef::Complex(ct)) => Ok(Resolved::Complex(ct)),
                Some(TypeDef::Simple(st)) => Ok(Resolved::Simple(SimpleCheck::Def(st))),
                None => Err(format!("unknown type '{name}'")),
            },
        }
    }

    fn element(&mut self, node: Node<'s, 'input>, decl: &'s ElementDecl, path: String) {
        match self.resolve_type(&decl.ty) {
            Ok(Resolved::Any) => {}
            Ok(Resolved::Simple(st)) => {
                for attr in node.attributes() {
                    if !is_meta_attribute(attr.namespace()) {
                        self.report(
                            node,
                            path.clone(),
                            format!("attribute '{}' is not allowed on a simple-typed element", attr.name()),
                        );
                    }
                }
                if node.children().any(|c| c.is_element()) {
                    self.report(node, path.clone(), "element children are not allowed here".into());
                }
                self.text_value(node, st, decl.fixed.as_deref(), &path);
            }
            Ok(Resolved::Complex(ct)) => self.complex(node, ct, decl, &path),
            Err(message) => self.report(node, path.clone(), message),
        }
        self.identity_constraints(node, decl, &path);
    }

    fn text_value(&mut self, node: Node, st: SimpleCheck<'s>, fixed: Option<&str>, path: &str) {
        let text: String = node
            .children()
            .filter(|c| c.is_text())
            .filter_map(|c| c.text())
            .collect();
        let result = match st {
            SimpleCheck::Ref(r) => simple::check(self.schema, r, &text),
            SimpleCheck::Def(d) => simple::check_def(self.schema, d, &text),
        };
        match result {
            Ok(checked) => {
                if let Some(f) = fixed {
                    if !simple::same_value(&checked, f) {
                        self.report(node, path.to_owned(), format!("content must be fixed value '{f}'"));
                    }
                }
            }
            Err(message) => self.report(node, path.to_owned(), message),
        }
    }

    fn complex(
        &mut self,
        node: Node<'s, 'input>,
        ct: &'s ComplexType,
        decl: &'s ElementDecl,
        path: &str,
    ) {
        let chain = match self.extension_chain(ct) {
            Ok(c) => c,
            Err(message) => {
                self.report(node, path.to_owned(), message);
                return;
            }
        };
        self.attributes(node, &chain, path);

        let mixed = chain.iter().any(|c| c.mixed);
        let simple_content = chain.iter().rev().find_map(|c| match &c.content {
            Content::Simple(s) => Some(s),
            _ => None,
        });
        if let Some(st) = simple_content {
            if node.children().any(|c| c.is_element()) {
                self.report(node, path.to_owned(), "element children are not allowed here".into());
            }
            self.text_value(node, SimpleCheck::Ref(st), decl.fixed.as_deref(), path);
            return;
        }
        if !mixed {
            let stray = node
                .children()
                .filter(|c| c.is_text())
                .any(|c| c.text().is_some_and(|t| !t.trim().is_empty()));
            if stray {
                self.report(node, path.to_owned(), "character content is not allowed here".into());
            }
        }

        let particles: Vec<&'s Particle> = chain
            .iter()
            .filter_map(|c| match &c.content {
                Content::Elements(p) => Some(p),
                _ => None,
            })
            .collect();
        let kids: Vec<Node<'s, 'input>> = node.children().filter(|c| c.is_element()).collect();
        let names: Vec<(&str, Option<&str>)> = kids
            .iter()
            .map(|k| (k.tag_name().name(), k.tag_name().namespace()))
            .collect();
        let mut trace = MatchTrace::default();
        let mut positions = BTreeSet::from([0usize]);
        for p in &particles {
            positions = self.match_particle(p, &names, &positions, &mut trace);
        }
        if !positions.contains(&kids.len()) {
            let expected = trace.expected.iter().cloned().collect::<Vec<_>>().join(", ");
            let message = if trace.farthest < kids.len() {
                let kid = kids[trace.farthest];
                if expected.is_empty() {
                    format!("element '{}' is not allowed here", kid.tag_name().name())
                } else {
                    format!(
                        "element '{}' is not allowed here; expected one of: {expected}",
                        kid.tag_name().name()
                    )
                }
            } else {
                format!("content is incomplete; expected one of: {expected}")
            };
            let at = if trace.farthest < kids.len() {
                kids[trace.farthest]
            } else {
                node
            };
            self.report(at, path.to_owned(), message);
        }

        let mut counters: HashMap<&str, usize> = HashMap::new();
        let totals = names.iter().fold(HashMap::new(), |mut m: HashMap<&str, usize>, (n, _)| {
            *m.entry(n).or_default() += 1;
            m
        });
        for kid in kids {
            let name = kid.tag_name().name();
            let idx = counters.entry(name).or_default();
            *idx += 1;
            let kid_path = if totals[name] > 1 {
                format!("{path}/{name}[{idx}]")
            } else {
                format!("{path}/{name}")
            };
            match self.find_decl(&particles, name) {
                Some(Found::Decl(d)) => self.element(kid, d, kid_path),
                Some(Found::Wildcard(ProcessContents::Skip)) => {}
                Some(Found::Wildcard(ProcessContents::Lax)) => {
                    if let Some(d) = self.schema.elements.get(name) {
                        self.element(kid, d, kid_path);
                    }
                }
                Some(Found::Wildcard(ProcessContents::Strict)) => match self.schema.elements.get(name) {
                    Some(d) => self.element(kid, d, kid_path),
                    None => self.report(kid, kid_path, format!("no declaration for wildcard element '{name}'")),
                },
                // Already reported by the content model check.
                None => {}
            }
        }
    }

    fn extension_chain(&self, ct: &'s ComplexType) -> Result<Vec<&'s ComplexType>, String> {
        let mut chain = vec![ct];
        let mut current = ct;
        while let Some(base) = &current.extends {
            match self.schema.types.get(base) {
                Some(TypeDef::Complex(b)) => {
                    if chain.len() > 32 {
                        return Err("type derivation too deep".into());
                    }
                    chain.push(b);
                    current = b;
                }
                _ => return Err(format!("unknown complex base type '{base}'")),
            }
        }
        chain.reverse();
        Ok(chain)
    }

    fn collect_attributes(
        &self,
        attrs: &'s [AttributeDecl],
        groups: &'s [String],
        out: &mut Vec<&'s AttributeDecl>,
        depth: usize,
    ) {
        out.extend(attrs.iter());
        if depth > 16 {
            return;
        }
        for g in groups {
            if let Some((a, nested)) = self.schema.attribute_groups.get(g) {
                self.collect_attributes(a, nested, out, depth + 1);
            }
        }
    }

    fn attributes(&mut self, node: Node, chain: &[&'s ComplexType], path: &str) {
        let mut decls = Vec::new();
        for ct in chain {
            self.collect_attributes(&ct.attributes, &ct.attribute_groups, &mut decls, 0);
        }
        let any_attribute = chain.iter().any(|c| c.any_attribute);
        for attr in node.attributes() {
            if is_meta_attribute(attr.namespace()) {
                continue;
            }
            match decls.iter().rev().find(|d| d.name == attr.name()) {
                Some(d) if d.prohibited => {
                    self.report(node, path.to_owned(), format!("attribute '{}' is prohibited", attr.name()))
                }
                Some(d) => match simple::check(self.schema, &d.ty, attr.value()) {
                    Ok(checked) => {
                        if let Some(f) = &d.fixed {
                            if !simple::same_value(&checked, f) {
                                self.report(
                                    node,
                                    path.to_owned(),
                                    format!("attribute '{}' must have the fixed value '{f}'", d.name),
                                );
                            }
                        }
                    }
                    Err(message) => self.report(
                        node,
                        path.to_owned(),
                        format!("attribute '{}': {message}", d.name),
                    ),
                },
                None if any_attribute => {}
                None => self.report(
                    node,
                    path.to_owned(),
                    format!("attribute '{}' is not allowed", attr.name()),
                ),
            }
        }
        for d in decls.iter().filter(|d| d.required) {
            if node.attribute(d.name.as_str()).is_none() {
                self.report(
                    node,
                    path.to_owned(),
                    format!("missing required attribute '{}'", d.name),
                );
            }
        }
    }

    fn match_particle(
        &self,
        p: &'s Particle,
        kids: &[(&str, Option<&str>)],
        starts: &BTreeSet<usize>,
        trace: &mut MatchTrace,
    ) -> BTreeSet<usize> {
        let Occurs { min, max } = p.occurs;
        let mut result = BTreeSet::new();
        if min == 0 {
            result.extend(starts.iter().copied());
        }
        let mut current = starts.clone();
        let mut count = 0usize;
        loop {
            if !max.allows(count + 1) {
                break;
            }
            let next = self.match_term(&p.term, kids, &current, trace);
            count += 1;
            if next.is_empty() {
                break;
            }
            for &pos in &next {
                trace.reached(pos);
            }
            if count >= min || next == current {
                result.extend(next.iter().copied());
            }
            if next == current || count > kids.len() + min {
                break;
            }
            current = next;
        }
        result
    }

    fn match_term(
        &self,
        term: &'s Term,
        kids: &[(&str, Option<&str>)],
        starts: &BTreeSet<usize>,
        trace: &mut MatchTrace,
    ) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        match term {
            Term::Element(decl) => self.match_name(&decl.name, kids, starts, trace, &mut out),
            Term::ElementRef(name) => self.match_name(name, kids, starts, trace, &mut out),
            Term::Sequence(items) => {
                let mut cur = starts.clone();
                for item in items {
                    cur = self.match_particle(item, kids, &cur, trace);
                    if cur.is_empty() {
                        break;
                    }
                }
                out = cur;
            }
            Term::Choice(items) => {
                for item in items {
                    out.extend(self.match_particle(item, kids, starts, trace));
                }
            }
            Term::All(items) => {
                for &start in starts {
                    let mut used = vec![false; items.len()];
                    let mut pos = start;
                    loop {
                        let complete = items
                            .iter()
                            .zip(&used)
                            .all(|(it, u)| *u || it.occurs.min == 0);
                        if complete {
                            out.insert(pos);
                        }
                        if pos >= kids.len() {
                            break;
                        }
                        let hit = items.iter().enumerate().position(|(i, it)| {
                            !used[i] && self.particle_names(it).contains(&kids[pos].0)
                        });
                        match hit {
                            Some(i) => {
                                used[i] = true;
                                pos += 1;
                            }
                            None => {
                                for (i, it) in items.iter().enumerate() {
                                    if !used[i] {
                                        for n in self.particle_names(it) {
                                            trace.expect(pos, n);
                                        }
                                    }
                                }
                                break;
                            }
                        }
                    }
                }
            }
            Term::GroupRef(name) => {
                if let Some(g) = self.schema.groups.get(name) {
                    out = self.match_particle(g, kids, starts, trace);
                }
            }
            Term::Any { namespace, .. } => {
                for &s in starts {
                    if s < kids.len() && self.namespace_allowed(namespace, kids[s].1) {
                        out.insert(s + 1);
                    } else {
                        trace.expect(s, "*");
                    }
                }
            }
        }
        out
    }

    fn match_name(
        &self,
        name: &str,
        kids: &[(&str, Option<&str>)],
        starts: &BTreeSet<usize>,
        trace: &mut MatchTrace,
        out: &mut BTreeSet<usize>,
    ) {
        for &s in starts {
            if s < kids.len()
                && kids[s].0 == name
                && kids[s].1 == self.schema.target_namespace.as_deref()
            {
                out.insert(s + 1);
            } else {
                trace.expect(s, name);
            }
        }
    }

    fn particle_names(&self, p: &'s Particle) -> Vec<&'s str> {
        match &p.term {
            Term::Element(d) => vec![d.name.as_str()],
            Term::ElementRef(n) => vec![n.as_str()],
            _ => Vec::new(),
        }
    }

    fn namespace_allowed(&self, c: &NamespaceConstraint, ns: Option<&str>) -> bool {
        let target = self.schema.target_namespace.as_deref();
        match c {
            NamespaceConstraint::Any => true,
            NamespaceConstraint::Other => ns.is_some() && ns != target,
            NamespaceConstraint::Local => ns.is_none(),
            NamespaceConstraint::List(list) => list.iter().any(|u| u.as_deref() == ns),
        }
    }

    fn find_decl(&self, particles: &[&'s Particle], name: &str) -> Option<Found<'s>> {
        let mut wildcard = None;
        for p in particles {
            if let Some(found) = self.find_in_term(&p.term, name, &mut wildcard, 0) {
                return Some(Found::Decl(found));
            }
        }
        wildcard.map(Found::Wildcard)
    }

    fn find_in_term(
        &self,
        term: &'s Term,
        name: &str,
        wildcard: &mut Option<ProcessContents>,
        depth: usize,
    ) -> Option<&'s ElementDecl> {
        if depth > 64 {
            return None;
        }
        match term {
            Term::Element(d) if d.name == name => Some(d),
            Term::ElementRef(r) if r == name => self.schema.elements.get(r),
            Term::Sequence(items) | Term::Choice(items) | Term::All(items) => items
                .iter()
                .find_map(|i| self.find_in_term(&i.term, name, wildcard, depth + 1)),
            Term::GroupRef(g) => self
                .schema
                .groups
                .get(g)
                .and_then(|p| self.find_in_term(&p.term, name, wildcard, depth + 1)),
            Term::Any { process, .. } => {
                wildcard.get_or_insert(*process);
                None
            }
            _ => None,
        }
    }

    fn identity_constraints(&mut self, node: Node<'s, 'input>, decl: &'s ElementDecl, path: &str) {
        for c in &decl.constraints {
            if c.kind == ConstraintKind::KeyRef {
                self.pending.push(PendingKeyRef { node, constraint: c });
                continue;
            }
            let mut table: HashSet<Vec<String>> = HashSet::new();
            for target in select(node, &c.selector) {
                let values: Option<Vec<String>> =
                    c.fields.iter().map(|f| field_value(target, f)).collect();
                match values {
                    Some(v) => {
                        if !table.insert(v.clone()) {
                            self.report(
                                target,
                                path.to_owned(),
                                format!("duplicate value [{}] for {} '{}'", v.join(", "), kind_name(c.kind), c.name),
                            );
                        }
                    }
                    None if c.kind == ConstraintKind::Key => self.report(
                        target,
                        path.to_owned(),
                        format!("key '{}' field missing on '{}'", c.name, target.tag_name().name()),
                    ),
                    None => {}
                }
            }
            self.key_tables.insert((node.id(), c.name.clone()), table);
        }
    }

    fn resolve_keyrefs(&mut self) {
        let pending = std::mem::take(&mut self.pending);
        for PendingKeyRef { node, constraint } in pending {
            let refer = constraint.refer.as_deref().unwrap_or_default();
            let table = node
                .ancestors()
                .find_map(|a| self.key_tables.get(&(a.id(), refer.to_owned())));
            let Some(table) = table else {
                self.report(node, String::new(), format!("keyref '{}' refers to unknown key '{refer}'", constraint.name));
                continue;
            };
            let mut missing = Vec::new();
            for target in select(node, &constraint.selector) {
                let values: Option<Vec<String>> =
                    constraint.fields.iter().map(|f| field_value(target, f)).collect();
                if let Some(v) = values {
                    if !table.contains(&v) {
                        missing.push((target, v));
                    }
                }
            }
            for (target, v) in missing {
                self.report(
                    target,
                    String::new(),
                    format!(
                        "keyref '{}': value [{}] does not match any '{refer}' key",
                        constraint.name,
                        v.join(", ")
                    ),
                );
            }
        }
    }
}

fn kind_name(kind: ConstraintKind) -> &'static str {
    match kind {
        ConstraintKind::Key => "key",
        ConstraintKind::Unique => "unique",
        ConstraintKind::KeyRef => "keyref",
    }
}

fn is_meta_attribute(ns: Option<&str>) -> bool {
    matches!(ns, Some(XSI_NS) | Some(XML_NS))
}

fn local(step: &str) -> &str {
    step.split_once(':').map_or(step, |(_, l)| l)
}

/// Evaluates the restricted XPath used by identity-constraint selectors.
fn select<'a, 'input>(node: Node<'a, 'input>, xpath: &str) -> Vec<Node<'a, 'input>> {
    let mut out = Vec::new();
    for alt in xpath.split('|') {
        let alt = alt.trim();
        let (descendants, rest) = match alt.strip_prefix(".//") {
            Some(r) => (true, r),
            None => (false, alt),
        };
        let mut current: Vec<Node> = if descendants {
            node.descendants().filter(|n| n.is_element()).collect()
        } else {
            vec![node]
        };
        for step in rest.split('/').filter(|s| !s.is_empty() && *s != ".") {
            let step = local(step);
            current = current
                .iter()
                .flat_map(|n| n.children())
                .filter(|c| c.is_element() && (step == "*" || c.tag_name().name() == step))
                .collect();
        }
        out.extend(current);
    }
    out
}

fn field_value(node: Node, xpath: &str) -> Option<String> {
    let xpath = xpath.trim();
    let (path, attr) = match xpath.rsplit_once('/') {
        Some((p, a)) => (Some(p), a),
        None => (None, xpath),
    };
    let target = match path {
        Some(p) => select(node, p).into_iter().next()?,
        None => node,
    };
    match attr.strip_prefix('@') {
        Some(a) => target.attribute(local(a)).map(|v| v.trim().to_owned()),
        None => {
            let el = select(target, attr).into_iter().next()?;
            el.text().map(|t| t.trim().to_owned())
        }
    }
}
