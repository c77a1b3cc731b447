//! Compiles an XSD document into a [`Schema`].

use regex::Regex;
use roxmltree::{Document, Node};

use crate::model::*;
use crate::SchemaError;

pub(crate) const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema";

pub(crate) fn compile(text: &str) -> Result<Schema, SchemaError> {
    let doc = Document::parse(text).map_err(|e| SchemaError::Xml(e.to_string()))?;
    let root = doc.root_element();
    if !is_xs(&root, "schema") {
        return Err(SchemaError::Invalid {
            line: line_of(&root),
            message: "root element is not xs:schema".into(),
        });
    }
    let mut schema = Schema {
        target_namespace: root.attribute("targetNamespace").map(str::to_owned),
        ..Schema::default()
    };
    for child in xs_children(&root) {
        match child.tag_name().name() {
            "element" => {
                let decl = element_decl(&child)?;
                schema.elements.insert(decl.name.clone(), decl);
            }
            "complexType" => {
                let name = required_attr(&child, "name")?;
                schema
                    .types
                    .insert(name.to_owned(), TypeDef::Complex(complex_type(&child)?));
            }
            "simpleType" => {
                let name = required_attr(&child, "name")?;
                schema
                    .types
                    .insert(name.to_owned(), TypeDef::Simple(simple_type(&child)?));
            }
            "group" => {
                let name = required_attr(&child, "name")?;
                let model = xs_children(&child)
                    .find(|n| matches!(n.tag_name().name(), "sequence" | "choice" | "all"))
                    .ok_or_else(|| invalid(&child, "group without model group"))?;
                schema
                    .groups
                    .insert(name.to_owned(), particle(&model)?);
            }
            "attributeGroup" => {
                let name = required_attr(&child, "name")?;
                let (attrs, groups, _) = attributes_of(&child)?;
                schema.attribute_groups.insert(name.to_owned(), (attrs, groups));
            }
            "annotation" => {}
            "import" | "include" | "redefine" => {
                return Err(invalid(&child, "schema composition is not supported"))
            }
            other => return Err(invalid(&child, &format!("unsupported top-level xs:{other}"))),
        }
    }
    Ok(schema)
}

fn is_xs(node: &Node, name: &str) -> bool {
    node.is_element()
        && node.tag_name().namespace() == Some(XSD_NS)
        && node.tag_name().name() == name
}

fn xs_children<'a, 'input>(node: &Node<'a, 'input>) -> impl Iterator<Item = Node<'a, 'input>> {
    node.children()
        .filter(|n| n.is_element() && n.tag_name().namespace() == Some(XSD_NS))
}

fn line_of(node: &Node) -> u32 {
    node.document().text_pos_at(node.range().start).row
}

fn invalid(node: &Node, message: &str) -> SchemaError {
    SchemaError::Invalid {
        line: line_of(node),
        message: message.to_owned(),
    }
}

fn required_attr<'a>(node: &Node<'a, '_>, name: &str) -> Result<&'a str, SchemaError> {
    node.attribute(name)
        .ok_or_else(|| invalid(node, &format!("missing attribute '{name}'")))
}

/// Splits a QName and reports whether it lives in the XSD namespace.
fn resolve_qname<'a>(node: &Node, qname: &'a str) -> (bool, &'a str) {
    match qname.split_once(':') {
        Some((prefix, local)) => {
            let ns = node.lookup_namespace_uri(Some(prefix));
            (ns == Some(XSD_NS), local)
        }
        None => {
            let ns = node.lookup_namespace_uri(None);
            (ns == Some(XSD_NS), qname)
        }
    }
}

fn simple_ref(node: &Node, qname: &str) -> Result<SimpleTypeRef, SchemaError> {
    let (builtin, local) = resolve_qname(node, qname);
    if builtin {
        Builtin::from_local_name(local)
            .map(SimpleTypeRef::Builtin)
            .ok_or_else(|| invalid(node, &format!("unsupported built-in type '{qname}'")))
    } else {
        Ok(SimpleTypeRef::Named(local.to_owned()))
    }
}

fn type_ref(node: &Node, qname: &str) -> Result<TypeRef, SchemaError> {
    let (builtin, local) = resolve_qname(node, qname);
    if builtin {
        if local == "anyType" {
            return Ok(TypeRef::AnyType);
        }
        return simple_ref(node, qname).map(TypeRef::Simple);
    }
    Ok(TypeRef::Named(local.to_owned()))
}

fn occurs(node: &Node) -> Result<Occurs, SchemaError> {
    let min = match node.attribute("minOccurs") {
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| invalid(node, "bad minOccurs"))?,
        None => 1,
    };
    let max = match node.attribute("maxOccurs") {
        Some("unbounded") => MaxOccurs::Unbounded,
        Some(v) => MaxOccurs::Bounded(
            v.trim()
                .parse()
                .map_err(|_| invalid(node, "bad maxOccurs"))?,
        ),
        None => MaxOccurs::Bounded(1),
    };
    Ok(Occurs { min, max })
}

fn element_decl(node: &Node) -> Result<ElementDecl, SchemaError> {
    let name = required_attr(node, "name")?.to_owned();
    let mut ty = match node.attribute("type") {
        Some(t) => type_ref(node, t)?,
        None => TypeRef::AnyType,
    };
    let mut constraints = Vec::new();
    for child in xs_children(node) {
        match child.tag_name().name() {
            "complexType" => ty = TypeRef::InlineComplex(Box::new(complex_type(&child)?)),
            "simpleType" => {
                ty = TypeRef::Simple(SimpleTypeRef::Inline(Box::new(simple_type(&child)?)))
            }
            "key" | "unique" | "keyref" => constraints.push(identity_constraint(&child)?),
            "annotation" => {}
            other => return Err(invalid(&child, &format!("unexpected xs:{other} in element"))),
        }
    }
    Ok(ElementDecl {
        name,
        ty,
        fixed: node.attribute("fixed").map(str::to_owned),
        constraints,
    })
}

fn identity_constraint(node: &Node) -> Result<IdentityConstraint, SchemaError> {
    let kind = match node.tag_name().name() {
        "key" => ConstraintKind::Key,
        "unique" => ConstraintKind::Unique,
        _ => ConstraintKind::KeyRef,
    };
    let mut selector = None;
    let mut fields = Vec::new();
    for child in xs_children(node) {
        match child.tag_name().name() {
            "selector" => selector = Some(required_attr(&child, "xpath")?.to_owned()),
            "field" => fields.push(required_attr(&child, "xpath")?.to_owned()),
            _ => {}
        }
    }
    let refer = node
        .attribute("refer")
        .map(|r| r.split_once(':').map_or(r, |(_, l)| l).to_owned());
    if kind == ConstraintKind::KeyRef && refer.is_none() {
        return Err(invalid(node, "keyref without refer"));
    }
    Ok(IdentityConstraint {
        kind,
        name: required_attr(node, "name")?.to_owned(),
        refer,
        selector: selector.ok_or_else(|| invalid(node, "identity constraint without selector"))?,
        fields,
    })
}

fn particle(node: &Node) -> Result<Particle, SchemaError> {
    let occurs = occurs(node)?;
    let term = match node.tag_name().name() {
        "element" => match node.attribute("ref") {
            Some(r) => Term::ElementRef(resolve_qname(node, r).1.to_owned()),
            None => Term::Element(Box::new(element_decl(node)?)),
        },
        "sequence" | "choice" | "all" => {
            let items = xs_children(node)
                .filter(|c| c.tag_name().name() != "annotation")
                .map(|c| particle(&c))
                .collect::<Result<Vec<_>, _>>()?;
            match node.tag_name().name() {
                "sequence" => Term::Sequence(items),
                "choice" => Term::Choice(items),
                _ => Term::All(items),
            }
        }
        "group" => Term::GroupRef(resolve_qname(node, required_attr(node, "ref")?).1.to_owned()),
        "any" => {
            let namespace = match node.attribute("namespace").unwrap_or("##any").trim() {
                "##any" => NamespaceConstraint::Any,
                "##other" => NamespaceConstraint::Other,
                "##local" => NamespaceConstraint::Local,
                list => NamespaceConstraint::List(
                    list.split_whitespace()
                        .map(|t| match t {
                            "##local" => None,
                            uri => Some(uri.to_owned()),
                        })
                        .collect(),
                ),
            };
            let process = match node.attribute("processContents").unwrap_or("strict") {
                "lax" => ProcessContents::Lax,
                "skip" => ProcessContents::Skip,
                _ => ProcessContents::Strict,
            };
            Term::Any { namespace, process }
        }
        other => return Err(invalid(node, &format!("unexpected xs:{other} in content model"))),
    };
    Ok(Particle { occurs, term })
}

type AttributeParts = (Vec<AttributeDecl>, Vec<String>, bool);

fn attributes_of(node: &Node) -> Result<AttributeParts, SchemaError> {
    let mut attrs = Vec::new();
    let mut groups = Vec::new();
    let mut any = false;
    for child in xs_children(node) {
        match child.tag_name().name() {
            "attribute" => attrs.push(attribute_decl(&child)?),
            "attributeGroup" => {
                groups.push(resolve_qname(&child, required_attr(&child, "ref")?).1.to_owned())
            }
            "anyAttribute" => any = true,
            _ => {}
        }
    }
    Ok((attrs, groups, any))
}

fn attribute_decl(node: &Node) -> Result<AttributeDecl, SchemaError> {
    if node.attribute("ref").is_some() {
        return Err(invalid(node, "attribute references are not supported"));
    }
    let mut ty = match node.attribute("type") {
        Some(t) => simple_ref(node, t)?,
        None => SimpleTypeRef::Builtin(Builtin::AnySimpleType),
    };
    if let Some(inline) = xs_children(node).find(|c| c.tag_name().name() == "simpleType") {
        ty = SimpleTypeRef::Inline(Box::new(simple_type(&inline)?));
    }
    let usage = node.attribute("use").unwrap_or("optional");
    Ok(AttributeDecl {
        name: required_attr(node, "name")?.to_owned(),
        ty,
        required: usage == "required",
        prohibited: usage == "prohibited",
        fixed: node.attribute("fixed").map(str::to_owned),
    })
}

fn complex_type(node: &Node) -> Result<ComplexType, SchemaError> {
    let mut ct = ComplexType {
        mixed: node.attribute("mixed") == Some("true"),
        extends: None,
        content: Content::Empty,
        attributes: Vec::new(),
        attribute_groups: Vec::new(),
        any_attribute: false,
    };
    let mut attr_host = *node;
    for child in xs_children(node) {
        match child.tag_name().name() {
            "sequence" | "choice" | "all" | "group" => {
                ct.content = Content::Elements(particle(&child)?)
            }
            "complexContent" => {
                if child.attribute("mixed") == Some("true") {
                    ct.mixed = true;
                }
                let derivation = xs_children(&child)
                    .find(|c| matches!(c.tag_name().name(), "extension" | "restriction"))
                    .ok_or_else(|| invalid(&child, "complexContent without derivation"))?;
                let base = resolve_qname(&derivation, required_attr(&derivation, "base")?).1;
                if derivation.tag_name().name() == "extension" {
                    ct.extends = Some(base.to_owned());
                }
                if let Some(model) = xs_children(&derivation).find(|c| {
                    matches!(c.tag_name().name(), "sequence" | "choice" | "all" | "group")
                }) {
                    ct.content = Content::Elements(particle(&model)?);
                }
                attr_host = derivation;
            }
            "simpleContent" => {
                let derivation = xs_children(&child)
                    .find(|c| matches!(c.tag_name().name(), "extension" | "restriction"))
                    .ok_or_else(|| invalid(&child, "simpleContent without derivation"))?;
                let base = required_attr(&derivation, "base")?;
                ct.content = Content::Simple(simple_ref(&derivation, base)?);
                attr_host = derivation;
            }
            _ => {}
        }
    }
    let (attrs, groups, any) = attributes_of(&attr_host)?;
    ct.attributes.extend(attrs);
    ct.attribute_groups.extend(groups);
    ct.any_attribute |= any;
    Ok(ct)
}

fn simple_type(node: &Node) -> Result<SimpleType, SchemaError> {
    for child in xs_children(node) {
        match child.tag_name().name() {
            "restriction" => {
                let base = match child.attribute("base") {
                    Some(b) => simple_ref(&child, b)?,
                    None => {
                        let inline = xs_children(&child)
                            .find(|c| c.tag_name().name() == "simpleType")
                            .ok_or_else(|| invalid(&child, "restriction without base"))?;
                        SimpleTypeRef::Inline(Box::new(simple_type(&inline)?))
                    }
                };
                return Ok(SimpleType::Restriction {
                    base,
                    facets: facets(&child)?,
                });
            }
            "union" => {
                let mut members = Vec::new();
                if let Some(list) = child.attribute("memberTypes") {
                    for qn in list.split_whitespace() {
                        members.push(simple_ref(&child, qn)?);
                    }
                }
                for inline in xs_children(&child).filter(|c| c.tag_name().name() == "simpleType")
                {
                    members.push(SimpleTypeRef::Inline(Box::new(simple_type(&inline)?)));
                }
                return Ok(SimpleType::Union(members));
            }
            "list" => {
                let item = match child.attribute("itemType") {
                    Some(t) => simple_ref(&child, t)?,
                    None => {
                        let inline = xs_children(&child)
                            .find(|c| c.tag_name().name() == "simpleType")
                            .ok_or_else(|| invalid(&child, "list without item type"))?;
                        SimpleTypeRef::Inline(Box::new(simple_type(&inline)?))
                    }
                };
                return Ok(SimpleType::List(item));
            }
            _ => {}
        }
    }
    Err(invalid(node, "simpleType without restriction, union or list"))
}

fn facets(node: &Node) -> Result<Facets, SchemaError> {
    let mut f = Facets::default();
    for child in xs_children(node) {
        let value = || required_attr(&child, "value");
        let number = || -> Result<f64, SchemaError> {
            value()?
                .trim()
                .parse::<f64>()
                .map_err(|_| invalid(&child, "non-numeric facet value"))
        };
        let count = || -> Result<usize, SchemaError> {
            value()?
                .trim()
                .parse::<usize>()
                .map_err(|_| invalid(&child, "bad length facet"))
        };
        match child.tag_name().name() {
            "enumeration" => f.enumeration.push(value()?.to_owned()),
            "pattern" => f.patterns.push(compile_pattern(&child, value()?)?),
            "minInclusive" => f.min_inclusive = Some(number()?),
            "maxInclusive" => f.max_inclusive = Some(number()?),
            "minExclusive" => f.min_exclusive = Some(number()?),
            "maxExclusive" => f.max_exclusive = Some(number()?),
            "length" => f.length = Some(count()?),
            "minLength" => f.min_length = Some(count()?),
            "maxLength" => f.max_length = Some(count()?),
            // whiteSpace, totalDigits, fractionDigits are accepted without checking
            _ => {}
        }
    }
    Ok(f)
}

/// XSD patterns are implicitly anchored and use a regex dialect close to the
/// one of the `regex` crate; the XML name escapes are mapped onto classes.
fn compile_pattern(node: &Node, pattern: &str) -> Result<Regex, SchemaError> {
    let translated = pattern
        .replace("\\i", "[_:A-Za-z]")
        .replace("\\c", "[-._:A-Za-z0-9]");
    Regex::new(&format!("^(?:{translated})$"))
        .map_err(|e| invalid(node, &format!("unsupported pattern '{pattern}': {e}")))
}
