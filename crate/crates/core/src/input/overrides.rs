//! `--set` overrides: dotted paths into the input document.
//!
//! A path is a list of steps separated by dots. Each step but the last
//! selects an element below the current one: the first descendant whose
//! `id` equals the step, or else `tag` / `tag[n]`, the n-th descendant with
//! that tag name (document order, counted from 1). The last step names an
//! attribute of the selected element, which must already exist.
//!
//! `C1.r.arc.radius`, `J1.main.spiral[2].endRadius` and
//! `J1.coupler.junctionArea[1].before` are valid paths.

use roxmltree::{Document, Node};

use super::InputError;

/// Returns `text` with every `(path, value)` override applied in order.
pub fn apply_overrides(text: &str, overrides: &[(String, String)]) -> Result<String, InputError> {
    let mut text = text.to_owned();
    for (key, value) in overrides {
        text = apply_one(&text, key, value)?;
    }
    Ok(text)
}

fn apply_one(text: &str, key: &str, value: &str) -> Result<String, InputError> {
    let fail = |message: String| InputError::Override { key: key.to_owned(), message };
    let doc = Document::parse(text).map_err(|e| fail(format!("input is not well-formed: {e}")))?;
    let steps: Vec<&str> = key.split('.').collect();
    let Some((attr, path)) = steps.split_last() else { unreachable!("split yields one item") };
    if path.is_empty() || attr.is_empty() {
        return Err(fail("expected element steps followed by an attribute name".into()));
    }
    let mut node = doc.root_element();
    for step in path {
        node = find(node, step).ok_or_else(|| fail(format!("no element matches '{step}'")))?;
    }
    let attribute = node
        .attributes()
        .find(|a| a.name() == *attr)
        .ok_or_else(|| fail(format!("<{}> has no attribute '{attr}'", node.tag_name().name())))?;
    let range = attribute.range_value();
    let escaped = value.replace('&', "&amp;").replace('<', "&lt;").replace('"', "&quot;");
    Ok(format!("{}{}{}", &text[..range.start], escaped, &text[range.end..]))
}

fn find<'a, 'i>(node: Node<'a, 'i>, step: &str) -> Option<Node<'a, 'i>> {
    let below = || node.descendants().skip(1).filter(Node::is_element);
    if let Some(n) = below().find(|n| n.attribute("id") == Some(step)) {
        return Some(n);
    }
    let (tag, index) = match step.split_once('[') {
        Some((tag, rest)) => (tag, rest.strip_suffix(']')?.parse::<usize>().ok()?),
        None => (step, 1),
    };
    if index == 0 {
        return None;
    }
    below().filter(|n| n.tag_name().name() == tag).nth(index - 1)
}
