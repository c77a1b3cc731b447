//! OpenDRIVE output.

use std::fmt::{self, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::lanes::{LaneSectionPlan, LaneSpec, Side};
use crate::model::{Link, Road, RoadNetwork};
use crate::profile::Primitive;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdrVersion {
    V1_4,
    V1_5,
}

impl OdrVersion {
    pub fn minor(self) -> u32 {
        match self {
            OdrVersion::V1_4 => 4,
            OdrVersion::V1_5 => 5,
        }
    }
}

impl FromStr for OdrVersion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "1.4" => Ok(OdrVersion::V1_4),
            "1.5" => Ok(OdrVersion::V1_5),
            _ => Err(format!("unsupported OpenDRIVE version '{s}' (expected 1.4 or 1.5)")),
        }
    }
}

impl fmt::Display for OdrVersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1.{}", self.minor())
    }
}

/// Road id in the output.
pub fn road_id(index: usize) -> usize {
    index + 1
}

/// Junction ids follow the road ids.
pub fn junction_id(net: &RoadNetwork, index: usize) -> usize {
    net.roads.len() + index + 1
}

/// Decimal text with 17 significant digits, trailing zeros removed.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let digits = digits.trim_end_matches('0');
    if !(-6..17).contains(&exp) {
        let (head, tail) = digits.split_at(1);
        return if tail.is_empty() { format!("{sign}{head}e{exp}") } else { format!("{sign}{head}.{tail}e{exp}") };
    }
    let body = if exp < 0 {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    } else {
        let point = exp as usize + 1;
        if digits.len() <= point {
            format!("{digits}{}", "0".repeat(point - digits.len()))
        } else {
            format!("{}.{}", &digits[..point], &digits[point..])
        }
    };
    format!("{sign}{body}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmitOptions {
    pub version: OdrVersion,
    /// Header date; left out when `None` so that output stays reproducible.
    pub date: Option<String>,
}

impl EmitOptions {
    pub fn new(version: OdrVersion) -> EmitOptions {
        EmitOptions { version, date: None }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Out {
    text: String,
    depth: usize,
}

impl Out {
    fn line(&mut self, s: &str) {
        for _ in 0..self.depth {
            self.text.push_str("  ");
        }
        self.text.push_str(s);
        self.text.push('\n');
    }

    fn open(&mut self, s: &str) {
        self.line(s);
        self.depth += 1;
    }

    fn close(&mut self, s: &str) {
        self.depth -= 1;
        self.line(s);
    }
}

fn attrs(pairs: &[(&str, String)]) -> String {
    let mut s = String::new();
    for (k, v) in pairs {
        let _ = write!(s, " {k}=\"{v}\"");
    }
    s
}

/// Reference-line bounding box: (north, south, east, west).
fn bounds(net: &RoadNetwork) -> (f64, f64, f64, f64) {
    let (mut n, mut s, mut e, mut w) = (f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY);
    for road in &net.roads {
        let g = road.geometry();
        let steps = (g.length.ceil() as usize).max(1);
        for i in 0..=steps {
            let p = g.pose_at(g.length * i as f64 / steps as f64);
            n = n.max(p.y);
            s = s.min(p.y);
            e = e.max(p.x);
            w = w.min(p.x);
        }
    }
    if net.roads.is_empty() {
        return (0.0, 0.0, 0.0, 0.0);
    }
    (n, s, e, w)
}

/// Serializes a road network. The same network and options always give the
/// same text.
pub fn emit(net: &RoadNetwork, options: &EmitOptions) -> String {
    let mut out = Out { text: String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"), depth: 0 };
    out.open("<OpenDRIVE>");
    let (north, south, east, west) = bounds(net);
    let mut header = vec![
        ("revMajor", "1".to_string()),
        ("revMinor", options.version.minor().to_string()),
        ("name", escape(&net.name)),
        ("version", "1.00".to_string()),
    ];
    if let Some(d) = &options.date {
        header.push(("date", escape(d)));
    }
    header.extend([("north", num(north)), ("south", num(south)), ("east", num(east)), ("west", num(west))]);
    out.line(&format!("<header{}/>", attrs(&header)));
    for (i, road) in net.roads.iter().enumerate() {
        emit_road(&mut out, net, i, road);
    }
    for (j, junction) in net.junctions.iter().enumerate() {
        out.open(&format!(
            "<junction{}>",
            attrs(&[("name", escape(&junction.name)), ("id", junction_id(net, j).to_string())])
        ));
        for (k, c) in junction.connections.iter().enumerate() {
            out.open(&format!(
                "<connection{}>",
                attrs(&[
                    ("id", k.to_string()),
                    ("incomingRoad", road_id(c.incoming).to_string()),
                    ("connectingRoad", road_id(c.connecting).to_string()),
                    ("contactPoint", c.contact.as_str().into()),
                ])
            ));
            for (from, to) in &c.lane_links {
                out.line(&format!("<laneLink from=\"{from}\" to=\"{to}\"/>"));
            }
            out.close("</connection>");
        }
        out.close("</junction>");
    }
    out.close("</OpenDRIVE>");
    out.text
}

fn link_element(net: &RoadNetwork, tag: &str, link: Link) -> String {
    match link {
        Link::Road { road, contact } => format!(
            "<{tag}{}/>",
            attrs(&[
                ("elementType", "road".into()),
                ("elementId", road_id(road).to_string()),
                ("contactPoint", contact.as_str().into()),
            ])
        ),
        Link::Junction(j) => format!(
            "<{tag}{}/>",
            attrs(&[("elementType", "junction".into()), ("elementId", junction_id(net, j).to_string())])
        ),
    }
}

fn emit_road(out: &mut Out, net: &RoadNetwork, index: usize, road: &Road) {
    let junction = road.junction.map_or("-1".to_string(), |j| junction_id(net, j).to_string());
    out.open(&format!(
        "<road{}>",
        attrs(&[
            ("name", escape(&road.name)),
            ("length", num(road.length())),
            ("id", road_id(index).to_string()),
            ("junction", junction),
        ])
    ));
    if road.predecessor.is_none() && road.successor.is_none() {
        out.line("<link/>");
    } else {
        out.open("<link>");
        if let Some(l) = road.predecessor {
            out.line(&link_element(net, "predecessor", l));
        }
        if let Some(l) = road.successor {
            out.line(&link_element(net, "successor", l));
        }
        out.close("</link>");
    }
    out.open("<planView>");
    for r in road.geometry().records {
        let head = attrs(&[
            ("s", num(r.s)),
            ("x", num(r.start.x)),
            ("y", num(r.start.y)),
            ("hdg", num(r.start.phi)),
            ("length", num(r.primitive.length())),
        ]);
        let shape = match r.primitive {
            Primitive::Line { .. } => "<line/>".to_string(),
            Primitive::Arc { curvature, .. } => format!("<arc curvature=\"{}\"/>", num(curvature)),
            Primitive::Spiral { k_start, k_end, .. } => {
                format!("<spiral curvStart=\"{}\" curvEnd=\"{}\"/>", num(k_start), num(k_end))
            }
        };
        out.line(&format!("<geometry{head}>{shape}</geometry>"));
    }
    out.close("</planView>");
    out.open("<lanes>");
    for (k, section) in road.sections.iter().enumerate() {
        let s_end = road.sections.get(k + 1).map_or(road.length(), |n| n.s_start);
        emit_section(out, section, s_end);
    }
    out.close("</lanes>");
    out.close("</road>");
}

fn emit_section(out: &mut Out, section: &LaneSectionPlan, s_end: f64) {
    out.open(&format!("<laneSection s=\"{}\">", num(section.s_start)));
    let mut left = section.side(Side::Left);
    left.sort_by_key(|l| -l.id);
    if !left.is_empty() {
        out.open("<left>");
        for l in left {
            emit_lane(out, section.s_start, s_end, l);
        }
        out.close("</left>");
    }
    out.open("<center>");
    out.open("<lane id=\"0\" type=\"none\" level=\"false\">");
    out.line(&road_mark(section.center_mark.as_str()));
    out.close("</lane>");
    out.close("</center>");
    let mut right = section.side(Side::Right);
    right.sort_by_key(|l| -l.id);
    if !right.is_empty() {
        out.open("<right>");
        for l in right {
            emit_lane(out, section.s_start, s_end, l);
        }
        out.close("</right>");
    }
    out.close("</laneSection>");
}

fn road_mark(kind: &str) -> String {
    format!("<roadMark sOffset=\"0\" type=\"{kind}\" weight=\"standard\" color=\"standard\"/>")
}

fn emit_lane(out: &mut Out, s_start: f64, s_end: f64, lane: &LaneSpec) {
    out.open(&format!(
        "<lane{}>",
        attrs(&[("id", lane.id.to_string()), ("type", lane.lane_type.as_str().into()), ("level", "false".into())])
    ));
    if lane.predecessor.is_some() || lane.successor.is_some() {
        out.open("<link>");
        if let Some(p) = lane.predecessor {
            out.line(&format!("<predecessor id=\"{p}\"/>"));
        }
        if let Some(s) = lane.successor {
            out.line(&format!("<successor id=\"{s}\"/>"));
        }
        out.close("</link>");
    }
    let mut widths: Vec<_> = lane.widths.iter().filter(|w| w.valid_to > s_start && w.valid_from < s_end).collect();
    widths.sort_by(|a, b| a.valid_from.total_cmp(&b.valid_from));
    for w in widths {
        let w = if w.valid_from < s_start { w.rebased(s_start) } else { *w };
        // Output order is constant term first.
        out.line(&format!(
            "<width{}/>",
            attrs(&[
                ("sOffset", num(w.valid_from - s_start)),
                ("a", num(w.d)),
                ("b", num(w.c)),
                ("c", num(w.b)),
                ("d", num(w.a)),
            ])
        ));
    }
    out.line(&road_mark(lane.mark.as_str()));
    out.close("</lane>");
}

/// Referential problems in a road network, empty when it is consistent.
pub fn check_consistency(net: &RoadNetwork) -> Vec<String> {
    let mut problems = Vec::new();
    for (i, road) in net.roads.iter().enumerate() {
        let name = &road.name;
        if road.profile.primitives().iter().any(|p| !(p.length() > 0.0)) {
            problems.push(format!("road {name}: geometry record without positive length"));
        }
        if road.sections.is_empty() {
            problems.push(format!("road {name}: no lane sections"));
        }
        for section in &road.sections {
            let mut ids: Vec<i32> = section.lanes.iter().map(|l| l.id).collect();
            ids.sort_unstable();
            ids.dedup();
            if ids.len() != section.lanes.len() {
                problems.push(format!("road {name}: duplicate lane ids in section at s = {}", section.s_start));
            }
        }
        for (contact, link) in [
            (crate::model::ContactPoint::Start, road.predecessor),
            (crate::model::ContactPoint::End, road.successor),
        ] {
            let Some(Link::Road { road: other, contact: oc }) = link else { continue };
            let Some(o) = net.roads.get(other) else {
                problems.push(format!("road {name}: link to missing road {other}"));
                continue;
            };
            // Links from connecting roads are answered by the junction record.
            if road.junction.is_some() || o.junction.is_some() {
                continue;
            }
            if o.link(oc) != Some(Link::Road { road: i, contact }) {
                problems.push(format!("road {name}: {} link to {} is not returned", contact.as_str(), o.name));
            }
            let own = road.end_section(contact);
            let theirs = o.end_section(oc);
            for lane in &own.lanes {
                let target = match contact {
                    crate::model::ContactPoint::Start => lane.predecessor,
                    crate::model::ContactPoint::End => lane.successor,
                };
                if let Some(t) = target {
                    if theirs.lane(t).is_none() {
                        problems.push(format!("road {name}: lane {} links to missing lane {t} of {}", lane.id, o.name));
                    }
                }
            }
        }
    }
    for junction in &net.junctions {
        for c in &junction.connections {
            let (Some(inc), Some(con)) = (net.roads.get(c.incoming), net.roads.get(c.connecting)) else {
                problems.push(format!("junction {}: connection to a missing road", junction.name));
                continue;
            };
            if con.junction.is_none() {
                problems.push(format!("junction {}: road {} is not a connecting road", junction.name, con.name));
            }
            let inc_contact = match con.link(c.contact) {
                Some(Link::Road { road, contact }) if road == c.incoming => contact,
                _ => {
                    problems.push(format!("junction {}: {} does not touch {}", junction.name, con.name, inc.name));
                    continue;
                }
            };
            for (from, to) in &c.lane_links {
                if inc.end_section(inc_contact).lane(*from).is_none() || con.end_section(c.contact).lane(*to).is_none() {
                    problems.push(format!(
                        "junction {}: lane link {from} -> {to} between {} and {} names a missing lane",
                        junction.name, inc.name, con.name
                    ));
                }
            }
        }
    }
    problems
}

#[derive(Debug, thiserror::Error)]
pub enum ValidateError {
    #[error("cannot read schema {path}: {message}")]
    Schema { path: String, message: String },
}

/// The OpenDRIVE schema shipped with the tool for `version`.
pub fn builtin_schema_text(version: OdrVersion) -> &'static str {
    match version {
        OdrVersion::V1_4 => include_str!("../../../schemas/opendrive/OpenDRIVE_1.4H.xsd"),
        OdrVersion::V1_5 => include_str!("../../../schemas/opendrive/OpenDRIVE_1.5M.xsd"),
    }
}

/// Checks `xml` against the shipped schema of `version`.
pub fn validate_builtin(xml: &str, version: OdrVersion) -> Vec<xsdcheck::Diagnostic> {
    static SCHEMAS: [OnceLock<xsdcheck::Schema>; 2] = [OnceLock::new(), OnceLock::new()];
    let slot = &SCHEMAS[(version.minor() - 4) as usize];
    slot.get_or_init(|| xsdcheck::Schema::parse(builtin_schema_text(version)).expect("shipped schema compiles"))
        .validate_str(xml)
}

/// Checks `xml` against the XSD at `path`.
pub fn validate(xml: &str, path: &Path) -> Result<Vec<xsdcheck::Diagnostic>, ValidateError> {
    let schema = xsdcheck::Schema::from_file(path)
        .map_err(|e| ValidateError::Schema { path: path.display().to_string(), message: e.to_string() })?;
    Ok(schema.validate_str(xml))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_text() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(3.5), "3.5");
        assert_eq!(num(100.0), "100");
        assert_eq!(num(-2.0), "-2");
        assert_eq!(num(0.1), "0.10000000000000001");
        assert_eq!(num(1e-9), "1.0000000000000001e-9");
        assert_eq!(num(0.00125), "0.00125");
        assert_eq!(num(1e20), "1e20");
        for v in [std::f64::consts::PI, -1.0 / 3.0, 123456.789, 2.5e-7, 9.999999999999999e16] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v, "{v}");
        }
    }

    #[test]
    fn versions() {
        assert_eq!("1.4".parse::<OdrVersion>(), Ok(OdrVersion::V1_4));
        assert_eq!(OdrVersion::V1_5.to_string(), "1.5");
        assert!("1.6".parse::<OdrVersion>().is_err());
    }
}
