use std::collections::HashSet;
use std::f64::consts::PI;
use std::str::FromStr;

use roxmltree::{Document, Node};

use super::*;
use crate::lanes::LaneTrack;
use crate::profile::{Radius, MIN_LENGTH};

/// Declared ring length may differ from the full circle by this much.
const RING_LENGTH_TOL: f64 = 0.01;

pub fn parse(text: &str) -> Result<LogicalNetwork, InputError> {
    parse_with(text, &Defaults::default())
}

/// Parses and checks a network description, filling gaps from `defaults`.
pub fn parse_with(text: &str, defaults: &Defaults) -> Result<LogicalNetwork, InputError> {
    let doc = Document::parse(text).map_err(|e| {
        let p = e.pos();
        InputError::Xml { pos: Pos { line: p.row, column: p.col }, message: e.to_string() }
    })?;
    let diagnostics = validate_schema(text);
    if !diagnostics.is_empty() {
        return Err(InputError::Schema(diagnostics));
    }
    let reader = Reader { defaults };
    let net = reader.network(doc.root_element())?;
    check_network(&net)?;
    Ok(net)
}

pub(crate) fn pos_of(node: Node) -> Pos {
    let p = node.document().text_pos_at(node.range().start);
    Pos { line: p.row, column: p.col }
}

fn semantic(node: Node, message: impl Into<String>) -> InputError {
    InputError::Semantic { pos: pos_of(node), message: message.into() }
}

fn elements<'a, 'i>(node: Node<'a, 'i>, tag: &'static str) -> impl Iterator<Item = Node<'a, 'i>> {
    node.children().filter(move |c| c.is_element() && c.tag_name().name() == tag)
}

fn child<'a, 'i>(node: Node<'a, 'i>, tag: &'static str) -> Option<Node<'a, 'i>> {
    elements(node, tag).next()
}

fn required<'a>(node: Node<'a, '_>, name: &str) -> Result<&'a str, InputError> {
    node.attribute(name)
        .ok_or_else(|| semantic(node, format!("<{}> needs attribute '{name}'", node.tag_name().name())))
}

fn number(node: Node, name: &str) -> Result<f64, InputError> {
    optional_number(node, name)?
        .ok_or_else(|| semantic(node, format!("<{}> needs attribute '{name}'", node.tag_name().name())))
}

fn optional_number(node: Node, name: &str) -> Result<Option<f64>, InputError> {
    let Some(raw) = node.attribute(name) else { return Ok(None) };
    match raw.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(semantic(node, format!("attribute '{name}' must be a finite number, got '{raw}'"))),
    }
}

fn keyword<T: FromStr<Err = String>>(node: Node, name: &str) -> Result<Option<T>, InputError> {
    node.attribute(name)
        .map(|raw| raw.parse::<T>().map_err(|e| semantic(node, format!("attribute '{name}': {e}"))))
        .transpose()
}

fn side_of(node: Node, name: &str) -> Result<Side, InputError> {
    match required(node, name)? {
        "left" => Ok(Side::Left),
        "right" => Ok(Side::Right),
        other => Err(semantic(node, format!("unknown side '{other}'"))),
    }
}

fn arm_of(node: Node, name: &str) -> Result<ArmSide, InputError> {
    match required(node, name)? {
        "before" => Ok(ArmSide::Before),
        "after" => Ok(ArmSide::After),
        other => Err(semantic(node, format!("unknown arm '{other}'"))),
    }
}

fn end_of(node: Node, name: &str) -> Result<ContactPoint, InputError> {
    match required(node, name)? {
        "start" => Ok(ContactPoint::Start),
        "end" => Ok(ContactPoint::End),
        other => Err(semantic(node, format!("unknown road end '{other}'"))),
    }
}

fn radius(node: Node, name: &str) -> Result<Radius, InputError> {
    optional_radius(node, name)?
        .ok_or_else(|| semantic(node, format!("<{}> needs attribute '{name}'", node.tag_name().name())))
}

fn optional_radius(node: Node, name: &str) -> Result<Option<Radius>, InputError> {
    let Some(raw) = node.attribute(name) else { return Ok(None) };
    let raw = raw.trim();
    if raw == "inf" {
        return Ok(Some(Radius::Straight));
    }
    match raw.parse::<f64>() {
        Ok(r) if r.is_finite() && r != 0.0 => Ok(Some(Radius::Finite(r))),
        _ => Err(semantic(node, format!("attribute '{name}' must be a nonzero radius or 'inf', got '{raw}'"))),
    }
}

fn end_radius(element: &ProfileElement) -> Radius {
    match *element {
        ProfileElement::Line { .. } => Radius::Straight,
        ProfileElement::Arc { radius, .. } => Radius::Finite(radius),
        ProfileElement::Spiral { end, .. } => end,
    }
}

/// Radius a spiral without `endRadius` runs into.
fn start_radius(next: Node) -> Result<Radius, InputError> {
    match next.tag_name().name() {
        "line" => Ok(Radius::Straight),
        "arc" => radius(next, "radius"),
        "spiral" => optional_radius(next, "startRadius")?
            .ok_or_else(|| semantic(next, "consecutive spirals need an explicit radius between them")),
        other => Err(semantic(next, format!("unknown reference line element <{other}>"))),
    }
}

struct Reader<'d> {
    defaults: &'d Defaults,
}

impl Reader<'_> {
    fn network(&self, root: Node) -> Result<LogicalNetwork, InputError> {
        if root.tag_name().name() != "roadNetwork" {
            return Err(semantic(root, "root element must be <roadNetwork>"));
        }
        let segments_node = child(root, "segments").ok_or_else(|| semantic(root, "missing <segments>"))?;
        let mut segments = Vec::new();
        let mut ids = HashSet::new();
        for node in segments_node.children().filter(Node::is_element) {
            let seg = self.segment(node)?;
            if !ids.insert(seg.id.clone()) {
                return Err(semantic(node, format!("duplicate segment id '{}'", seg.id)));
            }
            segments.push(seg);
        }
        if segments.is_empty() {
            return Err(semantic(segments_node, "the network has no segments"));
        }

        let world_offset = match child(root, "worldOffset") {
            Some(n) => Setting::given(WorldOffset {
                segment: required(n, "segment")?.to_owned(),
                x: optional_number(n, "x")?.unwrap_or(0.0),
                y: optional_number(n, "y")?.unwrap_or(0.0),
                angle: Angle::from_degrees(optional_number(n, "angle")?.unwrap_or(0.0)),
            }),
            None => Setting::default_to(WorldOffset {
                segment: segments[0].id.clone(),
                x: 0.0,
                y: 0.0,
                angle: Angle::default(),
            }),
        };
        if !segments.iter().any(|s| s.id == world_offset.value.segment) {
            let n = child(root, "worldOffset").unwrap_or(root);
            return Err(semantic(n, format!("unknown segment '{}'", world_offset.value.segment)));
        }

        let pairs = |container: &'static str, tag: &'static str| -> Result<Vec<EndPair>, InputError> {
            let Some(c) = child(root, container) else { return Ok(Vec::new()) };
            elements(c, tag).map(|n| end_pair(n, &segments)).collect()
        };
        let links = pairs("links", "link")?;
        let close_requests = pairs("closeRoadNetwork", "close")?;

        Ok(LogicalNetwork {
            name: root.attribute("name").map(str::to_owned),
            world_offset,
            segments,
            links,
            close_requests,
        })
    }

    fn segment(&self, node: Node) -> Result<SegmentSpec, InputError> {
        let kind = match node.tag_name().name() {
            "tjunction" => SegmentKind::TJunction,
            "xjunction" => SegmentKind::XJunction,
            "roundabout" => SegmentKind::Roundabout,
            "connectionRoad" => SegmentKind::ConnectionRoad,
            other => return Err(semantic(node, format!("unknown segment type <{other}>"))),
        };
        let id = required(node, "id")?.to_owned();
        let intersection_node = child(node, "intersection");
        let reference = intersection_node
            .and_then(|i| child(i, "intersectionPoint"))
            .and_then(|p| p.attribute("road"));

        let mut roads = Vec::new();
        for r in elements(node, "road") {
            let is_reference = reference == Some(required(r, "id")?);
            let ring = kind == SegmentKind::Roundabout && is_reference;
            let road = self.road(r, kind, is_reference, ring)?;
            if roads.iter().any(|o: &RoadSpec| o.id == road.id) {
                return Err(semantic(r, format!("duplicate road id '{}' in segment '{id}'", road.id)));
            }
            roads.push(road);
        }

        let range = match kind {
            SegmentKind::ConnectionRoad => 1..=1,
            SegmentKind::TJunction => 2..=3,
            SegmentKind::XJunction => 2..=4,
            SegmentKind::Roundabout => 2..=usize::MAX,
        };
        if !range.contains(&roads.len()) {
            return Err(semantic(node, format!("<{}> cannot hold {} roads", kind.tag(), roads.len())));
        }

        let intersection = match (kind, intersection_node) {
            (SegmentKind::ConnectionRoad, None) => None,
            (SegmentKind::ConnectionRoad, Some(n)) => {
                return Err(semantic(n, "a connection road has no intersection"));
            }
            (_, None) => return Err(semantic(node, format!("<{}> needs an <intersection>", kind.tag()))),
            (_, Some(n)) => Some(self.intersection(n, kind, &roads)?),
        };
        Ok(SegmentSpec { id, kind, roads, intersection, pos: pos_of(node) })
    }

    fn road(&self, node: Node, kind: SegmentKind, is_reference: bool, ring: bool) -> Result<RoadSpec, InputError> {
        let id = required(node, "id")?.to_owned();
        let class = match keyword_class(node)? {
            Some(c) => Setting::given(c),
            None if kind == SegmentKind::ConnectionRoad || is_reference => Setting::default_to(RoadClass::Main),
            None => Setting::default_to(RoadClass::Access),
        };
        let line = child(node, "referenceLine").ok_or_else(|| semantic(node, "missing <referenceLine>"))?;
        let mut elements_written = Vec::new();
        let mut profile = CurvatureProfile::new();
        let nodes: Vec<Node> = line.children().filter(Node::is_element).collect();
        for (k, &e) in nodes.iter().enumerate() {
            let length = number(e, "length")?;
            if !(length > 0.0) {
                return Err(semantic(e, "element length must be positive"));
            }
            let element = match e.tag_name().name() {
                "line" => ProfileElement::Line { length },
                "arc" => match radius(e, "radius")? {
                    Radius::Finite(radius) => ProfileElement::Arc { length, radius },
                    Radius::Straight => return Err(semantic(e, "an arc needs a finite radius")),
                },
                "spiral" => {
                    let start = match optional_radius(e, "startRadius")? {
                        Some(r) => r,
                        None => match elements_written.last() {
                            Some(prev) => end_radius(prev),
                            None => return Err(semantic(e, "a spiral that starts the reference line needs 'startRadius'")),
                        },
                    };
                    let end = match optional_radius(e, "endRadius")? {
                        Some(r) => r,
                        None => match nodes.get(k + 1) {
                            Some(&next) => start_radius(next)?,
                            None => return Err(semantic(e, "a spiral that ends the reference line needs 'endRadius'")),
                        },
                    };
                    if start.curvature() == end.curvature() {
                        return Err(semantic(e, "a spiral needs different start and end radii"));
                    }
                    ProfileElement::Spiral { length, start, end }
                }
                other => return Err(semantic(e, format!("unknown reference line element <{other}>"))),
            };
            let mut primitive = element.to_primitive();
            if ring {
                primitive = ring_primitive(e, element)?;
            }
            profile = profile.append(primitive).map_err(|err| semantic(e, err.to_string()))?;
            elements_written.push(element);
        }
        if profile.is_empty() {
            return Err(semantic(line, "the reference line is empty"));
        }
        if ring && elements_written.len() != 1 {
            return Err(semantic(line, "a roundabout ring is a single full-circle arc"));
        }

        let lanes = match child(node, "lanes") {
            Some(l) => self.lanes(l, profile.length(), ring)?,
            None => default_lanes(class.value, ring, self.defaults),
        };
        Ok(RoadSpec { id, class, elements: elements_written, profile, lanes, pos: pos_of(node) })
    }

    fn lanes(&self, node: Node, length: f64, ring: bool) -> Result<LaneSet, InputError> {
        let center_mark = match keyword::<RoadMark>(node, "centerMark")? {
            Some(m) => Setting::given(m),
            None => Setting::default_to(self.defaults.main.center_mark),
        };
        let mut lanes = Vec::new();
        for l in elements(node, "lane") {
            let side = side_of(l, "side")?;
            if ring && side == Side::Left {
                return Err(semantic(l, "a roundabout ring carries right lanes only"));
            }
            let width = number(l, "width")?;
            if !(width > 0.0) {
                return Err(semantic(l, "lane width must be positive"));
            }
            let transition = |tag| -> Result<Option<(f64, f64)>, InputError> {
                child(l, tag).map(|t| Ok((number(t, "s")?, number(t, "length")?))).transpose()
            };
            let def = LaneDef {
                side,
                width,
                lane_type: keyword(l, "type")?
                    .map_or(Setting::default_to(self.defaults.main.lane_type), Setting::given),
                mark: keyword(l, "mark")?.map_or(Setting::default_to(self.defaults.main.mark), Setting::given),
                widening: transition("widening")?,
                lapse: transition("lapse")?,
                pos: pos_of(l),
            };
            LaneTrack::with_transitions(
                def.side,
                def.lane_type.value,
                def.mark.value,
                def.width,
                def.widening,
                def.lapse,
                length,
            )
            .map_err(|e| semantic(l, e.to_string()))?;
            lanes.push(def);
        }
        if lanes.is_empty() {
            return Err(semantic(node, "a road needs at least one lane"));
        }
        Ok(LaneSet { center_mark, lanes, defaulted: false })
    }

    fn intersection(&self, node: Node, kind: SegmentKind, roads: &[RoadSpec]) -> Result<IntersectionSpec, InputError> {
        let road_len = |n: Node, id: &str| -> Result<f64, InputError> {
            roads
                .iter()
                .find(|r| r.id == id)
                .map(RoadSpec::length)
                .ok_or_else(|| semantic(n, format!("unknown road '{id}'")))
        };
        let mut points: Vec<IntersectionPoint> = Vec::new();
        for p in elements(node, "intersectionPoint") {
            let point = IntersectionPoint {
                road: required(p, "road")?.to_owned(),
                s: number(p, "s")?,
                partner: required(p, "partner")?.to_owned(),
                partner_s: number(p, "partnerS")?,
                angle: Angle::from_degrees(number(p, "angle")?),
                pos: pos_of(p),
            };
            let len = road_len(p, &point.road)?;
            let partner_len = road_len(p, &point.partner)?;
            if !(0.0..=len).contains(&point.s) {
                return Err(semantic(p, format!("s = {} lies outside road '{}' of length {len}", point.s, point.road)));
            }
            if !(0.0..=partner_len).contains(&point.partner_s) {
                return Err(semantic(
                    p,
                    format!("partnerS = {} lies outside road '{}' of length {partner_len}", point.partner_s, point.partner),
                ));
            }
            if point.partner == point.road {
                return Err(semantic(p, "a road cannot cross itself"));
            }
            let a = point.angle.degrees();
            if !(a > -180.0 && a < 180.0) || a == 0.0 {
                return Err(semantic(p, format!("crossing angle {a} makes the roads tangent")));
            }
            if let Some(first) = points.first() {
                if first.road != point.road {
                    return Err(semantic(p, "all intersection points must name the same reference road"));
                }
                if kind != SegmentKind::Roundabout && first.s != point.s {
                    return Err(semantic(p, "all intersection points of a junction must name the same road position"));
                }
            }
            if points.iter().any(|q| q.partner == point.partner) {
                return Err(semantic(p, format!("road '{}' is attached twice", point.partner)));
            }
            points.push(point);
        }
        let Some(first) = points.first() else {
            return Err(semantic(node, "an intersection needs at least one <intersectionPoint>"));
        };
        for r in roads {
            if r.id != first.road && !points.iter().any(|p| p.partner == r.id) {
                let n = node;
                return Err(semantic(n, format!("road '{}' takes no part in the intersection", r.id)));
            }
            if points.iter().any(|p| p.partner == first.road) {
                return Err(semantic(node, "the reference road cannot also be a partner"));
            }
        }

        let at_end = |s: f64, len: f64| s <= MIN_LENGTH || s >= len - MIN_LENGTH;
        let arms_of = |id: &str, s: f64| -> Vec<ArmSide> {
            let len = roads.iter().find(|r| r.id == id).map_or(0.0, RoadSpec::length);
            let mut v = Vec::new();
            if s > MIN_LENGTH {
                v.push(ArmSide::Before);
            }
            if s < len - MIN_LENGTH {
                v.push(ArmSide::After);
            }
            v
        };
        let mut arms: Vec<ArmRef> = Vec::new();
        for (id, s) in std::iter::once((first.road.as_str(), first.s))
            .chain(points.iter().map(|p| (p.partner.as_str(), p.partner_s)))
        {
            arms.extend(arms_of(id, s).into_iter().map(|side| ArmRef { road: id.to_owned(), side }));
        }
        match kind {
            SegmentKind::TJunction if arms.len() != 3 => {
                return Err(semantic(node, format!("a T-junction needs 3 arms, these roads form {}", arms.len())));
            }
            SegmentKind::XJunction if arms.len() != 4 => {
                return Err(semantic(node, format!("an X-junction needs 4 arms, these roads form {}", arms.len())));
            }
            SegmentKind::Roundabout => {
                for p in &points {
                    let len = road_len(node, &p.partner)?;
                    if !at_end(p.partner_s, len) {
                        return Err(semantic(node, format!("access road '{}' must meet the ring at one of its ends", p.partner)));
                    }
                }
            }
            _ => {}
        }

        let coupler = match child(node, "coupler") {
            Some(c) => self.coupler(c, kind, &arms, roads)?,
            None => CouplerSpec::default(),
        };
        if kind == SegmentKind::Roundabout {
            if let Some(c) = child(node, "coupler") {
                if !coupler.additional_lanes.is_empty() || !coupler.connections.is_empty() {
                    return Err(semantic(c, "a roundabout coupler takes junction areas and minRadius only"));
                }
            }
        }
        Ok(IntersectionSpec { points, coupler })
    }

    fn coupler(&self, node: Node, kind: SegmentKind, arms: &[ArmRef], roads: &[RoadSpec]) -> Result<CouplerSpec, InputError> {
        let has_arm = |road: &str, side: ArmSide| arms.iter().any(|a| a.road == road && a.side == side);
        let arm_ref = |n: Node, road_attr: &str, arm_attr: &str| -> Result<ArmRef, InputError> {
            let road = required(n, road_attr)?.to_owned();
            let side = arm_of(n, arm_attr)?;
            if !roads.iter().any(|r| r.id == road) {
                return Err(semantic(n, format!("unknown road '{road}'")));
            }
            if !has_arm(&road, side) {
                return Err(semantic(n, format!("road '{road}' has no arm {} the intersection", side.as_str())));
            }
            Ok(ArmRef { road, side })
        };

        let mut areas: Vec<JunctionArea> = Vec::new();
        for a in elements(node, "junctionArea") {
            let road = required(a, "road")?.to_owned();
            if !roads.iter().any(|r| r.id == road) {
                return Err(semantic(a, format!("unknown road '{road}'")));
            }
            if areas.iter().any(|o| o.road == road) {
                return Err(semantic(a, format!("second junction area for road '{road}'")));
            }
            let before = optional_number(a, "before")?;
            let after = optional_number(a, "after")?;
            for (v, side) in [(before, ArmSide::Before), (after, ArmSide::After)] {
                if let Some(v) = v {
                    if !(v > 0.0) {
                        return Err(semantic(a, "junction area distances must be positive"));
                    }
                    if kind != SegmentKind::Roundabout && !has_arm(&road, side) {
                        return Err(semantic(a, format!("road '{road}' has no arm {} the intersection", side.as_str())));
                    }
                }
            }
            areas.push(JunctionArea { road, before, after, pos: pos_of(a) });
        }

        let j = &self.defaults.junction;
        let mut additional_lanes: Vec<AdditionalLane> = Vec::new();
        for l in elements(node, "additionalLane") {
            let arm = arm_ref(l, "road", "arm")?;
            let turn: Turn = keyword(l, "turn")?.ok_or_else(|| semantic(l, "<additionalLane> needs attribute 'turn'"))?;
            if additional_lanes.iter().any(|o| o.arm == arm && o.turn == turn) {
                return Err(semantic(l, format!("second {turn} turn lane on this arm")));
            }
            let positive = |name: &str| -> Result<Option<f64>, InputError> {
                match optional_number(l, name)? {
                    Some(v) if !(v > 0.0) => Err(semantic(l, format!("attribute '{name}' must be positive"))),
                    v => Ok(v),
                }
            };
            additional_lanes.push(AdditionalLane {
                arm,
                turn,
                min_radius: positive("minRadius")?,
                length: positive("length")?.map_or(Setting::default_to(j.turn_lane_length), Setting::given),
                widening: positive("widening")?.map_or(Setting::default_to(j.turn_lane_widening), Setting::given),
                width: positive("width")?.or((j.turn_lane_width > 0.0).then_some(j.turn_lane_width)),
                pos: pos_of(l),
            });
        }

        let mut connections = Vec::new();
        for c in elements(node, "connection") {
            let from = arm_ref(c, "fromRoad", "fromArm")?;
            let to = arm_ref(c, "toRoad", "toArm")?;
            if from == to {
                return Err(semantic(c, "a connection must lead to a different arm"));
            }
            let lane = |name: &str| -> Result<Option<i32>, InputError> {
                let Some(raw) = c.attribute(name) else { return Ok(None) };
                match raw.trim().parse::<i32>() {
                    Ok(0) | Err(_) => Err(semantic(c, format!("attribute '{name}' must be a nonzero lane id"))),
                    Ok(v) => Ok(Some(v)),
                }
            };
            connections.push(ConnectionSpec {
                from,
                from_lane: lane("fromLane")?,
                to,
                to_lane: lane("toLane")?,
                pos: pos_of(c),
            });
        }

        let min_radius = match optional_number(node, "minRadius")? {
            Some(v) if !(v > 0.0) => return Err(semantic(node, "minRadius must be positive")),
            v => v,
        };
        Ok(CouplerSpec { min_radius, areas, additional_lanes, connections, present: true })
    }
}

fn keyword_class(node: Node) -> Result<Option<RoadClass>, InputError> {
    match node.attribute("class") {
        None => Ok(None),
        Some("main") => Ok(Some(RoadClass::Main)),
        Some("access") => Ok(Some(RoadClass::Access)),
        Some(other) => Err(semantic(node, format!("unknown road class '{other}'"))),
    }
}

/// The ring of a roundabout closes exactly; the declared length only has to
/// agree with the full circle.
fn ring_primitive(node: Node, element: ProfileElement) -> Result<crate::profile::Primitive, InputError> {
    let ProfileElement::Arc { length, radius } = element else {
        return Err(semantic(node, "a roundabout ring is a single full-circle arc"));
    };
    let full = 2.0 * PI * radius.abs();
    if (length - full).abs() > RING_LENGTH_TOL {
        return Err(semantic(node, format!("a roundabout ring of radius {radius} has length {full}, not {length}")));
    }
    Ok(crate::profile::Primitive::Arc { length: full, curvature: 1.0 / radius })
}

fn end_pair(node: Node, segments: &[SegmentSpec]) -> Result<EndPair, InputError> {
    let end_ref = |suffix: &str| -> Result<EndRef, InputError> {
        let segment = required(node, &format!("segment{suffix}"))?.to_owned();
        let road = required(node, &format!("road{suffix}"))?.to_owned();
        let end = end_of(node, &format!("end{suffix}"))?;
        let seg = segments
            .iter()
            .find(|s| s.id == segment)
            .ok_or_else(|| semantic(node, format!("unknown segment '{segment}'")))?;
        if seg.road(&road).is_none() {
            return Err(semantic(node, format!("segment '{segment}' has no road '{road}'")));
        }
        if !seg.is_free_end(&road, end) {
            return Err(semantic(node, format!("{segment}.{road}.{} is not a free road end", end.as_str())));
        }
        Ok(EndRef { segment, road, end })
    };
    Ok(EndPair { a: end_ref("A")?, b: end_ref("B")?, pos: pos_of(node) })
}

fn check_network(net: &LogicalNetwork) -> Result<(), InputError> {
    let mut used: HashSet<&EndRef> = HashSet::new();
    for pair in net.links.iter().chain(&net.close_requests) {
        if pair.a == pair.b {
            return Err(InputError::Semantic { pos: pair.pos, message: format!("{} is paired with itself", pair.a) });
        }
        for e in [&pair.a, &pair.b] {
            if !used.insert(e) {
                return Err(InputError::Semantic {
                    pos: pair.pos,
                    message: format!("road end {e} is used by more than one link or close request"),
                });
            }
        }
    }
    Ok(())
}
