use std::fmt::Write;

use super::*;

/// Writes a network back as input XML. Defaulted values are left out, so
/// parsing the result gives the same network.
pub fn to_xml(net: &LogicalNetwork) -> String {
    let mut w = Writer { out: String::new(), depth: 0 };
    w.out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let name = net.name.as_deref().map(|n| vec![("name", escape(n))]).unwrap_or_default();
    w.open("roadNetwork", &name);
    if !net.world_offset.defaulted {
        let o = &net.world_offset.value;
        w.empty(
            "worldOffset",
            &[
                ("segment", o.segment.clone()),
                ("x", num(o.x)),
                ("y", num(o.y)),
                ("angle", num(o.angle.degrees())),
            ],
        );
    }
    w.open("segments", &[]);
    for seg in &net.segments {
        w.segment(seg);
    }
    w.close("segments");
    for (container, tag, pairs) in [("links", "link", &net.links), ("closeRoadNetwork", "close", &net.close_requests)] {
        if pairs.is_empty() {
            continue;
        }
        w.open(container, &[]);
        for p in pairs {
            w.empty(
                tag,
                &[
                    ("segmentA", p.a.segment.clone()),
                    ("roadA", p.a.road.clone()),
                    ("endA", p.a.end.as_str().into()),
                    ("segmentB", p.b.segment.clone()),
                    ("roadB", p.b.road.clone()),
                    ("endB", p.b.end.as_str().into()),
                ],
            );
        }
        w.close(container);
    }
    w.close("roadNetwork");
    w.out
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('"', "&quot;")
}

struct Writer {
    out: String,
    depth: usize,
}

impl Writer {
    fn start(&mut self, tag: &str, attrs: &[(&str, String)]) {
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
        self.out.push('<');
        self.out.push_str(tag);
        for (k, v) in attrs {
            let _ = write!(self.out, " {k}=\"{v}\"");
        }
    }

    fn open(&mut self, tag: &str, attrs: &[(&str, String)]) {
        self.start(tag, attrs);
        self.out.push_str(">\n");
        self.depth += 1;
    }

    fn empty(&mut self, tag: &str, attrs: &[(&str, String)]) {
        self.start(tag, attrs);
        self.out.push_str("/>\n");
    }

    fn close(&mut self, tag: &str) {
        self.depth -= 1;
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
        let _ = writeln!(self.out, "</{tag}>");
    }

    fn segment(&mut self, seg: &SegmentSpec) {
        let tag = seg.kind.tag();
        self.open(tag, &[("id", seg.id.clone())]);
        for road in &seg.roads {
            self.road(road);
        }
        if let Some(i) = &seg.intersection {
            self.intersection(i);
        }
        self.close(tag);
    }

    fn road(&mut self, road: &RoadSpec) {
        let mut attrs = vec![("id", road.id.clone())];
        if !road.class.defaulted {
            attrs.push(("class", road.class.value.as_str().into()));
        }
        self.open("road", &attrs);
        self.open("referenceLine", &[]);
        for e in &road.elements {
            match *e {
                ProfileElement::Line { length } => self.empty("line", &[("length", num(length))]),
                ProfileElement::Arc { length, radius } => {
                    self.empty("arc", &[("length", num(length)), ("radius", num(radius))])
                }
                ProfileElement::Spiral { length, start, end } => self.empty(
                    "spiral",
                    &[("length", num(length)), ("startRadius", start.to_string()), ("endRadius", end.to_string())],
                ),
            }
        }
        self.close("referenceLine");
        if !road.lanes.defaulted {
            let set = &road.lanes;
            let mut attrs = Vec::new();
            if !set.center_mark.defaulted {
                attrs.push(("centerMark", set.center_mark.value.as_str().into()));
            }
            self.open("lanes", &attrs);
            for l in &set.lanes {
                let mut attrs = vec![
                    ("side", if l.side == Side::Left { "left" } else { "right" }.to_owned()),
                    ("width", num(l.width)),
                ];
                if !l.lane_type.defaulted {
                    attrs.push(("type", l.lane_type.value.as_str().into()));
                }
                if !l.mark.defaulted {
                    attrs.push(("mark", l.mark.value.as_str().into()));
                }
                if l.widening.is_none() && l.lapse.is_none() {
                    self.empty("lane", &attrs);
                    continue;
                }
                self.open("lane", &attrs);
                for (tag, t) in [("widening", l.widening), ("lapse", l.lapse)] {
                    if let Some((s, length)) = t {
                        self.empty(tag, &[("s", num(s)), ("length", num(length))]);
                    }
                }
                self.close("lane");
            }
            self.close("lanes");
        }
        self.close("road");
    }

    fn intersection(&mut self, i: &IntersectionSpec) {
        self.open("intersection", &[]);
        for p in &i.points {
            self.empty(
                "intersectionPoint",
                &[
                    ("road", p.road.clone()),
                    ("s", num(p.s)),
                    ("partner", p.partner.clone()),
                    ("partnerS", num(p.partner_s)),
                    ("angle", num(p.angle.degrees())),
                ],
            );
        }
        let c = &i.coupler;
        if c.present {
            let attrs: Vec<_> = c.min_radius.map(|r| ("minRadius", num(r))).into_iter().collect();
            if c.areas.is_empty() && c.additional_lanes.is_empty() && c.connections.is_empty() {
                self.empty("coupler", &attrs);
            } else {
                self.open("coupler", &attrs);
                for a in &c.areas {
                    let mut attrs = vec![("road", a.road.clone())];
                    attrs.extend(a.before.map(|v| ("before", num(v))));
                    attrs.extend(a.after.map(|v| ("after", num(v))));
                    self.empty("junctionArea", &attrs);
                }
                for l in &c.additional_lanes {
                    let mut attrs = vec![
                        ("road", l.arm.road.clone()),
                        ("arm", l.arm.side.as_str().into()),
                        ("turn", l.turn.as_str().into()),
                    ];
                    attrs.extend(l.min_radius.map(|v| ("minRadius", num(v))));
                    if !l.length.defaulted {
                        attrs.push(("length", num(l.length.value)));
                    }
                    if !l.widening.defaulted {
                        attrs.push(("widening", num(l.widening.value)));
                    }
                    attrs.extend(l.width.map(|v| ("width", num(v))));
                    self.empty("additionalLane", &attrs);
                }
                for k in &c.connections {
                    let mut attrs = vec![("fromRoad", k.from.road.clone()), ("fromArm", k.from.side.as_str().into())];
                    attrs.extend(k.from_lane.map(|v| ("fromLane", v.to_string())));
                    attrs.push(("toRoad", k.to.road.clone()));
                    attrs.push(("toArm", k.to.side.as_str().into()));
                    attrs.extend(k.to_lane.map(|v| ("toLane", v.to_string())));
                    self.empty("connection", &attrs);
                }
                self.close("coupler");
            }
        }
        self.close("intersection");
    }
}
