//! Junctions and roundabouts: arm placement, cutting of the junction area
//! and one connecting road per permitted lane pair.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::defaults::Defaults;
use crate::geometry::{normalize_angle, Pose};
use crate::input::{ArmRef, ArmSide, ConnectionSpec, Pos, RoadSpec, SegmentKind, SegmentSpec};
use crate::lanes::{constant_width, transition, LaneLayout, LaneTrack, LaneType, RoadMark, Side, Turn};
use crate::model::{BuiltSegment, Connection, ContactPoint, Junction, Link, Road};
use crate::profile::{CurvatureProfile, Primitive, ResolvedReferenceLine, MIN_LENGTH};
use crate::segment::layout_of;

/// Headings closer than this count as parallel.
pub const COLLINEAR_EPS: f64 = 1e-9;
/// Lateral offset tolerated between collinear lane ends.
const LATERAL_EPS: f64 = 1e-7;
/// Arms whose directions differ by less than this do not bound each other's area.
const PARALLEL_ARMS_EPS: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConnectError {
    #[error("lane ends are parallel but {offset} m apart sideways")]
    ParallelOffset { offset: f64 },
    #[error("lane ends face each other")]
    AntiParallel,
    #[error("lane ends cannot be joined by a single arc (tangents meet {d_a} m after the start and {d_b} m before the end)")]
    NoSingleArc { d_a: f64, d_b: f64 },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{pos}: segment '{segment}': {message}")]
pub struct JunctionError {
    pub segment: String,
    pub pos: Pos,
    pub message: String,
}

/// A line-arc (or arc-line) joining two lane ends.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionGeometry {
    pub a: Pose,
    pub b: Pose,
    /// Crossing of the two tangents; `None` when they are collinear.
    pub intersection: Option<(f64, f64)>,
    /// Where the arc meets the straight piece.
    pub h: (f64, f64),
    /// Arc radius; `None` for a straight connection.
    pub radius: Option<f64>,
    pub arc_length: f64,
    /// Heading change from A to B.
    pub beta: f64,
    pub pieces: Vec<Primitive>,
}

impl ConnectionGeometry {
    pub fn length(&self) -> f64 {
        self.pieces.iter().map(Primitive::length).sum()
    }

    pub fn profile(&self) -> CurvatureProfile {
        CurvatureProfile::with_jumps(self.pieces.clone()).expect("connection pieces have positive length")
    }
}

fn point_in(frame: Pose, x: f64, y: f64) -> (f64, f64) {
    let p = Pose { x, y, phi: 0.0 }.placed_in(frame);
    (p.x, p.y)
}

/// Joins pose `a` to pose `b` with a straight line and one arc.
pub fn connect(a: Pose, b: Pose) -> Result<ConnectionGeometry, ConnectError> {
    let beta = normalize_angle(b.phi - a.phi);
    let rel = b.relative_to(a);
    if beta.abs() < COLLINEAR_EPS {
        if rel.y.abs() > LATERAL_EPS {
            return Err(ConnectError::ParallelOffset { offset: rel.y });
        }
        if rel.x < MIN_LENGTH {
            return Err(ConnectError::NoSingleArc { d_a: rel.x, d_b: 0.0 });
        }
        return Ok(ConnectionGeometry {
            a,
            b,
            intersection: None,
            h: (a.x, a.y),
            radius: None,
            arc_length: 0.0,
            beta,
            pieces: vec![Primitive::Line { length: rel.x }],
        });
    }
    if PI - beta.abs() < COLLINEAR_EPS {
        return Err(ConnectError::AntiParallel);
    }

    // In the frame of A the first tangent is the x-axis.
    let (sb, cb) = beta.sin_cos();
    let d_b = rel.y / sb;
    let d_a = rel.x - d_b * cb;
    if d_a.min(d_b) < MIN_LENGTH {
        return Err(ConnectError::NoSingleArc { d_a, d_b });
    }
    let (h, chord, line_before, line_after) = if d_a >= d_b {
        let h = (d_a - d_b, 0.0);
        (h, (rel.x - h.0).hypot(rel.y), d_a - d_b, 0.0)
    } else {
        let h = (d_a + d_a * cb, d_a * sb);
        (h, h.0.hypot(h.1), 0.0, d_b - d_a)
    };
    let radius = chord / (2.0 * (beta.abs() / 2.0).sin());
    let arc_length = (radius * beta).abs();

    let mut pieces = Vec::with_capacity(2);
    if line_before >= MIN_LENGTH {
        pieces.push(Primitive::Line { length: line_before });
    }
    pieces.push(Primitive::Arc { length: arc_length, curvature: beta / arc_length });
    if line_after >= MIN_LENGTH {
        pieces.push(Primitive::Line { length: line_after });
    }
    Ok(ConnectionGeometry {
        a,
        b,
        intersection: Some(point_in(a, d_a, 0.0)),
        h: point_in(a, h.0, h.1),
        radius: Some(radius),
        arc_length,
        beta,
        pieces,
    })
}

/// Start pose that puts the road's pose at `s` onto `target`.
fn placement(local: &ResolvedReferenceLine, s: f64, target: Pose) -> Pose {
    Pose::ORIGIN.relative_to(local.pose_at(s)).placed_in(target)
}

/// Where road `spec` lies in the segment frame: its start pose, given that
/// its pose at `s` must coincide with `target`.
pub fn position_road(spec: &RoadSpec, s: f64, target: Pose) -> Pose {
    placement(&spec.profile.resolve(Pose::ORIGIN), s, target)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Movement {
    Straight,
    Left,
    Right,
}

impl Movement {
    pub fn of(beta: f64) -> Movement {
        if beta.abs() < FRAC_PI_4 {
            Movement::Straight
        } else if beta > 0.0 {
            Movement::Left
        } else {
            Movement::Right
        }
    }

    fn turn(self) -> Option<Turn> {
        match self {
            Movement::Straight => None,
            Movement::Left => Some(Turn::Left),
            Movement::Right => Some(Turn::Right),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct ExtraLane {
    lane_type: LaneType,
    mark: RoadMark,
    turn: Option<Turn>,
    width: f64,
    /// Full-width stretch next to the junction.
    length: f64,
    /// Transition beyond the full-width stretch.
    transition: f64,
    inner: bool,
    incoming: bool,
    min_radius: Option<f64>,
}

#[derive(Debug, Clone)]
struct ArmPlan {
    key: ArmRef,
    road: usize,
    crossing: f64,
    /// Direction pointing away from the junction.
    theta: f64,
    extra: Vec<ExtraLane>,
    cut: f64,
}

impl ArmPlan {
    /// End of the arm road that touches the junction.
    fn junction_end(&self) -> ContactPoint {
        match self.key.side {
            ArmSide::Before => ContactPoint::End,
            ArmSide::After => ContactPoint::Start,
        }
    }
}

fn incoming_side(end: ContactPoint) -> Side {
    match end {
        ContactPoint::End => Side::Right,
        ContactPoint::Start => Side::Left,
    }
}

fn side_width(layout: &LaneLayout, side: Side, s: f64) -> f64 {
    layout.side(side).map(|t| t.width_at(s)).sum()
}

/// One end of a road meeting the junction, with the logical arm it stands for.
#[derive(Debug, Clone)]
struct ArmEnd {
    road: usize,
    end: ContactPoint,
    key: Option<ArmRef>,
}

struct Rules<'a> {
    segment: &'a SegmentSpec,
    explicit: &'a [ConnectionSpec],
    min_radius: Option<f64>,
    /// Minimum radius per (arm, reserved turn).
    turn_radius: Vec<(usize, Turn, f64)>,
    mark: RoadMark,
}

impl Rules<'_> {
    fn fail(&self, pos: Pos, message: impl Into<String>) -> JunctionError {
        JunctionError { segment: self.segment.id.clone(), pos, message: message.into() }
    }
}

/// Builds an X- or T-junction segment.
pub fn build_junction(seg: &SegmentSpec, defaults: &Defaults) -> Result<BuiltSegment, JunctionError> {
    let fail = |pos: Pos, message: String| JunctionError { segment: seg.id.clone(), pos, message };
    let inter = seg
        .intersection
        .as_ref()
        .ok_or_else(|| fail(seg.pos, "junction without intersection".into()))?;
    let coupler = &inter.coupler;
    let jd = &defaults.junction;

    // Roads in the segment frame and their full lane layouts.
    let mut lines = Vec::new();
    let mut layouts = Vec::new();
    let mut plans: Vec<ArmPlan> = Vec::new();
    for (i, road) in seg.roads.iter().enumerate() {
        let (s, angle) = seg.crossing(&road.id).expect("parser checked participation");
        let start = position_road(road, s, Pose::new(0.0, 0.0, angle.radians()));
        lines.push(road.profile.resolve(start));
        layouts.push(layout_of(&road.lanes, road.length()).map_err(|e| fail(road.pos, e.to_string()))?);
        let phi = angle.radians();
        if s > MIN_LENGTH {
            plans.push(ArmPlan {
                key: ArmRef { road: road.id.clone(), side: ArmSide::Before },
                road: i,
                crossing: s,
                theta: normalize_angle(phi + PI),
                extra: Vec::new(),
                cut: 0.0,
            });
        }
        if s < road.length() - MIN_LENGTH {
            plans.push(ArmPlan {
                key: ArmRef { road: road.id.clone(), side: ArmSide::After },
                road: i,
                crossing: s,
                theta: normalize_angle(phi),
                extra: Vec::new(),
                cut: 0.0,
            });
        }
    }

    // Turn lanes, and on the opposite arm a median keeping straight lanes aligned.
    for al in &coupler.additional_lanes {
        let k = plans.iter().position(|p| p.key == al.arm).ok_or_else(|| fail(al.pos, "unknown arm".into()))?;
        let plan = &plans[k];
        let layout = &layouts[plan.road];
        let side = incoming_side(plan.junction_end());
        let neighbour = match al.turn {
            Turn::Left => layout.side(side).next(),
            Turn::Right => layout.side(side).last(),
        };
        let width = match (al.width, neighbour) {
            (Some(w), _) => w,
            (None, Some(t)) => t.width_at(plan.crossing),
            (None, None) => return Err(fail(al.pos, "the arm has no lane to turn from".into())),
        };
        plans[k].extra.push(ExtraLane {
            lane_type: LaneType::Driving,
            mark: defaults.main.mark,
            turn: Some(al.turn),
            width,
            length: al.length.value,
            transition: al.widening.value,
            inner: al.turn == Turn::Left,
            incoming: true,
            min_radius: al.min_radius,
        });
        if al.turn == Turn::Left {
            let theta = plans[k].theta;
            if let Some(j) = plans.iter().position(|p| normalize_angle(p.theta - theta - PI).abs() < PARALLEL_ARMS_EPS) {
                plans[j].extra.push(ExtraLane {
                    lane_type: LaneType::Median,
                    mark: RoadMark::None,
                    turn: None,
                    width,
                    length: al.length.value,
                    transition: al.widening.value,
                    inner: true,
                    incoming: false,
                    min_radius: None,
                });
            }
        }
    }

    // Half widths at the crossing, then the cut distances.
    let half_widths: Vec<f64> = plans
        .iter()
        .map(|p| {
            let layout = &layouts[p.road];
            let inc = incoming_side(p.junction_end());
            let mut w = [
                side_width(layout, inc, p.crossing),
                side_width(layout, inc.opposite(), p.crossing),
            ];
            for e in &p.extra {
                w[!e.incoming as usize] += e.width;
            }
            w[0].max(w[1])
        })
        .collect();
    for k in 0..plans.len() {
        let given = coupler.area(&plans[k].key.road).and_then(|a| match plans[k].key.side {
            ArmSide::Before => a.before,
            ArmSide::After => a.after,
        });
        plans[k].cut = match given {
            Some(d) => d,
            None => {
                let mut d: f64 = 0.0;
                for (j, p) in plans.iter().enumerate() {
                    let sin = (p.theta - plans[k].theta).sin().abs();
                    if j != k && sin > PARALLEL_ARMS_EPS {
                        d = d.max(half_widths[j] / sin);
                    }
                }
                d + jd.clearance
            }
        };
    }

    // Arm roads.
    let mut out = BuiltSegment::default();
    let mut arm_ends = Vec::new();
    for p in &plans {
        let spec = &seg.roads[p.road];
        let length = spec.length();
        let (lo, hi) = match p.key.side {
            ArmSide::Before => (0.0, p.crossing - p.cut),
            ArmSide::After => (p.crossing + p.cut, length),
        };
        if hi - lo < MIN_LENGTH {
            return Err(fail(
                spec.pos,
                format!(
                    "junction area of {} m leaves nothing of road '{}' {} the intersection",
                    p.cut,
                    spec.id,
                    p.key.side.as_str()
                ),
            ));
        }
        let profile = spec.profile.sub(lo, hi).map_err(|e| fail(spec.pos, e.to_string()))?;
        let mut layout = layouts[p.road].sub(lo, hi);
        let arm_length = hi - lo;
        let end = p.junction_end();
        for e in &p.extra {
            let span = e.length + e.transition;
            if span > arm_length + MIN_LENGTH {
                return Err(fail(
                    spec.pos,
                    format!(
                        "an additional lane needs {span} m but road '{}' {} the junction is {arm_length} m long",
                        spec.id,
                        p.key.side.as_str()
                    ),
                ));
            }
            let side = if e.incoming { incoming_side(end) } else { incoming_side(end).opposite() };
            let (opens, closes) = match end {
                ContactPoint::End => (Some(((arm_length - span).max(0.0), e.transition)), None),
                ContactPoint::Start => (None, Some((e.length, e.transition))),
            };
            let mut track = LaneTrack::with_transitions(side, e.lane_type, e.mark, e.width, opens, closes, arm_length)
                .map_err(|err| fail(spec.pos, err.to_string()))?;
            track.turn = e.turn;
            layout.insert(track, e.inner);
        }
        let mut road = Road {
            name: format!("{}.{}.{}", seg.id, spec.id, p.key.side.as_str()),
            profile,
            start: lines[p.road].pose_at(lo),
            sections: layout.sections(arm_length),
            junction: None,
            predecessor: None,
            successor: None,
        };
        *road.link_mut(end) = Some(Link::Junction(0));
        let idx = out.roads.len();
        out.roads.push(road);
        let logical_end = match p.key.side {
            ArmSide::Before => ContactPoint::Start,
            ArmSide::After => ContactPoint::End,
        };
        out.ends.push(((spec.id.clone(), logical_end), (idx, logical_end)));
        arm_ends.push(ArmEnd { road: idx, end, key: Some(p.key.clone()) });
    }

    let mut turn_radius = Vec::new();
    for (k, p) in plans.iter().enumerate() {
        for e in &p.extra {
            if let (Some(t), Some(r)) = (e.turn, e.min_radius) {
                turn_radius.push((k, t, r));
            }
        }
    }
    let rules = Rules {
        segment: seg,
        explicit: &coupler.connections,
        min_radius: coupler.min_radius,
        turn_radius,
        mark: jd.connecting_mark,
    };
    let connections = connect_arms(&mut out.roads, &arm_ends, 0, &rules)?;
    out.junctions.push(Junction { name: seg.id.clone(), connections });
    Ok(out)
}

/// Builds a roundabout: the ring is cut around every access point and each
/// access point becomes a junction with entry, exit and through connections.
pub fn build_roundabout(seg: &SegmentSpec, defaults: &Defaults) -> Result<BuiltSegment, JunctionError> {
    let fail = |pos: Pos, message: String| JunctionError { segment: seg.id.clone(), pos, message };
    let inter = seg
        .intersection
        .as_ref()
        .ok_or_else(|| fail(seg.pos, "roundabout without intersection".into()))?;
    debug_assert_eq!(seg.kind, SegmentKind::Roundabout);
    let coupler = &inter.coupler;
    let jd = &defaults.junction;
    let ring_spec = seg.road(inter.reference_road()).expect("parser checked the reference road");
    let ring_line = ring_spec.profile.resolve(Pose::ORIGIN);
    let ring_length = ring_spec.length();
    let ring_layout = layout_of(&ring_spec.lanes, ring_length).map_err(|e| fail(ring_spec.pos, e.to_string()))?;
    let ring_width = side_width(&ring_layout, Side::Right, 0.0).max(side_width(&ring_layout, Side::Left, 0.0));
    let ring_area = coupler.area(&ring_spec.id);

    struct Access<'a> {
        spec: &'a RoadSpec,
        s_ring: f64,
        attached_at_start: bool,
        line: ResolvedReferenceLine,
        layout: LaneLayout,
        cut_ring: (f64, f64),
        cut_access: f64,
        pos: Pos,
    }
    let mut accesses = Vec::new();
    for p in &inter.points {
        let spec = seg.road(&p.partner).expect("parser checked the partner road");
        let layout = layout_of(&spec.lanes, spec.length()).map_err(|e| fail(spec.pos, e.to_string()))?;
        let attached_at_start = p.partner_s <= MIN_LENGTH;
        let on_ring = ring_line.pose_at(p.s);
        let target = Pose::new(on_ring.x, on_ring.y, on_ring.phi + p.angle.radians());
        let line = spec.profile.resolve(position_road(spec, p.partner_s, target));
        let sin = p.angle.radians().sin().abs();
        let access_width = side_width(&layout, Side::Left, p.partner_s).max(side_width(&layout, Side::Right, p.partner_s));
        let default_ring = access_width / sin + jd.clearance;
        let cut_ring = (
            ring_area.and_then(|a| a.before).unwrap_or(default_ring),
            ring_area.and_then(|a| a.after).unwrap_or(default_ring),
        );
        let access_area = coupler.area(&spec.id);
        let cut_access = access_area
            .and_then(|a| if attached_at_start { a.after } else { a.before })
            .unwrap_or(ring_width / sin + jd.clearance);
        accesses.push(Access {
            spec,
            s_ring: p.s,
            attached_at_start,
            line,
            layout,
            cut_ring,
            cut_access,
            pos: p.pos,
        });
    }
    accesses.sort_by(|a, b| a.s_ring.total_cmp(&b.s_ring));

    // Ring pieces between consecutive junction areas, cyclically.
    let n = accesses.len();
    let mut out = BuiltSegment::default();
    let mut ring_pieces = Vec::with_capacity(n);
    for i in 0..n {
        let a = &accesses[i];
        let b = &accesses[(i + 1) % n];
        let from = a.s_ring + a.cut_ring.1;
        let mut to = b.s_ring - b.cut_ring.0;
        if i + 1 == n {
            to += ring_length;
        }
        let gap = to - from;
        if gap < MIN_LENGTH {
            return Err(fail(
                b.pos,
                format!(
                    "junction areas of access roads '{}' and '{}' overlap on the ring",
                    a.spec.id, b.spec.id
                ),
            ));
        }
        let k = ring_spec.profile.k_start();
        let profile = CurvatureProfile::new()
            .append(Primitive::Arc { length: gap, curvature: k })
            .map_err(|e| fail(ring_spec.pos, e.to_string()))?;
        let tracks = ring_layout
            .tracks
            .iter()
            .map(|t| LaneTrack::constant(t.side, t.lane_type, t.mark, t.width_at(0.0), gap))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| fail(ring_spec.pos, e.to_string()))?;
        let layout = LaneLayout { center_mark: ring_layout.center_mark, tracks };
        let road = Road {
            name: format!("{}.{}.{}", seg.id, ring_spec.id, i + 1),
            profile,
            start: ring_line.pose_at(from.rem_euclid(ring_length)),
            sections: layout.sections(gap),
            junction: None,
            predecessor: Some(Link::Junction(i)),
            successor: Some(Link::Junction((i + 1) % n)),
        };
        ring_pieces.push(out.roads.len());
        out.roads.push(road);
    }

    // Access roads, trimmed at the ring.
    let mut access_roads = Vec::with_capacity(n);
    for (i, a) in accesses.iter().enumerate() {
        let length = a.spec.length();
        let (lo, hi, end, logical) = if a.attached_at_start {
            (a.cut_access, length, ContactPoint::Start, ContactPoint::End)
        } else {
            (0.0, length - a.cut_access, ContactPoint::End, ContactPoint::Start)
        };
        if hi - lo < MIN_LENGTH {
            return Err(fail(a.spec.pos, format!("junction area of {} m leaves nothing of access road '{}'", a.cut_access, a.spec.id)));
        }
        let profile = a.spec.profile.sub(lo, hi).map_err(|e| fail(a.spec.pos, e.to_string()))?;
        let layout = a.layout.sub(lo, hi);
        let mut road = Road {
            name: format!("{}.{}", seg.id, a.spec.id),
            profile,
            start: a.line.pose_at(lo),
            sections: layout.sections(hi - lo),
            junction: None,
            predecessor: None,
            successor: None,
        };
        *road.link_mut(end) = Some(Link::Junction(i));
        let idx = out.roads.len();
        out.roads.push(road);
        out.ends.push(((a.spec.id.clone(), logical), (idx, logical)));
        access_roads.push((idx, end));
    }

    let rules = Rules {
        segment: seg,
        explicit: &[],
        min_radius: coupler.min_radius,
        turn_radius: Vec::new(),
        mark: jd.connecting_mark,
    };
    for i in 0..n {
        let arms = [
            ArmEnd { road: ring_pieces[(i + n - 1) % n], end: ContactPoint::End, key: None },
            ArmEnd { road: ring_pieces[i], end: ContactPoint::Start, key: None },
            ArmEnd { road: access_roads[i].0, end: access_roads[i].1, key: None },
        ];
        let connections = connect_arms(&mut out.roads, &arms, i, &rules)?;
        out.junctions.push(Junction { name: format!("{}.{}", seg.id, accesses[i].spec.id), connections });
    }
    Ok(out)
}

/// Pose at the inner boundary of lane `id` where the road meets the
/// junction, heading along the direction of travel.
fn anchor(road: &Road, end: ContactPoint, id: i32, incoming: bool) -> Pose {
    let section = road.end_section(end);
    let s = match end {
        ContactPoint::Start => 0.0,
        ContactPoint::End => road.length(),
    };
    let t = id.signum() as f64 * section.inner_offset(id, s);
    let p = road.end_pose(end).offset(t);
    if (end == ContactPoint::End) == incoming {
        p
    } else {
        p.reversed()
    }
}

fn lane_width(road: &Road, end: ContactPoint, id: i32) -> f64 {
    let s = match end {
        ContactPoint::Start => 0.0,
        ContactPoint::End => road.length(),
    };
    road.end_section(end).lane(id).map_or(0.0, |l| l.width_at(s))
}

/// Driving lanes on one side of a road end, ordered from the center outward,
/// with the turn each is reserved for.
fn driving_lanes(road: &Road, end: ContactPoint, side: Side) -> Vec<(i32, Option<Turn>)> {
    road.end_section(end)
        .side(side)
        .into_iter()
        .filter(|l| l.lane_type == LaneType::Driving)
        .map(|l| (l.id, l.turn))
        .collect()
}

fn default_pairs(incoming: &[(i32, Option<Turn>)], outgoing: &[(i32, Option<Turn>)], movement: Movement) -> Vec<(i32, i32)> {
    let wanted = movement.turn();
    let reserved: Vec<i32> = incoming.iter().filter(|l| l.1.is_some() && l.1 == wanted).map(|l| l.0).collect();
    let from: Vec<i32> = if reserved.is_empty() {
        incoming.iter().filter(|l| l.1.is_none()).map(|l| l.0).collect()
    } else {
        reserved
    };
    let to: Vec<i32> = outgoing.iter().map(|l| l.0).collect();
    let n = from.len().min(to.len());
    if movement == Movement::Right {
        from.iter().rev().zip(to.iter().rev()).take(n).map(|(a, b)| (*a, *b)).collect()
    } else {
        from.iter().zip(to.iter()).take(n).map(|(a, b)| (*a, *b)).collect()
    }
}

fn connect_arms(roads: &mut Vec<Road>, arms: &[ArmEnd], junction: usize, rules: &Rules) -> Result<Vec<Connection>, JunctionError> {
    let mut connections = Vec::new();
    for (k, from) in arms.iter().enumerate() {
        let explicit: Vec<&ConnectionSpec> = match &from.key {
            Some(key) => rules.explicit.iter().filter(|c| &c.from == key).collect(),
            None => Vec::new(),
        };
        let in_side = incoming_side(from.end);
        let incoming = driving_lanes(&roads[from.road], from.end, in_side);
        for (j, to) in arms.iter().enumerate() {
            if j == k {
                continue;
            }
            let outgoing = driving_lanes(&roads[to.road], to.end, incoming_side(to.end).opposite());
            let travel_in = roads[from.road].outward_pose(from.end).phi;
            let travel_out = roads[to.road].outward_pose(to.end).phi + PI;
            let movement = Movement::of(normalize_angle(travel_out - travel_in));

            let mut pairs = Vec::new();
            if explicit.is_empty() {
                pairs = default_pairs(&incoming, &outgoing, movement);
            } else {
                for c in explicit.iter().filter(|c| Some(&c.to) == to.key.as_ref()) {
                    match (c.from_lane, c.to_lane) {
                        (Some(a), Some(b)) => {
                            if !incoming.iter().any(|l| l.0 == a) {
                                return Err(rules.fail(c.pos, format!("lane {a} is not an incoming driving lane of this arm")));
                            }
                            if !outgoing.iter().any(|l| l.0 == b) {
                                return Err(rules.fail(c.pos, format!("lane {b} is not an outgoing driving lane of the target arm")));
                            }
                            pairs.push((a, b));
                        }
                        (None, None) => pairs.extend(default_pairs(&incoming, &outgoing, movement)),
                        _ => return Err(rules.fail(c.pos, "give both fromLane and toLane or neither")),
                    }
                }
            }

            for (in_id, out_id) in pairs {
                let a = anchor(&roads[from.road], from.end, in_id, true);
                let b = anchor(&roads[to.road], to.end, out_id, false);
                let geometry = connect(a, b).map_err(|e| {
                    rules.fail(
                        rules.segment.pos,
                        format!(
                            "connecting '{}' lane {in_id} to '{}' lane {out_id}: {e}; try a larger junction area",
                            roads[from.road].name, roads[to.road].name
                        ),
                    )
                })?;
                let reserved = incoming.iter().find(|l| l.0 == in_id).and_then(|l| l.1);
                let limit = reserved
                    .and_then(|t| rules.turn_radius.iter().find(|(arm, turn, _)| *arm == k && *turn == t).map(|x| x.2))
                    .or(rules.min_radius);
                if let (Some(limit), Some(r)) = (limit, geometry.radius) {
                    if r < limit {
                        return Err(rules.fail(
                            rules.segment.pos,
                            format!(
                                "connecting '{}' lane {in_id} to '{}' lane {out_id} needs radius {r:.3} m, below the minimum {limit} m",
                                roads[from.road].name, roads[to.road].name
                            ),
                        ));
                    }
                }

                let length = geometry.length();
                let (w_a, w_b) = (lane_width(&roads[from.road], from.end, in_id), lane_width(&roads[to.road], to.end, out_id));
                let poly = if w_a == w_b { constant_width(w_a) } else { transition(w_a, w_b, 0.0, length) }
                    .map_err(|e| rules.fail(rules.segment.pos, e.to_string()))?
                    .over(0.0, length);
                let track = LaneTrack {
                    side: Side::Right,
                    lane_type: LaneType::Driving,
                    mark: rules.mark,
                    turn: None,
                    pieces: vec![poly],
                };
                let mut sections = LaneLayout { center_mark: rules.mark, tracks: vec![track] }.sections(length);
                sections[0].lanes[0].predecessor = Some(in_id);
                sections[0].lanes[0].successor = Some(out_id);
                let idx = roads.len();
                roads.push(Road {
                    name: format!("{}.c{}", rules.segment.id, idx),
                    profile: geometry.profile(),
                    start: a,
                    sections,
                    junction: Some(junction),
                    predecessor: Some(Link::Road { road: from.road, contact: from.end }),
                    successor: Some(Link::Road { road: to.road, contact: to.end }),
                });
                connections.push(Connection {
                    incoming: from.road,
                    connecting: idx,
                    contact: ContactPoint::Start,
                    lane_links: vec![(in_id, -1)],
                });
            }
        }
    }
    Ok(connections)
}
