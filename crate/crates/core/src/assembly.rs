//! Network assembly: placing segments in the world frame, linking their
//! road ends and closing gaps with spiral-arc-spiral curves.

use nalgebra::{Matrix3, Vector3};

use crate::defaults::Defaults;
use crate::geometry::{normalize_angle, Pose};
use crate::input::{EndPair, EndRef, LogicalNetwork, Pos};
use crate::lanes::{constant_width, lapse, transition, widening, LaneLayout, LaneTrack, Side};
use crate::model::{BuiltSegment, ContactPoint, Link, Road, RoadNetwork};
use crate::profile::{CurvatureProfile, Primitive, MIN_LENGTH};

/// Position tolerance for a closing curve.
pub const CLOSE_POSITION_TOL: f64 = 1e-3;
/// Heading tolerance for a closing curve.
pub const CLOSE_HEADING_TOL: f64 = 1e-4;
/// Linked road ends must agree this well after placement.
const LINK_POSITION_TOL: f64 = 1e-6;
const LINK_HEADING_TOL: f64 = 1e-8;
/// Curvature treated as zero at linked ends.
const ZERO_CURVATURE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AssemblyError {
    #[error("{pos}: road end {end} has curvature {curvature} 1/m; segments join only where the curvature is zero")]
    Curvature { pos: Pos, end: String, curvature: f64 },
    #[error("segment '{segment}' is not linked to the reference segment")]
    Unreachable { segment: String },
    #[error("{pos}: link {a} - {b} contradicts the placement: ({}, {}, {}) vs ({}, {}, {})", .pose_a.x, .pose_a.y, .pose_a.phi, .pose_b.x, .pose_b.y, .pose_b.phi)]
    Inconsistent { pos: Pos, a: String, b: String, pose_a: Pose, pose_b: Pose },
    #[error("{pos}: cannot close {a} - {b}: {source}")]
    Close { pos: Pos, a: String, b: String, source: CloseError },
    #[error("{pos}: {message}")]
    Lanes { pos: Pos, message: String },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CloseError {
    #[error("the goal coincides with the start")]
    Coincident,
    #[error("the goal is parallel to the start with a lateral offset of {0} m")]
    ParallelOffset(f64),
    #[error("the goal faces the start")]
    AntiParallel,
    #[error("no spiral-arc-spiral curve found; best residual {position} m, {heading} rad")]
    NotConverged { position: f64, heading: f64 },
}

/// A gap-closing curve: optional straight lead-in, symmetric
/// spiral-arc-spiral, optional straight lead-out.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundCurve {
    pub profile: CurvatureProfile,
    pub lead_in: f64,
    pub spiral_length: f64,
    pub arc_length: f64,
    pub curvature: f64,
    pub lead_out: f64,
    /// Remaining end-pose error: (dx, dy, dphi).
    pub residual: (f64, f64, f64),
}

/// Symmetric spiral-arc-spiral turning by `kappa * (l_sp + l_arc)`.
fn compound_primitives(l_sp: f64, l_arc: f64, kappa: f64) -> Vec<Primitive> {
    let mut v = vec![Primitive::Spiral { length: l_sp, k_start: 0.0, k_end: kappa }];
    if l_arc >= MIN_LENGTH {
        v.push(Primitive::Arc { length: l_arc, curvature: kappa });
    }
    v.push(Primitive::Spiral { length: l_sp, k_start: kappa, k_end: 0.0 });
    v
}

fn compound_end(l_sp: f64, l_arc: f64, kappa: f64) -> Pose {
    compound_primitives(l_sp, l_arc, kappa)
        .iter()
        .fold(Pose::ORIGIN, |p, prim| prim.pose_at(prim.length(), p))
}

struct Fit {
    params: Vector3<f64>,
    cost: f64,
}

/// Damped least squares for a symmetric curve from the origin to `goal`
/// turning by `turn` (unwrapped).
fn fit_symmetric(goal: (f64, f64), turn: f64, chord: f64, start: Vector3<f64>) -> Fit {
    const MIN_SPIRAL: f64 = 1e-6;
    let clamp = |p: Vector3<f64>| Vector3::new(p[0].max(MIN_SPIRAL), p[1].max(0.0), p[2]);
    let residual = |p: &Vector3<f64>| {
        let e = compound_end(p[0], p[1], p[2]);
        Vector3::new(e.x - goal.0, e.y - goal.1, (p[2] * (p[0] + p[1]) - turn) * chord)
    };
    let mut p = clamp(start);
    let mut r = residual(&p);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    for _ in 0..200 {
        if cost < 1e-24 {
            break;
        }
        let mut jac = Matrix3::zeros();
        for i in 0..3 {
            let h = 1e-7 * p[i].abs().max(if i == 2 { 1e-3 } else { 1.0 });
            let mut q = p;
            q[i] += h;
            let rq = residual(&q);
            jac.set_column(i, &((rq - r) / h));
        }
        let jtj = jac.transpose() * jac;
        let g = jac.transpose() * r;
        let mut improved = false;
        for _ in 0..12 {
            let mut a = jtj;
            for i in 0..3 {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&(-g)) else {
                lambda *= 4.0;
                continue;
            };
            let q = clamp(p + step);
            let rq = residual(&q);
            let cq = rq.norm_squared();
            if cq < cost {
                p = q;
                r = rq;
                cost = cq;
                lambda = (lambda / 3.0).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    Fit { params: p, cost }
}

/// Spiral-arc-spiral curve from `start` to `goal`, both at zero curvature.
/// Asymmetric goals get a straight piece on the farther side first.
pub fn close_gap(start: Pose, goal: Pose) -> Result<CompoundCurve, CloseError> {
    let g = goal.relative_to(start);
    let chord_total = g.x.hypot(g.y);
    if chord_total < MIN_LENGTH {
        return Err(CloseError::Coincident);
    }
    let theta = g.phi;
    if theta.abs() < 1e-12 {
        if g.y.abs() > 1e-9 {
            return Err(CloseError::ParallelOffset(g.y));
        }
        if g.x <= 0.0 {
            return Err(CloseError::AntiParallel);
        }
        let profile = CurvatureProfile::new().append(Primitive::Line { length: g.x }).expect("positive length");
        return Ok(CompoundCurve {
            profile,
            lead_in: g.x,
            spiral_length: 0.0,
            arc_length: 0.0,
            curvature: 0.0,
            lead_out: 0.0,
            residual: (0.0, 0.0, 0.0),
        });
    }
    if (std::f64::consts::PI - theta.abs()).abs() < 1e-12 {
        return Err(CloseError::AntiParallel);
    }

    // Tangent crossing: d_a along the start heading, d_b before the goal.
    let (sb, cb) = theta.sin_cos();
    let d_b = g.y / sb;
    let d_a = g.x - d_b * cb;
    let (lead_in, lead_out) = if d_a > d_b { (d_a - d_b, 0.0) } else { (0.0, d_b - d_a) };
    let lead_in = if lead_in < MIN_LENGTH { 0.0 } else { lead_in };
    let lead_out = if lead_out < MIN_LENGTH { 0.0 } else { lead_out };
    let d = d_a.min(d_b);
    // Turning the long way round when the tangents cross behind both ends.
    let turn = if d > 0.0 { theta } else { theta - 2.0 * std::f64::consts::PI * theta.signum() };
    // Goal of the symmetric part, seen from the end of the lead-in.
    let goal_local = (g.x - lead_out * cb - lead_in, g.y - lead_out * sb);
    let chord = goal_local.0.hypot(goal_local.1);

    let r0 = chord / (2.0 * (turn / 2.0).sin().abs());
    let l_arc0 = (r0 * turn).abs();
    let l_sp0 = 0.2 * chord;
    let k0 = turn.signum() / r0;
    let mut starts = vec![Vector3::new(l_sp0, l_arc0, k0)];
    for (fs, fa) in [(0.5, 1.0), (2.0, 1.0), (1.0, 0.5), (1.0, 0.25), (0.25, 1.0), (3.0, 0.5), (0.1, 1.2), (5.0, 0.1)] {
        let (ls, la) = (l_sp0 * fs, l_arc0 * fa);
        starts.push(Vector3::new(ls, la, turn / (ls + la)));
    }

    let mut best: Option<Fit> = None;
    for s in starts {
        let fit = fit_symmetric(goal_local, turn, chord, s);
        let done = fit.cost < 1e-16;
        if best.as_ref().map_or(true, |b| fit.cost < b.cost) {
            best = Some(fit);
        }
        if done {
            break;
        }
    }
    let best = best.expect("at least one start");
    let (l_sp, l_arc, kappa) = (best.params[0], best.params[1], best.params[2]);

    let mut prims = Vec::new();
    if lead_in > 0.0 {
        prims.push(Primitive::Line { length: lead_in });
    }
    prims.extend(compound_primitives(l_sp, l_arc, kappa));
    if lead_out > 0.0 {
        prims.push(Primitive::Line { length: lead_out });
    }
    let profile = prims
        .into_iter()
        .try_fold(CurvatureProfile::new(), |p, prim| p.append(prim))
        .expect("compound pieces are curvature continuous");
    let end = profile.resolve(Pose::ORIGIN).end;
    let residual = (end.x - g.x, end.y - g.y, normalize_angle(end.phi - g.phi));
    let position = residual.0.hypot(residual.1);
    if !(position <= CLOSE_POSITION_TOL && residual.2.abs() <= CLOSE_HEADING_TOL) {
        return Err(CloseError::NotConverged { position, heading: residual.2.abs() });
    }
    Ok(CompoundCurve { profile, lead_in, spiral_length: l_sp, arc_length: l_arc, curvature: kappa, lead_out, residual })
}

/// The assembled road network with the curves generated for close requests.
#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    pub network: RoadNetwork,
    /// World frame of each segment.
    pub frames: Vec<Pose>,
    pub closing: Vec<CompoundCurve>,
    pub warnings: Vec<String>,
}

fn concrete_end(net: &LogicalNetwork, built: &[BuiltSegment], e: &EndRef) -> (usize, usize, ContactPoint) {
    let si = net.segment_index(&e.segment).expect("parser checked segment references");
    let (road, contact) = built[si].end(&e.road, e.end).expect("parser checked free road ends");
    (si, road, contact)
}

fn check_zero_curvature(road: &Road, contact: ContactPoint, pos: Pos, e: &EndRef) -> Result<(), AssemblyError> {
    let k = road.curvature_at_end(contact);
    if k.abs() > ZERO_CURVATURE {
        return Err(AssemblyError::Curvature { pos, end: e.to_string(), curvature: k });
    }
    Ok(())
}

/// World frames of all segments, found breadth-first over the links from
/// the reference segment.
pub fn place_all(net: &LogicalNetwork, built: &[BuiltSegment]) -> Result<Vec<Pose>, AssemblyError> {
    let mut frames: Vec<Option<Pose>> = vec![None; net.segments.len()];
    let o = &net.world_offset.value;
    let reference = net.segment_index(&o.segment).expect("parser checked the reference segment");
    frames[reference] = Some(Pose::new(o.x, o.y, o.angle.radians()));

    let outward = |si: usize, road: usize, c: ContactPoint, frame: Pose| built[si].roads[road].outward_pose(c).placed_in(frame);
    for link in &net.links {
        for e in [&link.a, &link.b] {
            let (si, road, c) = concrete_end(net, built, e);
            check_zero_curvature(&built[si].roads[road], c, link.pos, e)?;
        }
    }
    let mut progress = true;
    while progress {
        progress = false;
        for link in &net.links {
            let a = concrete_end(net, built, &link.a);
            let b = concrete_end(net, built, &link.b);
            for (from, to) in [(a, b), (b, a)] {
                if let (Some(f), None) = (frames[from.0], frames[to.0]) {
                    let meet = outward(from.0, from.1, from.2, f).reversed();
                    let local = built[to.0].roads[to.1].outward_pose(to.2);
                    frames[to.0] = Some(Pose::ORIGIN.relative_to(local).placed_in(meet));
                    progress = true;
                }
            }
        }
    }
    let frames: Vec<Pose> = frames
        .into_iter()
        .enumerate()
        .map(|(i, f)| f.ok_or_else(|| AssemblyError::Unreachable { segment: net.segments[i].id.clone() }))
        .collect::<Result<_, _>>()?;

    for link in &net.links {
        let a = concrete_end(net, built, &link.a);
        let b = concrete_end(net, built, &link.b);
        let pa = outward(a.0, a.1, a.2, frames[a.0]);
        let pb = outward(b.0, b.1, b.2, frames[b.0]);
        let heading = normalize_angle(pa.phi - pb.phi - std::f64::consts::PI);
        if pa.distance(pb) > LINK_POSITION_TOL || heading.abs() > LINK_HEADING_TOL {
            return Err(AssemblyError::Inconsistent {
                pos: link.pos,
                a: link.a.to_string(),
                b: link.b.to_string(),
                pose_a: pa,
                pose_b: pb,
            });
        }
    }
    Ok(frames)
}

/// Sets road and lane links between two road ends that touch.
fn link_ends(roads: &mut [Road], a: (usize, ContactPoint), b: (usize, ContactPoint)) {
    *roads[a.0].link_mut(a.1) = Some(Link::Road { road: b.0, contact: b.1 });
    *roads[b.0].link_mut(b.1) = Some(Link::Road { road: a.0, contact: a.1 });
    // Lanes keep their id when the roads run the same way, else flip side.
    let flip = if a.1 == b.1 { -1 } else { 1 };
    let b_ids: Vec<i32> = roads[b.0].end_section(b.1).lanes.iter().map(|l| l.id).collect();
    let a_ids: Vec<i32> = roads[a.0].end_section(a.1).lanes.iter().map(|l| l.id).collect();
    let set = |road: &mut Road, contact: ContactPoint, own: &[i32], other: &[i32]| {
        let section = match contact {
            ContactPoint::Start => road.sections.first_mut(),
            ContactPoint::End => road.sections.last_mut(),
        }
        .expect("roads have lane sections");
        for lane in &mut section.lanes {
            let target = lane.id * flip;
            if own.contains(&lane.id) && other.contains(&target) {
                match contact {
                    ContactPoint::Start => lane.predecessor = Some(target),
                    ContactPoint::End => lane.successor = Some(target),
                }
            }
        }
    };
    set(&mut roads[a.0], a.1, &a_ids, &b_ids);
    set(&mut roads[b.0], b.1, &b_ids, &a_ids);
}

/// Lanes of a road end as seen driving away from it: `(right, left)`,
/// each ordered from the center outward.
fn lanes_leaving(road: &Road, contact: ContactPoint) -> [Vec<LaneTrack>; 2] {
    let section = road.end_section(contact);
    let s = match contact {
        ContactPoint::Start => 0.0,
        ContactPoint::End => road.length(),
    };
    let tracks = |side: Side| -> Vec<LaneTrack> {
        section
            .side(side)
            .into_iter()
            .map(|l| LaneTrack {
                side,
                lane_type: l.lane_type,
                mark: l.mark,
                turn: None,
                pieces: vec![constant_width(l.width_at(s).max(1e-3)).expect("positive").over(0.0, 0.0)],
            })
            .collect()
    };
    match contact {
        ContactPoint::Start => [tracks(Side::Left), tracks(Side::Right)],
        ContactPoint::End => [tracks(Side::Right), tracks(Side::Left)],
    }
}

/// Lane layout of a closing road: the lanes of end `a` carried over, turned
/// into the lanes of end `b` over the last `ramp` meters.
fn closing_layout(a: [Vec<LaneTrack>; 2], b: [Vec<LaneTrack>; 2], center: crate::lanes::RoadMark, length: f64, ramp: f64) -> LaneLayout {
    let ramp = ramp.min(0.5 * length);
    let s0 = length - ramp;
    let mut tracks = Vec::new();
    // Arriving at b: b's lanes leaving b, seen from the closing road, swap sides.
    for (i, side) in [Side::Right, Side::Left].into_iter().enumerate() {
        let from = &a[i];
        let to = &b[1 - i];
        for k in 0..from.len().max(to.len()) {
            let wa = from.get(k).map(|t| t.pieces[0].d);
            let wb = to.get(k).map(|t| t.pieces[0].d);
            let template = from.get(k).or(to.get(k)).expect("k below one of the counts");
            let pieces = match (wa, wb) {
                (Some(wa), Some(wb)) if wa == wb => vec![constant_width(wa).expect("positive").over(0.0, length)],
                (Some(wa), Some(wb)) => vec![
                    constant_width(wa).expect("positive").over(0.0, s0),
                    transition(wa, wb, s0, ramp).expect("positive ramp"),
                ],
                (Some(wa), None) => vec![
                    constant_width(wa).expect("positive").over(0.0, s0),
                    lapse(wa, s0, ramp).expect("positive"),
                ],
                (None, Some(wb)) => vec![widening(wb, s0, ramp).expect("positive")],
                (None, None) => unreachable!(),
            };
            tracks.push(LaneTrack { side, lane_type: template.lane_type, mark: template.mark, turn: None, pieces });
        }
    }
    LaneLayout { center_mark: center, tracks }
}

/// Places all segments, links them and generates the closing roads.
pub fn assemble(net: &LogicalNetwork, built: Vec<BuiltSegment>, defaults: &Defaults) -> Result<Assembly, AssemblyError> {
    let frames = place_all(net, &built)?;
    let mut network = RoadNetwork { name: net.name.clone().unwrap_or_default(), ..RoadNetwork::default() };
    let mut offsets = Vec::with_capacity(built.len());
    for (seg, frame) in built.iter().zip(&frames) {
        let mut roads = seg.roads.clone();
        for r in &mut roads {
            r.place(*frame);
        }
        offsets.push(network.absorb(roads, seg.junctions.clone()));
    }
    let global = |net_: &LogicalNetwork, e: &EndRef| {
        let (si, road, c) = concrete_end(net_, &built, e);
        (offsets[si] + road, c)
    };

    for link in &net.links {
        let a = global(net, &link.a);
        let b = global(net, &link.b);
        link_ends(&mut network.roads, a, b);
    }

    let mut closing = Vec::new();
    let mut warnings = Vec::new();
    for (n, req) in net.close_requests.iter().enumerate() {
        let EndPair { a: ea, b: eb, pos } = req;
        let a = global(net, ea);
        let b = global(net, eb);
        check_zero_curvature(&network.roads[a.0], a.1, *pos, ea)?;
        check_zero_curvature(&network.roads[b.0], b.1, *pos, eb)?;
        let start = network.roads[a.0].outward_pose(a.1);
        let goal = network.roads[b.0].outward_pose(b.1).reversed();
        let curve = close_gap(start, goal).map_err(|source| AssemblyError::Close {
            pos: *pos,
            a: ea.to_string(),
            b: eb.to_string(),
            source,
        })?;
        let length = curve.profile.length();
        let lanes_a = lanes_leaving(&network.roads[a.0], a.1);
        let lanes_b = lanes_leaving(&network.roads[b.0], b.1);
        let counts = |l: &[Vec<LaneTrack>; 2]| (l[0].len(), l[1].len());
        let (ca, cb) = (counts(&lanes_a), (lanes_b[1].len(), lanes_b[0].len()));
        if ca != cb {
            warnings.push(format!(
                "{pos}: close request {ea} - {eb}: lane counts differ (right/left {}/{} vs {}/{}); lanes are opened or closed over the last {} m",
                ca.0,
                ca.1,
                cb.0,
                cb.1,
                defaults.closing.transition.min(0.5 * length)
            ));
        }
        let center = network.roads[a.0].end_section(a.1).center_mark;
        let layout = closing_layout(lanes_a, lanes_b, center, length, defaults.closing.transition);
        if layout.tracks.is_empty() {
            return Err(AssemblyError::Lanes { pos: *pos, message: format!("road ends {ea} and {eb} have no lanes") });
        }
        let road = Road {
            name: format!("close{}", n + 1),
            sections: layout.sections(length),
            profile: curve.profile.clone(),
            start,
            junction: None,
            predecessor: None,
            successor: None,
        };
        let idx = network.roads.len();
        network.roads.push(road);
        link_ends(&mut network.roads, a, (idx, ContactPoint::Start));
        link_ends(&mut network.roads, (idx, ContactPoint::End), b);
        closing.push(curve);
    }
    Ok(Assembly { network, frames, closing, warnings })
}
