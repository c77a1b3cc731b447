//! Top-view SVG drawing of a road network.

use std::fmt::Write;

use crate::model::{Road, RoadNetwork};

/// Longest arc-length step between polyline samples.
pub const SAMPLE_STEP: f64 = 0.5;
const MARGIN: f64 = 10.0;

fn samples(s0: f64, s1: f64) -> Vec<f64> {
    let n = ((s1 - s0) / SAMPLE_STEP).ceil().max(1.0) as usize;
    (0..=n).map(|i| s0 + (s1 - s0) * i as f64 / n as f64).collect()
}

fn points(pts: &[(f64, f64)]) -> String {
    let mut s = String::new();
    for (i, (x, y)) in pts.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        // SVG y grows downwards.
        let _ = write!(s, "{:.2},{:.2}", x, -y);
    }
    s.replace("-0.00", "0.00")
}

struct Shapes {
    surfaces: Vec<(bool, Vec<(f64, f64)>)>,
    boundaries: Vec<Vec<(f64, f64)>>,
    reference: Vec<Vec<(f64, f64)>>,
}

fn road_shapes(road: &Road, shapes: &mut Shapes) {
    let geometry = road.geometry();
    let length = road.length();
    let mut reference = Vec::new();
    for (k, section) in road.sections.iter().enumerate() {
        let s_end = road.sections.get(k + 1).map_or(length, |n| n.s_start);
        let ss = samples(section.s_start, s_end);
        let poses: Vec<_> = ss.iter().map(|&s| geometry.pose_at(s)).collect();
        for lane in &section.lanes {
            let sign = lane.id.signum() as f64;
            let mut inner = Vec::with_capacity(ss.len());
            let mut outer = Vec::with_capacity(ss.len());
            for (&s, p) in ss.iter().zip(&poses) {
                let t = section.inner_offset(lane.id, s);
                let w = lane.width_at(s);
                let a = p.offset(sign * t);
                let b = p.offset(sign * (t + w));
                inner.push((a.x, a.y));
                outer.push((b.x, b.y));
            }
            let mut polygon = inner;
            polygon.extend(outer.iter().rev());
            shapes.surfaces.push((road.junction.is_some(), polygon));
            if road.junction.is_none() {
                shapes.boundaries.push(outer);
            }
        }
        let start = if reference.is_empty() { 0 } else { 1 };
        reference.extend(poses[start..].iter().map(|p| (p.x, p.y)));
    }
    shapes.reference.push(reference);
}

/// Draws reference lines, lane surfaces and lane boundaries. Connecting
/// roads inside junctions are shaded.
pub fn render(net: &RoadNetwork) -> String {
    let mut shapes = Shapes { surfaces: Vec::new(), boundaries: Vec::new(), reference: Vec::new() };
    for road in &net.roads {
        road_shapes(road, &mut shapes);
    }
    let all = shapes.surfaces.iter().flat_map(|(_, p)| p.iter()).chain(shapes.reference.iter().flatten());
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, y0, x1, y1) = (0.0, 0.0, 0.0, 0.0);
    }
    let (vx, vy) = (x0 - MARGIN, -y1 - MARGIN);
    let (vw, vh) = (x1 - x0 + 2.0 * MARGIN, y1 - y0 + 2.0 * MARGIN);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vx:.2} {vy:.2} {vw:.2} {vh:.2}" width="{:.0}" height="{:.0}">"#,
        vw * 4.0,
        vh * 4.0
    );
    let _ = writeln!(out, r#"<rect x="{vx:.2}" y="{vy:.2}" width="{vw:.2}" height="{vh:.2}" fill="white"/>"#);
    out.push_str("<g stroke=\"none\">\n");
    for (junction, polygon) in &shapes.surfaces {
        let fill = if *junction { "#e8b04a\" fill-opacity=\"0.35" } else { "#cfcfcf" };
        let _ = writeln!(out, r#"<polygon fill="{fill}" points="{}"/>"#, points(polygon));
    }
    out.push_str("</g>\n<g fill=\"none\" stroke=\"#333\" stroke-width=\"0.15\">\n");
    for line in &shapes.boundaries {
        let _ = writeln!(out, r#"<polyline points="{}"/>"#, points(line));
    }
    out.push_str("</g>\n<g fill=\"none\" stroke=\"#c0392b\" stroke-width=\"0.2\">\n");
    for line in &shapes.reference {
        let _ = writeln!(out, r#"<polyline points="{}"/>"#, points(line));
    }
    out.push_str("</g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_network_is_a_valid_canvas() {
        let svg = render(&RoadNetwork::default());
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("polyline")).count(), 0);
    }

    #[test]
    fn sample_spacing() {
        let s = samples(0.0, 10.2);
        assert!(s.windows(2).all(|w| w[1] - w[0] <= SAMPLE_STEP + 1e-12));
        assert_eq!(*s.last().unwrap(), 10.2);
    }
}
