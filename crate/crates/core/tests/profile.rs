use proptest::prelude::*;
use roadgen::geometry::{normalize_angle, Pose};
use roadgen::profile::*;

fn element() -> impl Strategy<Value = (u8, f64, f64)> {
    (0u8..3, 1.0..80.0f64, prop_oneof![-0.05..-0.005f64, 0.005..0.05f64])
}

/// A curvature-continuous profile built from random element kinds.
fn profile() -> impl Strategy<Value = CurvatureProfile> {
    prop::collection::vec(element(), 1..8).prop_map(|els| {
        let mut p = CurvatureProfile::new();
        for (kind, len, k) in els {
            let k_in = p.k_end();
            let prim = match kind {
                0 if k_in == 0.0 => Primitive::Line { length: len },
                1 if k_in != 0.0 => Primitive::Arc { length: len, curvature: k_in },
                _ => Primitive::Spiral { length: len, k_start: k_in, k_end: if k_in == k { 0.0 } else { k } },
            };
            p = p.append(prim).unwrap();
        }
        p
    })
}

#[test]
fn fig4_heading_change() {
    let (l_sp, l_arc, r) = (15.0, 40.0, 60.0);
    let els = [
        ProfileElement::Line { length: 20.0 },
        ProfileElement::Spiral { length: l_sp, start: Radius::Straight, end: Radius::Finite(r) },
        ProfileElement::Arc { length: l_arc, radius: r },
        ProfileElement::Spiral { length: l_sp, start: Radius::Finite(r), end: Radius::Straight },
        ProfileElement::Line { length: 20.0 },
    ];
    let p = CurvatureProfile::from_elements(&els).unwrap();
    let line = p.resolve(Pose::ORIGIN);
    assert!((line.end.phi - (l_arc + l_sp) / r).abs() < 1e-14);
    // Heading never decreases through the left-turning part.
    let mut last = 0.0;
    for i in 0..=200 {
        let phi = line.pose_at(p.length() * i as f64 / 200.0).phi;
        assert!(phi >= last - 1e-15);
        last = phi;
    }
}

#[test]
fn line_then_spiral_then_arc_turns_monotonically() {
    let els = [
        ProfileElement::Line { length: 5.0 },
        ProfileElement::Spiral { length: 5.0, start: Radius::Straight, end: Radius::Finite(25.0) },
        ProfileElement::Arc { length: 20.0, radius: 25.0 },
    ];
    let p = CurvatureProfile::from_elements(&els).unwrap();
    let line = p.resolve(Pose::ORIGIN);
    let samples: Vec<f64> = (0..=300).map(|i| line.pose_at(30.0 * i as f64 / 300.0).phi).collect();
    for (i, w) in samples.windows(2).enumerate() {
        let s = 30.0 * i as f64 / 300.0;
        if s >= 5.0 {
            assert!(w[1] > w[0]);
        } else {
            assert_eq!(w[1], w[0]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn records_chain(p in profile(), start in (-50.0..50.0f64, -50.0..50.0f64, -3.0..3.0f64)) {
        let start = Pose::new(start.0, start.1, start.2);
        let line = p.resolve(start);
        for w in line.records.windows(2) {
            let end = w[0].primitive.pose_at(w[0].primitive.length(), w[0].start);
            prop_assert!(end.distance(w[1].start) < 1e-9);
            prop_assert!(normalize_angle(end.phi - w[1].start.phi).abs() < 1e-10);
            prop_assert_eq!(w[0].primitive.k_end(), w[1].primitive.k_start());
        }
    }

    #[test]
    fn split_is_consistent(p in profile(), a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (lo, hi) = (lo * p.length(), hi * p.length());
        let (left, right) = p.split(lo, hi).unwrap();
        prop_assert!((left.length() + right.length() - (p.length() - (hi - lo))).abs() < 1e-9);
        let full = p.resolve(Pose::ORIGIN);
        let part = left.resolve(Pose::ORIGIN);
        prop_assert!(part.end.distance(full.pose_at(lo)) < 1e-9);
        let tail = right.resolve(full.pose_at(hi));
        prop_assert!(tail.end.distance(full.end) < 1e-9);
        // Curvature is unchanged by cutting.
        if !right.is_empty() {
            prop_assert!((right.k_start() - p.curvature_at(hi).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn curvature_is_continuous(p in profile()) {
        let mut s = 0.0;
        for prim in p.primitives() {
            s += prim.length();
            if s < p.length() {
                let before = p.curvature_at(s - 1e-9).unwrap();
                let after = p.curvature_at((s + 1e-9).min(p.length())).unwrap();
                prop_assert!((before - after).abs() < 1e-9);
            }
        }
    }
}
