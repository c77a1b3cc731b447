use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use roadgen::geometry::*;

/// Adaptive Simpson quadrature, used as an independent reference.
fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// End pose of a curve with heading `phi0 + k0 t + c t^2 / 2` by quadrature.
fn reference_pose(start: Pose, k0: f64, k1: f64, len: f64, s: f64) -> Pose {
    let c = (k1 - k0) / len;
    let heading = |t: f64| start.phi + k0 * t + 0.5 * c * t * t;
    Pose::new(
        start.x + integrate(&|t| heading(t).cos(), 0.0, s, 1e-13),
        start.y + integrate(&|t| heading(t).sin(), 0.0, s, 1e-13),
        heading(s),
    )
}

fn assert_pose(a: Pose, b: Pose, tol: f64) {
    assert!(
        (a.x - b.x).abs() <= tol && (a.y - b.y).abs() <= tol && normalize_angle(a.phi - b.phi).abs() <= tol,
        "{a:?} != {b:?}"
    );
}

#[test]
fn fresnel_against_quadrature() {
    for u in [0.25, 1.0, 1.7, 2.0, 2.5] {
        let (c, s) = fresnel(u).unwrap();
        assert!((c - integrate(&|t| (t * t).cos(), 0.0, u, 1e-14)).abs() < 1e-12, "C({u})");
        assert!((s - integrate(&|t| (t * t).sin(), 0.0, u, 1e-14)).abs() < 1e-12, "S({u})");
    }
}

#[test]
fn arc_against_quadrature() {
    let p = arc_pose(1.0, 0.5, Pose::ORIGIN);
    assert_pose(p, reference_pose(Pose::ORIGIN, 0.5, 0.5, 1.0, 1.0), 1e-12);
    assert_pose(p, Pose::new(0.958851, 0.244835, 0.5), 1e-6);
}

#[test]
fn spiral_frozen_values() {
    // Reference values from a 30-digit quadrature of the heading integral.
    let p = spiral_pose(10.0, 0.0, 0.1, 10.0, Pose::ORIGIN);
    assert_pose(p, Pose::new(9.752876882003447, 1.637140473757006, 0.5), 1e-12);
    let q = spiral_pose(10.0, 0.1, 0.0, 10.0, p);
    assert_pose(q, Pose::new(16.39998495691915, 8.959352615365643, 1.0), 1e-12);

    let start = Pose::new(1.0, 2.0, 0.3);
    let r = spiral_pose(40.0, 0.02, -0.03, 40.0, start);
    assert_pose(r, Pose::new(38.17332704010845, 16.28242749497637, 0.1), 1e-11);

    // Outside the Fresnel series range.
    let g = spiral_pose(100.0, 0.05, 0.0501, 100.0, Pose::ORIGIN);
    assert_pose(g, Pose::new(-19.10594109822974, 14.25005757658050, 5.005), 1e-10);
}

#[test]
fn spiral_against_quadrature() {
    let cases = [
        (Pose::ORIGIN, 0.0, 0.1, 10.0),
        (Pose::new(5.0, -3.0, 2.9), -0.05, 0.02, 35.0),
        (Pose::new(0.0, 0.0, -1.0), 0.01, 0.0, 80.0),
        (Pose::ORIGIN, 1.0 / 30.0, 1.0 / 31.0, 60.0),
        (Pose::ORIGIN, 0.0, -0.2, 60.0),
    ];
    for (start, k0, k1, len) in cases {
        for s in [0.3 * len, len] {
            assert_pose(spiral_pose(s, k0, k1, len, start), reference_pose(start, k0, k1, len, s), 1e-9);
        }
    }
}

#[test]
fn rigid_transform_examples() {
    assert_pose(rigid_transform(Pose::new(2.0, 0.0, 0.0), 2.0, 0.0, 0.0), Pose::ORIGIN, 0.0);
    assert_pose(rigid_transform(Pose::new(1.0, 0.0, 0.0), 0.0, 0.0, FRAC_PI_2), Pose::new(0.0, -1.0, -FRAC_PI_2), 1e-15);
    let h = rigid_transform(Pose::new(3.41421, 1.41421, PI / 4.0), 2.0, 0.0, PI / 4.0);
    assert_pose(h, Pose::new(2.0, 0.0, 0.0), 1e-5);
}

fn pose() -> impl Strategy<Value = Pose> {
    (-100.0..100.0f64, -100.0..100.0f64, -PI..PI).prop_map(|(x, y, p)| Pose::new(x, y, p))
}

fn curvature() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), -0.2..0.2f64]
}

proptest! {
    #[test]
    fn heading_stays_normalized(p in pose(), s in 0.0..500.0f64, k in curvature()) {
        for q in [line_pose(s, p), arc_pose(s, k, p), spiral_pose(s, k, -k + 0.01, 500.0, p)] {
            prop_assert!(q.phi > -PI && q.phi <= PI);
        }
    }

    #[test]
    fn zero_length_is_identity(p in pose(), k0 in curvature(), k1 in curvature()) {
        prop_assert_eq!(line_pose(0.0, p), p);
        prop_assert_eq!(arc_pose(0.0, k0, p), p);
        prop_assume!(k0 != k1);
        prop_assert_eq!(spiral_pose(0.0, k0, k1, 30.0, p), p);
    }

    #[test]
    fn arc_heading_is_exact(p in pose(), s in 0.0..300.0f64, k in -0.2..0.2f64) {
        let q = arc_pose(s, k, p);
        prop_assert!(normalize_angle(q.phi - p.phi - s * k).abs() < 1e-12);
    }

    #[test]
    fn spiral_total_turn(p in pose(), k0 in curvature(), k1 in curvature(), len in 1.0..200.0f64) {
        prop_assume!(k0 != k1);
        let q = spiral_pose(len, k0, k1, len, p);
        let turn = 0.5 * (k0 + k1) * len;
        prop_assert!(normalize_angle(q.phi - p.phi - turn).abs() <= 1e-12 * turn.abs().max(1.0));
    }

    #[test]
    fn transform_round_trip(p in pose(), f in pose()) {
        let back = rigid_transform(p, f.x, f.y, f.phi).placed_in(f);
        prop_assert!((back.x - p.x).abs() < 1e-12 && (back.y - p.y).abs() < 1e-12);
        prop_assert!(normalize_angle(back.phi - p.phi).abs() < 1e-12);
    }

    #[test]
    fn tangent_matches_heading(p in pose(), k0 in curvature(), k1 in curvature(), len in 5.0..150.0f64, frac in 0.05..0.95f64) {
        let h = 1e-5;
        let s = frac * len;
        let evals: [&dyn Fn(f64) -> Pose; 3] = [
            &|t| line_pose(t, p),
            &|t| arc_pose(t, k0, p),
            &|t| if k0 != k1 { spiral_pose(t, k0, k1, len, p) } else { arc_pose(t, k0, p) },
        ];
        for f in evals {
            let (a, b, m) = (f(s - h), f(s + h), f(s));
            let (dx, dy) = ((b.x - a.x) / (2.0 * h), (b.y - a.y) / (2.0 * h));
            prop_assert!((dx - m.phi.cos()).abs() < 1e-6 && (dy - m.phi.sin()).abs() < 1e-6);
        }
    }
}
