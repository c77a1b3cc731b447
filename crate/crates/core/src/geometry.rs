//! Poses along lines, arcs and clothoids, and planar frame changes.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

/// Largest Fresnel argument accepted by the power series.
pub const FRESNEL_U_MAX: f64 = 2.5;

/// Curvatures below this magnitude are treated as straight.
pub const STRAIGHT_EPS: f64 = 1e-12;

const SERIES_TOL: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("Fresnel argument {u} exceeds the series range |u| <= {FRESNEL_U_MAX}; subdivide the spiral")]
    SeriesRange { u: f64 },
}

/// Wraps an angle into (-pi, pi].
pub fn normalize_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Planar position and heading. The heading is kept in (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, phi: f64) -> Pose {
        Pose { x, y, phi: normalize_angle(phi) }
    }

    pub const ORIGIN: Pose = Pose { x: 0.0, y: 0.0, phi: 0.0 };

    /// Same point, opposite heading.
    pub fn reversed(self) -> Pose {
        Pose::new(self.x, self.y, self.phi + PI)
    }

    /// Point at lateral offset `t` (positive to the left), same heading.
    pub fn offset(self, t: f64) -> Pose {
        let (s, c) = self.phi.sin_cos();
        Pose { x: self.x - t * s, y: self.y + t * c, phi: self.phi }
    }

    /// Expresses `self`, given in the frame `frame`, in the frame `frame` itself
    /// is expressed in. Inverse of [`rigid_transform`].
    pub fn placed_in(self, frame: Pose) -> Pose {
        let (s, c) = frame.phi.sin_cos();
        Pose::new(
            frame.x + c * self.x - s * self.y,
            frame.y + s * self.x + c * self.y,
            self.phi + frame.phi,
        )
    }

    /// Expresses `self` relative to `frame`.
    pub fn relative_to(self, frame: Pose) -> Pose {
        rigid_transform(self, frame.x, frame.y, frame.phi)
    }

    pub fn distance(self, other: Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Moves `start` straight ahead by `s`.
pub fn line_pose(s: f64, start: Pose) -> Pose {
    let (sn, cs) = start.phi.sin_cos();
    Pose::new(start.x + s * cs, start.y + s * sn, start.phi)
}

/// Pose after `s` along a circular arc of curvature `kappa` (positive turns left).
pub fn arc_pose(s: f64, kappa: f64, start: Pose) -> Pose {
    if kappa.abs() < STRAIGHT_EPS {
        return line_pose(s, start);
    }
    // (sin(phi) - sin(phi0)) / kappa written through the chord so short arcs
    // do not cancel.
    let half = 0.5 * kappa * s;
    let chord = 2.0 * half.sin() / kappa;
    let dir = start.phi + half;
    Pose::new(
        start.x + chord * dir.cos(),
        start.y + chord * dir.sin(),
        start.phi + kappa * s,
    )
}

/// Fresnel integrals C(u) = int_0^u cos(t^2) dt and S(u) = int_0^u sin(t^2) dt.
pub fn fresnel(u: f64) -> Result<(f64, f64), GeometryError> {
    if !(u.abs() <= FRESNEL_U_MAX) {
        return Err(GeometryError::SeriesRange { u });
    }
    Ok(fresnel_series(u))
}

fn fresnel_series(u: f64) -> (f64, f64) {
    let u2 = u * u;
    let u4 = u2 * u2;
    // p_n = (-1)^n u^(4n+1) / (2n)! and q_n = (-1)^n u^(4n+3) / (2n+1)!
    let mut p = u;
    let mut q = u * u2;
    let mut c = 0.0;
    let mut s = 0.0;
    let mut n = 0usize;
    loop {
        let tc = p / (4 * n + 1) as f64;
        let ts = q / (4 * n + 3) as f64;
        c += tc;
        s += ts;
        if tc.abs() < SERIES_TOL && ts.abs() < SERIES_TOL {
            break;
        }
        let k = (2 * n + 1) as f64;
        p *= -u4 / (k * (k + 1.0));
        q *= -u4 / ((k + 1.0) * (k + 2.0));
        n += 1;
    }
    (c, s)
}

/// Clothoid parameter: curvature grows as `2 a^2 s` from the zero-curvature origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpiralParam {
    pub a: f64,
    pub s: f64,
}

impl SpiralParam {
    /// Parameter of the clothoid that reaches `kappa` after arc length `s`.
    pub fn reaching(kappa: f64, s: f64) -> SpiralParam {
        SpiralParam { a: (kappa / (2.0 * s)).sqrt(), s }
    }

    /// Point and heading of the origin-anchored clothoid at `self.s`.
    pub fn pose(self) -> Result<Pose, GeometryError> {
        let (c, s) = fresnel(self.a * self.s)?;
        Ok(Pose::new(c / self.a, s / self.a, self.a * self.a * self.s * self.s))
    }
}

/// Displacement (dx, dy) after arc length `len` of a curve with curvature
/// `k + c t`, starting at the origin with heading zero.
fn clothoid_displacement(k: f64, c: f64, len: f64) -> (f64, f64) {
    let sign = c.signum();
    let (k, c) = (k * sign, c * sign);
    let a = (0.5 * c).sqrt();
    let sigma0 = k / c;
    let sigma1 = sigma0 + len;
    let (dx, dy) = if (a * sigma0).abs() <= FRESNEL_U_MAX && (a * sigma1).abs() <= FRESNEL_U_MAX {
        let (c0, s0) = fresnel_series(a * sigma0);
        let (c1, s1) = fresnel_series(a * sigma1);
        let (ex, ey) = ((c1 - c0) / a, (s1 - s0) / a);
        let theta0 = a * a * sigma0 * sigma0;
        let (sn, cs) = theta0.sin_cos();
        (cs * ex + sn * ey, -sn * ex + cs * ey)
    } else {
        chained_displacement(k, c, len)
    };
    (dx, dy * sign)
}

/// Same integral as [`clothoid_displacement`] for arguments outside the
/// Fresnel series range: short re-anchored pieces, each integrated with a
/// local Taylor series of exp(i (k t + c t^2 / 2)).
fn chained_displacement(k: f64, c: f64, len: f64) -> (f64, f64) {
    let k_max = k.abs().max((k + c * len).abs());
    let pieces = ((k_max * len).max(c.abs().sqrt() * len) / 0.5).ceil().max(1.0) as usize;
    let h = len / pieces as f64;
    let mut pos = Complex64::new(0.0, 0.0);
    for i in 0..pieces {
        let t0 = i as f64 * h;
        let heading = k * t0 + 0.5 * c * t0 * t0;
        let local = local_series(k + c * t0, c, h);
        pos += Complex64::from_polar(1.0, heading) * local;
    }
    (pos.re, pos.im)
}

fn local_series(k: f64, c: f64, h: f64) -> Complex64 {
    let i = Complex64::i();
    let mut prev = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1.0, 0.0);
    let mut hp = h;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut last = f64::INFINITY;
    for n in 0..200 {
        let term = cur * hp / (n + 1) as f64;
        sum += term;
        // Odd or even terms vanish when k or c is zero, so look at two in a row.
        let size = term.norm();
        if n > 2 && size.max(last) < 1e-17 * h {
            break;
        }
        last = size;
        let next = i * (cur * k + prev * c) / (n + 1) as f64;
        prev = cur;
        cur = next;
        hp *= h;
    }
    sum
}

/// Pose after `s` along a clothoid whose curvature changes linearly from
/// `kappa_start` to `kappa_end` over `length`, continuing from `start`.
pub fn spiral_pose(s: f64, kappa_start: f64, kappa_end: f64, length: f64, start: Pose) -> Pose {
    let c = (kappa_end - kappa_start) / length;
    if c == 0.0 {
        return arc_pose(s, kappa_start, start);
    }
    let heading = start.phi + kappa_start * s + 0.5 * c * s * s;
    let (dx, dy) = if kappa_start * kappa_end < 0.0 && s > -kappa_start / c {
        // Evaluate up to the inflection point, then continue from there.
        let sz = -kappa_start / c;
        let (ax, ay) = clothoid_displacement(kappa_start, c, sz);
        let (bx, by) = clothoid_displacement(0.0, c, s - sz);
        let turn = kappa_start * sz + 0.5 * c * sz * sz;
        let (sn, cs) = turn.sin_cos();
        (ax + cs * bx - sn * by, ay + sn * bx + cs * by)
    } else {
        clothoid_displacement(kappa_start, c, s)
    };
    let (sn, cs) = start.phi.sin_cos();
    Pose::new(start.x + cs * dx - sn * dy, start.y + sn * dx + cs * dy, heading)
}

/// Expresses `p` in the frame whose origin is (tx, ty) and whose x-axis points
/// along `tphi`.
pub fn rigid_transform(p: Pose, tx: f64, ty: f64, tphi: f64) -> Pose {
    let (dx, dy) = (p.x - tx, p.y - ty);
    let (s, c) = tphi.sin_cos();
    Pose::new(c * dx + s * dy, -s * dx + c * dy, p.phi - tphi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Pose, b: Pose, tol: f64) -> bool {
        (a.x - b.x).abs() <= tol
            && (a.y - b.y).abs() <= tol
            && normalize_angle(a.phi - b.phi).abs() <= tol
    }

    #[test]
    fn angle_branch() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(normalize_angle(-1e-300), -1e-300);
    }

    #[test]
    fn line_examples() {
        assert!(close(line_pose(2.0, Pose::ORIGIN), Pose::new(2.0, 0.0, 0.0), 1e-15));
        assert!(close(
            line_pose(1.0, Pose::new(0.0, 0.0, PI / 2.0)),
            Pose::new(0.0, 1.0, PI / 2.0),
            1e-15
        ));
        assert_eq!(line_pose(0.0, Pose::new(3.0, 4.0, 1.0)), Pose::new(3.0, 4.0, 1.0));
    }

    #[test]
    fn arc_examples() {
        assert!(close(arc_pose(PI / 2.0, 1.0, Pose::ORIGIN), Pose::new(1.0, 1.0, PI / 2.0), 1e-15));
        assert!(close(arc_pose(TAU, 1.0, Pose::ORIGIN), Pose::ORIGIN, 1e-14));
        let p = arc_pose(1.0, 0.5, Pose::ORIGIN);
        assert!(close(p, Pose::new(0.958851077208406, 0.244834876219575, 0.5), 1e-12));
        assert_eq!(arc_pose(3.0, 1e-13, Pose::ORIGIN), line_pose(3.0, Pose::ORIGIN));
    }

    #[test]
    fn fresnel_examples() {
        assert_eq!(fresnel(0.0).unwrap(), (0.0, 0.0));
        let (c, s) = fresnel(1.0).unwrap();
        assert!((c - 0.904524237900272).abs() < 1e-14);
        assert!((s - 0.310268301723381).abs() < 1e-14);
        assert_eq!(fresnel(-1.0).unwrap(), (-c, -s));
        assert!(matches!(fresnel(2.6), Err(GeometryError::SeriesRange { .. })));
        assert!(fresnel(f64::NAN).is_err());
    }

    #[test]
    fn spiral_param_matches_fresnel() {
        let p = SpiralParam::reaching(0.1, 10.0).pose().unwrap();
        let q = spiral_pose(10.0, 0.0, 0.1, 10.0, Pose::ORIGIN);
        assert!(close(p, q, 1e-13));
    }

    #[test]
    fn spiral_endpoints() {
        let start = Pose::new(1.0, 2.0, 0.3);
        assert_eq!(spiral_pose(0.0, 0.01, 0.05, 20.0, start), start);
        let p = spiral_pose(10.0, 0.0, 0.1, 10.0, Pose::ORIGIN);
        assert_eq!(p.phi, 0.5);
        let q = spiral_pose(10.0, 0.1, 0.0, 10.0, p);
        assert!((q.phi - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chained_and_series_agree() {
        // Inside the series range both evaluations must coincide.
        for &(k, c, len) in &[(0.02, 0.001, 30.0), (0.0, 0.004, 25.0), (-0.03, 0.002, 12.0)] {
            let a = clothoid_displacement(k, c, len);
            let b = chained_displacement(k, c, len);
            assert!((a.0 - b.0).abs() < 1e-11 && (a.1 - b.1).abs() < 1e-11, "{a:?} {b:?}");
        }
    }

    #[test]
    fn frame_change_examples() {
        assert!(close(rigid_transform(Pose::new(2.0, 0.0, 0.0), 2.0, 0.0, 0.0), Pose::ORIGIN, 0.0));
        let p = rigid_transform(Pose::new(1.0, 0.0, 0.0), 0.0, 0.0, PI / 2.0);
        assert!(close(p, Pose::new(0.0, -1.0, -PI / 2.0), 1e-15));
        let h = Pose::new(2.0 + 2f64.sqrt(), 2f64.sqrt(), PI / 4.0);
        assert!(close(rigid_transform(h, 2.0, 0.0, PI / 4.0), Pose::new(2.0, 0.0, 0.0), 1e-15));
    }
}
