//! Piecewise-linear curvature graphs and their resolution into poses.

use std::fmt;

use crate::geometry::{arc_pose, line_pose, spiral_pose, Pose};

/// Pieces shorter than this are dropped when a profile is cut.
pub const MIN_LENGTH: f64 = 1e-9;

/// Radius as written in an input file. `Straight` is an infinite radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radius {
    Straight,
    Finite(f64),
}

impl Radius {
    pub fn curvature(self) -> f64 {
        match self {
            Radius::Straight => 0.0,
            Radius::Finite(r) => 1.0 / r,
        }
    }
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Radius::Straight => f.write_str("inf"),
            Radius::Finite(r) => write!(f, "{r}"),
        }
    }
}

/// Reference-line element in input terms: lengths and signed radii
/// (positive radius turns left).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileElement {
    Line { length: f64 },
    Arc { length: f64, radius: f64 },
    Spiral { length: f64, start: Radius, end: Radius },
}

impl ProfileElement {
    pub fn length(&self) -> f64 {
        match *self {
            ProfileElement::Line { length }
            | ProfileElement::Arc { length, .. }
            | ProfileElement::Spiral { length, .. } => length,
        }
    }

    pub fn to_primitive(&self) -> Primitive {
        match *self {
            ProfileElement::Line { length } => Primitive::Line { length },
            ProfileElement::Arc { length, radius } => Primitive::Arc { length, curvature: 1.0 / radius },
            ProfileElement::Spiral { length, start, end } => Primitive::Spiral {
                length,
                k_start: start.curvature(),
                k_end: end.curvature(),
            },
        }
    }
}

/// Geometric primitive in curvature terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Primitive {
    Line { length: f64 },
    Arc { length: f64, curvature: f64 },
    Spiral { length: f64, k_start: f64, k_end: f64 },
}

impl Primitive {
    pub fn length(&self) -> f64 {
        match *self {
            Primitive::Line { length } | Primitive::Arc { length, .. } | Primitive::Spiral { length, .. } => {
                length
            }
        }
    }

    pub fn k_start(&self) -> f64 {
        match *self {
            Primitive::Line { .. } => 0.0,
            Primitive::Arc { curvature, .. } => curvature,
            Primitive::Spiral { k_start, .. } => k_start,
        }
    }

    pub fn k_end(&self) -> f64 {
        match *self {
            Primitive::Line { .. } => 0.0,
            Primitive::Arc { curvature, .. } => curvature,
            Primitive::Spiral { k_end, .. } => k_end,
        }
    }

    /// Curvature at local arc length `s`.
    pub fn curvature_at(&self, s: f64) -> f64 {
        match *self {
            Primitive::Line { .. } => 0.0,
            Primitive::Arc { curvature, .. } => curvature,
            Primitive::Spiral { length, k_start, k_end } => {
                if s >= length {
                    k_end
                } else {
                    k_start + (k_end - k_start) * (s / length)
                }
            }
        }
    }

    /// Pose at local arc length `s` when the primitive starts at `start`.
    pub fn pose_at(&self, s: f64, start: Pose) -> Pose {
        match *self {
            Primitive::Line { .. } => line_pose(s, start),
            Primitive::Arc { curvature, .. } => arc_pose(s, curvature, start),
            Primitive::Spiral { length, k_start, k_end } => spiral_pose(s, k_start, k_end, length, start),
        }
    }

    /// The part of the primitive between local abscissas `lo` and `hi`.
    /// A cut spiral keeps its curvature rate.
    pub fn sub(&self, lo: f64, hi: f64) -> Primitive {
        let length = hi - lo;
        match *self {
            Primitive::Line { .. } => Primitive::Line { length },
            Primitive::Arc { curvature, .. } => Primitive::Arc { length, curvature },
            Primitive::Spiral { .. } => {
                let (k_start, k_end) = (self.curvature_at(lo), self.curvature_at(hi));
                if k_start == k_end {
                    Primitive::Arc { length, curvature: k_start }
                } else {
                    Primitive::Spiral { length, k_start, k_end }
                }
            }
        }
    }

    /// Heading change over the whole primitive.
    pub fn turn(&self) -> f64 {
        0.5 * (self.k_start() + self.k_end()) * self.length()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProfileError {
    #[error("curvature jumps from {before} to {after} 1/m at s = {s} m")]
    Discontinuous { s: f64, before: f64, after: f64 },
    #[error("element length must be positive, got {0} m")]
    Length(f64),
    #[error("s = {s} m is outside the reference line [0, {length}] m")]
    OutOfRange { s: f64, length: f64 },
    #[error("invalid cut interval [{lo}, {hi}] m on a reference line of {length} m")]
    Cut { lo: f64, hi: f64, length: f64 },
}

/// Ordered primitives forming one reference line.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurvatureProfile {
    primitives: Vec<Primitive>,
    length: f64,
}

impl CurvatureProfile {
    pub fn new() -> CurvatureProfile {
        CurvatureProfile::default()
    }

    /// Builds a curvature-continuous profile from input elements.
    pub fn from_elements(elements: &[ProfileElement]) -> Result<CurvatureProfile, ProfileError> {
        elements
            .iter()
            .try_fold(CurvatureProfile::new(), |p, e| p.append(e.to_primitive()))
    }

    /// Builds a profile that may have curvature jumps at primitive joints.
    /// Only used for roads inside junctions.
    pub fn with_jumps(primitives: Vec<Primitive>) -> Result<CurvatureProfile, ProfileError> {
        let mut p = CurvatureProfile::new();
        for prim in primitives {
            p.push(prim)?;
        }
        Ok(p)
    }

    fn push(&mut self, p: Primitive) -> Result<(), ProfileError> {
        if !(p.length() > 0.0) || !p.length().is_finite() {
            return Err(ProfileError::Length(p.length()));
        }
        self.length += p.length();
        self.primitives.push(p);
        Ok(())
    }

    /// Appends a primitive whose entry curvature must equal the current exit curvature.
    pub fn append(mut self, p: Primitive) -> Result<CurvatureProfile, ProfileError> {
        if let Some(last) = self.primitives.last() {
            if last.k_end() != p.k_start() {
                return Err(ProfileError::Discontinuous {
                    s: self.length,
                    before: last.k_end(),
                    after: p.k_start(),
                });
            }
        }
        self.push(p)?;
        Ok(self)
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    pub fn k_start(&self) -> f64 {
        self.primitives.first().map_or(0.0, Primitive::k_start)
    }

    pub fn k_end(&self) -> f64 {
        self.primitives.last().map_or(0.0, Primitive::k_end)
    }

    /// Index of the primitive containing `s` and the local abscissa.
    fn locate(&self, s: f64) -> (usize, f64) {
        let mut s0 = 0.0;
        for (i, p) in self.primitives.iter().enumerate() {
            if s <= s0 + p.length() || i + 1 == self.primitives.len() {
                return (i, (s - s0).clamp(0.0, p.length()));
            }
            s0 += p.length();
        }
        (0, 0.0)
    }

    fn check_range(&self, s: f64) -> Result<(), ProfileError> {
        if s >= 0.0 && s <= self.length {
            Ok(())
        } else {
            Err(ProfileError::OutOfRange { s, length: self.length })
        }
    }

    pub fn curvature_at(&self, s: f64) -> Result<f64, ProfileError> {
        self.check_range(s)?;
        if self.is_empty() {
            return Ok(0.0);
        }
        let (i, ds) = self.locate(s);
        Ok(self.primitives[i].curvature_at(ds))
    }

    /// The part of the profile between `lo` and `hi`. Pieces shorter than
    /// [`MIN_LENGTH`] are dropped.
    pub fn sub(&self, lo: f64, hi: f64) -> Result<CurvatureProfile, ProfileError> {
        if !(0.0 <= lo && lo <= hi && hi <= self.length) {
            return Err(ProfileError::Cut { lo, hi, length: self.length });
        }
        let mut out = CurvatureProfile::new();
        let mut s0 = 0.0;
        for p in &self.primitives {
            let s1 = s0 + p.length();
            let a = lo.max(s0);
            let b = hi.min(s1);
            if b - a >= MIN_LENGTH {
                out.length += b - a;
                out.primitives.push(p.sub(a - s0, b - s0));
            }
            s0 = s1;
        }
        Ok(out)
    }

    /// Splits into the parts before `s_lo` and after `s_hi`.
    pub fn split(&self, s_lo: f64, s_hi: f64) -> Result<(CurvatureProfile, CurvatureProfile), ProfileError> {
        if !(0.0 <= s_lo && s_lo <= s_hi && s_hi <= self.length) {
            return Err(ProfileError::Cut { lo: s_lo, hi: s_hi, length: self.length });
        }
        Ok((self.sub(0.0, s_lo)?, self.sub(s_hi, self.length)?))
    }

    /// Integrates the profile from `start`.
    pub fn resolve(&self, start: Pose) -> ResolvedReferenceLine {
        let mut records = Vec::with_capacity(self.primitives.len());
        let mut pose = start;
        let mut s = 0.0;
        for p in &self.primitives {
            records.push(Record { primitive: *p, s, start: pose });
            pose = p.pose_at(p.length(), pose);
            s += p.length();
        }
        ResolvedReferenceLine { records, end: pose, length: s }
    }
}

/// One primitive with its road abscissa and start pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub primitive: Primitive,
    pub s: f64,
    pub start: Pose,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedReferenceLine {
    pub records: Vec<Record>,
    pub end: Pose,
    pub length: f64,
}

impl ResolvedReferenceLine {
    pub fn start(&self) -> Pose {
        self.records.first().map_or(self.end, |r| r.start)
    }

    /// Pose at road abscissa `s`, clamped to the line.
    pub fn pose_at(&self, s: f64) -> Pose {
        let Some(idx) = self.records.iter().rposition(|r| r.s <= s) else {
            return self.start();
        };
        let r = &self.records[idx];
        let ds = (s - r.s).min(r.primitive.length());
        if ds == r.primitive.length() {
            return self.records.get(idx + 1).map_or(self.end, |n| n.start);
        }
        r.primitive.pose_at(ds, r.start)
    }

    pub fn curvature_at(&self, s: f64) -> f64 {
        match self.records.iter().rposition(|r| r.s <= s) {
            Some(i) => {
                let r = &self.records[i];
                r.primitive.curvature_at((s - r.s).min(r.primitive.length()))
            }
            None => self.records.first().map_or(0.0, |r| r.primitive.k_start()),
        }
    }

    /// Same line expressed in another frame.
    pub fn placed_in(&self, frame: Pose) -> ResolvedReferenceLine {
        ResolvedReferenceLine {
            records: self
                .records
                .iter()
                .map(|r| Record { start: r.start.placed_in(frame), ..*r })
                .collect(),
            end: self.end.placed_in(frame),
            length: self.length,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spiral(length: f64, start: Radius, end: Radius) -> Primitive {
        ProfileElement::Spiral { length, start, end }.to_primitive()
    }

    #[test]
    fn append_checks_joints() {
        let p = CurvatureProfile::new().append(Primitive::Line { length: 50.0 }).unwrap();
        assert_eq!(p.length(), 50.0);
        assert_eq!(p.curvature_at(20.0).unwrap(), 0.0);
        let q = p.clone().append(spiral(20.0, Radius::Straight, Radius::Finite(100.0))).unwrap();
        assert_eq!(q.length(), 70.0);
        let err = p.append(ProfileElement::Arc { length: 10.0, radius: 100.0 }.to_primitive());
        assert_eq!(err, Err(ProfileError::Discontinuous { s: 50.0, before: 0.0, after: 0.01 }));
    }

    #[test]
    fn declared_radii_join_exactly() {
        let els = [
            ProfileElement::Line { length: 5.0 },
            ProfileElement::Spiral { length: 5.0, start: Radius::Straight, end: Radius::Finite(30.0) },
            ProfileElement::Arc { length: 10.0, radius: 30.0 },
            ProfileElement::Spiral { length: 5.0, start: Radius::Finite(30.0), end: Radius::Straight },
        ];
        assert!(CurvatureProfile::from_elements(&els).is_ok());
    }

    #[test]
    fn curvature_lookup() {
        let arc = CurvatureProfile::new()
            .append(ProfileElement::Arc { length: 100.0, radius: 50.0 }.to_primitive())
            .unwrap();
        assert_eq!(arc.curvature_at(50.0).unwrap(), 0.02);
        let sp = CurvatureProfile::new()
            .append(spiral(10.0, Radius::Straight, Radius::Finite(20.0)))
            .unwrap();
        assert_eq!(sp.curvature_at(5.0).unwrap(), 0.025);
        assert!(sp.curvature_at(10.5).is_err());
        assert!(sp.curvature_at(-0.1).is_err());
    }

    #[test]
    fn split_examples() {
        let line = CurvatureProfile::new().append(Primitive::Line { length: 100.0 }).unwrap();
        let (l, r) = line.split(40.0, 60.0).unwrap();
        assert_eq!(l.primitives(), &[Primitive::Line { length: 40.0 }]);
        assert_eq!(r.primitives(), &[Primitive::Line { length: 40.0 }]);

        let arc = CurvatureProfile::new()
            .append(ProfileElement::Arc { length: 100.0, radius: 50.0 }.to_primitive())
            .unwrap();
        let (l, r) = arc.split(40.0, 60.0).unwrap();
        assert_eq!(l.primitives(), &[Primitive::Arc { length: 40.0, curvature: 0.02 }]);
        assert_eq!(r.primitives(), &[Primitive::Arc { length: 40.0, curvature: 0.02 }]);

        let sp = CurvatureProfile::new()
            .append(spiral(10.0, Radius::Straight, Radius::Finite(20.0)))
            .unwrap();
        let (l, r) = sp.split(4.0, 6.0).unwrap();
        match (l.primitives()[0], r.primitives()[0]) {
            (
                Primitive::Spiral { length: l1, k_start: a0, k_end: a1 },
                Primitive::Spiral { length: l2, k_start: b0, k_end: b1 },
            ) => {
                assert_eq!((l1, l2), (4.0, 4.0));
                assert_eq!(a0, 0.0);
                assert!((1.0 / a1 - 50.0).abs() < 1e-12);
                assert!((1.0 / b0 - 1.0 / 0.03).abs() < 1e-9);
                assert_eq!(b1, 0.05);
                // Same curvature rate on both sides of the cut.
                assert!(((a1 - a0) / l1 - (b1 - b0) / l2).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        assert!(sp.split(6.0, 4.0).is_err());
        assert!(sp.split(0.0, 11.0).is_err());
    }

    #[test]
    fn zero_length_remainders_are_dropped() {
        let line = CurvatureProfile::new().append(Primitive::Line { length: 10.0 }).unwrap();
        let (l, r) = line.split(0.0, 4.0).unwrap();
        assert!(l.is_empty());
        assert_eq!(r.length(), 6.0);
    }

    #[test]
    fn resolve_line() {
        let line = CurvatureProfile::new().append(Primitive::Line { length: 10.0 }).unwrap();
        let r = line.resolve(Pose::ORIGIN);
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.records[0].start, Pose::ORIGIN);
        assert_eq!(r.end, Pose::new(10.0, 0.0, 0.0));
        assert_eq!(r.pose_at(4.0), Pose::new(4.0, 0.0, 0.0));
    }
}
