//! Lanes in the s,t frame: width polynomials, lane sections and their
//! generation from lane tracks.

use std::fmt;
use std::str::FromStr;

use crate::profile::MIN_LENGTH;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LaneError {
    #[error("lane width must be positive, got {0} m")]
    Width(f64),
    #[error("transition length must be positive, got {0} m")]
    Transition(f64),
    #[error("lane transition [{from}, {to}] m does not fit the road length {length} m")]
    OutOfRoad { from: f64, to: f64, length: f64 },
    #[error("lane widening ends at {0} m after its lapse starts")]
    Overlap(f64),
}

/// Lane width `w(x) = a x^3 + b x^2 + c x + d` with `x = s - valid_from`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthPoly {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub valid_from: f64,
    pub valid_to: f64,
}

impl WidthPoly {
    pub fn eval(&self, s: f64) -> f64 {
        let x = s - self.valid_from;
        ((self.a * x + self.b) * x + self.c) * x + self.d
    }

    pub fn slope(&self, s: f64) -> f64 {
        let x = s - self.valid_from;
        (3.0 * self.a * x + 2.0 * self.b) * x + self.c
    }

    /// Same polynomial re-expanded around a new local origin.
    pub fn rebased(&self, from: f64) -> WidthPoly {
        let t = from - self.valid_from;
        WidthPoly {
            a: self.a,
            b: self.b + 3.0 * self.a * t,
            c: self.c + (2.0 * self.b + 3.0 * self.a * t) * t,
            d: self.eval(from),
            valid_from: from,
            valid_to: self.valid_to,
        }
    }

    pub fn over(self, valid_from: f64, valid_to: f64) -> WidthPoly {
        WidthPoly { valid_from, valid_to, ..self }
    }

    /// Shifts the whole validity interval by `ds`.
    pub fn shifted(self, ds: f64) -> WidthPoly {
        WidthPoly { valid_from: self.valid_from + ds, valid_to: self.valid_to + ds, ..self }
    }
}

pub fn constant_width(w0: f64) -> Result<WidthPoly, LaneError> {
    if !(w0 > 0.0) {
        return Err(LaneError::Width(w0));
    }
    Ok(WidthPoly { a: 0.0, b: 0.0, c: 0.0, d: w0, valid_from: 0.0, valid_to: f64::INFINITY })
}

/// Cubic from `w_from` to `w_to` over `[s0, s0 + ds]` with zero slope at both ends.
pub fn transition(w_from: f64, w_to: f64, s0: f64, ds: f64) -> Result<WidthPoly, LaneError> {
    if !(ds > 0.0) {
        return Err(LaneError::Transition(ds));
    }
    let dw = w_to - w_from;
    Ok(WidthPoly {
        a: -2.0 * dw / (ds * ds * ds),
        b: 3.0 * dw / (ds * ds),
        c: 0.0,
        d: w_from,
        valid_from: s0,
        valid_to: s0 + ds,
    })
}

/// Lane opening from zero to `w0` over `[s0, s0 + ds]`.
pub fn widening(w0: f64, s0: f64, ds: f64) -> Result<WidthPoly, LaneError> {
    if !(w0 > 0.0) {
        return Err(LaneError::Width(w0));
    }
    transition(0.0, w0, s0, ds)
}

/// Lane closing from `w0` to zero over `[s0, s0 + ds]`.
pub fn lapse(w0: f64, s0: f64, ds: f64) -> Result<WidthPoly, LaneError> {
    if !(w0 > 0.0) {
        return Err(LaneError::Width(w0));
    }
    transition(w0, 0.0, s0, ds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn sign(self) -> i32 {
        match self {
            Side::Left => 1,
            Side::Right => -1,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

macro_rules! keyword_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(format!(
                        "unknown {} '{}'",
                        stringify!($name),
                        s
                    )),
                }
            }
        }
    };
}

keyword_enum!(LaneType {
    Driving => "driving",
    Border => "border",
    Shoulder => "shoulder",
    Sidewalk => "sidewalk",
    Biking => "biking",
    Parking => "parking",
    Median => "median",
    Restricted => "restricted",
    Stop => "stop",
    None => "none",
});

keyword_enum!(RoadMark {
    None => "none",
    Solid => "solid",
    Broken => "broken",
    SolidSolid => "solid solid",
    SolidBroken => "solid broken",
    BrokenSolid => "broken solid",
    BrokenBroken => "broken broken",
});

keyword_enum!(Turn {
    Left => "left",
    Right => "right",
});

/// One lane of a lane section.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneSpec {
    pub side: Side,
    /// Negative on the right, positive on the left, counted outward from 1.
    pub id: i32,
    pub lane_type: LaneType,
    pub mark: RoadMark,
    pub widths: Vec<WidthPoly>,
    /// Turn this lane is reserved for, if any.
    pub turn: Option<Turn>,
    pub predecessor: Option<i32>,
    pub successor: Option<i32>,
}

impl LaneSpec {
    pub fn width_at(&self, s: f64) -> f64 {
        let poly = self
            .widths
            .iter()
            .rev()
            .find(|w| w.valid_from <= s)
            .or(self.widths.first());
        poly.map_or(0.0, |w| w.eval(s))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaneSectionPlan {
    pub s_start: f64,
    pub center_mark: RoadMark,
    pub lanes: Vec<LaneSpec>,
}

impl LaneSectionPlan {
    /// Lanes of one side ordered from the center outward.
    pub fn side(&self, side: Side) -> Vec<&LaneSpec> {
        let mut v: Vec<&LaneSpec> = self.lanes.iter().filter(|l| l.side == side).collect();
        v.sort_by_key(|l| l.id.abs());
        v
    }

    pub fn lane(&self, id: i32) -> Option<&LaneSpec> {
        self.lanes.iter().find(|l| l.id == id)
    }

    /// Distance from the reference line to the inner boundary of lane `id`.
    pub fn inner_offset(&self, id: i32, s: f64) -> f64 {
        let side = if id > 0 { Side::Left } else { Side::Right };
        self.side(side)
            .iter()
            .take_while(|l| l.id != id)
            .map(|l| l.width_at(s))
            .sum()
    }
}

/// Sum of the lane widths on one side of the reference line.
pub fn outer_offset(lanes: &[LaneSpec], side: Side, s: f64) -> f64 {
    lanes.iter().filter(|l| l.side == side).map(|l| l.width_at(s)).sum()
}

/// A lane followed along the whole road, described by contiguous width
/// pieces. The lane exists wherever a piece covers it.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneTrack {
    pub side: Side,
    pub lane_type: LaneType,
    pub mark: RoadMark,
    pub turn: Option<Turn>,
    pub pieces: Vec<WidthPoly>,
}

impl LaneTrack {
    /// Lane of constant width over `[0, length]`.
    pub fn constant(side: Side, lane_type: LaneType, mark: RoadMark, width: f64, length: f64) -> Result<LaneTrack, LaneError> {
        Ok(LaneTrack {
            side,
            lane_type,
            mark,
            turn: None,
            pieces: vec![constant_width(width)?.over(0.0, length)],
        })
    }

    /// Lane of width `width` that opens and closes with cubic transitions.
    /// `opens`/`closes` are `(s, length)` of the transitions.
    pub fn with_transitions(
        side: Side,
        lane_type: LaneType,
        mark: RoadMark,
        width: f64,
        opens: Option<(f64, f64)>,
        closes: Option<(f64, f64)>,
        road_length: f64,
    ) -> Result<LaneTrack, LaneError> {
        let full = constant_width(width)?;
        let mut pieces = Vec::new();
        let mut from = 0.0;
        if let Some((s, ds)) = opens {
            check_fits(s, ds, road_length)?;
            pieces.push(widening(width, s, ds)?);
            from = s + ds;
        }
        let mut to = road_length;
        let mut tail = None;
        if let Some((s, ds)) = closes {
            check_fits(s, ds, road_length)?;
            if s < from {
                return Err(LaneError::Overlap(from));
            }
            tail = Some(lapse(width, s, ds)?);
            to = s;
        }
        if to - from >= MIN_LENGTH {
            pieces.push(full.over(from, to));
        }
        pieces.extend(tail);
        Ok(LaneTrack { side, lane_type, mark, turn: None, pieces })
    }

    pub fn start(&self) -> f64 {
        self.pieces.first().map_or(0.0, |p| p.valid_from)
    }

    pub fn end(&self) -> f64 {
        self.pieces.last().map_or(0.0, |p| p.valid_to)
    }

    fn piece_covering(&self, a: f64, b: f64) -> Option<&WidthPoly> {
        let mid = 0.5 * (a + b);
        self.pieces.iter().find(|p| p.valid_from <= mid && mid <= p.valid_to)
    }

    pub fn width_at(&self, s: f64) -> f64 {
        self.pieces
            .iter()
            .find(|p| p.valid_from <= s && s <= p.valid_to)
            .map_or(0.0, |p| p.eval(s))
    }

    /// The part of the track inside `[lo, hi]`, shifted so that `lo` becomes 0.
    fn sub(&self, lo: f64, hi: f64) -> Option<LaneTrack> {
        let pieces: Vec<WidthPoly> = self
            .pieces
            .iter()
            .filter_map(|p| {
                let a = p.valid_from.max(lo);
                let b = p.valid_to.min(hi);
                (b - a >= MIN_LENGTH).then(|| {
                    let mut q = if a > p.valid_from { p.rebased(a) } else { *p };
                    q.valid_to = b;
                    q.shifted(-lo)
                })
            })
            .collect();
        (!pieces.is_empty()).then(|| LaneTrack { pieces, ..self.clone() })
    }
}

fn check_fits(s: f64, ds: f64, length: f64) -> Result<(), LaneError> {
    if !(ds > 0.0) {
        return Err(LaneError::Transition(ds));
    }
    if s < 0.0 || s + ds > length + MIN_LENGTH {
        return Err(LaneError::OutOfRoad { from: s, to: s + ds, length });
    }
    Ok(())
}

/// All lanes of a road as tracks; each side is ordered from the center outward.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneLayout {
    pub center_mark: RoadMark,
    pub tracks: Vec<LaneTrack>,
}

impl LaneLayout {
    pub fn side(&self, side: Side) -> impl Iterator<Item = &LaneTrack> {
        self.tracks.iter().filter(move |t| t.side == side)
    }

    /// Inserts a track as the innermost (`inner = true`) or outermost lane of its side.
    pub fn insert(&mut self, track: LaneTrack, inner: bool) {
        let pos = if inner {
            self.tracks.iter().position(|t| t.side == track.side).unwrap_or(self.tracks.len())
        } else {
            self.tracks.iter().rposition(|t| t.side == track.side).map_or(self.tracks.len(), |i| i + 1)
        };
        self.tracks.insert(pos, track);
    }

    /// The layout of the road piece `[lo, hi]`, re-based to start at 0.
    pub fn sub(&self, lo: f64, hi: f64) -> LaneLayout {
        LaneLayout {
            center_mark: self.center_mark,
            tracks: self.tracks.iter().filter_map(|t| t.sub(lo, hi)).collect(),
        }
    }

    /// Lane sections for a road of `length`, with lane ids and the lane
    /// links between consecutive sections.
    pub fn sections(&self, length: f64) -> Vec<LaneSectionPlan> {
        let mut cuts: Vec<f64> = vec![0.0, length];
        for t in &self.tracks {
            for p in &t.pieces {
                cuts.push(p.valid_from.clamp(0.0, length));
                cuts.push(p.valid_to.clamp(0.0, length));
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|b, a| *b - *a < MIN_LENGTH);
        if let Some(last) = cuts.last_mut() {
            *last = length;
        }

        // For each section, the track index behind every lane id.
        let mut sections: Vec<LaneSectionPlan> = Vec::new();
        let mut owners: Vec<Vec<(usize, i32)>> = Vec::new();
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b - a < MIN_LENGTH {
                continue;
            }
            let mut lanes = Vec::new();
            let mut owner = Vec::new();
            let mut counts = [0i32; 2];
            for (ti, t) in self.tracks.iter().enumerate() {
                let Some(piece) = t.piece_covering(a, b) else { continue };
                let slot = &mut counts[(t.side == Side::Right) as usize];
                *slot += 1;
                let id = *slot * t.side.sign();
                let mut poly = if piece.valid_from < a { piece.rebased(a) } else { *piece };
                poly.valid_from = a;
                poly.valid_to = b;
                owner.push((ti, id));
                lanes.push(LaneSpec {
                    side: t.side,
                    id,
                    lane_type: t.lane_type,
                    mark: t.mark,
                    widths: vec![poly],
                    turn: t.turn,
                    predecessor: None,
                    successor: None,
                });
            }
            sections.push(LaneSectionPlan { s_start: a, center_mark: self.center_mark, lanes });
            owners.push(owner);
        }
        for i in 1..sections.len() {
            let (prev, next) = (&owners[i - 1], &owners[i]);
            for (k, &(track, id)) in next.iter().enumerate() {
                if let Some(&(_, prev_id)) = prev.iter().find(|(t, _)| *t == track) {
                    sections[i].lanes[k].predecessor = Some(prev_id);
                    let pk = prev.iter().position(|(t, _)| *t == track).unwrap();
                    sections[i - 1].lanes[pk].successor = Some(id);
                }
            }
        }
        if sections.is_empty() {
            sections.push(LaneSectionPlan { s_start: 0.0, center_mark: self.center_mark, lanes: Vec::new() });
        }
        sections
    }
}
