//! Logical road-network descriptions: data model, XML reader and writer.
//!
//! The format is defined by `docs/roadnetwork.xsd`. Values the input leaves
//! out are filled from [`Defaults`] and marked as defaulted, so that writing
//! a parsed network back reproduces only what was written.

mod overrides;
mod read;
mod write;

use std::fmt;
use std::sync::OnceLock;

use crate::defaults::Defaults;
use crate::lanes::{LaneType, RoadMark, Side, Turn};
use crate::model::ContactPoint;
use crate::profile::{CurvatureProfile, ProfileElement};

pub use overrides::apply_overrides;
pub use read::{parse, parse_with};
pub use write::to_xml;
pub use xsdcheck::Diagnostic;

/// The input schema shipped with the tool.
pub const SCHEMA: &str = include_str!("../../../../docs/roadnetwork.xsd");

/// Line and column in the input text, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{pos}: malformed XML: {message}")]
    Xml { pos: Pos, message: String },
    #[error("{}", schema_summary(.0))]
    Schema(Vec<Diagnostic>),
    #[error("{pos}: {message}")]
    Semantic { pos: Pos, message: String },
    #[error("--set {key}: {message}")]
    Override { key: String, message: String },
}

fn schema_summary(d: &[Diagnostic]) -> String {
    d.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")
}

/// A value that may come from the input or from the defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setting<T> {
    pub value: T,
    pub defaulted: bool,
}

impl<T> Setting<T> {
    pub fn given(value: T) -> Setting<T> {
        Setting { value, defaulted: false }
    }

    pub fn default_to(value: T) -> Setting<T> {
        Setting { value, defaulted: true }
    }
}

/// Angle kept in the degrees it was written in.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Angle(f64);

impl Angle {
    pub fn from_degrees(deg: f64) -> Angle {
        Angle(deg)
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0.to_radians()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    TJunction,
    XJunction,
    Roundabout,
    ConnectionRoad,
}

impl SegmentKind {
    pub fn tag(self) -> &'static str {
        match self {
            SegmentKind::TJunction => "tjunction",
            SegmentKind::XJunction => "xjunction",
            SegmentKind::Roundabout => "roundabout",
            SegmentKind::ConnectionRoad => "connectionRoad",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoadClass {
    Main,
    Access,
}

impl RoadClass {
    pub fn as_str(self) -> &'static str {
        match self {
            RoadClass::Main => "main",
            RoadClass::Access => "access",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaneDef {
    pub side: Side,
    pub width: f64,
    pub lane_type: Setting<LaneType>,
    pub mark: Setting<RoadMark>,
    /// `(s, length)` of the widening that opens the lane.
    pub widening: Option<(f64, f64)>,
    /// `(s, length)` of the lapse that closes the lane.
    pub lapse: Option<(f64, f64)>,
    pub pos: Pos,
}

/// Lanes of a road; on each side ordered from the center outward.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneSet {
    pub center_mark: Setting<RoadMark>,
    pub lanes: Vec<LaneDef>,
    /// True when the road has no `lanes` element.
    pub defaulted: bool,
}

impl LaneSet {
    pub fn side(&self, side: Side) -> impl Iterator<Item = &LaneDef> {
        self.lanes.iter().filter(move |l| l.side == side)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadSpec {
    pub id: String,
    pub class: Setting<RoadClass>,
    /// Reference line as written.
    pub elements: Vec<ProfileElement>,
    pub profile: CurvatureProfile,
    pub lanes: LaneSet,
    pub pos: Pos,
}

impl RoadSpec {
    pub fn length(&self) -> f64 {
        self.profile.length()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionPoint {
    pub road: String,
    pub s: f64,
    pub partner: String,
    pub partner_s: f64,
    /// Heading of the partner road at the crossing, relative to the road.
    pub angle: Angle,
    pub pos: Pos,
}

/// The part of a road before or after its intersection point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArmSide {
    Before,
    After,
}

impl ArmSide {
    pub fn as_str(self) -> &'static str {
        match self {
            ArmSide::Before => "before",
            ArmSide::After => "after",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ArmRef {
    pub road: String,
    pub side: ArmSide,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JunctionArea {
    pub road: String,
    pub before: Option<f64>,
    pub after: Option<f64>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdditionalLane {
    pub arm: ArmRef,
    pub turn: Turn,
    pub min_radius: Option<f64>,
    /// Full-width stretch in front of the junction.
    pub length: Setting<f64>,
    /// Length of the widening that opens the lane.
    pub widening: Setting<f64>,
    /// `None`: as wide as the neighbouring lane.
    pub width: Option<f64>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionSpec {
    pub from: ArmRef,
    pub from_lane: Option<i32>,
    pub to: ArmRef,
    pub to_lane: Option<i32>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CouplerSpec {
    pub min_radius: Option<f64>,
    pub areas: Vec<JunctionArea>,
    pub additional_lanes: Vec<AdditionalLane>,
    /// Empty means every permitted connection.
    pub connections: Vec<ConnectionSpec>,
    /// False when the input has no `coupler` element.
    pub present: bool,
}

impl CouplerSpec {
    pub fn area(&self, road: &str) -> Option<&JunctionArea> {
        self.areas.iter().find(|a| a.road == road)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionSpec {
    pub points: Vec<IntersectionPoint>,
    pub coupler: CouplerSpec,
}

impl IntersectionSpec {
    /// Id of the road the segment frame is aligned with.
    pub fn reference_road(&self) -> &str {
        &self.points[0].road
    }

    pub fn reference_s(&self) -> f64 {
        self.points[0].s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSpec {
    pub id: String,
    pub kind: SegmentKind,
    pub roads: Vec<RoadSpec>,
    pub intersection: Option<IntersectionSpec>,
    pub pos: Pos,
}

impl SegmentSpec {
    pub fn road(&self, id: &str) -> Option<&RoadSpec> {
        self.roads.iter().find(|r| r.id == id)
    }

    pub fn road_index(&self, id: &str) -> Option<usize> {
        self.roads.iter().position(|r| r.id == id)
    }

    /// Position and angle at which `road` meets the intersection point:
    /// `(s, angle)`, the angle being 0 for the reference road. For a
    /// roundabout ring this is the first access point.
    pub fn crossing(&self, road: &str) -> Option<(f64, Angle)> {
        let i = self.intersection.as_ref()?;
        if i.reference_road() == road {
            return Some((i.reference_s(), Angle::default()));
        }
        i.points.iter().find(|p| p.partner == road).map(|p| (p.partner_s, p.angle))
    }

    /// Whether the logical road end can be linked to another segment.
    pub fn is_free_end(&self, road: &str, end: ContactPoint) -> bool {
        let Some(r) = self.road(road) else { return false };
        let ring = self.kind == SegmentKind::Roundabout
            && self.intersection.as_ref().is_some_and(|i| i.reference_road() == road);
        if ring {
            return false;
        }
        match self.crossing(road) {
            None => true,
            Some((s, _)) => match end {
                ContactPoint::Start => s > crate::profile::MIN_LENGTH,
                ContactPoint::End => s < r.length() - crate::profile::MIN_LENGTH,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EndRef {
    pub segment: String,
    pub road: String,
    pub end: ContactPoint,
}

impl fmt::Display for EndRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.segment, self.road, self.end.as_str())
    }
}

/// Two road ends: joined directly (links) or bridged by a generated road
/// (close requests).
#[derive(Debug, Clone, PartialEq)]
pub struct EndPair {
    pub a: EndRef,
    pub b: EndRef,
    pub pos: Pos,
}

pub type LinkSpec = EndPair;
pub type CloseSpec = EndPair;

#[derive(Debug, Clone, PartialEq)]
pub struct WorldOffset {
    pub segment: String,
    pub x: f64,
    pub y: f64,
    pub angle: Angle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogicalNetwork {
    pub name: Option<String>,
    /// The reference segment and where its frame lies in world coordinates.
    pub world_offset: Setting<WorldOffset>,
    pub segments: Vec<SegmentSpec>,
    pub links: Vec<LinkSpec>,
    pub close_requests: Vec<CloseSpec>,
}

impl LogicalNetwork {
    pub fn segment(&self, id: &str) -> Option<&SegmentSpec> {
        self.segments.iter().find(|s| s.id == id)
    }

    pub fn segment_index(&self, id: &str) -> Option<usize> {
        self.segments.iter().position(|s| s.id == id)
    }
}

/// Checks `text` against the shipped input schema.
pub fn validate_schema(text: &str) -> Vec<Diagnostic> {
    static COMPILED: OnceLock<xsdcheck::Schema> = OnceLock::new();
    COMPILED
        .get_or_init(|| xsdcheck::Schema::parse(SCHEMA).expect("shipped input schema compiles"))
        .validate_str(text)
}

/// Lane set used when a road has no `lanes` element.
pub fn default_lanes(class: RoadClass, ring: bool, defaults: &Defaults) -> LaneSet {
    let d = if ring {
        &defaults.roundabout
    } else {
        match class {
            RoadClass::Main => &defaults.main,
            RoadClass::Access => &defaults.access,
        }
    };
    let sides: &[Side] = if ring { &[Side::Right] } else { &[Side::Left, Side::Right] };
    let mut lanes = Vec::new();
    for &side in sides {
        for _ in 0..d.lanes {
            lanes.push(LaneDef {
                side,
                width: d.width,
                lane_type: Setting::default_to(d.lane_type),
                mark: Setting::default_to(d.mark),
                widening: None,
                lapse: None,
                pos: Pos::default(),
            });
        }
    }
    LaneSet { center_mark: Setting::default_to(d.center_mark), lanes, defaulted: true }
}
