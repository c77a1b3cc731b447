//! Building the concrete roads of one logical segment in its own frame.

use crate::defaults::Defaults;
use crate::geometry::Pose;
use crate::input::{LaneSet, SegmentKind, SegmentSpec};
use crate::junction::{build_junction, build_roundabout, JunctionError};
use crate::lanes::{LaneError, LaneLayout, LaneTrack};
use crate::model::{BuiltSegment, ContactPoint, Road};

/// Lane tracks for a road of `length` from its lane definitions.
pub fn layout_of(lanes: &LaneSet, length: f64) -> Result<LaneLayout, LaneError> {
    let tracks = lanes
        .lanes
        .iter()
        .map(|l| LaneTrack::with_transitions(l.side, l.lane_type.value, l.mark.value, l.width, l.widening, l.lapse, length))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LaneLayout { center_mark: lanes.center_mark.value, tracks })
}

pub fn build_segment(seg: &SegmentSpec, defaults: &Defaults) -> Result<BuiltSegment, JunctionError> {
    match seg.kind {
        SegmentKind::ConnectionRoad => {
            let spec = &seg.roads[0];
            let layout = layout_of(&spec.lanes, spec.length()).map_err(|e| JunctionError {
                segment: seg.id.clone(),
                pos: spec.pos,
                message: e.to_string(),
            })?;
            let road = Road {
                name: format!("{}.{}", seg.id, spec.id),
                profile: spec.profile.clone(),
                start: Pose::ORIGIN,
                sections: layout.sections(spec.length()),
                junction: None,
                predecessor: None,
                successor: None,
            };
            Ok(BuiltSegment {
                roads: vec![road],
                junctions: Vec::new(),
                ends: [ContactPoint::Start, ContactPoint::End]
                    .into_iter()
                    .map(|e| ((spec.id.clone(), e), (0, e)))
                    .collect(),
            })
        }
        SegmentKind::TJunction | SegmentKind::XJunction => build_junction(seg, defaults),
        SegmentKind::Roundabout => build_roundabout(seg, defaults),
    }
}
