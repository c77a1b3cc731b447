//! Concrete road network: roads with resolved plan views, lane sections,
//! links and junction records.

use crate::geometry::Pose;
use crate::lanes::LaneSectionPlan;
use crate::profile::{CurvatureProfile, ResolvedReferenceLine};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContactPoint {
    Start,
    End,
}

impl ContactPoint {
    pub fn as_str(self) -> &'static str {
        match self {
            ContactPoint::Start => "start",
            ContactPoint::End => "end",
        }
    }
}

/// Target of a road's predecessor or successor link. Indices refer to
/// [`RoadNetwork::roads`] and [`RoadNetwork::junctions`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    Road { road: usize, contact: ContactPoint },
    Junction(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Road {
    pub name: String,
    pub profile: CurvatureProfile,
    /// Pose of the reference line at s = 0.
    pub start: Pose,
    pub sections: Vec<LaneSectionPlan>,
    /// Junction this road belongs to (connecting roads only).
    pub junction: Option<usize>,
    pub predecessor: Option<Link>,
    pub successor: Option<Link>,
}

impl Road {
    pub fn length(&self) -> f64 {
        self.profile.length()
    }

    pub fn geometry(&self) -> ResolvedReferenceLine {
        self.profile.resolve(self.start)
    }

    /// Reference-line pose at one end, heading along increasing s.
    pub fn end_pose(&self, contact: ContactPoint) -> Pose {
        match contact {
            ContactPoint::Start => self.start,
            ContactPoint::End => self.geometry().end,
        }
    }

    /// Pose at one end with the heading pointing away from the road.
    pub fn outward_pose(&self, contact: ContactPoint) -> Pose {
        match contact {
            ContactPoint::Start => self.start.reversed(),
            ContactPoint::End => self.geometry().end,
        }
    }

    pub fn curvature_at_end(&self, contact: ContactPoint) -> f64 {
        match contact {
            ContactPoint::Start => self.profile.k_start(),
            ContactPoint::End => self.profile.k_end(),
        }
    }

    /// Lane section touching one end.
    pub fn end_section(&self, contact: ContactPoint) -> &LaneSectionPlan {
        match contact {
            ContactPoint::Start => &self.sections[0],
            ContactPoint::End => self.sections.last().expect("road without lane sections"),
        }
    }

    pub fn link_mut(&mut self, contact: ContactPoint) -> &mut Option<Link> {
        match contact {
            ContactPoint::Start => &mut self.predecessor,
            ContactPoint::End => &mut self.successor,
        }
    }

    pub fn link(&self, contact: ContactPoint) -> Option<Link> {
        match contact {
            ContactPoint::Start => self.predecessor,
            ContactPoint::End => self.successor,
        }
    }

    /// Moves the road from a local frame into the frame `frame` is given in.
    pub fn place(&mut self, frame: Pose) {
        self.start = self.start.placed_in(frame);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub incoming: usize,
    pub connecting: usize,
    /// End of the connecting road that touches the incoming road.
    pub contact: ContactPoint,
    /// (incoming lane, connecting lane) pairs.
    pub lane_links: Vec<(i32, i32)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Junction {
    pub name: String,
    pub connections: Vec<Connection>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoadNetwork {
    pub name: String,
    pub roads: Vec<Road>,
    pub junctions: Vec<Junction>,
}

impl RoadNetwork {
    /// Appends roads and junctions, shifting their internal indices.
    pub fn absorb(&mut self, roads: Vec<Road>, junctions: Vec<Junction>) -> usize {
        let (r0, j0) = (self.roads.len(), self.junctions.len());
        let shift = |l: Option<Link>| {
            l.map(|l| match l {
                Link::Road { road, contact } => Link::Road { road: road + r0, contact },
                Link::Junction(j) => Link::Junction(j + j0),
            })
        };
        for mut r in roads {
            r.predecessor = shift(r.predecessor);
            r.successor = shift(r.successor);
            r.junction = r.junction.map(|j| j + j0);
            self.roads.push(r);
        }
        for mut j in junctions {
            for c in &mut j.connections {
                c.incoming += r0;
                c.connecting += r0;
            }
            self.junctions.push(j);
        }
        r0
    }

    pub fn connecting_roads(&self) -> usize {
        self.roads.iter().filter(|r| r.junction.is_some()).count()
    }
}

/// Roads and junctions of one segment in the segment's own frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BuiltSegment {
    pub roads: Vec<Road>,
    pub junctions: Vec<Junction>,
    /// Logical road end (road id, end) to the concrete road end.
    pub ends: Vec<((String, ContactPoint), (usize, ContactPoint))>,
}

impl BuiltSegment {
    pub fn end(&self, road: &str, end: ContactPoint) -> Option<(usize, ContactPoint)> {
        self.ends.iter().find(|((r, e), _)| r == road && *e == end).map(|(_, v)| *v)
    }
}
