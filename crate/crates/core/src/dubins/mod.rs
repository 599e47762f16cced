//! Planar Dubins curves and their Dubins airplane extension.

mod airplane;
mod planar;

pub use airplane::{
    airplane_distance, airplane_path, AirplanePath, AirplaneState, CaseTag, PathSegment, VehicleLimits,
};
pub use planar::{
    dubins_exhaustive, dubins_shortest_2d, dubins_word, normalize_angle, DubinsWord, PlanarDubins, PlanarPose, Turn,
};
