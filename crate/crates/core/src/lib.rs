pub mod assembly;
pub mod defaults;
pub mod geometry;
pub mod input;
pub mod junction;
pub mod lanes;
pub mod model;
pub mod odr;
pub mod pipeline;
pub mod profile;
pub mod segment;
pub mod stats;
pub mod svg;
