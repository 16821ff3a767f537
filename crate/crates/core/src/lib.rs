pub mod analysis;
pub mod error;
pub mod floorfield;
pub mod forest;
pub mod geometry;
pub mod heatmap;
pub mod rng;
pub mod ingest;
pub mod pipeline;
pub mod scenario;
pub mod simulator;

pub use error::{Error, Result};
