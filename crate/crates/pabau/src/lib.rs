//! Std companion to `pabau-core`: archive IO, datasets, model files,
//! the classification pipeline, and report rendering.

pub mod archive;
pub mod dataset;
pub mod fixtures;
pub mod modelio;
pub mod pipeline;
pub mod render;
pub mod report;
pub mod results;
pub mod runstats;
