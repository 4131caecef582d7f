//! Config-driven simulate / reconstruct / validate stages and their artifacts.

pub mod config;
pub mod manifest;
pub mod run;

pub use config::{Observations, OutputSpec, RunConfig};
pub use manifest::{sha256_hex, FileEntry, OutputDir, RunManifest, StageTiming};
pub use run::{
    extents_report, load_records, reconstruct, simulate, synthesize, validate, GroundTruth, Reconstruction, Records,
};
