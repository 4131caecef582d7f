//! Multi-frequency factorization imaging of wave-number-dependent sources.
//!
//! Far- and near-field data of a separable space-time source are synthesized
//! by quadrature ([`forward`]), assembled into Toeplitz operators
//! ([`spectral`]) and probed with Picard indicators ([`indicator`]) whose
//! large values outline strips, Θ-convex hulls and annuli containing the
//! support. [`validation`] checks the discrete factorization and support laws;
//! [`pipeline`] wires everything to config files and reproducible outputs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod forward;
pub mod geometry;
pub mod indicator;
pub mod linalg;
pub mod metrics;
pub mod pipeline;
pub mod source;
pub mod spectral;
pub mod validation;

pub use error::{Error, Result};
pub use forward::{FarFieldRecord, NearFieldRecord};
pub use geometry::{Direction, QuadratureRule, QuadratureScheme, Shape, SupportDomain};
pub use indicator::{IndicatorField, Lattice, ScanOptions, TestVector, Truncation};
pub use linalg::{CMatrix, CVector};
pub use metrics::Contrast;
pub use pipeline::{RunConfig, RunManifest};
pub use source::{SpaceTimeSource, SpatialFactor, TemporalFactor};
pub use spectral::{Collocation, FrequencyGrid, NoiseKind, OperatorMatrix, OperatorSpectrum};
pub use validation::{DiscreteFactorization, ValidationReport};
