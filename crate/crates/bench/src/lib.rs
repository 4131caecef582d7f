//! Shared fixtures for the benchmarks.

use std::f64::consts::PI;

use factorsource::geometry::build_quadrature;
use factorsource::validation::{kite_domain, reference_grid};
use factorsource::{
    Direction, FarFieldRecord, FrequencyGrid, QuadratureRule, SpaceTimeSource, SpatialFactor, TemporalFactor,
};

/// The kite with `S = 3(t+1)` on `t ∈ (0, 0.1)`.
pub fn kite_source() -> SpaceTimeSource {
    SpaceTimeSource::new(
        SpatialFactor::Constant(3.0),
        TemporalFactor::Polynomial(vec![1.0, 1.0]),
        0.0,
        0.1,
        kite_domain(),
    )
    .expect("valid source")
}

pub fn kite_rule(resolution: usize) -> QuadratureRule {
    build_quadrature(&kite_domain(), resolution).expect("valid rule")
}

pub fn grid() -> FrequencyGrid {
    reference_grid().expect("valid band")
}

/// Far-field record at angle `π/4` on the reference band.
pub fn kite_record(resolution: usize) -> FarFieldRecord {
    factorsource::forward::sample_far_band(
        &kite_source(),
        &kite_rule(resolution),
        &Direction::from_angle(PI / 4.0),
        &grid(),
    )
    .expect("record")
}
