//! Independent checks of the factorization structure behind the indicators.
//!
//! The range identity itself is infinite-dimensional. What is checked here are
//! its finite-dimensional consequences: the discrete factorization
//! `F = L T L*`, the inside/outside contrast of a regularized range residual,
//! and the time support of the inverse transform of the far-field data.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::Cholesky;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forward::{sample_far_band, sample_near_band, sample_uniform_band, FarFieldRecord};
use crate::geometry::{
    build_quadrature, build_quadrature_with, directional_extent, distance, gauss_legendre, Direction, QuadratureRule,
    QuadratureScheme, SupportDomain,
};
use crate::indicator::{far_test_vector, TestVector};
use crate::linalg::{frobenius_norm, hermitian_eigen, CMatrix, CVector};
use crate::source::{inv_sqrt_2pi, SpaceTimeSource, SpatialFactor, TemporalFactor};
use crate::spectral::{assemble_far_operator, assemble_near_operator, sharp_operator, Collocation, FrequencyGrid};

/// `F = L_rows · diag(middle) · L_cols*` on a space-time quadrature.
#[derive(Debug, Clone)]
pub struct DiscreteFactorization {
    pub left: CMatrix,
    pub right: CMatrix,
    pub middle: Vec<Complex64>,
    pub rebuilt: CMatrix,
}

impl DiscreteFactorization {
    fn from_parts(left: CMatrix, right: CMatrix, middle: Vec<Complex64>) -> Self {
        let scaled = CMatrix::from_fn(left.nrows(), left.ncols(), |r, c| left[(r, c)] * middle[c]);
        let rebuilt = &scaled * right.adjoint();
        Self { left, right, middle, rebuilt }
    }

    /// `‖F - L T L*‖_F / ‖F‖_F` (zero when both vanish).
    pub fn residual(&self, assembled: &CMatrix) -> f64 {
        relative_difference(assembled, &self.rebuilt)
    }

    /// Whether the same matrix multiplies on both sides.
    pub fn is_symmetric(&self) -> bool {
        self.left == self.right
    }

    /// `‖F# - L (|Re T| + |Im T|) L*‖ / ‖F#‖`, defined when `L` is shared and
    /// `Re T`, `Im T` are each one-signed so the absolute values commute with `L`.
    pub fn sharp_residual(&self) -> Result<Option<f64>> {
        if !self.is_symmetric() {
            return Ok(None);
        }
        let one_signed = |v: Vec<f64>| v.iter().all(|x| *x >= 0.0) || v.iter().all(|x| *x <= 0.0);
        if !one_signed(self.middle.iter().map(|z| z.re).collect())
            || !one_signed(self.middle.iter().map(|z| z.im).collect())
        {
            return Ok(None);
        }
        let abs_middle: Vec<Complex64> =
            self.middle.iter().map(|z| Complex64::new(z.re.abs() + z.im.abs(), 0.0)).collect();
        let expected = DiscreteFactorization::from_parts(self.left.clone(), self.left.clone(), abs_middle).rebuilt;
        Ok(Some(relative_difference(&sharp_operator(&self.rebuilt)?, &expected)))
    }
}

fn relative_difference(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = frobenius_norm(a);
    let diff = frobenius_norm(&(a - b));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn check_rules(src: &SpaceTimeSource, quad: &QuadratureRule, time_nodes: usize, dim: usize) -> Result<()> {
    if quad.dim() != src.dim() || dim != src.dim() {
        return Err(Error::InvalidConfig("quadrature, source and observation differ in dimension".into()));
    }
    if time_nodes < 2 {
        return Err(Error::InvalidConfig(format!("time rule needs at least 2 nodes, got {time_nodes}")));
    }
    Ok(())
}

/// Space-time nodes `(y_q, t_r)` with weights `w_q w_r Δk`.
fn space_time_nodes<'a>(
    src: &SpaceTimeSource,
    quad: &'a QuadratureRule,
    time_nodes: usize,
    dk: f64,
) -> Vec<(&'a [f64], f64, f64)> {
    let times = gauss_legendre(time_nodes, src.t_min(), src.t_max());
    quad.iter().flat_map(|(y, wq)| times.iter().map(move |&(t, wt)| (y, t, wq * wt * dk))).collect()
}

fn phase_matrix(nodes: &[f64], columns: &[(f64, f64)]) -> CMatrix {
    // columns: (phase argument, sqrt weight)
    CMatrix::from_fn(nodes.len(), columns.len(), |r, c| Complex64::from_polar(columns[c].1, nodes[r] * columns[c].0))
}

fn factor_from(grid: &FrequencyGrid, columns: Vec<(f64, f64)>, middle: Vec<Complex64>) -> DiscreteFactorization {
    let left = phase_matrix(&grid.row_nodes(), &columns);
    let right = match grid.collocation() {
        Collocation::Aligned => left.clone(),
        Collocation::Staggered => phase_matrix(&grid.column_nodes(), &columns),
    };
    DiscreteFactorization::from_parts(left, right, middle)
}

/// Far-field factorization with `L_{n,(q,r)} = e^{-iτ_n(x̂·y_q - t_r)} (w_q w_r Δk)^{1/2}`
/// and `T = (2π)^{-1/2} e^{-ik_c(x̂·y - t)} S(y, t)`.
pub fn build_discrete_factorization(
    src: &SpaceTimeSource,
    quad: &QuadratureRule,
    time_nodes: usize,
    direction: &Direction,
    grid: &FrequencyGrid,
) -> Result<DiscreteFactorization> {
    check_rules(src, quad, time_nodes, direction.dim())?;
    let kc = grid.center();
    let (columns, middle) = space_time_nodes(src, quad, time_nodes, grid.dk())
        .into_iter()
        .map(|(y, t, w)| {
            let arg = direction.dot(y) - t;
            let s = src.eval_inside(y, t);
            ((-arg, w.sqrt()), Complex64::from_polar(inv_sqrt_2pi() * s, -kc * arg))
        })
        .unzip();
    Ok(factor_from(grid, columns, middle))
}

/// Near-field factorization with `L_{n,(q,r)} = e^{iτ_n(|x-y_q| + t_r)} (w_q w_r Δk)^{1/2}`
/// and `T = e^{ik_c(|x-y| + t)} S(y, t) / ((2π)^{1/2} 4π|x-y|)`.
pub fn build_near_factorization(
    src: &SpaceTimeSource,
    quad: &QuadratureRule,
    time_nodes: usize,
    point: &[f64],
    grid: &FrequencyGrid,
) -> Result<DiscreteFactorization> {
    check_rules(src, quad, time_nodes, point.len())?;
    let kc = grid.center();
    let (columns, middle) = space_time_nodes(src, quad, time_nodes, grid.dk())
        .into_iter()
        .map(|(y, t, w)| {
            let d = distance(point, y);
            let s = src.eval_inside(y, t) * inv_sqrt_2pi() / (4.0 * PI * d);
            ((d + t, w.sqrt()), Complex64::from_polar(s, kc * (d + t)))
        })
        .unzip();
    Ok(factor_from(grid, columns, middle))
}

/// `α‖(L L* + αI)^{-1} φ‖ / ‖φ‖` with `α = regularizer · λ_max(L L*)`: the
/// relative residual of the ridge-regularized least-squares fit `L g ≈ φ`.
pub fn range_membership_residual(left: &CMatrix, phi: &TestVector, regularizer: f64) -> Result<f64> {
    let rhs = CVector::from_vec(phi.values.clone());
    if rhs.len() != left.nrows() {
        return Err(Error::InvalidArgument("test vector length differs from operator rows".into()));
    }
    let norm = rhs.norm();
    if norm == 0.0 {
        return Err(Error::Degenerate("zero test vector".into()));
    }
    if !(regularizer > 0.0) {
        return Err(Error::InvalidArgument("regularizer must be positive".into()));
    }
    let gram = left * left.adjoint();
    let (eig, _) = hermitian_eigen(&gram)?;
    let alpha = regularizer * eig.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let shifted = gram + CMatrix::identity(rhs.len(), rhs.len()) * Complex64::new(alpha, 0.0);
    let chol = Cholesky::new(shifted).ok_or_else(|| Error::NumericFailure("Cholesky factorization failed".into()))?;
    Ok(alpha * chol.solve(&rhs).norm() / norm)
}

/// Parameters of the inverse-transform support estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportOptions {
    /// Fraction of the peak that counts as signal.
    pub threshold: f64,
    /// Fraction of the band, at each end, covered by the raised-cosine taper.
    pub taper: f64,
}

impl Default for SupportOptions {
    fn default() -> Self {
        Self { threshold: 0.02, taper: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportEstimate {
    /// Smallest interval containing every above-threshold sample.
    pub interval: (f64, f64),
    /// Maximal above-threshold runs, merged across gaps shorter than one bin.
    pub clusters: Vec<(f64, f64)>,
    /// Time resolution `π / k_hi`.
    pub bin: f64,
    /// Most negative sample of the reconstructed signal relative to its peak.
    pub min_over_peak: f64,
    pub times: Vec<f64>,
    pub signal: Vec<f64>,
}

/// Support of `ξ ↦ (2π)^{-1/2} ∫ w∞(x̂, k) e^{ikξ} dk` from a uniform symmetric band.
pub fn support_interval_estimate(record: &FarFieldRecord, options: SupportOptions) -> Result<SupportEstimate> {
    let ks = &record.wavenumbers;
    if ks.len() < 3 {
        return Err(Error::InvalidArgument("support estimate needs a sampled band".into()));
    }
    let spacing = ks[1] - ks[0];
    let k_hi = ks.iter().fold(0.0f64, |m, k| m.max(k.abs()));
    let uniform = ks.windows(2).all(|w| ((w[1] - w[0]) - spacing).abs() <= 1e-9 * spacing);
    let symmetric = (ks[0] + ks[ks.len() - 1]).abs() <= 1e-9 * k_hi;
    if !(spacing > 0.0) || !uniform || !symmetric {
        return Err(Error::InvalidArgument("support estimate needs a uniform band symmetric about 0".into()));
    }
    let weighted: Vec<(f64, Complex64)> = ks
        .iter()
        .zip(&record.values)
        .map(|(&k, v)| (k, v * taper(k.abs() / k_hi, options.taper) * spacing * inv_sqrt_2pi()))
        .collect();
    let bin = PI / k_hi;
    let half_period = PI / spacing;
    let step = bin / 4.0;
    let count = (2.0 * half_period / step) as usize;
    let times: Vec<f64> = (0..count).map(|i| -half_period + i as f64 * step).collect();
    let signal: Vec<f64> = times
        .par_iter()
        .map(|&xi| weighted.iter().map(|(k, v)| (v * Complex64::from_polar(1.0, k * xi)).re).sum())
        .collect();
    let peak = signal.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(Error::Degenerate("inverse transform vanishes identically".into()));
    }
    let above: Vec<bool> = signal.iter().map(|v| v.abs() >= options.threshold * peak).collect();
    let mut clusters: Vec<(f64, f64)> = Vec::new();
    for (i, flag) in above.iter().enumerate() {
        if !flag {
            continue;
        }
        match clusters.last_mut() {
            Some(last) if times[i] - last.1 <= bin + 0.5 * step => last.1 = times[i],
            _ => clusters.push((times[i], times[i])),
        }
    }
    let interval = (clusters[0].0, clusters[clusters.len() - 1].1);
    let max = signal.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = signal.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SupportEstimate { interval, clusters, bin, min_over_peak: min / max, times, signal })
}

/// Raised-cosine taper equal to 1 below `1 - fraction` and falling to 0 at `x = 1`.
fn taper(x: f64, fraction: f64) -> f64 {
    let start = 1.0 - fraction;
    if fraction <= 0.0 || x <= start {
        1.0
    } else {
        0.5 * (1.0 + (PI * (x - start) / fraction).cos())
    }
}

/// One measured quantity against its bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// `true` when the value must stay at or below the bound, `false` when at or above.
    pub upper: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, upper: true }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, upper: false }
    }

    pub fn passed(&self) -> bool {
        if self.upper {
            self.value <= self.bound
        } else {
            self.value >= self.bound
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let op = if c.upper { "<=" } else { ">=" };
            let status = if c.passed() { "ok" } else { "FAIL" };
            let _ = writeln!(out, "{status:4} {} = {:.6e} ({op} {:.3e})", c.name, c.value, c.bound);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,value,bound,relation,passed\n");
        for c in &self.checks {
            let op = if c.upper { "le" } else { "ge" };
            let _ = writeln!(out, "{},{:?},{:?},{op},{}", c.name, c.value, c.bound, c.passed());
        }
        out
    }
}

/// Where a catalog case is observed from.
#[derive(Debug, Clone, PartialEq)]
pub enum Probe {
    Far(Direction),
    Near(Vec<f64>),
}

/// One entry of the validation catalog.
#[derive(Debug, Clone)]
pub struct CatalogCase {
    pub name: String,
    pub source: SpaceTimeSource,
    pub resolution: usize,
    pub probe: Probe,
}

pub fn kite_domain() -> SupportDomain {
    SupportDomain::kite([0.0, 0.0], 1.0).expect("valid kite")
}

pub fn cube_domain() -> SupportDomain {
    SupportDomain::cube(vec![0.0; 3], vec![0.5; 3]).expect("valid cube")
}

fn t_plus_one() -> TemporalFactor {
    TemporalFactor::Polynomial(vec![1.0, 1.0])
}

/// Kite sources with observation angles, cube with far and near probes, and a constant ball.
pub fn builtin_catalog() -> Result<Vec<CatalogCase>> {
    let kite = |name: &str, spatial: SpatialFactor, theta: f64| -> Result<CatalogCase> {
        Ok(CatalogCase {
            name: name.into(),
            source: SpaceTimeSource::new(spatial, t_plus_one(), 0.0, 0.1, kite_domain())?,
            resolution: 60,
            probe: Probe::Far(Direction::from_angle(theta)),
        })
    };
    let cube_source = SpaceTimeSource::new(
        SpatialFactor::QuadraticRadial { offset: 1.0, curvature: 1.0 },
        t_plus_one(),
        0.0,
        0.1,
        cube_domain(),
    )?;
    let ball = SpaceTimeSource::new(
        SpatialFactor::Constant(1.0),
        TemporalFactor::Polynomial(vec![1.0]),
        0.0,
        0.1,
        SupportDomain::ball(vec![0.0; 3], 0.5)?,
    )?;
    Ok(vec![
        kite("kite_const", SpatialFactor::Constant(3.0), PI / 4.0)?,
        kite("kite_x1", SpatialFactor::Affine { offset: 0.0, gradient: vec![3.0, 0.0] }, PI / 2.0)?,
        kite("kite_r2m4", SpatialFactor::QuadraticRadial { offset: -12.0, curvature: 3.0 }, 3.0 * PI / 4.0)?,
        CatalogCase {
            name: "cube_far".into(),
            source: cube_source.clone(),
            resolution: 12,
            probe: Probe::Far(Direction::new(vec![1.0, 0.0, 0.0])?),
        },
        CatalogCase {
            name: "cube_near".into(),
            source: cube_source,
            resolution: 12,
            probe: Probe::Near(vec![1.5, 0.0, 0.0]),
        },
        CatalogCase {
            name: "ball_const".into(),
            source: ball,
            resolution: 12,
            probe: Probe::Far(Direction::new(vec![0.0, 0.6, 0.8])?),
        },
    ])
}

/// Band `(0, 16π/6)` with 16 samples, used by the built-in catalog.
pub fn reference_grid() -> Result<FrequencyGrid> {
    FrequencyGrid::new(0.0, 16.0 * PI / 6.0, 16)
}

/// Time nodes used on the factorization side of the catalog checks.
pub const CATALOG_TIME_NODES: usize = 16;

/// Tolerances of the catalog checks.
pub const FACTORIZATION_TOLERANCE: f64 = 1e-8;
pub const SHARP_TOLERANCE: f64 = 1e-6;

/// Factorization residual of one case; `mismatch` builds the factorization on
/// a different spatial rule than the data (a negative control).
pub fn factorization_residual(case: &CatalogCase, grid: &FrequencyGrid, mismatch: bool) -> Result<(f64, Option<f64>)> {
    let quad = build_quadrature(case.source.support(), case.resolution)?;
    let other = if mismatch { build_quadrature(case.source.support(), case.resolution + 1)? } else { quad.clone() };
    let (assembled, factor) = match &case.probe {
        Probe::Far(d) => {
            let rec = sample_far_band(&case.source, &quad, d, grid)?;
            let op = assemble_far_operator(&rec, grid)?;
            (op.entries, build_discrete_factorization(&case.source, &other, CATALOG_TIME_NODES, d, grid)?)
        }
        Probe::Near(x) => {
            let rec = sample_near_band(&case.source, &quad, x, grid)?;
            let op = assemble_near_operator(&rec, grid)?;
            (op.entries, build_near_factorization(&case.source, &other, CATALOG_TIME_NODES, x, grid)?)
        }
    };
    Ok((factor.residual(&assembled), factor.sharp_residual()?))
}

/// Inside and outside range residuals for the kite with `S = 3(t+1)` at `θ = π/4`.
pub fn kite_range_contrast(grid: &FrequencyGrid, regularizer: f64) -> Result<(f64, f64)> {
    let src = SpaceTimeSource::new(SpatialFactor::Constant(3.0), t_plus_one(), 0.0, 0.1, kite_domain())?;
    let quad = build_quadrature(src.support(), 40)?;
    let d = Direction::from_angle(PI / 4.0);
    let factor = build_discrete_factorization(&src, &quad, CATALOG_TIME_NODES, &d, grid)?;
    let extent = directional_extent(src.support(), &d)?;
    let centre = 0.5 * (extent.low + extent.high);
    let outside = extent.high + 1.5;
    let along = |s: f64| -> Vec<f64> { d.components().iter().map(|c| c * s).collect() };
    let inside_phi = far_test_vector(&along(centre), &d, grid, src.t_min(), src.t_max())?;
    let outside_phi = far_test_vector(&along(outside), &d, grid, src.t_min(), src.t_max())?;
    Ok((
        range_membership_residual(&factor.left, &inside_phi, regularizer)?,
        range_membership_residual(&factor.left, &outside_phi, regularizer)?,
    ))
}

/// Support estimate for the constant ball source `r = 0.5`, `t ∈ (0, 0.1)`.
pub fn ball_support_estimate(grid: &FrequencyGrid, options: SupportOptions) -> Result<SupportEstimate> {
    let src = SpaceTimeSource::new(
        SpatialFactor::Constant(1.0),
        TemporalFactor::Polynomial(vec![1.0]),
        0.0,
        0.1,
        SupportDomain::ball(vec![0.0; 3], 0.5)?,
    )?;
    let quad = build_quadrature_with(src.support(), 32, QuadratureScheme::Polar)?;
    let d = Direction::new(vec![1.0, 0.0, 0.0])?;
    let record = sample_uniform_band(&src, &quad, &d, 8.0 * grid.k_max(), grid.dk() / 4.0)?;
    support_interval_estimate(&record, options)
}

/// Runs every catalog check on the reference band.
pub fn run_catalog(cases: &[CatalogCase], grid: &FrequencyGrid, mismatch: bool) -> Result<ValidationReport> {
    if cases.is_empty() {
        return Err(Error::InvalidConfig("validation catalog is empty".into()));
    }
    let mut checks = Vec::new();
    for case in cases {
        let (residual, sharp) = factorization_residual(case, grid, mismatch)?;
        checks.push(Check::at_most(format!("{}.factorization_residual", case.name), residual, FACTORIZATION_TOLERANCE));
        if let Some(s) = sharp {
            checks.push(Check::at_most(format!("{}.sharp_residual", case.name), s, SHARP_TOLERANCE));
        }
    }
    let (inside, outside) = kite_range_contrast(grid, 1e-8)?;
    checks.push(Check::at_most("kite_const.range_residual_inside", inside, 1e-3));
    checks.push(Check::at_least("kite_const.range_residual_ratio", outside / inside, 10.0));
    let est = ball_support_estimate(grid, SupportOptions::default())?;
    checks.push(Check::at_most("ball_const.support_low_error", (est.interval.0 + 0.6).abs(), est.bin));
    checks.push(Check::at_most("ball_const.support_high_error", (est.interval.1 - 0.5).abs(), est.bin));
    checks.push(Check::at_least("ball_const.support_min_over_peak", est.min_over_peak, -0.01));
    Ok(ValidationReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indicator::TestVectorKind;

    fn reference_grid() -> FrequencyGrid {
        super::reference_grid().unwrap()
    }

    fn kite_source(spatial: SpatialFactor) -> SpaceTimeSource {
        SpaceTimeSource::new(spatial, t_plus_one(), 0.0, 0.1, kite_domain()).unwrap()
    }

    #[test]
    fn factorization_reproduces_assembled_operator() {
        let src = kite_source(SpatialFactor::Constant(3.0));
        let quad = build_quadrature(src.support(), 24).unwrap();
        let d = Direction::from_angle(0.4);
        for grid in [
            reference_grid(),
            FrequencyGrid::new(2.0, 6.0, 8).unwrap(),
            FrequencyGrid::with_collocation(0.0, 8.0, 10, Collocation::Staggered).unwrap(),
        ] {
            let rec = sample_far_band(&src, &quad, &d, &grid).unwrap();
            let f = assemble_far_operator(&rec, &grid).unwrap().entries;
            let factor = build_discrete_factorization(&src, &quad, 16, &d, &grid).unwrap();
            assert!(factor.residual(&f) < 1e-10, "{grid:?}");
        }
    }

    #[test]
    fn positive_source_gives_positive_middle_and_psd_rebuild() {
        let src = kite_source(SpatialFactor::Constant(3.0));
        let quad = build_quadrature(src.support(), 16).unwrap();
        let factor =
            build_discrete_factorization(&src, &quad, 8, &Direction::from_angle(1.0), &reference_grid()).unwrap();
        assert!(factor.middle.iter().all(|z| z.re > 0.0 && z.im == 0.0));
        let (eig, _) = hermitian_eigen(&factor.rebuilt).unwrap();
        assert!(*eig.last().unwrap() >= -1e-12 * eig[0]);
        assert!(factor.sharp_residual().unwrap().unwrap() < 1e-10);
    }

    #[test]
    fn zero_source_factorization_is_zero() {
        let src = kite_source(SpatialFactor::Constant(0.0));
        let quad = build_quadrature(src.support(), 10).unwrap();
        let factor =
            build_discrete_factorization(&src, &quad, 4, &Direction::from_angle(0.0), &reference_grid()).unwrap();
        assert_eq!(frobenius_norm(&factor.rebuilt), 0.0);
        assert!(factor.middle.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn mismatched_time_rule_rejected() {
        let src = kite_source(SpatialFactor::Constant(1.0));
        let quad = build_quadrature(src.support(), 10).unwrap();
        assert!(build_discrete_factorization(&src, &quad, 1, &Direction::from_angle(0.0), &reference_grid()).is_err());
        let d3 = Direction::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            build_discrete_factorization(&src, &quad, 8, &d3, &reference_grid()),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn exact_member_has_small_residual() {
        let left = CMatrix::from_fn(4, 9, |r, c| Complex64::from_polar(1.0, (r * c) as f64 * 0.3));
        let g = CVector::from_fn(9, |i, _| Complex64::new(i as f64 * 0.1, 1.0));
        let phi = TestVector {
            values: (&left * g).iter().copied().collect(),
            kind: TestVectorKind::Near { point: vec![0.0; 3], observation: vec![1.0; 3] },
        };
        assert!(range_membership_residual(&left, &phi, 1e-10).unwrap() < 1e-6);
        let zero = TestVector { values: vec![Complex64::new(0.0, 0.0); 4], kind: phi.kind.clone() };
        assert!(matches!(range_membership_residual(&left, &zero, 1e-10), Err(Error::Degenerate(_))));
    }

    #[test]
    fn taper_shape() {
        assert_eq!(taper(0.5, 0.1), 1.0);
        assert!((taper(0.95, 0.1) - 0.5).abs() < 1e-12);
        assert!(taper(1.0, 0.1).abs() < 1e-15);
    }

    #[test]
    fn report_formats() {
        let r = ValidationReport { checks: vec![Check::at_most("a", 1e-9, 1e-8), Check::at_least("b", 2.0, 10.0)] };
        assert!(!r.passed());
        assert_eq!(r.failures().len(), 1);
        assert!(r.to_text().contains("FAIL b"));
        assert!(r.to_csv().starts_with("check,value,bound,relation,passed\na,1e-9,1e-8,le,true\n"));
    }
}
