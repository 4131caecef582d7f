//! Test vectors and Picard-series indicators over sampling lattices.
//!
//! A far-field test vector depends on the sampling point only through `x̂·y`
//! and a near-field one only through `|x - y|`; the scans evaluate them from
//! that scalar so the indicator is constant along lines and spheres.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{FarFieldRecord, NearFieldRecord};
use crate::geometry::{distance, gauss_legendre, Direction};
use crate::linalg::CMatrix;
use crate::spectral::{
    add_noise, assemble_far_operator, assemble_near_operator, eigensystem, sharp_operator, FrequencyGrid, NoiseKind,
    OperatorMatrix, OperatorSpectrum,
};

/// Modes with `λ_n` below this fraction of `λ_1` are always dropped.
pub const EIGENVALUE_FLOOR: f64 = 1e-14;

/// Lattice points closer than this to a sensor are excluded from near-field scans.
pub const SENSOR_EXCLUSION_RADIUS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TestVectorKind {
    Far { point: Vec<f64>, direction: Direction },
    FarSmoothed { point: Vec<f64>, direction: Direction, radius: f64 },
    Near { point: Vec<f64>, observation: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestVector {
    pub values: Vec<Complex64>,
    pub kind: TestVectorKind,
}

fn check_window(t_min: f64, t_max: f64) -> Result<()> {
    if !(t_max > t_min) || !t_min.is_finite() || !t_max.is_finite() {
        return Err(Error::InvalidArgument(format!("time window needs t_min < t_max, got ({t_min}, {t_max})")));
    }
    Ok(())
}

/// `(e^{iτ t_max} - e^{iτ t_min}) / (iτT)`, written as a phase times a sinc so `τ = 0` gives 1.
pub fn time_factor(tau: f64, t_min: f64, t_max: f64) -> Complex64 {
    let half = 0.5 * tau * (t_max - t_min);
    let sinc = if half.abs() < 1e-8 { 1.0 - half * half / 6.0 } else { half.sin() / half };
    Complex64::from_polar(sinc, 0.5 * tau * (t_max + t_min))
}

fn time_factors(grid: &FrequencyGrid, t_min: f64, t_max: f64) -> (Vec<f64>, Vec<Complex64>) {
    let taus = grid.row_nodes();
    let g = taus.iter().map(|&tau| time_factor(tau, t_min, t_max)).collect();
    (taus, g)
}

fn far_entries(taus: &[f64], g: &[Complex64], projection: f64) -> Vec<Complex64> {
    taus.iter().zip(g).map(|(tau, gn)| gn * Complex64::from_polar(1.0, -tau * projection)).collect()
}

fn near_entries(taus: &[f64], g: &[Complex64], dist: f64) -> Vec<Complex64> {
    let scale = 1.0 / (4.0 * PI * dist);
    taus.iter().zip(g).map(|(tau, gn)| gn * Complex64::from_polar(scale, tau * dist)).collect()
}

pub fn far_test_vector(
    point: &[f64],
    direction: &Direction,
    grid: &FrequencyGrid,
    t_min: f64,
    t_max: f64,
) -> Result<TestVector> {
    check_window(t_min, t_max)?;
    if point.len() != direction.dim() {
        return Err(Error::InvalidArgument("point and direction differ in dimension".into()));
    }
    let (taus, g) = time_factors(grid, t_min, t_max);
    Ok(TestVector {
        values: far_entries(&taus, &g, direction.dot(point)),
        kind: TestVectorKind::Far { point: point.to_vec(), direction: direction.clone() },
    })
}

/// Far test vector averaged over the ball `B_ε(y)`.
pub fn smoothed_far_test_vector(
    point: &[f64],
    direction: &Direction,
    grid: &FrequencyGrid,
    t_min: f64,
    t_max: f64,
    radius: f64,
) -> Result<TestVector> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("smoothing radius must be positive, got {radius}")));
    }
    let base = far_test_vector(point, direction, grid, t_min, t_max)?;
    let taus = grid.row_nodes();
    let values =
        base.values.iter().zip(&taus).map(|(v, tau)| v * ball_average_factor(tau * radius, point.len())).collect();
    Ok(TestVector {
        values,
        kind: TestVectorKind::FarSmoothed { point: point.to_vec(), direction: direction.clone(), radius },
    })
}

/// Mean of `e^{-iτ x̂·z}` over a ball of radius `ε` about the origin, with `u = τε`.
pub fn ball_average_factor(u: f64, dim: usize) -> f64 {
    if u.abs() < 1e-4 {
        return if dim == 3 { 1.0 - u * u / 10.0 } else { 1.0 - u * u / 8.0 };
    }
    if dim == 3 {
        3.0 * (u.sin() - u * u.cos()) / u.powi(3)
    } else {
        2.0 * bessel_j1(u) / u
    }
}

/// `J_1(u) = π^{-1} ∫_0^π cos(θ - u sin θ) dθ`.
fn bessel_j1(u: f64) -> f64 {
    let nodes = 48 + (2.0 * u.abs()) as usize;
    gauss_legendre(nodes, 0.0, PI).into_iter().map(|(t, w)| w * (t - u * t.sin()).cos()).sum::<f64>() / PI
}

pub fn near_test_vector(
    point: &[f64],
    observation: &[f64],
    grid: &FrequencyGrid,
    t_min: f64,
    t_max: f64,
) -> Result<TestVector> {
    check_window(t_min, t_max)?;
    if point.len() != 3 || observation.len() != 3 {
        return Err(Error::InvalidArgument("near-field test vectors are three-dimensional".into()));
    }
    let d = distance(point, observation);
    if d < 1e-9 {
        return Err(Error::SingularTestPoint { distance: d });
    }
    let (taus, g) = time_factors(grid, t_min, t_max);
    Ok(TestVector {
        values: near_entries(&taus, &g, d),
        kind: TestVectorKind::Near { point: point.to_vec(), observation: observation.to_vec() },
    })
}

/// Which eigenmodes enter the Picard sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Truncation {
    All,
    /// The leading `n` modes.
    Count(usize),
    /// Modes with `λ_n > δ λ_1`.
    NoiseMatched(f64),
}

impl Truncation {
    /// `All` for noiseless data, `NoiseMatched(δ)` otherwise.
    pub fn for_noise(delta: f64) -> Self {
        if delta > 0.0 {
            Truncation::NoiseMatched(delta)
        } else {
            Truncation::All
        }
    }

    /// Number of leading modes kept for a descending spectrum.
    pub fn kept(&self, eigenvalues: &[f64]) -> Result<usize> {
        let n = eigenvalues.len();
        let limit = match *self {
            Truncation::All => n,
            Truncation::Count(c) => {
                if c == 0 || c > n {
                    return Err(Error::InvalidArgument(format!("truncation {c} outside 1..={n}")));
                }
                c
            }
            Truncation::NoiseMatched(_) => n,
        };
        let top = eigenvalues.first().copied().unwrap_or(0.0);
        let cutoff = match *self {
            Truncation::NoiseMatched(delta) => (delta * top).max(EIGENVALUE_FLOOR * top),
            _ => EIGENVALUE_FLOOR * top,
        };
        Ok(eigenvalues[..limit].iter().take_while(|l| **l > cutoff && **l > 0.0).count())
    }
}

/// Picard indicator value; `Degenerate` marks an empty series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Picard {
    Finite(f64),
    Degenerate,
}

impl Picard {
    fn from_sum(sum: f64) -> Self {
        if sum > 0.0 {
            Picard::Finite(1.0 / sum)
        } else {
            Picard::Degenerate
        }
    }

    /// Field value: `W`, or 0 for a degenerate series.
    pub fn value(&self) -> f64 {
        match self {
            Picard::Finite(w) => *w,
            Picard::Degenerate => 0.0,
        }
    }
}

/// `Σ_{n < kept} |⟨φ, ψ_n⟩|² / λ_n`.
fn picard_sum(spectrum: &OperatorSpectrum, kept: usize, phi: &[Complex64]) -> f64 {
    (0..kept)
        .map(|n| {
            let psi = spectrum.eigenvectors.column(n);
            let c: Complex64 = phi.iter().zip(psi.iter()).map(|(a, b)| a * b.conj()).sum();
            c.norm_sqr() / spectrum.eigenvalues[n]
        })
        .sum()
}

/// `W = [Σ_{n ≤ truncation} |⟨φ, ψ_n⟩|²/λ_n]^{-1}`.
pub fn picard_value(spectrum: &OperatorSpectrum, phi: &TestVector, truncation: Truncation) -> Result<Picard> {
    if phi.values.len() != spectrum.len() {
        return Err(Error::InvalidArgument("test vector length differs from operator size".into()));
    }
    let kept = truncation.kept(&spectrum.eigenvalues)?;
    Ok(Picard::from_sum(picard_sum(spectrum, kept, &phi.values)))
}

/// Axis-aligned lattice with inclusive endpoints; the first axis varies slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    lower: Vec<f64>,
    upper: Vec<f64>,
    counts: Vec<usize>,
}

impl Lattice {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if lower.len() != upper.len() || lower.len() != counts.len() || !(2..=3).contains(&lower.len()) {
            return Err(Error::InvalidArgument("lattice bounds and counts must agree in dimension 2 or 3".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(u > l) || !l.is_finite() || !u.is_finite()) {
            return Err(Error::InvalidArgument("lattice bounds must satisfy lower < upper".into()));
        }
        if counts.iter().any(|c| *c < 2) {
            return Err(Error::InvalidArgument("lattice needs at least 2 points per axis".into()));
        }
        Ok(Self { lower, upper, counts })
    }

    /// Cube `[lo, hi]^dim` with `count` points per axis.
    pub fn uniform(dim: usize, lo: f64, hi: f64, count: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim], vec![count; dim])
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn axis_coordinate(&self, axis: usize, i: usize) -> f64 {
        let h = (self.upper[axis] - self.lower[axis]) / (self.counts[axis] - 1) as f64;
        if i + 1 == self.counts[axis] {
            self.upper[axis]
        } else {
            self.lower[axis] + i as f64 * h
        }
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut rest = flat;
        let mut idx = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            idx[axis] = rest % self.counts[axis];
            rest /= self.counts[axis];
        }
        idx
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat).iter().enumerate().map(|(a, &i)| self.axis_coordinate(a, i)).collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanKind {
    Strip,
    Hull,
    Annulus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub kind: ScanKind,
    pub directions: Vec<Vec<f64>>,
    pub points: Vec<Vec<f64>>,
    pub truncation: Truncation,
    /// Modes kept per observation.
    pub kept_modes: Vec<usize>,
    pub noise: f64,
    pub t_min: f64,
    pub t_max: f64,
    /// Lattice points whose Picard series was empty (stored as 0).
    pub degenerate: usize,
    /// Lattice points skipped because they sit on a sensor (stored as 0).
    pub excluded: usize,
}

/// Indicator values on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorField {
    pub lattice: Lattice,
    pub values: Vec<f64>,
    pub meta: FieldMeta,
}

impl IndicatorField {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Copy scaled so the maximum is 1.
    pub fn normalized(&self) -> Vec<f64> {
        let m = self.max();
        if m > 0.0 {
            self.values.iter().map(|v| v / m).collect()
        } else {
            self.values.clone()
        }
    }

    /// Header `y1,y2[,y3],W` then one row per lattice point.
    pub fn to_csv(&self) -> String {
        let dim = self.lattice.dim();
        let mut out = (1..=dim).map(|a| format!("y{a}")).collect::<Vec<_>>().join(",");
        out.push_str(",W\n");
        for (i, w) in self.values.iter().enumerate() {
            for c in self.lattice.point(i) {
                let _ = write!(out, "{c:?},");
            }
            let _ = writeln!(out, "{w:?}");
        }
        out
    }

    /// 2D slice through the lattice plane nearest to `coordinate` on `axis`
    /// (the whole field for 2D lattices). Returns `(values, width, height)`
    /// with rows ordered from high to low along the second remaining axis.
    pub fn slice(&self, axis: usize, coordinate: f64) -> Result<(Vec<f64>, usize, usize)> {
        let lat = &self.lattice;
        let (keep, fixed) = match lat.dim() {
            2 => ([0, 1], None),
            3 => {
                if axis > 2 {
                    return Err(Error::InvalidArgument(format!("slice axis {axis} out of range")));
                }
                let rest: Vec<usize> = (0..3).filter(|a| *a != axis).collect();
                let nearest = (0..lat.counts[axis])
                    .min_by(|a, b| {
                        let da = (lat.axis_coordinate(axis, *a) - coordinate).abs();
                        let db = (lat.axis_coordinate(axis, *b) - coordinate).abs();
                        da.total_cmp(&db)
                    })
                    .unwrap_or(0);
                ([rest[0], rest[1]], Some((axis, nearest)))
            }
            _ => unreachable!("lattices are 2D or 3D"),
        };
        let (width, height) = (lat.counts[keep[0]], lat.counts[keep[1]]);
        let mut out = Vec::with_capacity(width * height);
        for row in (0..height).rev() {
            for col in 0..width {
                let mut idx = vec![0; lat.dim()];
                idx[keep[0]] = col;
                idx[keep[1]] = row;
                if let Some((a, i)) = fixed {
                    idx[a] = i;
                }
                let flat = idx.iter().zip(&lat.counts).fold(0, |acc, (i, c)| acc * c + i);
                out.push(self.values[flat]);
            }
        }
        Ok((out, width, height))
    }

    /// Binary 16-bit big-endian P5 image of a slice, scaled to the slice maximum.
    pub fn slice_pgm(&self, axis: usize, coordinate: f64) -> Result<Vec<u8>> {
        let (values, width, height) = self.slice(axis, coordinate)?;
        Ok(encode_pgm(&values, width, height))
    }
}

pub fn encode_pgm(values: &[f64], width: usize, height: usize) -> Vec<u8> {
    let peak = values.iter().copied().fold(0.0, f64::max);
    let mut out = format!("P5\n{width} {height}\n65535\n").into_bytes();
    for v in values {
        let level = if peak > 0.0 { (65535.0 * v / peak).round().clamp(0.0, 65535.0) as u16 } else { 0 };
        out.extend_from_slice(&level.to_be_bytes());
    }
    out
}

/// Noise and truncation applied before the Picard sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// `None` picks [`Truncation::for_noise`].
    pub truncation: Option<Truncation>,
    pub noise: f64,
    pub seed: u64,
    pub noise_kind: NoiseKind,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { truncation: None, noise: 0.0, seed: 0, noise_kind: NoiseKind::Real }
    }
}

impl ScanOptions {
    pub fn truncation(&self) -> Truncation {
        self.truncation.unwrap_or_else(|| Truncation::for_noise(self.noise))
    }
}

/// Noise (seeded by `seed + index`), `F#`, and the eigensystem of one operator.
pub fn operator_spectrum(op: &OperatorMatrix, options: &ScanOptions, index: u64) -> Result<OperatorSpectrum> {
    let noisy = add_noise(op, options.noise, options.seed.wrapping_add(index), options.noise_kind)?;
    eigensystem(&sharp_operator(&noisy.entries)?)
}

/// One observation prepared for scanning: its spectrum, kept modes and test-vector data.
struct Prepared {
    spectrum: OperatorSpectrum,
    kept: usize,
    /// Eigenvectors of the kept modes scaled by `λ_n^{-1/2}`, conjugated.
    weighted: CMatrix,
}

impl Prepared {
    fn new(spectrum: OperatorSpectrum, truncation: Truncation) -> Result<Self> {
        let kept = truncation.kept(&spectrum.eigenvalues)?;
        let n = spectrum.len();
        let weighted =
            CMatrix::from_fn(n, kept, |r, c| spectrum.eigenvectors[(r, c)].conj() / spectrum.eigenvalues[c].sqrt());
        Ok(Self { spectrum, kept, weighted })
    }

    fn sum(&self, phi: &[Complex64]) -> f64 {
        (0..self.kept)
            .map(|c| {
                let col = self.weighted.column(c);
                phi.iter().zip(col.iter()).map(|(a, b)| a * b).sum::<Complex64>().norm_sqr()
            })
            .sum()
    }
}

fn meta(kind: ScanKind, options: &ScanOptions, t_min: f64, t_max: f64) -> FieldMeta {
    FieldMeta {
        kind,
        directions: Vec::new(),
        points: Vec::new(),
        truncation: options.truncation(),
        kept_modes: Vec::new(),
        noise: options.noise,
        t_min,
        t_max,
        degenerate: 0,
        excluded: 0,
    }
}

/// Single-direction far-field indicator `W^{(x̂)}`.
pub fn scan_strip(
    record: &FarFieldRecord,
    grid: &FrequencyGrid,
    lattice: &Lattice,
    t_min: f64,
    t_max: f64,
    options: &ScanOptions,
) -> Result<IndicatorField> {
    scan_hull(std::slice::from_ref(record), grid, lattice, t_min, t_max, options).map(|mut f| {
        f.meta.kind = ScanKind::Strip;
        f
    })
}

/// Multi-direction indicator `W = [Σ_j (W^{(x̂_j)})^{-1}]^{-1}`.
pub fn scan_hull(
    records: &[FarFieldRecord],
    grid: &FrequencyGrid,
    lattice: &Lattice,
    t_min: f64,
    t_max: f64,
    options: &ScanOptions,
) -> Result<IndicatorField> {
    check_window(t_min, t_max)?;
    if records.is_empty() {
        return Err(Error::InvalidArgument("hull scan needs at least one direction".into()));
    }
    if records.iter().any(|r| r.direction.dim() != lattice.dim()) {
        return Err(Error::InvalidArgument("direction and lattice differ in dimension".into()));
    }
    let prepared = records
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let op = assemble_far_operator(r, grid)?;
            Prepared::new(operator_spectrum(&op, options, j as u64)?, options.truncation())
        })
        .collect::<Result<Vec<_>>>()?;
    let (taus, g) = time_factors(grid, t_min, t_max);
    let sums: Vec<f64> = (0..lattice.len())
        .into_par_iter()
        .map(|i| {
            let y = lattice.point(i);
            records.iter().zip(&prepared).map(|(r, p)| p.sum(&far_entries(&taus, &g, r.direction.dot(&y)))).sum()
        })
        .collect();
    let mut m = meta(ScanKind::Hull, options, t_min, t_max);
    m.directions = records.iter().map(|r| r.direction.components().to_vec()).collect();
    m.kept_modes = prepared.iter().map(|p| p.kept).collect();
    let values = finish(&sums, &mut m);
    log::debug!("hull scan: {} points, top eigenvalue {:e}", values.len(), prepared[0].spectrum.eigenvalues[0]);
    Ok(IndicatorField { lattice: lattice.clone(), values, meta: m })
}

fn finish(sums: &[f64], meta: &mut FieldMeta) -> Vec<f64> {
    sums.iter()
        .map(|s| {
            let p = Picard::from_sum(*s);
            if p == Picard::Degenerate {
                meta.degenerate += 1;
            }
            p.value()
        })
        .collect()
}

/// Single-sensor near-field indicator `W̃^{(x)}`.
pub fn scan_annulus(
    record: &NearFieldRecord,
    grid: &FrequencyGrid,
    lattice: &Lattice,
    t_min: f64,
    t_max: f64,
    options: &ScanOptions,
) -> Result<IndicatorField> {
    scan_annuli(std::slice::from_ref(record), grid, lattice, t_min, t_max, options)
}

/// Several sensors combined like [`scan_hull`].
pub fn scan_annuli(
    records: &[NearFieldRecord],
    grid: &FrequencyGrid,
    lattice: &Lattice,
    t_min: f64,
    t_max: f64,
    options: &ScanOptions,
) -> Result<IndicatorField> {
    check_window(t_min, t_max)?;
    if records.is_empty() {
        return Err(Error::InvalidArgument("annulus scan needs at least one sensor".into()));
    }
    if lattice.dim() != 3 || records.iter().any(|r| r.point.len() != 3) {
        return Err(Error::InvalidArgument("near-field scans are three-dimensional".into()));
    }
    let prepared = records
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let op = assemble_near_operator(r, grid)?;
            Prepared::new(operator_spectrum(&op, options, j as u64)?, options.truncation())
        })
        .collect::<Result<Vec<_>>>()?;
    let (taus, g) = time_factors(grid, t_min, t_max);
    let sums: Vec<Option<f64>> = (0..lattice.len())
        .into_par_iter()
        .map(|i| {
            let y = lattice.point(i);
            let mut total = 0.0;
            for (r, p) in records.iter().zip(&prepared) {
                let d = distance(&y, &r.point);
                if d < SENSOR_EXCLUSION_RADIUS {
                    return None;
                }
                total += p.sum(&near_entries(&taus, &g, d));
            }
            Some(total)
        })
        .collect();
    let mut m = meta(ScanKind::Annulus, options, t_min, t_max);
    m.points = records.iter().map(|r| r.point.clone()).collect();
    m.kept_modes = prepared.iter().map(|p| p.kept).collect();
    m.excluded = sums.iter().filter(|s| s.is_none()).count();
    let values = sums
        .iter()
        .map(|s| match s {
            None => 0.0,
            Some(sum) => {
                let p = Picard::from_sum(*sum);
                if p == Picard::Degenerate {
                    m.degenerate += 1;
                }
                p.value()
            }
        })
        .collect();
    Ok(IndicatorField { lattice: lattice.clone(), values, meta: m })
}
