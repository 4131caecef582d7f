//! Discretized far- and near-field operators, the positive operator
//! `F# = |Re F| + |Im F|`, and its eigensystem.

use nalgebra::Schur;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{FarFieldRecord, NearFieldRecord};
use crate::geometry::Direction;
use crate::linalg::{hermitian_abs, hermitian_defect, hermitian_eigen, imag_part, real_part, spectral_norm, CMatrix};

/// Placement of the row and column nodes of the midpoint discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Collocation {
    /// Rows and columns share the nodes `τ_n = nΔk`; samples sit at `k_c + jΔk`.
    /// Real-valued sources give an exactly Hermitian Toeplitz matrix.
    #[default]
    Aligned,
    /// Rows at `τ_n = nΔk`, columns at `s_m = (m - 1/2)Δk`; samples sit at
    /// `k_c + (j + 1/2)Δk`. The diagonal is `w(k_c + Δk/2)Δk`.
    Staggered,
}

/// Wave-number band `(k_min, k_max)` discretized with `N` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    k_min: f64,
    k_max: f64,
    samples: usize,
    collocation: Collocation,
}

impl FrequencyGrid {
    pub fn new(k_min: f64, k_max: f64, samples: usize) -> Result<Self> {
        Self::with_collocation(k_min, k_max, samples, Collocation::Aligned)
    }

    pub fn with_collocation(k_min: f64, k_max: f64, samples: usize, collocation: Collocation) -> Result<Self> {
        if !(k_min >= 0.0) || !(k_max > k_min) || !k_max.is_finite() {
            return Err(Error::InvalidConfig(format!("band needs 0 <= k_min < k_max, got ({k_min}, {k_max})")));
        }
        if samples == 0 {
            return Err(Error::InvalidConfig("band needs at least one sample".into()));
        }
        Ok(Self { k_min, k_max, samples, collocation })
    }

    pub fn k_min(&self) -> f64 {
        self.k_min
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    /// Matrix size `N`.
    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn collocation(&self) -> Collocation {
        self.collocation
    }

    /// Whether the band starts at zero and is extended to `(-k_max, k_max)` by conjugation.
    pub fn is_symmetric(&self) -> bool {
        self.k_min == 0.0
    }

    /// Center wavenumber `k_c`.
    pub fn center(&self) -> f64 {
        if self.is_symmetric() {
            0.0
        } else {
            0.5 * (self.k_min + self.k_max)
        }
    }

    /// Half bandwidth `K`.
    pub fn half_width(&self) -> f64 {
        if self.is_symmetric() {
            self.k_max
        } else {
            0.5 * (self.k_max - self.k_min)
        }
    }

    pub fn dk(&self) -> f64 {
        self.half_width() / self.samples as f64
    }

    /// Row nodes `τ_n = nΔk`, `n = 1..N`.
    pub fn row_nodes(&self) -> Vec<f64> {
        let dk = self.dk();
        (1..=self.samples).map(|n| n as f64 * dk).collect()
    }

    pub fn column_nodes(&self) -> Vec<f64> {
        let dk = self.dk();
        match self.collocation {
            Collocation::Aligned => self.row_nodes(),
            Collocation::Staggered => (1..=self.samples).map(|m| (m as f64 - 0.5) * dk).collect(),
        }
    }

    /// Wavenumber sampled for the row/column offset `j = n - m`.
    pub fn offset_wavenumber(&self, j: i64) -> f64 {
        let offset = match self.collocation {
            Collocation::Aligned => j as f64,
            Collocation::Staggered => j as f64 + 0.5,
        };
        self.center() + offset * self.dk()
    }

    /// The `2N - 1` wavenumbers needed to assemble the operator, increasing.
    pub fn required_wavenumbers(&self) -> Vec<f64> {
        let n = self.samples as i64;
        (-(n - 1)..n).map(|j| self.offset_wavenumber(j)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    Far,
    Near,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Observation {
    Direction(Direction),
    Point(Vec<f64>),
}

/// Discretized operator `(w(k_c + τ_n - s_m) Δk)_{n,m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub entries: CMatrix,
    pub kind: OperatorKind,
    pub observation: Observation,
    pub dk: f64,
}

impl OperatorMatrix {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// Row-major `re,im` pairs, one matrix row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.entries.row_iter() {
            let line: Vec<String> = row.iter().map(|z| format!("{:?},{:?}", z.re, z.im)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn assemble_far_operator(record: &FarFieldRecord, grid: &FrequencyGrid) -> Result<OperatorMatrix> {
    let entries = assemble(grid, |k| record.value_at(k))?;
    Ok(OperatorMatrix {
        entries,
        kind: OperatorKind::Far,
        observation: Observation::Direction(record.direction.clone()),
        dk: grid.dk(),
    })
}

pub fn assemble_near_operator(record: &NearFieldRecord, grid: &FrequencyGrid) -> Result<OperatorMatrix> {
    let entries = assemble(grid, |k| record.value_at(k))?;
    Ok(OperatorMatrix {
        entries,
        kind: OperatorKind::Near,
        observation: Observation::Point(record.point.clone()),
        dk: grid.dk(),
    })
}

fn assemble(grid: &FrequencyGrid, lookup: impl Fn(f64) -> Option<Complex64>) -> Result<CMatrix> {
    let n = grid.samples();
    let mut diagonals = Vec::with_capacity(2 * n - 1);
    let mut missing = Vec::new();
    for j in -(n as i64 - 1)..n as i64 {
        let k = grid.offset_wavenumber(j);
        match lookup(k) {
            Some(v) => diagonals.push(v * grid.dk()),
            None => {
                missing.push(k);
                diagonals.push(Complex64::new(0.0, 0.0));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::IncompleteRecord { missing });
    }
    Ok(CMatrix::from_fn(n, n, |r, c| diagonals[r + n - 1 - c]))
}

/// `|Re F| + |Im F|` from two Hermitian eigendecompositions.
pub fn sharp_operator(f: &CMatrix) -> Result<CMatrix> {
    check_square(f)?;
    Ok(hermitian_abs(&real_part(f))? + hermitian_abs(&imag_part(f))?)
}

/// `F#` from a single Schur decomposition, assuming `F` is normal so that
/// its eigenvectors are shared by `Re F` and `Im F`.
pub fn sharp_operator_shortcut(f: &CMatrix) -> Result<CMatrix> {
    check_square(f)?;
    let scale = spectral_norm(f)?.max(f64::MIN_POSITIVE);
    let commutator = f * f.adjoint() - f.adjoint() * f;
    if commutator.norm() > 1e-10 * scale * scale * f.nrows() as f64 {
        return Err(Error::NumericFailure("eigenvalue shortcut requires a normal matrix".into()));
    }
    let schur = Schur::try_new(f.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::NumericFailure("Schur decomposition did not converge".into()))?;
    let (q, t) = schur.unpack();
    let d: Vec<f64> = (0..t.nrows()).map(|i| t[(i, i)].re.abs() + t[(i, i)].im.abs()).collect();
    let scaled = CMatrix::from_fn(q.nrows(), q.ncols(), |r, c| q[(r, c)] * d[c]);
    Ok(&scaled * q.adjoint())
}

fn check_square(f: &CMatrix) -> Result<()> {
    if f.nrows() != f.ncols() || f.nrows() == 0 {
        return Err(Error::InvalidArgument(format!(
            "expected a nonempty square matrix, got {}x{}",
            f.nrows(),
            f.ncols()
        )));
    }
    Ok(())
}

/// Eigenpairs of a Hermitian positive semidefinite matrix, eigenvalues descending.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Columns are the orthonormal eigenvectors.
    pub eigenvectors: CMatrix,
}

impl OperatorSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn reconstruct(&self) -> CMatrix {
        crate::linalg::spectral_map(&self.eigenvalues, &self.eigenvectors, |x| x)
    }
}

pub fn eigensystem(f_sharp: &CMatrix) -> Result<OperatorSpectrum> {
    check_square(f_sharp)?;
    let scale = f_sharp.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if hermitian_defect(f_sharp) > 1e-8 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NumericFailure("matrix is not Hermitian".into()));
    }
    let (mut eigenvalues, eigenvectors) = hermitian_eigen(f_sharp)?;
    let top = eigenvalues.first().copied().unwrap_or(0.0).abs();
    if let Some(&low) = eigenvalues.last() {
        if low < -1e-8 * top {
            return Err(Error::NumericFailure(format!("matrix is not positive semidefinite (λ_min = {low:e})")));
        }
    }
    for v in &mut eigenvalues {
        *v = v.max(0.0);
    }
    Ok(OperatorSpectrum { eigenvalues, eigenvectors })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NoiseKind {
    #[default]
    Real,
    Complex,
}

/// `F + δ‖F‖₂ M` with `M` uniform on `[-1, 1]` (per component), drawn from a seeded ChaCha stream.
pub fn add_noise(f: &OperatorMatrix, delta: f64, seed: u64, kind: NoiseKind) -> Result<OperatorMatrix> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("noise level must be nonnegative, got {delta}")));
    }
    if delta == 0.0 {
        return Ok(f.clone());
    }
    let m = noise_matrix(f.size(), seed, kind);
    let scale = delta * spectral_norm(&f.entries)?;
    Ok(OperatorMatrix { entries: &f.entries + m * Complex64::new(scale, 0.0), ..f.clone() })
}

/// The matrix `M` used by [`add_noise`]; filled row by row.
pub fn noise_matrix(n: usize, seed: u64, kind: NoiseKind) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        let re = rng.random_range(-1.0..=1.0);
        let im = match kind {
            NoiseKind::Real => 0.0,
            NoiseKind::Complex => rng.random_range(-1.0..=1.0),
        };
        values.push(Complex64::new(re, im));
    }
    CMatrix::from_row_slice(n, n, &values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_hermitian, is_toeplitz};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn reference_band_grid() {
        let g = FrequencyGrid::with_collocation(0.0, 16.0 * PI / 6.0, 16, Collocation::Staggered).unwrap();
        assert!((g.dk() - PI / 6.0).abs() < 1e-15);
        assert!((g.offset_wavenumber(0) - PI / 12.0).abs() < 1e-15);
        let ks = g.required_wavenumbers();
        assert_eq!(ks.len(), 31);
        assert_eq!(ks[0], -ks[29]);
        assert_eq!(g.center(), 0.0);
        assert_eq!(g.half_width(), 16.0 * PI / 6.0);
    }

    #[test]
    fn aligned_grid_is_symmetric_about_center() {
        let g = FrequencyGrid::new(2.0, 6.0, 8).unwrap();
        assert_eq!(g.center(), 4.0);
        assert_eq!(g.half_width(), 2.0);
        let ks = g.required_wavenumbers();
        assert_eq!(ks.len(), 15);
        assert_eq!(ks[7], 4.0);
        assert!(ks.iter().all(|k| *k > 2.0 && *k < 6.0));
    }

    #[test]
    fn invalid_band_rejected() {
        assert!(FrequencyGrid::new(3.0, 1.0, 4).is_err());
        assert!(FrequencyGrid::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn assembly_reports_missing_wavenumbers() {
        let g = FrequencyGrid::new(0.0, 1.0, 3).unwrap();
        let r = assemble(&g, |k| (k >= 0.0).then(|| c(1.0, 0.0)));
        match r {
            Err(Error::IncompleteRecord { missing }) => assert_eq!(missing.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn aligned_assembly_is_hermitian_toeplitz() {
        let g = FrequencyGrid::new(0.0, 2.0, 5).unwrap();
        let w = |k: f64| c((3.0 * k).cos() / (1.0 + k * k), (3.0 * k).sin() / (1.0 + k * k));
        let f = assemble(&g, |k| Some(w(k))).unwrap();
        assert!(is_toeplitz(&f));
        assert!(is_hermitian(&f));
    }

    #[test]
    fn staggered_assembly_matches_reference_layout() {
        let g = FrequencyGrid::with_collocation(0.0, 2.0, 4, Collocation::Staggered).unwrap();
        let w = |k: f64| if k >= 0.0 { c(k, 1.0 + k) } else { c(-k, -(1.0 - k)) };
        let f = assemble(&g, |k| Some(w(k))).unwrap();
        let k1 = 0.5 * g.dk();
        for i in 0..4 {
            assert_eq!(f[(i, i)], w(k1) * g.dk());
        }
        assert_eq!(f[(0, 1)], w(k1).conj() * g.dk());
        assert!(is_toeplitz(&f));
        assert!(!is_hermitian(&f));
    }

    #[test]
    fn sharp_of_positive_definite_is_identity_map() {
        let a = CMatrix::from_fn(4, 4, c_);
        let h = &a * a.adjoint() + CMatrix::identity(4, 4);
        let s = sharp_operator(&h).unwrap();
        assert!((s - &h).norm() < 1e-12 * h.norm());
    }

    fn c_(r: usize, col: usize) -> Complex64 {
        c((r * 3 + col) as f64 * 0.37 - 1.0, (r as f64 - col as f64) * 0.21)
    }

    #[test]
    fn sharp_of_i_times_identity() {
        let f = CMatrix::identity(2, 2) * c(0.0, 1.0);
        let s = sharp_operator(&f).unwrap();
        assert!((s - CMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn shortcut_agrees_on_normal_and_rejects_non_normal() {
        // unitary-diagonal-unitary* is normal
        let a = CMatrix::from_fn(6, 6, c_);
        let q = a.qr().q();
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            (0..6).map(|i| c(i as f64 - 2.5, 1.0 - 0.4 * i as f64)).collect(),
        ));
        let f = &q * d * q.adjoint();
        let exact = sharp_operator(&f).unwrap();
        let quick = sharp_operator_shortcut(&f).unwrap();
        assert!((exact - quick).norm() < 1e-8);
        let jordan = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(sharp_operator_shortcut(&jordan).is_err());
    }

    #[test]
    fn eigensystem_of_rank_one() {
        let v = nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 1.0)]);
        let m = &v * v.adjoint();
        let s = eigensystem(&m).unwrap();
        assert!((s.eigenvalues[0] - 7.0).abs() < 1e-12);
        assert!(s.eigenvalues[1..].iter().all(|l| l.abs() < 1e-12));
        assert!((s.reconstruct() - &m).norm() < 1e-12);
    }

    #[test]
    fn eigensystem_rejects_indefinite() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        assert!(eigensystem(&m).is_err());
    }

    #[test]
    fn zero_noise_is_identity_and_noise_is_reproducible() {
        let f = OperatorMatrix {
            entries: CMatrix::from_fn(5, 5, c_),
            kind: OperatorKind::Far,
            observation: Observation::Point(vec![0.0; 3]),
            dk: 0.1,
        };
        assert_eq!(add_noise(&f, 0.0, 1, NoiseKind::Real).unwrap(), f);
        let a = add_noise(&f, 0.05, 9, NoiseKind::Real).unwrap();
        let b = add_noise(&f, 0.05, 9, NoiseKind::Real).unwrap();
        assert_eq!(a, b);
        let diff = &a.entries - &f.entries;
        assert!(diff.iter().all(|z| z.im == 0.0));
        let bound = 0.05 * spectral_norm(&f.entries).unwrap() * 5.0;
        assert!(spectral_norm(&diff).unwrap() <= bound);
        assert!(add_noise(&f, -0.1, 1, NoiseKind::Real).is_err());
    }
}
