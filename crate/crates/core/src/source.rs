//! Separable space-time sources `S(x, t) = a(x) b(t)` and their transform to
//! the wave-number domain, `f(x, k) = (2π)^{-1/2} ∫ S(x, t) e^{ikt} dt`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_quadrature, gauss_legendre, SupportDomain};

/// Time samples per spatial node in the positivity scan.
pub const POSITIVITY_TIME_SAMPLES: usize = 64;

/// Default Gauss–Legendre order for tabulated temporal factors.
pub const DEFAULT_TIME_NODES: usize = 64;

pub(crate) fn inv_sqrt_2pi() -> f64 {
    1.0 / (2.0 * PI).sqrt()
}

/// Spatial factor `a(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SpatialFactor {
    Constant(f64),
    /// `offset + gradient·x`
    Affine {
        offset: f64,
        gradient: Vec<f64>,
    },
    /// `offset + curvature·|x|²`
    QuadraticRadial {
        offset: f64,
        curvature: f64,
    },
}

impl SpatialFactor {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            SpatialFactor::Constant(c) => *c,
            SpatialFactor::Affine { offset, gradient } => {
                offset + gradient.iter().zip(x).map(|(g, xi)| g * xi).sum::<f64>()
            }
            SpatialFactor::QuadraticRadial { offset, curvature } => {
                offset + curvature * x.iter().map(|xi| xi * xi).sum::<f64>()
            }
        }
    }
}

/// Temporal factor `b(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TemporalFactor {
    /// Coefficients in increasing powers of `t`.
    Polynomial(Vec<f64>),
    /// Piecewise-linear interpolation of `(time, value)` samples, transformed by
    /// Gauss–Legendre quadrature with `nodes` points.
    Tabulated { times: Vec<f64>, values: Vec<f64>, nodes: usize },
}

impl TemporalFactor {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TemporalFactor::Polynomial(c) => c.iter().rev().fold(0.0, |acc, ci| acc * t + ci),
            TemporalFactor::Tabulated { times, values, .. } => {
                let i = times.partition_point(|ti| *ti <= t);
                if i == 0 {
                    values[0]
                } else if i == times.len() {
                    values[times.len() - 1]
                } else {
                    let s = (t - times[i - 1]) / (times[i] - times[i - 1]);
                    values[i - 1] + s * (values[i] - values[i - 1])
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            TemporalFactor::Polynomial(c) => {
                if c.is_empty() || c.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidConfig("temporal polynomial needs finite coefficients".into()));
                }
            }
            TemporalFactor::Tabulated { times, values, nodes } => {
                if *nodes < 2 {
                    return Err(Error::InvalidConfig(format!(
                        "tabulated temporal factor needs at least 2 quadrature nodes, got {nodes}"
                    )));
                }
                if times.len() < 2 || times.len() != values.len() {
                    return Err(Error::InvalidConfig("tabulated temporal factor needs matching samples".into()));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidConfig("tabulated sample times must increase".into()));
                }
            }
        }
        Ok(())
    }
}

/// Extremes of `S` over the positivity scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub min_value: f64,
    pub max_value: f64,
}

impl PositivityReport {
    pub fn is_positive(&self) -> bool {
        self.min_value > 0.0
    }

    pub fn max_abs(&self) -> f64 {
        self.min_value.abs().max(self.max_value.abs())
    }
}

/// Real source `S(x, t) = a(x) b(t)` on `D × [t_min, t_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeSource {
    spatial: SpatialFactor,
    temporal: TemporalFactor,
    t_min: f64,
    t_max: f64,
    support: SupportDomain,
    positivity: PositivityReport,
}

impl SpaceTimeSource {
    /// Builds the source; a failed positivity scan is logged, not rejected.
    pub fn new(
        spatial: SpatialFactor,
        temporal: TemporalFactor,
        t_min: f64,
        t_max: f64,
        support: SupportDomain,
    ) -> Result<Self> {
        let source = Self::unchecked(spatial, temporal, t_min, t_max, support)?;
        if !source.positivity.is_positive() {
            log::warn!("source is not positive on its support (min S = {:.6e})", source.positivity.min_value);
        }
        Ok(source)
    }

    /// Like [`SpaceTimeSource::new`] but rejects sources that are not strictly positive.
    pub fn new_strict(
        spatial: SpatialFactor,
        temporal: TemporalFactor,
        t_min: f64,
        t_max: f64,
        support: SupportDomain,
    ) -> Result<Self> {
        let source = Self::unchecked(spatial, temporal, t_min, t_max, support)?;
        if !source.positivity.is_positive() {
            return Err(Error::PositivityViolation { min_value: source.positivity.min_value });
        }
        Ok(source)
    }

    fn unchecked(
        spatial: SpatialFactor,
        temporal: TemporalFactor,
        t_min: f64,
        t_max: f64,
        support: SupportDomain,
    ) -> Result<Self> {
        if !(t_min >= 0.0) || !(t_max > t_min) || !t_max.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "radiating period needs 0 <= t_min < t_max, got ({t_min}, {t_max})"
            )));
        }
        if let SpatialFactor::Affine { gradient, .. } = &spatial {
            if gradient.len() != support.dim() {
                return Err(Error::InvalidConfig("affine gradient dimension differs from domain".into()));
            }
        }
        temporal.validate()?;
        let positivity = scan_positivity(&spatial, &temporal, t_min, t_max, &support)?;
        Ok(Self { spatial, temporal, t_min, t_max, support, positivity })
    }

    pub fn spatial(&self) -> &SpatialFactor {
        &self.spatial
    }

    pub fn temporal(&self) -> &TemporalFactor {
        &self.temporal
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn duration(&self) -> f64 {
        self.t_max - self.t_min
    }

    pub fn support(&self) -> &SupportDomain {
        &self.support
    }

    pub fn dim(&self) -> usize {
        self.support.dim()
    }

    pub fn positivity(&self) -> PositivityReport {
        self.positivity
    }

    /// `S(x, t)`, zero outside `D × [t_min, t_max]`.
    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        if t < self.t_min || t > self.t_max || x.len() != self.dim() || !self.support.contains_unchecked(x) {
            return 0.0;
        }
        self.spatial.eval(x) * self.temporal.eval(t)
    }

    /// `S(x, t)` for a point already known to lie in `D`.
    pub(crate) fn eval_inside(&self, x: &[f64], t: f64) -> f64 {
        if t < self.t_min || t > self.t_max {
            return 0.0;
        }
        self.spatial.eval(x) * self.temporal.eval(t)
    }

    pub fn spatial_value(&self, x: &[f64]) -> f64 {
        self.spatial.eval(x)
    }

    /// `(2π)^{-1/2} ∫ b(t) e^{ikt} dt` over the radiating period.
    pub fn temporal_transform(&self, k: f64) -> Complex64 {
        let integral = match &self.temporal {
            TemporalFactor::Polynomial(c) => polynomial_transform(c, self.t_min, self.t_max, k),
            TemporalFactor::Tabulated { nodes, .. } => {
                transform_by_quadrature(|t| self.temporal.eval(t), self.t_min, self.t_max, k, *nodes)
            }
        };
        integral * inv_sqrt_2pi()
    }

    /// Same transform evaluated by Gauss–Legendre quadrature regardless of factor kind.
    pub fn temporal_transform_quadrature(&self, k: f64, nodes: usize) -> Complex64 {
        transform_by_quadrature(|t| self.temporal.eval(t), self.t_min, self.t_max, k, nodes) * inv_sqrt_2pi()
    }

    /// `f(x, k)`; zero outside `D`.
    pub fn frequency_source(&self, x: &[f64], k: f64) -> Result<Complex64> {
        if x.len() != self.dim() {
            return Err(Error::InvalidArgument("point dimension differs from source dimension".into()));
        }
        if !self.support.contains_unchecked(x) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(self.temporal_transform(k) * self.spatial.eval(x))
    }
}

fn scan_positivity(
    spatial: &SpatialFactor,
    temporal: &TemporalFactor,
    t_min: f64,
    t_max: f64,
    support: &SupportDomain,
) -> Result<PositivityReport> {
    let rule = build_quadrature(support, if support.dim() == 2 { 64 } else { 24 })?;
    let b: Vec<f64> = (0..POSITIVITY_TIME_SAMPLES)
        .map(|j| {
            let t = t_min + (t_max - t_min) * j as f64 / (POSITIVITY_TIME_SAMPLES - 1) as f64;
            temporal.eval(t)
        })
        .collect();
    let mut report = PositivityReport { min_value: f64::INFINITY, max_value: f64::NEG_INFINITY };
    for x in rule.nodes() {
        let a = spatial.eval(x);
        for bj in &b {
            let s = a * bj;
            report.min_value = report.min_value.min(s);
            report.max_value = report.max_value.max(s);
        }
    }
    Ok(report)
}

fn transform_by_quadrature(b: impl Fn(f64) -> f64, t_min: f64, t_max: f64, k: f64, nodes: usize) -> Complex64 {
    gauss_legendre(nodes, t_min, t_max).into_iter().map(|(t, w)| Complex64::from_polar(w * b(t), k * t)).sum()
}

/// `∫_{t_min}^{t_max} p(t) e^{ikt} dt` in closed form.
///
/// The polynomial is re-expanded about `t_min` so the moments
/// `J_m = ∫_0^T s^m e^{iks} ds` stay well conditioned.
pub fn polynomial_transform(coefficients: &[f64], t_min: f64, t_max: f64, k: f64) -> Complex64 {
    let shifted = shift_polynomial(coefficients, t_min);
    let moments = oscillatory_moments(shifted.len(), t_max - t_min, k);
    let sum: Complex64 = shifted.iter().zip(&moments).map(|(q, j)| j * *q).sum();
    sum * Complex64::from_polar(1.0, k * t_min)
}

/// Coefficients of `p(t0 + s)` in powers of `s`.
fn shift_polynomial(c: &[f64], t0: f64) -> Vec<f64> {
    let mut out = c.to_vec();
    // repeated synthetic division (Taylor shift)
    let n = out.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            out[j] += t0 * out[j + 1];
        }
    }
    out
}

/// `J_m = ∫_0^T s^m e^{iks} ds` for `m < count`.
fn oscillatory_moments(count: usize, t: f64, k: f64) -> Vec<Complex64> {
    let ik = Complex64::new(0.0, k);
    if (k * t).abs() <= 2.0 {
        // power series in ikT, converges fast for |kT| <= 2
        (0..count)
            .map(|m| {
                let mut term = Complex64::new(t.powi(m as i32 + 1), 0.0);
                let mut sum = term / (m as f64 + 1.0);
                for j in 1..60 {
                    term *= ik * t / j as f64;
                    let add = term / (m + j + 1) as f64;
                    sum += add;
                    if add.norm() <= 1e-18 * sum.norm() {
                        break;
                    }
                }
                sum
            })
            .collect()
    } else {
        let e = Complex64::from_polar(1.0, k * t);
        let mut out = Vec::with_capacity(count);
        let mut prev = (e - 1.0) / ik;
        out.push(prev);
        for m in 1..count {
            prev = (e * t.powi(m as i32) - prev * m as f64) / ik;
            out.push(prev);
        }
        out.truncate(count);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kite() -> SupportDomain {
        SupportDomain::kite([0.0, 0.0], 1.0).unwrap()
    }

    fn source(spatial: SpatialFactor, coeffs: Vec<f64>, t_min: f64, t_max: f64) -> SpaceTimeSource {
        SpaceTimeSource::new(spatial, TemporalFactor::Polynomial(coeffs), t_min, t_max, kite()).unwrap()
    }

    #[test]
    fn eval_inside_and_outside() {
        let s = source(SpatialFactor::Constant(3.0), vec![1.0, 1.0], 0.0, 0.1);
        assert_eq!(s.eval(&[0.0, 0.0], 0.0), 3.0);
        assert_eq!(s.eval(&[5.0, 0.0], 0.0), 0.0);
        assert_eq!(s.eval(&[0.0, 0.0], 0.2), 0.0);
    }

    #[test]
    fn strict_constructor_rejects_sign_changing_source() {
        let spatial = SpatialFactor::QuadraticRadial { offset: -12.0, curvature: 3.0 };
        let temporal = TemporalFactor::Polynomial(vec![1.0, 1.0]);
        let strict = SpaceTimeSource::new_strict(spatial.clone(), temporal.clone(), 0.0, 0.1, kite());
        assert!(matches!(strict, Err(Error::PositivityViolation { .. })));
        let lenient = SpaceTimeSource::new(spatial, temporal, 0.0, 0.1, kite()).unwrap();
        assert!(lenient.eval(&[0.0, 0.0], 0.0) < 0.0);
        assert!(!lenient.positivity().is_positive());
    }

    #[test]
    fn invalid_period_rejected() {
        let r =
            SpaceTimeSource::new(SpatialFactor::Constant(1.0), TemporalFactor::Polynomial(vec![1.0]), 0.5, 0.5, kite());
        assert!(matches!(r, Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn unit_pulse_transform() {
        let t = 0.7;
        let s = source(SpatialFactor::Constant(2.0), vec![1.0], 0.0, t);
        for k in [0.3, 1.0, 9.0, -4.0] {
            let ik = Complex64::new(0.0, k);
            let expected = 2.0 * (Complex64::from_polar(1.0, k * t) - 1.0) / ik * inv_sqrt_2pi();
            let got = s.frequency_source(&[0.0, 0.0], k).unwrap();
            assert!((got - expected).norm() < 1e-14, "k={k}");
        }
        let zero = s.frequency_source(&[0.0, 0.0], 0.0).unwrap();
        assert!((zero.re - 2.0 * t * inv_sqrt_2pi()).abs() < 1e-15 && zero.im == 0.0);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let s = source(SpatialFactor::Constant(1.0), vec![3.0, 3.0], 0.0, 0.1);
        let closed = s.temporal_transform(PI);
        let quad = s.temporal_transform_quadrature(PI, 2000);
        assert!((closed - quad).norm() < 1e-12);
    }

    #[test]
    fn closed_form_with_offset_and_high_degree() {
        let coeffs = vec![0.5, -1.0, 0.25, 2.0, -0.3];
        for (t_min, t_max) in [(0.0, 0.1), (1.0, 1.1), (3.0, 8.0)] {
            let s = source(SpatialFactor::Constant(1.0), coeffs.clone(), t_min, t_max);
            for k in [0.0, 0.1, 1.7, 5.0, 40.0, -12.0] {
                let closed = s.temporal_transform(k);
                let quad = s.temporal_transform_quadrature(k, 400);
                assert!((closed - quad).norm() <= 1e-10 * quad.norm().max(1e-300), "t=({t_min},{t_max}) k={k}");
            }
        }
    }

    #[test]
    fn taylor_shift() {
        // p(t) = 1 + 2t + 3t², p(1 + s) = 6 + 8s + 3s²
        assert_eq!(shift_polynomial(&[1.0, 2.0, 3.0], 1.0), vec![6.0, 8.0, 3.0]);
    }

    #[test]
    fn tabulated_needs_two_nodes() {
        let r = SpaceTimeSource::new(
            SpatialFactor::Constant(1.0),
            TemporalFactor::Tabulated { times: vec![0.0, 1.0], values: vec![1.0, 1.0], nodes: 1 },
            0.0,
            1.0,
            kite(),
        );
        assert!(matches!(r, Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn tabulated_linear_matches_polynomial() {
        let tab = SpaceTimeSource::new(
            SpatialFactor::Constant(1.0),
            TemporalFactor::Tabulated { times: vec![0.0, 1.0], values: vec![1.0, 2.0], nodes: 32 },
            0.0,
            1.0,
            kite(),
        )
        .unwrap();
        let poly = source(SpatialFactor::Constant(1.0), vec![1.0, 1.0], 0.0, 1.0);
        for k in [0.0, 2.0, 7.5] {
            assert!((tab.temporal_transform(k) - poly.temporal_transform(k)).norm() < 1e-13);
        }
    }

    #[test]
    fn spatial_factors() {
        assert_eq!(SpatialFactor::Affine { offset: 1.0, gradient: vec![3.0, 0.0] }.eval(&[2.0, 5.0]), 7.0);
        assert_eq!(SpatialFactor::QuadraticRadial { offset: 1.0, curvature: 1.0 }.eval(&[1.0, 1.0, 1.0]), 4.0);
    }
}
