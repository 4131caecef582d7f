//! Synthetic multi-frequency data by direct quadrature of the radiated field.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{distance, Direction, QuadratureRule};
use crate::source::SpaceTimeSource;
use crate::spectral::FrequencyGrid;

/// Far-field samples `w∞(x̂, k)` at one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldRecord {
    pub direction: Direction,
    pub wavenumbers: Vec<f64>,
    pub values: Vec<Complex64>,
}

/// Near-field samples `w(x, k)` at one exterior point.
#[derive(Debug, Clone, PartialEq)]
pub struct NearFieldRecord {
    pub point: Vec<f64>,
    pub wavenumbers: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl FarFieldRecord {
    pub fn value_at(&self, k: f64) -> Option<Complex64> {
        lookup(&self.wavenumbers, &self.values, k)
    }

    pub fn to_csv(&self) -> String {
        samples_to_csv(&self.wavenumbers, &self.values)
    }

    pub fn from_csv(direction: Direction, text: &str) -> Result<Self> {
        let (wavenumbers, values) = samples_from_csv(text)?;
        Ok(Self { direction, wavenumbers, values })
    }
}

impl NearFieldRecord {
    pub fn value_at(&self, k: f64) -> Option<Complex64> {
        lookup(&self.wavenumbers, &self.values, k)
    }

    pub fn to_csv(&self) -> String {
        samples_to_csv(&self.wavenumbers, &self.values)
    }

    pub fn from_csv(point: Vec<f64>, text: &str) -> Result<Self> {
        let (wavenumbers, values) = samples_from_csv(text)?;
        Ok(Self { point, wavenumbers, values })
    }
}

fn lookup(wavenumbers: &[f64], values: &[Complex64], k: f64) -> Option<Complex64> {
    let tol = 1e-9 * k.abs().max(1.0);
    wavenumbers.iter().position(|q| (q - k).abs() <= tol).map(|i| values[i])
}

/// Header `k,re,im` then one row per sample in shortest round-trip notation.
pub fn samples_to_csv(wavenumbers: &[f64], values: &[Complex64]) -> String {
    let mut out = String::from("k,re,im\n");
    for (k, v) in wavenumbers.iter().zip(values) {
        out.push_str(&format!("{k:?},{:?},{:?}\n", v.re, v.im));
    }
    out
}

pub fn samples_from_csv(text: &str) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "k,re,im" => {}
        _ => return Err(Error::Data("record CSV must start with the header `k,re,im`".into())),
    }
    let mut wavenumbers = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |s: &str| {
            s.trim().parse::<f64>().map_err(|_| Error::Data(format!("record row {}: cannot parse `{s}`", i + 2)))
        };
        if fields.len() != 3 {
            return Err(Error::Data(format!("record row {} needs 3 fields", i + 2)));
        }
        wavenumbers.push(parse(fields[0])?);
        values.push(Complex64::new(parse(fields[1])?, parse(fields[2])?));
    }
    Ok((wavenumbers, values))
}

/// `∫_D e^{-ik x̂·y} f(y, k) dy`; negative `k` is evaluated as the conjugate of `|k|`.
pub fn far_field(src: &SpaceTimeSource, quad: &QuadratureRule, direction: &Direction, k: f64) -> Result<Complex64> {
    check_dims(src, quad, direction.dim())?;
    let (weighted, phases) = far_phases(src, quad, direction);
    Ok(far_field_prepared(src, &weighted, &phases, k))
}

fn check_dims(src: &SpaceTimeSource, quad: &QuadratureRule, dim: usize) -> Result<()> {
    if src.dim() != quad.dim() || src.dim() != dim {
        return Err(Error::InvalidArgument("source, quadrature and observation differ in dimension".into()));
    }
    Ok(())
}

fn far_phases(src: &SpaceTimeSource, quad: &QuadratureRule, direction: &Direction) -> (Vec<f64>, Vec<f64>) {
    quad.iter().map(|(y, w)| (w * src.spatial_value(y), direction.dot(y))).unzip()
}

fn far_field_prepared(src: &SpaceTimeSource, weighted: &[f64], phases: &[f64], k: f64) -> Complex64 {
    let ka = k.abs();
    let spatial: Complex64 = weighted.iter().zip(phases).map(|(w, p)| Complex64::from_polar(*w, -ka * p)).sum();
    let value = spatial * src.temporal_transform(ka);
    if k < 0.0 {
        value.conj()
    } else {
        value
    }
}

fn check_exterior(src: &SpaceTimeSource, point: &[f64]) -> Result<()> {
    if src.dim() != 3 || point.len() != 3 {
        return Err(Error::InvalidArgument("near-field data are only defined in three dimensions".into()));
    }
    if src.support().contains_closed(point)? {
        return Err(Error::InvalidGeometry("observation point lies in the closed source support".into()));
    }
    Ok(())
}

/// `∫_D Φ_k(x, y) f(y, k) dy` with `Φ_k = e^{ik|x-y|}/(4π|x-y|)`; 3D only.
pub fn near_field(src: &SpaceTimeSource, quad: &QuadratureRule, point: &[f64], k: f64) -> Result<Complex64> {
    check_dims(src, quad, point.len())?;
    check_exterior(src, point)?;
    let (weighted, dists) = near_distances(src, quad, point);
    Ok(near_field_prepared(src, &weighted, &dists, k))
}

fn near_distances(src: &SpaceTimeSource, quad: &QuadratureRule, point: &[f64]) -> (Vec<f64>, Vec<f64>) {
    quad.iter()
        .map(|(y, w)| {
            let d = distance(point, y);
            (w * src.spatial_value(y) / (4.0 * PI * d), d)
        })
        .unzip()
}

fn near_field_prepared(src: &SpaceTimeSource, weighted: &[f64], dists: &[f64], k: f64) -> Complex64 {
    let ka = k.abs();
    let spatial: Complex64 = weighted.iter().zip(dists).map(|(w, d)| Complex64::from_polar(*w, ka * d)).sum();
    let value = spatial * src.temporal_transform(ka);
    if k < 0.0 {
        value.conj()
    } else {
        value
    }
}

/// Retarded potential `U(x, t) = (4π)^{-1} ∫_D S(y, t - |x-y|)/|x-y| dy` at each time.
pub fn time_domain_signal(
    src: &SpaceTimeSource,
    quad: &QuadratureRule,
    point: &[f64],
    times: &[f64],
) -> Result<Vec<f64>> {
    check_dims(src, quad, point.len())?;
    check_exterior(src, point)?;
    let nodes: Vec<(&[f64], f64, f64)> =
        quad.iter().map(|(y, w)| (y, w / (4.0 * PI * distance(point, y)), distance(point, y))).collect();
    Ok(times.par_iter().map(|&t| nodes.iter().map(|(y, w, d)| w * src.eval_inside(y, t - d)).sum()).collect())
}

/// Far-field samples at every wavenumber the grid needs.
pub fn sample_far_band(
    src: &SpaceTimeSource,
    quad: &QuadratureRule,
    direction: &Direction,
    grid: &FrequencyGrid,
) -> Result<FarFieldRecord> {
    sample_far_at(src, quad, direction, grid.required_wavenumbers())
}

/// Far-field samples at `jΔ`, `j = -J..J`, with `J = round(k_hi/Δ)`.
pub fn sample_uniform_band(
    src: &SpaceTimeSource,
    quad: &QuadratureRule,
    direction: &Direction,
    k_hi: f64,
    spacing: f64,
) -> Result<FarFieldRecord> {
    if !(k_hi > 0.0) || !(spacing > 0.0) {
        return Err(Error::InvalidArgument("uniform band needs positive extent and spacing".into()));
    }
    let half = (k_hi / spacing).round() as i64;
    sample_far_at(src, quad, direction, (-half..=half).map(|j| j as f64 * spacing).collect())
}

pub fn sample_far_at(
    src: &SpaceTimeSource,
    quad: &QuadratureRule,
    direction: &Direction,
    wavenumbers: Vec<f64>,
) -> Result<FarFieldRecord> {
    check_dims(src, quad, direction.dim())?;
    let (weighted, phases) = far_phases(src, quad, direction);
    let values = wavenumbers.par_iter().map(|&k| far_field_prepared(src, &weighted, &phases, k)).collect();
    Ok(FarFieldRecord { direction: direction.clone(), wavenumbers, values })
}

pub fn sample_near_band(
    src: &SpaceTimeSource,
    quad: &QuadratureRule,
    point: &[f64],
    grid: &FrequencyGrid,
) -> Result<NearFieldRecord> {
    check_dims(src, quad, point.len())?;
    check_exterior(src, point)?;
    let (weighted, dists) = near_distances(src, quad, point);
    let wavenumbers = grid.required_wavenumbers();
    let values = wavenumbers.par_iter().map(|&k| near_field_prepared(src, &weighted, &dists, k)).collect();
    Ok(NearFieldRecord { point: point.to_vec(), wavenumbers, values })
}

/// Closed-form far field of `S = a·b(t)` on a 3D ball of radius `r` centered at the origin.
pub fn ball_far_field_exact(src: &SpaceTimeSource, amplitude: f64, radius: f64, k: f64) -> Complex64 {
    ball_form_factor(k, radius) * 4.0 * PI * amplitude * src.temporal_transform(k)
}

/// Closed-form near field of the same ball source at an exterior point.
pub fn ball_near_field_exact(src: &SpaceTimeSource, amplitude: f64, radius: f64, point: &[f64], k: f64) -> Complex64 {
    let x = point.iter().map(|v| v * v).sum::<f64>().sqrt();
    let phase = Complex64::from_polar(1.0 / x, k * x);
    phase * ball_form_factor(k, radius) * amplitude * src.temporal_transform(k)
}

/// `(sin kr - kr cos kr)/k³`, with its series near `k = 0`.
fn ball_form_factor(k: f64, r: f64) -> f64 {
    let u = k * r;
    if u.abs() < 1e-3 {
        r.powi(3) * (1.0 / 3.0 - u * u / 30.0 + u.powi(4) / 840.0)
    } else {
        (u.sin() - u * u.cos()) / k.powi(3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_quadrature, build_quadrature_with, QuadratureScheme, SupportDomain};
    use crate::source::{SpatialFactor, TemporalFactor};

    fn ball_source(a: f64) -> SpaceTimeSource {
        SpaceTimeSource::new(
            SpatialFactor::Constant(a),
            TemporalFactor::Polynomial(vec![1.0]),
            0.0,
            0.1,
            SupportDomain::ball(vec![0.0; 3], 0.5).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_source_gives_zero_field() {
        let src = ball_source(0.0);
        let quad = build_quadrature(src.support(), 8).unwrap();
        let d = Direction::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(far_field(&src, &quad, &d, 2.0).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(near_field(&src, &quad, &[2.0, 0.0, 0.0], 2.0).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn ball_far_field_matches_closed_form() {
        let src = ball_source(1.0);
        let quad = build_quadrature_with(src.support(), 32, QuadratureScheme::Polar).unwrap();
        let d = Direction::normalized(vec![0.3, -0.4, 0.8]).unwrap();
        for k in [0.0, PI / 12.0, 2.0, 16.0 * PI / 6.0] {
            let exact = ball_far_field_exact(&src, 1.0, 0.5, k);
            let got = far_field(&src, &quad, &d, k).unwrap();
            assert!((got - exact).norm() <= 1e-9 * exact.norm(), "k={k}");
        }
    }

    #[test]
    fn ball_near_field_matches_closed_form() {
        let src = ball_source(1.0);
        let quad = build_quadrature_with(src.support(), 32, QuadratureScheme::Polar).unwrap();
        let x = [0.0, 1.2, -0.9];
        for k in [0.5, PI, 8.0] {
            let exact = ball_near_field_exact(&src, 1.0, 0.5, &x, k);
            let got = near_field(&src, &quad, &x, k).unwrap();
            assert!((got - exact).norm() <= 1e-5 * exact.norm(), "k={k}");
        }
    }

    #[test]
    fn small_k_limit_is_volume_times_mass() {
        let src = ball_source(2.0);
        let quad = build_quadrature_with(src.support(), 16, QuadratureScheme::Polar).unwrap();
        let d = Direction::new(vec![0.0, 0.0, 1.0]).unwrap();
        let w = far_field(&src, &quad, &d, 1e-9).unwrap();
        let expected = 4.0 / 3.0 * PI * 0.125 * 2.0 * 0.1 / (2.0 * PI).sqrt();
        assert!((w.re - expected).abs() < 1e-9 && w.im.abs() < 1e-9);
    }

    #[test]
    fn negative_wavenumbers_are_exact_conjugates() {
        let src = ball_source(1.0);
        let quad = build_quadrature(src.support(), 10).unwrap();
        let d = Direction::new(vec![1.0, 0.0, 0.0]).unwrap();
        let grid = FrequencyGrid::new(0.0, 16.0 * PI / 6.0, 16).unwrap();
        let rec = sample_far_band(&src, &quad, &d, &grid).unwrap();
        assert_eq!(rec.values.len(), 31);
        for (i, k) in rec.wavenumbers.iter().enumerate() {
            if *k < 0.0 {
                assert_eq!(rec.value_at(-k).unwrap(), rec.values[i].conj());
            }
        }
        let x = [1.5, 0.0, 0.0];
        assert_eq!(near_field(&src, &quad, &x, -2.0).unwrap(), near_field(&src, &quad, &x, 2.0).unwrap().conj());
    }

    #[test]
    fn near_field_rejects_interior_points_and_2d() {
        let src = ball_source(1.0);
        let quad = build_quadrature(src.support(), 8).unwrap();
        assert!(matches!(near_field(&src, &quad, &[0.5, 0.0, 0.0], 1.0), Err(Error::InvalidGeometry(_))));
        let flat = SpaceTimeSource::new(
            SpatialFactor::Constant(1.0),
            TemporalFactor::Polynomial(vec![1.0]),
            0.0,
            1.0,
            SupportDomain::ball(vec![0.0; 2], 0.5).unwrap(),
        )
        .unwrap();
        let q2 = build_quadrature(flat.support(), 8).unwrap();
        assert!(near_field(&flat, &q2, &[2.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn signal_vanishes_before_arrival_and_after_termination() {
        let src = ball_source(1.0);
        let quad = build_quadrature(src.support(), 12).unwrap();
        let x = [1.5, 0.0, 0.0];
        let u = time_domain_signal(&src, &quad, &x, &[0.9, 1.3, 2.2]).unwrap();
        assert_eq!(u[0], 0.0);
        assert!(u[1] > 0.0);
        assert_eq!(u[2], 0.0);
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let src = ball_source(1.0);
        let quad = build_quadrature(src.support(), 6).unwrap();
        let d = Direction::new(vec![0.0, 1.0, 0.0]).unwrap();
        let rec = sample_uniform_band(&src, &quad, &d, 3.0, 0.37).unwrap();
        let back = FarFieldRecord::from_csv(d, &rec.to_csv()).unwrap();
        assert_eq!(back, rec);
        assert!(FarFieldRecord::from_csv(Direction::from_angle(0.0), "x,y\n").is_err());
    }
}
