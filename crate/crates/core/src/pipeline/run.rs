use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::forward::{sample_far_band, sample_near_band, FarFieldRecord, NearFieldRecord};
use crate::geometry::{
    annulus_radii, build_quadrature_with, directional_extent, distance, AnnulusRadii, DirectionalExtent, QuadratureRule,
};
use crate::indicator::{scan_annuli, scan_hull, scan_strip, IndicatorField, ScanOptions};
use crate::metrics::{annulus_contrast, contrast_by, hull_contrast, peak_centroid, strip_contrast, Contrast};
use crate::source::SpaceTimeSource;
use crate::validation::{builtin_catalog, run_catalog, CatalogCase, Probe, ValidationReport};

use super::config::{Observations, RunConfig};
use super::manifest::{OutputDir, RunManifest};

/// Distance from the true set beyond which lattice points count as "outside".
pub const CONTRAST_MARGIN: f64 = 0.25;

/// Fraction of the peak defining the region whose centroid is reported.
pub const PEAK_FRACTION: f64 = 0.5;

pub fn build_source(config: &RunConfig) -> Result<SpaceTimeSource> {
    SpaceTimeSource::new(
        config.spatial.clone(),
        config.temporal.clone(),
        config.t_min,
        config.t_max,
        config.domain.clone(),
    )
}

pub fn build_rule(config: &RunConfig) -> Result<QuadratureRule> {
    build_quadrature_with(&config.domain, config.quadrature_resolution, config.quadrature_scheme)
}

/// Data file for observation `j`: `{name}_dir{j}.csv` or `{name}_pt{j}.csv`.
pub fn record_file_name(config: &RunConfig, j: usize) -> String {
    let tag = if config.observations.is_near() { "pt" } else { "dir" };
    format!("{}_{tag}{j}.csv", config.name)
}

pub fn scan_options(config: &RunConfig) -> ScanOptions {
    ScanOptions { truncation: config.truncation, noise: config.noise, seed: config.seed, noise_kind: config.noise_kind }
}

/// Records for every observation, in configuration order.
#[derive(Debug, Clone, PartialEq)]
pub enum Records {
    Far(Vec<FarFieldRecord>),
    Near(Vec<NearFieldRecord>),
}

impl Records {
    fn csv(&self) -> Vec<String> {
        match self {
            Records::Far(r) => r.iter().map(FarFieldRecord::to_csv).collect(),
            Records::Near(r) => r.iter().map(NearFieldRecord::to_csv).collect(),
        }
    }
}

/// Synthesizes the data records of a configuration in memory.
pub fn synthesize(config: &RunConfig) -> Result<Records> {
    let src = build_source(config)?;
    let quad = build_rule(config)?;
    match &config.observations {
        Observations::Points(points) => points
            .iter()
            .map(|x| sample_near_band(&src, &quad, x, &config.band))
            .collect::<Result<_>>()
            .map(Records::Near),
        obs => obs
            .directions()?
            .iter()
            .map(|d| sample_far_band(&src, &quad, d, &config.band))
            .collect::<Result<_>>()
            .map(Records::Far),
    }
}

/// Writes one record CSV per observation plus `simulate_manifest.json`.
pub fn simulate(config: &RunConfig, out: &Path) -> Result<RunManifest> {
    let mut manifest = RunManifest::new("simulate", &config.to_text());
    let records = manifest.time("synthesize", || synthesize(config))?;
    let dir = OutputDir::create(out)?;
    for (j, csv) in records.csv().iter().enumerate() {
        dir.write(&mut manifest, &record_file_name(config, j), csv.as_bytes())?;
    }
    dir.finish(&manifest)?;
    Ok(manifest)
}

/// Reads the records written by [`simulate`] for this configuration.
pub fn load_records(config: &RunConfig, data: &Path) -> Result<Records> {
    let read = |j: usize| -> Result<String> {
        let path = data.join(record_file_name(config, j));
        std::fs::read_to_string(&path).map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))
    };
    let in_file = |j: usize| {
        move |e: Error| match e {
            Error::Data(m) => Error::Data(format!("observation {j}: {m}")),
            other => other,
        }
    };
    match &config.observations {
        Observations::Points(points) => points
            .iter()
            .enumerate()
            .map(|(j, x)| NearFieldRecord::from_csv(x.clone(), &read(j)?).map_err(in_file(j)))
            .collect::<Result<_>>()
            .map(Records::Near),
        obs => obs
            .directions()?
            .into_iter()
            .enumerate()
            .map(|(j, d)| FarFieldRecord::from_csv(d, &read(j)?).map_err(in_file(j)))
            .collect::<Result<_>>()
            .map(Records::Far),
    }
}

/// Ground-truth sets the reconstruction is scored against.
#[derive(Debug, Clone, PartialEq)]
pub enum GroundTruth {
    Strips(Vec<DirectionalExtent>),
    Annuli(Vec<(Vec<f64>, AnnulusRadii)>),
}

pub fn ground_truth(config: &RunConfig) -> Result<GroundTruth> {
    match &config.observations {
        Observations::Points(points) => points
            .iter()
            .map(|x| Ok((x.clone(), annulus_radii(&config.domain, x)?)))
            .collect::<Result<_>>()
            .map(GroundTruth::Annuli),
        obs => obs
            .directions()?
            .iter()
            .map(|d| directional_extent(&config.domain, d))
            .collect::<Result<_>>()
            .map(GroundTruth::Strips),
    }
}

/// Lines printed by `extents`.
pub fn extents_report(config: &RunConfig) -> Result<String> {
    let mut out = String::new();
    match ground_truth(config)? {
        GroundTruth::Strips(extents) => {
            for (j, e) in extents.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "direction {j} ({}): low={:?} high={:?} width={:?}",
                    join(e.direction.components()),
                    e.low,
                    e.high,
                    e.width()
                );
            }
        }
        GroundTruth::Annuli(annuli) => {
            for (j, (x, r)) in annuli.iter().enumerate() {
                let _ = writeln!(out, "point {j} ({}): inner={:?} outer={:?}", join(x), r.inner, r.outer);
            }
        }
    }
    Ok(out)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|c| format!("{c:?}")).collect::<Vec<_>>().join(",")
}

/// Inside every annulus versus more than `margin` outside at least one.
pub fn annuli_contrast(field: &IndicatorField, annuli: &[(Vec<f64>, AnnulusRadii)], margin: f64) -> Result<Contrast> {
    contrast_by(field, |y| {
        let radial = |(x, r): &(Vec<f64>, AnnulusRadii)| {
            let d = distance(x, y);
            (r.inner < d && d < r.outer, d < r.inner - margin || d > r.outer + margin)
        };
        if annuli.iter().all(|a| radial(a).0) {
            Some(true)
        } else if annuli.iter().any(|a| radial(a).1) {
            Some(false)
        } else {
            None
        }
    })
}

/// Indicator scan of already loaded records.
pub fn scan(config: &RunConfig, records: &Records) -> Result<IndicatorField> {
    let options = scan_options(config);
    let (grid, lattice, t0, t1) = (&config.band, &config.lattice, config.t_min, config.t_max);
    match records {
        Records::Far(r) if r.len() == 1 => scan_strip(&r[0], grid, lattice, t0, t1, &options),
        Records::Far(r) => scan_hull(r, grid, lattice, t0, t1, &options),
        Records::Near(r) => scan_annuli(r, grid, lattice, t0, t1, &options),
    }
}

/// Contrast and localization metrics as `(name, value)` pairs.
pub fn field_metrics(config: &RunConfig, field: &IndicatorField) -> Result<Vec<(String, f64)>> {
    let (prefix, contrast) = match ground_truth(config)? {
        GroundTruth::Strips(e) if e.len() == 1 => ("strip", strip_contrast(field, &e[0], CONTRAST_MARGIN)?),
        GroundTruth::Strips(e) => ("hull", hull_contrast(field, &e, CONTRAST_MARGIN)?),
        GroundTruth::Annuli(a) if a.len() == 1 => {
            ("annulus", annulus_contrast(field, &a[0].0, &a[0].1, CONTRAST_MARGIN)?)
        }
        GroundTruth::Annuli(a) => ("annuli", annuli_contrast(field, &a, CONTRAST_MARGIN)?),
    };
    let mut metrics = vec![
        (format!("{prefix}_contrast"), contrast.ratio),
        (format!("{prefix}_inside_median"), contrast.inside_median),
        (format!("{prefix}_outside_median"), contrast.outside_median),
        (format!("{prefix}_inside_count"), contrast.inside_count as f64),
        (format!("{prefix}_outside_count"), contrast.outside_count as f64),
    ];
    if let Ok(c) = peak_centroid(field, PEAK_FRACTION) {
        metrics.extend(c.iter().enumerate().map(|(a, v)| (format!("peak_centroid_y{}", a + 1), *v)));
    }
    metrics.push(("max_w".into(), field.max()));
    metrics.push(("degenerate_points".into(), field.meta.degenerate as f64));
    metrics.push(("excluded_points".into(), field.meta.excluded as f64));
    Ok(metrics)
}

/// Output of [`reconstruct`].
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub field: IndicatorField,
    pub metrics: Vec<(String, f64)>,
    pub manifest: RunManifest,
}

impl Reconstruction {
    /// `metric=value` lines.
    pub fn metric_lines(&self) -> String {
        self.metrics.iter().map(|(k, v)| format!("{k}={v:?}\n")).collect()
    }
}

/// Loads records from `data`, scans the lattice and writes the field CSV,
/// heatmap slice, metrics file and `reconstruct_manifest.json` into `out`.
pub fn reconstruct(config: &RunConfig, data: &Path, out: &Path) -> Result<Reconstruction> {
    let mut manifest = RunManifest::new("reconstruct", &config.to_text());
    let records = manifest.time("load", || load_records(config, data))?;
    let field = manifest.time("scan", || scan(config, &records))?;
    let metrics = manifest.time("metrics", || field_metrics(config, &field))?;
    let dir = OutputDir::create(out)?;
    let name = &config.name;
    if config.output.csv {
        dir.write(&mut manifest, &format!("{name}_field.csv"), field.to_csv().as_bytes())?;
    }
    if config.output.pgm {
        let (axis, coordinate) = (config.output.slice_axis, config.output.slice_coordinate);
        let file = if field.lattice.dim() == 3 {
            format!("{name}_slice_y{}_{coordinate:?}.pgm", axis + 1)
        } else {
            format!("{name}_field.pgm")
        };
        dir.write(&mut manifest, &file, &field.slice_pgm(axis, coordinate)?)?;
    }
    let mut result = Reconstruction { field, metrics, manifest };
    let lines = result.metric_lines();
    dir.write(&mut result.manifest, &format!("{name}_metrics.txt"), lines.as_bytes())?;
    dir.finish(&result.manifest)?;
    Ok(result)
}

/// One factorization case per configured observation.
pub fn catalog_from_config(config: &RunConfig) -> Result<Vec<CatalogCase>> {
    let source = build_source(config)?;
    let probes: Vec<Probe> = match &config.observations {
        Observations::Points(p) => p.iter().cloned().map(Probe::Near).collect(),
        obs => obs.directions()?.into_iter().map(Probe::Far).collect(),
    };
    Ok(probes
        .into_iter()
        .enumerate()
        .map(|(j, probe)| CatalogCase {
            name: format!("{}_{j}", config.name),
            source: source.clone(),
            resolution: config.quadrature_resolution.min(60),
            probe,
        })
        .collect())
}

/// Runs the oracles on the built-in catalog, or on the cases of `config`.
pub fn validate(config: Option<&RunConfig>, mismatch: bool) -> Result<ValidationReport> {
    let grid = crate::validation::reference_grid()?;
    match config {
        None => run_catalog(&builtin_catalog()?, &grid, mismatch),
        Some(c) => run_catalog(&catalog_from_config(c)?, &c.band, mismatch),
    }
}
