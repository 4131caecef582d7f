//! Run configuration in a flat `[section]` / `key = value` format.
//!
//! ```text
//! # comment
//! [section]
//! number = 0.25
//! text = "kite"
//! list = [1, 0, 0]
//! ```
//!
//! Values are numbers, double-quoted strings (no escapes) or bracketed lists
//! of numbers. Angles under `[observations] theta` are in units of π. A union
//! domain sets `shape = "union"` in `[domain]` and lists its components in
//! `[domain.1]`, `[domain.2]`, and so on.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{Direction, QuadratureScheme, Shape, SupportDomain};
use crate::indicator::{Lattice, Truncation};
use crate::source::{SpatialFactor, TemporalFactor, DEFAULT_TIME_NODES};
use crate::spectral::{Collocation, FrequencyGrid, NoiseKind};

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Number(f64),
    Text(String),
    List(Vec<f64>),
}

impl Value {
    fn describe(&self) -> &'static str {
        match self {
            Value::Number(_) => "a number",
            Value::Text(_) => "a string",
            Value::List(_) => "a list",
        }
    }
}

#[derive(Debug, Default)]
struct Section {
    line: usize,
    entries: BTreeMap<String, (Value, usize)>,
}

/// Raw sections with line numbers, consumed key by key during typing.
struct Document {
    sections: BTreeMap<String, Section>,
}

fn config_error(key: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Config { key: key.to_string(), line, message: message.into() }
}

fn parse_document(text: &str) -> Result<Document> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .map(str::trim)
                .filter(|n| !n.is_empty() && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.'))
                .ok_or_else(|| config_error(line, line_no, "malformed section header"))?;
            if sections.contains_key(name) {
                return Err(config_error(name, line_no, "duplicate section"));
            }
            sections.insert(name.to_string(), Section { line: line_no, entries: BTreeMap::new() });
            current = Some(name.to_string());
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| config_error(line, line_no, "expected `key = value`"))?;
        let key = key.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(config_error(key, line_no, "invalid key"));
        }
        let section =
            current.as_ref().ok_or_else(|| config_error(key, line_no, "key appears before any section header"))?;
        let value = parse_value(value.trim()).map_err(|m| config_error(key, line_no, m))?;
        let entries = &mut sections.get_mut(section).expect("section exists").entries;
        if entries.insert(key.to_string(), (value, line_no)).is_some() {
            return Err(config_error(key, line_no, "duplicate key"));
        }
    }
    Ok(Document { sections })
}

fn strip_comment(line: &str) -> &str {
    let mut in_string = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_string = !in_string,
            '#' if !in_string => return &line[..i],
            _ => {}
        }
    }
    line
}

fn parse_value(text: &str) -> std::result::Result<Value, String> {
    if let Some(rest) = text.strip_prefix('"') {
        let inner = rest.strip_suffix('"').ok_or("unterminated string")?;
        if inner.contains('"') {
            return Err("strings cannot contain quotes".into());
        }
        return Ok(Value::Text(inner.to_string()));
    }
    if let Some(rest) = text.strip_prefix('[') {
        let inner = rest.strip_suffix(']').ok_or("unterminated list")?.trim();
        if inner.is_empty() {
            return Ok(Value::List(Vec::new()));
        }
        return inner
            .split(',')
            .map(|item| parse_number(item.trim()))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(Value::List);
    }
    parse_number(text).map(Value::Number)
}

fn parse_number(text: &str) -> std::result::Result<f64, String> {
    text.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| format!("`{text}` is not a finite number"))
}

/// Typed access to one section; every key must be consumed.
struct Reader<'a> {
    name: &'a str,
    section: Section,
}

impl<'a> Reader<'a> {
    fn open(doc: &mut Document, name: &'a str) -> Result<Self> {
        let section =
            doc.sections.remove(name).ok_or_else(|| config_error(name, 0, format!("missing section [{name}]")))?;
        Ok(Self { name, section })
    }

    fn open_optional(doc: &mut Document, name: &'a str) -> Self {
        let section = doc.sections.remove(name).unwrap_or_default();
        Self { name, section }
    }

    fn take(&mut self, key: &str) -> Option<(Value, usize)> {
        self.section.entries.remove(key)
    }

    fn missing(&self, key: &str) -> Error {
        config_error(key, self.section.line, format!("missing key in [{}]", self.name))
    }

    fn wrong(key: &str, line: usize, expected: &str, got: &Value) -> Error {
        config_error(key, line, format!("expected {expected}, got {}", got.describe()))
    }

    fn number_opt(&mut self, key: &str) -> Result<Option<(f64, usize)>> {
        match self.take(key) {
            None => Ok(None),
            Some((Value::Number(v), line)) => Ok(Some((v, line))),
            Some((other, line)) => Err(Self::wrong(key, line, "a number", &other)),
        }
    }

    fn number(&mut self, key: &str) -> Result<(f64, usize)> {
        self.number_opt(key)?.ok_or_else(|| self.missing(key))
    }

    fn number_or(&mut self, key: &str, default: f64) -> Result<(f64, usize)> {
        Ok(self.number_opt(key)?.unwrap_or((default, self.section.line)))
    }

    fn integer_opt(&mut self, key: &str) -> Result<Option<(u64, usize)>> {
        match self.number_opt(key)? {
            None => Ok(None),
            Some((v, line)) if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 => Ok(Some((v as u64, line))),
            Some((_, line)) => Err(config_error(key, line, "expected a nonnegative integer")),
        }
    }

    fn integer(&mut self, key: &str) -> Result<(u64, usize)> {
        self.integer_opt(key)?.ok_or_else(|| self.missing(key))
    }

    fn text_opt(&mut self, key: &str) -> Result<Option<(String, usize)>> {
        match self.take(key) {
            None => Ok(None),
            Some((Value::Text(v), line)) => Ok(Some((v, line))),
            Some((other, line)) => Err(Self::wrong(key, line, "a string", &other)),
        }
    }

    fn text(&mut self, key: &str) -> Result<(String, usize)> {
        self.text_opt(key)?.ok_or_else(|| self.missing(key))
    }

    fn list_opt(&mut self, key: &str) -> Result<Option<(Vec<f64>, usize)>> {
        match self.take(key) {
            None => Ok(None),
            Some((Value::List(v), line)) => Ok(Some((v, line))),
            Some((other, line)) => Err(Self::wrong(key, line, "a list", &other)),
        }
    }

    fn list(&mut self, key: &str) -> Result<(Vec<f64>, usize)> {
        self.list_opt(key)?.ok_or_else(|| self.missing(key))
    }

    fn finish(self) -> Result<()> {
        match self.section.entries.into_iter().next() {
            Some((key, (_, line))) => Err(config_error(&key, line, format!("unknown key in [{}]", self.name))),
            None => Ok(()),
        }
    }
}

/// Where the data are observed.
#[derive(Debug, Clone, PartialEq)]
pub enum Observations {
    /// 2D directions `(cos πθ, sin πθ)` given by `θ` in units of π.
    Angles(Vec<f64>),
    /// Unit vectors, one per entry.
    Directions(Vec<Vec<f64>>),
    /// Exterior sensor points (near-field data, 3D).
    Points(Vec<Vec<f64>>),
}

impl Observations {
    pub fn len(&self) -> usize {
        match self {
            Observations::Angles(v) => v.len(),
            Observations::Directions(v) | Observations::Points(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_near(&self) -> bool {
        matches!(self, Observations::Points(_))
    }

    /// Unit directions for far-field observations.
    pub fn directions(&self) -> Result<Vec<Direction>> {
        match self {
            Observations::Angles(a) => Ok(a.iter().map(|t| Direction::from_angle(t * std::f64::consts::PI)).collect()),
            Observations::Directions(d) => d.iter().map(|v| Direction::new(v.clone())).collect(),
            Observations::Points(_) => Err(Error::InvalidConfig("observations are points, not directions".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    /// Default output directory; the command line may override it.
    pub directory: Option<String>,
    pub csv: bool,
    pub pgm: bool,
    /// Axis held fixed for 3D heatmap slices.
    pub slice_axis: usize,
    pub slice_coordinate: f64,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { directory: None, csv: true, pgm: true, slice_axis: 1, slice_coordinate: 0.0 }
    }
}

/// A complete simulate/reconstruct experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub domain: SupportDomain,
    pub spatial: SpatialFactor,
    pub temporal: TemporalFactor,
    pub t_min: f64,
    pub t_max: f64,
    pub band: FrequencyGrid,
    pub observations: Observations,
    pub lattice: Lattice,
    /// `None` selects the noise-dependent default.
    pub truncation: Option<Truncation>,
    pub noise: f64,
    pub seed: u64,
    pub noise_kind: NoiseKind,
    pub quadrature_resolution: usize,
    pub quadrature_scheme: QuadratureScheme,
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = parse_document(text)?;
        let config = Self::from_document(&mut doc)?;
        if let Some((name, section)) = doc.sections.into_iter().next() {
            return Err(config_error(&name, section.line, "unknown section"));
        }
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error("config", 0, format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn from_document(doc: &mut Document) -> Result<Self> {
        let mut exp = Reader::open(doc, "experiment")?;
        let (name, line) = exp.text("name")?;
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(config_error("name", line, "name must be nonempty and use [A-Za-z0-9_-]"));
        }
        exp.finish()?;

        let domain = read_domain(doc, "domain")?;
        let dim = domain.dim();

        let mut src = Reader::open(doc, "source")?;
        let spatial = read_spatial(&mut src, dim)?;
        let (t_min, line) = src.number("t_min")?;
        let (t_max, _) = src.number("t_max")?;
        if !(t_min >= 0.0 && t_max > t_min) {
            return Err(config_error("t_min", line, "radiating period needs 0 <= t_min < t_max"));
        }
        let temporal = match src.list_opt("temporal_times")? {
            Some((times, line)) => {
                let (values, _) = src.list("temporal_values")?;
                let nodes = src.integer_opt("time_nodes")?.map_or(DEFAULT_TIME_NODES, |(v, _)| v as usize);
                if times.len() != values.len() || times.len() < 2 || nodes < 2 {
                    return Err(config_error(
                        "temporal_times",
                        line,
                        "needs >= 2 samples matching temporal_values and time_nodes >= 2",
                    ));
                }
                TemporalFactor::Tabulated { times, values, nodes }
            }
            None => {
                let (coeffs, line) = src.list("temporal")?;
                if coeffs.is_empty() {
                    return Err(config_error("temporal", line, "needs at least one coefficient"));
                }
                TemporalFactor::Polynomial(coeffs)
            }
        };
        src.finish()?;

        let mut band = Reader::open(doc, "band")?;
        let (k_min, _) = band.number_or("k_min", 0.0)?;
        let (k_max, line) = band.number("k_max")?;
        let (samples, sline) = band.integer("samples")?;
        if samples == 0 {
            return Err(config_error("samples", sline, "needs at least one sample"));
        }
        let collocation = match band.text_opt("collocation")? {
            None => Collocation::Aligned,
            Some((v, l)) => match v.as_str() {
                "aligned" => Collocation::Aligned,
                "staggered" => Collocation::Staggered,
                _ => return Err(config_error("collocation", l, "expected \"aligned\" or \"staggered\"")),
            },
        };
        let band_grid = FrequencyGrid::with_collocation(k_min, k_max, samples as usize, collocation)
            .map_err(|e| config_error("k_max", line, e.to_string()))?;
        band.finish()?;

        let mut obs = Reader::open(doc, "observations")?;
        let observations = read_observations(&mut obs, dim)?;
        obs.finish()?;
        if observations.is_near() && dim != 3 {
            return Err(config_error("points", 0, "near-field observations need a 3D domain"));
        }

        let mut lat = Reader::open(doc, "lattice")?;
        let (lower, line) = lat.list("lower")?;
        let (upper, _) = lat.list("upper")?;
        let (counts, cline) = lat.list("counts")?;
        if counts.iter().any(|c| c.fract() != 0.0 || *c < 0.0) {
            return Err(config_error("counts", cline, "counts must be nonnegative integers"));
        }
        let counts: Vec<usize> = counts.iter().map(|c| *c as usize).collect();
        if lower.len() != dim {
            return Err(config_error("lower", line, format!("expected {dim} coordinates")));
        }
        let lattice = Lattice::new(lower, upper, counts).map_err(|e| config_error("lower", line, e.to_string()))?;
        lat.finish()?;

        let mut rec = Reader::open_optional(doc, "reconstruction");
        let truncation = match rec.take("truncation") {
            None => None,
            Some((Value::Text(t), l)) => match t.as_str() {
                "all" => Some(Truncation::All),
                "noise" => None,
                _ => return Err(config_error("truncation", l, "expected \"all\", \"noise\" or a mode count")),
            },
            Some((Value::Number(n), l)) => {
                if n < 1.0 || n.fract() != 0.0 || n > samples as f64 {
                    return Err(config_error(
                        "truncation",
                        l,
                        format!("mode count must be an integer in 1..={samples}"),
                    ));
                }
                Some(Truncation::Count(n as usize))
            }
            Some((other, l)) => return Err(Reader::wrong("truncation", l, "a string or number", &other)),
        };
        rec.finish()?;

        let mut noise = Reader::open_optional(doc, "noise");
        let (delta, line) = noise.number_or("delta", 0.0)?;
        if delta < 0.0 {
            return Err(config_error("delta", line, "noise level must be nonnegative"));
        }
        let seed = noise.integer_opt("seed")?.map_or(0, |(v, _)| v);
        let noise_kind = match noise.text_opt("kind")? {
            None => NoiseKind::Real,
            Some((v, l)) => match v.as_str() {
                "real" => NoiseKind::Real,
                "complex" => NoiseKind::Complex,
                _ => return Err(config_error("kind", l, "expected \"real\" or \"complex\"")),
            },
        };
        noise.finish()?;

        let mut quad = Reader::open_optional(doc, "quadrature");
        let (resolution, line) = quad.integer_opt("resolution")?.unwrap_or((if dim == 2 { 400 } else { 30 }, 0));
        if resolution < 2 {
            return Err(config_error("resolution", line, "resolution must be at least 2"));
        }
        let quadrature_scheme = match quad.text_opt("scheme")? {
            None => QuadratureScheme::Cartesian,
            Some((v, l)) => match v.as_str() {
                "cartesian" => QuadratureScheme::Cartesian,
                "polar" if matches!(domain.shape(), Shape::Ball { .. }) => QuadratureScheme::Polar,
                "polar" => return Err(config_error("scheme", l, "the polar scheme needs a ball domain")),
                _ => return Err(config_error("scheme", l, "expected \"cartesian\" or \"polar\"")),
            },
        };
        quad.finish()?;

        let mut out = Reader::open_optional(doc, "output");
        let mut output = OutputSpec { directory: out.text_opt("directory")?.map(|(d, _)| d), ..OutputSpec::default() };
        if let Some((formats, l)) = out.text_opt("formats")? {
            output.csv = false;
            output.pgm = false;
            for f in formats.split_whitespace() {
                match f {
                    "csv" => output.csv = true,
                    "pgm" => output.pgm = true,
                    _ => return Err(config_error("formats", l, format!("unknown format `{f}`"))),
                }
            }
        }
        if let Some((axis, l)) = out.integer_opt("slice_axis")? {
            if axis as usize >= dim {
                return Err(config_error("slice_axis", l, "slice axis out of range"));
            }
            output.slice_axis = axis as usize;
        }
        if let Some((c, _)) = out.number_opt("slice_coordinate")? {
            output.slice_coordinate = c;
        }
        out.finish()?;

        Ok(Self {
            name,
            domain,
            spatial,
            temporal,
            t_min,
            t_max,
            band: band_grid,
            observations,
            lattice,
            truncation,
            noise: delta,
            seed,
            noise_kind,
            quadrature_resolution: resolution as usize,
            quadrature_scheme,
            output,
        })
    }

    /// Canonical text form; parsing it yields an equal configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[experiment]\nname = \"{}\"\n", self.name);
        write_domain(&mut s, "domain", &self.domain);
        s.push_str("[source]\n");
        match &self.spatial {
            SpatialFactor::Constant(a) => {
                let _ = writeln!(s, "spatial = \"constant\"\namplitude = {}", num(*a));
            }
            SpatialFactor::Affine { offset, gradient } => {
                let _ = writeln!(s, "spatial = \"affine\"\noffset = {}\ngradient = {}", num(*offset), list(gradient));
            }
            SpatialFactor::QuadraticRadial { offset, curvature } => {
                let _ = writeln!(
                    s,
                    "spatial = \"quadratic_radial\"\noffset = {}\ncurvature = {}",
                    num(*offset),
                    num(*curvature)
                );
            }
        }
        match &self.temporal {
            TemporalFactor::Polynomial(c) => {
                let _ = writeln!(s, "temporal = {}", list(c));
            }
            TemporalFactor::Tabulated { times, values, nodes } => {
                let _ = writeln!(
                    s,
                    "temporal_times = {}\ntemporal_values = {}\ntime_nodes = {nodes}",
                    list(times),
                    list(values)
                );
            }
        }
        let _ = writeln!(s, "t_min = {}\nt_max = {}\n", num(self.t_min), num(self.t_max));
        let collocation = match self.band.collocation() {
            Collocation::Aligned => "aligned",
            Collocation::Staggered => "staggered",
        };
        let _ = writeln!(
            s,
            "[band]\nk_min = {}\nk_max = {}\nsamples = {}\ncollocation = \"{collocation}\"\n",
            num(self.band.k_min()),
            num(self.band.k_max()),
            self.band.samples()
        );
        s.push_str("[observations]\n");
        match &self.observations {
            Observations::Angles(a) => {
                let _ = writeln!(s, "theta = {}", list(a));
            }
            Observations::Directions(d) => {
                let _ = writeln!(s, "directions = {}", list(&d.concat()));
            }
            Observations::Points(p) => {
                let _ = writeln!(s, "points = {}", list(&p.concat()));
            }
        }
        let counts: Vec<f64> = self.lattice.counts().iter().map(|c| *c as f64).collect();
        let _ = writeln!(
            s,
            "\n[lattice]\nlower = {}\nupper = {}\ncounts = {}\n",
            list(self.lattice.lower()),
            list(self.lattice.upper()),
            list(&counts)
        );
        s.push_str("[reconstruction]\n");
        match self.truncation {
            None => s.push_str("truncation = \"noise\"\n"),
            Some(Truncation::All) => s.push_str("truncation = \"all\"\n"),
            Some(Truncation::Count(n)) => {
                let _ = writeln!(s, "truncation = {n}");
            }
            Some(Truncation::NoiseMatched(_)) => s.push_str("truncation = \"noise\"\n"),
        }
        let kind = match self.noise_kind {
            NoiseKind::Real => "real",
            NoiseKind::Complex => "complex",
        };
        let _ = writeln!(s, "\n[noise]\ndelta = {}\nseed = {}\nkind = \"{kind}\"\n", num(self.noise), self.seed);
        let scheme = match self.quadrature_scheme {
            QuadratureScheme::Cartesian => "cartesian",
            QuadratureScheme::Polar => "polar",
        };
        let _ = writeln!(s, "[quadrature]\nresolution = {}\nscheme = \"{scheme}\"\n", self.quadrature_resolution);
        let mut formats = Vec::new();
        if self.output.csv {
            formats.push("csv");
        }
        if self.output.pgm {
            formats.push("pgm");
        }
        s.push_str("[output]\n");
        if let Some(dir) = &self.output.directory {
            let _ = writeln!(s, "directory = \"{dir}\"");
        }
        let _ = writeln!(
            s,
            "formats = \"{}\"\nslice_axis = {}\nslice_coordinate = {}",
            formats.join(" "),
            self.output.slice_axis,
            num(self.output.slice_coordinate)
        );
        s
    }

    /// Truncation actually applied.
    pub fn effective_truncation(&self) -> Truncation {
        self.truncation.unwrap_or_else(|| Truncation::for_noise(self.noise))
    }
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| num(*x)).collect();
    format!("[{}]", items.join(", "))
}

fn write_domain(s: &mut String, section: &str, domain: &SupportDomain) {
    let _ = writeln!(s, "[{section}]");
    match domain.shape() {
        Shape::Ball { center, radius } => {
            let _ = writeln!(s, "shape = \"ball\"\ncenter = {}\nradius = {}\n", list(center), num(*radius));
        }
        Shape::Cube { center, half_widths } => {
            let _ = writeln!(s, "shape = \"cube\"\ncenter = {}\nhalf_widths = {}\n", list(center), list(half_widths));
        }
        Shape::Ellipse { center, semi_axes } => {
            let _ = writeln!(s, "shape = \"ellipse\"\ncenter = {}\nsemi_axes = {}\n", list(center), list(semi_axes));
        }
        Shape::Kite { center, scale } => {
            let _ = writeln!(s, "shape = \"kite\"\ncenter = {}\nscale = {}\n", list(center), num(*scale));
        }
        Shape::Union(parts) => {
            s.push_str("shape = \"union\"\n\n");
            for (i, part) in parts.iter().enumerate() {
                write_domain(s, &format!("{section}.{}", i + 1), part);
            }
        }
    }
}

fn wrap(key: &'static str, line: usize) -> impl Fn(Error) -> Error {
    move |e| config_error(key, line, e.to_string())
}

fn read_domain(doc: &mut Document, section: &str) -> Result<SupportDomain> {
    let mut r = Reader::open(doc, section)?;
    let (shape, line) = r.text("shape")?;
    let domain = match shape.as_str() {
        "ball" => {
            let (center, l) = r.list("center")?;
            let (radius, _) = r.number("radius")?;
            SupportDomain::ball(center, radius).map_err(wrap("center", l))?
        }
        "cube" => {
            let (center, l) = r.list("center")?;
            let (half, _) = r.list("half_widths")?;
            SupportDomain::cube(center, half).map_err(wrap("center", l))?
        }
        "ellipse" => {
            let (center, l) = r.list("center")?;
            let (axes, _) = r.list("semi_axes")?;
            if center.len() != 2 || axes.len() != 2 {
                return Err(config_error("center", l, "ellipses are two-dimensional"));
            }
            SupportDomain::ellipse([center[0], center[1]], [axes[0], axes[1]]).map_err(wrap("semi_axes", l))?
        }
        "kite" => {
            let (center, l) = r.list_opt("center")?.unwrap_or((vec![0.0, 0.0], line));
            let (scale, _) = r.number_or("scale", 1.0)?;
            if center.len() != 2 {
                return Err(config_error("center", l, "kites are two-dimensional"));
            }
            SupportDomain::kite([center[0], center[1]], scale).map_err(wrap("scale", l))?
        }
        "union" => {
            r.finish()?;
            let mut parts = Vec::new();
            let mut i = 1;
            loop {
                let name = format!("{section}.{i}");
                if !doc.sections.contains_key(&name) {
                    break;
                }
                parts.push(read_domain(doc, &name)?);
                i += 1;
            }
            if parts.is_empty() {
                return Err(config_error(
                    "shape",
                    line,
                    format!("union needs sections [{section}.1], [{section}.2], ..."),
                ));
            }
            return SupportDomain::union(parts).map_err(wrap("shape", line));
        }
        _ => return Err(config_error("shape", line, format!("unknown shape `{shape}`"))),
    };
    r.finish()?;
    Ok(domain)
}

fn read_spatial(r: &mut Reader, dim: usize) -> Result<SpatialFactor> {
    let (kind, line) = r.text("spatial")?;
    match kind.as_str() {
        "constant" => Ok(SpatialFactor::Constant(r.number("amplitude")?.0)),
        "affine" => {
            let (offset, _) = r.number_or("offset", 0.0)?;
            let (gradient, l) = r.list("gradient")?;
            if gradient.len() != dim {
                return Err(config_error("gradient", l, format!("expected {dim} components")));
            }
            Ok(SpatialFactor::Affine { offset, gradient })
        }
        "quadratic_radial" => {
            let (offset, _) = r.number_or("offset", 0.0)?;
            let (curvature, _) = r.number("curvature")?;
            Ok(SpatialFactor::QuadraticRadial { offset, curvature })
        }
        _ => Err(config_error("spatial", line, format!("unknown spatial factor `{kind}`"))),
    }
}

fn read_observations(r: &mut Reader, dim: usize) -> Result<Observations> {
    let theta = r.list_opt("theta")?;
    let directions = r.list_opt("directions")?;
    let points = r.list_opt("points")?;
    let chunked = |values: Vec<f64>, key: &str, line: usize| -> Result<Vec<Vec<f64>>> {
        if values.is_empty() || !values.len().is_multiple_of(dim) {
            return Err(config_error(key, line, format!("expected a nonempty multiple of {dim} coordinates")));
        }
        Ok(values.chunks(dim).map(<[f64]>::to_vec).collect())
    };
    match (theta, directions, points) {
        (Some((t, line)), None, None) => {
            if dim != 2 {
                return Err(config_error("theta", line, "angles describe 2D directions"));
            }
            if t.is_empty() {
                return Err(config_error("theta", line, "needs at least one angle"));
            }
            Ok(Observations::Angles(t))
        }
        (None, Some((d, line)), None) => {
            let dirs = chunked(d, "directions", line)?;
            for v in &dirs {
                Direction::new(v.clone()).map_err(|e| config_error("directions", line, e.to_string()))?;
            }
            Ok(Observations::Directions(dirs))
        }
        (None, None, Some((p, line))) => Ok(Observations::Points(chunked(p, "points", line)?)),
        _ => Err(config_error("theta", r.section.line, "give exactly one of theta, directions or points")),
    }
}
