//! Spatial supports, quadrature over them, and the ground-truth sets
//! (strip, Θ-hull, annulus) that reconstructions are scored against.
//!
//! Extents and distances are computed from dense boundary samples rather than
//! per-shape support functions, so unions need no special handling.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of boundary samples used for extents and distances.
pub const DEFAULT_BOUNDARY_SAMPLES: usize = 100_000;

/// Parameters of the standard kite boundary
/// `(cos t + 0.65 cos 2t - 0.65, 1.5 sin t)`.
const KITE_BEND: f64 = 0.65;
const KITE_HEIGHT: f64 = 1.5;

/// Unit vector in two or three dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction(Vec<f64>);

impl Direction {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        check_dimension(components.len())?;
        let norm = components.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("direction must have unit length, got |x| = {norm}")));
        }
        Ok(Self(components))
    }

    /// Normalizes `components`; fails on the zero vector.
    pub fn normalized(components: Vec<f64>) -> Result<Self> {
        check_dimension(components.len())?;
        let norm = components.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        Ok(Self(components.into_iter().map(|c| c / norm).collect()))
    }

    /// 2D direction `(cos θ, sin θ)`.
    pub fn from_angle(theta: f64) -> Self {
        Self(vec![theta.cos(), theta.sin()])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, point: &[f64]) -> f64 {
        dot(&self.0, point)
    }
}

fn check_dimension(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("dimension must be 2 or 3, got {dim}")))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Ball { center: Vec<f64>, radius: f64 },
    Cube { center: Vec<f64>, half_widths: Vec<f64> },
    Ellipse { center: [f64; 2], semi_axes: [f64; 2] },
    Kite { center: [f64; 2], scale: f64 },
    Union(Vec<SupportDomain>),
}

/// Bounded spatial support `D` in two or three dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportDomain {
    shape: Shape,
    dim: usize,
}

impl SupportDomain {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_dimension(center.len())?;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!("ball radius must be positive, got {radius}")));
        }
        let dim = center.len();
        Ok(Self { shape: Shape::Ball { center, radius }, dim })
    }

    pub fn cube(center: Vec<f64>, half_widths: Vec<f64>) -> Result<Self> {
        check_dimension(center.len())?;
        if half_widths.len() != center.len() {
            return Err(Error::InvalidArgument("cube center and half-widths differ in length".into()));
        }
        if half_widths.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
            return Err(Error::InvalidArgument("cube half-widths must be positive".into()));
        }
        let dim = center.len();
        Ok(Self { shape: Shape::Cube { center, half_widths }, dim })
    }

    pub fn ellipse(center: [f64; 2], semi_axes: [f64; 2]) -> Result<Self> {
        if semi_axes.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidArgument("ellipse semi-axes must be positive".into()));
        }
        Ok(Self { shape: Shape::Ellipse { center, semi_axes }, dim: 2 })
    }

    /// Standard kite, scaled about its parametrization origin and translated to `center`.
    pub fn kite(center: [f64; 2], scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidArgument(format!("kite scale must be positive, got {scale}")));
        }
        Ok(Self { shape: Shape::Kite { center, scale }, dim: 2 })
    }

    /// Union of pairwise-disjoint components; overlap is detected by sampled membership.
    pub fn union(components: Vec<SupportDomain>) -> Result<Self> {
        let first =
            components.first().ok_or_else(|| Error::InvalidArgument("union needs at least one component".into()))?;
        let dim = first.dim;
        if components.iter().any(|c| c.dim != dim) {
            return Err(Error::InvalidArgument("union components differ in dimension".into()));
        }
        for (i, a) in components.iter().enumerate() {
            let rule = build_quadrature(a, if dim == 2 { 64 } else { 24 })?;
            for b in components.iter().skip(i + 1) {
                if rule.nodes().any(|p| b.contains_unchecked(p)) {
                    return Err(Error::InvalidGeometry("union components overlap".into()));
                }
            }
        }
        Ok(Self { shape: Shape::Union(components), dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Membership in the open region.
    pub fn contains(&self, point: &[f64]) -> Result<bool> {
        self.check_point(point)?;
        Ok(self.contains_unchecked(point))
    }

    /// Membership in the closure (boundary counts as inside).
    pub fn contains_closed(&self, point: &[f64]) -> Result<bool> {
        self.check_point(point)?;
        Ok(self.membership(point, true))
    }

    fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "point has dimension {}, domain has dimension {}",
                point.len(),
                self.dim
            )));
        }
        Ok(())
    }

    pub(crate) fn contains_unchecked(&self, point: &[f64]) -> bool {
        self.membership(point, false)
    }

    fn membership(&self, p: &[f64], closed: bool) -> bool {
        let below = |a: f64, b: f64| if closed { a <= b } else { a < b };
        match &self.shape {
            Shape::Ball { center, radius } => {
                let r2: f64 = p.iter().zip(center).map(|(x, c)| (x - c) * (x - c)).sum();
                below(r2, radius * radius)
            }
            Shape::Cube { center, half_widths } => {
                p.iter().zip(center).zip(half_widths).all(|((x, c), h)| below((x - c).abs(), *h))
            }
            Shape::Ellipse { center, semi_axes } => {
                let u = (p[0] - center[0]) / semi_axes[0];
                let v = (p[1] - center[1]) / semi_axes[1];
                below(u * u + v * v, 1.0)
            }
            Shape::Kite { center, scale } => {
                let x = (p[0] - center[0]) / scale;
                let y = (p[1] - center[1]) / scale;
                // A horizontal line meets the boundary where sin t = y / 1.5,
                // so every cross-section is a single interval.
                let s = y / KITE_HEIGHT;
                if !below(s.abs(), 1.0) {
                    return false;
                }
                let c = (1.0 - s * s).max(0.0).sqrt();
                let shift = 2.0 * KITE_BEND * s * s;
                below(-c - shift, x) && below(x, c - shift)
            }
            Shape::Union(parts) => parts.iter().any(|d| d.membership(p, closed)),
        }
    }

    /// Axis-aligned box `(lower, upper)` containing the closure of the domain.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.shape {
            Shape::Ball { center, radius } => {
                (center.iter().map(|c| c - radius).collect(), center.iter().map(|c| c + radius).collect())
            }
            Shape::Cube { center, half_widths } => (
                center.iter().zip(half_widths).map(|(c, h)| c - h).collect(),
                center.iter().zip(half_widths).map(|(c, h)| c + h).collect(),
            ),
            Shape::Ellipse { center, semi_axes } => (
                vec![center[0] - semi_axes[0], center[1] - semi_axes[1]],
                vec![center[0] + semi_axes[0], center[1] + semi_axes[1]],
            ),
            Shape::Kite { center, scale } => {
                // min over c = cos t of -c - 2·0.65(1 - c²), attained at c = 1/(4·0.65)
                let c = 1.0 / (4.0 * KITE_BEND);
                let x_min = -c - 2.0 * KITE_BEND * (1.0 - c * c);
                (
                    vec![center[0] + scale * x_min, center[1] - scale * KITE_HEIGHT],
                    vec![center[0] + scale, center[1] + scale * KITE_HEIGHT],
                )
            }
            Shape::Union(parts) => {
                let mut lower = vec![f64::INFINITY; self.dim];
                let mut upper = vec![f64::NEG_INFINITY; self.dim];
                for part in parts {
                    let (lo, hi) = part.bounding_box();
                    for i in 0..self.dim {
                        lower[i] = lower[i].min(lo[i]);
                        upper[i] = upper[i].max(hi[i]);
                    }
                }
                (lower, upper)
            }
        }
    }

    /// Dense sample of the boundary (flattened, `dim` coordinates per point).
    pub fn boundary_samples(&self, count: usize) -> Vec<f64> {
        let count = count.max(8);
        let mut out = Vec::with_capacity(count * self.dim);
        self.push_boundary_samples(count, &mut out);
        out
    }

    fn push_boundary_samples(&self, count: usize, out: &mut Vec<f64>) {
        match &self.shape {
            Shape::Ball { center, radius } if self.dim == 2 => {
                for j in 0..count {
                    let t = 2.0 * PI * j as f64 / count as f64;
                    out.extend([center[0] + radius * t.cos(), center[1] + radius * t.sin()]);
                }
            }
            Shape::Ball { center, radius } => {
                // Fibonacci lattice on the sphere
                let golden = PI * (3.0 - 5f64.sqrt());
                for j in 0..count {
                    let z = 1.0 - 2.0 * (j as f64 + 0.5) / count as f64;
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * j as f64;
                    out.extend([
                        center[0] + radius * rho * phi.cos(),
                        center[1] + radius * rho * phi.sin(),
                        center[2] + radius * z,
                    ]);
                }
            }
            Shape::Cube { center, half_widths } if self.dim == 2 => {
                let per_edge = (count / 4).max(2);
                for j in 0..per_edge {
                    let s = -1.0 + 2.0 * j as f64 / (per_edge - 1) as f64;
                    for (u, v) in [(s, -1.0), (s, 1.0), (-1.0, s), (1.0, s)] {
                        out.extend([center[0] + u * half_widths[0], center[1] + v * half_widths[1]]);
                    }
                }
            }
            Shape::Cube { center, half_widths } => {
                // odd per-face grid so face centers are sampled exactly
                let mut m = ((count as f64 / 6.0).sqrt() as usize).max(3);
                if m.is_multiple_of(2) {
                    m += 1;
                }
                let coord = |j: usize| -1.0 + 2.0 * j as f64 / (m - 1) as f64;
                for axis in 0..3 {
                    let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
                    for side in [-1.0, 1.0] {
                        for i in 0..m {
                            for j in 0..m {
                                let mut p = [0.0; 3];
                                p[axis] = side;
                                p[a] = coord(i);
                                p[b] = coord(j);
                                out.extend((0..3).map(|d| center[d] + p[d] * half_widths[d]));
                            }
                        }
                    }
                }
            }
            Shape::Ellipse { center, semi_axes } => {
                for j in 0..count {
                    let t = 2.0 * PI * j as f64 / count as f64;
                    out.extend([center[0] + semi_axes[0] * t.cos(), center[1] + semi_axes[1] * t.sin()]);
                }
            }
            Shape::Kite { center, scale } => {
                for j in 0..count {
                    let t = 2.0 * PI * j as f64 / count as f64;
                    let (x, y) = kite_boundary(t);
                    out.extend([center[0] + scale * x, center[1] + scale * y]);
                }
            }
            Shape::Union(parts) => {
                let share = (count / parts.len()).max(8);
                for part in parts {
                    part.push_boundary_samples(share, out);
                }
            }
        }
    }

    /// Area (2D) or volume (3D) where a closed form is known.
    pub fn measure(&self) -> Option<f64> {
        match &self.shape {
            Shape::Ball { radius, .. } if self.dim == 2 => Some(PI * radius * radius),
            Shape::Ball { radius, .. } => Some(4.0 / 3.0 * PI * radius.powi(3)),
            Shape::Cube { half_widths, .. } => Some(half_widths.iter().map(|h| 2.0 * h).product()),
            Shape::Ellipse { semi_axes, .. } => Some(PI * semi_axes[0] * semi_axes[1]),
            Shape::Kite { scale, .. } => Some(PI * KITE_HEIGHT * scale * scale),
            Shape::Union(parts) => parts.iter().map(|p| p.measure()).sum(),
        }
    }
}

/// Point on the unscaled kite boundary at parameter `t`.
pub fn kite_boundary(t: f64) -> (f64, f64) {
    (t.cos() + KITE_BEND * (2.0 * t).cos() - KITE_BEND, KITE_HEIGHT * t.sin())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum QuadratureScheme {
    /// Midpoint rule on a uniform Cartesian grid over the bounding box, masked by membership.
    #[default]
    Cartesian,
    /// Gauss–Legendre in radius (and polar angle in 3D) with a uniform azimuthal rule. Balls only.
    Polar,
}

/// Positive-weight quadrature rule whose nodes all lie inside the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    resolution: usize,
}

impl QuadratureRule {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.nodes().zip(self.weights.iter().copied())
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Midpoint rule on a `resolution`-per-axis grid over the bounding box, masked by membership.
pub fn build_quadrature(domain: &SupportDomain, resolution: usize) -> Result<QuadratureRule> {
    build_quadrature_with(domain, resolution, QuadratureScheme::Cartesian)
}

pub fn build_quadrature_with(
    domain: &SupportDomain,
    resolution: usize,
    scheme: QuadratureScheme,
) -> Result<QuadratureRule> {
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!("resolution must be at least 2, got {resolution}")));
    }
    let rule = match scheme {
        QuadratureScheme::Cartesian => cartesian_rule(domain, resolution),
        QuadratureScheme::Polar => match domain.shape() {
            Shape::Ball { center, radius } => polar_rule(center, *radius, resolution),
            _ => return Err(Error::InvalidArgument("the polar quadrature scheme is only available for balls".into())),
        },
    };
    if rule.is_empty() {
        return Err(Error::ResolutionTooCoarse { resolution });
    }
    Ok(rule)
}

fn cartesian_rule(domain: &SupportDomain, resolution: usize) -> QuadratureRule {
    let dim = domain.dim();
    let (lower, upper) = domain.bounding_box();
    let h: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| (u - l) / resolution as f64).collect();
    let cell: f64 = h.iter().product();
    let total = resolution.pow(dim as u32);
    let mut coords = Vec::new();
    let mut point = vec![0.0; dim];
    for flat in 0..total {
        let mut rest = flat;
        for axis in (0..dim).rev() {
            let i = rest % resolution;
            rest /= resolution;
            point[axis] = lower[axis] + (i as f64 + 0.5) * h[axis];
        }
        if domain.contains_unchecked(&point) {
            coords.extend_from_slice(&point);
        }
    }
    let n = coords.len() / dim;
    QuadratureRule { dim, coords, weights: vec![cell; n], resolution }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule mapped to `(a, b)`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let degree = NonZeroUsize::new(n.max(1)).expect("nonzero");
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GaussLegendre::new(degree).as_node_weight_pairs().iter().map(|&(x, w)| (mid + half * x, half * w)).collect()
}

fn polar_rule(center: &[f64], radius: f64, n: usize) -> QuadratureRule {
    let dim = center.len();
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    let azimuthal = if dim == 2 { 2 * n } else { n };
    let dphi = 2.0 * PI / azimuthal as f64;
    let radial = gauss_legendre(n, 0.0, radius);
    if dim == 2 {
        for &(r, wr) in &radial {
            for j in 0..azimuthal {
                let phi = (j as f64 + 0.5) * dphi;
                coords.extend([center[0] + r * phi.cos(), center[1] + r * phi.sin()]);
                weights.push(wr * r * dphi);
            }
        }
    } else {
        let polar = gauss_legendre(n, -1.0, 1.0);
        for &(r, wr) in &radial {
            for &(z, wz) in &polar {
                let rho = (1.0 - z * z).sqrt();
                for j in 0..azimuthal {
                    let phi = (j as f64 + 0.5) * dphi;
                    coords.extend([
                        center[0] + r * rho * phi.cos(),
                        center[1] + r * rho * phi.sin(),
                        center[2] + r * z,
                    ]);
                    weights.push(wr * r * r * wz * dphi);
                }
            }
        }
    }
    QuadratureRule { dim, coords, weights, resolution: n }
}

/// The interval `(inf x̂·D, sup x̂·D)` together with its direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionalExtent {
    pub low: f64,
    pub high: f64,
    pub direction: Direction,
}

impl DirectionalExtent {
    pub fn width(&self) -> f64 {
        self.high - self.low
    }

    /// Distance from `x̂·y` to the interval; zero inside.
    pub fn gap(&self, point: &[f64]) -> f64 {
        let p = self.direction.dot(point);
        (self.low - p).max(p - self.high).max(0.0)
    }
}

pub fn directional_extent(domain: &SupportDomain, direction: &Direction) -> Result<DirectionalExtent> {
    directional_extent_with(domain, direction, DEFAULT_BOUNDARY_SAMPLES)
}

pub fn directional_extent_with(
    domain: &SupportDomain,
    direction: &Direction,
    samples: usize,
) -> Result<DirectionalExtent> {
    if direction.dim() != domain.dim() {
        return Err(Error::InvalidArgument("direction and domain differ in dimension".into()));
    }
    let boundary = domain.boundary_samples(samples);
    let (low, high) = boundary
        .chunks_exact(domain.dim())
        .map(|p| direction.dot(p))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    Ok(DirectionalExtent { low, high, direction: direction.clone() })
}

/// Membership in the open strip `K_D = {y : low < x̂·y < high}`.
pub fn strip_membership(extent: &DirectionalExtent, point: &[f64]) -> bool {
    let p = extent.direction.dot(point);
    extent.low < p && p < extent.high
}

/// Intersection of the strips of every extent.
pub fn theta_hull_membership(extents: &[DirectionalExtent], point: &[f64]) -> Result<bool> {
    if extents.is_empty() {
        return Err(Error::InvalidArgument("Θ-hull needs at least one extent".into()));
    }
    Ok(extents.iter().all(|e| strip_membership(e, point)))
}

/// Minimum and maximum distance from an exterior point to the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusRadii {
    pub inner: f64,
    pub outer: f64,
}

impl AnnulusRadii {
    pub fn contains(&self, observation_point: &[f64], query: &[f64]) -> bool {
        let d = distance(observation_point, query);
        self.inner < d && d < self.outer
    }
}

pub fn annulus_radii(domain: &SupportDomain, observation_point: &[f64]) -> Result<AnnulusRadii> {
    annulus_radii_with(domain, observation_point, DEFAULT_BOUNDARY_SAMPLES)
}

pub fn annulus_radii_with(domain: &SupportDomain, observation_point: &[f64], samples: usize) -> Result<AnnulusRadii> {
    domain.check_point(observation_point)?;
    let (lower, upper) = domain.bounding_box();
    let inside_box = observation_point.iter().zip(lower.iter().zip(&upper)).all(|(x, (l, u))| *l <= *x && *x <= *u);
    if inside_box {
        return Err(Error::InvalidGeometry("observation point must lie outside the domain's bounding box".into()));
    }
    let boundary = domain.boundary_samples(samples);
    let (inner, outer) = boundary
        .chunks_exact(domain.dim())
        .map(|z| distance(observation_point, z))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| (lo.min(d), hi.max(d)));
    Ok(AnnulusRadii { inner, outer })
}

/// Membership in the open annulus `inf|x - z| < |x - y| < sup|x - z|`.
pub fn annulus_membership(domain: &SupportDomain, observation_point: &[f64], query: &[f64]) -> Result<bool> {
    domain.check_point(query)?;
    Ok(annulus_radii(domain, observation_point)?.contains(observation_point, query))
}

/// Whether the projections of `d1` and `d2` onto `direction` are separated by more than `duration`.
pub fn separable_along(d1: &SupportDomain, d2: &SupportDomain, direction: &Direction, duration: f64) -> Result<bool> {
    if d1.dim() != d2.dim() {
        return Err(Error::InvalidArgument("domains differ in dimension".into()));
    }
    if !(duration >= 0.0) {
        return Err(Error::InvalidArgument(format!("duration must be nonnegative, got {duration}")));
    }
    let e1 = directional_extent(d1, direction)?;
    let e2 = directional_extent(d2, direction)?;
    Ok(e2.low - e1.high > duration || e1.low - e2.high > duration)
}
