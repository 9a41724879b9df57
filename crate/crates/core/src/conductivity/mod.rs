//! Conductivity fields on the closed unit disk.
//!
//! Four variants are supported: analytic separable products
//! `sigma1(x) * sigma2(y)`, slab-wise piecewise separable approximations,
//! general fields treated as the limit case of the slab construction, and
//! geometric scenes made of disks, annuli and polygons.

mod grid;
mod interp;
mod piecewise;
mod scene;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use grid::GridSampler;
pub use interp::{Interpolant, InterpolantKind};
pub use piecewise::{build_piecewise, build_piecewise_with, sample_piecewise, PiecewiseSeparable, Slab};
pub use scene::{GeometricScene, Geometry, Shape};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type FieldFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Slack allowed on `x^2 + y^2 <= 1` and on shape membership tests.
pub const DOMAIN_TOL: f64 = 1e-12;

/// Ring edges of the radial piecewise conductivity and the value on each ring.
const RADIAL_RINGS: [(f64, f64); 5] = [(0.2, 100.0), (0.4, 30.0), (0.6, 20.0), (0.8, 15.0), (1.0, 30.0)];

/// `sigma(x, y) = sigma1(x) * sigma2(y)`. A missing `sigma1` means `sigma1 == 1`.
#[derive(Clone)]
pub struct AnalyticSeparable {
    sigma_x: Option<ScalarFn>,
    sigma_y: ScalarFn,
}

impl AnalyticSeparable {
    pub fn new(
        sigma_x: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sigma_y: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            sigma_x: Some(Arc::new(sigma_x)),
            sigma_y: Arc::new(sigma_y),
        }
    }

    /// A field depending on `y` only; its generating sequence has period 1.
    pub fn y_only(sigma_y: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            sigma_x: None,
            sigma_y: Arc::new(sigma_y),
        }
    }

    pub fn sigma_x(&self, x: f64) -> f64 {
        self.sigma_x.as_ref().map_or(1.0, |f| f(x))
    }

    pub fn sigma_y(&self, y: f64) -> f64 {
        (self.sigma_y)(y)
    }

    pub fn depends_on_x(&self) -> bool {
        self.sigma_x.is_some()
    }

    /// Checks `sigma1 > 0` and `sigma2 > 0` on `[-1, 1]` at 2001 sample points.
    pub fn validate(&self) -> Result<()> {
        for i in 0..=2000 {
            let t = -1.0 + 2.0 * i as f64 / 2000.0;
            let (sx, sy) = (self.sigma_x(t), self.sigma_y(t));
            if !(sx.is_finite() && sx > 0.0) {
                return Err(Error::validation(format!("sigma1({t}) = {sx} is not positive")));
            }
            if !(sy.is_finite() && sy > 0.0) {
                return Err(Error::validation(format!("sigma2({t}) = {sy} is not positive")));
            }
        }
        Ok(())
    }
}

/// Evaluators accepted by the limit-case variant.
#[derive(Clone)]
pub enum Sampler {
    Uniform(f64),
    Closure(FieldFn),
    /// The five-ring radial conductivity, see [`eval_radial_piecewise`].
    RadialRings,
    Scene(GeometricScene),
    Grid(GridSampler),
}

/// A general field used directly as `p = sqrt(sigma)`, the limit of the
/// piecewise separable construction as the slab count grows.
#[derive(Clone)]
pub struct LimitCase {
    pub sampler: Sampler,
}

#[derive(Clone)]
pub enum ConductivityField {
    AnalyticSeparable(AnalyticSeparable),
    PiecewiseSeparable(PiecewiseSeparable),
    LimitCase(LimitCase),
    GeometricScene(GeometricScene),
}

impl fmt::Debug for ConductivityField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::AnalyticSeparable(a) => {
                write!(f, "AnalyticSeparable {{ depends_on_x: {} }}", a.depends_on_x())
            }
            Self::PiecewiseSeparable(p) => write!(f, "PiecewiseSeparable {{ slabs: {} }}", p.slabs().len()),
            Self::LimitCase(l) => match &l.sampler {
                Sampler::Uniform(v) => write!(f, "LimitCase(Uniform({v}))"),
                Sampler::Closure(_) => write!(f, "LimitCase(Closure)"),
                Sampler::RadialRings => write!(f, "LimitCase(RadialRings)"),
                Sampler::Scene(s) => write!(f, "LimitCase({s:?})"),
                Sampler::Grid(g) => write!(f, "LimitCase(Grid {}x{})", g.nx(), g.ny()),
            },
            Self::GeometricScene(s) => write!(f, "{s:?}"),
        }
    }
}

impl ConductivityField {
    pub fn uniform(value: f64) -> Self {
        Self::LimitCase(LimitCase {
            sampler: Sampler::Uniform(value),
        })
    }

    pub fn radial_rings() -> Self {
        Self::LimitCase(LimitCase {
            sampler: Sampler::RadialRings,
        })
    }

    pub fn limit_closure(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::LimitCase(LimitCase {
            sampler: Sampler::Closure(Arc::new(f)),
        })
    }

    /// `sigma(x, y)`; fails outside the closed unit disk or on a non-positive value.
    pub fn evaluate(&self, x: f64, y: f64) -> Result<f64> {
        if !(x.is_finite() && y.is_finite()) || x * x + y * y > 1.0 + DOMAIN_TOL {
            return Err(Error::domain(format!("point ({x}, {y}) lies outside the unit disk")));
        }
        let v = self.raw_value(x, y)?;
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::validation(format!("conductivity at ({x}, {y}) is {v}, expected > 0")));
        }
        Ok(v)
    }

    fn raw_value(&self, x: f64, y: f64) -> Result<f64> {
        Ok(match self {
            Self::AnalyticSeparable(a) => a.sigma_x(x) * a.sigma_y(y),
            Self::PiecewiseSeparable(p) => p.value(x, y),
            Self::GeometricScene(s) => s.value(x, y),
            Self::LimitCase(l) => match &l.sampler {
                Sampler::Uniform(v) => *v,
                Sampler::Closure(f) => f(x, y),
                Sampler::RadialRings => eval_radial_piecewise(snapped_radius(x, y))?,
                Sampler::Scene(s) => s.value(x, y),
                Sampler::Grid(g) => g.value(x, y),
            },
        })
    }

    /// `(sigma_min, sigma_max)`. Exact for the discrete variants; analytic
    /// closures are bounded from a 201 x 201 sampling of the disk.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Self::LimitCase(LimitCase {
                sampler: Sampler::Uniform(v),
            }) => (*v, *v),
            Self::LimitCase(LimitCase {
                sampler: Sampler::RadialRings,
            }) => (15.0, 100.0),
            Self::LimitCase(LimitCase {
                sampler: Sampler::Scene(s),
            })
            | Self::GeometricScene(s) => s.bounds(),
            Self::LimitCase(LimitCase {
                sampler: Sampler::Grid(g),
            }) => g.bounds(),
            _ => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for i in 0..=200 {
                    for j in 0..=200 {
                        let x = -1.0 + i as f64 / 100.0;
                        let y = -1.0 + j as f64 / 100.0;
                        if x * x + y * y <= 1.0 {
                            if let Ok(v) = self.raw_value(x, y) {
                                lo = lo.min(v);
                                hi = hi.max(v);
                            }
                        }
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Distance from `(x, y)` to the nearest jump of the field, `INFINITY` for
    /// smooth variants.
    pub fn discontinuity_distance(&self, x: f64, y: f64) -> f64 {
        match self {
            Self::GeometricScene(s)
            | Self::LimitCase(LimitCase {
                sampler: Sampler::Scene(s),
            }) => s.boundary_distance(x, y),
            Self::LimitCase(LimitCase {
                sampler: Sampler::RadialRings,
            }) => {
                let r = x.hypot(y);
                RADIAL_RINGS[..4]
                    .iter()
                    .map(|(edge, _)| (r - edge).abs())
                    .fold(f64::INFINITY, f64::min)
            }
            Self::PiecewiseSeparable(p) => p.edge_distance(x),
            _ => f64::INFINITY,
        }
    }

    /// Polygon vertices that radial rays should pass through.
    pub fn corners(&self) -> Vec<(f64, f64)> {
        match self {
            Self::GeometricScene(s)
            | Self::LimitCase(LimitCase {
                sampler: Sampler::Scene(s),
            }) => s.vertices(),
            _ => Vec::new(),
        }
    }
}

/// Radius rounded to 1e-12 so ring edges that coincide with mesh nodes are
/// classified the same way on every ray.
fn snapped_radius(x: f64, y: f64) -> f64 {
    (x.hypot(y) * 1e12).round() / 1e12
}

/// The radial five-ring conductivity: 100 on `[0, 0.2)`, 30 on `[0.2, 0.4)`,
/// 20 on `[0.4, 0.6)`, 15 on `[0.6, 0.8)` and 30 on `[0.8, 1]`.
pub fn eval_radial_piecewise(r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::domain(format!("radius {r} outside [0, 1]")));
    }
    Ok(RADIAL_RINGS
        .iter()
        .find(|(edge, _)| r < *edge)
        .map_or(RADIAL_RINGS[4].1, |(_, v)| *v))
}
