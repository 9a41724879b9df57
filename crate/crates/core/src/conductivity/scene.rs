use serde::{Deserialize, Serialize};

use super::DOMAIN_TOL;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Geometry {
    /// `(x - cx)^2 + (y - cy)^2 <= r2`; `r2` is the squared radius.
    Disk { cx: f64, cy: f64, r2: f64 },
    /// `r_in <= |(x, y) - (cx, cy)| <= r_out`.
    Annulus { cx: f64, cy: f64, r_in: f64, r_out: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    #[serde(flatten)]
    pub geometry: Geometry,
    pub value: f64,
}

/// Piecewise-constant conductivity: a background value overridden by closed
/// shapes, the last listed shape containing a point winning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricScene {
    pub background: f64,
    #[serde(default)]
    pub shapes: Vec<Shape>,
}

impl Geometry {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            Geometry::Disk { cx, cy, r2 } => (x - cx).powi(2) + (y - cy).powi(2) <= r2 + DOMAIN_TOL,
            Geometry::Annulus { cx, cy, r_in, r_out } => {
                let d = (x - cx).hypot(y - cy);
                d >= r_in - DOMAIN_TOL && d <= r_out + DOMAIN_TOL
            }
            Geometry::Polygon { vertices } => polygon_contains(vertices, x, y),
        }
    }

    fn boundary_distance(&self, x: f64, y: f64) -> f64 {
        match self {
            Geometry::Disk { cx, cy, r2 } => ((x - cx).hypot(y - cy) - r2.sqrt()).abs(),
            Geometry::Annulus { cx, cy, r_in, r_out } => {
                let d = (x - cx).hypot(y - cy);
                (d - r_in).abs().min((d - r_out).abs())
            }
            Geometry::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| segment_distance(vertices[i], vertices[(i + 1) % n], x, y))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Geometry::Disk { r2, .. } if !(r2.is_finite() && *r2 > 0.0) => {
                Err(Error::validation(format!("disk squared radius {r2} must be positive")))
            }
            Geometry::Annulus { r_in, r_out, .. } if !(*r_in >= 0.0 && r_out > r_in) => Err(Error::validation(
                format!("annulus radii must satisfy 0 <= r_in < r_out, got {r_in}, {r_out}"),
            )),
            Geometry::Polygon { vertices } if vertices.len() < 3 => Err(Error::validation(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            ))),
            _ => Ok(()),
        }
    }
}

impl GeometricScene {
    pub fn new(background: f64, shapes: Vec<Shape>) -> Result<Self> {
        let scene = Self { background, shapes };
        scene.validate()?;
        Ok(scene)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let scene: Self = serde_json::from_str(text)?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.background.is_finite() && self.background > 0.0) {
            return Err(Error::validation(format!(
                "scene background {} must be positive",
                self.background
            )));
        }
        for (i, s) in self.shapes.iter().enumerate() {
            if !(s.value.is_finite() && s.value > 0.0) {
                return Err(Error::validation(format!("shape {i} value {} must be positive", s.value)));
            }
            s.geometry.validate()?;
        }
        Ok(())
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.shapes
            .iter()
            .rev()
            .find(|s| s.geometry.contains(x, y))
            .map_or(self.background, |s| s.value)
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.shapes.iter().fold((self.background, self.background), |(lo, hi), s| {
            (lo.min(s.value), hi.max(s.value))
        })
    }

    pub(crate) fn boundary_distance(&self, x: f64, y: f64) -> f64 {
        self.shapes
            .iter()
            .map(|s| s.geometry.boundary_distance(x, y))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn vertices(&self) -> Vec<(f64, f64)> {
        self.shapes
            .iter()
            .filter_map(|s| match &s.geometry {
                Geometry::Polygon { vertices } => Some(vertices.iter().map(|v| (v[0], v[1]))),
                _ => None,
            })
            .flatten()
            .collect()
    }
}

fn segment_distance(a: [f64; 2], b: [f64; 2], x: f64, y: f64) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((x - a[0]) * dx + (y - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (x - a[0] - t * dx).hypot(y - a[1] - t * dy)
}

/// Closed membership: crossing-number test plus an on-edge check.
fn polygon_contains(vertices: &[[f64; 2]], x: f64, y: f64) -> bool {
    let n = vertices.len();
    let mut inside = false;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if segment_distance(a, b, x, y) <= DOMAIN_TOL {
            return true;
        }
        if (a[1] > y) != (b[1] > y) {
            let x_cross = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}
