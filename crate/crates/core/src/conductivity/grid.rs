use std::io::Read;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Bilinear interpolation of conductivity samples on a rectilinear grid.
///
/// Points outside the grid's hull are clamped onto it, so the nearest cell is
/// used.
#[derive(Clone, Debug)]
pub struct GridSampler {
    xs: Vec<f64>,
    ys: Vec<f64>,
    // row-major in y: values[j * nx + i] = sigma(xs[i], ys[j])
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct Row {
    x: f64,
    y: f64,
    sigma: f64,
}

impl GridSampler {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || ys.len() < 2 {
            return Err(Error::validation("conductivity grid needs at least 2 x 2 nodes"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) || ys.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("grid coordinates must be strictly increasing"));
        }
        if values.len() != xs.len() * ys.len() {
            return Err(Error::validation(format!(
                "grid of {} x {} nodes needs {} values, got {}",
                xs.len(),
                ys.len(),
                xs.len() * ys.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::validation(format!("grid conductivity {v} is not positive")));
        }
        Ok(Self { xs, ys, values })
    }

    /// Reads `x,y,sigma` rows. Any row order is accepted as long as every
    /// grid node appears exactly once.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["x", "y", "sigma"] {
            return Err(Error::validation(format!(
                "conductivity csv header must be `x,y,sigma`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let rows = rdr.deserialize::<Row>().collect::<std::result::Result<Vec<_>, _>>()?;
        let mut xs: Vec<f64> = rows.iter().map(|r| r.x).collect();
        let mut ys: Vec<f64> = rows.iter().map(|r| r.y).collect();
        for v in [&mut xs, &mut ys] {
            v.sort_by(f64::total_cmp);
            v.dedup();
        }
        let (nx, ny) = (xs.len(), ys.len());
        if rows.len() != nx * ny {
            return Err(Error::validation(format!(
                "{} rows do not form a rectilinear {} x {} grid",
                rows.len(),
                nx,
                ny
            )));
        }
        let mut values = vec![f64::NAN; nx * ny];
        for r in &rows {
            let i = xs.partition_point(|&v| v < r.x);
            let j = ys.partition_point(|&v| v < r.y);
            let slot = &mut values[j * nx + i];
            if !slot.is_nan() {
                return Err(Error::validation(format!("duplicate grid node ({}, {})", r.x, r.y)));
            }
            *slot = r.sigma;
        }
        Self::new(xs, ys, values)
    }

    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn ny(&self) -> usize {
        self.ys.len()
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        let (i, tx) = locate(&self.xs, x);
        let (j, ty) = locate(&self.ys, y);
        let nx = self.xs.len();
        let v00 = self.values[j * nx + i];
        let v10 = self.values[j * nx + i + 1];
        let v01 = self.values[(j + 1) * nx + i];
        let v11 = self.values[(j + 1) * nx + i + 1];
        (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11)
    }
}

/// Cell index and local coordinate in `[0, 1]`, clamped to the grid.
fn locate(knots: &[f64], v: f64) -> (usize, f64) {
    let n = knots.len();
    let v = v.clamp(knots[0], knots[n - 1]);
    let i = (knots.partition_point(|&k| k <= v).max(1) - 1).min(n - 2);
    (i, (v - knots[i]) / (knots[i + 1] - knots[i]))
}
