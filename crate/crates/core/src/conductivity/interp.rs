use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolantKind {
    #[default]
    Linear,
    /// Natural cubic spline. May undershoot between positive samples.
    CubicSpline,
}

/// One-dimensional interpolant in `y`, clamped to the end values outside the
/// sampled range.
#[derive(Clone, Debug)]
pub struct Interpolant {
    knots: Vec<f64>,
    values: Vec<f64>,
    // second derivatives at the knots, spline only
    curvature: Option<Vec<f64>>,
}

impl Interpolant {
    pub fn new(samples: &[(f64, f64)], kind: InterpolantKind) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::validation(format!(
                "interpolant needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::validation(format!(
                    "sample ordinates must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if let Some((y, s)) = samples.iter().find(|(_, s)| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::validation(format!("conductivity sample {s} at y = {y} is not positive")));
        }
        let knots: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let values: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let curvature = match kind {
            InterpolantKind::Linear => None,
            InterpolantKind::CubicSpline => Some(natural_spline(&knots, &values)),
        };
        Ok(Self {
            knots,
            values,
            curvature,
        })
    }

    pub fn eval(&self, y: f64) -> f64 {
        let n = self.knots.len();
        if y <= self.knots[0] {
            return self.values[0];
        }
        if y >= self.knots[n - 1] {
            return self.values[n - 1];
        }
        let i = self.knots.partition_point(|&k| k <= y) - 1;
        let (y0, y1) = (self.knots[i], self.knots[i + 1]);
        let h = y1 - y0;
        let a = (y1 - y) / h;
        let b = (y - y0) / h;
        let linear = a * self.values[i] + b * self.values[i + 1];
        match &self.curvature {
            None => linear,
            Some(m) => linear + ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0,
        }
    }
}

fn natural_spline(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior equations
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let diag = 2.0 * (h0 + h1);
        let rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        let denom = diag - h0 * c_prime[i - 1];
        c_prime[i] = h1 / denom;
        d_prime[i] = (rhs - h0 * d_prime[i - 1]) / denom;
    }
    for i in (1..n - 1).rev() {
        m[i] = d_prime[i] - c_prime[i] * m[i + 1];
    }
    m
}
