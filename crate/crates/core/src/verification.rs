//! Exact solutions and finite-difference oracles for `div(sigma grad u) = 0`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conductivity::{AnalyticSeparable, ConductivityField};
use crate::error::{Error, Result};

pub type PotentialFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A conductivity with a known potential solving the equation in the disk.
#[derive(Clone)]
pub struct ExactCase {
    pub name: String,
    pub sigma: ConductivityField,
    pub u: PotentialFn,
    /// `omega` for the sinusoidal family, `beta` for the Lorentzian one.
    pub param: f64,
    pub notes: String,
}

impl std::fmt::Debug for ExactCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExactCase")
            .field("name", &self.name)
            .field("param", &self.param)
            .finish()
    }
}

impl ExactCase {
    pub fn potential(&self, x: f64, y: f64) -> f64 {
        (self.u)(x, y)
    }

    pub fn divergence(&self, pts: &[(f64, f64)], h: f64) -> Result<DivergenceReport> {
        let sigma = |x: f64, y: f64| self.sigma.evaluate(x, y);
        divergence_residual(&sigma, &*self.u, pts, h)
    }
}

/// How the sinusoidal potential is evaluated near `omega = pi`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SinusoidalBranch {
    /// Continuous extension of `arctan(tan(.))` on the closed disk.
    #[default]
    Continuous,
    /// Principal-branch formula at `omega - eps`, for cross-checking.
    Epsilon { eps: f64 },
}

pub fn sinusoidal_case(omega: f64) -> Result<ExactCase> {
    sinusoidal_case_with(omega, SinusoidalBranch::Continuous)
}

/// `sigma = (2 + cos(omega x)) (2 + sin(omega y))` with
/// `u = (2/sqrt 3) [arctan(tan(omega x/2)/sqrt 3) + arctan((1 + 2 tan(omega y/2))/sqrt 3)]`.
pub fn sinusoidal_case_with(omega: f64, branch: SinusoidalBranch) -> Result<ExactCase> {
    if !(omega > 0.0 && omega <= PI) {
        return Err(Error::validation(format!("omega = {omega} must lie in (0, pi]")));
    }
    let s3 = 3f64.sqrt();
    let u: PotentialFn = match branch {
        SinusoidalBranch::Continuous => Arc::new(move |x, y| {
            // |omega x / 2| <= pi/2, so cos >= 0 and atan2 gives the continuous branch
            let (sx, cx) = (0.5 * omega * x).sin_cos();
            let (sy, cy) = (0.5 * omega * y).sin_cos();
            (2.0 / s3) * (sx.atan2(s3 * cx) + (cy + 2.0 * sy).atan2(s3 * cy))
        }),
        SinusoidalBranch::Epsilon { eps } => {
            let w = omega - eps;
            if !(w > 0.0) {
                return Err(Error::validation(format!("omega - eps = {w} must be positive")));
            }
            Arc::new(move |x, y| {
                (2.0 / s3) * (((0.5 * w * x).tan() / s3).atan() + ((1.0 + 2.0 * (0.5 * w * y).tan()) / s3).atan())
            })
        }
    };
    let sigma_omega = match branch {
        SinusoidalBranch::Continuous => omega,
        SinusoidalBranch::Epsilon { eps } => omega - eps,
    };
    Ok(ExactCase {
        name: "sinusoidal".into(),
        sigma: ConductivityField::AnalyticSeparable(AnalyticSeparable::new(
            move |x| 2.0 + (sigma_omega * x).cos(),
            move |y| 2.0 + (sigma_omega * y).sin(),
        )),
        u,
        param: omega,
        notes: format!("omega = {omega}, branch {branch:?}"),
    })
}

/// `sigma = 1 / (((x - beta)^2 + 0.1) (y^2 + 0.1))` with
/// `u = ((x - beta)^3 + y^3)/3 + 0.1 (x - beta + y)`.
pub fn lorentzian_case(beta: f64) -> ExactCase {
    ExactCase {
        name: "lorentzian".into(),
        sigma: ConductivityField::AnalyticSeparable(AnalyticSeparable::new(
            move |x| 1.0 / ((x - beta).powi(2) + 0.1),
            |y| 1.0 / (y * y + 0.1),
        )),
        u: Arc::new(move |x, y| cubic_trace(x - beta, y)),
        param: beta,
        notes: format!("beta = {beta}"),
    }
}

/// `(x^3 + y^3)/3 + 0.1 (x + y)`.
pub fn cubic_trace(x: f64, y: f64) -> f64 {
    (x.powi(3) + y.powi(3)) / 3.0 + 0.1 * (x + y)
}

#[derive(Clone, Debug, Serialize)]
pub struct DivergenceReport {
    pub max_residual: f64,
    pub checked: usize,
    pub skipped: usize,
}

/// `max |sigma Lap u + grad sigma . grad u|` over `pts` by central differences
/// of spacing `h`. Points closer than `2h` to the rim are skipped.
pub fn divergence_residual(
    sigma: &dyn Fn(f64, f64) -> Result<f64>,
    u: &dyn Fn(f64, f64) -> f64,
    pts: &[(f64, f64)],
    h: f64,
) -> Result<DivergenceReport> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::validation(format!("difference spacing h = {h} must be positive")));
    }
    let mut report = DivergenceReport {
        max_residual: 0.0,
        checked: 0,
        skipped: 0,
    };
    for &(x, y) in pts {
        if x.hypot(y) > 1.0 - 2.0 * h {
            log::warn!("skipping ({x}, {y}): closer than 2h to the boundary");
            report.skipped += 1;
            continue;
        }
        let s = sigma(x, y)?;
        let sx = (sigma(x + h, y)? - sigma(x - h, y)?) / (2.0 * h);
        let sy = (sigma(x, y + h)? - sigma(x, y - h)?) / (2.0 * h);
        let u0 = u(x, y);
        let (uxp, uxm, uyp, uym) = (u(x + h, y), u(x - h, y), u(x, y + h), u(x, y - h));
        let ux = (uxp - uxm) / (2.0 * h);
        let uy = (uyp - uym) / (2.0 * h);
        let lap = (uxp + uxm + uyp + uym - 4.0 * u0) / (h * h);
        let r = (s * lap + sx * ux + sy * uy).abs();
        if !r.is_finite() {
            return Err(Error::numerical(format!("non-finite divergence residual at ({x}, {y})")));
        }
        report.max_residual = report.max_residual.max(r);
        report.checked += 1;
    }
    Ok(report)
}

/// `n` deterministic points spread over the disk of radius `radius`
/// (golden-angle spiral).
pub fn spiral_points(n: usize, radius: f64) -> Vec<(f64, f64)> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let r = radius * ((k as f64 + 0.5) / n as f64).sqrt();
            let t = golden * k as f64;
            (r * t.cos(), r * t.sin())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinusoidal_examples() {
        let c = sinusoidal_case(PI).unwrap();
        let expect = 2.0 / 3f64.sqrt() * PI / 6.0;
        assert!((c.potential(0.0, 0.0) - expect).abs() < 1e-15);
        assert!((expect - 0.60460).abs() < 1e-5);
        assert_eq!(c.sigma.evaluate(0.0, 0.0).unwrap(), 6.0);
        for w in [0.5, 2.0] {
            assert!((sinusoidal_case(w).unwrap().potential(0.0, 0.0) - expect).abs() < 1e-15);
        }
        assert!(sinusoidal_case(0.0).is_err());
        assert!(sinusoidal_case(4.0).is_err());
    }

    #[test]
    fn sinusoidal_branches_agree_away_from_rim() {
        let cont = sinusoidal_case(PI).unwrap();
        let eps = sinusoidal_case_with(PI, SinusoidalBranch::Epsilon { eps: 1e-9 }).unwrap();
        for (x, y) in spiral_points(50, 0.95) {
            assert!((cont.potential(x, y) - eps.potential(x, y)).abs() < 1e-6);
        }
    }

    #[test]
    fn sinusoidal_boundary_is_continuous() {
        let c = sinusoidal_case(PI).unwrap();
        let p = 2000;
        let vals: Vec<f64> = (0..=p)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / p as f64;
                c.potential(t.cos(), t.sin())
            })
            .collect();
        // |grad u| <= omega * sqrt(2) / min sigma_i = pi sqrt 2
        let bound = PI * 2f64.sqrt() * 2.0 * PI / p as f64;
        let jump = vals.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        assert!(jump <= 10.0 * bound, "{jump} vs {bound}");
        // the poles of tan at |y| = 1 are handled
        assert!(c.potential(0.0, 1.0).is_finite() && c.potential(0.0, -1.0).is_finite());
    }

    #[test]
    fn lorentzian_examples() {
        let c = lorentzian_case(0.0);
        assert_eq!(c.potential(0.0, 0.0), 0.0);
        assert!((c.potential(1.0, 0.0) - 0.43333333333333335).abs() < 1e-15);
        assert!((c.sigma.evaluate(0.0, 0.0).unwrap() - 100.0).abs() < 1e-12);
    }

    #[test]
    fn divergence_examples() {
        let one = |_: f64, _: f64| Ok(1.0);
        let pts = spiral_points(50, 0.9);
        let r = divergence_residual(&one, &|x, y| x * x - y * y, &pts, 1e-4).unwrap();
        assert!(r.max_residual <= 1e-8 * 10.0, "{}", r.max_residual);
        let r = divergence_residual(&one, &|x, _| x * x, &pts, 1e-4).unwrap();
        assert!((r.max_residual - 2.0).abs() < 1e-3);
        let r = divergence_residual(&one, &|x, _| x, &[(0.0, 0.0), (0.99995, 0.0)], 1e-4).unwrap();
        assert_eq!((r.checked, r.skipped), (1, 1));
        let lor = lorentzian_case(0.0);
        let r = lor.divergence(&pts, 1e-4).unwrap();
        assert!(r.max_residual <= 1e-4, "{}", r.max_residual);
    }

    #[test]
    fn spiral_points_stay_inside() {
        let pts = spiral_points(200, 0.9);
        assert_eq!(pts.len(), 200);
        assert!(pts.iter().all(|(x, y)| x.hypot(*y) <= 0.9));
    }
}
