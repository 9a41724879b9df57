use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Cumulative quadrature rule along a ray.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RayQuadrature {
    /// Composite trapezoid, second order.
    Trapezoid,
    /// Each step integrates the cubic through the four surrounding nodes,
    /// fourth order. Needs at least 4 nodes per ray.
    #[default]
    Cubic,
}

/// Precomputed weights for cumulative complex line integrals `int f dz` along
/// one straight ray, evaluated at every node.
#[derive(Clone, Debug)]
pub struct RayIntegrator {
    // step s integrates sum_k weights[s][k] * f[first[s] + k]
    first: Vec<usize>,
    weights: Vec<[Complex64; 4]>,
    taps: usize,
}

impl RayIntegrator {
    pub fn new(ray: &[Complex64], rule: RayQuadrature) -> Result<Self> {
        let n = ray.len();
        if n < 2 {
            return Err(Error::validation("a ray needs at least 2 nodes"));
        }
        let zero = Complex64::new(0.0, 0.0);
        match rule {
            RayQuadrature::Trapezoid => {
                let weights = ray
                    .windows(2)
                    .map(|w| {
                        let half = 0.5 * (w[1] - w[0]);
                        [half, half, zero, zero]
                    })
                    .collect();
                Ok(Self {
                    first: (0..n - 1).collect(),
                    weights,
                    taps: 2,
                })
            }
            RayQuadrature::Cubic => {
                if n < 4 {
                    return Err(Error::validation(format!("cubic ray quadrature needs 4 nodes, got {n}")));
                }
                let span = ray[n - 1] - ray[0];
                let length = span.norm();
                if !(length > 0.0) {
                    return Err(Error::validation("ray has zero length"));
                }
                let dir = span / length;
                let tau: Vec<f64> = ray.iter().map(|z| ((z - ray[0]) * dir.conj()).re).collect();
                let mut first = Vec::with_capacity(n - 1);
                let mut weights = Vec::with_capacity(n - 1);
                for s in 0..n - 1 {
                    let j0 = s.saturating_sub(1).min(n - 4);
                    let nodes = [tau[j0], tau[j0 + 1], tau[j0 + 2], tau[j0 + 3]];
                    let w = lagrange_interval_weights(&nodes, tau[s], tau[s + 1]);
                    first.push(j0);
                    weights.push(w.map(|v| dir * v));
                }
                Ok(Self { first, weights, taps: 4 })
            }
        }
    }

    pub fn len(&self) -> usize {
        self.first.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Writes `int_{z_0}^{z_s} f dz` into `out[s]`.
    pub fn cumulative(&self, f: &[Complex64], out: &mut [Complex64]) {
        let mut acc = Complex64::new(0.0, 0.0);
        out[0] = acc;
        for (s, (&j0, w)) in self.first.iter().zip(&self.weights).enumerate() {
            for k in 0..self.taps {
                acc += w[k] * f[j0 + k];
            }
            out[s + 1] = acc;
        }
    }
}

/// Integrals of the four Lagrange basis cubics over `[a, b]`, exact by
/// two-point Gauss-Legendre.
fn lagrange_interval_weights(nodes: &[f64; 4], a: f64, b: f64) -> [f64; 4] {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let off = half / 3f64.sqrt();
    let mut w = [0.0; 4];
    for x in [mid - off, mid + off] {
        for (k, wk) in w.iter_mut().enumerate() {
            let mut l = 1.0;
            for (j, nj) in nodes.iter().enumerate() {
                if j != k {
                    l *= (x - nj) / (nodes[k] - nj);
                }
            }
            *wk += half * l;
        }
    }
    w
}

/// Reusable buffers for [`fg_integral_into`].
#[derive(Clone, Debug, Default)]
pub struct IntegralScratch {
    integrand_g: Vec<Complex64>,
    integrand_f: Vec<Complex64>,
    cum_g: Vec<Complex64>,
    cum_f: Vec<Complex64>,
}

/// `F Re int G* W dz + G Re int F* W dz` from the first node of the ray to
/// every node, with `(F*, G*) = (-iF, -iG)`.
pub fn fg_integral(w: &[Complex64], ray: &RayIntegrator, f: &[Complex64], g: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = ray.len();
    if w.len() != n || f.len() != n || g.len() != n {
        return Err(Error::validation(format!(
            "ray has {n} nodes but W, F, G have {}, {}, {}",
            w.len(),
            f.len(),
            g.len()
        )));
    }
    if let Some(i) = w.iter().position(|v| !v.is_finite()) {
        return Err(Error::validation(format!("W is not finite at node {i}")));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    fg_integral_into(w, ray, f, g, 1.0, &mut IntegralScratch::default(), &mut out);
    Ok(out)
}

/// [`fg_integral`] scaled by `factor`, without validation or allocation
/// beyond the scratch buffers.
pub fn fg_integral_into(
    w: &[Complex64],
    ray: &RayIntegrator,
    f: &[Complex64],
    g: &[Complex64],
    factor: f64,
    scratch: &mut IntegralScratch,
    out: &mut [Complex64],
) {
    let n = w.len();
    for buf in [
        &mut scratch.integrand_g,
        &mut scratch.integrand_f,
        &mut scratch.cum_g,
        &mut scratch.cum_f,
    ] {
        buf.resize(n, Complex64::new(0.0, 0.0));
    }
    for s in 0..n {
        scratch.integrand_g[s] = -I * g[s] * w[s];
        scratch.integrand_f[s] = -I * f[s] * w[s];
    }
    ray.cumulative(&scratch.integrand_g, &mut scratch.cum_g);
    ray.cumulative(&scratch.integrand_f, &mut scratch.cum_f);
    for s in 0..n {
        out[s] = factor * (f[s] * scratch.cum_g[s].re + g[s] * scratch.cum_f[s].re);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real_ray(n: usize) -> Vec<Complex64> {
        (0..n).map(|s| Complex64::new(s as f64 / (n - 1) as f64, 0.0)).collect()
    }

    fn unit_pair(n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
        (vec![Complex64::new(1.0, 0.0); n], vec![I; n])
    }

    #[test]
    fn unit_pair_integrates_constants_and_z() {
        for rule in [RayQuadrature::Trapezoid, RayQuadrature::Cubic] {
            let ray = real_ray(11);
            let integ = RayIntegrator::new(&ray, rule).unwrap();
            let (f, g) = unit_pair(11);
            let one = fg_integral(&[Complex64::new(1.0, 0.0); 11], &integ, &f, &g).unwrap();
            assert!((one[10] - 1.0).norm() < 1e-15);
            assert_eq!(one[0], Complex64::new(0.0, 0.0));
            let z = fg_integral(&ray, &integ, &f, &g).unwrap();
            assert!((z[10] - 0.5).norm() < 1e-15);
        }
    }

    #[test]
    fn cubic_rule_matches_uniform_closed_form() {
        let ray = real_ray(9);
        let integ = RayIntegrator::new(&ray, RayQuadrature::Cubic).unwrap();
        let h = 1.0 / 8.0;
        let w = &integ.weights[3];
        let expect = [-1.0, 13.0, 13.0, -1.0].map(|v| v * h / 24.0);
        for k in 0..4 {
            assert!((w[k].re - expect[k]).abs() < 1e-15);
        }
        let w = &integ.weights[0];
        let expect = [9.0, 19.0, -5.0, 1.0].map(|v| v * h / 24.0);
        for k in 0..4 {
            assert!((w[k].re - expect[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn cubic_rule_is_exact_for_cubics_on_graded_rays() {
        let dir = Complex64::from_polar(1.0, 0.7);
        let t: Vec<f64> = (0..=12).map(|s| 1.0 - (1.0 - s as f64 / 12.0).powf(1.7)).collect();
        let ray: Vec<Complex64> = t.iter().map(|&t| dir * t).collect();
        let integ = RayIntegrator::new(&ray, RayQuadrature::Cubic).unwrap();
        let f: Vec<Complex64> = ray.iter().map(|z| z * z * z - 2.0 * z + 1.0).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); ray.len()];
        integ.cumulative(&f, &mut out);
        for (z, v) in ray.iter().zip(&out) {
            let exact = z.powi(4) / 4.0 - z * z + z;
            assert!((v - exact).norm() < 1e-14);
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let ray = real_ray(5);
        let integ = RayIntegrator::new(&ray, RayQuadrature::Trapezoid).unwrap();
        let (f, g) = unit_pair(5);
        assert!(fg_integral(&ray[..4], &integ, &f, &g).is_err());
        assert!(RayIntegrator::new(&ray[..3], RayQuadrature::Cubic).is_err());
    }
}
