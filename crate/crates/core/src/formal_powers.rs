//! Formal powers `Z(n)(a, z; z0)` built by repeated (F,G)-antiderivatives
//! along the rays of a radial mesh.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conductivity::ConductivityField;
use crate::error::{Error, Result};
use crate::pseudoanalytic::{
    coefficients_of_p, fg_integral_into, GeneratingPairField, GeneratingSequence, IntegralScratch, RadialMesh,
    RayIntegrator, RayQuadrature, Stencil,
};

/// The two seeds whose powers span all others by real linear combination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Seed {
    One,
    I,
}

impl Seed {
    pub fn value(self) -> Complex64 {
        match self {
            Seed::One => Complex64::new(1.0, 0.0),
            Seed::I => Complex64::new(0.0, 1.0),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Seed::One => "1",
            Seed::I => "i",
        }
    }
}

/// Real `(lambda, mu)` with `lambda F0 + mu G0 = a0`.
pub fn degree_zero_coefficients(f0: Complex64, g0: Complex64, a0: Complex64) -> Result<(f64, f64)> {
    let det = f0.re * g0.im - g0.re * f0.im;
    if !(det.is_finite() && det > 0.0) {
        return Err(Error::numerical(format!(
            "degree-0 system is singular: Im(conj(F) G) = {det} at the center"
        )));
    }
    let lambda = (a0.re * g0.im - g0.re * a0.im) / det;
    let mu = (f0.re * a0.im - f0.im * a0.re) / det;
    Ok((lambda, mu))
}

/// `lambda F + mu G` over the whole field, with `lambda, mu` solved at node
/// `center` so the value there is `a0`.
pub fn degree_zero(pair: &GeneratingPairField, a0: Complex64, center: usize) -> Result<Vec<Complex64>> {
    if center >= pair.len() {
        return Err(Error::validation(format!(
            "center node {center} out of range for {} nodes",
            pair.len()
        )));
    }
    let (lambda, mu) = degree_zero_coefficients(pair.f()[center], pair.g()[center], a0)?;
    Ok(pair.f().iter().zip(pair.g()).map(|(f, g)| lambda * f + mu * g).collect())
}

/// Runs the recursion on one ray and hands each degree's values to `store`.
///
/// `Z_m(j) = j int Z_{m+1}(j-1) d_(F_m, G_m) z` for every index `m` of the
/// period, so degree `n` at index 0 is reached after `n` steps with no
/// repeated work across degrees.
fn ray_powers(
    seq: &GeneratingSequence,
    ray: &[Complex64],
    max_degree: usize,
    seed: Complex64,
    quadrature: RayQuadrature,
    ray_index: usize,
    mut store: impl FnMut(usize, &[Complex64]),
) -> Result<()> {
    let k = seq.period();
    let integrator = RayIntegrator::new(ray, quadrature)?;
    let pairs = (0..k)
        .map(|m| seq.pair_for(m).sample_points(ray))
        .collect::<Result<Vec<_>>>()?;
    let mut current = pairs
        .iter()
        .map(|pf| degree_zero(pf, seed, 0))
        .collect::<Result<Vec<_>>>()?;
    let mut next = current.clone();
    let mut scratch = IntegralScratch::default();
    store(0, &current[0]);
    for j in 1..=max_degree {
        for m in 0..k {
            let pf = &pairs[m];
            fg_integral_into(
                &current[(m + 1) % k],
                &integrator,
                pf.f(),
                pf.g(),
                j as f64,
                &mut scratch,
                &mut next[m],
            );
            if let Some(s) = next[m].iter().position(|v| !v.is_finite()) {
                return Err(Error::numerical(format!(
                    "non-finite formal power at degree {j}, ray {ray_index}, step {s}"
                )));
            }
        }
        std::mem::swap(&mut current, &mut next);
        store(j, &current[0]);
    }
    Ok(())
}

/// Values of `Z(n)(seed, z; z0)` for `n = 0..=max_degree` at every mesh node,
/// laid out `[n][ray][step]`.
pub fn build_powers(
    seq: &GeneratingSequence,
    mesh: &RadialMesh,
    max_degree: usize,
    seed: Complex64,
    quadrature: RayQuadrature,
) -> Result<Vec<Complex64>> {
    let (rays, stride) = (mesh.ray_count(), mesh.step_count() + 1);
    let per_ray = (0..rays)
        .into_par_iter()
        .map(|r| {
            let mut vals = vec![Complex64::new(0.0, 0.0); (max_degree + 1) * stride];
            ray_powers(seq, mesh.ray(r), max_degree, seed, quadrature, r, |n, z| {
                vals[n * stride..(n + 1) * stride].copy_from_slice(z);
            })?;
            Ok(vals)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![Complex64::new(0.0, 0.0); (max_degree + 1) * rays * stride];
    for (r, vals) in per_ray.iter().enumerate() {
        for n in 0..=max_degree {
            let dst = (n * rays + r) * stride;
            out[dst..dst + stride].copy_from_slice(&vals[n * stride..(n + 1) * stride]);
        }
    }
    Ok(out)
}

/// Boundary values only, `[n][ray]`; memory stays `O(N P)` for dense meshes.
pub fn boundary_powers(
    seq: &GeneratingSequence,
    mesh: &RadialMesh,
    max_degree: usize,
    seed: Complex64,
    quadrature: RayQuadrature,
) -> Result<Vec<Vec<Complex64>>> {
    let rays = mesh.ray_count();
    let per_ray = (0..rays)
        .into_par_iter()
        .map(|r| {
            let mut vals = Vec::with_capacity(max_degree + 1);
            ray_powers(seq, mesh.ray(r), max_degree, seed, quadrature, r, |_, z| {
                vals.push(z[z.len() - 1]);
            })?;
            Ok(vals)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..=max_degree)
        .map(|n| per_ray.iter().map(|v| v[n]).collect())
        .collect())
}

/// `Z(n)(1, z; z0)` and `Z(n)(i, z; z0)` at every node of a mesh.
#[derive(Clone, Debug)]
pub struct FormalPowerTable {
    mesh: RadialMesh,
    max_degree: usize,
    seed_one: Vec<Complex64>,
    seed_i: Vec<Complex64>,
}

pub fn build_table(seq: &GeneratingSequence, mesh: &RadialMesh, max_degree: usize) -> Result<FormalPowerTable> {
    build_table_with(seq, mesh, max_degree, RayQuadrature::default())
}

pub fn build_table_with(
    seq: &GeneratingSequence,
    mesh: &RadialMesh,
    max_degree: usize,
    quadrature: RayQuadrature,
) -> Result<FormalPowerTable> {
    let (seed_one, seed_i) = rayon::join(
        || build_powers(seq, mesh, max_degree, Seed::One.value(), quadrature),
        || build_powers(seq, mesh, max_degree, Seed::I.value(), quadrature),
    );
    log::debug!(
        "built formal powers up to degree {max_degree} on {} rays x {} steps",
        mesh.ray_count(),
        mesh.step_count()
    );
    Ok(FormalPowerTable {
        mesh: mesh.clone(),
        max_degree,
        seed_one: seed_one?,
        seed_i: seed_i?,
    })
}

impl FormalPowerTable {
    pub fn mesh(&self) -> &RadialMesh {
        &self.mesh
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// All node values of one degree, `[ray][step]`.
    pub fn degree(&self, seed: Seed, n: usize) -> &[Complex64] {
        let len = self.mesh.nodes().len();
        let data = match seed {
            Seed::One => &self.seed_one,
            Seed::I => &self.seed_i,
        };
        &data[n * len..(n + 1) * len]
    }

    pub fn value(&self, seed: Seed, n: usize, ray: usize, step: usize) -> Complex64 {
        self.degree(seed, n)[ray * (self.mesh.step_count() + 1) + step]
    }

    pub fn boundary(&self, seed: Seed, n: usize) -> Vec<Complex64> {
        let s = self.mesh.step_count();
        (0..self.mesh.ray_count()).map(|r| self.value(seed, n, r, s)).collect()
    }

    /// CSV rows `degree,seed,ray,step,x,y,ReZ,ImZ`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["degree", "seed", "ray", "step", "x", "y", "ReZ", "ImZ"])?;
        let stride = self.mesh.step_count() + 1;
        for n in 0..=self.max_degree {
            for seed in [Seed::One, Seed::I] {
                for (idx, z) in self.degree(seed, n).iter().enumerate() {
                    let node = self.mesh.nodes()[idx];
                    w.write_record([
                        n.to_string(),
                        seed.label().to_string(),
                        (idx / stride).to_string(),
                        (idx % stride).to_string(),
                        node.re.to_string(),
                        node.im.to_string(),
                        z.re.to_string(),
                        z.im.to_string(),
                    ])?;
                }
            }
        }
        w.flush().map_err(|e| Error::Io {
            path: "formal power dump".into(),
            source: e,
        })?;
        Ok(())
    }
}

/// Maximum Vekua residual `|dW/dzbar - (dp/dzbar / p) conj(W)|` of each seed-1
/// and seed-i power, with `p` the pair at index 0.
///
/// Derivatives are taken in polar form on the mesh itself,
/// `d/dzbar = e^{i theta} (d/dr + (i/r) d/dtheta)`, which needs a mesh centered
/// at the origin with equispaced rays; the angular derivative is eighth order and the
/// radial one fourth order on uniform steps. Only nodes at least two radial steps
/// from the center and the rim are used, and nodes closer than twice the local
/// mesh spacing to a jump of `field` are skipped.
pub fn pseudoanalyticity_check(
    table: &FormalPowerTable,
    seq: &GeneratingSequence,
    field: Option<&ConductivityField>,
    stencil: &Stencil,
) -> Result<Vec<f64>> {
    let mesh = table.mesh();
    if mesh.center().norm() != 0.0 || !mesh.has_uniform_angles() {
        return Err(Error::validation(
            "pseudoanalyticity check needs a mesh centered at 0 with equispaced rays",
        ));
    }
    let (rays, steps) = (mesh.ray_count(), mesh.step_count());
    if rays < 9 || steps < 5 {
        return Err(Error::validation("pseudoanalyticity check needs at least 9 rays and 5 steps"));
    }
    let t = mesh.radial();
    let dtheta = TAU / rays as f64;
    let uniform_r = mesh.has_uniform_radial();
    let p = seq.p_for(0);

    // (ray, step, b coefficient) at every checked node
    let nodes: Vec<(usize, usize, Complex64)> = (0..rays)
        .into_par_iter()
        .flat_map_iter(|r| (2..=steps - 2).map(move |s| (r, s)))
        .filter_map(|(r, s)| {
            let z = mesh.node(r, s);
            let spacing = (t[s + 1] - t[s - 1]).max(t[s] * dtheta);
            if let Some(f) = field {
                if f.discontinuity_distance(z.re, z.im) < 2.0 * spacing {
                    return None;
                }
            }
            Some(coefficients_of_p(p, z, stencil).map(|c| (r, s, c[3])))
        })
        .collect::<Result<Vec<_>>>()?;

    let residual_of = |w: &[Complex64]| -> f64 {
        let at = |r: usize, s: usize| w[r * (steps + 1) + s];
        nodes
            .par_iter()
            .map(|&(r, s, b)| {
                let d_r = if uniform_r {
                    let h = t[1] - t[0];
                    (at(r, s - 2) - 8.0 * at(r, s - 1) + 8.0 * at(r, s + 1) - at(r, s + 2)) / (12.0 * h)
                } else {
                    three_point(t[s - 1], t[s], t[s + 1], at(r, s - 1), at(r, s), at(r, s + 1))
                };
                let d_theta = ANGULAR_STENCIL
                    .iter()
                    .enumerate()
                    .map(|(k, c)| *c * at((r + rays + k - 4) % rays, s))
                    .sum::<Complex64>()
                    / dtheta;
                let theta = mesh.angles()[r];
                let dzbar = Complex64::from_polar(1.0, theta)
                    * (d_r + Complex64::new(0.0, 1.0 / t[s]) * d_theta);
                (dzbar - b * at(r, s).conj()).norm()
            })
            .reduce(|| 0.0, f64::max)
    };

    Ok((0..=table.max_degree())
        .map(|n| residual_of(table.degree(Seed::One, n)).max(residual_of(table.degree(Seed::I, n))))
        .collect())
}

// eighth-order centered first derivative, offsets -4..=4
const ANGULAR_STENCIL: [f64; 9] = [
    1.0 / 280.0,
    -4.0 / 105.0,
    1.0 / 5.0,
    -4.0 / 5.0,
    0.0,
    4.0 / 5.0,
    -1.0 / 5.0,
    4.0 / 105.0,
    -1.0 / 280.0,
];

/// Derivative at `x1` of the parabola through three points.
fn three_point(x0: f64, x1: f64, x2: f64, f0: Complex64, f1: Complex64, f2: Complex64) -> Complex64 {
    let (h0, h1) = (x1 - x0, x2 - x1);
    (-h1 / (h0 * (h0 + h1))) * f0 + ((h1 - h0) / (h0 * h1)) * f1 + (h0 / (h1 * (h0 + h1))) * f2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudoanalytic::{build_sequence, pair_from_p};
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn degree_zero_examples() {
        let unit = pair_from_p(&[1.0, 1.0]).unwrap();
        assert_eq!(degree_zero(&unit, c(1.0, 0.0), 0).unwrap(), vec![c(1.0, 0.0); 2]);
        assert_eq!(degree_zero(&unit, c(0.0, 1.0), 0).unwrap(), vec![c(0.0, 1.0); 2]);
        let pf = pair_from_p(&[2.0, 3.0]).unwrap();
        let (lambda, mu) = degree_zero_coefficients(pf.f()[0], pf.g()[0], c(1.0, 0.0)).unwrap();
        assert!((lambda - 0.5).abs() < 1e-15 && mu == 0.0);
        let z = degree_zero(&pf, c(1.0, 0.0), 0).unwrap();
        assert!((z[1] - c(1.5, 0.0)).norm() < 1e-15);
        let (lambda, mu) = degree_zero_coefficients(pf.f()[0], pf.g()[0], c(0.0, 1.0)).unwrap();
        assert!(lambda == 0.0 && (mu - 2.0).abs() < 1e-15);
        assert!(degree_zero_coefficients(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)).is_err());
        assert!(degree_zero(&pf, c(1.0, 0.0), 5).is_err());
    }

    #[test]
    fn unit_conductivity_gives_classical_powers() {
        let seq = build_sequence(&ConductivityField::uniform(1.0)).unwrap();
        let mesh = RadialMesh::uniform(12, 60).unwrap();
        let table = build_table(&seq, &mesh, 6).unwrap();
        for n in 0..=6 {
            for (idx, z) in mesh.nodes().iter().enumerate() {
                let exact = z.powu(n as u32);
                // relative to the sup norm of z^n on the disk, which is 1
                let tol = 1e-6;
                let err = (table.degree(Seed::One, n)[idx] - exact).norm();
                assert!(err < tol, "n={n} err={err}");
                assert!((table.degree(Seed::I, n)[idx] - c(0.0, 1.0) * exact).norm() < tol);
            }
        }
    }

    #[test]
    fn center_values() {
        let seq = build_sequence(&ConductivityField::limit_closure(|x, y| 2.0 + x * y)).unwrap();
        let mesh = RadialMesh::uniform(6, 20).unwrap();
        let table = build_table(&seq, &mesh, 4).unwrap();
        for r in 0..6 {
            assert!((table.value(Seed::One, 0, r, 0) - 1.0).norm() < 1e-15);
            assert!((table.value(Seed::I, 0, r, 0) - c(0.0, 1.0)).norm() < 1e-15);
            for n in 1..=4 {
                assert_eq!(table.value(Seed::One, n, r, 0), c(0.0, 0.0));
                assert_eq!(table.value(Seed::I, n, r, 0), c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn non_finite_power_names_location() {
        let seq = GeneratingSequence::new(vec![Arc::new(|x: f64, _y: f64| Ok(if x > 0.5 { 1e200 } else { 1.0 }))])
            .unwrap();
        let mesh = RadialMesh::uniform(4, 20).unwrap();
        let err = build_table(&seq, &mesh, 3).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Numerical(_)), "{msg}");
        assert!(msg.contains("degree") && msg.contains("ray") && msg.contains("step"), "{msg}");
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let seq = build_sequence(&ConductivityField::uniform(1.0)).unwrap();
        let mesh = RadialMesh::uniform(4, 5).unwrap();
        let table = build_table(&seq, &mesh, 1).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("degree,seed,ray,step,x,y,ReZ,ImZ"));
        assert_eq!(lines.count(), 2 * 2 * 4 * 6);
    }

    #[test]
    fn boundary_powers_match_full_table() {
        let seq = build_sequence(&ConductivityField::limit_closure(|x, y| 2.0 + 0.5 * x * x + y)).unwrap();
        let mesh = RadialMesh::uniform(7, 30).unwrap();
        let table = build_table(&seq, &mesh, 5).unwrap();
        let bnd = boundary_powers(&seq, &mesh, 5, Seed::I.value(), RayQuadrature::Cubic).unwrap();
        for n in 0..=5 {
            assert_eq!(bnd[n], table.boundary(Seed::I, n));
        }
    }

    #[test]
    fn unit_conductivity_powers_are_analytic() {
        let field = ConductivityField::uniform(1.0);
        let seq = build_sequence(&field).unwrap();
        let mesh = RadialMesh::uniform(72, 80).unwrap();
        let table = build_table(&seq, &mesh, 3).unwrap();
        let res = pseudoanalyticity_check(&table, &seq, Some(&field), &Stencil::default()).unwrap();
        assert!(res.iter().all(|r| *r < 1e-6), "{res:?}");
    }
}
