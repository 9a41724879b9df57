//! Orthonormalization of formal-power boundary traces and least-squares fit
//! of Dirichlet data on the unit circle.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formal_powers::{FormalPowerTable, Seed};

/// Real parts of the boundary traces, seed-1 degrees `0..=N` first, then
/// seed-i degrees `1..=N`.
///
/// Functions are labelled `alpha = n` for seed 1 and `alpha = N + 1 + n` for
/// seed i, so label `N + 1` (the identically zero `Re Z(0)(i)`) is never used.
#[derive(Clone, Debug)]
pub struct BoundarySystem {
    arc: Vec<f64>,
    weights: Vec<f64>,
    max_degree: usize,
    functions: Vec<Vec<f64>>,
    sources: Vec<(Seed, usize)>,
    excluded: Vec<f64>,
}

impl BoundarySystem {
    /// `seed_one[n]` and `seed_i[n]` hold `Re Z(n)` at the boundary nodes for
    /// `n = 0..=N`; `seed_i[0]` is kept aside, not used as a basis function.
    pub fn new(arc: Vec<f64>, weights: Vec<f64>, seed_one: Vec<Vec<f64>>, seed_i: Vec<Vec<f64>>) -> Result<Self> {
        let p = arc.len();
        if p == 0 || weights.len() != p {
            return Err(Error::validation(format!(
                "{} boundary nodes but {} weights",
                p,
                weights.len()
            )));
        }
        if seed_one.is_empty() || seed_one.len() != seed_i.len() {
            return Err(Error::validation("seed-1 and seed-i traces must cover the same degrees"));
        }
        if let Some(bad) = seed_one.iter().chain(&seed_i).find(|t| t.len() != p) {
            return Err(Error::validation(format!("trace of length {} on {p} boundary nodes", bad.len())));
        }
        let max_degree = seed_one.len() - 1;
        let mut seed_i = seed_i.into_iter();
        let excluded = seed_i.next().unwrap_or_default();
        let mut sources: Vec<(Seed, usize)> = (0..=max_degree).map(|n| (Seed::One, n)).collect();
        sources.extend((1..=max_degree).map(|n| (Seed::I, n)));
        let functions = seed_one.into_iter().chain(seed_i).collect();
        Ok(Self {
            arc,
            weights,
            max_degree,
            functions,
            sources,
            excluded,
        })
    }

    pub fn from_table(table: &FormalPowerTable) -> Result<Self> {
        let mesh = table.mesh();
        let traces = |seed| -> Vec<Vec<f64>> {
            (0..=table.max_degree())
                .map(|n| table.boundary(seed, n).iter().map(|z| z.re).collect())
                .collect()
        };
        Self::new(mesh.boundary_arc(), mesh.boundary_weights(), traces(Seed::One), traces(Seed::I))
    }

    /// Divides every trace by `divisor` node by node.
    pub fn scale_traces(&mut self, divisor: &[f64]) -> Result<()> {
        if divisor.len() != self.arc.len() {
            return Err(Error::validation("trace divisor length differs from boundary node count"));
        }
        for f in self.functions.iter_mut().chain(std::iter::once(&mut self.excluded)) {
            for (v, d) in f.iter_mut().zip(divisor) {
                *v /= d;
            }
        }
        Ok(())
    }

    pub fn arc(&self) -> &[f64] {
        &self.arc
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn functions(&self) -> &[Vec<f64>] {
        &self.functions
    }

    pub fn sources(&self) -> &[(Seed, usize)] {
        &self.sources
    }

    pub fn alphas(&self) -> Vec<usize> {
        self.sources.iter().map(|&s| alpha_label(s, self.max_degree)).collect()
    }

    /// `Re Z(0)(i)` on the boundary, left out of the system.
    pub fn excluded_trace(&self) -> &[f64] {
        &self.excluded
    }
}

pub fn alpha_label((seed, n): (Seed, usize), max_degree: usize) -> usize {
    match seed {
        Seed::One => n,
        Seed::I => max_degree + 1 + n,
    }
}

/// Closed-curve trapezoid `sum f_i g_i w_i`.
pub fn inner_product(f: &[f64], g: &[f64], weights: &[f64]) -> Result<f64> {
    if f.len() != g.len() || f.len() != weights.len() {
        return Err(Error::validation(format!(
            "inner product of functions sampled at {}, {} nodes with {} weights",
            f.len(),
            g.len(),
            weights.len()
        )));
    }
    Ok(dot(f, g, weights))
}

fn dot(f: &[f64], g: &[f64], w: &[f64]) -> f64 {
    f.iter().zip(g).zip(w).map(|((a, b), c)| a * b * c).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DroppedFunction {
    pub alpha: usize,
    pub original_norm: f64,
    pub residual_norm: f64,
}

#[derive(Clone, Debug)]
pub struct OrthonormalBasis {
    weights: Vec<f64>,
    values: Vec<Vec<f64>>,
    alphas: Vec<usize>,
    // row k: coefficients of u_k over the raw functions, zero past its source
    transform: Vec<Vec<f64>>,
    dropped: Vec<DroppedFunction>,
    raw_count: usize,
}

impl OrthonormalBasis {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn alphas(&self) -> &[usize] {
        &self.alphas
    }

    pub fn transform(&self) -> &[Vec<f64>] {
        &self.transform
    }

    pub fn dropped(&self) -> &[DroppedFunction] {
        &self.dropped
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `max |<u_a, u_b> - delta_ab|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (a, ua) in self.values.iter().enumerate() {
            for (b, ub) in self.values.iter().enumerate().skip(a) {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot(ua, ub, &self.weights) - target).abs());
            }
        }
        worst
    }

    /// Weights `c` over the raw functions with `sum_k b_k u_k = sum_j c_j raw_j`.
    pub fn raw_combination(&self, coefficients: &[f64]) -> Vec<f64> {
        let mut c = vec![0.0; self.raw_count];
        for (row, b) in self.transform.iter().zip(coefficients) {
            for (cj, t) in c.iter_mut().zip(row) {
                *cj += b * t;
            }
        }
        c
    }

    /// `sum_k b_k u_k` evaluated from raw traces sampled anywhere, `raw[j]`
    /// being raw function `j` at the sample points.
    pub fn combine_raw(&self, coefficients: &[f64], raw: &[Vec<f64>]) -> Result<Vec<f64>> {
        if raw.len() != self.raw_count {
            return Err(Error::validation(format!(
                "expected {} raw traces, got {}",
                self.raw_count,
                raw.len()
            )));
        }
        let c = self.raw_combination(coefficients);
        let n = raw.first().map_or(0, Vec::len);
        let mut out = vec![0.0; n];
        for (cj, trace) in c.iter().zip(raw) {
            for (o, v) in out.iter_mut().zip(trace) {
                *o += cj * v;
            }
        }
        Ok(out)
    }
}

pub const DEFAULT_DROP_TOL: f64 = 1e-10;

/// Modified Gram-Schmidt with one re-orthogonalization pass, in system order.
/// A function whose residual norm falls below `drop_tol` times its original
/// norm is dropped.
pub fn orthonormalize(system: &BoundarySystem, drop_tol: f64) -> Result<OrthonormalBasis> {
    if !(drop_tol.is_finite() && drop_tol >= 0.0) {
        return Err(Error::validation(format!("drop tolerance {drop_tol} must be >= 0")));
    }
    let w = system.weights();
    let raw_count = system.functions().len();
    if system.arc().len() < raw_count {
        log::warn!(
            "{} boundary nodes for {} functions; expect dropped functions",
            system.arc().len(),
            raw_count
        );
    }
    let alphas = system.alphas();
    let mut basis = OrthonormalBasis {
        weights: w.to_vec(),
        values: Vec::new(),
        alphas: Vec::new(),
        transform: Vec::new(),
        dropped: Vec::new(),
        raw_count,
    };
    for (j, raw) in system.functions().iter().enumerate() {
        let original = dot(raw, raw, w).sqrt();
        let mut v = raw.clone();
        let mut t = vec![0.0; raw_count];
        t[j] = 1.0;
        for _ in 0..2 {
            for (u, tu) in basis.values.iter().zip(&basis.transform) {
                let proj = dot(&v, u, w);
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
                for (ti, tui) in t.iter_mut().zip(tu) {
                    *ti -= proj * tui;
                }
            }
        }
        let residual = dot(&v, &v, w).sqrt();
        if !(original > 0.0) || !(residual > drop_tol * original) {
            log::info!(
                "dropping function alpha = {} (residual norm {residual:e} of {original:e})",
                alphas[j]
            );
            basis.dropped.push(DroppedFunction {
                alpha: alphas[j],
                original_norm: original,
                residual_norm: residual,
            });
            continue;
        }
        if !residual.is_finite() {
            return Err(Error::numerical(format!("non-finite norm for function alpha = {}", alphas[j])));
        }
        v.iter_mut().for_each(|x| *x /= residual);
        t.iter_mut().for_each(|x| *x /= residual);
        basis.values.push(v);
        basis.transform.push(t);
        basis.alphas.push(alphas[j]);
    }
    Ok(basis)
}

/// Projection of boundary data onto an orthonormal basis.
#[derive(Clone, Debug)]
pub struct Fit {
    pub alphas: Vec<usize>,
    pub coefficients: Vec<f64>,
    /// `sum b_alpha u_alpha` at the basis nodes.
    pub fitted: Vec<f64>,
}

/// `b_alpha = <data, u_alpha>`.
pub fn fit(basis: &OrthonormalBasis, data: &[f64]) -> Result<Fit> {
    if data.len() != basis.weights.len() {
        return Err(Error::validation(format!(
            "{} data values for {} boundary nodes",
            data.len(),
            basis.weights.len()
        )));
    }
    let coefficients: Vec<f64> = basis.values.iter().map(|u| dot(data, u, &basis.weights)).collect();
    let mut fitted = vec![0.0; data.len()];
    for (b, u) in coefficients.iter().zip(&basis.values) {
        for (f, ui) in fitted.iter_mut().zip(u) {
            *f += b * ui;
        }
    }
    Ok(Fit {
        alphas: basis.alphas.clone(),
        coefficients,
        fitted,
    })
}

/// `Q` equally spaced boundary angles `2 pi j / Q`.
pub fn error_angles(q: usize) -> Vec<f64> {
    (0..q).map(|j| TAU * j as f64 / q as f64).collect()
}

/// `sqrt(sum (data - fit)^2 * 2 pi / Q)` over `Q` equally spaced points.
pub fn error_norm(data: &[f64], fitted: &[f64]) -> Result<f64> {
    if data.len() != fitted.len() || data.is_empty() {
        return Err(Error::validation(format!(
            "error norm of {} data and {} fitted values",
            data.len(),
            fitted.len()
        )));
    }
    let q = data.len() as f64;
    let sum: f64 = data.iter().zip(fitted).map(|(d, f)| (d - f).powi(2)).sum();
    Ok((sum * TAU / q).sqrt())
}

/// Periodic piecewise-linear interpolation in arc length from samples at
/// `arc` (any order, within `[0, 2pi)`) to `targets`.
pub fn upsample_periodic_linear(arc: &[f64], values: &[f64], targets: &[f64]) -> Result<Vec<f64>> {
    if arc.len() != values.len() || arc.is_empty() {
        return Err(Error::validation("interpolation needs matching, non-empty samples"));
    }
    let mut order: Vec<usize> = (0..arc.len()).collect();
    order.sort_by(|&i, &j| arc[i].total_cmp(&arc[j]));
    let xs: Vec<f64> = order.iter().map(|&i| arc[i]).collect();
    let ys: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let n = xs.len();
    Ok(targets
        .iter()
        .map(|&t| {
            let t = t.rem_euclid(TAU);
            let k = xs.partition_point(|&x| x <= t);
            let (x0, y0, x1, y1) = if k == 0 {
                (xs[n - 1] - TAU, ys[n - 1], xs[0], ys[0])
            } else if k == n {
                (xs[n - 1], ys[n - 1], xs[0] + TAU, ys[0])
            } else {
                (xs[k - 1], ys[k - 1], xs[k], ys[k])
            };
            if x1 == x0 {
                y0
            } else {
                y0 + (y1 - y0) * (t - x0) / (x1 - x0)
            }
        })
        .collect())
}

/// Sampled fit and residual on the error-quadrature points.
#[derive(Clone, Debug, Serialize)]
pub struct FitResult {
    pub alphas: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub theta: Vec<f64>,
    pub data: Vec<f64>,
    pub fitted: Vec<f64>,
    pub error: f64,
}

impl FitResult {
    pub fn new(fit: &Fit, theta: Vec<f64>, data: Vec<f64>, fitted: Vec<f64>) -> Result<Self> {
        let error = error_norm(&data, &fitted)?;
        Ok(Self {
            alphas: fit.alphas.clone(),
            coefficients: fit.coefficients.clone(),
            theta,
            data,
            fitted,
            error,
        })
    }

    pub fn residual(&self) -> Vec<f64> {
        self.data.iter().zip(&self.fitted).map(|(d, f)| d - f).collect()
    }

    /// Coefficient for label `alpha`, zero if that function was dropped.
    pub fn coefficient(&self, alpha: usize) -> f64 {
        self.alphas
            .iter()
            .position(|&a| a == alpha)
            .map_or(0.0, |k| self.coefficients[k])
    }
}

/// `u = sum_j c_j Re Z_j` at every node of the table's mesh, optionally divided
/// node-wise by `divisor`.
pub fn reconstruct_interior(
    table: &FormalPowerTable,
    system: &BoundarySystem,
    basis: &OrthonormalBasis,
    coefficients: &[f64],
    divisor: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let nodes = table.mesh().nodes().len();
    if let Some(d) = divisor {
        if d.len() != nodes {
            return Err(Error::validation("interior divisor length differs from node count"));
        }
    }
    let c = basis.raw_combination(coefficients);
    let mut u = vec![0.0; nodes];
    for (cj, &(seed, n)) in c.iter().zip(system.sources()) {
        if *cj == 0.0 {
            continue;
        }
        for (ui, z) in u.iter_mut().zip(table.degree(seed, n)) {
            *ui += cj * z.re;
        }
    }
    if let Some(d) = divisor {
        u.iter_mut().zip(d).for_each(|(ui, di)| *ui /= di);
    }
    Ok(u)
}
