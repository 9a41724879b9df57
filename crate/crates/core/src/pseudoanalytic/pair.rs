use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::mesh::RadialMesh;
use crate::conductivity::DOMAIN_TOL;
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

pub type ComplexFn = Arc<dyn Fn(Complex64) -> Result<Complex64> + Send + Sync>;
pub type PositiveFn = Arc<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>;

/// A generating pair `(F, G)` given by evaluators, so it can be sampled on a
/// mesh or differentiated off-mesh.
#[derive(Clone)]
pub struct GeneratingPair {
    f: ComplexFn,
    g: ComplexFn,
}

impl GeneratingPair {
    pub fn new(f: ComplexFn, g: ComplexFn) -> Self {
        Self { f, g }
    }

    /// `(p, i/p)` for a positive scalar `p`.
    pub fn from_p(p: PositiveFn) -> Self {
        let p_g = p.clone();
        Self {
            f: Arc::new(move |z| Ok(Complex64::new(checked_p(&p, z)?, 0.0))),
            g: Arc::new(move |z| Ok(I / checked_p(&p_g, z)?)),
        }
    }

    /// `(1, i)`, the pair of classical analytic functions.
    pub fn unit() -> Self {
        Self::from_p(Arc::new(|_, _| Ok(1.0)))
    }

    pub fn f(&self, z: Complex64) -> Result<Complex64> {
        (self.f)(z)
    }

    pub fn g(&self, z: Complex64) -> Result<Complex64> {
        (self.g)(z)
    }

    /// `(-iF, -iG)`.
    pub fn adjoint(&self) -> Self {
        let (f, g) = (self.f.clone(), self.g.clone());
        Self {
            f: Arc::new(move |z| Ok(-I * f(z)?)),
            g: Arc::new(move |z| Ok(-I * g(z)?)),
        }
    }

    pub fn sample(&self, mesh: &RadialMesh) -> Result<GeneratingPairField> {
        self.sample_points(mesh.nodes())
    }

    pub fn sample_points(&self, points: &[Complex64]) -> Result<GeneratingPairField> {
        let (f, g): (Vec<_>, Vec<_>) = points
            .par_iter()
            .map(|&z| Ok((self.f(z)?, self.g(z)?)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        GeneratingPairField::new(f, g)
    }
}

fn checked_p(p: &PositiveFn, z: Complex64) -> Result<f64> {
    let v = p(z.re, z.im)?;
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::validation(format!("p({}, {}) = {v} must be positive", z.re, z.im)));
    }
    Ok(v)
}

/// `(F, G)` sampled at a set of nodes with `Im(conj(F) G) > 0` at each.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratingPairField {
    f: Vec<Complex64>,
    g: Vec<Complex64>,
}

impl GeneratingPairField {
    pub fn new(f: Vec<Complex64>, g: Vec<Complex64>) -> Result<Self> {
        if f.len() != g.len() {
            return Err(Error::validation(format!("F has {} nodes but G has {}", f.len(), g.len())));
        }
        for (i, (a, b)) in f.iter().zip(&g).enumerate() {
            let det = (a.conj() * b).im;
            if !(det.is_finite() && det > 0.0) {
                return Err(Error::validation(format!("Im(conj(F) G) = {det} at node {i}, expected > 0")));
            }
        }
        Ok(Self { f, g })
    }

    pub fn f(&self) -> &[Complex64] {
        &self.f
    }

    pub fn g(&self) -> &[Complex64] {
        &self.g
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            f: self.f.iter().map(|v| -I * v).collect(),
            g: self.g.iter().map(|v| -I * v).collect(),
        }
    }
}

/// `(F, G) = (p, i/p)` from positive samples of `p`.
pub fn pair_from_p(p: &[f64]) -> Result<GeneratingPairField> {
    if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::validation(format!("p = {v} at node {i} must be positive")));
    }
    Ok(GeneratingPairField {
        f: p.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        g: p.iter().map(|&v| I / v).collect(),
    })
}

/// Cartesian finite differences with spacing `h`, centered where the stencil
/// stays in the closed disk and second-order one-sided otherwise.
///
/// Derivatives follow the factorless convention `d/dz = d/dx - i d/dy`,
/// `d/dzbar = d/dx + i d/dy`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stencil {
    pub h: f64,
}

impl Default for Stencil {
    fn default() -> Self {
        Self { h: 1e-4 }
    }
}

impl Stencil {
    pub fn new(h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0 && h < 0.1) {
            return Err(Error::validation(format!("stencil spacing h = {h} must lie in (0, 0.1)")));
        }
        Ok(Self { h })
    }

    fn partial(&self, f: &dyn Fn(Complex64) -> Result<Complex64>, z: Complex64, dir: Complex64) -> Result<Complex64> {
        let h = self.h;
        let inside = |w: Complex64| w.norm_sqr() <= 1.0 + DOMAIN_TOL;
        let (fwd, bwd) = (z + dir * h, z - dir * h);
        if inside(fwd) && inside(bwd) {
            Ok((f(fwd)? - f(bwd)?) / (2.0 * h))
        } else if inside(bwd) {
            Ok((3.0 * f(z)? - 4.0 * f(bwd)? + f(z - dir * (2.0 * h))?) / (2.0 * h))
        } else {
            Ok((-3.0 * f(z)? + 4.0 * f(fwd)? - f(z + dir * (2.0 * h))?) / (2.0 * h))
        }
    }

    /// `(df/dx, df/dy)` at `z`.
    pub fn gradient(&self, f: &dyn Fn(Complex64) -> Result<Complex64>, z: Complex64) -> Result<(Complex64, Complex64)> {
        Ok((
            self.partial(f, z, Complex64::new(1.0, 0.0))?,
            self.partial(f, z, I)?,
        ))
    }

    pub fn d_z(&self, f: &dyn Fn(Complex64) -> Result<Complex64>, z: Complex64) -> Result<Complex64> {
        let (dx, dy) = self.gradient(f, z)?;
        Ok(dx - I * dy)
    }

    pub fn d_zbar(&self, f: &dyn Fn(Complex64) -> Result<Complex64>, z: Complex64) -> Result<Complex64> {
        let (dx, dy) = self.gradient(f, z)?;
        Ok(dx + I * dy)
    }
}

/// `A, B` enter the (F,G)-derivative `dW/dz - A W - B conj(W)`; `a, b` the
/// Vekua equation `dW/dzbar - a W - b conj(W) = 0`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CharacteristicCoefficients {
    pub big_a: Vec<Complex64>,
    pub big_b: Vec<Complex64>,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
}

/// The four coefficients of `pair` at one point.
pub fn coefficients_at(pair: &GeneratingPair, z: Complex64, stencil: &Stencil) -> Result<[Complex64; 4]> {
    let f = pair.f(z)?;
    let g = pair.g(z)?;
    let den = f * g.conj() - g * f.conj();
    if !(den.norm() > 1e-300) || !den.is_finite() {
        return Err(Error::numerical(format!("degenerate pair at {z}: F conj(G) - G conj(F) = {den}")));
    }
    let ff = |w| pair.f(w);
    let gf = |w| pair.g(w);
    let (fx, fy) = stencil.gradient(&ff, z)?;
    let (gx, gy) = stencil.gradient(&gf, z)?;
    let (fz, fzb) = (fx - I * fy, fx + I * fy);
    let (gz, gzb) = (gx - I * gy, gx + I * gy);
    Ok([
        (f.conj() * gz - g.conj() * fz) / den,
        (f * gz - g * fz) / den,
        -(f.conj() * gzb - g.conj() * fzb) / den,
        (f * gzb - g * fzb) / den,
    ])
}

pub fn characteristic_coefficients(
    pair: &GeneratingPair,
    points: &[Complex64],
    stencil: &Stencil,
) -> Result<CharacteristicCoefficients> {
    let per_point = points
        .par_iter()
        .map(|&z| coefficients_at(pair, z, stencil))
        .collect::<Result<Vec<_>>>()?;
    let mut out = CharacteristicCoefficients::default();
    for [big_a, big_b, a, b] in per_point {
        out.big_a.push(big_a);
        out.big_b.push(big_b);
        out.a.push(a);
        out.b.push(b);
    }
    Ok(out)
}

/// Closed forms for `(p, i/p)`: `A = a = 0`, `B = dp/dz / p`, `b = dp/dzbar / p`.
pub fn coefficients_of_p(p: &PositiveFn, z: Complex64, stencil: &Stencil) -> Result<[Complex64; 4]> {
    let pc = |w: Complex64| Ok(Complex64::new(checked_p(p, w)?, 0.0));
    let p0 = checked_p(p, z)?;
    let zero = Complex64::new(0.0, 0.0);
    Ok([zero, stencil.d_z(&pc, z)? / p0, zero, stencil.d_zbar(&pc, z)? / p0])
}

/// `dW/dz - A W - B conj(W)` at each point.
pub fn fg_derivative(
    w: &(dyn Fn(Complex64) -> Result<Complex64> + Sync),
    pair: &GeneratingPair,
    points: &[Complex64],
    stencil: &Stencil,
) -> Result<Vec<Complex64>> {
    points
        .par_iter()
        .map(|&z| {
            let [big_a, big_b, _, _] = coefficients_at(pair, z, stencil)?;
            let wz = w(z)?;
            Ok(stencil.d_z(w, z)? - big_a * wz - big_b * wz.conj())
        })
        .collect()
}

/// `|dW/dzbar - (dp/dzbar / p) conj(W)|` at each point.
pub fn vekua_residual(
    w: &(dyn Fn(Complex64) -> Result<Complex64> + Sync),
    p: &PositiveFn,
    points: &[Complex64],
    stencil: &Stencil,
) -> Result<Vec<f64>> {
    points
        .par_iter()
        .map(|&z| {
            let [_, _, _, b] = coefficients_of_p(p, z, stencil)?;
            Ok((stencil.d_zbar(w, z)? - b * w(z)?.conj()).norm())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn p_fn(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> PositiveFn {
        Arc::new(move |x, y| Ok(f(x, y)))
    }

    #[test]
    fn pair_from_p_examples() {
        let pf = pair_from_p(&[1.0, 2.0]).unwrap();
        assert_eq!(pf.f()[0], c(1.0, 0.0));
        assert_eq!(pf.g()[0], c(0.0, 1.0));
        assert_eq!(pf.g()[1], c(0.0, 0.5));
        assert!(((pf.f()[1].conj() * pf.g()[1]).im - 1.0).abs() < 1e-15);
        assert!(pair_from_p(&[1.0, 0.0]).is_err());
        assert!(pair_from_p(&[f64::NAN]).is_err());
        let p = (2.0f64 / 3.0).sqrt();
        assert!((p - 0.81650).abs() < 1e-5);
    }

    #[test]
    fn adjoint_examples() {
        let pf = pair_from_p(&[1.0, 3.0]).unwrap();
        let adj = pf.adjoint();
        assert_eq!(adj.f()[0], c(0.0, -1.0));
        assert_eq!(adj.g()[0], c(1.0, 0.0));
        assert!((adj.f()[1] - c(0.0, -3.0)).norm() < 1e-15);
        assert!((adj.g()[1] - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!(((adj.f()[1].conj() * adj.g()[1]).im - 1.0).abs() < 1e-15);
        let twice = adj.adjoint();
        for i in 0..2 {
            assert!((twice.f()[i] + pf.f()[i]).norm() < 1e-15);
            assert!((twice.g()[i] + pf.g()[i]).norm() < 1e-15);
        }
        let pair = GeneratingPair::unit().adjoint();
        assert_eq!(pair.f(c(0.2, 0.1)).unwrap(), c(0.0, -1.0));
        assert_eq!(pair.g(c(0.2, 0.1)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn invalid_pair_field_is_rejected() {
        assert!(GeneratingPairField::new(vec![c(1.0, 0.0)], vec![c(0.0, -1.0)]).is_err());
        assert!(GeneratingPairField::new(vec![c(1.0, 0.0)], vec![c(2.0, 0.0)]).is_err());
        assert!(GeneratingPairField::new(vec![c(1.0, 0.0)], vec![]).is_err());
    }

    #[test]
    fn unit_pair_has_zero_coefficients() {
        let pts = [c(0.0, 0.0), c(0.5, -0.3), c(1.0, 0.0)];
        let cc = characteristic_coefficients(&GeneratingPair::unit(), &pts, &Stencil::default()).unwrap();
        for v in cc.big_a.iter().chain(&cc.big_b).chain(&cc.a).chain(&cc.b) {
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn exponential_p_coefficients() {
        let pair = GeneratingPair::from_p(p_fn(|x, _| x.exp()));
        let pts = [c(0.0, 0.0), c(0.3, 0.4), c(-0.6, 0.2), c(0.0, -1.0)];
        let cc = characteristic_coefficients(&pair, &pts, &Stencil::default()).unwrap();
        for i in 0..pts.len() {
            assert!(cc.big_a[i].norm() < 1e-8);
            assert!(cc.a[i].norm() < 1e-8);
            assert!((cc.big_b[i] - 1.0).norm() < 1e-7);
            assert!((cc.b[i] - 1.0).norm() < 1e-7);
        }
    }

    #[test]
    fn one_sided_fallback_at_rim() {
        let pair = GeneratingPair::from_p(p_fn(|x, _| x.exp()));
        // centered stencil would leave the disk here
        let [_, big_b, _, b] = coefficients_at(&pair, c(1.0, 0.0), &Stencil::default()).unwrap();
        assert!((big_b - 1.0).norm() < 1e-7);
        assert!((b - 1.0).norm() < 1e-7);
    }

    #[test]
    fn fg_derivative_annihilates_pair() {
        let p = p_fn(|x, y| 2.0 + x * y + 0.3 * x.sin());
        let pair = GeneratingPair::from_p(p);
        let pts = [c(0.1, 0.2), c(-0.4, 0.5), c(0.7, -0.1)];
        let st = Stencil::default();
        let on_f = fg_derivative(&|z| pair.f(z), &pair, &pts, &st).unwrap();
        let on_g = fg_derivative(&|z| pair.g(z), &pair, &pts, &st).unwrap();
        for v in on_f.iter().chain(&on_g) {
            assert!(v.norm() < 1e-7);
        }
    }

    #[test]
    fn fg_derivative_of_square_under_factorless_convention() {
        // d/dz z^2 = 2z with d/dz = d/dx - i d/dy = 2 * (classical d/dz)
        let pts = [c(0.3, 0.1), c(-0.5, 0.5)];
        let d = fg_derivative(&|z| Ok(z * z), &GeneratingPair::unit(), &pts, &Stencil::default()).unwrap();
        for (z, v) in pts.iter().zip(&d) {
            assert!((v - 4.0 * z).norm() < 1e-7);
        }
    }

    #[test]
    fn vekua_residual_examples() {
        let one = p_fn(|_, _| 1.0);
        let pts = [c(0.0, 0.0), c(0.2, -0.7)];
        let st = Stencil::default();
        let r = vekua_residual(&|z: Complex64| Ok(z.conj()), &one, &pts, &st).unwrap();
        assert!(r.iter().all(|v| (v - 2.0).abs() < 1e-8));
        let r = vekua_residual(&|z| Ok(z), &one, &pts, &st).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-8));
        let p = p_fn(|x, y| 1.5 + x * x * y);
        let pc = p.clone();
        let r = vekua_residual(&move |z: Complex64| Ok(Complex64::new(pc(z.re, z.im)?, 0.0)), &p, &pts, &st).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-8));
    }

    #[test]
    fn closed_form_matches_general_formula() {
        let p = p_fn(|x, y| (1.0 + 0.5 * x - 0.2 * y * y).exp() * (2.0 + (3.0 * y).cos()));
        let pair = GeneratingPair::from_p(p.clone());
        let h = 1e-3;
        let st = Stencil::new(h).unwrap();
        for &z in &[c(0.1, 0.3), c(-0.5, -0.2), c(0.6, 0.6)] {
            let general = coefficients_at(&pair, z, &st).unwrap();
            let closed = coefficients_of_p(&p, z, &st).unwrap();
            for k in [1, 3] {
                assert!((general[k] - closed[k]).norm() <= 10.0 * h * h * closed[k].norm().max(1.0));
            }
        }
    }

    #[test]
    fn stencil_validation() {
        assert!(Stencil::new(0.0).is_err());
        assert!(Stencil::new(1.0).is_err());
        assert!(Stencil::new(1e-4).is_ok());
    }
}
