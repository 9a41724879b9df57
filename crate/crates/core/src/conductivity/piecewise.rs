use super::interp::{Interpolant, InterpolantKind};
use crate::error::{Error, Result};

/// One vertical slab `x_lo <= x < x_hi` carrying `((x + k) / (chi + k)) * f(y)`.
#[derive(Clone, Debug)]
pub struct Slab {
    pub x_lo: f64,
    pub x_hi: f64,
    /// Abscissa of the line the `y` samples were collected on.
    pub chi: f64,
    pub k: f64,
    pub profile: Interpolant,
}

impl Slab {
    pub fn x_factor(&self, x: f64) -> f64 {
        (x + self.k) / (self.chi + self.k)
    }

    pub fn y_factor(&self, y: f64) -> f64 {
        self.profile.eval(y)
    }
}

#[derive(Clone, Debug)]
pub struct PiecewiseSeparable {
    slabs: Vec<Slab>,
}

impl PiecewiseSeparable {
    pub fn slabs(&self) -> &[Slab] {
        &self.slabs
    }

    /// Slab containing `x`; the last slab is closed on the right.
    pub fn slab_for(&self, x: f64) -> &Slab {
        let i = self.slabs.partition_point(|s| s.x_hi <= x);
        &self.slabs[i.min(self.slabs.len() - 1)]
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        let slab = self.slab_for(x);
        slab.x_factor(x) * slab.y_factor(y)
    }

    pub(crate) fn edge_distance(&self, x: f64) -> f64 {
        self.slabs[1..]
            .iter()
            .map(|s| (x - s.x_lo).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Builds the slab-wise separable field with piecewise-linear profiles.
///
/// `samples[j]` holds the sampling abscissa `chi_j` and the `(y, sigma)` pairs
/// collected along `x = chi_j`; `slab_edges` has `M + 1` entries from -1 to 1.
pub fn build_piecewise(samples: &[(f64, Vec<(f64, f64)>)], slab_edges: &[f64], k: f64) -> Result<PiecewiseSeparable> {
    build_piecewise_with(samples, slab_edges, k, InterpolantKind::Linear)
}

pub fn build_piecewise_with(
    samples: &[(f64, Vec<(f64, f64)>)],
    slab_edges: &[f64],
    k: f64,
    kind: InterpolantKind,
) -> Result<PiecewiseSeparable> {
    let m = samples.len();
    if m == 0 {
        return Err(Error::validation("piecewise field needs at least one slab"));
    }
    if slab_edges.len() != m + 1 {
        return Err(Error::validation(format!(
            "{} slabs need {} edges, got {}",
            m,
            m + 1,
            slab_edges.len()
        )));
    }
    if slab_edges[0] != -1.0 || slab_edges[m] != 1.0 {
        return Err(Error::validation("slab edges must start at -1 and end at 1"));
    }
    if slab_edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::validation("slab edges must be strictly increasing"));
    }
    // x + k >= 1 - k > 0 on [-1, 1] needs k > 1
    if !(k.is_finite() && k > 1.0) {
        return Err(Error::validation(format!("K = {k} allows x + K = 0 on [-1, 1]")));
    }
    let slabs = samples
        .iter()
        .enumerate()
        .map(|(j, (chi, pts))| {
            let (x_lo, x_hi) = (slab_edges[j], slab_edges[j + 1]);
            if !(x_lo..=x_hi).contains(chi) {
                return Err(Error::validation(format!(
                    "sampling line chi = {chi} lies outside slab {j} [{x_lo}, {x_hi}]"
                )));
            }
            let profile = Interpolant::new(pts, kind)
                .map_err(|e| Error::validation(format!("slab {j}: {e}")))?;
            Ok(Slab {
                x_lo,
                x_hi,
                chi: *chi,
                k,
                profile,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PiecewiseSeparable { slabs })
}

/// Samples `sigma` on `m` equal slabs: midline abscissas, `q` equispaced
/// ordinates along the chord of the disk on each midline.
pub fn sample_piecewise(
    sigma: &dyn Fn(f64, f64) -> f64,
    m: usize,
    q: usize,
    k: f64,
    kind: InterpolantKind,
) -> Result<PiecewiseSeparable> {
    if m == 0 || q < 2 {
        return Err(Error::validation(format!("need m >= 1 and q >= 2, got m = {m}, q = {q}")));
    }
    let edges: Vec<f64> = (0..=m).map(|j| -1.0 + 2.0 * j as f64 / m as f64).collect();
    let samples = (0..m)
        .map(|j| {
            let chi = 0.5 * (edges[j] + edges[j + 1]);
            let half = (1.0 - chi * chi).max(0.0).sqrt();
            let pts = (0..q)
                .map(|i| {
                    let y = -half + 2.0 * half * i as f64 / (q - 1) as f64;
                    (y, sigma(chi, y))
                })
                .collect();
            (chi, pts)
        })
        .collect::<Vec<_>>();
    build_piecewise_with(&samples, &edges, k, kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_constant_slab_is_linear_in_x() {
        let f = build_piecewise(&[(0.0, vec![(-1.0, 2.0), (1.0, 2.0)])], &[-1.0, 1.0], 2.0).unwrap();
        for &x in &[-1.0, -0.3, 0.0, 0.7, 1.0] {
            assert!((f.value(x, 0.4) - (x + 2.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn sampling_line_returns_profile() {
        let samples = vec![
            (-0.5, vec![(-1.0, 1.0), (0.0, 3.0), (1.0, 2.0)]),
            (0.5, vec![(-1.0, 5.0), (1.0, 7.0)]),
        ];
        let f = build_piecewise(&samples, &[-1.0, 0.0, 1.0], 2.0).unwrap();
        assert_eq!(f.value(-0.5, 0.0), 3.0);
        assert_eq!(f.value(-0.5, 0.5), 2.5);
        assert_eq!(f.value(0.5, 0.0), 6.0);
        // slab lookup: x = 0 belongs to the second slab, x = 1 to the last
        assert_eq!(f.slab_for(0.0).chi, 0.5);
        assert_eq!(f.slab_for(1.0).chi, 0.5);
    }

    #[test]
    fn validation_errors() {
        let ok = vec![(-1.0, 1.0), (1.0, 1.0)];
        assert!(build_piecewise(&[], &[-1.0, 1.0], 2.0).is_err());
        assert!(build_piecewise(&[(0.0, vec![(0.0, 1.0)])], &[-1.0, 1.0], 2.0).is_err());
        assert!(build_piecewise(&[(0.0, vec![(0.5, 1.0), (0.1, 1.0)])], &[-1.0, 1.0], 2.0).is_err());
        assert!(build_piecewise(&[(0.0, vec![(0.0, 1.0), (0.1, 0.0)])], &[-1.0, 1.0], 2.0).is_err());
        assert!(build_piecewise(&[(0.0, ok.clone())], &[-1.0, 1.0], 1.0).is_err());
        assert!(build_piecewise(&[(0.0, ok.clone())], &[-0.9, 1.0], 2.0).is_err());
        assert!(build_piecewise(&[(-0.5, ok.clone()), (-0.2, ok)], &[-1.0, 0.0, 1.0], 2.0).is_err());
    }

    #[test]
    fn sampled_lorentzian_reproduces_samples_on_lines() {
        let sigma = |x: f64, y: f64| 1.0 / ((x * x + 0.1) * (y * y + 0.1));
        let f = sample_piecewise(&sigma, 32, 32, 2.0, InterpolantKind::Linear).unwrap();
        for slab in f.slabs() {
            let half = (1.0 - slab.chi * slab.chi).sqrt();
            for i in 0..32 {
                let y = -half + 2.0 * half * i as f64 / 31.0;
                let exact = sigma(slab.chi, y);
                assert!((f.value(slab.chi, y) - exact).abs() <= 1e-12 * exact);
            }
        }
    }
}
