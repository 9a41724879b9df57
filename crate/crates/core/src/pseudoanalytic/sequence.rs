use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pair::{coefficients_of_p, GeneratingPair, PositiveFn, Stencil};
use crate::conductivity::{ConductivityField, DOMAIN_TOL};
use crate::error::{Error, Result};

/// Which pair of a separable field's sequence sits at index 0.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairConvention {
    /// `p = sqrt(sigma2 / sigma1)` at index 0.
    #[default]
    Literal,
    /// `p = sqrt(sigma)` at index 0, the pair of the main Vekua equation.
    /// Solutions are then `Re W / sqrt(sigma)`.
    MainVekua,
}

/// Periodic chain of `(p, i/p)` pairs, each the successor of the previous.
#[derive(Clone)]
pub struct GeneratingSequence {
    ps: Vec<PositiveFn>,
    pairs: Vec<GeneratingPair>,
}

impl std::fmt::Debug for GeneratingSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GeneratingSequence {{ period: {} }}", self.period())
    }
}

impl GeneratingSequence {
    /// One `p` per index of the period.
    pub fn new(ps: Vec<PositiveFn>) -> Result<Self> {
        if !(1..=2).contains(&ps.len()) {
            return Err(Error::validation(format!("sequence period must be 1 or 2, got {}", ps.len())));
        }
        let pairs = ps.iter().map(|p| GeneratingPair::from_p(p.clone())).collect();
        Ok(Self { ps, pairs })
    }

    pub fn period(&self) -> usize {
        self.pairs.len()
    }

    pub fn pair_for(&self, m: usize) -> &GeneratingPair {
        &self.pairs[m % self.pairs.len()]
    }

    pub fn p_for(&self, m: usize) -> &PositiveFn {
        &self.ps[m % self.ps.len()]
    }
}

fn in_disk(x: f64, y: f64) -> Result<()> {
    if !(x.is_finite() && y.is_finite()) || x * x + y * y > 1.0 + DOMAIN_TOL {
        return Err(Error::domain(format!("point ({x}, {y}) lies outside the unit disk")));
    }
    Ok(())
}

pub fn build_sequence(field: &ConductivityField) -> Result<GeneratingSequence> {
    build_sequence_with(field, PairConvention::Literal)
}

/// Period 2 for separable fields (`p2/p1` and `p1 p2` with `p_i = sqrt(sigma_i)`),
/// period 1 with `p = sqrt(sigma)` otherwise.
pub fn build_sequence_with(field: &ConductivityField, convention: PairConvention) -> Result<GeneratingSequence> {
    let (even, odd): (PositiveFn, PositiveFn) = match field {
        ConductivityField::AnalyticSeparable(a) => {
            a.validate()?;
            if !a.depends_on_x() {
                let a = a.clone();
                return GeneratingSequence::new(vec![Arc::new(move |x, y| {
                    in_disk(x, y)?;
                    Ok(a.sigma_y(y).sqrt())
                })]);
            }
            let (a1, a2) = (a.clone(), a.clone());
            (
                Arc::new(move |x, y| {
                    in_disk(x, y)?;
                    Ok((a1.sigma_y(y) / a1.sigma_x(x)).sqrt())
                }),
                Arc::new(move |x, y| {
                    in_disk(x, y)?;
                    Ok((a2.sigma_x(x) * a2.sigma_y(y)).sqrt())
                }),
            )
        }
        ConductivityField::PiecewiseSeparable(p) => {
            let (p1, p2) = (p.clone(), p.clone());
            (
                Arc::new(move |x, y| {
                    in_disk(x, y)?;
                    let slab = p1.slab_for(x);
                    Ok((slab.y_factor(y) / slab.x_factor(x)).sqrt())
                }),
                Arc::new(move |x, y| {
                    in_disk(x, y)?;
                    let slab = p2.slab_for(x);
                    Ok((slab.x_factor(x) * slab.y_factor(y)).sqrt())
                }),
            )
        }
        ConductivityField::LimitCase(_) | ConductivityField::GeometricScene(_) => {
            let f = field.clone();
            return GeneratingSequence::new(vec![Arc::new(move |x, y| Ok(f.evaluate(x, y)?.sqrt()))]);
        }
    };
    match convention {
        PairConvention::Literal => GeneratingSequence::new(vec![even, odd]),
        PairConvention::MainVekua => GeneratingSequence::new(vec![odd, even]),
    }
}

/// `max |B(F_{m+1}, G_{m+1}) + b(F_m, G_m)|` over `points` and the period.
/// Only meaningful for sequences of period 2: a period-1 sequence of a
/// non-constant `p` is not its own successor.
pub fn successor_residual(seq: &GeneratingSequence, points: &[Complex64], stencil: &Stencil) -> Result<f64> {
    let k = seq.period();
    let per_point = points
        .par_iter()
        .map(|&z| {
            let mut worst = 0.0f64;
            for m in 0..k {
                let [_, _, _, b_m] = coefficients_of_p(seq.p_for(m), z, stencil)?;
                let [_, big_b_next, _, _] = coefficients_of_p(seq.p_for(m + 1), z, stencil)?;
                worst = worst.max((big_b_next + b_m).norm());
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_point.into_iter().fold(0.0, f64::max))
}
