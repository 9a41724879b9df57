use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distribution of the radial parameters `t_s` along each ray.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialGrading {
    #[default]
    Uniform,
    /// `t = 1 - (1 - s/S)^exponent`, clustering nodes toward the rim for
    /// `exponent > 1`.
    Rim { exponent: f64 },
}

impl RadialGrading {
    pub fn parameters(&self, steps: usize) -> Vec<f64> {
        (0..=steps)
            .map(|s| {
                let u = s as f64 / steps as f64;
                match *self {
                    RadialGrading::Uniform => u,
                    RadialGrading::Rim { exponent } => 1.0 - (1.0 - u).powf(exponent),
                }
            })
            .collect()
    }
}

/// Straight rays from an interior center `z0` to the unit circle, each
/// sampled at the same radial parameters `0 = t_0 < ... < t_S = 1`.
#[derive(Clone, Debug)]
pub struct RadialMesh {
    center: Complex64,
    angles: Vec<f64>,
    radial: Vec<f64>,
    // node (r, s) at r * (S + 1) + s
    nodes: Vec<Complex64>,
}

impl RadialMesh {
    /// `rays` equispaced rays from the origin with uniform radial steps.
    pub fn uniform(rays: usize, steps: usize) -> Result<Self> {
        Self::graded(rays, steps, RadialGrading::Uniform)
    }

    pub fn graded(rays: usize, steps: usize, grading: RadialGrading) -> Result<Self> {
        if rays == 0 {
            return Err(Error::validation("mesh needs at least one ray"));
        }
        if let RadialGrading::Rim { exponent } = grading {
            if !(exponent.is_finite() && exponent >= 1.0) {
                return Err(Error::validation(format!("rim grading exponent {exponent} must be >= 1")));
            }
        }
        let angles = (0..rays).map(|r| TAU * r as f64 / rays as f64).collect();
        Self::new(Complex64::new(0.0, 0.0), angles, grading.parameters(steps))
    }

    pub fn new(center: Complex64, angles: Vec<f64>, radial: Vec<f64>) -> Result<Self> {
        if !(center.norm() < 1.0) {
            return Err(Error::validation(format!("mesh center {center} must lie strictly inside the unit disk")));
        }
        if angles.is_empty() {
            return Err(Error::validation("mesh needs at least one ray"));
        }
        if angles.iter().any(|a| !(0.0..TAU).contains(a)) || angles.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("ray angles must be strictly increasing within [0, 2pi)"));
        }
        if radial.len() < 2 || radial[0] != 0.0 || *radial.last().unwrap() != 1.0 {
            return Err(Error::validation("radial parameters must run from 0 to 1"));
        }
        if radial.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("radial parameters must be strictly increasing"));
        }
        let stride = radial.len();
        let mut nodes = Vec::with_capacity(angles.len() * stride);
        for &theta in &angles {
            let dir = Complex64::from_polar(1.0, theta);
            let reach = reach_to_circle(center, dir);
            for (s, &t) in radial.iter().enumerate() {
                nodes.push(if s + 1 == stride {
                    // exact unit modulus for the boundary node
                    let z = center + dir * reach;
                    z / z.norm()
                } else {
                    center + dir * (t * reach)
                });
            }
        }
        Ok(Self {
            center,
            angles,
            radial,
            nodes,
        })
    }

    /// Moves the ray nearest to each corner so that it passes through it.
    /// Corners at the center are ignored.
    pub fn snap_to_corners(self, corners: &[(f64, f64)]) -> Result<Self> {
        let mut angles = self.angles.clone();
        let mut taken = vec![false; angles.len()];
        for &(x, y) in corners {
            let v = Complex64::new(x, y) - self.center;
            if v.norm() < 1e-12 {
                continue;
            }
            let phi = v.arg().rem_euclid(TAU);
            let best = (0..angles.len())
                .filter(|&i| !taken[i])
                .min_by(|&i, &j| angle_gap(self.angles[i], phi).total_cmp(&angle_gap(self.angles[j], phi)))
                .ok_or_else(|| Error::validation("more corners than rays"))?;
            taken[best] = true;
            angles[best] = phi;
        }
        angles.sort_by(f64::total_cmp);
        Self::new(self.center, angles, self.radial)
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn ray_count(&self) -> usize {
        self.angles.len()
    }

    /// Number of radial steps `S`; each ray has `S + 1` nodes.
    pub fn step_count(&self) -> usize {
        self.radial.len() - 1
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn radial(&self) -> &[f64] {
        &self.radial
    }

    pub fn node(&self, ray: usize, step: usize) -> Complex64 {
        self.nodes[ray * self.radial.len() + step]
    }

    pub fn ray(&self, ray: usize) -> &[Complex64] {
        let stride = self.radial.len();
        &self.nodes[ray * stride..(ray + 1) * stride]
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn boundary_points(&self) -> Vec<Complex64> {
        (0..self.ray_count()).map(|r| self.node(r, self.step_count())).collect()
    }

    /// Positions of the boundary nodes as arc length in `[0, 2pi)`.
    pub fn boundary_arc(&self) -> Vec<f64> {
        self.boundary_points().iter().map(|z| z.arg().rem_euclid(TAU)).collect()
    }

    /// Closed-curve trapezoid weights: half the sum of the two adjacent arc
    /// gaps at every boundary node.
    pub fn boundary_weights(&self) -> Vec<f64> {
        arc_weights(&self.boundary_arc())
    }

    pub fn has_uniform_angles(&self) -> bool {
        let p = self.angles.len() as f64;
        self.angles
            .iter()
            .enumerate()
            .all(|(r, a)| (a - TAU * r as f64 / p).abs() < 1e-12)
    }

    pub fn has_uniform_radial(&self) -> bool {
        let s = self.step_count() as f64;
        self.radial
            .iter()
            .enumerate()
            .all(|(i, t)| (t - i as f64 / s).abs() < 1e-12)
    }
}

/// Trapezoid weights for points at arc positions `arc` on a closed curve of
/// length 2pi. Positions need not be sorted.
pub fn arc_weights(arc: &[f64]) -> Vec<f64> {
    let n = arc.len();
    if n == 1 {
        return vec![TAU];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| arc[i].total_cmp(&arc[j]));
    let mut w = vec![0.0; n];
    for k in 0..n {
        let here = arc[order[k]];
        let next = if k + 1 < n { arc[order[k + 1]] } else { arc[order[0]] + TAU };
        let gap = next - here;
        w[order[k]] += 0.5 * gap;
        w[order[(k + 1) % n]] += 0.5 * gap;
    }
    w
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Distance from `center` to the unit circle along the unit direction `dir`.
fn reach_to_circle(center: Complex64, dir: Complex64) -> f64 {
    let b = (dir.conj() * center).re;
    -b + (b * b + 1.0 - center.norm_sqr()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn uniform_mesh_nodes() {
        let m = RadialMesh::uniform(8, 10).unwrap();
        assert_eq!(m.ray_count(), 8);
        assert_eq!(m.step_count(), 10);
        for r in 0..8 {
            assert_eq!(m.node(r, 0), Complex64::new(0.0, 0.0));
            assert!((m.node(r, 10).norm() - 1.0).abs() < 1e-12);
            assert!((m.node(r, 5).norm() - 0.5).abs() < 1e-15);
        }
        assert!(m.has_uniform_angles() && m.has_uniform_radial());
        let w = m.boundary_weights();
        assert!(w.iter().all(|x| (x - TAU / 8.0).abs() < 1e-14));
    }

    #[test]
    fn off_center_rays_end_on_circle() {
        let c = Complex64::new(0.3, -0.2);
        let m = RadialMesh::new(c, vec![0.0, 1.0, 2.0, 4.0], RadialGrading::Uniform.parameters(20)).unwrap();
        for r in 0..4 {
            assert_eq!(m.node(r, 0), c);
            assert!((m.node(r, 20).norm() - 1.0).abs() < 1e-12);
        }
        let total: f64 = m.boundary_weights().iter().sum();
        assert!((total - TAU).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_meshes() {
        assert!(RadialMesh::uniform(0, 10).is_err());
        assert!(RadialMesh::new(Complex64::new(1.0, 0.0), vec![0.0], vec![0.0, 1.0]).is_err());
        assert!(RadialMesh::new(Complex64::new(0.0, 0.0), vec![1.0, 0.5], vec![0.0, 1.0]).is_err());
        assert!(RadialMesh::new(Complex64::new(0.0, 0.0), vec![0.0], vec![0.0, 0.7, 0.5, 1.0]).is_err());
        assert!(RadialMesh::graded(4, 10, RadialGrading::Rim { exponent: 0.5 }).is_err());
    }

    #[test]
    fn rim_grading_clusters_near_boundary() {
        let t = RadialGrading::Rim { exponent: 2.0 }.parameters(10);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[10], 1.0);
        assert!(t[10] - t[9] < t[1] - t[0]);
    }

    #[test]
    fn corner_snapping() {
        let m = RadialMesh::uniform(61, 10).unwrap();
        let corners = [(0.6 * (PI / 4.0).cos(), 0.6 * (PI / 4.0).sin()), (0.0, 0.0)];
        let m = m.snap_to_corners(&corners).unwrap();
        assert!(m.angles().iter().any(|a| (a - PI / 4.0).abs() < 1e-15));
        assert_eq!(m.ray_count(), 61);
        assert!(!m.has_uniform_angles());
        let total: f64 = m.boundary_weights().iter().sum();
        assert!((total - TAU).abs() < 1e-12);
    }
}
