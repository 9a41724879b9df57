//! Generating pairs, their characteristic coefficients, and the
//! (F,G)-integral along radial rays.
//!
//! All derivatives use `d/dz = d/dx - i d/dy` and `d/dzbar = d/dx + i d/dy`
//! without the factor 1/2.

mod integral;
mod mesh;
mod pair;
mod sequence;

pub use integral::{fg_integral, fg_integral_into, IntegralScratch, RayIntegrator, RayQuadrature};
pub use mesh::{arc_weights, RadialGrading, RadialMesh};
pub use pair::{
    characteristic_coefficients, coefficients_at, coefficients_of_p, fg_derivative, pair_from_p, vekua_residual,
    CharacteristicCoefficients, ComplexFn, GeneratingPair, GeneratingPairField, PositiveFn, Stencil,
};
pub use sequence::{build_sequence, build_sequence_with, successor_residual, GeneratingSequence, PairConvention};
