//! Spectral flow, skew-corner Fredholm indices and odd index pairings on
//! finite von Neumann models.
//!
//! The model algebra is a direct sum of matrix blocks `N = ⊕ M_{n_i}(ℂ)` with a
//! block mask picking out the ideal `J` and one trace weight per block. Every
//! class computed here lives in `K₀(J) ≅ ℤ^{#ideal blocks}` and is turned into
//! a real number by the weighted trace `τ_*`.

pub mod corner_index;
pub mod error;
pub mod examples;
pub mod kk_pairing;
pub mod linalg;
pub mod proj_calc;
pub mod quadrature;
pub mod spec_flow;
pub mod spectral_triple;
pub mod tolerance;
pub mod vn_model;

pub use corner_index::{boundary_map, corner_index, is_corner_fredholm, FredholmReport};
pub use error::{Error, Result};
pub use proj_calc::{chi, nearest_projection, null_projection, polar_phase, proj_intersection};
pub use spec_flow::{certify_path, find_partition, numeric_spectral_flow, spectral_flow};
pub use tolerance::Tolerances;
pub use vn_model::{
    k0_of_difference, quotient_norm, tau, tau_star, Block, BlockOperator, K0Class, OperatorPath,
    VnAlgebra,
};
