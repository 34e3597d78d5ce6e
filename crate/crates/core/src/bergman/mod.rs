//! Gram matrices, Bergman kernels (plain and torus-weighted), the modified
//! kernel β, the asymptotic-expansion fit, and first variations.
//!
//! Everything is computed in the moment coordinate: with `pmf_j` the
//! binomial probabilities in `s`, the section norms are
//! `G_jj = ∫ s^j (1-s)^(m-j) e^{-mφ} ρ ds` and the kernel is
//! `B = (1/m) e^{-mφ} Σ_j (m+1) pmf_j / N_j` with `N_j = (m+1) binom(m,j) G_jj`.

mod derivative;
mod expansion;
mod gram;
mod kernel;

pub use derivative::{bergman_derivative, gram_derivative, project_to_gram_kernel};
pub use expansion::{expansion_fit, ExpansionFit, LevelError, FIT_DEGREE};
pub use gram::{c_of_m, potential_id, section_norms, GramDiagonal, MAX_LEVEL};
pub use kernel::{
    bergman_kernel, beta, beta_weighted, c_weighted, kernel_at, weighted_bergman, BergmanReport,
    TorusWeight,
};

pub(crate) use derivative::normalized_derivative;
pub(crate) use gram::{check_level, gram_unchecked};
pub(crate) use kernel::{kernel_jets, weighted_from_gram};
