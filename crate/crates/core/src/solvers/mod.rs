//! Balanced and T-balanced metric solvers.
//!
//! Every solver works on Bergman-type potentials
//! `e^{mΦ} = Σ_j λ_j binom(m,j) e^{jt}` in the coordinates `x = log λ`.
//! The balancing condition `B_m ≡ (m+1)/m` is equivalent to `λ_j N_j = 1`
//! for the normalized Gram entries `N_j`; the residual has the scale and
//! torus directions as exact symmetries, which the solvers gauge-fix.

mod balance;
mod family;
mod options;
mod state;
mod tbalance;

pub use balance::{newton_balance, observed_order, tk_iterate, BalanceResult, SolverMethod};
pub use family::{
    balanced_family, solve_level, uniqueness_probe, FamilyLevel, FamilyReport, UniquenessReport,
    UNIQUENESS_TOL,
};
pub use options::{JacobianMode, Recentering, SolverOptions};
pub use state::{centered_distance, moment_barycenter, moment_center_shift, moment_centered};
pub use tbalance::{t_balance, t_balance_with, WeightMode};
