//! The polarized model: circle-invariant Kähler metrics on the projective
//! line with the degree-one bundle, and their differential geometry.

mod grid;
mod ops;
mod perturbation;
mod potential;

pub use grid::GridFunction;
pub use ops::{
    hamiltonian_moment, integrate, laplacian_apply, lichnerowicz_apply, scalar_curvature, volume,
};
pub use perturbation::{BernsteinPoly, ChebSeries, Perturbation, PerturbationSpec, Term};
pub use potential::{
    make_fs_potential, make_perturbed_potential, scheme_for, PotentialKind, RadialPotential,
    MIN_GRID_SIZE, MIN_WINDOW,
};

pub(crate) use ops::integrate_values;
pub(crate) use perturbation::{ln_binomial_row, s_jet, sc_jet};
pub(crate) use potential::{density_jet, e_operator};
