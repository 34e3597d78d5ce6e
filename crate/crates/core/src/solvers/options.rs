use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gauge fixing for the torus orbit of solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Recentering {
    None,
    EvenSymmetrize,
    #[default]
    MomentCenter,
}

/// Linearization used by [`newton_balance`](super::newton_balance).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum JacobianMode {
    /// Exact derivative of the balancing residual.
    #[default]
    Exact,
    /// Lichnerowicz operator acting on the potential variation.
    Quasi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Target for `sup |B − C|`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub recentering: Recentering,
    /// Initial step fraction in `(0, 1]`; halved on residual increase.
    pub damping: f64,
    pub jacobian: JacobianMode,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-8,
            max_iterations: 500,
            recentering: Recentering::MomentCenter,
            damping: 1.0,
            jacobian: JacobianMode::Exact,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            problems.push(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if self.max_iterations < 1 {
            problems.push("max_iterations must be at least 1".to_string());
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            problems.push(format!("damping must lie in (0, 1], got {}", self.damping));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidOptions(problems.join("; ")))
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_recentering(mut self, recentering: Recentering) -> Self {
        self.recentering = recentering;
        self
    }

    pub fn with_damping(mut self, damping: f64) -> Self {
        self.damping = damping;
        self
    }

    pub fn with_jacobian(mut self, jacobian: JacobianMode) -> Self {
        self.jacobian = jacobian;
        self
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let o = SolverOptions::default();
        o.validate().unwrap();
        assert_eq!(o.tolerance, 1e-8);
        assert_eq!(o.max_iterations, 500);
    }

    #[test]
    fn collects_every_problem() {
        let o = SolverOptions {
            tolerance: 0.0,
            max_iterations: 0,
            damping: 1.5,
            ..Default::default()
        };
        match o.validate() {
            Err(Error::InvalidOptions(msg)) => assert_eq!(msg.matches(';').count(), 2),
            other => panic!("{other:?}"),
        }
    }
}
