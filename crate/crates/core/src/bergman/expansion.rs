use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::surface::{scalar_curvature, GridFunction, RadialPotential};

use super::gram::MAX_LEVEL;
use super::kernel::bergman_kernel;

const MAX_CONDITION: f64 = 1e12;
pub const FIT_DEGREE: usize = 2;

/// Error of the first-order expansion at one level:
/// `sup |m (B_m − 1) − σ/2|`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LevelError {
    pub level: usize,
    pub error: f64,
}

#[derive(Debug, Clone)]
pub struct ExpansionFit {
    pub levels: Vec<usize>,
    pub degree: usize,
    pub a1: GridFunction,
    pub a2: GridFunction,
    /// Per-node least-squares residual norm.
    pub residual: GridFunction,
    /// `sup |a1 − σ/2|`.
    pub a1_error: f64,
    /// `sup |σ − 2|`, the natural scale for `a1_error`.
    pub sigma_deviation: f64,
    pub error_curve: Vec<LevelError>,
    pub condition_number: f64,
}

/// Per-node least squares of `B_m − 1 ≈ a1 q + a2 q²`, `q = 1/m`.
pub fn expansion_fit(p: &RadialPotential, levels: &[usize]) -> Result<ExpansionFit> {
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::DegenerateFit(format!(
            "levels must be strictly increasing (duplicate abscissae make the fit singular): {levels:?}"
        )));
    }
    if levels.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "expansion fit needs at least 3 levels, got {}",
            levels.len()
        )));
    }
    if let Some(&m) = levels.iter().find(|&&m| m == 0 || m > MAX_LEVEL) {
        return Err(Error::LevelOutOfRange(m));
    }
    let design = DMatrix::from_fn(levels.len(), FIT_DEGREE, |i, k| {
        (1.0 / levels[i] as f64).powi(k as i32 + 1)
    });
    let svd = design.clone().svd(true, true);
    let sv = &svd.singular_values;
    let condition_number = sv.max() / sv.min();
    if !(condition_number <= MAX_CONDITION) {
        return Err(Error::DegenerateFit(format!(
            "condition number {condition_number:e} exceeds {MAX_CONDITION:e}"
        )));
    }

    let kernels = levels
        .iter()
        .map(|&m| bergman_kernel(m, p).map(|r| r.kernel))
        .collect::<Result<Vec<_>>>()?;
    let sigma = scalar_curvature(p);
    let n = p.scheme().len();
    let (mut a1, mut a2, mut res) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let rhs = DVector::from_iterator(levels.len(), kernels.iter().map(|k| k.values()[i] - 1.0));
        let x = svd
            .solve(&rhs, 0.0)
            .map_err(|e| Error::DegenerateFit(e.to_string()))?;
        a1[i] = x[0];
        a2[i] = x[1];
        res[i] = (&design * &x - &rhs).norm();
    }
    let scheme = p.scheme().clone();
    let a1 = GridFunction::from_values(scheme.clone(), "a1", a1)?;
    let a2 = GridFunction::from_values(scheme.clone(), "a2", a2)?;
    let residual = GridFunction::from_values(scheme, "fit_residual", res)?;
    let half_sigma = sigma.scaled(0.5);
    let a1_error = a1.max_abs_diff(&half_sigma);
    let sigma_deviation = sigma.shifted(-2.0).sup_norm();
    let error_curve = levels
        .iter()
        .zip(&kernels)
        .map(|(&m, k)| {
            let mf = m as f64;
            let error = k
                .values()
                .iter()
                .zip(half_sigma.values())
                .fold(0.0f64, |e, (b, h)| e.max((mf * (b - 1.0) - h).abs()));
            LevelError { level: m, error }
        })
        .collect();
    Ok(ExpansionFit {
        levels: levels.to_vec(),
        degree: FIT_DEGREE,
        a1,
        a2,
        residual,
        a1_error,
        sigma_deviation,
        error_curve,
        condition_number,
    })
}
