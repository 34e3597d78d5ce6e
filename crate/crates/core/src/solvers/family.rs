use serde::Serialize;

use crate::error::{Error, Result};
use crate::surface::{scalar_curvature, RadialPotential};

use super::balance::{newton_balance, tk_iterate, BalanceResult};
use super::options::SolverOptions;
use super::state::centered_distance;

/// Loose tolerance for the fixed-point warm start before Newton.
const WARM_TOLERANCE: f64 = 1e-4;
const SLACK: f64 = 1.1;

#[derive(Debug, Clone, Serialize)]
pub struct FamilyLevel {
    pub level: usize,
    pub converged: bool,
    pub residual: f64,
    /// `sup |φ_m|`: distance to the Fubini–Study (constant scalar curvature) potential.
    pub d_m: f64,
    /// `sup |σ_{ω_m} − 2|`.
    pub sigma_deviation: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct FamilyReport {
    pub levels: Vec<FamilyLevel>,
    pub results: Vec<BalanceResult>,
    /// Index into the requested level list of the first failed level.
    pub failure_index: Option<usize>,
    /// `d_m` non-increasing up to 10% slack.
    pub d_nonincreasing: bool,
    /// `sup |σ − 2|` strictly decreasing.
    pub sigma_decreasing: bool,
}

/// Solves one level: fixed-point iteration to a loose tolerance, then
/// Newton to the requested one.
pub fn solve_level(m: usize, seed: &RadialPotential, opts: &SolverOptions) -> Result<BalanceResult> {
    let warm_opts = opts.with_tolerance(opts.tolerance.max(WARM_TOLERANCE));
    let warm = tk_iterate(m, seed, &warm_opts)?;
    let mut newton = newton_balance(m, &warm.potential, opts)?;
    let warm_steps = warm.residual_history.len() - 1;
    let mut history = warm.residual_history;
    history.extend(newton.residual_history.iter().skip(1));
    newton.iterations += warm.iterations;
    newton.warm_start_steps = warm_steps;
    newton.residual_history = history;
    newton.monotone = newton.residual_history.windows(2).all(|w| w[1] <= w[0]);
    Ok(newton)
}

/// Balanced metrics along increasing levels, each warm-started from the
/// previous solution.
pub fn balanced_family(
    levels: &[usize],
    seed: &RadialPotential,
    opts: &SolverOptions,
) -> Result<FamilyReport> {
    if levels.is_empty() || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(format!(
            "family levels must be non-empty and strictly increasing: {levels:?}"
        )));
    }
    let mut rows = Vec::new();
    let mut results = Vec::new();
    let mut failure_index = None;
    let mut current = seed.clone();
    for (i, &m) in levels.iter().enumerate() {
        let r = solve_level(m, &current, opts)?;
        let sigma = scalar_curvature(&r.potential);
        let row = FamilyLevel {
            level: m,
            converged: r.converged,
            residual: r.final_residual(),
            d_m: r.potential.phi_values().iter().fold(0.0f64, |a, v| a.max(v.abs())),
            sigma_deviation: sigma.shifted(-2.0).sup_norm(),
            iterations: r.iterations,
        };
        rows.push(row);
        let ok = r.converged;
        current = r.potential.clone();
        results.push(r);
        if !ok {
            failure_index = Some(i);
            break;
        }
    }
    let d_nonincreasing = rows.windows(2).all(|w| w[1].d_m <= SLACK * w[0].d_m);
    let sigma_decreasing = rows
        .windows(2)
        .all(|w| w[1].sigma_deviation < w[0].sigma_deviation);
    Ok(FamilyReport {
        levels: rows,
        results,
        failure_index,
        d_nonincreasing,
        sigma_decreasing,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    pub level: usize,
    pub converged: Vec<bool>,
    pub final_residuals: Vec<f64>,
    /// Pairwise `sup |φ_a − φ_b|` after moment-centering (`None` when either
    /// seed failed).
    pub centered_distances: Vec<Vec<Option<f64>>>,
    /// Same without centering.
    pub raw_distances: Vec<Vec<Option<f64>>>,
    pub max_centered_distance: f64,
    pub pass: bool,
}

pub const UNIQUENESS_TOL: f64 = 1e-6;

/// Runs Newton from every seed and compares the solutions modulo the torus.
pub fn uniqueness_probe(
    m: usize,
    seeds: &[RadialPotential],
    opts: &SolverOptions,
) -> Result<UniquenessReport> {
    if seeds.is_empty() {
        return Err(Error::InvalidInput("uniqueness probe needs at least one seed".into()));
    }
    let results = seeds
        .iter()
        .map(|p| newton_balance(m, p, opts))
        .collect::<Result<Vec<_>>>()?;
    let n = results.len();
    let mut centered = vec![vec![None; n]; n];
    let mut raw = vec![vec![None; n]; n];
    let mut max_centered = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            if !(results[a].converged && results[b].converged) {
                continue;
            }
            let (pa, pb) = (&results[a].potential, &results[b].potential);
            let d = centered_distance(pa, pb)?;
            let r = pa
                .phi_values()
                .iter()
                .zip(pb.phi_values())
                .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
            max_centered = max_centered.max(d);
            centered[a][b] = Some(d);
            raw[a][b] = Some(r);
        }
    }
    let converged: Vec<bool> = results.iter().map(|r| r.converged).collect();
    let pass = converged.iter().any(|c| *c) && max_centered <= UNIQUENESS_TOL;
    Ok(UniquenessReport {
        level: m,
        final_residuals: results.iter().map(|r| r.final_residual()).collect(),
        converged,
        centered_distances: centered,
        raw_distances: raw,
        max_centered_distance: max_centered,
        pass,
    })
}
