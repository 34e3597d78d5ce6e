use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::bergman::{check_level, kernel_jets, normalized_derivative};
use crate::error::{Error, Result};
use crate::jet::JET_ORDER;
use crate::surface::{laplacian_apply, lichnerowicz_apply, GridFunction, RadialPotential};

use super::options::{JacobianMode, Recentering, SolverOptions};
use super::state::{lambda_of, State};

const MAX_HALVINGS: usize = 30;
const SINGULAR_TOL: f64 = 1e-13;
pub(crate) const BLOWUP: f64 = 2.0;
pub(crate) const MIN_DAMPING: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMethod {
    FixedPoint,
    Newton(JacobianMode),
    TBalance,
}

/// Outcome of a balancing solve.
#[derive(Debug, Clone)]
pub struct BalanceResult {
    pub level: usize,
    pub potential: RadialPotential,
    /// Balancing coefficients `λ_j` of `e^{mΦ} = Σ λ_j binom(m,j) e^{jt}`.
    pub lambda: Vec<f64>,
    pub torus_weight: Option<f64>,
    /// `sup |B − C|` before the first step and after every step.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub wall_time: Duration,
    pub method: SolverMethod,
    /// `true` when the residual never increased between accepted steps.
    pub monotone: bool,
    /// Leading history entries produced by a fixed-point warm start.
    pub warm_start_steps: usize,
}

impl BalanceResult {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().expect("history is never empty")
    }

    /// Estimated convergence order from the last three residuals strictly
    /// above `floor`, ignoring any warm-start prefix.
    pub fn observed_order(&self, floor: f64) -> Option<f64> {
        observed_order(&self.residual_history[self.warm_start_steps..], floor)
    }
}

/// `log(r_{k+1}/r_k) / log(r_k/r_{k−1})` over the last usable triple.
pub fn observed_order(history: &[f64], floor: f64) -> Option<f64> {
    let usable: Vec<f64> = history.iter().copied().filter(|r| *r > floor).collect();
    let n = usable.len();
    if n < 3 {
        return None;
    }
    let (a, b, c) = (usable[n - 3], usable[n - 2], usable[n - 1]);
    let denom = (b / a).ln();
    if denom >= 0.0 {
        return None;
    }
    Some((c / b).ln() / denom)
}

pub(crate) fn finish(
    st: State,
    history: Vec<f64>,
    converged: bool,
    iterations: usize,
    start: Instant,
    method: SolverMethod,
    torus_weight: Option<f64>,
) -> BalanceResult {
    let monotone = history.windows(2).all(|w| w[1] <= w[0]);
    BalanceResult {
        level: st.m,
        lambda: lambda_of(&st.x),
        potential: st.potential,
        torus_weight,
        residual_history: history,
        converged,
        iterations,
        wall_time: start.elapsed(),
        method,
        monotone,
        warm_start_steps: 0,
    }
}

/// One damped fixed-point step `x ← x − d·log(λN)`, twisted by `e^{jy}`.
pub(crate) fn fixed_point_step(st: &State, damping: f64, y: f64) -> Result<State> {
    let x = st
        .x
        .iter()
        .zip(&st.gram.normalized)
        .enumerate()
        .map(|(j, (x, n))| x - damping * (x + n.ln() + j as f64 * y))
        .collect();
    State::new(st.m, x, &st.disc())
}

/// Gram self-map iteration `D ↦ Gram(m, Φ_D)`, started from the Gram
/// diagonal of `p0`. A fixed point is an `m`-th balanced metric.
pub fn tk_iterate(m: usize, p0: &RadialPotential, opts: &SolverOptions) -> Result<BalanceResult> {
    check_level(m)?;
    opts.validate()?;
    let start = Instant::now();
    let mut st = State::from_seed(m, p0)?.recentered(opts.recentering)?;
    let mut r = st.sup_residual();
    let mut history = vec![r];
    let mut damping = opts.damping;
    let mut iterations = 0;
    while r > opts.tolerance && iterations < opts.max_iterations {
        iterations += 1;
        // The sup-norm residual may rise transiently while the map still
        // contracts; only a blow-up triggers a damped retry.
        let (next, rn) = loop {
            let candidate = fixed_point_step(&st, damping, 0.0)
                .and_then(|s| s.recentered(opts.recentering));
            match candidate {
                Ok(next) => {
                    let rn = next.sup_residual();
                    if (rn.is_finite() && rn <= BLOWUP * r) || damping < MIN_DAMPING {
                        break (next, rn);
                    }
                }
                Err(e) if damping < MIN_DAMPING => return Err(e),
                Err(_) => {}
            }
            damping *= 0.5;
        };
        if !rn.is_finite() {
            return Err(Error::NonFinite("fixed-point residual".into()));
        }
        st = next;
        r = rn;
        history.push(r);
    }
    Ok(finish(
        st,
        history,
        r <= opts.tolerance,
        iterations,
        start,
        SolverMethod::FixedPoint,
        None,
    ))
}

/// Gauge rows appended to every Newton system: scale `Σ δx = 0` and the
/// torus direction `Σ j δx_j = 0`.
fn gauge_rows(m: usize, scale: f64) -> [Vec<f64>; 2] {
    [
        vec![scale; m + 1],
        (0..=m).map(|j| scale * j as f64 / m as f64).collect(),
    ]
}

fn solve_augmented(
    rows: usize,
    a: DMatrix<f64>,
    rhs: DVector<f64>,
) -> Result<DVector<f64>> {
    let cols = a.ncols();
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > SINGULAR_TOL * smax) {
        let v_t = svd.v_t.as_ref().expect("requested V");
        let imin = sv.imin();
        let dir: Vec<String> = v_t.row(imin).iter().map(|v| format!("{v:.3}")).collect();
        return Err(Error::SingularJacobian {
            sigma_min: smin,
            direction: format!(
                "[{}] ({} equations, {cols} unknowns)",
                dir.join(", "),
                rows
            ),
        });
    }
    svd.solve(&rhs, 0.0).map_err(|e| Error::SingularJacobian {
        sigma_min: smin,
        direction: e.to_string(),
    })
}

/// Newton step in `x = log λ` on `R(x) = κλN(λ) − 1`.
fn exact_step(st: &State) -> Result<DVector<f64>> {
    let m = st.m;
    let lam = lambda_of(&st.x);
    let dirs = st.directions();
    let r = st.residual_vector();
    let scale = st.trace_scale();
    let n = m + 1;
    let mut a = DMatrix::zeros(n + 2, n);
    for (k, dir) in dirs.iter().enumerate() {
        let dn = normalized_derivative(m, &st.potential, dir);
        for j in 0..n {
            a[(j, k)] = scale * lam[j] * dn[j];
        }
        a[(k, k)] += scale * lam[k] * st.gram.normalized[k];
    }
    for (i, row) in gauge_rows(m, 1.0).iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            a[(n + i, k)] = *v;
        }
    }
    let mut rhs = DVector::zeros(n + 2);
    for j in 0..n {
        rhs[j] = -r[j];
    }
    solve_augmented(n + 2, a, rhs)
}

/// Quasi-Newton step: least squares of `L_ω(∂φ/∂x) δx ≈ −β` in the
/// volume-weighted norm.
fn quasi_step(st: &State) -> Result<DVector<f64>> {
    let m = st.m;
    let p = &st.potential;
    let q = p.scheme();
    let c = (m as f64 + 1.0) / m as f64;
    let kernel = GridFunction::from_jets(q.clone(), "B", kernel_jets(p, &st.gram, 0.0), JET_ORDER)?;
    let lap = laplacian_apply(p, &kernel)?;
    let beta = kernel
        .shifted(-c)
        .linear_combination(2.0 * m as f64, &lap, 4.0 / 3.0)?;
    let cols = st.direction_functions();
    let n = m + 1;
    let rows = q.len();
    let sqrt_w: Vec<f64> = q
        .weights()
        .iter()
        .zip(p.density_jets())
        .map(|(w, r)| (w * r.value()).sqrt())
        .collect();
    let mut a = DMatrix::zeros(rows + 2, n);
    for (k, dir) in cols.iter().enumerate() {
        let l = lichnerowicz_apply(p, dir)?;
        for i in 0..rows {
            a[(i, k)] = sqrt_w[i] * l.values()[i];
        }
    }
    let scale = a.norm() / (n as f64).sqrt();
    for (i, row) in gauge_rows(m, scale).iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            a[(rows + i, k)] = *v;
        }
    }
    let mut rhs = DVector::zeros(rows + 2);
    for i in 0..rows {
        rhs[i] = -sqrt_w[i] * beta.values()[i];
    }
    solve_augmented(rows + 2, a, rhs)
}

/// Newton's method on the balancing equation, with residual-decrease line
/// search and the torus direction deflated by a gauge constraint.
pub fn newton_balance(
    m: usize,
    p0: &RadialPotential,
    opts: &SolverOptions,
) -> Result<BalanceResult> {
    check_level(m)?;
    opts.validate()?;
    let start = Instant::now();
    let mut st = State::from_seed(m, p0)?.recentered(opts.recentering)?;
    let mut r = st.sup_residual();
    let mut history = vec![r];
    let mut iterations = 0;
    while r > opts.tolerance && iterations < opts.max_iterations {
        iterations += 1;
        let dx = match opts.jacobian {
            JacobianMode::Exact => exact_step(&st)?,
            JacobianMode::Quasi => quasi_step(&st)?,
        };
        let mut t = opts.damping;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let x: Vec<f64> = st.x.iter().zip(dx.iter()).map(|(a, b)| a + t * b).collect();
            if let Ok(next) = State::new(m, x, &st.disc()) {
                let rn = next.sup_residual();
                if rn.is_finite() && rn < r {
                    accepted = Some((next, rn));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((next, rn)) => {
                st = next.recentered(opts.recentering)?;
                r = if opts.recentering == Recentering::None {
                    rn
                } else {
                    st.sup_residual()
                };
                history.push(r);
            }
            None => break,
        }
    }
    Ok(finish(
        st,
        history,
        r <= opts.tolerance,
        iterations,
        start,
        SolverMethod::Newton(opts.jacobian),
        None,
    ))
}
