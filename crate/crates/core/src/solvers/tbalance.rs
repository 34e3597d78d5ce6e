use std::time::Instant;

use crate::bergman::{check_level, weighted_from_gram};
use crate::error::{Error, Result};
use crate::surface::{hamiltonian_moment, integrate_values, RadialPotential};

use super::balance::{finish, BLOWUP, MIN_DAMPING, fixed_point_step, newton_balance, BalanceResult, SolverMethod};
use super::options::SolverOptions;
use super::state::State;

const ROOT_TOL: f64 = 1e-15;
const OVERFLOW_MARGIN: f64 = 690.0;

/// How the torus weight is treated by [`t_balance_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightMode {
    /// Solve for `y` together with the metric.
    Solve,
    /// Keep `y` fixed.
    Frozen(f64),
}

/// `M(y) = ∫ (B_{m,𝒴} − C_{m,𝒴}) f_moment ω`, the first moment of the
/// weighted deviation against the circle Hamiltonian.
fn first_moment(st: &State, f: &[f64], y: f64) -> Result<(f64, f64)> {
    let r = weighted_from_gram(&st.potential, &st.gram, y)?;
    let dev: Vec<f64> = r
        .kernel
        .values()
        .iter()
        .zip(f)
        .map(|(b, fv)| (b - r.expected_constant) * fv)
        .collect();
    Ok((integrate_values(&st.potential, &dev), r.sup_deviation))
}

/// Root of `M` by bracket scanning outward from zero, then bisection with
/// secant acceleration.
fn solve_weight(st: &State) -> Result<f64> {
    let f = hamiltonian_moment(&st.potential);
    let f = f.values();
    let m0 = first_moment(st, f, 0.0)?.0;
    if m0 == 0.0 {
        return Ok(0.0);
    }
    let limit = OVERFLOW_MARGIN / st.m as f64;
    let mut scanned = vec![(0.0, m0)];
    let mut bracket = None;
    let mut step = 1e-6;
    'scan: while step <= limit {
        for y in [step, -step] {
            let v = first_moment(st, f, y)?.0;
            scanned.push((y, v));
            if v == 0.0 {
                return Ok(y);
            }
            if v.signum() != m0.signum() {
                bracket = Some(if y > 0.0 { (0.0, m0, y, v) } else { (y, v, 0.0, m0) });
                break 'scan;
            }
        }
        step *= 4.0;
    }
    let (mut a, mut fa, mut b, mut fb) = bracket.ok_or_else(|| {
        let table: Vec<String> = scanned.iter().map(|(y, v)| format!("({y:.3e}, {v:.3e})")).collect();
        Error::BracketFailure(format!(
            "first moment has no sign change for |y| <= {limit:.3e}; scanned (y, M): {}",
            table.join(" ")
        ))
    })?;
    for iter in 0..200 {
        let secant = b - fb * (b - a) / (fb - fa);
        // alternate secant and bisection so one-sided stalls cannot happen
        let y = if iter % 2 == 0 && secant > a && secant < b {
            secant
        } else {
            0.5 * (a + b)
        };
        let v = first_moment(st, f, y)?.0;
        if v == 0.0 {
            return Ok(y);
        }
        if v.signum() == fa.signum() {
            a = y;
            fa = v;
        } else {
            b = y;
            fb = v;
        }
        if (b - a).abs() <= ROOT_TOL * (1.0 + a.abs()) {
            break;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

/// T-balanced metric: `(φ, y)` with the weighted kernel constant.
pub fn t_balance(m: usize, p0: &RadialPotential, opts: &SolverOptions) -> Result<BalanceResult> {
    t_balance_with(m, p0, opts, WeightMode::Solve)
}

pub fn t_balance_with(
    m: usize,
    p0: &RadialPotential,
    opts: &SolverOptions,
    mode: WeightMode,
) -> Result<BalanceResult> {
    check_level(m)?;
    opts.validate()?;
    if let WeightMode::Frozen(y) = mode {
        if y == 0.0 {
            let mut r = newton_balance(m, p0, opts)?;
            r.torus_weight = Some(0.0);
            return Ok(r);
        }
    }
    let start = Instant::now();
    let mut st = State::from_seed(m, p0)?.recentered(opts.recentering)?;
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut damping = opts.damping;
    loop {
        let y = match mode {
            WeightMode::Solve => solve_weight(&st)?,
            WeightMode::Frozen(y) => y,
        };
        let r = weighted_from_gram(&st.potential, &st.gram, y)?.sup_deviation;
        if let Some(prev) = history.last() {
            if r > BLOWUP * prev && damping > MIN_DAMPING {
                damping *= 0.5;
            }
        }
        history.push(r);
        if r <= opts.tolerance || iterations >= opts.max_iterations {
            return Ok(finish(
                st,
                history,
                r <= opts.tolerance,
                iterations,
                start,
                SolverMethod::TBalance,
                Some(y),
            ));
        }
        iterations += 1;
        st = fixed_point_step(&st, damping, y)?.recentered(opts.recentering)?;
    }
}
