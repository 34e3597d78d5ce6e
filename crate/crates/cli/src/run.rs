use std::time::Instant;

use serde::Serialize;

use bergbal_core::bergman::{bergman_kernel, beta, expansion_fit};
use bergbal_core::circle::{integer_consistency_report, make_partition, CircleSample};
use bergbal_core::solvers::{
    balanced_family, solve_level, t_balance_with, tk_iterate, uniqueness_probe, BalanceResult,
    WeightMode,
};
use bergbal_core::surface::{scalar_curvature, GridFunction, RadialPotential};

use crate::config::{Command, ExperimentConfig};
use crate::report::{RunReport, Series, Table};

/// Newton steps are expected to be quadratic once the residual is this small.
const ORDER_FLOOR: f64 = 1e-14;
const MIN_ORDER: f64 = 1.8;
/// Relative budget for `sup |a₁ − σ/2|` against `sup |σ − 2|`.
const A1_BUDGET: f64 = 0.05;
const A1_FLOOR: f64 = 1e-6;

#[derive(Debug, Serialize)]
struct LevelSummary {
    level: usize,
    converged: bool,
    iterations: usize,
    final_residual: f64,
    recheck_residual: f64,
    torus_weight: Option<f64>,
    observed_order: Option<f64>,
    method: String,
    lambda: Vec<f64>,
}

fn series(name: impl Into<String>, f: &GridFunction) -> Series {
    Series {
        name: name.into(),
        node_label: "t".into(),
        nodes: f.nodes().to_vec(),
        values: f.values().to_vec(),
    }
}

fn phi_series(name: impl Into<String>, p: &RadialPotential) -> Series {
    Series {
        name: name.into(),
        node_label: "t".into(),
        nodes: p.scheme().t().to_vec(),
        values: p.phi_values(),
    }
}

/// Runs the configured command. Downstream errors are captured in the
/// report, never propagated.
pub fn run_experiment(cfg: &ExperimentConfig) -> RunReport {
    let mut report = RunReport::new(cfg.clone());
    let start = Instant::now();
    if let Err(e) = dispatch(cfg, &mut report) {
        report.errors.push(e.to_string());
    }
    report.timing.total_seconds = start.elapsed().as_secs_f64();
    report.finalize();
    report
}

fn seed(cfg: &ExperimentConfig) -> bergbal_core::Result<RadialPotential> {
    cfg.potential
        .as_ref()
        .expect("validated config has a potential")
        .build(&cfg.quadrature)
}

fn dispatch(cfg: &ExperimentConfig, report: &mut RunReport) -> bergbal_core::Result<()> {
    match cfg.command {
        Command::Balance | Command::Newton | Command::Tbalance => run_solver(cfg, report),
        Command::Family => run_family(cfg, report),
        Command::Expand => run_expand(cfg, report),
        Command::Beta => run_beta(cfg, report),
        Command::Fourier => run_fourier(cfg, report),
        Command::Probe => run_probe(cfg, report),
    }
}

fn summarize(r: &BalanceResult) -> bergbal_core::Result<LevelSummary> {
    // solver-independent recheck of the returned metric
    let recheck = bergman_kernel(r.level, &r.potential)?.sup_deviation;
    Ok(LevelSummary {
        level: r.level,
        converged: r.converged,
        iterations: r.iterations,
        final_residual: r.final_residual(),
        recheck_residual: recheck,
        torus_weight: r.torus_weight,
        observed_order: r.observed_order(ORDER_FLOOR),
        method: format!("{:?}", r.method),
        lambda: r.lambda.clone(),
    })
}

fn run_solver(cfg: &ExperimentConfig, report: &mut RunReport) -> bergbal_core::Result<()> {
    let p0 = seed(cfg)?;
    let opts = cfg.solver;
    let mut summaries = Vec::new();
    for &m in &cfg.levels {
        let t0 = Instant::now();
        let r = match cfg.command {
            Command::Balance => tk_iterate(m, &p0, &opts)?,
            Command::Newton => solve_level(m, &p0, &opts)?,
            _ => {
                let mode = match cfg.tbalance.frozen_weight {
                    Some(y) => WeightMode::Frozen(y),
                    None => WeightMode::Solve,
                };
                t_balance_with(m, &p0, &opts, mode)?
            }
        };
        report.timing.steps.push((format!("m={m}"), t0.elapsed().as_secs_f64()));
        let s = summarize(&r)?;
        report.verdict(
            format!("m={m}: converged"),
            s.converged && s.final_residual <= opts.tolerance,
            format!("final residual {:e} after {} iterations", s.final_residual, s.iterations),
        );
        if s.converged && s.torus_weight.is_none() {
            report.verdict(
                format!("m={m}: independent recheck"),
                s.recheck_residual <= opts.tolerance,
                format!("sup|B − C| recomputed from scratch = {:e}", s.recheck_residual),
            );
        }
        if cfg.command == Command::Newton {
            if let Some(order) = s.observed_order {
                report.verdict(
                    format!("m={m}: quadratic convergence"),
                    order >= MIN_ORDER,
                    format!("observed order {order:.3}"),
                );
            }
        }
        report.history(format!("m{m}"), &r.residual_history);
        report.series.push(phi_series(format!("phi_m{m}"), &r.potential));
        summaries.push(s);
    }
    report.output("levels", summaries);
    Ok(())
}

fn run_family(cfg: &ExperimentConfig, report: &mut RunReport) -> bergbal_core::Result<()> {
    let p0 = seed(cfg)?;
    let fam = balanced_family(&cfg.levels, &p0, &cfg.solver)?;
    report.verdict(
        "all levels converged",
        fam.failure_index.is_none(),
        match fam.failure_index {
            Some(i) => format!("level m={} failed", cfg.levels[i]),
            None => format!("{} levels", fam.levels.len()),
        },
    );
    report.verdict("d_m non-increasing (10% slack)", fam.d_nonincreasing, "");
    report.verdict("sup|σ − 2| decreasing", fam.sigma_decreasing, "");
    report.tables.push(Table {
        name: "family".into(),
        columns: ["m", "residual", "d_m", "sup|sigma-2|"].map(String::from).to_vec(),
        rows: fam
            .levels
            .iter()
            .map(|l| vec![l.level as f64, l.residual, l.d_m, l.sigma_deviation])
            .collect(),
    });
    for r in &fam.results {
        report.history(format!("m{}", r.level), &r.residual_history);
        report.series.push(phi_series(format!("phi_m{}", r.level), &r.potential));
    }
    report.output("levels", &fam.levels);
    Ok(())
}

fn run_expand(cfg: &ExperimentConfig, report: &mut RunReport) -> bergbal_core::Result<()> {
    let p = seed(cfg)?;
    let fit = expansion_fit(&p, &cfg.levels)?;
    let budget = (A1_BUDGET * fit.sigma_deviation).max(A1_FLOOR);
    report.verdict(
        "a1 = σ/2",
        fit.a1_error <= budget,
        format!("sup|a1 − σ/2| = {:e}, budget {:e}", fit.a1_error, budget),
    );
    if let [.., a, b] = fit.error_curve.as_slice() {
        if a.error > A1_FLOOR {
            report.verdict(
                "first-order error decay",
                b.error <= 0.6 * a.error,
                format!("error m={}: {:e}, m={}: {:e}", a.level, a.error, b.level, b.error),
            );
        }
    }
    let half_sigma = scalar_curvature(&p).scaled(0.5);
    report.series.push(series("a1", &fit.a1));
    report.series.push(series("a2", &fit.a2));
    report.series.push(series("half_sigma", &half_sigma));
    report.tables.push(Table {
        name: "expansion_error".into(),
        columns: ["m", "sup|m(B-1) - sigma/2|"].map(String::from).to_vec(),
        rows: fit.error_curve.iter().map(|e| vec![e.level as f64, e.error]).collect(),
    });
    report.output("a1_error", fit.a1_error);
    report.output("sigma_deviation", fit.sigma_deviation);
    report.output("condition_number", fit.condition_number);
    report.output("degree", fit.degree);
    report.output("a1_mean", fit.a1.values().iter().sum::<f64>() / fit.a1.len() as f64);
    Ok(())
}

fn run_beta(cfg: &ExperimentConfig, report: &mut RunReport) -> bergbal_core::Result<()> {
    let p = seed(cfg)?;
    let target = scalar_curvature(&p).shifted(-2.0);
    let mut rows = Vec::new();
    for &m in &cfg.levels {
        let b = beta(m, &p)?;
        let dev = b.max_abs_diff(&target);
        rows.push(vec![m as f64, b.sup_norm(), dev]);
        report.series.push(series(format!("beta_m{m}"), &b));
    }
    report.series.push(series("sigma_minus_2", &target));
    let devs: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    if devs.len() >= 2 {
        report.verdict(
            "β → σ − 2",
            devs.windows(2).all(|w| w[1] < w[0]),
            format!("sup|β − (σ − 2)| per level: {devs:?}"),
        );
    }
    report.tables.push(Table {
        name: "beta".into(),
        columns: ["m", "sup|beta|", "sup|beta-(sigma-2)|"].map(String::from).to_vec(),
        rows,
    });
    Ok(())
}

fn run_fourier(cfg: &ExperimentConfig, report: &mut RunReport) -> bergbal_core::Result<()> {
    let f = cfg.fourier.as_ref().expect("validated config has a fourier section");
    let s = match &f.samples {
        Some(v) => CircleSample::from_samples(v)?,
        None => CircleSample::trigonometric(f.constant, &f.cos, &f.sin)?,
    };
    let partitions = f
        .widths
        .iter()
        .map(|w| make_partition(*w))
        .collect::<bergbal_core::Result<Vec<_>>>()?;
    let r = integer_consistency_report(&s, &partitions, (f.m_min, f.m_max))?;
    report.verdict(
        "F(S)(m) = B_m on integers",
        r.max_discrepancy <= r.tolerance,
        format!("max discrepancy {:e}", r.max_discrepancy),
    );
    report.verdict(
        "F(S) + sin(πξ) agrees on integers",
        r.max_shifted_discrepancy <= r.tolerance,
        format!("max discrepancy {:e}", r.max_shifted_discrepancy),
    );
    let mut columns = vec!["m".to_string(), "re_B_m".into(), "im_B_m".into()];
    for w in &r.widths {
        columns.push(format!("discrepancy_w{w}"));
    }
    report.tables.push(Table {
        name: "integer_agreement".into(),
        columns,
        rows: r
            .rows
            .iter()
            .map(|row| {
                let mut v = vec![row.m as f64, row.fourier.re, row.fourier.im];
                v.extend(&row.discrepancy);
                v
            })
            .collect(),
    });
    report.output("consistency", &r);
    Ok(())
}

fn run_probe(cfg: &ExperimentConfig, report: &mut RunReport) -> bergbal_core::Result<()> {
    let probe = cfg.probe.as_ref().expect("validated config has a probe section");
    let seeds = probe
        .seeds
        .iter()
        .map(|s| s.build(&cfg.quadrature))
        .collect::<bergbal_core::Result<Vec<_>>>()?;
    let m = cfg.levels[0];
    let u = uniqueness_probe(m, &seeds, &cfg.solver)?;
    report.verdict(
        "moment-centered solutions coincide",
        u.pass,
        format!("max centered distance {:e}", u.max_centered_distance),
    );
    for (i, ok) in u.converged.iter().enumerate() {
        if !ok {
            report.warnings.push(format!("seed {i} did not converge; excluded from comparison"));
        }
    }
    report.output("probe", &u);
    Ok(())
}
