//! Composite Gauss–Legendre quadrature on the projective line.
//!
//! Integrals over the line are taken in the Fubini–Study moment coordinate
//! `s = e^t / (1 + e^t)`, in which the Fubini–Study volume form is `ds` on
//! `[0, 1]`. Panels are the images of a uniform `t`-grid on `[-T_q, T_q]`
//! plus one end panel on each side, so the whole line is covered and the
//! reference volume integrates to one up to rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, JET_ORDER};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Logistic map `t -> e^t/(1+e^t)` and its complement, both computed without
/// cancellation.
pub fn logistic_pair(t: f64) -> (f64, f64) {
    if t >= 0.0 {
        let e = (-t).exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    } else {
        let e = t.exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SchemeDescriptor {
    pub inner_window: f64,
    pub interior_panels: usize,
    pub order: usize,
    pub nodes: usize,
}

#[derive(Debug, Clone)]
struct Panel {
    lo: f64,
    width: f64,
    start: usize,
}

/// Node set, positive weights and panel layout of a composite rule.
///
/// `weights` integrate against the Fubini–Study measure `ds`; `t` holds the
/// log-coordinate of each node and is strictly increasing.
#[derive(Debug, Clone)]
pub struct QuadratureScheme {
    descriptor: SchemeDescriptor,
    s: Vec<f64>,
    sc: Vec<f64>,
    t: Vec<f64>,
    weights: Vec<f64>,
    panels: Vec<Panel>,
    diff: Vec<f64>,
}

impl QuadratureScheme {
    pub fn new(inner_window: f64, interior_panels: usize, order: usize) -> Result<Self> {
        if !(inner_window > 0.0) || interior_panels < 2 || order < 2 {
            return Err(Error::InvalidDiscretization(format!(
                "quadrature needs positive window, >=2 panels and order >=2 \
                 (got window={inner_window}, panels={interior_panels}, order={order})"
            )));
        }
        let h = 2.0 * inner_window / interior_panels as f64;
        // boundaries as (s, 1-s) pairs
        let mut bounds = vec![(0.0, 1.0)];
        for k in 0..=interior_panels {
            let t = if 2 * k == interior_panels {
                0.0
            } else {
                -inner_window + k as f64 * h
            };
            bounds.push(logistic_pair(t));
        }
        bounds.push((1.0, 0.0));

        let (x, w) = gauss_legendre(order);
        let mut s = Vec::new();
        let mut sc = Vec::new();
        let mut weights = Vec::new();
        let mut panels = Vec::new();
        for pair in bounds.windows(2) {
            let ((a, ac), (b, bc)) = (pair[0], pair[1]);
            let width = if a > 0.5 { ac - bc } else { b - a };
            let start = s.len();
            for (xi, wi) in x.iter().zip(&w) {
                if a > 0.5 {
                    s.push(1.0 - (bc + width * (1.0 - xi) / 2.0));
                    sc.push(bc + width * (1.0 - xi) / 2.0);
                } else {
                    s.push(a + width * (1.0 + xi) / 2.0);
                    sc.push(1.0 - (a + width * (1.0 + xi) / 2.0));
                }
                weights.push(wi * width / 2.0);
            }
            panels.push(Panel { lo: a, width, start });
        }
        let t = s.iter().zip(&sc).map(|(a, b)| a.ln() - b.ln()).collect();
        let diff = differentiation_matrix(&x);
        let nodes = s.len();
        Ok(QuadratureScheme {
            descriptor: SchemeDescriptor {
                inner_window,
                interior_panels,
                order,
                nodes,
            },
            s,
            sc,
            t,
            weights,
            panels,
            diff,
        })
    }

    pub fn descriptor(&self) -> &SchemeDescriptor {
        &self.descriptor
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn order(&self) -> usize {
        self.descriptor.order
    }

    /// Moment coordinate of every node.
    pub fn s(&self) -> &[f64] {
        &self.s
    }

    /// `1 - s`, stored separately to keep full relative precision near `s = 1`.
    pub fn sc(&self) -> &[f64] {
        &self.sc
    }

    /// Log-coordinate `t = log|z|^2` of every node.
    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integral of sampled values against the Fubini–Study measure.
    pub fn integrate_fs(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn same_nodes(&self, other: &QuadratureScheme) -> bool {
        self.descriptor == other.descriptor
    }

    /// Per-panel polynomial differentiation of nodal values, returning
    /// jets in `s`.
    ///
    /// This is the fallback used for grid functions that arrive without
    /// derivative information; its accuracy degrades near the ends of the
    /// line where panels are short in `s`.
    pub fn spectral_jets(&self, values: &[f64]) -> Vec<Jet> {
        let n = self.order();
        let mut out = vec![Jet::constant(0.0); values.len()];
        let mut derivs = vec![vec![0.0; n]; JET_ORDER + 1];
        for panel in &self.panels {
            let scale = 2.0 / panel.width;
            derivs[0].copy_from_slice(&values[panel.start..panel.start + n]);
            for k in 1..=JET_ORDER {
                for i in 0..n {
                    let mut acc = 0.0;
                    for j in 0..n {
                        acc += self.diff[i * n + j] * derivs[k - 1][j];
                    }
                    derivs[k][i] = acc * scale;
                }
            }
            for i in 0..n {
                let d: Vec<f64> = (0..=JET_ORDER).map(|k| derivs[k][i]).collect();
                out[panel.start + i] = Jet::from_derivatives(&d);
            }
        }
        out
    }

    /// Lower end of the panel containing node `i` (diagnostics).
    pub fn panel_of(&self, i: usize) -> (f64, f64) {
        let p = &self.panels[i / self.order()];
        (p.lo, p.width)
    }
}

fn differentiation_matrix(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let bary: Vec<f64> = (0..n)
        .map(|i| {
            1.0 / (0..n)
                .filter(|&j| j != i)
                .map(|j| x[i] - x[j])
                .product::<f64>()
        })
        .collect();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = bary[j] / bary[i] / (x[i] - x[j]);
                d[i * n + j] = v;
                diag -= v;
            }
        }
        d[i * n + i] = diag;
    }
    d
}
