//! Circle-invariant perturbations φ of the Fubini–Study potential.
//!
//! Every term can be evaluated as a jet in the moment coordinate `s` at any
//! point of the line, so all derived geometric quantities are computed from
//! exact derivatives rather than finite differences.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, JET_ORDER};

/// User-facing perturbation descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum PerturbationSpec {
    GaussianBump {
        amplitude: f64,
        width: f64,
        center: f64,
    },
    Tabulated {
        t: Vec<f64>,
        phi: Vec<f64>,
    },
}

/// Jet of `s` itself at a node, given `s` and `1 - s`.
pub(crate) fn s_jet(s: f64) -> Jet {
    Jet::variable(s)
}

/// Jet of `1 - s`, keeping the accurately stored complement as its value.
pub(crate) fn sc_jet(sc: f64) -> Jet {
    let mut j = Jet::constant(sc);
    j.0[1] = -1.0;
    j
}

/// Jet of `s(1 - s)`.
pub(crate) fn area_jet(s: f64, sc: f64) -> Jet {
    s_jet(s) * sc_jet(sc)
}

/// Jet of `t = log(s / (1 - s))`.
pub(crate) fn logit_jet(s: f64, sc: f64) -> Jet {
    let mut c = [0.0; JET_ORDER + 1];
    c[0] = s.ln() - sc.ln();
    for (k, ck) in c.iter_mut().enumerate().skip(1) {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        *ck = (sign * s.powi(-(k as i32)) + sc.powi(-(k as i32))) / k as f64;
    }
    Jet(c)
}

/// Bernstein polynomial `Σ_j c_j binom(m,j) s^j (1-s)^(m-j)` with cached
/// forward differences, giving cancellation-free derivatives when the
/// coefficients are close to constant.
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinPoly {
    degree: usize,
    diffs: Vec<Vec<f64>>,
    ln_binom: Vec<Vec<f64>>,
}

pub(crate) fn ln_binomial_row(n: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(n + 1);
    let mut b = 1.0f64;
    row.push(0.0);
    for j in 0..n {
        b = b * (n - j) as f64 / (j + 1) as f64;
        row.push(b.ln());
    }
    row
}

impl BernsteinPoly {
    pub fn new(coeffs: &[f64]) -> Self {
        assert!(!coeffs.is_empty());
        let degree = coeffs.len() - 1;
        let mut diffs = vec![coeffs.to_vec()];
        for k in 1..=JET_ORDER.min(degree) {
            let prev = &diffs[k - 1];
            let next: Vec<f64> = prev.windows(2).map(|w| w[1] - w[0]).collect();
            diffs.push(next);
        }
        let ln_binom = (0..diffs.len()).map(|k| ln_binomial_row(degree - k)).collect();
        BernsteinPoly {
            degree,
            diffs,
            ln_binom,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.diffs[0]
    }

    pub fn jet(&self, s: f64, sc: f64) -> Jet {
        let (ls, lsc) = (s.ln(), sc.ln());
        let mut c = [0.0; JET_ORDER + 1];
        let mut falling = 1.0;
        let mut fact = 1.0;
        for (k, diff) in self.diffs.iter().enumerate() {
            if k > 0 {
                falling *= (self.degree - k + 1) as f64;
                fact *= k as f64;
            }
            let n = self.degree - k;
            let lb = &self.ln_binom[k];
            let mut acc = 0.0;
            for (j, d) in diff.iter().enumerate() {
                if *d == 0.0 {
                    continue;
                }
                let lp = lb[j] + j as f64 * ls + (n - j) as f64 * lsc;
                acc += d * lp.exp();
            }
            c[k] = acc * falling / fact;
        }
        Jet(c)
    }
}

/// Chebyshev series on `[-T, T]` in the log coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebSeries {
    window: f64,
    derivs: Vec<Vec<f64>>,
}

impl ChebSeries {
    fn new(window: f64, coeffs: Vec<f64>) -> Self {
        let mut derivs = vec![coeffs];
        for k in 1..=JET_ORDER {
            let c = &derivs[k - 1];
            let n = c.len();
            let mut d = vec![0.0; n.max(1)];
            for j in (1..n).rev() {
                let next = if j + 1 < n { d[j + 1] } else { 0.0 };
                d[j - 1] = next + 2.0 * j as f64 * c[j];
            }
            d[0] *= 0.5;
            let scaled = d.iter().map(|v| v / window).collect();
            derivs.push(scaled);
        }
        ChebSeries { window, derivs }
    }

    fn clenshaw(c: &[f64], x: f64) -> f64 {
        let (mut b1, mut b2) = (0.0, 0.0);
        for ck in c.iter().skip(1).rev() {
            let b0 = 2.0 * x * b1 - b2 + ck;
            b2 = b1;
            b1 = b0;
        }
        x * b1 - b2 + c[0]
    }

    /// Derivatives with respect to `t` at a point of the window.
    pub fn t_derivatives(&self, t: f64) -> Vec<f64> {
        let x = (t / self.window).clamp(-1.0, 1.0);
        self.derivs.iter().map(|c| Self::clenshaw(c, x)).collect()
    }

    pub fn window(&self) -> f64 {
        self.window
    }
}

/// One summand of a perturbation.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Constant(f64),
    GaussianBump {
        amplitude: f64,
        width: f64,
        center: f64,
    },
    /// Interpolated table, identically extended by its boundary constants.
    Tabulated(ChebSeries),
    /// Bergman-type potential `(1/m) log Σ_j λ_j binom(m,j) s^j (1-s)^(m-j)`.
    Bergman(BernsteinPoly),
    /// `log(1+e^{t-y}) - log(1+e^t)`: the Fubini–Study potential moved by the
    /// torus flow, relative to itself.
    FsShift(f64),
    /// `φ(t - y)` for an inner term `φ`.
    Translated(Box<Term>, f64),
}

impl Term {
    pub fn jet(&self, s: f64, sc: f64) -> Jet {
        match self {
            Term::Constant(c) => Jet::constant(*c),
            Term::GaussianBump {
                amplitude,
                width,
                center,
            } => {
                let t0 = s.ln() - sc.ln();
                let g0 = -(t0 - center).powi(2) / (2.0 * width * width);
                if g0 < -700.0 {
                    return Jet::constant(0.0);
                }
                let d = logit_jet(s, sc) + (-center);
                let g = (d * d).scale(-0.5 / (width * width));
                g.exp().scale(*amplitude)
            }
            Term::Tabulated(series) => {
                let t0 = s.ln() - sc.ln();
                let w = series.window();
                if t0 <= -w || t0 >= w {
                    let edge = if t0 <= -w { -w } else { w };
                    return Jet::constant(series.t_derivatives(edge)[0]);
                }
                let outer = Jet::from_derivatives(&series.t_derivatives(t0));
                Jet::compose(&outer, &logit_jet(s, sc))
            }
            Term::Bergman(poly) => {
                let m = poly.degree().max(1) as f64;
                poly.jet(s, sc).ln().scale(1.0 / m)
            }
            Term::FsShift(y) => {
                let a = (-y).exp();
                let lin = sc_jet(sc) + s_jet(s).scale(a);
                lin.ln()
            }
            Term::Translated(inner, y) => {
                let a = (-y).exp();
                let den = sc + a * s;
                let (s1, sc1) = (a * s / den, sc / den);
                let den_jet = sc_jet(sc) + s_jet(s).scale(a);
                let map = s_jet(s).scale(a) / den_jet;
                let outer = inner.jet(s1, sc1);
                Jet::compose(&outer, &map)
            }
        }
    }

    /// The same term moved by the torus flow, `φ(t) -> φ(t - y)`.
    pub fn translated(&self, y: f64) -> Term {
        match self {
            Term::Constant(c) => Term::Constant(*c),
            Term::GaussianBump {
                amplitude,
                width,
                center,
            } => Term::GaussianBump {
                amplitude: *amplitude,
                width: *width,
                center: center + y,
            },
            Term::Translated(inner, y0) => Term::Translated(inner.clone(), y0 + y),
            other => Term::Translated(Box::new(other.clone()), y),
        }
    }

    /// Mirror `φ(t) -> φ(-t)` where it has a closed form.
    pub fn mirrored(&self) -> Option<Term> {
        match self {
            Term::Constant(c) => Some(Term::Constant(*c)),
            Term::GaussianBump {
                amplitude,
                width,
                center,
            } => Some(Term::GaussianBump {
                amplitude: *amplitude,
                width: *width,
                center: -center,
            }),
            _ => None,
        }
    }
}

/// Weighted sum of terms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Perturbation {
    terms: Vec<(f64, Term)>,
}

impl Perturbation {
    pub fn zero() -> Self {
        Perturbation::default()
    }

    pub fn single(term: Term) -> Self {
        Perturbation {
            terms: vec![(1.0, term)],
        }
    }

    pub fn terms(&self) -> &[(f64, Term)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(c, term)| match term {
            Term::Constant(v) => *c * *v == 0.0,
            Term::GaussianBump { amplitude, .. } => *c * *amplitude == 0.0,
            _ => *c == 0.0,
        })
    }

    pub fn plus(&self, coef: f64, term: Term) -> Self {
        let mut terms = self.terms.clone();
        terms.push((coef, term));
        Perturbation { terms }
    }

    pub fn plus_all(&self, coef: f64, other: &Perturbation) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|(c, t)| (coef * c, t.clone())));
        Perturbation { terms }
    }

    pub fn jet(&self, s: f64, sc: f64) -> Jet {
        self.terms
            .iter()
            .fold(Jet::constant(0.0), |acc, (c, term)| {
                acc + term.jet(s, sc).scale(*c)
            })
    }

    /// Perturbation of the translated full potential: `Φ(t) -> Φ(t - y)`.
    pub fn translated_potential(&self, y: f64) -> Self {
        let mut terms: Vec<(f64, Term)> = self
            .terms
            .iter()
            .map(|(c, t)| (*c, t.translated(y)))
            .collect();
        terms.push((1.0, Term::FsShift(y)));
        Perturbation { terms }
    }

    pub fn from_spec(spec: &PerturbationSpec, window: f64, max_degree: usize) -> Result<Self> {
        match spec {
            PerturbationSpec::GaussianBump {
                amplitude,
                width,
                center,
            } => {
                if !(width.is_finite() && *width > 0.0) || !amplitude.is_finite() || !center.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "gaussian bump needs finite amplitude/center and positive width (got a={amplitude}, s={width}, c={center})"
                    )));
                }
                if *amplitude == 0.0 {
                    return Ok(Perturbation::zero());
                }
                Ok(Perturbation::single(Term::GaussianBump {
                    amplitude: *amplitude,
                    width: *width,
                    center: *center,
                }))
            }
            PerturbationSpec::Tabulated { t, phi } => {
                let series = fit_tabulated(t, phi, window, max_degree)?;
                Ok(Perturbation::single(Term::Tabulated(series)))
            }
        }
    }
}

const TABLE_FIT_TOL: f64 = 1e-8;
const TABLE_SLOPE_TOL: f64 = 1e-6;

/// Least-squares Chebyshev fit of tabulated data, with first and second
/// derivatives pinned to zero at both ends of the window.
fn fit_tabulated(t: &[f64], phi: &[f64], window: f64, max_degree: usize) -> Result<ChebSeries> {
    if t.len() != phi.len() {
        return Err(Error::NonSmooth(format!(
            "t has {} entries but phi has {}",
            t.len(),
            phi.len()
        )));
    }
    if t.len() < 16 {
        return Err(Error::NonSmooth("at least 16 samples are required".into()));
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::NonSmooth("t must be strictly increasing".into()));
    }
    if t.iter().chain(phi).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("tabulated perturbation".into()));
    }
    if t[0] > -window + 1e-9 || *t.last().unwrap() < window - 1e-9 {
        return Err(Error::NonSmooth(format!(
            "samples must cover the window [-{window}, {window}]"
        )));
    }
    let n = t.len();
    for (a, b) in [(0, 1), (n - 2, n - 1)] {
        let slope = (phi[b] - phi[a]) / (t[b] - t[a]);
        if slope.abs() > TABLE_SLOPE_TOL {
            return Err(Error::NoDecay(format!(
                "slope {slope:e} near t = {}",
                t[a]
            )));
        }
    }
    let inside: Vec<usize> = (0..n).filter(|&i| t[i].abs() <= window).collect();
    let degree = max_degree.min(inside.len().saturating_sub(6)).max(4);
    let cols = degree + 1;
    let mut a = DMatrix::zeros(inside.len(), cols);
    let mut rhs = DVector::zeros(inside.len());
    for (r, &i) in inside.iter().enumerate() {
        let x = t[i] / window;
        let (mut p0, mut p1) = (1.0, x);
        a[(r, 0)] = 1.0;
        if cols > 1 {
            a[(r, 1)] = x;
        }
        for k in 2..cols {
            let p2 = 2.0 * x * p1 - p0;
            a[(r, k)] = p2;
            p0 = p1;
            p1 = p2;
        }
        rhs[r] = phi[i];
    }
    // T_k'(±1) and T_k''(±1)
    let mut cons = DMatrix::zeros(4, cols);
    for k in 0..cols {
        let kf = k as f64;
        let d1 = kf * kf;
        let d2 = kf * kf * (kf * kf - 1.0) / 3.0;
        let odd = if k % 2 == 1 { 1.0 } else { -1.0 };
        cons[(0, k)] = d1;
        cons[(1, k)] = odd * d1;
        cons[(2, k)] = d2;
        cons[(3, k)] = -odd * d2;
    }
    // eliminate the last four coefficients through the constraints
    let head = cols - 4;
    let tail = cons.columns(head, 4).into_owned();
    let tail_inv = tail
        .try_inverse()
        .ok_or_else(|| Error::NonSmooth("degenerate boundary constraints".into()))?;
    let elim = -(tail_inv * cons.columns(0, head));
    let mut z = DMatrix::zeros(cols, head);
    for k in 0..head {
        z[(k, k)] = 1.0;
    }
    z.view_mut((head, 0), (4, head)).copy_from(&elim);
    let az = &a * &z;
    let sol = az
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::NonSmooth(format!("fit failed: {e}")))?;
    let coeffs = &z * sol;
    let fitted = &a * &coeffs;
    let scale = phi.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let rms = ((&fitted - &rhs).norm_squared() / inside.len() as f64).sqrt();
    if rms > TABLE_FIT_TOL * scale {
        return Err(Error::NonSmooth(format!(
            "smooth interpolant misses the samples by rms {rms:e}"
        )));
    }
    Ok(ChebSeries::new(window, coeffs.iter().copied().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn logit_jet_matches_derivatives() {
        let (s, sc) = (0.3, 0.7);
        let j = logit_jet(s, sc);
        assert_relative_eq!(j.value(), (0.3f64 / 0.7).ln(), epsilon = 1e-15);
        assert_relative_eq!(j.derivative_value(1), 1.0 / 0.3 + 1.0 / 0.7, epsilon = 1e-13);
        assert_relative_eq!(
            j.derivative_value(2),
            -1.0 / 0.09 + 1.0 / 0.49,
            epsilon = 1e-12
        );
    }

    #[test]
    fn bernstein_of_ones_is_one() {
        let poly = BernsteinPoly::new(&vec![1.0; 11]);
        let j = poly.jet(0.37, 0.63);
        assert_relative_eq!(j.value(), 1.0, epsilon = 1e-14);
        for k in 1..=JET_ORDER {
            assert!(j.coeff(k).abs() < 1e-14);
        }
    }

    #[test]
    fn bernstein_derivatives_match_monomial() {
        // s^2 in degree-3 Bernstein form: coefficients (0, 0, 1/3, 1)
        let poly = BernsteinPoly::new(&[0.0, 0.0, 1.0 / 3.0, 1.0]);
        let j = poly.jet(0.4, 0.6);
        assert_relative_eq!(j.value(), 0.16, epsilon = 1e-14);
        assert_relative_eq!(j.derivative_value(1), 0.8, epsilon = 1e-14);
        assert_relative_eq!(j.derivative_value(2), 2.0, epsilon = 1e-13);
        assert!(j.derivative_value(3).abs() < 1e-12);
    }

    #[test]
    fn fs_shift_is_translated_fs() {
        // log(1+e^{t-y}) - log(1+e^t) at t = 0.5, y = 0.3
        let (t, y) = (0.5f64, 0.3f64);
        let s = 1.0 / (1.0 + (-t).exp());
        let v = Term::FsShift(y).jet(s, 1.0 - s).value();
        let expected = (1.0 + (t - y).exp()).ln() - (1.0 + t.exp()).ln();
        assert_relative_eq!(v, expected, epsilon = 1e-14);
    }

    #[test]
    fn translated_term_evaluates_shifted_function() {
        let bump = Term::GaussianBump {
            amplitude: 0.2,
            width: 1.0,
            center: 0.0,
        };
        let shifted = Term::Translated(Box::new(bump.clone()), 0.7);
        let t = 0.4f64;
        let s = 1.0 / (1.0 + (-t).exp());
        let direct = Term::GaussianBump {
            amplitude: 0.2,
            width: 1.0,
            center: 0.7,
        }
        .jet(s, 1.0 - s);
        let via = shifted.jet(s, 1.0 - s);
        for k in 0..=JET_ORDER {
            assert_relative_eq!(direct.coeff(k), via.coeff(k), epsilon = 1e-11, max_relative = 1e-9);
        }
    }

    #[test]
    fn tabulated_gaussian_fits() {
        let t: Vec<f64> = (0..=1200).map(|i| -20.0 + 40.0 * i as f64 / 1200.0).collect();
        let phi: Vec<f64> = t.iter().map(|x| 0.1 * (-x * x / 2.0).exp()).collect();
        let p = Perturbation::from_spec(&PerturbationSpec::Tabulated { t, phi }, 20.0, 300).unwrap();
        let s = 1.0 / (1.0 + (-0.3f64).exp());
        let v = p.jet(s, 1.0 - s).value();
        assert!((v - 0.1 * (-0.045f64).exp()).abs() < 1e-7);
    }

    #[test]
    fn tabulated_kink_is_rejected() {
        let t: Vec<f64> = (0..=400).map(|i| -20.0 + 40.0 * i as f64 / 400.0).collect();
        let phi: Vec<f64> = t.iter().map(|x| 0.1 * (1.0 - x.abs()).max(0.0)).collect();
        let err = Perturbation::from_spec(&PerturbationSpec::Tabulated { t, phi }, 20.0, 128);
        assert!(matches!(err, Err(Error::NonSmooth(_))));
    }
}
