//! Bergman-type potentials `Φ_λ = (1/m) log Σ_j λ_j binom(m,j) e^{jt}`,
//! parametrized by `x = log λ`.

use std::sync::Arc;

use crate::bergman::{gram_unchecked, kernel_jets, GramDiagonal};
use crate::error::{Error, Result};
use crate::jet::{Jet, JET_ORDER};
use crate::quadrature::{logistic_pair, QuadratureScheme};
use crate::surface::{
    integrate_values, ln_binomial_row, s_jet, sc_jet, BernsteinPoly, GridFunction, Perturbation,
    RadialPotential, Term,
};

use super::options::Recentering;

#[derive(Debug, Clone)]
pub(crate) struct Discretization {
    pub window: f64,
    pub grid_size: usize,
    pub scheme: Arc<QuadratureScheme>,
}

impl Discretization {
    pub fn of(p: &RadialPotential) -> Self {
        Discretization {
            window: p.window(),
            grid_size: p.grid_size(),
            scheme: p.scheme().clone(),
        }
    }
}

/// A Bergman potential together with its Gram data.
#[derive(Debug, Clone)]
pub(crate) struct State {
    pub m: usize,
    pub x: Vec<f64>,
    pub potential: RadialPotential,
    pub gram: GramDiagonal,
}

pub(crate) fn lambda_of(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.exp()).collect()
}

impl State {
    pub fn new(m: usize, mut x: Vec<f64>, disc: &Discretization) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("balancing coordinates".into()));
        }
        // fix the scale gauge
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        x.iter_mut().for_each(|v| *v -= mean);
        let term = Term::Bergman(BernsteinPoly::new(&lambda_of(&x)));
        let potential = RadialPotential::from_perturbation(
            Perturbation::single(term),
            disc.window,
            disc.grid_size,
            disc.scheme.clone(),
        )?;
        let gram = gram_unchecked(m, &potential);
        Ok(State {
            m,
            x,
            potential,
            gram,
        })
    }

    /// Fixed-point start: `λ = 1/N(P0)`.
    pub fn from_seed(m: usize, p0: &RadialPotential) -> Result<Self> {
        let gram = gram_unchecked(m, p0);
        let x = gram.normalized.iter().map(|n| -n.ln()).collect();
        State::new(m, x, &Discretization::of(p0))
    }

    pub fn disc(&self) -> Discretization {
        Discretization::of(&self.potential)
    }

    /// `κ = (m+1) / Σ_j λ_j N_j`. The stored potential is renormalized to
    /// mean zero, which rescales every `N_j` by the same factor; the trace
    /// identity `Σ_j λ_j N_j = m + 1` of the unnormalized potential undoes it.
    pub fn trace_scale(&self) -> f64 {
        let total: f64 = self
            .x
            .iter()
            .zip(&self.gram.normalized)
            .map(|(x, n)| x.exp() * n)
            .sum();
        (self.m as f64 + 1.0) / total
    }

    /// `R_j = κ λ_j N_j − 1`.
    pub fn residual_vector(&self) -> Vec<f64> {
        let k = self.trace_scale();
        self.x
            .iter()
            .zip(&self.gram.normalized)
            .map(|(x, n)| k * x.exp() * n - 1.0)
            .collect()
    }

    /// Weighted kernel values at the nodes (`y = 0`: plain kernel).
    pub fn kernel(&self, y: f64) -> Vec<f64> {
        kernel_jets(&self.potential, &self.gram, y)
            .iter()
            .map(Jet::value)
            .collect()
    }

    /// `sup |B − (m+1)/m|`.
    pub fn sup_residual(&self) -> f64 {
        let c = (self.m as f64 + 1.0) / self.m as f64;
        self.kernel(0.0)
            .iter()
            .fold(0.0f64, |a, b| a.max((b - c).abs()))
    }

    /// `Φ(t) → Φ(t − y)`, i.e. `λ_j → λ_j e^{−jy}`.
    pub fn translated(&self, y: f64) -> Result<Self> {
        let x = self
            .x
            .iter()
            .enumerate()
            .map(|(j, v)| v - j as f64 * y)
            .collect();
        State::new(self.m, x, &self.disc())
    }

    pub fn recentered(self, mode: Recentering) -> Result<Self> {
        match mode {
            Recentering::None => Ok(self),
            Recentering::EvenSymmetrize => {
                let m = self.m;
                let x = (0..=m).map(|j| 0.5 * (self.x[j] + self.x[m - j])).collect();
                State::new(m, x, &self.disc())
            }
            Recentering::MomentCenter => {
                let y = moment_center_shift(&self.potential)?;
                if y == 0.0 {
                    Ok(self)
                } else {
                    self.translated(y)
                }
            }
        }
    }

    /// Potential-space directions `∂φ/∂x_k = λ_k pmf_k / (m Σ_j λ_j pmf_j)`.
    pub fn directions(&self) -> Vec<Vec<Jet>> {
        let m = self.m;
        let q = self.potential.scheme();
        let lb = ln_binomial_row(m);
        let lam = lambda_of(&self.x);
        let poly = BernsteinPoly::new(&lam);
        let mut out = vec![Vec::with_capacity(q.len()); m + 1];
        for (s, sc) in q.s().iter().zip(q.sc()) {
            let (ls, lsc) = (s_jet(*s).ln(), sc_jet(*sc).ln());
            let denom = poly.jet(*s, *sc).scale(m as f64);
            for (k, dir) in out.iter_mut().enumerate() {
                let pmf = (ls.scale(k as f64) + lsc.scale((m - k) as f64) + lb[k]).exp();
                dir.push(pmf.scale(lam[k]) / denom);
            }
        }
        out
    }

    pub fn direction_functions(&self) -> Vec<GridFunction> {
        self.directions()
            .into_iter()
            .enumerate()
            .map(|(k, j)| {
                GridFunction::from_jets(
                    self.potential.scheme().clone(),
                    format!("dphi/dx_{k}"),
                    j,
                    JET_ORDER,
                )
                .expect("finite directions")
            })
            .collect()
    }
}

/// Barycenter `∫ s(t + y) ω − 1/2` of the Fubini–Study moment coordinate
/// against the metric translated by `y`.
fn barycenter(p: &RadialPotential, y: f64) -> (f64, f64) {
    let q = p.scheme();
    let mut g = -0.5;
    let mut dg = 0.0;
    for ((w, r), t) in q.weights().iter().zip(p.density_jets()).zip(q.t()) {
        let (s, sc) = logistic_pair(t + y);
        let wr = w * r.value();
        g += wr * s;
        dg += wr * s * sc;
    }
    (g, dg)
}

/// Translation `y` such that `Φ(t − y)` has the Fubini–Study barycenter.
pub fn moment_center_shift(p: &RadialPotential) -> Result<f64> {
    // the barycenter of the translate by y is increasing in y
    let (g0, _) = barycenter(p, 0.0);
    if g0 == 0.0 {
        return Ok(0.0);
    }
    let mut step = 0.5;
    let (mut a, mut b) = if g0 > 0.0 { (-step, 0.0) } else { (0.0, step) };
    while (g0 > 0.0 && barycenter(p, a).0 > 0.0) || (g0 < 0.0 && barycenter(p, b).0 < 0.0) {
        step *= 2.0;
        if step > 1e3 {
            return Err(Error::BracketFailure(format!(
                "moment centering: barycenter offset {g0:e} not bracketed within |y| <= 1e3"
            )));
        }
        if g0 > 0.0 {
            a = -step;
        } else {
            b = step;
        }
    }
    let mut y = 0.5 * (a + b);
    for _ in 0..200 {
        let (g, dg) = barycenter(p, y);
        if g == 0.0 {
            break;
        }
        if g > 0.0 {
            b = y;
        } else {
            a = y;
        }
        let newton = y - g / dg;
        let next = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
        let done = (next - y).abs() <= 1e-15 * (1.0 + y.abs());
        y = next;
        if done {
            break;
        }
    }
    Ok(y)
}

/// The torus translate of `p` with the Fubini–Study barycenter.
pub fn moment_centered(p: &RadialPotential) -> Result<RadialPotential> {
    let y = moment_center_shift(p)?;
    if y == 0.0 {
        Ok(p.clone())
    } else {
        p.translated(y)
    }
}

/// `sup |φ_a − φ_b|` at the nodes after moment-centering both potentials.
pub fn centered_distance(a: &RadialPotential, b: &RadialPotential) -> Result<f64> {
    if !a.scheme().same_nodes(b.scheme()) {
        return Err(Error::NodeMismatch);
    }
    let (ca, cb) = (moment_centered(a)?, moment_centered(b)?);
    Ok(ca
        .phi_values()
        .iter()
        .zip(cb.phi_values())
        .fold(0.0f64, |d, (x, y)| d.max((x - y).abs())))
}

/// `∫ (s − 1/2) ω`, zero exactly for moment-centered metrics.
pub fn moment_barycenter(p: &RadialPotential) -> f64 {
    let s: Vec<f64> = p.scheme().s().to_vec();
    integrate_values(p, &s) - 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{make_fs_potential, make_perturbed_potential, PerturbationSpec};

    #[test]
    fn centering_undoes_translation() {
        let p = make_fs_potential(20.0, 512).unwrap();
        let moved = p.translated(0.7).unwrap();
        let y = moment_center_shift(&moved).unwrap();
        assert!((y + 0.7).abs() < 1e-12, "{y}");
        assert!(moment_barycenter(&moment_centered(&moved).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn fs_is_centered() {
        let p = make_fs_potential(20.0, 512).unwrap();
        assert!(moment_barycenter(&p).abs() < 1e-15);
        assert!(moment_center_shift(&p).unwrap().abs() < 1e-14);
    }

    #[test]
    fn state_translation_matches_potential_translation() {
        let spec = PerturbationSpec::GaussianBump {
            amplitude: 0.1,
            width: 1.0,
            center: 0.0,
        };
        let p = make_perturbed_potential(&spec, 20.0, 512).unwrap();
        let st = State::from_seed(6, &p).unwrap();
        let moved = st.translated(0.4).unwrap();
        let direct = st.potential.translated(0.4).unwrap();
        let d = moved
            .potential
            .phi_values()
            .iter()
            .zip(direct.phi_values())
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(d < 1e-12, "{d}");
        // λN is invariant under the torus flow
        for (a, b) in st.residual_vector().iter().zip(moved.residual_vector()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn residual_identities() {
        let spec = PerturbationSpec::GaussianBump {
            amplitude: 0.1,
            width: 1.0,
            center: 0.5,
        };
        let p = make_perturbed_potential(&spec, 20.0, 512).unwrap();
        let st = State::from_seed(7, &p).unwrap();
        let r = st.residual_vector();
        let sum: f64 = r.iter().sum();
        let first: f64 = r.iter().enumerate().map(|(j, v)| j as f64 * v).sum();
        assert!(sum.abs() < 1e-12 && first.abs() < 1e-11, "{sum} {first}");
    }
}
