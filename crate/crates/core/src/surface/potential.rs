use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::quadrature::{logistic_pair, QuadratureScheme};

use super::perturbation::{area_jet, Perturbation, PerturbationSpec, Term};

pub const MIN_WINDOW: f64 = 10.0;
pub const MIN_GRID_SIZE: usize = 64;
const PANEL_ORDER: usize = 16;
const MAX_INNER_WINDOW: f64 = 12.0;
const DECAY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKind {
    Fs,
    Perturbed,
}

/// Circle-invariant Kähler potential `Φ(t) = log(1 + e^t) + φ(t)` on the
/// projective line, `t = log|z|^2`.
///
/// The perturbation and the derived volume density `ρ = Φ''/(s(1-s))` are
/// cached as jets at the quadrature nodes.
#[derive(Debug, Clone)]
pub struct RadialPotential {
    kind: PotentialKind,
    perturbation: Perturbation,
    window: f64,
    grid_size: usize,
    scheme: Arc<QuadratureScheme>,
    phi: Arc<Vec<Jet>>,
    rho: Arc<Vec<Jet>>,
}

/// Quadrature scheme used for a given window and grid size.
pub fn scheme_for(window: f64, grid_size: usize) -> Result<Arc<QuadratureScheme>> {
    validate_discretization(window, grid_size)?;
    let panels = (grid_size / PANEL_ORDER).max(4);
    Ok(Arc::new(QuadratureScheme::new(
        window.min(MAX_INNER_WINDOW),
        panels,
        PANEL_ORDER,
    )?))
}

fn validate_discretization(window: f64, grid_size: usize) -> Result<()> {
    if !(window.is_finite() && window >= MIN_WINDOW) || grid_size < MIN_GRID_SIZE {
        return Err(Error::InvalidDiscretization(format!(
            "window must be >= {MIN_WINDOW} and grid_size >= {MIN_GRID_SIZE} (got {window}, {grid_size})"
        )));
    }
    Ok(())
}

/// Reference Fubini–Study potential (φ ≡ 0).
pub fn make_fs_potential(window: f64, grid_size: usize) -> Result<RadialPotential> {
    let scheme = scheme_for(window, grid_size)?;
    RadialPotential::build(Perturbation::zero(), window, grid_size, scheme, false)
}

/// Potential perturbed by a descriptor; φ is normalized to mean zero against
/// the Fubini–Study measure.
pub fn make_perturbed_potential(
    spec: &PerturbationSpec,
    window: f64,
    grid_size: usize,
) -> Result<RadialPotential> {
    let scheme = scheme_for(window, grid_size)?;
    let perturbation = Perturbation::from_spec(spec, window, grid_size / 2)?;
    check_decay(&perturbation, window)?;
    RadialPotential::build(perturbation, window, grid_size, scheme, true)
}

fn check_decay(perturbation: &Perturbation, window: f64) -> Result<()> {
    for t in [-window, window] {
        // derivatives at the boundary, measured in t
        let (s, sc) = logistic_pair(t);
        let j = perturbation.jet(s, sc);
        let area = s * sc;
        let d1 = area * j.derivative_value(1);
        let d2 = area * (area * j.derivative_value(2) + (sc - s) * j.derivative_value(1));
        if d1.abs() > DECAY_TOL || d2.abs() > DECAY_TOL {
            return Err(Error::NoDecay(format!(
                "φ'({t}) = {d1:e}, φ''({t}) = {d2:e}"
            )));
        }
    }
    Ok(())
}

impl RadialPotential {
    /// Builds a potential from an arbitrary perturbation on an existing
    /// scheme, checking Kähler positivity at every node and on a uniform
    /// check grid over the window.
    pub fn from_perturbation(
        perturbation: Perturbation,
        window: f64,
        grid_size: usize,
        scheme: Arc<QuadratureScheme>,
    ) -> Result<Self> {
        validate_discretization(window, grid_size)?;
        Self::build(perturbation, window, grid_size, scheme, true)
    }

    fn build(
        mut perturbation: Perturbation,
        window: f64,
        grid_size: usize,
        scheme: Arc<QuadratureScheme>,
        normalize: bool,
    ) -> Result<Self> {
        let mut phi: Vec<Jet> = scheme
            .s()
            .iter()
            .zip(scheme.sc())
            .map(|(s, sc)| perturbation.jet(*s, *sc))
            .collect();
        if normalize && !perturbation.is_zero() {
            let values: Vec<f64> = phi.iter().map(Jet::value).collect();
            let mean = scheme.integrate_fs(&values);
            if mean != 0.0 {
                perturbation = perturbation.plus(1.0, Term::Constant(-mean));
                phi.iter_mut().for_each(|j| j.0[0] -= mean);
            }
        }
        let mut rho = Vec::with_capacity(phi.len());
        for ((p, s), sc) in phi.iter().zip(scheme.s()).zip(scheme.sc()) {
            let r = density_jet(p, *s, *sc);
            if !r.is_finite() {
                return Err(Error::NonFinite("potential".into()));
            }
            if r.value() <= 0.0 {
                return Err(Error::NotPositive {
                    t: s.ln() - sc.ln(),
                    value: r.value() * s * sc,
                });
            }
            rho.push(r);
        }
        for i in 0..=grid_size {
            let t = -window + 2.0 * window * i as f64 / grid_size as f64;
            let (s, sc) = logistic_pair(t);
            let r = density_jet(&perturbation.jet(s, sc), s, sc).value();
            if !(r > 0.0) {
                return Err(Error::NotPositive {
                    t,
                    value: r * s * sc,
                });
            }
        }
        let kind = if perturbation.is_zero() {
            PotentialKind::Fs
        } else {
            PotentialKind::Perturbed
        };
        Ok(RadialPotential {
            kind,
            perturbation,
            window,
            grid_size,
            scheme,
            phi: Arc::new(phi),
            rho: Arc::new(rho),
        })
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn perturbation(&self) -> &Perturbation {
        &self.perturbation
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn scheme(&self) -> &Arc<QuadratureScheme> {
        &self.scheme
    }

    /// Jets of φ at the nodes.
    pub fn phi_jets(&self) -> &[Jet] {
        &self.phi
    }

    /// Jets of `ρ = Φ''/(s(1-s))`, the density of ω against the
    /// Fubini–Study measure, at the nodes.
    pub fn density_jets(&self) -> &[Jet] {
        &self.rho
    }

    pub fn phi_values(&self) -> Vec<f64> {
        self.phi.iter().map(Jet::value).collect()
    }

    /// `Φ(t)` at an arbitrary point.
    pub fn value_at(&self, t: f64) -> f64 {
        let (s, sc) = logistic_pair(t);
        let fs = if t > 0.0 { t + (-t).exp().ln_1p() } else { t.exp().ln_1p() };
        fs + self.perturbation.jet(s, sc).value()
    }

    /// `Φ''(t)` at an arbitrary point.
    pub fn second_derivative_at(&self, t: f64) -> f64 {
        let (s, sc) = logistic_pair(t);
        density_jet(&self.perturbation.jet(s, sc), s, sc).value() * s * sc
    }

    /// New potential `Φ + coef·ψ` on the same scheme (no re-normalization).
    pub fn perturbed_by(&self, coef: f64, direction: &Perturbation) -> Result<Self> {
        Self::build(
            self.perturbation.plus_all(coef, direction),
            self.window,
            self.grid_size,
            self.scheme.clone(),
            false,
        )
    }

    /// Potential moved by the torus flow: `Φ(t) -> Φ(t - y)`.
    pub fn translated(&self, y: f64) -> Result<Self> {
        Self::build(
            self.perturbation.translated_potential(y),
            self.window,
            self.grid_size,
            self.scheme.clone(),
            true,
        )
    }

    /// Same metric with φ renormalized to Fubini–Study mean zero.
    pub fn normalized(&self) -> Result<Self> {
        Self::build(
            self.perturbation.clone(),
            self.window,
            self.grid_size,
            self.scheme.clone(),
            true,
        )
    }
}

/// `ρ = 1 + E φ` with `E f = (s(1-s) f')'`; `Φ'' = s(1-s) ρ`.
pub(crate) fn density_jet(phi: &Jet, s: f64, sc: f64) -> Jet {
    Jet::constant(1.0) + e_operator(phi, s, sc)
}

/// `E f = d/ds (s(1-s) df/ds)`, the Fubini–Study Laplacian up to sign.
pub(crate) fn e_operator(f: &Jet, s: f64, sc: f64) -> Jet {
    (area_jet(s, sc) * f.differentiate()).differentiate()
}
