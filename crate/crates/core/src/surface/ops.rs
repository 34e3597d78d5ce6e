use crate::error::{Error, Result};
use crate::jet::{Jet, JET_ORDER};

use super::grid::GridFunction;
use super::perturbation::{area_jet, s_jet};
use super::potential::{e_operator, RadialPotential};

// φ carries JET_ORDER derivatives; ρ = 1 + Eφ loses two.
const RHO_ORDER: usize = JET_ORDER - 2;

fn check_nodes(p: &RadialPotential, f: &GridFunction) -> Result<()> {
    if p.scheme().same_nodes(f.scheme()) {
        Ok(())
    } else {
        Err(Error::NodeMismatch)
    }
}

/// `∫ f ω` — the volume pairing for invariant integrands.
pub fn integrate(p: &RadialPotential, f: &GridFunction) -> Result<f64> {
    check_nodes(p, f)?;
    Ok(integrate_values(p, f.values()))
}

pub(crate) fn integrate_values(p: &RadialPotential, values: &[f64]) -> f64 {
    let q = p.scheme();
    q.weights()
        .iter()
        .zip(p.density_jets())
        .zip(values)
        .map(|((w, r), v)| w * r.value() * v)
        .sum()
}

/// Total volume of `ω`; equals one for every valid potential.
pub fn volume(p: &RadialPotential) -> f64 {
    integrate_values(p, &vec![1.0; p.scheme().len()])
}

/// `σ = −(log Φ'')''/Φ''`, normalized so that its average is 2.
pub fn scalar_curvature(p: &RadialPotential) -> GridFunction {
    let q = p.scheme();
    let jets = p
        .density_jets()
        .iter()
        .zip(q.s().iter().zip(q.sc()))
        .map(|(r, (s, sc))| curvature_jet(r, *s, *sc))
        .collect();
    GridFunction::from_jets(q.clone(), "sigma", jets, RHO_ORDER - 2)
        .expect("density is positive at every node")
}

pub(crate) fn curvature_jet(rho: &Jet, s: f64, sc: f64) -> Jet {
    (Jet::constant(2.0) - e_operator(&rho.ln(), s, sc)) / *rho
}

/// `Δf = −f''/Φ''` in the log coordinate (nonnegative operator).
pub fn laplacian_apply(p: &RadialPotential, f: &GridFunction) -> Result<GridFunction> {
    check_nodes(p, f)?;
    let jets = f.jets_for(2)?;
    let order = if f.has_jets() { f.order() } else { JET_ORDER };
    let out = laplacian_jets(p, &jets);
    GridFunction::from_jets(
        p.scheme().clone(),
        format!("lap({})", f.name()),
        out,
        order.saturating_sub(2).min(RHO_ORDER),
    )
}

fn laplacian_jets(p: &RadialPotential, f: &[Jet]) -> Vec<Jet> {
    let q = p.scheme();
    f.iter()
        .zip(p.density_jets())
        .zip(q.s().iter().zip(q.sc()))
        .map(|((fj, r), (s, sc))| -(e_operator(fj, *s, *sc) / *r))
        .collect()
}

/// Normalized Hamiltonian of the circle generator, `Φ' − ∫Φ' ω`.
pub fn hamiltonian_moment(p: &RadialPotential) -> GridFunction {
    let q = p.scheme();
    let raw: Vec<Jet> = p
        .phi_jets()
        .iter()
        .zip(q.s().iter().zip(q.sc()))
        .map(|(phi, (s, sc))| s_jet(*s) + area_jet(*s, *sc) * phi.differentiate())
        .collect();
    let values: Vec<f64> = raw.iter().map(Jet::value).collect();
    let mean = integrate_values(p, &values);
    let jets = raw.into_iter().map(|j| j + (-mean)).collect();
    GridFunction::from_jets(q.clone(), "f_moment", jets, JET_ORDER - 1)
        .expect("moment map is finite")
}

/// Lichnerowicz operator `Lψ = −Δ²ψ + σΔψ`, the derivative of
/// [`scalar_curvature`] along `Φ → Φ + εψ`.
pub fn lichnerowicz_apply(p: &RadialPotential, psi: &GridFunction) -> Result<GridFunction> {
    check_nodes(p, psi)?;
    let jets = psi.jets_for(4)?;
    let lap = laplacian_jets(p, &jets);
    let lap2 = laplacian_jets(p, &lap);
    let sigma = scalar_curvature(p);
    let out = lap
        .iter()
        .zip(&lap2)
        .zip(sigma.values())
        .map(|((l1, l2), sg)| Jet::constant(sg * l1.value() - l2.value()))
        .collect();
    GridFunction::from_jets(
        p.scheme().clone(),
        format!("lich({})", psi.name()),
        out,
        0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::perturbation::{Perturbation, PerturbationSpec, Term};
    use crate::surface::potential::{make_fs_potential, make_perturbed_potential};

    fn bump(a: f64, c: f64) -> RadialPotential {
        let spec = PerturbationSpec::GaussianBump {
            amplitude: a,
            width: 1.0,
            center: c,
        };
        make_perturbed_potential(&spec, 20.0, 512).unwrap()
    }

    #[test]
    fn fs_volume_and_curvature() {
        let p = make_fs_potential(20.0, 512).unwrap();
        assert!((volume(&p) - 1.0).abs() < 1e-14);
        let sigma = scalar_curvature(&p);
        assert!(sigma.values().iter().all(|v| (v - 2.0).abs() < 1e-12));
        assert!((integrate(&p, &sigma).unwrap() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn gauss_bonnet_on_bump() {
        let p = bump(0.1, 0.3);
        let sigma = scalar_curvature(&p);
        assert!((integrate(&p, &sigma).unwrap() - 2.0).abs() < 1e-12);
        assert!((volume(&p) - 1.0).abs() < 1e-13);
        assert!(sigma.values().iter().any(|v| (v - 2.0).abs() > 1e-3));
    }

    #[test]
    fn curvature_matches_log_coordinate_formula() {
        // independent evaluation of −(log Φ'')''/Φ'' in t by nested central differences
        let p = bump(0.1, 0.0);
        let h = 1e-3;
        let lg = |t: f64| p.second_derivative_at(t).ln();
        let sigma = scalar_curvature(&p);
        for (t, v) in sigma.nodes().iter().zip(sigma.values()) {
            if t.abs() < 4.0 {
                let d2 = (lg(t + h) - 2.0 * lg(*t) + lg(t - h)) / (h * h);
                let oracle = -d2 / p.second_derivative_at(*t);
                assert!((v - oracle).abs() < 1e-5, "t={t}: {v} vs {oracle}");
            }
        }
    }

    #[test]
    fn fs_moment_map_closed_form() {
        let p = make_fs_potential(20.0, 512).unwrap();
        let f = hamiltonian_moment(&p);
        for (t, v) in f.nodes().iter().zip(f.values()) {
            assert!((v - 0.5 * (t / 2.0).tanh()).abs() < 1e-15);
            assert!(v.abs() < 0.5);
        }
        let lap = laplacian_apply(&p, &f).unwrap();
        assert!(lap.max_abs_diff(&f.scaled(2.0)) < 1e-12);
        let l = lichnerowicz_apply(&p, &f).unwrap();
        assert!(l.sup_norm() < 1e-10);
    }

    #[test]
    fn constants_are_harmonic() {
        let p = bump(0.1, 0.0);
        let one = GridFunction::constant(p.scheme().clone(), "one", 3.0);
        assert!(laplacian_apply(&p, &one).unwrap().sup_norm() == 0.0);
        assert!(lichnerowicz_apply(&p, &one).unwrap().sup_norm() == 0.0);
    }

    #[test]
    fn lichnerowicz_matches_finite_differences() {
        let p = bump(0.1, 0.2);
        let dir = Perturbation::single(Term::GaussianBump {
            amplitude: 1.0,
            width: 0.8,
            center: -0.4,
        });
        let psi = GridFunction::sample(p.scheme().clone(), "psi", &dir).unwrap();
        let l = lichnerowicz_apply(&p, &psi).unwrap();
        let mut errs = Vec::new();
        for eps in [1e-2, 1e-3] {
            let plus = scalar_curvature(&p.perturbed_by(eps, &dir).unwrap());
            let minus = scalar_curvature(&p.perturbed_by(-eps, &dir).unwrap());
            let fd = plus.linear_combination(0.5 / eps, &minus, -0.5 / eps).unwrap();
            errs.push(fd.max_abs_diff(&l));
        }
        let order = (errs[0] / errs[1]).log10();
        assert!(order >= 1.8, "errors {errs:?}");
    }

    #[test]
    fn mismatched_nodes_are_rejected() {
        let p = make_fs_potential(20.0, 512).unwrap();
        let q = make_fs_potential(20.0, 256).unwrap();
        let f = GridFunction::constant(q.scheme().clone(), "one", 1.0);
        assert!(matches!(integrate(&p, &f), Err(Error::NodeMismatch)));
    }
}
