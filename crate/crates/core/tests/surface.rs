use bergbal_core::surface::*;
use bergbal_core::Error;
use proptest::prelude::*;

const WINDOW: f64 = 20.0;
const GRID: usize = 512;

fn bump(amplitude: f64, width: f64, center: f64) -> bergbal_core::Result<RadialPotential> {
    make_perturbed_potential(
        &PerturbationSpec::GaussianBump { amplitude, width, center },
        WINDOW,
        GRID,
    )
}

fn test_function(p: &RadialPotential, a: f64, c: f64) -> GridFunction {
    let profile = Perturbation::single(Term::GaussianBump { amplitude: a, width: 1.2, center: c });
    GridFunction::sample(p.scheme().clone(), "f", &profile).unwrap()
}

fn pairing(p: &RadialPotential, f: &GridFunction, g: &GridFunction) -> f64 {
    integrate(p, &f.mul(g).unwrap()).unwrap()
}

#[test]
fn fs_potential_examples() {
    let p = make_fs_potential(WINDOW, GRID).unwrap();
    assert!((p.value_at(0.0) - 2f64.ln()).abs() < 1e-15);
    assert!((volume(&p) - 1.0).abs() < 1e-12);
    assert!(matches!(make_fs_potential(5.0, 32), Err(Error::InvalidDiscretization(_))));
    let one = GridFunction::constant(p.scheme().clone(), "1", 1.0);
    let zero = GridFunction::constant(p.scheme().clone(), "0", 0.0);
    assert!((integrate(&p, &one).unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(integrate(&p, &zero).unwrap(), 0.0);
    let sigma = scalar_curvature(&p);
    assert!((integrate(&p, &sigma).unwrap() - 2.0).abs() < 1e-9);
    assert!(sigma.shifted(-2.0).sup_norm() < 1e-9);
}

#[test]
fn laplacian_is_in_divergence_form() {
    let p = make_fs_potential(WINDOW, GRID).unwrap();
    let f = test_function(&p, 1.0, 0.3);
    let lap = laplacian_apply(&p, &f).unwrap();
    assert!(integrate(&p, &lap).unwrap().abs() < 1e-10);
}

#[test]
fn lichnerowicz_on_fubini_study() {
    let p = make_fs_potential(WINDOW, GRID).unwrap();
    let l = lichnerowicz_apply(&p, &hamiltonian_moment(&p)).unwrap();
    assert!(l.sup_norm() <= 1e-6, "{}", l.sup_norm());
    let c = GridFunction::constant(p.scheme().clone(), "c", 3.0);
    assert!(lichnerowicz_apply(&p, &c).unwrap().sup_norm() < 1e-12);
}

/// Central differences of the scalar curvature along `Φ + εψ`.
#[test]
fn lichnerowicz_is_the_curvature_derivative() {
    let p = bump(0.1, 1.0, 0.0).unwrap();
    let dir = Perturbation::single(Term::GaussianBump { amplitude: 1.0, width: 1.3, center: 0.4 });
    let psi = GridFunction::sample(p.scheme().clone(), "psi", &dir).unwrap();
    let l = lichnerowicz_apply(&p, &psi).unwrap();
    let err = |eps: f64| {
        let plus = scalar_curvature(&p.perturbed_by(eps, &dir).unwrap());
        let minus = scalar_curvature(&p.perturbed_by(-eps, &dir).unwrap());
        let fd = plus.sub(&minus).unwrap().scaled(0.5 / eps);
        fd.max_abs_diff(&l)
    };
    let (e2, e3) = (err(1e-2), err(1e-3));
    let order = (e2 / e3).log10();
    assert!(order >= 1.8, "errors {e2:e} {e3:e}, order {order}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gauss_bonnet_and_volume(a in -0.15f64..0.15, w in 0.8f64..1.5, c in -1.5f64..1.5) {
        let p = bump(a, w, c);
        prop_assume!(p.is_ok());
        let p = p.unwrap();
        prop_assert!((volume(&p) - 1.0).abs() <= 1e-12);
        let total = integrate(&p, &scalar_curvature(&p)).unwrap();
        prop_assert!((total - 2.0).abs() <= 1e-9, "∫σ = {}", total);
    }

    #[test]
    fn laplacian_is_nonnegative(a in -0.1f64..0.1, c in -1.0f64..1.0, fa in -2.0f64..2.0, fc in -3.0f64..3.0) {
        let p = bump(a, 1.0, c).unwrap();
        let f = test_function(&p, fa, fc);
        let q = pairing(&p, &f, &laplacian_apply(&p, &f).unwrap());
        prop_assert!(q >= -1e-12, "{}", q);
    }

    #[test]
    fn lichnerowicz_is_symmetric_on_fubini_study(fa in -2.0f64..2.0, fc in -2.0f64..2.0, gc in -2.0f64..2.0) {
        let p = make_fs_potential(WINDOW, GRID).unwrap();
        let f = test_function(&p, fa, fc);
        let g = test_function(&p, -0.7, gc);
        let fl = pairing(&p, &f, &lichnerowicz_apply(&p, &g).unwrap());
        let gl = pairing(&p, &g, &lichnerowicz_apply(&p, &f).unwrap());
        prop_assert!((fl - gl).abs() <= 1e-8, "{} vs {}", fl, gl);
    }

    /// Away from constant curvature only `−Δ²` is symmetric; the skew part of
    /// `σΔ` is `∫ s(1−s) σ_s (f g_s − g f_s) ds`.
    #[test]
    fn lichnerowicz_skew_part(a in -0.1f64..0.1, c in -1.0f64..1.0, fc in -2.0f64..2.0, gc in -2.0f64..2.0) {
        let p = bump(a, 1.0, c).unwrap();
        let f = test_function(&p, 1.0, fc);
        let g = test_function(&p, -0.7, gc);
        let fl = pairing(&p, &f, &lichnerowicz_apply(&p, &g).unwrap());
        let gl = pairing(&p, &g, &lichnerowicz_apply(&p, &f).unwrap());
        let sigma = scalar_curvature(&p);
        let (sj, fj, gj) = (sigma.jets_for(1).unwrap(), f.jets_for(1).unwrap(), g.jets_for(1).unwrap());
        let q = p.scheme();
        let integrand: Vec<f64> = (0..q.len())
            .map(|i| {
                let area = q.s()[i] * q.sc()[i];
                area * sj[i].coeff(1) * (fj[i].value() * gj[i].coeff(1) - gj[i].value() * fj[i].coeff(1))
            })
            .collect();
        let skew = q.integrate_fs(&integrand);
        prop_assert!((fl - gl - skew).abs() <= 1e-8, "{} vs {}", fl - gl, skew);
    }
}
