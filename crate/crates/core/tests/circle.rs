use std::f64::consts::PI;

use bergbal_core::circle::*;
use bergbal_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn example() -> CircleSample {
    CircleSample::trigonometric(1.0, &[1.0, 0.0], &[0.0, 0.3]).unwrap()
}

/// `∫_0^{2π} S(θ) e^{-imθ} dθ` by the trapezoid rule, exact for
/// trigonometric polynomials of degree below the node count.
fn trapezoid_coefficient(s: &CircleSample, m: i64, nodes: usize) -> Complex64 {
    let h = 2.0 * PI / nodes as f64;
    (0..nodes)
        .map(|k| {
            let th = k as f64 * h;
            Complex64::from_polar(s.eval(th) * h, -(m as f64) * th)
        })
        .sum()
}

#[test]
fn integer_agreement_on_the_example() {
    let s = example();
    let pair = [make_partition(0.5).unwrap(), make_partition(0.9).unwrap()];
    let r = integer_consistency_report(&s, &pair, (-20, 20)).unwrap();
    assert!(r.max_discrepancy <= 1e-10, "{:e}", r.max_discrepancy);
    assert!(r.max_shifted_discrepancy <= 1e-10);
    assert!(r.half_integer_spread > 1e-3);
    for row in &r.rows {
        let oracle = trapezoid_coefficient(&s, row.m, 64);
        assert!((row.fourier - oracle).norm() <= 1e-12, "m={}", row.m);
    }
    assert!((fourier_coefficient(&s, 0) - Complex64::new(2.0 * PI, 0.0)).norm() < 1e-14);
}

#[test]
fn degenerate_inputs() {
    let s = example();
    assert!(matches!(make_partition(0.0), Err(Error::InvalidProfile(_))));
    assert!(matches!(make_partition(1.0), Err(Error::InvalidProfile(_))));
    let p = PartitionPair::default();
    assert!(matches!(
        entire_extension(&s, &p, Complex64::new(0.0, 2.0 * MAX_IMAG)),
        Err(Error::ImaginaryPartTooLarge(_))
    ));
    assert!(integer_consistency_report(&s, &[p], (-3, 3)).is_err());
}

#[test]
fn sampled_and_analytic_sources_agree() {
    let s = example();
    let values: Vec<f64> = (0..32).map(|k| s.eval(2.0 * PI * k as f64 / 32.0)).collect();
    let sampled = CircleSample::from_samples(&values).unwrap();
    let p = PartitionPair::default();
    for xi in [Complex64::new(0.5, 0.0), Complex64::new(-2.3, 1.5)] {
        let a = entire_extension(&s, &p, xi).unwrap();
        let b = entire_extension(&sampled, &p, xi).unwrap();
        assert!((a - b).norm() <= 1e-10 * (1.0 + a.norm()));
    }
}

#[test]
fn extension_is_holomorphic() {
    let s = example();
    let p = PartitionPair::default();
    for (c, tol) in [(Complex64::new(0.5, 0.0), 1e-8), (Complex64::new(3.3, 2.0), 1e-8)] {
        let d = mean_value_defect(&s, &p, c, 0.5, 64).unwrap();
        assert!(d <= tol, "{c}: {d:e}");
    }
}

fn trig_poly() -> impl Strategy<Value = (f64, Vec<f64>, Vec<f64>)> {
    (1usize..6).prop_flat_map(|k| {
        (
            -2.0f64..2.0,
            prop::collection::vec(-1.0f64..1.0, k),
            prop::collection::vec(-1.0f64..1.0, k),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn partition_of_unity(w in MIN_WIDTH..MAX_WIDTH, th in -10.0f64..10.0) {
        let p = make_partition(w).unwrap();
        let (a, b) = (p.rho1(th), p.rho2(th));
        prop_assert!((a + b - 1.0).abs() <= 1e-14);
        prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        let (lo, hi) = p.lifted_support();
        let lift = p.lifted_rho1(th) + p.lifted_rho2(th);
        if (lo..hi).contains(&th) {
            prop_assert!((0.0..=1.0 + 1e-14).contains(&lift));
        } else {
            prop_assert_eq!(lift, 0.0);
        }
    }

    #[test]
    fn integer_values_are_fourier_coefficients(
        (c, cos, sin) in trig_poly(),
        w1 in 0.2f64..0.5,
        w2 in 0.6f64..0.9,
    ) {
        let s = CircleSample::trigonometric(c, &cos, &sin).unwrap();
        let pair = [make_partition(w1).unwrap(), make_partition(w2).unwrap()];
        let r = integer_consistency_report(&s, &pair, (-8, 8)).unwrap();
        prop_assert!(r.max_discrepancy <= 1e-10, "{:e}", r.max_discrepancy);
        prop_assert!(r.max_shifted_discrepancy <= 1e-10);
    }

    #[test]
    fn reflection_symmetry((c, cos, sin) in trig_poly(), re in -6.0f64..6.0, im in -4.0f64..4.0) {
        let s = CircleSample::trigonometric(c, &cos, &sin).unwrap();
        let p = PartitionPair::default();
        let xi = Complex64::new(re, im);
        let f = entire_extension(&s, &p, xi).unwrap();
        let g = entire_extension(&s, &p, -xi.conj()).unwrap();
        prop_assert!((g - f.conj()).norm() <= 1e-10 * (1.0 + f.norm()));
    }
}
