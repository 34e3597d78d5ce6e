use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, JET_ORDER};
use crate::quadrature::logistic_pair;
use crate::surface::{
    integrate_values, laplacian_apply, BernsteinPoly, GridFunction, RadialPotential,
};

use super::gram::{c_of_m, check_level, gram_unchecked, section_norms, GramDiagonal};

const OVERFLOW_LIMIT: f64 = 700.0;

/// Bergman kernel (plain or torus-weighted) at one level.
#[derive(Debug, Clone)]
pub struct BergmanReport {
    pub level: usize,
    pub kernel: GridFunction,
    pub expected_constant: f64,
    pub sup_deviation: f64,
    /// `∫ kernel` against the volume used for `expected_constant`.
    pub mean: f64,
    /// Log-modulus `y` of the torus character, when weighted.
    pub weight_y: Option<f64>,
}

/// Torus weight `𝒴 = i q² 𝒲` with `𝒲 = w·(generator)`; the induced shift of
/// the log coordinate is `y = w q²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusWeight {
    pub w: f64,
}

impl TorusWeight {
    pub fn new(w: f64) -> Result<Self> {
        if !w.is_finite() {
            return Err(Error::InvalidInput(format!("torus weight must be finite, got {w}")));
        }
        Ok(TorusWeight { w })
    }

    pub fn y(&self, m: usize) -> f64 {
        self.w / (m * m) as f64
    }
}

/// Bernstein coefficients `(m+1)/(N_j e^{jy})` of `m·e^{mφ}·B`.
fn kernel_coefficients(gram: &GramDiagonal, y: f64) -> Vec<f64> {
    let m1 = gram.level as f64 + 1.0;
    gram.normalized
        .iter()
        .enumerate()
        .map(|(j, n)| m1 / (n * (j as f64 * y).exp()))
        .collect()
}

pub(crate) fn kernel_jets(p: &RadialPotential, gram: &GramDiagonal, y: f64) -> Vec<Jet> {
    let m = gram.level as f64;
    let poly = BernsteinPoly::new(&kernel_coefficients(gram, y));
    let q = p.scheme();
    p.phi_jets()
        .iter()
        .zip(q.s().iter().zip(q.sc()))
        .map(|(phi, (s, sc))| (phi.scale(-m).exp() * poly.jet(*s, *sc)).scale(1.0 / m))
        .collect()
}

/// Kernel values at the nodes without the quadrature-resolution check.
pub(crate) fn kernel_unchecked(m: usize, p: &RadialPotential) -> GridFunction {
    let gram = gram_unchecked(m, p);
    GridFunction::from_jets(p.scheme().clone(), "B", kernel_jets(p, &gram, 0.0), JET_ORDER)
        .expect("kernel is finite")
}

fn report(
    level: usize,
    kernel: GridFunction,
    expected_constant: f64,
    mean: f64,
    weight_y: Option<f64>,
) -> BergmanReport {
    let sup_deviation = kernel
        .values()
        .iter()
        .fold(0.0f64, |a, v| a.max((v - expected_constant).abs()));
    BergmanReport {
        level,
        kernel,
        expected_constant,
        sup_deviation,
        mean,
        weight_y,
    }
}

/// `B_m = (1/m) Σ_j e^{jt - mΦ} / G_jj`.
pub fn bergman_kernel(m: usize, p: &RadialPotential) -> Result<BergmanReport> {
    let gram = section_norms(m, p)?;
    let kernel = GridFunction::from_jets(
        p.scheme().clone(),
        format!("B_{m}"),
        kernel_jets(p, &gram, 0.0),
        JET_ORDER,
    )?;
    let mean = integrate_values(p, kernel.values());
    Ok(report(m, kernel, c_of_m(m as f64)?, mean, None))
}

/// Kernel at an arbitrary log-coordinate, from a precomputed Gram diagonal.
pub fn kernel_at(p: &RadialPotential, gram: &GramDiagonal, t: f64) -> f64 {
    let m = gram.level as f64;
    let (s, sc) = logistic_pair(t);
    let poly = BernsteinPoly::new(&kernel_coefficients(gram, 0.0));
    let phi = p.perturbation().jet(s, sc).value();
    (-m * phi).exp() * poly.jet(s, sc).value() / m
}

/// `β = 2m (1 + (2/(3m)) Δ)(B_m − C_m)`.
pub fn beta(m: usize, p: &RadialPotential) -> Result<GridFunction> {
    let r = bergman_kernel(m, p)?;
    beta_from_kernel(p, &r)
}

fn beta_from_kernel(p: &RadialPotential, r: &BergmanReport) -> Result<GridFunction> {
    let m = r.level as f64;
    let lap = laplacian_apply(p, &r.kernel)?;
    let dev = r.kernel.shifted(-r.expected_constant);
    Ok(dev
        .linear_combination(2.0 * m, &lap, 4.0 / 3.0)?
        .renamed(format!("beta_{}", r.level)))
}

fn check_weight(m: usize, y: f64) -> Result<()> {
    if !y.is_finite() || y.abs() * m as f64 > OVERFLOW_LIMIT {
        return Err(Error::WeightOverflow(y.abs() * m as f64));
    }
    Ok(())
}

/// Density of `g*ω` against the Fubini–Study measure: `Φ''(t − y)/(s(1−s))`.
fn pulled_back_density(p: &RadialPotential, y: f64) -> Result<Vec<f64>> {
    if y == 0.0 {
        return Ok(p.density_jets().iter().map(Jet::value).collect());
    }
    let moved = p.translated(y)?;
    Ok(moved.density_jets().iter().map(Jet::value).collect())
}

pub(crate) fn weighted_from_gram(
    p: &RadialPotential,
    gram: &GramDiagonal,
    y: f64,
) -> Result<BergmanReport> {
    let m = gram.level;
    check_weight(m, y)?;
    let kernel = GridFunction::from_jets(
        p.scheme().clone(),
        format!("B_{m},y"),
        kernel_jets(p, gram, y),
        JET_ORDER,
    )?;
    let (expected, mean) = if y == 0.0 {
        let mean = integrate_values(p, kernel.values());
        (c_of_m(m as f64)?, mean)
    } else {
        let rho_y = pulled_back_density(p, y)?;
        let c = p
            .scheme()
            .weights()
            .iter()
            .zip(&rho_y)
            .zip(kernel.values())
            .map(|((w, r), b)| w * r * b)
            .sum();
        (c, c)
    };
    Ok(report(m, kernel, expected, mean, Some(y)))
}

/// Weighted kernel `(1/m) Σ_j e^{jt − mΦ}/(G_jj e^{jy})`; each weight space
/// `C·z^j` is rescaled by `|χ_j(g)|² = e^{jy}`.
pub fn weighted_bergman(m: usize, p: &RadialPotential, y: f64) -> Result<BergmanReport> {
    check_level(m)?;
    check_weight(m, y)?;
    let gram = section_norms(m, p)?;
    weighted_from_gram(p, &gram, y)
}

/// `C_{m,𝒴} = ∫ B_{m,ω,𝒴} g*ω`, with `g*ω` realized as `Φ''(t − y) dt`.
pub fn c_weighted(m: usize, p: &RadialPotential, y: f64) -> Result<f64> {
    Ok(weighted_bergman(m, p, y)?.expected_constant)
}

/// `β_{q,ω,𝒲} = 2m (1 + (2/(3m)) Δ)(B_{m,ω,𝒴} − C_{m,𝒴})`, `y = w/m²`.
pub fn beta_weighted(m: usize, p: &RadialPotential, weight: TorusWeight) -> Result<GridFunction> {
    let r = weighted_bergman(m, p, weight.y(m))?;
    beta_from_kernel(p, &r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{make_fs_potential, make_perturbed_potential, PerturbationSpec};

    #[test]
    fn fs_kernel_is_constant() {
        let p = make_fs_potential(20.0, 512).unwrap();
        for m in [2, 10] {
            let r = bergman_kernel(m, &p).unwrap();
            let c = (m as f64 + 1.0) / m as f64;
            assert!(r.sup_deviation < 1e-12);
            assert!((r.mean - c).abs() < 1e-13);
        }
    }

    #[test]
    fn trace_identity_on_bump() {
        let spec = PerturbationSpec::GaussianBump {
            amplitude: 0.1,
            width: 1.0,
            center: 0.0,
        };
        let p = make_perturbed_potential(&spec, 20.0, 512).unwrap();
        let r = bergman_kernel(10, &p).unwrap();
        assert!(r.sup_deviation > 1e-4);
        assert!((r.mean - 1.1).abs() < 1e-12);
        assert!(r.kernel.values().iter().all(|v| *v > 0.0));
    }

    #[test]
    fn weighted_closed_form_on_fs() {
        let p = make_fs_potential(20.0, 512).unwrap();
        let r = weighted_bergman(2, &p, 0.3).unwrap();
        for (t, v) in r.kernel.nodes().iter().zip(r.kernel.values()) {
            let (s, _) = logistic_pair(*t);
            // (1+e^{t-y})/(1+e^t) = 1 - s(1 - e^{-y})
            let ratio = 1.0 - s * (1.0 - (-0.3f64).exp());
            assert!((v - 1.5 * ratio * ratio).abs() < 1e-13);
        }
        assert!(r.sup_deviation > 1e-2);
    }

    #[test]
    fn zero_weight_reduces_exactly() {
        let p = make_fs_potential(20.0, 512).unwrap();
        let a = bergman_kernel(5, &p).unwrap();
        let b = weighted_bergman(5, &p, 0.0).unwrap();
        assert_eq!(a.kernel.values(), b.kernel.values());
        assert_eq!(b.expected_constant, 1.2);
    }

    #[test]
    fn overflow_guard() {
        let p = make_fs_potential(20.0, 512).unwrap();
        assert!(matches!(
            weighted_bergman(10, &p, 71.0),
            Err(Error::WeightOverflow(_))
        ));
    }
}
