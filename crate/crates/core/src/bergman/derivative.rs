use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::surface::{e_operator, integrate_values, ln_binomial_row, GridFunction, RadialPotential};

use super::gram::{binomial_pmf, check_level, gram_unchecked};
use super::kernel::kernel_unchecked;

const MEAN_ZERO_TOL: f64 = 1e-10;

/// Derivatives of the normalized entries `N_j` along
/// `h → e^{-εψ}h`, `Φ → Φ + εψ`:
/// `dN_j = (m+1) ∫ pmf_j e^{-mφ} (−mψρ + Eψ) ds`.
pub(crate) fn normalized_derivative(m: usize, p: &RadialPotential, psi: &[Jet]) -> Vec<f64> {
    let q = p.scheme();
    let lb = ln_binomial_row(m);
    let mf = m as f64;
    let mut pmf = vec![0.0; m + 1];
    let mut acc = vec![0.0; m + 1];
    for i in 0..q.len() {
        let (s, sc) = (q.s()[i], q.sc()[i]);
        binomial_pmf(&lb, s, sc, &mut pmf);
        let rho = p.density_jets()[i].value();
        let integrand = -mf * psi[i].value() * rho + e_operator(&psi[i], s, sc).value();
        let f = q.weights()[i] * (-mf * p.phi_jets()[i].value()).exp() * integrand;
        for (a, b) in acc.iter_mut().zip(&pmf) {
            *a += f * b;
        }
    }
    acc.iter().map(|a| a * (mf + 1.0)).collect()
}

fn check_direction(p: &RadialPotential, psi: &GridFunction) -> Result<()> {
    if !p.scheme().same_nodes(psi.scheme()) {
        return Err(Error::NodeMismatch);
    }
    let mean = integrate_values(p, psi.values());
    if mean.abs() > MEAN_ZERO_TOL {
        return Err(Error::NotMeanZero(mean));
    }
    Ok(())
}

/// `dG_jj/dε = ∫ e^{jt − mΦ} (−mψΦ'' + ψ'') dt` for a mean-zero direction ψ.
pub fn gram_derivative(m: usize, p: &RadialPotential, psi: &GridFunction) -> Result<Vec<f64>> {
    check_level(m)?;
    check_direction(p, psi)?;
    let jets = psi.jets_for(2)?;
    let lb = ln_binomial_row(m);
    Ok(normalized_derivative(m, p, &jets)
        .iter()
        .zip(&lb)
        .map(|(d, l)| d / ((m as f64 + 1.0) * l.exp()))
        .collect())
}

/// Full first variation of `B_m` along the same path:
/// `dB = −mψB − (1/m) Σ_j e^{jt − mΦ} dG_jj / G_jj²`.
pub fn bergman_derivative(
    m: usize,
    p: &RadialPotential,
    psi: &GridFunction,
) -> Result<GridFunction> {
    let dg = gram_derivative(m, p, psi)?;
    let gram = gram_unchecked(m, p);
    let kernel = kernel_unchecked(m, p);
    let q = p.scheme();
    let lb = ln_binomial_row(m);
    let mf = m as f64;
    // coefficient of pmf_j in the correction term
    let coef: Vec<f64> = dg
        .iter()
        .zip(&gram.entries)
        .zip(&lb)
        .map(|((d, g), l)| d / (g * g * l.exp()))
        .collect();
    let mut pmf = vec![0.0; m + 1];
    let values = (0..q.len())
        .map(|i| {
            binomial_pmf(&lb, q.s()[i], q.sc()[i], &mut pmf);
            let sum: f64 = pmf.iter().zip(&coef).map(|(a, b)| a * b).sum();
            let correction = (-mf * p.phi_jets()[i].value()).exp() * sum / mf;
            -mf * psi.values()[i] * kernel.values()[i] - correction
        })
        .collect();
    GridFunction::from_values(q.clone(), format!("dB_{m}({})", psi.name()), values)
}

/// Mean-zero Legendre polynomials in `2s − 1`, degrees `1..=count`.
fn mean_zero_basis(p: &RadialPotential, count: usize) -> Vec<Vec<Jet>> {
    let q = p.scheme();
    let mut basis = vec![Vec::with_capacity(q.len()); count];
    for (s, sc) in q.s().iter().zip(q.sc()) {
        let mut x = Jet::constant(s - sc);
        x.0[1] = 2.0;
        let (mut p0, mut p1) = (Jet::constant(1.0), x);
        for (k, b) in basis.iter_mut().enumerate() {
            b.push(p1);
            let n = (k + 1) as f64;
            let p2 = (x * p1).scale((2.0 * n + 1.0) / (n + 1.0)) - p0.scale(n / (n + 1.0));
            p0 = p1;
            p1 = p2;
        }
    }
    for b in basis.iter_mut() {
        let values: Vec<f64> = b.iter().map(Jet::value).collect();
        let mean = integrate_values(p, &values);
        b.iter_mut().for_each(|j| j.0[0] -= mean);
    }
    basis
}

/// Projects a mean-zero ψ onto `ker(gram_derivative)` by subtracting a
/// combination of `m + 1` mean-zero polynomials in the moment coordinate.
pub fn project_to_gram_kernel(
    m: usize,
    p: &RadialPotential,
    psi: &GridFunction,
) -> Result<GridFunction> {
    check_level(m)?;
    check_direction(p, psi)?;
    let jets = psi.jets_for(2)?;
    let basis = mean_zero_basis(p, m + 1);
    let cols: Vec<Vec<f64>> = basis.iter().map(|b| normalized_derivative(m, p, b)).collect();
    let a = DMatrix::from_fn(m + 1, m + 1, |j, k| cols[k][j]);
    let rhs = DVector::from_vec(normalized_derivative(m, p, &jets));
    let c = a
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::DegenerateFit(e.to_string()))?;
    let out: Vec<Jet> = (0..p.scheme().len())
        .map(|i| {
            basis
                .iter()
                .zip(c.iter())
                .fold(jets[i], |acc, (b, ck)| acc - b[i].scale(*ck))
        })
        .collect();
    let order = if psi.has_jets() { psi.order() } else { 2 };
    GridFunction::from_jets(
        p.scheme().clone(),
        format!("proj({})", psi.name()),
        out,
        order,
    )
}
