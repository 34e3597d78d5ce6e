use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::QuadratureScheme;
use crate::surface::{density_jet, ln_binomial_row, RadialPotential};

pub const MAX_LEVEL: usize = 200;
const RESOLUTION_TOL: f64 = 1e-11;

/// Diagonal of the Gram matrix of the monomial basis `z^0, ..., z^m` of
/// `H^0(O(m))` under the metric `e^{-mΦ}` and volume `ω`.
#[derive(Debug, Clone, Serialize)]
pub struct GramDiagonal {
    pub level: usize,
    /// `G_j = ∫ e^{jt - mΦ} Φ'' dt`.
    pub entries: Vec<f64>,
    /// `(m+1)·binom(m,j)·G_j`; identically one on Fubini–Study.
    pub normalized: Vec<f64>,
    pub potential_id: String,
}

pub(crate) fn check_level(m: usize) -> Result<()> {
    if (1..=MAX_LEVEL).contains(&m) {
        Ok(())
    } else {
        Err(Error::LevelOutOfRange(m))
    }
}

/// Short fingerprint of a potential and its discretization, for reports.
pub fn potential_id(p: &RadialPotential) -> String {
    let d = p.scheme().descriptor();
    let text = format!("{:?}|{:?}|{}", p.perturbation(), d, p.window());
    // FNV-1a
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{:?}-{h:016x}", p.kind()).to_lowercase()
}

/// Binomial probabilities `binom(m,j) s^j (1-s)^(m-j)`, j = 0..m.
pub(crate) fn binomial_pmf(ln_binom: &[f64], s: f64, sc: f64, out: &mut [f64]) {
    let (ls, lsc) = (s.ln(), sc.ln());
    let m = ln_binom.len() - 1;
    for (j, o) in out.iter_mut().enumerate() {
        *o = (ln_binom[j] + j as f64 * ls + (m - j) as f64 * lsc).exp();
    }
}

/// `N_j / (m+1) = ∫ pmf_j e^{-mφ} ρ ds` from nodal data.
pub(crate) fn normalized_from_nodes(
    m: usize,
    scheme: &QuadratureScheme,
    phi: impl Iterator<Item = f64>,
    rho: impl Iterator<Item = f64>,
) -> Vec<f64> {
    let lb = ln_binomial_row(m);
    let mut acc = vec![0.0; m + 1];
    let mut pmf = vec![0.0; m + 1];
    let mf = m as f64;
    for (((w, s), sc), (ph, r)) in scheme
        .weights()
        .iter()
        .zip(scheme.s())
        .zip(scheme.sc())
        .zip(phi.zip(rho))
    {
        binomial_pmf(&lb, *s, *sc, &mut pmf);
        let f = w * (-mf * ph).exp() * r;
        for (a, p) in acc.iter_mut().zip(&pmf) {
            *a += f * p;
        }
    }
    acc.iter().map(|a| a * (mf + 1.0)).collect()
}

pub(crate) fn gram_unchecked(m: usize, p: &RadialPotential) -> GramDiagonal {
    let normalized = normalized_from_nodes(
        m,
        p.scheme(),
        p.phi_jets().iter().map(|j| j.value()),
        p.density_jets().iter().map(|j| j.value()),
    );
    from_normalized(m, normalized, potential_id(p))
}

pub(crate) fn from_normalized(m: usize, normalized: Vec<f64>, potential_id: String) -> GramDiagonal {
    let lb = ln_binomial_row(m);
    let entries = normalized
        .iter()
        .zip(&lb)
        .map(|(n, l)| n / ((m as f64 + 1.0) * l.exp()))
        .collect();
    GramDiagonal {
        level: m,
        entries,
        normalized,
        potential_id,
    }
}

/// Compares against the same rule with every panel halved. Returns the
/// largest relative discrepancy.
fn resolution_error(m: usize, p: &RadialPotential, gram: &GramDiagonal) -> Result<f64> {
    let d = p.scheme().descriptor();
    let fine = QuadratureScheme::new(d.inner_window, 2 * d.interior_panels, d.order)?;
    let jets: Vec<_> = fine
        .s()
        .iter()
        .zip(fine.sc())
        .map(|(s, sc)| p.perturbation().jet(*s, *sc))
        .collect();
    let rho: Vec<f64> = jets
        .iter()
        .zip(fine.s().iter().zip(fine.sc()))
        .map(|(j, (s, sc))| density_jet(j, *s, *sc).value())
        .collect();
    let reference = normalized_from_nodes(m, &fine, jets.iter().map(|j| j.value()), rho.into_iter());
    Ok(gram
        .normalized
        .iter()
        .zip(&reference)
        .fold(0.0f64, |e, (a, b)| e.max(((a - b) / b).abs())))
}

/// Section norms `G_jj = ‖z^j‖²_{L²}`, j = 0..m.
///
/// The quadrature is validated against a rule with twice as many panels;
/// if the two disagree beyond `1e-11` relative the call is rejected.
pub fn section_norms(m: usize, p: &RadialPotential) -> Result<GramDiagonal> {
    check_level(m)?;
    let gram = gram_unchecked(m, p);
    if gram.normalized.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::NonFinite(format!("Gram diagonal at m = {m}")));
    }
    let error = resolution_error(m, p, &gram)?;
    if error > RESOLUTION_TOL {
        return Err(Error::QuadratureTooCoarse {
            level: m,
            error,
            required_grid_size: 2 * p.grid_size(),
        });
    }
    Ok(gram)
}

/// Model Hilbert-polynomial constant `C_ξ = (ξ + 1)/ξ`.
pub fn c_of_m(xi: f64) -> Result<f64> {
    if !(xi > 0.0) || !xi.is_finite() {
        return Err(Error::NonPositiveXi(xi));
    }
    Ok((xi + 1.0) / xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::make_fs_potential;

    #[test]
    fn fs_entries_match_beta_integrals() {
        let p = make_fs_potential(20.0, 512).unwrap();
        let g = section_norms(2, &p).unwrap();
        for (a, b) in g.entries.iter().zip([1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        let g1 = section_norms(1, &p).unwrap();
        assert!(g1.entries.iter().all(|v| (v - 0.5).abs() < 1e-14));
    }

    #[test]
    fn level_range() {
        let p = make_fs_potential(20.0, 512).unwrap();
        assert!(matches!(section_norms(0, &p), Err(Error::LevelOutOfRange(0))));
        assert!(section_norms(201, &p).is_err());
    }

    #[test]
    fn coarse_grid_is_detected_at_high_level() {
        let p = make_fs_potential(10.0, 64).unwrap();
        match section_norms(200, &p) {
            Err(Error::QuadratureTooCoarse {
                required_grid_size, ..
            }) => assert!(required_grid_size > 64),
            other => panic!("expected coarse-quadrature error, got {other:?}"),
        }
    }

    #[test]
    fn c_of_m_values() {
        assert_eq!(c_of_m(5.0).unwrap(), 1.2);
        assert_eq!(c_of_m(1.0).unwrap(), 2.0);
        assert!(matches!(c_of_m(0.0), Err(Error::NonPositiveXi(_))));
        assert!(c_of_m(-1.0).is_err());
    }
}
