use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

use super::partition::PartitionPair;
use super::sample::{fourier_coefficient, CircleSample};

/// Growth of the integrand is bounded by `e^{|Im ξ|·7π/4}`.
pub const MAX_IMAG: f64 = 50.0;

const RULE_ORDER: usize = 20;
const TRANSITION_PANELS: usize = 48;
const FLAT_PANELS: usize = 24;

/// Nodes and weights `w_i·(ρ̃₁ + ρ̃₂)(θ_i)` on the lifted support.
fn lifted_rule(pi: &PartitionPair) -> Vec<(f64, f64)> {
    let (inner, outer) = pi.transition();
    let pieces = [
        (-outer, -inner, TRANSITION_PANELS),
        (-inner, 2.0 * PI - outer, FLAT_PANELS),
        (2.0 * PI - outer, 2.0 * PI - inner, TRANSITION_PANELS),
    ];
    let (x, w) = gauss_legendre(RULE_ORDER);
    let mut rule = Vec::with_capacity(RULE_ORDER * (2 * TRANSITION_PANELS + FLAT_PANELS));
    for (a, b, panels) in pieces {
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for (xi, wi) in x.iter().zip(&w) {
                let th = mid + 0.5 * h * xi;
                let g = pi.lifted_rho1(th) + pi.lifted_rho2(th);
                rule.push((th, 0.5 * h * wi * g));
            }
        }
    }
    rule
}

fn check_xi(xi: Complex64) -> Result<()> {
    if !(xi.re.is_finite() && xi.im.is_finite()) {
        return Err(Error::NonFinite("ξ".into()));
    }
    if xi.im.abs() > MAX_IMAG {
        return Err(Error::ImaginaryPartTooLarge(xi.im.abs()));
    }
    Ok(())
}

/// `𝓕(S)(ξ) = ∫_ℝ e^{−iξθ} (ρ̃₁ + ρ̃₂)(θ) S(θ) dθ`, entire in `ξ` and equal to
/// the Fourier coefficient `B_m` at every integer `m`.
pub fn entire_extension(s: &CircleSample, pi: &PartitionPair, xi: Complex64) -> Result<Complex64> {
    check_xi(xi)?;
    Ok(extension_with_rule(s, &lifted_rule(pi), &[xi])[0])
}

/// [`entire_extension`] at many points, sharing one quadrature rule.
pub fn entire_extension_many(
    s: &CircleSample,
    pi: &PartitionPair,
    xis: &[Complex64],
) -> Result<Vec<Complex64>> {
    xis.iter().try_for_each(|x| check_xi(*x))?;
    Ok(extension_with_rule(s, &lifted_rule(pi), xis))
}

fn extension_with_rule(s: &CircleSample, rule: &[(f64, f64)], xis: &[Complex64]) -> Vec<Complex64> {
    let weighted: Vec<(f64, f64)> = rule.iter().map(|(th, w)| (*th, w * s.eval(*th))).collect();
    xis.iter()
        .map(|xi| {
            weighted
                .iter()
                .map(|(th, w)| *w * (Complex64::new(0.0, -th) * xi).exp())
                .sum()
        })
        .collect()
}

/// Mean-value defect `|𝓕(ξ₀) − (1/2π)∮ 𝓕(ξ₀ + re^{iα}) dα|`, a numerical
/// holomorphy check (trapezoidal rule, spectrally accurate for entire 𝓕).
pub fn mean_value_defect(
    s: &CircleSample,
    pi: &PartitionPair,
    center: Complex64,
    radius: f64,
    points: usize,
) -> Result<f64> {
    if !(radius > 0.0) || points < 3 {
        return Err(Error::InvalidInput(format!(
            "mean-value circle needs radius > 0 and at least 3 points, got r = {radius}, n = {points}"
        )));
    }
    let mut xis: Vec<Complex64> = (0..points)
        .map(|k| center + Complex64::from_polar(radius, 2.0 * PI * k as f64 / points as f64))
        .collect();
    xis.push(center);
    let vals = entire_extension_many(s, pi, &xis)?;
    let mean = vals[..points].iter().sum::<Complex64>() / points as f64;
    Ok((mean - vals[points]).norm())
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegerRow {
    pub m: i64,
    pub fourier: Complex64,
    /// `|𝓕_Π(S)(m) − B_m|` per partition.
    pub discrepancy: Vec<f64>,
    /// `|(𝓕_Π(S)(m) + sin πm) − 𝓕_Π(S)(m)|` per partition.
    pub shifted_discrepancy: Vec<f64>,
}

/// Integer-restriction uniqueness of the entire extension.
#[derive(Debug, Clone, Serialize)]
pub struct IntegerConsistencyReport {
    pub widths: Vec<f64>,
    pub rows: Vec<IntegerRow>,
    pub max_discrepancy: f64,
    pub max_shifted_discrepancy: f64,
    /// `𝓕_Π(S)(1/2)` per partition.
    pub half_integer_values: Vec<Complex64>,
    /// Largest pairwise distance of `half_integer_values`.
    pub half_integer_spread: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub const INTEGER_TOL: f64 = 1e-10;

pub fn integer_consistency_report(
    s: &CircleSample,
    partitions: &[PartitionPair],
    m_range: (i64, i64),
) -> Result<IntegerConsistencyReport> {
    if partitions.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "integer consistency needs at least two partitions, got {}",
            partitions.len()
        )));
    }
    let (lo, hi) = m_range;
    if lo > hi {
        return Err(Error::InvalidInput(format!("empty integer range [{lo}, {hi}]")));
    }
    let mut xis: Vec<Complex64> = (lo..=hi).map(|m| Complex64::new(m as f64, 0.0)).collect();
    xis.push(Complex64::new(0.5, 0.0));
    let per_partition: Vec<Vec<Complex64>> = partitions
        .iter()
        .map(|p| entire_extension_many(s, p, &xis))
        .collect::<Result<_>>()?;
    let count = xis.len() - 1;
    let rows: Vec<IntegerRow> = (0..count)
        .map(|i| {
            let m = lo + i as i64;
            let b = fourier_coefficient(s, m);
            let shift = (Complex64::new(PI * m as f64, 0.0)).sin();
            IntegerRow {
                m,
                fourier: b,
                discrepancy: per_partition.iter().map(|v| (v[i] - b).norm()).collect(),
                shifted_discrepancy: per_partition
                    .iter()
                    .map(|v| ((v[i] + shift) - b).norm())
                    .collect(),
            }
        })
        .collect();
    let max_of = |f: fn(&IntegerRow) -> &Vec<f64>| {
        rows.iter()
            .flat_map(|r| f(r).iter().copied())
            .fold(0.0f64, f64::max)
    };
    let max_discrepancy = max_of(|r| &r.discrepancy);
    let max_shifted_discrepancy = max_of(|r| &r.shifted_discrepancy);
    let half: Vec<Complex64> = per_partition.iter().map(|v| v[count]).collect();
    let mut spread = 0.0f64;
    for a in &half {
        for b in &half {
            spread = spread.max((a - b).norm());
        }
    }
    Ok(IntegerConsistencyReport {
        widths: partitions.iter().map(|p| p.width()).collect(),
        rows,
        max_discrepancy,
        max_shifted_discrepancy,
        half_integer_values: half,
        half_integer_spread: spread,
        tolerance: INTEGER_TOL,
        pass: max_discrepancy <= INTEGER_TOL && max_shifted_discrepancy <= INTEGER_TOL,
    })
}
