use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum SampleSource {
    Trigonometric,
    Sampled { count: usize },
}

/// A real smooth function on the circle, held as its trigonometric
/// coefficients `S(θ) = Σ_{|k| ≤ K} c_k e^{ikθ}`.
///
/// Sampled inputs are converted once by an FFT; the resulting trigonometric
/// interpolant is periodic by construction.
#[derive(Debug, Clone, Serialize)]
pub struct CircleSample {
    source: SampleSource,
    max_frequency: usize,
    /// `c_{−K}, …, c_K`.
    coefficients: Vec<Complex64>,
}

impl CircleSample {
    /// `a₀ + Σ_k a_k cos kθ + b_k sin kθ`, with `cos[k−1] = a_k` and
    /// `sin[k−1] = b_k`.
    pub fn trigonometric(constant: f64, cos: &[f64], sin: &[f64]) -> Result<Self> {
        if !constant.is_finite() || cos.iter().chain(sin).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("trigonometric coefficients".into()));
        }
        let k = cos.len().max(sin.len());
        let mut c = vec![Complex64::new(0.0, 0.0); 2 * k + 1];
        c[k] = Complex64::new(constant, 0.0);
        for j in 1..=k {
            let a = cos.get(j - 1).copied().unwrap_or(0.0);
            let b = sin.get(j - 1).copied().unwrap_or(0.0);
            // a cos + b sin = ((a − ib)/2) e^{ijθ} + ((a + ib)/2) e^{−ijθ}
            c[k + j] = Complex64::new(0.5 * a, -0.5 * b);
            c[k - j] = Complex64::new(0.5 * a, 0.5 * b);
        }
        Ok(CircleSample {
            source: SampleSource::Trigonometric,
            max_frequency: k,
            coefficients: c,
        })
    }

    /// Trigonometric interpolant of equispaced samples `S(2πj/n)`.
    pub fn from_samples(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n < 3 {
            return Err(Error::InvalidInput(format!(
                "need at least 3 circle samples, got {n}"
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("circle samples".into()));
        }
        let mut buf: Vec<Complex64> = values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        let k = n / 2;
        let mut c = vec![Complex64::new(0.0, 0.0); 2 * k + 1];
        for (j, v) in buf.iter().enumerate() {
            let v = v * scale;
            if 2 * j < n {
                c[k + j] += v;
            }
            if j > 0 && 2 * (n - j) < n {
                c[k - (n - j)] += v;
            }
            if 2 * j == n {
                // split the Nyquist mode so the interpolant stays real
                c[0] += 0.5 * v;
                c[2 * k] += 0.5 * v;
            }
        }
        Ok(CircleSample {
            source: SampleSource::Sampled { count: n },
            max_frequency: k,
            coefficients: c,
        })
    }

    pub fn source(&self) -> SampleSource {
        self.source
    }

    pub fn max_frequency(&self) -> usize {
        self.max_frequency
    }

    /// `c_k`; zero beyond the band limit.
    pub fn coefficient(&self, k: i64) -> Complex64 {
        let kmax = self.max_frequency as i64;
        if k.abs() > kmax {
            Complex64::new(0.0, 0.0)
        } else {
            self.coefficients[(k + kmax) as usize]
        }
    }

    /// `(k, c_k)` for every stored frequency.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let kmax = self.max_frequency as i64;
        self.coefficients
            .iter()
            .enumerate()
            .map(move |(i, c)| (i as i64 - kmax, *c))
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.modes()
            .map(|(k, c)| (c * Complex64::from_polar(1.0, k as f64 * theta)).re)
            .sum()
    }
}

/// `B_m = ∫₀^{2π} e^{−imθ} S(θ) dθ = 2π c_m`, exact by coefficient arithmetic.
pub fn fourier_coefficient(s: &CircleSample, m: i64) -> Complex64 {
    2.0 * PI * s.coefficient(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elementary_coefficients() {
        let one = CircleSample::trigonometric(1.0, &[], &[]).unwrap();
        assert!((fourier_coefficient(&one, 0) - 2.0 * PI).norm() < 1e-15);
        assert_eq!(fourier_coefficient(&one, 3).norm(), 0.0);
        let cos = CircleSample::trigonometric(0.0, &[1.0], &[]).unwrap();
        assert!((fourier_coefficient(&cos, 1) - PI).norm() < 1e-15);
        assert!((fourier_coefficient(&cos, -1) - PI).norm() < 1e-15);
    }

    #[test]
    fn samples_reproduce_descriptor() {
        let s = CircleSample::trigonometric(1.0, &[1.0, 0.0], &[0.0, 0.3]).unwrap();
        for n in [16usize, 17] {
            let values: Vec<f64> = (0..n).map(|j| s.eval(2.0 * PI * j as f64 / n as f64)).collect();
            let t = CircleSample::from_samples(&values).unwrap();
            for m in -8..=8 {
                let d = (fourier_coefficient(&s, m) - fourier_coefficient(&t, m)).norm();
                assert!(d < 1e-13, "n={n} m={m} {d}");
            }
            assert!((t.eval(0.3) - t.eval(0.3 + 2.0 * PI)).abs() < 1e-12);
        }
    }

    #[test]
    fn nyquist_mode_stays_real() {
        // cos(2θ) sampled at four points sits exactly on the Nyquist mode
        let values = [1.0, -1.0, 1.0, -1.0];
        let t = CircleSample::from_samples(&values).unwrap();
        for j in 0..4 {
            let th = 2.0 * PI * j as f64 / 4.0;
            assert!((t.eval(th) - values[j]).abs() < 1e-14);
        }
        assert!(t.coefficient(2).im.abs() < 1e-15);
        assert!((t.coefficient(2) - t.coefficient(-2)).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(CircleSample::from_samples(&[1.0, 2.0]).is_err());
        assert!(CircleSample::from_samples(&[1.0, f64::NAN, 0.0]).is_err());
        assert!(CircleSample::trigonometric(f64::INFINITY, &[], &[]).is_err());
    }
}
