//! Truncated Taylor series ("jets") in one variable.
//!
//! A [`Jet`] stores the normalized coefficients `c[k] = f^(k)(x0) / k!` of a
//! function around a base point, up to [`JET_ORDER`]. Arithmetic follows the
//! usual Cauchy-product recurrences, so every quantity built from a potential
//! (volume density, scalar curvature, Bergman kernel, ...) carries exact
//! derivatives to the order its inputs allow.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Highest derivative order carried by a [`Jet`].
pub const JET_ORDER: usize = 6;
const N: usize = JET_ORDER + 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet(pub [f64; N]);

impl Jet {
    pub const fn constant(value: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = value;
        Jet(c)
    }

    /// The identity function `x` expanded at `x0`.
    pub const fn variable(x0: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = x0;
        c[1] = 1.0;
        Jet(c)
    }

    pub fn from_coefficients(coeffs: &[f64]) -> Self {
        let mut c = [0.0; N];
        for (dst, src) in c.iter_mut().zip(coeffs) {
            *dst = *src;
        }
        Jet(c)
    }

    /// Builds a jet from plain derivatives `[f, f', f'', ...]`.
    pub fn from_derivatives(derivs: &[f64]) -> Self {
        let mut c = [0.0; N];
        let mut fact = 1.0;
        for (k, (dst, d)) in c.iter_mut().zip(derivs).enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            *dst = d / fact;
        }
        Jet(c)
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.0[0]
    }

    #[inline]
    pub fn coeff(&self, k: usize) -> f64 {
        self.0[k]
    }

    /// k-th derivative at the base point.
    pub fn derivative_value(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.0[k] * fact
    }

    /// Jet of the derivative; the top coefficient becomes zero (one order of
    /// validity is lost).
    pub fn differentiate(&self) -> Self {
        let mut c = [0.0; N];
        for k in 0..N - 1 {
            c[k] = (k as f64 + 1.0) * self.0[k + 1];
        }
        Jet(c)
    }

    pub fn scale(&self, a: f64) -> Self {
        Jet(self.0.map(|v| v * a))
    }

    pub fn exp(&self) -> Self {
        let a = &self.0;
        let mut e = [0.0; N];
        e[0] = a[0].exp();
        for k in 1..N {
            let mut acc = 0.0;
            for i in 1..=k {
                acc += i as f64 * a[i] * e[k - i];
            }
            e[k] = acc / k as f64;
        }
        Jet(e)
    }

    pub fn ln(&self) -> Self {
        let a = &self.0;
        let mut l = [0.0; N];
        l[0] = a[0].ln();
        for k in 1..N {
            let mut acc = 0.0;
            for i in 1..k {
                acc += i as f64 * l[i] * a[k - i];
            }
            l[k] = (a[k] - acc / k as f64) / a[0];
        }
        Jet(l)
    }

    pub fn recip(&self) -> Self {
        Jet::constant(1.0) / *self
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = Jet::constant(1.0);
        for _ in 0..n {
            out = out * *self;
        }
        out
    }

    /// Composition `outer(inner(x))`, where `outer` is expanded at
    /// `inner.value()`.
    pub fn compose(outer: &Jet, inner: &Jet) -> Self {
        let mut delta = *inner;
        delta.0[0] = 0.0;
        let mut out = Jet::constant(outer.0[0]);
        let mut power = Jet::constant(1.0);
        for k in 1..N {
            power = power * delta;
            out = out + power.scale(outer.0[k]);
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(rhs.0) {
            *a += b;
        }
        Jet(c)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        Jet(c)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet(self.0.map(|v| -v))
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.0[0] += rhs;
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let (a, b) = (&self.0, &rhs.0);
        let mut c = [0.0; N];
        for k in 0..N {
            let mut acc = 0.0;
            for i in 0..=k {
                acc += a[i] * b[k - i];
            }
            c[k] = acc;
        }
        Jet(c)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        let (a, b) = (&self.0, &rhs.0);
        let mut c = [0.0; N];
        for k in 0..N {
            let mut acc = a[k];
            for i in 1..=k {
                acc -= b[i] * c[k - i];
            }
            c[k] = acc / b[0];
        }
        Jet(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exp_ln_roundtrip() {
        let x = Jet::variable(0.3);
        let f = (x * x + 1.0).ln().exp();
        let g = x * x + 1.0;
        for k in 0..N {
            assert_relative_eq!(f.0[k], g.0[k], epsilon = 1e-14);
        }
    }

    #[test]
    fn derivatives_of_exp() {
        let x = Jet::variable(0.7);
        let e = (x.scale(2.0)).exp();
        for k in 0..N {
            let expected = 2f64.powi(k as i32) * (1.4f64).exp();
            assert_relative_eq!(e.derivative_value(k), expected, max_relative = 1e-13);
        }
    }

    #[test]
    fn division_and_compose() {
        let x = Jet::variable(0.25);
        // 1/(1-x) at 0.25 has derivatives k!/(0.75)^(k+1)
        let r = Jet::constant(1.0) / (Jet::constant(1.0) - x);
        for k in 0..N {
            assert_relative_eq!(r.0[k], 1.0 / 0.75f64.powi(k as i32 + 1), max_relative = 1e-13);
        }
        // sin composed with 2x, compared against direct expansion
        let inner = x.scale(2.0);
        let y0 = inner.value();
        let outer = Jet::from_derivatives(&[
            y0.sin(),
            y0.cos(),
            -y0.sin(),
            -y0.cos(),
            y0.sin(),
            y0.cos(),
            -y0.sin(),
        ]);
        let c = Jet::compose(&outer, &inner);
        for k in 0..N {
            let sign = match k % 4 {
                0 => y0.sin(),
                1 => y0.cos(),
                2 => -y0.sin(),
                _ => -y0.cos(),
            };
            assert_relative_eq!(c.derivative_value(k), 2f64.powi(k as i32) * sign, epsilon = 1e-12);
        }
    }
}
