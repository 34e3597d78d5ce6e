use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Chart intervals on the real line whose images cover the circle.
pub const I1: (f64, f64) = (-0.75 * PI, 0.75 * PI);
pub const I2: (f64, f64) = (0.25 * PI, 1.75 * PI);

pub const DEFAULT_WIDTH: f64 = 0.5;
/// Below this the transition is too steep for the extension quadrature.
pub const MIN_WIDTH: f64 = 0.1;
/// At width 1 the support of ρ₁ would touch the boundary of `I₁`.
pub const MAX_WIDTH: f64 = 0.95;

/// `e^{−1/x}`-based smoothstep: `0` for `x ≤ 0`, `1` for `x ≥ 1`, and
/// `step(x) + step(1 − x) = 1`.
fn step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    a / (a + b)
}

/// Reduces `θ` to `(−π, π]`.
fn principal(theta: f64) -> f64 {
    let r = theta.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Partition of unity `ρ₁ + ρ₂ = 1` subordinate to the images of `I₁`, `I₂`.
///
/// `ρ₁` is even, equals 1 for `|θ| ≤ π/2 − wπ/4` and 0 for
/// `|θ| ≥ π/2 + wπ/4`; the transition sits inside the two chart overlaps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartitionPair {
    width: f64,
    inner: f64,
    outer: f64,
}

pub fn make_partition(width: f64) -> Result<PartitionPair> {
    if !(MIN_WIDTH..=MAX_WIDTH).contains(&width) {
        return Err(Error::InvalidProfile(format!(
            "width {width} outside [{MIN_WIDTH}, {MAX_WIDTH}]"
        )));
    }
    Ok(PartitionPair {
        width,
        inner: 0.5 * PI - 0.25 * PI * width,
        outer: 0.5 * PI + 0.25 * PI * width,
    })
}

impl Default for PartitionPair {
    fn default() -> Self {
        make_partition(DEFAULT_WIDTH).expect("default width is valid")
    }
}

impl PartitionPair {
    pub fn width(&self) -> f64 {
        self.width
    }

    /// `|θ|` range `[inner, outer]` where the cutoffs vary.
    pub fn transition(&self) -> (f64, f64) {
        (self.inner, self.outer)
    }

    fn ramp(&self, a: f64) -> f64 {
        (a - self.inner) / (self.outer - self.inner)
    }

    pub fn rho1(&self, theta: f64) -> f64 {
        step(1.0 - self.ramp(principal(theta).abs()))
    }

    pub fn rho2(&self, theta: f64) -> f64 {
        step(self.ramp(principal(theta).abs()))
    }

    /// `ρ₁` lifted to the line: `ρ₁` on `I₁`, zero elsewhere.
    pub fn lifted_rho1(&self, theta: f64) -> f64 {
        if theta > I1.0 && theta < I1.1 {
            self.rho1(theta)
        } else {
            0.0
        }
    }

    pub fn lifted_rho2(&self, theta: f64) -> f64 {
        if theta > I2.0 && theta < I2.1 {
            self.rho2(theta)
        } else {
            0.0
        }
    }

    /// Support of `ρ̃₁ + ρ̃₂` on the line.
    pub fn lifted_support(&self) -> (f64, f64) {
        (-self.outer, 2.0 * PI - self.inner)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_profile_values() {
        let p = PartitionPair::default();
        assert_eq!(p.rho1(0.0), 1.0);
        assert_eq!(p.rho1(PI), 0.0);
        assert_eq!(p.rho2(PI), 1.0);
    }

    #[test]
    fn sums_to_one_and_is_subordinate() {
        for w in [MIN_WIDTH, DEFAULT_WIDTH, MAX_WIDTH] {
            let p = make_partition(w).unwrap();
            let n = 10_000;
            for i in 0..n {
                let th = -PI + 2.0 * PI * i as f64 / n as f64;
                let (r1, r2) = (p.rho1(th), p.rho2(th));
                assert!((r1 + r2 - 1.0).abs() <= 1e-12);
                assert!(r1 >= 0.0 && r2 >= 0.0);
                // supports strictly inside the chart images
                if th.abs() >= 0.75 * PI - 1e-3 {
                    assert_eq!(r1, 0.0);
                }
                if th.abs() <= 0.25 * PI + 1e-3 {
                    assert_eq!(r2, 0.0);
                }
            }
        }
    }

    #[test]
    fn lifts_agree_with_cutoffs_on_charts() {
        let p = PartitionPair::default();
        let th = 1.3;
        assert_eq!(p.lifted_rho1(th), p.rho1(th));
        assert_eq!(p.lifted_rho1(th + 2.0 * PI), 0.0);
        assert_eq!(p.lifted_rho2(-th), 0.0);
        assert_eq!(p.lifted_rho2(2.0 * PI - th), p.rho2(-th));
    }

    #[test]
    fn profile_range() {
        assert!(make_partition(0.05).is_err());
        assert!(make_partition(1.0).is_err());
        assert!(make_partition(f64::NAN).is_err());
        let a = make_partition(0.4).unwrap();
        let b = make_partition(0.8).unwrap();
        assert_ne!(a.rho1(1.4), b.rho1(1.4));
    }
}
