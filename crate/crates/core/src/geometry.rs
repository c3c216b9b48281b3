//! Metric factor of 2D constant-curvature spaces in geodesic polar coordinates and
//! the `r <-> rho` change of variables that turns the radial problem into motion in
//! an effective potential.
//!
//! With `s_k(r)` the metric factor, `rho = -d/dr ln(...)` is chosen so that
//! `1 / s_k(r)^2 = rho^2 + k` holds for every sign of `k`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Below this value of `|k| r^2` the trigonometric/hyperbolic branches are replaced
/// by their series expansions around `k = 0`.
const SERIES_THRESHOLD: f64 = 1e-8;

/// Gaussian curvature `k` together with its sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Curvature {
    k: f64,
    sigma: i8,
}

impl Curvature {
    pub fn new(k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(domain(format!("curvature must be finite, got {k}")));
        }
        let sigma = if k > 0.0 {
            1
        } else if k < 0.0 {
            -1
        } else {
            0
        };
        Ok(Self { k, sigma })
    }

    pub fn flat() -> Self {
        Self { k: 0.0, sigma: 0 }
    }

    #[inline]
    pub fn k(&self) -> f64 {
        self.k
    }

    #[inline]
    pub fn sigma(&self) -> i8 {
        self.sigma
    }

    /// Upper end of the geodesic polar chart: `pi / sqrt(k)` on the sphere, infinity otherwise.
    pub fn chart_limit(&self) -> f64 {
        if self.k > 0.0 {
            PI / self.k.sqrt()
        } else {
            f64::INFINITY
        }
    }

    /// Open interval of admissible `rho` values.
    pub fn rho_range(&self) -> (f64, f64) {
        match self.sigma {
            1 => (f64::NEG_INFINITY, f64::INFINITY),
            0 => (0.0, f64::INFINITY),
            _ => ((-self.k).sqrt(), f64::INFINITY),
        }
    }

    pub fn check_r(&self, r: f64) -> Result<()> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(domain(format!("radius must be positive and finite, got {r}")));
        }
        if r >= self.chart_limit() {
            return Err(domain(format!(
                "radius {r} outside the chart (0, {}) for k = {}",
                self.chart_limit(),
                self.k
            )));
        }
        Ok(())
    }

    pub fn check_rho(&self, rho: f64) -> Result<()> {
        let (lo, hi) = self.rho_range();
        if !rho.is_finite() || rho <= lo || rho >= hi {
            return Err(domain(format!("rho = {rho} outside ({lo}, {hi}) for k = {}", self.k)));
        }
        Ok(())
    }
}

/// `s_k(r)`: `sin(sqrt(k) r)/sqrt(k)`, `r`, or `sinh(sqrt(-k) r)/sqrt(-k)`.
pub fn metric_factor(curv: Curvature, r: f64) -> Result<f64> {
    curv.check_r(r)?;
    Ok(metric_factor_unchecked(curv.k, r))
}

#[inline]
pub(crate) fn metric_factor_unchecked(k: f64, r: f64) -> f64 {
    let x = k * r * r;
    if x.abs() < SERIES_THRESHOLD {
        r * (1.0 - x / 6.0 + x * x / 120.0)
    } else if k > 0.0 {
        let sk = k.sqrt();
        (sk * r).sin() / sk
    } else {
        let sk = (-k).sqrt();
        (sk * r).sinh() / sk
    }
}

/// `rho(r)`: `sqrt(k) cot(sqrt(k) r)`, `1/r`, or `sqrt(-k) coth(sqrt(-k) r)`.
pub fn rho_of_r(curv: Curvature, r: f64) -> Result<f64> {
    curv.check_r(r)?;
    Ok(rho_of_r_unchecked(curv.k, r))
}

#[inline]
pub(crate) fn rho_of_r_unchecked(k: f64, r: f64) -> f64 {
    let x = k * r * r;
    if x.abs() < SERIES_THRESHOLD {
        // cot(y) = 1/y - y/3 - y^3/45
        (1.0 - x / 3.0 - x * x / 45.0) / r
    } else if k > 0.0 {
        let sk = k.sqrt();
        sk / (sk * r).tan()
    } else {
        let sk = (-k).sqrt();
        sk / (sk * r).tanh()
    }
}

/// Inverse of [`rho_of_r`].
pub fn r_of_rho(curv: Curvature, rho: f64) -> Result<f64> {
    curv.check_rho(rho)?;
    Ok(r_of_rho_unchecked(curv.k, rho))
}

#[inline]
pub(crate) fn r_of_rho_unchecked(k: f64, rho: f64) -> f64 {
    if k == 0.0 {
        return 1.0 / rho;
    }
    if k > 0.0 {
        let sk = k.sqrt();
        // arccot with range (0, pi)
        let t = if rho > 0.0 {
            (sk / rho).atan()
        } else if rho < 0.0 {
            PI + (sk / rho).atan()
        } else {
            0.5 * PI
        };
        t / sk
    } else {
        let sk = (-k).sqrt();
        (sk / rho).atanh() / sk
    }
}

/// `d rho / d r = -(rho^2 + k)`.
#[inline]
pub fn drho_dr(k: f64, rho: f64) -> f64 {
    -(rho * rho + k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(k: f64) -> Curvature {
        Curvature::new(k).unwrap()
    }

    #[test]
    fn sign_of_curvature() {
        assert_eq!(c(0.0).sigma(), 0);
        assert_eq!(c(2.5).sigma(), 1);
        assert_eq!(c(-1e-300).sigma(), -1);
        assert!(Curvature::new(f64::NAN).is_err());
    }

    #[test]
    fn metric_factor_examples() {
        assert_eq!(metric_factor(c(0.0), 2.0).unwrap(), 2.0);
        assert!((metric_factor(c(1.0), PI / 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((metric_factor(c(-1.0), 1.0).unwrap() - 1.0_f64.sinh()).abs() < 1e-15);
        assert!((metric_factor(c(-1.0), 1.0).unwrap() - 1.175201).abs() < 1e-6);
    }

    #[test]
    fn metric_factor_rejects_outside_chart() {
        assert!(metric_factor(c(1.0), PI).is_err());
        assert!(metric_factor(c(1.0), 4.0).is_err());
        assert!(metric_factor(c(0.0), 0.0).is_err());
        assert!(metric_factor(c(0.0), -1.0).is_err());
        assert!(metric_factor(c(-3.0), 1e6).is_ok());
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho_of_r(c(0.0), 0.5).unwrap(), 2.0);
        assert!((rho_of_r(c(1.0), PI / 4.0).unwrap() - 1.0).abs() < 1e-15);
        let coth1 = 1.0 / 1.0_f64.tanh();
        assert!((rho_of_r(c(-1.0), 1.0).unwrap() - coth1).abs() < 1e-15);
        assert!((coth1 - 1.313035).abs() < 1e-6);
    }

    #[test]
    fn r_of_rho_examples() {
        assert_eq!(r_of_rho(c(0.0), 2.0).unwrap(), 0.5);
        assert!((r_of_rho(c(1.0), 0.0).unwrap() - PI / 2.0).abs() < 1e-15);
        let coth1 = 1.0 / 1.0_f64.tanh();
        assert!((r_of_rho(c(-1.0), coth1).unwrap() - 1.0).abs() < 1e-14);
        assert!(r_of_rho(c(-1.0), 0.5).is_err());
        assert!(r_of_rho(c(-1.0), 1.0).is_err());
        assert!(r_of_rho(c(0.0), 0.0).is_err());
        assert!(r_of_rho(c(0.0), -1.0).is_err());
        assert!(r_of_rho(c(4.0), -7.0).is_ok());
    }

    #[test]
    fn continuous_at_zero_curvature() {
        for i in 0..=40 {
            let r = 0.1 + 1.9 * i as f64 / 40.0;
            let s0 = metric_factor(c(0.0), r).unwrap();
            let p0 = rho_of_r(c(0.0), r).unwrap();
            for k in [1e-12, -1e-12] {
                assert!((metric_factor(c(k), r).unwrap() - s0).abs() < 1e-8);
                assert!((rho_of_r(c(k), r).unwrap() - p0).abs() < 1e-8);
                assert!((r_of_rho(c(k), p0).unwrap() - r).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn rho_strictly_decreasing_on_grids() {
        for k in [-2.0, -1e-9, 0.0, 1e-9, 0.7, 3.0] {
            let cv = c(k);
            let hi = cv.chart_limit().min(8.0);
            let mut prev = f64::INFINITY;
            for i in 1..2000 {
                let r = hi * i as f64 / 2000.0;
                let rho = rho_of_r(cv, r).unwrap();
                assert!(rho < prev, "k={k} r={r}");
                prev = rho;
            }
        }
    }

    fn chart_point() -> impl Strategy<Value = (f64, f64)> {
        prop_oneof![
            (0.05f64..4.0, 0.001f64..0.999).prop_map(|(k, u)| (k, u * PI / k.sqrt())),
            (0.0f64..1.0, 0.01f64..5.0).prop_map(|(_, r)| (0.0, r)),
            (-4.0f64..-0.05, 0.01f64..3.0).prop_map(|(k, r)| (k, r)),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn round_trip((k, r) in chart_point()) {
            let cv = c(k);
            let back = r_of_rho(cv, rho_of_r(cv, r).unwrap()).unwrap();
            prop_assert!((back - r).abs() < 1e-12 * (1.0 + r.abs()));
        }

        #[test]
        fn metric_identity((k, r) in chart_point()) {
            let cv = c(k);
            let s = metric_factor(cv, r).unwrap();
            let rho = rho_of_r(cv, r).unwrap();
            let lhs = 1.0 / (s * s);
            let rhs = rho * rho + k;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }
}
