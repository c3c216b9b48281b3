//! Turning points, action variables and periods of the separated 1D problems.
//!
//! The radial problem is handled in the `ρ` variable, where it is motion in the
//! effective potential `W(ρ) = Ṽ(ρ) + Aρ² + kA`. Two periods are reported:
//!
//! * [`radial_period`]: the period of `ρ` in the rescaled time `dτ = dt / s_k(r)²`,
//!   which satisfies `∂J_r/∂A = −T_ρ/2π` and `T_ρ = q T_φ` for superintegrable systems;
//! * [`radial_time_period`]: the period of `r` in physical time.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{self, Curvature};
use crate::potentials::{AngularPotential, RadialFamily, RadialPotential, TildeProfile};
use crate::quadrature::{integrate_gap, Allowed, Edge, GapPower, Well, ABS_TOL, REL_TOL};
use crate::rational::Rational;
use crate::roots;

/// Height above the well bottom (relative to `max(1, |bottom|)`) below which periods
/// are interpolated between the harmonic limit and the quadrature at this height,
/// where rounding in `level − V` would otherwise dominate.
const NEAR_BOTTOM: f64 = 1e-5;

fn near_bottom_period<F>(level: f64, bottom: f64, harmonic: f64, quadrature: F) -> Result<Option<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    let floor = NEAR_BOTTOM * bottom.abs().max(1.0);
    if !(level >= bottom && level - bottom < floor) {
        return Ok(None);
    }
    let t1 = quadrature(bottom + floor)?;
    Ok(Some(harmonic + (t1 - harmonic) * (level - bottom) / floor))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPair {
    pub x_min: f64,
    pub x_max: f64,
}

impl From<Allowed> for TurningPair {
    fn from(a: Allowed) -> Self {
        TurningPair { x_min: a.a, x_max: a.b }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodReport {
    pub t_quadrature: f64,
    pub t_closed_form: Option<f64>,
    pub a: f64,
    pub e: Option<f64>,
    pub relative_spread: f64,
    /// `(E, T)` for every grid energy, in grid order.
    pub samples: Vec<(f64, f64)>,
}

/// Roots of `level − potential(x)` bounding the well inside `bracket`.
pub fn turning_points<F: Fn(f64) -> f64>(potential: F, level: f64, bracket: (f64, f64)) -> Result<TurningPair> {
    let (x_min, x_max) = roots::turning_points(potential, level, bracket)?;
    Ok(TurningPair { x_min, x_max })
}

// ---------------------------------------------------------------------------
// Angular motion

struct AngularWell<'a>(&'a AngularPotential);

impl Well for AngularWell<'_> {
    fn value(&self, x: f64) -> f64 {
        self.0.value_slope(x).0
    }
    fn slope(&self, x: f64) -> f64 {
        self.0.value_slope(x).1
    }
}

fn check_level(level: f64, what: &str) -> Result<()> {
    if level.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{what} must be finite, got {level}")))
    }
}

/// Allowed angular interval at separation constant `A`.
pub fn angular_interval(u: &AngularPotential, a: f64) -> Result<Allowed> {
    check_level(a, "A")?;
    let ((lo, hi), _) = u.domain();
    if let AngularPotential::Free { .. } = u {
        if !(a >= 0.0) {
            return Err(Error::NoBoundMotion(format!(
                "A = {a} below zero for free angular motion"
            )));
        }
        return Ok(Allowed {
            a: lo,
            b: hi,
            lower: Edge::Wall,
            upper: Edge::Wall,
        });
    }
    let (phi0, _) = u.minimum();
    roots::allowed_interval(&AngularWell(u), a, phi0, (lo, hi), true)
}

/// Angular turning points at separation constant `A`.
pub fn angular_turning_points(u: &AngularPotential, a: f64) -> Result<TurningPair> {
    angular_interval(u, a).map(TurningPair::from)
}

/// `J_φ(A) = (1/π) ∫ sqrt(2(A − U(φ))) dφ`.
pub fn angular_action(u: &AngularPotential, a: f64) -> Result<f64> {
    if let AngularPotential::Free { delta_phi } = u {
        angular_interval(u, a)?;
        return Ok((2.0 * a).sqrt() * delta_phi / PI);
    }
    let seg = angular_interval(u, a)?;
    let i = integrate_gap(&AngularWell(u), a, seg, GapPower::Sqrt, |_| 1.0, ABS_TOL, REL_TOL)?;
    Ok(2f64.sqrt() * i / PI)
}

/// `T_φ(A) = 2 ∫ dφ / sqrt(2(A − U(φ)))`, i.e. `2π ∂J_φ/∂A`.
pub fn angular_period(u: &AngularPotential, a: f64) -> Result<f64> {
    if let AngularPotential::Free { delta_phi } = u {
        angular_interval(u, a)?;
        if a == 0.0 {
            return Err(Error::NoBoundMotion(
                "free angular motion with A = 0 never returns".into(),
            ));
        }
        return Ok(2.0 * delta_phi / (2.0 * a).sqrt());
    }
    let (phi0, u0) = u.minimum();
    let ((lo, hi), _) = u.domain();
    let quadrature = |level: f64| -> Result<f64> {
        let seg = angular_interval(u, level)?;
        let i = integrate_gap(
            &AngularWell(u),
            level,
            seg,
            GapPower::InvSqrt,
            |_| 1.0,
            ABS_TOL,
            REL_TOL,
        )?;
        Ok(2f64.sqrt() * i)
    };
    if phi0 > lo && phi0 < hi && a >= u0 {
        let harmonic = harmonic_period(u.curvature_at_minimum())?;
        if let Some(t) = near_bottom_period(a, u0, harmonic, quadrature)? {
            return Ok(t);
        }
    }
    quadrature(a)
}

fn harmonic_period(curvature: f64) -> Result<f64> {
    if curvature > 0.0 {
        Ok(2.0 * PI / curvature.sqrt())
    } else {
        Err(Error::DegenerateMinimum(curvature))
    }
}

// ---------------------------------------------------------------------------
// Radial motion

/// The effective potential `W(ρ)` of a profile at fixed `A`, as a [`Well`].
pub struct EffectiveWell<'a, P: ?Sized> {
    pub profile: &'a P,
    pub a: f64,
    pub k: Curvature,
}

impl<P: TildeProfile + ?Sized> Well for EffectiveWell<'_, P> {
    fn value(&self, x: f64) -> f64 {
        self.profile.tilde(x) + self.a * x * x + self.k.k() * self.a
    }
    fn slope(&self, x: f64) -> f64 {
        self.profile.tilde_slope(x) + 2.0 * self.a * x
    }
}

impl<P: TildeProfile + ?Sized> EffectiveWell<'_, P> {
    /// `ρ` interval searched for bound motion: the chart range, cut at `ρ = 0`
    /// when the profile is singular there.
    pub fn domain(&self) -> (f64, f64) {
        let (lo, hi) = self.k.rho_range();
        if lo < 0.0 && !self.profile.tilde(0.0).is_finite() {
            (0.0, hi)
        } else {
            (lo, hi)
        }
    }

    /// Location and value of the well bottom.
    pub fn minimum(&self) -> Result<(f64, f64)> {
        let (lo, hi) = self.domain();
        let rho0 = roots::locate_minimum(self, lo, hi, self.profile.scale())?;
        Ok((rho0, self.value(rho0)))
    }

    fn curvature_at(&self, rho: f64) -> f64 {
        let d = self.profile.tilde_derivatives(rho);
        d[2] + 2.0 * self.a
    }

    fn interval(&self, e: f64) -> Result<(Allowed, f64, f64)> {
        check_level(e, "E")?;
        let (rho0, w0) = self.minimum()?;
        let seg = roots::allowed_interval(self, e, rho0, self.domain(), false)?;
        Ok((seg, rho0, w0))
    }

    pub fn turning_points(&self, e: f64) -> Result<TurningPair> {
        Ok(self.interval(e)?.0.into())
    }

    /// Physical radial action `(1/π) ∫ sqrt(2(E − W(ρ))) dρ / (ρ² + k)`.
    pub fn action(&self, e: f64) -> Result<f64> {
        let (seg, _, _) = self.interval(e)?;
        let k = self.k.k();
        let i = integrate_gap(self, e, seg, GapPower::Sqrt, |x| 1.0 / (x * x + k), ABS_TOL, REL_TOL)?;
        Ok(2f64.sqrt() * i / PI)
    }

    /// Period of `ρ` in rescaled time.
    pub fn period(&self, e: f64) -> Result<f64> {
        self.period_weighted(e, |_| 1.0, 1.0)
    }

    /// Period of `r` in physical time.
    pub fn time_period(&self, e: f64) -> Result<f64> {
        let k = self.k.k();
        let (rho0, _) = self.minimum()?;
        self.period_weighted(e, |x| 1.0 / (x * x + k), 1.0 / (rho0 * rho0 + k))
    }

    fn period_weighted<F: Fn(f64) -> f64 + Copy>(&self, e: f64, weight: F, weight_at_bottom: f64) -> Result<f64> {
        let quadrature = |level: f64| -> Result<f64> {
            let (seg, _, _) = self.interval(level)?;
            let i = integrate_gap(self, level, seg, GapPower::InvSqrt, weight, ABS_TOL, REL_TOL)?;
            Ok(2f64.sqrt() * i)
        };
        let (_, rho0, w0) = self.interval(e)?;
        if e >= w0 {
            let harmonic = harmonic_period(self.curvature_at(rho0))? * weight_at_bottom;
            if let Some(t) = near_bottom_period(e, w0, harmonic, quadrature)? {
                return Ok(t);
            }
        }
        quadrature(e)
    }
}

fn family_well(v: &RadialPotential, a: f64) -> Result<EffectiveWell<'_, RadialFamily>> {
    check_level(a, "A")?;
    v.family.check_separation_constant(a)?;
    Ok(EffectiveWell {
        profile: &v.family,
        a,
        k: v.curvature,
    })
}

/// Turning points in `ρ` of the radial motion at `(A, E)`.
pub fn radial_turning_points(v: &RadialPotential, a: f64, e: f64) -> Result<TurningPair> {
    family_well(v, a)?.turning_points(e)
}

/// Bottom `(ρ₀, W(ρ₀))` of the effective potential.
pub fn radial_minimum(v: &RadialPotential, a: f64) -> Result<(f64, f64)> {
    family_well(v, a)?.minimum()
}

/// `J_r(A, E) = (1/π) ∫ sqrt(2(E − V(r) − A/s_k(r)²)) dr`, evaluated in `ρ`.
pub fn radial_action(v: &RadialPotential, a: f64, e: f64) -> Result<f64> {
    family_well(v, a)?.action(e)
}

/// [`radial_action`] computed by quadrature directly in `r`.
pub fn radial_action_r_form(v: &RadialPotential, a: f64, e: f64) -> Result<f64> {
    let well = family_well(v, a)?;
    let (seg, _, _) = well.interval(e)?;
    let k = v.curvature.k();
    struct RWell<'a>(&'a EffectiveWell<'a, RadialFamily>);
    impl Well for RWell<'_> {
        fn value(&self, r: f64) -> f64 {
            self.0.value(geometry::rho_of_r_unchecked(self.0.k.k(), r))
        }
        fn slope(&self, r: f64) -> f64 {
            let rho = geometry::rho_of_r_unchecked(self.0.k.k(), r);
            -self.0.slope(rho) * (rho * rho + self.0.k.k())
        }
    }
    let r_seg = Allowed {
        a: geometry::r_of_rho_unchecked(k, seg.b),
        b: geometry::r_of_rho_unchecked(k, seg.a),
        lower: seg.upper,
        upper: seg.lower,
    };
    let i = integrate_gap(&RWell(&well), e, r_seg, GapPower::Sqrt, |_| 1.0, ABS_TOL, REL_TOL)?;
    Ok(2f64.sqrt() * i / PI)
}

/// `T_ρ(A)`: period of `ρ` in `W` (rescaled time), positive.
pub fn radial_period(v: &RadialPotential, a: f64, e: f64) -> Result<f64> {
    family_well(v, a)?.period(e)
}

/// Period of the radial coordinate in physical time.
pub fn radial_time_period(v: &RadialPotential, a: f64, e: f64) -> Result<f64> {
    family_well(v, a)?.time_period(e)
}

// ---------------------------------------------------------------------------
// Closed forms

fn family_radicals(family: &RadialFamily, a: f64) -> Result<(f64, Option<f64>)> {
    family.validate()?;
    match *family {
        RadialFamily::Oscillator { gamma, .. } => {
            let s = a + gamma;
            if !(s >= 0.0) {
                return Err(domain(format!("A + gamma must be >= 0, got {s}")));
            }
            Ok((s, None))
        }
        RadialFamily::Kepler { b, f, .. } => {
            let (plus, minus) = (a + b + f.sqrt(), a + b - f.sqrt());
            if !(minus >= 0.0) {
                return Err(domain(format!("A + B - sqrt(F) must be >= 0, got {minus}")));
            }
            Ok((plus, Some(minus)))
        }
    }
}

fn check_q(q: Rational) -> Result<f64> {
    if q.is_positive() {
        Ok(q.to_f64())
    } else {
        Err(domain(format!("q must be positive, got {q}")))
    }
}

/// Angular period `T_φ(A)` implied by a radial family and period ratio `q`.
pub fn closed_form_period(family: &RadialFamily, a: f64, q: Rational) -> Result<f64> {
    let qf = check_q(q)?;
    let c = PI / (2f64.sqrt() * qf);
    let t = match family_radicals(family, a)? {
        (s, None) => c / s.sqrt(),
        (plus, Some(minus)) => c * (1.0 / plus.sqrt() + 1.0 / minus.sqrt()),
    };
    if t.is_finite() {
        Ok(t)
    } else {
        Err(domain(format!("closed-form period diverges at A = {a}")))
    }
}

/// Angular action `J_φ(A)` implied by a radial family and period ratio `q`.
pub fn closed_form_angular_action(family: &RadialFamily, a: f64, q: Rational) -> Result<f64> {
    let qf = check_q(q)?;
    let qj = match family_radicals(family, a)? {
        (s, None) => (s / 2.0).sqrt(),
        (plus, Some(minus)) => (plus.sqrt() + minus.sqrt()) / 2f64.sqrt(),
    };
    Ok(qj / qf)
}

/// Radial periods over an energy grid and their relative spread `(max − min)/mean`.
pub fn isochrony_scan(v: &RadialPotential, a: f64, e_grid: &[f64]) -> Result<PeriodReport> {
    family_well(v, a)?;
    let mut report = isochrony_scan_profile(&v.family, v.curvature, a, e_grid)?;
    report.t_closed_form = Some(closed_form_period(&v.family, a, Rational::integer(1))?);
    Ok(report)
}

/// [`isochrony_scan`] for an arbitrary profile (no closed form).
pub fn isochrony_scan_profile<P: TildeProfile + ?Sized>(
    profile: &P,
    k: Curvature,
    a: f64,
    e_grid: &[f64],
) -> Result<PeriodReport> {
    if e_grid.is_empty() {
        return Err(domain("energy grid is empty"));
    }
    let well = EffectiveWell { profile, a, k };
    let periods: Vec<f64> = e_grid.par_iter().map(|&e| well.period(e)).collect::<Result<_>>()?;
    let max = periods.iter().copied().fold(f64::MIN, f64::max);
    let min = periods.iter().copied().fold(f64::MAX, f64::min);
    let mean = periods.iter().sum::<f64>() / periods.len() as f64;
    Ok(PeriodReport {
        t_quadrature: mean,
        t_closed_form: None,
        a,
        e: (e_grid.len() == 1).then_some(e_grid[0]),
        relative_spread: (max - min) / mean,
        samples: e_grid.iter().copied().zip(periods).collect(),
    })
}

/// Energies spread between just above the well bottom and `depth` above it.
pub fn energy_grid(v: &RadialPotential, a: f64, count: usize, depth: f64) -> Result<Vec<f64>> {
    let (_, w0) = radial_minimum(v, a)?;
    Ok((1..=count).map(|i| w0 + depth * i as f64 / count as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{preset, PowerLaw, PresetName, PresetParams};

    fn c(k: f64) -> Curvature {
        Curvature::new(k).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn pt(a: f64, b: f64, n: f64) -> AngularPotential {
        AngularPotential::poschl_teller(a, b, n).unwrap()
    }

    fn pt_action(a: f64, b: f64, n: f64, level: f64) -> f64 {
        (2.0 * level).sqrt() / (2.0 * n) - (a.sqrt() + b.sqrt()) / 2f64.sqrt()
    }

    #[test]
    fn angular_action_examples() {
        assert!((angular_action(&pt(0.5, 0.5, 1.0), 8.0).unwrap() - 1.0).abs() < 1e-10);
        let free = AngularPotential::free(PI).unwrap();
        assert!((angular_action(&free, 2.0).unwrap() - 2.0).abs() < 1e-15);
        let u = pt(0.7, 1.3, 1.5);
        let (_, u0) = u.minimum();
        assert!(angular_action(&u, u0).unwrap().abs() < 1e-12);
        assert!(matches!(angular_action(&u, u0 - 1.0), Err(Error::NoBoundMotion(_))));
    }

    #[test]
    fn angular_action_matches_analytic_oracle() {
        for (a, b, n) in [(0.5, 0.5, 1.0), (1.0, 2.0, 2.0), (0.25, 3.0, 0.5), (1.0, 0.0, 1.0)] {
            let u = pt(a, b, n);
            let u0 = n * n * (f64::sqrt(a) + f64::sqrt(b)).powi(2);
            for level in [u0 * 1.01, u0 * 2.0, u0 * 30.0 + 5.0] {
                let got = angular_action(&u, level).unwrap();
                let want = pt_action(a, b, n, level);
                assert!(
                    (got - want).abs() < 1e-9 * (1.0 + want),
                    "{a} {b} {n} {level}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn angular_period_examples() {
        // Poschl-Teller period pi / (n sqrt(2A)) oracle
        let u = pt(0.5, 0.5, 1.0);
        for level in [2.0 + 1e-3, 2.5, 9.0, 100.0] {
            assert!(rel(angular_period(&u, level).unwrap(), PI / (2.0 * level).sqrt()) < 1e-9);
        }
        let free = AngularPotential::free(PI).unwrap();
        assert!((angular_period(&free, 2.0).unwrap() - PI).abs() < 1e-15);
        let u = pt(0.7, 1.3, 1.5);
        let (_, u0) = u.minimum();
        let harmonic = 2.0 * PI / u.curvature_at_minimum().sqrt();
        assert!(rel(angular_period(&u, u0 + 1e-6).unwrap(), harmonic) < 1e-3);
        assert!(rel(angular_period(&u, u0).unwrap(), harmonic) < 1e-6);
    }

    #[test]
    fn angular_period_is_derivative_of_action() {
        for u in [pt(0.5, 0.5, 1.0), pt(1.0, 2.0, 2.0), pt(1.0, 0.0, 1.0)] {
            let (_, u0) = u.minimum();
            for level in [u0 + 0.5, 2.0 * u0 + 3.0] {
                let h = 1e-4 * level;
                let fd = (angular_action(&u, level + h).unwrap() - angular_action(&u, level - h).unwrap()) / (2.0 * h);
                let t = angular_period(&u, level).unwrap();
                assert!(rel(fd, t / (2.0 * PI)) < 1e-6, "{fd} vs {}", t / (2.0 * PI));
            }
        }
    }

    fn osc(gamma: f64, delta: f64, k: f64) -> RadialPotential {
        RadialPotential::new(RadialFamily::oscillator(gamma, delta).unwrap(), c(k)).unwrap()
    }

    fn kep(b: f64, d: f64, f: f64, k: f64) -> RadialPotential {
        RadialPotential::new(RadialFamily::kepler(b, d, f).unwrap(), c(k)).unwrap()
    }

    #[test]
    fn radial_action_examples() {
        assert!((radial_action(&osc(0.0, 0.5, 0.0), 2.0, 4.0).unwrap() - 1.0).abs() < 1e-10);
        assert!(radial_action(&kep(0.0, 1.0, 0.0, 0.0), 0.5, -0.5).unwrap().abs() < 1e-10);
        let v = kep(0.3, 1.2, 0.4, -0.05);
        let (_, w0) = radial_minimum(&v, 0.5).unwrap();
        assert!(radial_action(&v, 0.5, w0).unwrap().abs() < 1e-12);
        assert!(matches!(radial_action(&v, 0.5, w0 - 0.1), Err(Error::NoBoundMotion(_))));
        // minimum pushed to the chart edge: no bound orbit on k < 0
        assert!(matches!(
            radial_minimum(&kep(0.3, 1.2, 0.4, -0.5), 1.5),
            Err(Error::NoBoundMotion(_))
        ));
    }

    /// Oracle: flat Kepler action `D/sqrt(-2E) - sqrt(2A)` with `D = 1`.
    #[test]
    fn radial_action_flat_kepler_oracle() {
        let v = kep(0.0, 1.0, 0.0, 0.0);
        for (a, e) in [(0.5, -0.3), (1.0, -0.1), (0.2, -1.0)] {
            let want = 1.0 / (-2.0f64 * e).sqrt() - (2.0f64 * a).sqrt();
            assert!((radial_action(&v, a, e).unwrap() - want).abs() < 1e-9);
        }
    }

    #[test]
    fn radial_action_forms_agree() {
        for (v, a) in [
            (osc(0.5, 0.7, 1.0), 1.2),
            (osc(0.0, 0.5, -0.1), 2.0),
            (kep(0.2, 1.0, 0.3, -0.05), 0.5),
            (kep(0.0, 1.0, 0.0, 1.0), 0.8),
            (osc(1.0, 1.0, 0.0), 0.5),
        ] {
            let (_, w0) = radial_minimum(&v, a).unwrap();
            for de in [0.01, 0.05] {
                let e = w0 + de;
                let rho = radial_action(&v, a, e).unwrap();
                let r = radial_action_r_form(&v, a, e).unwrap();
                assert!((rho - r).abs() < 1e-9 * (1.0 + rho), "{rho} vs {r}");
            }
        }
    }

    #[test]
    fn radial_period_examples() {
        for e in [3.0, 4.0, 10.0] {
            assert!((radial_period(&osc(0.0, 0.5, 0.0), 2.0, e).unwrap() - PI / 2.0).abs() < 1e-9);
        }
        for e in [-0.12, -0.1, -0.01] {
            assert!((radial_period(&kep(0.0, 1.0, 0.0, 0.0), 2.0, e).unwrap() - PI).abs() < 1e-9);
        }
        for k in [1.0, -0.1] {
            let v = osc(0.0, 0.5, k);
            let (_, w0) = radial_minimum(&v, 2.0).unwrap();
            assert!((radial_period(&v, 2.0, w0 + 0.05).unwrap() - PI / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn radial_period_is_minus_derivative_of_action() {
        for (v, a) in [(osc(0.5, 0.7, 1.0), 1.2), (kep(0.2, 1.0, 0.3, -0.05), 0.5)] {
            let (_, w0) = radial_minimum(&v, a).unwrap();
            let e = w0 + 0.02;
            let h = 1e-4;
            let fd = (radial_action(&v, a + h, e).unwrap() - radial_action(&v, a - h, e).unwrap()) / (2.0 * h);
            let t = radial_period(&v, a, e).unwrap();
            assert!(rel(-fd, t / (2.0 * PI)) < 1e-6, "{fd} vs {}", t / (2.0 * PI));
        }
    }

    /// Oracle: the flat isotropic oscillator `V = δ r²` has physical radial period `π/ω`, `ω² = 2δ`.
    #[test]
    fn time_period_flat_oscillator() {
        let v = osc(0.0, 0.5, 0.0);
        for (a, e) in [(2.0, 4.0), (0.5, 3.0)] {
            assert!((radial_time_period(&v, a, e).unwrap() - PI).abs() < 1e-9);
        }
    }

    #[test]
    fn closed_form_examples() {
        let o0 = RadialFamily::oscillator(0.0, 0.0).unwrap();
        let k0 = RadialFamily::kepler(0.0, 1.0, 0.0).unwrap();
        let one = Rational::integer(1);
        assert!((closed_form_period(&o0, 2.0, one).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((closed_form_period(&k0, 2.0, one).unwrap() - PI).abs() < 1e-15);
        let o2 = RadialFamily::oscillator(2.0, 1.0).unwrap();
        let want = PI / (4.0 * 2f64.sqrt());
        assert!((closed_form_period(&o2, 2.0, Rational::integer(2)).unwrap() - want).abs() < 1e-15);
        assert!((closed_form_angular_action(&o0, 2.0, one).unwrap() - 1.0).abs() < 1e-15);
        assert!((closed_form_angular_action(&k0, 2.0, one).unwrap() - 2.0).abs() < 1e-15);
        let o1 = RadialFamily::oscillator(1.5, 0.0).unwrap();
        assert_eq!(closed_form_angular_action(&o1, -1.5, one).unwrap(), 0.0);
        assert!(closed_form_period(&o1, -2.0, one).is_err());
        let kf = RadialFamily::kepler(0.0, 1.0, 4.0).unwrap();
        assert!(closed_form_period(&kf, 1.0, one).is_err());
    }

    #[test]
    fn quadrature_period_matches_closed_form_for_families() {
        for (v, a, depth) in [
            (osc(0.7, 0.4, 0.0), 1.3, 2.0),
            (osc(0.7, 0.4, 1.0), 0.3, 2.0),
            (osc(0.0, 3.0, -0.2), 0.5, 0.1),
            (kep(0.4, 1.1, 0.5, 0.0), 1.3, 0.05),
            (kep(0.1, 3.0, 0.04, -0.05), 0.3, 0.05),
            (kep(0.1, 2.0, 0.2, 0.6), 0.5, 2.0),
        ] {
            let grid = energy_grid(&v, a, 4, depth).unwrap();
            let rep = isochrony_scan(&v, a, &grid).unwrap();
            assert!(rep.relative_spread < 1e-8, "{}", rep.relative_spread);
            assert!(rel(rep.t_quadrature, rep.t_closed_form.unwrap()) < 1e-9);
        }
    }

    #[test]
    fn isochrony_scan_controls() {
        let quartic = PowerLaw {
            coeff: 1.0,
            exponent: 4,
        };
        let rep = isochrony_scan_profile(&quartic, c(1.0), 1.0, &[1.5, 3.0, 6.0, 12.0, 24.0]).unwrap();
        assert!(rep.relative_spread > 1e-2);
        let v = osc(0.0, 0.5, 0.0);
        let rep = isochrony_scan(&v, 2.0, &[4.0]).unwrap();
        assert_eq!(rep.relative_spread, 0.0);
        assert_eq!(rep.e, Some(4.0));
    }

    #[test]
    fn period_ratio_of_presets() {
        for name in [PresetName::Ttw, PresetName::Pw] {
            for k in [-0.05, 0.0, 1.0] {
                for n in [1, 2, 3] {
                    // deep radial wells keep the minimum inside the k < 0 chart
                    let p = PresetParams {
                        delta: 100.0,
                        d: 100.0,
                        alpha: 1.0 / 16.0,
                        beta: 1.0 / 16.0,
                        n: Rational::integer(n),
                    };
                    let s = preset(name, c(k), &p).unwrap();
                    let (_, u0) = s.angular.minimum();
                    for a in [u0 + 0.5, 2.0 * u0, 5.0 * u0] {
                        let t_phi = angular_period(&s.angular, a).unwrap();
                        let (_, w0) = radial_minimum(&s.radial, a).unwrap();
                        for de in [0.05, 0.5, 2.0] {
                            let t_rho = match radial_period(&s.radial, a, w0 + de) {
                                Ok(t) => t,
                                // Kepler wells on k <= 0 are shallow; skip unbound energies
                                Err(Error::NoBoundMotion(_)) => continue,
                                Err(e) => panic!("{e}"),
                            };
                            assert!(
                                rel(t_rho / t_phi, n as f64) < 1e-7,
                                "{name} k={k} n={n} A={a}: {}",
                                t_rho / t_phi
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn large_a_width_approaches_cell() {
        for (s, n) in [(0.5, 1.0), (0.25, 1.0), (1.0 / 16.0, 2.0)] {
            let u = pt(s, s, n);
            let tp = angular_turning_points(&u, 1e6).unwrap();
            let cell = PI / (2.0 * n);
            assert!(rel(tp.x_max - tp.x_min, cell) < 1e-3);
        }
    }

    #[test]
    fn actions_monotone() {
        let u = pt(1.0, 2.0, 1.0);
        let (_, u0) = u.minimum();
        let mut prev = 0.0;
        for i in 1..20 {
            let j = angular_action(&u, u0 + i as f64).unwrap();
            assert!(j > prev);
            prev = j;
        }
        let v = kep(0.2, 1.0, 0.3, 0.5);
        let (_, w0) = radial_minimum(&v, 1.0).unwrap();
        let mut prev = -1.0;
        for i in 0..20 {
            let j = radial_action(&v, 1.0, w0 + 0.1 * i as f64).unwrap();
            assert!(j >= 0.0 && j > prev);
            prev = j;
        }
    }

    #[test]
    fn turning_points_wrapper() {
        let tp = turning_points(|x| x * x, 4.0, (-3.0, 3.0)).unwrap();
        assert!((tp.x_min + 2.0).abs() < 1e-12 && (tp.x_max - 2.0).abs() < 1e-12);
        let tp = angular_turning_points(&pt(0.5, 0.5, 1.0), 8.0).unwrap();
        assert!((tp.x_min - PI / 12.0).abs() < 1e-13 && (tp.x_max - 5.0 * PI / 12.0).abs() < 1e-13);
    }
}
