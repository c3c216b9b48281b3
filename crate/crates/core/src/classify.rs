//! Superintegrability verdicts: isochronicity, rational period ratio, family
//! identification and the central (Bertrand) limit.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::actions::{self, EffectiveWell};
use crate::dynamics::{self, Closure, System};
use crate::error::{domain, Error, Result};
use crate::geometry::Curvature;
use crate::potentials::{AngularPotential, RadialFamily, RadialPotential, TildeProfile};
use crate::rational::{self, Rational, MAX_DENOMINATOR, RESIDUAL_TOL};
use crate::roots;

/// Relative spread of radial periods below which a well counts as isochronous.
pub const ISOCHRONY_CAP: f64 = 1e-6;
/// Relative fit residual in `1/T²` below which a family is matched.
pub const FAMILY_FIT_CAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyMatch {
    Oscillator,
    Kepler,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub isochronous: bool,
    /// Largest relative spread of `T_ρ` over energy, across all `A`.
    pub relative_spread: f64,
    pub q_estimate: Option<Rational>,
    /// Largest relative deviation of `T_ρ/T_φ` from the best rational candidate.
    pub q_residual: f64,
    pub mean_ratio: f64,
    pub family_match: FamilyMatch,
    /// Relative fit residual in `1/T²` of the matched (or best) family.
    pub family_residual: f64,
    pub notes: Vec<String>,
}

/// Verdict for a radial family and angular potential.
///
/// `heights` are energies measured from the bottom of the effective well at each `A`.
pub fn superintegrability_report(
    v: &RadialPotential,
    u: &AngularPotential,
    a_samples: &[f64],
    heights: &[f64],
) -> Result<Verdict> {
    for &a in a_samples {
        v.family.check_separation_constant(a)?;
    }
    superintegrability_report_profile(&v.family, v.curvature, u, a_samples, heights)
}

/// [`superintegrability_report`] for an arbitrary radial profile.
pub fn superintegrability_report_profile<P: TildeProfile + ?Sized>(
    profile: &P,
    k: Curvature,
    u: &AngularPotential,
    a_samples: &[f64],
    heights: &[f64],
) -> Result<Verdict> {
    if a_samples.is_empty() || heights.is_empty() {
        return Err(domain("A and E samples must be non-empty"));
    }
    if heights.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
        return Err(domain("energy heights above the well bottom must be positive"));
    }
    let rows: Vec<(f64, Vec<f64>, f64)> = a_samples
        .par_iter()
        .map(|&a| {
            let well = EffectiveWell { profile, a, k };
            let (_, w0) = well.minimum()?;
            let energies: Vec<f64> = heights.iter().map(|h| w0 + h).collect();
            let report = actions::isochrony_scan_profile(profile, k, a, &energies)?;
            let t_phi = actions::angular_period(u, a)?;
            let periods = report.samples.iter().map(|&(_, t)| t).collect();
            Ok((a, periods, t_phi))
        })
        .collect::<Result<_>>()?;

    let mut notes = Vec::new();
    let relative_spread = rows.iter().map(|(_, t, _)| spread(t)).fold(0.0, f64::max);
    let isochronous = relative_spread < ISOCHRONY_CAP;
    if !isochronous {
        notes.push(format!(
            "radial period varies with energy: relative spread {relative_spread:.3e}"
        ));
    }

    let ratios: Vec<f64> = rows
        .iter()
        .flat_map(|(_, ts, tp)| ts.iter().map(move |t| t / tp))
        .collect();
    let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let residual_of = |q: Rational| {
        ratios
            .iter()
            .map(|r| ((r - q.to_f64()) / q.to_f64()).abs())
            .fold(0.0, f64::max)
    };
    let best = rational::convergents(mean_ratio, MAX_DENOMINATOR)
        .into_iter()
        .filter(|q| q.is_positive())
        .map(|q| (q, residual_of(q)))
        .min_by(|x, y| x.1.total_cmp(&y.1));
    let (q_estimate, q_residual) = match best {
        Some((q, res)) if res < RESIDUAL_TOL => (Some(q), res),
        Some((q, res)) => {
            notes.push(format!(
                "T_rho/T_phi = {mean_ratio:.12} is not rational: best candidate {q} misses by {res:.3e}"
            ));
            (None, res)
        }
        None => {
            notes.push(format!("T_rho/T_phi = {mean_ratio} has no positive rational candidate"));
            (None, f64::INFINITY)
        }
    };

    let samples: Vec<(f64, f64)> = rows
        .iter()
        .map(|(a, ts, _)| (*a, ts.iter().sum::<f64>() / ts.len() as f64))
        .collect();
    let (family, family_residual) = fit_family(&samples);
    let family_match = if isochronous && family_residual < FAMILY_FIT_CAP {
        family
    } else {
        FamilyMatch::None
    };
    if isochronous && family_match == FamilyMatch::None {
        notes.push(format!(
            "period law T(A) fits neither family: residual {family_residual:.3e}"
        ));
    }
    Ok(Verdict {
        isochronous,
        relative_spread,
        q_estimate,
        q_residual,
        mean_ratio,
        family_match,
        family_residual,
        notes,
    })
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::MIN, f64::max);
    let min = values.iter().copied().fold(f64::MAX, f64::min);
    (max - min) / (values.iter().sum::<f64>() / values.len() as f64)
}

fn inv_sq_period(offsets: &[f64], a: f64) -> f64 {
    let t: f64 = offsets.iter().map(|c| PI / (2f64.sqrt() * (a + c).sqrt())).sum();
    1.0 / (t * t)
}

/// Relative least-squares residual in `1/T²` of a period law with the given offsets.
fn fit_residual(samples: &[(f64, f64)], offsets: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for &(a, t) in samples {
        if offsets.iter().any(|c| !(a + c > 0.0)) {
            return f64::INFINITY;
        }
        let y = 1.0 / (t * t);
        num += (y - inv_sq_period(offsets, a)).powi(2);
        den += y * y;
    }
    (num / den).sqrt()
}

/// Best family for the radial period law `T(A)` and its relative residual.
///
/// The oscillator law `1/T² = 2(A + γ)/π²` is linear in `A`; the Kepler law
/// has offsets `B ± √F`, fitted by nested golden-section search.
pub fn fit_family(samples: &[(f64, f64)]) -> (FamilyMatch, f64) {
    let a_min = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let a_max = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    let gamma = samples.iter().map(|&(a, t)| PI * PI / (2.0 * t * t) - a).sum::<f64>() / samples.len() as f64;
    let osc = fit_residual(samples, &[gamma]);

    // with F = 0 the Kepler law is 1/T² = (A + B)/(2π²)
    let b0 = samples.iter().map(|&(a, t)| 2.0 * PI * PI / (t * t) - a).sum::<f64>() / samples.len() as f64;
    let span = 10.0 * (a_max.abs() + b0.abs() + 1.0);
    let tol = 1e-13 * span;
    let best_b = |s: f64| {
        let lo = s - a_min + tol;
        let b = roots::golden_section(|b| fit_residual(samples, &[b + s, b - s]), lo, lo + 2.0 * span, tol);
        (b, fit_residual(samples, &[b + s, b - s]))
    };
    let s = roots::golden_section(|s| best_b(s).1, 0.0, span, tol);
    let kep = best_b(s).1.min(fit_residual(samples, &[b0, b0]));

    if osc <= kep {
        (FamilyMatch::Oscillator, osc)
    } else {
        (FamilyMatch::Kepler, kep)
    }
}

/// Period ratio of the central problem `U ≡ 0` on a cell of length `π`, when
/// every bounded orbit closes: `1/2` for the oscillator with `γ = 0`, `1` for
/// the Kepler family with `B = F = 0`.
pub fn central_q(family: &RadialFamily) -> Option<Rational> {
    match *family {
        RadialFamily::Oscillator { gamma: 0.0, .. } => Some(Rational::new(1, 2).expect("nonzero denominator")),
        RadialFamily::Kepler { b, f, .. } if b == 0.0 && f == 0.0 => Some(Rational::integer(1)),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BertrandReport {
    pub central_q: Option<Rational>,
    pub verdict: Verdict,
    /// Closure time predicted from the radial period and `q`.
    pub t_expected: Option<f64>,
    pub closure: Option<Closure>,
    pub energy_drift: f64,
}

/// Central-case report: `central_q`, the quadrature verdict and the closure of one orbit.
pub fn bertrand_report(
    family: &RadialFamily,
    k: Curvature,
    a: f64,
    height: f64,
    tol: f64,
    dt: f64,
) -> Result<BertrandReport> {
    let v = RadialPotential::new(*family, k)?;
    let u = AngularPotential::free(PI)?;
    let a_samples = [a, 1.5 * a, 2.0 * a];
    let heights = [0.25 * height, 0.5 * height, height];
    let verdict = superintegrability_report(&v, &u, &a_samples, &heights)?;
    let q = central_q(family);
    let sys = System::new(&v, &u);
    let (_, w0) = actions::radial_minimum(&v, a)?;
    let e = w0 + height;
    let t_r = actions::radial_time_period(&v, a, e)?;
    let t_expected = q.map(|q| q.den() as f64 * t_r);
    // integrate past the predicted closure, or several radial periods otherwise
    let t_max = t_expected.map_or(20.0 * t_r, |t| 1.1 * t);
    let traj = sys.integrate(sys.initial_state(a, e)?, t_max, dt)?;
    Ok(BertrandReport {
        central_q: q,
        verdict,
        t_expected,
        closure: dynamics::orbit_closure(&traj, tol),
        energy_drift: traj.energy_drift,
    })
}

impl From<Error> for Verdict {
    fn from(err: Error) -> Self {
        Verdict {
            isochronous: false,
            relative_spread: f64::NAN,
            q_estimate: None,
            q_residual: f64::NAN,
            mean_ratio: f64::NAN,
            family_match: FamilyMatch::None,
            family_residual: f64::NAN,
            notes: vec![err.to_string()],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{preset, PowerLaw, PresetName, PresetParams};

    fn c(k: f64) -> Curvature {
        Curvature::new(k).unwrap()
    }

    #[test]
    fn ttw_on_hyperbolic_plane() {
        let p = PresetParams {
            delta: 100.0,
            alpha: 1.0 / 16.0,
            beta: 1.0 / 16.0,
            n: Rational::integer(3),
            ..Default::default()
        };
        let s = preset(PresetName::Ttw, c(-1.0), &p).unwrap();
        let (_, u0) = s.angular.minimum();
        let verdict =
            superintegrability_report(&s.radial, &s.angular, &[u0 + 1.0, u0 + 3.0, u0 + 6.0], &[0.5, 1.0, 2.0])
                .unwrap();
        assert!(verdict.isochronous, "{verdict:?}");
        assert_eq!(verdict.q_estimate, Some(Rational::integer(3)));
        assert_eq!(verdict.family_match, FamilyMatch::Oscillator);
    }

    #[test]
    fn pw_on_flat_plane() {
        let p = PresetParams {
            n: Rational::integer(2),
            ..Default::default()
        };
        let s = preset(PresetName::Pw, c(0.0), &p).unwrap();
        let (_, u0) = s.angular.minimum();
        let heights = [0.01, 0.02, 0.04];
        let verdict =
            superintegrability_report(&s.radial, &s.angular, &[u0 + 0.5, u0 + 1.0, u0 + 2.0], &heights).unwrap();
        assert!(verdict.isochronous, "{verdict:?}");
        assert_eq!(verdict.q_estimate, Some(Rational::integer(2)));
        assert_eq!(verdict.family_match, FamilyMatch::Kepler);
    }

    #[test]
    fn curved_kepler_with_f_is_matched() {
        let v = RadialPotential::new(RadialFamily::kepler(0.3, 2.0, 0.04).unwrap(), c(1.0)).unwrap();
        let u = AngularPotential::poschl_teller(1.0, 1.0, 1.0).unwrap();
        let verdict = superintegrability_report(&v, &u, &[5.0, 6.0, 8.0, 11.0], &[0.1, 0.3]).unwrap();
        assert_eq!(verdict.family_match, FamilyMatch::Kepler, "{verdict:?}");
        assert!(verdict.family_residual < 1e-8);
    }

    #[test]
    fn incommensurate_cell_has_no_rational_q() {
        let v = RadialPotential::new(RadialFamily::oscillator(0.0, 0.5).unwrap(), c(0.0)).unwrap();
        // a free cell of length π√2 stretches T_φ by √2
        let u = AngularPotential::free(PI * 2f64.sqrt()).unwrap();
        let verdict = superintegrability_report(&v, &u, &[1.0, 2.0, 4.0], &[0.5, 1.0, 3.0]).unwrap();
        assert!(verdict.isochronous);
        assert!(verdict.q_estimate.is_none(), "{verdict:?}");
        assert!(verdict.q_residual > RESIDUAL_TOL);
        assert_eq!(verdict.family_match, FamilyMatch::Oscillator);
    }

    #[test]
    fn non_family_profile() {
        let quartic = PowerLaw {
            coeff: 1.0,
            exponent: 4,
        };
        let u = AngularPotential::poschl_teller(1.0, 1.0, 1.0).unwrap();
        let verdict = superintegrability_report_profile(&quartic, c(1.0), &u, &[5.0, 7.0], &[0.5, 2.0]).unwrap();
        assert!(!verdict.isochronous);
        assert_eq!(verdict.family_match, FamilyMatch::None);
    }

    #[test]
    fn verdict_stable_under_energy_rescaling() {
        let p = PresetParams {
            n: Rational::integer(2),
            ..Default::default()
        };
        for name in [PresetName::Ttw, PresetName::Pw] {
            let s = preset(name, c(0.0), &p).unwrap();
            let (_, u0) = s.angular.minimum();
            let a = [u0 + 0.5, u0 + 1.5];
            let small = [0.001, 0.002, 0.003];
            let large: Vec<f64> = small.iter().map(|h| 10.0 * h).collect();
            let x = superintegrability_report(&s.radial, &s.angular, &a, &small).unwrap();
            let y = superintegrability_report(&s.radial, &s.angular, &a, &large).unwrap();
            assert_eq!(
                (x.isochronous, x.q_estimate, x.family_match),
                (y.isochronous, y.q_estimate, y.family_match)
            );
        }
    }

    #[test]
    fn central_q_examples() {
        assert_eq!(
            central_q(&RadialFamily::oscillator(0.0, 3.0).unwrap()),
            Some(Rational::new(1, 2).unwrap())
        );
        assert_eq!(
            central_q(&RadialFamily::kepler(0.0, 5.0, 0.0).unwrap()),
            Some(Rational::integer(1))
        );
        assert_eq!(central_q(&RadialFamily::oscillator(1.0, 1.0).unwrap()), None);
        assert_eq!(central_q(&RadialFamily::kepler(0.5, 1.0, 0.0).unwrap()), None);
    }

    #[test]
    fn bertrand_ellipses_close() {
        for k in [0.0, 1.0, -1.0] {
            // deep wells keep the orbits bound on the hyperbolic plane
            for family in [
                RadialFamily::oscillator(0.0, 16.0).unwrap(),
                RadialFamily::kepler(0.0, 64.0, 0.0).unwrap(),
            ] {
                let height = if family.kind() == crate::potentials::FamilyKind::Kepler {
                    0.05
                } else {
                    1.0
                };
                let report = bertrand_report(&family, c(k), 1.0, height, 1e-6, 1e-3).unwrap();
                let q = report.central_q.unwrap();
                assert_eq!(report.verdict.q_estimate, Some(q), "k={k} {report:?}");
                let closure = report.closure.expect("orbit closes");
                assert!(
                    (closure.t_close / report.t_expected.unwrap() - 1.0).abs() < 1e-6,
                    "k={k} {report:?}"
                );
            }
        }
    }
}
