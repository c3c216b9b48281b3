//! The acceptance suite: eleven numbered criteria, each a list of checks
//! against fixed tolerances.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abel::{self, BranchSpec, PeriodFamily};
use crate::actions::{self, EffectiveWell};
use crate::classify;
use crate::dynamics::{self, System};
use crate::error::Result;
use crate::geometry::{self, Curvature};
use crate::potentials::{
    self, preset, AngularPotential, PowerLaw, PresetName, PresetParams, RadialFamily, RadialPotential, TildeProfile,
};
use crate::rational::Rational;

const SEED: u64 = 0x005e_ed2d;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Below,
    Above,
    Equal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
    pub relation: Relation,
}

impl Check {
    pub fn below(id: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            id: id.into(),
            pass: value < tolerance,
            value,
            tolerance,
            relation: Relation::Below,
        }
    }

    pub fn above(id: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            id: id.into(),
            pass: value > tolerance,
            value,
            tolerance,
            relation: Relation::Above,
        }
    }

    pub fn equal(id: impl Into<String>, value: f64, expected: f64) -> Self {
        Self {
            id: id.into(),
            pass: value == expected,
            value,
            tolerance: expected,
            relation: Relation::Equal,
        }
    }

    pub fn flag(id: impl Into<String>, ok: bool) -> Self {
        Self::equal(id, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub error: Option<String>,
}

impl CriterionReport {
    /// One summary line: `PASS`/`FAIL`, identifier, name and the worst check.
    pub fn summary(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        let detail = match (&self.error, self.worst()) {
            (Some(e), _) => format!("error: {e}"),
            (None, Some(c)) => {
                let op = match c.relation {
                    Relation::Below => "<",
                    Relation::Above => ">",
                    Relation::Equal => "==",
                };
                format!("{} = {:.3e} (need {op} {:.0e})", c.id, c.value, c.tolerance)
            }
            (None, None) => "no checks".into(),
        };
        format!("{status} [{:>2}] {}: {detail}", self.id, self.name)
    }

    /// The first failing check, or the check closest to its tolerance.
    pub fn worst(&self) -> Option<&Check> {
        self.checks
            .iter()
            .find(|c| !c.pass)
            .or_else(|| self.checks.iter().max_by(|a, b| margin(a).total_cmp(&margin(b))))
    }
}

fn margin(c: &Check) -> f64 {
    match c.relation {
        Relation::Below => (c.value.abs() / c.tolerance).log10(),
        Relation::Above => (c.tolerance / c.value.abs()).log10(),
        Relation::Equal => f64::NEG_INFINITY,
    }
}

pub type CriterionFn = fn() -> Result<Vec<Check>>;

/// Identifier, name and runner of every criterion.
pub const CRITERIA: [(u8, &str, CriterionFn); 11] = [
    (1, "isochronicity", isochronicity),
    (2, "isochronicity ODE solutions", ode_solutions),
    (3, "period commensurability", commensurability),
    (4, "action-derivative relations", action_derivatives),
    (5, "closed-form angular actions", closed_form_actions),
    (6, "width transform of closed-form periods", width_transform),
    (7, "Abel round trip and width limits", abel_round_trip),
    (8, "orbit closure", orbit_closure),
    (9, "Bertrand limits", bertrand),
    (10, "curvature continuity", curvature_continuity),
    (11, "geometry identity", geometry_identity),
];

pub fn run(id: u8) -> Option<CriterionReport> {
    let &(id, name, f) = CRITERIA.iter().find(|c| c.0 == id)?;
    let (checks, error) = match f() {
        Ok(checks) => (checks, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    let pass = error.is_none() && !checks.is_empty() && checks.iter().all(|c| c.pass);
    Some(CriterionReport {
        id,
        name: name.into(),
        pass,
        checks,
        error,
    })
}

/// All criteria, in order.
pub fn run_all() -> Vec<CriterionReport> {
    CRITERIA
        .par_iter()
        .map(|c| run(c.0).expect("listed criterion"))
        .collect()
}

// ---------------------------------------------------------------------------
// Helpers

fn curv(k: f64) -> Curvature {
    Curvature::new(k).expect("finite curvature")
}

fn rel(x: f64, y: f64) -> f64 {
    ((x - y) / y).abs()
}

/// Lowest finite value of the effective potential on the edges of its domain.
fn escape_level<P: TildeProfile + ?Sized>(well: &EffectiveWell<'_, P>) -> f64 {
    let (lo, hi) = well.domain();
    [lo, hi]
        .into_iter()
        .filter(|x| x.is_finite())
        .map(|x| potentials::effective_potential(well.profile, well.a, well.k, x))
        .filter(|w| w.is_finite())
        .fold(f64::INFINITY, f64::min)
}

/// `count` energies spread over the lower part of the bound range of the well.
fn bound_energies<P: TildeProfile + ?Sized>(well: &EffectiveWell<'_, P>, count: usize) -> Result<Vec<f64>> {
    let (_, w0) = well.minimum()?;
    let depth = (escape_level(well) - w0).min(1.0 + w0.abs());
    Ok((1..=count)
        .map(|i| w0 + 0.7 * depth * i as f64 / count as f64)
        .collect())
}

/// Preset parameters deep enough to keep the radial minimum inside the `k < 0` chart.
fn deep_params(n: i64) -> PresetParams {
    PresetParams {
        delta: 100.0,
        d: 100.0,
        alpha: 1.0 / 16.0,
        beta: 1.0 / 16.0,
        n: Rational::integer(n),
    }
}

// ---------------------------------------------------------------------------
// Criteria

/// Radial periods of both families on all curvatures are energy independent; a quartic control is not.
pub fn isochronicity() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut checks = Vec::new();
    for k in [-1.0, 0.0, 1.0] {
        for draw in 0..2 {
            let a = rng.gen_range(0.5..2.0);
            let families = [
                RadialFamily::oscillator(rng.gen_range(0.0..1.0), rng.gen_range(20.0..40.0))?,
                RadialFamily::kepler(
                    rng.gen_range(0.0..0.5),
                    rng.gen_range(40.0..80.0),
                    rng.gen_range(0.0..0.04),
                )?,
            ];
            for family in families {
                let v = RadialPotential::new(family, curv(k))?;
                let well = EffectiveWell {
                    profile: &v.family,
                    a,
                    k: curv(k),
                };
                let energies = bound_energies(&well, 5)?;
                let report = actions::isochrony_scan(&v, a, &energies)?;
                checks.push(Check::below(
                    format!("spread.{}.k{k}.draw{draw}", family.kind()),
                    report.relative_spread,
                    1e-6,
                ));
            }
        }
    }
    let quartic = PowerLaw {
        coeff: 1.0,
        exponent: 4,
    };
    let well = EffectiveWell {
        profile: &quartic,
        a: 1.0,
        k: curv(1.0),
    };
    let report = actions::isochrony_scan_profile(&quartic, curv(1.0), 1.0, &bound_energies(&well, 5)?)?;
    checks.push(Check::above("spread.quartic_control", report.relative_spread, 1e-2));
    Ok(checks)
}

/// Both families solve the isochronicity equation; the quartic profile gives −2304 at ρ = 1.
pub fn ode_solutions() -> Result<Vec<Check>> {
    let families = [
        RadialFamily::oscillator(0.7, 1.3)?,
        RadialFamily::oscillator(0.0, 0.5)?,
        RadialFamily::kepler(0.4, 1.2, 0.3)?,
        RadialFamily::kepler(0.0, 2.0, 1.5)?,
    ];
    let mut checks = Vec::new();
    for (i, family) in families.iter().enumerate() {
        let mut worst: f64 = 0.0;
        for j in 0..50 {
            let rho = 0.2 + 2.8 * j as f64 / 49.0;
            worst = worst.max(potentials::isochrony_residual_relative(family, rho)?);
        }
        checks.push(Check::below(format!("residual.{}.{i}", family.kind()), worst, 1e-9));
    }
    let quartic = potentials::isochrony_residual(
        &PowerLaw {
            coeff: 1.0,
            exponent: 4,
        },
        1.0,
    )?;
    checks.push(Check::equal("residual.quartic_at_1", quartic, -2304.0));
    Ok(checks)
}

/// `T_ρ/T_φ = n` for the oscillator- and Coulomb-type presets.
pub fn commensurability() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for name in [PresetName::Ttw, PresetName::Pw] {
        for k in [-1.0, 0.0, 1.0] {
            for n in [1, 2, 3] {
                let s = preset(name, curv(k), &deep_params(n))?;
                let (_, u0) = s.angular.minimum();
                let mut worst: f64 = 0.0;
                for a in [u0 + 0.5, u0 + 1.5] {
                    let t_phi = actions::angular_period(&s.angular, a)?;
                    let well = EffectiveWell {
                        profile: &s.radial.family,
                        a,
                        k: curv(k),
                    };
                    for e in bound_energies(&well, 3)? {
                        let t_rho = actions::radial_period(&s.radial, a, e)?;
                        worst = worst.max((t_rho / t_phi - n as f64).abs());
                    }
                }
                checks.push(Check::below(format!("ratio.{name}.k{k}.n{n}"), worst, 1e-7));
            }
        }
    }
    Ok(checks)
}

/// `dJ_φ/dA = T_φ/2π` and `dJ_r/dA = −T_ρ/2π` by central differences.
pub fn action_derivatives() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (name, k, n) in [
        (PresetName::Ttw, 0.0, 1),
        (PresetName::Pw, 1.0, 2),
        (PresetName::Ttw, -1.0, 2),
    ] {
        let s = preset(name, curv(k), &deep_params(n))?;
        let (_, u0) = s.angular.minimum();
        for (i, a) in [u0 + 0.5, u0 + 1.0, u0 + 2.0].into_iter().enumerate() {
            let h = 1e-4 * a.max(1.0);
            let d_phi =
                (actions::angular_action(&s.angular, a + h)? - actions::angular_action(&s.angular, a - h)?) / (2.0 * h);
            let t_phi = actions::angular_period(&s.angular, a)?;
            checks.push(Check::below(
                format!("dJphi.{name}.k{k}.{i}"),
                rel(d_phi, t_phi / (2.0 * PI)),
                1e-6,
            ));
            let well = EffectiveWell {
                profile: &s.radial.family,
                a,
                k: curv(k),
            };
            let e = bound_energies(&well, 2)?[0];
            let d_r = (actions::radial_action(&s.radial, a + h, e)? - actions::radial_action(&s.radial, a - h, e)?)
                / (2.0 * h);
            let t_rho = actions::radial_period(&s.radial, a, e)?;
            checks.push(Check::below(
                format!("dJr.{name}.k{k}.{i}"),
                rel(d_r, -t_rho / (2.0 * PI)),
                1e-6,
            ));
        }
    }
    Ok(checks)
}

/// Quadrature `J_φ` differs from the closed form by a constant in `A`.
pub fn closed_form_actions() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (name, k, n) in [
        (PresetName::Ttw, 0.0, 1),
        (PresetName::Ttw, 1.0, 2),
        (PresetName::Pw, 0.0, 1),
        (PresetName::Pw, -1.0, 3),
    ] {
        let s = preset(name, curv(k), &deep_params(n))?;
        let (_, u0) = s.angular.minimum();
        let diffs: Vec<f64> = (0..7)
            .map(|i| {
                let a = u0 + 0.25 * 2f64.powi(i);
                Ok(actions::angular_action(&s.angular, a)?
                    - actions::closed_form_angular_action(&s.radial.family, a, s.q)?)
            })
            .collect::<Result<_>>()?;
        let mean = diffs.iter().sum::<f64>() / 7.0;
        let std = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / 7.0).sqrt();
        checks.push(Check::below(format!("std.{name}.k{k}.n{n}"), std, 1e-8));
    }
    Ok(checks)
}

/// The width transform of the closed-form periods reproduces the closed-form widths.
pub fn width_transform() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let cases = [
        (PeriodFamily::Oscillator { gamma: 0.0 }, 4.0, Rational::integer(1)),
        (PeriodFamily::Oscillator { gamma: 0.7 }, 1.3, Rational::integer(2)),
        (PeriodFamily::Kepler { b: 0.0, f: 0.0 }, 0.25, Rational::integer(1)),
        (PeriodFamily::Kepler { b: 0.5, f: 0.16 }, 0.2, Rational::new(3, 2)?),
    ];
    for (i, (family, u0, q)) in cases.into_iter().enumerate() {
        let mut worst: f64 = 0.0;
        for j in 0..30 {
            let u = u0 + 1e-3 * 1e7f64.powf(j as f64 / 29.0);
            let numeric = abel::delta_phi_numeric(|a| family.period(a, q), u0, u)?;
            worst = worst.max((numeric - abel::delta_phi_closed(&family, q, u0, u)?).abs());
        }
        checks.push(Check::below(format!("width.case{i}"), worst, 1e-8));
    }
    Ok(checks)
}

fn pt_sup_error(well: &potentials::TabulatedWell, u: &AngularPotential, n: f64) -> Result<f64> {
    let cell = PI / (2.0 * n);
    let (lo, hi) = well.range();
    let mut worst: f64 = 0.0;
    for i in 0..=2000 {
        let phi = cell * (0.05 + 0.9 * i as f64 / 2000.0);
        if phi < lo || phi > hi {
            return Err(crate::error::domain(format!(
                "reconstruction does not cover phi = {phi}"
            )));
        }
        worst = worst.max((well.eval(phi)? - u.eval(phi)?).abs());
    }
    Ok(worst)
}

/// Pöschl–Teller wells recovered from their own periods; widths tend to the cell.
pub fn abel_round_trip() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for n in [1.0, 2.0] {
        let u = AngularPotential::poschl_teller(1.0, 1.0, n)?;
        let (_, u0) = u.minimum();
        let grid = abel::default_u_grid(u0, abel::GRID_POINTS);
        let g = BranchSpec::Ttw {
            alpha: 1.0,
            beta: 1.0,
            n,
        };
        let rec = abel::reconstruct_from_periods(|a| actions::angular_period(&u, a), u0, &g, &grid)?;
        checks.push(Check::below(
            format!("sup_error.n{n}"),
            pt_sup_error(&rec.well, &u, n)?,
            1e-4,
        ));
    }
    // the width deficit at height U is about sqrt(U0/U)/q, so shallow wells are used
    let top = 1e6;
    for q in [1, 2] {
        let qr = Rational::integer(q);
        for (family, pt_index, limit) in [
            (PeriodFamily::Oscillator { gamma: 0.0 }, q as f64, PI / (2.0 * q as f64)),
            (PeriodFamily::Kepler { b: 0.0, f: 0.0 }, q as f64 / 2.0, PI / q as f64),
        ] {
            let u = AngularPotential::poschl_teller(1.0 / 16.0, 1.0 / 16.0, pt_index)?;
            let (_, u0) = u.minimum();
            let closed = abel::delta_phi_closed(&family, qr, u0, top)?;
            let tp = actions::angular_turning_points(&u, top)?;
            let tag = match family {
                PeriodFamily::Oscillator { .. } => "oscillator",
                PeriodFamily::Kepler { .. } => "kepler",
            };
            checks.push(Check::below(
                format!("width_limit.{tag}.q{q}"),
                (closed - limit).abs(),
                1e-3,
            ));
            checks.push(Check::below(
                format!("cell_width.{tag}.q{q}"),
                (tp.x_max - tp.x_min - limit).abs(),
                1e-3,
            ));
        }
    }
    Ok(checks)
}

/// Superintegrable orbits close; the resonant angle combination is conserved.
pub fn orbit_closure() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let cases = [
        (
            PresetName::Ttw,
            PresetParams {
                delta: 0.5,
                n: Rational::integer(2),
                ..Default::default()
            },
            2.0,
        ),
        (
            PresetName::Pw,
            PresetParams {
                d: 4.0,
                n: Rational::integer(1),
                ..Default::default()
            },
            1.0,
        ),
    ];
    for (name, params, da) in cases {
        let s = preset(name, curv(0.0), &params)?;
        let sys = System::new(&s.radial, &s.angular);
        let (_, u0) = s.angular.minimum();
        let a = u0 + da;
        let well = EffectiveWell {
            profile: &s.radial.family,
            a,
            k: curv(0.0),
        };
        let e = bound_energies(&well, 2)?[0];
        let t_r = actions::radial_time_period(&s.radial, a, e)?;
        let t_max = f64::max(50.0, 6.0 * t_r);
        let traj = sys.integrate(sys.initial_state(a, e)?, t_max, 1e-3)?;
        let closure = dynamics::orbit_closure(&traj, 1e-5);
        checks.push(Check::below(
            format!("closure.{name}"),
            closure.map_or(f64::INFINITY, |c| c.phase_distance),
            1e-5,
        ));
        checks.push(Check::below(
            format!("third_integral.{name}"),
            dynamics::third_integral_check(&traj, s.q.num(), s.q.den())?,
            1e-5,
        ));
        checks.push(Check::below(format!("energy_drift.{name}"), traj.energy_drift, 1e-8));
        checks.push(Check::below(format!("l_drift.{name}"), traj.l_drift, 1e-8));
    }
    Ok(checks)
}

/// Central limits: `q = 1/2` and `q = 1`, with closed orbits on all curvatures.
pub fn bertrand() -> Result<Vec<Check>> {
    let mut checks = vec![
        Check::flag(
            "central_q.oscillator",
            classify::central_q(&RadialFamily::oscillator(0.0, 3.0)?) == Some(Rational::new(1, 2)?),
        ),
        Check::flag(
            "central_q.kepler",
            classify::central_q(&RadialFamily::kepler(0.0, 5.0, 0.0)?) == Some(Rational::integer(1)),
        ),
        Check::flag(
            "central_q.none",
            classify::central_q(&RadialFamily::oscillator(1.0, 1.0)?).is_none(),
        ),
    ];
    // deep wells keep the orbits bound on the hyperbolic plane
    for family in [
        RadialFamily::oscillator(0.0, 16.0)?,
        RadialFamily::kepler(0.0, 64.0, 0.0)?,
    ] {
        let height = match family {
            RadialFamily::Oscillator { .. } => 1.0,
            RadialFamily::Kepler { .. } => 0.05,
        };
        for k in [0.0, 1.0, -1.0] {
            let report = classify::bertrand_report(&family, curv(k), 1.0, height, 1e-6, 1e-3)?;
            let tag = format!("{}.k{k}", family.kind());
            checks.push(Check::flag(
                format!("q_verdict.{tag}"),
                report.verdict.q_estimate == report.central_q,
            ));
            let closure = report.closure.map_or(f64::INFINITY, |c| c.phase_distance);
            checks.push(Check::below(format!("closure.{tag}"), closure, 1e-6));
            let timing = match (report.closure, report.t_expected) {
                (Some(c), Some(t)) => rel(c.t_close, t),
                _ => f64::INFINITY,
            };
            checks.push(Check::below(format!("closure_time.{tag}"), timing, 1e-6));
        }
    }
    Ok(checks)
}

/// `J_r` at `k = ±1e−6` approaches the flat value.
pub fn curvature_continuity() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    // the change is about max(kA/(E − W0), k r²): orbits of unit size with depth well above kA
    for family in [
        RadialFamily::oscillator(0.3, 0.8)?,
        RadialFamily::kepler(0.2, 16.0, 0.01)?,
    ] {
        let flat = RadialPotential::new(family, curv(0.0))?;
        let mut worst: f64 = 0.0;
        for a in [0.5, 0.8, 1.2, 1.7, 2.5] {
            let well = EffectiveWell {
                profile: &family,
                a,
                k: curv(0.0),
            };
            let e = bound_energies(&well, 5)?[1];
            let j0 = actions::radial_action(&flat, a, e)?;
            for k in [1e-6, -1e-6] {
                let j = actions::radial_action(&RadialPotential::new(family, curv(k))?, a, e)?;
                worst = worst.max(rel(j, j0));
            }
        }
        checks.push(Check::below(format!("relative_change.{}", family.kind()), worst, 1e-4));
    }
    Ok(checks)
}

/// `1/s_k(r)² = ρ² + k` at random chart points of each curvature sign.
pub fn geometry_identity() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 11);
    let mut checks = Vec::new();
    for sign in [-1.0, 0.0, 1.0] {
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let k = sign * rng.gen_range(0.01..10.0);
            let c = curv(k);
            let limit = c.chart_limit().min(20.0 / k.abs().sqrt().max(1.0));
            let r = rng.gen_range(1e-6..1.0) * limit;
            let s = geometry::metric_factor(c, r)?;
            let rho = geometry::rho_of_r(c, r)?;
            let lhs = 1.0 / (s * s);
            worst = worst.max((lhs - (rho * rho + k)).abs() / lhs.abs().max(1.0));
        }
        checks.push(Check::below(format!("identity.sign{sign}"), worst, 1e-12));
    }
    Ok(checks)
}
