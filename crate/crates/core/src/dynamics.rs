//! Hamiltonian flow of `H = p_r²/2 + (p_φ²/2 + U(φ))/s_k(r)² + V(r)`.
//!
//! The Hamiltonian splits into three pieces whose flows are exact:
//! `p_r²/2` (drift in `r`), `p_φ²/(2 s²)` (drift in `φ`, kick in `p_r`) and
//! `U/s² + V` (kicks in both momenta). Their symmetric composition is a
//! second-order step, raised to sixth order by a nine-stage symmetric product.
//!
//! Alongside the state the integrator carries the separating time
//! `τ = ∫ dt / s²`, in which the radial and angular motions are each strictly
//! periodic with periods `T_ρ(A)` and `T_φ(A)`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::actions;
use crate::error::{domain, Error, Result};
use crate::geometry::{self, Curvature};
use crate::potentials::{AngularPotential, RadialPotential, TildeProfile};
use crate::roots;

/// Half of a symmetric composition of second-order steps, centre last.
/// Kahan and Li's nine-stage sixth-order scheme.
const COMPOSITION: [f64; 5] = [
    0.392_161_444_007_314_1,
    0.332_599_136_789_359_44,
    -0.706_246_172_557_639_4,
    0.082_213_596_293_550_8,
    0.798_543_990_934_83,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub r: f64,
    pub phi: f64,
    pub p_r: f64,
    pub p_phi: f64,
}

impl PhaseState {
    pub fn new(r: f64, phi: f64, p_r: f64, p_phi: f64) -> Self {
        Self { r, phi, p_r, p_phi }
    }

    fn reversed(self) -> Self {
        Self {
            p_r: -self.p_r,
            p_phi: -self.p_phi,
            ..self
        }
    }
}

/// A radial profile on a curved space together with an angular potential.
#[derive(Clone, Copy)]
pub struct System<'a> {
    radial: &'a dyn TildeProfile,
    curvature: Curvature,
    angular: &'a AngularPotential,
}

/// Samples of one integrated orbit, one per step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Separating time `τ` at each sample.
    pub taus: Vec<f64>,
    pub states: Vec<PhaseState>,
    /// Time derivatives of `(r, φ, p_r, p_φ, τ)` at each sample.
    pub rates: Vec<[f64; 5]>,
    pub energies: Vec<f64>,
    pub momenta: Vec<f64>,
    pub energy_drift: f64,
    pub l_drift: f64,
    /// Length of the free angular domain when `U ≡ 0`.
    pub free_angle: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Closure {
    pub t_close: f64,
    pub phase_distance: f64,
}

impl<'a> System<'a> {
    pub fn new(v: &'a RadialPotential, u: &'a AngularPotential) -> Self {
        Self {
            radial: &v.family,
            curvature: v.curvature,
            angular: u,
        }
    }

    pub fn with_profile(profile: &'a dyn TildeProfile, k: Curvature, u: &'a AngularPotential) -> Self {
        Self {
            radial: profile,
            curvature: k,
            angular: u,
        }
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    pub fn check_state(&self, s: &PhaseState) -> Result<()> {
        self.curvature.check_r(s.r)?;
        if !(s.phi.is_finite() && s.p_r.is_finite() && s.p_phi.is_finite()) {
            return Err(domain("phase state must be finite"));
        }
        if !matches!(self.angular, AngularPotential::Free { .. }) {
            self.angular.eval(s.phi)?;
        }
        Ok(())
    }

    fn rho(&self, r: f64) -> f64 {
        geometry::rho_of_r_unchecked(self.curvature.k(), r)
    }

    fn inv_s2(&self, rho: f64) -> f64 {
        rho * rho + self.curvature.k()
    }

    fn generalized(&self, s: &PhaseState) -> f64 {
        0.5 * s.p_phi * s.p_phi + self.angular.value_slope(s.phi).0
    }

    fn energy(&self, s: &PhaseState) -> f64 {
        let rho = self.rho(s.r);
        0.5 * s.p_r * s.p_r + self.generalized(s) * self.inv_s2(rho) + self.radial.tilde(rho)
    }

    /// `H` at a validated state.
    pub fn hamiltonian(&self, s: &PhaseState) -> Result<f64> {
        self.check_state(s)?;
        Ok(self.energy(s))
    }

    /// `L = p_φ²/2 + U(φ)` at a validated angle.
    pub fn generalized_momentum(&self, s: &PhaseState) -> Result<f64> {
        if !matches!(self.angular, AngularPotential::Free { .. }) {
            self.angular.eval(s.phi)?;
        }
        Ok(self.generalized(s))
    }

    /// Time derivatives of `(r, φ, p_r, p_φ, τ)`.
    pub fn rates(&self, s: &PhaseState) -> [f64; 5] {
        let rho = self.rho(s.r);
        let w = self.inv_s2(rho);
        let (u, du) = self.angular.value_slope(s.phi);
        let l = 0.5 * s.p_phi * s.p_phi + u;
        [
            s.p_r,
            s.p_phi * w,
            w * (2.0 * rho * l + self.radial.tilde_slope(rho)),
            -du * w,
            w,
        ]
    }

    fn drift_r(&self, s: &mut PhaseState, h: f64) {
        s.r += s.p_r * h;
    }

    fn drift_phi(&self, s: &mut PhaseState, h: f64) {
        let rho = self.rho(s.r);
        let w = self.inv_s2(rho);
        s.phi += s.p_phi * w * h;
        s.p_r += s.p_phi * s.p_phi * rho * w * h;
    }

    fn kick(&self, s: &mut PhaseState, tau: &mut f64, h: f64) {
        let rho = self.rho(s.r);
        let w = self.inv_s2(rho);
        let (u, du) = self.angular.value_slope(s.phi);
        s.p_phi -= du * w * h;
        s.p_r += w * (2.0 * rho * u + self.radial.tilde_slope(rho)) * h;
        *tau += w * h;
    }

    fn strang(&self, s: &mut PhaseState, tau: &mut f64, h: f64) {
        self.kick(s, tau, 0.5 * h);
        self.drift_phi(s, 0.5 * h);
        self.drift_r(s, h);
        self.drift_phi(s, 0.5 * h);
        self.kick(s, tau, 0.5 * h);
    }

    fn step(&self, s: &mut PhaseState, tau: &mut f64, h: f64) {
        let last = COMPOSITION.len() - 1;
        for i in (0..last).chain((0..=last).rev()) {
            self.strang(s, tau, COMPOSITION[i] * h);
        }
    }

    fn singular(&self, s: &PhaseState, dt: f64) -> Option<&'static str> {
        let reach = 10.0 * dt * s.p_r.abs();
        if !(s.r.is_finite() && s.p_r.is_finite() && s.phi.is_finite() && s.p_phi.is_finite()) {
            return Some("state became non-finite");
        }
        if s.r <= 0.0 || (s.p_r < 0.0 && s.r < reach) {
            return Some("orbit reaches the origin r = 0");
        }
        let wall = self.curvature.chart_limit();
        if wall.is_finite() && (s.r >= wall || (s.p_r > 0.0 && wall - s.r < reach)) {
            return Some("orbit reaches the chart wall r = pi/sqrt(k)");
        }
        None
    }

    /// Fixed-step sixth-order integration, sampling every step.
    pub fn integrate(&self, s0: PhaseState, t_max: f64, dt: f64) -> Result<Trajectory> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(domain(format!("dt must be positive, got {dt}")));
        }
        if !(t_max >= 0.0 && t_max.is_finite()) {
            return Err(domain(format!("t_max must be non-negative, got {t_max}")));
        }
        self.check_state(&s0)?;
        let steps = (t_max / dt).round() as usize;
        let mut traj = Trajectory {
            times: Vec::with_capacity(steps + 1),
            taus: Vec::with_capacity(steps + 1),
            states: Vec::with_capacity(steps + 1),
            rates: Vec::with_capacity(steps + 1),
            energies: Vec::with_capacity(steps + 1),
            momenta: Vec::with_capacity(steps + 1),
            energy_drift: 0.0,
            l_drift: 0.0,
            free_angle: match self.angular {
                AngularPotential::Free { delta_phi } => Some(*delta_phi),
                _ => None,
            },
        };
        let mut s = s0;
        let mut tau = 0.0;
        self.record(&mut traj, 0.0, tau, s);
        for i in 1..=steps {
            self.step(&mut s, &mut tau, dt);
            let t = i as f64 * dt;
            if let Some(reason) = self.singular(&s, dt) {
                return Err(Error::Singularity {
                    t,
                    reason: reason.to_string(),
                });
            }
            self.record(&mut traj, t, tau, s);
        }
        Ok(traj)
    }

    fn record(&self, traj: &mut Trajectory, t: f64, tau: f64, s: PhaseState) {
        let e = self.energy(&s);
        let l = self.generalized(&s);
        if let (Some(e0), Some(l0)) = (traj.energies.first(), traj.momenta.first()) {
            traj.energy_drift = traj.energy_drift.max((e - e0).abs());
            traj.l_drift = traj.l_drift.max((l - l0).abs());
        }
        traj.times.push(t);
        traj.taus.push(tau);
        traj.states.push(s);
        traj.rates.push(self.rates(&s));
        traj.energies.push(e);
        traj.momenta.push(l);
    }

    /// Integrates forward, reverses both momenta and integrates for the same time again.
    pub fn reversed_return(&self, s0: PhaseState, t_max: f64, dt: f64) -> Result<PhaseState> {
        let forward = self.integrate(s0, t_max, dt)?;
        let end = *forward.states.last().expect("at least the initial sample");
        let back = self.integrate(end.reversed(), t_max, dt)?;
        Ok(back.states.last().expect("at least the initial sample").reversed())
    }

    /// Initial state on the orbit with separation constant `A` and energy `E`.
    ///
    /// The angle starts at the bottom of the angular well with `p_φ > 0`; the
    /// radius starts at the minimum of the effective potential with `p_r ≥ 0`.
    pub fn initial_state(&self, a: f64, e: f64) -> Result<PhaseState> {
        let (phi0, u0) = self.angular.minimum();
        if !(a >= u0) {
            return Err(Error::NoBoundMotion(format!("A = {a} below the angular minimum {u0}")));
        }
        let well = actions::EffectiveWell {
            profile: self.radial,
            a,
            k: self.curvature,
        };
        let (rho0, w0) = well.minimum()?;
        if !(e >= w0) {
            return Err(Error::NoBoundMotion(format!(
                "E = {e} below the effective minimum {w0}"
            )));
        }
        let r0 = geometry::r_of_rho(self.curvature, rho0)?;
        Ok(PhaseState {
            r: r0,
            phi: phi0,
            p_r: (2.0 * (e - w0)).sqrt(),
            p_phi: (2.0 * (a - u0)).sqrt(),
        })
    }
}

/// `H` of the system `(V, U)`.
pub fn hamiltonian(s: &PhaseState, v: &RadialPotential, u: &AngularPotential) -> Result<f64> {
    System::new(v, u).hamiltonian(s)
}

/// `L = p_φ²/2 + U(φ)`.
pub fn generalized_momentum(s: &PhaseState, u: &AngularPotential) -> Result<f64> {
    if !matches!(u, AngularPotential::Free { .. }) {
        u.eval(s.phi)?;
    }
    Ok(0.5 * s.p_phi * s.p_phi + u.value_slope(s.phi).0)
}

/// Integrates the system `(V, U)` from `s0`.
pub fn integrate(s0: PhaseState, v: &RadialPotential, u: &AngularPotential, t_max: f64, dt: f64) -> Result<Trajectory> {
    System::new(v, u).integrate(s0, t_max, dt)
}

// ---------------------------------------------------------------------------
// Analysis

fn hermite(y0: f64, y1: f64, d0: f64, d1: f64, h: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * h * d0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * h * d1
}

impl Trajectory {
    fn component(&self, i: usize, c: usize) -> f64 {
        let s = &self.states[i];
        match c {
            0 => s.r,
            1 => s.phi,
            2 => s.p_r,
            3 => s.p_phi,
            _ => self.taus[i],
        }
    }

    /// Component `c` of `(r, φ, p_r, p_φ, τ)` at fraction `s` of step `i`.
    fn interpolate(&self, i: usize, c: usize, s: f64) -> f64 {
        let h = self.times[i + 1] - self.times[i];
        hermite(
            self.component(i, c),
            self.component(i + 1, c),
            self.rates[i][c],
            self.rates[i + 1][c],
            h,
            s,
        )
    }

    /// Separating times at which component `c` changes sign.
    fn crossings(&self, c: usize) -> Vec<f64> {
        let mut out = Vec::new();
        for i in 0..self.states.len().saturating_sub(1) {
            let (a, b) = (self.component(i, c), self.component(i + 1, c));
            if (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0) {
                let s = roots::bisect(|s| self.interpolate(i, c, s) * a.signum(), 0.0, 1.0, true);
                out.push(self.interpolate(i, 4, s));
            }
        }
        out
    }

    /// Phase-space distance to the initial state, with `φ` folded by the angular period of the domain.
    fn distance_at(&self, state: [f64; 4]) -> f64 {
        let s0 = self.states[0];
        let mut dphi = state[1] - s0.phi;
        if let Some(cell) = self.free_angle {
            let fold = 2.0 * cell;
            dphi -= fold * (dphi / fold).round();
        }
        let d = [state[0] - s0.r, dphi, state[2] - s0.p_r, state[3] - s0.p_phi];
        d.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn sample_distance(&self, i: usize) -> f64 {
        let s = self.states[i];
        self.distance_at([s.r, s.phi, s.p_r, s.p_phi])
    }

    fn interpolated_distance(&self, i: usize, s: f64) -> f64 {
        self.distance_at([
            self.interpolate(i, 0, s),
            self.interpolate(i, 1, s),
            self.interpolate(i, 2, s),
            self.interpolate(i, 3, s),
        ])
    }

    /// Rows `t, r, phi, p_r, p_phi, E, L`.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let rows = (0..self.states.len()).map(|i| {
            let s = self.states[i];
            vec![
                self.times[i],
                s.r,
                s.phi,
                s.p_r,
                s.p_phi,
                self.energies[i],
                self.momenta[i],
            ]
        });
        crate::csv::write_table(out, &["t", "r", "phi", "p_r", "p_phi", "E", "L"], rows)
    }
}

const MIN_RADIAL_PERIODS: usize = 5;

fn mean_period(crossings: &[f64]) -> Option<(f64, usize)> {
    // crossings alternate between the two turning points
    let periods = crossings.len().checked_sub(1)? / 2;
    if periods == 0 {
        return None;
    }
    Some(((crossings[2 * periods] - crossings[0]) / periods as f64, periods))
}

/// Radial and angular frequencies `2π/T` in the separating time, from turning-point
/// crossings averaged over all complete periods.
pub fn measure_frequencies(traj: &Trajectory) -> Result<(f64, f64)> {
    let amplitude = traj.states.iter().map(|s| s.p_r.abs()).fold(0.0, f64::max);
    let scale = traj
        .states
        .iter()
        .map(|s| s.p_phi.abs())
        .fold(amplitude, f64::max)
        .max(1.0);
    if amplitude <= 1e-9 * scale {
        return Err(Error::InsufficientSpan("no radial oscillation".into()));
    }
    let radial = traj.crossings(2);
    let (t_r, n_r) =
        mean_period(&radial).ok_or_else(|| Error::InsufficientSpan("no complete radial oscillation".into()))?;
    if n_r < MIN_RADIAL_PERIODS {
        return Err(Error::InsufficientSpan(format!(
            "{n_r} radial oscillations; at least {MIN_RADIAL_PERIODS} are needed"
        )));
    }
    let omega_r = 2.0 * std::f64::consts::PI / t_r;
    let omega_phi = match traj.free_angle {
        Some(cell) => {
            let first = traj.states[0].phi;
            let last = traj.states[traj.states.len() - 1].phi;
            let span = traj.taus[traj.taus.len() - 1] - traj.taus[0];
            // free motion across the domain and back takes 2 Δφ / |φ'|
            std::f64::consts::PI * ((last - first) / span).abs() / cell
        }
        None => {
            let (t_phi, _) = mean_period(&traj.crossings(3))
                .ok_or_else(|| Error::InsufficientSpan("no complete angular oscillation".into()))?;
            2.0 * std::f64::consts::PI / t_phi
        }
    };
    Ok((omega_r, omega_phi))
}

/// `|m ω_r − n ω_φ| / (m ω_r)`: zero when the angle combination `mΨ_r − nΨ_φ` is conserved.
pub fn third_integral_check(traj: &Trajectory, m: i64, n: i64) -> Result<f64> {
    if m <= 0 || n <= 0 {
        return Err(domain(format!("m and n must be positive, got {m}, {n}")));
    }
    let (wr, wphi) = measure_frequencies(traj)?;
    Ok((m as f64 * wr - n as f64 * wphi).abs() / (m as f64 * wr))
}

/// First return of the orbit to within `tol` of its initial phase-space point.
pub fn orbit_closure(traj: &Trajectory, tol: f64) -> Option<Closure> {
    let n = traj.states.len();
    if n < 3 {
        return None;
    }
    // leave the neighbourhood of the start before looking for returns
    let start = (1..n).find(|&i| traj.sample_distance(i) > 2.0 * tol)?;
    let d: Vec<f64> = (0..n).map(|i| traj.sample_distance(i)).collect();
    for i in start.max(1)..n - 1 {
        if !(d[i] <= d[i - 1] && d[i] <= d[i + 1]) {
            continue;
        }
        // the sampled minimum can miss the true one by about one step of motion
        let reach = [i - 1, i, i + 1]
            .iter()
            .map(|&j| {
                let r = traj.rates[j];
                let h = traj.times[i + 1] - traj.times[i];
                h * (r[0] * r[0] + r[1] * r[1] + r[2] * r[2] + r[3] * r[3]).sqrt()
            })
            .fold(0.0, f64::max);
        if d[i] > tol + reach {
            continue;
        }
        let best = [i - 1, i]
            .iter()
            .map(|&j| {
                let s = roots::golden_section(|s| traj.interpolated_distance(j, s), 0.0, 1.0, 1e-12);
                let dist = traj.interpolated_distance(j, s);
                let t = traj.times[j] + s * (traj.times[j + 1] - traj.times[j]);
                (dist, t)
            })
            .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a });
        if best.0 < tol {
            return Some(Closure {
                t_close: best.1,
                phase_distance: best.0,
            });
        }
    }
    None
}
