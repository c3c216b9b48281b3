//! Radial and angular potentials of the separable superintegrable families.
//!
//! A radial potential is described through its auxiliary profile `Ṽ(ρ)`, related to
//! `V(r)` by `V(r) = Ṽ(ρ(r))`. In the `ρ` variable the radial problem becomes 1D motion
//! in the effective potential `W(ρ) = Ṽ(ρ) + A ρ² + k A`, where `A` is the value of the
//! angular integral `p_φ²/2 + U(φ)`. Two profile families make `W` isochronous for
//! every `A`:
//!
//! * oscillator: `Ṽ = γ ρ² + δ / ρ²`
//! * Kepler: `Ṽ = B ρ² − ρ √(D + F ρ²)`

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::Curvature;
use crate::interp::CubicHermite;
use crate::rational::Rational;
use crate::roots;

/// An auxiliary radial profile `Ṽ(ρ)` with derivatives up to fourth order.
pub trait TildeProfile: Send + Sync {
    fn tilde(&self, rho: f64) -> f64;

    /// `[Ṽ, Ṽ', Ṽ'', Ṽ''', Ṽ'''']` at `rho`. Defaults to five-point finite differences.
    fn tilde_derivatives(&self, rho: f64) -> [f64; 5] {
        finite_difference_derivatives(|x| self.tilde(x), rho)
    }

    fn tilde_slope(&self, rho: f64) -> f64 {
        self.tilde_derivatives(rho)[1]
    }

    /// Length scale used when scanning for the effective-potential minimum.
    fn scale(&self) -> f64 {
        1.0
    }
}

/// Five-point central stencils. The step grows with the derivative order so that
/// rounding noise stays below truncation error.
pub fn finite_difference_derivatives<F: Fn(f64) -> f64>(f: F, x: f64) -> [f64; 5] {
    let scale = 1.0 + x.abs();
    let stencil = |h: f64| [f(x - 2.0 * h), f(x - h), f(x), f(x + h), f(x + 2.0 * h)];
    let h1 = 1e-4 * scale;
    let s = stencil(h1);
    let d1 = (s[0] - 8.0 * s[1] + 8.0 * s[3] - s[4]) / (12.0 * h1);
    let d2 = (-s[0] + 16.0 * s[1] - 30.0 * s[2] + 16.0 * s[3] - s[4]) / (12.0 * h1 * h1);
    let h3 = 1e-3 * scale;
    let s = stencil(h3);
    let d3 = (s[4] - 2.0 * s[3] + 2.0 * s[1] - s[0]) / (2.0 * h3 * h3 * h3);
    let h4 = 3e-3 * scale;
    let s = stencil(h4);
    let d4 = (s[4] - 4.0 * s[3] + 6.0 * s[2] - 4.0 * s[1] + s[0]) / (h4 * h4 * h4 * h4);
    [s[2], d1, d2, d3, d4]
}

/// The two isochronous profile families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RadialFamily {
    Oscillator { gamma: f64, delta: f64 },
    Kepler { b: f64, d: f64, f: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Oscillator,
    Kepler,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::Oscillator => "oscillator",
            FamilyKind::Kepler => "kepler",
        })
    }
}

impl RadialFamily {
    pub fn oscillator(gamma: f64, delta: f64) -> Result<Self> {
        let fam = RadialFamily::Oscillator { gamma, delta };
        fam.validate()?;
        Ok(fam)
    }

    pub fn kepler(b: f64, d: f64, f: f64) -> Result<Self> {
        let fam = RadialFamily::Kepler { b, d, f };
        fam.validate()?;
        Ok(fam)
    }

    pub fn validate(&self) -> Result<()> {
        let params: &[(&str, f64)] = match self {
            RadialFamily::Oscillator { gamma, delta } => &[("gamma", *gamma), ("delta", *delta)],
            RadialFamily::Kepler { b, d, f } => &[("B", *b), ("D", *d), ("F", *f)],
        };
        for &(name, v) in params {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Inadmissible(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> FamilyKind {
        match self {
            RadialFamily::Oscillator { .. } => FamilyKind::Oscillator,
            RadialFamily::Kepler { .. } => FamilyKind::Kepler,
        }
    }

    /// Checks that `A` keeps the effective potential confining at large `ρ`.
    pub fn check_separation_constant(&self, a: f64) -> Result<()> {
        let margin = match *self {
            RadialFamily::Oscillator { gamma, .. } => gamma + a,
            RadialFamily::Kepler { b, f, .. } => a + b - f.sqrt(),
        };
        if !(margin >= 0.0) {
            return Err(Error::Inadmissible(format!(
                "separation constant A = {a} violates the {} admissibility bound",
                self.kind()
            )));
        }
        Ok(())
    }

    /// The `k = 0` radial potential `V_0(x) = Ṽ(1/x)`, continued to negative `x`.
    pub fn flat_value(&self, x: f64) -> f64 {
        self.tilde(1.0 / x)
    }
}

impl TildeProfile for RadialFamily {
    fn tilde(&self, rho: f64) -> f64 {
        match *self {
            RadialFamily::Oscillator { gamma, delta } => {
                let mut v = gamma * rho * rho;
                if delta != 0.0 {
                    v += delta / (rho * rho);
                }
                v
            }
            RadialFamily::Kepler { b, d, f } => b * rho * rho - rho * (d + f * rho * rho).sqrt(),
        }
    }

    fn tilde_derivatives(&self, rho: f64) -> [f64; 5] {
        match *self {
            RadialFamily::Oscillator { gamma, delta } => {
                let r2 = rho * rho;
                let inv2 = 1.0 / r2;
                let inv3 = inv2 / rho;
                let inv4 = inv2 * inv2;
                [
                    self.tilde(rho),
                    2.0 * gamma * rho - 2.0 * delta * inv3,
                    2.0 * gamma + 6.0 * delta * inv4,
                    -24.0 * delta * inv4 / rho,
                    120.0 * delta * inv4 * inv2,
                ]
            }
            RadialFamily::Kepler { b, d, f } => {
                // g = ρ S with S = sqrt(D + F ρ²)
                let r2 = rho * rho;
                let q = d + f * r2;
                let s = q.sqrt();
                let s3 = q * s;
                let s5 = s3 * q;
                let s7 = s5 * q;
                let g1 = (d + 2.0 * f * r2) / s;
                let g2 = f * rho * (3.0 * d + 2.0 * f * r2) / s3;
                let g3 = 3.0 * d * d * f / s5;
                let g4 = -15.0 * d * d * f * f * rho / s7;
                [b * r2 - rho * s, 2.0 * b * rho - g1, 2.0 * b - g2, -g3, -g4]
            }
        }
    }

    fn tilde_slope(&self, rho: f64) -> f64 {
        match *self {
            RadialFamily::Oscillator { gamma, delta } => 2.0 * gamma * rho - 2.0 * delta / (rho * rho * rho),
            RadialFamily::Kepler { b, d, f } => {
                let q = d + f * rho * rho;
                2.0 * b * rho - (d + 2.0 * f * rho * rho) / q.sqrt()
            }
        }
    }

    fn scale(&self) -> f64 {
        match *self {
            RadialFamily::Oscillator { gamma, delta } => {
                let s = (delta / (gamma + 1.0)).powf(0.25);
                if s.is_finite() && s > 0.0 {
                    s
                } else {
                    1.0
                }
            }
            RadialFamily::Kepler { d, .. } => {
                if d > 0.0 {
                    d.sqrt().max(1e-3)
                } else {
                    1.0
                }
            }
        }
    }
}

/// Power-law profile `c ρ^p`. Not isochronous for `p ∉ {2, −2}`; used as a control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub coeff: f64,
    pub exponent: i32,
}

impl TildeProfile for PowerLaw {
    fn tilde(&self, rho: f64) -> f64 {
        self.coeff * rho.powi(self.exponent)
    }

    fn tilde_derivatives(&self, rho: f64) -> [f64; 5] {
        let mut out = [0.0; 5];
        let mut c = self.coeff;
        let mut p = self.exponent;
        for slot in out.iter_mut() {
            *slot = if c == 0.0 { 0.0 } else { c * rho.powi(p) };
            c *= p as f64;
            p -= 1;
        }
        out
    }
}

/// A user-supplied profile; derivatives come from finite differences.
pub struct FnProfile<F>(pub F);

impl<F: Fn(f64) -> f64 + Send + Sync> TildeProfile for FnProfile<F> {
    fn tilde(&self, rho: f64) -> f64 {
        (self.0)(rho)
    }
}

/// A radial family placed on a space of given curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialPotential {
    pub family: RadialFamily,
    pub curvature: Curvature,
}

impl RadialPotential {
    pub fn new(family: RadialFamily, curvature: Curvature) -> Result<Self> {
        family.validate()?;
        Ok(Self { family, curvature })
    }

    /// `V_σ(r)` evaluated with the curvature-specific closed form.
    pub fn eval_radial(&self, r: f64) -> Result<f64> {
        self.curvature.check_r(r)?;
        let k = self.curvature.k();
        let v = match (self.family, self.curvature.sigma()) {
            (RadialFamily::Oscillator { gamma, delta }, 0) => gamma / (r * r) + delta * r * r,
            (RadialFamily::Kepler { b, d, f }, 0) => {
                let rad = d * r * r + f;
                b / (r * r) - checked_sqrt(rad)? / (r * r)
            }
            (family, _) => {
                let kk = k.abs();
                let sk = kk.sqrt();
                let t = if k > 0.0 { (sk * r).tan() } else { (sk * r).tanh() };
                let t2 = t * t;
                match family {
                    RadialFamily::Oscillator { gamma, delta } => gamma * kk / t2 + delta * t2 / kk,
                    RadialFamily::Kepler { b, d, f } => {
                        // past the equator of the sphere tan < 0 and the profile continues analytically
                        let root = checked_sqrt(d * t2 / kk + f)?;
                        b * kk / t2 - t.signum() * kk / t2 * root
                    }
                }
            }
        };
        if !v.is_finite() {
            return Err(Error::Math(format!("radial potential not finite at r = {r}")));
        }
        Ok(v)
    }

    /// `V(r)` as the flat potential composed with the `tan`/`tanh` chart map.
    pub fn eval_radial_via_flat(&self, r: f64) -> Result<f64> {
        self.curvature.check_r(r)?;
        let k = self.curvature.k();
        let x = match self.curvature.sigma() {
            0 => r,
            1 => (k.sqrt() * r).tan() / k.sqrt(),
            _ => ((-k).sqrt() * r).tanh() / (-k).sqrt(),
        };
        Ok(self.family.flat_value(x))
    }

    pub fn eval_tilde(&self, rho: f64) -> Result<f64> {
        eval_tilde(&self.family, rho)
    }
}

fn checked_sqrt(x: f64) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        Err(Error::Math(format!("negative radicand {x}")))
    } else {
        Ok(x.sqrt())
    }
}

/// `Ṽ(ρ)` with domain checks.
pub fn eval_tilde(family: &RadialFamily, rho: f64) -> Result<f64> {
    match *family {
        RadialFamily::Oscillator { delta, .. } if rho == 0.0 && delta != 0.0 => {
            Err(Error::Math("division by zero: delta / rho^2 at rho = 0".into()))
        }
        RadialFamily::Kepler { d, f, .. } => {
            checked_sqrt(d + f * rho * rho)?;
            Ok(family.tilde(rho))
        }
        _ => Ok(family.tilde(rho)),
    }
}

/// `W(ρ) = Ṽ(ρ) + A ρ² + k A`.
pub fn effective_potential<P: TildeProfile + ?Sized>(profile: &P, a: f64, k: Curvature, rho: f64) -> f64 {
    profile.tilde(rho) + a * rho * rho + k.k() * a
}

/// [`effective_potential`] for a family, with domain checks on `ρ` and `A`.
pub fn effective_potential_checked(family: &RadialFamily, a: f64, k: Curvature, rho: f64) -> Result<f64> {
    k.check_rho(rho)?;
    family.check_separation_constant(a)?;
    Ok(eval_tilde(family, rho)? + a * rho * rho + k.k() * a)
}

// ---------------------------------------------------------------------------
// Angular potentials

/// Tabulated single-well angular potential, interpolated by cubic Hermite segments.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedWell {
    curve: CubicHermite,
    min_index: usize,
}

impl TabulatedWell {
    /// Builds from `(φ, U)` samples using monotone slopes.
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
        let min_index = check_single_well(&ys)?;
        Ok(Self {
            curve: CubicHermite::monotone(xs, ys)?,
            min_index,
        })
    }

    /// Builds from samples with known slopes `dU/dφ`.
    pub fn with_slopes(points: &[(f64, f64)], slopes: &[f64]) -> Result<Self> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
        let min_index = check_single_well(&ys)?;
        Ok(Self {
            curve: CubicHermite::with_slopes(xs, ys, slopes.to_vec())?,
            min_index,
        })
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.curve.xs().iter().copied().zip(self.curve.ys().iter().copied())
    }

    pub fn range(&self) -> (f64, f64) {
        self.curve.range()
    }

    pub fn eval(&self, phi: f64) -> Result<f64> {
        self.curve.eval(phi)
    }

    pub(crate) fn value_slope(&self, phi: f64) -> (f64, f64) {
        self.curve.eval_unchecked(phi)
    }

    fn minimum(&self) -> (f64, f64) {
        let xs = self.curve.xs();
        let i = self.min_index;
        let phi = roots::golden_section(|x| self.value_slope(x).0, xs[i - 1], xs[i + 1], 1e-14);
        let phi = refine_on_slope(|x| self.value_slope(x).1, phi, 1e-6 * (xs[i + 1] - xs[i - 1]));
        let u = self.value_slope(phi).0;
        if u <= self.curve.ys()[i] {
            (phi, u)
        } else {
            (xs[i], self.curve.ys()[i])
        }
    }
}

fn check_single_well(ys: &[f64]) -> Result<usize> {
    if ys.len() < 3 {
        return Err(domain("tabulated well needs at least three samples"));
    }
    let (imin, _) = ys
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    if imin == 0 || imin + 1 == ys.len() {
        return Err(domain("tabulated potential must have an interior minimum"));
    }
    let descending = ys[..=imin].windows(2).all(|w| w[1] <= w[0]);
    let ascending = ys[imin..].windows(2).all(|w| w[1] >= w[0]);
    if !(descending && ascending) {
        return Err(domain("tabulated potential must be a single well"));
    }
    Ok(imin)
}

/// Angular potential `U(φ)`.
#[derive(Debug, Clone, PartialEq)]
pub enum AngularPotential {
    /// `n² α / cos²(nφ) + n² β / sin²(nφ)` on the cell `(0, π/(2n))`.
    PoschlTeller {
        alpha: f64,
        beta: f64,
        n: f64,
    },
    Tabulated(TabulatedWell),
    /// `U ≡ 0` on an angular domain of length `delta_phi` (central potentials).
    Free {
        delta_phi: f64,
    },
}

impl AngularPotential {
    pub fn poschl_teller(alpha: f64, beta: f64, n: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && alpha >= 0.0 && beta >= 0.0) {
            return Err(Error::Inadmissible(format!(
                "Poschl-Teller strengths must be >= 0, got alpha = {alpha}, beta = {beta}"
            )));
        }
        if alpha == 0.0 && beta == 0.0 {
            return Err(Error::Inadmissible(
                "Poschl-Teller well needs alpha > 0 or beta > 0".into(),
            ));
        }
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Inadmissible(format!("n must be positive, got {n}")));
        }
        Ok(AngularPotential::PoschlTeller { alpha, beta, n })
    }

    pub fn free(delta_phi: f64) -> Result<Self> {
        if !(delta_phi.is_finite() && delta_phi > 0.0) {
            return Err(Error::Inadmissible(format!(
                "delta_phi must be positive, got {delta_phi}"
            )));
        }
        Ok(AngularPotential::Free { delta_phi })
    }

    /// Open angular domain and whether each end is a reflecting wall with finite `U`.
    pub fn domain(&self) -> ((f64, f64), (bool, bool)) {
        match self {
            AngularPotential::PoschlTeller { alpha, beta, n } => ((0.0, PI / (2.0 * n)), (*beta == 0.0, *alpha == 0.0)),
            AngularPotential::Tabulated(t) => (t.range(), (false, false)),
            AngularPotential::Free { delta_phi } => ((0.0, *delta_phi), (true, true)),
        }
    }

    /// `U(φ)` (eval_angular).
    pub fn eval(&self, phi: f64) -> Result<f64> {
        match self {
            AngularPotential::PoschlTeller { alpha, beta, n } => {
                let ((lo, hi), (wall_lo, wall_hi)) = self.domain();
                let inside_lo = phi > lo || (wall_lo && phi == lo);
                let inside_hi = phi < hi || (wall_hi && phi == hi);
                if !(inside_lo && inside_hi) {
                    return Err(domain(format!("phi = {phi} outside the Poschl-Teller cell (0, {hi})")));
                }
                Ok(pt_value(*alpha, *beta, *n, phi))
            }
            AngularPotential::Tabulated(t) => t.eval(phi),
            AngularPotential::Free { .. } => Ok(0.0),
        }
    }

    pub(crate) fn value_slope(&self, phi: f64) -> (f64, f64) {
        match self {
            AngularPotential::PoschlTeller { alpha, beta, n } => {
                (pt_value(*alpha, *beta, *n, phi), pt_slope(*alpha, *beta, *n, phi))
            }
            AngularPotential::Tabulated(t) => t.value_slope(phi),
            AngularPotential::Free { .. } => (0.0, 0.0),
        }
    }

    /// Location and value of the well bottom.
    ///
    /// Poschl–Teller wells are minimised by golden-section search rather than the
    /// closed form, so presets and reconstructions share one code path.
    pub fn minimum(&self) -> (f64, f64) {
        match self {
            AngularPotential::PoschlTeller { alpha, beta, n } => {
                let hi = PI / (2.0 * n);
                if *beta == 0.0 {
                    return (0.0, n * n * alpha);
                }
                if *alpha == 0.0 {
                    return (hi, n * n * beta);
                }
                let phi = roots::golden_section(|p| pt_value(*alpha, *beta, *n, p), 0.0, hi, 1e-12);
                let phi = refine_on_slope(|p| pt_slope(*alpha, *beta, *n, p), phi, 1e-6 * hi);
                (phi, pt_value(*alpha, *beta, *n, phi))
            }
            AngularPotential::Tabulated(t) => t.minimum(),
            AngularPotential::Free { delta_phi } => (0.5 * delta_phi, 0.0),
        }
    }

    /// Second derivative of `U` at its minimum (numerical).
    pub fn curvature_at_minimum(&self) -> f64 {
        let (phi, _) = self.minimum();
        let s = |x: f64| self.value_slope(x).1;
        let central = |h: f64| (s(phi + h) - s(phi - h)) / (2.0 * h);
        let h = 1e-3 * (1.0 + phi.abs());
        // Richardson extrapolation removes the O(h²) term
        (4.0 * central(0.5 * h) - central(h)) / 3.0
    }
}

// Golden section resolves a minimum only to ~sqrt(eps); the slope sign change
// pins it to machine precision.
fn refine_on_slope<F: Fn(f64) -> f64>(slope: F, x: f64, width: f64) -> f64 {
    let (lo, hi) = (x - width, x + width);
    if slope(lo) < 0.0 && slope(hi) > 0.0 {
        roots::bisect(&slope, lo, hi, true)
    } else {
        x
    }
}

fn pt_value(alpha: f64, beta: f64, n: f64, phi: f64) -> f64 {
    let (s, c) = (n * phi).sin_cos();
    let mut u = 0.0;
    if alpha != 0.0 {
        u += n * n * alpha / (c * c);
    }
    if beta != 0.0 {
        u += n * n * beta / (s * s);
    }
    u
}

fn pt_slope(alpha: f64, beta: f64, n: f64, phi: f64) -> f64 {
    let (s, c) = (n * phi).sin_cos();
    let n3 = 2.0 * n * n * n;
    let mut d = 0.0;
    if alpha != 0.0 {
        d += n3 * alpha * s / (c * c * c);
    }
    if beta != 0.0 {
        d -= n3 * beta * c / (s * s * s);
    }
    d
}

// ---------------------------------------------------------------------------
// Isochronicity analysis

/// Fourth-order expansion of the effective potential about its minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorExpansion {
    pub rho0: f64,
    /// The separation constant that puts the minimum at `rho0`.
    pub a_implied: f64,
    pub e0: f64,
    pub omega0_sq: f64,
    /// Cubic coefficient: `W'''/2`.
    pub alpha3: f64,
    /// Quartic coefficient: `W''''/6`.
    pub beta4: f64,
}

pub fn taylor_coefficients<P: TildeProfile + ?Sized>(profile: &P, k: Curvature, rho0: f64) -> Result<TaylorExpansion> {
    let [v0, v1, v2, v3, v4] = profile.tilde_derivatives(rho0);
    let a_implied = -v1 / (2.0 * rho0);
    if !a_implied.is_finite() {
        return Err(Error::Math(format!(
            "implied separation constant not finite at rho0 = {rho0}"
        )));
    }
    let omega0_sq = v2 - v1 / rho0;
    if !(omega0_sq > 0.0) {
        return Err(Error::DegenerateMinimum(omega0_sq));
    }
    Ok(TaylorExpansion {
        rho0,
        a_implied,
        e0: v0 + a_implied * rho0 * rho0 + k.k() * a_implied,
        omega0_sq,
        alpha3: 0.5 * v3,
        beta4: v4 / 6.0,
    })
}

/// Small-amplitude frequency including the leading anharmonic correction.
pub fn anharmonic_frequency(t: &TaylorExpansion, amplitude: f64) -> f64 {
    let w0 = t.omega0_sq.sqrt();
    let corr = 0.75 * t.beta4 - (5.0 / 6.0) * t.alpha3 * t.alpha3 / t.omega0_sq;
    w0 + corr * amplitude * amplitude / (2.0 * w0)
}

/// `3 Ṽ'''' (Ṽ'' − Ṽ'/ρ) − 5 Ṽ'''²`; vanishes identically for isochronous profiles.
pub fn isochrony_residual<P: TildeProfile + ?Sized>(profile: &P, rho: f64) -> Result<f64> {
    Ok(isochrony_terms(profile, rho)?.0)
}

/// Residual divided by the magnitude of its two terms (zero when both vanish).
pub fn isochrony_residual_relative<P: TildeProfile + ?Sized>(profile: &P, rho: f64) -> Result<f64> {
    let (res, scale) = isochrony_terms(profile, rho)?;
    Ok(if scale == 0.0 { 0.0 } else { res.abs() / scale })
}

fn isochrony_terms<P: TildeProfile + ?Sized>(profile: &P, rho: f64) -> Result<(f64, f64)> {
    let [_, v1, v2, v3, v4] = profile.tilde_derivatives(rho);
    let denom = v2 - v1 / rho;
    if denom == 0.0 || denom.abs() <= 1e-14 * (v2.abs() + (v1 / rho).abs()) || !denom.is_finite() {
        return Err(Error::SingularDenominator(rho));
    }
    let first = 3.0 * v4 * denom;
    let second = 5.0 * v3 * v3;
    Ok((first - second, first.abs() + second.abs()))
}

// ---------------------------------------------------------------------------
// Presets

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetName {
    /// Oscillator family with `γ = 0` and a Poschl–Teller angular well.
    Ttw,
    /// Kepler family with `B = F = 0` and a Poschl–Teller angular well.
    Pw,
    /// Central oscillator `γ = 0` on any curvature.
    Higgs,
    /// Central Kepler `B = F = 0` on any curvature.
    SchroedingerCoulomb,
    FlatOscillator,
    FlatKepler,
}

impl FromStr for PresetName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ttw" => PresetName::Ttw,
            "pw" => PresetName::Pw,
            "higgs" => PresetName::Higgs,
            "schroedinger_coulomb" => PresetName::SchroedingerCoulomb,
            "flat_oscillator" => PresetName::FlatOscillator,
            "flat_kepler" => PresetName::FlatKepler,
            other => return Err(Error::UnknownPreset(other.to_string())),
        })
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PresetName::Ttw => "ttw",
            PresetName::Pw => "pw",
            PresetName::Higgs => "higgs",
            PresetName::SchroedingerCoulomb => "schroedinger_coulomb",
            PresetName::FlatOscillator => "flat_oscillator",
            PresetName::FlatKepler => "flat_kepler",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PresetParams {
    pub delta: f64,
    pub d: f64,
    pub alpha: f64,
    pub beta: f64,
    pub n: Rational,
}

impl Default for PresetParams {
    fn default() -> Self {
        Self {
            delta: 0.5,
            d: 1.0,
            alpha: 1.0,
            beta: 1.0,
            n: Rational::integer(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: PresetName,
    pub radial: RadialPotential,
    pub angular: AngularPotential,
    /// Period ratio `T_ρ / T_φ`.
    pub q: Rational,
}

/// Builds one of the named superintegrable models.
///
/// For `pw` the index `n` is the period ratio: the angular well is the
/// Poschl–Teller potential with index `n/2`, whose period is `1/(2·(n/2))` of the
/// Kepler radial period scale, so that `T_ρ / T_φ = n`.
pub fn preset(name: PresetName, k: Curvature, params: &PresetParams) -> Result<Preset> {
    if !params.n.is_positive() {
        return Err(Error::Inadmissible(format!("n must be positive, got {}", params.n)));
    }
    let central = AngularPotential::free(PI)?;
    let (family, angular, q) = match name {
        PresetName::Ttw => (
            RadialFamily::oscillator(0.0, params.delta)?,
            AngularPotential::poschl_teller(params.alpha, params.beta, params.n.to_f64())?,
            params.n,
        ),
        PresetName::Pw => (
            RadialFamily::kepler(0.0, params.d, 0.0)?,
            AngularPotential::poschl_teller(params.alpha, params.beta, 0.5 * params.n.to_f64())?,
            params.n,
        ),
        PresetName::Higgs => (
            RadialFamily::oscillator(0.0, params.delta)?,
            central,
            Rational::new(1, 2)?,
        ),
        PresetName::SchroedingerCoulomb => (RadialFamily::kepler(0.0, params.d, 0.0)?, central, Rational::integer(1)),
        PresetName::FlatOscillator | PresetName::FlatKepler => {
            if k.k() != 0.0 {
                return Err(domain(format!("{name} is defined for k = 0 only")));
            }
            if name == PresetName::FlatOscillator {
                (
                    RadialFamily::oscillator(0.0, params.delta)?,
                    central,
                    Rational::new(1, 2)?,
                )
            } else {
                (RadialFamily::kepler(0.0, params.d, 0.0)?, central, Rational::integer(1))
            }
        }
    };
    Ok(Preset {
        name,
        radial: RadialPotential::new(family, k)?,
        angular,
        q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry;
    use proptest::prelude::*;

    fn c(k: f64) -> Curvature {
        Curvature::new(k).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn eval_radial_examples() {
        let v = RadialPotential::new(RadialFamily::oscillator(0.0, 1.0).unwrap(), c(0.0)).unwrap();
        assert_eq!(v.eval_radial(2.0).unwrap(), 4.0);
        let v = RadialPotential::new(RadialFamily::kepler(0.0, 1.0, 0.0).unwrap(), c(0.0)).unwrap();
        assert_eq!(v.eval_radial(2.0).unwrap(), -0.5);
        let v = RadialPotential::new(RadialFamily::oscillator(1.0, 1.0).unwrap(), c(1.0)).unwrap();
        assert!((v.eval_radial(PI / 4.0).unwrap() - 2.0).abs() < 1e-14);
        assert!(v.eval_radial(PI).is_err());
    }

    #[test]
    fn eval_tilde_examples() {
        let osc = RadialFamily::oscillator(1.0, 1.0).unwrap();
        assert_eq!(eval_tilde(&osc, 1.0).unwrap(), 2.0);
        let kep = RadialFamily::kepler(1.0, 4.0, 0.0).unwrap();
        assert_eq!(eval_tilde(&kep, 2.0).unwrap(), 0.0);
        let osc = RadialFamily::oscillator(0.0, 2.0).unwrap();
        assert_eq!(eval_tilde(&osc, 2.0).unwrap(), 0.5);
        assert!(matches!(eval_tilde(&osc, 0.0), Err(Error::Math(_))));
    }

    #[test]
    fn rejects_negative_parameters() {
        assert!(RadialFamily::oscillator(-1.0, 1.0).is_err());
        assert!(RadialFamily::kepler(0.0, 1.0, -0.1).is_err());
        assert!(RadialFamily::kepler(0.0, f64::NAN, 0.0).is_err());
        let kep = RadialFamily::kepler(0.0, 1.0, 4.0).unwrap();
        assert!(kep.check_separation_constant(1.0).is_err());
        assert!(kep.check_separation_constant(2.0).is_ok());
    }

    #[test]
    fn effective_potential_examples() {
        let osc = RadialFamily::oscillator(1.0, 0.0).unwrap();
        assert_eq!(effective_potential(&osc, 1.0, c(0.0), 2.0), 8.0);
        let zero = RadialFamily::oscillator(0.0, 0.0).unwrap();
        assert_eq!(effective_potential(&zero, 2.0, c(1.0), 1.0), 4.0);
        assert_eq!(effective_potential(&osc, 3.0, c(-1.0), 2.0), 13.0);
    }

    /// Oracle: `A / s_k(r)^2 + V(r)` at `r = r(ρ)` against the `ρ`-space effective potential.
    #[test]
    fn effective_potential_matches_r_space() {
        for (fam, a, k, rho) in [
            (RadialFamily::oscillator(0.0, 0.0).unwrap(), 2.0, 1.0, 1.0),
            (RadialFamily::oscillator(1.0, 0.0).unwrap(), 3.0, -1.0, 2.0),
            (RadialFamily::kepler(0.3, 1.2, 0.5).unwrap(), 1.7, -0.4, 1.1),
            (RadialFamily::oscillator(0.2, 0.7).unwrap(), 0.9, 2.0, -0.3),
        ] {
            let cv = c(k);
            let r = geometry::r_of_rho(cv, rho).unwrap();
            let s = geometry::metric_factor(cv, r).unwrap();
            let v = RadialPotential::new(fam, cv).unwrap();
            let direct = a / (s * s) + v.eval_radial(r).unwrap();
            let w = effective_potential(&fam, a, cv, rho);
            assert!(rel(direct, w) < 1e-12, "{direct} vs {w}");
        }
    }

    #[test]
    fn angular_examples() {
        let pt = AngularPotential::poschl_teller(0.5, 0.5, 1.0).unwrap();
        assert!((pt.eval(PI / 4.0).unwrap() - 2.0).abs() < 1e-14);
        let free = AngularPotential::free(PI).unwrap();
        assert_eq!(free.eval(1.0).unwrap(), 0.0);
        let pt = AngularPotential::poschl_teller(1.0, 0.0, 2.0).unwrap();
        assert!((pt.eval(PI / 8.0).unwrap() - 8.0).abs() < 1e-13);
        // one-wall cell keeps the finite end
        assert_eq!(pt.eval(0.0).unwrap(), 4.0);
        assert!(pt.eval(PI / 4.0).is_err());
        let pt = AngularPotential::poschl_teller(1.0, 1.0, 1.0).unwrap();
        assert!(pt.eval(0.0).is_err());
        assert!(pt.eval(-0.1).is_err());
        assert!(AngularPotential::poschl_teller(0.0, 0.0, 1.0).is_err());
        assert!(AngularPotential::free(0.0).is_err());
    }

    #[test]
    fn poschl_teller_minimum() {
        for (a, b, n) in [(1.0, 1.0, 1.0), (0.5, 2.0, 2.0), (3.0, 0.25, 1.5)] {
            let pt = AngularPotential::poschl_teller(a, b, n).unwrap();
            let (_, u0) = pt.minimum();
            let exact = n * n * (f64::sqrt(a) + f64::sqrt(b)).powi(2);
            assert!(rel(u0, exact) < 1e-12);
        }
    }

    #[test]
    fn tabulated_validation() {
        let pts: Vec<(f64, f64)> = (0..21)
            .map(|i| {
                let x = -1.0 + 0.1 * i as f64;
                (x, x * x)
            })
            .collect();
        let t = TabulatedWell::new(&pts).unwrap();
        let u = AngularPotential::Tabulated(t);
        assert!((u.eval(0.35).unwrap() - 0.1225).abs() < 2e-3);
        let (phi, u0) = u.minimum();
        assert!(phi.abs() < 1e-6 && u0.abs() < 1e-9);
        assert!(u.eval(1.5).is_err());
        let bumpy: Vec<(f64, f64)> = vec![(0.0, 3.0), (1.0, 1.0), (2.0, 2.0), (3.0, 0.5), (4.0, 4.0)];
        assert!(TabulatedWell::new(&bumpy).is_err());
        let edge: Vec<(f64, f64)> = vec![(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)];
        assert!(TabulatedWell::new(&edge).is_err());
    }

    #[test]
    fn taylor_examples() {
        let osc = RadialFamily::oscillator(1.0, 1.0).unwrap();
        let t = taylor_coefficients(&osc, c(0.0), 1.0).unwrap();
        assert_eq!(t.a_implied, 0.0);
        assert_eq!(t.omega0_sq, 8.0);
        assert_eq!(t.alpha3, -12.0);
        // Ṽ'''' = 120 at ρ = 1, so the quartic coefficient is 120/6
        assert_eq!(t.beta4, 20.0);
        let kep = RadialFamily::kepler(0.0, 1.0, 0.0).unwrap();
        let t = taylor_coefficients(&kep, c(0.0), 1.0).unwrap();
        assert_eq!(t.a_implied, 0.5);
        assert_eq!(t.omega0_sq, 1.0);
        let flat = RadialFamily::oscillator(0.0, 0.0).unwrap();
        assert!(matches!(
            taylor_coefficients(&flat, c(0.0), 1.3),
            Err(Error::DegenerateMinimum(_))
        ));
    }

    #[test]
    fn anharmonic_examples() {
        let t = TaylorExpansion {
            rho0: 1.0,
            a_implied: 0.0,
            e0: 2.0,
            omega0_sq: 8.0,
            alpha3: -12.0,
            beta4: 4.0,
        };
        assert_eq!(anharmonic_frequency(&t, 0.0), 8f64.sqrt());
        let expected = 8f64.sqrt() - 0.12 / (2.0 * 8f64.sqrt());
        assert!((anharmonic_frequency(&t, 0.1) - expected).abs() < 1e-15);
        assert!((anharmonic_frequency(&t, 0.1) - 2.807214).abs() < 1e-6);
    }

    #[test]
    fn residual_examples() {
        let osc = RadialFamily::oscillator(2.0, 3.0).unwrap();
        assert!(isochrony_residual_relative(&osc, 1.3).unwrap() < 1e-9);
        let kep = RadialFamily::kepler(1.0, 2.0, 3.0).unwrap();
        assert!(isochrony_residual_relative(&kep, 0.7).unwrap() < 1e-9);
        let quartic = PowerLaw {
            coeff: 1.0,
            exponent: 4,
        };
        assert_eq!(isochrony_residual(&quartic, 1.0).unwrap(), -2304.0);
        let sextic = PowerLaw {
            coeff: 1.0,
            exponent: 6,
        };
        assert!(isochrony_residual_relative(&sextic, 1.0).unwrap() > 0.1);
        let linear = PowerLaw {
            coeff: 1.0,
            exponent: 2,
        };
        assert!(matches!(
            isochrony_residual(&linear, 1.0),
            Err(Error::SingularDenominator(_))
        ));
    }

    #[test]
    fn finite_difference_fallback() {
        let exact = RadialFamily::kepler(0.4, 1.5, 0.8).unwrap();
        let fd = FnProfile(move |x: f64| exact.tilde(x));
        let a = exact.tilde_derivatives(1.1);
        let b = fd.tilde_derivatives(1.1);
        for i in 0..5 {
            assert!(
                (a[i] - b[i]).abs() < 1e-5 * (1.0 + a[i].abs()),
                "order {i}: {} vs {}",
                a[i],
                b[i]
            );
        }
    }

    #[test]
    fn presets() {
        let p = PresetParams {
            delta: 0.5,
            alpha: 1.0,
            beta: 1.0,
            n: Rational::integer(2),
            ..Default::default()
        };
        let ttw = preset(PresetName::Ttw, c(0.0), &p).unwrap();
        assert_eq!(ttw.radial.family, RadialFamily::Oscillator { gamma: 0.0, delta: 0.5 });
        assert_eq!(
            ttw.angular,
            AngularPotential::PoschlTeller {
                alpha: 1.0,
                beta: 1.0,
                n: 2.0
            }
        );
        assert_eq!(ttw.q, Rational::integer(2));

        let p = PresetParams {
            d: 1.0,
            n: Rational::integer(1),
            ..Default::default()
        };
        let pw = preset(PresetName::Pw, c(1.0), &p).unwrap();
        assert_eq!(pw.radial.family, RadialFamily::Kepler { b: 0.0, d: 1.0, f: 0.0 });
        assert_eq!(pw.q, Rational::integer(1));
        // attractive sign: V = -sqrt(k) sqrt(D) / tan(sqrt(k) r)
        let r = 0.7;
        assert!((pw.radial.eval_radial(r).unwrap() + 1.0 / r.tan()).abs() < 1e-14);

        let fk = preset(PresetName::FlatKepler, c(0.0), &p).unwrap();
        assert_eq!(fk.angular, AngularPotential::Free { delta_phi: PI });
        assert_eq!(fk.q, Rational::integer(1));
        assert!(preset(PresetName::FlatKepler, c(1.0), &p).is_err());
        assert!(matches!("nope".parse::<PresetName>(), Err(Error::UnknownPreset(_))));
        for name in [
            "ttw",
            "pw",
            "higgs",
            "schroedinger_coulomb",
            "flat_oscillator",
            "flat_kepler",
        ] {
            assert_eq!(name.parse::<PresetName>().unwrap().to_string(), name);
        }
    }

    fn family_strategy() -> impl Strategy<Value = RadialFamily> {
        prop_oneof![
            (0.0f64..3.0, 0.01f64..3.0).prop_map(|(g, d)| RadialFamily::Oscillator { gamma: g, delta: d }),
            (0.0f64..3.0, 0.01f64..3.0, 0.0f64..3.0).prop_map(|(b, d, f)| RadialFamily::Kepler { b, d, f }),
        ]
    }

    fn curved_point() -> impl Strategy<Value = (f64, f64)> {
        prop_oneof![
            (0.05f64..3.0, 0.01f64..0.99).prop_map(|(k, u)| (k, u * PI / k.sqrt())),
            (0.0f64..1.0, 0.05f64..4.0).prop_map(|(_, r)| (0.0, r)),
            (-3.0f64..-0.05, 0.05f64..3.0),
        ]
    }

    fn term_scale(v: &RadialPotential, r: f64) -> f64 {
        let rho = geometry::rho_of_r(v.curvature, r).unwrap();
        match v.family {
            RadialFamily::Oscillator { gamma, delta } => gamma * rho * rho + delta / (rho * rho),
            RadialFamily::Kepler { b, d, f } => b * rho * rho + (rho * (d + f * rho * rho).sqrt()).abs(),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn radial_matches_tilde(fam in family_strategy(), (k, r) in curved_point()) {
            let v = RadialPotential::new(fam, c(k)).unwrap();
            let direct = v.eval_radial(r).unwrap();
            let via = v.eval_tilde(geometry::rho_of_r(c(k), r).unwrap()).unwrap();
            prop_assert!((direct - via).abs() <= 1e-12 * term_scale(&v, r).max(1e-300));
        }

        #[test]
        fn composition_with_flat(fam in family_strategy(), (k, r) in curved_point()) {
            let v = RadialPotential::new(fam, c(k)).unwrap();
            let direct = v.eval_radial(r).unwrap();
            let via = v.eval_radial_via_flat(r).unwrap();
            prop_assert!((direct - via).abs() <= 1e-12 * term_scale(&v, r).max(1e-300));
        }

        #[test]
        fn family_members_solve_isochrony_equation(fam in family_strategy(), rho in 0.2f64..3.0) {
            prop_assert!(isochrony_residual_relative(&fam, rho).unwrap() <= 1e-9);
        }

        #[test]
        fn amplitude_independent_frequency(fam in family_strategy(), rho0 in 0.3f64..2.5) {
            let t = taylor_coefficients(&fam, c(0.0), rho0).unwrap();
            let w0 = t.omega0_sq.sqrt();
            for a in [0.0, 0.01, 0.1] {
                prop_assert!((anharmonic_frequency(&t, a) - w0).abs() <= 1e-12 * w0);
            }
        }
    }

    #[test]
    fn power_law_controls_are_not_isochronous() {
        for p in [4, 6] {
            let prof = PowerLaw {
                coeff: 1.0,
                exponent: p,
            };
            for i in 0..20 {
                let rho = 0.3 + 0.1 * i as f64;
                assert!(isochrony_residual_relative(&prof, rho).unwrap() > 1e-3);
            }
        }
    }

    #[test]
    fn minimum_of_effective_potential_recovers_rho0() {
        for fam in [
            RadialFamily::oscillator(0.5, 1.3).unwrap(),
            RadialFamily::kepler(0.2, 1.1, 0.4).unwrap(),
        ] {
            let rho0 = 0.9;
            let t = taylor_coefficients(&fam, c(0.0), rho0).unwrap();
            struct W<'a>(&'a RadialFamily, f64);
            impl crate::quadrature::Well for W<'_> {
                fn value(&self, x: f64) -> f64 {
                    effective_potential(self.0, self.1, Curvature::flat(), x)
                }
                fn slope(&self, x: f64) -> f64 {
                    self.0.tilde_slope(x) + 2.0 * self.1 * x
                }
            }
            let found = roots::locate_minimum(&W(&fam, t.a_implied), 0.0, f64::INFINITY, 1.0).unwrap();
            assert!((found - rho0).abs() < 1e-8, "{found}");
        }
    }
}
