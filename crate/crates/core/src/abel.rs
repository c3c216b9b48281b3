//! Reconstruction of angular potentials from their period function.
//!
//! The width of a single well at height `U` follows from the period `T(A)` by the
//! Abel transform `δφ(U) = (1/(π√2)) ∫_{U0}^{U} T(A) dA / sqrt(U − A)`. The two
//! branches of the inverse potential are `φ±(U) = ±δφ(U)/2 + G(U)`, where `G` is
//! free apart from keeping the branches monotone.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::interp::CubicHermite;
use crate::potentials::{AngularPotential, RadialFamily, TabulatedWell};
use crate::quadrature::integrate;
use crate::rational::Rational;

/// Default reconstruction grid size.
pub const GRID_POINTS: usize = 512;
/// Offsets of the default grid above the well bottom.
pub const GRID_SPAN: (f64, f64) = (1e-8, 1e4);

/// Tolerances of the width transform. Period functions obtained by quadrature carry
/// ~1e-10 relative noise, so the target is relative.
const WIDTH_ABS_TOL: f64 = 1e-15;
const WIDTH_REL_TOL: f64 = 1e-9;

/// Period functions of the two isochronous families, written as a sum of
/// `π / (√2 q sqrt(A + c))` terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PeriodFamily {
    Oscillator { gamma: f64 },
    Kepler { b: f64, f: f64 },
}

impl From<&RadialFamily> for PeriodFamily {
    fn from(f: &RadialFamily) -> Self {
        match *f {
            RadialFamily::Oscillator { gamma, .. } => PeriodFamily::Oscillator { gamma },
            RadialFamily::Kepler { b, f, .. } => PeriodFamily::Kepler { b, f },
        }
    }
}

impl PeriodFamily {
    fn offsets(&self) -> Vec<f64> {
        match *self {
            PeriodFamily::Oscillator { gamma } => vec![gamma],
            PeriodFamily::Kepler { b, f } => vec![b + f.sqrt(), b - f.sqrt()],
        }
    }

    /// `T_φ(A)` for period ratio `q`.
    pub fn period(&self, a: f64, q: Rational) -> Result<f64> {
        let qf = positive_q(q)?;
        let mut t = 0.0;
        for c in self.offsets() {
            if !(a + c > 0.0) {
                return Err(domain(format!("period undefined at A = {a}: A + {c} <= 0")));
            }
            t += PI / (2f64.sqrt() * qf * (a + c).sqrt());
        }
        Ok(t)
    }

    /// Width limit `δφ(U → ∞)`: `π/(2q)` per term.
    pub fn asymptotic_width(&self, q: Rational) -> Result<f64> {
        Ok(self.offsets().len() as f64 * PI / (2.0 * positive_q(q)?))
    }
}

fn positive_q(q: Rational) -> Result<f64> {
    if q.is_positive() {
        Ok(q.to_f64())
    } else {
        Err(domain(format!("q must be positive, got {q}")))
    }
}

/// Abel transform of a period function by quadrature.
///
/// With `A = U0 + (U − U0) sin²θ` the integrand becomes
/// `2 sqrt(U − U0) sin θ T(A)`, smooth even when `T ~ (A − U0)^(−1/2)`.
pub fn delta_phi_numeric<F>(period: F, u0: f64, u: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(u > u0) {
        if u == u0 {
            return Ok(0.0);
        }
        return Err(domain(format!("U = {u} must not be below U0 = {u0}")));
    }
    let span = u - u0;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let g = |theta: f64| -> f64 {
        let s = theta.sin();
        let a = u0 + span * s * s;
        match period(a) {
            Ok(t) => 2.0 * span.sqrt() * s * t,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let i = integrate(g, 0.0, 0.5 * PI, WIDTH_ABS_TOL, WIDTH_REL_TOL);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(i? / (PI * 2f64.sqrt()))
}

fn asin_checked(z: f64) -> Result<f64> {
    const SLACK: f64 = 1e-12;
    if !(z.abs() <= 1.0 + SLACK) {
        return Err(domain(format!("arcsin argument {z} outside [-1, 1]")));
    }
    Ok(z.clamp(-1.0, 1.0).asin())
}

/// Closed-form well width for the family periods.
///
/// Each term contributes `(1/2q)(arcsin((U − c − 2U0)/(U + c)) + π/2)`.
pub fn delta_phi_closed(family: &PeriodFamily, q: Rational, u0: f64, u: f64) -> Result<f64> {
    let qf = positive_q(q)?;
    if !(u >= u0) {
        return Err(domain(format!("U = {u} must not be below U0 = {u0}")));
    }
    let mut w = 0.0;
    for c in family.offsets() {
        if u + c == 0.0 {
            return Err(domain(format!("arcsin argument undefined at U = {u}")));
        }
        w += asin_checked((u - c - 2.0 * u0) / (u + c))? + 0.5 * PI;
    }
    Ok(w / (2.0 * qf))
}

/// `dδφ/dU` of [`delta_phi_closed`].
pub fn delta_phi_closed_slope(family: &PeriodFamily, q: Rational, u0: f64, u: f64) -> Result<f64> {
    let qf = positive_q(q)?;
    let mut d = 0.0;
    for c in family.offsets() {
        let z = (u - c - 2.0 * u0) / (u + c);
        let dz = 2.0 * (c + u0) / ((u + c) * (u + c));
        let root = (1.0 - z * z).max(0.0).sqrt();
        if dz != 0.0 {
            d += dz / root;
        }
    }
    if !d.is_finite() {
        return Err(domain(format!("width slope diverges at U = {u}")));
    }
    Ok(d / (2.0 * qf))
}

/// The branch offset selecting the Poschl–Teller well:
/// `G(U) = (1/2n) arccos(n(√α − √β)/√U)`.
pub fn g_ttw(u: f64, alpha: f64, beta: f64, n: f64) -> Result<f64> {
    if !(u > 0.0) {
        return Err(domain(format!("U must be positive, got {u}")));
    }
    if !(n > 0.0) {
        return Err(domain(format!("n must be positive, got {n}")));
    }
    let x = n * (alpha.sqrt() - beta.sqrt()) / u.sqrt();
    if !(x.abs() <= 1.0 + 1e-12) {
        return Err(domain(format!("arccos argument {x} outside [-1, 1]")));
    }
    Ok(x.clamp(-1.0, 1.0).acos() / (2.0 * n))
}

fn g_ttw_slope(u: f64, alpha: f64, beta: f64, n: f64) -> f64 {
    let c = n * (alpha.sqrt() - beta.sqrt());
    if c == 0.0 {
        return 0.0;
    }
    c / (4.0 * n * u.powf(1.5) * (1.0 - c * c / u).max(0.0).sqrt())
}

/// The free function `G(U)` of the branch assembly.
#[derive(Debug, Clone, PartialEq)]
pub enum BranchSpec {
    Constant(f64),
    Ttw { alpha: f64, beta: f64, n: f64 },
    Custom(CubicHermite),
}

impl BranchSpec {
    pub fn value(&self, u: f64) -> Result<f64> {
        match self {
            BranchSpec::Constant(phi0) => Ok(*phi0),
            BranchSpec::Ttw { alpha, beta, n } => g_ttw(u, *alpha, *beta, *n),
            BranchSpec::Custom(c) => c.eval(u),
        }
    }

    pub fn slope(&self, u: f64) -> Result<f64> {
        match self {
            BranchSpec::Constant(_) => Ok(0.0),
            BranchSpec::Ttw { alpha, beta, n } => Ok(g_ttw_slope(u, *alpha, *beta, *n)),
            BranchSpec::Custom(c) => c.derivative(u),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchSample {
    pub u: f64,
    pub phi_plus: f64,
    pub phi_minus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchFunction {
    pub u0: f64,
    pub samples: Vec<BranchSample>,
    pub g: BranchSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub branches: BranchFunction,
    pub well: TabulatedWell,
}

impl Reconstruction {
    pub fn potential(&self) -> AngularPotential {
        AngularPotential::Tabulated(self.well.clone())
    }
}

/// `count` heights geometric in `U − U0` over [`GRID_SPAN`].
pub fn default_u_grid(u0: f64, count: usize) -> Vec<f64> {
    let (lo, hi) = GRID_SPAN;
    let ratio = (hi / lo).ln();
    (0..count)
        .map(|i| u0 + lo * (ratio * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Reconstructs the well whose periods are those of `family` with ratio `q`.
pub fn reconstruct_angular(
    family: &PeriodFamily,
    q: Rational,
    u0: f64,
    g: &BranchSpec,
    u_grid: &[f64],
) -> Result<Reconstruction> {
    let bottom = delta_phi_closed(family, q, u0, u0)?;
    let widths: Vec<(f64, f64)> = u_grid
        .iter()
        .map(|&u| {
            Ok((
                delta_phi_closed(family, q, u0, u)?,
                delta_phi_closed_slope(family, q, u0, u)?,
            ))
        })
        .collect::<Result<_>>()?;
    assemble(u0, bottom, g, u_grid, &widths)
}

/// Reconstructs a well from a numerically given period function.
pub fn reconstruct_from_periods<F>(period: F, u0: f64, g: &BranchSpec, u_grid: &[f64]) -> Result<Reconstruction>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let widths: Vec<(f64, f64)> = u_grid
        .par_iter()
        .map(|&u| {
            let w = delta_phi_numeric(&period, u0, u)?;
            let h = 1e-3 * (u - u0);
            let at = |x: f64| delta_phi_numeric(&period, u0, x);
            let slope = (at(u - 2.0 * h)? - 8.0 * at(u - h)? + 8.0 * at(u + h)? - at(u + 2.0 * h)?) / (12.0 * h);
            Ok((w, slope))
        })
        .collect::<Result<_>>()?;
    assemble(u0, 0.0, g, u_grid, &widths)
}

fn assemble(
    u0: f64,
    bottom_width: f64,
    g: &BranchSpec,
    u_grid: &[f64],
    widths: &[(f64, f64)],
) -> Result<Reconstruction> {
    if u_grid.len() < 2 {
        return Err(domain("reconstruction needs at least two heights"));
    }
    if !(u_grid[0] > u0) || u_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(domain("U grid must increase strictly from above U0"));
    }
    let mut samples = Vec::with_capacity(u_grid.len());
    let mut plus_slopes = Vec::with_capacity(u_grid.len());
    let mut minus_slopes = Vec::with_capacity(u_grid.len());
    for (&u, &(w, dw)) in u_grid.iter().zip(widths) {
        let (gv, gs) = (g.value(u)?, g.slope(u)?);
        samples.push(BranchSample {
            u,
            phi_plus: gv + 0.5 * w,
            phi_minus: gv - 0.5 * w,
        });
        plus_slopes.push(gs + 0.5 * dw);
        minus_slopes.push(gs - 0.5 * dw);
    }
    let g0 = g.value(u0)?;
    let (left0, right0) = (g0 - 0.5 * bottom_width, g0 + 0.5 * bottom_width);

    let plus_ok = right0 < samples[0].phi_plus && samples.windows(2).all(|w| w[1].phi_plus > w[0].phi_plus);
    let minus_ok = left0 > samples[0].phi_minus && samples.windows(2).all(|w| w[1].phi_minus < w[0].phi_minus);
    if !(plus_ok && minus_ok) {
        return Err(Error::BranchOverlap(
            "branches are not monotone in U; G is incompatible with a single well".into(),
        ));
    }

    let inverse = |d: f64| if d != 0.0 { 1.0 / d } else { 0.0 };
    let mut points = Vec::with_capacity(2 * samples.len() + 2);
    let mut slopes = Vec::with_capacity(points.capacity());
    for (s, d) in samples.iter().zip(&minus_slopes).rev() {
        points.push((s.phi_minus, s.u));
        slopes.push(inverse(*d));
    }
    points.push((left0, u0));
    slopes.push(0.0);
    if bottom_width > 0.0 {
        points.push((right0, u0));
        slopes.push(0.0);
    }
    for (s, d) in samples.iter().zip(&plus_slopes) {
        points.push((s.phi_plus, s.u));
        slopes.push(inverse(*d));
    }
    let well = TabulatedWell::with_slopes(&points, &slopes)?;
    Ok(Reconstruction {
        branches: BranchFunction {
            u0,
            samples,
            g: g.clone(),
        },
        well,
    })
}

/// Writes a tabulated potential as `phi,U` rows.
pub fn write_csv<W: Write>(well: &TabulatedWell, out: W) -> io::Result<()> {
    crate::csv::write_table(out, &["phi", "U"], well.points().map(|(p, u)| vec![p, u]))
}
