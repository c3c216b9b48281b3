//! Bracketed root refinement, minimisation and turning-point search.

use crate::error::{Error, Result};
use crate::quadrature::{Allowed, Edge, Well};

/// Bisection on a sign change of `f` over `[lo, hi]`, refined to machine resolution.
///
/// `hi` is never evaluated. With `keep_sign_of_lo` the result is the final bracket end
/// on the `lo` side, so `f` there has the sign of `f(lo)`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, keep_sign_of_lo: bool) -> f64 {
    let f_lo = f(lo);
    let lo_positive = f_lo > 0.0;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        if (hi - lo).abs() < 1e-15 * (1.0 + mid.abs()) {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if keep_sign_of_lo {
        lo
    } else {
        hi
    }
}

/// Golden-section search for a minimum of a unimodal `f` on `[a, b]`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol * (1.0 + c.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if (d - c).abs() <= f64::EPSILON * (1.0 + c.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Two roots of `level - potential(x)` inside `bracket`, bounding the well that
/// contains the lowest sampled point.
pub fn turning_points<F: Fn(f64) -> f64>(potential: F, level: f64, bracket: (f64, f64)) -> Result<(f64, f64)> {
    let (lo, hi) = bracket;
    if !(lo < hi) {
        return Err(Error::Domain(format!("empty bracket ({lo}, {hi})")));
    }
    const N: usize = 4096;
    let xs: Vec<f64> = (0..=N).map(|i| lo + (hi - lo) * i as f64 / N as f64).collect();
    let vs: Vec<f64> = xs.iter().map(|&x| potential(x)).collect();
    let imin = vs
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::NoBoundMotion("potential not finite on bracket".into()))?;
    if !(vs[imin] < level) {
        return Err(Error::NoBoundMotion(format!(
            "level {level} does not exceed the sampled minimum {}",
            vs[imin]
        )));
    }
    let gap = |x: f64| level - potential(x);
    let left = (0..imin).rev().find(|&i| !(vs[i] < level));
    let right = (imin + 1..=N).find(|&i| !(vs[i] < level));
    match (left, right) {
        (Some(l), Some(r)) => {
            let x_l = bisect(gap, xs[imin], xs[l], true);
            let x_r = bisect(gap, xs[imin], xs[r], true);
            Ok((x_l, x_r))
        }
        _ => Err(Error::NoBoundMotion(format!(
            "fewer than two sign changes of level - potential on ({lo}, {hi})"
        ))),
    }
}

/// Minimum of a well on the open domain `(lo, hi)` (either end may be infinite).
///
/// Scans a grid that is geometric towards each infinite or finite end, then
/// refines on the sign change of the slope.
pub fn locate_minimum<W: Well + ?Sized>(well: &W, lo: f64, hi: f64, scale: f64) -> Result<f64> {
    let xs = scan_grid(lo, hi, scale);
    let mut best: Option<(usize, f64)> = None;
    for (i, &x) in xs.iter().enumerate() {
        let v = well.value(x);
        if v.is_finite() && best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    let (i, _) = best.ok_or_else(|| Error::NoBoundMotion("potential not finite anywhere".into()))?;
    if i == 0 || i + 1 == xs.len() {
        return Err(Error::NoBoundMotion(format!(
            "no interior minimum on ({lo}, {hi}); lowest sample at the edge x = {}",
            xs[i]
        )));
    }
    let (a, b) = (xs[i - 1], xs[i + 1]);
    let sa = well.slope(a);
    let sb = well.slope(b);
    if sa < 0.0 && sb > 0.0 {
        Ok(bisect(|x| well.slope(x), a, b, true))
    } else {
        Ok(golden_section(|x| well.value(x), a, b, 1e-14))
    }
}

fn scan_grid(lo: f64, hi: f64, scale: f64) -> Vec<f64> {
    // offsets spanning 1e-6 .. 1e6 times `scale`
    let offsets: Vec<f64> = (0..=1200).map(|j| scale * 10f64.powf(-6.0 + j as f64 * 0.01)).collect();
    let mut xs = Vec::new();
    match (lo.is_finite(), hi.is_finite()) {
        (true, false) => xs.extend(offsets.iter().map(|o| lo + o)),
        (false, true) => xs.extend(offsets.iter().rev().map(|o| hi - o)),
        (false, false) => {
            xs.extend(offsets.iter().rev().map(|o| -o));
            xs.push(0.0);
            xs.extend(offsets.iter().copied());
        }
        (true, true) => {
            let n = 4000;
            xs.extend((1..n).map(|i| lo + (hi - lo) * i as f64 / n as f64));
        }
    }
    xs
}

/// Allowed interval of `well` at `level` around its minimum at `x_min`.
///
/// The search walks outwards geometrically. Reaching a finite domain end where the
/// potential is still below `level` makes that end a reflecting wall when `walls`
/// permits it, and a no-bound-motion error otherwise.
pub fn allowed_interval<W: Well + ?Sized>(
    well: &W,
    level: f64,
    x_min: f64,
    domain: (f64, f64),
    walls: bool,
) -> Result<Allowed> {
    let v_min = well.value(x_min);
    if !(level > v_min) {
        if level == v_min {
            return Ok(Allowed {
                a: x_min,
                b: x_min,
                lower: Edge::Root,
                upper: Edge::Root,
            });
        }
        return Err(Error::NoBoundMotion(format!(
            "level {level} below the well minimum {v_min}"
        )));
    }
    let gap = |x: f64| level - well.value(x);
    let (lower_x, lower) = search_side(&gap, x_min, domain.0, -1.0, walls)?;
    let (upper_x, upper) = search_side(&gap, x_min, domain.1, 1.0, walls)?;
    Ok(Allowed {
        a: lower_x,
        b: upper_x,
        lower,
        upper,
    })
}

fn search_side<G: Fn(f64) -> f64>(gap: &G, x0: f64, end: f64, dir: f64, walls: bool) -> Result<(f64, Edge)> {
    let mut step = 1e-6 * (1.0 + x0.abs());
    let mut inner = x0;
    loop {
        let outer = x0 + dir * step;
        let past_end = if dir > 0.0 { outer >= end } else { outer <= end };
        if past_end {
            if !end.is_finite() {
                return Err(Error::NoBoundMotion("allowed region extends to infinity".into()));
            }
            // `bisect` never evaluates its far end, so a singular boundary is fine here.
            let g_end = gap(end);
            if g_end.is_nan() || g_end < 0.0 {
                return Ok((bisect(gap, inner, end, true), Edge::Root));
            }
            if walls {
                return Ok((end, Edge::Wall));
            }
            return Err(Error::NoBoundMotion(format!(
                "motion reaches the domain boundary at {end}"
            )));
        }
        if !(gap(outer) > 0.0) {
            return Ok((bisect(gap, inner, outer, true), Edge::Root));
        }
        inner = outer;
        step *= 1.5;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn turning_points_parabola() {
        let (a, b) = turning_points(|x| x * x, 4.0, (-3.0, 3.0)).unwrap();
        assert!((a + 2.0).abs() < 1e-13 * 3.0);
        assert!((b - 2.0).abs() < 1e-13 * 3.0);
    }

    #[test]
    fn turning_points_isotonic() {
        let w = |x: f64| 0.5 / (x * x) + 0.5 * x * x;
        let (a, b) = turning_points(w, 2.0, (0.1, 3.0)).unwrap();
        let ea = (2.0 - 3f64.sqrt()).sqrt();
        let eb = (2.0 + 3f64.sqrt()).sqrt();
        assert!((a - ea).abs() < 1e-13 * (1.0 + ea));
        assert!((b - eb).abs() < 1e-13 * (1.0 + eb));
        assert!((a - 0.517638).abs() < 1e-6 && (b - 1.931852).abs() < 1e-6);
    }

    #[test]
    fn turning_points_poschl_teller() {
        let u = |p: f64| 0.5 / p.cos().powi(2) + 0.5 / p.sin().powi(2);
        let eps = 1e-9;
        let (a, b) = turning_points(u, 8.0, (eps, PI / 2.0 - eps)).unwrap();
        assert!((a - PI / 12.0).abs() < 1e-13);
        assert!((b - 5.0 * PI / 12.0).abs() < 1e-13);
    }

    #[test]
    fn no_bound_motion() {
        assert!(matches!(
            turning_points(|x| x, 1.0, (-3.0, 3.0)),
            Err(Error::NoBoundMotion(_))
        ));
        assert!(matches!(
            turning_points(|x| x * x, -1.0, (-3.0, 3.0)),
            Err(Error::NoBoundMotion(_))
        ));
    }

    #[test]
    fn golden_section_quadratic() {
        let x = golden_section(|x| (x - 0.3) * (x - 0.3), -1.0, 2.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-7);
    }
}
