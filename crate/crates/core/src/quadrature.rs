//! Globally adaptive Gauss–Kronrod (7/15) quadrature and the turning-point
//! regularised integrals used for actions, periods and Abel transforms.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Absolute tolerance used by action and period integrals.
pub const ABS_TOL: f64 = 1e-12;
/// Relative tolerance used by action and period integrals.
pub const REL_TOL: f64 = 1e-10;

const MAX_INTERVALS: usize = 4000;

// Kronrod abscissae on [-1, 1]; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    let integral = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (integral, err)
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrates `f` over `[a, b]` until the error estimate drops below
/// `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (value, err) = gk15(&f, a, b);
    if !value.is_finite() {
        return Err(Error::Math(format!("non-finite integrand on [{a}, {b}]")));
    }
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, err });
    let mut total = value;
    let mut total_err = err;
    while total_err > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature {
                error: total_err,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine resolution
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        if !(v1 + v2).is_finite() {
            return Err(Error::Math(format!(
                "non-finite integrand on [{}, {}]",
                worst.a, worst.b
            )));
        }
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
        if heap.len() % 64 == 0 {
            // refresh sums to keep cancellation from accumulating
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.err).sum();
        }
    }
    Ok(heap.iter().map(|s| s.value).sum())
}

/// A one-dimensional potential with a derivative, as seen by the turning-point machinery.
pub trait Well {
    fn value(&self, x: f64) -> f64;
    fn slope(&self, x: f64) -> f64;
}

impl<W: Well + ?Sized> Well for &W {
    fn value(&self, x: f64) -> f64 {
        (**self).value(x)
    }
    fn slope(&self, x: f64) -> f64 {
        (**self).slope(x)
    }
}

/// How the classically allowed interval ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    /// `level - value` has a simple zero here.
    Root,
    /// A reflecting wall where `level - value` stays positive.
    Wall,
}

/// Classically allowed interval `[a, b]` of a well at a fixed level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allowed {
    pub a: f64,
    pub b: f64,
    pub lower: Edge,
    pub upper: Edge,
}

/// Which power of the gap `level - V(x)` multiplies the weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapPower {
    /// `sqrt(level - V)`: action integrands.
    Sqrt,
    /// `1 / sqrt(level - V)`: period integrands.
    InvSqrt,
}

// Smallest fraction of the interval next to a root where the factored gap is
// interpolated instead of divided out.
const EDGE_BLEND: f64 = 1e-6;

// Blend fraction for one root end: wide enough that the divided gap at the blend
// point carries at most ~1e-10 relative rounding error.
fn edge_blend(level: f64, slope: f64, len: f64) -> f64 {
    let noise = 4.0 * f64::EPSILON * level.abs().max(1e-300);
    (1e10 * noise / (slope.abs() * len)).clamp(EDGE_BLEND, 1e-2)
}

/// Integrates `weight(x) * (level - V(x))^(+-1/2)` over the allowed interval.
///
/// At a root end the gap is written as `(x - a) h(x)` (or `(b - x) h(x)`) with `h`
/// smooth and positive; a `sin^2` (two roots) or square (one root) substitution then
/// removes the square-root behaviour so the transformed integrand is smooth.
pub fn integrate_gap<W, F>(
    well: &W,
    level: f64,
    seg: Allowed,
    power: GapPower,
    weight: F,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64>
where
    W: Well + ?Sized,
    F: Fn(f64) -> f64,
{
    let Allowed { a, b, lower, upper } = seg;
    let len = b - a;
    if !(len > 0.0) {
        return Ok(0.0);
    }
    let gap = |x: f64| level - well.value(x);
    // Rounding in `level - V` limits the attainable accuracy for shallow gaps.
    let depth = gap(0.5 * (a + b)).max(f64::MIN_POSITIVE);
    let rel_tol = rel_tol.max(64.0 * f64::EPSILON * level.abs() / depth);
    match (lower, upper) {
        (Edge::Root, Edge::Root) => {
            let (s_a, s_b) = (well.slope(a), well.slope(b));
            let h_a = (s_a / -len).max(0.0);
            let h_b = (s_b / len).max(0.0);
            let (eb_a, eb_b) = (edge_blend(level, s_a, len), edge_blend(level, s_b, len));
            let hb_a = gap(a + len * eb_a) / (len * eb_a * len * (1.0 - eb_a));
            let hb_b = gap(b - len * eb_b) / (len * eb_b * len * (1.0 - eb_b));
            let factored = |u: f64| -> f64 {
                // u = (x - a) / len
                if u < eb_a {
                    h_a + (hb_a - h_a) * u / eb_a
                } else if u > 1.0 - eb_b {
                    h_b + (hb_b - h_b) * (1.0 - u) / eb_b
                } else {
                    let x = a + len * u;
                    gap(x) / ((x - a) * (b - x))
                }
            };
            let g = |theta: f64| -> f64 {
                let (s, c) = theta.sin_cos();
                let u = s * s;
                let x = a + len * u;
                let h = factored(u).max(0.0);
                match power {
                    GapPower::InvSqrt => 2.0 * weight(x) / h.sqrt(),
                    GapPower::Sqrt => 2.0 * len * len * u * c * c * h.sqrt() * weight(x),
                }
            };
            integrate(g, 0.0, 0.5 * std::f64::consts::PI, abs_tol, rel_tol)
        }
        (Edge::Wall, Edge::Root) | (Edge::Root, Edge::Wall) => {
            // x = root -+ len * v^2
            let root_at_b = upper == Edge::Root;
            let (root, dir) = if root_at_b { (b, -1.0) } else { (a, 1.0) };
            let s_root = well.slope(root);
            let h_root = s_root.abs();
            let eb = edge_blend(level, s_root, len);
            let hb = gap(root + dir * len * eb) / (len * eb);
            let factored = |v2: f64| -> f64 {
                if v2 < eb {
                    h_root + (hb - h_root) * v2 / eb
                } else {
                    let x = root + dir * len * v2;
                    gap(x) / (len * v2)
                }
            };
            let g = |v: f64| -> f64 {
                let v2 = v * v;
                let x = root + dir * len * v2;
                let h = factored(v2).max(0.0);
                match power {
                    GapPower::InvSqrt => 2.0 * len.sqrt() * weight(x) / h.sqrt(),
                    GapPower::Sqrt => 2.0 * len * len.sqrt() * v2 * h.sqrt() * weight(x),
                }
            };
            integrate(g, 0.0, 1.0, abs_tol, rel_tol)
        }
        (Edge::Wall, Edge::Wall) => {
            let g = |x: f64| -> f64 {
                let d = gap(x).max(0.0);
                match power {
                    GapPower::InvSqrt => weight(x) / d.sqrt(),
                    GapPower::Sqrt => weight(x) * d.sqrt(),
                }
            };
            integrate(g, a, b, abs_tol, rel_tol)
        }
    }
}
