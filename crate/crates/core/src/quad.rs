//! Adaptive Gauss–Kronrod quadrature with helpers for integrable singularities
//! at the origin and for improper tails.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Single 15-point Kronrod panel on `[a, b]` in plain `f64`.
pub(crate) fn kronrod15_panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = WGK[7] * f(c);
    for j in 0..7 {
        acc += WGK[j] * (f(c - h * XGK[j]) + f(c + h * XGK[j]));
    }
    acc * h
}

/// Tolerances for the adaptive driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 0.0,
            max_intervals: 4000,
        }
    }
}

impl QuadConfig {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

/// Value and diagnostics of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<S> {
    pub value: S,
    pub abs_error: S,
    pub evaluations: usize,
    pub intervals: usize,
}

/// Result of an improper integral over `[a, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailResult<S> {
    pub value: S,
    /// Upper limit at which the doubling stopped.
    pub truncated_at: S,
    pub panels: usize,
    pub evaluations: usize,
}

struct Segment<S> {
    a: S,
    b: S,
    value: S,
    error: S,
}

impl<S: Scalar> PartialEq for Segment<S> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<S: Scalar> Eq for Segment<S> {}
impl<S: Scalar> PartialOrd for Segment<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S: Scalar> Ord for Segment<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

fn kronrod15<S: Scalar, F: Fn(S) -> S>(f: &F, a: S, b: S) -> (S, S) {
    let half = S::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let f_center = f(center);

    let mut res_k = f_center * S::lit(WGK[7]);
    let mut res_g = f_center * S::lit(WG[3]);
    let mut res_abs = f_center.abs() * S::lit(WGK[7]);
    let mut fv1 = [S::zero(); 7];
    let mut fv2 = [S::zero(); 7];

    for j in 0..7 {
        let dx = half_len * S::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let w = S::lit(WGK[j]);
        res_k = res_k + w * (f1 + f2);
        res_abs = res_abs + w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g = res_g + S::lit(WG[j / 2]) * (f1 + f2);
        }
    }

    let mean = res_k * half;
    let mut res_asc = S::lit(WGK[7]) * (f_center - mean).abs();
    for j in 0..7 {
        res_asc = res_asc + S::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let abs_half = half_len.abs();
    let result = res_k * half_len;
    res_abs = res_abs * abs_half;
    res_asc = res_asc * abs_half;
    let mut err = ((res_k - res_g) * half_len).abs();

    if res_asc != S::zero() && err != S::zero() {
        let scale = (S::lit(200.0) * err / res_asc).powf(S::lit(1.5));
        err = if scale < S::one() {
            res_asc * scale
        } else {
            res_asc
        };
    }
    let floor = S::lit(50.0) * S::epsilon() * res_abs;
    if res_abs > S::min_positive_value() / (S::lit(50.0) * S::epsilon()) && floor > err {
        err = floor;
    }
    (result, err)
}

/// Integrates `f` over `[a, b]` by globally adaptive 15-point Gauss–Kronrod.
pub fn integrate<S, F>(f: F, a: S, b: S, cfg: &QuadConfig) -> Result<QuadResult<S>>
where
    S: Scalar,
    F: Fn(S) -> S,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::argument("integration limits must be finite"));
    }
    if a == b {
        return Ok(QuadResult {
            value: S::zero(),
            abs_error: S::zero(),
            evaluations: 0,
            intervals: 0,
        });
    }

    let rel = S::lit(cfg.rel_tol);
    let abs_tol = S::lit(cfg.abs_tol);
    let (value, error) = kronrod15(&f, a, b);
    let mut evaluations = 15;
    if !value.is_finite() {
        return Err(non_finite(value, evaluations));
    }

    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;

    loop {
        if total_err <= abs_tol.max(rel * total.abs()) {
            break;
        }
        if heap.len() >= cfg.max_intervals {
            return Err(Error::Numeric {
                message: format!(
                    "adaptive quadrature did not converge on [{}, {}] within {} intervals",
                    a.as_f64(),
                    b.as_f64(),
                    cfg.max_intervals
                ),
                estimate: total.as_f64(),
                error: total_err.as_f64(),
                evaluations,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = S::lit(0.5) * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // Interval exhausted at working precision; accept what we have.
            heap.push(Segment {
                error: S::zero(),
                ..worst
            });
            total_err = heap.iter().fold(S::zero(), |acc, s| acc + s.error);
            if total_err <= abs_tol.max(rel * total.abs()) {
                break;
            }
            continue;
        }
        let (v1, e1) = kronrod15(&f, worst.a, mid);
        let (v2, e2) = kronrod15(&f, mid, worst.b);
        evaluations += 30;
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(non_finite(v1 + v2, evaluations));
        }
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.error + e1 + e2;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        // Re-sum periodically so cancellation in the running sums cannot drift.
        if heap.len() % 64 == 0 {
            total = heap.iter().fold(S::zero(), |acc, s| acc + s.value);
            total_err = heap.iter().fold(S::zero(), |acc, s| acc + s.error);
        }
    }

    Ok(QuadResult {
        value: total,
        abs_error: total_err,
        evaluations,
        intervals: heap.len(),
    })
}

fn non_finite<S: Scalar>(value: S, evaluations: usize) -> Error {
    Error::Numeric {
        message: "integrand produced a non-finite value".into(),
        estimate: value.as_f64(),
        error: f64::INFINITY,
        evaluations,
    }
}

/// Integrates `f` over `(0, b]` where `f` may carry an integrable power-type
/// singularity at the origin.
///
/// The interval is split geometrically into `[b/2^{k+1}, b/2^k]`. Once the
/// ratio of consecutive panel contributions has settled, the remaining
/// contribution of `(0, b/2^k]` is summed as a geometric series, which is
/// exact for pure powers.
pub fn integrate_from_zero<S, F>(f: F, b: S, cfg: &QuadConfig) -> Result<QuadResult<S>>
where
    S: Scalar,
    F: Fn(S) -> S,
{
    if !(b > S::zero()) {
        return Err(Error::argument("upper limit must be positive"));
    }
    let half = S::lit(0.5);
    let mut hi = b;
    let mut total = S::zero();
    let mut total_err = S::zero();
    let mut evaluations = 0;
    let mut panels = 0;
    let mut prev: Option<S> = None;
    let mut prev_ratio: Option<S> = None;
    let max_panels = 2000;

    loop {
        let lo = hi * half;
        if lo <= S::min_positive_value() {
            break;
        }
        let r = integrate(&f, lo, hi, cfg)?;
        evaluations += r.evaluations;
        panels += 1;
        total = total + r.value;
        total_err = total_err + r.abs_error;
        hi = lo;

        if r.value == S::zero() && prev.map_or(false, |p| p == S::zero()) {
            break;
        }
        if let Some(p) = prev {
            if p != S::zero() {
                let ratio = r.value / p;
                if ratio > S::zero() && ratio < S::one() {
                    let remainder = r.value * ratio / (S::one() - ratio);
                    let settled = prev_ratio
                        .map_or(false, |q| (q - ratio).abs() <= S::lit(1e-10) * ratio);
                    let small =
                        remainder.abs() <= S::lit(1e-2 * cfg.rel_tol) * total.abs();
                    if (settled && panels >= 12) || small {
                        total = total + remainder;
                        break;
                    }
                }
                prev_ratio = Some(ratio);
            }
        }
        prev = Some(r.value);
        if panels >= max_panels {
            return Err(Error::Numeric {
                message: "contributions near the origin do not decay; integrand may not be integrable at 0".into(),
                estimate: total.as_f64(),
                error: f64::INFINITY,
                evaluations,
            });
        }
    }

    Ok(QuadResult {
        value: total,
        abs_error: total_err,
        evaluations,
        intervals: panels,
    })
}

/// Integrates `f` over `[a, b]` with `0 <= a < b`, delegating to
/// [`integrate_from_zero`] when the lower limit is the origin.
pub fn integrate_nonneg<S, F>(f: F, a: S, b: S, cfg: &QuadConfig) -> Result<QuadResult<S>>
where
    S: Scalar,
    F: Fn(S) -> S,
{
    if a == S::zero() {
        integrate_from_zero(f, b, cfg)
    } else {
        integrate(f, a, b, cfg)
    }
}

/// Integrates `f` over `[a, ∞)` by doubling the upper limit until the last
/// increment is below `tail_tol` times the running total. The doubling is
/// capped at `2^60 · a`; reaching the cap means the running sum is not Cauchy
/// and is reported as a domain error.
pub fn integrate_tail<S, F>(f: F, a: S, tail_tol: f64, cfg: &QuadConfig) -> Result<TailResult<S>>
where
    S: Scalar,
    F: Fn(S) -> S,
{
    if !(a > S::zero()) || !a.is_finite() {
        return Err(Error::argument("tail lower limit must be positive and finite"));
    }
    let two = S::lit(2.0);
    let mut lo = a;
    let mut total = S::zero();
    let mut evaluations = 0;
    for panel in 1..=60 {
        let hi = lo * two;
        let r = integrate(&f, lo, hi, cfg)?;
        evaluations += r.evaluations;
        total = total + r.value;
        lo = hi;
        if r.value.abs() < S::lit(tail_tol) * total.abs() || (r.value == S::zero() && total == S::zero()) {
            return Ok(TailResult {
                value: total,
                truncated_at: hi,
                panels: panel,
                evaluations,
            });
        }
    }
    Err(Error::domain(format!(
        "tail integral from {} is not Cauchy up to 2^60 times the lower limit (running total {:e})",
        a.as_f64(),
        total.as_f64()
    )))
}
