//! Karamata-type asymptotics and membership diagnostics.

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_from_zero, integrate_tail, QuadConfig};
use crate::scalar::Scalar;

use super::{CoefficientH, SlowlyVaryingSpec};

/// Table of `ℓ(λx)/ℓ(λ)`, one row per `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioTable<S> {
    pub x_values: Vec<S>,
    pub lambda_values: Vec<S>,
    pub ratios: Vec<Vec<S>>,
    pub tolerance: S,
    /// Every ratio in the last row lies within `tolerance` of one.
    pub pass: bool,
}

/// Tabulates `ℓ(λx)/ℓ(λ)` and flags whether the row for the largest `λ` is
/// within `tolerance` of one.
pub fn slow_variation_ratio_test<S: Scalar>(
    ell: &SlowlyVaryingSpec<S>,
    x_values: &[S],
    lambda_values: &[S],
    tolerance: S,
) -> Result<RatioTable<S>> {
    if x_values.is_empty() || lambda_values.is_empty() {
        return Err(Error::argument("ratio test needs non-empty x and λ lists"));
    }
    if x_values.iter().chain(lambda_values).any(|v| !(*v > S::zero())) {
        return Err(Error::argument("x and λ values must be positive"));
    }
    if lambda_values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::argument("λ values must be increasing"));
    }
    let mut ratios = Vec::with_capacity(lambda_values.len());
    for &lambda in lambda_values {
        let base = ell.eval(lambda)?;
        let row = x_values
            .iter()
            .map(|&x| ell.eval(lambda * x).map(|v| v / base))
            .collect::<Result<Vec<_>>>()?;
        ratios.push(row);
    }
    let pass = ratios
        .last()
        .expect("non-empty")
        .iter()
        .all(|r| (*r - S::one()).abs() <= tolerance);
    Ok(RatioTable {
        x_values: x_values.to_vec(),
        lambda_values: lambda_values.to_vec(),
        ratios,
        tolerance,
        pass,
    })
}

/// Estimate of the index `ρ` in `log U(x)/log x → ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexEstimate<S> {
    /// `log U(x)/log x` at each grid point.
    pub estimates: Vec<S>,
    /// Estimate at the largest point.
    pub rho_hat: S,
    /// Spread (max − min) over the last three estimates.
    pub residual: S,
}

impl<S: Scalar> IndexEstimate<S> {
    /// Membership verdict for the class with index `rho_hat`.
    pub fn is_member(&self, tolerance: S) -> bool {
        self.residual < tolerance
    }
}

/// Estimates the logarithmic growth index of `u` on an increasing grid of
/// points greater than one.
pub fn index_estimate<S, F>(u: F, x_grid: &[S]) -> Result<IndexEstimate<S>>
where
    S: Scalar,
    F: Fn(S) -> Result<S>,
{
    if x_grid.len() < 4 {
        return Err(Error::argument("index estimate needs at least four points"));
    }
    if x_grid.iter().any(|x| !(*x > S::one())) {
        return Err(Error::argument("index estimate needs points greater than one"));
    }
    if x_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::argument("index estimate grid must be increasing"));
    }
    let estimates = x_grid
        .iter()
        .map(|&x| u(x).map(|v| v.ln() / x.ln()))
        .collect::<Result<Vec<_>>>()?;
    let tail = &estimates[estimates.len() - 3..];
    let hi = tail.iter().copied().fold(S::neg_infinity(), S::max);
    let lo = tail.iter().copied().fold(S::infinity(), S::min);
    Ok(IndexEstimate {
        rho_hat: *estimates.last().expect("non-empty"),
        residual: hi - lo,
        estimates,
    })
}

/// Ratio reported by the Karamata diagnostics together with the integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KaramataRatio<S> {
    pub ratio: S,
    pub integral: S,
    pub evaluations: usize,
    /// Upper truncation of a tail integral; `None` for head integrals.
    pub truncated_at: Option<S>,
}

/// `x L(x) / ∫_0^x L(t) dt`, which tends to `ρ + 1` for `L ∈ RV_ρ`, `ρ ≥ −1`.
pub fn karamata_head_ratio<S, F>(l: F, x: S) -> Result<KaramataRatio<S>>
where
    S: Scalar,
    F: Fn(S) -> S,
{
    if !(x > S::zero()) {
        return Err(Error::domain("head ratio needs x > 0"));
    }
    let r = integrate_from_zero(&l, x, &QuadConfig::default())?;
    if !(r.value > S::zero()) {
        return Err(Error::Numeric {
            message: "head integral is not positive".into(),
            estimate: r.value.as_f64(),
            error: r.abs_error.as_f64(),
            evaluations: r.evaluations,
        });
    }
    Ok(KaramataRatio {
        ratio: x * l(x) / r.value,
        integral: r.value,
        evaluations: r.evaluations,
        truncated_at: None,
    })
}

/// `x L(x) / ∫_x^∞ L(t) dt`, which tends to `−ρ − 1` for `L ∈ RV_ρ`, `ρ < −1`.
pub fn karamata_tail_ratio<S, F>(l: F, x: S) -> Result<KaramataRatio<S>>
where
    S: Scalar,
    F: Fn(S) -> S,
{
    if !(x > S::zero()) {
        return Err(Error::domain("tail ratio needs x > 0"));
    }
    let r = integrate_tail(&l, x, 1e-8, &QuadConfig::default())?;
    Ok(KaramataRatio {
        ratio: x * l(x) / r.value,
        integral: r.value,
        evaluations: r.evaluations,
        truncated_at: Some(r.truncated_at),
    })
}

/// `F(R) = ∫_a^b h(Rτ)^β dτ` compared with `R^{βγ} ℓ(R)^β ∫_a^b τ^{βγ} dτ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsympIntRatio<S> {
    pub ratio: S,
    pub integral: S,
    pub reference: S,
}

pub fn asymp_int_ratio<S: Scalar>(
    h: &CoefficientH<S>,
    beta: S,
    a: S,
    b: S,
    r: S,
) -> Result<AsympIntRatio<S>> {
    if !(a > S::zero() && b > a && b.is_finite()) {
        return Err(Error::domain("asymptotic integral needs 0 < a < b < ∞"));
    }
    if !(r > S::zero()) {
        return Err(Error::domain("asymptotic integral needs R > 0"));
    }
    let cfg = QuadConfig::with_rel_tol(1e-10);
    let f = |tau: S| h.eval(r * tau).map(|v| v.powf(beta)).unwrap_or(S::nan());
    let integral = integrate(f, a, b, &cfg)?.value;
    let bg = beta * h.gamma;
    let power_integral = if (bg + S::one()).abs() < S::epsilon() {
        (b / a).ln()
    } else {
        (b.powf(bg + S::one()) - a.powf(bg + S::one())) / (bg + S::one())
    };
    let reference = r.powf(bg) * h.ell.eval(r)?.powf(beta) * power_integral;
    Ok(AsympIntRatio {
        ratio: integral / reference,
        integral,
        reference,
    })
}

/// Sup of `|L(λx)/L(λ) − x^ρ|` over a dense sample of `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformCheck<S> {
    pub sup: S,
    /// Same quantity on a sample with half the points, for stability checks.
    pub sup_coarse: S,
    pub samples: usize,
}

pub fn uniform_convergence_check<S, F>(
    l: F,
    rho: S,
    a: S,
    b: S,
    lambda: S,
    samples: usize,
) -> Result<UniformCheck<S>>
where
    S: Scalar,
    F: Fn(S) -> S,
{
    if !(a > S::zero() && b > a) {
        return Err(Error::domain("uniform check needs 0 < a < b"));
    }
    if samples < 512 {
        return Err(Error::argument("uniform check needs at least 512 samples"));
    }
    let base = l(lambda);
    if !(base.is_finite() && base != S::zero()) {
        return Err(Error::domain("L(λ) must be finite and non-zero"));
    }
    let sup_on = |n: usize| {
        let mut sup = S::zero();
        for k in 0..n {
            let x = a + (b - a) * S::from_usize_lossy(k) / S::from_usize_lossy(n - 1);
            let d = (l(lambda * x) / base - x.powf(rho)).abs();
            if !d.is_finite() {
                return Err(Error::domain(format!("L is not finite at {}", (lambda * x).as_f64())));
            }
            sup = sup.max(d);
        }
        Ok(sup)
    };
    let fine = 2 * samples - 1;
    Ok(UniformCheck {
        sup: sup_on(fine)?,
        sup_coarse: sup_on(samples)?,
        samples: fine,
    })
}
