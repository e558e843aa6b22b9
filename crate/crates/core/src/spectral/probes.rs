//! Empirical checks of the semigroup estimates: smoothing rates, the
//! two-sided sup-norm decay band and the convexity inequality for `(−Δ)^s`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{lp_norm, sup_norm, Field, GridSpec, Spectral, Spectrum, Symbol};
use crate::error::{Error, Result};
use crate::fit::loglog_slope;
use crate::scalar::Scalar;

/// Detects mass that has travelled around the torus.
///
/// A field trips the guard when its largest value within `width_cells` of the
/// periodic boundary exceeds `threshold` times its sup norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WrapGuard {
    pub threshold: f64,
    pub width_cells: usize,
}

impl Default for WrapGuard {
    fn default() -> Self {
        Self {
            threshold: 1e-3,
            width_cells: 2,
        }
    }
}

impl WrapGuard {
    /// Ratio of the boundary maximum to the sup norm.
    pub fn boundary_ratio<S: Scalar>(&self, field: &Field<S>) -> f64 {
        let sup = sup_norm(field).as_f64();
        if sup == 0.0 {
            return 0.0;
        }
        let grid = field.grid();
        let edge = field
            .values()
            .iter()
            .enumerate()
            .filter(|(idx, _)| grid.cells_to_boundary(*idx) < self.width_cells)
            .fold(0.0f64, |m, (_, v)| m.max(v.as_f64().abs()));
        edge / sup
    }
}

/// Returns the boundary ratio, or a domain-too-small error when it exceeds the guard.
pub fn check_wraparound<S: Scalar>(field: &Field<S>, guard: &WrapGuard) -> Result<f64> {
    let ratio = guard.boundary_ratio(field);
    if ratio > guard.threshold {
        return Err(Error::DomainTooSmall(format!(
            "boundary value is {ratio:.3e} of the peak (limit {:.1e}); enlarge the half width",
            guard.threshold
        )));
    }
    Ok(ratio)
}

/// Evaluates `e^{-tσ}φ` for many `t` from a single forward transform.
#[derive(Debug, Clone)]
pub struct SemigroupProbe<S: Scalar> {
    spectral: Spectral<S>,
    spectrum: Spectrum<S>,
    symbol_values: Vec<S>,
}

impl<S: Scalar> SemigroupProbe<S> {
    pub fn new(field: &Field<S>, symbol: &Symbol<S>) -> Result<Self> {
        let spectral = Spectral::new(*field.grid())?;
        let spectrum = spectral.forward(field)?;
        let symbol_values = spectral.symbol_values(symbol);
        Ok(Self {
            spectral,
            spectrum,
            symbol_values,
        })
    }

    pub fn grid(&self) -> &GridSpec<S> {
        self.spectral.grid()
    }

    pub fn at(&self, t: S) -> Field<S> {
        let m: Vec<S> = self.symbol_values.iter().map(|v| (-t * *v).exp()).collect();
        self.spectral.inverse_with(&self.spectrum, Some(&m))
    }

    /// `‖e^{-tσ}φ‖_q` and the boundary ratio at each time, in parallel.
    pub fn norms(&self, ts: &[S], q: S, guard: &WrapGuard) -> Result<Vec<(S, f64)>> {
        ts.par_iter()
            .map(|&t| {
                let f = self.at(t);
                let ratio = check_wraparound(&f, guard)?;
                Ok((lp_norm(&f, q)?, ratio))
            })
            .collect()
    }
}

fn check_times<S: Scalar>(ts: &[S]) -> Result<()> {
    if ts.len() < 2 {
        return Err(Error::argument("need at least two probe times"));
    }
    if ts.iter().any(|t| !(*t > S::zero() && t.is_finite())) {
        return Err(Error::argument("probe times must be positive"));
    }
    if ts.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::argument("probe times must increase"));
    }
    Ok(())
}

/// `C^∞` bump `height · exp(1 − 1/(1 − |x|²/a²))` supported in `|x| < a`.
pub fn smooth_bump<S: Scalar>(grid: GridSpec<S>, radius: S, height: S) -> Result<Field<S>> {
    if !(radius > S::zero()) {
        return Err(Error::domain("bump radius must be positive"));
    }
    Field::from_radial(grid, |r| {
        let u = r / radius;
        if u < S::one() {
            height * (S::one() - S::one() / (S::one() - u * u)).exp()
        } else {
            S::zero()
        }
    })
}

/// Decay of `‖e^{tL}φ‖_q` for a compactly supported `φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingFit<S> {
    pub t_values: Vec<S>,
    pub norms: Vec<S>,
    /// Index of the first time used in the fit.
    pub fit_from: usize,
    pub slope: S,
    /// `−(N/(2s))(1/r − 1/q)`.
    pub expected: S,
    pub max_boundary_ratio: f64,
}

/// Probe with the unit bump `φ` of radius 1.
pub fn smoothing_estimate_probe<S: Scalar>(
    grid: &GridSpec<S>,
    s: S,
    r: S,
    q: S,
    t_values: &[S],
) -> Result<SmoothingFit<S>> {
    let phi = smooth_bump(*grid, S::one(), S::one())?;
    smoothing_estimate_probe_with(&phi, s, r, q, t_values, &WrapGuard::default())
}

pub fn smoothing_estimate_probe_with<S: Scalar>(
    phi: &Field<S>,
    s: S,
    r: S,
    q: S,
    t_values: &[S],
    guard: &WrapGuard,
) -> Result<SmoothingFit<S>> {
    check_times(t_values)?;
    if !(r >= S::one() && q >= r) {
        return Err(Error::argument("exponents must satisfy 1 ≤ r ≤ q"));
    }
    if !(s > S::zero() && s < S::one()) {
        return Err(Error::domain("order s must lie in (0, 1)"));
    }
    if sup_norm(phi) == S::zero() {
        return Err(Error::domain("probe function is identically zero"));
    }
    let probe = SemigroupProbe::new(phi, &Symbol::Mixed { s })?;
    let rows = probe.norms(t_values, q, guard)?;
    let norms: Vec<S> = rows.iter().map(|r| r.0).collect();
    let fit_from = t_values.len() / 2;
    let slope = loglog_slope(&t_values[fit_from..], &norms[fit_from..])?;
    let n = S::from_usize_lossy(phi.grid().dim);
    let inv = |e: S| if e.is_infinite() { S::zero() } else { S::one() / e };
    Ok(SmoothingFit {
        t_values: t_values.to_vec(),
        norms,
        fit_from,
        slope,
        expected: -(n / (S::lit(2.0) * s)) * (inv(r) - inv(q)),
        max_boundary_ratio: rows.iter().fold(0.0, |m, r| m.max(r.1)),
    })
}

/// Normalized decay `t^{N/(2s)}‖e^{tL}u₀‖_∞` over a time window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTable<S> {
    pub t_values: Vec<S>,
    pub sup_norms: Vec<S>,
    pub normalized: Vec<S>,
    pub c1: S,
    pub c2: S,
    pub band_ratio: S,
    /// Log–log slope of the sup norm over the whole window.
    pub slope: S,
    pub max_boundary_ratio: f64,
}

pub fn decay_bounds_probe<S: Scalar>(s: S, u0: &Field<S>, t_values: &[S]) -> Result<DecayTable<S>> {
    decay_bounds_probe_with(s, u0, t_values, &WrapGuard::default())
}

pub fn decay_bounds_probe_with<S: Scalar>(
    s: S,
    u0: &Field<S>,
    t_values: &[S],
    guard: &WrapGuard,
) -> Result<DecayTable<S>> {
    check_times(t_values)?;
    if !(s > S::zero() && s < S::one()) {
        return Err(Error::domain("order s must lie in (0, 1)"));
    }
    if u0.values().iter().any(|v| *v < S::zero()) {
        return Err(Error::domain("initial data must be nonnegative"));
    }
    if sup_norm(u0) == S::zero() {
        return Err(Error::domain("initial data must not vanish identically"));
    }
    let probe = SemigroupProbe::new(u0, &Symbol::Mixed { s })?;
    let rows = probe.norms(t_values, S::infinity(), guard)?;
    let sup_norms: Vec<S> = rows.iter().map(|r| r.0).collect();
    let e = S::from_usize_lossy(u0.grid().dim) / (S::lit(2.0) * s);
    let normalized: Vec<S> = t_values.iter().zip(&sup_norms).map(|(t, n)| t.powf(e) * *n).collect();
    let c1 = normalized.iter().copied().fold(S::infinity(), S::min);
    let c2 = normalized.iter().copied().fold(S::zero(), S::max);
    Ok(DecayTable {
        t_values: t_values.to_vec(),
        slope: loglog_slope(t_values, &sup_norms)?,
        sup_norms,
        normalized,
        c1,
        c2,
        band_ratio: c2 / c1,
        max_boundary_ratio: rows.iter().fold(0.0, |m, r| m.max(r.1)),
    })
}

/// Convex function `G` in the inequality `(−Δ)^s G(φ) ≤ G′(φ)(−Δ)^s φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexFunction<S> {
    Linear,
    Square,
    /// `|x|^m` with `m ≥ 2`.
    Power { m: S },
    Exp,
}

impl<S: Scalar> ConvexFunction<S> {
    pub fn value(&self, x: S) -> S {
        match *self {
            Self::Linear => x,
            Self::Square => x * x,
            Self::Power { m } => x.abs().powf(m),
            Self::Exp => x.exp(),
        }
    }

    pub fn derivative(&self, x: S) -> S {
        match *self {
            Self::Linear => S::one(),
            Self::Square => S::lit(2.0) * x,
            Self::Power { m } => m * x.abs().powf(m - S::one()) * x.signum(),
            Self::Exp => x.exp(),
        }
    }
}

/// Largest value of `(−Δ)^s G(φ) − G′(φ)(−Δ)^s φ` over the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub max_violation: f64,
    /// Larger of the sup norms of the two sides.
    pub scale: f64,
    pub pass: bool,
}

pub fn convexity_inequality_check<S: Scalar>(
    s: S,
    phi: &Field<S>,
    g: ConvexFunction<S>,
) -> Result<ConvexityReport> {
    if !(s > S::zero() && s <= S::one()) {
        return Err(Error::domain("order s must lie in (0, 1]"));
    }
    if let ConvexFunction::Power { m } = g {
        if !(m >= S::lit(2.0)) {
            return Err(Error::domain("power must be at least 2"));
        }
    }
    let sup = sup_norm(phi);
    let touches = phi
        .values()
        .iter()
        .enumerate()
        .any(|(idx, v)| phi.grid().cells_to_boundary(idx) < 2 && v.abs() > S::lit(1e-12) * sup);
    if touches {
        return Err(Error::domain("φ does not vanish near the periodic boundary"));
    }
    let spectral = Spectral::new(*phi.grid())?;
    let frac = spectral.symbol_values(&Symbol::Fractional { s });
    let lhs = spectral.apply_multiplier(&phi.map(|v| g.value(v)), &frac)?;
    let lap_phi = spectral.apply_multiplier(phi, &frac)?;
    let rhs = phi.map(|v| g.derivative(v)).product(&lap_phi)?;
    let mut worst = f64::NEG_INFINITY;
    for (a, b) in lhs.values().iter().zip(rhs.values()) {
        worst = worst.max((*a - *b).as_f64());
    }
    let scale = sup_norm(&lhs).as_f64().max(sup_norm(&rhs).as_f64());
    Ok(ConvexityReport {
        max_violation: worst,
        scale,
        pass: worst <= 1e-6 * scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(m: usize, l: f64) -> GridSpec<f64> {
        GridSpec::<f64>::new(1, l, m).unwrap()
    }

    #[test]
    fn guard_trips_on_wide_data() {
        let g = grid(128, 4.0);
        let f = Field::from_fn(g, |x| (-x[0] * x[0] / 8.0).exp()).unwrap();
        assert!(matches!(check_wraparound(&f, &WrapGuard::default()), Err(Error::DomainTooSmall(_))));
        let narrow = Field::from_fn(g, |x| (-x[0] * x[0] * 4.0).exp()).unwrap();
        assert!(check_wraparound(&narrow, &WrapGuard::default()).unwrap() < 1e-20);
    }

    #[test]
    fn probe_time_validation() {
        let g = grid(256, 50.0);
        assert!(smoothing_estimate_probe(&g, 0.5, 1.0, 2.0, &[1.0]).is_err());
        assert!(smoothing_estimate_probe(&g, 0.5, 1.0, 2.0, &[2.0, 1.0]).is_err());
        assert!(smoothing_estimate_probe(&g, 0.5, 2.0, 1.0, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn equal_exponents_give_flat_slope_target() {
        let g = grid(1024, 200.0);
        let ts = crate::fit::geometric_points(0.5, 2.0, 6);
        let fit = smoothing_estimate_probe(&g, 0.5, 2.0, 2.0, &ts).unwrap();
        assert_eq!(fit.expected, 0.0);
        assert!(fit.norms.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn decay_rejects_bad_data() {
        let g = grid(256, 50.0);
        assert!(decay_bounds_probe(0.5, &Field::zeros(g), &[1.0, 2.0]).is_err());
        let neg = Field::from_fn(g, |x| -(-x[0] * x[0]).exp()).unwrap();
        assert!(decay_bounds_probe(0.5, &neg, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn convexity_linear_is_equality() {
        let g = grid(512, 20.0);
        let phi = smooth_bump(g, 3.0, 1.0).unwrap();
        let rep = convexity_inequality_check(0.5, &phi, ConvexFunction::Linear).unwrap();
        assert!(rep.max_violation.abs() < 1e-14 && rep.pass);
    }

    #[test]
    fn convexity_square_and_power() {
        let g = grid(512, 20.0);
        let phi = smooth_bump(g, 3.0, 1.0).unwrap();
        for g_fn in [ConvexFunction::Square, ConvexFunction::Power { m: 4.0 }, ConvexFunction::Exp] {
            let rep = convexity_inequality_check(0.5, &phi, g_fn).unwrap();
            assert!(rep.pass, "{g_fn:?}: {rep:?}");
        }
    }

    #[test]
    fn convexity_rejects_boundary_support() {
        let g = grid(128, 5.0);
        let phi = Field::constant(g, 1.0);
        assert!(convexity_inequality_check(0.5, &phi, ConvexFunction::Square).is_err());
        let bump = smooth_bump(g, 2.0, 1.0).unwrap();
        assert!(convexity_inequality_check(0.5, &bump, ConvexFunction::Power { m: 1.5 }).is_err());
    }
}
