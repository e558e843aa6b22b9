//! Integral conditions evaluated on simulated linear evolutions.
//!
//! Blow-up: `(p−1)‖e^{t₀L}u₀‖_∞^{p−1} ∫₀^{t₀} h ≥ 1`.
//! Global existence: `∫₀^∞ h(τ)‖e^{τL}v₀‖_∞^{p−1} dτ < 1`, split at `T` into a
//! simulated head and a tail bounded through the decay band of the semigroup.

use serde::{Deserialize, Serialize};

use super::fujita_exponent;
use crate::error::{Error, Result};
use crate::fit::geometric_points;
use crate::kernels::Symbol;
use crate::quad::{integrate, integrate_from_zero, QuadConfig};
use crate::rvf::karamata::karamata_tail_ratio;
use crate::rvf::CoefficientH;
use crate::scalar::Scalar;
use crate::spectral::{check_wraparound, sup_norm, Field, SemigroupProbe, WrapGuard};

fn check_data<S: Scalar>(u0: &Field<S>) -> Result<()> {
    if u0.values().iter().any(|v| *v < S::zero()) {
        return Err(Error::domain("data must be nonnegative"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupCertificate<S> {
    pub t0: S,
    pub value: S,
    /// `‖e^{t₀L}u₀‖_∞`.
    pub sup_norm: S,
    /// `∫₀^{t₀} h`.
    pub h_integral: S,
    pub satisfied: bool,
}

fn blowup_from_norm<S: Scalar>(p: S, t0: S, sup: S, h: &CoefficientH<S>) -> Result<BlowupCertificate<S>> {
    let h_integral = h.integral(S::zero(), t0).map_err(|e| match e {
        Error::Domain(m) => Error::Numeric {
            message: m,
            estimate: f64::NAN,
            error: f64::NAN,
            evaluations: 0,
        },
        other => other,
    })?;
    let value = (p - S::one()) * sup.powf(p - S::one()) * h_integral;
    Ok(BlowupCertificate {
        t0,
        value,
        sup_norm: sup,
        h_integral,
        satisfied: value >= S::one(),
    })
}

/// Evaluates the blow-up condition at `t₀`.
pub fn blowup_certificate<S: Scalar>(
    u0: &Field<S>,
    s: S,
    h: &CoefficientH<S>,
    p: S,
    t0: S,
) -> Result<BlowupCertificate<S>> {
    Ok(blowup_certificate_scan(u0, s, h, p, &[t0])?.remove(0))
}

/// Evaluates the blow-up condition at every `t₀` from one forward transform.
pub fn blowup_certificate_scan<S: Scalar>(
    u0: &Field<S>,
    s: S,
    h: &CoefficientH<S>,
    p: S,
    t0s: &[S],
) -> Result<Vec<BlowupCertificate<S>>> {
    check_data(u0)?;
    if sup_norm(u0) == S::zero() {
        return Err(Error::domain("data must not vanish identically"));
    }
    if !(p > S::one()) {
        return Err(Error::domain("p > 1 is required"));
    }
    if t0s.iter().any(|t| !(*t > S::zero())) {
        return Err(Error::domain("t₀ must be positive"));
    }
    let probe = SemigroupProbe::new(u0, &Symbol::Mixed { s })?;
    t0s.iter()
        .map(|&t0| blowup_from_norm(p, t0, sup_norm(&probe.at(t0)), h))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlobalCertificateOptions {
    /// Relative tolerance of the head quadrature.
    pub rel_tol: f64,
    /// The band constant is sampled on `[T, window·T]`.
    pub band_window: f64,
    pub band_samples: usize,
    /// Multiplies the empirical band constant.
    pub safety_factor: f64,
    pub wrap_guard: WrapGuard,
}

impl Default for GlobalCertificateOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            band_window: 16.0,
            band_samples: 9,
            safety_factor: 2.0,
            wrap_guard: WrapGuard::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalCertificate<S> {
    pub t_split: S,
    pub head: S,
    pub head_error: S,
    pub head_evaluations: usize,
    pub tail_bound: S,
    /// Largest `t^{N/(2s)}‖e^{tL}v₀‖_∞` on the band window.
    pub c2: S,
    /// `safety · c₂^{p−1}`.
    pub tail_constant: S,
    pub tail_integral: S,
    pub total: S,
    pub satisfied: bool,
    /// `p = p_F`, where the dichotomy is silent.
    pub boundary: bool,
    pub max_boundary_ratio: f64,
}

pub fn global_certificate<S: Scalar>(
    v0: &Field<S>,
    s: S,
    h: &CoefficientH<S>,
    p: S,
    t_split: S,
) -> Result<GlobalCertificate<S>> {
    global_certificate_with(v0, s, h, p, t_split, &GlobalCertificateOptions::default())
}

pub fn global_certificate_with<S: Scalar>(
    v0: &Field<S>,
    s: S,
    h: &CoefficientH<S>,
    p: S,
    t_split: S,
    opts: &GlobalCertificateOptions,
) -> Result<GlobalCertificate<S>> {
    check_data(v0)?;
    let n = v0.grid().dim;
    let p_f = fujita_exponent(n, s, h.gamma)?;
    if !(p >= p_f) {
        return Err(Error::domain(format!(
            "p = {} is below the Fujita exponent {}: the tail diverges and every nonnegative solution blows up",
            p.as_f64(),
            p_f.as_f64()
        )));
    }
    let decay = S::from_usize_lossy(n) * (p - S::one()) / (S::lit(2.0) * s);
    let at_fujita = p == p_f;
    if !(t_split > S::zero()) {
        return Err(Error::domain("split time must be positive"));
    }
    let zero = GlobalCertificate {
        t_split,
        head: S::zero(),
        head_error: S::zero(),
        head_evaluations: 0,
        tail_bound: S::zero(),
        c2: S::zero(),
        tail_constant: S::zero(),
        tail_integral: S::zero(),
        total: S::zero(),
        satisfied: true,
        boundary: at_fujita,
        max_boundary_ratio: 0.0,
    };
    if sup_norm(v0) == S::zero() {
        return Ok(zero);
    }
    let probe = SemigroupProbe::new(v0, &Symbol::Mixed { s })?;
    let pm1 = p - S::one();
    let integrand = |t: S| match h.eval(t) {
        Ok(hv) => hv * sup_norm(&probe.at(t)).powf(pm1),
        Err(_) => S::nan(),
    };
    let cfg = QuadConfig::with_rel_tol(opts.rel_tol);
    let head = if h.gamma < S::zero() {
        integrate_from_zero(integrand, t_split, &cfg)?
    } else {
        integrate(integrand, S::zero(), t_split, &cfg)?
    };

    let ts = geometric_points(t_split, t_split * S::lit(opts.band_window), opts.band_samples.max(2));
    let nd = S::from_usize_lossy(n) / (S::lit(2.0) * s);
    let mut c2 = S::zero();
    let mut max_ratio = 0.0f64;
    for &t in &ts {
        let f = probe.at(t);
        max_ratio = max_ratio.max(check_wraparound(&f, &opts.wrap_guard)?);
        c2 = c2.max(t.powf(nd) * sup_norm(&f));
    }
    let tail_constant = S::lit(opts.safety_factor) * c2.powf(pm1);
    let tail_integral = match h.ell.as_constant() {
        // the tail integrand decays like 1/τ
        _ if at_fujita => S::infinity(),
        Some(c) => {
            let e = h.gamma - decay + S::one();
            -c * t_split.powf(e) / e
        }
        None => {
            let f = |t: S| h.eval(t).map(|v| v * t.powf(-decay)).unwrap_or(S::nan());
            karamata_tail_ratio(f, t_split)?.integral
        }
    };
    let tail_bound = tail_constant * tail_integral;
    let total = head.value + tail_bound;
    Ok(GlobalCertificate {
        head: head.value,
        head_error: head.abs_error,
        head_evaluations: head.evaluations,
        tail_bound,
        c2,
        tail_constant,
        tail_integral,
        total,
        satisfied: total < S::one(),
        max_boundary_ratio: max_ratio,
        ..zero
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{smooth_bump, GridSpec};

    #[test]
    fn constant_data_examples() {
        let g = GridSpec::<f64>::new(1, 10.0, 64).unwrap();
        let one = Field::constant(g, 1.0);
        let h = CoefficientH::power(0.0);
        let c = blowup_certificate(&one, 0.5, &h, 2.0, 1.0).unwrap();
        assert!((c.value - 1.0).abs() < 1e-14 && c.satisfied);
        let c = blowup_certificate(&one, 0.5, &h, 2.0, 0.5).unwrap();
        assert!((c.value - 0.5).abs() < 1e-14 && !c.satisfied);
    }

    #[test]
    fn blowup_rejects_bad_data() {
        let g = GridSpec::<f64>::new(1, 10.0, 64).unwrap();
        let h = CoefficientH::power(0.0);
        assert!(blowup_certificate(&Field::zeros(g), 0.5, &h, 2.0, 1.0).is_err());
        assert!(blowup_certificate(&Field::constant(g, -1.0), 0.5, &h, 2.0, 1.0).is_err());
    }

    #[test]
    fn global_zero_data_is_satisfied() {
        let g = GridSpec::<f64>::new(1, 10.0, 64).unwrap();
        let c = global_certificate(&Field::zeros(g), 0.5, &CoefficientH::power(0.0), 3.0, 1.0).unwrap();
        assert_eq!(c.total, 0.0);
        assert!(c.satisfied);
    }

    #[test]
    fn global_rejects_subcritical() {
        let g = GridSpec::<f64>::new(1, 10.0, 64).unwrap();
        let bump = smooth_bump(g, 1.0, 1.0).unwrap();
        let e = global_certificate(&bump, 0.5, &CoefficientH::power(0.0), 1.5, 1.0).unwrap_err();
        assert!(matches!(e, Error::Domain(_)));
    }

    #[test]
    fn fujita_boundary_is_flagged() {
        let g = GridSpec::<f64>::new(1, 2048.0, 8192).unwrap();
        let bump = smooth_bump(g, 1.0, 1e-3).unwrap();
        let c = global_certificate(&bump, 0.5, &CoefficientH::power(0.0), 2.0, 1.0).unwrap();
        assert!(c.boundary && !c.satisfied && c.total.is_infinite());
    }

    #[test]
    fn tail_closed_form_matches_quadrature() {
        let g = GridSpec::<f64>::new(1, 2048.0, 8192).unwrap();
        let bump = smooth_bump(g, 1.0, 1.0).unwrap();
        let h = CoefficientH::power(0.5);
        let a = global_certificate(&bump, 0.5, &h, 4.0, 2.0).unwrap();
        let tab = crate::rvf::Tabulated::new(vec![(1e-6, 1.0), (1e12, 1.0)]).unwrap();
        let h_tab = CoefficientH::new(0.5, crate::rvf::SlowlyVaryingSpec::Tabulated(tab));
        let b = global_certificate(&bump, 0.5, &h_tab, 4.0, 2.0).unwrap();
        assert!((a.tail_integral - b.tail_integral).abs() < 1e-6 * a.tail_integral);
        assert!((a.head - b.head).abs() < 1e-5 * a.head);
    }
}
