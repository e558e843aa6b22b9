//! Critical exponents of the mixed problem and the computable sufficient
//! conditions for blow-up and for global existence.
//!
//! The exponent formulas are written over [`ExactField`], so they evaluate
//! in `f64` for everyday use and in `BigRational` when identities must hold
//! with zero residual.

mod certificates;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::ExactField;

pub use certificates::{
    blowup_certificate, blowup_certificate_scan, global_certificate, global_certificate_with,
    BlowupCertificate, GlobalCertificate, GlobalCertificateOptions,
};

fn dim<F: ExactField>(n: usize) -> Result<F> {
    if n == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    Ok(F::int(n as i64))
}

fn two<F: ExactField>() -> F {
    F::int(2)
}

/// `p_F = 1 + 2s(γ+1)/N`.
pub fn fujita_exponent<F: ExactField>(n: usize, s: F, gamma: F) -> Result<F> {
    let nf = dim::<F>(n)?;
    if !(s > F::zero() && s <= F::one()) {
        return Err(Error::domain("fujita_exponent needs 0 < s ≤ 1"));
    }
    if !(gamma > -F::one()) {
        return Err(Error::domain("fujita_exponent needs γ > −1"));
    }
    Ok(F::one() + two::<F>() * s * (gamma + F::one()) / nf)
}

/// Checks `0 ≤ b/(1+γ) < 2s < N`, naming the first violated inequality.
fn check_weight_chain<F: ExactField>(n: usize, s: &F, b: &F, gamma: &F) -> Result<()> {
    let nf = dim::<F>(n)?;
    if !(gamma.clone() > -F::one()) {
        return Err(Error::domain("γ > −1 is required"));
    }
    let ratio = b.clone() / (F::one() + gamma.clone());
    let two_s = two::<F>() * s.clone();
    if !(ratio >= F::zero()) {
        return Err(Error::domain("0 ≤ b/(1+γ) is violated"));
    }
    if !(ratio < two_s) {
        return Err(Error::domain("b/(1+γ) < 2s is violated"));
    }
    if !(two_s < nf) {
        return Err(Error::domain("2s < N is violated"));
    }
    Ok(())
}

/// `p* = (N − b − 2s(ρ−γ)) / (N − 2s(ρ+1))`, defined for `ρ ≤ 0` and
/// `0 ≤ b/(1+γ) < 2s < N`.
pub fn forced_exponent<F: ExactField>(n: usize, s: F, b: F, gamma: F, rho: F) -> Result<F> {
    if !(rho <= F::zero()) {
        return Err(Error::domain("ρ ≤ 0 is violated"));
    }
    check_weight_chain(n, &s, &b, &gamma)?;
    let nf = dim::<F>(n)?;
    let two_s = two::<F>() * s;
    let num = nf.clone() - b - two_s.clone() * (rho.clone() - gamma);
    let den = nf - two_s * (rho + F::one());
    if den == F::zero() {
        return Err(Error::domain("N − 2s(ρ+1) vanishes"));
    }
    Ok(num / den)
}

/// `(p_c, q_c)` with `p_c = N(p−1)/(2s(1+γ)−b)` and `q_c = N p_c/(N + 2s(ρ+1) p_c)`.
pub fn critical_lebesgue<F: ExactField>(n: usize, s: F, b: F, gamma: F, rho: F, p: F) -> Result<(F, F)> {
    let nf = dim::<F>(n)?;
    let d = two::<F>() * s.clone() * (F::one() + gamma) - b;
    if !(d > F::zero()) {
        return Err(Error::domain("2s(1+γ) − b must be positive"));
    }
    if !(p > F::one()) {
        return Err(Error::domain("p > 1 is required"));
    }
    if !(rho > -F::one()) {
        return Err(Error::domain("ρ > −1 is required"));
    }
    let pc = nf.clone() * (p - F::one()) / d;
    let den = nf.clone() + two::<F>() * s * (rho + F::one()) * pc.clone();
    if den == F::zero() {
        return Err(Error::domain("degenerate denominator in q_c"));
    }
    let qc = nf * pc.clone() / den;
    Ok((pc, qc))
}

/// Admissible interval for `1/r` and the exponent `μ` at its midpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RWindow<F> {
    /// Open interval `(lower, upper)` for `1/r`.
    pub lower: F,
    pub upper: F,
    pub empty: bool,
    /// `r` at the midpoint of the interval in `1/r`.
    pub r_mid: Option<F>,
    pub mu: Option<F>,
    /// `μ` from the `q_c` form of the expression.
    pub mu_alt: Option<F>,
    /// `(1−p)μ + 1 − N(p−1)/((2s(1+γ)−b) r)`.
    pub mu_residual: Option<F>,
    /// Whether `p ≤ (N − b + 2sγ)/(N − 2s)`.
    pub first_case: bool,
}

/// `μ = N/(2s(γ+1)−b) · (1/p_c − 1/r)` and the alternative form and residual.
pub fn mu_at<F: ExactField>(n: usize, s: F, b: F, gamma: F, rho: F, p: F, r_inv: F) -> Result<(F, F, F)> {
    let (pc, qc) = critical_lebesgue(n, s.clone(), b.clone(), gamma.clone(), rho.clone(), p.clone())?;
    let nf = dim::<F>(n)?;
    let d = two::<F>() * s.clone() * (gamma + F::one()) - b;
    let mu = nf.clone() / d.clone() * (F::one() / pc - r_inv.clone());
    let mu_alt = nf.clone() / d.clone() * (F::one() / qc - r_inv.clone())
        - two::<F>() * s * (rho + F::one()) / d.clone();
    let residual = (F::one() - p.clone()) * mu.clone() + F::one() - nf * r_inv * (p - F::one()) / d;
    Ok((mu, mu_alt, residual))
}

fn max<F: ExactField>(a: F, b: F) -> F {
    if a >= b {
        a
    } else {
        b
    }
}

fn min<F: ExactField>(a: F, b: F) -> F {
    if a <= b {
        a
    } else {
        b
    }
}

/// `(max{1/p_c + 2ρs/N, 1/(p p_c)}, min{1/p_c, (N−2s(ρ+1))/(Np)})`.
///
/// Requires `p ≥ p*`, `0 ≤ b/(1+γ) < 2s < N` and `−1 < ρ < 0`. Parameters
/// beyond the first case `p ≤ (N−b+2sγ)/(N−2s)` are still evaluated and
/// marked through [`RWindow::first_case`].
pub fn admissible_r_window<F: ExactField>(n: usize, s: F, b: F, gamma: F, rho: F, p: F) -> Result<RWindow<F>> {
    if !(rho > -F::one() && rho < F::zero()) {
        return Err(Error::domain("−1 < ρ < 0 is violated"));
    }
    let pstar = forced_exponent(n, s.clone(), b.clone(), gamma.clone(), rho.clone())?;
    if !(p >= pstar) {
        return Err(Error::domain("p ≥ p* is violated"));
    }
    let nf = dim::<F>(n)?;
    let two_s = two::<F>() * s.clone();
    let first_case =
        p <= (nf.clone() - b.clone() + two_s.clone() * gamma.clone()) / (nf.clone() - two_s.clone());
    let (pc, _) = critical_lebesgue(n, s.clone(), b.clone(), gamma.clone(), rho.clone(), p.clone())?;
    let inv_pc = F::one() / pc.clone();
    let lower = max(
        inv_pc.clone() + two_s.clone() * rho.clone() / nf.clone(),
        F::one() / (p.clone() * pc),
    );
    let upper = min(
        inv_pc,
        (nf.clone() - two_s * (rho.clone() + F::one())) / (nf * p.clone()),
    );
    let empty = !(lower < upper);
    let (r_mid, mu, mu_alt, mu_residual) = if empty {
        (None, None, None, None)
    } else {
        let mid = (lower.clone() + upper.clone()) / two::<F>();
        let (mu, alt, res) = mu_at(n, s, b, gamma, rho, p, mid.clone())?;
        (Some(F::one() / mid), Some(mu), Some(alt), Some(res))
    };
    Ok(RWindow {
        lower,
        upper,
        empty,
        r_mid,
        mu,
        mu_alt,
        mu_residual,
        first_case,
    })
}

/// All exponents defined for a parameter tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport<F> {
    pub n: usize,
    pub p: F,
    pub p_f: F,
    pub p_star: Option<F>,
    pub p_c: Option<F>,
    pub q_c: Option<F>,
    pub r_window: Option<RWindow<F>>,
    pub mu: Option<F>,
    /// `p = p_F`: the dichotomy is stated only for strict inequalities.
    pub boundary_fujita: bool,
    /// `p = p*`.
    pub boundary_forced: bool,
    /// Reasons for every undefined entry.
    pub notes: Vec<String>,
}

pub fn exponent_report<F: ExactField>(n: usize, s: F, b: F, gamma: F, rho: F, p: F) -> Result<ExponentReport<F>> {
    let p_f = fujita_exponent(n, s.clone(), gamma.clone())?;
    let mut notes = Vec::new();
    let p_star = match forced_exponent(n, s.clone(), b.clone(), gamma.clone(), rho.clone()) {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("p*: {e}"));
            None
        }
    };
    let (p_c, q_c) = match critical_lebesgue(n, s.clone(), b.clone(), gamma.clone(), rho.clone(), p.clone()) {
        Ok((a, c)) => (Some(a), Some(c)),
        Err(e) => {
            notes.push(format!("p_c, q_c: {e}"));
            (None, None)
        }
    };
    let r_window = match admissible_r_window(n, s, b, gamma, rho, p.clone()) {
        Ok(w) => Some(w),
        Err(e) => {
            notes.push(format!("r window: {e}"));
            None
        }
    };
    Ok(ExponentReport {
        n,
        boundary_fujita: p == p_f,
        boundary_forced: p_star.as_ref() == Some(&p),
        mu: r_window.as_ref().and_then(|w| w.mu.clone()),
        p,
        p_f,
        p_star,
        p_c,
        q_c,
        r_window,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::ratio(a, b)
    }

    #[test]
    fn fujita_examples() {
        assert_eq!(fujita_exponent(1, q(1, 2), q(0, 1)).unwrap(), q(2, 1));
        assert_eq!(fujita_exponent(2, q(1, 2), q(1, 1)).unwrap(), q(2, 1));
        assert_eq!(fujita_exponent(4, q(1, 1), q(0, 1)).unwrap(), q(3, 2));
        assert!(fujita_exponent(1, q(1, 2), q(-1, 1)).is_err());
        assert!(fujita_exponent(0, 0.5, 0.0).is_err());
    }

    #[test]
    fn forced_examples() {
        assert_eq!(forced_exponent(4, q(1, 1), q(0, 1), q(0, 1), q(-1, 2)).unwrap(), q(5, 3));
        assert_eq!(forced_exponent(2, q(1, 2), q(0, 1), q(0, 1), q(0, 1)).unwrap(), q(2, 1));
        assert_eq!(forced_exponent(2, q(1, 2), q(0, 1), q(0, 1), q(-1, 2)).unwrap(), q(5, 3));
        let e = forced_exponent(2, 0.5, 0.0, 0.0, 0.25).unwrap_err().to_string();
        assert!(e.contains("ρ ≤ 0"));
        let e = forced_exponent(1, 0.5, 0.0, 0.0, -0.5).unwrap_err().to_string();
        assert!(e.contains("2s < N"), "{e}");
        let e = forced_exponent(2, 0.5, 1.5, 0.0, -0.5).unwrap_err().to_string();
        assert!(e.contains("b/(1+γ) < 2s"));
    }

    #[test]
    fn remark_formula_for_classical_case() {
        // s = 1, b = γ = 0: p* = (N − 2ρ)/(N − 2ρ − 2)
        for n in 3..6usize {
            for rho in [q(-1, 2), q(-1, 4), q(0, 1)] {
                let nf = q(n as i64, 1);
                let expected = (nf.clone() - q(2, 1) * rho.clone()) / (nf - q(2, 1) * rho.clone() - q(2, 1));
                assert_eq!(forced_exponent(n, q(1, 1), q(0, 1), q(0, 1), rho).unwrap(), expected);
            }
        }
    }

    #[test]
    fn lebesgue_examples() {
        let (pc, qc) = critical_lebesgue(2, q(1, 2), q(0, 1), q(0, 1), q(-1, 2), q(3, 1)).unwrap();
        assert_eq!(pc, q(4, 1));
        assert_eq!(qc, q(2, 1));
        let (pc, _) = critical_lebesgue(1, q(1, 2), q(1, 2), q(1, 1), q(0, 1), q(2, 1)).unwrap();
        assert_eq!(pc, q(2, 3));
        assert!(critical_lebesgue(1, 0.5, 1.0, 0.0, 0.0, 2.0).is_err());
        assert!(critical_lebesgue(1, 0.5, 0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn worked_window() {
        let w = admissible_r_window(2, q(1, 2), q(0, 1), q(0, 1), q(-1, 2), q(3, 1)).unwrap();
        assert_eq!((w.lower.clone(), w.upper.clone()), (q(1, 12), q(1, 4)));
        assert!(!w.empty);
        assert_eq!(w.r_mid, Some(q(6, 1)));
        assert_eq!(w.mu, Some(q(1, 6)));
        assert_eq!(w.mu_alt, Some(q(1, 6)));
        assert_eq!(w.mu_residual, Some(q(0, 1)));
        assert!(!w.first_case);
        // r_lower = 4 exceeds p = 3
        assert!(q(1, 1) / w.upper > q(3, 1));
        let (mu, _, res) = mu_at(2, q(1, 2), q(0, 1), q(0, 1), q(-1, 2), q(3, 1), q(1, 6)).unwrap();
        assert_eq!(mu, q(1, 6));
        assert_eq!(res, q(0, 1));
    }

    #[test]
    fn window_preconditions() {
        assert!(admissible_r_window(2, 0.5, 0.0, 0.0, 0.0, 3.0).is_err());
        assert!(admissible_r_window(2, 0.5, 0.0, 0.0, -0.5, 1.5).is_err());
    }

    #[test]
    fn report_collects_notes() {
        let r = exponent_report(1, 0.5, 0.0, 0.0, -0.5, 2.0).unwrap();
        assert_eq!(r.p_f, 2.0);
        assert!(r.boundary_fujita);
        assert!(r.p_star.is_none() && r.r_window.is_none());
        assert_eq!(r.notes.len(), 2);
        assert_eq!(r.p_c, Some(1.0));
    }
}
