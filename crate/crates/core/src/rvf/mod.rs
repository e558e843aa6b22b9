//! Regularly and slowly varying functions.
//!
//! A time weight `h(t) = t^γ ℓ(t)` is described by a [`CoefficientH`], whose
//! slowly varying factor is one of the closed-form kinds of
//! [`SlowlyVaryingSpec`], a user supplied representation
//! `ℓ(x) = c(x) exp(∫_a^x ε(t)/t dt)`, or a table loaded from CSV.

pub mod karamata;

use std::fmt;
use std::path::Path;
use std::sync::{Arc, Mutex};


use crate::error::{Error, Result};
use crate::quad::{integrate, QuadConfig};
use crate::scalar::Scalar;

pub use karamata::{
    asymp_int_ratio, index_estimate, karamata_head_ratio, karamata_tail_ratio,
    slow_variation_ratio_test, uniform_convergence_check, AsympIntRatio, IndexEstimate,
    KaramataRatio, RatioTable, UniformCheck,
};

/// Shared real-valued callable.
pub type ScalarFn<S> = Arc<dyn Fn(S) -> S + Send + Sync>;

/// Ingredients of the representation `ℓ(x) = c(x) exp(∫_a^x ε(t)/t dt)`.
#[derive(Clone)]
pub struct RepresentationSpec<S> {
    pub a_lower: S,
    pub c_fn: ScalarFn<S>,
    /// Limit of `c(x)` as `x → ∞`.
    pub c_limit: S,
    pub eps_fn: ScalarFn<S>,
}

impl<S: Scalar> RepresentationSpec<S> {
    pub fn new(
        a_lower: S,
        c_fn: impl Fn(S) -> S + Send + Sync + 'static,
        c_limit: S,
        eps_fn: impl Fn(S) -> S + Send + Sync + 'static,
    ) -> Result<Self> {
        let spec = Self {
            a_lower,
            c_fn: Arc::new(c_fn),
            c_limit,
            eps_fn: Arc::new(eps_fn),
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if !(self.a_lower > S::zero() && self.a_lower.is_finite()) {
            return Err(Error::domain("representation lower limit a must be positive"));
        }
        if !(self.c_limit > S::zero() && self.c_limit.is_finite()) {
            return Err(Error::domain("limit of c(x) must be finite and positive"));
        }
        // Spot-check boundedness on a geometric sweep of [a, a·10^12].
        let ten = S::lit(10.0);
        let mut x = self.a_lower;
        for _ in 0..13 {
            let c = (self.c_fn)(x);
            let e = (self.eps_fn)(x);
            if !(c > S::zero() && c.is_finite()) {
                return Err(Error::domain(format!("c({}) must be finite and positive", x.as_f64())));
            }
            if !e.is_finite() {
                return Err(Error::domain(format!("ε({}) must be finite", x.as_f64())));
            }
            x = x * ten;
        }
        Ok(())
    }
}

impl<S: fmt::Debug> fmt::Debug for RepresentationSpec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RepresentationSpec")
            .field("a_lower", &self.a_lower)
            .field("c_limit", &self.c_limit)
            .finish_non_exhaustive()
    }
}

/// A slowly varying function built from a [`RepresentationSpec`].
///
/// The exponent `∫_a^x ε(t)/t dt = ∫_{ln a}^{ln x} ε(e^u) du` is accumulated
/// over unit steps in `ln x`; completed steps are memoized so repeated
/// evaluations at large `x` stay cheap.
#[derive(Clone)]
pub struct Representation<S> {
    spec: RepresentationSpec<S>,
    checkpoints: Arc<Mutex<Vec<S>>>,
}

impl<S: Scalar> Representation<S> {
    fn new(spec: RepresentationSpec<S>) -> Self {
        Self {
            spec,
            checkpoints: Arc::new(Mutex::new(vec![S::zero()])),
        }
    }

    pub fn spec(&self) -> &RepresentationSpec<S> {
        &self.spec
    }

    fn log_integral(&self, x: S) -> Result<S> {
        let eps = self.spec.eps_fn.clone();
        let integrand = move |u: S| eps(u.exp());
        let cfg = QuadConfig::with_rel_tol(1e-10);
        let u0 = self.spec.a_lower.ln();
        let u = x.ln();
        if u <= u0 {
            return Ok(-integrate(&integrand, u, u0, &cfg)?.value);
        }
        let steps = (u - u0).floor().to_usize().unwrap_or(usize::MAX);
        let base = {
            let mut cache = self.checkpoints.lock().expect("checkpoint cache poisoned");
            while cache.len() <= steps {
                let k = cache.len() - 1;
                let lo = u0 + S::from_usize_lossy(k);
                let inc = integrate(&integrand, lo, lo + S::one(), &cfg)?.value;
                let last = cache[k];
                cache.push(last + inc);
            }
            cache[steps]
        };
        let lo = u0 + S::from_usize_lossy(steps);
        Ok(base + integrate(&integrand, lo, u, &cfg)?.value)
    }

    fn eval(&self, x: S) -> Result<S> {
        let c = (self.spec.c_fn)(x);
        Ok(c * self.log_integral(x)?.exp())
    }
}

/// Tabulated positive samples, interpolated linearly in `(ln t, ln ℓ)` and
/// held constant outside the sampled range.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated<S> {
    samples: Vec<(S, S)>,
}

impl<S: Scalar> Tabulated<S> {
    pub fn new(samples: Vec<(S, S)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::argument("tabulated function needs at least one sample"));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Data("tabulated abscissae must be strictly increasing".into()));
            }
        }
        for &(t, v) in &samples {
            if !(t > S::zero() && t.is_finite() && v > S::zero() && v.is_finite()) {
                return Err(Error::Data(format!(
                    "sample ({}, {}) must have positive finite t and value",
                    t.as_f64(),
                    v.as_f64()
                )));
            }
        }
        Ok(Self { samples })
    }

    /// Reads a two-column `t,value` CSV with a header row.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|source| Error::Csv {
                path: path.into(),
                source,
            })?;
        let mut samples = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|source| Error::Csv {
                path: path.into(),
                source,
            })?;
            if record.len() != 2 {
                return Err(Error::Data(format!(
                    "{}: expected two columns (t,value), found {}",
                    path.display(),
                    record.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Data(format!("{}: cannot parse {s:?}: {e}", path.display())))
            };
            samples.push((S::lit(parse(&record[0])?), S::lit(parse(&record[1])?)));
        }
        Self::new(samples)
    }

    pub fn samples(&self) -> &[(S, S)] {
        &self.samples
    }

    fn eval(&self, t: S) -> S {
        let first = self.samples[0];
        let last = self.samples[self.samples.len() - 1];
        if t <= first.0 {
            return first.1;
        }
        if t >= last.0 {
            return last.1;
        }
        let idx = self.samples.partition_point(|&(x, _)| x <= t);
        let (t0, v0) = self.samples[idx - 1];
        let (t1, v1) = self.samples[idx];
        let w = (t.ln() - t0.ln()) / (t1.ln() - t0.ln());
        (v0.ln() + w * (v1.ln() - v0.ln())).exp()
    }
}

/// Description of a slowly varying factor `ℓ`.
///
/// `LogPower(α)` is `(ln t)^α` for `t ≥ e` and `1` below, `SinLog` is
/// `2 + sin(ln t)` and `ExpSqrtLog` is `exp(√|ln t|)`.
#[derive(Clone)]
pub enum SlowlyVaryingSpec<S> {
    Constant(S),
    LogPower(S),
    SinLog,
    ExpSqrtLog,
    Representation(Representation<S>),
    Tabulated(Tabulated<S>),
}

impl<S: fmt::Debug> fmt::Debug for SlowlyVaryingSpec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Self::LogPower(a) => f.debug_tuple("LogPower").field(a).finish(),
            Self::SinLog => f.write_str("SinLog"),
            Self::ExpSqrtLog => f.write_str("ExpSqrtLog"),
            Self::Representation(r) => f.debug_tuple("Representation").field(&r.spec).finish(),
            Self::Tabulated(t) => f.debug_tuple("Tabulated").field(&t.samples.len()).finish(),
        }
    }
}

impl<S: Scalar> SlowlyVaryingSpec<S> {
    pub fn constant(value: S) -> Result<Self> {
        if !(value > S::zero() && value.is_finite()) {
            return Err(Error::domain("constant slowly varying factor must be positive"));
        }
        Ok(Self::Constant(value))
    }

    pub fn one() -> Self {
        Self::Constant(S::one())
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Constant(_) => "constant",
            Self::LogPower(_) => "log_power",
            Self::SinLog => "sin_log",
            Self::ExpSqrtLog => "exp_sqrt_log",
            Self::Representation(_) => "representation",
            Self::Tabulated(_) => "tabulated",
        }
    }

    /// Evaluates `ℓ(t)`; the result is finite and positive for `t > 0`.
    pub fn eval(&self, t: S) -> Result<S> {
        if !(t > S::zero()) || !t.is_finite() {
            return Err(Error::domain(format!(
                "slowly varying factor evaluated at non-positive t = {}",
                t.as_f64()
            )));
        }
        let value = match self {
            Self::Constant(c) => *c,
            Self::LogPower(alpha) => {
                if t <= S::E() {
                    S::one()
                } else {
                    t.ln().powf(*alpha)
                }
            }
            Self::SinLog => S::lit(2.0) + t.ln().sin(),
            Self::ExpSqrtLog => t.ln().abs().sqrt().exp(),
            Self::Representation(r) => r.eval(t)?,
            Self::Tabulated(tab) => tab.eval(t),
        };
        if !(value > S::zero() && value.is_finite()) {
            return Err(Error::domain(format!(
                "slowly varying factor is not finite and positive at t = {}",
                t.as_f64()
            )));
        }
        Ok(value)
    }

    /// `Some(c)` when the factor is identically the constant `c`.
    pub fn as_constant(&self) -> Option<S> {
        match self {
            Self::Constant(c) => Some(*c),
            _ => None,
        }
    }

    /// The value of `x ℓ'(x) / ℓ(x)`, which tends to zero for the
    /// differentiable slowly varying kinds.
    pub fn derivative_criterion(&self, x: S) -> Result<S> {
        if !(x > S::zero()) {
            return Err(Error::domain("derivative criterion needs x > 0"));
        }
        match self {
            Self::Constant(_) => Ok(S::zero()),
            Self::LogPower(alpha) => {
                if x < S::E() {
                    Ok(S::zero())
                } else if x == S::E() {
                    Err(Error::domain("LogPower has a corner at x = e"))
                } else {
                    Ok(*alpha / x.ln())
                }
            }
            Self::ExpSqrtLog => {
                let l = x.ln();
                if l == S::zero() {
                    Err(Error::domain("exp(√|ln x|) is not differentiable at x = 1"))
                } else {
                    Ok(l.signum() / (S::lit(2.0) * l.abs().sqrt()))
                }
            }
            other => Err(Error::UnsupportedKind(format!(
                "{} has no analytic derivative",
                other.kind_name()
            ))),
        }
    }
}

/// Builds the slowly varying function `c(x) exp(∫_a^x ε(t)/t dt)`.
pub fn make_from_representation<S: Scalar>(spec: RepresentationSpec<S>) -> Result<SlowlyVaryingSpec<S>> {
    spec.validate()?;
    Ok(SlowlyVaryingSpec::Representation(Representation::new(spec)))
}

/// Time coefficient `h(t) = t^γ ℓ(t)`.
#[derive(Debug, Clone)]
pub struct CoefficientH<S> {
    pub gamma: S,
    pub ell: SlowlyVaryingSpec<S>,
}

impl<S: Scalar> CoefficientH<S> {
    pub fn new(gamma: S, ell: SlowlyVaryingSpec<S>) -> Self {
        Self { gamma, ell }
    }

    /// `h(t) = t^γ`.
    pub fn power(gamma: S) -> Self {
        Self::new(gamma, SlowlyVaryingSpec::one())
    }

    /// Evaluates `t^γ ℓ(t)`.
    pub fn eval(&self, t: S) -> Result<S> {
        if !(t > S::zero()) {
            return Err(Error::domain(format!("h evaluated at non-positive t = {}", t.as_f64())));
        }
        let v = t.powf(self.gamma) * self.ell.eval(t)?;
        if !(v > S::zero() && v.is_finite()) {
            return Err(Error::domain(format!("h({}) is not finite and positive", t.as_f64())));
        }
        Ok(v)
    }

    /// `∫_{t0}^{t1} h(s) ds` for `0 <= t0 <= t1`, in closed form when `ℓ` is
    /// constant and by quadrature otherwise.
    pub fn integral(&self, t0: S, t1: S) -> Result<S> {
        if t0 < S::zero() || t1 < t0 {
            return Err(Error::domain("integral of h needs 0 <= t0 <= t1"));
        }
        if t0 == t1 {
            return Ok(S::zero());
        }
        if self.gamma <= -S::one() && t0 == S::zero() {
            return Err(Error::domain("h is not integrable at 0 for γ <= -1"));
        }
        if let Some(c) = self.ell.as_constant() {
            let g1 = self.gamma + S::one();
            return Ok(c * (t1.powf(g1) - t0.powf(g1)) / g1);
        }
        let f = |s: S| self.eval(s).unwrap_or(S::nan());
        let cfg = QuadConfig::default();
        Ok(crate::quad::integrate_nonneg(f, t0, t1, &cfg)?.value)
    }
}

/// Evaluates `h(t)`.
pub fn eval_h<S: Scalar>(h: &CoefficientH<S>, t: S) -> Result<S> {
    h.eval(t)
}
