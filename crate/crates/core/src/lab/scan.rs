//! Bisection for the empirical blow-up/global transition in `p`.

use serde::{Deserialize, Serialize};

use crate::criteria::fujita_exponent;
use crate::duhamel::{evolve_with, DataDescriptor, EvolveOptions, ProblemSpec, RunVerdict, TimeGrid};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::GridSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "S: Scalar"))]
pub struct ScanConfig<S: Scalar> {
    pub s: S,
    pub gamma: S,
    pub amplitude: S,
    /// Profile of the data; its amplitude is replaced by `amplitude`.
    pub profile: DataDescriptor<S>,
    pub grid: GridSpec<S>,
    pub tgrid: TimeGrid<S>,
    pub p_range: (S, S),
    /// Target width of the bracket.
    pub refinement: S,
    pub options: EvolveOptions<S>,
}

impl<S: Scalar> Default for ScanConfig<S> {
    fn default() -> Self {
        Self {
            s: S::lit(0.5),
            gamma: S::zero(),
            amplitude: S::lit(0.3),
            profile: DataDescriptor::Gaussian {
                amplitude: S::one(),
                width: S::lit(2.0),
            },
            grid: GridSpec::new(1, S::lit(16384.0), 32768).expect("valid grid"),
            tgrid: TimeGrid::uniform(S::lit(200.0), 2000),
            p_range: (S::lit(1.6), S::lit(2.4)),
            refinement: S::lit(0.2),
            options: EvolveOptions::default(),
        }
    }
}

/// One evaluated exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanProbe<S> {
    pub p: S,
    pub verdict: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ScanStatus {
    Bracketed,
    Undetermined { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport<S> {
    /// Largest exponent seen to blow up.
    pub p_lo: S,
    /// Smallest exponent seen to stay global.
    pub p_hi: S,
    pub width: S,
    pub p_f: S,
    pub status: ScanStatus,
    pub probes: Vec<ScanProbe<S>>,
}

impl<S: Scalar> ScanReport<S> {
    /// Both ends lie within `tol` of `p_F`.
    pub fn brackets_within(&self, tol: S) -> bool {
        self.status == ScanStatus::Bracketed && (self.p_lo - self.p_f).abs() <= tol && (self.p_hi - self.p_f).abs() <= tol
    }
}

enum Outcome {
    Blow,
    Global,
    Other(String),
}

fn probe<S: Scalar>(cfg: &ScanConfig<S>, p: S, probes: &mut Vec<ScanProbe<S>>) -> Result<Outcome> {
    let spec = ProblemSpec::unforced(cfg.s, p, cfg.gamma, cfg.profile.with_amplitude(cfg.amplitude), cfg.grid);
    let (outcome, verdict, detail) = match evolve_with(&spec, &cfg.tgrid, &cfg.options) {
        Ok(traj) => match &traj.verdict {
            RunVerdict::BlowUp { time, .. } => (
                Outcome::Blow,
                "BlowUp",
                format!("t = {:.6e}, boundary ratio {:.3e}", time.as_f64(), traj.final_boundary_ratio),
            ),
            RunVerdict::Global { final_sup_norm, .. } => (
                Outcome::Global,
                "Global",
                format!("final sup {:.6e}", final_sup_norm.as_f64()),
            ),
            RunVerdict::Undetermined { reason } => (Outcome::Other(reason.clone()), "Undetermined", reason.clone()),
        },
        Err(e) if e.is_numeric() => (Outcome::Other(e.to_string()), "Error", e.to_string()),
        Err(e) => return Err(e),
    };
    probes.push(ScanProbe {
        p,
        verdict: verdict.into(),
        detail,
    });
    Ok(outcome)
}

/// Brackets the transition exponent by bisection, with verdicts of
/// [`evolve_with`] as the predicate. At least one bisection step is taken.
/// Endpoints that do not bracket, or an inconclusive verdict, end the scan
/// with an `Undetermined` status.
pub fn fujita_transition_scan<S: Scalar>(cfg: &ScanConfig<S>) -> Result<ScanReport<S>> {
    let (mut lo, mut hi) = cfg.p_range;
    if !(lo > S::one() && hi > lo) {
        return Err(Error::domain("p range must satisfy 1 < p_lo < p_hi"));
    }
    if !(cfg.refinement > S::zero()) {
        return Err(Error::domain("refinement must be positive"));
    }
    if cfg.profile.is_zero() || !(cfg.amplitude > S::zero()) {
        return Err(Error::domain("the scan needs positive data"));
    }
    let p_f = fujita_exponent(cfg.grid.dim, cfg.s, cfg.gamma)?;
    let mut probes = Vec::new();
    let undetermined = |lo: S, hi: S, reason: String, probes: Vec<ScanProbe<S>>| ScanReport {
        p_lo: lo,
        p_hi: hi,
        width: hi - lo,
        p_f,
        status: ScanStatus::Undetermined { reason },
        probes,
    };
    match probe(cfg, lo, &mut probes)? {
        Outcome::Blow => {}
        Outcome::Global => {
            let r = format!("lower end p = {} is Global; verdicts are not monotone over the range", lo.as_f64());
            return Ok(undetermined(lo, hi, r, probes));
        }
        Outcome::Other(why) => return Ok(undetermined(lo, hi, format!("lower end: {why}"), probes)),
    }
    match probe(cfg, hi, &mut probes)? {
        Outcome::Global => {}
        Outcome::Blow => {
            let r = format!("upper end p = {} blows up; the range does not bracket", hi.as_f64());
            return Ok(undetermined(lo, hi, r, probes));
        }
        Outcome::Other(why) => return Ok(undetermined(lo, hi, format!("upper end: {why}"), probes)),
    }
    loop {
        let mid = (lo + hi) / S::lit(2.0);
        match probe(cfg, mid, &mut probes)? {
            Outcome::Blow => lo = mid,
            Outcome::Global => hi = mid,
            Outcome::Other(why) => {
                let r = format!("p = {}: {why}", mid.as_f64());
                return Ok(undetermined(lo, hi, r, probes));
            }
        }
        if hi - lo <= cfg.refinement {
            break;
        }
    }
    Ok(ScanReport {
        p_lo: lo,
        p_hi: hi,
        width: hi - lo,
        p_f,
        status: ScanStatus::Bracketed,
        probes,
    })
}
