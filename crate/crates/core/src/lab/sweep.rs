//! Cartesian parameter sweeps over evolve runs.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SweepConfig;
use crate::criteria::{forced_exponent, fujita_exponent};
use crate::duhamel::{evolve_with, RunVerdict, Trajectory};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One combination of axis values, in axis-name order.
pub type Tuple<S> = BTreeMap<String, S>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow<S> {
    pub index: usize,
    pub p: S,
    pub s: S,
    pub gamma: S,
    pub b: S,
    pub rho: S,
    pub amplitude: Option<S>,
    pub verdict: String,
    pub detection_time: Option<S>,
    pub final_sup_norm: S,
    pub final_l1_norm: S,
    pub p_f: Option<S>,
    pub p_star: Option<S>,
    pub boundary_fujita: bool,
    pub boundary_forced: bool,
    pub max_boundary_ratio: f64,
    #[serde(skip)]
    pub trajectory: Option<Trajectory<S>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skip<S> {
    pub index: usize,
    pub tuple: Tuple<S>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult<S> {
    pub tuples: usize,
    pub rows: Vec<SweepRow<S>>,
    pub skips: Vec<Skip<S>>,
}

/// Cartesian product of the axes; the last axis varies fastest. No axes
/// give a single empty tuple.
pub fn expand_axes<S: Scalar>(axes: &BTreeMap<String, Vec<S>>) -> Vec<Tuple<S>> {
    let mut out = vec![Tuple::new()];
    for (name, values) in axes {
        out = out
            .into_iter()
            .flat_map(|t| {
                values.iter().map(move |v| {
                    let mut t = t.clone();
                    t.insert(name.clone(), *v);
                    t
                })
            })
            .collect();
    }
    out
}

fn close<S: Scalar>(a: S, b: S) -> bool {
    (a - b).abs() <= S::lit(1e-12) * S::one().max(b.abs())
}

fn run_tuple<S: Scalar>(config: &SweepConfig<S>, index: usize, tuple: &Tuple<S>) -> std::result::Result<SweepRow<S>, Skip<S>> {
    let skip = |reason: String| Skip {
        index,
        tuple: tuple.clone(),
        reason,
    };
    let mut problem = config.fixed.clone();
    for (name, &v) in tuple {
        match name.as_str() {
            "p" => problem.p = v,
            "s" => problem.s = v,
            "gamma" => problem.gamma = v,
            "b" => problem.b = v,
            "rho" => problem.rho = v,
            "amplitude" => problem.u0 = problem.u0.with_amplitude(v),
            other => return Err(skip(format!("unknown axis {other:?}"))),
        }
    }
    let spec = problem.to_spec().map_err(|e| skip(e.to_string()))?;
    let traj = evolve_with(&spec, &config.tgrid, &config.options).map_err(|e| skip(format!("evolve: {e}")))?;
    let n = spec.grid.dim;
    let p_f = fujita_exponent(n, spec.s, problem.gamma).ok();
    let p_star = forced_exponent(n, spec.s, spec.b, problem.gamma, spec.rho).ok();
    let last = *traj.rows.last().expect("trajectory has rows");
    let detection_time = match traj.verdict {
        RunVerdict::BlowUp { time, .. } => Some(time),
        _ => None,
    };
    Ok(SweepRow {
        index,
        p: spec.p,
        s: spec.s,
        gamma: problem.gamma,
        b: spec.b,
        rho: spec.rho,
        amplitude: spec.u0.amplitude(),
        verdict: traj.verdict.kind_name().into(),
        detection_time,
        final_sup_norm: last.sup_norm,
        final_l1_norm: last.l1_norm,
        boundary_fujita: p_f.is_some_and(|v| close(spec.p, v)),
        boundary_forced: p_star.is_some_and(|v| close(spec.p, v)),
        p_f,
        p_star,
        max_boundary_ratio: traj.max_boundary_ratio,
        trajectory: Some(traj),
    })
}

/// Runs every tuple on the rayon pool. Rows come back in tuple order and
/// every tuple ends up either as a row or as a logged skip.
pub fn run_sweep<S: Scalar>(config: &SweepConfig<S>) -> Result<SweepResult<S>> {
    config.validate()?;
    let tuples = expand_axes(&config.axes);
    let outcomes: Vec<_> = tuples
        .par_iter()
        .enumerate()
        .map(|(i, t)| run_tuple(config, i, t))
        .collect();
    let mut rows = Vec::new();
    let mut skips = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => rows.push(r),
            Err(s) => skips.push(s),
        }
    }
    Ok(SweepResult {
        tuples: tuples.len(),
        rows,
        skips,
    })
}

pub const SWEEP_COLUMNS: &str = "index,p,s,gamma,b,rho,amplitude,verdict,detection_time,final_sup_norm,final_l1_norm,p_f,p_star,boundary_fujita,boundary_forced,max_boundary_ratio";

fn opt<S: Scalar>(v: Option<S>) -> String {
    v.map(|x| format!("{:.16e}", x.as_f64())).unwrap_or_default()
}

/// Aggregate CSV text: a `#` column description, one `# skip` line per
/// skipped tuple, the header and the rows.
pub fn sweep_csv<S: Scalar>(result: &SweepResult<S>) -> String {
    let mut out = String::from(
        "# columns: row index, exponent p, order s, time exponent gamma, weight b, forcing exponent rho, \
         data amplitude, verdict kind, blow-up detection time, final sup norm, final L1 norm, Fujita exponent, \
         forced exponent, p equals p_F, p equals p*, largest boundary-to-peak ratio\n",
    );
    for s in &result.skips {
        let tuple: Vec<String> = s.tuple.iter().map(|(k, v)| format!("{k}={:.16e}", v.as_f64())).collect();
        out.push_str(&format!("# skip {} [{}]: {}\n", s.index, tuple.join(" "), s.reason.replace('\n', " ")));
    }
    out.push_str(SWEEP_COLUMNS);
    out.push('\n');
    for r in &result.rows {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{},{:.16e},{:.16e},{},{},{},{},{:.16e}\n",
            r.index,
            r.p.as_f64(),
            r.s.as_f64(),
            r.gamma.as_f64(),
            r.b.as_f64(),
            r.rho.as_f64(),
            opt(r.amplitude),
            r.verdict,
            opt(r.detection_time),
            r.final_sup_norm.as_f64(),
            r.final_l1_norm.as_f64(),
            opt(r.p_f),
            opt(r.p_star),
            r.boundary_fujita,
            r.boundary_forced,
            r.max_boundary_ratio
        ));
    }
    out
}

pub fn write_sweep_csv<S: Scalar>(result: &SweepResult<S>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, sweep_csv(result)).map_err(|e| Error::io(path, e))
}
