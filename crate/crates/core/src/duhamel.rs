//! Exponential-Euler integration of the mild formulation
//!
//! `u(t) = e^{tL}u₀ + ∫₀ᵗ e^{(t−τ)L}[h(τ)|x|^{-b}|u(τ)|^p + τ^ρ w] dτ`
//!
//! on a periodic grid, and classification of the resulting trajectories.
//! The scalar weights `h` and `τ^ρ` are integrated exactly over each step, so
//! singular weights at `t = 0` cost nothing extra; only the nonlinearity is
//! frozen at the left end of the step.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::loglog_slope;
use crate::kernels::Symbol;
use crate::rvf::CoefficientH;
use crate::scalar::Scalar;
use crate::spectral::{lp_norm, smooth_bump, sup_norm, Field, GridSpec, Spectral, WrapGuard};

/// Initial data or forcing profile, realized on a grid on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataDescriptor<S> {
    Zero,
    Constant { amplitude: S },
    /// `amplitude · exp(−|x|²/width²)`.
    Gaussian { amplitude: S, width: S },
    /// Smooth compactly supported bump of the given radius and peak.
    Bump { amplitude: S, radius: S },
    /// Two bumps centred at `±separation/2` on the first axis.
    TwoBumps { amplitude: S, radius: S, separation: S },
}

impl<S: Scalar> DataDescriptor<S> {
    pub fn realize(&self, grid: &GridSpec<S>) -> Result<Field<S>> {
        let two = S::lit(2.0);
        match *self {
            Self::Zero => Ok(Field::zeros(*grid)),
            Self::Constant { amplitude } => Ok(Field::constant(*grid, amplitude)),
            Self::Gaussian { amplitude, width } => {
                if !(width > S::zero()) {
                    return Err(Error::domain("Gaussian width must be positive"));
                }
                Field::from_radial(*grid, |r| amplitude * (-(r * r) / (width * width)).exp())
            }
            Self::Bump { amplitude, radius } => smooth_bump(*grid, radius, amplitude),
            Self::TwoBumps {
                amplitude,
                radius,
                separation,
            } => {
                if !(radius > S::zero() && separation >= two * radius) {
                    return Err(Error::domain("bumps must have positive radius and not overlap"));
                }
                let bump = |d: S| {
                    let u = d / radius;
                    if u < S::one() {
                        amplitude * (S::one() - S::one() / (S::one() - u * u)).exp()
                    } else {
                        S::zero()
                    }
                };
                Field::from_fn(*grid, |x| {
                    let rest = if x.len() == 2 { x[1] * x[1] } else { S::zero() };
                    let left = ((x[0] + separation / two).powi(2) + rest).sqrt();
                    let right = ((x[0] - separation / two).powi(2) + rest).sqrt();
                    bump(left) + bump(right)
                })
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Self::Zero => true,
            Self::Constant { amplitude }
            | Self::Gaussian { amplitude, .. }
            | Self::Bump { amplitude, .. }
            | Self::TwoBumps { amplitude, .. } => amplitude == S::zero(),
        }
    }

    /// Peak amplitude; `None` for [`DataDescriptor::Zero`].
    pub fn amplitude(&self) -> Option<S> {
        match *self {
            Self::Zero => None,
            Self::Constant { amplitude }
            | Self::Gaussian { amplitude, .. }
            | Self::Bump { amplitude, .. }
            | Self::TwoBumps { amplitude, .. } => Some(amplitude),
        }
    }

    /// Same profile with the given amplitude; `Zero` stays zero.
    pub fn with_amplitude(&self, value: S) -> Self {
        let mut out = *self;
        match &mut out {
            Self::Zero => {}
            Self::Constant { amplitude }
            | Self::Gaussian { amplitude, .. }
            | Self::Bump { amplitude, .. }
            | Self::TwoBumps { amplitude, .. } => *amplitude = value,
        }
        out
    }

    /// Same profile with the amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: S) -> Self {
        let mut out = *self;
        match &mut out {
            Self::Zero => {}
            Self::Constant { amplitude }
            | Self::Gaussian { amplitude, .. }
            | Self::Bump { amplitude, .. }
            | Self::TwoBumps { amplitude, .. } => *amplitude = *amplitude * factor,
        }
        out
    }
}

/// Parameters of `∂t u − Lu = h(t)|x|^{-b}|u|^p + t^ρ w(x)`.
#[derive(Debug, Clone)]
pub struct ProblemSpec<S: Scalar> {
    pub s: S,
    pub p: S,
    pub b: S,
    /// `None` switches the nonlinearity off.
    pub h: Option<CoefficientH<S>>,
    pub rho: S,
    pub u0: DataDescriptor<S>,
    pub w: DataDescriptor<S>,
    pub grid: GridSpec<S>,
    /// Regularization length of `|x|^{-b}`; defaults to `Δx/2`.
    pub delta: Option<S>,
}

impl<S: Scalar> ProblemSpec<S> {
    /// Unforced problem with `h(t) = t^γ`.
    pub fn unforced(s: S, p: S, gamma: S, u0: DataDescriptor<S>, grid: GridSpec<S>) -> Self {
        Self {
            s,
            p,
            b: S::zero(),
            h: Some(CoefficientH::power(gamma)),
            rho: S::zero(),
            u0,
            w: DataDescriptor::Zero,
            grid,
            delta: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(self.s > S::zero() && self.s <= S::one()) {
            return Err(Error::domain(format!("order s = {} outside (0, 1]", self.s.as_f64())));
        }
        if !(self.p > S::one()) {
            return Err(Error::domain(format!("exponent p = {} must exceed 1", self.p.as_f64())));
        }
        if !(self.b >= S::zero()) {
            return Err(Error::domain("weight exponent b must be nonnegative"));
        }
        if !(self.rho > -S::one()) {
            return Err(Error::domain(format!("ρ = {} must exceed −1", self.rho.as_f64())));
        }
        if let Some(h) = &self.h {
            if !(h.gamma > -S::one()) {
                return Err(Error::domain(format!("γ = {} must exceed −1", h.gamma.as_f64())));
            }
        }
        if let Some(d) = self.delta {
            if !(d > S::zero()) {
                return Err(Error::domain("regularization length must be positive"));
            }
        }
        Ok(())
    }

    pub fn delta(&self) -> S {
        self.delta.unwrap_or_else(|| self.grid.spacing() / S::lit(2.0))
    }
}

/// Node placement of a [`TimeGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Spacing<S> {
    Uniform,
    /// `t_k = T (k/n)^q`, clustering nodes near `t = 0` for `q > 1`.
    GradedNearZero { power: S },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "S: Scalar"))]
pub struct TimeGrid<S> {
    pub horizon: S,
    pub steps: usize,
    pub spacing: Spacing<S>,
}

impl<S: Scalar> Default for TimeGrid<S> {
    fn default() -> Self {
        Self::uniform(S::lit(10.0), 1000)
    }
}

impl<S: Scalar> TimeGrid<S> {
    pub fn uniform(horizon: S, steps: usize) -> Self {
        Self {
            horizon,
            steps,
            spacing: Spacing::Uniform,
        }
    }

    pub fn graded(horizon: S, steps: usize, power: S) -> Self {
        Self {
            horizon,
            steps,
            spacing: Spacing::GradedNearZero { power },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > S::zero() && self.horizon.is_finite()) {
            return Err(Error::domain("horizon must be positive"));
        }
        if self.steps == 0 {
            return Err(Error::domain("need at least one step"));
        }
        if let Spacing::GradedNearZero { power } = self.spacing {
            if !(power >= S::one()) {
                return Err(Error::domain("grading power must be at least 1"));
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> Vec<S> {
        let n = S::from_usize_lossy(self.steps);
        (0..=self.steps)
            .map(|k| {
                if k == self.steps {
                    return self.horizon;
                }
                let u = S::from_usize_lossy(k) / n;
                match self.spacing {
                    Spacing::Uniform => self.horizon * u,
                    Spacing::GradedNearZero { power } => self.horizon * u.powf(power),
                }
            })
            .collect()
    }

    /// Same spacing rule with twice as many steps.
    pub fn refined(&self) -> Self {
        Self {
            steps: 2 * self.steps,
            ..*self
        }
    }
}

/// Outcome of a simulated trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RunVerdict<S> {
    BlowUp { time: S, sup_norm: S },
    Global { final_sup_norm: S, decay_slope: Option<S> },
    Undetermined { reason: String },
}

impl<S> RunVerdict<S> {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::BlowUp { .. } => "BlowUp",
            Self::Global { .. } => "Global",
            Self::Undetermined { .. } => "Undetermined",
        }
    }

    pub fn is_blow_up(&self) -> bool {
        matches!(self, Self::BlowUp { .. })
    }

    pub fn is_global(&self) -> bool {
        matches!(self, Self::Global { .. })
    }
}

/// Norms of the state at one time node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow<S> {
    pub t: S,
    pub sup_norm: S,
    pub l1_norm: S,
    pub l2_norm: S,
    pub mean: S,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<S> {
    pub rows: Vec<TrajectoryRow<S>>,
    pub verdict: RunVerdict<S>,
    pub threshold: S,
    /// `∫w dx` on the grid, for forced runs.
    pub forcing_integral: Option<S>,
    /// Largest boundary-to-peak ratio seen along the trajectory.
    pub max_boundary_ratio: f64,
    /// Boundary ratio of the last finite state.
    pub final_boundary_ratio: f64,
    /// Relative change of the final sup norm under step halving, when checked.
    pub refinement_change: Option<S>,
}

/// `(|x|² + δ²)^{-b/2}`.
pub fn singular_weight_field<S: Scalar>(grid: &GridSpec<S>, b: S, delta: S) -> Result<Field<S>> {
    if !(delta > S::zero()) {
        return Err(Error::domain("regularization length must be positive"));
    }
    if b == S::zero() {
        return Ok(Field::constant(*grid, S::one()));
    }
    Field::from_radial(*grid, |r| (r * r + delta * delta).powf(-b / S::lit(2.0)))
}

/// `(t1^{ρ+1} − t0^{ρ+1})/(ρ+1)`.
fn power_weight<S: Scalar>(rho: S, t0: S, t1: S) -> S {
    let r1 = rho + S::one();
    (t1.powf(r1) - t0.powf(r1)) / r1
}

/// Reusable state for stepping one [`ProblemSpec`].
#[derive(Debug)]
pub struct Stepper<S: Scalar> {
    spec: ProblemSpec<S>,
    spectral: Spectral<S>,
    symbol_values: Vec<S>,
    weight: Field<S>,
    forcing: Option<Field<S>>,
    cached: Option<(S, Vec<S>)>,
}

impl<S: Scalar> Stepper<S> {
    pub fn new(spec: &ProblemSpec<S>) -> Result<Self> {
        spec.validate()?;
        let spectral = Spectral::new(spec.grid)?;
        let symbol_values = spectral.symbol_values(&Symbol::Mixed { s: spec.s });
        let weight = singular_weight_field(&spec.grid, spec.b, spec.delta())?;
        let forcing = if spec.w.is_zero() {
            None
        } else {
            Some(spec.w.realize(&spec.grid)?)
        };
        Ok(Self {
            spec: spec.clone(),
            spectral,
            symbol_values,
            weight,
            forcing,
            cached: None,
        })
    }

    pub fn forcing(&self) -> Option<&Field<S>> {
        self.forcing.as_ref()
    }

    fn propagator(&mut self, dt: S) -> &[S] {
        let stale = !matches!(&self.cached, Some((d, _)) if *d == dt);
        if stale {
            let m = self.symbol_values.iter().map(|v| (-dt * *v).exp()).collect();
            self.cached = Some((dt, m));
        }
        &self.cached.as_ref().expect("just filled").1
    }

    /// One exponential-Euler step from `t0` to `t1`.
    pub fn step(&mut self, state: &Field<S>, t0: S, t1: S) -> Result<Field<S>> {
        if !(t1 > t0 && t0 >= S::zero()) {
            return Err(Error::argument("steps need 0 ≤ t_n < t_next"));
        }
        if state.is_diverged() || state.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { time: t0.as_f64() });
        }
        let spec = &self.spec;
        let h_int = match &spec.h {
            Some(h) => h.integral(t0, t1)?,
            None => S::zero(),
        };
        let p_int = power_weight(spec.rho, t0, t1);
        let p = spec.p;
        let mut v: Vec<S> = state.values().to_vec();
        if h_int > S::zero() {
            for (x, w) in v.iter_mut().zip(self.weight.values()) {
                *x = *x + h_int * *w * x.abs().powf(p);
            }
        }
        if let Some(f) = &self.forcing {
            for (x, w) in v.iter_mut().zip(f.values()) {
                *x = *x + p_int * *w;
            }
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Diverged { time: t1.as_f64() });
        }
        let pre = Field::from_values_unchecked(spec.grid, v);
        let dt = t1 - t0;
        let m = self.propagator(dt).to_vec();
        let out = self.spectral.apply_multiplier(&pre, &m)?;
        if out.is_diverged() {
            return Err(Error::Diverged { time: t1.as_f64() });
        }
        Ok(out)
    }
}

/// `u_{n+1} = e^{ΔtL}[u_n + H_n V_δ |u_n|^p + P_n w]`.
pub fn duhamel_step<S: Scalar>(state: &Field<S>, t_n: S, t_next: S, spec: &ProblemSpec<S>) -> Result<Field<S>> {
    state.check_grid(&Field::zeros(spec.grid))?;
    Stepper::new(spec)?.step(state, t_n, t_next)
}

/// Controls for [`evolve_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "S: Scalar"))]
pub struct EvolveOptions<S: Scalar> {
    /// Defaults to `10⁸·max(1, ‖u₀‖_∞)`.
    pub threshold: Option<S>,
    /// Rerun Global verdicts with half the step and compare.
    pub convergence_guard: bool,
    /// Largest relative change of the final sup norm the guard accepts.
    pub convergence_tolerance: S,
    pub wrap_guard: WrapGuard,
}

impl<S: Scalar> Default for EvolveOptions<S> {
    fn default() -> Self {
        Self {
            threshold: None,
            convergence_guard: true,
            convergence_tolerance: S::lit(0.2),
            wrap_guard: WrapGuard::default(),
        }
    }
}

fn row<S: Scalar>(t: S, f: &Field<S>) -> TrajectoryRow<S> {
    TrajectoryRow {
        t,
        sup_norm: sup_norm(f),
        l1_norm: lp_norm(f, S::one()).unwrap_or(S::nan()),
        l2_norm: lp_norm(f, S::lit(2.0)).unwrap_or(S::nan()),
        mean: f.mean(),
    }
}

fn run_once<S: Scalar>(spec: &ProblemSpec<S>, tgrid: &TimeGrid<S>, opts: &EvolveOptions<S>) -> Result<Trajectory<S>> {
    tgrid.validate()?;
    let mut stepper = Stepper::new(spec)?;
    let mut u = spec.u0.realize(&spec.grid)?;
    let threshold = opts
        .threshold
        .unwrap_or_else(|| S::lit(1e8) * S::one().max(sup_norm(&u)));
    if !(threshold > S::zero()) {
        return Err(Error::domain("blow-up threshold must be positive"));
    }
    let nodes = tgrid.nodes();
    let mut rows = vec![row(nodes[0], &u)];
    let mut max_ratio = opts.wrap_guard.boundary_ratio(&u);
    let mut final_ratio = max_ratio;
    let mut verdict = None;
    for w in nodes.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let mid = (t0 + t1) / S::lit(2.0);
        match stepper.step(&u, t0, t1) {
            Ok(next) => {
                let r = row(t1, &next);
                rows.push(r);
                if !(r.sup_norm <= threshold) {
                    verdict = Some(RunVerdict::BlowUp {
                        time: mid,
                        sup_norm: r.sup_norm,
                    });
                    break;
                }
                let ratio = opts.wrap_guard.boundary_ratio(&next);
                max_ratio = max_ratio.max(ratio);
                final_ratio = ratio;
                u = next;
            }
            Err(Error::Diverged { .. }) => {
                verdict = Some(RunVerdict::BlowUp {
                    time: mid,
                    sup_norm: S::infinity(),
                });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let verdict = verdict.unwrap_or_else(|| classify_tail(&rows, tgrid.horizon, max_ratio, &opts.wrap_guard));
    Ok(Trajectory {
        rows,
        verdict,
        threshold,
        forcing_integral: stepper.forcing().map(|f| f.integral()),
        max_boundary_ratio: max_ratio,
        final_boundary_ratio: final_ratio,
        refinement_change: None,
    })
}

fn classify_tail<S: Scalar>(rows: &[TrajectoryRow<S>], horizon: S, max_ratio: f64, guard: &WrapGuard) -> RunVerdict<S> {
    let half = horizon / S::lit(2.0);
    let start = rows.iter().position(|r| r.t >= half).unwrap_or(rows.len() - 1);
    let tail = &rows[start..];
    let last = *rows.last().expect("at least the initial row");
    if !last.sup_norm.is_finite() {
        return RunVerdict::Undetermined {
            reason: "non-finite final state".into(),
        };
    }
    if last.sup_norm > tail[0].sup_norm {
        return RunVerdict::Undetermined {
            reason: "grew but finite".into(),
        };
    }
    let slack = S::one() + S::lit(1e-12);
    if tail.windows(2).any(|w| w[1].sup_norm > w[0].sup_norm * slack) {
        return RunVerdict::Undetermined {
            reason: "non-monotone tail".into(),
        };
    }
    if max_ratio > guard.threshold {
        return RunVerdict::Undetermined {
            reason: "wrap-around guard tripped".into(),
        };
    }
    let ts: Vec<S> = tail.iter().map(|r| r.t).collect();
    let ns: Vec<S> = tail.iter().map(|r| r.sup_norm).collect();
    RunVerdict::Global {
        final_sup_norm: last.sup_norm,
        decay_slope: loglog_slope(&ts, &ns).ok(),
    }
}

/// Integrates the problem over `tgrid` and classifies the trajectory.
pub fn evolve<S: Scalar>(spec: &ProblemSpec<S>, tgrid: &TimeGrid<S>, threshold: Option<S>) -> Result<Trajectory<S>> {
    evolve_with(
        spec,
        tgrid,
        &EvolveOptions {
            threshold,
            ..EvolveOptions::default()
        },
    )
}

/// [`evolve`] with explicit options. Global verdicts are confirmed by a rerun
/// with half the step unless the convergence guard is disabled.
pub fn evolve_with<S: Scalar>(spec: &ProblemSpec<S>, tgrid: &TimeGrid<S>, opts: &EvolveOptions<S>) -> Result<Trajectory<S>> {
    let mut traj = run_once(spec, tgrid, opts)?;
    if opts.convergence_guard {
        if let RunVerdict::Global { final_sup_norm, .. } = traj.verdict {
            let fine = run_once(
                spec,
                &tgrid.refined(),
                &EvolveOptions {
                    threshold: Some(traj.threshold),
                    ..*opts
                },
            )?;
            let RunVerdict::Global {
                final_sup_norm: fine_norm,
                ..
            } = fine.verdict
            else {
                return Err(Error::Resolution(format!(
                    "halving the step turned a Global verdict into {}",
                    fine.verdict.kind_name()
                )));
            };
            let change = if final_sup_norm == S::zero() && fine_norm == S::zero() {
                S::zero()
            } else {
                (fine_norm - final_sup_norm).abs() / final_sup_norm.abs().max(fine_norm.abs())
            };
            if change > opts.convergence_tolerance {
                return Err(Error::Resolution(format!(
                    "final sup norm changed by {:.1}% under step halving",
                    100.0 * change.as_f64()
                )));
            }
            traj.refinement_change = Some(change);
        }
    }
    Ok(traj)
}

/// [`evolve`] for a problem with non-zero forcing.
pub fn forced_evolve<S: Scalar>(spec: &ProblemSpec<S>, tgrid: &TimeGrid<S>, threshold: Option<S>) -> Result<Trajectory<S>> {
    if spec.w.is_zero() {
        return Err(Error::argument("forced_evolve needs a non-zero forcing profile"));
    }
    evolve(spec, tgrid, threshold)
}

/// Writes `t,sup_norm,l1_norm,l2_norm,mean` with a `#` header comment.
pub fn write_trajectory_csv<S: Scalar>(traj: &Trajectory<S>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("# columns: t, sup_norm, l1_norm, l2_norm, mean\nt,sup_norm,l1_norm,l2_norm,mean\n");
    for r in &traj.rows {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.t.as_f64(),
            r.sup_norm.as_f64(),
            r.l1_norm.as_f64(),
            r.l2_norm.as_f64(),
            r.mean.as_f64()
        ));
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Verdict JSON: kind, time, diagnostics and the supplied configuration echo.
pub fn verdict_json<S: Scalar>(traj: &Trajectory<S>, config: serde_json::Value) -> serde_json::Value {
    let time = match traj.verdict {
        RunVerdict::BlowUp { time, .. } => Some(time.as_f64()),
        _ => traj.rows.last().map(|r| r.t.as_f64()),
    };
    serde_json::json!({
        "kind": traj.verdict.kind_name(),
        "time": time,
        "verdict": serde_json::to_value(&traj.verdict).unwrap_or(serde_json::Value::Null),
        "diagnostics": {
            "threshold": traj.threshold.as_f64(),
            "steps": traj.rows.len().saturating_sub(1),
            "forcing_integral": traj.forcing_integral.map(|v| v.as_f64()),
            "max_boundary_ratio": traj.max_boundary_ratio,
            "final_boundary_ratio": traj.final_boundary_ratio,
            "refinement_change": traj.refinement_change.map(|v| v.as_f64()),
        },
        "config": config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::apply_semigroup;

    fn grid() -> GridSpec<f64> {
        GridSpec::new(1, 40.0, 512).unwrap()
    }

    #[test]
    fn singular_weight_examples() {
        let g = grid();
        assert!(singular_weight_field(&g, 0.0, 0.05).unwrap().values().iter().all(|v| *v == 1.0));
        let g3 = GridSpec::new(1, 32.0, 64).unwrap();
        let w = singular_weight_field(&g3, 1.0, 0.05).unwrap();
        // x = 3 lies at index (3 + 32)/1
        assert!((w.values()[35] - 9.0025f64.powf(-0.5)).abs() < 1e-15);
        assert!((9.0025f64.powf(-0.5) - 0.33329).abs() < 1e-5);
        let w = singular_weight_field(&g3, 0.5, 0.05).unwrap();
        assert!((w.values()[32] - 0.05f64.powf(-0.5)).abs() < 1e-12);
        assert!(singular_weight_field(&g3, 0.5, 0.0).is_err());
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let spec = ProblemSpec::unforced(0.5, 3.0, 0.0, DataDescriptor::Zero, grid());
        let out = duhamel_step(&Field::zeros(grid()), 0.0, 0.5, &spec).unwrap();
        assert!(out.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn linear_step_is_the_semigroup() {
        let mut spec = ProblemSpec::unforced(0.5, 3.0, 0.0, DataDescriptor::Zero, grid());
        spec.h = None;
        let u = DataDescriptor::Gaussian {
            amplitude: 1.0,
            width: 2.0,
        }
        .realize(&grid())
        .unwrap();
        let a = duhamel_step(&u, 1.0, 1.25, &spec).unwrap();
        let b = apply_semigroup(&u, 0.5, 0.25).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn constant_state_takes_an_euler_step() {
        let spec = ProblemSpec::unforced(0.5, 2.0, 0.0, DataDescriptor::Zero, grid());
        let c = 0.7;
        let out = duhamel_step(&Field::constant(grid(), c), 0.0, 0.1, &spec).unwrap();
        for v in out.values() {
            assert!((v - (c + 0.1 * c * c)).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_blows_up_near_ode_time() {
        let spec = ProblemSpec::unforced(0.5, 2.0, 0.0, DataDescriptor::Constant { amplitude: 1.0 }, grid());
        let traj = evolve(&spec, &TimeGrid::uniform(2.0, 2000), None).unwrap();
        let RunVerdict::BlowUp { time, .. } = traj.verdict else {
            panic!("{:?}", traj.verdict)
        };
        assert!((time - 1.0).abs() < 0.25);
    }

    #[test]
    fn forced_zero_mode_is_exact() {
        for rho in [0.0, -0.5, 0.75] {
            let mut spec = ProblemSpec::unforced(0.5, 2.0, 0.0, DataDescriptor::Zero, grid());
            spec.h = None;
            spec.rho = rho;
            spec.w = DataDescriptor::Bump {
                amplitude: 1.0,
                radius: 2.0,
            };
            let wmean = spec.w.realize(&grid()).unwrap().mean();
            let tg = TimeGrid::graded(5.0, 40, 2.0);
            let traj = forced_evolve(&spec, &tg, None).unwrap();
            for r in &traj.rows {
                let expected = r.t.powf(rho + 1.0) / (rho + 1.0) * wmean;
                assert!((r.mean - expected).abs() <= 1e-10 * expected.abs().max(1e-300));
            }
            assert!(traj.forcing_integral.unwrap() > 0.0);
        }
    }

    #[test]
    fn forced_needs_forcing() {
        let spec = ProblemSpec::unforced(0.5, 2.0, 0.0, DataDescriptor::Zero, grid());
        assert!(forced_evolve(&spec, &TimeGrid::uniform(1.0, 4), None).is_err());
    }

    #[test]
    fn spec_validation() {
        let base = ProblemSpec::unforced(0.5, 2.0, 0.0, DataDescriptor::Zero, grid());
        let mut s = base.clone();
        s.p = 1.0;
        assert!(s.validate().is_err());
        let mut s = base.clone();
        s.b = -0.1;
        assert!(s.validate().is_err());
        let mut s = base.clone();
        s.rho = -1.0;
        assert!(s.validate().is_err());
        let s = ProblemSpec::unforced(0.5, 2.0, -1.0, DataDescriptor::Zero, grid());
        assert!(s.validate().is_err());
    }

    #[test]
    fn graded_nodes() {
        let tg = TimeGrid::graded(8.0, 4, 3.0);
        assert_eq!(tg.nodes(), vec![0.0, 0.125, 1.0, 3.375, 8.0]);
        assert_eq!(TimeGrid::uniform(1.0, 4).nodes(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn classify_reasons() {
        let mk = |ns: &[f64]| -> Vec<TrajectoryRow<f64>> {
            ns.iter()
                .enumerate()
                .map(|(k, n)| TrajectoryRow {
                    t: k as f64,
                    sup_norm: *n,
                    l1_norm: 0.0,
                    l2_norm: 0.0,
                    mean: 0.0,
                })
                .collect()
        };
        let g = WrapGuard::default();
        assert_eq!(
            classify_tail(&mk(&[1.0, 0.9, 0.8, 0.9, 1.0]), 4.0, 0.0, &g).kind_name(),
            "Undetermined"
        );
        let v = classify_tail(&mk(&[1.0, 0.9, 0.8, 0.85, 0.7]), 4.0, 0.0, &g);
        assert_eq!(v, RunVerdict::Undetermined { reason: "non-monotone tail".into() });
        let v = classify_tail(&mk(&[1.0, 0.9, 0.8, 0.7, 0.6]), 4.0, 1.0, &g);
        assert_eq!(v, RunVerdict::Undetermined { reason: "wrap-around guard tripped".into() });
        assert!(classify_tail(&mk(&[1.0, 0.9, 0.8, 0.7, 0.6]), 4.0, 0.0, &g).is_global());
    }
}
