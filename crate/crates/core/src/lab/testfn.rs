//! Scaling experiment behind the test-function method.
//!
//! For `ψ_R(x,t) = φ^m(|x|/R) η^m(t/T)` with `m = 2p/(p−1)` the integrals
//!
//! * `I1 = ∫∫ h^{-1/(p−1)} |x|^{b/(p−1)} ψ^{-1/(p−1)} |∂tψ|^{p'}`,
//! * `J1 = ∫∫ h^{-1/(p−1)} |x|^{b/(p−1)} ψ^{-1/(p−1)} |𝓛ψ|^{p'}`,
//! * `LHS = ∫∫ t^ρ w ψ`
//!
//! factor into a time integral and a space integral. `J1` is evaluated with
//! the pointwise majorant `|𝓛φ^m| ≤ m φ^{m−1} |𝓛φ|`, which keeps the
//! integrand supported where `ψ > 0`.

use serde::{Deserialize, Serialize};

use crate::duhamel::ProblemSpec;
use crate::error::{Error, Result};
use crate::fit::loglog_slope;
use crate::quad::{integrate, QuadConfig};
use crate::rvf::CoefficientH;
use crate::scalar::Scalar;
use crate::spectral::{apply_generator, sup_norm, Field};

/// How the time scale follows the space scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeScaling<S> {
    /// `T = R^{2s}`.
    #[serde(rename = "r_to_2s")]
    RTo2s,
    /// Fixed `T`.
    IndependentT { t: S },
}

/// `6u⁵ − 15u⁴ + 10u³` on `[0, 1]`, clamped outside.
pub fn smoothstep<S: Scalar>(u: S) -> S {
    if u <= S::zero() {
        return S::zero();
    }
    if u >= S::one() {
        return S::one();
    }
    u * u * u * (u * (u * S::lit(6.0) - S::lit(15.0)) + S::lit(10.0))
}

fn smoothstep_prime<S: Scalar>(u: S) -> S {
    if u <= S::zero() || u >= S::one() {
        return S::zero();
    }
    let v = u * (S::one() - u);
    S::lit(30.0) * v * v
}

/// Time cutoff: 0 off `[1/4, 4/5]`, 1 on `[1/2, 3/4]`.
pub fn eta<S: Scalar>(tau: S) -> S {
    let (a, b, c, d) = (S::lit(0.25), S::lit(0.5), S::lit(0.75), S::lit(0.8));
    if tau <= a || tau >= d {
        S::zero()
    } else if tau < b {
        smoothstep((tau - a) / (b - a))
    } else if tau <= c {
        S::one()
    } else {
        S::one() - smoothstep((tau - c) / (d - c))
    }
}

pub fn eta_prime<S: Scalar>(tau: S) -> S {
    let (a, b, c, d) = (S::lit(0.25), S::lit(0.5), S::lit(0.75), S::lit(0.8));
    if tau <= a || tau >= d || (tau >= b && tau <= c) {
        S::zero()
    } else if tau < b {
        smoothstep_prime((tau - a) / (b - a)) / (b - a)
    } else {
        -smoothstep_prime((tau - c) / (d - c)) / (d - c)
    }
}

/// Space cutoff: 1 on `[0, 1]`, 0 on `[2, ∞)`.
pub fn phi<S: Scalar>(r: S) -> S {
    S::one() - smoothstep(r - S::one())
}

/// Cutoff data of the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionSpec<S> {
    pub p: S,
    /// `m = 2p/(p−1)`.
    pub m: S,
    pub time_scaling: TimeScaling<S>,
}

impl<S: Scalar> TestFunctionSpec<S> {
    pub fn new(p: S, time_scaling: TimeScaling<S>) -> Result<Self> {
        if !(p > S::one()) {
            return Err(Error::domain("the test-function exponent needs p > 1"));
        }
        if let TimeScaling::IndependentT { t } = time_scaling {
            if !(t > S::zero()) {
                return Err(Error::domain("the time scale T must be positive"));
            }
        }
        Ok(Self {
            p,
            m: S::lit(2.0) * p / (p - S::one()),
            time_scaling,
        })
    }

    /// `p' = p/(p−1)`.
    pub fn conjugate(&self) -> S {
        self.p / (self.p - S::one())
    }

    pub fn time_scale(&self, s: S, r: S) -> S {
        match self.time_scaling {
            TimeScaling::RTo2s => r.powf(S::lit(2.0) * s),
            TimeScaling::IndependentT { t } => t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestfnRow<S> {
    pub r: S,
    pub t: S,
    pub i1: S,
    pub j1: S,
    pub lhs: S,
    /// `I1 + J1`.
    pub bound: S,
    /// `sup |𝓛(φ^m(·/R))|`.
    pub lphi_sup: S,
    /// `∫ w φ^m(·/R) / ∫ w`.
    pub capture: S,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestfnTable<S> {
    pub cutoff: TestFunctionSpec<S>,
    pub rows: Vec<TestfnRow<S>>,
    pub slope_i1: S,
    pub slope_j1: S,
    pub slope_bound: S,
    pub slope_lhs: S,
    pub slope_lphi: S,
    /// `N + (b − 2s(1+γ))/(p−1)`, for `ℓ ≡ 1` and `T = R^{2s}`.
    pub expected_bound: S,
    /// `2s(ρ+1)`.
    pub expected_lhs: S,
    pub expected_lphi: S,
    /// `slope_bound − slope_lhs`; negative values give the contradiction.
    pub slope_gap: S,
}

fn pieces<S: Scalar>() -> [(S, S); 3] {
    [
        (S::lit(0.25), S::lit(0.5)),
        (S::lit(0.5), S::lit(0.75)),
        (S::lit(0.75), S::lit(0.8)),
    ]
}

fn time_integral<S: Scalar>(f: impl Fn(S) -> S) -> Result<S> {
    let cfg = QuadConfig::with_rel_tol(1e-11);
    let mut total = S::zero();
    for (a, b) in pieces::<S>() {
        total = total + integrate(&f, a, b, &cfg)?.value;
    }
    Ok(total)
}

fn weight_power<S: Scalar>(h: &CoefficientH<S>, t: S, e: S) -> S {
    h.eval(t).map(|v| v.powf(e)).unwrap_or(S::nan())
}

/// Tabulates `I1`, `J1` and the left-hand side over `r_values` and fits
/// their log-log slopes.
pub fn testfn_experiment<S: Scalar>(
    spec: &ProblemSpec<S>,
    r_values: &[S],
    time_scaling: TimeScaling<S>,
) -> Result<TestfnTable<S>> {
    spec.validate()?;
    let h = spec
        .h
        .as_ref()
        .ok_or_else(|| Error::domain("the test-function method needs the nonlinear term"))?;
    if r_values.len() < 2 {
        return Err(Error::argument("need at least two radii to fit slopes"));
    }
    if !(spec.rho > -S::one()) {
        return Err(Error::domain("ρ > −1 is required for the forcing integral"));
    }
    let cut = TestFunctionSpec::new(spec.p, time_scaling)?;
    let grid = spec.grid;
    let quarter = grid.half_width / S::lit(4.0);
    if let Some(r) = r_values.iter().find(|r| !(**r > S::zero() && **r <= quarter)) {
        return Err(Error::domain(format!(
            "R = {} must lie in (0, L/4] = (0, {}] so the support fits the torus",
            r.as_f64(),
            quarter.as_f64()
        )));
    }
    let w = spec.w.realize(&grid)?;
    let w_mass = w.integral();
    let n = S::from_usize_lossy(grid.dim);
    let (s, p, m) = (spec.s, spec.p, cut.m);
    let pm1 = p - S::one();
    let pc = cut.conjugate();
    let hexp = -S::one() / pm1;
    let radial_weight = Field::from_radial(grid, |r| {
        if spec.b == S::zero() {
            S::one()
        } else {
            r.powf(spec.b / pm1)
        }
    })?;

    let mut rows = Vec::with_capacity(r_values.len());
    for &r in r_values {
        let t_scale = cut.time_scale(s, r);
        let phi_r = Field::from_radial(grid, |x| phi(x / r))?;
        let phi_m = phi_r.map(|v| v.powf(m));
        let l_phi = apply_generator(&phi_r, s)?;
        let l_phi_m = apply_generator(&phi_m, s)?;
        let space_i1 = radial_weight.product(&phi_m)?.integral();
        let majorant = Field::from_values_unchecked(
            grid,
            phi_r
                .values()
                .iter()
                .zip(l_phi.values())
                .map(|(f, l)| m.powf(pc) * (f.max(S::zero()) * l.abs()).powf(pc))
                .collect(),
        );
        let space_j1 = radial_weight.product(&majorant)?.integral();
        let time_i1 = t_scale.powf(S::one() - pc)
            * time_integral(|tau: S| {
                weight_power(h, t_scale * tau, hexp) * eta(tau).powf(m - pc) * eta_prime(tau).abs().powf(pc)
            })?;
        let time_j1 = t_scale * time_integral(|tau: S| weight_power(h, t_scale * tau, hexp) * eta(tau).powf(m))?;
        let time_lhs = t_scale.powf(spec.rho + S::one())
            * time_integral(|tau: S| tau.powf(spec.rho) * eta(tau).powf(m))?;
        let captured = w.product(&phi_m)?.integral();
        let i1 = time_i1 * space_i1;
        let j1 = time_j1 * space_j1;
        rows.push(TestfnRow {
            r,
            t: t_scale,
            i1,
            j1,
            lhs: time_lhs * captured,
            bound: i1 + j1,
            lphi_sup: sup_norm(&l_phi_m),
            capture: if w_mass == S::zero() { S::nan() } else { captured / w_mass },
        });
    }
    let rs: Vec<S> = rows.iter().map(|r| r.r).collect();
    let col = |f: fn(&TestfnRow<S>) -> S| -> Vec<S> { rows.iter().map(f).collect() };
    let slope = |ys: Vec<S>| loglog_slope(&rs, &ys).unwrap_or(S::nan());
    let two_s = S::lit(2.0) * s;
    let slope_bound = slope(col(|r| r.bound));
    let slope_lhs = slope(col(|r| r.lhs));
    Ok(TestfnTable {
        cutoff: cut,
        slope_i1: slope(col(|r| r.i1)),
        slope_j1: slope(col(|r| r.j1)),
        slope_lphi: slope(col(|r| r.lphi_sup)),
        expected_bound: n + (spec.b - two_s * (S::one() + h.gamma)) / pm1,
        expected_lhs: two_s * (spec.rho + S::one()),
        expected_lphi: -two_s,
        slope_gap: slope_bound - slope_lhs,
        slope_bound,
        slope_lhs,
        rows,
    })
}

/// Writes the table as CSV with a `#` header line.
pub fn write_testfn_csv<S: Scalar>(table: &TestfnTable<S>, path: impl AsRef<std::path::Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from(
        "# columns: R, T, I1, J1, LHS, bound = I1 + J1, sup|L phi_R^m|, captured fraction of int w\n\
         r,t,i1,j1,lhs,bound,lphi_sup,capture\n",
    );
    for r in &table.rows {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.r.as_f64(),
            r.t.as_f64(),
            r.i1.as_f64(),
            r.j1.as_f64(),
            r.lhs.as_f64(),
            r.bound.as_f64(),
            r.lphi_sup.as_f64(),
            r.capture.as_f64()
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
