//! Heat, Poisson, fractional and mixed kernels.
//!
//! The fractional profile is
//! `K_s(x) = (2π)^{-N} ∫ e^{ix·ξ} e^{-|ξ|^{2s}} dξ`, normalized so that
//! `s = 1` reproduces the Gaussian `(4π)^{-N/2} e^{-|x|²/4}` and `s = 1/2`
//! the Poisson kernel. For `N = 1` it is computed by a trapezoidal cosine
//! transform on a uniform frequency grid, for `N = 2` by a panel Hankel
//! quadrature against `J_0`; both refine the grid until two successive
//! halvings agree.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::kronrod15_panel;
use crate::scalar::Scalar;

/// `ln(10^16)`: frequencies beyond the point where the multiplier drops below
/// `1e-16` are discarded.
const CUTOFF_EXPONENT: f64 = 36.841_361_487_904_734;

/// Parameters of a kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams<S> {
    pub s: S,
    pub dim: usize,
    pub t: S,
}

impl<S: Scalar> KernelParams<S> {
    pub fn new(s: S, dim: usize, t: S) -> Result<Self> {
        if !(s > S::zero() && s <= S::one()) {
            return Err(Error::domain(format!("fractional order s = {} outside (0, 1]", s.as_f64())));
        }
        check_dim(dim)?;
        if !(t > S::zero() && t.is_finite()) {
            return Err(Error::domain("kernel time must be positive"));
        }
        Ok(Self { s, dim, t })
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::domain(format!("dimension {dim} not supported (N ∈ {{1, 2}})")))
    }
}

/// `Γ(n/2)` for a positive integer `n`.
pub fn gamma_half<S: Scalar>(n: u32) -> S {
    assert!(n > 0, "Γ(0) is undefined");
    let (mut value, mut arg) = if n % 2 == 0 {
        (S::one(), S::one())
    } else {
        (S::PI().sqrt(), S::lit(0.5))
    };
    let target = S::lit(n as f64 / 2.0);
    while arg < target {
        value = value * arg;
        arg = arg + S::one();
    }
    value
}

/// `(4π)^{-N/2} e^{-r²/4}`, the heat profile at distance `r = |x|`.
pub fn gaussian_profile<S: Scalar>(dim: usize, r: S) -> S {
    let four_pi = S::lit(4.0) * S::PI();
    four_pi.powf(-S::lit(dim as f64) / S::lit(2.0)) * (-(r * r) / S::lit(4.0)).exp()
}

/// Heat kernel `(4πt)^{-N/2} e^{-r²/(4t)}`.
pub fn gaussian_kernel_at_time<S: Scalar>(dim: usize, r: S, t: S) -> Result<S> {
    if !(t > S::zero()) {
        return Err(Error::domain("heat kernel needs t > 0"));
    }
    let four_pi_t = S::lit(4.0) * S::PI() * t;
    Ok(four_pi_t.powf(-S::lit(dim as f64) / S::lit(2.0)) * (-(r * r) / (S::lit(4.0) * t)).exp())
}

/// `Γ((N+1)/2) / (π^{(N+1)/2} (1 + r²)^{(N+1)/2})`.
pub fn poisson_profile<S: Scalar>(dim: usize, r: S) -> S {
    let e = S::lit((dim as f64 + 1.0) / 2.0);
    gamma_half::<S>(dim as u32 + 1) / (S::PI().powf(e) * (S::one() + r * r).powf(e))
}

/// `Γ((N+1)/2) t / (π^{(N+1)/2} (t² + r²)^{(N+1)/2})`.
pub fn poisson_kernel_at_time<S: Scalar>(dim: usize, r: S, t: S) -> Result<S> {
    if !(t > S::zero()) {
        return Err(Error::domain("Poisson kernel needs t > 0"));
    }
    let e = S::lit((dim as f64 + 1.0) / 2.0);
    Ok(gamma_half::<S>(dim as u32 + 1) * t / (S::PI().powf(e) * (t * t + r * r).powf(e)))
}

/// Bessel function `J_0`, by power series for `|x| ≤ 12` and the Hankel
/// asymptotic expansion beyond.
pub fn bessel_j0<S: Scalar>(x: S) -> S {
    let x = x.abs();
    if x <= S::lit(12.0) {
        let q = -(x * x) / S::lit(4.0);
        let mut term = S::one();
        let mut sum = S::one();
        let mut k = 1.0;
        loop {
            term = term * q / S::lit(k * k);
            sum = sum + term;
            if term.abs() < S::epsilon() * S::lit(1e-3) {
                break;
            }
            k += 1.0;
        }
        return sum;
    }
    let eight_x = S::lit(8.0) * x;
    let mut p = S::one();
    let mut q = S::zero();
    let mut term = S::one();
    let mut k = 1usize;
    loop {
        let odd = S::lit((2 * k - 1) as f64);
        let next = term * odd * odd / (S::from_usize_lossy(k) * eight_x);
        if next.abs() > term.abs() || next.abs() < S::epsilon() * S::lit(1e-3) {
            break;
        }
        term = next;
        // signs run −, −, +, +, ... alternating between Q and P
        let sign = if ((k + 1) / 2) % 2 == 1 { -S::one() } else { S::one() };
        if k % 2 == 1 {
            q = q + sign * term;
        } else {
            p = p + sign * term;
        }
        k += 1;
    }
    let chi = x - S::FRAC_PI_4();
    (S::lit(2.0) / (S::PI() * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Controls the frequency-space inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InversionOptions {
    /// Relative agreement required between successive grid halvings.
    pub rel_tol: f64,
    /// Absolute agreement relative to the peak value `K(0)`.
    pub peak_tol: f64,
    /// Largest frequency grid before giving up.
    pub max_nodes: usize,
}

impl Default for InversionOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            peak_tol: 1e-10,
            max_nodes: 1 << 23,
        }
    }
}

/// Resolution used for a [`ProfileTable`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileResolution {
    pub nodes: usize,
    pub spacing: f64,
    pub frequency_cutoff: f64,
}

/// Sampled radial profile `K_s(r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileTable<S> {
    pub s: S,
    pub dim: usize,
    pub radii: Vec<S>,
    pub values: Vec<S>,
    /// Per-entry positivity.
    pub positive: Vec<bool>,
    pub resolution: Option<ProfileResolution>,
}

impl<S: Scalar> ProfileTable<S> {
    /// Tabulates a closed-form profile such as [`gaussian_profile`].
    pub fn from_fn(s: S, dim: usize, radii: &[S], f: impl Fn(S) -> S) -> Result<Self> {
        check_radii(radii)?;
        let values: Vec<S> = radii.iter().map(|&r| f(r)).collect();
        Ok(Self {
            s,
            dim,
            radii: radii.to_vec(),
            positive: values.iter().map(|v| *v > S::zero()).collect(),
            values,
            resolution: None,
        })
    }
}

/// Metadata written next to a profile CSV as `<file>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ProfileSidecar {
    s: f64,
    dim: usize,
    entries: usize,
    resolution: Option<ProfileResolution>,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

impl<S: Scalar> ProfileTable<S> {
    /// Writes `radius,value` rows and the metadata to `<path>.json`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("# columns: radius, value\nradius,value\n");
        for (r, v) in self.radii.iter().zip(&self.values) {
            out.push_str(&format!("{:.16e},{:.16e}\n", r.as_f64(), v.as_f64()));
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))?;
        let side = ProfileSidecar {
            s: self.s.as_f64(),
            dim: self.dim,
            entries: self.radii.len(),
            resolution: self.resolution,
        };
        let sp = sidecar_path(path);
        std::fs::write(&sp, serde_json::to_string_pretty(&side)?).map_err(|e| Error::io(&sp, e))
    }

    /// Reads a table written by [`ProfileTable::write_csv`].
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let sp = sidecar_path(path);
        let text = std::fs::read_to_string(&sp).map_err(|e| Error::io(&sp, e))?;
        let side: ProfileSidecar = serde_json::from_str(&text)?;
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|source| Error::Csv { path: path.into(), source })?;
        let (mut radii, mut values) = (Vec::new(), Vec::new());
        for rec in reader.records() {
            let rec = rec.map_err(|source| Error::Csv { path: path.into(), source })?;
            let parse = |i: usize| -> Result<S> {
                rec.get(i)
                    .and_then(|x| x.trim().parse::<f64>().ok())
                    .map(S::lit)
                    .ok_or_else(|| Error::Data(format!("{}: bad row {:?}", path.display(), rec)))
            };
            radii.push(parse(0)?);
            values.push(parse(1)?);
        }
        if radii.len() != side.entries {
            return Err(Error::Data(format!(
                "{}: sidecar lists {} entries, file has {}",
                path.display(),
                side.entries,
                radii.len()
            )));
        }
        Ok(Self {
            s: S::lit(side.s),
            dim: side.dim,
            positive: values.iter().map(|v| *v > S::zero()).collect(),
            radii,
            values,
            resolution: side.resolution,
        })
    }
}

fn check_radii<S: Scalar>(radii: &[S]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::argument("profile needs at least one radius"));
    }
    if radii.iter().any(|r| !(*r >= S::zero() && r.is_finite())) {
        return Err(Error::argument("radii must be finite and non-negative"));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::argument("radii must be increasing"));
    }
    Ok(())
}

/// Frequency where `symbol(ξ) = CUTOFF_EXPONENT` for a symbol `c ξ^{2s}`.
fn power_cutoff(coeff: f64, two_s: f64) -> f64 {
    (CUTOFF_EXPONENT / coeff).powf(1.0 / two_s)
}

/// Radial weight of the inverse transform: `cos(rξ)/π` in one dimension,
/// `J_0(rξ) ξ/(2π)` in two.
fn radial_weight(dim: usize, r: f64, xi: f64) -> f64 {
    if dim == 1 {
        (r * xi).cos() / std::f64::consts::PI
    } else {
        bessel_j0(r * xi) * xi / (2.0 * std::f64::consts::PI)
    }
}

/// `∫_0^{ξmax} f` over `panels` Kronrod panels; the first panel is graded
/// geometrically toward the origin to absorb the cusp of `ξ^{2s}`.
fn graded_panels(f: &dyn Fn(f64) -> f64, xi_max: f64, panels: usize) -> f64 {
    let w = xi_max / panels as f64;
    let mut acc = 0.0;
    let mut hi = w;
    for _ in 0..30 {
        let lo = hi * 0.25;
        acc += kronrod15_panel(f, lo, hi);
        hi = lo;
    }
    for k in 1..panels {
        acc += kronrod15_panel(f, k as f64 * w, (k + 1) as f64 * w);
    }
    acc
}

/// Inverse radial transform of `m` at every radius, with the panel count
/// doubled until successive values agree.
fn radial_transform<S: Scalar>(
    multiplier: &(dyn Fn(f64) -> f64 + Sync),
    dim: usize,
    rho_max: f64,
    radii: &[S],
    initial_panels: usize,
    opts: &InversionOptions,
) -> Result<(Vec<f64>, ProfileResolution)> {
    let radii: Vec<f64> = radii.iter().map(|r| r.as_f64()).collect();
    let r_max = radii.last().copied().unwrap_or(0.0);
    let min_panels = (rho_max * (r_max + 1.0) / 2.0).ceil() as usize;
    let mut panels = initial_panels.max(min_panels).max(32).next_power_of_two();
    if panels * 15 > opts.max_nodes {
        return Err(Error::Resolution(format!(
            "inversion needs {} frequency nodes, above the cap {}",
            panels * 15,
            opts.max_nodes
        )));
    }

    let eval = |panels: usize, r: f64| -> f64 {
        graded_panels(&|xi: f64| radial_weight(dim, r, xi) * multiplier(xi), rho_max, panels)
    };

    let mut values: Vec<f64> = radii.par_iter().map(|&r| eval(panels, r)).collect();
    loop {
        let next_panels = panels * 2;
        if next_panels * 15 > opts.max_nodes {
            return Err(Error::Resolution(format!(
                "radial transform not converged at {} frequency nodes",
                panels * 15
            )));
        }
        let refined: Vec<f64> = radii.par_iter().map(|&r| eval(next_panels, r)).collect();
        let peak = eval(next_panels, 0.0);
        let converged = values.iter().zip(&refined).all(|(old, new)| {
            (new - old).abs() <= opts.rel_tol * new.abs() + opts.peak_tol * peak.abs()
        });
        values = refined;
        panels = next_panels;
        if converged {
            break;
        }
    }
    Ok((
        values,
        ProfileResolution {
            nodes: panels * 15,
            spacing: rho_max / panels as f64,
            frequency_cutoff: rho_max,
        },
    ))
}

/// Numerically inverts `e^{-|ξ|^{2s}}` to tabulate `K_s` at the given radii.
pub fn fractional_profile<S: Scalar>(s: S, dim: usize, radii: &[S]) -> Result<ProfileTable<S>> {
    fractional_profile_with(s, dim, radii, &InversionOptions::default())
}

pub fn fractional_profile_with<S: Scalar>(
    s: S,
    dim: usize,
    radii: &[S],
    opts: &InversionOptions,
) -> Result<ProfileTable<S>> {
    if !(s > S::zero() && s < S::one()) {
        return Err(Error::domain(format!(
            "fractional profile needs s in (0, 1), got {}",
            s.as_f64()
        )));
    }
    check_dim(dim)?;
    check_radii(radii)?;
    let two_s = 2.0 * s.as_f64();
    let multiplier = move |xi: f64| (-xi.powf(two_s)).exp();
    let cutoff = power_cutoff(1.0, two_s);
    let (values, resolution) = radial_transform(&multiplier, dim, cutoff, radii, 64, opts)?;
    let values: Vec<S> = values.into_iter().map(S::lit).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("inversion produced non-finite values".into()));
    }
    Ok(ProfileTable {
        s,
        dim,
        radii: radii.to_vec(),
        positive: values.iter().map(|v| *v > S::zero()).collect(),
        values,
        resolution: Some(resolution),
    })
}

/// Extremes of `K_s(r) (1+r)^{N+2s}` over a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub all_positive: bool,
    /// Entries below zero by less than `1e-8` of the peak, counted as noise.
    pub clamped_entries: usize,
    pub pass: bool,
    pub note: Option<String>,
}

pub fn verify_profile_bounds<S: Scalar>(table: &ProfileTable<S>) -> Result<BoundReport> {
    if table.values.len() != table.radii.len() || table.values.is_empty() {
        return Err(Error::Data("profile table is empty or ragged".into()));
    }
    if table.values.iter().chain(&table.radii).any(|v| !v.is_finite()) {
        return Err(Error::Data("profile table contains non-finite entries".into()));
    }
    let peak = table.values.iter().fold(0.0f64, |m, v| m.max(v.as_f64().abs()));
    let exponent = table.dim as f64 + 2.0 * table.s.as_f64();
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = f64::NEG_INFINITY;
    let mut all_positive = true;
    let mut clamped = 0;
    for (r, v) in table.radii.iter().zip(&table.values) {
        let mut v = v.as_f64();
        if v <= 0.0 {
            if v.abs() < 1e-8 * peak {
                clamped += 1;
                v = 0.0;
            }
            all_positive = false;
        }
        let ratio = v * (1.0 + r.as_f64()).powf(exponent);
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
    }
    let s = table.s.as_f64();
    let note = if s >= 1.0 {
        Some("the two-sided power bound is stated only for s in (0, 1); the Gaussian decays faster".into())
    } else {
        None
    };
    let pass = all_positive && max_ratio.is_finite() && min_ratio > 0.0;
    Ok(BoundReport {
        min_ratio,
        max_ratio,
        all_positive,
        clamped_entries: clamped,
        pass: if s >= 1.0 { all_positive } else { pass },
        note,
    })
}

/// Which Fourier symbol `σ(ξ)` a semigroup `e^{-tσ}` uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Symbol<S> {
    /// `|ξ|² + |ξ|^{2s}`, the generator `Δ − (−Δ)^s`.
    Mixed { s: S },
    /// `|ξ|²`, the pure heat diagnostic.
    Heat,
    /// `|ξ|^{2s}`.
    Fractional { s: S },
}

impl<S: Scalar> Symbol<S> {
    #[inline]
    pub fn eval(&self, xi: S) -> S {
        let a = xi.abs();
        match *self {
            Symbol::Mixed { s } => a * a + a.powf(S::lit(2.0) * s),
            Symbol::Heat => a * a,
            Symbol::Fractional { s } => a.powf(S::lit(2.0) * s),
        }
    }

    fn cutoff(&self, t: f64) -> f64 {
        match *self {
            Symbol::Mixed { s } => power_cutoff(t, 2.0).min(power_cutoff(t, 2.0 * s.as_f64())),
            Symbol::Heat => power_cutoff(t, 2.0),
            Symbol::Fractional { s } => power_cutoff(t, 2.0 * s.as_f64()),
        }
    }
}

/// Point value of the fundamental solution `E_s(x, t)` of `∂_t = Δ − (−Δ)^s`,
/// computed by inverting `e^{-t(|ξ|² + |ξ|^{2s})}` with `nodes` frequency
/// nodes. A second pass with twice the nodes must agree; otherwise the
/// resolution is reported insufficient.
pub fn mixed_kernel<S: Scalar>(params: &KernelParams<S>, r: S, nodes: usize) -> Result<S> {
    symbol_kernel(Symbol::Mixed { s: params.s }, params.dim, params.t, r, nodes)
}

/// Like [`mixed_kernel`] for an arbitrary [`Symbol`].
pub fn symbol_kernel<S: Scalar>(symbol: Symbol<S>, dim: usize, t: S, r: S, nodes: usize) -> Result<S> {
    check_dim(dim)?;
    if !(t > S::zero()) {
        return Err(Error::domain("kernel time must be positive"));
    }
    if nodes < 16 {
        return Err(Error::argument("need at least 16 quadrature nodes"));
    }
    let tf = t.as_f64();
    let sym = symbol;
    let multiplier = move |xi: f64| (-tf * sym.eval(S::lit(xi)).as_f64()).exp();
    let cutoff = symbol.cutoff(tf);
    let rf = r.as_f64().abs();
    let pass = |n: usize| -> (f64, f64) {
        let panels = (n / 15).max(1);
        let value = graded_panels(&|xi: f64| radial_weight(dim, rf, xi) * multiplier(xi), cutoff, panels);
        let peak = graded_panels(&|xi: f64| radial_weight(dim, 0.0, xi) * multiplier(xi), cutoff, panels);
        (value, peak)
    };
    let (coarse, _) = pass(nodes);
    let (fine, peak) = pass(2 * nodes);
    if (fine - coarse).abs() > 1e-8 * fine.abs() + 1e-10 * peak {
        return Err(Error::Resolution(format!(
            "kernel value changed from {coarse:e} to {fine:e} when doubling {nodes} nodes"
        )));
    }
    Ok(S::lit(fine))
}
