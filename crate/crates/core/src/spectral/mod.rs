//! Periodic grids, sampled fields and Fourier multipliers.
//!
//! The whole space `R^N` is truncated to the torus `[−L, L)^N` sampled at
//! `M` points per axis. Multipliers act on the discrete Fourier coefficients
//! at frequencies `ξ_k = πk/L`, `k = −M/2, …, M/2 − 1`. The forward transform
//! is unnormalized and the inverse carries the factor `1/M^N`, so the
//! zero-frequency coefficient is the discrete integral divided by the cell
//! volume and a multiplier equal to one at `ξ = 0` preserves mass exactly.

mod io;
mod probes;

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::kernels::Symbol;
use crate::scalar::Scalar;

pub use io::{read_field_binary, read_field_csv, write_field_binary, write_field_csv, BinaryHeader};
pub use probes::{
    check_wraparound, convexity_inequality_check, decay_bounds_probe, decay_bounds_probe_with,
    smoothing_estimate_probe, smoothing_estimate_probe_with, ConvexFunction, ConvexityReport,
    smooth_bump, DecayTable, SemigroupProbe, SmoothingFit, WrapGuard,
};

/// Uniform periodic grid on `[−L, L)^N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "S: Scalar"))]
pub struct GridSpec<S> {
    pub dim: usize,
    pub half_width: S,
    pub points: usize,
}

impl<S: Scalar> Default for GridSpec<S> {
    fn default() -> Self {
        Self::desk(1).expect("desk grid is valid")
    }
}

impl<S: Scalar> GridSpec<S> {
    pub fn new(dim: usize, half_width: S, points: usize) -> Result<Self> {
        let g = Self {
            dim,
            half_width,
            points,
        };
        g.validate()?;
        Ok(g)
    }

    /// Desk-scale default: `M = 512` for `N = 1`, `M = 256` for `N = 2`, `L = 40`.
    pub fn desk(dim: usize) -> Result<Self> {
        Self::new(dim, S::lit(40.0), if dim == 2 { 256 } else { 512 })
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::domain(format!("grid dimension {} not in {{1, 2}}", self.dim)));
        }
        if !(self.half_width > S::zero() && self.half_width.is_finite()) {
            return Err(Error::domain("grid half width must be positive"));
        }
        if self.points < 64 || !self.points.is_power_of_two() {
            return Err(Error::domain(format!(
                "points per axis must be a power of two ≥ 64, got {}",
                self.points
            )));
        }
        Ok(())
    }

    /// `Δx = 2L/M`.
    pub fn spacing(&self) -> S {
        S::lit(2.0) * self.half_width / S::from_usize_lossy(self.points)
    }

    pub fn cell_volume(&self) -> S {
        self.spacing().powi(self.dim as i32)
    }

    /// Number of samples `M^N`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `x_j = −L + jΔx`.
    pub fn coordinate(&self, j: usize) -> S {
        -self.half_width + S::from_usize_lossy(j) * self.spacing()
    }

    pub fn coordinates(&self) -> Vec<S> {
        (0..self.points).map(|j| self.coordinate(j)).collect()
    }

    /// Frequency of FFT slot `j`, in the order produced by the transform.
    pub fn frequency(&self, j: usize) -> S {
        let m = self.points as i64;
        let k = if (j as i64) < m / 2 { j as i64 } else { j as i64 - m };
        S::PI() * S::lit(k as f64) / self.half_width
    }

    /// Index of the origin along each axis.
    pub fn center_index(&self) -> usize {
        self.points / 2
    }

    /// Per-axis indices of a flat sample index.
    pub fn unflatten(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.points, idx % self.points]
        }
    }

    /// Euclidean norm of the sample position with flat index `idx`.
    pub fn radius(&self, idx: usize) -> S {
        let [i, j] = self.unflatten(idx);
        if self.dim == 1 {
            self.coordinate(i).abs()
        } else {
            self.coordinate(i).hypot(self.coordinate(j))
        }
    }

    /// Smallest per-axis distance (in cells) from the sample to the periodic boundary.
    pub fn cells_to_boundary(&self, idx: usize) -> usize {
        let [i, j] = self.unflatten(idx);
        let edge = |k: usize| k.min(self.points - 1 - k);
        if self.dim == 1 {
            edge(i)
        } else {
            edge(i).min(edge(j))
        }
    }

    pub(crate) fn same_as(&self, other: &Self) -> bool {
        self.dim == other.dim && self.points == other.points && self.half_width == other.half_width
    }
}

/// Real samples on a [`GridSpec`], stored lexicographically (first axis slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct Field<S> {
    grid: GridSpec<S>,
    values: Vec<S>,
    diverged: bool,
}

impl<S: Scalar> Field<S> {
    pub fn from_values(grid: GridSpec<S>, values: Vec<S>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::argument(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("field values must be finite".into()));
        }
        Ok(Self {
            grid,
            values,
            diverged: false,
        })
    }

    /// Field that may hold non-finite values, flagged as diverged when it does.
    pub fn from_values_unchecked(grid: GridSpec<S>, values: Vec<S>) -> Self {
        assert_eq!(values.len(), grid.len());
        let diverged = values.iter().any(|v| !v.is_finite());
        Self {
            grid,
            values,
            diverged,
        }
    }

    pub fn zeros(grid: GridSpec<S>) -> Self {
        Self::constant(grid, S::zero())
    }

    pub fn constant(grid: GridSpec<S>, c: S) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
            diverged: !c.is_finite(),
        }
    }

    /// Samples `f(x)` where `x` has `N` coordinates.
    pub fn from_fn(grid: GridSpec<S>, f: impl Fn(&[S]) -> S) -> Result<Self> {
        let xs = grid.coordinates();
        let values: Vec<S> = (0..grid.len())
            .map(|idx| {
                let [i, j] = grid.unflatten(idx);
                if grid.dim == 1 {
                    f(&[xs[i]])
                } else {
                    f(&[xs[i], xs[j]])
                }
            })
            .collect();
        Self::from_values(grid, values)
    }

    /// Samples a radial function `f(|x|)`.
    pub fn from_radial(grid: GridSpec<S>, f: impl Fn(S) -> S) -> Result<Self> {
        let values = (0..grid.len()).map(|idx| f(grid.radius(idx))).collect();
        Self::from_values(grid, values)
    }

    /// Discrete delta of unit mass at the origin.
    pub fn delta(grid: GridSpec<S>) -> Self {
        let mut f = Self::zeros(grid);
        let c = grid.center_index();
        let idx = if grid.dim == 1 { c } else { c * grid.points + c };
        f.values[idx] = S::one() / grid.cell_volume();
        f
    }

    pub fn grid(&self) -> &GridSpec<S> {
        &self.grid
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn is_diverged(&self) -> bool {
        self.diverged
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Self::from_values_unchecked(self.grid, self.values.iter().map(|v| f(*v)).collect())
    }

    pub fn scaled(&self, a: S) -> Self {
        self.map(|v| a * v)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: S, other: &Self, b: S) -> Result<Self> {
        self.check_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * *x + b * *y)
            .collect();
        Ok(Self::from_values_unchecked(self.grid, values))
    }

    /// Pointwise product.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| *x * *y).collect();
        Ok(Self::from_values_unchecked(self.grid, values))
    }

    pub(crate) fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::argument("fields live on different grids"))
        }
    }

    pub fn sup_norm(&self) -> S {
        sup_norm(self)
    }

    pub fn lp_norm(&self, r: S) -> Result<S> {
        lp_norm(self, r)
    }

    /// Discrete integral `Σ v Δx^N`.
    pub fn integral(&self) -> S {
        self.values.iter().copied().sum::<S>() * self.grid.cell_volume()
    }

    /// Average over the torus.
    pub fn mean(&self) -> S {
        self.values.iter().copied().sum::<S>() / S::from_usize_lossy(self.values.len())
    }

    pub fn min_value(&self) -> S {
        self.values.iter().copied().fold(S::infinity(), S::min)
    }
}

/// Discrete `max |v|`.
pub fn sup_norm<S: Scalar>(field: &Field<S>) -> S {
    field.values.iter().fold(S::zero(), |m, v| m.max(v.abs()))
}

/// `(Σ |v|^r Δx^N)^{1/r}` for `r ∈ [1, ∞)`; `r = ∞` gives the sup norm.
pub fn lp_norm<S: Scalar>(field: &Field<S>, r: S) -> Result<S> {
    if !(r >= S::one()) {
        return Err(Error::argument(format!("Lebesgue exponent {} below 1", r.as_f64())));
    }
    if r.is_infinite() {
        return Ok(sup_norm(field));
    }
    let dv = field.grid.cell_volume();
    if r == S::one() {
        return Ok(field.values.iter().map(|v| v.abs()).sum::<S>() * dv);
    }
    if r == S::lit(2.0) {
        return Ok((field.values.iter().map(|v| *v * *v).sum::<S>() * dv).sqrt());
    }
    // scale by the sup norm to keep |v|^r representable
    let sup = sup_norm(field);
    if sup == S::zero() {
        return Ok(S::zero());
    }
    let sum: S = field.values.iter().map(|v| (v.abs() / sup).powf(r)).sum();
    Ok(sup * (sum * dv).powf(S::one() / r))
}

/// Discrete Fourier coefficients of a field.
#[derive(Debug, Clone)]
pub struct Spectrum<S> {
    grid: GridSpec<S>,
    coeffs: Vec<Complex<S>>,
}

impl<S: Scalar> Spectrum<S> {
    pub fn grid(&self) -> &GridSpec<S> {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex<S>] {
        &self.coeffs
    }
}

/// FFT plans and frequency tables for one grid.
#[derive(Clone)]
pub struct Spectral<S: Scalar> {
    grid: GridSpec<S>,
    forward: Arc<dyn Fft<S>>,
    inverse: Arc<dyn Fft<S>>,
    radial: Arc<Vec<S>>,
}

impl<S: Scalar> std::fmt::Debug for Spectral<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl<S: Scalar> Spectral<S> {
    pub fn new(grid: GridSpec<S>) -> Result<Self> {
        grid.validate()?;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.points);
        let inverse = planner.plan_fft_inverse(grid.points);
        let freq: Vec<S> = (0..grid.points).map(|j| grid.frequency(j)).collect();
        let radial = (0..grid.len())
            .map(|idx| {
                let [i, j] = grid.unflatten(idx);
                if grid.dim == 1 {
                    freq[i].abs()
                } else {
                    freq[i].hypot(freq[j])
                }
            })
            .collect();
        Ok(Self {
            grid,
            forward,
            inverse,
            radial: Arc::new(radial),
        })
    }

    pub fn grid(&self) -> &GridSpec<S> {
        &self.grid
    }

    /// `|ξ|` for every coefficient, in transform order.
    pub fn radial_frequencies(&self) -> &[S] {
        &self.radial
    }

    fn transform(&self, buf: &mut [Complex<S>], plan: &Arc<dyn Fft<S>>) {
        plan.process(buf);
        if self.grid.dim == 2 {
            transpose_square(buf, self.grid.points);
            plan.process(buf);
            transpose_square(buf, self.grid.points);
        }
    }

    pub fn forward(&self, field: &Field<S>) -> Result<Spectrum<S>> {
        if !self.grid.same_as(&field.grid) {
            return Err(Error::argument("field grid differs from the transform grid"));
        }
        let mut coeffs: Vec<Complex<S>> =
            field.values.iter().map(|v| Complex::new(*v, S::zero())).collect();
        self.transform(&mut coeffs, &self.forward);
        Ok(Spectrum {
            grid: self.grid,
            coeffs,
        })
    }

    /// Inverse transform of `multiplier · spectrum`, keeping the real part.
    pub fn inverse_with(&self, spectrum: &Spectrum<S>, multiplier: Option<&[S]>) -> Field<S> {
        let mut buf = spectrum.coeffs.clone();
        if let Some(m) = multiplier {
            for (c, k) in buf.iter_mut().zip(m) {
                *c = *c * *k;
            }
        }
        self.transform(&mut buf, &self.inverse);
        let norm = S::one() / S::from_usize_lossy(self.grid.len());
        Field::from_values_unchecked(self.grid, buf.into_iter().map(|c| c.re * norm).collect())
    }

    pub fn inverse(&self, spectrum: &Spectrum<S>) -> Field<S> {
        self.inverse_with(spectrum, None)
    }

    /// Applies the Fourier multiplier `m(ξ)` given coefficient by coefficient.
    pub fn apply_multiplier(&self, field: &Field<S>, multiplier: &[S]) -> Result<Field<S>> {
        if multiplier.len() != self.grid.len() {
            return Err(Error::argument("multiplier length differs from the grid"));
        }
        let spec = self.forward(field)?;
        Ok(self.inverse_with(&spec, Some(multiplier)))
    }

    /// Symbol values `σ(|ξ|)` for every coefficient.
    pub fn symbol_values(&self, symbol: &Symbol<S>) -> Vec<S> {
        self.radial.iter().map(|xi| symbol.eval(*xi)).collect()
    }

    /// Multiplier of `e^{-tσ}`.
    pub fn propagator(&self, symbol: &Symbol<S>, t: S) -> Vec<S> {
        self.radial.iter().map(|xi| (-t * symbol.eval(*xi)).exp()).collect()
    }

    pub fn semigroup(&self, field: &Field<S>, symbol: &Symbol<S>, t: S) -> Result<Field<S>> {
        if !(t >= S::zero()) {
            return Err(Error::domain("semigroup time must be nonnegative"));
        }
        if t == S::zero() {
            self.forward(field)?;
            return Ok(field.clone());
        }
        self.apply_multiplier(field, &self.propagator(symbol, t))
    }
}

fn transpose_square<T: Copy>(buf: &mut [T], m: usize) {
    for i in 0..m {
        for j in (i + 1)..m {
            buf.swap(i * m + j, j * m + i);
        }
    }
}

/// Multiplier kinds from the generator `L = Δ − (−Δ)^s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorKind<S> {
    /// `e^{tL}`.
    Semigroup { t: S },
    /// `(−Δ)^s`.
    FractionalLaplacian,
    /// `L` itself.
    MixedGenerator,
}

/// Multiplier operator of order `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralOperator<S> {
    pub s: S,
    pub kind: OperatorKind<S>,
}

impl<S: Scalar> SpectralOperator<S> {
    pub fn new(s: S, kind: OperatorKind<S>) -> Result<Self> {
        if !(s > S::zero() && s <= S::one()) {
            return Err(Error::domain(format!("order s = {} outside (0, 1]", s.as_f64())));
        }
        if let OperatorKind::Semigroup { t } = kind {
            if !(t >= S::zero() && t.is_finite()) {
                return Err(Error::domain("semigroup time must be nonnegative"));
            }
        }
        Ok(Self { s, kind })
    }

    /// Multiplier at frequency magnitude `ξ`.
    pub fn multiplier(&self, xi: S) -> S {
        let sym = Symbol::Mixed { s: self.s };
        match self.kind {
            OperatorKind::Semigroup { t } => (-t * sym.eval(xi)).exp(),
            OperatorKind::FractionalLaplacian => Symbol::Fractional { s: self.s }.eval(xi),
            OperatorKind::MixedGenerator => -sym.eval(xi),
        }
    }

    pub fn apply(&self, field: &Field<S>) -> Result<Field<S>> {
        let sp = Spectral::new(*field.grid())?;
        let m: Vec<S> = sp.radial_frequencies().iter().map(|xi| self.multiplier(*xi)).collect();
        sp.apply_multiplier(field, &m)
    }
}

/// `e^{tL} f` with `L = Δ − (−Δ)^s`.
pub fn apply_semigroup<S: Scalar>(field: &Field<S>, s: S, t: S) -> Result<Field<S>> {
    apply_symbol_semigroup(field, &Symbol::Mixed { s }, t)
}

/// `e^{-tσ} f` for any [`Symbol`], e.g. the pure heat diagnostic.
pub fn apply_symbol_semigroup<S: Scalar>(field: &Field<S>, symbol: &Symbol<S>, t: S) -> Result<Field<S>> {
    Spectral::new(*field.grid())?.semigroup(field, symbol, t)
}

/// `(−Δ)^s f`; `s = 1` gives `−Δ`.
pub fn apply_fractional_laplacian<S: Scalar>(field: &Field<S>, s: S) -> Result<Field<S>> {
    SpectralOperator::new(s, OperatorKind::FractionalLaplacian)?.apply(field)
}

/// `L f = Δf − (−Δ)^s f`.
pub fn apply_generator<S: Scalar>(field: &Field<S>, s: S) -> Result<Field<S>> {
    SpectralOperator::new(s, OperatorKind::MixedGenerator)?.apply(field)
}

/// Grid realization of the fundamental solution: `e^{-tσ}` applied to a
/// discrete delta of unit mass at the origin.
pub fn kernel_field<S: Scalar>(grid: &GridSpec<S>, symbol: &Symbol<S>, t: S) -> Result<Field<S>> {
    if !(t > S::zero()) {
        return Err(Error::domain("kernel time must be positive"));
    }
    apply_symbol_semigroup(&Field::delta(*grid), symbol, t)
}
