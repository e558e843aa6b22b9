//! Least-squares fits on log–log data.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Slope of the least-squares line through `(ln x_i, ln y_i)`.
pub fn loglog_slope<S: Scalar>(xs: &[S], ys: &[S]) -> Result<S> {
    if xs.len() != ys.len() {
        return Err(Error::argument("abscissae and ordinates differ in length"));
    }
    if xs.len() < 2 {
        return Err(Error::argument("a slope needs at least two points"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > S::zero() && v.is_finite())) {
        return Err(Error::Data("log–log fit needs finite positive data".into()));
    }
    let lx: Vec<S> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<S> = ys.iter().map(|y| y.ln()).collect();
    linear_slope(&lx, &ly)
}

/// Slope of the least-squares line through `(x_i, y_i)`.
pub fn linear_slope<S: Scalar>(xs: &[S], ys: &[S]) -> Result<S> {
    let n = S::from_usize_lossy(xs.len());
    let mx = xs.iter().copied().sum::<S>() / n;
    let my = ys.iter().copied().sum::<S>() / n;
    let mut sxx = S::zero();
    let mut sxy = S::zero();
    for (x, y) in xs.iter().zip(ys) {
        sxx = sxx + (*x - mx) * (*x - mx);
        sxy = sxy + (*x - mx) * (*y - my);
    }
    if sxx == S::zero() {
        return Err(Error::argument("abscissae are all equal"));
    }
    Ok(sxy / sxx)
}

/// `n` points spaced geometrically from `lo` to `hi` inclusive.
pub fn geometric_points<S: Scalar>(lo: S, hi: S, n: usize) -> Vec<S> {
    if n == 1 {
        return vec![lo];
    }
    let ratio = hi / lo;
    (0..n)
        .map(|k| {
            if k + 1 == n {
                hi
            } else {
                lo * ratio.powf(S::from_usize_lossy(k) / S::from_usize_lossy(n - 1))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let xs = geometric_points(1.0f64, 1e3, 7);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-1.25)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() + 1.25).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(loglog_slope(&[1.0f64], &[1.0]).is_err());
        assert!(loglog_slope(&[1.0f64, 2.0], &[1.0, 0.0]).is_err());
        assert!(loglog_slope(&[2.0f64, 2.0], &[1.0, 3.0]).is_err());
    }

    #[test]
    fn geometric_endpoints_are_exact() {
        let p = geometric_points(10.0f64, 100.0, 5);
        assert_eq!(p[0], 10.0);
        assert_eq!(p[4], 100.0);
    }
}
