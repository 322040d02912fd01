//! Quadrature helpers: adaptive Simpson and fixed Gauss-Legendre panels.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Adaptive Simpson integration of a smooth function to absolute tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if lo >= hi {
        return Ok(0.0);
    }
    let fl = f(lo);
    let fh = f(hi);
    let mid = 0.5 * (lo + hi);
    let fm = f(mid);
    let whole = (hi - lo) / 6.0 * (fl + 4.0 * fm + fh);
    simpson_rec(f, lo, hi, fl, fm, fh, whole, tol, 48).ok_or(Error::QuadratureFailure { lo, hi, tol })
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    fl: f64,
    fm: f64,
    fh: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Option<f64> {
    let mid = 0.5 * (lo + hi);
    let lm = 0.5 * (lo + mid);
    let rm = 0.5 * (mid + hi);
    let flm = f(lm);
    let frm = f(rm);
    let left = (mid - lo) / 6.0 * (fl + 4.0 * flm + fm);
    let right = (hi - mid) / 6.0 * (fm + 4.0 * frm + fh);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || hi - lo < 1e-14 {
        return Some(left + right + delta / 15.0);
    }
    if depth == 0 {
        return None;
    }
    let a = simpson_rec(f, lo, mid, fl, flm, fm, left, tol / 2.0, depth - 1)?;
    let b = simpson_rec(f, mid, hi, fm, frm, fh, right, tol / 2.0, depth - 1)?;
    Some(a + b)
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// computed once by Newton iteration on the Legendre recurrence.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0_f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0_f64, x);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

static GL8: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
static GL16: OnceLock<Vec<(f64, f64)>> = OnceLock::new();

/// 8-point Gauss-Legendre on [lo, hi]; exact through degree 15.
pub fn gl8<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> f64 {
    let rule = GL8.get_or_init(|| gauss_legendre(8));
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    rule.iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

/// 16-point Gauss-Legendre on [lo, hi].
pub fn gl16<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> f64 {
    let rule = GL16.get_or_init(|| gauss_legendre(16));
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    rule.iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>() * h
}
