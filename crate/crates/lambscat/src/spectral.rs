//! Spectrum of the coupled operator.
//!
//! The essential and absolutely continuous spectrum is the half-line
//! (-inf, 0]. Positive eigenvalues solve θ + Γ(λ) = 0; writing x = √λ this is
//! the scalar equation
//!
//! ```text
//! f(x) = 1/x + Σᵢ cᵢ²/(x² - λᵢ) - θ = 0,   x > 0,
//! ```
//!
//! solved by a dense sign-change scan (split at the poles x = √λᵢ when L has
//! positive spectrum) plus bisection. The point spectrum is empty exactly
//! when σ(L) ⊂ (-inf, 0) and θ ≤ 0.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::NormalizedModel;

/// Number of sign probes per pole-free subinterval.
const SCAN_PROBES: usize = 4096;

/// The half-line (-inf, sup].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfLine {
    pub sup: f64,
}

impl HalfLine {
    pub fn contains(&self, x: f64) -> bool {
        x <= self.sup
    }
}

impl std::fmt::Display for HalfLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(-inf, {}]", self.sup)
    }
}

/// A normalizable eigenstate: field part e^{-√λ x} with decay rate √λ and
/// oscillator part yᵢ = -√λ cᵢ/(λ - λᵢ) (reported unnormalized, with the
/// joint normalization constant as a derived field).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundState {
    pub lambda: f64,
    pub decay_rate: f64,
    pub y: Vec<f64>,
    pub normalization: f64,
}

/// Spectral data of the coupled operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralData {
    pub essential: HalfLine,
    pub eigenvalues: Vec<f64>,
    pub bound_states: Vec<BoundState>,
    pub pp_empty: bool,
}

/// Essential (= absolutely continuous) spectrum: always (-inf, 0].
pub fn essential_spectrum(_model: &NormalizedModel) -> HalfLine {
    HalfLine { sup: 0.0 }
}

/// The empty-point-spectrum criterion: σ(L) ⊂ (-inf, 0) and θ ≤ 0.
pub fn pp_empty_check(model: &NormalizedModel) -> bool {
    model.lambda.iter().all(|&l| l < 0.0) && model.theta <= 0.0
}

fn eigen_equation(model: &NormalizedModel, x: f64) -> f64 {
    let mut s = 1.0 / x - model.theta;
    for (&l, &ci) in model.lambda.iter().zip(&model.c) {
        s += ci * ci / (x * x - l);
    }
    s
}

fn bisect(model: &NormalizedModel, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = eigen_equation(model, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-12 * mid.max(1.0) {
            break;
        }
        let fm = eigen_equation(model, mid);
        if (flo <= 0.0) == (fm <= 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Probe points on (lo, hi) clustered geometrically toward both endpoints
/// (f blows up like a simple pole there).
fn probes(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let edge = 1e-9 * span;
    let half = SCAN_PROBES / 2;
    let mut xs = Vec::with_capacity(SCAN_PROBES);
    let ratio = (0.5 * span / edge).ln() / (half as f64 - 1.0);
    for k in 0..half {
        xs.push(lo + edge * (ratio * k as f64).exp());
    }
    for k in 0..half {
        xs.push(hi - edge * (ratio * k as f64).exp());
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    xs
}

/// All positive eigenvalues of the coupled operator with their bound states.
pub fn point_spectrum(model: &NormalizedModel) -> Result<SpectralData> {
    let max_sqrt = model
        .lambda
        .iter()
        .fold(0.0_f64, |m, l| m.max(l.abs().sqrt()));
    let x_max = 2.0 * (1.0 + max_sqrt) * (1.0 + model.moment(0) + model.theta.abs());

    // subinterval boundaries: poles of f inside (0, x_max]
    let mut cuts: Vec<f64> = model
        .lambda
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|l| l.sqrt())
        .filter(|&x| x < x_max)
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut bounds = vec![0.0];
    bounds.extend(cuts);
    bounds.push(x_max);

    let mut xs_roots: Vec<f64> = Vec::new();
    for w in bounds.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let xs = probes(lo, hi);
        let mut prev: Option<(f64, f64)> = None;
        for &x in &xs {
            let fx = eigen_equation(model, x);
            if !fx.is_finite() {
                prev = None;
                continue;
            }
            if let Some((xp, fp)) = prev {
                if (fp <= 0.0) != (fx <= 0.0) {
                    xs_roots.push(bisect(model, xp, x));
                }
            }
            prev = Some((x, fx));
        }
    }
    // post-hoc guard on the heuristic upper bound: f must keep one sign on
    // [x_max, 10 x_max]; a crossing found there is refined and kept
    {
        let mut prev: Option<(f64, f64)> = None;
        for k in 0..=256 {
            let x = x_max * (1.0 + 9.0 * k as f64 / 256.0);
            let fx = eigen_equation(model, x);
            if let Some((xp, fp)) = prev {
                if (fp <= 0.0) != (fx <= 0.0) {
                    xs_roots.push(bisect(model, xp, x));
                }
            }
            prev = Some((x, fx));
        }
    }
    xs_roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs_roots.dedup_by(|a, b| (*a - *b).abs() < 1e-10 * (1.0 + b.abs()));

    let mut eigenvalues = Vec::new();
    let mut bound_states = Vec::new();
    for x in xs_roots {
        let fx = eigen_equation(model, x);
        if !fx.is_finite() || fx.abs() > 1e-6 {
            return Err(Error::ScanIncomplete(format!(
                "bisection failed to refine a crossing near x = {x} (f = {fx:.3e})"
            )));
        }
        let lambda = x * x;
        let y: Vec<f64> = model
            .lambda
            .iter()
            .zip(&model.c)
            .map(|(&l, &ci)| -x * ci / (lambda - l))
            .collect();
        // ||phi||^2 = 1/(2x) for phi = e^{-x s}; joint norm over field + oscillator
        let norm_sq = 1.0 / (2.0 * x) + y.iter().map(|v| v * v).sum::<f64>();
        bound_states.push(BoundState {
            lambda,
            decay_rate: x,
            y,
            normalization: norm_sq.sqrt().recip(),
        });
        eigenvalues.push(lambda);
    }
    Ok(SpectralData {
        essential: essential_spectrum(model),
        pp_empty: eigenvalues.is_empty(),
        eigenvalues,
        bound_states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gamma, normalize, ModelSpec};
    use num_complex::Complex64;

    fn model(lambda: Vec<f64>, c: Vec<f64>, theta: f64) -> NormalizedModel {
        normalize(&ModelSpec {
            eigenvalues: lambda,
            coupling: c,
            metric: None,
            theta,
        })
        .unwrap()
    }

    #[test]
    fn pp_empty_criterion() {
        assert!(pp_empty_check(&model(vec![-1.0], vec![1.0], 0.0)));
        assert!(!pp_empty_check(&model(vec![-1.0], vec![1.0], 2.0 / 3.0)));
        assert!(pp_empty_check(&model(vec![-1.0], vec![1.0], -5.0)));
        assert!(!pp_empty_check(&model(vec![-1.0, 0.5], vec![1.0, 1.0], -1.0)));
    }

    #[test]
    fn essential_spectrum_is_negative_half_line() {
        let hl = essential_spectrum(&model(vec![-1.0], vec![1.0], 0.0));
        assert_eq!(hl.sup, 0.0);
        assert!(hl.contains(-3.0));
        assert!(!hl.contains(0.1));
    }

    #[test]
    fn lamb_has_empty_point_spectrum() {
        let sd = point_spectrum(&model(vec![-1.0], vec![1.0], 0.0)).unwrap();
        assert!(sd.pp_empty);
        assert!(sd.eigenvalues.is_empty());
    }

    #[test]
    fn bound_state_matches_bisection_oracle() {
        // 1/x + 1/(x^2+1) = 2, frozen bisection value x = 0.73898362150450624
        let m = model(vec![-1.0], vec![1.0], 2.0);
        let sd = point_spectrum(&m).unwrap();
        assert_eq!(sd.eigenvalues.len(), 1);
        let bs = &sd.bound_states[0];
        assert!((bs.decay_rate - 0.738983621504506).abs() < 1e-10);
        assert!((bs.lambda - 0.546096792851915).abs() < 1e-10);
        assert!((bs.y[0] + 0.477967243009012).abs() < 1e-10);
        // eigenvalue equation residual |theta + Gamma(lambda)|
        let g = gamma(&m, Complex64::new(bs.lambda, 0.0)).unwrap();
        assert!((g + m.theta).norm() < 1e-9);
        // boundary condition: theta*phi'(0) + phi(0) = <c, y> with phi = e^{-x s}
        let lhs = m.theta * (-bs.decay_rate) + 1.0;
        let rhs: f64 = m.c.iter().zip(&bs.y).map(|(c, y)| c * y).sum();
        assert!((lhs - rhs).abs() < 1e-9);
        // eigenvector relation (lambda - lambda_i) y_i = -x c_i
        for ((l, c), y) in m.lambda.iter().zip(&m.c).zip(&bs.y) {
            assert!(((bs.lambda - l) * y + bs.decay_rate * c).abs() < 1e-10);
        }
    }

    #[test]
    fn positive_oscillator_spectrum_splits_scan_at_poles() {
        // lambda = 4 puts a pole of f at x = 2; theta > 0 guarantees a root
        let m = model(vec![4.0], vec![1.0], 1.5);
        let sd = point_spectrum(&m).unwrap();
        assert!(!sd.pp_empty);
        for bs in &sd.bound_states {
            let g = gamma(&m, Complex64::new(bs.lambda, 0.0)).unwrap();
            assert!((g + m.theta).norm() < 1e-9, "residual {}", (g + m.theta).norm());
        }
    }
}
