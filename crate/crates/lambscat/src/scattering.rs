//! Lax-Phillips scattering layer.
//!
//! In d'Alembert coordinates the incoming and outgoing translation profiles
//! of a state are f₋ = a' and f₊ = b'. Forward evolution extends b' to
//! positive arguments; the incoming extension of a' to negative arguments is
//! obtained by running the time-reversed data (φ₀, y₀, -φ̇₀, -ẏ₀) forward,
//! under which a'(-s) = -b̃'(s). The two profiles are linked in Fourier space
//! by the unimodular multiplier
//!
//! ```text
//! f̂₊(κ) = -p(iκ)/p(-iκ) · f̂₋(κ),
//! ```
//!
//! and the states that are neither incoming in the past nor outgoing in the
//! future form a deg(p)-dimensional space on which the compressed evolution
//! acts as e^{-tB}, σ(B) = resonances of p, in the basis xᵏ e^{zⱼx} on
//! (-∞, 0].

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::{evolve, evolve_from_state, InitialData, Trajectory};
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::NormalizedModel;
use crate::poly::{build_p_closed_form, classify_roots, find_roots, RealPolynomial, Root, RootSet};
use crate::quad::adaptive_simpson;
use crate::spectral::{point_spectrum, pp_empty_check};

/// Required bound on the relative truncated L² mass outside the window.
pub const TRUNCATION_BOUND: f64 = 1e-6;

/// Sampled translation profiles on a uniform grid over [-X, X].
///
/// `outgoing_rep` determines f₊ on the whole window and f₋ on [0, X];
/// `incoming_rep` determines f₋ on the whole window and f₊ on [-X, 0].
/// Samples outside a profile's coverage are zero; the coverage is recorded in
/// the `*_range` fields and [`TranslationRep::merged`] combines both runs.
#[derive(Debug, Clone, Serialize)]
pub struct TranslationRep {
    pub x_max: f64,
    pub h: f64,
    pub grid: Vec<f64>,
    pub f_minus: Vec<f64>,
    pub f_plus: Vec<f64>,
    pub f_minus_range: (f64, f64),
    pub f_plus_range: (f64, f64),
    /// Estimated L² mass of the profiles outside [-X, X].
    pub truncation_mass: f64,
    /// Energy of the originating state.
    pub energy: f64,
}

impl TranslationRep {
    fn trapezoid_norm_sq(&self, f: &[f64], lo: f64, hi: f64) -> f64 {
        let mut s = 0.0;
        for j in 0..f.len() - 1 {
            let (x0, x1) = (self.grid[j], self.grid[j + 1]);
            if x0 >= lo && x1 <= hi {
                s += 0.5 * (f[j] * f[j] + f[j + 1] * f[j + 1]) * (x1 - x0);
            }
        }
        s
    }

    /// Trapezoid ||f₋||² over grid cells inside [lo, hi].
    pub fn norm_sq_minus_on(&self, lo: f64, hi: f64) -> f64 {
        self.trapezoid_norm_sq(&self.f_minus, lo, hi)
    }

    /// Trapezoid ||f₊||² over grid cells inside [lo, hi].
    pub fn norm_sq_plus_on(&self, lo: f64, hi: f64) -> f64 {
        self.trapezoid_norm_sq(&self.f_plus, lo, hi)
    }

    /// Combine an outgoing and an incoming rep of the same state into one
    /// with both profiles covering the full window.
    pub fn merged(outgoing: &TranslationRep, incoming: &TranslationRep) -> Result<TranslationRep> {
        if outgoing.grid.len() != incoming.grid.len() || outgoing.h != incoming.h {
            return Err(Error::InvalidData("representations live on different grids".into()));
        }
        let mut rep = outgoing.clone();
        rep.f_minus = incoming.f_minus.clone();
        rep.f_minus_range = incoming.f_minus_range;
        rep.truncation_mass = outgoing.truncation_mass.max(incoming.truncation_mass);
        Ok(rep)
    }
}

fn require_pp_empty(model: &NormalizedModel) -> Result<()> {
    if pp_empty_check(model) {
        return Ok(());
    }
    let eigenvalues = point_spectrum(model).map(|sd| sd.eigenvalues).unwrap_or_default();
    Err(Error::PointSpectrumPresent { eigenvalues })
}

struct RepRun {
    grid: Vec<f64>,
    sub: usize,
    traj: Trajectory,
    x_max: f64,
    h: f64,
    decay: f64,
    energy: f64,
}

/// Shared setup: snap the window to the grid, pick an RK step dividing h that
/// respects the boundary stiffness bound, and evolve for the window length.
fn rep_run(model: &NormalizedModel, data: &InitialData, x_max: f64, h: f64) -> Result<RepRun> {
    if !h.is_finite() || h <= 0.0 || x_max <= h {
        return Err(Error::InvalidData(format!("need 0 < h < x_max, got h = {h}, x_max = {x_max}")));
    }
    require_pp_empty(model)?;
    let m = (x_max / h).round() as usize;
    let x_max = m as f64 * h;
    let grid: Vec<f64> = (0..=2 * m).map(|j| -x_max + j as f64 * h).collect();
    let mut sub = 1usize;
    if model.theta != 0.0 {
        let dt_max = model.theta.abs() / 5.0;
        if h > dt_max {
            sub = (h / dt_max).ceil() as usize;
        }
    }
    let dt = h / sub as f64;
    let traj = evolve(model, data, x_max, dt, None)?;
    let p = build_p_closed_form(model);
    let roots = classify_roots(model, &find_roots(&p)?)?;
    let decay = roots
        .min_resonance_decay()
        .ok_or_else(|| Error::InvalidModel("no resonances found".into()))?;
    let energy = traj.energy_samples[0].1.total;
    Ok(RepRun {
        grid,
        sub,
        traj,
        x_max,
        h,
        decay,
        energy,
    })
}

/// Estimated L² mass of the outgoing tail beyond X: the mass in the trailing
/// window [X-W, X] extrapolated with the resonance decay rate.
fn outgoing_tail_mass(run: &RepRun, f_plus: &[f64]) -> f64 {
    let w = (run.x_max / 2.0).min(10.0_f64.max(2.0 / run.decay));
    let lo = run.x_max - w;
    let mut m_win = 0.0;
    for j in 0..f_plus.len() - 1 {
        let x0 = run.grid[j];
        if x0 >= lo {
            m_win += 0.5 * (f_plus[j] * f_plus[j] + f_plus[j + 1] * f_plus[j + 1]) * run.h;
        }
    }
    let r = (-2.0 * run.decay * w).exp();
    m_win * r / (1.0 - r).max(1e-12)
}

/// Mass of an analytic profile part beyond the window edge.
fn analytic_tail_mass<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    adaptive_simpson(&|s| f(s).powi(2), lo, hi, 1e-14).unwrap_or(0.0)
}

/// Outgoing translation representation: f₊ = b' on all of [-X, X]
/// (analytic for x ≤ 0, from the forward run for x > 0) and f₋ = a' on [0, X].
pub fn outgoing_rep(
    model: &NormalizedModel,
    data: &InitialData,
    x_max: f64,
    h: f64,
) -> Result<TranslationRep> {
    let run = rep_run(model, data, x_max, h)?;
    let chars = run.traj.characteristics();
    let npts = run.grid.len();
    let mid = (npts - 1) / 2;
    let mut f_plus = vec![0.0; npts];
    let mut f_minus = vec![0.0; npts];
    for (j, &x) in run.grid.iter().enumerate() {
        if x <= 0.0 {
            f_plus[j] = chars.b_neg_prime(x);
        } else {
            f_plus[j] = run.traj.bprime_node((j - mid) * run.sub);
        }
        if x >= 0.0 {
            f_minus[j] = chars.a_prime(x);
        }
    }
    let hi_supp = chars.support_hi();
    let mut mass = outgoing_tail_mass(&run, &f_plus);
    mass += analytic_tail_mass(|s| chars.b_neg_prime(-s), run.x_max, hi_supp);
    mass += analytic_tail_mass(|s| chars.a_prime(s), run.x_max, hi_supp);
    if mass > TRUNCATION_BOUND * run.energy && run.energy > 0.0 {
        return Err(Error::InsufficientDecay {
            mass,
            bound: TRUNCATION_BOUND * run.energy,
            x_max: run.x_max,
        });
    }
    Ok(TranslationRep {
        x_max: run.x_max,
        h: run.h,
        grid: run.grid,
        f_minus,
        f_plus,
        f_minus_range: (0.0, run.x_max),
        f_plus_range: (-run.x_max, run.x_max),
        truncation_mass: mass,
        energy: run.energy,
    })
}

/// Incoming translation representation: f₋ = a' on all of [-X, X]. The
/// negative-axis extension comes from the forward run of the time-reversed
/// data via a'(-s) = -b̃'(s).
pub fn incoming_rep(
    model: &NormalizedModel,
    data: &InitialData,
    x_max: f64,
    h: f64,
) -> Result<TranslationRep> {
    let reversed = data.time_reversed();
    let run = rep_run(model, &reversed, x_max, h)?;
    // characteristics of the original data for the analytic halves
    let chars = crate::dynamics::Characteristics::build(&data.phi0, &data.phidot0)?;
    let npts = run.grid.len();
    let mid = (npts - 1) / 2;
    let mut f_minus = vec![0.0; npts];
    let mut f_plus = vec![0.0; npts];
    for (j, &x) in run.grid.iter().enumerate() {
        if x >= 0.0 {
            f_minus[j] = chars.a_prime(x);
        } else {
            f_minus[j] = -run.traj.bprime_node((mid - j) * run.sub);
        }
        if x <= 0.0 {
            f_plus[j] = chars.b_neg_prime(x);
        }
    }
    let hi_supp = chars.support_hi();
    let mut mass = outgoing_tail_mass(&run, &{
        // reversed outgoing profile drives the incoming tail estimate
        let mut rev = vec![0.0; npts];
        for (j, &x) in run.grid.iter().enumerate() {
            if x > 0.0 {
                rev[j] = run.traj.bprime_node((j - mid) * run.sub);
            }
        }
        rev
    });
    mass += analytic_tail_mass(|s| chars.a_prime(s), run.x_max, hi_supp);
    mass += analytic_tail_mass(|s| chars.b_neg_prime(-s), run.x_max, hi_supp);
    if mass > TRUNCATION_BOUND * run.energy && run.energy > 0.0 {
        return Err(Error::InsufficientDecay {
            mass,
            bound: TRUNCATION_BOUND * run.energy,
            x_max: run.x_max,
        });
    }
    Ok(TranslationRep {
        x_max: run.x_max,
        h: run.h,
        grid: run.grid,
        f_minus,
        f_plus,
        f_minus_range: (-run.x_max, run.x_max),
        f_plus_range: (-run.x_max, 0.0),
        truncation_mass: mass,
        energy: run.energy,
    })
}

/// The scattering multiplier s(κ) = -p(iκ)/p(-iκ).
#[derive(Debug, Clone)]
pub struct TransferFunction {
    pub p: RealPolynomial,
}

impl TransferFunction {
    pub fn new(p: RealPolynomial) -> TransferFunction {
        TransferFunction { p }
    }

    /// One sample; unimodular for real κ because p has real coefficients.
    pub fn eval(&self, kappa: f64) -> Complex64 {
        let ik = Complex64::new(0.0, kappa);
        -self.p.eval_complex(ik) / self.p.eval_complex(-ik)
    }

    pub fn eval_many(&self, kappas: &[f64]) -> Vec<Complex64> {
        kappas.iter().map(|&k| self.eval(k)).collect()
    }
}

/// Trapezoid Fourier integral of uniform samples at the frequencies κ,
/// using an incremental phase rotor per frequency.
fn fourier_samples(grid: &[f64], f: &[f64], kappas: &[f64]) -> Vec<Complex64> {
    let h = grid[1] - grid[0];
    let x0 = grid[0];
    let n = f.len();
    kappas
        .iter()
        .map(|&k| {
            let rot = Complex64::from_polar(1.0, -k * h);
            let mut phase = Complex64::from_polar(1.0, -k * x0);
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &fj) in f.iter().enumerate() {
                let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
                acc += w * fj * phase;
                phase *= rot;
            }
            acc * h
        })
        .collect()
}

/// The DFT frequencies κ_m = πm/X for |m| ≤ X/(2h).
pub fn dft_frequencies(x_max: f64, h: f64) -> Vec<f64> {
    let m_max = (x_max / (2.0 * h)).floor() as i64;
    (-m_max..=m_max)
        .map(|m| std::f64::consts::PI * m as f64 / x_max)
        .collect()
}

/// Relative L² error of the multiplier relation ||f̂₊ - s·f̂₋|| / ||f̂₋|| on
/// the merged representation of `data`.
pub fn verify_scattering_relation(
    model: &NormalizedModel,
    data: &InitialData,
    x_max: f64,
    h: f64,
) -> Result<f64> {
    let rep = TranslationRep::merged(
        &outgoing_rep(model, data, x_max, h)?,
        &incoming_rep(model, data, x_max, h)?,
    )?;
    scattering_relation_error(model, &rep)
}

/// Same check on an already-built (merged) representation.
pub fn scattering_relation_error(model: &NormalizedModel, rep: &TranslationRep) -> Result<f64> {
    let kappas = dft_frequencies(rep.x_max, rep.h);
    let tf = TransferFunction::new(build_p_closed_form(model));
    let fhat_m = fourier_samples(&rep.grid, &rep.f_minus, &kappas);
    let fhat_p = fourier_samples(&rep.grid, &rep.f_plus, &kappas);
    let mut num = 0.0;
    let mut den = 0.0;
    for ((fm, fp), &k) in fhat_m.iter().zip(&fhat_p).zip(&kappas) {
        let s = tf.eval(k);
        num += (fp - s * fm).norm_sqr();
        den += fm.norm_sqr();
    }
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok((num / den).sqrt())
}

/// Sup-norm discrepancy between the outgoing profile of the state evolved to
/// time t (recomputed by restarting the reduced ODE from the dense state) and
/// the shifted profile of the original state.
pub fn translation_covariance_check(
    model: &NormalizedModel,
    data: &InitialData,
    t: f64,
    x_max: f64,
    h: f64,
) -> Result<f64> {
    if t < 0.0 || t >= x_max {
        return Err(Error::OutOfRange(format!("need 0 <= t < x_max, got t = {t}")));
    }
    let run = rep_run(model, data, x_max, h)?;
    let dt = run.h / run.sub as f64;
    let k0 = (t / dt).round() as usize;
    let t_snap = k0 as f64 * dt;
    let restart = evolve_from_state(&run.traj, t_snap, run.x_max - t_snap, dt, None)?;
    let steps = restart.times.len() - 1;
    let mut worst = 0.0_f64;
    for k in 1..=steps {
        let d = (restart.bprime_node(k) - run.traj.bprime_node(k0 + k)).abs();
        worst = worst.max(d);
    }
    Ok(worst)
}

/// The finite-dimensional Lax-Phillips generator and the gram matrix of the
/// basis xᵏ e^{zⱼ x} on (-∞, 0].
#[derive(Debug, Clone, Serialize)]
pub struct LPSemigroup {
    pub roots: Vec<Root>,
    pub dim: usize,
    /// dim x dim block matrix B (row-major): zⱼ on the diagonal, 1..νⱼ-1 on
    /// the block superdiagonal; Z^t = e^{-tB}.
    pub generator: Vec<Complex64>,
    /// Hermitian positive-definite gram matrix of the basis.
    pub gram: Vec<Complex64>,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Assemble the semigroup data from the root set (all roots must lie in the
/// right half-plane; gram entries are the exact half-line integrals
/// (-1)^{k+l} (k+l)! / (z̄ⱼ + zₘ)^{k+l+1}).
pub fn build_lp_semigroup(roots: &RootSet) -> Result<LPSemigroup> {
    let mut rs = roots.roots.clone();
    for r in &rs {
        if r.value.re <= 0.0 {
            return Err(Error::RootInLeftHalfPlane { root: r.value });
        }
    }
    rs.sort_by(|a, b| {
        (a.value.re, a.value.im)
            .partial_cmp(&(b.value.re, b.value.im))
            .unwrap()
    });
    let dim: usize = rs.iter().map(|r| r.multiplicity).sum();
    let mut generator = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut offset = 0;
    for r in &rs {
        for i in 0..r.multiplicity {
            generator[(offset + i) * dim + offset + i] = r.value;
            if i + 1 < r.multiplicity {
                generator[(offset + i) * dim + offset + i + 1] = Complex64::new((i + 1) as f64, 0.0);
            }
        }
        offset += r.multiplicity;
    }
    // flatten (root, power) index pairs
    let mut idx = Vec::with_capacity(dim);
    for r in &rs {
        for k in 0..r.multiplicity {
            idx.push((r.value, k));
        }
    }
    let mut gram = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (row, &(zj, k)) in idx.iter().enumerate() {
        for (col, &(zm, l)) in idx.iter().enumerate() {
            let sign = if (k + l) % 2 == 0 { 1.0 } else { -1.0 };
            let denom = (zj.conj() + zm).powu((k + l + 1) as u32);
            gram[row * dim + col] = sign * factorial(k + l) / denom;
        }
    }
    linalg::cholesky(&gram, dim)?;
    Ok(LPSemigroup {
        roots: rs,
        dim,
        generator,
        gram,
    })
}

/// Result of comparing e^{-tB} against the exact translated-basis action.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LpEvolveCheck {
    /// Max entry deviation between the matrix exponential and the analytic
    /// coefficient matrix binom(k,i)(-t)^{k-i} e^{-zⱼ t}.
    pub max_deviation: f64,
    /// Operator norm of e^{-tB} in the gram metric (contraction monitor).
    pub gram_norm: f64,
}

/// Compare the scaling-and-squaring exponential with the analytic action and
/// return the contraction norm ||e^{-tB}||_G.
pub fn lp_evolve_check(sg: &LPSemigroup, t: f64) -> Result<LpEvolveCheck> {
    assert!(t >= 0.0, "semigroup time must be nonnegative");
    let dim = sg.dim;
    let neg_tb: Vec<Complex64> = sg.generator.iter().map(|z| -t * z).collect();
    let e = linalg::expm(&neg_tb, dim)?;
    // analytic action per block
    let mut a = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut offset = 0;
    for r in &sg.roots {
        let decay = (-r.value * t).exp();
        for k in 0..r.multiplicity {
            for i in 0..=k {
                a[(offset + i) * dim + offset + k] =
                    binomial(k, i) * (-t).powi((k - i) as i32) * decay;
            }
        }
        offset += r.multiplicity;
    }
    let max_deviation = e
        .iter()
        .zip(&a)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    Ok(LpEvolveCheck {
        max_deviation,
        gram_norm: gram_operator_norm(sg, &e)?,
    })
}

/// ||M||_G = ||L^H M L^{-H}||₂ with G = L L^H.
pub fn gram_operator_norm(sg: &LPSemigroup, m: &[Complex64]) -> Result<f64> {
    let dim = sg.dim;
    let l = linalg::cholesky(&sg.gram, dim)?;
    // W = L^H * M
    let mut w = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut s = Complex64::new(0.0, 0.0);
            for k in i..dim {
                s += l[k * dim + i].conj() * m[k * dim + j];
            }
            w[i * dim + j] = s;
        }
    }
    // N solves N L^H = W, i.e. conj(L) N^T_col... forward substitution per row:
    // N[i][j]: sum_k N[i][k] (L^H)[k][j] = W[i][j] with L^H upper triangular
    let mut nmat = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut s = w[i * dim + j];
            for k in 0..j {
                s -= nmat[i * dim + k] * l[j * dim + k].conj();
            }
            nmat[i * dim + j] = s / l[j * dim + j].conj();
        }
    }
    // largest eigenvalue of N^H N
    let mut nhn = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                s += nmat[k * dim + i].conj() * nmat[k * dim + j];
            }
            nhn[i * dim + j] = s;
        }
    }
    let eigs = linalg::hermitian_eigenvalues(&nhn, dim);
    Ok(eigs.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// Smallest eigenvalue of the Hermitian part of G·B + B^H·G; nonnegative
/// exactly when Z^t is a contraction in the gram metric.
pub fn dissipativity_min_eigenvalue(sg: &LPSemigroup) -> f64 {
    let dim = sg.dim;
    let mut h = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                s += sg.gram[i * dim + k] * sg.generator[k * dim + j];
                s += sg.generator[k * dim + i].conj() * sg.gram[k * dim + j];
            }
            h[i * dim + j] = s;
        }
    }
    // hermitianize against roundoff
    let mut hs = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            hs[i * dim + j] = 0.5 * (h[i * dim + j] + h[j * dim + i].conj());
        }
    }
    let eigs = linalg::hermitian_eigenvalues(&hs, dim);
    eigs.first().copied().unwrap_or(0.0)
}
