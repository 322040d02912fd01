//! Model data and the Weyl-type function Γ.
//!
//! A model couples the half-line wave field to an n-dimensional oscillator
//! system through the boundary condition
//!
//! ```text
//! θ φ'(0+) + φ(0+) = <w, y>
//! ```
//!
//! and is specified by the oscillator spectrum λ₁..λₙ (all distinct), the
//! coupling vector w, a diagonal metric g and the extension parameter θ.
//! All computations run in the orthonormal eigenbasis of the oscillator
//! generator, where the coupling components become cᵢ = √gᵢ wᵢ; the
//! [`NormalizedModel`] holding (λ, c, θ) is the single source of truth for
//! every other module.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;

/// Relative gap below which two eigenvalues count as coincident.
pub const EIGENVALUE_GAP_TOL: f64 = 1e-9;

/// Absolute distance below which a resolvent argument counts as sitting on a
/// pole or on the branch cut.
pub const POLE_TOL: f64 = 1e-10;

/// A model in user coordinates: diagonal oscillator generator with an
/// arbitrary diagonal metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSpec {
    /// Oscillator spectrum λ₁..λₙ, pairwise distinct.
    pub eigenvalues: Vec<f64>,
    /// Coupling components of w in the same coordinates.
    pub coupling: Vec<f64>,
    /// Diagonal metric weights gᵢ > 0 (defaults to all ones).
    pub metric: Option<Vec<f64>>,
    /// Extension parameter θ.
    pub theta: f64,
}

impl ModelSpec {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Drop the oscillator coordinates in `indices` (used after a
    /// [`Error::ZeroCoupling`] report: those coordinates evolve decoupled
    /// from the field and carry no scattering information).
    pub fn project_out(&self, indices: &[usize]) -> ModelSpec {
        let keep = |i: &usize| !indices.contains(i);
        ModelSpec {
            eigenvalues: self
                .eigenvalues
                .iter()
                .enumerate()
                .filter(|(i, _)| keep(i))
                .map(|(_, v)| *v)
                .collect(),
            coupling: self
                .coupling
                .iter()
                .enumerate()
                .filter(|(i, _)| keep(i))
                .map(|(_, v)| *v)
                .collect(),
            metric: self.metric.as_ref().map(|g| {
                g.iter()
                    .enumerate()
                    .filter(|(i, _)| keep(i))
                    .map(|(_, v)| *v)
                    .collect()
            }),
            theta: self.theta,
        }
    }
}

/// The model in the orthonormal eigenbasis: (λ, c, θ) plus the cached moments
/// μₖ = Σᵢ cᵢ² λᵢᵏ = <w, Lᵏ w> for k = 0..2n.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedModel {
    pub lambda: Vec<f64>,
    pub c: Vec<f64>,
    pub theta: f64,
    pub moments: Vec<f64>,
}

impl NormalizedModel {
    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    /// μₖ = Σᵢ cᵢ² λᵢᵏ, cached through k = 2n.
    pub fn moment(&self, k: usize) -> f64 {
        self.moments[k]
    }
}

/// A chain of point masses hanging off the end of the string: masses Mⱼ,
/// springs Kⱼ (the last one anchoring the chain) and string tension T.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSpec {
    pub masses: Vec<f64>,
    pub springs: Vec<f64>,
    pub tension: f64,
}

fn check_distinct(lambda: &[f64]) -> Result<()> {
    let scale = lambda.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    for i in 0..lambda.len() {
        for j in (i + 1)..lambda.len() {
            let gap = (lambda[i] - lambda[j]).abs();
            if gap < EIGENVALUE_GAP_TOL * scale {
                return Err(Error::DuplicateEigenvalue { i, j, gap });
            }
        }
    }
    Ok(())
}

fn moments_from(lambda: &[f64], c: &[f64]) -> Vec<f64> {
    let n = lambda.len();
    let mut moments = Vec::with_capacity(2 * n + 1);
    let mut pw: Vec<f64> = c.iter().map(|ci| ci * ci).collect();
    for _ in 0..=2 * n {
        moments.push(pw.iter().sum());
        for (p, l) in pw.iter_mut().zip(lambda) {
            *p *= l;
        }
    }
    moments
}

/// Change coordinates to the orthonormal eigenbasis: cᵢ = √gᵢ wᵢ.
///
/// Rejects coincident eigenvalues, non-positive metric weights and vanishing
/// coupling components ([`Error::ZeroCoupling`] reports the offending indices;
/// the caller may [`ModelSpec::project_out`] those coordinates).
pub fn normalize(spec: &ModelSpec) -> Result<NormalizedModel> {
    let n = spec.n();
    if n == 0 {
        return Err(Error::InvalidModel("empty oscillator system".into()));
    }
    if spec.coupling.len() != n {
        return Err(Error::InvalidModel(format!(
            "coupling has {} entries, expected {n}",
            spec.coupling.len()
        )));
    }
    if let Some(g) = &spec.metric {
        if g.len() != n {
            return Err(Error::InvalidModel(format!(
                "metric has {} entries, expected {n}",
                g.len()
            )));
        }
        for (i, &gi) in g.iter().enumerate() {
            if !gi.is_finite() || gi <= 0.0 {
                return Err(Error::InvalidMetric { index: i, value: gi });
            }
        }
    }
    for (name, vs) in [("eigenvalues", &spec.eigenvalues), ("coupling", &spec.coupling)] {
        if vs.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel(format!("{name} contain a non-finite entry")));
        }
    }
    check_distinct(&spec.eigenvalues)?;
    let c: Vec<f64> = match &spec.metric {
        Some(g) => spec
            .coupling
            .iter()
            .zip(g)
            .map(|(wi, gi)| gi.sqrt() * wi)
            .collect(),
        None => spec.coupling.clone(),
    };
    let zero: Vec<usize> = c
        .iter()
        .enumerate()
        .filter(|(_, ci)| **ci == 0.0)
        .map(|(i, _)| i)
        .collect();
    if !zero.is_empty() {
        return Err(Error::ZeroCoupling { indices: zero });
    }
    Ok(NormalizedModel {
        moments: moments_from(&spec.eigenvalues, &c),
        lambda: spec.eigenvalues.clone(),
        c,
        theta: spec.theta,
    })
}

/// Build the normalized model of an n-mass oscillator chain.
///
/// The chain generator in displacement coordinates is tridiagonal with rows
/// `K_{j-1}/M_j, -(K_{j-1}+K_j)/M_j, K_j/M_j`; it is symmetric with respect to
/// the metric gⱼ = Mⱼ/T. Conjugating by diag(√g) gives a symmetric
/// tridiagonal matrix which is diagonalized here by cyclic Jacobi rotations.
/// The coupling (T/M₁, 0, ..., 0) picks up the first rows of the eigenvector
/// matrix: c = Uᵀ (√(T/M₁), 0, ..., 0), and θ = 0.
pub fn build_chain(chain: &ChainSpec) -> Result<NormalizedModel> {
    let n = chain.masses.len();
    if n == 0 || chain.springs.len() != n {
        return Err(Error::InvalidModel(format!(
            "chain needs matching masses and springs, got {} and {}",
            n,
            chain.springs.len()
        )));
    }
    if !chain.tension.is_finite() || chain.tension <= 0.0 {
        return Err(Error::InvalidModel("tension must be positive".into()));
    }
    for (name, vs) in [("masses", &chain.masses), ("springs", &chain.springs)] {
        if let Some((i, &v)) = vs.iter().enumerate().find(|(_, v)| !v.is_finite() || **v <= 0.0) {
            return Err(Error::InvalidModel(format!("{name}[{i}] = {v} must be positive")));
        }
    }
    let m = &chain.masses;
    let k = &chain.springs;
    // symmetrized matrix D L D^{-1}: diagonal and off-diagonal entries
    let mut a = vec![0.0; n * n];
    for j in 0..n {
        let upper = if j == 0 { 0.0 } else { k[j - 1] };
        a[j * n + j] = -(upper + k[j]) / m[j];
        if j + 1 < n {
            let off = k[j] / (m[j] * m[j + 1]).sqrt();
            a[j * n + j + 1] = off;
            a[(j + 1) * n + j] = off;
        }
    }
    let (lambda, u) = linalg::sym_eigen(&a, n);
    let scale = lambda.iter().fold(0.0_f64, |mx, v| mx.max(v.abs())).max(1e-300);
    for i in 1..n {
        let gap = lambda[i] - lambda[i - 1];
        if gap < EIGENVALUE_GAP_TOL * scale {
            return Err(Error::DegenerateChain { gap });
        }
    }
    // c_i = <v_i, w>_g with w = (T/M_1, 0, .., 0): reduces to U^T e_1 sqrt(T/M_1)
    let amp = (chain.tension / m[0]).sqrt();
    let c: Vec<f64> = (0..n).map(|j| u[j] * amp).collect();
    if c.contains(&0.0) {
        // first components of eigenvectors of an unreduced Jacobi matrix never
        // vanish; reaching this means the eigensolver failed
        return Err(Error::DegenerateChain { gap: 0.0 });
    }
    Ok(NormalizedModel {
        moments: moments_from(&lambda, &c),
        lambda,
        c,
        theta: 0.0,
    })
}

fn check_off_excluded_set(model: &NormalizedModel, z: Complex64) -> Result<()> {
    // distance to the branch cut (-inf, 0]
    let cut = if z.re <= 0.0 { z.im.abs() } else { z.norm() };
    let mut d = cut;
    for &l in &model.lambda {
        d = d.min((z - l).norm());
    }
    if d < POLE_TOL {
        return Err(Error::PoleAtZ { z, tol: POLE_TOL });
    }
    Ok(())
}

/// Principal square root with the cut on (-inf, 0]: Re √z > 0 off the cut.
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    let r = z.sqrt();
    if r.re < 0.0 {
        -r
    } else {
        r
    }
}

/// The Weyl-type function Γ(z) = -(1/√z + Σᵢ cᵢ²/(z - λᵢ)).
///
/// Defined off the branch cut (-inf, 0] and off the oscillator spectrum;
/// its zeros of θ + Γ(λ) on (0, ∞) are the eigenvalues of the coupled
/// operator.
pub fn gamma(model: &NormalizedModel, z: Complex64) -> Result<Complex64> {
    check_off_excluded_set(model, z)?;
    let mut s = 1.0 / principal_sqrt(z);
    for (&l, &ci) in model.lambda.iter().zip(&model.c) {
        s += ci * ci / (z - l);
    }
    Ok(-s)
}

/// Residual of the resolvent-difference identity
/// `Γ(z) - Γ(u) = (z - u) P(u, z)` where the pairing
///
/// ```text
/// P(u, z) = 1/(√u √z (√u + √z)) + Σᵢ cᵢ² / ((u - λᵢ)(z - λᵢ))
/// ```
///
/// is the closed form of the defect-element pairing entering the resolvent
/// formula (the field part is an exact half-line integral, no quadrature).
pub fn krein_identity_residual(model: &NormalizedModel, z: Complex64, u: Complex64) -> Result<f64> {
    check_off_excluded_set(model, z)?;
    check_off_excluded_set(model, u)?;
    if (z - u).norm() == 0.0 {
        return Ok(0.0);
    }
    let su = principal_sqrt(u);
    let sz = principal_sqrt(z);
    let mut pairing = 1.0 / (su * sz * (su + sz));
    for (&l, &ci) in model.lambda.iter().zip(&model.c) {
        pairing += ci * ci / ((u - l) * (z - l));
    }
    let gz = gamma(model, z)?;
    let gu = gamma(model, u)?;
    Ok((gz - gu - (z - u) * pairing).norm())
}
