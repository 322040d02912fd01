//! The boundary polynomial p and its roots.
//!
//! On the dense invariant class of smooth states the coupled dynamics is a
//! half-line wave equation with the higher-order boundary condition
//! `p(∂ₓ)φ(t,0+) = 0`. The polynomial p (degree 2n+1, or 2n when θ = 0) is
//! built here by two independent routes, the recursion/Vandermonde form and
//! the closed form through elementary symmetric functions, and its roots
//! split into oscillator-type eigenvalues (negative real roots, λ = z²) and
//! resonances (right half-plane).

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::NormalizedModel;

/// Cluster radius for multiple-root detection.
pub const MULTIPLICITY_TOL: f64 = 1e-7;

/// Roots closer than this to the imaginary axis are rejected as invalid.
pub const IMAGINARY_AXIS_TOL: f64 = 1e-8;

/// Real polynomial with coefficients in ascending degree order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealPolynomial {
    pub coeffs: Vec<f64>,
}

impl RealPolynomial {
    /// Build from ascending coefficients, trimming a leading tail of entries
    /// below `1e-14 * max|coeff|`.
    pub fn new(mut coeffs: Vec<f64>) -> RealPolynomial {
        let scale = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.abs() <= 1e-14 * scale) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        RealPolynomial { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn derivative(&self) -> RealPolynomial {
        if self.coeffs.len() <= 1 {
            return RealPolynomial { coeffs: vec![0.0] };
        }
        RealPolynomial {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        }
    }

    /// Sum of |coefficients|.
    pub fn norm_l1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    fn add_scaled(&self, other: &RealPolynomial, factor: f64) -> RealPolynomial {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() < other.coeffs.len() {
            coeffs.resize(other.coeffs.len(), 0.0);
        }
        for (k, c) in other.coeffs.iter().enumerate() {
            coeffs[k] += factor * c;
        }
        RealPolynomial::new(coeffs)
    }
}

/// A polynomial root with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// All roots of p, with the sign-based split into eigenvalue roots
/// (Re z < 0, necessarily real) and resonances (Re z > 0).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub eigen_roots: Vec<Root>,
    pub resonances: Vec<Root>,
}

impl RootSet {
    pub fn degree(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn min_resonance_decay(&self) -> Option<f64> {
        self.roots
            .iter()
            .filter(|r| r.value.re > 0.0)
            .map(|r| r.value.re)
            .fold(None, |m, v| Some(m.map_or(v, |m: f64| m.min(v))))
    }
}

/// The recursion p₁(z) = θz + 1, pₖ(z) = z² pₖ₋₁(z) - μₖ₋₂ z, returned for
/// k = 1..k_max (k_max at most n+1; pₖ drives the k-th boundary-derivative
/// component of the class-D lift).
pub fn build_pk_sequence(model: &NormalizedModel, k_max: usize) -> Vec<RealPolynomial> {
    assert!(k_max >= 1 && k_max <= model.n() + 1, "1 <= k_max <= n+1");
    let mut seq = Vec::with_capacity(k_max);
    seq.push(RealPolynomial::new(vec![1.0, model.theta]));
    for k in 2..=k_max {
        let prev = &seq[k - 2];
        let mut coeffs = vec![0.0; prev.coeffs.len() + 2];
        for (i, c) in prev.coeffs.iter().enumerate() {
            coeffs[i + 2] = *c;
        }
        coeffs[1] -= model.moment(k - 2);
        seq.push(RealPolynomial::new(coeffs));
    }
    seq
}

/// Build p as p_{n+1} - Σⱼ dⱼ pⱼ where d solves the Vandermonde system
/// Vᵀ d = (λ₁ⁿ, ..., λₙⁿ). This is the verification route; the closed form
/// below is the production route.
pub fn build_p_vandermonde(model: &NormalizedModel) -> Result<RealPolynomial> {
    let n = model.n();
    let mut vt = vec![0.0; n * n];
    for i in 0..n {
        let mut pw = 1.0;
        for j in 0..n {
            vt[i * n + j] = pw;
            pw *= model.lambda[i];
        }
    }
    let rhs: Vec<f64> = model.lambda.iter().map(|l| l.powi(n as i32)).collect();
    let (d, ratio) = linalg::solve(&vt, &rhs, n)?;
    if ratio > 1e12 {
        return Err(Error::IllConditioned { ratio });
    }
    let pk = build_pk_sequence(model, n + 1);
    let mut p = pk[n].clone();
    for j in 0..n {
        p = p.add_scaled(&pk[j], -d[j]);
    }
    Ok(p)
}

/// Closed form
///
/// ```text
/// p(z) = (θz + 1) Π(z² - λᵢ) - z Σⱼ (Σₖ a_{j-k} μ_{k-1}) z^{2(n-j)}
/// ```
///
/// with a₀ = 1 and aⱼ the signed elementary symmetric functions of λ,
/// accumulated by the stable one-pass product recurrence.
pub fn build_p_closed_form(model: &NormalizedModel) -> RealPolynomial {
    let n = model.n();
    // prod (x - lambda_i) = sum_j a_j x^{n-j}; one-pass recurrence
    let mut a = vec![0.0; n + 1];
    a[0] = 1.0;
    for (i, &l) in model.lambda.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            a[j] -= l * a[j - 1];
        }
    }
    // (theta z + 1) * sum_j a_j z^{2(n-j)}
    let mut coeffs = vec![0.0; 2 * n + 2];
    for (j, &aj) in a.iter().enumerate() {
        coeffs[2 * (n - j)] += aj;
        coeffs[2 * (n - j) + 1] += model.theta * aj;
    }
    // - z * sum_{j=1..n} (sum_{k=1..j} a_{j-k} mu_{k-1}) z^{2(n-j)}
    for j in 1..=n {
        let mut s = 0.0;
        for k in 1..=j {
            s += a[j - k] * model.moment(k - 1);
        }
        coeffs[2 * (n - j) + 1] -= s;
    }
    RealPolynomial::new(coeffs)
}

/// All complex roots by Aberth-Ehrlich simultaneous iteration on the monic
/// normalization, followed by a Newton polish, exact conjugate pairing and
/// multiplicity clustering.
pub fn find_roots(p: &RealPolynomial) -> Result<RootSet> {
    let deg = p.degree();
    assert!(deg >= 1, "find_roots needs degree >= 1");
    let lead = *p.coeffs.last().unwrap();
    let monic: Vec<f64> = p.coeffs.iter().map(|c| c / lead).collect();
    let dp = p.derivative();

    let radius = 1.0
        + monic[..deg]
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.abs()));
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / deg as f64 + 0.4;
            Complex64::from_polar(radius, ang)
        })
        .collect();

    let eval_monic = |x: Complex64| -> Complex64 {
        monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
    };
    let eval_monic_dp = |x: Complex64| -> Complex64 {
        (1..=deg).rev().fold(Complex64::new(0.0, 0.0), |acc, k| {
            acc * x + monic[k] * k as f64
        })
    };

    let mut converged = false;
    let mut iterations = 0;
    for it in 0..500 {
        iterations = it + 1;
        let mut max_step = 0.0_f64;
        for i in 0..deg {
            let pv = eval_monic(z[i]);
            let dv = eval_monic_dp(z[i]);
            if !pv.is_finite() || !dv.is_finite() {
                // restart this iterate inside the root circle
                z[i] = Complex64::from_polar(radius * 0.5, 1.7 * i as f64 + 0.3);
                max_step = f64::INFINITY;
                continue;
            }
            let w = if dv.norm_sqr() > 0.0 { pv / dv } else { pv };
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..deg {
                if j != i {
                    let d = z[i] - z[j];
                    if d.norm_sqr() > 1e-300 {
                        s += 1.0 / d;
                    }
                }
            }
            let denom = 1.0 - w * s;
            let step = if denom.norm_sqr() > 1e-300 { w / denom } else { w };
            z[i] -= step;
            max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
        }
        if max_step <= 1e-14 {
            converged = true;
            break;
        }
    }
    // Newton polish against the original polynomial
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let pv = p.eval_complex(*zi);
            let dv = dp.eval_complex(*zi);
            if dv.norm_sqr() == 0.0 {
                break;
            }
            let step = pv / dv;
            if !step.is_finite() || step.norm() > 0.5 * (1.0 + zi.norm()) {
                break;
            }
            *zi -= step;
        }
    }
    // backward-error residual on the monic normalization
    let residual = |x: Complex64| -> f64 {
        let pv = eval_monic(x).norm();
        let scale: f64 = monic
            .iter()
            .enumerate()
            .map(|(k, c)| c.abs() * x.norm().powi(k as i32))
            .sum();
        pv / scale.max(1e-300)
    };
    let worst = z.iter().map(|&zi| residual(zi)).fold(0.0_f64, f64::max);
    if !converged && worst > 1e-8 {
        return Err(Error::NoConvergence {
            iterations,
            residual: worst,
        });
    }

    // snap near-real roots, then pair conjugates exactly
    for zi in z.iter_mut() {
        if zi.im.abs() <= IMAGINARY_AXIS_TOL * (1.0 + zi.norm()) {
            *zi = Complex64::new(zi.re, 0.0);
        }
    }
    let mut used = vec![false; deg];
    let mut paired: Vec<Complex64> = Vec::with_capacity(deg);
    for i in 0..deg {
        if used[i] {
            continue;
        }
        used[i] = true;
        if z[i].im == 0.0 {
            paired.push(z[i]);
            continue;
        }
        // find the closest unused conjugate partner
        let mut best: Option<(usize, f64)> = None;
        for j in (i + 1)..deg {
            if used[j] || z[j].im * z[i].im >= 0.0 {
                continue;
            }
            let d = (z[j] - z[i].conj()).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        match best {
            Some((j, _)) => {
                used[j] = true;
                let avg = 0.5 * (z[i] + z[j].conj());
                let avg = if z[i].im > 0.0 { avg } else { avg.conj() };
                paired.push(avg);
                paired.push(avg.conj());
            }
            None => paired.push(z[i]),
        }
    }
    // multiplicity clustering
    paired.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    let mut roots: Vec<Root> = Vec::new();
    for zi in paired {
        match roots
            .iter_mut()
            .find(|r| (r.value - zi).norm() <= MULTIPLICITY_TOL)
        {
            Some(r) => r.multiplicity += 1,
            None => roots.push(Root {
                value: zi,
                multiplicity: 1,
            }),
        }
    }
    let eigen_roots = roots.iter().filter(|r| r.value.re < 0.0).cloned().collect();
    let resonances = roots.iter().filter(|r| r.value.re > 0.0).cloned().collect();
    Ok(RootSet {
        roots,
        eigen_roots,
        resonances,
    })
}

/// Re-classify a root set against a model, enforcing det L != 0 and the
/// no-imaginary-axis-roots property. Left half-plane roots must be real
/// negative (they square to oscillator eigenvalues of the coupled operator).
pub fn classify_roots(model: &NormalizedModel, roots: &RootSet) -> Result<RootSet> {
    let scale = model
        .lambda
        .iter()
        .fold(0.0_f64, |m, l| m.max(l.abs()))
        .max(1.0);
    if model.lambda.iter().any(|l| l.abs() < 1e-12 * scale) {
        return Err(Error::InvalidModel(
            "an oscillator eigenvalue vanishes (det L = 0); root classification undefined".into(),
        ));
    }
    let mut eigen_roots = Vec::new();
    let mut resonances = Vec::new();
    for r in &roots.roots {
        if r.value.re.abs() < IMAGINARY_AXIS_TOL {
            return Err(Error::ImaginaryAxisRoot { root: r.value });
        }
        if r.value.re < 0.0 {
            if r.value.im.abs() > IMAGINARY_AXIS_TOL {
                return Err(Error::InvalidModel(format!(
                    "left half-plane root {} is not real; root finding failed",
                    r.value
                )));
            }
            eigen_roots.push(Root {
                value: Complex64::new(r.value.re, 0.0),
                multiplicity: r.multiplicity,
            });
        } else {
            resonances.push(*r);
        }
    }
    Ok(RootSet {
        roots: roots.roots.clone(),
        eigen_roots,
        resonances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{normalize, ModelSpec};

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
    fn pk_recursion_hand_values() {
        let lamb = model(vec![-1.0], vec![1.0], 0.0);
        let pk = build_pk_sequence(&lamb, 2);
        assert_eq!(pk[0].coeffs, vec![1.0]);
        assert_eq!(pk[1].coeffs, vec![0.0, -1.0, 1.0]); // z^2 - z

        let m = model(vec![-1.0], vec![1.0], 2.0);
        let pk = build_pk_sequence(&m, 2);
        assert_eq!(pk[0].coeffs, vec![1.0, 2.0]); // 2z + 1
        assert_eq!(pk[1].coeffs, vec![0.0, -1.0, 1.0, 2.0]); // 2z^3 + z^2 - z

        let m2 = model(vec![-1.0, -2.0], vec![1.0, 1.0], 0.0);
        let pk = build_pk_sequence(&m2, 3);
        // mu_0 = 2, mu_1 = -3: p3 = z^4 - 2 z^3 + 3 z
        assert_eq!(pk[2].coeffs, vec![0.0, 3.0, 0.0, -2.0, 1.0]);
    }

    #[test]
    fn vandermonde_and_closed_form_hand_values() {
        let lamb = model(vec![-1.0], vec![1.0], 0.0);
        let pv = build_p_vandermonde(&lamb).unwrap();
        assert_eq!(pv.coeffs, vec![1.0, -1.0, 1.0]);
        let pc = build_p_closed_form(&lamb);
        assert_eq!(pc.coeffs, vec![1.0, -1.0, 1.0]);

        let m = model(vec![-1.0], vec![1.0], 2.0);
        assert_eq!(build_p_closed_form(&m).coeffs, vec![1.0, 1.0, 1.0, 2.0]);

        let m2 = model(vec![-1.0, -2.0], vec![1.0, 1.0], 0.0);
        let pc = build_p_closed_form(&m2);
        assert_eq!(pc.coeffs, vec![2.0, -3.0, 3.0, -2.0, 1.0]);
        let pv = build_p_vandermonde(&m2).unwrap();
        for (a, b) in pv.coeffs.iter().zip(&pc.coeffs) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn degree_rule() {
        for theta in [0.0, 2.0, -0.5] {
            for n in 1..=4usize {
                let lambda: Vec<f64> = (0..n).map(|i| -(i as f64) - 1.0).collect();
                let c = vec![1.0; n];
                let m = model(lambda, c, theta);
                let p = build_p_closed_form(&m);
                let expected = if theta != 0.0 { 2 * n + 1 } else { 2 * n };
                assert_eq!(p.degree(), expected);
                // constant coefficient = prod(-lambda_i)
                let p0: f64 = m.lambda.iter().map(|l| -l).product();
                assert!((p.coeffs[0] - p0).abs() < 1e-12 * p0.abs());
            }
        }
    }

    #[test]
    fn roots_of_lamb_polynomial() {
        // quadratic-formula oracle: z^2 - z + 1 has roots (1 +- i sqrt 3)/2
        let p = RealPolynomial::new(vec![1.0, -1.0, 1.0]);
        let rs = find_roots(&p).unwrap();
        assert_eq!(rs.degree(), 2);
        let expected_im = 3.0f64.sqrt() / 2.0;
        for r in &rs.roots {
            assert!((r.value.re - 0.5).abs() < 1e-12);
            assert!((r.value.im.abs() - expected_im).abs() < 1e-12);
        }
        assert_eq!(rs.eigen_roots.len(), 0);
        assert_eq!(rs.resonances.len(), 2);
    }

    #[test]
    fn roots_of_cubic_with_bound_state() {
        // bisection oracle on [-1, 0] for 2z^3 + z^2 + z + 1, frozen value
        let p = RealPolynomial::new(vec![1.0, 1.0, 1.0, 2.0]);
        let bisect = {
            let f = |x: f64| p.eval(x);
            let (mut lo, mut hi) = (-1.0, 0.0);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if f(lo) * f(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        };
        assert!((bisect + 0.738983621504506).abs() < 1e-12);
        let rs = find_roots(&p).unwrap();
        let real_root = rs
            .roots
            .iter()
            .find(|r| r.value.im == 0.0)
            .expect("one real root");
        assert!((real_root.value.re - bisect).abs() < 1e-10);
        let m = model(vec![-1.0], vec![1.0], 2.0);
        let cl = classify_roots(&m, &rs).unwrap();
        assert_eq!(cl.eigen_roots.len(), 1);
        assert_eq!(cl.resonances.len(), 2);
        let lam = cl.eigen_roots[0].value.re.powi(2);
        assert!((lam - 0.546096792851915).abs() < 1e-10);
    }

    #[test]
    fn double_root_multiplicity() {
        // (z - 1)^2 = 1 - 2z + z^2
        let p = RealPolynomial::new(vec![1.0, -2.0, 1.0]);
        let rs = find_roots(&p).unwrap();
        assert_eq!(rs.roots.len(), 1);
        assert_eq!(rs.roots[0].multiplicity, 2);
        assert!((rs.roots[0].value - Complex64::new(1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn classify_rejects_zero_det_l() {
        let rs = find_roots(&RealPolynomial::new(vec![1.0, -1.0, 1.0])).unwrap();
        let m = normalize(&ModelSpec {
            eigenvalues: vec![1e-15],
            coupling: vec![1.0],
            metric: None,
            theta: 0.0,
        })
        .unwrap();
        assert!(classify_roots(&m, &rs).is_err());
        // positive eigenvalues are fine as long as det L != 0
        let m = model(vec![0.5], vec![1.0], 0.0);
        assert!(classify_roots(&m, &rs).is_ok());
    }

    #[test]
    fn trimming_keeps_leading_coefficient_nonzero() {
        let p = RealPolynomial::new(vec![1.0, 2.0, 1e-20]);
        assert_eq!(p.degree(), 1);
        assert_eq!(p.coeffs, vec![1.0, 2.0]);
    }

    #[test]
    fn root_residuals_bounded_by_polynomial_scale() {
        // moderate-coefficient models where the |p(z)| <= 1e-10 ||p||_1 bound
        // is attainable in double precision (large roots amplify |z|^deg past
        // it for any backward-stable finder)
        let models = [
            model(vec![-1.0], vec![1.0], 0.0),
            model(vec![-1.0], vec![1.0], 2.0),
            model(vec![-1.0, -2.0], vec![1.0, 1.0], 0.0),
            model(vec![-0.5, -1.5, -2.5], vec![0.8, -1.2, 0.6], -0.7),
        ];
        for m in &models {
            let p = build_p_closed_form(m);
            let rs = find_roots(&p).unwrap();
            let bound = 1e-10 * p.norm_l1();
            for r in &rs.roots {
                let res = p.eval_complex(r.value).norm();
                assert!(res <= bound, "residual {res:.3e} > {bound:.3e} at {}", r.value);
            }
        }
    }

    #[test]
    fn empty_point_spectrum_models_have_right_half_plane_roots() {
        // sigma(L) < 0 and theta <= 0: every root of p is a resonance
        for (lambda, c, theta) in [
            (vec![-1.0, -3.0], vec![1.0, 2.0], 0.0),
            (vec![-0.5, -2.0, -7.0], vec![1.0, -1.0, 0.5], -1.5),
            (vec![-4.0], vec![3.0], -0.1),
        ] {
            let m = model(lambda, c, theta);
            let p = build_p_closed_form(&m);
            let rs = find_roots(&p).unwrap();
            assert_eq!(rs.degree(), p.degree());
            for r in &rs.roots {
                assert!(r.value.re > 0.0, "root {} not in right half-plane", r.value);
            }
        }
    }
}
