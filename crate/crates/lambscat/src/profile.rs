//! Closed-form field profiles with analytic derivatives of any order.
//!
//! Initial field data is a sum of Gaussian-type terms `A (x-x0)^q e^{-s(x-x0)^2}`
//! and compactly supported smooth bumps `A e^{-1/(1-((x-x0)/r)^2)}`. Both
//! families are rapidly decaying with all derivatives; the boundary lift of
//! smooth states needs their derivatives at the origin up to order 2n-1,
//! which are evaluated here exactly through polynomial recurrences.

use serde::Serialize;

use crate::error::{Error, Result};

/// One closed-form term of a field profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ProfileTerm {
    /// `amplitude * (x - center)^power * exp(-sigma (x - center)^2)`
    Gaussian {
        amplitude: f64,
        center: f64,
        sigma: f64,
        power: u32,
    },
    /// `amplitude * exp(-1 / (1 - ((x - center)/radius)^2))` on |x-center| < radius
    Bump {
        amplitude: f64,
        center: f64,
        radius: f64,
    },
}

impl ProfileTerm {
    fn validate(&self) -> Result<()> {
        match *self {
            ProfileTerm::Gaussian { sigma, .. } => {
                if !sigma.is_finite() || sigma <= 0.0 {
                    return Err(Error::InvalidData(format!("gaussian sigma must be positive, got {sigma}")));
                }
            }
            ProfileTerm::Bump { center, radius, .. } => {
                if !radius.is_finite() || radius <= 0.0 {
                    return Err(Error::InvalidData(format!("bump radius must be positive, got {radius}")));
                }
                if center - radius <= 0.0 {
                    return Err(Error::InvalidData(format!(
                        "bump support [{}, {}] must sit inside (0, inf)",
                        center - radius,
                        center + radius
                    )));
                }
            }
        }
        Ok(())
    }

    /// Interval outside of which the term (and every derivative used here)
    /// is below ~1e-18 of its scale; exact support for bumps.
    fn support(&self) -> (f64, f64) {
        match *self {
            ProfileTerm::Gaussian {
                center,
                sigma,
                power,
                ..
            } => {
                let mut u = (42.0 / sigma).sqrt();
                for _ in 0..3 {
                    u = ((42.0 + power as f64 * u.max(1.0).ln()) / sigma).sqrt();
                }
                (center - u, center + u)
            }
            ProfileTerm::Bump { center, radius, .. } => (center - radius, center + radius),
        }
    }

    fn derivative(&self, k: usize, x: f64) -> f64 {
        match *self {
            ProfileTerm::Gaussian {
                amplitude,
                center,
                sigma,
                power,
            } => {
                let u = x - center;
                if sigma * u * u > 700.0 {
                    return 0.0;
                }
                // closed forms for the orders hit in hot loops
                if k == 0 {
                    return amplitude * u.powi(power as i32) * (-sigma * u * u).exp();
                }
                if k == 1 {
                    let q = power as f64;
                    let low = if power == 0 { 0.0 } else { q * u.powi(power as i32 - 1) };
                    return amplitude
                        * (low - 2.0 * sigma * u.powi(power as i32 + 1))
                        * (-sigma * u * u).exp();
                }
                // d/du [P e^{-s u^2}] = (P' - 2 s u P) e^{-s u^2}
                let mut p = vec![0.0; power as usize + 1];
                p[power as usize] = 1.0;
                for _ in 0..k {
                    let mut next = vec![0.0; p.len() + 1];
                    for (j, c) in p.iter().enumerate() {
                        if j >= 1 {
                            next[j - 1] += j as f64 * c;
                        }
                        next[j + 1] -= 2.0 * sigma * c;
                    }
                    p = next;
                }
                let pv = p.iter().rev().fold(0.0, |acc, c| acc * u + c);
                amplitude * pv * (-sigma * u * u).exp()
            }
            ProfileTerm::Bump {
                amplitude,
                center,
                radius,
            } => {
                let s = (x - center) / radius;
                if s.abs() >= 1.0 {
                    return 0.0;
                }
                if k == 0 {
                    return amplitude * (-1.0 / (1.0 - s * s)).exp();
                }
                if k == 1 {
                    let w = 1.0 / (1.0 - s * s);
                    return amplitude * (-2.0 * s) * w * w * (-w).exp() / radius;
                }
                // d^k/ds^k e^{-1/(1-s^2)} = P_k(s)/(1-s^2)^{2k} e^{-1/(1-s^2)}
                let mut p = vec![1.0];
                let mut dpow = 0usize;
                for _ in 0..k {
                    // P <- P'(1-s^2)^2 + 2 d s P (1-s^2) - 2 s P, d <- d + 2
                    let mut next = vec![0.0; p.len() + 3];
                    for (j, c) in p.iter().enumerate() {
                        if j >= 1 {
                            // P' * (1 - 2s^2 + s^4)
                            let d = j as f64 * c;
                            next[j - 1] += d;
                            next[j + 1] -= 2.0 * d;
                            next[j + 3] += d;
                        }
                        // 2 d s P (1 - s^2)
                        next[j + 1] += 2.0 * dpow as f64 * c;
                        next[j + 3] -= 2.0 * dpow as f64 * c;
                        // -2 s P
                        next[j + 1] -= 2.0 * c;
                    }
                    p = next;
                    dpow += 2;
                }
                let pv = p.iter().rev().fold(0.0, |acc, c| acc * s + c);
                let w = 1.0 / (1.0 - s * s);
                // w^dpow e^{-w} evaluated safely in log space
                let mag = (dpow as f64 * w.ln() - w).exp();
                amplitude * pv * mag / radius.powi(k as i32)
            }
        }
    }
}

/// A field profile: a finite sum of closed-form terms on [0, inf).
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FieldProfile {
    pub terms: Vec<ProfileTerm>,
}

impl FieldProfile {
    pub fn new(terms: Vec<ProfileTerm>) -> Result<FieldProfile> {
        for t in &terms {
            t.validate()?;
        }
        Ok(FieldProfile { terms })
    }

    pub fn zero() -> FieldProfile {
        FieldProfile { terms: Vec::new() }
    }

    /// A single unit Gaussian pulse centered at `center`.
    pub fn gaussian(amplitude: f64, center: f64, sigma: f64) -> FieldProfile {
        FieldProfile {
            terms: vec![ProfileTerm::Gaussian {
                amplitude,
                center,
                sigma,
                power: 0,
            }],
        }
    }

    /// A single smooth bump supported on `center ± radius`.
    pub fn bump(amplitude: f64, center: f64, radius: f64) -> Result<FieldProfile> {
        FieldProfile::new(vec![ProfileTerm::Bump {
            amplitude,
            center,
            radius,
        }])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn value(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.derivative(0, x)).sum()
    }

    /// k-th derivative at x (k = 0 gives the value), evaluated analytically.
    pub fn derivative(&self, k: usize, x: f64) -> f64 {
        self.terms.iter().map(|t| t.derivative(k, x)).sum()
    }

    /// Effective support `[lo, hi]` (clipped below at 0); `(0, 0)` when empty.
    pub fn support(&self) -> (f64, f64) {
        if self.terms.is_empty() {
            return (0.0, 0.0);
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for t in &self.terms {
            let (a, b) = t.support();
            lo = lo.min(a);
            hi = hi.max(b);
        }
        (lo.max(0.0), hi.max(0.0))
    }

    /// Same profile with the sign flipped (used by time reversal).
    pub fn negated(&self) -> FieldProfile {
        let terms = self
            .terms
            .iter()
            .map(|t| match *t {
                ProfileTerm::Gaussian {
                    amplitude,
                    center,
                    sigma,
                    power,
                } => ProfileTerm::Gaussian {
                    amplitude: -amplitude,
                    center,
                    sigma,
                    power,
                },
                ProfileTerm::Bump {
                    amplitude,
                    center,
                    radius,
                } => ProfileTerm::Bump {
                    amplitude: -amplitude,
                    center,
                    radius,
                },
            })
            .collect();
        FieldProfile { terms }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central_diff(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn gaussian_derivatives_match_finite_differences() {
        let p = FieldProfile::new(vec![ProfileTerm::Gaussian {
            amplitude: 1.3,
            center: 5.0,
            sigma: 0.8,
            power: 2,
        }])
        .unwrap();
        for k in 0..6usize {
            for &x in &[3.2, 5.0, 6.7] {
                let exact = p.derivative(k + 1, x);
                let fd = central_diff(&|y| p.derivative(k, y), x, 1e-5);
                assert!(
                    (exact - fd).abs() < 1e-4 * (1.0 + exact.abs()),
                    "k={k} x={x}: {exact} vs {fd}"
                );
            }
        }
    }

    #[test]
    fn bump_derivatives_match_finite_differences() {
        let p = FieldProfile::bump(2.0, 5.5, 0.5).unwrap();
        for k in 0..4usize {
            for &x in &[5.2, 5.5, 5.8] {
                let exact = p.derivative(k + 1, x);
                let fd = central_diff(&|y| p.derivative(k, y), x, 1e-6);
                assert!(
                    (exact - fd).abs() < 1e-3 * (1.0 + exact.abs()),
                    "k={k} x={x}: {exact} vs {fd}"
                );
            }
        }
    }

    #[test]
    fn bump_vanishes_outside_support_with_all_derivatives() {
        let p = FieldProfile::bump(1.0, 5.5, 0.5).unwrap();
        for k in 0..8 {
            assert_eq!(p.derivative(k, 0.0), 0.0);
            assert_eq!(p.derivative(k, 4.99), 0.0);
            assert_eq!(p.derivative(k, 6.01), 0.0);
        }
        assert!(p.value(5.5) > 0.0);
    }

    #[test]
    fn bump_support_must_avoid_origin() {
        assert!(FieldProfile::bump(1.0, 0.3, 0.5).is_err());
    }

    #[test]
    fn support_covers_tails() {
        let p = FieldProfile::gaussian(1.0, 10.0, 1.0);
        let (lo, hi) = p.support();
        assert!(lo > 0.0, "support must not clip for this profile");
        assert!(p.value(lo).abs() < 1e-15);
        assert!(p.value(hi).abs() < 1e-15);
        assert!(lo < 10.0 && hi > 10.0);
        // clipped at the origin when the tail crosses it
        let q = FieldProfile::gaussian(1.0, 2.0, 1.0);
        assert_eq!(q.support().0, 0.0);
    }
}
