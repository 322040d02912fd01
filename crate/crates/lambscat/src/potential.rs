//! Anharmonic oscillator potentials.
//!
//! Nonlinear runs replace the linear oscillator force Ly by -∇V(y). The
//! potential and its gradient are supplied as polynomial expressions in the
//! oscillator coordinates y1..yn (constants, sums, products and integer
//! powers). The global-existence condition `V(y) >= c1 |y|^2 - c2` is checked
//! on the leading homogeneous form and reported, never enforced.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// A force law for the oscillator block.
pub trait Potential {
    fn value(&self, y: &[f64]) -> f64;
    /// Writes ∇V(y) into `out`.
    fn grad(&self, y: &[f64], out: &mut [f64]);
}

/// Multivariate polynomial as a map from exponent tuples to coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyExpr {
    n: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl PolyExpr {
    fn constant(n: usize, v: f64) -> PolyExpr {
        let mut terms = BTreeMap::new();
        if v != 0.0 {
            terms.insert(vec![0; n], v);
        }
        PolyExpr { n, terms }
    }

    fn variable(n: usize, i: usize) -> PolyExpr {
        let mut e = vec![0; n];
        e[i] = 1;
        PolyExpr {
            n,
            terms: BTreeMap::from([(e, 1.0)]),
        }
    }

    fn add(&self, other: &PolyExpr, sign: f64) -> PolyExpr {
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let entry = terms.entry(e.clone()).or_insert(0.0);
            *entry += sign * c;
            if *entry == 0.0 {
                terms.remove(e);
            }
        }
        PolyExpr { n: self.n, terms }
    }

    fn mul(&self, other: &PolyExpr) -> Result<PolyExpr> {
        let mut terms: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                if e.iter().any(|&d| d > 64) {
                    return Err(Error::Potential("total degree exceeds 64".into()));
                }
                *terms.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        terms.retain(|_, c| *c != 0.0);
        Ok(PolyExpr { n: self.n, terms })
    }

    fn pow(&self, k: u32) -> Result<PolyExpr> {
        let mut r = PolyExpr::constant(self.n, 1.0);
        for _ in 0..k {
            r = r.mul(self)?;
        }
        Ok(r)
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c * e
                    .iter()
                    .zip(y)
                    .map(|(&d, &yi)| yi.powi(d as i32))
                    .product::<f64>()
            })
            .sum()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Terms of maximal total degree.
    fn leading_form(&self) -> PolyExpr {
        let d = self.total_degree();
        PolyExpr {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() == d)
                .map(|(e, c)| (e.clone(), *c))
                .collect(),
        }
    }

    /// ∂/∂yᵢ, exact.
    pub fn diff(&self, i: usize) -> PolyExpr {
        let mut terms: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut en = e.clone();
            en[i] -= 1;
            *terms.entry(en).or_insert(0.0) += c * e[i] as f64;
        }
        PolyExpr { n: self.n, terms }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<PolyExpr> {
        let mut sign = 1.0;
        if let Some(c) = self.peek() {
            if c == b'+' || c == b'-' {
                self.pos += 1;
                sign = if c == b'-' { -1.0 } else { 1.0 };
            }
        }
        let mut acc = self.term()?;
        if sign < 0.0 {
            acc = PolyExpr::constant(self.n, 0.0).add(&acc, -1.0);
        }
        while let Some(c) = self.peek() {
            if c == b'+' || c == b'-' {
                self.pos += 1;
                let t = self.term()?;
                acc = acc.add(&t, if c == b'-' { -1.0 } else { 1.0 });
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<PolyExpr> {
        let mut acc = self.factor()?;
        while let Some(c) = self.peek() {
            if c == b'*' {
                self.pos += 1;
                let f = self.factor()?;
                acc = acc.mul(&f)?;
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<PolyExpr> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == start {
                return Err(Error::Potential("expected integer exponent after ^".into()));
            }
            let k: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| Error::Potential("exponent out of range".into()))?;
            return base.pow(k);
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<PolyExpr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(Error::Potential("unbalanced parenthesis".into()));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.src.len() {
                    let c = self.src[self.pos];
                    if c.is_ascii_digit() || c == b'.' {
                        self.pos += 1;
                    } else if (c == b'e' || c == b'E')
                        && self
                            .src
                            .get(self.pos + 1)
                            .is_some_and(|&d| d.is_ascii_digit() || d == b'+' || d == b'-')
                    {
                        self.pos += 2;
                    } else {
                        break;
                    }
                }
                let txt = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let v: f64 = txt
                    .parse()
                    .map_err(|_| Error::Potential(format!("bad number '{txt}'")))?;
                Ok(PolyExpr::constant(self.n, v))
            }
            Some(b'y') => {
                self.pos += 1;
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let idx = if self.pos == start {
                    if self.n != 1 {
                        return Err(Error::Potential(
                            "bare variable 'y' only allowed when n = 1; use y1..yn".into(),
                        ));
                    }
                    0
                } else {
                    let k: usize = std::str::from_utf8(&self.src[start..self.pos])
                        .unwrap()
                        .parse()
                        .map_err(|_| Error::Potential("bad variable index".into()))?;
                    if k == 0 || k > self.n {
                        return Err(Error::Potential(format!(
                            "variable y{k} out of range 1..{}",
                            self.n
                        )));
                    }
                    k - 1
                };
                Ok(PolyExpr::variable(self.n, idx))
            }
            other => Err(Error::Potential(format!(
                "unexpected character {:?}",
                other.map(|c| c as char)
            ))),
        }
    }
}

/// Parse a polynomial expression in y1..yn (or bare `y` when n = 1).
pub fn parse_poly(src: &str, n: usize) -> Result<PolyExpr> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        n,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(Error::Potential(format!(
            "trailing input at byte {} of '{src}'",
            p.pos
        )));
    }
    Ok(e)
}

/// Result of the syntactic growth-condition check on the leading form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthCondition {
    /// Leading form has even degree >= 2 and is positive on sampled directions.
    Satisfied,
    /// Leading form vanishes or turns negative somewhere on the sphere.
    Violated,
}

/// Polynomial potential with user-supplied gradient.
#[derive(Debug, Clone)]
pub struct PolyPotential {
    pub n: usize,
    pub v: PolyExpr,
    pub grad: Vec<PolyExpr>,
}

impl PolyPotential {
    /// Parse V and ∇V; the gradient expressions are cross-checked against the
    /// exact derivative of V so a typo fails validation instead of silently
    /// producing a non-conservative force.
    pub fn parse(v_src: &str, grad_src: &[String], n: usize) -> Result<PolyPotential> {
        if grad_src.len() != n {
            return Err(Error::Potential(format!(
                "gradient needs {n} components, got {}",
                grad_src.len()
            )));
        }
        let v = parse_poly(v_src, n)?;
        let grad: Vec<PolyExpr> = grad_src
            .iter()
            .map(|g| parse_poly(g, n))
            .collect::<Result<_>>()?;
        for (i, g) in grad.iter().enumerate() {
            let exact = v.diff(i);
            let diff = g.add(&exact, -1.0);
            let worst = diff.terms.values().fold(0.0_f64, |m, c| m.max(c.abs()));
            let scale = exact
                .terms
                .values()
                .fold(1.0_f64, |m, c| m.max(c.abs()));
            if worst > 1e-9 * scale {
                return Err(Error::Potential(format!(
                    "grad[{i}] does not match dV/dy{}",
                    i + 1
                )));
            }
        }
        Ok(PolyPotential { n, v, grad })
    }

    /// Check `V(y) >= c1 |y|^2 - c2` syntactically: the leading homogeneous
    /// form must have even degree >= 2 and be positive on a deterministic
    /// sample of directions (exact for n = 1).
    pub fn growth_condition(&self) -> GrowthCondition {
        let lead = self.v.leading_form();
        let d = lead.total_degree();
        if d < 2 || !d.is_multiple_of(2) {
            return GrowthCondition::Violated;
        }
        if self.n == 1 {
            return if lead.eval(&[1.0]) > 0.0 && lead.eval(&[-1.0]) > 0.0 {
                GrowthCondition::Satisfied
            } else {
                GrowthCondition::Violated
            };
        }
        // deterministic direction sweep on the unit sphere
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for _ in 0..2048 {
            let mut dir: Vec<f64> = (0..self.n).map(|_| next()).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-6 {
                continue;
            }
            dir.iter_mut().for_each(|v| *v /= norm);
            if lead.eval(&dir) <= 0.0 {
                return GrowthCondition::Violated;
            }
        }
        GrowthCondition::Satisfied
    }
}

impl Potential for PolyPotential {
    fn value(&self, y: &[f64]) -> f64 {
        self.v.eval(y)
    }

    fn grad(&self, y: &[f64], out: &mut [f64]) {
        for (o, g) in out.iter_mut().zip(&self.grad) {
            *o = g.eval(y);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_evaluates_quartic() {
        let p = PolyPotential::parse("y^4 + y^2", &["4*y^3 + 2*y".into()], 1).unwrap();
        assert_eq!(p.value(&[2.0]), 20.0);
        let mut g = [0.0];
        p.grad(&[2.0], &mut g);
        assert_eq!(g[0], 36.0);
        assert_eq!(p.growth_condition(), GrowthCondition::Satisfied);
    }

    #[test]
    fn rejects_wrong_gradient() {
        let r = PolyPotential::parse("y^4", &["3*y^3".into()], 1);
        assert!(r.is_err());
    }

    #[test]
    fn growth_condition_flags_unbounded_below() {
        let p = PolyPotential::parse("-1*y^4 + y^2", &["-4*y^3 + 2*y".into()], 1).unwrap();
        assert_eq!(p.growth_condition(), GrowthCondition::Violated);
        let odd = PolyPotential::parse("y^3", &["3*y^2".into()], 1).unwrap();
        assert_eq!(odd.growth_condition(), GrowthCondition::Violated);
    }

    #[test]
    fn multivariate_parse_and_diff() {
        let p = PolyPotential::parse(
            "0.5*y1^2 + y2^2 + 0.25*(y1 - y2)^2",
            &["y1 + 0.5*(y1 - y2)".into(), "2*y2 - 0.5*(y1 - y2)".into()],
            2,
        )
        .unwrap();
        let y = [0.7, -1.3];
        let mut g = [0.0; 2];
        p.grad(&y, &mut g);
        assert!((g[0] - (y[0] + 0.5 * (y[0] - y[1]))).abs() < 1e-15);
        assert!((g[1] - (2.0 * y[1] - 0.5 * (y[0] - y[1]))).abs() < 1e-15);
        assert_eq!(p.growth_condition(), GrowthCondition::Satisfied);
    }
}
