//! Sparse multivariate polynomials with rational coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::rational::{fmt_q, parse_q, Q};

/// A polynomial in `nvars` variables, stored as exponent vector -> coefficient
/// with no zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Q>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Q::one())
    }

    /// The linear form `sum coeffs[i] * x_i`.
    pub fn linear(coeffs: &[Q]) -> Self {
        let n = coeffs.len();
        let mut p = Self::zero(n);
        for (i, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(e, c.clone());
        }
        p
    }

    pub fn variable(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Q::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Q)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent length mismatch");
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Q)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|x| x == d),
        }
    }

    fn add_term(&mut self, e: Vec<u32>, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e.clone()).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut out = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(self.nvars), |acc, _| acc.mul(self))
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        assert_eq!(x.len(), self.nvars, "point dimension mismatch");
        let mut total = Q::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    t *= xi;
                }
            }
            total += t;
        }
        total
    }

    /// Substitutes `x_i = sum_j m[i][j] * t_j`, giving a polynomial in the
    /// `t` variables. `m` has `nvars` rows of length `new_nvars`.
    pub fn substitute_linear(&self, m: &[Vec<Q>], new_nvars: usize) -> Self {
        assert_eq!(m.len(), self.nvars, "substitution row count mismatch");
        let images: Vec<Self> = m.iter().map(|row| Self::linear(row)).collect();
        let mut out = Self::zero(new_nvars);
        for (e, c) in &self.terms {
            let mut t = Self::constant(new_nvars, c.clone());
            for (img, &k) in images.iter().zip(e) {
                if k > 0 {
                    t = t.mul(&img.pow(k));
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Monomial list text: `coeff e1 .. ek` entries joined by ` ; `.
    pub fn to_text(&self) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(e, c)| {
                let mut s = fmt_q(c);
                for k in e {
                    s.push(' ');
                    s.push_str(&k.to_string());
                }
                s
            })
            .collect();
        parts.join(" ; ")
    }

    pub fn parse(text: &str, nvars: usize) -> Result<Self, String> {
        let mut p = Self::zero(nvars);
        let text = text.trim();
        if text.is_empty() {
            return Ok(p);
        }
        for mono in text.split(';') {
            let words: Vec<&str> = mono.split_whitespace().collect();
            let Some((c, exps)) = words.split_first() else {
                return Err("empty monomial".into());
            };
            if exps.len() != nvars {
                return Err(format!("monomial has {} exponents, expected {nvars}", exps.len()));
            }
            let c = parse_q(c).ok_or_else(|| format!("bad coefficient `{c}`"))?;
            let e = exps
                .iter()
                .map(|w| {
                    w.parse::<u32>()
                        .ok()
                        .filter(|&k| k <= 64)
                        .ok_or_else(|| format!("bad exponent `{w}`"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            p.add_term(e, c);
        }
        Ok(p)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", fmt_q(c))?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{i}")?,
                    _ => write!(f, "*x{i}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

/// Lagrange interpolation through `(t_i, y_i)`, returning coefficients of
/// the univariate polynomial from the constant term up.
pub fn interpolate(ts: &[Q], ys: &[Q]) -> Vec<Q> {
    assert_eq!(ts.len(), ys.len());
    let n = ts.len();
    let mut out = vec![Q::zero(); n];
    for i in 0..n {
        // basis polynomial prod_{j != i} (t - t_j) / (t_i - t_j)
        let mut basis = vec![Q::one()];
        let mut denom = Q::one();
        for j in 0..n {
            if j == i {
                continue;
            }
            let mut next = vec![Q::zero(); basis.len() + 1];
            for (k, b) in basis.iter().enumerate() {
                next[k + 1] += b;
                next[k] -= b * &ts[j];
            }
            basis = next;
            denom *= &ts[i] - &ts[j];
        }
        let f = &ys[i] / denom;
        for (k, b) in basis.iter().enumerate() {
            out[k] += b * &f;
        }
    }
    while out.last().is_some_and(Zero::is_zero) {
        out.pop();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, q_vec};

    #[test]
    fn ring_operations() {
        let x = Polynomial::variable(2, 0);
        let y = Polynomial::variable(2, 1);
        let p = x.add(&y).mul(&x.sub(&y));
        assert_eq!(p, x.pow(2).sub(&y.pow(2)));
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.eval(&q_vec(&[3, 2])), q(5));
        assert!(p.sub(&p).is_zero());
    }

    #[test]
    fn substitution() {
        // x0*x1 with x0 = t, x1 = t gives t^2
        let p = Polynomial::variable(2, 0).mul(&Polynomial::variable(2, 1));
        let s = p.substitute_linear(&[q_vec(&[1]), q_vec(&[1])], 1);
        assert_eq!(s, Polynomial::variable(1, 0).pow(2));
    }

    #[test]
    fn text_roundtrip() {
        let p = Polynomial::from_terms(2, [(vec![2, 0], q(3)), (vec![0, 1], -q(1))]);
        assert_eq!(Polynomial::parse(&p.to_text(), 2).unwrap(), p);
        assert!(Polynomial::parse("1 2", 2).is_err());
        assert!(Polynomial::parse("", 2).unwrap().is_zero());
    }

    #[test]
    fn interpolation_recovers_cubic() {
        let ts = q_vec(&[0, 1, 2, 3, 4]);
        let ys: Vec<Q> = ts.iter().map(|t| t * t * t - q(2) * t).collect();
        assert_eq!(interpolate(&ts, &ys), q_vec(&[0, -2, 0, 1]));
    }
}
