//! Sparse multivariate polynomials with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::rational::{fmt_q, q, to_f64, Q};

/// Minimal commutative-ring interface used to evaluate polynomials over
/// rationals, floats and generalized numbers alike.
pub trait Ring: Clone {
    fn r_zero() -> Self;
    fn r_one() -> Self;
    fn from_q(c: &Q) -> Self;
    fn r_add(&self, other: &Self) -> Self;
    fn r_mul(&self, other: &Self) -> Self;
}

impl Ring for Q {
    fn r_zero() -> Self {
        Zero::zero()
    }
    fn r_one() -> Self {
        One::one()
    }
    fn from_q(c: &Q) -> Self {
        c.clone()
    }
    fn r_add(&self, other: &Self) -> Self {
        self + other
    }
    fn r_mul(&self, other: &Self) -> Self {
        self * other
    }
}

impl Ring for f64 {
    fn r_zero() -> Self {
        0.0
    }
    fn r_one() -> Self {
        1.0
    }
    fn from_q(c: &Q) -> Self {
        to_f64(c)
    }
    fn r_add(&self, other: &Self) -> Self {
        self + other
    }
    fn r_mul(&self, other: &Self) -> Self {
        self * other
    }
}

pub fn ring_pow<R: Ring>(x: &R, e: u32) -> R {
    let mut acc = R::r_one();
    let mut base = x.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.r_mul(&base);
        }
        e >>= 1;
        if e > 0 {
            base = base.r_mul(&base);
        }
    }
    acc
}

/// A polynomial in `nvars` variables; keys are exponent vectors, values are
/// nonzero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Q>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Poly::constant(nvars, q(1))
    }

    pub fn var(nvars: usize, k: usize) -> Self {
        let mut e = vec![0; nvars];
        e[k] = 1;
        Poly::monomial(e, q(1))
    }

    pub fn monomial(exps: Vec<u32>, c: Q) -> Self {
        let mut p = Poly::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    /// Builds a univariate polynomial from ascending coefficients.
    pub fn from_coeffs(nvars: usize, k: usize, coeffs: &[Q]) -> Self {
        let mut p = Poly::zero(nvars);
        for (d, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; nvars];
            e[k] = d as u32;
            p.add_term(e, c.clone());
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Q)>) -> Self {
        let mut p = Poly::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent length mismatch");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, exps: Vec<u32>, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exps: &[u32]) -> Q {
        self.terms.get(exps).cloned().unwrap_or_else(Q::zero)
    }

    pub fn constant_term(&self) -> Q {
        self.coeff(&vec![0; self.nvars])
    }

    pub fn degree_in(&self, k: usize) -> u32 {
        self.terms.keys().map(|e| e[k]).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Partial derivative along axis `k`.
    pub fn derivative(&self, k: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[k] > 0 {
                let mut e2 = e.clone();
                e2[k] -= 1;
                out.add_term(e2, c * q(e[k] as i64));
            }
        }
        out
    }

    /// Antiderivative along axis `k` with zero constant of integration.
    pub fn antiderivative(&self, k: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[k] += 1;
            let d = q(e2[k] as i64);
            out.add_term(e2, c / d);
        }
        out
    }

    /// Sets `x_k = value`; the result no longer depends on `x_k`.
    pub fn substitute(&self, k: usize, value: &Q) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[k] = 0;
            out.add_term(e2, c * num_traits::pow(value.clone(), e[k] as usize));
        }
        out
    }

    /// Composes `x_k := p`.
    pub fn compose(&self, k: usize, p: &Poly) -> Poly {
        assert_eq!(p.nvars, self.nvars);
        let maxd = self.degree_in(k);
        let mut powers = vec![Poly::one(self.nvars)];
        for d in 1..=maxd {
            let next = &powers[d as usize - 1] * p;
            powers.push(next);
        }
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[k] = 0;
            let rest = Poly::monomial(e2, c.clone());
            out = &out + &(&rest * &powers[e[k] as usize]);
        }
        out
    }

    /// Re-embeds into a polynomial ring with more variables, keeping the
    /// existing variables in front.
    pub fn extend_vars(&self, nvars: usize) -> Poly {
        assert!(nvars >= self.nvars);
        Poly {
            nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e2 = e.clone();
                    e2.resize(nvars, 0);
                    (e2, c.clone())
                })
                .collect(),
        }
    }

    /// Keeps only the first `nvars` variables; panics if a dropped variable
    /// occurs.
    pub fn truncate_vars(&self, nvars: usize) -> Poly {
        Poly {
            nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    assert!(e[nvars..].iter().all(|&d| d == 0), "dropped variable occurs");
                    (e[..nvars].to_vec(), c.clone())
                })
                .collect(),
        }
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        self.eval_generic(x)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.eval_generic(x)
    }

    pub fn eval_generic<R: Ring>(&self, x: &[R]) -> R {
        assert_eq!(x.len(), self.nvars, "point dimension mismatch");
        // cache powers per variable
        let mut cache: Vec<Vec<R>> = (0..self.nvars).map(|_| vec![R::r_one()]).collect();
        let mut acc = R::r_zero();
        for (e, c) in &self.terms {
            let mut term = R::from_q(c);
            for (k, &d) in e.iter().enumerate() {
                if d == 0 {
                    continue;
                }
                let pw = &mut cache[k];
                while pw.len() <= d as usize {
                    let next = pw[pw.len() - 1].r_mul(&x[k]);
                    pw.push(next);
                }
                term = term.r_mul(&pw[d as usize]);
            }
            acc = acc.r_add(&term);
        }
        acc
    }

    /// Exact integral over the box `prod [lo_k, hi_k]`.
    pub fn integrate_box(&self, lo: &[Q], hi: &[Q]) -> Q {
        let mut acc = Q::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (k, &d) in e.iter().enumerate() {
                let d1 = d as usize + 1;
                let v = (num_traits::pow(hi[k].clone(), d1) - num_traits::pow(lo[k].clone(), d1))
                    / q(d1 as i64);
                term *= v;
                if term.is_zero() {
                    break;
                }
            }
            acc += term;
        }
        acc
    }

    /// Whether some monomial `x^beta` has `beta >= m` componentwise.
    pub fn has_monomial_dominating(&self, m: &[u32]) -> bool {
        self.terms.keys().any(|e| e.iter().zip(m).all(|(b, mk)| b >= mk))
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&q(-1))
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names: Vec<String> = if self.nvars == 1 {
            vec!["x".into()]
        } else {
            (1..=self.nvars).map(|k| format!("x{k}")).collect()
        };
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", fmt_q(c))?;
            for (k, &d) in e.iter().enumerate() {
                match d {
                    0 => {}
                    1 => write!(f, "*{}", names[k])?,
                    _ => write!(f, "*{}^{}", names[k], d)?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qr;

    fn x() -> Poly {
        Poly::var(2, 0)
    }
    fn y() -> Poly {
        Poly::var(2, 1)
    }

    #[test]
    fn arithmetic_and_cancellation() {
        let p = &(&x() + &y()) * &(&x() - &y());
        let expected = &x().pow(2) - &y().pow(2);
        assert_eq!(p, expected);
        assert!((&p - &expected).is_zero());
    }

    #[test]
    fn derivative_undoes_antiderivative() {
        let p = Poly::from_terms(2, [(vec![2, 1], qr(3, 2)), (vec![0, 3], q(-1)), (vec![0, 0], q(5))]);
        assert_eq!(p.antiderivative(0).derivative(0), p);
        assert_eq!(p.antiderivative(1).derivative(1), p);
    }

    #[test]
    fn substitute_and_compose() {
        let p = &x().pow(2) * &y();
        assert_eq!(p.substitute(0, &q(3)), y().scale(&q(9)));
        let shifted = p.compose(0, &(&x() + &Poly::constant(2, q(1))));
        assert_eq!(shifted.eval(&[q(1), q(2)]), q(8));
    }

    #[test]
    fn box_integral_is_exact() {
        // int_0^1 int_0^2 x y^2 dy dx = 1/2 * 8/3
        let p = &x() * &y().pow(2);
        assert_eq!(p.integrate_box(&[q(0), q(0)], &[q(1), q(2)]), qr(4, 3));
    }

    #[test]
    fn generic_eval_matches_exact() {
        let p = Poly::from_terms(2, [(vec![3, 1], qr(1, 3)), (vec![0, 2], q(2))]);
        let exact = p.eval(&[qr(1, 2), q(3)]);
        let float = p.eval_f64(&[0.5, 3.0]);
        assert!((to_f64(&exact) - float).abs() < 1e-12);
    }
}
