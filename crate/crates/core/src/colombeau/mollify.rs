//! Exact mollification of 1-D piecewise polynomials by the scaled bump
//! `(1/sigma) mu(x/sigma)`, `mu(u) = C_p (1 - u^2)^p` on `|u| <= 1`.
//!
//! Representatives are extended beyond their interval by their constant
//! boundary values.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{GfError, Result};
use crate::expr::Expr;
use crate::formal::{FormalDistribution, PiecewisePoly};
use crate::gauge::GaugeExpr;
use crate::poly::{ring_pow, Poly, Ring};
use crate::rational::{binomial, factorial, q, Q};

/// A ring with decidable signs, used to evaluate mollified nets at rational
/// and at series arguments with one code path.
pub trait OrderedRing: Ring {
    fn sign(&self) -> Option<Ordering>;

    fn sub(&self, o: &Self) -> Self {
        self.r_add(&o.r_mul(&Self::from_q(&q(-1))))
    }
}

impl OrderedRing for Q {
    fn sign(&self) -> Option<Ordering> {
        Some(self.cmp(&Q::zero()))
    }
}

impl OrderedRing for GaugeExpr {
    fn sign(&self) -> Option<Ordering> {
        GaugeExpr::sign(self)
    }
}

/// `C_p = 1 / int_{-1}^{1} (1 - u^2)^p du = (2p+1)! / (2^{2p+1} (p!)^2)`.
pub fn bump_constant(p: u32) -> Q {
    let num = factorial(2 * p + 1);
    let f = factorial(p);
    Q::new(num, BigInt::from(2).pow(2 * p + 1) * &f * &f)
}

/// The `d`-th derivative of `C_p (1 - u^2)^p` as a polynomial in `u`.
pub fn bump_poly(p: u32, d: u32) -> Poly {
    let mut coeffs = vec![Q::zero(); 2 * p as usize + 1];
    for j in 0..=p {
        let c = Q::from_integer(binomial(p, j)) * if j % 2 == 1 { q(-1) } else { q(1) };
        coeffs[2 * j as usize] = c;
    }
    let mut poly = Poly::from_coeffs(1, 0, &coeffs).scale(&bump_constant(p));
    for _ in 0..d {
        poly = poly.derivative(0);
    }
    poly
}

/// `f_sigma = ext(rep) * d^order mu_sigma` at the argument `arg`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mollified {
    pub rep: PiecewisePoly,
    pub order: u32,
    pub p: u32,
    pub arg: Expr,
}

impl Mollified {
    pub fn new(rep: PiecewisePoly, order: u32, p: u32) -> Result<Self> {
        if rep.dim() != 1 {
            return Err(GfError::Unsupported("mollification is implemented for 1-D representatives".into()));
        }
        // mu^(order) must be integrable: order <= p
        if p < 2 || order > p {
            return Err(GfError::SmoothnessBudget { requested: order, budget: p });
        }
        Ok(Mollified { rep: rep.simplify(), order, p, arg: Expr::Var(0) })
    }

    /// The regularization of a 1-D formal distribution.
    pub fn of_distribution(t: &FormalDistribution, p: u32) -> Result<Self> {
        Mollified::new(t.rep().clone(), t.order().0.first().copied().unwrap_or(0), p)
    }

    pub fn is_zero(&self) -> bool {
        let r = &self.rep;
        r.is_zero() || (self.order > 0 && r.cells().len() == 1 && r.cells()[0].total_degree() == 0)
    }

    pub fn derived(&self) -> Mollified {
        Mollified { order: self.order + 1, ..self.clone() }
    }

    /// Remaining derivative orders with a continuous result.
    pub fn budget(&self) -> u32 {
        self.p.saturating_sub(2).saturating_sub(self.order)
    }

    pub fn at(&self, arg: Expr) -> Mollified {
        Mollified { arg, ..self.clone() }
    }

    pub(crate) fn arg_f64(&self, x: &[f64], rho: f64) -> f64 {
        self.arg.eval_f64(x, rho)
    }

    pub(crate) fn arg_q(&self, x: &[Q], rho: &Q) -> Option<Q> {
        self.arg.eval_q(x, rho)
    }

    pub(crate) fn arg_gauge(&self, point: &[GaugeExpr]) -> Option<GaugeExpr> {
        self.arg.to_gauge(point)
    }

    /// Pieces of the extended representative: `(left, right, polynomial)`
    /// with `None` for an infinite end.
    fn extended_pieces(&self) -> Vec<(Option<Q>, Option<Q>, Poly)> {
        let r = &self.rep;
        let pts = r.axis_points(0);
        let (a, b) = (pts[0].clone(), pts[pts.len() - 1].clone());
        let mut out = vec![(None, Some(a.clone()), Poly::constant(1, r.eval(&[a])))];
        for (i, cell) in r.cells().iter().enumerate() {
            out.push((Some(pts[i].clone()), Some(pts[i + 1].clone()), cell.clone()));
        }
        out.push((Some(b.clone()), None, Poly::constant(1, r.eval(&[b]))));
        out
    }

    /// `sigma^{-order} int_{-1}^{1} ext(rep)(x - sigma u) mu^{(order)}(u) du`,
    /// with every clipping decision taken by a sign test. `None` when a sign
    /// is undecidable.
    pub fn eval_generic<S: OrderedRing>(&self, x: &S, sigma: &S, sigma_inv: &S) -> Option<S> {
        let mu = bump_poly(self.p, self.order);
        let mu_c: Vec<Q> = (0..=mu.degree_in(0)).map(|d| mu.coeff(&[d])).collect();
        let one = S::r_one();
        let m_one = S::from_q(&q(-1));
        let neg_sigma = sigma.r_mul(&m_one);
        let mut total = S::r_zero();
        for (l, r, poly) in self.extended_pieces() {
            let lower = match &r {
                None => m_one.clone(),
                Some(r) => {
                    let b = x.sub(&S::from_q(r)).r_mul(sigma_inv);
                    if b.sub(&m_one).sign()? == Ordering::Greater { b } else { m_one.clone() }
                }
            };
            let upper = match &l {
                None => one.clone(),
                Some(l) => {
                    let b = x.sub(&S::from_q(l)).r_mul(sigma_inv);
                    if b.sub(&one).sign()? == Ordering::Less { b } else { one.clone() }
                }
            };
            if upper.sub(&lower).sign()? != Ordering::Greater {
                continue;
            }
            // P(x - sigma u) = sum_i c_i u^i
            let deg = poly.degree_in(0) as usize;
            let a: Vec<Q> = (0..=deg).map(|j| poly.coeff(&[j as u32])).collect();
            let xpow: Vec<S> = (0..=deg).map(|j| ring_pow(x, j as u32)).collect();
            let spow: Vec<S> = (0..=deg).map(|i| ring_pow(&neg_sigma, i as u32)).collect();
            let mut c: Vec<S> = vec![S::r_zero(); deg + 1];
            for (j, aj) in a.iter().enumerate() {
                if aj.is_zero() {
                    continue;
                }
                for (i, ci) in c.iter_mut().enumerate().take(j + 1) {
                    let k = S::from_q(&(aj * Q::from_integer(binomial(j as u32, i as u32))));
                    *ci = ci.r_add(&k.r_mul(&xpow[j - i]).r_mul(&spow[i]));
                }
            }
            // antiderivative of sum_t g_t u^t evaluated between the bounds
            let mut g: Vec<S> = vec![S::r_zero(); deg + mu_c.len()];
            for (i, ci) in c.iter().enumerate() {
                for (s, ms) in mu_c.iter().enumerate() {
                    if !ms.is_zero() {
                        g[i + s] = g[i + s].r_add(&ci.r_mul(&S::from_q(ms)));
                    }
                }
            }
            let up: Vec<S> = (0..=g.len()).map(|t| ring_pow(&upper, t as u32)).collect();
            let lo: Vec<S> = (0..=g.len()).map(|t| ring_pow(&lower, t as u32)).collect();
            for (t, gt) in g.iter().enumerate() {
                let w = S::from_q(&(Q::one() / q(t as i64 + 1)));
                total = total.r_add(&gt.r_mul(&w).r_mul(&up[t + 1].sub(&lo[t + 1])));
            }
        }
        Some(total.r_mul(&ring_pow(sigma_inv, self.order)))
    }

    pub fn eval_q(&self, x: &Q, sigma: &Q) -> Q {
        let inv = Q::one() / sigma;
        self.eval_generic(x, sigma, &inv).expect("rational signs are decidable")
    }

    /// The net at a fixed rational `sigma` as a piecewise polynomial on the
    /// representative's domain, recovered by exact interpolation per cell.
    pub fn to_piecewise(&self, sigma: &Q) -> Result<PiecewisePoly> {
        if !sigma.is_positive() {
            return Err(GfError::InvalidInterval("mollifier scale must be positive".into()));
        }
        let dom = self.rep.domain().clone();
        let pts = self.rep.axis_points(0);
        let (a, b) = (pts[0].clone(), pts[pts.len() - 1].clone());
        let mut cuts: Vec<Q> = Vec::new();
        for t in &pts {
            for c in [t - sigma, t + sigma] {
                if c > a && c < b {
                    cuts.push(c);
                }
            }
        }
        cuts.sort();
        cuts.dedup();
        let deg = self.rep.max_degree() as i64 + 2 * self.p as i64 - self.order as i64 + 1;
        let mut bounds = vec![a];
        bounds.extend(cuts.iter().cloned());
        bounds.push(b);
        let mut pieces = Vec::with_capacity(bounds.len() - 1);
        for w in bounds.windows(2) {
            let step = (&w[1] - &w[0]) / q(deg + 2);
            let xs: Vec<Q> = (1..=deg + 1).map(|i| &w[0] + &step * q(i)).collect();
            let ys: Vec<Q> = xs.iter().map(|x| self.eval_q(x, sigma)).collect();
            pieces.push(interpolate(&xs, &ys));
        }
        PiecewisePoly::from_pieces(dom, cuts, pieces).map(|pp| pp.simplify())
    }

    /// `int f_sigma phi` over the representative's domain, exact.
    pub fn pair(&self, phi: &PiecewisePoly, sigma: &Q) -> Result<Q> {
        Ok(self.to_piecewise(sigma)?.mul(phi)?.integrate())
    }

    pub fn to_json(&self) -> Value {
        json!({ "rep": self.rep.to_json(), "order": self.order, "p": self.p, "arg": self.arg.to_json() })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| GfError::Parse(format!("mollified net: {m}"));
        let rep = PiecewisePoly::from_json(v.get("rep").ok_or_else(|| bad("missing rep"))?)?;
        let order = v.get("order").and_then(Value::as_u64).ok_or_else(|| bad("missing order"))? as u32;
        let p = v.get("p").and_then(Value::as_u64).ok_or_else(|| bad("missing p"))? as u32;
        let mut m = Mollified::new(rep, order, p)?;
        if let Some(a) = v.get("arg") {
            m.arg = Expr::from_json(a)?;
        }
        Ok(m)
    }
}

impl fmt::Display for Mollified {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "moll[p={},k={}]({})({})", self.p, self.order, self.rep, self.arg)
    }
}

/// Newton interpolation through `(xs[i], ys[i])`, returned in monomial form.
fn interpolate(xs: &[Q], ys: &[Q]) -> Poly {
    let n = xs.len();
    let mut dd = ys.to_vec();
    for r in 1..n {
        for j in (r..n).rev() {
            dd[j] = (&dd[j] - &dd[j - 1]) / (&xs[j] - &xs[j - r]);
        }
    }
    let x = Poly::var(1, 0);
    let mut acc = Poly::constant(1, dd[n - 1].clone());
    for j in (0..n - 1).rev() {
        acc = &(&acc * &(&x - &Poly::constant(1, xs[j].clone()))) + &Poly::constant(1, dd[j].clone());
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal::Interval;
    use crate::gauge::parse_gauge_expr;
    use crate::rational::qr;

    fn delta(p: u32) -> Mollified {
        Mollified::new(PiecewisePoly::ramp(Interval::symmetric(1)), 2, p).unwrap()
    }

    #[test]
    fn bump_constants() {
        assert_eq!(bump_constant(2), qr(15, 16));
        for p in 1..6 {
            let mu = bump_poly(p, 0);
            assert_eq!(mu.integrate_box(&[q(-1)], &[q(1)]), q(1));
        }
    }

    #[test]
    fn delta_at_zero_is_mu0_over_sigma() {
        let d = delta(2);
        assert_eq!(d.eval_q(&q(0), &qr(1, 100)), qr(1500, 16));
        let v = d
            .eval_generic(&GaugeExpr::zero(), &GaugeExpr::rho_pow(q(1)), &GaugeExpr::rho_pow(q(-1)))
            .unwrap();
        assert_eq!(v, parse_gauge_expr("15/16*rho^-1").unwrap());
        // away from the kink the net vanishes once the window leaves it
        assert_eq!(d.eval_q(&qr(1, 2), &qr(1, 100)), q(0));
    }

    #[test]
    fn smooth_representative_is_reproduced_to_second_order() {
        // x^2 * mu_sigma = x^2 + sigma^2 m_2 in the interior
        let sq = PiecewisePoly::polynomial(Interval::symmetric(1), Poly::monomial(vec![2], q(1)));
        let m = Mollified::new(sq, 0, 2).unwrap();
        let x = parse_gauge_expr("1/3 + rho").unwrap();
        let v = m.eval_generic(&x, &GaugeExpr::rho_pow(q(1)), &GaugeExpr::rho_pow(q(-1))).unwrap();
        // m_2 = int u^2 mu = 1/7 for p = 2
        assert_eq!(v, parse_gauge_expr("1/9 + 2/3*rho + 8/7*rho^2").unwrap());
    }

    #[test]
    fn piecewise_form_matches_pointwise_values() {
        let d = delta(3);
        let s = qr(1, 8);
        let pp = d.to_piecewise(&s).unwrap();
        for x in [qr(-1, 2), qr(-1, 16), q(0), qr(3, 32), qr(7, 8)] {
            assert_eq!(pp.eval(std::slice::from_ref(&x)), d.eval_q(&x, &s));
        }
    }

    #[test]
    fn budget_is_enforced() {
        let r = PiecewisePoly::ramp(Interval::symmetric(1));
        assert!(Mollified::new(r.clone(), 9, 8).is_err());
        assert_eq!(Mollified::new(r.clone(), 6, 8).unwrap().budget(), 0);
        assert_eq!(Mollified::new(r, 2, 8).unwrap().budget(), 4);
    }
}
