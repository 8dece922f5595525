use std::fmt;

use serde_json::{json, Value};

use super::interval::Interval;
use super::multi_index::MultiIndex;
use super::piecewise::PiecewisePoly;
use super::pm::p_m_member;
use crate::error::{GfError, Result};
use crate::rational::{fmt_q, Q};

/// The class of `D^order rep`. Field equality is representation equality;
/// use [`FormalDistribution::equal`] for equality of distributions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FormalDistribution {
    order: MultiIndex,
    rep: PiecewisePoly,
}

impl FormalDistribution {
    pub fn new(order: MultiIndex, rep: PiecewisePoly) -> Result<Self> {
        if order.dim() != rep.dim() {
            return Err(GfError::Dimension { expected: rep.dim(), got: order.dim() });
        }
        Ok(FormalDistribution { order, rep })
    }

    /// The embedding `f -> D^0 f`.
    pub fn lambda(f: PiecewisePoly) -> Self {
        let n = f.dim();
        FormalDistribution { order: MultiIndex::zero(n), rep: f }
    }

    pub fn zero(domain: Interval) -> Self {
        FormalDistribution::lambda(PiecewisePoly::zero(domain))
    }

    pub fn order(&self) -> &MultiIndex {
        &self.order
    }

    pub fn rep(&self) -> &PiecewisePoly {
        &self.rep
    }

    pub fn domain(&self) -> &Interval {
        self.rep.domain()
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    pub fn derive(&self, k: usize) -> Self {
        FormalDistribution { order: self.order.add(&MultiIndex::unit(self.dim(), k)), rep: self.rep.clone() }
    }

    pub fn derive_multi(&self, alpha: &MultiIndex) -> Self {
        FormalDistribution { order: self.order.add(alpha), rep: self.rep.clone() }
    }

    /// Same class written with order `m`: `(m, J^{m - order} rep)`.
    pub fn raise(&self, m: &MultiIndex) -> Result<Self> {
        let gamma = m.checked_sub(&self.order)?;
        Ok(FormalDistribution { order: m.clone(), rep: self.rep.primitive_multi(&gamma) })
    }

    fn check_domain(&self, other: &Self) -> Result<()> {
        if self.domain() != other.domain() {
            return Err(GfError::DomainMismatch(format!("{} vs {}", self.domain(), other.domain())));
        }
        Ok(())
    }

    /// `D^r f = D^s g` iff `J^{m-r} f - J^{m-s} g` lies in `P_m`, `m = max(r, s)`.
    pub fn equal(&self, other: &Self) -> Result<bool> {
        self.check_domain(other)?;
        let m = MultiIndex::sup(&self.order, &other.order);
        let h = self.raise(&m)?.rep.sub(&other.raise(&m)?.rep)?;
        Ok(p_m_member(&h, &m))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_domain(other)?;
        let m = MultiIndex::sup(&self.order, &other.order);
        let rep = self.raise(&m)?.rep.add(&other.raise(&m)?.rep)?;
        Ok(FormalDistribution { order: m, rep })
    }

    pub fn scale(&self, mu: &Q) -> Self {
        FormalDistribution { order: self.order.clone(), rep: self.rep.scale(mu) }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-Q::from_integer(1.into())))
    }

    pub fn restrict(&self, j: &Interval) -> Result<Self> {
        Ok(FormalDistribution { order: self.order.clone(), rep: self.rep.restrict(j)? })
    }

    /// `(-1)^{|alpha|} int rep * d^alpha phi`, valid when every `d^beta phi`
    /// that integration by parts leaves on the boundary vanishes there.
    pub fn pair(&self, phi: &PiecewisePoly) -> Result<Q> {
        if phi.domain() != self.domain() {
            return Err(GfError::DomainMismatch(format!("{} vs {}", phi.domain(), self.domain())));
        }
        if !phi.c_alpha_member(&self.order) {
            return Err(GfError::BoundaryCondition(format!("test function is not of class {}", self.order)));
        }
        for beta in self.order.below() {
            let d = phi.partial_multi(&beta)?;
            for k in 0..self.dim() {
                if beta.0[k] >= self.order.0[k] {
                    continue;
                }
                for upper in [false, true] {
                    let at = if upper { self.domain().hi(k) } else { self.domain().lo(k) };
                    if d.boundary_cells(k, upper).iter().any(|p| !p.substitute(k, &at).is_zero()) {
                        return Err(GfError::BoundaryCondition(format!(
                            "d^{beta} of the test function does not vanish on x_{} = {}",
                            k + 1,
                            fmt_q(&at)
                        )));
                    }
                }
            }
        }
        let d = phi.partial_multi(&self.order)?;
        let v = self.rep.mul(&d)?.integrate();
        Ok(if self.order.total() % 2 == 1 { -v } else { v })
    }

    pub fn to_json(&self) -> Value {
        json!({ "order": self.order.0, "rep": self.rep.to_json() })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let order: Vec<u32> = serde_json::from_value(v.get("order").cloned().unwrap_or(Value::Null))
            .map_err(|e| GfError::Parse(format!("distribution order: {e}")))?;
        let rep = PiecewisePoly::from_json(v.get("rep").ok_or_else(|| GfError::Parse("missing rep".into()))?)?;
        FormalDistribution::new(MultiIndex(order), rep)
    }
}

impl fmt::Display for FormalDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.order, self.rep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;
    use crate::rational::{q, qr};

    fn i1() -> Interval {
        Interval::symmetric(1)
    }

    fn poly(coeffs: &[i64]) -> PiecewisePoly {
        let c: Vec<Q> = coeffs.iter().map(|&v| q(v)).collect();
        PiecewisePoly::polynomial(i1(), Poly::from_coeffs(1, 0, &c))
    }

    fn delta() -> FormalDistribution {
        FormalDistribution::new(MultiIndex(vec![2]), PiecewisePoly::ramp(i1())).unwrap()
    }

    #[test]
    fn equality_examples() {
        let dx = FormalDistribution::new(MultiIndex(vec![1]), poly(&[0, 1])).unwrap();
        assert!(dx.equal(&FormalDistribution::lambda(poly(&[1]))).unwrap());
        assert!(!delta().equal(&FormalDistribution::zero(i1())).unwrap());
        let shifted = PiecewisePoly::ramp(i1()).add(&poly(&[1, 3])).unwrap();
        assert!(delta().equal(&FormalDistribution::new(MultiIndex(vec![2]), shifted).unwrap()).unwrap());
    }

    #[test]
    fn heaviside_and_raise() {
        let h = FormalDistribution::lambda(PiecewisePoly::ramp(i1())).derive(0);
        assert_eq!(h.order(), &MultiIndex(vec![1]));
        let dx = FormalDistribution::new(MultiIndex(vec![1]), poly(&[0, 1])).unwrap();
        let r = dx.raise(&MultiIndex(vec![3])).unwrap();
        assert_eq!(r.rep().cells()[0], Poly::monomial(vec![3], qr(1, 6)));
        assert!(r.equal(&dx).unwrap());
        assert!(dx.raise(&MultiIndex(vec![0])).is_err());
    }

    #[test]
    fn vector_operations() {
        let d = delta();
        assert!(d.add(&FormalDistribution::zero(i1())).unwrap().equal(&d).unwrap());
        let dx = FormalDistribution::new(MultiIndex(vec![1]), poly(&[0, 1])).unwrap();
        assert!(dx.add(&FormalDistribution::lambda(poly(&[-1]))).unwrap().equal(&FormalDistribution::zero(i1())).unwrap());
        assert!(d.add(&d).unwrap().equal(&d.scale(&q(2))).unwrap());
    }

    #[test]
    fn restriction_away_from_the_kink_is_zero() {
        let j = Interval::interval_1d(qr(1, 4), q(1)).unwrap();
        let dj = delta().restrict(&j).unwrap();
        assert!(dj.equal(&FormalDistribution::zero(j)).unwrap());
    }

    #[test]
    fn pairing() {
        // (1 - x^2)^2
        let phi = poly(&[1, 0, -2, 0, 1]);
        assert_eq!(delta().pair(&phi).unwrap(), q(1));
        let h = FormalDistribution::lambda(PiecewisePoly::ramp(i1())).derive(0);
        let dphi = phi.partial(0).unwrap();
        assert_eq!(h.pair(&phi).unwrap(), -FormalDistribution::lambda(PiecewisePoly::ramp(i1())).pair(&dphi).unwrap());
        assert!(matches!(delta().pair(&poly(&[1])), Err(GfError::BoundaryCondition(_))));
    }
}
