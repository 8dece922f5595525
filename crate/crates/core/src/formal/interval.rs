use std::fmt;

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::error::{GfError, Result};
use crate::rational::{fmt_q, parse_q, q, Q};

/// An open box `prod (c_k - r_k, c_k + r_k)` with rational data.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    center: Vec<Q>,
    radii: Vec<Q>,
}

impl Interval {
    pub fn new(center: Vec<Q>, radii: Vec<Q>) -> Result<Self> {
        if center.len() != radii.len() || center.is_empty() {
            return Err(GfError::InvalidInterval("center and radii lengths differ".into()));
        }
        if radii.iter().any(|r| !r.is_positive()) {
            return Err(GfError::InvalidInterval("radii must be positive".into()));
        }
        Ok(Interval { center, radii })
    }

    pub fn from_bounds(lo: Vec<Q>, hi: Vec<Q>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(GfError::InvalidInterval("bound lengths differ".into()));
        }
        let two = q(2);
        let center = lo.iter().zip(&hi).map(|(a, b)| (a + b) / &two).collect();
        let radii = lo.iter().zip(&hi).map(|(a, b)| (b - a) / &two).collect();
        Interval::new(center, radii)
    }

    /// `(-1, 1)^n`
    pub fn symmetric(n: usize) -> Self {
        Interval { center: vec![Q::zero(); n], radii: vec![q(1); n] }
    }

    pub fn interval_1d(lo: Q, hi: Q) -> Result<Self> {
        Interval::from_bounds(vec![lo], vec![hi])
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[Q] {
        &self.center
    }

    pub fn radii(&self) -> &[Q] {
        &self.radii
    }

    pub fn lo(&self, k: usize) -> Q {
        &self.center[k] - &self.radii[k]
    }

    pub fn hi(&self, k: usize) -> Q {
        &self.center[k] + &self.radii[k]
    }

    pub fn lows(&self) -> Vec<Q> {
        (0..self.dim()).map(|k| self.lo(k)).collect()
    }

    pub fn highs(&self) -> Vec<Q> {
        (0..self.dim()).map(|k| self.hi(k)).collect()
    }

    pub fn contains_point(&self, x: &[Q]) -> bool {
        x.len() == self.dim() && (0..self.dim()).all(|k| self.lo(k) < x[k] && x[k] < self.hi(k))
    }

    pub fn contains_point_closed(&self, x: &[Q]) -> bool {
        x.len() == self.dim() && (0..self.dim()).all(|k| self.lo(k) <= x[k] && x[k] <= self.hi(k))
    }

    /// `other ⊆ self` as open boxes.
    pub fn contains(&self, other: &Interval) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|k| self.lo(k) <= other.lo(k) && other.hi(k) <= self.hi(k))
    }

    /// Nonempty open intersection.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        if self.dim() != other.dim() {
            return None;
        }
        let lo: Vec<Q> = (0..self.dim()).map(|k| self.lo(k).max(other.lo(k))).collect();
        let hi: Vec<Q> = (0..self.dim()).map(|k| self.hi(k).min(other.hi(k))).collect();
        if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
            return None;
        }
        Interval::from_bounds(lo, hi).ok()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lo": self.lows().iter().map(fmt_q).collect::<Vec<_>>(),
            "hi": self.highs().iter().map(fmt_q).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let list = |key: &str| -> Result<Vec<Q>> {
            v.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| GfError::Parse(format!("interval needs {key:?}")))?
                .iter()
                .map(|x| parse_q(x.as_str().ok_or_else(|| GfError::Parse("bound must be a string".into()))?))
                .collect()
        };
        Interval::from_bounds(list("lo")?, list("hi")?)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            (0..self.dim()).map(|k| format!("({},{})", fmt_q(&self.lo(k)), fmt_q(&self.hi(k)))).collect();
        write!(f, "{}", parts.join("x"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qr;

    #[test]
    fn inclusion_and_intersection() {
        let i = Interval::symmetric(1);
        let j = Interval::interval_1d(qr(-1, 2), q(1)).unwrap();
        assert!(i.contains(&j) && !j.contains(&i));
        let k = Interval::interval_1d(q(1), q(2)).unwrap();
        assert!(i.intersect(&k).is_none());
        assert_eq!(i.intersect(&j).unwrap(), j);
        assert!(Interval::new(vec![q(0)], vec![q(0)]).is_err());
        assert_eq!(Interval::from_json(&i.to_json()).unwrap(), i);
    }
}
