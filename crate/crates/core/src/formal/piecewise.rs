use std::fmt;

use num_traits::Zero;
use serde_json::{json, Value};

use super::interval::Interval;
use super::multi_index::MultiIndex;
use crate::error::{GfError, Result};
use crate::poly::Poly;
use crate::rational::{fmt_q, from_f64, parse_q, q, Q};

/// A continuous function on a box, polynomial on each cell of a tensor grid.
///
/// Cells are stored row-major with axis 0 slowest. Breakpoints are strictly
/// increasing and strictly inside the domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PiecewisePoly {
    domain: Interval,
    breaks: Vec<Vec<Q>>,
    cells: Vec<Poly>,
}

fn merge_sorted(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut v: Vec<Q> = a.iter().chain(b).cloned().collect();
    v.sort();
    v.dedup();
    v
}

impl PiecewisePoly {
    /// Validates the grid and continuity across every shared face.
    pub fn new(domain: Interval, breaks: Vec<Vec<Q>>, cells: Vec<Poly>) -> Result<Self> {
        let pp = PiecewisePoly::from_parts(domain, breaks, cells)?;
        pp.check_continuity()?;
        Ok(pp)
    }

    /// Validates the grid only.
    pub fn from_parts(domain: Interval, breaks: Vec<Vec<Q>>, cells: Vec<Poly>) -> Result<Self> {
        let n = domain.dim();
        if breaks.len() != n {
            return Err(GfError::Dimension { expected: n, got: breaks.len() });
        }
        for (k, b) in breaks.iter().enumerate() {
            if b.windows(2).any(|w| w[0] >= w[1]) {
                return Err(GfError::InvalidInterval(format!("breakpoints on axis {k} not increasing")));
            }
            if b.iter().any(|x| *x <= domain.lo(k) || *x >= domain.hi(k)) {
                return Err(GfError::InvalidInterval(format!("breakpoint on axis {k} outside the domain")));
            }
        }
        let count: usize = breaks.iter().map(|b| b.len() + 1).product();
        if cells.len() != count {
            return Err(GfError::Dimension { expected: count, got: cells.len() });
        }
        if let Some(p) = cells.iter().find(|p| p.nvars() != n) {
            return Err(GfError::Dimension { expected: n, got: p.nvars() });
        }
        Ok(PiecewisePoly { domain, breaks, cells })
    }

    pub fn polynomial(domain: Interval, p: Poly) -> Self {
        let n = domain.dim();
        assert_eq!(p.nvars(), n, "polynomial arity must match the domain");
        PiecewisePoly { domain, breaks: vec![Vec::new(); n], cells: vec![p] }
    }

    pub fn zero(domain: Interval) -> Self {
        let n = domain.dim();
        PiecewisePoly::polynomial(domain, Poly::zero(n))
    }

    /// 1-D function from breakpoints and one polynomial per piece.
    pub fn from_pieces(domain: Interval, breaks: Vec<Q>, pieces: Vec<Poly>) -> Result<Self> {
        PiecewisePoly::new(domain, vec![breaks], pieces)
    }

    /// `max(0, a*x_k + b)` on `domain`.
    pub fn ramp_affine(domain: Interval, k: usize, a: Q, b: Q) -> Result<Self> {
        let n = domain.dim();
        let lin = &Poly::var(n, k).scale(&a) + &Poly::constant(n, b.clone());
        if a.is_zero() {
            let c = if b > Q::zero() { lin } else { Poly::zero(n) };
            return Ok(PiecewisePoly::polynomial(domain, c));
        }
        let root = -b / &a;
        let pos_right = a > Q::zero();
        let (left, right) = if pos_right { (Poly::zero(n), lin.clone()) } else { (lin.clone(), Poly::zero(n)) };
        if root <= domain.lo(k) {
            return Ok(PiecewisePoly::polynomial(domain, right));
        }
        if root >= domain.hi(k) {
            return Ok(PiecewisePoly::polynomial(domain, left));
        }
        let mut breaks = vec![Vec::new(); n];
        breaks[k] = vec![root];
        let counts: Vec<usize> = breaks.iter().map(|b| b.len() + 1).collect();
        let total: usize = counts.iter().product();
        let mut cells = Vec::with_capacity(total);
        let skel = PiecewisePoly { domain: domain.clone(), breaks: breaks.clone(), cells: vec![Poly::zero(n); total] };
        for i in 0..total {
            let idx = skel.unindex(i);
            cells.push(if idx[k] == 0 { left.clone() } else { right.clone() });
        }
        PiecewisePoly::new(domain, breaks, cells)
    }

    /// `max(0, x)` on a 1-D domain.
    pub fn ramp(domain: Interval) -> Self {
        PiecewisePoly::ramp_affine(domain, 0, q(1), q(0)).expect("ramp is continuous")
    }

    pub fn domain(&self) -> &Interval {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn breaks(&self) -> &[Vec<Q>] {
        &self.breaks
    }

    pub fn cells(&self) -> &[Poly] {
        &self.cells
    }

    pub fn counts(&self) -> Vec<usize> {
        self.breaks.iter().map(|b| b.len() + 1).collect()
    }

    pub fn index(&self, idx: &[usize]) -> usize {
        let counts = self.counts();
        idx.iter().zip(&counts).fold(0, |acc, (i, n)| acc * n + i)
    }

    pub fn unindex(&self, mut i: usize) -> Vec<usize> {
        let counts = self.counts();
        let mut idx = vec![0; counts.len()];
        for k in (0..counts.len()).rev() {
            idx[k] = i % counts[k];
            i /= counts[k];
        }
        idx
    }

    pub fn cell_lo(&self, k: usize, i: usize) -> Q {
        if i == 0 {
            self.domain.lo(k)
        } else {
            self.breaks[k][i - 1].clone()
        }
    }

    pub fn cell_hi(&self, k: usize, i: usize) -> Q {
        if i == self.breaks[k].len() {
            self.domain.hi(k)
        } else {
            self.breaks[k][i].clone()
        }
    }

    /// `[lo, breaks..., hi]` along axis `k`.
    pub fn axis_points(&self, k: usize) -> Vec<Q> {
        let mut v = vec![self.domain.lo(k)];
        v.extend(self.breaks[k].iter().cloned());
        v.push(self.domain.hi(k));
        v
    }

    fn locate_axis(&self, k: usize, x: &Q) -> usize {
        self.breaks[k].partition_point(|b| b < x)
    }

    pub fn cell_at(&self, x: &[Q]) -> &Poly {
        let idx: Vec<usize> = (0..self.dim()).map(|k| self.locate_axis(k, &x[k])).collect();
        &self.cells[self.index(&idx)]
    }

    /// Exact value; points outside the closed domain use the nearest cell's
    /// polynomial.
    pub fn eval(&self, x: &[Q]) -> Q {
        self.cell_at(x).eval(x)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let xq: Vec<Q> = x.iter().map(|v| from_f64(*v).unwrap_or_else(Q::zero)).collect();
        self.cell_at(&xq).eval_f64(x)
    }

    pub fn is_zero(&self) -> bool {
        self.cells.iter().all(Poly::is_zero)
    }

    pub fn max_degree(&self) -> u32 {
        self.cells.iter().map(Poly::total_degree).max().unwrap_or(0)
    }

    fn face_pairs(&self, k: usize) -> Vec<(usize, usize, Q)> {
        let mut out = Vec::new();
        for i in 0..self.cells.len() {
            let idx = self.unindex(i);
            if idx[k] < self.breaks[k].len() {
                let mut r = idx.clone();
                r[k] += 1;
                out.push((i, self.index(&r), self.breaks[k][idx[k]].clone()));
            }
        }
        out
    }

    pub fn check_continuity(&self) -> Result<()> {
        for k in 0..self.dim() {
            for (l, r, b) in self.face_pairs(k) {
                if self.cells[l].substitute(k, &b) != self.cells[r].substitute(k, &b) {
                    return Err(GfError::Discontinuous(format!("jump across x_{} = {}", k + 1, fmt_q(&b))));
                }
            }
        }
        Ok(())
    }

    /// Classical `d/dx_k`, defined when the function is `C^1` in `x_k`.
    pub fn partial(&self, k: usize) -> Result<PiecewisePoly> {
        for (l, r, b) in self.face_pairs(k) {
            let dl = self.cells[l].derivative(k).substitute(k, &b);
            let dr = self.cells[r].derivative(k).substitute(k, &b);
            if dl != dr {
                return Err(GfError::NotDifferentiable { axis: k + 1, at: fmt_q(&b) });
            }
        }
        Ok(PiecewisePoly {
            domain: self.domain.clone(),
            breaks: self.breaks.clone(),
            cells: self.cells.iter().map(|p| p.derivative(k)).collect(),
        }
        .simplify())
    }

    /// Iterated classical derivative `d^alpha`.
    pub fn partial_multi(&self, alpha: &MultiIndex) -> Result<PiecewisePoly> {
        let mut f = self.clone();
        for (k, &a) in alpha.0.iter().enumerate() {
            for _ in 0..a {
                f = f.partial(k)?;
            }
        }
        Ok(f)
    }

    /// Membership in `C^alpha`: every `d_k f` with `alpha_k > 0` exists and
    /// lies in `C^{alpha - e_k}`.
    pub fn c_alpha_member(&self, alpha: &MultiIndex) -> bool {
        if alpha.dim() != self.dim() {
            return false;
        }
        for k in 0..self.dim() {
            if alpha.0[k] == 0 {
                continue;
            }
            let Ok(d) = self.partial(k) else {
                return false;
            };
            let mut rest = alpha.clone();
            rest.0[k] -= 1;
            if !d.c_alpha_member(&rest) {
                return false;
            }
        }
        true
    }

    /// `x -> int_{c_k}^{x_k} f(.., t, ..) dt` with `c` the domain center.
    pub fn primitive(&self, k: usize) -> PiecewisePoly {
        let c = self.domain.center()[k].clone();
        let nk = self.breaks[k].len() + 1;
        let j0 = self.breaks[k].partition_point(|b| *b <= c);
        let mut cells = self.cells.clone();
        for i in 0..self.cells.len() {
            let idx = self.unindex(i);
            if idx[k] != 0 {
                continue;
            }
            let at = |j: usize| {
                let mut v = idx.clone();
                v[k] = j;
                self.index(&v)
            };
            let anti: Vec<Poly> = (0..nk).map(|j| self.cells[at(j)].antiderivative(k)).collect();
            let mut col: Vec<Poly> = vec![Poly::zero(self.dim()); nk];
            col[j0] = &anti[j0] - &anti[j0].substitute(k, &c);
            for j in j0 + 1..nk {
                let lo = &self.breaks[k][j - 1];
                col[j] = &(&anti[j] - &anti[j].substitute(k, lo)) + &col[j - 1].substitute(k, lo);
            }
            for j in (0..j0).rev() {
                let hi = &self.breaks[k][j];
                col[j] = &(&anti[j] - &anti[j].substitute(k, hi)) + &col[j + 1].substitute(k, hi);
            }
            for (j, p) in col.into_iter().enumerate() {
                cells[at(j)] = p;
            }
        }
        PiecewisePoly { domain: self.domain.clone(), breaks: self.breaks.clone(), cells }
    }

    /// `J^gamma`: `gamma_k` anchored primitives along each axis.
    pub fn primitive_multi(&self, gamma: &MultiIndex) -> PiecewisePoly {
        let mut f = self.clone();
        for (k, &g) in gamma.0.iter().enumerate() {
            for _ in 0..g {
                f = f.primitive(k);
            }
        }
        f
    }

    /// Re-expresses on a finer grid; `breaks` must contain the current ones.
    pub fn refine(&self, breaks: &[Vec<Q>]) -> PiecewisePoly {
        let skel = PiecewisePoly {
            domain: self.domain.clone(),
            breaks: breaks.to_vec(),
            cells: Vec::new(),
        };
        let total: usize = skel.counts().iter().product();
        let two = q(2);
        let cells = (0..total)
            .map(|i| {
                let idx = skel.unindex(i);
                let mid: Vec<Q> =
                    (0..self.dim()).map(|k| (skel.cell_lo(k, idx[k]) + skel.cell_hi(k, idx[k])) / &two).collect();
                self.cell_at(&mid).clone()
            })
            .collect();
        PiecewisePoly { domain: self.domain.clone(), breaks: breaks.to_vec(), cells }
    }

    /// Both functions on their common refinement.
    pub fn align(&self, other: &PiecewisePoly) -> Result<(PiecewisePoly, PiecewisePoly)> {
        if self.domain != other.domain {
            return Err(GfError::DomainMismatch(format!("{} vs {}", self.domain, other.domain)));
        }
        let breaks: Vec<Vec<Q>> = self.breaks.iter().zip(&other.breaks).map(|(a, b)| merge_sorted(a, b)).collect();
        Ok((self.refine(&breaks), other.refine(&breaks)))
    }

    fn zip_with(&self, other: &PiecewisePoly, f: impl Fn(&Poly, &Poly) -> Poly) -> Result<PiecewisePoly> {
        let (a, b) = self.align(other)?;
        let cells = a.cells.iter().zip(&b.cells).map(|(x, y)| f(x, y)).collect();
        Ok(PiecewisePoly { domain: a.domain, breaks: a.breaks, cells }.simplify())
    }

    pub fn add(&self, other: &PiecewisePoly) -> Result<PiecewisePoly> {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &PiecewisePoly) -> Result<PiecewisePoly> {
        self.zip_with(other, |x, y| x - y)
    }

    pub fn mul(&self, other: &PiecewisePoly) -> Result<PiecewisePoly> {
        self.zip_with(other, |x, y| x * y)
    }

    pub fn scale(&self, c: &Q) -> PiecewisePoly {
        PiecewisePoly {
            domain: self.domain.clone(),
            breaks: self.breaks.clone(),
            cells: self.cells.iter().map(|p| p.scale(c)).collect(),
        }
        .simplify()
    }

    /// Restriction to a sub-box; breakpoints outside `J` are dropped.
    pub fn restrict(&self, j: &Interval) -> Result<PiecewisePoly> {
        if !self.domain.contains(j) {
            return Err(GfError::DomainMismatch(format!("{j} is not inside {}", self.domain)));
        }
        let breaks: Vec<Vec<Q>> = self
            .breaks
            .iter()
            .enumerate()
            .map(|(k, b)| b.iter().filter(|x| **x > j.lo(k) && **x < j.hi(k)).cloned().collect())
            .collect();
        let skel = PiecewisePoly { domain: j.clone(), breaks: breaks.clone(), cells: Vec::new() };
        let total: usize = skel.counts().iter().product();
        let two = q(2);
        let cells = (0..total)
            .map(|i| {
                let idx = skel.unindex(i);
                let mid: Vec<Q> =
                    (0..self.dim()).map(|k| (skel.cell_lo(k, idx[k]) + skel.cell_hi(k, idx[k])) / &two).collect();
                self.cell_at(&mid).clone()
            })
            .collect();
        Ok(PiecewisePoly { domain: j.clone(), breaks, cells }.simplify())
    }

    /// Drops breakpoints across which every pair of cells coincides.
    pub fn simplify(&self) -> PiecewisePoly {
        let mut cur = self.clone();
        for k in 0..cur.dim() {
            let mut j = 0;
            while j < cur.breaks[k].len() {
                let removable = cur
                    .face_pairs(k)
                    .iter()
                    .filter(|(l, _, b)| *b == cur.breaks[k][j] && cur.unindex(*l)[k] == j)
                    .all(|(l, r, _)| cur.cells[*l] == cur.cells[*r]);
                if removable {
                    let mut nb = cur.breaks.clone();
                    nb[k].remove(j);
                    let skel = PiecewisePoly { domain: cur.domain.clone(), breaks: nb.clone(), cells: Vec::new() };
                    let total: usize = skel.counts().iter().product();
                    let cells = (0..total)
                        .map(|i| {
                            let mut idx = skel.unindex(i);
                            if idx[k] > j {
                                idx[k] += 1;
                            }
                            cur.cells[cur.index(&idx)].clone()
                        })
                        .collect();
                    cur = PiecewisePoly { domain: cur.domain.clone(), breaks: nb, cells };
                } else {
                    j += 1;
                }
            }
        }
        cur
    }

    /// Exact integral over the domain.
    pub fn integrate(&self) -> Q {
        let mut acc = Q::zero();
        for (i, p) in self.cells.iter().enumerate() {
            let idx = self.unindex(i);
            let lo: Vec<Q> = (0..self.dim()).map(|k| self.cell_lo(k, idx[k])).collect();
            let hi: Vec<Q> = (0..self.dim()).map(|k| self.cell_hi(k, idx[k])).collect();
            acc += p.integrate_box(&lo, &hi);
        }
        acc
    }

    /// Polynomial pieces adjacent to the face `x_k = lo` (`upper = false`) or
    /// `x_k = hi`.
    pub fn boundary_cells(&self, k: usize, upper: bool) -> Vec<&Poly> {
        let last = self.breaks[k].len();
        (0..self.cells.len())
            .filter(|i| self.unindex(*i)[k] == if upper { last } else { 0 })
            .map(|i| &self.cells[i])
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "domain": self.domain.to_json(),
            "breaks": self.breaks.iter().map(|b| b.iter().map(fmt_q).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "cells": self.cells.iter().map(poly_to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| GfError::Parse(format!("piecewise polynomial: {m}"));
        let domain = Interval::from_json(v.get("domain").ok_or_else(|| bad("missing domain"))?)?;
        let breaks = v
            .get("breaks")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing breaks"))?
            .iter()
            .map(|axis| {
                axis.as_array()
                    .ok_or_else(|| bad("breaks must be arrays"))?
                    .iter()
                    .map(|x| parse_q(x.as_str().ok_or_else(|| bad("breakpoint must be a string"))?))
                    .collect::<Result<Vec<Q>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let n = domain.dim();
        let cells = v
            .get("cells")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing cells"))?
            .iter()
            .map(|c| poly_from_json(c, n))
            .collect::<Result<Vec<_>>>()?;
        PiecewisePoly::new(domain, breaks, cells)
    }
}

pub(crate) fn poly_to_json(p: &Poly) -> Value {
    Value::Array(p.terms().map(|(e, c)| json!([e, fmt_q(c)])).collect())
}

pub(crate) fn poly_from_json(v: &Value, n: usize) -> Result<Poly> {
    let bad = || GfError::Parse(format!("bad polynomial json {v}"));
    let terms = v
        .as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|t| {
            let e: Vec<u32> = serde_json::from_value(t.get(0).cloned().ok_or_else(bad)?).map_err(|_| bad())?;
            if e.len() != n {
                return Err(GfError::Dimension { expected: n, got: e.len() });
            }
            let c = parse_q(t.get(1).and_then(Value::as_str).ok_or_else(bad)?)?;
            Ok((e, c))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Poly::from_terms(n, terms))
}

impl fmt::Display for PiecewisePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cells.len() == 1 {
            return write!(f, "{}", self.cells[0]);
        }
        let b: Vec<String> = self
            .breaks
            .iter()
            .map(|axis| axis.iter().map(fmt_q).collect::<Vec<_>>().join(","))
            .collect();
        let c: Vec<String> = self.cells.iter().map(|p| p.to_string()).collect();
        write!(f, "pw{{{}}}[{}]", b.join(";"), c.join("|"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qr;

    fn x1() -> Poly {
        Poly::var(1, 0)
    }

    #[test]
    fn primitive_of_one_and_ramp() {
        let i = Interval::symmetric(1);
        let one = PiecewisePoly::polynomial(i.clone(), Poly::one(1));
        assert_eq!(one.primitive(0), PiecewisePoly::polynomial(i.clone(), x1()));
        let r = PiecewisePoly::ramp(i.clone());
        let pr = r.primitive(0);
        assert_eq!(pr.eval(&[qr(-1, 2)]), q(0));
        assert_eq!(pr.eval(&[qr(1, 2)]), qr(1, 8));
        assert_eq!(pr.partial(0).unwrap(), r);
    }

    #[test]
    fn primitive_off_center_anchor() {
        let i = Interval::interval_1d(q(0), q(2)).unwrap();
        let f = PiecewisePoly::ramp_affine(i, 0, q(1), qr(-1, 2)).unwrap();
        let p = f.primitive(0);
        assert_eq!(p.eval(&[q(1)]), q(0));
        assert_eq!(p.partial(0).unwrap(), f);
        assert_eq!(p.eval(&[q(2)]), qr(1, 2) * qr(9, 4) - qr(1, 2) * qr(1, 4));
    }

    #[test]
    fn two_dimensional_primitive() {
        let i = Interval::symmetric(2);
        let f = PiecewisePoly::polynomial(i, &Poly::var(2, 0) * &Poly::var(2, 1));
        let p = f.primitive(0);
        assert_eq!(p.cells()[0], Poly::monomial(vec![2, 1], qr(1, 2)));
    }

    #[test]
    fn kinks_are_not_differentiable() {
        let r = PiecewisePoly::ramp(Interval::symmetric(1));
        assert!(!r.c_alpha_member(&MultiIndex(vec![1])));
        assert!(matches!(r.partial(0), Err(GfError::NotDifferentiable { axis: 1, .. })));
        let p = PiecewisePoly::polynomial(Interval::symmetric(1), x1().pow(2));
        assert!(p.c_alpha_member(&MultiIndex(vec![7])));
    }

    #[test]
    fn discontinuous_input_rejected() {
        let i = Interval::symmetric(1);
        let r = PiecewisePoly::from_pieces(i, vec![q(0)], vec![Poly::zero(1), Poly::one(1)]);
        assert!(matches!(r, Err(GfError::Discontinuous(_))));
    }

    #[test]
    fn restriction_and_json() {
        let i = Interval::symmetric(1);
        let r = PiecewisePoly::ramp(i);
        let j = Interval::interval_1d(qr(1, 4), q(1)).unwrap();
        let rj = r.restrict(&j).unwrap();
        assert_eq!(rj.cells().len(), 1);
        assert_eq!(PiecewisePoly::from_json(&r.to_json()).unwrap(), r);
        assert!(r.restrict(&Interval::interval_1d(q(0), q(2)).unwrap()).is_err());
    }

    #[test]
    fn integration() {
        let r = PiecewisePoly::ramp(Interval::symmetric(1));
        assert_eq!(r.integrate(), qr(1, 2));
    }
}
