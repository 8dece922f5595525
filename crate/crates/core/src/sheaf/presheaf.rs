//! The presheaf contract and the instance of formal distributions.

use std::fmt;

use serde_json::Value;

use crate::error::{GfError, Result};
use crate::formal::{p_m_member_monomial, FormalDistribution, Interval, MultiIndex, PiecewisePoly};
use crate::poly::Poly;
use crate::rational::{q, Q};

/// Result of trying to build one section on `J` from local pieces.
#[derive(Clone, Debug)]
pub enum GlueOutcome<S> {
    Glued(S),
    /// The pieces leave part of `J` uncovered.
    NotCovered,
    /// No construction applies; the interval is left out of the family.
    Undecided(String),
}

/// A separated presheaf of modules on the base, with a constructive gluing
/// hook used by the completion of compatible families.
pub trait Presheaf: Clone + Send + Sync {
    type Section: Clone + fmt::Debug + Send + Sync;

    fn domain(&self, s: &Self::Section) -> Interval;

    fn restrict(&self, s: &Self::Section, j: &Interval) -> Result<Self::Section>;

    fn equal(&self, a: &Self::Section, b: &Self::Section) -> Result<bool>;

    fn add(&self, a: &Self::Section, b: &Self::Section) -> Result<Self::Section>;

    fn scale(&self, a: &Self::Section, c: &Q) -> Self::Section;

    fn zero(&self, j: &Interval) -> Self::Section;

    /// A section on `j` restricting to each piece, given pieces on boxes
    /// inside `j` that agree on overlaps.
    fn glue(&self, j: &Interval, pieces: &[Self::Section]) -> Result<GlueOutcome<Self::Section>>;

    fn section_to_json(&self, s: &Self::Section) -> Value;

    fn section_from_json(&self, v: &Value) -> Result<Self::Section>;
}

/// Formal distributions `D^alpha f` with continuous piecewise-polynomial `f`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FdPresheaf;

impl Presheaf for FdPresheaf {
    type Section = FormalDistribution;

    fn domain(&self, s: &FormalDistribution) -> Interval {
        s.domain().clone()
    }

    fn restrict(&self, s: &FormalDistribution, j: &Interval) -> Result<FormalDistribution> {
        s.restrict(j)
    }

    fn equal(&self, a: &FormalDistribution, b: &FormalDistribution) -> Result<bool> {
        a.equal(b)
    }

    fn add(&self, a: &FormalDistribution, b: &FormalDistribution) -> Result<FormalDistribution> {
        a.add(b)
    }

    fn scale(&self, a: &FormalDistribution, c: &Q) -> FormalDistribution {
        a.scale(c)
    }

    fn zero(&self, j: &Interval) -> FormalDistribution {
        FormalDistribution::zero(j.clone())
    }

    fn glue(&self, j: &Interval, pieces: &[FormalDistribution]) -> Result<GlueOutcome<FormalDistribution>> {
        glue_formal(j, pieces)
    }

    fn section_to_json(&self, s: &FormalDistribution) -> Value {
        s.to_json()
    }

    fn section_from_json(&self, v: &Value) -> Result<FormalDistribution> {
        FormalDistribution::from_json(v)
    }
}

/// Gluing for formal distributions. All pieces are raised to a common
/// order; then, in turn:
/// 1. a piece whose box contains `j` is restricted;
/// 2. pieces whose representatives coincide on overlaps are patched cell by
///    cell;
/// 3. pieces forming a chain along one axis are patched sequentially, each
///    next representative shifted by the polynomial `P_m` difference on the
///    overlap.
///
/// Anything else is undecided.
pub fn glue_formal(j: &Interval, pieces: &[FormalDistribution]) -> Result<GlueOutcome<FormalDistribution>> {
    let n = j.dim();
    let pieces: Vec<&FormalDistribution> = pieces.iter().filter(|p| j.contains(p.domain())).collect();
    if pieces.is_empty() || !covers(j, &pieces.iter().map(|p| p.domain().clone()).collect::<Vec<_>>()) {
        return Ok(GlueOutcome::NotCovered);
    }
    if let Some(p) = pieces.iter().find(|p| p.domain() == j) {
        return Ok(GlueOutcome::Glued((*p).clone()));
    }
    let mut m = MultiIndex::zero(n);
    for p in &pieces {
        m = m.sup(p.order());
    }
    let raised: Vec<PiecewisePoly> = pieces.iter().map(|p| Ok(p.raise(&m)?.rep().clone())).collect::<Result<_>>()?;
    if let Some(rep) = patch_exact(j, &raised)? {
        return Ok(GlueOutcome::Glued(FormalDistribution::new(m, rep)?));
    }
    for axis in 0..n {
        if let Some(rep) = patch_chain(j, &raised, axis, &m)? {
            return Ok(GlueOutcome::Glued(FormalDistribution::new(m, rep)?));
        }
    }
    Ok(GlueOutcome::Undecided(format!("no patching along a chain found for {j}")))
}

/// Grid through every face of the boxes, clipped to `j`.
fn face_grid(j: &Interval, boxes: &[Interval]) -> Vec<Vec<Q>> {
    (0..j.dim())
        .map(|k| {
            let mut v: Vec<Q> = boxes
                .iter()
                .flat_map(|b| [b.lo(k), b.hi(k)])
                .filter(|x| *x > j.lo(k) && *x < j.hi(k))
                .collect();
            v.sort();
            v.dedup();
            v
        })
        .collect()
}

fn cell_midpoints(j: &Interval, breaks: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let mut out: Vec<Vec<Q>> = vec![Vec::new()];
    for (k, b) in breaks.iter().enumerate() {
        let mut pts = vec![j.lo(k)];
        pts.extend(b.iter().cloned());
        pts.push(j.hi(k));
        let mids: Vec<Q> = pts.windows(2).map(|w| (&w[0] + &w[1]) / q(2)).collect();
        out = out
            .into_iter()
            .flat_map(|p| {
                mids.iter().map(move |m| {
                    let mut p = p.clone();
                    p.push(m.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// Every cell of the face grid lies in some box. Open boxes also have to
/// overlap across each shared face, so a face point must be interior to a box.
fn covers(j: &Interval, boxes: &[Interval]) -> bool {
    let grid = face_grid(j, boxes);
    // refine with the midpoints between grid lines so that face points are probed too
    let probes: Vec<Vec<Q>> = (0..j.dim())
        .map(|k| {
            let mut pts = vec![j.lo(k)];
            pts.extend(grid[k].iter().cloned());
            pts.push(j.hi(k));
            let mut probe: Vec<Q> = pts.windows(2).map(|w| (&w[0] + &w[1]) / q(2)).collect();
            probe.extend(grid[k].iter().cloned());
            probe
        })
        .collect();
    let mut points: Vec<Vec<Q>> = vec![Vec::new()];
    for axis in &probes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |v| {
                    let mut p = p.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect();
    }
    points.iter().all(|x| boxes.iter().any(|b| b.contains_point(x)))
}

/// Cell-by-cell patching when the representatives coincide on overlaps.
fn patch_exact(j: &Interval, reps: &[PiecewisePoly]) -> Result<Option<PiecewisePoly>> {
    for (a, ra) in reps.iter().enumerate() {
        for rb in &reps[a + 1..] {
            if let Some(ov) = ra.domain().intersect(rb.domain()) {
                if !ra.restrict(&ov)?.sub(&rb.restrict(&ov)?)?.is_zero() {
                    return Ok(None);
                }
            }
        }
    }
    Ok(Some(assemble(j, reps)?))
}

/// The function on `j` equal to `reps[i]` on each cell of the common grid
/// that lies in `reps[i]`'s box (first match wins).
fn assemble(j: &Interval, reps: &[PiecewisePoly]) -> Result<PiecewisePoly> {
    let boxes: Vec<Interval> = reps.iter().map(|r| r.domain().clone()).collect();
    let mut breaks = face_grid(j, &boxes);
    for r in reps {
        for (k, b) in r.breaks().iter().enumerate() {
            breaks[k].extend(b.iter().cloned());
        }
    }
    for b in &mut breaks {
        b.sort();
        b.dedup();
    }
    let cells: Vec<Poly> = cell_midpoints(j, &breaks)
        .iter()
        .map(|mid| {
            let r = reps
                .iter()
                .find(|r| r.domain().contains_point(mid))
                .ok_or_else(|| GfError::EmptyRefinement(format!("cell around {mid:?} is uncovered")))?;
            Ok(r.cell_at(mid).clone())
        })
        .collect::<Result<_>>()?;
    Ok(PiecewisePoly::new(j.clone(), breaks, cells)?.simplify())
}

/// Sequential patching of a chain of boxes spanning `j` across every axis
/// other than `axis`.
fn patch_chain(j: &Interval, reps: &[PiecewisePoly], axis: usize, m: &MultiIndex) -> Result<Option<PiecewisePoly>> {
    let n = j.dim();
    let spans = |b: &Interval| (0..n).all(|k| k == axis || (b.lo(k) == j.lo(k) && b.hi(k) == j.hi(k)));
    let mut cand: Vec<&PiecewisePoly> = reps.iter().filter(|r| spans(r.domain())).collect();
    cand.sort_by_key(|a| a.domain().lo(axis));
    // greedy chain from the lower end
    let mut chain: Vec<PiecewisePoly> = Vec::new();
    let mut reach = j.lo(axis);
    while reach < j.hi(axis) {
        let next = cand
            .iter()
            .filter(|r| {
                let d = r.domain();
                if chain.is_empty() {
                    d.lo(axis) == reach
                } else {
                    d.lo(axis) < reach
                }
            })
            .max_by(|a, b| a.domain().hi(axis).cmp(&b.domain().hi(axis)));
        match next {
            Some(r) if r.domain().hi(axis) > reach => {
                reach = r.domain().hi(axis);
                chain.push((*r).clone());
            }
            _ => return Ok(None),
        }
    }
    // shift each member by the overlap difference, which must be a P_m polynomial
    for i in 1..chain.len() {
        let ov = match chain[i - 1].domain().intersect(chain[i].domain()) {
            Some(ov) => ov,
            None => return Ok(None),
        };
        let h = chain[i - 1].restrict(&ov)?.sub(&chain[i].restrict(&ov)?)?.simplify();
        if h.cells().len() != 1 || !p_m_member_monomial(&h.cells()[0], m) {
            return Ok(None);
        }
        let dom = chain[i].domain().clone();
        chain[i] = chain[i].add(&PiecewisePoly::polynomial(dom, h.cells()[0].clone()))?;
    }
    // switch from member i to member i+1 in the middle of their overlap
    let mut slabs = Vec::with_capacity(chain.len());
    let mut lo = j.lo(axis);
    for i in 0..chain.len() {
        let hi = if i + 1 < chain.len() {
            (chain[i + 1].domain().lo(axis) + chain[i].domain().hi(axis)) / q(2)
        } else {
            j.hi(axis)
        };
        let mut l = j.lows();
        let mut h = j.highs();
        l[axis] = lo.clone();
        h[axis] = hi.clone();
        slabs.push(chain[i].restrict(&Interval::from_bounds(l, h)?)?);
        lo = hi;
    }
    assemble(j, &slabs).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal::parse_distribution;
    use crate::rational::qr;

    fn iv(a: Q, b: Q) -> Interval {
        Interval::interval_1d(a, b).unwrap()
    }

    #[test]
    fn heaviside_pieces_glue() {
        let (i1, i2) = (iv(q(-1), qr(1, 2)), iv(qr(-1, 2), q(1)));
        let u = Interval::symmetric(1);
        let h = parse_distribution("((1),ramp)", &u).unwrap();
        let pieces = vec![h.restrict(&i1).unwrap(), h.restrict(&i2).unwrap()];
        match glue_formal(&u, &pieces).unwrap() {
            GlueOutcome::Glued(g) => assert!(g.equal(&h).unwrap()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn delta_pieces_glue_with_corrections() {
        let u = Interval::symmetric(1);
        let (i1, i2) = (iv(q(-1), qr(1, 2)), iv(qr(-1, 2), q(1)));
        // different representatives: ramp + (3x - 1) on the right piece
        let left = parse_distribution("((2),ramp)", &i1).unwrap();
        let right = parse_distribution("((2),ramp + 3*x - 1)", &i2).unwrap();
        match glue_formal(&u, &[left, right]).unwrap() {
            GlueOutcome::Glued(g) => {
                let phi = crate::formal::parse_piecewise("(1-x^2)^2", &u).unwrap();
                assert_eq!(g.pair(&phi).unwrap(), q(1));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn touching_pieces_do_not_cover() {
        let u = Interval::symmetric(1);
        let a = FormalDistribution::zero(iv(q(-1), q(0)));
        let b = FormalDistribution::zero(iv(q(0), q(1)));
        assert!(matches!(glue_formal(&u, &[a, b]).unwrap(), GlueOutcome::NotCovered));
    }

    #[test]
    fn two_dimensional_patching() {
        let u = Interval::symmetric(2);
        let t = parse_distribution("((1,1),ramp(x)*ramp(y) + x*y^2)", &u).unwrap();
        let quads = [
            Interval::from_bounds(vec![q(-1), q(-1)], vec![qr(1, 2), qr(1, 2)]).unwrap(),
            Interval::from_bounds(vec![qr(-1, 2), q(-1)], vec![q(1), qr(1, 2)]).unwrap(),
            Interval::from_bounds(vec![q(-1), qr(-1, 2)], vec![qr(1, 2), q(1)]).unwrap(),
            Interval::from_bounds(vec![qr(-1, 2), qr(-1, 2)], vec![q(1), q(1)]).unwrap(),
        ];
        let pieces: Vec<FormalDistribution> = quads.iter().map(|b| t.restrict(b).unwrap()).collect();
        match glue_formal(&u, &pieces).unwrap() {
            GlueOutcome::Glued(g) => assert!(g.equal(&t).unwrap()),
            other => panic!("{other:?}"),
        }
        // strips along x_1 with shifted representatives
        let strips = [
            Interval::from_bounds(vec![q(-1), q(-1)], vec![qr(1, 4), q(1)]).unwrap(),
            Interval::from_bounds(vec![qr(-1, 4), q(-1)], vec![q(1), q(1)]).unwrap(),
        ];
        let shifted = parse_distribution("((1,1),ramp(x)*ramp(y) + x*y^2 + 5*y^3)", &strips[1]).unwrap();
        let pieces = vec![t.restrict(&strips[0]).unwrap(), shifted];
        assert!(matches!(glue_formal(&u, &pieces).unwrap(), GlueOutcome::Glued(_)));
    }
}
