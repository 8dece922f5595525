//! Compatible families, their maximal completion, and the module
//! operations on completed families (sections of the sheafification).

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde_json::{json, Value};

use super::base::BaseIndex;
use super::presheaf::{GlueOutcome, Presheaf};
use crate::error::{GfError, Result};
use crate::formal::Interval;
use crate::rational::Q;

/// Sections `f_I` on the members of a finite cover by base intervals.
#[derive(Clone, Debug)]
pub struct CompatibleFamily<S> {
    pub members: Vec<(Interval, S)>,
}

impl<S: Clone> CompatibleFamily<S> {
    pub fn new(members: Vec<(Interval, S)>) -> Self {
        CompatibleFamily { members }
    }

    pub fn cover(&self) -> Vec<Interval> {
        self.members.iter().map(|(i, _)| i.clone()).collect()
    }
}

impl<S> CompatibleFamily<S> {
    /// Pairwise agreement on every nonempty overlap.
    pub fn check<P: Presheaf<Section = S>>(&self, p: &P) -> Result<()> {
        for (a, (ia, fa)) in self.members.iter().enumerate() {
            for (ib, fb) in &self.members[a + 1..] {
                if let Some(k) = ia.intersect(ib) {
                    if !p.equal(&p.restrict(fa, &k)?, &p.restrict(fb, &k)?)? {
                        return Err(GfError::Incompatible(format!("members on {ia} and {ib} differ on {k}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json<P: Presheaf<Section = S>>(&self, p: &P) -> Value {
        json!({
            "cover": self.members.iter().map(|(i, _)| i.to_json()).collect::<Vec<_>>(),
            "sections": self.members.iter().map(|(_, s)| p.section_to_json(s)).collect::<Vec<_>>(),
        })
    }

    pub fn from_json<P: Presheaf<Section = S>>(p: &P, v: &Value) -> Result<Self> {
        let arr = |key: &str| {
            v.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| GfError::Parse(format!("family: missing array {key:?}")))
        };
        let (cover, sections) = (arr("cover")?, arr("sections")?);
        if cover.len() != sections.len() {
            return Err(GfError::Parse("family: cover and sections differ in length".into()));
        }
        let mut members = Vec::with_capacity(cover.len());
        for (c, s) in cover.iter().zip(sections) {
            let i = Interval::from_json(c)?;
            let s = p.section_from_json(s)?;
            if p.domain(&s) != i {
                return Err(GfError::DomainMismatch(format!("section on {} listed for {i}", p.domain(&s))));
            }
            members.push((i, s));
        }
        Ok(CompatibleFamily { members })
    }
}

/// Whether a base interval received a section in the completion.
#[derive(Clone, Debug)]
pub enum Status<S> {
    Decided(S),
    NotCovered,
    Undecided(String),
}

/// The completion of a compatible family: the generators plus, for every
/// base interval `J`, the section locally equal to them when one is
/// constructible. Completion is computed on demand and memoized.
#[derive(Clone)]
pub struct MaximalFamily<P: Presheaf> {
    presheaf: P,
    base: BaseIndex,
    generators: CompatibleFamily<P::Section>,
    cache: Arc<Mutex<HashMap<Interval, Status<P::Section>>>>,
}

impl<P: Presheaf> std::fmt::Debug for MaximalFamily<P> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "max[{}]", self.generators.cover().iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))
    }
}

/// Validates the family and wraps it as a maximal family.
pub fn maximalize<P: Presheaf>(p: &P, base: &BaseIndex, fam: CompatibleFamily<P::Section>) -> Result<MaximalFamily<P>> {
    if fam.members.is_empty() {
        return Err(GfError::EmptyRefinement("a family needs at least one member".into()));
    }
    for (i, s) in &fam.members {
        base.check(i)?;
        if &p.domain(s) != i {
            return Err(GfError::DomainMismatch(format!("section on {} listed for {i}", p.domain(s))));
        }
    }
    fam.check(p)?;
    Ok(MaximalFamily { presheaf: p.clone(), base: base.clone(), generators: fam, cache: Arc::new(Mutex::new(HashMap::new())) })
}

/// `S` on `J` agrees with every member on the overlap. Overlaps of base
/// intervals are base intervals, so testing there covers every smaller `K`.
pub fn locally_equal<P: Presheaf>(p: &P, s: &P::Section, fam: &CompatibleFamily<P::Section>) -> Result<bool> {
    let j = p.domain(s);
    for (i, f) in &fam.members {
        if let Some(k) = i.intersect(&j) {
            if !p.equal(&p.restrict(s, &k)?, &p.restrict(f, &k)?)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `max[(T|_J)_{J ⊆ I}]`.
pub fn eta_embed<P: Presheaf>(p: &P, base: &BaseIndex, t: P::Section) -> Result<MaximalFamily<P>> {
    let i = p.domain(&t);
    maximalize(p, base, CompatibleFamily::new(vec![(i, t)]))
}

impl<P: Presheaf> MaximalFamily<P> {
    pub fn presheaf(&self) -> &P {
        &self.presheaf
    }

    pub fn base(&self) -> &BaseIndex {
        &self.base
    }

    pub fn generators(&self) -> &CompatibleFamily<P::Section> {
        &self.generators
    }

    /// Smallest box containing every generator.
    pub fn hull(&self) -> Interval {
        let cover = self.generators.cover();
        let n = cover[0].dim();
        let lo = (0..n).map(|k| cover.iter().map(|i| i.lo(k)).min().expect("nonempty cover")).collect();
        let hi = (0..n).map(|k| cover.iter().map(|i| i.hi(k)).max().expect("nonempty cover")).collect();
        Interval::from_bounds(lo, hi).expect("hull of boxes")
    }

    pub fn status(&self, j: &Interval) -> Result<Status<P::Section>> {
        self.base.check(j)?;
        if let Some(s) = self.cache.lock().expect("completion lock").get(j) {
            return Ok(s.clone());
        }
        let mut pieces = Vec::new();
        for (i, f) in &self.generators.members {
            if let Some(k) = i.intersect(j) {
                pieces.push(self.presheaf.restrict(f, &k)?);
            }
        }
        let status = match self.presheaf.glue(j, &pieces)? {
            GlueOutcome::Glued(s) => Status::Decided(s),
            GlueOutcome::NotCovered => Status::NotCovered,
            GlueOutcome::Undecided(why) => Status::Undecided(why),
        };
        self.cache.lock().expect("completion lock").insert(j.clone(), status.clone());
        Ok(status)
    }

    /// The section on `J`, when `J` is covered and the construction decides it.
    pub fn section(&self, j: &Interval) -> Result<Option<P::Section>> {
        Ok(match self.status(j)? {
            Status::Decided(s) => Some(s),
            _ => None,
        })
    }

    /// Every decided `(J, section)` over base intervals inside the hull.
    pub fn decided(&self) -> Result<Vec<(Interval, P::Section)>> {
        let mut out = Vec::new();
        for j in self.base.within(&self.hull()) {
            if let Status::Decided(s) = self.status(&j)? {
                out.push((j, s));
            }
        }
        Ok(out)
    }

    /// Base intervals left undecided inside the hull.
    pub fn undecided(&self) -> Result<Vec<Interval>> {
        let mut out = Vec::new();
        for j in self.base.within(&self.hull()) {
            if let Status::Undecided(_) = self.status(&j)? {
                out.push(j);
            }
        }
        Ok(out)
    }

    /// Maximal families are equal when each contains the other's generators.
    pub fn equal(&self, other: &MaximalFamily<P>) -> Result<bool> {
        for (a, b) in [(self, other), (other, self)] {
            for (i, f) in &a.generators.members {
                match b.section(i)? {
                    Some(g) if self.presheaf.equal(f, &g)? => {}
                    _ => return Ok(false),
                }
            }
        }
        Ok(true)
    }

    /// Applies a morphism of presheaves member-wise.
    pub fn map(&self, f: impl Fn(&P::Section) -> Result<P::Section>) -> Result<MaximalFamily<P>> {
        let members = self.generators.members.iter().map(|(i, s)| Ok((i.clone(), f(s)?))).collect::<Result<_>>()?;
        maximalize(&self.presheaf, &self.base, CompatibleFamily::new(members))
    }

    pub fn scale(&self, c: &Q) -> Result<MaximalFamily<P>> {
        self.map(|s| Ok(self.presheaf.scale(s, c)))
    }

    /// Sum over the intersection cover `B ∩ C`.
    pub fn add(&self, other: &MaximalFamily<P>) -> Result<MaximalFamily<P>> {
        let mut members = Vec::new();
        for (b, x) in &self.generators.members {
            for (c, y) in &other.generators.members {
                if let Some(k) = b.intersect(c) {
                    let s = self.presheaf.add(&self.presheaf.restrict(x, &k)?, &self.presheaf.restrict(y, &k)?)?;
                    members.push((k, s));
                }
            }
        }
        if members.is_empty() {
            return Err(GfError::EmptyRefinement("the two covers have no overlapping members".into()));
        }
        maximalize(&self.presheaf, &self.base, CompatibleFamily::new(members))
    }

    /// Restriction to `V`, a union of base intervals, each of which must be
    /// decided in this family.
    pub fn restrict(&self, v: &[Interval]) -> Result<MaximalFamily<P>> {
        let mut members = Vec::with_capacity(v.len());
        for j in v {
            match self.status(j)? {
                Status::Decided(s) => members.push((j.clone(), s)),
                Status::NotCovered => return Err(GfError::DomainMismatch(format!("{j} is not inside the family's open set"))),
                Status::Undecided(why) => return Err(GfError::Undetermined(why)),
            }
        }
        maximalize(&self.presheaf, &self.base, CompatibleFamily::new(members))
    }

    pub fn to_json(&self) -> Value {
        self.generators.to_json(&self.presheaf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal::{parse_distribution, FormalDistribution};
    use crate::rational::{q, qr};
    use crate::sheaf::presheaf::FdPresheaf;

    fn iv(a: Q, b: Q) -> Interval {
        Interval::interval_1d(a, b).unwrap()
    }

    fn base() -> BaseIndex {
        BaseIndex::standard(1, 3)
    }

    #[test]
    fn heaviside_locally_equals_its_pieces() {
        let u = Interval::symmetric(1);
        let h = parse_distribution("((1),ramp)", &u).unwrap();
        let fam = CompatibleFamily::new(vec![
            (iv(q(-1), q(0)), FormalDistribution::zero(iv(q(-1), q(0)))),
            (iv(q(0), q(1)), parse_distribution("1", &iv(q(0), q(1))).unwrap()),
        ]);
        assert!(locally_equal(&FdPresheaf, &h, &fam).unwrap());
        let shifted = h.add(&parse_distribution("1", &u).unwrap()).unwrap();
        assert!(!locally_equal(&FdPresheaf, &shifted, &fam).unwrap());
        // the touching cover leaves 0 uncovered
        let m = maximalize(&FdPresheaf, &base(), fam).unwrap();
        assert!(m.section(&u).unwrap().is_none());
    }

    #[test]
    fn glued_heaviside_and_delta() {
        let u = Interval::symmetric(1);
        let (i1, i2) = (iv(q(-1), qr(1, 2)), iv(qr(-1, 2), q(1)));
        for src in ["((1),ramp)", "((2),ramp)"] {
            let t = parse_distribution(src, &u).unwrap();
            let fam = CompatibleFamily::new(vec![(i1.clone(), t.restrict(&i1).unwrap()), (i2.clone(), t.restrict(&i2).unwrap())]);
            let m = maximalize(&FdPresheaf, &base(), fam.clone()).unwrap();
            let g = m.section(&u).unwrap().unwrap();
            assert!(g.equal(&t).unwrap());
            assert!(locally_equal(&FdPresheaf, &g, &fam).unwrap());
        }
    }

    #[test]
    fn incompatible_family_is_rejected() {
        let (i1, i2) = (iv(q(-1), qr(1, 2)), iv(qr(-1, 2), q(1)));
        let fam = CompatibleFamily::new(vec![
            (i1.clone(), FormalDistribution::zero(i1)),
            (i2.clone(), parse_distribution("x", &i2).unwrap()),
        ]);
        assert!(matches!(maximalize(&FdPresheaf, &base(), fam), Err(GfError::Incompatible(_))));
    }

    #[test]
    fn sum_and_restriction() {
        let u = Interval::symmetric(1);
        let b = base();
        let d = eta_embed(&FdPresheaf, &b, parse_distribution("((2),ramp)", &u).unwrap()).unwrap();
        let h = eta_embed(&FdPresheaf, &b, parse_distribution("((1),ramp)", &u).unwrap()).unwrap();
        let s = d.add(&h).unwrap();
        let v = iv(qr(1, 4), q(1));
        let r = s.restrict(std::slice::from_ref(&v)).unwrap();
        let one = eta_embed(&FdPresheaf, &b, parse_distribution("1", &v).unwrap()).unwrap();
        assert!(r.equal(&one).unwrap());
        let zero = eta_embed(&FdPresheaf, &b, FormalDistribution::zero(u.clone())).unwrap();
        assert!(d.add(&zero).unwrap().equal(&d).unwrap());
        assert!(d.restrict(std::slice::from_ref(&u)).unwrap().equal(&d).unwrap());
        assert!(d.decided().unwrap().len() == b.within(&u).len());
    }

    #[test]
    fn json_round_trip() {
        let u = Interval::symmetric(1);
        let (i1, i2) = (iv(q(-1), qr(1, 2)), iv(qr(-1, 2), q(1)));
        let t = parse_distribution("((2),ramp)", &u).unwrap();
        let fam = CompatibleFamily::new(vec![(i1.clone(), t.restrict(&i1).unwrap()), (i2.clone(), t.restrict(&i2).unwrap())]);
        let v = fam.to_json(&FdPresheaf);
        let back = CompatibleFamily::from_json(&FdPresheaf, &v).unwrap();
        assert_eq!(back.members, fam.members);
    }
}
