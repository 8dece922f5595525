//! Randomized checks of locality, gluing, and their compatibility with
//! restriction and with presheaf morphisms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use super::base::BaseIndex;
use super::family::{eta_embed, locally_equal, maximalize, CompatibleFamily};
use super::presheaf::FdPresheaf;
use crate::error::Result;
use crate::formal::{FormalDistribution, Interval, PiecewisePoly};
use crate::poly::Poly;
use crate::sample::{rand_distribution, rand_q_nonzero, rerepresent};

#[derive(Clone, Debug, Serialize)]
pub struct LawCheck {
    pub name: String,
    pub cases: usize,
    pub counterexamples: Vec<String>,
    pub pass: bool,
}

impl LawCheck {
    fn new(name: &str) -> Self {
        LawCheck { name: name.into(), cases: 0, counterexamples: Vec::new(), pass: true }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.pass = false;
            self.counterexamples.push(what());
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LawsReport {
    pub seed: u64,
    pub level: u32,
    pub laws: Vec<LawCheck>,
    pub pass: bool,
    pub note: String,
}

impl LawsReport {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).unwrap_or(Value::Null)
    }

    pub fn law(&self, name: &str) -> Option<&LawCheck> {
        self.laws.iter().find(|l| l.name == name)
    }
}

fn describe(cover: &[Interval], t: &FormalDistribution) -> String {
    format!("cover [{}], section {t}", cover.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))
}

/// A section differing from `t` only near a random point, or the same
/// class under a new representative.
fn variant(rng: &mut ChaCha8Rng, base: &BaseIndex, t: &FormalDistribution) -> Result<FormalDistribution> {
    if rng.gen_bool(0.5) {
        return Ok(rerepresent(rng, t, 2));
    }
    let u = t.domain();
    let Some(v) = base.random_within(rng, u, 1) else { return Ok(t.clone()) };
    // the hat function on v, zero outside
    let (a, b) = (v.lo(0), v.hi(0));
    let mid = (&a + &b) / crate::rational::q(2);
    let x = Poly::var(1, 0);
    let up = &x - &Poly::constant(1, a.clone());
    let down = &Poly::constant(1, b.clone()) - &x;
    let mut breaks = Vec::new();
    let mut pieces = Vec::new();
    if a > u.lo(0) {
        breaks.push(a.clone());
        pieces.push(Poly::zero(1));
    }
    pieces.push(up);
    breaks.push(mid);
    pieces.push(down);
    if b < u.hi(0) {
        breaks.push(b.clone());
        pieces.push(Poly::zero(1));
    }
    let hat = PiecewisePoly::from_pieces(u.clone(), breaks, pieces)?.scale(&rand_q_nonzero(rng));
    let bump = FormalDistribution::new(t.order().clone(), hat)?;
    t.add(&bump)
}

/// Runs `cases` random instances of each law on 1-D sections over
/// `(-1, 1)` with base level `level`.
pub fn sheaf_laws_check(seed: u64, cases: usize, level: u32) -> Result<LawsReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = BaseIndex::standard(1, level);
    let u = base.region().clone();
    let p = FdPresheaf;
    let mut locality = LawCheck::new("locality");
    let mut gluing = LawCheck::new("gluing");
    let mut glue_fam = LawCheck::new("glueFam");
    let mut morph_glue = LawCheck::new("morphGlue");
    for _ in 0..cases {
        let t = rand_distribution(&mut rng, &u, 3);
        let cover = base.random_chain_cover(&mut rng, &u);

        let s = variant(&mut rng, &base, &t)?;
        let mut agree = true;
        for i in &cover {
            agree &= t.restrict(i)?.equal(&s.restrict(i)?)?;
        }
        let equal = t.equal(&s)?;
        locality.record(!agree || equal, || format!("{} vs {s}", describe(&cover, &t)));

        let members: Vec<(Interval, FormalDistribution)> =
            cover.iter().map(|i| Ok((i.clone(), rerepresent(&mut rng, &t.restrict(i)?, 1)))).collect::<Result<_>>()?;
        let fam = CompatibleFamily::new(members);
        let m = maximalize(&p, &base, fam.clone())?;
        let glued = m.section(&u)?;
        let ok = match &glued {
            Some(g) => g.equal(&t)? && locally_equal(&p, g, &fam)?,
            None => false,
        };
        gluing.record(ok, || describe(&cover, &t));

        let v = base.random_within(&mut rng, &u, 1).expect("the region holds a base interval");
        let ok = match &glued {
            Some(g) => {
                let restricted = m.restrict(std::slice::from_ref(&v))?;
                let direct = eta_embed(&p, &base, g.restrict(&v)?)?;
                restricted.equal(&direct)?
            }
            None => false,
        };
        glue_fam.record(ok, || format!("{} restricted to {v}", describe(&cover, &t)));

        let c = rand_q_nonzero(&mut rng);
        let ok = match &glued {
            Some(g) => {
                let derived = m.map(|x| Ok(x.derive(0)))?;
                let scaled = m.scale(&c)?;
                derived.equal(&eta_embed(&p, &base, g.derive(0))?)? && scaled.equal(&eta_embed(&p, &base, g.scale(&c))?)?
            }
            None => false,
        };
        morph_glue.record(ok, || format!("{} under derivative and scaling by {c}", describe(&cover, &t)));
    }
    let laws = vec![locality, gluing, glue_fam, morph_glue];
    let pass = laws.iter().all(|l| l.pass);
    Ok(LawsReport {
        seed,
        level,
        laws,
        pass,
        note: "falsification harness: random instances can refute a law, never prove it".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laws_hold_on_a_small_run() {
        let r = sheaf_laws_check(11, 20, 4).unwrap();
        for l in &r.laws {
            assert!(l.pass, "{}: {:?}", l.name, l.counterexamples);
            assert_eq!(l.cases, 20);
        }
    }
}
