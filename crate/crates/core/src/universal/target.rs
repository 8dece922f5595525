//! Solution triples `(H, j, delta)` seen through a narrow contract, the
//! shipped targets, the enumeration of sections, and the condition suite.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::report::{Condition, Report};
use crate::colombeau::{colombeau_class_equal, embed_distribution, gsf_derive, DomainPiece, GSFunction, Verdict};
use crate::error::{GfError, Result};
use crate::formal::{FormalDistribution, Interval, MultiIndex, PiecewisePoly};
use crate::gauge::Gauge;
use crate::poly::Poly;
use crate::rational::{parse_q, q, qr, Q};
use crate::sample::{rand_piecewise_1d, rand_poly};
use crate::sheaf::BaseIndex;

/// A target of the universal problem. The checker only uses these
/// operations and never inspects how sections are represented.
pub trait SolutionTarget: Sync {
    type Section: Clone + fmt::Debug;

    fn name(&self) -> String;

    /// `j_U(f)` on the domain of `f`.
    fn j(&self, f: &PiecewisePoly) -> Result<Self::Section>;

    fn delta(&self, k: usize, s: &Self::Section) -> Result<Self::Section>;

    fn restrict(&self, s: &Self::Section, v: &Interval) -> Result<Self::Section>;

    fn equal(&self, a: &Self::Section, b: &Self::Section) -> Result<bool>;

    fn describe(&self, s: &Self::Section) -> String;

    /// The image of `T` the unique morphism is known to produce, when the
    /// target ships one.
    fn expected(&self, _t: &FormalDistribution) -> Option<Result<Self::Section>> {
        None
    }
}

/// `delta^alpha s`, applying the axes in ascending or descending order.
pub fn delta_multi<T: SolutionTarget>(t: &T, alpha: &MultiIndex, s: &T::Section, descending: bool) -> Result<T::Section> {
    let mut axes: Vec<usize> = (0..alpha.dim()).collect();
    if descending {
        axes.reverse();
    }
    let mut out = s.clone();
    for k in axes {
        for _ in 0..alpha.0[k] {
            out = t.delta(k, &out)?;
        }
    }
    Ok(out)
}

/// Formal distributions themselves: `j = lambda`, `delta = D`.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityTarget;

impl SolutionTarget for IdentityTarget {
    type Section = FormalDistribution;

    fn name(&self) -> String {
        "formal distributions".into()
    }

    fn j(&self, f: &PiecewisePoly) -> Result<FormalDistribution> {
        Ok(FormalDistribution::lambda(f.clone()))
    }

    fn delta(&self, k: usize, s: &FormalDistribution) -> Result<FormalDistribution> {
        Ok(s.derive(k))
    }

    fn restrict(&self, s: &FormalDistribution, v: &Interval) -> Result<FormalDistribution> {
        s.restrict(v)
    }

    fn equal(&self, a: &FormalDistribution, b: &FormalDistribution) -> Result<bool> {
        a.equal(b)
    }

    fn describe(&self, s: &FormalDistribution) -> String {
        s.to_string()
    }

    fn expected(&self, t: &FormalDistribution) -> Option<Result<FormalDistribution>> {
        Some(Ok(t.clone()))
    }
}

/// `D^order rep` stored under the label `order + shift`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftedSection {
    pub label: MultiIndex,
    pub rep: PiecewisePoly,
}

/// A relabeled copy of formal distributions.
#[derive(Clone, Copy, Debug)]
pub struct ShiftedTarget {
    pub shift: u32,
}

impl ShiftedTarget {
    pub fn relabel(&self, t: &FormalDistribution) -> ShiftedSection {
        let s = MultiIndex(vec![self.shift; t.dim()]);
        ShiftedSection { label: t.order().add(&s), rep: t.rep().clone() }
    }

    pub fn decode(&self, s: &ShiftedSection) -> Result<FormalDistribution> {
        let shift = MultiIndex(vec![self.shift; s.rep.dim()]);
        FormalDistribution::new(s.label.checked_sub(&shift)?, s.rep.clone())
    }
}

impl SolutionTarget for ShiftedTarget {
    type Section = ShiftedSection;

    fn name(&self) -> String {
        format!("formal distributions relabeled by +{}", self.shift)
    }

    fn j(&self, f: &PiecewisePoly) -> Result<ShiftedSection> {
        Ok(ShiftedSection { label: MultiIndex(vec![self.shift; f.dim()]), rep: f.clone() })
    }

    fn delta(&self, k: usize, s: &ShiftedSection) -> Result<ShiftedSection> {
        Ok(ShiftedSection { label: s.label.add(&MultiIndex::unit(s.rep.dim(), k)), rep: s.rep.clone() })
    }

    fn restrict(&self, s: &ShiftedSection, v: &Interval) -> Result<ShiftedSection> {
        Ok(ShiftedSection { label: s.label.clone(), rep: s.rep.restrict(v)? })
    }

    fn equal(&self, a: &ShiftedSection, b: &ShiftedSection) -> Result<bool> {
        self.decode(a)?.equal(&self.decode(b)?)
    }

    fn describe(&self, s: &ShiftedSection) -> String {
        format!("<{}|{}>", s.label, s.rep)
    }

    fn expected(&self, t: &FormalDistribution) -> Option<Result<ShiftedSection>> {
        Some(Ok(self.relabel(t)))
    }
}

/// Colombeau classes of regularizations: `j = embed . lambda`, `delta` the
/// derivative of nets. Equality is class equality sampled on the inner half
/// of the box at the scales `eps`.
#[derive(Clone, Debug)]
pub struct ColombeauTarget {
    pub p: u32,
    pub gauge: Gauge,
    pub eps: Vec<Q>,
    pub points: usize,
}

impl Default for ColombeauTarget {
    fn default() -> Self {
        ColombeauTarget {
            p: 8,
            gauge: Gauge::default(),
            eps: ["1/100", "1/1000", "1/10000"].iter().map(|s| parse_q(s).expect("literal")).collect(),
            points: 5,
        }
    }
}

impl ColombeauTarget {
    fn inner_points(&self, b: &Interval) -> Vec<Q> {
        let (lo, hi) = (b.lo(0), b.hi(0));
        let w = &hi - &lo;
        let a = &lo + &w / q(4);
        let step = (&w / q(2)) / q(self.points.max(2) as i64 - 1);
        (0..self.points.max(2)).map(|i| &a + &step * q(i as i64)).collect()
    }
}

impl SolutionTarget for ColombeauTarget {
    type Section = GSFunction;

    fn name(&self) -> String {
        format!("Colombeau regularizations (bump p = {})", self.p)
    }

    fn j(&self, f: &PiecewisePoly) -> Result<GSFunction> {
        embed_distribution(&FormalDistribution::lambda(f.clone()), self.p, self.gauge.clone())
    }

    fn delta(&self, k: usize, s: &GSFunction) -> Result<GSFunction> {
        gsf_derive(s, &MultiIndex::unit(s.dim(), k))
    }

    fn restrict(&self, s: &GSFunction, v: &Interval) -> Result<GSFunction> {
        let b = s.standard_box().ok_or_else(|| GfError::Undetermined("no standard box".into()))?;
        if !b.contains(v) {
            return Err(GfError::DomainMismatch(format!("{v} is not inside {b}")));
        }
        GSFunction::new(s.net.clone(), vec![DomainPiece::Interior(v.clone())], s.gauge.clone())
    }

    fn equal(&self, a: &GSFunction, b: &GSFunction) -> Result<bool> {
        let (ba, bb) = (a.standard_box(), b.standard_box());
        if ba != bb {
            return Ok(false);
        }
        let k = ba.ok_or_else(|| GfError::Undetermined("no standard box".into()))?;
        if k.dim() == 1 {
            let xs = self.inner_points(&k);
            let mut exact = true;
            'scales: for e in &self.eps {
                let Some(rho) = self.gauge.rho_q(e) else {
                    exact = false;
                    break;
                };
                for x in &xs {
                    let pt = std::slice::from_ref(x);
                    match (a.net.expr.eval_q(pt, &rho), b.net.expr.eval_q(pt, &rho)) {
                        (Some(u), Some(v)) if u != v => return Ok(false),
                        (Some(_), Some(_)) => {}
                        _ => {
                            exact = false;
                            break 'scales;
                        }
                    }
                }
            }
            if exact {
                return Ok(true);
            }
        }
        let inner = Interval::from_bounds(
            (0..k.dim()).map(|i| (k.lo(i) * q(3) + k.hi(i)) / q(4)).collect(),
            (0..k.dim()).map(|i| (k.lo(i) + k.hi(i) * q(3)) / q(4)).collect(),
        )?;
        Ok(colombeau_class_equal(a, b, &inner, 0)? == Verdict::Yes)
    }

    fn describe(&self, s: &GSFunction) -> String {
        s.to_string()
    }

    fn expected(&self, t: &FormalDistribution) -> Option<Result<GSFunction>> {
        Some(embed_distribution(t, self.p, self.gauge.clone()))
    }
}

/// Bounds of the enumeration standing in for "all sections".
#[derive(Clone, Copy, Debug)]
pub struct EnumConfig {
    pub level: u32,
    pub alpha_cap: u32,
    pub d_cap: u32,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig { level: 4, alpha_cap: 4, d_cap: 5 }
    }
}

/// Base intervals of `(-1, 1)` at widths `2^{1-s}` for `s` in
/// `{0, 1, 2, level}`, centered and left-aligned.
pub fn enumerated_intervals(level: u32) -> Vec<Interval> {
    let base = BaseIndex::standard(1, level);
    let mut widths = vec![0u32, 1, 2, level];
    widths.retain(|s| *s <= level);
    widths.sort();
    widths.dedup();
    let mut out: Vec<Interval> = Vec::new();
    for s in widths {
        let w = qr(2, 1i64 << s);
        for iv in [
            Interval::interval_1d(-&w / q(2), &w / q(2)),
            Interval::interval_1d(q(-1), q(-1) + &w),
        ] {
            let iv = iv.expect("positive width");
            if base.is_base(&iv) && !out.contains(&iv) {
                out.push(iv);
            }
        }
    }
    out
}

/// `x^d + (x - c)_+` on `j`, with the kink a third of the way in.
pub fn enumerated_rep(j: &Interval, d: u32) -> PiecewisePoly {
    let c = j.lo(0) + (j.hi(0) - j.lo(0)) / q(3);
    let kink = PiecewisePoly::ramp_affine(j.clone(), 0, q(1), -c).expect("affine ramp");
    kink.add(&PiecewisePoly::polynomial(j.clone(), Poly::var(1, 0).pow(d))).expect("same domain")
}

/// Every `D^alpha f` over the enumerated intervals with `alpha <= alpha_cap`
/// and `f` of degree at most `d_cap`.
pub fn enumerate_sections(cfg: &EnumConfig) -> Vec<FormalDistribution> {
    let mut out = Vec::new();
    for j in enumerated_intervals(cfg.level) {
        for a in 0..=cfg.alpha_cap {
            for d in 0..=cfg.d_cap {
                out.push(FormalDistribution::new(MultiIndex(vec![a]), enumerated_rep(&j, d)).expect("1-D"));
            }
        }
    }
    out
}

/// Two overlapping halves of a 1-D box.
pub fn halves(j: &Interval) -> (Interval, Interval) {
    let (a, b) = (j.lo(0), j.hi(0));
    let w = &b - &a;
    let i1 = Interval::interval_1d(a.clone(), &a + &w * qr(3, 4)).expect("positive width");
    let i2 = Interval::interval_1d(&a + &w / q(4), b).expect("positive width");
    (i1, i2)
}

/// Image of `D^alpha f` by the local formula `delta^alpha(j(f))`.
pub fn local_image<T: SolutionTarget>(t: &T, s: &FormalDistribution) -> Result<T::Section> {
    delta_multi(t, s.order(), &t.j(s.rep())?, false)
}

/// The condition suite for a target on the enumeration, with seeded
/// samples for the `C^1` and `P_m` conditions.
pub fn check_target<T: SolutionTarget>(t: &T, cfg: &EnumConfig, seed: u64) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sections = enumerate_sections(cfg);
    let intervals = enumerated_intervals(cfg.level);

    let mut sheaf = Condition::new("1 sheaf laws");
    for (i, s) in sections.iter().enumerate() {
        let img = local_image(t, s)?;
        let (i1, i2) = halves(s.domain());
        let k = i1.intersect(&i2).expect("halves overlap");
        let functorial = t.equal(&t.restrict(&t.restrict(&img, &i1)?, &k)?, &t.restrict(&img, &k)?)?;
        sheaf.record(functorial, || format!("restriction is not functorial for {}", t.describe(&img)));
        // locality against the next section on the same box
        if let Some(o) = sections.get(i + 1).filter(|o| o.domain() == s.domain()) {
            let other = local_image(t, o)?;
            let mut agree = true;
            for v in [&i1, &i2] {
                agree &= t.equal(&t.restrict(&img, v)?, &t.restrict(&other, v)?)?;
            }
            let ok = !agree || t.equal(&img, &other)?;
            sheaf.record(ok, || format!("{} and {} agree locally only", t.describe(&img), t.describe(&other)));
        }
    }

    let mut natural = Condition::new("2 naturality of j");
    for s in sections.iter().filter(|s| s.order().total() == 0) {
        let (i1, _) = halves(s.domain());
        let lhs = t.restrict(&t.j(s.rep())?, &i1)?;
        let rhs = t.j(&s.rep().restrict(&i1)?)?;
        natural.record(t.equal(&lhs, &rhs)?, || format!("j does not commute with restriction to {i1} for {s}"));
    }

    let mut compat = Condition::new("3 delta_k j = j d_k on C^1_k");
    for j in &intervals {
        for _ in 0..3 {
            let f = rand_piecewise_1d(&mut rng, j, 3, cfg.d_cap.max(2), 1);
            let lhs = t.delta(0, &t.j(&f)?)?;
            let rhs = t.j(&f.partial(0)?)?;
            compat.record(t.equal(&lhs, &rhs)?, || format!("delta j f differs from j f' for f = {f}"));
        }
    }

    let mut annihilate = Condition::new("4 P_m annihilation");
    for j in &intervals {
        for m in 1..=cfg.alpha_cap {
            let deg = rng.gen_range(0..m);
            let p = rand_poly(&mut rng, 1, deg);
            let f = PiecewisePoly::polynomial(j.clone(), p);
            let lhs = delta_multi(t, &MultiIndex(vec![m]), &t.j(&f)?, false)?;
            let rhs = t.j(&PiecewisePoly::zero(j.clone()))?;
            annihilate.record(t.equal(&lhs, &rhs)?, || format!("delta^{m} j({f}) is not zero"));
        }
    }

    let mut commute = Condition::new("5 delta_h delta_k = delta_k delta_h");
    for s in sections.iter().filter(|s| s.order().total() <= 1) {
        let img = local_image(t, s)?;
        let n = s.dim();
        for h in 0..n {
            for k in 0..n {
                let a = t.delta(h, &t.delta(k, &img)?)?;
                let b = t.delta(k, &t.delta(h, &img)?)?;
                commute.record(t.equal(&a, &b)?, || format!("axes {h}, {k} do not commute on {}", t.describe(&img)));
            }
        }
    }

    Ok(Report::new("target conditions", t.name(), vec![sheaf, natural, compat, annihilate, commute]))
}
