//! The morphism `psi` from formal distributions into a solution target,
//! built on enumerated sections, and instance-level uniqueness.

use serde_json::{json, Value};

use super::report::{Condition, Report, FALSIFICATION_NOTE};
use super::target::{check_target, delta_multi, enumerate_sections, halves, local_image, EnumConfig, SolutionTarget};
use crate::error::{GfError, Result};
use crate::formal::{FormalDistribution, MultiIndex};

/// How a witness computes the image of `D^alpha f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsiRoute {
    /// `delta^alpha(j(f))`, axes ascending.
    Local,
    /// `delta^{alpha + 1}(j(J f))` from the representative raised by one on
    /// every axis, axes descending.
    Raised,
    /// `delta^{sigma(alpha)}(j(f))` with the order cycled modulo
    /// `alpha_cap + 1`: not a morphism.
    Scrambled,
}

pub struct PsiEntry<S> {
    pub section: FormalDistribution,
    pub image: S,
}

/// `psi` on every enumerated section, with the diagram checks.
pub struct MorphismWitness<S> {
    pub target: String,
    pub route: PsiRoute,
    pub entries: Vec<PsiEntry<S>>,
    pub report: Report,
}

impl<S> MorphismWitness<S> {
    pub fn pass(&self) -> bool {
        self.report.pass
    }

    pub fn to_json(&self) -> Value {
        json!({
            "target": self.target,
            "route": format!("{:?}", self.route),
            "sections": self.entries.len(),
            "report": self.report.to_json(),
        })
    }
}

fn image<T: SolutionTarget>(t: &T, route: PsiRoute, s: &FormalDistribution, cap: u32) -> Result<T::Section> {
    match route {
        PsiRoute::Local => local_image(t, s),
        PsiRoute::Raised => {
            let n = s.dim();
            let m = s.order().add(&MultiIndex(vec![1; n]));
            let r = s.raise(&m)?;
            delta_multi(t, &m, &t.j(r.rep())?, true)
        }
        PsiRoute::Scrambled => {
            let cycled = MultiIndex(s.order().0.iter().map(|a| (a + 1) % (cap + 1)).collect());
            delta_multi(t, &cycled, &t.j(s.rep())?, false)
        }
    }
}

/// Builds `psi` after the target passes its condition suite, refusing with
/// the first failing condition otherwise.
pub fn build_psi<T: SolutionTarget>(t: &T, cfg: &EnumConfig) -> Result<MorphismWitness<T::Section>> {
    build_psi_via(t, cfg, PsiRoute::Local)
}

pub fn build_psi_via<T: SolutionTarget>(t: &T, cfg: &EnumConfig, route: PsiRoute) -> Result<MorphismWitness<T::Section>> {
    let suite = check_target(t, cfg, 0x5eed)?;
    if let Some(c) = suite.first_failure() {
        return Err(GfError::TargetCondition(format!("{}: {}", c.name, c.violations.first().cloned().unwrap_or_default())));
    }
    witness(t, cfg, route)
}

/// The witness without the target suite; used for maps that are not
/// expected to be morphisms.
pub fn witness<T: SolutionTarget>(t: &T, cfg: &EnumConfig, route: PsiRoute) -> Result<MorphismWitness<T::Section>> {
    let sections = enumerate_sections(cfg);
    let mut embedding = Condition::new("psi . lambda = j");
    let mut derivative = Condition::new("psi . D_k = delta_k . psi");
    let mut local = Condition::new("psi(T)|_C = psi(T|_C)");
    let mut expected = Condition::new("psi agrees with the target's known image");
    let mut entries = Vec::with_capacity(sections.len());
    for s in &sections {
        let img = image(t, route, s, cfg.alpha_cap)?;
        if s.order().total() == 0 {
            let ok = t.equal(&img, &t.j(s.rep())?)?;
            embedding.record(ok, || format!("lambda({}) maps to {}", s.rep(), t.describe(&img)));
        }
        for k in 0..s.dim() {
            let lhs = image(t, route, &s.derive(k), cfg.alpha_cap)?;
            let rhs = t.delta(k, &img)?;
            derivative.record(t.equal(&lhs, &rhs)?, || format!("axis {k} on {s}"));
        }
        let (i1, _) = halves(s.domain());
        let ok = t.equal(&t.restrict(&img, &i1)?, &image(t, route, &s.restrict(&i1)?, cfg.alpha_cap)?)?;
        local.record(ok, || format!("{s} restricted to {i1}"));
        if let Some(e) = t.expected(s) {
            let e = e?;
            expected.record(t.equal(&img, &e)?, || format!("{s}: got {}, expected {}", t.describe(&img), t.describe(&e)));
        }
        entries.push(PsiEntry { section: s.clone(), image: img });
    }
    let mut conditions = vec![embedding, derivative, local];
    if expected.cases > 0 {
        conditions.push(expected);
    }
    let report = Report::new("psi", t.name(), conditions);
    Ok(MorphismWitness { target: t.name(), route, entries, report })
}

/// Outcome of comparing two witnesses section by section.
#[derive(Clone, Debug, serde::Serialize)]
pub struct UniquenessReport {
    pub sections: usize,
    pub agree: usize,
    pub first_disagreement: Option<String>,
    pub unique: bool,
    pub note: String,
}

/// True iff both witnesses send every enumerated section to equal images.
pub fn check_uniqueness<T: SolutionTarget>(
    t: &T,
    m1: &MorphismWitness<T::Section>,
    m2: &MorphismWitness<T::Section>,
) -> Result<UniquenessReport> {
    if m1.target != m2.target || m1.entries.len() != m2.entries.len() {
        return Err(GfError::DomainMismatch("witnesses for different targets or enumerations".into()));
    }
    let mut agree = 0;
    let mut first = None;
    for (a, b) in m1.entries.iter().zip(&m2.entries) {
        if a.section != b.section {
            return Err(GfError::DomainMismatch("witnesses enumerate different sections".into()));
        }
        if t.equal(&a.image, &b.image)? {
            agree += 1;
        } else if first.is_none() {
            first = Some(format!("{}: {} vs {}", a.section, t.describe(&a.image), t.describe(&b.image)));
        }
    }
    let n = m1.entries.len();
    Ok(UniquenessReport { sections: n, agree, first_disagreement: first, unique: agree == n, note: FALSIFICATION_NOTE.into() })
}

/// `psi` followed by the identity of the target, entry by entry.
pub fn compose_identity<S: Clone>(m: &MorphismWitness<S>) -> MorphismWitness<S> {
    MorphismWitness {
        target: m.target.clone(),
        route: m.route,
        entries: m.entries.iter().map(|e| PsiEntry { section: e.section.clone(), image: e.image.clone() }).collect(),
        report: m.report.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal::PiecewisePoly;
    use crate::universal::target::{IdentityTarget, ShiftedTarget};

    fn small() -> EnumConfig {
        EnumConfig { level: 2, alpha_cap: 2, d_cap: 2 }
    }

    #[test]
    fn identity_target_gives_identity() {
        let w = build_psi(&IdentityTarget, &small()).unwrap();
        assert!(w.pass(), "{:?}", w.report);
        for e in &w.entries {
            assert!(e.image.equal(&e.section).unwrap());
        }
    }

    #[test]
    fn shifted_target_gives_relabeling() {
        let t = ShiftedTarget { shift: 3 };
        let w = build_psi(&t, &small()).unwrap();
        assert!(w.pass());
        assert!(w.report.condition("psi agrees with the target's known image").unwrap().pass);
    }

    #[test]
    fn uniqueness_examples() {
        let t = IdentityTarget;
        let a = build_psi(&t, &small()).unwrap();
        assert!(check_uniqueness(&t, &a, &a).unwrap().unique);
        assert!(check_uniqueness(&t, &a, &compose_identity(&a)).unwrap().unique);
        let b = build_psi_via(&t, &small(), PsiRoute::Raised).unwrap();
        assert!(check_uniqueness(&t, &a, &b).unwrap().unique);
        let c = witness(&t, &small(), PsiRoute::Scrambled).unwrap();
        assert!(!c.pass());
        assert!(!check_uniqueness(&t, &a, &c).unwrap().unique);
    }

    /// `delta = 2 D` breaks the derivative compatibility condition.
    struct Doubled;
    impl SolutionTarget for Doubled {
        type Section = FormalDistribution;
        fn name(&self) -> String {
            "doubled".into()
        }
        fn j(&self, f: &PiecewisePoly) -> Result<FormalDistribution> {
            Ok(FormalDistribution::lambda(f.clone()))
        }
        fn delta(&self, k: usize, s: &FormalDistribution) -> Result<FormalDistribution> {
            Ok(s.derive(k).scale(&crate::rational::q(2)))
        }
        fn restrict(&self, s: &FormalDistribution, v: &crate::formal::Interval) -> Result<FormalDistribution> {
            s.restrict(v)
        }
        fn equal(&self, a: &FormalDistribution, b: &FormalDistribution) -> Result<bool> {
            a.equal(b)
        }
        fn describe(&self, s: &FormalDistribution) -> String {
            s.to_string()
        }
    }

    #[test]
    fn a_failing_target_is_refused() {
        match build_psi(&Doubled, &small()) {
            Err(GfError::TargetCondition(msg)) => assert!(msg.starts_with("3 "), "{msg}"),
            other => panic!("expected a refusal, got {:?}", other.map(|w| w.report)),
        }
    }
}
