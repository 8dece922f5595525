//! The category of quotient rings: objects carry a finite sample of their
//! infinities, and an arrow exists exactly when those samples are included.

use super::report::{Condition, Report};
use crate::gauge::GaugeExpr;
use crate::rational::{q, qr};

#[derive(Clone, Debug)]
pub struct QObject {
    pub name: String,
    pub infinities: Vec<GaugeExpr>,
}

/// A map on sampled infinities between two objects.
#[derive(Clone, Debug)]
pub struct QArrow {
    pub name: String,
    pub source: usize,
    pub target: usize,
    pub map: Vec<(GaugeExpr, GaugeExpr)>,
}

impl QArrow {
    pub fn identity(objects: &[QObject], i: usize) -> QArrow {
        let o = &objects[i];
        QArrow { name: format!("id_{}", o.name), source: i, target: i, map: o.infinities.iter().map(|x| (x.clone(), x.clone())).collect() }
    }

    pub fn inclusion(objects: &[QObject], s: usize, t: usize) -> QArrow {
        let mut a = QArrow::identity(objects, s);
        a.name = format!("{} -> {}", objects[s].name, objects[t].name);
        a.target = t;
        a
    }

    fn image(&self, x: &GaugeExpr) -> Option<&GaugeExpr> {
        self.map.iter().find(|(a, _)| a == x).map(|(_, b)| b)
    }

    /// `g . self`, defined when the target of `self` is the source of `g`.
    pub fn then(&self, g: &QArrow) -> Option<QArrow> {
        if self.target != g.source {
            return None;
        }
        let map = self.map.iter().filter_map(|(x, y)| g.image(y).map(|z| (x.clone(), z.clone()))).collect();
        Some(QArrow { name: format!("{} ; {}", self.name, g.name), source: self.source, target: g.target, map })
    }

    /// Every sampled infinity of the source is sent to itself, inside the
    /// target's sample.
    pub fn is_inclusion(&self, objects: &[QObject]) -> bool {
        let (s, t) = (&objects[self.source], &objects[self.target]);
        s.infinities.iter().all(|x| self.image(x) == Some(x) && t.infinities.contains(x))
    }

    fn same_map(&self, other: &QArrow) -> bool {
        self.map.len() == other.map.len() && self.map.iter().all(|(x, y)| other.image(x) == Some(y))
    }
}

/// Identities, closure under composition, neutrality of identities and
/// uniqueness of arrows between two objects, on the supplied instances.
pub fn check_q_laws(objects: &[QObject], arrows: &[QArrow]) -> Report {
    let mut ident = Condition::new("identities satisfy Q");
    for i in 0..objects.len() {
        let id = QArrow::identity(objects, i);
        ident.record(id.is_inclusion(objects), || id.name.clone());
    }
    let mut arrows_ok = Condition::new("arrows are inclusions");
    for a in arrows {
        arrows_ok.record(a.is_inclusion(objects), || format!("{} is not an inclusion", a.name));
    }
    let valid: Vec<&QArrow> = arrows.iter().filter(|a| a.is_inclusion(objects)).collect();
    let mut comp = Condition::new("composites satisfy Q");
    let mut neutral = Condition::new("identities are neutral");
    for f in &valid {
        for g in &valid {
            if let Some(h) = f.then(g) {
                comp.record(h.is_inclusion(objects), || format!("{} is not an inclusion", h.name));
            }
        }
        let left = QArrow::identity(objects, f.source).then(f).expect("composable");
        let right = f.then(&QArrow::identity(objects, f.target)).expect("composable");
        neutral.record(left.same_map(f) && right.same_map(f), || format!("identity not neutral on {}", f.name));
    }
    let mut unique = Condition::new("one and only one arrow per pair");
    for (i, f) in valid.iter().enumerate() {
        for g in &valid[i + 1..] {
            if f.source == g.source && f.target == g.target {
                unique.record(f.same_map(g), || format!("{} and {} differ", f.name, g.name));
            }
        }
    }
    Report::new("Q laws", "quotient rings ordered by inclusion of infinities", vec![ident, arrows_ok, comp, neutral, unique])
}

/// A chain `A ⊆ B ⊆ C` of sampled infinity classes with its inclusions,
/// and optionally one map that is not an inclusion.
pub fn reference_q_instance(with_violation: bool) -> (Vec<QObject>, Vec<QArrow>) {
    let p = |a| GaugeExpr::rho_pow(a);
    let a = vec![p(q(-1)), p(q(-2))];
    let mut b = a.clone();
    b.push(p(qr(-1, 2)));
    let mut c = b.clone();
    c.push(GaugeExpr::new([(q(3), q(-1)), (q(1), q(0))], None));
    let objects = vec![
        QObject { name: "A".into(), infinities: a },
        QObject { name: "B".into(), infinities: b },
        QObject { name: "C".into(), infinities: c },
    ];
    let mut arrows = vec![QArrow::inclusion(&objects, 0, 1), QArrow::inclusion(&objects, 1, 2), QArrow::inclusion(&objects, 0, 2)];
    if with_violation {
        arrows.push(QArrow {
            name: "C -> A".into(),
            source: 2,
            target: 0,
            map: objects[2].infinities.iter().map(|x| (x.clone(), x.scale(&q(2)))).collect(),
        });
    }
    (objects, arrows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inclusions_form_a_category() {
        let (o, a) = reference_q_instance(false);
        let r = check_q_laws(&o, &a);
        assert!(r.pass, "{:?}", r.first_failure());
        assert!(r.condition("composites satisfy Q").unwrap().cases >= 1);
    }

    #[test]
    fn a_non_inclusion_is_flagged() {
        let (o, a) = reference_q_instance(true);
        let r = check_q_laws(&o, &a);
        assert!(!r.pass);
        let c = r.condition("arrows are inclusions").unwrap();
        assert_eq!(c.violations, vec!["C -> A is not an inclusion".to_string()]);
    }
}
