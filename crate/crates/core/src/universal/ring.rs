//! Ring axioms and the quotient-ring conditions on generalized numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::report::{Condition, Report};
use crate::error::Result;
use crate::expr::parse_expr;
use crate::gauge::{series_leq, Class, Gauge, GaugeExpr, GeneralizedNumber, Moderate};
use crate::rational::{q, Q};
use crate::sample::rand_gauge_expr;

/// Exact ring axioms on `cases` random triples.
pub fn ring_axioms(seed: u64, cases: usize) -> Condition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Condition::new("ring axioms");
    let (zero, one) = (GaugeExpr::zero(), GaugeExpr::one());
    for _ in 0..cases {
        let (a, b, d) = (rand_gauge_expr(&mut rng), rand_gauge_expr(&mut rng), rand_gauge_expr(&mut rng));
        let laws = [
            ("a+b = b+a", a.add(&b) == b.add(&a)),
            ("(a+b)+c = a+(b+c)", a.add(&b).add(&d) == a.add(&b.add(&d))),
            ("ab = ba", a.mul(&b) == b.mul(&a)),
            ("(ab)c = a(bc)", a.mul(&b).mul(&d) == a.mul(&b.mul(&d))),
            ("a(b+c) = ab+ac", a.mul(&b.add(&d)) == a.mul(&b).add(&a.mul(&d))),
            ("a+0 = a", a.add(&zero) == a),
            ("a1 = a", a.mul(&one) == a),
            ("a-a = 0", a.sub(&a).is_zero()),
        ];
        for (name, ok) in laws {
            c.record(ok, || format!("{name} fails for a = {a}, b = {b}, c = {d}"));
        }
    }
    c
}

/// Exactly one of `a < b`, `a = b`, `a > b`, decided for every pair.
pub fn trichotomy(seed: u64, cases: usize) -> Condition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Condition::new("trichotomy");
    for _ in 0..cases {
        let (a, b) = (rand_gauge_expr(&mut rng), rand_gauge_expr(&mut rng));
        let (ab, ba) = (a.sub(&b).sign(), b.sub(&a).sign());
        let ok = matches!((ab, ba), (Some(x), Some(y)) if x == y.reverse());
        c.record(ok, || format!("order of {a} and {b} undecided"));
    }
    c
}

/// The quotient-ring conditions: zero representatives are infinitesimal,
/// `rho^-1` is a moderate infinity, every sample is bounded by an infinity
/// of the grammar, and nets below an infinity are moderate.
pub fn check_quotient_ring_conditions(seed: u64, cases: usize) -> Result<Report> {
    let gauge = Gauge::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37);

    let mut zero_inf = Condition::new("zero representatives are infinitesimal");
    for src in ["0", "exp(-rho^-1)", "rho^-5*exp(-rho^-1)", "exp(-rho^-2)*sin(rho^-1)"] {
        let x = GeneralizedNumber::from_tree(parse_expr(src)?, gauge.clone());
        let c = x.classify();
        zero_inf.record(matches!(c.class, Class::Zero | Class::Infinitesimal), || format!("{src} classified {:?}", c.class));
    }

    let mut rho_inv = Condition::new("rho^-1 is moderate and infinite");
    let r = GeneralizedNumber::series(GaugeExpr::rho_pow(q(-1)), gauge.clone()).classify();
    rho_inv.record(r.class == Class::Infinite && matches!(r.moderate, Moderate::Yes(_)), || format!("rho^-1 classified {r:?}"));

    let mut bounded = Condition::new("bounded by infinities");
    for _ in 0..cases {
        let a = rand_gauge_expr(&mut rng);
        let a0 = a.leading_exponent().cloned().unwrap_or_else(|| q(0));
        let e: Q = a0.min(q(0)) - q(1);
        let bound = GaugeExpr::rho_pow(e.clone());
        let infinite = GeneralizedNumber::series(bound.clone(), gauge.clone()).classify().class == Class::Infinite;
        bounded.record(infinite && series_leq(&a.abs(), &bound), || format!("{a} not below rho^{e}"));
    }

    let mut determined = Condition::new("infinities determine moderateness");
    let oscillating = GeneralizedNumber::from_tree(parse_expr("rho*sin(rho^-1)")?, gauge.clone());
    let c = oscillating.classify();
    determined.record(matches!(c.moderate, Moderate::Yes(_)), || format!("rho*sin(rho^-1) classified {c:?}"));
    let fast = GeneralizedNumber::from_tree(parse_expr("exp(rho^-1)")?, gauge.clone()).classify();
    determined.record(fast.moderate == Moderate::No, || format!("exp(rho^-1) classified {fast:?}"));

    let conditions = vec![ring_axioms(seed, cases), trichotomy(seed ^ 1, cases), zero_inf, rho_inv, bounded, determined];
    Ok(Report::new("quotient ring conditions", "Robinson-Colombeau ring", conditions))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conditions_hold() {
        let r = check_quotient_ring_conditions(1, 200).unwrap();
        assert!(r.pass, "{:?}", r.first_failure());
    }
}
