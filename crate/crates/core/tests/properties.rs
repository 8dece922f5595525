use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gfcalc_core::formal::{Interval, MultiIndex};
use gfcalc_core::gauge::GaugeExpr;
use gfcalc_core::rational::{q, qr, Q};
use gfcalc_core::sample::{rand_distribution, rand_gauge_expr, rerepresent};
use gfcalc_core::sheaf::{eta_embed, BaseIndex, FdPresheaf};

fn rational() -> impl Strategy<Value = Q> {
    (-40i64..=40, 1i64..=6).prop_map(|(n, d)| qr(n, d))
}

fn series() -> impl Strategy<Value = GaugeExpr> {
    prop::collection::vec((rational(), -6i64..=6, 1i64..=3), 0..4)
        .prop_map(|ts| GaugeExpr::new(ts.into_iter().map(|(c, n, d)| (c, qr(n, d))), None))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn series_form_a_commutative_ring(a in series(), b in series(), c in series()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn order_is_total_and_compatible_with_addition(a in series(), b in series(), c in series()) {
        let ab = a.sub(&b).sign();
        prop_assert!(ab.is_some());
        // a <= b implies a + c <= b + c
        prop_assert_eq!(ab, a.add(&c).sub(&b.add(&c)).sign());
    }

    #[test]
    fn exact_inversion_of_monomials(c in rational(), n in -6i64..=6) {
        prop_assume!(c != q(0));
        let x = GaugeExpr::monomial(c, q(n));
        let inv = x.invert(&q(8)).unwrap();
        prop_assert_eq!(x.mul(&inv), GaugeExpr::one());
    }

    #[test]
    fn equality_ignores_the_representative(seed in any::<u64>(), n in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = rand_distribution(&mut rng, &Interval::symmetric(n), 2);
        let u = rerepresent(&mut rng, &t, 2);
        prop_assert!(t.equal(&u).unwrap());
        prop_assert!(t.derive(0).equal(&u.derive(0)).unwrap());
    }

    #[test]
    fn derivation_commutes_with_restriction(seed in any::<u64>(), a in 0i64..4, w in 1i64..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = rand_distribution(&mut rng, &Interval::symmetric(1), 2);
        let lo = qr(a - 4, 4);
        let hi = (&lo + qr(w, 4)).min(q(1));
        let v = Interval::interval_1d(lo, hi).unwrap();
        prop_assert!(t.derive(0).restrict(&v).unwrap().equal(&t.restrict(&v).unwrap().derive(0)).unwrap());
    }

    #[test]
    fn raising_is_idempotent_on_classes(seed in any::<u64>(), k in 0u32..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = rand_distribution(&mut rng, &Interval::symmetric(1), 2);
        let m = t.order().add(&MultiIndex(vec![k]));
        let r = t.raise(&m).unwrap();
        prop_assert!(r.raise(&m).unwrap() == r);
        prop_assert!(r.equal(&t).unwrap());
    }

    #[test]
    fn eta_is_natural(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = BaseIndex::standard(1, 3);
        let u = base.region().clone();
        let t = rand_distribution(&mut rng, &u, 2);
        let v = base.random_within(&mut rng, &u, 1).unwrap();
        let lhs = eta_embed(&FdPresheaf, &base, t.clone()).unwrap().restrict(std::slice::from_ref(&v)).unwrap();
        let rhs = eta_embed(&FdPresheaf, &base, t.restrict(&v).unwrap()).unwrap();
        prop_assert!(lhs.equal(&rhs).unwrap());
    }

    #[test]
    fn random_series_generator_is_exact(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert!(rand_gauge_expr(&mut rng).is_exact());
    }
}
