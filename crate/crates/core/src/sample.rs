//! Seeded random generators for rationals, polynomials, piecewise
//! representatives and formal distributions.

use num_traits::Zero;
use rand::Rng;

use crate::gauge::GaugeExpr;
use crate::formal::{FormalDistribution, Interval, MultiIndex, PiecewisePoly};
use crate::poly::Poly;
use crate::rational::{qr, Q};

/// A small rational `n/d` with `|n| <= 6 d`.
pub fn rand_q<R: Rng>(rng: &mut R) -> Q {
    let d = [1, 2, 3, 4, 5, 8][rng.gen_range(0..6)];
    qr(rng.gen_range(-6 * d..=6 * d), d)
}

/// A nonzero small rational.
pub fn rand_q_nonzero<R: Rng>(rng: &mut R) -> Q {
    loop {
        let c = rand_q(rng);
        if !c.is_zero() {
            return c;
        }
    }
}

/// A rational strictly inside `(lo, hi)`.
pub fn rand_q_in<R: Rng>(rng: &mut R, lo: &Q, hi: &Q) -> Q {
    let d = [3i64, 4, 5, 7, 8, 16][rng.gen_range(0..6)];
    let k = rng.gen_range(1..d);
    lo + (hi - lo) * qr(k, d)
}

/// A polynomial in `nvars` variables with total degree at most `deg`.
pub fn rand_poly<R: Rng>(rng: &mut R, nvars: usize, deg: u32) -> Poly {
    let terms = rng.gen_range(1..=4);
    Poly::from_terms(
        nvars,
        (0..terms).map(|_| {
            let mut left = rng.gen_range(0..=deg);
            let e: Vec<u32> = (0..nvars)
                .map(|_| {
                    let x = rng.gen_range(0..=left);
                    left -= x;
                    x
                })
                .collect();
            (e, rand_q(rng))
        }),
    )
}

/// An exact gauge series with up to four terms and exponents in `[-3, 3]`
/// with denominators up to 3.
pub fn rand_gauge_expr<R: Rng>(rng: &mut R) -> GaugeExpr {
    let terms = rng.gen_range(0..=4);
    GaugeExpr::new(
        (0..terms).map(|_| {
            let d = rng.gen_range(1..=3);
            (rand_q_nonzero(rng), qr(rng.gen_range(-3 * d..=3 * d), d))
        }),
        None,
    )
}

/// `(x - b)^e` in one variable.
fn shifted_power(b: &Q, e: u32) -> Poly {
    (&Poly::var(1, 0) - &Poly::constant(1, b.clone())).pow(e)
}

/// Sorted distinct breakpoints strictly inside `(lo, hi)`.
pub fn rand_breaks<R: Rng>(rng: &mut R, lo: &Q, hi: &Q, count: usize) -> Vec<Q> {
    let mut b: Vec<Q> = (0..count).map(|_| rand_q_in(rng, lo, hi)).collect();
    b.sort();
    b.dedup();
    b
}

/// A 1-D piecewise polynomial of class `C^smooth` with at most `pieces`
/// pieces and degree at most `deg` (raised to `smooth + 1` where needed).
pub fn rand_piecewise_1d<R: Rng>(rng: &mut R, domain: &Interval, pieces: usize, deg: u32, smooth: u32) -> PiecewisePoly {
    let breaks = rand_breaks(rng, &domain.lo(0), &domain.hi(0), pieces.saturating_sub(1));
    let mut p = rand_poly(rng, 1, deg);
    let kink = deg.max(smooth + 1);
    let mut out = vec![p.clone()];
    for b in &breaks {
        let e = rng.gen_range(smooth + 1..=kink);
        p = &p + &shifted_power(b, e).scale(&rand_q_nonzero(rng));
        out.push(p.clone());
    }
    PiecewisePoly::from_pieces(domain.clone(), breaks, out).expect("kinks of order >= 1 are continuous")
}

/// A 1-D piecewise polynomial in variable `k` of an `n`-dimensional domain.
fn lift_axis(f: &PiecewisePoly, domain: &Interval, k: usize) -> PiecewisePoly {
    let n = domain.dim();
    let mut breaks = vec![Vec::new(); n];
    breaks[k] = f.breaks()[0].clone();
    let cells: Vec<Poly> = f.cells().iter().map(|c| c.extend_vars(n).compose(0, &Poly::var(n, k))).collect();
    let counts: Vec<usize> = breaks.iter().map(|b| b.len() + 1).collect();
    let skel = PiecewisePoly::from_parts(domain.clone(), breaks.clone(), vec![Poly::zero(n); counts[k]])
        .expect("grid from a valid 1-D grid");
    let total: usize = counts.iter().product();
    let all = (0..total).map(|i| cells[skel.unindex(i)[k]].clone()).collect();
    PiecewisePoly::new(domain.clone(), breaks, all).expect("lift of a continuous function")
}

/// A continuous piecewise polynomial on an `n`-dimensional box: a
/// polynomial plus a sum of tensor products of 1-D continuous pieces.
pub fn rand_piecewise<R: Rng>(rng: &mut R, domain: &Interval, pieces: usize, deg: u32) -> PiecewisePoly {
    let n = domain.dim();
    if n == 1 {
        return rand_piecewise_1d(rng, domain, pieces, deg, 0);
    }
    let mut acc = PiecewisePoly::polynomial(domain.clone(), rand_poly(rng, n, deg));
    for _ in 0..rng.gen_range(1..=2) {
        let mut term = PiecewisePoly::polynomial(domain.clone(), Poly::one(n));
        for k in 0..n {
            let axis = Interval::interval_1d(domain.lo(k), domain.hi(k)).expect("axis of a box");
            let f = rand_piecewise_1d(rng, &axis, pieces, deg.clamp(1, 2), 0);
            term = term.mul(&lift_axis(&f, domain, k)).expect("same domain");
        }
        acc = acc.add(&term).expect("same domain");
    }
    acc.simplify()
}

/// A random multi-index with every entry at most `cap`.
pub fn rand_order<R: Rng>(rng: &mut R, n: usize, cap: u32) -> MultiIndex {
    MultiIndex((0..n).map(|_| rng.gen_range(0..=cap)).collect())
}

/// A random formal distribution with order entries at most `cap`.
pub fn rand_distribution<R: Rng>(rng: &mut R, domain: &Interval, cap: u32) -> FormalDistribution {
    let n = domain.dim();
    let rep = rand_piecewise(rng, domain, 3, 3);
    FormalDistribution::new(rand_order(rng, n, cap), rep).expect("matching dimensions")
}

/// The same class under a different representative: raised by `extra` and
/// shifted by a polynomial annihilated by the raised order.
pub fn rerepresent<R: Rng>(rng: &mut R, t: &FormalDistribution, extra: u32) -> FormalDistribution {
    let n = t.dim();
    let m = t.order().add(&MultiIndex((0..n).map(|_| rng.gen_range(0..=extra)).collect()));
    let raised = t.raise(&m).expect("m dominates the order");
    let mut shift = Poly::zero(n);
    for k in (0..n).filter(|&k| m.0[k] > 0) {
        let mut e = vec![0u32; n];
        e[k] = rng.gen_range(0..m.0[k]);
        for (j, ej) in e.iter_mut().enumerate() {
            if j != k {
                *ej = rng.gen_range(0..=2);
            }
        }
        shift = &shift + &Poly::monomial(e, rand_q(rng));
    }
    let rep = raised.rep().add(&PiecewisePoly::polynomial(t.domain().clone(), shift)).expect("same domain");
    FormalDistribution::new(m, rep).expect("matching dimensions")
}

/// A smooth-enough test polynomial vanishing to order 4 on the box boundary.
pub fn bump_test(domain: &Interval) -> PiecewisePoly {
    let n = domain.dim();
    let mut p = Poly::one(n);
    for k in 0..n {
        let x = Poly::var(n, k);
        let f = &(&x - &Poly::constant(n, domain.lo(k))) * &(&Poly::constant(n, domain.hi(k)) - &x);
        p = &p * &f.pow(4);
    }
    PiecewisePoly::polynomial(domain.clone(), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_representatives_are_continuous() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=3 {
            let d = Interval::symmetric(n);
            for _ in 0..20 {
                let f = rand_piecewise(&mut rng, &d, 3, 3);
                assert!(f.check_continuity().is_ok());
            }
        }
    }

    #[test]
    fn c1_pieces_have_continuous_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = Interval::symmetric(1);
        for _ in 0..20 {
            let f = rand_piecewise_1d(&mut rng, &d, 4, 4, 1);
            assert!(f.partial(0).unwrap().check_continuity().is_ok());
        }
    }

    #[test]
    fn rerepresentation_keeps_the_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=2 {
            let d = Interval::symmetric(n);
            for _ in 0..10 {
                let t = rand_distribution(&mut rng, &d, 2);
                let u = rerepresent(&mut rng, &t, 2);
                assert!(t.equal(&u).unwrap());
            }
        }
    }
}
