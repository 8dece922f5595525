//! Acceptance suite: one line per criterion, nonzero exit on any failure.

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gfcalc_core::colombeau::{
    bump_constant, embed_distribution, gsf_eval, gsf_universal_phi, negligible_perturbation, perturbation_witness, GSFunction,
    GeneralizedPoint, IdentityCarrier, Mollified, PhiConfig, SmoothNet, DomainPiece,
};
use gfcalc_core::expr::Expr;
use gfcalc_core::formal::{p_m_member_divided, p_m_member_monomial, parse_distribution, FormalDistribution, Interval, MultiIndex, PiecewisePoly};
use gfcalc_core::gauge::{Class, Gauge, GaugeExpr};
use gfcalc_core::poly::Poly;
use gfcalc_core::rational::{q, qr, to_f64, Q};
use gfcalc_core::sample::{bump_test, rand_distribution, rand_piecewise_1d, rand_poly, rand_q, rand_q_nonzero};
use gfcalc_core::sheaf::{eta_embed, sheaf_laws_check, BaseIndex, FdPresheaf};
use gfcalc_core::universal::{
    build_psi, build_psi_via, witness, check_quotient_ring_conditions, check_uniqueness, ColombeauTarget, EnumConfig, IdentityTarget, PsiRoute,
    ShiftedTarget, SolutionTarget,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, pass: String, fail: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(pass)
    } else {
        Err(fail())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn c1_ftc() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u = Interval::symmetric(1);
    let mut bad = Vec::new();
    for i in 0..500 {
        let pieces = rng.gen_range(1..=5);
        let deg = rng.gen_range(2..=5);
        let f = rand_piecewise_1d(&mut rng, &u, pieces, deg, 1);
        let lhs = FormalDistribution::lambda(f.clone()).derive(0);
        let rhs = FormalDistribution::lambda(f.partial(0).map_err(err)?);
        if !lhs.equal(&rhs).map_err(err)? {
            bad.push(i);
        }
    }
    ensure(bad.is_empty(), "500/500 exact".into(), || format!("{} failures, first case {:?}", bad.len(), bad.first()))
}

/// A polynomial in `P_m`: a sum over axes of terms of degree `< m_k` in `x_k`.
fn rand_p_m(rng: &mut ChaCha8Rng, m: &[u32], deg: u32) -> Poly {
    let n = m.len();
    let mut h = Poly::zero(n);
    for (k, &mk) in m.iter().enumerate() {
        if mk == 0 {
            continue;
        }
        for _ in 0..rng.gen_range(1..=3) {
            let mut e: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=deg)).collect();
            e[k] = rng.gen_range(0..mk);
            if e.iter().sum::<u32>() <= deg {
                h = &h + &Poly::monomial(e, rand_q(rng));
            }
        }
    }
    h
}

fn c2_pm_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut agree, mut members) = (0, 0);
    let mut first = None;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=3);
        let m: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=3)).collect();
        let deg = rng.gen_range(0..=5);
        let mut h = rand_p_m(&mut rng, &m, deg);
        if rng.gen_bool(0.5) {
            h = &h + &rand_poly(&mut rng, n, deg);
        }
        let mi = MultiIndex(m.clone());
        let a = p_m_member_monomial(&h, &mi);
        let b = p_m_member_divided(&PiecewisePoly::polynomial(Interval::symmetric(n), h.clone()), &mi);
        if a == b {
            agree += 1;
            members += a as usize;
        } else if first.is_none() {
            first = Some(format!("m = {m:?}, h = {h}"));
        }
    }
    ensure(agree == 1000, format!("1000/1000 agree ({members} members)"), || format!("{agree}/1000 agree; {}", first.unwrap_or_default()))
}

fn c3_raise() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..300 {
        let n = rng.gen_range(1..=2);
        let t = rand_distribution(&mut rng, &Interval::symmetric(n), 3);
        let m = t.order().add(&MultiIndex((0..n).map(|_| rng.gen_range(0..=3)).collect()));
        if !t.equal(&t.raise(&m).map_err(err)?).map_err(err)? {
            return Err(format!("case {i}: {t} raised to {m}"));
        }
    }
    Ok("300/300 exact".into())
}

fn c4_schwarz() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let u = Interval::symmetric(2);
    let phi = bump_test(&u);
    for i in 0..200 {
        let t = rand_distribution(&mut rng, &u, 2);
        let a = t.derive(0).derive(1);
        let b = t.derive(1).derive(0);
        // pairing with a test function is an independent route
        let same_pair = a.pair(&phi).map_err(err)? == b.pair(&phi).map_err(err)?;
        if !a.equal(&b).map_err(err)? || !same_pair {
            return Err(format!("case {i}: {t}"));
        }
    }
    Ok("200/200 exact".into())
}

fn c5_sheaf() -> Outcome {
    let r = sheaf_laws_check(5, 200, 5).map_err(err)?;
    let counter: usize = r.laws.iter().map(|l| l.counterexamples.len()).sum();
    let summary = r.laws.iter().map(|l| format!("{} {}/{}", l.name, l.cases - l.counterexamples.len(), l.cases)).collect::<Vec<_>>().join(", ");
    ensure(r.pass && counter == 0, summary.clone(), || format!("{counter} counterexamples: {summary}"))
}

fn c6_eta() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let base = BaseIndex::standard(1, 5);
    let u = base.region().clone();
    for i in 0..200 {
        let t = rand_distribution(&mut rng, &u, 3);
        let v = base.random_within(&mut rng, &u, 1).expect("a base interval");
        let lhs = eta_embed(&FdPresheaf, &base, t.clone()).map_err(err)?.restrict(std::slice::from_ref(&v)).map_err(err)?;
        let rhs = eta_embed(&FdPresheaf, &base, t.restrict(&v).map_err(err)?).map_err(err)?;
        if !lhs.equal(&rhs).map_err(err)? {
            return Err(format!("case {i}: {t} on {v}"));
        }
    }
    Ok("200/200 exact".into())
}

fn psi_line<T: SolutionTarget>(t: &T, cfg: &EnumConfig) -> Result<(usize, bool), String> {
    let w = build_psi(t, cfg).map_err(err)?;
    Ok((w.entries.len(), w.pass()))
}

fn c7_psi() -> Outcome {
    let cfg = EnumConfig { level: 4, alpha_cap: 4, d_cap: 5 };
    let (n1, ok1) = psi_line(&IdentityTarget, &cfg)?;
    let (n2, ok2) = psi_line(&ShiftedTarget { shift: 2 }, &cfg)?;
    let (n3, ok3) = psi_line(&ColombeauTarget::default(), &cfg)?;
    let line = format!("identity {n1} sections {ok1}, order-shifted {n2} {ok2}, Colombeau {n3} {ok3} at eps 1e-2,1e-3,1e-4");
    ensure(ok1 && ok2 && ok3, line.clone(), || line)
}

fn unique<T: SolutionTarget>(t: &T, cfg: &EnumConfig) -> Result<(usize, usize), String> {
    let a = build_psi_via(t, cfg, PsiRoute::Local).map_err(err)?;
    // the target suite already ran for the first witness
    let b = witness(t, cfg, PsiRoute::Raised).map_err(err)?;
    let r = check_uniqueness(t, &a, &b).map_err(err)?;
    Ok((r.agree, r.sections))
}

fn c8_uniqueness() -> Outcome {
    let cfg = EnumConfig { level: 4, alpha_cap: 4, d_cap: 5 };
    let r = [unique(&IdentityTarget, &cfg)?, unique(&ShiftedTarget { shift: 2 }, &cfg)?, unique(&ColombeauTarget::default(), &cfg)?];
    let line = r.iter().map(|(a, n)| format!("{a}/{n}")).collect::<Vec<_>>().join(", ");
    ensure(r.iter().all(|(a, n)| a == n), line.clone(), || line)
}

fn c9_ring() -> Outcome {
    let r = check_quotient_ring_conditions(9, 1000).map_err(err)?;
    let line = r.conditions.iter().map(|c| format!("{} {}", c.name, c.cases)).collect::<Vec<_>>().join(", ");
    ensure(r.pass, line, || format!("{:?}", r.first_failure()))
}

/// `1 / int_{-1}^{1} (1 - u^2)^p du` from the binomial expansion.
fn bump_constant_oracle(p: u32) -> Q {
    let mut s = Q::zero();
    let mut binom = BigInt::one();
    for j in 0..=p {
        let term = Q::new(binom.clone() * 2, BigInt::from(2 * j + 1));
        s += if j % 2 == 1 { -term } else { term };
        binom = binom * BigInt::from(p - j) / BigInt::from(j + 1);
    }
    Q::one() / s
}

fn c10_delta() -> Outcome {
    let p = 8;
    let u = Interval::symmetric(1);
    let delta = parse_distribution("((2),ramp)", &u).map_err(err)?;
    let g = Gauge::default();
    let f = embed_distribution(&delta, p, g.clone()).map_err(err)?;
    let v = gsf_eval(&f, &GeneralizedPoint::standard(&[q(0)], &g)).map_err(err)?;
    let cp = bump_constant_oracle(p);
    let exact = v.as_series() == Some(&GaugeExpr::monomial(cp.clone(), q(-1))) && cp == bump_constant(p);
    let phi = PiecewisePoly::polynomial(u.clone(), (&Poly::one(1) - &Poly::var(1, 0).pow(2)).pow(4));
    let m = Mollified::of_distribution(&delta, p).map_err(err)?;
    let mut pts = Vec::new();
    for e in ["1/100", "1/1000", "1/10000"] {
        let eps = gfcalc_core::rational::parse_q(e).map_err(err)?;
        let sigma = g.rho_q(&eps).ok_or("rational gauge")?;
        let d = (m.pair(&phi, &sigma).map_err(err)? - q(1)).abs();
        pts.push((to_f64(&eps).ln(), to_f64(&d).ln()));
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    ensure(exact && slope >= 1.9, format!("delta(0) = {v} exact, slope {slope:.4}"), || format!("value {v} (C_p {cp}), slope {slope:.4}"))
}

fn rand_net(rng: &mut ChaCha8Rng) -> Expr {
    let x = Expr::var(0);
    let mut e = Expr::c(rand_q(rng)).mul(&x.pow(rng.gen_range(0..=4)));
    e = e.add(&Expr::c(rand_q(rng)).mul(&Expr::rho(q(rng.gen_range(-2..=2)))).mul(&x));
    if rng.gen_bool(0.5) {
        e = e.add(&x.mul(&Expr::c(rand_q_nonzero(rng))).mul(&Expr::rho(q(-1))).sin());
    }
    if rng.gen_bool(0.5) {
        e = e.add(&x.mul(&Expr::c(rand_q(rng))).exp());
    }
    e
}

fn c11_perturbation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u = Interval::symmetric(1);
    let g = Gauge::default();
    let (mut rows, mut exact) = (0, 0);
    for i in 0..100 {
        let f = GSFunction::on_box(rand_net(&mut rng), &u).map_err(err)?;
        let pts: Vec<GeneralizedPoint> = (0..3)
            .map(|_| GeneralizedPoint::from_series(vec![GaugeExpr::new([(qr(rng.gen_range(-3..=3), 4), q(0)), (rand_q(&mut rng), q(1))], None)], &g))
            .collect();
        f.certify(&pts, 2).map_err(err)?;
        for x in &pts {
            for a in 0..=2 {
                let w = perturbation_witness(&f, &MultiIndex(vec![a]), x).map_err(err)?;
                rows += 1;
                exact += w.exact as usize;
                // every sampled difference is below the smallest double,
                // or its fitted exponent is at least 10
                let sampled = w.difference_class == Class::Zero && w.slope.is_none_or(|s| s >= 10.0);
                if !(w.exact || sampled) {
                    return Err(format!("net {i} at {x}, order {a}: {w:?}"));
                }
            }
        }
    }
    Ok(format!("{rows}/{rows} evaluations agree ({exact} exact)"))
}

fn c12_phi() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let u = Interval::symmetric(1);
    let g = Gauge::default();
    for i in 0..10 {
        let fs: Vec<GSFunction> = (0..3).map(|_| GSFunction::on_box(rand_net(&mut rng), &u)).collect::<Result<_, _>>().map_err(err)?;
        let points = (0..3)
            .map(|_| GeneralizedPoint::from_series(vec![GaugeExpr::new([(qr(rng.gen_range(-3..=3), 4), q(0)), (rand_q(&mut rng), q(1))], None)], &g))
            .collect();
        let cfg = PhiConfig { domain: vec![DomainPiece::Interior(u.clone())], gauge: g.clone(), points, alpha_max: 2 };
        let carrier = IdentityCarrier { functions: fs.clone() };
        let other = |j: usize| {
            let net = SmoothNet::new(fs[j].net.expr.add(&negligible_perturbation(1)), 1)?;
            GSFunction::new(net, cfg.domain.clone(), cfg.gauge.clone())
        };
        let (phis, r) = gsf_universal_phi(&carrier, &cfg, Some(&other)).map_err(err)?;
        let identity = phis.iter().zip(&fs).all(|(a, b)| a.net == b.net);
        let unique = r.rows.iter().all(|row| row.unique == Some(true));
        if !(r.pass && identity && unique) {
            return Err(format!("instance {i}: {}", r.to_json()));
        }
    }
    Ok("10/10 instances: identity, derivatives preserved, unique".into())
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1 FTC compatibility", c1_ftc),
        ("2 P_m oracle equivalence", c2_pm_oracles),
        ("3 representative independence", c3_raise),
        ("4 Schwarz commutativity", c4_schwarz),
        ("5 sheaf laws", c5_sheaf),
        ("6 eta naturality", c6_eta),
        ("7 psi construction", c7_psi),
        ("8 uniqueness", c8_uniqueness),
        ("9 ring and quotient-ring conditions", c9_ring),
        ("10 delta regularization", c10_delta),
        ("11 derivative well-definedness", c11_perturbation),
        ("12 phi for the identity carrier", c12_phi),
    ];
    let start = Instant::now();
    let results: Vec<(String, Outcome, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|(name, f)| {
                s.spawn(move || {
                    let t = Instant::now();
                    let out = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
                    (name.to_string(), out, t.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("criterion thread")).collect()
    });
    let mut failed = 0;
    for (name, out, secs) in &results {
        match out {
            Ok(msg) => println!("criterion {name}: PASS ({msg}) [{secs:.1}s]"),
            Err(msg) => {
                failed += 1;
                println!("criterion {name}: FAIL ({msg}) [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {}/{} passed in {:.1}s", results.len() - failed, results.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
