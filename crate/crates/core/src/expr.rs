//! Symbolic expression trees over the variables `x_1..x_n` and the gauge
//! symbol `rho`: the closed grammar used for nets of smooth functions.
//!
//! Trees are kept in an expanded normal form (a sum of coefficient times
//! product of `rho^q` and atom powers), so identical nets have identical
//! trees and sums cancel structurally.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::colombeau::mollify::{bump_poly, Mollified};
use crate::error::{GfError, Result};
use crate::gauge::GaugeExpr;
use crate::rational::{fmt_q, from_f64, parse_q, q, to_f64, Q};

/// Relative order at which Taylor expansions of `sin`, `cos`, `exp` stop.
pub const TAYLOR_ORDER: i64 = 16;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Const(Q),
    Var(usize),
    /// `rho^q`
    Rho(Q),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, u32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    /// `d`-th derivative of `C_p (1 - u^2)^p` on `|u| <= 1`, zero outside.
    Bump { p: u32, deriv: u32, arg: Box<Expr> },
    /// A mollified 1-D piecewise polynomial in `x_1`.
    Mollified(Arc<Mollified>),
}

/// Asymptotic upper bound `|u_eps| = O(rho^b)` uniformly on bounded sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bound {
    Negligible,
    Exponent(Q),
    Unknown,
}

impl Bound {
    fn add(self, o: Bound) -> Bound {
        match (self, o) {
            (Bound::Unknown, _) | (_, Bound::Unknown) => Bound::Unknown,
            (Bound::Negligible, b) | (b, Bound::Negligible) => b,
            (Bound::Exponent(a), Bound::Exponent(b)) => Bound::Exponent(a.min(b)),
        }
    }

    fn mul(self, o: Bound) -> Bound {
        match (self, o) {
            (Bound::Unknown, _) | (_, Bound::Unknown) => Bound::Unknown,
            (Bound::Negligible, _) | (_, Bound::Negligible) => Bound::Negligible,
            (Bound::Exponent(a), Bound::Exponent(b)) => Bound::Exponent(a + b),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Mono {
    rho: Q,
    atoms: Vec<(Expr, u32)>,
}

impl Mono {
    fn one() -> Mono {
        Mono { rho: Q::zero(), atoms: Vec::new() }
    }

    fn mul(&self, o: &Mono) -> Mono {
        let mut map: BTreeMap<Expr, u32> = self.atoms.iter().cloned().collect();
        for (a, k) in &o.atoms {
            *map.entry(a.clone()).or_insert(0) += k;
        }
        Mono { rho: &self.rho + &o.rho, atoms: map.into_iter().collect() }
    }
}

type Nf = BTreeMap<Mono, Q>;

fn nf_const(c: Q) -> Nf {
    let mut m = Nf::new();
    if !c.is_zero() {
        m.insert(Mono::one(), c);
    }
    m
}

fn nf_atom(a: Expr) -> Nf {
    let mut m = Nf::new();
    m.insert(Mono { rho: Q::zero(), atoms: vec![(a, 1)] }, Q::one());
    m
}

fn nf_add(mut a: Nf, b: &Nf) -> Nf {
    for (m, c) in b {
        let e = a.entry(m.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            a.remove(m);
        }
    }
    a
}

fn nf_mul(a: &Nf, b: &Nf) -> Nf {
    let mut out = Nf::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m = ma.mul(mb);
            let e = out.entry(m.clone()).or_insert_with(Q::zero);
            *e += ca * cb;
            if e.is_zero() {
                out.remove(&m);
            }
        }
    }
    out
}

fn nf_to_expr(nf: &Nf) -> Expr {
    let mut terms: Vec<Expr> = Vec::with_capacity(nf.len());
    for (m, c) in nf {
        let mut factors = Vec::new();
        if !c.is_one() || (m.rho.is_zero() && m.atoms.is_empty()) {
            factors.push(Expr::Const(c.clone()));
        }
        if !m.rho.is_zero() {
            factors.push(Expr::Rho(m.rho.clone()));
        }
        for (a, k) in &m.atoms {
            factors.push(if *k == 1 { a.clone() } else { Expr::Pow(Box::new(a.clone()), *k) });
        }
        terms.push(if factors.len() == 1 { factors.pop().unwrap() } else { Expr::Mul(factors) });
    }
    match terms.len() {
        0 => Expr::Const(Q::zero()),
        1 => terms.pop().unwrap(),
        _ => Expr::Add(terms),
    }
}

impl Expr {
    pub fn c(x: Q) -> Expr {
        Expr::Const(x)
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(q(n))
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn rho(e: Q) -> Expr {
        Expr::Rho(e)
    }

    pub fn sin(self) -> Expr {
        Expr::Sin(Box::new(self)).normalize()
    }

    pub fn cos(self) -> Expr {
        Expr::Cos(Box::new(self)).normalize()
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self)).normalize()
    }

    pub fn bump(p: u32, arg: Expr) -> Expr {
        Expr::Bump { p, deriv: 0, arg: Box::new(arg) }.normalize()
    }

    pub fn mollified(m: Mollified) -> Expr {
        Expr::Mollified(Arc::new(m))
    }

    pub fn from_gauge_expr(g: &GaugeExpr) -> Expr {
        let mut nf = Nf::new();
        for (c, a) in g.terms() {
            nf.insert(Mono { rho: a.clone(), atoms: Vec::new() }, c.clone());
        }
        nf_to_expr(&nf)
    }

    pub fn add(&self, o: &Expr) -> Expr {
        nf_to_expr(&nf_add(self.nf(), &o.nf()))
    }

    pub fn sub(&self, o: &Expr) -> Expr {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Expr) -> Expr {
        nf_to_expr(&nf_mul(&self.nf(), &o.nf()))
    }

    pub fn neg(&self) -> Expr {
        self.scale(&q(-1))
    }

    pub fn scale(&self, k: &Q) -> Expr {
        nf_to_expr(&nf_mul(&self.nf(), &nf_const(k.clone())))
    }

    pub fn pow(&self, k: u32) -> Expr {
        Expr::Pow(Box::new(self.clone()), k).normalize()
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn normalize(&self) -> Expr {
        nf_to_expr(&self.nf())
    }

    fn nf(&self) -> Nf {
        match self {
            Expr::Const(c) => nf_const(c.clone()),
            Expr::Var(_) => nf_atom(self.clone()),
            Expr::Rho(a) => {
                let mut m = Nf::new();
                m.insert(Mono { rho: a.clone(), atoms: Vec::new() }, Q::one());
                m
            }
            Expr::Add(ts) => ts.iter().fold(Nf::new(), |acc, t| nf_add(acc, &t.nf())),
            Expr::Mul(fs) => fs.iter().fold(nf_const(Q::one()), |acc, f| nf_mul(&acc, &f.nf())),
            Expr::Pow(b, k) => {
                let bn = b.nf();
                let mut acc = nf_const(Q::one());
                for _ in 0..*k {
                    acc = nf_mul(&acc, &bn);
                }
                acc
            }
            Expr::Sin(u) => {
                let u = u.normalize();
                if u.is_zero() {
                    Nf::new()
                } else {
                    nf_atom(Expr::Sin(Box::new(u)))
                }
            }
            Expr::Cos(u) => {
                let u = u.normalize();
                if u.is_zero() {
                    nf_const(Q::one())
                } else {
                    nf_atom(Expr::Cos(Box::new(u)))
                }
            }
            Expr::Exp(u) => {
                let u = u.normalize();
                if u.is_zero() {
                    nf_const(Q::one())
                } else {
                    nf_atom(Expr::Exp(Box::new(u)))
                }
            }
            Expr::Bump { p, deriv, arg } => {
                let a = arg.normalize();
                if let Expr::Const(c) = &a {
                    return nf_const(bump_value(*p, *deriv, c));
                }
                nf_atom(Expr::Bump { p: *p, deriv: *deriv, arg: Box::new(a) })
            }
            Expr::Mollified(m) => {
                if m.is_zero() {
                    Nf::new()
                } else {
                    nf_atom(self.clone())
                }
            }
        }
    }

    /// Symbolic `d/dx_k`, normalized.
    pub fn derivative(&self, k: usize) -> Expr {
        self.d_raw(k).normalize()
    }

    /// Iterated partial derivative `d^alpha`.
    pub fn partial(&self, alpha: &[u32]) -> Expr {
        let mut e = self.clone();
        for (k, &a) in alpha.iter().enumerate() {
            for _ in 0..a {
                e = e.derivative(k);
            }
        }
        e
    }

    fn d_raw(&self, k: usize) -> Expr {
        match self {
            Expr::Const(_) | Expr::Rho(_) => Expr::int(0),
            Expr::Var(j) => Expr::int(if *j == k { 1 } else { 0 }),
            Expr::Add(ts) => Expr::Add(ts.iter().map(|t| t.d_raw(k)).collect()),
            Expr::Mul(fs) => {
                let mut terms = Vec::new();
                for i in 0..fs.len() {
                    let mut prod: Vec<Expr> = fs.clone();
                    prod[i] = fs[i].d_raw(k);
                    terms.push(Expr::Mul(prod));
                }
                Expr::Add(terms)
            }
            Expr::Pow(b, n) => Expr::Mul(vec![
                Expr::int(*n as i64),
                Expr::Pow(b.clone(), n - 1),
                b.d_raw(k),
            ]),
            Expr::Sin(u) => Expr::Mul(vec![Expr::Cos(u.clone()), u.d_raw(k)]),
            Expr::Cos(u) => Expr::Mul(vec![Expr::int(-1), Expr::Sin(u.clone()), u.d_raw(k)]),
            Expr::Exp(u) => Expr::Mul(vec![self.clone(), u.d_raw(k)]),
            Expr::Bump { p, deriv, arg } => Expr::Mul(vec![
                Expr::Bump { p: *p, deriv: deriv + 1, arg: arg.clone() },
                arg.d_raw(k),
            ]),
            Expr::Mollified(m) => Expr::Mul(vec![Expr::Mollified(Arc::new(m.derived())), m.arg.d_raw(k)]),
        }
    }

    /// Derivative orders available before a bump factor stops being
    /// continuously differentiable; `None` when unbounded.
    pub fn smoothness_budget(&self) -> Option<u32> {
        let mut best: Option<u32> = None;
        self.visit(&mut |e| {
            let b = match e {
                Expr::Bump { p, deriv, .. } => Some(p.saturating_sub(2).saturating_sub(*deriv)),
                Expr::Mollified(m) => Some(m.budget()),
                _ => None,
            };
            if let Some(b) = b {
                best = Some(best.map_or(b, |x| x.min(b)));
            }
        });
        best
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Add(v) | Expr::Mul(v) => v.iter().for_each(|e| e.visit(f)),
            Expr::Pow(b, _) => b.visit(f),
            Expr::Sin(u) | Expr::Cos(u) | Expr::Exp(u) => u.visit(f),
            Expr::Bump { arg, .. } => arg.visit(f),
            Expr::Mollified(m) => m.arg.visit(f),
            _ => {}
        }
    }

    /// Number of variables referenced (one past the largest index).
    pub fn arity(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |e| {
            if let Expr::Var(i) = e {
                n = n.max(i + 1);
            }
        });
        n
    }

    pub fn is_polynomial(&self) -> bool {
        let mut ok = true;
        self.visit(&mut |e| {
            if matches!(e, Expr::Sin(_) | Expr::Cos(_) | Expr::Exp(_) | Expr::Bump { .. } | Expr::Mollified(_)) {
                ok = false;
            }
        });
        ok
    }

    /// Replaces `x_i` by `vals[i]`, inside mollified arguments too.
    pub fn substitute(&self, vals: &[Expr]) -> Expr {
        self.subst_raw(vals).normalize()
    }

    fn subst_raw(&self, vals: &[Expr]) -> Expr {
        match self {
            Expr::Var(i) => vals.get(*i).cloned().unwrap_or_else(|| self.clone()),
            Expr::Add(ts) => Expr::Add(ts.iter().map(|t| t.subst_raw(vals)).collect()),
            Expr::Mul(fs) => Expr::Mul(fs.iter().map(|t| t.subst_raw(vals)).collect()),
            Expr::Pow(b, k) => Expr::Pow(Box::new(b.subst_raw(vals)), *k),
            Expr::Sin(u) => Expr::Sin(Box::new(u.subst_raw(vals))),
            Expr::Cos(u) => Expr::Cos(Box::new(u.subst_raw(vals))),
            Expr::Exp(u) => Expr::Exp(Box::new(u.subst_raw(vals))),
            Expr::Bump { p, deriv, arg } => Expr::Bump { p: *p, deriv: *deriv, arg: Box::new(arg.subst_raw(vals)) },
            Expr::Mollified(m) => Expr::Mollified(Arc::new(m.at(m.arg.subst_raw(vals).normalize()))),
            _ => self.clone(),
        }
    }

    /// Floating-point value at `x` with gauge value `rho`.
    pub fn eval_f64(&self, x: &[f64], rho: f64) -> f64 {
        match self {
            Expr::Const(c) => to_f64(c),
            Expr::Var(i) => x[*i],
            Expr::Rho(a) => rho.powf(to_f64(a)),
            Expr::Add(ts) => ts.iter().map(|t| t.eval_f64(x, rho)).sum(),
            Expr::Mul(fs) => {
                let mut acc = 1.0;
                for f in fs {
                    acc *= f.eval_f64(x, rho);
                    if acc == 0.0 {
                        break;
                    }
                }
                acc
            }
            Expr::Pow(b, k) => b.eval_f64(x, rho).powi(*k as i32),
            Expr::Sin(u) => u.eval_f64(x, rho).sin(),
            Expr::Cos(u) => u.eval_f64(x, rho).cos(),
            Expr::Exp(u) => u.eval_f64(x, rho).exp(),
            Expr::Bump { p, deriv, arg } => {
                let u = arg.eval_f64(x, rho);
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    bump_poly(*p, *deriv).eval_f64(&[u])
                }
            }
            Expr::Mollified(m) => {
                let xv = m.arg_f64(x, rho);
                match (from_f64(xv), from_f64(rho)) {
                    (Some(xq), Some(rq)) if rq.is_positive() => {
                        let inv = Q::one() / &rq;
                        m.eval_generic(&xq, &rq, &inv).map(|v| to_f64(&v)).unwrap_or(f64::NAN)
                    }
                    _ => f64::NAN,
                }
            }
        }
    }

    /// Exact value at rational `x` and rational gauge value `rho`; `None`
    /// when a transcendental function or irrational power intervenes.
    pub fn eval_q(&self, x: &[Q], rho: &Q) -> Option<Q> {
        Some(match self {
            Expr::Const(c) => c.clone(),
            Expr::Var(i) => x.get(*i)?.clone(),
            Expr::Rho(a) => {
                if !a.is_integer() {
                    return None;
                }
                let e = a.to_integer().to_i64()?;
                if e >= 0 {
                    num_traits::pow(rho.clone(), e as usize)
                } else {
                    Q::one() / num_traits::pow(rho.clone(), (-e) as usize)
                }
            }
            Expr::Add(ts) => {
                let mut acc = Q::zero();
                for t in ts {
                    acc += t.eval_q(x, rho)?;
                }
                acc
            }
            Expr::Mul(fs) => {
                let mut acc = Q::one();
                for f in fs {
                    acc *= f.eval_q(x, rho)?;
                }
                acc
            }
            Expr::Pow(b, k) => num_traits::pow(b.eval_q(x, rho)?, *k as usize),
            Expr::Sin(u) => {
                let v = u.eval_q(x, rho)?;
                if !v.is_zero() {
                    return None;
                }
                Q::zero()
            }
            Expr::Cos(u) | Expr::Exp(u) => {
                let v = u.eval_q(x, rho)?;
                if !v.is_zero() {
                    return None;
                }
                Q::one()
            }
            Expr::Bump { p, deriv, arg } => bump_value(*p, *deriv, &arg.eval_q(x, rho)?),
            Expr::Mollified(m) => {
                let xv = m.arg_q(x, rho)?;
                let inv = Q::one() / rho;
                m.eval_generic(&xv, rho, &inv)?
            }
        })
    }

    /// Symbolic value at a point with series coordinates; `None` when the
    /// tree does not close over series (e.g. `sin` of an infinite argument)
    /// or a sign decision is blocked by truncation.
    pub fn to_gauge(&self, point: &[GaugeExpr]) -> Option<GaugeExpr> {
        let order = q(TAYLOR_ORDER);
        Some(match self {
            Expr::Const(c) => GaugeExpr::constant(c.clone()),
            Expr::Var(i) => point.get(*i)?.clone(),
            Expr::Rho(a) => GaugeExpr::rho_pow(a.clone()),
            Expr::Add(ts) => {
                let mut acc = GaugeExpr::zero();
                for t in ts {
                    acc = acc.add(&t.to_gauge(point)?);
                }
                acc
            }
            Expr::Mul(fs) => {
                let mut acc = GaugeExpr::one();
                for f in fs {
                    acc = acc.mul(&f.to_gauge(point)?);
                }
                acc
            }
            Expr::Pow(b, k) => b.to_gauge(point)?.pow(*k),
            Expr::Sin(u) => taylor(&u.to_gauge(point)?, &order, TaylorKind::Sin)?,
            Expr::Cos(u) => taylor(&u.to_gauge(point)?, &order, TaylorKind::Cos)?,
            Expr::Exp(u) => taylor(&u.to_gauge(point)?, &order, TaylorKind::Exp)?,
            Expr::Bump { p, deriv, arg } => {
                let a = arg.to_gauge(point)?;
                let inside = GaugeExpr::one().sub(&a.mul(&a)).sign()?;
                if inside == Ordering::Less {
                    GaugeExpr::zero()
                } else {
                    bump_poly(*p, *deriv).eval_generic(&[a])
                }
            }
            Expr::Mollified(m) => {
                let xv = m.arg_gauge(point)?;
                m.eval_generic(&xv, &GaugeExpr::rho_pow(q(1)), &GaugeExpr::rho_pow(q(-1)))?
            }
        })
    }

    /// Converts a polynomial tree to `sum_beta c_beta(rho) x^beta`.
    pub fn to_xpoly(&self, nvars: usize) -> Option<BTreeMap<Vec<u32>, GaugeExpr>> {
        if !self.is_polynomial() {
            return None;
        }
        let mut out: BTreeMap<Vec<u32>, GaugeExpr> = BTreeMap::new();
        for (m, c) in self.nf() {
            let mut beta = vec![0u32; nvars];
            for (a, k) in &m.atoms {
                match a {
                    Expr::Var(i) if *i < nvars => beta[*i] += k,
                    _ => return None,
                }
            }
            let entry = out.entry(beta).or_default();
            *entry = entry.add(&GaugeExpr::monomial(c, m.rho.clone()));
        }
        out.retain(|_, g| !g.is_zero());
        Some(out)
    }

    /// Upper bound on the size of the net, uniform over bounded `x`.
    pub fn asymptotic_bound(&self) -> Bound {
        match self {
            Expr::Const(c) if c.is_zero() => Bound::Negligible,
            Expr::Const(_) | Expr::Var(_) => Bound::Exponent(Q::zero()),
            Expr::Rho(a) => Bound::Exponent(a.clone()),
            Expr::Add(ts) => ts.iter().fold(Bound::Negligible, |acc, t| acc.add(t.asymptotic_bound())),
            Expr::Mul(fs) => fs.iter().fold(Bound::Exponent(Q::zero()), |acc, f| acc.mul(f.asymptotic_bound())),
            Expr::Pow(b, k) => match b.asymptotic_bound() {
                Bound::Exponent(a) => Bound::Exponent(a * q(*k as i64)),
                other => other,
            },
            Expr::Sin(u) => match u.to_gauge(&[]).and_then(|g| g.leading_exponent().cloned()) {
                Some(a) if a.is_positive() => Bound::Exponent(a),
                _ => Bound::Exponent(Q::zero()),
            },
            Expr::Cos(_) | Expr::Bump { .. } => Bound::Exponent(Q::zero()),
            Expr::Exp(u) => exp_bound(u),
            Expr::Mollified(m) => Bound::Exponent(-q(m.order as i64)),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Expr::Const(c) => json!(["const", fmt_q(c)]),
            Expr::Var(i) => json!(["var", i]),
            Expr::Rho(a) => json!(["rho", fmt_q(a)]),
            Expr::Add(ts) => {
                let mut v = vec![json!("add")];
                v.extend(ts.iter().map(Expr::to_json));
                Value::Array(v)
            }
            Expr::Mul(fs) => {
                let mut v = vec![json!("mul")];
                v.extend(fs.iter().map(Expr::to_json));
                Value::Array(v)
            }
            Expr::Pow(b, k) => json!(["pow", b.to_json(), k]),
            Expr::Sin(u) => json!(["sin", u.to_json()]),
            Expr::Cos(u) => json!(["cos", u.to_json()]),
            Expr::Exp(u) => json!(["exp", u.to_json()]),
            Expr::Bump { p, deriv, arg } => json!(["bump", p, deriv, arg.to_json()]),
            Expr::Mollified(m) => json!(["moll", m.to_json()]),
        }
    }

    pub fn from_json(v: &Value) -> Result<Expr> {
        let bad = || GfError::Parse(format!("bad expression json {v}"));
        let arr = v.as_array().ok_or_else(bad)?;
        let tag = arr.first().and_then(Value::as_str).ok_or_else(bad)?;
        let arg = |i: usize| arr.get(i).ok_or_else(bad);
        let uint = |i: usize| -> Result<u32> {
            arr.get(i).and_then(Value::as_u64).map(|x| x as u32).ok_or_else(bad)
        };
        let sub = |i: usize| -> Result<Box<Expr>> { Ok(Box::new(Expr::from_json(arg(i)?)?)) };
        Ok(match tag {
            "const" => Expr::Const(parse_q(arg(1)?.as_str().ok_or_else(bad)?)?),
            "var" => Expr::Var(uint(1)? as usize),
            "rho" => Expr::Rho(parse_q(arg(1)?.as_str().ok_or_else(bad)?)?),
            "add" => Expr::Add(arr[1..].iter().map(Expr::from_json).collect::<Result<_>>()?),
            "mul" => Expr::Mul(arr[1..].iter().map(Expr::from_json).collect::<Result<_>>()?),
            "pow" => Expr::Pow(sub(1)?, uint(2)?),
            "sin" => Expr::Sin(sub(1)?),
            "cos" => Expr::Cos(sub(1)?),
            "exp" => Expr::Exp(sub(1)?),
            "bump" => Expr::Bump { p: uint(1)?, deriv: uint(2)?, arg: sub(3)? },
            "moll" => Expr::Mollified(Arc::new(Mollified::from_json(arg(1)?)?)),
            _ => return Err(bad()),
        })
    }
}

fn exp_bound(u: &Expr) -> Bound {
    match u.to_gauge(&[]) {
        Some(g) => match g.leading() {
            Some((c, a)) if a.is_negative() => {
                if c.is_negative() {
                    Bound::Negligible
                } else {
                    Bound::Unknown
                }
            }
            _ => Bound::Exponent(Q::zero()),
        },
        None => match u.asymptotic_bound() {
            Bound::Exponent(a) if !a.is_negative() => Bound::Exponent(Q::zero()),
            Bound::Negligible => Bound::Exponent(Q::zero()),
            _ => Bound::Unknown,
        },
    }
}

/// Exact value of the `d`-th bump derivative at a rational point.
pub fn bump_value(p: u32, d: u32, u: &Q) -> Q {
    if u.abs() >= Q::one() {
        Q::zero()
    } else {
        bump_poly(p, d).eval(std::slice::from_ref(u))
    }
}

#[derive(Clone, Copy)]
enum TaylorKind {
    Sin,
    Cos,
    Exp,
}

/// Series of `sin`, `cos`, `exp` at an argument with no finite nonzero
/// standard part; `None` otherwise.
fn taylor(g: &GaugeExpr, order: &Q, kind: TaylorKind) -> Option<GaugeExpr> {
    if g.is_zero() && g.is_exact() {
        return Some(match kind {
            TaylorKind::Sin => GaugeExpr::zero(),
            _ => GaugeExpr::one(),
        });
    }
    let a = g.leading_exponent()?;
    if !a.is_positive() {
        return None;
    }
    let mut acc = GaugeExpr::zero().truncate(order);
    let mut pow = GaugeExpr::one();
    let mut fact = Q::one();
    let mut k: i64 = 0;
    loop {
        if k > 0 {
            pow = pow.mul(g).truncate(order);
            fact *= q(k);
        }
        if pow.is_zero() {
            break;
        }
        let coeff = match (kind, k % 4) {
            (TaylorKind::Exp, _) => Some(Q::one()),
            (TaylorKind::Sin, 1) | (TaylorKind::Cos, 0) => Some(Q::one()),
            (TaylorKind::Sin, 3) | (TaylorKind::Cos, 2) => Some(q(-1)),
            _ => None,
        };
        if let Some(c) = coeff {
            acc = acc.add(&pow.scale(&(c / &fact)));
        }
        k += 1;
    }
    Some(acc)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.is_integer() && !c.is_negative() {
                    write!(f, "{}", fmt_q(c))
                } else {
                    write!(f, "({})", fmt_q(c))
                }
            }
            Expr::Var(i) => match i {
                0 => write!(f, "x"),
                1 => write!(f, "y"),
                2 => write!(f, "z"),
                _ => write!(f, "x{}", i + 1),
            },
            Expr::Rho(a) => {
                if a.is_one() {
                    write!(f, "rho")
                } else {
                    write!(f, "rho^({})", fmt_q(a))
                }
            }
            Expr::Add(ts) => {
                let parts: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
                write!(f, "{}", parts.join(" + "))
            }
            Expr::Mul(fs) => {
                let parts: Vec<String> = fs
                    .iter()
                    .map(|t| if matches!(t, Expr::Add(_)) { format!("({t})") } else { t.to_string() })
                    .collect();
                write!(f, "{}", parts.join("*"))
            }
            Expr::Pow(b, k) => match **b {
                Expr::Var(_) | Expr::Sin(_) | Expr::Cos(_) | Expr::Exp(_) | Expr::Bump { .. } => write!(f, "{b}^{k}"),
                _ => write!(f, "({b})^{k}"),
            },
            Expr::Sin(u) => write!(f, "sin({u})"),
            Expr::Cos(u) => write!(f, "cos({u})"),
            Expr::Exp(u) => write!(f, "exp({u})"),
            Expr::Bump { p, deriv, arg } => write!(f, "bump({p},{deriv},{arg})"),
            Expr::Mollified(m) => write!(f, "{m}"),
        }
    }
}

/// Parses the infix syntax `x^2*sin(x/rho) + exp(-1/rho)*cos(y) - bump(8,0,x/rho)`.
///
/// Variables are `x`, `y`, `z` or `x1..xn`; `eps` is not a symbol, nets are
/// written in `rho`. Division is allowed by constants and monomials in `rho`.
pub fn parse_expr(src: &str) -> Result<Expr> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(GfError::Parse(format!("trailing input in {src:?}")));
    }
    Ok(e.normalize())
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Q),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                i += 1;
            }
            out.push(Tok::Num(parse_q(&cs[st..i].iter().collect::<String>())?));
        } else if c.is_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(GfError::Parse(format!("unexpected character {c:?} in {s:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(GfError::Parse(format!("expected {c:?} at token {}", self.pos)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(self.term()?.neg());
            } else {
                break;
            }
        }
        Ok(Expr::Add(terms))
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = Expr::Mul(vec![acc, self.unary()?]);
            } else if self.eat('/') {
                let d = self.unary()?;
                acc = Expr::Mul(vec![acc, invert_monomial(&d)?]);
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let e = self.exponent()?;
        if e.is_integer() && !e.is_negative() {
            let k = e.to_integer().to_u32().ok_or_else(|| GfError::Parse("exponent too large".into()))?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        let (c, a) = as_monomial(&base).ok_or_else(|| {
            GfError::Parse("negative or fractional powers are only allowed on rho monomials".into())
        })?;
        if !c.is_one() {
            if !e.is_integer() {
                return Err(GfError::Parse("fractional power of a non-unit coefficient".into()));
            }
            let k = e.to_integer().to_i32().ok_or_else(|| GfError::Parse("exponent too large".into()))?;
            let ck = if k >= 0 { num_traits::pow(c, k as usize) } else { Q::one() / num_traits::pow(c, (-k) as usize) };
            return Ok(Expr::Mul(vec![Expr::Const(ck), Expr::Rho(a * e)]));
        }
        Ok(Expr::Rho(a * e))
    }

    fn exponent(&mut self) -> Result<Q> {
        let neg = self.eat('-');
        let v = if self.eat('(') {
            let e = self.expr()?.normalize();
            self.expect(')')?;
            match e {
                Expr::Const(c) => c,
                _ => return Err(GfError::Parse("exponent must be a rational constant".into())),
            }
        } else {
            match self.toks.get(self.pos).cloned() {
                Some(Tok::Num(n)) => {
                    self.pos += 1;
                    n
                }
                _ => return Err(GfError::Parse("expected exponent".into())),
            }
        };
        Ok(if neg { -v } else { v })
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Const(n))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "rho" => Ok(Expr::Rho(q(1))),
                    "x" => Ok(Expr::Var(0)),
                    "y" => Ok(Expr::Var(1)),
                    "z" => Ok(Expr::Var(2)),
                    "sin" | "cos" | "exp" => {
                        self.expect('(')?;
                        let u = Box::new(self.expr()?);
                        self.expect(')')?;
                        Ok(match name.as_str() {
                            "sin" => Expr::Sin(u),
                            "cos" => Expr::Cos(u),
                            _ => Expr::Exp(u),
                        })
                    }
                    "bump" => {
                        self.expect('(')?;
                        let p = self.small_int()?;
                        self.expect(',')?;
                        let d = self.small_int()?;
                        self.expect(',')?;
                        let u = self.expr()?;
                        self.expect(')')?;
                        Ok(Expr::Bump { p, deriv: d, arg: Box::new(u) })
                    }
                    s if s.starts_with('x') && s[1..].parse::<usize>().is_ok_and(|i| i >= 1) => {
                        Ok(Expr::Var(s[1..].parse::<usize>().unwrap() - 1))
                    }
                    _ => Err(GfError::Parse(format!("unknown identifier {name:?}"))),
                }
            }
            other => Err(GfError::Parse(format!("unexpected token {other:?}"))),
        }
    }

    fn small_int(&mut self) -> Result<u32> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(n)) if n.is_integer() => {
                self.pos += 1;
                n.to_integer().to_u32().ok_or_else(|| GfError::Parse("integer too large".into()))
            }
            _ => Err(GfError::Parse("expected a natural number".into())),
        }
    }
}

/// `c * rho^a` for a normalized monomial tree.
fn as_monomial(e: &Expr) -> Option<(Q, Q)> {
    let nf = e.nf();
    if nf.len() != 1 {
        return None;
    }
    let (m, c) = nf.into_iter().next()?;
    m.atoms.is_empty().then_some((c, m.rho))
}

fn invert_monomial(d: &Expr) -> Result<Expr> {
    match as_monomial(d) {
        Some((c, a)) if !c.is_zero() => Ok(Expr::Mul(vec![Expr::Const(Q::one() / c), Expr::Rho(-a)])),
        _ => Err(GfError::Parse(format!("cannot divide by {d}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::parse_gauge_expr;
    use crate::rational::qr;

    fn e(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    #[test]
    fn normal_form_cancels() {
        let f = e("x^2*sin(x/rho) + rho");
        let h = e("exp(-1/rho)*sin(x)");
        assert_eq!(f.add(&h).sub(&f), h);
        assert_eq!(e("(x+1)^2 - x^2 - 2*x"), Expr::int(1));
        assert_eq!(e("rho^2/rho"), Expr::Rho(q(1)));
    }

    #[test]
    fn derivatives() {
        assert_eq!(e("x^3").derivative(0), e("3*x^2"));
        assert_eq!(e("sin(x/rho)").derivative(0), e("cos(x/rho)/rho"));
        assert_eq!(e("x*y").partial(&[1, 1]), Expr::int(1));
        // mixed partials commute structurally
        let f = e("sin(x*y) + exp(x)*y^3");
        assert_eq!(f.partial(&[1, 0]).partial(&[0, 1]), f.partial(&[0, 1]).partial(&[1, 0]));
    }

    #[test]
    fn symbolic_point_values() {
        let pt = [parse_gauge_expr("rho^-1").unwrap()];
        assert_eq!(e("x^2").to_gauge(&pt).unwrap(), parse_gauge_expr("rho^-2").unwrap());
        assert!(e("sin(x)").to_gauge(&pt).is_none());
        let small = [parse_gauge_expr("rho").unwrap()];
        let s = e("sin(x)").to_gauge(&small).unwrap();
        assert_eq!(s.terms()[..2], parse_gauge_expr("rho - 1/6*rho^3").unwrap().terms()[..]);
    }

    #[test]
    fn bounds() {
        assert_eq!(e("exp(-1/rho)*x").asymptotic_bound(), Bound::Negligible);
        assert_eq!(e("exp(1/rho)*x").asymptotic_bound(), Bound::Unknown);
        assert_eq!(e("sin(x/rho)/rho^2 + 3").asymptotic_bound(), Bound::Exponent(q(-2)));
    }

    #[test]
    fn exact_evaluation_and_bumps() {
        assert_eq!(e("bump(2,0,x)").eval_q(&[q(0)], &q(1)).unwrap(), qr(15, 16));
        assert_eq!(e("bump(2,0,x)").eval_q(&[q(2)], &q(1)).unwrap(), q(0));
        assert_eq!(e("x/rho + rho^2").eval_q(&[q(3)], &qr(1, 2)).unwrap(), qr(25, 4));
        assert_eq!(e("bump(8,1,x)").smoothness_budget(), Some(5));
        assert_eq!(e("sin(x)").smoothness_budget(), None);
    }

    #[test]
    fn json_round_trip() {
        let f = e("x^2*sin(x/rho) + exp(-1/rho)*cos(y) + bump(4,1,x/rho)");
        assert_eq!(Expr::from_json(&f.to_json()).unwrap(), f);
        assert_eq!(parse_expr(&f.to_string()).unwrap(), f);
    }
}
