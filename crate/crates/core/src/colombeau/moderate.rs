//! Moderateness and negligibility of nets on a compact box.
//!
//! Polynomial trees in `(x, rho^q)` get exact verdicts from their leading
//! `rho`-exponents. Other trees first try the structural bound of
//! [`Expr::asymptotic_bound`] and fall back to sampling `sup_K |d^alpha u|`
//! over a point grid and the epsilon schedule.

use std::fmt;

use num_traits::Signed;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{GfError, Result};
use crate::expr::{Bound, Expr};
use crate::formal::{Interval, MultiIndex};
use crate::gauge::{classify_samples, default_schedule, Certainty, Class, FitConfig, Gauge, Moderate};
use crate::rational::{ceil_i64, q, to_f64, Q};

/// A net `(u_eps)` written as an expression in `x_1..x_n` and `rho`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SmoothNet {
    pub expr: Expr,
    pub nvars: usize,
}

impl SmoothNet {
    pub fn new(expr: Expr, nvars: usize) -> Result<Self> {
        let a = expr.arity();
        if a > nvars {
            return Err(GfError::Dimension { expected: nvars, got: a });
        }
        Ok(SmoothNet { expr: expr.normalize(), nvars })
    }

    /// `None` when every derivative order is available.
    pub fn smoothness_budget(&self) -> Option<u32> {
        self.expr.smoothness_budget()
    }

    pub fn check_order(&self, order: u32) -> Result<()> {
        match self.smoothness_budget() {
            Some(b) if order > b => Err(GfError::SmoothnessBudget { requested: order, budget: b }),
            _ => Ok(()),
        }
    }

    pub fn partial(&self, alpha: &MultiIndex) -> Result<SmoothNet> {
        if alpha.dim() != self.nvars {
            return Err(GfError::Dimension { expected: self.nvars, got: alpha.dim() });
        }
        self.check_order(alpha.total())?;
        Ok(SmoothNet { expr: self.expr.partial(&alpha.0), nvars: self.nvars })
    }

    pub fn add(&self, o: &SmoothNet) -> SmoothNet {
        SmoothNet { expr: self.expr.add(&o.expr), nvars: self.nvars.max(o.nvars) }
    }

    pub fn sub(&self, o: &SmoothNet) -> SmoothNet {
        SmoothNet { expr: self.expr.sub(&o.expr), nvars: self.nvars.max(o.nvars) }
    }

    pub fn mul(&self, o: &SmoothNet) -> SmoothNet {
        SmoothNet { expr: self.expr.mul(&o.expr), nvars: self.nvars.max(o.nvars) }
    }

    pub fn to_json(&self) -> Value {
        json!({ "nvars": self.nvars, "expr": self.expr.to_json() })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let n = v.get("nvars").and_then(Value::as_u64).ok_or_else(|| GfError::Parse("net: missing nvars".into()))?;
        let e = Expr::from_json(v.get("expr").ok_or_else(|| GfError::Parse("net: missing expr".into()))?)?;
        SmoothNet::new(e, n as usize)
    }
}

impl fmt::Display for SmoothNet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)
    }
}

/// Three-valued answer with the tier that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    Undetermined,
}

/// Sampling parameters for trees without an exact verdict.
#[derive(Clone, Debug)]
pub struct SampleConfig {
    pub gauge: Gauge,
    pub schedule: Vec<f64>,
    /// Grid nodes per axis, endpoints included; shrunk in high dimension.
    pub points_per_axis: usize,
    pub fit: FitConfig,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig { gauge: Gauge::default(), schedule: default_schedule(), points_per_axis: 9, fit: FitConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderVerdict {
    pub alpha: Vec<u32>,
    pub moderate: Moderate,
    pub negligible: Verdict,
    pub certainty: Certainty,
    /// Exact or fitted leading exponent of `sup_K |d^alpha u|`.
    pub exponent: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetReport {
    pub per_order: Vec<OrderVerdict>,
}

impl NetReport {
    /// `Yes(N)` with the largest index when every order is moderate.
    pub fn moderate(&self) -> Moderate {
        let mut worst = 0;
        for v in &self.per_order {
            match v.moderate {
                Moderate::Yes(n) => worst = worst.max(n),
                Moderate::No => return Moderate::No,
                Moderate::Undetermined => return Moderate::Undetermined,
            }
        }
        Moderate::Yes(worst)
    }

    pub fn negligible(&self) -> Verdict {
        if self.per_order.iter().any(|v| v.negligible == Verdict::No) {
            Verdict::No
        } else if self.per_order.iter().all(|v| v.negligible == Verdict::Yes) {
            Verdict::Yes
        } else {
            Verdict::Undetermined
        }
    }

    /// The weakest tier used.
    pub fn certainty(&self) -> Certainty {
        let rank = |c: Certainty| match c {
            Certainty::Exact => 0,
            Certainty::Bound => 1,
            Certainty::Heuristic => 2,
        };
        self.per_order.iter().map(|v| v.certainty).max_by_key(|c| rank(*c)).unwrap_or(Certainty::Exact)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).unwrap_or(Value::Null)
    }
}

pub fn net_is_moderate_on(u: &SmoothNet, k: &Interval, alpha_max: u32) -> Result<NetReport> {
    analyze_net(u, k, alpha_max, &SampleConfig::default())
}

pub fn net_is_negligible_on(u: &SmoothNet, k: &Interval, alpha_max: u32) -> Result<Verdict> {
    Ok(analyze_net(u, k, alpha_max, &SampleConfig::default())?.negligible())
}

/// Verdicts for every `|alpha| <= alpha_max`.
pub fn analyze_net(u: &SmoothNet, k: &Interval, alpha_max: u32, cfg: &SampleConfig) -> Result<NetReport> {
    if k.dim() != u.nvars {
        return Err(GfError::Dimension { expected: u.nvars, got: k.dim() });
    }
    u.check_order(alpha_max)?;
    let grid = sample_grid(k, cfg.points_per_axis);
    let mut per_order = Vec::new();
    for total in 0..=alpha_max {
        for alpha in indices_of_total(u.nvars, total) {
            let e = u.expr.partial(&alpha);
            per_order.push(order_verdict(&e, u.nvars, alpha, &grid, cfg));
        }
    }
    Ok(NetReport { per_order })
}

fn order_verdict(e: &Expr, nvars: usize, alpha: Vec<u32>, grid: &[Vec<f64>], cfg: &SampleConfig) -> OrderVerdict {
    if let Some(coeffs) = e.to_xpoly(nvars) {
        // sup_K |sum_beta c_beta(rho) x^beta| ~ rho^{min_beta lead(c_beta)}
        // because the monomials are independent on a box with interior
        let lead = coeffs.values().filter_map(|c| c.leading_exponent().cloned()).min();
        return match lead {
            None => OrderVerdict {
                alpha,
                moderate: Moderate::Yes(0),
                negligible: Verdict::Yes,
                certainty: Certainty::Exact,
                exponent: None,
            },
            Some(a) => OrderVerdict {
                alpha,
                moderate: Moderate::Yes(index_of(&a)),
                negligible: Verdict::No,
                certainty: Certainty::Exact,
                exponent: Some(crate::rational::fmt_q(&a)),
            },
        };
    }
    let bound = e.asymptotic_bound();
    if bound == Bound::Negligible {
        return OrderVerdict {
            alpha,
            moderate: Moderate::Yes(0),
            negligible: Verdict::Yes,
            certainty: Certainty::Bound,
            exponent: None,
        };
    }
    let samples: Vec<(f64, f64)> = cfg
        .schedule
        .iter()
        .map(|&eps| {
            let rho = cfg.gauge.rho(eps);
            let sup = grid.iter().map(|x| e.eval_f64(x, rho).abs()).fold(0.0f64, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) });
            (rho, sup)
        })
        .collect();
    let c = classify_samples(&samples, &cfg.fit);
    let negligible = match c.class {
        Class::Zero => Verdict::Yes,
        Class::Undetermined => Verdict::Undetermined,
        _ => Verdict::No,
    };
    let exponent = c.slope.map(|s| format!("{s:.3}"));
    match bound {
        Bound::Exponent(b) => {
            // a proven upper bound settles moderateness
            OrderVerdict { alpha, moderate: Moderate::Yes(index_of(&b)), negligible, certainty: Certainty::Bound, exponent }
        }
        _ => OrderVerdict { alpha, moderate: c.moderate, negligible, certainty: Certainty::Heuristic, exponent },
    }
}

/// Smallest `N >= 0` with `rho^a = O(rho^{-N})`.
fn index_of(a: &Q) -> u32 {
    if a.is_negative() {
        ceil_i64(&-a.clone()) as u32
    } else {
        0
    }
}

/// All multi-indices in `n` variables with `|alpha| = total`.
pub fn indices_of_total(n: usize, total: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in indices_of_total(n - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Tensor grid on the closed box with at most about 1000 nodes.
pub fn sample_grid(k: &Interval, per_axis: usize) -> Vec<Vec<f64>> {
    let n = k.dim();
    let mut m = per_axis.max(2);
    while n > 1 && m > 2 && m.pow(n as u32) > 1000 {
        m -= 1;
    }
    let axes: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let (lo, hi) = (k.lo(i), k.hi(i));
            (0..m).map(|j| to_f64(&(&lo + (&hi - &lo) * q(j as i64) / q(m as i64 - 1)))).collect()
        })
        .collect();
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in &axes {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |v| {
                    let mut p = p.clone();
                    p.push(*v);
                    p
                })
            })
            .collect();
    }
    out
}

/// `sup_K |u_eps| -> 0`: exact for polynomial nets, sampled otherwise.
pub fn net_is_infinitesimal_on(u: &SmoothNet, k: &Interval) -> Result<Verdict> {
    if k.dim() != u.nvars {
        return Err(GfError::Dimension { expected: u.nvars, got: k.dim() });
    }
    if let Some(coeffs) = u.expr.to_xpoly(u.nvars) {
        let lead = coeffs.values().filter_map(|c| c.leading_exponent().cloned()).min();
        return Ok(Verdict::from_bool(lead.is_none_or(|a| a.is_positive())));
    }
    if u.expr.asymptotic_bound() == Bound::Negligible {
        return Ok(Verdict::Yes);
    }
    let cfg = SampleConfig::default();
    let grid = sample_grid(k, cfg.points_per_axis);
    let samples: Vec<(f64, f64)> = cfg
        .schedule
        .iter()
        .map(|&eps| {
            let rho = cfg.gauge.rho(eps);
            (rho, grid.iter().map(|x| u.expr.eval_f64(x, rho).abs()).fold(0.0f64, f64::max))
        })
        .collect();
    Ok(match classify_samples(&samples, &cfg.fit).class {
        Class::Zero | Class::Infinitesimal => Verdict::Yes,
        Class::Undetermined => Verdict::Undetermined,
        _ => Verdict::No,
    })
}

/// `F.net - G.net` negligible on `K` up to `alpha_max`.
pub fn net_class_equal(f: &SmoothNet, g: &SmoothNet, k: &Interval, alpha_max: u32) -> Result<Verdict> {
    let d = f.sub(g);
    let budget_ok = |n: &SmoothNet| n.check_order(alpha_max);
    budget_ok(f)?;
    budget_ok(g)?;
    Ok(analyze_net(&SmoothNet { expr: d.expr, nvars: k.dim().max(d.nvars) }, k, alpha_max, &SampleConfig::default())?
        .negligible())
}

impl Verdict {
    pub fn from_bool(b: bool) -> Verdict {
        if b {
            Verdict::Yes
        } else {
            Verdict::No
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn net(src: &str, n: usize) -> SmoothNet {
        SmoothNet::new(parse_expr(src).unwrap(), n).unwrap()
    }

    fn k1() -> Interval {
        Interval::interval_1d(q(-1), q(1)).unwrap()
    }

    #[test]
    fn oscillation_is_moderate_with_index_alpha() {
        let u = net("sin(x*rho^-1)", 1);
        let r = net_is_moderate_on(&u, &k1(), 3).unwrap();
        for (i, v) in r.per_order.iter().enumerate() {
            assert_eq!(v.moderate, Moderate::Yes(i as u32));
        }
    }

    #[test]
    fn exponential_growth_is_not_moderate() {
        let u = net("exp(rho^-1)*x", 1);
        assert_eq!(net_is_moderate_on(&u, &k1(), 0).unwrap().moderate(), Moderate::No);
    }

    #[test]
    fn exponential_decay_is_negligible() {
        let u = net("exp(-rho^-1)*sin(x)", 1);
        assert_eq!(net_is_negligible_on(&u, &k1(), 4).unwrap(), Verdict::Yes);
        let p = net("rho^3*x^2 + rho*x", 1);
        let r = net_is_moderate_on(&p, &k1(), 2).unwrap();
        assert_eq!(r.certainty(), Certainty::Exact);
        assert_eq!(r.negligible(), Verdict::No);
        assert_eq!(net_is_negligible_on(&net("x - x", 1), &k1(), 2).unwrap(), Verdict::Yes);
    }

    #[test]
    fn budget_is_checked() {
        let u = net("bump(4, 0, x)", 1);
        assert!(net_is_moderate_on(&u, &k1(), 2).is_ok());
        assert!(matches!(net_is_moderate_on(&u, &k1(), 3), Err(GfError::SmoothnessBudget { .. })));
    }

    #[test]
    fn index_enumeration() {
        assert_eq!(indices_of_total(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(sample_grid(&Interval::symmetric(2), 3).len(), 9);
    }
}
