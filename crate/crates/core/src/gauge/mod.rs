//! The ring of generalized numbers over a gauge: symbolic series bodies with
//! exact decisions and opaque nets with sampled decisions.

mod fit;
mod series;

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

pub use fit::{
    classify_samples, default_schedule, least_squares, Certainty, Class, Classification, FitConfig,
    LineFit, Moderate,
};
pub use series::{parse_gauge_expr, GaugeExpr};

use crate::error::{GfError, Result};
use crate::expr::{Bound, Expr};
use crate::rational::{ceil_i64, fmt_q, parse_q, q, to_f64, Q};

/// The scale `rho_eps`. `Power(p)` is `eps^p`; `Table` interpolates samples
/// log-linearly.
#[derive(Clone, Debug, PartialEq)]
pub enum Gauge {
    Power(Q),
    Table(Vec<(f64, f64)>),
}

impl Default for Gauge {
    fn default() -> Self {
        Gauge::Power(q(1))
    }
}

impl Gauge {
    pub fn power(p: Q) -> Result<Gauge> {
        if !p.is_positive() {
            return Err(GfError::Parse(format!("gauge exponent must be positive, got {}", fmt_q(&p))));
        }
        Ok(Gauge::Power(p))
    }

    /// Samples `(eps, rho_eps)`; values must be positive and shrink with `eps`.
    pub fn table(mut samples: Vec<(f64, f64)>) -> Result<Gauge> {
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        if samples.len() < 2 {
            return Err(GfError::Parse("gauge table needs at least two samples".into()));
        }
        for w in samples.windows(2) {
            if !(w[0].0 > 0.0 && w[0].1 > 0.0 && w[0].0 < w[1].0 && w[0].1 < w[1].1) {
                return Err(GfError::Parse("gauge table must be positive and increasing in eps".into()));
            }
        }
        Ok(Gauge::Table(samples))
    }

    pub fn rho(&self, eps: f64) -> f64 {
        match self {
            Gauge::Power(p) => eps.powf(to_f64(p)),
            Gauge::Table(t) => {
                let le = eps.ln();
                let i = t.partition_point(|(e, _)| *e < eps).clamp(1, t.len() - 1);
                let (e0, r0) = t[i - 1];
                let (e1, r1) = t[i];
                let s = (r1.ln() - r0.ln()) / (e1.ln() - e0.ln());
                (r0.ln() + s * (le - e0.ln())).exp()
            }
        }
    }

    /// Exact gauge value for integral power gauges.
    pub fn rho_q(&self, eps: &Q) -> Option<Q> {
        match self {
            Gauge::Power(p) if p.is_integer() && p.is_positive() => {
                let e: usize = num_traits::ToPrimitive::to_usize(&p.to_integer())?;
                Some(num_traits::pow(eps.clone(), e))
            }
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Gauge::Power(p) => json!({ "power": fmt_q(p) }),
            Gauge::Table(t) => json!({ "table": t }),
        }
    }

    pub fn from_json(v: &Value) -> Result<Gauge> {
        if let Some(p) = v.get("power").and_then(Value::as_str) {
            return Gauge::power(parse_q(p)?);
        }
        if let Some(t) = v.get("table") {
            let t: Vec<(f64, f64)> = serde_json::from_value(t.clone())
                .map_err(|e| GfError::Parse(format!("gauge table: {e}")))?;
            return Gauge::table(t);
        }
        Err(GfError::Parse(format!("bad gauge {v}")))
    }
}

impl fmt::Display for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gauge::Power(p) => write!(f, "eps^{}", fmt_q(p)),
            Gauge::Table(t) => write!(f, "table[{}]", t.len()),
        }
    }
}

pub type NetFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum NetSource {
    /// An expression in `rho` only.
    Tree(Expr),
    /// A raw map `eps -> x_eps`.
    Closure { f: NetFn, label: String },
}

/// A net known only through an evaluator, sampled on `schedule`.
#[derive(Clone)]
pub struct OpaqueNet {
    pub source: NetSource,
    pub schedule: Vec<f64>,
}

impl fmt::Debug for OpaqueNet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            NetSource::Tree(e) => write!(f, "OpaqueNet({e})"),
            NetSource::Closure { label, .. } => write!(f, "OpaqueNet(<{label}>)"),
        }
    }
}

impl fmt::Display for OpaqueNet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            NetSource::Tree(e) => write!(f, "{e}"),
            NetSource::Closure { label, .. } => write!(f, "<{label}>"),
        }
    }
}

impl OpaqueNet {
    pub fn tree(e: Expr) -> Self {
        OpaqueNet { source: NetSource::Tree(e), schedule: default_schedule() }
    }

    pub fn closure(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        OpaqueNet {
            source: NetSource::Closure { f: Arc::new(f), label: label.into() },
            schedule: default_schedule(),
        }
    }

    pub fn eval(&self, eps: f64, gauge: &Gauge) -> f64 {
        match &self.source {
            NetSource::Tree(e) => e.eval_f64(&[], gauge.rho(eps)),
            NetSource::Closure { f, .. } => f(eps),
        }
    }

    fn as_fn(&self, gauge: &Gauge) -> NetFn {
        let me = self.clone();
        let g = gauge.clone();
        Arc::new(move |e| me.eval(e, &g))
    }
}

#[derive(Clone, Debug)]
pub enum Body {
    Series(GaugeExpr),
    Opaque(OpaqueNet),
}

/// An element `[x_eps]` of the ring of generalized numbers.
#[derive(Clone, Debug)]
pub struct GeneralizedNumber {
    pub body: Body,
    pub gauge: Gauge,
}

impl From<GaugeExpr> for GeneralizedNumber {
    fn from(g: GaugeExpr) -> Self {
        GeneralizedNumber::series(g, Gauge::default())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RingOp {
    Add,
    Sub,
    Mul,
}

impl GeneralizedNumber {
    pub fn series(g: GaugeExpr, gauge: Gauge) -> Self {
        GeneralizedNumber { body: Body::Series(g), gauge }
    }

    pub fn opaque(net: OpaqueNet, gauge: Gauge) -> Self {
        GeneralizedNumber { body: Body::Opaque(net), gauge }
    }

    /// Wraps a tree in `rho`, keeping it symbolic when it reduces to a series.
    pub fn from_tree(e: Expr, gauge: Gauge) -> Self {
        let e = e.normalize();
        match e.to_gauge(&[]) {
            Some(g) if g.is_exact() => GeneralizedNumber::series(g, gauge),
            _ => GeneralizedNumber::opaque(OpaqueNet::tree(e), gauge),
        }
    }

    pub fn as_series(&self) -> Option<&GaugeExpr> {
        match &self.body {
            Body::Series(g) => Some(g),
            Body::Opaque(_) => None,
        }
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self.body, Body::Series(_))
    }

    fn tree(&self) -> Option<Expr> {
        match &self.body {
            Body::Series(g) => Some(Expr::from_gauge_expr(g)),
            Body::Opaque(OpaqueNet { source: NetSource::Tree(e), .. }) => Some(e.clone()),
            Body::Opaque(_) => None,
        }
    }

    /// `x_eps` at a numeric `eps`.
    pub fn sample(&self, eps: f64) -> f64 {
        match &self.body {
            Body::Series(g) => g.eval_f64(self.gauge.rho(eps)),
            Body::Opaque(n) => n.eval(eps, &self.gauge),
        }
    }

    pub fn ring_op(&self, other: &Self, op: RingOp) -> Result<Self> {
        if self.gauge != other.gauge {
            return Err(GfError::GaugeMismatch(self.gauge.to_string(), other.gauge.to_string()));
        }
        let gauge = self.gauge.clone();
        if let (Body::Series(a), Body::Series(b)) = (&self.body, &other.body) {
            let r = match op {
                RingOp::Add => a.add(b),
                RingOp::Sub => a.sub(b),
                RingOp::Mul => a.mul(b),
            };
            return Ok(GeneralizedNumber::series(r, gauge));
        }
        if let (Some(a), Some(b)) = (self.tree(), other.tree()) {
            let e = match op {
                RingOp::Add => a.add(&b),
                RingOp::Sub => a.add(&b.neg()),
                RingOp::Mul => a.mul(&b),
            };
            return Ok(GeneralizedNumber::from_tree(e, gauge));
        }
        let (fa, fb) = (self.fn_of_eps(), other.fn_of_eps());
        let f: NetFn = match op {
            RingOp::Add => Arc::new(move |e| fa(e) + fb(e)),
            RingOp::Sub => Arc::new(move |e| fa(e) - fb(e)),
            RingOp::Mul => Arc::new(move |e| fa(e) * fb(e)),
        };
        let schedule = match (&self.body, &other.body) {
            (Body::Opaque(n), _) | (_, Body::Opaque(n)) => n.schedule.clone(),
            _ => default_schedule(),
        };
        let label = format!("{op:?}");
        Ok(GeneralizedNumber::opaque(
            OpaqueNet { source: NetSource::Closure { f, label }, schedule },
            gauge,
        ))
    }

    fn fn_of_eps(&self) -> NetFn {
        match &self.body {
            Body::Series(g) => {
                let g = g.clone();
                let gauge = self.gauge.clone();
                Arc::new(move |e| g.eval_f64(gauge.rho(e)))
            }
            Body::Opaque(n) => n.as_fn(&self.gauge),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.ring_op(other, RingOp::Add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.ring_op(other, RingOp::Sub)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.ring_op(other, RingOp::Mul)
    }

    pub fn classify(&self) -> Classification {
        self.classify_with(&FitConfig::default())
    }

    pub fn classify_with(&self, cfg: &FitConfig) -> Classification {
        match &self.body {
            Body::Series(g) => classify_series(g),
            Body::Opaque(n) => {
                if let NetSource::Tree(e) = &n.source {
                    match e.asymptotic_bound() {
                        Bound::Negligible => {
                            return Classification {
                                class: Class::Zero,
                                moderate: Moderate::Yes(0),
                                certainty: Certainty::Bound,
                                slope: None,
                            }
                        }
                        Bound::Exponent(b) if b.is_positive() => {
                            return Classification {
                                class: Class::Infinitesimal,
                                moderate: Moderate::Yes(0),
                                certainty: Certainty::Bound,
                                slope: None,
                            }
                        }
                        _ => {}
                    }
                }
                let samples: Vec<(f64, f64)> =
                    n.schedule.iter().map(|&e| (self.gauge.rho(e), n.eval(e, &self.gauge))).collect();
                let mut c = classify_samples(&samples, cfg);
                if let (NetSource::Tree(e), Moderate::Undetermined | Moderate::Yes(_)) = (&n.source, c.moderate) {
                    // a proven upper bound sharpens the sampled moderateness index
                    if let Bound::Exponent(b) = e.asymptotic_bound() {
                        let n_bound = ceil_i64(&-b).max(0) as u32;
                        c.moderate = match c.moderate {
                            Moderate::Yes(k) => Moderate::Yes(k.min(n_bound)),
                            _ => Moderate::Yes(n_bound),
                        };
                    }
                }
                c
            }
        }
    }

    pub fn is_moderate(&self) -> Moderate {
        self.classify().moderate
    }

    /// `x <= y` for symbolic bodies: `y - x` is zero or has a positive
    /// leading coefficient.
    pub fn leq(&self, other: &Self) -> Result<bool> {
        match (&self.body, &other.body) {
            (Body::Series(a), Body::Series(b)) => {
                if self.gauge != other.gauge {
                    return Err(GfError::GaugeMismatch(self.gauge.to_string(), other.gauge.to_string()));
                }
                Ok(series_leq(a, b))
            }
            _ => Err(GfError::Undetermined("order comparison needs symbolic bodies".into())),
        }
    }

    pub fn invert(&self, order: &Q) -> Result<Self> {
        match &self.body {
            Body::Series(g) => Ok(GeneralizedNumber::series(g.invert(order)?, self.gauge.clone())),
            Body::Opaque(_) => Err(GfError::Undetermined("inversion needs a symbolic body".into())),
        }
    }

    pub fn to_json(&self) -> Result<Value> {
        match &self.body {
            Body::Series(g) => {
                let s = series::SeriesJson::from(g);
                Ok(json!({ "gauge": self.gauge.to_json(), "terms": s.terms, "trunc": s.trunc }))
            }
            Body::Opaque(OpaqueNet { source: NetSource::Tree(e), .. }) => {
                Ok(json!({ "gauge": self.gauge.to_json(), "opaque": e.to_json() }))
            }
            Body::Opaque(_) => Err(GfError::Unsupported("closure nets have no JSON form".into())),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let gauge = match v.get("gauge") {
            Some(g) => Gauge::from_json(g)?,
            None => Gauge::default(),
        };
        if let Some(e) = v.get("opaque") {
            return Ok(GeneralizedNumber::opaque(OpaqueNet::tree(Expr::from_json(e)?), gauge));
        }
        let s: series::SeriesJson = serde_json::from_value(json!({
            "terms": v.get("terms").cloned().unwrap_or(json!([])),
            "trunc": v.get("trunc").cloned().unwrap_or(json!("inf")),
        }))
        .map_err(|e| GfError::Parse(format!("generalized number: {e}")))?;
        Ok(GeneralizedNumber::series(GaugeExpr::try_from(s)?, gauge))
    }
}

impl fmt::Display for GeneralizedNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            Body::Series(g) => write!(f, "[{g}]"),
            Body::Opaque(n) => write!(f, "[{n}]"),
        }
    }
}

pub fn classify_series(g: &GaugeExpr) -> Classification {
    let class = match g.leading_exponent() {
        None => Class::Zero,
        Some(a) => match a.cmp(&Q::zero()) {
            Ordering::Greater => Class::Infinitesimal,
            Ordering::Equal => Class::FiniteInvertible,
            Ordering::Less => Class::Infinite,
        },
    };
    let n = g.leading_exponent().map(|a| ceil_i64(&-a).max(0) as u32).unwrap_or(0);
    Classification { class, moderate: Moderate::Yes(n), certainty: Certainty::Exact, slope: None }
}

pub fn series_leq(a: &GaugeExpr, b: &GaugeExpr) -> bool {
    let d = b.sub(a);
    d.leading().is_none_or(|(c, _)| c.is_positive())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gn(s: &str) -> GeneralizedNumber {
        parse_gauge_expr(s).unwrap().into()
    }

    #[test]
    fn classification_examples() {
        assert_eq!(gn("3*rho^-2 + rho").classify().class, Class::Infinite);
        assert_eq!(gn("rho^(1/2)").classify().class, Class::Infinitesimal);
        assert_eq!(gn("rho^-3").is_moderate(), Moderate::Yes(3));
        assert_eq!(gn("0").is_moderate(), Moderate::Yes(0));
        let big = GeneralizedNumber::opaque(OpaqueNet::closure("exp(1/eps)", |e| (1.0 / e).exp()), Gauge::default());
        let c = big.classify();
        assert_eq!((c.class, c.moderate), (Class::Infinite, Moderate::No));
        let osc = GeneralizedNumber::opaque(OpaqueNet::closure("eps sin(1/eps)", |e| e * (1.0 / e).sin()), Gauge::default());
        assert_eq!(osc.is_moderate(), Moderate::Yes(0));
    }

    #[test]
    fn order_examples() {
        assert!(gn("rho").leq(&gn("rho^(1/2)")).unwrap());
        let x = gn("2 - rho^3");
        assert!(x.leq(&x).unwrap());
        assert!(!gn("rho^-1").leq(&gn("5")).unwrap());
    }

    #[test]
    fn product_matches_sampled_values() {
        let p = gn("1 + rho").mul(&gn("1 - rho")).unwrap();
        assert_eq!(p.as_series(), gn("1 - rho^2").as_series());
        for e in [1e-2, 1e-3] {
            assert!((p.sample(e) - (1.0 + e) * (1.0 - e)).abs() < 1e-15);
        }
    }

    #[test]
    fn gauge_mismatch_is_an_error() {
        let a = GeneralizedNumber::series(GaugeExpr::one(), Gauge::Power(q(2)));
        assert!(matches!(a.add(&gn("1")), Err(GfError::GaugeMismatch(..))));
    }

    #[test]
    fn json_round_trip() {
        let x = GeneralizedNumber::series(parse_gauge_expr("3*rho^-2 + 1/2 + O(rho^4)").unwrap(), Gauge::Power(q(2)));
        let back = GeneralizedNumber::from_json(&x.to_json().unwrap()).unwrap();
        assert_eq!(back.as_series(), x.as_series());
        assert_eq!(back.gauge, x.gauge);
    }

    #[test]
    fn table_gauge_interpolates() {
        let g = Gauge::table(vec![(0.01, 0.0001), (0.1, 0.01), (1.0, 1.0)]).unwrap();
        assert!((g.rho(0.05) - 0.0025).abs() < 1e-12);
    }
}
