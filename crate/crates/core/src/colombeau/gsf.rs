//! Generalized smooth functions: a defining net, a domain of sharply
//! bounded pieces, and a record of the moderateness checks performed.

use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::Signed;
use serde::Serialize;
use serde_json::{json, Value};

use super::moderate::{indices_of_total, net_class_equal, SmoothNet, Verdict};
use super::mollify::Mollified;
use crate::error::{GfError, Result};
use crate::expr::Expr;
use crate::formal::{FormalDistribution, Interval, MultiIndex};
use crate::gauge::{Body, Certainty, Class, GaugeExpr, Gauge, GeneralizedNumber, Moderate};
use crate::rational::{fmt_q, from_f64, q, to_f64, Q};

/// A point `[x_eps]` of `R~^n`.
#[derive(Clone, Debug)]
pub struct GeneralizedPoint {
    pub coords: Vec<GeneralizedNumber>,
}

impl GeneralizedPoint {
    pub fn new(coords: Vec<GeneralizedNumber>) -> Self {
        GeneralizedPoint { coords }
    }

    pub fn from_series(coords: Vec<GaugeExpr>, gauge: &Gauge) -> Self {
        GeneralizedPoint { coords: coords.into_iter().map(|g| GeneralizedNumber::series(g, gauge.clone())).collect() }
    }

    pub fn standard(x: &[Q], gauge: &Gauge) -> Self {
        GeneralizedPoint::from_series(x.iter().map(|v| GaugeExpr::constant(v.clone())).collect(), gauge)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// The coordinates when all of them are symbolic.
    pub fn series(&self) -> Option<Vec<GaugeExpr>> {
        self.coords.iter().map(|c| c.as_series().cloned()).collect()
    }

    /// Some compact set contains the representatives for small `eps`:
    /// every coordinate is finite.
    pub fn is_compactly_supported(&self) -> Result<bool> {
        let s = self.series().ok_or_else(|| GfError::Undetermined("support of an opaque point".into()))?;
        Ok(s.iter().all(is_finite))
    }
}

impl fmt::Display for GeneralizedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

fn is_finite(g: &GaugeExpr) -> bool {
    g.leading_exponent().is_none_or(|a| !a.is_negative())
}

/// A domain piece. Membership is decided from leading terms.
#[derive(Clone, Debug, PartialEq)]
pub enum DomainPiece {
    /// The sharp ball `|x - center| < radius`.
    Ball { center: Vec<GaugeExpr>, radius: GaugeExpr },
    /// Points with finite coordinates whose standard part lies in the open
    /// box: the compactly supported points of its interior.
    Interior(Interval),
}

impl DomainPiece {
    pub fn ball(center: Vec<GaugeExpr>, radius: GaugeExpr) -> Result<Self> {
        if radius.sign() != Some(Ordering::Greater) {
            return Err(GfError::NotInvertible(format!("ball radius {radius} must be positive invertible")));
        }
        Ok(DomainPiece::Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainPiece::Ball { center, .. } => center.len(),
            DomainPiece::Interior(i) => i.dim(),
        }
    }

    pub fn contains(&self, x: &[GaugeExpr]) -> Result<bool> {
        match self {
            DomainPiece::Ball { center, radius } => {
                let mut d2 = GaugeExpr::zero();
                for (xi, ci) in x.iter().zip(center) {
                    let d = xi.sub(ci);
                    d2 = d2.add(&d.mul(&d));
                }
                match radius.mul(radius).sub(&d2).sign() {
                    Some(s) => Ok(s == Ordering::Greater),
                    None => Err(GfError::Undetermined("ball membership blocked by truncation".into())),
                }
            }
            DomainPiece::Interior(i) => Ok(x.iter().enumerate().all(|(k, g)| {
                is_finite(g) && g.standard_part().is_some_and(|s| s > i.lo(k) && s < i.hi(k))
            })),
        }
    }

    /// A standard box containing the piece's standard points.
    fn standard_box(&self) -> Option<Interval> {
        match self {
            DomainPiece::Interior(i) => Some(i.clone()),
            DomainPiece::Ball { center, radius } => {
                let r = radius.standard_part().filter(|r| r.is_positive())?;
                let c: Option<Vec<Q>> = center.iter().map(|g| if is_finite(g) { g.standard_part() } else { None }).collect();
                let c = c?;
                let lo: Vec<Q> = c.iter().map(|v| v - &r).collect();
                let hi: Vec<Q> = c.iter().map(|v| v + &r).collect();
                Interval::from_bounds(lo, hi).ok()
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            DomainPiece::Ball { center, radius } => json!({
                "ball": {
                    "center": center.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
                    "radius": radius.to_string(),
                }
            }),
            DomainPiece::Interior(i) => json!({ "interior": i.to_json() }),
        }
    }
}

/// One recorded check: moderateness of every derivative of order up to
/// `order` at `point`.
#[derive(Clone, Debug, Serialize)]
pub struct CertEntry {
    #[serde(skip)]
    pub point: Option<Vec<GaugeExpr>>,
    pub label: String,
    pub order: u32,
    pub moderate: Moderate,
    pub certainty: Certainty,
    /// Outcome of the negligible-perturbation witness after a derivative.
    pub perturbation_agrees: Option<bool>,
}

/// Append-only record shared by clones of one function.
#[derive(Debug, Default)]
pub struct Certificate {
    entries: Mutex<Vec<CertEntry>>,
}

impl Certificate {
    pub fn push(&self, e: CertEntry) {
        self.entries.lock().expect("certificate lock").push(e);
    }

    pub fn entries(&self) -> Vec<CertEntry> {
        self.entries.lock().expect("certificate lock").clone()
    }

    /// The order certified at every recorded point, if any point is recorded.
    pub fn certified_order(&self) -> Option<u32> {
        self.entries().iter().map(|e| e.order).min()
    }
}

#[derive(Clone, Debug)]
pub struct GSFunction {
    pub net: SmoothNet,
    pub domain: Vec<DomainPiece>,
    pub gauge: Gauge,
    certificate: Arc<Certificate>,
}

impl GSFunction {
    pub fn new(net: SmoothNet, domain: Vec<DomainPiece>, gauge: Gauge) -> Result<Self> {
        if domain.is_empty() {
            return Err(GfError::InvalidInterval("a generalized smooth function needs a nonempty domain".into()));
        }
        for d in &domain {
            if d.dim() != net.nvars {
                return Err(GfError::Dimension { expected: net.nvars, got: d.dim() });
            }
        }
        Ok(GSFunction { net, domain, gauge, certificate: Arc::new(Certificate::default()) })
    }

    /// Net on the interior of a standard box, default gauge.
    pub fn on_box(expr: Expr, b: &Interval) -> Result<Self> {
        GSFunction::new(SmoothNet::new(expr, b.dim())?, vec![DomainPiece::Interior(b.clone())], Gauge::default())
    }

    pub fn dim(&self) -> usize {
        self.net.nvars
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    pub fn contains(&self, x: &GeneralizedPoint) -> Result<bool> {
        if x.dim() != self.dim() {
            return Err(GfError::Dimension { expected: self.dim(), got: x.dim() });
        }
        let s = x.series().ok_or_else(|| GfError::Undetermined("domain membership of an opaque point".into()))?;
        for d in &self.domain {
            if d.contains(&s)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// A standard box inside which all sampling of this function happens.
    pub fn standard_box(&self) -> Option<Interval> {
        self.domain.iter().find_map(DomainPiece::standard_box)
    }

    /// Checks moderateness of `d^beta f` at each point for `|beta| <= order`
    /// and records the outcome. Returns the number of points certified.
    pub fn certify(&self, points: &[GeneralizedPoint], order: u32) -> Result<usize> {
        self.net.check_order(order)?;
        let mut ok = 0;
        for x in points {
            let mut worst = 0u32;
            let mut certainty = Certainty::Exact;
            for total in 0..=order {
                for beta in indices_of_total(self.dim(), total) {
                    let d = self.net.partial(&MultiIndex(beta))?;
                    let v = eval_net(&d, x, &self.gauge)?;
                    let c = v.classify();
                    match c.moderate {
                        Moderate::Yes(n) => worst = worst.max(n),
                        Moderate::No => return Err(GfError::NotModerate(x.to_string())),
                        Moderate::Undetermined => certainty = Certainty::Heuristic,
                    }
                    if c.certainty != Certainty::Exact && certainty == Certainty::Exact {
                        certainty = c.certainty;
                    }
                }
            }
            self.certificate.push(CertEntry {
                point: x.series(),
                label: x.to_string(),
                order,
                moderate: Moderate::Yes(worst),
                certainty,
                perturbation_agrees: None,
            });
            ok += 1;
        }
        Ok(ok)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "net": self.net.to_json(),
            "domain": self.domain.iter().map(DomainPiece::to_json).collect::<Vec<_>>(),
            "gauge": self.gauge.to_json(),
            "certificate": self.certificate.entries(),
        })
    }
}

impl fmt::Display for GSFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]_f", self.net)
    }
}

/// `[u_eps(x_eps)]` without domain or moderateness checks.
fn eval_net(u: &SmoothNet, x: &GeneralizedPoint, gauge: &Gauge) -> Result<GeneralizedNumber> {
    let s = x.series().ok_or_else(|| GfError::Undetermined("evaluation at an opaque point".into()))?;
    let args: Vec<Expr> = s.iter().map(Expr::from_gauge_expr).collect();
    Ok(GeneralizedNumber::from_tree(u.expr.substitute(&args), gauge.clone()))
}

/// `f(x) = [f_eps(x_eps)]`, symbolic when the tree closes over series.
pub fn gsf_eval(f: &GSFunction, x: &GeneralizedPoint) -> Result<GeneralizedNumber> {
    if !f.contains(x)? {
        return Err(GfError::OutsideDomain(x.to_string()));
    }
    let v = eval_net(&f.net, x, &f.gauge)?;
    let c = v.classify();
    if c.moderate == Moderate::No {
        return Err(GfError::NotModerate(x.to_string()));
    }
    f.certificate.push(CertEntry {
        point: x.series(),
        label: x.to_string(),
        order: 0,
        moderate: c.moderate,
        certainty: c.certainty,
        perturbation_agrees: None,
    });
    Ok(v)
}

/// The canonical negligible net `exp(-1/rho) sin(x_1 + .. + x_n)`.
pub fn negligible_perturbation(nvars: usize) -> Expr {
    let mut s = Expr::int(0);
    for i in 0..nvars {
        s = s.add(&Expr::var(i));
    }
    Expr::rho(q(-1)).neg().exp().mul(&s.sin())
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessRow {
    pub point: String,
    /// Both evaluations are the same symbolic value.
    pub exact: bool,
    pub difference_class: Class,
    pub certainty: Certainty,
    /// Fitted leading exponent of the sampled difference.
    pub slope: Option<f64>,
    pub agrees: bool,
}

/// Compares `d^alpha (f + h)` with `d^alpha f` at `x` for the canonical
/// negligible `h`.
pub fn perturbation_witness(f: &GSFunction, alpha: &MultiIndex, x: &GeneralizedPoint) -> Result<WitnessRow> {
    let perturbed = SmoothNet::new(f.net.expr.add(&negligible_perturbation(f.dim())), f.dim())?;
    let a = eval_net(&perturbed.partial(alpha)?, x, &f.gauge)?;
    let b = eval_net(&f.net.partial(alpha)?, x, &f.gauge)?;
    let exact = matches!((&a.body, &b.body), (Body::Series(p), Body::Series(r)) if p == r);
    let c = a.sub(&b)?.classify();
    Ok(WitnessRow {
        point: x.to_string(),
        exact,
        difference_class: c.class,
        certainty: c.certainty,
        slope: c.slope,
        agrees: exact || c.class == Class::Zero,
    })
}

/// At most this many certified points are re-checked by the witness.
const WITNESS_POINTS: usize = 8;

/// Symbolic `d^alpha f`. Certified points carry over with their order
/// lowered by `|alpha|`, each re-checked by the perturbation witness.
pub fn gsf_derive(f: &GSFunction, alpha: &MultiIndex) -> Result<GSFunction> {
    let net = f.net.partial(alpha)?;
    let out = GSFunction { net, domain: f.domain.clone(), gauge: f.gauge.clone(), certificate: Arc::new(Certificate::default()) };
    let a = alpha.total();
    let mut checked = 0;
    for e in f.certificate.entries() {
        if e.order < a {
            continue;
        }
        let mut agrees = None;
        if let Some(p) = &e.point {
            if checked < WITNESS_POINTS {
                let x = GeneralizedPoint::from_series(p.clone(), &f.gauge);
                agrees = Some(perturbation_witness(f, alpha, &x)?.agrees);
                checked += 1;
            }
        }
        out.certificate.push(CertEntry { order: e.order - a, perturbation_agrees: agrees, ..e });
    }
    Ok(out)
}

/// The regularization `rep * d^order mu_rho` of a 1-D formal distribution,
/// defined on the compactly supported points of its interval.
pub fn embed_distribution(t: &FormalDistribution, p: u32, gauge: Gauge) -> Result<GSFunction> {
    if t.dim() != 1 {
        return Err(GfError::Unsupported("regularization is implemented in one dimension".into()));
    }
    let m = Mollified::of_distribution(t, p)?;
    GSFunction::new(SmoothNet::new(Expr::mollified(m), 1)?, vec![DomainPiece::Interior(t.domain().clone())], gauge)
}

/// Equality in the Colombeau quotient: the difference of the nets is
/// negligible on `K` for derivatives up to `alpha_max`.
pub fn colombeau_class_equal(f: &GSFunction, g: &GSFunction, k: &Interval, alpha_max: u32) -> Result<Verdict> {
    net_class_equal(&f.net, &g.net, k, alpha_max)
}

/// Rows `eps,x,value` of `f_eps(x)` on `grid` equispaced nodes of the
/// function's standard box (1-D only).
pub fn regularization_csv(f: &GSFunction, eps: &[f64], grid: usize) -> Result<String> {
    if f.dim() != 1 {
        return Err(GfError::Unsupported("regularization curves are 1-D".into()));
    }
    if grid < 2 {
        return Err(GfError::InvalidInterval("the grid needs at least two nodes".into()));
    }
    let b = f.standard_box().ok_or_else(|| GfError::Undetermined("no standard box for the domain".into()))?;
    let (lo, hi) = (b.lo(0), b.hi(0));
    let mut out = String::from("eps,x,value\n");
    for &e in eps {
        let rho_q = from_f64(e).and_then(|eq| f.gauge.rho_q(&eq));
        for j in 0..grid {
            let x = &lo + (&hi - &lo) * q(j as i64) / q(grid as i64 - 1);
            let v = match rho_q.as_ref().and_then(|r| f.net.expr.eval_q(std::slice::from_ref(&x), r)) {
                Some(v) => to_f64(&v),
                None => f.net.expr.eval_f64(&[to_f64(&x)], f.gauge.rho(e)),
            };
            out.push_str(&format!("{e},{},{v}\n", fmt_q(&x)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::formal::{parse_distribution, PiecewisePoly};
    use crate::gauge::parse_gauge_expr;
    use crate::rational::qr;

    fn series_point(src: &str) -> GeneralizedPoint {
        GeneralizedPoint::from_series(vec![parse_gauge_expr(src).unwrap()], &Gauge::default())
    }

    fn square() -> GSFunction {
        let b = DomainPiece::ball(vec![GaugeExpr::zero()], GaugeExpr::rho_pow(q(-2))).unwrap();
        GSFunction::new(SmoothNet::new(parse_expr("x^2").unwrap(), 1).unwrap(), vec![b], Gauge::default()).unwrap()
    }

    #[test]
    fn square_at_an_infinite_point() {
        let f = square();
        let v = gsf_eval(&f, &series_point("rho^-1")).unwrap();
        assert_eq!(v.as_series().unwrap(), &parse_gauge_expr("rho^-2").unwrap());
        let d = gsf_derive(&f, &MultiIndex(vec![1])).unwrap();
        let v = gsf_eval(&d, &series_point("rho^-1")).unwrap();
        assert_eq!(v.as_series().unwrap(), &parse_gauge_expr("2*rho^-1").unwrap());
        assert!(matches!(gsf_eval(&f, &series_point("rho^-3")), Err(GfError::OutsideDomain(_))));
        let d0 = gsf_derive(&f, &MultiIndex(vec![0])).unwrap();
        assert_eq!(d0.net, f.net);
    }

    #[test]
    fn embedded_delta() {
        let i = Interval::interval_1d(q(-2), q(2)).unwrap();
        let t = parse_distribution("((2),ramp)", &i).unwrap();
        let f = embed_distribution(&t, 2, Gauge::default()).unwrap();
        let v = gsf_eval(&f, &series_point("0")).unwrap();
        assert_eq!(v.as_series().unwrap(), &parse_gauge_expr("15/16*rho^-1").unwrap());
        let v = gsf_eval(&f, &series_point("1")).unwrap();
        assert!(v.as_series().unwrap().is_zero());
        assert!(gsf_eval(&f, &series_point("2")).is_err());
        assert!(gsf_derive(&f, &MultiIndex(vec![1])).is_err());
    }

    #[test]
    fn embedded_polynomial_is_reproduced_up_to_rho() {
        let i = Interval::symmetric(1);
        let t = parse_distribution("x^3 - x", &i).unwrap();
        let f = embed_distribution(&t, 8, Gauge::default()).unwrap();
        let v = gsf_eval(&f, &series_point("1/2")).unwrap();
        let g = v.as_series().unwrap();
        assert_eq!(g.standard_part().unwrap(), qr(1, 8) - qr(1, 2));
        let zero = embed_distribution(&FormalDistribution::zero(i), 8, Gauge::default()).unwrap();
        assert!(zero.net.expr.is_zero());
    }

    #[test]
    fn heaviside_derivative_matches_delta() {
        let i = Interval::symmetric(1);
        let h = embed_distribution(&parse_distribution("((1),ramp)", &i).unwrap(), 8, Gauge::default()).unwrap();
        let d = embed_distribution(&parse_distribution("((2),ramp)", &i).unwrap(), 8, Gauge::default()).unwrap();
        let dh = gsf_derive(&h, &MultiIndex(vec![1])).unwrap();
        let k = Interval::interval_1d(qr(-1, 2), qr(1, 2)).unwrap();
        assert_eq!(colombeau_class_equal(&dh, &d, &k, 2).unwrap(), Verdict::Yes);
        assert_eq!(colombeau_class_equal(&h, &d, &k, 0).unwrap(), Verdict::No);
    }

    #[test]
    fn perturbation_is_invisible() {
        let f = GSFunction::on_box(parse_expr("sin(x)*x^2 + rho*x").unwrap(), &Interval::symmetric(1)).unwrap();
        let g = GSFunction::on_box(f.net.expr.add(&negligible_perturbation(1)), &Interval::symmetric(1)).unwrap();
        let k = Interval::interval_1d(qr(-1, 2), qr(1, 2)).unwrap();
        assert_eq!(colombeau_class_equal(&f, &g, &k, 3).unwrap(), Verdict::Yes);
        let x = series_point("1/3 + rho");
        f.certify(std::slice::from_ref(&x), 2).unwrap();
        let d = gsf_derive(&f, &MultiIndex(vec![1])).unwrap();
        let e = d.certificate().entries();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].order, 1);
        assert_eq!(e[0].perturbation_agrees, Some(true));
    }

    #[test]
    fn csv_rows() {
        let i = Interval::symmetric(1);
        let t = FormalDistribution::lambda(PiecewisePoly::ramp(i));
        let f = embed_distribution(&t, 4, Gauge::default()).unwrap();
        let csv = regularization_csv(&f, &[0.5, 0.25], 5).unwrap();
        assert_eq!(csv.lines().count(), 11);
        assert!(csv.starts_with("eps,x,value\n0.5,-1,"));
    }
}
