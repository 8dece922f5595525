//! Input resolution and the verbs. An argument is a workspace binding
//! (`@name`), a JSON document (leading `{`), or mini-syntax.

use gfcalc_core::colombeau::{
    colombeau_class_equal, embed_distribution, gsf_derive, gsf_eval, regularization_csv, DomainPiece, GSFunction,
    GeneralizedPoint, SmoothNet, Verdict,
};
use gfcalc_core::expr::parse_expr;
use gfcalc_core::formal::{parse_distribution, parse_piecewise, FormalDistribution, Interval, MultiIndex, PiecewisePoly};
use gfcalc_core::gauge::{parse_gauge_expr, Classification, Gauge, GeneralizedNumber, Moderate};
use gfcalc_core::rational::{fmt_q, parse_q, to_f64, Q};
use gfcalc_core::sheaf::{glue_formal, sheaf_laws_check, CompatibleFamily, FdPresheaf, GlueOutcome, LawsReport};
use gfcalc_core::universal::{
    build_psi, check_q_laws, check_quotient_ring_conditions, reference_q_instance, reference_tau_instances,
    ColombeauTarget, EnumConfig, IdentityTarget, Report, ShiftedTarget,
};
use gfcalc_core::{GfError, Result};
use serde_json::{json, Value};

use crate::workspace::{Config, Workspace};
use crate::{DistOp, GnOp, GsfOp, Opts, PlotOp, SheafOp, TargetKind, TauKind, Verb, VerifyOp};

const DEFAULT_SAMPLE_EPS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// The output document, its plain-text rendering and the exit code.
/// `value` is the domain object produced, when there is one.
pub struct Output {
    pub doc: Value,
    pub text: String,
    pub code: u8,
    pub value: Option<Value>,
}

impl Output {
    fn object(value: Value, text: String) -> Self {
        Output { doc: value.clone(), text, code: 0, value: Some(value) }
    }

    fn plain(doc: Value, text: String) -> Self {
        Output { doc, text, code: 0, value: None }
    }

    fn verdict(doc: Value, text: String, pass: bool) -> Self {
        Output { doc, text, code: if pass { 0 } else { 1 }, value: None }
    }
}

pub struct Ctx<'a> {
    ws: &'a Workspace,
    cfg: Config,
    float: bool,
    gauge: Gauge,
    domain: Interval,
}

/// `lo,hi` per axis with axes separated by `;`; the display form
/// `(lo,hi)x(lo,hi)` is accepted as well.
pub fn parse_interval(s: &str) -> Result<Interval> {
    let norm = s.replace(")x(", ";");
    let norm = norm.trim().trim_start_matches('(').trim_end_matches(')');
    let (mut lo, mut hi) = (Vec::new(), Vec::new());
    for axis in norm.split(';') {
        let (a, b) = axis
            .split_once(',')
            .ok_or_else(|| GfError::Parse(format!("interval axis {axis:?} must be lo,hi")))?;
        lo.push(parse_q(a.trim())?);
        hi.push(parse_q(b.trim())?);
    }
    Interval::from_bounds(lo, hi)
}

fn parse_json(s: &str) -> Result<Value> {
    serde_json::from_str(s).map_err(|e| GfError::Parse(format!("JSON input: {e}")))
}

fn report_text(r: &Report) -> String {
    let mut s = format!("{} [{}]: {}\n", r.check, r.subject, if r.pass { "PASS" } else { "FAIL" });
    for c in &r.conditions {
        s += &format!("  {} {} ({} cases)\n", if c.pass { "ok  " } else { "FAIL" }, c.name, c.cases);
        for v in &c.violations {
            s += &format!("      {v}\n");
        }
    }
    s + &format!("note: {}\n", r.note)
}

fn laws_text(r: &LawsReport) -> String {
    let mut s = format!("sheaf laws [level {}, seed {}]: {}\n", r.level, r.seed, if r.pass { "PASS" } else { "FAIL" });
    for l in &r.laws {
        s += &format!("  {} {} ({} cases)\n", if l.pass { "ok  " } else { "FAIL" }, l.name, l.cases);
        for v in &l.counterexamples {
            s += &format!("      {v}\n");
        }
    }
    s + &format!("note: {}\n", r.note)
}

fn classification_text(c: &Classification) -> String {
    let moderate = match c.moderate {
        Moderate::Yes(n) => format!("moderate (N = {n})"),
        Moderate::No => "not moderate".into(),
        Moderate::Undetermined => "moderateness undetermined".into(),
    };
    let tag = |v: Value| v.as_str().unwrap_or_default().to_string();
    let class = tag(json!(c.class));
    let certainty = tag(json!(c.certainty));
    match c.slope {
        Some(b) => format!("{class}, {moderate}, {certainty}, slope {b:.4}"),
        None => format!("{class}, {moderate}, {certainty}"),
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Yes => "equal",
        Verdict::No => "different",
        Verdict::Undetermined => "undetermined",
    }
}

impl<'a> Ctx<'a> {
    pub fn new(opts: &Opts, ws: &'a Workspace) -> Result<Self> {
        let mut cfg = ws.config.clone();
        if let Some(g) = &opts.gauge {
            cfg.gauge = g.clone();
        }
        if let Some(l) = opts.level {
            cfg.level = l;
        }
        if let Some(s) = opts.seed {
            cfg.seed = s;
        }
        let gauge = Gauge::power(parse_q(&cfg.gauge)?)?;
        let domain = match &opts.domain {
            Some(d) => parse_interval(d)?,
            None if opts.dim == 0 => return Err(GfError::Parse("--dim must be positive".into())),
            None => Interval::symmetric(opts.dim),
        };
        Ok(Ctx { ws, cfg, float: opts.float, gauge, domain })
    }

    fn scalar(&self, x: &Q) -> Value {
        if self.float {
            json!(to_f64(x))
        } else {
            json!(fmt_q(x))
        }
    }

    /// The JSON behind `@name` or a literal document, if `s` is either.
    fn json_input(&self, s: &str) -> Result<Option<Value>> {
        let s = s.trim();
        if let Some(name) = s.strip_prefix('@') {
            return Ok(Some(self.ws.get(name)?.clone()));
        }
        if s.starts_with('{') {
            return Ok(Some(parse_json(s)?));
        }
        Ok(None)
    }

    fn dist(&self, s: &str) -> Result<FormalDistribution> {
        match self.json_input(s)? {
            Some(v) => FormalDistribution::from_json(&v),
            None => parse_distribution(s, &self.domain),
        }
    }

    fn piecewise(&self, s: &str, domain: &Interval) -> Result<PiecewisePoly> {
        match self.json_input(s)? {
            Some(v) => PiecewisePoly::from_json(&v),
            None => parse_piecewise(s, domain),
        }
    }

    fn interval(&self, s: &str) -> Result<Interval> {
        match self.json_input(s)? {
            Some(v) => Interval::from_json(&v),
            None => parse_interval(s),
        }
    }

    fn number(&self, s: &str) -> Result<GeneralizedNumber> {
        if let Some(v) = self.json_input(s)? {
            return GeneralizedNumber::from_json(&v);
        }
        match parse_gauge_expr(s) {
            Ok(g) => Ok(GeneralizedNumber::series(g, self.gauge.clone())),
            Err(_) => Ok(GeneralizedNumber::from_tree(parse_expr(s)?, self.gauge.clone())),
        }
    }

    fn point(&self, s: &str) -> Result<GeneralizedPoint> {
        let coords = s.split(',').map(parse_gauge_expr).collect::<Result<Vec<_>>>()?;
        Ok(GeneralizedPoint::from_series(coords, &self.gauge))
    }

    /// A distribution is regularized with the order-`p` bump; any other
    /// input is a net expression on the interior of the domain box.
    fn function(&self, s: &str, p: Option<u32>) -> Result<GSFunction> {
        let p = p.unwrap_or(self.cfg.p);
        if let Some(v) = self.json_input(s)? {
            if v.get("order").is_some() {
                return embed_distribution(&FormalDistribution::from_json(&v)?, p, self.gauge.clone());
            }
            let net = v.get("net").ok_or_else(|| GfError::Parse("expected a distribution or a function".into()))?;
            let net = SmoothNet::from_json(net)?;
            return GSFunction::new(net, vec![DomainPiece::Interior(self.domain.clone())], self.gauge.clone());
        }
        if s.trim_start().starts_with("((") {
            return embed_distribution(&parse_distribution(s, &self.domain)?, p, self.gauge.clone());
        }
        let net = SmoothNet::new(parse_expr(s)?, self.domain.dim())?;
        GSFunction::new(net, vec![DomainPiece::Interior(self.domain.clone())], self.gauge.clone())
    }

    fn enum_config(&self, alpha_cap: Option<u32>, d_cap: Option<u32>) -> EnumConfig {
        EnumConfig {
            level: self.cfg.level,
            alpha_cap: alpha_cap.unwrap_or(self.cfg.alpha_cap),
            d_cap: d_cap.unwrap_or(self.cfg.d_cap),
        }
    }

    pub fn run(&self, verb: &Verb) -> Result<Output> {
        match verb {
            Verb::Gn { op } => self.gn(op),
            Verb::Dist { op } => self.dist_op(op),
            Verb::Sheaf { op } => self.sheaf(op),
            Verb::Gsf { op } => self.gsf(op),
            Verb::Verify { op } => self.verify(op),
            Verb::Plot { op } => self.plot(op),
        }
    }

    fn gn(&self, op: &GnOp) -> Result<Output> {
        match op {
            GnOp::Eval { x, eps } => {
                let n = self.number(x)?;
                let value = n.to_json()?;
                let mut text = format!("{n}\n");
                let eps: Vec<f64> = match (eps.is_empty(), self.float) {
                    (false, _) => eps.clone(),
                    (true, true) => DEFAULT_SAMPLE_EPS.to_vec(),
                    (true, false) => return Ok(Output::object(value, text)),
                };
                let samples: Vec<Value> = eps.iter().map(|&e| json!({ "eps": e, "value": n.sample(e) })).collect();
                for &e in &eps {
                    text += &format!("eps={e}: {}\n", n.sample(e));
                }
                Ok(Output::plain(json!({ "value": value, "samples": samples }), text))
            }
            GnOp::Classify { x } => {
                let c = self.number(x)?.classify();
                Ok(Output::plain(json!(c), classification_text(&c)))
            }
        }
    }

    fn dist_op(&self, op: &DistOp) -> Result<Output> {
        let object = |t: FormalDistribution| Output::object(t.to_json(), t.to_string());
        match op {
            DistOp::New { t } => Ok(object(self.dist(t)?)),
            DistOp::Derive { t, axis, order } => {
                let t = self.dist(t)?;
                match order {
                    Some(a) => {
                        if a.len() != t.dim() {
                            return Err(GfError::Dimension { expected: t.dim(), got: a.len() });
                        }
                        Ok(object(t.derive_multi(&MultiIndex(a.clone()))))
                    }
                    None if *axis >= t.dim() => Err(GfError::Dimension { expected: t.dim(), got: axis + 1 }),
                    None => Ok(object(t.derive(*axis))),
                }
            }
            DistOp::Add { a, b } => Ok(object(self.dist(a)?.add(&self.dist(b)?)?)),
            DistOp::Eq { a, b } => {
                let eq = self.dist(a)?.equal(&self.dist(b)?)?;
                Ok(Output::plain(json!({ "equal": eq }), eq.to_string()))
            }
            DistOp::Pair { t, phi } => {
                let t = self.dist(t)?;
                let phi = self.piecewise(phi, t.domain())?;
                let v = t.pair(&phi)?;
                let s = self.scalar(&v);
                let text = if self.float { to_f64(&v).to_string() } else { fmt_q(&v) };
                Ok(Output::plain(json!({ "pairing": s }), text))
            }
            DistOp::Restrict { t, to } => Ok(object(self.dist(t)?.restrict(&self.interval(to)?)?)),
        }
    }

    /// Cover entries and sections may be given in mini-syntax; a section
    /// string is read on its cover entry.
    fn family(&self, s: &str) -> Result<CompatibleFamily<FormalDistribution>> {
        let v = match self.json_input(s)? {
            Some(v) => v,
            None => parse_json(s)?,
        };
        let list = |key: &str| {
            v.get(key)
                .and_then(Value::as_array)
                .cloned()
                .ok_or_else(|| GfError::Parse(format!("family needs an array {key:?}")))
        };
        let (cover, sections) = (list("cover")?, list("sections")?);
        if cover.len() != sections.len() {
            return Err(GfError::Parse("cover and sections differ in length".into()));
        }
        let mut members = Vec::with_capacity(cover.len());
        for (c, t) in cover.iter().zip(&sections) {
            let j = match c.as_str() {
                Some(s) => parse_interval(s)?,
                None => Interval::from_json(c)?,
            };
            let t = match t.as_str() {
                Some(s) => parse_distribution(s, &j)?,
                None => FormalDistribution::from_json(t)?,
            };
            members.push((j, t));
        }
        Ok(CompatibleFamily::new(members))
    }

    fn sheaf(&self, op: &SheafOp) -> Result<Output> {
        match op {
            SheafOp::Glue { family } => {
                let fam = self.family(family)?;
                fam.check(&FdPresheaf)?;
                let cover = fam.cover();
                let hull = cover
                    .iter()
                    .skip(1)
                    .try_fold(cover.first().cloned().ok_or_else(|| GfError::Parse("empty family".into()))?, |h, j| {
                        let lo = (0..h.dim()).map(|k| h.lo(k).min(j.lo(k))).collect();
                        let hi = (0..h.dim()).map(|k| h.hi(k).max(j.hi(k))).collect();
                        Interval::from_bounds(lo, hi)
                    })?;
                let pieces: Vec<FormalDistribution> = fam.members.iter().map(|(_, t)| t.clone()).collect();
                match glue_formal(&hull, &pieces)? {
                    GlueOutcome::Glued(t) => Ok(Output::object(t.to_json(), format!("{t} on {hull}"))),
                    GlueOutcome::NotCovered => Ok(Output::verdict(
                        json!({ "status": "not_covered", "hull": hull.to_json() }),
                        format!("the cover leaves part of {hull} uncovered"),
                        false,
                    )),
                    GlueOutcome::Undecided(why) => Ok(Output::verdict(
                        json!({ "status": "undecided", "hull": hull.to_json(), "reason": why }),
                        format!("undecided on {hull}: {why}"),
                        false,
                    )),
                }
            }
            SheafOp::Laws { cases } => {
                let r = sheaf_laws_check(self.cfg.seed, *cases, self.cfg.level)?;
                Ok(Output::verdict(r.to_json(), laws_text(&r), r.pass))
            }
        }
    }

    fn gsf(&self, op: &GsfOp) -> Result<Output> {
        let object = |f: GSFunction| Output::object(f.to_json(), f.to_string());
        match op {
            GsfOp::Embed { t, p } => {
                let t = self.dist(t)?;
                Ok(object(embed_distribution(&t, p.unwrap_or(self.cfg.p), self.gauge.clone())?))
            }
            GsfOp::Eval { f, x, p } => {
                let v = gsf_eval(&self.function(f, *p)?, &self.point(x)?)?;
                Ok(Output::plain(json!({ "value": v.to_json()?, "class": v.classify() }), v.to_string()))
            }
            GsfOp::Derive { f, order, at, p } => {
                let f = self.function(f, *p)?;
                if order.len() != f.dim() {
                    return Err(GfError::Dimension { expected: f.dim(), got: order.len() });
                }
                let d = gsf_derive(&f, &MultiIndex(order.clone()))?;
                match at {
                    None => Ok(object(d)),
                    Some(x) => {
                        let v = gsf_eval(&d, &self.point(x)?)?;
                        Ok(Output::plain(json!({ "value": v.to_json()?, "class": v.classify() }), v.to_string()))
                    }
                }
            }
            GsfOp::ClassEq { f, g, on, alpha, p } => {
                let (f, g) = (self.function(f, *p)?, self.function(g, *p)?);
                let k = match on {
                    Some(s) => self.interval(s)?,
                    None => self.inner_half()?,
                };
                let v = colombeau_class_equal(&f, &g, &k, *alpha)?;
                Ok(Output::plain(json!({ "verdict": v, "on": k.to_json(), "alpha_max": alpha }), verdict_name(v).into()))
            }
        }
    }

    /// The middle half of the domain box; boundary layers of the
    /// regularization stay outside it.
    fn inner_half(&self) -> Result<Interval> {
        let d = &self.domain;
        let quarter = |k: usize| (d.hi(k) - d.lo(k)) / Q::from_integer(4.into());
        let lo = (0..d.dim()).map(|k| d.lo(k) + quarter(k)).collect();
        let hi = (0..d.dim()).map(|k| d.hi(k) - quarter(k)).collect();
        Interval::from_bounds(lo, hi)
    }

    fn verify(&self, op: &VerifyOp) -> Result<Output> {
        match op {
            VerifyOp::Psi { target, alpha_cap, d_cap } => {
                let cfg = self.enum_config(*alpha_cap, *d_cap);
                let (doc, report) = match target {
                    TargetKind::Identity => {
                        let w = build_psi(&IdentityTarget, &cfg)?;
                        (w.to_json(), w.report)
                    }
                    TargetKind::Shifted => {
                        let w = build_psi(&ShiftedTarget { shift: 2 }, &cfg)?;
                        (w.to_json(), w.report)
                    }
                    TargetKind::Colombeau => {
                        let t = ColombeauTarget { p: self.cfg.p, gauge: self.gauge.clone(), ..ColombeauTarget::default() };
                        let w = build_psi(&t, &cfg)?;
                        (w.to_json(), w.report)
                    }
                };
                Ok(Output::verdict(doc, report_text(&report), report.pass))
            }
            VerifyOp::Tau { instance } => {
                let i = match instance {
                    TauKind::Colombeau => 0,
                    TauKind::SmallerBox => 1,
                    TauKind::Killing => 2,
                };
                let r = reference_tau_instances()?.swap_remove(i);
                let text = format!("{}well defined: {}\ntau is the identity on the samples: {}\n", report_text(&r.report), r.well_defined, r.identity);
                Ok(Output::verdict(r.to_json(), text, r.report.pass))
            }
            VerifyOp::Ring { cases } => {
                let r = check_quotient_ring_conditions(self.cfg.seed, *cases)?;
                Ok(Output::verdict(r.to_json(), report_text(&r), r.pass))
            }
            VerifyOp::QLaws { violation } => {
                let (objects, arrows) = reference_q_instance(*violation);
                let r = check_q_laws(&objects, &arrows);
                Ok(Output::verdict(r.to_json(), report_text(&r), r.pass))
            }
        }
    }

    fn plot(&self, op: &PlotOp) -> Result<Output> {
        match op {
            PlotOp::Reg { t, eps, grid, p } => {
                if eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
                    return Err(GfError::Parse("--eps values must lie in (0, 1)".into()));
                }
                let t = self.dist(t)?;
                let f = embed_distribution(&t, p.unwrap_or(self.cfg.p), self.gauge.clone())?;
                let csv = regularization_csv(&f, eps, *grid)?;
                let rows: Vec<Value> = csv
                    .lines()
                    .skip(1)
                    .map(|l| {
                        let c: Vec<&str> = l.split(',').collect();
                        json!([c[0].parse::<f64>().ok(), c[1], c[2].parse::<f64>().ok()])
                    })
                    .collect();
                Ok(Output::plain(json!({ "header": ["eps", "x", "value"], "rows": rows }), csv))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gfcalc_core::rational::{q, qr};

    #[test]
    fn intervals_parse_in_both_forms() {
        let a = parse_interval("-1/2,1;0,2").unwrap();
        let b = parse_interval(&a.to_string()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.lo(0), qr(-1, 2));
        assert_eq!(a.hi(1), q(2));
        assert!(parse_interval("1,0").is_err());
        assert!(parse_interval("1").is_err());
    }
}
