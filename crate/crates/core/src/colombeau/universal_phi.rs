//! The morphism from a carrier of generalized functions into the
//! generalized smooth functions, built from chosen preimages of moderate
//! nets and checked against the carrier's derivative operators.

use serde::Serialize;
use serde_json::Value;

use super::gsf::{gsf_derive, gsf_eval, negligible_perturbation, DomainPiece, GSFunction, GeneralizedPoint};
use super::moderate::{indices_of_total, net_class_equal, SmoothNet, Verdict};
use crate::error::{GfError, Result};
use crate::formal::MultiIndex;
use crate::gauge::{Body, Class, Gauge, GeneralizedNumber};

/// A carrier seen only through its contract: finitely many elements, the
/// quotient map from nets, the operators `D^alpha` evaluated at points,
/// and a chosen preimage per element.
pub trait GsfCarrier {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn label(&self, i: usize) -> String;

    fn preimage(&self, i: usize) -> Option<SmoothNet>;

    /// `q(u)` as an element index, `None` outside the finite sample.
    fn quotient(&self, u: &SmoothNet) -> Result<Option<usize>>;

    /// `(D^alpha e_i)(x)` through the injection of `D^0` into point maps.
    fn apply(&self, i: usize, alpha: &MultiIndex, x: &GeneralizedPoint) -> Result<GeneralizedNumber>;
}

/// Equality of generalized numbers: identical series, else a difference
/// classified as zero.
pub fn gn_agree(a: &GeneralizedNumber, b: &GeneralizedNumber) -> Result<bool> {
    if let (Body::Series(x), Body::Series(y)) = (&a.body, &b.body) {
        if x.is_exact() && y.is_exact() {
            return Ok(x == y);
        }
    }
    Ok(a.sub(b)?.classify().class == Class::Zero)
}

/// The carrier `GSF` itself with `q = [-]_f` and `D^alpha = d^alpha`.
pub struct IdentityCarrier {
    pub functions: Vec<GSFunction>,
}

impl GsfCarrier for IdentityCarrier {
    fn len(&self) -> usize {
        self.functions.len()
    }

    fn label(&self, i: usize) -> String {
        self.functions[i].to_string()
    }

    fn preimage(&self, i: usize) -> Option<SmoothNet> {
        self.functions.get(i).map(|f| f.net.clone())
    }

    fn quotient(&self, u: &SmoothNet) -> Result<Option<usize>> {
        for (i, f) in self.functions.iter().enumerate() {
            let Some(k) = f.standard_box() else { continue };
            if f.net.nvars == u.nvars && net_class_equal(&f.net, u, &k, 0)? == Verdict::Yes {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    fn apply(&self, i: usize, alpha: &MultiIndex, x: &GeneralizedPoint) -> Result<GeneralizedNumber> {
        gsf_eval(&gsf_derive(&self.functions[i], alpha)?, x)
    }
}

/// Nets modulo syntactic equality of their normal forms, a relation finer
/// than negligibility, with `D^alpha` the symbolic derivative.
pub struct SyntacticCarrier {
    pub nets: Vec<SmoothNet>,
    pub gauge: Gauge,
}

impl GsfCarrier for SyntacticCarrier {
    fn len(&self) -> usize {
        self.nets.len()
    }

    fn label(&self, i: usize) -> String {
        self.nets[i].to_string()
    }

    fn preimage(&self, i: usize) -> Option<SmoothNet> {
        self.nets.get(i).cloned()
    }

    fn quotient(&self, u: &SmoothNet) -> Result<Option<usize>> {
        let e = u.expr.normalize();
        Ok(self.nets.iter().position(|n| n.expr == e))
    }

    fn apply(&self, i: usize, alpha: &MultiIndex, x: &GeneralizedPoint) -> Result<GeneralizedNumber> {
        let d = self.nets[i].partial(alpha)?;
        let s = x.series().ok_or_else(|| GfError::Undetermined("evaluation at an opaque point".into()))?;
        let args: Vec<_> = s.iter().map(crate::expr::Expr::from_gauge_expr).collect();
        Ok(GeneralizedNumber::from_tree(d.expr.substitute(&args), self.gauge.clone()))
    }
}

#[derive(Clone, Debug)]
pub struct PhiConfig {
    pub domain: Vec<DomainPiece>,
    pub gauge: Gauge,
    pub points: Vec<GeneralizedPoint>,
    pub alpha_max: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiRow {
    pub element: String,
    /// `phi(e)` matches `D^0 e` at every sample point.
    pub injection: bool,
    /// `d^alpha phi(e) = D^alpha e` for `0 < |alpha| <= alpha_max`.
    pub derivatives: bool,
    /// `phi(q(u + h)) = [u + h]_f` for the negligible `h`, when `q(u + h)`
    /// lies in the sample.
    pub q_diagram: Option<bool>,
    /// Agreement with the second candidate morphism.
    pub unique: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiReport {
    pub rows: Vec<PhiRow>,
    pub points: usize,
    pub alpha_max: u32,
    pub pass: bool,
    pub note: String,
}

impl PhiReport {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).unwrap_or(Value::Null)
    }
}

/// Agreement of `f` and `g` with all derivatives up to `alpha_max` at the
/// sample points.
fn functions_agree(f: &GSFunction, g: &GSFunction, points: &[GeneralizedPoint], alpha_max: u32) -> Result<bool> {
    for total in 0..=alpha_max {
        for a in indices_of_total(f.dim(), total) {
            let a = MultiIndex(a);
            let (df, dg) = (gsf_derive(f, &a)?, gsf_derive(g, &a)?);
            for x in points {
                if !gn_agree(&gsf_eval(&df, x)?, &gsf_eval(&dg, x)?)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Builds `phi(e) := [preimage(e)]_f` for every carrier element and checks
/// the defining diagram and, when a second candidate is supplied,
/// uniqueness.
pub fn gsf_universal_phi(
    carrier: &dyn GsfCarrier,
    cfg: &PhiConfig,
    candidate: Option<&dyn Fn(usize) -> Result<GSFunction>>,
) -> Result<(Vec<GSFunction>, PhiReport)> {
    let mut phis = Vec::with_capacity(carrier.len());
    let mut rows = Vec::with_capacity(carrier.len());
    for i in 0..carrier.len() {
        let u = carrier.preimage(i).ok_or_else(|| GfError::MissingPreimage(carrier.label(i)))?;
        let phi = GSFunction::new(u.clone(), cfg.domain.clone(), cfg.gauge.clone())?;
        let mut injection = true;
        let mut derivatives = true;
        for total in 0..=cfg.alpha_max {
            for a in indices_of_total(u.nvars, total) {
                let a = MultiIndex(a);
                let d = gsf_derive(&phi, &a)?;
                for x in &cfg.points {
                    let ok = gn_agree(&gsf_eval(&d, x)?, &carrier.apply(i, &a, x)?)?;
                    if total == 0 {
                        injection &= ok;
                    } else {
                        derivatives &= ok;
                    }
                }
            }
        }
        let perturbed = SmoothNet::new(u.expr.add(&negligible_perturbation(u.nvars)), u.nvars)?;
        let q_diagram = match carrier.quotient(&perturbed)? {
            Some(j) if j < phis.len() || j == i => {
                let target = if j == i { &phi } else { &phis[j] };
                let lifted = GSFunction::new(perturbed, cfg.domain.clone(), cfg.gauge.clone())?;
                Some(functions_agree(target, &lifted, &cfg.points, 0)?)
            }
            _ => None,
        };
        let unique = match candidate {
            Some(c) => Some(functions_agree(&phi, &c(i)?, &cfg.points, cfg.alpha_max)?),
            None => None,
        };
        rows.push(PhiRow { element: carrier.label(i), injection, derivatives, q_diagram, unique });
        phis.push(phi);
    }
    let pass = rows.iter().all(|r| r.injection && r.derivatives && r.q_diagram != Some(false) && r.unique != Some(false));
    let report = PhiReport {
        rows,
        points: cfg.points.len(),
        alpha_max: cfg.alpha_max,
        pass,
        note: "falsification harness: checked on finitely many elements and sample points only".into(),
    };
    Ok((phis, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::formal::Interval;
    use crate::gauge::parse_gauge_expr;

    fn cfg() -> PhiConfig {
        let g = Gauge::default();
        let pts = ["0", "1/3 + rho", "-1/2 + rho^2"]
            .iter()
            .map(|s| GeneralizedPoint::from_series(vec![parse_gauge_expr(s).unwrap()], &g))
            .collect();
        PhiConfig { domain: vec![DomainPiece::Interior(Interval::symmetric(1))], gauge: g, points: pts, alpha_max: 2 }
    }

    fn nets() -> Vec<SmoothNet> {
        ["x^2 + rho", "sin(x*rho^-1)", "exp(x)*rho^-1"]
            .iter()
            .map(|s| SmoothNet::new(parse_expr(s).unwrap(), 1).unwrap())
            .collect()
    }

    #[test]
    fn identity_carrier_gives_identity() {
        let c = cfg();
        let fs: Vec<GSFunction> =
            nets().into_iter().map(|n| GSFunction::new(n, c.domain.clone(), c.gauge.clone()).unwrap()).collect();
        let carrier = IdentityCarrier { functions: fs.clone() };
        let other = |i: usize| {
            let n = &fs[i].net;
            GSFunction::new(SmoothNet::new(n.expr.add(&negligible_perturbation(1)), 1)?, c.domain.clone(), c.gauge.clone())
        };
        let (phis, r) = gsf_universal_phi(&carrier, &c, Some(&other)).unwrap();
        assert!(r.pass, "{:?}", r);
        assert_eq!(phis[1].net, fs[1].net);
        assert!(r.rows.iter().all(|row| row.q_diagram == Some(true)));
    }

    #[test]
    fn finer_carrier_projects() {
        let c = cfg();
        let carrier = SyntacticCarrier { nets: nets(), gauge: c.gauge.clone() };
        let (_, r) = gsf_universal_phi(&carrier, &c, None).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn a_wrong_candidate_is_caught() {
        let c = cfg();
        let fs: Vec<GSFunction> =
            nets().into_iter().map(|n| GSFunction::new(n, c.domain.clone(), c.gauge.clone()).unwrap()).collect();
        let carrier = IdentityCarrier { functions: fs.clone() };
        let wrong = |i: usize| GSFunction::new(fs[(i + 1) % fs.len()].net.clone(), c.domain.clone(), c.gauge.clone());
        let (_, r) = gsf_universal_phi(&carrier, &c, Some(&wrong)).unwrap();
        assert!(!r.pass);
    }

    struct Missing;
    impl GsfCarrier for Missing {
        fn len(&self) -> usize {
            1
        }
        fn label(&self, _: usize) -> String {
            "orphan".into()
        }
        fn preimage(&self, _: usize) -> Option<SmoothNet> {
            None
        }
        fn quotient(&self, _: &SmoothNet) -> Result<Option<usize>> {
            Ok(None)
        }
        fn apply(&self, _: usize, _: &MultiIndex, _: &GeneralizedPoint) -> Result<GeneralizedNumber> {
            Err(GfError::Unsupported("no elements".into()))
        }
    }

    #[test]
    fn missing_preimage_is_an_error() {
        assert!(matches!(gsf_universal_phi(&Missing, &cfg(), None), Err(GfError::MissingPreimage(_))));
    }
}
