//! The morphism `tau([u]) := pi(u)` from the Colombeau quotient into
//! another quotient `(G, pi)` of nets, checked through a kernel oracle.

use serde::Serialize;
use serde_json::Value;

use super::report::{Condition, Report};
use crate::colombeau::{net_is_infinitesimal_on, net_is_negligible_on, SmoothNet, Verdict};
use crate::error::{GfError, Result};
use crate::expr::parse_expr;
use crate::formal::Interval;
use crate::rational::qr;

/// A quotient of nets known only through membership in `Ker(pi)`.
pub struct KernelQuotient<'a> {
    pub name: String,
    pub kernel: KernelFn<'a>,
}

/// Membership in `Ker(pi)`.
pub type KernelFn<'a> = Box<dyn Fn(&SmoothNet) -> Result<bool> + Sync + 'a>;

fn negligible(u: &SmoothNet, k: &Interval) -> Result<bool> {
    Ok(net_is_negligible_on(u, k, 1)? == Verdict::Yes)
}

impl<'a> KernelQuotient<'a> {
    /// The Colombeau quotient on `K`: the kernel is the negligible nets.
    pub fn colombeau(k: Interval) -> Self {
        KernelQuotient { name: format!("Colombeau quotient on {k}"), kernel: Box::new(move |u| negligible(u, &k)) }
    }

    /// Nets negligible on the smaller box `inner`: a strictly larger ideal.
    pub fn on_smaller_box(inner: Interval) -> Self {
        KernelQuotient { name: format!("nets modulo negligibility on {inner}"), kernel: Box::new(move |u| negligible(u, &inner)) }
    }

    /// Negligible nets together with the coset `extra + negligible`.
    pub fn killing(k: Interval, extra: SmoothNet) -> Self {
        KernelQuotient {
            name: format!("Colombeau quotient also killing {extra}"),
            kernel: Box::new(move |u| Ok(negligible(u, &k)? || negligible(&u.sub(&extra), &k)?)),
        }
    }
}

/// A report together with the verdict that `tau` is the identity on the
/// samples, i.e. both kernels agree there.
#[derive(Clone, Debug, Serialize)]
pub struct TauReport {
    pub report: Report,
    pub well_defined: bool,
    pub identity: bool,
}

impl TauReport {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).unwrap_or(Value::Null)
    }
}

/// Default moderate sample nets in one variable.
pub fn default_net_sample() -> Vec<SmoothNet> {
    ["x^2", "sin(x)", "rho^-1*x", "cos(x*rho^-1)", "exp(x)", "rho*sin(x)", "1"]
        .iter()
        .map(|s| SmoothNet::new(parse_expr(s).expect("literal"), 1).expect("1-D"))
        .collect()
}

/// Default negligible nets in one variable.
pub fn default_negligible_sample() -> Vec<SmoothNet> {
    ["exp(-rho^-1)*sin(x)", "exp(-rho^-1)*x^3", "exp(-2*rho^-1)*cos(x*rho^-1)"]
        .iter()
        .map(|s| SmoothNet::new(parse_expr(s).expect("literal"), 1).expect("1-D"))
        .collect()
}

/// Checks that `tau` is well defined and multiplicative on the samples
/// and that `(G, pi)` keeps zero representatives infinitesimal.
pub fn check_colombeau_tau(g: &KernelQuotient, k: &Interval, sample: &[SmoothNet], negl: &[SmoothNet]) -> Result<TauReport> {
    for h in negl {
        if !negligible(h, k)? {
            return Err(GfError::TargetCondition(format!("negligibility sample {h} is not negligible on {k}")));
        }
    }
    let mut well = Condition::new("Ker[-] in Ker(pi): tau well defined");
    for h in negl {
        well.record((g.kernel)(h)?, || format!("pi({h}) != 0"));
        for u in sample {
            let shifted = u.add(h);
            let ok = (g.kernel)(&shifted.sub(u))?;
            well.record(ok, || format!("pi({shifted}) != pi({u})"));
        }
    }

    let mut members: Vec<SmoothNet> = negl.to_vec();
    for u in sample {
        if (g.kernel)(u)? {
            members.push(u.clone());
        }
    }
    let mut ideal = Condition::new("Ker(pi) is an ideal: tau multiplicative");
    for (i, a) in members.iter().enumerate() {
        for v in sample {
            let p = a.mul(v);
            ideal.record((g.kernel)(&p)?, || format!("{a} in the kernel but not {p}"));
        }
        for b in &members[i..] {
            let s = a.add(b);
            ideal.record((g.kernel)(&s)?, || format!("{a} and {b} in the kernel but not {s}"));
        }
    }

    let mut scope = Condition::new("zero representatives are infinitesimal");
    for a in &members {
        let ok = net_is_infinitesimal_on(a, k)? == Verdict::Yes;
        scope.record(ok, || format!("pi kills {a}, which is not infinitesimal on {k}"));
    }

    let mut identity = true;
    for (i, u) in sample.iter().enumerate() {
        let diffs = std::iter::once(u.clone()).chain(sample[i + 1..].iter().map(|v| u.sub(v)));
        for d in diffs {
            if (g.kernel)(&d)? != negligible(&d, k)? {
                identity = false;
            }
        }
    }
    let well_defined = well.pass;
    let report = Report::new("tau", g.name.clone(), vec![well, ideal, scope]);
    Ok(TauReport { report, well_defined, identity })
}

/// The three reference instances on `K = (-1/2, 1/2)`: the quotient itself,
/// a strictly larger kernel, and a quotient killing `sin(x)`.
pub fn reference_tau_instances() -> Result<Vec<TauReport>> {
    let k = Interval::interval_1d(qr(-1, 2), qr(1, 2))?;
    let inner = Interval::interval_1d(qr(-1, 4), qr(1, 4))?;
    let sample = default_net_sample();
    let mut larger_sample = sample.clone();
    // supported in (1/4, 1/2): zero on the inner box only
    larger_sample.push(SmoothNet::new(parse_expr("bump(8,0,8*x-3)")?, 1)?);
    let negl = default_negligible_sample();
    let killed = SmoothNet::new(parse_expr("sin(x)")?, 1)?;
    Ok(vec![
        check_colombeau_tau(&KernelQuotient::colombeau(k.clone()), &k, &sample, &negl)?,
        check_colombeau_tau(&KernelQuotient::on_smaller_box(inner), &k, &larger_sample, &negl)?,
        check_colombeau_tau(&KernelQuotient::killing(k.clone(), killed), &k, &sample, &negl)?,
    ])
}
