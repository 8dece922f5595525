//! Truncated generalized power series in the gauge `rho`.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{GfError, Result};
use crate::poly::Ring;
use crate::rational::{fmt_q, parse_q, q, to_f64, Q};

/// `sum_i c_i rho^{a_i} + O(rho^trunc)` with strictly increasing exponents
/// and nonzero coefficients. `trunc == None` means the sum is exact.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaugeExpr {
    terms: Vec<(Q, Q)>,
    trunc: Option<Q>,
}

impl Default for GaugeExpr {
    fn default() -> Self {
        GaugeExpr::zero()
    }
}

impl GaugeExpr {
    pub fn zero() -> Self {
        GaugeExpr { terms: Vec::new(), trunc: None }
    }

    pub fn one() -> Self {
        GaugeExpr::constant(q(1))
    }

    pub fn constant(c: Q) -> Self {
        GaugeExpr::monomial(c, Q::zero())
    }

    /// `c * rho^a`
    pub fn monomial(c: Q, a: Q) -> Self {
        GaugeExpr::new(vec![(c, a)], None)
    }

    /// `rho^a`
    pub fn rho_pow(a: Q) -> Self {
        GaugeExpr::monomial(q(1), a)
    }

    /// Builds the canonical form: merges equal exponents, drops zeros and
    /// every term at or beyond the truncation order.
    pub fn new(terms: impl IntoIterator<Item = (Q, Q)>, trunc: Option<Q>) -> Self {
        let mut v: Vec<(Q, Q)> = terms.into_iter().collect();
        v.sort_by(|a, b| a.1.cmp(&b.1));
        let mut merged: Vec<(Q, Q)> = Vec::with_capacity(v.len());
        for (c, a) in v {
            match merged.last_mut() {
                Some(last) if last.1 == a => last.0 += c,
                _ => merged.push((c, a)),
            }
        }
        merged.retain(|(c, a)| !c.is_zero() && trunc.as_ref().is_none_or(|t| a < t));
        GaugeExpr { terms: merged, trunc }
    }

    pub fn terms(&self) -> &[(Q, Q)] {
        &self.terms
    }

    pub fn trunc(&self) -> Option<&Q> {
        self.trunc.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.trunc.is_none()
    }

    /// Canonical zero: no terms (up to the truncation order, if any).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<(&Q, &Q)> {
        self.terms.first().map(|(c, a)| (c, a))
    }

    pub fn leading_exponent(&self) -> Option<&Q> {
        self.terms.first().map(|(_, a)| a)
    }

    /// The smallest exponent that may carry a nonzero contribution: the
    /// leading exponent, else the truncation order. `None` for exact zero.
    fn effective_order(&self) -> Option<Q> {
        self.leading_exponent().cloned().or_else(|| self.trunc.clone())
    }

    /// Sign of the represented value for small `eps`; `None` when no term
    /// survives truncation.
    pub fn sign(&self) -> Option<Ordering> {
        match self.leading() {
            Some((c, _)) => Some(if c.is_positive() { Ordering::Greater } else { Ordering::Less }),
            None if self.is_exact() => Some(Ordering::Equal),
            None => None,
        }
    }

    /// Coefficient of `rho^0` when the value is finite.
    pub fn standard_part(&self) -> Option<Q> {
        match self.leading_exponent() {
            Some(a) if a.is_negative() => None,
            _ => Some(
                self.terms
                    .iter()
                    .find(|(_, a)| a.is_zero())
                    .map(|(c, _)| c.clone())
                    .unwrap_or_else(Q::zero),
            ),
        }
    }

    pub fn truncate(&self, order: &Q) -> GaugeExpr {
        let t = match &self.trunc {
            Some(t) if t < order => t.clone(),
            _ => order.clone(),
        };
        GaugeExpr::new(self.terms.clone(), Some(t))
    }

    pub fn neg(&self) -> GaugeExpr {
        GaugeExpr {
            terms: self.terms.iter().map(|(c, a)| (-c.clone(), a.clone())).collect(),
            trunc: self.trunc.clone(),
        }
    }

    pub fn abs(&self) -> GaugeExpr {
        match self.sign() {
            Some(Ordering::Less) => self.neg(),
            _ => self.clone(),
        }
    }

    pub fn scale(&self, k: &Q) -> GaugeExpr {
        if k.is_zero() {
            return GaugeExpr::zero();
        }
        GaugeExpr::new(self.terms.iter().map(|(c, a)| (c * k, a.clone())), self.trunc.clone())
    }

    /// Multiplies by `rho^s`.
    pub fn shift(&self, s: &Q) -> GaugeExpr {
        GaugeExpr::new(
            self.terms.iter().map(|(c, a)| (c.clone(), a + s)),
            self.trunc.as_ref().map(|t| t + s),
        )
    }

    pub fn add(&self, other: &GaugeExpr) -> GaugeExpr {
        let trunc = min_opt(self.trunc.as_ref(), other.trunc.as_ref());
        GaugeExpr::new(self.terms.iter().chain(other.terms.iter()).cloned(), trunc)
    }

    pub fn sub(&self, other: &GaugeExpr) -> GaugeExpr {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &GaugeExpr) -> GaugeExpr {
        if (self.is_zero() && self.is_exact()) || (other.is_zero() && other.is_exact()) {
            return GaugeExpr::zero();
        }
        // (A + O(rho^s)) (B + O(rho^t)) = AB + O(rho^{min(lead B + s, lead A + t)})
        let mut trunc: Option<Q> = None;
        if let (Some(s), Some(eb)) = (&self.trunc, other.effective_order()) {
            trunc = min_opt(trunc.as_ref(), Some(&(s + eb)));
        }
        if let (Some(t), Some(ea)) = (&other.trunc, self.effective_order()) {
            trunc = min_opt(trunc.as_ref(), Some(&(t + ea)));
        }
        let mut products = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (c1, a1) in &self.terms {
            for (c2, a2) in &other.terms {
                products.push((c1 * c2, a1 + a2));
            }
        }
        GaugeExpr::new(products, trunc)
    }

    pub fn pow(&self, e: u32) -> GaugeExpr {
        let mut acc = GaugeExpr::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Equality of the represented classes up to the smaller truncation order.
    pub fn eq_up_to_order(&self, other: &GaugeExpr) -> bool {
        self.sub(other).is_zero()
    }

    /// Truncated reciprocal. The result `y` satisfies `x * y = 1 + O(rho^order)`;
    /// a single exact monomial inverts exactly.
    pub fn invert(&self, order: &Q) -> Result<GaugeExpr> {
        let Some((c0, a0)) = self.leading().map(|(c, a)| (c.clone(), a.clone())) else {
            return Err(GfError::NotInvertible(self.to_string()));
        };
        let inv_c0 = Q::one() / &c0;
        if self.terms.len() == 1 && self.is_exact() {
            return Ok(GaugeExpr::monomial(inv_c0, -a0));
        }
        // relative precision: min(order, trunc - a0)
        let mut rel = order.clone();
        if let Some(t) = &self.trunc {
            let r = t - &a0;
            if r < rel {
                rel = r;
            }
        }
        // x = c0 rho^a0 (1 + u), u has positive exponents only
        let u = GaugeExpr::new(
            self.terms[1..].iter().map(|(c, a)| (c / &c0, a - &a0)),
            None,
        );
        let minus_u = u.neg();
        let mut w = GaugeExpr::one().truncate(&rel);
        let mut term = GaugeExpr::one();
        loop {
            term = term.mul(&minus_u).truncate(&rel);
            if term.is_zero() {
                break;
            }
            w = w.add(&term);
        }
        let w = GaugeExpr::new(w.terms.clone(), Some(rel));
        Ok(w.scale(&inv_c0).shift(&-a0))
    }

    /// Value at a numeric gauge value `rho`.
    pub fn eval_f64(&self, rho: f64) -> f64 {
        let lr = rho.ln();
        self.terms.iter().map(|(c, a)| to_f64(c) * (to_f64(a) * lr).exp()).sum()
    }

    /// Exact value at a rational `rho`, available when every exponent is an
    /// integer.
    pub fn eval_q(&self, rho: &Q) -> Option<Q> {
        let mut acc = Q::zero();
        for (c, a) in &self.terms {
            if !a.is_integer() {
                return None;
            }
            let e = a.to_integer();
            let e: i64 = num_traits::ToPrimitive::to_i64(&e)?;
            let p = if e >= 0 {
                num_traits::pow(rho.clone(), e as usize)
            } else {
                Q::one() / num_traits::pow(rho.clone(), (-e) as usize)
            };
            acc += c * p;
        }
        Some(acc)
    }
}

fn min_opt(a: Option<&Q>, b: Option<&Q>) -> Option<Q> {
    match (a, b) {
        (None, None) => None,
        (Some(x), None) | (None, Some(x)) => Some(x.clone()),
        (Some(x), Some(y)) => Some(if x < y { x.clone() } else { y.clone() }),
    }
}

impl Ring for GaugeExpr {
    fn r_zero() -> Self {
        GaugeExpr::zero()
    }
    fn r_one() -> Self {
        GaugeExpr::one()
    }
    fn from_q(c: &Q) -> Self {
        GaugeExpr::constant(c.clone())
    }
    fn r_add(&self, other: &Self) -> Self {
        GaugeExpr::add(self, other)
    }
    fn r_mul(&self, other: &Self) -> Self {
        GaugeExpr::mul(self, other)
    }
}

impl fmt::Display for GaugeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .terms
            .iter()
            .map(|(c, a)| {
                if a.is_zero() {
                    fmt_q(c)
                } else if a.is_one() {
                    format!("{}*rho", fmt_q(c))
                } else if a.is_integer() {
                    format!("{}*rho^{}", fmt_q(c), fmt_q(a))
                } else {
                    format!("{}*rho^({})", fmt_q(c), fmt_q(a))
                }
            })
            .collect();
        if let Some(t) = &self.trunc {
            parts.push(format!("O(rho^({}))", fmt_q(t)));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// JSON form of the term list: `[["c","a"], ...]` plus `"trunc"`.
#[derive(Serialize, Deserialize)]
pub(crate) struct SeriesJson {
    pub terms: Vec<(String, String)>,
    pub trunc: String,
}

impl From<&GaugeExpr> for SeriesJson {
    fn from(g: &GaugeExpr) -> Self {
        SeriesJson {
            terms: g.terms.iter().map(|(c, a)| (fmt_q(c), fmt_q(a))).collect(),
            trunc: g.trunc.as_ref().map(fmt_q).unwrap_or_else(|| "inf".into()),
        }
    }
}

impl TryFrom<SeriesJson> for GaugeExpr {
    type Error = GfError;
    fn try_from(j: SeriesJson) -> Result<Self> {
        let trunc = if j.trunc == "inf" { None } else { Some(parse_q(&j.trunc)?) };
        let terms = j
            .terms
            .iter()
            .map(|(c, a)| Ok((parse_q(c)?, parse_q(a)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(GaugeExpr::new(terms, trunc))
    }
}

/// Parses the mini-syntax `3*rho^-2 + rho - 1/2*rho^(1/2) + O(rho^3)`.
pub fn parse_gauge_expr(src: &str) -> Result<GaugeExpr> {
    let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(GfError::Parse("empty gauge expression".into()));
    }
    let mut terms = Vec::new();
    let mut trunc = None;
    // split at top-level + and - (not inside parentheses, not after '^')
    let bytes: Vec<char> = s.chars().collect();
    let mut pieces: Vec<(bool, String)> = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut neg = false;
    for (i, &ch) in bytes.iter().enumerate() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        let prev = if i > 0 { bytes[i - 1] } else { '+' };
        if (ch == '+' || ch == '-') && depth == 0 && prev != '^' && prev != 'e' && prev != 'E' && prev != '/' {
            if !cur.is_empty() {
                pieces.push((neg, std::mem::take(&mut cur)));
            }
            neg = ch == '-';
            continue;
        }
        cur.push(ch);
    }
    if !cur.is_empty() {
        pieces.push((neg, cur));
    }
    for (neg, piece) in pieces {
        if let Some(inner) = piece.strip_prefix("O(").and_then(|r| r.strip_suffix(')')) {
            let (e, _) = parse_rho_factor(inner)?
                .ok_or_else(|| GfError::Parse(format!("bad order term {piece:?}")))?;
            trunc = Some(e);
            continue;
        }
        let (coef, expo) = parse_term(&piece)?;
        terms.push((if neg { -coef } else { coef }, expo));
    }
    Ok(GaugeExpr::new(terms, trunc))
}

fn parse_term(t: &str) -> Result<(Q, Q)> {
    let mut coef = q(1);
    let mut expo = Q::zero();
    for factor in split_top(t, '*') {
        match parse_rho_factor(&factor)? {
            Some((e, c)) => {
                expo += e;
                coef *= c;
            }
            None => coef *= parse_q(strip_parens(&factor))?,
        }
    }
    Ok((coef, expo))
}

fn strip_parens(s: &str) -> &str {
    s.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(s)
}

fn split_top(s: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if ch == sep && depth == 0 {
            out.push(std::mem::take(&mut cur));
        } else {
            cur.push(ch);
        }
    }
    out.push(cur);
    out
}

/// `rho`, `rho^k` or `rho^(a/b)`, optionally followed by `/d`: the
/// exponent and the coefficient factor `1/d`.
fn parse_rho_factor(f: &str) -> Result<Option<(Q, Q)>> {
    let Some(rest) = f.strip_prefix("rho") else {
        return Ok(None);
    };
    let bad = || GfError::Parse(format!("bad rho factor {f:?}"));
    let (e, tail) = match rest.strip_prefix('^') {
        None => (q(1), rest),
        Some(r) if r.starts_with('(') => {
            let close = r.find(')').ok_or_else(bad)?;
            (parse_q(&r[1..close])?, &r[close + 1..])
        }
        Some(r) => {
            let digits = r.strip_prefix('-').unwrap_or(r);
            let len = r.len() - digits.len() + digits.chars().take_while(char::is_ascii_digit).count();
            if len == r.len() - digits.len() {
                return Err(bad());
            }
            (parse_q(&r[..len])?, &r[len..])
        }
    };
    let scale = match tail.strip_prefix('/') {
        None if tail.is_empty() => q(1),
        None => return Err(bad()),
        Some(d) => {
            let d = parse_q(d)?;
            if d.is_zero() {
                return Err(GfError::Parse("division by zero".into()));
            }
            d.recip()
        }
    };
    Ok(Some((e, scale)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qr;

    fn g(s: &str) -> GaugeExpr {
        parse_gauge_expr(s).unwrap()
    }

    #[test]
    fn parse_and_display() {
        let x = g("3*rho^-2 + rho - 1/2*rho^(1/2) + O(rho^3)");
        assert_eq!(x.terms().len(), 3);
        assert_eq!(x.trunc(), Some(&q(3)));
        assert_eq!(x.leading(), Some((&q(3), &q(-2))));
        assert_eq!(g(&x.to_string()), x);
        assert_eq!(g("2"), GaugeExpr::constant(q(2)));
        assert_eq!(g("-rho"), GaugeExpr::monomial(q(-1), q(1)));
    }

    #[test]
    fn exponent_binds_tighter_than_division() {
        assert_eq!(g("rho^2/2"), GaugeExpr::monomial(qr(1, 2), q(2)));
        assert_eq!(g("3*rho^-1/4"), GaugeExpr::monomial(qr(3, 4), q(-1)));
        assert_eq!(g("rho^(-1/2)"), GaugeExpr::rho_pow(qr(-1, 2)));
        assert!(parse_gauge_expr("rho^x").is_err());
        assert!(parse_gauge_expr("rho/0").is_err());
    }

    #[test]
    fn cancellation_and_zero_product() {
        assert_eq!(g("rho^-1 + 2").add(&g("-rho^-1")), g("2"));
        assert!(g("0").mul(&g("3*rho^-5")).is_zero());
    }

    #[test]
    fn truncation_is_tracked_through_products() {
        // (rho^-1 + O(rho)) * (1 + O(rho^2)) = rho^-1 + O(rho)
        let p = g("rho^-1 + O(rho)").mul(&g("1 + O(rho^2)"));
        assert_eq!(p, GaugeExpr::new(vec![(q(1), q(-1))], Some(q(1))));
    }

    #[test]
    fn inversion() {
        assert_eq!(g("rho^-1").invert(&q(5)).unwrap(), g("rho"));
        let y = g("1 + rho").invert(&q(3)).unwrap();
        assert_eq!(y, g("1 - rho + rho^2 + O(rho^3)"));
        assert!(GaugeExpr::zero().invert(&q(3)).is_err());
        // infinite leading term: product is 1 up to the requested order
        let x = g("2*rho^-1 + 3 + rho");
        let y = x.invert(&q(4)).unwrap();
        let prod = x.mul(&y);
        assert!(prod.eq_up_to_order(&GaugeExpr::one()));
        assert!(prod.trunc().unwrap() >= &q(4));
        let half = g("rho^(1/2) + rho").invert(&qr(5, 2)).unwrap();
        assert!(g("rho^(1/2) + rho").mul(&half).eq_up_to_order(&GaugeExpr::one()));
    }

    #[test]
    fn exact_rational_evaluation() {
        let x = g("rho^-1 + 2 + 3*rho^2");
        assert_eq!(x.eval_q(&qr(1, 10)).unwrap(), qr(1203, 100));
        assert!(g("rho^(1/2)").eval_q(&qr(1, 4)).is_none());
    }
}
