//! Mini-syntax for piecewise polynomials and formal distributions.
//!
//! ```text
//! pp    := sum
//! sum   := prod (("+" | "-") prod)*
//! prod  := unary (("*" unary) | ("/" number))*
//! unary := "-" unary | atom ("^" natural)?
//! atom  := number | x | y | z | x1..xn | "(" sum ")"
//!        | "ramp" ["(" affine ")"] | "abs" ["(" affine ")"]
//!        | "pw{" b1,..,bk "}[" p0 "|" .. "|" pk "]"      (1-D only)
//! dist  := "((" a1,..,an ")," pp ")" | pp
//! ```
//!
//! `ramp(u) = max(0, u)` and `abs(u) = |u|` take an affine argument in one
//! variable; bare `ramp` and `abs` act on `x`.

use num_traits::{ToPrimitive, Zero};

use super::distribution::FormalDistribution;
use super::interval::Interval;
use super::multi_index::MultiIndex;
use super::piecewise::PiecewisePoly;
use crate::error::{GfError, Result};
use crate::poly::Poly;
use crate::rational::{parse_q, q, Q};

pub fn parse_piecewise(src: &str, domain: &Interval) -> Result<PiecewisePoly> {
    let toks = tokenize(src)?;
    let mut p = PpParser { toks, pos: 0, domain: domain.clone() };
    let v = p.sum()?;
    if p.pos != p.toks.len() {
        return Err(GfError::Parse(format!("trailing input in {src:?}")));
    }
    Ok(v)
}

pub fn parse_distribution(src: &str, domain: &Interval) -> Result<FormalDistribution> {
    let s = src.trim();
    if let Some(inner) = s.strip_prefix("((").and_then(|r| r.strip_suffix(')')) {
        let (order, body) = inner
            .split_once("),")
            .ok_or_else(|| GfError::Parse(format!("expected ((order),rep) in {src:?}")))?;
        let order: Vec<u32> = order
            .split(',')
            .map(|a| a.trim().parse::<u32>().map_err(|_| GfError::Parse(format!("bad order entry {a:?}"))))
            .collect::<Result<_>>()?;
        return FormalDistribution::new(MultiIndex(order), parse_piecewise(body, domain)?);
    }
    Ok(FormalDistribution::lambda(parse_piecewise(s, domain)?))
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Q),
    Ident(String),
    Sym(char),
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
        } else if c.is_alphabetic() {
            let st = i;
            while i < cs.len() && cs[i].is_alphanumeric() {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect()));
        } else if "+-*/^(){}[]|,".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(GfError::Parse(format!("unexpected character {c:?} in {s:?}")));
        }
    }
    Ok(out)
}

struct PpParser {
    toks: Vec<Tok>,
    pos: usize,
    domain: Interval,
}

impl PpParser {
    fn n(&self) -> usize {
        self.domain.dim()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.toks.get(self.pos) == Some(&Tok::Sym(c)) {
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

    fn number(&mut self) -> Result<Q> {
        let neg = self.eat('-');
        let mut v = match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                v
            }
            _ => return Err(GfError::Parse("expected a number".into())),
        };
        if self.eat('/') {
            match self.toks.get(self.pos).cloned() {
                Some(Tok::Num(d)) if !d.is_zero() => {
                    self.pos += 1;
                    v /= d;
                }
                _ => return Err(GfError::Parse("expected a nonzero denominator".into())),
            }
        }
        Ok(if neg { -v } else { v })
    }

    fn constant(&self, c: Q) -> PiecewisePoly {
        PiecewisePoly::polynomial(self.domain.clone(), Poly::constant(self.n(), c))
    }

    fn sum(&mut self) -> Result<PiecewisePoly> {
        let mut acc = self.prod()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.prod()?)?;
            } else if self.eat('-') {
                acc = acc.sub(&self.prod()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn prod(&mut self) -> Result<PiecewisePoly> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.unary()?)?;
            } else if self.eat('/') {
                let d = self.number()?;
                if d.is_zero() {
                    return Err(GfError::Parse("division by zero".into()));
                }
                acc = acc.scale(&(Q::from_integer(1.into()) / d));
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<PiecewisePoly> {
        if self.eat('-') {
            return Ok(self.unary()?.scale(&q(-1)));
        }
        let base = self.atom()?;
        if self.eat('^') {
            // a lone token: `x^2/2` is `(x^2)/2`
            let e = match self.toks.get(self.pos).cloned() {
                Some(Tok::Num(e)) if e.is_integer() => {
                    self.pos += 1;
                    e
                }
                _ => return Err(GfError::Parse("exponents must be natural numbers".into())),
            };
            let k = e.to_integer().to_u32().ok_or_else(|| GfError::Parse("exponent too large".into()))?;
            let mut acc = self.constant(q(1));
            for _ in 0..k {
                acc = acc.mul(&base)?;
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn var_index(&self, name: &str) -> Option<usize> {
        let k = match name {
            "x" => 0,
            "y" => 1,
            "z" => 2,
            s if s.starts_with('x') => s[1..].parse::<usize>().ok()?.checked_sub(1)?,
            _ => return None,
        };
        (k < self.n()).then_some(k)
    }

    fn atom(&mut self) -> Result<PiecewisePoly> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(self.constant(v))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let v = self.sum()?;
                self.expect(')')?;
                Ok(v)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(k) = self.var_index(&name) {
                    return Ok(PiecewisePoly::polynomial(self.domain.clone(), Poly::var(self.n(), k)));
                }
                match name.as_str() {
                    "ramp" | "abs" => {
                        let (k, a, b) = if self.eat('(') {
                            let arg = self.sum()?;
                            self.expect(')')?;
                            affine_in_one_var(&arg)?
                        } else {
                            (0, q(1), q(0))
                        };
                        let up = PiecewisePoly::ramp_affine(self.domain.clone(), k, a.clone(), b.clone())?;
                        if name == "ramp" {
                            Ok(up)
                        } else {
                            up.add(&PiecewisePoly::ramp_affine(self.domain.clone(), k, -a, -b)?)
                        }
                    }
                    "pw" => self.explicit_pieces(),
                    _ => Err(GfError::Parse(format!("unknown identifier {name:?}"))),
                }
            }
            other => Err(GfError::Parse(format!("unexpected token {other:?}"))),
        }
    }

    fn explicit_pieces(&mut self) -> Result<PiecewisePoly> {
        if self.n() != 1 {
            return Err(GfError::Parse("explicit breakpoint lists are 1-D only".into()));
        }
        self.expect('{')?;
        let mut breaks = Vec::new();
        if !self.eat('}') {
            loop {
                breaks.push(self.number()?);
                if self.eat('}') {
                    break;
                }
                self.expect(',')?;
            }
        }
        self.expect('[')?;
        let mut pieces = Vec::new();
        loop {
            let p = self.sum()?.simplify();
            if p.cells().len() != 1 {
                return Err(GfError::Parse("each piece must be a polynomial".into()));
            }
            pieces.push(p.cells()[0].clone());
            if self.eat(']') {
                break;
            }
            self.expect('|')?;
        }
        PiecewisePoly::from_pieces(self.domain.clone(), breaks, pieces)
    }
}

/// `(k, a, b)` with `arg = a*x_k + b`.
fn affine_in_one_var(arg: &PiecewisePoly) -> Result<(usize, Q, Q)> {
    let arg = arg.simplify();
    let bad = || GfError::Parse("ramp/abs need an affine argument in one variable".into());
    if arg.cells().len() != 1 {
        return Err(bad());
    }
    let p = &arg.cells()[0];
    let mut axis = None;
    let mut a = q(0);
    for (e, c) in p.terms() {
        let deg: u32 = e.iter().sum();
        if deg == 0 {
            continue;
        }
        if deg != 1 {
            return Err(bad());
        }
        let k = e.iter().position(|&d| d == 1).unwrap();
        if axis.is_some_and(|j| j != k) {
            return Err(bad());
        }
        axis = Some(k);
        a = c.clone();
    }
    Ok((axis.unwrap_or(0), a, p.constant_term()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qr;

    #[test]
    fn ramps_and_explicit_pieces() {
        let i = Interval::symmetric(1);
        let r = parse_piecewise("ramp", &i).unwrap();
        assert_eq!(r, PiecewisePoly::ramp(i.clone()));
        let a = parse_piecewise("abs(x - 1/2)", &i).unwrap();
        assert_eq!(a.eval(&[q(-1)]), qr(3, 2));
        assert_eq!(a.eval(&[q(1)]), qr(1, 2));
        let e = parse_piecewise("pw{0}[0|x]", &i).unwrap();
        assert_eq!(e, r);
        assert!(parse_piecewise("pw{0}[0|1]", &i).is_err());
        assert_eq!(parse_piecewise(&r.to_string(), &i).unwrap(), r);
    }

    #[test]
    fn distributions() {
        let i = Interval::symmetric(1);
        let d = parse_distribution("((2),ramp)", &i).unwrap();
        assert_eq!(d.order(), &MultiIndex(vec![2]));
        let i2 = Interval::symmetric(2);
        let t = parse_distribution("((1,0),x*y^2)", &i2).unwrap();
        assert_eq!(t.order(), &MultiIndex(vec![1, 0]));
        assert!(parse_distribution("((1),ramp(x*y))", &i2).is_err());
    }

    #[test]
    fn exponent_binds_tighter_than_division() {
        let i = Interval::symmetric(1);
        let h = parse_piecewise("x^2/2", &i).unwrap();
        assert_eq!(h.eval(&[q(1)]), qr(1, 2));
        assert_eq!(parse_piecewise("x^(1/2)", &i).map(|_| ()).unwrap_err().to_string(), "parse error: exponents must be natural numbers");
        assert!(parse_piecewise("x^1/2", &i).unwrap().eval(&[q(1)]) == qr(1, 2));
    }
}
