//! Text formats for maps, points and curves.
//!
//! Maps are accepted either as coefficient arrays `"[c0,c1,...]/[d0,d1,...]"`
//! (ascending degree, entries may be fractions) or as expressions in `x`
//! such as `"(x^2+2)/(2x)"`. Curves are polynomial expressions in `x` and
//! `y`, optionally written as an equation `lhs = rhs`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::poly::{BiPoly, IntPoly};
use crate::ratmap::{normalize_map, ProjPoint, RationalMap};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error: {0}")]
pub struct ParseError(pub String);

fn err<T>(msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError(msg.into()))
}

pub fn parse_map(s: &str) -> Result<RationalMap, ParseError> {
    let t = s.trim();
    if t.starts_with('[') {
        return parse_array_map(t);
    }
    let ast = Parser::new(t, &['x'])?.parse_all()?;
    let (num, den) = eval_ratfn(&ast)?;
    RationalMap::from_polys(num, den).map_err(|e| ParseError(e.to_string()))
}

fn parse_array_map(s: &str) -> Result<RationalMap, ParseError> {
    let (p_txt, q_txt) = match s.find("]/[") {
        Some(i) => (&s[..=i], &s[i + 2..]),
        None => (s, "[1]"),
    };
    let p = parse_rational_array(p_txt)?;
    let q = parse_rational_array(q_txt)?;
    normalize_map(&p, &q).map_err(|e| ParseError(e.to_string()))
}

fn parse_rational_array(s: &str) -> Result<Vec<BigRational>, ParseError> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| ParseError(format!("expected a bracketed coefficient list, got {s:?}")))?;
    if inner.trim().is_empty() {
        return err("empty coefficient list");
    }
    inner.split(',').map(|e| parse_rational(e.trim().trim_matches('"'))).collect()
}

fn parse_rational(s: &str) -> Result<BigRational, ParseError> {
    let bad = || ParseError(format!("invalid rational number {s:?}"));
    match s.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().map_err(|_| bad())?;
            let b: BigInt = b.trim().parse().map_err(|_| bad())?;
            if b.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(a, b))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Points: `a/b`, `a`, `[a:b]`, `inf`, `1/0`.
pub fn parse_point(s: &str) -> Result<ProjPoint, ParseError> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("inf") || t == "∞" || t.eq_ignore_ascii_case("infinity") {
        return Ok(ProjPoint::infinity());
    }
    let bad = || ParseError(format!("invalid point {s:?}"));
    let (a, b) = if let Some(inner) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        inner.split_once(':').ok_or_else(bad)?
    } else {
        t.split_once('/').unwrap_or((t, "1"))
    };
    let a: BigInt = a.trim().parse().map_err(|_| bad())?;
    let b: BigInt = b.trim().parse().map_err(|_| bad())?;
    ProjPoint::new(a, b).map_err(|e| ParseError(e.to_string()))
}

/// A curve `F(x, y) = 0`. Denominators are cleared.
pub fn parse_curve(s: &str) -> Result<BiPoly, ParseError> {
    let (lhs, rhs) = match s.split_once('=') {
        Some((l, r)) => (l, r),
        None => (s, "0"),
    };
    let l = eval_bipoly(&Parser::new(lhs.trim(), &['x', 'y'])?.parse_all()?)?;
    let r = eval_bipoly(&Parser::new(rhs.trim(), &['x', 'y'])?.parse_all()?)?;
    Ok(&l - &r)
}

#[derive(Debug, Clone)]
enum Expr {
    Int(BigInt),
    Var(char),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Var(char),
    Op(char),
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn new(s: &str, vars: &[char]) -> Result<Self, ParseError> {
        let mut toks = Vec::new();
        let chars: Vec<char> = s.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let lit: String = chars[start..i].iter().collect();
                toks.push(Tok::Int(lit.parse().expect("digits")));
            } else if vars.contains(&c) {
                toks.push(Tok::Var(c));
                i += 1;
            } else if "+-*/^()".contains(c) {
                toks.push(Tok::Op(c));
                i += 1;
            } else {
                return err(format!("unexpected character {c:?} in {s:?}"));
            }
        }
        if toks.is_empty() {
            return err("empty expression");
        }
        Ok(Parser { toks, pos: 0 })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_all(mut self) -> Result<Expr, ParseError> {
        let e = self.expr()?;
        if self.pos != self.toks.len() {
            return err(format!("trailing input at token {}", self.pos));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else if matches!(self.peek(), Some(Tok::Int(_)) | Some(Tok::Var(_)) | Some(Tok::Op('('))) {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            let neg = self.eat('-');
            let e = match self.peek() {
                Some(Tok::Int(n)) => n.to_i64().filter(|&v| v <= 4096),
                _ => None,
            }
            .ok_or_else(|| ParseError("exponent must be a small integer".into()))?;
            self.pos += 1;
            return Ok(Expr::Pow(Box::new(base), if neg { -e } else { e }));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Expr::Int(n))
            }
            Some(Tok::Var(v)) => {
                self.pos += 1;
                Ok(Expr::Var(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return err("missing ')'");
                }
                Ok(e)
            }
            other => err(format!("unexpected token {other:?}")),
        }
    }
}

type RatFn = (IntPoly, IntPoly);

fn eval_ratfn(e: &Expr) -> Result<RatFn, ParseError> {
    Ok(match e {
        Expr::Int(n) => (IntPoly::constant(n.clone()), IntPoly::one()),
        Expr::Var(_) => (IntPoly::x(), IntPoly::one()),
        Expr::Neg(a) => {
            let (n, d) = eval_ratfn(a)?;
            (-&n, d)
        }
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let (n1, d1) = eval_ratfn(a)?;
            let (n2, d2) = eval_ratfn(b)?;
            let l = &n1 * &d2;
            let r = &n2 * &d1;
            let n = if matches!(e, Expr::Add(..)) { &l + &r } else { &l - &r };
            reduce(n, &d1 * &d2)
        }
        Expr::Mul(a, b) => {
            let (n1, d1) = eval_ratfn(a)?;
            let (n2, d2) = eval_ratfn(b)?;
            reduce(&n1 * &n2, &d1 * &d2)
        }
        Expr::Div(a, b) => {
            let (n1, d1) = eval_ratfn(a)?;
            let (n2, d2) = eval_ratfn(b)?;
            if n2.is_zero() {
                return err("division by zero");
            }
            reduce(&n1 * &d2, &d1 * &n2)
        }
        Expr::Pow(a, k) => {
            let (n, d) = eval_ratfn(a)?;
            let (n, d) = if *k < 0 {
                if n.is_zero() {
                    return err("division by zero");
                }
                (d, n)
            } else {
                (n, d)
            };
            let k = k.unsigned_abs() as u32;
            (n.pow(k), d.pow(k))
        }
    })
}

fn reduce(n: IntPoly, d: IntPoly) -> RatFn {
    if n.is_zero() {
        return (n, IntPoly::one());
    }
    let g = n.gcd(&d);
    let (n, d) = if g.deg() > 0 {
        (n.div_exact(&g).expect("gcd divides"), d.div_exact(&g).expect("gcd divides"))
    } else {
        (n, d)
    };
    let c = num_integer::Integer::gcd(&n.content(), &d.content());
    let c = if d.leading().is_negative() { -c } else { c };
    if c.is_one() {
        (n, d)
    } else {
        (
            IntPoly::new(n.coeffs().iter().map(|v| v / &c).collect()),
            IntPoly::new(d.coeffs().iter().map(|v| v / &c).collect()),
        )
    }
}

fn eval_bipoly(e: &Expr) -> Result<BiPoly, ParseError> {
    Ok(match e {
        Expr::Int(n) => BiPoly::constant(n.clone()),
        Expr::Var('x') => BiPoly::x(),
        Expr::Var(_) => BiPoly::y(),
        Expr::Neg(a) => -&eval_bipoly(a)?,
        Expr::Add(a, b) => &eval_bipoly(a)? + &eval_bipoly(b)?,
        Expr::Sub(a, b) => &eval_bipoly(a)? - &eval_bipoly(b)?,
        Expr::Mul(a, b) => &eval_bipoly(a)? * &eval_bipoly(b)?,
        Expr::Div(..) => return err("curves must be polynomial; clear denominators"),
        Expr::Pow(a, k) => {
            if *k < 0 {
                return err("curves must be polynomial; negative exponent");
            }
            eval_bipoly(a)?.pow(*k as u32)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn array_and_expression_forms_agree() {
        let a = parse_map("[2,0,1]/[0,2]").unwrap();
        let b = parse_map("(x^2+2)/(2x)").unwrap();
        assert_eq!(a, b);
        assert!(a.is_normalized());
        assert_eq!(parse_map("x^2").unwrap(), parse_map("[0,0,1]/[1]").unwrap());
        assert_eq!(parse_map("1/x").unwrap(), parse_map("[1]/[0,1]").unwrap());
        assert_eq!(parse_map("x + 1/x").unwrap(), parse_map("[1,0,1]/[0,1]").unwrap());
    }

    #[test]
    fn fractional_coefficients_are_cleared() {
        let m = parse_map("[1/2,0,1]/[0,1]").unwrap();
        assert_eq!(m, parse_map("[1,0,2]/[0,2]").unwrap());
    }

    #[test]
    fn malformed_maps_are_rejected() {
        assert!(parse_map("[1,2").is_err());
        assert!(parse_map("x^").is_err());
        assert!(parse_map("z+1").is_err());
        assert!(parse_map("[1,2]/[2,4]").is_err());
        assert!(parse_map("x/0").is_err());
    }

    #[test]
    fn points() {
        assert_eq!(parse_point("3/2").unwrap(), ProjPoint::from_ratio(3, 2).unwrap());
        assert_eq!(parse_point("-6/4").unwrap(), ProjPoint::from_ratio(-3, 2).unwrap());
        assert_eq!(parse_point("inf").unwrap(), ProjPoint::infinity());
        assert_eq!(parse_point("1/0").unwrap(), ProjPoint::infinity());
        assert_eq!(parse_point("[2:1]").unwrap(), ProjPoint::from_int(2));
        assert!(parse_point("0/0").is_err());
        assert!(parse_point("a").is_err());
    }

    #[test]
    fn curves() {
        let c = parse_curve("x = 16").unwrap();
        assert_eq!(c, parse_curve("x - 16").unwrap());
        let c = parse_curve("y^2 - x^3 - 2x").unwrap();
        assert_eq!(c.deg_x(), 3);
        assert_eq!(c.deg_y(), 2);
        let shown = c.to_string();
        assert_eq!(parse_curve(&shown).unwrap(), c);
        assert!(parse_curve("x/y").is_err());
    }
}
