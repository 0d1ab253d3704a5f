//! Text grammar for polynomials and models.
//!
//! Expressions are built from integers, `t`, `z` (generator of F_q over F_p),
//! `tau`, `+`, `-`, `*`, `^` and parentheses. Products involving `tau` follow the
//! twisted rule `tau*c = c^q*tau`. The keyword `carlitz` stands for `t + tau`.

use crate::error::{Error, Result};
use crate::field::{Elem, Fq};
use crate::ore::{DrinfeldModel, OrePoly};
use crate::poly::Poly;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(i64),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>> {
    let b: Vec<char> = s.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < b.len() {
        let c = b[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let txt: String = b[start..i].iter().collect();
            let n = txt
                .parse::<i64>()
                .map_err(|_| Error::Parse { pos: start, msg: "integer too large".into() })?;
            out.push((start, Tok::Num(n)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(b[start..i].iter().collect())));
        } else if "+-*^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(Error::Parse { pos: i, msg: format!("unexpected character '{c}'") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    i: usize,
    f: &'a Fq,
    len: usize,
}

impl<'a> Parser<'a> {
    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|t| t.0).unwrap_or(self.len)
    }
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.1)
    }
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse { pos: self.pos(), msg: msg.into() })
    }

    fn expr(&mut self) -> Result<OrePoly> {
        let mut acc = if self.peek() == Some(&Tok::Op('-')) {
            self.i += 1;
            self.term()?.neg()
        } else {
            self.term()?
        };
        loop {
            match self.peek() {
                Some(Tok::Op('+')) => {
                    self.i += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Op('-')) => {
                    self.i += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<OrePoly> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Tok::Op('*')) {
            self.i += 1;
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<OrePoly> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Op('^')) {
            self.i += 1;
            match self.peek().cloned() {
                Some(Tok::Num(n)) if n >= 0 => {
                    self.i += 1;
                    let mut acc = OrePoly::constant(Poly::one(self.f));
                    for _ in 0..n {
                        acc = acc.mul(&base);
                    }
                    Ok(acc)
                }
                _ => self.err("expected a nonnegative integer exponent"),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<OrePoly> {
        let f = self.f;
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.i += 1;
                Ok(OrePoly::constant(Poly::constant(f, f.from_int(n))))
            }
            Some(Tok::Ident(id)) => {
                let v = match id.as_str() {
                    "t" => OrePoly::constant(Poly::t(f)),
                    "z" => match f.generator() {
                        Some(z) => OrePoly::constant(Poly::constant(f, z)),
                        None => return self.err("'z' is only available when q is not prime"),
                    },
                    "tau" => OrePoly::tau(f),
                    "carlitz" => OrePoly::new(f, vec![Poly::t(f), Poly::one(f)]),
                    _ => return self.err(&format!("unknown identifier '{id}'")),
                };
                self.i += 1;
                Ok(v)
            }
            Some(Tok::Op('(')) => {
                self.i += 1;
                let v = self.expr()?;
                if self.peek() != Some(&Tok::Op(')')) {
                    return self.err("expected ')'");
                }
                self.i += 1;
                Ok(v)
            }
            Some(Tok::Op('-')) => {
                self.i += 1;
                Ok(self.factor()?.neg())
            }
            _ => self.err("expected a term"),
        }
    }
}

fn parse_ore_expr(s: &str, f: &Fq) -> Result<OrePoly> {
    let toks = lex(s)?;
    let mut p = Parser { toks, i: 0, f, len: s.chars().count() };
    let v = p.expr()?;
    if p.i != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(v)
}

/// Parse a polynomial in `t` over F_q.
pub fn parse_poly(s: &str, f: &Fq) -> Result<Poly> {
    let v = parse_ore_expr(s, f)?;
    if v.tau_degree().unwrap_or(0) > 0 {
        return Err(Error::Parse { pos: 0, msg: "'tau' not allowed in a polynomial".into() });
    }
    Ok(v.coeff(0))
}

/// Parse a twisted polynomial such as `t + (t^3)*tau + tau^2`.
pub fn parse_ore(s: &str, f: &Fq) -> Result<OrePoly> {
    parse_ore_expr(s, f)
}

/// Parse a Drinfeld model; the constant coefficient must be `t`.
pub fn parse_model(s: &str, f: &Fq) -> Result<DrinfeldModel> {
    let o = parse_ore_expr(s, f)?;
    DrinfeldModel::from_ore(o).map_err(|e| match e {
        Error::InvalidArgument(m) => Error::Parse { pos: 0, msg: m },
        other => other,
    })
}

/// Parse an element of F_q written as an expression in `z`.
pub fn parse_elem(s: &str, f: &Fq) -> Result<Elem> {
    let p = parse_poly(s, f)?;
    if p.deg() > 0 {
        return Err(Error::Parse { pos: 0, msg: "expected a field element".into() });
    }
    Ok(p.coeff(0))
}

fn coeff_prefix(f: &Fq, c: Elem) -> String {
    if c == 1 {
        return String::new();
    }
    let s = f.format_elem(c);
    if f.is_prime_field_elem(c) || !s.contains('+') {
        format!("{s}*")
    } else {
        format!("({s})*")
    }
}

/// Print a polynomial with the given variable name, highest degree first.
pub fn format_poly(p: &Poly, var: &str) -> String {
    let f = p.field();
    if p.is_zero() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (k, &c) in p.coeffs().iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        if k == 0 {
            let s = f.format_elem(c);
            parts.push(if s.contains('+') { format!("({s})") } else { s });
            continue;
        }
        let mono = if k == 1 { var.to_string() } else { format!("{var}^{k}") };
        parts.push(format!("{}{}", coeff_prefix(f, c), mono));
    }
    parts.join(" + ")
}

/// Print a model as `t + (g1)*tau + (g2)*tau^2 + ...`.
pub fn format_ore(o: &OrePoly) -> String {
    let mut parts = Vec::new();
    for (i, g) in o.coeffs().iter().enumerate() {
        if g.is_zero() {
            continue;
        }
        let mono = match i {
            0 => {
                parts.push(format_poly(g, "t"));
                continue;
            }
            1 => "tau".to_string(),
            _ => format!("tau^{i}"),
        };
        if g.is_one() {
            parts.push(mono);
        } else {
            parts.push(format!("({})*{}", format_poly(g, "t"), mono));
        }
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_f4() {
        let f = Fq::new(4).unwrap();
        let p = parse_poly("(z+1)*t^2 + z", &f).unwrap();
        assert_eq!(p.coeffs(), &[2, 0, 3]);
        assert_eq!(format_poly(&p, "t"), "(z+1)*t^2 + z");
        assert_eq!(parse_poly(&format_poly(&p, "t"), &f).unwrap(), p);
    }

    #[test]
    fn negative_and_products() {
        let f = Fq::new(3).unwrap();
        let p = parse_poly("t^3 - t", &f).unwrap();
        assert_eq!(p, Poly::from_ints(&f, &[0, -1, 0, 1]));
        let q = parse_poly("(t+1)*(t+2)", &f).unwrap();
        assert_eq!(q, Poly::from_ints(&f, &[2, 0, 1]));
        assert_eq!(parse_poly(" 2 * t ^ 2 ", &f).unwrap(), Poly::from_ints(&f, &[0, 0, 2]));
    }

    #[test]
    fn errors_carry_positions() {
        let f = Fq::new(3).unwrap();
        match parse_poly("t + $", &f) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        assert!(parse_poly("z", &f).is_err());
        assert!(parse_poly("(t+1", &f).is_err());
        assert!(parse_poly("t*tau", &f).is_err());
    }

    #[test]
    fn models() {
        let f = Fq::new(3).unwrap();
        let m = parse_model("t + (t^3)*tau", &f).unwrap();
        assert_eq!(m.rank(), 1);
        assert_eq!(format_ore(m.phi_t()), "t + (t^3)*tau");
        let c = parse_model("carlitz", &f).unwrap();
        assert_eq!(format_ore(c.phi_t()), "t + tau");
        let m2 = parse_model("t + 2*t^3*tau + t^9*tau^2", &f).unwrap();
        assert_eq!(parse_model(&format_ore(m2.phi_t()), &f).unwrap(), m2);
        // tau*t = t^3*tau
        let o = parse_ore("tau*t", &f).unwrap();
        assert_eq!(o.coeff(1), Poly::from_ints(&f, &[0, 0, 0, 1]));
        assert!(parse_model("t^2 + tau", &f).is_err());
        assert!(parse_model("t", &f).is_err());
    }
}
