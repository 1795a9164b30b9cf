//! Reads back the polynomials the text output prints, e.g.
//! `X^2 - (a + 3*b)*X + 7` or `(1 - 2*w)*Y^3 + w`.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Exponent of each variable; absent variables have exponent zero.
pub type Monomial = BTreeMap<String, u32>;

/// A polynomial with integer coefficients in named variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MPoly(pub BTreeMap<Monomial, BigInt>);

impl MPoly {
    fn constant(c: BigInt) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(Monomial::new(), c);
        }
        MPoly(m)
    }

    fn var(name: &str) -> Self {
        MPoly(BTreeMap::from([(Monomial::from([(name.to_string(), 1)]), BigInt::one())]))
    }

    fn add(mut self, o: &MPoly, sign: i32) -> Self {
        for (k, v) in &o.0 {
            let e = self.0.entry(k.clone()).or_default();
            if sign > 0 {
                *e += v;
            } else {
                *e -= v;
            }
        }
        self.0.retain(|_, v| !v.is_zero());
        self
    }

    fn mul(&self, o: &MPoly) -> Self {
        let mut out: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &o.0 {
                let mut m = m1.clone();
                for (v, e) in m2 {
                    *m.entry(v.clone()).or_default() += e;
                }
                *out.entry(m).or_default() += c1 * c2;
            }
        }
        out.retain(|_, v| !v.is_zero());
        MPoly(out)
    }

    fn pow(&self, e: u32) -> Self {
        (0..e).fold(MPoly::constant(BigInt::one()), |acc, _| acc.mul(self))
    }

    /// Coefficients in `var`, lowest degree first, when no other variable occurs.
    pub fn univariate(&self, var: &str) -> Option<Vec<BigInt>> {
        let mut out: Vec<BigInt> = vec![];
        for (m, c) in &self.0 {
            if m.keys().any(|k| k != var) {
                return None;
            }
            let e = m.get(var).copied().unwrap_or(0) as usize;
            if out.len() <= e {
                out.resize(e + 1, BigInt::zero());
            }
            out[e] = c.clone();
        }
        Some(out)
    }

    /// The coefficient of a monomial given as `(variable, exponent)` pairs.
    pub fn coeff(&self, mono: &[(&str, u32)]) -> BigInt {
        let key: Monomial = mono.iter().filter(|(_, e)| *e > 0).map(|(v, e)| (v.to_string(), *e)).collect();
        self.0.get(&key).cloned().unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>, String> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = vec![];
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let j = (i..cs.len()).find(|&j| !cs[j].is_ascii_digit()).unwrap_or(cs.len());
            let digits: String = cs[i..j].iter().collect();
            out.push(Tok::Num(BigInt::from_str(&digits).map_err(|e| e.to_string())?));
            i = j;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let j = (i..cs.len()).find(|&j| !(cs[j].is_ascii_alphanumeric() || cs[j] == '_')).unwrap_or(cs.len());
            out.push(Tok::Ident(cs[i..j].iter().collect()));
            i = j;
        } else if "+-*^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(format!("unexpected character {c:?}"));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<MPoly, String> {
        let mut sign = if self.eat('-') {
            -1
        } else {
            self.eat('+');
            1
        };
        let mut acc = MPoly::default();
        loop {
            let t = self.term()?;
            acc = acc.add(&t, sign);
            if self.eat('+') {
                sign = 1;
            } else if self.eat('-') {
                sign = -1;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<MPoly, String> {
        let mut acc = self.factor()?;
        while self.eat('*') {
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<MPoly, String> {
        if self.eat('-') {
            return Ok(MPoly::default().add(&self.factor()?, -1));
        }
        let base = self.atom()?;
        if self.eat('^') {
            match self.peek().cloned() {
                Some(Tok::Num(n)) => {
                    self.at += 1;
                    let e = u32::try_from(n).map_err(|_| "exponent too large".to_string())?;
                    return Ok(base.pow(e));
                }
                t => return Err(format!("expected an exponent, found {t:?}")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MPoly, String> {
        let t = self.peek().cloned().ok_or("unexpected end of input")?;
        self.at += 1;
        match t {
            Tok::Num(n) => Ok(MPoly::constant(n)),
            Tok::Ident(v) => Ok(MPoly::var(&v)),
            Tok::Op('(') => {
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err("missing ')'".into());
                }
                Ok(e)
            }
            t => Err(format!("unexpected token {t:?}")),
        }
    }
}

/// Parses a polynomial written with `+ - * ^`, parentheses, integers and
/// alphanumeric variable names.
pub fn parse_poly(s: &str) -> Result<MPoly, String> {
    let mut p = Parser { toks: lex(s)?, at: 0 };
    let out = p.expr()?;
    if p.at != p.toks.len() {
        return Err(format!("trailing input after token {}", p.at));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_printed_forms() {
        let p = parse_poly("X^3 - 2*X + 5").unwrap();
        assert_eq!(p.univariate("X").unwrap(), vec![5.into(), (-2).into(), 0.into(), 1.into()]);
        let q = parse_poly("3*X^4 + 6*a*X^2 + 12*b*X - a^2").unwrap();
        assert_eq!(q.coeff(&[("a", 2)]), BigInt::from(-1));
        assert_eq!(q.coeff(&[("b", 1), ("X", 1)]), BigInt::from(12));
        let r = parse_poly("(1 - 2*w)*Y^2 + w").unwrap();
        assert_eq!(r.coeff(&[("w", 1), ("Y", 2)]), BigInt::from(-2));
        assert_eq!(parse_poly("Y^2 + -3*Y").unwrap(), parse_poly("Y^2 - 3*Y").unwrap());
        assert!(parse_poly("X^").is_err());
    }
}
