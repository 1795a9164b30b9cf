//! Parsing of discriminants, forms, complex numbers and exponent vectors.

use std::str::FromStr;

use ccf::numerics::{BigComplex, Real};
use ccf::quadforms::{reduce, Discriminant, QuadForm};
use num_bigint::BigInt;

use crate::error::{CliError, Result};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// A discriminant, possibly given through one of its forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiscInput {
    pub disc: Discriminant,
    pub form: Option<QuadForm>,
    pub reduced: Option<QuadForm>,
}

impl DiscInput {
    pub fn value(&self) -> i64 {
        self.disc.value()
    }
}

fn int_list(s: &str) -> Result<Vec<i64>> {
    let body = s.trim().trim_start_matches('(').trim_end_matches(')');
    body.split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| usage(format!("not an integer: {t:?} in {s:?}"))))
        .collect()
}

/// A positive definite form `a,b,c` (parentheses optional).
pub fn parse_form(s: &str) -> Result<QuadForm> {
    match int_list(s)?[..] {
        [a, b, c] => {
            let f = QuadForm::new(a, b, c);
            if f.disc() >= 0 || a <= 0 {
                return Err(ccf::Error::NotPositiveDefinite { a, b, c }.into());
            }
            Ok(f)
        }
        _ => Err(usage(format!("a form needs three coefficients, got {s:?}"))),
    }
}

/// `D` or `a,b,c`; forms are validated and reduced.
pub fn parse_disc(s: &str) -> Result<DiscInput> {
    if s.contains(',') {
        let f = parse_form(s)?;
        let disc = Discriminant::new(f.disc())?;
        let reduced = reduce(f)?;
        return Ok(DiscInput { disc, form: Some(f), reduced: Some(reduced) });
    }
    let d: i64 = s.trim().parse().map_err(|_| usage(format!("not a discriminant: {s:?}")))?;
    Ok(DiscInput { disc: Discriminant::new(d)?, form: None, reduced: None })
}

/// `n / 10^k` from a plain decimal such as `-0.125` or `3`.
fn parse_decimal(s: &str) -> Result<(BigInt, u32)> {
    let bad = || usage(format!("not a decimal number: {s:?}"));
    let (neg, body) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if (int.is_empty() && frac.is_empty()) || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let n = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    Ok((if neg { -n } else { n }, frac.len() as u32))
}

fn decimal_to_real(s: &str, prec: u32) -> Result<Real> {
    let (n, k) = parse_decimal(s)?;
    let den = BigInt::from(10u32).pow(k);
    Ok(Real::from_bigint(&n, prec) / &Real::from_bigint(&den, prec))
}

/// `a+bi`, `a-bi`, `bi`, `i` or a real `a`, with exact decimal parts.
pub fn parse_complex(s: &str, prec: u32) -> Result<BigComplex> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = t.strip_suffix('i') else {
        return Ok(BigComplex::from_real(decimal_to_real(&t, prec)?));
    };
    // Split at the last sign that is not the leading one.
    let split = body.char_indices().filter(|&(i, c)| i > 0 && (c == '+' || c == '-')).map(|(i, _)| i).next_back();
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x,
    };
    Ok(BigComplex::new(decimal_to_real(re, prec)?, decimal_to_real(im, prec)?))
}

/// Exponent vectors separated by `;`, entries by `,`. Empty means none.
pub fn parse_subgroup(s: &str, rank: usize) -> Result<Vec<Vec<i64>>> {
    let mut out = vec![];
    for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let v = int_list(part)?;
        if v.len() != rank {
            return Err(usage(format!("generator {part:?} has {} entries, the group has {rank} generators", v.len())));
        }
        out.push(v);
    }
    Ok(out)
}

/// Integer curve coefficients `a,b`.
pub fn parse_spec(s: &str) -> Result<(i64, i64)> {
    match int_list(s)?[..] {
        [a, b] => Ok((a, b)),
        _ => Err(usage(format!("--spec needs a,b, got {s:?}"))),
    }
}

/// Decimal strings for the real and imaginary parts.
pub fn complex_strings(z: &BigComplex) -> (String, String) {
    let show = |r: &Real| if r.is_zero() { "0".to_string() } else { r.to_string() };
    (show(&z.re), show(&z.im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_inputs() {
        let z = parse_complex("-0.5+0.25i", 64).unwrap();
        assert_eq!(z.to_f64(), (-0.5, 0.25));
        assert_eq!(parse_complex("2i", 64).unwrap().to_f64(), (0.0, 2.0));
        assert_eq!(parse_complex("i", 64).unwrap().to_f64(), (0.0, 1.0));
        assert_eq!(parse_complex("1-i", 64).unwrap().to_f64(), (1.0, -1.0));
        assert_eq!(parse_complex("3", 64).unwrap().to_f64(), (3.0, 0.0));
        assert!(parse_complex("x+i", 64).is_err());
    }

    #[test]
    fn discriminant_inputs() {
        assert_eq!(parse_disc("-71").unwrap().value(), -71);
        let f = parse_disc("(2,3,10)").unwrap();
        assert_eq!(f.value(), -71);
        assert_eq!(f.reduced, Some(QuadForm::new(2, -1, 9)));
        assert!(parse_disc("-5").is_err());
        assert!(parse_disc("1,1,-3").is_err());
    }
}
