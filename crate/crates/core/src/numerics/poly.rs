use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{BigComplex, PrecisionCtx, Real};
use crate::error::{Error, Result};

/// Polynomial with exact integer coefficients, lowest degree first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        IntPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// Monic polynomial from coefficients listed highest degree first, leading 1 implied.
    pub fn monic_from_desc(lower: &[i64]) -> Self {
        let mut c: Vec<BigInt> = lower.iter().rev().map(|&v| BigInt::from(v)).collect();
        c.push(BigInt::one());
        IntPoly::new(c)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_complex(&self, x: &BigComplex) -> BigComplex {
        let p = x.prec();
        self.coeffs
            .iter()
            .rev()
            .fold(BigComplex::zero(p), |acc, c| &(&acc * x) + &BigComplex::from_bigint(c, p))
    }

    pub fn to_complex(&self, ctx: PrecisionCtx) -> ComplexPoly {
        ComplexPoly::new(self.coeffs.iter().map(|c| BigComplex::from_bigint(c, ctx.bits())).collect())
    }

    /// Largest coefficient bit length.
    pub fn height_bits(&self) -> u64 {
        self.coeffs.iter().map(|c| c.bits()).max().unwrap_or(0)
    }

    /// Coefficients as decimal strings, lowest degree first.
    pub fn to_decimal_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }

    pub fn from_decimal_strings<S: AsRef<str>>(coeffs: &[S]) -> Result<Self> {
        let parsed: std::result::Result<Vec<BigInt>, _> =
            coeffs.iter().map(|s| BigInt::from_str(s.as_ref().trim())).collect();
        parsed
            .map(IntPoly::new)
            .map_err(|e| Error::InvalidInput(format!("bad integer coefficient: {e}")))
    }
}

impl fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntPoly({})", self)
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let unit = mag.is_one() && i > 0;
            if !unit {
                write!(f, "{}", mag)?;
            }
            match i {
                0 => {}
                1 if unit => write!(f, "X")?,
                1 => write!(f, "*X")?,
                _ if unit => write!(f, "X^{}", i)?,
                _ => write!(f, "*X^{}", i)?,
            }
        }
        Ok(())
    }
}

impl FromStr for IntPoly {
    type Err = Error;

    /// Parses the format produced by `Display`, e.g. `X^2 + 191025*X - 121287375`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse polynomial '{s}'"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        let mut terms = vec![];
        let mut start = 0;
        let bytes = compact.as_bytes();
        for i in 1..bytes.len() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'^' {
                terms.push(&compact[start..i]);
                start = i;
            }
        }
        terms.push(&compact[start..]);
        let mut coeffs: Vec<BigInt> = vec![];
        for t in terms {
            let (sign, body) = match t.as_bytes()[0] {
                b'-' => (-1, &t[1..]),
                b'+' => (1, &t[1..]),
                _ => (1, t),
            };
            let (coef, power) = if let Some(pos) = body.find('X') {
                let c = &body[..pos];
                let c = c.strip_suffix('*').unwrap_or(c);
                let coef = if c.is_empty() { BigInt::one() } else { BigInt::from_str(c).map_err(|_| bad())? };
                let rest = &body[pos + 1..];
                let power = if rest.is_empty() {
                    1usize
                } else {
                    rest.strip_prefix('^').ok_or_else(bad)?.parse::<usize>().map_err(|_| bad())?
                };
                (coef, power)
            } else {
                (BigInt::from_str(body).map_err(|_| bad())?, 0)
            };
            if coeffs.len() <= power {
                coeffs.resize(power + 1, BigInt::zero());
            }
            coeffs[power] += coef * sign;
        }
        Ok(IntPoly::new(coeffs))
    }
}

/// Polynomial with arbitrary precision complex coefficients, lowest degree first.
#[derive(Clone, Debug)]
pub struct ComplexPoly {
    coeffs: Vec<BigComplex>,
}

impl ComplexPoly {
    pub fn new(coeffs: Vec<BigComplex>) -> Self {
        ComplexPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[BigComplex] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: &BigComplex) -> BigComplex {
        let p = x.prec();
        self.coeffs.iter().rev().fold(BigComplex::zero(p), |acc, c| &(&acc * x) + c)
    }

    pub fn mul(&self, other: &ComplexPoly) -> ComplexPoly {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return ComplexPoly::new(vec![]);
        }
        let p = self.coeffs[0].prec().max(other.coeffs[0].prec());
        let mut out = vec![BigComplex::zero(p); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        ComplexPoly::new(out)
    }

    /// All complex roots by Aberth iteration (simultaneous Newton with
    /// repulsion). Roots must be simple for fast convergence.
    pub fn roots(&self, ctx: PrecisionCtx) -> Result<Vec<BigComplex>> {
        let n = self.degree();
        let lead = self.coeffs.last().filter(|c| !c.is_zero());
        let Some(lead) = lead else {
            return Err(Error::InvalidInput("roots of the zero polynomial".into()));
        };
        let p = ctx.bits();
        let monic: Vec<BigComplex> = self.coeffs.iter().map(|c| (c / lead).with_prec(p)).collect();
        let deriv: Vec<BigComplex> = monic
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.scale(&Real::from_int(i as i64, p)))
            .collect();
        let horner = |cs: &[BigComplex], x: &BigComplex| {
            cs.iter().rev().fold(BigComplex::zero(p), |acc, c| &(&acc * x) + c)
        };
        // Cauchy bound for the starting circle.
        let radius = 1.0 + monic[..n].iter().map(|c| c.log2_abs().exp2()).fold(0.0, f64::max);
        let mut z: Vec<BigComplex> = (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * (k as f64 + 0.3) / n as f64;
                BigComplex::from_f64(0.7 * radius * t.cos(), 0.7 * radius * t.sin(), p)
            })
            .collect();
        // Once every correction is below half precision, a few more cubically
        // convergent steps reach full precision.
        let target = -(p as f64) / 2.0;
        let mut polish = 0;
        for _ in 0..(200 + 20 * n) {
            let mut done = true;
            for k in 0..n {
                let w = &horner(&monic, &z[k]) / &horner(&deriv, &z[k]);
                let mut s = BigComplex::zero(p);
                for j in 0..n {
                    if j != k {
                        s = &s + &(&z[k] - &z[j]).recip();
                    }
                }
                let corr = &w / &(&BigComplex::one(p) - &(&w * &s));
                if corr.log2_abs() > target + z[k].log2_abs().max(0.0) {
                    done = false;
                }
                z[k] = &z[k] - &corr;
            }
            if done || polish > 0 {
                polish += 1;
                if polish > 3 {
                    return Ok(z);
                }
            }
        }
        Err(Error::RoundingUncertified { worst: 1.0, tol: target.exp2() })
    }

    /// log2 of the largest coefficient modulus.
    pub fn max_log2_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.log2_abs()).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Expand `prod (X - r)` over `roots` with a balanced subproduct tree.
pub fn poly_from_roots(roots: &[BigComplex], ctx: PrecisionCtx) -> Result<ComplexPoly> {
    if roots.is_empty() {
        return Err(Error::InvalidInput("poly_from_roots needs at least one root".into()));
    }
    if ctx.bits() > super::DEFAULT_MAX_BITS {
        return Err(Error::PrecisionExhausted { bits: ctx.bits(), cap: super::DEFAULT_MAX_BITS });
    }
    let p = ctx.bits();
    let mut layer: Vec<ComplexPoly> = roots
        .iter()
        .map(|r| ComplexPoly::new(vec![-r.with_prec(p), BigComplex::one(p)]))
        .collect();
    while layer.len() > 1 {
        let mut next = Vec::with_capacity(layer.len().div_ceil(2));
        let mut it = layer.chunks(2);
        for pair in &mut it {
            if pair.len() == 2 {
                next.push(pair[0].mul(&pair[1]));
            } else {
                next.push(pair[0].clone());
            }
        }
        layer = next;
    }
    Ok(layer.pop().unwrap())
}

/// Round every coefficient to the nearest integer, certifying that each is
/// within `tol` of it (and has imaginary part below `tol`).
pub fn round_to_int_poly(p: &ComplexPoly, tol: f64) -> Result<IntPoly> {
    if !(0.0..0.5).contains(&tol) {
        return Err(Error::InvalidInput(format!("rounding tolerance {tol} must lie in [0, 0.5)")));
    }
    let mut worst = 0f64;
    let mut out = Vec::with_capacity(p.coeffs.len());
    for c in &p.coeffs {
        let n = c.re.round();
        let prec = c.prec().max(n.bits() as u32 + 16);
        let dist_re = (&c.re.with_prec(prec) - &Real::from_bigint(&n, prec)).abs().to_f64();
        let dist_im = c.im.abs().to_f64();
        worst = worst.max(dist_re).max(dist_im);
        out.push(n);
    }
    if worst >= tol {
        return Err(Error::RoundingUncertified { worst, tol });
    }
    Ok(IntPoly::new(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(bits: u32) -> PrecisionCtx {
        PrecisionCtx::new(bits).unwrap()
    }

    #[test]
    fn conjugate_pair_gives_x2_plus_1() {
        let c = ctx(128);
        let p = poly_from_roots(&[BigComplex::i(128), -BigComplex::i(128)], c).unwrap();
        let tol = 2f64.powi(-(128 - 8));
        let expect = [1.0, 0.0, 1.0];
        for (coef, e) in p.coeffs().iter().zip(expect) {
            assert!((coef.re.to_f64() - e).abs() < tol && coef.im.to_f64().abs() < tol);
        }
        assert_eq!(round_to_int_poly(&p, 0.25).unwrap(), IntPoly::from_i64(&[1, 0, 1]));
    }

    #[test]
    fn single_zero_root() {
        let p = poly_from_roots(&[BigComplex::zero(64)], ctx(64)).unwrap();
        assert_eq!(round_to_int_poly(&p, 0.25).unwrap(), IntPoly::from_i64(&[0, 1]));
    }

    #[test]
    fn empty_roots_rejected() {
        assert!(poly_from_roots(&[], ctx(64)).is_err());
    }

    #[test]
    fn near_integer_rounds() {
        let p = 200;
        let eps = Real::from_f64(1e-30, p);
        let coeffs = vec![
            BigComplex::new(&Real::one(p) - &Real::from_f64(1e-20, p), Real::zero(p)),
            BigComplex::new(Real::from_int(2, p), eps),
            BigComplex::one(p),
        ];
        let r = round_to_int_poly(&ComplexPoly::new(coeffs), 0.25).unwrap();
        assert_eq!(r, IntPoly::from_i64(&[1, 2, 1]));
    }

    #[test]
    fn far_from_integer_is_uncertified() {
        let p = 100;
        let coeffs = vec![BigComplex::from_f64(0.3, 0.0, p), BigComplex::one(p)];
        match round_to_int_poly(&ComplexPoly::new(coeffs), 0.25) {
            Err(Error::RoundingUncertified { worst, .. }) => assert!((worst - 0.3).abs() < 1e-12),
            other => panic!("expected uncertified, got {other:?}"),
        }
    }

    #[test]
    fn display_and_parse_round_trip() {
        let p = IntPoly::from_i64(&[-121287375, 191025, 1]);
        assert_eq!(p.to_string(), "X^2 + 191025*X - 121287375");
        assert_eq!(p.to_string().parse::<IntPoly>().unwrap(), p);
        let q = IntPoly::from_i64(&[1, 2, 1, -1, -1, -1, 1, 1]);
        assert_eq!(q.to_string(), "X^7 + X^6 - X^5 - X^4 - X^3 + X^2 + 2*X + 1");
        assert_eq!(q.to_string().parse::<IntPoly>().unwrap(), q);
        assert_eq!("-X".parse::<IntPoly>().unwrap(), IntPoly::from_i64(&[0, -1]));
    }

    #[test]
    fn expansion_roots_evaluate_small() {
        let c = ctx(192);
        let roots: Vec<BigComplex> = (1..=9)
            .map(|k| BigComplex::from_f64(k as f64 * 0.37 - 1.1, (k as f64).sin() * 3.0, 192))
            .collect();
        let p = poly_from_roots(&roots, c).unwrap();
        let scale = p.max_log2_coeff();
        for r in &roots {
            assert!(p.eval(r).log2_abs() < scale - 96.0);
        }
    }
}
