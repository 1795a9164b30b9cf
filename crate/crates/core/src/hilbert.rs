//! Hilbert class polynomials and the splitting of primes in the Hilbert
//! class field.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::{is_prime, isqrt, kronecker, sqrt_mod_prime};
use crate::error::{Error, Result};
use crate::modfunc;
use crate::numerics::{poly_from_roots, round_to_int_poly, IntPoly, PrecisionCtx, RetryPolicy};
use crate::quadforms::{enumerate_reduced_forms, tau_of_form, Discriminant};

/// The modular function whose values at CM points are the roots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassFunction {
    J,
    /// A class invariant of higher level, described by its expression.
    Invariant(String),
}

impl fmt::Display for ClassFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassFunction::J => write!(f, "j"),
            ClassFunction::Invariant(s) => write!(f, "{s}"),
        }
    }
}

/// A class polynomial with exact integer coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassPolynomial {
    pub disc: Discriminant,
    pub poly: IntPoly,
    pub function: ClassFunction,
    /// Precision (bits) at which the rounding was certified.
    pub bits: u32,
}

/// Starting precision: `ceil(pi sqrt|D| sum 1/a / ln 2) + 10 h + 64`.
pub fn initial_precision(d: Discriminant) -> u32 {
    let forms = enumerate_reduced_forms(d);
    let s: f64 = forms.iter().map(|f| 1.0 / f.a as f64).sum();
    let bits = std::f64::consts::PI * (-d.value() as f64).sqrt() * s / std::f64::consts::LN_2;
    bits.ceil() as u32 + 10 * forms.len() as u32 + 64
}

/// `prod (X - j(tau_a))` over the reduced forms of discriminant `D`.
pub fn hilbert_class_poly(d: i64, policy: &RetryPolicy) -> Result<ClassPolynomial> {
    let disc = Discriminant::new(d)?;
    if !disc.is_fundamental() {
        return Err(Error::NotFundamental(d));
    }
    let forms = enumerate_reduced_forms(disc);
    let (poly, bits) = policy.run(initial_precision(disc), |ctx: PrecisionCtx| {
        let roots = forms
            .par_iter()
            .map(|&f| modfunc::j_from_f2(&tau_of_form(f, ctx).value, ctx))
            .collect::<Result<Vec<_>>>()?;
        let p = poly_from_roots(&roots, ctx)?;
        round_to_int_poly(&p, policy.tol)
    })?;
    Ok(ClassPolynomial { disc, poly, function: ClassFunction::J, bits })
}

/// Solves `4p = x^2 + |D| y^2`, returning a verified solution if one exists.
pub fn cornacchia(p: i64, d: i64) -> Option<(i64, i64)> {
    if !is_prime(p) || d >= 0 {
        return None;
    }
    let ad = -d;
    if p == 2 {
        // 8 = x^2 + |D| y^2 by search.
        for y in 0..=2 {
            let r = 8 - ad * y * y;
            if r >= 0 && isqrt(r) * isqrt(r) == r {
                return Some((isqrt(r), y));
            }
        }
        return None;
    }
    if kronecker(d, p) == -1 {
        return None;
    }
    let mut x0 = sqrt_mod_prime(d, p)?;
    if (x0 - d).rem_euclid(2) != 0 {
        x0 = p - x0;
    }
    let (mut a, mut b) = (2 * p, x0);
    let l = isqrt(4 * p);
    while b > l {
        (a, b) = (b, a % b);
    }
    let rest = 4 * p - b * b;
    if rest % ad != 0 {
        return None;
    }
    let c = rest / ad;
    let y = isqrt(c);
    (y * y == c && b * b + ad * y * y == 4 * p).then_some((b, y))
}

/// How a class polynomial factors modulo a prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitVerdict {
    SplitsCompletely,
    NoRoot,
    Partial,
}

impl fmt::Display for SplitVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitVerdict::SplitsCompletely => "splits-completely",
            SplitVerdict::NoRoot => "no-root",
            SplitVerdict::Partial => "partial",
        })
    }
}

/// Dense polynomials over `F_p`, ascending coefficients.
mod fp {
    pub type Poly = Vec<u64>;

    pub fn trim(mut a: Poly) -> Poly {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    fn inv(a: u64, p: u64) -> u64 {
        crate::arith::pow_mod(a as i64, p - 2, p as i64) as u64
    }

    pub fn mul(a: &Poly, b: &Poly, p: u64) -> Poly {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut out = vec![0u128; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u128 * y as u128) % p as u128;
            }
        }
        trim(out.into_iter().map(|x| x as u64).collect())
    }

    pub fn rem(a: &Poly, m: &Poly, p: u64) -> Poly {
        let mut a = trim(a.clone());
        let lead_inv = inv(*m.last().expect("nonzero modulus"), p);
        while a.len() >= m.len() {
            let shift = a.len() - m.len();
            let c = (*a.last().unwrap() as u128 * lead_inv as u128 % p as u128) as u64;
            for (i, &mi) in m.iter().enumerate() {
                let sub = (c as u128 * mi as u128 % p as u128) as u64;
                a[shift + i] = (a[shift + i] + p - sub) % p;
            }
            a = trim(a);
        }
        a
    }

    pub fn gcd(a: &Poly, b: &Poly, p: u64) -> Poly {
        let (mut a, mut b) = (trim(a.clone()), trim(b.clone()));
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    pub fn sub(a: &Poly, b: &Poly, p: u64) -> Poly {
        let n = a.len().max(b.len());
        trim(
            (0..n)
                .map(|i| (a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0)) % p)
                .collect(),
        )
    }

    pub fn derivative(a: &Poly, p: u64) -> Poly {
        trim(a.iter().enumerate().skip(1).map(|(i, &c)| (c as u128 * i as u128 % p as u128) as u64).collect())
    }

    /// `X^e mod m`.
    pub fn x_pow_mod(e: u64, m: &Poly, p: u64) -> Poly {
        let mut result = vec![1u64];
        let mut base = rem(&vec![0, 1], m, p);
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = rem(&mul(&result, &base, p), m, p);
            }
            base = rem(&mul(&base, &base, p), m, p);
            e >>= 1;
        }
        result
    }
}

fn reduce_mod_p(poly: &IntPoly, p: i64) -> fp::Poly {
    let pb = BigInt::from(p);
    fp::trim(poly.coeffs().iter().map(|c| c.mod_floor(&pb).to_u64().unwrap()).collect())
}

/// Splitting behaviour of `cp` modulo `p` from `deg gcd(X^p - X, cp mod p)`.
pub fn split_check(cp: &ClassPolynomial, p: i64) -> Result<SplitVerdict> {
    split_check_poly(&cp.poly, cp.disc.value(), p)
}

/// [`split_check`] for a bare polynomial attached to discriminant `d`.
pub fn split_check_poly(poly: &IntPoly, d: i64, p: i64) -> Result<SplitVerdict> {
    if p == 2 || !is_prime(p) || d % p == 0 {
        return Err(Error::InvalidInput(format!("{p} must be an odd prime not dividing {d}")));
    }
    let h = poly.degree().ok_or_else(|| Error::InvalidInput("zero polynomial".into()))?;
    let f = reduce_mod_p(poly, p);
    let pu = p as u64;
    if f.len() != h + 1 {
        return Err(Error::InvalidInput(format!("{p} divides the leading coefficient")));
    }
    if fp::gcd(&f, &fp::derivative(&f, pu), pu).len() > 1 {
        return Err(Error::InvalidInput(format!("{p} divides the polynomial discriminant")));
    }
    let xp = fp::x_pow_mod(pu, &f, pu);
    let g = fp::gcd(&f, &fp::sub(&xp, &vec![0, 1], pu), pu);
    let deg = g.len().saturating_sub(1);
    Ok(if deg == h {
        SplitVerdict::SplitsCompletely
    } else if deg == 0 {
        SplitVerdict::NoRoot
    } else {
        SplitVerdict::Partial
    })
}

/// Is `p` valid for [`split_check`] against `poly` (odd, prime to `D` and to disc(poly))?
pub fn is_good_prime(poly: &IntPoly, d: i64, p: i64) -> bool {
    if p == 2 || !is_prime(p) || d % p == 0 {
        return false;
    }
    let f = reduce_mod_p(poly, p);
    let deg_ok = poly.degree().is_some_and(|h| f.len() == h + 1);
    deg_ok && fp::gcd(&f, &fp::derivative(&f, p as u64), p as u64).len() <= 1
}

/// The coefficient of `X^0` as a decimal string (handy for displays).
pub fn constant_term(cp: &ClassPolynomial) -> String {
    let c = cp.poly.coeff(0);
    if c.is_zero() {
        "0".into()
    } else {
        c.to_string()
    }
}
