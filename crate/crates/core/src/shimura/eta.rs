//! Transformation of weight zero eta products `prod eta((a tau + b)/d)^r`
//! under `SL2(Z)` and under `zeta_N -> zeta_N^k` on Fourier coefficients.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::arith::ext_gcd;
use crate::error::{Error, Result};
use crate::quadforms::Mat2;

/// `eta((a tau + b)/d)^r` with `a, d > 0` and `0 <= b < d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EtaTerm {
    pub d: i64,
    pub a: i64,
    pub b: i64,
    pub r: i32,
}

impl EtaTerm {
    pub fn new(a: i64, b: i64, d: i64, r: i32) -> Result<Self> {
        if a <= 0 || d <= 0 {
            return Err(Error::InvalidInput(format!("eta argument ({a} tau + {b})/{d} needs a, d > 0")));
        }
        let (b2, shift) = (b.rem_euclid(d), b.div_euclid(d));
        if shift != 0 {
            return Err(Error::InvalidInput(format!("eta argument offset {b} must lie in [0, {d})")));
        }
        Ok(EtaTerm { a, b: b2, d, r })
    }

    pub fn det(&self) -> i64 {
        self.a * self.d
    }
}

/// Sorts, merges equal arguments and drops vanishing exponents.
pub fn canonical(mut terms: Vec<EtaTerm>) -> Vec<EtaTerm> {
    terms.sort();
    let mut out: Vec<EtaTerm> = vec![];
    for t in terms {
        match out.last_mut() {
            Some(l) if (l.a, l.b, l.d) == (t.a, t.b, t.d) => l.r += t.r,
            _ => out.push(t),
        }
    }
    out.retain(|t| t.r != 0);
    out
}

/// `4 c^2 s(d, c)` for the Dedekind sum `s(d, c)`, `c > 0`.
fn dedekind_sum_4c2(d: i64, c: i64) -> i64 {
    (1..c).map(|n| (2 * n - c) * (2 * (d * n).rem_euclid(c) - c)).sum()
}

/// Dedekind sum `s(d, c) = sum_{n mod c} ((n/c)) ((dn/c))`.
pub fn dedekind_sum(d: i64, c: i64) -> BigRational {
    BigRational::new(BigInt::from(dedekind_sum_4c2(d, c)), BigInt::from(4 * c * c))
}

/// Exponent `e` mod 24 with `eta(g z) = zeta_24^e sqrt(-i(cz + d)) eta(z)` for
/// `c > 0`, and `eta(z + b) = zeta_24^b eta(z)` for `g = T^b`.
pub fn eta_multiplier(g: Mat2) -> Result<i64> {
    let [[a, b], [c, d]] = g;
    if a * d - b * c != 1 {
        return Err(Error::Internal(format!("eta multiplier of a non-SL2 matrix {g:?}")));
    }
    if c == 0 {
        if a != 1 {
            return Err(Error::Internal("eta multiplier needs a normalised matrix".into()));
        }
        return Ok(b.rem_euclid(24));
    }
    if c < 0 {
        return Err(Error::Internal("eta multiplier needs c >= 0".into()));
    }
    // e = (a + d)/c - 12 s(d, c), an integer.
    let num = 4 * c * (a + d) - 12 * dedekind_sum_4c2(d, c);
    let den = 4 * c * c;
    if num % den != 0 {
        return Err(Error::Internal(format!("non-integral eta multiplier for {g:?}")));
    }
    Ok((num / den).rem_euclid(24))
}

fn mat_mul(x: Mat2, y: Mat2) -> Mat2 {
    [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]
}

/// Splits an integer matrix `P` of positive determinant as `P = g H` with
/// `g` in `SL2(Z)` and `H = [[a, b], [0, d]]`, `a, d > 0`, `0 <= b < d`.
pub fn hermite_split(p: Mat2) -> Result<(Mat2, Mat2)> {
    let [[p0, q0], [r0, s0]] = p;
    let n = p0 * s0 - q0 * r0;
    if n <= 0 {
        return Err(Error::Internal(format!("hermite split needs positive determinant, got {n}")));
    }
    let (g, x, y) = ext_gcd(p0, r0);
    // V = [[x, y], [-r/g, p/g]] has det 1 and kills the lower-left entry.
    let v = [[x, y], [-r0 / g, p0 / g]];
    let h = mat_mul(v, p);
    let d = h[1][1];
    debug_assert_eq!(h[0][0], g);
    debug_assert_eq!(h[1][0], 0);
    let t = h[0][1].div_euclid(d);
    let v = mat_mul([[1, -t], [0, 1]], v);
    let h = mat_mul(v, p);
    // g = V^-1.
    let ginv = [[v[1][1], -v[0][1]], [-v[1][0], v[0][0]]];
    Ok((ginv, h))
}

/// The outcome of transforming an eta product.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaImage {
    /// Root of unity `zeta_24^zeta24`.
    pub zeta24: i64,
    /// The constant also carries `sqrt(radicand)`.
    pub radicand: BigRational,
    pub terms: Vec<EtaTerm>,
}

/// `(prod eta(A_i tau)^r_i) o g` for `g` in `SL2(Z)` with `c > 0`, or `c = 0, d = 1`.
/// Requires weight zero (`sum r_i = 0`) so that the automorphy factors cancel.
pub fn act_sl2(terms: &[EtaTerm], g: Mat2) -> Result<EtaImage> {
    if terms.iter().map(|t| t.r as i64).sum::<i64>() != 0 {
        return Err(Error::InvalidInput("eta product must have weight zero".into()));
    }
    let [[_, _], [c, d]] = g;
    if c < 0 || (c == 0 && d != 1) {
        return Err(Error::Internal(format!("unnormalised transformation {g:?}")));
    }
    let mut zeta = 0i64;
    let mut radicand = BigRational::one();
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        let (gp, h) = hermite_split(mat_mul([[t.a, t.b], [0, t.d]], g))?;
        zeta += t.r as i64 * eta_multiplier(gp)?;
        // j(g', A' tau) = (d_A / d_A') (c tau + d).
        let ratio = BigRational::new(BigInt::from(t.d), BigInt::from(h[1][1]));
        radicand *= if t.r >= 0 { ratio.pow(t.r) } else { ratio.recip().pow(-t.r) };
        out.push(EtaTerm { a: h[0][0], b: h[0][1], d: h[1][1], r: t.r });
    }
    Ok(EtaImage { zeta24: zeta.rem_euclid(24), radicand, terms: canonical(out) })
}

/// Conjugates the Fourier coefficients by `zeta -> zeta^k`:
/// `eta((a tau + b)/d) -> eta((a tau + bk)/d)`.
pub fn act_galois(terms: &[EtaTerm], k: i64) -> EtaImage {
    let mut zeta = 0i64;
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        let bk = t.b as i128 * k as i128;
        let b2 = bk.rem_euclid(t.d as i128) as i64;
        let shift = ((bk - b2 as i128) / t.d as i128).rem_euclid(24) as i64;
        zeta += t.r as i64 * shift;
        out.push(EtaTerm { b: b2, ..*t });
    }
    EtaImage { zeta24: zeta.rem_euclid(24), radicand: BigRational::one(), terms: canonical(out) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedekind_reciprocity() {
        // s(d, c) + s(c, d) = -1/4 + (d/c + c/d + 1/(cd))/12 for coprime c, d.
        for (c, d) in [(5, 3), (7, 2), (11, 4), (13, 8)] {
            let lhs = dedekind_sum(d, c) + dedekind_sum(c, d);
            let rhs = BigRational::new((-1).into(), 4.into())
                + BigRational::new(BigInt::from(d * d + c * c + 1), BigInt::from(12 * c * d));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn multiplier_examples() {
        // eta(-1/z) = sqrt(-iz) eta(z).
        assert_eq!(eta_multiplier([[0, -1], [1, 0]]).unwrap(), 0);
        assert_eq!(eta_multiplier([[1, 5], [0, 1]]).unwrap(), 5);
    }

    #[test]
    fn hermite_split_reassembles() {
        for p in [[[0, -2], [1, 0]], [[2, 3], [5, 8]], [[1, 1], [-2, 0]], [[3, 0], [7, 1]]] {
            let (g, h) = hermite_split(p).unwrap();
            assert_eq!(g[0][0] * g[1][1] - g[0][1] * g[1][0], 1);
            assert_eq!(h[1][0], 0);
            assert!(h[0][0] > 0 && h[1][1] > 0 && (0..h[1][1]).contains(&h[0][1]));
            assert_eq!(mat_mul(g, h), p);
        }
    }
}
