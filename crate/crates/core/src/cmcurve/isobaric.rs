//! Division polynomials through their isobaric structure.
//!
//! With weights `x: 1, a: 2, b: 3` every `T_m` is isobaric of weight
//! `W = deg T_m`, so `T_m = x^W P(a/x^2, b/x^3)` for a polynomial `P` in two
//! variables. Products of such `P` are done by Kronecker substitution into
//! a single big integer, which lets the bignum multiplier (Karatsuba and
//! Toom-3) do the work.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, Zero};

use super::Zab;

/// `x^w sum c[i][j] (a/x^2)^i (b/x^3)^j`.
#[derive(Clone, Debug, PartialEq)]
pub(super) struct Iso {
    w: u32,
    c: Vec<Vec<BigInt>>,
}

impl Iso {
    fn from_terms(w: u32, terms: &[(usize, usize, i64)]) -> Self {
        let rows = terms.iter().map(|t| t.0).max().map_or(0, |i| i + 1);
        let cols = terms.iter().map(|t| t.1).max().map_or(0, |j| j + 1);
        let mut c = vec![vec![BigInt::zero(); cols]; rows];
        for &(i, j, v) in terms {
            c[i][j] += v;
        }
        Iso { w, c }
    }

    fn dims(&self) -> (usize, usize) {
        (self.c.len(), self.c.iter().map(Vec::len).max().unwrap_or(0))
    }

    fn max_bits(&self) -> u64 {
        self.c.iter().flatten().map(BigInt::bits).max().unwrap_or(0)
    }

    fn nonzero(&self) -> usize {
        self.c.iter().flatten().filter(|v| !v.is_zero()).count()
    }

    /// Kronecker image: coefficient `(i, j)` sits at bit `s (i cols + j)`.
    fn pack(&self, cols: usize, s: usize) -> BigInt {
        let words = s / 32;
        let (rows, _) = self.dims();
        let len = rows * cols * words;
        let (mut pos, mut neg) = (vec![0u32; len], vec![0u32; len]);
        for (i, row) in self.c.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v.is_zero() {
                    continue;
                }
                let at = (i * cols + j) * words;
                let dst = if v.is_negative() { &mut neg } else { &mut pos };
                for (k, d) in v.magnitude().to_u32_digits().into_iter().enumerate() {
                    dst[at + k] = d;
                }
            }
        }
        BigInt::from_biguint(Sign::Plus, BigUint::new(pos)) - BigInt::from_biguint(Sign::Plus, BigUint::new(neg))
    }

    pub(super) fn mul(&self, o: &Iso) -> Iso {
        let (r1, c1) = self.dims();
        let (r2, c2) = o.dims();
        if r1 == 0 || r2 == 0 {
            return Iso { w: self.w + o.w, c: vec![] };
        }
        let (rows, cols) = (r1 + r2 - 1, c1 + c2 - 1);
        let terms = self.nonzero().min(o.nonzero()).max(1) as u64;
        // |coefficient| < 2^(s - 1) with room for the balanced digits.
        let need = self.max_bits() + o.max_bits() + (64 - terms.leading_zeros() as u64) + 2;
        let s = (need as usize).div_ceil(32) * 32;
        let prod = self.pack(cols, s) * o.pack(cols, s);
        Iso { w: self.w + o.w, c: unpack(&prod, rows, cols, s) }
    }

    pub(super) fn sub(&self, o: &Iso) -> Iso {
        assert_eq!(self.w, o.w, "isobaric difference of unequal weights");
        let (r1, c1) = self.dims();
        let (r2, c2) = o.dims();
        let (rows, cols) = (r1.max(r2), c1.max(c2));
        let get = |p: &Iso, i: usize, j: usize| p.c.get(i).and_then(|r| r.get(j)).cloned().unwrap_or_default();
        let c = (0..rows).map(|i| (0..cols).map(|j| get(self, i, j) - get(o, i, j)).collect()).collect();
        Iso { w: self.w, c }
    }

    /// Coefficients in `x`, lowest degree first.
    pub(super) fn to_zab(&self) -> Vec<Zab> {
        let mut out = vec![BTreeMap::new(); self.w as usize + 1];
        for (i, row) in self.c.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    let k = self.w as usize - 2 * i - 3 * j;
                    out[k].insert((i as u32, j as u32), v.clone());
                }
            }
        }
        let mut out: Vec<Zab> = out.into_iter().map(Zab).collect();
        while out.last().is_some_and(|z| z.0.is_empty()) {
            out.pop();
        }
        out
    }
}

/// Reads balanced base `2^s` digits of `n` into a `rows x cols` array.
fn unpack(n: &BigInt, rows: usize, cols: usize, s: usize) -> Vec<Vec<BigInt>> {
    let words = s / 32;
    let digits = n.magnitude().to_u32_digits();
    let base = BigInt::one() << s;
    let half = BigInt::one() << (s - 1);
    let mut carry = BigInt::zero();
    let mut flat = Vec::with_capacity(rows * cols);
    for idx in 0..rows * cols {
        let lo = (idx * words).min(digits.len());
        let hi = ((idx + 1) * words).min(digits.len());
        let mut v = BigInt::from_biguint(Sign::Plus, BigUint::from_slice(&digits[lo..hi])) + &carry;
        if v >= half {
            v -= &base;
            carry = BigInt::one();
        } else {
            carry = BigInt::zero();
        }
        flat.push(if n.is_negative() { -v } else { v });
    }
    debug_assert!(carry.is_zero());
    let mut it = flat.into_iter();
    (0..rows).map(|_| it.by_ref().take(cols).collect()).collect()
}

/// Memoised `T_m` in isobaric form.
#[derive(Default)]
pub(super) struct IsoDivisionPolys {
    cache: HashMap<u32, Iso>,
}

impl IsoDivisionPolys {
    /// `(4(x^3 + a x + b))^2 = x^6 * 16 (1 + alpha + beta)^2`.
    fn w2() -> Iso {
        Iso::from_terms(6, &[(0, 0, 16), (1, 0, 32), (0, 1, 32), (2, 0, 16), (1, 1, 32), (0, 2, 16)])
    }

    pub(super) fn t(&mut self, m: u32) -> Iso {
        if let Some(v) = self.cache.get(&m) {
            return v.clone();
        }
        let v = match m {
            0 => Iso { w: 0, c: vec![] },
            1 | 2 => Iso::from_terms(0, &[(0, 0, 1)]),
            3 => Iso::from_terms(4, &[(0, 0, 3), (1, 0, 6), (0, 1, 12), (2, 0, -1)]),
            4 => Iso::from_terms(
                6,
                &[(0, 0, 2), (1, 0, 10), (0, 1, 40), (2, 0, -10), (1, 1, -8), (0, 2, -16), (3, 0, -2)],
            ),
            _ if m % 2 == 1 => {
                let k = (m - 1) / 2;
                let (tk2, tk, tk1, tkm1) = (self.t(k + 2), self.t(k), self.t(k + 1), self.t(k - 1));
                let first = tk2.mul(&tk.mul(&tk).mul(&tk));
                let second = tk1.mul(&tk1).mul(&tk1).mul(&tkm1);
                if k.is_multiple_of(2) {
                    Self::w2().mul(&first).sub(&second)
                } else {
                    first.sub(&Self::w2().mul(&second))
                }
            }
            _ => {
                let k = m / 2;
                let (tk, tk2, tkm1, tk1, tkm2) = (self.t(k), self.t(k + 2), self.t(k - 1), self.t(k + 1), self.t(k - 2));
                tk.mul(&tk2.mul(&tkm1.mul(&tkm1)).sub(&tk1.mul(&tk1).mul(&tkm2)))
            }
        };
        self.cache.insert(m, v.clone());
        v
    }
}
