//! Binary floating point numbers with a BigInt mantissa.
//!
//! A [`Real`] is `mant * 2^exp`, rounded to `prec` bits after every
//! operation (round half away from zero). Each basic operation has relative
//! error at most `2^(1 - prec)`; the working error model used throughout the
//! crate budgets `2^(3 - prec)` per step.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Mutex;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, PartialEq, Eq)]
pub struct Real {
    mant: BigInt,
    exp: i64,
    prec: u32,
}

fn bit_len(m: &BigInt) -> i64 {
    m.bits() as i64
}

/// Shift right by `s` bits, rounding half away from zero.
fn round_shift(m: &BigInt, s: u64) -> BigInt {
    if s == 0 {
        return m.clone();
    }
    let mag = m.magnitude();
    let half = num_bigint::BigUint::one() << (s - 1);
    let r: num_bigint::BigUint = (mag + half) >> s;
    BigInt::from_biguint(if m.is_negative() { Sign::Minus } else { Sign::Plus }, r)
}

impl Real {
    pub fn zero(prec: u32) -> Self {
        Real { mant: BigInt::zero(), exp: 0, prec }
    }

    pub fn one(prec: u32) -> Self {
        Real::from_int(1, prec)
    }

    pub fn from_int(v: i64, prec: u32) -> Self {
        Real::from_bigint(&BigInt::from(v), prec)
    }

    pub fn from_bigint(v: &BigInt, prec: u32) -> Self {
        Real { mant: v.clone(), exp: 0, prec }.normalized()
    }

    /// `num / den` rounded to `prec` bits.
    pub fn from_ratio(num: i64, den: i64, prec: u32) -> Self {
        Real::from_int(num, prec) / Real::from_int(den, prec)
    }

    pub fn from_f64(v: f64, prec: u32) -> Self {
        assert!(v.is_finite(), "non-finite f64 cannot become a Real");
        if v == 0.0 {
            return Real::zero(prec);
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        Real { mant: BigInt::from(m) * sign, exp: e, prec }.normalized()
    }

    /// Power of two `2^e`.
    pub fn pow2(e: i64, prec: u32) -> Self {
        Real { mant: BigInt::one(), exp: e, prec }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Real { mant: self.mant.clone(), exp: self.exp, prec }.normalized()
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// Exponent of the leading bit plus one: `2^(mag-1) <= |x| < 2^mag`.
    /// Returns `i64::MIN` for zero.
    pub fn magnitude_exp(&self) -> i64 {
        if self.is_zero() {
            i64::MIN
        } else {
            self.exp + bit_len(&self.mant)
        }
    }

    fn normalized(mut self) -> Self {
        if self.mant.is_zero() {
            self.exp = 0;
            return self;
        }
        let len = bit_len(&self.mant);
        let p = self.prec as i64;
        if len > p {
            let s = (len - p) as u64;
            self.mant = round_shift(&self.mant, s);
            self.exp += s as i64;
        }
        self
    }

    pub fn abs(&self) -> Self {
        Real { mant: self.mant.abs(), exp: self.exp, prec: self.prec }
    }

    /// Multiply by `2^k` exactly.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Real { mant: self.mant.clone(), exp: self.exp + k, prec: self.prec }
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn recip(&self) -> Self {
        Real::one(self.prec) / self
    }

    pub fn sqrt(&self) -> Self {
        assert!(!self.is_negative(), "sqrt of a negative Real");
        if self.is_zero() {
            return self.clone();
        }
        let p = self.prec as i64;
        let len = bit_len(&self.mant);
        let mut shift = (2 * p + 4 - len).max(0);
        if (self.exp - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let m = &self.mant << (shift as usize);
        let r = m.sqrt();
        Real { mant: r, exp: (self.exp - shift) / 2, prec: self.prec }.normalized()
    }

    pub fn powi(&self, n: i64) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut result = Real::one(self.prec);
        let mut base = self.clone();
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        result
    }

    /// Nearest integer, ties away from zero.
    pub fn round(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << (self.exp as usize)
        } else {
            round_shift(&self.mant, (-self.exp) as u64)
        }
    }

    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << (self.exp as usize)
        } else {
            let d = BigInt::one() << ((-self.exp) as usize);
            self.mant.div_floor(&d)
        }
    }

    /// Distance from the nearest integer, as a Real.
    pub fn dist_to_int(&self) -> Self {
        let n = Real::from_bigint(&self.round(), self.prec.max(bit_len(&self.round()) as u32 + 8));
        (self - &n).abs()
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let len = bit_len(&self.mant);
        let (m, e) = if len > 60 {
            (round_shift(&self.mant, (len - 60) as u64), self.exp + len - 60)
        } else {
            (self.mant.clone(), self.exp)
        };
        let base = m.to_f64().unwrap();
        scale_f64(base, e)
    }

    /// log2 |x| as a float, valid far outside the f64 exponent range.
    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let len = bit_len(&self.mant);
        let top = if len > 60 {
            round_shift(&self.mant, (len - 60) as u64)
        } else {
            self.mant.clone()
        };
        let shift = (len - 60).max(0);
        top.abs().to_f64().unwrap().log2() + (self.exp + shift) as f64
    }

    pub fn max_prec(&self, other: &Real) -> u32 {
        self.prec.max(other.prec)
    }

    /// pi to `prec` bits (cached).
    pub fn pi(prec: u32) -> Self {
        pi_cached(prec)
    }

    /// e^x.
    pub fn exp(&self) -> Self {
        let p = self.prec;
        if self.is_zero() {
            return Real::one(p);
        }
        let target = (p as f64).sqrt().ceil() as i64 / 2 + 4;
        let mag = self.magnitude_exp();
        let s = (mag + target).max(0);
        let wp = p + s as u32 + 24;
        let r = self.with_prec(wp).mul_pow2(-s);
        let mut sum = Real::one(wp);
        let mut term = Real::one(wp);
        let cutoff = -(wp as i64) - 4;
        let mut k = 1i64;
        loop {
            term = &(&term * &r) / &Real::from_int(k, wp);
            if term.is_zero() || term.magnitude_exp() < cutoff {
                break;
            }
            sum = &sum + &term;
            k += 1;
        }
        for _ in 0..s {
            sum = sum.square();
        }
        sum.with_prec(p)
    }

    /// (cos x, sin x).
    pub fn cos_sin(&self) -> (Real, Real) {
        let p = self.prec;
        if self.is_zero() {
            return (Real::one(p), Real::zero(p));
        }
        // Reduce into [-pi, pi].
        let extra = self.magnitude_exp().max(0) as u32 + 16;
        let wp0 = p + extra;
        let two_pi = Real::pi(wp0).mul_pow2(1);
        let x = self.with_prec(wp0);
        let n = (&x / &two_pi).round();
        let x = &x - &(&two_pi * &Real::from_bigint(&n, wp0));

        let target = (p as f64).sqrt().ceil() as i64 / 2 + 4;
        let s = (x.magnitude_exp() + target).max(0);
        let wp = p + 2 * s as u32 + 24;
        let r = x.with_prec(wp).mul_pow2(-s);
        // Taylor series of exp(i r).
        let mut c = Real::one(wp);
        let mut sn = Real::zero(wp);
        let mut term = Real::one(wp);
        let cutoff = -(wp as i64) - 4;
        let mut k = 1i64;
        loop {
            term = &(&term * &r) / &Real::from_int(k, wp);
            if term.is_zero() || term.magnitude_exp() < cutoff {
                break;
            }
            match k % 4 {
                1 => sn = &sn + &term,
                2 => c = &c - &term,
                3 => sn = &sn - &term,
                _ => c = &c + &term,
            }
            k += 1;
        }
        for _ in 0..s {
            let c2 = &c.square() - &sn.square();
            let s2 = (&c * &sn).mul_pow2(1);
            c = c2;
            sn = s2;
        }
        (c.with_prec(p), sn.with_prec(p))
    }
}

fn scale_f64(mut v: f64, mut e: i64) -> f64 {
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
        if v.is_infinite() {
            return v;
        }
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
        if v == 0.0 {
            return v;
        }
    }
    v * 2f64.powi(e as i32)
}

static PI_CACHE: Mutex<Option<(u32, BigInt)>> = Mutex::new(None);

fn atan_inv_fixed(x: u64, bits: u64) -> BigInt {
    // atan(1/x) * 2^bits
    let one = BigInt::one() << bits;
    let x2 = BigInt::from(x * x);
    let mut power = &one / BigInt::from(x);
    let mut sum = power.clone();
    let mut k: u64 = 1;
    loop {
        power = &power / &x2;
        if power.is_zero() {
            break;
        }
        let term = &power / BigInt::from(2 * k + 1);
        if k % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        k += 1;
    }
    sum
}

fn pi_cached(prec: u32) -> Real {
    let mut guard = PI_CACHE.lock().unwrap();
    if let Some((cached_prec, mant)) = guard.as_ref() {
        if *cached_prec >= prec {
            let shift = (*cached_prec + 32) as i64;
            return Real { mant: mant.clone(), exp: -shift, prec }.normalized();
        }
    }
    let bits = prec as u64 + 32;
    let pi: BigInt = atan_inv_fixed(5, bits) * 16u32 - atan_inv_fixed(239, bits) * 4u32;
    *guard = Some((prec, pi.clone()));
    Real { mant: pi, exp: -(bits as i64), prec }.normalized()
}

fn add_impl(a: &Real, b: &Real, negate_b: bool) -> Real {
    let p = a.max_prec(b);
    if b.is_zero() {
        return a.with_prec(p);
    }
    if a.is_zero() {
        let r = b.with_prec(p);
        return if negate_b { -r } else { r };
    }
    let bm = if negate_b { -&b.mant } else { b.mant.clone() };
    let top_a = a.magnitude_exp();
    let top_b = b.magnitude_exp();
    let gap = p as i64 + 4;
    if top_a - top_b > gap {
        // b only affects the rounding; fold in a sticky unit below a's last bit.
        let low = top_a - gap;
        let a_shift = (a.exp - low).max(0) as usize;
        let sticky = if bm.is_negative() { -1 } else { 1 };
        let m = (&a.mant << a_shift) + BigInt::from(sticky);
        return Real { mant: m, exp: a.exp.min(low), prec: p }.normalized();
    }
    if top_b - top_a > gap {
        let low = top_b - gap;
        let b_shift = (b.exp - low).max(0) as usize;
        let sticky = if a.mant.is_negative() { -1 } else { 1 };
        let m = (&bm << b_shift) + BigInt::from(sticky);
        return Real { mant: m, exp: b.exp.min(low), prec: p }.normalized();
    }
    let e = a.exp.min(b.exp);
    let m = (&a.mant << ((a.exp - e) as usize)) + (bm << ((b.exp - e) as usize));
    Real { mant: m, exp: e, prec: p }.normalized()
}

impl<'a> Add<&'a Real> for &'a Real {
    type Output = Real;
    fn add(self, rhs: &'a Real) -> Real {
        add_impl(self, rhs, false)
    }
}

impl<'a> Sub<&'a Real> for &'a Real {
    type Output = Real;
    fn sub(self, rhs: &'a Real) -> Real {
        add_impl(self, rhs, true)
    }
}

impl<'a> Mul<&'a Real> for &'a Real {
    type Output = Real;
    fn mul(self, rhs: &'a Real) -> Real {
        let p = self.max_prec(rhs);
        Real { mant: &self.mant * &rhs.mant, exp: self.exp + rhs.exp, prec: p }.normalized()
    }
}

impl<'a> Div<&'a Real> for &'a Real {
    type Output = Real;
    fn div(self, rhs: &'a Real) -> Real {
        assert!(!rhs.is_zero(), "division of a Real by zero");
        let p = self.max_prec(rhs);
        if self.is_zero() {
            return Real::zero(p);
        }
        let shift = (p as i64 + 4 + bit_len(&rhs.mant) - bit_len(&self.mant)).max(0);
        let num = &self.mant << (shift as usize);
        let q = &num / &rhs.mant;
        // Sticky bit keeps ties from rounding the wrong way.
        let rem_nonzero = !(&num % &rhs.mant).is_zero();
        let mut m = q << 1usize;
        if rem_nonzero {
            if m.is_negative() {
                m -= 1;
            } else {
                m += 1;
            }
        }
        Real { mant: m, exp: self.exp - rhs.exp - shift - 1, prec: p }.normalized()
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real { mant: -self.mant, exp: self.exp, prec: self.prec }
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        -(self.clone())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Real> for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Real> for Real {
            type Output = Real;
            fn $m(self, rhs: &'a Real) -> Real {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Real> for &'a Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Real {
    fn cmp(&self, other: &Self) -> Ordering {
        let sa = self.signum();
        let sb = other.signum();
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        let ta = self.magnitude_exp();
        let tb = other.magnitude_exp();
        if ta != tb {
            let o = ta.cmp(&tb);
            return if sa > 0 { o } else { o.reverse() };
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << ((self.exp - e) as usize);
        let b = &other.mant << ((other.exp - e) as usize);
        a.cmp(&b)
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Real {
    /// Scientific notation with roughly `prec * log10(2)` significant digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let digits = f.precision().unwrap_or(((self.prec as f64) * std::f64::consts::LOG10_2) as usize).max(1);
        let log10 = self.log2_abs() * std::f64::consts::LOG10_2;
        let mut e10 = log10.floor() as i64;
        // scaled = |x| * 10^(digits - 1 - e10), rounded to an integer
        let scale_pow = digits as i64 - 1 - e10;
        let wp = self.prec + 16 + (scale_pow.unsigned_abs() as f64 * 3.33) as u32;
        let ten = Real::from_int(10, wp);
        let scaled = &self.abs().with_prec(wp) * &ten.powi(scale_pow);
        let mut n = scaled.round();
        let limit = BigInt::from(10u32).pow(digits as u32);
        if n >= limit {
            n /= 10;
            e10 += 1;
        }
        let s = n.to_string();
        let sign = if self.is_negative() { "-" } else { "" };
        if s.len() > 1 {
            write!(f, "{}{}.{}e{}", sign, &s[..1], &s[1..], e10)
        } else {
            write!(f, "{}{}e{}", sign, s, e10)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_arithmetic_matches_f64() {
        let a = Real::from_f64(1.25, 128);
        let b = Real::from_f64(-3.5, 128);
        assert_eq!((&a + &b).to_f64(), -2.25);
        assert_eq!((&a * &b).to_f64(), -4.375);
        assert!(((&a / &b).to_f64() - (1.25 / -3.5)).abs() < 1e-15);
        assert_eq!(Real::from_int(2, 128).sqrt().to_f64(), 2f64.sqrt());
    }

    #[test]
    fn pi_digits() {
        let pi = Real::pi(300);
        let s = format!("{:.60}", pi);
        assert!(s.starts_with("3.14159265358979323846264338327950288419716939937510582097494"), "{s}");
    }

    #[test]
    fn exp_and_trig_identities() {
        let p = 256;
        let x = Real::from_f64(0.7, p);
        let (c, s) = x.cos_sin();
        let one = &c.square() + &s.square();
        assert!((&one - &Real::one(p)).abs().log2_abs() < -240.0);
        let e1 = Real::one(p).exp();
        assert!(format!("{:.40}", e1).starts_with("2.718281828459045235360287471352662497757"));
        // exp(a) exp(-a) = 1 for a large argument
        let a = Real::from_f64(-123.456, p);
        let prod = &a.exp() * &(-&a).exp();
        assert!((&prod - &Real::one(p)).abs().log2_abs() < -240.0);
        // cos(pi) = -1 via range reduction from a large argument
        let big = &Real::pi(p) * &Real::from_int(1001, p);
        let (c, s) = big.cos_sin();
        assert!((&c + &Real::one(p)).abs().log2_abs() < -230.0);
        assert!(s.abs().log2_abs() < -230.0);
    }

    #[test]
    fn rounding_and_ordering() {
        let p = 100;
        assert_eq!(Real::from_f64(2.5, p).round(), BigInt::from(3));
        assert_eq!(Real::from_f64(-2.5, p).round(), BigInt::from(-3));
        assert_eq!(Real::from_f64(-2.25, p).floor(), BigInt::from(-3));
        assert!(Real::from_f64(1e-40, p) > Real::zero(p));
        assert!(Real::from_f64(-1e40, p) < Real::from_f64(-1e39, p));
        let tiny = Real::from_f64(1e-20, p);
        let one = Real::one(p);
        assert!(&one + &tiny > one);
        assert!(&one - &tiny < one);
    }
}
