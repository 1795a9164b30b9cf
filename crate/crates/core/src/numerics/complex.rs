use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;

use super::real::Real;

/// Arbitrary precision complex number.
#[derive(Clone, PartialEq, Eq)]
pub struct BigComplex {
    pub re: Real,
    pub im: Real,
}

impl BigComplex {
    pub fn new(re: Real, im: Real) -> Self {
        BigComplex { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        BigComplex::new(Real::zero(prec), Real::zero(prec))
    }

    pub fn one(prec: u32) -> Self {
        BigComplex::from_real(Real::one(prec))
    }

    pub fn i(prec: u32) -> Self {
        BigComplex::new(Real::zero(prec), Real::one(prec))
    }

    pub fn from_real(re: Real) -> Self {
        let p = re.prec();
        BigComplex::new(re, Real::zero(p))
    }

    pub fn from_int(v: i64, prec: u32) -> Self {
        BigComplex::from_real(Real::from_int(v, prec))
    }

    pub fn from_bigint(v: &BigInt, prec: u32) -> Self {
        BigComplex::from_real(Real::from_bigint(v, prec))
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        BigComplex::new(Real::from_f64(re, prec), Real::from_f64(im, prec))
    }

    pub fn prec(&self) -> u32 {
        self.re.max_prec(&self.im)
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        BigComplex::new(self.re.with_prec(prec), self.im.with_prec(prec))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        BigComplex::new(self.re.clone(), -&self.im)
    }

    pub fn norm_sqr(&self) -> Real {
        &self.re.square() + &self.im.square()
    }

    pub fn abs(&self) -> Real {
        self.norm_sqr().sqrt()
    }

    /// log2 |z|, cheap and approximate.
    pub fn log2_abs(&self) -> f64 {
        let a = self.re.log2_abs();
        let b = self.im.log2_abs();
        let m = a.max(b);
        if m == f64::NEG_INFINITY {
            return m;
        }
        m + 0.5 * (1.0 + 2f64.powf(2.0 * (a.min(b) - m))).log2()
    }

    pub fn scale(&self, r: &Real) -> Self {
        BigComplex::new(&self.re * r, &self.im * r)
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        BigComplex::new(self.re.mul_pow2(k), self.im.mul_pow2(k))
    }

    pub fn square(&self) -> Self {
        let re = &self.re.square() - &self.im.square();
        let im = (&self.re * &self.im).mul_pow2(1);
        BigComplex::new(re, im)
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        BigComplex::new(&self.re / &n, -(&self.im / &n))
    }

    pub fn powi(&self, n: i64) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut result = BigComplex::one(self.prec());
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

    /// e^z.
    pub fn exp(&self) -> Self {
        let r = self.re.exp();
        let (c, s) = self.im.cos_sin();
        BigComplex::new(&r * &c, &r * &s)
    }

    /// exp(2 pi i * num/den), a root of unity.
    pub fn root_of_unity(num: i64, den: i64, prec: u32) -> Self {
        let n = num.rem_euclid(den);
        if n == 0 {
            return BigComplex::one(prec);
        }
        let wp = prec + 8;
        let angle = &Real::pi(wp).mul_pow2(1) * &Real::from_ratio(n, den, wp);
        let (c, s) = angle.cos_sin();
        BigComplex::new(c, s).with_prec(prec)
    }

    /// Principal square root (branch cut on the negative real axis).
    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        if self.is_zero() {
            return self.clone();
        }
        let r = self.abs();
        let half = Real::from_ratio(1, 2, p);
        if !self.re.is_negative() {
            let a = (&(&r + &self.re) * &half).sqrt();
            let b = &self.im / &a.mul_pow2(1);
            BigComplex::new(a, b)
        } else {
            let b_abs = (&(&r - &self.re) * &half).sqrt();
            let b = if self.im.is_negative() { -b_abs } else { b_abs };
            let a = &self.im / &b.mul_pow2(1);
            BigComplex::new(a, b)
        }
    }

    /// Approximate value as (re, im) floats.
    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl<'a> Add<&'a BigComplex> for &'a BigComplex {
    type Output = BigComplex;
    fn add(self, rhs: &'a BigComplex) -> BigComplex {
        BigComplex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl<'a> Sub<&'a BigComplex> for &'a BigComplex {
    type Output = BigComplex;
    fn sub(self, rhs: &'a BigComplex) -> BigComplex {
        BigComplex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl<'a> Mul<&'a BigComplex> for &'a BigComplex {
    type Output = BigComplex;
    fn mul(self, rhs: &'a BigComplex) -> BigComplex {
        let re = &(&self.re * &rhs.re) - &(&self.im * &rhs.im);
        let im = &(&self.re * &rhs.im) + &(&self.im * &rhs.re);
        BigComplex::new(re, im)
    }
}

impl<'a> Div<&'a BigComplex> for &'a BigComplex {
    type Output = BigComplex;
    fn div(self, rhs: &'a BigComplex) -> BigComplex {
        let n = rhs.norm_sqr();
        let re = &(&self.re * &rhs.re) + &(&self.im * &rhs.im);
        let im = &(&self.im * &rhs.re) - &(&self.re * &rhs.im);
        BigComplex::new(&re / &n, &im / &n)
    }
}

impl Neg for BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex::new(-self.re, -self.im)
    }
}

impl Neg for &BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        -(self.clone())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $m(self, rhs: BigComplex) -> BigComplex {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $m(self, rhs: &'a BigComplex) -> BigComplex {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<BigComplex> for &'a BigComplex {
            type Output = BigComplex;
            fn $m(self, rhs: BigComplex) -> BigComplex {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl fmt::Debug for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision();
        let (re, im) = match digits {
            Some(d) => (format!("{:.*}", d, self.re), format!("{:.*}", d, self.im.abs())),
            None => (format!("{}", self.re), format!("{}", self.im.abs())),
        };
        let sign = if self.im.is_negative() { '-' } else { '+' };
        write!(f, "{} {} {}i", re, sign, im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_i_pi_is_minus_one() {
        let p = 200;
        let z = BigComplex::new(Real::zero(p), Real::pi(p));
        let e = z.exp();
        assert!((&e.re + &Real::one(p)).abs().log2_abs() < -190.0);
        assert!(e.im.abs().log2_abs() < -190.0);
    }

    #[test]
    fn sqrt_branches() {
        let p = 128;
        for (re, im) in [(3.0, 4.0), (-3.0, 4.0), (-3.0, -4.0), (-4.0, 0.0), (2.0, -1e-3)] {
            let z = BigComplex::from_f64(re, im, p);
            let r = z.sqrt();
            assert!(!r.re.is_negative());
            let back = r.square();
            assert!((&back - &z).log2_abs() < -110.0, "{re} {im}");
        }
    }

    #[test]
    fn root_of_unity_power() {
        let p = 160;
        let z = BigComplex::root_of_unity(5, 48, p);
        let w = z.powi(48);
        assert!((&w - &BigComplex::one(p)).log2_abs() < -140.0);
    }
}
