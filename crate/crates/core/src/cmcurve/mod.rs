//! The CM curve `y^2 = 4(x^3 + a x + b)` with `j = j_K`, its division
//! polynomials, the Weber function, and ray class polynomials over `K`
//! for class number one.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::factor;
use crate::error::{Error, Result};
use crate::hilbert::hilbert_class_poly;
use crate::modfunc::{lattice_invariants, wp};
use crate::numerics::{poly_from_roots, BigComplex, PrecisionCtx, Real, RetryPolicy};
use crate::quadforms::Discriminant;
use crate::rayclass::{QuadField, QuadInt};

mod isobaric;

use isobaric::IsoDivisionPolys;

/// Coefficient rings for division polynomials.
pub trait CoeffRing: Clone + PartialEq {
    fn nil() -> Self;
    fn from_i64(v: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn is_nil(&self) -> bool;

    /// `self += a * b`, in place where the ring allows it.
    fn add_product(&mut self, a: &Self, b: &Self) {
        *self = self.add(&a.mul(b));
    }

    /// Restores the canonical form after a run of [`CoeffRing::add_product`].
    fn normalize(&mut self) {}
}

impl CoeffRing for BigInt {
    fn nil() -> Self {
        Zero::zero()
    }
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_product(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
}

impl CoeffRing for BigRational {
    fn nil() -> Self {
        Zero::zero()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
}

/// Polynomials in `Z[a, b]`, keyed by the exponent pair `(i, j)` of `a^i b^j`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Zab(BTreeMap<(u32, u32), BigInt>);

impl Zab {
    pub fn a() -> Self {
        Zab(BTreeMap::from([((1, 0), BigInt::one())]))
    }

    pub fn b() -> Self {
        Zab(BTreeMap::from([((0, 1), BigInt::one())]))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &BigInt)> {
        self.0.iter()
    }

    /// The constant term, if the polynomial is constant.
    pub fn as_constant(&self) -> Option<BigInt> {
        match self.0.len() {
            0 => Some(BigInt::zero()),
            1 => self.0.get(&(0, 0)).cloned(),
            _ => None,
        }
    }

    pub fn eval<R: CoeffRing>(&self, a: &R, b: &R, from_big: impl Fn(&BigInt) -> R) -> R {
        let mut out = R::nil();
        for (&(i, j), c) in &self.0 {
            let mut t = from_big(c);
            for _ in 0..i {
                t = t.mul(a);
            }
            for _ in 0..j {
                t = t.mul(b);
            }
            out = out.add(&t);
        }
        out
    }

    pub fn eval_complex(&self, a: &BigComplex, b: &BigComplex) -> BigComplex {
        let p = a.prec().max(b.prec());
        let mut out = BigComplex::zero(p);
        for (&(i, j), c) in &self.0 {
            let t = &(&a.powi(i as i64) * &b.powi(j as i64)) * &BigComplex::from_bigint(c, p);
            out = &out + &t;
        }
        out
    }

    fn combine(&self, o: &Self, sign: i32) -> Self {
        let mut m = self.0.clone();
        for (k, v) in &o.0 {
            let e = m.entry(*k).or_default();
            if sign > 0 {
                *e += v;
            } else {
                *e -= v;
            }
        }
        m.retain(|_, v| !Zero::is_zero(v));
        Zab(m)
    }
}

impl CoeffRing for Zab {
    fn nil() -> Self {
        Zab::default()
    }
    fn from_i64(v: i64) -> Self {
        if v == 0 {
            Zab::default()
        } else {
            Zab(BTreeMap::from([((0, 0), BigInt::from(v))]))
        }
    }
    fn add(&self, o: &Self) -> Self {
        self.combine(o, 1)
    }
    fn sub(&self, o: &Self) -> Self {
        self.combine(o, -1)
    }
    fn mul(&self, o: &Self) -> Self {
        let mut m: BTreeMap<(u32, u32), BigInt> = BTreeMap::new();
        for ((i1, j1), c1) in &self.0 {
            for ((i2, j2), c2) in &o.0 {
                *m.entry((i1 + i2, j1 + j2)).or_default() += c1 * c2;
            }
        }
        m.retain(|_, v| !Zero::is_zero(v));
        Zab(m)
    }
    fn is_nil(&self) -> bool {
        self.0.is_empty()
    }
    fn add_product(&mut self, a: &Self, b: &Self) {
        for ((i1, j1), c1) in &a.0 {
            for ((i2, j2), c2) in &b.0 {
                *self.0.entry((i1 + i2, j1 + j2)).or_default() += c1 * c2;
            }
        }
    }
    fn normalize(&mut self) {
        self.0.retain(|_, v| !Zero::is_zero(v));
    }
}

impl fmt::Display for Zab {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        // Highest total weight first.
        let mut terms: Vec<_> = self.0.iter().collect();
        terms.sort_by_key(|((i, j), _)| std::cmp::Reverse((*i, *j)));
        for (n, ((i, j), c)) in terms.into_iter().enumerate() {
            let mut mono = vec![];
            for (name, e) in [("a", *i), ("b", *j)] {
                match e {
                    0 => {}
                    1 => mono.push(name.to_string()),
                    _ => mono.push(format!("{name}^{e}")),
                }
            }
            let neg = c.is_negative();
            let mag = c.abs();
            let body = match (mono.is_empty(), mag.is_one()) {
                (true, _) => mag.to_string(),
                (false, true) => mono.join("*"),
                (false, false) => format!("{mag}*{}", mono.join("*")),
            };
            match (n, neg) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

fn poly_trim<R: CoeffRing>(mut p: Vec<R>) -> Vec<R> {
    while p.last().is_some_and(|c| c.is_nil()) {
        p.pop();
    }
    p
}

fn poly_mul<R: CoeffRing>(x: &[R], y: &[R]) -> Vec<R> {
    if x.is_empty() || y.is_empty() {
        return vec![];
    }
    let mut out = vec![R::nil(); x.len() + y.len() - 1];
    for (i, a) in x.iter().enumerate() {
        if a.is_nil() {
            continue;
        }
        for (j, b) in y.iter().enumerate() {
            out[i + j].add_product(a, b);
        }
    }
    out.iter_mut().for_each(|c| c.normalize());
    poly_trim(out)
}

fn poly_sub<R: CoeffRing>(x: &[R], y: &[R]) -> Vec<R> {
    let n = x.len().max(y.len());
    let z = R::nil();
    poly_trim((0..n).map(|i| x.get(i).unwrap_or(&z).sub(y.get(i).unwrap_or(&z))).collect())
}

/// The polynomials `T_m` with `psi_m = T_m` (odd `m`) or `psi_m = 2y T_m` (even `m`)
/// on `y^2 = 4(x^3 + a x + b)`, memoised. Leading coefficients are positive.
pub struct DivisionPolys<R: CoeffRing> {
    a: R,
    b: R,
    cache: HashMap<u32, Vec<R>>,
}

impl<R: CoeffRing> DivisionPolys<R> {
    pub fn new(a: R, b: R) -> Self {
        DivisionPolys { a, b, cache: HashMap::new() }
    }

    fn c(v: i64) -> R {
        R::from_i64(v)
    }

    /// `4(x^3 + a x + b)`, the square of `2y`.
    fn w(&self) -> Vec<R> {
        let four = Self::c(4);
        vec![self.b.mul(&four), self.a.mul(&four), R::nil(), four]
    }

    /// Coefficients of `T_m`, lowest degree first.
    pub fn t(&mut self, m: u32) -> Vec<R> {
        if let Some(v) = self.cache.get(&m) {
            return v.clone();
        }
        let (a, b) = (self.a.clone(), self.b.clone());
        let v = match m {
            0 => vec![],
            1 | 2 => vec![Self::c(1)],
            3 => poly_trim(vec![
                R::nil().sub(&a.mul(&a)),
                Self::c(12).mul(&b),
                Self::c(6).mul(&a),
                R::nil(),
                Self::c(3),
            ]),
            4 => {
                let a2 = a.mul(&a);
                poly_trim(vec![
                    R::nil().sub(&Self::c(16).mul(&b.mul(&b))).sub(&Self::c(2).mul(&a2.mul(&a))),
                    R::nil().sub(&Self::c(8).mul(&a.mul(&b))),
                    R::nil().sub(&Self::c(10).mul(&a2)),
                    Self::c(40).mul(&b),
                    Self::c(10).mul(&a),
                    R::nil(),
                    Self::c(2),
                ])
            }
            _ if m % 2 == 1 => {
                let k = (m - 1) / 2;
                let (tk2, tk, tk1, tkm1) = (self.t(k + 2), self.t(k), self.t(k + 1), self.t(k - 1));
                let tk3 = poly_mul(&poly_mul(&tk, &tk), &tk);
                let tk13 = poly_mul(&poly_mul(&tk1, &tk1), &tk1);
                let w2 = poly_mul(&self.w(), &self.w());
                let first = poly_mul(&tk2, &tk3);
                let second = poly_mul(&tk13, &tkm1);
                if k.is_multiple_of(2) {
                    poly_sub(&poly_mul(&w2, &first), &second)
                } else {
                    poly_sub(&first, &poly_mul(&w2, &second))
                }
            }
            _ => {
                let k = m / 2;
                let (tk, tk2, tkm1, tk1, tkm2) = (self.t(k), self.t(k + 2), self.t(k - 1), self.t(k + 1), self.t(k - 2));
                let inner = poly_sub(&poly_mul(&tk2, &poly_mul(&tkm1, &tkm1)), &poly_mul(&poly_mul(&tk1, &tk1), &tkm2));
                poly_mul(&tk, &inner)
            }
        };
        self.cache.insert(m, v.clone());
        v
    }
}

/// A symbolic division polynomial `T_m` over `Z[a, b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DivisionPoly {
    pub m: u32,
    /// Coefficients of `T_m` in `x`, lowest degree first.
    pub coeffs: Vec<Zab>,
}

impl DivisionPoly {
    /// `psi_m = 2y T_m` for even `m`.
    pub fn is_even(&self) -> bool {
        self.m.is_multiple_of(2)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Option<BigInt> {
        self.coeffs.last().and_then(|c| c.as_constant())
    }

    /// `T_m(x)` for complex `a, b`.
    pub fn eval_complex(&self, a: &BigComplex, b: &BigComplex, x: &BigComplex) -> BigComplex {
        let p = x.prec();
        self.coeffs.iter().rev().fold(BigComplex::zero(p), |acc, c| &(&acc * x) + &c.eval_complex(a, b))
    }

    /// Specialise `a, b` to rationals.
    pub fn specialize(&self, a: &BigRational, b: &BigRational) -> Vec<BigRational> {
        self.coeffs.iter().map(|c| c.eval(a, b, |v| BigRational::from_integer(v.clone()))).collect()
    }
}

impl fmt::Display for DivisionPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_nil() {
                continue;
            }
            let xpart = match k {
                0 => String::new(),
                1 => "X".to_string(),
                _ => format!("X^{k}"),
            };
            let (neg, body) = match c.as_constant() {
                Some(v) => {
                    let mag = v.abs();
                    let b = if xpart.is_empty() {
                        mag.to_string()
                    } else if mag.is_one() {
                        xpart.clone()
                    } else {
                        format!("{mag}*{xpart}")
                    };
                    (v.is_negative(), b)
                }
                None if c.0.len() == 1 => {
                    let ((i, j), v) = c.0.iter().next().unwrap();
                    let mono = Zab(BTreeMap::from([((*i, *j), v.abs())])).to_string();
                    let b = if xpart.is_empty() { mono } else { format!("{mono}*{xpart}") };
                    (v.is_negative(), b)
                }
                None => {
                    let b = if xpart.is_empty() { format!("({c})") } else { format!("({c})*{xpart}") };
                    (false, b)
                }
            };
            match (first, neg) {
                (true, true) => write!(f, "-{body}")?,
                (true, false) => write!(f, "{body}")?,
                (false, true) => write!(f, " - {body}")?,
                (false, false) => write!(f, " + {body}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `T_m` over `Z[a, b]`.
pub fn division_poly(m: u32) -> Result<DivisionPoly> {
    if m == 0 {
        return Err(Error::InvalidInput("division polynomial index must be positive".into()));
    }
    Ok(DivisionPoly { m, coeffs: IsoDivisionPolys::default().t(m).to_zab() })
}

/// `T_1, ..., T_n` over `Z[a, b]`, sharing one memo table.
pub fn division_polys_up_to(n: u32) -> Vec<DivisionPoly> {
    let mut d = IsoDivisionPolys::default();
    (1..=n).map(|m| DivisionPoly { m, coeffs: d.t(m).to_zab() }).collect()
}

/// `T_m` specialised to integers `a, b` (cheap for large `m`).
pub fn division_poly_int(m: u32, a: i64, b: i64) -> Vec<BigInt> {
    let mut d = DivisionPolys::new(BigInt::from(a), BigInt::from(b));
    d.t(m)
}

/// Expected `(degree, leading coefficient)` of `T_m`.
pub fn division_poly_shape(m: u32) -> (usize, i64) {
    let m = m as i64;
    if m % 2 == 1 {
        (((m * m - 1) / 2) as usize, m)
    } else {
        (((m * m - 4) / 2) as usize, m / 2)
    }
}

/// The CM model `y^2 = 4(x^3 + a x + b)`.
#[derive(Clone, Debug)]
pub struct CMModel {
    pub disc: Discriminant,
    pub j: BigComplex,
    /// `c_K = 27 j / (j - 1728)` (absent for the special models).
    pub c: Option<BigComplex>,
    pub a: BigComplex,
    pub b: BigComplex,
    /// Exact `(a, b)` when `j` is rational.
    pub exact: Option<(BigRational, BigRational)>,
}

fn rat_to_complex(r: &BigRational, prec: u32) -> BigComplex {
    BigComplex::from_real(&Real::from_bigint(r.numer(), prec) / &Real::from_bigint(r.denom(), prec))
}

impl CMModel {
    /// `j` recomputed from the model: `1728 * 4a^3 / (4a^3 + 27 b^2)`.
    pub fn j_invariant(&self) -> BigComplex {
        let p = self.a.prec();
        let a3 = (&self.a.square() * &self.a).scale(&Real::from_int(4, p));
        let b2 = self.b.square().scale(&Real::from_int(27, p));
        &a3.scale(&Real::from_int(1728, p)) / &(&a3 + &b2)
    }

    /// Smallest `u > 0` with `a u^4` and `b u^6` integral (rational models only).
    pub fn integral_scale(&self) -> Option<BigInt> {
        let (a, b) = self.exact.as_ref()?;
        let mut u = BigInt::one();
        let mut primes: Vec<i64> = vec![];
        for den in [a.denom(), b.denom()] {
            let d = den.to_i64()?;
            primes.extend(factor(d).into_iter().map(|(p, _)| p));
        }
        primes.sort_unstable();
        primes.dedup();
        for p in primes {
            let v = |r: &BigRational| crate::arith::valuation(r.denom().to_i64().unwrap(), p);
            let e = v(a).div_ceil(4).max(v(b).div_ceil(6));
            u *= BigInt::from(p).pow(e);
        }
        Some(u)
    }

    /// `[a u^4, b u^6]` for `u` from [`CMModel::integral_scale`].
    pub fn integral_model(&self) -> Option<(BigInt, BigInt)> {
        let u = BigRational::from_integer(self.integral_scale()?);
        let (a, b) = self.exact.as_ref()?;
        let a4 = a * &u * &u * &u * &u;
        let b6 = b * &u * &u * &u * &u * &u * &u;
        Some((a4.to_integer(), b6.to_integer()))
    }
}

/// The CM model of `K`: `y^2 = 4x^3 - c/(c-27)^2 x - c/(c-27)^3`, or the fixed
/// models `y^2 = 4x^3 - 4x` (D = -4) and `y^2 = 4x^3 - 4` (D = -3).
pub fn cm_model(d: i64, ctx: PrecisionCtx) -> Result<CMModel> {
    let disc = Discriminant::fundamental(d)?;
    let p = ctx.bits();
    let from_rat = |a: BigRational, b: BigRational, j: i64| CMModel {
        disc,
        j: BigComplex::from_int(j, p),
        c: None,
        a: rat_to_complex(&a, p),
        b: rat_to_complex(&b, p),
        exact: Some((a, b)),
    };
    let int = |v: i64| BigRational::from_integer(BigInt::from(v));
    match d {
        -4 => return Ok(from_rat(int(-1), int(0), 1728)),
        -3 => return Ok(from_rat(int(0), int(-1), 0)),
        _ => {}
    }
    let h = crate::quadforms::enumerate_reduced_forms(disc).len();
    if h == 1 {
        let hil = hilbert_class_poly(d, &RetryPolicy::starting_at(p.max(64)))?;
        let j = -hil.poly.coeff(0);
        let jr = BigRational::from_integer(j.clone());
        let c = BigRational::from_integer(BigInt::from(27)) * &jr / (&jr - int(1728));
        let cm27 = &c - int(27);
        let a = -(&c) / (int(4) * &cm27 * &cm27);
        let b = -(&c) / (int(4) * &cm27 * &cm27 * &cm27);
        return Ok(CMModel {
            disc,
            j: BigComplex::from_bigint(&j, p),
            c: Some(rat_to_complex(&c, p)),
            a: rat_to_complex(&a, p),
            b: rat_to_complex(&b, p),
            exact: Some((a, b)),
        });
    }
    let k = QuadField::new(disc)?;
    let j = crate::modfunc::j(&field_tau(&k, p), ctx)?;
    let one = BigComplex::one(p);
    let c = (&j.scale(&Real::from_int(27, p))) / &(&j - &BigComplex::from_int(1728, p));
    let cm27 = &c - &BigComplex::from_int(27, p);
    let four = BigComplex::from_int(4, p);
    let a = -(&c / &(&four * &cm27.square()));
    let b = -(&c / &(&four * &(&cm27.square() * &cm27)));
    let _ = one;
    Ok(CMModel { disc, j, c: Some(c), a, b, exact: None })
}

/// `w = (-B + sqrt(D))/2`, so that `Z_K = [w, 1]`.
pub fn field_tau(k: &QuadField, prec: u32) -> BigComplex {
    let re = Real::from_ratio(-k.b, 2, prec);
    let im = Real::from_int(-k.d(), prec).sqrt().mul_pow2(-1);
    BigComplex::new(re, im)
}

pub fn quad_to_complex(k: &QuadField, u: QuadInt, prec: u32) -> BigComplex {
    let w = field_tau(k, prec);
    &BigComplex::from_int(u.x, prec) + &w.scale(&Real::from_int(u.y, prec))
}

/// Complex cube root by Newton iteration from a double precision start.
fn cbrt(c: &BigComplex) -> BigComplex {
    let p = c.prec();
    let (re, im) = c.to_f64();
    let r = (re * re + im * im).sqrt().cbrt();
    let t = im.atan2(re) / 3.0;
    let mut y = BigComplex::from_f64(r * t.cos(), r * t.sin(), p);
    let mut good = 40.0;
    while good < 2.0 * p as f64 {
        let y2 = y.square();
        let corr = &(&(&y2 * &y) - c) / &y2.scale(&Real::from_int(3, p));
        y = &y - &corr;
        good *= 2.0;
    }
    y
}

/// The Weber function of `Z_K` evaluated at `z`:
/// `g2 g3 / Delta * p(z)`, or `g2^2/Delta * p^2` (D = -4), `g3/Delta * p^3` (D = -3).
pub fn weber_value(model: &CMModel, z: &BigComplex, ctx: PrecisionCtx) -> Result<BigComplex> {
    let k = QuadField::new(model.disc)?;
    let w = field_tau(&k, ctx.bits() + 16);
    weber_value_on_lattice(model.disc.value(), &w, &BigComplex::one(ctx.bits() + 16), z, ctx)
}

/// The Weber function of the lattice `[omega1, omega2]` (a basis of a lattice
/// homothetic to `Z_K`) at `z`.
pub fn weber_value_on_lattice(
    d: i64,
    omega1: &BigComplex,
    omega2: &BigComplex,
    z: &BigComplex,
    ctx: PrecisionCtx,
) -> Result<BigComplex> {
    let wctx = PrecisionCtx::new(ctx.bits() + 16)?;
    let mut tau = omega1 / omega2;
    let mut o2 = omega2.clone();
    if tau.im.is_negative() {
        tau = -tau;
        o2 = -o2;
    }
    let inv = lattice_invariants(&tau, wctx)?;
    let v = wp(&(z / &o2), &tau, wctx)?.wp;
    // Scale to the lattice: g2 ~ o2^-4, g3 ~ o2^-6, Delta ~ o2^-12, p ~ o2^-2.
    let o2i = o2.recip();
    let s2 = o2i.square();
    let g2 = &inv.g2 * &s2.square();
    let g3 = &inv.g3 * &(&s2.square() * &s2);
    let delta = &inv.delta * &s2.powi(6);
    let pz = &v * &s2;
    let out = match d {
        -4 => &(&g2.square() / &delta) * &pz.square(),
        -3 => &(&g3 / &delta) * &(&pz.square() * &pz),
        _ => &(&(&g2 * &g3) / &delta) * &pz,
    };
    Ok(out.with_prec(ctx.bits()))
}

/// x-coordinates on `model` of the nonzero `m`-torsion points modulo `+-1`
/// (for even `m > 2` the 2-torsion is left out, matching the roots of `T_m`).
pub fn torsion_x_values(model: &CMModel, m: u32, ctx: PrecisionCtx) -> Result<Vec<BigComplex>> {
    if m < 2 {
        return Err(Error::InvalidInput("torsion level must be at least 2".into()));
    }
    let k = QuadField::new(model.disc)?;
    let wp_bits = ctx.bits() + 16;
    let wctx = PrecisionCtx::new(wp_bits)?;
    let tau = field_tau(&k, wp_bits);
    let inv = lattice_invariants(&tau, wctx)?;
    let four = BigComplex::from_int(4, wp_bits);
    let g2m = -(&four * &model.a.with_prec(wp_bits));
    let g3m = -(&four * &model.b.with_prec(wp_bits));
    // x = lambda^2 p(z) with g2m = lambda^4 g2, g3m = lambda^6 g3.
    let lambda2 = match model.disc.value() {
        -4 => (&g2m / &inv.g2).sqrt(),
        -3 => cbrt(&(&g3m / &inv.g3)),
        _ => &(&g3m * &inv.g2) / &(&g2m * &inv.g3),
    };
    let mi = m as i64;
    let mut pts = vec![];
    for u1 in 0..mi {
        for u2 in 0..mi {
            if (u1, u2) == (0, 0) {
                continue;
            }
            let neg = ((mi - u1) % mi, (mi - u2) % mi);
            if neg < (u1, u2) {
                continue;
            }
            let two_torsion = (2 * u1) % mi == 0 && (2 * u2) % mi == 0;
            if m > 2 && two_torsion {
                continue;
            }
            pts.push((u1, u2));
        }
    }
    pts.par_iter()
        .map(|&(u1, u2)| {
            let z = quad_to_complex(&k, QuadInt::new(u2, u1), wp_bits).scale(&Real::from_ratio(1, mi, wp_bits));
            let v = wp(&z, &tau, wctx)?.wp;
            Ok((&lambda2 * &v).with_prec(ctx.bits()))
        })
        .collect()
}

/// A polynomial with coefficients `x + y w` in `Z_K`, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadIntPolyK {
    pub field: QuadField,
    pub coeffs: Vec<(BigInt, BigInt)>,
}

impl QuadIntPolyK {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval_complex(&self, x: &BigComplex) -> BigComplex {
        let p = x.prec();
        let w = field_tau(&self.field, p);
        self.coeffs.iter().rev().fold(BigComplex::zero(p), |acc, (u, v)| {
            let c = &BigComplex::from_bigint(u, p) + &w.scale(&Real::from_bigint(v, p));
            &(&acc * x) + &c
        })
    }
}

fn fmt_quad(u: &BigInt, v: &BigInt) -> String {
    match (u.is_zero(), v.is_zero()) {
        (_, true) => u.to_string(),
        (true, false) if v.is_one() => "w".into(),
        (true, false) => format!("{v}*w"),
        (false, false) if v.is_negative() => format!("({u} - {}*w)", v.abs()),
        (false, false) => format!("({u} + {v}*w)"),
    }
}

impl fmt::Display for QuadIntPolyK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, (u, v)) in self.coeffs.iter().enumerate().rev() {
            if u.is_zero() && v.is_zero() {
                continue;
            }
            // Rational coefficients carry their sign into the separator.
            let neg = v.is_zero() && u.is_negative();
            let c = if neg { fmt_quad(&-u, v) } else { fmt_quad(u, v) };
            let term = match k {
                0 => c,
                _ => {
                    let x = if k == 1 { "Y".to_string() } else { format!("Y^{k}") };
                    if v.is_zero() && u.abs().is_one() {
                        x
                    } else {
                        format!("{c}*{x}")
                    }
                }
            };
            match (first, neg) {
                (true, true) => write!(f, "-{term}")?,
                (true, false) => write!(f, "{term}")?,
                (false, true) => write!(f, " - {term}")?,
                (false, false) => write!(f, " + {term}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Generator of the ray class field of conductor `m` over `K = H` (class number one).
#[derive(Clone, Debug)]
pub struct RayClassPoly {
    pub disc: Discriminant,
    pub m: u32,
    /// The polynomial is `prod (Y - scale * f_K(alpha/m))`.
    pub scale: BigInt,
    pub poly: QuadIntPolyK,
    /// The Weber values `f_K(alpha/m)` at the working precision.
    pub roots: Vec<BigComplex>,
    pub bits: u32,
}

/// Representatives of `(Z_K/m)^*` modulo the roots of unity.
pub fn unit_orbit_representatives(k: &QuadField, m: i64) -> Vec<QuadInt> {
    let units = k.units();
    let mut seen = std::collections::HashSet::new();
    let mut reps = vec![];
    for y in 0..m {
        for x in 0..m {
            let a = QuadInt::new(x, y);
            if !k.is_unit_mod(a, m) || seen.contains(&a) {
                continue;
            }
            reps.push(a);
            for &e in &units {
                seen.insert(k.mul_mod(a, e, m));
            }
        }
    }
    reps
}

/// Scale making `scale * f_K(torsion point)` integral over `Z_K`.
fn ray_scale(model: &CMModel, m: u32) -> Result<BigInt> {
    let mb = BigInt::from(m);
    Ok(match model.disc.value() {
        -4 => BigInt::from(4) * &mb * &mb,
        -3 => BigInt::from(108) * &mb * &mb * &mb,
        _ => {
            let u = model.integral_scale().ok_or_else(|| Error::InvalidInput("model is not rational".into()))?;
            &mb * &u * &u
        }
    })
}

pub(crate) fn recognize(k: &QuadField, c: &BigComplex, bits: u32) -> Result<(BigInt, BigInt)> {
    let p = c.prec();
    let sq = Real::from_int(-k.d(), p).sqrt();
    let vr = &c.im.mul_pow2(1) / &sq;
    let v = vr.round();
    let ur = &c.re + &Real::from_bigint(&(&v * BigInt::from(k.b)), p).mul_pow2(-1);
    let u = ur.round();
    let back = &BigComplex::from_bigint(&u, p) + &field_tau(k, p).scale(&Real::from_bigint(&v, p));
    let resid = (c - &back).log2_abs();
    let limit = -(bits as f64) / 2.0;
    if resid > limit {
        return Err(Error::RoundingUncertified { worst: resid.exp2(), tol: limit.exp2() });
    }
    Ok((u, v))
}

fn ray_class_poly_at(d: i64, m: u32, ctx: PrecisionCtx) -> Result<RayClassPoly> {
    let model = cm_model(d, ctx)?;
    let k = QuadField::new(model.disc)?;
    let scale = ray_scale(&model, m)?;
    let reps = unit_orbit_representatives(&k, m as i64);
    let bits = ctx.bits();
    let wbits = bits + 32;
    let wctx = PrecisionCtx::new(wbits)?;
    let roots: Vec<BigComplex> = reps
        .par_iter()
        .map(|&a| {
            let z = quad_to_complex(&k, a, wbits).scale(&Real::from_ratio(1, m as i64, wbits));
            weber_value(&model, &z, wctx)
        })
        .collect::<Result<_>>()?;
    let s = Real::from_bigint(&scale, wbits);
    let scaled: Vec<BigComplex> = roots.iter().map(|r| r.scale(&s)).collect();
    let cp = poly_from_roots(&scaled, wctx)?;
    let coeffs = cp.coeffs().iter().map(|c| recognize(&k, c, bits)).collect::<Result<Vec<_>>>()?;
    Ok(RayClassPoly {
        disc: model.disc,
        m,
        scale,
        poly: QuadIntPolyK { field: k, coeffs },
        roots: roots.into_iter().map(|r| r.with_prec(bits)).collect(),
        bits,
    })
}

/// The polynomial over `K` whose roots are the Weber values `f_K(alpha/m)`,
/// `alpha` over `(Z_K/m)^*` modulo units, with the variable scaled so that the
/// coefficients lie in `Z_K`. Requires class number one.
///
/// The result is recomputed at twice the certified precision and must agree.
pub fn ray_class_poly(d: i64, m: u32, policy: &RetryPolicy) -> Result<RayClassPoly> {
    let disc = Discriminant::fundamental(d)?;
    if crate::quadforms::enumerate_reduced_forms(disc).len() != 1 {
        return Err(Error::InvalidInput(format!("ray class polynomials need class number one, D = {d}")));
    }
    if m < 2 {
        return Err(Error::InvalidInput("ray class polynomial modulus must be at least 2".into()));
    }
    let k = QuadField::new(disc)?;
    let deg = unit_orbit_representatives(&k, m as i64).len() as u32;
    let start = 128 + 16 * deg * (m.ilog2() + 4);
    let (rp, bits) = policy.run(start, |ctx| ray_class_poly_at(d, m, ctx))?;
    let check = ray_class_poly_at(d, m, PrecisionCtx::new(bits.saturating_mul(2))?)?;
    if check.poly != rp.poly {
        return Err(Error::RoundingUncertified { worst: 0.5, tol: policy.tol });
    }
    Ok(rp)
}
