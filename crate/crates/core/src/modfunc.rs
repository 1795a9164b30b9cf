//! Modular functions at points of the upper half plane: Dedekind eta, the
//! Weber functions, j, gamma_2, gamma_3, eta quotients, and the lattice
//! functions g2, g3, Delta and the Weierstrass p-function of `[tau, 1]`.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::numerics::{BigComplex, PrecisionCtx, Real};

/// Extra bits carried through every series evaluation.
pub const GUARD_BITS: u32 = 32;

/// A q-series stops after this many consecutive negligible terms.
const NEGLIGIBLE_RUN: usize = 8;

fn check_tau(tau: &BigComplex) -> Result<()> {
    if tau.im.signum() <= 0 {
        return Err(Error::InvalidInput("tau must lie in the upper half plane".into()));
    }
    Ok(())
}

fn work_bits(ctx: PrecisionCtx) -> u32 {
    ctx.bits() + GUARD_BITS
}

/// `exp(2 pi i z / den)`; the branch of `q^(1/den)` is fixed by `z` itself.
pub fn nome_root(z: &BigComplex, den: i64, prec: u32) -> BigComplex {
    let two_pi = Real::pi(prec).mul_pow2(1);
    let d = Real::from_int(den, prec);
    let arg = BigComplex::new(-(&(&two_pi * &z.im) / &d), &(&two_pi * &z.re) / &d);
    arg.exp()
}

/// `q = exp(2 pi i tau)` together with its fractional powers.
#[derive(Clone, Debug)]
pub struct QNome {
    pub tau: BigComplex,
    pub q: BigComplex,
}

impl QNome {
    pub fn new(tau: &BigComplex, ctx: PrecisionCtx) -> Result<Self> {
        check_tau(tau)?;
        Ok(QNome { tau: tau.clone(), q: nome_root(tau, 1, work_bits(ctx)) })
    }

    /// `q^(1/m) = exp(2 pi i tau / m)`.
    pub fn root(&self, m: i64) -> BigComplex {
        nome_root(&self.tau, m, self.q.prec())
    }
}

fn negligible(x: &BigComplex, prec: u32) -> bool {
    x.is_zero() || x.log2_abs() < -(prec as f64)
}

/// `sum_{n in Z} (-1)^n q^(n(3n-1)/2)` at working precision `prec`.
fn pentagonal_sum(q: &BigComplex, prec: u32) -> BigComplex {
    let mut sum = BigComplex::one(prec);
    let q2 = q.square();
    let q3 = &q2 * q;
    // t = q^(n(3n-1)/2), qn = q^n, step = q^(3n+1)
    let mut t = BigComplex::one(prec);
    let mut qn = BigComplex::one(prec);
    let mut step = q.clone();
    let mut quiet = 0;
    let mut n = 0u64;
    while quiet < NEGLIGIBLE_RUN {
        n += 1;
        t = &t * &step;
        step = &step * &q3;
        qn = &qn * q;
        let t2 = &t * &qn;
        let pair = &t + &t2;
        if n % 2 == 1 {
            sum = &sum - &pair;
        } else {
            sum = &sum + &pair;
        }
        for term in [&t, &t2] {
            if negligible(term, prec) {
                quiet += 1;
            } else {
                quiet = 0;
            }
        }
        if t.is_zero() {
            break;
        }
    }
    sum
}

fn eta_wp(tau: &BigComplex, prec: u32) -> BigComplex {
    let q = nome_root(tau, 1, prec);
    &nome_root(tau, 24, prec) * &pentagonal_sum(&q, prec)
}

/// Dedekind eta: `q^(1/24) sum (-1)^n q^(n(3n-1)/2)`.
pub fn eta(tau: &BigComplex, ctx: PrecisionCtx) -> Result<BigComplex> {
    check_tau(tau)?;
    Ok(eta_wp(&tau.with_prec(work_bits(ctx)), work_bits(ctx)).with_prec(ctx.bits()))
}

fn sqrt2(prec: u32) -> Real {
    Real::from_int(2, prec).sqrt()
}

fn f2_wp(tau: &BigComplex, prec: u32) -> BigComplex {
    let two_tau = tau.mul_pow2(1);
    (&eta_wp(&two_tau, prec) / &eta_wp(tau, prec)).scale(&sqrt2(prec))
}

fn f_wp(tau: &BigComplex, prec: u32) -> BigComplex {
    let shifted = (tau + &BigComplex::one(prec)).mul_pow2(-1);
    let z = BigComplex::root_of_unity(-1, 48, prec);
    &z * &(&eta_wp(&shifted, prec) / &eta_wp(tau, prec))
}

fn f1_wp(tau: &BigComplex, prec: u32) -> BigComplex {
    &eta_wp(&tau.mul_pow2(-1), prec) / &eta_wp(tau, prec)
}

/// Weber `f2(tau) = sqrt(2) eta(2 tau) / eta(tau)`.
pub fn weber_f2(tau: &BigComplex, ctx: PrecisionCtx) -> Result<BigComplex> {
    check_tau(tau)?;
    Ok(f2_wp(&tau.with_prec(work_bits(ctx)), work_bits(ctx)).with_prec(ctx.bits()))
}

/// Weber `f(tau) = zeta_48^-1 eta((tau + 1)/2) / eta(tau)`.
pub fn weber_f(tau: &BigComplex, ctx: PrecisionCtx) -> Result<BigComplex> {
    check_tau(tau)?;
    Ok(f_wp(&tau.with_prec(work_bits(ctx)), work_bits(ctx)).with_prec(ctx.bits()))
}

/// Weber `f1(tau) = eta(tau/2) / eta(tau)`.
pub fn weber_f1(tau: &BigComplex, ctx: PrecisionCtx) -> Result<BigComplex> {
    check_tau(tau)?;
    Ok(f1_wp(&tau.with_prec(work_bits(ctx)), work_bits(ctx)).with_prec(ctx.bits()))
}

fn j_of_f2(f2: &BigComplex) -> Result<BigComplex> {
    if f2.is_zero() {
        return Err(Error::Internal("Weber f2 vanished".into()));
    }
    let p = f2.prec();
    let x = f2.powi(24);
    let s = &x + &BigComplex::from_int(16, p);
    Ok(&(&s.square() * &s) / &x)
}

/// `j = (f2^24 + 16)^3 / f2^24`.
pub fn j_from_f2(tau: &BigComplex, ctx: PrecisionCtx) -> Result<BigComplex> {
    check_tau(tau)?;
    let f2 = f2_wp(&tau.with_prec(work_bits(ctx)), work_bits(ctx));
    Ok(j_of_f2(&f2)?.with_prec(ctx.bits()))
}

/// The j-invariant (computed through the Weber function `f2`).
pub fn j(tau: &BigComplex, ctx: PrecisionCtx) -> Result<BigComplex> {
    j_from_f2(tau, ctx)
}

/// `gamma_2 = (f2^24 + 16) / f2^8`, a cube root of j.
pub fn gamma2(tau: &BigComplex, ctx: PrecisionCtx) -> Result<BigComplex> {
    check_tau(tau)?;
    let p = work_bits(ctx);
    let f2 = f2_wp(&tau.with_prec(p), p);
    let x8 = f2.powi(8);
    let x24 = &x8.square() * &x8;
    Ok((&(&x24 + &BigComplex::from_int(16, p)) / &x8).with_prec(ctx.bits()))
}

/// `gamma_3 = (f^24 + 8)(f1^8 - f2^8) / f^8`, a square root of `j - 1728`.
pub fn gamma3(tau: &BigComplex, ctx: PrecisionCtx) -> Result<BigComplex> {
    check_tau(tau)?;
    let p = work_bits(ctx);
    let t = tau.with_prec(p);
    let f8 = f_wp(&t, p).powi(8);
    let f24 = &f8.square() * &f8;
    let d = &f1_wp(&t, p).powi(8) - &f2_wp(&t, p).powi(8);
    Ok((&(&(&f24 + &BigComplex::from_int(8, p)) * &d) / &f8).with_prec(ctx.bits()))
}

/// `|j(tau) - (1/q + 744 + 196884 q)|`, the tail of the q-expansion of j.
pub fn j_qexp_check(tau: &BigComplex, ctx: PrecisionCtx) -> Result<Real> {
    check_tau(tau)?;
    if tau.im < Real::from_int(2, 64) {
        return Err(Error::InvalidInput("q-expansion check needs Im(tau) >= 2".into()));
    }
    let p = work_bits(ctx);
    let q = nome_root(&tau.with_prec(p), 1, p);
    let jv = j_of_f2(&f2_wp(&tau.with_prec(p), p))?;
    let approx = &(&q.recip() + &BigComplex::from_int(744, p)) + &q.scale(&Real::from_int(196884, p));
    Ok((&jv - &approx).abs().with_prec(ctx.bits()))
}

/// `sum_{n >= 1} a_n q^n` with integer coefficients, stopping after a run of
/// negligible terms.
fn integer_q_series(q: &BigComplex, prec: u32, coeff: impl Fn(u64) -> BigInt) -> BigComplex {
    let mut sum = BigComplex::zero(prec);
    let mut qn = BigComplex::one(prec);
    let mut quiet = 0;
    let mut n = 0u64;
    while quiet < NEGLIGIBLE_RUN {
        n += 1;
        qn = &qn * q;
        let term = qn.scale(&Real::from_bigint(&coeff(n), prec));
        if negligible(&term, prec) {
            quiet += 1;
        } else {
            quiet = 0;
        }
        sum = &sum + &term;
        if qn.is_zero() {
            break;
        }
    }
    sum
}

fn sigma(n: u64, k: u32) -> BigInt {
    let mut s = BigInt::from(0);
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            s += BigInt::from(d).pow(k);
            let e = n / d;
            if e != d {
                s += BigInt::from(e).pow(k);
            }
        }
        d += 1;
    }
    s
}

/// Eisenstein series `E4 = 1 + 240 sum sigma_3(n) q^n`.
fn e4(q: &BigComplex, prec: u32) -> BigComplex {
    let s = integer_q_series(q, prec, |n| sigma(n, 3) * 240);
    &BigComplex::one(prec) + &s
}

/// Eisenstein series `E6 = 1 - 504 sum sigma_5(n) q^n`.
fn e6(q: &BigComplex, prec: u32) -> BigComplex {
    let s = integer_q_series(q, prec, |n| sigma(n, 5) * 504);
    &BigComplex::one(prec) - &s
}

/// Invariants of the lattice `[tau, 1]`.
#[derive(Clone, Debug)]
pub struct LatticeInvariants {
    pub g2: BigComplex,
    pub g3: BigComplex,
    /// `(2 pi)^12 eta^24`.
    pub delta: BigComplex,
    /// `1728 g2^3 / Delta`.
    pub j: BigComplex,
}

fn lattice_wp(tau: &BigComplex, prec: u32) -> LatticeInvariants {
    let q = nome_root(tau, 1, prec);
    let two_pi = Real::pi(prec).mul_pow2(1);
    let tp4 = two_pi.powi(4);
    let tp6 = &tp4 * &two_pi.square();
    let g2 = e4(&q, prec).scale(&(&tp4 / &Real::from_int(12, prec)));
    let g3 = e6(&q, prec).scale(&(&tp6 / &Real::from_int(216, prec)));
    let delta = eta_wp(tau, prec).powi(24).scale(&two_pi.powi(12));
    let g2c = &g2.square() * &g2;
    let j = &g2c.scale(&Real::from_int(1728, prec)) / &delta;
    LatticeInvariants { g2, g3, delta, j }
}

/// `g2 = (2 pi)^4 E4 / 12`, `g3 = (2 pi)^6 E6 / 216`, `Delta = (2 pi)^12 eta^24`.
pub fn lattice_invariants(tau: &BigComplex, ctx: PrecisionCtx) -> Result<LatticeInvariants> {
    check_tau(tau)?;
    let l = lattice_wp(&tau.with_prec(work_bits(ctx)), work_bits(ctx));
    let b = ctx.bits();
    Ok(LatticeInvariants { g2: l.g2.with_prec(b), g3: l.g3.with_prec(b), delta: l.delta.with_prec(b), j: l.j.with_prec(b) })
}

/// Weierstrass `p(z)` and `p'(z)` for the lattice `[tau, 1]`.
#[derive(Clone, Debug)]
pub struct WpValue {
    pub wp: BigComplex,
    pub dwp: BigComplex,
}

/// Moves `z` by a lattice vector so that `|Im z| <= Im(tau)/2` and `|Re z| <= 1/2`.
fn reduce_mod_lattice(z: &BigComplex, tau: &BigComplex) -> BigComplex {
    let p = z.prec().max(tau.prec());
    let k = (&z.im / &tau.im).round();
    let kk = BigComplex::from_bigint(&k, p);
    let z1 = z - &(&kk * tau);
    let l = z1.re.round();
    &z1 - &BigComplex::from_bigint(&l, p)
}

fn wp_wp(z: &BigComplex, tau: &BigComplex, prec: u32, pole_bits: u32) -> Result<WpValue> {
    let z = reduce_mod_lattice(&z.with_prec(prec), &tau.with_prec(prec));
    if z.is_zero() || z.log2_abs() < -(pole_bits as f64) {
        return Err(Error::Pole(pole_bits));
    }
    let one = BigComplex::one(prec);
    let q = nome_root(tau, 1, prec);
    let u = nome_root(&z, 1, prec);
    let ui = u.recip();
    // x/(1-x)^2 and x(1+x)/(1-x)^3
    let kernels = |x: &BigComplex| -> (BigComplex, BigComplex) {
        let d = &one - x;
        let d2 = d.square();
        let a = x / &d2;
        let b = &(x * &(&one + x)) / &(&d2 * &d);
        (a, b)
    };
    let (a0, b0) = kernels(&u);
    let mut s = &a0 + &BigComplex::new(Real::from_ratio(1, 12, prec), Real::zero(prec));
    let mut sd = b0;
    let mut qn = BigComplex::one(prec);
    let mut quiet = 0;
    while quiet < NEGLIGIBLE_RUN {
        qn = &qn * &q;
        let x1 = &qn * &u;
        let x2 = &qn * &ui;
        let (a1, b1) = kernels(&x1);
        let (a2, b2) = kernels(&x2);
        let (a3, _) = kernels(&qn);
        let term = &(&a1 + &a2) - &a3.mul_pow2(1);
        let dterm = &b1 - &b2;
        if negligible(&x2, prec) && negligible(&x1, prec) {
            quiet += 1;
        } else {
            quiet = 0;
        }
        s = &s + &term;
        sd = &sd + &dterm;
        if qn.is_zero() {
            break;
        }
    }
    let two_pi_i = BigComplex::new(Real::zero(prec), Real::pi(prec).mul_pow2(1));
    let c2 = two_pi_i.square();
    let c3 = &c2 * &two_pi_i;
    Ok(WpValue { wp: &c2 * &s, dwp: &c3 * &sd })
}

/// `p(z)` and `p'(z)` for the lattice `[tau, 1]` from their q-expansions.
///
/// Fails with a pole error when `z` is within `2^(-bits/2)` of a lattice point.
pub fn wp(z: &BigComplex, tau: &BigComplex, ctx: PrecisionCtx) -> Result<WpValue> {
    check_tau(tau)?;
    let v = wp_wp(z, tau, work_bits(ctx), ctx.bits() / 2)?;
    Ok(WpValue { wp: v.wp.with_prec(ctx.bits()), dwp: v.dwp.with_prec(ctx.bits()) })
}

/// Value of an eta quotient together with its level.
#[derive(Clone, Debug)]
pub struct EtaQuotientValue {
    pub value: BigComplex,
    pub level: u32,
}

/// `eta(p tau)/eta(tau)` (level `24p`) or
/// `eta(p tau) eta(q tau) / (eta(pq tau) eta(tau))` (level `24pq`).
pub fn eta_quotient(tau: &BigComplex, p: i64, q: Option<i64>, ctx: PrecisionCtx) -> Result<EtaQuotientValue> {
    check_tau(tau)?;
    let prime = |x: i64| crate::arith::is_prime(x);
    if !prime(p) || q.is_some_and(|q| !prime(q) || q == p) {
        return Err(Error::InvalidInput("eta quotient needs distinct primes".into()));
    }
    let w = work_bits(ctx);
    let t = tau.with_prec(w);
    let scaled = |k: i64| eta_wp(&t.scale(&Real::from_int(k, w)), w);
    let base = eta_wp(&t, w);
    let (value, level) = match q {
        None => (&scaled(p) / &base, 24 * p),
        Some(q) => (&(&scaled(p) * &scaled(q)) / &(&scaled(p * q) * &base), 24 * p * q),
    };
    Ok(EtaQuotientValue { value: value.with_prec(ctx.bits()), level: level as u32 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(bits: u32) -> PrecisionCtx {
        PrecisionCtx::new(bits).unwrap()
    }

    fn c(re: f64, im: f64, bits: u32) -> BigComplex {
        BigComplex::from_f64(re, im, bits)
    }

    fn rel(a: &BigComplex, b: &BigComplex) -> f64 {
        (a - b).log2_abs() - b.log2_abs()
    }

    #[test]
    fn eta_translation() {
        let x = ctx(128);
        let t = c(0.0, 2.0, 128);
        let a = eta(&(&t + &BigComplex::one(128)), x).unwrap();
        let b = &BigComplex::root_of_unity(1, 24, 128) * &eta(&t, x).unwrap();
        assert!(rel(&a, &b) < -120.0);
    }

    #[test]
    fn j_special_values() {
        let x = ctx(128);
        let i = BigComplex::i(128);
        let v = j(&i, x).unwrap();
        assert!((&v - &BigComplex::from_int(1728, 128)).log2_abs() < -100.0);
        let rho = BigComplex::new(Real::from_ratio(-1, 2, 128), Real::from_int(3, 128).sqrt().mul_pow2(-1));
        assert!(j(&rho, x).unwrap().log2_abs() < -100.0);
    }

    #[test]
    fn gamma_functions_are_roots() {
        let x = ctx(160);
        let t = c(0.1, 1.3, 160);
        let jv = j(&t, x).unwrap();
        let g2 = gamma2(&t, x).unwrap();
        let g3 = gamma3(&t, x).unwrap();
        assert!(rel(&(&g2.square() * &g2), &jv) < -140.0);
        assert!(rel(&g3.square(), &(&jv - &BigComplex::from_int(1728, 160))) < -140.0);
    }
}
