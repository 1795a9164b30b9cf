//! Symbols for modular functions in a family closed under `GL2(Z/mZ)`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use super::eta::{self, EtaTerm};
use super::{decompose, GL2ModM, Step};
use crate::arith::{factor, gcd, kronecker, lcm};
use crate::error::{Error, Result};
use crate::modfunc;
use crate::numerics::{BigComplex, PrecisionCtx, Real};

/// `exp(2 pi i num/den) * sqrt(radicand)` with `radicand > 0` rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multiplier {
    num: i64,
    den: i64,
    radicand: BigRational,
}

/// Squarefree part of a positive integer given as a BigInt.
fn squarefree_part(n: &BigInt) -> Result<i64> {
    let v = n.to_i64().ok_or_else(|| Error::Internal("radicand too large".into()))?;
    Ok(factor(v).into_iter().filter(|&(_, e)| e % 2 == 1).map(|(p, _)| p).product())
}

impl Multiplier {
    pub fn one() -> Self {
        Multiplier { num: 0, den: 1, radicand: BigRational::one() }
    }

    /// `zeta_n^k`.
    pub fn zeta(k: i64, n: i64) -> Self {
        let k = k.rem_euclid(n);
        let g = gcd(k, n).max(1);
        Multiplier { num: k / g, den: n / g, radicand: BigRational::one() }
    }

    pub fn sqrt(radicand: BigRational) -> Result<Self> {
        if !radicand.is_positive() {
            return Err(Error::InvalidInput("multiplier radicand must be positive".into()));
        }
        Ok(Multiplier { radicand, ..Multiplier::one() })
    }

    /// `(k, n)` with the root of unity equal to `zeta_n^k`, `n` minimal.
    pub fn root_of_unity(&self) -> (i64, i64) {
        (self.num, self.den)
    }

    pub fn radicand(&self) -> &BigRational {
        &self.radicand
    }

    pub fn mul(&self, o: &Multiplier) -> Multiplier {
        let n = lcm(self.den, o.den);
        let k = self.num * (n / self.den) + o.num * (n / o.den);
        Multiplier { radicand: &self.radicand * &o.radicand, ..Multiplier::zeta(k, n) }
    }

    pub fn pow(&self, e: u32) -> Multiplier {
        let k = (self.num as i128 * e as i128).rem_euclid(self.den as i128) as i64;
        Multiplier { radicand: self.radicand.pow(e as i32), ..Multiplier::zeta(k, self.den) }
    }

    /// Discriminant of `Q(sqrt(radicand))` (1 when rational).
    fn sqrt_disc(&self) -> Result<i64> {
        let n = squarefree_part(&(self.radicand.numer() * self.radicand.denom()))?;
        Ok(match n {
            1 => 1,
            _ if n % 4 == 1 => n,
            _ => 4 * n,
        })
    }

    /// Smallest `N` with the multiplier in `Q(zeta_N)`.
    pub fn conductor(&self) -> Result<i64> {
        Ok(lcm(self.den, self.sqrt_disc()?))
    }

    /// Image under `zeta_N -> zeta_N^k` (`k` coprime to the conductor).
    pub fn galois(&self, k: i64) -> Result<Multiplier> {
        let n = self.conductor()?;
        let k = k.rem_euclid(n.max(1));
        if gcd(k, n) != 1 {
            return Err(Error::NonUnit(n));
        }
        let root = Multiplier::zeta(self.num * k, self.den);
        let disc = self.sqrt_disc()?;
        let sign = if disc == 1 { 1 } else { kronecker(disc, k) };
        let sign = if sign < 0 { Multiplier::zeta(1, 2) } else { Multiplier::one() };
        Ok(Multiplier { radicand: self.radicand.clone(), ..root.mul(&sign) })
    }

    pub fn to_complex(&self, prec: u32) -> BigComplex {
        let z = BigComplex::root_of_unity(self.num, self.den, prec);
        if self.radicand.is_one() {
            return z;
        }
        let r = &Real::from_bigint(self.radicand.numer(), prec) / &Real::from_bigint(self.radicand.denom(), prec);
        z.scale(&r.sqrt())
    }

    pub fn is_one(&self) -> bool {
        self.num == 0 && self.radicand.is_one()
    }
}

impl fmt::Display for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let root = match (self.num, self.den) {
            (0, _) => None,
            (1, 2) => Some("-1".to_string()),
            (1, n) => Some(format!("zeta{n}")),
            (k, n) => Some(format!("zeta{n}^{k}")),
        };
        let rad = (!self.radicand.is_one()).then(|| format!("sqrt({})", self.radicand));
        match (root, rad) {
            (None, None) => write!(f, "1"),
            (Some(r), None) => write!(f, "{r}"),
            (None, Some(s)) => write!(f, "{s}"),
            (Some(r), Some(s)) => write!(f, "{r}*{s}"),
        }
    }
}

/// Weber's functions `f`, `f1`, `f2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Weber {
    F,
    F1,
    F2,
}

impl Weber {
    /// The classical transformation table: `(w o S, w o T, sigma_k(w))`
    /// as `(multiplier exponent of zeta_48, image)`, and the sign of `sigma_k`.
    fn s(self) -> Weber {
        match self {
            Weber::F => Weber::F,
            Weber::F1 => Weber::F2,
            Weber::F2 => Weber::F1,
        }
    }

    fn t(self) -> (i64, Weber) {
        match self {
            Weber::F => (-1, Weber::F1),
            Weber::F1 => (-1, Weber::F),
            Weber::F2 => (2, Weber::F2),
        }
    }

    fn galois_sign(self, k: i64) -> i32 {
        match self {
            Weber::F2 => kronecker(2, k),
            _ => 1,
        }
    }

    /// The same function as an eta product times a constant.
    pub fn as_eta(self) -> (Multiplier, Vec<EtaTerm>) {
        let t = |a, b, d, r| EtaTerm { a, b, d, r };
        match self {
            Weber::F => (Multiplier::zeta(-1, 48), vec![t(1, 1, 2, 1), t(1, 0, 1, -1)]),
            Weber::F1 => (Multiplier::one(), vec![t(1, 0, 2, 1), t(1, 0, 1, -1)]),
            Weber::F2 => (
                Multiplier::sqrt(BigRational::from_integer(2.into())).unwrap(),
                vec![t(1, 0, 1, -1), t(2, 0, 1, 1)],
            ),
        }
    }
}

/// The underlying function of a [`FunctionSymbol`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Base {
    J,
    Gamma2,
    Gamma3,
    Weber(Weber),
    /// A weight zero eta product.
    Eta(Vec<EtaTerm>),
    /// The Fricke function `F_(u1/m, u2/m)`.
    Fricke { m: i64, u1: i64, u2: i64 },
}

fn fricke(m: i64, u1: i64, u2: i64) -> Result<Base> {
    let (u1, u2) = (u1.rem_euclid(m), u2.rem_euclid(m));
    if (u1, u2) == (0, 0) {
        return Err(Error::InvalidInput("Fricke index must be nonzero".into()));
    }
    let neg = ((m - u1) % m, (m - u2) % m);
    let (u1, u2) = neg.min((u1, u2));
    Ok(Base::Fricke { m, u1, u2 })
}

fn step_matrix(step: Step) -> [[i64; 2]; 2] {
    match step {
        Step::S => [[0, -1], [1, 0]],
        Step::T(n) => [[1, n], [0, 1]],
    }
}

impl Base {
    pub fn level(&self) -> i64 {
        match self {
            Base::J => 1,
            Base::Gamma2 => 3,
            Base::Gamma3 => 2,
            Base::Weber(_) => 48,
            Base::Eta(ts) => 24 * ts.iter().fold(1, |l, t| lcm(l, t.det())),
            Base::Fricke { m, .. } => *m,
        }
    }

    /// `self o step = c * image`.
    fn act_step(&self, step: Step) -> Result<(Multiplier, Base)> {
        Ok(match (self, step) {
            (Base::J, _) => (Multiplier::one(), Base::J),
            (Base::Gamma2, Step::S) => (Multiplier::one(), Base::Gamma2),
            (Base::Gamma2, Step::T(n)) => (Multiplier::zeta(-n, 3), Base::Gamma2),
            (Base::Gamma3, Step::S) => (Multiplier::zeta(1, 2), Base::Gamma3),
            (Base::Gamma3, Step::T(n)) => (Multiplier::zeta(n, 2), Base::Gamma3),
            (Base::Weber(w), Step::S) => (Multiplier::one(), Base::Weber(w.s())),
            (Base::Weber(w), Step::T(n)) => {
                let (mut k, mut cur) = (0, *w);
                for _ in 0..n.rem_euclid(48) {
                    let (dk, next) = cur.t();
                    k += dk;
                    cur = next;
                }
                (Multiplier::zeta(k, 48), Base::Weber(cur))
            }
            (Base::Eta(ts), _) => {
                let img = eta::act_sl2(ts, step_matrix(step))?;
                (Multiplier::zeta(img.zeta24, 24).mul(&Multiplier::sqrt(img.radicand)?), Base::Eta(img.terms))
            }
            (Base::Fricke { m, u1, u2 }, _) => {
                let [[a, b], [c, d]] = step_matrix(step);
                (Multiplier::one(), fricke(*m, u1 * a + u2 * c, u1 * b + u2 * d)?)
            }
        })
    }

    /// `sigma_k(self) = c * image` on Fourier coefficients.
    fn act_galois(&self, k: i64) -> Result<(Multiplier, Base)> {
        Ok(match self {
            Base::J | Base::Gamma2 | Base::Gamma3 => (Multiplier::one(), self.clone()),
            Base::Weber(w) => {
                let c = if w.galois_sign(k) < 0 { Multiplier::zeta(1, 2) } else { Multiplier::one() };
                (c, self.clone())
            }
            Base::Eta(ts) => {
                let img = eta::act_galois(ts, k);
                (Multiplier::zeta(img.zeta24, 24), Base::Eta(img.terms))
            }
            Base::Fricke { m, u1, u2 } => (Multiplier::one(), fricke(*m, *u1, u2 * k)?),
        })
    }

    fn eval(&self, tau: &BigComplex, ctx: PrecisionCtx) -> Result<BigComplex> {
        match self {
            Base::J => modfunc::j(tau, ctx),
            Base::Gamma2 => modfunc::gamma2(tau, ctx),
            Base::Gamma3 => modfunc::gamma3(tau, ctx),
            Base::Weber(Weber::F) => modfunc::weber_f(tau, ctx),
            Base::Weber(Weber::F1) => modfunc::weber_f1(tau, ctx),
            Base::Weber(Weber::F2) => modfunc::weber_f2(tau, ctx),
            Base::Eta(ts) => eval_eta_product(ts, tau, ctx),
            Base::Fricke { m, u1, u2 } => {
                let p = ctx.bits();
                let inv = modfunc::lattice_invariants(tau, ctx)?;
                let z = (&tau.scale(&Real::from_int(*u1, p)) + &BigComplex::from_int(*u2, p))
                    .scale(&Real::from_ratio(1, *m, p));
                let wp = modfunc::wp(&z, tau, ctx)?.wp;
                Ok(&(&(&inv.g2 * &inv.g3) / &inv.delta) * &wp)
            }
        }
    }
}

/// `prod eta((a tau + b)/d)^r`.
pub fn eval_eta_product(terms: &[EtaTerm], tau: &BigComplex, ctx: PrecisionCtx) -> Result<BigComplex> {
    let p = ctx.bits();
    let mut out = BigComplex::one(p);
    for t in terms {
        let z = (&tau.scale(&Real::from_int(t.a, p)) + &BigComplex::from_int(t.b, p)).scale(&Real::from_ratio(1, t.d, p));
        out = &out * &modfunc::eta(&z, ctx)?.powi(t.r as i64);
    }
    Ok(out)
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Base::J => write!(f, "j"),
            Base::Gamma2 => write!(f, "gamma2"),
            Base::Gamma3 => write!(f, "gamma3"),
            Base::Weber(Weber::F) => write!(f, "f"),
            Base::Weber(Weber::F1) => write!(f, "f1"),
            Base::Weber(Weber::F2) => write!(f, "f2"),
            Base::Eta(ts) => {
                let parts: Vec<String> = ts
                    .iter()
                    .map(|t| {
                        let arg = match (t.a, t.b, t.d) {
                            (1, 0, 1) => "tau".to_string(),
                            (a, 0, 1) => format!("{a}tau"),
                            (a, b, d) => {
                                let num = if a == 1 { "tau".to_string() } else { format!("{a}tau") };
                                if b == 0 { format!("{num}/{d}") } else { format!("({num}+{b})/{d}") }
                            }
                        };
                        if t.r == 1 { format!("eta({arg})") } else { format!("eta({arg})^{}", t.r) }
                    })
                    .collect();
                write!(f, "{}", parts.join("*"))
            }
            Base::Fricke { m, u1, u2 } => write!(f, "F[{u1},{u2}]/{m}"),
        }
    }
}

/// `multiplier * base^exponent`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionSymbol {
    pub base: Base,
    pub mult: Multiplier,
    pub exponent: u32,
}

impl FunctionSymbol {
    pub fn new(base: Base) -> Self {
        FunctionSymbol { base, mult: Multiplier::one(), exponent: 1 }
    }

    pub fn j() -> Self {
        Self::new(Base::J)
    }

    pub fn gamma2() -> Self {
        Self::new(Base::Gamma2)
    }

    pub fn gamma3() -> Self {
        Self::new(Base::Gamma3)
    }

    pub fn weber(w: Weber) -> Self {
        Self::new(Base::Weber(w))
    }

    /// `eta(p tau)/eta(tau)`, or `eta(p tau) eta(q tau)/(eta(pq tau) eta(tau))`.
    pub fn eta_quotient(p: i64, q: Option<i64>) -> Result<Self> {
        if p < 2 || q.is_some_and(|q| q < 2) {
            return Err(Error::InvalidInput("eta quotient indices must be at least 2".into()));
        }
        let t = |a, r| EtaTerm { a, b: 0, d: 1, r };
        let terms = match q {
            None => vec![t(p, 1), t(1, -1)],
            Some(q) => vec![t(p, 1), t(q, 1), t(p * q, -1), t(1, -1)],
        };
        Ok(Self::new(Base::Eta(eta::canonical(terms))))
    }

    pub fn eta_product(terms: Vec<EtaTerm>) -> Result<Self> {
        if terms.iter().map(|t| t.r as i64).sum::<i64>() != 0 {
            return Err(Error::InvalidInput("eta product must have weight zero".into()));
        }
        Ok(Self::new(Base::Eta(eta::canonical(terms))))
    }

    pub fn fricke(m: i64, u1: i64, u2: i64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidInput("Fricke level must be at least 2".into()));
        }
        Ok(Self::new(fricke(m, u1, u2)?))
    }

    /// Parses `j`, `gamma2`, `gamma3`, `f`, `f1`, `f2`, `eta:p` or `eta:p,q`.
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "j" => Self::j(),
            "gamma2" | "g2" => Self::gamma2(),
            "gamma3" | "g3" => Self::gamma3(),
            "f" => Self::weber(Weber::F),
            "f1" => Self::weber(Weber::F1),
            "f2" => Self::weber(Weber::F2),
            _ => {
                let bad = || Error::InvalidInput(format!("unknown function {s:?}"));
                let rest = s.strip_prefix("eta:").ok_or_else(bad)?;
                let nums: Vec<i64> = rest.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
                match nums[..] {
                    [p] => Self::eta_quotient(p, None)?,
                    [p, q] => Self::eta_quotient(p, Some(q))?,
                    _ => return Err(bad()),
                }
            }
        })
    }

    pub fn with_multiplier(&self, m: Multiplier) -> Self {
        FunctionSymbol { mult: m, ..self.clone() }
    }

    /// The same function rewritten as a constant times an eta product, when
    /// the base is a Weber function or already an eta product.
    pub fn to_eta(&self) -> Option<FunctionSymbol> {
        let (c, terms) = match &self.base {
            Base::Weber(w) => w.as_eta(),
            Base::Eta(ts) => (Multiplier::one(), ts.clone()),
            _ => return None,
        };
        let e = self.exponent;
        let terms = terms.into_iter().map(|t| EtaTerm { r: t.r * e as i32, ..t }).collect();
        Some(FunctionSymbol { base: Base::Eta(eta::canonical(terms)), mult: self.mult.mul(&c.pow(e)), exponent: 1 })
    }

    pub fn pow(&self, e: u32) -> Self {
        FunctionSymbol { base: self.base.clone(), mult: self.mult.pow(e), exponent: self.exponent * e }
    }

    /// The level: `Gamma(level)` fixes the function and `Q(zeta_level)`
    /// contains its Fourier coefficients.
    pub fn level(&self) -> Result<i64> {
        Ok(lcm(self.base.level(), self.mult.conductor()?))
    }

    fn apply(&self, c: Multiplier, base: Base, mult: Multiplier) -> Self {
        FunctionSymbol { base, mult: mult.mul(&c.pow(self.exponent)), exponent: self.exponent }
    }

    /// `self o step` for one letter of a word in `S` and `T`.
    pub fn act_step(&self, step: Step) -> Result<Self> {
        let (c, base) = self.base.act_step(step)?;
        Ok(self.apply(c, base, self.mult.clone()))
    }

    /// The action of `diag(1, k)` on Fourier coefficients.
    pub fn act_diag(&self, k: i64) -> Result<Self> {
        let (c, base) = self.base.act_galois(k)?;
        Ok(self.apply(c, base, self.mult.galois(k)?))
    }

    /// The right action of `GL2(Z/mZ)`; the level must divide `m`.
    pub fn act(&self, g: &GL2ModM) -> Result<Self> {
        let level = self.level()?;
        if g.modulus() % level != 0 {
            return Err(Error::InvalidInput(format!(
                "matrix modulus {} is not a multiple of the level {level}",
                g.modulus()
            )));
        }
        let dec = decompose(&g.reduce(level)?)?;
        let mut f = self.clone();
        for &s in &dec.word {
            f = f.act_step(s)?;
        }
        f.act_diag(dec.k)
    }

    /// Numerical value at `tau`.
    pub fn eval(&self, tau: &BigComplex, ctx: PrecisionCtx) -> Result<BigComplex> {
        let wctx = PrecisionCtx::new(ctx.bits() + 16)?;
        let v = self.base.eval(&tau.with_prec(wctx.bits()), wctx)?.powi(self.exponent as i64);
        Ok((&self.mult.to_complex(wctx.bits()) * &v).with_prec(ctx.bits()))
    }
}

impl fmt::Display for FunctionSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = if self.exponent == 1 {
            self.base.to_string()
        } else if matches!(self.base, Base::Eta(_)) {
            format!("({})^{}", self.base, self.exponent)
        } else {
            format!("{}^{}", self.base, self.exponent)
        };
        if self.mult.is_one() {
            write!(f, "{base}")
        } else {
            write!(f, "{}*{base}", self.mult)
        }
    }
}

/// Reduction factor `deg_f Psi / deg_j Psi` for `f2`, from
/// `Psi(f2, j) = (f2^24 + 16)^3 - j f2^24`.
pub fn weber_f2_reduction_factor() -> u32 {
    let deg_f = 3 * 24;
    let deg_j = 1;
    deg_f / deg_j
}
