//! Shimura reciprocity: the matrices `g_tau(x)`, the right action of
//! `GL2(Z/mZ)` on a family of modular functions, class invariant detection
//! and class polynomials of invariants of higher level.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;

use crate::arith::{ext_gcd, gcd, mod_inv};
use crate::cmcurve::{recognize, QuadIntPolyK};
use crate::error::{Error, Result};
use crate::numerics::{poly_from_roots, round_to_int_poly, BigComplex, IntPoly, PrecisionCtx, RetryPolicy};
use crate::quadforms::{enumerate_reduced_forms, reduce_with_matrix, tau_of_form, Discriminant, Mat2, QuadForm};
use crate::rayclass::{QuadField, QuadInt, ResidueUnits};

pub mod eta;
mod symbol;

pub use symbol::{eval_eta_product, weber_f2_reduction_factor, Base, FunctionSymbol, Multiplier, Weber};

/// An invertible 2x2 matrix over `Z/mZ`, entries in `[0, m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GL2ModM {
    m: i64,
    e: Mat2,
}

fn mat_mul(x: Mat2, y: Mat2) -> Mat2 {
    [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]
}

impl GL2ModM {
    pub fn new(e: Mat2, m: i64) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidInput(format!("modulus must be positive, got {m}")));
        }
        let g = GL2ModM { m, e: e.map(|row| row.map(|x| x.rem_euclid(m))) };
        if gcd(g.det(), m) != 1 {
            return Err(Error::NonUnit(m));
        }
        Ok(g)
    }

    pub fn identity(m: i64) -> Self {
        GL2ModM::new([[1, 0], [0, 1]], m).expect("identity is invertible")
    }

    pub fn modulus(&self) -> i64 {
        self.m
    }

    pub fn entries(&self) -> Mat2 {
        self.e
    }

    pub fn det(&self) -> i64 {
        let [[a, b], [c, d]] = self.e;
        ((a as i128 * d as i128 - b as i128 * c as i128).rem_euclid(self.m as i128)) as i64
    }

    pub fn mul(&self, o: &GL2ModM) -> Result<GL2ModM> {
        if self.m != o.m {
            return Err(Error::InvalidInput(format!("moduli differ: {} vs {}", self.m, o.m)));
        }
        let m = self.m as i128;
        let (x, y) = (self.e, o.e);
        let at = |i: usize, j: usize| ((x[i][0] as i128 * y[0][j] as i128 + x[i][1] as i128 * y[1][j] as i128) % m) as i64;
        Ok(GL2ModM { m: self.m, e: [[at(0, 0), at(0, 1)], [at(1, 0), at(1, 1)]] })
    }

    pub fn inverse(&self) -> GL2ModM {
        let [[a, b], [c, d]] = self.e;
        let di = mod_inv(self.det(), self.m).unwrap_or(0);
        let s = |v: i64| ((v as i128 * di as i128).rem_euclid(self.m as i128)) as i64;
        GL2ModM { m: self.m, e: [[s(d), s(-b)], [s(-c), s(a)]] }
    }

    /// The image modulo a divisor `n` of `m`.
    pub fn reduce(&self, n: i64) -> Result<GL2ModM> {
        if n < 1 || self.m % n != 0 {
            return Err(Error::InvalidInput(format!("{n} does not divide {}", self.m)));
        }
        GL2ModM::new(self.e, n)
    }

    pub fn is_scalar_pm_one(&self) -> bool {
        let one = GL2ModM::identity(self.m);
        let minus = GL2ModM { m: self.m, e: one.e.map(|r| r.map(|x| (self.m - x) % self.m)) };
        *self == one || *self == minus
    }
}

impl fmt::Display for GL2ModM {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[a, b], [c, d]] = self.e;
        write!(f, "[[{a}, {b}], [{c}, {d}]] mod {}", self.m)
    }
}

/// A letter of a word in `SL2(Z)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Step {
    /// `tau -> -1/tau`.
    S,
    /// `tau -> tau + n`.
    T(i64),
}

impl Step {
    pub fn matrix(self) -> Mat2 {
        match self {
            Step::S => [[0, -1], [1, 0]],
            Step::T(n) => [[1, n], [0, 1]],
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::S => write!(f, "S"),
            Step::T(1) => write!(f, "T"),
            Step::T(n) => write!(f, "T^{n}"),
        }
    }
}

/// `M = W diag(1, k)` with `W` a word in `S`, `T` lifted to `SL2(Z)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub word: Vec<Step>,
    pub k: i64,
    /// The product of the word is `sign * lift`; `-1` acts trivially on functions.
    pub sign: i64,
    /// A lift to `SL2(Z)` of `M diag(1, 1/k)`.
    pub lift: Mat2,
}

impl Decomposition {
    /// `W diag(1, k)` reduced modulo `m`.
    pub fn reassemble(&self, m: i64) -> Result<GL2ModM> {
        let w = self.word.iter().fold([[self.sign, 0], [0, self.sign]], |acc, s| mat_mul(acc, s.matrix()));
        GL2ModM::new(w, m)?.mul(&GL2ModM::new([[1, 0], [0, self.k]], m)?)
    }

    pub fn word_string(&self) -> String {
        if self.word.is_empty() {
            return "1".into();
        }
        self.word.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("*")
    }
}

/// A lift to `SL2(Z)` of a determinant one matrix modulo `m`.
pub fn lift_sl2(n: &GL2ModM) -> Result<Mat2> {
    if n.det() != 1 % n.m {
        return Err(Error::InvalidInput(format!("{n} does not have determinant 1")));
    }
    let m = n.m;
    let [[a, b], [c, d]] = n.e;
    if m == 1 {
        return Ok([[1, 0], [0, 1]]);
    }
    if c == 0 && d == 1 % m {
        return Ok([[1, b], [0, 1]]);
    }
    if c == 0 && d == m - 1 {
        return Ok([[-1, b], [0, -1]]);
    }
    let c1 = if c == 0 { m } else { c };
    let mut d1 = d;
    while gcd(c1, d1) != 1 {
        d1 += m;
    }
    // a0 d1 - b0 c1 = 1.
    let (_, x0, y0) = ext_gcd(d1, c1);
    let (a0, b0) = (x0, -y0);
    // x c1 + y d1 = 1 gives s with a0 + s c1 = a, b0 + s d1 = b mod m.
    let (_, x, y) = ext_gcd(c1, d1);
    let s = ((x as i128 * (a - a0) as i128 + y as i128 * (b - b0) as i128).rem_euclid(m as i128)) as i64;
    let s = if s > m / 2 { s - m } else { s };
    let g = [[a0 + s * c1, b0 + s * d1], [c1, d1]];
    debug_assert_eq!(g[0][0] * g[1][1] - g[0][1] * g[1][0], 1);
    Ok(g)
}

/// Writes `g` in `SL2(Z)` as `+-T^q1 S T^q2 S ... T^n` by the nearest
/// rounding Euclidean algorithm on the first column.
pub fn word_of(g: Mat2) -> Vec<Step> {
    let [[mut a, mut b], [mut c, mut d]] = g;
    let mut word = vec![];
    while c != 0 {
        let q = (2 * a + c).div_euclid(2 * c);
        let q = if c < 0 { (-2 * a - c).div_euclid(-2 * c) } else { q };
        if q != 0 {
            word.push(Step::T(q));
        }
        a -= q * c;
        b -= q * d;
        word.push(Step::S);
        (a, b, c, d) = (c, d, -a, -b);
    }
    // Now g = +-[[1, n], [0, 1]].
    let n = a * b;
    if n != 0 {
        word.push(Step::T(n));
    }
    word
}

/// Decomposes `M` as a word in `S`, `T` times `diag(1, det M)`.
pub fn decompose(mm: &GL2ModM) -> Result<Decomposition> {
    let (k, m) = (mm.det(), mm.m);
    if m == 1 {
        return Ok(Decomposition { word: vec![], k: 1, sign: 1, lift: [[1, 0], [0, 1]] });
    }
    let kinv = mod_inv(k, m).ok_or(Error::NonUnit(m))?;
    let n = mm.mul(&GL2ModM::new([[1, 0], [0, kinv]], m)?)?;
    let lift = lift_sl2(&n)?;
    let word = word_of(lift);
    let w = word.iter().fold([[1, 0], [0, 1]], |acc, s| mat_mul(acc, s.matrix()));
    let sign = if w == lift { 1 } else { -1 };
    Ok(Decomposition { word, k, sign, lift })
}

/// `M_x^-1` with `M_x = [[-B x1 + x2, -C x1], [x1, x2]]` for `x = x1 tau + x2`.
pub fn g_tau(x1: i64, x2: i64, b: i64, c: i64, m: i64) -> Result<GL2ModM> {
    let mx = [[-b * x1 + x2, -c * x1], [x1, x2]];
    Ok(GL2ModM::new(mx, m)?.inverse())
}

/// `g_tau(x)` for `x` in `Z_K = Z[w]`.
pub fn g_tau_of(k: &QuadField, x: QuadInt, m: i64) -> Result<GL2ModM> {
    g_tau(x.y, x.x, k.b, k.c, m)
}

/// Order of the subgroup of `GL2(Z/mZ)` generated by `gens`, by closure.
pub fn generated_order(gens: &[GL2ModM], m: i64) -> Result<usize> {
    let id = GL2ModM::identity(m);
    let mut seen: HashSet<GL2ModM> = HashSet::from([id]);
    let mut frontier = vec![id];
    while let Some(g) = frontier.pop() {
        for h in gens {
            let p = g.mul(h)?;
            if seen.insert(p) {
                frontier.push(p);
            }
        }
    }
    Ok(seen.len())
}

/// Small elements of `Z_K` ordered by `max(|x|, |y|)`, then lexicographically.
fn small_elements(bound: i64) -> impl Iterator<Item = QuadInt> {
    (0..=bound).flat_map(|r| {
        let mut ring = vec![];
        for y in -r..=r {
            for x in -r..=r {
                if x.abs().max(y.abs()) == r {
                    ring.push(QuadInt::new(x, y));
                }
            }
        }
        ring
    })
}

/// Generators of `(Z_K / m)^* / Z_K^*` found greedily among small elements,
/// with the quotient order they certify.
pub fn unit_quotient_generators(k: &QuadField, m: i64) -> Result<(Vec<QuadInt>, i64)> {
    let ru = ResidueUnits::new(*k, m)?;
    if ru.order() != ru.expected_order() {
        return Err(Error::Internal(format!("residue unit group of order {} != {}", ru.order(), ru.expected_order())));
    }
    let g = ru.group();
    let units = ru.unit_image()?;
    let unit_order = g.subgroup_order(std::slice::from_ref(&units))?;
    let target = g.order() / unit_order;
    let mut gens: Vec<QuadInt> = vec![];
    let mut coords = vec![units];
    let mut order = 1;
    for x in small_elements(2 * m + 2) {
        if order == target {
            break;
        }
        if !k.is_unit_mod(x, m) {
            continue;
        }
        let c = ru.dlog(x)?;
        coords.push(c);
        let o = g.subgroup_order(&coords)? / unit_order;
        if o > order {
            order = o;
            gens.push(x);
        } else {
            coords.pop();
        }
    }
    if order != target {
        return Err(Error::Internal(format!("found a subgroup of order {order}, expected {target}")));
    }
    Ok((gens, target))
}

/// Outcome of testing `f(tau)` for being a class invariant.
#[derive(Clone, Debug)]
pub struct StabilizerReport {
    pub disc: i64,
    pub function: FunctionSymbol,
    pub level: i64,
    /// Order of `(Z_K / m)^* / Z_K^*`.
    pub quotient_order: i64,
    /// Each generator `x`, its matrix `g_tau(x)` and the transformed function.
    pub generators: Vec<(QuadInt, GL2ModM, FunctionSymbol)>,
    pub invariant: bool,
}

impl fmt::Display for StabilizerReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} at D = {}: level {}, |(Z_K/m)^*/Z_K^*| = {}, {}",
            self.function,
            self.disc,
            self.level,
            self.quotient_order,
            if self.invariant { "class invariant" } else { "not a class invariant" }
        )?;
        for (x, g, img) in &self.generators {
            let mark = if *img == self.function { "fixed" } else { "moved" };
            writeln!(f, "  x = {x}: g = {g} -> {img} ({mark})")?;
        }
        Ok(())
    }
}

fn principal_field(d: i64) -> Result<QuadField> {
    let disc = Discriminant::new(d)?;
    if !disc.is_fundamental() {
        return Err(Error::NotFundamental(d));
    }
    QuadField::new(disc)
}

fn stabilizer_report(f: &FunctionSymbol, k: &QuadField, m: i64, gens: &[QuadInt], q: i64) -> Result<StabilizerReport> {
    let mut generators = vec![];
    let mut invariant = true;
    for &x in gens {
        let g = g_tau_of(k, x, m)?;
        let img = f.act(&g)?;
        invariant &= img == *f;
        generators.push((x, g, img));
    }
    Ok(StabilizerReport { disc: k.d(), function: f.clone(), level: m, quotient_order: q, generators, invariant })
}

/// Is `f(tau)` in the Hilbert class field, `tau = (-B + sqrt D)/2`? True iff
/// `f o g_tau(x) = f` for generators `x` of `(Z_K/m)^*/Z_K^*`.
pub fn is_class_invariant(f: &FunctionSymbol, d: i64) -> Result<StabilizerReport> {
    let k = principal_field(d)?;
    let m = f.level()?;
    let (gens, q) = unit_quotient_generators(&k, m)?;
    stabilizer_report(f, &k, m, &gens, q)
}

/// The first `zeta_48^k f^e` (by increasing `e <= 24`, then `k < 48`) that is a
/// class invariant at `D`.
pub fn find_modification(f: &FunctionSymbol, d: i64) -> Result<Option<(FunctionSymbol, StabilizerReport)>> {
    let k = principal_field(d)?;
    let mut cache: HashMap<i64, (Vec<QuadInt>, i64)> = HashMap::new();
    for e in 1..=24 {
        let fe = f.pow(e);
        for z in 0..48 {
            let cand = fe.with_multiplier(fe.mult.mul(&Multiplier::zeta(z, 48)));
            let m = cand.level()?;
            if let std::collections::hash_map::Entry::Vacant(e) = cache.entry(m) {
                e.insert(unit_quotient_generators(&k, m)?);
            }
            let (gens, q) = &cache[&m];
            let report = stabilizer_report(&cand, &k, m, gens, *q)?;
            if report.invariant {
                return Ok(Some((cand, report)));
            }
        }
    }
    Ok(None)
}

/// A form equivalent to `q` with first coefficient prime to `m`, and `b` in `(-a, a]`.
pub fn coprime_representative(q: QuadForm, m: i64) -> Result<QuadForm> {
    let target = crate::quadforms::reduce(q)?;
    for r in 0..=2 * m {
        for x in (0..=r).rev().flat_map(|x| [x, -x]) {
            for y in [r - x.abs(), x.abs() - r] {
                if gcd(x, y) != 1 || gcd(q.eval(x, y), m) != 1 {
                    continue;
                }
                let (g, u, v) = ext_gcd(x, y);
                if g != 1 || x * u + y * v != 1 {
                    continue;
                }
                // [[x, -v], [y, u]] has determinant x u + v y = 1.
                let mut f = q.transform([[x, -v], [y, u]]);
                let t = (f.a - f.b).div_euclid(2 * f.a);
                f = f.transform([[1, t], [0, 1]]);
                if crate::quadforms::reduce(f)? != target {
                    return Err(Error::Internal(format!("coprime representative {f} left the class of {q}")));
                }
                return Ok(f);
            }
        }
    }
    Err(Error::Internal(format!("no representative of {q} with first coefficient prime to {m}")))
}

/// `U = [[a, (b - B)/2], [0, 1]] mod m` for a form with `a` prime to `m`:
/// the conjugate of `f(tau)` attached to the form is `f^U((-b + sqrt D)/2a)`.
pub fn conjugate_matrix(q: QuadForm, b: i64, c: i64, m: i64) -> Result<GL2ModM> {
    if q.disc() != b * b - 4 * c {
        return Err(Error::DiscriminantMismatch(q.disc(), b * b - 4 * c));
    }
    if gcd(q.a, m) != 1 {
        return Err(Error::NonUnit(m));
    }
    GL2ModM::new([[q.a, (q.b - b) / 2], [0, 1]], m)
}

/// One conjugate of a class invariant, as evaluated.
#[derive(Clone, Debug)]
pub struct Conjugate {
    pub form: QuadForm,
    /// The representative with first coefficient prime to the level.
    pub representative: QuadForm,
    pub u: GL2ModM,
    /// `f^U` moved to the reduced point.
    pub function: FunctionSymbol,
    pub value: BigComplex,
}

/// The conjugates of `f(tau)` over `K`, one per reduced form, evaluated at
/// the reduced CM points.
pub fn conjugates(f: &FunctionSymbol, d: i64, ctx: PrecisionCtx) -> Result<Vec<Conjugate>> {
    let k = principal_field(d)?;
    let m = f.level()?;
    let forms = enumerate_reduced_forms(k.disc);
    forms
        .par_iter()
        .map(|&form| {
            let rep = coprime_representative(form, m)?;
            let u = conjugate_matrix(rep, k.b, k.c, m)?;
            // The root of `rep` is gamma applied to the reduced root.
            let (red, gamma) = reduce_with_matrix(rep)?;
            let moved = u.mul(&GL2ModM::new(gamma, m)?)?;
            let function = f.act(&moved)?;
            let value = function.eval(&tau_of_form(red, ctx).value, ctx)?;
            Ok(Conjugate { form, representative: rep, u, function, value })
        })
        .collect()
}

/// Exact coefficients: rational integers, or integers of `K` when the
/// invariant is not real.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InvariantPoly {
    Rational(IntPoly),
    Quadratic(QuadIntPolyK),
}

impl InvariantPoly {
    pub fn degree(&self) -> usize {
        match self {
            InvariantPoly::Rational(p) => p.degree().unwrap_or(0),
            InvariantPoly::Quadratic(p) => p.degree(),
        }
    }

    pub fn as_int(&self) -> Option<&IntPoly> {
        match self {
            InvariantPoly::Rational(p) => Some(p),
            InvariantPoly::Quadratic(_) => None,
        }
    }
}

/// The class polynomial of an invariant.
#[derive(Clone, Debug)]
pub struct InvariantPolynomial {
    pub disc: i64,
    pub function: FunctionSymbol,
    pub poly: InvariantPoly,
    pub bits: u32,
}

fn invariant_poly_at(f: &FunctionSymbol, d: i64, ctx: PrecisionCtx, tol: f64) -> Result<InvariantPoly> {
    let k = principal_field(d)?;
    let wctx = PrecisionCtx::new(ctx.bits() + 32)?;
    let roots: Vec<BigComplex> = conjugates(f, d, wctx)?.into_iter().map(|c| c.value).collect();
    let cp = poly_from_roots(&roots, wctx)?;
    match round_to_int_poly(&cp, tol) {
        Ok(p) => Ok(InvariantPoly::Rational(p)),
        Err(Error::RoundingUncertified { .. }) if cp.coeffs().iter().any(|c| c.im.to_f64().abs() > 0.25) => {
            let coeffs = cp.coeffs().iter().map(|c| recognize(&k, c, ctx.bits())).collect::<Result<Vec<_>>>()?;
            Ok(InvariantPoly::Quadratic(QuadIntPolyK { field: k, coeffs }))
        }
        Err(e) => Err(e),
    }
}

/// `prod (X - f^U(tau_Q))` over the reduced forms `Q` of discriminant `D`,
/// certified by rounding and recomputed at twice the precision.
pub fn class_invariant_poly(f: &FunctionSymbol, d: i64, policy: &RetryPolicy) -> Result<InvariantPolynomial> {
    let report = is_class_invariant(f, d)?;
    if !report.invariant {
        return Err(Error::InvalidInput(format!("{f} is not a class invariant for D = {d}")));
    }
    // Coefficient size from a low precision pass.
    let low = PrecisionCtx::new(96)?;
    let roots: Vec<BigComplex> = conjugates(f, d, low)?.into_iter().map(|c| c.value).collect();
    let size = poly_from_roots(&roots, low)?.max_log2_coeff().max(0.0);
    let start = size.ceil() as u32 + 64;
    let (poly, bits) = policy.run(start, |ctx| invariant_poly_at(f, d, ctx, policy.tol))?;
    let check = invariant_poly_at(f, d, PrecisionCtx::new(bits.saturating_mul(2))?, policy.tol)?;
    if check != poly {
        return Err(Error::RoundingUncertified { worst: 0.5, tol: policy.tol });
    }
    Ok(InvariantPolynomial { disc: d, function: f.clone(), poly, bits })
}

/// Discriminants in `[lo, hi)` whose `D mod 4m` and principal polynomial
/// `mod m` agree with those of `d`.
pub fn congruent_discriminants(d: i64, m: i64, range: std::ops::Range<i64>) -> Vec<i64> {
    let key = |d: i64| -> Option<(i64, i64, i64)> {
        let disc = Discriminant::new(d).ok()?;
        disc.is_fundamental().then_some(())?;
        let (b, c) = disc.min_poly();
        Some((d.rem_euclid(4 * m), b.rem_euclid(m), c.rem_euclid(m)))
    };
    let Some(target) = key(d) else { return vec![] };
    range.filter(|&e| e != d && key(e) == Some(target)).collect()
}
