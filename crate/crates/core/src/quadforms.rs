//! Positive definite binary quadratic forms `aX^2 + bXY + cY^2`.

use std::collections::HashMap;
use std::fmt;

use crate::arith::{ext_gcd, gcd, is_squarefree, isqrt};
use crate::error::{Error, Result};
use crate::numerics::{BigComplex, PrecisionCtx, Real};
use crate::rayclass::FinAbGroup;

/// A negative discriminant `D = 0, 1 mod 4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Discriminant {
    d: i64,
    fundamental: bool,
}

impl Discriminant {
    pub fn new(d: i64) -> Result<Self> {
        if d >= 0 || !matches!(d.rem_euclid(4), 0 | 1) {
            return Err(Error::InvalidDiscriminant(d));
        }
        if d < -(1i64 << 40) {
            return Err(Error::InvalidInput(format!("discriminant {d} is too large")));
        }
        let fundamental = if d.rem_euclid(4) == 1 {
            is_squarefree(d)
        } else {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m)
        };
        Ok(Discriminant { d, fundamental })
    }

    /// Like [`Discriminant::new`] but rejects non-fundamental values.
    pub fn fundamental(d: i64) -> Result<Self> {
        let disc = Discriminant::new(d)?;
        if !disc.fundamental {
            return Err(Error::NotFundamental(d));
        }
        Ok(disc)
    }

    pub fn value(&self) -> i64 {
        self.d
    }

    pub fn is_fundamental(&self) -> bool {
        self.fundamental
    }

    /// `(B, C)` such that the order of discriminant `D` is `Z[w]` with `w^2 + Bw + C = 0`
    /// and `w = (-B + sqrt(D))/2`.
    pub fn min_poly(&self) -> (i64, i64) {
        if self.d.rem_euclid(4) == 0 {
            (0, -self.d / 4)
        } else {
            (1, (1 - self.d) / 4)
        }
    }

    /// Number of roots of unity in the order.
    pub fn num_units(&self) -> i64 {
        match self.d {
            -3 => 6,
            -4 => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for Discriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.d)
    }
}

/// The form `aX^2 + bXY + cY^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

/// A 2x2 integer matrix `[[p, q], [r, s]]` stored row-major.
pub type Mat2 = [[i64; 2]; 2];

fn mat_mul(x: Mat2, y: Mat2) -> Mat2 {
    [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]
}

impl QuadForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        QuadForm { a, b, c }
    }

    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// The identity form of discriminant `D`.
    pub fn principal(d: Discriminant) -> Self {
        let dv = d.value();
        let b = dv.rem_euclid(2);
        QuadForm::new(1, b, (b * b - dv) / 4)
    }

    pub fn is_primitive(&self) -> bool {
        gcd(gcd(self.a, self.b), self.c) == 1
    }

    pub fn is_reduced(&self) -> bool {
        let QuadForm { a, b, c } = *self;
        a > 0 && b.abs() <= a && a <= c && !((b.abs() == a || a == c) && b < 0)
    }

    /// `(a, -b, c)`: the inverse class.
    pub fn inverse(&self) -> Self {
        QuadForm::new(self.a, -self.b, self.c)
    }

    /// Value at `(x, y)`.
    pub fn eval(&self, x: i64, y: i64) -> i64 {
        self.a * x * x + self.b * x * y + self.c * y * y
    }

    /// The form `f(gamma (X, Y))`.
    pub fn transform(&self, g: Mat2) -> Self {
        let [[p, q], [r, s]] = g;
        let (a, b, c) = (self.a, self.b, self.c);
        QuadForm::new(
            a * p * p + b * p * r + c * r * r,
            2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
            a * q * q + b * q * s + c * s * s,
        )
    }
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

/// Reduces `f`, also returning `gamma` in SL2(Z) with `reduced = f o gamma`.
///
/// The root of `f(X, 1)` in the upper half plane is `gamma` applied (as a
/// Moebius map) to the root of the reduced form.
pub fn reduce_with_matrix(f: QuadForm) -> Result<(QuadForm, Mat2)> {
    let QuadForm { a, b, c } = f;
    if a <= 0 || f.disc() >= 0 {
        return Err(Error::NotPositiveDefinite { a, b, c });
    }
    let mut f = f;
    let mut g: Mat2 = [[1, 0], [0, 1]];
    let normalize = |f: &mut QuadForm, g: &mut Mat2| {
        if !(-f.a < f.b && f.b <= f.a) {
            let r = (f.a - f.b).div_euclid(2 * f.a);
            *f = f.transform([[1, r], [0, 1]]);
            *g = mat_mul(*g, [[1, r], [0, 1]]);
        }
    };
    normalize(&mut f, &mut g);
    while f.a > f.c || (f.a == f.c && f.b < 0) {
        f = f.transform([[0, -1], [1, 0]]);
        g = mat_mul(g, [[0, -1], [1, 0]]);
        normalize(&mut f, &mut g);
    }
    Ok((f, g))
}

/// The unique reduced form equivalent to `f`.
pub fn reduce(f: QuadForm) -> Result<QuadForm> {
    reduce_with_matrix(f).map(|(r, _)| r)
}

/// Gauss composition followed by reduction.
pub fn compose(f: QuadForm, g: QuadForm) -> Result<QuadForm> {
    let d = f.disc();
    if g.disc() != d {
        return Err(Error::DiscriminantMismatch(d, g.disc()));
    }
    let (f1, f2) = if f.a > g.a { (g, f) } else { (f, g) };
    let (a1, b1) = (f1.a as i128, f1.b as i128);
    let (a2, b2, c2) = (f2.a as i128, f2.b as i128, f2.c as i128);
    // Solve for the united form: B = b2 + 2 v2 r.
    let s = (b1 + b2) / 2;
    let n = b2 - s;
    let (y1, dd) = if a2 % a1 == 0 {
        (0i128, a1)
    } else {
        let (g, u, _) = ext_gcd(a2 as i64, a1 as i64);
        (u as i128, g as i128)
    };
    let (x2, y2, d1) = if s % dd == 0 {
        (0i128, -1i128, dd)
    } else {
        let (g, u, v) = ext_gcd(s as i64, dd as i64);
        (u as i128, -(v as i128), g as i128)
    };
    let v1 = a1 / d1;
    let v2 = a2 / d1;
    let r = (y1 * y2 * n - x2 * c2).rem_euclid(v1);
    let b3 = b2 + 2 * v2 * r;
    let a3 = v1 * v2;
    let c3 = (b3 * b3 - d as i128) / (4 * a3);
    let conv = |x: i128| i64::try_from(x).map_err(|_| Error::Internal("form composition overflow".into()));
    reduce(QuadForm::new(conv(a3)?, conv(b3)?, conv(c3)?))
}

/// Primitive reduced forms of discriminant `D`, sorted by `(a, b)`.
pub fn enumerate_reduced_forms(d: Discriminant) -> Vec<QuadForm> {
    let dv = d.value();
    let amax = isqrt(-dv / 3);
    let mut out = vec![];
    for a in 1..=amax {
        for b in -a + 1..=a {
            if (b - dv).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - dv;
            if num % (4 * a) != 0 {
                continue;
            }
            let f = QuadForm::new(a, b, num / (4 * a));
            if f.is_reduced() && f.is_primitive() {
                out.push(f);
            }
        }
    }
    out
}

/// The CM point attached to a reduced form.
#[derive(Clone, Debug)]
pub struct TauPoint {
    pub value: BigComplex,
    pub form: QuadForm,
}

/// `(-b + sqrt(D)) / 2a` in the upper half plane.
pub fn tau_of_form(f: QuadForm, ctx: PrecisionCtx) -> TauPoint {
    let bits = ctx.bits();
    let two_a = Real::from_int(2 * f.a, bits);
    let re = Real::from_int(-f.b, bits) / &two_a;
    let im = Real::from_int(-f.disc(), bits).sqrt() / &two_a;
    TauPoint { value: BigComplex::new(re, im), form: f }
}

/// The class group realised on reduced forms.
#[derive(Clone, Debug)]
pub struct ClassGroup {
    disc: Discriminant,
    forms: Vec<QuadForm>,
    generators: Vec<QuadForm>,
    group: FinAbGroup,
    dlog: HashMap<QuadForm, Vec<i64>>,
}

impl ClassGroup {
    pub fn disc(&self) -> Discriminant {
        self.disc
    }

    pub fn forms(&self) -> &[QuadForm] {
        &self.forms
    }

    pub fn order(&self) -> usize {
        self.forms.len()
    }

    /// Generators of the presentation; `group().labels()` names them.
    pub fn generators(&self) -> &[QuadForm] {
        &self.generators
    }

    pub fn group(&self) -> &FinAbGroup {
        &self.group
    }

    /// Canonical coordinates of the class of `f`.
    pub fn dlog(&self, f: QuadForm) -> Result<Vec<i64>> {
        let r = reduce(f)?;
        self.dlog
            .get(&r)
            .cloned()
            .ok_or_else(|| Error::InvalidInput(format!("form {f} does not have discriminant {}", self.disc)))
    }

    /// The reduced form with the given canonical coordinates.
    pub fn element(&self, c: &[i64]) -> QuadForm {
        let c = self.group.normalize(c);
        *self.dlog.iter().find(|(_, v)| **v == c).expect("coordinates in range").0
    }

    /// Exponent vector of `f` with respect to [`ClassGroup::generators`].
    pub fn gen_exponents(&self, f: QuadForm) -> Result<Vec<i64>> {
        Ok(self.group.lift(&self.dlog(f)?))
    }
}

/// Group structure of the form class group of a fundamental discriminant.
///
/// Generators are chosen greedily in enumeration order; each new generator
/// contributes the relation `n g = (element of the subgroup found so far)`
/// where `n` is its order modulo that subgroup.
pub fn class_group(d: Discriminant) -> Result<ClassGroup> {
    if !d.is_fundamental() {
        return Err(Error::NotFundamental(d.value()));
    }
    let forms = enumerate_reduced_forms(d);
    let id = QuadForm::principal(d);
    // Subgroup elements with exponent vectors over the generators so far.
    let mut span: HashMap<QuadForm, Vec<i64>> = HashMap::from([(id, vec![])]);
    let mut generators = vec![];
    let mut relations: Vec<Vec<i64>> = vec![];
    for &g in &forms {
        if span.contains_key(&g) {
            continue;
        }
        let k = generators.len();
        generators.push(g);
        for v in span.values_mut() {
            v.push(0);
        }
        for r in relations.iter_mut() {
            r.push(0);
        }
        let mut power = g;
        let mut n = 1;
        while !span.contains_key(&power) {
            power = compose(power, g)?;
            n += 1;
        }
        let mut rel = span[&power].iter().map(|x| -x).collect::<Vec<_>>();
        rel[k] += n;
        relations.push(rel);
        let base: Vec<(QuadForm, Vec<i64>)> = span.iter().map(|(f, v)| (*f, v.clone())).collect();
        let mut step = g;
        for i in 1..n {
            for (f, v) in &base {
                let mut w = v.clone();
                w[k] = i;
                span.insert(compose(*f, step)?, w);
            }
            step = compose(step, g)?;
        }
    }
    debug_assert_eq!(span.len(), forms.len());
    let labels = generators.iter().map(|g| g.to_string()).collect();
    let group = FinAbGroup::from_relations(labels, relations)?;
    let dlog = span.into_iter().map(|(f, v)| (f, group.reduce(&v))).collect();
    Ok(ClassGroup { disc: d, forms, generators, group, dlog })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(d: i64) -> Discriminant {
        Discriminant::new(d).unwrap()
    }

    #[test]
    fn discriminant_validation() {
        assert!(Discriminant::new(-5).is_err());
        assert!(Discriminant::new(5).is_err());
        assert!(disc(-4).is_fundamental());
        assert!(disc(-8).is_fundamental());
        assert!(!disc(-12).is_fundamental());
        assert!(!disc(-16).is_fundamental());
        assert!(disc(-84).is_fundamental());
        assert_eq!(disc(-71).min_poly(), (1, 18));
    }

    #[test]
    fn small_lists() {
        assert_eq!(enumerate_reduced_forms(disc(-3)), vec![QuadForm::new(1, 1, 1)]);
        assert_eq!(
            enumerate_reduced_forms(disc(-23)),
            vec![QuadForm::new(1, 1, 6), QuadForm::new(2, -1, 3), QuadForm::new(2, 1, 3)]
        );
        assert_eq!(enumerate_reduced_forms(disc(-71)).len(), 7);
    }

    #[test]
    fn reduction_examples() {
        assert_eq!(reduce(QuadForm::new(6, 1, 1)).unwrap(), QuadForm::new(1, 1, 6));
        assert_eq!(reduce(QuadForm::new(2, -1, 3)).unwrap(), QuadForm::new(2, -1, 3));
        assert!(reduce(QuadForm::new(1, 3, 1)).is_err());
        let f = QuadForm::new(13, 27, 15);
        let (r, g) = reduce_with_matrix(f).unwrap();
        assert_eq!(f.transform(g), r);
        assert_eq!(g[0][0] * g[1][1] - g[0][1] * g[1][0], 1);
    }

    #[test]
    fn composition_examples() {
        let (p, f, fi) = (QuadForm::new(1, 1, 6), QuadForm::new(2, 1, 3), QuadForm::new(2, -1, 3));
        assert_eq!(compose(f, fi).unwrap(), p);
        assert_eq!(compose(f, f).unwrap(), fi);
        assert_eq!(compose(p, f).unwrap(), f);
        assert!(compose(f, QuadForm::new(1, 1, 1)).is_err());
    }

    #[test]
    fn class_groups() {
        assert_eq!(class_group(disc(-71)).unwrap().group().invariants(), &[7]);
        assert!(class_group(disc(-3)).unwrap().group().invariants().is_empty());
        assert_eq!(class_group(disc(-84)).unwrap().group().invariants(), &[2, 2]);
        assert!(class_group(disc(-12)).is_err());
    }

    #[test]
    fn tau_points() {
        let ctx = PrecisionCtx::new(128).unwrap();
        let t = tau_of_form(QuadForm::new(1, 0, 1), ctx).value.to_f64();
        assert!(t.0.abs() < 1e-30 && (t.1 - 1.0).abs() < 1e-30);
        let t = tau_of_form(QuadForm::new(2, 1, 3), ctx).value.to_f64();
        assert!((t.0 + 0.25).abs() < 1e-15 && (t.1 - 23f64.sqrt() / 4.0).abs() < 1e-15);
    }
}
