//! Arithmetic in the maximal order `Z_K = Z[w]` of an imaginary quadratic
//! field, and its ideals as rank-2 lattices.

use std::fmt;

use crate::arith::kronecker;
use crate::error::{Error, Result};
use crate::quadforms::{Discriminant, QuadForm};

/// An imaginary quadratic field with `Z_K = Z[w]`, `w^2 + Bw + C = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuadField {
    pub disc: Discriminant,
    pub b: i64,
    pub c: i64,
}

/// The element `x + y w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadInt {
    pub x: i64,
    pub y: i64,
}

impl QuadInt {
    pub fn new(x: i64, y: i64) -> Self {
        QuadInt { x, y }
    }

    pub fn rational(x: i64) -> Self {
        QuadInt { x, y: 0 }
    }

    pub fn one() -> Self {
        QuadInt::rational(1)
    }
}

impl fmt::Display for QuadInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.x, self.y) {
            (x, 0) => write!(f, "{x}"),
            (0, y) => write!(f, "{y}*w"),
            (x, y) if y < 0 => write!(f, "{x} - {}*w", -y),
            (x, y) => write!(f, "{x} + {y}*w"),
        }
    }
}

fn narrow(v: i128) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Internal("integer overflow in quadratic order arithmetic".into()))
}

impl QuadField {
    pub fn new(disc: Discriminant) -> Result<Self> {
        if !disc.is_fundamental() {
            return Err(Error::NotFundamental(disc.value()));
        }
        let (b, c) = disc.min_poly();
        Ok(QuadField { disc, b, c })
    }

    pub fn from_disc(d: i64) -> Result<Self> {
        QuadField::new(Discriminant::new(d)?)
    }

    pub fn d(&self) -> i64 {
        self.disc.value()
    }

    pub fn mul(&self, u: QuadInt, v: QuadInt) -> QuadInt {
        let (a, b, c, d) = (u.x as i128, u.y as i128, v.x as i128, v.y as i128);
        let bd = b * d;
        QuadInt {
            x: narrow(a * c - self.c as i128 * bd).expect("element product overflow"),
            y: narrow(a * d + b * c - self.b as i128 * bd).expect("element product overflow"),
        }
    }

    /// Product reduced modulo the rational integer `m`.
    pub fn mul_mod(&self, u: QuadInt, v: QuadInt, m: i64) -> QuadInt {
        let mm = m as i128;
        let (a, b, c, d) = (u.x as i128 % mm, u.y as i128 % mm, v.x as i128 % mm, v.y as i128 % mm);
        let bd = b * d % mm;
        QuadInt {
            x: ((a * c - self.c as i128 * bd).rem_euclid(mm)) as i64,
            y: ((a * d + b * c - self.b as i128 * bd).rem_euclid(mm)) as i64,
        }
    }

    pub fn pow_mod(&self, u: QuadInt, mut e: u64, m: i64) -> QuadInt {
        let mut base = self.reduce_mod(u, m);
        let mut r = self.reduce_mod(QuadInt::one(), m);
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul_mod(r, base, m);
            }
            base = self.mul_mod(base, base, m);
            e >>= 1;
        }
        r
    }

    pub fn reduce_mod(&self, u: QuadInt, m: i64) -> QuadInt {
        QuadInt { x: u.x.rem_euclid(m), y: u.y.rem_euclid(m) }
    }

    pub fn norm(&self, u: QuadInt) -> i128 {
        let (x, y) = (u.x as i128, u.y as i128);
        x * x - self.b as i128 * x * y + self.c as i128 * y * y
    }

    pub fn conj(&self, u: QuadInt) -> QuadInt {
        QuadInt { x: u.x - self.b * u.y, y: -u.y }
    }

    pub fn add(&self, u: QuadInt, v: QuadInt) -> QuadInt {
        QuadInt { x: u.x + v.x, y: u.y + v.y }
    }

    pub fn sub(&self, u: QuadInt, v: QuadInt) -> QuadInt {
        QuadInt { x: u.x - v.x, y: u.y - v.y }
    }

    /// A generator of the roots of unity in `Z_K`.
    pub fn unit_generator(&self) -> QuadInt {
        match self.d() {
            -4 => QuadInt::new(0, 1),
            -3 => QuadInt::new(1, 1),
            _ => QuadInt::rational(-1),
        }
    }

    pub fn num_units(&self) -> i64 {
        self.disc.num_units()
    }

    /// All roots of unity in `Z_K`.
    pub fn units(&self) -> Vec<QuadInt> {
        let g = self.unit_generator();
        let mut out = vec![QuadInt::one()];
        for _ in 1..self.num_units() {
            let next = self.mul(*out.last().unwrap(), g);
            out.push(next);
        }
        out
    }

    /// Is `u` invertible modulo `m Z_K`?
    pub fn is_unit_mod(&self, u: QuadInt, m: i64) -> bool {
        let n = self.norm(u).rem_euclid(m as i128) as i64;
        crate::arith::gcd(n, m) == 1
    }

    /// The ideal `[a, w + (B - b)/2]` attached to a primitive form.
    pub fn ideal_of_form(&self, f: QuadForm) -> Result<Ideal> {
        if f.disc() != self.d() {
            return Err(Error::DiscriminantMismatch(self.d(), f.disc()));
        }
        Ideal::from_generators(self, &[QuadInt::rational(f.a), QuadInt::new((self.b - f.b) / 2, 1)])
    }

    /// The primitive form attached to a primitive ideal (`c = 1` in HNF).
    pub fn form_of_ideal(&self, i: &Ideal) -> Result<QuadForm> {
        if i.c != 1 {
            return Err(Error::InvalidInput(format!("ideal {i} is not primitive")));
        }
        let b = self.b - 2 * i.b;
        let num = b as i128 * b as i128 - self.d() as i128;
        Ok(QuadForm::new(i.a, b, narrow(num / (4 * i.a as i128))?))
    }

    /// Prime ideals above `p` with ramification index: `[(P, e)]`.
    pub fn primes_above(&self, p: i64) -> Result<Vec<(Ideal, u32)>> {
        let k = kronecker(self.d(), p);
        // Roots of N(s + w) = s^2 - B s + C modulo p.
        let roots = || (0..p).filter(|&s| (s * s - self.b * s + self.c).rem_euclid(p) == 0);
        Ok(match k {
            1 => roots()
                .map(|s| Ok((Ideal::from_generators(self, &[QuadInt::rational(p), QuadInt::new(s, 1)])?, 1)))
                .collect::<Result<Vec<_>>>()?,
            0 => {
                let s = roots().next().ok_or_else(|| Error::Internal("no ramified root".into()))?;
                vec![(Ideal::from_generators(self, &[QuadInt::rational(p), QuadInt::new(s, 1)])?, 2)]
            }
            _ => vec![(Ideal::principal(self, QuadInt::rational(p))?, 1)],
        })
    }

    /// A shortest nonzero element of the lattice `i` for the norm form.
    pub fn shortest_element(&self, i: &Ideal) -> QuadInt {
        let mut u = QuadInt::rational(i.a);
        let mut v = QuadInt::new(i.b, i.c);
        let two_bil = |p: QuadInt, q: QuadInt| self.norm(self.add(p, q)) - self.norm(p) - self.norm(q);
        loop {
            if self.norm(u) > self.norm(v) {
                std::mem::swap(&mut u, &mut v);
            }
            let nu = self.norm(u);
            let t = two_bil(u, v);
            // mu = round(t / (2 nu))
            let mu = (2 * t + 2 * nu).div_euclid(4 * nu);
            if mu == 0 {
                break;
            }
            let mu = mu as i64;
            v = QuadInt::new(v.x - mu * u.x, v.y - mu * u.y);
            if self.norm(v) >= nu {
                break;
            }
        }
        if self.norm(u) <= self.norm(v) {
            u
        } else {
            v
        }
    }

    /// A generator of `i` if it is principal.
    pub fn principal_generator(&self, i: &Ideal) -> Option<QuadInt> {
        let s = self.shortest_element(i);
        (self.norm(s) == i.norm() as i128).then_some(s)
    }
}

/// The lattice `Z a + Z (b + c w)` in Hermite normal form: `a, c > 0`, `0 <= b < a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ideal {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.a, QuadInt::new(self.b, self.c))
    }
}

impl Ideal {
    pub fn unit() -> Self {
        Ideal { a: 1, b: 0, c: 1 }
    }

    /// HNF of the Z-span of the given vectors; they must span a rank-2 lattice.
    pub fn lattice(vectors: &[(i128, i128)]) -> Result<Ideal> {
        let mut row: Option<(i128, i128)> = None;
        let mut a: i128 = 0;
        let gcd128 = |mut x: i128, mut y: i128| {
            x = x.abs();
            y = y.abs();
            while y != 0 {
                (x, y) = (y, x % y);
            }
            x
        };
        for &(x, y) in vectors {
            match row {
                None if y == 0 => a = gcd128(a, x),
                None => row = Some(if y < 0 { (-x, -y) } else { (x, y) }),
                Some((rb, rc)) => {
                    if y == 0 {
                        a = gcd128(a, x);
                        continue;
                    }
                    // Bezout on the w-coordinates, using i128 throughout.
                    let (mut r0, mut r1) = (rc, y);
                    let (mut s0, mut s1) = (1i128, 0i128);
                    let (mut t0, mut t1) = (0i128, 1i128);
                    while r1 != 0 {
                        let q = r0.div_euclid(r1);
                        (r0, r1) = (r1, r0 - q * r1);
                        (s0, s1) = (s1, s0 - q * s1);
                        (t0, t1) = (t1, t0 - q * t1);
                    }
                    if r0 < 0 {
                        (r0, s0, t0) = (-r0, -s0, -t0);
                    }
                    let g = r0;
                    let new_row = (s0 * rb + t0 * x, g);
                    let killed = (y / g) * rb - (rc / g) * x;
                    a = gcd128(a, killed);
                    row = Some(new_row);
                }
            }
        }
        let (b, c) = row.ok_or_else(|| Error::InvalidInput("lattice has rank below 2".into()))?;
        if a == 0 {
            return Err(Error::InvalidInput("lattice has rank below 2".into()));
        }
        let b = b.rem_euclid(a);
        Ok(Ideal { a: narrow(a)?, b: narrow(b)?, c: narrow(c)? })
    }

    /// The ideal generated over `Z_K` by the given elements.
    pub fn from_generators(k: &QuadField, gens: &[QuadInt]) -> Result<Ideal> {
        let w = QuadInt::new(0, 1);
        let mut v = vec![];
        for &g in gens {
            let gw = k.mul(g, w);
            v.push((g.x as i128, g.y as i128));
            v.push((gw.x as i128, gw.y as i128));
        }
        Ideal::lattice(&v)
    }

    pub fn principal(k: &QuadField, g: QuadInt) -> Result<Ideal> {
        Ideal::from_generators(k, &[g])
    }

    pub fn norm(&self) -> i64 {
        self.a * self.c
    }

    pub fn basis(&self) -> [QuadInt; 2] {
        [QuadInt::rational(self.a), QuadInt::new(self.b, self.c)]
    }

    pub fn mul(&self, k: &QuadField, other: &Ideal) -> Result<Ideal> {
        let mut v = vec![];
        for p in self.basis() {
            for q in other.basis() {
                let (a, b, c, d) = (p.x as i128, p.y as i128, q.x as i128, q.y as i128);
                let bd = b * d;
                v.push((a * c - k.c as i128 * bd, a * d + b * c - k.b as i128 * bd));
            }
        }
        Ideal::lattice(&v)
    }

    pub fn pow(&self, k: &QuadField, e: u32) -> Result<Ideal> {
        let mut r = Ideal::unit();
        for _ in 0..e {
            r = r.mul(k, self)?;
        }
        Ok(r)
    }

    pub fn conj(&self, k: &QuadField) -> Result<Ideal> {
        let [p, q] = self.basis();
        let (p, q) = (k.conj(p), k.conj(q));
        Ideal::lattice(&[(p.x as i128, p.y as i128), (q.x as i128, q.y as i128)])
    }

    /// Canonical representative of `u` modulo the lattice.
    pub fn reduce(&self, u: QuadInt) -> QuadInt {
        let q = u.y.div_euclid(self.c);
        let x = u.x as i128 - q as i128 * self.b as i128;
        QuadInt::new(x.rem_euclid(self.a as i128) as i64, u.y - q * self.c)
    }

    pub fn contains(&self, u: QuadInt) -> bool {
        self.reduce(u) == QuadInt::new(0, 0)
    }

    /// Largest rational integer dividing the ideal, and the quotient.
    pub fn content(&self) -> (i64, Ideal) {
        let g = crate::arith::gcd(crate::arith::gcd(self.a, self.b), self.c);
        (g, Ideal { a: self.a / g, b: self.b / g, c: self.c / g })
    }

    /// Coordinates of a lattice element in the basis `{a, b + c w}`.
    pub fn coords(&self, u: QuadInt) -> Option<(i64, i64)> {
        if u.y % self.c != 0 {
            return None;
        }
        let t = u.y / self.c;
        let rest = u.x as i128 - t as i128 * self.b as i128;
        (rest % self.a as i128 == 0).then(|| ((rest / self.a as i128) as i64, t))
    }

    pub fn is_coprime_to(&self, m: i64) -> bool {
        crate::arith::gcd(self.norm(), m) == 1
    }
}

/// Bezout pair for coprime ideals containing `m`: `s` in `i`, `t` in `j`, `s + t = 1`.
pub fn coprime_split(i: &Ideal, j: &Ideal, m: i64) -> Result<(QuadInt, QuadInt)> {
    for y in 0..m {
        for x in 0..m {
            let t = QuadInt::new(x, y);
            if j.contains(t) && i.contains(QuadInt::new(1 - x, -y)) {
                return Ok((QuadInt::new(1 - x, -y), t));
            }
        }
    }
    Err(Error::Internal(format!("ideals {i} and {j} are not coprime")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplication_and_norms() {
        let k = QuadField::from_disc(-23).unwrap();
        let p = k.ideal_of_form(QuadForm::new(2, 1, 3)).unwrap();
        assert_eq!(p.norm(), 2);
        let p2 = p.mul(&k, &p).unwrap();
        assert_eq!(p2.norm(), 4);
        let f = crate::quadforms::reduce(k.form_of_ideal(&p2).unwrap()).unwrap();
        assert_eq!(f, QuadForm::new(2, -1, 3));
        let pp = p.mul(&k, &p.conj(&k).unwrap()).unwrap();
        assert_eq!(pp, Ideal::principal(&k, QuadInt::rational(2)).unwrap());
        let p3 = p2.mul(&k, &p).unwrap();
        let g = k.principal_generator(&p3).unwrap();
        assert_eq!(k.norm(g), 8);
        assert!(k.principal_generator(&p).is_none());
    }

    #[test]
    fn splitting_of_primes() {
        let k = QuadField::from_disc(-7).unwrap();
        let ps = k.primes_above(2).unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps[0].0.mul(&k, &ps[1].0).unwrap(), Ideal::principal(&k, QuadInt::rational(2)).unwrap());
        let ram = k.primes_above(7).unwrap();
        assert_eq!(ram[0].1, 2);
        assert_eq!(ram[0].0.pow(&k, 2).unwrap(), Ideal::principal(&k, QuadInt::rational(7)).unwrap());
        let inert = k.primes_above(3).unwrap();
        assert_eq!(inert[0].0.norm(), 9);
    }
}
