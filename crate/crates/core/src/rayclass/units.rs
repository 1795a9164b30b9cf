//! The unit group `(Z_K / m Z_K)^*`.

use crate::arith::factor;
use crate::error::{Error, Result};

use super::field::{coprime_split, Ideal, QuadField, QuadInt};
use super::group::FinAbGroup;

/// One level `(1 + P^a) / (1 + P^b)` of the filtration, isomorphic to `P^a / P^b`.
#[derive(Clone, Debug)]
struct Level {
    pa: Ideal,
    pb: Ideal,
    /// Quotient `P^a / P^b` on the basis of `P^a`.
    quot: FinAbGroup,
    /// `1 + beta` for each basis element `beta` of `P^a`.
    gens: [QuadInt; 2],
}

/// `(Z_K / P^k)^*` for a prime ideal power.
#[derive(Clone, Debug)]
struct Local {
    pk: Ideal,
    /// Residue field size.
    q: i64,
    /// Element of order `q - 1` (a lift of a generator of the residue field).
    omega: QuadInt,
    /// Powers of omega modulo `P^k`.
    omega_powers: Vec<QuadInt>,
    levels: Vec<Level>,
    group: FinAbGroup,
}

fn mul_mod_ideal(k: &QuadField, i: &Ideal, u: QuadInt, v: QuadInt) -> QuadInt {
    i.reduce(k.mul(i.reduce(u), i.reduce(v)))
}

fn pow_mod_ideal(k: &QuadField, i: &Ideal, u: QuadInt, mut e: u64) -> QuadInt {
    let mut r = i.reduce(QuadInt::one());
    let mut b = i.reduce(u);
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod_ideal(k, i, r, b);
        }
        b = mul_mod_ideal(k, i, b, b);
        e >>= 1;
    }
    r
}

/// Residues modulo `P` (with `P` of norm `q`): the reduced lattice points.
fn residues(i: &Ideal) -> impl Iterator<Item = QuadInt> + '_ {
    (0..i.c).flat_map(move |y| (0..i.a).map(move |x| QuadInt::new(x, y)))
}

impl Local {
    fn new(k: &QuadField, p: &Ideal, e: u32) -> Result<Local> {
        let pk = p.pow(k, e)?;
        let q = p.norm();
        let one = pk.reduce(QuadInt::one());
        // Generator of the residue field.
        let qm1 = q - 1;
        let prime_factors: Vec<i64> = factor(qm1).into_iter().map(|(r, _)| r).collect();
        let g = residues(p)
            .find(|&x| {
                !p.contains(x)
                    && prime_factors.iter().all(|&r| p.reduce(pow_mod_ideal(k, p, x, (qm1 / r) as u64)) != p.reduce(QuadInt::one()))
            })
            .ok_or_else(|| Error::Internal("no residue field generator".into()))?;
        // Kill the pro-p part: omega = g^(q^(e-1)) has order exactly q-1.
        let omega = pow_mod_ideal(k, &pk, g, (q as u64).pow(e - 1));
        let mut omega_powers = vec![one];
        for _ in 1..qm1 {
            let next = mul_mod_ideal(k, &pk, *omega_powers.last().unwrap(), omega);
            omega_powers.push(next);
        }
        // Filtration levels a -> 2a.
        let mut levels = vec![];
        let mut a = 1u32;
        while a < e {
            let b = (2 * a).min(e);
            let pa = p.pow(k, a)?;
            let pb = p.pow(k, b)?;
            let [u, v] = pb.basis();
            let rels: Vec<Vec<i64>> = [u, v]
                .iter()
                .map(|&x| {
                    let (s, t) = pa.coords(x).expect("P^b lies in P^a");
                    vec![s, t]
                })
                .collect();
            let quot = FinAbGroup::from_relations(vec!["1+a".into(), "1+bw".into()], rels)?;
            let [ba, bb] = pa.basis();
            let gens = [pk.reduce(k.add(QuadInt::one(), ba)), pk.reduce(k.add(QuadInt::one(), bb))];
            levels.push(Level { pa, pb, quot, gens });
            a = b;
        }
        // Presentation: omega, then two generators per level.
        let n = 1 + 2 * levels.len();
        let mut labels = vec!["omega".to_string()];
        for (i, _) in levels.iter().enumerate() {
            labels.push(format!("l{i}a"));
            labels.push(format!("l{i}b"));
        }
        let mut relations = vec![];
        let mut r0 = vec![0i64; n];
        r0[0] = qm1;
        relations.push(r0);
        let mut local = Local { pk, q, omega, omega_powers, levels, group: FinAbGroup::trivial() };
        for li in 0..local.levels.len() {
            let rows = local.levels[li].quot.relations().to_vec();
            for row in rows {
                let z = local.levels[li]
                    .gens
                    .iter()
                    .zip(&row)
                    .fold(one, |acc, (&g, &r)| mul_mod_ideal(k, &local.pk, acc, local.pow_signed(k, g, r)));
                let mut rel = local.exponents_from_level(k, z, li + 1)?;
                for x in rel.iter_mut() {
                    *x = -*x;
                }
                rel[1 + 2 * li] += row[0];
                rel[2 + 2 * li] += row[1];
                relations.push(rel);
            }
        }
        local.group = FinAbGroup::from_relations(labels, relations)?;
        Ok(local)
    }

    fn pow_signed(&self, k: &QuadField, g: QuadInt, e: i64) -> QuadInt {
        if e >= 0 {
            pow_mod_ideal(k, &self.pk, g, e as u64)
        } else {
            let inv = self.inverse(k, g);
            pow_mod_ideal(k, &self.pk, inv, (-e) as u64)
        }
    }

    fn order(&self) -> u64 {
        (self.pk.norm() / self.q * (self.q - 1)) as u64
    }

    fn inverse(&self, k: &QuadField, g: QuadInt) -> QuadInt {
        pow_mod_ideal(k, &self.pk, g, self.order() - 1)
    }

    /// Exponents (over all presentation generators) of `z`, which must lie in
    /// `1 + P^a` where `a` is the lower bound of level `start`.
    fn exponents_from_level(&self, k: &QuadField, z: QuadInt, start: usize) -> Result<Vec<i64>> {
        let mut exps = vec![0i64; 1 + 2 * self.levels.len()];
        let mut z = self.pk.reduce(z);
        for li in start..self.levels.len() {
            let lv = &self.levels[li];
            let t = k.sub(z, QuadInt::one());
            let (s0, s1) = lv.pa.coords(t).ok_or_else(|| Error::Internal("element left the filtration".into()))?;
            let c = lv.quot.lift(&lv.quot.reduce(&[s0, s1]));
            exps[1 + 2 * li] = c[0];
            exps[2 + 2 * li] = c[1];
            let divisor = lv
                .gens
                .iter()
                .zip(&c)
                .fold(self.pk.reduce(QuadInt::one()), |acc, (&g, &e)| mul_mod_ideal(k, &self.pk, acc, self.pow_signed(k, g, e)));
            z = mul_mod_ideal(k, &self.pk, z, self.inverse(k, divisor));
            debug_assert!(lv.pb.contains(k.sub(z, QuadInt::one())));
        }
        if self.pk.reduce(z) != self.pk.reduce(QuadInt::one()) {
            return Err(Error::Internal("filtration discrete log did not terminate at 1".into()));
        }
        Ok(exps)
    }

    /// Canonical coordinates of a unit modulo `P^k`.
    fn dlog(&self, k: &QuadField, x: QuadInt) -> Result<Vec<i64>> {
        let x = self.pk.reduce(x);
        // Teichmueller component: x^(q^(e-1)) lies in <omega>.
        let pe = (self.pk.norm() / self.q) as u64;
        let t = pow_mod_ideal(k, &self.pk, x, pe);
        let i = self
            .omega_powers
            .iter()
            .position(|&w| w == t)
            .ok_or(Error::NonUnit(self.pk.norm()))?;
        // omega^i = x^(pe), and pe is invertible modulo q-1, so x = omega^(i/pe) * (1 + ...).
        let qm1 = self.q - 1;
        let j = if qm1 == 1 {
            0
        } else {
            let inv = crate::arith::mod_inv((pe as i64).rem_euclid(qm1), qm1).expect("p-power is prime to q-1");
            crate::arith::mul_mod(i as i64, inv, qm1)
        };
        let rest = mul_mod_ideal(k, &self.pk, x, self.inverse(k, self.omega_powers[j as usize]));
        let mut e = self.exponents_from_level(k, rest, 0)?;
        e[0] = j;
        Ok(self.group.reduce(&e))
    }
}

/// `(Z_K / m Z_K)^*` as a finite abelian group with discrete logarithms.
#[derive(Clone, Debug)]
pub struct ResidueUnits {
    field: QuadField,
    m: i64,
    locals: Vec<Local>,
    /// CRT idempotents: `e_i = 1 mod P_i^k_i`, `0` modulo the other factors.
    idempotents: Vec<QuadInt>,
    group: FinAbGroup,
}

impl ResidueUnits {
    pub fn new(field: QuadField, m: i64) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidInput(format!("modulus must be positive, got {m}")));
        }
        let mut locals = vec![];
        for (p, v) in factor(m) {
            for (pr, e) in field.primes_above(p)? {
                locals.push(Local::new(&field, &pr, e * v)?);
            }
        }
        let mut idempotents = vec![];
        for i in 0..locals.len() {
            let mut rest = Ideal::unit();
            for (j, l) in locals.iter().enumerate() {
                if j != i {
                    rest = rest.mul(&field, &l.pk)?;
                }
            }
            let (_, t) = coprime_split(&locals[i].pk, &rest, m)?;
            idempotents.push(field.reduce_mod(t, m));
        }
        // Direct sum of the local groups on their canonical generators.
        let sizes: Vec<usize> = locals.iter().map(|l| l.group.rank()).collect();
        let n: usize = sizes.iter().sum();
        let mut relations = vec![];
        let mut labels = vec![];
        let mut off = 0;
        for (li, l) in locals.iter().enumerate() {
            for (j, &d) in l.group.invariants().iter().enumerate() {
                let mut r = vec![0i64; n];
                r[off + j] = d;
                relations.push(r);
                labels.push(format!("u{li}_{j}"));
            }
            off += sizes[li];
        }
        let group = if n == 0 { FinAbGroup::trivial() } else { FinAbGroup::from_relations(labels, relations)? };
        Ok(ResidueUnits { field, m, locals, idempotents, group })
    }

    pub fn modulus(&self) -> i64 {
        self.m
    }

    pub fn field(&self) -> &QuadField {
        &self.field
    }

    pub fn group(&self) -> &FinAbGroup {
        &self.group
    }

    pub fn order(&self) -> i64 {
        self.group.order()
    }

    /// `prod N(P)^(k-1) (N(P) - 1)` over the prime power factors.
    pub fn expected_order(&self) -> i64 {
        self.locals.iter().map(|l| l.order() as i64).product()
    }

    /// Canonical coordinates of a unit residue.
    pub fn dlog(&self, x: QuadInt) -> Result<Vec<i64>> {
        if !self.field.is_unit_mod(x, self.m) {
            return Err(Error::NonUnit(self.m));
        }
        let mut e = vec![];
        for l in &self.locals {
            e.extend(l.dlog(&self.field, x)?);
        }
        Ok(self.group.reduce(&e))
    }

    /// A residue with the given canonical coordinates.
    pub fn element(&self, c: &[i64]) -> QuadInt {
        let e = self.group.lift(c);
        let k = &self.field;
        let mut out = k.reduce_mod(QuadInt::one(), self.m);
        let mut off = 0;
        for (l, idem) in self.locals.iter().zip(&self.idempotents) {
            let r = l.group.rank();
            let gen_exps = l.group.lift(&e[off..off + r]);
            off += r;
            // Local element from presentation exponents.
            let mut local = l.pk.reduce(QuadInt::one());
            let mut gens = vec![l.omega];
            for lv in &l.levels {
                gens.extend(lv.gens);
            }
            for (g, &x) in gens.iter().zip(&gen_exps) {
                local = mul_mod_ideal(k, &l.pk, local, l.pow_signed(k, *g, x));
            }
            // CRT: local * e_i + (1 - e_i).
            let lifted = k.add(k.mul_mod(local, *idem, self.m), k.sub(QuadInt::one(), *idem));
            out = k.mul_mod(out, k.reduce_mod(lifted, self.m), self.m);
        }
        out
    }

    /// All unit residues, by brute force over `Z_K / m`.
    pub fn enumerate(&self) -> Vec<QuadInt> {
        let m = self.m;
        (0..m)
            .flat_map(|y| (0..m).map(move |x| QuadInt::new(x, y)))
            .filter(|&u| self.field.is_unit_mod(u, m))
            .collect()
    }

    /// Canonical coordinates of the roots of unity of `K`.
    pub fn unit_image(&self) -> Result<Vec<i64>> {
        self.dlog(self.field.unit_generator())
    }

    /// Generators of the kernel of reduction to `(Z_K / n)^*`, `n | m`.
    pub fn reduction_kernel(&self, n: i64) -> Result<Vec<Vec<i64>>> {
        if n < 1 || self.m % n != 0 {
            return Err(Error::InvalidInput(format!("{n} does not divide {}", self.m)));
        }
        let r = self.m / n;
        let mut gens: Vec<Vec<i64>> = vec![];
        let target = self.order() / ResidueUnits::new(self.field, n)?.order();
        if target == 1 {
            return Ok(gens);
        }
        for y in 0..r {
            for x in 0..r {
                let u = QuadInt::new(1 + n * x, n * y);
                if !self.field.is_unit_mod(u, self.m) {
                    continue;
                }
                let c = self.dlog(u)?;
                if !self.group.subgroup_contains(&gens, &c)? {
                    gens.push(c);
                    if self.group.subgroup_order(&gens)? == target {
                        return Ok(gens);
                    }
                }
            }
        }
        Ok(gens)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(d: i64, m: i64) {
        let k = QuadField::from_disc(d).unwrap();
        let u = ResidueUnits::new(k, m).unwrap();
        let all = u.enumerate();
        assert_eq!(u.order(), all.len() as i64, "D={d} m={m}");
        assert_eq!(u.order(), u.expected_order());
        // Homomorphism and bijectivity.
        let mut seen = std::collections::HashSet::new();
        for &x in &all {
            let cx = u.dlog(x).unwrap();
            assert_eq!(u.element(&cx), x, "D={d} m={m} x={x}");
            seen.insert(cx.clone());
            let y = all[(x.x * 7 + x.y * 3) as usize % all.len()];
            let cy = u.dlog(y).unwrap();
            assert_eq!(u.dlog(k.mul_mod(x, y, m)).unwrap(), u.group().add(&cx, &cy));
        }
        assert_eq!(seen.len(), all.len());
    }

    #[test]
    fn small_moduli() {
        for d in [-3, -4, -7, -8, -15, -20, -23] {
            for m in 1..=12 {
                check(d, m);
            }
        }
        check(-4, 16);
        check(-3, 27);
        check(-7, 32);
    }

    #[test]
    fn gaussian_mod_three_is_cyclic_of_order_eight() {
        let u = ResidueUnits::new(QuadField::from_disc(-4).unwrap(), 3).unwrap();
        assert_eq!(u.group().invariants(), &[8]);
        let u = ResidueUnits::new(QuadField::from_disc(-7).unwrap(), 2).unwrap();
        assert_eq!(u.order(), 1);
    }
}
