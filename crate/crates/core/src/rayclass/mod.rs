//! Ray class groups `Cl_m` of imaginary quadratic fields for moduli `m Z_K`,
//! computed through the exact sequence
//! `Z_K^* -> (Z_K/m)^* -> Cl_m -> Cl_K -> 0`.

mod field;
mod group;
mod units;

use rayon::prelude::*;

pub use field::{coprime_split, Ideal, QuadField, QuadInt};
pub use group::FinAbGroup;
pub use units::ResidueUnits;

use crate::arith::{divisors, factor, gcd, valuation};
use crate::error::{Error, Result};
use crate::quadforms::{class_group, ClassGroup, QuadForm};

/// Ray class group of modulus `m Z_K`.
///
/// Presentation generators are the canonical generators of `(Z_K/m)^*`
/// followed by the generators of `Cl_K`, each represented by an ideal of
/// norm prime to `m`.
#[derive(Clone, Debug)]
pub struct RayClassGroup {
    field: QuadField,
    m: i64,
    units: ResidueUnits,
    class_group: ClassGroup,
    gen_ideals: Vec<Ideal>,
    unit_image: Vec<i64>,
    group: FinAbGroup,
}

/// An ideal in the class of `f` with norm prime to `m`, from a form
/// `f(p, r)` with `gcd(p, r) = 1`.
pub fn ideal_coprime_to(k: &QuadField, f: QuadForm, m: i64) -> Result<Ideal> {
    let bound = 4 * m.max(2) + 20;
    for p in 0..bound {
        for r in -bound..bound {
            if gcd(p, r) != 1 {
                continue;
            }
            let n = f.eval(p, r);
            if gcd(n, m) != 1 {
                continue;
            }
            // Complete (p, r) to gamma in SL2(Z); f o gamma has leading coefficient n.
            let (_, s, q) = crate::arith::ext_gcd(p, r);
            let gamma = [[p, -q], [r, s]];
            let g = f.transform(gamma);
            debug_assert_eq!(g.a, n);
            return k.ideal_of_form(g);
        }
    }
    Err(Error::Internal(format!("no representative of {f} prime to {m}")))
}

impl RayClassGroup {
    pub fn new(field: QuadField, m: i64) -> Result<Self> {
        let units = ResidueUnits::new(field, m)?;
        let cl = class_group(field.disc)?;
        let gen_ideals: Vec<Ideal> =
            cl.generators().iter().map(|&g| ideal_coprime_to(&field, g, m)).collect::<Result<_>>()?;
        let ku = units.group().rank();
        let kc = gen_ideals.len();
        let n = ku + kc;
        let mut relations = vec![];
        for (j, &d) in units.group().invariants().iter().enumerate() {
            let mut r = vec![0i64; n];
            r[j] = d;
            relations.push(r);
        }
        let unit_image = units.unit_image()?;
        let mut r = unit_image.clone();
        r.resize(n, 0);
        relations.push(r);
        let mut rcg = RayClassGroup {
            field,
            m,
            units,
            class_group: cl,
            gen_ideals,
            unit_image,
            group: FinAbGroup::trivial(),
        };
        for rel in rcg.class_group.group().relations().to_vec() {
            // P conj(Q) = (alpha) with rel = pos - neg.
            let pos: Vec<i64> = rel.iter().map(|&x| x.max(0)).collect();
            let neg: Vec<i64> = rel.iter().map(|&x| (-x).max(0)).collect();
            let p = rcg.gen_power(&pos)?;
            let q = rcg.gen_power(&neg)?;
            let prod = p.mul(&field, &q.conj(&field)?)?;
            let alpha = field
                .principal_generator(&prod)
                .ok_or_else(|| Error::Internal("class group relation is not principal".into()))?;
            let ua = rcg.units.dlog(alpha)?;
            let un = rcg.units.dlog(QuadInt::rational(q.norm()))?;
            let diff = rcg.units.group().add(&ua, &rcg.units.group().neg(&un));
            let mut row: Vec<i64> = diff.iter().map(|x| -x).collect();
            row.extend(rel.iter());
            relations.push(row);
        }
        let mut labels: Vec<String> = (0..ku).map(|j| format!("u{j}")).collect();
        labels.extend(rcg.gen_ideals.iter().map(|i| format!("{i}")));
        rcg.group = FinAbGroup::from_relations(labels, relations)?;
        Ok(rcg)
    }

    fn gen_power(&self, e: &[i64]) -> Result<Ideal> {
        let mut out = Ideal::unit();
        for (g, &x) in self.gen_ideals.iter().zip(e) {
            out = out.mul(&self.field, &g.pow(&self.field, x as u32)?)?;
        }
        Ok(out)
    }

    pub fn field(&self) -> &QuadField {
        &self.field
    }

    pub fn modulus(&self) -> i64 {
        self.m
    }

    pub fn group(&self) -> &FinAbGroup {
        &self.group
    }

    pub fn order(&self) -> i64 {
        self.group.order()
    }

    pub fn residue_units(&self) -> &ResidueUnits {
        &self.units
    }

    pub fn class_group(&self) -> &ClassGroup {
        &self.class_group
    }

    /// Order of the image of the roots of unity in `(Z_K/m)^*`.
    pub fn unit_image_order(&self) -> i64 {
        self.units.group().element_order(&self.unit_image)
    }

    /// Class of the principal ideal `(alpha)`, `alpha` prime to `m`.
    pub fn class_of_element(&self, alpha: QuadInt) -> Result<Vec<i64>> {
        let u = self.units.dlog(alpha)?;
        Ok(self.combine_parts(&u, &vec![0; self.gen_ideals.len()]))
    }

    fn combine_parts(&self, unit: &[i64], cl: &[i64]) -> Vec<i64> {
        let mut e = unit.to_vec();
        e.extend(cl);
        self.group.reduce(&e)
    }

    /// Class of an ideal with norm prime to `m`.
    pub fn class_of_ideal(&self, i: &Ideal) -> Result<Vec<i64>> {
        if !i.is_coprime_to(self.m) {
            return Err(Error::InvalidInput(format!("ideal {i} is not coprime to {}", self.m)));
        }
        let k = &self.field;
        let (content, prim) = i.content();
        let form = k.form_of_ideal(&prim)?;
        let v = self.class_group.gen_exponents(form)?;
        // Shift exponents to be non-negative using the orders in Cl_K.
        let orders = self.class_group_gen_orders();
        let v: Vec<i64> = v.iter().zip(&orders).map(|(x, o)| x.rem_euclid(*o)).collect();
        let g = self.gen_power(&v)?;
        let prod = prim.mul(k, &g.conj(k)?)?;
        let beta = k
            .principal_generator(&prod)
            .ok_or_else(|| Error::Internal("ideal class bookkeeping failed".into()))?;
        let ub = self.units.dlog(beta)?;
        let un = self.units.dlog(QuadInt::rational(g.norm()))?;
        let uc = self.units.dlog(QuadInt::rational(content))?;
        let ug = self.units.group();
        let u = ug.add(&ug.add(&ub, &ug.neg(&un)), &uc);
        Ok(self.combine_parts(&u, &v))
    }

    /// Orders in `Cl_K` of the presentation generators.
    fn class_group_gen_orders(&self) -> Vec<i64> {
        let cg = self.class_group.group();
        (0..self.gen_ideals.len())
            .map(|j| {
                let mut e = vec![0; self.gen_ideals.len()];
                e[j] = 1;
                cg.element_order(&cg.reduce(&e))
            })
            .collect()
    }

    /// Image of `(Z_K/m)^*` coordinates in `Cl_m`.
    pub fn map_residue(&self, unit: &[i64]) -> Vec<i64> {
        self.combine_parts(unit, &vec![0; self.gen_ideals.len()])
    }

    /// Generators (in `Cl_m`) of the kernel of `Cl_m -> Cl_n`, for `n | m`.
    pub fn kernel_to(&self, n: i64) -> Result<Vec<Vec<i64>>> {
        Ok(self.units.reduction_kernel(n)?.iter().map(|u| self.map_residue(u)).collect())
    }
}

/// `Cl_m` for the field of fundamental discriminant `d`.
pub fn ray_class_group(d: i64, m: i64) -> Result<RayClassGroup> {
    RayClassGroup::new(QuadField::from_disc(d)?, m)
}

/// `(Z_K / m)^*` for the field of fundamental discriminant `d`.
pub fn residue_units(d: i64, m: i64) -> Result<ResidueUnits> {
    ResidueUnits::new(QuadField::from_disc(d)?, m)
}

/// Smallest `n | m` such that the subgroup generated by `subgroup` (in
/// canonical coordinates of `Cl_m`) contains the kernel of `Cl_m -> Cl_n`.
///
/// When 2 splits, `(Z_K/2)^*` is trivial, so nothing is lost by dropping
/// the factor 2 from the modulus:
///
/// ```
/// use ccf::rayclass::{conductor_of, ray_class_group};
/// let cl6 = ray_class_group(-7, 6).unwrap();
/// assert_eq!(conductor_of(&cl6, &[]).unwrap(), 3);
/// ```
pub fn conductor_of(rcg: &RayClassGroup, subgroup: &[Vec<i64>]) -> Result<i64> {
    let g = rcg.group();
    for n in divisors(rcg.modulus()) {
        let kernel = rcg.kernel_to(n)?;
        let mut inside = true;
        for x in &kernel {
            if !g.subgroup_contains(subgroup, x)? {
                inside = false;
                break;
            }
        }
        if inside {
            return Ok(n);
        }
    }
    Ok(rcg.modulus())
}

/// Relative discriminant of the class field of `subgroup` as exponents of
/// the rational primes dividing `m`: the product of the conductors of all
/// characters of `Cl_m / subgroup`.
pub fn discriminant_by_characters(rcg: &RayClassGroup, subgroup: &[Vec<i64>]) -> Result<Vec<(i64, u32)>> {
    let g = rcg.group();
    let q = g.quotient(subgroup)?;
    let inv = q.invariants().to_vec();
    let exponent = inv.iter().copied().fold(1, crate::arith::lcm);
    let elements = q.elements();
    let chars = q.elements();
    let conductors: Vec<i64> = chars
        .par_iter()
        .map(|chi| {
            let mut gens = subgroup.to_vec();
            for x in &elements {
                let s: i64 = chi.iter().zip(x).zip(&inv).map(|((c, xi), d)| c * xi * (exponent / d)).sum();
                if s.rem_euclid(exponent) == 0 {
                    gens.push(g.normalize(&q.lift(x)));
                }
            }
            conductor_of(rcg, &gens)
        })
        .collect::<Result<_>>()?;
    let mut out = vec![];
    for (p, _) in factor(rcg.modulus()) {
        let e: u32 = conductors.iter().filter(|&&f| f % p == 0).map(|&f| valuation(f, p)).sum();
        out.push((p, e));
    }
    Ok(out)
}

/// `floor(e_abs (1/(p-1) + ord_p(e_ext))) + 1`: bound on the conductor exponent
/// at a prime of absolute ramification index `e_abs` above `p` in an abelian
/// extension with local ramification index `e_ext`.
pub fn conductor_exponent_bound(e_abs: u32, p: u32, e_ext: u32) -> Result<u32> {
    if e_abs == 0 || e_ext == 0 || !crate::arith::is_prime(p as i64) {
        return Err(Error::InvalidInput("conductor bound needs positive inputs and a prime p".into()));
    }
    let ord = valuation(e_ext as i64, p as i64);
    Ok(e_abs / (p - 1) + e_abs * ord + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_mod_five() {
        let r = ray_class_group(-4, 5).unwrap();
        assert_eq!(r.order(), 4);
        assert_eq!(conductor_of(&r, &[]).unwrap(), 5);
        let full: Vec<Vec<i64>> = (0..r.group().rank())
            .map(|j| (0..r.group().rank()).map(|i| i64::from(i == j)).collect())
            .collect();
        assert_eq!(conductor_of(&r, &full).unwrap(), 1);
        assert_eq!(discriminant_by_characters(&r, &[]).unwrap(), vec![(5, 3)]);
        assert_eq!(discriminant_by_characters(&r, &full).unwrap(), vec![(5, 0)]);
    }

    #[test]
    fn trivial_modulus_gives_class_group() {
        for d in [-3, -4, -23, -71, -84] {
            let r = ray_class_group(d, 1).unwrap();
            let c = class_group(crate::quadforms::Discriminant::new(d).unwrap()).unwrap();
            assert!(r.group().is_isomorphic(c.group()));
        }
    }

    #[test]
    fn bound_examples() {
        assert_eq!(conductor_exponent_bound(1, 7, 3).unwrap(), 1);
        assert_eq!(conductor_exponent_bound(2, 2, 2).unwrap(), 5);
        assert_eq!(conductor_exponent_bound(1, 3, 3).unwrap(), 2);
    }
}
