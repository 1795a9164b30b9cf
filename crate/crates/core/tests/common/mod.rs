//! Independent brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use ccf::rayclass::{Ideal, QuadField, QuadInt};

/// Fundamental discriminants `-bound <= D < 0`.
pub fn fundamental_discs(bound: i64) -> Vec<i64> {
    (1..=bound)
        .map(|x| -x)
        .filter(|&d| ccf::quadforms::Discriminant::new(d).map(|d| d.is_fundamental()).unwrap_or(false))
        .collect()
}

/// All ideals of norm at most `max_norm`, by scanning HNF lattices.
pub fn ideals_up_to(k: &QuadField, max_norm: i64) -> Vec<Ideal> {
    let mut out = vec![];
    for c in 1..=max_norm {
        for a in (c..=max_norm / c).step_by(c as usize) {
            for b in (0..a).step_by(c as usize) {
                let i = Ideal { a, b, c };
                // Closed under multiplication by w.
                let w = QuadInt::new(0, 1);
                if i.contains(k.mul(QuadInt::rational(a), w)) && i.contains(k.mul(QuadInt::new(b, c), w)) {
                    out.push(i);
                }
            }
        }
    }
    out
}

/// Elements of `Z_K` of norm exactly `n`, by direct search.
pub fn elements_of_norm(k: &QuadField, n: i64) -> Vec<QuadInt> {
    let d = -k.d();
    let mut out = vec![];
    // 4N = (2x - By)^2 + |D| y^2
    let ymax = ((4 * n) as f64 / d as f64).sqrt() as i64 + 1;
    for y in -ymax..=ymax {
        let rest = 4 * n - d * y * y;
        if rest < 0 {
            continue;
        }
        let s = (rest as f64).sqrt().round() as i64;
        for t in [s, -s] {
            if t * t == rest && (t + k.b * y) % 2 == 0 {
                out.push(QuadInt::new((t + k.b * y) / 2, y));
            }
        }
    }
    out
}

/// Ray equivalence modulo `m`: `a conj(b) = (delta)` with `delta * eps = N(b) mod m`.
pub fn ray_equivalent(k: &QuadField, a: &Ideal, b: &Ideal, m: i64) -> bool {
    let prod = a.mul(k, &b.conj(k).unwrap()).unwrap();
    let nb = b.norm();
    let units = k.units();
    for delta in elements_of_norm(k, prod.norm()) {
        if !prod.contains(delta) {
            continue;
        }
        for &e in &units {
            let x = k.mul(delta, e);
            if (x.x - nb).rem_euclid(m) == 0 && x.y.rem_euclid(m) == 0 {
                return true;
            }
        }
        // All generators differ by units, so one check suffices.
        return false;
    }
    false
}

/// Brute-force ray class group: representatives and the sorted multiset of
/// element orders, which determines a finite abelian group up to isomorphism.
pub struct BruteRayClass {
    pub reps: Vec<Ideal>,
    pub ideals: Vec<(Ideal, usize)>,
    pub order_stats: Vec<i64>,
}

pub fn brute_ray_class(d: i64, m: i64, max_norm: i64) -> BruteRayClass {
    let k = QuadField::from_disc(d).unwrap();
    let mut reps: Vec<Ideal> = vec![];
    let mut ideals = vec![];
    for i in ideals_up_to(&k, max_norm) {
        if ccf::arith::gcd(i.norm(), m) != 1 {
            continue;
        }
        let idx = match reps.iter().position(|r| ray_equivalent(&k, &i, r, m)) {
            Some(j) => j,
            None => {
                reps.push(i);
                reps.len() - 1
            }
        };
        ideals.push((i, idx));
    }
    let class_of = |i: &Ideal| reps.iter().position(|r| ray_equivalent(&k, i, r, m)).expect("class represented");
    let one = class_of(&Ideal::unit());
    let mut order_stats: Vec<i64> = reps
        .iter()
        .map(|r| {
            let mut cur = class_of(r);
            let mut n = 1;
            while cur != one {
                cur = class_of(&reps[cur].mul(&k, r).unwrap());
                n += 1;
            }
            n
        })
        .collect();
    order_stats.sort_unstable();
    BruteRayClass { reps, ideals, order_stats }
}

/// Sorted element orders of `Z/d1 x Z/d2 x ...`.
pub fn order_stats_of(invariants: &[i64]) -> Vec<i64> {
    let mut elems: Vec<i64> = vec![1];
    for &d in invariants {
        let mut next = vec![];
        for &o in &elems {
            for x in 0..d {
                let ox = d / ccf::arith::gcd(x, d);
                next.push(ccf::arith::lcm(o, ox));
            }
        }
        elems = next;
    }
    elems.sort_unstable();
    elems
}

/// `g tau` for an integer matrix `g`.
pub fn mobius(g: [[i64; 2]; 2], tau: &ccf::numerics::BigComplex) -> ccf::numerics::BigComplex {
    use ccf::numerics::BigComplex;
    let p = tau.prec();
    let c = |v: i64| BigComplex::from_int(v, p);
    let num = &(tau * &c(g[0][0])) + &c(g[0][1]);
    let den = &(tau * &c(g[1][0])) + &c(g[1][1]);
    &num / &den
}

/// `f2^M (tau)` computed without the transformation tables: `f2^M = (sigma_k f2) o W'`
/// with `W' = diag(1, 1/k) M` lifted to `SL2(Z)` and
/// `sigma_k f2 = (zeta_8^k + zeta_8^-k) eta(2 tau)/eta(tau)` evaluated by q-series.
pub fn oracle_f2(
    m: &ccf::shimura::GL2ModM,
    tau: &ccf::numerics::BigComplex,
    ctx: ccf::numerics::PrecisionCtx,
) -> ccf::numerics::BigComplex {
    use ccf::numerics::BigComplex;
    use ccf::shimura::{lift_sl2, GL2ModM};
    let p = ctx.bits();
    let k = m.det();
    let kinv = ccf::arith::mod_inv(k, 48).unwrap();
    let w = GL2ModM::new([[1, 0], [0, kinv]], 48).unwrap().mul(m).unwrap();
    let g = lift_sl2(&w).unwrap();
    assert_eq!(g[0][0] * g[1][1] - g[0][1] * g[1][0], 1);
    assert_eq!(GL2ModM::new(g, 48).unwrap(), w);
    let z = mobius(g, tau);
    let root2 = &BigComplex::root_of_unity(k, 8, p) + &BigComplex::root_of_unity(-k, 8, p);
    let q = &ccf::modfunc::eta(&z.mul_pow2(1), ctx).unwrap() / &ccf::modfunc::eta(&z, ctx).unwrap();
    &root2 * &q
}

/// Order of `(Z_K/m)^*/Z_K^*` recovered from the closure of the `g_tau` images.
pub fn g_tau_quotient_order(d: i64, m: i64) -> (i64, i64) {
    use ccf::shimura::{g_tau_of, generated_order, unit_quotient_generators, GL2ModM};
    let k = QuadField::from_disc(d).unwrap();
    let (gens, q) = unit_quotient_generators(&k, m).unwrap();
    let units: Vec<GL2ModM> = k.units().into_iter().map(|u| g_tau_of(&k, u, m).unwrap()).collect();
    let mut all: Vec<GL2ModM> = gens.iter().map(|&x| g_tau_of(&k, x, m).unwrap()).collect();
    all.extend(units.iter().copied());
    let full = generated_order(&all, m).unwrap() as i64;
    let unit_part = generated_order(&units, m).unwrap() as i64;
    (full / unit_part, q)
}
