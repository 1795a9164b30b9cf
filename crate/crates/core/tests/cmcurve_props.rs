use std::time::Instant;

use ccf::cmcurve::{
    cm_model, division_poly, division_poly_int, division_poly_shape, field_tau, quad_to_complex, torsion_x_values,
    weber_value, weber_value_on_lattice, CoeffRing, DivisionPolys, Zab,
};
use ccf::numerics::{BigComplex, ComplexPoly, PrecisionCtx, Real};
use ccf::rayclass::{QuadField, QuadInt};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

fn mul(x: &[Zab], y: &[Zab]) -> Vec<Zab> {
    let mut out = vec![Zab::default(); x.len() + y.len() - 1];
    for (i, a) in x.iter().enumerate() {
        for (j, b) in y.iter().enumerate() {
            out[i + j] = out[i + j].add(&a.mul(b));
        }
    }
    out
}

#[test]
fn psi5_direct_expansion() {
    // psi_5 = psi_4 psi_2^3 - psi_3^3 psi_1 with psi_4 psi_2^3 = (2y)^4 T_4 = F^2 T_4.
    let t3 = division_poly(3).unwrap().coeffs;
    let t4 = division_poly(4).unwrap().coeffs;
    let four = Zab::from_i64(4);
    let f = vec![Zab::b().mul(&four), Zab::a().mul(&four), Zab::default(), four];
    let lhs = mul(&mul(&f, &f), &t4);
    let rhs = mul(&mul(&t3, &t3), &t3);
    let mut direct: Vec<Zab> = (0..lhs.len().max(rhs.len()))
        .map(|i| {
            let z = Zab::default();
            lhs.get(i).unwrap_or(&z).sub(rhs.get(i).unwrap_or(&z))
        })
        .collect();
    while direct.last().is_some_and(|c| c.is_nil()) {
        direct.pop();
    }
    let t5 = division_poly(5).unwrap();
    assert_eq!(t5.coeffs, direct);
    assert_eq!(t5.degree(), 12);
    assert_eq!(t5.leading(), Some(BigInt::from(5)));
}

#[test]
fn shapes_up_to_forty() {
    let start = Instant::now();
    for m in 1..=40u32 {
        let t = division_poly_int(m, -2, 3);
        let (deg, lead) = division_poly_shape(m);
        assert_eq!(t.len() - 1, deg, "m={m}");
        assert_eq!(t.last().unwrap(), &BigInt::from(lead), "m={m}");
    }
    eprintln!("T_1..T_40 specialised in {:?}", start.elapsed());
}

fn rel_err(a: &BigComplex, b: &BigComplex) -> f64 {
    (a - b).log2_abs() - b.log2_abs()
}

#[test]
fn weber_scaling_and_parity() {
    let ctx = PrecisionCtx::new(160).unwrap();
    let p = 200;
    let tol = (1e-25f64).log2();
    for d in [-7, -4, -3, -8, -11] {
        let model = cm_model(d, ctx).unwrap();
        let k = QuadField::from_disc(d).unwrap();
        let w = field_tau(&k, p);
        let z = quad_to_complex(&k, QuadInt::new(1, 2), p).scale(&Real::from_ratio(1, 5, p));
        let base = weber_value(&model, &z, ctx).unwrap();
        for lambda in [BigComplex::from_int(2, p), BigComplex::from_f64(0.75, -1.25, p)] {
            let scaled = weber_value_on_lattice(d, &(&w * &lambda), &lambda, &(&z * &lambda), ctx).unwrap();
            assert!(rel_err(&scaled, &base) < tol, "D={d}");
        }
        let neg = weber_value(&model, &-&z, ctx).unwrap();
        assert!(rel_err(&neg, &base) < tol, "D={d}");
    }
}

fn eval_int_poly(cs: &[BigInt], x: &BigComplex) -> (BigComplex, f64) {
    let p = x.prec();
    let v = cs.iter().rev().fold(BigComplex::zero(p), |acc, c| &(&acc * x) + &BigComplex::from_bigint(c, p));
    let size = cs
        .iter()
        .enumerate()
        .map(|(i, c)| if c.is_zero() { f64::NEG_INFINITY } else { c.bits() as f64 + i as f64 * x.log2_abs() })
        .fold(0.0, f64::max);
    (v, size)
}

#[test]
fn torsion_values_on_integral_models() {
    // D = -7: the model scales to y^2 = 4(x^3 - 3500x + 98000) via x -> 16^2 x.
    let ctx = PrecisionCtx::new(192).unwrap();
    let model = cm_model(-7, ctx).unwrap();
    let (a, b) = model.integral_model().unwrap();
    let u2 = model.integral_scale().unwrap().pow(2);
    for m in [3u32, 5] {
        let xs = torsion_x_values(&model, m, ctx).unwrap();
        assert_eq!(xs.len(), division_poly_shape(m).0);
        let t = division_poly_int(m, a.clone().try_into().unwrap(), b.clone().try_into().unwrap());
        for x in &xs {
            let (v, size) = eval_int_poly(&t, &x.scale(&Real::from_bigint(&u2, 192)));
            assert!(v.log2_abs() - size < -96.0, "m={m}");
        }
    }
    // m = 2 gives the roots of the cubic.
    let xs = torsion_x_values(&model, 2, ctx).unwrap();
    assert_eq!(xs.len(), 3);
    for x in &xs {
        let w = &(&(&x.square() * x) + &(&model.a * x)) + &model.b;
        assert!(w.log2_abs() < -150.0);
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rat_complex(r: &BigRational, p: u32) -> BigComplex {
    BigComplex::from_real(&Real::from_bigint(r.numer(), p) / &Real::from_bigint(r.denom(), p))
}

fn eval_rat(cs: &[BigRational], x: &BigComplex) -> (BigComplex, f64) {
    let p = x.prec();
    let v = cs.iter().rev().fold(BigComplex::zero(p), |acc, c| &(&acc * x) + &rat_complex(c, p));
    let size = cs
        .iter()
        .enumerate()
        .map(|(i, c)| if c.is_zero() { f64::NEG_INFINITY } else { rat_complex(c, 64).log2_abs() + i as f64 * x.log2_abs() })
        .fold(0.0, f64::max);
    (v, size)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// Doubling a root of T_m lands on a root of T_m (odd m) or of F T_m (even m).
    #[test]
    fn doubling_respects_division_polys(an in -5i64..=5, ad in 1i64..=3, bn in -5i64..=5, bd in 1i64..=3, m in 3u32..=8) {
        let (a, b) = (rat(an, ad), rat(bn, bd));
        let disc = rat(4, 1) * &a * &a * &a + rat(27, 1) * &b * &b;
        prop_assume!(!disc.is_zero());
        let p = 256;
        let ctx = PrecisionCtx::new(p).unwrap();
        let mut dp = DivisionPolys::new(a.clone(), b.clone());
        let t = dp.t(m);
        let cp = ComplexPoly::new(t.iter().map(|c| rat_complex(c, p)).collect());
        let roots = cp.roots(ctx).unwrap();
        prop_assert_eq!(roots.len(), division_poly_shape(m).0);
        for (i, x) in roots.iter().enumerate() {
            let (v, size) = eval_rat(&t, x);
            prop_assert!(v.log2_abs() - size < -150.0);
            for y in &roots[..i] {
                prop_assert!((x - y).log2_abs() > -60.0, "repeated root");
            }
        }
        let f = vec![&b * rat(4, 1), &a * rat(4, 1), rat(0, 1), rat(4, 1)];
        let (ac, bc) = (rat_complex(&a, p), rat_complex(&b, p));
        for x in &roots {
            let x2 = x.square();
            let num = &(&x2 - &ac).square() - (&bc * x).scale(&Real::from_int(8, p));
            let den = (&(&(&x2 * x) + &(&ac * x)) + &bc).scale(&Real::from_int(4, p));
            let dx = &num / &den;
            let (v, size) = eval_rat(&t, &dx);
            let mut rel = v.log2_abs() - size;
            if m % 2 == 0 {
                let (fv, fsize) = eval_rat(&f, &dx);
                rel += fv.log2_abs() - fsize;
            }
            prop_assert!(rel < -100.0, "m={} rel={}", m, rel);
        }
    }
}
