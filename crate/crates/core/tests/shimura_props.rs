mod common;

use ccf::arith::gcd;
use ccf::hilbert::hilbert_class_poly;
use ccf::numerics::{BigComplex, IntPoly, PrecisionCtx, Real, RetryPolicy};
use ccf::quadforms::Discriminant;
use ccf::rayclass::{QuadField, QuadInt, ResidueUnits};

use ccf::shimura::{
    class_invariant_poly, congruent_discriminants, decompose, find_modification, g_tau_of,
    is_class_invariant, weber_f2_reduction_factor, FunctionSymbol, GL2ModM,
    InvariantPoly, Multiplier, Step, Weber,
};
use common::{g_tau_quotient_order, mobius, oracle_f2};
use proptest::prelude::*;

fn weber_family() -> Vec<FunctionSymbol> {
    let mut out = vec![];
    for w in [Weber::F, Weber::F1, Weber::F2] {
        out.push(FunctionSymbol::weber(w));
        out.push(FunctionSymbol::weber(w).pow(3).with_multiplier(Multiplier::zeta(5, 48)));
    }
    out
}

/// The Weber transformation table agrees with the eta product engine on
/// every generator: S, T and diag(1, k) for all units k mod 48.
#[test]
fn weber_table_matches_eta_engine() {
    for f in weber_family() {
        let e = f.to_eta().unwrap();
        for step in [Step::S, Step::T(1), Step::T(-1), Step::T(7)] {
            let sym = f.act_step(step).unwrap().to_eta().unwrap();
            assert_eq!(sym, e.act_step(step).unwrap(), "{f} o {step}");
        }
        for k in (1..48).filter(|&k| gcd(k, 48) == 1) {
            let sym = f.act_diag(k).unwrap().to_eta().unwrap();
            assert_eq!(sym, e.act_diag(k).unwrap(), "sigma_{k}({f})");
        }
    }
}

#[test]
fn s_squared_and_t_order() {
    for f in weber_family() {
        let s2 = f.act_step(Step::S).unwrap().act_step(Step::S).unwrap();
        assert_eq!(s2, f);
        assert_eq!(f.act_step(Step::T(48)).unwrap(), f);
        let t24 = f.act_step(Step::T(24)).unwrap();
        assert_eq!(t24 == f, f.base == FunctionSymbol::weber(Weber::F2).base, "{f}");
    }
}

fn mat_strategy(m: i64) -> impl Strategy<Value = GL2ModM> {
    [0..m, 0..m, 0..m, 0..m]
        .prop_filter_map("singular", move |[a, b, c, d]| GL2ModM::new([[a, b], [c, d]], m).ok())
}

fn rel_err(a: &BigComplex, b: &BigComplex) -> f64 {
    (a - b).log2_abs() - b.log2_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(25))]

    #[test]
    fn act_matches_numeric_oracle(m in mat_strategy(48)) {
        let ctx = PrecisionCtx::new(128).unwrap();
        let tau = BigComplex::new(Real::from_int(0, 128), Real::from_int(2, 128));
        let f2 = FunctionSymbol::weber(Weber::F2);
        let sym = f2.act(&m).unwrap().eval(&tau, ctx).unwrap();
        let num = oracle_f2(&m, &tau, ctx);
        prop_assert!(rel_err(&sym, &num) < (1e-25f64).log2(), "M = {}: {} vs oracle", m, f2.act(&m).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn right_action(m1 in mat_strategy(48), m2 in mat_strategy(48), which in 0usize..6) {
        let f = &weber_family()[which];
        let lhs = f.act(&m1).unwrap().act(&m2).unwrap();
        let rhs = f.act(&m1.mul(&m2).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn right_action_eta_and_gamma(m1 in mat_strategy(72), m2 in mat_strategy(72)) {
        for f in [FunctionSymbol::eta_quotient(3, None).unwrap(), FunctionSymbol::gamma2(), FunctionSymbol::gamma3()] {
            let lhs = f.act(&m1).unwrap().act(&m2).unwrap();
            let rhs = f.act(&m1.mul(&m2).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn decompose_round_trip(m in mat_strategy(48)) {
        let dec = decompose(&m).unwrap();
        prop_assert_eq!(dec.reassemble(48).unwrap(), m);
        prop_assert!(dec.word.len() <= 4 * 48usize.ilog2() as usize + 4);
    }
}

/// `eta(3 tau)/eta(tau)` checked numerically at one matrix, through the
/// eta transformation engine.
#[test]
fn eta_quotient_oracle() {
    let ctx = PrecisionCtx::new(128).unwrap();
    let tau = BigComplex::from_f64(0.1, 1.3, 128);
    let f = FunctionSymbol::eta_quotient(3, None).unwrap();
    for e in [[[2, 1], [1, 1]], [[1, 0], [5, 1]], [[0, -1], [1, 0]], [[7, 3], [2, 1]]] {
        let m = GL2ModM::new(e, 72).unwrap();
        let sym = f.act(&m).unwrap().eval(&tau, ctx).unwrap();
        let direct = f.eval(&mobius(e, &tau), ctx).unwrap();
        assert!(rel_err(&sym, &direct) < -90.0, "{e:?}");
    }
}

fn field(d: i64) -> QuadField {
    QuadField::from_disc(d).unwrap()
}

fn norm_mod(k: &QuadField, x: QuadInt, m: i64) -> i64 {
    (k.norm(x).rem_euclid(m as i128)) as i64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn g_tau_laws(d in prop::sample::select(vec![-3i64, -4, -7, -8, -15, -23, -71, -88]),
                  m in 2i64..=30, x in (-40i64..40, -40i64..40), y in (-40i64..40, -40i64..40)) {
        let k = field(d);
        let (x, y) = (QuadInt::new(x.0, x.1), QuadInt::new(y.0, y.1));
        prop_assume!(k.is_unit_mod(x, m) && k.is_unit_mod(y, m));
        let gx = g_tau_of(&k, x, m).unwrap();
        let gy = g_tau_of(&k, y, m).unwrap();
        let gxy = g_tau_of(&k, k.mul(x, y), m).unwrap();
        prop_assert_eq!(gxy, gy.mul(&gx).unwrap());
        prop_assert_eq!((gx.det() * norm_mod(&k, x, m)).rem_euclid(m), 1 % m);
    }
}

/// The image of `(Z_K/m)^*` in `GL2(Z/m)` modulo the roots of unity has the
/// order of `(Z_K/m)^*/Z_K^*`.
#[test]
fn stabilizer_subgroup_orders() {
    let discs: Vec<i64> = (3..=100).map(|n| -n).filter(|&d| Discriminant::new(d).is_ok_and(|x| x.is_fundamental())).collect();
    for &d in &discs {
        let k = field(d);
        for m in 2..=48 {
            let (got, q) = g_tau_quotient_order(d, m);
            assert_eq!(got, q, "D={d} m={m}");
            assert_eq!(q * k.units().len() as i64 / unit_kernel(&k, m), ResidueUnits::new(k, m).unwrap().order(), "D={d} m={m}");
        }
    }
}

/// Number of roots of unity that reduce to 1 modulo `m`.
fn unit_kernel(k: &QuadField, m: i64) -> i64 {
    k.units().into_iter().filter(|&u| k.reduce_mod(u, m) == k.reduce_mod(QuadInt::one(), m)).count() as i64
}

#[test]
fn f2_modification_for_minus_71() {
    let (f, report) = find_modification(&FunctionSymbol::weber(Weber::F2), -71).unwrap().unwrap();
    assert!(report.invariant);
    assert_eq!(f.exponent, 1, "{f}");
    let cp = class_invariant_poly(&f, -71, &RetryPolicy::default()).unwrap();
    let poly = cp.poly.as_int().expect("rational coefficients").clone();
    assert_eq!(poly, IntPoly::from_i64(&[-1, 2, 1, -1, -1, -1, 1, 1]), "{f}: {poly:?}");
}

#[test]
fn j_invariant_poly_is_hilbert() {
    let pol = RetryPolicy::default();
    let cp = class_invariant_poly(&FunctionSymbol::j(), -71, &pol).unwrap();
    assert_eq!(cp.poly, InvariantPoly::Rational(hilbert_class_poly(-71, &pol).unwrap().poly));
}

#[test]
fn gamma2_for_minus_23() {
    let pol = RetryPolicy::default();
    // gamma2(w) = zeta3^-1 gamma2(w + 2) with 3 | B for the shifted generator.
    assert!(!is_class_invariant(&FunctionSymbol::gamma2(), -23).unwrap().invariant);
    let (g, _) = find_modification(&FunctionSymbol::gamma2(), -23).unwrap().unwrap();
    assert_eq!(g.to_string(), "zeta3*gamma2");
    let cp = class_invariant_poly(&g, -23, &pol).unwrap();
    let poly = cp.poly.as_int().unwrap();
    assert_eq!(poly.degree(), Some(3));
    let hil = hilbert_class_poly(-23, &pol).unwrap().poly;
    let ctx = PrecisionCtx::new(256).unwrap();
    let roots = poly.to_complex(ctx).roots(ctx).unwrap();
    for r in roots {
        let j = &r.square() * &r;
        let v = hil.eval_complex(&j);
        assert!(v.log2_abs() - 3.0 * j.log2_abs() < -150.0);
    }
}

#[test]
fn invariance_is_a_congruence_property() {
    let f2 = FunctionSymbol::weber(Weber::F2);
    let (f, _) = find_modification(&f2, -71).unwrap().unwrap();
    let pairs = congruent_discriminants(-71, 48, -400..-71);
    assert!(pairs.contains(&-263), "{pairs:?}");
    for d in [-71, -263] {
        assert!(is_class_invariant(&f, d).unwrap().invariant, "D={d}");
    }
    let (g, _) = find_modification(&FunctionSymbol::gamma2(), -23).unwrap().unwrap();
    let pairs = congruent_discriminants(-23, 3, -100..-23);
    assert!(pairs.contains(&-35), "{pairs:?}");
    for d in [-23, -35] {
        assert!(is_class_invariant(&g, d).unwrap().invariant, "D={d}");
    }
}

#[test]
fn f2_reduction_factor() {
    // (X^24 + 16)^3 - j X^24 has degree 72 in X and 1 in j.
    assert_eq!(weber_f2_reduction_factor(), 72);
    assert_eq!(24 * 3, 72);
}
