mod common;

use ccf::quadforms::{class_group, Discriminant};
use ccf::rayclass::{ray_class_group, residue_units, QuadField};
use common::{brute_ray_class, fundamental_discs, order_stats_of};

#[test]
fn exact_sequence_order_identity() {
    for d in fundamental_discs(40) {
        let h = class_group(Discriminant::new(d).unwrap()).unwrap().order() as i64;
        for m in 1..=6 {
            let r = ray_class_group(d, m).unwrap();
            let u = r.residue_units();
            assert_eq!(u.order(), u.enumerate().len() as i64);
            assert_eq!(r.order() * r.unit_image_order(), h * u.order(), "D={d} m={m}");
        }
    }
}

#[test]
fn brute_force_invariant_factors() {
    for d in fundamental_discs(40) {
        let k = QuadField::from_disc(d).unwrap();
        for m in 1..=6 {
            let r = ray_class_group(d, m).unwrap();
            let brute = brute_ray_class(d, m, 200);
            assert_eq!(brute.reps.len() as i64, r.order(), "D={d} m={m}");
            assert_eq!(brute.order_stats, order_stats_of(r.group().invariants()), "D={d} m={m}");
            // The class map agrees with brute-force equivalence and is multiplicative.
            let classes: Vec<Vec<i64>> = brute.reps.iter().map(|i| r.class_of_ideal(i).unwrap()).collect();
            for (i, idx) in brute.ideals.iter().take(60) {
                assert_eq!(r.class_of_ideal(i).unwrap(), classes[*idx], "D={d} m={m} ideal {i}");
            }
            for a in brute.reps.iter().take(8) {
                for b in brute.reps.iter().take(8) {
                    let ab = a.mul(&k, b).unwrap();
                    let lhs = r.class_of_ideal(&ab).unwrap();
                    let rhs = r.group().add(&r.class_of_ideal(a).unwrap(), &r.class_of_ideal(b).unwrap());
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }
}

#[test]
fn residue_unit_examples() {
    assert_eq!(residue_units(-4, 3).unwrap().group().invariants(), &[8]);
    assert_eq!(residue_units(-7, 2).unwrap().order(), 1);
    assert_eq!(residue_units(-23, 1).unwrap().order(), 1);
    assert_eq!(ray_class_group(-4, 5).unwrap().order(), 4);
}
