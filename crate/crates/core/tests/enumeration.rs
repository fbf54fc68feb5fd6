use num_bigint::BigInt;
use num_traits::{One, Zero};

use tropcount::curve::{balancing_check, stability_check};
use tropcount::enumeration::plane::attempt_seed;
use tropcount::enumeration::{
    enumerate_plane_curves, enumerate_tropical_covers, hurwitz_factorization_oracle, severi_degree, wdvv_oracle,
    PointConfiguration,
};
use tropcount::pipeline::{hurwitz_via_pipeline, severi_via_pipeline};
use tropcount::rational::{q, q_frac};

#[test]
fn oracle_values() {
    let expected = [1, 1, 12, 620, 87304];
    for (d, n) in (1..=5).zip(expected) {
        assert_eq!(wdvv_oracle(d), BigInt::from(n));
    }
    assert_eq!(hurwitz_factorization_oracle(2, 0), q_frac(1, 2));
    assert_eq!(hurwitz_factorization_oracle(3, 0), q(4));
    assert_eq!(hurwitz_factorization_oracle(2, 2), q_frac(1, 2));
    assert_eq!(hurwitz_factorization_oracle(1, 0), q(1));
}

#[test]
fn severi_small_degrees() {
    for d in 1..=3 {
        assert_eq!(severi_degree(d, 0, 7).unwrap(), wdvv_oracle(d));
        assert_eq!(severi_via_pipeline(d, 0, 7).unwrap(), wdvv_oracle(d));
    }
    assert!(severi_degree(2, 1, 0).unwrap().is_zero());
}

#[test]
fn severi_is_seed_independent() {
    for d in 1..=3 {
        let totals: Vec<BigInt> = (11..16).map(|s| severi_degree(d, 0, s).unwrap()).collect();
        assert!(totals.iter().all(|t| t == &totals[0]), "{d}: {totals:?}");
    }
}

#[test]
fn solutions_are_valid() {
    for d in 1..=3u32 {
        let n = (3 * d - 1) as usize;
        let config = PointConfiguration::random(n, 2, attempt_seed(3, 0));
        let result = enumerate_plane_curves(d, 0, &config).unwrap();
        for s in &result.solutions {
            assert!(balancing_check(&s.map).balanced);
            assert!(stability_check(s.map.combinatorial_type()).unwrap().stable);
            assert!(s.map.edge_residuals().iter().flatten().all(Zero::is_zero));
            assert_eq!(s.map.combinatorial_type().genus(), 0);
            for (i, p) in config.points.iter().enumerate() {
                assert_eq!(s.map.marking_position(3 * d as usize + 1 + i).unwrap(), &p[..]);
            }
        }
    }
}

#[test]
fn hurwitz_matches_oracle() {
    for d in 1..=4 {
        for g in 0..=2 {
            assert_eq!(
                hurwitz_via_pipeline(d, g).unwrap(),
                hurwitz_factorization_oracle(d, g),
                "({d},{g})"
            );
        }
    }
    assert!(enumerate_tropical_covers(1, 0).unwrap().total.is_one());
}

#[test]
#[ignore = "takes several minutes"]
fn one_cubic_through_nine_points() {
    assert!(severi_degree(3, 1, 0).unwrap().is_one());
}

#[test]
#[ignore = "takes several minutes"]
fn quartics() {
    assert_eq!(severi_degree(4, 0, 0).unwrap(), BigInt::from(620));
}
