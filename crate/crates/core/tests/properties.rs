use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use tropcount::contact::ContactData;
use tropcount::fan::{Cone, Fan, StandardFan};
use tropcount::lattice::{kernel_basis, smith_normal_form, IntegerMatrix};
use tropcount::piecewise::PiecewisePolynomial;
use tropcount::rational::{q, Q};

fn matrix() -> impl Strategy<Value = IntegerMatrix> {
    (0usize..6, 0usize..6).prop_flat_map(|(m, n)| {
        prop::collection::vec(-30i64..=30, m * n)
            .prop_map(move |v| IntegerMatrix::new(m, n, v.into_iter().map(BigInt::from).collect()))
    })
}

fn fans() -> Vec<Fan> {
    vec![
        Fan::standard(&StandardFan::P1),
        Fan::standard(&StandardFan::P2),
        Fan::standard(&StandardFan::Product(
            Box::new(StandardFan::P1),
            Box::new(StandardFan::P1),
        )),
    ]
}

fn rational() -> impl Strategy<Value = Q> {
    (-500i64..=500, 1i64..=60).prop_map(|(n, d)| Q::new(BigInt::from(n), BigInt::from(d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn smith_form_is_a_valid_decomposition(a in matrix()) {
        let s = smith_normal_form(&a);
        prop_assert_eq!(s.u.mul(&a).mul(&s.v), s.d.clone());
        prop_assert!(s.u.determinant().abs().is_one());
        prop_assert!(s.v.determinant().abs().is_one());
        let diag = s.diagonal();
        for i in 0..s.d.rows() {
            for j in 0..s.d.cols() {
                if i != j {
                    prop_assert!(s.d.get(i, j).is_zero());
                }
            }
        }
        for w in diag.windows(2) {
            prop_assert!(!w[0].is_negative());
            if w[0].is_zero() {
                prop_assert!(w[1].is_zero());
            } else {
                prop_assert!((&w[1] % &w[0]).is_zero());
            }
        }
        prop_assert_eq!(s.rank(), a.rank());
    }

    #[test]
    fn kernel_vectors_are_killed(a in matrix()) {
        for k in kernel_basis(&a) {
            prop_assert!(a.mul_vec(&k).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn courant_functions_generate_linear_functions(x in rational(), y in rational()) {
        for fan in fans() {
            let v: Vec<Q> = [x.clone(), y.clone()][..fan.rank()].to_vec();
            let mut sum = vec![Q::zero(); fan.rank()];
            for r in fan.rays() {
                let c = PiecewisePolynomial::courant(&fan, &Cone::ray(r).unwrap()).unwrap();
                let value = c.evaluate(&v).unwrap();
                prop_assert!(!value.is_negative());
                for (s, &ri) in sum.iter_mut().zip(r) {
                    *s += &value * q(ri);
                }
            }
            prop_assert_eq!(sum, v);
        }
    }

    #[test]
    fn star_subdivisions_stay_complete(a in -4i64..=4, b in -4i64..=4) {
        prop_assume!((a, b) != (0, 0));
        let g = num_integer::gcd(a, b);
        let ray = [a / g, b / g];
        let p2 = Fan::standard(&StandardFan::P2);
        let fine = p2.star_subdivision(&ray).unwrap();
        prop_assert!(fine.is_complete());
        prop_assert!(fine.ray_index(&ray).is_some());
        prop_assert_eq!(Fan::parse(&fine.to_text()).unwrap(), fine);
    }

    #[test]
    fn contact_text_roundtrip(cols in prop::collection::vec(prop::collection::vec(-5i64..=5, 2), 0..8), genus in 0u32..4) {
        let mut cols = cols;
        let sum: Vec<i64> = (0..2).map(|r| cols.iter().map(|c| c[r]).sum()).collect();
        cols.push(sum.iter().map(|s| -s).collect());
        let c = ContactData::new(genus, 2, cols).unwrap();
        prop_assert_eq!(ContactData::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn piecewise_ring_operations_evaluate_pointwise(x in rational(), y in rational()) {
        let fan = Fan::standard(&StandardFan::P2);
        let v = vec![x, y];
        let f = PiecewisePolynomial::courant(&fan, &Cone::ray(&[1, 0]).unwrap()).unwrap();
        let g = PiecewisePolynomial::courant(&fan, &Cone::ray(&[-1, -1]).unwrap()).unwrap();
        let (fv, gv) = (f.evaluate(&v).unwrap(), g.evaluate(&v).unwrap());
        prop_assert_eq!(f.add(&g).unwrap().evaluate(&v).unwrap(), &fv + &gv);
        prop_assert_eq!(f.mul(&g).unwrap().evaluate(&v).unwrap(), &fv * &gv);
        prop_assert_eq!(f.scale(&q(3)).evaluate(&v).unwrap(), fv * q(3));
    }
}

#[test]
fn fan_fixtures() {
    let accepted = [
        "rank 1\nray 1\nray -1\ncone 0\ncone 1\n",
        "rank 2\nray 1 0\nray 0 1\nray -1 -1\ncone 0 1\ncone 1 2\ncone 0 2\n",
        "rank 2\nray 1 0\nray 0 1\ncone 0 1\n",
        "rank 2\nray 1 2\nray 1 0\ncone 0 1\n",
        "rank 0\n",
    ];
    let rejected = [
        // overlapping cones
        "rank 2\nray 1 0\nray 0 1\nray 1 1\ncone 0 1\ncone 0 2\n",
        // cone containing a line
        "rank 1\nray 1\nray -1\ncone 0 1\n",
        // non-primitive ray
        "rank 2\nray 2 0\nray 0 1\ncone 0 1\n",
        // non-simplicial cone
        "rank 2\nray 1 0\nray 0 1\nray 1 1\ncone 0 1 2\n",
        // unknown ray index
        "rank 2\nray 1 0\ncone 4\n",
        // ray of the wrong length
        "rank 2\nray 1 0 0\n",
        "ray 1 0\n",
        "rank two\n",
    ];
    for text in accepted {
        assert!(Fan::parse(text).is_ok(), "{text}");
    }
    for text in rejected {
        assert!(Fan::parse(text).is_err(), "{text}");
    }
}

#[test]
fn fuzz_seeds_parse() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    let Ok(dirs) = std::fs::read_dir(&root) else { return };
    for dir in dirs {
        let dir = dir.unwrap().path();
        for file in std::fs::read_dir(&dir).unwrap() {
            let path = file.unwrap().path();
            let text = std::fs::read_to_string(&path).unwrap();
            let ok = match dir.file_name().unwrap().to_str().unwrap() {
                "fan" => Fan::parse(&text).is_ok(),
                "piecewise" => PiecewisePolynomial::parse(&text).is_ok(),
                "contact" => ContactData::parse(&text).is_ok(),
                "curve" => tropcount::curve::TropicalMap::parse(&text).is_ok(),
                _ => true,
            };
            assert!(ok, "{}", path.display());
        }
    }
}
