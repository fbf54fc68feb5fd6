//! Independent reference counts.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Zero};

use crate::rational::Q;

/// Rational plane curves of degree `d` through `3d - 1` points, by the
/// associativity recursion.
pub fn wdvv_oracle(d: u32) -> BigInt {
    let d = d as usize;
    let mut n = vec![BigInt::zero(); d.max(1) + 1];
    n[1] = BigInt::one();
    for e in 2..=d {
        let mut total = BigInt::zero();
        for d1 in 1..e {
            let d2 = e - d1;
            let (a, b) = (BigInt::from(d1), BigInt::from(d2));
            let top = BigInt::from(3 * e - 4);
            let c1 = binomial(top.clone(), BigInt::from(3 * d1 - 2));
            let c2 = if 3 * d1 - 1 <= 3 * e - 4 {
                binomial(top, BigInt::from(3 * d1 - 1))
            } else {
                BigInt::zero()
            };
            let term = &a * &a * &b * (&b * c1 - &a * c2);
            total += &n[d1] * &n[d2] * term;
        }
        n[e] = total;
    }
    if d == 0 {
        return BigInt::zero();
    }
    n[d].clone()
}

/// Tuples of `2d - 2 + 2g` transpositions in `S_d` with trivial product and
/// transitive image, divided by `d!`.
pub fn hurwitz_factorization_oracle(d: u32, g: u32) -> Q {
    let d = d as usize;
    if d == 0 {
        return Q::zero();
    }
    let r = 2 * d - 2 + 2 * g as usize;
    let transpositions: Vec<(usize, usize)> = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
    // state: (permutation, block label of each letter under the generated group)
    let start = ((0..d as u8).collect::<Vec<u8>>(), (0..d as u8).collect::<Vec<u8>>());
    let mut states: HashMap<(Vec<u8>, Vec<u8>), BigInt> = HashMap::from([(start, BigInt::one())]);
    for _ in 0..r {
        let mut next: HashMap<(Vec<u8>, Vec<u8>), BigInt> = HashMap::new();
        for ((perm, blocks), count) in &states {
            for &(i, j) in &transpositions {
                let mut p = perm.clone();
                p.swap(i, j);
                let (bi, bj) = (blocks[i], blocks[j]);
                let (lo, hi) = (bi.min(bj), bi.max(bj));
                let b: Vec<u8> = blocks.iter().map(|&x| if x == hi { lo } else { x }).collect();
                *next.entry((p, b)).or_insert_with(BigInt::zero) += count;
            }
        }
        states = next;
    }
    let identity: Vec<u8> = (0..d as u8).collect();
    let transitive: BigInt = states
        .iter()
        .filter(|((p, b), _)| *p == identity && b.iter().all(|&x| x == 0))
        .map(|(_, c)| c.clone())
        .sum();
    let factorial: BigInt = (1..=d).map(BigInt::from).product();
    Q::new(transitive, factorial)
}
