//! Tropical covers of the line with simple branching, via monodromy graphs.
//!
//! Branch points sit at `1, 2, ..., r`. Sweeping from left to right, the
//! cover starts with `d` weight-one strands; over each branch point either
//! two strands join or one strand splits. Strands are grouped by (source
//! vertex, weight) so each graph is produced once up to isomorphism.

use num_bigint::BigInt;
use num_traits::One;

use super::{EnumError, EnumerationResult, Solution};
use crate::curve::{CombinatorialType, Edge, Leg, TropicalMap};
use crate::rational::{q, Q};

/// `None` stands for the left end of the line.
type Source = Option<usize>;

#[derive(Clone, Debug)]
struct Sweep {
    open: Vec<(Source, i64)>,
    /// `(source, target, weight)`; target `None` is the right end.
    edges: Vec<(Source, Option<usize>, i64)>,
}

fn remove_one(open: &mut Vec<(Source, i64)>, x: (Source, i64)) {
    let i = open.iter().position(|&y| y == x).expect("strand present");
    open.remove(i);
}

fn classes(open: &[(Source, i64)]) -> Vec<((Source, i64), usize)> {
    let mut out: Vec<((Source, i64), usize)> = Vec::new();
    for &x in open {
        match out.iter_mut().find(|(y, _)| *y == x) {
            Some((_, c)) => *c += 1,
            None => out.push((x, 1)),
        }
    }
    out.sort();
    out
}

fn sweep(state: Sweep, k: usize, r: usize, d: i64, out: &mut Vec<Sweep>) {
    if k > r {
        if state.open.iter().all(|&(_, w)| w == 1) {
            let mut done = state;
            for &(s, w) in &done.open.clone() {
                done.edges.push((s, None, w));
            }
            done.open.clear();
            out.push(done);
        }
        return;
    }
    // Remaining branch points can lower the strand count by at most that many.
    let remaining = r - k + 1;
    if (state.open.len() as i64 - d).unsigned_abs() as usize > remaining {
        return;
    }
    let cls = classes(&state.open);
    for i in 0..cls.len() {
        for j in i..cls.len() {
            if i == j && cls[i].1 < 2 {
                continue;
            }
            let (a, b) = (cls[i].0, cls[j].0);
            let mut next = state.clone();
            remove_one(&mut next.open, a);
            remove_one(&mut next.open, b);
            next.edges.push((a.0, Some(k), a.1));
            next.edges.push((b.0, Some(k), b.1));
            next.open.push((Some(k), a.1 + b.1));
            sweep(next, k + 1, r, d, out);
        }
    }
    for &(c, _) in &cls {
        for a in 1..=c.1 / 2 {
            let mut next = state.clone();
            remove_one(&mut next.open, c);
            next.edges.push((c.0, Some(k), c.1));
            next.open.push((Some(k), a));
            next.open.push((Some(k), c.1 - a));
            sweep(next, k + 1, r, d, out);
        }
    }
}

fn connected(edges: &[(Source, Option<usize>, i64)], r: usize) -> bool {
    let mut parent: Vec<usize> = (0..=r).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(s, t, _) in edges {
        if s.is_none() && t.is_none() {
            // a sheet that never branches is its own component
            return false;
        }
        if let (Some(a), Some(b)) = (s, t) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
    }
    let root = find(&mut parent, 1);
    (1..=r).all(|v| find(&mut parent, v) == root)
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn to_solution(g: &Sweep, d: usize, r: usize) -> Result<Solution, EnumError> {
    let mut interior = Vec::new();
    let mut lengths = Vec::new();
    let mut weight_product = BigInt::one();
    let mut ins = Vec::new();
    let mut outs = Vec::new();
    for &(s, t, w) in &g.edges {
        match (s, t) {
            (Some(a), Some(b)) => {
                interior.push(Edge {
                    a: a - 1,
                    b: b - 1,
                    slope: vec![w],
                });
                lengths.push(Q::new(BigInt::from(b - a), BigInt::from(w)));
                weight_product *= BigInt::from(w);
            }
            (None, Some(b)) => ins.push(b - 1),
            (Some(a), None) => outs.push(a - 1),
            (None, None) => {}
        }
    }
    let mut aut = BigInt::one();
    let mut sorted = g.edges.clone();
    sorted.sort();
    let mut i = 0;
    while i < sorted.len() {
        let j = (i..sorted.len())
            .find(|&j| sorted[j] != sorted[i])
            .unwrap_or(sorted.len());
        aut *= factorial(j - i);
        i = j;
    }
    outs.sort_unstable();
    ins.sort_unstable();
    let mut legs = Vec::new();
    for (i, &v) in outs.iter().enumerate() {
        legs.push(Leg {
            vertex: v,
            marking: i + 1,
            slope: vec![1],
        });
    }
    for (i, &v) in ins.iter().enumerate() {
        legs.push(Leg {
            vertex: v,
            marking: d + i + 1,
            slope: vec![-1],
        });
    }
    for v in 0..r {
        legs.push(Leg {
            vertex: v,
            marking: 2 * d + v + 1,
            slope: vec![0],
        });
    }
    let (nv, positions) = if r == 0 {
        // A single sheet: one bivalent vertex carrying both ends.
        legs = vec![
            Leg {
                vertex: 0,
                marking: 1,
                slope: vec![1],
            },
            Leg {
                vertex: 0,
                marking: 2,
                slope: vec![-1],
            },
        ];
        (1, vec![vec![q(0)]])
    } else {
        (r, (1..=r).map(|k| vec![q(k as i64)]).collect())
    };
    let ty = CombinatorialType::new(1, vec![0; nv], interior, legs)?;
    let map = TropicalMap::new(ty, lengths, positions)?;
    Ok(Solution {
        map,
        multiplicity: Q::new(weight_product, aut),
    })
}

/// Genus-`g` degree-`d` covers with simple ends over both sides and
/// `2d - 2 + 2g` simple branch points, weighted by the product of interior
/// edge weights over the number of automorphisms.
pub fn enumerate_tropical_covers(d: u32, g: u32) -> Result<EnumerationResult, EnumError> {
    if d == 0 {
        return Err(EnumError::ZeroDegree);
    }
    let du = d as usize;
    let r = 2 * du - 2 + 2 * g as usize;
    if r == 0 {
        let start = Sweep {
            open: vec![],
            edges: vec![(None, None, 1)],
        };
        return Ok(EnumerationResult::from_solutions(vec![to_solution(&start, du, 0)?]));
    }
    let start = Sweep {
        open: vec![(None, 1); du],
        edges: vec![],
    };
    let mut graphs = Vec::new();
    sweep(start, 1, r, d as i64, &mut graphs);
    let solutions = graphs
        .iter()
        .filter(|gr| connected(&gr.edges, r))
        .map(|gr| to_solution(gr, du, r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EnumerationResult::from_solutions(solutions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q_frac;

    #[test]
    fn small_covers() {
        assert_eq!(enumerate_tropical_covers(1, 0).unwrap().total, q(1));
        assert_eq!(enumerate_tropical_covers(2, 0).unwrap().total, q_frac(1, 2));
        assert_eq!(enumerate_tropical_covers(2, 1).unwrap().total, q_frac(1, 2));
        assert_eq!(enumerate_tropical_covers(3, 0).unwrap().total, q(4));
        assert_eq!(enumerate_tropical_covers(1, 1).unwrap().total, q(0));
    }

    #[test]
    fn cover_maps_are_balanced() {
        for s in enumerate_tropical_covers(3, 1).unwrap().solutions {
            assert!(s.map.combinatorial_type().balancing().balanced);
            assert_eq!(s.map.combinatorial_type().genus(), 1);
        }
    }
}
