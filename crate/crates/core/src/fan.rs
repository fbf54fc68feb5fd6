//! Rational polyhedral cones and simplicial fans.
//!
//! Cones are stored by primitive ray generators only. Membership and
//! intersection questions are answered by exact linear solves, which is all a
//! simplicial fan needs.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use num_integer::Integer;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::lattice::{big_vec, smith_normal_form, IntegerMatrix};
use crate::rational::{self, nonneg_feasible, q, Solution, Q};

pub type Ray = Vec<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FanError {
    #[error("cones {0} and {1} meet in a set that is not a common face")]
    FanAxiomViolation(String, String),
    #[error("vector {0} is not in the support of the fan")]
    NotInSupport(String),
    #[error("cone {0} is not simplicial")]
    NonSimplicial(String),
    #[error("expected rank {expected}, found a vector of length {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("ray {0} is not primitive")]
    NotPrimitive(String),
    #[error("zero vector cannot generate a ray")]
    ZeroRay,
    #[error("cone {0} contains a line")]
    NotStrictlyConvex(String),
    #[error("fan file line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub fn fmt_vec<T: fmt::Display>(v: &[T]) -> String {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(","))
}

pub fn is_primitive(v: &[i64]) -> bool {
    v.iter().fold(0i64, |g, &x| g.gcd(&x)) == 1
}

/// Divides out the content of a nonzero integer vector.
pub fn primitive_part(v: &[i64]) -> Ray {
    let g = v.iter().fold(0i64, |g, &x| g.gcd(&x));
    if g == 0 {
        return v.to_vec();
    }
    v.iter().map(|x| x / g).collect()
}

/// A strictly convex rational cone given by primitive generators in
/// lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cone {
    rank: usize,
    rays: Vec<Ray>,
}

impl Cone {
    pub fn new(rank: usize, rays: Vec<Ray>) -> Result<Self, FanError> {
        let mut set = BTreeSet::new();
        for r in rays {
            if r.len() != rank {
                return Err(FanError::RankMismatch {
                    expected: rank,
                    found: r.len(),
                });
            }
            if r.iter().all(|&x| x == 0) {
                return Err(FanError::ZeroRay);
            }
            if !is_primitive(&r) {
                return Err(FanError::NotPrimitive(fmt_vec(&r)));
            }
            set.insert(r);
        }
        let cone = Self {
            rank,
            rays: set.into_iter().collect(),
        };
        if !cone.is_strictly_convex() {
            return Err(FanError::NotStrictlyConvex(cone.to_string()));
        }
        Ok(cone)
    }

    pub fn zero(rank: usize) -> Self {
        Self { rank, rays: Vec::new() }
    }

    pub fn ray(v: &[i64]) -> Result<Self, FanError> {
        Self::new(v.len(), vec![v.to_vec()])
    }

    pub fn ambient_rank(&self) -> usize {
        self.rank
    }

    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    fn generator_rows(&self) -> Vec<Vec<Q>> {
        // rows = coordinates, columns = generators
        (0..self.rank)
            .map(|i| self.rays.iter().map(|r| q(r[i])).collect())
            .collect()
    }

    pub fn dim(&self) -> usize {
        rational::rank(&self.generator_rows(), self.rays.len())
    }

    pub fn is_simplicial(&self) -> bool {
        self.dim() == self.rays.len()
    }

    fn is_strictly_convex(&self) -> bool {
        if self.rays.is_empty() {
            return true;
        }
        // No nonnegative combination with weight sum 1 may vanish.
        let mut a = self.generator_rows();
        a.push(vec![q(1); self.rays.len()]);
        let mut b = vec![Q::zero(); self.rank];
        b.push(q(1));
        !nonneg_feasible(&a, &b, self.rays.len())
    }

    /// Whether `v` lies in the (closed) cone.
    pub fn contains(&self, v: &[Q]) -> bool {
        assert_eq!(v.len(), self.rank);
        if self.rays.is_empty() {
            return v.iter().all(Zero::is_zero);
        }
        nonneg_feasible(&self.generator_rows(), v, self.rays.len())
    }

    /// Coefficients of `v` over the generators of a simplicial cone, if `v`
    /// lies in its linear span.
    pub fn coordinates(&self, v: &[Q]) -> Option<Vec<Q>> {
        match rational::solve(&self.generator_rows(), v, self.rays.len()) {
            Solution::Unique(x) => Some(x),
            _ => None,
        }
    }

    /// Generators extend to a lattice basis.
    pub fn is_smooth(&self) -> bool {
        if !self.is_simplicial() {
            return false;
        }
        let m = IntegerMatrix::from_rows(&self.rays.iter().map(|r| big_vec(r)).collect::<Vec<_>>(), self.rank);
        smith_normal_form(&m).diagonal().iter().all(|d| d == &1.into())
    }
}

impl fmt::Display for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.rays.iter().map(|r| fmt_vec(r)).collect();
        write!(f, "<{}>", parts.join(","))
    }
}

/// The complete smooth fans used by the pipeline.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StandardFan {
    P1,
    P2,
    Product(Box<StandardFan>, Box<StandardFan>),
}

/// A simplicial fan. Rays are sorted lexicographically; cones are index sets
/// into the ray list, closed under faces, sorted by dimension and then
/// lexicographically, and always include the zero cone.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fan {
    rank: usize,
    rays: Vec<Ray>,
    cones: Vec<Vec<usize>>,
}

impl Fan {
    /// Builds the face closure of `cones` and verifies the fan axioms.
    pub fn new(rank: usize, cones: Vec<Cone>) -> Result<Self, FanError> {
        let mut all_rays = BTreeSet::new();
        for c in &cones {
            if c.ambient_rank() != rank {
                return Err(FanError::RankMismatch {
                    expected: rank,
                    found: c.ambient_rank(),
                });
            }
            if !c.is_simplicial() {
                return Err(FanError::NonSimplicial(c.to_string()));
            }
            all_rays.extend(c.rays().iter().cloned());
        }
        let rays: Vec<Ray> = all_rays.into_iter().collect();
        let index = |r: &Ray| rays.binary_search(r).expect("ray collected above");
        let mut set: BTreeSet<Vec<usize>> = BTreeSet::new();
        set.insert(Vec::new());
        for c in &cones {
            let idx: Vec<usize> = c.rays().iter().map(index).collect();
            for mask in 0u64..(1u64 << idx.len()) {
                let face: Vec<usize> = idx
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &r)| r)
                    .collect();
                set.insert(face);
            }
        }
        let mut cones: Vec<Vec<usize>> = set.into_iter().collect();
        cones.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let fan = Self { rank, rays, cones };
        fan.check_intersections()?;
        Ok(fan)
    }

    fn check_intersections(&self) -> Result<(), FanError> {
        let maximal = self.maximal_cones();
        for (k, &i) in maximal.iter().enumerate() {
            for &j in &maximal[k + 1..] {
                if !self.meet_in_common_face(&self.cones[i], &self.cones[j]) {
                    return Err(FanError::FanAxiomViolation(
                        self.cone(i).to_string(),
                        self.cone(j).to_string(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// For simplicial cones, `s ∩ t` is a common face iff it equals the cone
    /// on the shared generators, i.e. no point of the intersection needs a
    /// non-shared generator.
    fn meet_in_common_face(&self, s: &[usize], t: &[usize]) -> bool {
        let only_s: Vec<usize> = s.iter().copied().filter(|x| !t.contains(x)).collect();
        let only_t: Vec<usize> = t.iter().copied().filter(|x| !s.contains(x)).collect();
        if only_s.is_empty() || only_t.is_empty() {
            return true;
        }
        let vars: Vec<(usize, bool)> = s
            .iter()
            .map(|&r| (r, true))
            .chain(t.iter().map(|&r| (r, false)))
            .collect();
        let mut a: Vec<Vec<Q>> = (0..self.rank)
            .map(|i| {
                vars.iter()
                    .map(|&(r, left)| if left { q(self.rays[r][i]) } else { -q(self.rays[r][i]) })
                    .collect()
            })
            .collect();
        a.push(
            vars.iter()
                .map(|&(r, left)| {
                    let non_shared = if left { only_s.contains(&r) } else { only_t.contains(&r) };
                    if non_shared {
                        q(1)
                    } else {
                        q(0)
                    }
                })
                .collect(),
        );
        let mut b = vec![Q::zero(); self.rank];
        b.push(q(1));
        !nonneg_feasible(&a, &b, vars.len())
    }

    pub fn standard(name: &StandardFan) -> Self {
        match name {
            StandardFan::P1 => {
                let cones = vec![Cone::ray(&[1]).unwrap(), Cone::ray(&[-1]).unwrap()];
                Self::new(1, cones).expect("P1 fan is valid")
            }
            StandardFan::P2 => {
                let r = [vec![1, 0], vec![0, 1], vec![-1, -1]];
                let cones = (0..3)
                    .map(|i| Cone::new(2, vec![r[i].clone(), r[(i + 1) % 3].clone()]).unwrap())
                    .collect();
                Self::new(2, cones).expect("P2 fan is valid")
            }
            StandardFan::Product(a, b) => Self::standard(a).product(&Self::standard(b)),
        }
    }

    /// The product fan in `Z^(a+b)`.
    pub fn product(&self, other: &Self) -> Self {
        let rank = self.rank + other.rank;
        let lift = |r: &Ray, left: bool| -> Ray {
            let mut v = vec![0; rank];
            if left {
                v[..self.rank].copy_from_slice(r);
            } else {
                v[self.rank..].copy_from_slice(r);
            }
            v
        };
        let mut cones = Vec::new();
        for &i in &self.maximal_cones() {
            for &j in &other.maximal_cones() {
                let rays: Vec<Ray> = self.cones[i]
                    .iter()
                    .map(|&r| lift(&self.rays[r], true))
                    .chain(other.cones[j].iter().map(|&r| lift(&other.rays[r], false)))
                    .collect();
                cones.push(Cone::new(rank, rays).expect("product cone"));
            }
        }
        Self::new(rank, cones).expect("product of fans is a fan")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    pub fn ray_index(&self, ray: &[i64]) -> Option<usize> {
        self.rays.binary_search(&ray.to_vec()).ok()
    }

    pub fn num_cones(&self) -> usize {
        self.cones.len()
    }

    pub fn cone_indices(&self, i: usize) -> &[usize] {
        &self.cones[i]
    }

    pub fn cone(&self, i: usize) -> Cone {
        Cone {
            rank: self.rank,
            rays: self.cones[i].iter().map(|&r| self.rays[r].clone()).collect(),
        }
    }

    pub fn cones(&self) -> Vec<Cone> {
        (0..self.cones.len()).map(|i| self.cone(i)).collect()
    }

    pub fn cone_position(&self, cone: &Cone) -> Option<usize> {
        let idx: Option<Vec<usize>> = cone.rays().iter().map(|r| self.ray_index(r)).collect();
        let idx = idx?;
        self.cones.iter().position(|c| *c == idx)
    }

    /// Indices of cones not properly contained in another cone.
    pub fn maximal_cones(&self) -> Vec<usize> {
        (0..self.cones.len())
            .filter(|&i| {
                !self
                    .cones
                    .iter()
                    .any(|c| c.len() > self.cones[i].len() && self.cones[i].iter().all(|x| c.contains(x)))
            })
            .collect()
    }

    /// The unique cone whose relative interior contains `v`, with the
    /// (strictly positive) coordinates of `v` over its generators.
    pub fn find_cone(&self, v: &[Q]) -> Result<(usize, Vec<Q>), FanError> {
        if v.len() != self.rank {
            return Err(FanError::RankMismatch {
                expected: self.rank,
                found: v.len(),
            });
        }
        for (i, _) in self.cones.iter().enumerate() {
            let cone = self.cone(i);
            if let Some(c) = cone.coordinates(v) {
                if c.iter().all(Signed::is_positive) {
                    return Ok((i, c));
                }
            }
        }
        Err(FanError::NotInSupport(fmt_vec(
            &v.iter().map(rational::fmt_q).collect::<Vec<_>>(),
        )))
    }

    pub fn find_cone_int(&self, v: &[i64]) -> Result<(usize, Vec<Q>), FanError> {
        self.find_cone(&v.iter().map(|&x| q(x)).collect::<Vec<_>>())
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        self.find_cone(v).is_ok()
    }

    /// Certifies completeness: every maximal cone is full-dimensional and
    /// every facet of a maximal cone lies in exactly two maximal cones.
    pub fn is_complete(&self) -> bool {
        if self.rank == 0 {
            return true;
        }
        let maximal = self.maximal_cones();
        if maximal.iter().any(|&i| self.cones[i].len() != self.rank) {
            return false;
        }
        for &i in &maximal {
            for drop in 0..self.cones[i].len() {
                let facet: Vec<usize> = self.cones[i]
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != drop)
                    .map(|(_, &r)| r)
                    .collect();
                let sharing = maximal
                    .iter()
                    .filter(|&&j| facet.iter().all(|x| self.cones[j].contains(x)))
                    .count();
                if sharing != 2 {
                    return false;
                }
            }
        }
        // Spot check a few directions against the certificate.
        let probes: Vec<Vec<Q>> = (0..self.rank)
            .flat_map(|i| {
                let mut e = vec![Q::zero(); self.rank];
                e[i] = q(1);
                let neg: Vec<Q> = e.iter().map(|x| -x).collect();
                [e, neg]
            })
            .chain(std::iter::once((0..self.rank).map(|i| q(2 * i as i64 - 3)).collect()))
            .collect();
        probes.iter().all(|p| self.contains(p))
    }

    /// Star subdivision at a primitive ray in the support.
    pub fn star_subdivision(&self, ray: &[i64]) -> Result<Self, FanError> {
        if ray.len() != self.rank {
            return Err(FanError::RankMismatch {
                expected: self.rank,
                found: ray.len(),
            });
        }
        if ray.iter().all(|&x| x == 0) {
            return Err(FanError::ZeroRay);
        }
        if !is_primitive(ray) {
            return Err(FanError::NotPrimitive(fmt_vec(ray)));
        }
        let (tau, _) = self.find_cone_int(ray)?;
        let tau = &self.cones[tau];
        if tau.len() == 1 && self.rays[tau[0]] == ray {
            return Ok(self.clone());
        }
        let mut cones = Vec::new();
        for &i in &self.maximal_cones() {
            let sigma = &self.cones[i];
            if !tau.iter().all(|x| sigma.contains(x)) {
                cones.push(self.cone(i));
                continue;
            }
            for g in tau {
                let mut rays: Vec<Ray> = sigma
                    .iter()
                    .filter(|&r| r != g)
                    .map(|&r| self.rays[r].clone())
                    .collect();
                rays.push(ray.to_vec());
                cones.push(Cone::new(self.rank, rays)?);
            }
        }
        Self::new(self.rank, cones)
    }

    /// Serializes as `rank`, `ray` and `cone` lines (maximal cones only).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "rank {}", self.rank).unwrap();
        for r in &self.rays {
            let parts: Vec<String> = r.iter().map(ToString::to_string).collect();
            writeln!(s, "ray {}", parts.join(" ")).unwrap();
        }
        for &i in &self.maximal_cones() {
            let parts: Vec<String> = self.cones[i].iter().map(ToString::to_string).collect();
            if parts.is_empty() {
                writeln!(s, "cone").unwrap();
            } else {
                writeln!(s, "cone {}", parts.join(" ")).unwrap();
            }
        }
        s
    }

    /// Parses the line format written by [`Fan::to_text`]. Returns the fan
    /// and the listed cones in file order, so that other formats can refer
    /// to cones by their line index.
    pub fn parse_with_cones(text: &str) -> Result<(Self, Vec<Cone>), FanError> {
        let mut rank: Option<usize> = None;
        let mut rays: Vec<Ray> = Vec::new();
        let mut listed: Vec<Cone> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let err = |message: String| FanError::Parse { line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut words = content.split_whitespace();
            let head = words.next().unwrap_or("");
            let rest: Vec<&str> = words.collect();
            match head {
                "rank" => {
                    if rank.is_some() {
                        return Err(err("duplicate rank header".into()));
                    }
                    if !rays.is_empty() || !listed.is_empty() {
                        return Err(err("rank must come first".into()));
                    }
                    let [k] = rest.as_slice() else {
                        return Err(err("expected `rank <k>`".into()));
                    };
                    let k: usize = k.parse().map_err(|_| err(format!("bad rank `{k}`")))?;
                    if k > 16 {
                        return Err(err("rank above 16 is not supported".into()));
                    }
                    rank = Some(k);
                }
                "ray" => {
                    let k = rank.ok_or_else(|| err("ray before rank".into()))?;
                    let v: Vec<i64> = rest
                        .iter()
                        .map(|w| w.parse::<i64>().map_err(|_| err(format!("bad integer `{w}`"))))
                        .collect::<Result<_, _>>()?;
                    if v.len() != k {
                        return Err(err(format!("ray has {} coordinates, expected {k}", v.len())));
                    }
                    if v.iter().any(|x| x.unsigned_abs() > 1 << 40) {
                        return Err(err("ray coordinate out of range".into()));
                    }
                    if v.iter().all(|&x| x == 0) || !is_primitive(&v) {
                        return Err(err(format!("ray {} is not primitive", fmt_vec(&v))));
                    }
                    rays.push(v);
                }
                "cone" => {
                    let k = rank.ok_or_else(|| err("cone before rank".into()))?;
                    let idx: Vec<usize> = rest
                        .iter()
                        .map(|w| w.parse::<usize>().map_err(|_| err(format!("bad index `{w}`"))))
                        .collect::<Result<_, _>>()?;
                    if idx.len() > k {
                        return Err(err("cone has more generators than the rank".into()));
                    }
                    let gens = idx
                        .iter()
                        .map(|&i| {
                            rays.get(i)
                                .cloned()
                                .ok_or_else(|| err(format!("ray index {i} out of range")))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    listed.push(Cone::new(k, gens).map_err(|e| err(e.to_string()))?);
                }
                other => return Err(err(format!("unknown keyword `{other}`"))),
            }
        }
        let rank = rank.ok_or(FanError::Parse {
            line: 0,
            message: "missing rank header".into(),
        })?;
        let fan = Self::new(rank, listed.clone())?;
        Ok((fan, listed))
    }

    pub fn parse(text: &str) -> Result<Self, FanError> {
        Self::parse_with_cones(text).map(|(f, _)| f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cone(rays: &[&[i64]]) -> Cone {
        Cone::new(rays[0].len(), rays.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn p2_has_seven_cones() {
        let f = Fan::standard(&StandardFan::P2);
        assert_eq!(f.num_cones(), 7);
        assert_eq!(f.rays(), &[vec![-1, -1], vec![0, 1], vec![1, 0]]);
        assert!(f.is_complete());
    }

    #[test]
    fn single_ray_fan() {
        let f = Fan::new(1, vec![cone(&[&[1]])]).unwrap();
        assert_eq!(f.num_cones(), 2);
        assert!(!f.is_complete());
    }

    #[test]
    fn overlapping_cones_rejected() {
        let r = Fan::new(2, vec![cone(&[&[1, 0], &[0, 1]]), cone(&[&[1, 1], &[1, -1]])]);
        assert!(matches!(r, Err(FanError::FanAxiomViolation(..))));
    }

    #[test]
    fn find_cone_examples() {
        let f = Fan::standard(&StandardFan::P2);
        let (i, c) = f.find_cone_int(&[2, 1]).unwrap();
        assert_eq!(f.cone(i), cone(&[&[1, 0], &[0, 1]]));
        // generators are sorted: (0,1) before (1,0)
        assert_eq!(c, vec![q(1), q(2)]);
        let (i, c) = f.find_cone_int(&[-3, -3]).unwrap();
        assert_eq!(f.cone(i), cone(&[&[-1, -1]]));
        assert_eq!(c, vec![q(3)]);
        let (i, c) = f.find_cone_int(&[0, 0]).unwrap();
        assert_eq!(f.cone(i), Cone::zero(2));
        assert!(c.is_empty());
        let half = Fan::new(2, vec![cone(&[&[1, 0], &[0, 1]])]).unwrap();
        assert!(matches!(half.find_cone_int(&[-1, 0]), Err(FanError::NotInSupport(_))));
    }

    #[test]
    fn smoothness() {
        assert!(cone(&[&[1, 0], &[0, 1]]).is_smooth());
        assert!(!cone(&[&[1, 0], &[1, 2]]).is_smooth());
    }

    #[test]
    fn cone_validation() {
        assert!(matches!(Cone::new(2, vec![vec![2, 0]]), Err(FanError::NotPrimitive(_))));
        assert!(matches!(
            Cone::new(2, vec![vec![1, 0], vec![-1, 0]]),
            Err(FanError::NotStrictlyConvex(_))
        ));
        assert!(matches!(Cone::new(2, vec![vec![0, 0]]), Err(FanError::ZeroRay)));
    }

    #[test]
    fn blow_up_of_p2() {
        let f = Fan::standard(&StandardFan::P2);
        let g = f.star_subdivision(&[1, 1]).unwrap();
        assert_eq!(g.rays().len(), 4);
        assert_eq!(g.maximal_cones().len(), 4);
        assert!(g.is_complete());
        assert_eq!(g.star_subdivision(&[1, 1]).unwrap(), g);
        assert_eq!(f.star_subdivision(&[0, 1]).unwrap(), f);
    }

    #[test]
    fn rank_one_subdivision_is_identity() {
        let f = Fan::new(1, vec![cone(&[&[1]])]).unwrap();
        assert_eq!(f.star_subdivision(&[1]).unwrap(), f);
    }

    #[test]
    fn standard_fans() {
        let p1 = Fan::standard(&StandardFan::P1);
        assert_eq!(p1.rays(), &[vec![-1], vec![1]]);
        let pp = Fan::standard(&StandardFan::Product(
            Box::new(StandardFan::P1),
            Box::new(StandardFan::P1),
        ));
        assert_eq!(pp.rays().len(), 4);
        assert_eq!(pp.maximal_cones().len(), 4);
        assert!(pp.is_complete());
        assert!(pp.cones().iter().all(Cone::is_smooth));
    }

    #[test]
    fn text_roundtrip() {
        let f = Fan::standard(&StandardFan::P2).star_subdivision(&[1, 1]).unwrap();
        assert_eq!(Fan::parse(&f.to_text()).unwrap(), f);
    }

    #[test]
    fn parser_rejects_bad_input() {
        assert!(Fan::parse("rank 2\nray 2 0\n").is_err());
        assert!(Fan::parse("ray 1 0\n").is_err());
        assert!(Fan::parse("rank 2\nray 1 0\ncone 3\n").is_err());
        assert!(Fan::parse("rank 1\nray 1\nray -1\ncone 0 1\n").is_err());
        assert_eq!(Fan::parse("rank 0\n").unwrap().num_cones(), 1);
    }
}
