//! The rubber class on plane curve types, its support, and the Severi and
//! Hurwitz numbers realized through enumeration.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::contact::{effectivity_check, severi_contact_data, ContactData, ContactError};
use crate::curve::{solve_balanced_map, tree_path, Anchor, CombinatorialType, CurveError, DirectedEdge};
use crate::enumeration::{
    enumerate_plane_curves, enumerate_tropical_covers, plane::attempt_seed, EnumError, PointConfiguration,
};
use crate::fan::{Fan, StandardFan};
use crate::poly::{interpolate, Polynomial};
use crate::rational::{q, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("anchor and insertions must be exactly the trivial markings")]
    SpecMismatch,
    #[error("leg of marking {0} does not match the contact data")]
    ContactMismatch(usize),
    #[error("rubber class is only defined in genus 0")]
    PositiveGenus,
    #[error("contact data is not effective")]
    NotEffective,
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Enum(#[from] EnumError),
    #[error(transparent)]
    Contact(#[from] ContactError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaRubSpec {
    pub contact: ContactData,
    pub anchor: usize,
    pub insertions: Vec<usize>,
}

impl GammaRubSpec {
    pub fn new(contact: ContactData, anchor: usize, mut insertions: Vec<usize>) -> Result<Self, PipelineError> {
        insertions.sort_unstable();
        let mut all = insertions.clone();
        all.push(anchor);
        all.sort_unstable();
        all.dedup();
        if all.len() != insertions.len() + 1 || all != contact.trivial_markings() {
            return Err(PipelineError::SpecMismatch);
        }
        Ok(Self {
            contact,
            anchor,
            insertions,
        })
    }

    /// The anchor is the first trivial marking; the others are insertions.
    pub fn severi(d: u32, g: u32) -> Self {
        let contact = severi_contact_data(d, g);
        let trivial = contact.trivial_markings();
        Self {
            anchor: trivial[0],
            insertions: trivial[1..].to_vec(),
            contact,
        }
    }

    /// Total degree of the class: one factor per insertion and axis.
    pub fn degree(&self) -> usize {
        self.insertions.len() * self.contact.rank()
    }

    fn check(&self, ty: &CombinatorialType) -> Result<(), PipelineError> {
        if ty.genus() != 0 {
            return Err(PipelineError::PositiveGenus);
        }
        if !ty.is_tree() {
            return Err(CurveError::NotATree.into());
        }
        for (i, col) in self.contact.columns().iter().enumerate() {
            let m = i + 1;
            let leg = ty.leg_of_marking(m).ok_or(PipelineError::ContactMismatch(m))?;
            if &ty.legs()[leg].slope != col {
                return Err(PipelineError::ContactMismatch(m));
            }
        }
        if ty.legs().len() != self.contact.num_markings() {
            return Err(PipelineError::SpecMismatch);
        }
        Ok(())
    }

    fn vertex_of(&self, ty: &CombinatorialType, m: usize) -> usize {
        ty.legs()[ty.leg_of_marking(m).expect("checked")].vertex
    }

    /// The directed path from the anchor vertex to each insertion vertex.
    fn paths(&self, ty: &CombinatorialType) -> Result<Vec<Vec<DirectedEdge>>, PipelineError> {
        let a = self.vertex_of(ty, self.anchor);
        self.insertions
            .iter()
            .map(|&m| Ok(tree_path(ty, a, self.vertex_of(ty, m))?))
            .collect()
    }
}

fn step(ty: &CombinatorialType, de: DirectedEdge, axis: usize) -> i64 {
    let s = ty.edges()[de.edge].slope[axis];
    if de.forward {
        s
    } else {
        -s
    }
}

/// The product over insertions `j` and axes of the displacement from the
/// anchor to `p_j`, where a factor is 0 if the walk along the path ever
/// leaves the nonnegative half-axis.
pub fn gamma_rub_value(spec: &GammaRubSpec, ty: &CombinatorialType, lengths: &[Q]) -> Result<Q, PipelineError> {
    spec.check(ty)?;
    let origin = vec![Q::zero(); ty.rank()];
    // validates lengths and balancing
    solve_balanced_map(ty, lengths, &Anchor::Marking(spec.anchor), &origin)?;
    let mut value = Q::one();
    for path in spec.paths(ty)? {
        for axis in 0..ty.rank() {
            let mut x = Q::zero();
            for &de in &path {
                x += &lengths[de.edge] * q(step(ty, de, axis));
                if x.is_negative() {
                    return Ok(Q::zero());
                }
            }
            value *= x;
        }
    }
    Ok(value)
}

/// The displacement forms, one per insertion and axis, as linear
/// polynomials in the edge lengths.
pub fn gamma_rub_factors(spec: &GammaRubSpec, ty: &CombinatorialType) -> Result<Vec<Polynomial>, PipelineError> {
    spec.check(ty)?;
    let n = ty.edges().len();
    let mut out = Vec::new();
    for path in spec.paths(ty)? {
        for axis in 0..ty.rank() {
            let mut coeffs = vec![Q::zero(); n];
            for &de in &path {
                coeffs[de.edge] += q(step(ty, de, axis));
            }
            out.push(Polynomial::linear(&coeffs));
        }
    }
    Ok(out)
}

/// How the class behaves on the open cone of a type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GammaRubShape {
    /// Zero for every choice of lengths.
    Zero,
    /// Equal to this polynomial for every choice of lengths.
    Polynomial(Polynomial),
    /// Nonzero somewhere, but only piecewise polynomial.
    Piecewise,
}

/// Decides the shape from the sign pattern of the steps along each path.
/// A factor vanishes identically iff its first nonzero step is negative or
/// there is none; it is a polynomial iff no step is negative.
pub fn gamma_rub_shape(spec: &GammaRubSpec, ty: &CombinatorialType) -> Result<GammaRubShape, PipelineError> {
    spec.check(ty)?;
    let mut monotone = true;
    for path in spec.paths(ty)? {
        for axis in 0..ty.rank() {
            let steps: Vec<i64> = path.iter().map(|&de| step(ty, de, axis)).filter(|&s| s != 0).collect();
            match steps.first() {
                None => return Ok(GammaRubShape::Zero),
                Some(&s) if s < 0 => return Ok(GammaRubShape::Zero),
                _ => {}
            }
            monotone &= steps.iter().all(|&s| s > 0);
        }
    }
    if !monotone {
        return Ok(GammaRubShape::Piecewise);
    }
    let n = ty.edges().len();
    let product = gamma_rub_factors(spec, ty)?
        .iter()
        .fold(Polynomial::one(n), |acc, f| acc.mul(f));
    Ok(GammaRubShape::Polynomial(product))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterpolationReport {
    /// Coefficients in `t` of the class along `base + t * direction`.
    pub coefficients: Vec<Q>,
    pub degree: Option<usize>,
    /// The interpolant also matches at the extra check points.
    pub consistent: bool,
    /// The interpolant agrees with the product of displacement forms.
    pub matches_factors: bool,
}

fn random_lengths(rng: &mut ChaCha8Rng, n: usize) -> Vec<Q> {
    (0..n)
        .map(|_| {
            Q::new(
                BigInt::from(rng.gen_range(1..=1000)),
                BigInt::from(rng.gen_range(1..=97)),
            )
        })
        .collect()
}

/// Restricts the class to a seeded line in the length cone, interpolates
/// through `degree + 1` samples and checks two more.
pub fn interpolation_check(
    spec: &GammaRubSpec,
    ty: &CombinatorialType,
    seed: u64,
) -> Result<InterpolationReport, PipelineError> {
    let n = ty.edges().len();
    let k = spec.degree();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = random_lengths(&mut rng, n);
    let dir = random_lengths(&mut rng, n);
    let at = |t: &Q| -> Vec<Q> { base.iter().zip(&dir).map(|(b, d)| b + t * d).collect() };
    let ts: Vec<Q> = (0..=k as i64 + 2).map(q).collect();
    let ys = ts
        .iter()
        .map(|t| gamma_rub_value(spec, ty, &at(t)))
        .collect::<Result<Vec<_>, _>>()?;
    let coefficients = interpolate(&ts[..=k], &ys[..=k]);
    let horner = |t: &Q| coefficients.iter().rev().fold(Q::zero(), |acc, c| acc * t + c);
    let consistent = ts.iter().zip(&ys).all(|(t, y)| &horner(t) == y);
    let degree = coefficients.iter().rposition(|c| !c.is_zero());
    let factors = gamma_rub_factors(spec, ty)?;
    let matches_factors = ts.iter().zip(&ys).all(|(t, y)| {
        let x = at(t);
        &factors.iter().fold(Q::one(), |acc, f| acc * f.eval(&x)) == y
    });
    Ok(InterpolationReport {
        coefficients,
        degree,
        consistent,
        matches_factors,
    })
}

type TreeKey = Vec<(Vec<usize>, Vec<i64>)>;

/// A labelling-independent key for genus-0 types: for every edge, the
/// markings on the side away from marking 1 with the slope pointing there,
/// plus the markings at every vertex.
fn tree_key(ty: &CombinatorialType) -> TreeKey {
    let nv = ty.num_vertices();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    for (i, e) in ty.edges().iter().enumerate() {
        adj[e.a].push((e.b, i));
        adj[e.b].push((e.a, i));
    }
    let markings_at =
        |v: usize| -> Vec<usize> { ty.legs().iter().filter(|l| l.vertex == v).map(|l| l.marking).collect() };
    let mut key = Vec::new();
    for (i, e) in ty.edges().iter().enumerate() {
        for (from, to, sign) in [(e.a, e.b, 1), (e.b, e.a, -1)] {
            let mut side = Vec::new();
            let mut stack = vec![to];
            let mut seen = vec![false; nv];
            seen[from] = true;
            seen[to] = true;
            while let Some(v) = stack.pop() {
                side.extend(markings_at(v));
                for &(w, j) in &adj[v] {
                    if j != i && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            if !side.contains(&1) {
                side.sort_unstable();
                key.push((side, e.slope.iter().map(|&s| s * sign).collect()));
            }
        }
    }
    for v in 0..nv {
        let mut m = markings_at(v);
        m.sort_unstable();
        key.push((m, Vec::new()));
    }
    key.sort();
    key
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportEntry {
    pub ty: CombinatorialType,
    pub shape: GammaRubShape,
}

/// Points relabelled so the anchor is the lowest in `x + y` and the
/// insertions follow in increasing order.
fn sorted_config(config: &PointConfiguration) -> PointConfiguration {
    let mut points = config.points.clone();
    points.sort_by_cached_key(|p| (p.iter().sum::<Q>(), p.clone()));
    PointConfiguration {
        points,
        seed: config.seed,
    }
}

/// Every type met as a solution type at the seeded configurations (as drawn
/// and relabelled by height), together with all its edge contractions.
pub fn scanned_types(d: u32, g: u32, seed: u64, seeds: u32) -> Result<Vec<CombinatorialType>, PipelineError> {
    let n = (3 * d - 1 + g) as usize;
    let configs: Vec<PointConfiguration> = (0..seeds)
        .flat_map(|k| {
            let c = PointConfiguration::random(n, 2, attempt_seed(seed, k));
            [sorted_config(&c), c]
        })
        .collect();
    let found = configs
        .par_iter()
        .map(|c| match enumerate_plane_curves(d, g, c) {
            Ok(r) => Ok(r
                .solutions
                .into_iter()
                .map(|s| s.map.combinatorial_type().clone())
                .collect()),
            Err(EnumError::NonGenericConfiguration(_)) => Ok(Vec::new()),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<Vec<CombinatorialType>>, EnumError>>()?;
    let mut types: BTreeMap<TreeKey, CombinatorialType> = BTreeMap::new();
    let mut queue: Vec<CombinatorialType> = found.into_iter().flatten().collect();
    while let Some(ty) = queue.pop() {
        let key = tree_key(&ty);
        if types.contains_key(&key) {
            continue;
        }
        for e in 0..ty.edges().len() {
            queue.push(ty.contract_edge(e));
        }
        types.insert(key, ty);
    }
    Ok(types.into_values().collect())
}

/// The scanned types on which the class is not identically zero.
pub fn support_scan(spec: &GammaRubSpec, seed: u64, seeds: u32) -> Result<Vec<SupportEntry>, PipelineError> {
    let d = spec.contact.columns().iter().filter(|c| c[..] == [1, 0]).count() as u32;
    let types = scanned_types(d, spec.contact.genus(), seed, seeds)?;
    let shapes = types
        .par_iter()
        .map(|ty| gamma_rub_shape(spec, ty))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(types
        .into_iter()
        .zip(shapes)
        .filter(|(_, s)| *s != GammaRubShape::Zero)
        .map(|(ty, shape)| SupportEntry { ty, shape })
        .collect())
}

/// The Severi degree as the number of point-constrained curves counted with
/// multiplicity, after checking that the contact data is effective.
pub fn severi_via_pipeline(d: u32, g: u32, seed: u64) -> Result<BigInt, PipelineError> {
    let report = effectivity_check(&Fan::standard(&StandardFan::P2), &severi_contact_data(d, g))?;
    if !report.effective {
        return Err(PipelineError::NotEffective);
    }
    Ok(crate::enumeration::severi_degree(d, g, seed)?)
}

/// The Hurwitz number as a weighted count of tropical covers.
pub fn hurwitz_via_pipeline(d: u32, g: u32) -> Result<Q, PipelineError> {
    Ok(enumerate_tropical_covers(d, g)?.total)
}
