//! Plane tropical curves with prescribed ends through generic points.
//!
//! A rigid curve is found by recursive cutting. A sub-problem asks for all
//! connected curves of genus `g` with unbounded ends `E`, passing through
//! the points `S`, and with extra "root" legs: a root `(q, w)` is a leg that
//! ends at the already placed point `q` and leaves it with slope `w`. It is
//! rigid when `|S| = |E| - 1 + g`.
//!
//! * Point cut: the lowest-indexed point lies in the interior of an edge.
//!   Either that edge separates the curve (two sub-problems, each with a new
//!   root at the point) or it lies on a cycle (one sub-problem of lower
//!   genus with two opposite roots at the point).
//! * Root step (genus 0 with at least one root): the first root's edge runs
//!   to a trivalent vertex `v`. Removing `v` leaves a side `A` that is rigid
//!   on its own once its edge towards `v` is made unbounded, and a side `B`
//!   rooted at `v`. The position of `v` is the intersection of that
//!   unbounded end with the root's line.
//!
//! Sub-problems without a freshly placed vertex are memoized. Solutions are
//! kept as a shared tree of joins and flattened only at the top.

use std::cmp::Ordering;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use super::{EnumError, EnumerationResult, PointConfiguration, Solution};
use crate::contact::severi_contact_data;
use crate::curve::{CombinatorialType, Edge, Leg, TropicalMap};
use crate::rational::Q;

type V2 = [i64; 2];
fn overflow<T>(x: Option<T>) -> Result<T, EnumError> {
    x.ok_or(EnumError::Overflow)
}

/// The point `(x, y) / den` in coordinates scaled by the common denominator
/// of the configuration, so `den` is a product of small slope
/// determinants. Kept reduced with `den > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct P2 {
    x: i64,
    y: i64,
    den: i64,
}

impl P2 {
    fn int(x: i64, y: i64) -> Self {
        P2 { x, y, den: 1 }
    }

    fn reduced(x: i128, y: i128, den: i128) -> Result<Self, EnumError> {
        let g = x.gcd(&y).gcd(&den);
        let (x, y, den) = if g > 1 { (x / g, y / g, den / g) } else { (x, y, den) };
        let n = |v: i128| i64::try_from(v).map_err(|_| EnumError::Overflow);
        Ok(P2 {
            x: n(x)?,
            y: n(y)?,
            den: n(den)?,
        })
    }

    /// `self - other` as numerators over a positive common denominator.
    fn diff(self, other: P2) -> ([i128; 2], i128) {
        let g = self.den.gcd(&other.den);
        let (fa, fb) = (i128::from(other.den / g), i128::from(self.den / g));
        let c = |a: i64, b: i64| i128::from(a) * fa - i128::from(b) * fb;
        ([c(self.x, other.x), c(self.y, other.y)], i128::from(self.den) * fa)
    }

    /// `self + (num / den) * w`
    fn advance(self, num: i128, den: i128, w: V2) -> Result<P2, EnumError> {
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        let own = i128::from(self.den);
        let c = |a: i64, s: i64| {
            overflow(
                i128::from(a)
                    .checked_mul(den)
                    .zip(num.checked_mul(i128::from(s)).and_then(|t| t.checked_mul(own)))
                    .and_then(|(x, y)| x.checked_add(y)),
            )
        };
        P2::reduced(c(self.x, w[0])?, c(self.y, w[1])?, overflow(own.checked_mul(den))?)
    }

    /// `l(self)` as a numerator over `den`.
    fn dot(self, l: V2) -> (i128, i128) {
        let n = i128::from(self.x) * i128::from(l[0]) + i128::from(self.y) * i128::from(l[1]);
        (n, i128::from(self.den))
    }

    fn approx(self) -> [f64; 2] {
        [self.x as f64 / self.den as f64, self.y as f64 / self.den as f64]
    }

    fn to_q(self, scale: &BigInt) -> [Q; 2] {
        let den = scale * BigInt::from(self.den);
        [
            Q::new(BigInt::from(self.x), den.clone()),
            Q::new(BigInt::from(self.y), den),
        ]
    }
}

/// Compares `a.0 / a.1` with `b.0 / b.1` for positive denominators.
fn cmp_frac(a: (i128, i128), b: (i128, i128)) -> Ordering {
    match (a.0.checked_mul(b.1), b.0.checked_mul(a.1)) {
        (Some(x), Some(y)) => x.cmp(&y),
        _ => (BigInt::from(a.0) * BigInt::from(b.1)).cmp(&(BigInt::from(b.0) * a.1)),
    }
}

#[derive(Clone, Copy, Debug)]
struct Root {
    at: P2,
    dir: V2,
    /// The configuration point it sits at, if any.
    point: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Node {
    Local(usize),
    Root(usize),
    Point(usize),
}

/// The node an end hangs from, with its position if it is a new vertex.
#[derive(Clone, Copy, Debug)]
enum Base {
    Local(P2),
    Root(usize),
    Point(usize),
}

/// A solution inside a memoized (or freshly computed) list.
type Ref = (Arc<Vec<Piece>>, usize);

#[derive(Debug)]
enum Shape {
    /// The only root's leg is the single end.
    Ray,
    /// Root 0 meets end `j` of `a` at `v`; `b` continues from `v`.
    Join {
        v: P2,
        w: V2,
        t_a: V2,
        a: Ref,
        j: usize,
        b: Ref,
        ra: Arc<[usize]>,
        rb: Arc<[usize]>,
    },
    /// The point `p` separates `a` (roots `r1`) from `b` (roots `r2`).
    Cut {
        p: usize,
        a: Ref,
        b: Ref,
        r1: Arc<[usize]>,
        r2: Arc<[usize]>,
    },
    /// The point `p` lies on a cycle; roots from `nr` on sit at `p`.
    Cycle { p: usize, nr: usize, s: Ref },
}

/// A partial solution: its unbounded ends and how it was built.
#[derive(Clone, Debug)]
struct Piece {
    ends: Vec<(Base, V2)>,
    shape: Arc<Shape>,
}

/// A flattened piece. Edges are `(from, to, slope)` with `to = from +
/// length * slope`; ends are listed in the same order as `Piece::ends`.
#[derive(Default)]
struct Flat {
    locals: Vec<P2>,
    edges: Vec<(Node, Node, V2)>,
    ends: Vec<(Node, V2)>,
}

impl Flat {
    fn absorb(&mut self, other: Flat, f: impl Fn(Node) -> Node) {
        self.edges
            .extend(other.edges.into_iter().map(|(a, b, s)| (f(a), f(b), s)));
        self.ends.extend(other.ends.into_iter().map(|(a, s)| (f(a), s)));
    }
}

fn get(r: &Ref) -> &Piece {
    &r.0[r.1]
}

fn flatten(piece: &Piece) -> Flat {
    match &*piece.shape {
        Shape::Ray => Flat {
            ends: vec![(Node::Root(0), piece.ends[0].1)],
            ..Flat::default()
        },
        Shape::Join {
            v,
            w,
            t_a,
            a,
            j,
            b,
            ra,
            rb,
        } => {
            let (mut fa, fb) = (flatten(get(a)), flatten(get(b)));
            let na = fa.locals.len();
            let map_a = |n: Node| match n {
                Node::Local(i) => Node::Local(1 + i),
                Node::Root(k) => Node::Root(ra[k]),
                x => x,
            };
            let map_b = |n: Node| match n {
                Node::Local(i) => Node::Local(1 + na + i),
                Node::Root(0) => Node::Local(0),
                Node::Root(k) => Node::Root(rb[k - 1]),
                x => x,
            };
            let mut out = Flat {
                locals: vec![*v],
                ..Flat::default()
            };
            out.locals.extend(fa.locals.iter().copied());
            out.locals.extend(fb.locals.iter().copied());
            out.edges.push((Node::Root(0), Node::Local(0), *w));
            let (u, _) = fa.ends.remove(*j);
            out.edges.push((map_a(u), Node::Local(0), *t_a));
            out.absorb(fa, map_a);
            out.absorb(fb, map_b);
            out
        }
        Shape::Cut { p, a, b, r1, r2 } => {
            let (fa, fb) = (flatten(get(a)), flatten(get(b)));
            let na = fa.locals.len();
            let mut out = Flat {
                locals: fa.locals.clone(),
                ..Flat::default()
            };
            out.locals.extend(fb.locals.iter().copied());
            out.absorb(fa, |n| match n {
                Node::Root(k) if k == r1.len() => Node::Point(*p),
                Node::Root(k) => Node::Root(r1[k]),
                x => x,
            });
            out.absorb(fb, |n| match n {
                Node::Local(i) => Node::Local(na + i),
                Node::Root(k) if k == r2.len() => Node::Point(*p),
                Node::Root(k) => Node::Root(r2[k]),
                x => x,
            });
            out
        }
        Shape::Cycle { p, nr, s } => {
            let fs = flatten(get(s));
            let mut out = Flat {
                locals: fs.locals.clone(),
                ..Flat::default()
            };
            out.absorb(fs, |n| match n {
                Node::Root(k) if k >= *nr => Node::Point(*p),
                x => x,
            });
            out
        }
    }
}

/// A sub-problem. Points are a bitmask over the configuration.
#[derive(Clone, Debug)]
struct Problem {
    genus: u32,
    ends: Vec<V2>,
    points: u64,
    roots: Vec<Root>,
}

const KEY_BYTES: usize = 54;

/// The lead cache is dropped wholesale past this size to bound memory.
const LEAD_CACHE_CAP: usize = 50_000;

/// Memo key: genus, end slopes and the roots (all at configuration points)
/// packed into bytes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Key {
    points: u64,
    len: u8,
    code: [i8; KEY_BYTES],
}

impl Key {
    fn new(points: u64) -> Self {
        Key {
            points,
            len: 0,
            code: [0; KEY_BYTES],
        }
    }

    fn push(&mut self, x: i64) -> Option<()> {
        let slot = self.code.get_mut(usize::from(self.len))?;
        *slot = i8::try_from(x).ok()?;
        self.len += 1;
        Some(())
    }

    fn push_ends(&mut self, ends: &[V2]) -> Option<()> {
        self.push(ends.len() as i64)?;
        for e in ends {
            self.push(e[0])?;
            self.push(e[1])?;
        }
        Some(())
    }

    fn push_roots(&mut self, roots: &[Root]) -> Option<()> {
        for r in roots {
            self.push(r.point? as i64)?;
            self.push(r.dir[0])?;
            self.push(r.dir[1])?;
        }
        Some(())
    }
}

fn problem_key(genus: u32, ends: &[V2], points: u64, roots: &[Root]) -> Option<Key> {
    let mut k = Key::new(points);
    k.push(i64::from(genus))?;
    k.push_ends(ends)?;
    k.push_roots(roots)?;
    Some(k)
}

impl Problem {
    fn key(&self) -> Option<Key> {
        problem_key(self.genus, &self.ends, self.points, &self.roots)
    }
}

fn add(a: V2, b: V2) -> V2 {
    [a[0] + b[0], a[1] + b[1]]
}

fn sub(a: V2, b: V2) -> V2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn neg(a: V2) -> V2 {
    [-a[0], -a[1]]
}

fn det(a: V2, b: V2) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sum(vs: impl IntoIterator<Item = V2>) -> V2 {
    vs.into_iter().fold([0, 0], add)
}

fn qi(x: i64) -> Q {
    Q::from_integer(BigInt::from(x))
}

/// Walks every sub-multiset of a sorted list together with its complement.
struct Splits {
    groups: Vec<(V2, usize)>,
    taken: Vec<usize>,
    started: bool,
    a: Vec<V2>,
    b: Vec<V2>,
}

impl Splits {
    fn new(items: &[V2]) -> Self {
        let mut groups: Vec<(V2, usize)> = Vec::new();
        for &x in items {
            match groups.last_mut() {
                Some((y, c)) if *y == x => *c += 1,
                _ => groups.push((x, 1)),
            }
        }
        let n = groups.len();
        Splits {
            groups,
            taken: vec![0; n],
            started: false,
            a: Vec::new(),
            b: Vec::new(),
        }
    }

    fn next(&mut self) -> Option<(&[V2], &[V2])> {
        if self.started {
            let mut i = 0;
            loop {
                if i == self.groups.len() {
                    return None;
                }
                if self.taken[i] < self.groups[i].1 {
                    self.taken[i] += 1;
                    break;
                }
                self.taken[i] = 0;
                i += 1;
            }
        }
        self.started = true;
        self.a.clear();
        self.b.clear();
        for (&(x, c), &k) in self.groups.iter().zip(&self.taken) {
            self.a.extend(std::iter::repeat_n(x, k));
            self.b.extend(std::iter::repeat_n(x, c - k));
        }
        Some((&self.a, &self.b))
    }
}

/// The submasks of `mask` with exactly `k` bits, in increasing order.
fn submasks_of_size(mask: u64, k: usize) -> Vec<u64> {
    let bits: Vec<u64> = (0..64).filter(|i| mask >> i & 1 == 1).map(|i| 1u64 << i).collect();
    let mut out = Vec::new();
    fn go(bits: &[u64], k: usize, acc: u64, out: &mut Vec<u64>) {
        if k == 0 {
            out.push(acc);
            return;
        }
        for i in 0..=bits.len() - k {
            go(&bits[i + 1..], k - 1, acc | bits[i], out);
        }
    }
    if k <= bits.len() {
        go(&bits, k, 0, &mut out);
    }
    out
}

fn indices(n: usize, mask: u64, offset: usize) -> (Arc<[usize]>, Arc<[usize]>) {
    let (a, b): (Vec<usize>, Vec<usize>) = (0..n).partition(|i| mask >> i & 1 == 1);
    let shift = |v: Vec<usize>| v.into_iter().map(|i| i + offset).collect();
    (shift(a), shift(b))
}

/// Primitive functionals tried by the hull test.
static FUNCTIONALS: std::sync::LazyLock<Vec<V2>> = std::sync::LazyLock::new(|| {
    let mut out = Vec::new();
    for x in -3i64..=3 {
        for y in -3i64..=3 {
            if x.gcd(&y) == 1 {
                out.push([x, y]);
            }
        }
    }
    out
});

fn ray(end: V2) -> Piece {
    Piece {
        ends: vec![(Base::Root(0), end)],
        shape: Arc::new(Shape::Ray),
    }
}

/// Packs the data a root step depends on apart from the lead position.
fn lead_key(ends: &[V2], points: u64, w: V2, rest: &[Root]) -> Option<Key> {
    let mut k = Key::new(points);
    k.push(-1)?;
    k.push_ends(ends)?;
    k.push(w[0])?;
    k.push(w[1])?;
    k.push_roots(rest)?;
    Some(k)
}

/// A functional for the hull test with its maxima over the other roots
/// and over the points.
struct Hull {
    l: V2,
    rest_top: Option<(i128, i128)>,
    /// Some other root at `rest_top` leaves upwards.
    rest_up: bool,
    points_top: Option<(i128, i128)>,
}

/// One way to split off an `A` side in a root step.
struct Cand {
    t_a: V2,
    a: Arc<Vec<Piece>>,
    joins: Arc<[Join]>,
    ra: Arc<[usize]>,
    rb: Arc<[usize]>,
    eb: Vec<V2>,
    sb: u64,
    next: OnceLock<Arc<Lead>>,
}

/// An end of slope `t` of solution `ai` (its `j`-th end) leaving `u`;
/// `k` approximates `det(u, t)` and `uf` approximates `u`.
struct Join {
    k: f64,
    uf: [f64; 2],
    ai: u32,
    j: u32,
    u: P2,
}

/// Float slack before the exact test decides.
fn slack(x: f64) -> f64 {
    1e-7 * (1.0 + x.abs())
}

fn det_f(a: [f64; 2], b: V2) -> f64 {
    a[0] * b[1] as f64 - a[1] * b[0] as f64
}

/// Everything a root step needs except the lead root's position.
struct Lead {
    w: V2,
    rest: Vec<Root>,
    hull: Vec<Hull>,
    cands: Vec<Cand>,
}

type JoinCache = FxHashMap<(Key, V2), Arc<[Join]>>;

struct Solver<'a> {
    points: &'a [P2],
    /// `(e, width)`: every edge slope `w` has `|det(e, w)| <= width`.
    widths: Vec<(V2, i64)>,
    /// Slopes, up to sign, an edge on a cycle can have.
    cycle_slopes: Vec<V2>,
    memo: Mutex<FxHashMap<Key, Arc<Vec<Piece>>>>,
    leads: Mutex<FxHashMap<Key, Arc<Lead>>>,
    joins: Mutex<JoinCache>,
    empty: Arc<Vec<Piece>>,
}

type Found = Result<Vec<Piece>, EnumError>;

impl<'a> Solver<'a> {
    fn solve(&self, key: &Problem, top: bool) -> Result<Arc<Vec<Piece>>, EnumError> {
        let Some(packed) = key.key() else {
            return Ok(Arc::new(self.compute(key, top)?));
        };
        if let Some(hit) = self.memo.lock().expect("memo lock").get(&packed) {
            return Ok(hit.clone());
        }
        let found = self.compute(key, top)?;
        let found = if found.is_empty() {
            self.empty.clone()
        } else {
            Arc::new(found)
        };
        self.memo.lock().expect("memo lock").insert(packed, found.clone());
        Ok(found)
    }

    fn compute(&self, key: &Problem, top: bool) -> Found {
        if sum(key.ends.iter().copied()) != sum(key.roots.iter().map(|r| r.dir)) {
            return Ok(Vec::new());
        }
        let np = key.points.count_ones() as usize;
        if np + 1 != key.ends.len() + key.genus as usize {
            return Ok(Vec::new());
        }
        let pair = key.roots.len() == 2 && key.roots[0].point.is_some() && key.roots[0].point == key.roots[1].point;
        if key.genus == 0 && !key.roots.is_empty() && (np == 0 || !pair) {
            if np == 0 && key.roots.len() == 1 {
                // a rigid piece without points is a single ray
                return Ok(vec![ray(key.ends[0])]);
            }
            let lead = self.lead(&key.ends, key.points, key.roots[0].dir, &key.roots[1..])?;
            return self.grow(key.roots[0].at, &lead);
        }
        if !key.roots.is_empty() && !self.hull_feasible(key)? {
            return Ok(Vec::new());
        }
        if np == 0 {
            return Ok(Vec::new());
        }
        self.point_cut(key, top)
    }

    /// Whether `w` can be the slope of an edge: its rotation must fit in
    /// the difference body of the Newton polygon.
    fn admissible(&self, w: V2) -> bool {
        w != [0, 0] && self.widths.iter().all(|&(e, width)| det(e, w).abs() <= width)
    }

    /// A necessary condition: for a functional `l` negative on every end,
    /// the maximum of `l` over the piece is attained at a root whose leg
    /// does not go up.
    fn hull_feasible(&self, key: &Problem) -> Result<bool, EnumError> {
        let dot = |l: V2, v: V2| l[0] * v[0] + l[1] * v[1];

        for &l in FUNCTIONALS.iter() {
            if !key.ends.iter().all(|&e| dot(l, e) < 0) {
                continue;
            }
            let values: Vec<(i128, i128)> = key.roots.iter().map(|r| r.at.dot(l)).collect();
            let top = *values
                .iter()
                .max_by(|a, b| cmp_frac(**a, **b))
                .expect("roots are present");
            for (r, &v) in key.roots.iter().zip(&values) {
                if cmp_frac(v, top).is_eq() && dot(l, r.dir) > 0 {
                    return Ok(false);
                }
            }
            for i in (0..self.points.len()).filter(|i| key.points >> i & 1 == 1) {
                if cmp_frac(self.points[i].dot(l), top).is_gt() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn run<T: Send + Sync>(&self, tasks: Vec<T>, top: bool, f: impl Fn(&T) -> Found + Send + Sync) -> Found {
        let results: Vec<Found> = if top {
            tasks.par_iter().map(&f).collect()
        } else {
            tasks.iter().map(&f).collect()
        };
        let mut out = Vec::new();
        for r in results {
            out.extend(r?);
        }
        Ok(out)
    }

    /// The root step data for a lead root of slope `w`, cached.
    fn lead(&self, ends: &[V2], points: u64, w: V2, rest: &[Root]) -> Result<Arc<Lead>, EnumError> {
        let packed = lead_key(ends, points, w, rest);
        if let Some(k) = &packed {
            if let Some(hit) = self.leads.lock().expect("lead lock").get(k) {
                return Ok(hit.clone());
            }
        }
        let lead = Arc::new(self.build_lead(ends, points, w, rest)?);
        if let Some(k) = packed {
            let mut leads = self.leads.lock().expect("lead lock");
            if leads.len() > LEAD_CACHE_CAP {
                leads.clear();
            }
            leads.insert(k, lead.clone());
        }
        Ok(lead)
    }

    fn build_lead(&self, ends: &[V2], points: u64, w: V2, rest: &[Root]) -> Result<Lead, EnumError> {
        let dot = |l: V2, v: V2| l[0] * v[0] + l[1] * v[1];
        let mut hull = Vec::new();
        for &l in FUNCTIONALS.iter() {
            if !ends.iter().all(|&e| dot(l, e) < 0) {
                continue;
            }
            let mut rest_top: Option<(i128, i128)> = None;
            let mut rest_up = false;
            for r in rest {
                let v = r.at.dot(l);
                let up = dot(l, r.dir) > 0;
                match rest_top.map(|t| cmp_frac(v, t)) {
                    None | Some(Ordering::Greater) => {
                        rest_top = Some(v);
                        rest_up = up;
                    }
                    Some(Ordering::Equal) => rest_up |= up,
                    Some(Ordering::Less) => {}
                }
            }
            let mut points_top: Option<(i128, i128)> = None;
            for i in (0..self.points.len()).filter(|i| points >> i & 1 == 1) {
                let v = self.points[i].dot(l);
                if points_top.is_none_or(|t| cmp_frac(v, t).is_gt()) {
                    points_top = Some(v);
                }
            }
            hull.push(Hull {
                l,
                rest_top,
                rest_up,
                points_top,
            });
        }

        let nrest = rest.len();
        let mut cands = Vec::new();
        let mut splits = Splits::new(ends);
        while let Some((ea, eb)) = splits.next() {
            if eb.is_empty() {
                continue;
            }
            for ra_mask in 0u64..1 << nrest {
                if ea.is_empty() && ra_mask == 0 {
                    continue;
                }
                let ra_dirs = (0..nrest).filter(|i| ra_mask >> i & 1 == 1).map(|i| rest[i].dir);
                let t_a = sub(sum(ra_dirs), sum(ea.iter().copied()));
                if !self.admissible(t_a) || !self.admissible(add(w, t_a)) || det(w, t_a) == 0 {
                    continue;
                }
                let (ra, rb) = indices(nrest, ra_mask, 1);
                let mut a_ends = ea.to_vec();
                a_ends.push(t_a);
                a_ends.sort_unstable();
                let a_roots: Vec<Root> = ra.iter().map(|&i| rest[i - 1]).collect();
                for sa in submasks_of_size(points, ea.len()) {
                    let packed = problem_key(0, &a_ends, sa, &a_roots);
                    let cached = packed.and_then(|k| self.memo.lock().expect("memo lock").get(&k).cloned());
                    let a = match cached {
                        Some(a) => a,
                        None => {
                            let a_key = Problem {
                                genus: 0,
                                ends: a_ends.clone(),
                                points: sa,
                                roots: a_roots.clone(),
                            };
                            self.solve(&a_key, false)?
                        }
                    };
                    if a.is_empty() {
                        continue;
                    }
                    let joins = match packed {
                        Some(k) => {
                            let hit = self.joins.lock().expect("join lock").get(&(k, t_a)).cloned();
                            match hit {
                                Some(j) => j,
                                None => {
                                    let j = self.join_list(&a, t_a, &a_roots);
                                    self.joins.lock().expect("join lock").insert((k, t_a), j.clone());
                                    j
                                }
                            }
                        }
                        None => self.join_list(&a, t_a, &a_roots),
                    };
                    if joins.is_empty() {
                        continue;
                    }
                    cands.push(Cand {
                        t_a,
                        a,
                        joins,
                        ra: ra.clone(),
                        rb: rb.clone(),
                        eb: eb.to_vec(),
                        sb: points & !sa,
                        next: OnceLock::new(),
                    });
                }
            }
        }
        Ok(Lead {
            w,
            rest: rest.to_vec(),
            hull,
            cands,
        })
    }

    /// The ends of slope `t` in `a`, sorted by `det(u, t)`.
    fn join_list(&self, a: &[Piece], t: V2, roots: &[Root]) -> Arc<[Join]> {
        let mut joins = Vec::new();
        for (ai, piece) in a.iter().enumerate() {
            for (j, &(base, slope)) in piece.ends.iter().enumerate() {
                if slope == t {
                    let u = match base {
                        Base::Local(p) => p,
                        Base::Root(k) => roots[k].at,
                        Base::Point(i) => self.points[i],
                    };
                    let uf = u.approx();
                    joins.push(Join {
                        k: det_f(uf, t),
                        uf,
                        ai: ai as u32,
                        j: j as u32,
                        u,
                    });
                }
            }
        }
        joins.sort_by(|x, y| x.k.total_cmp(&y.k));
        joins.into()
    }

    /// The hull test of `hull_feasible` for a lead root at `at`.
    fn lead_hull(&self, at: P2, lead: &Lead) -> Result<bool, EnumError> {
        for h in &lead.hull {
            let v = at.dot(h.l);
            let up = h.l[0] * lead.w[0] + h.l[1] * lead.w[1] > 0;
            let (top, bad) = match h.rest_top.map(|t| cmp_frac(v, t)) {
                None | Some(Ordering::Greater) => (v, up),
                Some(Ordering::Equal) => (v, up || h.rest_up),
                Some(Ordering::Less) => (h.rest_top.expect("compared"), h.rest_up),
            };
            if bad || h.points_top.is_some_and(|p| cmp_frac(p, top).is_gt()) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Root step: the lead root at `at` runs to a vertex `v` where it
    /// meets the free end of an `A` side; a `B` side continues from `v`.
    fn grow(&self, at: P2, lead: &Lead) -> Found {
        if !self.lead_hull(at, lead)? {
            return Ok(Vec::new());
        }
        let w = lead.w;
        let at_f = at.approx();
        let b0 = det_f(at_f, w);
        let mut out = Vec::new();
        for cand in &lead.cands {
            let t_a = cand.t_a;
            let d = det(w, t_a);
            let dir_b = add(w, t_a);
            let single = cand.sb == 0 && cand.rb.is_empty();
            // mu and lambda below are det(u, t_a) - det(at, t_a) and
            // det(u, w) - det(at, w); both need the sign of d
            let a0 = det_f(at_f, t_a);
            let joins = if d > 0 {
                let lo = a0 - slack(a0);
                &cand.joins[cand.joins.partition_point(|x| x.k < lo)..]
            } else {
                let hi = a0 + slack(a0);
                &cand.joins[..cand.joins.partition_point(|x| x.k <= hi)]
            };
            for &Join { uf, ai, j, u, .. } in joins {
                let (ai, j) = (ai as usize, j as usize);
                let l = det_f(uf, w) - b0;
                if (d > 0 && l < -slack(b0)) || (d < 0 && l > slack(b0)) {
                    continue;
                }
                // u + lambda t_a = at + mu w; lambda and mu have the signs
                // of these numerators times det
                let ([dx, dy], den) = at.diff(u);
                if dx == 0 && dy == 0 {
                    // both legs leave the same marked point
                    continue;
                }
                let lambda = overflow(dy.checked_mul(i128::from(w[0])).zip(dx.checked_mul(i128::from(w[1]))))?;
                let lambda = lambda.0 - lambda.1;
                let mu = overflow(
                    dy.checked_mul(i128::from(t_a[0]))
                        .zip(dx.checked_mul(i128::from(t_a[1]))),
                )?;
                let mu = mu.0 - mu.1;
                let behind = |x: i128| x != 0 && (x < 0) != (d < 0);
                if behind(lambda) || behind(mu) {
                    continue;
                }
                if lambda == 0 || mu == 0 {
                    return Err(EnumError::NonGenericConfiguration(
                        "a new vertex lands on an old one".into(),
                    ));
                }
                let v = at.advance(mu, overflow(den.checked_mul(i128::from(d)))?, w)?;
                let b_sols = if single {
                    Arc::new(vec![ray(dir_b)])
                } else {
                    let next = match cand.next.get() {
                        Some(next) => next.clone(),
                        None => {
                            let rb: Vec<Root> = cand.rb.iter().map(|&i| lead.rest[i - 1]).collect();
                            let next = self.lead(&cand.eb, cand.sb, dir_b, &rb)?;
                            let _ = cand.next.set(next.clone());
                            next
                        }
                    };
                    let found = self.grow(v, &next)?;
                    if found.is_empty() {
                        continue;
                    }
                    Arc::new(found)
                };
                let a = &cand.a[ai];
                for (bi, b) in b_sols.iter().enumerate() {
                    let mut ends: Vec<(Base, V2)> = Vec::with_capacity(a.ends.len() + b.ends.len() - 1);
                    for (k, &(base, s)) in a.ends.iter().enumerate() {
                        if k != j {
                            let base = match base {
                                Base::Root(k) => Base::Root(cand.ra[k]),
                                x => x,
                            };
                            ends.push((base, s));
                        }
                    }
                    for &(base, s) in &b.ends {
                        let base = match base {
                            Base::Root(0) => Base::Local(v),
                            Base::Root(k) => Base::Root(cand.rb[k - 1]),
                            x => x,
                        };
                        ends.push((base, s));
                    }
                    let shape = Shape::Join {
                        v,
                        w,
                        t_a,
                        a: (cand.a.clone(), ai),
                        j,
                        b: (b_sols.clone(), bi),
                        ra: cand.ra.clone(),
                        rb: cand.rb.clone(),
                    };
                    out.push(Piece {
                        ends,
                        shape: Arc::new(shape),
                    });
                }
            }
        }
        Ok(out)
    }

    /// Positive genus at the top: for each point `p` and cycle slope `w`,
    /// the curves in which `p` lies on a non-separating edge of slope `w`.
    /// A curve is found once per such point.
    fn cycle_cuts(&self, key: &Problem) -> Result<Vec<(usize, Piece)>, EnumError> {
        let tasks: Vec<(usize, V2)> = (0..self.points.len())
            .flat_map(|p| self.cycle_slopes.iter().map(move |&w| (p, w)))
            .collect();
        let found: Vec<Result<Vec<(usize, Piece)>, EnumError>> = tasks
            .par_iter()
            .map(|&(p, w)| {
                let at = self.points[p];
                let roots = vec![
                    Root {
                        at,
                        dir: w,
                        point: Some(p),
                    },
                    Root {
                        at,
                        dir: neg(w),
                        point: Some(p),
                    },
                ];
                let k = Problem {
                    genus: key.genus - 1,
                    ends: key.ends.clone(),
                    points: key.points & !(1 << p),
                    roots,
                };
                let sols = self.solve(&k, false)?;
                Ok((0..sols.len())
                    .map(|si| {
                        let ends = sols[si]
                            .ends
                            .iter()
                            .map(|&(x, s)| match x {
                                Base::Root(_) => (Base::Point(p), s),
                                x => (x, s),
                            })
                            .collect();
                        (
                            p,
                            Piece {
                                ends,
                                shape: Arc::new(Shape::Cycle {
                                    p,
                                    nr: 0,
                                    s: (sols.clone(), si),
                                }),
                            },
                        )
                    })
                    .collect())
            })
            .collect();
        let mut out = Vec::new();
        for f in found {
            out.extend(f?);
        }
        Ok(out)
    }

    fn point_cut(&self, key: &Problem, top: bool) -> Found {
        let p = key.points.trailing_zeros() as usize;
        let rest = key.points & !(1 << p);
        let p_at = self.points[p];
        let nr = key.roots.len();
        let mut tasks = Vec::new();
        let n_rest = rest.count_ones() as usize;
        let mut splits = Splits::new(&key.ends);
        while let Some((e1, e2)) = splits.next() {
            for r_mask in 0u64..1 << nr {
                let r1_dirs = (0..nr).filter(|i| r_mask >> i & 1 == 1).map(|i| key.roots[i].dir);
                let w1 = sub(sum(e1.iter().copied()), sum(r1_dirs));
                if !self.admissible(w1) {
                    continue;
                }
                let r2_mask = !r_mask & ((1 << nr) - 1);
                for g1 in 0..=key.genus {
                    // |s1| + 1 = |e1| + g1
                    let Some(k1) = (e1.len() + g1 as usize).checked_sub(1) else {
                        continue;
                    };
                    if k1 > n_rest {
                        continue;
                    }
                    let g2 = key.genus - g1;
                    for s1 in submasks_of_size(rest, k1) {
                        let s2 = rest & !s1;
                        // each unordered split once
                        if (e1, s1, r_mask, g1) >= (e2, s2, r2_mask, g2) {
                            continue;
                        }
                        tasks.push((e1.to_vec(), e2.to_vec(), s1, r_mask, g1, w1));
                    }
                }
            }
        }
        let mut out = self.run(tasks, top, |(e1, e2, s1, r_mask, g1, w1)| {
            let (r1, r2) = indices(nr, *r_mask, 0);
            let side = |g, ends: &Vec<V2>, pts: u64, ridx: &[usize], w: V2| {
                let mut roots: Vec<Root> = ridx.iter().map(|&i| key.roots[i]).collect();
                roots.push(Root {
                    at: p_at,
                    dir: w,
                    point: Some(p),
                });
                Problem {
                    genus: g,
                    ends: ends.clone(),
                    points: pts,
                    roots,
                }
            };
            let sols1 = self.solve(&side(*g1, e1, *s1, &r1, *w1), false)?;
            if sols1.is_empty() {
                return Ok(Vec::new());
            }
            let sols2 = self.solve(&side(key.genus - g1, e2, rest & !s1, &r2, neg(*w1)), false)?;
            let map = |base: Base, n: usize, idx: &[usize]| match base {
                Base::Root(k) if k == n => Base::Point(p),
                Base::Root(k) => Base::Root(idx[k]),
                x => x,
            };
            let mut out = Vec::new();
            for (ai, a) in sols1.iter().enumerate() {
                for (bi, b) in sols2.iter().enumerate() {
                    let mut ends: Vec<(Base, V2)> = a.ends.iter().map(|&(x, s)| (map(x, r1.len(), &r1), s)).collect();
                    ends.extend(b.ends.iter().map(|&(x, s)| (map(x, r2.len(), &r2), s)));
                    let shape = Shape::Cut {
                        p,
                        a: (sols1.clone(), ai),
                        b: (sols2.clone(), bi),
                        r1: r1.clone(),
                        r2: r2.clone(),
                    };
                    out.push(Piece {
                        ends,
                        shape: Arc::new(shape),
                    });
                }
            }
            Ok(out)
        })?;

        if key.genus > 0 {
            // The point sits on a cycle edge of slope +-w.
            let cyc = self.run(self.cycle_slopes.clone(), top, |&w| {
                let mut roots = key.roots.clone();
                roots.push(Root {
                    at: p_at,
                    dir: w,
                    point: Some(p),
                });
                roots.push(Root {
                    at: p_at,
                    dir: neg(w),
                    point: Some(p),
                });
                let k = Problem {
                    genus: key.genus - 1,
                    ends: key.ends.clone(),
                    points: rest,
                    roots,
                };
                let sols = self.solve(&k, false)?;
                Ok((0..sols.len())
                    .map(|si| {
                        let ends = sols[si]
                            .ends
                            .iter()
                            .map(|&(x, s)| match x {
                                Base::Root(k) if k >= nr => (Base::Point(p), s),
                                x => (x, s),
                            })
                            .collect();
                        Piece {
                            ends,
                            shape: Arc::new(Shape::Cycle {
                                p,
                                nr,
                                s: (sols.clone(), si),
                            }),
                        }
                    })
                    .collect())
            })?;
            out.extend(cyc);
        }
        Ok(out)
    }
}

/// The product over trivalent vertices of `|det|` of two flag slopes.
/// Bivalent vertices carrying a contracted leg between opposite edges
/// contribute 1.
pub fn mikhalkin_multiplicity(map: &TropicalMap) -> Result<BigInt, EnumError> {
    let ty = map.combinatorial_type();
    let mut m = BigInt::one();
    for v in 0..ty.num_vertices() {
        let flags = ty.flags(v);
        let moving: Vec<&Vec<i64>> = flags
            .iter()
            .map(|(_, s)| s)
            .filter(|s| s.iter().any(|&x| x != 0))
            .collect();
        let contracted = flags.len() - moving.len();
        match (moving.len(), contracted) {
            (3, 0) => {
                let d = moving[0][0] * moving[1][1] - moving[0][1] * moving[1][0];
                m *= BigInt::from(d.abs());
            }
            (2, 1) if moving[0].iter().zip(moving[1]).all(|(a, b)| a + b == 0) => {}
            _ => return Err(EnumError::NotTrivalent(v)),
        }
    }
    Ok(m)
}

/// All rigid genus-`genus` curves whose unbounded ends are the nonzero
/// `columns` and whose contracted legs pass through `points`, in order.
/// Ends are labelled by their column position plus one; the point `i` gets
/// label `columns.len() + i + 1`.
pub fn enumerate_curves(columns: &[Vec<i64>], genus: u32, points: &[Vec<Q>]) -> Result<Vec<Solution>, EnumError> {
    let ends: Vec<V2> = columns.iter().map(|c| [c[0], c[1]]).collect();
    let expected = ends.len() + genus as usize - 1;
    if points.len() != expected {
        return Err(EnumError::PointCount {
            expected,
            found: points.len(),
        });
    }
    let scale = points.iter().flatten().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let mut pts: Vec<P2> = Vec::with_capacity(points.len());
    for p in points {
        let c = |k: usize| {
            (&p[k] * Q::from_integer(scale.clone()))
                .to_integer()
                .to_i64()
                .ok_or(EnumError::Overflow)
        };
        pts.push(P2::int(c(0)?, c(1)?));
    }
    let widths: Vec<(V2, i64)> = ends
        .iter()
        .map(|&e| (e, ends.iter().map(|&f| det(e, f).abs()).sum::<i64>() / 2))
        .collect();
    if pts.len() > 63 {
        return Err(EnumError::TooManyPoints(pts.len()));
    }
    let solver = Solver {
        points: &pts,
        widths,
        cycle_slopes: cycle_slopes(&ends),
        memo: Mutex::default(),
        leads: Mutex::default(),
        joins: Mutex::default(),
        empty: Arc::new(Vec::new()),
    };
    let mut sorted_ends = ends.clone();
    sorted_ends.sort_unstable();
    let key = Problem {
        genus,
        ends: sorted_ends,
        points: (1u64 << pts.len()) - 1,
        roots: vec![],
    };
    let flats: Vec<Flat> = if genus == 0 {
        solver.solve(&key, true)?.iter().map(flatten).collect()
    } else {
        let found = solver.cycle_cuts(&key)?;
        found
            .iter()
            .map(|(p, piece)| (p, flatten(piece)))
            .filter(|(p, f)| first_cycle_point(f, pts.len()) == Some(**p))
            .map(|(_, f)| f)
            .collect()
    };
    drop(solver);
    let points: Vec<[Q; 2]> = points.iter().map(|p| [p[0].clone(), p[1].clone()]).collect();
    flats.iter().map(|f| assemble(f, &points, &scale, &ends)).collect()
}

/// Lattice points of the Newton polygon whose boundary is made of the ends
/// turned by a quarter, as `(all, interior)`.
fn newton_lattice(ends: &[V2]) -> (Vec<V2>, Vec<V2>) {
    let mut sides: Vec<V2> = ends.iter().map(|e| [-e[1], e[0]]).collect();
    let half = |v: &V2| if v[1] > 0 || (v[1] == 0 && v[0] > 0) { 0 } else { 1 };
    sides.sort_by(|a, b| half(a).cmp(&half(b)).then_with(|| det(*b, *a).cmp(&0)));
    let mut corners = vec![[0i64, 0]];
    for s in &sides {
        corners.push(add(*corners.last().expect("nonempty"), *s));
    }
    let (lo, hi) = corners.iter().fold(([i64::MAX; 2], [i64::MIN; 2]), |(lo, hi), c| {
        ([lo[0].min(c[0]), lo[1].min(c[1])], [hi[0].max(c[0]), hi[1].max(c[1])])
    });
    let (mut all, mut interior) = (Vec::new(), Vec::new());
    for x in lo[0]..=hi[0] {
        for y in lo[1]..=hi[1] {
            let sides_at = sides.iter().zip(&corners).map(|(s, c)| det(*s, sub([x, y], *c)));
            let (mut inside, mut strict) = (true, true);
            for t in sides_at {
                inside &= t >= 0;
                strict &= t > 0;
            }
            if inside {
                all.push([x, y]);
            }
            if strict {
                interior.push([x, y]);
            }
        }
    }
    (all, interior)
}

/// An edge on a cycle borders a bounded region, so it is dual to a segment
/// from an interior lattice point of the Newton polygon. Normalized so the
/// first nonzero coordinate is positive.
fn cycle_slopes(ends: &[V2]) -> Vec<V2> {
    let (all, interior) = newton_lattice(ends);
    let mut out: Vec<V2> = Vec::new();
    for i in &interior {
        for p in &all {
            let u = sub(*p, *i);
            let w = [-u[1], u[0]];
            let w = if w[0] > 0 || (w[0] == 0 && w[1] > 0) { w } else { neg(w) };
            if w != [0, 0] && !out.contains(&w) {
                out.push(w);
            }
        }
    }
    out.sort_unstable();
    out
}

/// The lowest point whose edge is bounded on both sides and does not
/// separate the curve.
fn first_cycle_point(flat: &Flat, np: usize) -> Option<usize> {
    let id = |n: Node| match n {
        Node::Point(i) => i,
        Node::Local(i) => np + i,
        Node::Root(_) => unreachable!("top-level pieces have no roots"),
    };
    let total = np + flat.locals.len();
    (0..np).find(|&p| {
        if flat.ends.iter().any(|&(n, _)| id(n) == p) {
            return false;
        }
        let mut parent: Vec<usize> = (0..total).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(a, b, _) in &flat.edges {
            let (a, b) = (id(a), id(b));
            if a != p && b != p {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
        let root = find(&mut parent, if p == 0 { 1 } else { 0 });
        (0..total).filter(|&v| v != p).all(|v| find(&mut parent, v) == root)
    })
}

fn assemble(piece: &Flat, points: &[[Q; 2]], scale: &BigInt, columns: &[V2]) -> Result<Solution, EnumError> {
    let np = points.len();
    let locals: Vec<[Q; 2]> = piece.locals.iter().map(|p| p.to_q(scale)).collect();
    let mut order: Vec<usize> = (0..locals.len()).collect();
    order.sort_by(|&a, &b| locals[a].cmp(&locals[b]));
    let mut local_index = vec![0; piece.locals.len()];
    for (rank, &i) in order.iter().enumerate() {
        local_index[i] = np + rank;
    }
    let vid = |n: Node| match n {
        Node::Point(i) => i,
        Node::Local(i) => local_index[i],
        Node::Root(_) => unreachable!("top-level pieces have no roots"),
    };
    let mut positions: Vec<[Q; 2]> = points.to_vec();
    positions.extend(order.iter().map(|&i| locals[i].clone()));
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            if positions[i] == positions[j] {
                return Err(EnumError::NonGenericConfiguration("two vertices coincide".into()));
            }
        }
    }

    let mut edges: Vec<(Edge, Q)> = Vec::new();
    for &(a, b, s) in &piece.edges {
        let (mut a, mut b, mut s) = (vid(a), vid(b), s);
        if a > b {
            std::mem::swap(&mut a, &mut b);
            s = neg(s);
        }
        let k = if s[0] != 0 { 0 } else { 1 };
        let len = (&positions[b][k] - &positions[a][k]) / qi(s[k]);
        edges.push((
            Edge {
                a,
                b,
                slope: s.to_vec(),
            },
            len,
        ));
    }
    edges.sort_by(|x, y| x.0.cmp(&y.0).then_with(|| x.1.cmp(&y.1)));

    let mut ends: Vec<(usize, V2)> = piece.ends.iter().map(|&(n, s)| (vid(n), s)).collect();
    ends.sort();
    let mut used = vec![false; columns.len()];
    let mut legs = Vec::new();
    for (v, s) in ends {
        let j = (0..columns.len())
            .find(|&j| !used[j] && columns[j] == s)
            .expect("end slopes match the columns");
        used[j] = true;
        legs.push(Leg {
            vertex: v,
            marking: j + 1,
            slope: s.to_vec(),
        });
    }
    for i in 0..np {
        legs.push(Leg {
            vertex: i,
            marking: columns.len() + i + 1,
            slope: vec![0, 0],
        });
    }
    legs.sort_by_key(|l| l.marking);

    let genera = vec![0; positions.len()];
    let (edges, lengths): (Vec<Edge>, Vec<Q>) = edges.into_iter().unzip();
    let ty = CombinatorialType::new(2, genera, edges, legs)?;
    let positions = positions.into_iter().map(|p| p.to_vec()).collect();
    let map = TropicalMap::new(ty, lengths, positions)?;
    let multiplicity = Q::from_integer(mikhalkin_multiplicity(&map)?);
    Ok(Solution { map, multiplicity })
}

/// Degree-`d` genus-`g` plane curves through the configuration.
pub fn enumerate_plane_curves(d: u32, g: u32, config: &PointConfiguration) -> Result<EnumerationResult, EnumError> {
    if d == 0 {
        return Err(EnumError::ZeroDegree);
    }
    let contact = severi_contact_data(d, g);
    let columns: Vec<Vec<i64>> = contact.without_trivial().columns().to_vec();
    let solutions = enumerate_curves(&columns, g, &config.points)?;
    Ok(EnumerationResult::from_solutions(solutions))
}

/// Seed used for the `attempt`-th resample.
pub fn attempt_seed(seed: u64, attempt: u32) -> u64 {
    seed.wrapping_add(u64::from(attempt).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Enumerates at seeded configurations until one is generic.
pub fn severi_degree_with_retries(
    d: u32,
    g: u32,
    seed: u64,
    max_attempts: u32,
) -> Result<(EnumerationResult, PointConfiguration), EnumError> {
    if d == 0 {
        return Err(EnumError::ZeroDegree);
    }
    let n = (3 * d - 1 + g) as usize;
    for attempt in 0..max_attempts {
        let config = PointConfiguration::random(n, 2, attempt_seed(seed, attempt));
        match enumerate_plane_curves(d, g, &config) {
            Ok(result) => return Ok((result, config)),
            Err(EnumError::NonGenericConfiguration(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(EnumError::ResamplingExhausted(max_attempts))
}

pub const DEFAULT_ATTEMPTS: u32 = 16;

/// The number of degree-`d` genus-`g` plane curves through `3d - 1 + g`
/// general points.
pub fn severi_degree(d: u32, g: u32, seed: u64) -> Result<BigInt, EnumError> {
    let (result, _) = severi_degree_with_retries(d, g, seed, DEFAULT_ATTEMPTS)?;
    debug_assert!(result.total.denom().is_one());
    Ok(result.total.to_integer())
}
