//! Abstract tropical curves with integer slopes, and their balanced maps to
//! `Q^r`.
//!
//! Half-edges are the basic incidence notion: an edge `(a, b)` contributes
//! the flag `slope` at `a` and `-slope` at `b`; a leg is a single flag.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::fan::{fmt_vec, Fan, FanError};
use crate::rational::{fmt_q, parse_q, q, Q};

pub type Slope = Vec<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("vertex {0} does not exist")]
    UnknownVertex(usize),
    #[error("slope {0} has the wrong number of coordinates")]
    SlopeRank(String),
    #[error("the underlying graph is disconnected")]
    Disconnected,
    #[error("marking {0} appears more than once")]
    DuplicateMarking(usize),
    #[error("marking labels start at 1")]
    ZeroMarking,
    #[error("marking {0} does not exist")]
    UnknownMarking(usize),
    #[error("the curve is not a tree")]
    NotATree,
    #[error("not balanced at vertex {0}")]
    NotBalanced(usize),
    #[error("edge {0} has a nonpositive length")]
    NonPositiveLength(usize),
    #[error("expected {expected} edge lengths, got {found}")]
    LengthCount { expected: usize, found: usize },
    #[error("edge {0} is incompatible with its endpoint positions")]
    EdgeMismatch(usize),
    #[error("cone assignment has the wrong shape")]
    ConeShape,
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error("curve file line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// An edge `a -> b`; `slope` is the outgoing slope at `a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub slope: Slope,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Leg {
    pub vertex: usize,
    pub marking: usize,
    pub slope: Slope,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flag {
    Edge { edge: usize, forward: bool },
    Leg(usize),
}

/// A traversed edge; `forward` means from `a` to `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DirectedEdge {
    pub edge: usize,
    pub forward: bool,
}

/// Cone indices (in some fan) for every vertex, edge and leg.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConeAssignment {
    pub vertex: Vec<usize>,
    pub edge: Vec<usize>,
    pub leg: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CombinatorialType {
    rank: usize,
    genera: Vec<u32>,
    edges: Vec<Edge>,
    legs: Vec<Leg>,
    cones: Option<ConeAssignment>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BalancingReport {
    pub balanced: bool,
    pub residuals: Vec<Slope>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabilityViolation {
    /// A genus-0 vertex with two opposite flags, all three cones equal.
    LinearBivalent(usize),
    /// A contracted genus-0 vertex with fewer than three flags.
    Contracted(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityReport {
    pub stable: bool,
    pub violations: Vec<StabilityViolation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Anchor {
    Vertex(usize),
    Marking(usize),
}

fn is_zero_slope(s: &[i64]) -> bool {
    s.iter().all(|&x| x == 0)
}

impl CombinatorialType {
    pub fn new(rank: usize, genera: Vec<u32>, edges: Vec<Edge>, legs: Vec<Leg>) -> Result<Self, CurveError> {
        let nv = genera.len();
        for e in &edges {
            for v in [e.a, e.b] {
                if v >= nv {
                    return Err(CurveError::UnknownVertex(v));
                }
            }
            if e.slope.len() != rank {
                return Err(CurveError::SlopeRank(fmt_vec(&e.slope)));
            }
        }
        let mut seen = BTreeSet::new();
        for l in &legs {
            if l.vertex >= nv {
                return Err(CurveError::UnknownVertex(l.vertex));
            }
            if l.slope.len() != rank {
                return Err(CurveError::SlopeRank(fmt_vec(&l.slope)));
            }
            if l.marking == 0 {
                return Err(CurveError::ZeroMarking);
            }
            if !seen.insert(l.marking) {
                return Err(CurveError::DuplicateMarking(l.marking));
            }
        }
        let t = Self {
            rank,
            genera,
            edges,
            legs,
            cones: None,
        };
        if nv == 0 || !t.is_connected() {
            return Err(CurveError::Disconnected);
        }
        Ok(t)
    }

    pub fn with_cones(mut self, cones: ConeAssignment) -> Result<Self, CurveError> {
        if cones.vertex.len() != self.genera.len()
            || cones.edge.len() != self.edges.len()
            || cones.leg.len() != self.legs.len()
        {
            return Err(CurveError::ConeShape);
        }
        self.cones = Some(cones);
        Ok(self)
    }

    pub fn without_cones(mut self) -> Self {
        self.cones = None;
        self
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn num_vertices(&self) -> usize {
        self.genera.len()
    }

    pub fn genera(&self) -> &[u32] {
        &self.genera
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn cones(&self) -> Option<&ConeAssignment> {
        self.cones.as_ref()
    }

    pub fn first_betti(&self) -> usize {
        self.edges.len() + 1 - self.genera.len()
    }

    pub fn genus(&self) -> u32 {
        self.first_betti() as u32 + self.genera.iter().sum::<u32>()
    }

    pub fn is_tree(&self) -> bool {
        self.first_betti() == 0
    }

    pub fn leg_of_marking(&self, marking: usize) -> Option<usize> {
        self.legs.iter().position(|l| l.marking == marking)
    }

    fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = vec![false; self.genera.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(w, _) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Neighbours of each vertex with the directed edge leading there.
    fn adjacency(&self) -> Vec<Vec<(usize, DirectedEdge)>> {
        let mut adj = vec![Vec::new(); self.genera.len()];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.a].push((e.b, DirectedEdge { edge: i, forward: true }));
            adj[e.b].push((
                e.a,
                DirectedEdge {
                    edge: i,
                    forward: false,
                },
            ));
        }
        adj
    }

    /// Outgoing flags at `v` with their slopes.
    pub fn flags(&self, v: usize) -> Vec<(Flag, Slope)> {
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.a == v {
                out.push((Flag::Edge { edge: i, forward: true }, e.slope.clone()));
            }
            if e.b == v {
                out.push((
                    Flag::Edge {
                        edge: i,
                        forward: false,
                    },
                    e.slope.iter().map(|x| -x).collect(),
                ));
            }
        }
        for (i, l) in self.legs.iter().enumerate() {
            if l.vertex == v {
                out.push((Flag::Leg(i), l.slope.clone()));
            }
        }
        out
    }

    pub fn balancing(&self) -> BalancingReport {
        let residuals: Vec<Slope> = (0..self.genera.len())
            .map(|v| {
                let mut r = vec![0; self.rank];
                for (_, s) in self.flags(v) {
                    for (x, y) in r.iter_mut().zip(&s) {
                        *x += y;
                    }
                }
                r
            })
            .collect();
        BalancingReport {
            balanced: residuals.iter().all(|r| is_zero_slope(r)),
            residuals,
        }
    }

    fn flag_cone(&self, flag: Flag) -> Option<usize> {
        let c = self.cones.as_ref()?;
        Some(match flag {
            Flag::Edge { edge, .. } => c.edge[edge],
            Flag::Leg(l) => c.leg[l],
        })
    }

    /// Merges the endpoints of edge `e`. Contracting a loop raises the genus
    /// of its vertex.
    pub fn contract_edge(&self, e: usize) -> Self {
        let Edge { a, b, .. } = self.edges[e].clone();
        let mut genera = self.genera.clone();
        let relabel = |v: usize| -> usize {
            let v = if v == b { a } else { v };
            if a != b && v > b {
                v - 1
            } else {
                v
            }
        };
        if a == b {
            genera[a] += 1;
        } else {
            genera[a] += genera[b];
            genera.remove(b);
        }
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != e)
            .map(|(_, x)| Edge {
                a: relabel(x.a),
                b: relabel(x.b),
                slope: x.slope.clone(),
            })
            .collect();
        let legs = self
            .legs
            .iter()
            .map(|l| Leg {
                vertex: relabel(l.vertex),
                marking: l.marking,
                slope: l.slope.clone(),
            })
            .collect();
        Self {
            rank: self.rank,
            genera,
            edges,
            legs,
            cones: None,
        }
    }
}

/// Balancing residuals of the type underlying `map`.
pub fn balancing_check(map: &TropicalMap) -> BalancingReport {
    map.ty.balancing()
}

/// Stability of every vertex. Without cone data all cones are taken to
/// coincide, so every linear bivalent vertex is unstable.
pub fn stability_check(ty: &CombinatorialType) -> Result<StabilityReport, CurveError> {
    let bal = ty.balancing();
    if let Some(v) = bal.residuals.iter().position(|r| !is_zero_slope(r)) {
        return Err(CurveError::NotBalanced(v));
    }
    let mut violations = Vec::new();
    for v in 0..ty.num_vertices() {
        let flags = ty.flags(v);
        let genus = ty.genera[v];
        if flags.iter().all(|(_, s)| is_zero_slope(s)) {
            if genus == 0 && flags.len() < 3 {
                violations.push(StabilityViolation::Contracted(v));
            }
            continue;
        }
        if genus == 0 && flags.len() == 2 {
            let (f0, s0) = &flags[0];
            let (f1, s1) = &flags[1];
            let opposite = s0.iter().zip(s1).all(|(x, y)| x + y == 0);
            if opposite {
                let same_cones = match &ty.cones {
                    None => true,
                    Some(c) => {
                        let vc = c.vertex[v];
                        ty.flag_cone(*f0) == Some(vc) && ty.flag_cone(*f1) == Some(vc)
                    }
                };
                if same_cones {
                    violations.push(StabilityViolation::LinearBivalent(v));
                }
            }
        }
    }
    Ok(StabilityReport {
        stable: violations.is_empty(),
        violations,
    })
}

/// The unique simple path from `a` to `b` in a tree.
pub fn tree_path(ty: &CombinatorialType, a: usize, b: usize) -> Result<Vec<DirectedEdge>, CurveError> {
    for v in [a, b] {
        if v >= ty.num_vertices() {
            return Err(CurveError::UnknownVertex(v));
        }
    }
    if !ty.is_tree() {
        return Err(CurveError::NotATree);
    }
    let adj = ty.adjacency();
    let mut parent: Vec<Option<(usize, DirectedEdge)>> = vec![None; ty.num_vertices()];
    let mut seen = vec![false; ty.num_vertices()];
    let mut queue = VecDeque::from([a]);
    seen[a] = true;
    while let Some(v) = queue.pop_front() {
        for &(w, de) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some((v, de));
                queue.push_back(w);
            }
        }
    }
    let mut path = Vec::new();
    let mut v = b;
    while v != a {
        let (p, de) = parent[v].expect("trees are connected");
        path.push(de);
        v = p;
    }
    path.reverse();
    Ok(path)
}

/// A combinatorial type with edge lengths and vertex positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TropicalMap {
    ty: CombinatorialType,
    lengths: Vec<Q>,
    positions: Vec<Vec<Q>>,
}

impl TropicalMap {
    pub fn new(ty: CombinatorialType, lengths: Vec<Q>, positions: Vec<Vec<Q>>) -> Result<Self, CurveError> {
        check_lengths(&ty, &lengths)?;
        if positions.len() != ty.num_vertices() || positions.iter().any(|p| p.len() != ty.rank) {
            return Err(CurveError::SlopeRank("vertex position".into()));
        }
        let m = Self { ty, lengths, positions };
        if let Some(e) = m.edge_residuals().iter().position(|r| r.iter().any(|x| !x.is_zero())) {
            return Err(CurveError::EdgeMismatch(e));
        }
        Ok(m)
    }

    pub fn combinatorial_type(&self) -> &CombinatorialType {
        &self.ty
    }

    pub fn lengths(&self) -> &[Q] {
        &self.lengths
    }

    pub fn positions(&self) -> &[Vec<Q>] {
        &self.positions
    }

    pub fn marking_position(&self, marking: usize) -> Option<&[Q]> {
        let l = self.ty.leg_of_marking(marking)?;
        Some(&self.positions[self.ty.legs[l].vertex])
    }

    /// `pos(b) - pos(a) - length * slope` for every edge.
    pub fn edge_residuals(&self) -> Vec<Vec<Q>> {
        self.ty
            .edges
            .iter()
            .zip(&self.lengths)
            .map(|(e, len)| {
                (0..self.ty.rank)
                    .map(|i| &self.positions[e.b][i] - &self.positions[e.a][i] - len * q(e.slope[i]))
                    .collect()
            })
            .collect()
    }

    pub fn translate(&self, t: &[Q]) -> Self {
        let positions = self
            .positions
            .iter()
            .map(|p| p.iter().zip(t).map(|(x, y)| x + y).collect())
            .collect();
        Self {
            ty: self.ty.clone(),
            lengths: self.lengths.clone(),
            positions,
        }
    }

    /// Records the cone of the target fan containing each vertex, each edge
    /// (at its midpoint) and each leg (eventually).
    pub fn assign_cones(&self, fan: &Fan) -> Result<CombinatorialType, CurveError> {
        let vertex = self
            .positions
            .iter()
            .map(|p| fan.find_cone(p).map(|c| c.0))
            .collect::<Result<Vec<_>, _>>()?;
        let two = q(2);
        let edge = self
            .ty
            .edges
            .iter()
            .map(|e| {
                let mid: Vec<Q> = self.positions[e.a]
                    .iter()
                    .zip(&self.positions[e.b])
                    .map(|(x, y)| (x + y) / &two)
                    .collect();
                fan.find_cone(&mid).map(|c| c.0)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let leg = self
            .ty
            .legs
            .iter()
            .map(|l| eventual_cone(fan, &self.positions[l.vertex], &l.slope))
            .collect::<Result<Vec<_>, _>>()?;
        self.ty.clone().with_cones(ConeAssignment { vertex, edge, leg })
    }

    /// Curve file text with explicit vertex positions.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (v, g) in self.ty.genera.iter().enumerate() {
            writeln!(s, "vertex {v} genus {g} at {}", join_q(&self.positions[v])).unwrap();
        }
        for (e, len) in self.ty.edges.iter().zip(&self.lengths) {
            writeln!(
                s,
                "edge {} {} length {} slope {}",
                e.a,
                e.b,
                fmt_q(len),
                join_i(&e.slope)
            )
            .unwrap();
        }
        for l in &self.ty.legs {
            writeln!(s, "leg {} marking {} slope {}", l.vertex, l.marking, join_i(&l.slope)).unwrap();
        }
        s
    }

    /// Parses a curve file. Vertex positions come either from `at` clauses
    /// on every vertex line or, for trees, from an `anchor <v> at <coords>`
    /// line (default: vertex 0 at the origin).
    pub fn parse(text: &str) -> Result<Self, CurveError> {
        parse_curve(text)
    }
}

fn join_q(v: &[Q]) -> String {
    v.iter().map(fmt_q).collect::<Vec<_>>().join(" ")
}

fn join_i(v: &[i64]) -> String {
    v.iter().map(i64::to_string).collect::<Vec<_>>().join(" ")
}

fn check_lengths(ty: &CombinatorialType, lengths: &[Q]) -> Result<(), CurveError> {
    if lengths.len() != ty.edges.len() {
        return Err(CurveError::LengthCount {
            expected: ty.edges.len(),
            found: lengths.len(),
        });
    }
    if let Some(e) = lengths.iter().position(|l| !l.is_positive()) {
        return Err(CurveError::NonPositiveLength(e));
    }
    Ok(())
}

/// The cone whose relative interior contains `p + t s` for all large `t`.
pub fn eventual_cone(fan: &Fan, p: &[Q], s: &[i64]) -> Result<usize, CurveError> {
    let s: Vec<Q> = s.iter().map(|&x| q(x)).collect();
    for i in 0..fan.num_cones() {
        let cone = fan.cone(i);
        let (Some(c0), Some(c1)) = (cone.coordinates(p), cone.coordinates(&s)) else {
            continue;
        };
        if c0
            .iter()
            .zip(&c1)
            .all(|(a, b)| b.is_positive() || (b.is_zero() && a.is_positive()))
        {
            return Ok(i);
        }
    }
    Err(FanError::NotInSupport(fmt_vec(&s.iter().map(fmt_q).collect::<Vec<_>>())).into())
}

/// Positions a tree-shaped type: pins the anchor and propagates
/// `pos(b) = pos(a) + length * slope` along edges.
pub fn solve_balanced_map(
    ty: &CombinatorialType,
    lengths: &[Q],
    anchor: &Anchor,
    at: &[Q],
) -> Result<TropicalMap, CurveError> {
    check_lengths(ty, lengths)?;
    if !ty.is_tree() {
        return Err(CurveError::NotATree);
    }
    if let Some(v) = ty.balancing().residuals.iter().position(|r| !is_zero_slope(r)) {
        return Err(CurveError::NotBalanced(v));
    }
    if at.len() != ty.rank {
        return Err(CurveError::SlopeRank("anchor position".into()));
    }
    let root = match *anchor {
        Anchor::Vertex(v) if v < ty.num_vertices() => v,
        Anchor::Vertex(v) => return Err(CurveError::UnknownVertex(v)),
        Anchor::Marking(m) => ty.legs[ty.leg_of_marking(m).ok_or(CurveError::UnknownMarking(m))?].vertex,
    };
    let adj = ty.adjacency();
    let mut positions: Vec<Option<Vec<Q>>> = vec![None; ty.num_vertices()];
    positions[root] = Some(at.to_vec());
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let pv = positions[v].clone().expect("visited");
        for &(w, de) in &adj[v] {
            if positions[w].is_some() {
                continue;
            }
            let e = &ty.edges[de.edge];
            let sign = if de.forward { 1 } else { -1 };
            let pw = pv
                .iter()
                .zip(&e.slope)
                .map(|(x, &s)| x + &lengths[de.edge] * q(sign * s))
                .collect();
            positions[w] = Some(pw);
            queue.push_back(w);
        }
    }
    let positions = positions.into_iter().map(|p| p.expect("connected")).collect();
    TropicalMap::new(ty.clone(), lengths.to_vec(), positions)
}

fn parse_curve(text: &str) -> Result<TropicalMap, CurveError> {
    let mut ids: BTreeMap<u64, usize> = BTreeMap::new();
    let mut genera = Vec::new();
    let mut at: Vec<Option<Vec<Q>>> = Vec::new();
    let mut raw_edges: Vec<(usize, u64, u64, Q, Slope)> = Vec::new();
    let mut raw_legs: Vec<(usize, u64, usize, Slope)> = Vec::new();
    let mut anchor: Option<(usize, u64, Vec<Q>)> = None;
    let mut rank: Option<usize> = None;

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let err = |message: &str| CurveError::Parse {
            line,
            message: message.to_string(),
        };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let w: Vec<&str> = content.split_whitespace().collect();
        let int = |s: &str| {
            s.parse::<i64>()
                .ok()
                .filter(|x| x.unsigned_abs() <= 1 << 40)
                .ok_or_else(|| err("bad integer"))
        };
        let id = |s: &str| s.parse::<u64>().map_err(|_| err("bad vertex id"));
        let rat = |s: &str| {
            parse_q(s)
                .filter(|x| x.numer().bits() <= 256 && x.denom().bits() <= 256)
                .ok_or_else(|| err("bad rational"))
        };
        let mut set_rank = |k: usize| -> Result<(), CurveError> {
            if k > 16 {
                return Err(err("rank too large"));
            }
            match rank {
                None => rank = Some(k),
                Some(r) if r != k => return Err(err("inconsistent vector length")),
                _ => {}
            }
            Ok(())
        };
        match w[0] {
            "vertex" => {
                if w.len() < 4 || w[2] != "genus" {
                    return Err(err("expected `vertex <id> genus <g>`"));
                }
                let vid = id(w[1])?;
                let g = w[3]
                    .parse::<u32>()
                    .ok()
                    .filter(|&g| g <= 64)
                    .ok_or_else(|| err("bad genus"))?;
                let pos = match w.get(4) {
                    None => None,
                    Some(&"at") => {
                        let p = w[5..].iter().map(|s| rat(s)).collect::<Result<Vec<_>, _>>()?;
                        set_rank(p.len())?;
                        Some(p)
                    }
                    Some(_) => return Err(err("unexpected token after genus")),
                };
                if ids.insert(vid, genera.len()).is_some() {
                    return Err(err("duplicate vertex id"));
                }
                if genera.len() >= 1 << 16 {
                    return Err(err("too many vertices"));
                }
                genera.push(g);
                at.push(pos);
            }
            "edge" => {
                if w.len() < 7 || w[3] != "length" || w[5] != "slope" {
                    return Err(err("expected `edge <v> <w> length <p>/<q> slope <vector>`"));
                }
                let slope = w[6..].iter().map(|s| int(s)).collect::<Result<Vec<_>, _>>()?;
                set_rank(slope.len())?;
                raw_edges.push((line, id(w[1])?, id(w[2])?, rat(w[4])?, slope));
            }
            "leg" => {
                if w.len() < 5 || w[2] != "marking" || w[4] != "slope" {
                    return Err(err("expected `leg <v> marking <i> slope <vector>`"));
                }
                let marking = w[3]
                    .parse::<usize>()
                    .ok()
                    .filter(|&m| m <= 1 << 20)
                    .ok_or_else(|| err("bad marking"))?;
                let slope = w[5..].iter().map(|s| int(s)).collect::<Result<Vec<_>, _>>()?;
                set_rank(slope.len())?;
                raw_legs.push((line, id(w[1])?, marking, slope));
            }
            "anchor" => {
                if w.len() < 3 || w[2] != "at" || anchor.is_some() {
                    return Err(err("expected a single `anchor <v> at <coords>`"));
                }
                let p = w[3..].iter().map(|s| rat(s)).collect::<Result<Vec<_>, _>>()?;
                set_rank(p.len())?;
                anchor = Some((line, id(w[1])?, p));
            }
            _ => return Err(err("unknown keyword")),
        }
    }

    let rank = rank.unwrap_or(0);
    let lookup = |line: usize, v: u64| {
        ids.get(&v).copied().ok_or(CurveError::Parse {
            line,
            message: format!("unknown vertex {v}"),
        })
    };
    let mut edges = Vec::new();
    let mut lengths = Vec::new();
    for (line, a, b, len, slope) in raw_edges {
        edges.push(Edge {
            a: lookup(line, a)?,
            b: lookup(line, b)?,
            slope,
        });
        lengths.push(len);
    }
    let mut legs = Vec::new();
    for (line, v, marking, slope) in raw_legs {
        legs.push(Leg {
            vertex: lookup(line, v)?,
            marking,
            slope,
        });
    }
    let ty = CombinatorialType::new(rank, genera, edges, legs)?;

    let placed = at.iter().filter(|p| p.is_some()).count();
    if placed == at.len() && placed > 0 && anchor.is_none() {
        let positions = at.into_iter().map(|p| p.expect("all placed")).collect();
        return TropicalMap::new(ty, lengths, positions);
    }
    if placed > 0 {
        return Err(CurveError::Parse {
            line: 0,
            message: "either every vertex has a position or none does".into(),
        });
    }
    let (root, p) = match anchor {
        Some((line, v, p)) => (lookup(line, v)?, p),
        None => (0, vec![Q::zero(); rank]),
    };
    solve_balanced_map(&ty, &lengths, &Anchor::Vertex(root), &p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::StandardFan;
    use crate::rational::{q_frac, q_vec};

    fn leg(vertex: usize, marking: usize, slope: &[i64]) -> Leg {
        Leg {
            vertex,
            marking,
            slope: slope.to_vec(),
        }
    }

    fn edge(a: usize, b: usize, slope: &[i64]) -> Edge {
        Edge {
            a,
            b,
            slope: slope.to_vec(),
        }
    }

    fn tripod() -> CombinatorialType {
        CombinatorialType::new(
            2,
            vec![0],
            vec![],
            vec![leg(0, 1, &[1, 0]), leg(0, 2, &[0, 1]), leg(0, 3, &[-1, -1])],
        )
        .unwrap()
    }

    #[test]
    fn balancing_examples() {
        assert!(tripod().balancing().balanced);
        let t = CombinatorialType::new(2, vec![0], vec![], vec![leg(0, 1, &[1, 0]), leg(0, 2, &[0, 1])]).unwrap();
        let b = t.balancing();
        assert!(!b.balanced);
        assert_eq!(b.residuals, vec![vec![1, 1]]);
        // vertex 1 carries a contracted leg between two opposite edges
        let t = CombinatorialType::new(
            2,
            vec![0, 0, 0],
            vec![edge(0, 1, &[1, 0]), edge(1, 2, &[1, 0])],
            vec![leg(1, 1, &[0, 0]), leg(0, 2, &[-1, 0]), leg(2, 3, &[1, 0])],
        )
        .unwrap();
        assert!(t.balancing().balanced);
    }

    #[test]
    fn stability_examples() {
        let line = CombinatorialType::new(1, vec![0], vec![], vec![leg(0, 1, &[1]), leg(0, 2, &[-1])]).unwrap();
        let r = stability_check(&line).unwrap();
        assert_eq!(r.violations, vec![StabilityViolation::LinearBivalent(0)]);
        let with_cones = line
            .clone()
            .with_cones(ConeAssignment {
                vertex: vec![0],
                edge: vec![],
                leg: vec![1, 2],
            })
            .unwrap();
        assert!(stability_check(&with_cones).unwrap().stable);
        let same = line
            .with_cones(ConeAssignment {
                vertex: vec![1],
                edge: vec![],
                leg: vec![1, 1],
            })
            .unwrap();
        assert!(!stability_check(&same).unwrap().stable);

        let g1 = CombinatorialType::new(1, vec![1], vec![], vec![leg(0, 1, &[0])]).unwrap();
        assert!(stability_check(&g1).unwrap().stable);
        let g0 = CombinatorialType::new(1, vec![0], vec![], vec![leg(0, 1, &[0]), leg(0, 2, &[0])]).unwrap();
        assert_eq!(
            stability_check(&g0).unwrap().violations,
            vec![StabilityViolation::Contracted(0)]
        );

        let unbalanced = CombinatorialType::new(1, vec![0], vec![], vec![leg(0, 1, &[1])]).unwrap();
        assert_eq!(stability_check(&unbalanced), Err(CurveError::NotBalanced(0)));
    }

    #[test]
    fn solving() {
        let m = solve_balanced_map(&tripod(), &[], &Anchor::Vertex(0), &q_vec(&[0, 0])).unwrap();
        assert_eq!(m.positions(), &[q_vec(&[0, 0])]);

        let t = CombinatorialType::new(
            2,
            vec![0, 0],
            vec![edge(0, 1, &[1, 0])],
            vec![leg(0, 1, &[-1, 0]), leg(1, 2, &[1, 0])],
        )
        .unwrap();
        let m = solve_balanced_map(&t, &[q(3)], &Anchor::Vertex(0), &q_vec(&[0, 0])).unwrap();
        assert_eq!(m.positions()[1], q_vec(&[3, 0]));
        let m2 = solve_balanced_map(&t, &[q(3)], &Anchor::Marking(2), &q_vec(&[1, 1])).unwrap();
        assert_eq!(m2.positions()[0], q_vec(&[-2, 1]));
        assert!(matches!(
            solve_balanced_map(&t, &[q(0)], &Anchor::Vertex(0), &q_vec(&[0, 0])),
            Err(CurveError::NonPositiveLength(0))
        ));
    }

    #[test]
    fn solving_rejects_cycles() {
        let t = CombinatorialType::new(
            1,
            vec![0, 0],
            vec![edge(0, 1, &[1]), edge(0, 1, &[1])],
            vec![leg(0, 1, &[-2]), leg(1, 2, &[2])],
        )
        .unwrap();
        assert_eq!(t.genus(), 1);
        assert_eq!(
            solve_balanced_map(&t, &[q(1), q(1)], &Anchor::Vertex(0), &q_vec(&[0])),
            Err(CurveError::NotATree)
        );
    }

    #[test]
    fn paths() {
        let star = CombinatorialType::new(
            1,
            vec![0, 0, 0],
            vec![edge(1, 0, &[1]), edge(0, 2, &[1])],
            vec![leg(1, 1, &[-1]), leg(2, 2, &[1])],
        )
        .unwrap();
        assert!(tree_path(&star, 1, 1).unwrap().is_empty());
        let p = tree_path(&star, 1, 2).unwrap();
        assert_eq!(
            p,
            vec![
                DirectedEdge { edge: 0, forward: true },
                DirectedEdge { edge: 1, forward: true }
            ]
        );
        let back = tree_path(&star, 2, 1).unwrap();
        assert_eq!(
            back,
            vec![
                DirectedEdge {
                    edge: 1,
                    forward: false
                },
                DirectedEdge {
                    edge: 0,
                    forward: false
                }
            ]
        );
    }

    #[test]
    fn contraction() {
        let t = CombinatorialType::new(
            1,
            vec![0, 0],
            vec![edge(0, 1, &[1]), edge(0, 1, &[1])],
            vec![leg(0, 1, &[-2]), leg(1, 2, &[2])],
        )
        .unwrap();
        let c = t.contract_edge(0);
        assert_eq!(c.num_vertices(), 1);
        assert_eq!(c.genus(), 1);
        let c2 = c.contract_edge(0);
        assert_eq!(c2.genera(), &[1]);
        assert_eq!(c2.genus(), 1);
    }

    #[test]
    fn cone_assignment() {
        let fan = Fan::standard(&StandardFan::P2);
        let m = solve_balanced_map(&tripod(), &[], &Anchor::Vertex(0), &[q(1), q_frac(1, 2)]).unwrap();
        let ty = m.assign_cones(&fan).unwrap();
        let c = ty.cones().unwrap();
        // leg (1,0) from an interior point stays in the positive quadrant
        assert_eq!(fan.cone(c.leg[0]).dim(), 2);
        assert_eq!(c.vertex[0], c.leg[0]);
        let origin = solve_balanced_map(&tripod(), &[], &Anchor::Vertex(0), &q_vec(&[0, 0])).unwrap();
        let c = origin.assign_cones(&fan).unwrap().cones().unwrap().clone();
        assert_eq!(fan.cone(c.leg[0]).rays(), &[vec![1, 0]]);
        assert_eq!(fan.cone(c.vertex[0]).dim(), 0);
    }

    #[test]
    fn text_roundtrip() {
        let text = "vertex 0 genus 0\nvertex 1 genus 0\nedge 0 1 length 3/2 slope 1 0\n\
                    leg 0 marking 1 slope -1 0\nleg 1 marking 2 slope 1 0\nanchor 1 at 1 1\n";
        let m = TropicalMap::parse(text).unwrap();
        assert_eq!(m.positions()[0], vec![q_frac(-1, 2), q(1)]);
        assert_eq!(TropicalMap::parse(&m.to_text()).unwrap(), m);
        assert!(
            TropicalMap::parse("vertex 0 genus 0 at 0 0\nvertex 1 genus 0\nedge 0 1 length 1 slope 1 0\n").is_err()
        );
        assert!(TropicalMap::parse("vertex 0 genus 0\nedge 0 1 length 1 slope 1 0\n").is_err());
        assert!(TropicalMap::parse("bogus\n").is_err());
    }
}
