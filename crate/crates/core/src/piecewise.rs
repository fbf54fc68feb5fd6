//! Strict piecewise polynomials on a simplicial fan.
//!
//! Each maximal cone carries a polynomial in the ambient coordinates. The
//! pieces must agree on every shared face; that is checked symbolically by
//! restricting both pieces to the linear span of the face.

use std::fmt::Write as _;

use num_traits::Zero;
use thiserror::Error;

use crate::fan::{Cone, Fan, FanError};
use crate::poly::Polynomial;
use crate::rational::{self, q, Solution, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PiecewiseError {
    #[error("pieces on {0} and {1} disagree on their common face")]
    Discontinuous(String, String),
    #[error("expected {expected} pieces (one per maximal cone), got {found}")]
    PieceCount { expected: usize, found: usize },
    #[error("piece has {found} variables, expected {expected}")]
    VariableCount { expected: usize, found: usize },
    #[error("{0} is not a ray of the fan")]
    RayNotInFan(String),
    #[error("operands live on different fans")]
    FanMismatch,
    #[error("neither fan refines the other")]
    NoCommonRefinement,
    #[error("the linear map does not send cone {0} into a cone of the target fan")]
    NotConeCompatible(String),
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error("piecewise file line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewisePolynomial {
    fan: Fan,
    maximal: Vec<usize>,
    pieces: Vec<Polynomial>,
}

impl PiecewisePolynomial {
    /// `pieces[i]` lives on the `i`-th entry of `fan.maximal_cones()`.
    pub fn new(fan: Fan, pieces: Vec<Polynomial>) -> Result<Self, PiecewiseError> {
        let maximal = fan.maximal_cones();
        if pieces.len() != maximal.len() {
            return Err(PiecewiseError::PieceCount {
                expected: maximal.len(),
                found: pieces.len(),
            });
        }
        for p in &pieces {
            if p.nvars() != fan.rank() {
                return Err(PiecewiseError::VariableCount {
                    expected: fan.rank(),
                    found: p.nvars(),
                });
            }
        }
        let f = Self { fan, maximal, pieces };
        f.check_continuity()?;
        Ok(f)
    }

    pub fn zero(fan: Fan) -> Self {
        let n = fan.maximal_cones().len();
        let rank = fan.rank();
        Self::new(fan, vec![Polynomial::zero(rank); n]).expect("zero is continuous")
    }

    pub fn constant(fan: Fan, c: Q) -> Self {
        let n = fan.maximal_cones().len();
        let rank = fan.rank();
        Self::new(fan, vec![Polynomial::constant(rank, c); n]).expect("constants are continuous")
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn pieces(&self) -> &[Polynomial] {
        &self.pieces
    }

    /// The piece on a maximal cone, addressed by its index in the fan.
    pub fn piece_on(&self, cone_index: usize) -> Option<&Polynomial> {
        self.maximal
            .iter()
            .position(|&m| m == cone_index)
            .map(|i| &self.pieces[i])
    }

    fn check_continuity(&self) -> Result<(), PiecewiseError> {
        let rank = self.fan.rank();
        for a in 0..self.maximal.len() {
            for b in a + 1..self.maximal.len() {
                let sa = self.fan.cone_indices(self.maximal[a]);
                let sb = self.fan.cone_indices(self.maximal[b]);
                let shared: Vec<usize> = sa.iter().copied().filter(|x| sb.contains(x)).collect();
                // x = sum_k t_k g_k over the shared generators
                let m: Vec<Vec<Q>> = (0..rank)
                    .map(|i| shared.iter().map(|&r| q(self.fan.rays()[r][i])).collect())
                    .collect();
                let ra = self.pieces[a].substitute_linear(&m, shared.len());
                let rb = self.pieces[b].substitute_linear(&m, shared.len());
                if ra != rb {
                    return Err(PiecewiseError::Discontinuous(
                        self.fan.cone(self.maximal[a]).to_string(),
                        self.fan.cone(self.maximal[b]).to_string(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// The Courant function of a ray: linear on each cone, 1 on the ray's
    /// generator and 0 on every other ray.
    pub fn courant(fan: &Fan, ray: &Cone) -> Result<Self, PiecewiseError> {
        let not_in = || PiecewiseError::RayNotInFan(ray.to_string());
        if ray.rays().len() != 1 || ray.ambient_rank() != fan.rank() {
            return Err(not_in());
        }
        let target = fan.ray_index(&ray.rays()[0]).ok_or_else(not_in)?;
        let rank = fan.rank();
        let mut pieces = Vec::new();
        for &c in &fan.maximal_cones() {
            let gens = fan.cone_indices(c);
            if !gens.contains(&target) {
                pieces.push(Polynomial::zero(rank));
                continue;
            }
            // Complete the generators to a basis with standard vectors, then
            // solve for the functional that is 1 on the target and 0 elsewhere.
            let mut basis: Vec<Vec<Q>> = gens
                .iter()
                .map(|&r| fan.rays()[r].iter().map(|&x| q(x)).collect())
                .collect();
            let mut values: Vec<Q> = gens.iter().map(|&r| if r == target { q(1) } else { q(0) }).collect();
            for i in 0..rank {
                if basis.len() == rank {
                    break;
                }
                let mut e = vec![Q::zero(); rank];
                e[i] = q(1);
                basis.push(e);
                if rational::rank(&basis, rank) < basis.len() {
                    basis.pop();
                } else {
                    values.push(Q::zero());
                }
            }
            let Solution::Unique(m) = rational::solve(&basis, &values, rank) else {
                unreachable!("basis is square and invertible");
            };
            pieces.push(Polynomial::linear(&m));
        }
        Self::new(fan.clone(), pieces)
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(&Polynomial, &Polynomial) -> Polynomial,
    ) -> Result<Self, PiecewiseError> {
        if self.fan != other.fan {
            return Err(PiecewiseError::FanMismatch);
        }
        let pieces = self.pieces.iter().zip(&other.pieces).map(|(a, b)| f(a, b)).collect();
        Self::new(self.fan.clone(), pieces)
    }

    pub fn add(&self, other: &Self) -> Result<Self, PiecewiseError> {
        self.zip_with(other, Polynomial::add)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PiecewiseError> {
        self.zip_with(other, Polynomial::mul)
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self {
            fan: self.fan.clone(),
            maximal: self.maximal.clone(),
            pieces: self.pieces.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn evaluate(&self, v: &[Q]) -> Result<Q, PiecewiseError> {
        let (c, _) = self.fan.find_cone(v)?;
        let face = self.fan.cone_indices(c);
        let i = self
            .maximal
            .iter()
            .position(|&m| face.iter().all(|x| self.fan.cone_indices(m).contains(x)))
            .expect("every cone lies in a maximal cone");
        Ok(self.pieces[i].eval(v))
    }

    /// Pulls back along the linear map `map` (target rank rows, source rank
    /// columns) from this fan to `source`.
    pub fn pullback(&self, map: &[Vec<i64>], source: &Fan) -> Result<Self, PiecewiseError> {
        let target_rank = self.fan.rank();
        assert_eq!(map.len(), target_rank, "map must have one row per target coordinate");
        assert!(
            map.iter().all(|r| r.len() == source.rank()),
            "map columns must match the source rank"
        );
        let apply = |v: &[i64]| -> Vec<Q> {
            map.iter()
                .map(|row| q(row.iter().zip(v).map(|(a, b)| a * b).sum()))
                .collect()
        };
        let m: Vec<Vec<Q>> = map.iter().map(|row| row.iter().map(|&x| q(x)).collect()).collect();
        let mut pieces = Vec::new();
        for &c in &source.maximal_cones() {
            let images: Vec<Vec<Q>> = source
                .cone_indices(c)
                .iter()
                .map(|&r| apply(&source.rays()[r]))
                .collect();
            let host = self.maximal.iter().position(|&t| {
                let cone = self.fan.cone(t);
                images.iter().all(|img| cone.contains(img))
            });
            let Some(h) = host else {
                return Err(PiecewiseError::NotConeCompatible(source.cone(c).to_string()));
            };
            pieces.push(self.pieces[h].substitute_linear(&m, source.rank()));
        }
        Self::new(source.clone(), pieces)
    }

    /// Re-expresses `self` on a fan that refines its own.
    pub fn refine_to(&self, finer: &Fan) -> Result<Self, PiecewiseError> {
        let n = self.fan.rank();
        let identity: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        self.pullback(&identity, finer).map_err(|e| match e {
            PiecewiseError::NotConeCompatible(_) => PiecewiseError::NoCommonRefinement,
            other => other,
        })
    }

    /// Brings two piecewise polynomials onto a common fan, when one of the
    /// two fans refines the other.
    pub fn common_refinement(&self, other: &Self) -> Result<(Self, Self), PiecewiseError> {
        if self.fan == other.fan {
            return Ok((self.clone(), other.clone()));
        }
        if let Ok(a) = self.refine_to(&other.fan) {
            return Ok((a, other.clone()));
        }
        let b = other.refine_to(&self.fan)?;
        Ok((self.clone(), b))
    }

    /// Fan file followed by `poly <cone-index> <monomials>` lines; the index
    /// refers to the `cone` lines of the fan section.
    pub fn to_text(&self) -> String {
        let mut s = self.fan.to_text();
        for (i, p) in self.pieces.iter().enumerate() {
            let body = p.to_text();
            if body.is_empty() {
                writeln!(s, "poly {i}").unwrap();
            } else {
                writeln!(s, "poly {i} {body}").unwrap();
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, PiecewiseError> {
        let mut fan_part = String::new();
        let mut polys: Vec<(usize, usize, &str)> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("").trim();
            if let Some(rest) = content.strip_prefix("poly") {
                if !rest.is_empty() && !rest.starts_with(char::is_whitespace) {
                    return Err(PiecewiseError::Parse {
                        line: n + 1,
                        message: "unknown keyword".into(),
                    });
                }
                let rest = rest.trim_start();
                let (idx, body) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                let idx: usize = idx.parse().map_err(|_| PiecewiseError::Parse {
                    line: n + 1,
                    message: format!("bad cone index `{idx}`"),
                })?;
                polys.push((n + 1, idx, body));
                fan_part.push('\n');
            } else {
                fan_part.push_str(raw);
                fan_part.push('\n');
            }
        }
        let (fan, listed) = Fan::parse_with_cones(&fan_part)?;
        let maximal = fan.maximal_cones();
        let mut pieces: Vec<Option<Polynomial>> = vec![None; maximal.len()];
        for (line, idx, body) in polys {
            let err = |message: String| PiecewiseError::Parse { line, message };
            let cone = listed
                .get(idx)
                .ok_or_else(|| err(format!("cone index {idx} out of range")))?;
            let pos = fan.cone_position(cone).expect("listed cones belong to the fan");
            let slot = maximal
                .iter()
                .position(|&m| m == pos)
                .ok_or_else(|| err("cone is not maximal".into()))?;
            if pieces[slot].is_some() {
                return Err(err("duplicate piece".into()));
            }
            pieces[slot] = Some(Polynomial::parse(body, fan.rank()).map_err(err)?);
        }
        let pieces = pieces
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or(PiecewiseError::Parse {
                line: 0,
                message: "a maximal cone has no piece".into(),
            })?;
        Self::new(fan, pieces)
    }

    /// True iff the value at every sampled point is zero.
    pub fn vanishes_at(&self, points: &[Vec<Q>]) -> bool {
        points
            .iter()
            .all(|p| self.evaluate(p).map(|v| v.is_zero()).unwrap_or(true))
    }
}
