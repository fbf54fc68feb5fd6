//! Contact data, evaluation spaces and the rubber quotient.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::fan::{Cone, Fan, FanError};
use crate::lattice::{self, big_vec, kernel_basis, quotient_by_vectors, IntegerMatrix, QuotientLattice};
use crate::rational::q;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ContactError {
    #[error("row {row} of the contact matrix sums to {sum}, not 0")]
    RowSumNonzero { row: usize, sum: i64 },
    #[error("column {column} has length {found}, expected {expected}")]
    ColumnLength {
        column: usize,
        expected: usize,
        found: usize,
    },
    #[error("contact vector {0} is not in the support of the fan")]
    NotInSupport(String),
    #[error("fan rank {fan} does not match contact rank {contact}")]
    RankMismatch { fan: usize, contact: usize },
    #[error("contact data is not effective: the evaluation map has a kernel")]
    NotEffective,
    #[error("contact file line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Genus plus an `r x n` integer matrix whose rows sum to zero, stored by
/// columns (one per marking).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ContactData {
    genus: u32,
    rank: usize,
    columns: Vec<Vec<i64>>,
}

impl ContactData {
    pub fn new(genus: u32, rank: usize, columns: Vec<Vec<i64>>) -> Result<Self, ContactError> {
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rank {
                return Err(ContactError::ColumnLength {
                    column: j,
                    expected: rank,
                    found: c.len(),
                });
            }
        }
        for row in 0..rank {
            let sum: i64 = columns.iter().map(|c| c[row]).sum();
            if sum != 0 {
                return Err(ContactError::RowSumNonzero { row, sum });
            }
        }
        Ok(Self { genus, rank, columns })
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    /// `r`, the number of rows.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `n`, the number of markings.
    pub fn num_markings(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<i64>] {
        &self.columns
    }

    pub fn matrix(&self) -> IntegerMatrix {
        let cols: Vec<Vec<BigInt>> = self.columns.iter().map(|c| big_vec(c)).collect();
        IntegerMatrix::from_columns(&cols, self.rank)
    }

    /// Labels (1-based) of the markings with a zero column.
    pub fn trivial_markings(&self) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|&j| self.columns[j].iter().all(|&x| x == 0))
            .map(|j| j + 1)
            .collect()
    }

    pub fn without_trivial(&self) -> Self {
        let columns = self
            .columns
            .iter()
            .filter(|c| c.iter().any(|&x| x != 0))
            .cloned()
            .collect();
        Self {
            genus: self.genus,
            rank: self.rank,
            columns,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("genus {}\ncontacts\n", self.genus);
        for c in &self.columns {
            let words: Vec<String> = c.iter().map(i64::to_string).collect();
            writeln!(s, "{}", words.join(" ")).unwrap();
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, ContactError> {
        let mut genus = None;
        let mut in_contacts = false;
        let mut columns: Vec<Vec<i64>> = Vec::new();
        let mut rank = None;
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let err = |message: &str| ContactError::Parse {
                line,
                message: message.to_string(),
            };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let words: Vec<&str> = content.split_whitespace().collect();
            match words[0] {
                "genus" if !in_contacts => {
                    if genus.is_some() {
                        return Err(err("duplicate genus line"));
                    }
                    let [_, g] = words[..] else {
                        return Err(err("expected `genus <g>`"));
                    };
                    genus = Some(
                        g.parse::<u32>()
                            .ok()
                            .filter(|&g| g <= 64)
                            .ok_or_else(|| err("bad genus"))?,
                    );
                }
                "contacts" if !in_contacts => {
                    if words.len() != 1 {
                        return Err(err("`contacts` takes no arguments"));
                    }
                    in_contacts = true;
                }
                _ if in_contacts => {
                    let col = words
                        .iter()
                        .map(|w| w.parse::<i64>().ok().filter(|x| x.unsigned_abs() <= 1 << 20))
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| err("bad contact entry"))?;
                    if col.len() > 16 {
                        return Err(err("contact rank too large"));
                    }
                    match rank {
                        None => rank = Some(col.len()),
                        Some(r) if r != col.len() => return Err(err("inconsistent column length")),
                        _ => {}
                    }
                    columns.push(col);
                }
                _ => return Err(err("unexpected line")),
            }
        }
        let genus = genus.ok_or(ContactError::Parse {
            line: 0,
            message: "missing genus line".into(),
        })?;
        if !in_contacts {
            return Err(ContactError::Parse {
                line: 0,
                message: "missing contacts section".into(),
            });
        }
        Self::new(genus, rank.unwrap_or(0), columns)
    }
}

/// Plane curves of degree `d` and genus `g` through `3d - 1 + g` points.
pub fn severi_contact_data(d: u32, g: u32) -> ContactData {
    let d = d as usize;
    let mut columns = Vec::new();
    columns.extend(std::iter::repeat_n(vec![1, 0], d));
    columns.extend(std::iter::repeat_n(vec![0, 1], d));
    columns.extend(std::iter::repeat_n(vec![-1, -1], d));
    columns.extend(std::iter::repeat_n(vec![0, 0], 3 * d - 1 + g as usize));
    ContactData::new(g, 2, columns).expect("rows sum to zero")
}

/// Degree `d` covers of the line with `d` simple ends over each of the two
/// torus-fixed points and `2d - 2 + 2g` interior markings.
pub fn hurwitz_contact_data(d: u32, g: u32) -> ContactData {
    let d = d as usize;
    let mut columns = Vec::new();
    columns.extend(std::iter::repeat_n(vec![1], d));
    columns.extend(std::iter::repeat_n(vec![-1], d));
    columns.extend(std::iter::repeat_n(vec![0], 2 * d - 2 + 2 * g as usize));
    ContactData::new(g, 1, columns).expect("rows sum to zero")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stratum {
    FullSpace,
    Cone(Cone),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkingSpace {
    pub stratum: Stratum,
    pub quotient: QuotientLattice,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluationSpaceSpec {
    pub per_marking: Vec<MarkingSpace>,
    pub product_rank: usize,
    pub rank: usize,
}

/// Resolves each contact vector to the cone containing it in its relative
/// interior and records the lattice of the corresponding stratum.
pub fn evaluation_space(fan: &Fan, contact: &ContactData) -> Result<EvaluationSpaceSpec, ContactError> {
    let r = contact.rank();
    if fan.rank() != r {
        return Err(ContactError::RankMismatch {
            fan: fan.rank(),
            contact: r,
        });
    }
    let mut per_marking = Vec::new();
    for col in contact.columns() {
        if col.iter().all(|&x| x == 0) {
            per_marking.push(MarkingSpace {
                stratum: Stratum::FullSpace,
                quotient: QuotientLattice::identity(r),
            });
            continue;
        }
        let v: Vec<_> = col.iter().map(|&x| q(x)).collect();
        let (c, _) = fan.find_cone(&v).map_err(|e| match e {
            FanError::NotInSupport(s) => ContactError::NotInSupport(s),
            other => ContactError::NotInSupport(other.to_string()),
        })?;
        let cone = fan.cone(c);
        let gens: Vec<Vec<BigInt>> = cone.rays().iter().map(|g| big_vec(g)).collect();
        let quotient = quotient_by_vectors(r, &gens);
        per_marking.push(MarkingSpace {
            stratum: Stratum::Cone(cone),
            quotient,
        });
    }
    let product_rank = per_marking.iter().map(|m| m.quotient.rank()).sum();
    Ok(EvaluationSpaceSpec {
        per_marking,
        product_rank,
        rank: r,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EffectivityReport {
    /// `product_rank x r`: the diagonal map of `N` into the product of strata.
    pub phi: IntegerMatrix,
    pub injective: bool,
    pub cokernel_free: bool,
    pub cokernel_free_after_saturation: bool,
    pub effective: bool,
}

pub fn effectivity_check(fan: &Fan, contact: &ContactData) -> Result<EffectivityReport, ContactError> {
    let spec = evaluation_space(fan, contact)?;
    Ok(effectivity_of(&spec))
}

pub fn effectivity_of(spec: &EvaluationSpaceSpec) -> EffectivityReport {
    let r = spec.rank;
    let mut phi = IntegerMatrix::zeros(0, r);
    for m in &spec.per_marking {
        phi = phi.vstack(m.quotient.projection());
    }
    let injective = kernel_basis(&phi).is_empty();
    let cokernel_free = lattice::cokernel_is_free(&phi);
    // Replace the image by its saturation: same Smith transforms with the
    // nonzero invariant factors set to 1.
    let snf = lattice::smith_normal_form(&phi);
    let mut d = snf.d.clone();
    for i in 0..d.rows().min(d.cols()) {
        if !d.get(i, i).is_zero() {
            d.set(i, i, BigInt::from(1));
        }
    }
    let saturated = lattice::smith_normal_form(&d);
    let cokernel_free_after_saturation = saturated.diagonal().iter().all(|x| x.is_zero() || x.is_one());
    EffectivityReport {
        phi,
        injective,
        cokernel_free,
        cokernel_free_after_saturation,
        effective: injective,
    }
}

/// The quotient of the product of strata by the saturated image of `N`.
pub fn rubber_quotient(
    spec: &EvaluationSpaceSpec,
    report: &EffectivityReport,
) -> Result<QuotientLattice, ContactError> {
    if !report.effective {
        return Err(ContactError::NotEffective);
    }
    let cols = report.phi.column_vectors();
    Ok(quotient_by_vectors(spec.product_rank, &cols))
}
