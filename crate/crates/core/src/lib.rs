//! Exact tropical enumeration: Severi degrees of the projective plane and
//! Hurwitz numbers of the projective line.

pub mod contact;
pub mod curve;
pub mod enumeration;
pub mod fan;
pub mod lattice;
pub mod piecewise;
pub mod pipeline;
pub mod poly;
pub mod rational;
