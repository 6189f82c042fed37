//! Brauer–Manin machinery for smooth cubic surfaces: the 27-line configuration,
//! W(E6) subgroup cohomology, hexahedral arithmetic, local densities and
//! Peyre-constant assembly.

pub mod arith;
pub mod chains;
pub mod cohomology;
pub mod error;
pub mod hexahedral;
pub mod lattice;
pub mod lines27;
pub mod local_arith;
pub mod perm;
pub mod peyre;
pub mod poly;
pub mod subgroups;
pub mod weyl;

pub use error::{Error, ParseError, Result};
