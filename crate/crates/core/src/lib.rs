pub mod bits;
pub mod bundle;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod envelope;
pub mod error;
pub mod finspace;
pub mod io;
pub mod lattice;
pub mod realpw;
pub mod verify;

pub use bits::ElemSet;
pub use config::Caps;
pub use error::{CapKind, Error, Result};
pub use finspace::{FinSpace, OpenSet, OpensLattice, PointMap, UpFamily};
pub use lattice::Lattice;
