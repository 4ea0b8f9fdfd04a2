//! Trajectory synthesis from signal temporal logic specifications.
//!
//! A specification is parsed into a [`Formula`], expanded over a horizon into
//! an [`StlTree`], encoded together with a [`LinearSystem`] as a mixed-integer
//! linear program, and solved either by the built-in branch-and-bound or by an
//! external solver through LP files. Disjunctions are encoded with a
//! logarithmic number of binaries.

pub mod bench;
pub mod encoder;
pub mod formula;
pub mod parser;
pub mod solver;
pub mod system;

pub use encoder::{encode, EncodedProblem, EncoderConfig, Encoding, EncodingStats};
pub use formula::{Formula, Interval, Predicate, Signal, StlTree};
pub use parser::{parse, RegionDef, SpecSource};
pub use solver::{solve, BnBOptions, SolveResult, SolveStatus};
pub use system::{LinearSystem, Trajectory};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Formula(#[from] formula::FormulaError),
    #[error(transparent)]
    Parse(#[from] parser::ParseError),
    #[error(transparent)]
    Region(#[from] parser::RegionError),
    #[error(transparent)]
    System(#[from] system::SystemError),
    #[error(transparent)]
    Encode(#[from] encoder::EncodeError),
    #[error(transparent)]
    Solver(#[from] solver::SolverError),
}
