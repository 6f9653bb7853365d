//! Construction and verification of random affine-copy-avoiding subsets of
//! the unit cube.
//!
//! The crate builds random unions of open subcubes of `[0,1]^d`, decides
//! whether they contain an affine copy `T A + x` with the linear part
//! constrained to an operator-norm band, and assembles multi-stage avoiding
//! sets with exact measure accounting in dimension one.

pub mod arrangement;
pub mod detector;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod geometry;
pub mod grid;
pub mod interval;
pub mod sequences;

pub use error::{Error, Result};
pub use geometry::{AffineMap, Matrix, Point, PointSet, SigmaBounds};
pub use grid::{CellIndex, GridSet, StageParams};
pub use sequences::{ConditionRow, SequenceFamily};
