//! Exact rational model of block-slide maps on `𝕋^d`, the standard partitions
//! and the atom permutations the maps induce.
//!
//! Coordinates are indexed from 0. Coordinate 0 is the direction of the
//! rotation `φ^t`, coordinate 1 the first transversal direction.

mod atoms;
mod blockslide;
pub mod builders;
mod lattice;
mod minimal;
mod partition;
mod point;
mod step;

pub use atoms::{
    commutes_with_rotation, induced_atom_map, induced_atom_permutation, structurally_equivariant,
    AtomPermutation,
};
pub use blockslide::{apply_blockslide, BlockSlideMap, BlockSlideMove};
pub use builders::{
    build_abc_conjugation, build_adjacent_swap, build_base_transposition, build_column_alignment,
    build_grid_refine, build_grid_refine_step, build_interchange, build_minimal_combinatorics,
    build_rearrange, build_transposition, build_trapping_step, build_two_cycle,
    decompose_permutation, equivariant_from_quotient, minimal_inverse_index, minimal_permutation,
};
pub use minimal::RigidCellMap;
pub use partition::{PartitionKind, PartitionSpec};
pub use point::{frac, int, modp, rat, rotate, Rational, TorusPointExact};
pub use step::{window, StepFunction};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TorusError {
    #[error("map does not send atom {atom} onto a single atom")]
    NotAtomPermutation { atom: usize },
    #[error("index function out of range")]
    InvalidIndexFunction,
    #[error("the pivot atom cannot be a transposition target")]
    InvalidTarget,
    #[error("permutation does not commute with the rotation action")]
    NotEquivariant,
    #[error("permutation moves atoms between rotation blocks")]
    CrossesBlocks,
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid step function: {0}")]
    InvalidStep(String),
    #[error("sample lattice too large for exhaustive checking")]
    GridTooLarge,
}

/// Value of a step function at `x`.
pub fn eval_step(s: &StepFunction, x: &Rational) -> Rational {
    s.eval(x).clone()
}
