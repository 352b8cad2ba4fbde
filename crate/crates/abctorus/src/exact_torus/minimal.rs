use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::atoms::AtomPermutation;
use super::builders::minimal_permutation;
use super::partition::PartitionSpec;
use super::point::{Rational, TorusPointExact};
use super::TorusError;

/// A rigid permutation of the cells of a `cols × rows` grid on `𝕋²`: each cell
/// is translated onto its image cell.
///
/// This is the table form of a block-slide map that permutes grid atoms, for
/// grids where the explicit move list would be too long to evaluate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RigidCellMap {
    pub cols: u64,
    pub rows: u64,
    /// `mapping[i·rows + j]` is the image cell of cell `(i,j)`.
    pub mapping: Vec<usize>,
}

impl RigidCellMap {
    pub fn from_permutation(p: &AtomPermutation) -> Result<Self, TorusError> {
        if p.partition.dim != 2 {
            return Err(TorusError::DimensionMismatch {
                expected: 2,
                got: p.partition.dim,
            });
        }
        let pitches = p.partition.pitches();
        if pitches.iter().product::<u64>() as usize != p.mapping.len() {
            return Err(TorusError::NotAtomPermutation { atom: 0 });
        }
        Ok(RigidCellMap {
            cols: pitches[0],
            rows: pitches[1],
            mapping: p.mapping.clone(),
        })
    }

    /// The minimality combinatorics on `GridMin(l,q,r)`.
    pub fn minimal(l: u64, q: u64, r: u64) -> Result<Self, TorusError> {
        Self::from_permutation(&minimal_permutation(l, q, r)?)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.mapping.len()];
        for (a, &b) in self.mapping.iter().enumerate() {
            inv[b] = a;
        }
        RigidCellMap {
            cols: self.cols,
            rows: self.rows,
            mapping: inv,
        }
    }

    pub fn partition(&self) -> PartitionSpec {
        PartitionSpec::s(self.cols, self.rows)
    }

    /// Image of a cell `(i,j)`.
    pub fn cell_image(&self, i: u64, j: u64) -> (u64, u64) {
        let b = self.mapping[(i * self.rows + j) as usize] as u64;
        (b / self.rows, b % self.rows)
    }

    pub fn apply(&self, x: &TorusPointExact) -> Result<TorusPointExact, TorusError> {
        if x.dim() != 2 {
            return Err(TorusError::DimensionMismatch {
                expected: 2,
                got: x.dim(),
            });
        }
        let c = Rational::from_integer(BigInt::from(self.cols));
        let r = Rational::from_integer(BigInt::from(self.rows));
        let i = (x.coord(0) * &c).floor();
        let j = (x.coord(1) * &r).floor();
        let (bi, bj) = self.cell_image(
            i.to_integer().to_u64().unwrap(),
            j.to_integer().to_u64().unwrap(),
        );
        let bi = Rational::from_integer(BigInt::from(bi));
        let bj = Rational::from_integer(BigInt::from(bj));
        TorusPointExact::new(vec![x.coord(0) + (bi - i) / c, x.coord(1) + (bj - j) / r])
    }
}
