use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::point::{Rational, TorusPointExact};
use super::TorusError;

/// The partition families of the torus used by the constructions.
///
/// Atom indexing:
/// * `T(q)`: `⌊q·x₀⌋`.
/// * `Gj(j,l,q)`: `x₀` cut with pitch `1/(l^j q)`, coordinates `1..=d−j` with
///   pitch `1/l`, the rest uncut. The index is the mixed-radix number
///   `(i₀, i₁, …)` with `i₀` most significant. `G(l,q)` is `Gj(1,l,q)`.
/// * `R(a,k,q)`: atom `j` collects the columns `c` of pitch `1/(kq)` with
///   `(⌊c/k⌋ − a(c mod k)) mod q = j`.
/// * `S(kq,l)` (d = 2): atom `(i,j)` is `[i/(kq),(i+1)/(kq)) × [j/l,(j+1)/l)`
///   with index `i·l + j`.
/// * `GridMin(l,q,r)` (d = 2): the grid `S(l³q, lr)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartitionKind {
    T { q: u64 },
    Gj { j: u32, l: u64, q: u64 },
    R { a: Vec<u64>, k: u64, q: u64 },
    S { kq: u64, l: u64 },
    GridMin { l: u64, q: u64, r: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionSpec {
    pub kind: PartitionKind,
    pub dim: usize,
}

impl PartitionSpec {
    pub fn t(q: u64, dim: usize) -> Self {
        PartitionSpec {
            kind: PartitionKind::T { q },
            dim,
        }
    }

    pub fn g(l: u64, q: u64, dim: usize) -> Self {
        Self::gj(1, l, q, dim)
    }

    pub fn gj(j: u32, l: u64, q: u64, dim: usize) -> Self {
        PartitionSpec {
            kind: PartitionKind::Gj { j, l, q },
            dim,
        }
    }

    pub fn r(a: Vec<u64>, k: u64, q: u64, dim: usize) -> Result<Self, TorusError> {
        if a.len() as u64 != k || a.iter().any(|&v| v >= q) {
            return Err(TorusError::InvalidIndexFunction);
        }
        Ok(PartitionSpec {
            kind: PartitionKind::R { a, k, q },
            dim,
        })
    }

    pub fn s(kq: u64, l: u64) -> Self {
        PartitionSpec {
            kind: PartitionKind::S { kq, l },
            dim: 2,
        }
    }

    pub fn grid_min(l: u64, q: u64, r: u64) -> Self {
        PartitionSpec {
            kind: PartitionKind::GridMin { l, q, r },
            dim: 2,
        }
    }

    /// Number of cuts per unit length in each coordinate (1 = uncut).
    pub fn pitches(&self) -> Vec<u64> {
        let mut p = vec![1u64; self.dim];
        match &self.kind {
            PartitionKind::T { q } => p[0] = *q,
            PartitionKind::Gj { j, l, q } => {
                p[0] = l.pow(*j) * q;
                let upto = self.dim.saturating_sub(*j as usize);
                for c in p.iter_mut().take(upto + 1).skip(1) {
                    *c = *l;
                }
            }
            PartitionKind::R { k, q, .. } => p[0] = k * q,
            PartitionKind::S { kq, l } => {
                p[0] = *kq;
                p[1] = *l;
            }
            PartitionKind::GridMin { l, q, r } => {
                p[0] = l * l * l * q;
                p[1] = l * r;
            }
        }
        p
    }

    pub fn atom_count(&self) -> usize {
        match &self.kind {
            PartitionKind::R { q, .. } => *q as usize,
            _ => self.pitches().iter().product::<u64>() as usize,
        }
    }

    /// Atom index from the per-coordinate cell indices at the partition's pitches.
    pub fn atom_from_cells(&self, cells: &[u64]) -> usize {
        match &self.kind {
            PartitionKind::R { a, k, q } => {
                let c = cells[0];
                let blk = (c / k) as i64;
                let shift = a[(c % k) as usize] as i64;
                (blk - shift).rem_euclid(*q as i64) as usize
            }
            _ => {
                let p = self.pitches();
                let mut idx = 0u64;
                for (c, n) in cells.iter().zip(p.iter()) {
                    idx = idx * n + c;
                }
                idx as usize
            }
        }
    }

    /// Atom containing an exact point.
    pub fn atom_of(&self, x: &TorusPointExact) -> Result<usize, TorusError> {
        if x.dim() != self.dim {
            return Err(TorusError::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        let cells: Vec<u64> = self
            .pitches()
            .iter()
            .zip(x.coords())
            .map(|(&n, c)| {
                (c * Rational::from_integer(BigInt::from(n)))
                    .floor()
                    .to_integer()
                    .to_u64()
                    .unwrap()
            })
            .collect();
        Ok(self.atom_from_cells(&cells))
    }

    /// Atom containing a point given on a uniform grid: coordinate `c` is
    /// `units[c] / denoms[c]`.
    pub fn atom_of_units(&self, units: &[u64], denoms: &[u64]) -> usize {
        let p = self.pitches();
        let cells: Vec<u64> = (0..self.dim)
            .map(|c| ((units[c] as u128 * p[c] as u128) / denoms[c] as u128) as u64)
            .collect();
        self.atom_from_cells(&cells)
    }

    /// Index action of `φ^{1/q}` on atoms, if the rotation permutes them.
    pub fn rotation_action(&self, q: u64) -> Option<Vec<usize>> {
        let p0 = self.pitches()[0];
        if !p0.is_multiple_of(q) {
            return None;
        }
        let shift = p0 / q;
        let n = self.atom_count();
        let mut out = vec![usize::MAX; n];
        let pitches = self.pitches();
        let total: u64 = pitches.iter().product();
        for flat in 0..total {
            let mut cells = vec![0u64; self.dim];
            let mut rem = flat;
            for c in (0..self.dim).rev() {
                cells[c] = rem % pitches[c];
                rem /= pitches[c];
            }
            let from = self.atom_from_cells(&cells);
            cells[0] = (cells[0] + shift) % p0;
            let to = self.atom_from_cells(&cells);
            if out[from] == usize::MAX {
                out[from] = to;
            } else if out[from] != to {
                return None;
            }
        }
        Some(out)
    }
}
