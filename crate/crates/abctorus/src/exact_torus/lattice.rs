//! Atom tracking on a rational sample lattice.
//!
//! If every breakpoint and period of a step sourced from coordinate `c`, every
//! value added to `c`, and every partition boundary in `c` is a multiple of
//! `1/M_c`, then the map moves each lattice cell rigidly onto another one. Two
//! samples per cell per coordinate, at odd multiples of `1/(4M_c)`, then decide
//! atom membership exactly.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;

use super::blockslide::BlockSlideMap;
use super::partition::PartitionSpec;
use super::point::{lcm_big, Rational};
use super::TorusError;

const MAX_SAMPLES: u64 = 200_000_000;

pub(crate) struct Lattice {
    /// `4·M_c` per coordinate.
    pub den: Vec<u64>,
    tables: Vec<CompiledMove>,
}

struct CompiledMove {
    target: usize,
    source: usize,
    /// Shift of the target in units of `1/den[target]`, indexed by the source cell.
    shift: Vec<u64>,
}

fn to_units(v: &Rational, den: u64) -> u64 {
    let scaled = v * Rational::from_integer(BigInt::from(den));
    debug_assert!(scaled.is_integer());
    let n = scaled.to_integer() % BigInt::from(den);
    let n = if n < BigInt::from(0) {
        n + BigInt::from(den)
    } else {
        n
    };
    n.to_u64().unwrap()
}

impl Lattice {
    pub fn new(
        maps: &[&BlockSlideMap],
        parts: &[&PartitionSpec],
        extra_x0: &[u64],
    ) -> Result<Self, TorusError> {
        let dim = maps
            .first()
            .map(|m| m.dim())
            .or_else(|| parts.first().map(|p| p.dim))
            .unwrap_or(1);
        let mut m: Vec<BigInt> = vec![BigInt::one(); dim];
        for map in maps {
            if map.dim() != dim {
                return Err(TorusError::DimensionMismatch {
                    expected: dim,
                    got: map.dim(),
                });
            }
            for mv in map.moves() {
                m[mv.source] = lcm_big(&m[mv.source], &mv.step.domain_denominator());
                m[mv.target] = lcm_big(&m[mv.target], &mv.step.value_denominator());
            }
        }
        for p in parts {
            if p.dim != dim {
                return Err(TorusError::DimensionMismatch {
                    expected: dim,
                    got: p.dim,
                });
            }
            for (c, n) in p.pitches().iter().enumerate() {
                m[c] = lcm_big(&m[c], &BigInt::from(*n));
            }
        }
        for q in extra_x0 {
            m[0] = lcm_big(&m[0], &BigInt::from(*q));
        }
        let mut den = Vec::with_capacity(dim);
        let mut total: u64 = 1;
        for mc in &m {
            let v = mc
                .to_u64()
                .filter(|v| *v < (1 << 40))
                .ok_or(TorusError::GridTooLarge)?;
            total = total.checked_mul(2 * v).ok_or(TorusError::GridTooLarge)?;
            den.push(4 * v);
        }
        if total > MAX_SAMPLES {
            return Err(TorusError::GridTooLarge);
        }
        Ok(Lattice {
            den,
            tables: Vec::new(),
        })
    }

    pub fn compile(&mut self, map: &BlockSlideMap) {
        self.tables.clear();
        for mv in map.moves() {
            let cells = self.den[mv.source] / 4;
            let tden = self.den[mv.target];
            let shift = (0..cells)
                .map(|cell| {
                    let x = Rational::new(BigInt::from(cell), BigInt::from(cells));
                    let v = to_units(mv.step.eval(&x), tden);
                    if mv.sign > 0 {
                        v
                    } else {
                        (tden - v) % tden
                    }
                })
                .collect();
            self.tables.push(CompiledMove {
                target: mv.target,
                source: mv.source,
                shift,
            });
        }
    }

    pub fn apply(&self, u: &mut [u64]) {
        for t in &self.tables {
            let cell = (u[t.source] / 4) as usize;
            let d = self.den[t.target];
            u[t.target] = (u[t.target] + t.shift[cell]) % d;
        }
    }

    pub fn sample_count(&self) -> u64 {
        self.den.iter().map(|d| d / 2).product()
    }

    /// The `idx`-th sample point (odd units in every coordinate).
    pub fn sample(&self, mut idx: u64, out: &mut [u64]) {
        for c in (0..self.den.len()).rev() {
            let n = self.den[c] / 2;
            out[c] = 2 * (idx % n) + 1;
            idx /= n;
        }
    }

    /// Applies `f` to every sample point and its image, in parallel chunks,
    /// and folds the per-chunk results with `merge`.
    pub fn sweep<T, F, M>(&self, init: T, f: F, merge: M) -> T
    where
        T: Send + Sync + Clone,
        F: Fn(&mut T, &[u64], &[u64]) + Sync,
        M: Fn(T, T) -> T + Sync,
    {
        let total = self.sample_count();
        let chunk = (total / 256).max(4096);
        let nchunks = total.div_ceil(chunk);
        let d = self.den.len();
        (0..nchunks)
            .into_par_iter()
            .map(|ci| {
                let mut acc = init.clone();
                let mut x = vec![0u64; d];
                let mut y = vec![0u64; d];
                for idx in ci * chunk..((ci + 1) * chunk).min(total) {
                    self.sample(idx, &mut x);
                    y.copy_from_slice(&x);
                    self.apply(&mut y);
                    f(&mut acc, &x, &y);
                }
                acc
            })
            .reduce(|| init.clone(), &merge)
    }
}
