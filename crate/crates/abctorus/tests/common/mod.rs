#![allow(dead_code)]

use abctorus::exact_torus::{BlockSlideMap, PartitionSpec, Rational, TorusPointExact};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Independent step evaluation: linear scan over the pieces after reducing by
/// the period with integer floor arithmetic.
fn oracle_step(m: &abctorus::exact_torus::BlockSlideMove, x: &Rational) -> Rational {
    let p = m.step.period();
    let k = (x / p).floor();
    let y = x - k * p;
    let bps = m.step.breakpoints();
    let mut v = Rational::zero();
    for (i, b) in bps.iter().enumerate() {
        if *b <= y {
            v = m.step.values()[i].clone();
        }
    }
    v
}

pub fn oracle_apply(map: &BlockSlideMap, x: &[Rational]) -> Vec<Rational> {
    let mut y: Vec<Rational> = x.to_vec();
    for m in map.moves() {
        let s = oracle_step(m, &y[m.source]);
        let t = if m.sign > 0 {
            &y[m.target] + s
        } else {
            &y[m.target] - s
        };
        y[m.target] = &t - t.floor();
    }
    y
}

/// Cell indices of a point for a grid with the given pitches.
fn cells(x: &[Rational], pitches: &[u64]) -> Vec<u64> {
    x.iter()
        .zip(pitches)
        .map(|(c, &n)| {
            (c * Rational::from_integer(BigInt::from(n)))
                .floor()
                .to_integer()
                .to_u64()
                .unwrap()
        })
        .collect()
}

pub fn oracle_atom(p: &PartitionSpec, x: &[Rational]) -> usize {
    p.atom_from_cells(&cells(x, &p.pitches()))
}

/// Random rational points inside every cell of the partition's grid, each
/// pushed through the oracle; returns the atom map or `None` if some atom
/// splits.
pub fn oracle_atom_map(
    map: &BlockSlideMap,
    from: &PartitionSpec,
    to: &PartitionSpec,
    per_cell: usize,
    seed: u64,
) -> Option<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pitches = from.pitches();
    let d = pitches.len();
    let total: u64 = pitches.iter().product();
    let mut out = vec![usize::MAX; from.atom_count()];
    for flat in 0..total {
        let mut c = vec![0u64; d];
        let mut rem = flat;
        for i in (0..d).rev() {
            c[i] = rem % pitches[i];
            rem /= pitches[i];
        }
        for _ in 0..per_cell {
            let x: Vec<Rational> = (0..d)
                .map(|i| {
                    let den: i64 = rng.gen_range(1000..100_000);
                    let num: i64 = rng.gen_range(0..den);
                    (q(c[i] as i64, 1) + q(num, den)) / q(pitches[i] as i64, 1)
                })
                .collect();
            let a = oracle_atom(from, &x);
            let b = oracle_atom(to, &oracle_apply(map, &x));
            if out[a] == usize::MAX {
                out[a] = b;
            } else if out[a] != b {
                return None;
            }
        }
    }
    Some(out)
}

pub fn random_point(rng: &mut ChaCha8Rng, d: usize) -> TorusPointExact {
    let coords = (0..d)
        .map(|_| {
            let den: i64 = rng.gen_range(1..10_000);
            q(rng.gen_range(0..den), den)
        })
        .collect();
    TorusPointExact::new(coords).unwrap()
}

/// Permutation given as disjoint cycles, on `n` points.
pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Vec<usize> {
    let mut m: Vec<usize> = (0..n).collect();
    for c in cycles {
        for w in 0..c.len() {
            m[c[w]] = c[(w + 1) % c.len()];
        }
    }
    m
}
