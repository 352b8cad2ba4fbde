//! Builders for the concrete block-slide maps of the constructions.

use num_bigint::BigInt;
use num_traits::Zero;

use super::atoms::AtomPermutation;
use super::blockslide::{BlockSlideMap, BlockSlideMove};
use super::partition::PartitionKind;
use super::partition::PartitionSpec;
use super::point::{frac, int, Rational};
use super::step::{half, window, StepFunction};
use super::TorusError;

fn r(n: u64, d: u64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn mv(target: usize, source: usize, step: StepFunction, sign: i8) -> BlockSlideMove {
    BlockSlideMove::new(target, source, step, sign).expect("distinct coordinates and unit sign")
}

fn out_of_range(msg: impl Into<String>) -> TorusError {
    TorusError::ParamOutOfRange(msg.into())
}

/// `σ⁽¹⁾`: 0 on `[0,1/2)`, `1/(kq)` on `[1/2,1)`.
pub fn sigma1(k: u64, q: u64) -> StepFunction {
    StepFunction::from_pieces(int(1), &[(int(0), int(0)), (half(), r(1, k * q))]).unwrap()
}

/// `σ⁽²⁾`: `1/(kq)` on `[0,1/2)`, 0 on `[1/2,1)`.
pub fn sigma2(k: u64, q: u64) -> StepFunction {
    StepFunction::from_pieces(int(1), &[(int(0), r(1, k * q)), (half(), int(0))]).unwrap()
}

/// `σ⁽³⁾`, period `1/q`: 0 on `[0,1/(kq))`, `1/2` after.
pub fn sigma3(k: u64, q: u64) -> StepFunction {
    StepFunction::from_pieces(r(1, q), &[(int(0), int(0)), (r(1, k * q), half())]).unwrap()
}

/// The last interchange step, period `1/q`: 0 on `[0,2/(kq))`, `1/2` after.
pub fn sigma4_rearrange(k: u64, q: u64) -> StepFunction {
    StepFunction::from_pieces(r(1, q), &[(int(0), int(0)), (r(2, k * q), half())]).unwrap()
}

/// The band step of the two-cycle: `2/(kq)` on `[(l−1)/l, 1)`, 0 before.
pub fn sigma4_band(k: u64, q: u64, l: u64) -> StepFunction {
    window(int(1), r(l - 1, l), int(1), r(2, k * q)).unwrap()
}

fn push_all(m: &mut BlockSlideMap, other: &BlockSlideMap) {
    m.extend(other).expect("same dimension");
}

/// The interchange `𝔣_{k,q}`: swaps the columns `ik` and `ik+1` of pitch
/// `1/(kq)` for every `i < q` and fixes every other point.
pub fn build_interchange(k: u64, q: u64, d: usize) -> Result<BlockSlideMap, TorusError> {
    if k < 2 || q < 1 {
        return Err(out_of_range("interchange needs k >= 2, q >= 1"));
    }
    if d < 2 {
        return Err(TorusError::DimensionMismatch {
            expected: 2,
            got: d,
        });
    }
    let (s1, s2, s3, s4) = (
        sigma1(k, q),
        sigma2(k, q),
        sigma3(k, q),
        sigma4_rearrange(k, q),
    );
    let moves = vec![
        mv(0, 1, s1.clone(), -1),
        mv(1, 0, s3.clone(), 1),
        mv(0, 1, s2.clone(), 1),
        mv(1, 0, StepFunction::constant(half()), 1),
        mv(0, 1, s2, -1),
        mv(1, 0, s3, 1),
        mv(0, 1, s1, 1),
        mv(1, 0, s4, 1),
    ];
    BlockSlideMap::from_moves(d, moves)
}

/// `𝔴_m = φ^{m/(kq)} ∘ 𝔣_{k,q} ∘ φ^{−m/(kq)}`, which swaps the columns `m`
/// and `m+1` in every block.
pub fn build_adjacent_swap(m: u64, k: u64, q: u64, d: usize) -> Result<BlockSlideMap, TorusError> {
    let f = build_interchange(k, q, d)?;
    let t = r(m, k * q);
    let mut out = BlockSlideMap::identity(d);
    out.push_rotation(&-t.clone())?;
    push_all(&mut out, &f);
    out.push_rotation(&t)?;
    Ok(out)
}

/// Moves column `c + kj` to `c + k(j+i mod q)` and fixes every other column.
pub fn build_rearrange(
    i: u64,
    c: u64,
    k: u64,
    q: u64,
    d: usize,
) -> Result<BlockSlideMap, TorusError> {
    if c >= k || i >= q {
        return Err(out_of_range("rearrange needs c < k and i < q"));
    }
    if i == 0 {
        return Ok(BlockSlideMap::identity(d));
    }
    if k < 2 {
        return Err(out_of_range("rearrange needs k >= 2"));
    }
    let mut base = BlockSlideMap::identity(d);
    for m in c..c + k - 1 {
        push_all(&mut base, &build_adjacent_swap(m, k, q, d)?);
    }
    base.push_rotation(&r(1, k * q))?;
    Ok(base.power(i as usize))
}

/// `ψ⁽¹⁾`: period 1, value `(l−i)/(l²Q)` on `[i/l,(i+1)/l)` for `i ≥ 1`, 0 for `i = 0`.
pub fn psi1(l: u64, big_q: u64) -> StepFunction {
    let vals: Vec<Rational> = (0..l)
        .map(|i| {
            if i == 0 {
                int(0)
            } else {
                r(l - i, l * l * big_q)
            }
        })
        .collect();
    StepFunction::uniform(int(1), &vals).unwrap()
}

/// `ψ⁽²⁾`: period `1/(lQ)`, value `i/l` on the `i`-th piece of width `1/(l²Q)`.
pub fn psi2(l: u64, big_q: u64) -> StepFunction {
    let vals: Vec<Rational> = (0..l).map(|i| r(i, l)).collect();
    StepFunction::uniform(r(1, l * big_q), &vals).unwrap()
}

/// `ψ⁽³⁾`: period 1, value `i/(l²Q)` on `[i/l,(i+1)/l)`.
pub fn psi3(l: u64, big_q: u64) -> StepFunction {
    let vals: Vec<Rational> = (0..l).map(|i| r(i, l * l * big_q)).collect();
    StepFunction::uniform(int(1), &vals).unwrap()
}

/// One refinement step `𝔤_{j,l,q}` (`1 ≤ j ≤ d−1`), mapping `𝒢_{j,l,q}` onto `𝒢_{j+1,l,q}`.
pub fn build_grid_refine_step(
    j: usize,
    l: u64,
    q: u64,
    d: usize,
) -> Result<BlockSlideMap, TorusError> {
    if j == 0 || j >= d {
        return Err(out_of_range("refinement step index must lie in 1..d-1"));
    }
    let big_q = l.pow(j as u32 - 1) * q;
    let src = d - j;
    BlockSlideMap::from_moves(
        d,
        vec![
            mv(0, src, psi1(l, big_q), 1),
            mv(src, 0, psi2(l, big_q), 1),
            mv(0, src, psi3(l, big_q), -1),
        ],
    )
}

/// `𝔤_{l,q}`: maps `𝒢_{l,q}` onto `𝒯_{l^d q}` and preserves every strip `Δ_{i,q}`.
pub fn build_grid_refine(l: u64, q: u64, d: usize) -> Result<BlockSlideMap, TorusError> {
    if l < 2 || q < 1 {
        return Err(out_of_range("grid refinement needs l >= 2, q >= 1"));
    }
    if d < 2 {
        return Err(TorusError::DimensionMismatch {
            expected: 2,
            got: d,
        });
    }
    let mut m = BlockSlideMap::identity(d);
    for j in 1..d {
        push_all(&mut m, &build_grid_refine_step(j, l, q, d)?);
    }
    Ok(m)
}

/// The map sending `R_{j}` of `ℛ_{a,k,q}` onto `Δ_{j,q}` by moving column `c`
/// of every block back by `a(c)` blocks.
pub fn build_column_alignment(
    a: &[u64],
    k: u64,
    q: u64,
    d: usize,
) -> Result<BlockSlideMap, TorusError> {
    if a.len() as u64 != k || a.iter().any(|&v| v >= q) {
        return Err(TorusError::InvalidIndexFunction);
    }
    let mut m = BlockSlideMap::identity(d);
    for (c, &ac) in a.iter().enumerate() {
        push_all(&mut m, &build_rearrange((q - ac) % q, c as u64, k, q, d)?);
    }
    Ok(m)
}

/// `𝔥_{a,k,l,q}`: `𝔤_{kl,q}` followed by the inverse of the column alignment.
///
/// `𝔥⁻¹` maps `R_j` onto `Δ_{j,q}` and `𝒯_{(lk)^d q}` onto `𝒢_{lk,q}`, and
/// `𝔥` commutes with `φ^{1/q}`.
pub fn build_abc_conjugation(
    a: &[u64],
    k: u64,
    l: u64,
    q: u64,
    d: usize,
) -> Result<BlockSlideMap, TorusError> {
    let h1 = build_column_alignment(a, k, q, d)?;
    let g = build_grid_refine(k * l, q, d)?;
    g.then(&h1.inverse())
}

/// Two-cycle on `𝒮_{kq,l}`: swaps `(0,l−1) ↔ (1,l−1)` and `(2,l−1) ↔ (3,l−1)`
/// in every block and fixes everything else.
pub fn build_two_cycle(k: u64, q: u64, l: u64) -> Result<BlockSlideMap, TorusError> {
    if k < 4 || q < 1 || l < 1 {
        return Err(out_of_range("two-cycle needs k >= 4"));
    }
    let f = build_interchange(k, q, 2)?;
    let band = sigma4_band(k, q, l);
    let mut m = f.clone();
    m.push(mv(0, 1, band.clone(), -1))?;
    push_all(&mut m, &f);
    m.push(mv(0, 1, band, 1))?;
    Ok(m)
}

/// Swaps `(0,l−1) ↔ (1,l−1)` of `𝒮_{kq,l}` in every block.
pub fn build_base_transposition(k: u64, q: u64, l: u64) -> Result<BlockSlideMap, TorusError> {
    if k < 4 || q < 1 || l < 1 {
        return Err(out_of_range("transposition needs k >= 4"));
    }
    let kq = k * q;
    let s5 = window(int(1), r(2 * l - 2, 2 * l), r(2 * l - 1, 2 * l), r(2, kq))?;
    let s6 = window(r(1, q), r(2, kq), r(4, kq), r(1, 2 * l))?;
    let mut m = BlockSlideMap::identity(2);
    m.push(mv(0, 1, s5.clone(), 1))?;
    m.push(mv(1, 0, s6.clone(), 1))?;
    push_all(&mut m, &build_two_cycle(k, q, 2 * l)?);
    m.push(mv(1, 0, s6, -1))?;
    m.push(mv(0, 1, s5, -1))?;
    Ok(m)
}

/// A map fixing `(0,l−1)` and sending `(i,j)` to `(1,l−1)`.
fn pivot_aligner(i: u64, j: u64, k: u64, q: u64, l: u64) -> Result<BlockSlideMap, TorusError> {
    let kq = k * q;
    let mut m = BlockSlideMap::identity(2);
    if j != l - 1 {
        let shift = frac(&(Rational::new(BigInt::from(1i64 - i as i64), BigInt::from(kq))));
        if !shift.is_zero() {
            m.push(mv(0, 1, window(int(1), r(j, l), r(j + 1, l), shift)?, 1))?;
        }
        m.push(mv(
            1,
            0,
            window(r(1, q), r(1, kq), r(2, kq), r(l - 1 - j, l))?,
            1,
        ))?;
    } else {
        for c in (1..i).rev() {
            push_all(&mut m, &build_adjacent_swap(c, k, q, 2)?);
        }
    }
    Ok(m)
}

/// Swaps `(0,l−1) ↔ (i,j)` of `𝒮_{kq,l}` in every block.
pub fn build_transposition(
    i: u64,
    j: u64,
    k: u64,
    q: u64,
    l: u64,
) -> Result<BlockSlideMap, TorusError> {
    if i == 0 && j + 1 == l {
        return Err(TorusError::InvalidTarget);
    }
    if i >= k || j >= l {
        return Err(out_of_range("transposition target outside the block"));
    }
    let base = build_base_transposition(k, q, l)?;
    let p = pivot_aligner(i, j, k, q, l)?;
    p.then(&base)?.then(&p.inverse())
}

/// Realizes an equivariant, block-preserving permutation of `𝒮_{kq,l}` as a
/// product of pivot transpositions.
pub fn decompose_permutation(
    pi: &AtomPermutation,
    k: u64,
    q: u64,
    l: u64,
) -> Result<BlockSlideMap, TorusError> {
    match pi.partition.kind {
        PartitionKind::S { kq, l: pl } if kq == k * q && pl == l => {}
        PartitionKind::GridMin { .. } => {
            let p = pi.partition.pitches();
            if p[0] != k * q || p[1] != l {
                return Err(out_of_range("partition does not match (k,q,l)"));
            }
        }
        _ => return Err(out_of_range("partition does not match (k,q,l)")),
    }
    if !pi.is_equivariant(q) {
        return Err(TorusError::NotEquivariant);
    }
    let kl = (k * l) as usize;
    let mut quotient = vec![0usize; kl];
    for (a, img) in quotient.iter_mut().enumerate() {
        let b = pi.mapping[a];
        if b >= kl {
            return Err(TorusError::CrossesBlocks);
        }
        *img = b;
    }
    let mut out = BlockSlideMap::identity(2);
    let pivot = (l - 1) as usize;
    let tr = |a: usize| build_transposition(a as u64 / l, a as u64 % l, k, q, l);
    let quotient = AtomPermutation {
        partition: PartitionSpec::s(k, l),
        mapping: quotient,
    };
    for cyc in quotient.cycles() {
        if let Some(pos) = cyc.iter().position(|&a| a == pivot) {
            let n = cyc.len();
            for s in 1..n {
                push_all(&mut out, &tr(cyc[(pos + s) % n])?);
            }
        } else {
            for &a in &cyc {
                push_all(&mut out, &tr(a)?);
            }
            push_all(&mut out, &tr(cyc[0])?);
        }
    }
    Ok(out)
}

/// Quotient atom `(i,j)` of `𝒮_{kq,l}` with `i < k`, as a full equivariant permutation.
pub fn equivariant_from_quotient(
    k: u64,
    q: u64,
    l: u64,
    quotient: &[usize],
) -> Result<AtomPermutation, TorusError> {
    let kl = (k * l) as usize;
    if quotient.len() != kl {
        return Err(out_of_range("quotient permutation has the wrong length"));
    }
    let n = kl * q as usize;
    let mut mapping = vec![0usize; n];
    for b in 0..q as usize {
        for (a, &img) in quotient.iter().enumerate() {
            mapping[a + b * kl] = (img + b * kl) % n;
        }
    }
    AtomPermutation::new(PartitionSpec::s(k * q, l), mapping)
}

/// Inverse-image rule on `𝒢_{l³q}` atoms within `[0,1/(lq))×𝕋`:
/// returns `(i′,j′)` with `𝔥⁻¹(G_{i,j}) = G_{i′,j′}`.
pub fn minimal_inverse_index(i: u64, j: u64, l: u64, r: u64) -> (u64, u64) {
    if i < l {
        (j / r, r * i + j % r)
    } else {
        let t = j / l;
        let jj = j % l;
        ((i / l) * l + jj, t * l + i % l)
    }
}

/// Forward atom permutation of the minimality combinatorics on `GridMin(l,q,r)`.
pub fn minimal_permutation(l: u64, q: u64, r: u64) -> Result<AtomPermutation, TorusError> {
    if l < 2 || r < 1 || q < 1 {
        return Err(out_of_range(
            "minimal combinatorics needs l >= 2, r >= 1, q >= 1",
        ));
    }
    if !l.is_multiple_of(r) {
        return Err(out_of_range("r must divide l"));
    }
    let part = PartitionSpec::grid_min(l, q, r);
    let rows = l * r;
    let cols_per_block = l * l;
    let n = part.atom_count();
    let mut mapping = vec![usize::MAX; n];
    for blk in 0..l * q {
        for i in 0..cols_per_block {
            for j in 0..rows {
                let (ii, jj) = minimal_inverse_index(i, j, l, r);
                let src = ((blk * cols_per_block + ii) * rows + jj) as usize;
                let dst = ((blk * cols_per_block + i) * rows + j) as usize;
                mapping[src] = dst;
            }
        }
    }
    AtomPermutation::new(part, mapping)
}

/// `𝔥^{(𝔪2)}` as a block-slide map realizing [`minimal_permutation`].
///
/// The number of moves grows like `l⁴ r`; for large `l` use
/// [`RigidCellMap::minimal`](super::minimal::RigidCellMap::minimal) instead.
pub fn build_minimal_combinatorics(l: u64, q: u64, r: u64) -> Result<BlockSlideMap, TorusError> {
    let perm = minimal_permutation(l, q, r)?;
    decompose_permutation(&perm, l * l, l * q, l * r)
}

/// The trapping staircase `κ̃`: period `1/(l³q)`, `n²` equal pieces, value
/// `m_u·δ/(lr)` on piece `u` with `m_u = max(0, P − |u − P|)`, `P = ⌊n²/2⌋ − 1`.
pub fn build_trapping_step(
    n: u64,
    l: u64,
    q: u64,
    r: u64,
    delta: &Rational,
) -> Result<StepFunction, TorusError> {
    if n < 2 {
        return Err(out_of_range("trapping needs n >= 2"));
    }
    if *delta <= int(0) || *delta >= int(1) {
        return Err(out_of_range("delta must lie in (0,1)"));
    }
    let pieces = n * n;
    let peak = (pieces / 2) as i64 - 1;
    let unit = delta / int((l * r) as i64);
    let vals: Vec<Rational> = (0..pieces as i64)
        .map(|u| {
            let m = (peak - (u - peak).abs()).max(0);
            &unit * int(m)
        })
        .collect();
    StepFunction::uniform(
        Rational::new(BigInt::from(1), BigInt::from(l * l * l * q)),
        &vals,
    )
}
