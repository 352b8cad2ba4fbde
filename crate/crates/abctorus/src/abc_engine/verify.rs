use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::maps::{apply_conjugated_rotation, ExactMap, Model, StageMaps};
use super::{out_of_range, AbCParams, AbcError};
use crate::exact_torus::{rotate, Rational, TorusError, TorusPointExact};

/// Largest number of `𝒯_{q_n}` atoms sampled exhaustively; beyond it atoms
/// are taken with a constant stride.
const MAX_EXACT_ATOMS: u64 = 4096;
/// Largest number of cells swept by the exact symmetric-difference count.
const MAX_GRID_CELLS: u64 = 1 << 23;
/// Largest `q_m` for which correspondences are tabulated.
const MAX_CORRESPONDENCE: u64 = 1 << 24;

fn big(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Outcome of the finite conjugacy check at one stage.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicReport {
    pub n: u32,
    pub p: u64,
    pub q: u64,
    pub model: Model,
    pub samples: usize,
    pub correct: usize,
    /// Misplaced samples whose orbit segment meets an analytic error set.
    pub wrong_in_error_set: usize,
    pub fraction: f64,
    pub threshold: f64,
    /// The observed atom map is `i ↦ i + p_n`, a single `q_n`-cycle.
    pub same_cycle: bool,
    pub passed: bool,
}

/// Index of the `𝒯_q` column containing `x`.
fn column(x: &Rational, q: u64) -> u64 {
    (x * big(q)).floor().to_integer().to_u64().unwrap_or(0) % q
}

fn single_cycle(map: &[u64]) -> bool {
    let mut seen = 0;
    let mut i = 0u64;
    loop {
        i = map[i as usize];
        seen += 1;
        if i == 0 {
            break;
        }
        if seen > map.len() {
            return false;
        }
    }
    seen == map.len()
}

/// Checks that `T_n` moves the atom `H_n⁻¹Δ_i` of `ℱ_{q_n}` onto `H_n⁻¹Δ_{i+p_n}`.
///
/// Exact model: a 3×3 cloud per atom (all atoms up to 4096, then a stride),
/// all must land correctly. Analytic model: `samples` seeded points, the
/// correct fraction must reach `1 − 2ε_n`.
pub fn verify_cyclic_permutation(
    s: &StageMaps,
    n: u32,
    model: Model,
    samples: usize,
    seed: u64,
) -> Result<CyclicReport, AbcError> {
    let params = s.level(n)?.params.clone();
    let h = s.exact_conjugacy(n)?;
    let alpha = params.alpha();
    match model {
        Model::Exact => cyclic_exact(s, &h, &params, &alpha),
        Model::Analytic => cyclic_analytic(s, n, &h, &params, &alpha, samples, seed),
    }
}

fn cloud(i: u64, q: u64, dim: usize) -> Vec<TorusPointExact> {
    let offs = [
        Rational::new(1.into(), 6.into()),
        Rational::new(1.into(), 2.into()),
        Rational::new(5.into(), 6.into()),
    ];
    let mut out = Vec::with_capacity(9);
    for a in &offs {
        for b in &offs {
            let mut c = vec![Rational::new(1.into(), 2.into()); dim];
            c[0] = (big(i) + a) / big(q);
            c[1] = b.clone();
            out.push(TorusPointExact::new(c).expect("coordinates in [0,1)"));
        }
    }
    out
}

/// Per-atom tally: correct samples, sample count, and the observed target atom.
type AtomTally = Result<(usize, usize, Option<u64>), TorusError>;

fn cyclic_exact(
    s: &StageMaps,
    h: &ExactMap,
    params: &AbCParams,
    alpha: &Rational,
) -> Result<CyclicReport, AbcError> {
    let q = params.q;
    let stride = q.div_ceil(MAX_EXACT_ATOMS).max(1);
    let atoms: Vec<u64> = (0..q).step_by(stride as usize).collect();
    let results: Vec<AtomTally> = atoms
        .par_iter()
        .map(|&i| {
            let expect = (i + params.p) % q;
            let mut correct = 0;
            let mut image = None;
            let pts = cloud(i, q, s.dim());
            for y in &pts {
                let x = h.apply_inverse(y)?;
                let tx = h.apply_inverse(&rotate(&h.apply(&x)?, alpha))?;
                let j = column(h.apply(&tx)?.coord(0), q);
                if j == expect {
                    correct += 1;
                }
                if image.is_none() {
                    image = Some(j);
                } else if image != Some(j) {
                    image = Some(u64::MAX);
                }
            }
            Ok((pts.len(), correct, image))
        })
        .collect();
    let mut total = 0;
    let mut correct = 0;
    let mut map = vec![u64::MAX; q as usize];
    for (&i, r) in atoms.iter().zip(results) {
        let (t, c, img) = r?;
        total += t;
        correct += c;
        map[i as usize] = img.unwrap_or(u64::MAX);
    }
    let same_cycle = if stride == 1 {
        map.iter()
            .enumerate()
            .all(|(i, &j)| j == (i as u64 + params.p) % q)
            && single_cycle(&map)
    } else {
        params.p.gcd(&q) == 1 && atoms.iter().all(|&i| map[i as usize] == (i + params.p) % q)
    };
    let fraction = correct as f64 / total.max(1) as f64;
    Ok(CyclicReport {
        n: params.n,
        p: params.p,
        q,
        model: Model::Exact,
        samples: total,
        correct,
        wrong_in_error_set: 0,
        fraction,
        threshold: 1.0,
        same_cycle,
        passed: correct == total && same_cycle,
    })
}

/// A rational in `(0,1)` with 32 random bits, kept off dyadic grid points.
fn unit_rational(rng: &mut ChaCha8Rng) -> Rational {
    let v: u32 = rng.gen();
    Rational::new(BigInt::from(2 * v as u64 + 1), BigInt::from(1u64 << 33))
}

fn cyclic_analytic(
    s: &StageMaps,
    n: u32,
    h: &ExactMap,
    params: &AbCParams,
    alpha: &Rational,
    samples: usize,
    seed: u64,
) -> Result<CyclicReport, AbcError> {
    let ha = s.analytic_conjugacy(n)?;
    let ha_inv = ha.inverse();
    let q = params.q;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(u64, TorusPointExact)> = (0..samples)
        .map(|_| {
            let i = rng.gen_range(0..q);
            let mut c: Vec<Rational> = (0..s.dim()).map(|_| unit_rational(&mut rng)).collect();
            c[0] = (big(i) + &c[0]) / big(q);
            (i, TorusPointExact::new(c).expect("coordinates in [0,1)"))
        })
        .collect();
    let t = crate::exact_torus::frac(alpha).to_f64().unwrap_or(0.0);
    let outcomes: Vec<Result<(bool, bool), TorusError>> = draws
        .par_iter()
        .map(|(i, y)| {
            let x = h.apply_inverse(y)?.to_f64();
            let z = apply_conjugated_rotation(&ha, alpha, 1, &x);
            let zc: Vec<Rational> = z
                .iter()
                .map(|v| Rational::from_float(v.rem_euclid(1.0)).unwrap_or_else(Rational::zero))
                .collect();
            let j = column(h.apply(&TorusPointExact::new(zc)?)?.coord(0), q);
            let ok = j == (i + params.p) % q;
            let mut hx = ha.apply(&x);
            hx[0] = (hx[0] + t).rem_euclid(1.0);
            let flagged = !ok && (ha.in_error_set(&x) || ha_inv.in_error_set(&hx));
            Ok((ok, flagged))
        })
        .collect();
    let mut correct = 0;
    let mut flagged = 0;
    for o in outcomes {
        let (ok, f) = o?;
        correct += ok as usize;
        flagged += f as usize;
    }
    let fraction = correct as f64 / samples.max(1) as f64;
    let threshold = 1.0 - 2.0 * params.eps_f64();
    Ok(CyclicReport {
        n: params.n,
        p: params.p,
        q,
        model: Model::Analytic,
        samples,
        correct,
        wrong_in_error_set: flagged,
        fraction,
        threshold,
        same_cycle: params.p.gcd(&q) == 1,
        passed: samples > 0 && fraction >= threshold,
    })
}

/// The atom of `ℛ_{a,k,q}` (indexed by `R_i`) whose column contains atom `j`
/// of `𝒯_{q_next}`, for `params` the stage that was refined.
pub fn parent_index(params: &AbCParams, q_next: u64, j: u64) -> u64 {
    let (k, q) = (params.k, params.q);
    let x = ((j as u128 * (k * q) as u128) / q_next as u128) as u64;
    let c = x % k;
    (x / k + q - params.a[c as usize]) % q
}

/// The correspondence `𝔠_{m,n}` sending `Δ_{i,q_n}` to the union of
/// `Δ_{j,q_m}` listed in `unions[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Correspondence {
    pub n: u32,
    pub m: u32,
    pub q_n: u64,
    pub q_m: u64,
    pub unions: Vec<Vec<u64>>,
}

impl Correspondence {
    /// `self∘inner` for `inner = 𝔠_{l,n}` and `self = 𝔠_{m,l}`.
    pub fn compose(&self, inner: &Correspondence) -> Result<Correspondence, AbcError> {
        if inner.m != self.n {
            return Err(out_of_range("correspondences do not chain"));
        }
        let unions = inner
            .unions
            .iter()
            .map(|js| {
                let mut out: Vec<u64> = js
                    .iter()
                    .flat_map(|&j| self.unions[j as usize].iter().copied())
                    .collect();
                out.sort_unstable();
                out
            })
            .collect();
        Ok(Correspondence {
            n: inner.n,
            m: self.m,
            q_n: inner.q_n,
            q_m: self.q_m,
            unions,
        })
    }

    /// Whether the unions partition `{0..q_m−1}`.
    pub fn is_partition(&self) -> bool {
        let mut seen = vec![false; self.q_m as usize];
        for js in &self.unions {
            for &j in js {
                if seen[j as usize] {
                    return false;
                }
                seen[j as usize] = true;
            }
        }
        seen.into_iter().all(|b| b)
    }
}

/// `𝔠_{m,n}` for built stages `n ≤ m`, by iterating [`parent_index`].
pub fn correspondence(s: &StageMaps, n: u32, m: u32) -> Result<Correspondence, AbcError> {
    if n > m {
        return Err(out_of_range(format!("need n <= m, got n = {n}, m = {m}")));
    }
    let q_n = s.level(n)?.params.q;
    let q_m = s.level(m)?.params.q;
    if q_m > MAX_CORRESPONDENCE {
        return Err(TorusError::GridTooLarge.into());
    }
    let chain: Vec<(AbCParams, u64)> = (n..m)
        .map(|t| Ok((s.level(t)?.params.clone(), s.level(t + 1)?.params.q)))
        .collect::<Result<_, AbcError>>()?;
    let mut unions = vec![Vec::new(); q_n as usize];
    for j in 0..q_m {
        let mut idx = j;
        for (params, q_next) in chain.iter().rev() {
            idx = parent_index(params, *q_next, idx);
        }
        unions[idx as usize].push(j);
    }
    Ok(Correspondence {
        n,
        m,
        q_n,
        q_m,
        unions,
    })
}

/// `μ(h_m⁻¹(R_i) △ Δ_i)` for every `i < q_{m−1}`, exactly, by sweeping the
/// cells of a grid on which `h_m` moves the first coordinate rigidly.
pub fn symmetric_difference_exact(s: &StageMaps, m: u32) -> Result<Vec<Rational>, AbcError> {
    if m < 2 {
        return Err(AbcError::LevelOutOfRange(m));
    }
    let prev = s.level(m - 1)?.params.clone();
    let level = s.level(m)?;
    let (cols, rows) = level.detail.column_grid();
    if cols.saturating_mul(rows) > MAX_GRID_CELLS {
        return Err(TorusError::GridTooLarge.into());
    }
    let q = prev.q;
    let h = &level.h.exact;
    let dim = s.dim();
    let half = Rational::new(1.into(), 2.into());
    let per_col: Vec<Result<Vec<(u64, u64)>, TorusError>> = (0..cols)
        .into_par_iter()
        .map(|ci| {
            let mut bad = Vec::new();
            let x0 = (big(ci) + &half) / big(cols);
            let src = column(&x0, q);
            for rj in 0..rows {
                let mut c = vec![half.clone(); dim];
                c[0] = x0.clone();
                c[1] = (big(rj) + &half) / big(rows);
                let y = h.apply(&TorusPointExact::new(c)?)?;
                let img = parent_index(&prev, prev.k * q, column(y.coord(0), prev.k * q));
                if img != src {
                    bad.push((src, img));
                }
            }
            Ok(bad)
        })
        .collect();
    let cell = Rational::new(1.into(), BigInt::from(cols) * BigInt::from(rows));
    let mut counts = vec![0u64; q as usize];
    for r in per_col {
        for (src, img) in r? {
            counts[src as usize] += 1;
            counts[img as usize] += 1;
        }
    }
    Ok(counts.into_iter().map(|c| &cell * big(c)).collect())
}

/// Monte Carlo estimate of the mismatch set `{x : x ∈ Δ_i, h_m(x) ∉ R_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymDiffEstimate {
    pub samples: usize,
    pub mismatches: usize,
    /// Estimated measure of the mismatch set.
    pub fraction: f64,
    /// 95% normal-approximation radius of `fraction`.
    pub radius95: f64,
    /// `2·fraction`, an estimate of `Σ_i μ(h_m⁻¹R_i △ Δ_i)` and so an upper
    /// estimate of every single term.
    pub bound: f64,
}

/// The analytic counterpart of [`symmetric_difference_exact`].
pub fn symmetric_difference_analytic(
    s: &StageMaps,
    m: u32,
    samples: usize,
    seed: u64,
) -> Result<SymDiffEstimate, AbcError> {
    if m < 2 {
        return Err(AbcError::LevelOutOfRange(m));
    }
    let prev = s.level(m - 1)?.params.clone();
    let h = s
        .level(m)?
        .h
        .analytic
        .as_ref()
        .ok_or(AbcError::NoAnalyticModel)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Vec<f64>> = (0..samples)
        .map(|_| (0..s.dim()).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let (k, q) = (prev.k, prev.q);
    let mismatches = pts
        .par_iter()
        .filter(|x| {
            let src = ((x[0] * q as f64) as u64).min(q - 1);
            let y = h.apply(x);
            let col = ((y[0] * (k * q) as f64) as u64).min(k * q - 1);
            parent_index(&prev, k * q, col) != src
        })
        .count();
    let nf = samples.max(1) as f64;
    let fraction = mismatches as f64 / nf;
    let radius95 = 1.96 * (fraction * (1.0 - fraction) / nf).sqrt();
    Ok(SymDiffEstimate {
        samples,
        mismatches,
        fraction,
        radius95,
        bound: 2.0 * fraction,
    })
}
