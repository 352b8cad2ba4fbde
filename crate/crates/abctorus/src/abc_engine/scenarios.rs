use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::maps::{ExactMap, ExactPart, StageConjugation};
use super::{advance_params, out_of_range, AbCParams, AbcError};
use crate::analytic_approx::{
    approximate_blockslide, stage_entire_step, stage_eps_delta, uniform_beta, AmplitudeMode,
    AnalyticBlockSlide, AnalyticMove, AnalyticStep, EntireStep, StagePsi,
};
use crate::exact_torus::{
    build_abc_conjugation, build_grid_refine, build_minimal_combinatorics, build_trapping_step,
    BlockSlideMap, BlockSlideMove, Rational, StepFunction,
};
use crate::tower_bounds::TranslationParams;

/// Largest block-slide move count for which an analytic model is built.
const ANALYTIC_MOVE_LIMIT: usize = 600;

/// Scenario-specific data of one stage map `h_{n+1}`.
#[derive(Clone, Debug, PartialEq)]
pub enum StageDetail {
    /// Stage 1, `h_1 = id`.
    Base,
    /// `h_{n+1} = 𝔤_{L,q_n}` with `L = k_n l_n`.
    Circle {
        big_l: u64,
        q: u64,
    },
    Translation(TranslationStage),
    Minimal(MinimalStage),
}

impl StageDetail {
    /// A `cols × rows` grid on each cell of which `h_{n+1}` moves the first
    /// coordinate by one constant.
    pub fn column_grid(&self) -> (u64, u64) {
        match self {
            StageDetail::Base => (1, 1),
            StageDetail::Circle { big_l, q } => (big_l * big_l * q, *big_l),
            StageDetail::Translation(t) => {
                let big_l = t.k * t.l;
                (big_l * big_l * t.q, big_l)
            }
            StageDetail::Minimal(m) => (m.l * m.l * m.l * m.q, m.l * m.r),
        }
    }
}

/// Index selection of a translation stage.
#[derive(Clone, Debug, PartialEq)]
pub struct TranslationStage {
    pub h: usize,
    pub gamma: Vec<BigInt>,
    pub gamma_next: Vec<BigInt>,
    pub s: u64,
    pub k: u64,
    pub l: u64,
    pub q: u64,
    /// The `j < γ^{(h)}_{n+1}` whose flow point `T^{jγ_{n+1}/γ^{(h)}_{n+1}}(0)`
    /// lies in the fundamental domain `Γ′_n`.
    pub returns: Vec<u64>,
    /// Slab indices `i` of `Γ_{i,k_nq_n}` making up `K̂_n⁻¹`-image of `R_0`.
    pub r0: Vec<u64>,
}

/// Trapping and combinatorics data of a minimal-scenario stage.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimalStage {
    pub n: u32,
    pub l: u64,
    pub q: u64,
    pub r: u64,
    pub delta: Rational,
    pub delta_tilde: Rational,
    /// The staircase `κ̃` added to `x₂` as a function of `x₁`.
    pub trapping: StepFunction,
    /// Whether the minimality combinatorics is part of `h_{n+1}`.
    pub combinatorics: bool,
}

/// Which parts of a minimal-scenario stage map are built; dropping one gives
/// the mutilated stages used as negative controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinimalOptions {
    pub combinatorics: bool,
    pub trapping: bool,
}

impl Default for MinimalOptions {
    fn default() -> Self {
        MinimalOptions {
            combinatorics: true,
            trapping: true,
        }
    }
}

/// The result of one stage construction: the stage-`n` parameters with the
/// transition data filled in, the stage-`(n+1)` parameters and `h_{n+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct StageIncrement {
    pub used: AbCParams,
    pub next: AbCParams,
    pub h: StageConjugation,
    pub detail: StageDetail,
}

/// Circle stage: `h_{n+1} = 𝔤_{k l, q_n}` with the three stage shears.
pub fn build_stage_circle(p: &AbCParams) -> Result<StageIncrement, AbcError> {
    let mut used = p.clone();
    used.a = vec![0; p.k as usize];
    used.validate()?;
    if p.l < 4 {
        return Err(out_of_range(format!("l = {} must be at least 4", p.l)));
    }
    let big_l = p.k.checked_mul(p.l).ok_or(AbcError::Overflow)?;
    let exact = ExactMap::from_slide(build_grid_refine(big_l, p.q, 2)?);
    let shear = |which, target, source, sign| -> Result<AnalyticMove, AbcError> {
        let step = stage_entire_step(which, p.n, big_l, p.q)?;
        Ok(AnalyticMove {
            target,
            source,
            sign,
            step: AnalyticStep::Entire(step),
        })
    };
    let moves = vec![
        shear(StagePsi::One, 0, 1, 1)?,
        shear(StagePsi::Two, 1, 0, 1)?,
        shear(StagePsi::Three, 0, 1, -1)?,
    ];
    let analytic = AnalyticBlockSlide::new(2, moves)?;
    let next = advance_params(p, p.k, p.l, p.s)?;
    Ok(StageIncrement {
        used,
        next,
        h: StageConjugation {
            exact,
            analytic: Some(analytic),
        },
        detail: StageDetail::Circle { big_l, q: p.q },
    })
}

fn to_u64(x: &BigInt, what: &str) -> Result<u64, AbcError> {
    x.to_u64()
        .ok_or_else(|| out_of_range(format!("{what} does not fit in 64 bits")))
}

struct Selection {
    k: u64,
    a: Vec<u64>,
    returns: Vec<u64>,
    r0: Vec<u64>,
}

fn select_indices(
    gamma: &[BigInt],
    gamma_next: &[BigInt],
    s: u64,
    q: u64,
) -> Result<Selection, AbcError> {
    let h = gamma.len();
    if h == 0 || gamma_next.len() != h {
        return Err(out_of_range(
            "direction vectors must have equal positive length",
        ));
    }
    if h > 2 {
        return Err(AbcError::UnsupportedDimension(h));
    }
    let g2 = to_u64(&gamma[h - 1], "gamma")?;
    let g2n = to_u64(&gamma_next[h - 1], "gamma")?;
    if g2 == 0 || s == 0 || g2n != s * g2 {
        return Err(out_of_range("need gamma^(h)_{n+1} = s·gamma^(h)_n > 0"));
    }
    if !q.is_multiple_of(g2) {
        return Err(out_of_range(format!(
            "gamma^(h)_n = {g2} does not divide q_n = {q}"
        )));
    }
    let k = s.checked_mul(g2n).ok_or(AbcError::Overflow)?;
    let kq = k.checked_mul(q).ok_or(AbcError::Overflow)?;
    // Flow point j·γ_{n+1}/γ^{(h)}_{n+1} sits at height frac(j·g1'/g2') on the
    // transversal circle; Γ′_n = [0, 1/g2).
    let returns: Vec<u64> = if h == 1 {
        (0..g2n).collect()
    } else {
        let g1n = gamma_next[0].mod_floor(&BigInt::from(g2n));
        let g1n = to_u64(&g1n, "gamma")?;
        (0..g2n)
            .filter(|&j| ((j as u128 * g1n as u128) % g2n as u128) * (g2 as u128) < g2n as u128)
            .collect()
    };
    let width = s * g2;
    let mut r0 = Vec::with_capacity(returns.len() * width as usize);
    for &j in &returns {
        let start = j * s * q;
        r0.extend(start..start + width);
    }
    let mut a = vec![u64::MAX; k as usize];
    for &i in &r0 {
        if i >= kq {
            return Err(out_of_range("slab index beyond k·q"));
        }
        let c = (i % k) as usize;
        if a[c] != u64::MAX {
            return Err(out_of_range(format!("column class {c} met twice by R_0")));
        }
        a[c] = i / k;
    }
    if let Some(c) = a.iter().position(|&v| v == u64::MAX) {
        return Err(out_of_range(format!("column class {c} missed by R_0")));
    }
    Ok(Selection { k, a, returns, r0 })
}

/// `k_n = s_n·γ^{(h)}_{n+1}` and the index function `a_n` for which `R_0` is
/// the union of the slabs `Γ_{i,k_nq_n}` swept by the flow from `Γ′_n`.
pub fn translation_index_function(
    gamma: &[BigInt],
    gamma_next: &[BigInt],
    s: u64,
    q: u64,
) -> Result<(u64, Vec<u64>), AbcError> {
    let sel = select_indices(gamma, gamma_next, s, q)?;
    Ok((sel.k, sel.a))
}

/// Translation stage: `h_{n+1} = 𝔥_{a_n,k_n,l_n,q_n}` with `k_n`, `a_n` taken
/// from the level-`n` data of `tp`.
pub fn build_stage_translation(
    p: &AbCParams,
    tp: &TranslationParams,
) -> Result<StageIncrement, AbcError> {
    if tp.h > 2 {
        return Err(AbcError::UnsupportedDimension(tp.h));
    }
    let idx = p.n as usize - 1;
    let (rec, rec_next) = match (tp.levels.get(idx), tp.levels.get(idx + 1)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(AbcError::LevelOutOfRange(p.n + 1)),
    };
    let s = rec
        .s
        .as_ref()
        .ok_or_else(|| out_of_range("level has no transition data"))?;
    let s = to_u64(s, "s_n")?;
    let sel = select_indices(&rec.gamma, &rec_next.gamma, s, p.q)?;
    let mut used = p.clone();
    used.k = sel.k;
    used.a = sel.a.clone();
    used.validate()?;
    let big_l = sel.k.checked_mul(p.l).ok_or(AbcError::Overflow)?;
    let grid = build_grid_refine(big_l, p.q, 2)?;
    let kq = (sel.k * p.q) as usize;
    let mut cols = vec![0u64; kq];
    for (col, target) in cols.iter_mut().enumerate() {
        let c = col as u64 % sel.k;
        let j = col as u64 / sel.k;
        *target = c + sel.k * ((j + sel.a[c as usize]) % p.q);
    }
    let exact = ExactMap::new(
        2,
        vec![
            ExactPart::Slide(grid),
            ExactPart::Columns {
                cols: kq as u64,
                mapping: cols,
            },
        ],
    )?;
    let analytic = if kq <= 32 {
        let slide = build_abc_conjugation(&sel.a, sel.k, p.l, p.q, 2)?;
        if slide.len() <= ANALYTIC_MOVE_LIMIT {
            let (eps, delta) = stage_eps_delta(p.n);
            Some(approximate_blockslide(&slide, eps, delta)?)
        } else {
            None
        }
    } else {
        None
    };
    let next = advance_params(&used, sel.k, p.l, p.s)?;
    let detail = TranslationStage {
        h: tp.h,
        gamma: rec.gamma.clone(),
        gamma_next: rec_next.gamma.clone(),
        s,
        k: sel.k,
        l: p.l,
        q: p.q,
        returns: sel.returns,
        r0: sel.r0,
    };
    Ok(StageIncrement {
        used,
        next,
        h: StageConjugation { exact, analytic },
        detail: StageDetail::Translation(detail),
    })
}

/// The bound `1/(n⁴·2^{l q})` that `δ_n` must stay below.
pub fn minimal_delta_bound(n: u32, l: u64, q: u64) -> Result<Rational, AbcError> {
    let lq = l
        .checked_mul(q)
        .and_then(|v| u32::try_from(v).ok())
        .ok_or(AbcError::Overflow)?;
    let n4 = BigInt::from(n).pow(4);
    Ok(Rational::new(BigInt::one(), n4 << lq))
}

/// The `s_n = n²l_n²` making `q_{n+1} = n²l³q²` (for `k = 1`), so every
/// trapping piece carries exactly `q_n` orbit points per period.
pub fn minimal_default_s(n: u32, l: u64) -> Result<u64, AbcError> {
    let n = n as u64;
    n.checked_mul(n)
        .and_then(|v| v.checked_mul(l))
        .and_then(|v| v.checked_mul(l))
        .ok_or(AbcError::Overflow)
}

/// Minimal-scenario stage: `h_{n+1}` is the minimality combinatorics on
/// `GridMin(l,q,r)` followed by the trapping shear `x₂ ← x₂ + κ̃(x₁)`, with
/// `δ_n = 1/(2n⁴·2^{lq})` and `δ̃ = δ_n/2^{lq+1}`.
pub fn build_stage_minimal(p: &AbCParams, r: u64) -> Result<StageIncrement, AbcError> {
    build_stage_minimal_with(p, r, MinimalOptions::default())
}

/// [`build_stage_minimal`] with parts switched off.
pub fn build_stage_minimal_with(
    p: &AbCParams,
    r: u64,
    opts: MinimalOptions,
) -> Result<StageIncrement, AbcError> {
    let mut used = p.clone();
    used.a = vec![0; p.k as usize];
    used.validate()?;
    let (n, l, q) = (p.n, p.l, p.q);
    if n < 2 {
        return Err(out_of_range("the trapping map needs n >= 2"));
    }
    if r == 0 || l % r != 0 {
        return Err(out_of_range(format!("r = {r} must divide l = {l}")));
    }
    let lq = u32::try_from(l * q).map_err(|_| AbcError::Overflow)?;
    let delta = minimal_delta_bound(n, l, q)? / Rational::from_integer(BigInt::from(2));
    let delta_tilde = &delta / Rational::from_integer(BigInt::one() << (lq + 1));
    let trapping = if opts.trapping {
        build_trapping_step(n as u64, l, q, r, &delta)?
    } else {
        StepFunction::uniform(
            Rational::new(BigInt::one(), BigInt::from(l * l * l * q)),
            &[Rational::zero()],
        )?
    };
    let trap_map =
        BlockSlideMap::from_moves(2, vec![BlockSlideMove::new(1, 0, trapping.clone(), 1)?])?;
    let mut parts = Vec::new();
    if opts.combinatorics {
        parts.push(ExactPart::Minimal {
            l,
            q,
            r,
            inverse: false,
        });
    }
    parts.push(ExactPart::Slide(trap_map));
    let exact = ExactMap::new(2, parts)?;
    let analytic = if opts.combinatorics && opts.trapping && l.pow(4) * r * q <= 1024 {
        let comb = build_minimal_combinatorics(l, q, r)?;
        if comb.len() <= ANALYTIC_MOVE_LIMIT {
            let eps = (p.eps_f64() / 2f64.powi(lq as i32)).min(0.1);
            let d = delta.to_f64().unwrap_or(0.0);
            let dt = delta_tilde.to_f64().unwrap_or(0.0);
            let h2 = approximate_blockslide(&comb, eps, d)?;
            let (beta, big_n) = uniform_beta(&trapping)?;
            let kappa = EntireStep::build(beta, big_n, eps.min(dt), dt, AmplitudeMode::General)?;
            let h1 = AnalyticBlockSlide::new(
                2,
                vec![AnalyticMove {
                    target: 1,
                    source: 0,
                    sign: 1,
                    step: AnalyticStep::Entire(kappa),
                }],
            )?;
            Some(h2.then(&h1))
        } else {
            None
        }
    } else {
        None
    };
    let next = advance_params(p, p.k, l, p.s)?;
    let detail = MinimalStage {
        n,
        l,
        q,
        r,
        delta,
        delta_tilde,
        trapping,
        combinatorics: opts.combinatorics,
    };
    Ok(StageIncrement {
        used,
        next,
        h: StageConjugation { exact, analytic },
        detail: StageDetail::Minimal(detail),
    })
}

impl MinimalStage {
    /// Pieces `u < n²` of one period of `κ̃` on which it vanishes.
    pub fn zero_pieces(&self) -> Vec<u64> {
        let pieces = (self.n as u64).pow(2);
        let width = Rational::new(BigInt::one(), BigInt::from(self.l.pow(3) * self.q * pieces));
        let half = Rational::new(BigInt::one(), BigInt::from(2));
        (0..pieces)
            .filter(|&u| {
                self.trapping
                    .eval(&((Rational::from_integer(BigInt::from(u)) + &half) * &width))
                    .is_zero()
            })
            .collect()
    }
}
