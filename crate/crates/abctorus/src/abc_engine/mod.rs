//! Finite stages of the approximation-by-conjugation scheme
//! `T_n = H_n⁻¹∘φ^{α_n}∘H_n`, `H_n = h_n∘H_{n−1}`, for the circle, toral
//! translation and minimal scenarios, in exact and analytic form.

mod maps;
mod scenarios;
mod verify;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::analytic_approx::AnalyticError;
use crate::exact_torus::{Rational, TorusError};

pub use maps::{
    apply_conjugated_rotation, eval_stage_map, eval_stage_map_analytic, minimal_forward_index,
    ExactMap, ExactPart, Level, Model, StageConjugation, StageMaps,
};
pub use scenarios::{
    build_stage_circle, build_stage_minimal, build_stage_minimal_with, build_stage_translation,
    minimal_default_s, minimal_delta_bound, translation_index_function, MinimalOptions,
    MinimalStage, StageDetail, StageIncrement, TranslationStage,
};
pub use verify::{
    correspondence, parent_index, symmetric_difference_analytic, symmetric_difference_exact,
    verify_cyclic_permutation, Correspondence, CyclicReport, SymDiffEstimate,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AbcError {
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("geometric index selection is implemented for h <= 2, got h = {0}")]
    UnsupportedDimension(usize),
    #[error("integer overflow in the parameter recursion")]
    Overflow,
    #[error("level {0} has not been built")]
    LevelOutOfRange(u32),
    #[error("analytic model not available for this stage")]
    NoAnalyticModel,
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
}

pub(crate) fn out_of_range(msg: impl Into<String>) -> AbcError {
    AbcError::ParamOutOfRange(msg.into())
}

/// The scenario a stage stack realizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scenario {
    Circle,
    Translation,
    Minimal,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Circle => "circle",
            Scenario::Translation => "translation",
            Scenario::Minimal => "minimal",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = AbcError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "circle" => Ok(Scenario::Circle),
            "translation" => Ok(Scenario::Translation),
            "minimal" => Ok(Scenario::Minimal),
            _ => Err(out_of_range(format!("unknown scenario {s}"))),
        }
    }
}

/// Parameters of stage `n`: `α_n = p_n/q_n` and the numbers `k_n, l_n, s_n`,
/// `a_n` used to pass to stage `n+1`.
#[derive(Clone, Debug, PartialEq)]
pub struct AbCParams {
    pub n: u32,
    pub p: u64,
    pub q: u64,
    pub k: u64,
    pub l: u64,
    pub s: u64,
    pub eps: Rational,
    /// Index function `a_n : {0..k−1} → {0..q−1}`.
    pub a: Vec<u64>,
}

/// `ε_n = 1/(3·2^{n+1})`.
pub fn stage_eps(n: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::from(3) * (BigInt::one() << (n + 1)))
}

impl AbCParams {
    /// Stage `n` with `α_n = p/q`, `k = s = 1`, `l = 4`, `a ≡ 0`.
    pub fn new(n: u32, p: u64, q: u64) -> Result<Self, AbcError> {
        if n == 0 || q == 0 {
            return Err(out_of_range("need n >= 1 and q >= 1"));
        }
        if p.gcd(&q) != 1 {
            return Err(out_of_range(format!("gcd({p},{q}) != 1")));
        }
        Ok(AbCParams {
            n,
            p,
            q,
            k: 1,
            l: 4,
            s: 1,
            eps: stage_eps(n),
            a: vec![0],
        })
    }

    pub fn with_step(mut self, k: u64, l: u64, s: u64) -> Self {
        self.k = k;
        self.l = l;
        self.s = s;
        if self.a.len() as u64 != k {
            self.a = vec![0; k as usize];
        }
        self
    }

    pub fn alpha(&self) -> Rational {
        Rational::new(BigInt::from(self.p), BigInt::from(self.q))
    }

    pub fn eps_f64(&self) -> f64 {
        self.eps.to_f64().unwrap_or(0.0)
    }

    /// Checks the stage invariants: coprimality, `l` even, `a` in range.
    pub fn validate(&self) -> Result<(), AbcError> {
        if self.p.gcd(&self.q) != 1 {
            return Err(out_of_range(format!("gcd({}, {}) != 1", self.p, self.q)));
        }
        if self.k == 0 || self.l == 0 || self.s == 0 {
            return Err(out_of_range("k, l, s must be positive"));
        }
        if self.l % 2 == 1 {
            return Err(out_of_range(format!("l = {} must be even", self.l)));
        }
        if self.a.len() as u64 != self.k || self.a.iter().any(|&v| v >= self.q) {
            return Err(TorusError::InvalidIndexFunction.into());
        }
        Ok(())
    }

    /// Whether `ε_n < 2^{−q_n}`.
    pub fn eps_below_two_pow_minus_q(&self) -> bool {
        match u32::try_from(self.q) {
            Ok(q) if q < 1 << 16 => self.eps < Rational::new(BigInt::one(), BigInt::one() << q),
            _ => false,
        }
    }
}

/// `p_{n+1} = s k l q p + 1`, `q_{n+1} = s k l q²`.
pub fn advance_params(p: &AbCParams, k: u64, l: u64, s: u64) -> Result<AbCParams, AbcError> {
    if k == 0 || l == 0 || s == 0 {
        return Err(out_of_range("k, l, s must be at least 1"));
    }
    if l % 2 == 1 {
        return Err(out_of_range(format!("l = {l} must be even")));
    }
    let skl = s
        .checked_mul(k)
        .and_then(|v| v.checked_mul(l))
        .ok_or(AbcError::Overflow)?;
    let sklq = skl.checked_mul(p.q).ok_or(AbcError::Overflow)?;
    let q_next = sklq.checked_mul(p.q).ok_or(AbcError::Overflow)?;
    let p_next = sklq
        .checked_mul(p.p)
        .and_then(|v| v.checked_add(1))
        .ok_or(AbcError::Overflow)?;
    let n = p.n + 1;
    Ok(AbCParams {
        n,
        p: p_next,
        q: q_next,
        k,
        l,
        s,
        eps: stage_eps(n),
        a: vec![0; k as usize],
    })
}
