//! Iterated-exponential magnitudes and the inequality checks built on them:
//! amplitude conditions, the lower bound on `q_n`, the convergence ledger,
//! Liouville-type certificates and periodic approximations of translations.
//!
//! Strict requirements are met by values produced with [`TowerReal::bumped`]
//! from the identically computed threshold, so that every certified
//! comparison has a mantissa margin far above the tie tolerance.

mod ledger;
mod liouville;
pub mod reference;
mod tower;
mod translation;

use std::cmp::Ordering;
use std::f64::consts::{LN_2, PI};

pub use ledger::{
    convergence_ledger, ledger_gaps, rho_prime, synthetic_stages, LedgerLine, LedgerReport,
    StageData,
};
pub use liouville::{
    binary_truncation_recipe, liouville_check, liouville_generate, liouville_verify,
    tail_beats_threshold, Convergent, Denominator, LiouvilleCheck, LiouvilleRecipe, TailBound,
    LITERAL_DIGITS,
};
pub use reference::Interval;
pub use tower::{exp_f64, SignedTower, TowerReal, TIE_TOLERANCE};
pub use translation::{
    translation_params, verify_translation_params, LevelRecord, TranslationParams,
};

/// Constant of the derivative estimate for the entire approximations.
pub const NORM_CONSTANT: f64 = 6.0 * PI;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TowerError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of zero")]
    LogOfZero,
    #[error("result would be negative")]
    Negative,
    #[error("comparison too close to decide")]
    Ambiguous,
    #[error("stage {stage}: link {link} ({name}) fails")]
    LinkFailed { stage: u32, link: u32, name: String },
    #[error("search exhausted while satisfying item ({item})")]
    SearchExhausted { item: u8 },
    #[error("level {level}: item ({item}) violated")]
    ItemViolated { item: u8, level: usize },
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
}

/// Total order of the denoted values, by normalized (height, mantissa).
pub fn tower_compare(a: &TowerReal, b: &TowerReal) -> Ordering {
    a.cmp_approx(b)
}

/// Right-hand sides of the two amplitude conditions,
/// `−(2l/πδ)·ln(−ln(1−ε/8))` and `(2l/πδ)·ln(−ln(ε/2l))`, as 200-bit intervals.
pub fn amplitude_thresholds(l: u64, eps: f64, delta: f64) -> (Interval, Interval) {
    let one = Interval::from_int(1);
    let e = Interval::from_f64(eps);
    let lf = Interval::from_int(l as i64);
    let factor = Interval::from_int(2)
        .mul(&lf)
        .div(&Interval::pi().mul(&Interval::from_f64(delta)));
    let x1 = one.sub(&e.div(&Interval::from_int(8)));
    let a1 = factor.mul(&x1.ln().neg().ln()).neg();
    let x2 = e.div(&Interval::from_int(2).mul(&lf));
    let a2 = factor.mul(&x2.ln().neg().ln());
    (a1, a2)
}

/// Whether `a` satisfies both amplitude conditions, certified at 200 bits.
/// Parameters outside `ε ∈ (0, 1/8)`, `δ > 0`, `l ≥ 1` give `false`.
pub fn check_amplitude(a: f64, l: u64, eps: f64, delta: f64) -> bool {
    if !(eps > 0.0 && eps < 0.125 && delta > 0.0 && l >= 1 && a.is_finite()) {
        return false;
    }
    let (a1, a2) = amplitude_thresholds(l, eps, delta);
    let av = Interval::from_f64(a);
    a1.lt(&av) && a2.lt(&av)
}

/// Amplitude conditions for `A = 2^{2n+5}·l²` with a tower-sized `l`, using
/// `ε = 1/(3·2^{n+1})` and `δ = 1/2^{n+1}`.
///
/// Both sides are divided by `l`: with `x = ε/8` the first condition follows
/// from `2^{2n+5}·l > (2/πδ)·ln(1/x)` because `−ln(1−x) ≥ x`, the second from
/// `2^{2n+5}·l > (2/πδ)·ln(ln(2l/ε))`.
pub fn check_stage_amplitude(n: u32, l: &TowerReal) -> bool {
    if let Some(lf) = l.to_f64().filter(|v| *v < 1e15) {
        let eps = 1.0 / (3.0 * 2f64.powi(n as i32 + 1));
        let delta = 1.0 / 2f64.powi(n as i32 + 1);
        let a = 2f64.powi(2 * n as i32 + 5) * lf * lf;
        return check_amplitude(a, lf.round() as u64, eps, delta);
    }
    let eps = 1.0 / (3.0 * 2f64.powi(n as i32 + 1));
    let delta = 1.0 / 2f64.powi(n as i32 + 1);
    let lhs = l.mul_f64(2f64.powi(2 * n as i32 + 5));
    let c = 2.0 / (PI * delta);
    let r1 = TowerReal::from_f64(c * (8.0 / eps).ln());
    let inner = l.mul_f64(2.0 / eps).ln().map(|s| s.magnitude);
    let r2 = match inner.and_then(|v| v.ln()) {
        Ok(v) => v.magnitude.mul_f64(c),
        Err(_) => return false,
    };
    r1.surely_lt(&lhs) && r2.surely_lt(&lhs)
}

/// Right-hand side `2C²·l·e^{4·e^{2^{2n+5}·l³}}` of the lower bound on `q_n`.
pub fn q_condition_rhs(l: &TowerReal, n: u32, c: f64) -> TowerReal {
    if c == 0.0 {
        return TowerReal::ZERO;
    }
    let inner = l.powf(3.0).mul_f64(2f64.powi(2 * n as i32 + 5));
    let e2 = inner.exp().mul_f64(4.0).exp();
    e2.mul(l).mul_f64(2.0 * c * c)
}

/// Whether `q ≥ 2C²·l·e^{4·e^{2^{2n+5}·l³}}`, certified in tower form.
pub fn check_q_condition(q: &TowerReal, l: &TowerReal, n: u32, c: f64) -> bool {
    let rhs = q_condition_rhs(l, n, c);
    matches!(
        q.certified_cmp(&rhs),
        Ok(Ordering::Greater) | Ok(Ordering::Equal)
    )
}

/// `ln 2` as a tower.
pub(crate) fn ln2_tower() -> TowerReal {
    TowerReal::from_f64(LN_2)
}
