//! Entire `1/N`-periodic approximations of step functions built from the
//! envelopes `E(y) = e^{−e^{y}}`, their error collars and norm bounds, and the
//! `(ε,δ)`-approximation of whole block-slide maps.

mod blockslide;

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::exact_torus::{frac, Rational, StepFunction, TorusError};
use crate::tower_bounds::{amplitude_thresholds, check_amplitude, TowerReal, NORM_CONSTANT};

pub use blockslide::{
    approximate_blockslide, torus_dist, AnalyticBlockSlide, AnalyticMove, AnalyticStep,
};

/// Largest exponent whose `exp` is finite in double precision.
pub const EXP_LIMIT: f64 = 709.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalyticError {
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("value exceeds the double range; use the symbolic bound")]
    RangeOverflow,
    #[error(transparent)]
    Torus(#[from] TorusError),
}

fn out_of_range(msg: impl Into<String>) -> AnalyticError {
    AnalyticError::ParamOutOfRange(msg.into())
}

/// How the amplitude `A` is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AmplitudeMode {
    /// Smallest power of two above both amplitude thresholds.
    General,
    /// `A = 2^{2n+5}·l²` with `3ε = δ = 1/2^{n+1}`.
    Stage(u32),
}

/// `ε_n = 1/(3·2^{n+1})` and `δ_n = 1/2^{n+1}`.
pub fn stage_eps_delta(n: u32) -> (f64, f64) {
    let delta = 1.0 / 2f64.powi(n as i32 + 1);
    (delta / 3.0, delta)
}

fn check_eps_delta(eps: f64, delta: f64) -> Result<(), AnalyticError> {
    if !(eps > 0.0 && eps < 0.125) {
        return Err(out_of_range(format!("eps = {eps} not in (0, 1/8)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(out_of_range(format!("delta = {delta} not in (0, 1)")));
    }
    Ok(())
}

/// An amplitude meeting both amplitude conditions for `l` pieces.
pub fn choose_amplitude(
    l: u64,
    eps: f64,
    delta: f64,
    mode: AmplitudeMode,
) -> Result<f64, AnalyticError> {
    check_eps_delta(eps, delta)?;
    if l == 0 {
        return Err(out_of_range("l must be positive"));
    }
    let a = match mode {
        AmplitudeMode::Stage(n) => {
            if n == 0 {
                return Err(out_of_range("stage index starts at 1"));
            }
            if l < 4 {
                return Err(out_of_range(format!(
                    "stage amplitude needs l >= 4, got {l}"
                )));
            }
            let (se, sd) = stage_eps_delta(n);
            if (eps - se).abs() > 1e-15 * se || (delta - sd).abs() > 1e-15 * sd {
                return Err(out_of_range("stage mode needs 3 eps = delta = 1/2^(n+1)"));
            }
            2f64.powi(2 * n as i32 + 5) * (l as f64) * (l as f64)
        }
        AmplitudeMode::General => {
            let (a1, a2) = amplitude_thresholds(l, eps, delta);
            let hi = a1.hi_f64().max(a2.hi_f64());
            let mut a = 2f64.powi(hi.log2().floor() as i32);
            while a <= hi || !check_amplitude(a, l, eps, delta) {
                a *= 2.0;
            }
            while a / 2.0 > hi && check_amplitude(a / 2.0, l, eps, delta) {
                a /= 2.0;
            }
            a
        }
    };
    if !check_amplitude(a, l, eps, delta) {
        return Err(out_of_range(format!(
            "amplitude {a} fails the amplitude conditions"
        )));
    }
    Ok(a)
}

/// Parameters `(β, N, ε, δ, A)` of one entire approximation; `l = β.len()`.
#[derive(Clone, Debug, PartialEq)]
pub struct EntireStep {
    beta: Vec<f64>,
    n: u64,
    eps: f64,
    delta: f64,
    a: f64,
}

impl EntireStep {
    /// Validated record; `a` must satisfy both amplitude conditions.
    pub fn new(
        beta: Vec<f64>,
        n: u64,
        eps: f64,
        delta: f64,
        a: f64,
    ) -> Result<Self, AnalyticError> {
        let s = Self::unchecked(beta, n, eps, delta, a)?;
        if !check_amplitude(a, s.l(), eps, delta) {
            return Err(out_of_range(format!(
                "amplitude {a} fails the amplitude conditions"
            )));
        }
        Ok(s)
    }

    /// Same structural checks as [`EntireStep::new`] but any positive amplitude.
    pub fn unchecked(
        beta: Vec<f64>,
        n: u64,
        eps: f64,
        delta: f64,
        a: f64,
    ) -> Result<Self, AnalyticError> {
        check_eps_delta(eps, delta)?;
        if beta.is_empty() || !beta.len().is_multiple_of(2) {
            return Err(out_of_range(format!(
                "beta length {} must be even and positive",
                beta.len()
            )));
        }
        if beta.iter().any(|b| !(0.0..=1.0).contains(b)) {
            return Err(out_of_range("beta values must lie in [0,1]"));
        }
        if n == 0 {
            return Err(out_of_range("N must be positive"));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(out_of_range("A must be positive and finite"));
        }
        Ok(EntireStep {
            beta,
            n,
            eps,
            delta,
            a,
        })
    }

    /// Record with the amplitude chosen by `mode`.
    pub fn build(
        beta: Vec<f64>,
        n: u64,
        eps: f64,
        delta: f64,
        mode: AmplitudeMode,
    ) -> Result<Self, AnalyticError> {
        let a = choose_amplitude(beta.len() as u64, eps, delta, mode)?;
        Self::new(beta, n, eps, delta, a)
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn l(&self) -> u64 {
        self.beta.len() as u64
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn amplitude(&self) -> f64 {
        self.a
    }

    /// The approximated step `s̃`: `β_{j mod l}` on `[j/(lN), (j+1)/(lN))`.
    pub fn step_value(&self, x: f64) -> f64 {
        let l = self.beta.len();
        let t = (self.n as f64 * x).rem_euclid(1.0);
        self.beta[((t * l as f64) as usize).min(l - 1)]
    }

    /// Half-width `δ/(2lN)` of each collar.
    pub fn collar_radius(&self) -> f64 {
        self.delta / (2.0 * (self.l() * self.n) as f64)
    }

    /// Whether `x` lies in the error set `F`.
    pub fn in_error_set(&self, x: f64) -> bool {
        let m = (self.l() * self.n) as f64;
        let y = (x.rem_euclid(1.0)) * m;
        let dist = (y - y.round()).abs() / m;
        dist <= self.collar_radius()
    }
}

/// `E(y) = e^{−e^{y}}`, with `E(y) = 0` for `y > 709` and `E(y) = 1` for `y < −709`.
pub fn envelope(y: f64) -> f64 {
    if y > EXP_LIMIT {
        0.0
    } else if y < -EXP_LIMIT {
        1.0
    } else {
        (-y.exp()).exp()
    }
}

fn envelope_c(w: Complex64) -> Result<Complex64, AnalyticError> {
    if w.re < -EXP_LIMIT {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if w.re > EXP_LIMIT {
        // e^{−e^w} has modulus e^{−|e^w|·cos(Im w)} with |e^w| beyond the double range.
        return if w.im.cos() > 0.0 {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            Err(AnalyticError::RangeOverflow)
        };
    }
    let z = -w.exp();
    if z.re > EXP_LIMIT {
        return Err(AnalyticError::RangeOverflow);
    }
    Ok(z.exp())
}

fn combine<T>(beta: &[f64], w: &[T], lo: T, hi: T) -> T
where
    T: Copy
        + std::ops::Sub<Output = T>
        + std::ops::Add<Output = T>
        + std::ops::Mul<Output = T>
        + std::ops::Mul<f64, Output = T>,
{
    let l = beta.len();
    let half = l / 2;
    let diff = |i: usize| w[i] - w[(i + 1) % l];
    let mut first = diff(0) * beta[0];
    for (i, b) in beta.iter().enumerate().take(half).skip(1) {
        first = first + diff(i) * *b;
    }
    let mut second = diff(half) * beta[half];
    for (i, b) in beta.iter().enumerate().skip(half + 1) {
        second = second + diff(i) * *b;
    }
    first * lo + second * hi
}

/// Value of the entire approximation at a real point.
pub fn eval_entire_step(s: &EntireStep, x: f64) -> f64 {
    let l = s.beta.len();
    let t = (s.n as f64 * x).rem_euclid(1.0);
    let w: Vec<f64> = (0..l)
        .map(|i| envelope(-s.a * (TAU * (t - i as f64 / l as f64)).sin()))
        .collect();
    let base = (TAU * t).sin();
    combine(&s.beta, &w, envelope(-s.a * base), envelope(s.a * base))
}

/// Value of the entire approximation at a complex point.
///
/// Returns [`AnalyticError::RangeOverflow`] when the value leaves the double
/// range, and whenever `A·sinh(2πN|Im z|) > 709`: the phases of the inner
/// exponentials then exceed the double exponent range and values of size
/// `e^{e^{709}}` occur arbitrarily close to `z`.
pub fn eval_entire_step_complex(s: &EntireStep, z: Complex64) -> Result<Complex64, AnalyticError> {
    let l = s.beta.len();
    let nf = s.n as f64;
    if s.a * (TAU * nf * z.im.abs()).sinh() > EXP_LIMIT {
        return Err(AnalyticError::RangeOverflow);
    }
    let t = Complex64::new((nf * z.re).rem_euclid(1.0), nf * z.im);
    let mut w = Vec::with_capacity(l);
    for i in 0..l {
        let ph = (t - i as f64 / l as f64) * TAU;
        w.push(envelope_c(-ph.sin() * s.a)?);
    }
    let base = (t * TAU).sin();
    let v = combine(
        &s.beta,
        &w,
        envelope_c(-base * s.a)?,
        envelope_c(base * s.a)?,
    );
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(AnalyticError::RangeOverflow)
    }
}

/// The collars `I_i`, `0 ≤ i < lN`; each is a list of intervals `[a, b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorSet {
    pub collars: Vec<Vec<(f64, f64)>>,
}

impl ErrorSet {
    pub fn measure(&self) -> f64 {
        self.collars.iter().flatten().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        let x = x.rem_euclid(1.0);
        self.collars
            .iter()
            .flatten()
            .any(|&(a, b)| a <= x && x <= b)
    }
}

/// `I_0 = [0, δ/(2lN)] ∪ [1 − δ/(2lN), 1)` and `I_i` centred at `i/(lN)` of length `δ/(lN)`.
pub fn error_set(s: &EntireStep) -> ErrorSet {
    let m = s.l() * s.n;
    let r = s.collar_radius();
    let mut collars = vec![vec![(0.0, r), (1.0 - r, 1.0)]];
    for i in 1..m {
        let c = i as f64 / m as f64;
        collars.push(vec![(c - r, c + r)]);
    }
    ErrorSet { collars }
}

fn step_at(target: &StepFunction, j: u64, samples: u64) -> f64 {
    let x = Rational::new(BigInt::from(j), BigInt::from(samples));
    target.eval(&x).to_f64().unwrap_or(f64::NAN)
}

/// `max |s(x) − s̃(x)|` over the grid `j/samples` with points of `F` skipped.
pub fn verify_proximity(s: &EntireStep, target: &StepFunction, samples: u64) -> f64 {
    (0..samples)
        .filter_map(|j| {
            let x = j as f64 / samples as f64;
            if s.in_error_set(x) {
                return None;
            }
            Some((eval_entire_step(s, x) - step_at(target, j, samples)).abs())
        })
        .fold(0.0, f64::max)
}

/// Sweep table with columns `x,step,analytic,in_error_set`.
pub fn sweep_csv(s: &EntireStep, target: &StepFunction, samples: u64) -> String {
    let mut out = String::from("x,step,analytic,in_error_set\n");
    for j in 0..samples {
        let x = j as f64 / samples as f64;
        let _ = writeln!(
            out,
            "{x},{},{},{}",
            step_at(target, j, samples),
            eval_entire_step(s, x),
            u8::from(s.in_error_set(x))
        );
    }
    out
}

/// Sup and Lipschitz bounds of `s` on the strip `|Im z| < ρ`:
/// `2πNA·e^{2e^{X} + X + 2πNρ}` and `C·A·l·N·e^{4e^{X}}` with `X = A·e^{2πNρ}`.
pub fn norm_bounds_with(s: &EntireStep, rho: f64, c: f64) -> (TowerReal, TowerReal) {
    let nf = s.n as f64;
    let two_pi_n_rho = 2.0 * PI * nf * rho;
    let x = TowerReal::from_f64(two_pi_n_rho).exp().mul_f64(s.a);
    let ex = x.exp();
    let sup = ex
        .mul_f64(2.0)
        .add(&x)
        .add_f64(two_pi_n_rho)
        .exp()
        .mul_f64(2.0 * PI * nf * s.a);
    let lip = ex.mul_f64(4.0).exp().mul_f64(c * s.a * s.l() as f64 * nf);
    (sup, lip)
}

/// [`norm_bounds_with`] using the default constant `6π`.
pub fn norm_bounds(s: &EntireStep, rho: f64) -> (TowerReal, TowerReal) {
    norm_bounds_with(s, rho, NORM_CONSTANT)
}

/// Uniform form of a step: `(β, N)` with `β_j` the value on
/// `[j/(lN), (j+1)/(lN))`, reduced modulo 1 and padded to even length.
pub fn uniform_beta(step: &StepFunction) -> Result<(Vec<f64>, u64), AnalyticError> {
    let n0 = step
        .period()
        .denom()
        .to_u64()
        .ok_or_else(|| out_of_range("period too fine"))?;
    let big_n = Rational::from_integer(BigInt::from(n0));
    let mut l = BigInt::from(1);
    for b in step.breakpoints() {
        let u = b * &big_n;
        l = num_integer::Integer::lcm(&l, u.denom());
    }
    let mut l = l
        .to_u64()
        .filter(|v| *v <= 1 << 20)
        .ok_or_else(|| out_of_range("too many pieces"))?;
    let width = Rational::new(BigInt::from(1), BigInt::from(l * n0));
    let mut beta: Vec<f64> = (0..l)
        .map(|j| {
            let v = frac(step.eval(&(&width * Rational::from_integer(BigInt::from(j)))));
            v.to_f64().unwrap_or(0.0)
        })
        .collect();
    if l % 2 == 1 {
        beta = beta.iter().flat_map(|b| [*b, *b]).collect();
        l *= 2;
    }
    debug_assert_eq!(beta.len() as u64, l);
    Ok((beta, n0))
}

/// Which of the three circle-stage shears.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StagePsi {
    One,
    Two,
    Three,
}

/// `β` and `N` of the stage shear: `β⁽¹⁾ = (0, (l−i)/(l²q))` with `N = 1`,
/// `β⁽²⁾_i = i/l` with `N = lq`, `β⁽³⁾_i = i/(l²q)` with `N = 1`.
pub fn stage_beta(which: StagePsi, l: u64, q: u64) -> (Vec<f64>, u64) {
    let lf = l as f64;
    let d = lf * lf * q as f64;
    match which {
        StagePsi::One => (
            (0..l)
                .map(|i| if i == 0 { 0.0 } else { (l - i) as f64 / d })
                .collect(),
            1,
        ),
        StagePsi::Two => ((0..l).map(|i| i as f64 / lf).collect(), l * q),
        StagePsi::Three => ((0..l).map(|i| i as f64 / d).collect(), 1),
    }
}

/// The stage-`n` entire shear `ψ_{i,n+1}` with stage amplitude.
pub fn stage_entire_step(
    which: StagePsi,
    n: u32,
    l: u64,
    q: u64,
) -> Result<EntireStep, AnalyticError> {
    let (eps, delta) = stage_eps_delta(n);
    let (beta, big_n) = stage_beta(which, l, q);
    EntireStep::build(beta, big_n, eps, delta, AmplitudeMode::Stage(n))
}
