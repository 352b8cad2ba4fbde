//! Orbit diagnostics of finite stages: minimality cover, trapping counts,
//! Birkhoff gaps to the measure simplex and measure drift.

mod birkhoff;
mod drift;
mod orbit;
mod report;
mod zones;

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::abc_engine::{AbcError, Level, MinimalStage, StageDetail, StageMaps};
use crate::analytic_approx::torus_dist;
use crate::exact_torus::{Rational, TorusError, TorusPointExact};

pub use birkhoff::{band_integrals, birkhoff_gap, BirkhoffGap};
pub use drift::{
    measure_drift, measure_drift_analytic, measure_drift_forward, DriftEstimate, DriftReport,
};
pub use orbit::{simulate_orbit, MinimalOrbit, PhiCell, Trace, MAX_STEPS};
pub use report::{heatmap_svg, line_plot_svg, rational_string, CsvTable, Series};
pub use zones::{
    minimality_cover, trapping_counts, zone_counts, CoverReport, OrbitStats, StartCover,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiagError {
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("the last stage is not a minimal-scenario stage")]
    NotMinimal,
    #[error("Lipschitz precondition fails: l = {l} but n²·‖DH⁻¹‖·Lip(f) = {required}")]
    LipschitzPreconditionFailed { l: u64, required: f64 },
    #[error(transparent)]
    Abc(#[from] AbcError),
    #[error(transparent)]
    Torus(#[from] TorusError),
}

pub(crate) fn out_of_range(msg: impl Into<String>) -> DiagError {
    DiagError::ParamOutOfRange(msg.into())
}

/// The last level of `s` together with its minimal-scenario data.
pub(crate) fn minimal_level(s: &StageMaps) -> Result<(&Level, &MinimalStage), DiagError> {
    let last = s.levels().last().ok_or(DiagError::NotMinimal)?;
    match &last.detail {
        StageDetail::Minimal(m) => Ok((last, m)),
        _ => Err(DiagError::NotMinimal),
    }
}

/// An independent random stream for task `index` of a run seeded by `seed`.
pub fn task_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A random point with coordinates `a/b`, `b < 10⁴`.
pub fn random_start(rng: &mut ChaCha8Rng) -> TorusPointExact {
    let coords = (0..2)
        .map(|_| {
            let den: i64 = rng.gen_range(2..10_000);
            Rational::new(rng.gen_range(0..den).into(), den.into())
        })
        .collect();
    TorusPointExact::new(coords).expect("coordinates in [0,1)")
}

/// Closed form of `∫∫ f` over a rectangle `[x0,x1]×[y0,y1]`.
pub type RectIntegral = fn(f64, f64, f64, f64) -> f64;

/// A test function on `𝕋²` with its Lipschitz constant and sup norm.
#[derive(Clone, Debug)]
pub struct TestFunction {
    pub id: String,
    pub eval: fn(&[f64]) -> f64,
    pub lipschitz: f64,
    pub sup: f64,
    pub rect_integral: RectIntegral,
}

impl PartialEq for TestFunction {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.lipschitz == other.lipschitz && self.sup == other.sup
    }
}

fn zero(_: &[f64]) -> f64 {
    0.0
}

impl TestFunction {
    /// `f ≡ 0`, the shift-free constant.
    pub fn zero() -> Self {
        TestFunction {
            id: "zero".into(),
            eval: zero,
            lipschitz: 0.0,
            sup: 0.0,
            rect_integral: |_, _, _, _| 0.0,
        }
    }

    /// `f ≡ 1`.
    pub fn one() -> Self {
        TestFunction {
            id: "one".into(),
            eval: |_| 1.0,
            lipschitz: 0.0,
            sup: 1.0,
            rect_integral: |x0, x1, y0, y1| (x1 - x0) * (y1 - y0),
        }
    }

    /// `f(x) = cos(2πx₂)`.
    pub fn cos_x2() -> Self {
        TestFunction {
            id: "cos2pi_x2".into(),
            eval: |x| (TAU * x[1]).cos(),
            lipschitz: TAU,
            sup: 1.0,
            rect_integral: |x0, x1, y0, y1| (x1 - x0) * ((TAU * y1).sin() - (TAU * y0).sin()) / TAU,
        }
    }

    /// `f(x) = sin(2πx₂)`.
    pub fn sin_x2() -> Self {
        TestFunction {
            id: "sin2pi_x2".into(),
            eval: |x| (TAU * x[1]).sin(),
            lipschitz: TAU,
            sup: 1.0,
            rect_integral: |x0, x1, y0, y1| (x1 - x0) * ((TAU * y0).cos() - (TAU * y1).cos()) / TAU,
        }
    }

    /// `f(x) = cos(2πx₁)`.
    pub fn cos_x1() -> Self {
        TestFunction {
            id: "cos2pi_x1".into(),
            eval: |x| (TAU * x[0]).cos(),
            lipschitz: TAU,
            sup: 1.0,
            rect_integral: |x0, x1, y0, y1| (y1 - y0) * ((TAU * x1).sin() - (TAU * x0).sin()) / TAU,
        }
    }

    pub fn by_name(name: &str) -> Result<Self, DiagError> {
        match name {
            "zero" => Ok(Self::zero()),
            "one" => Ok(Self::one()),
            "cos2pi_x2" => Ok(Self::cos_x2()),
            "sin2pi_x2" => Ok(Self::sin_x2()),
            "cos2pi_x1" => Ok(Self::cos_x1()),
            _ => Err(out_of_range(format!("unknown test function {name}"))),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    /// Largest ratio `|f(x) − f(y)|/d(x,y)` over `pairs` seeded random pairs;
    /// it must not exceed [`TestFunction::lipschitz`].
    pub fn observed_lipschitz(&self, pairs: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..pairs {
            let x = [rng.gen::<f64>(), rng.gen::<f64>()];
            let scale = 10f64.powi(-rng.gen_range(1..6));
            let y = [
                (x[0] + scale * rng.gen::<f64>()).rem_euclid(1.0),
                (x[1] + scale * rng.gen::<f64>()).rem_euclid(1.0),
            ];
            let d = torus_dist(&x, &y);
            if d > 0.0 {
                worst = worst.max((self.eval(&x) - self.eval(&y)).abs() / d);
            }
        }
        worst
    }

    /// Largest `|f|` over a `grid × grid` lattice; must not exceed [`TestFunction::sup`].
    pub fn observed_sup(&self, grid: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..grid {
            for j in 0..grid {
                let x = [i as f64 / grid as f64, j as f64 / grid as f64];
                worst = worst.max(self.eval(&x).abs());
            }
        }
        worst
    }
}
