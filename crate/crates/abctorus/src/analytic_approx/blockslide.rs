use num_traits::ToPrimitive;

use super::{
    eval_entire_step, out_of_range, uniform_beta, AmplitudeMode, AnalyticError, EntireStep,
};
use crate::exact_torus::{frac, BlockSlideMap};

/// The function added by one analytic shear. Constant steps are entire
/// already and are kept exact.
#[derive(Clone, Debug, PartialEq)]
pub enum AnalyticStep {
    Constant(f64),
    Entire(EntireStep),
}

impl AnalyticStep {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            AnalyticStep::Constant(v) => *v,
            AnalyticStep::Entire(s) => eval_entire_step(s, x),
        }
    }

    /// Value of the approximated step function.
    pub fn step_value(&self, x: f64) -> f64 {
        match self {
            AnalyticStep::Constant(v) => *v,
            AnalyticStep::Entire(s) => s.step_value(x),
        }
    }
}

/// `x[target] += sign · s(x[source])` modulo 1.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticMove {
    pub target: usize,
    pub source: usize,
    pub sign: i8,
    pub step: AnalyticStep,
}

/// Composition of analytic shears; `moves[0]` is applied first.
///
/// The error set `E` is the set of points whose exact partial orbit meets,
/// at some move, the collar set of that move widened by the accumulated
/// deviation [`AnalyticBlockSlide::margin`]. Outside `E` every move sees its
/// source coordinate in the same piece as the exact model does.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticBlockSlide {
    dim: usize,
    moves: Vec<AnalyticMove>,
}

/// Sup-distance on the torus.
pub fn torus_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).rem_euclid(1.0);
            d.min(1.0 - d)
        })
        .fold(0.0, f64::max)
}

impl AnalyticBlockSlide {
    pub fn new(dim: usize, moves: Vec<AnalyticMove>) -> Result<Self, AnalyticError> {
        for m in &moves {
            if m.target >= dim
                || m.source >= dim
                || m.target == m.source
                || (m.sign != 1 && m.sign != -1)
            {
                return Err(out_of_range("invalid analytic move"));
            }
        }
        Ok(AnalyticBlockSlide { dim, moves })
    }

    pub fn identity(dim: usize) -> Self {
        AnalyticBlockSlide {
            dim,
            moves: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn moves(&self) -> &[AnalyticMove] {
        &self.moves
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    fn entire_steps(&self) -> impl Iterator<Item = &EntireStep> {
        self.moves.iter().filter_map(|m| match &m.step {
            AnalyticStep::Entire(s) => Some(s),
            AnalyticStep::Constant(_) => None,
        })
    }

    /// Sum of the per-move proximity bounds: `sup_{x∉E} ‖h(x) − 𝔥(x)‖`
    /// is below this value.
    pub fn proximity(&self) -> f64 {
        self.entire_steps().map(|s| s.eps()).sum()
    }

    /// Widening applied to every collar when deciding membership in `E`.
    pub fn margin(&self) -> f64 {
        self.proximity()
    }

    /// Upper bound on `μ(E)`: each move contributes its collars plus the
    /// widening on both sides of each of its `lN` collars.
    pub fn error_measure_bound(&self) -> f64 {
        let m = self.margin();
        self.entire_steps()
            .map(|s| (s.delta() + 2.0 * m * (s.l() * s.n()) as f64).min(1.0))
            .sum()
    }

    fn run(&self, x: &[f64], model: impl Fn(&AnalyticStep, f64) -> f64) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "dimension mismatch");
        let mut y: Vec<f64> = x.iter().map(|v| v.rem_euclid(1.0)).collect();
        for m in &self.moves {
            let v = model(&m.step, y[m.source]);
            y[m.target] = (y[m.target] + f64::from(m.sign) * v).rem_euclid(1.0);
        }
        y
    }

    /// The analytic map.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.run(x, |s, v| s.eval(v))
    }

    /// The approximated block-slide map, evaluated in floating point.
    pub fn apply_step_model(&self, x: &[f64]) -> Vec<f64> {
        self.run(x, |s, v| s.step_value(v))
    }

    /// Membership in the error set `E`.
    pub fn in_error_set(&self, x: &[f64]) -> bool {
        let margin = self.margin();
        let mut y: Vec<f64> = x.iter().map(|v| v.rem_euclid(1.0)).collect();
        for m in &self.moves {
            if let AnalyticStep::Entire(s) = &m.step {
                let grid = (s.l() * s.n()) as f64;
                let u = y[m.source] * grid;
                if (u - u.round()).abs() / grid <= s.collar_radius() + margin {
                    return true;
                }
            }
            let v = m.step.step_value(y[m.source]);
            y[m.target] = (y[m.target] + f64::from(m.sign) * v).rem_euclid(1.0);
        }
        false
    }

    pub fn inverse(&self) -> Self {
        let moves = self
            .moves
            .iter()
            .rev()
            .map(|m| AnalyticMove {
                sign: -m.sign,
                ..m.clone()
            })
            .collect();
        AnalyticBlockSlide {
            dim: self.dim,
            moves,
        }
    }

    /// Applies `self` first, then `other`.
    pub fn then(&self, other: &AnalyticBlockSlide) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut moves = self.moves.clone();
        moves.extend(other.moves.iter().cloned());
        AnalyticBlockSlide {
            dim: self.dim,
            moves,
        }
    }

    /// `max ‖h(φ^t x) − φ^t h(x)‖` over the given points.
    pub fn rotation_residual(&self, t: f64, points: &[Vec<f64>]) -> f64 {
        let shift = |p: &[f64]| {
            let mut p = p.to_vec();
            p[0] = (p[0] + t).rem_euclid(1.0);
            p
        };
        points
            .iter()
            .map(|p| torus_dist(&self.apply(&shift(p)), &shift(&self.apply(p))))
            .fold(0.0, f64::max)
    }
}

/// An analytic map `(ε,δ)`-close to `m`.
///
/// With `M` non-constant moves and at most `B` collars per move, every move
/// uses `δ' = δ/(2M)` and `ε' = min(ε/(2M), δ/(8M²B))`. Deviations then stay
/// below `Mε' < ε`, and the widened collars have measure at most
/// `M(δ' + 2Mε'B) ≤ 3δ/4`.
pub fn approximate_blockslide(
    m: &BlockSlideMap,
    eps: f64,
    delta: f64,
) -> Result<AnalyticBlockSlide, AnalyticError> {
    if !(eps > 0.0 && delta > 0.0 && delta < 1.0) {
        return Err(out_of_range("eps and delta must be positive, delta < 1"));
    }
    let mut uniform = Vec::with_capacity(m.len());
    for mv in m.moves() {
        if mv.step.is_constant() {
            uniform.push(None);
        } else {
            uniform.push(Some(uniform_beta(&mv.step)?));
        }
    }
    let count = uniform.iter().filter(|u| u.is_some()).count();
    let collars = uniform
        .iter()
        .flatten()
        .map(|(b, n)| b.len() as u64 * n)
        .max()
        .unwrap_or(1);
    let mf = count.max(1) as f64;
    let delta_move = delta / (2.0 * mf);
    let eps_move = (eps / (2.0 * mf))
        .min(delta / (8.0 * mf * mf * collars as f64))
        .min(0.1);
    let mut moves = Vec::with_capacity(m.len());
    for (mv, u) in m.moves().iter().zip(uniform) {
        let step = match u {
            None => AnalyticStep::Constant(frac(&mv.step.values()[0]).to_f64().unwrap_or(0.0)),
            Some((beta, n)) => AnalyticStep::Entire(EntireStep::build(
                beta,
                n,
                eps_move,
                delta_move,
                AmplitudeMode::General,
            )?),
        };
        moves.push(AnalyticMove {
            target: mv.target,
            source: mv.source,
            sign: mv.sign,
            step,
        });
    }
    AnalyticBlockSlide::new(m.dim(), moves)
}
