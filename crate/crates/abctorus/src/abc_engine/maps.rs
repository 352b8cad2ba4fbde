use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::scenarios::{StageDetail, StageIncrement};
use super::{out_of_range, AbCParams, AbcError, Scenario};
use crate::analytic_approx::AnalyticBlockSlide;
use crate::exact_torus::{
    frac, minimal_inverse_index, rotate, BlockSlideMap, Rational, RigidCellMap, TorusError,
    TorusPointExact,
};

/// Which model a computation runs in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Model {
    /// Rational block-slide maps.
    Exact,
    /// Entire approximations evaluated in floating point.
    Analytic,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Exact => "exact",
            Model::Analytic => "analytic",
        }
    }
}

impl std::str::FromStr for Model {
    type Err = AbcError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Model::Exact),
            "analytic" => Ok(Model::Analytic),
            _ => Err(out_of_range(format!("unknown model {s}"))),
        }
    }
}

/// One factor of an exact conjugation map.
#[derive(Clone, Debug, PartialEq)]
pub enum ExactPart {
    Slide(BlockSlideMap),
    /// Rigid permutation of the cells of a planar grid.
    Cells(RigidCellMap),
    /// Rigid permutation of the columns `[c/cols, (c+1)/cols)`: column `c`
    /// is translated onto column `mapping[c]`.
    Columns {
        cols: u64,
        mapping: Vec<u64>,
    },
    /// The minimality combinatorics on `GridMin(l,q,r)` in closed form
    /// (or its inverse), for grids too large to tabulate.
    Minimal {
        l: u64,
        q: u64,
        r: u64,
        inverse: bool,
    },
}

fn big(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

impl ExactPart {
    pub fn inverse(&self) -> ExactPart {
        match self {
            ExactPart::Slide(m) => ExactPart::Slide(m.inverse()),
            ExactPart::Cells(c) => ExactPart::Cells(c.inverse()),
            ExactPart::Columns { cols, mapping } => {
                let mut inv = vec![0; mapping.len()];
                for (a, &b) in mapping.iter().enumerate() {
                    inv[b as usize] = a as u64;
                }
                ExactPart::Columns {
                    cols: *cols,
                    mapping: inv,
                }
            }
            ExactPart::Minimal { l, q, r, inverse } => ExactPart::Minimal {
                l: *l,
                q: *q,
                r: *r,
                inverse: !inverse,
            },
        }
    }

    pub fn apply(&self, x: &TorusPointExact) -> Result<TorusPointExact, TorusError> {
        match self {
            ExactPart::Slide(m) => m.apply(x),
            ExactPart::Cells(c) => c.apply(x),
            ExactPart::Columns { cols, mapping } => {
                let c = big(*cols);
                let col = (x.coord(0) * &c).floor();
                let i = col
                    .to_integer()
                    .to_u64()
                    .ok_or(TorusError::InvalidIndexFunction)?;
                let target = big(mapping[i as usize]);
                let mut coords = x.coords().to_vec();
                coords[0] = frac(&(x.coord(0) + (target - col) / c));
                TorusPointExact::new(coords)
            }
            ExactPart::Minimal { l, q, r, inverse } => apply_minimal(*l, *q, *r, *inverse, x),
        }
    }

    /// Number of elementary operations, for reporting.
    pub fn size(&self) -> usize {
        match self {
            ExactPart::Slide(m) => m.len(),
            ExactPart::Cells(c) => c.mapping.len(),
            ExactPart::Columns { mapping, .. } => mapping.len(),
            ExactPart::Minimal { l, r, .. } => (l * l * l * r) as usize,
        }
    }
}

/// Forward image of the `GridMin(l,q,r)` cell `(i,j)` within one block of
/// `l²` columns; inverse of [`minimal_inverse_index`].
pub fn minimal_forward_index(i: u64, j: u64, l: u64, r: u64) -> (u64, u64) {
    if i < l {
        (j / r, i * r + j % r)
    } else {
        ((i / l) * l + j % l, (j / l) * l + i % l)
    }
}

fn apply_minimal(
    l: u64,
    q: u64,
    r: u64,
    inverse: bool,
    x: &TorusPointExact,
) -> Result<TorusPointExact, TorusError> {
    if x.dim() != 2 {
        return Err(TorusError::DimensionMismatch {
            expected: 2,
            got: x.dim(),
        });
    }
    let cols = big(l * l * l * q);
    let rows = big(l * r);
    let ci = (x.coord(0) * &cols).floor();
    let cj = (x.coord(1) * &rows).floor();
    let gi = ci
        .to_integer()
        .to_u64()
        .ok_or(TorusError::InvalidIndexFunction)?;
    let j = cj
        .to_integer()
        .to_u64()
        .ok_or(TorusError::InvalidIndexFunction)?;
    let (blk, i) = (gi / (l * l), gi % (l * l));
    let (ni, nj) = if inverse {
        minimal_inverse_index(i, j, l, r)
    } else {
        minimal_forward_index(i, j, l, r)
    };
    let ti = big(blk * l * l + ni);
    let tj = big(nj);
    TorusPointExact::new(vec![
        x.coord(0) + (ti - ci) / cols,
        x.coord(1) + (tj - cj) / rows,
    ])
}

/// A composition of exact parts; `parts[0]` is applied first.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactMap {
    dim: usize,
    parts: Vec<ExactPart>,
    inverse_parts: Vec<ExactPart>,
}

impl ExactMap {
    pub fn identity(dim: usize) -> Self {
        ExactMap {
            dim,
            parts: Vec::new(),
            inverse_parts: Vec::new(),
        }
    }

    pub fn new(dim: usize, parts: Vec<ExactPart>) -> Result<Self, AbcError> {
        for p in &parts {
            let d = match p {
                ExactPart::Slide(m) => m.dim(),
                ExactPart::Cells(_) | ExactPart::Minimal { .. } => 2,
                ExactPart::Columns { .. } => dim,
            };
            if d != dim {
                return Err(TorusError::DimensionMismatch {
                    expected: dim,
                    got: d,
                }
                .into());
            }
        }
        let inverse_parts = parts.iter().rev().map(ExactPart::inverse).collect();
        Ok(ExactMap {
            dim,
            parts,
            inverse_parts,
        })
    }

    pub fn from_slide(m: BlockSlideMap) -> Self {
        let dim = m.dim();
        ExactMap::new(dim, vec![ExactPart::Slide(m)]).expect("dimension taken from the map")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn parts(&self) -> &[ExactPart] {
        &self.parts
    }

    pub fn size(&self) -> usize {
        self.parts.iter().map(ExactPart::size).sum()
    }

    pub fn apply(&self, x: &TorusPointExact) -> Result<TorusPointExact, TorusError> {
        self.parts.iter().try_fold(x.clone(), |y, p| p.apply(&y))
    }

    pub fn apply_inverse(&self, x: &TorusPointExact) -> Result<TorusPointExact, TorusError> {
        self.inverse_parts
            .iter()
            .try_fold(x.clone(), |y, p| p.apply(&y))
    }

    pub fn inverse(&self) -> ExactMap {
        ExactMap {
            dim: self.dim,
            parts: self.inverse_parts.clone(),
            inverse_parts: self.parts.clone(),
        }
    }

    /// Applies `self` first, then `other`.
    pub fn then(&self, other: &ExactMap) -> Result<ExactMap, AbcError> {
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().cloned());
        ExactMap::new(self.dim, parts)
    }

    /// Whether `h∘φ^t = φ^t∘h` holds exactly at every given point.
    pub fn commutes_at(
        &self,
        t: &Rational,
        points: &[TorusPointExact],
    ) -> Result<bool, TorusError> {
        for x in points {
            if self.apply(&rotate(x, t))? != rotate(&self.apply(x)?, t) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A conjugation map `h_n` in both models.
#[derive(Clone, Debug, PartialEq)]
pub struct StageConjugation {
    pub exact: ExactMap,
    /// `None` where the entire approximation is too large to evaluate.
    pub analytic: Option<AnalyticBlockSlide>,
}

impl StageConjugation {
    pub fn identity(dim: usize) -> Self {
        StageConjugation {
            exact: ExactMap::identity(dim),
            analytic: Some(AnalyticBlockSlide::identity(dim)),
        }
    }
}

/// Stage `n` of a stack: its parameters and the map `h_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Level {
    /// `α_n` and, once stage `n+1` is built, the data `k_n, l_n, s_n, a_n`.
    pub params: AbCParams,
    pub h: StageConjugation,
    pub detail: StageDetail,
}

/// A stack of stages `1..=n_max`; `h_1` is the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct StageMaps {
    scenario: Scenario,
    dim: usize,
    levels: Vec<Level>,
}

/// Largest `|power|` accepted per unit of `q_n`.
const POWER_GUARD: u64 = 1000;

impl StageMaps {
    pub fn new(scenario: Scenario, dim: usize, first: AbCParams) -> Result<Self, AbcError> {
        if dim < 2 {
            return Err(TorusError::DimensionMismatch {
                expected: 2,
                got: dim,
            }
            .into());
        }
        if num_integer::Integer::gcd(&first.p, &first.q) != 1 {
            return Err(out_of_range("p_1 and q_1 must be coprime"));
        }
        let level = Level {
            params: first,
            h: StageConjugation::identity(dim),
            detail: StageDetail::Base,
        };
        Ok(StageMaps {
            scenario,
            dim,
            levels: vec![level],
        })
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Index of the last built stage.
    pub fn n_max(&self) -> u32 {
        self.levels.last().expect("at least one level").params.n
    }

    pub fn last_params(&self) -> &AbCParams {
        &self.levels.last().expect("at least one level").params
    }

    pub fn level(&self, n: u32) -> Result<&Level, AbcError> {
        let first = self.levels[0].params.n;
        if n < first {
            return Err(AbcError::LevelOutOfRange(n));
        }
        self.levels
            .get((n - first) as usize)
            .ok_or(AbcError::LevelOutOfRange(n))
    }

    /// Appends stage `n+1` built from the last stage.
    pub fn push(&mut self, inc: StageIncrement) -> Result<(), AbcError> {
        if inc.h.exact.dim() != self.dim {
            return Err(TorusError::DimensionMismatch {
                expected: self.dim,
                got: inc.h.exact.dim(),
            }
            .into());
        }
        let last = self.levels.last_mut().expect("at least one level");
        if inc.used.n != last.params.n || inc.used.p != last.params.p || inc.used.q != last.params.q
        {
            return Err(out_of_range("increment was built from a different stage"));
        }
        if inc.next.n != last.params.n + 1 {
            return Err(out_of_range("increment does not advance by one stage"));
        }
        last.params = inc.used;
        self.levels.push(Level {
            params: inc.next,
            h: inc.h,
            detail: inc.detail,
        });
        Ok(())
    }

    fn upto(&self, n: u32) -> Result<&[Level], AbcError> {
        self.level(n)?;
        let first = self.levels[0].params.n;
        Ok(&self.levels[..=(n - first) as usize])
    }

    /// `H_n = h_n∘…∘h_1` in the exact model.
    pub fn exact_conjugacy(&self, n: u32) -> Result<ExactMap, AbcError> {
        let mut parts = Vec::new();
        for lv in self.upto(n)? {
            parts.extend(lv.h.exact.parts().iter().cloned());
        }
        ExactMap::new(self.dim, parts)
    }

    /// `H_n` in the analytic model.
    pub fn analytic_conjugacy(&self, n: u32) -> Result<AnalyticBlockSlide, AbcError> {
        let mut out = AnalyticBlockSlide::identity(self.dim);
        for lv in self.upto(n)? {
            let a = lv.h.analytic.as_ref().ok_or(AbcError::NoAnalyticModel)?;
            out = out.then(a);
        }
        Ok(out)
    }

    /// Whether every `h_m`, `m ≤ n`, has an analytic form.
    pub fn has_analytic(&self, n: u32) -> bool {
        self.upto(n)
            .map(|lv| lv.iter().all(|l| l.h.analytic.is_some()))
            .unwrap_or(false)
    }

    pub fn alpha(&self, n: u32) -> Result<Rational, AbcError> {
        Ok(self.level(n)?.params.alpha())
    }

    fn check_power(&self, n: u32, power: i64) -> Result<(), AbcError> {
        let q = self.level(n)?.params.q;
        if power.unsigned_abs() > q.saturating_mul(POWER_GUARD) {
            return Err(out_of_range(format!(
                "|power| = {} exceeds q_n·{POWER_GUARD}",
                power.unsigned_abs()
            )));
        }
        Ok(())
    }
}

/// `T_n^{power}(x) = H_n⁻¹∘φ^{power·α_n}∘H_n(x)` in the exact model.
pub fn eval_stage_map(
    s: &StageMaps,
    n: u32,
    x: &TorusPointExact,
    power: i64,
) -> Result<TorusPointExact, AbcError> {
    s.check_power(n, power)?;
    if x.dim() != s.dim {
        return Err(TorusError::DimensionMismatch {
            expected: s.dim,
            got: x.dim(),
        }
        .into());
    }
    if power == 0 {
        return Ok(x.clone());
    }
    let h = s.exact_conjugacy(n)?;
    let t = s.alpha(n)? * Rational::from_integer(BigInt::from(power));
    Ok(h.apply_inverse(&rotate(&h.apply(x)?, &t))?)
}

/// `T_n^{power}(x)` in the analytic model.
pub fn eval_stage_map_analytic(
    s: &StageMaps,
    n: u32,
    x: &[f64],
    power: i64,
) -> Result<Vec<f64>, AbcError> {
    s.check_power(n, power)?;
    if x.len() != s.dim {
        return Err(TorusError::DimensionMismatch {
            expected: s.dim,
            got: x.len(),
        }
        .into());
    }
    if power == 0 {
        return Ok(x.to_vec());
    }
    let h = s.analytic_conjugacy(n)?;
    Ok(apply_conjugated_rotation(&h, &s.alpha(n)?, power, x))
}

/// `H⁻¹∘φ^{power·α}∘H(x)` for an analytic `H`; the rotation amount is
/// reduced modulo 1 exactly before conversion.
pub fn apply_conjugated_rotation(
    h: &AnalyticBlockSlide,
    alpha: &Rational,
    power: i64,
    x: &[f64],
) -> Vec<f64> {
    let t = frac(&(alpha * Rational::from_integer(BigInt::from(power))))
        .to_f64()
        .unwrap_or(0.0);
    let mut y = h.apply(x);
    y[0] = (y[0] + t).rem_euclid(1.0);
    h.inverse().apply(&y)
}
