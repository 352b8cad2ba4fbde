use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::point::{is_unit_fraction_period, lcm_big, modp, rat, Rational};
use super::TorusError;

/// A periodic piecewise-constant circle function with rational breakpoints.
///
/// The period is `1/N`. Pieces are left-closed and right-open; piece `i`
/// covers `[breakpoints[i], breakpoints[i+1])` and the last piece runs up to
/// the period.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepFunction {
    period: Rational,
    breakpoints: Vec<Rational>,
    values: Vec<Rational>,
}

impl StepFunction {
    pub fn new(
        period: Rational,
        breakpoints: Vec<Rational>,
        values: Vec<Rational>,
    ) -> Result<Self, TorusError> {
        if !is_unit_fraction_period(&period) {
            return Err(TorusError::InvalidStep(format!(
                "period {} is not 1/N",
                period
            )));
        }
        if breakpoints.is_empty() || !breakpoints[0].is_zero() {
            return Err(TorusError::InvalidStep("first breakpoint must be 0".into()));
        }
        if breakpoints.len() != values.len() {
            return Err(TorusError::InvalidStep(
                "one value per piece required".into(),
            ));
        }
        for w in breakpoints.windows(2) {
            if w[0] >= w[1] {
                return Err(TorusError::InvalidStep("breakpoints not increasing".into()));
            }
        }
        if *breakpoints.last().unwrap() >= period {
            return Err(TorusError::InvalidStep(
                "breakpoint outside the period".into(),
            ));
        }
        Ok(StepFunction {
            period,
            breakpoints,
            values,
        })
    }

    pub fn constant(v: Rational) -> Self {
        StepFunction {
            period: Rational::one(),
            breakpoints: vec![Rational::zero()],
            values: vec![v],
        }
    }

    /// Builds a step from `(start, value)` pieces, dropping empty pieces and
    /// merging neighbours with equal values.
    pub fn from_pieces(
        period: Rational,
        pieces: &[(Rational, Rational)],
    ) -> Result<Self, TorusError> {
        let mut bps: Vec<Rational> = Vec::new();
        let mut vals: Vec<Rational> = Vec::new();
        for (i, (start, v)) in pieces.iter().enumerate() {
            let end = pieces
                .get(i + 1)
                .map(|p| p.0.clone())
                .unwrap_or_else(|| period.clone());
            if *start >= end {
                continue;
            }
            if vals.last() == Some(v) {
                continue;
            }
            bps.push(start.clone());
            vals.push(v.clone());
        }
        if bps.is_empty() {
            return Err(TorusError::InvalidStep("no non-empty pieces".into()));
        }
        if !bps[0].is_zero() {
            return Err(TorusError::InvalidStep(
                "first piece must start at 0".into(),
            ));
        }
        Self::new(period, bps, vals)
    }

    /// `len` pieces of equal width tiling one period.
    pub fn uniform(period: Rational, values: &[Rational]) -> Result<Self, TorusError> {
        let w = &period / Rational::from_integer(BigInt::from(values.len()));
        let pieces: Vec<(Rational, Rational)> = values
            .iter()
            .enumerate()
            .map(|(i, v)| (&w * Rational::from_integer(BigInt::from(i)), v.clone()))
            .collect();
        Self::from_pieces(period, &pieces)
    }

    pub fn period(&self) -> &Rational {
        &self.period
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn is_constant(&self) -> bool {
        self.values.len() == 1
    }

    /// Value of the piece containing `x` reduced modulo the period.
    pub fn eval(&self, x: &Rational) -> &Rational {
        let y = modp(x, &self.period);
        let idx = self.breakpoints.partition_point(|b| *b <= y);
        &self.values[idx - 1]
    }

    pub fn scaled(&self, c: &Rational) -> StepFunction {
        StepFunction {
            period: self.period.clone(),
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Whether `s(x + t) = s(x)` for every `x`.
    pub fn is_periodic_with(&self, t: &Rational) -> bool {
        let shift = modp(t, &self.period);
        if shift.is_zero() {
            return true;
        }
        let mut probes: Vec<Rational> = self.breakpoints.clone();
        for b in &self.breakpoints {
            probes.push(modp(&(b - &shift), &self.period));
        }
        probes
            .iter()
            .all(|x| self.eval(x) == self.eval(&(x + &shift)))
    }

    /// LCM of the breakpoint and period denominators.
    pub fn domain_denominator(&self) -> BigInt {
        let mut m = self.period.denom().clone();
        for b in &self.breakpoints {
            m = lcm_big(&m, b.denom());
        }
        m
    }

    /// LCM of the value denominators.
    pub fn value_denominator(&self) -> BigInt {
        self.values
            .iter()
            .fold(BigInt::one(), |m, v| lcm_big(&m, v.denom()))
    }

    /// Piece boundaries over `[0,1)` with their values, unrolling the period.
    pub fn pieces_on_circle(&self) -> Vec<(Rational, Rational, Rational)> {
        let reps = self.period.denom().clone();
        let mut out = Vec::new();
        let mut r = BigInt::zero();
        while r < reps {
            let base = &self.period * Rational::from_integer(r.clone());
            for (i, b) in self.breakpoints.iter().enumerate() {
                let end = self
                    .breakpoints
                    .get(i + 1)
                    .cloned()
                    .unwrap_or_else(|| self.period.clone());
                out.push((&base + b, &base + end, self.values[i].clone()));
            }
            r += 1;
        }
        out
    }
}

/// Indicator of `[a,b)` on the circle, scaled by `v`, with the given period.
pub fn window(
    period: Rational,
    a: Rational,
    b: Rational,
    v: Rational,
) -> Result<StepFunction, TorusError> {
    let zero = Rational::zero();
    let mut pieces = vec![(zero.clone(), zero.clone())];
    pieces.push((a, v));
    pieces.push((b.clone(), zero.clone()));
    if b >= period {
        pieces.pop();
    }
    StepFunction::from_pieces(period, &pieces)
}

pub(crate) fn half() -> Rational {
    rat(1, 2)
}
