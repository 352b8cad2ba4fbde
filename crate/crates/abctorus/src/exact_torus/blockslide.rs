use num_traits::Zero;

use super::point::{Rational, TorusPointExact};
use super::step::StepFunction;
use super::TorusError;

/// One shear `x[target] += sign * step(x[source])` modulo 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSlideMove {
    pub target: usize,
    pub source: usize,
    pub step: StepFunction,
    pub sign: i8,
}

impl BlockSlideMove {
    pub fn new(
        target: usize,
        source: usize,
        step: StepFunction,
        sign: i8,
    ) -> Result<Self, TorusError> {
        if target == source {
            return Err(TorusError::InvalidStep("source and target coincide".into()));
        }
        if sign != 1 && sign != -1 {
            return Err(TorusError::InvalidStep("sign must be +1 or -1".into()));
        }
        Ok(BlockSlideMove {
            target,
            source,
            step,
            sign,
        })
    }

    pub fn inverse(&self) -> Self {
        BlockSlideMove {
            sign: -self.sign,
            ..self.clone()
        }
    }

    pub fn apply(&self, x: &mut TorusPointExact) {
        let s = self.step.eval(x.coord(self.source)).clone();
        let v = if self.sign > 0 {
            x.coord(self.target) + s
        } else {
            x.coord(self.target) - s
        };
        x.set(self.target, v);
    }

    /// Constant shift of coordinate 0, i.e. the rotation `φ^t` written as a move.
    pub fn is_rotation(&self) -> bool {
        self.target == 0 && self.step.is_constant()
    }
}

/// A finite composition of shears. `moves[0]` is applied first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSlideMap {
    dim: usize,
    moves: Vec<BlockSlideMove>,
}

impl BlockSlideMap {
    pub fn identity(dim: usize) -> Self {
        BlockSlideMap {
            dim,
            moves: Vec::new(),
        }
    }

    pub fn from_moves(dim: usize, moves: Vec<BlockSlideMove>) -> Result<Self, TorusError> {
        let mut m = Self::identity(dim);
        for mv in moves {
            m.push(mv)?;
        }
        Ok(m)
    }

    /// `φ^t` as a one-move map (coordinate 0 shifted, sourced from coordinate 1).
    pub fn rotation(dim: usize, t: &Rational) -> Result<Self, TorusError> {
        let mut m = Self::identity(dim);
        m.push_rotation(t)?;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn moves(&self) -> &[BlockSlideMove] {
        &self.moves
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn push(&mut self, mv: BlockSlideMove) -> Result<(), TorusError> {
        if mv.target >= self.dim || mv.source >= self.dim {
            return Err(TorusError::DimensionMismatch {
                expected: self.dim,
                got: mv.target.max(mv.source) + 1,
            });
        }
        self.moves.push(mv);
        Ok(())
    }

    /// Appends `φ^t`, merging with a directly preceding rotation.
    pub fn push_rotation(&mut self, t: &Rational) -> Result<(), TorusError> {
        if self.dim < 2 {
            return Err(TorusError::DimensionMismatch {
                expected: 2,
                got: self.dim,
            });
        }
        if t.is_zero() {
            return Ok(());
        }
        if let Some(last) = self.moves.last() {
            if last.is_rotation() {
                let prev = last.step.values()[0].clone() * Rational::from_integer(last.sign.into());
                self.moves.pop();
                return self.push_rotation_raw(&(prev + t));
            }
        }
        self.push_rotation_raw(t)
    }

    fn push_rotation_raw(&mut self, t: &Rational) -> Result<(), TorusError> {
        let t = super::point::frac(t);
        if t.is_zero() {
            return Ok(());
        }
        self.push(BlockSlideMove::new(0, 1, StepFunction::constant(t), 1)?)
    }

    /// Applies `self` first, then `other`.
    pub fn then(&self, other: &BlockSlideMap) -> Result<BlockSlideMap, TorusError> {
        if self.dim != other.dim {
            return Err(TorusError::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut m = self.clone();
        m.extend(other)?;
        Ok(m)
    }

    pub fn extend(&mut self, other: &BlockSlideMap) -> Result<(), TorusError> {
        for mv in &other.moves {
            if mv.is_rotation() {
                let t = mv.step.values()[0].clone() * Rational::from_integer(mv.sign.into());
                self.push_rotation(&t)?;
            } else {
                self.push(mv.clone())?;
            }
        }
        Ok(())
    }

    pub fn inverse(&self) -> BlockSlideMap {
        BlockSlideMap {
            dim: self.dim,
            moves: self.moves.iter().rev().map(|m| m.inverse()).collect(),
        }
    }

    pub fn power(&self, n: usize) -> BlockSlideMap {
        let mut m = BlockSlideMap::identity(self.dim);
        for _ in 0..n {
            m.extend(self).expect("same dimension");
        }
        m
    }

    /// `c ∘ self ∘ c⁻¹` in function notation: `c⁻¹` first, then `self`, then `c`.
    pub fn conjugated_by(&self, c: &BlockSlideMap) -> Result<BlockSlideMap, TorusError> {
        c.inverse().then(self)?.then(c)
    }

    pub fn apply(&self, x: &TorusPointExact) -> Result<TorusPointExact, TorusError> {
        if x.dim() != self.dim {
            return Err(TorusError::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        let mut y = x.clone();
        for mv in &self.moves {
            mv.apply(&mut y);
        }
        Ok(y)
    }
}

pub fn apply_blockslide(
    m: &BlockSlideMap,
    x: &TorusPointExact,
) -> Result<TorusPointExact, TorusError> {
    m.apply(x)
}
