use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::TorusError;

pub type Rational = BigRational;

/// `n/d` as a rational.
pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Fractional part, always in `[0,1)`.
pub fn frac(x: &Rational) -> Rational {
    x - x.floor()
}

/// Reduces `x` modulo `p` into `[0,p)`.
pub fn modp(x: &Rational, p: &Rational) -> Rational {
    let k = (x / p).floor();
    x - k * p
}

pub fn lcm_big(a: &BigInt, b: &BigInt) -> BigInt {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    a.lcm(b)
}

/// A point of the torus with every coordinate kept in `[0,1)`.
///
/// Coordinates are indexed from 0; coordinate 0 is the one moved by the
/// rotation `φ^t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TorusPointExact {
    coords: Vec<Rational>,
}

impl TorusPointExact {
    pub fn new(coords: Vec<Rational>) -> Result<Self, TorusError> {
        if coords.is_empty() {
            return Err(TorusError::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        Ok(TorusPointExact {
            coords: coords.iter().map(frac).collect(),
        })
    }

    pub fn origin(d: usize) -> Self {
        TorusPointExact {
            coords: vec![Rational::zero(); d.max(1)],
        }
    }

    pub fn from_pairs(pairs: &[(i64, i64)]) -> Result<Self, TorusError> {
        Self::new(pairs.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &Rational {
        &self.coords[i]
    }

    pub(crate) fn set(&mut self, i: usize, v: Rational) {
        self.coords[i] = frac(&v);
    }

    pub fn to_f64(&self) -> Vec<f64> {
        use num_traits::ToPrimitive;
        self.coords
            .iter()
            .map(|c| c.to_f64().unwrap_or(0.0))
            .collect()
    }
}

/// The rotation `φ^t`: shifts coordinate 0 by `t` modulo 1.
pub fn rotate(x: &TorusPointExact, t: &Rational) -> TorusPointExact {
    let mut y = x.clone();
    let v = &y.coords[0] + t;
    y.set(0, v);
    y
}

pub(crate) fn is_unit_fraction_period(p: &Rational) -> bool {
    p.is_positive() && p.numer().is_one()
}
