use std::cmp::Ordering;
use std::f64::consts::E;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use super::TowerError;

/// Relative mantissa tolerance below which two towers count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Largest magnitude handled with plain floating-point arithmetic.
const FLOAT_LIMIT: f64 = 1e300;

/// A non-negative real `exp^h(m)`, or its reciprocal.
///
/// Normal form:
/// * zero is `(0, 0)`;
/// * values in `[1/e, e)` are `(0, x)`;
/// * values `≥ e` are `(h, m)` with `h ≥ 1` and `m ∈ [1, e)`;
/// * values below `1/e` are stored as the reciprocal of a value `≥ e`
///   with `inverted` set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TowerReal {
    height: u32,
    mantissa: f64,
    inverted: bool,
}

/// A signed tower, used for logarithms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedTower {
    pub negative: bool,
    pub magnitude: TowerReal,
}

fn exp_iter(mut m: f64, h: u32) -> f64 {
    for _ in 0..h {
        m = m.exp();
        if !m.is_finite() {
            return f64::INFINITY;
        }
    }
    m
}

impl TowerReal {
    pub const ZERO: TowerReal = TowerReal {
        height: 0,
        mantissa: 0.0,
        inverted: false,
    };
    pub const ONE: TowerReal = TowerReal {
        height: 0,
        mantissa: 1.0,
        inverted: false,
    };

    /// `exp^h(m)` for any finite `m ≥ 0`, normalized.
    pub fn from_parts(height: u32, mantissa: f64) -> TowerReal {
        assert!(
            mantissa.is_finite() && mantissa >= 0.0,
            "mantissa must be finite and non-negative"
        );
        let (mut h, mut m) = (height, mantissa);
        while m >= E {
            m = m.ln();
            h += 1;
        }
        while h > 0 && m < 1.0 {
            m = m.exp();
            h -= 1;
        }
        if h == 0 {
            if m == 0.0 {
                return TowerReal::ZERO;
            }
            if m < 1.0 / E {
                let r = TowerReal::from_parts(0, 1.0 / m);
                return TowerReal {
                    inverted: true,
                    ..r
                };
            }
        }
        TowerReal {
            height: h,
            mantissa: m,
            inverted: false,
        }
    }

    pub fn from_f64(x: f64) -> TowerReal {
        assert!(x >= 0.0 && !x.is_nan(), "towers denote non-negative reals");
        if x.is_infinite() {
            panic!("infinite input");
        }
        TowerReal::from_parts(0, x)
    }

    pub fn from_u64(n: u64) -> TowerReal {
        TowerReal::from_f64(n as f64)
    }

    /// Exact-magnitude conversion of a non-negative big integer.
    pub fn from_bigint(n: &BigInt) -> TowerReal {
        assert!(!n.is_negative());
        if let Some(f) = n.to_f64().filter(|f| f.is_finite() && *f < FLOAT_LIMIT) {
            return TowerReal::from_f64(f);
        }
        TowerReal::from_parts(1, bigint_ln(n))
    }

    /// `1/n` for a positive big integer.
    pub fn recip_bigint(n: &BigInt) -> TowerReal {
        TowerReal::from_bigint(n).recip().expect("positive")
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    pub fn is_inverted(&self) -> bool {
        self.inverted
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    /// The denoted value if it is a finite float (tiny values may round to 0).
    pub fn to_f64(&self) -> Option<f64> {
        let v = exp_iter(self.mantissa, self.height);
        if !v.is_finite() {
            return if self.inverted { Some(0.0) } else { None };
        }
        Some(if self.inverted { 1.0 / v } else { v })
    }

    fn small_float(&self) -> Option<f64> {
        self.to_f64()
            .filter(|v| *v < FLOAT_LIMIT && (*v == 0.0 || *v > 1.0 / FLOAT_LIMIT))
    }

    pub fn recip(&self) -> Result<TowerReal, TowerError> {
        if self.is_zero() {
            return Err(TowerError::DivisionByZero);
        }
        if self.height == 0 {
            return Ok(TowerReal::from_f64(1.0 / self.mantissa));
        }
        Ok(TowerReal {
            inverted: !self.inverted,
            ..*self
        })
    }

    pub fn exp(&self) -> TowerReal {
        if self.is_zero() {
            return TowerReal::ONE;
        }
        if self.inverted {
            let v = self.to_f64().unwrap_or(0.0);
            return TowerReal::from_f64(v.exp());
        }
        TowerReal::from_parts(self.height + 1, self.mantissa)
    }

    pub fn ln(&self) -> Result<SignedTower, TowerError> {
        if self.is_zero() {
            return Err(TowerError::LogOfZero);
        }
        if self.height == 0 {
            return Ok(SignedTower::from_f64(self.mantissa.ln()));
        }
        let mag = TowerReal::from_parts(self.height - 1, self.mantissa);
        Ok(SignedTower {
            negative: self.inverted,
            magnitude: mag,
        })
    }

    pub fn mul(&self, other: &TowerReal) -> TowerReal {
        if self.is_zero() || other.is_zero() {
            return TowerReal::ZERO;
        }
        if let (Some(a), Some(b)) = (self.small_float(), other.small_float()) {
            let p = a * b;
            if p.is_finite() && p > 0.0 {
                return TowerReal::from_f64(p);
            }
        }
        // Logs that cancel to within the tie tolerance give a product of 1.
        let s = self
            .ln()
            .unwrap()
            .add(&other.ln().unwrap())
            .unwrap_or(SignedTower::from_f64(0.0));
        s.exp()
    }

    pub fn mul_f64(&self, c: f64) -> TowerReal {
        self.mul(&TowerReal::from_f64(c))
    }

    pub fn div(&self, other: &TowerReal) -> Result<TowerReal, TowerError> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn add(&self, other: &TowerReal) -> TowerReal {
        if self.is_zero() {
            return *other;
        }
        if other.is_zero() {
            return *self;
        }
        let (big, small) = if self.cmp_approx(other) == Ordering::Less {
            (other, self)
        } else {
            (self, other)
        };
        if negligible(small, big) {
            return *big;
        }
        if let Some(b) = big.small_float() {
            let s = small.to_f64().unwrap_or(0.0);
            return TowerReal::from_f64(b + s);
        }
        let r = ratio(small, big);
        let lb = big.ln().unwrap();
        let corr = SignedTower::from_f64(r.ln_1p());
        lb.add(&corr).expect("positive correction").exp()
    }

    pub fn add_f64(&self, c: f64) -> TowerReal {
        self.add(&TowerReal::from_f64(c))
    }

    /// `self − other`, defined when `self ≥ other` is certain.
    pub fn sub(&self, other: &TowerReal) -> Result<TowerReal, TowerError> {
        if other.is_zero() {
            return Ok(*self);
        }
        match self.certified_cmp(other)? {
            Ordering::Less => return Err(TowerError::Negative),
            Ordering::Equal => return Ok(TowerReal::ZERO),
            Ordering::Greater => {}
        }
        if negligible(other, self) {
            return Ok(*self);
        }
        if let (Some(a), Some(b)) = (self.small_float(), other.small_float()) {
            return Ok(TowerReal::from_f64((a - b).max(0.0)));
        }
        let r = ratio(other, self);
        if r >= 1.0 - TIE_TOLERANCE {
            return Err(TowerError::Ambiguous);
        }
        let la = self.ln()?;
        let corr = SignedTower::from_f64((-r).ln_1p());
        Ok(la.add(&corr)?.exp())
    }

    /// `self^e` for a non-negative tower exponent.
    pub fn pow(&self, e: &TowerReal) -> TowerReal {
        if e.is_zero() {
            return TowerReal::ONE;
        }
        if self.is_zero() {
            return TowerReal::ZERO;
        }
        let l = self.ln().unwrap();
        SignedTower {
            negative: l.negative,
            magnitude: l.magnitude.mul(e),
        }
        .exp()
    }

    pub fn powf(&self, e: f64) -> TowerReal {
        self.pow(&TowerReal::from_f64(e))
    }

    /// Order on denoted values without a tie guard.
    pub fn cmp_approx(&self, other: &TowerReal) -> Ordering {
        self.key_cmp(other)
    }

    fn class(&self) -> u8 {
        if self.is_zero() {
            0
        } else if self.inverted {
            1
        } else {
            2
        }
    }

    fn key_cmp(&self, other: &TowerReal) -> Ordering {
        let c = self.class().cmp(&other.class());
        if c != Ordering::Equal {
            return c;
        }
        let raw = self
            .height
            .cmp(&other.height)
            .then(self.mantissa.total_cmp(&other.mantissa));
        if self.inverted {
            raw.reverse()
        } else {
            raw
        }
    }

    fn near_tie(&self, other: &TowerReal) -> bool {
        if let (Some(a), Some(b)) = (self.small_float(), other.small_float()) {
            return (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs());
        }
        if self.class() != other.class() {
            return false;
        }
        let (a, b) = if self.height <= other.height {
            (self, other)
        } else {
            (other, self)
        };
        match b.height - a.height {
            0 => (a.mantissa - b.mantissa).abs() <= TIE_TOLERANCE * a.mantissa.max(b.mantissa),
            1 => a.mantissa >= E * (1.0 - TIE_TOLERANCE) && b.mantissa <= 1.0 + TIE_TOLERANCE,
            _ => false,
        }
    }

    /// Order on denoted values, refusing to decide near ties.
    pub fn certified_cmp(&self, other: &TowerReal) -> Result<Ordering, TowerError> {
        if self == other {
            return Ok(Ordering::Equal);
        }
        if self.near_tie(other) {
            return Err(TowerError::Ambiguous);
        }
        if let (Some(a), Some(b)) = (self.small_float(), other.small_float()) {
            return Ok(a.total_cmp(&b));
        }
        Ok(self.key_cmp(other))
    }

    pub fn certified_lt(&self, other: &TowerReal) -> Result<bool, TowerError> {
        Ok(self.certified_cmp(other)? == Ordering::Less)
    }

    /// `self < other` when certain, `false` when not or when tied.
    pub fn surely_lt(&self, other: &TowerReal) -> bool {
        matches!(self.certified_cmp(other), Ok(Ordering::Less))
    }

    /// A value strictly below `self` by a margin that survives normalization.
    pub fn shrunk(&self) -> TowerReal {
        if self.is_zero() {
            return TowerReal::ZERO;
        }
        if let Some(v) = self.small_float() {
            return TowerReal::from_f64(v / 2.0);
        }
        if self.inverted {
            let r = self.recip().expect("non-zero").bumped();
            return r.recip().expect("non-zero");
        }
        TowerReal::from_parts(self.height, self.mantissa * (1.0 - 1e-6))
    }

    /// A value strictly above `self` by a margin that survives normalization.
    pub fn bumped(&self) -> TowerReal {
        if self.is_zero() {
            return TowerReal::ONE;
        }
        if let Some(v) = self.small_float() {
            return TowerReal::from_f64(v * 2.0 + 1.0);
        }
        if self.inverted {
            return TowerReal::ONE;
        }
        TowerReal::from_parts(self.height, self.mantissa * (1.0 + 1e-6))
    }
}

/// True when `small/big < e^{-10^6}`, decided from heights alone.
///
/// For `big ≥ exp^4(1)` and `small ≤ exp^{h-3}(e)` the logs differ by at
/// least `exp^3(1) − exp^2(1) > 10^6`.
fn negligible(small: &TowerReal, big: &TowerReal) -> bool {
    if big.inverted || big.height < 4 {
        return false;
    }
    small.is_zero() || small.inverted || small.height + 3 <= big.height
}

/// `small/big` as a float in `[0,1]`.
fn ratio(small: &TowerReal, big: &TowerReal) -> f64 {
    let d = small.ln().unwrap().sub(&big.ln().unwrap());
    match d {
        Ok(d) => d.exp().to_f64().unwrap_or(0.0).min(1.0),
        Err(_) => 1.0,
    }
}

fn bigint_ln(n: &BigInt) -> f64 {
    let bits = n.bits();
    let shift = bits.saturating_sub(60);
    let top: BigInt = n >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

impl PartialOrd for TowerReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.key_cmp(other))
    }
}

impl fmt::Display for TowerReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.height == 0 {
            return write!(f, "{}", self.mantissa);
        }
        let body = format!("E^{}({:.15})", self.height, self.mantissa);
        if self.inverted {
            write!(f, "1/{}", body)
        } else {
            write!(f, "{}", body)
        }
    }
}

impl SignedTower {
    pub fn from_f64(x: f64) -> SignedTower {
        SignedTower {
            negative: x < 0.0,
            magnitude: TowerReal::from_f64(x.abs()),
        }
    }

    pub fn positive(t: TowerReal) -> SignedTower {
        SignedTower {
            negative: false,
            magnitude: t,
        }
    }

    pub fn neg(&self) -> SignedTower {
        SignedTower {
            negative: !self.negative && !self.magnitude.is_zero(),
            magnitude: self.magnitude,
        }
    }

    pub fn add(&self, other: &SignedTower) -> Result<SignedTower, TowerError> {
        if self.negative == other.negative {
            return Ok(SignedTower {
                negative: self.negative,
                magnitude: self.magnitude.add(&other.magnitude),
            });
        }
        if self.magnitude.is_zero() {
            return Ok(*other);
        }
        if other.magnitude.is_zero() {
            return Ok(*self);
        }
        let (big, small) = if self.magnitude.cmp_approx(&other.magnitude) == Ordering::Less {
            (other, self)
        } else {
            (self, other)
        };
        if let (Some(a), Some(b)) = (big.magnitude.small_float(), small.magnitude.small_float()) {
            let v = if big.negative { b - a } else { a - b };
            return Ok(SignedTower::from_f64(v));
        }
        let m = big.magnitude.sub(&small.magnitude)?;
        Ok(SignedTower {
            negative: big.negative && !m.is_zero(),
            magnitude: m,
        })
    }

    pub fn sub(&self, other: &SignedTower) -> Result<SignedTower, TowerError> {
        self.add(&other.neg())
    }

    pub fn exp(&self) -> TowerReal {
        let e = self.magnitude.exp();
        if self.negative {
            e.recip().expect("exp is positive")
        } else {
            e
        }
    }

    pub fn to_f64(&self) -> Option<f64> {
        self.magnitude
            .to_f64()
            .map(|v| if self.negative { -v } else { v })
    }
}

impl fmt::Display for SignedTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            write!(f, "-{}", self.magnitude)
        } else {
            write!(f, "{}", self.magnitude)
        }
    }
}

/// Convenience: `e^x` for a float, as a tower.
pub fn exp_f64(x: f64) -> TowerReal {
    SignedTower::from_f64(x).exp()
}
