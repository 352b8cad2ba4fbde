//! Fixed-point interval arithmetic at 200 bits, used as the reference for
//! tower comparisons and for certified threshold checks.
//!
//! Every operation evaluates at `PREC + GUARD` bits and then widens the result
//! outward by one unit at `PREC` bits, relative to its magnitude.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub const PREC: u64 = 200;
const GUARD: u64 = 64;
const W: u64 = PREC + GUARD;

fn one_w() -> BigInt {
    BigInt::one() << W
}

fn div_floor(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

fn div_ceil(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

/// `a·b / 2^W`, truncated toward minus infinity.
fn mul_w(a: &BigInt, b: &BigInt) -> BigInt {
    div_floor(&(a * b), &one_w())
}

/// A closed interval `[lo, hi] / 2^W`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: BigInt,
    hi: BigInt,
}

fn ln2_point() -> &'static BigInt {
    static LN2: OnceLock<BigInt> = OnceLock::new();
    LN2.get_or_init(|| atanh_series(&div_floor(&one_w(), &BigInt::from(3))) * 2)
}

fn pi_point() -> &'static BigInt {
    static PI: OnceLock<BigInt> = OnceLock::new();
    PI.get_or_init(|| {
        // Machin: π = 16·atan(1/5) − 4·atan(1/239).
        let a = atan_inv(5);
        let b = atan_inv(239);
        a * 16 - b * 4
    })
}

fn atan_inv(n: i64) -> BigInt {
    let n2 = BigInt::from(n * n);
    let mut term = div_floor(&one_w(), &BigInt::from(n));
    let mut sum = BigInt::zero();
    let mut k = 0i64;
    while !term.is_zero() {
        let t = div_floor(&term, &BigInt::from(2 * k + 1));
        if k % 2 == 0 {
            sum += t;
        } else {
            sum -= t;
        }
        term = div_floor(&term, &n2);
        k += 1;
    }
    sum
}

/// `Σ s^{2k+1}/(2k+1)` for `0 ≤ s < 1/2` in fixed point.
fn atanh_series(s: &BigInt) -> BigInt {
    let s2 = mul_w(s, s);
    let mut pow = s.clone();
    let mut sum = BigInt::zero();
    let mut k = 0i64;
    while !pow.is_zero() {
        sum += div_floor(&pow, &BigInt::from(2 * k + 1));
        pow = mul_w(&pow, &s2);
        k += 1;
    }
    sum
}

/// Natural log of a positive fixed-point value; absolute error a few units at `W`.
fn ln_point(x: &BigInt) -> BigInt {
    assert!(x.is_positive());
    let bits = x.bits() as i64;
    let e = bits - 1 - W as i64;
    let y = if e >= 0 {
        x >> (e as u64)
    } else {
        x << ((-e) as u64)
    };
    let one = one_w();
    let num = (&y - &one) << W;
    let den = &y + &one;
    let s = div_floor(&num, &den);
    atanh_series(&s) * 2 + ln2_point() * BigInt::from(e)
}

/// `e^x` of a fixed-point value; relative error a few units at `W`.
fn exp_point(x: &BigInt) -> BigInt {
    let ln2 = ln2_point();
    let n = div_floor(&(x + (ln2 >> 1)), ln2);
    let r = x - &n * ln2;
    // Halve the argument a few times to speed the series up.
    let halvings = 8u32;
    let rr = div_floor(&r, &BigInt::from(1u64 << halvings));
    let mut term = one_w();
    let mut sum = one_w();
    let mut k = 1i64;
    loop {
        term = (&term * &rr / one_w()) / BigInt::from(k);
        if term.is_zero() {
            break;
        }
        sum += &term;
        k += 1;
    }
    for _ in 0..halvings {
        sum = mul_w(&sum, &sum);
    }
    let n = n.to_i64().expect("exponent within range");
    if n >= 0 {
        sum << (n as u64)
    } else {
        sum >> ((-n) as u64)
    }
}

/// Widening by one unit at `PREC` bits relative to `|v|`, plus one absolute unit.
fn slack(v: &BigInt) -> BigInt {
    (v.abs() >> PREC) + (BigInt::one() << GUARD)
}

impl Interval {
    pub fn point_exact(v: BigInt) -> Interval {
        Interval {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn from_int(n: i64) -> Interval {
        Interval::point_exact(BigInt::from(n) << W)
    }

    pub fn from_bigint(n: &BigInt) -> Interval {
        Interval::point_exact(n << W)
    }

    pub fn from_rational(r: &BigRational) -> Interval {
        let num = r.numer() << W;
        Interval {
            lo: div_floor(&num, r.denom()),
            hi: div_ceil(&num, r.denom()),
        }
    }

    /// Exact conversion of a finite float.
    pub fn from_f64(x: f64) -> Interval {
        let r = BigRational::from_float(x).expect("finite");
        Interval::from_rational(&r)
    }

    pub fn ln2() -> Interval {
        let p = ln2_point().clone();
        let s = slack(&p);
        Interval {
            lo: &p - &s,
            hi: p + s,
        }
    }

    pub fn pi() -> Interval {
        let p = pi_point().clone();
        let s = slack(&p);
        Interval {
            lo: &p - &s,
            hi: p + s,
        }
    }

    pub fn lo_f64(&self) -> f64 {
        fixed_to_f64(&self.lo)
    }

    pub fn hi_f64(&self) -> f64 {
        fixed_to_f64(&self.hi)
    }

    pub fn mid_f64(&self) -> f64 {
        fixed_to_f64(&((&self.lo + &self.hi) >> 1))
    }

    pub fn width_f64(&self) -> f64 {
        fixed_to_f64(&(&self.hi - &self.lo))
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let prods = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let mn = prods.iter().min().unwrap();
        let mx = prods.iter().max().unwrap();
        Interval {
            lo: div_floor(mn, &one_w()),
            hi: div_ceil(mx, &one_w()),
        }
    }

    /// Division by an interval that excludes zero.
    pub fn div(&self, o: &Interval) -> Interval {
        assert!(
            o.lo.is_positive() || o.hi.is_negative(),
            "divisor interval contains zero"
        );
        let w = one_w();
        let q = |a: &BigInt, b: &BigInt, up: bool| {
            let n = a * &w;
            if up {
                div_ceil(&n, b)
            } else {
                div_floor(&n, b)
            }
        };
        let cands_lo = [
            q(&self.lo, &o.lo, false),
            q(&self.lo, &o.hi, false),
            q(&self.hi, &o.lo, false),
            q(&self.hi, &o.hi, false),
        ];
        let cands_hi = [
            q(&self.lo, &o.lo, true),
            q(&self.lo, &o.hi, true),
            q(&self.hi, &o.lo, true),
            q(&self.hi, &o.hi, true),
        ];
        Interval {
            lo: cands_lo.iter().min().unwrap().clone(),
            hi: cands_hi.iter().max().unwrap().clone(),
        }
    }

    pub fn ln(&self) -> Interval {
        assert!(self.lo.is_positive(), "log of a non-positive interval");
        let a = ln_point(&self.lo);
        let b = ln_point(&self.hi);
        Interval {
            lo: &a - slack(&a),
            hi: &b + slack(&b),
        }
    }

    pub fn exp(&self) -> Interval {
        let a = exp_point(&self.lo);
        let b = exp_point(&self.hi);
        Interval {
            lo: &a - slack(&a),
            hi: &b + slack(&b),
        }
    }

    /// Certified `self < o`.
    pub fn lt(&self, o: &Interval) -> bool {
        self.hi < o.lo
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        let p = Interval::from_f64(x);
        self.lo <= p.lo && p.hi <= self.hi
    }

    /// Largest integer not above the upper end.
    pub fn floor_hi(&self) -> BigInt {
        div_floor(&self.hi, &one_w())
    }
}

fn fixed_to_f64(v: &BigInt) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        let shift = bits.saturating_sub(60);
        let top = (v >> shift).to_f64().unwrap();
        top * 2f64.powi(shift as i32) / 2f64.powi(W as i32)
    } else {
        let shift = bits - 60;
        let top = (v >> shift).to_f64().unwrap();
        let e = shift as f64 - W as f64;
        if e > 1100.0 {
            if v.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        } else {
            top * 2f64.powf(e)
        }
    }
}
