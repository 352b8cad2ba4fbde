use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{ln2_tower, Interval, TowerReal};

/// Denominators with at most this many decimal digits are kept literally.
pub const LITERAL_DIGITS: u64 = 10_000;

/// `⌈10⁴·log₂10⌉`: bit length matching [`LITERAL_DIGITS`].
const LITERAL_BITS: u64 = 33_220;

#[derive(Clone, Debug, PartialEq)]
pub enum Denominator {
    Literal(BigInt),
    /// `q = 2^N` with `N ≥ coeff·e^{base^{q_prev}}`, where `q_prev` is the
    /// previous denominator of the recipe; `log2` is `N` in tower form.
    Symbolic {
        log2: TowerReal,
        coeff: f64,
        base: u64,
    },
}

impl Denominator {
    pub fn as_tower(&self) -> TowerReal {
        match self {
            Denominator::Literal(q) => TowerReal::from_bigint(q),
            Denominator::Symbolic { log2, .. } => log2.mul(&ln2_tower()).exp(),
        }
    }

    pub fn literal(&self) -> Option<&BigInt> {
        match self {
            Denominator::Literal(q) => Some(q),
            Denominator::Symbolic { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Convergent {
    /// Numerator, present when the denominator is literal.
    pub p: Option<BigInt>,
    pub q: Denominator,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TailBound {
    /// `|α − p_j/q_j|` known exactly.
    Exact(BigRational),
    /// `|α − p_j/q_j| < 2/q_{j+1}`.
    TwoOverNext,
}

/// Rational approximations `p_j/q_j` of a number `α` with tail certificates.
#[derive(Clone, Debug, PartialEq)]
pub struct LiouvilleRecipe {
    pub convergents: Vec<Convergent>,
    /// One entry per certified level; `tails.len() ≤ convergents.len()`.
    pub tails: Vec<TailBound>,
    pub k_target: u64,
}

impl LiouvilleRecipe {
    pub fn levels(&self) -> usize {
        self.tails.len()
    }
}

/// Outcome of one certificate check together with the form it used.
#[derive(Clone, Debug, PartialEq)]
pub struct LiouvilleCheck {
    pub holds: bool,
    pub symbolic: bool,
    pub note: String,
}

/// `α = Σ_i 2^{−N_i}` with `N_1 = 1` and `N_{j+1}` large enough that
/// `2/q_{j+1} < e^{−e^{K^{q_j}}}` for `K = k_target`, and `N_{j+1} ≥ 2N_j`.
///
/// Every numerator is odd, so `gcd(p_j, q_j) = 1`. Once `q_{j+1}` would
/// exceed the literal cutoff, `N_{j+1} = 2·e^{b^{q_j}}` with
/// `b = max(K, 2)` is kept symbolically.
pub fn liouville_generate(levels: usize, k_target: u64) -> LiouvilleRecipe {
    assert!(levels >= 1, "at least one level");
    let k = k_target.max(1);
    let mut convs = vec![Convergent {
        p: Some(BigInt::one()),
        q: Denominator::Literal(BigInt::from(2)),
    }];
    let mut n_cur: u64 = 1;
    for _ in 0..levels {
        let last = convs.last().unwrap().clone();
        let next = match (&last.q, &last.p) {
            (Denominator::Literal(q), Some(p)) => match literal_exponent(q, k) {
                Some(m) if m.max(2 * n_cur) <= LITERAL_BITS => {
                    let n_next = m.max(2 * n_cur);
                    let shift = n_next - n_cur;
                    n_cur = n_next;
                    Convergent {
                        p: Some((p << shift) + 1),
                        q: Denominator::Literal(BigInt::one() << n_next),
                    }
                }
                _ => symbolic_next(&last.q, k),
            },
            _ => symbolic_next(&last.q, k),
        };
        convs.push(next);
    }
    LiouvilleRecipe {
        convergents: convs,
        tails: vec![TailBound::TwoOverNext; levels],
        k_target,
    }
}

/// Smallest admissible exponent `⌊1 + e^{K^q}/ln2⌋ + 1` at 200 bits, or `None`
/// when it is beyond the literal range.
fn literal_exponent(q: &BigInt, k: u64) -> Option<u64> {
    let t = if k == 1 {
        Interval::from_int(1)
    } else {
        let x = q.to_f64()? * (k as f64).ln();
        if x > 12.0 {
            return None;
        }
        Interval::from_bigint(q)
            .mul(&Interval::from_int(k as i64).ln())
            .exp()
    };
    if t.hi_f64() > 30.0 {
        return None;
    }
    let m = Interval::from_int(1).add(&t.exp().div(&Interval::ln2()));
    let m: BigInt = m.floor_hi() + 1;
    m.to_u64()
}

fn symbolic_next(prev: &Denominator, k: u64) -> Convergent {
    let base = k.max(2);
    let qt = prev.as_tower();
    let n = (base as f64).ln();
    let expo = qt.mul_f64(n).exp();
    let log2 = expo.exp().mul_f64(2.0);
    Convergent {
        p: None,
        q: Denominator::Symbolic {
            log2,
            coeff: 2.0,
            base,
        },
    }
}

/// Binary truncations `⌊α·2^j⌋/2^j`, reduced, with strictly increasing
/// denominators and exact tails.
pub fn binary_truncation_recipe(
    alpha: &BigRational,
    levels: usize,
    k_target: u64,
) -> LiouvilleRecipe {
    let mut convs = Vec::new();
    let mut tails = Vec::new();
    let mut last_q = BigInt::zero();
    let mut j = 0u64;
    while convs.len() < levels {
        j += 1;
        let den = BigInt::one() << j;
        let num = (alpha * BigRational::from_integer(den.clone()))
            .floor()
            .to_integer();
        let g = num.gcd(&den);
        let (p, q) = if g.is_zero() {
            (num, den)
        } else {
            (&num / &g, &den / &g)
        };
        if q <= last_q {
            continue;
        }
        last_q = q.clone();
        let gap = (alpha - BigRational::new(p.clone(), q.clone())).abs();
        convs.push(Convergent {
            p: Some(p),
            q: Denominator::Literal(q),
        });
        tails.push(TailBound::Exact(gap));
    }
    LiouvilleRecipe {
        convergents: convs,
        tails,
        k_target,
    }
}

/// Whether `|α − p_level/q_level| < e^{−e^{k^{q_level}}}` is certified
/// (levels counted from 1).
pub fn liouville_verify(r: &LiouvilleRecipe, k: u64, level: usize) -> bool {
    liouville_check(r, k, level).holds
}

pub fn liouville_check(r: &LiouvilleRecipe, k: u64, level: usize) -> LiouvilleCheck {
    let fail = |note: &str| LiouvilleCheck {
        holds: false,
        symbolic: false,
        note: note.to_string(),
    };
    if level == 0 || level > r.levels() || k == 0 {
        return fail("level or k out of range");
    }
    let j = level - 1;
    let qj = &r.convergents[j].q;
    let gap = match &r.tails[j] {
        TailBound::Exact(g) => Some(g.clone()),
        TailBound::TwoOverNext => match r.convergents.get(j + 1).map(|c| &c.q) {
            Some(Denominator::Literal(qn)) => Some(BigRational::new(BigInt::from(2), qn.clone())),
            Some(Denominator::Symbolic { .. }) => None,
            None => return fail("missing tail certificate"),
        },
    };
    match gap {
        Some(g) => literal_check(&g, qj, k),
        None => symbolic_check(qj, &r.convergents[j + 1].q, k),
    }
}

/// Certified `G < e^{−e^{k^q}}` for an exact rational `G`, via
/// `ln ln(1/G) > k^q` evaluated with 200-bit intervals.
fn literal_check(g: &BigRational, q: &Denominator, k: u64) -> LiouvilleCheck {
    let done = |holds: bool, note: &str| LiouvilleCheck {
        holds,
        symbolic: false,
        note: note.to_string(),
    };
    if g.is_zero() {
        return done(true, "zero gap accepted");
    }
    let inv = Interval::from_rational(&g.recip());
    let l1 = inv.ln();
    if l1.hi_f64() <= 1.0 {
        return done(false, "gap at least 1/e");
    }
    if !l1.is_positive() || l1.lo_f64() <= 1.0 {
        return done(false, "undecided near gap 1/e");
    }
    let lhs = l1.ln();
    let q_lit = match q.literal() {
        Some(v) => v,
        None => return done(false, "symbolic denominator with literal tail"),
    };
    let rhs = if k == 1 {
        Interval::from_int(1)
    } else {
        let x = q_lit.to_f64().unwrap_or(f64::INFINITY) * (k as f64).ln();
        if x > 700.0 {
            // k^q > e^700 while ln ln(1/G) is below the log of a bit length.
            return done(false, "threshold exponent beyond range");
        }
        Interval::from_bigint(q_lit)
            .mul(&Interval::from_int(k as i64).ln())
            .exp()
    };
    let note = format!(
        "ln ln(1/gap) = {:.6e} vs k^q = {:.6e}",
        lhs.lo_f64(),
        rhs.hi_f64()
    );
    done(rhs.lt(&lhs), &note)
}

/// Symbolic level: `q_{j+1} = 2^N` with `N ≥ c·e^{b^{q_j}}`, so
/// `ln ln(1/tail) ≥ ln((N−1)·ln2) ≥ b^{q_j} + ln(c·ln2) + ln(1 − 1/N)`.
/// For `k ≤ b` this exceeds `k^{q_j}` once `ln(c·ln2) + ln(1 − 1/N) > 0`;
/// for `k > b` no certificate is available.
fn symbolic_check(qj: &Denominator, next: &Denominator, k: u64) -> LiouvilleCheck {
    let (log2, coeff, base) = match next {
        Denominator::Symbolic { log2, coeff, base } => (log2, *coeff, *base),
        Denominator::Literal(_) => unreachable!("literal next denominators are handled exactly"),
    };
    let lhs = log2
        .sub(&TowerReal::ONE)
        .ok()
        .map(|v| v.mul(&ln2_tower()))
        .and_then(|v| v.ln().ok())
        .map(|v| v.magnitude);
    let rhs = qj.as_tower().mul_f64((k as f64).ln()).exp();
    let trail = format!(
        "ln ln(1/tail) = {} vs k^q = {}",
        lhs.map(|v| v.to_string()).unwrap_or_else(|| "?".into()),
        rhs
    );
    if k > base {
        return LiouvilleCheck {
            holds: false,
            symbolic: true,
            note: format!("k above certified base; {trail}"),
        };
    }
    // N ≥ c·e, so ln(1 − 1/N) ≥ ln(1 − 1/(c·e)).
    let c = Interval::from_f64(coeff);
    let ce = c.mul(&Interval::from_int(1).exp());
    let margin = c.mul(&Interval::ln2()).ln().add(
        &Interval::from_int(1)
            .sub(&Interval::from_int(1).div(&ce))
            .ln(),
    );
    let holds = margin.is_positive();
    let note = format!("{trail}, certified margin {:.6}", margin.lo_f64());
    LiouvilleCheck {
        holds,
        symbolic: true,
        note,
    }
}

/// Strict tower comparison `ln(lnInvTail) > k^q`, where `lnInvTail` is
/// `ln(1/tail)`; a tie is not accepted.
pub fn tail_beats_threshold(ln_inv_tail: &TowerReal, k: u64, q: &TowerReal) -> bool {
    let lhs = match ln_inv_tail.ln() {
        Ok(v) if !v.negative => v.magnitude,
        _ => return false,
    };
    let rhs = q.mul_f64((k as f64).ln()).exp();
    matches!(lhs.certified_cmp(&rhs), Ok(Ordering::Greater))
}
