use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::TowerError;

/// Data of one level of a periodic approximation `α_n = (p_n/q_n)·γ_n` of a
/// translation of `𝕋^h`. The transition data `s_n`, `m_n` links level `n`
/// to level `n+1` and is absent on the last level.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelRecord {
    pub gamma: Vec<BigInt>,
    pub p: BigInt,
    pub q: BigInt,
    pub r: BigInt,
    pub s: Option<BigInt>,
    pub m: Option<BigInt>,
    /// Fundamental domain `[start, start + length) × {0}` of the flow
    /// `T^{tγ_n}` on the transversal circle (`h = 2`), or a point (`h = 1`).
    pub domain: Option<(BigRational, BigRational)>,
    /// Diameter `d_n` of the fundamental domain.
    pub diam: Option<BigRational>,
    /// Boundary measure `σ_n` of the fundamental domain.
    pub sigma: Option<BigRational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranslationParams {
    pub h: usize,
    /// `γ_0`, used by the relation `q_1 = r_1·γ^{(h)}_0`.
    pub gamma0: Vec<BigInt>,
    pub levels: Vec<LevelRecord>,
}

fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

fn frac(n: BigInt, d: BigInt) -> BigRational {
    BigRational::new(n, d)
}

fn gcd_all(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

/// Interval domain `[0, 1/γ^{(2)})` with diameter `min(1/γ^{(2)}, 1/2)` and
/// two boundary points; for `h = 1` a single point with no boundary.
fn domain_data(
    gamma: &[BigInt],
) -> (
    Option<(BigRational, BigRational)>,
    Option<BigRational>,
    Option<BigRational>,
) {
    match gamma.len() {
        1 => {
            let z = BigRational::zero();
            (Some((z.clone(), z.clone())), Some(z.clone()), Some(z))
        }
        2 => {
            let len = frac(big(1), gamma[1].clone());
            let half = frac(big(1), big(2));
            let diam = if len < half { len.clone() } else { half };
            (
                Some((BigRational::zero(), len)),
                Some(diam),
                Some(BigRational::from_integer(big(2))),
            )
        }
        _ => (None, None, None),
    }
}

const SEARCH_T: u64 = 2_000;
const SEARCH_C: i64 = 64;

/// Parameters satisfying the periodic-approximation conditions (1)–(6) and, for
/// `h ≤ 2`, items (7)–(8) with interval fundamental domains.
///
/// Strategy: `m_n = 2γ^{(h)}_n`, `s_n ≡ 1 (mod q_n)` so that the last
/// coordinate obeys the congruence, the first coordinate is shifted by a
/// small multiple of `q_n` to restore `gcd = 1`, and `s_n` is enlarged until
/// the diameter and direction bounds hold.
pub fn translation_params(h: usize, levels: usize) -> Result<TranslationParams, TowerError> {
    if h == 0 || levels == 0 {
        return Err(TowerError::ParamOutOfRange(
            "h and levels must be positive".into(),
        ));
    }
    let mut gamma0 = vec![BigInt::zero(); h];
    gamma0[h - 1] = BigInt::one();
    let gamma1 = vec![BigInt::one(); h];
    let (domain, diam, sigma) = domain_data(&gamma1);
    let mut recs = vec![LevelRecord {
        gamma: gamma1,
        p: BigInt::one(),
        q: big(2),
        r: big(2),
        s: None,
        m: None,
        domain,
        diam,
        sigma,
    }];
    for n in 1..levels {
        let cur = recs.last().unwrap().clone();
        let (s, gamma_next) = next_gamma(&cur, n as u32, h)?;
        let m = &cur.gamma[h - 1] * 2;
        let q_next = &m * &s * &cur.q * &cur.q;
        let p_next = &cur.p * &m * &s * &cur.q + 1;
        let r_next = &q_next / &cur.gamma[h - 1];
        let last = recs.last_mut().unwrap();
        last.s = Some(s);
        last.m = Some(m);
        let (domain, diam, sigma) = domain_data(&gamma_next);
        recs.push(LevelRecord {
            gamma: gamma_next,
            p: p_next,
            q: q_next,
            r: r_next,
            s: None,
            m: None,
            domain,
            diam,
            sigma,
        });
    }
    let params = TranslationParams {
        h,
        gamma0,
        levels: recs,
    };
    verify_translation_params(&params)?;
    Ok(params)
}

fn next_gamma(cur: &LevelRecord, n: u32, h: usize) -> Result<(BigInt, Vec<BigInt>), TowerError> {
    if h == 1 {
        return Ok((BigInt::one(), cur.gamma.clone()));
    }
    let q = &cur.q;
    let gh = &cur.gamma[h - 1];
    let two_n1 = BigInt::one() << (n + 1);
    // Item (7): s > 2^{n+1}. Item (8) with |c| ≤ SEARCH_C: s > 2^{n+1}·q²·|c|/γ^{(h)}.
    let t0 = if h == 2 {
        (&two_n1 * q * q) / (gh * q) + 1
    } else {
        BigInt::one()
    };
    let mut gcd_found = false;
    for dt in 0..SEARCH_T {
        let t = &t0 + dt;
        let s = &t * q + 1;
        if h == 2 && s <= two_n1 {
            continue;
        }
        for c in (1..=SEARCH_C).flat_map(|c| [c, -c]) {
            let mut g: Vec<BigInt> = cur.gamma.iter().map(|x| x * &s).collect();
            g[0] += big(c) * q;
            if !gcd_all(&g).is_one() {
                continue;
            }
            gcd_found = true;
            if h == 2 && !item8_holds(&cur.gamma, &g, n, q, &BigRational::from_integer(big(2))) {
                continue;
            }
            return Ok((s, g));
        }
    }
    Err(TowerError::SearchExhausted {
        item: if gcd_found { 8 } else { 1 },
    })
}

fn direction(g: &[BigInt]) -> Vec<BigRational> {
    let last = g.last().unwrap();
    g.iter().map(|x| frac(x.clone(), last.clone())).collect()
}

fn item8_holds(g: &[BigInt], g_next: &[BigInt], n: u32, q: &BigInt, sigma: &BigRational) -> bool {
    if sigma.is_zero() {
        return true;
    }
    let a = direction(g);
    let b = direction(g_next);
    let dist = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).max().unwrap();
    let bound = BigRational::one() / (BigRational::from_integer(BigInt::one() << n) * sigma * q);
    dist < bound
}

/// Checks items (1)–(6) exactly, and (7)–(8) for `h ≤ 2`, reporting the
/// first violated item and its level (counted from 1).
pub fn verify_translation_params(tp: &TranslationParams) -> Result<(), TowerError> {
    let h = tp.h;
    let bad = |item: u8, level: usize| Err(TowerError::ItemViolated { item, level });
    if tp.gamma0.len() != h {
        return bad(1, 0);
    }
    for (i, rec) in tp.levels.iter().enumerate() {
        let n = i + 1;
        if rec.gamma.len() != h || rec.gamma[h - 1].is_zero() {
            return bad(1, n);
        }
        if !gcd_all(&rec.gamma).is_one() {
            return bad(1, n);
        }
        if !rec.q.is_positive() || !rec.p.gcd(&rec.q).is_one() {
            return bad(2, n);
        }
        let prev_h = if i == 0 {
            &tp.gamma0[h - 1]
        } else {
            &tp.levels[i - 1].gamma[h - 1]
        };
        if rec.q != &rec.r * prev_h {
            return bad(3, n);
        }
        let next = match tp.levels.get(i + 1) {
            Some(x) => x,
            None => break,
        };
        let (s, m) = match (&rec.s, &rec.m) {
            (Some(s), Some(m)) => (s, m),
            _ => return bad(4, n),
        };
        if next.gamma.len() != h || next.gamma[h - 1] != s * &rec.gamma[h - 1] {
            return bad(4, n);
        }
        for c in 0..h {
            if !(&next.gamma[c] - &rec.gamma[c]).is_multiple_of(&rec.q) {
                return bad(5, n);
            }
        }
        let lhs = frac(next.p.clone(), next.q.clone());
        let rhs = frac(rec.p.clone(), rec.q.clone()) + frac(BigInt::one(), m * s * &rec.q * &rec.q);
        if m.is_zero() || lhs != rhs {
            return bad(6, n);
        }
        if h <= 2 {
            let (expect_domain, expect_diam, _) = domain_data(&next.gamma);
            let sigma = rec.sigma.clone().unwrap_or_else(BigRational::zero);
            if next.domain != expect_domain
                || next.diam != expect_diam
                || rec.sigma != domain_data(&rec.gamma).2
            {
                return bad(7, n);
            }
            if !sigma.is_zero() {
                let d_next = next.diam.clone().unwrap();
                let bound = BigRational::one()
                    / (BigRational::from_integer((BigInt::one() << n) * &rec.gamma[h - 1])
                        * &sigma);
                if d_next >= bound {
                    return bad(7, n);
                }
            }
            if !item8_holds(&rec.gamma, &next.gamma, n as u32, &rec.q, &sigma) {
                return bad(8, n);
            }
        }
    }
    Ok(())
}
