use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{minimal_level, out_of_range, task_rng, DiagError};
use crate::abc_engine::{minimal_forward_index, MinimalStage, StageMaps};
use crate::exact_torus::{frac, minimal_inverse_index, Rational};
use rand::Rng;

/// `μ(h_{n+1}⁻¹(N_t) △ N_t)` in the exact model.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftReport {
    pub t: u64,
    pub l: u64,
    pub drift: Rational,
    /// `1/l_n`.
    pub bound: Rational,
}

impl DriftReport {
    pub fn passed(&self) -> bool {
        self.drift <= self.bound
    }
}

/// Monte Carlo estimate of the drift in the analytic model.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftEstimate {
    pub t: u64,
    pub samples: u64,
    pub mismatches: u64,
    pub estimate: f64,
    /// Half-width of the 95% normal-approximation binomial interval.
    pub radius95: f64,
    pub bound: f64,
}

fn big(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn inter(a0: &Rational, a1: &Rational, b0: &Rational, b1: &Rational) -> Rational {
    let lo = if a0 > b0 { a0 } else { b0 };
    let hi = if a1 < b1 { a1 } else { b1 };
    if hi > lo {
        hi - lo
    } else {
        Rational::zero()
    }
}

/// Length of the intersection of the circle arc `[a, a+len)` (`0 ≤ a < 1`,
/// `len ≤ 1`) with the interval `[b0, b1) ⊂ [0,1)`.
fn arc_overlap(a: &Rational, len: &Rational, b0: &Rational, b1: &Rational) -> Rational {
    let one = Rational::one();
    let mut s = inter(a, &(a + len), b0, b1);
    s += inter(&(a - &one), &(a + len - &one), b0, b1);
    s
}

struct Geometry {
    l: u64,
    r: u64,
    pieces: u64,
    combinatorics: bool,
    kappa: Vec<Rational>,
    /// `1/(n²l³q)`, times the `lq` blocks swept by symmetry.
    weight: Rational,
    row_h: Rational,
    band: (Rational, Rational),
    band_h: Rational,
}

fn geometry(m: &MinimalStage, t: u64) -> Result<Geometry, DiagError> {
    if t >= m.r {
        return Err(out_of_range(format!(
            "band t = {t} must be below r = {}",
            m.r
        )));
    }
    let pieces = (m.n as u64).pow(2);
    let width = Rational::new(BigInt::one(), BigInt::from(m.l.pow(3) * m.q * pieces));
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let kappa = (0..pieces)
        .map(|u| frac(m.trapping.eval(&((big(u) + &half) * &width))))
        .collect();
    let r = big(m.r);
    Ok(Geometry {
        l: m.l,
        r: m.r,
        pieces,
        combinatorics: m.combinatorics,
        kappa,
        weight: width * big(m.l * m.q),
        row_h: Rational::new(BigInt::one(), BigInt::from(m.l * m.r)),
        band: (big(t) / &r, big(t + 1) / &r),
        band_h: Rational::one() / r,
    })
}

/// Drift of band `t` computed backwards: for every cell of `GridMin(l,q,r)`
/// and trapping piece, the part of the cell whose image lands in `N_t` is
/// pulled back through the combinatorics and intersected with `N_t`.
pub fn measure_drift(s: &StageMaps, t: u64) -> Result<DriftReport, DiagError> {
    let (_, m) = minimal_level(s)?;
    let g = geometry(m, t)?;
    let mut stay = Rational::zero();
    let ll = g.l * g.l;
    for col in 0..ll {
        for row in 0..g.l * g.r {
            let vrow = if g.combinatorics {
                minimal_inverse_index(col, row, g.l, g.r).1
            } else {
                row
            };
            let lo = big(row) * &g.row_h;
            let hi = &lo + &g.row_h;
            let shift = (big(vrow) - big(row)) * &g.row_h;
            for k in &g.kappa {
                let b = frac(&(&g.band.0 - k));
                for wrap in [Rational::zero(), -Rational::one()] {
                    let b0 = &b + &wrap;
                    let b1 = &b0 + &g.band_h;
                    let p0 = if lo > b0 { lo.clone() } else { b0.clone() };
                    let p1 = if hi < b1 { hi.clone() } else { b1 };
                    if p1 > p0 {
                        stay +=
                            inter(&(p0 + &shift), &(p1 + &shift), &g.band.0, &g.band.1) * &g.weight;
                    }
                }
            }
        }
    }
    let drift = (&g.band_h - stay) * big(2);
    Ok(DriftReport {
        t,
        l: g.l,
        drift,
        bound: Rational::new(BigInt::one(), BigInt::from(g.l)),
    })
}

/// Drift of band `t` computed forwards: `2·μ{x ∈ N_t : h_{n+1}(x) ∉ N_t}`,
/// pushing each cell of `N_t` through the combinatorics and the shear.
pub fn measure_drift_forward(s: &StageMaps, t: u64) -> Result<Rational, DiagError> {
    let (_, m) = minimal_level(s)?;
    let g = geometry(m, t)?;
    let mut leave = Rational::zero();
    for vcol in 0..g.l * g.l {
        for vrow in t * g.l..(t + 1) * g.l {
            let wrow = if g.combinatorics {
                minimal_forward_index(vcol, vrow, g.l, g.r).1
            } else {
                vrow
            };
            let base = big(wrow) * &g.row_h;
            debug_assert!(g.kappa.len() as u64 == g.pieces);
            for k in &g.kappa {
                let a = frac(&(&base + k));
                let inside = arc_overlap(&a, &g.row_h, &g.band.0, &g.band.1);
                leave += (&g.row_h - inside) * &g.weight;
            }
        }
    }
    Ok(leave * big(2))
}

/// Monte Carlo drift of band `t` under the analytic `h_{n+1}`, from
/// `samples` seeded uniform points.
pub fn measure_drift_analytic(
    s: &StageMaps,
    t: u64,
    samples: u64,
    seed: u64,
) -> Result<DriftEstimate, DiagError> {
    let (level, m) = minimal_level(s)?;
    if t >= m.r {
        return Err(out_of_range(format!(
            "band t = {t} must be below r = {}",
            m.r
        )));
    }
    if samples == 0 {
        return Err(out_of_range("samples must be positive"));
    }
    let h = level
        .h
        .analytic
        .as_ref()
        .ok_or(crate::abc_engine::AbcError::NoAnalyticModel)?;
    let r = m.r as f64;
    let in_band = |y: f64| (y.rem_euclid(1.0) * r).floor() as u64 == t;
    let mut rng = task_rng(seed, 0);
    let mut mismatches = 0;
    for _ in 0..samples {
        let x = [rng.gen::<f64>(), rng.gen::<f64>()];
        let y = h.apply(&x);
        if in_band(x[1]) != in_band(y[1]) {
            mismatches += 1;
        }
    }
    let p = mismatches as f64 / samples as f64;
    let radius95 = 1.96 * (p * (1.0 - p) / samples as f64).sqrt();
    Ok(DriftEstimate {
        t,
        samples,
        mismatches,
        estimate: p,
        radius95,
        bound: 1.0 / m.l as f64,
    })
}
