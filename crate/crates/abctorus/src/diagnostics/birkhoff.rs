use rayon::prelude::*;

use super::orbit::MinimalOrbit;
use super::{minimal_level, out_of_range, DiagError, TestFunction};
use crate::abc_engine::StageMaps;
use crate::exact_torus::TorusPointExact;

const CHUNK: u64 = 1 << 16;

/// Full-period Birkhoff average of `f` against the band simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct BirkhoffGap {
    pub n: u32,
    pub l: u64,
    pub period: u64,
    pub average: f64,
    /// `∫f dξ_t` for each band `t < r`.
    pub integrals: Vec<f64>,
    /// Distance from the average to `[min_t ∫f dξ_t, max_t ∫f dξ_t]`.
    pub gap: f64,
    /// `20/n²·‖f‖₀ + 1/n²`.
    pub bound: f64,
}

impl BirkhoffGap {
    pub fn margin(&self) -> f64 {
        self.bound - self.gap
    }

    pub fn passed(&self) -> bool {
        self.gap < self.bound
    }
}

/// `∫f dξ_t = r·∫_{N_t} f` for the bands `N_t = 𝕋×[t/r, (t+1)/r)`; requires
/// `H_n = id` so that `ξ_t` is normalised Lebesgue measure on `N_t`.
pub fn band_integrals(s: &StageMaps, f: &TestFunction) -> Result<Vec<f64>, DiagError> {
    let (level, m) = minimal_level(s)?;
    let n = level.params.n - 1;
    if !s.exact_conjugacy(n)?.parts().is_empty() {
        return Err(out_of_range(
            "band integrals need H_n = id (a minimal stage on top of the base stage)",
        ));
    }
    let r = m.r as f64;
    Ok((0..m.r)
        .map(|t| r * (f.rect_integral)(0.0, 1.0, t as f64 / r, (t + 1) as f64 / r))
        .collect())
}

/// Birkhoff average of `f` over the full `T_{n+1}`-period of `x` and its
/// distance to the simplex spanned by the band measures `ξ_t`.
pub fn birkhoff_gap(
    s: &StageMaps,
    x: &TorusPointExact,
    f: &TestFunction,
) -> Result<BirkhoffGap, DiagError> {
    let (level, m) = minimal_level(s)?;
    let n = m.n;
    let required = (n as f64).powi(2) * f.lipschitz;
    if (m.l as f64) <= required {
        return Err(DiagError::LipschitzPreconditionFailed { l: m.l, required });
    }
    let integrals = band_integrals(s, f)?;
    let o = MinimalOrbit::new(s, x)?;
    let period = level.params.q;
    let chunks = period.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let end = ((c + 1) * CHUNK).min(period);
            (c * CHUNK..end).map(|j| f.eval(&o.preimage_f64(j))).sum()
        })
        .collect();
    let average = partial.iter().sum::<f64>() / period as f64;
    let lo = integrals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = integrals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let gap = (lo - average).max(average - hi).max(0.0);
    let n2 = (n as f64).powi(2);
    Ok(BirkhoffGap {
        n,
        l: m.l,
        period,
        average,
        integrals,
        gap,
        bound: 20.0 / n2 * f.sup + 1.0 / n2,
    })
}
