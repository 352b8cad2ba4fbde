use rayon::prelude::*;

use super::orbit::MinimalOrbit;
use super::report::CsvTable;
use super::DiagError;
use crate::abc_engine::StageMaps;
use crate::exact_torus::TorusPointExact;

/// Cells met by the full-period orbit of one start.
#[derive(Clone, Debug, PartialEq)]
pub struct StartCover {
    pub start: TorusPointExact,
    /// Hits per cell `[j₁/(lq), (j₁+1)/(lq)]×[j₂/l, (j₂+1)/l]`, index `j₁·l + j₂`.
    pub counts: Vec<u64>,
    pub missing: Vec<(u64, u64)>,
}

impl StartCover {
    pub fn meets(&self, l: u64, j1: u64, j2: u64) -> bool {
        self.counts[(j1 * l + j2) as usize] > 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverReport {
    pub l: u64,
    pub q: u64,
    pub period: u64,
    pub starts: Vec<StartCover>,
    pub passed: bool,
}

impl CoverReport {
    pub fn cell_count(&self) -> usize {
        (self.l * self.q * self.l) as usize
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["start", "cells_met", "cells_total", "pass"]);
        for (i, s) in self.starts.iter().enumerate() {
            let met = s.counts.iter().filter(|&&c| c > 0).count();
            t.push(vec![
                i.to_string(),
                met.to_string(),
                self.cell_count().to_string(),
                s.missing.is_empty().to_string(),
            ]);
        }
        t
    }
}

/// For each start `x`, the cells of the `lq × l` grid met by
/// `{h_{n+1}⁻¹∘φ^{iα_{n+1}}∘H_{n+1}(x) : i < q_{n+1}}`.
pub fn minimality_cover(
    s: &StageMaps,
    starts: &[TorusPointExact],
) -> Result<CoverReport, DiagError> {
    let orbits: Vec<MinimalOrbit> = starts
        .iter()
        .map(|x| MinimalOrbit::new(s, x))
        .collect::<Result<_, _>>()?;
    let (l, q, r) = match orbits.first() {
        Some(o) => (o.l, o.q, o.r),
        None => {
            let (_, m) = super::minimal_level(s)?;
            (m.l, m.q, m.r)
        }
    };
    let period = s.last_params().q;
    let covers: Vec<StartCover> = orbits
        .par_iter()
        .zip(starts.par_iter())
        .map(|(o, x)| {
            let mut counts = vec![0u64; (l * q * l) as usize];
            for j in 0..o.period {
                let (col, row) = o.preimage_cell(j);
                counts[((col / (l * l)) * l + row / r) as usize] += 1;
            }
            let missing = counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c == 0)
                .map(|(i, _)| (i as u64 / l, i as u64 % l))
                .collect();
            StartCover {
                start: x.clone(),
                counts,
                missing,
            }
        })
        .collect();
    let passed = covers.iter().all(|c| c.missing.is_empty());
    Ok(CoverReport {
        l,
        q,
        period,
        starts: covers,
        passed,
    })
}

/// Zone hit counts of one full period, with the trapping-lemma checks.
///
/// The orbit point `y` (rotation coordinates) is in zone `A_{s,i}` when
/// `y₁` lies in column `i < l` of block `s` of the `1/(l³q)` grid, and in
/// `B^t_{s,i}` when `l ≤ i < l²` and `y₂ − κ̃(y₁)` lies in band `t`; both
/// require `y` outside the nominal collars. Every other index is `rest`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitStats {
    pub n: u32,
    pub l: u64,
    pub q: u64,
    pub r: u64,
    pub period: u64,
    /// Index `s·l + i`.
    pub a_counts: Vec<u64>,
    /// Index `(t·lq + s)·(l² − l) + (i − l)`.
    pub b_counts: Vec<u64>,
    pub rest: u64,
    /// `⌈10·q_{n+1}/n²⌉`.
    pub uncaptured_bound: u64,
    /// Empirical band weights `ω_t = max_{s,i} B^t_{s,i} / (q_{n+1}/(l³q))`.
    pub omega: Vec<f64>,
    pub band_min: Vec<u64>,
    pub band_max: Vec<u64>,
}

impl OrbitStats {
    pub fn a_zone_count(&self) -> usize {
        self.a_counts.len()
    }

    pub fn b_total(&self) -> u64 {
        self.b_counts.iter().sum()
    }

    pub fn a_total(&self) -> u64 {
        self.a_counts.iter().sum()
    }

    /// Orbit points outside every `B` zone.
    pub fn uncaptured(&self) -> u64 {
        self.period - self.b_total()
    }

    pub fn every_a_zone_hit(&self) -> bool {
        self.a_counts.iter().all(|&c| c > 0)
    }

    pub fn uncaptured_ok(&self) -> bool {
        self.uncaptured() <= self.uncaptured_bound
    }

    /// `B^t_{s,i} ≥ ω_t·(1 − 8/n²)·q_{n+1}/(l³q)` for every zone, which is
    /// `n²·min_t ≥ (n² − 8)·max_t` per band.
    pub fn b_uniform_ok(&self) -> bool {
        let n2 = (self.n as i128).pow(2);
        self.band_min
            .iter()
            .zip(&self.band_max)
            .all(|(&lo, &hi)| n2 * lo as i128 >= (n2 - 8) * hi as i128)
    }

    pub fn passed(&self) -> bool {
        self.every_a_zone_hit() && self.uncaptured_ok() && self.b_uniform_ok()
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["zone", "count", "bound", "pass"]);
        let ll = self.l * self.l;
        for (idx, &c) in self.a_counts.iter().enumerate() {
            let (s, i) = (idx as u64 / self.l, idx as u64 % self.l);
            t.push(vec![
                format!("A_{s}_{i}"),
                c.to_string(),
                "1".into(),
                (c >= 1).to_string(),
            ]);
        }
        let n2 = (self.n as f64).powi(2);
        let per_band = self.b_counts.len() as u64 / self.r.max(1);
        for (idx, &c) in self.b_counts.iter().enumerate() {
            let tt = idx as u64 / per_band;
            let rem = idx as u64 % per_band;
            let (s, i) = (rem / (ll - self.l), rem % (ll - self.l) + self.l);
            let bound = self.band_max[tt as usize] as f64 * (1.0 - 8.0 / n2);
            t.push(vec![
                format!("B{tt}_{s}_{i}"),
                c.to_string(),
                format!("{bound}"),
                (c as f64 >= bound).to_string(),
            ]);
        }
        t.push(vec![
            "uncaptured".into(),
            self.uncaptured().to_string(),
            self.uncaptured_bound.to_string(),
            self.uncaptured_ok().to_string(),
        ]);
        t
    }
}

/// Numbers of `A` and `B` zones, `l²q` and `r·lq·(l² − l)`.
pub fn zone_counts(l: u64, q: u64, r: u64) -> (u64, u64) {
    (l * q * l, r * l * q * (l * l - l))
}

/// Full-period zone counts of the orbit of `x` under the last (minimal) stage.
pub fn trapping_counts(s: &StageMaps, x: &TorusPointExact) -> Result<OrbitStats, DiagError> {
    let o = MinimalOrbit::new(s, x)?;
    Ok(count_zones(&o))
}

pub(crate) fn count_zones(o: &MinimalOrbit) -> OrbitStats {
    let (l, q, r) = (o.l, o.q, o.r);
    let ll = l * l;
    let (na, nb) = zone_counts(l, q, r);
    let mut a_counts = vec![0u64; na as usize];
    let mut b_counts = vec![0u64; nb as usize];
    let mut rest = 0;
    for j in 0..o.period {
        let c = o.phi_cell(j);
        if !c.good {
            rest += 1;
            continue;
        }
        let (s, i) = (c.col / ll, c.col % ll);
        if i < l {
            a_counts[(s * l + i) as usize] += 1;
        } else {
            let t = c.row / l;
            b_counts[((t * l * q + s) * (ll - l) + (i - l)) as usize] += 1;
        }
    }
    let per_band = (nb / r) as usize;
    let band_min: Vec<u64> = b_counts
        .chunks(per_band)
        .map(|c| *c.iter().min().unwrap_or(&0))
        .collect();
    let band_max: Vec<u64> = b_counts
        .chunks(per_band)
        .map(|c| *c.iter().max().unwrap_or(&0))
        .collect();
    let per_column = o.period as f64 / (l * ll * q) as f64;
    let omega = band_max.iter().map(|&m| m as f64 / per_column).collect();
    let n2 = (o.n as u64).pow(2);
    OrbitStats {
        n: o.n,
        l,
        q,
        r,
        period: o.period,
        a_counts,
        b_counts,
        rest,
        uncaptured_bound: (10 * o.period).div_ceil(n2),
        omega,
        band_min,
        band_max,
    }
}
