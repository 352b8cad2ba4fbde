use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use super::report::{rational_string, CsvTable};
use super::{minimal_level, out_of_range, DiagError};
use crate::abc_engine::{apply_conjugated_rotation, Model, StageMaps};
use crate::exact_torus::{frac, minimal_inverse_index, rotate, Rational, TorusPointExact};

/// Largest number of steps [`simulate_orbit`] accepts.
pub const MAX_STEPS: u64 = 100_000_000;

/// An orbit segment `x, T_n x, …, T_n^{steps} x`.
#[derive(Clone, Debug, PartialEq)]
pub enum Trace {
    Exact(Vec<TorusPointExact>),
    Analytic(Vec<Vec<f64>>),
}

impl Trace {
    pub fn len(&self) -> usize {
        match self {
            Trace::Exact(v) => v.len(),
            Trace::Analytic(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One row per iterate; exact coordinates are written as `num/den`.
    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["step", "x1", "x2"]);
        match self {
            Trace::Exact(v) => {
                for (i, p) in v.iter().enumerate() {
                    t.push(vec![
                        i.to_string(),
                        rational_string(p.coord(0)),
                        rational_string(p.coord(1)),
                    ]);
                }
            }
            Trace::Analytic(v) => {
                for (i, p) in v.iter().enumerate() {
                    t.push(vec![
                        i.to_string(),
                        format!("{:e}", p[0]),
                        format!("{:e}", p[1]),
                    ]);
                }
            }
        }
        t
    }
}

/// Iterates `T_n = H_n⁻¹∘φ^{α_n}∘H_n` from `x`; the `i`-th point is computed
/// as `H_n⁻¹(φ^{iα_n}(H_n x))`, so analytic traces do not accumulate error.
pub fn simulate_orbit(
    s: &StageMaps,
    n: u32,
    x: &TorusPointExact,
    steps: u64,
    model: Model,
) -> Result<Trace, DiagError> {
    if steps > MAX_STEPS {
        return Err(out_of_range(format!("steps = {steps} exceeds {MAX_STEPS}")));
    }
    let alpha = s.alpha(n)?;
    match model {
        Model::Exact => {
            let h = s.exact_conjugacy(n)?;
            let y = h.apply(x)?;
            let mut out = Vec::with_capacity(steps as usize + 1);
            out.push(x.clone());
            let mut cur = y;
            for _ in 0..steps {
                cur = rotate(&cur, &alpha);
                out.push(h.apply_inverse(&cur)?);
            }
            Ok(Trace::Exact(out))
        }
        Model::Analytic => {
            let h = s.analytic_conjugacy(n)?;
            let xf = x.to_f64();
            let q = s.level(n)?.params.q as i64;
            let mut out = Vec::with_capacity(steps as usize + 1);
            out.push(xf.clone());
            for i in 1..=steps {
                let power = (i as i64) % q;
                out.push(apply_conjugated_rotation(&h, &alpha, power, &xf));
            }
            Ok(Trace::Analytic(out))
        }
    }
}

fn big(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn to_u128(x: &BigInt) -> Result<u128, DiagError> {
    x.to_u128()
        .ok_or_else(|| out_of_range("orbit denominators exceed 128 bits"))
}

/// A threshold `t` compared against fractional distances.
#[derive(Clone, Debug)]
struct Threshold {
    num: BigInt,
    den: BigInt,
    small: Option<(u128, u128)>,
}

impl Threshold {
    fn new(t: &Rational) -> Self {
        let small = match (t.numer().to_u128(), t.denom().to_u128()) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        };
        Threshold {
            num: t.numer().clone(),
            den: t.denom().clone(),
            small,
        }
    }

    /// Whether `v/den` lies at distance at least `t/2` from the integers,
    /// for `0 ≤ v < den`.
    fn far(&self, v: u128, den: u128) -> bool {
        let d = v.min(den - v);
        if let Some((a, b)) = self.small {
            if let (Some(lhs), Some(rhs)) = (
                d.checked_mul(2).and_then(|x| x.checked_mul(b)),
                a.checked_mul(den),
            ) {
                return lhs >= rhs;
            }
        }
        BigInt::from(d) * 2u32 * &self.den >= &self.num * BigInt::from(den)
    }
}

/// Full-period orbit of a minimal-scenario stage in closed form.
///
/// With `z = H_{n+1}(x)` the orbit of `x` under `T_{n+1}` is
/// `{h_{n+1}⁻¹(z₁ + j/q_{n+1}, z₂) : j < q_{n+1}}` (as `H_n = id` on the toy
/// stage); index `j` is the orbit point `T^i x` with `i·p_{n+1} ≡ j`.
/// The second coordinate after undoing the trapping shear depends on `j`
/// only through the trapping piece, so it is tabulated once per start.
#[derive(Clone, Debug)]
pub struct MinimalOrbit {
    pub n: u32,
    pub l: u64,
    pub q: u64,
    pub r: u64,
    /// `q_{n+1}`.
    pub period: u64,
    combinatorics: bool,
    cols: u64,
    rows: u64,
    pieces: u64,
    z: TorusPointExact,
    a: u128,
    b: u128,
    y2: Vec<Rational>,
    y2_f64: Vec<f64>,
    row: Vec<u64>,
    row_good: Vec<bool>,
    col_collar: Threshold,
    piece_collar: Threshold,
}

/// Where an orbit point sits before `h_{n+1}⁻¹` is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhiCell {
    /// Column of the `1/(l³q)` grid containing `y₁`.
    pub col: u64,
    /// Trapping piece of `y₁` within its column.
    pub piece: u64,
    /// Row of the `1/(lr)` grid containing `y′₂ = y₂ − κ̃(y₁)`.
    pub row: u64,
    /// `y` avoids the nominal collars of the combinatorics and trapping maps.
    pub good: bool,
}

impl MinimalOrbit {
    /// The orbit of `x` under the last stage of `s`, which must be minimal.
    pub fn new(s: &StageMaps, x: &TorusPointExact) -> Result<Self, DiagError> {
        let (level, _) = minimal_level(s)?;
        let z = s.exact_conjugacy(level.params.n)?.apply(x)?;
        Self::from_phi_point(s, z)
    }

    /// The orbit through `h_{n+1}⁻¹(z)`, given in rotation coordinates.
    pub fn from_phi_point(s: &StageMaps, z: TorusPointExact) -> Result<Self, DiagError> {
        let (level, m) = minimal_level(s)?;
        if z.dim() != 2 {
            return Err(out_of_range("minimal stages live on the 2-torus"));
        }
        let period = level.params.q;
        let cols = m.l * m.l * m.l * m.q;
        let rows = m.l * m.r;
        let pieces = (m.n as u64).pow(2);
        if period % (cols * pieces) != 0 {
            return Err(out_of_range(format!(
                "q_(n+1) = {period} must be a multiple of n²l³q = {}",
                cols * pieces
            )));
        }
        let z1 = z.coord(0);
        let a = to_u128(z1.numer())?;
        let b = to_u128(z1.denom())?;
        b.checked_mul(period as u128)
            .and_then(|d| d.checked_mul((cols * pieces) as u128))
            .ok_or_else(|| out_of_range("orbit denominators exceed 128 bits"))?;
        let width = Rational::new(BigInt::one(), BigInt::from(cols * pieces));
        let half = Rational::new(BigInt::one(), BigInt::from(2));
        let mut y2 = Vec::with_capacity(pieces as usize);
        let mut row = Vec::with_capacity(pieces as usize);
        let mut row_good = Vec::with_capacity(pieces as usize);
        for u in 0..pieces {
            let kappa = m.trapping.eval(&((big(u) + &half) * &width));
            let v = frac(&(z.coord(1) - kappa));
            let scaled = &v * big(rows);
            let fl = scaled.floor();
            let rem = &scaled - &fl;
            let dist = if rem > half.clone() {
                Rational::one() - &rem
            } else {
                rem
            };
            row.push(fl.to_integer().to_u64().unwrap_or(0));
            row_good.push(dist * big(2) >= m.delta);
            y2.push(v);
        }
        let y2_f64 = y2.iter().map(|v| v.to_f64().unwrap_or(0.0)).collect();
        Ok(MinimalOrbit {
            n: m.n,
            l: m.l,
            q: m.q,
            r: m.r,
            period,
            combinatorics: m.combinatorics,
            cols,
            rows,
            pieces,
            z,
            a,
            b,
            y2,
            y2_f64,
            row,
            row_good,
            col_collar: Threshold::new(&m.delta),
            piece_collar: Threshold::new(&m.delta_tilde),
        })
    }

    /// The orbit point in rotation coordinates at `j = 0`.
    pub fn phi_point(&self) -> &TorusPointExact {
        &self.z
    }

    fn y1(&self, j: u64) -> (u128, u128) {
        let den = self.b * self.period as u128;
        let num = (self.a * self.period as u128 + j as u128 * self.b) % den;
        (num, den)
    }

    /// Cells of `y = (z₁ + j/q_{n+1}, z₂)`.
    pub fn phi_cell(&self, j: u64) -> PhiCell {
        let (num, den) = self.y1(j);
        let c = num * self.cols as u128;
        let col = (c / den) as u64;
        let p = c * self.pieces as u128;
        let piece = ((p / den) % self.pieces as u128) as u64;
        let good = self.row_good[piece as usize]
            && self.col_collar.far(c % den, den)
            && self.piece_collar.far(p % den, den);
        PhiCell {
            col,
            piece,
            row: self.row[piece as usize],
            good,
        }
    }

    /// `GridMin(l,q,r)` cell `(column, row)` of `h_{n+1}⁻¹(y)`.
    pub fn preimage_cell(&self, j: u64) -> (u64, u64) {
        let c = self.phi_cell(j);
        self.unmix(c.col, c.row)
    }

    fn unmix(&self, col: u64, row: u64) -> (u64, u64) {
        if !self.combinatorics {
            return (col, row);
        }
        let ll = self.l * self.l;
        let (ni, nj) = minimal_inverse_index(col % ll, row, self.l, self.r);
        ((col / ll) * ll + ni, nj)
    }

    /// `h_{n+1}⁻¹(y)` in floating point, from exact cell data.
    pub fn preimage_f64(&self, j: u64) -> [f64; 2] {
        let c = self.phi_cell(j);
        let (ncol, nrow) = self.unmix(c.col, c.row);
        let (num, den) = self.y1(j);
        let x1 = num as f64 / den as f64 + (ncol as f64 - c.col as f64) / self.cols as f64;
        let x2 = self.y2_f64[c.piece as usize] + (nrow as f64 - c.row as f64) / self.rows as f64;
        [x1.rem_euclid(1.0), x2.rem_euclid(1.0)]
    }

    /// `h_{n+1}⁻¹(y)` exactly.
    pub fn preimage(&self, j: u64) -> TorusPointExact {
        let c = self.phi_cell(j);
        let (ncol, nrow) = self.unmix(c.col, c.row);
        let (num, den) = self.y1(j);
        let y1 = Rational::new(BigInt::from(num), BigInt::from(den));
        let x1 = y1 + (big(ncol) - big(c.col)) / big(self.cols);
        let x2 = &self.y2[c.piece as usize] + (big(nrow) - big(c.row)) / big(self.rows);
        TorusPointExact::new(vec![frac(&x1), frac(&x2)]).expect("coordinates in [0,1)")
    }

    /// Band `t` of the second coordinate of `h_{n+1}^{(1)⁻¹}(y)`, the point
    /// between the trapping shear and the combinatorics.
    pub fn band(&self, j: u64) -> u64 {
        self.phi_cell(j).row / self.l
    }
}
