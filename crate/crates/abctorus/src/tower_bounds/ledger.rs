use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt::Write as _;

use super::{
    check_stage_amplitude, ln2_tower, q_condition_rhs, SignedTower, TowerError, TowerReal,
    NORM_CONSTANT,
};

/// Parameters of one stage as seen by the convergence estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct StageData {
    pub n: u32,
    pub l: TowerReal,
    pub q: TowerReal,
    /// `ρ_n = ‖H_n‖_ρ`.
    pub rho: TowerReal,
    /// Bound on `‖DH_n‖_{ρ_n+1}`.
    pub dh_norm: TowerReal,
}

impl StageData {
    /// `A = 2^{2n+5}·l²`.
    pub fn amplitude(&self) -> TowerReal {
        self.l.powf(2.0).mul_f64(2f64.powi(2 * self.n as i32 + 5))
    }

    /// `X_n = (2^{2n+6}·l³·e^{2πρ'_n})^{q_n}`; the threshold on `|α − α_n|`
    /// is `e^{−e^{X_n}}`.
    pub fn threshold_exponent(&self) -> TowerReal {
        let rp = rho_prime(&self.rho, &self.amplitude());
        let base = self
            .l
            .powf(3.0)
            .mul_f64(2f64.powi(2 * self.n as i32 + 6))
            .mul(&rp.mul_f64(2.0 * PI).exp());
        base.pow(&self.q)
    }
}

/// `ρ' = ρ + 2πA·e^{2e^{A·e^{2πρ}} + A·e^{2πρ} + 2πρ}`.
pub fn rho_prime(rho: &TowerReal, a: &TowerReal) -> TowerReal {
    let two_pi_rho = rho.mul_f64(2.0 * PI);
    let ae = a.mul(&two_pi_rho.exp());
    let expo = ae.exp().mul_f64(2.0).add(&ae).add(&two_pi_rho);
    rho.add(&a.mul_f64(2.0 * PI).mul(&expo.exp()))
}

/// `1 + C·A·l·N·e^{4·e^{A·e^{2πN(ρ+1)}}}`, the derivative bound of a shear
/// built from a `1/N`-periodic entire approximation on the strip `ρ + 1`.
fn shear_lipschitz(
    a: &TowerReal,
    l: &TowerReal,
    period_inv: &TowerReal,
    rho: &TowerReal,
) -> TowerReal {
    let inner = period_inv
        .mul(&rho.add_f64(1.0))
        .mul_f64(2.0 * PI)
        .exp()
        .mul(a);
    let e2 = inner.exp().mul_f64(4.0).exp();
    e2.mul(a)
        .mul(l)
        .mul(period_inv)
        .mul_f64(NORM_CONSTANT)
        .add_f64(1.0)
}

/// Smallest admissible `l_n` above `req`: the next even integer for small
/// values, a bumped tower otherwise.
fn choose_l(req: &TowerReal) -> TowerReal {
    match req.to_f64().filter(|v| *v < 1e15) {
        Some(v) => {
            let even = 2.0 * (v / 2.0).floor() + 2.0;
            TowerReal::from_f64(even.max(4.0))
        }
        None => req.bumped(),
    }
}

/// Stage data built forward from `ρ_1` and `‖DH_1‖ = 1`: each `l_n` just
/// above both lower bounds, `q_n` just above its lower bound, `ρ_{n+1} = ρ'_n`
/// and `‖DH_{n+1}‖` from the derivative bounds of the two shears.
pub fn synthetic_stages(count: u32, rho1: f64) -> Vec<StageData> {
    let mut rho = TowerReal::from_f64(rho1);
    let mut dh = TowerReal::ONE;
    let mut out = Vec::new();
    for n in 1..=count {
        let req1 = dh.mul_f64(2f64.powi(n as i32 + 1));
        let req2 = rho.add_f64(1.0).mul_f64(2.0 * PI).exp();
        let req = if req1.cmp_approx(&req2) == Ordering::Greater {
            req1
        } else {
            req2
        };
        let l = choose_l(&req);
        let stage = StageData {
            n,
            l,
            q: TowerReal::ONE,
            rho,
            dh_norm: dh,
        };
        let a = stage.amplitude();
        let q = q_condition_rhs(&l, n, NORM_CONSTANT).bumped();
        let stage = StageData { q, ..stage };
        let rp = rho_prime(&rho, &a);
        let lip =
            shear_lipschitz(&a, &l, &TowerReal::ONE, &rho).mul(&shear_lipschitz(&a, &l, &q, &rp));
        dh = dh.mul(&lip);
        rho = rp;
        out.push(stage);
    }
    out
}

/// Gap certificates `|α − α_n| ≤ 2/2^{M_n}` with `M_n` just above
/// `2·e^{X_n}`; at the stage `violate` instead `M_n` is just below `e^{X_n}`,
/// which breaks the final link.
pub fn ledger_gaps(stages: &[StageData], violate: Option<u32>) -> Vec<TowerReal> {
    stages
        .iter()
        .map(|s| {
            let t = s.threshold_exponent().exp();
            let m = if violate == Some(s.n) {
                t.shrunk()
            } else {
                t.mul_f64(2.0).bumped()
            };
            let log_inv = m.sub(&TowerReal::ONE).expect("M > 1").mul(&ln2_tower());
            SignedTower {
                negative: true,
                magnitude: log_inv,
            }
            .exp()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LedgerLine {
    pub stage: u32,
    pub link: u32,
    pub name: String,
    pub lhs: String,
    pub relation: &'static str,
    pub rhs: String,
    pub holds: bool,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LedgerReport {
    pub lines: Vec<LedgerLine>,
}

impl LedgerReport {
    pub fn first_failure(&self) -> Option<&LedgerLine> {
        self.lines.iter().find(|l| !l.holds)
    }

    pub fn passed(&self) -> bool {
        self.first_failure().is_none()
    }

    pub fn verdict(&self) -> Result<(), TowerError> {
        match self.first_failure() {
            None => Ok(()),
            Some(l) => Err(TowerError::LinkFailed {
                stage: l.stage,
                link: l.link,
                name: l.name.clone(),
            }),
        }
    }

    /// Proof script listing every inequality with both sides in tower notation.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("# convergence ledger\n");
        s.push_str("# towers: E^h(m) = exp applied h times to m; 1/E^h(m) its reciprocal\n");
        s.push_str("# gap form: |alpha - alpha_n| < threshold; a zero gap is accepted\n");
        for l in &self.lines {
            let _ = writeln!(
                s,
                "stage {} link {} [{}]: {} {} {} : {}{}",
                l.stage,
                l.link,
                l.name,
                l.lhs,
                l.relation,
                l.rhs,
                if l.holds { "holds" } else { "FAILS" },
                if l.note.is_empty() {
                    String::new()
                } else {
                    format!(" ({})", l.note)
                }
            );
        }
        let _ = writeln!(
            s,
            "verdict: {}",
            if self.passed() { "pass" } else { "fail" }
        );
        s
    }
}

fn strict(
    stage: u32,
    link: u32,
    name: &str,
    lhs: &TowerReal,
    rhs: &TowerReal,
    relation: &'static str,
) -> LedgerLine {
    let (holds, note) = match lhs.certified_cmp(rhs) {
        Ok(Ordering::Greater) => (true, String::new()),
        Ok(Ordering::Equal) => (relation == ">=", String::new()),
        Ok(Ordering::Less) => (false, String::new()),
        Err(_) => (false, "undecided".to_string()),
    };
    LedgerLine {
        stage,
        link,
        name: name.to_string(),
        lhs: lhs.to_string(),
        relation,
        rhs: rhs.to_string(),
        holds,
        note,
    }
}

/// Checks the chain of estimates that bounds `d_ρ(T_{n+1}, T_n)` for every
/// stage. `gaps[i]` is the certified bound on `|α − α_n|` for `stages[i]`.
pub fn convergence_ledger(stages: &[StageData], gaps: &[TowerReal]) -> LedgerReport {
    assert_eq!(stages.len(), gaps.len(), "one gap per stage");
    let mut lines = Vec::new();
    for (s, gap) in stages.iter().zip(gaps) {
        let n = s.n;
        let req1 = s.dh_norm.mul_f64(2f64.powi(n as i32 + 1));
        lines.push(strict(n, 1, "l_n > 2^(n+1) |DH_n|", &s.l, &req1, ">"));
        let req2 = s.rho.add_f64(1.0).mul_f64(2.0 * PI).exp();
        lines.push(strict(n, 2, "l_n > e^(2 pi (rho_n + 1))", &s.l, &req2, ">"));
        let a = s.amplitude();
        let amp_ok = check_stage_amplitude(n, &s.l);
        lines.push(LedgerLine {
            stage: n,
            link: 3,
            name: "A = 2^(2n+5) l_n^2 meets both amplitude conditions".to_string(),
            lhs: a.to_string(),
            relation: ">",
            rhs: "max(A1, A2)".to_string(),
            holds: amp_ok,
            note: String::new(),
        });
        let rhs = q_condition_rhs(&s.l, n, NORM_CONSTANT);
        lines.push(strict(
            n,
            4,
            "q_n >= 2 C^2 l_n e^(4 e^(2^(2n+5) l_n^3))",
            &s.q,
            &rhs,
            ">=",
        ));
        let t = s.threshold_exponent().exp();
        let name = "Theta_n * 2 |alpha - alpha_n| / 2^(n+1) < 1/2^n, as ln(1/|alpha - alpha_n|) > ln Theta_n";
        if gap.is_zero() {
            lines.push(LedgerLine {
                stage: n,
                link: 5,
                name: name.to_string(),
                lhs: "inf".to_string(),
                relation: ">",
                rhs: t.to_string(),
                holds: true,
                note: "zero gap, bound is 0".to_string(),
            });
            continue;
        }
        let log_inv = match gap.recip().and_then(|r| r.ln()) {
            Ok(v) if !v.negative => v.magnitude,
            _ => TowerReal::ZERO,
        };
        lines.push(strict(n, 5, name, &log_inv, &t, ">"));
    }
    LedgerReport { lines }
}
