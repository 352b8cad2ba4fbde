use std::io::Write;
use std::path::Path;

use super::config::RunConfig;
use super::manifest::Manifest;
use super::{resolve_seed, write_artifact, AbcArgs, CliError};
use crate::abc_engine::{
    symmetric_difference_analytic, symmetric_difference_exact, verify_cyclic_permutation, Model,
    Scenario, StageMaps,
};
use crate::diagnostics::{
    birkhoff_gap, heatmap_svg, measure_drift, measure_drift_analytic, measure_drift_forward,
    minimality_cover, random_start, rational_string, task_rng, trapping_counts, CsvTable,
    DiagError, TestFunction,
};
use crate::exact_torus::TorusPointExact;

/// Stream indices of the seeded tasks; start `i` uses stream `i`.
const STREAM_CYCLIC: u64 = 1 << 32;
const STREAM_SYMDIFF: u64 = 2 << 32;
const STREAM_DRIFT: u64 = 3 << 32;

/// Seed of stream `index`, for library calls that take a plain seed.
fn stream_seed(seed: u64, index: u64) -> u64 {
    use rand::RngCore;
    task_rng(seed, index).next_u64()
}

fn point_string(x: &TorusPointExact) -> String {
    x.coords()
        .iter()
        .map(rational_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn stages(m: &mut Manifest, s: &StageMaps) {
    for lv in s.levels() {
        let p = &lv.params;
        let a = p.a.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        m.set(
            "stages",
            format!("stage{}", p.n),
            format!(
                "p={} q={} alpha={}/{} k={} l={} s={} a=[{a}]",
                p.p, p.q, p.p, p.q, p.k, p.l, p.s
            ),
        );
    }
}

fn cyclic(
    cfg: &RunConfig,
    s: &StageMaps,
    seed: u64,
    m: &mut Manifest,
    files: &mut Vec<(String, String)>,
) -> Result<(), CliError> {
    let mut t = CsvTable::new(&[
        "stage",
        "model",
        "samples",
        "correct",
        "fraction",
        "threshold",
        "same_cycle",
        "pass",
    ]);
    for lv in s.levels() {
        let n = lv.params.n;
        let mut models = vec![Model::Exact];
        if cfg.model == Model::Analytic {
            if s.has_analytic(n) {
                models.push(Model::Analytic);
            } else {
                m.set(
                    "skipped",
                    format!("cyclic_stage{n}_analytic"),
                    "no analytic model at this size",
                );
            }
        }
        for model in models {
            let sd = stream_seed(seed, STREAM_CYCLIC + n as u64);
            let r = verify_cyclic_permutation(s, n, model, cfg.samples, sd)?;
            m.set(
                "computed",
                format!("cyclic_stage{n}_{}_fraction", model.name()),
                r.fraction,
            );
            m.check(format!("cyclic_stage{n}_{}", model.name()), r.passed);
            t.push(vec![
                n.to_string(),
                model.name().into(),
                r.samples.to_string(),
                r.correct.to_string(),
                r.fraction.to_string(),
                r.threshold.to_string(),
                r.same_cycle.to_string(),
                r.passed.to_string(),
            ]);
        }
        if n >= 2 {
            match symmetric_difference_exact(s, n) {
                Ok(v) => {
                    let max = v.iter().max().cloned().unwrap_or_default();
                    m.set(
                        "computed",
                        format!("symdiff_stage{n}_exact_max"),
                        rational_string(&max),
                    );
                }
                Err(e) => m.set("skipped", format!("symdiff_stage{n}_exact"), e),
            }
            if cfg.model == Model::Analytic && s.has_analytic(n) {
                let sd = stream_seed(seed, STREAM_SYMDIFF + n as u64);
                let e = symmetric_difference_analytic(s, n, cfg.samples, sd)?;
                m.set(
                    "computed",
                    format!("symdiff_stage{n}_analytic_bound"),
                    e.bound,
                );
            }
        }
    }
    files.push(("cyclic.csv".into(), t.to_string()));
    Ok(())
}

fn minimal(
    cfg: &RunConfig,
    s: &StageMaps,
    seed: u64,
    m: &mut Manifest,
    files: &mut Vec<(String, String)>,
) -> Result<(), CliError> {
    let starts: Vec<TorusPointExact> = (0..cfg.starts as u64)
        .map(|i| random_start(&mut task_rng(seed, i)))
        .collect();
    m.set("seeds", "start0", point_string(&starts[0]));

    let cover = minimality_cover(s, &starts)?;
    m.set("computed", "cover_cells", cover.cell_count());
    m.set("computed", "period", cover.period);
    m.check("minimality_cover", cover.passed);
    files.push(("cover.csv".into(), cover.to_csv().to_string()));
    let (rows, cols) = (cover.l as usize, (cover.l * cover.q) as usize);
    let first = &cover.starts[0].counts;
    let values: Vec<f64> = (0..rows * cols)
        .map(|i| first[(i % cols) * rows + i / cols] as f64)
        .collect();
    files.push((
        "cover.svg".into(),
        heatmap_svg(rows, cols, &values, "orbit hits per cell, start 0"),
    ));

    let mut trap_ok = true;
    for (i, x) in starts.iter().enumerate() {
        let st = trapping_counts(s, x)?;
        if i == 0 {
            m.set("computed", "trapping_uncaptured", st.uncaptured());
            m.set("bounds", "trapping_uncaptured", st.uncaptured_bound);
            files.push(("trapping.csv".into(), st.to_csv().to_string()));
        }
        trap_ok &= st.passed();
    }
    m.check("trapping", trap_ok);

    let mut bt = CsvTable::new(&[
        "function",
        "average",
        "integral_min",
        "integral_max",
        "gap",
        "bound",
        "margin",
        "pass",
    ]);
    for name in &cfg.functions {
        let f = TestFunction::by_name(name)?;
        match birkhoff_gap(s, &starts[0], &f) {
            Ok(g) => {
                let min = g.integrals.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = g
                    .integrals
                    .iter()
                    .cloned()
                    .fold(f64::NEG_INFINITY, f64::max);
                m.set("computed", format!("birkhoff_{name}_gap"), g.gap);
                m.set("bounds", format!("birkhoff_{name}_gap"), g.bound);
                m.set("computed", format!("birkhoff_{name}_margin"), g.margin());
                m.check(format!("birkhoff_{name}"), g.passed());
                bt.push(vec![
                    name.clone(),
                    g.average.to_string(),
                    min.to_string(),
                    max.to_string(),
                    g.gap.to_string(),
                    g.bound.to_string(),
                    g.margin().to_string(),
                    g.passed().to_string(),
                ]);
            }
            Err(e @ DiagError::LipschitzPreconditionFailed { .. }) => {
                m.set("skipped", format!("birkhoff_{name}"), e)
            }
            Err(e) => return Err(e.into()),
        }
    }
    files.push(("birkhoff.csv".into(), bt.to_string()));

    let n = s.n_max();
    let mut dt = CsvTable::new(&["t", "drift", "forward", "bound", "pass"]);
    for t in 0..cfg.r {
        let d = measure_drift(s, t)?;
        let fwd = measure_drift_forward(s, t)?;
        let ok = d.passed() && fwd == d.drift;
        m.set("computed", format!("drift_t{t}"), rational_string(&d.drift));
        m.set("bounds", format!("drift_t{t}"), rational_string(&d.bound));
        m.check(format!("drift_t{t}"), ok);
        dt.push(vec![
            t.to_string(),
            rational_string(&d.drift),
            rational_string(&fwd),
            rational_string(&d.bound),
            ok.to_string(),
        ]);
        if cfg.model == Model::Analytic {
            if s.has_analytic(n) {
                let sd = stream_seed(seed, STREAM_DRIFT + t);
                let e = measure_drift_analytic(s, t, cfg.samples as u64, sd)?;
                m.set(
                    "computed",
                    format!("drift_t{t}_analytic"),
                    format!("{} +- {}", e.estimate, e.radius95),
                );
            } else {
                m.set(
                    "skipped",
                    format!("drift_t{t}_analytic"),
                    "no analytic model at this size",
                );
            }
        }
    }
    files.push(("drift.csv".into(), dt.to_string()));
    Ok(())
}

/// Builds the stack described by `cfg`, runs its checks and returns the
/// manifest; artifacts go to `out_dir` when given.
pub fn run_abc(
    cfg: &RunConfig,
    seed: u64,
    seed_source: &str,
    out_dir: Option<&Path>,
) -> Result<Manifest, CliError> {
    let mut m = Manifest::new();
    for (k, v) in cfg.echo() {
        m.set("parameters", k, v);
    }
    m.set("seeds", "seed", seed);
    m.set("seeds", "source", seed_source);
    let s = cfg.build()?;
    stages(&mut m, &s);
    let mut files = Vec::new();
    match cfg.scenario {
        Scenario::Circle | Scenario::Translation => cyclic(cfg, &s, seed, &mut m, &mut files)?,
        Scenario::Minimal => minimal(cfg, &s, seed, &mut m, &mut files)?,
    }
    if let Some(dir) = out_dir {
        for (name, body) in &files {
            write_artifact(dir, name, body)?;
            m.set("artifacts", name.replace('.', "_"), name);
        }
        write_artifact(dir, "manifest.txt", &m.to_string())?;
    }
    Ok(m)
}

pub fn run(a: &AbcArgs, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let cfg = RunConfig::load(&a.config)?;
    let (seed, source) = resolve_seed(a.seed, cfg.seed)?;
    let dir = a.out.clone().or_else(|| cfg.output.clone());
    let m = run_abc(&cfg, seed, source, dir.as_deref())?;
    write!(out, "{m}")?;
    if !m.all_passed() {
        return Err(CliError::Failed("a check failed, see [checks]".into()));
    }
    Ok(())
}
