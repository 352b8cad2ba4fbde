use std::io::Write;

use num_traits::ToPrimitive;

use super::manifest::Manifest;
use super::{parse_rational, write_artifact, ApproxArgs, CliError};
use crate::analytic_approx::{
    error_set, eval_entire_step, stage_entire_step, AmplitudeMode, EntireStep, StagePsi,
};
use crate::diagnostics::{line_plot_svg, CsvTable, Series};
use crate::exact_torus::builders::{psi1, psi2, psi3};
use crate::exact_torus::{rat, Rational, StepFunction};

const DEFAULT_EPS: f64 = 0.01;
const DEFAULT_DELTA: f64 = 0.1;

fn target(a: &ApproxArgs) -> Result<(String, EntireStep, StepFunction), CliError> {
    if let Some(n) = a.stage {
        if !a.beta.is_empty() {
            return Err(CliError::Usage("--stage and --beta are exclusive".into()));
        }
        let name = a
            .which
            .as_deref()
            .ok_or_else(|| CliError::Usage("--stage needs --which".into()))?;
        let (which, step) = match name {
            "psi1" => (StagePsi::One, psi1(a.l, a.q)),
            "psi2" => (StagePsi::Two, psi2(a.l, a.q)),
            "psi3" => (StagePsi::Three, psi3(a.l, a.q)),
            other => return Err(CliError::Usage(format!("unknown shear {other}"))),
        };
        if a.eps.is_some() || a.delta.is_some() {
            return Err(CliError::Usage("stage shears fix eps and delta".into()));
        }
        let s = stage_entire_step(which, n, a.l, a.q)?;
        return Ok((format!("{name} stage {n} l={} q={}", a.l, a.q), s, step));
    }
    if a.beta.is_empty() {
        return Err(CliError::Usage(
            "give --stage with --which, or --beta".into(),
        ));
    }
    if a.n == 0 {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    let mut vals: Vec<Rational> = a
        .beta
        .iter()
        .map(|b| parse_rational(b))
        .collect::<Result<_, _>>()?;
    if vals.len() % 2 == 1 {
        vals = vals.iter().flat_map(|v| [v.clone(), v.clone()]).collect();
    }
    let step = StepFunction::uniform(rat(1, a.n as i64), &vals)?;
    let beta: Vec<f64> = vals
        .iter()
        .map(|v| v.to_f64().unwrap_or(f64::NAN))
        .collect();
    let (eps, delta) = (
        a.eps.unwrap_or(DEFAULT_EPS),
        a.delta.unwrap_or(DEFAULT_DELTA),
    );
    let s = EntireStep::build(beta, a.n, eps, delta, AmplitudeMode::General)?;
    Ok((format!("beta N={}", a.n), s, step))
}

pub fn run(a: &ApproxArgs, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    if a.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let (title, s, step) = target(a)?;
    let mut table = CsvTable::new(&["x", "step", "analytic", "deviation", "in_error_set"]);
    let (mut exact_pts, mut analytic_pts) = (Vec::new(), Vec::new());
    let mut max_dev = 0.0f64;
    for j in 0..a.samples {
        let x = j as f64 / a.samples as f64;
        let t = step
            .eval(&rat(j as i64, a.samples as i64))
            .to_f64()
            .unwrap_or(f64::NAN);
        let v = eval_entire_step(&s, x);
        let dev = (v - t).abs();
        let bad = s.in_error_set(x);
        if !bad {
            max_dev = max_dev.max(dev);
        }
        exact_pts.push((x, t));
        analytic_pts.push((x, v));
        table.push(vec![
            x.to_string(),
            t.to_string(),
            v.to_string(),
            dev.to_string(),
            u8::from(bad).to_string(),
        ]);
    }
    let collars: Vec<(f64, f64)> = error_set(&s).collars.into_iter().flatten().collect();
    let svg = line_plot_svg(
        &[
            Series {
                name: "step".into(),
                points: exact_pts,
                color: "black".into(),
            },
            Series {
                name: "analytic".into(),
                points: analytic_pts,
                color: "red".into(),
            },
        ],
        &collars,
        &title,
    );
    let passed = max_dev < s.eps();
    let mut m = Manifest::new();
    m.set("parameters", "target", &title);
    m.set("parameters", "pieces", s.l());
    m.set("parameters", "periods", s.n());
    m.set("parameters", "eps", s.eps());
    m.set("parameters", "delta", s.delta());
    m.set("parameters", "amplitude", s.amplitude());
    m.set("parameters", "samples", a.samples);
    m.set("computed", "max_deviation_outside_error_set", max_dev);
    m.set("computed", "error_set_measure", error_set(&s).measure());
    m.check("deviation_below_eps", passed);
    writeln!(
        out,
        "{title}: max deviation outside the error set {max_dev:e} (eps {:e})",
        s.eps()
    )?;
    writeln!(out, "verified: {passed}")?;
    match &a.out {
        Some(dir) => {
            write_artifact(dir, "approx.csv", &table.to_string())?;
            write_artifact(dir, "approx.svg", &svg)?;
            m.set("artifacts", "csv", "approx.csv");
            m.set("artifacts", "svg", "approx.svg");
            write_artifact(dir, "manifest.txt", &m.to_string())?;
        }
        None => write!(out, "{m}")?,
    }
    if !passed {
        return Err(CliError::Failed(format!(
            "deviation {max_dev:e} is not below eps {:e}",
            s.eps()
        )));
    }
    Ok(())
}
