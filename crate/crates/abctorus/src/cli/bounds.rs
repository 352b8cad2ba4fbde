use std::io::Write;

use num_bigint::BigInt;

use super::{parse_rational, write_artifact, BoundsArgs, CliError};
use crate::tower_bounds::{
    binary_truncation_recipe, convergence_ledger, ledger_gaps, liouville_check, liouville_generate,
    synthetic_stages, translation_params, verify_translation_params,
};

/// Ledger recipe: `stages`, `rho1` and optionally `violate` (a stage index).
#[derive(Clone, Debug, PartialEq)]
pub struct LedgerRecipe {
    pub stages: u32,
    pub rho1: f64,
    pub violate: Option<u32>,
}

impl LedgerRecipe {
    pub fn parse(text: &str, stages: u32) -> Result<Self, CliError> {
        let mut r = LedgerRecipe {
            stages,
            rho1: 1.0,
            violate: None,
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || CliError::Usage(format!("recipe line {}: {line:?}", i + 1));
            let (k, v) = line.split_once('=').ok_or_else(bad)?;
            let v = v.trim();
            match k.trim() {
                "stages" => r.stages = v.parse().map_err(|_| bad())?,
                "rho1" => r.rho1 = v.parse().map_err(|_| bad())?,
                "violate" => r.violate = Some(v.parse().map_err(|_| bad())?),
                _ => return Err(bad()),
            }
        }
        if r.stages == 0 || !(r.rho1 > 0.0 && r.rho1.is_finite()) {
            return Err(CliError::Usage(
                "recipe needs stages >= 1 and rho1 > 0".into(),
            ));
        }
        Ok(r)
    }
}

fn ledger(a: &BoundsArgs, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let recipe = match &a.recipe {
        Some(p) => LedgerRecipe::parse(&std::fs::read_to_string(p)?, a.stages)?,
        None => LedgerRecipe {
            stages: a.stages,
            rho1: 1.0,
            violate: None,
        },
    };
    if recipe.stages == 0 {
        return Err(CliError::Usage("--stages must be positive".into()));
    }
    let stages = synthetic_stages(recipe.stages, recipe.rho1);
    let gaps = ledger_gaps(&stages, recipe.violate);
    let report = convergence_ledger(&stages, &gaps);
    let text = report.to_text();
    match &a.out {
        Some(dir) => write_artifact(dir, "ledger.txt", &text)?,
        None => out.write_all(text.as_bytes())?,
    }
    writeln!(
        out,
        "ledger: {}",
        if report.passed() { "pass" } else { "fail" }
    )?;
    report.verdict()?;
    Ok(())
}

fn liouville(a: &BoundsArgs, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    if a.level == 0 || a.k == 0 {
        return Err(CliError::Usage("--k and --level must be positive".into()));
    }
    let (what, recipe) = match &a.alpha {
        Some(s) => {
            let alpha = parse_rational(s)?;
            (
                format!("alpha={s} (binary truncations)"),
                binary_truncation_recipe(&alpha, a.level, a.k),
            )
        }
        None => ("generated".to_string(), liouville_generate(a.level, a.k)),
    };
    let c = liouville_check(&recipe, a.k, a.level);
    writeln!(
        out,
        "liouville {what} k={} level={}: {} ({}{})",
        a.k,
        a.level,
        if c.holds { "pass" } else { "fail" },
        c.note,
        if c.symbolic { ", symbolic" } else { "" }
    )?;
    if !c.holds {
        return Err(CliError::Failed(format!(
            "Liouville certificate fails at level {}",
            a.level
        )));
    }
    Ok(())
}

fn translation(a: &BoundsArgs, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let tp = translation_params(a.h, a.levels)?;
    let mut text = String::from("level,gamma,p,q,r,s,m\n");
    let opt = |v: &Option<BigInt>| v.as_ref().map(|x| x.to_string()).unwrap_or_default();
    for (i, rec) in tp.levels.iter().enumerate() {
        let g = rec
            .gamma
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        text.push_str(&format!(
            "{},{g},{},{},{},{},{}\n",
            i + 1,
            rec.p,
            rec.q,
            rec.r,
            opt(&rec.s),
            opt(&rec.m)
        ));
    }
    match &a.out {
        Some(dir) => write_artifact(dir, "translation.csv", &text)?,
        None => out.write_all(text.as_bytes())?,
    }
    let verdict = verify_translation_params(&tp);
    writeln!(
        out,
        "translation h={} levels={}: {}",
        a.h,
        a.levels,
        if verdict.is_ok() { "pass" } else { "fail" }
    )?;
    verdict?;
    Ok(())
}

pub fn run(a: &BoundsArgs, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    match (a.ledger, a.liouville_verify, a.translation) {
        (true, false, false) => ledger(a, out),
        (false, true, false) => liouville(a, out),
        (false, false, true) => translation(a, out),
        _ => Err(CliError::Usage(
            "give exactly one of --ledger, --liouville-verify, --translation".into(),
        )),
    }
}
