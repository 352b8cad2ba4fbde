use std::io::Write;

use super::config::RunConfig;
use super::{parse_rational, write_artifact, CliError, OrbitArgs};
use crate::diagnostics::simulate_orbit;
use crate::exact_torus::TorusPointExact;

pub fn run(a: &OrbitArgs, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let cfg = RunConfig::load(&a.config)?;
    let s = cfg.build()?;
    let n = a.level.unwrap_or_else(|| s.n_max());
    let x = if a.x.is_empty() {
        TorusPointExact::origin(s.dim())
    } else {
        TorusPointExact::new(
            a.x.iter()
                .map(|c| parse_rational(c))
                .collect::<Result<_, _>>()?,
        )?
    };
    let model = a.model.unwrap_or(cfg.model);
    let csv = simulate_orbit(&s, n, &x, a.steps, model)?
        .to_csv()
        .to_string();
    match &a.out {
        Some(dir) => {
            write_artifact(dir, "orbit.csv", &csv)?;
            writeln!(
                out,
                "orbit of stage {n} ({} model): {} points",
                model.name(),
                a.steps + 1
            )?;
        }
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(())
}
