use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::CliError;
use crate::abc_engine::{
    build_stage_circle, build_stage_minimal, build_stage_translation, minimal_default_s, AbCParams,
    Model, Scenario, StageMaps,
};
use crate::tower_bounds::translation_params;

/// Keys accepted in a run config file, in manifest order.
pub const KEYS: &[&str] = &[
    "scenario",
    "model",
    "stages",
    "n1",
    "p1",
    "q1",
    "k",
    "l",
    "s",
    "r",
    "h",
    "seed",
    "starts",
    "samples",
    "functions",
    "output",
];

/// A run configuration, read from `key = value` lines (`#` starts a comment).
///
/// `k`, `l` and `s` take comma lists, one entry per stage transition; the
/// last entry repeats. `s = auto` picks `n²l²` in the minimal scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub model: Model,
    pub stages: u32,
    pub n1: u32,
    pub p1: u64,
    pub q1: u64,
    pub k: Vec<u64>,
    pub l: Vec<u64>,
    /// `None` is `auto`.
    pub s: Option<Vec<u64>>,
    pub r: u64,
    pub h: usize,
    pub seed: Option<u64>,
    pub starts: usize,
    pub samples: usize,
    pub functions: Vec<String>,
    pub output: Option<PathBuf>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim()
        .parse()
        .map_err(|_| bad(format!("{key}: cannot parse {v:?}")))
}

fn list(key: &str, v: &str) -> Result<Vec<u64>, CliError> {
    let out: Vec<u64> = v
        .split(',')
        .map(|x| num(key, x))
        .collect::<Result<_, _>>()?;
    if out.is_empty() || out.contains(&0) {
        return Err(bad(format!("{key}: entries must be positive")));
    }
    Ok(out)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut kv = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected key = value", i + 1)))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(bad(format!("line {}: unknown key {key}", i + 1)));
            }
            if kv
                .insert(key.to_string(), value.trim().to_string())
                .is_some()
            {
                return Err(bad(format!("line {}: duplicate key {key}", i + 1)));
            }
        }
        let get = |k: &str| kv.get(k).map(String::as_str);
        let scenario: Scenario = get("scenario")
            .ok_or_else(|| bad("scenario is required"))?
            .parse()
            .map_err(|e| bad(format!("scenario: {e}")))?;
        let model: Model = get("model")
            .unwrap_or("exact")
            .parse()
            .map_err(|e| bad(format!("model: {e}")))?;
        let (n1d, p1d, q1d, ld) = match scenario {
            Scenario::Circle => (1, 1, 3, 4),
            Scenario::Translation => (1, 1, 2, 2),
            Scenario::Minimal => (3, 1, 1, 4),
        };
        let cfg = RunConfig {
            scenario,
            model,
            stages: get("stages")
                .map(|v| num("stages", v))
                .transpose()?
                .unwrap_or(2),
            n1: get("n1").map(|v| num("n1", v)).transpose()?.unwrap_or(n1d),
            p1: get("p1").map(|v| num("p1", v)).transpose()?.unwrap_or(p1d),
            q1: get("q1").map(|v| num("q1", v)).transpose()?.unwrap_or(q1d),
            k: get("k")
                .map(|v| list("k", v))
                .transpose()?
                .unwrap_or(vec![1]),
            l: get("l")
                .map(|v| list("l", v))
                .transpose()?
                .unwrap_or(vec![ld]),
            s: match get("s") {
                None | Some("auto") => None,
                Some(v) => Some(list("s", v)?),
            },
            r: get("r").map(|v| num("r", v)).transpose()?.unwrap_or(2),
            h: get("h").map(|v| num("h", v)).transpose()?.unwrap_or(2),
            seed: get("seed").map(|v| num("seed", v)).transpose()?,
            starts: get("starts")
                .map(|v| num("starts", v))
                .transpose()?
                .unwrap_or(20),
            samples: get("samples")
                .map(|v| num("samples", v))
                .transpose()?
                .unwrap_or(1000),
            functions: get("functions")
                .map(|v| {
                    v.split(',')
                        .map(|f| f.trim().to_string())
                        .filter(|f| !f.is_empty())
                        .collect()
                })
                .unwrap_or_else(|| vec!["cos2pi_x2".to_string()]),
            output: get("output").map(PathBuf::from),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.stages == 0 || self.stages > 8 {
            return Err(bad("stages must lie in 1..=8"));
        }
        if self.n1 == 0 {
            return Err(bad("n1 must be positive"));
        }
        if self.scenario == Scenario::Minimal && self.stages != 2 {
            return Err(bad(
                "the minimal scenario builds exactly one stage on top of the first (stages = 2)",
            ));
        }
        if self.samples == 0 || self.starts == 0 {
            return Err(bad("samples and starts must be positive"));
        }
        Ok(())
    }

    fn pick(v: &[u64], i: usize) -> u64 {
        v[i.min(v.len() - 1)]
    }

    /// `(k, l, s)` used to pass from the `i`-th stage (0-based) to the next.
    pub fn step(&self, i: usize, n: u32) -> Result<(u64, u64, u64), CliError> {
        let k = Self::pick(&self.k, i);
        let l = Self::pick(&self.l, i);
        let s = match (&self.s, self.scenario) {
            (Some(v), _) => Self::pick(v, i),
            (None, Scenario::Minimal) => minimal_default_s(n, l)?,
            (None, _) => 1,
        };
        Ok((k, l, s))
    }

    /// `key = value` lines echoing every parameter.
    pub fn echo(&self) -> Vec<(String, String)> {
        let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        vec![
            ("scenario".into(), self.scenario.name().into()),
            ("model".into(), self.model.name().into()),
            ("stages".into(), self.stages.to_string()),
            ("n1".into(), self.n1.to_string()),
            ("p1".into(), self.p1.to_string()),
            ("q1".into(), self.q1.to_string()),
            ("k".into(), join(&self.k)),
            ("l".into(), join(&self.l)),
            (
                "s".into(),
                self.s
                    .as_ref()
                    .map(|v| join(v))
                    .unwrap_or_else(|| "auto".into()),
            ),
            ("r".into(), self.r.to_string()),
            ("h".into(), self.h.to_string()),
            ("starts".into(), self.starts.to_string()),
            ("samples".into(), self.samples.to_string()),
            ("functions".into(), self.functions.join(",")),
        ]
    }

    /// Builds the stage stack described by the config.
    pub fn build(&self) -> Result<StageMaps, CliError> {
        let first = AbCParams::new(self.n1, self.p1, self.q1)?;
        let mut s = StageMaps::new(self.scenario, 2, first)?;
        let tp = match self.scenario {
            Scenario::Translation => Some(translation_params(self.h, self.stages as usize)?),
            _ => None,
        };
        for i in 0..self.stages as usize - 1 {
            let n = s.n_max();
            let (k, l, sv) = self.step(i, n)?;
            let p = s.last_params().clone().with_step(k, l, sv);
            let inc = match self.scenario {
                Scenario::Circle => build_stage_circle(&p)?,
                Scenario::Translation => {
                    build_stage_translation(&p, tp.as_ref().expect("translation params"))?
                }
                Scenario::Minimal => build_stage_minimal(&p, self.r)?,
            };
            s.push(inc)?;
        }
        Ok(s)
    }
}
