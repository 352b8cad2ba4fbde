use std::io::Write;

use super::{write_artifact, BlockslideArgs, CliError};
use crate::diagnostics::CsvTable;
use crate::exact_torus::{
    build_abc_conjugation, build_grid_refine, build_interchange, build_minimal_combinatorics,
    build_rearrange, commutes_with_rotation, decompose_permutation, equivariant_from_quotient,
    induced_atom_map, induced_atom_permutation, minimal_permutation, PartitionSpec,
};

fn table(mapping: &[usize]) -> CsvTable {
    let mut t = CsvTable::new(&["atom", "image"]);
    for (a, b) in mapping.iter().enumerate() {
        t.push(vec![a.to_string(), b.to_string()]);
    }
    t
}

/// Product of the transpositions `(ik, ik+1)`, `i < q`, on `kq` atoms.
fn interchange_expected(k: usize, q: usize) -> Vec<usize> {
    let mut m: Vec<usize> = (0..k * q).collect();
    for i in 0..q {
        m.swap(i * k, i * k + 1);
    }
    m
}

struct Outcome {
    summary: Vec<String>,
    mapping: Vec<usize>,
    passed: bool,
}

fn verify(a: &BlockslideArgs) -> Result<Outcome, CliError> {
    let (k, q, l, d) = (a.k, a.q, a.l, a.d);
    match a.builder.as_str() {
        "interchange" => {
            let f = build_interchange(k, q, d)?;
            let part = PartitionSpec::t(k * q, d);
            let p = induced_atom_permutation(&f, &part)?;
            let passed = p.mapping == interchange_expected(k as usize, q as usize);
            Ok(Outcome {
                summary: vec![
                    format!("interchange k={k} q={q} d={d}: {} moves", f.len()),
                    format!("cycles {}", p.cycle_string()),
                ],
                mapping: p.mapping,
                passed,
            })
        }
        "rearrange" => {
            let f = build_rearrange(a.i, a.c, k, q, d)?;
            let part = PartitionSpec::t(k * q, d);
            let p = induced_atom_permutation(&f, &part)?;
            let passed = (0..(k * q) as usize).all(|atom| {
                let (col, j) = (atom as u64 % k, atom as u64 / k);
                let expect = if col == a.c {
                    col + k * ((j + a.i) % q)
                } else {
                    atom as u64
                };
                p.mapping[atom] as u64 == expect
            });
            Ok(Outcome {
                summary: vec![
                    format!(
                        "rearrange i={} c={} k={k} q={q}: {} moves",
                        a.i,
                        a.c,
                        f.len()
                    ),
                    format!("cycles {}", p.cycle_string()),
                ],
                mapping: p.mapping,
                passed,
            })
        }
        "grid-refine" => {
            let g = build_grid_refine(l, q, d)?;
            let from = PartitionSpec::g(l, q, d);
            let to = PartitionSpec::t(l.pow(d as u32) * q, d);
            let map = induced_atom_map(&g, &from, &to)?;
            let mut seen = vec![false; map.len()];
            let passed = map
                .iter()
                .all(|&b| b < seen.len() && !std::mem::replace(&mut seen[b], true));
            Ok(Outcome {
                summary: vec![format!(
                    "grid-refine l={l} q={q} d={d}: {} moves, bijection onto {} columns",
                    g.len(),
                    map.len()
                )],
                mapping: map,
                passed,
            })
        }
        "abc" => {
            let h = build_abc_conjugation(&a.a, k, l, q, d)?;
            let hinv = h.inverse();
            let r = PartitionSpec::r(a.a.clone(), k, q, d)?;
            let to = induced_atom_map(&hinv, &r, &PartitionSpec::t(q, d))?;
            let p1 = to == (0..q as usize).collect::<Vec<_>>();
            let fine = PartitionSpec::t((l * k).pow(d as u32) * q, d);
            let p2 = induced_atom_map(&hinv, &fine, &PartitionSpec::g(l * k, q, d)).is_ok();
            let p3 = commutes_with_rotation(&h, q)?;
            Ok(Outcome {
                summary: vec![
                    format!("abc k={k} l={l} q={q} d={d}: {} moves", h.len()),
                    format!("R onto T: {p1}; fine columns onto grid atoms: {p2}; commutes with rotation: {p3}"),
                ],
                mapping: to,
                passed: p1 && p2 && p3,
            })
        }
        "decompose" => {
            let path = a
                .perm_file
                .as_ref()
                .ok_or_else(|| CliError::Usage("decompose needs --perm-file".into()))?;
            let text = std::fs::read_to_string(path)?;
            let quotient: Vec<usize> = text
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse()
                        .map_err(|_| CliError::Usage(format!("bad permutation entry {s:?}")))
                })
                .collect::<Result<_, _>>()?;
            let pi = equivariant_from_quotient(k, q, l, &quotient)?;
            let m = decompose_permutation(&pi, k, q, l)?;
            let p = induced_atom_permutation(&m, &PartitionSpec::s(k * q, l))?;
            let passed = p.mapping == pi.mapping && commutes_with_rotation(&m, q)?;
            Ok(Outcome {
                summary: vec![
                    format!("decompose k={k} q={q} l={l}: {} moves", m.len()),
                    format!("cycles {}", p.cycle_string()),
                ],
                mapping: p.mapping,
                passed,
            })
        }
        "minimal" => {
            let m = build_minimal_combinatorics(l, q, a.r)?;
            let want = minimal_permutation(l, q, a.r)?;
            let p = induced_atom_permutation(&m, &PartitionSpec::grid_min(l, q, a.r))?;
            let passed = p.mapping == want.mapping;
            Ok(Outcome {
                summary: vec![format!("minimal l={l} q={q} r={}: {} moves", a.r, m.len())],
                mapping: p.mapping,
                passed,
            })
        }
        other => Err(CliError::Usage(format!("unknown builder {other}"))),
    }
}

pub fn run(a: &BlockslideArgs, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let o = verify(a)?;
    let csv = table(&o.mapping).to_string();
    for line in &o.summary {
        writeln!(out, "{line}")?;
    }
    writeln!(out, "verified: {}", o.passed)?;
    match &a.out {
        Some(dir) => write_artifact(dir, "permutation.csv", &csv)?,
        None => out.write_all(csv.as_bytes())?,
    }
    if !o.passed {
        return Err(CliError::Failed(format!(
            "{} does not induce the expected permutation",
            a.builder
        )));
    }
    Ok(())
}
