use std::path::{Path, PathBuf};
use std::process::Command;

use abctorus::cli::{self, run_abc, RunConfig};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("abctorus-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("abctorus").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const TOY: &str = "scenario = minimal\nstages = 2\nn1 = 4\nq1 = 2\nl = 12\nr = 2\nstarts = 3\nfunctions = zero,one\n";

#[test]
fn interchange_prints_transpositions() {
    let (code, out, _) = run(&[
        "blockslide",
        "--builder",
        "interchange",
        "--k",
        "4",
        "--q",
        "3",
        "--d",
        "2",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("cycles (0 1)(4 5)(8 9)"), "{out}");
    assert!(out.contains("atom,image\n0,1\n1,0\n2,2\n"));
}

#[test]
fn interchange_with_one_column_is_rejected() {
    let (code, _, err) = run(&["blockslide", "--builder", "interchange", "--k", "1"]);
    assert_eq!(code, 1);
    assert!(err.contains("k >= 2"), "{err}");
}

#[test]
fn decompose_identity_has_no_moves() {
    let dir = scratch("decompose");
    let f = write(&dir, "id.txt", "0 1 2 3 4 5 6 7\n");
    let (code, out, _) = run(&[
        "blockslide",
        "--builder",
        "decompose",
        "--k",
        "4",
        "--q",
        "3",
        "--l",
        "2",
        "--perm-file",
        &f,
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains(": 0 moves"), "{out}");
    assert!(out.contains("verified: true"));
}

#[test]
fn decompose_rejects_a_non_permutation() {
    let dir = scratch("decompose-bad");
    let f = write(&dir, "bad.txt", "0 0 2 3 4 5 6 7\n");
    let (code, _, _) = run(&[
        "blockslide",
        "--builder",
        "decompose",
        "--k",
        "4",
        "--q",
        "3",
        "--l",
        "2",
        "--perm-file",
        &f,
    ]);
    assert_eq!(code, 1);
}

#[test]
fn other_builders_verify() {
    for args in [
        &[
            "--builder",
            "rearrange",
            "--i",
            "1",
            "--c",
            "1",
            "--k",
            "4",
            "--q",
            "3",
        ][..],
        &["--builder", "grid-refine", "--l", "4", "--q", "3"],
        &[
            "--builder",
            "abc",
            "--a",
            "0,2,1,1",
            "--k",
            "4",
            "--l",
            "2",
            "--q",
            "3",
        ],
        &["--builder", "minimal", "--l", "4", "--q", "1", "--r", "2"],
    ] {
        let mut v = vec!["blockslide"];
        v.extend_from_slice(args);
        let (code, out, err) = run(&v);
        assert_eq!(code, 0, "{args:?}: {out}{err}");
        assert!(out.contains("verified: true"), "{args:?}: {out}");
    }
}

#[test]
fn blockslide_writes_csv_to_out() {
    let dir = scratch("blockslide-out");
    let d = dir.to_str().unwrap();
    let (code, out, _) = run(&[
        "blockslide",
        "--builder",
        "interchange",
        "--k",
        "2",
        "--out",
        d,
    ]);
    assert_eq!(code, 0);
    assert!(!out.contains("atom,image"));
    assert_eq!(
        std::fs::read_to_string(dir.join("permutation.csv")).unwrap(),
        "atom,image\n0,1\n1,0\n"
    );
}

#[test]
fn approx_stage_writes_files() {
    let dir = scratch("approx-stage");
    let d = dir.to_str().unwrap();
    let (code, _, err) = run(&["approx", "--stage", "1", "--which", "psi1", "--out", d]);
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(dir.join("approx.csv")).unwrap();
    assert!(csv.starts_with("x,step,analytic,deviation,in_error_set\n"));
    assert_eq!(csv.lines().count(), 2001);
    assert!(std::fs::read_to_string(dir.join("approx.svg"))
        .unwrap()
        .starts_with("<svg"));
    let manifest = std::fs::read_to_string(dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("max_deviation_outside_error_set = "));
    assert!(manifest.contains("deviation_below_eps = pass"));
}

#[test]
fn approx_zero_beta_is_flat() {
    let dir = scratch("approx-zero");
    let d = dir.to_str().unwrap();
    let (code, _, _) = run(&["approx", "--beta", "0,0", "--out", d]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(dir.join("approx.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[2].parse::<f64>().unwrap(), 0.0, "{line}");
    }
}

#[test]
fn approx_needs_a_target() {
    assert_eq!(run(&["approx"]).0, 1);
    assert_eq!(run(&["approx", "--stage", "1"]).0, 1);
    assert_eq!(run(&["approx", "--stage", "1", "--which", "psi9"]).0, 1);
    assert_eq!(run(&["approx", "--beta", "1/0,1"]).0, 1);
}

#[test]
fn abc_circle_runs_cyclic_checks() {
    let dir = scratch("abc-circle");
    let cfg = write(
        &dir,
        "c.cfg",
        "scenario = circle\nstages = 2\nmodel = analytic\n",
    );
    let out_dir = dir.join("out");
    let (code, out, err) = run(&["abc", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}{err}");
    for key in [
        "cyclic_stage1_exact",
        "cyclic_stage2_exact",
        "cyclic_stage1_analytic",
        "cyclic_stage2_analytic",
    ] {
        assert!(out.contains(&format!("{key} = pass")), "{key}: {out}");
    }
    assert!(out.contains("symdiff_stage2_exact_max = 0/1"));
    assert!(out_dir.join("cyclic.csv").exists());
    assert_eq!(
        std::fs::read_to_string(out_dir.join("manifest.txt")).unwrap(),
        out
    );
}

#[test]
fn abc_minimal_reports_and_is_deterministic() {
    let dir = scratch("abc-minimal");
    let cfg = write(&dir, "m.cfg", TOY);
    let (a, b) = (dir.join("a"), dir.join("b"));
    let (code, out, err) = run(&[
        "abc",
        "--config",
        &cfg,
        "--seed",
        "11",
        "--out",
        a.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{out}{err}");
    for key in [
        "minimality_cover",
        "trapping",
        "birkhoff_zero",
        "birkhoff_one",
        "drift_t0",
        "drift_t1",
    ] {
        assert!(out.contains(&format!("{key} = pass")), "{key}: {out}");
    }
    for f in [
        "cover.csv",
        "cover.svg",
        "trapping.csv",
        "birkhoff.csv",
        "drift.csv",
        "manifest.txt",
    ] {
        assert!(a.join(f).exists(), "{f}");
    }
    let (code, _, _) = run(&[
        "abc",
        "--config",
        &cfg,
        "--seed",
        "11",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let ma = std::fs::read(a.join("manifest.txt")).unwrap();
    let mb = std::fs::read(b.join("manifest.txt")).unwrap();
    assert_eq!(ma, mb);
    for f in ["cover.csv", "trapping.csv", "drift.csv"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn run_abc_skips_birkhoff_below_the_lipschitz_threshold() {
    let cfg = RunConfig::parse(&TOY.replace("zero,one", "cos2pi_x2")).unwrap();
    let m = run_abc(&cfg, 5, "flag", None).unwrap();
    assert!(m.get("skipped", "birkhoff_cos2pi_x2").is_some());
    assert!(m.all_passed());
    assert_eq!(m.get("seeds", "seed"), Some("5"));
}

#[test]
fn config_errors_exit_one() {
    let dir = scratch("config");
    for (name, text) in [
        ("unknown", "scenario = circle\ncolour = red\n"),
        ("missing", "stages = 2\n"),
        ("minimal-stages", "scenario = minimal\nstages = 3\n"),
        ("zero", "scenario = circle\nl = 0\n"),
        ("dup", "scenario = circle\nscenario = circle\n"),
    ] {
        let cfg = write(&dir, name, text);
        assert_eq!(run(&["abc", "--config", &cfg]).0, 1, "{name}");
    }
    assert_eq!(run(&["abc", "--config", "/nonexistent/x.cfg"]).0, 1);
}

#[test]
fn seed_falls_back_to_the_environment() {
    let dir = scratch("seed-env");
    let cfg = write(
        &dir,
        "c.cfg",
        "scenario = circle\nstages = 1\nmodel = analytic\n",
    );
    let bin = env!("CARGO_BIN_EXE_abctorus");
    let out = Command::new(bin)
        .args(["abc", "--config", &cfg])
        .env("ABCTORUS_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("seed = 42\nsource = env\n"), "{text}");
    let out = Command::new(bin)
        .args(["abc", "--config", &cfg, "--seed", "3"])
        .env("ABCTORUS_SEED", "42")
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("seed = 3\nsource = flag\n"));
    let out = Command::new(bin)
        .args(["abc", "--config", &cfg])
        .env("ABCTORUS_SEED", "x")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bounds_ledger_passes_and_fails() {
    let dir = scratch("ledger");
    let r = write(&dir, "r.txt", "stages = 5\nrho1 = 1.0\n");
    let (code, out, _) = run(&["bounds", "--ledger", "--stages", "5", "--recipe", &r]);
    assert_eq!(code, 0);
    assert!(out.ends_with("ledger: pass\n"), "{out}");
    let bad = write(&dir, "bad.txt", "stages = 5\nviolate = 3\n");
    let (code, out, err) = run(&["bounds", "--ledger", "--recipe", &bad]);
    assert_eq!(code, 2);
    assert!(out.ends_with("ledger: fail\n"));
    assert!(err.contains("stage 3"), "{err}");
    let junk = write(&dir, "junk.txt", "stages = five\n");
    assert_eq!(run(&["bounds", "--ledger", "--recipe", &junk]).0, 1);
}

#[test]
fn bounds_liouville_line() {
    let (code, out, _) = run(&["bounds", "--liouville-verify", "--k", "2", "--level", "1"]);
    assert_eq!(code, 0);
    assert!(
        out.starts_with("liouville generated k=2 level=1: pass"),
        "{out}"
    );
    let (code, out, _) = run(&[
        "bounds",
        "--liouville-verify",
        "--k",
        "5",
        "--level",
        "3",
        "--alpha",
        "1/3",
    ]);
    assert_eq!(code, 2);
    assert!(out.contains(": fail"), "{out}");
}

#[test]
fn bounds_translation_passes() {
    let (code, out, _) = run(&["bounds", "--translation", "--h", "2", "--levels", "3"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("level,gamma,p,q,r,s,m\n"));
    assert!(out.ends_with("translation h=2 levels=3: pass\n"));
}

#[test]
fn bounds_needs_one_mode() {
    assert_eq!(run(&["bounds"]).0, 1);
    assert_eq!(run(&["bounds", "--ledger", "--translation"]).0, 1);
}

#[test]
fn orbit_trace_returns_to_start() {
    let dir = scratch("orbit");
    let cfg = write(&dir, "c.cfg", "scenario = circle\nstages = 2\n");
    let (code, out, _) = run(&["orbit", "--config", &cfg, "--x", "1/7,1/5", "--steps", "36"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "step,x1,x2");
    assert_eq!(lines.len(), 38);
    let coords = |l: &str| l.split_once(',').unwrap().1.to_string();
    assert_eq!(coords(lines[1]), coords(lines[37]));
    assert_ne!(coords(lines[1]), coords(lines[2]));
}

#[test]
fn help_and_flag_errors() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("blockslide") && out.contains("bounds"));
    assert_eq!(
        run(&["blockslide", "--builder", "interchange", "--bogus"]).0,
        1
    );
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["--jobs", "0", "bounds", "--translation"]).0, 1);
    assert_eq!(run(&["--jobs", "1", "bounds", "--translation"]).0, 0);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_abctorus");
    let code = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(
        code(&["blockslide", "--builder", "interchange", "--k", "1"]),
        Some(1)
    );
    assert_eq!(
        code(&[
            "bounds",
            "--liouville-verify",
            "--k",
            "5",
            "--level",
            "3",
            "--alpha",
            "1/3"
        ]),
        Some(2)
    );
}
