mod common;

use std::f64::consts::{E, PI};

use abctorus::analytic_approx::torus_dist;
use abctorus::analytic_approx::{
    approximate_blockslide, choose_amplitude, envelope, error_set, eval_entire_step,
    eval_entire_step_complex, norm_bounds, stage_entire_step, sweep_csv, verify_proximity,
    AmplitudeMode, AnalyticError, AnalyticStep, EntireStep, StagePsi,
};
use abctorus::exact_torus::builders::{psi1, psi2, psi3};
use abctorus::exact_torus::{
    build_abc_conjugation, build_interchange, BlockSlideMap, StepFunction,
};
use abctorus::tower_bounds::{q_condition_rhs, TowerReal, NORM_CONSTANT};
use common::{oracle_apply, q};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The displayed formula summed term by term, without periodic reduction.
fn oracle_eval(beta: &[f64], n: u64, a: f64, x: f64) -> f64 {
    let l = beta.len();
    let env = |y: f64| {
        if y > 709.0 {
            0.0
        } else if y < -709.0 {
            1.0
        } else {
            (-(y.exp())).exp()
        }
    };
    let w = |i: usize| env(-a * (2.0 * PI * (n as f64 * x - i as f64 / l as f64)).sin());
    let mut first = 0.0;
    let mut second = 0.0;
    for (i, b) in beta.iter().enumerate() {
        let term = b * (w(i) - w(i + 1));
        if i < l / 2 {
            first += term;
        } else {
            second += term;
        }
    }
    let base = (2.0 * PI * n as f64 * x).sin();
    first * env(-a * base) + second * env(a * base)
}

/// Smallest power of two above both amplitude thresholds, in plain floats.
fn oracle_amplitude(l: f64, eps: f64, delta: f64) -> f64 {
    let f = 2.0 * l / (PI * delta);
    let a1 = -f * (-(1.0 - eps / 8.0).ln()).ln();
    let a2 = f * (-(eps / (2.0 * l)).ln()).ln();
    let m = a1.max(a2);
    let mut a = 1.0f64;
    while a <= m {
        a *= 2.0;
    }
    while a / 2.0 > m {
        a /= 2.0;
    }
    a
}

fn uniform_target(beta: &[(i64, i64)], n: i64) -> StepFunction {
    let vals: Vec<_> = beta.iter().map(|&(a, b)| q(a, b)).collect();
    StepFunction::uniform(q(1, n), &vals).unwrap()
}

#[test]
fn stage_amplitude() {
    let (eps, delta) = (1.0 / 12.0, 0.25);
    assert_eq!(
        choose_amplitude(4, eps, delta, AmplitudeMode::Stage(1)).unwrap(),
        2048.0
    );
    assert!(matches!(
        choose_amplitude(2, eps, delta, AmplitudeMode::Stage(1)),
        Err(AnalyticError::ParamOutOfRange(_))
    ));
    assert!(choose_amplitude(4, 0.01, delta, AmplitudeMode::Stage(1)).is_err());
    assert!(choose_amplitude(4, 0.2, delta, AmplitudeMode::General).is_err());
}

#[test]
fn general_amplitude_matches_formulas() {
    for &(l, eps, delta) in &[
        (2u64, 0.1, 0.25),
        (4, 0.01, 0.5),
        (12, 1e-4, 1e-3),
        (6, 0.12, 0.9),
    ] {
        let a = choose_amplitude(l, eps, delta, AmplitudeMode::General).unwrap();
        assert_eq!(
            a,
            oracle_amplitude(l as f64, eps, delta),
            "l={l} eps={eps} delta={delta}"
        );
    }
}

#[test]
fn two_piece_example() {
    let s = EntireStep::build(vec![0.0, 0.5], 1, 0.1, 0.25, AmplitudeMode::General).unwrap();
    assert!(eval_entire_step(&s, 0.25).abs() < 0.1);
    assert!((eval_entire_step(&s, 0.75) - 0.5).abs() < 0.1);
}

#[test]
fn zero_beta_is_zero() {
    let s = EntireStep::build(vec![0.0; 6], 5, 0.05, 0.3, AmplitudeMode::General).unwrap();
    for k in 0..1000 {
        assert_eq!(eval_entire_step(&s, k as f64 / 997.0), 0.0);
    }
    let target = uniform_target(&[(0, 1); 6], 5);
    assert_eq!(verify_proximity(&s, &target, 10_000), 0.0);
}

#[test]
fn matches_term_by_term_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let l = 2 * rng.gen_range(1..6);
        let beta: Vec<f64> = (0..l).map(|_| rng.gen::<f64>()).collect();
        let n = rng.gen_range(1..5);
        let a = rng.gen_range(1.0..800.0);
        let s = EntireStep::unchecked(beta.clone(), n, 0.1, 0.5, a).unwrap();
        let x = rng.gen::<f64>();
        assert!((eval_entire_step(&s, x) - oracle_eval(&beta, n, a, x)).abs() < 1e-9);
    }
}

#[test]
fn envelope_clamps() {
    assert_eq!(envelope(710.0), 0.0);
    assert_eq!(envelope(-710.0), 1.0);
    assert!((envelope(-700.0) - 1.0).abs() <= f64::EPSILON);
    assert_eq!(envelope(0.0), (-1.0f64).exp());
}

#[test]
fn complex_agrees_on_real_axis() {
    let s = EntireStep::unchecked(vec![0.1, 0.3, 0.5, 0.9], 3, 0.1, 0.25, 2048.0).unwrap();
    for k in 0..1000 {
        let x = k as f64 / 1000.0;
        let v = eval_entire_step_complex(&s, Complex64::new(x, 0.0)).unwrap();
        let r = eval_entire_step(&s, x);
        assert!(
            (v.re - r).abs() <= f64::EPSILON * r.abs().max(f64::MIN_POSITIVE),
            "x={x}"
        );
        assert!(v.im.abs() <= 1e-12);
    }
}

#[test]
fn complex_range() {
    let s = EntireStep::unchecked(vec![0.1, 0.3, 0.5, 0.9], 1, 0.1, 0.25, 2048.0).unwrap();
    let v = eval_entire_step_complex(&s, Complex64::new(0.25, 0.01)).unwrap();
    assert!(v.re.is_finite() && v.im.is_finite());
    for k in 0..20 {
        let z = Complex64::new(k as f64 / 20.0, 1.0);
        assert_eq!(
            eval_entire_step_complex(&s, z),
            Err(AnalyticError::RangeOverflow)
        );
    }
}

#[test]
fn error_set_collars() {
    let s = EntireStep::unchecked(vec![0.0, 0.5], 1, 0.1, 0.25, 32.0).unwrap();
    let f = error_set(&s);
    assert_eq!(f.collars.len(), 2);
    assert_eq!(f.collars[0], vec![(0.0, 1.0 / 16.0), (15.0 / 16.0, 1.0)]);
    assert_eq!(f.collars[1], vec![(7.0 / 16.0, 9.0 / 16.0)]);
    assert!((f.measure() - 0.25).abs() < 1e-15);

    let s = EntireStep::unchecked(vec![0.0, 0.25, 0.5, 0.75], 3, 0.1, 0.3, 32.0).unwrap();
    let f = error_set(&s);
    assert_eq!(f.collars.len(), 12);
    for (i, c) in f.collars.iter().enumerate().skip(1) {
        let (a, b) = c[0];
        assert!(((a + b) / 2.0 - i as f64 / 12.0).abs() < 1e-15);
        assert!((b - a - 0.3 / 12.0).abs() < 1e-15);
    }
    assert!((f.measure() - 0.3).abs() < 1e-14);
    for k in 0..1000 {
        let x = k as f64 / 1000.0;
        assert_eq!(f.contains(x), s.in_error_set(x), "x={x}");
    }
}

#[test]
fn stage_proximity() {
    for n in 1..=3u32 {
        for &(l, qn) in &[(4u64, 3u64), (6, 72)] {
            let targets = [
                (StagePsi::One, psi1(l, qn)),
                (StagePsi::Two, psi2(l, qn)),
                (StagePsi::Three, psi3(l, qn)),
            ];
            for (which, target) in targets {
                let s = stage_entire_step(which, n, l, qn).unwrap();
                assert_eq!(s.amplitude(), 2f64.powi(2 * n as i32 + 5) * (l * l) as f64);
                let dev = verify_proximity(&s, &target, 10_000);
                assert!(dev < s.eps(), "n={n} l={l} q={qn} {which:?}: {dev}");
            }
        }
    }
}

#[test]
fn collar_points_are_skipped() {
    let s = stage_entire_step(StagePsi::Two, 1, 4, 3).unwrap();
    let target = psi2(4, 3);
    let samples = 10_000u64;
    let all = (0..samples)
        .map(|j| {
            let x = j as f64 / samples as f64;
            let t = target.eval(&q(j as i64, samples as i64)).to_f64().unwrap();
            (eval_entire_step(&s, x) - t).abs()
        })
        .fold(0.0, f64::max);
    assert!(all > 0.2);
    assert!(verify_proximity(&s, &target, samples) < s.eps());
    let csv = sweep_csv(&s, &target, 100);
    assert!(csv.starts_with("x,step,analytic,in_error_set\n"));
    assert_eq!(csv.lines().count(), 101);
    assert!(csv.lines().skip(1).any(|r| r.ends_with(",1")));
}

#[test]
fn derivative_small_off_collars() {
    for which in [StagePsi::One, StagePsi::Two, StagePsi::Three] {
        let s = stage_entire_step(which, 1, 4, 3).unwrap();
        let h = 1e-7;
        for k in 0..10_000 {
            let x = k as f64 / 10_000.0;
            if s.in_error_set(x) {
                continue;
            }
            let d = (eval_entire_step(&s, x + h) - eval_entire_step(&s, x - h)) / (2.0 * h);
            assert!(d.abs() < s.eps(), "{which:?} x={x} d={d}");
        }
    }
}

#[test]
fn norm_bound_values() {
    let s = EntireStep::unchecked(vec![0.0, 1.0], 1, 0.1, 0.5, 1.0).unwrap();
    let (sup, _) = norm_bounds(&s, 0.0);
    let expect = TowerReal::from_f64(2.0 * PI * (2.0 * E + 1.0).exp());
    let rel = (sup.to_f64().unwrap() / expect.to_f64().unwrap() - 1.0).abs();
    assert!(rel < 1e-12, "{sup} vs {expect}");

    let s = stage_entire_step(StagePsi::One, 1, 4, 3).unwrap();
    let (a0, l0) = norm_bounds(&s, 0.5);
    let (a1, l1) = norm_bounds(&s, 1.0);
    assert!(a0.certified_lt(&a1).unwrap());
    assert!(l0.certified_lt(&l1).unwrap());
    let q_rhs = q_condition_rhs(&TowerReal::from_u64(4), 1, NORM_CONSTANT);
    assert!(a0.certified_cmp(&q_rhs).is_ok());
    assert!(a0.to_f64().is_none() && a0.height() >= 2);
}

#[test]
fn empty_map_approximation() {
    let h = approximate_blockslide(&BlockSlideMap::identity(2), 1e-3, 1e-3).unwrap();
    assert!(h.is_empty());
    assert_eq!(h.error_measure_bound(), 0.0);
    assert!(!h.in_error_set(&[0.0, 0.0]));
}

#[test]
fn interchange_transfer() {
    let f = build_interchange(4, 3, 2).unwrap();
    let h = approximate_blockslide(&f, 1e-3, 1e-3).unwrap();
    assert_eq!(h.len(), 8);
    assert!(matches!(h.moves()[3].step, AnalyticStep::Constant(v) if v == 0.5));
    assert!(h.proximity() < 1e-3);
    assert!(h.error_measure_bound() < 1e-3);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut outside = 0;
    for _ in 0..20_000 {
        let (a, b) = (
            rng.gen_range(0..1_000_000i64),
            rng.gen_range(0..1_000_000i64),
        );
        let xr = [q(a, 1_000_000), q(b, 1_000_000)];
        let x = [a as f64 / 1e6, b as f64 / 1e6];
        if h.in_error_set(&x) {
            continue;
        }
        outside += 1;
        let exact: Vec<f64> = oracle_apply(&f, &xr)
            .iter()
            .map(|v| v.to_f64().unwrap())
            .collect();
        assert!(torus_dist(&h.apply(&x), &exact) < 1e-3);
    }
    assert!(outside > 19_000);
    for i in 0..12 {
        for j in 0..4 {
            let x = [(i as f64 + 0.5) / 12.0, (j as f64 + 0.5) / 4.0];
            if h.in_error_set(&x) {
                continue;
            }
            let exact = oracle_apply(&f, &[q(2 * i + 1, 24), q(2 * j + 1, 8)]);
            let y = h.apply(&x);
            let col = (y[0] * 12.0).floor() as i64;
            assert_eq!(col, (exact[0].to_f64().unwrap() * 12.0).floor() as i64);
        }
    }
}

#[test]
fn conjugation_commutes_with_rotation() {
    let m = build_abc_conjugation(&[0, 1], 2, 2, 2, 2).unwrap();
    let h = approximate_blockslide(&m, 1e-2, 1e-2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pts: Vec<Vec<f64>> = (0..1000).map(|_| vec![rng.gen(), rng.gen()]).collect();
    assert!(h.rotation_residual(0.5, &pts) <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn periodic(beta in prop::collection::vec(0.0f64..=1.0, 1..5), n in 1u64..20, x in 0.0f64..1.0) {
        let beta: Vec<f64> = beta.iter().flat_map(|b| [*b, 1.0 - b]).collect();
        let s = EntireStep::unchecked(beta, n, 0.1, 0.5, 50.0).unwrap();
        let shifted = eval_entire_step(&s, x + 1.0 / n as f64);
        prop_assert!((shifted - eval_entire_step(&s, x)).abs() <= 1e-12);
    }

    #[test]
    fn linear_in_beta(
        b1 in prop::collection::vec(0.0f64..=1.0, 4),
        b2 in prop::collection::vec(0.0f64..=1.0, 4),
        c in 0.0f64..=1.0,
        x in 0.0f64..1.0,
    ) {
        let mix: Vec<f64> = b1.iter().zip(&b2).map(|(u, v)| c * u + (1.0 - c) * v).collect();
        let ev = |b: Vec<f64>| eval_entire_step(&EntireStep::unchecked(b, 3, 0.1, 0.5, 300.0).unwrap(), x);
        let lhs = ev(mix);
        let rhs = c * ev(b1) + (1.0 - c) * ev(b2);
        prop_assert!((lhs - rhs).abs() <= 1e-10);
    }

    #[test]
    fn sup_bound_is_sound(
        beta in prop::collection::vec(0.0f64..=1.0, 2..9),
        n in 1u64..4,
        x in 0.0f64..1.0,
        y in -0.02f64..0.02,
        eps in 0.01f64..0.12,
        delta in 0.05f64..0.95,
    ) {
        let mut beta = beta;
        if beta.len() % 2 == 1 {
            beta.push(0.5);
        }
        let s = EntireStep::build(beta, n, eps, delta, AmplitudeMode::General).unwrap();
        let rho = y.abs() + 1e-3;
        if let Ok(v) = eval_entire_step_complex(&s, Complex64::new(x, y)) {
            let (sup, _) = norm_bounds(&s, rho);
            let lifted = TowerReal::from_f64(v.norm());
            prop_assert!(lifted.certified_lt(&sup).unwrap());
        }
    }
}
