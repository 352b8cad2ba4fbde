use std::cmp::Ordering;
use std::f64::consts::{E, LN_2, PI};

use abctorus::tower_bounds::{
    binary_truncation_recipe, check_amplitude, check_q_condition, convergence_ledger, exp_f64,
    ledger_gaps, liouville_check, liouville_generate, liouville_verify, synthetic_stages,
    tail_beats_threshold, tower_compare, translation_params, verify_translation_params,
    Denominator, Interval, TowerError, TowerReal, NORM_CONSTANT,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn tower(h: u32, m: f64) -> TowerReal {
    TowerReal::from_parts(h, m)
}

/// `exp^h(m)` as a 200-bit interval.
fn reference(h: u32, m: f64) -> Interval {
    let mut v = Interval::from_f64(m);
    for _ in 0..h {
        v = v.exp();
    }
    v
}

#[test]
fn double_exponential_beats_single() {
    let a = exp_f64(10.0).exp();
    let b = exp_f64(1000.0);
    assert_eq!(tower_compare(&a, &b), Ordering::Greater);
    assert_eq!(tower_compare(&b, &a), Ordering::Less);
    assert_eq!(
        tower_compare(&tower(3, 1.5), &tower(3, 1.5)),
        Ordering::Equal
    );
}

#[test]
fn normal_form_is_unique() {
    let a = TowerReal::from_f64(1e6);
    let b = tower(1, 1e6f64.ln());
    let c = tower(2, 1e6f64.ln().ln());
    assert_eq!(a.height(), b.height());
    assert!((a.mantissa() - b.mantissa()).abs() < 1e-12);
    assert!((a.mantissa() - c.mantissa()).abs() < 1e-12);
    assert!(a.mantissa() >= 1.0 && a.mantissa() < E);
    let tiny = TowerReal::from_f64(1e-9);
    assert!(tiny.is_inverted());
    assert!((tiny.to_f64().unwrap() - 1e-9).abs() < 1e-21);
}

#[test]
fn arithmetic_matches_floats() {
    let a = TowerReal::from_f64(3.5);
    let b = TowerReal::from_f64(1234.0);
    assert!((a.mul(&b).to_f64().unwrap() - 4319.0).abs() < 1e-9);
    assert!((a.add(&b).to_f64().unwrap() - 1237.5).abs() < 1e-9);
    assert!((b.sub(&a).unwrap().to_f64().unwrap() - 1230.5).abs() < 1e-9);
    assert!((a.powf(3.0).to_f64().unwrap() - 42.875).abs() < 1e-9);
    assert_eq!(a.sub(&b), Err(TowerError::Negative));
    assert_eq!(TowerReal::ZERO.recip(), Err(TowerError::DivisionByZero));
}

#[test]
fn big_products_through_logs() {
    // e^{1000}·e^{2000} = e^{3000}
    let p = exp_f64(1000.0).mul(&exp_f64(2000.0));
    let l = p.ln().unwrap().to_f64().unwrap();
    assert!((l - 3000.0).abs() < 1e-9);
    // e^{1000} + e^{1000} = e^{1000 + ln 2}
    let s = exp_f64(1000.0).add(&exp_f64(1000.0));
    assert!((s.ln().unwrap().to_f64().unwrap() - (1000.0 + LN_2)).abs() < 1e-9);
    // (e^{e^{10}})^{3} = e^{3e^{10}}
    let c = exp_f64(10.0).exp().powf(3.0);
    let ll = c.ln().unwrap().magnitude.ln().unwrap().to_f64().unwrap();
    assert!((ll - (10.0 + 3f64.ln())).abs() < 1e-9);
}

#[test]
fn near_ties_are_refused() {
    let a = tower(4, 1.5);
    let b = tower(4, 1.5 * (1.0 + 1e-14));
    assert_eq!(a.certified_cmp(&b), Err(TowerError::Ambiguous));
    assert!(!a.surely_lt(&b));
    assert!(a.surely_lt(&a.bumped()));
    assert!(a.shrunk().surely_lt(&a));
}

#[test]
fn heights_up_to_two_agree_with_reference() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let (h1, m1) = (rng.gen_range(0..3u32), rng.gen_range(1.0..E));
        let (h2, m2) = (rng.gen_range(0..3u32), rng.gen_range(1.0..E));
        let (a, b) = (tower(h1, m1), tower(h2, m2));
        let (ra, rb) = (reference(h1, m1), reference(h2, m2));
        let expect = if ra.lt(&rb) {
            Ordering::Less
        } else if rb.lt(&ra) {
            Ordering::Greater
        } else {
            continue;
        };
        assert_eq!(tower_compare(&a, &b), expect, "{a} vs {b}");
    }
}

fn arb_tower() -> impl Strategy<Value = TowerReal> {
    (0u32..=3, 1.0f64..E, any::<bool>()).prop_map(|(h, m, inv)| {
        let t = TowerReal::from_parts(h, m);
        if inv {
            t.recip().unwrap()
        } else {
            t
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn total_order_axioms(a in arb_tower(), b in arb_tower(), c in arb_tower()) {
        let ab = tower_compare(&a, &b);
        prop_assert_eq!(ab, tower_compare(&b, &a).reverse());
        if ab != Ordering::Greater && tower_compare(&b, &c) != Ordering::Greater {
            prop_assert_ne!(tower_compare(&a, &c), Ordering::Greater);
        }
        if ab == Ordering::Equal {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn exp_ln_round_trip(h in 0u32..=3, m in 1.0f64..E) {
        let a = TowerReal::from_parts(h, m);
        let back = a.exp().ln().unwrap();
        prop_assert!(!back.negative);
        let b = back.magnitude;
        prop_assert_eq!(b.height(), a.height());
        prop_assert!((b.mantissa() - a.mantissa()).abs() <= 1e-12 * a.mantissa());
    }

    #[test]
    fn absorption_is_sound(h1 in 0u32..=2, m1 in 1.0f64..E, h2 in 0u32..=2, m2 in 1.0f64..E) {
        let (a, b) = (TowerReal::from_parts(h1, m1), TowerReal::from_parts(h2, m2));
        let s = a.add(&b);
        let (ra, rb) = (reference(h1, m1), reference(h2, m2));
        let exact = ra.add(&rb);
        if s == a {
            // b must be below the last place of a
            prop_assert!(rb.div(&ra).hi_f64() < 1e-15);
        } else {
            let got = s.to_f64().unwrap();
            let rel = (got - exact.mid_f64()).abs() / exact.mid_f64();
            prop_assert!(rel < 1e-12, "sum {} vs {}", got, exact.mid_f64());
        }
    }
}

/// `−(2l/πδ)ln(−ln(1−ε/8))` and `(2l/πδ)ln(−ln(ε/2l))` in plain floats.
fn amplitude_rhs(l: f64, eps: f64, delta: f64) -> (f64, f64) {
    let f = 2.0 * l / (PI * delta);
    (
        -f * (-(1.0 - eps / 8.0).ln()).ln(),
        f * (-(eps / (2.0 * l)).ln()).ln(),
    )
}

#[test]
fn amplitude_conditions() {
    assert!(check_amplitude(2048.0, 4, 1.0 / 12.0, 0.25));
    assert!(!check_amplitude(0.0, 4, 1.0 / 12.0, 0.25));
    let (a1, a2) = amplitude_rhs(4.0, 1.0 / 12.0, 0.25);
    assert!(2048.0 > a1 && 2048.0 > a2);
    let (t1, t2) = abctorus::tower_bounds::amplitude_thresholds(4, 1.0 / 12.0, 0.25);
    assert!((t1.mid_f64() - a1).abs() < 1e-9 * a1);
    assert!((t2.mid_f64() - a2).abs() < 1e-9 * a2.abs());
    assert!(t1.width_f64() < 1e-40);
    let at = t1.mid_f64();
    assert!(!check_amplitude(at.next_down(), 4, 1.0 / 12.0, 0.25));
    assert!(check_amplitude(at.next_up().next_up(), 4, 1.0 / 12.0, 0.25));
    assert!(!check_amplitude(1e9, 4, 0.2, 0.25));
}

#[test]
fn q_condition() {
    let l = TowerReal::from_u64(4);
    let literal = TowerReal::from_bigint(&(BigInt::from(10u32).pow(5000)));
    assert!(!check_q_condition(&literal, &l, 1, NORM_CONSTANT));
    let symbolic = exp_f64(9000.0).exp();
    assert!(check_q_condition(&symbolic, &l, 1, NORM_CONSTANT));
    // ln ln of the right-hand side is about ln 4 + 8192: far below 9000 and above 8000
    let low = exp_f64(8000.0).exp();
    assert!(!check_q_condition(&low, &l, 1, NORM_CONSTANT));
    assert!(check_q_condition(&TowerReal::from_u64(1), &l, 1, 0.0));
}

#[test]
fn ledger_passes_for_generated_recipe() {
    let stages = synthetic_stages(5, 1.0);
    assert_eq!(stages.len(), 5);
    for s in &stages {
        assert!(s.l.cmp_approx(&TowerReal::from_u64(4)) != Ordering::Less);
    }
    let gaps = ledger_gaps(&stages, None);
    let rep = convergence_ledger(&stages, &gaps);
    assert!(rep.passed(), "{}", rep.to_text());
    assert_eq!(rep.lines.len(), 25);
    assert!(rep.verdict().is_ok());
    assert!(rep.to_text().contains("verdict: pass"));
}

#[test]
fn ledger_fails_at_final_link() {
    let stages = synthetic_stages(5, 1.0);
    let gaps = ledger_gaps(&stages, Some(3));
    let rep = convergence_ledger(&stages, &gaps);
    match rep.verdict() {
        Err(TowerError::LinkFailed { stage, link, .. }) => {
            assert_eq!(stage, 3);
            assert_eq!(link, 5);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn ledger_zero_gap_passes() {
    let stages = synthetic_stages(2, 0.5);
    let rep = convergence_ledger(&stages, &[TowerReal::ZERO, TowerReal::ZERO]);
    assert!(rep.passed(), "{}", rep.to_text());
}

#[test]
fn liouville_first_level_k1() {
    let r = liouville_generate(1, 1);
    let q2 = r.convergents[1].q.literal().unwrap().clone();
    assert_eq!(r.convergents[0].q.literal().unwrap(), &BigInt::from(2));
    // 2/q2 < e^{-e} = 0.06598...
    let tail = BigRational::new(BigInt::from(2), q2);
    assert!(tail < BigRational::new(BigInt::from(659), BigInt::from(10_000)));
    assert!(liouville_verify(&r, 1, 1));
}

#[test]
fn liouville_k2_literal_and_symbolic() {
    let r = liouville_generate(2, 2);
    let q2 = r.convergents[1].q.literal().unwrap();
    // N with (N−1)·ln2 > e^4
    let bits = q2.bits() - 1;
    assert!((bits - 1) as f64 * LN_2 > 4f64.exp());
    assert!(((bits - 2) as f64) * LN_2 <= 4f64.exp());
    assert!(liouville_verify(&r, 1, 1) && liouville_verify(&r, 2, 1));
    match &r.convergents[2].q {
        Denominator::Symbolic { log2, .. } => {
            // M ≥ 2·e^{k^{q_2}} in tower form
            let thr = TowerReal::from_bigint(q2)
                .mul_f64(2f64.ln())
                .exp()
                .exp()
                .mul_f64(2.0);
            assert!(!log2.surely_lt(&thr));
        }
        _ => panic!("level 3 denominator should be symbolic"),
    }
    let c = liouville_check(&r, 2, 2);
    assert!(c.holds && c.symbolic, "{c:?}");
    assert!(!liouville_verify(&r, 3, 2));
}

#[test]
fn liouville_generated_recipes_verify() {
    for (levels, k) in [(6usize, 1u64), (3, 2), (3, 3)] {
        let r = liouville_generate(levels, k);
        for level in 1..=levels {
            for kk in 1..=k {
                assert!(
                    liouville_verify(&r, kk, level),
                    "levels {levels} k {kk} level {level}"
                );
            }
        }
        for w in r.convergents.windows(2) {
            if let (Some(a), Some(b)) = (w[0].q.literal(), w[1].q.literal()) {
                assert!(a < b);
            }
        }
        for c in &r.convergents {
            if let (Some(p), Some(q)) = (&c.p, c.q.literal()) {
                assert_eq!(num_integer::Integer::gcd(p, q), BigInt::from(1));
            }
        }
    }
}

#[test]
fn rational_alpha_fails() {
    let third = BigRational::new(BigInt::from(1), BigInt::from(3));
    let r = binary_truncation_recipe(&third, 5, 5);
    assert_eq!(r.convergents[3].q.literal().unwrap(), &BigInt::from(64));
    for level in 1..=5 {
        assert!(!liouville_verify(&r, 5, level));
    }
    // with k = 1 the threshold e^{-e} is fixed and 1/(3q) drops below it
    assert!(!liouville_verify(&r, 1, 2));
    assert!(liouville_verify(&r, 1, 5));
}

#[test]
fn tail_at_threshold_is_rejected() {
    let q = TowerReal::from_u64(4);
    let at = q.mul_f64(2f64.ln()).exp().exp();
    assert!(!tail_beats_threshold(&at, 2, &q));
    assert!(tail_beats_threshold(&at.bumped(), 2, &q));
}

#[test]
fn translations_h1() {
    let tp = translation_params(1, 4).unwrap();
    for rec in &tp.levels {
        assert_eq!(rec.gamma, vec![BigInt::from(1)]);
    }
    assert!(verify_translation_params(&tp).is_ok());
}

#[test]
fn translations_h2_three_levels() {
    let tp = translation_params(2, 3).unwrap();
    for w in tp.levels.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        assert_eq!(b.gamma[1], a.s.as_ref().unwrap() * &a.gamma[1]);
        assert_eq!(b.q, &b.r * &a.gamma[1]);
        for c in 0..2 {
            assert_eq!((&b.gamma[c] - &a.gamma[c]) % &a.q, BigInt::from(0));
        }
    }
    assert!(verify_translation_params(&tp).is_ok());

    let mut bad = tp.clone();
    bad.levels[1].gamma[0] += 1;
    assert_eq!(
        verify_translation_params(&bad),
        Err(TowerError::ItemViolated { item: 5, level: 1 })
    );
    let mut bad = tp.clone();
    bad.levels[2].r += 1;
    assert_eq!(
        verify_translation_params(&bad),
        Err(TowerError::ItemViolated { item: 3, level: 3 })
    );
    let mut bad = tp.clone();
    bad.levels[1].p += 2;
    assert!(matches!(
        verify_translation_params(&bad),
        Err(TowerError::ItemViolated { item: 2 | 6, .. })
    ));
}

#[test]
fn translations_h3_items_one_to_six() {
    let tp = translation_params(3, 3).unwrap();
    assert!(tp.levels.iter().all(|r| r.diam.is_none()));
    assert!(verify_translation_params(&tp).is_ok());
}
