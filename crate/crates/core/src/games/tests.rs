use std::collections::BTreeSet;

use num_complex::Complex;
use proptest::prelude::*;
use rand::Rng;

use super::adp_del::{run_adp_del, AdpStrategy};
use super::deniability::{deniability_experiment, run_deniability_pair, DenScheme};
use super::double_ext::{run_double_extraction, DoubleExtStrategy, Variant};
use super::dph::{dph_game, DphStrategy};
use super::evidence::evidence_collection_demo;
use super::lemmas::{all_planes, subspace_proj_suite};
use super::owth::{classical_reports, random_classical_instance, unitary_reports};
use super::soundness::{
    run_count_scenario, run_soundness_game, CountScenario, ForgerStrategy, SoundScheme, SoundnessSetup,
    VerifierStrategy,
};
use super::*;
use crate::fs_cden::Strategy;
use crate::qrom::{extract_by_random_query, query_weight, Oracle, OracleAlgorithm, QueryOracle, QueryTrace};
use crate::rng::stream;
use crate::sig_cden::ot::OtParams;
use crate::statevec::RegisterLayout;
use crate::{Matrix, State};

const SEED: u64 = 0xC0DE;

fn c(re: f64) -> Complex<f64> {
    Complex::new(re, 0.0)
}

#[test]
fn wilson_coverage_over_synthetic_games() {
    let mut rng = stream(7);
    let mut covered = 0;
    for g in 0..1000 {
        let p = [0.05, 0.2, 0.5, 0.8, 0.95][g % 5];
        let n = 400;
        let wins = (0..n).filter(|_| rng.gen::<f64>() < p).count();
        let [lo, hi] = wilson(wins, n);
        covered += usize::from(lo <= p && p <= hi);
    }
    let coverage = covered as f64 / 1000.0;
    assert!((0.93..=0.97).contains(&coverage), "coverage {coverage}");
}

#[test]
fn wilson_edges() {
    let [lo, hi] = wilson(0, 100);
    assert!(lo.abs() < 1e-12 && hi > 0.0 && hi < 0.05);
    let [lo, hi] = wilson(100, 100);
    assert!(lo > 0.95 && (hi - 1.0).abs() < 1e-12);
}

#[test]
fn trial_caps() {
    assert!(matches!(check_trials(0), Err(GameError::Params(_))));
    assert!(matches!(check_trials(MAX_TRIALS + 1), Err(GameError::Params(_))));
    assert!(check_trials(1).is_ok());
}

proptest! {
    #[test]
    fn bound_report_holds_iff_slack_within_tolerance(lhs in -2.0f64..2.0, rhs in -2.0f64..2.0) {
        let r = BoundReport::new("x", "i", lhs, rhs);
        prop_assert_eq!(r.holds, rhs - lhs >= -BOUND_TOLERANCE);
        prop_assert_eq!(r.slack, rhs - lhs);
    }

    #[test]
    fn wilson_contains_estimate(trials in 1usize..5000, frac in 0.0f64..=1.0) {
        let wins = ((trials as f64) * frac).floor() as usize;
        let [lo, hi] = wilson(wins, trials);
        let est = wins as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= est + 1e-12 && est <= hi + 1e-12 && hi <= 1.0);
    }

    #[test]
    fn summaries_count_only_real_violations(slacks in proptest::collection::vec(-1.0f64..1.0, 1..40)) {
        let reports: Vec<BoundReport> = slacks.iter().map(|s| BoundReport::new("l", "i", 0.0, *s)).collect();
        let s = summarize(&reports);
        prop_assert_eq!(s.len(), 1);
        prop_assert_eq!(s[0].instances, slacks.len());
        prop_assert_eq!(s[0].violations, slacks.iter().filter(|&&x| x < -BOUND_TOLERANCE).count());
    }
}

#[test]
fn adp_del_computational_at_six_reps() {
    let st = run_adp_del(&AdpStrategy::Computational, 8, 6, 4096, SEED).unwrap();
    let target = 1.0 / 64.0;
    assert!((st.exact.unwrap() - target).abs() < 1e-9, "exact {:?}", st.exact);
    assert!(st.ci95[0] <= target && target <= st.ci95[1], "{:?}", st.ci95);
    assert_eq!(st.matches_exact(), Some(true));
}

#[test]
fn adp_del_other_strategies() {
    let st = run_adp_del(&AdpStrategy::Hadamard, 6, 6, 10_000, SEED).unwrap();
    assert_eq!(st.wins, 0);
    // Per index: d¹ always has the right parity, y is one of two points out of 64.
    assert!((st.exact.unwrap() - (2.0f64 / 64.0).powi(6)).abs() < 1e-15);
    let st = run_adp_del(&AdpStrategy::OracleCheat, 6, 6, 200, SEED).unwrap();
    assert_eq!(st.wins, 200);
    assert!(run_adp_del(&AdpStrategy::Computational, 13, 1, 10, SEED).is_err());
    assert!(run_adp_del(&AdpStrategy::Computational, 4, 0, 10, SEED).is_err());
}

#[test]
fn double_extraction_bounds() {
    let st = run_double_extraction(&DoubleExtStrategy::MeasureAndGuess, 8, Variant::Tagged, 10_000, SEED).unwrap();
    assert!(st.estimate <= st.three_sigma_above(2f64.powi(-7)));
    assert!((st.exact.unwrap() - 2f64.powi(-8)).abs() < 1e-12);
    assert_eq!(st.matches_exact(), Some(true));
    let st = run_double_extraction(&DoubleExtStrategy::MeasureAndGuess, 4, Variant::Untagged, 4000, SEED).unwrap();
    assert_eq!(st.matches_exact(), Some(true));
    let st = run_double_extraction(&DoubleExtStrategy::MeasuredTwice, 6, Variant::Tagged, 500, SEED).unwrap();
    assert_eq!(st.wins, 0);
    let st = run_double_extraction(&DoubleExtStrategy::OracleCheat, 6, Variant::Untagged, 100, SEED).unwrap();
    assert_eq!(st.wins, 100);
}

#[test]
fn dph_bounds() {
    for strategy in [DphStrategy::MeasureComputational, DphStrategy::MeasureHadamard] {
        let st = dph_game(&strategy, 8, 4000, SEED).unwrap();
        // v₁ valid w.p. 1 − 2^{−4}; a uniform nonzero guess lands in A⊥ ∖ {0} w.p. 15/255.
        let hand = (1.0 - 1.0 / 16.0) * 15.0 / 255.0;
        assert!((st.exact.unwrap() - hand).abs() < 1e-9, "{strategy:?} {:?}", st.exact);
        assert!(st.estimate <= st.three_sigma_above(2f64.powi(-3)));
        assert_eq!(st.matches_exact(), Some(true));
    }
    assert_eq!(dph_game(&DphStrategy::OracleCheat, 8, 100, SEED).unwrap().wins, 100);
    assert!(dph_game(&DphStrategy::OracleCheat, 7, 10, SEED).is_err());
}

#[test]
fn soundness_forgers_and_verifiers() {
    let params = OtParams { lambda_x: 6, share_bits: 6, ell: 4 };
    for scheme in [SoundScheme::Ot, SoundScheme::Mult] {
        let setup = SoundnessSetup::new(scheme, params, SEED).unwrap();
        let honest = VerifierStrategy::HonestVerify;
        let st = run_soundness_game(&honest, &ForgerStrategy::OracleCheat, &setup, 200, SEED).unwrap();
        assert_eq!(st.wins, 200);
        let st = run_soundness_game(&honest, &ForgerStrategy::Replay, &setup, 400, SEED).unwrap();
        assert_eq!(st.matches_exact(), Some(true), "{scheme:?} {st:?}");
        assert!(st.estimate < 0.2);
        let st = run_soundness_game(&VerifierStrategy::AlwaysAccept, &ForgerStrategy::Replay, &setup, 100, SEED).unwrap();
        assert_eq!(st.wins, 100);
    }
}

#[test]
fn count_game_scenarios() {
    let params = OtParams { lambda_x: 6, share_bits: 6, ell: 4 };
    for sc in [CountScenario::DeleteOne, CountScenario::DeleteBoth, CountScenario::DeleteOneKeepOther] {
        let st = run_count_scenario(sc, params, 200, SEED).unwrap();
        assert_eq!(st.wins, 0, "{sc:?}");
    }
    let st = run_count_scenario(CountScenario::MeasureThenDelete, params, 2000, SEED).unwrap();
    assert!((st.exact.unwrap() - 0.5f64.powi(4)).abs() < 1e-12);
    assert_eq!(st.matches_exact(), Some(true));
}

#[test]
fn deniability_pairs_honest_deleter() {
    for scheme in [DenScheme::FsNizk, DenScheme::FsSig] {
        let pair = run_deniability_pair(scheme, &Strategy::HonestDeleter, 8, SEED).unwrap();
        assert!((pair.real.accept_prob - 1.0).abs() < 1e-9, "{scheme:?}");
        assert!((pair.sim.accept_prob - 0.9375).abs() < 1e-9, "{scheme:?}");
        if scheme == DenScheme::FsSig {
            assert_eq!(pair.simulator_queries.as_deref(), Some(&[][..]));
            assert!(!pair.signed.contains(&pair.m_star.unwrap()));
        }
    }
    assert_eq!(DenScheme::parse("fs-sig"), Some(DenScheme::FsSig));
    assert_eq!(DenScheme::parse("nope"), None);
}

#[test]
fn honest_memos_agree_in_distribution() {
    let r = deniability_experiment(DenScheme::FsNizk, &Strategy::HonestDeleter, 8, 1000, SEED).unwrap();
    assert!(r.memo.tv <= 0.05, "{:?}", r.memo);
    assert!(r.memo.real_accepted > 900 && r.memo.sim_accepted > 900);
    assert!((r.real.exact.unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(r.real.matches_exact(), Some(true));
    assert!((r.sim.exact.unwrap() - 0.9375).abs() < 1e-9);
    assert_eq!(r.sim.matches_exact(), Some(true));
}

#[test]
fn evidence_demo() {
    let r = evidence_collection_demo(8, 1000, SEED).unwrap();
    assert!(r.strawman.wins >= 990);
    assert!(r.strawman_advantage > 0.99);
    assert_eq!(r.fs_honest.wins, 0);
    assert_eq!(r.fs_honest_sim.wins, 0);
    assert_eq!(r.fs_honest_advantage, 0.0);
    // |A| = 2^{λ/2} = 16; the collapsed proof passes deletion w.p. 1/16.
    assert!(r.fs_measure.estimate <= r.fs_measure.three_sigma_above(1.0 / 16.0));
    assert!((r.fs_measure.exact.unwrap() - 15.0 / 256.0).abs() < 1e-9);
    assert_eq!(r.fs_measure.matches_exact(), Some(true));
}

#[test]
fn games_are_reproducible() {
    let a = run_adp_del(&AdpStrategy::Computational, 6, 3, 300, 99).unwrap();
    let b = run_adp_del(&AdpStrategy::Computational, 6, 3, 300, 99).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = run_adp_del(&AdpStrategy::Computational, 6, 3, 300, 100).unwrap();
    assert_ne!(a.outcomes, c.outcomes);
}

#[test]
fn there_are_35_planes_in_four_bits() {
    // Gaussian binomial (2⁴−1)(2⁴−2)/((2²−1)(2²−2)).
    assert_eq!(all_planes(4).len(), 35);
    let reports = subspace_proj_suite(SEED).unwrap();
    assert_eq!(reports.len(), 350);
    assert!(reports.iter().all(|r| r.holds));
}

/// Answers every query with a fixed function of `x`.
struct FnOracle(fn(u64) -> u64);

impl Oracle for FnOracle {
    fn in_bits(&self) -> usize {
        1
    }
    fn out_bits(&self) -> usize {
        1
    }
    fn eval(&self, x: u64) -> u64 {
        (self.0)(x)
    }
}

fn xy_layout() -> RegisterLayout {
    RegisterLayout::new(&[("X", 1), ("Y", 1)]).unwrap()
}

/// `ux ⊗ uy` on the two-qubit X/Y layout, indexed by packed labels.
fn product(ux: [[f64; 2]; 2], uy: [[f64; 2]; 2]) -> Matrix {
    let l = xy_layout();
    let (fx, fy) = (l.field("X").unwrap(), l.field("Y").unwrap());
    Matrix::from_fn(4, |i, j| {
        let (xi, xj) = (fx.get(i as u128) as usize, fx.get(j as u128) as usize);
        let (yi, yj) = (fy.get(i as u128) as usize, fy.get(j as u128) as usize);
        c(ux[xi][xj] * uy[yi][yj])
    })
}

const ID: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];

/// `(Σ_x a_x |x⟩) ⊗ |−⟩` on X/Y.
fn kickback_input(a0: f64, a1: f64) -> State {
    let l = xy_layout();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let terms = [(0, 0, a0 * h), (0, 1, -a0 * h), (1, 0, a1 * h), (1, 1, -a1 * h)]
        .map(|(x, y, a)| (l.pack(&[x, y]).unwrap(), c(a)));
    State::from_terms(l, terms).unwrap()
}

fn lemma<'a>(reports: &'a [BoundReport], id: &str) -> &'a BoundReport {
    reports.iter().find(|r| r.lemma == id).unwrap()
}

#[test]
fn identical_oracles_give_zero_distance() {
    let mut rng = stream(3);
    let (alg, h, _, set) = random_classical_instance(&mut rng).unwrap();
    let reports = classical_reports("same", &alg, &h, &h, &set, &mut rng).unwrap();
    for id in ["qrom-replacement", "qwtotal"] {
        let r = lemma(&reports, id);
        assert!(r.lhs.abs() < 1e-9);
        assert!((r.slack - r.rhs).abs() < 1e-9 && r.holds);
    }
}

#[test]
fn single_point_reprogram_single_query() {
    // |1⟩_X |0⟩_Y queried once: the answers H(1) = 0 and H′(1) = 1 are orthogonal.
    let l = xy_layout();
    let init = State::basis(l.clone(), l.pack(&[1, 0]).unwrap()).unwrap();
    let alg = OracleAlgorithm::new(init, vec![Matrix::identity(4), Matrix::identity(4)], "X", Some("Y")).unwrap();
    let set = BTreeSet::from([1u64]);
    let reports =
        classical_reports("point", &alg, &FnOracle(|_| 0), &FnOracle(|x| x & 1), &set, &mut stream(1)).unwrap();
    let r = lemma(&reports, "qwtotal");
    assert!((r.lhs - 1.0).abs() < 1e-12);
    assert!((r.rhs - 2.0).abs() < 1e-12);
    assert!(r.holds);
    let r = lemma(&reports, "qwmeasure");
    assert!(r.rhs == 1.0 && r.holds);
}

#[test]
fn replacement_bound_needs_its_factor_two() {
    // X = √.75|0⟩ + √.25|1⟩, Y = |−⟩: each query kicks back (−1)^{O(x)}.
    // Under H ≡ 0 the step R† returns X to |0⟩, so the second query has no
    // weight on S = {1}; under H′ the state is R†(√.75|0⟩ − √.25|1⟩).
    let (a0, a1) = (0.75f64.sqrt(), 0.25f64.sqrt());
    let r_dag = [[a0, a1], [-a1, a0]];
    let steps = vec![Matrix::identity(4), product(r_dag, ID), Matrix::identity(4)];
    let alg = OracleAlgorithm::new(kickback_input(a0, a1), steps, "X", Some("Y")).unwrap();
    let set = BTreeSet::from([1u64]);
    let reports =
        classical_reports("kickback", &alg, &FnOracle(|_| 0), &FnOracle(|x| x & 1), &set, &mut stream(1)).unwrap();

    // Overlap of the two states at the second query is .75 − .25.
    let r = lemma(&reports, "qrom-replacement");
    assert!((r.lhs - 0.75f64.sqrt()).abs() < 1e-12);
    assert!((r.rhs - (2.0f64 * 0.25).sqrt()).abs() < 1e-12);
    assert!(!r.holds);
    // The final-state form with the factor 2 covers it.
    assert!(lemma(&reports, "qwtotal").holds);
}

#[test]
fn final_state_form_fails_without_factor_two() {
    // X = |+⟩, Y = |−⟩, one query: H gives |+⟩, H′ gives |−⟩.
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let alg = OracleAlgorithm::new(kickback_input(h, h), vec![Matrix::identity(4), Matrix::identity(4)], "X", Some("Y"))
        .unwrap();
    let set = BTreeSet::from([1u64]);
    let reports =
        classical_reports("plus", &alg, &FnOracle(|_| 0), &FnOracle(|x| x & 1), &set, &mut stream(1)).unwrap();
    let r = lemma(&reports, "qwtotal-without-2");
    assert!((r.lhs - 1.0).abs() < 1e-12 && (r.rhs - 0.5f64.sqrt()).abs() < 1e-12);
    assert!(!r.holds && r.informational);
    assert!(lemma(&reports, "qwtotal").holds);
}

#[test]
fn trace_distance_form_misses_phase_only_oracles() {
    // √.9|00⟩ + √.1|11⟩ on A/Q, U₀ = I, U₁ = Z on Q: every Schmidt vector of Q
    // is a basis state, so TD[U₀q, U₁q] = 0, yet the final states differ.
    let l = RegisterLayout::new(&[("A", 1), ("Q", 1)]).unwrap();
    let init = State::from_terms(
        l.clone(),
        [(l.pack(&[0, 0]).unwrap(), c(0.9f64.sqrt())), (l.pack(&[1, 1]).unwrap(), c(0.1f64.sqrt()))],
    )
    .unwrap();
    let alg = OracleAlgorithm::new(init, vec![Matrix::identity(4), Matrix::identity(4)], "Q", None).unwrap();
    let z = Matrix::from_fn(2, |i, j| if i != j { c(0.0) } else if i == 0 { c(1.0) } else { c(-1.0) });
    let reports = unitary_reports("phase", &alg, &Matrix::identity(2), &z).unwrap();
    let r = lemma(&reports, "gen-owth");
    assert!((r.lhs - 0.6).abs() < 1e-12 && r.rhs.abs() < 1e-12);
    assert!(!r.holds);
    // ‖(I − Z)|1⟩‖² = 4 with weight .1.
    let r = lemma(&reports, "gen-owth-l2");
    assert!((r.rhs - 0.4f64.sqrt()).abs() < 1e-12 && r.holds);
}

#[test]
fn snapshot_extraction_matches_rerunning_the_algorithm() {
    let mut rng = stream(11);
    let (alg, h, _, set) = random_classical_instance(&mut rng).unwrap();
    let trace = alg.trace(QueryOracle::Classical(&h)).unwrap();
    let exact = query_weight(&trace, &set) / alg.queries() as f64;
    let n = 3000;
    let hits = (0..n)
        .filter(|_| {
            let (x, y) = extract_by_random_query(&alg, &h, &mut rng).unwrap().unwrap();
            assert_eq!(y, h.eval(x));
            set.contains(&x)
        })
        .count();
    let sigma = (exact * (1.0 - exact) / n as f64).sqrt();
    assert!((hits as f64 / n as f64 - exact).abs() <= 4.0 * sigma + 1e-9);
    let again = QueryTrace::from_snapshots(&alg.run(QueryOracle::Classical(&h)).unwrap().snapshots, "X").unwrap();
    assert_eq!(again.per_query_weight(&set), trace.per_query_weight(&set));
}

#[test]
fn oversized_instances_are_rejected() {
    let l = RegisterLayout::new(&[("X", 1), ("Y", 1)]).unwrap();
    let steps = vec![Matrix::identity(4); MAX_QUERIES_PLUS_TWO];
    let alg = OracleAlgorithm::new(State::zero(l), steps, "X", Some("Y")).unwrap();
    let err = classical_reports("big", &alg, &FnOracle(|_| 0), &FnOracle(|_| 0), &BTreeSet::new(), &mut stream(1));
    assert!(matches!(err, Err(GameError::Params(_))));
}

const MAX_QUERIES_PLUS_TWO: usize = super::owth::MAX_QUERIES + 2;
