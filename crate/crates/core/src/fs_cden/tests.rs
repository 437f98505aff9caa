use super::*;
use crate::qrom::OracleTable;
use crate::rng::stream;
use crate::sigma::keygen;
use crate::statevec::{ztwirl_mixture, DensityMatrix};

fn table(seed: u64) -> OracleView {
    OracleTable::new(seed, NIZK_ORACLE_IN_BITS, NIZK_ORACLE_OUT_BITS).unwrap().view()
}

/// Independent oracle: recompute the predicate from the group equation and a
/// hand-packed oracle input.
fn predicate_by_hand(h: &OracleView, lambda: usize, x: u64, a: u64, s1: u64, s2: u64, s3: u64) -> bool {
    let (p, q, g) = (23u64, 11u64, 2u64);
    let pow = |b: u64, e: u64| (0..e).fold(1u64, |acc, _| acc * b % p);
    let input = ((a << 10) | (x << 5) | s1) << (32 - lambda - 10);
    s2 == h.eval(input) % q && s1 != 0 && s1 < p && s2 < q && s3 < q && pow(g, s3) == s1 * pow(x, s2) % p
}

fn fields(st: &State, label: u128) -> [u64; 4] {
    [REG_A, REG_S1, REG_S2, REG_S3].map(|r| st.field(r).unwrap().get(label) as u64)
}

#[test]
fn proof_shape_at_lambda_four() {
    let fs = FsCden::new(4).unwrap();
    let h = table(1);
    let mut rng = stream(1);
    let (x, w) = keygen(&fs.group, &mut rng);
    let (pf, dk) = fs.prove(&h, x, w, &mut rng).unwrap();
    assert_eq!(pf.state.len(), 4);
    assert!((pf.state.norm_sqr() - 1.0).abs() < 1e-12);
    for (label, amp) in pf.state.terms() {
        let [a, s1, s2, s3] = fields(&pf.state, label);
        assert!(dk.a.contains_value(a as u128));
        assert!((amp.norm_sqr() - 0.25).abs() < 1e-12);
        assert!(predicate_by_hand(&h, 4, x, a, s1, s2, s3));
    }
}

#[test]
fn prove_is_deterministic_per_seed() {
    let fs = FsCden::new(6).unwrap();
    let h = table(2);
    let (x, w) = keygen(&fs.group, &mut stream(9));
    let a = fs.prove(&h, x, w, &mut stream(5)).unwrap();
    let b = fs.prove(&h, x, w, &mut stream(5)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn prove_rejects_wrong_witness() {
    let fs = FsCden::new(4).unwrap();
    let (x, w) = keygen(&fs.group, &mut stream(3));
    let bad = if w == 1 { 2 } else { 1 };
    assert!(matches!(fs.prove(&table(0), x, bad, &mut stream(0)), Err(FsError::Sigma(SigmaError::BadWitness))));
    assert!(FsCden::new(5).is_err());
    assert!(FsCden::new(14).is_err());
}

#[test]
fn completeness_and_deletion_on_grid() {
    for lambda in [4, 6, 8] {
        let fs = FsCden::new(lambda).unwrap();
        for i in 0..20 {
            let mut rng = stream(1000 * lambda as u64 + i);
            let h = table(rng.gen());
            let (x, w) = keygen(&fs.group, &mut rng);
            let (pf, dk) = fs.prove(&h, x, w, &mut rng).unwrap();
            let (p, post) = fs.verify(&pf, &h).unwrap();
            assert!((p - 1.0).abs() < 1e-9);
            let post = post.unwrap();
            assert!(post.state.max_abs_diff(&pf.state).unwrap() < 1e-9);
            let cert = FsCden::del(post);
            assert!((fs.delver_probability(&h, &dk, &cert).unwrap() - 1.0).abs() < 1e-9);
            assert!(fs.delver(&h, &dk, &cert, &mut rng).unwrap().accepted);
        }
    }
}

#[test]
fn corrupted_response_never_verifies() {
    let fs = FsCden::new(6).unwrap();
    let h = table(4);
    let mut rng = stream(4);
    let (x, w) = keygen(&fs.group, &mut rng);
    let (pf, _) = fs.prove(&h, x, w, &mut rng).unwrap();
    let s3 = pf.state.field(REG_S3).unwrap();
    let bad = pf.state.apply_permutation(|l| s3.set(l, s3.get(l) ^ 1)).unwrap();
    let bad = ProofState { state: bad, x };
    let want: f64 = bad
        .state
        .terms()
        .filter(|(l, _)| {
            let [a, s1, s2, s3] = fields(&bad.state, *l);
            predicate_by_hand(&h, 6, x, a, s1, s2, s3)
        })
        .map(|(_, amp)| amp.norm_sqr())
        .sum();
    assert_eq!(want, 0.0);
    let (p, post) = fs.verify(&bad, &h).unwrap();
    assert_eq!(p, 0.0);
    assert!(post.is_none());
}

#[test]
fn measured_proof_still_verifies() {
    let fs = FsCden::new(8).unwrap();
    let h = table(5);
    let mut rng = stream(5);
    let (x, w) = keygen(&fs.group, &mut rng);
    let (pf, _) = fs.prove(&h, x, w, &mut rng).unwrap();
    let m = pf.state.measure(REG_A, &mut rng).unwrap();
    let (p, _) = fs.verify(&ProofState { state: m.post, x }, &h).unwrap();
    assert!((p - 1.0).abs() < 1e-9);
}

#[test]
fn verification_under_a_different_oracle_fails_on_most_branches() {
    let fs = FsCden::new(8).unwrap();
    let mut rng = stream(6);
    let (x, w) = keygen(&fs.group, &mut rng);
    let h = table(6);
    let (pf, _) = fs.prove(&h, x, w, &mut rng).unwrap();
    let other = table(7);
    let want: f64 = pf
        .state
        .terms()
        .filter(|(l, _)| {
            let [a, s1, s2, s3] = fields(&pf.state, *l);
            predicate_by_hand(&other, 8, x, a, s1, s2, s3)
        })
        .map(|(_, amp)| amp.norm_sqr())
        .sum();
    let (p, _) = fs.verify(&pf, &other).unwrap();
    assert!((p - want).abs() < 1e-12);
    assert!(p < 1.0);
}

#[test]
fn del_is_identity() {
    let fs = FsCden::new(4).unwrap();
    let h = table(8);
    let mut rng = stream(8);
    let (x, w) = keygen(&fs.group, &mut rng);
    let (pf, _) = fs.prove(&h, x, w, &mut rng).unwrap();
    let once = FsCden::del(pf.clone());
    assert_eq!(once, pf);
    assert_eq!(FsCden::del(once.clone()), once);
    assert!((once.state.norm_sqr() - 1.0).abs() < 1e-12);
}

#[test]
fn collapsed_certificate_passes_with_one_over_size_of_a() {
    let fs = FsCden::new(4).unwrap();
    let h = table(9);
    let mut rng = stream(9);
    let (x, w) = keygen(&fs.group, &mut rng);
    let (pf, dk) = fs.prove(&h, x, w, &mut rng).unwrap();
    for _ in 0..8 {
        let m = pf.state.measure(REG_A, &mut rng).unwrap();
        let p = fs.delver_probability(&h, &dk, &ProofState { state: m.post, x }).unwrap();
        assert!((p - 0.25).abs() < 1e-9);
    }
}

#[test]
fn certificate_with_foreign_layout_is_rejected() {
    let fs = FsCden::new(4).unwrap();
    let h = table(10);
    let mut rng = stream(10);
    let (x, w) = keygen(&fs.group, &mut rng);
    let (_, dk) = fs.prove(&h, x, w, &mut rng).unwrap();
    let wrong = State::zero(RegisterLayout::new(&[(REG_A, 4)]).unwrap());
    assert_eq!(fs.delver_probability(&h, &dk, &ProofState { state: wrong, x }), Err(FsError::LayoutMismatch));
}

#[test]
fn simulated_certificate_acceptance_matches_overlap() {
    for lambda in [2, 4, 6, 8, 10] {
        let fs = FsCden::new(lambda).unwrap();
        let h = table(lambda as u64);
        let mut rng = stream(11);
        let (x, _) = keygen(&fs.group, &mut rng);
        let keys = fs.sim_keys(&mut rng).unwrap();
        let pf = fs.sim_proof(&h, x, &keys).unwrap();
        // |⟨A_{0,s}|A_{0,s}∖{0}⟩|² = (|A| − 1)/|A|.
        let size = (1u64 << (lambda / 2)) as f64;
        let overlap = (size - 1.0) / size;
        let p = fs.sim_delver_probability(&h, &keys, &pf).unwrap();
        assert!((p - overlap).abs() < 1e-9, "lambda {lambda}: {p}");
    }
    assert!((1.0 - 2f64.powi(-4) - 0.9375).abs() < 1e-15);
}

#[test]
fn sim_oracle_reprograms_exactly_the_simulated_challenges() {
    let fs = FsCden::new(8).unwrap();
    let h = table(12);
    let mut rng = stream(12);
    let (x, _) = keygen(&fs.group, &mut rng);
    let keys = fs.sim_keys(&mut rng).unwrap();
    assert_ne!(keys.k, keys.k_ch);
    let hp = fs.sim_oracle(&h, &keys, x).unwrap();
    assert_eq!(hp.reprogrammed_inputs().len(), 15);
    for e in keys.a.enumerate().unwrap().into_iter().filter(|e| !e.is_zero()) {
        let a = e.value_u64();
        let t = fs.sim_transcript(&h, x, &keys, a).unwrap();
        let input = ((a << 10) | (x << 5) | t.s1) << (32 - 18);
        let kch_input = ((keys.k_ch << 8) | a) << (32 - 24);
        assert_eq!(hp.eval(input), h.eval(kch_input));
    }
    for _ in 0..200 {
        let a = rng.gen_range(0..256u64);
        if keys.a.contains_value(a as u128) {
            continue;
        }
        let probe = (a << 24) | rng.gen_range(0..1u64 << 24);
        assert_eq!(hp.eval(probe), h.eval(probe));
    }
    let pf = fs.sim_proof(&h, x, &keys).unwrap();
    let (p, _) = fs.verify(&pf, &hp).unwrap();
    assert!((p - 1.0).abs() < 1e-9);
}

#[test]
fn simulator_with_honest_deleter() {
    let fs = FsCden::new(8).unwrap();
    let h = table(13);
    let (x, _) = keygen(&fs.group, &mut stream(13));
    let mut accepted = 0;
    for seed in 0..64 {
        let rec = fs.simulate_experiment(&h, x, &Strategy::HonestDeleter, seed).unwrap();
        assert!((rec.accept_prob - 0.9375).abs() < 1e-9);
        assert_eq!(rec.lambda, 8);
        match &rec.residual {
            Some(r) => {
                accepted += 1;
                assert_eq!(r, "0000000000000001");
            }
            None => assert!(!rec.accepted),
        }
        assert_eq!(rec.oracle_spec.overlays.len(), 1);
    }
    assert!(accepted > 48);
}

#[test]
fn simulator_with_other_strategies() {
    let fs = FsCden::new(4).unwrap();
    let h = table(14);
    let (x, _) = keygen(&fs.group, &mut stream(14));
    for seed in 0..16 {
        let m = fs.simulate_experiment(&h, x, &Strategy::MeasureOnePoint, seed).unwrap();
        // A collapsed branch |a⟩|0⟩ overlaps |A_{0,s}⟩ with weight 1/|A|.
        assert!((m.accept_prob - 0.25).abs() < 1e-9);
        let g = fs.simulate_experiment(&h, x, &Strategy::Garbage, seed).unwrap();
        assert!(g.accept_prob <= 0.25 + 1e-9);
    }
}

#[test]
fn real_experiment_outcomes() {
    let fs = FsCden::new(6).unwrap();
    let h = table(15);
    let (x, w) = keygen(&fs.group, &mut stream(15));
    for seed in 0..16 {
        let rec = fs.nizk_real_experiment(&h, x, w, &Strategy::HonestDeleter, seed).unwrap();
        assert!(rec.accepted);
        assert!((rec.accept_prob - 1.0).abs() < 1e-9);
        assert_eq!(rec.residual.as_deref(), Some("0000000000000001"));
        // Zeros never uncompute to zero: every honest first message is nonzero.
        let nd = fs.nizk_real_experiment(&h, x, w, &Strategy::NonDeleting, seed).unwrap();
        assert_eq!(nd.accept_prob, 0.0);
        assert!(nd.residual.is_none());
        let m = fs.nizk_real_experiment(&h, x, w, &Strategy::MeasureOnePoint, seed).unwrap();
        assert!((m.accept_prob - 0.125).abs() < 1e-9);
    }
}

#[test]
fn experiment_record_json_shape() {
    let fs = FsCden::new(4).unwrap();
    let h = table(16);
    let (x, w) = keygen(&fs.group, &mut stream(16));
    let rec = fs.nizk_real_experiment(&h, x, w, &Strategy::HonestDeleter, 3).unwrap();
    let js: serde_json::Value = serde_json::to_value(&rec).unwrap();
    for key in ["accepted", "accept_prob", "residual", "lambda", "seed", "oracle_spec"] {
        assert!(js.get(key).is_some(), "{key}");
    }
    let nd = fs.nizk_real_experiment(&h, x, w, &Strategy::NonDeleting, 3).unwrap();
    assert!(serde_json::to_value(&nd).unwrap()["residual"].is_null());
}

#[test]
fn phase_averaged_proof_equals_measured_proof() {
    let fs = FsCden::new(4).unwrap();
    let h = table(17);
    let mut rng = stream(17);
    let (x, w) = keygen(&fs.group, &mut rng);
    let (_, dk) = fs.prove(&h, x, w, &mut rng).unwrap();
    let with_s = |s: &F2Vec| {
        let key = FsDeletionKey { s: *s, ..dk.clone() };
        let pf = fs.prove_with_key(&h, x, &key).map_err(|_| StateError::ZeroNorm)?;
        fs.with_verdict(&pf, &h).map_err(|_| StateError::ZeroNorm)
    };
    let measured = |keep: &[&str]| {
        let elems = dk.a.enumerate().unwrap();
        let wgt = 1.0 / elems.len() as f64;
        let parts: Vec<(f64, DensityMatrix<f64>)> = elems
            .iter()
            .map(|e| {
                let pf = with_s(&dk.s).unwrap();
                let af = pf.field(REG_A).unwrap();
                let branch = pf.filter(|l| af.get(l) == e.value()).normalized().unwrap();
                (wgt, branch.density(keep).unwrap())
            })
            .collect();
        DensityMatrix::mixture(&parts).unwrap()
    };
    for keep in [&[REG_A, REG_S1, REG_VERDICT][..], &[REG_A, REG_S2, REG_VERDICT][..], &[REG_A, REG_S3][..]] {
        let twirled = ztwirl_mixture(4, keep, with_s).unwrap();
        let diff = twirled.matrix().max_abs_diff(measured(keep).matrix());
        assert!(diff < 1e-9, "{keep:?}: {diff}");
    }
}

mod props {
    use super::*;
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn honest_proofs_verify_and_delete(seed in any::<u64>(), half in 1usize..=4) {
            let fs = FsCden::new(2 * half).unwrap();
            let mut rng = stream(seed);
            let h = table(rng.gen());
            let (x, w) = keygen(&fs.group, &mut rng);
            let (pf, dk) = fs.prove(&h, x, w, &mut rng).unwrap();
            let (p, post) = fs.verify(&pf, &h).unwrap();
            prop_assert!((p - 1.0).abs() < 1e-9);
            let post = post.unwrap();
            prop_assert!(post.state.max_abs_diff(&pf.state).unwrap() < 1e-9);
            prop_assert!((fs.delver_probability(&h, &dk, &post).unwrap() - 1.0).abs() < 1e-9);
        }
    }
}
