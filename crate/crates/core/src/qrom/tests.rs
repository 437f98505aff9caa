use std::collections::BTreeSet;

use num_complex::Complex;
use rand::Rng;

use super::*;
use crate::f2lin::v;
use crate::rng::stream;
use crate::statevec::RegisterLayout;
use crate::{Matrix, State};

fn c(re: f64) -> Complex<f64> {
    Complex::new(re, 0.0)
}

const R2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[test]
fn table_is_deterministic_and_seed_dependent() {
    let h = OracleTable::new(1, 16, 16).unwrap();
    let g = OracleTable::new(2, 16, 16).unwrap();
    assert_eq!(h.eval(1234), h.eval(1234));
    let mut rng = stream(0);
    let trials = 10_000;
    let mut differ = 0;
    for _ in 0..trials {
        let x = rng.gen_range(0..1u64 << 16);
        if h.eval(x) != g.eval(x) {
            differ += 1;
        }
    }
    let p = 1.0 - 2f64.powi(-16);
    let sigma = (p * (1.0 - p) / trials as f64).sqrt().max(1.0 / trials as f64);
    assert!((differ as f64 / trials as f64 - p).abs() <= 3.0 * sigma + 1e-4);
    assert!(OracleTable::new(1, 65, 8).is_err());
}

#[test]
fn output_bits_are_balanced() {
    let h = OracleTable::new(99, 20, 8).unwrap();
    let n = 10_000u64;
    for b in 0..8 {
        let ones = (0..n).filter(|&x| (h.eval(x) >> b) & 1 == 1).count();
        assert!((ones as f64 / n as f64 - 0.5).abs() <= 0.02, "bit {b}");
    }
}

#[test]
fn empty_point_map_is_transparent() {
    let h = OracleTable::new(5, 12, 8).unwrap();
    let view = h.view().point_map([]).unwrap();
    let mut rng = stream(3);
    for _ in 0..100 {
        let x = rng.gen_range(0..1u64 << 12);
        assert_eq!(view.eval(x), h.eval(x));
    }
}

#[test]
fn point_map_overrides_only_its_inputs() {
    let h = OracleTable::new(5, 8, 8).unwrap();
    let view = h.view().point_map([(3, 0xAA), (200, 0x01)]).unwrap();
    for x in 0..256u64 {
        let want = match x {
            3 => 0xAA,
            200 => 0x01,
            _ => h.eval(x),
        };
        assert_eq!(view.eval(x), want);
    }
    assert_eq!(view.reprogrammed_inputs(), vec![3, 200]);
    assert!(h.view().point_map([(256, 0)]).is_err());
    assert!(h.view().point_map([(1, 256)]).is_err());
}

#[test]
fn swap_exchanges_two_inputs_exhaustively() {
    let h = OracleTable::new(8, 6, 4).unwrap();
    let view = h.view().swap(5, 40).unwrap();
    for x in 0..64u64 {
        let want = match x {
            5 => h.eval(40),
            40 => h.eval(5),
            _ => h.eval(x),
        };
        assert_eq!(view.eval(x), want);
    }
    let twice = view.swap(5, 40).unwrap();
    for x in 0..64u64 {
        assert_eq!(twice.eval(x), h.eval(x));
    }
}

#[test]
fn prefix_restricts_input() {
    let h = OracleTable::new(8, 8, 8).unwrap();
    let view = h.view().prefix(v("101")).unwrap();
    assert_eq!(view.in_bits(), 5);
    for w in 0..32u64 {
        assert_eq!(view.eval(w), h.eval((0b101 << 5) | w));
    }
    assert!(h.view().prefix(v("10101010")).is_err());
}

#[test]
fn overlays_below_a_prefix_are_seen_through_it() {
    let h = OracleTable::new(8, 8, 8).unwrap();
    let view = h.view().point_map([(0b1010_0001, 7), (0b0110_0001, 9)]).unwrap().prefix(v("1010")).unwrap();
    assert_eq!(view.eval(0b0001), 7);
    assert_eq!(view.eval(0b0010), h.eval(0b1010_0010));
    assert_eq!(view.reprogrammed_inputs(), vec![0b0001]);
}

#[test]
fn field_packing_is_left_aligned() {
    assert_eq!(pack_fields(8, &[(0b11, 2), (0b0, 1), (0b1, 1)]).unwrap(), 0b1101_0000);
    assert!(pack_fields(4, &[(0, 5)]).is_err());
    assert!(pack_fields(8, &[(4, 2)]).is_err());
    let h = OracleTable::new(1, 8, 8).unwrap();
    assert_eq!(h.eval_fields(&[(0b1, 1)]).unwrap(), h.eval(0b1000_0000));
}

#[test]
fn spec_round_trip() {
    let h = OracleTable::new(77, 10, 6).unwrap();
    let view = h.view().point_map([(3, 5)]).unwrap().swap(1, 2).unwrap().prefix(v("01")).unwrap();
    let spec = view.spec();
    let js = serde_json::to_string(&spec).unwrap();
    let back = OracleView::from_spec(&serde_json::from_str(&js).unwrap()).unwrap();
    assert_eq!(back, view);
    for x in 0..256 {
        assert_eq!(back.eval(x), view.eval(x));
    }
    assert!(js.contains("\"kind\":\"point_map\""));
}

#[test]
fn coherent_query_examples() {
    let h = OracleTable::new(4, 3, 2).unwrap();
    let lay = RegisterLayout::new(&[("X", 3), ("Y", 2)]).unwrap();
    let st = State::classical(lay.clone(), &[5, 0]).unwrap();
    let q = coherent_query(&st, "X", "Y", &h).unwrap();
    assert_eq!(q.register_values("Y").unwrap(), vec![h.eval(5) as u128]);
    assert_eq!(coherent_query(&q, "X", "Y", &h).unwrap(), st);

    let sup = State::from_terms(lay.clone(), [(lay.pack(&[1, 0]).unwrap(), c(R2)), (lay.pack(&[6, 0]).unwrap(), c(R2))])
        .unwrap();
    let out = coherent_query(&sup, "X", "Y", &h).unwrap();
    let want = State::from_terms(
        lay.clone(),
        [
            (lay.pack(&[1, h.eval(1) as u128]).unwrap(), c(R2)),
            (lay.pack(&[6, h.eval(6) as u128]).unwrap(), c(R2)),
        ],
    )
    .unwrap();
    assert_eq!(out, want);
    let wrong = OracleTable::new(4, 4, 2).unwrap();
    assert!(coherent_query(&st, "X", "Y", &wrong).is_err());
}

/// Algorithm on (Q: 2 bits, Y: 1 bit) whose query register is prepared by a
/// permutation from `|0⟩` and which makes `queries` identical queries.
fn preparing_algorithm(prep: Vec<(usize, Complex<f64>)>, queries: usize) -> OracleAlgorithm {
    let lay = RegisterLayout::new(&[("Q", 2), ("Y", 1)]).unwrap();
    let init = State::from_terms(lay, prep.into_iter().map(|(x, a)| ((x as u128) << 1, a))).unwrap();
    let steps = vec![Matrix::identity(8); queries + 1];
    OracleAlgorithm::new(init, steps, "Q", Some("Y")).unwrap()
}

#[test]
fn query_weight_examples() {
    let h = OracleTable::new(1, 2, 1).unwrap();
    let s: BTreeSet<u64> = [3].into();

    let never = preparing_algorithm(vec![(0, c(1.0))], 2);
    assert_eq!(query_weight(&never.trace(QueryOracle::Classical(&h)).unwrap(), &s), 0.0);

    let direct = preparing_algorithm(vec![(3, c(1.0))], 1);
    assert!((query_weight(&direct.trace(QueryOracle::Classical(&h)).unwrap(), &s) - 1.0).abs() < 1e-12);

    let half = preparing_algorithm(vec![(3, c(R2)), (1, c(R2))], 1);
    let tr = half.trace(QueryOracle::Classical(&h)).unwrap();
    assert!((query_weight(&tr, &s) - 0.5).abs() < 1e-12);
    let schmidt = tr.records[0].schmidt.as_ref().unwrap();
    let total: f64 = schmidt.iter().map(|(p, _)| p).sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn extraction_examples() {
    let h = OracleTable::new(1, 2, 1).unwrap();
    let mut rng = stream(4);
    let direct = preparing_algorithm(vec![(3, c(1.0))], 1);
    for _ in 0..20 {
        assert_eq!(extract_by_random_query(&direct, &h, &mut rng).unwrap(), Some((3, h.eval(3))));
    }
    let none = preparing_algorithm(vec![(3, c(1.0))], 0);
    assert_eq!(extract_by_random_query(&none, &h, &mut rng).unwrap(), None);

    // First query on x* = 3, second on 1: a Q-register permutation 3 ↔ 1 after query one.
    let lay = RegisterLayout::new(&[("Q", 2), ("Y", 1)]).unwrap();
    let init = State::classical(lay, &[3, 0]).unwrap();
    let perm = Matrix::from_fn(8, |i, j| {
        let q = j >> 1;
        let q2 = match q {
            3 => 1,
            1 => 3,
            _ => q,
        };
        if i == (q2 << 1) | (j & 1) {
            c(1.0)
        } else {
            c(0.0)
        }
    });
    let two = OracleAlgorithm::new(init, vec![Matrix::identity(8), perm, Matrix::identity(8)], "Q", Some("Y")).unwrap();
    let trials = 10_000;
    let hits = (0..trials)
        .filter(|_| extract_by_random_query(&two, &h, &mut rng).unwrap().map(|(x, _)| x) == Some(3))
        .count();
    let rate = hits as f64 / trials as f64;
    assert!((rate - 0.5).abs() <= 3.0 * (0.25 / trials as f64).sqrt());
    assert!(rate >= 0.25);
}

#[test]
fn prf_split_examples() {
    let h = OracleTable::new(10, 24, 12).unwrap();
    let k = v("10110011");
    assert!(prf_split_check(&h, &k, 0).unwrap().is_none());
    let report = prf_split_check(&h, &k, 10_000).unwrap().unwrap();
    for p in &report.keyed_bit_balance {
        assert!((p - 0.5).abs() <= 0.02);
    }
    assert!(report.within_3sigma, "{report:?}");
    assert_eq!(h.eval((k.value() as u64) << 16 | 5), h.eval((k.value() as u64) << 16 | 5));
    assert!(prf_split_check(&h, &crate::f2lin::F2Vec::zero(24), 10).is_err());
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn overlay_locality_and_swap_involution(seed in any::<u64>(), a in 0u64..256, b in 0u64..256, pts in proptest::collection::btree_map(0u64..256, 0u64..16, 0..6)) {
            let h = OracleTable::new(seed, 8, 4).unwrap();
            let mapped = h.view().point_map(pts.clone()).unwrap();
            let swapped = h.view().swap(a, b).unwrap();
            let back = swapped.swap(a, b).unwrap();
            for x in 0..256u64 {
                if !pts.contains_key(&x) {
                    prop_assert_eq!(mapped.eval(x), h.eval(x));
                }
                if x != a && x != b {
                    prop_assert_eq!(swapped.eval(x), h.eval(x));
                }
                prop_assert_eq!(back.eval(x), h.eval(x));
            }
        }
    }
}
