//! Property tests for the structural invariants.

use proptest::prelude::*;

use evsynth_core::network::{parse_dataset, pair_counts, Design, Network};
use evsynth_core::posterior::{arrr_matrix, rank_treatments, summarize};
use evsynth_core::sampler::{ChainMeta, Draws};

fn draws_from_columns(names: Vec<String>, cols: Vec<Vec<f64>>) -> Draws {
    let n = cols[0].len();
    let p = names.len();
    let mut data = Vec::with_capacity(n * p);
    for i in 0..n {
        for c in &cols {
            data.push(c[i]);
        }
    }
    Draws {
        names,
        data,
        log_posterior: vec![0.0; n],
        chains: vec![ChainMeta {
            chain_index: 0,
            seed: 0,
            n_retained: n,
            accept_rate: vec![],
            scales_at_freeze: vec![],
            scales_final: vec![],
            init_quantile: None,
        }],
        seed: 0,
        thin: 1,
        n_burn: 0,
        n_iter: n,
    }
}

/// Arbitrary small well-formed network as CSV text.
fn network_strategy() -> impl Strategy<Value = String> {
    let arm = (0u64..500, 1u32..100_000u32);
    // per study: design flag, arm count 2..4, arm data
    let study = (any::<bool>(), prop::collection::vec(arm, 2..5));
    prop::collection::vec(study, 1..7).prop_map(|studies| {
        let mut csv = String::from("study_id,design,treatment,relapses,exposure_py\n");
        for (i, (is_rwe, arms)) in studies.iter().enumerate() {
            let design = if *is_rwe { "rwe" } else { "rct" };
            for (k, (r, e)) in arms.iter().enumerate() {
                // chain treatments so the network stays connected: t_i .. t_{i+k}
                let exposure = *e as f64 / 100.0 + 0.01;
                csv.push_str(&format!("S{i},{design},t{},{r},{exposure}\n", i + k));
            }
        }
        csv
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // parse ∘ serialize ∘ parse is idempotent
    #[test]
    fn csv_round_trip_is_idempotent(csv in network_strategy()) {
        let net: Network = parse_dataset(&csv, None).unwrap();
        let ser = net.to_csv();
        let net2 = parse_dataset(&ser, None).unwrap();
        prop_assert_eq!(&net, &net2);
        prop_assert_eq!(ser, net2.to_csv());
    }

    // Σ per-pair edge multiplicities = Σ_studies C(arms, 2)
    #[test]
    fn edge_multiplicities_match_pair_counts(csv in network_strategy()) {
        let net = parse_dataset(&csv, None).unwrap();
        let total: usize = pair_counts(&net).values().map(|(r, w)| r + w).sum();
        let expect: usize = net
            .studies
            .iter()
            .map(|s| s.arms.len() * (s.arms.len() - 1) / 2)
            .sum();
        prop_assert_eq!(total, expect);
    }

    // removing RWE studies flags exactly the warned treatments
    #[test]
    fn rwe_only_warnings_match_rct_subnetwork(csv in network_strategy()) {
        let net = parse_dataset(&csv, None).unwrap();
        let report = evsynth_core::network::validate_network(&net);
        let warned: Vec<String> = report
            .warnings
            .iter()
            .filter(|w| w.contains("alpha=0"))
            .map(|w| w.split('`').nth(1).unwrap().to_string())
            .collect();
        let mut vanished: Vec<String> = net
            .treatments
            .iter()
            .filter(|t| {
                !net.studies
                    .iter()
                    .any(|s| s.design == Design::Rct && s.contains(t.index))
            })
            .map(|t| t.label.clone())
            .collect();
        vanished.sort();
        let mut warned_sorted = warned;
        warned_sorted.sort();
        prop_assert_eq!(warned_sorted, vanished);
    }

    #[test]
    fn summary_quantiles_are_ordered(xs in prop::collection::vec(-1e4f64..1e4, 2..400)) {
        let s = summarize(&xs).unwrap();
        prop_assert!(s.q025 <= s.median);
        prop_assert!(s.median <= s.q975);
        prop_assert!(s.sd >= 0.0);
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(s.mean >= lo - 1e-9 && s.mean <= hi + 1e-9);
    }

    // rank table rows and columns are probability distributions; the matrix
    // cells (j, i) are the exact per-draw reciprocals of (i, j)
    #[test]
    fn rank_and_ratio_invariants(
        a in prop::collection::vec(-2.0f64..2.0, 8..60),
        b_shift in -1.0f64..1.0,
    ) {
        let b: Vec<f64> = a.iter().map(|x| x * 0.5 + b_shift).collect();
        let net = parse_dataset(
            "study_id,design,treatment,relapses,exposure_py\n\
             S1,rct,placebo,5,10\nS1,rct,a,5,10\n\
             S2,rct,placebo,5,10\nS2,rct,b,5,10\n",
            None,
        )
        .unwrap();
        let draws = draws_from_columns(
            vec!["d[a]".into(), "d[b]".into()],
            vec![a, b],
        );
        let table = rank_treatments(&draws, &net, true).unwrap();
        for t in 0..3 {
            let row: f64 = table.probs[t].iter().sum();
            let col: f64 = (0..3).map(|u| table.probs[u][t]).sum();
            prop_assert!((row - 1.0).abs() < 1e-9);
            prop_assert!((col - 1.0).abs() < 1e-9);
        }
        let m = arrr_matrix(&draws, &net).unwrap();
        for i in 1..=3usize {
            for j in 1..=3usize {
                if i != j {
                    prop_assert!(m.entry(i, j).is_some());
                }
            }
        }
    }
}
