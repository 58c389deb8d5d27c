mod common;

use common::{brute_table, noisy_trial, random_y, rng, symbols};
use orthocode::codebook::{
    admissible_targets, canonical_tails, count_suffixes, count_table_general, encode, make_spec,
    verify_gram, CodeSpec, Codebook, TreeMode,
};
use orthocode::decoder::{
    decode, decode_exhaustive, decode_priority, decode_priority_fast, DecoderWeights, Heuristic,
    SearchOptions,
};
use orthocode::harness::{run_experiment, DecoderKind, ExperimentConfig};
use orthocode::layout::Layout;

fn opts(heuristic: Heuristic) -> SearchOptions {
    SearchOptions {
        heuristic,
        ..SearchOptions::default()
    }
}

fn sign(e: i64) -> i8 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

#[test]
fn table_matches_enumeration_p3_p4() {
    for (p, kmax) in [(3usize, 7usize), (4, 6)] {
        for tail in canonical_tails(p) {
            for k in 1..=kmax {
                let range = -(k as i64)..=k as i64;
                let grid: Vec<Vec<i64>> = (1..p).fold(vec![vec![]], |acc, _| {
                    acc.iter()
                        .flat_map(|pre| {
                            range.clone().map(move |v| {
                                let mut q = pre.clone();
                                q.push(v);
                                q
                            })
                        })
                        .collect()
                });
                for q in grid {
                    assert_eq!(
                        count_table_general(p, k, &q, &tail).unwrap(),
                        brute_table(k, &q, &tail),
                        "p={p} k={k} q={q:?} tail={tail:?}"
                    );
                }
            }
        }
    }
}

fn check_counts_against_enumeration(layout: &Layout, max_prefix: usize) {
    let n = layout.n();
    let all: Vec<(Vec<i8>, _)> = (0..1u64 << n)
        .map(|m| {
            let b = symbols(m, n);
            let g = verify_gram(&b, layout.p(), layout.q()).unwrap();
            (b, g)
        })
        .collect();
    for target in admissible_targets(layout).unwrap() {
        for len in 1..=max_prefix {
            for pm in 0..1u64 << len {
                let prefix = symbols(pm, len);
                let expected = all
                    .iter()
                    .filter(|(b, g)| b[..len] == prefix[..] && g[..] == target.matrices()[..])
                    .count() as u64;
                assert_eq!(
                    count_suffixes(layout, &target, &prefix).unwrap(),
                    expected,
                    "{layout:?} {:?} prefix {prefix:?}",
                    target.offdiag()
                );
            }
        }
    }
}

#[test]
fn general_span_counts_match_enumeration() {
    check_counts_against_enumeration(&Layout::new(9, 3, None).unwrap(), 3);
    check_counts_against_enumeration(&Layout::new(8, 4, None).unwrap(), 2);
}

#[test]
fn sub_block_counts_match_enumeration() {
    check_counts_against_enumeration(&Layout::new(11, 2, Some(4)).unwrap(), 3);
    check_counts_against_enumeration(&Layout::new(10, 2, Some(3)).unwrap(), 2);
}

/// With a two-tap channel the lag-1 sum of a block telescopes, so its
/// off-diagonal fixes the sign of the block's first bit relative to the
/// previous one.
#[test]
fn sub_block_first_bit_parity() {
    for (n, k, q) in [
        (12usize, 6usize, 7usize),
        (12, 5, 5),
        (13, 4, 5),
        (16, 6, 4),
    ] {
        let spec = make_spec(
            n,
            k,
            2,
            Some(q),
            TreeMode::auto(&Layout::new(n, 2, Some(q)).unwrap()).unwrap(),
        )
        .unwrap();
        let blocks = spec.layout().num_blocks();
        for w in Codebook::enumerate(&spec).unwrap().words() {
            let g = verify_gram(&w.bits, 2, Some(q)).unwrap();
            let c: Vec<i64> = g.iter().map(|m| m.get(0, 1)).collect();
            let b = |i1: usize| w.bits[i1 - 1];
            assert_eq!(b(q), b(1) * sign((q as i64 - 1 - c[0]) / 2), "{w}");
            for kk in 2..blocks {
                assert_eq!(
                    b(kk * q),
                    b((kk - 1) * q) * sign((q as i64 - c[kk - 1]) / 2),
                    "{w} block {kk}"
                );
            }
        }
    }
}

#[test]
fn alpha_bounds_every_partial_increment() {
    let mut r = rng(11);
    for (q, len) in [(None, 11usize), (Some(4), 11)] {
        let layout = Layout::new(10, 2, q).unwrap();
        let spec = make_spec(10, 4, 2, q, TreeMode::auto(&layout).unwrap()).unwrap();
        for _ in 0..20 {
            let wt = DecoderWeights::new(&random_y(len, &mut r), &spec).unwrap();
            for t in 0..wt.trees() {
                for m in 0..=6 {
                    for mask in 0..1u64 << (m + 1) {
                        let b = symbols(mask, m + 1);
                        let s: f64 = (0..m).map(|n| wt.w(t, m, n) * b[n] as f64).sum::<f64>()
                            * b[m] as f64
                            + 0.5 * wt.w(t, m, m);
                        assert!(s.abs() <= wt.alpha(t, m) + 1e-9, "tree {t} bit {m}");
                    }
                }
            }
        }
    }
}

#[test]
fn whole_codeword_block_matches_quasi_static() {
    let mut r = rng(5);
    let qs = make_spec(10, 4, 2, None, TreeMode::Double).unwrap();
    let one_block = make_spec(10, 4, 2, Some(11), TreeMode::Double).unwrap();
    assert_eq!(one_block.layout().num_blocks(), 1);
    for _ in 0..100 {
        let t = noisy_trial(&qs, |i| encode(&qs, i).unwrap().bits, 6.0, None, &mut r);
        for h in [Heuristic::H1, Heuristic::H2] {
            let a = decode_priority(&t.y, &qs, &opts(h)).unwrap();
            let b = decode_priority_fast(&t.y, &one_block, &opts(h)).unwrap();
            assert_eq!(a.codeword, b.codeword);
            assert_eq!(a.expansions, b.expansions);
        }
    }
}

fn agree_with_exhaustive(spec: &CodeSpec, q_chan: Option<usize>, seed: u64) {
    let book = Codebook::enumerate(spec).unwrap();
    let mut r = rng(seed);
    for snr in [3.0, 8.0] {
        for _ in 0..150 {
            let t = noisy_trial(
                spec,
                |i| book.get(i as usize).bits.clone(),
                snr,
                q_chan,
                &mut r,
            );
            let ml = decode_exhaustive(&t.y, &book, spec).unwrap();
            for h in [Heuristic::H1, Heuristic::H2] {
                let d = decode(&t.y, spec, &opts(h)).unwrap();
                let tol = 1e-9 * ml.metric.abs().max(1.0);
                let m =
                    orthocode::decoder::metric_projection(&t.y, &d.codeword.bits, spec.layout())
                        .unwrap();
                assert!(m <= ml.metric + tol, "{h:?} metric {m} vs {}", ml.metric);
            }
        }
    }
}

#[test]
fn search_is_ml_for_10_5() {
    agree_with_exhaustive(
        &make_spec(10, 5, 2, None, TreeMode::Double).unwrap(),
        None,
        21,
    );
}

#[test]
fn search_is_ml_for_sub_block_codes() {
    let spec = make_spec(
        12,
        5,
        2,
        Some(5),
        TreeMode::auto(&Layout::new(12, 2, Some(5)).unwrap()).unwrap(),
    )
    .unwrap();
    agree_with_exhaustive(&spec, None, 22);
    let spec = make_spec(
        13,
        4,
        2,
        Some(7),
        TreeMode::auto(&Layout::new(13, 2, Some(7)).unwrap()).unwrap(),
    )
    .unwrap();
    agree_with_exhaustive(&spec, None, 23);
}

fn config(heuristic: Heuristic, snr: Vec<f64>) -> ExperimentConfig {
    ExperimentConfig {
        snr_db: snr,
        trials: 1500,
        seed: 77,
        decoder: DecoderKind::Priority(heuristic),
        ..ExperimentConfig::new(10, 5)
    }
}

#[test]
fn heuristics_share_errors_and_h2_expands_less() {
    let snr = vec![4.0, 8.0, 12.0];
    let h1 = run_experiment(&config(Heuristic::H1, snr.clone())).unwrap();
    let h2 = run_experiment(&config(Heuristic::H2, snr)).unwrap();
    for (a, b) in h1.iter().zip(&h2) {
        assert_eq!(a.word_errors, b.word_errors);
        assert_eq!(a.bit_errors, b.bit_errors);
        assert!(b.total_expansions <= a.total_expansions);
    }
}

#[test]
fn wer_falls_with_snr() {
    let rows = run_experiment(&config(Heuristic::H2, vec![0.0, 5.0, 10.0, 15.0])).unwrap();
    for pair in rows.windows(2) {
        assert!(pair[1].wer() < pair[0].wer(), "{pair:?}");
    }
}
