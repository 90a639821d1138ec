//! Integration tests over the corpus deciders: generator-against-oracle
//! equality, batch-check equivalence, protocol import, and golden files.

use std::path::{Path, PathBuf};

use stablecrd::minu::{check_o_stable, gen_min_unstable, GenOptions};
use stablecrd::model::{Configuration, Crd, CrdClass};
use stablecrd::oracle::{self, DEFAULT_VISIT_CAP};
use stablecrd::textio;

fn corpus_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn load(name: &str) -> Crd {
    let text = std::fs::read_to_string(corpus_path(name)).unwrap();
    textio::parse_crd(&text).unwrap()
}

fn cfg(counts: &[u64]) -> Configuration {
    Configuration::new(counts.to_vec()).unwrap()
}

/// (file, comparison bound) for every corpus decider.
const CORPUS: &[(&str, u64)] = &[
    ("existence.crd", 6),
    ("parity.crd", 8),
    ("threshold2.crd", 8),
    ("novote-flip.crd", 6),
    ("threshold3.crd", 8),
    ("threshold5.crd", 8),
];

#[test]
fn corpus_parses_and_is_bimolecular() {
    for &(name, _) in CORPUS {
        let crd = load(name);
        assert_eq!(crd.classify(), CrdClass::Bimolecular, "{name}");
    }
}

#[test]
fn generator_matches_oracle_on_corpus() {
    for &(name, k) in CORPUS {
        let crd = load(name);
        let fast = gen_min_unstable(&crd, &GenOptions::default()).unwrap();
        assert!(!fast.truncated, "{name}");
        let slow = oracle::min_unstable(&crd, k, DEFAULT_VISIT_CAP).unwrap();
        let fast_list: Vec<Configuration> = fast
            .min_unstable
            .canonical_list()
            .into_iter()
            .filter(|c| c.size() <= k)
            .collect();
        assert_eq!(fast_list, slow.canonical_list(), "{name}");
    }
}

#[test]
fn batch_check_agrees_with_oracle_on_corpus() {
    for &(name, _) in CORPUS {
        let crd = load(name);
        let result = gen_min_unstable(&crd, &GenOptions::default()).unwrap();
        for (c, oracle_stable) in oracle::o_stability_table(&crd, 8, DEFAULT_VISIT_CAP).unwrap() {
            let fast = check_o_stable(&result, &c).unwrap();
            assert_eq!(
                fast,
                oracle_stable,
                "{name}: mismatch at {}",
                textio::serialize_config(&c, crd.species())
            );
        }
    }
}

#[test]
fn existence_antichain_is_exact() {
    let crd = load("existence.crd");
    let result = gen_min_unstable(&crd, &GenOptions::default()).unwrap();
    // AB and YB over species order (A, B, Y)
    assert_eq!(result.min_unstable.canonical_list(), vec![cfg(&[0, 1, 1]), cfg(&[1, 1, 0])]);
}

#[test]
fn novote_flip_antichain_is_its_mixed_pairs() {
    let crd = load("novote-flip.crd");
    let result = gen_min_unstable(&crd, &GenOptions::default()).unwrap();
    assert_eq!(result.min_unstable.canonical_list(), vec![cfg(&[1, 1])]);
}

#[test]
fn parity_antichain_frozen() {
    // Oracle-verified set: the four mixed-vote pairs plus the two-leader
    // reactant vector 2L1 (its merge flips the verdict to no).
    let crd = load("parity.crd");
    let result = gen_min_unstable(&crd, &GenOptions::default()).unwrap();
    assert_eq!(
        result.min_unstable.canonical_list(),
        vec![
            cfg(&[0, 0, 1, 1]), // F0 + F1
            cfg(&[0, 1, 1, 0]), // L1 + F0
            cfg(&[0, 2, 0, 0]), // 2L1
            cfg(&[1, 0, 0, 1]), // L0 + F1
            cfg(&[1, 1, 0, 0]), // L0 + L1
        ]
    );
    assert_eq!(result.stats.layers, vec![(2, 5)]);
}

#[test]
fn threshold3_has_a_size_three_layer() {
    // the only corpus decider whose minimal unstable set reaches past the
    // seed layer: 3A is unstable while every pair below it is stable
    let crd = load("threshold3.crd");
    let result = gen_min_unstable(&crd, &GenOptions::default()).unwrap();
    assert_eq!(result.stats.layers, vec![(2, 5), (3, 1)]);
    assert_eq!(
        result.min_unstable.canonical_list(),
        vec![
            cfg(&[0, 0, 1, 1]), // D + Y
            cfg(&[0, 1, 0, 1]), // T + Y
            cfg(&[0, 2, 0, 0]), // 2T
            cfg(&[1, 0, 0, 1]), // A + Y
            cfg(&[1, 1, 0, 0]), // A + T
            cfg(&[3, 0, 0, 0]), // 3A
        ]
    );
    // 2A and 2A + D really are stable: they strand below the threshold
    let result_checks = [
        (cfg(&[2, 0, 0, 0]), true),
        (cfg(&[2, 0, 1, 0]), true),
        (cfg(&[3, 0, 0, 0]), false),
        (cfg(&[2, 1, 0, 0]), false),
    ];
    for (c, expect) in result_checks {
        assert_eq!(check_o_stable(&result, &c).unwrap(), expect, "{:?}", c.counts());
    }
}

#[test]
fn threshold5_cascades_through_four_layers() {
    // deepest corpus case: counters strand below the threshold, so minimal
    // unstable configurations exist at every size from 2 up to 5A itself
    let crd = load("threshold5.crd");
    let result = gen_min_unstable(&crd, &GenOptions::default()).unwrap();
    assert_eq!(result.stats.layers, vec![(2, 11), (3, 3), (4, 1), (5, 1)]);
    let list = result.min_unstable.canonical_list();
    // species order (A, T2, T3, T4, D, Y)
    assert!(list.contains(&cfg(&[0, 3, 0, 0, 0, 0])), "3T2");
    assert!(list.contains(&cfg(&[1, 2, 0, 0, 0, 0])), "A + 2T2");
    assert!(list.contains(&cfg(&[2, 0, 1, 0, 0, 0])), "2A + T3");
    assert!(list.contains(&cfg(&[3, 1, 0, 0, 0, 0])), "3A + T2");
    assert!(list.contains(&cfg(&[5, 0, 0, 0, 0, 0])), "5A");
    // sub-threshold counter mixes strand and stay stable, even padded with D
    for stable in [
        cfg(&[4, 0, 0, 0, 0, 0]),
        cfg(&[2, 1, 0, 0, 0, 0]),
        cfg(&[0, 2, 0, 0, 3, 0]),
        cfg(&[1, 0, 1, 0, 1, 0]),
    ] {
        assert!(check_o_stable(&result, &stable).unwrap(), "{:?}", stable.counts());
    }
}

#[test]
fn protocol_import_matches_native_parity() {
    let crd = load("parity.crd");
    let text = std::fs::read_to_string(corpus_path("parity.pp")).unwrap();
    let table = textio::parse_protocol(&text).unwrap();
    let imported = textio::import_protocol(&table);

    assert_eq!(imported.classify(), CrdClass::Bimolecular);
    assert_eq!(imported.species(), crd.species());
    assert_eq!(imported.votes(), crd.votes());
    assert_eq!(imported.inputs(), crd.inputs());
    // the swap transition must land as a mute reaction
    assert!(imported.reactions().iter().any(|r| r.is_mute()));
    // mute reactions aside, the reaction sets coincide
    let non_mute = |crd: &Crd| {
        let mut rs: Vec<(Vec<u64>, Vec<u64>)> = crd
            .reactions()
            .iter()
            .filter(|r| !r.is_mute())
            .map(|r| (r.reactants().counts().to_vec(), r.products().counts().to_vec()))
            .collect();
        rs.sort();
        rs
    };
    assert_eq!(non_mute(&imported), non_mute(&crd));

    // and the minimal unstable sets agree
    let a = gen_min_unstable(&crd, &GenOptions::default()).unwrap();
    let b = gen_min_unstable(&imported, &GenOptions::default()).unwrap();
    assert_eq!(a.min_unstable.canonical_list(), b.min_unstable.canonical_list());
}

#[test]
fn golden_files_verified_by_oracle() {
    for &(name, k) in CORPUS {
        let crd = load(name);
        let golden_name = format!("{}.minu.json", name.trim_end_matches(".crd"));
        let text = std::fs::read_to_string(corpus_path(&format!("expected/{golden_name}"))).unwrap();
        let cache = textio::read_minu_json(&text).unwrap();
        assert_eq!(cache.crd_sha256, textio::crd_content_hash(&crd), "{name}");

        // golden content equals a fresh generator run
        let fresh = gen_min_unstable(&crd, &GenOptions::default()).unwrap();
        assert_eq!(cache.elements, fresh.min_unstable.canonical_list(), "{name}");

        // and the oracle re-verifies it from scratch
        let slow = oracle::min_unstable(&crd, k, DEFAULT_VISIT_CAP).unwrap();
        let golden_up_to_k: Vec<Configuration> =
            cache.elements.iter().filter(|c| c.size() <= k).cloned().collect();
        assert_eq!(golden_up_to_k, slow.canonical_list(), "{name}");
    }
}

#[test]
fn corpus_deciders_decide_their_predicates() {
    use stablecrd::oracle::{DecidesOutcome, StabilityKind};
    use stablecrd::Verdict;

    let existence = load("existence.crd");
    let DecidesOutcome::Table(entries) =
        oracle::decides(&existence, 5, StabilityKind::O, DEFAULT_VISIT_CAP).unwrap()
    else {
        panic!("existence.crd must validate");
    };
    for e in entries {
        let expect = if e.input.count(0) >= 1 { Verdict::Yes } else { Verdict::No };
        assert_eq!(e.verdict, expect);
    }

    let threshold2 = load("threshold2.crd");
    let DecidesOutcome::Table(entries) =
        oracle::decides(&threshold2, 6, StabilityKind::O, DEFAULT_VISIT_CAP).unwrap()
    else {
        panic!("threshold2.crd must validate");
    };
    for e in entries {
        let expect = if e.input.count(0) >= 2 { Verdict::Yes } else { Verdict::No };
        assert_eq!(e.verdict, expect);
    }

    let threshold3 = load("threshold3.crd");
    let DecidesOutcome::Table(entries) =
        oracle::decides(&threshold3, 7, StabilityKind::O, DEFAULT_VISIT_CAP).unwrap()
    else {
        panic!("threshold3.crd must validate");
    };
    for e in entries {
        let expect = if e.input.count(0) >= 3 { Verdict::Yes } else { Verdict::No };
        assert_eq!(e.verdict, expect);
    }

    // parity decides oddness of the input count, t-stably even
    let parity = load("parity.crd");
    let DecidesOutcome::Table(entries) =
        oracle::decides(&parity, 6, StabilityKind::T, DEFAULT_VISIT_CAP).unwrap()
    else {
        panic!("parity.crd must validate");
    };
    for e in entries {
        let expect = if e.input.count(1) % 2 == 1 { Verdict::Yes } else { Verdict::No };
        assert_eq!(e.verdict, expect);
    }
}

#[test]
fn corpus_budget_bound() {
    for &(name, _) in CORPUS {
        let crd = load(name);
        let result = gen_min_unstable(&crd, &GenOptions::default()).unwrap();
        let bound = (crd.dim() as u64 + 1)
            * crd.reactions().len() as u64
            * result.min_unstable.len() as u64;
        assert!(
            result.stats.predecessor_computations <= bound,
            "{name}: {} > {bound}",
            result.stats.predecessor_computations
        );
    }
}
