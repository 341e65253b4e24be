mod common;

use std::collections::BTreeSet;

use combimots::chem::Fingerprint;
use combimots::metrics::{
    diversity, novelty, pareto_consistency, uniqueness, GenerationEntry, NOVELTY_THRESHOLD,
};
use combimots::pareto::ObjectiveVector;
use common::brute_fronts;
use num_rational::Ratio;
use proptest::prelude::*;

const WIDTH: usize = 20;

fn bits_to_fp(bits: &[bool]) -> Fingerprint {
    Fingerprint::from_indices(WIDTH, bits.iter().enumerate().filter(|b| *b.1).map(|b| b.0))
}

/// Tanimoto as an exact fraction over plain bool vectors.
fn exact_tanimoto(a: &[bool], b: &[bool]) -> Ratio<i64> {
    let inter = a.iter().zip(b).filter(|(x, y)| **x && **y).count() as i64;
    let union = a.iter().zip(b).filter(|(x, y)| **x || **y).count() as i64;
    if union == 0 {
        Ratio::from_integer(1)
    } else {
        Ratio::new(inter, union)
    }
}

fn to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Debug, Clone)]
struct Raw {
    id: usize,
    bits: Vec<bool>,
    objectives: Vec<f64>,
}

fn raw_set() -> impl Strategy<Value = (Vec<Raw>, Vec<Vec<bool>>)> {
    let entry = (
        0usize..30,
        prop::collection::vec(prop::bool::weighted(0.3), WIDTH),
        prop::collection::vec((0u8..=10).prop_map(|k| k as f64 / 10.0), 3),
    )
        .prop_map(|(id, bits, objectives)| Raw {
            id,
            bits,
            objectives,
        });
    (
        prop::collection::vec(entry, 2..=100),
        prop::collection::vec(
            prop::collection::vec(prop::bool::weighted(0.3), WIDTH),
            1..5,
        ),
    )
}

fn entries(raw: &[Raw]) -> Vec<GenerationEntry<f64>> {
    raw.iter()
        .map(|r| GenerationEntry {
            id: format!("p{}", r.id),
            fingerprint: bits_to_fp(&r.bits),
            objectives: ObjectiveVector::new(r.objectives.clone()).unwrap(),
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn metrics_match_brute_force((raw, reference) in raw_set()) {
        let set = entries(&raw);
        let n = raw.len() as i64;

        let distinct: BTreeSet<usize> = raw.iter().map(|r| r.id).collect();
        prop_assert_eq!(uniqueness(&set).unwrap(), to_f64(Ratio::new(distinct.len() as i64, n)));

        let threshold = Ratio::new(2, 5);
        let novel = raw
            .iter()
            .filter(|r| reference.iter().all(|a| exact_tanimoto(&r.bits, a) < threshold))
            .count() as i64;
        let ref_fps: Vec<Fingerprint> = reference.iter().map(|b| bits_to_fp(b)).collect();
        prop_assert_eq!(novelty(&set, &ref_fps, NOVELTY_THRESHOLD).unwrap(), to_f64(Ratio::new(novel, n)));

        let mut total = Ratio::from_integer(0);
        for i in 0..raw.len() {
            for j in i + 1..raw.len() {
                total += exact_tanimoto(&raw[i].bits, &raw[j].bits);
            }
        }
        let pairs = n * (n - 1) / 2;
        let expected = 1.0 - to_f64(total / pairs);
        prop_assert!((diversity(&set).unwrap() - expected).abs() < 1e-12);

        let vectors: Vec<Vec<f64>> = raw.iter().map(|r| r.objectives.clone()).collect();
        let fronts = brute_fronts(&vectors);
        let mean: f64 = fronts[0]
            .iter()
            .map(|&i| vectors[i].iter().map(|y| (1.0 - y) * (1.0 - y)).sum::<f64>().sqrt())
            .sum::<f64>()
            / fronts[0].len() as f64;
        let c = pareto_consistency(&set, &[1.0, 1.0, 1.0]).unwrap();
        prop_assert!((c.mean_r2_first_front - mean).abs() < 1e-12);
        prop_assert_eq!(c.first_front_size, fronts[0].len());
        prop_assert_eq!(c.front_sizes, fronts.iter().map(Vec::len).collect::<Vec<_>>());
    }

    #[test]
    fn metric_ranges((raw, reference) in raw_set()) {
        let set = entries(&raw);
        let refs: Vec<Fingerprint> = reference.iter().map(|b| bits_to_fp(b)).collect();
        for v in [uniqueness(&set).unwrap(), novelty(&set, &refs, 0.4).unwrap(), diversity(&set).unwrap()] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        // duplicating the whole set halves uniqueness and keeps novelty
        let doubled: Vec<_> = set.iter().chain(set.iter()).cloned().collect();
        prop_assert!((uniqueness(&doubled).unwrap() - uniqueness(&set).unwrap() / 2.0).abs() < 1e-12);
        prop_assert_eq!(novelty(&doubled, &refs, 0.4).unwrap(), novelty(&set, &refs, 0.4).unwrap());
    }
}
