#![allow(dead_code)]

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use combimots::chem::{io, BuildingBlock, ChemSpace, Fingerprint, ReactionTemplate};
use combimots::oracle::TableOracle;
use combimots::pareto::ObjectiveSpec;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn toy_space() -> ChemSpace {
    let blocks = io::read_blocks(BufReader::new(
        File::open(fixture("toy/blocks.jsonl")).unwrap(),
    ))
    .unwrap();
    let templates = io::read_templates(File::open(fixture("toy/templates.json")).unwrap()).unwrap();
    ChemSpace::new(blocks, templates).unwrap()
}

pub fn toy_oracle() -> TableOracle {
    TableOracle::from_csv(
        ObjectiveSpec::identity(2),
        File::open(fixture("toy/products.csv")).unwrap(),
    )
    .unwrap()
}

/// Three blocks with one unary template each; product scores equal block
/// scores and form a concave front with a balanced middle point.
pub fn concave_space() -> (ChemSpace, TableOracle) {
    let points = [("L", [1.0, 0.0]), ("R", [0.0, 1.0]), ("M", [0.45, 0.45])];
    let mut blocks = Vec::new();
    let mut templates = Vec::new();
    let mut csv = String::from("id,a,b\n");
    for (i, (name, score)) in points.iter().enumerate() {
        let tag = format!("t{name}");
        blocks.push(
            BuildingBlock::new(*name, [tag.clone()], Fingerprint::from_indices(8, [i]))
                .with_scores(score.to_vec()),
        );
        templates.push(ReactionTemplate::new(
            format!("u{name}"),
            vec![vec![tag]],
            "product",
        ));
        let id = combimots::chem::product_id(&format!("u{name}"), &[*name]);
        csv.push_str(&format!("{id},{},{}\n", score[0], score[1]));
    }
    let oracle = TableOracle::from_csv(ObjectiveSpec::identity(2), csv.as_bytes()).unwrap();
    (ChemSpace::new(blocks, templates).unwrap(), oracle)
}

/// Quadratic reference sort: an element belongs to the current front when
/// nothing left in the pool dominates it.
pub fn brute_fronts(set: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let dominates = |x: &[f64], y: &[f64]| {
        x.iter().zip(y).all(|(a, b)| a >= b) && x.iter().zip(y).any(|(a, b)| a > b)
    };
    let mut pool: Vec<usize> = (0..set.len()).collect();
    let mut fronts = Vec::new();
    while !pool.is_empty() {
        let front: Vec<usize> = pool
            .iter()
            .copied()
            .filter(|&i| !pool.iter().any(|&j| dominates(&set[j], &set[i])))
            .collect();
        pool.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}
