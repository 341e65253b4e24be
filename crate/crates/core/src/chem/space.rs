use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Fingerprint, SpaceError};
use crate::pareto::{ObjectiveSpec, ObjectiveVector, ParetoError};

/// Similarity threshold used when mapping fragments onto blocks.
pub const DEFAULT_THRESHOLD: f64 = 0.4;

/// Product-count limit for [`count_possible_products`].
pub const DEFAULT_PRODUCT_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BuildingBlock {
    pub id: String,
    pub tags: BTreeSet<String>,
    pub fingerprint: Fingerprint,
    /// Raw objective values shipped with the block, before transforms.
    pub scores: Option<Vec<f64>>,
}

impl BuildingBlock {
    pub fn new<I, S>(id: impl Into<String>, tags: I, fingerprint: Fingerprint) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            id: id.into(),
            tags: tags.into_iter().map(Into::into).collect(),
            fingerprint,
            scores: None,
        }
    }

    pub fn with_scores(mut self, scores: Vec<f64>) -> Self {
        self.scores = Some(scores);
        self
    }

    /// Precomputed objective vector in transformed space, if the block has scores.
    pub fn precomputed(
        &self,
        spec: &ObjectiveSpec,
    ) -> Option<Result<ObjectiveVector<f64>, ParetoError>> {
        self.scores.as_ref().map(|raw| spec.apply(raw))
    }

    fn fits(&self, slot: &BTreeSet<String>) -> bool {
        self.tags.iter().any(|t| slot.contains(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombineRule {
    /// Bitwise OR of all reactant fingerprints.
    #[default]
    Or,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReactionTemplate {
    pub id: String,
    pub slots: Vec<BTreeSet<String>>,
    pub product_tag: String,
    #[serde(default)]
    pub combine: CombineRule,
}

impl ReactionTemplate {
    pub fn new<S: Into<String>>(
        id: impl Into<String>,
        slots: Vec<Vec<S>>,
        product_tag: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            slots: slots
                .into_iter()
                .map(|s| s.into_iter().map(Into::into).collect())
                .collect(),
            product_tag: product_tag.into(),
            combine: CombineRule::Or,
        }
    }

    pub fn arity(&self) -> usize {
        self.slots.len()
    }

    pub fn validate(&self) -> Result<(), SpaceError> {
        let invalid = |reason: &str| SpaceError::Invalid {
            what: "template",
            id: self.id.clone(),
            reason: reason.into(),
        };
        if !(1..=3).contains(&self.arity()) {
            return Err(invalid("arity must be 1 to 3"));
        }
        if self.slots.iter().any(BTreeSet::is_empty) {
            return Err(invalid("slot tag sets must be non-empty"));
        }
        Ok(())
    }
}

/// A reaction product: the terminal entity of a search path.
#[derive(Debug, Clone, PartialEq)]
pub struct Product {
    pub id: String,
    pub template_id: String,
    /// Reactant ids in sorted order.
    pub reactant_ids: Vec<String>,
    pub product_tag: String,
    pub fingerprint: Fingerprint,
}

impl Product {
    /// Views the product as a reagent for a further template step.
    pub fn as_block(&self) -> BuildingBlock {
        BuildingBlock::new(
            self.id.clone(),
            [self.product_tag.clone()],
            self.fingerprint.clone(),
        )
    }
}

/// Finds an injective block-to-slot assignment.
///
/// Returns the slot index for each block (in the order given), or `None`
/// when the tuple is larger than the template or no assignment exists.
/// Blocks are placed in id order, each into the lowest free slot that
/// still admits a full assignment, which makes the result canonical.
pub fn compatible(template: &ReactionTemplate, blocks: &[&BuildingBlock]) -> Option<Vec<usize>> {
    if blocks.len() > template.arity() {
        return None;
    }
    let mut order: Vec<usize> = (0..blocks.len()).collect();
    order.sort_by(|&a, &b| blocks[a].id.cmp(&blocks[b].id).then(a.cmp(&b)));

    fn place(
        depth: usize,
        order: &[usize],
        blocks: &[&BuildingBlock],
        template: &ReactionTemplate,
        used: &mut [bool],
        out: &mut [usize],
    ) -> bool {
        let Some(&pos) = order.get(depth) else {
            return true;
        };
        for (slot, tags) in template.slots.iter().enumerate() {
            if used[slot] || !blocks[pos].fits(tags) {
                continue;
            }
            used[slot] = true;
            out[pos] = slot;
            if place(depth + 1, order, blocks, template, used, out) {
                return true;
            }
            used[slot] = false;
        }
        false
    }

    let mut used = vec![false; template.arity()];
    let mut out = vec![0; blocks.len()];
    place(0, &order, blocks, template, &mut used, &mut out).then_some(out)
}

/// True when the tuple could still be completed into a product of `template`.
pub fn partially_compatible(template: &ReactionTemplate, blocks: &[&BuildingBlock]) -> bool {
    compatible(template, blocks).is_some()
}

/// Stable digest id of a template applied to a reactant multiset.
pub fn product_id<S: AsRef<str>>(template_id: &str, reactant_ids: &[S]) -> String {
    let mut ids: Vec<&str> = reactant_ids.iter().map(AsRef::as_ref).collect();
    ids.sort_unstable();
    let mut hasher = Sha256::new();
    hasher.update(template_id.as_bytes());
    for id in ids {
        hasher.update([0x1f]);
        hasher.update(id.as_bytes());
    }
    let digest = hasher.finalize();
    format!("P{}", hex::encode(&digest[..8]))
}

/// Applies a template to a full tuple of reactants.
pub fn derive_product(
    template: &ReactionTemplate,
    blocks: &[&BuildingBlock],
) -> Result<Product, SpaceError> {
    if blocks.len() != template.arity() || compatible(template, blocks).is_none() {
        return Err(SpaceError::Incompatible {
            template: template.id.clone(),
        });
    }
    let mut fingerprint = blocks[0].fingerprint.clone();
    for b in &blocks[1..] {
        fingerprint = match template.combine {
            CombineRule::Or => fingerprint.union(&b.fingerprint)?,
        };
    }
    let mut reactant_ids: Vec<String> = blocks.iter().map(|b| b.id.clone()).collect();
    reactant_ids.sort_unstable();
    Ok(Product {
        id: product_id(&template.id, &reactant_ids),
        template_id: template.id.clone(),
        reactant_ids,
        product_tag: template.product_tag.clone(),
        fingerprint,
    })
}

/// Keeps blocks whose best Tanimoto similarity to any fragment reaches `threshold`.
pub fn reduce_space(
    fragments: &[Fingerprint],
    blocks: &[BuildingBlock],
    threshold: f64,
) -> Result<Vec<BuildingBlock>, SpaceError> {
    if fragments.is_empty() {
        return Err(SpaceError::EmptyInput("fragment list"));
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(SpaceError::Threshold(threshold));
    }
    let mut kept = Vec::new();
    for block in blocks {
        let mut best: f64 = 0.0;
        for frag in fragments {
            best = best.max(frag.tanimoto(&block.fingerprint)?);
        }
        if best >= threshold {
            kept.push(block.clone());
        }
    }
    Ok(kept)
}

/// Counts distinct products reachable within `max_steps` template applications.
///
/// Step one applies templates to building blocks; step two additionally
/// lets step-one products (tagged with their template's product tag) act as
/// reactants. Fails with [`SpaceError::Capacity`] once more than `cap`
/// products are found, reporting the count reached so far.
pub fn count_possible_products(
    blocks: &[BuildingBlock],
    templates: &[ReactionTemplate],
    max_steps: usize,
    cap: u64,
) -> Result<u64, SpaceError> {
    if !(1..=2).contains(&max_steps) {
        return Err(SpaceError::Steps(max_steps));
    }
    let mut seen: HashSet<String> = HashSet::new();
    let pool: Vec<&BuildingBlock> = blocks.iter().collect();
    let mut step_one = Vec::new();
    for template in templates {
        for_each_multiset(pool.len(), template.arity(), &mut |idx| {
            let tuple: Vec<&BuildingBlock> = idx.iter().map(|&i| pool[i]).collect();
            if tuple.len() == template.arity() && compatible(template, &tuple).is_some() {
                let product = derive_product(template, &tuple)?;
                if seen.insert(product.id.clone()) {
                    check_cap(seen.len(), cap)?;
                    step_one.push(product);
                }
            }
            Ok(())
        })?;
    }
    if max_steps == 1 {
        return Ok(seen.len() as u64);
    }

    let product_blocks: Vec<BuildingBlock> = step_one.iter().map(Product::as_block).collect();
    let first_product = pool.len();
    let pool: Vec<&BuildingBlock> = pool.into_iter().chain(product_blocks.iter()).collect();
    for template in templates {
        for_each_multiset(pool.len(), template.arity(), &mut |idx| {
            // all-block multisets were counted in step one
            if idx.iter().all(|&i| i < first_product) {
                return Ok(());
            }
            let tuple: Vec<&BuildingBlock> = idx.iter().map(|&i| pool[i]).collect();
            if compatible(template, &tuple).is_some() {
                let product = derive_product(template, &tuple)?;
                if seen.insert(product.id) {
                    check_cap(seen.len(), cap)?;
                }
            }
            Ok(())
        })?;
    }
    Ok(seen.len() as u64)
}

fn check_cap(found: usize, cap: u64) -> Result<(), SpaceError> {
    if found as u64 > cap {
        return Err(SpaceError::Capacity {
            cap,
            lower_bound: found as u64,
        });
    }
    Ok(())
}

/// Visits every non-decreasing index tuple of length `k` over `0..n`.
fn for_each_multiset(
    n: usize,
    k: usize,
    f: &mut dyn FnMut(&[usize]) -> Result<(), SpaceError>,
) -> Result<(), SpaceError> {
    fn rec(
        start: usize,
        n: usize,
        k: usize,
        buf: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]) -> Result<(), SpaceError>,
    ) -> Result<(), SpaceError> {
        if buf.len() == k {
            return f(buf);
        }
        for i in start..n {
            buf.push(i);
            rec(i, n, k, buf, f)?;
            buf.pop();
        }
        Ok(())
    }
    if k == 0 {
        return Ok(());
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f)
}

/// A validated, read-only space of blocks and templates.
#[derive(Debug, Clone)]
pub struct ChemSpace {
    blocks: Vec<BuildingBlock>,
    templates: Vec<ReactionTemplate>,
    index: HashMap<String, usize>,
}

impl ChemSpace {
    pub fn new(
        blocks: Vec<BuildingBlock>,
        templates: Vec<ReactionTemplate>,
    ) -> Result<Self, SpaceError> {
        let mut index = HashMap::with_capacity(blocks.len());
        let width = blocks.first().map(|b| b.fingerprint.width());
        for (i, b) in blocks.iter().enumerate() {
            if index.insert(b.id.clone(), i).is_some() {
                return Err(SpaceError::DuplicateId(b.id.clone()));
            }
            if b.tags.is_empty() {
                return Err(SpaceError::Invalid {
                    what: "block",
                    id: b.id.clone(),
                    reason: "tag set is empty".into(),
                });
            }
            if let Some(w) = width {
                if b.fingerprint.width() != w {
                    return Err(SpaceError::WidthMismatch {
                        expected: w,
                        got: b.fingerprint.width(),
                    });
                }
            }
        }
        let mut template_ids = HashSet::new();
        for t in &templates {
            t.validate()?;
            if !template_ids.insert(t.id.clone()) {
                return Err(SpaceError::DuplicateId(t.id.clone()));
            }
        }
        Ok(Self {
            blocks,
            templates,
            index,
        })
    }

    pub fn blocks(&self) -> &[BuildingBlock] {
        &self.blocks
    }

    pub fn templates(&self) -> &[ReactionTemplate] {
        &self.templates
    }

    pub fn block(&self, i: usize) -> &BuildingBlock {
        &self.blocks[i]
    }

    pub fn block_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(id: &str, tags: &[&str]) -> BuildingBlock {
        BuildingBlock::new(id, tags.iter().copied(), Fingerprint::zeros(8))
    }

    #[test]
    fn compatibility_examples() {
        let t = ReactionTemplate::new("t", vec![vec!["a"], vec!["b"]], "p");
        let (a, b) = (block("A", &["a"]), block("B", &["b"]));
        assert_eq!(compatible(&t, &[&a, &b]), Some(vec![0, 1]));
        assert_eq!(compatible(&t, &[&b, &a]), Some(vec![1, 0]));
        let a2 = block("A2", &["a"]);
        assert_eq!(compatible(&t, &[&a, &a2]), None);

        let t2 = ReactionTemplate::new("t2", vec![vec!["a", "b"], vec!["b"]], "p");
        let (first, second) = (block("first", &["b"]), block("second", &["b"]));
        assert_eq!(compatible(&t2, &[&first, &second]), Some(vec![0, 1]));

        // oversize tuple
        assert_eq!(compatible(&t, &[&a, &b, &a2]), None);
        // partial
        assert!(partially_compatible(&t, &[&b]));
        assert!(!partially_compatible(&t, &[&block("C", &["c"])]));
    }

    #[test]
    fn canonical_assignment_needs_backtracking() {
        // block "x" fits both slots, "y" only the first; x must move to slot 1
        let t = ReactionTemplate::new("t", vec![vec!["a", "b"], vec!["b"]], "p");
        let (x, y) = (block("x", &["b"]), block("y", &["a"]));
        assert_eq!(compatible(&t, &[&x, &y]), Some(vec![1, 0]));
    }

    #[test]
    fn product_derivation() {
        let t = ReactionTemplate::new("t", vec![vec!["a"], vec!["b"]], "amide");
        let a = BuildingBlock::new("A", ["a"], Fingerprint::from_bit_str("1100").unwrap());
        let b = BuildingBlock::new("B", ["b"], Fingerprint::from_bit_str("0011").unwrap());
        let p = derive_product(&t, &[&a, &b]).unwrap();
        assert_eq!(p.fingerprint, Fingerprint::from_bit_str("1111").unwrap());
        assert_eq!(p.product_tag, "amide");
        assert_eq!(p.reactant_ids, vec!["A", "B"]);
        let q = derive_product(&t, &[&b, &a]).unwrap();
        assert_eq!(p.id, q.id);
        assert!(matches!(
            derive_product(&t, &[&a]),
            Err(SpaceError::Incompatible { .. })
        ));
        assert!(matches!(
            derive_product(&t, &[&a, &a]),
            Err(SpaceError::Incompatible { .. })
        ));
    }

    #[test]
    fn product_id_golden() {
        // frozen digest; a change here breaks every stored report
        assert_eq!(
            product_id("amide", &["B", "A"]),
            product_id("amide", &["A", "B"])
        );
        assert_eq!(product_id("amide", &["A", "B"]), "Pc4ede39e872a1c9c");
        assert_ne!(
            product_id("amide", &["A", "B"]),
            product_id("amide", &["AB"])
        );
    }

    #[test]
    fn reduce_examples() {
        let frag = vec![Fingerprint::from_bit_str("1100").unwrap()];
        let blocks = vec![
            BuildingBlock::new("same", ["a"], Fingerprint::from_bit_str("1100").unwrap()),
            BuildingBlock::new("half", ["a"], Fingerprint::from_bit_str("1000").unwrap()),
            BuildingBlock::new("none", ["a"], Fingerprint::from_bit_str("0011").unwrap()),
        ];
        assert_eq!(reduce_space(&frag, &blocks, 0.0).unwrap().len(), 3);
        let exact = reduce_space(&frag, &blocks, 1.0).unwrap();
        assert_eq!(exact.len(), 1);
        assert_eq!(exact[0].id, "same");
        let mid = reduce_space(&frag, &blocks, 0.5).unwrap();
        assert_eq!(
            mid.iter().map(|b| b.id.as_str()).collect::<Vec<_>>(),
            ["same", "half"]
        );
        assert_eq!(
            reduce_space(&[], &blocks, 0.4),
            Err(SpaceError::EmptyInput("fragment list"))
        );
        assert_eq!(
            reduce_space(&frag, &blocks, 1.5),
            Err(SpaceError::Threshold(1.5))
        );
    }

    #[test]
    fn count_examples() {
        let blocks = vec![block("A", &["a"]), block("B", &["b"])];
        assert_eq!(
            count_possible_products(&blocks, &[], 1, DEFAULT_PRODUCT_CAP).unwrap(),
            0
        );
        let t = ReactionTemplate::new("t", vec![vec!["a"], vec!["b"]], "p");
        assert_eq!(
            count_possible_products(&blocks, std::slice::from_ref(&t), 1, DEFAULT_PRODUCT_CAP)
                .unwrap(),
            1
        );
        // the product is tagged "p", which no slot accepts
        assert_eq!(
            count_possible_products(&blocks, std::slice::from_ref(&t), 2, DEFAULT_PRODUCT_CAP)
                .unwrap(),
            1
        );
        let chain = ReactionTemplate::new("u", vec![vec!["p"], vec!["a"]], "q");
        assert_eq!(
            count_possible_products(&blocks, &[t.clone(), chain], 2, DEFAULT_PRODUCT_CAP).unwrap(),
            2
        );
        assert_eq!(
            count_possible_products(&blocks, std::slice::from_ref(&t), 3, 10),
            Err(SpaceError::Steps(3))
        );

        let many: Vec<_> = (0..5)
            .map(|i| block(&format!("a{i}"), &["a"]))
            .chain([block("B", &["b"])])
            .collect();
        assert_eq!(
            count_possible_products(&many, &[t], 1, 3),
            Err(SpaceError::Capacity {
                cap: 3,
                lower_bound: 4
            })
        );
    }

    #[test]
    fn space_validation() {
        assert!(matches!(
            ChemSpace::new(vec![block("A", &["a"]), block("A", &["b"])], vec![]),
            Err(SpaceError::DuplicateId(_))
        ));
        assert!(ChemSpace::new(vec![block("A", &[])], vec![]).is_err());
        let bad = ReactionTemplate::new::<&str>("t", vec![], "p");
        assert!(ChemSpace::new(vec![], vec![bad]).is_err());
        let wide = BuildingBlock::new("W", ["a"], Fingerprint::zeros(16));
        assert!(matches!(
            ChemSpace::new(vec![block("A", &["a"]), wide], vec![]),
            Err(SpaceError::WidthMismatch { .. })
        ));
    }
}
