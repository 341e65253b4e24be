use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::policy::{pucb, SelectionPolicy};
use super::report::{ReportedProduct, SearchReport};
use super::{SearchConfig, SearchError};
use crate::chem::{derive_product, partially_compatible, ChemSpace, Product};
use crate::oracle::{Oracle, OracleError, OracleRequest};
use crate::pareto::{pareto_ranks, ObjectiveVector};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    /// Ordered tuple of block indices into the space.
    Tuple(Vec<usize>),
    Product(Product),
}

#[derive(Debug, Clone)]
pub struct SearchNode {
    pub kind: NodeKind,
    /// Oracle vector fixed at creation.
    pub ora: ObjectiveVector<f64>,
    pub visits: u64,
    /// Component-wise sum of every reward vector backpropagated through the node.
    pub reward: Vec<f64>,
    /// `None` until expanded.
    pub children: Option<Vec<NodeId>>,
    pub dead: bool,
}

impl SearchNode {
    pub fn is_product(&self) -> bool {
        matches!(self.kind, NodeKind::Product(_))
    }

    /// Mean backpropagated reward, zero before the first visit.
    pub fn mean_reward(&self) -> Vec<f64> {
        if self.visits == 0 {
            return vec![0.0; self.reward.len()];
        }
        self.reward.iter().map(|w| w / self.visits as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RolloutOutcome {
    /// Reached a product; the root's statistics were updated.
    Completed,
    /// Every branch tried from the root turned out dead.
    Barren,
}

/// One Pareto MCTS run over a space. Single-threaded; owns its tree and RNG.
pub struct Search<'a, O: Oracle + ?Sized> {
    space: &'a ChemSpace,
    oracle: &'a O,
    config: SearchConfig,
    policy: SelectionPolicy,
    rng: ChaCha8Rng,
    nodes: Vec<SearchNode>,
    block_vectors: Vec<Option<Result<ObjectiveVector<f64>, OracleError>>>,
    rollouts: usize,
    barren: usize,
    oracle_requests: u64,
    oracle_failures: u64,
    protocol_failures: u64,
}

impl<'a, O: Oracle + ?Sized> Search<'a, O> {
    pub fn new(
        config: SearchConfig,
        policy: SelectionPolicy,
        space: &'a ChemSpace,
        oracle: &'a O,
    ) -> Result<Self, SearchError> {
        config.validate()?;
        let dim = oracle.dim();
        if let SelectionPolicy::Scalarized(w) = &policy {
            validate_weights(w, dim)?;
        }
        if space.is_empty() {
            return Err(SearchError::EmptySpace);
        }
        let root = SearchNode {
            kind: NodeKind::Tuple(Vec::new()),
            ora: ObjectiveVector::zeros(dim),
            visits: 0,
            reward: vec![0.0; dim],
            children: None,
            dead: false,
        };
        Ok(Self {
            space,
            oracle,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            policy,
            nodes: vec![root],
            block_vectors: vec![None; space.blocks().len()],
            rollouts: 0,
            barren: 0,
            oracle_requests: 0,
            oracle_failures: 0,
            protocol_failures: 0,
        })
    }

    pub const ROOT: NodeId = 0;

    pub fn nodes(&self) -> &[SearchNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &SearchNode {
        &self.nodes[id]
    }

    pub fn rollouts(&self) -> usize {
        self.rollouts
    }

    pub fn barren_rollouts(&self) -> usize {
        self.barren
    }

    /// Oracle requests issued and how many failed.
    pub fn oracle_stats(&self) -> (u64, u64) {
        (self.oracle_requests, self.oracle_failures)
    }

    /// Failures caused by the oracle environment (timeouts, bad replies).
    pub fn protocol_failures(&self) -> u64 {
        self.protocol_failures
    }

    /// Runs one rollout from the root.
    pub fn rollout_once(&mut self) -> RolloutOutcome {
        self.rollouts += 1;
        match self.rollout(Self::ROOT) {
            Some(v) => {
                let root = &mut self.nodes[Self::ROOT];
                root.visits += 1;
                for (w, x) in root.reward.iter_mut().zip(&v) {
                    *w += x;
                }
                RolloutOutcome::Completed
            }
            None => {
                self.barren += 1;
                RolloutOutcome::Barren
            }
        }
    }

    /// Runs the configured number of rollouts.
    pub fn run(&mut self) {
        self.run_observed(|_| {});
    }

    /// Like [`run`](Self::run), calling `progress` with the rollout count after each rollout.
    pub fn run_observed(&mut self, mut progress: impl FnMut(usize)) {
        while self.rollouts < self.config.rollouts {
            if self.nodes[Self::ROOT].dead {
                // nothing left to explore; the remainder is barren
                let remaining = self.config.rollouts - self.rollouts;
                self.barren += remaining;
                self.rollouts += remaining;
                progress(self.rollouts);
                break;
            }
            self.rollout_once();
            progress(self.rollouts);
        }
    }

    fn rollout(&mut self, id: NodeId) -> Option<Vec<f64>> {
        if self.nodes[id].is_product() {
            return Some(self.nodes[id].ora.to_vec());
        }
        if self.nodes[id].children.is_none() {
            self.expand(id);
        }
        loop {
            let children = self.nodes[id].children.clone().unwrap_or_default();
            let live: Vec<NodeId> = children
                .iter()
                .copied()
                .filter(|&c| !self.nodes[c].dead)
                .collect();
            if live.is_empty() {
                self.nodes[id].dead = true;
                return None;
            }
            let selected = self.select(&children, &live);
            match self.rollout(selected) {
                Some(mut v) => {
                    let child = &mut self.nodes[selected];
                    if child.is_product() {
                        for (x, &p) in v.iter_mut().zip(child.ora.iter()) {
                            *x = x.max(p);
                        }
                    }
                    child.visits += 1;
                    for (w, x) in child.reward.iter_mut().zip(&v) {
                        *w += x;
                    }
                    return Some(v);
                }
                // the selected subtree is now marked dead; try a sibling
                None => debug_assert!(self.nodes[selected].dead),
            }
        }
    }

    fn select(&mut self, children: &[NodeId], live: &[NodeId]) -> NodeId {
        let parent_visits: u64 = children.iter().map(|&c| self.nodes[c].visits).sum();
        let dim = self.oracle.dim();
        let scores: Vec<Vec<f64>> = live
            .iter()
            .map(|&c| {
                let n = &self.nodes[c];
                pucb(
                    &n.reward,
                    n.visits,
                    &n.ora,
                    parent_visits,
                    self.config.exploration,
                    dim,
                )
            })
            .collect();
        live[self.policy.choose(&scores, &mut self.rng)]
    }

    fn record_failure(&mut self, e: &OracleError) {
        self.oracle_failures += 1;
        if e.is_protocol_failure() {
            self.protocol_failures += 1;
        }
    }

    fn ensure_block_vectors(&mut self, blocks: &[usize]) {
        let spec = self.oracle.spec();
        let mut pending = Vec::new();
        let mut queued = std::collections::HashSet::new();
        for &b in blocks {
            if self.block_vectors[b].is_some() || !queued.insert(b) {
                continue;
            }
            let block = self.space.block(b);
            match block.precomputed(spec) {
                Some(v) => self.block_vectors[b] = Some(v.map_err(OracleError::from)),
                None => pending.push(b),
            }
        }
        if pending.is_empty() {
            return;
        }
        let requests: Vec<OracleRequest> = pending
            .iter()
            .map(|&b| {
                let block = self.space.block(b);
                OracleRequest::new(
                    block.id.clone(),
                    block.fingerprint.clone(),
                    vec![block.id.clone()],
                )
            })
            .collect();
        self.oracle_requests += requests.len() as u64;
        for (b, result) in pending
            .into_iter()
            .zip(self.oracle.batch_evaluate(&requests))
        {
            if let Err(e) = &result {
                self.record_failure(e);
            }
            self.block_vectors[b] = Some(result.map(|r| r.transformed));
        }
    }

    /// Element-wise max over the blocks' vectors; `None` if any block failed.
    fn tuple_vector(&self, tuple: &[usize]) -> Option<ObjectiveVector<f64>> {
        let mut acc: Option<ObjectiveVector<f64>> = None;
        for &b in tuple {
            let v = self.block_vectors[b].as_ref()?.as_ref().ok()?;
            acc = Some(match acc {
                None => v.clone(),
                Some(a) => a.elementwise_max(v),
            });
        }
        acc
    }

    fn expand(&mut self, id: NodeId) {
        let NodeKind::Tuple(tuple) = self.nodes[id].kind.clone() else {
            return;
        };
        let space = self.space;
        let dim = self.oracle.dim();
        let members: Vec<_> = tuple.iter().map(|&b| space.block(b)).collect();
        let mut children = Vec::new();

        let products: Vec<Product> = space
            .templates()
            .iter()
            .filter(|t| t.arity() == members.len())
            .filter_map(|t| derive_product(t, &members).ok())
            .collect();
        if !products.is_empty() {
            let requests: Vec<OracleRequest> = products
                .iter()
                .map(|p| {
                    OracleRequest::new(p.id.clone(), p.fingerprint.clone(), p.reactant_ids.clone())
                })
                .collect();
            self.oracle_requests += requests.len() as u64;
            let results = self.oracle.batch_evaluate(&requests);
            for (product, result) in products.into_iter().zip(results) {
                let (ora, dead) = match result {
                    Ok(r) => (r.transformed, false),
                    Err(e) => {
                        self.record_failure(&e);
                        (ObjectiveVector::zeros(dim), true)
                    }
                };
                children.push(self.push_node(NodeKind::Product(product), ora, dead));
            }
        }

        if tuple.len() < self.config.max_blocks {
            let mut extensions = Vec::new();
            for b in 0..space.blocks().len() {
                let mut members = members.clone();
                members.push(space.block(b));
                let extendable = space
                    .templates()
                    .iter()
                    .any(|t| partially_compatible(t, &members));
                if extendable {
                    let mut next = tuple.clone();
                    next.push(b);
                    extensions.push(next);
                }
            }
            let needed: Vec<usize> = extensions.iter().flatten().copied().collect();
            self.ensure_block_vectors(&needed);
            for next in extensions {
                let (ora, dead) = match self.tuple_vector(&next) {
                    Some(v) => (v, false),
                    None => (ObjectiveVector::zeros(dim), true),
                };
                children.push(self.push_node(NodeKind::Tuple(next), ora, dead));
            }
        }

        let dead = children.iter().all(|&c| self.nodes[c].dead);
        let node = &mut self.nodes[id];
        node.dead = dead;
        node.children = Some(children);
    }

    fn push_node(&mut self, kind: NodeKind, ora: ObjectiveVector<f64>, dead: bool) -> NodeId {
        let dim = ora.dim();
        self.nodes.push(SearchNode {
            kind,
            ora,
            visits: 0,
            reward: vec![0.0; dim],
            children: None,
            dead,
        });
        self.nodes.len() - 1
    }

    /// Distinct visited products, ranked over the discovered set.
    pub fn report(&self, elapsed: std::time::Duration) -> SearchReport {
        let mut by_id: BTreeMap<&str, (&Product, &ObjectiveVector<f64>, u64)> = BTreeMap::new();
        for node in &self.nodes {
            if let NodeKind::Product(p) = &node.kind {
                if node.visits == 0 || node.dead {
                    continue;
                }
                by_id
                    .entry(p.id.as_str())
                    .and_modify(|e| e.2 += node.visits)
                    .or_insert((p, &node.ora, node.visits));
            }
        }
        let entries: Vec<_> = by_id.into_values().collect();
        let mut products: Vec<ReportedProduct> = Vec::with_capacity(entries.len());
        if !entries.is_empty() {
            let vectors: Vec<&[f64]> = entries.iter().map(|e| e.1.as_slice()).collect();
            let ranks = pareto_ranks(&vectors).expect("uniform dimension");
            for ((product, ora, visits), rank) in entries.into_iter().zip(ranks) {
                products.push(ReportedProduct {
                    id: product.id.clone(),
                    blocks: product.reactant_ids.clone(),
                    template_path: vec![product.template_id.clone()],
                    objectives: ora.to_vec(),
                    visits,
                    pareto_rank: rank + 1,
                    fingerprint: product.fingerprint.clone(),
                });
            }
            products.sort_by(|a, b| {
                a.pareto_rank
                    .cmp(&b.pareto_rank)
                    .then_with(|| a.id.cmp(&b.id))
            });
        }
        let diagnostic = if products.is_empty() {
            Some(if self.nodes[Self::ROOT].dead {
                "no reachable products: every branch of the space is dead".to_string()
            } else {
                "no products visited".to_string()
            })
        } else {
            None
        };
        SearchReport {
            mode: self.policy.name().to_string(),
            seed: self.config.seed,
            rollouts: self.rollouts,
            barren_rollouts: self.barren,
            oracle_requests: self.oracle_requests,
            oracle_failures: self.oracle_failures,
            products,
            diagnostic,
            elapsed,
        }
    }
}

fn validate_weights(w: &[f64], dim: usize) -> Result<(), SearchError> {
    if w.len() != dim {
        return Err(SearchError::Config(format!(
            "{} weights for {dim} objectives",
            w.len()
        )));
    }
    if w.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(SearchError::Config(
            "weights must be finite and non-negative".into(),
        ));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(SearchError::Config(format!(
            "weights sum to {total}, expected 1"
        )));
    }
    Ok(())
}

/// Pareto MCTS: `config.rollouts` rollouts with Pareto-front selection.
pub fn run_search<O: Oracle + ?Sized>(
    config: &SearchConfig,
    space: &ChemSpace,
    oracle: &O,
) -> Result<SearchReport, SearchError> {
    run_with(config, SelectionPolicy::Pareto, space, oracle)
}

/// Same tree mechanics, selecting by the weighted sum of the PUCB vector.
pub fn run_scalarized<O: Oracle + ?Sized>(
    config: &SearchConfig,
    weights: &[f64],
    space: &ChemSpace,
    oracle: &O,
) -> Result<SearchReport, SearchError> {
    run_with(
        config,
        SelectionPolicy::Scalarized(weights.to_vec()),
        space,
        oracle,
    )
}

fn run_with<O: Oracle + ?Sized>(
    config: &SearchConfig,
    policy: SelectionPolicy,
    space: &ChemSpace,
    oracle: &O,
) -> Result<SearchReport, SearchError> {
    let start = Instant::now();
    let mut search = Search::new(config.clone(), policy, space, oracle)?;
    search.run();
    Ok(search.report(start.elapsed()))
}
