//! Searches over groupings of consecutive layers.
//!
//! A grouping splits layers `0..K` into consecutive blocks. Each block
//! becomes one piece of a decomposition; pieces are assigned to indices
//! `n = 1, 2, …` in decreasing order of weight, which is optimal for a fixed
//! set of pieces because the index weights `ψ(n)` are non-decreasing.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Hard cap on exhaustive search.
pub const EXHAUSTIVE_LIMIT: usize = 10;

/// Per-layer cost data seen by a strategy.
pub trait LayerCosts {
    fn layer_count(&self) -> usize;

    /// A value monotone in the piece weight `‖g‖_∞ φ(‖g‖₁/‖g‖_∞)` of the
    /// block `first..=last`: the weight itself, or its logarithm.
    fn group_weight(&self, first: usize, last: usize) -> f64;

    /// Total cost (in the same representation) for weights already sorted
    /// in decreasing order, the `i`-th receiving index `n = i + 1`.
    fn total(&self, sorted_weights: &[f64]) -> f64;
}

/// A scored grouping.
#[derive(Debug, Clone, PartialEq)]
pub struct Grouping {
    /// Inclusive layer ranges in layer order.
    pub blocks: Vec<(usize, usize)>,
    /// `order[i]` is the block assigned to index `n = i + 1`.
    pub order: Vec<usize>,
    /// Block weights, in block order.
    pub weights: Vec<f64>,
    pub total: f64,
}

impl Grouping {
    pub fn score(costs: &dyn LayerCosts, blocks: Vec<(usize, usize)>) -> Grouping {
        let weights: Vec<f64> = blocks
            .iter()
            .map(|&(a, b)| costs.group_weight(a, b))
            .collect();
        let mut order: Vec<usize> = (0..blocks.len()).collect();
        order.sort_by(|&i, &j| weights[j].total_cmp(&weights[i]));
        let sorted: Vec<f64> = order.iter().map(|&i| weights[i]).collect();
        let total = costs.total(&sorted);
        Grouping {
            blocks,
            order,
            weights,
            total,
        }
    }

    /// Blocks in index order.
    pub fn assigned_blocks(&self) -> Vec<(usize, usize)> {
        self.order.iter().map(|&i| self.blocks[i]).collect()
    }
}

fn singleton_blocks(k: usize) -> Vec<(usize, usize)> {
    vec![(0, k - 1)]
}

fn layer_blocks(k: usize) -> Vec<(usize, usize)> {
    (0..k).map(|i| (i, i)).collect()
}

pub trait DecompositionStrategy: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Best grouping found; `costs` has at least one layer.
    fn search(&self, costs: &dyn LayerCosts) -> Result<Grouping>;
}

/// All layers in one piece.
#[derive(Debug, Clone, Copy, Default)]
pub struct Singleton;

impl DecompositionStrategy for Singleton {
    fn name(&self) -> &'static str {
        "singleton"
    }

    fn search(&self, costs: &dyn LayerCosts) -> Result<Grouping> {
        Ok(Grouping::score(costs, singleton_blocks(costs.layer_count())))
    }
}

/// One piece per layer.
#[derive(Debug, Clone, Copy, Default)]
pub struct Layers;

impl DecompositionStrategy for Layers {
    fn name(&self) -> &'static str {
        "layers"
    }

    fn search(&self, costs: &dyn LayerCosts) -> Result<Grouping> {
        Ok(Grouping::score(costs, layer_blocks(costs.layer_count())))
    }
}

/// Greedy merging of adjacent blocks, starting from one block per layer.
/// Each pass takes the first strictly improving merge from the left.
#[derive(Debug, Clone, Copy, Default)]
pub struct LocalSearch;

impl DecompositionStrategy for LocalSearch {
    fn name(&self) -> &'static str {
        "local"
    }

    fn search(&self, costs: &dyn LayerCosts) -> Result<Grouping> {
        let mut current = Grouping::score(costs, layer_blocks(costs.layer_count()));
        'outer: loop {
            for i in 0..current.blocks.len().saturating_sub(1) {
                let mut blocks = current.blocks.clone();
                let (_, last) = blocks.remove(i + 1);
                blocks[i].1 = last;
                let candidate = Grouping::score(costs, blocks);
                if candidate.total < current.total {
                    current = candidate;
                    continue 'outer;
                }
            }
            return Ok(current);
        }
    }
}

/// Every split of the layers into consecutive blocks.
#[derive(Debug, Clone, Copy)]
pub struct Exhaustive {
    max_layers: usize,
}

impl Exhaustive {
    pub fn new(max_layers: usize) -> Self {
        Exhaustive {
            max_layers: max_layers.min(EXHAUSTIVE_LIMIT),
        }
    }

    pub fn max_layers(&self) -> usize {
        self.max_layers
    }
}

impl Default for Exhaustive {
    fn default() -> Self {
        Exhaustive::new(EXHAUSTIVE_LIMIT)
    }
}

impl DecompositionStrategy for Exhaustive {
    fn name(&self) -> &'static str {
        "exhaustive"
    }

    fn search(&self, costs: &dyn LayerCosts) -> Result<Grouping> {
        let k = costs.layer_count();
        if k > self.max_layers {
            return Err(Error::TooManyLayers {
                layers: k,
                max: self.max_layers,
            });
        }
        let mut best: Option<Grouping> = None;
        // bit i of `cuts` set: a block ends after layer i
        for cuts in 0u32..(1u32 << (k - 1)) {
            let mut blocks = Vec::new();
            let mut start = 0;
            for i in 0..k - 1 {
                if cuts & (1 << i) != 0 {
                    blocks.push((start, i));
                    start = i + 1;
                }
            }
            blocks.push((start, k - 1));
            let candidate = Grouping::score(costs, blocks);
            if best.as_ref().is_none_or(|b| candidate.total < b.total) {
                best = Some(candidate);
            }
        }
        Ok(best.expect("at least one grouping"))
    }
}

/// Strategies looked up by name.
#[derive(Debug, Clone, Default)]
pub struct StrategyRegistry {
    entries: BTreeMap<String, Arc<dyn DecompositionStrategy>>,
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        StrategyRegistry::default()
    }

    /// `singleton`, `layers`, `local` (also `local_search`) and `exhaustive`.
    pub fn with_defaults() -> Self {
        let mut r = StrategyRegistry::empty();
        r.register("singleton", Arc::new(Singleton));
        r.register("layers", Arc::new(Layers));
        let local: Arc<dyn DecompositionStrategy> = Arc::new(LocalSearch);
        r.register("local", local.clone());
        r.register("local_search", local);
        r.register("exhaustive", Arc::new(Exhaustive::default()));
        r
    }

    pub fn register(&mut self, name: &str, strategy: Arc<dyn DecompositionStrategy>) {
        self.entries.insert(name.to_string(), strategy);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn DecompositionStrategy>> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}
