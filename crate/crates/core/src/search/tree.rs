//! Search tree storage and the sampling distribution over a node's edges.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::Rng;

use crate::inputspace::SegmentId;

pub type NodeId = usize;
pub type EdgeId = usize;

/// The not-yet-tried indices `0..size` of one level, drawn without
/// replacement by a lazily materialized Fisher-Yates shuffle.
#[derive(Debug, Clone)]
pub struct UnexploredPool {
    remaining: u64,
    swapped: BTreeMap<u64, u64>,
}

impl UnexploredPool {
    pub fn new(size: u64) -> Self {
        UnexploredPool {
            remaining: size,
            swapped: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> u64 {
        self.remaining
    }

    pub fn is_empty(&self) -> bool {
        self.remaining == 0
    }

    fn slot(&self, i: u64) -> u64 {
        *self.swapped.get(&i).unwrap_or(&i)
    }

    /// Removes and returns a uniformly chosen remaining index.
    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<u64> {
        if self.remaining == 0 {
            return None;
        }
        let i = rng.gen_range(0..self.remaining);
        let last = self.remaining - 1;
        let picked = self.slot(i);
        let tail = self.slot(last);
        if i != last {
            self.swapped.insert(i, tail);
        }
        self.swapped.remove(&last);
        self.remaining = last;
        Some(picked)
    }

    /// Remaining indices, in pool order.
    pub fn remaining(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.remaining).map(|i| self.slot(i))
    }
}

#[derive(Debug, Clone)]
pub struct LevelState {
    pub unexplored: UnexploredPool,
    pub explored: Vec<EdgeId>,
    /// `|A_l|`
    pub size: u64,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub levels: Vec<LevelState>,
}

impl Node {
    /// A node whose every segment is unexplored.
    pub fn fresh(level_sizes: &[u64]) -> Self {
        Node {
            levels: level_sizes
                .iter()
                .map(|&size| LevelState {
                    unexplored: UnexploredPool::new(size),
                    explored: Vec::new(),
                    size,
                })
                .collect(),
        }
    }

    pub fn is_exhausted(&self) -> bool {
        self.levels
            .iter()
            .all(|l| l.unexplored.is_empty() && l.explored.is_empty())
    }
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub segment: SegmentId,
    pub parent: NodeId,
    pub child: NodeId,
    /// Upper robustness bound of the prefix ending with this edge.
    pub prefix_score: f64,
    /// Least full-trace robustness among simulations through this edge.
    pub suffix_score: f64,
}

impl Edge {
    /// Ranking key for suffix exploitation; an edge without simulated
    /// descendants ranks by its prefix score.
    pub fn suffix_key(&self) -> f64 {
        if self.suffix_score == f64::INFINITY {
            self.prefix_score
        } else {
            self.suffix_score
        }
    }
}

/// What `sample_edge` picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Choice {
    /// A segment drawn (and removed) from the unexplored pool.
    Unexplored(SegmentId),
    /// An existing explored edge, with the strategy that selected it.
    Explored(EdgeId, Strategy),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Uniform over unexplored segments.
    Explore,
    /// Uniform over explored edges.
    Revisit,
    /// Uniform over explored edges of least prefix score.
    BestPrefix,
    /// Uniform over explored edges of least suffix score.
    BestSuffix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exhausted;

#[derive(Debug, Clone, Default)]
pub struct Tree {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

impl Tree {
    pub const ROOT: NodeId = 0;

    pub fn new(root_level_sizes: &[u64]) -> Self {
        Tree {
            nodes: alloc::vec![Node::fresh(root_level_sizes)],
            edges: Vec::new(),
        }
    }

    pub fn add_node(&mut self, level_sizes: &[u64]) -> NodeId {
        self.nodes.push(Node::fresh(level_sizes));
        self.nodes.len() - 1
    }

    /// Records `segment` as an explored edge from `parent` to `child`.
    pub fn add_explored(
        &mut self,
        parent: NodeId,
        segment: SegmentId,
        child: NodeId,
        prefix_score: f64,
    ) -> EdgeId {
        let id = self.edges.len();
        self.edges.push(Edge {
            segment,
            parent,
            child,
            prefix_score,
            suffix_score: f64::INFINITY,
        });
        self.nodes[parent].levels[segment.level].explored.push(id);
        id
    }

    /// Lowers the suffix score of every edge on `path` to at most `robustness`.
    pub fn backpropagate(&mut self, path: &[EdgeId], robustness: f64) {
        for &e in path {
            let edge = &mut self.edges[e];
            edge.suffix_score = edge.suffix_score.min(robustness);
        }
    }

    /// Level weights `(|unexplored_l| + |explored_l|) / (base^l |A_l|)`.
    pub fn level_weights(&self, node: NodeId, base: f64) -> Vec<f64> {
        self.nodes[node]
            .levels
            .iter()
            .enumerate()
            .map(|(l, s)| level_weight(s, l, base))
            .collect()
    }

    /// Draws the next edge out of `node`.
    ///
    /// A level is chosen in proportion to its weight, then a strategy
    /// uniformly among the feasible ones at that level. Drawing an unexplored
    /// segment removes it from the pool.
    pub fn sample_edge<R: Rng + ?Sized>(
        &mut self,
        node: NodeId,
        base: f64,
        rng: &mut R,
    ) -> Result<Choice, Exhausted> {
        let weights = self.level_weights(node, base);
        let level = pick_weighted(&weights, rng).ok_or(Exhausted)?;
        let state = &self.nodes[node].levels[level];

        let mut feasible: [Strategy; 4] = [Strategy::Explore; 4];
        let mut count = 0;
        if !state.unexplored.is_empty() {
            feasible[count] = Strategy::Explore;
            count += 1;
        }
        if !state.explored.is_empty() {
            for s in [Strategy::Revisit, Strategy::BestPrefix, Strategy::BestSuffix] {
                feasible[count] = s;
                count += 1;
            }
        }
        // a level with positive weight has at least one edge
        let strategy = feasible[rng.gen_range(0..count)];

        let explored = &state.explored;
        let edge = match strategy {
            Strategy::Explore => {
                let state = &mut self.nodes[node].levels[level];
                let index = state.unexplored.draw(rng).ok_or(Exhausted)?;
                return Ok(Choice::Unexplored(SegmentId { level, index }));
            }
            Strategy::Revisit => explored[rng.gen_range(0..explored.len())],
            Strategy::BestPrefix => {
                uniform_argmin(explored, |e| self.edges[e].prefix_score, rng)
            }
            Strategy::BestSuffix => uniform_argmin(explored, |e| self.edges[e].suffix_key(), rng),
        };
        Ok(Choice::Explored(edge, strategy))
    }
}

pub fn level_weight(state: &LevelState, level: usize, base: f64) -> f64 {
    if state.size == 0 {
        return 0.0;
    }
    let live = state.unexplored.len() + state.explored.len() as u64;
    live as f64 / (libm::pow(base, level as f64) * state.size as f64)
}

/// Index drawn with probability proportional to its weight, or `None` when
/// all weights are zero.
pub fn pick_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let r = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = Some(i);
        if r < acc {
            return Some(i);
        }
    }
    last
}

fn uniform_argmin<R: Rng + ?Sized>(
    edges: &[EdgeId],
    key: impl Fn(EdgeId) -> f64,
    rng: &mut R,
) -> EdgeId {
    let best = edges.iter().map(|&e| key(e)).fold(f64::INFINITY, f64::min);
    let ties: Vec<EdgeId> = edges.iter().copied().filter(|&e| key(e) == best).collect();
    if ties.is_empty() {
        // every key is NaN; fall back to uniform
        edges[rng.gen_range(0..edges.len())]
    } else {
        ties[rng.gen_range(0..ties.len())]
    }
}
