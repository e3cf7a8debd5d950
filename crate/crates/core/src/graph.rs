//! The layered social graph: interest, personality and structural layers
//! fused into one unified weighted graph.
//!
//! Interest edges connect each agent to its top-k Jaccard peers. Personality
//! and structural edges are attached to the friendship topology loaded from
//! the edge list. The unified layer is always the weighted sum of the three
//! and is recomputed pairwise whenever a layer weight changes.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AgentId, StructuralAttributes};
use crate::scalar::{cosine, Scalar};

/// Weights below this are removed after decay.
pub const PRUNE_THRESHOLD: f64 = 1e-6;

/// Undirected, unweighted friendship topology over `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    adj: Vec<BTreeSet<u32>>,
}

impl Topology {
    /// Builds from an edge list; duplicates and self loops are dropped.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut adj = vec![BTreeSet::new(); n];
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::InvalidInput(format!("edge ({u}, {v}) outside 0..{n}")));
            }
            if u == v {
                continue;
            }
            adj[u as usize].insert(v);
            adj[v as usize].insert(u);
        }
        Ok(Topology { adj })
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<u32> {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Each undirected edge once, `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, nbrs)| {
            let u = u as u32;
            nbrs.iter().copied().filter(move |&v| u < v).map(move |v| (u, v))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }
}

/// Symmetric sparse weighted adjacency. Zero weights are never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph<T> {
    rows: Vec<BTreeMap<u32, T>>,
}

impl<T: Scalar> WeightedGraph<T> {
    pub fn new(n: usize) -> Self {
        WeightedGraph {
            rows: vec![BTreeMap::new(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, u: usize, v: usize) -> T {
        self.rows[u].get(&(v as u32)).copied().unwrap_or_else(T::zero)
    }

    /// Sets the symmetric weight; a zero weight removes the edge.
    pub fn set(&mut self, u: usize, v: usize, w: T) {
        if w == T::zero() {
            self.rows[u].remove(&(v as u32));
            self.rows[v].remove(&(u as u32));
        } else {
            self.rows[u].insert(v as u32, w);
            self.rows[v].insert(u as u32, w);
        }
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = (u32, T)> + '_ {
        self.rows[u].iter().map(|(&v, &w)| (v, w))
    }

    pub fn degree(&self, u: usize) -> usize {
        self.rows[u].len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, T)> + '_ {
        self.rows.iter().enumerate().flat_map(|(u, row)| {
            let u = u as u32;
            row.iter().filter(move |(&v, _)| u < v).map(move |(&v, &w)| (u, v, w))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum::<usize>() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(BTreeMap::is_empty)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Interest,
    Personality,
    Structural,
}

impl Layer {
    pub const ALL: [Layer; 3] = [Layer::Interest, Layer::Personality, Layer::Structural];

    pub fn name(self) -> &'static str {
        match self {
            Layer::Interest => "interest",
            Layer::Personality => "personality",
            Layer::Structural => "structural",
        }
    }
}

/// Fusion weights `(alpha_g, beta_g, gamma_g)`, summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerWeights<T> {
    pub interest: T,
    pub personality: T,
    pub structural: T,
}

impl<T: Scalar> LayerWeights<T> {
    pub fn new(interest: T, personality: T, structural: T) -> Result<Self> {
        let sum = interest + personality + structural;
        if (sum - T::one()).abs() > T::lit(1e-9) {
            return Err(Error::constraint(
                "layer weights",
                format!("must sum to 1, got {sum}"),
            ));
        }
        if interest < T::zero() || personality < T::zero() || structural < T::zero() {
            return Err(Error::constraint("layer weights", "must be non-negative"));
        }
        Ok(LayerWeights {
            interest,
            personality,
            structural,
        })
    }

    #[inline]
    pub fn fuse(&self, w_int: T, w_pers: T, w_struct: T) -> T {
        self.interest * w_int + self.personality * w_pers + self.structural * w_struct
    }
}

pub fn jaccard<T: Scalar, K: Ord>(a: &BTreeSet<K>, b: &BTreeSet<K>) -> T {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        T::zero()
    } else {
        T::count(inter) / T::count(union)
    }
}

/// Jaccard similarity of two liked-genre sets; 0 when both are empty.
pub fn interest_weight<T: Scalar, K: Ord>(mu: &BTreeSet<K>, mv: &BTreeSet<K>) -> T {
    jaccard(mu, mv)
}

/// Cosine similarity of Big-Five vectors; 0 when either is all-zero.
pub fn personality_weight<T: Scalar>(bu: &[T], bv: &[T]) -> T {
    cosine(bu, bv)
}

/// Indicator of shared occupation plus indicator of shared age group.
pub fn structural_weight<T: Scalar>(tu: &StructuralAttributes, tv: &StructuralAttributes) -> T {
    let same_occupation = matches!((tu.occupation_id, tv.occupation_id), (Some(a), Some(b)) if a == b);
    let same_age = tu.age_group_id == tv.age_group_id;
    T::count(usize::from(same_occupation) + usize::from(same_age))
}

/// Keeps each agent's `top_k` highest-Jaccard peers (ties to the lower id),
/// then symmetrizes by taking the union of both directed selections.
pub fn build_interest_layer<T: Scalar, K: Ord>(tags: &[BTreeSet<K>], top_k: usize) -> WeightedGraph<T> {
    let n = tags.len();
    let mut layer = WeightedGraph::<T>::new(n);
    for u in 0..n {
        let mut scored: Vec<(T, usize)> = (0..n)
            .filter(|&v| v != u)
            .map(|v| (interest_weight::<T, K>(&tags[u], &tags[v]), v))
            .filter(|(w, _)| *w > T::zero())
            .collect();
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite weights").then(a.1.cmp(&b.1)));
        for &(w, v) in scored.iter().take(top_k) {
            // Jaccard is symmetric, so the max of the two directed weights is `w`.
            let current = layer.get(u, v);
            layer.set(u, v, current.max(w));
        }
    }
    layer
}

/// Personality weights on every friendship edge.
pub fn build_personality_layer<T: Scalar>(traits: &[[T; 5]], topology: &Topology) -> WeightedGraph<T> {
    let mut layer = WeightedGraph::new(topology.n());
    for (u, v) in topology.edges() {
        let w = personality_weight(&traits[u as usize], &traits[v as usize]);
        if w > T::zero() {
            layer.set(u as usize, v as usize, w);
        }
    }
    layer
}

/// Structural homophily weights on every friendship edge.
pub fn build_structural_layer<T: Scalar>(attrs: &[StructuralAttributes], topology: &Topology) -> WeightedGraph<T> {
    let mut layer = WeightedGraph::new(topology.n());
    for (u, v) in topology.edges() {
        let w: T = structural_weight(&attrs[u as usize], &attrs[v as usize]);
        if w > T::zero() {
            layer.set(u as usize, v as usize, w);
        }
    }
    layer
}

/// Elementwise weighted sum over the union of the three supports.
pub fn unify_layers<T: Scalar>(layers: &[WeightedGraph<T>; 3], weights: [T; 3]) -> Result<WeightedGraph<T>> {
    let weights = LayerWeights::new(weights[0], weights[1], weights[2])?;
    Ok(fuse_all(layers, &weights))
}

fn fuse_all<T: Scalar>(layers: &[WeightedGraph<T>; 3], weights: &LayerWeights<T>) -> WeightedGraph<T> {
    let n = layers[0].n();
    let mut unified = WeightedGraph::new(n);
    for u in 0..n {
        let support: BTreeSet<u32> = layers
            .iter()
            .flat_map(|l| l.neighbors(u).map(|(v, _)| v))
            .filter(|&v| (v as usize) > u)
            .collect();
        for v in support {
            let v = v as usize;
            let w = weights.fuse(layers[0].get(u, v), layers[1].get(u, v), layers[2].get(u, v));
            if w > T::zero() {
                unified.set(u, v, w);
            }
        }
    }
    unified
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareEdge {
    pub from: AgentId,
    pub to: AgentId,
    pub t: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredGraph<T> {
    layers: [WeightedGraph<T>; 3],
    unified: WeightedGraph<T>,
    weights: LayerWeights<T>,
    share_edges: Vec<ShareEdge>,
}

impl<T: Scalar> LayeredGraph<T> {
    pub fn new(
        interest: WeightedGraph<T>,
        personality: WeightedGraph<T>,
        structural: WeightedGraph<T>,
        weights: LayerWeights<T>,
    ) -> Result<Self> {
        let n = interest.n();
        if personality.n() != n || structural.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: personality.n().min(structural.n()),
            });
        }
        let layers = [interest, personality, structural];
        let unified = fuse_all(&layers, &weights);
        Ok(LayeredGraph {
            layers,
            unified,
            weights,
            share_edges: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.unified.n()
    }

    pub fn layer(&self, layer: Layer) -> &WeightedGraph<T> {
        &self.layers[layer as usize]
    }

    pub fn layers(&self) -> &[WeightedGraph<T>; 3] {
        &self.layers
    }

    pub fn unified(&self) -> &WeightedGraph<T> {
        &self.unified
    }

    pub fn weights(&self) -> LayerWeights<T> {
        self.weights
    }

    pub fn share_edges(&self) -> &[ShareEdge] {
        &self.share_edges
    }

    /// Per-layer weights of the pair, ordered interest, personality, structural.
    pub fn pair_weights(&self, u: usize, v: usize) -> [T; 3] {
        [self.layers[0].get(u, v), self.layers[1].get(u, v), self.layers[2].get(u, v)]
    }

    fn refuse(&mut self, u: usize, v: usize) {
        let [wi, wp, ws] = self.pair_weights(u, v);
        let w = self.weights.fuse(wi, wp, ws);
        self.unified.set(u, v, if w > T::zero() { w } else { T::zero() });
    }

    /// Overwrites one layer weight and refreshes the unified pair.
    pub fn set_weight(&mut self, layer: Layer, u: usize, v: usize, w: T) {
        self.layers[layer as usize].set(u, v, w);
        self.refuse(u, v);
    }

    /// Multiplies every interest-layer tie by `factor`, pruning faded ties.
    ///
    /// Personality and structural weights are trait and attribute indicators,
    /// so only the interaction-driven interest layer fades.
    pub fn decay_ties(&mut self, factor: T) {
        if factor == T::one() {
            return;
        }
        let prune = T::lit(PRUNE_THRESHOLD);
        let edges: Vec<(u32, u32, T)> = self.layers[Layer::Interest as usize].edges().collect();
        for (u, v, w) in edges {
            let nw = w * factor;
            let nw = if nw < prune { T::zero() } else { nw };
            self.set_weight(Layer::Interest, u as usize, v as usize, nw);
        }
    }

    /// Logs a directed share and reinforces the interest tie, capped at 1.
    pub fn record_share_edge(&mut self, from: AgentId, to: AgentId, t: u32, step: T) -> Result<()> {
        if from == to {
            return Err(Error::SelfShare(from));
        }
        if from.index() >= self.n() || to.index() >= self.n() {
            return Err(Error::InvalidInput(format!("share {from}->{to} outside population")));
        }
        self.share_edges.push(ShareEdge { from, to, t });
        let (u, v) = (from.index(), to.index());
        let w = (self.layers[0].get(u, v) + step).min(T::one());
        self.set_weight(Layer::Interest, u, v, w);
        Ok(())
    }

    /// Recomputes the unified layer from scratch.
    pub fn recompute_unified(&self) -> WeightedGraph<T> {
        fuse_all(&self.layers, &self.weights)
    }
}
