//! Embedded recommenders retrained every round on accumulated interactions:
//! biased matrix factorization, LightGCN and a popularity control.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::{RecommenderConfig, RecommenderKind};
use crate::error::{Error, Result};
use crate::model::{AgentId, ItemId};
use crate::rng::{seeded_rng, RngStream};
use crate::scalar::{dot, Scalar};
use crate::Real;

/// Ratings at or above this count as positive feedback.
pub const POSITIVE_RATING: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interaction {
    pub agent: AgentId,
    pub item: ItemId,
    pub rating: u8,
    pub round: u32,
}

/// Latest rating per (agent, item), with rounds recorded in nondecreasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MatrixRepr", from = "MatrixRepr")]
pub struct InteractionMatrix {
    n_agents: usize,
    n_items: usize,
    entries: BTreeMap<(AgentId, ItemId), (u8, u32)>,
    last_round: u32,
}

/// Flat serialized form; JSON maps cannot carry tuple keys.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    n_agents: usize,
    n_items: usize,
    last_round: u32,
    entries: Vec<Interaction>,
}

impl From<InteractionMatrix> for MatrixRepr {
    fn from(m: InteractionMatrix) -> Self {
        MatrixRepr {
            n_agents: m.n_agents,
            n_items: m.n_items,
            last_round: m.last_round,
            entries: m.iter().collect(),
        }
    }
}

impl From<MatrixRepr> for InteractionMatrix {
    fn from(r: MatrixRepr) -> Self {
        InteractionMatrix {
            n_agents: r.n_agents,
            n_items: r.n_items,
            last_round: r.last_round,
            entries: r.entries.into_iter().map(|x| ((x.agent, x.item), (x.rating, x.round))).collect(),
        }
    }
}

impl InteractionMatrix {
    pub fn new(n_agents: usize, n_items: usize) -> Self {
        InteractionMatrix {
            n_agents,
            n_items,
            entries: BTreeMap::new(),
            last_round: 0,
        }
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    /// Records a rating, replacing any earlier rating of the same pair.
    ///
    /// # Panics
    /// If ids fall outside the matrix or the round goes backwards; both are
    /// engine bugs rather than data errors.
    pub fn record(&mut self, agent: AgentId, item: ItemId, rating: u8, round: u32) {
        assert!(agent.index() < self.n_agents && item.index() < self.n_items, "interaction out of range");
        assert!(round >= self.last_round, "interaction rounds must be nondecreasing");
        self.last_round = round;
        self.entries.insert((agent, item), (rating, round));
    }

    pub fn try_record(&mut self, agent: AgentId, item: ItemId, rating: u8, round: u32) -> Result<()> {
        if agent.index() >= self.n_agents || item.index() >= self.n_items {
            return Err(Error::InvalidInput(format!("interaction ({agent}, {item}) outside matrix")));
        }
        if round < self.last_round {
            return Err(Error::TimeRegression { last: self.last_round, got: round });
        }
        self.record(agent, item, rating, round);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, agent: AgentId, item: ItemId) -> Option<u8> {
        self.entries.get(&(agent, item)).map(|&(r, _)| r)
    }

    pub fn iter(&self) -> impl Iterator<Item = Interaction> + '_ {
        self.entries.iter().map(|(&(agent, item), &(rating, round))| Interaction {
            agent,
            item,
            rating,
            round,
        })
    }

    pub fn positives(&self) -> impl Iterator<Item = (AgentId, ItemId)> + '_ {
        self.iter().filter(|x| x.rating >= POSITIVE_RATING).map(|x| (x.agent, x.item))
    }

    /// Items each agent has rated at all.
    pub fn rated_by_agent(&self) -> Vec<BTreeSet<ItemId>> {
        let mut out = vec![BTreeSet::new(); self.n_agents];
        for &(a, i) in self.entries.keys() {
            out[a.index()].insert(i);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Mf,
    Lightgcn,
    Popularity,
}

/// Trained scoring model. Score is `global + b_u + b_i + p_u . q_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecModel {
    pub kind: ModelKind,
    pub agent_factors: Vec<Vec<Real>>,
    pub item_factors: Vec<Vec<Real>>,
    pub agent_bias: Vec<Real>,
    pub item_bias: Vec<Real>,
    pub global: Real,
}

impl RecModel {
    pub fn n_agents(&self) -> usize {
        self.agent_bias.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_bias.len()
    }

    pub fn factors(&self) -> usize {
        self.item_factors.first().map_or(0, Vec::len)
    }

    pub fn score(&self, agent: AgentId, item: ItemId) -> Real {
        let (u, i) = (agent.index(), item.index());
        let mut s = self.global + self.agent_bias[u] + self.item_bias[i];
        if self.factors() > 0 {
            s += dot(&self.agent_factors[u], &self.item_factors[i]);
        }
        s
    }

    pub fn scores(&self, agent: AgentId) -> Vec<Real> {
        (0..self.n_items()).map(|i| self.score(agent, ItemId(i as u32))).collect()
    }

    /// Writes `agents.csv` and `items.csv` with columns `id,f1..ff,bias`.
    pub fn export_factors_csv(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, rows: &[Vec<Real>], bias: &[Real], id_col: &str| -> Result<()> {
            let path = dir.join(name);
            let mut f = std::io::BufWriter::new(std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?);
            let mut header = vec![id_col.to_string()];
            header.extend((1..=self.factors()).map(|k| format!("f{k}")));
            header.push("bias".into());
            writeln!(f, "{}", header.join(",")).map_err(|e| Error::io(&path, e))?;
            for (id, (row, b)) in rows.iter().zip(bias).enumerate() {
                let mut cells = vec![id.to_string()];
                cells.extend(row.iter().map(|x| x.to_string()));
                cells.push(b.to_string());
                writeln!(f, "{}", cells.join(",")).map_err(|e| Error::io(&path, e))?;
            }
            f.flush().map_err(|e| Error::io(&path, e))
        };
        write("agents.csv", &self.agent_factors, &self.agent_bias, "agent_id")?;
        write("items.csv", &self.item_factors, &self.item_bias, "item_id")
    }
}

fn gaussian_matrix(rows: usize, cols: usize, std: Real, rng: &mut RngStream) -> Vec<Vec<Real>> {
    let normal = Normal::new(0.0, std).expect("positive std");
    (0..rows).map(|_| (0..cols).map(|_| normal.sample(rng)).collect()).collect()
}

/// Biased matrix factorization trained by SGD. Returns the model and the
/// per-epoch regularized mean squared loss.
pub fn mf_train(
    m: &InteractionMatrix,
    factors: usize,
    epochs: usize,
    lr: Real,
    reg: Real,
    seed: u64,
) -> Result<(RecModel, Vec<Real>)> {
    if m.is_empty() {
        return Err(Error::EmptyInteractions);
    }
    let mut rng = seeded_rng(seed);
    let data: Vec<(usize, usize, Real)> = m.iter().map(|x| (x.agent.index(), x.item.index(), Real::from(x.rating))).collect();
    let global = data.iter().map(|d| d.2).sum::<Real>() / data.len() as Real;
    let mut p = gaussian_matrix(m.n_agents(), factors, 0.1, &mut rng);
    let mut q = gaussian_matrix(m.n_items(), factors, 0.1, &mut rng);
    let mut bu = vec![0.0; m.n_agents()];
    let mut bi = vec![0.0; m.n_items()];
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut trace = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &k in &order {
            let (u, i, r) = data[k];
            let err = r - (global + bu[u] + bi[i] + dot(&p[u], &q[i]));
            bu[u] += lr * (err - reg * bu[u]);
            bi[i] += lr * (err - reg * bi[i]);
            for f in 0..factors {
                let (pu, qi) = (p[u][f], q[i][f]);
                p[u][f] += lr * (err * qi - reg * pu);
                q[i][f] += lr * (err * pu - reg * qi);
            }
        }
        let mut loss = 0.0;
        for &(u, i, r) in &data {
            let e = r - (global + bu[u] + bi[i] + dot(&p[u], &q[i]));
            loss += e * e + reg * (bu[u] * bu[u] + bi[i] * bi[i] + dot(&p[u], &p[u]) + dot(&q[i], &q[i]));
        }
        trace.push(loss / data.len() as Real);
    }
    let model = RecModel {
        kind: ModelKind::Mf,
        agent_factors: p,
        item_factors: q,
        agent_bias: bu,
        item_bias: bi,
        global,
    };
    Ok((model, trace))
}

/// Root mean squared error of the model over every recorded rating.
pub fn rmse(model: &RecModel, m: &InteractionMatrix) -> Real {
    let sse: Real = m
        .iter()
        .map(|x| {
            let e = Real::from(x.rating) - model.score(x.agent, x.item);
            e * e
        })
        .sum();
    (sse / m.len().max(1) as Real).sqrt()
}

/// Symmetric-normalized bipartite adjacency over the positive interactions.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteAdjacency<T> {
    agent_rows: Vec<Vec<(usize, T)>>,
    item_rows: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> BipartiteAdjacency<T> {
    /// Builds `D^-1/2 A D^-1/2` from `(agent, item)` edges; duplicates are ignored.
    pub fn new(n_agents: usize, n_items: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let set: BTreeSet<(usize, usize)> = edges.into_iter().collect();
        let mut da = vec![0usize; n_agents];
        let mut di = vec![0usize; n_items];
        for &(u, i) in &set {
            da[u] += 1;
            di[i] += 1;
        }
        let mut agent_rows = vec![Vec::new(); n_agents];
        let mut item_rows = vec![Vec::new(); n_items];
        for &(u, i) in &set {
            let w = T::one() / (T::count(da[u]) * T::count(di[i])).sqrt();
            agent_rows[u].push((i, w));
            item_rows[i].push((u, w));
        }
        BipartiteAdjacency { agent_rows, item_rows }
    }

    pub fn n_agents(&self) -> usize {
        self.agent_rows.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_rows.len()
    }

    pub fn edge_count(&self) -> usize {
        self.agent_rows.iter().map(Vec::len).sum()
    }

    /// One propagation step: agents gather from items and items from agents.
    pub fn apply(&self, agents: &[Vec<T>], items: &[Vec<T>]) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
        let dim = agents.first().or(items.first()).map_or(0, Vec::len);
        let gather = |rows: &[Vec<(usize, T)>], src: &[Vec<T>]| -> Vec<Vec<T>> {
            rows.iter()
                .map(|row| {
                    let mut acc = vec![T::zero(); dim];
                    for &(j, w) in row {
                        for (a, &x) in acc.iter_mut().zip(&src[j]) {
                            *a += w * x;
                        }
                    }
                    acc
                })
                .collect()
        };
        (gather(&self.agent_rows, items), gather(&self.item_rows, agents))
    }

    /// Layer-mean embedding `(1 / (L + 1)) * sum_k A^k E`.
    pub fn propagate(&self, agents: &[Vec<T>], items: &[Vec<T>], layers: usize) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
        let mut sum_a = agents.to_vec();
        let mut sum_i = items.to_vec();
        let (mut cur_a, mut cur_i) = (agents.to_vec(), items.to_vec());
        for _ in 0..layers {
            let (na, ni) = self.apply(&cur_a, &cur_i);
            add_into(&mut sum_a, &na);
            add_into(&mut sum_i, &ni);
            cur_a = na;
            cur_i = ni;
        }
        let scale = T::one() / T::count(layers + 1);
        for row in sum_a.iter_mut().chain(sum_i.iter_mut()) {
            for x in row.iter_mut() {
                *x *= scale;
            }
        }
        (sum_a, sum_i)
    }
}

fn add_into<T: Scalar>(acc: &mut [Vec<T>], x: &[Vec<T>]) {
    for (a, b) in acc.iter_mut().zip(x) {
        for (p, &q) in a.iter_mut().zip(b) {
            *p += q;
        }
    }
}

struct Adam {
    m: Vec<Real>,
    v: Vec<Real>,
    t: i32,
    lr: Real,
}

impl Adam {
    const B1: Real = 0.9;
    const B2: Real = 0.999;
    const EPS: Real = 1e-8;

    fn new(n: usize, lr: Real) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            lr,
        }
    }

    fn step(&mut self, params: &mut [Real], grad: &[Real]) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        for k in 0..params.len() {
            self.m[k] = Self::B1 * self.m[k] + (1.0 - Self::B1) * grad[k];
            self.v[k] = Self::B2 * self.v[k] + (1.0 - Self::B2) * grad[k] * grad[k];
            params[k] -= self.lr * (self.m[k] / c1) / ((self.v[k] / c2).sqrt() + Self::EPS);
        }
    }
}

fn flatten(a: &[Vec<Real>], i: &[Vec<Real>]) -> Vec<Real> {
    a.iter().chain(i).flatten().copied().collect()
}

fn unflatten(flat: &[Real], n_agents: usize, dim: usize) -> (Vec<Vec<Real>>, Vec<Vec<Real>>) {
    let rows: Vec<Vec<Real>> = flat.chunks(dim).map(<[Real]>::to_vec).collect();
    let (a, i) = rows.split_at(n_agents);
    (a.to_vec(), i.to_vec())
}

/// LightGCN with full-batch BPR optimized by Adam.
///
/// Each epoch samples one negative per positive pair. Gradients on the
/// propagated embeddings are pulled back to the base embeddings through the
/// same (symmetric) propagation operator.
pub fn lightgcn_train(
    m: &InteractionMatrix,
    factors: usize,
    layers: usize,
    epochs: usize,
    lr: Real,
    reg: Real,
    seed: u64,
) -> Result<RecModel> {
    let positives: Vec<(usize, usize)> = m.positives().map(|(a, i)| (a.index(), i.index())).collect();
    if positives.is_empty() {
        return Err(Error::EmptyInteractions);
    }
    let (na, ni) = (m.n_agents(), m.n_items());
    let adj = BipartiteAdjacency::<Real>::new(na, ni, positives.iter().copied());
    let pos_sets: Vec<BTreeSet<usize>> = {
        let mut s = vec![BTreeSet::new(); na];
        for &(u, i) in &positives {
            s[u].insert(i);
        }
        s
    };
    let mut rng = seeded_rng(seed);
    let mut base = flatten(&gaussian_matrix(na, factors, 0.1, &mut rng), &gaussian_matrix(ni, factors, 0.1, &mut rng));
    let mut opt = Adam::new(base.len(), lr);
    let scale = 1.0 / positives.len() as Real;
    for _ in 0..epochs {
        let (e_a, e_i) = unflatten(&base, na, factors);
        let (fa, fi) = adj.propagate(&e_a, &e_i, layers);
        let mut ga = vec![vec![0.0; factors]; na];
        let mut gi = vec![vec![0.0; factors]; ni];
        for &(u, i) in &positives {
            if pos_sets[u].len() >= ni {
                continue;
            }
            let j = loop {
                let j = rng.random_range(0..ni);
                if !pos_sets[u].contains(&j) {
                    break j;
                }
            };
            let x = dot(&fa[u], &fi[i]) - dot(&fa[u], &fi[j]);
            // d/dx of -ln(sigmoid(x))
            let g = -(1.0 - crate::scalar::sigmoid(x)) * scale;
            for f in 0..factors {
                ga[u][f] += g * (fi[i][f] - fi[j][f]);
                gi[i][f] += g * fa[u][f];
                gi[j][f] -= g * fa[u][f];
            }
        }
        let (ba, bi) = adj.propagate(&ga, &gi, layers);
        let mut grad = flatten(&ba, &bi);
        for (g, &p) in grad.iter_mut().zip(&base) {
            *g += 2.0 * reg * p;
        }
        opt.step(&mut base, &grad);
    }
    let (e_a, e_i) = unflatten(&base, na, factors);
    let (fa, fi) = adj.propagate(&e_a, &e_i, layers);
    Ok(RecModel {
        kind: ModelKind::Lightgcn,
        agent_factors: fa,
        item_factors: fi,
        agent_bias: vec![0.0; na],
        item_bias: vec![0.0; ni],
        global: 0.0,
    })
}

/// Scores items by their positive-interaction count.
pub fn popularity_baseline(m: &InteractionMatrix) -> RecModel {
    let mut counts = vec![0.0; m.n_items()];
    for (_, i) in m.positives() {
        counts[i.index()] += 1.0;
    }
    RecModel {
        kind: ModelKind::Popularity,
        agent_factors: vec![Vec::new(); m.n_agents()],
        item_factors: vec![Vec::new(); m.n_items()],
        agent_bias: vec![0.0; m.n_agents()],
        item_bias: counts,
        global: 0.0,
    }
}

/// Trains the configured model kind.
pub fn train(kind: RecommenderKind, m: &InteractionMatrix, cfg: &RecommenderConfig, seed: u64) -> Result<RecModel> {
    match kind {
        RecommenderKind::Mf => mf_train(m, cfg.mf_factors, cfg.mf_epochs, cfg.mf_lr, cfg.mf_reg, seed).map(|(model, _)| model),
        RecommenderKind::Lightgcn => lightgcn_train(m, cfg.gcn_factors, cfg.gcn_layers, cfg.gcn_epochs, cfg.gcn_lr, cfg.gcn_reg, seed),
        RecommenderKind::Popularity => Ok(popularity_baseline(m)),
    }
}

/// Ranks `scores` descending, ties to the lower index, skipping `exclude`.
pub fn rank_scores(scores: &[Real], k: usize, exclude: &BTreeSet<ItemId>) -> Vec<ItemId> {
    let mut idx: Vec<usize> = (0..scores.len()).filter(|&i| !exclude.contains(&ItemId(i as u32))).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx.into_iter().map(|i| ItemId(i as u32)).collect()
}

pub fn top_k(model: &RecModel, agent: AgentId, k: usize, exclude: &BTreeSet<ItemId>) -> Vec<ItemId> {
    rank_scores(&model.scores(agent), k, exclude)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rank1_fixture(n: usize, m: usize) -> InteractionMatrix {
        let mut mat = InteractionMatrix::new(n, m);
        for u in 0..n {
            for i in 0..m {
                let a = 1.0 + (u % 4) as f64 * 0.3;
                let c = 1.0 + (i % 5) as f64 * 0.5;
                // ratings are integral, so pick products that land on 1..5 exactly
                let r = (a * c).round().clamp(1.0, 5.0) as u8;
                mat.record(AgentId(u as u32), ItemId(i as u32), r, 0);
            }
        }
        mat
    }

    #[test]
    fn interactions_keep_latest_rating() {
        let mut m = InteractionMatrix::new(2, 2);
        m.record(AgentId(0), ItemId(1), 2, 0);
        m.record(AgentId(0), ItemId(1), 5, 3);
        assert_eq!(m.len(), 1);
        assert_eq!(m.get(AgentId(0), ItemId(1)), Some(5));
        assert!(matches!(m.try_record(AgentId(1), ItemId(0), 3, 1), Err(Error::TimeRegression { .. })));
        assert!(m.try_record(AgentId(5), ItemId(0), 3, 4).is_err());
    }

    #[test]
    fn mf_rejects_empty() {
        assert!(matches!(mf_train(&InteractionMatrix::new(2, 2), 2, 5, 0.01, 0.0, 1), Err(Error::EmptyInteractions)));
        assert!(matches!(
            lightgcn_train(&InteractionMatrix::new(2, 2), 2, 1, 5, 0.01, 0.0, 1),
            Err(Error::EmptyInteractions)
        ));
    }

    #[test]
    fn mf_constant_ratings_are_bias_only() {
        let mut m = InteractionMatrix::new(5, 6);
        for u in 0..5 {
            for i in 0..6 {
                m.record(AgentId(u), ItemId(i), 4, 0);
            }
        }
        let (model, _) = mf_train(&m, 2, 50, 0.02, 0.02, 3).unwrap();
        assert!(rmse(&model, &m) < 0.02);
    }

    #[test]
    fn mf_loss_trend_decreases_and_is_deterministic() {
        let m = rank1_fixture(12, 15);
        let (_, t1) = mf_train(&m, 2, 60, 0.02, 0.01, 9).unwrap();
        let (_, t2) = mf_train(&m, 2, 60, 0.02, 0.01, 9).unwrap();
        assert_eq!(t1, t2);
        let head: f64 = t1[..10].iter().sum::<f64>() / 10.0;
        let tail: f64 = t1[t1.len() - 10..].iter().sum::<f64>() / 10.0;
        assert!(tail < head);
    }

    #[test]
    fn one_layer_propagation_matches_hand_product() {
        // agents {0,1}, items {0,1}; edges 0-0, 0-1, 1-1
        // degrees: a0=2, a1=1, i0=1, i1=2
        let adj = BipartiteAdjacency::<f64>::new(2, 2, [(0, 0), (0, 1), (1, 1)]);
        let ea = vec![vec![1.0], vec![2.0]];
        let ei = vec![vec![3.0], vec![5.0]];
        let (fa, fi) = adj.propagate(&ea, &ei, 1);
        let s2 = 2.0_f64.sqrt();
        let a0 = 3.0 / s2 + 5.0 / 2.0;
        let a1 = 5.0 / s2;
        let i0 = 1.0 / s2;
        let i1 = 1.0 / 2.0 + 2.0 / s2;
        assert!((fa[0][0] - (1.0 + a0) / 2.0).abs() < 1e-12);
        assert!((fa[1][0] - (2.0 + a1) / 2.0).abs() < 1e-12);
        assert!((fi[0][0] - (3.0 + i0) / 2.0).abs() < 1e-12);
        assert!((fi[1][0] - (5.0 + i1) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_layers_is_identity() {
        let adj = BipartiteAdjacency::<f64>::new(2, 2, [(0, 0)]);
        let ea = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        let ei = vec![vec![5.0, 6.0], vec![7.0, 8.0]];
        assert_eq!(adj.propagate(&ea, &ei, 0), (ea, ei));
    }

    #[test]
    fn lightgcn_is_deterministic() {
        let m = rank1_fixture(10, 12);
        let a = lightgcn_train(&m, 4, 2, 10, 0.05, 1e-4, 4).unwrap();
        let b = lightgcn_train(&m, 4, 2, 10, 0.05, 1e-4, 4).unwrap();
        assert_eq!(a, b);
        let ex = BTreeSet::new();
        assert_eq!(top_k(&a, AgentId(0), 5, &ex), top_k(&b, AgentId(0), 5, &ex));
    }

    #[test]
    fn popularity_examples() {
        let empty = popularity_baseline(&InteractionMatrix::new(1, 3));
        assert_eq!(top_k(&empty, AgentId(0), 3, &BTreeSet::new()), vec![ItemId(0), ItemId(1), ItemId(2)]);
        let mut m = InteractionMatrix::new(4, 3);
        for u in 0..3 {
            m.record(AgentId(u), ItemId(2), 4, 0);
        }
        m.record(AgentId(3), ItemId(1), 5, 0);
        m.record(AgentId(3), ItemId(0), 1, 0);
        let p = popularity_baseline(&m);
        assert_eq!(top_k(&p, AgentId(0), 2, &BTreeSet::new()), vec![ItemId(2), ItemId(1)]);
    }

    #[test]
    fn top_k_examples() {
        let scores = [0.9, 0.9, 0.1];
        let none = BTreeSet::new();
        assert_eq!(rank_scores(&scores, 2, &none), vec![ItemId(0), ItemId(1)]);
        assert_eq!(rank_scores(&scores, 10, &none).len(), 3);
        let all: BTreeSet<ItemId> = (0..3).map(ItemId).collect();
        assert!(rank_scores(&scores, 2, &all).is_empty());
        // B = 0.9 at index 1, A = 0.9 at index 0, C = 0.1
        let ex: BTreeSet<ItemId> = [ItemId(0)].into_iter().collect();
        assert_eq!(rank_scores(&scores, 2, &ex), vec![ItemId(1), ItemId(2)]);
    }

    #[test]
    fn factor_export_writes_headers() {
        let dir = tempfile::tempdir().unwrap();
        let m = rank1_fixture(3, 4);
        let (model, _) = mf_train(&m, 2, 5, 0.02, 0.01, 1).unwrap();
        model.export_factors_csv(dir.path()).unwrap();
        let items = std::fs::read_to_string(dir.path().join("items.csv")).unwrap();
        assert!(items.starts_with("item_id,f1,f2,bias\n"));
        assert_eq!(items.lines().count(), 5);
    }
}
