//! Personality inference: behavioural and structural features, graph
//! centralities, the Big-Five regressor and profile assembly.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use log::warn;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::graph::Topology;
use crate::model::{AgentId, AgentProfile, BigFive, Demographics, EpisodicMemory, ItemCatalog, ItemId, StructuralAttributes, TrustBook};
use crate::rng::seeded_rng;
use crate::scalar::{sigmoid, Scalar};
use crate::Real;

/// Minimum rows accepted by [`Regressor::fit`].
pub const MIN_TRAINING_ROWS: usize = 20;

/// Shannon entropy (nats) of unnormalized non-negative masses.
pub fn entropy<T: Scalar>(masses: impl IntoIterator<Item = T>) -> T {
    let m: Vec<T> = masses.into_iter().filter(|&x| x > T::zero()).collect();
    let total: T = m.iter().copied().sum();
    if total <= T::zero() {
        return T::zero();
    }
    let h: T = m.iter().map(|&x| {
        let p = x / total;
        -p * p.ln()
    }).sum();
    h.max(T::zero())
}

/// Number of distinct items rated.
pub fn activity_level(ratings: &[(ItemId, u8)]) -> usize {
    ratings.iter().map(|&(i, _)| i).collect::<BTreeSet<_>>().len()
}

/// Genre entropy of the distinct rated items; multi-genre items split their
/// unit mass evenly across genres.
pub fn diversity<'a>(genre_sets: impl IntoIterator<Item = &'a BTreeSet<String>>) -> Result<Real> {
    let mut mass: BTreeMap<&str, Real> = BTreeMap::new();
    let mut n = 0usize;
    for g in genre_sets {
        n += 1;
        if g.is_empty() {
            continue;
        }
        let share = 1.0 / g.len() as Real;
        for name in g {
            *mass.entry(name.as_str()).or_default() += share;
        }
    }
    if n == 0 {
        return Err(Error::EmptyHistory);
    }
    Ok(entropy(mass.into_values()))
}

/// Mean squared deviation of `(rating, global mean)` pairs.
pub fn conformity_deviation(pairs: &[(Real, Real)]) -> Result<Real> {
    if pairs.is_empty() {
        return Err(Error::EmptyHistory);
    }
    Ok(pairs.iter().map(|(r, m)| (r - m).powi(2)).sum::<Real>() / pairs.len() as Real)
}

/// Mean inverse popularity of rated items.
pub fn novelty_seeking(popularity: &[u32]) -> Result<Real> {
    if popularity.is_empty() {
        return Err(Error::EmptyHistory);
    }
    if popularity.contains(&0) {
        return Err(Error::constraint("popularity", "every rated item has popularity >= 1"));
    }
    Ok(popularity.iter().map(|&p| 1.0 / Real::from(p)).sum::<Real>() / popularity.len() as Real)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BehavioralFeatures {
    pub activity: Real,
    pub diversity: Real,
    pub conformity: Real,
    pub novelty: Real,
}

impl BehavioralFeatures {
    pub fn to_array(self) -> [Real; 4] {
        [self.activity, self.diversity, self.conformity, self.novelty]
    }
}

/// All four behavioural features of one user.
///
/// `ratings` may contain repeated items; the last rating of an item wins.
pub fn behavioral_features(
    ratings: &[(ItemId, u8)],
    catalog: &ItemCatalog,
    global_means: &[Real],
    popularity: &[u32],
) -> Result<BehavioralFeatures> {
    let latest: BTreeMap<ItemId, u8> = ratings.iter().copied().collect();
    let mut genres = Vec::with_capacity(latest.len());
    let mut dev = Vec::with_capacity(latest.len());
    let mut pops = Vec::with_capacity(latest.len());
    for (&i, &r) in &latest {
        let item = catalog.get(i).ok_or(Error::UnknownItem(i))?;
        genres.push(&item.genres);
        dev.push((Real::from(r), global_means[i.index()]));
        pops.push(popularity[i.index()]);
    }
    Ok(BehavioralFeatures {
        activity: latest.len() as Real,
        diversity: diversity(genres)?,
        conformity: conformity_deviation(&dev)?,
        novelty: novelty_seeking(&pops)?,
    })
}

/// Entropy of the labels among `v`'s neighbours. Unlabelled neighbours are ignored.
pub fn neighbor_label_entropy(topology: &Topology, v: usize, labels: &[Option<u32>]) -> Real {
    let mut counts: BTreeMap<u32, Real> = BTreeMap::new();
    for &u in topology.neighbors(v) {
        if let Some(l) = labels[u as usize] {
            *counts.entry(l).or_default() += 1.0;
        }
    }
    entropy(counts.into_values())
}

/// Occupation label with education as fallback.
pub fn social_label(t: &StructuralAttributes) -> Option<u32> {
    t.occupation_id.or(t.education_id)
}

/// Unnormalized betweenness; each unordered pair counted once.
pub fn betweenness<T: Scalar>(topology: &Topology) -> Vec<T> {
    let n = topology.n();
    let mut cb = vec![T::zero(); n];
    for s in 0..n {
        let mut stack = Vec::with_capacity(n);
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![T::zero(); n];
        let mut dist = vec![usize::MAX; n];
        sigma[s] = T::one();
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in topology.neighbors(v) {
                let w = w as usize;
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    let sv = sigma[v];
                    sigma[w] += sv;
                    preds[w].push(v);
                }
            }
        }
        let mut delta = vec![T::zero(); n];
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                let dw = delta[w];
                delta[v] += sigma[v] / sigma[w] * (T::one() + dw);
            }
            if w != s {
                cb[w] += delta[w];
            }
        }
    }
    let half = T::lit(0.5);
    cb.into_iter().map(|x| x * half).collect()
}

/// PageRank by power iteration with uniform redistribution of dangling mass.
pub fn pagerank<T: Scalar>(topology: &Topology, damping: T, tol: T, max_iter: usize) -> Result<Vec<T>> {
    let n = topology.n();
    if n == 0 {
        return Ok(Vec::new());
    }
    let nt = T::count(n);
    let mut p = vec![T::one() / nt; n];
    let mut residual = T::infinity();
    for _ in 0..max_iter {
        let dangling: T = (0..n).filter(|&v| topology.degree(v) == 0).map(|v| p[v]).sum();
        let base = (T::one() - damping) / nt + damping * dangling / nt;
        let mut next = vec![base; n];
        for u in 0..n {
            let d = topology.degree(u);
            if d == 0 {
                continue;
            }
            let share = damping * p[u] / T::count(d);
            for &v in topology.neighbors(u) {
                next[v as usize] += share;
            }
        }
        residual = next.iter().zip(&p).map(|(&a, &b)| (a - b).abs()).sum();
        p = next;
        if residual < tol {
            return Ok(p);
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual: residual.to_f64().unwrap_or(f64::NAN),
    })
}

/// `[degree, label entropy, betweenness, pagerank]` for every node.
pub fn structural_features(topology: &Topology, labels: &[Option<u32>], damping: Real) -> Result<Vec<[Real; 4]>> {
    let bc = betweenness::<Real>(topology);
    let pr = pagerank(topology, damping, 1e-10, 200)?;
    Ok((0..topology.n())
        .map(|v| [topology.degree(v) as Real, neighbor_label_entropy(topology, v, labels), bc[v], pr[v]])
        .collect())
}

fn column_stats(rows: &[Vec<Real>], j: usize) -> (Real, Real) {
    let n = rows.len() as Real;
    let mean = rows.iter().map(|r| r[j]).sum::<Real>() / n;
    let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<Real>() / n;
    (mean, var.sqrt())
}

/// Z-scores each column in place. Zero-variance columns become 0.
pub fn zscore_columns(rows: &mut [Vec<Real>]) {
    if rows.is_empty() {
        return;
    }
    for j in 0..rows[0].len() {
        let (mean, sd) = column_stats(rows, j);
        for r in rows.iter_mut() {
            r[j] = if sd > 0.0 { (r[j] - mean) / sd } else { 0.0 };
        }
    }
}

/// Fraction of values strictly below each value, ties sharing the mean rank.
fn quantiles(values: &[Real]) -> Vec<Real> {
    let n = values.len();
    if n <= 1 {
        return vec![0.5; n];
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut q = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as Real / 2.0;
        for &k in &idx[i..=j] {
            q[k] = rank / (n - 1) as Real;
        }
        i = j + 1;
    }
    q
}

/// Maps structural features into the standardized behavioural space.
///
/// PageRank is replaced by `1 - quantile` (low centrality reads as novelty
/// seeking), then all four columns are z-scored over the population.
pub fn bridge_structural(features: &[[Real; 4]]) -> Vec<Vec<Real>> {
    let pr: Vec<Real> = features.iter().map(|f| f[3]).collect();
    let q = quantiles(&pr);
    let mut rows: Vec<Vec<Real>> = features
        .iter()
        .zip(&q)
        .map(|(f, &qv)| vec![f[0], f[1], f[2], 1.0 - qv])
        .collect();
    zscore_columns(&mut rows);
    rows
}

/// Z-scored behavioural features, the training-side half of the bridge.
pub fn standardize_behavioral(features: &[[Real; 4]]) -> Vec<Vec<Real>> {
    let mut rows: Vec<Vec<Real>> = features.iter().map(|f| f.to_vec()).collect();
    zscore_columns(&mut rows);
    rows
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressorParams {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: Real,
    pub holdout_fraction: Real,
}

impl Default for RegressorParams {
    fn default() -> Self {
        RegressorParams {
            hidden: 16,
            epochs: 2000,
            learning_rate: 0.01,
            holdout_fraction: 0.2,
        }
    }
}

impl From<&crate::config::PersonalityConfig> for RegressorParams {
    fn from(c: &crate::config::PersonalityConfig) -> Self {
        RegressorParams {
            hidden: c.hidden,
            epochs: c.epochs,
            learning_rate: c.learning_rate,
            holdout_fraction: c.holdout_fraction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub train_rows: usize,
    pub holdout_rows: usize,
    pub dropped_columns: Vec<usize>,
    pub rmse: [Real; 5],
    /// `None` where either side of the correlation has zero variance.
    pub pearson: [Option<Real>; 5],
    pub final_loss: Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Dense {
    w: Vec<Real>,
    b: Vec<Real>,
    n_in: usize,
    n_out: usize,
}

impl Dense {
    fn new<R: Rng + ?Sized>(n_in: usize, n_out: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (n_in + n_out).max(1) as Real).sqrt();
        Dense {
            w: (0..n_in * n_out).map(|_| rng.random_range(-limit..limit)).collect(),
            b: vec![0.0; n_out],
            n_in,
            n_out,
        }
    }

    fn forward(&self, x: &[Real]) -> Vec<Real> {
        (0..self.n_out)
            .map(|o| self.b[o] + (0..self.n_in).map(|i| self.w[o * self.n_in + i] * x[i]).sum::<Real>())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Network {
    layers: [Dense; 3],
    mean: Vec<Real>,
    sd: Vec<Real>,
    keep: Vec<usize>,
}

impl Network {
    fn normalize(&self, x: &[Real]) -> Vec<Real> {
        self.keep.iter().enumerate().map(|(k, &j)| (x[j] - self.mean[k]) / self.sd[k]).collect()
    }

    /// Returns activations `[input, h1, h2, out]`.
    fn activations(&self, z: &[Real]) -> [Vec<Real>; 4] {
        let h1: Vec<Real> = self.layers[0].forward(z).into_iter().map(Real::tanh).collect();
        let h2: Vec<Real> = self.layers[1].forward(&h1).into_iter().map(Real::tanh).collect();
        let out: Vec<Real> = self.layers[2].forward(&h2).into_iter().map(sigmoid).collect();
        [z.to_vec(), h1, h2, out]
    }
}

/// Multi-task feed-forward regressor from 4 features to Big-Five traits.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Regressor {
    params: Option<RegressorParams>,
    net: Option<Network>,
}

impl Regressor {
    pub fn new(params: RegressorParams) -> Self {
        Regressor {
            params: Some(params),
            net: None,
        }
    }

    pub fn is_fitted(&self) -> bool {
        self.net.is_some()
    }

    /// Fits on a seeded train split and reports held-out accuracy.
    pub fn fit(&mut self, features: &[Vec<Real>], labels: &[[Real; 5]], seed: u64) -> Result<FitReport> {
        let params = self.params.unwrap_or_default();
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                got: labels.len(),
            });
        }
        if features.len() < MIN_TRAINING_ROWS {
            return Err(Error::InsufficientData {
                rows: features.len(),
                required: MIN_TRAINING_ROWS,
            });
        }
        let dim = features[0].len();
        if let Some(bad) = features.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
        }
        let mut rng = seeded_rng(seed);
        let mut order: Vec<usize> = (0..features.len()).collect();
        order.shuffle(&mut rng);
        let n_hold = ((features.len() as Real) * params.holdout_fraction).round() as usize;
        let n_hold = n_hold.min(features.len() - 1);
        let (hold_idx, train_idx) = order.split_at(n_hold);
        let train_x: Vec<Vec<Real>> = train_idx.iter().map(|&i| features[i].clone()).collect();
        let train_y: Vec<[Real; 5]> = train_idx.iter().map(|&i| labels[i]).collect();

        let mut keep = Vec::new();
        let mut dropped = Vec::new();
        let (mut mean, mut sd) = (Vec::new(), Vec::new());
        for j in 0..dim {
            let (m, s) = column_stats(&train_x, j);
            if s > 1e-12 {
                keep.push(j);
                mean.push(m);
                sd.push(s);
            } else {
                warn!("{}", Error::DegenerateFeature { column: j });
                dropped.push(j);
            }
        }
        let h = params.hidden;
        let mut net = Network {
            layers: [Dense::new(keep.len(), h, &mut rng), Dense::new(h, h, &mut rng), Dense::new(h, 5, &mut rng)],
            mean,
            sd,
            keep,
        };
        let z: Vec<Vec<Real>> = train_x.iter().map(|x| net.normalize(x)).collect();
        let final_loss = train_network(&mut net, &z, &train_y, &params);
        self.net = Some(net);

        let (eval_idx, eval_rows): (&[usize], usize) = if hold_idx.is_empty() {
            (train_idx, train_idx.len())
        } else {
            (hold_idx, hold_idx.len())
        };
        let preds: Vec<[Real; 5]> = eval_idx.iter().map(|&i| self.predict(&features[i])).collect::<Result<_>>()?;
        let mut rmse = [0.0; 5];
        let mut pearson = [None; 5];
        for k in 0..5 {
            let p: Vec<Real> = preds.iter().map(|r| r[k]).collect();
            let y: Vec<Real> = eval_idx.iter().map(|&i| labels[i][k]).collect();
            rmse[k] = (p.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<Real>() / eval_rows as Real).sqrt();
            pearson[k] = pearson_r(&p, &y);
        }
        Ok(FitReport {
            train_rows: train_idx.len(),
            holdout_rows: hold_idx.len(),
            dropped_columns: dropped,
            rmse,
            pearson,
            final_loss,
        })
    }

    fn network(&self) -> Result<&Network> {
        self.net.as_ref().ok_or(Error::UnfittedModel)
    }

    /// Predicts traits from raw features, standardized with the training statistics.
    pub fn predict(&self, x: &[Real]) -> Result<[Real; 5]> {
        let net = self.network()?;
        let needed = net.keep.iter().max().map_or(0, |&m| m + 1);
        if x.len() < needed {
            return Err(Error::DimensionMismatch { expected: needed, got: x.len() });
        }
        Ok(to5(&net.activations(&net.normalize(x))[3]))
    }

    /// Predicts from features that are already standardized, as produced by
    /// [`bridge_structural`].
    pub fn predict_standardized(&self, z: &[Real]) -> Result<[Real; 5]> {
        let net = self.network()?;
        let zk: Vec<Real> = net.keep.iter().map(|&j| z.get(j).copied().unwrap_or(0.0)).collect();
        Ok(to5(&net.activations(&zk)[3]))
    }
}

fn to5(v: &[Real]) -> [Real; 5] {
    let mut out = [0.0; 5];
    out.copy_from_slice(&v[..5]);
    out
}

/// Convenience wrapper: fit a fresh regressor.
pub fn train_regressor(
    features: &[Vec<Real>],
    labels: &[[Real; 5]],
    params: RegressorParams,
    seed: u64,
) -> Result<(Regressor, FitReport)> {
    let mut r = Regressor::new(params);
    let report = r.fit(features, labels, seed)?;
    Ok((r, report))
}

pub fn predict_bigfive(model: &Regressor, x: &[Real]) -> Result<[Real; 5]> {
    model.predict(x)
}

/// Full-batch Adam on mean squared error. Returns the final training loss.
fn train_network(net: &mut Network, z: &[Vec<Real>], y: &[[Real; 5]], params: &RegressorParams) -> Real {
    let sizes: Vec<usize> = net.layers.iter().map(|l| l.w.len() + l.b.len()).collect();
    let total: usize = sizes.iter().sum();
    let (mut m, mut v) = (vec![0.0; total], vec![0.0; total]);
    let (b1, b2, eps): (Real, Real, Real) = (0.9, 0.999, 1e-8);
    let n = z.len() as Real;
    let mut loss = 0.0;
    for epoch in 1..=params.epochs {
        let mut grads: Vec<(Vec<Real>, Vec<Real>)> =
            net.layers.iter().map(|l| (vec![0.0; l.w.len()], vec![0.0; l.b.len()])).collect();
        loss = 0.0;
        for (x, t) in z.iter().zip(y) {
            let acts = net.activations(x);
            let out = &acts[3];
            // dL/d(pre-activation) at the sigmoid output
            let mut delta: Vec<Real> = (0..5)
                .map(|k| {
                    let e = out[k] - t[k];
                    loss += e * e;
                    2.0 * e * out[k] * (1.0 - out[k]) / (5.0 * n)
                })
                .collect();
            for li in (0..3).rev() {
                let layer = &net.layers[li];
                let input = &acts[li];
                let (gw, gb) = &mut grads[li];
                for o in 0..layer.n_out {
                    gb[o] += delta[o];
                    for i in 0..layer.n_in {
                        gw[o * layer.n_in + i] += delta[o] * input[i];
                    }
                }
                if li > 0 {
                    delta = (0..layer.n_in)
                        .map(|i| {
                            let back: Real = (0..layer.n_out).map(|o| layer.w[o * layer.n_in + i] * delta[o]).sum();
                            back * (1.0 - input[i] * input[i])
                        })
                        .collect();
                }
            }
        }
        loss /= 5.0 * n;
        let c1 = 1.0 - b1.powi(epoch as i32);
        let c2 = 1.0 - b2.powi(epoch as i32);
        let mut k = 0;
        for (layer, (gw, gb)) in net.layers.iter_mut().zip(&grads) {
            for (p, g) in layer.w.iter_mut().chain(layer.b.iter_mut()).zip(gw.iter().chain(gb)) {
                m[k] = b1 * m[k] + (1.0 - b1) * g;
                v[k] = b2 * v[k] + (1.0 - b2) * g * g;
                *p -= params.learning_rate * (m[k] / c1) / ((v[k] / c2).sqrt() + eps);
                k += 1;
            }
        }
    }
    loss
}

/// Pearson correlation, or `None` when either input is constant.
pub fn pearson_r(a: &[Real], b: &[Real]) -> Option<Real> {
    let n = a.len() as Real;
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let (ma, mb) = (a.iter().sum::<Real>() / n, b.iter().sum::<Real>() / n);
    let cov: Real = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: Real = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: Real = b.iter().map(|y| (y - mb).powi(2)).sum();
    if va <= 1e-18 || vb <= 1e-18 {
        return None;
    }
    Some(cov / (va * vb).sqrt())
}

/// Genres present in at least `min_count` items the agent rated 3 or higher.
pub fn interest_tags(ratings: &[(ItemId, u8)], catalog: &ItemCatalog, min_count: usize) -> BTreeSet<String> {
    let liked: BTreeSet<ItemId> = ratings.iter().filter(|&&(_, r)| r >= 3).map(|&(i, _)| i).collect();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for i in liked {
        if let Some(item) = catalog.get(i) {
            for g in &item.genres {
                *counts.entry(g.as_str()).or_default() += 1;
            }
        }
    }
    counts.into_iter().filter(|&(_, c)| c >= min_count.max(1)).map(|(g, _)| g.to_string()).collect()
}

/// Mean embedding of catalog items sharing a genre with `tags`; zero if none.
pub fn initial_preference(tags: &BTreeSet<String>, catalog: &ItemCatalog) -> Vec<Real> {
    let mut acc = vec![0.0; catalog.dim()];
    let mut n = 0usize;
    for item in catalog.iter().filter(|it| it.genres.iter().any(|g| tags.contains(g))) {
        for (a, &x) in acc.iter_mut().zip(&item.embedding) {
            *a += x;
        }
        n += 1;
    }
    if n > 0 {
        for a in &mut acc {
            *a /= n as Real;
        }
    }
    acc
}

/// Builds a fresh agent profile with neutral affect `(0, 0.5)`.
pub fn assemble_profile(
    id: AgentId,
    t: StructuralAttributes,
    b: [Real; 5],
    demographics: Demographics,
    interest_tags: BTreeSet<String>,
    catalog: &ItemCatalog,
    cfg: &SimConfig,
) -> Result<AgentProfile> {
    let b = BigFive::new(b)?;
    let pref = initial_preference(&interest_tags, catalog);
    Ok(AgentProfile {
        id,
        t,
        b,
        demographics,
        interest_tags,
        pref,
        valence: 0.0,
        arousal: 0.5,
        theta0: cfg.motivation.theta0,
        tau: cfg.motivation.tau,
        sigma_rating: cfg.affect.sigma_rating,
        risk_base: cfg.motivation.risk_base,
        memory: EpisodicMemory::new(cfg.affect.lambda_mem),
        trust: TrustBook::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Item;

    fn g(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn path(n: usize) -> Topology {
        let e: Vec<(u32, u32)> = (0..n as u32 - 1).map(|i| (i, i + 1)).collect();
        Topology::from_edges(n, &e).unwrap()
    }

    #[test]
    fn activity_examples() {
        assert_eq!(activity_level(&[]), 0);
        let five: Vec<(ItemId, u8)> = (0..5).map(|i| (ItemId(i), 3)).collect();
        assert_eq!(activity_level(&five), 5);
        assert_eq!(activity_level(&[(ItemId(1), 3), (ItemId(1), 4)]), 1);
    }

    #[test]
    fn diversity_examples() {
        let a = g(&["drama"]);
        assert_eq!(diversity([&a, &a]).unwrap(), 0.0);
        let b = g(&["comedy"]);
        assert!((diversity([&a, &b]).unwrap() - 2f64.ln()).abs() < 1e-12);
        let four = [g(&["a"]), g(&["b"]), g(&["c"]), g(&["d"])];
        assert!((diversity(four.iter()).unwrap() - 4f64.ln()).abs() < 1e-12);
        // a two-genre item splits its mass: {a,b} + {a} -> a: 1.5, b: 0.5
        let ab = g(&["a", "b"]);
        let single = g(&["a"]);
        let expected = -(0.75 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        assert!((diversity([&ab, &single]).unwrap() - expected).abs() < 1e-12);
        assert!(matches!(diversity(std::iter::empty()), Err(Error::EmptyHistory)));
    }

    #[test]
    fn conformity_examples() {
        assert_eq!(conformity_deviation(&[(3.0, 3.0), (4.0, 4.0)]).unwrap(), 0.0);
        assert_eq!(conformity_deviation(&[(5.0, 3.0)]).unwrap(), 4.0);
        assert_eq!(conformity_deviation(&[(4.0, 3.0), (1.0, 3.0)]).unwrap(), 2.5);
        assert!(conformity_deviation(&[]).is_err());
    }

    #[test]
    fn novelty_examples() {
        assert_eq!(novelty_seeking(&[1]).unwrap(), 1.0);
        assert_eq!(novelty_seeking(&[4]).unwrap(), 0.25);
        assert_eq!(novelty_seeking(&[1, 4]).unwrap(), 0.625);
        assert!(novelty_seeking(&[]).is_err());
    }

    #[test]
    fn label_entropy_examples() {
        let t = Topology::from_edges(4, &[(0, 1), (0, 2)]).unwrap();
        assert_eq!(neighbor_label_entropy(&t, 3, &[Some(1), Some(2), Some(3), None]), 0.0);
        assert_eq!(neighbor_label_entropy(&t, 0, &[None, Some(2), Some(2), None]), 0.0);
        assert!((neighbor_label_entropy(&t, 0, &[None, Some(2), Some(5), None]) - 2f64.ln()).abs() < 1e-12);
        let attrs = StructuralAttributes { degree: 0, occupation_id: None, age_group_id: 1, education_id: Some(7) };
        assert_eq!(social_label(&attrs), Some(7));
    }

    #[test]
    fn betweenness_examples() {
        assert_eq!(betweenness::<f64>(&path(3)), vec![0.0, 1.0, 0.0]);
        let star = Topology::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(betweenness::<f64>(&star)[0], 6.0);
        let k4: Vec<(u32, u32)> = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
        assert!(betweenness::<f64>(&Topology::from_edges(4, &k4).unwrap()).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn pagerank_examples() {
        let cycle: Vec<(u32, u32)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        for p in pagerank::<f64>(&Topology::from_edges(6, &cycle).unwrap(), 0.85, 1e-10, 200).unwrap() {
            assert!((p - 1.0 / 6.0).abs() < 1e-10);
        }
        let two = pagerank::<f64>(&path(2), 0.85, 1e-10, 200).unwrap();
        assert!((two[0] - 0.5).abs() < 1e-10 && (two[1] - 0.5).abs() < 1e-10);
        let three = pagerank::<f64>(&path(3), 0.85, 1e-10, 200).unwrap();
        let end = 0.475 / 1.85;
        assert!((three[0] - end).abs() < 1e-9 && (three[2] - end).abs() < 1e-9);
        assert!((three[1] - (1.0 - 2.0 * end)).abs() < 1e-9);
        assert!((three[0] - 0.2567).abs() < 1e-4 && (three[1] - 0.4865).abs() < 1e-4);
        assert!(matches!(pagerank::<f64>(&path(3), 0.85, 1e-30, 3), Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn pagerank_handles_isolated_nodes() {
        let t = Topology::from_edges(4, &[(0, 1)]).unwrap();
        let p = pagerank(&t, 0.85, 1e-12, 500).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!((p[2] - p[3]).abs() < 1e-12);
    }

    fn linear_task(n: usize, noise: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<[f64; 5]>) {
        let mut rng = seeded_rng(seed);
        let w = [[0.3, -0.2, 0.1, 0.05], [-0.1, 0.25, 0.15, -0.1], [0.2, 0.2, -0.2, 0.1], [0.05, -0.3, 0.1, 0.2], [-0.2, 0.1, 0.25, -0.15]];
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for _ in 0..n {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut y = [0.0; 5];
            for k in 0..5 {
                let lin: f64 = (0..4).map(|j| w[k][j] * x[j]).sum();
                y[k] = 0.5 + 0.5 * lin + noise * rng.random_range(-1.0..1.0);
            }
            xs.push(x);
            ys.push(y);
        }
        (xs, ys)
    }

    #[test]
    fn regressor_constant_labels() {
        let (x, _) = linear_task(60, 0.0, 2);
        let y = vec![[0.5; 5]; 60];
        let params = RegressorParams { epochs: 300, ..Default::default() };
        let (model, report) = train_regressor(&x, &y, params, 1).unwrap();
        assert!(report.rmse.iter().all(|&e| e < 0.02));
        for row in &x[..5] {
            assert!(predict_bigfive(&model, row).unwrap().iter().all(|v| (v - 0.5).abs() < 0.05));
        }
        assert_eq!(model.predict(&x[0]).unwrap(), model.predict(&x[0]).unwrap());
    }

    #[test]
    fn regressor_errors() {
        let (x, y) = linear_task(5, 0.0, 2);
        assert!(matches!(train_regressor(&x, &y, RegressorParams::default(), 1), Err(Error::InsufficientData { rows: 5, .. })));
        assert!(matches!(Regressor::new(RegressorParams::default()).predict(&[0.0; 4]), Err(Error::UnfittedModel)));
    }

    #[test]
    fn regressor_drops_constant_column() {
        let (mut x, y) = linear_task(40, 0.0, 3);
        for row in &mut x {
            row[2] = 1.0;
        }
        let params = RegressorParams { epochs: 50, ..Default::default() };
        let (model, report) = train_regressor(&x, &y, params, 1).unwrap();
        assert_eq!(report.dropped_columns, vec![2]);
        assert!(model.predict(&x[0]).unwrap().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn regressor_is_deterministic() {
        let (x, y) = linear_task(40, 0.01, 4);
        let params = RegressorParams { epochs: 100, ..Default::default() };
        let (a, ra) = train_regressor(&x, &y, params, 8).unwrap();
        let (b, rb) = train_regressor(&x, &y, params, 8).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
    }

    #[test]
    fn bridge_inverts_pagerank_and_standardizes() {
        let f = [[1.0, 0.0, 0.0, 0.1], [2.0, 0.5, 1.0, 0.3], [3.0, 1.0, 2.0, 0.6]];
        let z = bridge_structural(&f);
        assert!(z[0][3] > z[2][3]);
        for j in 0..4 {
            let mean: f64 = z.iter().map(|r| r[j]).sum::<f64>() / 3.0;
            assert!(mean.abs() < 1e-12);
        }
        assert_eq!(quantiles(&[1.0, 1.0, 3.0]), vec![0.25, 0.25, 1.0]);
    }

    fn catalog() -> ItemCatalog {
        let mk = |id: u32, genres: &[&str], e: [f64; 2]| Item {
            id: ItemId(id),
            title: format!("m{id}"),
            genres: g(genres),
            language: "en".into(),
            length_minutes: 100.0,
            age_rating: 0,
            embedding: e.to_vec(),
            rating_mean: 3.0,
            rating_var: 1.0,
            popularity: 1,
        };
        ItemCatalog::new(vec![mk(0, &["drama"], [1.0, 0.0]), mk(1, &["drama", "war"], [0.0, 1.0]), mk(2, &["comedy"], [1.0, 1.0])]).unwrap()
    }

    #[test]
    fn tags_and_preference() {
        let c = catalog();
        let tags = interest_tags(&[(ItemId(0), 4), (ItemId(1), 3), (ItemId(2), 2)], &c, 2);
        assert_eq!(tags, g(&["drama"]));
        assert_eq!(initial_preference(&tags, &c), vec![0.5, 0.5]);
        assert_eq!(initial_preference(&BTreeSet::new(), &c), vec![0.0, 0.0]);
    }

    #[test]
    fn assemble_profile_examples() {
        let cfg = SimConfig::default();
        let t = StructuralAttributes { degree: 3, occupation_id: Some(1), age_group_id: 2, education_id: Some(1) };
        let p = assemble_profile(AgentId(0), t.clone(), [0.5; 5], Demographics::default(), BTreeSet::new(), &catalog(), &cfg).unwrap();
        assert_eq!(p.t, t);
        assert_eq!(p.b, BigFive::splat(0.5));
        assert_eq!((p.valence, p.arousal), (0.0, 0.5));
        assert!(matches!(
            assemble_profile(AgentId(0), t, [1.2, 0.5, 0.5, 0.5, 0.5], Demographics::default(), BTreeSet::new(), &catalog(), &cfg),
            Err(Error::InvalidInput(_))
        ));
    }
}
