//! Planted-community synthetic population for desk-scale runs.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{with_rating_stats, NodeRecord, RatingRow};
use crate::config::PopulationConfig;
use crate::error::{Error, Result};
use crate::model::{AgentId, Demographics, Item, ItemCatalog, ItemId, StructuralAttributes};
use crate::personality::{behavioral_features, standardize_behavioral};
use crate::rng::{seeded_rng, Purpose, RngStream};
use crate::scalar::cosine;
use crate::Real;

pub const GENRES: [&str; 8] = ["action", "comedy", "drama", "horror", "romance", "scifi", "thriller", "war"];
pub const EMBEDDING_DIM: usize = 8;

/// Maps standardized behavioural features to planted trait offsets.
const TRAIT_LOADINGS: [[Real; 4]; 5] = [
    [0.10, 0.60, -0.20, 0.40],
    [0.50, -0.30, -0.40, 0.10],
    [0.60, 0.20, 0.10, -0.30],
    [-0.20, 0.10, -0.60, 0.20],
    [-0.30, -0.20, 0.50, 0.30],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticFixture {
    pub items: ItemCatalog,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<(u32, u32)>,
    pub ratings: Vec<RatingRow>,
    pub labels: BTreeMap<u32, [Real; 5]>,
    pub community: Vec<usize>,
    pub planted_pref: Vec<Vec<Real>>,
}

impl SyntheticFixture {
    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("fixture serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn unit<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<Real> {
    let n = Normal::new(0.0, 1.0).expect("unit normal");
    let v: Vec<Real> = (0..dim).map(|_| n.sample(rng)).collect();
    normalized(v)
}

fn normalized(mut v: Vec<Real>) -> Vec<Real> {
    let norm = v.iter().map(|x| x * x).sum::<Real>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

fn jitter<R: Rng + ?Sized>(base: &[Real], noise: Real, rng: &mut R) -> Vec<Real> {
    let n = Normal::new(0.0, 1.0).expect("unit normal");
    let scale = noise / (base.len() as Real).sqrt();
    normalized(base.iter().map(|&x| x + scale * n.sample(rng)).collect())
}

fn community_of(u: usize, n: usize, c: usize) -> usize {
    (u * c / n.max(1)).min(c - 1)
}

fn community_genres(c: usize) -> [&'static str; 2] {
    [GENRES[(2 * c) % GENRES.len()], GENRES[(2 * c + 1) % GENRES.len()]]
}

/// Generates the full fixture from `seed`.
pub fn synth_population(p: &PopulationConfig, seed: u64) -> Result<SyntheticFixture> {
    if p.n_agents == 0 || p.m_items == 0 || p.communities == 0 {
        return Err(Error::constraint("population", "n_agents, m_items and communities must be at least 1"));
    }
    let root = seeded_rng(seed);
    let mut rng: RngStream = root.substream(Purpose::Population, 0, 0);
    let (n, m, c) = (p.n_agents, p.m_items, p.communities);

    let centroids: Vec<Vec<Real>> = (0..c).map(|_| unit(&mut rng, EMBEDDING_DIM)).collect();

    let mut items = Vec::with_capacity(m);
    for i in 0..m {
        let k = i % c;
        let own = community_genres(k);
        let mut genres: BTreeSet<String> = BTreeSet::new();
        genres.insert(own[rng.random_range(0..2)].to_string());
        if rng.random::<Real>() < 0.4 {
            genres.insert(own[rng.random_range(0..2)].to_string());
        }
        if rng.random::<Real>() < 0.2 {
            genres.insert(GENRES.choose(&mut rng).expect("nonempty").to_string());
        }
        let roll: Real = rng.random();
        items.push(Item {
            id: ItemId(i as u32),
            title: format!("Feature {i:04}"),
            genres,
            language: if rng.random::<Real>() < 0.85 { "en" } else { "es" }.into(),
            length_minutes: rng.random_range(80.0..180.0_f64).round(),
            age_rating: if roll < 0.8 { 0 } else if roll < 0.95 { 2 } else { 4 },
            embedding: jitter(&centroids[k], p.embedding_noise, &mut rng),
            rating_mean: 0.0,
            rating_var: 0.0,
            popularity: 0,
        });
    }
    let by_cluster: Vec<Vec<usize>> = (0..c).map(|k| (0..m).filter(|i| i % c == k).collect()).collect();

    let community: Vec<usize> = (0..n).map(|u| community_of(u, n, c)).collect();
    let planted_pref: Vec<Vec<Real>> = community.iter().map(|&k| jitter(&centroids[k], p.embedding_noise, &mut rng)).collect();

    let mut nodes = Vec::with_capacity(n);
    for u in 0..n {
        let k = community[u];
        let age = rng.random_range(1..=5u32);
        let occupation = if rng.random::<Real>() < 0.6 { k as u32 } else { rng.random_range(0..8u32) };
        let education = if rng.random::<Real>() < 0.9 { Some(rng.random_range(0..4u32)) } else { None };
        let location = if rng.random::<Real>() < 0.7 { format!("region{k}") } else { format!("region{}", rng.random_range(0..c)) };
        nodes.push(NodeRecord {
            id: AgentId(u as u32),
            attributes: StructuralAttributes {
                degree: 0,
                occupation_id: Some(occupation),
                age_group_id: age,
                education_id: education,
            },
            demographics: Demographics {
                age_group: Some(age),
                gender: Some(if rng.random::<bool>() { "f" } else { "m" }.into()),
                location: Some(location),
                language: Some(if rng.random::<Real>() < 0.9 { "en" } else { "es" }.into()),
            },
        });
    }

    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let prob = if community[u] == community[v] { p.intra_edge_prob } else { p.inter_edge_prob };
            if rng.random::<Real>() < prob {
                edges.push((u as u32, v as u32));
            }
        }
    }

    let noise = Normal::new(0.0, 0.5).expect("rating noise");
    let per_agent = p.seed_ratings_per_agent.min(m);
    let mut ratings = Vec::with_capacity(n * per_agent);
    let mut ts = 0i64;
    for u in 0..n {
        let own = &by_cluster[community[u]];
        let n_own = ((per_agent as Real) * p.favoured_share).round() as usize;
        let mut chosen: BTreeSet<usize> = own.choose_multiple(&mut rng, n_own.min(own.len())).copied().collect();
        let mut pool: Vec<usize> = (0..m).filter(|i| !chosen.contains(i)).collect();
        pool.shuffle(&mut rng);
        chosen.extend(pool.into_iter().take(per_agent - chosen.len()));
        let mut order: Vec<usize> = chosen.into_iter().collect();
        order.shuffle(&mut rng);
        for i in order {
            let expected = 3.0 + 2.0 * cosine(&planted_pref[u], &items[i].embedding);
            let r = (expected + noise.sample(&mut rng)).round().clamp(1.0, 5.0) as u8;
            ratings.push(RatingRow {
                user_id: u as u32,
                item_id: ItemId(i as u32),
                rating: r,
                timestamp: ts,
            });
            ts += 1;
        }
    }

    let items = with_rating_stats(ItemCatalog::new(items)?, &ratings)?;
    let labels = planted_labels(&items, &ratings, n, &mut rng)?;
    Ok(SyntheticFixture {
        items,
        nodes,
        edges,
        ratings,
        labels,
        community,
        planted_pref,
    })
}

/// Traits as a fixed linear map of standardized behavioural features plus noise.
fn planted_labels(items: &ItemCatalog, ratings: &[RatingRow], n: usize, rng: &mut RngStream) -> Result<BTreeMap<u32, [Real; 5]>> {
    let mut per_user: Vec<Vec<(ItemId, u8)>> = vec![Vec::new(); n];
    for r in ratings {
        per_user[r.user_id as usize].push((r.item_id, r.rating));
    }
    let means: Vec<Real> = items.iter().map(|i| i.rating_mean).collect();
    let pops: Vec<u32> = items.iter().map(|i| i.popularity).collect();
    let mut ids = Vec::new();
    let mut feats = Vec::new();
    for (u, rs) in per_user.iter().enumerate() {
        if rs.is_empty() {
            continue;
        }
        ids.push(u as u32);
        feats.push(behavioral_features(rs, items, &means, &pops)?.to_array());
    }
    let z = standardize_behavioral(&feats);
    let noise = Normal::new(0.0, 0.02).expect("label noise");
    Ok(ids
        .into_iter()
        .zip(z)
        .map(|(id, zr)| {
            let mut b = [0.0; 5];
            for k in 0..5 {
                let lin: Real = (0..4).map(|j| TRAIT_LOADINGS[k][j] * zr[j]).sum();
                b[k] = (0.5 + 0.12 * lin + noise.sample(rng)).clamp(0.0, 1.0);
            }
            (id, b)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::jaccard;
    use crate::personality::interest_tags;

    fn small(n: usize, m: usize) -> PopulationConfig {
        PopulationConfig {
            n_agents: n,
            m_items: m,
            ..PopulationConfig::default()
        }
    }

    #[test]
    fn single_agent_fixture() {
        let f = synth_population(&small(1, 10), 3).unwrap();
        assert_eq!(f.nodes.len(), 1);
        assert!(f.edges.is_empty());
        assert_eq!(f.ratings.len(), 10);
    }

    #[test]
    fn same_seed_same_fixture() {
        let a = synth_population(&small(30, 40), 11).unwrap();
        let b = synth_population(&small(30, 40), 11).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        let c = synth_population(&small(30, 40), 12).unwrap();
        assert_ne!(a.fingerprint(), c.fingerprint());
    }

    #[test]
    fn planted_communities_are_detectable() {
        let f = synth_population(&small(200, 500), 42).unwrap();
        let tags: Vec<BTreeSet<String>> = (0..200)
            .map(|u| {
                let rs: Vec<(ItemId, u8)> = f.ratings.iter().filter(|r| r.user_id == u).map(|r| (r.item_id, r.rating)).collect();
                interest_tags(&rs, &f.items, 2)
            })
            .collect();
        let (mut intra, mut ni, mut inter, mut nx) = (0.0, 0, 0.0, 0);
        for u in 0..200 {
            for v in u + 1..200 {
                let j: f64 = jaccard(&tags[u], &tags[v]);
                if f.community[u] == f.community[v] {
                    intra += j;
                    ni += 1;
                } else {
                    inter += j;
                    nx += 1;
                }
            }
        }
        assert!(intra / ni as f64 > inter / nx as f64);
        let intra_edges = f.edges.iter().filter(|&&(u, v)| f.community[u as usize] == f.community[v as usize]).count();
        assert!(intra_edges * 2 > f.edges.len());
        assert!(f.labels.values().all(|b| b.iter().all(|x| (0.0..=1.0).contains(x))));
    }
}
