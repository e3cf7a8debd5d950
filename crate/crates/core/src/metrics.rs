//! Ranking quality, distributional distances and behavioural indicators.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{AgentId, BigFive, ItemId};
use crate::scalar::Scalar;
use crate::Real;

/// Additive smoothing applied to both sides of a KL divergence.
pub const KL_EPSILON: f64 = 1e-6;

/// Scores an agent gave to recommended items; 0 means not watched.
pub type ScoreTable = Vec<BTreeMap<ItemId, u8>>;

fn per_agent_mean<F>(ranked: &[Vec<ItemId>], relevant: &[BTreeSet<ItemId>], k: usize, f: F) -> Result<Real>
where
    F: Fn(&[ItemId], &BTreeSet<ItemId>) -> Real,
{
    if ranked.len() != relevant.len() {
        return Err(Error::DimensionMismatch {
            expected: relevant.len(),
            got: ranked.len(),
        });
    }
    let vals: Vec<Real> = ranked
        .iter()
        .zip(relevant)
        .filter(|(_, g)| !g.is_empty())
        .map(|(r, g)| f(&r[..r.len().min(k)], g))
        .collect();
    if vals.is_empty() {
        return Err(Error::AllEmptyGroundTruth);
    }
    Ok(vals.iter().sum::<Real>() / vals.len() as Real)
}

/// Mean per-agent recall of the top `k`, skipping agents without relevant items.
pub fn recall_at_k(ranked: &[Vec<ItemId>], relevant: &[BTreeSet<ItemId>], k: usize) -> Result<Real> {
    per_agent_mean(ranked, relevant, k, |top, g| {
        top.iter().filter(|i| g.contains(i)).count() as Real / g.len() as Real
    })
}

/// Mean per-agent binary-gain NDCG of the top `k`.
pub fn ndcg_at_k(ranked: &[Vec<ItemId>], relevant: &[BTreeSet<ItemId>], k: usize) -> Result<Real> {
    per_agent_mean(ranked, relevant, k, |top, g| {
        let dcg: Real = top
            .iter()
            .enumerate()
            .filter(|(_, i)| g.contains(i))
            .map(|(pos, _)| 1.0 / ((pos + 2) as Real).log2())
            .sum();
        let idcg: Real = (0..g.len().min(k)).map(|pos| 1.0 / ((pos + 2) as Real).log2()).sum();
        dcg / idcg
    })
}

fn smooth<T: Scalar>(p: &[T]) -> Vec<T> {
    let eps = T::lit(KL_EPSILON);
    let total: T = p.iter().map(|&x| x + eps).sum();
    p.iter().map(|&x| (x + eps) / total).collect()
}

/// `KL(P || Q)` in nats after epsilon smoothing and renormalization.
pub fn kl_divergence<T: Scalar>(p: &[T], q: &[T]) -> Result<T> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    let (ps, qs) = (smooth(p), smooth(q));
    let kl: T = ps.iter().zip(&qs).map(|(&a, &b)| a * (a / b).ln()).sum();
    Ok(kl.max(T::zero()))
}

/// One-dimensional earth mover's distance between histograms on ordered bins.
pub fn emd_1d<T: Scalar>(p: &[T], q: &[T], positions: &[T]) -> Result<T> {
    if p.len() != q.len() || positions.len() != p.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: if q.len() != p.len() { q.len() } else { positions.len() },
        });
    }
    let mut cdf = T::zero();
    let mut total = T::zero();
    for j in 0..p.len().saturating_sub(1) {
        cdf += p[j] - q[j];
        total += cdf.abs() * (positions[j + 1] - positions[j]);
    }
    Ok(total)
}

/// Five-point rating scale: bins 1..5 at unit spacing.
pub fn emd_ratings<T: Scalar>(p: &[T], q: &[T]) -> Result<T> {
    let pos: Vec<T> = (1..=p.len()).map(T::count).collect();
    emd_1d(p, q, &pos)
}

/// Normalized histogram of 1..5 ratings; all zeros when `ratings` is empty.
pub fn rating_histogram(ratings: impl IntoIterator<Item = u8>) -> [Real; 5] {
    let mut h = [0.0; 5];
    let mut n = 0usize;
    for r in ratings {
        if (1..=5).contains(&r) {
            h[(r - 1) as usize] += 1.0;
            n += 1;
        }
    }
    if n > 0 {
        for x in &mut h {
            *x /= n as Real;
        }
    }
    h
}

/// Mean l2 distance between initial and final trait vectors.
pub fn personality_change(initial: &BTreeMap<AgentId, BigFive>, final_: &BTreeMap<AgentId, BigFive>) -> Result<Real> {
    if initial.len() != final_.len() || initial.keys().zip(final_.keys()).any(|(a, b)| a != b) {
        return Err(Error::AgentSetMismatch {
            left: initial.len(),
            right: final_.len(),
        });
    }
    if initial.is_empty() {
        return Ok(0.0);
    }
    let sum: Real = initial
        .values()
        .zip(final_.values())
        .map(|(a, b)| a.0.iter().zip(&b.0).map(|(x, y)| (x - y).powi(2)).sum::<Real>().sqrt())
        .sum();
    Ok(sum / initial.len() as Real)
}

/// Mean over agents of their mean score across liked (score >= 3) items.
pub fn satisfaction_ratio(scores: &ScoreTable) -> Result<Real> {
    let means: Vec<Real> = scores
        .iter()
        .filter_map(|row| {
            let liked: Vec<Real> = row.values().filter(|&&s| s >= 3).map(|&s| Real::from(s)).collect();
            (!liked.is_empty()).then(|| liked.iter().sum::<Real>() / liked.len() as Real)
        })
        .collect();
    if means.is_empty() {
        return Err(Error::AllEmptyLikes);
    }
    Ok(means.iter().sum::<Real>() / means.len() as Real)
}

fn score_of(scores: &ScoreTable, agent: usize, item: ItemId) -> u8 {
    scores.get(agent).and_then(|row| row.get(&item)).copied().unwrap_or(0)
}

/// Share of agents whose every recommended item scored at most 2.
pub fn negative_review_rate(scores: &ScoreTable, recommended: &[Vec<ItemId>]) -> Real {
    let (mut neg, mut n) = (0usize, 0usize);
    for (u, recs) in recommended.iter().enumerate() {
        if recs.is_empty() {
            continue;
        }
        n += 1;
        if recs.iter().all(|&i| score_of(scores, u, i) <= 2) {
            neg += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        neg as Real / n as Real
    }
}

/// Mean over agents of the fraction of recommended items rated at least 3.
pub fn acceptance_rate(scores: &ScoreTable, recommended: &[Vec<ItemId>]) -> Real {
    let rates: Vec<Real> = recommended
        .iter()
        .enumerate()
        .filter(|(_, recs)| !recs.is_empty())
        .map(|(u, recs)| recs.iter().filter(|&&i| score_of(scores, u, i) >= 3).count() as Real / recs.len() as Real)
        .collect();
    if rates.is_empty() {
        0.0
    } else {
        rates.iter().sum::<Real>() / rates.len() as Real
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[u32]) -> Vec<ItemId> {
        v.iter().map(|&i| ItemId(i)).collect()
    }

    fn set(v: &[u32]) -> BTreeSet<ItemId> {
        v.iter().map(|&i| ItemId(i)).collect()
    }

    #[test]
    fn recall_examples() {
        assert_eq!(recall_at_k(&[ids(&[1, 2, 3])], &[set(&[1, 3])], 20).unwrap(), 1.0);
        assert_eq!(recall_at_k(&[ids(&[4, 5])], &[set(&[1])], 20).unwrap(), 0.0);
        assert_eq!(recall_at_k(&[ids(&[1, 9, 2])], &[set(&[1, 2, 3, 4])], 20).unwrap(), 0.5);
        assert_eq!(recall_at_k(&[ids(&[1]), ids(&[2])], &[set(&[1]), set(&[])], 20).unwrap(), 1.0);
        assert!(matches!(recall_at_k(&[ids(&[1])], &[set(&[])], 20), Err(Error::AllEmptyGroundTruth)));
    }

    #[test]
    fn ndcg_examples() {
        assert!((ndcg_at_k(&[ids(&[1, 2, 5])], &[set(&[1, 2])], 20).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(ndcg_at_k(&[ids(&[3, 4])], &[set(&[1])], 20).unwrap(), 0.0);
        let v = ndcg_at_k(&[ids(&[7, 1])], &[set(&[1])], 20).unwrap();
        assert!((v - 1.0 / 3f64.log2()).abs() < 1e-12);
        assert!((v - 0.6309).abs() < 1e-4);
    }

    #[test]
    fn kl_examples() {
        assert!(kl_divergence(&[0.2_f64, 0.8], &[0.2, 0.8]).unwrap().abs() < 1e-15);
        let kl = kl_divergence(&[0.5_f64, 0.5], &[0.9, 0.1]).unwrap();
        let hand = 0.5 * (0.5_f64 / 0.9).ln() + 0.5 * (0.5_f64 / 0.1).ln();
        assert!((kl - hand).abs() < 1e-5);
        assert!((kl - 0.5108).abs() < 1e-4);
        assert!(kl_divergence(&[0.0_f64, 1.0], &[0.5, 0.5]).unwrap().is_finite());
        assert!(kl_divergence(&[0.5_f64, 0.5], &[1.0, 0.0]).unwrap().is_finite());
        assert!(matches!(kl_divergence(&[1.0_f64], &[0.5, 0.5]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn emd_examples() {
        let p = [0.1_f64, 0.2, 0.3, 0.2, 0.2];
        assert_eq!(emd_ratings(&p, &p).unwrap(), 0.0);
        assert!((emd_ratings(&[1.0_f64, 0., 0., 0., 0.], &[0., 0., 0., 0., 1.]).unwrap() - 4.0).abs() < 1e-12);
        assert!((emd_ratings(&[0.5_f64, 0.5, 0., 0., 0.], &[0., 0.5, 0.5, 0., 0.]).unwrap() - 1.0).abs() < 1e-12);
        assert!(emd_ratings(&[1.0_f64], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn histogram_normalizes() {
        assert_eq!(rating_histogram([1, 1, 5, 3]), [0.5, 0.0, 0.25, 0.0, 0.25]);
        assert_eq!(rating_histogram([]), [0.0; 5]);
    }

    #[test]
    fn personality_change_examples() {
        let a: BTreeMap<AgentId, BigFive> = [(AgentId(0), BigFive::splat(0.5))].into_iter().collect();
        assert_eq!(personality_change(&a, &a).unwrap(), 0.0);
        let mut moved = BigFive::splat(0.5);
        moved.0[2] = 0.8;
        let b: BTreeMap<AgentId, BigFive> = [(AgentId(0), moved)].into_iter().collect();
        assert!((personality_change(&a, &b).unwrap() - 0.3).abs() < 1e-12);
        let two_a: BTreeMap<_, _> = [(AgentId(0), BigFive::splat(0.5)), (AgentId(1), BigFive::splat(0.5))].into_iter().collect();
        let mut m1 = BigFive::splat(0.5);
        m1.0[0] = 0.6;
        let mut m2 = BigFive::splat(0.5);
        m2.0[4] = 0.2;
        let two_b: BTreeMap<_, _> = [(AgentId(0), m1), (AgentId(1), m2)].into_iter().collect();
        assert!((personality_change(&two_a, &two_b).unwrap() - 0.2).abs() < 1e-12);
        let other: BTreeMap<_, _> = [(AgentId(3), BigFive::splat(0.5))].into_iter().collect();
        assert!(matches!(personality_change(&a, &other), Err(Error::AgentSetMismatch { .. })));
    }

    fn table(rows: &[&[(u32, u8)]]) -> ScoreTable {
        rows.iter().map(|r| r.iter().map(|&(i, s)| (ItemId(i), s)).collect()).collect()
    }

    #[test]
    fn satisfaction_examples() {
        assert_eq!(satisfaction_ratio(&table(&[&[(0, 3), (1, 3)]])).unwrap(), 3.0);
        assert_eq!(satisfaction_ratio(&table(&[&[(0, 5), (1, 4), (2, 1)]])).unwrap(), 4.5);
        assert_eq!(satisfaction_ratio(&table(&[&[(0, 3)], &[(1, 5)]])).unwrap(), 4.0);
        assert!(matches!(satisfaction_ratio(&table(&[&[(0, 2)]])), Err(Error::AllEmptyLikes)));
    }

    #[test]
    fn negative_rate_examples() {
        let recs = vec![ids(&[0, 1]); 4];
        let all_good = table(&[&[(0, 4)], &[(1, 5)], &[(0, 3)], &[(1, 4)]]);
        assert_eq!(negative_review_rate(&all_good, &recs), 0.0);
        let one_bad = table(&[&[(0, 4)], &[(1, 5)], &[(0, 2), (1, 0)], &[(1, 4)]]);
        assert_eq!(negative_review_rate(&one_bad, &recs), 0.25);
        assert_eq!(negative_review_rate(&table(&[&[(0, 2)]]), &[ids(&[0])]), 1.0);
    }

    #[test]
    fn acceptance_examples() {
        let recs = vec![ids(&[0, 1, 2, 3, 4, 5, 6, 7])];
        let all: ScoreTable = vec![(0..8).map(|i| (ItemId(i), 4)).collect()];
        assert_eq!(acceptance_rate(&all, &recs), 1.0);
        assert_eq!(acceptance_rate(&vec![BTreeMap::new()], &recs), 0.0);
        let two = table(&[&[(0, 3), (5, 5), (6, 2)]]);
        assert_eq!(acceptance_rate(&two, &recs), 0.25);
    }
}
