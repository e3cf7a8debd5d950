//! Individual cognition: forgetting, affect, preference drift and novelty.

use crate::error::{Error, Result};
use crate::model::{EpisodicMemory, ItemId, MemoryEvent, Source};
use crate::scalar::{clamp, cosine, Scalar};
use crate::Real;

/// Exponential forgetting weight `exp(-lambda * dt)`.
#[inline]
pub fn memory_weight<T: Scalar>(delta_t: T, lambda_mem: T) -> T {
    (-lambda_mem * delta_t).exp()
}

pub fn record_event(
    memory: &mut EpisodicMemory,
    t: u32,
    source: Source,
    item: ItemId,
    rating: u8,
    satisfaction: Real,
) -> Result<()> {
    memory.record(MemoryEvent {
        t,
        source,
        item,
        rating,
        satisfaction,
    })
}

/// Valence moves with satisfaction, arousal with its magnitude; both clamped.
pub fn update_affect<T: Scalar>(valence: T, arousal: T, satisfaction: T, sigma_v: T, sigma_a: T) -> (T, T) {
    let v = clamp(valence + sigma_v * satisfaction, -T::one(), T::one());
    let a = clamp(arousal + sigma_a * satisfaction.abs(), T::zero(), T::one());
    (v, a)
}

/// Exponential smoothing of the preference embedding toward `item`.
pub fn update_preference<T: Scalar>(pref: &[T], item: &[T], eta: T) -> Result<Vec<T>> {
    if pref.len() != item.len() {
        return Err(Error::DimensionMismatch {
            expected: pref.len(),
            got: item.len(),
        });
    }
    let keep = T::one() - eta;
    Ok(pref.iter().zip(item).map(|(&p, &e)| keep * p + eta * e).collect())
}

/// Subjective novelty: semantic distance plus a language-mismatch load, capped at 1.
pub fn novelty<T: Scalar>(pref: &[T], item: &[T], language_mismatch: bool, lambda_lang: T) -> T {
    let penalty = if language_mismatch { lambda_lang } else { T::zero() };
    (T::one() - cosine(pref, item) + penalty).min(T::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AgentId;
    use proptest::prelude::*;

    #[test]
    fn memory_weight_examples() {
        assert_eq!(memory_weight(0.0_f64, 0.05), 1.0);
        assert!((memory_weight(10.0_f64, 0.1) - (-1.0_f64).exp()).abs() < 1e-15);
        assert_eq!(memory_weight(1e6_f64, 0.0), 1.0);
    }

    #[test]
    fn record_event_examples() {
        let mut m = EpisodicMemory::new(0.05);
        record_event(&mut m, 2, Source::System, ItemId(1), 4, 0.1).unwrap();
        assert_eq!(m.len(), 1);
        assert!(matches!(
            record_event(&mut m, 1, Source::System, ItemId(2), 4, 0.1),
            Err(Error::TimeRegression { last: 2, got: 1 })
        ));
    }

    #[test]
    fn stale_events_are_pruned_on_insert() {
        // weight(dt) = 5e-5 < 1e-4 at dt = ln(2e4) / lambda
        let lambda = 0.05;
        let dt = ((2e4_f64).ln() / lambda).ceil() as u32;
        assert!(memory_weight(dt as f64, lambda) < 1e-4);
        let mut m = EpisodicMemory::new(lambda);
        record_event(&mut m, 0, Source::Agent(AgentId(3)), ItemId(0), 5, 0.2).unwrap();
        record_event(&mut m, dt, Source::System, ItemId(1), 3, 0.0).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.events()[0].item, ItemId(1));
    }

    #[test]
    fn affect_examples() {
        assert_eq!(update_affect(0.2_f64, 0.5, 0.0, 0.3, 0.2), (0.2, 0.5));
        let (v, _) = update_affect(0.0_f64, 0.5, 1.0, 0.3, 0.2);
        assert!((v - 0.3).abs() < 1e-12);
        let (v, a) = update_affect(0.95_f64, 0.95, 1.0, 0.3, 0.2);
        assert_eq!((v, a), (1.0, 1.0));
    }

    #[test]
    fn preference_examples() {
        let p = [1.0_f64, 0.0];
        assert_eq!(update_preference(&p, &[0.0, 1.0], 0.0).unwrap(), vec![1.0, 0.0]);
        assert_eq!(update_preference(&p, &[0.0, 1.0], 1.0).unwrap(), vec![0.0, 1.0]);
        let q = update_preference(&p, &[0.0, 1.0], 0.1).unwrap();
        assert!((q[0] - 0.9).abs() < 1e-12 && (q[1] - 0.1).abs() < 1e-12);
        assert!(matches!(
            update_preference(&p, &[1.0], 0.1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn novelty_examples() {
        let e = [0.6_f64, 0.8];
        assert!(novelty(&e, &e, false, 0.3).abs() < 1e-12);
        assert!((novelty(&[1.0_f64, 0.0], &[0.0, 1.0], false, 0.3) - 1.0).abs() < 1e-12);
        // cos = 0.9 between (1, 0) and (0.9, sqrt(0.19))
        let item = [0.9_f64, 0.19_f64.sqrt()];
        assert!((novelty(&[1.0, 0.0], &item, true, 0.3) - 0.4).abs() < 1e-12);
        assert_eq!(novelty(&[0.0_f64, 0.0], &e, false, 0.3), 1.0);
        assert!((novelty(&[1.0_f32, 0.0], &[0.9, 0.19_f32.sqrt()], true, 0.3) - 0.4).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn affect_stays_in_box(v in -1.0f64..=1.0, a in 0.0f64..=1.0, m in -1.0f64..=1.0,
                               sv in 0.0f64..1.0, sa in 0.0f64..1.0) {
            let (v2, a2) = update_affect(v, a, m, sv, sa);
            prop_assert!((-1.0..=1.0).contains(&v2));
            prop_assert!((0.0..=1.0).contains(&a2));
            prop_assert!((v2 - v).abs() <= sv + 1e-12);
        }

        #[test]
        fn preference_stays_on_segment(p in proptest::collection::vec(-1.0f64..1.0, 4),
                                       e in proptest::collection::vec(-1.0f64..1.0, 4),
                                       eta in 0.0f64..=1.0) {
            let q = update_preference(&p, &e, eta).unwrap();
            for i in 0..4 {
                let (lo, hi) = (p[i].min(e[i]), p[i].max(e[i]));
                prop_assert!(q[i] >= lo - 1e-12 && q[i] <= hi + 1e-12);
            }
        }

        #[test]
        fn novelty_bounds_and_monotonicity(p in proptest::collection::vec(-1.0f64..1.0, 3),
                                           e in proptest::collection::vec(-1.0f64..1.0, 3),
                                           lang in 0.0f64..1.0) {
            let same = novelty(&p, &e, false, lang);
            let diff = novelty(&p, &e, true, lang);
            prop_assert!((0.0..=1.0).contains(&same));
            prop_assert!((0.0..=1.0).contains(&diff));
            prop_assert!(diff >= same);
            // moving the item toward the preference cannot raise novelty
            let closer = update_preference(&e, &p, 0.5).unwrap();
            if cosine(&p, &closer) >= cosine(&p, &e) {
                prop_assert!(novelty(&p, &closer, false, lang) <= same + 1e-12);
            }
        }
    }
}
