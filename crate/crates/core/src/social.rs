//! Social cognition: intimacy, homophily, trust, risk and reciprocity.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::jaccard;
use crate::model::{Demographics, TrustRecord};
use crate::scalar::{clamp, cosine, sigmoid, Scalar};
use crate::Real;

/// Minutes at which the length term saturates.
pub const LENGTH_SATURATION_MINUTES: f64 = 240.0;
/// Rating variance at which the uncertainty term saturates.
pub const VARIANCE_SATURATION: f64 = 4.0;

/// Structural intimacy: per-layer tie weights aggregated with factors `gamma_l`.
pub fn structural_intimacy<T: Scalar>(weights: &[T], factors: &[T]) -> T {
    weights.iter().zip(factors).map(|(&w, &g)| g * w).sum()
}

/// Quarter-weighted match count over age group, gender, location, language.
pub fn demographic_similarity<T: Scalar>(u: &Demographics, v: &Demographics) -> Result<T> {
    fn req<'a, V>(x: &'a Option<V>, name: &'static str) -> Result<&'a V> {
        x.as_ref().ok_or(Error::MissingAttribute(name))
    }
    let matches = [
        req(&u.age_group, "age_group")? == req(&v.age_group, "age_group")?,
        req(&u.gender, "gender")? == req(&v.gender, "gender")?,
        req(&u.location, "location")? == req(&v.location, "location")?,
        req(&u.language, "language")? == req(&v.language, "language")?,
    ];
    let count = matches.iter().filter(|&&m| m).count();
    Ok(T::count(count) / T::lit(4.0))
}

/// Half personality cosine, half interest-tag Jaccard.
pub fn preference_similarity<T: Scalar, K: Ord>(bu: &[T], bv: &[T], tags_u: &BTreeSet<K>, tags_v: &BTreeSet<K>) -> T {
    let half = T::lit(0.5);
    half * cosine(bu, bv) + half * jaccard::<T, K>(tags_u, tags_v)
}

/// Homophily-boosted intimacy. Zero whenever the structural tie is zero.
pub fn intimacy<T: Scalar>(i_struct: T, s_demo: T, s_pref: T, lambda_demo: T, lambda_pref: T) -> T {
    i_struct * (T::one() + lambda_demo * s_demo + lambda_pref * s_pref)
}

/// Laplace-smoothed approval rate `(accepted + 1) / (offered + 2)`.
pub fn trust_rate<T: Scalar>(accepted: T, offered: T) -> T {
    (accepted + T::one()) / (offered + T::lit(2.0))
}

pub fn trust(record: &TrustRecord) -> Real {
    trust_rate(record.accepted, record.offered)
}

/// Inputs to the risk function, each normalized to `[0, 1]` except intimacy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskInputs<T> {
    pub length: T,
    pub genre_arousal: T,
    pub rating_variance: T,
    pub age_mismatch: T,
    pub language_gap: T,
    pub trust: T,
    /// Raw intimacy; values above 1 are clamped inside [`risk`].
    pub intimacy: T,
    pub neuroticism: T,
    /// Forgetting weight of the latest interaction with the source.
    pub recency: T,
}

impl<T: Scalar> RiskInputs<T> {
    pub fn zero() -> Self {
        RiskInputs {
            length: T::zero(),
            genre_arousal: T::zero(),
            rating_variance: T::zero(),
            age_mismatch: T::zero(),
            language_gap: T::zero(),
            trust: T::zero(),
            intimacy: T::zero(),
            neuroticism: T::zero(),
            recency: T::one(),
        }
    }
}

/// Perceived risk. The base offset is added after the sigmoid, so the result
/// may exceed 1.
pub fn risk<T: Scalar>(x: &RiskInputs<T>, risk_base: T) -> T {
    let l = T::lit;
    let z = l(0.4) * x.length + l(0.5) * x.genre_arousal + l(0.4) * x.recency * x.rating_variance
        + l(0.6) * x.age_mismatch
        + l(0.3) * x.language_gap
        - l(0.8) * x.recency * x.trust
        - l(0.5) * x.intimacy.min(T::one())
        + l(0.5) * x.neuroticism;
    sigmoid(z) + risk_base
}

pub fn normalized_length<T: Scalar>(minutes: T) -> T {
    (minutes / T::lit(LENGTH_SATURATION_MINUTES)).min(T::one())
}

pub fn normalized_variance<T: Scalar>(variance: T) -> T {
    (variance / T::lit(VARIANCE_SATURATION)).min(T::one())
}

/// Highest arousal among the item's genres, falling back to `default`.
pub fn genre_arousal<'a, T: Scalar>(
    genres: impl IntoIterator<Item = &'a String>,
    table: &std::collections::BTreeMap<String, T>,
    default: T,
) -> T {
    genres
        .into_iter()
        .map(|g| table.get(&g.to_lowercase()).copied().unwrap_or(default))
        .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.max(v))))
        .unwrap_or(default)
}

/// 1 when the agent's age group is below the item's age rating.
pub fn age_mismatch<T: Scalar>(agent_age_group: Option<u32>, item_age_rating: u32) -> T {
    match agent_age_group {
        Some(g) if g < item_age_rating => T::one(),
        _ => T::zero(),
    }
}

/// Reciprocity potential from share history, interest overlap and personality fit.
pub fn reciprocity<T: Scalar>(recency: T, r_hist: T, r_pot: T, r_psn: T) -> T {
    T::lit(0.6) * recency * r_hist + T::lit(0.3) * r_pot + T::lit(0.1) * r_psn
}

/// Preference-embedding cosine clamped to `[0, 1]`.
pub fn reciprocity_potential<T: Scalar>(pref_u: &[T], pref_v: &[T]) -> T {
    clamp(cosine(pref_u, pref_v), T::zero(), T::one())
}

/// Extraversion complementarity proxy `1 - |E_u - E_v|`.
pub fn personality_fit<T: Scalar>(extraversion_u: T, extraversion_v: T) -> T {
    T::one() - (extraversion_u - extraversion_v).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use rand::Rng;

    fn demo(age: u32, gender: &str, loc: &str, lang: &str) -> Demographics {
        Demographics {
            age_group: Some(age),
            gender: Some(gender.into()),
            location: Some(loc.into()),
            language: Some(lang.into()),
        }
    }

    fn tags(t: &[&str]) -> BTreeSet<String> {
        t.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn structural_intimacy_examples() {
        assert_eq!(structural_intimacy(&[0.0_f64; 3], &[1.0; 3]), 0.0);
        assert_eq!(structural_intimacy(&[0.6_f64], &[1.0]), 0.6);
        assert!((structural_intimacy(&[0.5_f64, 0.8, 1.0], &[1.0; 3]) - 2.3).abs() < 1e-12);
    }

    #[test]
    fn demographic_examples() {
        let a = demo(2, "f", "x", "en");
        assert_eq!(demographic_similarity::<f64>(&a, &a).unwrap(), 1.0);
        assert_eq!(demographic_similarity::<f64>(&a, &demo(3, "m", "y", "zh")).unwrap(), 0.0);
        assert_eq!(demographic_similarity::<f64>(&a, &demo(2, "m", "y", "en")).unwrap(), 0.5);
        let mut missing = a.clone();
        missing.location = None;
        assert!(matches!(
            demographic_similarity::<f64>(&a, &missing),
            Err(Error::MissingAttribute("location"))
        ));
    }

    #[test]
    fn preference_similarity_examples() {
        let b = [0.2_f64, 0.4, 0.6, 0.8, 0.1];
        let t = tags(&["a", "b"]);
        assert!((preference_similarity(&b, &b, &t, &t) - 1.0).abs() < 1e-12);
        let e1 = [1.0_f64, 0., 0., 0., 0.];
        let e2 = [0.0_f64, 1., 0., 0., 0.];
        assert_eq!(preference_similarity(&e1, &e2, &tags(&["a"]), &tags(&["b"])), 0.0);
        // cos = 0.8 via (1,0,..) vs (0.8, 0.6, ..); Jaccard({a,b},{b,c}) = 1/3
        let b2 = [0.8_f64, 0.6, 0., 0., 0.];
        let s = preference_similarity(&e1, &b2, &tags(&["a", "b"]), &tags(&["b", "c"]));
        assert!((s - (0.4 + 1.0 / 6.0)).abs() < 1e-12);
        assert!((s - 0.5667).abs() < 1e-4);
    }

    #[test]
    fn intimacy_examples() {
        assert_eq!(intimacy(0.0_f64, 1.0, 1.0, 0.5, 0.5), 0.0);
        assert_eq!(intimacy(1.0_f64, 0.0, 0.0, 0.5, 0.5), 1.0);
        assert!((intimacy(0.5_f64, 1.0, 0.5, 0.5, 0.5) - 0.875).abs() < 1e-12);
    }

    #[test]
    fn trust_examples() {
        assert_eq!(trust(&TrustRecord::default()), 0.5);
        let full = TrustRecord { accepted: 10.0, offered: 10.0 };
        assert!((trust(&full) - 11.0 / 12.0).abs() < 1e-12);
        let none = TrustRecord { accepted: 0.0, offered: 10.0 };
        assert!((trust(&none) - 1.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn risk_examples() {
        assert_eq!(risk(&RiskInputs::<f64>::zero(), 0.0), 0.5);
        let trusted = RiskInputs { trust: 1.0, ..RiskInputs::zero() };
        assert!((risk(&trusted, 0.0_f64) - 0.310_025_518_872_388).abs() < 1e-12);
        let worst = RiskInputs {
            length: 1.0,
            genre_arousal: 1.0,
            rating_variance: 1.0,
            age_mismatch: 1.0,
            language_gap: 1.0,
            neuroticism: 1.0,
            ..RiskInputs::zero()
        };
        // z = 0.4 + 0.5 + 0.4 + 0.6 + 0.3 + 0.5 = 2.7
        let k = risk(&worst, 0.1);
        assert!((k - (1.0 / (1.0 + (-2.7_f64).exp()) + 0.1)).abs() < 1e-12);
        assert!(k > 1.0);
    }

    #[test]
    fn risk_normalizations() {
        assert_eq!(normalized_length(120.0_f64), 0.5);
        assert_eq!(normalized_length(480.0_f64), 1.0);
        assert_eq!(normalized_variance(1.0_f64), 0.25);
        let table: std::collections::BTreeMap<String, f64> =
            [("horror".to_string(), 0.9), ("action".to_string(), 0.5)].into_iter().collect();
        let g = tags(&["Action", "Horror"]);
        assert_eq!(genre_arousal(&g, &table, 0.2), 0.9);
        assert_eq!(genre_arousal(&tags(&["comedy"]), &table, 0.2), 0.2);
        assert_eq!(genre_arousal(&BTreeSet::new(), &table, 0.2), 0.2);
        assert_eq!(age_mismatch::<f64>(Some(1), 2), 1.0);
        assert_eq!(age_mismatch::<f64>(Some(2), 2), 0.0);
    }

    #[test]
    fn reciprocity_examples() {
        assert!((reciprocity(1.0_f64, 1.0, 1.0, 1.0) - 1.0).abs() < 1e-12);
        assert_eq!(reciprocity(0.0_f64, 0.0, 0.0, 0.0), 0.0);
        assert!((reciprocity(0.5_f64, 0.8, 0.6, 0.4) - 0.46).abs() < 1e-12);
        assert!((personality_fit(0.9_f64, 0.2) - 0.3).abs() < 1e-12);
        assert_eq!(reciprocity_potential(&[1.0_f64, 0.0], &[-1.0, 0.0]), 0.0);
    }

    #[test]
    #[allow(unused_assignments)]
    fn risk_is_monotone_in_every_input() {
        let mut rng = seeded_rng(5);
        let h = 1e-4;
        for _ in 0..1000 {
            let mut x = RiskInputs::<f64> {
                length: rng.random(),
                genre_arousal: rng.random(),
                rating_variance: rng.random(),
                age_mismatch: rng.random(),
                language_gap: rng.random(),
                trust: rng.random(),
                intimacy: rng.random::<f64>() * 0.99,
                neuroticism: rng.random(),
                recency: 0.01 + 0.99 * rng.random::<f64>(),
            };
            let base = risk(&x, 0.1);
            macro_rules! check {
                ($field:ident, $sign:expr) => {{
                    let saved = x.$field;
                    x.$field += h;
                    let moved = risk(&x, 0.1);
                    x.$field = saved;
                    assert!($sign * (moved - base) > 0.0, stringify!($field));
                }};
            }
            check!(length, 1.0);
            check!(genre_arousal, 1.0);
            check!(rating_variance, 1.0);
            check!(age_mismatch, 1.0);
            check!(language_gap, 1.0);
            check!(neuroticism, 1.0);
            check!(trust, -1.0);
            check!(intimacy, -1.0);
        }
    }

    #[test]
    fn trust_stays_open_interval_and_converges() {
        let mut r = TrustRecord::default();
        for i in 0..10_000 {
            r.offer(i % 4 == 0);
            let t = trust(&r);
            assert!(t > 0.0 && t < 1.0);
        }
        assert!((trust(&r) - 0.25).abs() < 1e-3);
    }
}
