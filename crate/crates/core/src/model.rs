//! Domain types shared by every module.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub u32);

impl AgentId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(pub u32);

impl ItemId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Origin of a stimulus: the embedded recommender or a peer agent.
///
/// Serialized as the string `"system"` or the bare agent id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    System,
    Agent(AgentId),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::System => f.write_str("system"),
            Source::Agent(a) => write!(f, "agent {a}"),
        }
    }
}

impl Serialize for Source {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Source::System => s.serialize_str("system"),
            Source::Agent(a) => s.serialize_u32(a.0),
        }
    }
}

impl<'de> Deserialize<'de> for Source {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Id(u32),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Id(id) => Ok(Source::Agent(AgentId(id))),
            Raw::Name(n) if n == "system" => Ok(Source::System),
            Raw::Name(n) => Err(serde::de::Error::custom(format!("unknown source `{n}`"))),
        }
    }
}

/// Big-Five trait vector (O, C, E, A, N), each component in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BigFive(pub [Real; 5]);

impl BigFive {
    pub const OPENNESS: usize = 0;
    pub const CONSCIENTIOUSNESS: usize = 1;
    pub const EXTRAVERSION: usize = 2;
    pub const AGREEABLENESS: usize = 3;
    pub const NEUROTICISM: usize = 4;

    pub fn new(values: [Real; 5]) -> Result<Self> {
        for (i, v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(v) {
                return Err(Error::InvalidInput(format!(
                    "Big-Five component {i} = {v} outside [0, 1]"
                )));
            }
        }
        Ok(BigFive(values))
    }

    pub fn splat(v: Real) -> Self {
        BigFive([v; 5])
    }

    pub fn extraversion(&self) -> Real {
        self.0[Self::EXTRAVERSION]
    }

    pub fn neuroticism(&self) -> Real {
        self.0[Self::NEUROTICISM]
    }

    pub fn as_slice(&self) -> &[Real] {
        &self.0
    }
}

/// Anonymized structural attributes `t = [degree, occupation, age group, education]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralAttributes {
    pub degree: u32,
    pub occupation_id: Option<u32>,
    pub age_group_id: u32,
    pub education_id: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demographics {
    pub age_group: Option<u32>,
    pub gender: Option<String>,
    pub location: Option<String>,
    pub language: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub id: ItemId,
    pub title: String,
    pub genres: BTreeSet<String>,
    pub language: String,
    pub length_minutes: Real,
    /// Minimum age group the item is rated for.
    pub age_rating: u32,
    /// Unit-norm content embedding; zero only for items without metadata.
    pub embedding: Vec<Real>,
    pub rating_mean: Real,
    pub rating_var: Real,
    pub popularity: u32,
}

/// Items indexed densely by id: `items[i].id == ItemId(i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemCatalog {
    items: Vec<Item>,
}

impl ItemCatalog {
    pub fn new(mut items: Vec<Item>) -> Result<Self> {
        items.sort_by_key(|i| i.id);
        for (pos, item) in items.iter().enumerate() {
            if item.id.index() != pos {
                return Err(Error::InvalidInput(format!(
                    "item ids must be contiguous from 0; found {} at position {pos}",
                    item.id
                )));
            }
            if item.rating_var < 0.0 || !(item.length_minutes > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "item {} has negative rating variance or non-positive length",
                    item.id
                )));
            }
        }
        Ok(ItemCatalog { items })
    }

    pub fn get(&self, id: ItemId) -> Option<&Item> {
        self.items.get(id.index())
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Item> {
        self.items.iter()
    }

    pub fn as_slice(&self) -> &[Item] {
        &self.items
    }

    pub fn dim(&self) -> usize {
        self.items.first().map_or(0, |i| i.embedding.len())
    }

    pub fn into_items(self) -> Vec<Item> {
        self.items
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryEvent {
    pub t: u32,
    pub source: Source,
    pub item: ItemId,
    pub rating: u8,
    pub satisfaction: Real,
}

/// Decaying log of consumption events, ordered by `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodicMemory {
    events: Vec<MemoryEvent>,
    lambda_mem: Real,
}

/// Events whose forgetting weight falls below this are dropped.
pub const MEMORY_HORIZON_WEIGHT: Real = 1e-4;

impl EpisodicMemory {
    pub fn new(lambda_mem: Real) -> Self {
        EpisodicMemory {
            events: Vec::new(),
            lambda_mem,
        }
    }

    pub fn events(&self) -> &[MemoryEvent] {
        &self.events
    }

    pub fn lambda_mem(&self) -> Real {
        self.lambda_mem
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn last_t(&self) -> Option<u32> {
        self.events.last().map(|e| e.t)
    }

    /// Appends an event, then prunes everything past the forgetting horizon.
    pub fn record(&mut self, event: MemoryEvent) -> Result<()> {
        if let Some(last) = self.last_t() {
            if event.t < last {
                return Err(Error::TimeRegression { last, got: event.t });
            }
        }
        let now = event.t;
        self.events.push(event);
        let lambda = self.lambda_mem;
        self.events.retain(|e| {
            crate::cognition::memory_weight(Real::from(now - e.t), lambda) >= MEMORY_HORIZON_WEIGHT
        });
        Ok(())
    }

    /// Most recent event involving `source`, if still remembered.
    pub fn last_from(&self, source: Source) -> Option<&MemoryEvent> {
        self.events.iter().rev().find(|e| e.source == source)
    }

    /// Forgetting weight of the most recent interaction with `source` as seen
    /// at time `now`; 1 when there is none.
    pub fn recency_weight(&self, source: Source, now: u32) -> Real {
        self.last_from(source).map_or(1.0, |e| {
            crate::cognition::memory_weight(Real::from(now.saturating_sub(e.t)), self.lambda_mem)
        })
    }
}

/// Decayed acceptance counters for one recommendation source.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TrustRecord {
    pub accepted: Real,
    pub offered: Real,
}

impl TrustRecord {
    pub fn offer(&mut self, accepted: bool) {
        self.offered += 1.0;
        if accepted {
            self.accepted += 1.0;
        }
    }

    pub fn decay(&mut self, factor: Real) {
        self.accepted *= factor;
        self.offered *= factor;
        if self.accepted > self.offered {
            self.accepted = self.offered;
        }
    }
}

/// Per-source trust state held by an agent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrustBook {
    pub system: TrustRecord,
    pub peers: BTreeMap<AgentId, TrustRecord>,
}

impl TrustBook {
    pub fn get(&self, source: Source) -> TrustRecord {
        match source {
            Source::System => self.system,
            Source::Agent(a) => self.peers.get(&a).copied().unwrap_or_default(),
        }
    }

    pub fn entry(&mut self, source: Source) -> &mut TrustRecord {
        match source {
            Source::System => &mut self.system,
            Source::Agent(a) => self.peers.entry(a).or_default(),
        }
    }

    pub fn decay(&mut self, factor: Real) {
        self.system.decay(factor);
        for r in self.peers.values_mut() {
            r.decay(factor);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentProfile {
    pub id: AgentId,
    pub t: StructuralAttributes,
    pub b: BigFive,
    pub demographics: Demographics,
    pub interest_tags: BTreeSet<String>,
    pub pref: Vec<Real>,
    pub valence: Real,
    pub arousal: Real,
    pub theta0: Real,
    pub tau: Real,
    pub sigma_rating: Real,
    pub risk_base: Real,
    pub memory: EpisodicMemory,
    pub trust: TrustBook,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Watch,
    Skip,
}

/// Sealed log entry for one decision: `(C, I, N, R, K, r, M, theta, shares, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub t: u32,
    pub agent: AgentId,
    pub source: Source,
    pub item: ItemId,
    pub action: Action,
    #[serde(rename = "C")]
    pub motivation: Real,
    #[serde(rename = "I")]
    pub intimacy: Real,
    #[serde(rename = "N")]
    pub novelty: Real,
    #[serde(rename = "R")]
    pub reciprocity: Real,
    #[serde(rename = "K")]
    pub risk: Real,
    pub theta: Real,
    #[serde(rename = "r", default, skip_serializing_if = "Option::is_none")]
    pub rating: Option<u8>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub satisfaction: Option<Real>,
    pub shares: Vec<AgentId>,
}

impl DecisionRecord {
    pub fn watched(&self) -> bool {
        self.action == Action::Watch
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("decision record serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_json_forms() {
        assert_eq!(serde_json::to_string(&Source::System).unwrap(), "\"system\"");
        assert_eq!(serde_json::to_string(&Source::Agent(AgentId(7))).unwrap(), "7");
        let s: Source = serde_json::from_str("12").unwrap();
        assert_eq!(s, Source::Agent(AgentId(12)));
        assert!(serde_json::from_str::<Source>("\"bob\"").is_err());
    }

    #[test]
    fn record_field_order_and_skip_branch() {
        let rec = DecisionRecord {
            t: 3,
            agent: AgentId(1),
            source: Source::System,
            item: ItemId(9),
            action: Action::Skip,
            motivation: 0.1,
            intimacy: 0.0,
            novelty: 0.5,
            reciprocity: 0.0,
            risk: 0.6,
            theta: 0.5,
            rating: None,
            satisfaction: None,
            shares: vec![],
        };
        assert_eq!(
            rec.to_json_line(),
            r#"{"t":3,"agent":1,"source":"system","item":9,"action":"skip","C":0.1,"I":0.0,"N":0.5,"R":0.0,"K":0.6,"theta":0.5,"shares":[]}"#
        );
        let watched = DecisionRecord {
            action: Action::Watch,
            rating: Some(4),
            satisfaction: Some(0.125),
            shares: vec![AgentId(2)],
            ..rec
        };
        let line = watched.to_json_line();
        assert!(line.contains(r#""theta":0.5,"r":4,"M":0.125,"shares":[2]"#), "{line}");
        let back: DecisionRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, watched);
    }

    #[test]
    fn trust_record_keeps_accepted_below_offered() {
        let mut r = TrustRecord::default();
        r.offer(true);
        r.offer(false);
        r.decay(0.5);
        assert!(r.accepted <= r.offered);
        assert_eq!(r.offered, 1.0);
    }

    #[test]
    fn big_five_rejects_out_of_range() {
        assert!(BigFive::new([0.5, 0.5, 1.2, 0.5, 0.5]).is_err());
        assert!(BigFive::new([0.0, 1.0, 0.5, 0.5, 0.5]).is_ok());
    }

    #[test]
    fn catalog_requires_dense_ids() {
        let item = |id| Item {
            id: ItemId(id),
            title: String::new(),
            genres: BTreeSet::new(),
            language: "en".into(),
            length_minutes: 90.0,
            age_rating: 0,
            embedding: vec![],
            rating_mean: 3.0,
            rating_var: 0.0,
            popularity: 0,
        };
        assert!(ItemCatalog::new(vec![item(1), item(0)]).is_ok());
        assert!(ItemCatalog::new(vec![item(0), item(2)]).is_err());
    }
}
