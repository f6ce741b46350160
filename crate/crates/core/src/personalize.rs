//! Criteria-based inferred preferences.
//!
//! Every agent may carry a habit profile (one choice per criterion) and a
//! weight per criterion. An agent `y` that `x` did not list becomes a
//! candidate for `x` when they agree on at least one criterion `x` weighs
//! positively. Candidates are ranked level by level through `x`'s sorted
//! profile: criteria with equal weight form one level, heavier levels come
//! first, and a candidate only competes on a level once it agrees with `x`
//! on every criterion of all heavier levels.

use std::cmp::Reverse;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AgentId, Instance, RankedList};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    /// Choice labels. Their order is kept but carries no meaning here.
    pub choices: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriteriaCatalog {
    pub criteria: Vec<Criterion>,
}

impl CriteriaCatalog {
    pub fn len(&self) -> usize {
        self.criteria.len()
    }

    pub fn is_empty(&self) -> bool {
        self.criteria.is_empty()
    }
}

/// One 1-based choice index per criterion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Profile(pub Vec<u32>);

/// One non-negative importance per criterion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightList(pub Vec<u32>);

/// Criteria sharing one positive weight, with the owner's choices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProfileLevel {
    pub weight: u32,
    /// `(choice, criterion index)` tuples, sorted by criterion.
    pub entries: Vec<(u32, usize)>,
}

/// Levels by strictly decreasing weight; zero-weight criteria are dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SortedProfile {
    pub levels: Vec<ProfileLevel>,
}

impl SortedProfile {
    pub fn from_parts(profile: &Profile, weights: &WeightList) -> SortedProfile {
        let mut by_weight: BTreeMap<Reverse<u32>, Vec<(u32, usize)>> = BTreeMap::new();
        for (i, (&choice, &w)) in profile.0.iter().zip(&weights.0).enumerate() {
            if w > 0 {
                by_weight.entry(Reverse(w)).or_default().push((choice, i));
            }
        }
        SortedProfile {
            levels: by_weight
                .into_iter()
                .map(|(Reverse(weight), entries)| ProfileLevel { weight, entries })
                .collect(),
        }
    }

    /// Ranking key of a candidate: the number of leading levels it fully
    /// agrees on, then its agreement count on the first level where it
    /// does not. `None` when it agrees on no weighted criterion at all.
    fn candidate_key(&self, other: &Profile) -> Option<(usize, usize)> {
        let mut full = 0;
        let mut partial = 0;
        let mut any = false;
        let mut open = true;
        for level in &self.levels {
            let hits = level
                .entries
                .iter()
                .filter(|(choice, i)| other.0.get(*i) == Some(choice))
                .count();
            any |= hits > 0;
            if open {
                if hits == level.entries.len() {
                    full += 1;
                } else {
                    partial = hits;
                    open = false;
                }
            }
        }
        any.then_some((full, partial))
    }
}

/// `x`'s profile grouped into weight levels.
pub fn sorted_profile(x: &AgentId, inst: &Instance) -> Result<SortedProfile> {
    match (inst.profiles.get(x), inst.weights.get(x)) {
        (Some(p), Some(w)) => Ok(SortedProfile::from_parts(p, w)),
        _ => Err(Error::MissingProfile(x.clone())),
    }
}

fn is_candidate(x: &AgentId, y: &AgentId, inst: &Instance) -> bool {
    y != x && !inst.stated(x).contains(y) && !inst.unwanted_by(x).contains(y)
}

/// Whether `y` is a criteria-based candidate for `x`. Agents without a
/// profile are never candidates and have none.
pub fn choice_acceptable(x: &AgentId, y: &AgentId, inst: &Instance) -> bool {
    if !is_candidate(x, y, inst) {
        return false;
    }
    match (sorted_profile(x, inst), inst.profiles.get(y)) {
        (Ok(sp), Some(py)) => sp.candidate_key(py).is_some(),
        _ => false,
    }
}

/// The inferred list of `x` over its choice-acceptable agents.
pub fn infer_list(x: &AgentId, inst: &Instance) -> RankedList {
    let Ok(sp) = sorted_profile(x, inst) else {
        return RankedList::empty();
    };
    let mut groups: BTreeMap<Reverse<(usize, usize)>, Vec<AgentId>> = BTreeMap::new();
    for y in &inst.agents {
        if !is_candidate(x, y, inst) {
            continue;
        }
        if let Some(key) = inst.profiles.get(y).and_then(|py| sp.candidate_key(py)) {
            groups.entry(Reverse(key)).or_default().push(y.clone());
        }
    }
    RankedList::new(groups.into_values().collect())
        .expect("candidate groups are disjoint and non-empty")
}

/// Stated tiers followed by inferred tiers.
pub fn extend_list(stated: &RankedList, inferred: &RankedList) -> Result<RankedList> {
    stated.concat(inferred)
}
