//! Instance model: agents, tiered preference lists, unwanted sets and matchings.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::personalize::{CriteriaCatalog, Profile, WeightList};

/// Opaque agent label, unique within an instance.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(id: impl Into<String>) -> Self {
        AgentId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        AgentId(s.to_owned())
    }
}

impl From<String> for AgentId {
    fn from(s: String) -> Self {
        AgentId(s)
    }
}

impl Borrow<str> for AgentId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Unordered pair of distinct agents, stored with the lexicographically
/// smaller id first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair(AgentId, AgentId);

impl Pair {
    /// # Panics
    /// Panics when `x == y`.
    pub fn new(x: AgentId, y: AgentId) -> Self {
        assert!(x != y, "a pair needs two distinct agents, got {x} twice");
        if x < y {
            Pair(x, y)
        } else {
            Pair(y, x)
        }
    }

    pub fn first(&self) -> &AgentId {
        &self.0
    }

    pub fn second(&self) -> &AgentId {
        &self.1
    }

    pub fn contains(&self, x: &AgentId) -> bool {
        &self.0 == x || &self.1 == x
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.0, self.1)
    }
}

/// Preferences as a total preorder: an ordered sequence of tiers, each tier
/// a set of agents the owner is indifferent between. Earlier tiers are
/// strictly preferred, and every listed agent is preferred to being single.
///
/// Agents inside a tier are kept sorted so equal preorders compare equal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RankedList {
    tiers: Vec<Vec<AgentId>>,
}

impl RankedList {
    pub const fn empty() -> Self {
        RankedList { tiers: Vec::new() }
    }

    pub fn new(tiers: Vec<Vec<AgentId>>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(tiers.len());
        for mut tier in tiers {
            if tier.is_empty() {
                return Err(Error::EmptyTier);
            }
            for a in &tier {
                if !seen.insert(a.clone()) {
                    return Err(Error::DuplicateEntry(a.clone()));
                }
            }
            tier.sort();
            out.push(tier);
        }
        Ok(RankedList { tiers: out })
    }

    /// A list without ties.
    pub fn strict<I>(agents: I) -> Result<Self>
    where
        I: IntoIterator<Item = AgentId>,
    {
        RankedList::new(agents.into_iter().map(|a| vec![a]).collect())
    }

    pub fn tiers(&self) -> &[Vec<AgentId>] {
        &self.tiers
    }

    pub fn tier_count(&self) -> usize {
        self.tiers.len()
    }

    /// Number of listed agents.
    pub fn len(&self) -> usize {
        self.tiers.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.tiers.is_empty()
    }

    pub fn is_strict(&self) -> bool {
        self.tiers.iter().all(|t| t.len() == 1)
    }

    pub fn agents(&self) -> impl Iterator<Item = &AgentId> + '_ {
        self.tiers.iter().flatten()
    }

    pub fn agent_set(&self) -> BTreeSet<AgentId> {
        self.agents().cloned().collect()
    }

    pub fn contains(&self, x: &AgentId) -> bool {
        self.agents().any(|a| a == x)
    }

    /// Index of the tier holding `x`.
    pub fn rank_of(&self, x: &AgentId) -> Option<usize> {
        self.tiers.iter().position(|t| t.binary_search(x).is_ok())
    }

    /// True iff `y` sits in a strictly earlier tier than `z`. Agents sharing a
    /// tier never prefer one over the other.
    pub fn prefers(&self, y: &AgentId, z: &AgentId) -> bool {
        match (self.rank_of(y), self.rank_of(z)) {
            (Some(ry), Some(rz)) => ry < rz,
            _ => false,
        }
    }

    /// Tiers of `self` followed by tiers of `other`.
    pub fn concat(&self, other: &RankedList) -> Result<RankedList> {
        if let Some(a) = other.agents().find(|a| self.contains(a)) {
            return Err(Error::Overlap(a.clone()));
        }
        let mut tiers = self.tiers.clone();
        tiers.extend(other.tiers.iter().cloned());
        Ok(RankedList { tiers })
    }

    /// The first `len` tiers.
    pub fn prefix(&self, len: usize) -> RankedList {
        RankedList {
            tiers: self.tiers.iter().take(len).cloned().collect(),
        }
    }
}

impl fmt::Display for RankedList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, tier) in self.tiers.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            if tier.len() == 1 {
                write!(f, "{}", tier[0])?;
            } else {
                f.write_str("{")?;
                for (j, a) in tier.iter().enumerate() {
                    if j > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str("}")?;
            }
        }
        f.write_str(">")
    }
}

/// Parses the compact notation `<e,{a,b},c>`; the angle brackets are optional.
impl FromStr for RankedList {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim();
        let body = body
            .strip_prefix('<')
            .and_then(|b| b.strip_suffix('>'))
            .unwrap_or(body)
            .trim();
        let mut tiers = Vec::new();
        let mut rest = body;
        while !rest.is_empty() {
            if let Some(inner) = rest.strip_prefix('{') {
                let close = inner.find('}').ok_or(Error::EmptyTier)?;
                let tier: Vec<AgentId> = inner[..close]
                    .split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(AgentId::from)
                    .collect();
                tiers.push(tier);
                rest = inner[close + 1..].trim_start();
            } else {
                let end = rest.find(',').unwrap_or(rest.len());
                let token = rest[..end].trim();
                if token.is_empty() {
                    return Err(Error::EmptyTier);
                }
                tiers.push(vec![AgentId::from(token)]);
                rest = &rest[end..];
            }
            rest = rest.trim_start();
            if let Some(r) = rest.strip_prefix(',') {
                rest = r.trim_start();
            }
        }
        RankedList::new(tiers)
    }
}

/// Preference lists keyed by owner; a missing key means an empty list.
pub type PreferenceLists = BTreeMap<AgentId, RankedList>;

static EMPTY_LIST: RankedList = RankedList::empty();
static EMPTY_SET: BTreeSet<AgentId> = BTreeSet::new();

/// Looks up `x`'s list, treating a missing entry as empty.
pub fn list_of<'a>(lists: &'a PreferenceLists, x: &AgentId) -> &'a RankedList {
    lists.get(x).unwrap_or(&EMPTY_LIST)
}

/// A problem instance: agents, stated lists, unwanted sets and, optionally,
/// habit profiles with per-agent criterion weights.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Instance {
    pub agents: BTreeSet<AgentId>,
    pub stated: PreferenceLists,
    pub unwanted: BTreeMap<AgentId, BTreeSet<AgentId>>,
    pub catalog: Option<CriteriaCatalog>,
    pub profiles: BTreeMap<AgentId, Profile>,
    pub weights: BTreeMap<AgentId, WeightList>,
}

impl Instance {
    pub fn new<I>(agents: I) -> Self
    where
        I: IntoIterator<Item = AgentId>,
    {
        Instance {
            agents: agents.into_iter().collect(),
            ..Instance::default()
        }
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn contains(&self, x: &AgentId) -> bool {
        self.agents.contains(x)
    }

    pub fn stated(&self, x: &AgentId) -> &RankedList {
        list_of(&self.stated, x)
    }

    /// `x`'s unwanted set.
    pub fn unwanted_by(&self, x: &AgentId) -> &BTreeSet<AgentId> {
        self.unwanted.get(x).unwrap_or(&EMPTY_SET)
    }

    /// True iff either agent declared the other unwanted.
    pub fn is_forbidden(&self, x: &AgentId, y: &AgentId) -> bool {
        self.unwanted_by(x).contains(y) || self.unwanted_by(y).contains(x)
    }

    /// All forbidden pairs.
    pub fn forbidden_pairs(&self) -> BTreeSet<Pair> {
        self.unwanted
            .iter()
            .flat_map(|(x, set)| {
                set.iter()
                    .filter(move |y| *y != x)
                    .map(move |y| Pair::new(x.clone(), y.clone()))
            })
            .collect()
    }

    /// Stated lists for every agent, with empty lists filled in.
    pub fn stated_lists(&self) -> PreferenceLists {
        self.agents
            .iter()
            .map(|a| (a.clone(), self.stated(a).clone()))
            .collect()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        for a in &self.agents {
            if a.as_str().is_empty() {
                v.push(Violation::EmptyId);
            }
            if a.as_str().contains(['\t', '\n', '\r']) {
                v.push(Violation::ReservedCharacter(a.clone()));
            }
        }
        for (owner, list) in &self.stated {
            if !self.contains(owner) {
                v.push(Violation::UnknownAgent {
                    agent: owner.clone(),
                    owner: None,
                });
            }
            for y in list.agents() {
                if y == owner {
                    v.push(Violation::SelfListed(owner.clone()));
                } else if !self.contains(y) {
                    v.push(Violation::UnknownAgent {
                        agent: y.clone(),
                        owner: Some(owner.clone()),
                    });
                }
                if self.unwanted_by(owner).contains(y) {
                    v.push(Violation::ListedAndUnwanted(owner.clone(), y.clone()));
                }
            }
        }
        for (owner, set) in &self.unwanted {
            if !self.contains(owner) {
                v.push(Violation::UnknownAgent {
                    agent: owner.clone(),
                    owner: None,
                });
            }
            for y in set {
                if y == owner {
                    v.push(Violation::SelfUnwanted(owner.clone()));
                } else if !self.contains(y) {
                    v.push(Violation::UnknownAgent {
                        agent: y.clone(),
                        owner: Some(owner.clone()),
                    });
                }
            }
        }
        self.validate_profiles(&mut v);
        ValidationReport { violations: v }
    }

    fn validate_profiles(&self, v: &mut Vec<Violation>) {
        if let Some(catalog) = &self.catalog {
            let mut names = BTreeSet::new();
            for c in &catalog.criteria {
                if !names.insert(c.name.as_str()) {
                    v.push(Violation::DuplicateCriterion(c.name.clone()));
                }
                if c.choices.is_empty() {
                    v.push(Violation::NoChoices(c.name.clone()));
                }
            }
        }
        let width = self.catalog.as_ref().map(|c| c.criteria.len());
        for (x, profile) in &self.profiles {
            if !self.contains(x) {
                v.push(Violation::UnknownAgent {
                    agent: x.clone(),
                    owner: None,
                });
            }
            let Some(catalog) = &self.catalog else {
                v.push(Violation::MissingCatalog(x.clone()));
                continue;
            };
            if profile.0.len() != catalog.criteria.len() {
                v.push(Violation::ProfileLength {
                    agent: x.clone(),
                    expected: catalog.criteria.len(),
                    found: profile.0.len(),
                });
                continue;
            }
            for (i, (&choice, criterion)) in profile.0.iter().zip(&catalog.criteria).enumerate() {
                if choice == 0 || choice as usize > criterion.choices.len() {
                    v.push(Violation::ChoiceOutOfRange {
                        agent: x.clone(),
                        criterion: i,
                        choice,
                    });
                }
            }
        }
        for (x, weights) in &self.weights {
            if !self.contains(x) {
                v.push(Violation::UnknownAgent {
                    agent: x.clone(),
                    owner: None,
                });
            }
            match width {
                None => v.push(Violation::MissingCatalog(x.clone())),
                Some(w) if weights.0.len() != w => v.push(Violation::WeightLength {
                    agent: x.clone(),
                    expected: w,
                    found: weights.0.len(),
                }),
                Some(_) => {}
            }
        }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(report))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyId,
    ReservedCharacter(AgentId),
    UnknownAgent {
        agent: AgentId,
        owner: Option<AgentId>,
    },
    SelfListed(AgentId),
    SelfUnwanted(AgentId),
    ListedAndUnwanted(AgentId, AgentId),
    DuplicateCriterion(String),
    NoChoices(String),
    MissingCatalog(AgentId),
    ProfileLength {
        agent: AgentId,
        expected: usize,
        found: usize,
    },
    WeightLength {
        agent: AgentId,
        expected: usize,
        found: usize,
    },
    ChoiceOutOfRange {
        agent: AgentId,
        criterion: usize,
        choice: u32,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyId => write!(f, "empty agent id"),
            Violation::ReservedCharacter(a) => {
                write!(f, "agent id {a:?} contains a tab or newline")
            }
            Violation::UnknownAgent {
                agent,
                owner: Some(o),
            } => {
                write!(f, "unknown agent {agent} (referenced by {o})")
            }
            Violation::UnknownAgent { agent, owner: None } => write!(f, "unknown agent {agent}"),
            Violation::SelfListed(a) => write!(f, "self-listed({a})"),
            Violation::SelfUnwanted(a) => write!(f, "self-unwanted({a})"),
            Violation::ListedAndUnwanted(x, y) => write!(f, "listed∧unwanted({x},{y})"),
            Violation::DuplicateCriterion(c) => write!(f, "duplicate criterion {c}"),
            Violation::NoChoices(c) => write!(f, "criterion {c} has no choices"),
            Violation::MissingCatalog(a) => {
                write!(f, "profile data for {a} without a criteria catalog")
            }
            Violation::ProfileLength {
                agent,
                expected,
                found,
            } => {
                write!(
                    f,
                    "profile of {agent} has {found} entries, expected {expected}"
                )
            }
            Violation::WeightLength {
                agent,
                expected,
                found,
            } => {
                write!(
                    f,
                    "weights of {agent} have {found} entries, expected {expected}"
                )
            }
            Violation::ChoiceOutOfRange {
                agent,
                criterion,
                choice,
            } => {
                write!(
                    f,
                    "choice {choice} of {agent} is out of range for criterion {}",
                    criterion + 1
                )
            }
        }
    }
}

/// Every invariant violation found in an instance; empty means valid.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn messages(&self) -> Vec<String> {
        self.violations.iter().map(ToString::to_string).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.messages().join("; "))
    }
}

/// A total, involutive partner assignment; an agent mapped to itself is single.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matching {
    partner: BTreeMap<AgentId, AgentId>,
}

impl Matching {
    pub fn all_single<I>(agents: I) -> Self
    where
        I: IntoIterator<Item = AgentId>,
    {
        Matching {
            partner: agents.into_iter().map(|a| (a.clone(), a)).collect(),
        }
    }

    /// Builds a matching over `agents` from the given couples; everyone
    /// else is single.
    pub fn from_pairs<I, P>(agents: I, pairs: P) -> Result<Self>
    where
        I: IntoIterator<Item = AgentId>,
        P: IntoIterator<Item = (AgentId, AgentId)>,
    {
        let mut m = Matching::all_single(agents);
        for (x, y) in pairs {
            for a in [&x, &y] {
                match m.partner.get(a) {
                    None => return Err(Error::UnknownAgent(a.clone())),
                    Some(p) if p != a => return Err(Error::DuplicateEntry(a.clone())),
                    Some(_) => {}
                }
            }
            if x == y {
                return Err(Error::DuplicateEntry(x));
            }
            m.partner.insert(x.clone(), y.clone());
            m.partner.insert(y, x);
        }
        Ok(m)
    }

    /// Checks that the map is an involution.
    pub fn from_partner_map(partner: BTreeMap<AgentId, AgentId>) -> Result<Self> {
        for (x, y) in &partner {
            match partner.get(y) {
                None => return Err(Error::UnknownAgent(y.clone())),
                Some(back) if back != x => {
                    return Err(Error::NotInvolutive {
                        x: x.clone(),
                        y: y.clone(),
                        back: back.clone(),
                    })
                }
                Some(_) => {}
            }
        }
        Ok(Matching { partner })
    }

    pub fn partner(&self, x: &AgentId) -> Option<&AgentId> {
        self.partner.get(x)
    }

    /// The partner of `x`, or `None` when `x` is single or unknown.
    pub fn mate(&self, x: &AgentId) -> Option<&AgentId> {
        self.partner.get(x).filter(|p| *p != x)
    }

    pub fn is_single(&self, x: &AgentId) -> bool {
        self.partner.get(x) == Some(x)
    }

    pub fn agents(&self) -> impl Iterator<Item = &AgentId> + '_ {
        self.partner.keys()
    }

    pub fn len(&self) -> usize {
        self.partner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partner.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AgentId, &AgentId)> + '_ {
        self.partner.iter()
    }

    /// Matched couples in canonical (sorted) order.
    pub fn pairs(&self) -> Vec<Pair> {
        self.partner
            .iter()
            .filter(|(x, y)| x < y)
            .map(|(x, y)| Pair::new(x.clone(), y.clone()))
            .collect()
    }

    pub fn singles(&self) -> Vec<AgentId> {
        self.partner
            .iter()
            .filter(|(x, y)| x == y)
            .map(|(x, _)| x.clone())
            .collect()
    }

    pub fn has_pairs(&self) -> bool {
        self.partner.iter().any(|(x, y)| x != y)
    }
}

/// Sorts matchings by their sorted couple lists.
pub fn sort_canonical(matchings: &mut [Matching]) {
    matchings.sort_by_cached_key(Matching::pairs);
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut items: Vec<String> = self
            .partner
            .iter()
            .filter(|(x, y)| x <= y)
            .map(|(x, y)| {
                if x == y {
                    x.to_string()
                } else {
                    format!("{x}-{y}")
                }
            })
            .collect();
        items.sort();
        write!(f, "{{{}}}", items.join(", "))
    }
}
