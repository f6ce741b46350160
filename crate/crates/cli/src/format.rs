//! Instance files (JSON) and matching files (tab-separated).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use ksrti_core::knet::KExtendedLists;
use ksrti_core::personalize::{CriteriaCatalog, Criterion, Profile, WeightList};
use ksrti_core::{AgentId, Instance, Matching, RankedList};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// On-disk instance. `provenance` is only written by `extend` and is
/// ignored when solving.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub agents: Vec<AgentId>,
    pub preferences: BTreeMap<AgentId, Vec<Vec<AgentId>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub unwanted: BTreeMap<AgentId, Vec<AgentId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criteria: Option<Vec<Criterion>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub profiles: BTreeMap<AgentId, Profile>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub weights: BTreeMap<AgentId, WeightList>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<AgentId, BTreeMap<AgentId, String>>,
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> Self {
        InstanceFile {
            agents: inst.agents.iter().cloned().collect(),
            preferences: inst
                .stated
                .iter()
                .map(|(x, l)| (x.clone(), l.tiers().to_vec()))
                .collect(),
            unwanted: inst
                .unwanted
                .iter()
                .map(|(x, s)| (x.clone(), s.iter().cloned().collect()))
                .collect(),
            criteria: inst.catalog.as_ref().map(|c| c.criteria.clone()),
            profiles: inst.profiles.clone(),
            weights: inst.weights.clone(),
            provenance: BTreeMap::new(),
        }
    }

    /// Lists of a k-extension as a plain instance: the extended lists become
    /// the stated preferences, unwanted sets are kept, profiles dropped.
    pub fn from_extension(inst: &Instance, ext: &KExtendedLists) -> Self {
        let mut file = InstanceFile::from_instance(inst);
        file.preferences = ext
            .lists
            .iter()
            .map(|(x, l)| (x.clone(), l.tiers().to_vec()))
            .collect();
        file.criteria = None;
        file.profiles.clear();
        file.weights.clear();
        file.provenance = ext
            .provenance
            .iter()
            .map(|(x, tags)| {
                (
                    x.clone(),
                    tags.iter()
                        .map(|(y, t)| (y.clone(), t.to_string()))
                        .collect(),
                )
            })
            .collect();
        file
    }

    /// Structural conversion; instance invariants are checked separately.
    pub fn to_instance(&self) -> Result<Instance, CliError> {
        let mut agents = BTreeSet::new();
        for a in &self.agents {
            if !agents.insert(a.clone()) {
                return Err(CliError::Format(format!("duplicate agent {a}")));
            }
        }
        let mut inst = Instance::new(agents);
        for (x, tiers) in &self.preferences {
            let list = RankedList::new(tiers.clone())
                .map_err(|e| CliError::Format(format!("preferences of {x}: {e}")))?;
            inst.stated.insert(x.clone(), list);
        }
        for (x, ys) in &self.unwanted {
            inst.unwanted
                .insert(x.clone(), ys.iter().cloned().collect());
        }
        inst.catalog = self
            .criteria
            .clone()
            .map(|criteria| CriteriaCatalog { criteria });
        inst.profiles = self.profiles.clone();
        inst.weights = self.weights.clone();
        Ok(inst)
    }
}

pub fn serialize_instance(inst: &Instance) -> String {
    to_json(&InstanceFile::from_instance(inst))
}

pub fn to_json(file: &InstanceFile) -> String {
    let mut s = serde_json::to_string_pretty(file).expect("instance files serialize");
    s.push('\n');
    s
}

/// Parses and validates an instance file.
pub fn parse_instance(text: &str) -> Result<Instance, CliError> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| CliError::Format(e.to_string()))?;
    let inst = file.to_instance()?;
    inst.ensure_valid()?;
    Ok(inst)
}

/// One `<id>\t<partner or ->` line per agent, sorted by id.
pub fn write_matching(m: &Matching) -> String {
    let mut out = String::new();
    for (x, y) in m.iter() {
        let partner = if x == y { "-" } else { y.as_str() };
        writeln!(out, "{x}\t{partner}").unwrap();
    }
    out
}

pub fn parse_matching(text: &str) -> Result<Matching, CliError> {
    let mut partner = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let (Some(x), Some(y), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(CliError::Format(format!(
                "matching line {}: expected two tab-separated fields",
                n + 1
            )));
        };
        let x = AgentId::from(x.trim());
        let y = match y.trim() {
            "-" => x.clone(),
            other => AgentId::from(other),
        };
        if partner.insert(x.clone(), y).is_some() {
            return Err(CliError::Format(format!(
                "agent {x} appears twice in the matching"
            )));
        }
    }
    Ok(Matching::from_partner_map(partner)?)
}
