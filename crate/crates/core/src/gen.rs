//! Random benchmark instances and instance metrics.
//!
//! Generation follows a fixed draw order so that a seed fully determines the
//! instance:
//!
//! 1. acceptability: one Bernoulli(`p`) draw per unordered pair `(i, j)`,
//!    `i < j`, in lexicographic agent order;
//! 2. stated lists: for each agent in id order, a uniform shuffle of its
//!    neighbours (listed in id order before shuffling), from the same stream;
//! 3. truncation to the first `L` entries (no randomness);
//! 4. profiles, from a separate stream seeded by `profile_seed`: a uniform
//!    `floor(rate * n)`-subset of respondents, then for each respondent in id
//!    order one choice per criterion followed by one weight per criterion;
//! 5. optional unwanted declarations, from a stream seeded by
//!    `profile_seed ^ UNWANTED_SALT`: one Bernoulli draw per ordered pair
//!    `(x, y)` with `y` not listed by `x`.
//!
//! Batches derive the seed of instance `i` as `seed ^ i`.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{AgentId, Instance, PreferenceLists, RankedList};
use crate::personalize::{CriteriaCatalog, Criterion, Profile, WeightList};
use crate::stability::mutual_pairs;

const UNWANTED_SALT: u64 = 0x756e_7761_6e74_6564;

/// Default number of choices per criterion.
pub const DEFAULT_CHOICES: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub truncate: Option<usize>,
    pub criteria_count: usize,
    pub choices_per_criterion: usize,
    pub response_rate: f64,
    pub profile_seed: u64,
    pub unwanted_prob: f64,
}

impl GenSpec {
    pub fn new(n: usize, p: f64, seed: u64) -> Self {
        GenSpec {
            n,
            p,
            seed,
            truncate: None,
            criteria_count: 0,
            choices_per_criterion: DEFAULT_CHOICES,
            response_rate: 0.0,
            profile_seed: seed,
            unwanted_prob: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_owned()));
        if self.n < 2 {
            return bad("at least two agents are required");
        }
        if !(0.0..=1.0).contains(&self.p) {
            return bad("edge probability must lie in [0, 1]");
        }
        if self.truncate == Some(0) {
            return bad("truncation length must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.response_rate) {
            return bad("response rate must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.unwanted_prob) {
            return bad("unwanted probability must lie in [0, 1]");
        }
        if self.criteria_count > 0 && self.choices_per_criterion == 0 {
            return bad("criteria need at least one choice");
        }
        Ok(())
    }

    /// The spec of the `i`-th instance of a batch.
    pub fn for_instance(&self, i: u64) -> GenSpec {
        GenSpec {
            seed: self.seed ^ i,
            profile_seed: self.profile_seed ^ i,
            ..self.clone()
        }
    }
}

/// Benchmark recipes: HMA keeps lists around three entries long
/// (c.d. 0.075, 0.05, 0.0375, 0.03, 0.02, 0.015 for n = 40 ... 200), LMA
/// starts from c.d. 0.25. Both truncate lists to five entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Hma,
    Lma,
}

impl Preset {
    pub const TRUNCATE: usize = 5;

    pub fn edge_probability(self, n: usize) -> f64 {
        match self {
            Preset::Hma => match n {
                40 => 0.075,
                60 => 0.05,
                80 => 0.0375,
                100 => 0.03,
                150 => 0.02,
                200 => 0.015,
                _ => (3.0 / n as f64).min(1.0),
            },
            Preset::Lma => 0.25,
        }
    }

    pub fn spec(self, n: usize, seed: u64) -> GenSpec {
        GenSpec {
            truncate: Some(Self::TRUNCATE),
            ..GenSpec::new(n, self.edge_probability(n), seed)
        }
    }
}

/// `n` ids that sort numerically: `a01`, `a02`, ...
pub fn agent_ids(n: usize) -> Vec<AgentId> {
    let width = n.to_string().len();
    (1..=n)
        .map(|i| AgentId::new(format!("a{i:0width$}")))
        .collect()
}

/// Erdős–Rényi acceptability graph with uniformly shuffled strict lists.
pub fn gen_er_sri(spec: &GenSpec) -> Result<Instance> {
    spec.validate()?;
    let ids = agent_ids(spec.n);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut neighbours = vec![Vec::new(); spec.n];
    for i in 0..spec.n {
        for j in i + 1..spec.n {
            if rng.gen_bool(spec.p) {
                neighbours[i].push(j);
                neighbours[j].push(i);
            }
        }
    }
    let mut inst = Instance::new(ids.iter().cloned());
    for (i, mut list) in neighbours.into_iter().enumerate() {
        list.sort_unstable();
        list.shuffle(&mut rng);
        let ranked = RankedList::strict(list.into_iter().map(|j| ids[j].clone()))?;
        inst.stated.insert(ids[i].clone(), ranked);
    }
    Ok(inst)
}

/// Keeps the first `len` entries of each strict list.
pub fn truncate_lists(inst: &Instance, len: usize) -> Result<Instance> {
    let mut out = inst.clone();
    for (x, list) in out.stated.iter_mut() {
        if !list.is_strict() {
            return Err(Error::TiesInTruncation(x.clone()));
        }
        *list = list.prefix(len);
    }
    Ok(out)
}

pub fn populate_profiles(
    inst: &Instance,
    criteria_count: usize,
    response_rate: f64,
    profile_seed: u64,
) -> Result<Instance> {
    populate_profiles_with(
        inst,
        criteria_count,
        DEFAULT_CHOICES,
        response_rate,
        profile_seed,
    )
}

/// Gives a random `floor(rate * n)`-subset of agents uniform choices in
/// `1..=choices` and uniform weights in `0..=criteria_count`.
pub fn populate_profiles_with(
    inst: &Instance,
    criteria_count: usize,
    choices: usize,
    response_rate: f64,
    profile_seed: u64,
) -> Result<Instance> {
    if !(0.0..=1.0).contains(&response_rate) {
        return Err(Error::InvalidSpec(
            "response rate must lie in [0, 1]".into(),
        ));
    }
    let respondents = (response_rate * inst.len() as f64).floor() as usize;
    if criteria_count == 0 || respondents == 0 {
        return Ok(inst.clone());
    }
    if choices == 0 {
        return Err(Error::InvalidSpec(
            "criteria need at least one choice".into(),
        ));
    }
    let mut out = inst.clone();
    out.catalog = Some(CriteriaCatalog {
        criteria: (1..=criteria_count)
            .map(|i| Criterion {
                name: format!("b{i}"),
                choices: (1..=choices).map(|c| format!("c{i}{c}")).collect(),
            })
            .collect(),
    });
    let mut rng = ChaCha8Rng::seed_from_u64(profile_seed);
    let agents: Vec<&AgentId> = inst.agents.iter().collect();
    let mut chosen: Vec<&AgentId> = agents
        .choose_multiple(&mut rng, respondents)
        .copied()
        .collect();
    chosen.sort();
    for x in chosen {
        let profile = (0..criteria_count)
            .map(|_| rng.gen_range(1..=choices as u32))
            .collect();
        let weights = (0..criteria_count)
            .map(|_| rng.gen_range(0..=criteria_count as u32))
            .collect();
        out.profiles.insert(x.clone(), Profile(profile));
        out.weights.insert(x.clone(), WeightList(weights));
    }
    Ok(out)
}

/// Each agent declares each agent it does not list unwanted with
/// probability `prob`.
pub fn inject_unwanted(inst: &Instance, prob: f64, seed: u64) -> Instance {
    let mut out = inst.clone();
    if prob <= 0.0 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ UNWANTED_SALT);
    for x in &inst.agents {
        let stated = inst.stated(x);
        let set: BTreeSet<AgentId> = inst
            .agents
            .iter()
            .filter(|y| *y != x && !stated.contains(y))
            .filter(|_| rng.gen_bool(prob.min(1.0)))
            .cloned()
            .collect();
        if !set.is_empty() {
            out.unwanted.insert(x.clone(), set);
        }
    }
    out
}

/// The full pipeline: graph, lists, truncation, profiles, unwanted sets.
pub fn generate(spec: &GenSpec) -> Result<Instance> {
    let mut inst = gen_er_sri(spec)?;
    if let Some(len) = spec.truncate {
        inst = truncate_lists(&inst, len)?;
    }
    inst = populate_profiles_with(
        &inst,
        spec.criteria_count,
        spec.choices_per_criterion,
        spec.response_rate,
        spec.profile_seed,
    )?;
    Ok(inject_unwanted(
        &inst,
        spec.unwanted_prob,
        spec.profile_seed,
    ))
}

/// List entries divided by `n (n - 1)`.
pub fn lists_completeness(n: usize, lists: &PreferenceLists) -> Result<f64> {
    if n < 2 {
        return Err(Error::TooFewAgents(n));
    }
    let entries: usize = lists.values().map(RankedList::len).sum();
    Ok(entries as f64 / (n * (n - 1)) as f64)
}

/// Completeness degree of the stated lists.
pub fn completeness_degree(inst: &Instance) -> Result<f64> {
    lists_completeness(inst.len(), &inst.stated)
}

/// Fraction of directed list entries `(x, y)` that are reciprocated.
pub fn mutual_acceptability_rate(lists: &PreferenceLists) -> Result<f64> {
    let total: usize = lists.values().map(RankedList::len).sum();
    if total == 0 {
        return Err(Error::NoEntries);
    }
    Ok(2.0 * mutual_pairs(lists).len() as f64 / total as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaClass {
    Hma,
    Lma,
}

impl MaClass {
    pub fn label(self) -> &'static str {
        match self {
            MaClass::Hma => "HMA",
            MaClass::Lma => "LMA",
        }
    }
}

pub const HMA_THRESHOLD: f64 = 0.75;

pub fn classify(rate: f64) -> MaClass {
    if rate >= HMA_THRESHOLD {
        MaClass::Hma
    } else {
        MaClass::Lma
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> AgentId {
        AgentId::from(s)
    }

    #[test]
    fn zero_probability_gives_empty_lists() {
        let inst = gen_er_sri(&GenSpec::new(10, 0.0, 1)).unwrap();
        assert!(inst.stated.values().all(RankedList::is_empty));
        assert_eq!(completeness_degree(&inst).unwrap(), 0.0);
    }

    #[test]
    fn full_probability_gives_complete_strict_lists() {
        let inst = gen_er_sri(&GenSpec::new(4, 1.0, 9)).unwrap();
        for (x, list) in &inst.stated {
            assert!(list.is_strict());
            assert_eq!(list.len(), 3);
            assert!(!list.contains(x));
        }
        assert_eq!(completeness_degree(&inst).unwrap(), 1.0);
        assert_eq!(mutual_acceptability_rate(&inst.stated).unwrap(), 1.0);
    }

    #[test]
    fn truncation_keeps_prefixes() {
        let mut inst = Instance::new((1..=9).map(|i| id(&format!("v{i}"))));
        inst.stated
            .insert(id("v9"), "v1,v2,v3,v4,v5,v6,v7,v8".parse().unwrap());
        inst.stated.insert(id("v1"), "v2,v3,v4".parse().unwrap());
        let t = truncate_lists(&inst, 5).unwrap();
        assert_eq!(t.stated(&id("v9")).to_string(), "<v1,v2,v3,v4,v5>");
        assert_eq!(t.stated(&id("v1")), inst.stated(&id("v1")));
    }

    #[test]
    fn truncation_rejects_ties() {
        let mut inst = Instance::new(["a", "b", "c"].map(id));
        inst.stated.insert(id("a"), "{b,c}".parse().unwrap());
        assert_eq!(
            truncate_lists(&inst, 1),
            Err(Error::TiesInTruncation(id("a")))
        );
    }

    #[test]
    fn profiles_respect_response_rate() {
        let inst = gen_er_sri(&GenSpec::new(10, 0.3, 5)).unwrap();
        assert_eq!(populate_profiles(&inst, 2, 0.0, 3).unwrap(), inst);
        let all = populate_profiles(&inst, 2, 1.0, 3).unwrap();
        assert_eq!(all.profiles.len(), 10);
        assert!(all.profiles.values().all(|p| p.0.len() == 2));
        assert!(all
            .weights
            .values()
            .all(|w| w.0.len() == 2 && w.0.iter().all(|&v| v <= 2)));
        let half = populate_profiles(&inst, 5, 0.5, 3).unwrap();
        assert_eq!(half.profiles.len(), 5);
        assert!(half.validate().is_valid());
    }

    #[test]
    fn completeness_needs_two_agents() {
        assert_eq!(
            completeness_degree(&Instance::new([id("a")])),
            Err(Error::TooFewAgents(1))
        );
    }

    #[test]
    fn map_edge_cases() {
        let one_sided: PreferenceLists = [
            (id("x"), "y".parse().unwrap()),
            (id("y"), RankedList::empty()),
        ]
        .into();
        assert_eq!(mutual_acceptability_rate(&one_sided).unwrap(), 0.0);
        let empty: PreferenceLists = [(id("x"), RankedList::empty())].into();
        assert_eq!(mutual_acceptability_rate(&empty), Err(Error::NoEntries));
    }

    #[test]
    fn classification_threshold() {
        assert_eq!(classify(0.875), MaClass::Hma);
        assert_eq!(classify(0.75), MaClass::Hma);
        assert_eq!(classify(0.5), MaClass::Lma);
    }

    #[test]
    fn spec_validation() {
        assert!(GenSpec::new(1, 0.5, 0).validate().is_err());
        assert!(GenSpec::new(5, 1.5, 0).validate().is_err());
        let mut s = GenSpec::new(5, 0.5, 0);
        s.truncate = Some(0);
        assert!(s.validate().is_err());
    }

    #[test]
    fn hma_preset_keeps_expected_degree_three() {
        for n in [40, 60, 80, 100, 150, 200] {
            let p = Preset::Hma.edge_probability(n);
            assert!((p * n as f64 - 3.0).abs() < 1e-9, "n={n} p={p}");
        }
    }
}
