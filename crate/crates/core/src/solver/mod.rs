//! Finding, enumerating and verifying k-stable matchings.
//!
//! A k-stable matching pairs only agents that appear in each other's
//! k-extended lists and admits no k-blocking pair. A solution must match at
//! least one couple: an instance where nobody is mutually acceptable has no
//! solution, even though leaving everyone single is trivially unblocked.

mod oracle;
mod search;

use std::collections::BTreeSet;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::knet::k_extend;
use crate::model::{sort_canonical, AgentId, Instance, Matching, Pair, PreferenceLists};
use crate::stability::blocking_pairs;

pub use oracle::{
    brute_force_oracle, brute_force_oracle_with_bound, brute_force_stable, ORACLE_BOUND,
};

use search::{Halt, Problem, Search};

/// Search limits; `None` means unlimited.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: Option<u64>,
    pub time_limit: Option<Duration>,
}

impl Budget {
    pub const DEFAULT_NODES: u64 = 10_000_000;
    pub const DEFAULT_TIME: Duration = Duration::from_secs(60);

    pub fn unlimited() -> Self {
        Budget {
            max_nodes: None,
            time_limit: None,
        }
    }

    pub fn nodes(max: u64) -> Self {
        Budget {
            max_nodes: Some(max),
            time_limit: None,
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_nodes: Some(Self::DEFAULT_NODES),
            time_limit: Some(Self::DEFAULT_TIME),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Satisfiable(Matching),
    Unsatisfiable,
    Timeout,
}

impl Outcome {
    pub fn matching(&self) -> Option<&Matching> {
        match self {
            Outcome::Satisfiable(m) => Some(m),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Satisfiable(_) => "sat",
            Outcome::Unsatisfiable => "unsat",
            Outcome::Timeout => "timeout",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub outcome: Outcome,
    pub stats: SolveStats,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enumeration {
    /// Distinct solutions in canonical order.
    pub matchings: Vec<Matching>,
    /// True when the whole search space was explored.
    pub complete: bool,
    pub stats: SolveStats,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    StableOk,
    /// Every blocking pair, in canonical order.
    Blocked(Vec<Pair>),
}

impl Certificate {
    pub fn is_stable(&self) -> bool {
        matches!(self, Certificate::StableOk)
    }
}

/// Checks a matching against already extended lists: it must cover exactly
/// `agents`, avoid forbidden pairs and pair only mutually acceptable agents.
pub fn verify_lists(
    agents: &BTreeSet<AgentId>,
    lists: &PreferenceLists,
    forbidden: &BTreeSet<Pair>,
    m: &Matching,
) -> Result<Certificate> {
    for a in agents {
        if m.partner(a).is_none() {
            return Err(Error::MissingAgent(a.clone()));
        }
    }
    if let Some(a) = m.agents().find(|a| !agents.contains(*a)) {
        return Err(Error::UnknownAgent(a.clone()));
    }
    for pair in m.pairs() {
        if forbidden.contains(&pair) {
            return Err(Error::ForbiddenPair(pair));
        }
        let (x, y) = (pair.first(), pair.second());
        let listed = |a: &AgentId, b: &AgentId| lists.get(a).is_some_and(|l| l.contains(b));
        if !listed(x, y) || !listed(y, x) {
            return Err(Error::InvalidKMatching(pair));
        }
    }
    let blocking = blocking_pairs(lists, m)?;
    Ok(if blocking.is_empty() {
        Certificate::StableOk
    } else {
        Certificate::Blocked(blocking.into_iter().collect())
    })
}

/// All k-blocking pairs of `m` under the k-extended lists of `inst`.
pub fn verify_k_stable(inst: &Instance, k: u32, m: &Matching) -> Result<Certificate> {
    let ext = k_extend(inst, k)?;
    verify_lists(&inst.agents, &ext.lists, &inst.forbidden_pairs(), m)
}

fn agents_of(inst: &Instance) -> Vec<AgentId> {
    inst.agents.iter().cloned().collect()
}

/// First stable matching over the given lists in branching order.
pub fn find_stable(agents: &[AgentId], lists: &PreferenceLists, budget: Budget) -> SolveResult {
    let problem = Problem::new(agents, lists);
    let mut found = None;
    let mut search = Search::new(&problem, budget, |m| {
        found = Some(m);
        false
    });
    let halt = if problem.has_mutual_pair() {
        search.run().err()
    } else {
        None
    };
    let stats = SolveStats {
        nodes: search.nodes,
        elapsed: search.elapsed(),
    };
    let outcome = match (found, halt) {
        (Some(m), _) => {
            debug_assert!(blocking_pairs(lists, &m)
                .map(|b| b.is_empty())
                .unwrap_or(false));
            Outcome::Satisfiable(m)
        }
        (None, Some(Halt::Budget)) => Outcome::Timeout,
        (None, _) => Outcome::Unsatisfiable,
    };
    SolveResult { outcome, stats }
}

/// Up to `limit` stable matchings over the given lists, canonically sorted.
pub fn enumerate_stable(
    agents: &[AgentId],
    lists: &PreferenceLists,
    limit: usize,
    budget: Budget,
) -> Enumeration {
    let problem = Problem::new(agents, lists);
    let mut matchings = Vec::new();
    let limit = limit.max(1);
    let mut search = Search::new(&problem, budget, |m| {
        matchings.push(m);
        matchings.len() < limit
    });
    let halt = if problem.has_mutual_pair() {
        search.run().err()
    } else {
        None
    };
    let stats = SolveStats {
        nodes: search.nodes,
        elapsed: search.elapsed(),
    };
    drop(search);
    sort_canonical(&mut matchings);
    Enumeration {
        matchings,
        complete: halt.is_none(),
        stats,
    }
}

pub fn find_k_stable(inst: &Instance, k: u32, budget: Budget) -> Result<SolveResult> {
    inst.ensure_valid()?;
    let ext = k_extend(inst, k)?;
    Ok(find_stable(&agents_of(inst), &ext.lists, budget))
}

pub fn enumerate_k_stable(
    inst: &Instance,
    k: u32,
    limit: usize,
    budget: Budget,
) -> Result<Enumeration> {
    inst.ensure_valid()?;
    let ext = k_extend(inst, k)?;
    Ok(enumerate_stable(
        &agents_of(inst),
        &ext.lists,
        limit,
        budget,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> AgentId {
        AgentId::from(s)
    }

    fn lists(spec: &[(&str, &str)]) -> PreferenceLists {
        spec.iter()
            .map(|(x, l)| (id(x), l.parse().unwrap()))
            .collect()
    }

    fn ids(spec: &[(&str, &str)]) -> Vec<AgentId> {
        spec.iter().map(|(x, _)| id(x)).collect()
    }

    #[test]
    fn single_mutual_pair_is_matched() {
        let spec = [("a", "b"), ("b", "a")];
        let r = find_stable(&ids(&spec), &lists(&spec), Budget::unlimited());
        assert_eq!(r.outcome.matching().unwrap().to_string(), "{a-b}");
    }

    #[test]
    fn no_mutual_pairs_is_unsatisfiable() {
        let spec = [("a", "b"), ("b", "c"), ("c", "a")];
        let r = find_stable(&ids(&spec), &lists(&spec), Budget::unlimited());
        assert_eq!(r.outcome, Outcome::Unsatisfiable);
    }

    #[test]
    fn odd_cycle_has_no_stable_matching() {
        // Classic unsolvable roommates instance.
        let spec = [
            ("a", "b,c,d"),
            ("b", "c,a,d"),
            ("c", "a,b,d"),
            ("d", "a,b,c"),
        ];
        let r = find_stable(&ids(&spec), &lists(&spec), Budget::unlimited());
        assert_eq!(r.outcome, Outcome::Unsatisfiable);
        assert!(
            enumerate_stable(&ids(&spec), &lists(&spec), 10, Budget::unlimited())
                .matchings
                .is_empty()
        );
    }

    #[test]
    fn ties_make_the_odd_cycle_solvable() {
        let spec = [
            ("a", "{b,c},d"),
            ("b", "c,a,d"),
            ("c", "a,b,d"),
            ("d", "a,b,c"),
        ];
        let r = find_stable(&ids(&spec), &lists(&spec), Budget::unlimited());
        let m = r.outcome.matching().expect("weakly stable matching exists");
        assert!(blocking_pairs(&lists(&spec), m).unwrap().is_empty());
    }

    #[test]
    fn node_budget_yields_timeout() {
        let spec = [
            ("a", "{b,c},d"),
            ("b", "c,a,d"),
            ("c", "a,b,d"),
            ("d", "a,b,c"),
        ];
        let r = find_stable(&ids(&spec), &lists(&spec), Budget::nodes(0));
        assert_eq!(r.outcome, Outcome::Timeout);
    }

    #[test]
    fn verify_rejects_non_mutual_pair() {
        let spec = [("a", "b"), ("b", "")];
        let m = Matching::from_pairs(ids(&spec), [(id("a"), id("b"))]).unwrap();
        let agents = ids(&spec).into_iter().collect();
        assert_eq!(
            verify_lists(&agents, &lists(&spec), &BTreeSet::new(), &m),
            Err(Error::InvalidKMatching(Pair::new(id("a"), id("b"))))
        );
    }
}
