//! Exhaustive reference solver for small instances.

use crate::error::{Error, Result};
use crate::knet::k_extend;
use crate::model::{sort_canonical, AgentId, Instance, Matching, PreferenceLists};
use crate::stability::is_stable;

/// Default instance size limit of the brute-force oracle.
pub const ORACLE_BOUND: usize = 10;

pub fn brute_force_oracle(inst: &Instance, k: u32) -> Result<Vec<Matching>> {
    brute_force_oracle_with_bound(inst, k, ORACLE_BOUND)
}

/// Every k-stable matching of `inst`, found by enumerating all partitions of
/// the agents into mutually acceptable couples and singles.
pub fn brute_force_oracle_with_bound(
    inst: &Instance,
    k: u32,
    bound: usize,
) -> Result<Vec<Matching>> {
    if inst.len() > bound {
        return Err(Error::TooLarge {
            n: inst.len(),
            bound,
        });
    }
    inst.ensure_valid()?;
    let ext = k_extend(inst, k)?;
    let agents: Vec<AgentId> = inst.agents.iter().cloned().collect();
    Ok(brute_force_stable(&agents, &ext.lists))
}

/// Stable matchings over plain lists, by exhaustive enumeration.
pub fn brute_force_stable(agents: &[AgentId], lists: &PreferenceLists) -> Vec<Matching> {
    let accepts = |x: &AgentId, y: &AgentId| lists.get(x).is_some_and(|l| l.contains(y));
    let mut out = Vec::new();
    let mut pairs = Vec::new();
    let mut used = vec![false; agents.len()];
    partitions(agents, &accepts, &mut used, &mut pairs, &mut |pairs| {
        if pairs.is_empty() {
            return;
        }
        let m = Matching::from_pairs(agents.iter().cloned(), pairs.iter().cloned())
            .expect("partition is a matching");
        if is_stable(lists, &m).expect("matching covers every agent") {
            out.push(m);
        }
    });
    sort_canonical(&mut out);
    out
}

fn partitions<A, F>(
    agents: &[AgentId],
    accepts: &A,
    used: &mut Vec<bool>,
    pairs: &mut Vec<(AgentId, AgentId)>,
    emit: &mut F,
) where
    A: Fn(&AgentId, &AgentId) -> bool,
    F: FnMut(&[(AgentId, AgentId)]),
{
    let Some(x) = used.iter().position(|u| !u) else {
        emit(pairs);
        return;
    };
    used[x] = true;
    partitions(agents, accepts, used, pairs, emit);
    for y in x + 1..agents.len() {
        if !used[y] && accepts(&agents[x], &agents[y]) && accepts(&agents[y], &agents[x]) {
            used[y] = true;
            pairs.push((agents[x].clone(), agents[y].clone()));
            partitions(agents, accepts, used, pairs, emit);
            pairs.pop();
            used[y] = false;
        }
    }
    used[x] = false;
}
