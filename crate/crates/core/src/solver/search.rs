//! Backtracking search for weakly stable matchings over tiered lists.
//!
//! Each agent has a domain of possible partners (itself standing for being
//! single), stored as a bitset. Two rules run to a fixpoint after every
//! decision:
//!
//! * pairing: `y` stays in `x`'s domain only while `x` stays in `y`'s, and an
//!   agent fixed to a partner removes everyone else from that partner's
//!   domain;
//! * stability: when every value left for `x` is strictly worse than some
//!   mutually acceptable `y`, then `y` must end up with someone it ranks at
//!   least as high as `x`, so every worse value (including being single) is
//!   removed from `y`'s domain.
//!
//! When all domains are singletons the assignment is a matching with no
//! blocking pair. Agents are branched on in a fixed order (fewest mutually
//! acceptable agents first, then by id), trying partners best tier first and
//! being single last.

use std::time::{Duration, Instant};

use crate::model::{list_of, AgentId, Matching, PreferenceLists};

use super::Budget;

const NONE: u32 = u32::MAX;

#[derive(Clone)]
struct Domains {
    words: usize,
    bits: Vec<u64>,
}

impl Domains {
    fn full(n: usize, allowed: impl Fn(usize, usize) -> bool) -> Self {
        let words = n.div_ceil(64).max(1);
        let mut bits = vec![0u64; n * words];
        for x in 0..n {
            for v in 0..n {
                if allowed(x, v) {
                    bits[x * words + v / 64] |= 1 << (v % 64);
                }
            }
        }
        Domains { words, bits }
    }

    #[inline]
    fn has(&self, x: usize, v: usize) -> bool {
        self.bits[x * self.words + v / 64] & (1 << (v % 64)) != 0
    }

    #[inline]
    fn clear(&mut self, x: usize, v: usize) -> bool {
        let w = &mut self.bits[x * self.words + v / 64];
        let mask = 1 << (v % 64);
        let had = *w & mask != 0;
        *w &= !mask;
        had
    }

    fn row(&self, x: usize) -> &[u64] {
        &self.bits[x * self.words..(x + 1) * self.words]
    }

    fn size(&self, x: usize) -> u32 {
        self.row(x).iter().map(|w| w.count_ones()).sum()
    }

    fn only(&self, x: usize) -> Option<usize> {
        let mut found = None;
        for (i, &w) in self.row(x).iter().enumerate() {
            if w == 0 {
                continue;
            }
            if found.is_some() || w.count_ones() > 1 {
                return None;
            }
            found = Some(i * 64 + w.trailing_zeros() as usize);
        }
        found
    }
}

/// Why the search stopped early.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Halt {
    Budget,
    Enough,
}

pub(crate) struct Problem {
    ids: Vec<AgentId>,
    /// Mutually acceptable agents of each agent, best tier first.
    prefs: Vec<Vec<usize>>,
    /// `tier[x][y]`: tier of `y` in `x`'s list when mutual, else `NONE`.
    tier: Vec<Vec<u32>>,
    /// Rank of being single: below every tier.
    single_tier: Vec<u32>,
    order: Vec<usize>,
}

impl Problem {
    pub(crate) fn new(agents: &[AgentId], lists: &PreferenceLists) -> Self {
        let n = agents.len();
        let index: std::collections::BTreeMap<&AgentId, usize> =
            agents.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let mut raw = vec![vec![NONE; n]; n];
        let mut single_tier = vec![0; n];
        for (x, a) in agents.iter().enumerate() {
            let list = list_of(lists, a);
            single_tier[x] = list.tier_count() as u32;
            for (t, tier) in list.tiers().iter().enumerate() {
                for b in tier {
                    if let Some(&y) = index.get(b) {
                        if y != x {
                            raw[x][y] = t as u32;
                        }
                    }
                }
            }
        }
        let mut tier = vec![vec![NONE; n]; n];
        let mut prefs = vec![Vec::new(); n];
        for x in 0..n {
            for y in 0..n {
                if raw[x][y] != NONE && raw[y][x] != NONE {
                    tier[x][y] = raw[x][y];
                    prefs[x].push(y);
                }
            }
            let row = &tier[x];
            prefs[x].sort_by_key(|&y| (row[y], y));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&x| (prefs[x].len(), x));
        Problem {
            ids: agents.to_vec(),
            prefs,
            tier,
            single_tier,
            order,
        }
    }

    pub(crate) fn has_mutual_pair(&self) -> bool {
        self.prefs.iter().any(|p| !p.is_empty())
    }

    fn matching(&self, dom: &Domains) -> Matching {
        let pairs = (0..self.ids.len()).filter_map(|x| {
            let v = dom.only(x).expect("leaf domains are singletons");
            (v > x).then(|| (self.ids[x].clone(), self.ids[v].clone()))
        });
        Matching::from_pairs(self.ids.iter().cloned(), pairs)
            .expect("leaf assignment is a matching")
    }
}

/// Per-branch search state.
#[derive(Clone)]
struct State {
    dom: Domains,
    /// Worst rank each agent may still end up with.
    cap: Vec<u32>,
    /// Length of the prefix of `prefs[x]` that `x` has already lost.
    lost: Vec<usize>,
}

pub(crate) struct Search<'p, F> {
    problem: &'p Problem,
    budget: Budget,
    started: Instant,
    pub(crate) nodes: u64,
    on_solution: F,
    queue: Vec<usize>,
    queued: Vec<bool>,
}

impl<'p, F> Search<'p, F>
where
    F: FnMut(Matching) -> bool,
{
    /// `on_solution` returns `false` to stop the search.
    pub(crate) fn new(problem: &'p Problem, budget: Budget, on_solution: F) -> Self {
        let n = problem.ids.len();
        Search {
            problem,
            budget,
            started: Instant::now(),
            nodes: 0,
            on_solution,
            queue: Vec::with_capacity(n),
            queued: vec![false; n],
        }
    }

    pub(crate) fn elapsed(&self) -> Duration {
        self.started.elapsed()
    }

    /// Runs to completion (`Ok`) or until halted.
    pub(crate) fn run(&mut self) -> Result<(), Halt> {
        let p = self.problem;
        let n = p.ids.len();
        let mut state = State {
            dom: Domains::full(n, |x, v| v == x || p.tier[x][v] != NONE),
            cap: p.single_tier.clone(),
            lost: vec![0; n],
        };
        self.queue.clear();
        self.queue.extend(0..n);
        self.queued.iter_mut().for_each(|q| *q = true);
        if !self.propagate(&mut state) {
            return Ok(());
        }
        self.descend(state)
    }

    fn descend(&mut self, state: State) -> Result<(), Halt> {
        self.nodes += 1;
        if let Some(max) = self.budget.max_nodes {
            if self.nodes > max {
                return Err(Halt::Budget);
            }
        }
        if self.nodes.is_multiple_of(256) {
            if let Some(limit) = self.budget.time_limit {
                if self.started.elapsed() > limit {
                    return Err(Halt::Budget);
                }
            }
        }

        let p = self.problem;
        let Some(&x) = p.order.iter().find(|&&x| state.dom.size(x) > 1) else {
            let m = p.matching(&state.dom);
            // The all-single assignment only survives when nobody is
            // mutually acceptable, and it does not count as a solution.
            if m.has_pairs() && !(self.on_solution)(m) {
                return Err(Halt::Enough);
            }
            return Ok(());
        };

        let values: Vec<usize> = p.prefs[x]
            .iter()
            .copied()
            .chain(std::iter::once(x))
            .filter(|&v| state.dom.has(x, v))
            .collect();
        for v in values {
            let mut child = state.clone();
            if self.assign(&mut child, x, v) {
                self.descend(child)?;
            }
        }
        Ok(())
    }

    fn assign(&mut self, state: &mut State, x: usize, v: usize) -> bool {
        let n = self.problem.ids.len();
        for w in 0..n {
            if w != v && state.dom.has(x, w) {
                self.remove(&mut state.dom, x, w);
            }
        }
        self.propagate(state)
    }

    fn push(&mut self, x: usize) {
        if !self.queued[x] {
            self.queued[x] = true;
            self.queue.push(x);
        }
    }

    fn remove(&mut self, dom: &mut Domains, x: usize, v: usize) {
        if dom.clear(x, v) {
            self.push(x);
            if v != x && dom.clear(v, x) {
                self.push(v);
            }
        }
    }

    /// Restricts `y` to partners it ranks at `limit` or better.
    fn cap(&mut self, state: &mut State, y: usize, limit: u32) {
        if limit >= state.cap[y] {
            return;
        }
        state.cap[y] = limit;
        let p = self.problem;
        self.remove(&mut state.dom, y, y);
        for &w in p.prefs[y].iter().rev() {
            if p.tier[y][w] <= limit {
                break;
            }
            self.remove(&mut state.dom, y, w);
        }
    }

    fn propagate(&mut self, state: &mut State) -> bool {
        let p = self.problem;
        let mut ok = true;
        while let Some(x) = self.queue.pop() {
            self.queued[x] = false;
            if !ok {
                continue;
            }
            if state.dom.size(x) == 0 {
                ok = false;
                continue;
            }
            if let Some(v) = state.dom.only(x) {
                if v != x {
                    for &w in &p.prefs[v] {
                        if w != x {
                            self.remove(&mut state.dom, v, w);
                        }
                    }
                    self.remove(&mut state.dom, v, v);
                }
            }

            let prefs = &p.prefs[x];
            let first = (state.lost[x]..prefs.len()).find(|&i| state.dom.has(x, prefs[i]));
            let best = first.map_or(p.single_tier[x], |i| p.tier[x][prefs[i]]);
            // Everyone x ranks above its best remaining option is lost to
            // x, so each of them must do at least as well as x.
            while state.lost[x] < prefs.len() && p.tier[x][prefs[state.lost[x]]] < best {
                let y = prefs[state.lost[x]];
                state.lost[x] += 1;
                self.cap(state, y, p.tier[y][x]);
            }
            // A unique best option y: x either gets y or ends up strictly
            // worse off, so again y must do at least as well as x.
            if let Some(i) = first {
                let y = prefs[i];
                let tied = prefs[i + 1..]
                    .iter()
                    .take_while(|&&w| p.tier[x][w] == best)
                    .any(|&w| state.dom.has(x, w));
                if !tied {
                    self.cap(state, y, p.tier[y][x]);
                }
            }
        }
        self.queue.clear();
        ok
    }
}
