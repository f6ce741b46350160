//! Friend-network extension of preference lists.
//!
//! The acceptability graph joins two agents when at least one of them lists
//! the other and neither declared the other unwanted. Agents at graph
//! distance `d` form a `d`-connected pair. The network serves twice: it
//! breaks ties among inferred candidates (closer first) and it appends, for
//! each `d = 1..=k`, the not yet known agents at distance exactly `d` as one
//! more tier of the k-extended list.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{AgentId, Instance, Pair, PreferenceLists, RankedList};
use crate::personalize::infer_list;

const UNREACHABLE: u32 = u32::MAX;

/// Undirected acceptability graph with all-pairs shortest distances.
#[derive(Clone, Debug)]
pub struct AcceptGraph {
    vertices: Vec<AgentId>,
    index: BTreeMap<AgentId, usize>,
    adjacency: Vec<Vec<usize>>,
    dist: Vec<Vec<u32>>,
}

impl AcceptGraph {
    pub fn vertices(&self) -> &[AgentId] {
        &self.vertices
    }

    pub fn edges(&self) -> BTreeSet<Pair> {
        self.k_connected_pairs(1)
    }

    pub fn has_edge(&self, x: &AgentId, y: &AgentId) -> bool {
        self.distance(x, y) == Some(1)
    }

    pub fn neighbors(&self, x: &AgentId) -> Vec<&AgentId> {
        self.index
            .get(x)
            .map(|&i| {
                self.adjacency[i]
                    .iter()
                    .map(|&j| &self.vertices[j])
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Shortest-path length, `None` when disconnected or unknown.
    pub fn distance(&self, x: &AgentId, y: &AgentId) -> Option<u32> {
        let (&i, &j) = (self.index.get(x)?, self.index.get(y)?);
        let d = self.dist[i][j];
        (d != UNREACHABLE).then_some(d)
    }

    /// Pairs at shortest-path distance exactly `k`.
    pub fn k_connected_pairs(&self, k: u32) -> BTreeSet<Pair> {
        let mut out = BTreeSet::new();
        for i in 0..self.vertices.len() {
            for j in i + 1..self.vertices.len() {
                if self.dist[i][j] == k {
                    out.insert(Pair::new(
                        self.vertices[i].clone(),
                        self.vertices[j].clone(),
                    ));
                }
            }
        }
        out
    }

    fn bfs(adjacency: &[Vec<usize>], source: usize) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; adjacency.len()];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if dist[v] == UNREACHABLE {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// Builds the graph from stated lists only: one-sided listing suffices, any
/// unwanted declaration between the two removes the edge.
pub fn build_accept_graph(inst: &Instance) -> AcceptGraph {
    let vertices: Vec<AgentId> = inst.agents.iter().cloned().collect();
    let index: BTreeMap<AgentId, usize> = vertices
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), i))
        .collect();
    let mut edges = BTreeSet::new();
    for (x, list) in &inst.stated {
        let Some(&i) = index.get(x) else { continue };
        for y in list.agents() {
            let Some(&j) = index.get(y) else { continue };
            if i != j && !inst.is_forbidden(x, y) {
                edges.insert((i.min(j), i.max(j)));
            }
        }
    }
    let mut adjacency = vec![Vec::new(); vertices.len()];
    for &(i, j) in &edges {
        adjacency[i].push(j);
        adjacency[j].push(i);
    }
    let dist = (0..vertices.len())
        .map(|s| AcceptGraph::bfs(&adjacency, s))
        .collect();
    AcceptGraph {
        vertices,
        index,
        adjacency,
        dist,
    }
}

/// Pairs at distance exactly `k`; `P^i` and `P^j` are disjoint for `i != j`.
pub fn k_connected_pairs(g: &AcceptGraph, k: u32) -> BTreeSet<Pair> {
    g.k_connected_pairs(k)
}

/// Splits every tier by ascending distance from `x`; unreachable agents
/// form the last sub-tier. Order across original tiers is kept.
pub fn break_ties(x: &AgentId, inferred: &RankedList, g: &AcceptGraph) -> RankedList {
    let mut tiers = Vec::with_capacity(inferred.tier_count());
    for tier in inferred.tiers() {
        let mut by_distance: BTreeMap<u32, Vec<AgentId>> = BTreeMap::new();
        for y in tier {
            let d = g.distance(x, y).unwrap_or(UNREACHABLE);
            by_distance.entry(d).or_default().push(y.clone());
        }
        tiers.extend(by_distance.into_values());
    }
    RankedList::new(tiers).expect("splitting tiers keeps them disjoint")
}

fn network_tiers(
    x: &AgentId,
    inst: &Instance,
    inferred: &RankedList,
    g: &AcceptGraph,
    k: u32,
) -> RankedList {
    let mut tiers: BTreeMap<u32, Vec<AgentId>> = BTreeMap::new();
    if k > 0 {
        for y in g.vertices() {
            if y == x
                || inst.stated(x).contains(y)
                || inst.unwanted_by(x).contains(y)
                || inferred.contains(y)
            {
                continue;
            }
            if let Some(d) = g.distance(x, y) {
                if d <= k {
                    tiers.entry(d).or_default().push(y.clone());
                }
            }
        }
    }
    RankedList::new(tiers.into_values().collect()).expect("distance classes are disjoint")
}

/// `x`'s network candidates: agents neither stated, unwanted nor inferred
/// by `x`, tiered by distance `1..=k`. Empty for `k = 0`.
pub fn candidate_tiers(x: &AgentId, inst: &Instance, g: &AcceptGraph, k: u32) -> RankedList {
    network_tiers(x, inst, &infer_list(x, inst), g, k)
}

/// Where an entry of a k-extended list comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Provenance {
    Stated,
    Inferred,
    /// Network candidate at the given distance.
    Network(u32),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Stated => f.write_str("stated"),
            Provenance::Inferred => f.write_str("inferred"),
            Provenance::Network(d) => write!(f, "network:{d}"),
        }
    }
}

impl FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "stated" => Ok(Provenance::Stated),
            "inferred" => Ok(Provenance::Inferred),
            _ => s
                .strip_prefix("network:")
                .and_then(|d| d.parse().ok())
                .filter(|&d| d >= 1)
                .map(Provenance::Network)
                .ok_or_else(|| format!("unknown provenance tag {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExtendOptions {
    /// Break inferred ties by network distance even when `k = 0`.
    pub tie_break_at_zero: bool,
}

/// k-extended lists of every agent with per-entry provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KExtendedLists {
    pub k: u32,
    pub lists: PreferenceLists,
    pub provenance: BTreeMap<AgentId, BTreeMap<AgentId, Provenance>>,
}

impl KExtendedLists {
    pub fn list(&self, x: &AgentId) -> &RankedList {
        crate::model::list_of(&self.lists, x)
    }

    /// Whether `x` and `y` each appear in the other's list.
    pub fn mutually_acceptable(&self, x: &AgentId, y: &AgentId) -> bool {
        self.list(x).contains(y) && self.list(y).contains(x)
    }
}

pub fn k_extend(inst: &Instance, k: u32) -> Result<KExtendedLists> {
    k_extend_with(inst, k, ExtendOptions::default())
}

/// Stated list, then inferred list (tie-broken by distance when `k >= 1`),
/// then network candidates up to distance `k`, for every agent.
pub fn k_extend_with(inst: &Instance, k: u32, options: ExtendOptions) -> Result<KExtendedLists> {
    let graph = build_accept_graph(inst);
    let mut lists = PreferenceLists::new();
    let mut provenance = BTreeMap::new();
    for x in &inst.agents {
        let stated = inst.stated(x);
        let mut inferred = infer_list(x, inst);
        if k > 0 || options.tie_break_at_zero {
            inferred = break_ties(x, &inferred, &graph);
        }
        let network = network_tiers(x, inst, &inferred, &graph, k);

        let mut tags = BTreeMap::new();
        tags.extend(stated.agents().map(|y| (y.clone(), Provenance::Stated)));
        tags.extend(inferred.agents().map(|y| (y.clone(), Provenance::Inferred)));
        for y in network.agents() {
            let d = graph
                .distance(x, y)
                .expect("network candidates are reachable");
            tags.insert(y.clone(), Provenance::Network(d));
        }

        let full = stated.concat(&inferred)?.concat(&network)?;
        if tags.len() != full.len() {
            return Err(Error::Overlap(x.clone()));
        }
        lists.insert(x.clone(), full);
        provenance.insert(x.clone(), tags);
    }
    Ok(KExtendedLists {
        k,
        lists,
        provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> AgentId {
        AgentId::from(s)
    }

    fn pairs(spec: &str) -> BTreeSet<Pair> {
        spec.split_whitespace()
            .map(|p| {
                let mut c = p.chars();
                let (x, y) = (c.next().unwrap(), c.next().unwrap());
                Pair::new(id(&x.to_string()), id(&y.to_string()))
            })
            .collect()
    }

    /// Stated lists and unwanted set of the running example; no profiles.
    fn running_example() -> Instance {
        let mut inst = Instance::new(["a", "b", "c", "d", "e"].map(id));
        for (x, l) in [("a", "e"), ("b", "e"), ("c", "b"), ("d", "b"), ("e", "d")] {
            inst.stated.insert(id(x), l.parse().unwrap());
        }
        inst.unwanted.insert(id("b"), [id("d")].into());
        inst
    }

    #[test]
    fn running_example_graph() {
        let g = build_accept_graph(&running_example());
        assert_eq!(g.edges(), pairs("ae bc be de"));
        assert_eq!(k_connected_pairs(&g, 1), g.edges());
        assert_eq!(k_connected_pairs(&g, 2), pairs("ad ab bd ce"));
        assert_eq!(k_connected_pairs(&g, 3), pairs("ac cd"));
        assert!(k_connected_pairs(&g, 4).is_empty());
    }

    #[test]
    fn empty_lists_give_no_edges() {
        let inst = Instance::new(["a", "b", "c"].map(id));
        let g = build_accept_graph(&inst);
        assert!(g.edges().is_empty());
        assert_eq!(g.distance(&id("a"), &id("b")), None);
    }

    #[test]
    fn unwanted_in_return_removes_edge() {
        let mut inst = Instance::new(["x", "y"].map(id));
        inst.stated.insert(id("x"), "y".parse().unwrap());
        inst.unwanted.insert(id("y"), [id("x")].into());
        assert!(build_accept_graph(&inst).edges().is_empty());
    }

    #[test]
    fn tie_break_by_distance() {
        let g = build_accept_graph(&running_example());
        let tied: RankedList = "{a,e}".parse().unwrap();
        assert_eq!(break_ties(&id("c"), &tied, &g).to_string(), "<e,a>");
        // a and d are both at distance 2 from b
        let same: RankedList = "{a,d}".parse().unwrap();
        assert_eq!(break_ties(&id("b"), &same, &g), same);
        let strict: RankedList = "a,e".parse().unwrap();
        assert_eq!(break_ties(&id("c"), &strict, &g), strict);
    }

    #[test]
    fn unreachable_agents_go_last() {
        let mut inst = Instance::new(["a", "b", "z"].map(id));
        inst.stated.insert(id("a"), "b".parse().unwrap());
        let g = build_accept_graph(&inst);
        let tied: RankedList = "{b,z}".parse().unwrap();
        assert_eq!(break_ties(&id("a"), &tied, &g).to_string(), "<b,z>");
    }

    #[test]
    fn candidates_of_running_example() {
        let inst = running_example();
        let g = build_accept_graph(&inst);
        assert_eq!(candidate_tiers(&id("b"), &inst, &g, 1).to_string(), "<c>");
        assert_eq!(candidate_tiers(&id("b"), &inst, &g, 2).to_string(), "<c,a>");
        assert_eq!(
            candidate_tiers(&id("e"), &inst, &g, 2).to_string(),
            "<{a,b},c>"
        );
        assert!(candidate_tiers(&id("e"), &inst, &g, 0).is_empty());
    }

    #[test]
    fn provenance_round_trips() {
        for p in [
            Provenance::Stated,
            Provenance::Inferred,
            Provenance::Network(3),
        ] {
            assert_eq!(p.to_string().parse::<Provenance>(), Ok(p));
        }
        assert!("network:0".parse::<Provenance>().is_err());
        assert!("friend".parse::<Provenance>().is_err());
    }

    #[test]
    fn k_extend_without_profiles() {
        let ext = k_extend(&running_example(), 2).unwrap();
        assert_eq!(ext.list(&id("b")).to_string(), "<e,c,a>");
        assert_eq!(ext.provenance[&id("b")][&id("a")], Provenance::Network(2));
        assert_eq!(ext.provenance[&id("b")][&id("e")], Provenance::Stated);
        let zero = k_extend(&running_example(), 0).unwrap();
        assert_eq!(zero.lists, running_example().stated_lists());
    }
}
