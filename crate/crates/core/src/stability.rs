//! Acceptability, blocking pairs and stability for lists with ties.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{list_of, AgentId, Instance, Matching, Pair, PreferenceLists, RankedList};

/// Agents `x` lists in its stated preferences.
pub fn acceptable_set(inst: &Instance, x: &AgentId) -> Result<BTreeSet<AgentId>> {
    if !inst.contains(x) {
        return Err(Error::UnknownAgent(x.clone()));
    }
    Ok(inst.stated(x).agent_set())
}

/// Unordered pairs listed by both sides.
pub fn mutual_pairs(lists: &PreferenceLists) -> BTreeSet<Pair> {
    let mut out = BTreeSet::new();
    for (x, list) in lists {
        for y in list.agents() {
            if x < y && y != x && list_of(lists, y).contains(x) {
                out.insert(Pair::new(x.clone(), y.clone()));
            }
        }
    }
    out
}

/// Does `owner` (holding `list`) strictly prefer `rival` to its current
/// assignment? Being single ranks below every listed agent; a partner
/// missing from the list ranks like being single.
pub(crate) fn would_switch(list: &RankedList, rival: &AgentId, current: Option<&AgentId>) -> bool {
    let Some(rival_rank) = list.rank_of(rival) else {
        return false;
    };
    match current.and_then(|c| list.rank_of(c)) {
        Some(current_rank) => rival_rank < current_rank,
        None => true,
    }
}

/// All mutually acceptable pairs `{x,y}` not matched together where each
/// side is single or strictly prefers the other to its partner.
pub fn blocking_pairs(lists: &PreferenceLists, m: &Matching) -> Result<BTreeSet<Pair>> {
    let mut out = BTreeSet::new();
    for pair in mutual_pairs(lists) {
        let (x, y) = (pair.first(), pair.second());
        let px = m.partner(x).ok_or_else(|| Error::MissingAgent(x.clone()))?;
        let py = m.partner(y).ok_or_else(|| Error::MissingAgent(y.clone()))?;
        if px == y {
            continue;
        }
        let x_current = (px != x).then_some(px);
        let y_current = (py != y).then_some(py);
        if would_switch(list_of(lists, x), y, x_current)
            && would_switch(list_of(lists, y), x, y_current)
        {
            out.insert(pair);
        }
    }
    Ok(out)
}

pub fn is_stable(lists: &PreferenceLists, m: &Matching) -> Result<bool> {
    Ok(blocking_pairs(lists, m)?.is_empty())
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

    fn pair(x: &str, y: &str) -> Pair {
        Pair::new(id(x), id(y))
    }

    fn table4(k1: bool) -> PreferenceLists {
        if k1 {
            lists(&[
                ("a", "b"),
                ("b", "e,a,{c,d}"),
                ("c", "b,d"),
                ("d", "b,c"),
                ("e", "b"),
            ])
        } else {
            lists(&[
                ("a", "b"),
                ("b", "e,a"),
                ("c", "b,d"),
                ("d", "b,c"),
                ("e", ""),
            ])
        }
    }

    fn abcde(pairs: &[(&str, &str)]) -> Matching {
        Matching::from_pairs(
            ["a", "b", "c", "d", "e"].map(id),
            pairs.iter().map(|(x, y)| (id(x), id(y))),
        )
        .unwrap()
    }

    #[test]
    fn acceptable_set_of_stated_list() {
        let mut inst = Instance::new(["a", "b", "c"].map(id));
        inst.stated.insert(id("c"), "b".parse().unwrap());
        assert_eq!(acceptable_set(&inst, &id("c")).unwrap(), [id("b")].into());
        assert!(acceptable_set(&inst, &id("a")).unwrap().is_empty());
        assert_eq!(
            acceptable_set(&inst, &id("z")),
            Err(Error::UnknownAgent(id("z")))
        );
    }

    #[test]
    fn mutual_pairs_of_table_two_at_k2() {
        let l = lists(&[
            ("a", "e,b,d"),
            ("b", "e,c,a"),
            ("c", "b,e,a"),
            ("d", "b,e,a"),
            ("e", "d,{a,b},c"),
        ]);
        let expected: BTreeSet<Pair> = [
            pair("a", "e"),
            pair("a", "b"),
            pair("a", "d"),
            pair("b", "e"),
            pair("b", "c"),
            pair("c", "e"),
            pair("d", "e"),
        ]
        .into();
        assert_eq!(mutual_pairs(&l), expected);
    }

    #[test]
    fn no_mutual_pairs_in_table_one() {
        let l = lists(&[("a", "e"), ("b", "e"), ("c", "b"), ("d", "b"), ("e", "d")]);
        assert!(mutual_pairs(&l).is_empty());
    }

    #[test]
    fn complete_lists_give_all_pairs() {
        let l = lists(&[
            ("a", "b,c,d"),
            ("b", "c,d,a"),
            ("c", "d,a,b"),
            ("d", "a,b,c"),
        ]);
        assert_eq!(mutual_pairs(&l).len(), 6);
    }

    #[test]
    fn table_four_blocking_pairs() {
        let m = abcde(&[("a", "b"), ("c", "d")]);
        assert!(blocking_pairs(&table4(false), &m).unwrap().is_empty());
        assert!(is_stable(&table4(false), &m).unwrap());
        assert_eq!(
            blocking_pairs(&table4(true), &m).unwrap(),
            [pair("b", "e")].into()
        );
        assert!(!is_stable(&table4(true), &m).unwrap());
    }

    #[test]
    fn all_single_with_empty_lists_is_stable() {
        let l = lists(&[("a", ""), ("b", "")]);
        let m = Matching::all_single(["a", "b"].map(id));
        assert!(is_stable(&l, &m).unwrap());
    }

    #[test]
    fn tied_rival_does_not_block() {
        // b is indifferent between a and c; c strictly prefers b.
        let l = lists(&[("a", "b"), ("b", "{a,c}"), ("c", "b,d"), ("d", "c")]);
        let m = Matching::from_pairs(
            ["a", "b", "c", "d"].map(id),
            [(id("a"), id("b")), (id("c"), id("d"))],
        )
        .unwrap();
        assert!(blocking_pairs(&l, &m).unwrap().is_empty());
    }

    #[test]
    fn missing_agent_is_an_error() {
        let l = lists(&[("a", "b"), ("b", "a")]);
        let m = Matching::all_single([id("a")]);
        assert_eq!(blocking_pairs(&l, &m), Err(Error::MissingAgent(id("b"))));
    }
}
