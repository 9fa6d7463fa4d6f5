//! The cost order on hypergraphs.
//!
//! `A ≤ A1` when the two are comparable by a homomorphism and `A1` can be
//! built from `A` by elementary construction moves: add a node, add a link,
//! split a node. Every move adds exactly one atom, so any construction of
//! `A1` that passes through `A` is a shortest one.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;

use super::HeytingError;
use crate::hypergraph::{
    canonical_form, find_homomorphisms, AtomId, HomSearch, Hypergraph, Label, LinkIndex,
};

/// Construction states explored before giving up.
pub const DEFAULT_COST_ORDER_STATES: usize = 20_000;

pub fn cost_leq(a: &Hypergraph, a1: &Hypergraph) -> Result<bool, HeytingError> {
    cost_leq_bounded(a, a1, DEFAULT_COST_ORDER_STATES)
}

type Sig = (Option<String>, usize);

struct Budget {
    node_types: BTreeMap<Option<String>, usize>,
    link_sigs: BTreeMap<Sig, usize>,
    nodes: usize,
    links: usize,
}

impl Budget {
    fn of(g: &Hypergraph) -> Self {
        let idx = LinkIndex::build(g);
        let mut node_types = BTreeMap::new();
        for n in g.nodes() {
            *node_types
                .entry(n.type_name().map(String::from))
                .or_insert(0) += 1;
        }
        let mut link_sigs = BTreeMap::new();
        for l in g.links().filter(|l| idx.resolve(l.id()) == l.id()) {
            *link_sigs
                .entry((l.type_name().map(String::from), l.targets().len()))
                .or_insert(0) += 1;
        }
        Budget {
            node_types,
            link_sigs,
            nodes: g.node_count(),
            links: idx.distinct(),
        }
    }

    fn fits(&self, other: &Budget) -> bool {
        self.nodes <= other.nodes
            && self.links <= other.links
            && self
                .node_types
                .iter()
                .all(|(t, c)| other.node_types.get(t).is_some_and(|m| c <= m))
            && self
                .link_sigs
                .iter()
                .all(|(t, c)| other.link_sigs.get(t).is_some_and(|m| c <= m))
    }
}

fn comparable(a: &Hypergraph, b: &Hypergraph) -> Result<bool, HeytingError> {
    let search = HomSearch::default().with_max_results(1);
    for (x, y) in [(a, b), (b, a)] {
        let r = find_homomorphisms(x, y, &search);
        if !r.homs.is_empty() {
            return Ok(true);
        }
        if r.truncated {
            return Err(HeytingError::UndecidedAtScale);
        }
    }
    Ok(false)
}

fn canon(g: &Hypergraph) -> Result<String, HeytingError> {
    canonical_form(g).map_err(|_| HeytingError::UndecidedAtScale)
}

fn tuples(pool: &[AtomId], arity: usize) -> Vec<Vec<AtomId>> {
    let mut out = alloc::vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                pool.iter().map(move |x| {
                    let mut t = t.clone();
                    t.push(*x);
                    t
                })
            })
            .collect();
    }
    out
}

fn successors(g: &Hypergraph, goal: &Budget, flat: bool) -> Vec<Hypergraph> {
    let mut out = Vec::new();
    for ty in goal.node_types.keys() {
        let mut h = g.clone();
        h.add_node(ty.as_deref().map(Label::of));
        out.push(h);
    }
    let idx = LinkIndex::build(g);
    let pool: Vec<AtomId> = if flat {
        g.node_ids()
    } else {
        g.atoms().map(|a| a.id()).collect()
    };
    for (ty, arity) in goal.link_sigs.keys() {
        for t in tuples(&pool, *arity) {
            if idx.get(ty.as_deref(), &t).is_some() {
                continue;
            }
            let mut h = g.clone();
            h.add_link(t, ty.as_deref().map(Label::of))
                .expect("targets exist");
            out.push(h);
        }
    }
    for n in g.node_ids() {
        let inc: Vec<AtomId> = g.incoming(n).collect();
        if inc.len() > 16 {
            continue;
        }
        // Unordered 2-partitions: the last incident link always goes second.
        let half = if inc.is_empty() {
            1u32
        } else {
            1u32 << (inc.len() - 1)
        };
        for mask in 0..half {
            let (mut first, mut second) = (Vec::new(), Vec::new());
            for (i, l) in inc.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    first.push(*l);
                } else {
                    second.push(*l);
                }
            }
            if let Ok((h, _, _)) = g.split_node(n, &first, &second) {
                out.push(h);
            }
        }
    }
    out
}

/// [`cost_leq`] exploring at most `max_states` construction states.
pub fn cost_leq_bounded(
    a: &Hypergraph,
    a1: &Hypergraph,
    max_states: usize,
) -> Result<bool, HeytingError> {
    let goal = canon(a1)?;
    let start = canon(a)?;
    if start == goal {
        return Ok(true);
    }
    let budget = Budget::of(a1);
    if !Budget::of(a).fits(&budget) || !comparable(a, a1)? {
        return Ok(false);
    }
    let flat = a1.links().all(|l| {
        l.targets()
            .iter()
            .all(|t| a1.atom(*t).is_some_and(|x| x.is_node()))
    });
    let mut seen: BTreeSet<String> = BTreeSet::new();
    seen.insert(start);
    let mut queue = VecDeque::from([a.clone()]);
    while let Some(g) = queue.pop_front() {
        for h in successors(&g, &budget, flat) {
            if !Budget::of(&h).fits(&budget) {
                continue;
            }
            let key = canon(&h)?;
            if key == goal {
                return Ok(true);
            }
            if seen.insert(key) {
                if seen.len() > max_states {
                    return Err(HeytingError::UndecidedAtScale);
                }
                queue.push_back(h);
            }
        }
    }
    Ok(false)
}
