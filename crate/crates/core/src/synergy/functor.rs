//! Process functors on a transition system.
//!
//! `F_A` keeps the transitions `A` made itself and replaces every other one
//! by the cheapest chain of `A`'s recorded transitions between the same two
//! states. Without such a chain the transition is a gap and the projection
//! costs infinity.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Add;

use crate::cpt::{Budget, Cause, EpisodeStore, STATE, TRANSITION};
use crate::hypergraph::{AtomId, Homomorphism, Hypergraph, Label, LinkIndex};
use crate::rational::{to_f64, to_pq, zero};
use crate::Rational;

use super::SynergyError;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Cost {
    Finite(Rational),
    Infinite,
}

impl Cost {
    pub fn zero() -> Self {
        Cost::Finite(zero())
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Cost::Finite(c) => Some(c),
            Cost::Infinite => None,
        }
    }
}

impl Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        match (self, rhs) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a + b),
            _ => Cost::Infinite,
        }
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(c) => f.write_str(&to_pq(c)),
            Cost::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Step {
    cause: Cause,
    cost: Budget,
}

/// States as nodes, transitions as binary links with a cause and a cost.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TransitionSystem {
    pub graph: Hypergraph,
    state_of: BTreeMap<String, AtomId>,
    names: BTreeMap<AtomId, String>,
    steps: BTreeMap<AtomId, Step>,
}

impl TransitionSystem {
    pub fn new() -> Self {
        Self::default()
    }

    /// The node for `name`, created on first use.
    pub fn add_state(&mut self, name: &str) -> AtomId {
        if let Some(id) = self.state_of.get(name) {
            return *id;
        }
        let id = self.graph.add_typed_node(STATE);
        self.state_of.insert(name.into(), id);
        self.names.insert(id, name.into());
        id
    }

    pub fn add_transition(&mut self, from: &str, to: &str, cause: Cause, cost: Budget) -> AtomId {
        let (a, b) = (self.add_state(from), self.add_state(to));
        let label = Label::new(
            TRANSITION,
            alloc::vec![to_f64(&cost.space), to_f64(&cost.time)],
        )
        .expect("finite");
        let id = self
            .graph
            .add_link(alloc::vec![a, b], Some(label))
            .expect("states exist");
        self.steps.insert(id, Step { cause, cost });
        id
    }

    /// Snapshots with equal pattern profiles become one state, so the
    /// episodes of a store share their states.
    pub fn from_store(store: &EpisodeStore) -> Self {
        let mut sys = Self::new();
        for e in store.episodes() {
            let name = |id: u64| {
                let s = e.snapshot(id).expect("ingested transitions have endpoints");
                let parts: Vec<String> = s
                    .degrees
                    .iter()
                    .map(|(k, v)| format!("{k}={}", to_pq(v)))
                    .collect();
                parts.join(";")
            };
            for s in &e.snapshots {
                sys.add_state(&name(s.id));
            }
            for t in &e.transitions {
                sys.add_transition(&name(t.from), &name(t.to), t.cause.clone(), t.cost.clone());
            }
        }
        sys
    }

    pub fn state(&self, name: &str) -> Option<AtomId> {
        self.state_of.get(name).copied()
    }

    pub fn state_name(&self, id: AtomId) -> Option<&str> {
        self.names.get(&id).map(String::as_str)
    }

    pub fn cause(&self, link: AtomId) -> Option<&Cause> {
        self.steps.get(&link).map(|s| &s.cause)
    }

    pub fn cost(&self, link: AtomId) -> Option<Rational> {
        self.steps.get(&link).map(|s| s.cost.scalar())
    }

    /// Closed sub-system spanned by `links` and `states`.
    pub fn subsystem(&self, links: &[AtomId], states: &[AtomId]) -> Hypergraph {
        self.graph.closure_of(links.iter().chain(states).copied())
    }

    fn endpoints(&self, link: AtomId) -> Option<(AtomId, AtomId)> {
        match self.graph.atom(link)?.targets() {
            [a, b] if self.steps.contains_key(&link) => Some((*a, *b)),
            _ => None,
        }
    }

    /// Cheapest chain of `process` transitions from `from` to `to`; ties
    /// go to the lexicographically smallest link sequence.
    pub fn cheapest_path(
        &self,
        process: &str,
        from: AtomId,
        to: AtomId,
    ) -> Option<(Vec<AtomId>, Rational)> {
        let mut out: BTreeMap<AtomId, Vec<(AtomId, AtomId, Rational)>> = BTreeMap::new();
        for (id, s) in &self.steps {
            if matches!(&s.cause, Cause::Process(p) if p == process) {
                let (a, b) = self.endpoints(*id).expect("binary");
                out.entry(a).or_default().push((*id, b, s.cost.scalar()));
            }
        }
        let mut frontier: BTreeSet<(Rational, Vec<AtomId>, AtomId)> = BTreeSet::new();
        frontier.insert((zero(), Vec::new(), from));
        let mut settled = BTreeSet::new();
        while let Some(entry) = frontier.pop_first() {
            let (cost, path, at) = entry;
            if !settled.insert(at) {
                continue;
            }
            if at == to {
                return Some((path, cost));
            }
            for (link, next, c) in out.get(&at).into_iter().flatten() {
                if !settled.contains(next) {
                    let mut p = path.clone();
                    p.push(*link);
                    frontier.insert((&cost + c, p, *next));
                }
            }
        }
        None
    }
}

/// `F_A(X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctorProjection {
    pub process: String,
    pub graph: Hypergraph,
    /// Transition of `X` → the chain standing in for it.
    pub replaced: BTreeMap<AtomId, Vec<AtomId>>,
    pub gaps: Vec<AtomId>,
    pub cost: Cost,
}

impl FunctorProjection {
    fn nodes_along(&self, sys: &TransitionSystem, link: AtomId) -> Option<Vec<AtomId>> {
        let path = self.replaced.get(&link)?;
        let (start, _) = sys.endpoints(link)?;
        let mut nodes = alloc::vec![start];
        for l in path {
            nodes.push(sys.endpoints(*l)?.1);
        }
        Some(nodes)
    }
}

pub fn functor_project(
    sys: &TransitionSystem,
    x: &Hypergraph,
    process: &str,
) -> Result<FunctorProjection, SynergyError> {
    if !x.is_subgraph_of(&sys.graph) {
        return Err(SynergyError::NotASubsystem);
    }
    let mut keep: Vec<AtomId> = x.node_ids();
    let mut replaced = BTreeMap::new();
    let mut gaps = Vec::new();
    for l in x.links() {
        let id = l.id();
        let Some((from, to)) = sys.endpoints(id) else {
            keep.push(id);
            continue;
        };
        if sys
            .cause(id)
            .is_some_and(|c| matches!(c, Cause::Process(p) if p == process))
        {
            keep.push(id);
            replaced.insert(id, alloc::vec![id]);
        } else if let Some((path, _)) = sys.cheapest_path(process, from, to) {
            keep.extend(path.iter().copied());
            replaced.insert(id, path);
        } else {
            gaps.push(id);
        }
    }
    let mut graph = sys.graph.closure_of(keep);
    graph.set_name(Some(process.into()));
    let cost = if gaps.is_empty() {
        Cost::Finite(graph.links().filter_map(|l| sys.cost(l.id())).sum())
    } else {
        Cost::Infinite
    };
    Ok(FunctorProjection {
        process: process.into(),
        graph,
        replaced,
        gaps,
        cost,
    })
}

fn image_link(
    index: &LinkIndex,
    y: &Hypergraph,
    f: &BTreeMap<AtomId, AtomId>,
    link: AtomId,
    x: &Hypergraph,
) -> Option<AtomId> {
    let atom = x.atom(link)?;
    let targets: Option<Vec<AtomId>> = atom.targets().iter().map(|t| f.get(t).copied()).collect();
    let rep = index.get(atom.type_name(), &targets?)?;
    // Parallel links share a representative; any of them will do.
    y.links().map(|l| l.id()).find(|l| index.resolve(*l) == rep)
}

/// `F_A(f)` for a node map `f: X → Y`. Chains are matched position by
/// position, so `None` when a chain and its image differ in length.
pub fn functor_map(
    sys: &TransitionSystem,
    x: &Hypergraph,
    fx: &FunctorProjection,
    y: &Hypergraph,
    fy: &FunctorProjection,
    f: &BTreeMap<AtomId, AtomId>,
) -> Option<Homomorphism> {
    let mut map: BTreeMap<AtomId, AtomId> = BTreeMap::new();
    let mut set = |k: AtomId, v: AtomId| match map.insert(k, v) {
        Some(old) => old == v,
        None => true,
    };
    for n in x.node_ids() {
        if !set(n, *f.get(&n)?) {
            return None;
        }
    }
    let index = LinkIndex::build(y);
    for link in fx.replaced.keys() {
        let src = fx.nodes_along(sys, *link)?;
        let candidates: Vec<AtomId> = {
            let first = image_link(&index, y, f, *link, x)?;
            let rep = index.resolve(first);
            y.links()
                .map(|l| l.id())
                .filter(|l| index.resolve(*l) == rep)
                .collect()
        };
        let dst = candidates
            .iter()
            .filter_map(|c| fy.nodes_along(sys, *c))
            .find(|d| d.len() == src.len())?;
        for (s, d) in src.into_iter().zip(dst) {
            if !set(s, d) {
                return None;
            }
        }
    }
    let h = Homomorphism::from_map(map);
    h.is_valid(&fx.graph, &fy.graph).then_some(h)
}

/// Cost of `F_A(f)`: the transitions of `F_A(Y)` outside the image of
/// `F_A(X)`, infinite when `Y` has a gap that `X` does not account for.
pub fn morphism_cost(
    sys: &TransitionSystem,
    x: &Hypergraph,
    fx: &FunctorProjection,
    y: &Hypergraph,
    fy: &FunctorProjection,
    f: &BTreeMap<AtomId, AtomId>,
    h: &Homomorphism,
) -> Cost {
    let y_index = LinkIndex::build(y);
    let covered_gaps: BTreeSet<AtomId> = fx
        .gaps
        .iter()
        .filter_map(|g| image_link(&y_index, y, f, *g, x))
        .map(|l| y_index.resolve(l))
        .collect();
    if fy
        .gaps
        .iter()
        .any(|g| !covered_gaps.contains(&y_index.resolve(*g)))
    {
        return Cost::Infinite;
    }
    let index = LinkIndex::build(&fy.graph);
    let hit: BTreeSet<AtomId> = fx
        .graph
        .links()
        .filter_map(|l| {
            let t: Option<Vec<AtomId>> = l
                .targets()
                .iter()
                .map(|t| h.vertex_map.get(t).copied())
                .collect();
            index.get(l.type_name(), &t?)
        })
        .collect();
    Cost::Finite(
        fy.graph
            .links()
            .filter(|l| !hit.contains(&index.resolve(l.id())))
            .filter_map(|l| sys.cost(l.id()))
            .sum(),
    )
}
