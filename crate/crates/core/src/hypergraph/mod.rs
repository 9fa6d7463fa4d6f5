//! Labeled hypergraphs: the agent memory, h-pattern bodies and CPT graphs.
//!
//! Atoms are nodes or links. A link has an ordered, non-empty target sequence
//! that may mention other links. The graph is always closed under targets:
//! removing an atom removes every link that (transitively) targets it.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

mod canon;
mod hom;
mod pattern;

pub use canon::{canonical_form, canonical_form_bounded, CANON_EMPTY, DEFAULT_CANON_PERMUTATIONS};
pub use hom::{
    count_homomorphisms, find_homomorphisms, find_homomorphisms_with, is_isomorphic, CostModel,
    HomSearch, HomSearchResult, Homomorphism, MergeCount, MergeStep, DEFAULT_EXACT_THRESHOLD,
};
pub(crate) use hom::{LinkIndex, MapSearch, NodeRule};
pub use pattern::{coverage, match_pattern, occurs, Binding, HPattern, VARIABLE};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("dangling target: {0}")]
    Dangling(AtomId),
    #[error("link must have at least one target")]
    EmptyLink,
    #[error("node atoms cannot have targets")]
    NodeWithTargets,
    #[error("duplicate atom id: {0}")]
    DuplicateId(AtomId),
    #[error("unknown atom: {0}")]
    UnknownAtom(AtomId),
    #[error("merge of non-node atom {0}")]
    MergeNonNode(AtomId),
    #[error("cannot merge an atom with itself")]
    MergeSelf,
    #[error("bad partition: {0}")]
    BadPartition(&'static str),
    #[error("label type name must be non-empty")]
    EmptyTypeName,
    #[error("label weights must be finite")]
    NonFiniteWeight,
    #[error("pattern has free-standing negation")]
    UnboundedNegation,
    #[error("invalid pattern: {0}")]
    InvalidPattern(&'static str),
    #[error("graph exceeds the canonicalization bound ({0} orderings)")]
    TooLarge(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomId(pub u64);

impl fmt::Display for AtomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomKind {
    Node,
    Link,
}

/// A type name plus a numeric payload. Only the type name takes part in
/// matching; the weights are annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct Label {
    type_name: String,
    weights: Vec<f64>,
}

impl Label {
    pub fn new(type_name: impl Into<String>, weights: Vec<f64>) -> Result<Self, GraphError> {
        let type_name = type_name.into();
        if type_name.is_empty() {
            return Err(GraphError::EmptyTypeName);
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(GraphError::NonFiniteWeight);
        }
        Ok(Label { type_name, weights })
    }

    /// Weightless label. Panics on an empty name.
    pub fn of(type_name: &str) -> Self {
        Label::new(type_name, Vec::new()).expect("label type name must be non-empty")
    }

    /// Panics on an empty name or non-finite weights.
    pub fn weighted(type_name: &str, weights: &[f64]) -> Self {
        Label::new(type_name, weights.to_vec()).expect("invalid label")
    }

    pub fn type_name(&self) -> &str {
        &self.type_name
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    id: AtomId,
    kind: AtomKind,
    targets: Vec<AtomId>,
    label: Option<Label>,
}

impl Atom {
    pub fn id(&self) -> AtomId {
        self.id
    }

    pub fn kind(&self) -> AtomKind {
        self.kind
    }

    pub fn is_node(&self) -> bool {
        self.kind == AtomKind::Node
    }

    pub fn is_link(&self) -> bool {
        self.kind == AtomKind::Link
    }

    pub fn targets(&self) -> &[AtomId] {
        &self.targets
    }

    pub fn label(&self) -> Option<&Label> {
        self.label.as_ref()
    }

    pub fn type_name(&self) -> Option<&str> {
        self.label.as_ref().map(Label::type_name)
    }
}

/// Outcome of [`Hypergraph::remove_atom`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Removal {
    /// Every atom that disappeared, in ascending id order.
    Removed(Vec<AtomId>),
    /// The id was not present; nothing changed.
    UnknownId(AtomId),
}

#[derive(Debug, Clone, Default)]
pub struct Hypergraph {
    atoms: BTreeMap<AtomId, Atom>,
    incoming: BTreeMap<AtomId, BTreeSet<AtomId>>,
    next_id: u64,
    name: Option<String>,
}

impl PartialEq for Hypergraph {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms
    }
}

impl Hypergraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn named(name: impl Into<String>) -> Self {
        Hypergraph {
            name: Some(name.into()),
            ..Self::default()
        }
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn set_name(&mut self, name: Option<String>) {
        self.name = name;
    }

    pub fn add_atom(
        &mut self,
        kind: AtomKind,
        targets: Vec<AtomId>,
        label: Option<Label>,
    ) -> Result<AtomId, GraphError> {
        let id = AtomId(self.next_id);
        self.insert_atom(id, kind, targets, label)?;
        Ok(id)
    }

    pub fn add_node(&mut self, label: Option<Label>) -> AtomId {
        self.add_atom(AtomKind::Node, Vec::new(), label)
            .expect("node insertion cannot fail")
    }

    pub fn add_typed_node(&mut self, type_name: &str) -> AtomId {
        self.add_node(Some(Label::of(type_name)))
    }

    pub fn add_link(
        &mut self,
        targets: Vec<AtomId>,
        label: Option<Label>,
    ) -> Result<AtomId, GraphError> {
        self.add_atom(AtomKind::Link, targets, label)
    }

    pub fn add_typed_link(
        &mut self,
        type_name: &str,
        targets: &[AtomId],
    ) -> Result<AtomId, GraphError> {
        self.add_link(targets.to_vec(), Some(Label::of(type_name)))
    }

    /// Inserts an atom under a caller-chosen id (used by parsers and by
    /// operations that preserve ids). Later fresh ids stay above `id`.
    pub fn insert_atom(
        &mut self,
        id: AtomId,
        kind: AtomKind,
        targets: Vec<AtomId>,
        label: Option<Label>,
    ) -> Result<(), GraphError> {
        if self.atoms.contains_key(&id) {
            return Err(GraphError::DuplicateId(id));
        }
        match kind {
            AtomKind::Node if !targets.is_empty() => return Err(GraphError::NodeWithTargets),
            AtomKind::Link if targets.is_empty() => return Err(GraphError::EmptyLink),
            _ => {}
        }
        if let Some(missing) = targets.iter().find(|t| !self.atoms.contains_key(t)) {
            return Err(GraphError::Dangling(*missing));
        }
        for t in &targets {
            self.incoming.entry(*t).or_default().insert(id);
        }
        self.atoms.insert(
            id,
            Atom {
                id,
                kind,
                targets,
                label,
            },
        );
        self.next_id = self.next_id.max(id.0 + 1);
        Ok(())
    }

    /// Removes `id` and every link that transitively targets it.
    pub fn remove_atom(&mut self, id: AtomId) -> Removal {
        if !self.atoms.contains_key(&id) {
            return Removal::UnknownId(id);
        }
        let mut doomed = BTreeSet::new();
        let mut stack = alloc::vec![id];
        while let Some(x) = stack.pop() {
            if doomed.insert(x) {
                if let Some(inc) = self.incoming.get(&x) {
                    stack.extend(inc.iter().copied());
                }
            }
        }
        for x in &doomed {
            if let Some(atom) = self.atoms.remove(x) {
                for t in &atom.targets {
                    if let Some(set) = self.incoming.get_mut(t) {
                        set.remove(x);
                    }
                }
            }
            self.incoming.remove(x);
        }
        Removal::Removed(doomed.into_iter().collect())
    }

    pub fn atom(&self, id: AtomId) -> Option<&Atom> {
        self.atoms.get(&id)
    }

    pub fn contains(&self, id: AtomId) -> bool {
        self.atoms.contains_key(&id)
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.values()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.values().filter(|a| a.is_node())
    }

    pub fn links(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.values().filter(|a| a.is_link())
    }

    pub fn node_ids(&self) -> Vec<AtomId> {
        self.nodes().map(Atom::id).collect()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.nodes().count()
    }

    pub fn link_count(&self) -> usize {
        self.links().count()
    }

    /// The next id `add_atom` would hand out.
    pub fn next_id(&self) -> AtomId {
        AtomId(self.next_id)
    }

    /// Links that have `id` among their targets.
    pub fn incoming(&self, id: AtomId) -> impl Iterator<Item = AtomId> + '_ {
        self.incoming
            .get(&id)
            .into_iter()
            .flat_map(|s| s.iter().copied())
    }

    /// Atoms sharing a link with `id`, in either direction, excluding `id`.
    pub fn neighbors(&self, id: AtomId) -> BTreeSet<AtomId> {
        let mut out = BTreeSet::new();
        if let Some(atom) = self.atom(id) {
            out.extend(atom.targets.iter().copied());
        }
        for l in self.incoming(id) {
            out.insert(l);
            if let Some(link) = self.atom(l) {
                out.extend(link.targets.iter().copied());
            }
        }
        out.remove(&id);
        out
    }

    /// Every link's targets resolve. Always true for values built through
    /// this API; exposed for scan checks.
    pub fn is_closed(&self) -> bool {
        self.atoms
            .values()
            .all(|a| a.targets.iter().all(|t| self.atoms.contains_key(t)))
    }

    pub fn type_of(&self, id: AtomId) -> Option<&str> {
        self.atom(id).and_then(Atom::type_name)
    }

    /// Links ordered so that every link comes after the links it targets.
    pub fn links_topological(&self) -> Vec<AtomId> {
        let mut depth: BTreeMap<AtomId, usize> = BTreeMap::new();
        fn depth_of(g: &Hypergraph, id: AtomId, memo: &mut BTreeMap<AtomId, usize>) -> usize {
            if let Some(d) = memo.get(&id) {
                return *d;
            }
            let atom = &g.atoms[&id];
            let d = if atom.is_node() {
                0
            } else {
                1 + atom
                    .targets
                    .iter()
                    .map(|t| depth_of(g, *t, memo))
                    .max()
                    .unwrap_or(0)
            };
            memo.insert(id, d);
            d
        }
        let mut links: Vec<(usize, AtomId)> = self
            .links()
            .map(|l| (depth_of(self, l.id, &mut depth), l.id))
            .collect();
        links.sort();
        links.into_iter().map(|(_, id)| id).collect()
    }

    /// Weakly connected through link membership. The empty graph is not.
    pub fn is_connected(&self) -> bool {
        let Some(start) = self.atoms.keys().next().copied() else {
            return false;
        };
        let mut seen = BTreeSet::new();
        let mut stack = alloc::vec![start];
        while let Some(x) = stack.pop() {
            if seen.insert(x) {
                stack.extend(self.atoms[&x].targets.iter().copied());
                if let Some(inc) = self.incoming.get(&x) {
                    stack.extend(inc.iter().copied());
                }
            }
        }
        seen.len() == self.atoms.len()
    }

    /// The smallest closed sub-hypergraph containing `ids` (ids preserved).
    pub fn closure_of<I: IntoIterator<Item = AtomId>>(&self, ids: I) -> Hypergraph {
        let mut keep = BTreeSet::new();
        let mut stack: Vec<AtomId> = ids.into_iter().filter(|i| self.contains(*i)).collect();
        while let Some(x) = stack.pop() {
            if keep.insert(x) {
                stack.extend(self.atoms[&x].targets.iter().copied());
            }
        }
        let mut out = Hypergraph {
            name: self.name.clone(),
            ..Hypergraph::default()
        };
        let mut order: Vec<AtomId> = keep
            .iter()
            .copied()
            .filter(|i| self.atoms[i].is_node())
            .collect();
        order.extend(
            self.links_topological()
                .into_iter()
                .filter(|l| keep.contains(l)),
        );
        for id in order {
            let a = &self.atoms[&id];
            out.insert_atom(id, a.kind, a.targets.clone(), a.label.clone())
                .expect("closure is closed");
        }
        out
    }

    /// Sub-hypergraph test by id: every atom of `self` exists in `ambient`
    /// with the same kind, targets and type name.
    pub fn is_subgraph_of(&self, ambient: &Hypergraph) -> bool {
        self.atoms.values().all(|a| match ambient.atom(a.id) {
            Some(b) => a.kind == b.kind && a.targets == b.targets && a.type_name() == b.type_name(),
            None => false,
        })
    }

    /// Id-preserving union of two sub-hypergraphs of a common ambient graph.
    /// Atoms present in both are taken from `self`.
    pub fn union(&self, other: &Hypergraph) -> Hypergraph {
        let mut ids: BTreeSet<AtomId> = self.atoms.keys().copied().collect();
        ids.extend(other.atoms.keys().copied());
        let mut out = Hypergraph {
            name: self.name.clone(),
            ..Hypergraph::default()
        };
        let lookup = |id: &AtomId| self.atoms.get(id).or_else(|| other.atoms.get(id)).unwrap();
        let mut pending: Vec<AtomId> = ids.into_iter().collect();
        // Insert in rounds until every target is present.
        while !pending.is_empty() {
            let before = pending.len();
            pending.retain(|id| {
                let a = lookup(id);
                if a.targets.iter().all(|t| out.contains(*t)) {
                    out.insert_atom(a.id, a.kind, a.targets.clone(), a.label.clone())
                        .expect("fresh id");
                    false
                } else {
                    true
                }
            });
            assert!(
                pending.len() < before,
                "union of graphs with dangling targets"
            );
        }
        out
    }

    /// Copy with ids renumbered `offset, offset+1, ...` in (nodes, then
    /// topological links) order. Returns the old→new map as well.
    pub fn renumbered(&self, offset: u64) -> (Hypergraph, BTreeMap<AtomId, AtomId>) {
        let mut map = BTreeMap::new();
        let mut out = Hypergraph {
            name: self.name.clone(),
            next_id: offset,
            ..Hypergraph::default()
        };
        for n in self.nodes() {
            let id = out.add_node(n.label.clone());
            map.insert(n.id, id);
        }
        for l in self.links_topological() {
            let a = &self.atoms[&l];
            let targets = a.targets.iter().map(|t| map[t]).collect();
            let id = out
                .add_link(targets, a.label.clone())
                .expect("targets mapped");
            map.insert(l, id);
        }
        (out, map)
    }

    /// Merges nodes `a` and `b` into a fresh node that inherits every link
    /// of both. Links that become identical (same type, same targets) are
    /// collapsed onto the lowest id. The fresh node takes `a`'s label.
    pub fn merge_nodes(
        &self,
        a: AtomId,
        b: AtomId,
    ) -> Result<(Hypergraph, Homomorphism), GraphError> {
        if a == b {
            return Err(GraphError::MergeSelf);
        }
        for x in [a, b] {
            match self.atom(x) {
                None => return Err(GraphError::UnknownAtom(x)),
                Some(at) if !at.is_node() => return Err(GraphError::MergeNonNode(x)),
                _ => {}
            }
        }
        let fresh = AtomId(self.next_id);
        let mut out = Hypergraph {
            name: self.name.clone(),
            ..Hypergraph::default()
        };
        let mut image: BTreeMap<AtomId, AtomId> = BTreeMap::new();
        for n in self.nodes() {
            if n.id == a || n.id == b {
                continue;
            }
            out.insert_atom(n.id, AtomKind::Node, Vec::new(), n.label.clone())
                .expect("fresh");
            image.insert(n.id, n.id);
        }
        out.insert_atom(
            fresh,
            AtomKind::Node,
            Vec::new(),
            self.atoms[&a].label.clone(),
        )
        .expect("fresh");
        image.insert(a, fresh);
        image.insert(b, fresh);
        let mut seen: BTreeMap<(Option<String>, Vec<AtomId>), AtomId> = BTreeMap::new();
        for l in self.links_topological() {
            let atom = &self.atoms[&l];
            let targets: Vec<AtomId> = atom.targets.iter().map(|t| image[t]).collect();
            let key = (atom.type_name().map(String::from), targets.clone());
            if let Some(kept) = seen.get(&key) {
                image.insert(l, *kept);
                continue;
            }
            out.insert_atom(l, AtomKind::Link, targets, atom.label.clone())
                .expect("targets present");
            seen.insert(key, l);
            image.insert(l, l);
        }
        let vertex_map: BTreeMap<AtomId, AtomId> =
            self.nodes().map(|n| (n.id, image[&n.id])).collect();
        let hom = Homomorphism::from_parts(
            vertex_map,
            alloc::vec![MergeStep {
                first: a,
                second: b
            }],
        );
        Ok((out, hom))
    }

    /// Splits node `a` into two fresh nodes; links in `first` are rewired to
    /// the first child and links in `second` to the second. The two sets must
    /// partition the links incident to `a` (either may be empty).
    pub fn split_node(
        &self,
        a: AtomId,
        first: &[AtomId],
        second: &[AtomId],
    ) -> Result<(Hypergraph, AtomId, AtomId), GraphError> {
        match self.atom(a) {
            None => return Err(GraphError::UnknownAtom(a)),
            Some(at) if !at.is_node() => return Err(GraphError::MergeNonNode(a)),
            _ => {}
        }
        let incident: BTreeSet<AtomId> = self.incoming(a).collect();
        let s1: BTreeSet<AtomId> = first.iter().copied().collect();
        let s2: BTreeSet<AtomId> = second.iter().copied().collect();
        if s1.len() != first.len() || s2.len() != second.len() || !s1.is_disjoint(&s2) {
            return Err(GraphError::BadPartition("overlapping parts"));
        }
        let union: BTreeSet<AtomId> = s1.union(&s2).copied().collect();
        if union != incident {
            return Err(GraphError::BadPartition(
                "parts must cover exactly the incident links",
            ));
        }
        let c1 = AtomId(self.next_id);
        let c2 = AtomId(self.next_id + 1);
        let mut out = Hypergraph {
            name: self.name.clone(),
            ..Hypergraph::default()
        };
        for n in self.nodes() {
            if n.id != a {
                out.insert_atom(n.id, AtomKind::Node, Vec::new(), n.label.clone())
                    .expect("fresh");
            }
        }
        let label = self.atoms[&a].label.clone();
        out.insert_atom(c1, AtomKind::Node, Vec::new(), label.clone())
            .expect("fresh");
        out.insert_atom(c2, AtomKind::Node, Vec::new(), label)
            .expect("fresh");
        for l in self.links_topological() {
            let atom = &self.atoms[&l];
            let child = if s1.contains(&l) { c1 } else { c2 };
            let targets = atom
                .targets
                .iter()
                .map(|t| if *t == a { child } else { *t })
                .collect();
            out.insert_atom(l, AtomKind::Link, targets, atom.label.clone())
                .expect("targets present");
        }
        Ok((out, c1, c2))
    }
}
