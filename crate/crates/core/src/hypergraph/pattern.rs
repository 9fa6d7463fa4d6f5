//! h-patterns: hypergraphs with variable nodes, combined with and/or/not.
//!
//! Matching is homomorphic: distinct pattern nodes may bind to the same
//! concrete node. Variable nodes bind to any node; every other pattern node
//! binds to a node with the same type name. Sub-patterns share variables by
//! atom id, so `and(P, not(Q))` relates P's and Q's atoms with equal ids.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{AtomId, GraphError, Hypergraph, MapSearch, NodeRule};
use crate::rational::{int, zero, Rational};

/// Reserved type name marking pattern variables.
pub const VARIABLE: &str = "variable";

#[derive(Debug, Clone, PartialEq)]
pub enum HPattern {
    Atomic(Hypergraph),
    And(Box<HPattern>, Box<HPattern>),
    Or(Box<HPattern>, Box<HPattern>),
    /// Only meaningful as a conjunct: it filters its sibling's bindings.
    Not(Box<HPattern>),
}

impl HPattern {
    pub fn and(a: HPattern, b: HPattern) -> Self {
        HPattern::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: HPattern, b: HPattern) -> Self {
        HPattern::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(p: HPattern) -> Self {
        HPattern::Not(Box::new(p))
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        match self {
            HPattern::Atomic(g) => {
                if g.links().any(|l| l.type_name() == Some(VARIABLE)) {
                    return Err(GraphError::InvalidPattern("variables must be nodes"));
                }
                Ok(())
            }
            HPattern::And(a, b) | HPattern::Or(a, b) => {
                a.validate()?;
                b.validate()
            }
            HPattern::Not(p) => p.validate(),
        }
    }

    /// Body of an atomic pattern.
    pub fn body(&self) -> Option<&Hypergraph> {
        match self {
            HPattern::Atomic(g) => Some(g),
            _ => None,
        }
    }
}

/// Pattern node id → concrete node id, over every node of the matched
/// pattern bodies (variables and typed constants alike).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Binding(pub BTreeMap<AtomId, AtomId>);

impl Binding {
    pub fn get(&self, pattern_atom: AtomId) -> Option<AtomId> {
        self.0.get(&pattern_atom).copied()
    }

    fn consistent(&self, other: &Binding) -> bool {
        self.0
            .iter()
            .all(|(k, v)| other.0.get(k).is_none_or(|w| w == v))
    }

    fn merged(&self, other: &Binding) -> Binding {
        let mut m = self.0.clone();
        m.extend(other.0.iter().map(|(k, v)| (*k, *v)));
        Binding(m)
    }

    fn sort_key(&self) -> (Vec<AtomId>, Vec<AtomId>) {
        (
            self.0.values().copied().collect(),
            self.0.keys().copied().collect(),
        )
    }
}

/// All bindings of `p` in `g`, deduplicated, ordered by the sequence of
/// bound target ids.
pub fn match_pattern(p: &HPattern, g: &Hypergraph) -> Result<Vec<Binding>, GraphError> {
    p.validate()?;
    if let HPattern::Not(_) = p {
        return Err(GraphError::UnboundedNegation);
    }
    let mut out = eval(p, g)?;
    sort_bindings(&mut out);
    Ok(out)
}

fn sort_bindings(v: &mut Vec<Binding>) {
    v.sort_by_key(|a| a.sort_key());
    v.dedup();
}

fn eval(p: &HPattern, g: &Hypergraph) -> Result<Vec<Binding>, GraphError> {
    match p {
        HPattern::Atomic(body) => Ok(match_atomic(body, g)),
        HPattern::Or(a, b) => {
            if matches!(**a, HPattern::Not(_)) || matches!(**b, HPattern::Not(_)) {
                return Err(GraphError::UnboundedNegation);
            }
            let mut v = eval(a, g)?;
            v.extend(eval(b, g)?);
            sort_bindings(&mut v);
            Ok(v)
        }
        HPattern::And(a, b) => match (&**a, &**b) {
            (HPattern::Not(_), HPattern::Not(_)) => Err(GraphError::UnboundedNegation),
            (pos, HPattern::Not(neg)) | (HPattern::Not(neg), pos) => {
                let keep = eval(pos, g)?;
                let forbid = eval(neg, g)?;
                Ok(keep
                    .into_iter()
                    .filter(|b| !forbid.iter().any(|f| b.consistent(f)))
                    .collect())
            }
            (x, y) => {
                let left = eval(x, g)?;
                let right = eval(y, g)?;
                let mut v = Vec::new();
                for l in &left {
                    for r in &right {
                        if l.consistent(r) {
                            v.push(l.merged(r));
                        }
                    }
                }
                sort_bindings(&mut v);
                Ok(v)
            }
        },
        HPattern::Not(_) => Err(GraphError::UnboundedNegation),
    }
}

fn match_atomic(body: &Hypergraph, g: &Hypergraph) -> Vec<Binding> {
    let mut ms = MapSearch::new(body, g, NodeRule::Pattern);
    ms.budget = u64::MAX;
    let nodes = ms.src_nodes().to_vec();
    let mut out = Vec::new();
    ms.run(|img| {
        out.push(Binding(
            nodes.iter().copied().zip(img.iter().copied()).collect(),
        ));
        true
    });
    out
}

/// Best-binding atom coverage of an atomic pattern: the largest fraction of
/// pattern atoms that some partial binding realizes in `g`. A node counts
/// when bound; a link counts when all its targets are bound and its image
/// link exists. Empty patterns are fully covered.
pub fn coverage(body: &Hypergraph, g: &Hypergraph) -> Rational {
    let total = body.len();
    if total == 0 {
        return int(1);
    }
    if !occurs(body, g) {
        let best = best_partial(body, g);
        return if best == 0 {
            zero()
        } else {
            Rational::new((best as i64).into(), (total as i64).into())
        };
    }
    int(1)
}

/// Whether the atomic pattern `body` has at least one binding in `g`.
pub fn occurs(body: &Hypergraph, g: &Hypergraph) -> bool {
    let mut ms = MapSearch::new(body, g, NodeRule::Pattern);
    ms.budget = u64::MAX;
    let mut found = false;
    ms.run(|_| {
        found = true;
        false
    });
    found
}

fn best_partial(body: &Hypergraph, g: &Hypergraph) -> usize {
    let nodes = body.node_ids();
    let dst_nodes: Vec<_> = g.nodes().collect();
    let candidates: Vec<Vec<AtomId>> = nodes
        .iter()
        .map(|n| {
            let ty = body.type_of(*n);
            dst_nodes
                .iter()
                .filter(|d| ty == Some(VARIABLE) || d.type_name() == ty)
                .map(|d| d.id())
                .collect()
        })
        .collect();
    let index = super::LinkIndex::build(g);
    let links = body.links_topological();
    let total = body.len();
    let mut best = 0;
    let mut img: BTreeMap<AtomId, AtomId> = BTreeMap::new();

    fn score(
        body: &Hypergraph,
        links: &[AtomId],
        img: &BTreeMap<AtomId, AtomId>,
        index: &super::LinkIndex,
    ) -> usize {
        let mut link_img: BTreeMap<AtomId, AtomId> = BTreeMap::new();
        let mut n = img.len();
        for l in links {
            let atom = body.atom(*l).expect("link");
            let targets: Option<Vec<AtomId>> = atom
                .targets()
                .iter()
                .map(|t| img.get(t).or_else(|| link_img.get(t)).copied())
                .collect();
            if let Some(rep) = targets.and_then(|t| index.get(atom.type_name(), &t)) {
                link_img.insert(*l, rep);
                n += 1;
            }
        }
        n
    }

    #[allow(clippy::too_many_arguments)]
    fn go(
        i: usize,
        nodes: &[AtomId],
        candidates: &[Vec<AtomId>],
        body: &Hypergraph,
        links: &[AtomId],
        index: &super::LinkIndex,
        img: &mut BTreeMap<AtomId, AtomId>,
        best: &mut usize,
        total: usize,
    ) {
        if *best == total {
            return;
        }
        if i == nodes.len() {
            *best = (*best).max(score(body, links, img, index));
            return;
        }
        // Binding a node never lowers the score, so an unbound node is only
        // explored when it has no candidate at all.
        if candidates[i].is_empty() {
            go(
                i + 1,
                nodes,
                candidates,
                body,
                links,
                index,
                img,
                best,
                total,
            );
            return;
        }
        for c in &candidates[i] {
            img.insert(nodes[i], *c);
            go(
                i + 1,
                nodes,
                candidates,
                body,
                links,
                index,
                img,
                best,
                total,
            );
            img.remove(&nodes[i]);
        }
    }

    go(
        0,
        &nodes,
        &candidates,
        body,
        &links,
        &index,
        &mut img,
        &mut best,
        total,
    );
    best
}
