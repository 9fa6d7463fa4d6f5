//! Heyting-algebra operations on hypergraphs.
//!
//! Join is the disjoint union, meet the categorical product, and the
//! exponent `A^B` has the functions from B's nodes to A's nodes as its nodes.
//! Implication `B → A` is `A^B`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::hypergraph::{AtomId, Hypergraph, Label, LinkIndex};

mod order;
mod prob;

pub use order::{cost_leq, cost_leq_bounded, DEFAULT_COST_ORDER_STATES};
pub use prob::{
    CountingFunctional, EmbeddingRatio, McEstimate, ProbFlag, ProbResult, ProbabilityFunctional,
};

/// Default hard cap on exponent node count.
pub const DEFAULT_EXPONENT_CAP: u64 = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HeytingError {
    #[error("exponent would have {nodes} nodes (cap {cap})")]
    ExponentTooLarge { nodes: u128, cap: u64 },
    #[error("exponent is only defined over links whose targets are nodes")]
    HigherOrderLinks,
    #[error("undecided at this scale")]
    UndecidedAtScale,
    #[error("probe must be a non-empty connected hypergraph")]
    BadProbe,
    #[error("sub-hypergraph is not contained in the ambient graph")]
    NotASubgraph,
}

/// Disjoint union with `a`'s atoms renumbered first, then `b`'s. Also
/// returns the old→new id maps for both sides.
pub fn join_with_maps(
    a: &Hypergraph,
    b: &Hypergraph,
) -> (
    Hypergraph,
    BTreeMap<AtomId, AtomId>,
    BTreeMap<AtomId, AtomId>,
) {
    let (mut out, left) = a.renumbered(0);
    let (rb, right) = b.renumbered(out.next_id().0);
    for atom in rb.nodes() {
        out.insert_atom(atom.id(), atom.kind(), Vec::new(), atom.label().cloned())
            .expect("fresh");
    }
    for l in rb.links_topological() {
        let atom = rb.atom(l).expect("link");
        out.insert_atom(
            l,
            atom.kind(),
            atom.targets().to_vec(),
            atom.label().cloned(),
        )
        .expect("fresh");
    }
    (out, left, right)
}

pub fn join(a: &Hypergraph, b: &Hypergraph) -> Hypergraph {
    join_with_maps(a, b).0
}

/// Type of a conjunction state: the sorted, deduplicated union of the
/// `&`-separated components. Absent labels are the unit.
pub fn conjunction_type(a: Option<&str>, b: Option<&str>) -> Option<String> {
    let mut parts: BTreeSet<&str> = BTreeSet::new();
    for t in [a, b].into_iter().flatten() {
        parts.extend(t.split('&'));
    }
    if parts.is_empty() {
        None
    } else {
        Some(parts.into_iter().collect::<Vec<_>>().join("&"))
    }
}

fn product_weights(a: Option<&Label>, b: Option<&Label>) -> Vec<f64> {
    match (a, b) {
        (Some(a), Some(b)) if !a.weights().is_empty() && !b.weights().is_empty() => a
            .weights()
            .iter()
            .zip(b.weights())
            .map(|(x, y)| x * y)
            .collect(),
        _ => Vec::new(),
    }
}

/// The product graph together with the component pair of every atom.
#[derive(Debug, Clone)]
pub struct Product {
    pub graph: Hypergraph,
    pub pair_of: BTreeMap<AtomId, (AtomId, AtomId)>,
    pub atom_of: BTreeMap<(AtomId, AtomId), AtomId>,
}

/// Categorical product. Nodes are all node pairs; a product link exists for
/// every pair of links with equal type and arity, over the pairwise targets.
/// Link weights multiply pointwise when both sides carry weights.
pub fn product(a: &Hypergraph, b: &Hypergraph) -> Product {
    let mut g = Hypergraph::new();
    let mut pair_of = BTreeMap::new();
    let mut atom_of = BTreeMap::new();
    for x in a.nodes() {
        for y in b.nodes() {
            let ty = conjunction_type(x.type_name(), y.type_name());
            let id = g.add_node(ty.map(|t| Label::of(&t)));
            pair_of.insert(id, (x.id(), y.id()));
            atom_of.insert((x.id(), y.id()), id);
        }
    }
    let (ia, ib) = (LinkIndex::build(a), LinkIndex::build(b));
    let reps = |g: &Hypergraph, idx: &LinkIndex| -> Vec<AtomId> {
        g.links_topological()
            .into_iter()
            .filter(|l| idx.resolve(*l) == *l)
            .collect()
    };
    let (la, lb) = (reps(a, &ia), reps(b, &ib));
    // Links over links need their target pairs first: go by depth in `a`.
    for x in &la {
        let xa = a.atom(*x).expect("link");
        for y in &lb {
            let yb = b.atom(*y).expect("link");
            if xa.type_name() != yb.type_name() || xa.targets().len() != yb.targets().len() {
                continue;
            }
            let targets: Option<Vec<AtomId>> = xa
                .targets()
                .iter()
                .zip(yb.targets())
                .map(|(s, t)| atom_of.get(&(ia.resolve(*s), ib.resolve(*t))).copied())
                .collect();
            let Some(targets) = targets else { continue };
            let label = xa.type_name().map(|t| {
                Label::new(t, product_weights(xa.label(), yb.label())).expect("finite product")
            });
            let id = g.add_link(targets, label).expect("targets exist");
            pair_of.insert(id, (*x, *y));
            atom_of.insert((*x, *y), id);
        }
    }
    Product {
        graph: g,
        pair_of,
        atom_of,
    }
}

pub fn meet(a: &Hypergraph, b: &Hypergraph) -> Hypergraph {
    product(a, b).graph
}

/// `A^B` with the function behind each node.
#[derive(Debug, Clone)]
pub struct Exponent {
    pub graph: Hypergraph,
    /// Exponent node → (B node → A node).
    pub functions: BTreeMap<AtomId, BTreeMap<AtomId, AtomId>>,
}

impl Exponent {
    pub fn node_of(&self, f: &BTreeMap<AtomId, AtomId>) -> Option<AtomId> {
        self.functions
            .iter()
            .find(|(_, g)| *g == f)
            .map(|(id, _)| *id)
    }
}

fn flat(g: &Hypergraph) -> bool {
    g.links().all(|l| {
        l.targets()
            .iter()
            .all(|t| g.atom(*t).is_some_and(|x| x.is_node()))
    })
}

fn uniform_node_label(g: &Hypergraph) -> Option<Label> {
    let mut types = g.nodes().map(|n| n.type_name());
    let first = types.next()?;
    if types.all(|t| t == first) {
        first.map(Label::of)
    } else {
        None
    }
}

/// Node type and link (type, arity) pairs an exponent is built over. The
/// adjunction `Hom(C × B, A) ≅ Hom(C, A^B)` holds for every C whose atoms
/// stay inside the signature.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    /// Label of exponent nodes; `None` takes A's uniform node label.
    pub node_type: Option<String>,
    pub links: BTreeSet<(Option<String>, usize)>,
}

impl Signature {
    pub fn uniform(node_type: &str, link_type: &str, arity: usize) -> Self {
        Signature {
            node_type: Some(node_type.into()),
            links: [(Some(link_type.into()), arity)].into(),
        }
    }

    /// Every link (type, arity) occurring in `graphs`.
    pub fn of(graphs: &[&Hypergraph]) -> Self {
        let links = graphs
            .iter()
            .flat_map(|g| {
                g.links()
                    .map(|l| (l.type_name().map(String::from), l.targets().len()))
            })
            .collect();
        Signature {
            node_type: None,
            links,
        }
    }
}

pub fn exponent(a: &Hypergraph, b: &Hypergraph) -> Result<Exponent, HeytingError> {
    exponent_capped(a, b, DEFAULT_EXPONENT_CAP)
}

/// Exponent with an explicit node cap, over the signature of A and B.
pub fn exponent_capped(a: &Hypergraph, b: &Hypergraph, cap: u64) -> Result<Exponent, HeytingError> {
    exponent_over(a, b, &Signature::of(&[a, b]), cap)
}

/// `(F1..Fk)` is a k-ary link of type `t` iff for every `t`-link
/// `(b1..bk)` of B, `(F1(b1)..Fk(bk))` is a `t`-link of A, for every
/// (type, arity) in `sig` and in A or B. With B empty this is the terminal
/// object: one node looped by every signature link.
pub fn exponent_over(
    a: &Hypergraph,
    b: &Hypergraph,
    sig: &Signature,
    cap: u64,
) -> Result<Exponent, HeytingError> {
    if !flat(a) || !flat(b) {
        return Err(HeytingError::HigherOrderLinks);
    }
    let an = a.node_ids();
    let bn = b.node_ids();
    let n = (an.len() as u128)
        .checked_pow(bn.len() as u32)
        .unwrap_or(u128::MAX);
    if n > cap as u128 {
        return Err(HeytingError::ExponentTooLarge { nodes: n, cap });
    }
    let mut funcs: Vec<Vec<AtomId>> = Vec::new();
    if !an.is_empty() || bn.is_empty() {
        let mut cur = alloc::vec![0usize; bn.len()];
        loop {
            funcs.push(cur.iter().map(|i| an[*i]).collect());
            let mut k = bn.len();
            let mut done = true;
            while k > 0 {
                k -= 1;
                cur[k] += 1;
                if cur[k] < an.len() {
                    done = false;
                    break;
                }
                cur[k] = 0;
            }
            if done {
                break;
            }
        }
    }
    let mut g = Hypergraph::new();
    let label = match &sig.node_type {
        Some(t) => Some(Label::of(t)),
        None => uniform_node_label(a),
    };
    let mut functions = BTreeMap::new();
    let mut ids = Vec::with_capacity(funcs.len());
    for f in &funcs {
        let id = g.add_node(label.clone());
        functions.insert(
            id,
            bn.iter()
                .copied()
                .zip(f.iter().copied())
                .collect::<BTreeMap<_, _>>(),
        );
        ids.push(id);
    }
    let ia = LinkIndex::build(a);
    let mut signature = sig.links.clone();
    signature.extend(Signature::of(&[a, b]).links);
    let bpos: BTreeMap<AtomId, usize> = bn.iter().enumerate().map(|(i, x)| (*x, i)).collect();
    for (ty, arity) in signature {
        let blinks: BTreeSet<Vec<usize>> = b
            .links()
            .filter(|l| l.type_name().map(String::from) == ty && l.targets().len() == arity)
            .map(|l| l.targets().iter().map(|t| bpos[t]).collect())
            .collect();
        let tuples = (funcs.len() as u128)
            .checked_pow(arity as u32)
            .unwrap_or(u128::MAX);
        if tuples > 100 * cap as u128 {
            return Err(HeytingError::ExponentTooLarge { nodes: n, cap });
        }
        let mut idx = alloc::vec![0usize; arity];
        if funcs.is_empty() {
            continue;
        }
        loop {
            let ok = blinks.iter().all(|bl| {
                let img: Vec<AtomId> = bl
                    .iter()
                    .enumerate()
                    .map(|(j, bi)| funcs[idx[j]][*bi])
                    .collect();
                ia.get(ty.as_deref(), &img).is_some()
            });
            if ok {
                let targets = idx.iter().map(|i| ids[*i]).collect();
                g.add_link(targets, ty.as_deref().map(Label::of))
                    .expect("nodes exist");
            }
            let mut k = arity;
            let mut done = true;
            while k > 0 {
                k -= 1;
                idx[k] += 1;
                if idx[k] < funcs.len() {
                    done = false;
                    break;
                }
                idx[k] = 0;
            }
            if done {
                break;
            }
        }
    }
    Ok(Exponent {
        graph: g,
        functions,
    })
}

/// Heyting implication `premise → conclusion`, i.e. `conclusion^premise`.
pub fn implication(
    premise: &Hypergraph,
    conclusion: &Hypergraph,
) -> Result<Exponent, HeytingError> {
    exponent(conclusion, premise)
}

/// Pseudo-complement of `sub` in the lattice of sub-hypergraphs of
/// `ambient`: the largest closed sub-hypergraph sharing no atom with `sub`.
pub fn pseudo_complement(sub: &Hypergraph, ambient: &Hypergraph) -> Hypergraph {
    let mut keep: BTreeSet<AtomId> = BTreeSet::new();
    for n in ambient.nodes() {
        if !sub.contains(n.id()) {
            keep.insert(n.id());
        }
    }
    for l in ambient.links_topological() {
        let atom = ambient.atom(l).expect("link");
        if !sub.contains(l) && atom.targets().iter().all(|t| keep.contains(t)) {
            keep.insert(l);
        }
    }
    ambient.closure_of(keep)
}
