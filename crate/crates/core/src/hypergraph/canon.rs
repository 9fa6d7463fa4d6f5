//! Canonical strings: equal iff the graphs are isomorphic.
//!
//! Individualisation-refinement over node colourings seeded by type names.
//! Every leaf is a total order of the nodes; the lexicographically smallest
//! encoding wins. Branches are skipped when a known automorphism fixing the
//! current prefix maps an explored sibling onto them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use super::{AtomId, GraphError, Hypergraph};

pub const CANON_EMPTY: &str = "hg:empty";

/// Leaves of the search tree visited before giving up with [`GraphError::TooLarge`].
pub const DEFAULT_CANON_PERMUTATIONS: u64 = 362_880;

const MAX_STORED_AUTOMORPHISMS: usize = 256;

pub fn canonical_form(g: &Hypergraph) -> Result<String, GraphError> {
    canonical_form_bounded(g, DEFAULT_CANON_PERMUTATIONS)
}

fn type_code(t: Option<&str>) -> String {
    match t {
        None => String::from("-"),
        Some(t) => format!("{}:{}", t.len(), t),
    }
}

fn encode(g: &Hypergraph, order: &[AtomId]) -> String {
    let pos: BTreeMap<AtomId, usize> = order.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let mut s = String::new();
    for n in order {
        let _ = write!(s, "{},", type_code(g.type_of(*n)));
    }
    s.push('|');
    let mut memo: BTreeMap<AtomId, String> = BTreeMap::new();
    let mut encs = BTreeSet::new();
    for l in g.links_topological() {
        let atom = g.atom(l).expect("link");
        let mut e = type_code(atom.type_name());
        e.push('(');
        for t in atom.targets() {
            match pos.get(t) {
                Some(p) => {
                    let _ = write!(e, "#{},", p);
                }
                None => {
                    let _ = write!(e, "[{}],", memo[t]);
                }
            }
        }
        e.push(')');
        memo.insert(l, e.clone());
        encs.insert(e);
    }
    for e in encs {
        s.push_str(&e);
        s.push(';');
    }
    s
}

/// Ranks values densely, preserving their order.
fn rank<T: Ord + Clone>(sigs: &[T]) -> Vec<usize> {
    let distinct: BTreeSet<&T> = sigs.iter().collect();
    let order: BTreeMap<&T, usize> = distinct
        .into_iter()
        .enumerate()
        .map(|(i, s)| (s, i))
        .collect();
    sigs.iter().map(|s| order[s]).collect()
}

type Sig = (usize, Vec<(usize, usize, Vec<usize>)>);

struct Search<'a> {
    g: &'a Hypergraph,
    nodes: Vec<AtomId>,
    /// Node-only links as (type rank, target indices).
    links: Vec<(usize, Vec<usize>)>,
    incidence: Vec<Vec<(usize, usize)>>,
    best: Option<(String, Vec<usize>)>,
    automorphisms: Vec<Vec<usize>>,
    leaves: u64,
    max_leaves: u64,
}

impl Search<'_> {
    fn refine(&self, mut colour: Vec<usize>) -> Vec<usize> {
        loop {
            let classes = colour.iter().collect::<BTreeSet<_>>().len();
            let sigs: Vec<Sig> = (0..self.nodes.len())
                .map(|n| {
                    let mut inc: Vec<(usize, usize, Vec<usize>)> = self.incidence[n]
                        .iter()
                        .map(|&(l, pos)| {
                            let (t, targets) = &self.links[l];
                            (*t, pos, targets.iter().map(|x| colour[*x]).collect())
                        })
                        .collect();
                    inc.sort();
                    inc.dedup();
                    (colour[n], inc)
                })
                .collect();
            let next = rank(&sigs);
            if next.iter().collect::<BTreeSet<_>>().len() == classes {
                return colour;
            }
            colour = next;
        }
    }

    fn order_of(&self, colour: &[usize]) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..colour.len()).collect();
        idx.sort_by_key(|&i| colour[i]);
        idx
    }

    fn encode_indices(&self, order: &[usize]) -> String {
        let atoms: Vec<AtomId> = order.iter().map(|&i| self.nodes[i]).collect();
        encode(self.g, &atoms)
    }

    fn remember(&mut self, sigma: Vec<usize>) {
        if sigma.iter().enumerate().any(|(i, &j)| i != j)
            && self.automorphisms.len() < MAX_STORED_AUTOMORPHISMS
            && !self.automorphisms.contains(&sigma)
        {
            self.automorphisms.push(sigma);
        }
    }

    fn is_transposition_automorphism(&self, base: &str, u: usize, v: usize) -> bool {
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.swap(u, v);
        self.encode_indices(&order) == base
    }

    fn search(
        &mut self,
        colour: Vec<usize>,
        prefix: &mut Vec<usize>,
        base: &str,
    ) -> Result<(), GraphError> {
        let n = colour.len();
        let mut cells: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, c) in colour.iter().enumerate() {
            cells.entry(*c).or_default().push(i);
        }
        let Some((&target, cell)) = cells.iter().find(|(_, v)| v.len() > 1) else {
            self.leaves += 1;
            if self.leaves > self.max_leaves {
                return Err(GraphError::TooLarge(self.max_leaves));
            }
            let order = self.order_of(&colour);
            let e = self.encode_indices(&order);
            match &self.best {
                Some((b, best_order)) if *b == e => {
                    let mut sigma = vec![0; n];
                    for (k, &i) in best_order.iter().enumerate() {
                        sigma[i] = order[k];
                    }
                    self.remember(sigma);
                }
                Some((b, _)) if *b < e => {}
                _ => self.best = Some((e, order)),
            }
            return Ok(());
        };
        let cell = cell.clone();
        let mut explored: Vec<usize> = Vec::new();
        for &v in &cell {
            let covered = explored.iter().any(|&u| {
                self.automorphisms
                    .iter()
                    .any(|s| s[u] == v && prefix.iter().all(|&p| s[p] == p))
            });
            if covered {
                continue;
            }
            if let Some(&u) = explored
                .iter()
                .find(|&&u| self.is_transposition_automorphism(base, u, v))
            {
                let mut sigma: Vec<usize> = (0..n).collect();
                sigma.swap(u, v);
                self.remember(sigma);
                continue;
            }
            let split: Vec<(usize, usize)> = colour
                .iter()
                .enumerate()
                .map(|(i, &c)| (c, usize::from(c == target && i != v)))
                .collect();
            let next = self.refine(rank(&split));
            prefix.push(v);
            self.search(next, prefix, base)?;
            prefix.pop();
            explored.push(v);
        }
        Ok(())
    }
}

/// As [`canonical_form`] with an explicit bound on search-tree leaves.
pub fn canonical_form_bounded(g: &Hypergraph, max_orderings: u64) -> Result<String, GraphError> {
    if g.is_empty() {
        return Ok(String::from(CANON_EMPTY));
    }
    let nodes = g.node_ids();
    let index: BTreeMap<AtomId, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let type_codes: Vec<String> = g.links().map(|l| type_code(l.type_name())).collect();
    let type_rank = rank(&type_codes);
    let mut links = Vec::new();
    let mut incidence = vec![Vec::new(); nodes.len()];
    for (l, t) in g.links().zip(type_rank) {
        let Some(targets) = l
            .targets()
            .iter()
            .map(|x| index.get(x).copied())
            .collect::<Option<Vec<_>>>()
        else {
            continue;
        };
        for (pos, &x) in targets.iter().enumerate() {
            incidence[x].push((links.len(), pos));
        }
        links.push((t, targets));
    }
    let mut search = Search {
        g,
        nodes,
        links,
        incidence,
        best: None,
        automorphisms: Vec::new(),
        leaves: 0,
        max_leaves: max_orderings,
    };
    let seed = rank(
        &search
            .nodes
            .iter()
            .map(|n| type_code(g.type_of(*n)))
            .collect::<Vec<_>>(),
    );
    let start = search.refine(seed);
    let base = search.encode_indices(&(0..search.nodes.len()).collect::<Vec<_>>());
    search.search(start, &mut Vec::new(), &base)?;
    Ok(search.best.expect("at least one leaf").0)
}
