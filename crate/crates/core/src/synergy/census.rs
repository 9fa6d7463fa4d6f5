//! Counting cheap homomorphisms against isomorphisms between the
//! subgraphs of two CPT graphs.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::hypergraph::{find_homomorphisms, is_isomorphic, AtomId, HomSearch, Hypergraph};
use crate::rational::{int, ratio};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusBounds {
    /// Links per subgraph.
    pub max_links: usize,
    /// Subgraphs enumerated per side.
    pub max_subgraphs: usize,
    /// Merges allowed in a "low-cost" homomorphism.
    pub max_merges: u64,
    /// Backtracking steps per homomorphism search.
    pub hom_budget: u64,
}

impl Default for CensusBounds {
    fn default() -> Self {
        CensusBounds {
            max_links: 3,
            max_subgraphs: 500,
            max_merges: 2,
            hom_budget: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Census {
    pub n_hom: u64,
    pub n_iso: u64,
    pub pairs: u64,
    /// Some bound was hit, so the counts are lower bounds.
    pub partial: bool,
}

impl Census {
    /// `n_hom / n_iso`; `None` when there are no isomorphic pairs.
    pub fn ratio(&self) -> Option<Rational> {
        (self.n_iso > 0).then(|| ratio(self.n_hom as i64, self.n_iso as i64))
    }
}

fn adjacent(g: &Hypergraph, a: AtomId, b: AtomId) -> bool {
    let (ta, tb) = (
        g.atom(a).expect("link").targets(),
        g.atom(b).expect("link").targets(),
    );
    ta.contains(&b) || tb.contains(&a) || ta.iter().any(|t| tb.contains(t))
}

/// Connected closed subgraphs spanned by 1..=`max_links` links, at most
/// `cap` of them. The flag reports truncation.
pub fn connected_subgraphs(
    g: &Hypergraph,
    max_links: usize,
    cap: usize,
) -> (Vec<Hypergraph>, bool) {
    let links: Vec<AtomId> = g.links().map(|l| l.id()).collect();
    let mut seen: BTreeSet<BTreeSet<AtomId>> = BTreeSet::new();
    let mut layer: Vec<BTreeSet<AtomId>> = Vec::new();
    for l in &links {
        let s: BTreeSet<AtomId> = [*l].into();
        if seen.insert(s.clone()) {
            layer.push(s);
        }
    }
    let mut out: Vec<BTreeSet<AtomId>> = layer.clone();
    let mut truncated = out.len() > cap;
    for _ in 1..max_links {
        let mut next = Vec::new();
        for set in &layer {
            for l in &links {
                if set.contains(l) || !set.iter().any(|m| adjacent(g, *l, *m)) {
                    continue;
                }
                let mut bigger = set.clone();
                bigger.insert(*l);
                if seen.insert(bigger.clone()) {
                    next.push(bigger);
                }
            }
        }
        out.extend(next.iter().cloned());
        if out.len() > cap {
            truncated = true;
            break;
        }
        layer = next;
    }
    out.truncate(cap);
    (
        out.into_iter().map(|s| g.closure_of(s)).collect(),
        truncated,
    )
}

/// For every pair `(X ⊆ a, Y ⊆ b)` of connected subgraphs: does a
/// homomorphism of at most `max_merges` merges exist, and is `X ≅ Y`?
/// Isomorphisms are zero-merge homomorphisms, so `n_hom ≥ n_iso`.
pub fn hom_iso_census(a: &Hypergraph, b: &Hypergraph, bounds: &CensusBounds) -> Census {
    let (xs, ta) = connected_subgraphs(a, bounds.max_links, bounds.max_subgraphs);
    let (ys, tb) = connected_subgraphs(b, bounds.max_links, bounds.max_subgraphs);
    let search = HomSearch {
        exact_threshold: bounds.hom_budget,
        ..HomSearch::default()
    }
    .with_max_cost(int(bounds.max_merges as i64))
    .with_max_results(1);
    let mut c = Census {
        n_hom: 0,
        n_iso: 0,
        pairs: 0,
        partial: ta || tb,
    };
    for x in &xs {
        for y in &ys {
            c.pairs += 1;
            if is_isomorphic(x, y).is_some() {
                c.n_iso += 1;
                c.n_hom += 1;
                continue;
            }
            let r = find_homomorphisms(x, y, &search);
            if !r.homs.is_empty() {
                c.n_hom += 1;
            } else if r.truncated {
                c.partial = true;
            }
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize, ty: &str) -> Hypergraph {
        let mut g = Hypergraph::new();
        let ids: Vec<_> = (0..n).map(|_| g.add_typed_node("state")).collect();
        for w in ids.windows(2) {
            g.add_typed_link(ty, w).unwrap();
        }
        g
    }

    #[test]
    fn loop_target_collects_homs_only() {
        let mut lp = Hypergraph::new();
        let s = lp.add_typed_node("state");
        lp.add_typed_link("transition", &[s, s]).unwrap();
        let c = hom_iso_census(&path(3, "transition"), &lp, &CensusBounds::default());
        assert_eq!(c.pairs, 3);
        assert_eq!((c.n_hom, c.n_iso), (3, 0));
        assert_eq!(c.ratio(), None);
        let c = hom_iso_census(&lp, &lp, &CensusBounds::default());
        assert_eq!((c.n_hom, c.n_iso), (1, 1));
    }

    #[test]
    fn disjoint_alphabets_and_self() {
        let c = hom_iso_census(&path(3, "x"), &path(3, "y"), &CensusBounds::default());
        assert_eq!((c.n_hom, c.n_iso), (0, 0));
        let c = hom_iso_census(&path(3, "x"), &path(3, "x"), &CensusBounds::default());
        assert!(c.n_iso >= 1 && c.n_hom >= c.n_iso && !c.partial);
    }

    #[test]
    fn enumeration_bounds() {
        let g = path(6, "x");
        let (subs, cut) = connected_subgraphs(&g, 2, 100);
        assert_eq!(subs.len(), 5 + 4);
        assert!(!cut && subs.iter().all(Hypergraph::is_connected));
        let (subs, cut) = connected_subgraphs(&g, 3, 4);
        assert!(cut && subs.len() == 4);
    }
}
