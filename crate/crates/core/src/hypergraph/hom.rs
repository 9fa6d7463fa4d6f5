//! Structure-preserving maps between hypergraphs.
//!
//! A homomorphism is a node map under which every source link has an image
//! link of the same type whose targets are the pointwise images. Link images
//! are implied by the node map. Duplicate links (same type, same targets) are
//! one link for every structural purpose here.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Zero;

use super::{AtomId, Hypergraph};
use crate::rational::{int, Rational};

/// Default bound on backtracking steps before a search reports truncation.
pub const DEFAULT_EXACT_THRESHOLD: u64 = 10_000_000;

pub(crate) type LinkKey = (Option<String>, Vec<AtomId>);

/// Duplicate-collapsing link lookup: each link maps to a representative,
/// and `(type, representative targets)` keys resolve to representatives.
#[derive(Debug, Clone, Default)]
pub(crate) struct LinkIndex {
    pub rep: BTreeMap<AtomId, AtomId>,
    pub by_key: BTreeMap<LinkKey, AtomId>,
}

impl LinkIndex {
    pub fn build(g: &Hypergraph) -> Self {
        let mut idx = LinkIndex::default();
        for l in g.links_topological() {
            let atom = g.atom(l).expect("listed link");
            let targets = atom.targets().iter().map(|t| idx.resolve(*t)).collect();
            let key = (atom.type_name().map(String::from), targets);
            let rep = *idx.by_key.entry(key).or_insert(l);
            idx.rep.insert(l, rep);
        }
        idx
    }

    pub fn resolve(&self, id: AtomId) -> AtomId {
        self.rep.get(&id).copied().unwrap_or(id)
    }

    pub fn get(&self, ty: Option<&str>, targets: &[AtomId]) -> Option<AtomId> {
        // Keys own their strings; build one for the lookup.
        self.by_key
            .get(&(ty.map(String::from), targets.to_vec()))
            .copied()
    }

    pub fn distinct(&self) -> usize {
        self.by_key.len()
    }
}

/// How source nodes choose their candidate images.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum NodeRule {
    /// Type names must be equal (absent label matches only absent label).
    SameType,
    /// Nodes labeled `variable` match any node; others need an equal type.
    Pattern,
}

/// Backtracking enumeration of node maps from `src` into `dst`.
pub(crate) struct MapSearch<'a> {
    src: &'a Hypergraph,
    dst: &'a Hypergraph,
    src_nodes: Vec<AtomId>,
    candidates: Vec<Vec<AtomId>>,
    checks: Vec<Vec<AtomId>>,
    dst_index: LinkIndex,
    pub injective: bool,
    pub reflexive: bool,
    pub max_merges: Option<u64>,
    pub budget: u64,
    pub exhausted: bool,
    steps: u64,
}

#[derive(Debug, Clone, Copy)]
enum LinkImage {
    Link(AtomId),
    Point(AtomId),
}

impl<'a> MapSearch<'a> {
    pub fn new(src: &'a Hypergraph, dst: &'a Hypergraph, rule: NodeRule) -> Self {
        let src_nodes = src.node_ids();
        let dst_nodes: Vec<_> = dst.nodes().collect();
        let candidates = src_nodes
            .iter()
            .map(|n| {
                let atom = src.atom(*n).expect("node");
                dst_nodes
                    .iter()
                    .filter(|d| match rule {
                        NodeRule::SameType => d.type_name() == atom.type_name(),
                        NodeRule::Pattern => {
                            atom.type_name() == Some(super::VARIABLE)
                                || d.type_name() == atom.type_name()
                        }
                    })
                    .map(|d| d.id())
                    .collect()
            })
            .collect();
        let pos: BTreeMap<AtomId, usize> =
            src_nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let mut ready: BTreeMap<AtomId, usize> = BTreeMap::new();
        let mut checks = alloc::vec![Vec::new(); src_nodes.len()];
        for l in src.links_topological() {
            let r = src
                .atom(l)
                .expect("link")
                .targets()
                .iter()
                .map(|t| pos.get(t).copied().unwrap_or_else(|| ready[t]))
                .max()
                .expect("links have targets");
            ready.insert(l, r);
            checks[r].push(l);
        }
        MapSearch {
            src,
            dst,
            src_nodes,
            candidates,
            checks,
            dst_index: LinkIndex::build(dst),
            injective: false,
            reflexive: false,
            max_merges: None,
            budget: DEFAULT_EXACT_THRESHOLD,
            exhausted: false,
            steps: 0,
        }
    }

    pub fn src_nodes(&self) -> &[AtomId] {
        &self.src_nodes
    }

    /// Calls `visit` with the image of each source node (in `src_nodes`
    /// order) for every valid map. `visit` returns `false` to stop.
    pub fn run<F: FnMut(&[AtomId]) -> bool>(&mut self, mut visit: F) {
        if self.src_nodes.is_empty() {
            // Links without nodes are impossible in a closed graph.
            visit(&[]);
            return;
        }
        if self.injective && self.src_nodes.len() > self.dst.node_count() {
            return;
        }
        let mut img = Vec::with_capacity(self.src_nodes.len());
        let mut links = BTreeMap::new();
        let mut mult = BTreeMap::new();
        self.descend(0, &mut img, &mut links, &mut mult, &mut visit);
    }

    fn descend<F: FnMut(&[AtomId]) -> bool>(
        &mut self,
        pos: usize,
        img: &mut Vec<AtomId>,
        links: &mut BTreeMap<AtomId, LinkImage>,
        mult: &mut BTreeMap<AtomId, u32>,
        visit: &mut F,
    ) -> bool {
        if pos == self.src_nodes.len() {
            return visit(img);
        }
        for ci in 0..self.candidates[pos].len() {
            self.steps += 1;
            if self.steps > self.budget {
                self.exhausted = true;
                return false;
            }
            let cand = self.candidates[pos][ci];
            let seen = mult.get(&cand).copied().unwrap_or(0);
            if self.injective && seen > 0 {
                continue;
            }
            let merges_after = (pos as u64 + 1) - (mult.len() as u64 + u64::from(seen == 0));
            if let Some(m) = self.max_merges {
                if merges_after > m {
                    continue;
                }
            }
            img.push(cand);
            *mult.entry(cand).or_insert(0) += 1;
            let mut added = Vec::new();
            let ok = self.check_links(pos, img, links, &mut added);
            let keep_going = if ok {
                self.descend(pos + 1, img, links, mult, visit)
            } else {
                true
            };
            for l in added {
                links.remove(&l);
            }
            img.pop();
            let c = mult.get_mut(&cand).expect("counted");
            *c -= 1;
            if *c == 0 {
                mult.remove(&cand);
            }
            if !keep_going {
                return false;
            }
        }
        true
    }

    fn check_links(
        &self,
        pos: usize,
        img: &[AtomId],
        links: &mut BTreeMap<AtomId, LinkImage>,
        added: &mut Vec<AtomId>,
    ) -> bool {
        for l in &self.checks[pos] {
            let atom = self.src.atom(*l).expect("link");
            let mut targets = Vec::with_capacity(atom.targets().len());
            let mut all_nodes = true;
            for t in atom.targets() {
                match self.src_nodes.binary_search(t) {
                    Ok(p) => targets.push(img[p]),
                    Err(_) => {
                        all_nodes = false;
                        match links[t] {
                            LinkImage::Link(x) | LinkImage::Point(x) => targets.push(x),
                        }
                    }
                }
            }
            let image = match self.dst_index.get(atom.type_name(), &targets) {
                Some(rep) => LinkImage::Link(rep),
                None if self.reflexive && all_nodes && targets.iter().all(|t| *t == targets[0]) => {
                    LinkImage::Point(targets[0])
                }
                None => return false,
            };
            links.insert(*l, image);
            added.push(*l);
        }
        true
    }
}

/// One elementary merge: `second` is identified with `first`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct MergeStep {
    pub first: AtomId,
    pub second: AtomId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Homomorphism {
    /// Source node → target node.
    pub vertex_map: BTreeMap<AtomId, AtomId>,
    pub steps: Vec<MergeStep>,
    pub cost: Rational,
}

pub trait CostModel {
    fn cost(&self, src: &Hypergraph, vertex_map: &BTreeMap<AtomId, AtomId>) -> Rational;

    /// Whether partial maps may be pruned by their merge count.
    fn prunes_by_merges(&self) -> bool {
        false
    }
}

/// Cost = number of elementary merges = |source nodes| − |image nodes|.
#[derive(Debug, Clone, Copy, Default)]
pub struct MergeCount;

impl CostModel for MergeCount {
    fn cost(&self, _src: &Hypergraph, vertex_map: &BTreeMap<AtomId, AtomId>) -> Rational {
        let image: BTreeSet<_> = vertex_map.values().collect();
        int((vertex_map.len() - image.len()) as i64)
    }

    fn prunes_by_merges(&self) -> bool {
        true
    }
}

impl Homomorphism {
    pub(crate) fn from_parts(vertex_map: BTreeMap<AtomId, AtomId>, steps: Vec<MergeStep>) -> Self {
        Homomorphism {
            vertex_map,
            cost: int(steps.len() as i64),
            steps,
        }
    }

    /// Builds the merge decomposition from the fibres of `vertex_map`:
    /// within each fibre (ascending), every later node merges into the first.
    pub fn from_map(vertex_map: BTreeMap<AtomId, AtomId>) -> Self {
        let mut fibres: BTreeMap<AtomId, Vec<AtomId>> = BTreeMap::new();
        for (s, t) in &vertex_map {
            fibres.entry(*t).or_default().push(*s);
        }
        let mut steps = Vec::new();
        for fibre in fibres.values() {
            for s in &fibre[1..] {
                steps.push(MergeStep {
                    first: fibre[0],
                    second: *s,
                });
            }
        }
        steps.sort();
        Self::from_parts(vertex_map, steps)
    }

    pub fn identity(g: &Hypergraph) -> Self {
        Self::from_map(g.nodes().map(|n| (n.id(), n.id())).collect())
    }

    pub fn merges(&self) -> usize {
        self.steps.len()
    }

    /// `next ∘ self`. Nodes whose image is outside `next`'s domain are dropped.
    pub fn compose(&self, next: &Homomorphism) -> Homomorphism {
        let map = self
            .vertex_map
            .iter()
            .filter_map(|(s, m)| next.vertex_map.get(m).map(|t| (*s, *t)))
            .collect();
        Homomorphism::from_map(map)
    }

    /// Post-hoc check that every link of `src` has an image link in `dst`.
    pub fn is_valid(&self, src: &Hypergraph, dst: &Hypergraph) -> bool {
        if src.nodes().any(|n| !self.vertex_map.contains_key(&n.id())) {
            return false;
        }
        let index = LinkIndex::build(dst);
        let mut link_img: BTreeMap<AtomId, AtomId> = BTreeMap::new();
        for l in src.links_topological() {
            let atom = src.atom(l).expect("link");
            let targets: Option<Vec<AtomId>> = atom
                .targets()
                .iter()
                .map(|t| self.vertex_map.get(t).or_else(|| link_img.get(t)).copied())
                .collect();
            match targets.and_then(|t| index.get(atom.type_name(), &t)) {
                Some(rep) => {
                    link_img.insert(l, rep);
                }
                None => return false,
            }
        }
        true
    }
}

#[derive(Debug, Clone)]
pub struct HomSearch {
    /// Upper bound on cost; `None` means unbounded.
    pub max_cost: Option<Rational>,
    pub max_results: usize,
    /// Backtracking step budget; searches that exhaust it are truncated.
    pub exact_threshold: u64,
    /// Allow a link whose targets all collapse to one node to map onto that
    /// node (reflexive-graph semantics).
    pub reflexive: bool,
}

impl Default for HomSearch {
    fn default() -> Self {
        HomSearch {
            max_cost: None,
            max_results: usize::MAX,
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
            reflexive: false,
        }
    }
}

impl HomSearch {
    pub fn with_max_cost(mut self, c: Rational) -> Self {
        self.max_cost = Some(c);
        self
    }

    pub fn with_max_results(mut self, n: usize) -> Self {
        self.max_results = n;
        self
    }

    pub fn reflexive(mut self) -> Self {
        self.reflexive = true;
        self
    }
}

#[derive(Debug, Clone)]
pub struct HomSearchResult {
    pub homs: Vec<Homomorphism>,
    /// Either the step budget ran out or `max_results` cut the list short.
    pub truncated: bool,
}

pub fn find_homomorphisms(
    src: &Hypergraph,
    dst: &Hypergraph,
    search: &HomSearch,
) -> HomSearchResult {
    find_homomorphisms_with(src, dst, search, &MergeCount)
}

/// Homomorphisms in lexicographic order of the image sequence (source nodes
/// ascending), filtered by `model`'s cost.
pub fn find_homomorphisms_with<M: CostModel + ?Sized>(
    src: &Hypergraph,
    dst: &Hypergraph,
    search: &HomSearch,
    model: &M,
) -> HomSearchResult {
    let mut ms = MapSearch::new(src, dst, NodeRule::SameType);
    ms.reflexive = search.reflexive;
    ms.budget = search.exact_threshold;
    if model.prunes_by_merges() {
        if let Some(c) = &search.max_cost {
            ms.max_merges = Some(floor_u64(c));
        }
    }
    let nodes = ms.src_nodes().to_vec();
    let mut homs = Vec::new();
    let mut cut = false;
    ms.run(|img| {
        let map: BTreeMap<AtomId, AtomId> =
            nodes.iter().copied().zip(img.iter().copied()).collect();
        let cost = model.cost(src, &map);
        if search.max_cost.as_ref().is_some_and(|m| cost > *m) {
            return true;
        }
        if homs.len() == search.max_results {
            cut = true;
            return false;
        }
        let mut h = Homomorphism::from_map(map);
        h.cost = cost;
        homs.push(h);
        true
    });
    HomSearchResult {
        homs,
        truncated: cut || ms.exhausted,
    }
}

fn floor_u64(c: &Rational) -> u64 {
    use num_traits::ToPrimitive;
    if c < &Rational::zero() {
        return 0;
    }
    c.floor().to_integer().to_u64().unwrap_or(u64::MAX)
}

/// Number of (strict) homomorphisms `src → dst`.
pub fn count_homomorphisms(src: &Hypergraph, dst: &Hypergraph) -> u64 {
    let mut ms = MapSearch::new(src, dst, NodeRule::SameType);
    ms.budget = u64::MAX;
    let mut n = 0u64;
    ms.run(|_| {
        n += 1;
        true
    });
    n
}

/// A type-preserving node bijection preserving links in both directions,
/// if one exists.
pub fn is_isomorphic(g1: &Hypergraph, g2: &Hypergraph) -> Option<BTreeMap<AtomId, AtomId>> {
    if g1.node_count() != g2.node_count() {
        return None;
    }
    let (i1, i2) = (LinkIndex::build(g1), LinkIndex::build(g2));
    if i1.distinct() != i2.distinct() {
        return None;
    }
    let hist = |g: &Hypergraph| {
        let mut h: BTreeMap<Option<String>, usize> = BTreeMap::new();
        for n in g.nodes() {
            *h.entry(n.type_name().map(String::from)).or_default() += 1;
        }
        h
    };
    if hist(g1) != hist(g2) {
        return None;
    }
    let mut ms = MapSearch::new(g1, g2, NodeRule::SameType);
    ms.injective = true;
    ms.budget = u64::MAX;
    let nodes = ms.src_nodes().to_vec();
    let mut witness = None;
    // Injective on nodes + every link preserved + equal distinct link counts
    // makes the induced link map a bijection.
    ms.run(|img| {
        witness = Some(nodes.iter().copied().zip(img.iter().copied()).collect());
        false
    });
    witness
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::Label;
    use alloc::vec;

    pub(crate) fn cycle(n: usize, ty: &str) -> Hypergraph {
        let mut g = Hypergraph::new();
        let ids: Vec<_> = (0..n).map(|_| g.add_typed_node("s")).collect();
        for i in 0..n {
            g.add_typed_link(ty, &[ids[i], ids[(i + 1) % n]]).unwrap();
        }
        g
    }

    fn directed_path(n: usize) -> Hypergraph {
        let mut g = Hypergraph::new();
        let ids: Vec<_> = (0..n).map(|_| g.add_typed_node("s")).collect();
        for w in ids.windows(2) {
            g.add_typed_link("e", w).unwrap();
        }
        g
    }

    fn undirected(n: usize, edges: &[(usize, usize)]) -> Hypergraph {
        let mut g = Hypergraph::new();
        let ids: Vec<_> = (0..n).map(|_| g.add_typed_node("s")).collect();
        for (a, b) in edges {
            g.add_typed_link("e", &[ids[*a], ids[*b]]).unwrap();
            g.add_typed_link("e", &[ids[*b], ids[*a]]).unwrap();
        }
        g
    }

    fn loop_node() -> Hypergraph {
        let mut g = Hypergraph::new();
        let v = g.add_typed_node("s");
        g.add_typed_link("e", &[v, v]).unwrap();
        g
    }

    #[test]
    fn path_onto_self_loop_costs_two() {
        let res = find_homomorphisms(&directed_path(3), &loop_node(), &HomSearch::default());
        assert_eq!(res.homs.len(), 1);
        assert_eq!(res.homs[0].cost, int(2));
        assert!(!res.truncated);
    }

    #[test]
    fn identity_costs_zero() {
        let g = cycle(4, "e");
        let res = find_homomorphisms(&g, &g, &HomSearch::default().with_max_cost(int(0)));
        assert!(res
            .homs
            .iter()
            .any(|h| h.vertex_map.iter().all(|(a, b)| a == b)));
        assert!(res.homs.iter().all(|h| h.cost == int(0)));
    }

    #[test]
    fn triangle_has_no_hom_to_edge() {
        let tri = undirected(3, &[(0, 1), (1, 2), (2, 0)]);
        let edge = undirected(2, &[(0, 1)]);
        assert!(find_homomorphisms(&tri, &edge, &HomSearch::default())
            .homs
            .is_empty());
        // Directed version as well.
        let mut e = Hypergraph::new();
        let a = e.add_typed_node("s");
        let b = e.add_typed_node("s");
        e.add_typed_link("e", &[a, b]).unwrap();
        assert!(
            find_homomorphisms(&cycle(3, "e"), &e, &HomSearch::default())
                .homs
                .is_empty()
        );
    }

    #[test]
    fn reflexive_mode_collapses_links() {
        let mut point = Hypergraph::new();
        point.add_typed_node("s");
        assert!(
            find_homomorphisms(&directed_path(3), &point, &HomSearch::default())
                .homs
                .is_empty()
        );
        let res = find_homomorphisms(&directed_path(3), &point, &HomSearch::default().reflexive());
        assert_eq!(res.homs.len(), 1);
    }

    #[test]
    fn max_results_truncates() {
        let g = undirected(3, &[(0, 1), (1, 2), (2, 0)]);
        let res = find_homomorphisms(&g, &g, &HomSearch::default().with_max_results(2));
        assert_eq!(res.homs.len(), 2);
        assert!(res.truncated);
    }

    #[test]
    fn iso_cases() {
        let t1 = cycle(3, "e");
        let (t2, _) = t1.renumbered(100);
        let w = is_isomorphic(&t1, &t2).expect("renamed triangle");
        assert_eq!(w.len(), 3);
        assert!(is_isomorphic(&t1, &directed_path(3)).is_none());
        let star = undirected(4, &[(0, 1), (0, 2), (0, 3)]);
        let path = undirected(4, &[(0, 1), (1, 2), (2, 3)]);
        assert!(is_isomorphic(&star, &path).is_none());
    }

    #[test]
    fn iso_respects_types() {
        let mut a = Hypergraph::new();
        a.add_node(Some(Label::of("x")));
        let mut b = Hypergraph::new();
        b.add_node(Some(Label::of("y")));
        assert!(is_isomorphic(&a, &b).is_none());
    }

    #[test]
    fn duplicate_links_are_one_link() {
        let mut a = Hypergraph::new();
        let x = a.add_typed_node("s");
        let y = a.add_typed_node("s");
        a.add_typed_link("e", &[x, y]).unwrap();
        let mut b = a.clone();
        b.add_typed_link("e", &[x, y]).unwrap();
        assert!(is_isomorphic(&a, &b).is_some());
    }

    #[test]
    fn composition_cost_is_subadditive() {
        let p = directed_path(3);
        let (m1, h1) = p.merge_nodes(AtomId(0), AtomId(1)).unwrap();
        let res = find_homomorphisms(&m1, &loop_node(), &HomSearch::default());
        let h2 = &res.homs[0];
        let h = h1.compose(h2);
        assert!(h.is_valid(&p, &loop_node()));
        assert!(h.cost <= h1.cost.clone() + h2.cost.clone());
        assert_eq!(vec![h.cost], vec![int(2)]);
    }
}
