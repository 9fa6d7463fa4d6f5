//! Probability of a sub-hypergraph relative to an ambient graph.
//!
//! The default functional counts homomorphic images of a small connected
//! probe: `prob(sub) = hom(probe, sub) / hom(probe, ambient)`. A connected
//! probe lands inside one component, so the value adds over disjoint joins,
//! and homs into a product factor, so it multiplies over meets.

use alloc::vec::Vec;

use super::HeytingError;
use crate::hypergraph::{AtomId, Hypergraph, LinkIndex, MapSearch, NodeRule, VARIABLE};
use crate::rational::{ratio, zero};
use crate::rng::Rng;
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbFlag {
    /// The denominator count is zero; the value is reported as 0.
    ZeroAmbient,
    /// Exact search ran out of budget; the value is a seeded estimate.
    Estimated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbResult {
    pub value: Rational,
    pub flag: Option<ProbFlag>,
    /// Standard error when the value is estimated.
    pub stderr: Option<f64>,
}

impl ProbResult {
    fn exact(value: Rational) -> Self {
        ProbResult {
            value,
            flag: None,
            stderr: None,
        }
    }

    fn zero_ambient() -> Self {
        ProbResult {
            value: zero(),
            flag: Some(ProbFlag::ZeroAmbient),
            stderr: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    /// Draws that landed in the ambient graph (the effective sample).
    pub n_samples: u64,
    pub draws: u64,
    pub seed: u64,
}

pub trait ProbabilityFunctional {
    fn prob(&self, sub: &Hypergraph, ambient: &Hypergraph) -> ProbResult;
}

#[derive(Debug, Clone)]
pub struct CountingFunctional {
    probe: Hypergraph,
}

impl Default for CountingFunctional {
    fn default() -> Self {
        Self::point()
    }
}

impl CountingFunctional {
    /// Probe = one variable node: counts nodes.
    pub fn point() -> Self {
        let mut probe = Hypergraph::new();
        probe.add_typed_node(VARIABLE);
        CountingFunctional { probe }
    }

    /// Probe = one binary link of type `link_type` between variables.
    pub fn link(link_type: &str) -> Self {
        let mut probe = Hypergraph::new();
        let a = probe.add_typed_node(VARIABLE);
        let b = probe.add_typed_node(VARIABLE);
        probe
            .add_typed_link(link_type, &[a, b])
            .expect("nodes exist");
        CountingFunctional { probe }
    }

    pub fn with_probe(probe: Hypergraph) -> Result<Self, HeytingError> {
        let flat = probe.links().all(|l| {
            l.targets()
                .iter()
                .all(|t| probe.atom(*t).is_some_and(|x| x.is_node()))
        });
        if !probe.is_connected() || !flat {
            return Err(HeytingError::BadProbe);
        }
        Ok(CountingFunctional { probe })
    }

    pub fn probe(&self) -> &Hypergraph {
        &self.probe
    }

    /// Number of homomorphisms from the probe into `g`.
    pub fn count(&self, g: &Hypergraph) -> u64 {
        let mut search = MapSearch::new(&self.probe, g, NodeRule::Pattern);
        search.budget = u64::MAX;
        let mut n = 0u64;
        search.run(|_| {
            n += 1;
            true
        });
        n
    }

    /// Monte Carlo estimate of [`ProbabilityFunctional::prob`]: uniform
    /// random node maps of the probe, kept when they are homomorphisms into
    /// `ambient`, scored by whether they also land in `sub`.
    pub fn monte_carlo(
        &self,
        sub: &Hypergraph,
        ambient: &Hypergraph,
        draws: u64,
        seed: u64,
    ) -> Result<McEstimate, HeytingError> {
        if !sub.is_subgraph_of(ambient) {
            return Err(HeytingError::NotASubgraph);
        }
        let nodes = self.probe.node_ids();
        let candidates: Vec<Vec<AtomId>> = nodes
            .iter()
            .map(|n| {
                let ty = self.probe.type_of(*n);
                ambient
                    .nodes()
                    .filter(|d| ty == Some(VARIABLE) || d.type_name() == ty)
                    .map(|d| d.id())
                    .collect()
            })
            .collect();
        let mut rng = Rng::new(seed);
        let (amb_idx, sub_idx) = (LinkIndex::build(ambient), LinkIndex::build(sub));
        let (mut accepted, mut hits) = (0u64, 0u64);
        if candidates.iter().all(|c| !c.is_empty()) {
            let mut img = alloc::vec![AtomId(0); nodes.len()];
            for _ in 0..draws {
                for (slot, c) in img.iter_mut().zip(&candidates) {
                    *slot = c[rng.below(c.len() as u64) as usize];
                }
                if !self.lands(&nodes, &img, ambient, &amb_idx) {
                    continue;
                }
                accepted += 1;
                if self.lands(&nodes, &img, sub, &sub_idx) {
                    hits += 1;
                }
            }
        }
        let (estimate, stderr) = if accepted == 0 {
            (0.0, 0.0)
        } else {
            let p = hits as f64 / accepted as f64;
            (p, num_traits::Float::sqrt(p * (1.0 - p) / accepted as f64))
        };
        Ok(McEstimate {
            estimate,
            stderr,
            n_samples: accepted,
            draws,
            seed,
        })
    }

    fn lands(&self, nodes: &[AtomId], img: &[AtomId], g: &Hypergraph, idx: &LinkIndex) -> bool {
        if !img.iter().all(|x| g.contains(*x)) {
            return false;
        }
        self.probe.links().all(|l| {
            let targets: Vec<AtomId> = l
                .targets()
                .iter()
                .map(|t| img[nodes.binary_search(t).expect("flat probe")])
                .collect();
            idx.get(l.type_name(), &targets).is_some()
        })
    }
}

impl ProbabilityFunctional for CountingFunctional {
    fn prob(&self, sub: &Hypergraph, ambient: &Hypergraph) -> ProbResult {
        let total = self.count(ambient);
        if total == 0 {
            return ProbResult::zero_ambient();
        }
        ProbResult::exact(ratio(self.count(sub) as i64, total as i64))
    }
}

/// Alternate functional: the share of label-compatible node maps of `sub`
/// into `ambient` that are homomorphisms. The empty graph scores 1 and
/// adding links to `sub` can only lower the score; over a disjoint join the
/// score multiplies rather than adds.
#[derive(Debug, Clone)]
pub struct EmbeddingRatio {
    /// Backtracking steps before falling back to sampling.
    pub exact_budget: u64,
    pub fallback_draws: u64,
    pub fallback_seed: u64,
}

impl Default for EmbeddingRatio {
    fn default() -> Self {
        EmbeddingRatio {
            exact_budget: crate::hypergraph::DEFAULT_EXACT_THRESHOLD,
            fallback_draws: 10_000,
            fallback_seed: 0,
        }
    }
}

impl EmbeddingRatio {
    fn candidates(sub: &Hypergraph, ambient: &Hypergraph) -> Vec<Vec<AtomId>> {
        sub.nodes()
            .map(|n| {
                ambient
                    .nodes()
                    .filter(|d| n.type_name() == Some(VARIABLE) || d.type_name() == n.type_name())
                    .map(|d| d.id())
                    .collect()
            })
            .collect()
    }

    /// Seeded estimate of the ratio by uniform label-compatible maps.
    pub fn monte_carlo(
        &self,
        sub: &Hypergraph,
        ambient: &Hypergraph,
        draws: u64,
        seed: u64,
    ) -> McEstimate {
        let cands = Self::candidates(sub, ambient);
        let nodes = sub.node_ids();
        let mut rng = Rng::new(seed);
        let idx = LinkIndex::build(ambient);
        let mut hits = 0u64;
        let live = cands.iter().all(|c| !c.is_empty());
        let mut map = alloc::collections::BTreeMap::new();
        for _ in 0..if live { draws } else { 0 } {
            for (n, c) in nodes.iter().zip(&cands) {
                map.insert(*n, c[rng.below(c.len() as u64) as usize]);
            }
            if maps_links(sub, &map, &idx) {
                hits += 1;
            }
        }
        let n = if live { draws } else { 0 };
        let (estimate, stderr) = if n == 0 {
            (0.0, 0.0)
        } else {
            let p = hits as f64 / n as f64;
            (p, num_traits::Float::sqrt(p * (1.0 - p) / n as f64))
        };
        McEstimate {
            estimate,
            stderr,
            n_samples: n,
            draws,
            seed,
        }
    }
}

/// Whether a node map sends every link of `src` onto a link of the indexed
/// graph (links over links follow their targets' images).
fn maps_links(
    src: &Hypergraph,
    map: &alloc::collections::BTreeMap<AtomId, AtomId>,
    idx: &LinkIndex,
) -> bool {
    let mut image = map.clone();
    for l in src.links_topological() {
        let atom = src.atom(l).expect("link");
        let targets: Vec<AtomId> = atom.targets().iter().map(|t| image[t]).collect();
        match idx.get(atom.type_name(), &targets) {
            Some(rep) => {
                image.insert(l, rep);
            }
            None => return false,
        }
    }
    true
}

impl ProbabilityFunctional for EmbeddingRatio {
    fn prob(&self, sub: &Hypergraph, ambient: &Hypergraph) -> ProbResult {
        let cands = Self::candidates(sub, ambient);
        let mut total = crate::rational::one();
        for c in &cands {
            total *= crate::rational::int(c.len() as i64);
        }
        if total == zero() {
            return ProbResult::zero_ambient();
        }
        let mut search = MapSearch::new(sub, ambient, NodeRule::Pattern);
        search.budget = self.exact_budget;
        let mut n = 0u64;
        search.run(|_| {
            n += 1;
            true
        });
        if !search.exhausted {
            return ProbResult::exact(crate::rational::int(n as i64) / total);
        }
        let est = self.monte_carlo(sub, ambient, self.fallback_draws, self.fallback_seed);
        ProbResult {
            value: crate::rational::from_f64(est.estimate).unwrap_or_else(zero),
            flag: Some(ProbFlag::Estimated),
            stderr: Some(est.stderr),
        }
    }
}
