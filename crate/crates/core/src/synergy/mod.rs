//! The synergy index and probes of how two processes help each other.
//!
//! Two processes are synergetic where exactly one of them is stuck. The
//! index weighs, over a partition of stuckness degrees, the probability of
//! the transition subgraph recorded at those moments inside the whole
//! meta-system graph.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::cpt::{
    conf_and_stuckness, extract_cpt, CatalogPattern, CptError, EpisodeStore, Interval, MetaGraph,
    StuckParams,
};
use crate::heyting::{CountingFunctional, ProbFlag, ProbabilityFunctional};
use crate::hypergraph::Hypergraph;
use crate::rational::{int, one, ratio, to_pq, zero};
use crate::Rational;

mod census;
mod functor;
mod natural;

pub use census::{connected_subgraphs, hom_iso_census, Census, CensusBounds};
pub use functor::{
    functor_map, functor_project, morphism_cost, Cost, FunctorProjection, TransitionSystem,
};
pub use natural::{
    bob_nice, commutation_cost_compare, compare_costs, nat_trans_search, verify_naturality,
    BobNice, Certificate, CostComparison, Morphism, NatTransOutcome, NaturalTransformation,
    DEFAULT_NAT_TRANS_BOUND, EVOLUTION, INFERENCE,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynergyError {
    #[error("partition must cover [0,1] with disjoint cells")]
    BadPartition,
    #[error("weights must be nonnegative, one per cell, and not all zero")]
    BadWeights,
    #[error("graph is not a sub-system of the transition system")]
    NotASubsystem,
    #[error("no component at object {0}")]
    NoComponent(usize),
    #[error("morphism {0} is not a homomorphism between its objects")]
    BadMorphism(usize),
    #[error("undecided at this scale")]
    UndecidedAtScale,
    #[error(transparent)]
    Cpt(#[from] CptError),
}

/// A stuckness cell. The first cell of a partition is closed at 0; every
/// other cell is `(lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cell {
    pub lo: Rational,
    pub hi: Rational,
    pub closed_lo: bool,
}

impl Cell {
    pub fn contains(&self, x: &Rational) -> bool {
        (x > &self.lo || (self.closed_lo && x == &self.lo)) && x <= &self.hi
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / int(2)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.closed_lo { '[' } else { '(' };
        write!(f, "{open}{},{}]", to_pq(&self.lo), to_pq(&self.hi))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    cells: Vec<Cell>,
}

impl Partition {
    /// `[0, 1/n], (1/n, 2/n], ..., ((n-1)/n, 1]`.
    pub fn equispaced(n: u32) -> Result<Self, SynergyError> {
        if n == 0 {
            return Err(SynergyError::BadPartition);
        }
        let n = i64::from(n);
        Self::from_cuts(&(1..n).map(|k| ratio(k, n)).collect::<Vec<_>>())
    }

    /// Cells split at the given interior cut points (strictly increasing,
    /// inside `(0, 1)`).
    pub fn from_cuts(cuts: &[Rational]) -> Result<Self, SynergyError> {
        let mut bounds = alloc::vec![zero()];
        for c in cuts {
            if c <= bounds.last().expect("non-empty") || c >= &one() {
                return Err(SynergyError::BadPartition);
            }
            bounds.push(c.clone());
        }
        bounds.push(one());
        let cells = bounds
            .windows(2)
            .enumerate()
            .map(|(i, w)| Cell {
                lo: w[0].clone(),
                hi: w[1].clone(),
                closed_lo: i == 0,
            })
            .collect();
        Ok(Partition { cells })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Weights {
    /// Cell midpoints: deep stuckness counts more.
    Midpoint,
    Uniform,
    Custom(Vec<Rational>),
}

impl Weights {
    pub fn resolve(&self, p: &Partition) -> Result<Vec<Rational>, SynergyError> {
        let w: Vec<Rational> = match self {
            Weights::Midpoint => p.cells.iter().map(Cell::midpoint).collect(),
            Weights::Uniform => alloc::vec![one(); p.cells.len()],
            Weights::Custom(w) => w.clone(),
        };
        if w.len() != p.cells.len()
            || w.iter().any(|x| *x < zero())
            || w.iter().all(|x| *x == zero())
        {
            return Err(SynergyError::BadWeights);
        }
        Ok(w)
    }
}

/// Stuckness per `(situation, tick)` and process.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StuckTable {
    entries: BTreeMap<(String, u64), BTreeMap<String, Rational>>,
}

impl StuckTable {
    pub fn insert(&mut self, situation: &str, tick: u64, process: &str, stuck: Rational) {
        self.entries
            .entry((situation.into(), tick))
            .or_default()
            .insert(process.into(), stuck);
    }

    pub fn get(&self, situation: &str, tick: u64, process: &str) -> Option<&Rational> {
        self.entries
            .get(&(situation.into(), tick))
            .and_then(|m| m.get(process))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(String, u64), &BTreeMap<String, Rational>)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Stuckness of every process at every recorded `(situation, tick)`, with
/// `I_S` the unit interval at the tick.
pub fn stuck_table(
    store: &EpisodeStore,
    processes: &[String],
    candidates: &[CatalogPattern],
    params: &StuckParams,
) -> Result<StuckTable, CptError> {
    let mut table = StuckTable::default();
    let unique: BTreeSet<&String> = processes.iter().collect();
    for (s, t) in store.situation_ticks() {
        for p in &unique {
            let r = conf_and_stuckness(store, p, &s, Interval::unit(t), candidates, params)?;
            table.insert(&s, t, p, r.stuck);
        }
    }
    Ok(table)
}

fn in_cell_count(
    table_row: &BTreeMap<String, Rational>,
    processes: &[&str],
    cell: &Cell,
) -> Option<usize> {
    let mut n = 0;
    for p in processes {
        if cell.contains(table_row.get(*p)?) {
            n += 1;
        }
    }
    Some(n)
}

/// `(S, t)` pairs where exactly `want` of `processes` have stuckness in the
/// cell. Pairs missing any process are skipped.
fn stuck_pairs(
    table: &StuckTable,
    processes: &[&str],
    cell: &Cell,
    want: usize,
) -> Vec<(String, u64)> {
    table
        .entries
        .iter()
        .filter(|(_, row)| in_cell_count(row, processes, cell) == Some(want))
        .map(|(k, _)| k.clone())
        .collect()
}

/// Pairs where exactly one of `a`, `b` is stuck to a degree in `cell`.
/// Passing the same process twice compares it with an identical copy, so
/// the set is empty.
pub fn stuck_set(table: &StuckTable, a: &str, b: &str, cell: &Cell) -> Vec<(String, u64)> {
    stuck_pairs(table, &[a, b], cell, 1)
}

/// Pairs where exactly two of the three are stuck to a degree in `cell`.
pub fn stuck_set_triple(
    table: &StuckTable,
    a: &str,
    b: &str,
    c: &str,
    cell: &Cell,
) -> Vec<(String, u64)> {
    stuck_pairs(table, &[a, b, c], cell, 2)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellReport {
    pub cell: Cell,
    pub weight: Rational,
    pub stuck_pairs: Vec<(String, u64)>,
    pub probability: Rational,
    pub zero_ambient: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynergyReport {
    pub processes: Vec<String>,
    pub cells: Vec<CellReport>,
    pub value: Rational,
}

/// `G^stuck`: the id-union of the processes' CPT graphs at the given pairs.
pub fn stuck_graph(
    meta: &MetaGraph,
    processes: &[&str],
    pairs: &[(String, u64)],
) -> Result<Hypergraph, CptError> {
    let mut g = Hypergraph::new();
    for (s, t) in pairs {
        for p in processes {
            let part = extract_cpt(meta, p, &|x| x == s, Interval::unit(*t))?;
            g = g.union(&part.graph);
        }
    }
    Ok(g)
}

fn synergy(
    table: &StuckTable,
    meta: &MetaGraph,
    processes: &[&str],
    want: usize,
    partition: &Partition,
    weights: &Weights,
    functional: &dyn ProbabilityFunctional,
) -> Result<SynergyReport, SynergyError> {
    let w = weights.resolve(partition)?;
    let mut cells = Vec::new();
    let (mut num, mut den) = (zero(), zero());
    for (cell, weight) in partition.cells.iter().zip(w) {
        let pairs = stuck_pairs(table, processes, cell, want);
        let g = stuck_graph(meta, processes, &pairs)?;
        let r = functional.prob(&g, &meta.graph);
        num += &weight * &r.value;
        den += &weight;
        cells.push(CellReport {
            cell: cell.clone(),
            weight,
            stuck_pairs: pairs,
            probability: r.value,
            zero_ambient: r.flag == Some(ProbFlag::ZeroAmbient),
        });
    }
    Ok(SynergyReport {
        processes: processes.iter().map(|p| String::from(*p)).collect(),
        cells,
        value: num / den,
    })
}

/// The default functional for stuck graphs: the share of meta-system
/// transitions they contain.
pub fn transition_functional() -> CountingFunctional {
    CountingFunctional::link(crate::cpt::TRANSITION)
}

/// `cog-syn_{A,B,𝓟} = Σ w·Prob(G^stuck) / Σ w`.
pub fn cog_syn(
    table: &StuckTable,
    meta: &MetaGraph,
    a: &str,
    b: &str,
    partition: &Partition,
    weights: &Weights,
    functional: &dyn ProbabilityFunctional,
) -> Result<SynergyReport, SynergyError> {
    synergy(table, meta, &[a, b], 1, partition, weights, functional)
}

/// Triple-wise index: cells count pairs where exactly two of three are stuck.
#[allow(clippy::too_many_arguments)]
pub fn cog_syn_triple(
    table: &StuckTable,
    meta: &MetaGraph,
    a: &str,
    b: &str,
    c: &str,
    partition: &Partition,
    weights: &Weights,
    functional: &dyn ProbabilityFunctional,
) -> Result<SynergyReport, SynergyError> {
    synergy(table, meta, &[a, b, c], 2, partition, weights, functional)
}
