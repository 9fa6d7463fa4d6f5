//! Cognitive-process transition records and the stuckness formula stack.
//!
//! A situation is one recorded episode. Each tick of an episode has a state
//! snapshot holding the degree to which every catalog pattern is displayed;
//! transitions between snapshots are attributed to the process that caused
//! them (or to the environment). All metrics are exact rationals.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::agent::Event;
use crate::hypergraph::{canonical_form, coverage, GraphError, Hypergraph};
use crate::rational::{in_unit, mean, zero};
use crate::Rational;

mod formula;
mod graph;
mod pgmc;

pub use formula::{
    action_efficacy, action_efficacy_averaged, conf_and_stuckness, confidence_of_g, continuations,
    g_conditional, g_global, Efficacy, Estimate, StuckParams, StuckReport,
};
pub use graph::{extract_cpt, meta_graph, CptGraph, MetaGraph, STATE, TRANSITION};
pub use pgmc::{
    mine_history_patterns, pattern_atom, pgmc_choose, sample_by_fitness, Choice, MinedPattern,
    FITNESS_FLOOR, IMPLICATION,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CptError {
    #[error("pattern catalog is empty")]
    EmptyCatalog,
    #[error("no goals")]
    NoGoals,
    #[error("goal weights must be nonnegative and not all zero")]
    GoalWeights,
    #[error("goal degrees must lie in [0,1]")]
    GoalDegree,
    #[error("unknown process `{0}`")]
    UnknownProcess(String),
    #[error("unknown situation `{0}`")]
    UnknownSituation(String),
    #[error("situation `{0}` already recorded")]
    DuplicateSituation(String),
    #[error("transition references a missing snapshot")]
    DanglingTransition,
    #[error("transition probability/confidence outside [0,1], negative cost, or start after end")]
    BadTransition,
    #[error("insufficient budget")]
    InsufficientBudget,
    #[error("negative resource amount")]
    NegativeAmount,
    #[error("no admissible actions")]
    NoActions,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Closed tick interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    pub start: u64,
    pub end: u64,
}

impl Interval {
    pub fn new(start: u64, end: u64) -> Self {
        assert!(start <= end, "interval start after end");
        Interval { start, end }
    }

    pub fn unit(t: u64) -> Self {
        Interval { start: t, end: t }
    }

    pub fn contains(&self, t: u64) -> bool {
        self.start <= t && t <= self.end
    }

    /// The `k` unit intervals right after this one.
    pub fn next_units(&self, k: u64) -> Vec<Interval> {
        (1..=k).map(|i| Interval::unit(self.end + i)).collect()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.start, self.end)
    }
}

/// Closed rational interval, used for pattern degrees.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DegreeRange {
    pub lo: Rational,
    pub hi: Rational,
}

impl DegreeRange {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        DegreeRange { lo, hi }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

/// Space and time resource units.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Budget {
    pub space: Rational,
    pub time: Rational,
}

impl Budget {
    pub fn new(space: Rational, time: Rational) -> Self {
        Budget { space, time }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.space >= zero() && self.time >= zero()
    }

    /// Scalar cost used for path searches.
    pub fn scalar(&self) -> Rational {
        &self.space + &self.time
    }
}

/// Componentwise closed range of budgets (`I_R`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetRange {
    pub lo: Budget,
    pub hi: Budget,
}

impl BudgetRange {
    pub fn contains(&self, b: &Budget) -> bool {
        self.lo.space <= b.space
            && b.space <= self.hi.space
            && self.lo.time <= b.time
            && b.time <= self.hi.time
    }

    /// Every budget with both components in `[0, max]`.
    pub fn up_to(max: Rational) -> Self {
        BudgetRange {
            lo: Budget::default(),
            hi: Budget::new(max.clone(), max),
        }
    }
}

/// Moves `amount` from one process's budget to another's. Totals are
/// conserved componentwise; an overdraft changes nothing.
pub fn resource_transfer(
    budgets: &mut BTreeMap<String, Budget>,
    from: &str,
    to: &str,
    amount: &Budget,
) -> Result<(), CptError> {
    if !amount.is_nonnegative() {
        return Err(CptError::NegativeAmount);
    }
    for p in [from, to] {
        if !budgets.contains_key(p) {
            return Err(CptError::UnknownProcess(p.into()));
        }
    }
    let donor = &budgets[from];
    if donor.space < amount.space || donor.time < amount.time {
        return Err(CptError::InsufficientBudget);
    }
    let d = budgets.get_mut(from).expect("checked");
    d.space -= &amount.space;
    d.time -= &amount.time;
    let r = budgets.get_mut(to).expect("checked");
    r.space += &amount.space;
    r.time += &amount.time;
    Ok(())
}

/// A catalog pattern with its canonical key.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogPattern {
    pub key: String,
    pub body: Hypergraph,
}

impl CatalogPattern {
    pub fn new(body: Hypergraph) -> Result<Self, CptError> {
        Ok(CatalogPattern {
            key: canonical_form(&body)?,
            body,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub id: u64,
    pub tick: u64,
    /// Pattern key → displayed degree in [0,1].
    pub degrees: BTreeMap<String, Rational>,
    pub memory: Option<Hypergraph>,
}

impl SystemState {
    /// Degree of `p`, computed from the stored memory when the key was not
    /// part of the snapshot's catalog.
    pub fn degree(&self, p: &CatalogPattern) -> Rational {
        match (self.degrees.get(&p.key), &self.memory) {
            (Some(d), _) => d.clone(),
            (None, Some(m)) => coverage(&p.body, m),
            (None, None) => zero(),
        }
    }
}

/// Degree of each catalog pattern: full matches score 1, otherwise the best
/// partial binding's atom fraction.
pub fn snapshot_state(
    memory: &Hypergraph,
    catalog: &[CatalogPattern],
    tick: u64,
    id: u64,
    keep_memory: bool,
) -> Result<SystemState, CptError> {
    if catalog.is_empty() {
        return Err(CptError::EmptyCatalog);
    }
    let degrees = catalog
        .iter()
        .map(|p| (p.key.clone(), coverage(&p.body, memory)))
        .collect();
    Ok(SystemState {
        id,
        tick,
        degrees,
        memory: keep_memory.then(|| memory.clone()),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Cause {
    Process(String),
    /// Inputs from outside or random drift.
    Exogenous,
}

impl fmt::Display for Cause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cause::Process(p) => f.write_str(p),
            Cause::Exogenous => f.write_str("exogenous"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub from: u64,
    pub to: u64,
    pub cause: Cause,
    pub probability: Rational,
    pub confidence: Rational,
    pub cost: Budget,
    pub interval: Interval,
}

impl Transition {
    pub fn is_valid(&self) -> bool {
        in_unit(&self.probability)
            && in_unit(&self.confidence)
            && self.cost.is_nonnegative()
            && self.interval.start <= self.interval.end
    }

    pub fn caused_by(&self, process: &str) -> bool {
        matches!(&self.cause, Cause::Process(p) if p == process)
    }
}

/// How a goal grades a state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GoalDegree {
    /// The displayed degree of a catalog pattern.
    Pattern(String),
    /// Snapshot id → degree; missing snapshots score 0.
    Table(BTreeMap<u64, Rational>),
    Constant(Rational),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalSpec {
    pub id: String,
    pub weight: Rational,
    pub degree: GoalDegree,
}

impl GoalSpec {
    pub fn degree_at(&self, s: &SystemState) -> Rational {
        match &self.degree {
            GoalDegree::Pattern(k) => s.degrees.get(k).cloned().unwrap_or_else(zero),
            GoalDegree::Table(t) => t.get(&s.id).cloned().unwrap_or_else(zero),
            GoalDegree::Constant(c) => c.clone(),
        }
    }
}

fn check_goals(goals: &[GoalSpec]) -> Result<Rational, CptError> {
    if goals.is_empty() {
        return Err(CptError::NoGoals);
    }
    if goals.iter().any(|g| g.weight < zero()) {
        return Err(CptError::GoalWeights);
    }
    let total: Rational = goals.iter().map(|g| g.weight.clone()).sum();
    if total == zero() {
        return Err(CptError::GoalWeights);
    }
    Ok(total)
}

/// Weighted mean goal degree at each snapshot, averaged over the
/// snapshots. `None` when there are no snapshots.
pub fn goal_achievement<'a, I>(
    snapshots: I,
    goals: &[GoalSpec],
) -> Result<Option<Rational>, CptError>
where
    I: IntoIterator<Item = &'a SystemState>,
{
    let total = check_goals(goals)?;
    let mut per_tick = Vec::new();
    for s in snapshots {
        let mut acc = zero();
        for g in goals {
            let d = g.degree_at(s);
            if !in_unit(&d) {
                return Err(CptError::GoalDegree);
            }
            acc += &g.weight * d;
        }
        per_tick.push(acc / &total);
    }
    Ok(mean(&per_tick))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub situation: String,
    pub events: Vec<Event>,
    pub snapshots: Vec<SystemState>,
    pub transitions: Vec<Transition>,
}

impl Episode {
    pub fn new(situation: &str) -> Self {
        Episode {
            situation: situation.into(),
            events: Vec::new(),
            snapshots: Vec::new(),
            transitions: Vec::new(),
        }
    }

    pub fn in_interval(&self, i: Interval) -> impl Iterator<Item = &SystemState> {
        self.snapshots.iter().filter(move |s| i.contains(s.tick))
    }

    pub fn snapshot(&self, id: u64) -> Option<&SystemState> {
        self.snapshots.iter().find(|s| s.id == id)
    }

    /// The snapshot recorded at tick `t` (the last one if several).
    pub fn at_tick(&self, t: u64) -> Option<&SystemState> {
        self.snapshots.iter().rev().find(|s| s.tick == t)
    }

    /// `P(S, I)`: mean degree over the snapshots in `I`.
    pub fn pattern_degree(&self, p: &CatalogPattern, i: Interval) -> Option<Rational> {
        let ds: Vec<Rational> = self.in_interval(i).map(|s| s.degree(p)).collect();
        mean(&ds)
    }

    /// `g(S, I)`.
    pub fn goal_degree(
        &self,
        goals: &[GoalSpec],
        i: Interval,
    ) -> Result<Option<Rational>, CptError> {
        goal_achievement(self.in_interval(i), goals)
    }
}

/// Append-only record of the meta-system.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpisodeStore {
    episodes: BTreeMap<String, Episode>,
    processes: BTreeSet<String>,
    pub catalog: Vec<CatalogPattern>,
    pub goals: Vec<GoalSpec>,
}

impl EpisodeStore {
    pub fn new(catalog: Vec<CatalogPattern>, goals: Vec<GoalSpec>) -> Self {
        EpisodeStore {
            episodes: BTreeMap::new(),
            processes: BTreeSet::new(),
            catalog,
            goals,
        }
    }

    pub fn register_process(&mut self, id: &str) {
        self.processes.insert(id.into());
    }

    pub fn processes(&self) -> &BTreeSet<String> {
        &self.processes
    }

    pub fn ingest(&mut self, e: Episode) -> Result<(), CptError> {
        if self.episodes.contains_key(&e.situation) {
            return Err(CptError::DuplicateSituation(e.situation));
        }
        let ids: BTreeSet<u64> = e.snapshots.iter().map(|s| s.id).collect();
        for t in &e.transitions {
            if !t.is_valid() {
                return Err(CptError::BadTransition);
            }
            if !ids.contains(&t.from) || !ids.contains(&t.to) {
                return Err(CptError::DanglingTransition);
            }
            if let Cause::Process(p) = &t.cause {
                self.processes.insert(p.clone());
            }
        }
        self.episodes.insert(e.situation.clone(), e);
        Ok(())
    }

    pub fn episode(&self, situation: &str) -> Option<&Episode> {
        self.episodes.get(situation)
    }

    pub fn episodes(&self) -> impl Iterator<Item = &Episode> {
        self.episodes.values()
    }

    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    /// Every recorded `(situation, tick)` pair, in order.
    pub fn situation_ticks(&self) -> Vec<(String, u64)> {
        let mut out = Vec::new();
        for e in self.episodes.values() {
            let ticks: BTreeSet<u64> = e.snapshots.iter().map(|s| s.tick).collect();
            out.extend(ticks.into_iter().map(|t| (e.situation.clone(), t)));
        }
        out
    }

    pub fn snapshot_count(&self) -> usize {
        self.episodes.values().map(|e| e.snapshots.len()).sum()
    }
}

/// One metrics row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricRecord {
    pub process: String,
    pub situation: String,
    pub interval: Interval,
    pub conf: Rational,
    pub stuck: Rational,
    pub argmax_pattern_key: Option<String>,
}
