//! A toy world of specialist cognitive processes.
//!
//! Each situation poses a task in one domain. Every tick one process acts:
//! a process competent in the domain adds a `progress` atom, and enough
//! progress marks the task `solved`. Everything else leaves memory as it
//! was. The result is an [`EpisodeStore`] whose stuckness structure is known
//! by construction.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::agent::Event;
use crate::cpt::{
    snapshot_state, Budget, CatalogPattern, Cause, CptError, Episode, EpisodeStore, GoalDegree,
    GoalSpec, Interval, Transition,
};
use crate::hypergraph::{AtomId, Hypergraph};
use crate::rational::one;
use crate::rng::{derive_seed, Rng};

pub const TASK: &str = "task";
pub const PROGRESS: &str = "progress";
pub const SOLVED: &str = "solved";
pub const ADVANCES: &str = "advances";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProcessRule {
    /// Makes progress in the listed domains.
    Specialist {
        domains: Vec<String>,
    },
    /// Makes progress everywhere.
    Generalist,
    Idle,
}

impl ProcessRule {
    fn competent(&self, domain: &str) -> bool {
        match self {
            ProcessRule::Specialist { domains } => domains.iter().any(|d| d == domain),
            ProcessRule::Generalist => true,
            ProcessRule::Idle => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessSpec {
    pub id: String,
    pub rule: ProcessRule,
    pub cost: Budget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheduler {
    /// Uniform choice per tick from the episode seed.
    Seeded,
    /// Processes take turns, starting at the episode index.
    RoundRobin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SituationSpec {
    pub domain: String,
    /// Episodes of this kind, named `<domain>-<k>`.
    pub episodes: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldSpec {
    pub situations: Vec<SituationSpec>,
    pub processes: Vec<ProcessSpec>,
    pub ticks: u64,
    /// Progress atoms needed before the task counts as solved.
    pub steps_to_solve: u32,
    pub scheduler: Scheduler,
    pub keep_memory: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("world has no processes")]
    NoProcesses,
    #[error("duplicate process id {0:?}")]
    DuplicateProcess(String),
    #[error(transparent)]
    Cpt(#[from] CptError),
}

/// One planned episode: its situation name, domain and seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpisodePlan {
    pub index: usize,
    pub situation: String,
    pub domain: String,
    pub seed: u64,
}

fn node(ty: &str) -> Hypergraph {
    let mut g = Hypergraph::new();
    g.add_typed_node(ty);
    g
}

/// Progress, solved, and one task pattern per domain, so that profiles
/// tell domains apart.
pub fn catalog(domains: &[&str]) -> Vec<CatalogPattern> {
    let tasks = domains.iter().map(|d| format!("{TASK}:{d}"));
    [PROGRESS.to_string(), SOLVED.to_string()]
        .into_iter()
        .chain(tasks)
        .map(|ty| CatalogPattern::new(node(&ty)).expect("single nodes canonicalise"))
        .collect()
}

/// The single goal: the task is solved.
pub fn goals() -> Vec<GoalSpec> {
    let key = CatalogPattern::new(node(SOLVED)).expect("single node").key;
    alloc::vec![GoalSpec {
        id: SOLVED.into(),
        weight: one(),
        degree: GoalDegree::Pattern(key)
    }]
}

impl WorldSpec {
    pub fn domains(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.situations.iter().map(|s| s.domain.as_str()).collect();
        set.into_iter().collect()
    }

    pub fn catalog(&self) -> Vec<CatalogPattern> {
        catalog(&self.domains())
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.processes.is_empty() {
            return Err(SimError::NoProcesses);
        }
        let mut seen = BTreeSet::new();
        for p in &self.processes {
            if !seen.insert(&p.id) {
                return Err(SimError::DuplicateProcess(p.id.clone()));
            }
        }
        Ok(())
    }

    /// Episodes in a fixed order, with seeds derived from `seed`.
    pub fn plan(&self, seed: u64) -> Vec<EpisodePlan> {
        let mut out = Vec::new();
        for s in &self.situations {
            for k in 0..s.episodes {
                let index = out.len();
                out.push(EpisodePlan {
                    index,
                    situation: format!("{}-{k}", s.domain),
                    domain: s.domain.clone(),
                    seed: derive_seed(seed, index as u64),
                });
            }
        }
        out
    }

    /// Runs one planned episode. Independent of every other episode.
    pub fn run(&self, plan: &EpisodePlan) -> Result<Episode, SimError> {
        self.validate()?;
        let catalog = self.catalog();
        let mut rng = Rng::new(plan.seed);
        let mut memory = Hypergraph::named(&plan.situation);
        let task: AtomId = memory.add_typed_node(&format!("{TASK}:{}", plan.domain));
        let mut progress = 0u32;
        let mut e = Episode::new(&plan.situation);
        e.snapshots
            .push(snapshot_state(&memory, &catalog, 0, 0, self.keep_memory)?);
        let n = self.processes.len();
        for t in 0..self.ticks {
            let who = match self.scheduler {
                Scheduler::Seeded => rng.below(n as u64) as usize,
                Scheduler::RoundRobin => (plan.index + t as usize) % n,
            };
            let p = &self.processes[who];
            let mut effects = Vec::new();
            if p.rule.competent(&plan.domain) {
                let atom = memory.add_typed_node(PROGRESS);
                memory
                    .add_typed_link(ADVANCES, &[atom, task])
                    .expect("both exist");
                effects.push(format!("create({PROGRESS})"));
                progress += 1;
                if progress == self.steps_to_solve {
                    memory.add_typed_node(SOLVED);
                    effects.push(format!("create({SOLVED})"));
                }
            } else {
                effects.push("nothing".to_string());
            }
            e.events.push(Event {
                tick: t,
                slot: 0,
                cognit: Some(p.id.clone()),
                action: None,
                observation: None,
                goal: None,
                reward: None,
                effects,
            });
            e.snapshots.push(snapshot_state(
                &memory,
                &catalog,
                t + 1,
                t + 1,
                self.keep_memory,
            )?);
            e.transitions.push(Transition {
                from: t,
                to: t + 1,
                cause: Cause::Process(p.id.clone()),
                probability: one(),
                confidence: one(),
                cost: p.cost.clone(),
                interval: Interval::new(t, t + 1),
            });
        }
        Ok(e)
    }

    /// Collects episodes (in plan order) into a store.
    pub fn store(&self, episodes: Vec<Episode>) -> Result<EpisodeStore, SimError> {
        let mut store = EpisodeStore::new(self.catalog(), goals());
        for p in &self.processes {
            store.register_process(&p.id);
        }
        for e in episodes {
            store.ingest(e)?;
        }
        Ok(store)
    }

    /// Plans, runs and stores every episode sequentially.
    pub fn simulate(&self, seed: u64) -> Result<EpisodeStore, SimError> {
        let episodes = self
            .plan(seed)
            .iter()
            .map(|p| self.run(p))
            .collect::<Result<Vec<_>, _>>()?;
        self.store(episodes)
    }
}
