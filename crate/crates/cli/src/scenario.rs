//! Declarative scenario files (TOML).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use cogsyn_core::cpt::{
    Budget, BudgetRange, CatalogPattern, DegreeRange, GoalDegree, GoalSpec, StuckParams,
};
use cogsyn_core::hypergraph::Hypergraph;
use cogsyn_core::rational::{parse_pq, zero};
use cogsyn_core::sim::{self, ProcessRule, ProcessSpec, Scheduler, SituationSpec, WorldSpec};
use cogsyn_core::synergy::{CensusBounds, Weights};
use cogsyn_core::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("{0}")]
    Parse(String),
    #[error("field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    #[serde(default)]
    pub alphabets: Option<Alphabets>,
    pub environment: Environment,
    pub processes: Vec<ProcessDef>,
    #[serde(default)]
    pub goals: Vec<GoalDef>,
    #[serde(default)]
    pub analysis: Analysis,
}

/// Optional declared name sets; when present, every use must be declared.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Alphabets {
    #[serde(default)]
    pub domains: Option<Vec<String>>,
    #[serde(default)]
    pub processes: Option<Vec<String>>,
    #[serde(default)]
    pub goals: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulerDef {
    Seeded,
    RoundRobin,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    pub ticks: u64,
    pub steps_to_solve: u32,
    pub scheduler: SchedulerDef,
    #[serde(default)]
    pub keep_memory: bool,
    pub situations: Vec<SituationDef>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SituationDef {
    pub domain: String,
    pub episodes: u32,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum RuleDef {
    Specialist,
    Generalist,
    Idle,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessDef {
    pub id: String,
    pub rule: RuleDef,
    #[serde(default)]
    pub domains: Vec<String>,
    #[serde(default)]
    pub cost: CostDef,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostDef {
    #[serde(default = "zero_text")]
    pub space: String,
    #[serde(default = "one_text")]
    pub time: String,
}

impl Default for CostDef {
    fn default() -> Self {
        CostDef {
            space: zero_text(),
            time: one_text(),
        }
    }
}

fn zero_text() -> String {
    "0".into()
}

fn one_text() -> String {
    "1".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalDef {
    pub id: String,
    /// `progress`, `solved` or `task:<domain>`.
    pub pattern: String,
    #[serde(default = "one_text")]
    pub weight: String,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum WeightsDef {
    Midpoint,
    Uniform,
}

impl WeightsDef {
    pub fn weights(self) -> Weights {
        match self {
            WeightsDef::Midpoint => Weights::Midpoint,
            WeightsDef::Uniform => Weights::Uniform,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WeightsDef::Midpoint => "midpoint",
            WeightsDef::Uniform => "uniform",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Analysis {
    #[serde(default)]
    pub pairs: Vec<[String; 2]>,
    #[serde(default)]
    pub triples: Vec<[String; 3]>,
    #[serde(default = "ten")]
    pub partition_cells: u32,
    #[serde(default = "midpoint")]
    pub weights: WeightsDef,
    #[serde(default)]
    pub stuck: StuckDef,
    #[serde(default)]
    pub census: Option<CensusDef>,
}

fn ten() -> u32 {
    10
}

fn midpoint() -> WeightsDef {
    WeightsDef::Midpoint
}

impl Default for Analysis {
    fn default() -> Self {
        Analysis {
            pairs: Vec::new(),
            triples: Vec::new(),
            partition_cells: ten(),
            weights: midpoint(),
            stuck: StuckDef::default(),
            census: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StuckDef {
    #[serde(default = "five")]
    pub window_len: u64,
    #[serde(default = "one_text")]
    pub k: String,
    #[serde(default = "max_cost")]
    pub max_cost: String,
    #[serde(default = "success_lo")]
    pub success_lo: String,
    #[serde(default = "one_text")]
    pub success_hi: String,
}

fn five() -> u64 {
    5
}

fn max_cost() -> String {
    "1000000".into()
}

fn success_lo() -> String {
    "9/10".into()
}

impl Default for StuckDef {
    fn default() -> Self {
        StuckDef {
            window_len: five(),
            k: one_text(),
            max_cost: max_cost(),
            success_lo: success_lo(),
            success_hi: one_text(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CensusDef {
    #[serde(default = "three")]
    pub max_links: usize,
    #[serde(default = "two_hundred")]
    pub max_subgraphs: usize,
    #[serde(default = "two")]
    pub max_merges: u64,
}

fn two() -> u64 {
    2
}

fn three() -> usize {
    3
}

fn two_hundred() -> usize {
    200
}

/// A scenario with every name resolved and every number parsed.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scenario: Scenario,
    pub world: WorldSpec,
    pub goals: Vec<GoalSpec>,
    pub stuck: StuckParams,
    pub census: Option<CensusBounds>,
}

fn rational(field: &str, text: &str) -> Result<Rational, ScenarioError> {
    parse_pq(text).ok_or_else(|| invalid(field, format!("`{text}` is not a rational p/q")))
}

fn nonnegative(field: &str, text: &str) -> Result<Rational, ScenarioError> {
    let r = rational(field, text)?;
    if r < zero() {
        return Err(invalid(field, "must be nonnegative"));
    }
    Ok(r)
}

fn declared(
    alpha: Option<&Vec<String>>,
    field: &str,
    name: &str,
    what: &str,
) -> Result<(), ScenarioError> {
    match alpha {
        Some(a) if !a.iter().any(|x| x == name) => Err(invalid(
            field,
            format!("{what} `{name}` is not in the alphabet"),
        )),
        _ => Ok(()),
    }
}

fn pattern_node(ty: &str) -> CatalogPattern {
    let mut g = Hypergraph::new();
    g.add_typed_node(ty);
    CatalogPattern::new(g).expect("single node")
}

pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
    toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
}

pub fn load(text: &str) -> Result<Resolved, ScenarioError> {
    parse(text)?.resolve()
}

impl Scenario {
    pub fn resolve(self) -> Result<Resolved, ScenarioError> {
        let alpha = self.alphabets.clone().unwrap_or_default();
        let env = &self.environment;
        if env.situations.is_empty() {
            return Err(invalid(
                "environment.situations",
                "at least one situation is required",
            ));
        }
        let mut domains = BTreeSet::new();
        for (i, s) in env.situations.iter().enumerate() {
            let field = format!("environment.situations[{i}].domain");
            if s.domain.is_empty() || s.domain.contains(char::is_whitespace) {
                return Err(invalid(
                    field,
                    "domain names are non-empty and contain no whitespace",
                ));
            }
            declared(alpha.domains.as_ref(), &field, &s.domain, "domain")?;
            if !domains.insert(s.domain.as_str()) {
                return Err(invalid(
                    field,
                    format!("domain `{}` listed twice", s.domain),
                ));
            }
        }
        if self.processes.is_empty() {
            return Err(invalid("processes", "at least one process is required"));
        }
        let mut ids = BTreeSet::new();
        let mut processes = Vec::new();
        for (i, p) in self.processes.iter().enumerate() {
            let field = format!("processes[{i}]");
            if p.id.is_empty() || p.id.contains(char::is_whitespace) {
                return Err(invalid(
                    format!("{field}.id"),
                    "process ids are non-empty and contain no whitespace",
                ));
            }
            declared(
                alpha.processes.as_ref(),
                &format!("{field}.id"),
                &p.id,
                "process",
            )?;
            if !ids.insert(p.id.as_str()) {
                return Err(invalid(
                    format!("{field}.id"),
                    format!("process `{}` defined twice", p.id),
                ));
            }
            for d in &p.domains {
                if !domains.contains(d.as_str()) {
                    return Err(invalid(
                        format!("{field}.domains"),
                        format!("unknown domain `{d}`"),
                    ));
                }
            }
            let rule = match p.rule {
                RuleDef::Specialist if p.domains.is_empty() => {
                    return Err(invalid(
                        format!("{field}.domains"),
                        "a specialist needs at least one domain",
                    ))
                }
                RuleDef::Specialist => ProcessRule::Specialist {
                    domains: p.domains.clone(),
                },
                _ if !p.domains.is_empty() => {
                    return Err(invalid(
                        format!("{field}.domains"),
                        "only specialists take domains",
                    ))
                }
                RuleDef::Generalist => ProcessRule::Generalist,
                RuleDef::Idle => ProcessRule::Idle,
            };
            let cost = Budget::new(
                nonnegative(&format!("{field}.cost.space"), &p.cost.space)?,
                nonnegative(&format!("{field}.cost.time"), &p.cost.time)?,
            );
            processes.push(ProcessSpec {
                id: p.id.clone(),
                rule,
                cost,
            });
        }
        let mut goals = Vec::new();
        for (i, g) in self.goals.iter().enumerate() {
            let field = format!("goals[{i}]");
            declared(alpha.goals.as_ref(), &format!("{field}.id"), &g.id, "goal")?;
            let known = g.pattern == sim::PROGRESS
                || g.pattern == sim::SOLVED
                || g.pattern
                    .strip_prefix("task:")
                    .is_some_and(|d| domains.contains(d));
            if !known {
                return Err(invalid(
                    format!("{field}.pattern"),
                    format!("unknown pattern `{}`", g.pattern),
                ));
            }
            let weight = nonnegative(&format!("{field}.weight"), &g.weight)?;
            goals.push(GoalSpec {
                id: g.id.clone(),
                weight,
                degree: GoalDegree::Pattern(pattern_node(&g.pattern).key),
            });
        }
        if goals.is_empty() {
            goals = sim::goals();
        }
        if goals.iter().all(|g| g.weight == zero()) {
            return Err(invalid("goals", "weights must not all be zero"));
        }
        let a = &self.analysis;
        for (i, pair) in a.pairs.iter().enumerate() {
            for p in pair {
                if !ids.contains(p.as_str()) {
                    return Err(invalid(
                        format!("analysis.pairs[{i}]"),
                        format!("unknown process `{p}`"),
                    ));
                }
            }
        }
        for (i, t) in a.triples.iter().enumerate() {
            for p in t {
                if !ids.contains(p.as_str()) {
                    return Err(invalid(
                        format!("analysis.triples[{i}]"),
                        format!("unknown process `{p}`"),
                    ));
                }
            }
        }
        if a.partition_cells == 0 {
            return Err(invalid("analysis.partition_cells", "must be at least 1"));
        }
        let s = &a.stuck;
        let lo = rational("analysis.stuck.success_lo", &s.success_lo)?;
        let hi = rational("analysis.stuck.success_hi", &s.success_hi)?;
        if lo > hi {
            return Err(invalid("analysis.stuck.success_lo", "exceeds success_hi"));
        }
        let k = rational("analysis.stuck.k", &s.k)?;
        if k <= zero() {
            return Err(invalid("analysis.stuck.k", "must be positive"));
        }
        let stuck = StuckParams {
            window_len: s.window_len,
            k,
            i_r: BudgetRange::up_to(nonnegative("analysis.stuck.max_cost", &s.max_cost)?),
            i_p: DegreeRange::new(lo, hi),
        };
        let census = a.census.as_ref().map(|c| CensusBounds {
            max_links: c.max_links,
            max_subgraphs: c.max_subgraphs,
            max_merges: c.max_merges,
            ..CensusBounds::default()
        });
        let world = WorldSpec {
            situations: env
                .situations
                .iter()
                .map(|s| SituationSpec {
                    domain: s.domain.clone(),
                    episodes: s.episodes,
                })
                .collect(),
            processes,
            ticks: env.ticks,
            steps_to_solve: env.steps_to_solve,
            scheduler: match env.scheduler {
                SchedulerDef::Seeded => Scheduler::Seeded,
                SchedulerDef::RoundRobin => Scheduler::RoundRobin,
            },
            keep_memory: env.keep_memory,
        };
        Ok(Resolved {
            scenario: self,
            world,
            goals,
            stuck,
            census,
        })
    }
}
