//! Scenario execution: simulate, analyse, render every output file.

use std::collections::BTreeMap;
use std::fmt::Write;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use cogsyn_core::agent::write_log;
use cogsyn_core::cpt::{
    conf_and_stuckness, extract_cpt, meta_graph, EpisodeStore, Interval, MetaGraph, MetricRecord,
};
use cogsyn_core::rational::{to_f64, to_pq};
use cogsyn_core::sim;
use cogsyn_core::synergy::{
    cog_syn, cog_syn_triple, hom_iso_census, transition_functional, Census, Partition, StuckTable,
    SynergyReport,
};

use crate::format::write_graph;
use crate::scenario::{load, Resolved, ScenarioError, WeightsDef};

pub const TOOL_VERSION: &str = concat!("cogsyn ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub partition_cells: Option<u32>,
    pub weights: Option<WeightsDef>,
    pub emit_gnuplot: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("simulation: {0}")]
    Sim(#[from] sim::SimError),
    #[error("analysis: {0}")]
    Cpt(#[from] cogsyn_core::cpt::CptError),
    #[error("analysis: {0}")]
    Synergy(#[from] cogsyn_core::synergy::SynergyError),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// The settings a run actually used, after command-line overrides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Effective {
    pub seed: u64,
    pub partition_cells: u32,
    pub weights: WeightsDef,
    pub emit_gnuplot: bool,
}

/// Every output file, keyed by path relative to the run directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub name: String,
    pub scenario_sha256: String,
    pub episode_seeds: Vec<u64>,
    pub effective: Effective,
    pub files: BTreeMap<String, Vec<u8>>,
    pub synergy: Vec<SynergyReport>,
    /// Some analysis hit a scale bound.
    pub undecided: bool,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn pattern_names(r: &Resolved) -> Vec<String> {
    let mut names = vec![sim::PROGRESS.to_string(), sim::SOLVED.to_string()];
    names.extend(
        r.world
            .domains()
            .iter()
            .map(|d| format!("{}:{d}", sim::TASK)),
    );
    names
}

fn simulate(
    r: &Resolved,
    seed: u64,
    jobs: Option<usize>,
) -> Result<(EpisodeStore, Vec<u64>), RunError> {
    let plan = r.world.plan(seed);
    let seeds = plan.iter().map(|p| p.seed).collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().map_err(|e| RunError::Pool(e.to_string()))?;
    let episodes = pool.install(|| {
        plan.par_iter()
            .map(|p| r.world.run(p))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut store = r.world.store(episodes)?;
    store.goals = r.goals.clone();
    Ok((store, seeds))
}

fn metrics(
    r: &Resolved,
    store: &EpisodeStore,
) -> Result<(Vec<MetricRecord>, StuckTable), RunError> {
    let mut records = Vec::new();
    let mut table = StuckTable::default();
    for (s, t) in store.situation_ticks() {
        for p in &r.world.processes {
            let i = Interval::unit(t);
            let rep = conf_and_stuckness(store, &p.id, &s, i, &store.catalog, &r.stuck)?;
            table.insert(&s, t, &p.id, rep.stuck.clone());
            records.push(MetricRecord {
                process: p.id.clone(),
                situation: s.clone(),
                interval: i,
                conf: rep.conf,
                stuck: rep.stuck,
                argmax_pattern_key: rep.argmax,
            });
        }
    }
    Ok((records, table))
}

fn csv_transitions(store: &EpisodeStore) -> String {
    let mut out =
        String::from("situation,index,from,to,cause,probability,confidence,space,time,start,end\n");
    for e in store.episodes() {
        for (i, t) in e.transitions.iter().enumerate() {
            writeln!(
                out,
                "{},{i},{},{},{},{},{},{},{},{},{}",
                e.situation,
                t.from,
                t.to,
                t.cause,
                to_pq(&t.probability),
                to_pq(&t.confidence),
                to_pq(&t.cost.space),
                to_pq(&t.cost.time),
                t.interval.start,
                t.interval.end
            )
            .expect("string write");
        }
    }
    out
}

fn csv_states(store: &EpisodeStore, names: &[String]) -> String {
    let mut out = format!("situation,snapshot,tick,{}\n", names.join(","));
    for e in store.episodes() {
        for s in &e.snapshots {
            let ds: Vec<String> = store.catalog.iter().map(|p| to_pq(&s.degree(p))).collect();
            writeln!(out, "{},{},{},{}", e.situation, s.id, s.tick, ds.join(","))
                .expect("string write");
        }
    }
    out
}

fn csv_metrics(records: &[MetricRecord], key_names: &BTreeMap<String, String>) -> String {
    let mut out = String::from("process,situation,start,end,conf,stuck,argmax\n");
    for m in records {
        let argmax = m
            .argmax_pattern_key
            .as_ref()
            .map(|k| key_names[k].as_str())
            .unwrap_or("");
        writeln!(
            out,
            "{},{},{},{},{},{},{argmax}",
            m.process,
            m.situation,
            m.interval.start,
            m.interval.end,
            to_pq(&m.conf),
            to_pq(&m.stuck)
        )
        .expect("string write");
    }
    out
}

fn csv_synergy(reports: &[SynergyReport]) -> String {
    let mut out = String::from("processes,cell,weight,stuck_pairs,probability\n");
    for r in reports {
        let who = r.processes.join("+");
        for c in &r.cells {
            writeln!(
                out,
                "{who},{},{},{},{}",
                c.cell,
                to_pq(&c.weight),
                c.stuck_pairs.len(),
                to_pq(&c.probability)
            )
            .expect("string write");
        }
        writeln!(out, "{who},total,,,{}", to_pq(&r.value)).expect("string write");
    }
    out
}

fn gnuplot_synergy(reports: &[SynergyReport]) -> String {
    let mut out = String::new();
    for r in reports {
        writeln!(out, "# {}\n# midpoint probability", r.processes.join("+")).expect("string write");
        for c in &r.cells {
            writeln!(
                out,
                "{} {}",
                to_f64(&c.cell.midpoint()),
                to_f64(&c.probability)
            )
            .expect("string write");
        }
        out.push_str("\n\n");
    }
    out
}

fn census_rows(r: &Resolved, meta: &MetaGraph) -> Result<Option<(String, bool)>, RunError> {
    let Some(bounds) = &r.census else {
        return Ok(None);
    };
    let mut out = String::from("a,b,pairs,n_hom,n_iso,ratio,partial\n");
    let mut partial = false;
    let whole = Interval::new(0, u64::MAX);
    for [a, b] in &r.scenario.analysis.pairs {
        let ga = extract_cpt(meta, a, &|_| true, whole)?;
        let gb = extract_cpt(meta, b, &|_| true, whole)?;
        let Census {
            n_hom,
            n_iso,
            pairs,
            partial: p,
        } = hom_iso_census(&ga.graph, &gb.graph, bounds);
        partial |= p;
        let ratio = if n_iso > 0 {
            to_pq(&cogsyn_core::rational::ratio(n_hom as i64, n_iso as i64))
        } else {
            "inf".into()
        };
        writeln!(out, "{a},{b},{pairs},{n_hom},{n_iso},{ratio},{p}").expect("string write");
    }
    Ok(Some((out, partial)))
}

fn summary(out: &RunOutput, store: &EpisodeStore, census_partial: Option<bool>) -> String {
    let mut s = String::new();
    let e = &out.effective;
    writeln!(s, "scenario: {}", out.name).expect("string write");
    writeln!(s, "scenario sha256: {}", out.scenario_sha256).expect("string write");
    writeln!(s, "tool: {TOOL_VERSION}").expect("string write");
    writeln!(s, "seed: {}", e.seed).expect("string write");
    let seeds: Vec<String> = out
        .episode_seeds
        .iter()
        .map(|x| format!("{x:016x}"))
        .collect();
    writeln!(s, "episode seeds: {}", seeds.join(" ")).expect("string write");
    writeln!(
        s,
        "episodes: {}, snapshots: {}",
        store.len(),
        store.snapshot_count()
    )
    .expect("string write");
    writeln!(
        s,
        "partition: {} cells, {} weights",
        e.partition_cells,
        e.weights.name()
    )
    .expect("string write");
    for r in &out.synergy {
        writeln!(
            s,
            "cog-syn {} = {} (~{:.6})",
            r.processes.join(","),
            to_pq(&r.value),
            to_f64(&r.value)
        )
        .expect("string write");
    }
    match census_partial {
        Some(true) => s.push_str("census: partial (bounds hit; counts are lower bounds)\n"),
        Some(false) => s.push_str("census: complete\n"),
        None => {}
    }
    s
}

/// Runs a scenario entirely in memory.
pub fn execute(text: &str, opts: &RunOptions) -> Result<RunOutput, RunError> {
    let r = load(text)?;
    let effective = Effective {
        seed: opts.seed.unwrap_or(r.scenario.seed),
        partition_cells: opts
            .partition_cells
            .unwrap_or(r.scenario.analysis.partition_cells),
        weights: opts.weights.unwrap_or(r.scenario.analysis.weights),
        emit_gnuplot: opts.emit_gnuplot,
    };
    let (store, episode_seeds) = simulate(&r, effective.seed, opts.jobs)?;
    let (records, table) = metrics(&r, &store)?;
    let meta = meta_graph(&store);
    let partition = Partition::equispaced(effective.partition_cells)?;
    let weights = effective.weights.weights();
    let functional = transition_functional();
    let mut reports = Vec::new();
    for [a, b] in &r.scenario.analysis.pairs {
        reports.push(cog_syn(
            &table,
            &meta,
            a,
            b,
            &partition,
            &weights,
            &functional,
        )?);
    }
    for [a, b, c] in &r.scenario.analysis.triples {
        reports.push(cog_syn_triple(
            &table,
            &meta,
            a,
            b,
            c,
            &partition,
            &weights,
            &functional,
        )?);
    }

    let names = pattern_names(&r);
    let key_names: BTreeMap<String, String> = store
        .catalog
        .iter()
        .zip(&names)
        .map(|(p, n)| (p.key.clone(), n.clone()))
        .collect();
    let mut files = BTreeMap::new();
    files.insert("scenario.toml".to_string(), text.as_bytes().to_vec());
    for e in store.episodes() {
        files.insert(
            format!("logs/{}.log", e.situation),
            write_log(&e.events).into_bytes(),
        );
    }
    files.insert("states.csv".into(), csv_states(&store, &names).into_bytes());
    files.insert(
        "transitions.csv".into(),
        csv_transitions(&store).into_bytes(),
    );
    files.insert(
        "metrics.csv".into(),
        csv_metrics(&records, &key_names).into_bytes(),
    );
    let whole = Interval::new(0, u64::MAX);
    for p in &r.world.processes {
        let g = extract_cpt(&meta, &p.id, &|_| true, whole)?;
        files.insert(
            format!("cpt/{}.hg", p.id),
            write_graph(&g.graph).into_bytes(),
        );
    }
    if !reports.is_empty() {
        files.insert("synergy.csv".into(), csv_synergy(&reports).into_bytes());
        if effective.emit_gnuplot {
            files.insert("synergy.dat".into(), gnuplot_synergy(&reports).into_bytes());
        }
    }
    let census = census_rows(&r, &meta)?;
    let census_partial = census.as_ref().map(|(_, p)| *p);
    if let Some((rows, _)) = census {
        files.insert("census.csv".into(), rows.into_bytes());
    }
    let mut out = RunOutput {
        name: r.scenario.name.clone(),
        scenario_sha256: sha256_hex(text.as_bytes()),
        episode_seeds,
        effective,
        files,
        synergy: reports,
        undecided: census_partial == Some(true),
    };
    let s = summary(&out, &store, census_partial);
    out.files.insert("summary.txt".into(), s.into_bytes());
    Ok(out)
}
