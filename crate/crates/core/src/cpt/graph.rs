use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use super::{Cause, CptError, EpisodeStore, Interval};
use crate::hypergraph::{AtomId, Hypergraph, Label};
use crate::rational::to_f64;

pub const STATE: &str = "state";
pub const TRANSITION: &str = "transition";

/// `(situation, transition index)`.
pub type TransitionKey = (String, usize);

#[derive(Debug, Clone, PartialEq)]
struct TransitionInfo {
    key: TransitionKey,
    cause: Cause,
    start: u64,
}

/// The whole recorded transition graph: one `state` node per snapshot and
/// one `transition` link per transition, weighted
/// `[probability, confidence, space, time]`. CPT graphs are its
/// id-preserving sub-hypergraphs.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaGraph {
    pub graph: Hypergraph,
    pub state_atom: BTreeMap<(String, u64), AtomId>,
    pub transition_atom: BTreeMap<TransitionKey, AtomId>,
    info: BTreeMap<AtomId, TransitionInfo>,
    processes: BTreeSet<String>,
}

impl MetaGraph {
    pub fn transition_key(&self, link: AtomId) -> Option<&TransitionKey> {
        self.info.get(&link).map(|i| &i.key)
    }

    pub fn cause(&self, link: AtomId) -> Option<&Cause> {
        self.info.get(&link).map(|i| &i.cause)
    }
}

pub fn meta_graph(store: &EpisodeStore) -> MetaGraph {
    let mut graph = Hypergraph::named("meta-system");
    let mut state_atom = BTreeMap::new();
    let mut transition_atom = BTreeMap::new();
    let mut info = BTreeMap::new();
    for e in store.episodes() {
        for s in &e.snapshots {
            let id = graph.add_typed_node(STATE);
            state_atom.insert((e.situation.clone(), s.id), id);
        }
        for (i, t) in e.transitions.iter().enumerate() {
            let from = state_atom[&(e.situation.clone(), t.from)];
            let to = state_atom[&(e.situation.clone(), t.to)];
            let weights = [&t.probability, &t.confidence, &t.cost.space, &t.cost.time].map(to_f64);
            let label = Label::new(TRANSITION, weights.to_vec()).expect("finite rationals");
            let id = graph
                .add_link(alloc::vec![from, to], Some(label))
                .expect("states exist");
            let key = (e.situation.clone(), i);
            transition_atom.insert(key.clone(), id);
            info.insert(
                id,
                TransitionInfo {
                    key,
                    cause: t.cause.clone(),
                    start: t.interval.start,
                },
            );
        }
    }
    MetaGraph {
        graph,
        state_atom,
        transition_atom,
        info,
        processes: store.processes().clone(),
    }
}

/// One process's transitions, as a sub-hypergraph of the meta graph.
#[derive(Debug, Clone, PartialEq)]
pub struct CptGraph {
    pub process: String,
    pub graph: Hypergraph,
    pub transitions: Vec<TransitionKey>,
}

/// `G_A^{S,I}`: transitions caused by `process` that start inside
/// `interval`, in situations accepted by `situations`.
pub fn extract_cpt(
    meta: &MetaGraph,
    process: &str,
    situations: &dyn Fn(&str) -> bool,
    interval: Interval,
) -> Result<CptGraph, CptError> {
    if !meta.processes.contains(process) {
        return Err(CptError::UnknownProcess(process.into()));
    }
    let mut links = Vec::new();
    let mut transitions = Vec::new();
    for (id, t) in &meta.info {
        if matches!(&t.cause, Cause::Process(p) if p == process)
            && interval.contains(t.start)
            && situations(&t.key.0)
        {
            links.push(*id);
            transitions.push(t.key.clone());
        }
    }
    let mut graph = meta.graph.closure_of(links);
    graph.set_name(Some(process.into()));
    Ok(CptGraph {
        process: process.into(),
        graph,
        transitions,
    })
}
