//! Cognits as atoms of the memory hypergraph.
//!
//! A cognit's behaviour comes from its type name. Its arguments are the
//! atoms it points at: the remaining targets of links whose first target is
//! the cognit (bookkeeping links `body`, `result` and `match-record` aside).
//!
//! | type        | on activation                                             |
//! |-------------|-----------------------------------------------------------|
//! | `produce:T` | new `T` link over the arguments                           |
//! | `activate`  | activate every activatable argument (`call` is a synonym) |
//! | `const:T`   | new `T` node carrying the cognit's weights, linked to the |
//! |             | caller by `result`, then return to the caller             |
//! | `match`     | match the `body` pattern, one `match-record` per binding  |
//! | `remove`    | remove the arguments                                      |
//! | `nothing`   | no-op                                                     |

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::DEFAULT_ACTIVATION_DEPTH;
use crate::hypergraph::{
    match_pattern, AtomId, GraphError, HPattern, Hypergraph, Label, Removal, VARIABLE,
};

pub const BODY: &str = "body";
pub const RESULT: &str = "result";
pub const MATCH_RECORD: &str = "match-record";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HyperEffect {
    Created(AtomId),
    Removed(AtomId),
    Activated { atom: AtomId, resume: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HyperActivationError {
    #[error("atom {0:?} is not an activatable cognit")]
    NotActivatable(AtomId),
    #[error("activation chain deeper than {bound}")]
    Depth {
        bound: usize,
        applied: Vec<HyperEffect>,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

enum Behaviour<'a> {
    Produce(&'a str),
    Propagate,
    Constant(&'a str),
    Match,
    Remove,
    Nothing,
}

fn behaviour(g: &Hypergraph, id: AtomId) -> Option<Behaviour<'_>> {
    let ty = g.type_of(id)?;
    Some(match ty {
        "activate" | "call" => Behaviour::Propagate,
        "match" => Behaviour::Match,
        "remove" => Behaviour::Remove,
        "nothing" => Behaviour::Nothing,
        _ => {
            if let Some(t) = ty.strip_prefix("produce:").filter(|t| !t.is_empty()) {
                Behaviour::Produce(t)
            } else {
                Behaviour::Constant(ty.strip_prefix("const:").filter(|t| !t.is_empty())?)
            }
        }
    })
}

fn arguments(g: &Hypergraph, id: AtomId) -> Vec<AtomId> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for l in g.incoming(id) {
        let atom = g.atom(l).expect("link");
        if atom.targets()[0] != id || matches!(atom.type_name(), Some(BODY | RESULT | MATCH_RECORD))
        {
            continue;
        }
        for t in &atom.targets()[1..] {
            if *t != id && seen.insert(*t) {
                out.push(*t);
            }
        }
    }
    out
}

/// Activates cognit `id` in place, returning the effects in order. On an
/// over-deep chain the effects so far remain applied.
pub fn hypergraph_activate(
    g: &mut Hypergraph,
    id: AtomId,
) -> Result<Vec<HyperEffect>, HyperActivationError> {
    if behaviour(g, id).is_none() {
        return Err(HyperActivationError::NotActivatable(id));
    }
    let mut out = Vec::new();
    match step(g, id, None, false, 0, &mut out) {
        Ok(()) => Ok(out),
        Err(Fail::Depth) => Err(HyperActivationError::Depth {
            bound: DEFAULT_ACTIVATION_DEPTH,
            applied: out,
        }),
        Err(Fail::Graph(e)) => Err(e.into()),
    }
}

enum Fail {
    Depth,
    Graph(GraphError),
}

impl From<GraphError> for Fail {
    fn from(e: GraphError) -> Self {
        Fail::Graph(e)
    }
}

fn step(
    g: &mut Hypergraph,
    id: AtomId,
    caller: Option<AtomId>,
    resume: bool,
    depth: usize,
    out: &mut Vec<HyperEffect>,
) -> Result<(), Fail> {
    if depth > DEFAULT_ACTIVATION_DEPTH {
        return Err(Fail::Depth);
    }
    if resume || !g.contains(id) {
        return Ok(());
    }
    let Some(b) = behaviour(g, id) else {
        return Ok(());
    };
    match b {
        Behaviour::Nothing => {}
        Behaviour::Produce(t) => {
            let t = alloc::string::String::from(t);
            let args = arguments(g, id);
            if !args.is_empty() {
                out.push(HyperEffect::Created(g.add_typed_link(&t, &args)?));
            }
        }
        Behaviour::Propagate => {
            for t in arguments(g, id) {
                if behaviour(g, t).is_some() {
                    out.push(HyperEffect::Activated {
                        atom: t,
                        resume: false,
                    });
                    step(g, t, Some(id), false, depth + 1, out)?;
                }
            }
        }
        Behaviour::Constant(t) => {
            let t = alloc::string::String::from(t);
            let weights = g
                .atom(id)
                .and_then(|a| a.label())
                .map(|l| l.weights().to_vec())
                .unwrap_or_default();
            let value = g.add_node(Some(Label::new(t, weights)?));
            out.push(HyperEffect::Created(value));
            let holder = caller.unwrap_or(id);
            out.push(HyperEffect::Created(
                g.add_typed_link(RESULT, &[holder, value])?,
            ));
            if let Some(c) = caller {
                out.push(HyperEffect::Activated {
                    atom: c,
                    resume: true,
                });
                step(g, c, None, true, depth + 1, out)?;
            }
        }
        Behaviour::Match => {
            let roots: Vec<AtomId> = g
                .incoming(id)
                .filter_map(|l| g.atom(l))
                .filter(|l| l.type_name() == Some(BODY) && l.targets()[0] == id)
                .flat_map(|l| l.targets()[1..].to_vec())
                .collect();
            let pattern = g.closure_of(roots);
            let mut world = g.clone();
            world.remove_atom(id);
            for a in pattern.atoms() {
                world.remove_atom(a.id());
            }
            let bindings = match_pattern(&HPattern::Atomic(pattern.clone()), &world)?;
            let order = pattern.node_ids();
            for b in bindings {
                let mut targets = alloc::vec![id];
                targets.extend(order.iter().map(|n| b.get(*n).expect("bound")));
                out.push(HyperEffect::Created(
                    g.add_typed_link(MATCH_RECORD, &targets)?,
                ));
            }
        }
        Behaviour::Remove => {
            for t in arguments(g, id) {
                if let Removal::Removed(gone) = g.remove_atom(t) {
                    out.extend(gone.into_iter().map(HyperEffect::Removed));
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ViolationKind {
    ProbOutOfRange,
    MissingProbability,
    NegativeDuration,
    MissingDuration,
    AtTimeWithoutTime,
    VariableNotNode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub atom: AtomId,
    pub kind: ViolationKind,
}

/// Well-formedness of reserved labels. `implication` links carry a
/// probability (and optionally a confidence) in [0,1]; `after` links carry
/// a duration ≥ 0; `atTime` links start with a `time` node; `variable`
/// atoms are nodes.
pub fn rich_language_check(g: &Hypergraph) -> Vec<Violation> {
    let mut out = Vec::new();
    for a in g.atoms() {
        let mut flag = |kind| out.push(Violation { atom: a.id(), kind });
        let weights = a.label().map(|l| l.weights()).unwrap_or(&[]);
        match a.type_name() {
            Some("implication") if a.is_link() => match weights {
                [] => flag(ViolationKind::MissingProbability),
                ws => {
                    if ws.iter().take(2).any(|w| !(0.0..=1.0).contains(w)) {
                        flag(ViolationKind::ProbOutOfRange);
                    }
                }
            },
            Some("after") if a.is_link() => match weights.first() {
                None => flag(ViolationKind::MissingDuration),
                Some(d) if *d < 0.0 => flag(ViolationKind::NegativeDuration),
                _ => {}
            },
            Some("atTime") if a.is_link() => {
                if g.type_of(a.targets()[0]) != Some("time") {
                    flag(ViolationKind::AtTimeWithoutTime);
                }
            }
            Some(VARIABLE) if a.is_link() => flag(ViolationKind::VariableNotNode),
            _ => {}
        }
    }
    out
}
