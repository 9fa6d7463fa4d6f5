//! PGMC control: fitness-proportional choice of the next cognitive action
//! from patterns mined out of the recorded history.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{
    conf_and_stuckness, CatalogPattern, CptError, EpisodeStore, Interval, StuckParams, StuckReport,
};
use crate::hypergraph::{canonical_form, occurs, AtomId, Hypergraph, Label, LinkIndex, VARIABLE};
use crate::rational::{ratio, to_f64, zero};
use crate::rng::Rng;
use crate::Rational;

/// Fitness floor so that no action is ever starved.
pub const FITNESS_FLOOR: (i64, i64) = (1, 1_000_000);

pub const IMPLICATION: &str = "implication";

fn floor() -> Rational {
    ratio(FITNESS_FLOOR.0, FITNESS_FLOOR.1)
}

/// Draws an index with probability proportional to `max(fitness, ε)`.
/// `None` only for an empty slice.
pub fn sample_by_fitness(fitness: &[Rational], rng: &mut Rng) -> Option<usize> {
    let eps = floor();
    let w: Vec<Rational> = fitness
        .iter()
        .map(|f| if *f > eps { f.clone() } else { eps.clone() })
        .collect();
    rng.pick(&w)
}

/// Node standing for h-pattern `key` in a memory graph; created on demand.
pub fn pattern_atom(memory: &mut Hypergraph, key: &str) -> AtomId {
    let ty = format!("hpattern:{key}");
    let found = memory
        .nodes()
        .find(|n| n.type_name() == Some(ty.as_str()))
        .map(|n| n.id());
    found.unwrap_or_else(|| memory.add_typed_node(&ty))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Choice {
    pub action: String,
    /// Floored fitness per admissible action, in input order.
    pub fitness: Vec<(String, Rational)>,
    pub report: StuckReport,
    /// Implication links written into memory.
    pub links: Vec<AtomId>,
}

/// Picks the next action (a process id) proportionally to the confidence of
/// its best supporting pattern, then links the patterns displayed now to
/// the chosen action's target pattern with `[probability, confidence]`
/// weights taken from its efficacy.
#[allow(clippy::too_many_arguments)]
pub fn pgmc_choose(
    store: &EpisodeStore,
    actions: &[String],
    memory: &mut Hypergraph,
    candidates: &[CatalogPattern],
    situation: &str,
    i_s: Interval,
    params: &StuckParams,
    seed: u64,
) -> Result<Choice, CptError> {
    if actions.is_empty() {
        return Err(CptError::NoActions);
    }
    let mut reports = Vec::with_capacity(actions.len());
    for a in actions {
        reports.push(conf_and_stuckness(
            store, a, situation, i_s, candidates, params,
        )?);
    }
    let raw: Vec<Rational> = reports.iter().map(|r| r.conf.clone()).collect();
    let mut rng = Rng::new(seed);
    let pick = sample_by_fitness(&raw, &mut rng).expect("non-empty");
    let eps = floor();
    let fitness = actions
        .iter()
        .zip(&raw)
        .map(|(a, f)| (a.clone(), if *f > eps { f.clone() } else { eps.clone() }))
        .collect();
    let report = reports.swap_remove(pick);
    let mut links = Vec::new();
    if let (Some(target), Some([_, _, e, ce])) = (&report.argmax, &report.factors) {
        let now = store.episode(situation).and_then(|ep| ep.at_tick(i_s.end));
        let present: Vec<&CatalogPattern> = candidates
            .iter()
            .filter(|p| now.is_some_and(|s| s.degree(p) > zero()))
            .collect();
        let to = pattern_atom(memory, target);
        for p in present {
            let from = pattern_atom(memory, &p.key);
            let label = Label::new(IMPLICATION, alloc::vec![to_f64(e), to_f64(ce)])?;
            links.push(memory.add_link(alloc::vec![from, to], Some(label))?);
        }
    }
    Ok(Choice {
        action: actions[pick].clone(),
        fitness,
        report,
        links,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinedPattern {
    pub pattern: CatalogPattern,
    /// Snapshots whose memory contains the pattern.
    pub support: usize,
}

type Sig = (Option<String>, usize);

fn tuples(n: &[AtomId], arity: usize) -> Vec<Vec<AtomId>> {
    let mut out = alloc::vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| n.iter().map(move |x| [t.as_slice(), &[*x]].concat()))
            .collect();
    }
    out
}

/// Frequent patterns over the stored snapshot memories, grown one atom at
/// a time from single nodes (variable or typed) and deduplicated by
/// canonical form. Extensions of infrequent patterns are never tried, which
/// is exact because support can only drop under extension. Returned
/// patterns are connected and are not a lone variable, sorted by key.
pub fn mine_history_patterns(
    store: &EpisodeStore,
    min_support: usize,
    max_atoms: usize,
) -> Vec<MinedPattern> {
    let memories: Vec<&Hypergraph> = store
        .episodes()
        .flat_map(|e| e.snapshots.iter().filter_map(|s| s.memory.as_ref()))
        .collect();
    let mut node_types: BTreeSet<Option<String>> = BTreeSet::new();
    let mut sigs: BTreeSet<Sig> = BTreeSet::new();
    for m in &memories {
        for n in m.nodes() {
            if n.type_name() != Some(VARIABLE) {
                node_types.insert(n.type_name().map(String::from));
            }
        }
        for l in m.links() {
            if l.targets().len() <= 3
                && l.targets()
                    .iter()
                    .all(|t| m.atom(*t).is_some_and(|a| a.is_node()))
            {
                sigs.insert((l.type_name().map(String::from), l.targets().len()));
            }
        }
    }
    let mut kinds: Vec<Option<String>> = alloc::vec![Some(VARIABLE.into())];
    kinds.extend(node_types.iter().cloned());
    let support = |p: &Hypergraph| memories.iter().filter(|m| occurs(p, m)).count();

    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut found: Vec<MinedPattern> = Vec::new();
    let mut frontier: Vec<Hypergraph> = Vec::new();
    let mut consider =
        |g: Hypergraph, frontier: &mut Vec<Hypergraph>, seen: &mut BTreeMap<String, usize>| {
            let Ok(key) = canonical_form(&g) else { return };
            if seen.contains_key(&key) {
                return;
            }
            let s = support(&g);
            seen.insert(key.clone(), s);
            if s < min_support || s == 0 {
                return;
            }
            let lone_variable = g.len() == 1 && g.nodes().all(|n| n.type_name() == Some(VARIABLE));
            if g.is_connected() && !lone_variable {
                found.push(MinedPattern {
                    pattern: CatalogPattern {
                        key,
                        body: g.clone(),
                    },
                    support: s,
                });
            }
            frontier.push(g);
        };
    if max_atoms == 0 {
        return Vec::new();
    }
    for k in &kinds {
        let mut g = Hypergraph::new();
        g.add_node(k.as_deref().map(Label::of));
        consider(g, &mut frontier, &mut seen);
    }
    for _ in 1..max_atoms {
        let level = core::mem::take(&mut frontier);
        for g in level {
            for k in &kinds {
                let mut h = g.clone();
                h.add_node(k.as_deref().map(Label::of));
                consider(h, &mut frontier, &mut seen);
            }
            let idx = LinkIndex::build(&g);
            let nodes = g.node_ids();
            for (ty, arity) in &sigs {
                for t in tuples(&nodes, *arity) {
                    if idx.get(ty.as_deref(), &t).is_some() {
                        continue;
                    }
                    let mut h = g.clone();
                    h.add_link(t, ty.as_deref().map(Label::of))
                        .expect("nodes exist");
                    consider(h, &mut frontier, &mut seen);
                }
            }
        }
    }
    found.sort_by(|a, b| a.pattern.key.cmp(&b.pattern.key));
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpt::{Episode, SystemState};
    use crate::rational::{int, one};
    use alloc::vec;

    #[test]
    fn single_action_always_chosen() {
        let mut rng = Rng::new(1);
        for _ in 0..50 {
            assert_eq!(sample_by_fitness(&[zero()], &mut rng), Some(0));
        }
    }

    #[test]
    fn fitness_ratio_three_to_one() {
        let eps = floor();
        let f = [eps.clone() * int(3), eps];
        let mut rng = Rng::new(11);
        let hits = (0..10_000)
            .filter(|_| sample_by_fitness(&f, &mut rng) == Some(0))
            .count();
        assert!((hits as f64 - 7_500.0).abs() < 375.0, "{hits}");
    }

    #[test]
    fn null_fitness_is_uniform() {
        let f = [zero(), zero(), zero(), zero()];
        let mut rng = Rng::new(5);
        let mut counts = [0usize; 4];
        for _ in 0..8_000 {
            counts[sample_by_fitness(&f, &mut rng).unwrap()] += 1;
        }
        assert!(
            counts.iter().all(|c| (*c as f64 - 2_000.0).abs() < 200.0),
            "{counts:?}"
        );
    }

    fn store_with(memories: Vec<Hypergraph>) -> EpisodeStore {
        let mut s = EpisodeStore::default();
        let mut e = Episode::new("s");
        for (t, m) in memories.into_iter().enumerate() {
            e.snapshots.push(SystemState {
                id: t as u64,
                tick: t as u64,
                degrees: BTreeMap::new(),
                memory: Some(m),
            });
        }
        s.ingest(e).unwrap();
        s
    }

    fn ab() -> Hypergraph {
        let mut g = Hypergraph::new();
        let a = g.add_typed_node("a");
        let b = g.add_typed_node("b");
        g.add_typed_link("link", &[a, b]).unwrap();
        g
    }

    #[test]
    fn miner_finds_variable_link() {
        let s = store_with(vec![ab(), ab(), ab()]);
        let mined = mine_history_patterns(&s, 3, 3);
        let mut p = Hypergraph::new();
        let x = p.add_typed_node(VARIABLE);
        let y = p.add_typed_node(VARIABLE);
        p.add_typed_link("link", &[x, y]).unwrap();
        let key = canonical_form(&p).unwrap();
        let hit = mined
            .iter()
            .find(|m| m.pattern.key == key)
            .expect("link(X,Y) mined");
        assert_eq!(hit.support, 3);
        assert!(mine_history_patterns(&s, 4, 3).is_empty());
        let singles = mine_history_patterns(&s, 1, 1);
        assert_eq!(singles.len(), 2);
        assert!(singles.iter().all(|m| m.pattern.body.len() == 1));
    }

    #[test]
    fn pgmc_writes_implication_links() {
        use crate::cpt::{Budget, Cause, GoalDegree, GoalSpec, Transition};
        let mut p = Hypergraph::new();
        p.add_typed_node("p");
        let pat = CatalogPattern::new(p).unwrap();
        let goal = GoalSpec {
            id: "g".into(),
            weight: one(),
            degree: GoalDegree::Pattern(pat.key.clone()),
        };
        let mut store = EpisodeStore::new(vec![pat.clone()], vec![goal]);
        let mut e = Episode::new("s");
        for t in 0..2u64 {
            let d = if t == 0 { ratio(1, 2) } else { one() };
            e.snapshots.push(SystemState {
                id: t,
                tick: t,
                degrees: [(pat.key.clone(), d)].into_iter().collect(),
                memory: None,
            });
        }
        e.transitions.push(Transition {
            from: 0,
            to: 1,
            cause: Cause::Process("A".into()),
            probability: one(),
            confidence: one(),
            cost: Budget::default(),
            interval: Interval::new(0, 1),
        });
        store.ingest(e).unwrap();
        let mut memory = Hypergraph::new();
        let params = StuckParams {
            window_len: 1,
            ..StuckParams::default()
        };
        let c = pgmc_choose(
            &store,
            &["A".into()],
            &mut memory,
            core::slice::from_ref(&pat),
            "s",
            Interval::unit(0),
            &params,
            3,
        )
        .unwrap();
        assert_eq!(c.action, "A");
        assert_eq!(c.links.len(), 1);
        let link = memory.atom(c.links[0]).unwrap();
        assert_eq!(link.type_name(), Some(IMPLICATION));
        assert_eq!(link.label().unwrap().weights(), &[1.0, 0.5]);
        assert!(crate::agent::rich_language_check(&memory).is_empty());
        let again = pgmc_choose(
            &store,
            &["A".into()],
            &mut Hypergraph::new(),
            &[pat],
            "s",
            Interval::unit(0),
            &params,
            3,
        )
        .unwrap();
        assert_eq!(again.fitness, c.fitness);
    }
}
