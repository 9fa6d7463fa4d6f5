use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::cognit::describe;
use super::{ActivationError, CognitAgent, Entity, Event};
use crate::rational::{in_unit, int, one, ratio};
use crate::rng::Rng;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Percept {
    pub observation: Option<String>,
    pub reward: Option<Rational>,
}

/// π(a | history): weighted actions, weights summing to 1.
pub trait Policy {
    fn distribution(&self, history: &[Event]) -> Vec<(String, Rational)>;
}

/// μ(x | history, a) and the goal weighting γ.
pub trait Environment {
    fn respond(&self, history: &[Event], action: Option<&str>) -> Vec<(Percept, Rational)>;

    fn goal_weights(&self, _history: &[Event]) -> Vec<(String, Rational)> {
        Vec::new()
    }
}

fn sample<T: Clone>(rng: &mut Rng, dist: &[(T, Rational)]) -> Option<T> {
    let weights: Vec<Rational> = dist.iter().map(|(_, w)| w.clone()).collect();
    rng.pick(&weights).map(|i| dist[i].0.clone())
}

#[derive(Debug, Clone)]
pub struct ConstantPolicy(pub String);

impl Policy for ConstantPolicy {
    fn distribution(&self, _: &[Event]) -> Vec<(String, Rational)> {
        alloc::vec![(self.0.clone(), one())]
    }
}

#[derive(Debug, Clone)]
pub struct UniformPolicy(pub Vec<String>);

impl Policy for UniformPolicy {
    fn distribution(&self, _: &[Event]) -> Vec<(String, Rational)> {
        let n = self.0.len() as i64;
        self.0.iter().map(|a| (a.clone(), ratio(1, n))).collect()
    }
}

/// Keyed by the most recent observation; `fallback` covers the rest.
#[derive(Debug, Clone, Default)]
pub struct TablePolicy {
    pub by_observation: BTreeMap<String, Vec<(String, Rational)>>,
    pub fallback: Vec<(String, Rational)>,
}

impl Policy for TablePolicy {
    fn distribution(&self, history: &[Event]) -> Vec<(String, Rational)> {
        history
            .iter()
            .rev()
            .find_map(|e| e.observation.as_ref())
            .and_then(|o| self.by_observation.get(o))
            .unwrap_or(&self.fallback)
            .clone()
    }
}

#[derive(Debug, Clone)]
pub struct ConstantEnv {
    pub percept: Percept,
    pub goals: Vec<(String, Rational)>,
}

impl ConstantEnv {
    pub fn new(observation: &str, reward: Rational) -> Self {
        assert!(in_unit(&reward), "reward outside [0,1]");
        ConstantEnv {
            percept: Percept {
                observation: Some(observation.into()),
                reward: Some(reward),
            },
            goals: Vec::new(),
        }
    }
}

impl Environment for ConstantEnv {
    fn respond(&self, _: &[Event], _: Option<&str>) -> Vec<(Percept, Rational)> {
        alloc::vec![(self.percept.clone(), one())]
    }

    fn goal_weights(&self, _: &[Event]) -> Vec<(String, Rational)> {
        self.goals.clone()
    }
}

/// Each arm pays reward 1 with its probability, else 0, and echoes the arm
/// name as the observation. Unknown arms pay 0.
#[derive(Debug, Clone, Default)]
pub struct BanditEnv {
    pub arms: BTreeMap<String, Rational>,
    pub goals: Vec<(String, Rational)>,
}

impl Environment for BanditEnv {
    fn respond(&self, _: &[Event], action: Option<&str>) -> Vec<(Percept, Rational)> {
        let p = action
            .and_then(|a| self.arms.get(a))
            .cloned()
            .unwrap_or_else(crate::rational::zero);
        let obs = action.map(String::from);
        let win = Percept {
            observation: obs.clone(),
            reward: Some(one()),
        };
        let lose = Percept {
            observation: obs,
            reward: Some(int(0)),
        };
        alloc::vec![(win, p.clone()), (lose, one() - p)]
    }

    fn goal_weights(&self, _: &[Event]) -> Vec<(String, Rational)> {
        self.goals.clone()
    }
}

/// Percept distribution per action; `fallback` for unlisted actions.
#[derive(Debug, Clone, Default)]
pub struct TableEnv {
    pub by_action: BTreeMap<String, Vec<(Percept, Rational)>>,
    pub fallback: Vec<(Percept, Rational)>,
    pub goals: Vec<(String, Rational)>,
}

impl Environment for TableEnv {
    fn respond(&self, _: &[Event], action: Option<&str>) -> Vec<(Percept, Rational)> {
        action
            .and_then(|a| self.by_action.get(a))
            .unwrap_or(&self.fallback)
            .clone()
    }

    fn goal_weights(&self, _: &[Event]) -> Vec<(String, Rational)> {
        self.goals.clone()
    }
}

fn turn(env: &dyn Environment, history: &[Event], event: &mut Event, rng: &mut Rng) {
    let percept = sample(rng, &env.respond(history, event.action.as_deref())).unwrap_or_default();
    event.observation = percept.observation;
    event.reward = percept.reward;
    event.goal = sample(rng, &env.goal_weights(history));
}

/// Agent and environment take turns, one event per tick: the agent's
/// action, then the environment's observation, reward and goal.
pub fn run_episode(
    policy: &dyn Policy,
    env: &dyn Environment,
    ticks: u64,
    seed: u64,
) -> Vec<Event> {
    let mut rng = Rng::new(seed);
    let mut history = Vec::new();
    for tick in 0..ticks {
        let mut e = Event::at(tick);
        e.action = sample(&mut rng, &policy.distribution(&history));
        turn(env, &history, &mut e, &mut rng);
        history.push(e);
    }
    history
}

/// Like [`run_episode`], with a cognit activated at each tick per
/// `schedule`. A queued executed action takes the action slot before the
/// policy is consulted. Percepts and goals enter memory as entities; an
/// over-deep activation chain is logged as an effect and the episode goes on.
pub fn run_cognit_episode(
    agent: &mut CognitAgent,
    schedule: &dyn Fn(u64) -> Option<String>,
    policy: &dyn Policy,
    env: &dyn Environment,
    ticks: u64,
    seed: u64,
) -> Result<Vec<Event>, ActivationError> {
    let mut rng = Rng::new(seed);
    let mut history = Vec::new();
    for tick in 0..ticks {
        let mut e = Event::at(tick);
        if let Some(c) = schedule(tick) {
            e.effects = match agent.activate(&c) {
                Ok(fx) => describe(&fx),
                Err(ActivationError::Depth { applied, .. }) => {
                    let mut d = describe(&applied);
                    d.push("error(activation-depth)".into());
                    d
                }
                Err(other) => return Err(other),
            };
            e.cognit = Some(c);
        }
        e.action = match agent.queue.pop_front() {
            Some(a) => Some(a),
            None => sample(&mut rng, &policy.distribution(&history)),
        };
        turn(env, &history, &mut e, &mut rng);
        if let Some(a) = &e.action {
            agent.memory.insert(Entity::Action(a.clone()));
        }
        if let Some(o) = &e.observation {
            agent.memory.insert(Entity::Observation(o.clone()));
        }
        if let Some(r) = &e.reward {
            agent.memory.insert(Entity::Reward(r.clone()));
        }
        if let Some(g) = &e.goal {
            agent.memory.insert(Entity::Goal(g.clone()));
        }
        history.push(e);
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{ActivationRule, Cognit};
    use alloc::vec;

    #[test]
    fn zero_ticks_empty() {
        let env = ConstantEnv::new("o", ratio(1, 2));
        assert!(run_episode(&ConstantPolicy("a".into()), &env, 0, 1).is_empty());
    }

    #[test]
    fn constant_rewards() {
        let env = ConstantEnv::new("o", ratio(3, 4));
        let h = run_episode(&ConstantPolicy("a".into()), &env, 3, 1);
        let rewards: Vec<_> = h.iter().map(|e| e.reward.clone().unwrap()).collect();
        assert_eq!(rewards, vec![ratio(3, 4); 3]);
    }

    #[test]
    fn seeded_determinism() {
        let env = BanditEnv {
            arms: [("l".into(), ratio(1, 3)), ("r".into(), ratio(2, 3))]
                .into_iter()
                .collect(),
            goals: vec![("win".into(), one())],
        };
        let pol = UniformPolicy(vec!["l".into(), "r".into()]);
        let a = run_episode(&pol, &env, 50, 42);
        assert_eq!(a, run_episode(&pol, &env, 50, 42));
        assert_ne!(a, run_episode(&pol, &env, 50, 43));
        assert!(a.iter().all(|e| e.goal.as_deref() == Some("win")));
    }

    #[test]
    fn executed_action_takes_next_slot() {
        let mut agent = CognitAgent::new(16);
        agent.add_cognit(Cognit::new("wave", ActivationRule::Execute("wave".into())));
        let env = ConstantEnv::new("o", one());
        let h = run_cognit_episode(
            &mut agent,
            &|t| (t == 1).then(|| "wave".into()),
            &ConstantPolicy("rest".into()),
            &env,
            3,
            0,
        )
        .unwrap();
        let acts: Vec<_> = h.iter().map(|e| e.action.clone().unwrap()).collect();
        assert_eq!(acts, vec!["rest", "wave", "rest"]);
        assert_eq!(agent.memory.count(&Entity::Observation("o".into())), 3);
    }
}
