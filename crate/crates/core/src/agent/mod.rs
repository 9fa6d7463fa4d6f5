//! Agents that take turns with an environment.
//!
//! The history is a flat event sequence, one event per `(tick, slot)`, with
//! any field allowed to be null. Cognit agents keep a finite multiset memory
//! and act through activation rules; hypergraph agents keep their cognits as
//! atoms of the memory hypergraph itself.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::rational::{in_unit, parse_pq, to_pq};
use crate::Rational;

mod cognit;
mod episode;
mod hyper;

pub use cognit::{
    cognit_product, ActivationError, ActivationRule, Cognit, CognitAgent, Effect, ProductRule,
};
pub use episode::{
    run_cognit_episode, run_episode, BanditEnv, ConstantEnv, ConstantPolicy, Environment, Percept,
    Policy, TableEnv, TablePolicy, UniformPolicy,
};
pub use hyper::{
    hypergraph_activate, rich_language_check, HyperActivationError, HyperEffect, Violation,
    ViolationKind,
};

/// Default bound on nested activations.
pub const DEFAULT_ACTIVATION_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Event {
    pub tick: u64,
    pub slot: u32,
    pub cognit: Option<String>,
    pub action: Option<String>,
    pub observation: Option<String>,
    pub goal: Option<String>,
    pub reward: Option<Rational>,
    /// Activation effects in the order they were applied.
    pub effects: Vec<String>,
}

impl Event {
    pub fn at(tick: u64) -> Self {
        Event {
            tick,
            ..Event::default()
        }
    }

    pub fn is_null(&self) -> bool {
        self.cognit.is_none()
            && self.action.is_none()
            && self.observation.is_none()
            && self.goal.is_none()
            && self.reward.is_none()
            && self.effects.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogError {
    #[error("line {0}: expected four tab-separated fields")]
    Fields(usize),
    #[error("line {0}: bad tick or slot")]
    Position(usize),
    #[error("line {0}: unknown kind `{1}`")]
    Kind(usize, String),
    #[error("line {0}: reward must be a rational in [0,1]")]
    Reward(usize),
    #[error("line {0}: repeated `{1}` in one event")]
    Repeated(usize, String),
    #[error("line {0}: events out of order")]
    Order(usize),
    #[error("line {0}: bad escape")]
    Escape(usize),
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        out.push(match chars.next()? {
            '\\' => '\\',
            't' => '\t',
            'n' => '\n',
            'r' => '\r',
            _ => return None,
        });
    }
    Some(out)
}

/// Serializes events as `tick\tslot\tkind\tpayload` lines. Each non-null
/// field is one line; an all-null event is a single `null` line.
pub fn write_log(events: &[Event]) -> String {
    let mut out = String::new();
    for e in events {
        let mut line = |kind: &str, payload: &str| {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                e.tick,
                e.slot,
                kind,
                escape(payload)
            ));
        };
        if e.is_null() {
            line("null", "-");
            continue;
        }
        for (kind, v) in [
            ("cognit", &e.cognit),
            ("action", &e.action),
            ("observation", &e.observation),
            ("goal", &e.goal),
        ] {
            if let Some(v) = v {
                line(kind, v);
            }
        }
        if let Some(r) = &e.reward {
            line("reward", &to_pq(r));
        }
        for fx in &e.effects {
            line("effect", fx);
        }
    }
    out
}

pub fn parse_log(text: &str) -> Result<Vec<Event>, LogError> {
    let mut events: Vec<Event> = Vec::new();
    let mut last_null = false;
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        if raw.is_empty() {
            continue;
        }
        let parts: Vec<&str> = raw.split('\t').collect();
        let [tick, slot, kind, payload] = parts[..] else {
            return Err(LogError::Fields(n));
        };
        let tick: u64 = tick.parse().map_err(|_| LogError::Position(n))?;
        let slot: u32 = slot.parse().map_err(|_| LogError::Position(n))?;
        let payload = unescape(payload).ok_or(LogError::Escape(n))?;
        let same = events
            .last()
            .is_some_and(|e| (e.tick, e.slot) == (tick, slot));
        if !same {
            if events
                .last()
                .is_some_and(|e| (e.tick, e.slot) > (tick, slot))
            {
                return Err(LogError::Order(n));
            }
            events.push(Event {
                tick,
                slot,
                ..Event::default()
            });
            last_null = false;
        } else if last_null || kind == "null" {
            return Err(LogError::Repeated(n, kind.to_string()));
        }
        let e = events.last_mut().expect("pushed");
        let slot_of = |f: &mut Option<String>| -> Result<(), LogError> {
            if f.is_some() {
                return Err(LogError::Repeated(n, kind.to_string()));
            }
            *f = Some(payload.clone());
            Ok(())
        };
        match kind {
            "null" => last_null = true,
            "cognit" => slot_of(&mut e.cognit)?,
            "action" => slot_of(&mut e.action)?,
            "observation" => slot_of(&mut e.observation)?,
            "goal" => slot_of(&mut e.goal)?,
            "reward" => {
                if e.reward.is_some() {
                    return Err(LogError::Repeated(n, kind.to_string()));
                }
                let r = parse_pq(&payload)
                    .filter(in_unit)
                    .ok_or(LogError::Reward(n))?;
                e.reward = Some(r);
            }
            "effect" => e.effects.push(payload),
            other => return Err(LogError::Kind(n, other.to_string())),
        }
    }
    Ok(events)
}

/// Something a cognit memory can hold.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Entity {
    Observation(String),
    Action(String),
    Reward(Rational),
    Goal(String),
    Cognit(String),
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entity::Observation(s) => write!(f, "obs:{s}"),
            Entity::Action(s) => write!(f, "act:{s}"),
            Entity::Reward(r) => write!(f, "reward:{}", to_pq(r)),
            Entity::Goal(s) => write!(f, "goal:{s}"),
            Entity::Cognit(s) => write!(f, "cognit:{s}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Entry {
    count: u64,
    stamp: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Insertion {
    Added,
    /// Room was made by dropping this entity (with its count).
    Evicted(Entity, u64),
    /// Memory is saturated by the entity itself, or capacity is zero.
    Rejected,
}

/// Finite multiset. Creating a present entity bumps its count; when full,
/// the entity with the lowest count (then the oldest) is evicted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Memory {
    entries: BTreeMap<Entity, Entry>,
    capacity: u64,
    total: u64,
    clock: u64,
}

impl Memory {
    pub fn new(capacity: u64) -> Self {
        Memory {
            entries: BTreeMap::new(),
            capacity,
            total: 0,
            clock: 0,
        }
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, e: &Entity) -> u64 {
        self.entries.get(e).map_or(0, |x| x.count)
    }

    pub fn contains(&self, e: &Entity) -> bool {
        self.entries.contains_key(e)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Entity, u64)> {
        self.entries.iter().map(|(e, x)| (e, x.count))
    }

    pub fn insert(&mut self, e: Entity) -> Insertion {
        let mut result = Insertion::Added;
        if self.total >= self.capacity {
            let victim = self
                .entries
                .iter()
                .filter(|(k, _)| **k != e)
                .min_by_key(|(_, x)| (x.count, x.stamp))
                .map(|(k, _)| k.clone());
            let Some(victim) = victim else {
                return Insertion::Rejected;
            };
            let n = self.remove(&victim);
            result = Insertion::Evicted(victim, n);
        }
        self.clock += 1;
        let stamp = self.clock;
        self.entries
            .entry(e)
            .or_insert(Entry { count: 0, stamp })
            .count += 1;
        self.total += 1;
        result
    }

    /// Drops the entity entirely; returns the count it had.
    pub fn remove(&mut self, e: &Entity) -> u64 {
        match self.entries.remove(e) {
            Some(x) => {
                self.total -= x.count;
                x.count
            }
            None => 0,
        }
    }
}
