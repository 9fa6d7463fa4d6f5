use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{Entity, Memory, DEFAULT_ACTIVATION_DEPTH};

/// What a cognit does when activated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActivationRule {
    /// Not every cognit can be activated.
    Nothing,
    Create(Vec<Entity>),
    Forget(Vec<Entity>),
    /// Queue an action for the next action slot.
    Execute(String),
    /// Activate other cognits; with `return_to_caller` the activating cognit
    /// is re-activated afterwards and runs its `on_return` rule.
    Activate {
        targets: Vec<String>,
        return_to_caller: bool,
    },
    Sequence(Vec<ActivationRule>),
}

/// `c * x` for a cognit acting on one entity in isolation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProductRule {
    Identity,
    Annihilator,
    /// Entities missing from the table map to null.
    Table(BTreeMap<Entity, Entity>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cognit {
    pub id: String,
    pub rule: ActivationRule,
    pub on_return: ActivationRule,
    pub product: ProductRule,
}

impl Cognit {
    pub fn new(id: &str, rule: ActivationRule) -> Self {
        Cognit {
            id: id.into(),
            rule,
            on_return: ActivationRule::Nothing,
            product: ProductRule::Annihilator,
        }
    }

    pub fn entity(&self) -> Entity {
        Entity::Cognit(self.id.clone())
    }
}

pub fn cognit_product(c: &Cognit, x: &Entity) -> Option<Entity> {
    match &c.product {
        ProductRule::Identity => Some(x.clone()),
        ProductRule::Annihilator => None,
        ProductRule::Table(t) => t.get(x).cloned(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Effect {
    Forget(Entity),
    Create(Entity),
    Execute(String),
    Activate { cognit: String, resume: bool },
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Effect::Forget(e) => write!(f, "forget({e})"),
            Effect::Create(e) => write!(f, "create({e})"),
            Effect::Execute(a) => write!(f, "execute({a})"),
            Effect::Activate {
                cognit,
                resume: false,
            } => write!(f, "activate({cognit})"),
            Effect::Activate {
                cognit,
                resume: true,
            } => write!(f, "return({cognit})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ActivationError {
    #[error("cognit `{0}` is not in memory")]
    NotInMemory(String),
    #[error("unknown cognit `{0}`")]
    UnknownCognit(String),
    #[error("activation chain deeper than {bound}")]
    Depth { bound: usize, applied: Vec<Effect> },
}

/// Multiset-memory agent. Effects are applied to memory one at a time as
/// they are produced, so an aborted chain leaves the effects before it.
#[derive(Debug, Clone)]
pub struct CognitAgent {
    pub memory: Memory,
    pub cognits: BTreeMap<String, Cognit>,
    /// Actions executed from memory, waiting for an action slot.
    pub queue: VecDeque<String>,
    pub depth_bound: usize,
}

impl CognitAgent {
    pub fn new(capacity: u64) -> Self {
        CognitAgent {
            memory: Memory::new(capacity),
            cognits: BTreeMap::new(),
            queue: VecDeque::new(),
            depth_bound: DEFAULT_ACTIVATION_DEPTH,
        }
    }

    /// Registers a cognit and places it in memory.
    pub fn add_cognit(&mut self, c: Cognit) {
        self.memory.insert(c.entity());
        self.cognits.insert(c.id.clone(), c);
    }

    pub fn activate(&mut self, id: &str) -> Result<Vec<Effect>, ActivationError> {
        if !self.cognits.contains_key(id) {
            return Err(ActivationError::UnknownCognit(id.into()));
        }
        if !self.memory.contains(&Entity::Cognit(id.into())) {
            return Err(ActivationError::NotInMemory(id.into()));
        }
        let mut out = Vec::new();
        match self.run(id, None, false, 0, &mut out) {
            Ok(()) => Ok(out),
            Err(bound) => Err(ActivationError::Depth {
                bound,
                applied: out,
            }),
        }
    }

    fn run(
        &mut self,
        id: &str,
        caller: Option<&str>,
        resume: bool,
        depth: usize,
        out: &mut Vec<Effect>,
    ) -> Result<(), usize> {
        if depth > self.depth_bound {
            return Err(self.depth_bound);
        }
        let Some(c) = self.cognits.get(id) else {
            return Ok(());
        };
        let rule = if resume {
            c.on_return.clone()
        } else {
            c.rule.clone()
        };
        self.apply(id, &rule, caller, depth, out)
    }

    fn apply(
        &mut self,
        id: &str,
        rule: &ActivationRule,
        caller: Option<&str>,
        depth: usize,
        out: &mut Vec<Effect>,
    ) -> Result<(), usize> {
        match rule {
            ActivationRule::Nothing => {}
            ActivationRule::Create(es) => {
                for e in es {
                    self.memory.insert(e.clone());
                    out.push(Effect::Create(e.clone()));
                }
            }
            ActivationRule::Forget(es) => {
                for e in es {
                    self.memory.remove(e);
                    out.push(Effect::Forget(e.clone()));
                }
            }
            ActivationRule::Execute(a) => {
                self.queue.push_back(a.clone());
                out.push(Effect::Execute(a.clone()));
            }
            ActivationRule::Activate {
                targets,
                return_to_caller,
            } => {
                for t in targets {
                    if !self.memory.contains(&Entity::Cognit(t.clone()))
                        || !self.cognits.contains_key(t)
                    {
                        continue;
                    }
                    out.push(Effect::Activate {
                        cognit: t.clone(),
                        resume: false,
                    });
                    self.run(t, Some(id), false, depth + 1, out)?;
                }
                if let (true, Some(back)) = (*return_to_caller, caller) {
                    out.push(Effect::Activate {
                        cognit: back.into(),
                        resume: true,
                    });
                    self.run(back, None, true, depth + 1, out)?;
                }
            }
            ActivationRule::Sequence(rules) => {
                for r in rules {
                    self.apply(id, r, caller, depth, out)?;
                }
            }
        }
        Ok(())
    }
}

/// Renders effects for the event log.
pub(crate) fn describe(effects: &[Effect]) -> Vec<String> {
    effects.iter().map(|e| format!("{e}")).collect()
}
