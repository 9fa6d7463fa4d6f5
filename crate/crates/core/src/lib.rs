//! Labeled-hypergraph agent memories and the algebra built on top of them.
//!
//! The crate is `no_std` (with `alloc`) and purely computational: it owns the
//! data model and every metric, while file formats, scenario loading and the
//! command line live in the `cogsyn` companion crate.
//!
//! Module map:
//!
//! - [`hypergraph`]: atoms, h-patterns, matching, merge/split, homomorphism and
//!   isomorphism search, canonical forms.
//! - [`heyting`]: join/meet/exponent, the cost order, pseudo-complements and the
//!   counting probability functional.
//! - [`agent`]: RL-style turn taking, multiset cognit memory, hypergraph cognit
//!   activation and rich-language label checks.
//! - [`cpt`]: system states, transitions, the episode store, the stuckness
//!   formula stack, PGMC sampling and history pattern mining.
//! - [`synergy`]: stuck sets, the synergy index, the hom/iso census, functor
//!   projections and natural-transformation probes.
//! - [`sim`]: the toy cognitive-process world used by bundled scenarios.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod agent;
pub mod cpt;
pub mod heyting;
pub mod hypergraph;
pub mod rational;
pub mod rng;
pub mod sim;
pub mod synergy;

pub use rational::Rational;
