//! Natural transformations between two process functors, and the cost
//! comparison that says when routing through the other process is cheaper.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::cpt::{Budget, Cause};
use crate::hypergraph::{
    find_homomorphisms, AtomId, HomSearch, Homomorphism, Hypergraph, LinkIndex,
};
use crate::rational::{int, zero};
use crate::Rational;

use super::functor::{
    functor_map, functor_project, morphism_cost, Cost, FunctorProjection, TransitionSystem,
};
use super::SynergyError;

/// Search nodes visited before giving up.
pub const DEFAULT_NAT_TRANS_BOUND: u64 = 1_000_000;

/// A node map between two objects of the probe category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Morphism {
    pub from: usize,
    pub to: usize,
    pub map: BTreeMap<AtomId, AtomId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaturalTransformation {
    /// One reflexive homomorphism `F_A(X) → F_B(X)` per object.
    pub components: Vec<Homomorphism>,
    pub cost: Rational,
}

/// Why no natural transformation exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    NoComponent {
        object: usize,
    },
    FunctorUndefined {
        morphism: usize,
    },
    /// No pair of components makes this square commute.
    Square {
        morphism: usize,
    },
    /// Every square commutes for some choice, but no single choice works
    /// for all of them.
    Joint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NatTransOutcome {
    Found(NaturalTransformation),
    None(Certificate),
    UndecidedAtScale,
}

/// Both functors applied to the whole probe category.
struct Lifted {
    fa: Vec<FunctorProjection>,
    fb: Vec<FunctorProjection>,
    fa_f: Vec<Option<Homomorphism>>,
    fb_f: Vec<Option<Homomorphism>>,
}

fn lift(
    sys: &TransitionSystem,
    a: &str,
    b: &str,
    objects: &[Hypergraph],
    morphisms: &[Morphism],
) -> Result<Lifted, SynergyError> {
    let proj = |p: &str| {
        objects
            .iter()
            .map(|x| functor_project(sys, x, p))
            .collect::<Result<Vec<_>, _>>()
    };
    let (fa, fb) = (proj(a)?, proj(b)?);
    let mut fa_f = Vec::new();
    let mut fb_f = Vec::new();
    for (i, m) in morphisms.iter().enumerate() {
        let (x, y) = match (objects.get(m.from), objects.get(m.to)) {
            (Some(x), Some(y)) => (x, y),
            _ => return Err(SynergyError::BadMorphism(i)),
        };
        if !Homomorphism::from_map(m.map.clone()).is_valid(x, y) {
            return Err(SynergyError::BadMorphism(i));
        }
        fa_f.push(functor_map(sys, x, &fa[m.from], y, &fa[m.to], &m.map));
        fb_f.push(functor_map(sys, x, &fb[m.from], y, &fb[m.to], &m.map));
    }
    Ok(Lifted { fa, fb, fa_f, fb_f })
}

fn commutes(
    eta_x: &Homomorphism,
    fa_f: &Homomorphism,
    fb_f: &Homomorphism,
    eta_y: &Homomorphism,
) -> bool {
    eta_x.vertex_map.keys().all(|n| {
        let via_a = fa_f.vertex_map.get(n).and_then(|m| eta_y.vertex_map.get(m));
        let via_b = eta_x.vertex_map.get(n).and_then(|m| fb_f.vertex_map.get(m));
        via_a.is_some() && via_a == via_b
    })
}

/// Reflexive homomorphisms `src → dst` sorted by (cost, node map).
fn components(src: &Hypergraph, dst: &Hypergraph, bound: u64) -> Option<Vec<Homomorphism>> {
    let search = HomSearch {
        exact_threshold: bound,
        ..HomSearch::default()
    }
    .reflexive();
    let r = find_homomorphisms(src, dst, &search);
    if r.truncated {
        return None;
    }
    let mut homs = r.homs;
    homs.sort_by(|x, y| (&x.cost, &x.vertex_map).cmp(&(&y.cost, &y.vertex_map)));
    Some(homs)
}

/// Minimum-cost natural transformation `F_A ⇒ F_B` over the given objects
/// and morphisms. Components are reflexive homomorphisms costed by merges;
/// ties go to the lexicographically first assignment.
pub fn nat_trans_search(
    sys: &TransitionSystem,
    a: &str,
    b: &str,
    objects: &[Hypergraph],
    morphisms: &[Morphism],
    bound: u64,
) -> Result<NatTransOutcome, SynergyError> {
    let lifted = lift(sys, a, b, objects, morphisms)?;
    let mut cands = Vec::new();
    for (i, (fa, fb)) in lifted.fa.iter().zip(&lifted.fb).enumerate() {
        match components(&fa.graph, &fb.graph, bound) {
            None => return Ok(NatTransOutcome::UndecidedAtScale),
            Some(c) if c.is_empty() => {
                return Ok(NatTransOutcome::None(Certificate::NoComponent {
                    object: i,
                }))
            }
            Some(c) => cands.push(c),
        }
    }
    let mut squares = Vec::new();
    for (i, m) in morphisms.iter().enumerate() {
        let (Some(fa_f), Some(fb_f)) = (&lifted.fa_f[i], &lifted.fb_f[i]) else {
            return Ok(NatTransOutcome::None(Certificate::FunctorUndefined {
                morphism: i,
            }));
        };
        let any = cands[m.from]
            .iter()
            .any(|ex| cands[m.to].iter().any(|ey| commutes(ex, fa_f, fb_f, ey)));
        if !any {
            return Ok(NatTransOutcome::None(Certificate::Square { morphism: i }));
        }
        squares.push((m.from, m.to, fa_f, fb_f));
    }

    let floor: Vec<Rational> = cands.iter().map(|c| c[0].cost.clone()).collect();
    let mut search = Search {
        cands: &cands,
        squares: &squares,
        floor: &floor,
        visited: 0,
        bound,
        best: None,
        pick: Vec::new(),
    };
    search.descend(zero());
    if search.visited > bound {
        return Ok(NatTransOutcome::UndecidedAtScale);
    }
    Ok(match search.best {
        Some((cost, picks)) => NatTransOutcome::Found(NaturalTransformation {
            components: picks
                .iter()
                .enumerate()
                .map(|(i, k)| cands[i][*k].clone())
                .collect(),
            cost,
        }),
        None => NatTransOutcome::None(Certificate::Joint),
    })
}

type Square<'a> = (usize, usize, &'a Homomorphism, &'a Homomorphism);

struct Search<'a> {
    cands: &'a [Vec<Homomorphism>],
    squares: &'a [Square<'a>],
    floor: &'a [Rational],
    visited: u64,
    bound: u64,
    best: Option<(Rational, Vec<usize>)>,
    pick: Vec<usize>,
}

impl Search<'_> {
    fn descend(&mut self, cost: Rational) {
        let k = self.pick.len();
        if k == self.cands.len() {
            if self.best.as_ref().is_none_or(|(c, _)| cost < *c) {
                self.best = Some((cost, self.pick.clone()));
            }
            return;
        }
        for i in 0..self.cands[k].len() {
            self.visited += 1;
            if self.visited > self.bound {
                return;
            }
            let c = &cost + &self.cands[k][i].cost;
            let rest: Rational = self.floor[k + 1..].iter().sum();
            if self.best.as_ref().is_some_and(|(b, _)| &c + &rest >= *b) {
                // Candidates are sorted by cost: the rest are no better.
                break;
            }
            self.pick.push(i);
            if self.consistent(k) {
                self.descend(c);
            }
            self.pick.pop();
        }
    }

    /// Squares whose corners are both assigned, one of them just now.
    fn consistent(&self, k: usize) -> bool {
        self.squares.iter().all(|(x, y, fa_f, fb_f)| {
            if (*x != k && *y != k) || *x > k || *y > k {
                return true;
            }
            commutes(
                &self.cands[*x][self.pick[*x]],
                fa_f,
                fb_f,
                &self.cands[*y][self.pick[*y]],
            )
        })
    }
}

fn reflexive_valid(h: &Homomorphism, src: &Hypergraph, dst: &Hypergraph) -> bool {
    let index = LinkIndex::build(dst);
    src.nodes()
        .all(|n| h.vertex_map.get(&n.id()).is_some_and(|m| dst.contains(*m)))
        && src.links().all(|l| {
            let t: Option<Vec<AtomId>> = l
                .targets()
                .iter()
                .map(|x| h.vertex_map.get(x).copied())
                .collect();
            match t {
                Some(t) => {
                    t.windows(2).all(|w| w[0] == w[1]) || index.get(l.type_name(), &t).is_some()
                }
                None => false,
            }
        })
}

/// Independent check of a claimed transformation: components are reflexive
/// homomorphisms and every naturality square commutes under composition.
pub fn verify_naturality(
    sys: &TransitionSystem,
    a: &str,
    b: &str,
    objects: &[Hypergraph],
    morphisms: &[Morphism],
    nt: &NaturalTransformation,
) -> bool {
    let Ok(lifted) = lift(sys, a, b, objects, morphisms) else {
        return false;
    };
    if nt.components.len() != objects.len() {
        return false;
    }
    let shapes = nt
        .components
        .iter()
        .zip(lifted.fa.iter().zip(&lifted.fb))
        .all(|(h, (fa, fb))| reflexive_valid(h, &fa.graph, &fb.graph));
    let total: Rational = nt.components.iter().map(|h| int(h.merges() as i64)).sum();
    shapes
        && total == nt.cost
        && morphisms
            .iter()
            .enumerate()
            .all(|(i, m)| match (&lifted.fa_f[i], &lifted.fb_f[i]) {
                (Some(fa_f), Some(fb_f)) => {
                    let left = fa_f.compose(&nt.components[m.to]);
                    let right = nt.components[m.from].compose(fb_f);
                    left.vertex_map == right.vertex_map
                        && left.vertex_map.len() == fa_f.vertex_map.len()
                }
                _ => false,
            })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostComparison {
    /// `η_X`, `F_B(f)`, `η'_Y`.
    pub legs: [Cost; 3],
    pub indirect: Cost,
    pub direct: Cost,
    pub holds: bool,
    /// `direct − indirect` when both are finite.
    pub margin: Option<Rational>,
}

pub fn compare_costs(legs: [Cost; 3], direct: Cost) -> CostComparison {
    let indirect = legs.iter().cloned().fold(Cost::zero(), |a, b| a + b);
    let margin = match (&indirect, &direct) {
        (Cost::Finite(i), Cost::Finite(d)) => Some(d - i),
        _ => None,
    };
    CostComparison {
        holds: indirect < direct,
        legs,
        indirect,
        direct,
        margin,
    }
}

fn cheapest(src: &Hypergraph, dst: &Hypergraph) -> Cost {
    match components(src, dst, DEFAULT_NAT_TRANS_BOUND) {
        Some(c) if !c.is_empty() => Cost::Finite(c[0].cost.clone()),
        _ => Cost::Infinite,
    }
}

/// Is `X → Y` cheaper for `A` by detouring through `B`? Compares
/// `cost(η_X) + cost(F_B(f)) + cost(η'_Y)` with `cost(F_A(f))`, where `η`
/// and `η'` are the cheapest components in each direction.
pub fn commutation_cost_compare(
    sys: &TransitionSystem,
    a: &str,
    b: &str,
    x: &Hypergraph,
    y: &Hypergraph,
    f: &BTreeMap<AtomId, AtomId>,
) -> Result<CostComparison, SynergyError> {
    if !Homomorphism::from_map(f.clone()).is_valid(x, y) {
        return Err(SynergyError::BadMorphism(0));
    }
    let (ax, ay) = (functor_project(sys, x, a)?, functor_project(sys, y, a)?);
    let (bx, by) = (functor_project(sys, x, b)?, functor_project(sys, y, b)?);
    let leg =
        |px: &FunctorProjection, py: &FunctorProjection| match functor_map(sys, x, px, y, py, f) {
            Some(h) => morphism_cost(sys, x, px, y, py, f, &h),
            None => Cost::Infinite,
        };
    let legs = [
        cheapest(&ax.graph, &bx.graph),
        leg(&bx, &by),
        cheapest(&by.graph, &ay.graph),
    ];
    Ok(compare_costs(legs, leg(&ax, &ay)))
}

/// A small story: from "Bob is nice" (`x`) to "Bob is nice, so he will
/// help" (`y`). Inference needs a long chain of steps; evolution has a
/// direct one.
#[derive(Debug, Clone, PartialEq)]
pub struct BobNice {
    pub system: TransitionSystem,
    pub x: Hypergraph,
    pub y: Hypergraph,
    pub f: BTreeMap<AtomId, AtomId>,
}

pub const INFERENCE: &str = "inference";
pub const EVOLUTION: &str = "evolution";

/// With `equal_costs`, every step costs 1 and inference also gets a
/// direct step.
pub fn bob_nice(equal_costs: bool) -> BobNice {
    let mut sys = TransitionSystem::new();
    let p = |s: &str| Cause::Process(s.into());
    let c = |n: i64| Budget::new(zero(), int(n));
    let long = |n: i64| if equal_costs { c(1) } else { c(n) };
    let seen = sys.add_transition("s0", "bob-nice", p(INFERENCE), c(1));
    sys.add_transition("s0", "bob-nice", p(EVOLUTION), c(1));
    let observed = sys.add_transition("bob-nice", "bob-helpful", Cause::Exogenous, c(1));
    sys.add_transition("bob-nice", "nice-people-help", p(INFERENCE), long(3));
    sys.add_transition("nice-people-help", "bob-is-people", p(INFERENCE), long(3));
    sys.add_transition("bob-is-people", "bob-helpful", p(INFERENCE), long(4));
    sys.add_transition("bob-nice", "bob-helpful", p(EVOLUTION), c(1));
    if equal_costs {
        sys.add_transition("bob-nice", "bob-helpful", p(INFERENCE), c(1));
    }
    let x = sys.subsystem(&[seen], &[]);
    let y = sys.subsystem(&[seen, observed], &[]);
    let f = x.node_ids().into_iter().map(|n| (n, n)).collect();
    BobNice {
        system: sys,
        x,
        y,
        f,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bob_nice_favours_the_detour() {
        let s = bob_nice(false);
        let r =
            commutation_cost_compare(&s.system, INFERENCE, EVOLUTION, &s.x, &s.y, &s.f).unwrap();
        assert_eq!(r.direct, Cost::Finite(int(10)));
        assert_eq!(r.indirect, Cost::Finite(int(1)));
        assert!(r.holds);
        assert_eq!(r.margin, Some(int(9)));
        let back =
            commutation_cost_compare(&s.system, EVOLUTION, INFERENCE, &s.x, &s.y, &s.f).unwrap();
        assert!(!back.holds);
    }

    #[test]
    fn equal_costs_control_fails() {
        let s = bob_nice(true);
        let r =
            commutation_cost_compare(&s.system, INFERENCE, EVOLUTION, &s.x, &s.y, &s.f).unwrap();
        assert_eq!(r.direct, Cost::Finite(int(1)));
        assert!(!r.holds);
    }

    #[test]
    fn margin_example() {
        let one = || Cost::Finite(int(1));
        let r = compare_costs([one(), one(), one()], Cost::Finite(int(10)));
        assert_eq!(r.margin, Some(int(7)));
        assert!(r.holds);
        assert!(!compare_costs([Cost::Infinite, one(), one()], Cost::Infinite).holds);
    }

    #[test]
    fn found_and_verified() {
        let s = bob_nice(false);
        let objects = alloc::vec![s.x.clone(), s.y.clone()];
        let morphisms = alloc::vec![Morphism {
            from: 0,
            to: 1,
            map: s.f.clone()
        }];
        let out = nat_trans_search(
            &s.system,
            INFERENCE,
            EVOLUTION,
            &objects,
            &morphisms,
            DEFAULT_NAT_TRANS_BOUND,
        )
        .unwrap();
        let NatTransOutcome::Found(nt) = out else {
            panic!("{out:?}")
        };
        assert!(verify_naturality(
            &s.system, INFERENCE, EVOLUTION, &objects, &morphisms, &nt
        ));
        // The long chain must fold onto the single evolution step.
        assert_eq!(nt.cost, int(2));
        assert_eq!(
            nat_trans_search(&s.system, INFERENCE, EVOLUTION, &objects, &morphisms, 1).unwrap(),
            NatTransOutcome::UndecidedAtScale
        );
    }

    #[test]
    fn certificate_names_the_morphism() {
        let mut sys = TransitionSystem::new();
        let a = || Cause::Process("A".into());
        let b = || Cause::Process("B".into());
        let free = Budget::default;
        let tx = sys.add_transition("u", "v", Cause::Exogenous, free());
        let ty = sys.add_transition("p", "q", Cause::Exogenous, free());
        sys.add_transition("u", "m", a(), free());
        sys.add_transition("m", "v", a(), free());
        sys.add_transition("p", "q", a(), free());
        sys.add_transition("u", "v", b(), free());
        sys.add_transition("p", "q", b(), free());
        let x = sys.subsystem(&[tx], &[]);
        let y = sys.subsystem(&[ty], &[]);
        let map =
            [("u", "p"), ("v", "q")].map(|(s, t)| (sys.state(s).unwrap(), sys.state(t).unwrap()));
        let morphisms = alloc::vec![Morphism {
            from: 0,
            to: 1,
            map: map.into_iter().collect()
        }];
        let out =
            nat_trans_search(&sys, "A", "B", &[x, y], &morphisms, DEFAULT_NAT_TRANS_BOUND).unwrap();
        // A's two-step chain has no positional image in its one-step chain.
        assert_eq!(
            out,
            NatTransOutcome::None(Certificate::FunctorUndefined { morphism: 0 })
        );
    }
}
