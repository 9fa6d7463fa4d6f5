//! The BobNice diagrams, rendered as text.

use std::fmt::Write;

use cogsyn_core::hypergraph::Hypergraph;
use cogsyn_core::rational::to_pq;
use cogsyn_core::synergy::{
    bob_nice, commutation_cost_compare, functor_project, nat_trans_search, verify_naturality,
    CostComparison, Morphism, NatTransOutcome, SynergyError, TransitionSystem,
    DEFAULT_NAT_TRANS_BOUND,
};

pub use cogsyn_core::synergy::{EVOLUTION, INFERENCE};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemoReport {
    pub text: String,
    pub comparison: CostComparison,
    pub outcome: NatTransOutcome,
    /// The found transformation passed the independent check.
    pub verified: bool,
}

fn render(sys: &TransitionSystem, g: &Hypergraph) -> String {
    let mut parts = Vec::new();
    for l in g.links() {
        let t = l.targets();
        let name = |i: usize| sys.state_name(t[i]).unwrap_or("?");
        let cause = sys.cause(l.id()).map(|c| c.to_string()).unwrap_or_default();
        let cost = sys.cost(l.id()).map(|c| to_pq(&c)).unwrap_or_default();
        parts.push(format!("{} -> {} [{cause}, {cost}]", name(0), name(1)));
    }
    if parts.is_empty() {
        "(no transitions)".into()
    } else {
        parts.join("; ")
    }
}

pub fn demo_diagrams(equal_costs: bool) -> Result<DemoReport, SynergyError> {
    let s = bob_nice(equal_costs);
    let sys = &s.system;
    let mut text = String::new();
    let mode = if equal_costs {
        "equal costs"
    } else {
        "shipped costs"
    };
    writeln!(text, "BobNice diagrams ({mode})").expect("string write");
    writeln!(text, "X: {}", render(sys, &s.x)).expect("string write");
    writeln!(text, "Y: {}", render(sys, &s.y)).expect("string write");
    for p in [INFERENCE, EVOLUTION] {
        for (name, obj) in [("X", &s.x), ("Y", &s.y)] {
            let fp = functor_project(sys, obj, p)?;
            writeln!(
                text,
                "F_{p}({name}) = {} | cost {}",
                render(sys, &fp.graph),
                fp.cost
            )
            .expect("string write");
        }
    }
    let c = commutation_cost_compare(sys, INFERENCE, EVOLUTION, &s.x, &s.y, &s.f)?;
    writeln!(
        text,
        "legs: eta_X = {}, F_{EVOLUTION}(f) = {}, eta'_Y = {}",
        c.legs[0], c.legs[1], c.legs[2]
    )
    .expect("string write");
    let margin = c.margin.as_ref().map(to_pq).unwrap_or_else(|| "n/a".into());
    writeln!(
        text,
        "indirect = {}, direct F_{INFERENCE}(f) = {}, indirect < direct: {}, margin {margin}",
        c.indirect, c.direct, c.holds
    )
    .expect("string write");
    let objects = vec![s.x.clone(), s.y.clone()];
    let morphisms = vec![Morphism {
        from: 0,
        to: 1,
        map: s.f.clone(),
    }];
    let outcome = nat_trans_search(
        sys,
        INFERENCE,
        EVOLUTION,
        &objects,
        &morphisms,
        DEFAULT_NAT_TRANS_BOUND,
    )?;
    let verified = match &outcome {
        NatTransOutcome::Found(nt) => {
            let ok = verify_naturality(sys, INFERENCE, EVOLUTION, &objects, &morphisms, nt);
            writeln!(text, "natural transformation {INFERENCE} => {EVOLUTION}: found, cost {}, squares verified: {ok}", to_pq(&nt.cost))
                .expect("string write");
            ok
        }
        NatTransOutcome::None(cert) => {
            writeln!(
                text,
                "natural transformation {INFERENCE} => {EVOLUTION}: none ({cert:?})"
            )
            .expect("string write");
            false
        }
        NatTransOutcome::UndecidedAtScale => {
            writeln!(
                text,
                "natural transformation {INFERENCE} => {EVOLUTION}: undecided at this scale"
            )
            .expect("string write");
            false
        }
    };
    Ok(DemoReport {
        text,
        comparison: c,
        outcome,
        verified,
    })
}
