//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Every generator is seeded; tolerances are below.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cogsyn::demo::demo_diagrams;
use cogsyn::manifest::{verify, write_run, Manifest, MANIFEST};
use cogsyn::run::{execute, RunOptions};
use cogsyn::scenario::load;
use cogsyn::BUNDLED;
use cogsyn_core::cpt::{
    action_efficacy, action_efficacy_averaged, conf_and_stuckness, confidence_of_g, continuations,
    extract_cpt, g_conditional, g_global, meta_graph, pgmc_choose, sample_by_fitness, Budget,
    BudgetRange, CatalogPattern, Cause, DegreeRange, Episode, EpisodeStore, GoalDegree, GoalSpec,
    Interval, StuckParams, SystemState, Transition,
};
use cogsyn_core::heyting::{
    exponent_over, join, join_with_maps, meet, product, CountingFunctional, ProbabilityFunctional,
    Signature, DEFAULT_EXPONENT_CAP,
};
use cogsyn_core::hypergraph::{
    canonical_form, count_homomorphisms, find_homomorphisms, is_isomorphic, match_pattern, AtomId,
    HPattern, HomSearch, Hypergraph, VARIABLE,
};
use cogsyn_core::rational::{int, one, parse_pq, ratio, to_f64, zero};
use cogsyn_core::rng::{derive_seed, Rng};
use cogsyn_core::synergy::{
    cog_syn, hom_iso_census, stuck_table, transition_functional, CensusBounds, NatTransOutcome,
    Partition, Weights,
};
use cogsyn_core::Rational;

/// Pinned synergy index of the bundled complementary pair.
const COMPLEMENTARY_PAIR_VALUE: &str = "97/600";
/// Monte Carlo agreement, in standard errors.
const MC_SIGMAS: f64 = 3.0;
/// Sampler frequency agreement, in binomial standard deviations.
const SAMPLER_SIGMAS: f64 = 3.0;
const MATCHER_BUDGET: Duration = Duration::from_secs(60);
const HEYTING_BUDGET: Duration = Duration::from_secs(300);

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// Brute-force oracles over hypergraphs.

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Node(AtomId),
    Link(Option<String>, Vec<Key>),
}

/// Structural key of every atom, with nodes renamed by `rename`.
fn keys_under(g: &Hypergraph, rename: &BTreeMap<AtomId, AtomId>) -> BTreeMap<AtomId, Key> {
    let mut out = BTreeMap::new();
    for n in g.nodes() {
        out.insert(
            n.id(),
            Key::Node(rename.get(&n.id()).copied().unwrap_or(n.id())),
        );
    }
    for l in g.links_topological() {
        let a = g.atom(l).unwrap();
        let k = Key::Link(
            a.type_name().map(String::from),
            a.targets().iter().map(|t| out[t].clone()).collect(),
        );
        out.insert(l, k);
    }
    out
}

fn link_keys(g: &Hypergraph, rename: &BTreeMap<AtomId, AtomId>) -> BTreeSet<Key> {
    let keys = keys_under(g, rename);
    g.links().map(|l| keys[&l.id()].clone()).collect()
}

/// Every node map `src → dst` accepted by `node_ok`.
fn all_maps(
    src: &Hypergraph,
    dst: &Hypergraph,
    node_ok: &dyn Fn(AtomId, AtomId) -> bool,
) -> Vec<BTreeMap<AtomId, AtomId>> {
    let sn = src.node_ids();
    let dn = dst.node_ids();
    let mut out = Vec::new();
    if sn.is_empty() {
        out.push(BTreeMap::new());
        return out;
    }
    if dn.is_empty() {
        return out;
    }
    let mut idx = vec![0usize; sn.len()];
    loop {
        let m: BTreeMap<AtomId, AtomId> = sn.iter().zip(&idx).map(|(s, i)| (*s, dn[*i])).collect();
        if m.iter().all(|(s, d)| node_ok(*s, *d)) {
            out.push(m);
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < dn.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn oracle_homs(
    src: &Hypergraph,
    dst: &Hypergraph,
    variables: bool,
) -> BTreeSet<BTreeMap<AtomId, AtomId>> {
    let dst_keys = link_keys(dst, &BTreeMap::new());
    let ok = |s: AtomId, d: AtomId| {
        let st = src.type_of(s);
        (variables && st == Some(VARIABLE)) || st == dst.type_of(d)
    };
    all_maps(src, dst, &ok)
        .into_iter()
        .filter(|m| link_keys(src, m).is_subset(&dst_keys))
        .collect()
}

fn oracle_isos(a: &Hypergraph, b: &Hypergraph) -> BTreeSet<BTreeMap<AtomId, AtomId>> {
    if a.node_count() != b.node_count() {
        return BTreeSet::new();
    }
    let b_keys = link_keys(b, &BTreeMap::new());
    let ok = |s: AtomId, d: AtomId| a.type_of(s) == b.type_of(d);
    all_maps(a, b, &ok)
        .into_iter()
        .filter(|m| m.values().collect::<BTreeSet<_>>().len() == m.len())
        .filter(|m| link_keys(a, m) == b_keys)
        .collect()
}

fn random_graph(
    rng: &mut Rng,
    max_atoms: u64,
    node_types: &[&str],
    link_types: &[&str],
) -> Hypergraph {
    let mut g = Hypergraph::new();
    let nodes = 1 + rng.below(3.min(max_atoms));
    for _ in 0..nodes {
        let t = rng.below(node_types.len() as u64 + 1) as usize;
        if t == node_types.len() {
            g.add_node(None);
        } else {
            g.add_typed_node(node_types[t]);
        }
    }
    let links = rng.below(max_atoms - nodes + 1);
    for _ in 0..links {
        let atoms: Vec<AtomId> = g.atoms().map(|a| a.id()).collect();
        let arity = 1 + rng.below(2);
        let targets: Vec<AtomId> = (0..arity)
            .map(|_| atoms[rng.below(atoms.len() as u64) as usize])
            .collect();
        let ty = link_types[rng.below(link_types.len() as u64) as usize];
        g.add_typed_link(ty, &targets).unwrap();
    }
    g
}

/// Isomorphic copy with nodes inserted in a shuffled order.
fn shuffled_copy(g: &Hypergraph, rng: &mut Rng) -> Hypergraph {
    let mut nodes = g.node_ids();
    for i in (1..nodes.len()).rev() {
        nodes.swap(i, rng.below(i as u64 + 1) as usize);
    }
    let mut out = Hypergraph::new();
    let mut map = BTreeMap::new();
    for n in nodes {
        map.insert(n, out.add_node(g.atom(n).unwrap().label().cloned()));
    }
    for l in g.links_topological() {
        let a = g.atom(l).unwrap();
        let targets = a.targets().iter().map(|t| map[t]).collect();
        map.insert(l, out.add_link(targets, a.label().cloned()).unwrap());
    }
    out
}

fn random_pattern(rng: &mut Rng) -> Hypergraph {
    let mut p = Hypergraph::new();
    let vars = 1 + rng.below(3);
    let mut nodes: Vec<AtomId> = (0..vars).map(|_| p.add_typed_node(VARIABLE)).collect();
    if rng.below(2) == 0 {
        nodes.push(p.add_typed_node(["s", "t"][rng.below(2) as usize]));
    }
    for _ in 0..rng.below(3) {
        let arity = 1 + rng.below(2);
        let targets: Vec<AtomId> = (0..arity)
            .map(|_| nodes[rng.below(nodes.len() as u64) as usize])
            .collect();
        p.add_typed_link(["e", "f"][rng.below(2) as usize], &targets)
            .unwrap();
    }
    p
}

fn criterion_matcher() -> Check {
    let start = Instant::now();
    let mut rng = Rng::new(0x6d61_7463);
    let (mut hom_pairs, mut iso_pos, mut bindings) = (0usize, 0usize, 0usize);
    for case in 0..500 {
        let g = random_graph(&mut rng, 5, &["s", "t"], &["e", "f"]);
        let h = random_graph(&mut rng, 5, &["s", "t"], &["e", "f"]);
        let perm = shuffled_copy(&g, &mut rng);
        for (src, dst) in [(&g, &h), (&h, &g), (&g, &perm), (&g, &g)] {
            let want = oracle_homs(src, dst, false);
            let got: BTreeSet<_> = find_homomorphisms(src, dst, &HomSearch::default())
                .homs
                .into_iter()
                .map(|x| x.vertex_map)
                .collect();
            ensure(got == want, || {
                format!(
                    "case {case}: homomorphism sets differ ({} vs {})",
                    got.len(),
                    want.len()
                )
            })?;
            ensure(count_homomorphisms(src, dst) == want.len() as u64, || {
                format!("case {case}: hom count")
            })?;
            hom_pairs += want.len();
            let isos = oracle_isos(src, dst);
            match is_isomorphic(src, dst) {
                Some(m) => {
                    ensure(isos.contains(&m), || {
                        format!("case {case}: reported isomorphism is not one")
                    })?;
                    iso_pos += 1;
                }
                None => ensure(isos.is_empty(), || {
                    format!("case {case}: missed isomorphism")
                })?,
            }
        }
        let p = random_pattern(&mut rng);
        for target in [&g, &h] {
            let want = oracle_homs(&p, target, true);
            let got: BTreeSet<_> = match_pattern(&HPattern::Atomic(p.clone()), target)
                .map_err(|e| e.to_string())?
                .into_iter()
                .map(|b| b.0)
                .collect();
            ensure(got == want, || {
                format!(
                    "case {case}: pattern bindings differ ({} vs {})",
                    got.len(),
                    want.len()
                )
            })?;
            bindings += want.len();
        }
    }
    let t = start.elapsed();
    ensure(t < MATCHER_BUDGET, || format!("took {t:?}"))?;
    Ok(format!(
        "500 cases, {hom_pairs} homs, {iso_pos} isomorphic pairs, {bindings} bindings, {t:.1?}"
    ))
}

// ---------------------------------------------------------------------------
// Heyting laws on label-uniform digraphs with at most three nodes.

/// Digraph on at most 32 nodes as bitmask adjacency.
struct Dg {
    n: usize,
    out: Vec<u32>,
    inn: Vec<u32>,
    loops: u32,
}

impl Dg {
    fn of(g: &Hypergraph) -> Dg {
        let nodes = g.node_ids();
        assert!(nodes.len() <= 32);
        let pos: BTreeMap<AtomId, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let mut d = Dg {
            n: nodes.len(),
            out: vec![0; nodes.len()],
            inn: vec![0; nodes.len()],
            loops: 0,
        };
        for l in g.links() {
            let t = l.targets();
            assert_eq!(t.len(), 2, "binary links only");
            let (a, b) = (pos[&t[0]], pos[&t[1]]);
            d.out[a] |= 1 << b;
            d.inn[b] |= 1 << a;
            if a == b {
                d.loops |= 1 << a;
            }
        }
        d
    }

    fn all(&self) -> u32 {
        if self.n == 32 {
            u32::MAX
        } else {
            (1u32 << self.n) - 1
        }
    }
}

fn count_dg_homs(g: &Dg, h: &Dg) -> u64 {
    fn rec(k: usize, g: &Dg, h: &Dg, img: &mut [usize; 32]) -> u64 {
        let mut cand = h.all();
        if g.loops >> k & 1 == 1 {
            cand &= h.loops;
        }
        for (j, &to) in img.iter().enumerate().take(k) {
            if g.out[j] >> k & 1 == 1 {
                cand &= h.out[to];
            }
            if g.out[k] >> j & 1 == 1 {
                cand &= h.inn[to];
            }
        }
        if k + 1 == g.n {
            return u64::from(cand.count_ones());
        }
        let mut total = 0;
        while cand != 0 {
            let v = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            img[k] = v;
            total += rec(k + 1, g, h, img);
        }
        total
    }
    if g.n == 0 {
        return 1;
    }
    rec(0, g, h, &mut [0; 32])
}

fn permute_mask(n: usize, mask: u32, perm: &[usize]) -> u32 {
    let mut out = 0;
    for i in 0..n {
        for j in 0..n {
            if mask >> (i * n + j) & 1 == 1 {
                out |= 1 << (perm[i] * n + perm[j]);
            }
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// One representative per isomorphism class, by minimal adjacency mask.
fn uniform_classes(max_nodes: usize) -> Vec<Hypergraph> {
    let mut out = Vec::new();
    for n in 0..=max_nodes {
        let perms = permutations(n);
        let mut reps = BTreeSet::new();
        for mask in 0..(1u32 << (n * n)) {
            let rep = perms
                .iter()
                .map(|p| permute_mask(n, mask, p))
                .min()
                .unwrap();
            reps.insert(rep);
        }
        for mask in reps {
            let mut g = Hypergraph::new();
            let ids: Vec<AtomId> = (0..n).map(|_| g.add_typed_node("s")).collect();
            for i in 0..n {
                for j in 0..n {
                    if mask >> (i * n + j) & 1 == 1 {
                        g.add_typed_link("e", &[ids[i], ids[j]]).unwrap();
                    }
                }
            }
            out.push(g);
        }
    }
    out
}

fn same_class(x: &Hypergraph, y: &Hypergraph) -> Result<bool, String> {
    if x == y {
        return Ok(true);
    }
    let (cx, cy) = (
        canonical_form(x).map_err(|e| e.to_string())?,
        canonical_form(y).map_err(|e| e.to_string())?,
    );
    Ok(cx == cy)
}

fn criterion_heyting() -> Check {
    let start = Instant::now();
    let classes = uniform_classes(3);
    let sizes: Vec<usize> = (0..=3)
        .map(|n| classes.iter().filter(|g| g.node_count() == n).count())
        .collect();
    ensure(sizes == [1, 2, 10, 104], || {
        format!("class counts {sizes:?}")
    })?;
    let n = classes.len();

    for (i, a) in classes.iter().enumerate() {
        for b in &classes[i..] {
            ensure(same_class(&join(a, b), &join(b, a))?, || {
                "join not commutative".into()
            })?;
            ensure(same_class(&meet(a, b), &meet(b, a))?, || {
                "meet not commutative".into()
            })?;
        }
    }

    let small: Vec<&Hypergraph> = classes.iter().filter(|g| g.node_count() <= 2).collect();
    let assoc = |a: &Hypergraph, b: &Hypergraph, c: &Hypergraph| -> Result<(), String> {
        ensure(
            same_class(&join(&join(a, b), c), &join(a, &join(b, c)))?,
            || "join not associative".into(),
        )?;
        ensure(
            same_class(&meet(&meet(a, b), c), &meet(a, &meet(b, c)))?,
            || "meet not associative".into(),
        )
    };
    for a in &small {
        for b in &small {
            for c in &small {
                assoc(a, b, c)?;
            }
        }
    }
    let mut rng = Rng::new(0x6173_736f);
    const SAMPLED_TRIPLES: usize = 10_000;
    for _ in 0..SAMPLED_TRIPLES {
        let mut pick = || &classes[rng.below(n as u64) as usize];
        let (a, b, c) = (pick(), pick(), pick());
        assoc(a, b, c)?;
    }

    let meets: Vec<Vec<Dg>> = classes
        .iter()
        .map(|c| classes.iter().map(|b| Dg::of(&meet(c, b))).collect())
        .collect();
    let plain: Vec<Dg> = classes.iter().map(Dg::of).collect();
    let signature = Signature::uniform("s", "e", 2);
    let mut triples = 0u64;
    for (ai, a) in classes.iter().enumerate() {
        for (bi, b) in classes.iter().enumerate() {
            let e =
                exponent_over(a, b, &signature, DEFAULT_EXPONENT_CAP).map_err(|e| e.to_string())?;
            let ed = Dg::of(&e.graph);
            for ci in 0..n {
                let lhs = count_dg_homs(&meets[ci][bi], &plain[ai]);
                let rhs = count_dg_homs(&plain[ci], &ed);
                ensure(lhs == rhs, || {
                    format!("adjunction fails: classes C={ci} B={bi} A={ai}: {lhs} vs {rhs}")
                })?;
                triples += 1;
            }
        }
    }
    // The bitmask counter itself agrees with the library on a sample.
    for i in (0..n).step_by(7) {
        for j in (0..n).step_by(11) {
            let m = meet(&classes[i], &classes[j]);
            ensure(
                count_dg_homs(&Dg::of(&m), &plain[j]) == count_homomorphisms(&m, &classes[j]),
                || "bitmask counter disagrees with count_homomorphisms".into(),
            )?;
        }
    }
    let t = start.elapsed();
    ensure(t < HEYTING_BUDGET, || format!("took {t:?}"))?;
    Ok(format!(
        "{n} classes; commutativity on {} pairs; associativity on {} small + {SAMPLED_TRIPLES} sampled triples; adjunction on {triples} triples, {t:.1?}",
        n * (n + 1) / 2,
        small.len().pow(3)
    ))
}

// ---------------------------------------------------------------------------
// Probability functional.

fn transition_graph(rng: &mut Rng, alphabet: [&str; 2], nodes: u64, links: u64) -> Hypergraph {
    let mut g = Hypergraph::new();
    let ids: Vec<AtomId> = (0..nodes)
        .map(|_| g.add_typed_node(alphabet[rng.below(2) as usize]))
        .collect();
    let mut seen = BTreeSet::new();
    for _ in 0..links {
        let pair = (
            ids[rng.below(nodes) as usize],
            ids[rng.below(nodes) as usize],
        );
        let ty = if rng.below(4) == 0 {
            "other"
        } else {
            "transition"
        };
        if seen.insert((ty, pair)) {
            g.add_typed_link(ty, &[pair.0, pair.1]).unwrap();
        }
    }
    g
}

fn random_sub(rng: &mut Rng, g: &Hypergraph, ids: &[AtomId]) -> Hypergraph {
    let chosen: Vec<AtomId> = ids.iter().copied().filter(|_| rng.below(2) == 0).collect();
    g.closure_of(chosen)
}

fn criterion_probability() -> Check {
    let mut rng = Rng::new(0x7072_6f62);
    let functionals = [
        CountingFunctional::link("transition"),
        CountingFunctional::point(),
    ];
    for case in 0..50 {
        let f = &functionals[case % 2];
        let nodes = 2 + rng.below(4);
        let links = 1 + rng.below(6);
        let g1 = transition_graph(&mut rng, ["a", "b"], nodes, links);
        let nodes = 2 + rng.below(4);
        let links = 1 + rng.below(6);
        let g2 = transition_graph(&mut rng, ["c", "d"], nodes, links);
        let (amb, left, right) = join_with_maps(&g1, &g2);
        let s1 = random_sub(&mut rng, &amb, &left.values().copied().collect::<Vec<_>>());
        let s2 = random_sub(&mut rng, &amb, &right.values().copied().collect::<Vec<_>>());
        let whole = f.prob(&s1.union(&s2), &amb).value;
        let parts = f.prob(&s1, &amb).value + f.prob(&s2, &amb).value;
        ensure(whole == parts, || {
            format!("additivity case {case}: {whole} vs {parts}")
        })?;
    }
    for case in 0..50 {
        let f = &functionals[case % 2];
        let nodes = 2 + rng.below(3);
        let links = 1 + rng.below(5);
        let a1 = transition_graph(&mut rng, ["a", "b"], nodes, links);
        let nodes = 2 + rng.below(3);
        let links = 1 + rng.below(5);
        let a2 = transition_graph(&mut rng, ["c", "d"], nodes, links);
        let s1 = random_sub(
            &mut rng,
            &a1,
            &a1.atoms().map(|x| x.id()).collect::<Vec<_>>(),
        );
        let s2 = random_sub(
            &mut rng,
            &a2,
            &a2.atoms().map(|x| x.id()).collect::<Vec<_>>(),
        );
        let p = product(&a1, &a2);
        let inside: Vec<AtomId> = s1
            .atoms()
            .flat_map(|x| {
                s2.atoms()
                    .filter_map(|y| p.atom_of.get(&(x.id(), y.id())).copied())
                    .collect::<Vec<_>>()
            })
            .collect();
        let sub = p.graph.closure_of(inside);
        ensure(sub.is_subgraph_of(&p.graph), || {
            format!("multiplicativity case {case}: not a subgraph")
        })?;
        let lhs = f.prob(&sub, &p.graph).value;
        let rhs = f.prob(&s1, &a1).value * f.prob(&s2, &a2).value;
        ensure(lhs == rhs, || {
            format!("multiplicativity case {case}: {lhs} vs {rhs}")
        })?;
    }
    let mut worst: f64 = 0.0;
    for case in 0..20u64 {
        let f = &functionals[(case % 2) as usize];
        let nodes = 4 + rng.below(4);
        let links = 6 + rng.below(8);
        let amb = transition_graph(&mut rng, ["a", "b"], nodes, links);
        let ids: Vec<AtomId> = amb.atoms().map(|x| x.id()).collect();
        let sub = random_sub(&mut rng, &amb, &ids);
        let exact = to_f64(&f.prob(&sub, &amb).value);
        let mc = f
            .monte_carlo(&sub, &amb, 20_000, derive_seed(0x6d63, case))
            .map_err(|e| e.to_string())?;
        let dev = (mc.estimate - exact).abs();
        if mc.stderr == 0.0 {
            ensure(dev == 0.0, || {
                format!(
                    "mc case {case}: {} vs exact {exact} with zero stderr",
                    mc.estimate
                )
            })?;
        } else {
            worst = worst.max(dev / mc.stderr);
            ensure(dev <= MC_SIGMAS * mc.stderr, || {
                format!(
                    "mc case {case}: {} vs exact {exact}, stderr {}",
                    mc.estimate, mc.stderr
                )
            })?;
        }
    }
    Ok(format!(
        "100 exact cases; 20 Monte Carlo cases, worst deviation {worst:.2} stderr"
    ))
}

// ---------------------------------------------------------------------------
// Formula stack, re-derived from raw snapshots.

const PROCESSES: [&str; 2] = ["A", "B"];

fn single(ty: &str) -> CatalogPattern {
    let mut g = Hypergraph::new();
    g.add_typed_node(ty);
    CatalogPattern::new(g).unwrap()
}

fn degree_value(rng: &mut Rng) -> Rational {
    [zero(), ratio(1, 2), one()][rng.below(3) as usize].clone()
}

/// Episodes of `ticks` snapshots over patterns p, q and goal, with one
/// transition per tick caused by A, B or nobody.
fn random_store(rng: &mut Rng, episodes: usize, ticks: u64) -> EpisodeStore {
    let catalog = vec![single("p"), single("q"), single("goal")];
    let goals = vec![
        GoalSpec {
            id: "g".into(),
            weight: int(2),
            degree: GoalDegree::Pattern(catalog[2].key.clone()),
        },
        GoalSpec {
            id: "half".into(),
            weight: one(),
            degree: GoalDegree::Constant(ratio(1, 2)),
        },
    ];
    let mut store = EpisodeStore::new(catalog.clone(), goals);
    for e in 0..episodes {
        let mut ep = Episode::new(&format!("S{e}"));
        for t in 0..ticks {
            let degrees = catalog
                .iter()
                .map(|p| (p.key.clone(), degree_value(rng)))
                .collect();
            ep.snapshots.push(SystemState {
                id: t,
                tick: t,
                degrees,
                memory: None,
            });
        }
        for t in 0..ticks.saturating_sub(1) {
            let cause = match rng.below(3) {
                0 => Cause::Exogenous,
                k => Cause::Process(PROCESSES[k as usize - 1].into()),
            };
            ep.transitions.push(Transition {
                from: t,
                to: t + 1,
                cause,
                probability: one(),
                confidence: one(),
                cost: Budget::new(int(rng.below(2) as i64), int(1 + rng.below(3) as i64)),
                interval: Interval::new(t, t + 1),
            });
        }
        store.ingest(ep).unwrap();
    }
    for p in PROCESSES {
        store.register_process(p);
    }
    store
}

/// Straight-line versions of every quantity, reading only raw snapshot data.
struct Oracle<'a> {
    store: &'a EpisodeStore,
    k: Rational,
}

impl Oracle<'_> {
    fn snaps<'e>(&self, e: &'e Episode, i: Interval) -> Vec<&'e SystemState> {
        e.snapshots
            .iter()
            .filter(|s| s.tick >= i.start && s.tick <= i.end)
            .collect()
    }

    fn pattern(&self, e: &Episode, key: &str, i: Interval) -> Option<Rational> {
        let s = self.snaps(e, i);
        if s.is_empty() {
            return None;
        }
        let sum: Rational = s.iter().map(|x| x.degrees[key].clone()).sum();
        Some(sum / int(s.len() as i64))
    }

    fn goal(&self, e: &Episode, i: Interval) -> Option<Rational> {
        let goal_key = &self.store.catalog[2].key;
        let s = self.snaps(e, i);
        if s.is_empty() {
            return None;
        }
        let sum: Rational = s
            .iter()
            .map(|x| (int(2) * &x.degrees[goal_key] + ratio(1, 2)) / int(3))
            .sum();
        Some(sum / int(s.len() as i64))
    }

    fn conf_of(&self, mass: &Rational) -> Rational {
        if *mass > zero() {
            mass / (mass + &self.k)
        } else {
            zero()
        }
    }

    fn profile_at<'e>(&self, e: &'e Episode, t: u64) -> Option<&'e BTreeMap<String, Rational>> {
        e.snapshots
            .iter()
            .rfind(|s| s.tick == t)
            .map(|s| &s.degrees)
    }

    fn window(t: u64, len: u64) -> Vec<Interval> {
        (1..=len)
            .map(|d| Interval {
                start: t + d,
                end: t + d,
            })
            .collect()
    }

    fn weighted(
        &self,
        weights: &[(&Episode, Rational)],
        key: &str,
        window: &[Interval],
    ) -> (Option<Rational>, Rational) {
        let (mut num, mut den) = (zero(), zero());
        for (e, w) in weights {
            for i in window {
                if let (Some(pd), Some(g)) = (self.pattern(e, key, *i), self.goal(e, *i)) {
                    num += &g * &pd * w;
                    den += pd * w;
                }
            }
        }
        let value = if den > zero() { Some(num / &den) } else { None };
        (value, den)
    }

    fn global(&self, key: &str, window: &[Interval]) -> (Option<Rational>, Rational) {
        let all: Vec<(&Episode, Rational)> = self.store.episodes().map(|e| (e, one())).collect();
        self.weighted(&all, key, window)
    }

    fn followers(&self, s: &str, t: u64) -> Vec<(&Episode, Rational)> {
        let here = self.store.episode(s).unwrap();
        let Some(now) = self.profile_at(here, t) else {
            return Vec::new();
        };
        let same: Vec<&Episode> = self
            .store
            .episodes()
            .filter(|e| self.profile_at(e, t) == Some(now))
            .collect();
        let n = same.len() as i64;
        same.into_iter().map(|e| (e, ratio(1, n))).collect()
    }

    /// (value, trials) at one window interval.
    fn efficacy(
        &self,
        process: &str,
        s: &str,
        t: u64,
        key: &str,
        i: Interval,
        p: &StuckParams,
    ) -> (Option<Rational>, u64) {
        let here = self.store.episode(s).unwrap();
        let Some(now) = self.profile_at(here, t) else {
            return (None, 0);
        };
        let (mut trials, mut hits) = (0u64, 0u64);
        for e in self.store.episodes() {
            for tr in &e.transitions {
                let by = matches!(&tr.cause, Cause::Process(x) if x == process);
                let cost_ok = tr.cost.space >= p.i_r.lo.space
                    && tr.cost.space <= p.i_r.hi.space
                    && tr.cost.time >= p.i_r.lo.time
                    && tr.cost.time <= p.i_r.hi.time;
                let from = e.snapshots.iter().find(|x| x.id == tr.from).unwrap();
                if by && tr.interval.start == t && cost_ok && &from.degrees == now {
                    trials += 1;
                    if self
                        .pattern(e, key, i)
                        .is_some_and(|d| d >= p.i_p.lo && d <= p.i_p.hi)
                    {
                        hits += 1;
                    }
                }
            }
        }
        (
            (trials > 0).then(|| ratio(hits as i64, trials as i64)),
            trials,
        )
    }

    fn stuck(&self, process: &str, s: &str, t: u64, p: &StuckParams) -> (Rational, Option<String>) {
        let window = Self::window(t, p.window_len);
        let followers = self.followers(s, t);
        let mut keys: Vec<&String> = self.store.catalog.iter().map(|c| &c.key).collect();
        keys.sort();
        let mut best: Option<(Rational, String)> = None;
        for key in keys {
            let (g, mass) = self.weighted(&followers, key, &window);
            let cg = self.conf_of(&mass);
            let (mut vals, mut confs) = (Vec::new(), Vec::new());
            for i in &window {
                let (v, n) = self.efficacy(process, s, t, key, *i, p);
                vals.extend(v);
                confs.push(self.conf_of(&int(n as i64)));
            }
            let avg = |xs: &[Rational]| -> Rational {
                if xs.is_empty() {
                    zero()
                } else {
                    xs.iter().cloned().sum::<Rational>() / int(xs.len() as i64)
                }
            };
            let product = g.unwrap_or_else(zero) * cg * avg(&vals) * avg(&confs);
            if best.as_ref().is_none_or(|(b, _)| product > *b) {
                best = Some((product, key.clone()));
            }
        }
        let (conf, key) = best.unwrap();
        (conf, Some(key))
    }
}

fn criterion_formulas() -> Check {
    let mut rng = Rng::new(0x666f_726d);
    let store = random_store(&mut rng, 5, 10);
    ensure(store.snapshot_count() == 50, || "fixture size".into())?;
    let params = StuckParams {
        window_len: 3,
        k: int(2),
        i_r: BudgetRange::up_to(int(2)),
        i_p: DegreeRange::new(ratio(1, 2), one()),
    };
    let oracle = Oracle {
        store: &store,
        k: params.k.clone(),
    };
    let mut compared = 0usize;
    for mass in [zero(), ratio(1, 3), int(4)] {
        ensure(
            confidence_of_g(&mass, &params.k) == oracle.conf_of(&mass),
            || "confidence".into(),
        )?;
        compared += 1;
    }
    for (s, t) in store.situation_ticks() {
        let i_s = Interval::unit(t);
        let window = i_s.next_units(params.window_len);
        ensure(window == Oracle::window(t, params.window_len), || {
            "window".into()
        })?;
        let conts = continuations(&store, &s, t).map_err(|e| e.to_string())?;
        let mine: Vec<(String, Rational)> = oracle
            .followers(&s, t)
            .into_iter()
            .map(|(e, w)| (e.situation.clone(), w))
            .collect();
        ensure(conts == mine, || format!("continuations at {s}@{t}"))?;
        for p in &store.catalog {
            let g = g_global(&store, p, &window, &params.k).map_err(|e| e.to_string())?;
            let (v, mass) = oracle.global(&p.key, &window);
            ensure(
                g.value == v && g.mass == mass && g.confidence == oracle.conf_of(&mass),
                || format!("g_global at {s}@{t}"),
            )?;
            let g = g_conditional(&store, p, &s, i_s, Some(&window), &params.k)
                .map_err(|e| e.to_string())?;
            let (v, mass) = oracle.weighted(&oracle.followers(&s, t), &p.key, &window);
            ensure(
                g.value == v && g.mass == mass && g.confidence == oracle.conf_of(&mass),
                || format!("g_conditional at {s}@{t}"),
            )?;
            for process in PROCESSES {
                for i in &window {
                    let e = action_efficacy(
                        &store,
                        process,
                        &params.i_r,
                        &s,
                        i_s,
                        p,
                        *i,
                        &params.i_p,
                        &params.k,
                    )
                    .map_err(|e| e.to_string())?;
                    let (v, n) = oracle.efficacy(process, &s, t, &p.key, *i, &params);
                    ensure(
                        e.value == v
                            && e.trials == n
                            && e.confidence == oracle.conf_of(&int(n as i64)),
                        || format!("efficacy {process} at {s}@{t}"),
                    )?;
                }
                let avg = action_efficacy_averaged(
                    &store,
                    process,
                    &params.i_r,
                    &s,
                    i_s,
                    p,
                    &window,
                    &params.i_p,
                    &params.k,
                )
                .map_err(|e| e.to_string())?;
                ensure(
                    avg.value
                        .as_ref()
                        .is_none_or(|v| *v >= zero() && *v <= one()),
                    || "averaged efficacy".into(),
                )?;
                compared += 4;
            }
        }
        for process in PROCESSES {
            let r = conf_and_stuckness(&store, process, &s, i_s, &store.catalog, &params)
                .map_err(|e| e.to_string())?;
            let (conf, key) = oracle.stuck(process, &s, t, &params);
            ensure(
                r.conf == conf && r.stuck == one() - &conf && r.argmax == key,
                || format!("conf/stuck {process} at {s}@{t}: {} vs {conf}", r.conf),
            )?;
            compared += 1;
        }
    }
    let mut rng = Rng::new(0x7374_7563);
    let defaults = StuckParams::default();
    let mut stuck_ones = 0;
    for _ in 0..10_000 {
        let episodes = 1 + rng.below(3) as usize;
        let ticks = 2 + rng.below(4);
        let store = random_store(&mut rng, episodes, ticks);
        let sits = store.situation_ticks();
        let (s, t) = &sits[rng.below(sits.len() as u64) as usize];
        let process = PROCESSES[rng.below(2) as usize];
        let r = conf_and_stuckness(
            &store,
            process,
            s,
            Interval::unit(*t),
            &store.catalog,
            &defaults,
        )
        .map_err(|e| e.to_string())?;
        ensure(r.stuck >= zero() && r.stuck <= one(), || {
            format!("stuck {} out of range", r.stuck)
        })?;
        if r.stuck == one() {
            stuck_ones += 1;
        }
    }
    Ok(format!("{compared} exact comparisons on 50 snapshots; 10000 random stores in range ({stuck_ones} fully stuck)"))
}

// ---------------------------------------------------------------------------
// PGMC sampler.

fn criterion_sampler() -> Check {
    let fitness = [ratio(3, 5), ratio(3, 10), ratio(1, 10)];
    let draws = 10_000u64;
    let sample = |seed: u64| -> Vec<u8> {
        let mut rng = Rng::new(seed);
        (0..draws)
            .map(|_| sample_by_fitness(&fitness, &mut rng).unwrap() as u8)
            .collect()
    };
    let seq = sample(0x7067_6d63);
    ensure(seq == sample(0x7067_6d63), || {
        "same seed, different draws".into()
    })?;
    ensure(seq != sample(0x7067_6d64), || "seed ignored".into())?;
    let total: f64 = fitness.iter().map(to_f64).sum();
    let mut worst: f64 = 0.0;
    for (i, f) in fitness.iter().enumerate() {
        let p = to_f64(f) / total;
        let n = seq.iter().filter(|x| **x as usize == i).count() as f64;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        let z = (n - draws as f64 * p).abs() / sigma;
        worst = worst.max(z);
        ensure(z <= SAMPLER_SIGMAS, || {
            format!("action {i}: {n} draws, z = {z:.2}")
        })?;
    }

    let mut rng = Rng::new(5);
    let store = random_store(&mut rng, 4, 6);
    let actions: Vec<String> = PROCESSES.iter().map(|p| p.to_string()).collect();
    let choose = |seed: u64| {
        let mut memory = Hypergraph::new();
        let c = pgmc_choose(
            &store,
            &actions,
            &mut memory,
            &store.catalog,
            "S0",
            Interval::unit(1),
            &StuckParams::default(),
            seed,
        )
        .unwrap();
        (format!("{c:?}"), memory)
    };
    ensure(choose(11) == choose(11), || {
        "pgmc_choose not deterministic".into()
    })?;
    Ok(format!(
        "{draws} draws, worst |z| = {worst:.2}; byte-identical under seed"
    ))
}

// ---------------------------------------------------------------------------
// Synergy index.

fn bundled(name: &str) -> &'static str {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .expect("bundled scenario")
}

fn csv_rows(bytes: &[u8]) -> Vec<BTreeMap<String, String>> {
    let text = std::str::from_utf8(bytes).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    lines
        .map(|l| {
            header
                .iter()
                .zip(l.split(','))
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect()
        })
        .collect()
}

/// Hand enumeration of the triple index from the emitted tables.
fn triple_by_hand(files: &BTreeMap<String, Vec<u8>>, who: [&str; 3], cells: u32) -> Rational {
    let mut stuck: BTreeMap<(String, u64), BTreeMap<String, Rational>> = BTreeMap::new();
    for r in csv_rows(&files["metrics.csv"]) {
        let key = (r["situation"].clone(), r["start"].parse().unwrap());
        stuck
            .entry(key)
            .or_default()
            .insert(r["process"].clone(), parse_pq(&r["stuck"]).unwrap());
    }
    let transitions = csv_rows(&files["transitions.csv"]);
    let n = int(cells as i64);
    let (mut num, mut den) = (zero(), zero());
    for c in 0..cells {
        let (lo, hi) = (int(c as i64) / &n, int(c as i64 + 1) / &n);
        let inside = |x: &Rational| (x > &lo || (c == 0 && x == &lo)) && x <= &hi;
        let mut hit = 0i64;
        for ((s, t), row) in &stuck {
            if who.iter().filter(|p| inside(&row[**p])).count() != 2 {
                continue;
            }
            hit += transitions
                .iter()
                .filter(|r| {
                    &r["situation"] == s
                        && r["start"] == t.to_string()
                        && who.contains(&r["cause"].as_str())
                })
                .count() as i64;
        }
        let w = (&lo + &hi) / int(2);
        num += &w * ratio(hit, transitions.len() as i64);
        den += w;
    }
    num / den
}

fn criterion_synergy() -> Check {
    for (name, text) in BUNDLED {
        let r = load(text).map_err(|e| e.to_string())?;
        let mut store = r
            .world
            .simulate(r.scenario.seed)
            .map_err(|e| e.to_string())?;
        store.goals = r.goals.clone();
        let ids: Vec<String> = r.world.processes.iter().map(|p| p.id.clone()).collect();
        let table =
            stuck_table(&store, &ids, &store.catalog, &r.stuck).map_err(|e| e.to_string())?;
        let meta = meta_graph(&store);
        let f = transition_functional();
        let part = Partition::equispaced(r.scenario.analysis.partition_cells)
            .map_err(|e| e.to_string())?;
        for weights in [Weights::Midpoint, Weights::Uniform] {
            for a in &ids {
                let own =
                    cog_syn(&table, &meta, a, a, &part, &weights, &f).map_err(|e| e.to_string())?;
                ensure(own.value == zero(), || {
                    format!("{name}: cog_syn({a},{a}) = {}", own.value)
                })?;
                for b in &ids {
                    let ab = cog_syn(&table, &meta, a, b, &part, &weights, &f)
                        .map_err(|e| e.to_string())?;
                    let ba = cog_syn(&table, &meta, b, a, &part, &weights, &f)
                        .map_err(|e| e.to_string())?;
                    ensure(ab.value == ba.value, || {
                        format!("{name}: asymmetric for {a},{b}")
                    })?;
                }
            }
        }
    }
    let out = execute(bundled("complementary-pair"), &RunOptions::default())
        .map_err(|e| e.to_string())?;
    let value = cogsyn_core::rational::to_pq(&out.synergy[0].value);
    ensure(value == COMPLEMENTARY_PAIR_VALUE, || {
        format!("complementary-pair = {value}")
    })?;
    let total = csv_rows(&out.files["synergy.csv"])
        .into_iter()
        .find(|r| r["cell"] == "total")
        .unwrap();
    ensure(total["probability"] == COMPLEMENTARY_PAIR_VALUE, || {
        "synergy.csv total row".into()
    })?;

    let out =
        execute(bundled("rotation-triple"), &RunOptions::default()).map_err(|e| e.to_string())?;
    let report = out
        .synergy
        .iter()
        .find(|r| r.processes.len() == 3)
        .ok_or("no triple report")?;
    let cells = out.effective.partition_cells;
    let hand = triple_by_hand(&out.files, ["A", "B", "C"], cells);
    ensure(report.value == hand, || {
        format!("triple {} vs hand {hand}", report.value)
    })?;
    Ok(format!("self = 0 and symmetric on every bundled store; complementary-pair = {value}; triple = {hand} by hand"))
}

// ---------------------------------------------------------------------------
// Conjecture probes.

fn criterion_conjectures() -> Check {
    let shipped = demo_diagrams(false).map_err(|e| e.to_string())?;
    ensure(matches!(shipped.outcome, NatTransOutcome::Found(_)), || {
        format!("{:?}", shipped.outcome)
    })?;
    ensure(shipped.verified, || {
        "components failed the independent check".into()
    })?;
    let c = &shipped.comparison;
    ensure(c.holds && c.indirect < c.direct, || {
        format!("indirect {} vs direct {}", c.indirect, c.direct)
    })?;
    let control = demo_diagrams(true).map_err(|e| e.to_string())?;
    ensure(!control.comparison.holds, || {
        "equal-cost control still holds".into()
    })?;

    let mut rng = Rng::new(0x6365_6e73);
    let bounds = CensusBounds {
        max_links: 2,
        max_subgraphs: 60,
        max_merges: 1,
        hom_budget: 20_000,
    };
    let (mut homs, mut isos) = (0u64, 0u64);
    for case in 0..200 {
        let ticks = 3 + rng.below(3);
        let store = random_store(&mut rng, 2, ticks);
        let meta = meta_graph(&store);
        let whole = Interval::new(0, u64::MAX);
        let a = extract_cpt(&meta, "A", &|_| true, whole).map_err(|e| e.to_string())?;
        let b = extract_cpt(&meta, "B", &|_| true, whole).map_err(|e| e.to_string())?;
        let census = hom_iso_census(&a.graph, &b.graph, &bounds);
        ensure(census.n_hom >= census.n_iso, || {
            format!("case {case}: {census:?}")
        })?;
        homs += census.n_hom;
        isos += census.n_iso;
    }
    Ok(format!(
        "natural transformation verified, indirect {} < direct {}; control fails; census on 200 pairs ({homs} homs >= {isos} isos)",
        c.indirect, c.direct
    ))
}

// ---------------------------------------------------------------------------
// Determinism.

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(
                    path.strip_prefix(root).unwrap().to_path_buf(),
                    std::fs::read(&path).unwrap(),
                );
            }
        }
    }
    out
}

fn criterion_determinism() -> Check {
    let mut files = 0;
    for (name, text) in BUNDLED {
        let first_root = tempfile::tempdir().map_err(|e| e.to_string())?;
        let second_root = tempfile::tempdir().map_err(|e| e.to_string())?;
        let first = execute(text, &RunOptions::default()).map_err(|e| e.to_string())?;
        let first_dir = write_run(&first, first_root.path()).map_err(|e| e.to_string())?;

        let manifest_text =
            std::fs::read_to_string(first_dir.join(MANIFEST)).map_err(|e| e.to_string())?;
        let manifest: Manifest = toml::from_str(&manifest_text).map_err(|e| e.to_string())?;
        let scenario =
            std::fs::read_to_string(first_dir.join("scenario.toml")).map_err(|e| e.to_string())?;
        let opts = manifest.options().map_err(|e| e.to_string())?;
        let second = execute(
            &scenario,
            &RunOptions {
                jobs: Some(2),
                ..opts
            },
        )
        .map_err(|e| e.to_string())?;
        let second_dir = write_run(&second, second_root.path()).map_err(|e| e.to_string())?;

        let (a, b) = (tree(&first_dir), tree(&second_dir));
        ensure(a == b, || format!("{name}: output trees differ"))?;
        for dir in [&first_dir, &second_dir] {
            let report = verify(&dir.join(MANIFEST)).map_err(|e| e.to_string())?;
            ensure(report.ok(), || format!("{name}: verify failed: {report:?}"))?;
        }
        files += a.len();
    }
    Ok(format!(
        "{} scenarios, {files} files byte-identical across runs and verified",
        BUNDLED.len()
    ))
}

type Criterion = (&'static str, fn() -> Check);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 matcher/hom/iso oracles", criterion_matcher),
        ("2 heyting laws", criterion_heyting),
        ("3 probability functional", criterion_probability),
        ("4 formula stack", criterion_formulas),
        ("5 pgmc sampler", criterion_sampler),
        ("6 synergy index", criterion_synergy),
        ("7 conjecture probes", criterion_conjectures),
        ("8 determinism", criterion_determinism),
    ];
    let only: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.contains(o.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS criterion {name} ({t:.1?}): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name} ({t:.1?}): {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
