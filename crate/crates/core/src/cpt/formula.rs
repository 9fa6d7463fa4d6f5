use alloc::string::String;
use alloc::vec::Vec;

use super::{BudgetRange, CatalogPattern, CptError, DegreeRange, EpisodeStore, Interval};
use crate::rational::{int, mean, one, ratio, zero};
use crate::Rational;

/// A conditional average with the evidence mass behind it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Estimate {
    /// `None` when the evidence mass is zero.
    pub value: Option<Rational>,
    pub mass: Rational,
    pub confidence: Rational,
}

impl Estimate {
    fn from_sums(num: Rational, den: Rational, k: &Rational) -> Self {
        let confidence = confidence_of_g(&den, k);
        let value = (den > zero()).then(|| num / &den);
        Estimate {
            value,
            mass: den,
            confidence,
        }
    }
}

/// `f(x) = x / (x + k)`: 0 at 0, increasing, below 1.
pub fn confidence_of_g(mass: &Rational, k: &Rational) -> Rational {
    if *mass <= zero() {
        return zero();
    }
    mass / (mass + k)
}

/// `g(P)`: goal achievement weighted by how strongly `P` is displayed, over
/// every stored situation and every interval of `window`.
pub fn g_global(
    store: &EpisodeStore,
    p: &CatalogPattern,
    window: &[Interval],
    k: &Rational,
) -> Result<Estimate, CptError> {
    let (mut num, mut den) = (zero(), zero());
    for e in store.episodes() {
        for i in window {
            let (Some(pd), Some(g)) = (e.pattern_degree(p, *i), e.goal_degree(&store.goals, *i)?)
            else {
                continue;
            };
            num += g * &pd;
            den += pd;
        }
    }
    Ok(Estimate::from_sums(num, den, k))
}

/// Stored continuations of `(situation, t)`: every episode whose pattern
/// profile at tick `t` equals the situation's, each equally likely.
pub fn continuations(
    store: &EpisodeStore,
    situation: &str,
    t: u64,
) -> Result<Vec<(String, Rational)>, CptError> {
    let here = store
        .episode(situation)
        .ok_or_else(|| CptError::UnknownSituation(situation.into()))?;
    let Some(now) = here.at_tick(t) else {
        return Ok(Vec::new());
    };
    let matching: Vec<String> = store
        .episodes()
        .filter(|e| e.at_tick(t).is_some_and(|s| s.degrees == now.degrees))
        .map(|e| e.situation.clone())
        .collect();
    let n = matching.len() as i64;
    Ok(matching.into_iter().map(|s| (s, ratio(1, n))).collect())
}

/// `g_{S,I_S,𝓘}(P)`. The window defaults to the five unit intervals after
/// `i_s`; continuations branch at the end of `i_s`.
pub fn g_conditional(
    store: &EpisodeStore,
    p: &CatalogPattern,
    situation: &str,
    i_s: Interval,
    window: Option<&[Interval]>,
    k: &Rational,
) -> Result<Estimate, CptError> {
    let default = i_s.next_units(5);
    let window = window.unwrap_or(&default);
    let (mut num, mut den) = (zero(), zero());
    for (s, prob) in continuations(store, situation, i_s.end)? {
        let e = store.episode(&s).expect("listed");
        for i in window {
            let (Some(pd), Some(g)) = (e.pattern_degree(p, *i), e.goal_degree(&store.goals, *i)?)
            else {
                continue;
            };
            let w = pd * &prob;
            num += g * &w;
            den += w;
        }
    }
    Ok(Estimate::from_sums(num, den, k))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Efficacy {
    /// Fraction of trials landing in the degree range; `None` without trials.
    pub value: Option<Rational>,
    pub trials: u64,
    pub confidence: Rational,
}

/// `e_{C,I_R,S,I_S}(P, I, I_P)`. A trial is a transition caused by
/// `process` at the end tick of `i_s`, from a state with the same pattern
/// profile as the situation's, costing a budget inside `i_r`. It succeeds
/// when its episode displays `p` to a degree in `i_p` over `i`.
#[allow(clippy::too_many_arguments)]
pub fn action_efficacy(
    store: &EpisodeStore,
    process: &str,
    i_r: &BudgetRange,
    situation: &str,
    i_s: Interval,
    p: &CatalogPattern,
    i: Interval,
    i_p: &DegreeRange,
    k: &Rational,
) -> Result<Efficacy, CptError> {
    let here = store
        .episode(situation)
        .ok_or_else(|| CptError::UnknownSituation(situation.into()))?;
    let t = i_s.end;
    let Some(now) = here.at_tick(t) else {
        return Ok(Efficacy {
            value: None,
            trials: 0,
            confidence: zero(),
        });
    };
    let (mut trials, mut hits) = (0u64, 0u64);
    for e in store.episodes() {
        for tr in &e.transitions {
            if !tr.caused_by(process) || tr.interval.start != t || !i_r.contains(&tr.cost) {
                continue;
            }
            if e.snapshot(tr.from).is_none_or(|s| s.degrees != now.degrees) {
                continue;
            }
            trials += 1;
            if e.pattern_degree(p, i).is_some_and(|d| i_p.contains(&d)) {
                hits += 1;
            }
        }
    }
    let confidence = confidence_of_g(&int(trials as i64), k);
    let value = (trials > 0).then(|| ratio(hits as i64, trials as i64));
    Ok(Efficacy {
        value,
        trials,
        confidence,
    })
}

/// `e_{C,I_R,S,𝓘}`: [`action_efficacy`] averaged over the window (the value
/// over intervals where it is defined, the confidence over all of them).
#[allow(clippy::too_many_arguments)]
pub fn action_efficacy_averaged(
    store: &EpisodeStore,
    process: &str,
    i_r: &BudgetRange,
    situation: &str,
    i_s: Interval,
    p: &CatalogPattern,
    window: &[Interval],
    i_p: &DegreeRange,
    k: &Rational,
) -> Result<Efficacy, CptError> {
    let mut values = Vec::new();
    let mut confs = Vec::new();
    let mut trials = 0;
    for i in window {
        let e = action_efficacy(store, process, i_r, situation, i_s, p, *i, i_p, k)?;
        values.extend(e.value);
        confs.push(e.confidence);
        trials = trials.max(e.trials);
    }
    Ok(Efficacy {
        value: mean(&values),
        trials,
        confidence: mean(&confs).unwrap_or_else(zero),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StuckParams {
    /// Number of unit intervals after `I_S` forming the window.
    pub window_len: u64,
    pub k: Rational,
    pub i_r: BudgetRange,
    pub i_p: DegreeRange,
}

impl Default for StuckParams {
    fn default() -> Self {
        StuckParams {
            window_len: 5,
            k: one(),
            i_r: BudgetRange::up_to(int(1_000_000)),
            i_p: DegreeRange::new(ratio(9, 10), one()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StuckReport {
    pub conf: Rational,
    pub stuck: Rational,
    pub argmax: Option<String>,
    /// `g`, `c_g`, `e`, `c_e` of the argmax pattern.
    pub factors: Option<[Rational; 4]>,
    /// Set when there were no candidate patterns.
    pub no_candidates: bool,
}

/// `conf = max_P g·c_g·e·c_e` over `candidates`, with null factors as 0 and
/// ties going to the smallest key; `stuck = 1 − conf`.
pub fn conf_and_stuckness(
    store: &EpisodeStore,
    process: &str,
    situation: &str,
    i_s: Interval,
    candidates: &[CatalogPattern],
    params: &StuckParams,
) -> Result<StuckReport, CptError> {
    if candidates.is_empty() {
        return Ok(StuckReport {
            conf: zero(),
            stuck: one(),
            argmax: None,
            factors: None,
            no_candidates: true,
        });
    }
    let window = i_s.next_units(params.window_len);
    let mut order: Vec<&CatalogPattern> = candidates.iter().collect();
    order.sort_by(|a, b| a.key.cmp(&b.key));
    let mut best: Option<(Rational, &CatalogPattern, [Rational; 4])> = None;
    for p in order {
        let g = g_conditional(store, p, situation, i_s, Some(&window), &params.k)?;
        let e = action_efficacy_averaged(
            store,
            process,
            &params.i_r,
            situation,
            i_s,
            p,
            &window,
            &params.i_p,
            &params.k,
        )?;
        let factors = [
            g.value.unwrap_or_else(zero),
            g.confidence,
            e.value.unwrap_or_else(zero),
            e.confidence,
        ];
        let product = factors.iter().fold(one(), |acc, f| acc * f);
        if best.as_ref().is_none_or(|(b, _, _)| product > *b) {
            best = Some((product, p, factors));
        }
    }
    let (conf, p, factors) = best.expect("non-empty");
    Ok(StuckReport {
        stuck: one() - &conf,
        conf,
        argmax: Some(p.key.clone()),
        factors: Some(factors),
        no_candidates: false,
    })
}
