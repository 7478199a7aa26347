//! Best responses of one player against the others' automaton behaviour.
//!
//! With the opponents fixed, the deviator controls a finite decision process
//! on automaton states. For tail objectives the play almost surely settles in
//! an end component, inside which the deviator can realise any occupation
//! measure; the best value is then an optimal-stopping problem over end
//! component values, solved component by component in reverse topological
//! order.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use super::chain::{exact_payoffs, profile_distribution};
use crate::exact::{self, Rational};
use crate::lp::{Cmp, LinearProgram, LpSolution, Region, Relation};
use crate::model::{Game, MixedAction, Objective, ProfileIndex, StrategyAutomaton};
use crate::values::patterns::{extreme_payoff, intersection_closure, reachable_patterns, FrequencyPolytope};
use crate::values::{exact_mixed, DEFAULT_ENUMERATION_CAP};
use crate::{Error, Result};

/// Largest number of stationary policies enumerated.
pub const POLICY_CAP: usize = 1 << 16;

/// Deviations allowed: free choices at the first `memory_states` reachable
/// states (breadth-first order), the prescribed behaviour elsewhere, and
/// history-dependent choices during the first `horizon` stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DeviationClass {
    pub memory_states: usize,
    pub horizon: usize,
}

impl DeviationClass {
    pub fn full(game: &Game, automaton: &StrategyAutomaton) -> Self {
        DeviationClass {
            memory_states: automaton.n_states(),
            horizon: game.max_horizon(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationMethod {
    MdpExact,
    PolicyEnum,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationReport {
    pub player: usize,
    #[serde(serialize_with = "crate::verify::ser_rational")]
    pub on_path: Rational,
    #[serde(serialize_with = "crate::verify::ser_rational")]
    pub best_value: Rational,
    pub gain: f64,
    pub class: DeviationClass,
    pub method: DeviationMethod,
    pub notes: Vec<String>,
}

/// One way to act at a state: a distribution over the deviator's actions.
#[derive(Clone, Debug)]
struct Choice {
    emit: Vec<(ProfileIndex, Rational)>,
    succ: Vec<(usize, Rational)>,
}

/// Decision process over the automaton states reachable from the start.
struct Mdp {
    states: Vec<usize>,
    choices: Vec<Vec<Choice>>,
}

fn free_states(automaton: &StrategyAutomaton, memory: usize) -> BTreeSet<usize> {
    automaton.reachable().into_iter().take(memory).collect()
}

fn choice_weights(game: &Game, automaton: &StrategyAutomaton, i: usize, s: usize, free: bool) -> Vec<Vec<Rational>> {
    if free {
        (0..game.n_actions(i))
            .map(|a| {
                let mut w = vec![Rational::zero(); game.n_actions(i)];
                w[a] = Rational::one();
                w
            })
            .collect()
    } else {
        vec![exact_mixed(&automaton.emission[s])[i].clone()]
    }
}

fn build_mdp(game: &Game, automaton: &StrategyAutomaton, i: usize, free: &BTreeSet<usize>) -> Mdp {
    let mut index = BTreeMap::from([(automaton.initial, 0usize)]);
    let mut states = vec![automaton.initial];
    let mut raw: Vec<Vec<(Vec<(ProfileIndex, Rational)>, BTreeMap<usize, Rational>)>> = Vec::new();
    let mut queue = VecDeque::from([automaton.initial]);
    while let Some(s) = queue.pop_front() {
        let mut x = exact_mixed(&automaton.emission[s]);
        let mut row = Vec::new();
        for w in choice_weights(game, automaton, i, s, free.contains(&s)) {
            x[i] = w;
            let emit = profile_distribution(game, &x);
            let mut succ: BTreeMap<usize, Rational> = BTreeMap::new();
            for (q, p) in &emit {
                let t = automaton.next(s, *q);
                if !index.contains_key(&t) {
                    index.insert(t, states.len());
                    states.push(t);
                    queue.push_back(t);
                }
                *succ.entry(t).or_insert_with(Rational::zero) += p;
            }
            row.push((emit, succ));
        }
        raw.push(row);
    }
    let choices = raw
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|(emit, succ)| Choice {
                    emit,
                    succ: succ.into_iter().map(|(t, p)| (index[&t], p)).collect(),
                })
                .collect()
        })
        .collect();
    Mdp { states, choices }
}

fn sccs(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut g = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for (a, b) in edges {
        g.add_edge(nodes[a], nodes[b], ());
    }
    tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
            v.sort_unstable();
            v
        })
        .collect()
}

/// Maximal end components with the choices that stay inside each.
fn end_components(mdp: &Mdp) -> Vec<(Vec<usize>, BTreeMap<usize, Vec<usize>>)> {
    let n = mdp.states.len();
    let mut allowed: Vec<Vec<usize>> = mdp.choices.iter().map(|c| (0..c.len()).collect()).collect();
    let mut alive = vec![true; n];
    loop {
        let edges: Vec<(usize, usize)> = (0..n)
            .filter(|&s| alive[s])
            .flat_map(|s| {
                allowed[s]
                    .iter()
                    .flat_map(move |&c| mdp.choices[s][c].succ.iter().map(move |(t, _)| (s, *t)))
                    .collect::<Vec<_>>()
            })
            .collect();
        let comps = sccs(n, edges.into_iter());
        let mut comp = vec![0usize; n];
        for (k, c) in comps.iter().enumerate() {
            for &s in c {
                comp[s] = k;
            }
        }
        let mut changed = false;
        for s in 0..n {
            if !alive[s] {
                continue;
            }
            let before = allowed[s].len();
            allowed[s].retain(|&c| {
                mdp.choices[s][c]
                    .succ
                    .iter()
                    .all(|(t, _)| alive[*t] && comp[*t] == comp[s])
            });
            if allowed[s].len() != before {
                changed = true;
            }
            if allowed[s].is_empty() {
                alive[s] = false;
                changed = true;
            }
        }
        if !changed {
            return comps
                .into_iter()
                .filter(|c| alive[c[0]])
                .map(|c| {
                    let acts = c.iter().map(|&s| (s, allowed[s].clone())).collect();
                    (c, acts)
                })
                .collect();
        }
    }
}

/// Occupation measures of an end component as a frequency polytope.
fn occupation_polytope(game: &Game, mdp: &Mdp, acts: &BTreeMap<usize, Vec<usize>>) -> FrequencyPolytope {
    let vars: Vec<(usize, usize)> = acts
        .iter()
        .flat_map(|(&s, cs)| cs.iter().map(move |&c| (s, c)))
        .collect();
    let mut region = Region::new(vars.len());
    region.push(vec![Rational::one(); vars.len()], Cmp::Eq, Rational::one());
    for &t in acts.keys() {
        let row: Vec<Rational> = vars
            .iter()
            .map(|&(s, c)| {
                let inflow = mdp.choices[s][c]
                    .succ
                    .iter()
                    .find(|(u, _)| *u == t)
                    .map_or_else(Rational::zero, |(_, p)| p.clone());
                let outflow = if s == t { Rational::one() } else { Rational::zero() };
                inflow - outflow
            })
            .collect();
        region.push(row, Cmp::Eq, Rational::zero());
    }
    let phi = game
        .profiles()
        .map(|q| {
            vars.iter()
                .map(|&(s, c)| {
                    mdp.choices[s][c]
                        .emit
                        .iter()
                        .find(|(p, _)| *p == q)
                        .map_or_else(Rational::zero, |(_, w)| w.clone())
                })
                .collect()
        })
        .collect();
    FrequencyPolytope { base: region, phi }
}

/// Best payoff of the deviator while staying in the end component.
fn component_value(
    game: &Game,
    i: usize,
    mdp: &Mdp,
    acts: &BTreeMap<usize, Vec<usize>>,
) -> Result<Rational> {
    match game.objective(i) {
        Objective::InfinitelyOften { set } => {
            let hits = acts.iter().any(|(&s, cs)| {
                cs.iter()
                    .any(|&c| mdp.choices[s][c].emit.iter().any(|(q, _)| set.contains(*q)))
            });
            Ok(if hits { Rational::one() } else { Rational::zero() })
        }
        Objective::LimsupFrequency { set } => {
            let poly = occupation_polytope(game, mdp, acts);
            let row = poly.set_row(set);
            let (_, v) = poly
                .base
                .maximize(&row, &Rational::zero())?
                .ok_or_else(|| Error::SolverFailure("empty occupation polytope".into()))?;
            Ok(v)
        }
        Objective::ThresholdTable(table) => {
            let poly = occupation_polytope(game, mdp, acts);
            let patterns = reachable_patterns(&poly, table)?;
            extreme_payoff(table, &intersection_closure(&patterns), true)
                .ok_or_else(|| Error::SolverFailure("empty occupation polytope".into()))
        }
        Objective::FiniteHorizon(_) => unreachable!("finite horizons are solved by backward induction"),
    }
}

/// Optimal stopping value from the start state, where stopping in an end
/// component pays its value.
fn stopping_value(mdp: &Mdp, stop: &[Option<Rational>]) -> Result<Rational> {
    let n = mdp.states.len();
    let floor = stop.iter().flatten().min().cloned().unwrap_or_else(Rational::zero);
    let comps = sccs(
        n,
        (0..n).flat_map(|s| {
            mdp.choices[s]
                .iter()
                .flat_map(move |c| c.succ.iter().map(move |(t, _)| (s, *t)))
                .collect::<Vec<_>>()
        }),
    );
    let mut x: Vec<Option<Rational>> = vec![None; n];
    for comp in comps {
        let local: BTreeMap<usize, usize> = comp.iter().enumerate().map(|(j, &s)| (s, j)).collect();
        let m = comp.len();
        let mut lp = LinearProgram::new(m);
        lp.maximize(vec![-Rational::one(); m]);
        for (j, &s) in comp.iter().enumerate() {
            let mut row = vec![Rational::zero(); m];
            row[j] = Rational::one();
            lp.add(row.clone(), Relation::Ge, stop[s].as_ref().map_or_else(Rational::zero, |v| v - &floor));
            for c in &mdp.choices[s] {
                let mut r = row.clone();
                let mut rhs = Rational::zero();
                for (t, p) in &c.succ {
                    match local.get(t) {
                        Some(&jt) => r[jt] -= p,
                        None => rhs += p * x[*t].as_ref().expect("successor solved"),
                    }
                }
                lp.add(r, Relation::Ge, rhs);
            }
        }
        match lp.solve()? {
            LpSolution::Optimal { x: sol, .. } => {
                for (j, &s) in comp.iter().enumerate() {
                    x[s] = Some(sol[j].clone());
                }
            }
            _ => return Err(Error::SolverFailure("optimal stopping program failed".into())),
        }
    }
    Ok(x[0].clone().expect("start solved") + floor)
}

fn tail_best_value(game: &Game, automaton: &StrategyAutomaton, i: usize, free: &BTreeSet<usize>) -> Result<Rational> {
    let mdp = build_mdp(game, automaton, i, free);
    let mut stop = vec![None; mdp.states.len()];
    for (states, acts) in end_components(&mdp) {
        let v = component_value(game, i, &mdp, &acts)?;
        for s in states {
            stop[s] = Some(v.clone());
        }
    }
    stopping_value(&mdp, &stop)
}

/// Backward induction over histories of the first `horizon` stages.
fn finite_best_value(
    game: &Game,
    automaton: &StrategyAutomaton,
    i: usize,
    free: &BTreeSet<usize>,
) -> Result<Rational> {
    let Objective::FiniteHorizon(table) = game.objective(i) else {
        unreachable!("finite-horizon objective")
    };
    let np = game.n_profiles();
    let m = table.horizon;
    if np.checked_pow(m as u32).is_none_or(|t| t.saturating_mul(automaton.n_states()) > DEFAULT_ENUMERATION_CAP) {
        return Err(Error::resource("finite-horizon deviation tree"));
    }
    fn go(
        game: &Game,
        automaton: &StrategyAutomaton,
        i: usize,
        free: &BTreeSet<usize>,
        payoffs: &[Rational],
        m: usize,
        t: usize,
        s: usize,
        h: usize,
    ) -> Rational {
        if t == m {
            return payoffs[h].clone();
        }
        let mut x = exact_mixed(&automaton.emission[s]);
        choice_weights(game, automaton, i, s, free.contains(&s))
            .into_iter()
            .map(|w| {
                x[i] = w;
                profile_distribution(game, &x)
                    .into_iter()
                    .fold(Rational::zero(), |acc, (q, p)| {
                        acc + p * go(game, automaton, i, free, payoffs, m, t + 1, automaton.next(s, q), h * game.n_profiles() + q)
                    })
            })
            .max()
            .expect("at least one choice")
    }
    Ok(go(game, automaton, i, free, &table.payoffs, m, 0, automaton.initial, 0))
}

pub fn deviation_gain(
    game: &Game,
    automaton: &StrategyAutomaton,
    i: usize,
    class: DeviationClass,
) -> Result<DeviationReport> {
    automaton.validate(game)?;
    let on_path = exact_payoffs(game, automaton)?[i].clone();
    let free = free_states(automaton, class.memory_states);
    let mut notes = Vec::new();
    let best = match game.objective(i) {
        Objective::FiniteHorizon(t) => {
            if class.horizon < t.horizon {
                notes.push(format!(
                    "history-dependent choices cover {} of {} stages",
                    class.horizon, t.horizon
                ));
            }
            finite_best_value(game, automaton, i, &free)?
        }
        Objective::ThresholdTable(_) => {
            notes.push(
                "end-component values close rule patterns under oscillation; an upper bound on the best response".into(),
            );
            tail_best_value(game, automaton, i, &free)?
        }
        _ => tail_best_value(game, automaton, i, &free)?,
    };
    Ok(DeviationReport {
        player: i,
        gain: exact::to_f64(&(&best - &on_path)),
        on_path,
        best_value: best,
        class,
        method: DeviationMethod::MdpExact,
        notes,
    })
}

/// Best stationary deterministic deviation, by exhaustive enumeration.
pub fn policy_enumeration(
    game: &Game,
    automaton: &StrategyAutomaton,
    i: usize,
    class: DeviationClass,
) -> Result<DeviationReport> {
    let on_path = exact_payoffs(game, automaton)?[i].clone();
    let free: Vec<usize> = free_states(automaton, class.memory_states).into_iter().collect();
    let k = game.n_actions(i);
    let total = k
        .checked_pow(free.len() as u32)
        .filter(|&t| t <= POLICY_CAP)
        .ok_or_else(|| Error::resource(format!("{k}^{} stationary policies", free.len())))?;
    let mut best: Option<Rational> = None;
    for code in 0..total {
        let mut dev = automaton.clone();
        let mut c = code;
        for &s in &free {
            dev.emission[s] = dev.emission[s].with_player(i, MixedAction::pure(k, c % k));
            c /= k;
        }
        let v = exact_payoffs(game, &dev)?[i].clone();
        if best.as_ref().is_none_or(|b| v > *b) {
            best = Some(v);
        }
    }
    let best = best.expect("at least one policy");
    Ok(DeviationReport {
        player: i,
        gain: exact::to_f64(&(&best - &on_path)),
        on_path,
        best_value: best,
        class,
        method: DeviationMethod::PolicyEnum,
        notes: vec![format!("{total} stationary deterministic policies")],
    })
}
