use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::exact::Rational;
use crate::model::{Game, MixedProfile, Objective, ProfileIndex, ProfileSet, StrategyAutomaton};
use crate::values::exact_mixed;
use crate::{Error, Result};

/// Exact distribution of a product of per-player weights, positive entries only.
pub fn profile_distribution(game: &Game, weights: &[Vec<Rational>]) -> Vec<(ProfileIndex, Rational)> {
    game.profiles()
        .filter_map(|p| {
            let w = (0..game.n_players())
                .fold(Rational::one(), |acc, j| acc * &weights[j][game.action_of(p, j)]);
            (!w.is_zero()).then_some((p, w))
        })
        .collect()
}

pub fn emission_distribution(game: &Game, x: &MixedProfile) -> Vec<(ProfileIndex, Rational)> {
    profile_distribution(game, &exact_mixed(x))
}

/// Gaussian elimination for `a X = b` with several right-hand sides.
pub(crate) fn solve_linear(mut a: Vec<Vec<Rational>>, mut b: Vec<Vec<Rational>>) -> Option<Vec<Vec<Rational>>> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = Rational::one() / &a[col][col];
        for v in a[col].iter_mut() {
            *v *= &inv;
        }
        for v in b[col].iter_mut() {
            *v *= &inv;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in col..n {
                let d = &f * &a[col][c];
                a[r][c] -= d;
            }
            for c in 0..b[r].len() {
                let d = &f * &b[col][c];
                b[r][c] -= d;
            }
        }
    }
    Some(b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecurrentClass {
    pub states: Vec<usize>,
    /// Stationary probabilities aligned with `states`.
    pub stationary: Vec<Rational>,
    /// Limiting profile frequencies.
    pub frequency: BTreeMap<ProfileIndex, Rational>,
}

impl RecurrentClass {
    pub fn frequency_of(&self, set: &ProfileSet) -> Rational {
        set.iter()
            .filter_map(|p| self.frequency.get(&p))
            .fold(Rational::zero(), |a, b| a + b)
    }

    pub fn recurs(&self, p: ProfileIndex) -> bool {
        self.frequency.contains_key(&p)
    }

    /// Almost-sure payoff of a tail objective once the chain is in the class.
    pub fn payoff(&self, objective: &Objective) -> Option<Rational> {
        objective.evaluate_tail(|s| self.frequency_of(s), |p| self.recurs(p))
    }
}

/// Markov chain over automaton states with the recurrent classes and the
/// probabilities of ending in each.
#[derive(Clone, Debug)]
pub struct ProductChain {
    pub initial: usize,
    pub emission: Vec<Vec<(ProfileIndex, Rational)>>,
    /// Successor distribution of each state, successors ascending.
    pub kernel: Vec<Vec<(usize, Rational)>>,
    pub classes: Vec<RecurrentClass>,
    /// `absorption[state][class]`.
    pub absorption: Vec<Vec<Rational>>,
    /// Next state for each emitted profile.
    pub successor: Vec<BTreeMap<ProfileIndex, usize>>,
}

impl ProductChain {
    pub fn new(game: &Game, automaton: &StrategyAutomaton) -> Result<Self> {
        automaton.validate(game)?;
        let emission = automaton
            .emission
            .iter()
            .map(|x| emission_distribution(game, x))
            .collect();
        Self::build(automaton.initial, emission, |s, q| automaton.next(s, q))
    }

    pub fn build(
        initial: usize,
        emission: Vec<Vec<(ProfileIndex, Rational)>>,
        next: impl Fn(usize, ProfileIndex) -> usize,
    ) -> Result<Self> {
        let n = emission.len();
        let successor: Vec<BTreeMap<ProfileIndex, usize>> = emission
            .iter()
            .enumerate()
            .map(|(s, dist)| dist.iter().map(|(q, _)| (*q, next(s, *q))).collect())
            .collect();
        let kernel: Vec<Vec<(usize, Rational)>> = emission
            .iter()
            .enumerate()
            .map(|(s, dist)| {
                let mut row: BTreeMap<usize, Rational> = BTreeMap::new();
                for (q, w) in dist {
                    *row.entry(successor[s][q]).or_insert_with(Rational::zero) += w;
                }
                row.into_iter().collect()
            })
            .collect();
        let mut graph = DiGraph::<(), ()>::new();
        let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
        for (s, row) in kernel.iter().enumerate() {
            for (t, _) in row {
                graph.add_edge(nodes[s], nodes[*t], ());
            }
        }
        // Tarjan yields components sinks first.
        let sccs = tarjan_scc(&graph);
        let mut comp = vec![0usize; n];
        for (c, scc) in sccs.iter().enumerate() {
            for v in scc {
                comp[v.index()] = c;
            }
        }
        let mut classes = Vec::new();
        let mut class_of_comp = vec![None; sccs.len()];
        for (c, scc) in sccs.iter().enumerate() {
            let states: BTreeSet<usize> = scc.iter().map(|v| v.index()).collect();
            let closed = states
                .iter()
                .all(|&s| kernel[s].iter().all(|(t, _)| comp[*t] == c));
            if closed {
                class_of_comp[c] = Some(classes.len());
                let states: Vec<usize> = states.into_iter().collect();
                let stationary = stationary(&kernel, &states)?;
                let mut frequency: BTreeMap<ProfileIndex, Rational> = BTreeMap::new();
                for (s, pi) in states.iter().zip(&stationary) {
                    for (q, w) in &emission[*s] {
                        *frequency.entry(*q).or_insert_with(Rational::zero) += pi * w;
                    }
                }
                frequency.retain(|_, w| !w.is_zero());
                classes.push(RecurrentClass {
                    states,
                    stationary,
                    frequency,
                });
            }
        }
        let k = classes.len();
        let mut absorption = vec![Vec::new(); n];
        for (c, scc) in sccs.iter().enumerate() {
            if let Some(cls) = class_of_comp[c] {
                for v in scc {
                    let mut e = vec![Rational::zero(); k];
                    e[cls] = Rational::one();
                    absorption[v.index()] = e;
                }
                continue;
            }
            let members: Vec<usize> = scc.iter().map(|v| v.index()).collect();
            let local: BTreeMap<usize, usize> = members.iter().enumerate().map(|(j, &s)| (s, j)).collect();
            let m = members.len();
            let mut a = vec![vec![Rational::zero(); m]; m];
            let mut b = vec![vec![Rational::zero(); k]; m];
            for (j, &s) in members.iter().enumerate() {
                a[j][j] += Rational::one();
                for (t, w) in &kernel[s] {
                    match local.get(t) {
                        Some(&jt) => a[j][jt] -= w,
                        None => {
                            for (bc, at) in b[j].iter_mut().zip(&absorption[*t]) {
                                *bc += w * at;
                            }
                        }
                    }
                }
            }
            let x = solve_linear(a, b)
                .ok_or_else(|| Error::SolverFailure("singular absorption system".into()))?;
            for (j, &s) in members.iter().enumerate() {
                absorption[s] = x[j].clone();
            }
        }
        Ok(ProductChain {
            initial,
            emission,
            kernel,
            classes,
            absorption,
            successor,
        })
    }

    pub fn n_states(&self) -> usize {
        self.emission.len()
    }

    /// Checks `pi P = pi`, nonnegativity and normalisation of every class.
    pub fn stationary_ok(&self) -> bool {
        self.classes.iter().all(|c| {
            let total = c.stationary.iter().fold(Rational::zero(), |a, b| a + b);
            let mut flow: BTreeMap<usize, Rational> = BTreeMap::new();
            for (s, pi) in c.states.iter().zip(&c.stationary) {
                for (t, w) in &self.kernel[*s] {
                    *flow.entry(*t).or_insert_with(Rational::zero) += pi * w;
                }
            }
            total.is_one()
                && c.stationary.iter().all(|p| *p >= Rational::zero())
                && c.states
                    .iter()
                    .zip(&c.stationary)
                    .all(|(s, pi)| flow.get(s).cloned().unwrap_or_else(Rational::zero) == *pi)
        })
    }

    /// State distribution after `steps` stages from the initial state.
    pub fn distribution_after(&self, steps: usize) -> BTreeMap<usize, Rational> {
        let mut dist = BTreeMap::from([(self.initial, Rational::one())]);
        for _ in 0..steps {
            let mut next = BTreeMap::new();
            for (s, p) in &dist {
                for (t, w) in &self.kernel[*s] {
                    *next.entry(*t).or_insert_with(Rational::zero) += p * w;
                }
            }
            dist = next;
        }
        dist
    }
}

fn stationary(kernel: &[Vec<(usize, Rational)>], states: &[usize]) -> Result<Vec<Rational>> {
    let m = states.len();
    let index: BTreeMap<usize, usize> = states.iter().enumerate().map(|(j, &s)| (s, j)).collect();
    // Row j of the system is the balance equation of state j; the last is
    // replaced by normalisation.
    let mut a = vec![vec![Rational::zero(); m]; m];
    for (i, &s) in states.iter().enumerate() {
        a[i][i] -= Rational::one();
        for (t, w) in &kernel[s] {
            a[index[t]][i] += w;
        }
    }
    a[m - 1] = vec![Rational::one(); m];
    let mut b = vec![vec![Rational::zero()]; m];
    b[m - 1][0] = Rational::one();
    let x = solve_linear(a, b).ok_or_else(|| Error::SolverFailure("singular stationary system".into()))?;
    Ok(x.into_iter().map(|mut v| v.remove(0)).collect())
}

/// Exact distribution of payoff vectors induced by the automaton.
pub fn exact_outcome_distribution(
    game: &Game,
    automaton: &StrategyAutomaton,
) -> Result<Vec<(Vec<Rational>, Rational)>> {
    let chain = ProductChain::new(game, automaton)?;
    outcome_distribution(game, &chain)
}

pub(crate) fn outcome_distribution(game: &Game, chain: &ProductChain) -> Result<Vec<(Vec<Rational>, Rational)>> {
    let horizon = game.max_horizon();
    let np = game.n_profiles();
    let cap = crate::values::DEFAULT_ENUMERATION_CAP;
    let mut layer: BTreeMap<(usize, usize), Rational> = BTreeMap::from([((chain.initial, 0), Rational::one())]);
    for _ in 0..horizon {
        let mut next = BTreeMap::new();
        for ((s, h), p) in &layer {
            for (q, w) in &chain.emission[*s] {
                let t = chain.successor[*s][q];
                *next.entry((t, h * np + q)).or_insert_with(Rational::zero) += p * w;
            }
        }
        if next.len() > cap {
            return Err(Error::resource("finite-horizon outcome enumeration"));
        }
        layer = next;
    }
    let tail_values: Vec<Vec<Option<Rational>>> = chain
        .classes
        .iter()
        .map(|c| game.objectives().iter().map(|o| c.payoff(o)).collect())
        .collect();
    let mut atoms: BTreeMap<Vec<Rational>, Rational> = BTreeMap::new();
    for ((s, h), p) in layer {
        let seq = game.sequence(h, horizon);
        let fh: Vec<Option<Rational>> = (0..game.n_players())
            .map(|i| crate::values::common::prefix_payoff(game, i, &seq))
            .collect();
        for (c, a) in chain.absorption[s].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let payoff: Vec<Rational> = (0..game.n_players())
                .map(|i| {
                    fh[i]
                        .clone()
                        .or_else(|| tail_values[c][i].clone())
                        .expect("every objective has a value")
                })
                .collect();
            *atoms.entry(payoff).or_insert_with(Rational::zero) += &p * a;
        }
    }
    Ok(atoms.into_iter().collect())
}

pub fn exact_payoffs(game: &Game, automaton: &StrategyAutomaton) -> Result<Vec<Rational>> {
    let atoms = exact_outcome_distribution(game, automaton)?;
    Ok(expected(game.n_players(), &atoms))
}

pub(crate) fn expected(n: usize, atoms: &[(Vec<Rational>, Rational)]) -> Vec<Rational> {
    (0..n)
        .map(|i| atoms.iter().fold(Rational::zero(), |a, (v, p)| a + &v[i] * p))
        .collect()
}
