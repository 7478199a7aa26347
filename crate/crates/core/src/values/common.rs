use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::DEFAULT_ENUMERATION_CAP;
use crate::exact::{self, Rational};
use crate::lp::{Cmp, Region};
use crate::model::{Game, Objective, PeriodicPlay, ProfileIndex, ProfileSet};
use crate::stage::MinmaxCertificate;
use crate::{Error, Result};

pub const DEFAULT_DENOMINATOR: usize = 64;

/// Individually rational play found by [`common_play_search`].
#[derive(Clone, Debug, PartialEq)]
pub struct CommonPlay {
    pub play: PeriodicPlay,
    pub payoffs: Vec<Rational>,
    pub thresholds: Vec<Rational>,
    pub denominator: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfeasibleReport {
    pub epsilon: f64,
    /// Minimal set of players whose constraints cannot hold together.
    pub players: Vec<String>,
    pub constraints: Vec<String>,
}

impl fmt::Display for InfeasibleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "no play pays every player its value minus {}; conflicting constraints: {}",
            self.epsilon,
            self.constraints.join("; ")
        )
    }
}

/// Linear description of the tail payoffs over cycle frequency vectors.
#[derive(Clone, Debug)]
pub(crate) struct Combo {
    pub region: Region,
    /// Per player: fixed payoff of the chosen outcome, or `None` when the
    /// payoff is the linear form in `linear`.
    pub fixed: Vec<Option<Rational>>,
    pub linear: Vec<Option<Vec<Rational>>>,
}

impl Combo {
    pub fn payoff_at(&self, i: usize, phi: &[Rational]) -> Option<Rational> {
        match (&self.fixed[i], &self.linear[i]) {
            (Some(v), _) => Some(v.clone()),
            (None, Some(row)) => Some(dot(row, phi)),
            _ => None,
        }
    }
}

pub(crate) fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub(crate) fn indicator_row(game: &Game, set: &ProfileSet) -> Vec<Rational> {
    game.profiles()
        .map(|p| if set.contains(p) { Rational::one() } else { Rational::zero() })
        .collect()
}

/// Ways a tail objective can be satisfied: extra constraints and the payoff
/// (fixed, or linear when `None`).
fn tail_options(game: &Game, i: usize) -> Vec<(Vec<(Vec<Rational>, Cmp, Rational)>, Option<Rational>)> {
    let zero = Rational::zero;
    match game.objective(i) {
        Objective::InfinitelyOften { set } => {
            let row = indicator_row(game, set);
            vec![
                (vec![(row.clone(), Cmp::Gt, zero())], Some(Rational::one())),
                (vec![(row, Cmp::Le, zero())], Some(zero())),
            ]
        }
        Objective::LimsupFrequency { .. } => vec![(Vec::new(), None)],
        Objective::ThresholdTable(table) => {
            let poly = super::patterns::FrequencyPolytope::simplex(
                game.n_profiles(),
                (0..game.n_profiles())
                    .map(|p| (0..game.n_profiles()).map(|q| if p == q { Rational::one() } else { zero() }).collect())
                    .collect(),
            );
            (0..table.n_patterns())
                .map(|k| {
                    let mut cons = Vec::new();
                    for (j, rule) in table.rules.iter().enumerate().take(k + 1) {
                        cons.push(super::patterns::condition_constraint(&poly, &rule.condition, j == k));
                    }
                    (cons, Some(table.pattern_payoff(k).clone()))
                })
                .collect()
        }
        Objective::FiniteHorizon(_) => vec![(Vec::new(), None)],
    }
}

/// All feasible outcome combinations for the tail players in `players`.
/// With `thresholds`, each player's payoff must reach its threshold.
pub(crate) fn tail_combos(
    game: &Game,
    players: &[usize],
    thresholds: Option<&[Rational]>,
) -> Result<Vec<Combo>> {
    let np = game.n_profiles();
    let mut base = Region::new(np);
    base.push(vec![Rational::one(); np], Cmp::Eq, Rational::one());
    let start = Combo {
        region: base,
        fixed: vec![None; game.n_players()],
        linear: vec![None; game.n_players()],
    };
    let tail: Vec<usize> = players
        .iter()
        .copied()
        .filter(|&i| game.objective(i).is_tail())
        .collect();
    let mut out = Vec::new();
    extend(game, &tail, thresholds, start, &mut out)?;
    Ok(out)
}

fn extend(
    game: &Game,
    rest: &[usize],
    thresholds: Option<&[Rational]>,
    combo: Combo,
    out: &mut Vec<Combo>,
) -> Result<()> {
    if !combo.region.is_nonempty()? {
        return Ok(());
    }
    let Some((&i, rest)) = rest.split_first() else {
        out.push(combo);
        return Ok(());
    };
    for (constraints, payoff) in tail_options(game, i) {
        let mut next = combo.clone();
        for (row, cmp, rhs) in constraints {
            next.region.push(row, cmp, rhs);
        }
        match &payoff {
            Some(v) => {
                if thresholds.is_some_and(|t| v < &t[i]) {
                    continue;
                }
                next.fixed[i] = Some(v.clone());
            }
            None => {
                let Objective::LimsupFrequency { set } = game.objective(i) else {
                    unreachable!("only frequency payoffs are linear")
                };
                let row = indicator_row(game, set);
                if let Some(t) = thresholds {
                    next.region.push(row.clone(), Cmp::Ge, t[i].clone());
                }
                next.linear[i] = Some(row);
            }
        }
        extend(game, rest, thresholds, next, out)?;
    }
    Ok(())
}

/// Sequence indices of length-`horizon` prefixes meeting every finite-horizon
/// threshold of `players`.
pub(crate) fn good_prefixes(
    game: &Game,
    players: &[usize],
    thresholds: Option<&[Rational]>,
) -> Result<Vec<usize>> {
    let horizon = game.max_horizon();
    let total = game
        .n_profiles()
        .checked_pow(horizon as u32)
        .filter(|&t| t <= DEFAULT_ENUMERATION_CAP)
        .ok_or_else(|| Error::resource(format!("prefix enumeration over {horizon} stages")))?;
    Ok((0..total)
        .filter(|&h| {
            let seq = game.sequence(h, horizon);
            players.iter().all(|&i| match (game.objective(i), thresholds) {
                (Objective::FiniteHorizon(t), Some(th)) => {
                    let idx = game.sequence_index(&seq[..t.horizon]);
                    t.payoffs[idx] >= th[i]
                }
                _ => true,
            })
        })
        .collect())
}

pub(crate) fn prefix_payoff(game: &Game, i: usize, seq: &[ProfileIndex]) -> Option<Rational> {
    match game.objective(i) {
        Objective::FiniteHorizon(t) => Some(t.payoffs[game.sequence_index(&seq[..t.horizon])].clone()),
        _ => None,
    }
}

/// Largest-remainder rounding of a probability vector to denominator `d`.
pub fn round_to_denominator(z: &[Rational], d: usize) -> Vec<usize> {
    let dd = Rational::from_integer(d.into());
    let scaled: Vec<Rational> = z.iter().map(|v| v * &dd).collect();
    let mut counts: Vec<usize> = scaled
        .iter()
        .map(|v| v.floor().to_integer().to_usize().unwrap_or(0))
        .collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = &scaled[a] - scaled[a].floor();
        let fb = &scaled[b] - scaled[b].floor();
        fb.cmp(&fa).then(a.cmp(&b))
    });
    for &k in order.iter().take(d.saturating_sub(assigned)) {
        counts[k] += 1;
    }
    counts
}

pub fn cycle_from_counts(counts: &[usize]) -> Vec<ProfileIndex> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(p, &c)| std::iter::repeat_n(p, c))
        .collect()
}

/// Points of a combination's region worth rounding.
pub(crate) fn candidate_points(combo: &Combo, n_players: usize) -> Result<Vec<Vec<Rational>>> {
    let Some((center, slack)) = combo.region.interior_point()? else {
        return Ok(Vec::new());
    };
    let n = combo.region.n_vars;
    let mut objective = vec![Rational::zero(); n];
    for i in 0..n_players {
        if let Some(row) = &combo.linear[i] {
            for (o, r) in objective.iter_mut().zip(row) {
                *o += r;
            }
        }
    }
    let mut points = vec![center];
    let half = if combo.region.has_strict() { &slack / exact::int(2) } else { Rational::zero() };
    for min_slack in [half, Rational::zero()] {
        if let Some((z, _)) = combo.region.maximize(&objective, &min_slack)? {
            if !points.contains(&z) {
                points.push(z);
            }
        }
    }
    Ok(points)
}

pub fn common_play_search(
    game: &Game,
    certificates: &[MinmaxCertificate],
    epsilon: f64,
    max_denominator: usize,
) -> Result<CommonPlay> {
    let eps = exact::snap(epsilon, exact::LITERAL_TOLERANCE)
        .filter(|e| !e.is_negative())
        .ok_or_else(|| Error::Precondition(format!("epsilon {epsilon} must be nonnegative")))?;
    let thresholds: Vec<Rational> = certificates.iter().map(|c| c.lower() - &eps).collect();
    let all: Vec<usize> = (0..game.n_players()).collect();

    let feasible = |players: &[usize]| -> Result<bool> {
        Ok(!good_prefixes(game, players, Some(&thresholds))?.is_empty()
            && !tail_combos(game, players, Some(&thresholds))?.is_empty())
    };
    let prefixes = good_prefixes(game, &all, Some(&thresholds))?;
    let combos = tail_combos(game, &all, Some(&thresholds))?;
    if prefixes.is_empty() || combos.is_empty() {
        let mut conflict = all.clone();
        for p in all.iter().copied() {
            let without: Vec<usize> = conflict.iter().copied().filter(|&q| q != p).collect();
            if !feasible(&without)? {
                conflict = without;
            }
        }
        return Err(Error::Infeasible(Box::new(InfeasibleReport {
            epsilon,
            players: conflict.iter().map(|&i| game.player_name(i).to_string()).collect(),
            constraints: conflict
                .iter()
                .map(|&i| {
                    format!(
                        "{} ({}): payoff >= {}",
                        game.player_name(i),
                        game.objective(i).kind(),
                        exact::format_rational(&thresholds[i])
                    )
                })
                .collect(),
        })));
    }

    let horizon = game.max_horizon();
    let prefix = prefixes
        .iter()
        .map(|&h| game.sequence(h, horizon))
        .max_by(|a, b| {
            let sum = |s: &[ProfileIndex]| {
                all.iter()
                    .filter_map(|&i| prefix_payoff(game, i, s))
                    .fold(Rational::zero(), |x, y| x + y)
            };
            sum(a).cmp(&sum(b)).then(b.cmp(a))
        })
        .expect("nonempty");

    let mut points = Vec::new();
    for combo in &combos {
        points.extend(candidate_points(combo, game.n_players())?);
    }
    for d in 1..=max_denominator {
        let mut best: Option<(Rational, CommonPlay)> = None;
        for z in &points {
            let cycle = cycle_from_counts(&round_to_denominator(z, d));
            let play = PeriodicPlay::new(prefix.clone(), cycle);
            let payoffs = play.evaluate_all(game)?;
            if payoffs.iter().zip(&thresholds).any(|(v, t)| v < t) {
                continue;
            }
            let sum = payoffs.iter().fold(Rational::zero(), |a, b| a + b);
            let better = match &best {
                None => true,
                Some((s, b)) => sum > *s || (sum == *s && play.cycle < b.play.cycle),
            };
            if better {
                best = Some((
                    sum,
                    CommonPlay {
                        play,
                        payoffs,
                        thresholds: thresholds.clone(),
                        denominator: d,
                    },
                ));
            }
        }
        if let Some((_, found)) = best {
            return Ok(found);
        }
    }
    let fallback = PeriodicPlay::new(
        prefix,
        cycle_from_counts(&round_to_denominator(&points[0], max_denominator)),
    );
    Err(Error::ResourceCap {
        what: format!("no rounding with denominator up to {max_denominator} is individually rational"),
        best_found: Some(Box::new(fallback)),
    })
}
