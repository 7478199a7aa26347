//! Minmax values of the infinitely repeated game, regular approximations of
//! winning sets, and the search for a common individually rational play.

pub(crate) mod common;
pub mod patterns;
mod schedule;

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::{self, Rational};
use crate::model::{Game, MixedAction, MixedProfile, Objective, ProfileIndex, ThresholdTable};
use crate::stage::{
    self, best_pure_punishment, matrix_game_solve_exact, stage_minmax, Method, MinmaxCertificate,
    StageReward,
};
use crate::{Error, Result};

pub use common::{common_play_search, CommonPlay, InfeasibleReport, DEFAULT_DENOMINATOR};
pub use schedule::{
    clopen_truncation, closed_block_approximation, open_superset_schedule, BlockSchedule,
    PunishmentSchedule, TruncationSet, TruncationTarget, DEFAULT_ENUMERATION_CAP,
};

use patterns::{extreme_payoff, intersection_closure, reachable_patterns, FrequencyPolytope};

/// Stage values at or below this count as zero for the 0-1 law.
pub const ZERO_ONE_TOLERANCE: f64 = 1e-6;

/// Largest number of finite-horizon tree nodes solved by backward induction.
pub const BACKWARD_INDUCTION_CAP: usize = 1 << 18;

pub fn blackwell_minmax(game: &Game, i: usize) -> Result<MinmaxCertificate> {
    match game.objective(i) {
        Objective::InfinitelyOften { set } => {
            let stage = stage_minmax(game, &StageReward::indicator(game, i, set))?;
            Ok(zero_one(game, i, stage))
        }
        Objective::LimsupFrequency { set } => {
            let mut c = stage_minmax(game, &StageReward::indicator(game, i, set))?;
            c.notes
                .push("value of the stage game with the indicator reward".into());
            Ok(c)
        }
        Objective::ThresholdTable(table) => threshold_minmax(game, i, table),
        Objective::FiniteHorizon(_) => Ok(finite_horizon_values(game, i)?.root),
    }
}

pub fn blackwell_minmax_all(game: &Game) -> Result<Vec<MinmaxCertificate>> {
    (0..game.n_players()).map(|i| blackwell_minmax(game, i)).collect()
}

fn zero_one(game: &Game, i: usize, stage: MinmaxCertificate) -> MinmaxCertificate {
    let note = format!(
        "stage value in [{}, {}]",
        stage.value_lo, stage.value_hi
    );
    if stage.value_lo > ZERO_ONE_TOLERANCE {
        MinmaxCertificate {
            value_lo: 1.0,
            value_hi: 1.0,
            exact: Some(Rational::one()),
            method: Method::ZeroOneLaw,
            tolerance: 0.0,
            notes: vec![note, "positive stage value: wins infinitely often almost surely".into()],
            ..stage
        }
    } else if stage.value_hi < ZERO_ONE_TOLERANCE {
        // A zero stage value is attained by a pure opponent profile, which keeps
        // the winning set out of reach forever.
        let (v, p) = best_pure_punishment(game, &StageReward::indicator(game, i, winning_set(game, i)));
        let (punishment, notes) = if v.is_zero() {
            (
                MixedProfile::pure(game, game.with_action(p, i, 0)),
                vec![note, "pure punishment avoids the winning set".into()],
            )
        } else {
            (stage.punishment.clone(), vec![note])
        };
        MinmaxCertificate {
            value_lo: 0.0,
            value_hi: 0.0,
            exact: Some(Rational::zero()),
            punishment,
            method: Method::ZeroOneLaw,
            tolerance: 0.0,
            notes,
            ..stage
        }
    } else {
        MinmaxCertificate {
            value_lo: 0.0,
            value_hi: 1.0,
            exact: None,
            method: Method::ZeroOneLaw,
            tolerance: 1.0,
            notes: vec![note, "indeterminate at tolerance".into()],
            ..stage
        }
    }
}

fn winning_set(game: &Game, i: usize) -> &crate::model::ProfileSet {
    match game.objective(i) {
        Objective::InfinitelyOften { set } | Objective::LimsupFrequency { set } => set,
        _ => unreachable!("winning set of a non-set objective"),
    }
}

/// Exact weights of a mixed profile, snapped and renormalised.
pub fn exact_mixed(x: &MixedProfile) -> Vec<Vec<Rational>> {
    x.0.iter()
        .map(|m| {
            let raw: Vec<Rational> = m
                .weights()
                .iter()
                .map(|&w| {
                    if w <= 0.0 {
                        Rational::zero()
                    } else {
                        exact::snap(w, exact::LITERAL_TOLERANCE).unwrap_or_else(Rational::zero)
                    }
                })
                .collect();
            let total = raw.iter().fold(Rational::zero(), |a, b| a + b);
            raw.into_iter().map(|w| w / &total).collect()
        })
        .collect()
}

pub fn mixed_from_exact(x: &[Vec<Rational>]) -> MixedProfile {
    MixedProfile(
        x.iter()
            .map(|w| MixedAction(w.iter().map(exact::to_f64).collect()))
            .collect(),
    )
}

/// Frequencies `x_{-i} ⊗ q` as a function of player `i`'s stationary mix `q`.
fn response_polytope(game: &Game, i: usize, x: &[Vec<Rational>]) -> FrequencyPolytope {
    let phi = game
        .profiles()
        .map(|p| {
            let w = (0..game.n_players())
                .filter(|&j| j != i)
                .fold(Rational::one(), |acc, j| acc * &x[j][game.action_of(p, j)]);
            let mut row = vec![Rational::zero(); game.n_actions(i)];
            row[game.action_of(p, i)] = w;
            row
        })
        .collect();
    FrequencyPolytope::simplex(game.n_actions(i), phi)
}

/// Frequencies `q ⊗ y` as a function of the opponents' correlated mix `y`.
fn opponent_polytope(game: &Game, i: usize, q: &[Rational]) -> FrequencyPolytope {
    let opp = game.opponent_profiles(i);
    let phi = game
        .profiles()
        .map(|p| {
            let k = opp
                .binary_search(&game.with_action(p, i, 0))
                .expect("opponent profile");
            let mut row = vec![Rational::zero(); opp.len()];
            row[k] = q[game.action_of(p, i)].clone();
            row
        })
        .collect();
    FrequencyPolytope::simplex(opp.len(), phi)
}

/// Best payoff of a stationary response to the stationary opponents `x`.
pub fn stationary_response_value(game: &Game, i: usize, x: &MixedProfile) -> Result<Rational> {
    let xe = exact_mixed(x);
    match game.objective(i) {
        Objective::LimsupFrequency { set } => {
            Ok(stage::best_response_value_exact(game, &StageReward::indicator(game, i, set), &xe).0)
        }
        Objective::ThresholdTable(table) => {
            let patterns = reachable_patterns(&response_polytope(game, i, &xe), table)?;
            Ok(extreme_payoff(table, &patterns, true).expect("the simplex is nonempty"))
        }
        other => Err(Error::Unsupported {
            operation: "stationary_response_value",
            kind: other.kind(),
        }),
    }
}

/// Best payoff against the stationary opponents `x` when player `i` may steer
/// the running frequency between several stationary points.
pub fn response_value(game: &Game, i: usize, x: &MixedProfile) -> Result<Rational> {
    match game.objective(i) {
        Objective::ThresholdTable(table) => {
            let xe = exact_mixed(x);
            let patterns = reachable_patterns(&response_polytope(game, i, &xe), table)?;
            Ok(extreme_payoff(table, &intersection_closure(&patterns), true)
                .expect("the simplex is nonempty"))
        }
        _ => stationary_response_value(game, i, x),
    }
}

/// Payoff player `i` secures by mixing `q` i.i.d. against any opponent behaviour.
pub fn guaranteed_value(game: &Game, i: usize, table: &ThresholdTable, q: &[Rational]) -> Result<Rational> {
    let patterns = reachable_patterns(&opponent_polytope(game, i, q), table)?;
    Ok(extreme_payoff(table, &intersection_closure(&patterns), false).expect("nonempty simplex"))
}

/// All points of the `k`-simplex with coordinates in `1/denom`.
pub fn simplex_grid(k: usize, denom: i64) -> Vec<Vec<Rational>> {
    fn rec(k: usize, left: i64, denom: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<Rational>>) {
        if cur.len() + 1 == k {
            cur.push(left);
            out.push(cur.iter().map(|&c| exact::rat(c, denom)).collect());
            cur.pop();
            return;
        }
        for c in (0..=left).rev() {
            cur.push(c);
            rec(k, left - c, denom, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, denom, denom, &mut Vec::new(), &mut out);
    out
}

const GRID_DENOMINATOR: i64 = 4;
const GRID_MAX_ACTIONS: usize = 6;

fn threshold_minmax(game: &Game, i: usize, table: &ThresholdTable) -> Result<MinmaxCertificate> {
    let n = game.n_players();
    let pure_self = |x: &mut Vec<Vec<Rational>>| {
        x[i] = (0..game.n_actions(i))
            .map(|a| if a == 0 { Rational::one() } else { Rational::zero() })
            .collect();
    };

    // Upper end: stationary punishments.
    let mut punishments: Vec<Vec<Vec<Rational>>> = Vec::new();
    for p in game.opponent_profiles(i) {
        punishments.push(exact_mixed(&MixedProfile::pure(game, p)));
    }
    for rule in &table.rules {
        let c = stage_minmax(game, &StageReward::indicator(game, i, &rule.condition.set))?;
        let mut x = exact_mixed(&c.punishment);
        pure_self(&mut x);
        punishments.push(x);
    }
    if n == 2 && game.n_actions(1 - i) <= GRID_MAX_ACTIONS {
        for w in simplex_grid(game.n_actions(1 - i), GRID_DENOMINATOR) {
            let mut x = vec![Vec::new(); 2];
            x[1 - i] = w;
            pure_self(&mut x);
            punishments.push(x);
        }
    }
    let mut seen = BTreeSet::new();
    punishments.retain(|x| seen.insert(x.clone()));

    let mut best: Option<(Rational, Rational, Vec<Vec<Rational>>)> = None;
    for x in punishments {
        let poly = response_polytope(game, i, &x);
        let patterns = reachable_patterns(&poly, table)?;
        let stationary = extreme_payoff(table, &patterns, true).expect("nonempty");
        let steered = extreme_payoff(table, &intersection_closure(&patterns), true).expect("nonempty");
        if best.as_ref().is_none_or(|b| steered < b.0) {
            best = Some((steered, stationary, x));
        }
    }
    let (hi, hi_stationary, punishment) = best.expect("at least one punishment candidate");

    // Lower end: i.i.d. mixes of player i against arbitrary opponents.
    let mut mixes: Vec<Vec<Rational>> = (0..game.n_actions(i))
        .map(|a| {
            (0..game.n_actions(i))
                .map(|b| if a == b { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect();
    if game.n_actions(i) <= GRID_MAX_ACTIONS {
        mixes.extend(simplex_grid(game.n_actions(i), GRID_DENOMINATOR));
    }
    for rule in &table.rules {
        mixes.push(maxmin_mix(game, i, &StageReward::indicator(game, i, &rule.condition.set))?);
    }
    let mut seen = BTreeSet::new();
    mixes.retain(|q| seen.insert(q.clone()));
    let mut lo: Option<Rational> = None;
    for q in &mixes {
        let v = guaranteed_value(game, i, table, q)?;
        if lo.as_ref().is_none_or(|l| &v > l) {
            lo = Some(v);
            if lo.as_ref() == Some(&hi) {
                break;
            }
        }
    }
    let lo = lo.expect("at least one mix");

    let mut notes = vec![format!(
        "{} stationary punishments and {} stationary mixes examined",
        seen.len().max(1),
        mixes.len()
    )];
    if hi > hi_stationary {
        notes.push("non-stationary responses improve on stationary ones against the punishment".into());
    }
    let exact = (lo == hi).then(|| hi.clone());
    Ok(MinmaxCertificate {
        player: i,
        value_lo: exact::to_f64(&lo),
        value_hi: exact::to_f64(&hi),
        tolerance: exact::to_f64(&(&hi - &lo)),
        exact,
        punishment: mixed_from_exact(&punishment),
        method: Method::StationaryPatterns,
        notes,
    })
}

/// Player `i`'s optimal stage mix against correlated opponents.
fn maxmin_mix(game: &Game, i: usize, r: &StageReward) -> Result<Vec<Rational>> {
    let opp = game.opponent_profiles(i);
    let matrix: Vec<Vec<Rational>> = (0..game.n_actions(i))
        .map(|a| {
            opp.iter()
                .map(|&p| r.value(game.with_action(p, i, a)).clone())
                .collect()
        })
        .collect();
    Ok(matrix_game_solve_exact(&matrix)?.row)
}

/// Backward-induction values of a finite-horizon objective.
#[derive(Clone, Debug)]
pub struct FiniteHorizonValues {
    /// `lo[t][h]`, `hi[t][h]` for histories `h` of length `t` (sequence index).
    pub lo: Vec<Vec<Rational>>,
    pub hi: Vec<Vec<Rational>>,
    pub root: MinmaxCertificate,
}

pub fn finite_horizon_values(game: &Game, i: usize) -> Result<FiniteHorizonValues> {
    let Objective::FiniteHorizon(table) = game.objective(i) else {
        return Err(Error::Unsupported {
            operation: "finite_horizon_values",
            kind: game.objective(i).kind(),
        });
    };
    let m = table.horizon;
    let np = game.n_profiles();
    let nodes = (0..m).try_fold(0usize, |acc, t| {
        np.checked_pow(t as u32).and_then(|c| acc.checked_add(c))
    });
    if nodes.is_none_or(|c| c > BACKWARD_INDUCTION_CAP) {
        return Err(Error::resource(format!(
            "backward induction over {m} stages exceeds {BACKWARD_INDUCTION_CAP} nodes"
        )));
    }
    let mut lo = vec![Vec::new(); m + 1];
    let mut hi = vec![Vec::new(); m + 1];
    lo[m] = table.payoffs.clone();
    hi[m] = table.payoffs.clone();
    let mut root = None;
    for t in (0..m).rev() {
        let count = np.pow(t as u32);
        let mut lo_t = Vec::with_capacity(count);
        let mut hi_t = Vec::with_capacity(count);
        for h in 0..count {
            let children = h * np..(h + 1) * np;
            let r_lo = StageReward::new(game, i, lo[t + 1][children.clone()].to_vec())?;
            let c_lo = stage_minmax(game, &r_lo)?;
            let c = if lo[t + 1] == hi[t + 1] {
                c_lo.clone()
            } else {
                stage_minmax(game, &StageReward::new(game, i, hi[t + 1][children].to_vec())?)?
            };
            lo_t.push(c_lo.lower());
            hi_t.push(c.upper());
            if t == 0 {
                root = Some((c_lo, c));
            }
        }
        lo[t] = lo_t;
        hi[t] = hi_t;
    }
    let (root_lo, root_hi) = match root {
        Some(r) => r,
        None => {
            // Horizon zero: the payoff is the single table entry.
            let v = table.payoffs[0].clone();
            let c = stage_minmax(game, &StageReward::constant(game, i, v))?;
            (c.clone(), c)
        }
    };
    let (l, h) = (lo[0][0].clone(), hi[0][0].clone());
    let root = MinmaxCertificate {
        player: i,
        value_lo: exact::to_f64(&l),
        value_hi: exact::to_f64(&h),
        tolerance: exact::to_f64(&(&h - &l)),
        exact: (l == h && root_lo.exact.is_some()).then(|| l.clone()),
        punishment: root_hi.punishment,
        method: Method::BackwardInduction,
        notes: vec![format!("backward induction over {m} stages, root solved by {}", root_lo.method.tag())],
    };
    Ok(FiniteHorizonValues { lo, hi, root })
}

/// Lower bound on the probability that all events occur.
pub fn intersection_bound(p: &[f64]) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::Precondition("at least one probability is required".into()));
    }
    if let Some(bad) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Precondition(format!("probability {bad} outside [0, 1]")));
    }
    let total: f64 = p.iter().sum();
    Ok((total - p.len() as f64 + 1.0).max(0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubgameValue {
    pub history: Vec<ProfileIndex>,
    pub value_lo: f64,
    pub value_hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryReport {
    pub player: usize,
    pub kind: String,
    pub tail: bool,
    pub history_independent: bool,
    pub statement: String,
    pub subgame_values: Vec<SubgameValue>,
}

pub fn history_independence_report(game: &Game, i: usize) -> Result<HistoryReport> {
    let objective = game.objective(i);
    if objective.is_tail() {
        return Ok(HistoryReport {
            player: i,
            kind: objective.kind().into(),
            tail: true,
            history_independent: true,
            statement: "tail objective: the minmax value is the same after every history".into(),
            subgame_values: Vec::new(),
        });
    }
    let values = finite_horizon_values(game, i)?;
    let depth = values.lo.len().min(2);
    let mut subgame_values = Vec::new();
    for t in 0..depth {
        for h in 0..values.lo[t].len() {
            subgame_values.push(SubgameValue {
                history: game.sequence(h, t),
                value_lo: exact::to_f64(&values.lo[t][h]),
                value_hi: exact::to_f64(&values.hi[t][h]),
            });
        }
    }
    let varies = subgame_values
        .iter()
        .any(|s| s.value_lo != subgame_values[0].value_lo || s.value_hi != subgame_values[0].value_hi);
    Ok(HistoryReport {
        player: i,
        kind: objective.kind().into(),
        tail: false,
        history_independent: !varies,
        statement: if varies {
            "not a tail objective: history-dependent minmax values occur".into()
        } else {
            "not a tail objective: history-dependent values possible, none found at depth one".into()
        },
        subgame_values,
    })
}
