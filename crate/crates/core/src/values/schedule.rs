use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::ZERO_ONE_TOLERANCE;
use crate::exact::{self, Rational};
use crate::model::{Game, MixedProfile, Objective, ProfileIndex, ProfileSet};
use crate::stage::{best_pure_punishment, best_response_value, stage_minmax, StageReward};
use crate::{Error, Result};

/// Cut points listed explicitly before the closed-form rule takes over.
pub const PREFIX_BLOCKS: usize = 8;

/// Largest number of histories enumerated by [`clopen_truncation`].
pub const DEFAULT_ENUMERATION_CAP: usize = 1 << 20;

/// Blocks `[t_n, t_{n+1})` in each of which the winning set must be hit.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSchedule {
    pub player: usize,
    pub epsilon: Rational,
    pub stage_value: Rational,
    /// `t_0 = 0 < t_1 < ... < t_K`.
    pub cuts: Vec<usize>,
}

impl BlockSchedule {
    /// Smallest `L` with `(1 - d/2)^L < 2^{-n-1} ε`.
    pub fn block_length(&self, n: usize) -> usize {
        let base = Rational::one() - &self.stage_value / exact::int(2);
        let bound = &self.epsilon / Rational::from_integer(num_bigint::BigInt::from(2u8).pow(n as u32 + 1));
        let mut power = Rational::one();
        let mut len = 0;
        while power >= bound {
            power *= &base;
            len += 1;
        }
        len
    }

    /// Cut point `t_n`, extending the listed prefix with the closed-form rule.
    pub fn cut(&self, n: usize) -> usize {
        if n < self.cuts.len() {
            return self.cuts[n];
        }
        let mut t = *self.cuts.last().expect("t_0 is always listed");
        for k in self.cuts.len() - 1..n {
            t += self.block_length(k);
        }
        t
    }

    pub fn block(&self, n: usize) -> (usize, usize) {
        (self.cut(n), self.cut(n + 1))
    }

    /// Whether `(1 - d/2)^{t_{n+1} - t_n} < 2^{-n-1} ε` holds for block `n`.
    pub fn satisfies_bound(&self, n: usize) -> bool {
        let (a, b) = self.block(n);
        let base = Rational::one() - &self.stage_value / exact::int(2);
        let bound = &self.epsilon / Rational::from_integer(num_bigint::BigInt::from(2u8).pow(n as u32 + 1));
        let mut power = Rational::one();
        for _ in a..b {
            power *= &base;
        }
        power < bound
    }

    /// Block index containing stage `t`.
    pub fn block_of(&self, t: usize) -> usize {
        let mut n = 0;
        while self.cut(n + 1) <= t {
            n += 1;
        }
        n
    }
}

fn unit_epsilon(epsilon: f64) -> Result<Rational> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Precondition(format!("epsilon {epsilon} must lie in (0, 1)")));
    }
    exact::snap(epsilon, exact::LITERAL_TOLERANCE)
        .ok_or_else(|| Error::Precondition("epsilon must be finite".into()))
}

fn infinitely_often_set<'a>(game: &'a Game, i: usize, operation: &'static str) -> Result<&'a ProfileSet> {
    match game.objective(i) {
        Objective::InfinitelyOften { set } => Ok(set),
        other => Err(Error::Unsupported {
            operation,
            kind: other.kind(),
        }),
    }
}

pub fn closed_block_approximation(game: &Game, i: usize, epsilon: f64) -> Result<BlockSchedule> {
    let set = infinitely_often_set(game, i, "closed_block_approximation")?;
    let epsilon = unit_epsilon(epsilon)?;
    let c = stage_minmax(game, &StageReward::indicator(game, i, set))?;
    if c.value_lo <= ZERO_ONE_TOLERANCE {
        return Err(Error::CannotCertify(format!(
            "stage value lower bound {} is not positive",
            c.value_lo
        )));
    }
    let mut schedule = BlockSchedule {
        player: i,
        epsilon,
        stage_value: c.lower(),
        cuts: vec![0],
    };
    for n in 0..PREFIX_BLOCKS {
        let next = schedule.cuts[n] + schedule.block_length(n);
        schedule.cuts.push(next);
    }
    Ok(schedule)
}

/// Per-stage punishments keeping the winning probability of stage `t` at most
/// `2^{-t-1} ε`.
#[derive(Clone, Debug, PartialEq)]
pub struct PunishmentSchedule {
    pub player: usize,
    pub epsilon: Rational,
    /// Used at every stage.
    pub punishment: MixedProfile,
    pub stage_value: f64,
}

impl PunishmentSchedule {
    pub fn punishment_at(&self, _t: usize) -> &MixedProfile {
        &self.punishment
    }

    pub fn bound_at(&self, t: usize) -> f64 {
        exact::to_f64(&self.epsilon) * 0.5f64.powi(t as i32 + 1)
    }

    /// Whether the best reply to stage `t`'s punishment respects the bound.
    pub fn check(&self, game: &Game, t: usize) -> bool {
        let set = match game.objective(self.player) {
            Objective::InfinitelyOften { set } => set,
            _ => return false,
        };
        let r = StageReward::indicator(game, self.player, set);
        best_response_value(game, &r, self.punishment_at(t)).0 <= self.bound_at(t)
    }
}

pub fn open_superset_schedule(game: &Game, i: usize, epsilon: f64) -> Result<PunishmentSchedule> {
    let set = infinitely_often_set(game, i, "open_superset_schedule")?;
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Precondition(format!("epsilon {epsilon} must lie in (0, 1]")));
    }
    let r = StageReward::indicator(game, i, set);
    let (v, p) = best_pure_punishment(game, &r);
    if !v.is_zero() {
        let c = stage_minmax(game, &r)?;
        return Err(Error::Precondition(format!(
            "stage value {} is positive: no punishment keeps the winning set away",
            c.value_lo
        )));
    }
    Ok(PunishmentSchedule {
        player: i,
        epsilon: exact::snap(epsilon, exact::LITERAL_TOLERANCE).expect("finite"),
        punishment: MixedProfile::pure(game, game.with_action(p, i, 0)),
        stage_value: 0.0,
    })
}

/// Closed target set whose length-`m` truncation is computed.
#[derive(Clone, Debug)]
pub enum TruncationTarget<'a> {
    /// Plays hitting the winning set in every block.
    Blocks(&'a BlockSchedule),
    /// Plays paying at least `threshold` to the player.
    AtLeast(Rational),
    /// Every play.
    All,
}

/// Length-`m` histories that still have a continuation inside the target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationSet {
    pub player: usize,
    pub horizon: usize,
    pub source: String,
    /// Sequence indices of the alive histories, ascending.
    pub alive: Vec<usize>,
}

impl TruncationSet {
    pub fn contains(&self, game: &Game, history: &[ProfileIndex]) -> bool {
        history.len() == self.horizon && self.alive.binary_search(&game.sequence_index(history)).is_ok()
    }

    pub fn len(&self) -> usize {
        self.alive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alive.is_empty()
    }

    pub fn histories(&self, game: &Game) -> Vec<Vec<ProfileIndex>> {
        self.alive.iter().map(|&h| game.sequence(h, self.horizon)).collect()
    }
}

pub fn clopen_truncation(
    game: &Game,
    i: usize,
    m: usize,
    target: &TruncationTarget,
    cap: usize,
) -> Result<TruncationSet> {
    let np = game.n_profiles();
    let total = np
        .checked_pow(m as u32)
        .filter(|&t| t <= cap)
        .ok_or_else(|| Error::resource(format!("{np}^{m} histories exceed the cap of {cap}")))?;
    let (source, alive): (String, Vec<usize>) = match target {
        TruncationTarget::All => ("all plays".into(), (0..total).collect()),
        TruncationTarget::Blocks(schedule) => {
            let set = infinitely_often_set(game, i, "clopen_truncation")?;
            let mut complete = Vec::new();
            let mut n = 0;
            while schedule.cut(n + 1) <= m {
                complete.push(schedule.block(n));
                n += 1;
            }
            let alive = (0..total)
                .filter(|&h| {
                    let seq = game.sequence(h, m);
                    complete
                        .iter()
                        .all(|&(a, b)| seq[a..b].iter().any(|&p| set.contains(p)))
                })
                .collect();
            (format!("{} complete blocks", complete.len()), alive)
        }
        TruncationTarget::AtLeast(threshold) => match game.objective(i) {
            Objective::FiniteHorizon(table) => {
                let horizon = table.horizon;
                let alive = (0..total)
                    .filter(|&h| {
                        if m >= horizon {
                            let prefix = game.sequence(h, m)[..horizon].to_vec();
                            &table.payoffs[game.sequence_index(&prefix)] >= threshold
                        } else {
                            let width = np.pow((horizon - m) as u32);
                            table.payoffs[h * width..(h + 1) * width]
                                .iter()
                                .any(|v| v >= threshold)
                        }
                    })
                    .collect();
                (
                    format!("payoff at least {}", exact::format_rational(threshold)),
                    alive,
                )
            }
            _ => (
                "tail objective: every history has an individually rational continuation".into(),
                (0..total).collect(),
            ),
        },
    };
    Ok(TruncationSet {
        player: i,
        horizon: m,
        source,
        alive,
    })
}
