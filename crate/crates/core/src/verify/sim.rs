use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::exact::{self, Rational};
use crate::model::{Game, MixedAction, MixedProfile, Objective, ProfileIndex, StrategyAutomaton};
use crate::values::BlockSchedule;
use crate::{Error, Result};

/// Normal-approximation quantile of a two-sided 95% interval.
const Z95: f64 = 1.96;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let std_err = (var / n).sqrt();
        Estimate {
            mean,
            std_err,
            ci_low: mean - Z95 * std_err,
            ci_high: mean + Z95 * std_err,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlayerEstimate {
    pub player: String,
    #[serde(flatten)]
    pub estimate: Estimate,
    /// Set when the horizon-limited statistic only stands in for the payoff.
    pub proxy: Option<&'static str>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub horizon: usize,
    pub reps: usize,
    pub seed: u64,
    pub players: Vec<PlayerEstimate>,
}

fn rng_for(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

fn sample(rng: &mut ChaCha8Rng, m: &MixedAction) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let weights = m.weights();
    for (a, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return a;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

fn sample_profile(game: &Game, rng: &mut ChaCha8Rng, x: &MixedProfile) -> ProfileIndex {
    (0..game.n_players()).fold(0, |p, j| p + sample(rng, x.player(j)) * game.stride(j))
}

/// One seeded play of `horizon` stages: profiles and the states they were
/// emitted from.
pub fn rollout(
    game: &Game,
    automaton: &StrategyAutomaton,
    horizon: usize,
    seed: u64,
    rep: usize,
) -> Vec<(ProfileIndex, usize)> {
    let mut rng = rng_for(seed, rep);
    let mut state = automaton.initial;
    (0..horizon)
        .map(|_| {
            let q = sample_profile(game, &mut rng, &automaton.emission[state]);
            let step = (q, state);
            state = automaton.next(state, q);
            step
        })
        .collect()
}

fn rollout_payoffs(game: &Game, path: &[ProfileIndex]) -> Vec<f64> {
    let t = path.len();
    let mut counts = vec![0usize; game.n_profiles()];
    for &q in path {
        counts[q] += 1;
    }
    let freq = |set: &crate::model::ProfileSet| {
        Rational::new(set.iter().map(|p| counts[p]).sum::<usize>().into(), t.into())
    };
    game.objectives()
        .iter()
        .map(|o| match o {
            Objective::InfinitelyOften { set } => {
                if path[t / 2..].iter().any(|&q| set.contains(q)) {
                    1.0
                } else {
                    0.0
                }
            }
            Objective::LimsupFrequency { set } => exact::to_f64(&freq(set)),
            Objective::ThresholdTable(table) => exact::to_f64(&table.evaluate(freq)),
            Objective::FiniteHorizon(table) => {
                exact::to_f64(&table.payoffs[game.sequence_index(&path[..table.horizon])])
            }
        })
        .collect()
}

/// Seeded rollouts; each repetition draws from its own stream, so results
/// do not depend on the thread count.
pub fn monte_carlo(
    game: &Game,
    automaton: &StrategyAutomaton,
    horizon: usize,
    reps: usize,
    seed: u64,
) -> Result<MonteCarloReport> {
    if horizon == 0 || reps == 0 {
        return Err(Error::Precondition("horizon and repetitions must be positive".into()));
    }
    if horizon < game.max_horizon() {
        return Err(Error::Precondition(format!(
            "horizon {horizon} is shorter than the finite-horizon tables ({})",
            game.max_horizon()
        )));
    }
    automaton.validate(game)?;
    let samples: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let path: Vec<ProfileIndex> = rollout(game, automaton, horizon, seed, rep)
                .into_iter()
                .map(|(q, _)| q)
                .collect();
            rollout_payoffs(game, &path)
        })
        .collect();
    let players = (0..game.n_players())
        .map(|i| {
            let xs: Vec<f64> = samples.iter().map(|s| s[i]).collect();
            PlayerEstimate {
                player: game.player_name(i).to_string(),
                estimate: Estimate::from_samples(&xs),
                proxy: matches!(game.objective(i), Objective::InfinitelyOften { .. })
                    .then_some("won in the final half of the horizon"),
            }
        })
        .collect();
    Ok(MonteCarloReport {
        horizon,
        reps,
        seed,
        players,
    })
}

/// Probability that the winning set of player `i` occurs in each of the
/// first `blocks` blocks when every stage is drawn from `profile`.
pub fn block_win_probability(
    game: &Game,
    schedule: &BlockSchedule,
    profile: &MixedProfile,
    blocks: usize,
    reps: usize,
    seed: u64,
) -> Result<Estimate> {
    let i = schedule.player;
    let set = match game.objective(i) {
        Objective::InfinitelyOften { set } | Objective::LimsupFrequency { set } => set.clone(),
        other => {
            return Err(Error::Unsupported {
                operation: "block_win_probability",
                kind: other.kind(),
            })
        }
    };
    if reps == 0 || blocks == 0 {
        return Err(Error::Precondition(
            "block and repetition counts must be positive".into(),
        ));
    }
    profile.validate(game)?;
    let samples: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng_for(seed, rep);
            let won_all = (0..blocks).all(|n| {
                let (start, end) = schedule.block(n);
                // Draw the whole block so every repetition uses the same
                // number of variates per block.
                let mut won = false;
                for _ in start..end {
                    won |= set.contains(sample_profile(game, &mut rng, profile));
                }
                won
            });
            if won_all {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(Estimate::from_samples(&samples))
}
