use serde::{Deserialize, Serialize};

use super::{Game, ProfileIndex};
use crate::{Error, Result};

pub const MIXED_TOLERANCE: f64 = 1e-9;

/// Probability weights over one player's actions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MixedAction(pub Vec<f64>);

impl MixedAction {
    pub fn pure(n_actions: usize, action: usize) -> Self {
        let mut w = vec![0.0; n_actions];
        w[action] = 1.0;
        MixedAction(w)
    }

    pub fn uniform(n_actions: usize) -> Self {
        MixedAction(vec![1.0 / n_actions as f64; n_actions])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn validate(&self, n_actions: usize) -> Result<()> {
        if self.0.len() != n_actions {
            return Err(Error::InvalidMixed(format!(
                "expected {n_actions} weights, got {}",
                self.0.len()
            )));
        }
        if self.0.iter().any(|w| !w.is_finite() || *w < -MIXED_TOLERANCE) {
            return Err(Error::InvalidMixed("weights must be finite and nonnegative".into()));
        }
        let sum: f64 = self.0.iter().sum();
        if (sum - 1.0).abs() > MIXED_TOLERANCE {
            return Err(Error::InvalidMixed(format!("weights sum to {sum}, not 1")));
        }
        Ok(())
    }

    /// The action played with probability one, if any.
    pub fn as_pure(&self) -> Option<usize> {
        let support: Vec<usize> = self.support().collect();
        (support.len() == 1).then(|| support[0])
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > MIXED_TOLERANCE)
            .map(|(a, _)| a)
    }
}

/// Independent mixed actions, one per player.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MixedProfile(pub Vec<MixedAction>);

impl MixedProfile {
    pub fn pure(game: &Game, profile: ProfileIndex) -> Self {
        MixedProfile(
            game.profile(profile)
                .into_iter()
                .enumerate()
                .map(|(i, a)| MixedAction::pure(game.n_actions(i), a))
                .collect(),
        )
    }

    pub fn uniform(game: &Game) -> Self {
        MixedProfile(
            (0..game.n_players())
                .map(|i| MixedAction::uniform(game.n_actions(i)))
                .collect(),
        )
    }

    pub fn player(&self, i: usize) -> &MixedAction {
        &self.0[i]
    }

    pub fn validate(&self, game: &Game) -> Result<()> {
        if self.0.len() != game.n_players() {
            return Err(Error::InvalidMixed(format!(
                "expected {} mixed actions, got {}",
                game.n_players(),
                self.0.len()
            )));
        }
        for (i, m) in self.0.iter().enumerate() {
            m.validate(game.n_actions(i))
                .map_err(|e| Error::InvalidMixed(format!("player {}: {e}", game.player_name(i))))?;
        }
        Ok(())
    }

    /// Probability of one profile under the product distribution.
    pub fn probability(&self, game: &Game, profile: ProfileIndex) -> f64 {
        (0..game.n_players())
            .map(|i| self.0[i].0[game.action_of(profile, i)])
            .product()
    }

    /// Profiles with positive probability, with their probabilities.
    pub fn distribution(&self, game: &Game) -> Vec<(ProfileIndex, f64)> {
        let mut out = vec![(0usize, 1.0f64)];
        for i in 0..game.n_players() {
            let stride = game.stride(i);
            let next: Vec<_> = out
                .iter()
                .flat_map(|&(p, w)| {
                    self.0[i]
                        .support()
                        .map(move |a| (p + a * stride, w * self.0[i].0[a]))
                        .collect::<Vec<_>>()
                })
                .collect();
            out = next;
        }
        out.sort_by_key(|(p, _)| *p);
        out
    }

    /// Pure profile when every player's action is deterministic.
    pub fn as_pure(&self, game: &Game) -> Option<ProfileIndex> {
        let actions: Option<Vec<usize>> = self.0.iter().map(MixedAction::as_pure).collect();
        actions.map(|a| game.profile_index(&a))
    }

    /// Replaces player `i`'s slot.
    pub fn with_player(&self, i: usize, action: MixedAction) -> Self {
        let mut out = self.clone();
        out.0[i] = action;
        out
    }
}
