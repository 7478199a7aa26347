use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Game, MixedAction, MixedProfile, ProfileIndex, ProfileLabels};
use crate::{Error, Result};

/// Finite-state joint strategy: each state emits a product distribution over
/// profiles and moves on the observed profile.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategyAutomaton {
    pub labels: Vec<String>,
    pub initial: usize,
    pub emission: Vec<MixedProfile>,
    /// `transitions[state][profile]` is the next state.
    pub transitions: Vec<Vec<usize>>,
}

impl StrategyAutomaton {
    pub fn n_states(&self) -> usize {
        self.labels.len()
    }

    pub fn next(&self, state: usize, profile: ProfileIndex) -> usize {
        self.transitions[state][profile]
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn validate(&self, game: &Game) -> Result<()> {
        let n = self.n_states();
        if n == 0 {
            return Err(Error::InvalidAutomaton("no states".into()));
        }
        if self.initial >= n {
            return Err(Error::InvalidAutomaton("initial state out of range".into()));
        }
        if self.emission.len() != n || self.transitions.len() != n {
            return Err(Error::InvalidAutomaton(
                "emission and transition tables must have one row per state".into(),
            ));
        }
        for (s, row) in self.transitions.iter().enumerate() {
            if row.len() != game.n_profiles() {
                return Err(Error::InvalidAutomaton(format!(
                    "state {} has {} transitions, expected {}",
                    self.labels[s],
                    row.len(),
                    game.n_profiles()
                )));
            }
            if let Some(t) = row.iter().find(|&&t| t >= n) {
                return Err(Error::InvalidAutomaton(format!(
                    "state {} moves to unknown state {t}",
                    self.labels[s]
                )));
            }
        }
        for (s, e) in self.emission.iter().enumerate() {
            e.validate(game).map_err(|err| {
                Error::InvalidAutomaton(format!("state {}: {err}", self.labels[s]))
            })?;
        }
        Ok(())
    }

    /// States reachable from the initial state along any profile.
    pub fn reachable(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n_states()];
        let mut order = Vec::new();
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(s) = queue.pop_front() {
            order.push(s);
            for &t in &self.transitions[s] {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        order
    }

    pub fn to_doc(&self, game: &Game) -> AutomatonDoc {
        AutomatonDoc {
            players: game.players().to_vec(),
            profiles: game.profiles().map(|p| game.profile_labels(p)).collect(),
            initial: self.labels[self.initial].clone(),
            states: (0..self.n_states())
                .map(|s| StateDoc {
                    name: self.labels[s].clone(),
                    emission: game
                        .players()
                        .iter()
                        .enumerate()
                        .map(|(i, p)| {
                            let weights = game
                                .actions(i)
                                .iter()
                                .cloned()
                                .zip(self.emission[s].0[i].0.iter().copied())
                                .collect();
                            (p.clone(), weights)
                        })
                        .collect(),
                    next: self.transitions[s]
                        .iter()
                        .map(|&t| self.labels[t].clone())
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_doc(game: &Game, doc: &AutomatonDoc) -> Result<Self> {
        let bad = |msg: String| Error::InvalidAutomaton(msg);
        if doc.profiles.len() != game.n_profiles() {
            return Err(bad("profile list does not match the game".into()));
        }
        for (p, labels) in doc.profiles.iter().enumerate() {
            if game.parse_profile(labels) != Some(p) {
                return Err(bad(format!("profile {p} is listed out of order: {labels:?}")));
            }
        }
        let labels: Vec<String> = doc.states.iter().map(|s| s.name.clone()).collect();
        let index = |name: &str| {
            labels
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| bad(format!("unknown state `{name}`")))
        };
        let mut emission = Vec::new();
        let mut transitions = Vec::new();
        for state in &doc.states {
            let mut profile = Vec::new();
            for (i, player) in game.players().iter().enumerate() {
                let weights = state
                    .emission
                    .get(player)
                    .ok_or_else(|| bad(format!("state {} lacks player {player}", state.name)))?;
                let mut w = vec![0.0; game.n_actions(i)];
                for (action, weight) in weights {
                    let a = game
                        .actions(i)
                        .iter()
                        .position(|l| l == action)
                        .ok_or_else(|| bad(format!("unknown action `{action}`")))?;
                    w[a] = *weight;
                }
                profile.push(MixedAction(w));
            }
            emission.push(MixedProfile(profile));
            transitions.push(
                state
                    .next
                    .iter()
                    .map(|n| index(n))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let automaton = StrategyAutomaton {
            initial: index(&doc.initial)?,
            labels,
            emission,
            transitions,
        };
        automaton.validate(game)?;
        Ok(automaton)
    }
}

/// Label-based file form of a [`StrategyAutomaton`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutomatonDoc {
    pub players: Vec<String>,
    /// Profile order used by every `next` list.
    pub profiles: Vec<ProfileLabels>,
    pub initial: String,
    pub states: Vec<StateDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDoc {
    pub name: String,
    pub emission: BTreeMap<String, BTreeMap<String, f64>>,
    pub next: Vec<String>,
}
