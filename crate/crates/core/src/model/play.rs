use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{Game, Objective, ProfileIndex, ProfileLabels, ProfileSet};
use crate::exact::Rational;
use crate::{Error, Result};

/// Eventually periodic play: `preamble` followed by `cycle` repeated forever.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeriodicPlay {
    pub preamble: Vec<ProfileIndex>,
    pub cycle: Vec<ProfileIndex>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayLabels {
    pub preamble: Vec<ProfileLabels>,
    pub cycle: Vec<ProfileLabels>,
}

impl PeriodicPlay {
    pub fn new(preamble: Vec<ProfileIndex>, cycle: Vec<ProfileIndex>) -> Self {
        PeriodicPlay { preamble, cycle }
    }

    pub fn cycle(cycle: Vec<ProfileIndex>) -> Self {
        PeriodicPlay {
            preamble: Vec::new(),
            cycle,
        }
    }

    pub fn validate(&self, game: &Game) -> Result<()> {
        if self.cycle.is_empty() {
            return Err(Error::InvalidPlay("cycle must be nonempty".into()));
        }
        if let Some(p) = self
            .preamble
            .iter()
            .chain(&self.cycle)
            .find(|&&p| p >= game.n_profiles())
        {
            return Err(Error::InvalidPlay(format!("profile index {p} outside the game")));
        }
        Ok(())
    }

    /// Profile played at stage `t`.
    pub fn at(&self, t: usize) -> ProfileIndex {
        if t < self.preamble.len() {
            self.preamble[t]
        } else {
            self.cycle[(t - self.preamble.len()) % self.cycle.len()]
        }
    }

    pub fn prefix(&self, len: usize) -> Vec<ProfileIndex> {
        (0..len).map(|t| self.at(t)).collect()
    }

    pub fn path_len(&self) -> usize {
        self.preamble.len() + self.cycle.len()
    }

    pub fn to_labels(&self, game: &Game) -> PlayLabels {
        PlayLabels {
            preamble: self.preamble.iter().map(|&p| game.profile_labels(p)).collect(),
            cycle: self.cycle.iter().map(|&p| game.profile_labels(p)).collect(),
        }
    }

    pub fn from_labels(game: &Game, labels: &PlayLabels) -> Result<Self> {
        let parse = |list: &[ProfileLabels]| -> Result<Vec<ProfileIndex>> {
            list.iter()
                .map(|l| {
                    game.parse_profile(l)
                        .ok_or_else(|| Error::InvalidPlay(format!("unknown profile {l:?}")))
                })
                .collect()
        };
        let play = PeriodicPlay::new(parse(&labels.preamble)?, parse(&labels.cycle)?);
        play.validate(game)?;
        Ok(play)
    }

    pub fn describe(&self, game: &Game) -> String {
        let show = |v: &[ProfileIndex]| {
            v.iter()
                .map(|&p| game.format_profile(p))
                .collect::<Vec<_>>()
                .join(" ")
        };
        if self.preamble.is_empty() {
            format!("[{}]^w", show(&self.cycle))
        } else {
            format!("{} [{}]^w", show(&self.preamble), show(&self.cycle))
        }
    }

    /// Exact payoff of player `i`.
    pub fn evaluate(&self, game: &Game, i: usize) -> Result<Rational> {
        self.validate(game)?;
        let freq = frequency_vector(&self.cycle);
        let frequency_of = |set: &ProfileSet| set_frequency(&freq, set);
        let objective = game.objective(i);
        Ok(match objective {
            Objective::FiniteHorizon(t) => {
                t.payoffs[game.sequence_index(&self.prefix(t.horizon))].clone()
            }
            _ => objective
                .evaluate_tail(frequency_of, |p| freq.contains_key(&p))
                .expect("tail objective"),
        })
    }

    pub fn evaluate_all(&self, game: &Game) -> Result<Vec<Rational>> {
        (0..game.n_players()).map(|i| self.evaluate(game, i)).collect()
    }
}

/// Exact frequency of each profile in a cycle, counted with multiplicity.
pub fn frequency_vector(cycle: &[ProfileIndex]) -> BTreeMap<ProfileIndex, Rational> {
    let mut counts: BTreeMap<ProfileIndex, usize> = BTreeMap::new();
    for &p in cycle {
        *counts.entry(p).or_default() += 1;
    }
    let len = cycle.len() as i64;
    counts
        .into_iter()
        .map(|(p, c)| (p, crate::exact::rat(c as i64, len)))
        .collect()
}

pub(crate) fn set_frequency(freq: &BTreeMap<ProfileIndex, Rational>, set: &ProfileSet) -> Rational {
    set.iter()
        .filter_map(|p| freq.get(&p))
        .fold(Rational::zero(), |acc, f| acc + f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};
    use proptest::prelude::*;

    const FOUR_OUTCOMES: &str = r#"{
      "players": ["1", "2"],
      "actions": {"1": ["T", "M", "B"], "2": ["L", "C", "R"]},
      "objectives": {
        "1": {"kind": "threshold_table", "default": 0, "rules": [
          {"condition": {"profiles": [["T","L"],["M","C"]], "relation": "greater", "threshold": 0.5}, "payoff": 1},
          {"condition": {"profiles": [["B","L"]], "relation": "equals_one"}, "payoff": 4},
          {"condition": {"profiles": [["T","R"]], "relation": "equals_one"}, "payoff": -1}]},
        "2": {"kind": "threshold_table", "default": 0, "rules": [
          {"condition": {"profiles": [["T","L"],["M","C"]], "relation": "greater", "threshold": 0.5}, "payoff": 1},
          {"condition": {"profiles": [["B","L"]], "relation": "equals_one"}, "payoff": -1},
          {"condition": {"profiles": [["T","R"]], "relation": "equals_one"}, "payoff": 4}]}
      },
      "payoff_bounds": {"1": [-1, 4], "2": [-1, 4]}
    }"#;

    const PENNIES: &str = r#"{
      "players": ["1", "2"],
      "actions": {"1": ["H", "T"], "2": ["H", "T"]},
      "objectives": {
        "1": {"kind": "limsup_frequency", "profiles": [["H","H"],["T","T"]]},
        "2": {"kind": "limsup_frequency", "profiles": [["H","T"],["T","H"]]}
      },
      "payoff_bounds": {"1": [0, 1], "2": [0, 1]}
    }"#;

    fn profile(game: &Game, a: &str, b: &str) -> ProfileIndex {
        game.parse_profile(&[a.into(), b.into()]).unwrap()
    }

    #[test]
    fn single_profile_cycle_in_threshold_game() {
        let game = Game::from_json(FOUR_OUTCOMES).unwrap();
        let bl = PeriodicPlay::cycle(vec![profile(&game, "B", "L")]);
        assert_eq!(bl.evaluate_all(&game).unwrap(), vec![int(4), int(-1)]);
        let tl = PeriodicPlay::cycle(vec![profile(&game, "T", "L")]);
        assert_eq!(tl.evaluate_all(&game).unwrap(), vec![int(1), int(1)]);
        let half = PeriodicPlay::cycle(vec![profile(&game, "T", "L"), profile(&game, "B", "R")]);
        assert_eq!(half.evaluate_all(&game).unwrap(), vec![int(0), int(0)]);
    }

    #[test]
    fn frequency_payoff_is_cycle_proportion() {
        let game = Game::from_json(PENNIES).unwrap();
        let (hh, ht) = (profile(&game, "H", "H"), profile(&game, "H", "T"));
        let play = PeriodicPlay::cycle(vec![hh, ht]);
        assert_eq!(play.evaluate(&game, 0).unwrap(), rat(1, 2));
        for (m1, m2) in [(1usize, 4usize), (3, 7), (5, 5)] {
            let mut cycle = vec![hh; m1];
            cycle.extend(vec![ht; m2]);
            let play = PeriodicPlay::cycle(cycle);
            let m = (m1 + m2) as i64;
            assert_eq!(
                play.evaluate_all(&game).unwrap(),
                vec![rat(m1 as i64, m), rat(m2 as i64, m)]
            );
        }
    }

    #[test]
    fn frequency_vector_counts_multiplicity() {
        assert_eq!(frequency_vector(&[0]), BTreeMap::from([(0, int(1))]));
        assert_eq!(
            frequency_vector(&[0, 3]),
            BTreeMap::from([(0, rat(1, 2)), (3, rat(1, 2))])
        );
        assert_eq!(
            frequency_vector(&[0, 1, 0]),
            BTreeMap::from([(0, rat(2, 3)), (1, rat(1, 3))])
        );
    }

    #[test]
    fn invalid_plays_are_rejected() {
        let game = Game::from_json(PENNIES).unwrap();
        assert!(matches!(
            PeriodicPlay::cycle(vec![]).evaluate(&game, 0),
            Err(Error::InvalidPlay(_))
        ));
        assert!(matches!(
            PeriodicPlay::cycle(vec![4]).evaluate(&game, 0),
            Err(Error::InvalidPlay(_))
        ));
    }

    fn finite_horizon_game() -> Game {
        let labels = [["a", "a"], ["a", "b"]];
        let mut table = Vec::new();
        for (x, first) in labels.iter().enumerate() {
            for (y, second) in labels.iter().enumerate() {
                table.push(format!(
                    r#"{{"history": [["{}","{}"],["{}","{}"]], "payoff": {}}}"#,
                    first[0], first[1], second[0], second[1], 2 * x + y
                ));
            }
        }
        let objective = format!(
            r#"{{"kind": "finite_horizon", "horizon": 2, "table": [{}]}}"#,
            table.join(",")
        );
        Game::from_json(&format!(
            r#"{{"players": ["p", "q"], "actions": {{"p": ["a"], "q": ["a", "b"]}},
                "objectives": {{"p": {objective}, "q": {objective}}},
                "payoff_bounds": {{"p": [0, 3], "q": [0, 3]}}}}"#
        ))
        .unwrap()
    }

    proptest! {
        #[test]
        fn frequencies_sum_to_one(cycle in prop::collection::vec(0usize..9, 1..40)) {
            let total = frequency_vector(&cycle).values().fold(Rational::zero(), |a, b| a + b);
            prop_assert_eq!(total, int(1));
        }

        #[test]
        fn evaluation_ignores_rotation_and_repetition(
            cycle in prop::collection::vec(0usize..9, 1..20),
            shift in 0usize..20,
            player in 0usize..2,
        ) {
            let game = Game::from_json(FOUR_OUTCOMES).unwrap();
            let base = PeriodicPlay::cycle(cycle.clone());
            let mut rotated = cycle.clone();
            rotated.rotate_left(shift % cycle.len());
            let doubled = [cycle.clone(), cycle.clone()].concat();
            let v = base.evaluate(&game, player).unwrap();
            prop_assert_eq!(&PeriodicPlay::cycle(rotated).evaluate(&game, player).unwrap(), &v);
            prop_assert_eq!(&PeriodicPlay::cycle(doubled).evaluate(&game, player).unwrap(), &v);
        }

        #[test]
        fn infinitely_often_is_zero_or_one(
            cycle in prop::collection::vec(0usize..4, 1..10),
            preamble in prop::collection::vec(0usize..4, 0..5),
        ) {
            let game = Game::from_json(&PENNIES.replace("limsup_frequency", "infinitely_often")).unwrap();
            let v = PeriodicPlay::new(preamble, cycle).evaluate(&game, 0).unwrap();
            prop_assert!(v == int(0) || v == int(1));
        }

        #[test]
        fn finite_horizon_ignores_suffix(
            prefix in prop::collection::vec(0usize..2, 2),
            tail in prop::collection::vec(0usize..2, 0..6),
            cycle in prop::collection::vec(0usize..2, 1..4),
        ) {
            let game = finite_horizon_game();
            let short = PeriodicPlay::new(prefix.clone(), vec![0]);
            let long = PeriodicPlay::new([prefix, tail].concat(), cycle);
            prop_assert_eq!(short.evaluate(&game, 0).unwrap(), long.evaluate(&game, 0).unwrap());
        }
    }
}
