use super::lottery::Lottery;
use crate::model::{Game, MixedAction, MixedProfile, PeriodicPlay, ProfileIndex, StrategyAutomaton};
use crate::{Error, Result};

/// Follows `play` and switches for ever to the punishment of the
/// lowest-indexed player whose action differed from the prescription.
pub fn grim_trigger(
    game: &Game,
    play: &PeriodicPlay,
    punishments: &[MixedProfile],
) -> Result<StrategyAutomaton> {
    compose(game, None, std::slice::from_ref(play), punishments)
}

/// Lowest deviator from `prescribed`, if any.
fn deviator(game: &Game, prescribed: ProfileIndex, observed: ProfileIndex) -> Option<usize> {
    (0..game.n_players()).find(|&i| game.action_of(prescribed, i) != game.action_of(observed, i))
}

/// The two lowest-indexed players with at least two actions.
pub fn lottery_players(game: &Game) -> Result<[usize; 2]> {
    let mut it = (0..game.n_players()).filter(|&i| game.n_actions(i) >= 2);
    match (it.next(), it.next()) {
        (Some(a), Some(b)) => Ok([a, b]),
        _ => Err(Error::Precondition(
            "a lottery needs two players with at least two actions".into(),
        )),
    }
}

/// Jointly controlled lottery over `plays`, each continued by grim trigger.
pub fn lottery_automaton(
    game: &Game,
    lottery: &Lottery,
    plays: &[PeriodicPlay],
    punishments: &[MixedProfile],
) -> Result<StrategyAutomaton> {
    compose(game, Some(lottery), plays, punishments)
}

/// Lottery rounds, then the grim-trigger continuation of the selected play.
pub(crate) fn compose(
    game: &Game,
    lottery: Option<&Lottery>,
    plays: &[PeriodicPlay],
    punishments: &[MixedProfile],
) -> Result<StrategyAutomaton> {
    let n = game.n_players();
    if punishments.len() != n {
        return Err(Error::InvalidMixed(format!(
            "expected {n} punishment profiles, got {}",
            punishments.len()
        )));
    }
    for (i, p) in punishments.iter().enumerate() {
        p.validate(game)
            .map_err(|e| Error::InvalidMixed(format!("punishment of {}: {e}", game.player_name(i))))?;
    }
    for play in plays {
        play.validate(game)?;
    }
    let rounds = lottery.map_or(0, |l| l.rounds);
    if rounds > 0 && plays.len() != lottery.map_or(1, |l| l.n_outcomes()) {
        return Err(Error::Precondition("one play per lottery outcome".into()));
    }
    if rounds == 0 && plays.len() != 1 {
        return Err(Error::Precondition("several plays need a lottery".into()));
    }

    let lottery_states = (1usize << rounds) - 1;
    let mut play_start = Vec::new();
    let mut offset = lottery_states;
    for play in plays {
        play_start.push(offset);
        offset += play.path_len();
    }
    let punish_start = offset;
    let total = punish_start + n;
    let mut labels = Vec::with_capacity(total);
    let mut emission = Vec::with_capacity(total);
    let mut transitions = Vec::with_capacity(total);

    if let Some(l) = lottery.filter(|_| rounds > 0) {
        let [a, b] = lottery_players(game)?;
        let coin = MixedProfile(
            (0..n)
                .map(|j| {
                    if j == a || j == b {
                        let mut w = vec![0.0; game.n_actions(j)];
                        w[0] = 0.5;
                        w[1] = 0.5;
                        MixedAction(w)
                    } else {
                        MixedAction::pure(game.n_actions(j), 0)
                    }
                })
                .collect(),
        );
        for r in 0..rounds {
            for prefix in 0..1usize << r {
                labels.push(if r == 0 {
                    "lottery".to_string()
                } else {
                    format!("lottery:{prefix:0r$b}")
                });
                emission.push(coin.clone());
                let row = game
                    .profiles()
                    .map(|q| {
                        let cheat = (0..n).find(|&j| {
                            let act = game.action_of(q, j);
                            if j == a || j == b {
                                act >= 2
                            } else {
                                act != 0
                            }
                        });
                        if let Some(j) = cheat {
                            return punish_start + j;
                        }
                        let bit = (game.action_of(q, a) ^ game.action_of(q, b)) & 1;
                        let next = 2 * prefix + bit;
                        if r + 1 == rounds {
                            play_start[l.outcome(next as u64)]
                        } else {
                            (1usize << (r + 1)) - 1 + next
                        }
                    })
                    .collect();
                transitions.push(row);
            }
        }
    }

    for (k, play) in plays.iter().enumerate() {
        let len = play.path_len();
        for t in 0..len {
            labels.push(if plays.len() == 1 {
                format!("path:{t}")
            } else {
                format!("play{k}:{t}")
            });
            let prescribed = play.at(t);
            emission.push(MixedProfile::pure(game, prescribed));
            let follow = play_start[k] + if t + 1 == len { play.preamble.len() } else { t + 1 };
            transitions.push(
                game.profiles()
                    .map(|q| match deviator(game, prescribed, q) {
                        None => follow,
                        Some(j) => punish_start + j,
                    })
                    .collect(),
            );
        }
    }

    for (i, p) in punishments.iter().enumerate() {
        labels.push(format!("punish:{}", game.player_name(i)));
        emission.push(p.with_player(i, MixedAction::pure(game.n_actions(i), 0)));
        transitions.push(vec![punish_start + i; game.n_profiles()]);
    }

    let automaton = StrategyAutomaton {
        labels,
        initial: 0,
        emission,
        transitions,
    };
    automaton.validate(game)?;
    Ok(automaton)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::lottery::jcl_preamble;
    use crate::exact::rat;

    fn pennies() -> Game {
        Game::from_json(include_str!("../../tests/data/pennies_limsup.json")).unwrap()
    }

    fn p(game: &Game, a: &str, b: &str) -> ProfileIndex {
        game.parse_profile(&[a.into(), b.into()]).unwrap()
    }

    #[test]
    fn pennies_grim_trigger_shape() {
        let g = pennies();
        let play = PeriodicPlay::cycle(vec![p(&g, "H", "H"), p(&g, "H", "T")]);
        let uniform = vec![MixedProfile::uniform(&g); 2];
        let a = grim_trigger(&g, &play, &uniform).unwrap();
        assert_eq!(a.n_states(), 4);
        assert_eq!(a.labels, vec!["path:0", "path:1", "punish:1", "punish:2"]);
        assert_eq!(a.next(0, p(&g, "H", "H")), 1);
        assert_eq!(a.next(1, p(&g, "H", "T")), 0);
        // Player 2 deviates at the first stage.
        assert_eq!(a.next(0, p(&g, "H", "T")), 3);
        // Simultaneous deviation punishes the lower index.
        assert_eq!(a.next(0, p(&g, "T", "T")), 2);
        for s in [2, 3] {
            assert!(a.transitions[s].iter().all(|&t| t == s));
        }
        assert_eq!(a.emission[2].player(0).as_pure(), Some(0));
        assert_eq!(a.emission[2].player(1), &MixedAction::uniform(2));
    }

    #[test]
    fn one_player_single_profile() {
        let g = Game::from_json(
            r#"{"players": ["solo"], "actions": {"solo": ["a", "b"]},
                "objectives": {"solo": {"kind": "infinitely_often", "profiles": [["a"]]}},
                "payoff_bounds": {"solo": [0, 1]}}"#,
        )
        .unwrap();
        let play = PeriodicPlay::cycle(vec![0]);
        let a = grim_trigger(&g, &play, &[MixedProfile::pure(&g, 0)]).unwrap();
        assert_eq!(a.n_states(), 2);
        assert_eq!(a.next(0, 0), 0);
        assert_eq!(a.next(0, 1), 1);
    }

    #[test]
    fn preamble_is_visited_once() {
        let g = pennies();
        let play = PeriodicPlay::new(vec![p(&g, "T", "T")], vec![p(&g, "H", "H")]);
        let a = grim_trigger(&g, &play, &vec![MixedProfile::uniform(&g); 2]).unwrap();
        assert_eq!(a.next(0, p(&g, "T", "T")), 1);
        assert_eq!(a.next(1, p(&g, "H", "H")), 1);
    }

    #[test]
    fn rejects_bad_punishments() {
        let g = pennies();
        let play = PeriodicPlay::cycle(vec![0]);
        assert!(grim_trigger(&g, &play, &[MixedProfile::uniform(&g)]).is_err());
        let bad = MixedProfile(vec![MixedAction(vec![0.7, 0.7]), MixedAction::uniform(2)]);
        assert!(matches!(
            grim_trigger(&g, &play, &[bad.clone(), bad]),
            Err(Error::InvalidMixed(_))
        ));
    }

    #[test]
    fn lottery_tree_routes_to_plays() {
        let g = pennies();
        let l = jcl_preamble(&[rat(1, 4), rat(3, 4)], 2).unwrap();
        let plays = vec![
            PeriodicPlay::cycle(vec![p(&g, "H", "H")]),
            PeriodicPlay::cycle(vec![p(&g, "T", "H")]),
        ];
        let a = compose(&g, Some(&l), &plays, &vec![MixedProfile::uniform(&g); 2]).unwrap();
        assert_eq!(a.n_states(), 3 + 2 + 2);
        // Bits 0 then 0 select the first play; any other pattern the second.
        let s = a.next(0, p(&g, "H", "H"));
        assert_eq!(a.next(s, p(&g, "T", "T")), 3);
        assert_eq!(a.next(s, p(&g, "H", "T")), 4);
        let s = a.next(0, p(&g, "T", "H"));
        assert_eq!(a.next(s, p(&g, "H", "H")), 4);
    }
}
