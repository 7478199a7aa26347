//! Stage-game minmax values.
//!
//! Two-player stage games are solved exactly as zero-sum matrix games. With
//! three or more players the opponents must mix independently, which makes
//! the problem nonconvex; there the solver returns a bracket whose lower end
//! is the correlated-opponent value (an exact LP) and whose upper end is the
//! best punishment found among pure opponent profiles and seeded alternating
//! minimisation runs.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exact::{self, Rational};
use crate::lp::{LinearProgram, LpSolution, Relation, Scalar};
use crate::model::{Game, MixedAction, MixedProfile, ProfileIndex, ProfileSet};
use crate::{Error, Result};

/// Largest duality gap accepted from the floating-point matrix solver.
pub const DUALITY_GAP: f64 = 1e-9;

/// Reward of player `player` for each profile of the stage game.
#[derive(Clone, Debug, PartialEq)]
pub struct StageReward {
    pub player: usize,
    pub values: Vec<Rational>,
}

impl StageReward {
    pub fn new(game: &Game, player: usize, values: Vec<Rational>) -> Result<Self> {
        if values.len() != game.n_profiles() {
            return Err(Error::Precondition(format!(
                "stage reward has {} entries, the game has {} profiles",
                values.len(),
                game.n_profiles()
            )));
        }
        Ok(StageReward { player, values })
    }

    pub fn from_f64(game: &Game, player: usize, values: &[f64]) -> Result<Self> {
        let values = values
            .iter()
            .map(|&v| {
                exact::snap(v, exact::LITERAL_TOLERANCE)
                    .ok_or_else(|| Error::Precondition(format!("non-finite reward entry {v}")))
            })
            .collect::<Result<Vec<_>>>()?;
        StageReward::new(game, player, values)
    }

    pub fn indicator(game: &Game, player: usize, set: &ProfileSet) -> Self {
        StageReward {
            player,
            values: game
                .profiles()
                .map(|p| if set.contains(p) { Rational::one() } else { Rational::zero() })
                .collect(),
        }
    }

    pub fn constant(game: &Game, player: usize, c: Rational) -> Self {
        StageReward {
            player,
            values: vec![c; game.n_profiles()],
        }
    }

    pub fn value(&self, profile: ProfileIndex) -> &Rational {
        &self.values[profile]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    LpExact,
    Alternating,
    ExhaustivePure,
    ZeroOneLaw,
    StationaryPatterns,
    BackwardInduction,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::LpExact => "lp_exact",
            Method::Alternating => "alternating",
            Method::ExhaustivePure => "exhaustive_pure",
            Method::ZeroOneLaw => "zero_one_law",
            Method::StationaryPatterns => "stationary_patterns",
            Method::BackwardInduction => "backward_induction",
        }
    }
}

/// Value bracket for one player together with a punishment attaining the
/// upper end. The punished player's own slot holds its first action.
#[derive(Clone, Debug, PartialEq)]
pub struct MinmaxCertificate {
    pub player: usize,
    pub value_lo: f64,
    pub value_hi: f64,
    /// Set when the value is known exactly; then `value_lo == value_hi`.
    pub exact: Option<Rational>,
    pub punishment: MixedProfile,
    pub method: Method,
    pub tolerance: f64,
    pub notes: Vec<String>,
}

impl MinmaxCertificate {
    pub fn is_resolved(&self) -> bool {
        self.value_hi - self.value_lo <= self.tolerance.max(DUALITY_GAP)
    }

    /// Conservative rational lower end of the bracket.
    pub fn lower(&self) -> Rational {
        self.exact
            .clone()
            .unwrap_or_else(|| Rational::from_float(self.value_lo).unwrap_or_else(Rational::zero))
    }

    pub fn upper(&self) -> Rational {
        self.exact
            .clone()
            .unwrap_or_else(|| Rational::from_float(self.value_hi).unwrap_or_else(Rational::zero))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixGameSolution<T> {
    pub value: T,
    pub row: Vec<T>,
    pub col: Vec<T>,
}

/// Zero-sum matrix game, row player maximising.
pub fn matrix_game_solve(m: &[Vec<f64>]) -> Result<MatrixGameSolution<f64>> {
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("matrix has non-finite entries".into()));
    }
    solve_matrix(m)
}

/// Exact rational version of [`matrix_game_solve`].
pub fn matrix_game_solve_exact(m: &[Vec<Rational>]) -> Result<MatrixGameSolution<Rational>> {
    solve_matrix(m)
}

fn solve_matrix<T: Scalar>(m: &[Vec<T>]) -> Result<MatrixGameSolution<T>> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || m.iter().any(|r| r.len() != cols) {
        return Err(Error::Precondition("matrix must be nonempty and rectangular".into()));
    }
    let min = m
        .iter()
        .flatten()
        .fold(m[0][0].clone(), |a, b| if b < &a { b.clone() } else { a });
    let shift = T::one() - min;
    let shifted: Vec<Vec<T>> = m
        .iter()
        .map(|r| r.iter().map(|v| v.clone() + shift.clone()).collect())
        .collect();

    let mut primal = LinearProgram::new(rows + 1);
    let mut obj = vec![T::zero(); rows + 1];
    obj[rows] = T::one();
    primal.maximize(obj);
    for j in 0..cols {
        let mut c: Vec<T> = (0..rows).map(|i| shifted[i][j].clone()).collect();
        c.push(-T::one());
        primal.add(c, Relation::Ge, T::zero());
    }
    let mut sum = vec![T::one(); rows + 1];
    sum[rows] = T::zero();
    primal.add(sum, Relation::Eq, T::one());

    let mut dual = LinearProgram::new(cols + 1);
    let mut obj = vec![T::zero(); cols + 1];
    obj[cols] = -T::one();
    dual.maximize(obj);
    for row in &shifted {
        let mut c = row.clone();
        c.push(-T::one());
        dual.add(c, Relation::Le, T::zero());
    }
    let mut sum = vec![T::one(); cols + 1];
    sum[cols] = T::zero();
    dual.add(sum, Relation::Eq, T::one());

    let failure = |what: &str| Error::SolverFailure(format!("matrix game {what} LP did not solve"));
    let (mut x, v) = match primal.solve()? {
        LpSolution::Optimal { x, value } => (x, value),
        _ => return Err(failure("row")),
    };
    let (mut y, neg_w) = match dual.solve()? {
        LpSolution::Optimal { x, value } => (x, value),
        _ => return Err(failure("column")),
    };
    let w = -neg_w;
    let gap = (v.clone() - w).abs().as_f64();
    if !(gap <= DUALITY_GAP) {
        return Err(Error::SolverFailure(format!("duality gap {gap:e} exceeds tolerance")));
    }
    x.pop();
    y.pop();
    Ok(MatrixGameSolution {
        value: v - shift,
        row: normalise(x),
        col: normalise(y),
    })
}

fn normalise<T: Scalar>(mut w: Vec<T>) -> Vec<T> {
    for v in w.iter_mut() {
        if v.lt_zero() || v.near_zero() {
            *v = T::zero();
        }
    }
    let total = w.iter().fold(T::zero(), |a, b| a + b.clone());
    w.into_iter().map(|v| v / total.clone()).collect()
}

/// Expected reward of each of player `i`'s actions against the opponents'
/// slots of `x` (player `i`'s own slot is ignored).
pub fn action_values(game: &Game, r: &StageReward, x: &MixedProfile) -> Vec<f64> {
    let i = r.player;
    let base = x.with_player(i, MixedAction::pure(game.n_actions(i), 0));
    let dist = base.distribution(game);
    (0..game.n_actions(i))
        .map(|a| {
            dist.iter()
                .map(|&(p, w)| w * exact::to_f64(r.value(game.with_action(p, i, a))))
                .sum()
        })
        .collect()
}

/// Exact counterpart of [`action_values`] for rational opponent weights.
pub fn action_values_exact(game: &Game, r: &StageReward, x: &[Vec<Rational>]) -> Vec<Rational> {
    let i = r.player;
    let mut values = vec![Rational::zero(); game.n_actions(i)];
    for p in game.opponent_profiles(i) {
        let w = (0..game.n_players())
            .filter(|&j| j != i)
            .fold(Rational::one(), |acc, j| acc * &x[j][game.action_of(p, j)]);
        if w.is_zero() {
            continue;
        }
        for (a, v) in values.iter_mut().enumerate() {
            *v += &w * r.value(game.with_action(p, i, a));
        }
    }
    values
}

/// Best pure reply of player `r.player`; ties go to the lowest action index.
pub fn best_response_value(game: &Game, r: &StageReward, x: &MixedProfile) -> (f64, usize) {
    let values = action_values(game, r, x);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let arg = values
        .iter()
        .position(|&v| v >= max - 1e-12)
        .unwrap_or(0);
    (max, arg)
}

pub fn best_response_value_exact(
    game: &Game,
    r: &StageReward,
    x: &[Vec<Rational>],
) -> (Rational, usize) {
    let values = action_values_exact(game, r, x);
    let mut best = 0;
    for a in 1..values.len() {
        if values[a] > values[best] {
            best = a;
        }
    }
    (values[best].clone(), best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StageConfig {
    /// Random starting points for alternating minimisation (three or more players).
    pub starts: usize,
    pub seed: u64,
    pub max_rounds: usize,
}

impl Default for StageConfig {
    fn default() -> Self {
        StageConfig {
            starts: 16,
            seed: 0,
            max_rounds: 100,
        }
    }
}

pub fn stage_minmax(game: &Game, r: &StageReward) -> Result<MinmaxCertificate> {
    stage_minmax_with(game, r, &StageConfig::default())
}

pub fn stage_minmax_with(
    game: &Game,
    r: &StageReward,
    config: &StageConfig,
) -> Result<MinmaxCertificate> {
    let i = r.player;
    if r.values.len() != game.n_profiles() {
        return Err(Error::Precondition("stage reward is not total".into()));
    }
    match game.n_players() {
        1 => {
            let (v, a) = best_response_value_exact(game, r, &[vec![Rational::one()]]);
            let _ = a;
            Ok(exact_certificate(game, i, v, MixedProfile(vec![MixedAction::pure(game.n_actions(0), 0)]), Method::LpExact))
        }
        2 => {
            let j = 1 - i;
            let matrix: Vec<Vec<Rational>> = (0..game.n_actions(i))
                .map(|a| {
                    (0..game.n_actions(j))
                        .map(|b| {
                            let mut acts = vec![0; 2];
                            acts[i] = a;
                            acts[j] = b;
                            r.value(game.profile_index(&acts)).clone()
                        })
                        .collect()
                })
                .collect();
            let sol = matrix_game_solve_exact(&matrix)?;
            let mut punishment = vec![MixedAction::pure(game.n_actions(i), 0); 2];
            punishment[j] = MixedAction(sol.col.iter().map(exact::to_f64).collect());
            Ok(exact_certificate(game, i, sol.value, MixedProfile(punishment), Method::LpExact))
        }
        _ => bracket(game, r, config),
    }
}

fn exact_certificate(
    _game: &Game,
    player: usize,
    value: Rational,
    punishment: MixedProfile,
    method: Method,
) -> MinmaxCertificate {
    let v = exact::to_f64(&value);
    MinmaxCertificate {
        player,
        value_lo: v,
        value_hi: v,
        exact: Some(value),
        punishment,
        method,
        tolerance: DUALITY_GAP,
        notes: Vec::new(),
    }
}

/// Correlated-opponent value: an exact lower bound on the independent minmax.
pub fn correlated_lower_bound(game: &Game, r: &StageReward) -> Result<Rational> {
    let i = r.player;
    let opp = game.opponent_profiles(i);
    let matrix: Vec<Vec<Rational>> = (0..game.n_actions(i))
        .map(|a| {
            opp.iter()
                .map(|&p| r.value(game.with_action(p, i, a)).clone())
                .collect()
        })
        .collect();
    Ok(matrix_game_solve_exact(&matrix)?.value)
}

/// Best pure opponent profile: exact value and profile (player `i` at action 0).
pub fn best_pure_punishment(game: &Game, r: &StageReward) -> (Rational, ProfileIndex) {
    let i = r.player;
    game.opponent_profiles(i)
        .into_iter()
        .map(|p| {
            let v = (0..game.n_actions(i))
                .map(|a| r.value(game.with_action(p, i, a)))
                .max()
                .expect("nonempty action set")
                .clone();
            (v, p)
        })
        .min_by(|a, b| a.0.cmp(&b.0))
        .expect("nonempty profile space")
}

fn bracket(game: &Game, r: &StageReward, config: &StageConfig) -> Result<MinmaxCertificate> {
    let i = r.player;
    let lo = correlated_lower_bound(game, r)?;
    let (pure_v, pure_p) = best_pure_punishment(game, r);
    if pure_v == lo {
        return Ok(MinmaxCertificate {
            notes: vec!["pure punishment meets the correlated lower bound".into()],
            ..exact_certificate(
                game,
                i,
                lo,
                MixedProfile::pure(game, game.with_action(pure_p, i, 0)),
                Method::ExhaustivePure,
            )
        });
    }
    let runs: Vec<(f64, MixedProfile)> = (0..config.starts)
        .into_par_iter()
        .map(|k| alternating_run(game, r, config, k as u64))
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(f64, MixedProfile)> = None;
    for run in runs {
        if best.as_ref().is_none_or(|b| run.0 < b.0) {
            best = Some(run);
        }
    }
    let pure_f = exact::to_f64(&pure_v);
    let lo_f = exact::to_f64(&lo);
    let (hi, punishment, method) = match best {
        Some((v, x)) if v < pure_f => (v, x, Method::Alternating),
        _ => (pure_f, MixedProfile::pure(game, pure_p), Method::ExhaustivePure),
    };
    Ok(MinmaxCertificate {
        player: i,
        value_lo: lo_f,
        value_hi: hi.max(lo_f),
        exact: None,
        punishment,
        method,
        tolerance: (hi - lo_f).max(0.0),
        notes: vec![format!(
            "bracket from correlated lower bound and {} alternating starts",
            config.starts
        )],
    })
}

fn alternating_run(
    game: &Game,
    r: &StageReward,
    config: &StageConfig,
    start: u64,
) -> Result<(f64, MixedProfile)> {
    let i = r.player;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(start);
    let mut x = MixedProfile(
        (0..game.n_players())
            .map(|j| {
                if j == i {
                    return MixedAction::pure(game.n_actions(j), 0);
                }
                let raw: Vec<f64> = (0..game.n_actions(j)).map(|_| rng.random::<f64>() + 1e-3).collect();
                let total: f64 = raw.iter().sum();
                MixedAction(raw.into_iter().map(|w| w / total).collect())
            })
            .collect(),
    );
    let mut value = best_response_value(game, r, &x).0;
    for _ in 0..config.max_rounds {
        let before = value;
        for j in (0..game.n_players()).filter(|&j| j != i) {
            // Matrix: rows are player i's actions, columns opponent j's actions.
            let matrix: Vec<Vec<f64>> = (0..game.n_actions(i))
                .map(|a| {
                    (0..game.n_actions(j))
                        .map(|b| {
                            let fixed = x.with_player(j, MixedAction::pure(game.n_actions(j), b));
                            action_values(game, r, &fixed)[a]
                        })
                        .collect()
                })
                .collect();
            let sol = matrix_game_solve(&matrix)?;
            let candidate = x.with_player(j, MixedAction(sol.col));
            let v = best_response_value(game, r, &candidate).0;
            if v <= value {
                x = candidate;
                value = v;
            }
        }
        if before - value < 1e-12 {
            break;
        }
    }
    Ok((value, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};
    use proptest::prelude::*;
    use num_traits::Signed;

    fn two_player(rows: usize, cols: usize) -> Game {
        let a: Vec<String> = (0..rows).map(|k| format!("a{k}")).collect();
        let b: Vec<String> = (0..cols).map(|k| format!("b{k}")).collect();
        Game::from_json(&format!(
            r#"{{"players": ["1", "2"], "actions": {{"1": {a:?}, "2": {b:?}}},
                "objectives": {{"1": {{"kind": "limsup_frequency", "profiles": []}},
                               "2": {{"kind": "limsup_frequency", "profiles": []}}}},
                "payoff_bounds": {{"1": [0, 1], "2": [0, 1]}}}}"#
        ))
        .unwrap()
    }

    /// Support enumeration for the row player's value: every pair of equal-size
    /// supports, solved by Gaussian elimination in exact arithmetic.
    fn support_enumeration_value(m: &[Vec<Rational>]) -> Rational {
        let rows = m.len();
        let cols = m[0].len();
        let mut best: Option<Rational> = None;
        for rs in 1u32..(1 << rows) {
            for cs in 1u32..(1 << cols) {
                if rs.count_ones() != cs.count_ones() {
                    continue;
                }
                let r: Vec<usize> = (0..rows).filter(|k| rs >> k & 1 == 1).collect();
                let c: Vec<usize> = (0..cols).filter(|k| cs >> k & 1 == 1).collect();
                // Row weights x over r with x·M[:,c] = v and sum x = 1.
                let k = r.len();
                let Some(x) = solve_square(k, |eq, var| {
                    if eq < k { if var < k { m[r[var]][c[eq]].clone() } else { int(-1) } }
                    else if var < k { int(1) } else { int(0) }
                }, |eq| if eq < k { int(0) } else { int(1) }) else { continue };
                let Some(y) = solve_square(k, |eq, var| {
                    if eq < k { if var < k { m[r[eq]][c[var]].clone() } else { int(-1) } }
                    else if var < k { int(1) } else { int(0) }
                }, |eq| if eq < k { int(0) } else { int(1) }) else { continue };
                if x[..k].iter().chain(&y[..k]).any(|w| w.is_negative()) {
                    continue;
                }
                let v = x[k].clone();
                let row_ok = (0..cols).all(|j| {
                    (0..k).fold(int(0), |acc, t| acc + &x[t] * &m[r[t]][j]) >= v
                });
                let col_ok = (0..rows).all(|i| {
                    (0..k).fold(int(0), |acc, t| acc + &y[t] * &m[i][c[t]]) <= v
                });
                if row_ok && col_ok {
                    best = Some(v);
                }
            }
        }
        best.expect("every matrix game has an equilibrium")
    }

    fn solve_square(
        k: usize,
        a: impl Fn(usize, usize) -> Rational,
        b: impl Fn(usize) -> Rational,
    ) -> Option<Vec<Rational>> {
        let n = k + 1;
        let mut rows: Vec<Vec<Rational>> = (0..n)
            .map(|e| (0..n).map(|v| a(e, v)).chain(std::iter::once(b(e))).collect())
            .collect();
        for col in 0..n {
            let piv = (col..n).find(|&r| !rows[r][col].is_zero())?;
            rows.swap(col, piv);
            let p = rows[col][col].clone();
            for v in rows[col].iter_mut() {
                *v = &*v / &p;
            }
            for r in 0..n {
                if r != col && !rows[r][col].is_zero() {
                    let f = rows[r][col].clone();
                    let pivot_row = rows[col].clone();
                    for (v, pv) in rows[r].iter_mut().zip(pivot_row) {
                        *v -= &f * pv;
                    }
                }
            }
        }
        Some(rows.into_iter().map(|r| r[n].clone()).collect())
    }

    #[test]
    fn matching_pennies_matrix() {
        let sol = matrix_game_solve(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((sol.value - 0.5).abs() < 1e-9);
        assert!((sol.row[0] - 0.5).abs() < 1e-9 && (sol.col[0] - 0.5).abs() < 1e-9);
        let m = vec![vec![int(1), int(0)], vec![int(0), int(1)]];
        assert_eq!(support_enumeration_value(&m), rat(1, 2));
    }

    #[test]
    fn trivial_matrices() {
        assert!((matrix_game_solve(&[vec![-2.5]]).unwrap().value + 2.5).abs() < 1e-12);
        assert!((matrix_game_solve(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap().value - 1.0).abs() < 1e-12);
        assert!(matrix_game_solve(&[]).is_err());
        assert!(matrix_game_solve(&[vec![f64::NAN]]).is_err());
    }

    #[test]
    fn stage_minmax_examples() {
        let g = two_player(2, 2);
        let pennies = StageReward::indicator(&g, 0, &ProfileSet::new([0, 3]));
        let c = stage_minmax(&g, &pennies).unwrap();
        assert_eq!(c.exact, Some(rat(1, 2)));
        assert_eq!(c.method, Method::LpExact);
        assert_eq!(c.punishment.player(1).weights(), &[0.5, 0.5]);

        let constant = StageReward::constant(&g, 1, rat(3, 7));
        assert_eq!(stage_minmax(&g, &constant).unwrap().exact, Some(rat(3, 7)));

        let corner = StageReward::indicator(&g, 0, &ProfileSet::new([0]));
        let c = stage_minmax(&g, &corner).unwrap();
        assert_eq!(c.exact, Some(int(0)));
        assert_eq!(c.punishment.player(1).weights(), &[0.0, 1.0]);
    }

    #[test]
    fn best_response_examples() {
        let g = two_player(2, 2);
        let pennies = StageReward::indicator(&g, 0, &ProfileSet::new([0, 3]));
        let x = MixedProfile(vec![MixedAction::pure(2, 0), MixedAction::uniform(2)]);
        assert_eq!(best_response_value(&g, &pennies, &x), (0.5, 0));
        let corner = StageReward::indicator(&g, 0, &ProfileSet::new([0]));
        let l = MixedProfile(vec![MixedAction::pure(2, 1), MixedAction::pure(2, 0)]);
        assert_eq!(best_response_value(&g, &corner, &l), (1.0, 0));
        let x = MixedProfile(vec![MixedAction::pure(2, 1), MixedAction(vec![0.3, 0.7])]);
        let (v, a) = best_response_value(&g, &corner, &x);
        assert!((v - 0.3).abs() < 1e-15 && a == 0);
    }

    fn three_player() -> Game {
        Game::from_json(
            r#"{"players": ["a", "b", "c"], "actions": {"a": ["0", "1"], "b": ["0", "1"], "c": ["0", "1"]},
                "objectives": {"a": {"kind": "limsup_frequency", "profiles": []},
                               "b": {"kind": "limsup_frequency", "profiles": []},
                               "c": {"kind": "limsup_frequency", "profiles": []}},
                "payoff_bounds": {"a": [0, 1], "b": [0, 1], "c": [0, 1]}}"#,
        )
        .unwrap()
    }

    #[test]
    fn three_player_bracket_is_consistent() {
        let g = three_player();
        // Player a wins when its action equals b XOR c: no pure profile punishes,
        // the correlated value is 1/2 and independent uniform mixing attains it.
        let set = ProfileSet::new(g.profiles().filter(|&p| {
            let v = g.profile(p);
            v[0] == (v[1] ^ v[2])
        }));
        let r = StageReward::indicator(&g, 0, &set);
        let c = stage_minmax(&g, &r).unwrap();
        assert!(c.value_lo <= c.value_hi);
        assert!((c.value_lo - 0.5).abs() < 1e-12);
        assert!((c.value_hi - 0.5).abs() < 1e-6, "{c:?}");
        let (br, _) = best_response_value(&g, &r, &c.punishment);
        assert!(br <= c.value_hi + 1e-12);

        // Player a wins only on (0,0,0): pure punishment closes the bracket.
        let r = StageReward::indicator(&g, 0, &ProfileSet::new([0]));
        let c = stage_minmax(&g, &r).unwrap();
        assert_eq!(c.method, Method::ExhaustivePure);
        assert_eq!(c.exact, Some(int(0)));
    }

    fn matrix_strategy() -> impl Strategy<Value = (usize, usize, Vec<i64>)> {
        (2usize..=4, 2usize..=4).prop_flat_map(|(r, c)| {
            (Just(r), Just(c), prop::collection::vec(-5i64..=5, r * c))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn lp_value_matches_support_enumeration((rows, cols, entries) in matrix_strategy()) {
            let m: Vec<Vec<Rational>> = (0..rows)
                .map(|i| (0..cols).map(|j| int(entries[i * cols + j])).collect())
                .collect();
            let exact_sol = matrix_game_solve_exact(&m).unwrap();
            prop_assert_eq!(&exact_sol.value, &support_enumeration_value(&m));
            let mf: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(exact::to_f64).collect()).collect();
            let sol = matrix_game_solve(&mf).unwrap();
            prop_assert!((sol.value - exact::to_f64(&exact_sol.value)).abs() < 1e-9);
        }

        #[test]
        fn punishment_attains_value((rows, cols, entries) in matrix_strategy(), player in 0usize..2) {
            let g = two_player(rows, cols);
            let r = StageReward::new(&g, player, entries.iter().map(|&v| int(v)).collect()).unwrap();
            let c = stage_minmax(&g, &r).unwrap();
            let (br, _) = best_response_value(&g, &r, &c.punishment);
            prop_assert!(c.value_lo <= br + 1e-9);
            prop_assert!(br <= c.value_hi + 1e-9);
        }

        #[test]
        fn affine_rescaling((rows, cols, entries) in matrix_strategy(), a in 1i64..5, b in -5i64..5) {
            let g = two_player(rows, cols);
            let r = StageReward::new(&g, 0, entries.iter().map(|&v| int(v)).collect()).unwrap();
            let scaled = StageReward::new(&g, 0, entries.iter().map(|&v| int(a * v + b)).collect()).unwrap();
            let c = stage_minmax(&g, &r).unwrap();
            let cs = stage_minmax(&g, &scaled).unwrap();
            prop_assert_eq!(cs.exact.clone().unwrap(), c.exact.clone().unwrap() * int(a) + int(b));
            let argmax = |r: &StageReward| {
                let v = action_values(&g, r, &c.punishment);
                let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                v.iter().map(|x| (m - x).abs() < 1e-9).collect::<Vec<_>>()
            };
            prop_assert_eq!(argmax(&r), argmax(&scaled));
        }

        #[test]
        fn pure_upper_bound_dominates_lower(entries in prop::collection::vec(0i64..3, 8)) {
            let g = three_player();
            let r = StageReward::new(&g, 1, entries.iter().map(|&v| int(v)).collect()).unwrap();
            let c = stage_minmax(&g, &r).unwrap();
            let (pure, _) = best_pure_punishment(&g, &r);
            prop_assert!(exact::to_f64(&pure) >= c.value_lo - 1e-12);
            prop_assert!(c.value_lo <= c.value_hi);
        }
    }
}
