//! Games, objectives and their file format.
//!
//! [`GameSpec`] is the label-based file schema. [`validate_spec`] checks it and
//! [`Game::new`] compiles it into an index-based [`Game`] that every algorithm
//! in the crate works with. Action profiles are addressed by a mixed-radix
//! index with player 0 most significant, so index order is lexicographic order
//! of the label arrays.

mod automaton;
mod mixed;
mod play;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::{NumLit, Rational};
use crate::{Error, Result};

pub use automaton::{AutomatonDoc, StateDoc, StrategyAutomaton};
pub use mixed::{MixedAction, MixedProfile, MIXED_TOLERANCE};
pub use play::{frequency_vector, PeriodicPlay};

// ---------------------------------------------------------------------------
// File schema
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    pub players: Vec<String>,
    pub actions: BTreeMap<String, Vec<String>>,
    pub objectives: BTreeMap<String, ObjectiveSpec>,
    pub payoff_bounds: BTreeMap<String, [NumLit; 2]>,
}

/// A profile written as action labels in player order.
pub type ProfileLabels = Vec<String>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    InfinitelyOften {
        profiles: Vec<ProfileLabels>,
    },
    LimsupFrequency {
        profiles: Vec<ProfileLabels>,
    },
    ThresholdTable {
        rules: Vec<RuleSpec>,
        default: NumLit,
    },
    FiniteHorizon {
        horizon: usize,
        table: Vec<TableEntrySpec>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSpec {
    pub condition: ConditionSpec,
    pub payoff: NumLit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionSpec {
    pub profiles: Vec<ProfileLabels>,
    pub relation: FrequencyRelation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<NumLit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntrySpec {
    pub history: Vec<ProfileLabels>,
    pub payoff: NumLit,
}

impl GameSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialises")
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub location: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }

    fn push(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ValidationIssue {
            location: location.into(),
            message: message.into(),
        });
    }

    pub fn mentions(&self, needle: &str) -> bool {
        self.issues.iter().any(|i| i.message.contains(needle))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return f.write_str("ok");
        }
        for issue in &self.issues {
            writeln!(f, "  {}: {}", issue.location, issue.message)?;
        }
        Ok(())
    }
}

/// Checks every invariant of the file schema, collecting all violations.
pub fn validate_spec(spec: &GameSpec) -> ValidationReport {
    compile(spec).err().unwrap_or_default()
}

// ---------------------------------------------------------------------------
// Compiled game
// ---------------------------------------------------------------------------

pub type ProfileIndex = usize;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct ProfileSet(BTreeSet<ProfileIndex>);

impl ProfileSet {
    pub fn new(members: impl IntoIterator<Item = ProfileIndex>) -> Self {
        ProfileSet(members.into_iter().collect())
    }

    pub fn contains(&self, profile: ProfileIndex) -> bool {
        self.0.contains(&profile)
    }

    pub fn iter(&self) -> impl Iterator<Item = ProfileIndex> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_superset(&self, other: &ProfileSet) -> bool {
        self.0.is_superset(&other.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyRelation {
    Greater,
    AtLeast,
    EqualsOne,
}

/// Condition on the liminf frequency of a profile set.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyCondition {
    pub set: ProfileSet,
    pub relation: FrequencyRelation,
    pub threshold: Rational,
}

impl FrequencyCondition {
    pub fn holds(&self, frequency: &Rational) -> bool {
        match self.relation {
            FrequencyRelation::Greater => frequency > &self.threshold,
            FrequencyRelation::AtLeast => frequency >= &self.threshold,
            FrequencyRelation::EqualsOne => frequency.is_one(),
        }
    }

    /// Float evaluation used on empirical (finite-horizon) frequencies.
    pub fn holds_f64(&self, frequency: f64) -> bool {
        let t = crate::exact::to_f64(&self.threshold);
        match self.relation {
            FrequencyRelation::Greater => frequency > t,
            FrequencyRelation::AtLeast => frequency >= t,
            FrequencyRelation::EqualsOne => frequency >= 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub condition: FrequencyCondition,
    pub payoff: Rational,
}

/// Ordered rule list with first-match semantics and a default payoff.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdTable {
    pub rules: Vec<Rule>,
    pub default: Rational,
}

impl ThresholdTable {
    /// Index of the first rule whose condition holds (`rules.len()` for the default).
    pub fn active_rule(&self, frequency_of: impl Fn(&ProfileSet) -> Rational) -> usize {
        self.rules
            .iter()
            .position(|r| r.condition.holds(&frequency_of(&r.condition.set)))
            .unwrap_or(self.rules.len())
    }

    pub fn pattern_payoff(&self, pattern: usize) -> &Rational {
        self.rules
            .get(pattern)
            .map(|r| &r.payoff)
            .unwrap_or(&self.default)
    }

    pub fn evaluate(&self, frequency_of: impl Fn(&ProfileSet) -> Rational) -> Rational {
        self.pattern_payoff(self.active_rule(frequency_of)).clone()
    }

    /// Number of activation patterns: one per rule plus the default.
    pub fn n_patterns(&self) -> usize {
        self.rules.len() + 1
    }
}

/// Payoff table over the first `horizon` profiles, indexed by the base-|A|
/// number whose most significant digit is stage 0.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteHorizonTable {
    pub horizon: usize,
    pub payoffs: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Objective {
    InfinitelyOften { set: ProfileSet },
    LimsupFrequency { set: ProfileSet },
    ThresholdTable(ThresholdTable),
    FiniteHorizon(FiniteHorizonTable),
}

impl Objective {
    pub fn kind(&self) -> &'static str {
        match self {
            Objective::InfinitelyOften { .. } => "infinitely_often",
            Objective::LimsupFrequency { .. } => "limsup_frequency",
            Objective::ThresholdTable(_) => "threshold_table",
            Objective::FiniteHorizon(_) => "finite_horizon",
        }
    }

    /// Tail objectives ignore every finite prefix of the play.
    pub fn is_tail(&self) -> bool {
        !matches!(self, Objective::FiniteHorizon(_))
    }

    /// Payoff of a tail objective given the limiting profile frequencies and
    /// the set of profiles that recur infinitely often.
    pub fn evaluate_tail(
        &self,
        frequency_of: impl Fn(&ProfileSet) -> Rational,
        recurs: impl Fn(ProfileIndex) -> bool,
    ) -> Option<Rational> {
        match self {
            Objective::InfinitelyOften { set } => Some(if set.iter().any(recurs) {
                Rational::one()
            } else {
                Rational::zero()
            }),
            Objective::LimsupFrequency { set } => Some(frequency_of(set)),
            Objective::ThresholdTable(table) => Some(table.evaluate(frequency_of)),
            Objective::FiniteHorizon(_) => None,
        }
    }

    /// All payoffs the objective can produce, when that set is finite.
    pub fn outcome_values(&self) -> Option<Vec<Rational>> {
        let mut values: Vec<Rational> = match self {
            Objective::InfinitelyOften { .. } => vec![Rational::zero(), Rational::one()],
            Objective::LimsupFrequency { .. } => return None,
            Objective::ThresholdTable(t) => t
                .rules
                .iter()
                .map(|r| r.payoff.clone())
                .chain(std::iter::once(t.default.clone()))
                .collect(),
            Objective::FiniteHorizon(t) => t.payoffs.clone(),
        };
        values.sort();
        values.dedup();
        Some(values)
    }

    /// Smallest and largest value the objective can take.
    pub fn range(&self) -> (Rational, Rational) {
        match self.outcome_values() {
            Some(v) => (v[0].clone(), v[v.len() - 1].clone()),
            None => (Rational::zero(), Rational::one()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Game {
    players: Vec<String>,
    actions: Vec<Vec<String>>,
    objectives: Vec<Objective>,
    bounds: Vec<(Rational, Rational)>,
    strides: Vec<usize>,
    n_profiles: usize,
}

impl Game {
    pub fn new(spec: &GameSpec) -> Result<Self> {
        compile(spec).map_err(Error::InvalidSpec)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Game::new(&GameSpec::from_json(text)?)
    }

    pub fn n_players(&self) -> usize {
        self.players.len()
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn player_name(&self, i: usize) -> &str {
        &self.players[i]
    }

    pub fn actions(&self, i: usize) -> &[String] {
        &self.actions[i]
    }

    pub fn n_actions(&self, i: usize) -> usize {
        self.actions[i].len()
    }

    pub fn objective(&self, i: usize) -> &Objective {
        &self.objectives[i]
    }

    pub fn objectives(&self) -> &[Objective] {
        &self.objectives
    }

    pub fn payoff_bounds(&self, i: usize) -> &(Rational, Rational) {
        &self.bounds[i]
    }

    pub fn n_profiles(&self) -> usize {
        self.n_profiles
    }

    pub fn profile_index(&self, actions: &[usize]) -> ProfileIndex {
        actions
            .iter()
            .zip(&self.strides)
            .map(|(a, s)| a * s)
            .sum()
    }

    pub fn profile(&self, index: ProfileIndex) -> Vec<usize> {
        (0..self.n_players())
            .map(|i| self.action_of(index, i))
            .collect()
    }

    /// Index distance between profiles differing by one step in player `i`'s action.
    pub fn stride(&self, i: usize) -> usize {
        self.strides[i]
    }

    /// Action of player `i` in the profile with the given index.
    pub fn action_of(&self, index: ProfileIndex, i: usize) -> usize {
        (index / self.strides[i]) % self.actions[i].len()
    }

    /// Index of the profile obtained by replacing player `i`'s action.
    pub fn with_action(&self, index: ProfileIndex, i: usize, action: usize) -> ProfileIndex {
        index - self.action_of(index, i) * self.strides[i] + action * self.strides[i]
    }

    pub fn profile_labels(&self, index: ProfileIndex) -> ProfileLabels {
        self.profile(index)
            .iter()
            .enumerate()
            .map(|(i, &a)| self.actions[i][a].clone())
            .collect()
    }

    pub fn parse_profile(&self, labels: &[String]) -> Option<ProfileIndex> {
        if labels.len() != self.n_players() {
            return None;
        }
        let actions: Option<Vec<usize>> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| self.actions[i].iter().position(|a| a == l))
            .collect();
        actions.map(|a| self.profile_index(&a))
    }

    pub fn profiles(&self) -> std::ops::Range<ProfileIndex> {
        0..self.n_profiles
    }

    /// Every joint action of players other than `i`, as full profiles with
    /// player `i` playing action 0.
    pub fn opponent_profiles(&self, i: usize) -> Vec<ProfileIndex> {
        self.profiles()
            .filter(|&p| self.action_of(p, i) == 0)
            .collect()
    }

    pub fn format_profile(&self, index: ProfileIndex) -> String {
        format!("({})", self.profile_labels(index).join(","))
    }

    /// Rebuilds the label-based spec (exact rationals are written as `"p/q"`).
    pub fn to_spec(&self) -> GameSpec {
        let labels = |set: &ProfileSet| set.iter().map(|p| self.profile_labels(p)).collect();
        let mut objectives = BTreeMap::new();
        for (i, obj) in self.objectives.iter().enumerate() {
            let spec = match obj {
                Objective::InfinitelyOften { set } => ObjectiveSpec::InfinitelyOften {
                    profiles: labels(set),
                },
                Objective::LimsupFrequency { set } => ObjectiveSpec::LimsupFrequency {
                    profiles: labels(set),
                },
                Objective::ThresholdTable(t) => ObjectiveSpec::ThresholdTable {
                    rules: t
                        .rules
                        .iter()
                        .map(|r| RuleSpec {
                            condition: ConditionSpec {
                                profiles: labels(&r.condition.set),
                                relation: r.condition.relation,
                                threshold: match r.condition.relation {
                                    FrequencyRelation::EqualsOne => None,
                                    _ => Some(NumLit::exact(&r.condition.threshold)),
                                },
                                mode: None,
                            },
                            payoff: NumLit::exact(&r.payoff),
                        })
                        .collect(),
                    default: NumLit::exact(&t.default),
                },
                Objective::FiniteHorizon(t) => ObjectiveSpec::FiniteHorizon {
                    horizon: t.horizon,
                    table: t
                        .payoffs
                        .iter()
                        .enumerate()
                        .map(|(idx, v)| TableEntrySpec {
                            history: self
                                .sequence(idx, t.horizon)
                                .into_iter()
                                .map(|p| self.profile_labels(p))
                                .collect(),
                            payoff: NumLit::exact(v),
                        })
                        .collect(),
                },
            };
            objectives.insert(self.players[i].clone(), spec);
        }
        GameSpec {
            players: self.players.clone(),
            actions: self
                .players
                .iter()
                .cloned()
                .zip(self.actions.iter().cloned())
                .collect(),
            objectives,
            payoff_bounds: self
                .players
                .iter()
                .zip(&self.bounds)
                .map(|(p, (lo, hi))| (p.clone(), [NumLit::exact(lo), NumLit::exact(hi)]))
                .collect(),
        }
    }

    /// Decodes a base-|A| sequence index into `len` profiles (stage 0 first).
    pub fn sequence(&self, mut index: usize, len: usize) -> Vec<ProfileIndex> {
        let mut out = vec![0; len];
        for slot in out.iter_mut().rev() {
            *slot = index % self.n_profiles;
            index /= self.n_profiles;
        }
        out
    }

    pub fn sequence_index(&self, profiles: &[ProfileIndex]) -> usize {
        profiles
            .iter()
            .fold(0, |acc, &p| acc * self.n_profiles + p)
    }

    /// Longest finite horizon among the players' objectives (0 if none).
    pub fn max_horizon(&self) -> usize {
        self.objectives
            .iter()
            .filter_map(|o| match o {
                Objective::FiniteHorizon(t) => Some(t.horizon),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }
}

const MAX_TABLE_ENTRIES: usize = 1 << 22;

fn compile(spec: &GameSpec) -> std::result::Result<Game, ValidationReport> {
    let mut report = ValidationReport::default();
    if spec.players.is_empty() {
        report.push("players", "at least one player is required");
    }
    let mut seen = BTreeSet::new();
    for p in &spec.players {
        if !seen.insert(p) {
            report.push(format!("players.{p}"), "duplicate player");
        }
    }
    for key in spec.actions.keys() {
        if !seen.contains(key) {
            report.push(format!("actions.{key}"), "unknown player");
        }
    }
    for key in spec.objectives.keys() {
        if !seen.contains(key) {
            report.push(format!("objectives.{key}"), "unknown player");
        }
    }
    for key in spec.payoff_bounds.keys() {
        if !seen.contains(key) {
            report.push(format!("payoff_bounds.{key}"), "unknown player");
        }
    }

    let mut actions = Vec::new();
    for p in &spec.players {
        match spec.actions.get(p) {
            None => report.push(format!("actions.{p}"), "missing action list"),
            Some(list) if list.is_empty() => {
                report.push(format!("actions.{p}"), "action set must be nonempty")
            }
            Some(list) => {
                let distinct: BTreeSet<_> = list.iter().collect();
                if distinct.len() != list.len() {
                    report.push(format!("actions.{p}"), "duplicate action label");
                }
            }
        }
        actions.push(spec.actions.get(p).cloned().unwrap_or_default());
    }
    if !report.is_ok() {
        return Err(report);
    }

    let n = spec.players.len();
    let mut strides = vec![1usize; n];
    let mut n_profiles = 1usize;
    for i in (0..n).rev() {
        strides[i] = n_profiles;
        n_profiles = match n_profiles.checked_mul(actions[i].len()) {
            Some(v) => v,
            None => {
                report.push("actions", "profile space too large");
                return Err(report);
            }
        };
    }
    let mut game = Game {
        players: spec.players.clone(),
        actions,
        objectives: Vec::new(),
        bounds: Vec::new(),
        strides,
        n_profiles,
    };

    for p in &spec.players {
        let loc = format!("objectives.{p}");
        let Some(obj) = spec.objectives.get(p) else {
            report.push(loc, "missing objective");
            continue;
        };
        if let Some(o) = compile_objective(&game, obj, &loc, &mut report) {
            game.objectives.push(o);
        }
    }
    for p in &spec.players {
        let loc = format!("payoff_bounds.{p}");
        let Some([lo, hi]) = spec.payoff_bounds.get(p) else {
            report.push(loc, "missing payoff bounds");
            continue;
        };
        match (lo.to_rational(), hi.to_rational()) {
            (Some(lo), Some(hi)) if lo <= hi => game.bounds.push((lo, hi)),
            (Some(_), Some(_)) => report.push(loc, "lower bound exceeds upper bound"),
            _ => report.push(loc, "bounds must be finite numbers"),
        }
    }
    if !report.is_ok() {
        return Err(report);
    }
    for (i, obj) in game.objectives.iter().enumerate() {
        let (lo, hi) = obj.range();
        let (blo, bhi) = &game.bounds[i];
        if &lo < blo || &hi > bhi {
            report.push(
                format!("payoff_bounds.{}", game.players[i]),
                format!(
                    "bounds do not contain the objective range [{}, {}]",
                    crate::exact::format_rational(&lo),
                    crate::exact::format_rational(&hi)
                ),
            );
        }
    }
    if report.is_ok() {
        Ok(game)
    } else {
        Err(report)
    }
}

fn compile_set(
    game: &Game,
    profiles: &[ProfileLabels],
    loc: &str,
    report: &mut ValidationReport,
) -> Option<ProfileSet> {
    let mut set = BTreeSet::new();
    let mut ok = true;
    for (k, labels) in profiles.iter().enumerate() {
        match game.parse_profile(labels) {
            Some(idx) => {
                set.insert(idx);
            }
            None => {
                ok = false;
                report.push(
                    format!("{loc}[{k}]"),
                    format!("unknown profile {labels:?}"),
                );
            }
        }
    }
    ok.then_some(ProfileSet(set))
}

fn compile_objective(
    game: &Game,
    spec: &ObjectiveSpec,
    loc: &str,
    report: &mut ValidationReport,
) -> Option<Objective> {
    let number = |lit: &NumLit, at: String, report: &mut ValidationReport| {
        let r = lit.to_rational();
        if r.is_none() {
            report.push(at, format!("not a finite number: {lit}"));
        }
        r
    };
    match spec {
        ObjectiveSpec::InfinitelyOften { profiles } => {
            compile_set(game, profiles, &format!("{loc}.profiles"), report)
                .map(|set| Objective::InfinitelyOften { set })
        }
        ObjectiveSpec::LimsupFrequency { profiles } => {
            compile_set(game, profiles, &format!("{loc}.profiles"), report)
                .map(|set| Objective::LimsupFrequency { set })
        }
        ObjectiveSpec::ThresholdTable { rules, default } => {
            let mut compiled = Vec::new();
            let mut ok = true;
            for (k, rule) in rules.iter().enumerate() {
                let rloc = format!("{loc}.rules[{k}]");
                let c = &rule.condition;
                if c.profiles.is_empty() {
                    report.push(
                        format!("{rloc}.condition.profiles"),
                        "condition references an empty profile set",
                    );
                    ok = false;
                }
                if let Some(mode) = &c.mode {
                    if mode != "liminf" {
                        report.push(
                            format!("{rloc}.condition.mode"),
                            format!("unsupported mode `{mode}` (only liminf)"),
                        );
                        ok = false;
                    }
                }
                let set = compile_set(game, &c.profiles, &format!("{rloc}.condition.profiles"), report);
                let threshold = match (c.relation, &c.threshold) {
                    (FrequencyRelation::EqualsOne, _) => Some(Rational::one()),
                    (_, None) => {
                        report.push(format!("{rloc}.condition.threshold"), "missing threshold");
                        None
                    }
                    (_, Some(t)) => {
                        let t = number(t, format!("{rloc}.condition.threshold"), report);
                        if let Some(v) = &t {
                            if v < &Rational::zero() || v > &Rational::one() {
                                report.push(
                                    format!("{rloc}.condition.threshold"),
                                    "threshold must lie in [0, 1]",
                                );
                            }
                        }
                        t
                    }
                };
                let payoff = number(&rule.payoff, format!("{rloc}.payoff"), report);
                match (set, threshold, payoff) {
                    (Some(set), Some(threshold), Some(payoff)) => compiled.push(Rule {
                        condition: FrequencyCondition {
                            set,
                            relation: c.relation,
                            threshold,
                        },
                        payoff,
                    }),
                    _ => ok = false,
                }
            }
            let default = number(default, format!("{loc}.default"), report);
            match (ok, default) {
                (true, Some(default)) => Some(Objective::ThresholdTable(ThresholdTable {
                    rules: compiled,
                    default,
                })),
                _ => None,
            }
        }
        ObjectiveSpec::FiniteHorizon { horizon, table } => {
            let m = *horizon;
            let size = (0..m).try_fold(1usize, |acc, _| acc.checked_mul(game.n_profiles));
            let size = match size {
                Some(s) if s <= MAX_TABLE_ENTRIES => s,
                _ => {
                    report.push(format!("{loc}.horizon"), "table too large");
                    return None;
                }
            };
            let mut payoffs: Vec<Option<Rational>> = vec![None; size];
            let mut ok = true;
            for (k, entry) in table.iter().enumerate() {
                let eloc = format!("{loc}.table[{k}]");
                if entry.history.len() != m {
                    report.push(
                        format!("{eloc}.history"),
                        format!("history length {} differs from horizon {m}", entry.history.len()),
                    );
                    ok = false;
                    continue;
                }
                let seq: Option<Vec<_>> = entry
                    .history
                    .iter()
                    .map(|labels| game.parse_profile(labels))
                    .collect();
                let Some(seq) = seq else {
                    report.push(format!("{eloc}.history"), "unknown profile in history");
                    ok = false;
                    continue;
                };
                let Some(v) = number(&entry.payoff, format!("{eloc}.payoff"), report) else {
                    ok = false;
                    continue;
                };
                let idx = game.sequence_index(&seq);
                if payoffs[idx].is_some() {
                    report.push(format!("{eloc}.history"), "duplicate table entry");
                    ok = false;
                }
                payoffs[idx] = Some(v);
            }
            let missing = payoffs.iter().filter(|p| p.is_none()).count();
            if missing > 0 {
                report.push(
                    format!("{loc}.table"),
                    format!("table not total: {missing} of {size} histories missing"),
                );
                ok = false;
            }
            ok.then(|| {
                Objective::FiniteHorizon(FiniteHorizonTable {
                    horizon: m,
                    payoffs: payoffs.into_iter().map(Option::unwrap).collect(),
                })
            })
        }
    }
}
