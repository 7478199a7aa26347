use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use blackwell_core::equilibrium::{EquilibriumArtifact, PayoffPoint, PayoffPolytope};
use blackwell_core::exact::{self, Rational};
use blackwell_core::model::{AutomatonDoc, Game, MixedProfile, ProfileLabels, StrategyAutomaton};
use blackwell_core::stage::{Method, MinmaxCertificate};
use blackwell_core::values::{history_independence_report, HistoryReport};
use blackwell_core::verify::{DeviationReport, MassCheck, MonteCarloReport, VerificationReport};

use crate::{CliError, SCHEMA_VERSION};

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(exact::format_rational).collect()
}

fn mixed_doc(game: &Game, x: &MixedProfile) -> BTreeMap<String, BTreeMap<String, f64>> {
    (0..game.n_players())
        .map(|i| {
            let weights = game
                .actions(i)
                .iter()
                .cloned()
                .zip(x.player(i).weights().iter().copied())
                .filter(|(_, w)| *w > 0.0)
                .collect();
            (game.player_name(i).to_string(), weights)
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateDoc {
    pub player: String,
    pub value_lo: f64,
    pub value_hi: f64,
    pub exact: Option<String>,
    pub resolved: bool,
    pub method: Method,
    pub tolerance: f64,
    /// Opponents' punishment; the punished player's own entry is a placeholder.
    pub punishment: BTreeMap<String, BTreeMap<String, f64>>,
    pub notes: Vec<String>,
    pub history: HistoryReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinmaxDoc {
    pub schema_version: &'static str,
    pub players: Vec<CertificateDoc>,
}

impl MinmaxDoc {
    pub fn new(game: &Game, certs: &[MinmaxCertificate]) -> Result<Self, CliError> {
        let players = certs
            .iter()
            .map(|c| {
                Ok(CertificateDoc {
                    player: game.player_name(c.player).to_string(),
                    value_lo: c.value_lo,
                    value_hi: c.value_hi,
                    exact: c.exact.as_ref().map(exact::format_rational),
                    resolved: c.is_resolved(),
                    method: c.method,
                    tolerance: c.tolerance,
                    punishment: mixed_doc(game, &c.punishment),
                    notes: c.notes.clone(),
                    history: history_independence_report(game, c.player)?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(MinmaxDoc {
            schema_version: SCHEMA_VERSION,
            players,
        })
    }
}

/// File form of an equilibrium artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactDoc {
    pub schema_version: String,
    pub epsilon: f64,
    pub rounds: usize,
    pub weights: Vec<String>,
    pub expected_payoffs: Vec<String>,
    pub declared_gain_bound: f64,
    #[serde(default)]
    pub target_tolerance: Option<f64>,
    pub automaton: AutomatonDoc,
}

impl ArtifactDoc {
    pub fn new(game: &Game, a: &EquilibriumArtifact) -> Self {
        ArtifactDoc {
            schema_version: SCHEMA_VERSION.into(),
            epsilon: a.epsilon,
            rounds: a.rounds,
            weights: strings(&a.weights),
            expected_payoffs: strings(&a.expected_payoffs),
            declared_gain_bound: a.declared_gain_bound,
            target_tolerance: a.target_tolerance,
            automaton: a.automaton.to_doc(game),
        }
    }

    pub fn into_artifact(
        self,
        automaton: StrategyAutomaton,
        certificates: Vec<MinmaxCertificate>,
    ) -> Result<EquilibriumArtifact, CliError> {
        let parse = |v: &[String]| -> Result<Vec<Rational>, CliError> {
            v.iter()
                .map(|s| exact::parse_rational(s).ok_or_else(|| CliError::Config(format!("bad number `{s}` in artifact"))))
                .collect()
        };
        Ok(EquilibriumArtifact {
            automaton,
            epsilon: self.epsilon,
            expected_payoffs: parse(&self.expected_payoffs)?,
            certificates,
            plays: Vec::new(),
            weights: parse(&self.weights)?,
            rounds: self.rounds,
            declared_gain_bound: self.declared_gain_bound,
            target_tolerance: self.target_tolerance,
            deviation_gain: None,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PlayEntry {
    pub weight: String,
    pub preamble: Vec<ProfileLabels>,
    pub cycle: Vec<ProfileLabels>,
    pub description: String,
    pub payoffs: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlayDoc {
    pub schema_version: &'static str,
    pub plays: Vec<PlayEntry>,
}

impl PlayDoc {
    pub fn new(game: &Game, a: &EquilibriumArtifact) -> Result<Self, CliError> {
        let plays = a
            .plays
            .iter()
            .zip(&a.weights)
            .map(|(p, w)| {
                let labels = p.to_labels(game);
                Ok(PlayEntry {
                    weight: exact::format_rational(w),
                    preamble: labels.preamble,
                    cycle: labels.cycle,
                    description: p.describe(game),
                    payoffs: strings(&p.evaluate_all(game)?),
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(PlayDoc {
            schema_version: SCHEMA_VERSION,
            plays,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PointDoc {
    pub payoff: Vec<String>,
    /// Periodic play attaining the point; absent for limits of plays.
    pub witness: Option<String>,
}

impl PointDoc {
    fn new(game: &Game, p: &PayoffPoint) -> Self {
        PointDoc {
            payoff: strings(&p.payoff),
            witness: p.witness.play().map(|w| w.describe(game)),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HullDoc {
    pub epsilon: f64,
    pub vertices: Vec<PointDoc>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PayoffSetDoc {
    pub schema_version: &'static str,
    pub values: Vec<String>,
    pub hulls: Vec<HullDoc>,
    pub feasible: Vec<PointDoc>,
}

impl PayoffSetDoc {
    pub fn new(game: &Game, values: &[Rational], hulls: &[(f64, PayoffPolytope)], feasible: &[PayoffPoint]) -> Self {
        PayoffSetDoc {
            schema_version: SCHEMA_VERSION,
            values: strings(values),
            hulls: hulls
                .iter()
                .map(|(e, h)| HullDoc {
                    epsilon: *e,
                    vertices: h.vertices.iter().map(|v| PointDoc::new(game, v)).collect(),
                })
                .collect(),
            feasible: feasible.iter().map(|p| PointDoc::new(game, p)).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyDoc {
    pub schema_version: &'static str,
    pub players: Vec<String>,
    pub epsilon: f64,
    pub pass: bool,
    pub max_gain: f64,
    pub on_path: Vec<String>,
    pub deviations: Vec<DeviationReport>,
    pub mass_check: MassCheck,
    pub monte_carlo: MonteCarloReport,
}

impl VerifyDoc {
    pub fn new(game: &Game, r: VerificationReport, monte_carlo: MonteCarloReport) -> Self {
        VerifyDoc {
            schema_version: SCHEMA_VERSION,
            players: game.players().to_vec(),
            epsilon: r.epsilon,
            pass: r.pass,
            max_gain: r.max_gain,
            on_path: r.on_path,
            deviations: r.deviations,
            mass_check: r.mass_check,
            monte_carlo,
        }
    }
}
