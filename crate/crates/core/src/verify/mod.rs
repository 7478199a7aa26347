//! Exact evaluation of strategy automata, best-response search and seeded
//! simulation.

mod chain;
mod deviation;
mod sim;

use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::equilibrium::EquilibriumArtifact;
use crate::exact::{self, Rational};
use crate::model::Game;
use crate::Result;

pub use chain::{
    emission_distribution, exact_outcome_distribution, exact_payoffs, profile_distribution,
    ProductChain, RecurrentClass,
};
pub use deviation::{
    deviation_gain, policy_enumeration, DeviationClass, DeviationMethod, DeviationReport,
    POLICY_CAP,
};
pub use sim::{block_win_probability, monte_carlo, rollout, Estimate, MonteCarloReport, PlayerEstimate};

/// Slack allowed on the gain comparison.
pub const VERIFY_TOLERANCE: f64 = 1e-6;

pub(crate) fn ser_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&exact::format_rational(r))
}

/// Probability of the plays on which some player falls more than `radius`
/// below its value, against the bound `n * radius`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MassCheck {
    pub radius: f64,
    pub mass_outside: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub epsilon: f64,
    pub on_path: Vec<String>,
    pub deviations: Vec<DeviationReport>,
    pub max_gain: f64,
    pub pass: bool,
    pub mass_check: MassCheck,
}

/// Probability mass of payoff vectors below `values - radius` in some coordinate.
pub fn mass_outside(atoms: &[(Vec<Rational>, Rational)], values: &[Rational], radius: f64) -> Rational {
    atoms
        .iter()
        .filter(|(v, _)| {
            v.iter()
                .zip(values)
                .any(|(x, val)| exact::to_f64(&(x - val)) < -radius)
        })
        .fold(Rational::zero(), |a, (_, p)| a + p)
}

pub fn verify_equilibrium(game: &Game, artifact: &EquilibriumArtifact, epsilon: f64) -> Result<VerificationReport> {
    let automaton = &artifact.automaton;
    let class = DeviationClass::full(game, automaton);
    let deviations = (0..game.n_players())
        .map(|i| deviation_gain(game, automaton, i, class))
        .collect::<Result<Vec<_>>>()?;
    let max_gain = deviations.iter().map(|d| d.gain).fold(f64::NEG_INFINITY, f64::max);
    let atoms = exact_outcome_distribution(game, automaton)?;
    let on_path = chain::expected(game.n_players(), &atoms);
    let values: Vec<Rational> = artifact.certificates.iter().map(|c| c.upper()).collect();
    let radius = artifact.epsilon.max(0.0).cbrt();
    let mass = exact::to_f64(&mass_outside(&atoms, &values, radius));
    let bound = game.n_players() as f64 * radius;
    Ok(VerificationReport {
        epsilon,
        on_path: on_path.iter().map(exact::format_rational).collect(),
        deviations,
        max_gain,
        pass: max_gain <= epsilon + VERIFY_TOLERANCE,
        mass_check: MassCheck {
            radius,
            mass_outside: mass,
            bound,
            // With a zero radius the bound is zero and only an empty mass meets it.
            holds: mass < bound || mass == 0.0,
        },
    })
}
