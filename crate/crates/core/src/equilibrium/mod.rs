//! Equilibrium construction: grim-trigger automata over a periodic play,
//! jointly controlled lotteries between several plays, and the hull of
//! individually rational payoffs.

mod grim;
mod lottery;
mod polytope;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exact::{self, Rational};
use crate::model::{Game, MixedProfile, PeriodicPlay, StrategyAutomaton};
use crate::stage::MinmaxCertificate;
use crate::values::{blackwell_minmax_all, common_play_search, DEFAULT_DENOMINATOR};
use crate::{Error, Result};

pub use grim::{grim_trigger, lottery_automaton, lottery_players};
pub use lottery::{jcl_preamble, Lottery, MAX_ROUNDS};
pub use polytope::{
    extreme_points, feasible_outcomes, hull_2d, payoff_points, payoff_set, PayoffPoint,
    PayoffPolytope, Witness,
};

/// Lottery rounds used when the target weights are not dyadic.
pub const FOLK_ROUNDS: usize = 10;

/// A synthesized strategy profile with the guarantees it was built for.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumArtifact {
    pub automaton: StrategyAutomaton,
    pub epsilon: f64,
    pub expected_payoffs: Vec<Rational>,
    pub certificates: Vec<MinmaxCertificate>,
    /// Continuation plays, one per lottery outcome.
    pub plays: Vec<PeriodicPlay>,
    /// Achieved lottery weights of the plays.
    pub weights: Vec<Rational>,
    pub rounds: usize,
    /// Bound on any player's deviation gain claimed by the construction.
    pub declared_gain_bound: f64,
    /// Distance to the requested target allowed by the construction.
    pub target_tolerance: Option<f64>,
    /// Largest deviation gain found by verification.
    pub deviation_gain: Option<f64>,
}

pub fn punishments(certificates: &[MinmaxCertificate]) -> Vec<MixedProfile> {
    certificates.iter().map(|c| c.punishment.clone()).collect()
}

fn require_resolved(certificates: &[MinmaxCertificate], epsilon: f64) -> Result<()> {
    for c in certificates {
        if c.value_hi - c.value_lo > epsilon.max(c.tolerance) {
            return Err(Error::CannotCertify(format!(
                "minmax bracket [{}, {}] of player {} is wider than {epsilon}",
                c.value_lo, c.value_hi, c.player
            )));
        }
    }
    Ok(())
}

/// Common individually rational play enforced by grim trigger.
pub fn synthesize_equilibrium(game: &Game, epsilon: f64) -> Result<EquilibriumArtifact> {
    let certificates = blackwell_minmax_all(game)?;
    synthesize_with(game, certificates, epsilon, DEFAULT_DENOMINATOR)
}

pub fn synthesize_with(
    game: &Game,
    certificates: Vec<MinmaxCertificate>,
    epsilon: f64,
    max_denominator: usize,
) -> Result<EquilibriumArtifact> {
    require_resolved(&certificates, epsilon)?;
    let common = common_play_search(game, &certificates, epsilon, max_denominator)?;
    let automaton = grim_trigger(game, &common.play, &punishments(&certificates))?;
    Ok(EquilibriumArtifact {
        automaton,
        epsilon,
        expected_payoffs: common.payoffs,
        certificates,
        plays: vec![common.play],
        weights: vec![Rational::one()],
        rounds: 0,
        declared_gain_bound: 2.0 * epsilon,
        target_tolerance: None,
        deviation_gain: None,
    })
}

/// Dyadic exponent of `w` when it is at most `cap`.
fn dyadic_rounds(weights: &[Rational], cap: usize) -> Option<usize> {
    weights
        .iter()
        .map(|w| {
            let d = w.denom();
            let r = d.bits() as usize - 1;
            (*d == BigInt::one() << r).then_some(r)
        })
        .try_fold(0usize, |acc, r| r.map(|r| acc.max(r)))
        .filter(|&r| r <= cap)
}

/// Lottery over hull vertices approximating `target`, each continued by
/// grim trigger.
pub fn folk_equilibrium(
    game: &Game,
    certificates: Vec<MinmaxCertificate>,
    target: &[Rational],
    epsilon: f64,
) -> Result<EquilibriumArtifact> {
    if target.len() != game.n_players() {
        return Err(Error::Precondition(format!(
            "target has {} coordinates for {} players",
            target.len(),
            game.n_players()
        )));
    }
    require_resolved(&certificates, epsilon)?;
    let hull = payoff_set(game, &certificates, epsilon, DEFAULT_DENOMINATOR)?;
    let usable: Vec<(&[Rational], &PeriodicPlay)> = hull
        .vertices
        .iter()
        .filter_map(|v| v.witness.play().map(|p| (&v.payoff[..], p)))
        .collect();
    let points: Vec<&[Rational]> = usable.iter().map(|(v, _)| *v).collect();
    let eps = exact::snap(epsilon, exact::LITERAL_TOLERANCE).unwrap_or_else(Rational::zero);
    let (distance, weights) = polytope::nearest_combination(&points, target)?.ok_or_else(|| {
        Error::TargetOutside {
            distance: f64::INFINITY,
            epsilon,
        }
    })?;
    if distance > eps {
        return Err(Error::TargetOutside {
            distance: exact::to_f64(&distance),
            epsilon,
        });
    }
    let nearest: Vec<Rational> = (0..game.n_players())
        .map(|i| {
            points
                .iter()
                .zip(&weights)
                .fold(Rational::zero(), |a, (p, w)| a + &p[i] * w)
        })
        .collect();
    let basic = polytope::basic_combination(&points, &nearest)?.unwrap_or(weights);
    let support: Vec<usize> = (0..points.len()).filter(|&k| basic[k].is_positive()).collect();
    let lambda: Vec<Rational> = support.iter().map(|&k| basic[k].clone()).collect();
    let plays: Vec<PeriodicPlay> = support.iter().map(|&k| usable[k].1.clone()).collect();
    let rounds = if support.len() == 1 {
        0
    } else {
        lottery_players(game)?;
        dyadic_rounds(&lambda, FOLK_ROUNDS).unwrap_or(FOLK_ROUNDS)
    };
    let lottery = jcl_preamble(&lambda, rounds)?;
    let automaton = grim::compose(game, Some(&lottery), &plays, &punishments(&certificates))?;
    let expected: Vec<Rational> = (0..game.n_players())
        .map(|i| {
            support
                .iter()
                .zip(&lottery.achieved)
                .fold(Rational::zero(), |a, (&k, w)| a + &points[k][i] * w)
        })
        .collect();
    let range = (0..game.n_players())
        .map(|i| {
            let (lo, hi) = game.payoff_bounds(i);
            hi - lo
        })
        .max()
        .unwrap_or_else(Rational::zero);
    let rounding = Rational::new(
        BigInt::from(support.len().saturating_sub(1)),
        BigInt::one() << (rounds + 1),
    ) * range;
    Ok(EquilibriumArtifact {
        automaton,
        epsilon,
        expected_payoffs: expected,
        certificates,
        plays,
        weights: lottery.achieved.clone(),
        rounds,
        declared_gain_bound: 3.0 * epsilon,
        target_tolerance: Some((distance + rounding).to_f64().unwrap_or(f64::INFINITY)),
        deviation_gain: None,
    })
}
