//! Rule-activation patterns of a threshold table over a polytope of
//! frequency vectors.
//!
//! A frequency vector is an affine image `phi = M z` of a point `z` in a
//! polytope. For each rule the condition either holds or fails at `phi`; a
//! pattern records which. When a player can steer the running frequency
//! between several points, each liminf condition holds only if it holds at
//! every visited point, so the reachable patterns are closed under
//! intersection.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::exact::Rational;
use crate::lp::{Cmp, Region};
use crate::model::{FrequencyCondition, FrequencyRelation, ProfileIndex, ProfileSet, ThresholdTable};
use crate::Result;

/// Affine frequency map over a base region.
#[derive(Clone, Debug)]
pub struct FrequencyPolytope {
    pub base: Region,
    /// `phi[profile]` is the coefficient row of that profile's frequency.
    pub phi: Vec<Vec<Rational>>,
}

impl FrequencyPolytope {
    /// `z` ranges over the probability simplex of dimension `n_vars`.
    pub fn simplex(n_vars: usize, phi: Vec<Vec<Rational>>) -> Self {
        let mut base = Region::new(n_vars);
        base.push(vec![Rational::one(); n_vars], Cmp::Eq, Rational::one());
        FrequencyPolytope { base, phi }
    }

    pub fn n_vars(&self) -> usize {
        self.base.n_vars
    }

    pub fn set_row(&self, set: &ProfileSet) -> Vec<Rational> {
        let mut row = vec![Rational::zero(); self.n_vars()];
        for p in set.iter() {
            for (r, c) in row.iter_mut().zip(&self.phi[p]) {
                *r += c;
            }
        }
        row
    }

    pub fn frequencies(&self, z: &[Rational]) -> Vec<Rational> {
        self.phi
            .iter()
            .map(|row| row.iter().zip(z).fold(Rational::zero(), |acc, (c, v)| acc + c * v))
            .collect()
    }

    pub fn frequency_of(&self, z: &[Rational], profile: ProfileIndex) -> Rational {
        self.phi[profile]
            .iter()
            .zip(z)
            .fold(Rational::zero(), |acc, (c, v)| acc + c * v)
    }
}

/// Constraint expressing that `condition` holds (or fails) at the frequency.
pub fn condition_constraint(
    poly: &FrequencyPolytope,
    condition: &FrequencyCondition,
    holds: bool,
) -> (Vec<Rational>, Cmp, Rational) {
    let row = poly.set_row(&condition.set);
    let (cmp, rhs) = match (condition.relation, holds) {
        (FrequencyRelation::Greater, true) => (Cmp::Gt, condition.threshold.clone()),
        (FrequencyRelation::Greater, false) => (Cmp::Le, condition.threshold.clone()),
        (FrequencyRelation::AtLeast, true) => (Cmp::Ge, condition.threshold.clone()),
        (FrequencyRelation::AtLeast, false) => (Cmp::Lt, condition.threshold.clone()),
        (FrequencyRelation::EqualsOne, true) => (Cmp::Ge, Rational::one()),
        (FrequencyRelation::EqualsOne, false) => (Cmp::Lt, Rational::one()),
    };
    (row, cmp, rhs)
}

/// Which rules hold, one flag per rule.
pub type Pattern = Vec<bool>;

/// Index of the first rule that holds (`rules.len()` for the default).
pub fn first_rule(pattern: &[bool]) -> usize {
    pattern.iter().position(|&h| h).unwrap_or(pattern.len())
}

pub fn pattern_payoff<'a>(table: &'a ThresholdTable, pattern: &[bool]) -> &'a Rational {
    table.pattern_payoff(first_rule(pattern))
}

/// Every pattern realised by some point of the polytope.
pub fn reachable_patterns(poly: &FrequencyPolytope, table: &ThresholdTable) -> Result<Vec<Pattern>> {
    let mut out = Vec::new();
    let mut region = poly.base.clone();
    let mut pattern = Vec::new();
    explore(poly, table, &mut region, &mut pattern, &mut out)?;
    Ok(out)
}

fn explore(
    poly: &FrequencyPolytope,
    table: &ThresholdTable,
    region: &mut Region,
    pattern: &mut Pattern,
    out: &mut Vec<Pattern>,
) -> Result<()> {
    if !region.is_nonempty()? {
        return Ok(());
    }
    let k = pattern.len();
    if k == table.rules.len() {
        out.push(pattern.clone());
        return Ok(());
    }
    for holds in [true, false] {
        let (row, cmp, rhs) = condition_constraint(poly, &table.rules[k].condition, holds);
        region.push(row, cmp, rhs);
        pattern.push(holds);
        explore(poly, table, region, pattern, out)?;
        pattern.pop();
        region.constraints.pop();
    }
    Ok(())
}

/// Closure of a pattern family under rule-wise conjunction.
pub fn intersection_closure(patterns: &[Pattern]) -> Vec<Pattern> {
    let mut closed: BTreeSet<Pattern> = patterns.iter().cloned().collect();
    loop {
        let current: Vec<Pattern> = closed.iter().cloned().collect();
        let mut grew = false;
        for a in &current {
            for b in &current {
                let meet: Pattern = a.iter().zip(b).map(|(x, y)| *x && *y).collect();
                if closed.insert(meet) {
                    grew = true;
                }
            }
        }
        if !grew {
            return closed.into_iter().collect();
        }
    }
}

/// Best payoff over a pattern family for a maximising (`max = true`) or
/// minimising chooser.
pub fn extreme_payoff(table: &ThresholdTable, patterns: &[Pattern], max: bool) -> Option<Rational> {
    let values = patterns.iter().map(|p| pattern_payoff(table, p).clone());
    if max {
        values.max()
    } else {
        values.min()
    }
}

/// Point of the polytope realising `pattern`, maximising the common slack of
/// the strict rows.
pub fn pattern_point(
    poly: &FrequencyPolytope,
    table: &ThresholdTable,
    pattern: &[bool],
) -> Result<Option<Vec<Rational>>> {
    let mut region = poly.base.clone();
    for (rule, &holds) in table.rules.iter().zip(pattern) {
        let (row, cmp, rhs) = condition_constraint(poly, &rule.condition, holds);
        region.push(row, cmp, rhs);
    }
    Ok(region.interior_point()?.map(|(z, _)| z))
}
