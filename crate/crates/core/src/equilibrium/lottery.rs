use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::exact::Rational;
use crate::{Error, Result};

/// Largest number of coin rounds a lottery may use.
pub const MAX_ROUNDS: usize = 16;

/// Jointly controlled lottery: `rounds` fair bits, read most significant
/// first, select the outcome whose dyadic interval contains the pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct Lottery {
    pub rounds: usize,
    pub targets: Vec<Rational>,
    /// `boundaries[k]..boundaries[k + 1]` are the patterns of outcome `k`.
    pub boundaries: Vec<u64>,
    pub achieved: Vec<Rational>,
}

pub fn jcl_preamble(weights: &[Rational], rounds: usize) -> Result<Lottery> {
    if weights.is_empty() {
        return Err(Error::Precondition("a lottery needs at least one outcome".into()));
    }
    if weights.iter().any(|w| w.is_negative()) {
        return Err(Error::Precondition("lottery weights must be nonnegative".into()));
    }
    let total = weights.iter().fold(Rational::zero(), |a, b| a + b);
    if !total.is_one() {
        return Err(Error::Precondition(format!("lottery weights sum to {total}, not 1")));
    }
    if rounds > MAX_ROUNDS {
        return Err(Error::resource(format!("{rounds} lottery rounds (cap {MAX_ROUNDS})")));
    }
    let scale = Rational::from_integer(BigInt::one() << rounds);
    let mut boundaries = vec![0u64];
    let mut cumulative = Rational::zero();
    for w in &weights[..weights.len() - 1] {
        cumulative += w;
        let b: u64 = (&cumulative * &scale)
            .round()
            .to_integer()
            .try_into()
            .expect("at most 2^rounds");
        boundaries.push(b);
    }
    boundaries.push(1u64 << rounds);
    let achieved = boundaries
        .windows(2)
        .map(|w| Rational::new(BigInt::from(w[1] - w[0]), scale.to_integer()))
        .collect();
    Ok(Lottery {
        rounds,
        targets: weights.to_vec(),
        boundaries,
        achieved,
    })
}

impl Lottery {
    pub fn n_outcomes(&self) -> usize {
        self.targets.len()
    }

    pub fn outcome(&self, pattern: u64) -> usize {
        self.boundaries[1..]
            .iter()
            .position(|&b| pattern < b)
            .expect("pattern below 2^rounds")
    }

    /// Outcome of every bit pattern, indexed by the pattern.
    pub fn outcome_map(&self) -> Vec<usize> {
        (0..1u64 << self.rounds).map(|p| self.outcome(p)).collect()
    }

    pub fn max_error(&self) -> Rational {
        self.achieved
            .iter()
            .zip(&self.targets)
            .map(|(a, t)| (a - t).abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use proptest::prelude::*;

    #[test]
    fn single_fair_bit() {
        let l = jcl_preamble(&[rat(1, 2), rat(1, 2)], 1).unwrap();
        assert_eq!(l.outcome_map(), vec![0, 1]);
        assert_eq!(l.achieved, vec![rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn two_bit_split() {
        let l = jcl_preamble(&[rat(1, 4), rat(3, 4)], 2).unwrap();
        assert_eq!(l.outcome_map(), vec![0, 1, 1, 1]);
        assert!(l.max_error().is_zero());
    }

    #[test]
    fn thirds_with_ten_rounds() {
        let l = jcl_preamble(&[rat(1, 3), rat(2, 3)], 10).unwrap();
        assert_eq!(l.achieved, vec![rat(341, 1024), rat(683, 1024)]);
        assert!(l.max_error() < rat(1, 1024));
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        let l = jcl_preamble(&[rat(1, 1)], 0).unwrap();
        assert_eq!(l.outcome_map(), vec![0]);
        assert!(jcl_preamble(&[], 3).is_err());
        assert!(jcl_preamble(&[rat(1, 2)], 3).is_err());
        assert!(matches!(
            jcl_preamble(&[rat(1, 2), rat(1, 2)], MAX_ROUNDS + 1),
            Err(Error::ResourceCap { .. })
        ));
    }

    proptest! {
        #[test]
        fn achieved_weights_within_dyadic_error(raw in prop::collection::vec(1u32..100, 1..6), rounds in 0usize..12) {
            let total: u32 = raw.iter().sum();
            let weights: Vec<Rational> = raw.iter().map(|&w| rat(w as i64, total as i64)).collect();
            let l = jcl_preamble(&weights, rounds).unwrap();
            let sum = l.achieved.iter().fold(Rational::zero(), |a, b| a + b);
            prop_assert!(sum.is_one());
            prop_assert!(l.max_error() <= Rational::new(1.into(), BigInt::one() << rounds));
            let counts = l.outcome_map().iter().fold(vec![0u64; weights.len()], |mut c, &k| { c[k] += 1; c });
            for (k, c) in counts.iter().enumerate() {
                prop_assert_eq!(Rational::new((*c).into(), (1u64 << rounds).into()), l.achieved[k].clone());
            }
        }
    }
}
