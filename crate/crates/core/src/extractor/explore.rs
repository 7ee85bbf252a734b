use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// ε-greedy action selection state: a seeded stream plus counters for the
/// greedy/random split taken so far.
pub struct ExplorationPolicy {
    epsilon: f64,
    rng: ChaCha8Rng,
    greedy_taken: u64,
    random_taken: u64,
}

impl ExplorationPolicy {
    pub fn new(epsilon: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::Config(format!("epsilon must be in [0, 1), got {epsilon}")));
        }
        Ok(ExplorationPolicy {
            epsilon,
            rng: ChaCha8Rng::seed_from_u64(seed),
            greedy_taken: 0,
            random_taken: 0,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// (greedy, random) action counts.
    pub fn counters(&self) -> (u64, u64) {
        (self.greedy_taken, self.random_taken)
    }

    pub fn explore_fraction(&self) -> f64 {
        let total = self.greedy_taken + self.random_taken;
        if total == 0 {
            0.0
        } else {
            self.random_taken as f64 / total as f64
        }
    }

    pub fn reset_counters(&mut self) {
        self.greedy_taken = 0;
        self.random_taken = 0;
    }

    /// Returns the chosen action and whether the random branch fired.
    pub fn sample(&mut self, scores: &[f64], mask: Option<&[bool]>) -> Result<(usize, bool)> {
        let allowed = allowed_indices(scores, mask)?;
        let rho: f64 = self.rng.gen();
        if rho >= self.epsilon {
            self.greedy_taken += 1;
            Ok((argmax_over(scores, &allowed), false))
        } else {
            self.random_taken += 1;
            let pick = allowed[self.rng.gen_range(0..allowed.len())];
            Ok((pick, true))
        }
    }
}

fn allowed_indices(scores: &[f64], mask: Option<&[bool]>) -> Result<Vec<usize>> {
    if scores.is_empty() {
        return Err(Error::invalid("epsilon_greedy", "empty score vector"));
    }
    if let Some(mask) = mask {
        if mask.len() != scores.len() {
            return Err(Error::ShapeMismatch {
                op: "epsilon_greedy mask",
                lhs: format!("{} scores", scores.len()),
                rhs: format!("{} mask entries", mask.len()),
            });
        }
    }
    let allowed: Vec<usize> = (0..scores.len())
        .filter(|&i| mask.map_or(true, |m| !m[i]))
        .collect();
    if allowed.is_empty() {
        return Err(Error::invalid("epsilon_greedy", "every action is masked"));
    }
    Ok(allowed)
}

fn argmax_over(scores: &[f64], allowed: &[usize]) -> usize {
    let mut best = allowed[0];
    for &i in &allowed[1..] {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    best
}

/// Greedy pick over unmasked scores; ties break toward the lowest index.
pub fn argmax_masked(scores: &[f64], mask: Option<&[bool]>) -> Result<usize> {
    let allowed = allowed_indices(scores, mask)?;
    Ok(argmax_over(scores, &allowed))
}

/// ε-greedy draw: with probability 1-ε the argmax of the unmasked scores,
/// otherwise a uniform pick among the unmasked actions.
pub fn epsilon_greedy(
    scores: &[f64],
    explore: &mut ExplorationPolicy,
    mask: Option<&[bool]>,
) -> Result<usize> {
    explore.sample(scores, mask).map(|(action, _)| action)
}

/// How the extractor commits actions: ε-greedy during training, pure
/// argmax at evaluation, or a caller-supplied sequence (used by the
/// gradient checks, which need a smooth loss under a frozen rollout).
pub enum ActionChoice<'a> {
    Explore(&'a mut ExplorationPolicy),
    Greedy,
    Forced(&'a [usize]),
}

impl ActionChoice<'_> {
    pub(crate) fn choose(&mut self, step: usize, scores: &[f64], mask: Option<&[bool]>) -> Result<(usize, bool)> {
        match self {
            ActionChoice::Explore(explore) => explore.sample(scores, mask),
            ActionChoice::Greedy => Ok((argmax_masked(scores, mask)?, false)),
            ActionChoice::Forced(actions) => {
                let action = *actions.get(step).ok_or_else(|| {
                    Error::invalid("forced actions", format!("no action for step {step}"))
                })?;
                Ok((action, false))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_zero_is_pure_argmax() {
        let mut explore = ExplorationPolicy::new(0.0, 1).unwrap();
        for _ in 0..100 {
            let a = epsilon_greedy(&[0.1, 0.9, 0.3], &mut explore, None).unwrap();
            assert_eq!(a, 1);
        }
        assert_eq!(explore.counters(), (100, 0));
    }

    #[test]
    fn ties_break_to_lowest_index() {
        let mut explore = ExplorationPolicy::new(0.0, 1).unwrap();
        let a = epsilon_greedy(&[0.5, 0.5, 0.5], &mut explore, None).unwrap();
        assert_eq!(a, 0);
    }

    #[test]
    fn exploration_fraction_matches_epsilon() {
        let mut explore = ExplorationPolicy::new(0.1, 7).unwrap();
        for _ in 0..100_000 {
            epsilon_greedy(&[0.0, 1.0, 2.0], &mut explore, None).unwrap();
        }
        let fraction = explore.explore_fraction();
        assert!((0.095..=0.105).contains(&fraction), "fraction {fraction}");
    }

    #[test]
    fn masked_actions_are_never_taken() {
        let mut explore = ExplorationPolicy::new(0.9, 3).unwrap();
        let mask = [false, true, false, true];
        for _ in 0..1000 {
            let a = epsilon_greedy(&[0.1, 9.0, 0.2, 9.0], &mut explore, Some(&mask)).unwrap();
            assert!(a == 0 || a == 2);
        }
    }

    #[test]
    fn fully_masked_rejected() {
        let mut explore = ExplorationPolicy::new(0.1, 3).unwrap();
        let mask = [true, true];
        assert!(epsilon_greedy(&[0.1, 0.2], &mut explore, Some(&mask)).is_err());
    }

    #[test]
    fn invalid_epsilon_rejected() {
        assert!(ExplorationPolicy::new(1.0, 0).is_err());
        assert!(ExplorationPolicy::new(-0.1, 0).is_err());
    }

    #[test]
    fn argmax_is_shift_invariant() {
        let row = [0.3, -0.2, 0.9, 0.9];
        let shifted: Vec<f64> = row.iter().map(|v| v + 123.456).collect();
        assert_eq!(argmax_masked(&row, None).unwrap(), argmax_masked(&shifted, None).unwrap());
    }
}
