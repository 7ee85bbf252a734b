use crate::{Error, Result};

/// Baseline reward rule: a constant for correct actions, a lower constant
/// for wrong ones.
#[derive(Debug, Clone, Copy)]
pub struct FixedRewardProvider {
    c_correct: f64,
    c_wrong: f64,
}

impl FixedRewardProvider {
    pub fn new(c_correct: f64, c_wrong: f64) -> Result<Self> {
        if c_correct <= c_wrong {
            return Err(Error::Config(format!(
                "fixed rewards need c_correct > c_wrong, got {c_correct} <= {c_wrong}"
            )));
        }
        Ok(FixedRewardProvider { c_correct, c_wrong })
    }

    pub fn fixed_reward(&self, action: usize, gold_action: usize) -> f64 {
        if action == gold_action {
            self.c_correct
        } else {
            self.c_wrong
        }
    }

    pub fn values(&self) -> (f64, f64) {
        (self.c_correct, self.c_wrong)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plus_minus_one_defaults() {
        let provider = FixedRewardProvider::new(1.0, -1.0).unwrap();
        assert_eq!(provider.fixed_reward(3, 3), 1.0);
        assert_eq!(provider.fixed_reward(3, 4), -1.0);
        assert_eq!(provider.fixed_reward(0, 0), 1.0);
    }

    #[test]
    fn ordering_is_enforced() {
        assert!(FixedRewardProvider::new(-1.0, 1.0).is_err());
        assert!(FixedRewardProvider::new(1.0, 1.0).is_err());
    }
}
