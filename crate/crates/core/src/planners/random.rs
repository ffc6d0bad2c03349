use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DecisionContext, ObserverPolicy, PolicyDecision};
use crate::error::Result;
use crate::grid::Action;

/// Uniform draw over the four actions.
pub fn random_action(rng: &mut impl Rng) -> PolicyDecision {
    PolicyDecision::bare(Action::from_index(rng.gen_range(0..4)))
}

#[derive(Debug, Clone)]
pub struct PassiveRandom {
    rng: ChaCha8Rng,
}

impl PassiveRandom {
    pub fn new(seed: u64) -> Self {
        PassiveRandom { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl ObserverPolicy for PassiveRandom {
    fn decide(&mut self, _ctx: &DecisionContext<'_>) -> Result<PolicyDecision> {
        Ok(random_action(&mut self.rng))
    }
}
