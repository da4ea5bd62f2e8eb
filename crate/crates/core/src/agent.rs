//! Decision-maker interface the experiment loop drives.

use rand::RngCore;

use crate::model::ActionId;
use crate::num::Real;

/// A sequential policy that commits to an arm for a block of consecutive
/// timesteps.
///
/// Epoch policies return whole epochs (capped at the remaining horizon);
/// per-step policies return blocks of length one. The runner plays the
/// block, collects the noisy rewards, and hands them back in order.
pub trait Agent<R: Real>: Send {
    /// Picks the next arm and how many consecutive steps to play it,
    /// `1..=remaining`.
    fn next_block(&mut self, remaining: u64, rng: &mut dyn RngCore) -> (ActionId, u64);

    /// Receives the noisy rewards of the block just played.
    fn observe_block(&mut self, action: ActionId, rewards: &[R]);
}
