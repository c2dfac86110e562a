//! Deterministic Monte Carlo batches.

use rayon::prelude::*;

use crate::rng::{trial_rng, SimRng};

/// Runs `trials` independent trials, trial `k` on stream `k` of `master`.
/// Results come back in trial order regardless of scheduling.
pub fn run_trials<T, F>(master: u64, trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut SimRng) -> T + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(master, k as u64);
            f(k, &mut rng)
        })
        .collect()
}

/// Like [`run_trials`] but stops at the first error, still in trial order.
pub fn try_run_trials<T, E, F>(master: u64, trials: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize, &mut SimRng) -> Result<T, E> + Sync,
{
    run_trials(master, trials, f).into_iter().collect()
}
