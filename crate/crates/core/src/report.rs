//! Reports of the seeded randomized verifiers.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::rng::{rng_from, trial_seed};

/// Outcome of one randomized check. A check passes when no trial exceeded
/// the tolerance; this is a failed search for a counterexample, not a proof.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub trials: usize,
    pub tol: f64,
    pub max_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failing_seed: Option<u64>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.first_failing_seed.is_none()
    }

    /// Merges reports of the same check, keeping the worst deviation and the
    /// first failure in argument order.
    pub fn combine(check: &str, parts: &[CheckReport]) -> Self {
        Self {
            check: check.to_string(),
            trials: parts.iter().map(|p| p.trials).sum(),
            tol: parts.iter().map(|p| p.tol).fold(0.0, f64::max),
            max_deviation: parts.iter().map(|p| p.max_deviation).fold(0.0, f64::max),
            first_failing_seed: parts.iter().find_map(|p| p.first_failing_seed),
        }
    }
}

/// Runs `trials` independent trials in parallel. Trial `t` gets the seed
/// `trial_seed(seed, t)` and an RNG seeded from it, and returns a deviation;
/// a trial fails when its deviation exceeds `tol` or is not a number.
pub(crate) fn run_trials<F>(
    check: &str,
    trials: usize,
    seed: u64,
    tol: f64,
    f: F,
) -> Result<CheckReport>
where
    F: Fn(u64, &mut ChaCha8Rng) -> Result<f64> + Sync,
{
    let devs: Vec<(u64, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let s = trial_seed(seed, t);
            let mut rng = rng_from(s);
            f(s, &mut rng).map(|d| (s, d))
        })
        .collect::<Result<_>>()?;
    let mut max_deviation = 0.0f64;
    let mut first_failing_seed = None;
    for (s, d) in devs {
        let bad = d.is_nan() || d > tol;
        max_deviation = if d.is_nan() {
            f64::INFINITY
        } else {
            max_deviation.max(d)
        };
        if bad && first_failing_seed.is_none() {
            first_failing_seed = Some(s);
        }
    }
    Ok(CheckReport {
        check: check.to_string(),
        trials,
        tol,
        max_deviation,
        first_failing_seed,
    })
}
