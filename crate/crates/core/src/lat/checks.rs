use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::oracle::LatOracle;
use crate::channels::{sample_dext, Channel, Theory};
use crate::error::{Error, Result};
use crate::report::{run_trials, CheckReport};
use crate::tensor::SystemType;

/// Mixture weights used by the convex-linearity check.
pub const MIX_WEIGHTS: [f64; 3] = [0.25, 0.5, 0.9];

const X: &str = "~lat.x";
const XP: &str = "~lat.x'";
const Y: &str = "~lat.y";
const YP: &str = "~lat.y'";
const Z: &str = "~lat.z";
const ZP: &str = "~lat.z'";

/// Per-rule results of [`check_local_applicability`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalApplicabilityReport {
    pub naturality: CheckReport,
    pub dragging: CheckReport,
    pub combined: CheckReport,
}

impl LocalApplicabilityReport {
    pub fn passed(&self) -> bool {
        self.naturality.passed() && self.dragging.passed() && self.combined.passed()
    }

    pub fn max_deviation(&self) -> f64 {
        self.naturality
            .max_deviation
            .max(self.dragging.max_deviation)
            .max(self.combined.max_deviation)
    }
}

fn aux(label: &str, rng: &mut ChaCha8Rng) -> Result<SystemType> {
    SystemType::single(label, rng.random_range(1..=3))
}

/// Deviation between two sides of an equation; a failing evaluation on
/// either side counts as an unbounded deviation.
fn deviation<T: Theory>(lhs: Result<Channel<T>>, rhs: Result<Channel<T>>) -> f64 {
    match (lhs, rhs) {
        (Ok(l), Ok(r)) => l.distance(&r).unwrap_or(f64::INFINITY),
        _ => f64::INFINITY,
    }
}

/// `phi` pre-composed with `f` on its aux inputs and post-composed with `g`
/// on its aux outputs.
fn wrap<T: Theory>(
    f: &Channel<T>,
    phi: &Channel<T>,
    g: &Channel<T>,
    inner_in: &[&str],
    inner_out: &[&str],
) -> Result<Channel<T>> {
    let left = Channel::link_over(f, phi, inner_in)?;
    Channel::link_over(&left, g, inner_out)
}

/// Randomized test of the three local-applicability rules, each over
/// `trials` seeded trials with aux dimensions in `1..=3`:
///
/// - naturality: `S((id⊗g)∘φ∘(id⊗f)) = (id⊗g)∘S(φ)∘(id⊗f)` for `f: Y → X`,
///   `g: X' → Y'`;
/// - dragging: `S(φ⊗ψ) = S(φ)⊗ψ`;
/// - the combined rule with `f: Y → X⊗Z`, `g: X'⊗Z → Y'`.
///
/// An oracle evaluation that errors counts as a violation.
pub fn check_local_applicability<T: Theory>(
    o: &LatOracle<T>,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<LocalApplicabilityReport> {
    let k = o.source();
    let naturality = run_trials("naturality", trials, seed, tol, |_, rng| {
        let (x, xp, y, yp) = (aux(X, rng)?, aux(XP, rng)?, aux(Y, rng)?, aux(YP, rng)?);
        let phi = sample_dext(k, &x, &xp, rng)?;
        let f = T::random_channel(&y, &x, rng);
        let g = T::random_channel(&xp, &yp, rng);
        let lhs = wrap(&f, &phi, &g, &[X], &[XP]).and_then(|c| o.eval(&c));
        let rhs = o.eval(&phi).and_then(|s| wrap(&f, &s, &g, &[X], &[XP]));
        Ok(deviation(lhs, rhs))
    })?;
    let dragging = run_trials("dragging", trials, seed ^ 0x5eed_0001, tol, |_, rng| {
        let (x, xp, z, zp) = (aux(X, rng)?, aux(XP, rng)?, aux(Z, rng)?, aux(ZP, rng)?);
        let phi = sample_dext(k, &x, &xp, rng)?;
        let psi = T::random_channel(&z, &zp, rng);
        let lhs = phi.parallel(&psi).and_then(|c| o.eval(&c));
        let rhs = o.eval(&phi).and_then(|s| s.parallel(&psi));
        Ok(deviation(lhs, rhs))
    })?;
    let combined = run_trials("combined", trials, seed ^ 0x5eed_0002, tol, |_, rng| {
        let (x, xp, y, yp, z) = (
            aux(X, rng)?,
            aux(XP, rng)?,
            aux(Y, rng)?,
            aux(YP, rng)?,
            aux(Z, rng)?,
        );
        let phi = sample_dext(k, &x, &xp, rng)?;
        let f = T::random_channel(&y, &x.concat(&z)?, rng);
        let g = T::random_channel(&xp.concat(&z)?, &yp, rng);
        let lhs = wrap(&f, &phi, &g, &[X], &[XP, Z]).and_then(|c| o.eval(&c));
        let rhs = o.eval(&phi).and_then(|s| wrap(&f, &s, &g, &[X], &[XP, Z]));
        Ok(deviation(lhs, rhs))
    })?;
    Ok(LocalApplicabilityReport {
        naturality,
        dragging,
        combined,
    })
}

/// Randomized test that the oracle preserves mixtures: for `φ₀, φ₁` in the
/// same dilation extension and each weight `p` in [`MIX_WEIGHTS`],
/// `S(pφ₀ + (1−p)φ₁) = p·S(φ₀) + (1−p)·S(φ₁)`. Each trial reports the worst
/// weight.
pub fn check_convex_linearity<T: Theory>(
    o: &LatOracle<T>,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<CheckReport> {
    check_convex_linearity_at(o, &MIX_WEIGHTS, trials, seed, tol)
}

/// [`check_convex_linearity`] with explicit weights.
pub fn check_convex_linearity_at<T: Theory>(
    o: &LatOracle<T>,
    weights: &[f64],
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<CheckReport> {
    let k = o.source();
    if !k.convex {
        return Err(Error::TypeMismatch(format!(
            "convex linearity needs a convex source, `{}` is not",
            k.kind_name()
        )));
    }
    run_trials("convex_linearity", trials, seed, tol, |_, rng| {
        let (x, xp) = (aux(X, rng)?, aux(XP, rng)?);
        let phi0 = sample_dext(k, &x, &xp, rng)?;
        let phi1 = sample_dext(k, &x, &xp, rng)?;
        let (s0, s1) = match (o.eval(&phi0), o.eval(&phi1)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return Ok(f64::INFINITY),
        };
        let mut worst = 0.0f64;
        for &p in weights {
            let lhs = phi0.mix(p, &phi1).and_then(|m| o.eval(&m));
            let rhs = s0.mix(p, &s1);
            worst = worst.max(deviation(lhs, rhs));
        }
        Ok(worst)
    })
}
