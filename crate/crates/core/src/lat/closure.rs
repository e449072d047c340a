use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::oracle::LatOracle;
use crate::channels::{sample_dext, Channel, ChannelSetSpec, Theory};
use crate::error::{Error, Result};
use crate::tensor::SystemType;

/// Positivity tolerance for presentation data.
const POSITIVITY_TOL: f64 = 1e-9;

const CP_X: &str = "~cp.x";
const CP_XP: &str = "~cp.x'";
const PAD_W: &str = "~pad.w";
const PAD_WP: &str = "~pad.w'";
const PAD_F: &str = "~pad.f";

/// A CP map `A → A'` presented as `σ∘Φ∘ρ`: a channel `Φ: A⊗X → A'⊗X'` in
/// the dilation extension, an unnormalized state `ρ` on `X` and an effect
/// `σ` on `X'`.
#[derive(Clone, Debug)]
pub struct CpPresentation<T: Theory> {
    phi: Channel<T>,
    rho: Channel<T>,
    sigma: Channel<T>,
    x: SystemType,
    xp: SystemType,
}

impl<T: Theory> CpPresentation<T> {
    pub fn new(
        k: &ChannelSetSpec<T>,
        phi: Channel<T>,
        rho: Channel<T>,
        sigma: Channel<T>,
    ) -> Result<Self> {
        let (x, xp) = k.split_aux(&phi)?;
        if !rho.in_type().is_empty() || !rho.out_type().same_factors(&x) {
            return Err(Error::TypeMismatch(format!(
                "state must be a process on {x}, got {} → {}",
                rho.in_type(),
                rho.out_type()
            )));
        }
        if !sigma.out_type().is_empty() || !sigma.in_type().same_factors(&xp) {
            return Err(Error::TypeMismatch(format!(
                "effect must be a process on {xp}, got {} → {}",
                sigma.in_type(),
                sigma.out_type()
            )));
        }
        if !T::is_positive(&rho, POSITIVITY_TOL) || !T::is_positive(&sigma, POSITIVITY_TOL) {
            return Err(Error::TypeMismatch(
                "state and effect must be positive".into(),
            ));
        }
        Ok(Self {
            phi,
            rho,
            sigma,
            x,
            xp,
        })
    }

    pub fn phi(&self) -> &Channel<T> {
        &self.phi
    }

    pub fn rho(&self) -> &Channel<T> {
        &self.rho
    }

    pub fn sigma(&self) -> &Channel<T> {
        &self.sigma
    }

    /// The presented CP map `A → A'`.
    pub fn reduced(&self) -> Result<Channel<T>> {
        sandwich(&self.phi, &self.rho, &self.sigma, &self.x, &self.xp)
    }

    /// Random presentation over `k`: aux dimensions in `1..=3`, a state with
    /// trace in `[0.2, 2)` and a random effect.
    pub fn random(k: &ChannelSetSpec<T>, rng: &mut ChaCha8Rng) -> Result<Self> {
        let x = SystemType::single(CP_X, rng.random_range(1..=3))?;
        let xp = SystemType::single(CP_XP, rng.random_range(1..=3))?;
        let phi = sample_dext(k, &x, &xp, rng)?;
        let rho = T::random_state(&x, rng).scale(rng.random_range(0.2..2.0));
        let sigma = T::random_effect(&xp, rng);
        Self::new(k, phi, rho, sigma)
    }

    /// The same CP map with an idle flag system run alongside:
    /// `(Φ⊗μ, ρ⊗τ, σ⊗discard)` for a random channel `μ` on a `w`-dimensional
    /// flag and a random state `τ`.
    pub fn flag_padded(
        &self,
        k: &ChannelSetSpec<T>,
        w: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let wi = SystemType::single(PAD_W, w)?;
        let wo = SystemType::single(PAD_WP, w)?;
        let mu = T::random_channel(&wi, &wo, rng);
        let tau = T::random_state(&wi, rng);
        Self::new(
            k,
            self.phi.parallel(&mu)?,
            self.rho.parallel(&tau)?,
            self.sigma.parallel(&Channel::discard(&wo))?,
        )
    }

    /// The same CP map with a discarded extra input and the normalization
    /// moved from the effect to the state: `(Φ⊗discard, α·ρ⊗τ, σ/α)`.
    pub fn input_padded(
        &self,
        k: &ChannelSetSpec<T>,
        alpha: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        if alpha <= 0.0 {
            return Err(Error::InvalidDimension(format!(
                "scale {alpha} is not positive"
            )));
        }
        let f = SystemType::single(PAD_F, 2)?;
        let tau = T::random_state(&f, rng);
        Self::new(
            k,
            self.phi.parallel(&Channel::discard(&f))?,
            self.rho.parallel(&tau)?.scale(alpha),
            self.sigma.scale(1.0 / alpha),
        )
    }

    /// The presentation with the state scaled by `alpha`.
    pub fn scaled(&self, k: &ChannelSetSpec<T>, alpha: f64) -> Result<Self> {
        Self::new(
            k,
            self.phi.clone(),
            self.rho.scale(alpha),
            self.sigma.clone(),
        )
    }
}

fn sandwich<T: Theory>(
    c: &Channel<T>,
    rho: &Channel<T>,
    sigma: &Channel<T>,
    x: &SystemType,
    xp: &SystemType,
) -> Result<Channel<T>> {
    let prepared = Channel::link_over(rho, c, &x.labels())?;
    Channel::link_over(&prepared, sigma, &xp.labels())
}

/// Extension of the oracle to a CP map presented by `pres`:
/// `σ∘S(Φ)∘ρ`, a CP process `B → B'`.
pub fn extend_to_cp<T: Theory>(o: &LatOracle<T>, pres: &CpPresentation<T>) -> Result<Channel<T>> {
    let out = o.eval(&pres.phi)?;
    sandwich(&out, &pres.rho, &pres.sigma, &pres.x, &pres.xp)
}
