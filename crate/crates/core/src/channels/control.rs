use num_traits::{One, Zero};

use super::{Channel, Quantum, Theory};
use crate::error::{Error, Result};
use crate::tensor::{Scalar, SystemType};

/// Tolerance for perfect distinguishability `eᵢ(ρⱼ) = δᵢⱼ`.
const DISTINGUISH_TOL: f64 = 1e-10;

/// Perfectly distinguishable control states with their discriminating effects,
/// all on a single factor labeled `ctl`.
#[derive(Clone, Debug)]
pub struct ControlPair<T: Theory = Quantum> {
    pub control_dim: usize,
    pub states: Vec<Channel<T>>,
    pub effects: Vec<Channel<T>>,
}

pub(crate) const CTL: &str = "ctl";

impl<T: Theory> ControlPair<T> {
    pub fn new(
        control_dim: usize,
        states: Vec<Channel<T>>,
        effects: Vec<Channel<T>>,
    ) -> Result<Self> {
        if control_dim < 2 {
            return Err(Error::InvalidDimension(
                "control needs at least two distinguishable states".into(),
            ));
        }
        if states.len() != 2 || effects.len() != 2 {
            return Err(Error::ShapeMismatch(
                "a control pair has two states and two effects".into(),
            ));
        }
        let t = SystemType::single(CTL, control_dim)?;
        let mut worst = 0.0f64;
        for (i, e) in effects.iter().enumerate() {
            if !e.in_type().same_factors(&t) || !e.out_type().is_empty() {
                return Err(Error::TypeMismatch(format!(
                    "control effect must be {t} → I"
                )));
            }
            for (j, s) in states.iter().enumerate() {
                if !s.out_type().same_factors(&t) || !s.in_type().is_empty() {
                    return Err(Error::TypeMismatch(format!(
                        "control state must be I → {t}"
                    )));
                }
                let v = s.measure(e)?.as_scalar().expect("closed diagram");
                let target = if i == j {
                    T::Scalar::one()
                } else {
                    T::Scalar::zero()
                };
                worst = worst.max((v - target).norm_sqr().sqrt());
            }
        }
        if worst > DISTINGUISH_TOL {
            return Err(Error::NotDistinguishable(worst));
        }
        Ok(Self {
            control_dim,
            states,
            effects,
        })
    }

    /// `|0⟩, |1⟩` with effects `|0⟩⟨0|` and its complement `1 − |0⟩⟨0|`.
    pub fn computational(control_dim: usize) -> Result<Self> {
        if control_dim < 2 {
            return Err(Error::InvalidDimension(
                "control needs at least two distinguishable states".into(),
            ));
        }
        let t = SystemType::single(CTL, control_dim)?;
        let s0 = Channel::basis_state(&t, 0)?;
        let s1 = Channel::basis_state(&t, 1)?;
        let e0 = Channel::basis_effect(&t, 0)?;
        let e1 = Channel::discard(&t).add(&e0.scale(-1.0))?;
        Self::new(control_dim, vec![s0, s1], vec![e0, e1])
    }

    /// State `i` relabeled onto factor `label`.
    pub fn state_on(&self, i: usize, label: &str) -> Result<Channel<T>> {
        self.states[i].relabel(|_| label.to_string())
    }

    /// Mixture `p·ρ₀ + (1−p)·ρ₁` on factor `label`.
    pub fn mixed_state_on(&self, p: f64, label: &str) -> Result<Channel<T>> {
        self.state_on(0, label)?.mix(p, &self.state_on(1, label)?)
    }
}

/// `Φ = φ₀ ⊗ (ρ₀ ∘ e₀) + φ₁ ⊗ (ρ₁ ∘ e₁)`: a channel with an extra control
/// input `ctl_in` and output `ctl_out` that measures the control and runs
/// `φᵢ` on outcome `i`, re-preparing `ρᵢ`.
pub fn control_channel<T: Theory>(
    phi0: &Channel<T>,
    phi1: &Channel<T>,
    pair: &ControlPair<T>,
    ctl_in: &str,
    ctl_out: &str,
) -> Result<Channel<T>> {
    if !phi0.in_type().same_factors(phi1.in_type())
        || !phi0.out_type().same_factors(phi1.out_type())
    {
        return Err(Error::TypeMismatch(
            "controlled channels must share a type".into(),
        ));
    }
    for p in [phi0, phi1] {
        if !p.is_deterministic() {
            return Err(Error::NonDeterministic(p.trace_deviation()));
        }
    }
    if phi0.in_type().contains(ctl_in) || phi0.out_type().contains(ctl_out) {
        return Err(Error::DuplicateLabel(format!("{ctl_in}/{ctl_out}")));
    }
    let mut branches = Vec::with_capacity(2);
    for (i, phi) in [phi0, phi1].into_iter().enumerate() {
        let e = pair.effects[i].relabel(|_| ctl_in.to_string())?;
        let s = pair.state_on(i, ctl_out)?;
        let leg = e.parallel(&s)?;
        branches.push(phi.parallel(&leg)?);
    }
    branches[0].add(&branches[1])
}
