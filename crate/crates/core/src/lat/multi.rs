use std::fmt;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;

use super::checks::{check_local_applicability, LocalApplicabilityReport};
use super::oracle::{bend_swap_image, swap_channel, LatOracle};
use crate::channels::{sample_member, Channel, ChannelSetSpec, Quantum, Theory};
use crate::error::{Error, Result};
use crate::rng::rng_from;
use crate::supermaps::MultiSupermap;
use crate::tensor::SystemType;

type MultiEvalFn<T> = dyn Fn(&[Channel<T>]) -> Result<Channel<T>> + Send + Sync;

/// A black-box transformation with several slots: it takes one channel
/// `Aᵢ⊗Xᵢ → Aᵢ'⊗Xᵢ'` per slot and returns `B⊗X₁⊗… → B'⊗X₁'⊗…`.
#[derive(Clone)]
pub struct MultiLatOracle<T: Theory = Quantum> {
    name: String,
    slots: Vec<ChannelSetSpec<T>>,
    target: ChannelSetSpec<T>,
    eval: Arc<MultiEvalFn<T>>,
}

impl<T: Theory> fmt::Debug for MultiLatOracle<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiLatOracle")
            .field("name", &self.name)
            .field("slots", &self.slots.len())
            .finish()
    }
}

fn slot_swap_in(i: usize) -> impl Fn(&str) -> String {
    move |l| format!("~swap{i}.in.{l}")
}

fn slot_swap_out(i: usize) -> impl Fn(&str) -> String {
    move |l| format!("~swap{i}.out.{l}")
}

impl<T: Theory> MultiLatOracle<T> {
    pub fn new(
        name: impl Into<String>,
        slots: Vec<ChannelSetSpec<T>>,
        target: ChannelSetSpec<T>,
        eval: impl Fn(&[Channel<T>]) -> Result<Channel<T>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            slots,
            target,
            eval: Arc::new(eval),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn slots(&self) -> &[ChannelSetSpec<T>] {
        &self.slots
    }

    pub fn target(&self) -> &ChannelSetSpec<T> {
        &self.target
    }

    /// Evaluates on one channel per slot, checking the output type.
    pub fn eval(&self, fills: &[Channel<T>]) -> Result<Channel<T>> {
        if fills.len() != self.slots.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} channels for {} slots",
                fills.len(),
                self.slots.len()
            )));
        }
        let (mut x, mut xp) = (SystemType::trivial(), SystemType::trivial());
        for (phi, k) in fills.iter().zip(&self.slots) {
            let (xi, xpi) = k.split_aux(phi)?;
            x = x.concat(&xi)?;
            xp = xp.concat(&xpi)?;
        }
        let out = (self.eval)(fills)?;
        let want_in = self.target.base_in.concat(&x)?;
        let want_out = self.target.base_out.concat(&xp)?;
        if !out.in_type().same_factors(&want_in) || !out.out_type().same_factors(&want_out) {
            return Err(Error::TypeMismatch(format!(
                "oracle `{}` returned {} → {}, expected {want_in} → {want_out}",
                self.name,
                out.in_type(),
                out.out_type()
            )));
        }
        Ok(out)
    }

    /// The oracle of a multi-slot supermap.
    pub fn embed(m: &MultiSupermap<T>) -> Self {
        let m = m.clone();
        Self::new(
            "embed",
            m.slots().to_vec(),
            m.target().clone(),
            move |fills| m.apply(fills),
        )
    }

    /// Single-slot oracle with every other slot fixed to the given aux-free
    /// channels, in slot order.
    pub fn curry(&self, keep: usize, fills: &[Channel<T>]) -> Result<LatOracle<T>> {
        if keep >= self.slots.len() || fills.len() + 1 != self.slots.len() {
            return Err(Error::ShapeMismatch(format!(
                "currying slot {keep} of {} needs {} channels",
                self.slots.len(),
                self.slots.len().saturating_sub(1)
            )));
        }
        for (phi, k) in fills
            .iter()
            .zip(self.slots.iter().enumerate().filter(|(j, _)| *j != keep))
        {
            let (x, xp) = k.1.split_aux(phi)?;
            if !x.is_empty() || !xp.is_empty() {
                return Err(Error::TypeMismatch(
                    "a fixed slot takes a channel without aux systems".into(),
                ));
            }
        }
        let me = self.clone();
        let fills = fills.to_vec();
        Ok(LatOracle::new(
            format!("{}[slot {keep}]", self.name),
            self.slots[keep].clone(),
            self.target.clone(),
            move |_, _, phi| {
                let mut all = fills.clone();
                all.insert(keep, phi.clone());
                me.eval(&all)
            },
        ))
    }

    /// Recovers the multi-slot supermap by feeding every slot its own swap
    /// and bending the single result.
    pub fn extract(&self) -> Result<MultiSupermap<T>> {
        let mut swaps = Vec::with_capacity(self.slots.len());
        for (i, k) in self.slots.iter().enumerate() {
            if !(k.normal && k.convex) {
                return Err(Error::NotNormalConvex(k.kind_name()));
            }
            swaps.push(swap_channel::<T>(
                &k.base_in,
                &k.base_out,
                slot_swap_in(i),
                slot_swap_out(i),
            )?);
        }
        let image = self.eval(&swaps)?;
        if !image.is_deterministic() {
            return Err(Error::NonDeterministic(image.trace_deviation()));
        }
        let b = &self.target.base_in;
        let mut t = image.tensor().clone();
        let mut bi = SystemType::trivial();
        for (i, k) in self.slots.iter().enumerate() {
            let (a, ap) = (&k.base_in, &k.base_out);
            // B is bent once, together with the first slot
            let bent_b = if i == 0 {
                b.clone()
            } else {
                SystemType::trivial()
            };
            t = bend_swap_image(t, a, ap, &bent_b, slot_swap_in(i), slot_swap_out(i))?;
            bi = bi.concat(&a.dual())?.concat(ap)?;
        }
        let bo = b.dual().concat(&self.target.base_out)?;
        MultiSupermap::new(
            self.slots.clone(),
            self.target.clone(),
            Channel::from_tensor(&bi, &bo, t)?,
        )
    }

    /// The single-slot local-applicability checks for each slot with the
    /// other slots fixed to seeded members of their sets.
    pub fn check_local_applicability(
        &self,
        trials: usize,
        seed: u64,
        tol: f64,
    ) -> Result<Vec<LocalApplicabilityReport>> {
        (0..self.slots.len())
            .map(|i| {
                let mut rng: ChaCha8Rng = rng_from(seed ^ (i as u64).wrapping_mul(0x9e37_79b9));
                let fills = self
                    .slots
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, k)| sample_member(k, &mut rng))
                    .collect::<Result<Vec<_>>>()?;
                check_local_applicability(
                    &self.curry(i, &fills)?,
                    trials,
                    seed.wrapping_add(i as u64),
                    tol,
                )
            })
            .collect()
    }
}
