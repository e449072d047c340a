use rand::Rng;

use super::supermap::{aux_of, body_types, close, plug, Supermap, SupermapReport, INNER_TRIALS};
use crate::channels::{
    in_dilation_extension, sample_dext, Channel, ChannelSetSpec, Quantum, SignalingRelation, Theory,
};
use crate::error::{Error, Result};
use crate::report::run_trials;
use crate::tensor::{bell_cap, dual_label, SystemType, Tensor};

/// A supermap with several slots `(Aᵢ, Aᵢ')` and one target `(B, B')`. The
/// body is a process `A₁*⊗A₁'⊗…⊗Aₙ*⊗Aₙ' → B*⊗B'`.
#[derive(Clone, Debug)]
pub struct MultiSupermap<T: Theory = Quantum> {
    slots: Vec<ChannelSetSpec<T>>,
    target: ChannelSetSpec<T>,
    body: Channel<T>,
}

fn slot_body_in<T: Theory>(slots: &[ChannelSetSpec<T>]) -> Result<SystemType> {
    let mut t = SystemType::trivial();
    for s in slots {
        t = t.concat(&s.base_in.dual())?.concat(&s.base_out)?;
    }
    Ok(t)
}

impl<T: Theory> MultiSupermap<T> {
    pub fn new(
        slots: Vec<ChannelSetSpec<T>>,
        target: ChannelSetSpec<T>,
        body: Channel<T>,
    ) -> Result<Self> {
        let bi = slot_body_in(&slots)?;
        let bo = target.base_in.dual().concat(&target.base_out)?;
        if !body.in_type().same_factors(&bi) || !body.out_type().same_factors(&bo) {
            return Err(Error::TypeMismatch(format!(
                "multi-slot body must be {bi} → {bo}, got {} → {}",
                body.in_type(),
                body.out_type()
            )));
        }
        let body = Channel::from_tensor(&bi, &bo, body.tensor().clone())?;
        Ok(Self {
            slots,
            target,
            body,
        })
    }

    pub fn from_supermap(s: &Supermap<T>) -> Self {
        Self {
            slots: vec![s.source().clone()],
            target: s.target().clone(),
            body: s.body().clone(),
        }
    }

    pub fn n_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[ChannelSetSpec<T>] {
        &self.slots
    }

    pub fn target(&self) -> &ChannelSetSpec<T> {
        &self.target
    }

    pub fn body(&self) -> &Channel<T> {
        &self.body
    }

    /// Applies the supermap to one channel per slot; slot `i`'s channel is
    /// `Aᵢ⊗Xᵢ → Aᵢ'⊗Xᵢ'` and the result is `B⊗X₁⊗… → B'⊗X₁'⊗…`.
    pub fn apply(&self, fills: &[Channel<T>]) -> Result<Channel<T>> {
        if fills.len() != self.slots.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} channels for {} slots",
                fills.len(),
                self.slots.len()
            )));
        }
        let mut t = self.body.tensor().clone();
        let (mut x, mut xp) = (SystemType::trivial(), SystemType::trivial());
        for (phi, k) in fills.iter().zip(&self.slots) {
            let (xi, xpi) = aux_of(phi, &k.base_in, &k.base_out)?;
            x = x.concat(&xi)?;
            xp = xp.concat(&xpi)?;
            t = plug(&t, phi, &k.base_in, &k.base_out)?;
        }
        close(t, &self.target.base_in, &self.target.base_out, &x, &xp)
    }

    /// Plugs an aux-free channel into slot `i`, leaving the other slots open.
    pub fn fill_slot(&self, i: usize, phi: &Channel<T>) -> Result<Self> {
        let k = self
            .slots
            .get(i)
            .ok_or_else(|| Error::ShapeMismatch(format!("no slot {i}")))?;
        let (x, xp) = aux_of(phi, &k.base_in, &k.base_out)?;
        if !x.is_empty() || !xp.is_empty() {
            return Err(Error::TypeMismatch(
                "a filled slot takes a channel without aux systems".into(),
            ));
        }
        let t = plug(self.body.tensor(), phi, &k.base_in, &k.base_out)?;
        let mut slots = self.slots.clone();
        slots.remove(i);
        let bi = slot_body_in(&slots)?;
        let bo = self.body.out_type().clone();
        Self::new(
            slots,
            self.target.clone(),
            Channel::from_tensor(&bi, &bo, t)?,
        )
    }

    /// Single-slot view with every remaining slot filled, in slot order.
    pub fn curry(&self, keep: usize, fills: &[Channel<T>]) -> Result<Supermap<T>> {
        if keep >= self.slots.len() || fills.len() + 1 != self.slots.len() {
            return Err(Error::ShapeMismatch(format!(
                "currying slot {keep} of {} needs {} channels",
                self.slots.len(),
                self.slots.len().saturating_sub(1)
            )));
        }
        let others: Vec<usize> = (0..self.slots.len()).filter(|&j| j != keep).collect();
        let mut m = self.clone();
        // highest slot first so lower indices stay valid
        for (&j, phi) in others.iter().zip(fills).rev() {
            m = m.fill_slot(j, phi)?;
        }
        m.into_supermap_single()
    }

    fn into_supermap_single(self) -> Result<Supermap<T>> {
        if self.slots.len() != 1 {
            return Err(Error::ShapeMismatch("expected one open slot".into()));
        }
        let source = self.slots.into_iter().next().expect("one slot");
        Supermap::new(source, self.target, self.body)
    }

    /// Checks positivity of the body and typing on independently extended
    /// slot inputs: slot `i` receives a seeded element of its own dilation
    /// extension with private aux of dim 1 to 3, and the output must be
    /// deterministic and in the target's extension.
    pub fn check(&self, trials: usize, seed: u64, tol: f64) -> Result<SupermapReport> {
        let cp = T::is_positive(&self.body, tol);
        let typing = run_trials("typing", trials, seed, tol, |s, rng| {
            let mut fills = Vec::with_capacity(self.slots.len());
            for (i, k) in self.slots.iter().enumerate() {
                let x = SystemType::single(format!("~aux.x{i}"), rng.random_range(1..=3))?;
                let xp = SystemType::single(format!("~aux.x{i}'"), rng.random_range(1..=3))?;
                fills.push(sample_dext(k, &x, &xp, rng)?);
            }
            let out = self.apply(&fills)?;
            let dev = out.trace_deviation();
            if dev > tol {
                return Ok(dev);
            }
            if !in_dilation_extension(&out, &self.target, INNER_TRIALS, s, tol)? {
                return Ok(f64::INFINITY);
            }
            Ok(dev)
        })?;
        Ok(SupermapReport { cp, typing })
    }

    /// Nesting: the target of `inner[i]` fills slot `i` of `self`; the
    /// result has the slots of all inner maps, in order.
    pub fn nest(&self, inner: &[MultiSupermap<T>]) -> Result<Self> {
        if inner.len() != self.slots.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} inner maps for {} slots",
                inner.len(),
                self.slots.len()
            )));
        }
        let mut body = self.body.clone();
        let mut slots = Vec::new();
        for (m, k) in inner.iter().zip(&self.slots) {
            if !m.target.base_in.same_factors(&k.base_in)
                || !m.target.base_out.same_factors(&k.base_out)
            {
                return Err(Error::TypeMismatch(format!(
                    "inner target ({}, {}) does not fill slot ({}, {})",
                    m.target.base_in, m.target.base_out, k.base_in, k.base_out
                )));
            }
            let shared = k.base_in.dual().concat(&k.base_out)?;
            body = Channel::link_over(&m.body, &body, &shared.labels())?;
            slots.extend(m.slots.iter().cloned());
        }
        Self::new(slots, self.target.clone(), body)
    }

    /// All slots merged into one: `A = A₁⊗…`, `A' = A₁'⊗…`, typed on the
    /// given set over the merged types.
    pub fn as_supermap(&self, source: ChannelSetSpec<T>) -> Result<Supermap<T>> {
        Supermap::new(source, self.target.clone(), self.body.clone())
    }

    /// Merged types `(A₁⊗…, A₁'⊗…)`.
    pub fn merged_slot_types(&self) -> Result<(SystemType, SystemType)> {
        let mut a = SystemType::trivial();
        let mut ap = SystemType::trivial();
        for k in &self.slots {
            a = a.concat(&k.base_in)?;
            ap = ap.concat(&k.base_out)?;
        }
        Ok((a, ap))
    }

    /// Merged single-slot view typed on all channels.
    pub fn as_supermap_all(&self) -> Result<Supermap<T>> {
        let (a, ap) = self.merged_slot_types()?;
        self.as_supermap(ChannelSetSpec::all(&a, &ap))
    }

    /// Merged single-slot view typed on channels that do not signal between
    /// slots: slot `i`'s outputs may depend only on slot `i`'s inputs.
    pub fn as_supermap_non_signaling(&self) -> Result<Supermap<T>> {
        let (a, ap) = self.merged_slot_types()?;
        let mut forbidden = Vec::new();
        for (i, ki) in self.slots.iter().enumerate() {
            for (j, kj) in self.slots.iter().enumerate() {
                if i == j {
                    continue;
                }
                for b in ki.base_in.labels() {
                    for o in kj.base_out.labels() {
                        forbidden.push((b.to_string(), o.to_string()));
                    }
                }
            }
        }
        let rel = SignalingRelation::new(
            a.labels().iter().map(|s| s.to_string()).collect(),
            ap.labels().iter().map(|s| s.to_string()).collect(),
            forbidden,
        )?;
        self.as_supermap(ChannelSetSpec::signaling(&a, &ap, rel)?)
    }
}

/// Sequential enrichment: slots `A → B` and `B → C`, target `A → C`,
/// acting as `(phi, psi) ↦ psi ∘ phi`. Labels of `a`, `b`, `c` must differ.
pub fn seq_enrichment<T: Theory>(
    a: &SystemType,
    b: &SystemType,
    c: &SystemType,
) -> Result<MultiSupermap<T>> {
    let slots = vec![ChannelSetSpec::all(a, b), ChannelSetSpec::all(b, c)];
    let target = ChannelSetSpec::all(a, c);
    let bi = slot_body_in(&slots)?;
    let (_, bo) = body_types(a, c, a, c)?;
    let wires: Vec<(String, usize)> = a
        .dual()
        .factors()
        .iter()
        .chain(c.factors())
        .map(|f| (f.label.clone(), T::leg_dim(f.dim)))
        .collect();
    let wires_ref: Vec<(&str, usize)> = wires.iter().map(|(l, d)| (l.as_str(), *d)).collect();
    let mut t = Tensor::identity(&wires_ref)?;
    for f in b.factors() {
        t = t.product(&bell_cap(
            T::leg_dim(f.dim),
            &f.label,
            &dual_label(&f.label),
        )?)?;
    }
    MultiSupermap::new(slots, target, Channel::from_tensor(&bi, &bo, t)?)
}

/// Parallel enrichment: slots `A → A'` and `B → B'`, target
/// `A⊗B → A'⊗B'`, acting as `(phi, psi) ↦ phi ⊗ psi`.
pub fn par_enrichment<T: Theory>(
    a: &SystemType,
    ap: &SystemType,
    b: &SystemType,
    bp: &SystemType,
) -> Result<MultiSupermap<T>> {
    let slots = vec![ChannelSetSpec::all(a, ap), ChannelSetSpec::all(b, bp)];
    let (ti, to) = (a.concat(b)?, ap.concat(bp)?);
    let target = ChannelSetSpec::all(&ti, &to);
    let bi = slot_body_in(&slots)?;
    let (_, bo) = body_types(&ti, &to, &ti, &to)?;
    let body = Channel::from_tensor(&bi, &bo, Channel::<T>::identity(&bi).tensor().clone())?;
    MultiSupermap::new(slots, target, body)
}
