use std::fmt;
use std::sync::Arc;

use crate::channels::{Channel, ChannelSetSpec, Quantum, Theory};
use crate::error::{Error, Result};
use crate::supermaps::{Comb, Supermap};
use crate::tensor::{dual_label, Polarity, Scalar, SystemType, Tensor};

pub(crate) type EvalFn<T> =
    dyn Fn(&SystemType, &SystemType, &Channel<T>) -> Result<Channel<T>> + Send + Sync;

/// A locally-applicable transformation given as a black box: for every aux
/// pair `(X, X')` it maps channels `A⊗X → A'⊗X'` of the source's dilation
/// extension to channels `B⊗X → B'⊗X'`.
#[derive(Clone)]
pub struct LatOracle<T: Theory = Quantum> {
    name: String,
    source: ChannelSetSpec<T>,
    target: ChannelSetSpec<T>,
    eval: Arc<EvalFn<T>>,
}

impl<T: Theory> fmt::Debug for LatOracle<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LatOracle")
            .field("name", &self.name)
            .field("source", &self.source.kind_name())
            .field("target", &self.target.kind_name())
            .finish()
    }
}

pub(crate) fn swap_in(l: &str) -> String {
    format!("~swap.in.{l}")
}

pub(crate) fn swap_out(l: &str) -> String {
    format!("~swap.out.{l}")
}

/// `SWAP: A⊗X → A'⊗X'` with `X ≅ A'` and `X' ≅ A`, built with the given
/// aux labelings.
pub(crate) fn swap_channel<T: Theory>(
    a: &SystemType,
    ap: &SystemType,
    xin: impl Fn(&str) -> String,
    xout: impl Fn(&str) -> String,
) -> Result<Channel<T>> {
    let x = ap.map_labels(&xin)?;
    let xp = a.map_labels(&xout)?;
    let xin_labels: Vec<String> = ap.labels().iter().map(|l| xin(l)).collect();
    let xout_labels: Vec<String> = a.labels().iter().map(|l| xout(l)).collect();
    let mut pairs: Vec<(&str, &str)> = a
        .labels()
        .into_iter()
        .zip(xout_labels.iter().map(String::as_str))
        .collect();
    pairs.extend(xin_labels.iter().map(String::as_str).zip(ap.labels()));
    Channel::wire(&a.concat(&x)?, &ap.concat(&xp)?, &pairs)
}

/// Turns the oracle's image of the swap, a channel `B⊗X → B'⊗X'` with
/// `X ≅ A'` and `X' ≅ A`, into a body `A*⊗A' → B*⊗B'`: `B` inputs are bent
/// into `B*` outputs with cups, the `X' ≅ A` outputs into `A*` inputs with
/// caps, and the `X ≅ A'` inputs are renamed to `A'`.
pub(crate) fn bend_swap_image<S: Scalar>(
    mut t: Tensor<S>,
    a: &SystemType,
    ap: &SystemType,
    b: &SystemType,
    xin: impl Fn(&str) -> String,
    xout: impl Fn(&str) -> String,
) -> Result<Tensor<S>> {
    for l in b.labels() {
        t = t.bend_in_to_out(l, &dual_label(l))?;
    }
    for l in a.labels() {
        t = t.bend_out_to_in(&xout(l), &dual_label(l))?;
    }
    for l in ap.labels() {
        t = t.relabel(&xin(l), Polarity::In, l)?;
    }
    Ok(t)
}

impl<T: Theory> LatOracle<T> {
    pub fn new(
        name: impl Into<String>,
        source: ChannelSetSpec<T>,
        target: ChannelSetSpec<T>,
        eval: impl Fn(&SystemType, &SystemType, &Channel<T>) -> Result<Channel<T>>
            + Send
            + Sync
            + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            source,
            target,
            eval: Arc::new(eval),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &ChannelSetSpec<T> {
        &self.source
    }

    pub fn target(&self) -> &ChannelSetSpec<T> {
        &self.target
    }

    /// Evaluates on `phi: A⊗X → A'⊗X'`; the aux types are read off `phi`
    /// and the output type is checked to be `B⊗X → B'⊗X'`.
    pub fn eval(&self, phi: &Channel<T>) -> Result<Channel<T>> {
        let (x, xp) = self.source.split_aux(phi)?;
        let out = (self.eval)(&x, &xp, phi)?;
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

    /// The oracle of a supermap: `phi ↦ S(phi)`.
    pub fn embed(s: &Supermap<T>) -> Self {
        let s = s.clone();
        Self::new(
            "embed",
            s.source().clone(),
            s.target().clone(),
            move |_, _, phi| s.apply(phi),
        )
    }

    /// The oracle that runs a comb: `phi ↦ post∘(id_E⊗phi)∘pre`.
    pub fn from_comb(c: &Comb<T>) -> Self {
        let c = c.clone();
        let (a, ap) = c.slot();
        let (b, bp) = c.outer();
        let (src, tgt) = (ChannelSetSpec::all(a, ap), ChannelSetSpec::all(b, bp));
        Self::new("comb", src, tgt, move |_, _, phi| c.apply(phi))
    }

    /// The identity transformation on `(a, a')`.
    pub fn identity(a: &SystemType, ap: &SystemType) -> Self {
        let k = ChannelSetSpec::all(a, ap);
        Self::new("identity", k.clone(), k, |_, _, phi| Ok(phi.clone()))
    }

    /// Pointwise composition: `self` first, then `next`.
    pub fn then(&self, next: &Self) -> Result<Self> {
        if !self.target.base_in.same_factors(&next.source.base_in)
            || !self.target.base_out.same_factors(&next.source.base_out)
        {
            return Err(Error::TypeMismatch(format!(
                "cannot compose `{}` into `{}`",
                self.name, next.name
            )));
        }
        let (first, second) = (self.clone(), next.clone());
        Ok(Self::new(
            format!("{}∘{}", next.name, self.name),
            self.source.clone(),
            next.target.clone(),
            move |_, _, phi| second.eval(&first.eval(phi)?),
        ))
    }

    /// Recovers the supermap behind the oracle by applying it to the swap
    /// `A⊗A' → A'⊗A` (a member of the source's dilation extension when the
    /// source is normal and convex) and bending the result.
    pub fn extract(&self) -> Result<Supermap<T>> {
        if !(self.source.normal && self.source.convex) {
            return Err(Error::NotNormalConvex(self.source.kind_name()));
        }
        let (a, ap) = (&self.source.base_in, &self.source.base_out);
        let (b, bp) = (&self.target.base_in, &self.target.base_out);
        let swap = swap_channel::<T>(a, ap, swap_in, swap_out)?;
        let image = self.eval(&swap)?;
        if !image.is_deterministic() {
            return Err(Error::NonDeterministic(image.trace_deviation()));
        }
        let t = bend_swap_image(image.tensor().clone(), a, ap, b, swap_in, swap_out)?;
        let (bi, bo) = (a.dual().concat(ap)?, b.dual().concat(bp)?);
        Supermap::new(
            self.source.clone(),
            self.target.clone(),
            Channel::from_tensor(&bi, &bo, t)?,
        )
    }
}

/// Oracle that keeps only the reduced behavior of its input: the base part
/// is the supermap applied to `phi` with the uniform state on `X` and `X'`
/// discarded, and `X'` is re-prepared in its marginal state independently of
/// everything else. Agrees with the supermap when the aux is trivial but
/// destroys correlations with the aux.
pub fn decorrelating_oracle<T: Theory>(s: &Supermap<T>) -> LatOracle<T> {
    let s = s.clone();
    LatOracle::new(
        "decorrelating",
        s.source().clone(),
        s.target().clone(),
        move |x, xp, phi| {
            let a = &s.source().base_in;
            let mut reduced = phi.clone();
            if !x.is_empty() {
                reduced = reduced.prepare(&Channel::uniform_state(x))?;
            }
            let marginal = reduced
                .prepare(&Channel::uniform_state(a))?
                .keep_outputs(&xp.labels())?;
            if !xp.is_empty() {
                reduced = reduced.measure(&Channel::discard(xp))?;
            }
            let base = s.apply(&reduced)?;
            base.parallel(&Channel::discard(x))?.parallel(&marginal)
        },
    )
}

/// Oracle mixing two supermaps with a weight that depends on the input's
/// Frobenius norm, `p = ‖phi‖² / (1 + ‖phi‖²)`: `phi ↦ p·S₁(phi) + (1−p)·S₂(phi)`.
/// Outputs are deterministic but the map is not linear.
pub fn nonlinear_oracle<T: Theory>(s1: &Supermap<T>, s2: &Supermap<T>) -> Result<LatOracle<T>> {
    if !s1.source().base_in.same_factors(&s2.source().base_in)
        || !s1.source().base_out.same_factors(&s2.source().base_out)
        || !s1.target().base_in.same_factors(&s2.target().base_in)
        || !s1.target().base_out.same_factors(&s2.target().base_out)
    {
        return Err(Error::TypeMismatch(
            "mixed supermaps must share their types".into(),
        ));
    }
    let (s1, s2) = (s1.clone(), s2.clone());
    Ok(LatOracle::new(
        "nonlinear",
        s1.source().clone(),
        s1.target().clone(),
        move |_, _, phi| {
            let n2 = phi.tensor().norm().powi(2);
            let p = n2 / (1.0 + n2);
            s1.apply(phi)?.mix(p, &s2.apply(phi)?)
        },
    ))
}
