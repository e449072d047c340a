use std::marker::PhantomData;

use num_traits::One;
use serde::Serialize;

use super::theory::{Quantum, Theory};
use crate::error::{Error, Result};
use crate::tensor::{Leg, Polarity, Scalar, SystemType, Tensor};

/// Trace-preservation tolerance used for the `deterministic` flag.
pub const DETERMINISTIC_TOL: f64 = 1e-8;

/// A process between two system types, stored as a labeled tensor with one
/// in-leg per input factor and one out-leg per output factor.
///
/// For the quantum theory a factor of dimension `d` is a leg of dimension
/// `d²` indexed by `(ket, bra)`, and
/// `tensor[(a, a'), (b, b')] = ⟨b| Φ(|a⟩⟨a'|) |b'⟩`. For the classical theory
/// legs have dimension `d` and the tensor is the transposed stochastic matrix.
#[derive(Clone, Debug)]
pub struct Channel<T: Theory = Quantum> {
    in_type: SystemType,
    out_type: SystemType,
    tensor: Tensor<T::Scalar>,
    deterministic: bool,
    _theory: PhantomData<T>,
}

/// Result of [`Channel::is_channel`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ChannelReport {
    pub cp: bool,
    pub tp: bool,
}

fn legs_for<T: Theory>(t: &SystemType, polarity: Polarity) -> Vec<Leg> {
    t.factors()
        .iter()
        .map(|f| Leg::new(f.label.clone(), T::leg_dim(f.dim), polarity))
        .collect()
}

/// Tensor product of one single-leg vector per factor.
fn per_factor<T: Theory>(
    t: &SystemType,
    polarity: Polarity,
    f: impl Fn(usize) -> Vec<T::Scalar>,
) -> Tensor<T::Scalar> {
    let mut acc = Tensor::scalar(T::Scalar::one());
    for fac in t.factors() {
        let leg = Leg::new(fac.label.clone(), T::leg_dim(fac.dim), polarity);
        let piece = Tensor::new(vec![leg], f(fac.dim)).expect("single-leg vector has leg size");
        acc = acc.product(&piece).expect("factor labels are unique");
    }
    acc
}

impl<T: Theory> Channel<T> {
    /// Wraps a tensor whose legs match `input` (in-legs) and `output`
    /// (out-legs) by label; the tensor is reordered to the factor order.
    pub fn from_tensor(
        input: &SystemType,
        output: &SystemType,
        tensor: Tensor<T::Scalar>,
    ) -> Result<Self> {
        let mut reference = legs_for::<T>(input, Polarity::In);
        reference.extend(legs_for::<T>(output, Polarity::Out));
        let tensor = tensor.aligned_to(&reference).map_err(|e| match e {
            Error::UnknownLabel(_) | Error::ShapeMismatch(_) => {
                Error::TypeMismatch(format!("tensor legs do not match {input} → {output}"))
            }
            other => other,
        })?;
        let mut c = Self {
            in_type: input.clone(),
            out_type: output.clone(),
            tensor,
            deterministic: false,
            _theory: PhantomData,
        };
        c.deterministic = c.trace_deviation() <= DETERMINISTIC_TOL;
        Ok(c)
    }

    /// Builds a channel from data grouped as (inputs) x (outputs), each group
    /// row-major over its factors in type order.
    pub fn from_data(
        input: &SystemType,
        output: &SystemType,
        data: Vec<T::Scalar>,
    ) -> Result<Self> {
        let t = Tensor::from_grouped(
            legs_for::<T>(input, Polarity::In),
            legs_for::<T>(output, Polarity::Out),
            data,
        )?;
        Self::from_tensor(input, output, t)
    }

    pub fn in_type(&self) -> &SystemType {
        &self.in_type
    }

    pub fn out_type(&self) -> &SystemType {
        &self.out_type
    }

    pub fn tensor(&self) -> &Tensor<T::Scalar> {
        &self.tensor
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    /// Identity on every factor of `t`.
    pub fn identity(t: &SystemType) -> Self {
        let wires: Vec<(&str, usize)> = t
            .factors()
            .iter()
            .map(|f| (f.label.as_str(), T::leg_dim(f.dim)))
            .collect();
        let tensor = Tensor::identity(&wires).expect("labels are unique");
        Self::from_tensor(t, t, tensor).expect("identity matches its type")
    }

    /// Routing channel sending input factor `from` to output factor `to` for
    /// each pair. Every factor must be routed exactly once.
    pub fn wire(input: &SystemType, output: &SystemType, pairs: &[(&str, &str)]) -> Result<Self> {
        let mut legs = legs_for::<T>(input, Polarity::In);
        let n_in = legs.len();
        legs.extend(legs_for::<T>(output, Polarity::Out));
        let mut idx = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            let ia = input
                .labels()
                .iter()
                .position(|l| *l == a)
                .ok_or_else(|| Error::UnknownLabel(a.to_string()))?;
            let ib = output
                .labels()
                .iter()
                .position(|l| *l == b)
                .ok_or_else(|| Error::UnknownLabel(b.to_string()))?;
            idx.push((ia, n_in + ib));
        }
        let tensor = Tensor::wiring(legs, &idx)?;
        Self::from_tensor(input, output, tensor)
    }

    /// Trace effect on `t`: a channel `t → I`.
    pub fn discard(t: &SystemType) -> Self {
        let tensor = per_factor::<T>(t, Polarity::In, T::discard_vec);
        Self::from_tensor(t, &SystemType::trivial(), tensor).expect("discard matches its type")
    }

    /// Maximally mixed (uniform) state on `t`: a channel `I → t`.
    pub fn uniform_state(t: &SystemType) -> Self {
        let tensor = per_factor::<T>(t, Polarity::Out, T::uniform_vec);
        Self::from_tensor(&SystemType::trivial(), t, tensor).expect("state matches its type")
    }

    /// Basis state `k` on a single-factor type.
    pub fn basis_state(t: &SystemType, k: usize) -> Result<Self> {
        let d = single_dim(t, k)?;
        Self::from_data(&SystemType::trivial(), t, T::basis_state_vec(d, k))
    }

    /// Basis effect `k` on a single-factor type.
    pub fn basis_effect(t: &SystemType, k: usize) -> Result<Self> {
        let d = single_dim(t, k)?;
        Self::from_data(t, &SystemType::trivial(), T::basis_effect_vec(d, k))
    }

    /// Sum of squared deviations of `discard ∘ self` from `discard`, square-rooted.
    pub fn trace_deviation(&self) -> f64 {
        let traced = if self.out_type.is_empty() {
            self.tensor.clone()
        } else {
            let d = Self::discard(&self.out_type);
            let labels = self.out_type.labels();
            self.tensor
                .contract(d.tensor(), &labels)
                .expect("discard matches the outputs")
        };
        let target = per_factor::<T>(&self.in_type, Polarity::In, T::discard_vec);
        traced.distance(&target).expect("in-legs agree")
    }

    pub fn is_channel(&self, tol: f64) -> ChannelReport {
        ChannelReport {
            cp: T::is_positive(self, tol),
            tp: self.trace_deviation() <= tol,
        }
    }

    /// General composition: outputs of `first` whose labels are inputs of
    /// `second` are joined; every other wire passes through. With no shared
    /// labels this is the tensor product.
    pub fn link(first: &Self, second: &Self) -> Result<Self> {
        let shared: Vec<&str> = first
            .out_type
            .labels()
            .into_iter()
            .filter(|l| second.in_type.contains(l))
            .collect();
        Self::link_over(first, second, &shared)
    }

    /// Composition joining only the listed labels.
    pub fn link_over(first: &Self, second: &Self, shared: &[&str]) -> Result<Self> {
        for &l in shared {
            let a = first.out_type.dim_of(l)?;
            let b = second.in_type.dim_of(l)?;
            if a != b {
                return Err(Error::DimMismatch {
                    label: l.to_string(),
                    left: a,
                    right: b,
                });
            }
        }
        let input = first.in_type.concat(&second.in_type.without(shared))?;
        let output = first.out_type.without(shared).concat(&second.out_type)?;
        let pairs: Vec<_> = shared.iter().map(|&l| ((l, Polarity::Out), l)).collect();
        let tensor = first.tensor.contract_pairs(&second.tensor, &pairs)?;
        Self::from_tensor(&input, &output, tensor)
    }

    /// Sequential composition `second ∘ first`; every output of `first` must
    /// be an input of `second` and vice versa.
    pub fn then(&self, second: &Self) -> Result<Self> {
        if !self.out_type.same_factors(&second.in_type) {
            return Err(Error::TypeMismatch(format!(
                "cannot compose {} with {}",
                self.out_type, second.in_type
            )));
        }
        Self::link(self, second)
    }

    /// Parallel composition; labels must be disjoint.
    pub fn parallel(&self, other: &Self) -> Result<Self> {
        let input = self.in_type.concat(&other.in_type)?;
        let output = self.out_type.concat(&other.out_type)?;
        let tensor = self.tensor.product(&other.tensor)?;
        Self::from_tensor(&input, &output, tensor)
    }

    /// Feeds `state` (a channel with trivial input) into the matching inputs.
    pub fn prepare(&self, state: &Self) -> Result<Self> {
        if !state.in_type.is_empty() {
            return Err(Error::TypeMismatch(
                "prepared process must have trivial input".into(),
            ));
        }
        for f in state.out_type.factors() {
            if self.in_type.get(&f.label) != Some(f) {
                return Err(Error::UnknownLabel(f.label.clone()));
            }
        }
        Self::link(state, self)
    }

    /// Applies `effect` (a channel with trivial output) to the matching outputs.
    pub fn measure(&self, effect: &Self) -> Result<Self> {
        if !effect.out_type.is_empty() {
            return Err(Error::TypeMismatch(
                "effect must have trivial output".into(),
            ));
        }
        for f in effect.in_type.factors() {
            if self.out_type.get(&f.label) != Some(f) {
                return Err(Error::UnknownLabel(f.label.clone()));
            }
        }
        Self::link(self, effect)
    }

    /// Discards the named outputs.
    pub fn discard_outputs(&self, labels: &[&str]) -> Result<Self> {
        let t = self.out_type.select(labels)?;
        self.measure(&Self::discard(&t))
    }

    /// Discards every output except the named ones.
    pub fn keep_outputs(&self, labels: &[&str]) -> Result<Self> {
        for l in labels {
            self.out_type.dim_of(l)?;
        }
        let drop = self.out_type.without(labels);
        if drop.is_empty() {
            return Ok(self.clone());
        }
        self.measure(&Self::discard(&drop))
    }

    /// Renames factors on both sides.
    pub fn relabel(&self, f: impl Fn(&str) -> String) -> Result<Self> {
        let input = self.in_type.map_labels(&f)?;
        let output = self.out_type.map_labels(&f)?;
        let tensor = self.tensor.relabel_with(|l, _| f(l))?;
        Self::from_tensor(&input, &output, tensor)
    }

    /// Renames input factors only.
    pub fn relabel_inputs(&self, f: impl Fn(&str) -> String) -> Result<Self> {
        let input = self.in_type.map_labels(&f)?;
        let tensor = self.tensor.relabel_with(|l, p| match p {
            Polarity::In => f(l),
            Polarity::Out => l.to_string(),
        })?;
        Self::from_tensor(&input, &self.out_type, tensor)
    }

    /// Renames output factors only.
    pub fn relabel_outputs(&self, f: impl Fn(&str) -> String) -> Result<Self> {
        let output = self.out_type.map_labels(&f)?;
        let tensor = self.tensor.relabel_with(|l, p| match p {
            Polarity::Out => f(l),
            Polarity::In => l.to_string(),
        })?;
        Self::from_tensor(&self.in_type, &output, tensor)
    }

    pub fn scale(&self, s: f64) -> Self {
        let tensor = self.tensor.scale(T::Scalar::from_real(s));
        Self::from_tensor(&self.in_type, &self.out_type, tensor).expect("same legs")
    }

    /// Sum of two processes of the same type (labels matched, order free).
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_type(other)?;
        let tensor = self.tensor.add(&other.tensor)?;
        Self::from_tensor(&self.in_type, &self.out_type, tensor)
    }

    /// `p·self + (1−p)·other`.
    pub fn mix(&self, p: f64, other: &Self) -> Result<Self> {
        self.scale(p).add(&other.scale(1.0 - p))
    }

    /// Frobenius distance of the process tensors, matched by label. For the
    /// quantum theory this equals the Frobenius distance of Choi operators.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_same_type(other)?;
        self.tensor.distance(&other.tensor)
    }

    fn check_same_type(&self, other: &Self) -> Result<()> {
        if !self.in_type.same_factors(&other.in_type)
            || !self.out_type.same_factors(&other.out_type)
        {
            return Err(Error::TypeMismatch(format!(
                "{} → {} vs {} → {}",
                self.in_type, self.out_type, other.in_type, other.out_type
            )));
        }
        Ok(())
    }

    /// Value of a process with trivial input and output.
    pub fn as_scalar(&self) -> Option<T::Scalar> {
        (self.in_type.is_empty() && self.out_type.is_empty()).then(|| self.tensor.data()[0])
    }
}

fn single_dim(t: &SystemType, k: usize) -> Result<usize> {
    if t.len() != 1 {
        return Err(Error::TypeMismatch(format!(
            "expected a single factor, got {t}"
        )));
    }
    let d = t.factors()[0].dim;
    if k >= d {
        return Err(Error::InvalidDimension(format!(
            "basis index {k} out of range for dim {d}"
        )));
    }
    Ok(d)
}
