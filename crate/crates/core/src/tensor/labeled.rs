use std::collections::HashSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::ComplexMatrix;
use super::scalar::{matmul, permute_axes, Scalar};
use crate::error::{Error, Result};

/// Direction of a wire relative to the box it is attached to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    In,
    Out,
}

impl Polarity {
    pub fn flip(self) -> Self {
        match self {
            Polarity::In => Polarity::Out,
            Polarity::Out => Polarity::In,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Leg {
    pub label: String,
    pub dim: usize,
    pub polarity: Polarity,
}

impl Leg {
    pub fn new(label: impl Into<String>, dim: usize, polarity: Polarity) -> Self {
        Self {
            label: label.into(),
            dim,
            polarity,
        }
    }

    pub fn input(label: impl Into<String>, dim: usize) -> Self {
        Self::new(label, dim, Polarity::In)
    }

    pub fn output(label: impl Into<String>, dim: usize) -> Self {
        Self::new(label, dim, Polarity::Out)
    }
}

/// Dense tensor with named, polarized legs.
///
/// Legs are kept with all in-legs before all out-legs, and `data` is the
/// row-major array over the legs in that order, so it doubles as a
/// `rows x cols` matrix with rows indexed by in-legs and columns by out-legs.
/// A `(label, polarity)` pair is unique within a tensor; the same label may
/// appear once as an in-leg and once as an out-leg.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T: Scalar = Complex64> {
    legs: Vec<Leg>,
    data: Vec<T>,
}

pub type LabeledTensor = Tensor<Complex64>;

/// Names one leg of a tensor.
pub type LegRef<'a> = (&'a str, Polarity);

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

fn check_unique(legs: &[Leg]) -> Result<()> {
    let mut seen = HashSet::new();
    for l in legs {
        if l.dim == 0 {
            return Err(Error::InvalidDimension(format!(
                "leg `{}` has dim 0",
                l.label
            )));
        }
        if !seen.insert((l.label.as_str(), l.polarity)) {
            return Err(Error::DuplicateLabel(l.label.clone()));
        }
    }
    Ok(())
}

impl<T: Scalar> Tensor<T> {
    /// Builds a tensor whose `data` is row-major over `legs` in the given
    /// order. Legs are then normalized so in-legs come first.
    pub fn new(legs: Vec<Leg>, data: Vec<T>) -> Result<Self> {
        check_unique(&legs)?;
        let total: usize = legs.iter().map(|l| l.dim).product();
        if data.len() != total {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for legs of total size {total}",
                data.len()
            )));
        }
        Ok(Self::normalized(legs, data))
    }

    fn normalized(legs: Vec<Leg>, data: Vec<T>) -> Self {
        let mut perm: Vec<usize> = (0..legs.len())
            .filter(|&i| legs[i].polarity == Polarity::In)
            .collect();
        perm.extend((0..legs.len()).filter(|&i| legs[i].polarity == Polarity::Out));
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return Self { legs, data };
        }
        let dims: Vec<usize> = legs.iter().map(|l| l.dim).collect();
        let data = permute_axes(&data, &dims, &perm);
        let legs = perm.iter().map(|&p| legs[p].clone()).collect();
        Self { legs, data }
    }

    pub fn from_fn(legs: Vec<Leg>, mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        check_unique(&legs)?;
        let dims: Vec<usize> = legs.iter().map(|l| l.dim).collect();
        let total: usize = dims.iter().product();
        let mut idx = vec![0usize; dims.len()];
        let mut data = Vec::with_capacity(total);
        for _ in 0..total {
            data.push(f(&idx));
            for ax in (0..dims.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < dims[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        Ok(Self::normalized(legs, data))
    }

    pub fn zeros(legs: Vec<Leg>) -> Result<Self> {
        let total: usize = legs.iter().map(|l| l.dim).product();
        Self::new(legs, vec![T::zero(); total])
    }

    pub fn scalar(v: T) -> Self {
        Self {
            legs: Vec::new(),
            data: vec![v],
        }
    }

    /// Builds a tensor from a matrix whose rows index `ins` and columns index
    /// `outs`, each grouped row-major.
    pub fn from_grouped(ins: Vec<Leg>, outs: Vec<Leg>, data: Vec<T>) -> Result<Self> {
        if ins.iter().any(|l| l.polarity != Polarity::In)
            || outs.iter().any(|l| l.polarity != Polarity::Out)
        {
            return Err(Error::ShapeMismatch(
                "leg groups have the wrong polarity".into(),
            ));
        }
        let mut legs = ins;
        legs.extend(outs);
        Self::new(legs, data)
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn in_legs(&self) -> impl Iterator<Item = &Leg> {
        self.legs.iter().filter(|l| l.polarity == Polarity::In)
    }

    pub fn out_legs(&self) -> impl Iterator<Item = &Leg> {
        self.legs.iter().filter(|l| l.polarity == Polarity::Out)
    }

    pub fn rows(&self) -> usize {
        self.in_legs().map(|l| l.dim).product()
    }

    pub fn cols(&self) -> usize {
        self.out_legs().map(|l| l.dim).product()
    }

    pub fn position(&self, label: &str, polarity: Polarity) -> Option<usize> {
        self.legs
            .iter()
            .position(|l| l.label == label && l.polarity == polarity)
    }

    pub fn leg(&self, label: &str, polarity: Polarity) -> Result<&Leg> {
        self.position(label, polarity)
            .map(|i| &self.legs[i])
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn has_leg(&self, label: &str, polarity: Polarity) -> bool {
        self.position(label, polarity).is_some()
    }

    /// Value of a tensor with no legs, or with only dimension-1 legs.
    pub fn as_scalar(&self) -> Option<T> {
        (self.data.len() == 1).then(|| self.data[0])
    }

    /// Entry at a multi-index given in leg order.
    pub fn get(&self, idx: &[usize]) -> T {
        let dims: Vec<usize> = self.legs.iter().map(|l| l.dim).collect();
        let st = strides(&dims);
        self.data[idx.iter().zip(&st).map(|(i, s)| i * s).sum::<usize>()]
    }

    /// Reorders legs: new leg `j` is old leg `perm[j]`. Because in-legs are
    /// always stored first, only the relative order within each polarity
    /// group is observable.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let n = self.legs.len();
        let mut seen = vec![false; n];
        if perm.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "permutation of length {} for {n} legs",
                perm.len()
            )));
        }
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::ShapeMismatch("not a permutation".into()));
            }
            seen[p] = true;
        }
        let dims: Vec<usize> = self.legs.iter().map(|l| l.dim).collect();
        let data = permute_axes(&self.data, &dims, perm);
        let legs = perm.iter().map(|&p| self.legs[p].clone()).collect();
        Ok(Self::normalized(legs, data))
    }

    /// Reorders legs so that in-legs follow `ins` and out-legs follow `outs`.
    pub fn reorder(&self, ins: &[&str], outs: &[&str]) -> Result<Self> {
        let nin = self.in_legs().count();
        if ins.len() != nin || outs.len() != self.legs.len() - nin {
            return Err(Error::ShapeMismatch(
                "reorder must name every leg exactly once".into(),
            ));
        }
        let mut perm = Vec::with_capacity(self.legs.len());
        for l in ins {
            perm.push(
                self.position(l, Polarity::In)
                    .ok_or_else(|| Error::UnknownLabel(l.to_string()))?,
            );
        }
        for l in outs {
            perm.push(
                self.position(l, Polarity::Out)
                    .ok_or_else(|| Error::UnknownLabel(l.to_string()))?,
            );
        }
        self.permute(&perm)
    }

    /// Same data with legs ordered like `reference` (matched by label and
    /// polarity). Errors when the leg sets differ.
    pub fn aligned_to(&self, reference: &[Leg]) -> Result<Self> {
        if reference.len() != self.legs.len() {
            return Err(Error::ShapeMismatch("leg sets differ".into()));
        }
        let mut perm = Vec::with_capacity(reference.len());
        for r in reference {
            let p = self
                .position(&r.label, r.polarity)
                .ok_or_else(|| Error::UnknownLabel(r.label.clone()))?;
            if self.legs[p].dim != r.dim {
                return Err(Error::DimMismatch {
                    label: r.label.clone(),
                    left: self.legs[p].dim,
                    right: r.dim,
                });
            }
            perm.push(p);
        }
        self.permute(&perm)
    }

    pub fn relabel(&self, old: &str, polarity: Polarity, new: &str) -> Result<Self> {
        let p = self
            .position(old, polarity)
            .ok_or_else(|| Error::UnknownLabel(old.to_string()))?;
        let mut legs = self.legs.clone();
        legs[p].label = new.to_string();
        check_unique(&legs)?;
        Ok(Self {
            legs,
            data: self.data.clone(),
        })
    }

    /// Applies `f` to every label.
    pub fn relabel_with(&self, f: impl Fn(&str, Polarity) -> String) -> Result<Self> {
        let legs: Vec<Leg> = self
            .legs
            .iter()
            .map(|l| Leg::new(f(&l.label, l.polarity), l.dim, l.polarity))
            .collect();
        check_unique(&legs)?;
        Ok(Self {
            legs,
            data: self.data.clone(),
        })
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            legs: self.legs.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|x| x * s)
    }

    pub fn conj(&self) -> Self {
        self.map(|x| x.conj())
    }

    /// Entrywise sum; `other` is aligned to this tensor's legs by label.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let o = other.aligned_to(&self.legs)?;
        Ok(Self {
            legs: self.legs.clone(),
            data: self
                .data
                .iter()
                .zip(&o.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-T::one()))
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius distance after aligning legs by label.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        let o = other.aligned_to(&self.legs)?;
        Ok(self
            .data
            .iter()
            .zip(&o.data)
            .map(|(&a, &b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Contracts explicit leg pairs: each `(label, polarity)` of `self` is
    /// joined with the leg of `other` named by the second entry, which must
    /// have the opposite polarity and the same dimension. Unpaired legs of
    /// both tensors survive; with no pairs this is the tensor product.
    pub fn contract_pairs(&self, other: &Self, pairs: &[(LegRef<'_>, &str)]) -> Result<Self> {
        let mut used_a = vec![false; self.legs.len()];
        let mut used_b = vec![false; other.legs.len()];
        let mut ca = Vec::with_capacity(pairs.len());
        let mut cb = Vec::with_capacity(pairs.len());
        for &((la, pa), lb) in pairs {
            let ia = self
                .position(la, pa)
                .ok_or_else(|| Error::UnknownLabel(la.to_string()))?;
            let ib = other
                .position(lb, pa.flip())
                .ok_or_else(|| match other.position(lb, pa) {
                    Some(_) => Error::PolarityClash(lb.to_string()),
                    None => Error::UnknownLabel(lb.to_string()),
                })?;
            if used_a[ia] || used_b[ib] {
                return Err(Error::DuplicateLabel(la.to_string()));
            }
            let (da, db) = (self.legs[ia].dim, other.legs[ib].dim);
            if da != db {
                return Err(Error::DimMismatch {
                    label: la.to_string(),
                    left: da,
                    right: db,
                });
            }
            used_a[ia] = true;
            used_b[ib] = true;
            ca.push(ia);
            cb.push(ib);
        }
        let free_a: Vec<usize> = (0..self.legs.len()).filter(|&i| !used_a[i]).collect();
        let free_b: Vec<usize> = (0..other.legs.len()).filter(|&i| !used_b[i]).collect();

        let mut legs: Vec<Leg> = free_a.iter().map(|&i| self.legs[i].clone()).collect();
        legs.extend(free_b.iter().map(|&i| other.legs[i].clone()));
        check_unique(&legs)?;

        let dims_a: Vec<usize> = self.legs.iter().map(|l| l.dim).collect();
        let dims_b: Vec<usize> = other.legs.iter().map(|l| l.dim).collect();
        let perm_a: Vec<usize> = free_a.iter().chain(&ca).copied().collect();
        let perm_b: Vec<usize> = cb.iter().chain(&free_b).copied().collect();
        let a = permute_axes(&self.data, &dims_a, &perm_a);
        let b = permute_axes(&other.data, &dims_b, &perm_b);
        let m: usize = free_a.iter().map(|&i| dims_a[i]).product();
        let k: usize = ca.iter().map(|&i| dims_a[i]).product();
        let n: usize = free_b.iter().map(|&i| dims_b[i]).product();
        let data = matmul(&a, &b, m, k, n);
        Ok(Self::normalized(legs, data))
    }

    /// Contracts the legs named in `shared`. For each label, an out-leg of
    /// `self` is joined to an in-leg of `other` when both exist; otherwise an
    /// in-leg of `self` is joined to an out-leg of `other`.
    pub fn contract(&self, other: &Self, shared: &[&str]) -> Result<Self> {
        let mut pairs = Vec::with_capacity(shared.len());
        for &l in shared {
            if self.has_leg(l, Polarity::Out) && other.has_leg(l, Polarity::In) {
                pairs.push(((l, Polarity::Out), l));
            } else if self.has_leg(l, Polarity::In) && other.has_leg(l, Polarity::Out) {
                pairs.push(((l, Polarity::In), l));
            } else if (self.has_leg(l, Polarity::Out) || self.has_leg(l, Polarity::In))
                && (other.has_leg(l, Polarity::Out) || other.has_leg(l, Polarity::In))
            {
                return Err(Error::PolarityClash(l.to_string()));
            } else {
                return Err(Error::UnknownLabel(l.to_string()));
            }
        }
        self.contract_pairs(other, &pairs)
    }

    /// Tensor product; leg sets must be disjoint per polarity.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.contract_pairs(other, &[])
    }

    /// Joins in-leg `in_label` to out-leg `out_label` of the same tensor.
    pub fn trace_pairs(&self, pairs: &[(&str, &str)]) -> Result<Self> {
        let mut traced_in = Vec::new();
        let mut traced_out = Vec::new();
        for &(li, lo) in pairs {
            let i = self
                .position(li, Polarity::In)
                .ok_or_else(|| Error::UnknownLabel(li.to_string()))?;
            let o = self
                .position(lo, Polarity::Out)
                .ok_or_else(|| Error::UnknownLabel(lo.to_string()))?;
            if traced_in.contains(&i) || traced_out.contains(&o) {
                return Err(Error::DuplicateLabel(li.to_string()));
            }
            if self.legs[i].dim != self.legs[o].dim {
                return Err(Error::DimMismatch {
                    label: li.to_string(),
                    left: self.legs[i].dim,
                    right: self.legs[o].dim,
                });
            }
            traced_in.push(i);
            traced_out.push(o);
        }
        let free: Vec<usize> = (0..self.legs.len())
            .filter(|i| !traced_in.contains(i) && !traced_out.contains(i))
            .collect();
        let dims: Vec<usize> = self.legs.iter().map(|l| l.dim).collect();
        let perm: Vec<usize> = free
            .iter()
            .chain(&traced_in)
            .chain(&traced_out)
            .copied()
            .collect();
        let arr = permute_axes(&self.data, &dims, &perm);
        let nf: usize = free.iter().map(|&i| dims[i]).product();
        let k: usize = traced_in.iter().map(|&i| dims[i]).product();
        let mut data = vec![T::zero(); nf];
        for (f, slot) in data.iter_mut().enumerate() {
            let base = f * k * k;
            for j in 0..k {
                *slot += arr[base + j * k + j];
            }
        }
        let legs = free.iter().map(|&i| self.legs[i].clone()).collect();
        Ok(Self::normalized(legs, data))
    }

    /// Traces out each label that names both an in-leg and an out-leg.
    pub fn partial_trace(&self, labels: &[&str]) -> Result<Self> {
        let pairs: Vec<(&str, &str)> = labels.iter().map(|&l| (l, l)).collect();
        self.trace_pairs(&pairs)
    }

    /// Full trace: every in-leg must be matched by an out-leg with the same label.
    pub fn trace(&self) -> Result<T> {
        let labels: Vec<&str> = self.in_legs().map(|l| l.label.as_str()).collect();
        let t = self.partial_trace(&labels)?;
        if !t.legs.is_empty() {
            return Err(Error::ShapeMismatch(
                "unmatched legs remain after trace".into(),
            ));
        }
        Ok(t.data[0])
    }

    /// Identity wires: an in-leg and an out-leg for each `(label, dim)`.
    pub fn identity(wires: &[(&str, usize)]) -> Result<Self> {
        let mut legs: Vec<Leg> = wires.iter().map(|&(l, d)| Leg::input(l, d)).collect();
        legs.extend(wires.iter().map(|&(l, d)| Leg::output(l, d)));
        let n = wires.len();
        Self::from_fn(legs, |idx| {
            if (0..n).all(|k| idx[k] == idx[n + k]) {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    /// Delta tensor joining the given leg index pairs; every leg must occur in
    /// exactly one pair and paired legs must share a dimension.
    pub fn wiring(legs: Vec<Leg>, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut hit = vec![0u8; legs.len()];
        for &(a, b) in pairs {
            if a >= legs.len() || b >= legs.len() || a == b {
                return Err(Error::ShapeMismatch("wiring pair out of range".into()));
            }
            hit[a] += 1;
            hit[b] += 1;
            if legs[a].dim != legs[b].dim {
                return Err(Error::DimMismatch {
                    label: legs[a].label.clone(),
                    left: legs[a].dim,
                    right: legs[b].dim,
                });
            }
        }
        if hit.iter().any(|&h| h != 1) {
            return Err(Error::ShapeMismatch(
                "every leg must be wired exactly once".into(),
            ));
        }
        Self::from_fn(legs, |idx| {
            if pairs.iter().all(|&(a, b)| idx[a] == idx[b]) {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    /// Bends an in-leg round to become an out-leg named `new_label`, by
    /// contracting it with a cup.
    pub fn bend_in_to_out(&self, label: &str, new_label: &str) -> Result<Self> {
        let d = self.leg(label, Polarity::In)?.dim;
        let cup = bell_cup::<T>(d, BEND_TMP, new_label)?;
        self.contract_pairs(&cup, &[((label, Polarity::In), BEND_TMP)])
    }

    /// Bends an out-leg round to become an in-leg named `new_label`, by
    /// contracting it with a cap.
    pub fn bend_out_to_in(&self, label: &str, new_label: &str) -> Result<Self> {
        let d = self.leg(label, Polarity::Out)?.dim;
        let cap = bell_cap::<T>(d, BEND_TMP, new_label)?;
        self.contract_pairs(&cap, &[((label, Polarity::Out), BEND_TMP)])
    }
}

const BEND_TMP: &str = "\u{1}bend";

/// Unnormalized cup `Σᵢ |ii⟩`: two out-legs `left`, `right`.
pub fn bell_cup<T: Scalar>(d: usize, left: &str, right: &str) -> Result<Tensor<T>> {
    if d == 0 {
        return Err(Error::InvalidDimension("cup of dimension 0".into()));
    }
    Tensor::wiring(vec![Leg::output(left, d), Leg::output(right, d)], &[(0, 1)])
}

/// Unnormalized cap `Σᵢ ⟨ii|`: two in-legs `left`, `right`.
pub fn bell_cap<T: Scalar>(d: usize, left: &str, right: &str) -> Result<Tensor<T>> {
    if d == 0 {
        return Err(Error::InvalidDimension("cap of dimension 0".into()));
    }
    Tensor::wiring(vec![Leg::input(left, d), Leg::input(right, d)], &[(0, 1)])
}

impl Tensor<Complex64> {
    /// Tensor of a linear operator `M: ins → outs` (`M` is `out_dim x in_dim`).
    /// Rows of the stored data index inputs, so `data = Mᵀ`.
    pub fn from_operator(
        ins: &[(&str, usize)],
        outs: &[(&str, usize)],
        m: &ComplexMatrix,
    ) -> Result<Self> {
        let ri: usize = ins.iter().map(|x| x.1).product();
        let co: usize = outs.iter().map(|x| x.1).product();
        if m.rows() != co || m.cols() != ri {
            return Err(Error::ShapeMismatch(format!(
                "operator is {}x{}, legs need {co}x{ri}",
                m.rows(),
                m.cols()
            )));
        }
        let legs_in = ins.iter().map(|&(l, d)| Leg::input(l, d)).collect();
        let legs_out = outs.iter().map(|&(l, d)| Leg::output(l, d)).collect();
        Self::from_grouped(legs_in, legs_out, m.transpose().into_data())
    }

    /// Inverse of [`Tensor::from_operator`] for the current leg order.
    pub fn to_operator(&self) -> ComplexMatrix {
        ComplexMatrix::new(self.rows(), self.cols(), self.data.clone())
            .expect("tensor data matches its legs")
            .transpose()
    }

    /// The stored data as a `rows x cols` matrix (in-legs by out-legs).
    pub fn as_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::new(self.rows(), self.cols(), self.data.clone())
            .expect("tensor data matches its legs")
    }

    /// Density operator `|v⟩⟨v|` of a ket with out-legs only, as an operator
    /// tensor with matching in- and out-legs.
    pub fn ket_to_density(&self) -> Result<Self> {
        if self.in_legs().next().is_some() {
            return Err(Error::ShapeMismatch("ket must have out-legs only".into()));
        }
        let wires: Vec<(&str, usize)> = self
            .legs
            .iter()
            .map(|l| (l.label.as_str(), l.dim))
            .collect();
        let rho = ComplexMatrix::projector(&self.data);
        Self::from_operator(&wires, &wires, &rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::matrix::gates::*;
    use crate::tensor::matrix::kron;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample(legs: Vec<Leg>, seed: u64) -> LabeledTensor {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        Tensor::from_fn(legs, |_| {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let a = ((s >> 33) as f64 / (1u64 << 31) as f64) - 0.5;
            let b = ((s >> 11) % 1000) as f64 / 1000.0 - 0.5;
            c(a, b)
        })
        .unwrap()
    }

    #[test]
    fn legs_are_normalized_ins_first() {
        let t = Tensor::<f64>::new(
            vec![Leg::output("o", 2), Leg::input("i", 3)],
            (0..6).map(|x| x as f64).collect(),
        )
        .unwrap();
        assert_eq!(t.legs()[0].label, "i");
        assert_eq!(t.rows(), 3);
        assert_eq!(t.cols(), 2);
        // old [o][i] = o*3 + i, new [i][o]
        assert_eq!(t.get(&[2, 1]), 5.0);
    }

    #[test]
    fn same_label_both_polarities_allowed() {
        let t = Tensor::<f64>::identity(&[("a", 2)]).unwrap();
        assert_eq!(t.legs().len(), 2);
        assert!(Tensor::<f64>::zeros(vec![Leg::input("a", 2), Leg::input("a", 2)]).is_err());
    }

    #[test]
    fn partial_trace_of_product_state() {
        let ra = ComplexMatrix::from_real_rows(&[&[0.7, 0.2], &[0.2, 0.3]]);
        let rb = ComplexMatrix::from_real_rows(&[&[0.25, 0.0], &[0.0, 0.5]]);
        let t = Tensor::from_operator(
            &[("a", 2), ("b", 2)],
            &[("a", 2), ("b", 2)],
            &kron(&ra, &rb),
        )
        .unwrap();
        let r = t.partial_trace(&["b"]).unwrap();
        let expect = ra.scale(rb.trace());
        assert!(r.to_operator().distance(&expect) < 1e-14);
    }

    #[test]
    fn full_trace_is_scalar() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let t = Tensor::from_operator(&[("a", 2)], &[("a", 2)], &m).unwrap();
        let s = t.partial_trace(&["a"]).unwrap();
        assert!(s.legs().is_empty());
        assert_eq!(s.as_scalar().unwrap(), c(5.0, 0.0));
        assert_eq!(t.trace().unwrap(), c(5.0, 0.0));
    }

    #[test]
    fn cup_as_state_traces_to_identity() {
        let cup = bell_cup::<Complex64>(2, "l", "r").unwrap();
        let rho = cup.ket_to_density().unwrap();
        let r = rho.partial_trace(&["r"]).unwrap();
        assert!(r.to_operator().distance(&ComplexMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn partial_trace_errors() {
        let t = Tensor::<f64>::identity(&[("a", 2)]).unwrap();
        assert!(matches!(
            t.partial_trace(&["z"]),
            Err(Error::UnknownLabel(_))
        ));
        let u = Tensor::<f64>::zeros(vec![Leg::input("a", 2), Leg::output("a", 3)]).unwrap();
        assert!(matches!(
            u.partial_trace(&["a"]),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn cup_cap_scalars() {
        let one = bell_cup::<f64>(1, "l", "r").unwrap();
        assert_eq!(one.as_scalar(), Some(1.0));
        for d in 1..5 {
            let cup = bell_cup::<f64>(d, "l", "r").unwrap();
            let cap = bell_cap::<f64>(d, "l", "r").unwrap();
            let s = cup.contract(&cap, &["l", "r"]).unwrap();
            assert_eq!(s.as_scalar(), Some(d as f64));
        }
        assert!(bell_cup::<f64>(0, "l", "r").is_err());
    }

    #[test]
    fn snake_identity() {
        for d in 1..5 {
            // (cap ⊗ id) ∘ (id ⊗ cup): wire `x` enters the cap, leaves through the cup.
            let cup = bell_cup::<Complex64>(d, "m", "y").unwrap();
            let cap = bell_cap::<Complex64>(d, "x", "m").unwrap();
            let s = cap.contract(&cup, &["m"]).unwrap();
            let s = s.relabel("x", Polarity::In, "w").unwrap();
            let s = s.relabel("y", Polarity::Out, "w").unwrap();
            let id = Tensor::identity(&[("w", d)]).unwrap();
            assert!(s.distance(&id).unwrap() < 1e-12);
        }
    }

    #[test]
    fn bend_roundtrip() {
        let t = sample(vec![Leg::input("a", 2), Leg::output("b", 3)], 3);
        let u = t.bend_in_to_out("a", "a*").unwrap();
        assert!(u.in_legs().next().is_none());
        let back = u.bend_out_to_in("a*", "a").unwrap();
        assert!(back.distance(&t).unwrap() < 1e-15);
    }

    #[test]
    fn contract_with_identity() {
        let t = sample(
            vec![Leg::input("a", 2), Leg::output("b", 3), Leg::output("c", 2)],
            7,
        );
        let id = Tensor::identity(&[("b", 3), ("c", 2)]).unwrap();
        let r = t.contract(&id, &["b", "c"]).unwrap();
        assert!(r.distance(&t).unwrap() < 1e-15);
    }

    #[test]
    fn contract_composes_operators() {
        let x = Tensor::from_operator(&[("a", 2)], &[("m", 2)], &pauli_x()).unwrap();
        let z = Tensor::from_operator(&[("m", 2)], &[("b", 2)], &pauli_z()).unwrap();
        let zx = x.contract(&z, &["m"]).unwrap();
        let expect = &pauli_z() * &pauli_x();
        assert!(zx.to_operator().distance(&expect) < 1e-15);
    }

    #[test]
    fn contract_errors() {
        let a = Tensor::<f64>::zeros(vec![Leg::output("x", 2)]).unwrap();
        let b = Tensor::<f64>::zeros(vec![Leg::output("x", 2)]).unwrap();
        assert!(matches!(
            a.contract(&b, &["x"]),
            Err(Error::PolarityClash(_))
        ));
        let c3 = Tensor::<f64>::zeros(vec![Leg::input("x", 3)]).unwrap();
        assert!(matches!(
            a.contract(&c3, &["x"]),
            Err(Error::DimMismatch { .. })
        ));
        assert!(matches!(
            a.contract(&c3, &["q"]),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn contraction_is_associative() {
        let t1 = sample(vec![Leg::input("a", 2), Leg::output("b", 3)], 1);
        let t2 = sample(
            vec![Leg::input("b", 3), Leg::output("c", 2), Leg::output("e", 3)],
            2,
        );
        let t3 = sample(vec![Leg::input("c", 2), Leg::output("d", 3)], 3);
        let l = t1
            .contract(&t2, &["b"])
            .unwrap()
            .contract(&t3, &["c"])
            .unwrap();
        let r = t1
            .contract(&t2.contract(&t3, &["c"]).unwrap(), &["b"])
            .unwrap();
        assert!(l.distance(&r).unwrap() < 1e-13);
    }

    #[test]
    fn reorder_and_back() {
        let t = sample(
            vec![
                Leg::input("a", 2),
                Leg::input("b", 3),
                Leg::output("c", 2),
                Leg::output("d", 3),
            ],
            9,
        );
        let u = t.reorder(&["b", "a"], &["d", "c"]).unwrap();
        assert_eq!(u.get(&[2, 1, 0, 1]), t.get(&[1, 2, 1, 0]));
        let back = u.reorder(&["a", "b"], &["c", "d"]).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn wiring_rejects_bad_pairs() {
        let legs = vec![Leg::input("a", 2), Leg::output("b", 3)];
        assert!(Tensor::<f64>::wiring(legs.clone(), &[(0, 1)]).is_err());
        assert!(Tensor::<f64>::wiring(legs, &[]).is_err());
    }
}
