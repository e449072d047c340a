//! Classical processes as nonnegative real matrices. A process `A → B` is a
//! `|B| x |A|` matrix acting on column vectors; channels are the
//! column-stochastic ones. The generic machinery (control, signaling,
//! supermaps, oracles) runs on [`Channel<Classical>`], and the matrices here
//! convert to and from it.

use rand_chacha::ChaCha8Rng;

use crate::channels::{Channel, Classical, Theory};
use crate::error::{Error, Result};
use crate::rng::rng_from;
use crate::tensor::SystemType;

/// Column-sum tolerance of [`StochasticMatrix`].
pub const STOCHASTIC_TOL: f64 = 1e-10;

/// Entrywise nonnegative real matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct NonnegMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl NonnegMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(x) = data.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::TypeMismatch(format!(
                "entry {x} is not a nonnegative number"
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let data = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| f(i, j))
            .collect();
        Self::new(rows, cols, data)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 }).expect("0/1 entries")
    }

    /// The all-ones row vector: the discard effect on `n` outcomes.
    pub fn discard(n: usize) -> Self {
        Self::from_fn(1, n, |_, _| 1.0).expect("unit entries")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Result<Self> {
        Self::new(
            self.rows,
            self.cols,
            self.data.iter().map(|x| x * s).collect(),
        )
    }

    /// `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self.get(i / r2, j / c2) * other.get(i % r2, j % c2)
        })
        .expect("products of nonnegative entries")
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &Self) -> Result<Self> {
        if self.cols != first.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot compose {}x{} after {}x{}",
                self.rows, self.cols, first.rows, first.cols
            )));
        }
        Self::from_fn(self.rows, first.cols, |i, j| {
            (0..self.cols)
                .map(|k| self.get(i, k) * first.get(k, j))
                .sum()
        })
    }

    /// Largest deviation of a column sum from 1.
    pub fn column_sum_deviation(&self) -> f64 {
        (0..self.cols)
            .map(|j| ((0..self.rows).map(|i| self.get(i, j)).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_stochastic(&self, tol: f64) -> bool {
        self.column_sum_deviation() <= tol
    }

    /// The process `input → output`; the matrix must be
    /// `output.total_dim() x input.total_dim()`.
    pub fn to_channel(
        &self,
        input: &SystemType,
        output: &SystemType,
    ) -> Result<Channel<Classical>> {
        if self.rows != output.total_dim() || self.cols != input.total_dim() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix for {input} → {output}",
                self.rows, self.cols
            )));
        }
        let data = (0..self.cols)
            .flat_map(|a| (0..self.rows).map(move |b| (a, b)))
            .map(|(a, b)| self.get(b, a))
            .collect();
        Channel::from_data(input, output, data)
    }

    /// Matrix of a classical process, rows indexed by outputs.
    pub fn from_channel(c: &Channel<Classical>) -> Result<Self> {
        let (di, d_out) = (c.in_type().total_dim(), c.out_type().total_dim());
        let data = c.tensor().data();
        Self::from_fn(d_out, di, |b, a| data[a * d_out + b])
    }
}

/// Column-stochastic matrix: a classical channel.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix(NonnegMatrix);

impl StochasticMatrix {
    pub fn new(m: NonnegMatrix) -> Result<Self> {
        if !m.is_stochastic(STOCHASTIC_TOL) {
            return Err(Error::NonDeterministic(m.column_sum_deviation()));
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(NonnegMatrix::identity(n))
    }

    /// Random `rows x cols` stochastic matrix with columns drawn uniformly
    /// from the simplex.
    pub fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        let input = SystemType::single("i", cols)?;
        let output = SystemType::single("o", rows)?;
        Self::from_channel(&Classical::random_channel(&input, &output, rng))
    }

    pub fn matrix(&self) -> &NonnegMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> NonnegMatrix {
        self.0
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kron(&other.0))
    }

    pub fn compose(&self, first: &Self) -> Result<Self> {
        Self::new(self.0.compose(&first.0)?)
    }

    pub fn to_channel(
        &self,
        input: &SystemType,
        output: &SystemType,
    ) -> Result<Channel<Classical>> {
        self.0.to_channel(input, output)
    }

    pub fn from_channel(c: &Channel<Classical>) -> Result<Self> {
        Self::new(NonnegMatrix::from_channel(c)?)
    }
}

/// Seeded random stochastic matrix.
pub fn random_stochastic(rows: usize, cols: usize, seed: u64) -> Result<StochasticMatrix> {
    StochasticMatrix::random(rows, cols, &mut rng_from(seed))
}

/// A splitting `λσ + σ' = discard` of a nonnegative effect `σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectCompletion {
    pub lambda: f64,
    pub complement: NonnegMatrix,
}

impl EffectCompletion {
    /// `‖λσ + σ' − discard‖_∞`.
    pub fn residual(&self, sigma: &NonnegMatrix) -> f64 {
        sigma
            .data()
            .iter()
            .zip(self.complement.data())
            .map(|(s, c)| (self.lambda * s + c - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Completes a nonzero nonnegative row vector `σ` to the discard effect with
/// `λ = 1 / max σ` and `σ' = 1 − λσ`.
pub fn complete_effect(sigma: &NonnegMatrix) -> Result<EffectCompletion> {
    if sigma.rows() != 1 {
        return Err(Error::ShapeMismatch(format!(
            "effect must be a row vector, got {} rows",
            sigma.rows()
        )));
    }
    let top = sigma.max_entry();
    if top <= 0.0 {
        return Err(Error::TypeMismatch(
            "the zero effect has no completion".into(),
        ));
    }
    let lambda = 1.0 / top;
    // λσᵢ ≤ 1, so the complement is nonnegative up to rounding
    let complement = NonnegMatrix::from_fn(1, sigma.cols(), |_, j| {
        (1.0 - lambda * sigma.get(0, j)).max(0.0)
    })?;
    Ok(EffectCompletion { lambda, complement })
}
