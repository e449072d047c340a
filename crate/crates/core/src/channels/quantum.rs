use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::theory::{random_isometry, Quantum};
use super::Channel;
use crate::error::{Error, Result};
use crate::tensor::{permute_axes, ComplexMatrix, SystemType};

/// Axis permutation taking a Choi operator `C[(a, b), (a', b')]` to the
/// doubled-leg layout `[(a₁,a₁'), …, (b₁,b₁'), …]`.
fn choi_to_doubled(m: usize, n: usize) -> Vec<usize> {
    let k = m + n;
    (0..k).flat_map(|j| [j, k + j]).collect()
}

fn doubled_to_choi(m: usize, n: usize) -> Vec<usize> {
    let k = m + n;
    (0..k)
        .map(|j| 2 * j)
        .chain((0..k).map(|j| 2 * j + 1))
        .collect()
}

fn factor_dims(input: &SystemType, output: &SystemType) -> Vec<usize> {
    input
        .factors()
        .iter()
        .chain(output.factors())
        .map(|f| f.dim)
        .collect()
}

impl Channel<Quantum> {
    /// Builds a channel from its Choi operator
    /// `C = Σᵢⱼ |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`, input factors first.
    pub fn from_choi_matrix(
        input: &SystemType,
        output: &SystemType,
        choi: &ComplexMatrix,
    ) -> Result<Self> {
        let n = input.total_dim() * output.total_dim();
        if choi.rows() != n || choi.cols() != n {
            return Err(Error::ShapeMismatch(format!(
                "Choi operator of {} → {} must be {n}x{n}, got {}x{}",
                input,
                output,
                choi.rows(),
                choi.cols()
            )));
        }
        let fd = factor_dims(input, output);
        let dims: Vec<usize> = fd.iter().chain(&fd).copied().collect();
        let perm = choi_to_doubled(input.len(), output.len());
        let data = permute_axes(choi.data(), &dims, &perm);
        Self::from_data(input, output, data)
    }

    /// Choi operator, input factors first.
    pub fn choi_matrix(&self) -> ComplexMatrix {
        let fd = factor_dims(self.in_type(), self.out_type());
        let dims: Vec<usize> = fd.iter().flat_map(|&d| [d, d]).collect();
        let perm = doubled_to_choi(self.in_type().len(), self.out_type().len());
        let data = permute_axes(self.tensor().data(), &dims, &perm);
        let n: usize = fd.iter().product();
        ComplexMatrix::new(n, n, data).expect("Choi operator is square")
    }

    /// CP map with Kraus operators `Kₖ` (each `d_out x d_in`).
    pub fn from_kraus(
        input: &SystemType,
        output: &SystemType,
        kraus: &[ComplexMatrix],
    ) -> Result<Self> {
        let (di, d_out) = (input.total_dim(), output.total_dim());
        if kraus.is_empty() {
            return Err(Error::ShapeMismatch("no Kraus operators".into()));
        }
        let n = di * d_out;
        let mut choi = ComplexMatrix::zeros(n, n);
        for k in kraus {
            if k.rows() != d_out || k.cols() != di {
                return Err(Error::ShapeMismatch(format!(
                    "Kraus operator is {}x{}, expected {d_out}x{di}",
                    k.rows(),
                    k.cols()
                )));
            }
            // |K⟩⟩[(a, b)] = K[b, a]
            let v: Vec<Complex64> = (0..di)
                .flat_map(|a| (0..d_out).map(move |b| (a, b)))
                .map(|(a, b)| k.get(b, a))
                .collect();
            choi = &choi + &ComplexMatrix::projector(&v);
        }
        Self::from_choi_matrix(input, output, &choi)
    }

    /// Unitary (or general single-Kraus) conjugation `ρ ↦ UρU†` on `t`.
    pub fn unitary(t: &SystemType, u: &ComplexMatrix) -> Result<Self> {
        Self::from_kraus(t, t, std::slice::from_ref(u))
    }

    /// State `I → t` with density operator `rho`.
    pub fn state(t: &SystemType, rho: &ComplexMatrix) -> Result<Self> {
        Self::from_choi_matrix(&SystemType::trivial(), t, rho)
    }

    /// Effect `t → I` with POVM element `e`: `ρ ↦ tr(eρ)`.
    pub fn effect(t: &SystemType, e: &ComplexMatrix) -> Result<Self> {
        Self::from_choi_matrix(t, &SystemType::trivial(), &e.transpose())
    }

    /// Density operator of a process with trivial input.
    pub fn state_matrix(&self) -> Result<ComplexMatrix> {
        if !self.in_type().is_empty() {
            return Err(Error::TypeMismatch("not a state".into()));
        }
        Ok(self.choi_matrix())
    }

    /// Applies the channel to a density operator on the full input type.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.in_type().total_dim();
        if rho.rows() != d || rho.cols() != d {
            return Err(Error::DimMismatch {
                label: self.in_type().to_string(),
                left: d,
                right: rho.rows(),
            });
        }
        let s = Self::state(self.in_type(), rho)?;
        Channel::link(&s, self)?.state_matrix()
    }

    /// Random deterministic channel `Φ(ρ) = Tr_env(VρV†)` for a random
    /// isometry `V`. `env_dim` is raised to the smallest value admitting an
    /// isometry when needed.
    pub fn random(
        input: &SystemType,
        output: &SystemType,
        env_dim: usize,
        seed: u64,
    ) -> Result<Self> {
        if env_dim == 0 {
            return Err(Error::InvalidDimension("environment of dimension 0".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self::random_with_rng(input, output, env_dim, &mut rng))
    }

    pub(crate) fn random_with_rng(
        input: &SystemType,
        output: &SystemType,
        env_dim: usize,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let (di, d_out) = (input.total_dim(), output.total_dim());
        let env = env_dim.max(di.div_ceil(d_out));
        let v = random_isometry(di, d_out * env, rng);
        // K_e[o, i] = V[(o, e), i]
        let kraus: Vec<ComplexMatrix> = (0..env)
            .map(|e| ComplexMatrix::from_fn(d_out, di, |o, i| v.get(o * env + e, i)))
            .collect();
        Self::from_kraus(input, output, &kraus).expect("Kraus shapes match the types")
    }

    /// The transpose map `ρ ↦ ρᵀ` on `t` (positive but not completely positive).
    pub fn transpose_map(t: &SystemType) -> Self {
        let d = t.total_dim();
        // Choi operator is the swap Σ |i⟩⟨j| ⊗ |j⟩⟨i|
        let swap = ComplexMatrix::from_fn(d * d, d * d, |r, c| {
            let (i, o) = (r / d, r % d);
            let (j, p) = (c / d, c % d);
            if i == p && o == j {
                1.0.into()
            } else {
                0.0.into()
            }
        });
        Self::from_choi_matrix(t, t, &swap).expect("swap has Choi shape")
    }
}
