use std::fmt::Debug;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use super::Channel;
use crate::tensor::{psd_check, ComplexMatrix, Scalar, SystemType};

/// A process theory realized with dense tensors.
///
/// Every system factor of dimension `d` becomes one tensor leg of dimension
/// [`Theory::leg_dim`]. Quantum legs carry a ket and a bra index, so a process
/// tensor is the superoperator and composition is matrix multiplication in
/// both theories.
pub trait Theory: Copy + Clone + Debug + Default + Send + Sync + 'static {
    type Scalar: Scalar;
    const NAME: &'static str;

    fn leg_dim(d: usize) -> usize;

    /// Trace (marginalization) effect on a single factor, as leg data.
    fn discard_vec(d: usize) -> Vec<Self::Scalar>;

    /// Maximally mixed (uniform) state on a single factor, as leg data.
    fn uniform_vec(d: usize) -> Vec<Self::Scalar>;

    /// Basis state `k` on a single factor.
    fn basis_state_vec(d: usize, k: usize) -> Vec<Self::Scalar>;

    /// Basis effect `k` on a single factor.
    fn basis_effect_vec(d: usize, k: usize) -> Vec<Self::Scalar>;

    /// Complete positivity (quantum) or entrywise nonnegativity (classical).
    fn is_positive(c: &Channel<Self>, tol: f64) -> bool;

    /// Random deterministic channel.
    fn random_channel(
        input: &SystemType,
        output: &SystemType,
        rng: &mut ChaCha8Rng,
    ) -> Channel<Self>;

    /// Random normalized state.
    fn random_state(t: &SystemType, rng: &mut ChaCha8Rng) -> Channel<Self>;

    /// Random effect `e` with `0 ≤ e ≤ discard`.
    fn random_effect(t: &SystemType, rng: &mut ChaCha8Rng) -> Channel<Self>;
}

/// Finite-dimensional quantum theory: CPTP maps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Quantum;

/// Classical theory: stochastic matrices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Classical;

pub(crate) fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// Random isometry `V: d_in → d_out` (`d_out ≥ d_in`) from the QR
/// decomposition of a complex Gaussian matrix.
pub(crate) fn random_isometry(d_in: usize, d_out: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    debug_assert!(d_out >= d_in);
    let g = gaussian_matrix(d_out, d_in, rng).to_faer();
    let qr = g.qr();
    let q = qr.compute_thin_Q();
    let r = qr.thin_R();
    // fix column phases so the distribution does not depend on QR sign conventions
    ComplexMatrix::from_fn(d_out, d_in, |i, j| {
        let rjj = r[(j, j)];
        let n = rjj.norm();
        if n > 0.0 {
            q[(i, j)] * (rjj / n)
        } else {
            q[(i, j)]
        }
    })
}

impl Theory for Quantum {
    type Scalar = Complex64;
    const NAME: &'static str = "quantum";

    fn leg_dim(d: usize) -> usize {
        d * d
    }

    fn discard_vec(d: usize) -> Vec<Complex64> {
        delta_vec(d)
    }

    fn uniform_vec(d: usize) -> Vec<Complex64> {
        let w = 1.0 / d as f64;
        delta_vec::<Complex64>(d)
            .into_iter()
            .map(|x| x * w)
            .collect()
    }

    fn basis_state_vec(d: usize, k: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); d * d];
        v[k * d + k] = 1.0.into();
        v
    }

    fn basis_effect_vec(d: usize, k: usize) -> Vec<Complex64> {
        Self::basis_state_vec(d, k)
    }

    fn is_positive(c: &Channel<Self>, tol: f64) -> bool {
        psd_check(&c.choi_matrix(), tol).unwrap_or(false)
    }

    fn random_channel(
        input: &SystemType,
        output: &SystemType,
        rng: &mut ChaCha8Rng,
    ) -> Channel<Self> {
        let env = rng.random_range(1..=2usize);
        Channel::random_with_rng(input, output, env, rng)
    }

    fn random_state(t: &SystemType, rng: &mut ChaCha8Rng) -> Channel<Self> {
        let d = t.total_dim();
        let rank = rng.random_range(1..=d);
        let g = gaussian_matrix(d, rank, rng);
        let rho = &g * &g.dagger();
        let rho = rho.scale(rho.trace().inv());
        Channel::state(t, &rho).expect("state shape matches its type")
    }

    fn random_effect(t: &SystemType, rng: &mut ChaCha8Rng) -> Channel<Self> {
        let d = t.total_dim();
        let rank = rng.random_range(1..=d);
        let g = gaussian_matrix(d, rank, rng);
        let e = &g * &g.dagger();
        let top = *e
            .hermitian_eigenvalues()
            .expect("Gram matrix is square")
            .last()
            .expect("nonempty");
        let u: f64 = rng.random_range(0.2..1.0);
        let e = e.scale(Complex64::new(u / top, 0.0));
        Channel::effect(t, &e).expect("effect shape matches its type")
    }
}

fn delta_vec<T: Scalar>(d: usize) -> Vec<T> {
    let mut v = vec![T::zero(); d * d];
    for i in 0..d {
        v[i * d + i] = T::one();
    }
    v
}

/// Random probability vector of length `n`.
pub(crate) fn random_simplex(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

impl Theory for Classical {
    type Scalar = f64;
    const NAME: &'static str = "classical";

    fn leg_dim(d: usize) -> usize {
        d
    }

    fn discard_vec(d: usize) -> Vec<f64> {
        vec![1.0; d]
    }

    fn uniform_vec(d: usize) -> Vec<f64> {
        vec![1.0 / d as f64; d]
    }

    fn basis_state_vec(d: usize, k: usize) -> Vec<f64> {
        let mut v = vec![0.0; d];
        v[k] = 1.0;
        v
    }

    fn basis_effect_vec(d: usize, k: usize) -> Vec<f64> {
        Self::basis_state_vec(d, k)
    }

    fn is_positive(c: &Channel<Self>, tol: f64) -> bool {
        c.tensor().data().iter().all(|&x| x >= -tol)
    }

    fn random_channel(
        input: &SystemType,
        output: &SystemType,
        rng: &mut ChaCha8Rng,
    ) -> Channel<Self> {
        let (di, d_out) = (input.total_dim(), output.total_dim());
        let mut data = Vec::with_capacity(di * d_out);
        for _ in 0..di {
            data.extend(random_simplex(d_out, rng));
        }
        Channel::from_data(input, output, data).expect("stochastic data matches its types")
    }

    fn random_state(t: &SystemType, rng: &mut ChaCha8Rng) -> Channel<Self> {
        let p = random_simplex(t.total_dim(), rng);
        Channel::from_data(&SystemType::trivial(), t, p).expect("state data matches its type")
    }

    fn random_effect(t: &SystemType, rng: &mut ChaCha8Rng) -> Channel<Self> {
        let e: Vec<f64> = (0..t.total_dim())
            .map(|_| rng.random_range(0.0..1.0))
            .collect();
        Channel::from_data(t, &SystemType::trivial(), e).expect("effect data matches its type")
    }
}
