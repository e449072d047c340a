use rand::Rng;
use serde::Serialize;

use crate::channels::{
    in_dilation_extension, sample_dext, Channel, ChannelSetSpec, Quantum, Theory,
};
use crate::error::{Error, Result};
use crate::report::{run_trials, CheckReport};
use crate::tensor::{dual_label, ComplexMatrix, Polarity, SystemType, Tensor};

/// Aux labels used by the typing check.
const AUX_IN: &str = "~aux.x";
const AUX_OUT: &str = "~aux.x'";

/// Trials of the inner dilation-extension check on each applied output.
pub(crate) const INNER_TRIALS: usize = 6;

fn tmp_label(l: &str) -> String {
    format!("\u{1}plug.{l}")
}

/// Body types `A*⊗A' → B*⊗B'` of a supermap `(A, A') → (B, B')`.
pub(crate) fn body_types(
    a: &SystemType,
    ap: &SystemType,
    b: &SystemType,
    bp: &SystemType,
) -> Result<(SystemType, SystemType)> {
    Ok((a.dual().concat(ap)?, b.dual().concat(bp)?))
}

/// Checks that `phi` carries the factors of `a` as inputs and of `ap` as
/// outputs, and returns its aux types.
pub(crate) fn aux_of<T: Theory>(
    phi: &Channel<T>,
    a: &SystemType,
    ap: &SystemType,
) -> Result<(SystemType, SystemType)> {
    for (t, base, side) in [(phi.in_type(), a, "input"), (phi.out_type(), ap, "output")] {
        for f in base.factors() {
            if t.get(&f.label) != Some(f) {
                return Err(Error::TypeMismatch(format!(
                    "{side} {t} lacks slot factor {}[{}]",
                    f.label, f.dim
                )));
            }
        }
    }
    Ok((
        phi.in_type().without(&a.labels()),
        phi.out_type().without(&ap.labels()),
    ))
}

/// Plugs `phi` into the slot `(a, a')` of a body tensor: `phi`'s `a` inputs are
/// bent onto the body's `a*` inputs and its `a'` outputs join the body's `a'`
/// inputs. Aux legs of `phi` survive.
pub(crate) fn plug<T: Theory>(
    body: &Tensor<T::Scalar>,
    phi: &Channel<T>,
    a: &SystemType,
    ap: &SystemType,
) -> Result<Tensor<T::Scalar>> {
    aux_of(phi, a, ap)?;
    let mut t = phi.tensor().clone();
    for l in a.labels() {
        t = t.bend_in_to_out(l, &tmp_label(l))?;
    }
    let tmps: Vec<String> = a.labels().iter().map(|l| tmp_label(l)).collect();
    let duals: Vec<String> = a.labels().iter().map(|l| dual_label(l)).collect();
    let mut pairs: Vec<((&str, Polarity), &str)> = tmps
        .iter()
        .zip(&duals)
        .map(|(t, d)| ((t.as_str(), Polarity::Out), d.as_str()))
        .collect();
    pairs.extend(ap.labels().into_iter().map(|l| ((l, Polarity::Out), l)));
    t.contract_pairs(body, &pairs)
}

/// Bends the `b*` outputs of a fully plugged body back into `b` inputs and
/// wraps the result as a channel `b⊗X → b'⊗X'`.
pub(crate) fn close<T: Theory>(
    mut t: Tensor<T::Scalar>,
    b: &SystemType,
    bp: &SystemType,
    x: &SystemType,
    xp: &SystemType,
) -> Result<Channel<T>> {
    for l in b.labels() {
        t = t.bend_out_to_in(&dual_label(l), l)?;
    }
    Channel::from_tensor(&b.concat(x)?, &bp.concat(xp)?, t)
}

/// A supermap `(A, A') → (B, B')` stored as its body: a process
/// `A*⊗A' → B*⊗B'` together with the channel sets it is typed against.
#[derive(Clone, Debug)]
pub struct Supermap<T: Theory = Quantum> {
    source: ChannelSetSpec<T>,
    target: ChannelSetSpec<T>,
    body: Channel<T>,
}

/// Result of [`Supermap::check`].
#[derive(Clone, Debug, Serialize)]
pub struct SupermapReport {
    pub cp: bool,
    pub typing: CheckReport,
}

impl SupermapReport {
    pub fn passed(&self) -> bool {
        self.cp && self.typing.passed()
    }
}

impl<T: Theory> Supermap<T> {
    pub fn new(
        source: ChannelSetSpec<T>,
        target: ChannelSetSpec<T>,
        body: Channel<T>,
    ) -> Result<Self> {
        let (bi, bo) = body_types(
            &source.base_in,
            &source.base_out,
            &target.base_in,
            &target.base_out,
        )?;
        if !body.in_type().same_factors(&bi) || !body.out_type().same_factors(&bo) {
            return Err(Error::TypeMismatch(format!(
                "supermap body must be {bi} → {bo}, got {} → {}",
                body.in_type(),
                body.out_type()
            )));
        }
        let body = Channel::from_tensor(&bi, &bo, body.tensor().clone())?;
        Ok(Self {
            source,
            target,
            body,
        })
    }

    /// The identity supermap on `(a, a')`, typed on all channels.
    pub fn identity(a: &SystemType, ap: &SystemType) -> Result<Self> {
        let k = ChannelSetSpec::all(a, ap);
        let (bi, _) = body_types(a, ap, a, ap)?;
        Self::new(k.clone(), k, Channel::identity(&bi))
    }

    pub fn source(&self) -> &ChannelSetSpec<T> {
        &self.source
    }

    pub fn target(&self) -> &ChannelSetSpec<T> {
        &self.target
    }

    pub fn body(&self) -> &Channel<T> {
        &self.body
    }

    /// Same body, retyped against other channel sets on the same base types.
    pub fn with_types(&self, source: ChannelSetSpec<T>, target: ChannelSetSpec<T>) -> Result<Self> {
        Self::new(source, target, self.body.clone())
    }

    /// Applies the supermap to `phi: A⊗X → A'⊗X'`, giving `B⊗X → B'⊗X'`.
    pub fn apply(&self, phi: &Channel<T>) -> Result<Channel<T>> {
        let (a, ap) = (&self.source.base_in, &self.source.base_out);
        let (x, xp) = aux_of(phi, a, ap)?;
        let t = plug(self.body.tensor(), phi, a, ap)?;
        close(t, &self.target.base_in, &self.target.base_out, &x, &xp)
    }

    /// Sequential composition: `self` first, then `next`.
    pub fn then(&self, next: &Self) -> Result<Self> {
        if !self.target.base_in.same_factors(&next.source.base_in)
            || !self.target.base_out.same_factors(&next.source.base_out)
        {
            return Err(Error::TypeMismatch(format!(
                "cannot compose supermaps into ({}, {}) and from ({}, {})",
                self.target.base_in,
                self.target.base_out,
                next.source.base_in,
                next.source.base_out
            )));
        }
        let (_, mid) = body_types(
            &self.source.base_in,
            &self.source.base_out,
            &self.target.base_in,
            &self.target.base_out,
        )?;
        let body = Channel::link_over(&self.body, &next.body, &mid.labels())?;
        Self::new(self.source.clone(), next.target.clone(), body)
    }

    /// Body distance, matched by label.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.body.distance(&other.body)
    }

    /// Checks positivity of the body and, over `trials` seeded elements of
    /// the source's dilation extension with aux dims in `{1, 2, 3}`, that
    /// every output is deterministic and lies in the target's extension.
    ///
    /// A trial's deviation is the output's trace deviation, or infinity when
    /// the output leaves the target set.
    pub fn check(&self, trials: usize, seed: u64, tol: f64) -> Result<SupermapReport> {
        let cp = T::is_positive(&self.body, tol);
        let typing = run_trials("typing", trials, seed, tol, |s, rng| {
            let x = SystemType::single(AUX_IN, rng.random_range(1..=3))?;
            let xp = SystemType::single(AUX_OUT, rng.random_range(1..=3))?;
            let phi = sample_dext(&self.source, &x, &xp, rng)?;
            let out = self.apply(&phi)?;
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
}

impl Supermap<Quantum> {
    /// Builds a supermap from the Choi operator of its body, ordered
    /// `(A*, A') x (B*, B')` with inputs first.
    pub fn from_choi_matrix(
        source: ChannelSetSpec<Quantum>,
        target: ChannelSetSpec<Quantum>,
        choi: &ComplexMatrix,
    ) -> Result<Self> {
        let (bi, bo) = body_types(
            &source.base_in,
            &source.base_out,
            &target.base_in,
            &target.base_out,
        )?;
        let body = Channel::from_choi_matrix(&bi, &bo, choi)?;
        Self::new(source, target, body)
    }

    pub fn choi_matrix(&self) -> ComplexMatrix {
        self.body.choi_matrix()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(l: &str) -> SystemType {
        SystemType::single(l, 2).unwrap()
    }

    /// Independent evaluation on Choi operators: the output Choi is
    /// `Σ ρ[i, i'] · C_S[(i, ·), (i', ·)]` with `ρ` the input Choi.
    fn choi_action(cs: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
        let n_in = rho.rows();
        let n_out = cs.rows() / n_in;
        ComplexMatrix::from_fn(n_out, n_out, |o, p| {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for i in 0..n_in {
                for j in 0..n_in {
                    acc += rho.get(i, j) * cs.get(i * n_out + o, j * n_out + p);
                }
            }
            acc
        })
    }

    fn random_supermap(
        seed: u64,
        a: &SystemType,
        ap: &SystemType,
        b: &SystemType,
        bp: &SystemType,
    ) -> Supermap {
        let (bi, bo) = body_types(a, ap, b, bp).unwrap();
        let body = Channel::random(&bi, &bo, 2, seed).unwrap();
        Supermap::new(ChannelSetSpec::all(a, ap), ChannelSetSpec::all(b, bp), body).unwrap()
    }

    #[test]
    fn apply_matches_choi_operator_action() {
        let (a, ap, b, bp) = (
            q("a"),
            q("a'"),
            q("b"),
            SystemType::single("b'", 3).unwrap(),
        );
        for seed in 0..5 {
            let s = random_supermap(seed, &a, &ap, &b, &bp);
            let phi = Channel::random(&a, &ap, 2, 100 + seed).unwrap();
            let out = s.apply(&phi).unwrap();
            let expect = choi_action(&s.choi_matrix(), &phi.choi_matrix());
            let expect = Channel::from_choi_matrix(&b, &bp, &expect).unwrap();
            assert!(out.distance(&expect).unwrap() < 1e-10);
        }
    }

    #[test]
    fn identity_acts_trivially() {
        let a = q("a");
        let x = SystemType::single("x", 3).unwrap();
        let id = Supermap::identity(&a, &a).unwrap();
        let ax = a.concat(&x).unwrap();
        let phi = Channel::random(&ax, &ax, 2, 3).unwrap();
        assert!(id.apply(&phi).unwrap().distance(&phi).unwrap() < 1e-10);
        let ch = Channel::identity(&a);
        assert!(id.apply(&ch).unwrap().distance(&ch).unwrap() < 1e-12);
        let s = random_supermap(4, &a, &a, &q("b"), &q("b"));
        assert!(id.then(&s).unwrap().distance(&s).unwrap() < 1e-12);
        assert!(
            s.then(&Supermap::identity(&q("b"), &q("b")).unwrap())
                .unwrap()
                .distance(&s)
                .unwrap()
                < 1e-12
        );
    }

    #[test]
    fn sequential_composition_applies_in_order() {
        let (a, b, c) = (q("a"), q("b"), q("c"));
        let s1 = random_supermap(1, &a, &a, &b, &b);
        let s2 = random_supermap(2, &b, &b, &c, &c);
        let phi = Channel::random(&a, &a, 2, 9).unwrap();
        let direct = s2.apply(&s1.apply(&phi).unwrap()).unwrap();
        let composed = s1.then(&s2).unwrap().apply(&phi).unwrap();
        assert!(direct.distance(&composed).unwrap() < 1e-10);
        assert!(s2.then(&s1).is_err());
    }

    #[test]
    fn commutes_with_aux_processing() {
        let (a, b) = (q("a"), q("b"));
        let s = random_supermap(5, &a, &a, &b, &b);
        let x = q("x");
        let y = SystemType::single("y", 3).unwrap();
        let z = q("z");
        let yp = q("y'");
        let ax = a.concat(&x).unwrap();
        let phi = Channel::random(&ax, &ax, 2, 1).unwrap();
        let f = Channel::random(&y, &x.concat(&z).unwrap(), 2, 2).unwrap();
        let g = Channel::random(&x.concat(&z).unwrap(), &yp, 2, 3).unwrap();
        let inner = Channel::link(&Channel::link(&f, &phi).unwrap(), &g).unwrap();
        let lhs = s.apply(&inner).unwrap();
        let rhs = Channel::link(&Channel::link(&f, &s.apply(&phi).unwrap()).unwrap(), &g).unwrap();
        assert!(lhs.distance(&rhs).unwrap() < 1e-10);
    }

    #[test]
    fn check_accepts_identity_and_rejects_transpose() {
        let a = q("a");
        let id = Supermap::<Quantum>::identity(&a, &a).unwrap();
        let r = id.check(20, 0, 1e-8).unwrap();
        assert!(r.passed(), "{r:?}");

        let (bi, _) = body_types(&a, &a, &a, &a).unwrap();
        let t = Channel::<Quantum>::transpose_map(&bi);
        let ts =
            Supermap::new(ChannelSetSpec::all(&a, &a), ChannelSetSpec::all(&a, &a), t).unwrap();
        let r = ts.check(5, 0, 1e-8).unwrap();
        assert!(!r.cp);
        assert!(!r.passed());
    }

    #[test]
    fn check_refutes_non_deterministic_outputs() {
        let a = q("a");
        let s = random_supermap(7, &a, &a, &a, &a);
        let r = s.check(10, 1, 1e-8).unwrap();
        assert!(r.cp);
        assert!(!r.typing.passed());
        assert!(r.typing.max_deviation > 1e-3);
    }

    #[test]
    fn choi_roundtrip_and_type_errors() {
        let a = q("a");
        let s = random_supermap(8, &a, &a, &a, &a);
        let back =
            Supermap::from_choi_matrix(s.source().clone(), s.target().clone(), &s.choi_matrix())
                .unwrap();
        assert!(back.distance(&s).unwrap() < 1e-14);
        let wrong = Channel::<Quantum>::identity(&a);
        assert!(Supermap::new(
            ChannelSetSpec::all(&a, &a),
            ChannelSetSpec::all(&a, &a),
            wrong
        )
        .is_err());
        let phi = Channel::random(&q("z"), &q("z"), 1, 0).unwrap();
        assert!(s.apply(&phi).is_err());
    }
}
