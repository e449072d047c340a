use rand_chacha::ChaCha8Rng;

use super::supermap::{aux_of, body_types, Supermap};
use crate::channels::{Channel, ChannelSetSpec, Quantum, Theory};
use crate::error::{Error, Result};
use crate::tensor::{bell_cup, dual_label, Leg, SystemType, Tensor};

/// A two-tooth comb `(A, A') → (B, B')`: `pre: B → E⊗A` runs before the
/// slot and `post: E⊗A'→ B'` after it, joined by the memory `E`.
#[derive(Clone, Debug)]
pub struct Comb<T: Theory = Quantum> {
    pre: Channel<T>,
    post: Channel<T>,
    env: SystemType,
    a: SystemType,
    ap: SystemType,
}

fn env_a(l: &str) -> String {
    format!("~comb.a.{l}")
}

fn env_b(l: &str) -> String {
    format!("~comb.b.{l}")
}

impl<T: Theory> Comb<T> {
    /// A comb of deterministic channels; `env` names the memory factors.
    pub fn new(pre: Channel<T>, post: Channel<T>, env: &SystemType) -> Result<Self> {
        for p in [&pre, &post] {
            if !p.is_deterministic() {
                return Err(Error::NonDeterministic(p.trace_deviation()));
            }
        }
        Self::from_cp_parts(pre, post, env)
    }

    /// A comb whose parts need only be positive, not trace preserving.
    pub fn from_cp_parts(pre: Channel<T>, post: Channel<T>, env: &SystemType) -> Result<Self> {
        for f in env.factors() {
            if pre.out_type().get(&f.label) != Some(f) || post.in_type().get(&f.label) != Some(f) {
                return Err(Error::TypeMismatch(format!(
                    "memory factor {}[{}] must be an output of pre and an input of post",
                    f.label, f.dim
                )));
            }
        }
        let a = pre.out_type().without(&env.labels());
        let ap = post.in_type().without(&env.labels());
        Ok(Self {
            pre,
            post,
            env: env.clone(),
            a,
            ap,
        })
    }

    /// Random deterministic comb with memory `env`.
    pub fn random(
        a: &SystemType,
        ap: &SystemType,
        b: &SystemType,
        bp: &SystemType,
        env: &SystemType,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let pre = T::random_channel(b, &env.concat(a)?, rng);
        let post = T::random_channel(&env.concat(ap)?, bp, rng);
        Self::new(pre, post, env)
    }

    /// The comb with trivial memory and identity parts on `(a, a')`.
    pub fn identity(a: &SystemType, ap: &SystemType) -> Self {
        Self::from_cp_parts(
            Channel::identity(a),
            Channel::identity(ap),
            &SystemType::trivial(),
        )
        .expect("identity parts share no memory")
    }

    pub fn pre(&self) -> &Channel<T> {
        &self.pre
    }

    pub fn post(&self) -> &Channel<T> {
        &self.post
    }

    pub fn env(&self) -> &SystemType {
        &self.env
    }

    /// Slot types `(A, A')`.
    pub fn slot(&self) -> (&SystemType, &SystemType) {
        (&self.a, &self.ap)
    }

    /// Outer types `(B, B')`.
    pub fn outer(&self) -> (&SystemType, &SystemType) {
        (self.pre.in_type(), self.post.out_type())
    }

    pub fn is_deterministic(&self) -> bool {
        self.pre.is_deterministic() && self.post.is_deterministic()
    }

    /// `post ∘ (id_E ⊗ phi) ∘ pre` for `phi: A⊗X → A'⊗X'`, aux wires passed
    /// through.
    pub fn apply(&self, phi: &Channel<T>) -> Result<Channel<T>> {
        aux_of(phi, &self.a, &self.ap)?;
        let first = Channel::link_over(&self.pre, phi, &self.a.labels())?;
        let mut shared = self.env.labels();
        shared.extend(self.ap.labels());
        Channel::link_over(&first, &self.post, &shared)
    }

    /// Nesting: `self` is plugged into the slot of `outer`, whose slot types
    /// must be this comb's outer types. Memories must have distinct labels.
    pub fn then(&self, outer: &Self) -> Result<Self> {
        let (b, bp) = self.outer();
        if !outer.a.same_factors(b) || !outer.ap.same_factors(bp) {
            return Err(Error::TypeMismatch(format!(
                "comb slot ({}, {}) does not match ({b}, {bp})",
                outer.a, outer.ap
            )));
        }
        let pre = Channel::link_over(&outer.pre, &self.pre, &b.labels())?;
        let post = Channel::link_over(&self.post, &outer.post, &bp.labels())?;
        let env = self.env.concat(&outer.env)?;
        Self::from_cp_parts(pre, post, &env)
    }

    /// The supermap implemented by the comb, typed on all channels.
    pub fn to_supermap(&self) -> Result<Supermap<T>> {
        let (b, bp) = self.outer();
        self.to_supermap_typed(
            ChannelSetSpec::all(&self.a, &self.ap),
            ChannelSetSpec::all(b, bp),
        )
    }

    /// The supermap of the comb: `pre`'s `B` input is bent into a `B*`
    /// output and its `A` output into an `A*` input, then the memory is
    /// contracted with `post`.
    pub fn to_supermap_typed(
        &self,
        source: ChannelSetSpec<T>,
        target: ChannelSetSpec<T>,
    ) -> Result<Supermap<T>> {
        let (b, bp) = self.outer();
        let mut t = self.pre.tensor().clone();
        for l in b.labels() {
            t = t.bend_in_to_out(l, &dual_label(l))?;
        }
        for l in self.a.labels() {
            t = t.bend_out_to_in(l, &dual_label(l))?;
        }
        let body = t.contract(self.post.tensor(), &self.env.labels())?;
        let (bi, bo) = body_types(&self.a, &self.ap, b, bp)?;
        Supermap::new(source, target, Channel::from_tensor(&bi, &bo, body)?)
    }

    /// Comb realizing a supermap: the memory carries a copy of `B` and the
    /// `A*` half of a cup whose other half feeds the slot; `post` is the
    /// supermap body with its `B*` output capped against the `B` copy.
    /// The parts are positive but in general not trace preserving.
    pub fn from_supermap(s: &Supermap<T>) -> Result<Self> {
        let (a, ap) = (&s.source().base_in, &s.source().base_out);
        let (b, bp) = (&s.target().base_in, &s.target().base_out);
        let ea = a.map_labels(env_a)?;
        let eb = b.map_labels(env_b)?;
        let env = ea.concat(&eb)?;

        let mut pre_t = Tensor::scalar(num_traits::One::one());
        for f in b.factors() {
            let d = T::leg_dim(f.dim);
            let w = Tensor::wiring(
                vec![Leg::input(&f.label, d), Leg::output(env_b(&f.label), d)],
                &[(0, 1)],
            )?;
            pre_t = pre_t.product(&w)?;
        }
        for f in a.factors() {
            pre_t = pre_t.product(&bell_cup(T::leg_dim(f.dim), &env_a(&f.label), &f.label)?)?;
        }
        let pre = Channel::from_tensor(b, &env.concat(a)?, pre_t)?;

        let mut post_t = s.body().tensor().clone();
        for l in a.labels() {
            post_t = post_t.relabel(&dual_label(l), crate::tensor::Polarity::In, &env_a(l))?;
        }
        for l in b.labels() {
            post_t = post_t.bend_out_to_in(&dual_label(l), &env_b(l))?;
        }
        let post = Channel::from_tensor(&env.concat(ap)?, bp, post_t)?;
        Self::from_cp_parts(pre, post, &env)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;
    use crate::tensor::gates::*;

    fn q(l: &str) -> SystemType {
        SystemType::single(l, 2).unwrap()
    }

    fn random_comb(seed: u64) -> Comb {
        let e = SystemType::single("e", 1 + (seed as usize % 2)).unwrap();
        Comb::random(
            &q("a"),
            &q("a'"),
            &q("b"),
            &q("b'"),
            &e,
            &mut rng_from(seed),
        )
        .unwrap()
    }

    #[test]
    fn identity_comb_is_identity() {
        let a = q("a");
        let c = Comb::<Quantum>::identity(&a, &a);
        let phi = Channel::random(&a, &a, 2, 1).unwrap();
        assert!(c.apply(&phi).unwrap().distance(&phi).unwrap() < 1e-12);
        let s = c.to_supermap().unwrap();
        assert!(s.distance(&Supermap::identity(&a, &a).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn identity_slot_gives_post_after_pre() {
        let c = random_comb(3);
        let wire = Channel::wire(&q("a"), &q("a'"), &[("a", "a'")]).unwrap();
        let direct = Channel::link_over(c.pre(), &wire, &["a"]).unwrap();
        let direct = Channel::link(&direct, c.post()).unwrap();
        assert!(c.apply(&wire).unwrap().distance(&direct).unwrap() < 1e-12);
        assert!(c.apply(&wire).unwrap().is_deterministic());
    }

    #[test]
    fn unitary_sandwich() {
        // pre = H, post = Y with trivial memory: phi ↦ Y ∘ phi ∘ H
        let a = q("a");
        let h = Channel::unitary(&a, &hadamard()).unwrap();
        let y = Channel::unitary(&a, &pauli_y()).unwrap();
        let c = Comb::new(h.clone(), y.clone(), &SystemType::trivial()).unwrap();
        let phi = Channel::random(&a, &a, 2, 4).unwrap();
        let expect = h.then(&phi).unwrap().then(&y).unwrap();
        assert!(c.apply(&phi).unwrap().distance(&expect).unwrap() < 1e-12);
    }

    #[test]
    fn supermap_of_comb_acts_like_comb() {
        for seed in 0..10 {
            let c = random_comb(seed);
            let s = c.to_supermap().unwrap();
            let x = SystemType::single("x", 1 + seed as usize % 3).unwrap();
            let ax = q("a").concat(&x).unwrap();
            let apx = q("a'").concat(&x).unwrap();
            let phi = Channel::random(&ax, &apx, 2, 50 + seed).unwrap();
            let lhs = c.apply(&phi).unwrap();
            let rhs = s.apply(&phi).unwrap();
            assert!(lhs.distance(&rhs).unwrap() < 1e-10, "seed {seed}");
            assert!(rhs.is_deterministic());
        }
    }

    #[test]
    fn comb_of_supermap_round_trips() {
        for seed in 0..6 {
            let s = random_comb(seed).to_supermap().unwrap();
            let back = Comb::from_supermap(&s).unwrap();
            assert!(back.to_supermap().unwrap().distance(&s).unwrap() < 1e-10);
            let phi = Channel::random(&q("a"), &q("a'"), 2, seed).unwrap();
            assert!(
                back.apply(&phi)
                    .unwrap()
                    .distance(&s.apply(&phi).unwrap())
                    .unwrap()
                    < 1e-10
            );
        }
    }

    #[test]
    fn naturality_on_aux() {
        let c = random_comb(7);
        let (x, z, y, yp) = (q("x"), q("z"), SystemType::single("y", 3).unwrap(), q("y'"));
        let phi = Channel::random(
            &q("a").concat(&x).unwrap(),
            &q("a'").concat(&x).unwrap(),
            2,
            1,
        )
        .unwrap();
        let f = Channel::random(&y, &x.concat(&z).unwrap(), 2, 2).unwrap();
        let g = Channel::random(&x.concat(&z).unwrap(), &yp, 2, 3).unwrap();
        let wrapped = Channel::link(&Channel::link(&f, &phi).unwrap(), &g).unwrap();
        let lhs = c.apply(&wrapped).unwrap();
        let rhs = Channel::link(&Channel::link(&f, &c.apply(&phi).unwrap()).unwrap(), &g).unwrap();
        assert!(lhs.distance(&rhs).unwrap() < 1e-10);
    }

    #[test]
    fn nesting_matches_supermap_composition() {
        let inner = random_comb(1);
        let e2 = q("e2");
        let outer =
            Comb::random(&q("b"), &q("b'"), &q("c"), &q("c'"), &e2, &mut rng_from(9)).unwrap();
        let nested = inner.then(&outer).unwrap();
        assert!(nested.is_deterministic());
        let composed = inner
            .to_supermap()
            .unwrap()
            .then(&outer.to_supermap().unwrap())
            .unwrap();
        assert!(nested.to_supermap().unwrap().distance(&composed).unwrap() < 1e-10);
        let phi = Channel::random(&q("a"), &q("a'"), 2, 5).unwrap();
        let direct = outer.apply(&inner.apply(&phi).unwrap()).unwrap();
        assert!(nested.apply(&phi).unwrap().distance(&direct).unwrap() < 1e-10);

        // the supermap-to-comb direction preserves composition behaviorally
        let s1 = inner.to_supermap().unwrap();
        let s2 = outer.to_supermap().unwrap();
        let c1 = Comb::from_supermap(&s1).unwrap();
        let c2 = Comb::from_supermap(&s2).unwrap();
        let c12 = c1.then(&c2).unwrap();
        assert!(c12.apply(&phi).unwrap().distance(&direct).unwrap() < 1e-10);
    }

    #[test]
    fn rejects_bad_parts() {
        let a = q("a");
        let e = q("e");
        let half = Channel::<Quantum>::identity(&a).scale(0.5);
        assert!(Comb::new(half, Channel::identity(&a), &SystemType::trivial()).is_err());
        assert!(Comb::<Quantum>::new(Channel::identity(&a), Channel::identity(&a), &e).is_err());
        let c = random_comb(0);
        assert!(c.apply(&Channel::identity(&q("z"))).is_err());
    }
}
