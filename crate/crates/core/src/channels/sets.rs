use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::control::{control_channel, ControlPair};
use super::signaling::{check_signaling, SignalingRelation};
use super::{Channel, Quantum, Theory};
use crate::error::{Error, Result};
use crate::rng::{rng_from, trial_seed};
use crate::tensor::{Factor, SystemType};

/// Which party of a bipartite set may signal to the other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    FirstToSecond,
    SecondToFirst,
}

type Predicate<T> = dyn Fn(&Channel<T>) -> bool + Send + Sync;
type Sampler<T> = dyn Fn(&mut ChaCha8Rng) -> Channel<T> + Send + Sync;

/// A user-defined channel set: a membership predicate and, optionally, a
/// sampler of members.
#[derive(Clone)]
pub struct CustomSet<T: Theory = Quantum> {
    pub name: String,
    predicate: Arc<Predicate<T>>,
    sampler: Option<Arc<Sampler<T>>>,
}

impl<T: Theory> CustomSet<T> {
    pub fn new(
        name: impl Into<String>,
        predicate: impl Fn(&Channel<T>) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            predicate: Arc::new(predicate),
            sampler: None,
        }
    }

    pub fn with_sampler(
        mut self,
        sampler: impl Fn(&mut ChaCha8Rng) -> Channel<T> + Send + Sync + 'static,
    ) -> Self {
        self.sampler = Some(Arc::new(sampler));
        self
    }

    pub fn contains(&self, c: &Channel<T>) -> bool {
        (self.predicate)(c)
    }
}

impl<T: Theory> fmt::Debug for CustomSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomSet")
            .field("name", &self.name)
            .field("has_sampler", &self.sampler.is_some())
            .finish()
    }
}

#[derive(Clone, Debug)]
pub enum SetKind<T: Theory = Quantum> {
    All,
    NonSignaling(SignalingRelation),
    OneWay(Direction),
    Custom(CustomSet<T>),
}

/// A set `K` of deterministic channels `base_in → base_out`.
#[derive(Clone, Debug)]
pub struct ChannelSetSpec<T: Theory = Quantum> {
    pub base_in: SystemType,
    pub base_out: SystemType,
    pub kind: SetKind<T>,
    pub convex: bool,
    pub normal: bool,
}

/// Reserved label prefix for internal wires of sampled processes.
const CORE: &str = "~core";

impl<T: Theory> ChannelSetSpec<T> {
    /// Every channel of the given type.
    pub fn all(base_in: &SystemType, base_out: &SystemType) -> Self {
        Self {
            base_in: base_in.clone(),
            base_out: base_out.clone(),
            kind: SetKind::All,
            convex: true,
            normal: true,
        }
    }

    /// Channels obeying a signaling relation over the factors.
    pub fn signaling(
        base_in: &SystemType,
        base_out: &SystemType,
        rel: SignalingRelation,
    ) -> Result<Self> {
        let mut ins: Vec<&str> = rel.in_parties.iter().map(String::as_str).collect();
        let mut outs: Vec<&str> = rel.out_parties.iter().map(String::as_str).collect();
        let mut bi = base_in.labels();
        let mut bo = base_out.labels();
        ins.sort_unstable();
        outs.sort_unstable();
        bi.sort_unstable();
        bo.sort_unstable();
        if ins != bi || outs != bo {
            return Err(Error::PartitionMismatch(format!(
                "relation parties do not match {base_in} → {base_out}"
            )));
        }
        Ok(Self {
            base_in: base_in.clone(),
            base_out: base_out.clone(),
            kind: SetKind::NonSignaling(rel),
            convex: true,
            normal: true,
        })
    }

    /// Fully non-signaling channels between positionally paired parties.
    pub fn non_signaling(base_in: &SystemType, base_out: &SystemType) -> Result<Self> {
        Self::signaling(
            base_in,
            base_out,
            SignalingRelation::no_signaling(base_in, base_out)?,
        )
    }

    /// One-way signaling between two parties.
    pub fn one_way(
        base_in: &SystemType,
        base_out: &SystemType,
        direction: Direction,
    ) -> Result<Self> {
        if base_in.len() != 2 || base_out.len() != 2 {
            return Err(Error::PartitionMismatch(
                "one-way sets need exactly two input and two output parties".into(),
            ));
        }
        Ok(Self {
            base_in: base_in.clone(),
            base_out: base_out.clone(),
            kind: SetKind::OneWay(direction),
            convex: true,
            normal: true,
        })
    }

    pub fn custom(
        base_in: &SystemType,
        base_out: &SystemType,
        set: CustomSet<T>,
        convex: bool,
        normal: bool,
    ) -> Self {
        Self {
            base_in: base_in.clone(),
            base_out: base_out.clone(),
            kind: SetKind::Custom(set),
            convex,
            normal,
        }
    }

    /// The signaling relation enforced by the set, if any.
    pub fn relation(&self) -> Option<SignalingRelation> {
        match &self.kind {
            SetKind::NonSignaling(r) => Some(r.clone()),
            SetKind::OneWay(dir) => {
                let i = self.base_in.labels();
                let o = self.base_out.labels();
                let (b, a) = match dir {
                    Direction::FirstToSecond => (i[1], o[0]),
                    Direction::SecondToFirst => (i[0], o[1]),
                };
                Some(
                    SignalingRelation::new(
                        i.iter().map(|s| s.to_string()).collect(),
                        o.iter().map(|s| s.to_string()).collect(),
                        vec![(b.to_string(), a.to_string())],
                    )
                    .expect("parties come from the base types"),
                )
            }
            _ => None,
        }
    }

    pub fn kind_name(&self) -> String {
        match &self.kind {
            SetKind::All => "all".into(),
            SetKind::NonSignaling(_) => "non_signaling".into(),
            SetKind::OneWay(_) => "one_way".into(),
            SetKind::Custom(c) => format!("custom:{}", c.name),
        }
    }

    /// Membership of a channel on exactly the base types.
    pub fn contains(&self, c: &Channel<T>, tol: f64) -> bool {
        if !c.in_type().same_factors(&self.base_in) || !c.out_type().same_factors(&self.base_out) {
            return false;
        }
        let r = c.is_channel(tol);
        if !(r.cp && r.tp) {
            return false;
        }
        match &self.kind {
            SetKind::All => true,
            SetKind::Custom(s) => s.contains(c),
            _ => {
                let rel = self.relation().expect("relation kinds have a relation");
                check_signaling(c, &rel, tol)
                    .map(|r| r.holds)
                    .unwrap_or(false)
            }
        }
    }

    /// Aux types `(X, X')` of a channel on `base ⊗ aux`, checking that the base
    /// factors are present with the right dimensions.
    pub fn split_aux(&self, c: &Channel<T>) -> Result<(SystemType, SystemType)> {
        for (t, base) in [(c.in_type(), &self.base_in), (c.out_type(), &self.base_out)] {
            for f in base.factors() {
                if t.get(&f.label) != Some(f) {
                    return Err(Error::TypeMismatch(format!(
                        "{t} lacks factor {}[{}] of {}",
                        f.label, f.dim, base
                    )));
                }
            }
        }
        Ok((
            c.in_type().without(&self.base_in.labels()),
            c.out_type().without(&self.base_out.labels()),
        ))
    }

    fn check_aux_labels(&self, x: &SystemType, xp: &SystemType) -> Result<()> {
        for l in x.labels() {
            if self.base_in.contains(l) {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
        }
        for l in xp.labels() {
            if self.base_out.contains(l) {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
        }
        Ok(())
    }
}

/// Random member of `K` (no auxiliary systems).
pub fn sample_member<T: Theory>(k: &ChannelSetSpec<T>, rng: &mut ChaCha8Rng) -> Result<Channel<T>> {
    match &k.kind {
        SetKind::All => Ok(T::random_channel(&k.base_in, &k.base_out, rng)),
        SetKind::Custom(s) => match &s.sampler {
            Some(f) => Ok(f(rng)),
            None if k.normal => discard_prepare(&k.base_in, &k.base_out, rng),
            None => Err(Error::TypeMismatch(format!(
                "custom set `{}` has no sampler and is not normal",
                s.name
            ))),
        },
        _ => {
            let core = local_core(k, false, rng)?;
            if rng.random_bool(0.5) {
                let other = local_core(k, false, rng)?;
                core.mix(rng.random_range(0.0..1.0), &other)
            } else {
                Ok(core)
            }
        }
    }
}

fn discard_prepare<T: Theory>(
    input: &SystemType,
    output: &SystemType,
    rng: &mut ChaCha8Rng,
) -> Result<Channel<T>> {
    Channel::discard(input).parallel(&T::random_state(output, rng))
}

fn core_label(tag: &str, i: usize) -> String {
    format!("{CORE}.{tag}{i}")
}

/// Product of per-party local channels; with `aux` each party also gets a
/// private auxiliary wire `~core.p{i}` of dimension 1 or 2 on both sides.
fn local_core<T: Theory>(
    k: &ChannelSetSpec<T>,
    aux: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Channel<T>> {
    let rel = k.relation().expect("relation kinds have a relation");
    let (ins, outs) = (k.base_in.factors(), k.base_out.factors());
    if ins.len() != outs.len() {
        return discard_prepare(&k.base_in, &k.base_out, rng);
    }
    let mut acc: Option<Channel<T>> = None;
    for (i, (fi, fo)) in ins.iter().zip(outs).enumerate() {
        let x = if aux {
            SystemType::single(core_label("p", i), rng.random_range(1..=2))?
        } else {
            SystemType::trivial()
        };
        let a = SystemType::new(vec![fi.clone()])?;
        let ap = SystemType::new(vec![fo.clone()])?;
        let self_forbidden = rel
            .forbidden
            .iter()
            .any(|(b, o)| *b == fi.label && *o == fo.label);
        let block = if self_forbidden {
            // the party's output is prepared before its input arrives
            let e = SystemType::single(core_label("e", i), rng.random_range(1..=2))?;
            let first = T::random_channel(&x, &ap.concat(&e)?, rng);
            let second = T::random_channel(&a.concat(&e)?, &x, rng);
            Channel::link_over(&first, &second, &e.labels())?
        } else {
            T::random_channel(&a.concat(&x)?, &ap.concat(&x)?, rng)
        };
        acc = Some(match acc {
            None => block,
            Some(c) => c.parallel(&block)?,
        });
    }
    Ok(acc.unwrap_or_else(|| Channel::identity(&SystemType::trivial())))
}

/// Pre- and post-processes the internal aux of `core` into the requested
/// `x → x'`.
fn sandwich<T: Theory>(
    core: &Channel<T>,
    k: &ChannelSetSpec<T>,
    x: &SystemType,
    xp: &SystemType,
    rng: &mut ChaCha8Rng,
) -> Result<Channel<T>> {
    let (xi, xo) = k.split_aux(core)?;
    let f = T::random_channel(x, &xi, rng);
    let g = T::random_channel(&xo, xp, rng);
    Channel::link(&Channel::link(&f, core)?, &g)
}

fn random_aux_type(rng: &mut ChaCha8Rng, tag: &str) -> Result<SystemType> {
    SystemType::new(vec![Factor::new(
        core_label(tag, 0),
        rng.random_range(1..=2),
    )])
}

/// Random element of the dilation extension `dExt_{x, x'}(K)`: a deterministic
/// channel `base_in ⊗ x → base_out ⊗ x'` all of whose aux reductions lie in `K`.
///
/// Generated from products of per-party channels with private aux, their
/// convex mixtures, controlled pairs of members, and correlated
/// discard-prepare channels, each wrapped by random channels on the aux.
pub fn sample_dext<T: Theory>(
    k: &ChannelSetSpec<T>,
    x: &SystemType,
    xp: &SystemType,
    rng: &mut ChaCha8Rng,
) -> Result<Channel<T>> {
    k.check_aux_labels(x, xp)?;
    let full_in = k.base_in.concat(x)?;
    let full_out = k.base_out.concat(xp)?;
    let relational = matches!(k.kind, SetKind::NonSignaling(_) | SetKind::OneWay(_));
    let has_sampler = matches!(&k.kind, SetKind::Custom(s) if s.sampler.is_some());
    if matches!(k.kind, SetKind::All) {
        return Ok(T::random_channel(&full_in, &full_out, rng));
    }
    if !relational && !has_sampler {
        if !k.normal {
            return Err(Error::TypeMismatch(
                "cannot sample a set without a sampler that is not normal".into(),
            ));
        }
        return correlated_discard_prepare(k, x, xp, rng);
    }
    let kinds = if relational || k.normal { 4 } else { 3 };
    match rng.random_range(0..kinds) {
        0 => {
            let core = if relational {
                local_core(k, true, rng)?
            } else {
                let m = sample_member(k, rng)?;
                let aux = random_aux_type(rng, "p")?;
                m.parallel(&T::random_channel(&aux, &aux, rng))?
            };
            sandwich(&core, k, x, xp, rng)
        }
        1 => {
            let a = sample_dext_simple(k, x, xp, relational, rng)?;
            let b = sample_dext_simple(k, x, xp, relational, rng)?;
            a.mix(rng.random_range(0.0..1.0), &b)
        }
        2 => {
            let m0 = sample_member(k, rng)?;
            let m1 = sample_member(k, rng)?;
            let label = core_label("c", 0);
            let pair = ControlPair::<T>::computational(2)?;
            let core = control_channel(&m0, &m1, &pair, &label, &label)?;
            sandwich(&core, k, x, xp, rng)
        }
        _ => correlated_discard_prepare(k, x, xp, rng),
    }
}

fn sample_dext_simple<T: Theory>(
    k: &ChannelSetSpec<T>,
    x: &SystemType,
    xp: &SystemType,
    relational: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Channel<T>> {
    let core = if relational {
        local_core(k, true, rng)?
    } else {
        let m = sample_member(k, rng)?;
        let aux = random_aux_type(rng, "p")?;
        m.parallel(&T::random_channel(&aux, &aux, rng))?
    };
    sandwich(&core, k, x, xp, rng)
}

/// `x → base_out ⊗ e`, then `base_in ⊗ e → x'`: outputs never depend on the
/// base inputs, so every reduction is discard-then-prepare.
fn correlated_discard_prepare<T: Theory>(
    k: &ChannelSetSpec<T>,
    x: &SystemType,
    xp: &SystemType,
    rng: &mut ChaCha8Rng,
) -> Result<Channel<T>> {
    let e = random_aux_type(rng, "e")?;
    let first = T::random_channel(x, &k.base_out.concat(&e)?, rng);
    let second = T::random_channel(&k.base_in.concat(&e)?, xp, rng);
    Channel::link_over(&first, &second, &e.labels())
}

/// Seed of the first trial whose aux reduction of `phi` leaves `K`, if any.
///
/// Each trial prepares a random normalized state on the aux inputs and
/// discards the aux outputs; trial 0 uses the uniform state.
pub fn dext_counterexample<T: Theory>(
    phi: &Channel<T>,
    k: &ChannelSetSpec<T>,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<Option<u64>> {
    let (x, xp) = k.split_aux(phi)?;
    if !phi.is_deterministic() {
        return Err(Error::NonDeterministic(phi.trace_deviation()));
    }
    let traced = if xp.is_empty() {
        phi.clone()
    } else {
        phi.measure(&Channel::discard(&xp))?
    };
    let results: Vec<Result<Option<u64>>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let s = trial_seed(seed, t);
            let mut rng = rng_from(s);
            let rho = if t == 0 {
                Channel::uniform_state(&x)
            } else {
                T::random_state(&x, &mut rng)
            };
            let reduced = if x.is_empty() {
                traced.clone()
            } else {
                traced.prepare(&rho)?
            };
            Ok((!k.contains(&reduced, tol)).then_some(s))
        })
        .collect();
    for r in results {
        if let Some(s) = r? {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

/// Randomized membership test for `dExt(K)`: a sound refuter.
pub fn in_dilation_extension<T: Theory>(
    phi: &Channel<T>,
    k: &ChannelSetSpec<T>,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<bool> {
    Ok(dext_counterexample(phi, k, trials, seed, tol)?.is_none())
}
