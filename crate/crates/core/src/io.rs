//! JSON interchange for matrices, channels, supermaps, combs and signaling
//! relations.
//!
//! A matrix document has `rows`, `cols` and a row-major `entries` list of
//! `[re, im]` pairs, plus an optional `legs` list. Quantum channels are
//! stored as their Choi operator (inputs first); classical channels as the
//! `|out| x |in|` matrix acting on column vectors.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::channels::{
    Channel, ChannelSetSpec, Classical, Direction, Quantum, SetKind, SignalingRelation, Theory,
};
use crate::classical::NonnegMatrix;
use crate::error::{Error, Result};
use crate::supermaps::{Comb, Supermap};
use crate::tensor::{dual_label, ComplexMatrix, Leg, SystemType};

/// Dense matrix with optional leg metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub legs: Option<Vec<Leg>>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &ComplexMatrix, legs: Option<Vec<Leg>>) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.data().iter().map(|z| [z.re, z.im]).collect(),
            legs,
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let data = self
            .entries
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        ComplexMatrix::new(self.rows, self.cols, data)
    }
}

/// Which theory a document's processes live in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoryTag {
    #[default]
    Quantum,
    Classical,
}

/// System header of a channel document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemHeader {
    pub in_factors: SystemType,
    pub out_factors: SystemType,
    pub deterministic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelDoc {
    #[serde(default)]
    pub theory: TheoryTag,
    pub system: SystemHeader,
    #[serde(flatten)]
    pub matrix: MatrixDoc,
}

/// Conversion of a theory's processes to and from interchange matrices.
pub trait Interchange: Theory {
    const TAG: TheoryTag;

    fn to_matrix(c: &Channel<Self>) -> ComplexMatrix;

    fn from_matrix(
        input: &SystemType,
        output: &SystemType,
        m: &ComplexMatrix,
    ) -> Result<Channel<Self>>;
}

impl Interchange for Quantum {
    const TAG: TheoryTag = TheoryTag::Quantum;

    fn to_matrix(c: &Channel<Self>) -> ComplexMatrix {
        c.choi_matrix()
    }

    fn from_matrix(
        input: &SystemType,
        output: &SystemType,
        m: &ComplexMatrix,
    ) -> Result<Channel<Self>> {
        Channel::from_choi_matrix(input, output, m)
    }
}

impl Interchange for Classical {
    const TAG: TheoryTag = TheoryTag::Classical;

    fn to_matrix(c: &Channel<Self>) -> ComplexMatrix {
        let m = NonnegMatrix::from_channel(c).expect("classical processes are stored nonnegative");
        ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j).into())
    }

    fn from_matrix(
        input: &SystemType,
        output: &SystemType,
        m: &ComplexMatrix,
    ) -> Result<Channel<Self>> {
        if m.data().iter().any(|z| z.im != 0.0) {
            return Err(Error::Parse("classical entries must be real".into()));
        }
        let re = m.data().iter().map(|z| z.re).collect();
        NonnegMatrix::new(m.rows(), m.cols(), re)?.to_channel(input, output)
    }
}

fn legs_of(input: &SystemType, output: &SystemType) -> Vec<Leg> {
    let ins = input
        .factors()
        .iter()
        .map(|f| Leg::input(f.label.clone(), f.dim));
    let outs = output
        .factors()
        .iter()
        .map(|f| Leg::output(f.label.clone(), f.dim));
    ins.chain(outs).collect()
}

impl ChannelDoc {
    pub fn from_channel<T: Interchange>(c: &Channel<T>) -> Self {
        Self {
            theory: T::TAG,
            system: SystemHeader {
                in_factors: c.in_type().clone(),
                out_factors: c.out_type().clone(),
                deterministic: c.is_deterministic(),
            },
            matrix: MatrixDoc::from_matrix(
                &T::to_matrix(c),
                Some(legs_of(c.in_type(), c.out_type())),
            ),
        }
    }

    pub fn to_channel<T: Interchange>(&self) -> Result<Channel<T>> {
        if self.theory != T::TAG {
            return Err(Error::Parse(format!(
                "expected a {} channel, got {:?}",
                T::NAME,
                self.theory
            )));
        }
        T::from_matrix(
            &self.system.in_factors,
            &self.system.out_factors,
            &self.matrix.to_matrix()?,
        )
    }
}

/// Serializable description of a channel set; custom predicates have none.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetDoc {
    pub base_in: SystemType,
    pub base_out: SystemType,
    #[serde(flatten)]
    pub kind: SetKindDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetKindDoc {
    All,
    NonSignaling { relation: SignalingRelation },
    OneWay { direction: Direction },
}

impl SetDoc {
    pub fn from_spec<T: Theory>(k: &ChannelSetSpec<T>) -> Result<Self> {
        let kind = match &k.kind {
            SetKind::All => SetKindDoc::All,
            SetKind::NonSignaling(r) => SetKindDoc::NonSignaling {
                relation: r.clone(),
            },
            SetKind::OneWay(d) => SetKindDoc::OneWay { direction: *d },
            SetKind::Custom(c) => {
                return Err(Error::Parse(format!(
                    "custom set `{}` cannot be serialized",
                    c.name
                )));
            }
        };
        Ok(Self {
            base_in: k.base_in.clone(),
            base_out: k.base_out.clone(),
            kind,
        })
    }

    pub fn to_spec<T: Theory>(&self) -> Result<ChannelSetSpec<T>> {
        match &self.kind {
            SetKindDoc::All => Ok(ChannelSetSpec::all(&self.base_in, &self.base_out)),
            SetKindDoc::NonSignaling { relation } => {
                ChannelSetSpec::signaling(&self.base_in, &self.base_out, validated(relation)?)
            }
            SetKindDoc::OneWay { direction } => {
                ChannelSetSpec::one_way(&self.base_in, &self.base_out, *direction)
            }
        }
    }
}

fn validated(r: &SignalingRelation) -> Result<SignalingRelation> {
    SignalingRelation::new(
        r.in_parties.clone(),
        r.out_parties.clone(),
        r.forbidden.clone(),
    )
}

/// Supermap document: the body in channel form, a dictionary naming the
/// role of each body leg, and the source and target sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupermapDoc {
    pub source: SetDoc,
    pub target: SetDoc,
    pub leg_roles: BTreeMap<String, String>,
    pub body: ChannelDoc,
}

impl SupermapDoc {
    pub fn from_supermap<T: Interchange>(s: &Supermap<T>) -> Result<Self> {
        let mut leg_roles = BTreeMap::new();
        let (src, tgt) = (s.source(), s.target());
        for l in src.base_in.labels() {
            leg_roles.insert(dual_label(l), format!("dual of source input {l}"));
        }
        for l in src.base_out.labels() {
            leg_roles.insert(l.to_string(), "source output".to_string());
        }
        for l in tgt.base_in.labels() {
            leg_roles.insert(dual_label(l), format!("dual of target input {l}"));
        }
        for l in tgt.base_out.labels() {
            leg_roles.insert(l.to_string(), "target output".to_string());
        }
        Ok(Self {
            source: SetDoc::from_spec(src)?,
            target: SetDoc::from_spec(tgt)?,
            leg_roles,
            body: ChannelDoc::from_channel(s.body()),
        })
    }

    pub fn to_supermap<T: Interchange>(&self) -> Result<Supermap<T>> {
        Supermap::new(
            self.source.to_spec()?,
            self.target.to_spec()?,
            self.body.to_channel()?,
        )
    }
}

/// Comb document: `pre: B → E⊗A` and `post: E⊗A' → B'` with memory `env`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombDoc {
    pub env: SystemType,
    pub pre: ChannelDoc,
    pub post: ChannelDoc,
}

impl CombDoc {
    pub fn from_comb<T: Interchange>(c: &Comb<T>) -> Self {
        Self {
            env: c.env().clone(),
            pre: ChannelDoc::from_channel(c.pre()),
            post: ChannelDoc::from_channel(c.post()),
        }
    }

    pub fn to_comb<T: Interchange>(&self) -> Result<Comb<T>> {
        Comb::new(self.pre.to_channel()?, self.post.to_channel()?, &self.env)
    }
}

/// Signaling relation file, validated on load.
pub fn read_relation(path: &Path) -> Result<SignalingRelation> {
    validated(&read_json::<SignalingRelation>(path)?)
}

pub fn read_json<D: DeserializeOwned>(path: &Path) -> Result<D> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;
    use crate::supermaps::switch_supermap;

    fn q(l: &str) -> SystemType {
        SystemType::single(l, 2).unwrap()
    }

    #[test]
    fn matrix_round_trip() {
        let m = crate::tensor::gates::pauli_y();
        let doc = MatrixDoc::from_matrix(&m, None);
        let text = serde_json::to_string(&doc).unwrap();
        assert!(!text.contains("legs"));
        let back: MatrixDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_matrix().unwrap(), m);
    }

    #[test]
    fn malformed_entries_are_rejected() {
        let doc: MatrixDoc =
            serde_json::from_str(r#"{"rows": 2, "cols": 2, "entries": [[1, 0]]}"#).unwrap();
        assert!(doc.to_matrix().is_err());
        assert!(
            serde_json::from_str::<MatrixDoc>(r#"{"rows": 1, "cols": 1, "entries": [[1]]}"#)
                .is_err()
        );
    }

    #[test]
    fn quantum_channel_round_trip() {
        let c = Channel::random(&q("a"), &q("b"), 2, 4).unwrap();
        let doc = ChannelDoc::from_channel(&c);
        assert!(doc.system.deterministic);
        assert_eq!(doc.matrix.legs.as_ref().unwrap().len(), 2);
        let text = serde_json::to_string(&doc).unwrap();
        let back: ChannelDoc = serde_json::from_str(&text).unwrap();
        assert!(back.to_channel::<Quantum>().unwrap().distance(&c).unwrap() < 1e-15);
        assert!(back.to_channel::<Classical>().is_err());
    }

    #[test]
    fn classical_channel_round_trip() {
        let c = Classical::random_channel(
            &q("a"),
            &SystemType::single("b", 3).unwrap(),
            &mut rng_from(1),
        );
        let doc = ChannelDoc::from_channel(&c);
        assert_eq!((doc.matrix.rows, doc.matrix.cols), (3, 2));
        let back: ChannelDoc = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
        assert!(
            back.to_channel::<Classical>()
                .unwrap()
                .distance(&c)
                .unwrap()
                < 1e-15
        );
    }

    #[test]
    fn supermap_round_trip_keeps_sets() {
        let s = switch_supermap(2)
            .unwrap()
            .as_supermap_non_signaling()
            .unwrap();
        let doc = SupermapDoc::from_supermap(&s).unwrap();
        assert_eq!(doc.leg_roles.len(), 8);
        let text = serde_json::to_string(&doc).unwrap();
        let back: Supermap = serde_json::from_str::<SupermapDoc>(&text)
            .unwrap()
            .to_supermap()
            .unwrap();
        assert!(back.distance(&s).unwrap() < 1e-15);
        assert_eq!(back.source().relation(), s.source().relation());
    }

    #[test]
    fn comb_round_trip() {
        let c = Comb::<Quantum>::random(
            &q("a"),
            &q("a'"),
            &q("b"),
            &q("b'"),
            &q("e"),
            &mut rng_from(3),
        )
        .unwrap();
        let doc: CombDoc =
            serde_json::from_str(&serde_json::to_string(&CombDoc::from_comb(&c)).unwrap()).unwrap();
        let back = doc.to_comb::<Quantum>().unwrap();
        assert!(
            back.to_supermap()
                .unwrap()
                .distance(&c.to_supermap().unwrap())
                .unwrap()
                < 1e-14
        );
    }

    #[test]
    fn relation_files_are_validated() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        fs::write(
            &p,
            r#"{"in_parties": ["a"], "out_parties": ["b"], "forbidden": [["a", "c"]]}"#,
        )
        .unwrap();
        assert!(read_relation(&p).is_err());
        fs::write(
            &p,
            r#"{"in_parties": ["a"], "out_parties": ["b"], "forbidden": [["a", "b"]]}"#,
        )
        .unwrap();
        assert_eq!(read_relation(&p).unwrap().forbidden.len(), 1);
    }
}
