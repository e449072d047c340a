use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Channel, Theory};
use crate::error::{Error, Result};
use crate::tensor::SystemType;

/// A signaling constraint: input party `b` may not influence output party
/// `a'` for each forbidden pair `(b, a')`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalingRelation {
    pub in_parties: Vec<String>,
    pub out_parties: Vec<String>,
    pub forbidden: Vec<(String, String)>,
}

impl SignalingRelation {
    pub fn new(
        in_parties: Vec<String>,
        out_parties: Vec<String>,
        forbidden: Vec<(String, String)>,
    ) -> Result<Self> {
        for (b, a) in &forbidden {
            if !in_parties.contains(b) {
                return Err(Error::UnknownLabel(b.clone()));
            }
            if !out_parties.contains(a) {
                return Err(Error::UnknownLabel(a.clone()));
            }
        }
        Ok(Self {
            in_parties,
            out_parties,
            forbidden,
        })
    }

    /// Full no-signaling between positionally paired parties: input `i` may
    /// not influence output `j` for every `i ≠ j`.
    pub fn no_signaling(input: &SystemType, output: &SystemType) -> Result<Self> {
        if input.len() != output.len() {
            return Err(Error::PartitionMismatch(format!(
                "{} inputs vs {} outputs",
                input.len(),
                output.len()
            )));
        }
        let ins: Vec<String> = input.labels().iter().map(|s| s.to_string()).collect();
        let outs: Vec<String> = output.labels().iter().map(|s| s.to_string()).collect();
        let mut forbidden = Vec::new();
        for (i, b) in ins.iter().enumerate() {
            for (j, a) in outs.iter().enumerate() {
                if i != j {
                    forbidden.push((b.clone(), a.clone()));
                }
            }
        }
        Self::new(ins, outs, forbidden)
    }

    /// Input parties with at least one forbidden edge, with their forbidden
    /// outputs.
    pub fn groups(&self) -> Vec<(String, Vec<String>)> {
        let mut out = Vec::new();
        for b in &self.in_parties {
            let targets: Vec<String> = self
                .forbidden
                .iter()
                .filter(|(x, _)| x == b)
                .map(|(_, a)| a.clone())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if !targets.is_empty() {
                out.push((b.clone(), targets));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeResult {
    pub from: String,
    pub to: String,
    pub deviation: f64,
    pub holds: bool,
}

/// Joint constraint for one input party against all of its forbidden outputs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupResult {
    pub from: String,
    pub to: Vec<String>,
    pub deviation: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignalingReport {
    pub edges: Vec<EdgeResult>,
    pub groups: Vec<GroupResult>,
    pub holds: bool,
}

/// Deviation of `c`'s marginal on `outs` from independence of input `b`:
/// `‖R − R_b ⊗ discard_b‖` where `R` keeps only `outs` and `R_b` feeds the
/// uniform state into `b`.
fn independence_deviation<T: Theory>(c: &Channel<T>, b: &str, outs: &[&str]) -> Result<f64> {
    let r = c.keep_outputs(outs)?;
    let bt = c.in_type().select(&[b])?;
    let rb = r.prepare(&Channel::uniform_state(&bt))?;
    let replaced = rb.parallel(&Channel::discard(&bt))?;
    r.distance(&replaced)
}

/// Checks every forbidden edge of `rel` on `c`, and the joint condition per
/// input party over its whole forbidden output set.
pub fn check_signaling<T: Theory>(
    c: &Channel<T>,
    rel: &SignalingRelation,
    tol: f64,
) -> Result<SignalingReport> {
    let ins: BTreeSet<&str> = rel.in_parties.iter().map(String::as_str).collect();
    let outs: BTreeSet<&str> = rel.out_parties.iter().map(String::as_str).collect();
    let cin: BTreeSet<&str> = c.in_type().labels().into_iter().collect();
    let cout: BTreeSet<&str> = c.out_type().labels().into_iter().collect();
    if ins != cin
        || outs != cout
        || ins.len() != rel.in_parties.len()
        || outs.len() != rel.out_parties.len()
    {
        return Err(Error::PartitionMismatch(format!(
            "relation parties {:?} → {:?} vs channel {} → {}",
            rel.in_parties,
            rel.out_parties,
            c.in_type(),
            c.out_type()
        )));
    }
    let mut edges = Vec::with_capacity(rel.forbidden.len());
    for (b, a) in &rel.forbidden {
        let deviation = independence_deviation(c, b, &[a.as_str()])?;
        edges.push(EdgeResult {
            from: b.clone(),
            to: a.clone(),
            deviation,
            holds: deviation <= tol,
        });
    }
    let mut groups = Vec::new();
    for (b, targets) in rel.groups() {
        let t: Vec<&str> = targets.iter().map(String::as_str).collect();
        let deviation = independence_deviation(c, &b, &t)?;
        groups.push(GroupResult {
            from: b,
            to: targets,
            deviation,
            holds: deviation <= tol,
        });
    }
    let holds = edges.iter().all(|e| e.holds) && groups.iter().all(|g| g.holds);
    Ok(SignalingReport {
        edges,
        groups,
        holds,
    })
}
