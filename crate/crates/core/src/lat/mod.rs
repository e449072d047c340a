//! Locally-applicable transformations as black-box oracles, their embedding
//! from supermaps and the extraction back, and randomized verifiers for the
//! rules they must obey.

mod checks;
mod closure;
mod multi;
mod oracle;

pub use checks::{
    check_convex_linearity, check_convex_linearity_at, check_local_applicability,
    LocalApplicabilityReport, MIX_WEIGHTS,
};
pub use closure::{extend_to_cp, CpPresentation};
pub use multi::MultiLatOracle;
pub use oracle::{decorrelating_oracle, nonlinear_oracle, LatOracle};

#[cfg(test)]
mod tests;
