//! Processes in Choi/superoperator form, constrained channel sets and their
//! dilation extensions, signaling checks and the control construction.

mod channel;
mod control;
mod quantum;
mod sets;
mod signaling;
mod theory;

pub use channel::{Channel, ChannelReport, DETERMINISTIC_TOL};
pub use control::{control_channel, ControlPair};
pub use sets::{
    dext_counterexample, in_dilation_extension, sample_dext, sample_member, ChannelSetSpec,
    CustomSet, Direction, SetKind,
};
pub use signaling::{check_signaling, EdgeResult, GroupResult, SignalingRelation, SignalingReport};
pub use theory::{Classical, Quantum, Theory};

#[cfg(test)]
pub(crate) use theory::random_isometry;
