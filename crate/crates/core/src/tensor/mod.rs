//! Dense matrices and labeled tensors: the numerical substrate for string
//! diagrams. Boxes are tensors, wires are labeled legs, and plugging boxes
//! together is contraction over shared labels.

mod labeled;
pub mod matrix;
mod scalar;
mod system;

pub use labeled::{bell_cap, bell_cup, LabeledTensor, Leg, LegRef, Polarity, Tensor};
pub use matrix::{gates, hermitian_check, kron, psd_check, ComplexMatrix};
pub(crate) use scalar::permute_axes;
pub use scalar::Scalar;
pub use system::{dual_label, Factor, SystemType};
