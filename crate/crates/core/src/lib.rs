pub mod channels;
pub mod classical;
pub mod config;
pub mod error;
pub mod io;
pub mod lat;
pub mod report;
pub mod rng;
pub mod supermaps;
pub mod tensor;

pub use channels::{Channel, ChannelSetSpec, Classical, Quantum, Theory};
pub use error::{Error, Result};
pub use tensor::{ComplexMatrix, LabeledTensor, SystemType};
