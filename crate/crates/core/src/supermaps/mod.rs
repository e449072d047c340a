//! Supermaps in body form, combs, multi-slot supermaps and the switch.

mod comb;
mod multi;
mod supermap;
mod switch;

pub use comb::Comb;
pub use multi::{par_enrichment, seq_enrichment, MultiSupermap};
pub use supermap::{Supermap, SupermapReport};
pub use switch::{
    classical_switch, control_output, switch_supermap, CONTROL, SLOT1_IN, SLOT1_OUT, SLOT2_IN,
    SLOT2_OUT, SYSTEM,
};
