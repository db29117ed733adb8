//! Dense state-vector simulation of qudit registers.
//!
//! Gates act on fibers of the amplitude vector (one wire varying, all others
//! fixed), so a controlled gate on an `n`-wire register costs `O(d^n · d)`
//! and no operator larger than `d × d` is ever built.

mod circuit;
mod gate;
mod measure;
mod state;

pub use circuit::{Circuit, RUN_NORM_TOLERANCE};
pub use gate::{Gate, PowerCache, CONTROL_TRIGGER};
pub use measure::Outcome;
pub use state::{QuditState, WireInit, NORM_TOLERANCE};
