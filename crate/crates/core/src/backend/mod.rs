//! Netlist emission and resource estimation.

pub mod netlist;
pub mod resources;

pub use netlist::{emit_netlist, parse_netlist, Netlist, NetlistError};
pub use resources::{estimate_resources, Counts, ResourceEstimate};
