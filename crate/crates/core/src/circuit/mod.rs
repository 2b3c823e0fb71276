// SPDX-License-Identifier: Apache-2.0

//! Gate-level approximate circuits: representation, simulation, error analysis
//! and synthetic library generation.

mod builders;
mod library;
mod metrics;
mod netlist;
mod parse;
mod sim;

pub use builders::{build_exact_adder, build_exact_multiplier};
pub use library::{gen_library, Library, ManifestEntry, EXACT_FILE, MANIFEST_FILE};
pub use metrics::{error_metrics, error_metrics_sampled, ErrorReport};
pub use netlist::{Gate, GateType, NetId, Netlist, NetlistBuilder, Signal};
pub use parse::parse_netlist;
pub use sim::{
    check_equivalence, exhaustive_block_inputs, exhaustive_layout, pack_lanes, truth_table, unpack_lanes,
    Combinational, EXHAUSTIVE_LIMIT,
};
