//! Medusa: flag-qubit instrumentation for CNOT-only Clifford circuits.
//!
//! The crate turns an ICM circuit (qubits initialized to `|0>`/`|+>`, a body
//! of CNOTs, terminal Z measurements) into a flagged circuit whose extra
//! flag qubits detect propagated faults, then quantifies how well that works:
//!
//! * [`circuit`]: the circuit IR, flag-gadget lowering, and text format v1.
//! * [`frames`]: stabilizer bookkeeping; Pauli-frame fault propagation and an
//!   exact state-vector-free oracle over the full signed tableau.
//! * [`flagger`]: candidate windows, ranking, and budgeted flag insertion.
//! * [`benchgen`]: the adder-like benchmark family.
//! * [`montecarlo`]: depolarizing-noise sampling, failure-rate reports.
//! * [`tuner`]: binary search for the flag noise multiplier `m`.
//! * [`resources`]: surface-code distances and physical qubit counts.
//!
//! Each capability has a runnable example:
//!
//! ```text
//! cargo run --example generate_and_flag
//! cargo run --example stabilizer_truth_table
//! cargo run --example error_injection
//! cargo run --example failure_rates
//! cargo run --example tune_multiplier
//! cargo run --example resource_estimates
//! ```
//!
//! The same operations are scriptable through the thin `medusa` binary; see
//! the README for the subcommand reference.

pub mod benchgen;
pub mod bits;
pub mod circuit;
pub mod flagger;
pub mod frames;
pub mod montecarlo;
pub mod resources;
pub mod tuner;

pub use benchgen::{gen_adder_like, AdderSpec};
pub use circuit::{Circuit, CircuitError, FlagAnnotation, FlagType, GateKind, GateRole, InitBasis};
pub use flagger::{FlagBudget, FlagCandidate};
pub use frames::{FaultEvent, FrameError, FrameOutcome, PauliString, StabilizerSet, TwoQubitPauli};
pub use montecarlo::{MonteCarloError, NoiseModel, RunReport, ShotTally, SimConfig};
pub use resources::{
    estimate_total, flag_error_rate, qubits_per_flag, required_distance, ResourceError,
    ResourceEstimate, SweepRow,
};
pub use tuner::{
    target_from_smaller, tune, TargetEstimate, TuneError, TuneObjective, TuneRequest, TuneResult,
};
