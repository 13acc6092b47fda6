//! Graph states, stabilizer groups and the estimators built on them.

mod counts;
mod graph;
mod group;
mod mermin;
mod pauli;
mod statevec;

pub use counts::{expectation_from_counts, format_bits, CountsTable, Estimate, OutcomeTable, OutcomeWeight, ProbabilityTable};
pub use graph::Graph;
pub use group::{generators_from_graph, StabilizerElement, StabilizerGroup, MAX_QUBITS};
pub use mermin::{
    chsh, estimates_from_table, fidelity, lhv_bound, mermin_three_setting, mermin_two_setting,
    mermin_two_setting_all, mermin_variant, mermin_variants, FidelityResult, MerminResult, MerminSummary,
    MerminVariant, MAX_LHV_QUBITS,
};
pub use pauli::{Pauli, PauliString};
pub use statevec::{
    apply_pauli, apply_single, expectation, ideal_state_vector, inner, project_qubits_zero, pure_fidelity,
    StateVector,
};
