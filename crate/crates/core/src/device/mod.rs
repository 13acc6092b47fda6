//! Parametric model of the four-photon chip: pair sources, the
//! reconfigurable entangling gate and four single-qubit analysis stages.
//!
//! Mode layout: qubit `q` (0-based) occupies modes `2q` (rail 0, logical
//! `|0>`) and `2q + 1`; modes 8 and 9 are gate loss ports. Sources 1 and 2
//! feed the rails of qubits 1 and 3, sources 3 and 4 those of qubits 2 and 4.

mod circuit;
mod config;
mod hom;
mod sim;
mod source;

pub use circuit::{
    analysis_matrix, analysis_unitary, frame, gate_elements, gate_modes, gate_phases, measurement_matrix,
    mzi_with_input_phase, rpeg_unitary, third_splitter_phase, Matrix2,
};
pub use config::{
    analysis_site, gate_site, pump_site, rail_mode, setting_for_pauli, AnalysisSetting, DeviceConfig, QubitAnalysis,
    RpegMode, SourceSpec, MODES, PHASE_SITES, QUBITS,
};
pub use hom::{fit_fringe_visibility, fit_harmonic, hom_fringe, phase_sweep, visibility_conversion, HarmonicFit};
pub use sim::{
    build_bell_pairs, gate_logical_matrix, gate_success_probability, pattern_probabilities, simulate,
    simulate_subset, state_fidelity, Device, OutcomeDistribution,
};
pub use source::{pair_probability, xi_for_pair_probability};
