//! Simulation of one-photon molecular absorption from quantized radiation
//! fields.
//!
//! A pulsed multimode coherent field excites a molecule into a coherently
//! evolving superposition of energy eigenstates; a CW thermal field leaves a
//! stationary mixture. This crate builds both answers two independent ways —
//! a closed-form field trace and a brute-force joint-state oracle — and
//! quantifies coherence, beat frequencies, and electronic population ratios
//! on the result.
//!
//! Layout:
//! - [`field`]: mode grids, number-state enumeration, coherent and thermal
//!   field statistics, field amplitudes.
//! - [`molecule`]: bright/dark vibronic models, eigendecomposition with
//!   degeneracy clustering, transition dipoles, resonant mode grids.
//! - [`absorption`]: excitation amplitudes, overlap matrices, the closed-form
//!   molecular density matrix, free evolution.
//! - [`oracle`]: the explicit joint-state construction and partial trace.
//! - [`analysis`]: coherence norms, purity, time series, frequency
//!   extraction, population ratios, Einstein-rate dynamics.
//! - [`scenario`] / [`run`]: TOML scenario files, the end-to-end runner, and
//!   CSV/JSON reporting.

pub mod absorption;
pub mod analysis;
pub mod field;
pub mod molecule;
pub mod oracle;
pub mod run;
pub mod scenario;

pub use absorption::{
    coherent_rho_mol, evolve_rho, excitation_amplitudes, overlap_matrix, overlap_matrix_exact,
    representative_occupations, thermal_rho_mol, unit_excitation_amplitudes, AmplitudeTable,
    MolecularDensityMatrix, OccupationWeighting, OverlapMatrix,
};
pub use analysis::{
    dominant_frequencies, einstein_rate_evolution, electronic_population_ratio, frequency_bin,
    l1_coherence, observable_timeseries, purity, RatePopulations, TimeSeries,
};
pub use field::{
    coherent_coefficients, enumerate_number_states, field_amplitude, thermal_mean_occupation,
    thermal_weights, CoefficientTable, ModeGrid, NumberState, NumberStateSpace, ThermalWeights,
    DEFAULT_STATE_CAP,
};
pub use molecule::{
    build_bright_dark_model, eigensystem, resonant_mode_grid, tag_projector, transition_dipoles,
    BasisLabel, EigenSystem, MolecularModel, TransitionDipoles, DEFAULT_DEGENERACY_TOL,
};
pub use oracle::{joint_final_state, partial_trace_field, thermal_oracle_rho, JointState};
pub use run::{run_scenario, Report, RunError};
pub use scenario::{example_scenario, parse_scenario, Scenario, ScenarioError, EXAMPLE_SCENARIOS};
