//! Scenario runner: drives the pulsed/thermal pipelines, the
//! representative-vs-exact comparison and the oracle cross-check, and packs
//! the results into a reproducible [`Report`].

use crate::absorption::{
    coherent_rho_mol, evolve_rho, excitation_amplitudes, overlap_matrix, overlap_matrix_exact,
    representative_occupations, thermal_rho_mol, unit_excitation_amplitudes, AbsorptionError,
    MolecularDensityMatrix,
};
use crate::analysis::{
    dominant_frequencies, expectation, frequency_bin, l1_coherence, purity, AnalysisError,
    TimeSeries,
};
use crate::field::{
    coherent_coefficients, enumerate_number_states, thermal_weights, CoefficientTable, FieldError,
    NumberState, DEFAULT_STATE_CAP,
};
use crate::molecule::{
    build_bright_dark_model, eigensystem, resonant_mode_grid, tag_projector, transition_dipoles,
    MoleculeError, DEFAULT_DEGENERACY_TOL,
};
use crate::oracle::{joint_final_state, partial_trace_field, thermal_oracle_rho, OracleError};
use crate::scenario::{FieldKind, Scenario};
use serde::Serialize;
use thiserror::Error;

/// Documented size limits for the brute-force oracle.
pub const ORACLE_MAX_MODES: usize = 4;
pub const ORACLE_MAX_N_CUT: u32 = 4;

const STATIONARITY_TOL: f64 = 1e-12;
const HERMITICITY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = -1e-10;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(
        "the field spec needs {required} number states, above the cap of {cap}; \
         try n_cut = {suggested} for this mode count"
    )]
    TooManyStates {
        required: u128,
        cap: usize,
        suggested: u32,
    },
    #[error("field.alphas must hold one amplitude per radiation mode: the model has {expected} degeneracy clusters, got {got}")]
    AlphaCount { expected: usize, got: usize },
    #[error("field.occupations must hold one occupation per radiation mode: the model has {expected} degeneracy clusters, got {got}")]
    OccupationCount { expected: usize, got: usize },
    #[error("nothing was excited: the field puts no photons into any coupled mode")]
    NothingExcited,
    #[error(transparent)]
    Molecule(#[from] MoleculeError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Absorption(#[from] AbsorptionError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// A named scalar result tagged with the operation that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct Scalar {
    pub name: String,
    pub value: f64,
    pub op: String,
}

impl Scalar {
    fn new(name: &str, value: f64, op: &str) -> Self {
        Self {
            name: name.into(),
            value,
            op: op.into(),
        }
    }
}

/// Built-in validity checks evaluated on every density matrix the run produced.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantFlags {
    pub hermitian: bool,
    pub positive_semidefinite: bool,
    pub positive_trace: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thermal_stationary: Option<bool>,
}

impl InvariantFlags {
    pub fn all_pass(&self) -> bool {
        self.hermitian
            && self.positive_semidefinite
            && self.positive_trace
            && self.thermal_stationary.unwrap_or(true)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSummary {
    pub requested: bool,
    pub ran: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

/// Everything a scenario run reports: the echoed scenario, tagged scalars,
/// extracted frequencies, invariant flags, and the time series (emitted as
/// CSV, not serialized into the JSON summary).
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: Scenario,
    pub scalars: Vec<Scalar>,
    pub frequencies_cycles: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency_bin_cycles: Option<f64>,
    pub invariants: InvariantFlags,
    pub oracle: OracleSummary,
    pub passed: bool,
    #[serde(skip)]
    pub timeseries: TimeSeries,
}

impl Report {
    /// JSON summary, newline-terminated; byte-identical for identical scenarios.
    pub fn summary_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// CSV table of the run's time series.
    pub fn timeseries_csv(&self) -> String {
        self.timeseries.to_csv()
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalars
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.value)
    }
}

fn largest_fitting_cut(n_modes: usize, cap: usize) -> u32 {
    let mut cut = 0u32;
    loop {
        let next = cut + 1;
        let mut required: u128 = 1;
        for _ in 0..n_modes {
            required = required.saturating_mul(next as u128 + 1);
        }
        if required > cap as u128 {
            return cut;
        }
        cut = next;
    }
}

fn relative_frobenius_gap(a: &MolecularDensityMatrix, b: &MolecularDensityMatrix) -> f64 {
    let denominator = b.frobenius_norm();
    if denominator == 0.0 {
        a.frobenius_norm()
    } else {
        a.frobenius_distance(b) / denominator
    }
}

/// Runs a validated scenario end to end. Deterministic: identical scenarios
/// produce byte-identical reports.
pub fn run_scenario(scenario: &Scenario) -> Result<Report, RunError> {
    let model = build_bright_dark_model(
        scenario.model.delta,
        scenario.model.coupling,
        scenario.model.n_dark as usize,
        scenario.model.dark_spread,
        scenario.model.dipole,
        false,
    )?;
    let eig = eigensystem(&model, DEFAULT_DEGENERACY_TOL)?;
    let dipoles = transition_dipoles(&eig, &model);
    let grid = resonant_mode_grid(&eig, model.ground_energy(), scenario.volume(), scenario.z())?;
    let n_modes = grid.n_modes();
    let n_cut = scenario.n_cut();

    // quantify the enumeration before building it
    let mut required: u128 = 1;
    for _ in 0..n_modes {
        required = required.saturating_mul(n_cut as u128 + 1);
    }
    if required > DEFAULT_STATE_CAP as u128 {
        return Err(RunError::TooManyStates {
            required,
            cap: DEFAULT_STATE_CAP,
            suggested: largest_fitting_cut(n_modes, DEFAULT_STATE_CAP),
        });
    }

    let mut scalars = Vec::new();

    // closed-form density matrices under both occupation conventions, plus
    // the field-spec bookkeeping scalars
    enum PureOrMixed {
        Pure(CoefficientTable),
        Mixed(crate::field::ThermalWeights),
    }
    let unit_amps = unit_excitation_amplitudes(&dipoles, &grid)?;
    let (rho_rep, rho_exact, field_input) = match &scenario.field.kind {
        FieldKind::Coherent { alphas } => {
            if alphas.len() != n_modes {
                return Err(RunError::AlphaCount {
                    expected: n_modes,
                    got: alphas.len(),
                });
            }
            let table = coherent_coefficients(&grid, alphas, n_cut, DEFAULT_STATE_CAP)?;
            scalars.push(Scalar::new(
                "delta_trunc",
                table.delta_trunc(),
                "coherent_coefficients",
            ));
            let rep_amps = excitation_amplitudes(
                &dipoles,
                &grid,
                &representative_occupations(&table.mean_occupations()),
            )?;
            let rho_rep = coherent_rho_mol(&rep_amps, &overlap_matrix(&table))?;
            let rho_exact = coherent_rho_mol(&unit_amps, &overlap_matrix_exact(&table))?;
            (rho_rep, rho_exact, PureOrMixed::Pure(table))
        }
        FieldKind::Number { occupations } => {
            if occupations.len() != n_modes {
                return Err(RunError::OccupationCount {
                    expected: n_modes,
                    got: occupations.len(),
                });
            }
            let space = enumerate_number_states(&grid, n_cut, DEFAULT_STATE_CAP)?;
            let table =
                CoefficientTable::number_state(space, &NumberState::new(occupations.clone()))?;
            scalars.push(Scalar::new(
                "delta_trunc",
                table.delta_trunc(),
                "CoefficientTable::number_state",
            ));
            let rep_amps = excitation_amplitudes(
                &dipoles,
                &grid,
                &representative_occupations(&table.mean_occupations()),
            )?;
            let rho_rep = coherent_rho_mol(&rep_amps, &overlap_matrix(&table))?;
            let rho_exact = coherent_rho_mol(&unit_amps, &overlap_matrix_exact(&table))?;
            (rho_rep, rho_exact, PureOrMixed::Pure(table))
        }
        FieldKind::Thermal { temperature } => {
            let weights = thermal_weights(&grid, *temperature, n_cut, DEFAULT_STATE_CAP)?;
            scalars.push(Scalar::new(
                "thermal_weight_deficit",
                weights.deficit(),
                "thermal_weights",
            ));
            let rep_amps = excitation_amplitudes(
                &dipoles,
                &grid,
                &representative_occupations(&weights.truncated_mean_occupations()),
            )?;
            let rho_rep = thermal_rho_mol(&weights, &rep_amps)?;
            let rho_exact = thermal_rho_mol(&weights, &unit_amps)?;
            (rho_rep, rho_exact, PureOrMixed::Mixed(weights))
        }
    };

    let raw_trace = rho_rep.raw_trace();
    let rho_op = match &scenario.field.kind {
        FieldKind::Thermal { .. } => "thermal_rho_mol",
        _ => "coherent_rho_mol",
    };
    scalars.push(Scalar::new("raw_trace", raw_trace, rho_op));
    if raw_trace <= 0.0 {
        return Err(RunError::NothingExcited);
    }
    scalars.push(Scalar::new(
        "rep_vs_exact_discrepancy",
        relative_frobenius_gap(&rho_rep, &rho_exact),
        "frobenius_distance",
    ));
    scalars.push(Scalar::new(
        "l1_coherence_normalized",
        l1_coherence(&rho_rep, true)?,
        "l1_coherence",
    ));
    scalars.push(Scalar::new("purity", purity(&rho_rep)?, "purity"));

    // oracle cross-check, within its documented size limits
    let mut produced = vec![rho_rep.clone(), rho_exact.clone()];
    let oracle = if !scenario.analysis.oracle {
        OracleSummary {
            requested: false,
            ran: false,
            skipped: None,
        }
    } else if n_modes > ORACLE_MAX_MODES || n_cut > ORACLE_MAX_N_CUT {
        OracleSummary {
            requested: true,
            ran: false,
            skipped: Some(format!(
                "oracle limited to {ORACLE_MAX_MODES} modes and n_cut {ORACLE_MAX_N_CUT}; \
                 scenario has {n_modes} modes at n_cut {n_cut}"
            )),
        }
    } else {
        let (rho_oracle, op) = match &field_input {
            PureOrMixed::Pure(table) => (
                partial_trace_field(&joint_final_state(table, &dipoles, &grid)?),
                "partial_trace_field",
            ),
            PureOrMixed::Mixed(weights) => (
                thermal_oracle_rho(weights, &dipoles, &grid)?,
                "thermal_oracle_rho",
            ),
        };
        scalars.push(Scalar::new(
            "oracle_vs_exact_closed_form",
            relative_frobenius_gap(&rho_exact, &rho_oracle),
            op,
        ));
        produced.push(rho_oracle);
        OracleSummary {
            requested: true,
            ran: true,
            skipped: None,
        }
    };

    // time series of the normalized state
    let times = scenario.time.times();
    let normalized = MolecularDensityMatrix::from_matrix(rho_rep.normalized()?);
    let p2 = tag_projector(&eig, &model, "S2");
    let p1 = tag_projector(&eig, &model, "S1");
    let s1_initial = expectation(&normalized, &p1);
    let with_ratio = s1_initial.abs() > 1e-14;
    if with_ratio {
        scalars.push(Scalar::new(
            "s2_s1_ratio_initial",
            expectation(&normalized, &p2) / s1_initial,
            "electronic_population_ratio",
        ));
    }

    let n_clusters = eig.n_clusters();
    let mut channels: Vec<(String, Vec<f64>)> = Vec::new();
    for k in 0..n_clusters {
        channels.push((format!("pop_k{k}"), Vec::with_capacity(times.len())));
    }
    channels.push(("l1_coherence".into(), Vec::with_capacity(times.len())));
    channels.push(("p_s2".into(), Vec::with_capacity(times.len())));
    channels.push(("p_s1".into(), Vec::with_capacity(times.len())));
    if with_ratio {
        channels.push(("ratio_s2_s1".into(), Vec::with_capacity(times.len())));
    }

    let mut stationarity_drift = 0.0f64;
    for &t in &times {
        let rho_t = evolve_rho(&normalized, &eig, t)?;
        for (k, cluster) in eig.clusters().iter().enumerate() {
            let population: f64 = cluster
                .members
                .iter()
                .map(|&j| rho_t.matrix()[(j, j)].re)
                .sum();
            channels[k].1.push(population);
        }
        let l1 = l1_coherence(&rho_t, false)?;
        channels[n_clusters].1.push(l1);
        let s2 = expectation(&rho_t, &p2);
        let s1 = expectation(&rho_t, &p1);
        channels[n_clusters + 1].1.push(s2);
        channels[n_clusters + 2].1.push(s1);
        if with_ratio {
            channels[n_clusters + 3].1.push(s2 / s1);
        }
        if matches!(scenario.field.kind, FieldKind::Thermal { .. }) {
            let raw_t = evolve_rho(&rho_rep, &eig, t)?;
            stationarity_drift =
                stationarity_drift.max(raw_t.frobenius_distance(&rho_rep) / raw_trace);
        }
    }
    let timeseries = TimeSeries::new(times, channels)?;

    let thermal_stationary = if matches!(scenario.field.kind, FieldKind::Thermal { .. }) {
        scalars.push(Scalar::new(
            "stationarity_drift",
            stationarity_drift,
            "evolve_rho",
        ));
        let channels_flat = timeseries.channels().iter().all(|(_, values)| {
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            max - min < STATIONARITY_TOL
        });
        Some(stationarity_drift < STATIONARITY_TOL && channels_flat)
    } else {
        None
    };

    // discrete spectrum of the bright-state channel
    let (frequencies_cycles, frequency_bin_cycles) = if timeseries.len() >= 8 {
        (
            dominant_frequencies(&timeseries, "p_s2", scenario.analysis.frequency_threshold)?,
            Some(frequency_bin(&timeseries)?),
        )
    } else {
        (Vec::new(), None)
    };

    let invariants = InvariantFlags {
        hermitian: produced
            .iter()
            .all(|rho| rho.hermiticity_deviation() < HERMITICITY_TOL),
        positive_semidefinite: produced.iter().all(|rho| rho.min_eigenvalue() > PSD_TOL),
        positive_trace: raw_trace > 0.0,
        thermal_stationary,
    };
    let passed = invariants.all_pass();

    Ok(Report {
        scenario: scenario.clone(),
        scalars,
        frequencies_cycles,
        frequency_bin_cycles,
        invariants,
        oracle,
        passed,
        timeseries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{example_scenario, parse_scenario};

    #[test]
    fn identical_scenarios_give_identical_bytes() {
        let scenario =
            parse_scenario(example_scenario("number-state-single-mode").unwrap()).unwrap();
        let a = run_scenario(&scenario).unwrap();
        let b = run_scenario(&scenario).unwrap();
        assert_eq!(a.timeseries_csv(), b.timeseries_csv());
        assert_eq!(a.summary_json(), b.summary_json());
    }

    #[test]
    fn thermal_example_is_stationary_and_incoherent() {
        let scenario = parse_scenario(example_scenario("thermal-bright-dark").unwrap()).unwrap();
        let report = run_scenario(&scenario).unwrap();
        assert!(report.passed);
        assert_eq!(report.invariants.thermal_stationary, Some(true));
        assert!(report.scalar("l1_coherence_normalized").unwrap() < 1e-10);
        assert!(report.frequencies_cycles.is_empty());
        assert!(report.oracle.ran);
    }

    #[test]
    fn coherent_two_mode_extracts_the_gap() {
        let scenario = parse_scenario(example_scenario("pulsed-two-level").unwrap()).unwrap();
        let report = run_scenario(&scenario).unwrap();
        assert!(report.passed);
        assert!(report.scalar("l1_coherence_normalized").unwrap() > 0.1);
        assert_eq!(report.frequencies_cycles.len(), 1);
        let expected = 0.2 / std::f64::consts::TAU;
        let bin = report.frequency_bin_cycles.unwrap();
        assert!((report.frequencies_cycles[0] - expected).abs() <= bin);
    }

    #[test]
    fn oversized_enumeration_suggests_a_cut() {
        let text = example_scenario("pulsed-bright-dark")
            .unwrap()
            .replace("n_cut = 4", "n_cut = 200");
        let scenario = parse_scenario(&text).unwrap();
        match run_scenario(&scenario) {
            Err(RunError::TooManyStates { suggested, .. }) => {
                assert!(suggested >= 4);
                let mut required: u128 = 1;
                for _ in 0..4 {
                    required = required.saturating_mul(suggested as u128 + 1);
                }
                assert!(required <= DEFAULT_STATE_CAP as u128);
            }
            other => panic!("expected TooManyStates, got {other:?}"),
        }
    }

    #[test]
    fn alpha_count_mismatch_is_reported() {
        let text = example_scenario("pulsed-two-level")
            .unwrap()
            .replace("alphas = [1.0, 1.0]", "alphas = [1.0, 1.0, 1.0]");
        let scenario = parse_scenario(&text).unwrap();
        match run_scenario(&scenario) {
            Err(RunError::AlphaCount {
                expected: 2,
                got: 3,
            }) => {}
            other => panic!("expected AlphaCount, got {other:?}"),
        }
    }

    #[test]
    fn oracle_can_be_disabled() {
        let text = example_scenario("oracle-crosscheck")
            .unwrap()
            .replace("oracle = true", "oracle = false");
        let scenario = parse_scenario(&text).unwrap();
        let report = run_scenario(&scenario).unwrap();
        assert!(!report.oracle.requested && !report.oracle.ran);
        assert!(report.scalar("oracle_vs_exact_closed_form").is_none());
    }
}
