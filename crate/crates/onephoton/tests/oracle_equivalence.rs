//! The closed-form field trace against the brute-force joint-state oracle,
//! plus the structural consequences the two paths must share.

use num_complex::Complex64 as C64;
use onephoton::absorption::{
    coherent_rho_mol, excitation_amplitudes, overlap_matrix, overlap_matrix_exact,
    representative_occupations, thermal_rho_mol, unit_excitation_amplitudes,
    MolecularDensityMatrix,
};
use onephoton::field::{
    coherent_coefficients, thermal_mean_occupation, thermal_weights, DEFAULT_STATE_CAP,
};
use onephoton::molecule::{
    build_bright_dark_model, eigensystem, resonant_mode_grid, transition_dipoles, BasisLabel,
    EigenSystem, MolecularModel, TransitionDipoles, DEFAULT_DEGENERACY_TOL,
};
use onephoton::oracle::{joint_final_state, partial_trace_field, thermal_oracle_rho};
use onephoton::{purity, ModeGrid};

fn setup(n_dark: usize, coupling: f64, spread: f64) -> (EigenSystem, TransitionDipoles, ModeGrid) {
    let model = build_bright_dark_model(1.0, coupling, n_dark, spread, 1.0, false).unwrap();
    let eig = eigensystem(&model, DEFAULT_DEGENERACY_TOL).unwrap();
    let dipoles = transition_dipoles(&eig, &model);
    let grid = resonant_mode_grid(&eig, 0.0, 1.0, 0.0).unwrap();
    (eig, dipoles, grid)
}

fn relative_gap(a: &MolecularDensityMatrix, b: &MolecularDensityMatrix) -> f64 {
    a.frobenius_distance(b) / b.frobenius_norm()
}

#[test]
fn overlap_cross_term_matches_the_explicit_trace() {
    // D_{21} from the shifted-coefficient sum against the same element dug out
    // of the brute-force field trace
    let (_, dipoles, grid) = setup(1, 0.1, 0.0);
    let alphas = [C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
    let table = coherent_coefficients(&grid, &alphas, 6, DEFAULT_STATE_CAP).unwrap();
    let weighted = overlap_matrix_exact(&table);
    let unit = unit_excitation_amplitudes(&dipoles, &grid).unwrap();
    let rho = partial_trace_field(&joint_final_state(&table, &dipoles, &grid).unwrap());
    // singleton clusters: eigenstate j belongs to mode j
    let d21_from_trace = rho.matrix()[(0, 1)] / (unit.amplitude(0) * unit.amplitude(1).conj());
    let d21 = weighted.entry(1, 0);
    assert!(
        (d21 - d21_from_trace).norm() < 1e-10,
        "gram {d21} vs trace {d21_from_trace}"
    );
    assert!(
        d21.norm() > 0.1,
        "coherent cross term should be substantial"
    );
}

#[test]
fn coherent_closed_form_with_exact_weights_matches_the_oracle() {
    // 3-mode instance at n_cut = 2, complex amplitudes included
    let (_, dipoles, grid) = setup(2, 0.1, 0.3);
    let alphas = [C64::new(1.0, 0.0), C64::new(0.4, 0.8), C64::new(-0.6, 0.2)];
    let table = coherent_coefficients(&grid, &alphas, 2, DEFAULT_STATE_CAP).unwrap();
    let unit = unit_excitation_amplitudes(&dipoles, &grid).unwrap();
    let closed = coherent_rho_mol(&unit, &overlap_matrix_exact(&table)).unwrap();
    let oracle = partial_trace_field(&joint_final_state(&table, &dipoles, &grid).unwrap());
    assert!(relative_gap(&closed, &oracle) < 1e-10);
    assert!(oracle.raw_trace() > 0.0);
}

#[test]
fn thermal_closed_form_matches_the_oracle_mixture() {
    // 2-mode instance at n_cut = 3 with N̄ ≈ 0.5 at the bright transition
    let (_, dipoles, grid) = setup(1, 0.1, 0.0);
    let temperature = 1.0 / 3f64.ln();
    let weights = thermal_weights(&grid, temperature, 3, DEFAULT_STATE_CAP).unwrap();
    let unit = unit_excitation_amplitudes(&dipoles, &grid).unwrap();
    let closed = thermal_rho_mol(&weights, &unit).unwrap();
    let oracle = thermal_oracle_rho(&weights, &dipoles, &grid).unwrap();
    assert!(relative_gap(&closed, &oracle) < 1e-10);
}

#[test]
fn representative_discrepancy_shrinks_with_classicality() {
    // the representative-occupation shortcut converges to the exact path as
    // the per-mode photon statistics sharpen: α = 2, 4, 8 on one mode
    let (_, dipoles, grid) = setup(0, 0.0, 0.0);
    let mut discrepancies = Vec::new();
    for (alpha, n_cut) in [(2.0, 25u32), (4.0, 60), (8.0, 120)] {
        let table = coherent_coefficients(&grid, &[C64::new(alpha, 0.0)], n_cut, DEFAULT_STATE_CAP)
            .unwrap();
        let rep = excitation_amplitudes(
            &dipoles,
            &grid,
            &representative_occupations(&table.mean_occupations()),
        )
        .unwrap();
        let rho_rep = coherent_rho_mol(&rep, &overlap_matrix(&table)).unwrap();
        let unit = unit_excitation_amplitudes(&dipoles, &grid).unwrap();
        let rho_exact = coherent_rho_mol(&unit, &overlap_matrix_exact(&table)).unwrap();
        discrepancies.push(relative_gap(&rho_rep, &rho_exact));
    }
    assert!(
        discrepancies[0] > discrepancies[1] && discrepancies[1] > discrepancies[2],
        "not monotone: {discrepancies:?}"
    );
    assert!(discrepancies[0] < 0.02, "α = 2 should already be close");
    assert!(discrepancies[2] < 1e-9, "α = 8 should be essentially exact");
}

#[test]
fn truncation_boundary_is_the_only_entanglement_in_coherent_light() {
    // a product coherent field is an annihilation-operator eigenstate, so the
    // untruncated joint state factorizes; at finite n_cut the boundary shell
    // leaves a small but genuine second Schmidt weight
    let (_, dipoles, grid) = setup(1, 0.1, 0.0);
    let alphas = [C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
    let table = coherent_coefficients(&grid, &alphas, 4, DEFAULT_STATE_CAP).unwrap();
    let rho = partial_trace_field(&joint_final_state(&table, &dipoles, &grid).unwrap());
    let spectrum = rho.eigenvalues();
    let largest = spectrum[spectrum.len() - 1];
    let second = spectrum[spectrum.len() - 2];
    assert!(
        second > 1e-6 * largest,
        "Schmidt rank should exceed 1 at n_cut = 4: spectrum {spectrum:?}"
    );
    assert!(purity(&rho).unwrap() < 0.999);

    // single shared mode: the joint state is an exact product even with two
    // degenerate molecular states
    let h = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        C64::new(2.0, 0.0),
        C64::new(2.0, 0.0),
    ]));
    let model = MolecularModel::new(
        0.0,
        h,
        vec![BasisLabel::new("S1", 0), BasisLabel::new("S1", 1)],
        vec![C64::new(1.0, 0.0), C64::new(0.5, 0.0)],
    )
    .unwrap();
    let eig = eigensystem(&model, DEFAULT_DEGENERACY_TOL).unwrap();
    let dipoles = transition_dipoles(&eig, &model);
    let grid = resonant_mode_grid(&eig, 0.0, 1.0, 0.0).unwrap();
    let table = coherent_coefficients(&grid, &[C64::new(1.0, 0.0)], 6, DEFAULT_STATE_CAP).unwrap();
    let rho = partial_trace_field(&joint_final_state(&table, &dipoles, &grid).unwrap());
    assert!((purity(&rho).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn oracle_matches_across_weight_scales() {
    // thermal agreement should not depend on how hot the field is
    let (_, dipoles, grid) = setup(2, 0.15, 0.25);
    let unit = unit_excitation_amplitudes(&dipoles, &grid).unwrap();
    for temperature in [0.3, 0.9, 2.5] {
        let weights = thermal_weights(&grid, temperature, 3, DEFAULT_STATE_CAP).unwrap();
        let closed = thermal_rho_mol(&weights, &unit).unwrap();
        let oracle = thermal_oracle_rho(&weights, &dipoles, &grid).unwrap();
        assert!(
            relative_gap(&closed, &oracle) < 1e-10,
            "temperature {temperature}"
        );
        let n_bar = thermal_mean_occupation(grid.frequency(0), temperature);
        assert!(n_bar > 0.0);
    }
}
