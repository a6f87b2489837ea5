//! Brute-force referee for the closed-form trace: builds the joint
//! field⊗molecule state photon by photon, forms the joint density matrix
//! implicitly, and traces out the field by explicit summation over field
//! configurations. Deliberately naive; intended for ≤ 4 modes and n_cut ≤ 4.
//!
//! The exact per-number-state √N_k factors are always retained here, so this
//! path is the ground truth the representative-occupation convention is
//! measured against.

use crate::absorption::MolecularDensityMatrix;
use crate::field::{field_amplitude, CoefficientTable, ModeGrid, NumberStateSpace, ThermalWeights};
use crate::molecule::TransitionDipoles;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("grid has {modes} modes but the coefficient table covers {table_modes}")]
    TableModeMismatch { modes: usize, table_modes: usize },
    #[error("grid has {modes} modes but the dipole table has {clusters} clusters")]
    GridClusterMismatch { modes: usize, clusters: usize },
}

/// Joint one-photon-absorbed state: one complex amplitude per
/// (excited eigenstate, post-absorption field configuration).
#[derive(Debug, Clone)]
pub struct JointState {
    amplitudes: DMatrix<C64>,
    n_cut: u32,
}

impl JointState {
    /// Rows: eigenstates (k,**m**); columns: field states in lexicographic order.
    pub fn amplitudes(&self) -> &DMatrix<C64> {
        &self.amplitudes
    }

    pub fn n_cut(&self) -> u32 {
        self.n_cut
    }

    /// Squared norm; equals the raw trace of the traced-out density matrix.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

fn check_dims(
    space: &NumberStateSpace,
    dipoles: &TransitionDipoles,
    grid: &ModeGrid,
) -> Result<(), OracleError> {
    if space.n_modes() != grid.n_modes() {
        return Err(OracleError::TableModeMismatch {
            modes: grid.n_modes(),
            table_modes: space.n_modes(),
        });
    }
    if dipoles.n_clusters() != grid.n_modes() {
        return Err(OracleError::GridClusterMismatch {
            modes: grid.n_modes(),
            clusters: dipoles.n_clusters(),
        });
    }
    Ok(())
}

/// Literal assembly of the final entangled state: for every number state
/// **N** with N_k ≥ 1, mode k deposits
/// 2πi ε(N_k, ω_k) ⟨E_k,**m**|ε̂·**d**|E_i⟩ c(**N**) into (eigenstate, **N**−e_k),
/// keeping the exact √N_k in ε.
pub fn joint_final_state(
    coeffs: &CoefficientTable,
    dipoles: &TransitionDipoles,
    grid: &ModeGrid,
) -> Result<JointState, OracleError> {
    let space = coeffs.space();
    check_dims(space, dipoles, grid)?;
    let n_eigenstates = dipoles.dimension();
    let mut amplitudes = DMatrix::<C64>::zeros(n_eigenstates, space.len());
    let prefactor = C64::new(0.0, TAU);
    for n_index in 0..space.len() {
        let c = coeffs.coefficient(n_index);
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let state = space.state(n_index);
        for k in 0..space.n_modes() {
            let occupation = state.occupation(k);
            if occupation == 0 {
                continue;
            }
            let m_index = space.lowered(n_index, k).expect("occupied mode lowers");
            let eps = field_amplitude(
                occupation as f64,
                grid.frequency(k),
                grid.volume(),
                grid.z(),
            );
            for (j, &d) in dipoles.elements().iter().enumerate() {
                if dipoles.cluster_of()[j] != k {
                    continue;
                }
                amplitudes[(j, m_index)] += prefactor * eps * d * c;
            }
        }
    }
    Ok(JointState {
        amplitudes,
        n_cut: space.n_cut(),
    })
}

/// Traces the radiation field out of |Ψ⟩⟨Ψ| by summing over shared field
/// configurations: ρ[(k,**m**),(k′,**m**′)] = Σ_**M** Ψ[(k,**m**),**M**] Ψ*[(k′,**m**′),**M**].
pub fn partial_trace_field(psi: &JointState) -> MolecularDensityMatrix {
    let rho = psi.amplitudes() * psi.amplitudes().adjoint();
    MolecularDensityMatrix::from_matrix(rho)
}

/// Thermal excitation the long way: the p_**N**-weighted incoherent sum of
/// single-number-state excitations, each run through the full joint-state and
/// partial-trace machinery.
pub fn thermal_oracle_rho(
    weights: &ThermalWeights,
    dipoles: &TransitionDipoles,
    grid: &ModeGrid,
) -> Result<MolecularDensityMatrix, OracleError> {
    let space = weights.space();
    check_dims(space, dipoles, grid)?;
    let dim = dipoles.dimension();
    let mut accumulated = DMatrix::<C64>::zeros(dim, dim);
    for (n_index, &p) in weights.probabilities().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let table = CoefficientTable::number_state(space.clone(), space.state(n_index))
            .expect("enumerated state is within its own space");
        let psi = joint_final_state(&table, dipoles, grid)?;
        let rho_n = partial_trace_field(&psi);
        accumulated += rho_n.matrix() * C64::new(p, 0.0);
    }
    Ok(MolecularDensityMatrix::from_matrix(accumulated))
}
