//! One-photon excitation amplitudes, the post-absorption molecular density
//! matrix for coherent and thermal fields, and its free evolution.
//!
//! The closed-form trace comes in two occupation conventions. `Representative`
//! keeps the amplitude prefactor N-independent by inserting one representative
//! occupation per mode. `Exact` keeps the per-number-state √N_k factors by
//! folding them into the overlap sums and evaluating the amplitudes at unit
//! occupation; this is the convention that reproduces the brute-force partial
//! trace to rounding error. The gap between the two is a measurable quantity,
//! reported by the scenario runner rather than hidden.

use crate::field::{field_amplitude, CoefficientTable, ModeGrid, ThermalWeights};
use crate::molecule::{EigenSystem, TransitionDipoles};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AbsorptionError {
    #[error("grid has {modes} modes but the dipole table has {clusters} clusters")]
    GridClusterMismatch { modes: usize, clusters: usize },
    #[error("expected one occupation per mode ({expected}), got {got}")]
    OccupationCountMismatch { expected: usize, got: usize },
    #[error(
        "amplitude table uses {amplitudes:?} weighting but the overlap matrix uses {overlaps:?}"
    )]
    WeightingMismatch {
        amplitudes: OccupationWeighting,
        overlaps: OccupationWeighting,
    },
    #[error("dimension mismatch: density matrix is {rho}, companion structure is {other}")]
    DimensionMismatch { rho: usize, other: usize },
    #[error("evolution interval must be non-negative, got {0}")]
    NegativeInterval(f64),
    #[error("density matrix has zero trace; nothing was excited")]
    ZeroTrace,
}

/// Which occupation numbers enter the field-amplitude factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OccupationWeighting {
    /// One representative occupation per mode inside the amplitude prefactor.
    Representative,
    /// Unit-occupation amplitudes; exact √N_k factors live in the overlap sums.
    Exact,
}

/// Representative occupation per mode: the mean, rounded up to one photon when
/// it is positive but below one.
pub fn representative_occupations(mean_occupations: &[f64]) -> Vec<f64> {
    mean_occupations
        .iter()
        .map(|&m| if m > 0.0 && m < 1.0 { 1.0 } else { m })
        .collect()
}

/// Excitation amplitudes A(k,**m**) = 2πi ε(N_k, ω_k) ⟨E_k,**m**|ε̂·**d**|E_i⟩,
/// one per excited eigenstate.
#[derive(Debug, Clone)]
pub struct AmplitudeTable {
    amplitudes: Vec<C64>,
    cluster_of: Vec<usize>,
    n_clusters: usize,
    occupations: Vec<f64>,
    weighting: OccupationWeighting,
}

impl AmplitudeTable {
    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, eigenstate: usize) -> C64 {
        self.amplitudes[eigenstate]
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn cluster_of(&self) -> &[usize] {
        &self.cluster_of
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    /// The per-mode occupation numbers the amplitudes were evaluated at.
    pub fn occupations(&self) -> &[f64] {
        &self.occupations
    }

    pub fn weighting(&self) -> OccupationWeighting {
        self.weighting
    }
}

fn assemble_amplitudes(
    dipoles: &TransitionDipoles,
    grid: &ModeGrid,
    occupations: Vec<f64>,
    weighting: OccupationWeighting,
) -> Result<AmplitudeTable, AbsorptionError> {
    if grid.n_modes() != dipoles.n_clusters() {
        return Err(AbsorptionError::GridClusterMismatch {
            modes: grid.n_modes(),
            clusters: dipoles.n_clusters(),
        });
    }
    if occupations.len() != grid.n_modes() {
        return Err(AbsorptionError::OccupationCountMismatch {
            expected: grid.n_modes(),
            got: occupations.len(),
        });
    }
    let prefactor = C64::new(0.0, TAU);
    let amplitudes = dipoles
        .elements()
        .iter()
        .zip(dipoles.cluster_of())
        .map(|(&d, &k)| {
            let eps = field_amplitude(occupations[k], grid.frequency(k), grid.volume(), grid.z());
            prefactor * eps * d
        })
        .collect();
    Ok(AmplitudeTable {
        amplitudes,
        cluster_of: dipoles.cluster_of().to_vec(),
        n_clusters: dipoles.n_clusters(),
        occupations,
        weighting,
    })
}

/// Amplitudes with a representative occupation per mode, the default
/// closed-form convention. Modes must correspond one-to-one with dipole
/// clusters.
pub fn excitation_amplitudes(
    dipoles: &TransitionDipoles,
    grid: &ModeGrid,
    occupations: &[f64],
) -> Result<AmplitudeTable, AbsorptionError> {
    assemble_amplitudes(
        dipoles,
        grid,
        occupations.to_vec(),
        OccupationWeighting::Representative,
    )
}

/// Unit-occupation amplitudes for the exact convention; the √N_k weights are
/// supplied by [`overlap_matrix_exact`].
pub fn unit_excitation_amplitudes(
    dipoles: &TransitionDipoles,
    grid: &ModeGrid,
) -> Result<AmplitudeTable, AbsorptionError> {
    let occupations = vec![1.0; grid.n_modes()];
    assemble_amplitudes(dipoles, grid, occupations, OccupationWeighting::Exact)
}

/// Field-overlap matrix D_{k′,k}: the Gram matrix of the one-photon-shifted
/// coefficient vectors s_k(**M**) = c(**M** + e_k). Hermitian and positive
/// semidefinite by construction; terms whose shifted index leaves the
/// truncated table are excluded.
#[derive(Debug, Clone)]
pub struct OverlapMatrix {
    matrix: DMatrix<C64>,
    weighting: OccupationWeighting,
}

impl OverlapMatrix {
    /// Entry D_{k′,k} at (row, column) = (k′, k).
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn entry(&self, k_prime: usize, k: usize) -> C64 {
        self.matrix[(k_prime, k)]
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn weighting(&self) -> OccupationWeighting {
        self.weighting
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        crate::molecule::hermiticity_deviation(&self.matrix)
    }
}

fn shifted_gram(coeffs: &CoefficientTable, weighting: OccupationWeighting) -> OverlapMatrix {
    let space = coeffs.space();
    let n_modes = space.n_modes();
    let n_states = space.len();
    // columns: s_k(M) = c(M + e_k), optionally carrying √(M_k + 1)
    let mut shifted = DMatrix::<C64>::zeros(n_states, n_modes);
    for m_index in 0..n_states {
        for k in 0..n_modes {
            if let Some(raised) = space.raised(m_index, k) {
                let mut value = coeffs.coefficient(raised);
                if weighting == OccupationWeighting::Exact {
                    let n_before = space.state(m_index).occupation(k) as f64 + 1.0;
                    value *= n_before.sqrt();
                }
                shifted[(m_index, k)] = value;
            }
        }
    }
    let mut matrix = shifted.adjoint() * shifted;
    // enforce exact Hermitian symmetry against rounding in the product
    for kp in 0..n_modes {
        for k in (kp + 1)..n_modes {
            let mean = (matrix[(kp, k)] + matrix[(k, kp)].conj()) * 0.5;
            matrix[(kp, k)] = mean;
            matrix[(k, kp)] = mean.conj();
        }
        let d = matrix[(kp, kp)];
        matrix[(kp, kp)] = C64::new(d.re, 0.0);
    }
    OverlapMatrix { matrix, weighting }
}

/// D_{k′,k} = Σ_**N** c(**N**−e_{k′}) c*(**N**−e_k) with the dummy index chosen
/// so that a mode with no photons contributes nothing.
pub fn overlap_matrix(coeffs: &CoefficientTable) -> OverlapMatrix {
    shifted_gram(coeffs, OccupationWeighting::Representative)
}

/// Same sum with the exact occupation factors √(N_k N_{k′}) folded in; the
/// diagonal becomes the truncated mean photon number per mode.
pub fn overlap_matrix_exact(coeffs: &CoefficientTable) -> OverlapMatrix {
    shifted_gram(coeffs, OccupationWeighting::Exact)
}

/// Molecular density matrix over the excited eigenstates (k,**m**), kept
/// unnormalized: the raw trace is the one-photon excitation weight of
/// first-order perturbation theory. `time` is the clock t − t₀ since the
/// pulse ended.
#[derive(Debug, Clone)]
pub struct MolecularDensityMatrix {
    matrix: DMatrix<C64>,
    time: f64,
}

impl MolecularDensityMatrix {
    pub fn from_matrix(matrix: DMatrix<C64>) -> Self {
        Self { matrix, time: 0.0 }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// Clock relative to the end of the pulse.
    pub fn time(&self) -> f64 {
        self.time
    }

    /// One-photon excitation weight Tr ρ.
    pub fn raw_trace(&self) -> f64 {
        (0..self.dimension()).map(|i| self.matrix[(i, i)].re).sum()
    }

    /// Unit-trace view ρ/Tr ρ for coherence metrics.
    pub fn normalized(&self) -> Result<DMatrix<C64>, AbsorptionError> {
        let trace = self.raw_trace();
        if trace <= 0.0 {
            return Err(AbsorptionError::ZeroTrace);
        }
        Ok(self.matrix.map(|v| v / trace))
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        crate::molecule::hermiticity_deviation(&self.matrix)
    }

    /// Real eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }
}

/// ρ_mol[(k,**m**),(k′,**m**′)] = D_{k′,k} A(k,**m**) A*(k′,**m**′): the
/// closed-form field trace for any pure field superposition.
pub fn coherent_rho_mol(
    amps: &AmplitudeTable,
    overlaps: &OverlapMatrix,
) -> Result<MolecularDensityMatrix, AbsorptionError> {
    if amps.weighting() != overlaps.weighting() {
        return Err(AbsorptionError::WeightingMismatch {
            amplitudes: amps.weighting(),
            overlaps: overlaps.weighting(),
        });
    }
    if amps.n_clusters() != overlaps.n_modes() {
        return Err(AbsorptionError::GridClusterMismatch {
            modes: overlaps.n_modes(),
            clusters: amps.n_clusters(),
        });
    }
    let dim = amps.dimension();
    let mut matrix = DMatrix::<C64>::zeros(dim, dim);
    for j in 0..dim {
        for jp in 0..dim {
            let d = overlaps.entry(amps.cluster_of()[jp], amps.cluster_of()[j]);
            matrix[(j, jp)] = d * amps.amplitude(j) * amps.amplitude(jp).conj();
        }
    }
    Ok(MolecularDensityMatrix::from_matrix(matrix))
}

/// Thermal excitation: an incoherent sum of single-number-state excitations.
/// The δ_{k,k′} collapse removes every cross-mode term, so only within-cluster
/// blocks survive, weighted by the per-mode occupation factor.
pub fn thermal_rho_mol(
    weights: &ThermalWeights,
    amps: &AmplitudeTable,
) -> Result<MolecularDensityMatrix, AbsorptionError> {
    if weights.space().n_modes() != amps.n_clusters() {
        return Err(AbsorptionError::GridClusterMismatch {
            modes: weights.space().n_modes(),
            clusters: amps.n_clusters(),
        });
    }
    let mode_weights = match amps.weighting() {
        // Σ_N p_N N_k with unit amplitudes: the exact per-state factors
        OccupationWeighting::Exact => weights.truncated_mean_occupations(),
        // Σ_N p_N [N_k ≥ 1] with representative amplitudes
        OccupationWeighting::Representative => weights.occupied_probabilities(),
    };
    let dim = amps.dimension();
    let mut matrix = DMatrix::<C64>::zeros(dim, dim);
    for j in 0..dim {
        for jp in 0..dim {
            let (k, kp) = (amps.cluster_of()[j], amps.cluster_of()[jp]);
            if k != kp {
                continue;
            }
            matrix[(j, jp)] = mode_weights[k] * amps.amplitude(j) * amps.amplitude(jp).conj();
        }
    }
    Ok(MolecularDensityMatrix::from_matrix(matrix))
}

/// Free evolution: each element picks up e^{−i(E_k − E_{k′})Δt} with the
/// cluster energies, so diagonals and degenerate blocks are untouched.
pub fn evolve_rho(
    rho: &MolecularDensityMatrix,
    eig: &EigenSystem,
    dt: f64,
) -> Result<MolecularDensityMatrix, AbsorptionError> {
    if rho.dimension() != eig.dimension() {
        return Err(AbsorptionError::DimensionMismatch {
            rho: rho.dimension(),
            other: eig.dimension(),
        });
    }
    if dt < 0.0 {
        return Err(AbsorptionError::NegativeInterval(dt));
    }
    let energies = eig.cluster_energies();
    let cluster_of = eig.cluster_of();
    let dim = rho.dimension();
    let mut matrix = rho.matrix().clone();
    for j in 0..dim {
        for jp in 0..dim {
            let (k, kp) = (cluster_of[j], cluster_of[jp]);
            if k == kp {
                continue;
            }
            let phase = C64::from_polar(1.0, -(energies[k] - energies[kp]) * dt);
            matrix[(j, jp)] *= phase;
        }
    }
    Ok(MolecularDensityMatrix {
        matrix,
        time: rho.time() + dt,
    })
}
