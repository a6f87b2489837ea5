//! Molecular models: ground state, excited-manifold Hamiltonian, dipole
//! couplings, and the eigenbasis the absorption step works in.
//!
//! Eigenstates are grouped into degeneracy clusters; cluster k pairs with
//! radiation mode k of the resonant grid, so a photon of frequency ω_k lands
//! the molecule at exactly E_i + ω_k.

use crate::field::{FieldError, ModeGrid};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use thiserror::Error;

/// Default tolerance for grouping numerically degenerate eigenvalues.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

const HERMITICITY_TOL: f64 = 1e-12;
const EIGEN_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum MoleculeError {
    #[error("excited-manifold Hamiltonian must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("need one label and one dipole per basis state ({dim}), got {labels} labels and {dipoles} dipoles")]
    BasisMismatch {
        dim: usize,
        labels: usize,
        dipoles: usize,
    },
    #[error("Hamiltonian is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("at least one dipole element must be nonzero")]
    NoDipole,
    #[error("bright-state dipole must be nonzero")]
    ZeroBrightDipole,
    #[error("coupling v = 0 with {n_dark} dark states cannot produce mixed eigenstates")]
    UnmixedEigenstates { n_dark: usize },
    #[error("eigendecomposition failed validation: {what} error {error:e} exceeds {tolerance:e}")]
    EigenValidation {
        what: &'static str,
        error: f64,
        tolerance: f64,
    },
    #[error("cluster {cluster} at energy {energy} is not above the ground energy {ground}")]
    ClusterBelowGround {
        cluster: usize,
        energy: f64,
        ground: f64,
    },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Basis-state label: electronic tag (e.g. S2/S1) plus a vibrational index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    pub electronic: String,
    pub vibrational: usize,
}

impl BasisLabel {
    pub fn new(electronic: impl Into<String>, vibrational: usize) -> Self {
        Self {
            electronic: electronic.into(),
            vibrational,
        }
    }
}

impl std::fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.electronic, self.vibrational)
    }
}

/// Ground state plus the excited manifold: Hamiltonian over a labeled basis
/// and the ground→basis dipole couplings projected onto ε̂.
#[derive(Debug, Clone)]
pub struct MolecularModel {
    ground_energy: f64,
    hamiltonian: DMatrix<C64>,
    labels: Vec<BasisLabel>,
    dipoles: Vec<C64>,
}

impl MolecularModel {
    pub fn new(
        ground_energy: f64,
        hamiltonian: DMatrix<C64>,
        labels: Vec<BasisLabel>,
        dipoles: Vec<C64>,
    ) -> Result<Self, MoleculeError> {
        let (rows, cols) = hamiltonian.shape();
        if rows != cols {
            return Err(MoleculeError::NotSquare { rows, cols });
        }
        if labels.len() != rows || dipoles.len() != rows {
            return Err(MoleculeError::BasisMismatch {
                dim: rows,
                labels: labels.len(),
                dipoles: dipoles.len(),
            });
        }
        let deviation = hermiticity_deviation(&hamiltonian);
        if deviation > HERMITICITY_TOL {
            return Err(MoleculeError::NotHermitian { deviation });
        }
        if dipoles.iter().all(|d| d.norm_sqr() == 0.0) {
            return Err(MoleculeError::NoDipole);
        }
        Ok(Self {
            ground_energy,
            hamiltonian,
            labels,
            dipoles,
        })
    }

    pub fn ground_energy(&self) -> f64 {
        self.ground_energy
    }

    pub fn hamiltonian(&self) -> &DMatrix<C64> {
        &self.hamiltonian
    }

    pub fn dimension(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn dipoles(&self) -> &[C64] {
        &self.dipoles
    }
}

pub(crate) fn hermiticity_deviation(m: &DMatrix<C64>) -> f64 {
    let mut max = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            max = max.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    max
}

/// One bright state (tag S2) at Δ above the ground energy, carrying the whole
/// transition dipole, plus `n_dark` dark states (tag S1) spread evenly over
/// Δ ± dark_spread, each coupled to the bright state with strength `v`.
///
/// `require_mixing` rejects v = 0 when dark states are present, for callers
/// that need every eigenstate to carry both electronic tags.
pub fn build_bright_dark_model(
    delta: f64,
    coupling: f64,
    n_dark: usize,
    dark_spread: f64,
    bright_dipole: f64,
    require_mixing: bool,
) -> Result<MolecularModel, MoleculeError> {
    if bright_dipole == 0.0 {
        return Err(MoleculeError::ZeroBrightDipole);
    }
    if require_mixing && coupling == 0.0 && n_dark > 0 {
        return Err(MoleculeError::UnmixedEigenstates { n_dark });
    }
    let dim = 1 + n_dark;
    let mut hamiltonian = DMatrix::zeros(dim, dim);
    hamiltonian[(0, 0)] = C64::new(delta, 0.0);
    let mut labels = vec![BasisLabel::new("S2", 0)];
    for i in 0..n_dark {
        let offset = if n_dark == 1 {
            0.0
        } else {
            -dark_spread + 2.0 * dark_spread * i as f64 / (n_dark - 1) as f64
        };
        hamiltonian[(1 + i, 1 + i)] = C64::new(delta + offset, 0.0);
        hamiltonian[(0, 1 + i)] = C64::new(coupling, 0.0);
        hamiltonian[(1 + i, 0)] = C64::new(coupling, 0.0);
        labels.push(BasisLabel::new("S1", i));
    }
    let mut dipoles = vec![C64::new(0.0, 0.0); dim];
    dipoles[0] = C64::new(bright_dipole, 0.0);
    MolecularModel::new(0.0, hamiltonian, labels, dipoles)
}

/// A group of eigenstates within the degeneracy tolerance of each other.
/// `members` are flattened eigenstate indices, always contiguous.
#[derive(Debug, Clone)]
pub struct Cluster {
    pub energy: f64,
    pub members: Vec<usize>,
}

/// Diagonalized excited manifold: ascending eigenvalues, unitary eigenvector
/// columns, and the degeneracy clustering (k, **m**) used everywhere downstream.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<C64>,
    clusters: Vec<Cluster>,
    cluster_of: Vec<usize>,
    degeneracy_tol: f64,
}

impl EigenSystem {
    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvectors as columns, aligned with `eigenvalues`.
    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn n_clusters(&self) -> usize {
        self.clusters.len()
    }

    /// Cluster index of each flattened eigenstate.
    pub fn cluster_of(&self) -> &[usize] {
        &self.cluster_of
    }

    /// Representative energy per cluster (mean over members).
    pub fn cluster_energies(&self) -> Vec<f64> {
        self.clusters.iter().map(|c| c.energy).collect()
    }

    pub fn degeneracy_tol(&self) -> f64 {
        self.degeneracy_tol
    }
}

/// Diagonalizes the excited manifold and groups eigenvalues into clusters by
/// transitive closeness within `degeneracy_tol`. Within a cluster, states are
/// ordered by descending weight on the dipole direction, ties by the dominant
/// basis component.
pub fn eigensystem(
    model: &MolecularModel,
    degeneracy_tol: f64,
) -> Result<EigenSystem, MoleculeError> {
    let h = model.hamiltonian();
    let deviation = hermiticity_deviation(h);
    if deviation > HERMITICITY_TOL {
        return Err(MoleculeError::NotHermitian { deviation });
    }
    let dim = h.nrows();
    let decomposition = h.clone().symmetric_eigen();

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        decomposition.eigenvalues[a]
            .partial_cmp(&decomposition.eigenvalues[b])
            .expect("finite eigenvalues")
    });
    let mut eigenvalues: Vec<f64> = order
        .iter()
        .map(|&j| decomposition.eigenvalues[j])
        .collect();
    let mut eigenvectors = DMatrix::zeros(dim, dim);
    for (col, &j) in order.iter().enumerate() {
        eigenvectors.set_column(col, &decomposition.eigenvectors.column(j));
    }

    // gauge: make the dominant component of each column real and positive
    for mut column in eigenvectors.column_iter_mut() {
        let mut pivot = 0usize;
        let mut best = -1.0f64;
        for (i, value) in column.iter().enumerate() {
            let mag = value.norm_sqr();
            if mag > best + 1e-15 {
                best = mag;
                pivot = i;
            }
        }
        let phase = column[pivot];
        if phase.norm() > 0.0 {
            let rotation = phase.conj() / phase.norm();
            for value in column.iter_mut() {
                *value *= rotation;
            }
        }
    }

    // clusters by transitive closeness
    let mut boundaries = vec![0usize];
    for j in 1..dim {
        if eigenvalues[j] - eigenvalues[j - 1] > degeneracy_tol {
            boundaries.push(j);
        }
    }
    boundaries.push(dim);

    // within-cluster order: descending dipole-direction weight, ties by the
    // index of the dominant basis component
    let weight = |col: usize| -> f64 {
        let mut overlap = C64::new(0.0, 0.0);
        for (b, &d) in model.dipoles().iter().enumerate() {
            overlap += eigenvectors[(b, col)].conj() * d;
        }
        overlap.norm_sqr()
    };
    let dominant = |col: usize| -> usize {
        let mut pivot = 0usize;
        let mut best = -1.0f64;
        for b in 0..dim {
            let mag = eigenvectors[(b, col)].norm_sqr();
            if mag > best + 1e-15 {
                best = mag;
                pivot = b;
            }
        }
        pivot
    };
    let mut permutation: Vec<usize> = (0..dim).collect();
    for window in boundaries.windows(2) {
        let (start, end) = (window[0], window[1]);
        if end - start > 1 {
            permutation[start..end].sort_by(|&a, &b| {
                weight(b)
                    .partial_cmp(&weight(a))
                    .unwrap()
                    .then(dominant(a).cmp(&dominant(b)))
            });
        }
    }
    let eigenvalues_sorted: Vec<f64> = permutation.iter().map(|&j| eigenvalues[j]).collect();
    let mut vectors_sorted = DMatrix::zeros(dim, dim);
    for (col, &j) in permutation.iter().enumerate() {
        vectors_sorted.set_column(col, &eigenvectors.column(j));
    }
    eigenvalues = eigenvalues_sorted;
    eigenvectors = vectors_sorted;

    let mut clusters = Vec::with_capacity(boundaries.len() - 1);
    let mut cluster_of = vec![0usize; dim];
    for window in boundaries.windows(2) {
        let (start, end) = (window[0], window[1]);
        let members: Vec<usize> = (start..end).collect();
        let energy = members.iter().map(|&j| eigenvalues[j]).sum::<f64>() / members.len() as f64;
        for &j in &members {
            cluster_of[j] = clusters.len();
        }
        clusters.push(Cluster { energy, members });
    }

    let system = EigenSystem {
        eigenvalues,
        eigenvectors,
        clusters,
        cluster_of,
        degeneracy_tol,
    };

    // unitarity and reconstruction checks
    let identity = DMatrix::<C64>::identity(dim, dim);
    let unitarity = (system.eigenvectors.adjoint() * &system.eigenvectors - &identity).norm();
    if unitarity > EIGEN_TOL {
        return Err(MoleculeError::EigenValidation {
            what: "unitarity",
            error: unitarity,
            tolerance: EIGEN_TOL,
        });
    }
    let diagonal = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        dim,
        system.eigenvalues.iter().map(|&e| C64::new(e, 0.0)),
    ));
    let reconstruction =
        (&system.eigenvectors * diagonal * system.eigenvectors.adjoint() - h).norm();
    if reconstruction > EIGEN_TOL {
        return Err(MoleculeError::EigenValidation {
            what: "reconstruction",
            error: reconstruction,
            tolerance: EIGEN_TOL,
        });
    }
    Ok(system)
}

/// Transition dipole ⟨E_k,**m**| ε̂·**d** |E_i⟩ per eigenstate, with the
/// cluster map needed to pair eigenstates with their resonant mode.
#[derive(Debug, Clone)]
pub struct TransitionDipoles {
    elements: Vec<C64>,
    cluster_of: Vec<usize>,
    n_clusters: usize,
}

impl TransitionDipoles {
    pub fn elements(&self) -> &[C64] {
        &self.elements
    }

    pub fn element(&self, eigenstate: usize) -> C64 {
        self.elements[eigenstate]
    }

    pub fn cluster_of(&self) -> &[usize] {
        &self.cluster_of
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn dimension(&self) -> usize {
        self.elements.len()
    }

    /// Σ over eigenstates of |element|²; equals Σ_b |d_b|² by unitarity.
    pub fn norm_sqr(&self) -> f64 {
        self.elements.iter().map(|e| e.norm_sqr()).sum()
    }
}

/// Rotates the basis dipoles into the eigenbasis:
/// element(k,**m**) = Σ_b conj(U[b,(k,**m**)]) d_b.
pub fn transition_dipoles(eig: &EigenSystem, model: &MolecularModel) -> TransitionDipoles {
    let dim = eig.dimension();
    assert_eq!(dim, model.dimension(), "eigensystem and model must agree");
    let mut elements = Vec::with_capacity(dim);
    for col in 0..dim {
        let mut element = C64::new(0.0, 0.0);
        for (b, &d) in model.dipoles().iter().enumerate() {
            element += eig.eigenvectors()[(b, col)].conj() * d;
        }
        elements.push(element);
    }
    TransitionDipoles {
        elements,
        cluster_of: eig.cluster_of().to_vec(),
        n_clusters: eig.n_clusters(),
    }
}

/// One radiation mode per degeneracy cluster at ω_k = E_k − E_i, so a photon
/// from mode k is exactly resonant with cluster k.
pub fn resonant_mode_grid(
    eig: &EigenSystem,
    ground_energy: f64,
    volume: f64,
    z: f64,
) -> Result<ModeGrid, MoleculeError> {
    let mut frequencies = Vec::with_capacity(eig.n_clusters());
    for (cluster, c) in eig.clusters().iter().enumerate() {
        let omega = c.energy - ground_energy;
        if omega <= 0.0 {
            return Err(MoleculeError::ClusterBelowGround {
                cluster,
                energy: c.energy,
                ground: ground_energy,
            });
        }
        frequencies.push(omega);
    }
    Ok(ModeGrid::new(frequencies, volume, z, "x")?)
}

/// Projector onto the basis states carrying `electronic` tag, expressed in
/// the eigenbasis: U† P U.
pub fn tag_projector(eig: &EigenSystem, model: &MolecularModel, electronic: &str) -> DMatrix<C64> {
    let dim = model.dimension();
    let mut p_basis = DMatrix::<C64>::zeros(dim, dim);
    for (b, label) in model.labels().iter().enumerate() {
        if label.electronic == electronic {
            p_basis[(b, b)] = C64::new(1.0, 0.0);
        }
    }
    eig.eigenvectors().adjoint() * p_basis * eig.eigenvectors()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bright_only_model_is_one_by_one() {
        let model = build_bright_dark_model(2.0, 0.0, 0, 0.0, 1.0, false).unwrap();
        assert_eq!(model.dimension(), 1);
        let eig = eigensystem(&model, DEFAULT_DEGENERACY_TOL).unwrap();
        assert_relative_eq!(eig.eigenvalues()[0], 2.0);
        assert_eq!(eig.n_clusters(), 1);
    }

    #[test]
    fn two_by_two_splitting_formula() {
        // bright and one resonant dark state: eigenvalues Δ ± v
        let (delta, v) = (1.0, 0.1);
        let model = build_bright_dark_model(delta, v, 1, 0.0, 1.0, false).unwrap();
        let eig = eigensystem(&model, DEFAULT_DEGENERACY_TOL).unwrap();
        assert_relative_eq!(eig.eigenvalues()[0], delta - v, epsilon = 1e-12);
        assert_relative_eq!(eig.eigenvalues()[1], delta + v, epsilon = 1e-12);
        // detuned dark state: splitting √(δ² + 4v²). n_dark = 1 centers the
        // dark state regardless of spread, so build the detuned case directly.
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.1, 0.0),
                C64::new(0.1, 0.0),
                C64::new(1.3, 0.0),
            ],
        );
        let model = MolecularModel::new(
            0.0,
            h,
            vec![BasisLabel::new("S2", 0), BasisLabel::new("S1", 0)],
            vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        )
        .unwrap();
        let eig = eigensystem(&model, DEFAULT_DEGENERACY_TOL).unwrap();
        let gap = eig.eigenvalues()[1] - eig.eigenvalues()[0];
        let expected = (0.3f64 * 0.3 + 4.0 * 0.1 * 0.1).sqrt();
        assert_relative_eq!(gap, expected, epsilon = 1e-12);
    }

    #[test]
    fn mixing_puts_weight_on_both_tags() {
        let model = build_bright_dark_model(1.0, 0.1, 3, 0.2, 1.0, true).unwrap();
        let eig = eigensystem(&model, DEFAULT_DEGENERACY_TOL).unwrap();
        for col in 0..eig.dimension() {
            let bright: f64 = eig.eigenvectors()[(0, col)].norm_sqr();
            let dark: f64 = (1..eig.dimension())
                .map(|b| eig.eigenvectors()[(b, col)].norm_sqr())
                .sum();
            assert!(bright > 1e-6, "eigenstate {col} has no S2 weight");
            assert!(dark > 1e-6, "eigenstate {col} has no S1 weight");
        }
    }

    #[test]
    fn require_mixing_rejects_uncoupled_darks() {
        assert!(matches!(
            build_bright_dark_model(1.0, 0.0, 2, 0.1, 1.0, true),
            Err(MoleculeError::UnmixedEigenstates { n_dark: 2 })
        ));
        assert!(build_bright_dark_model(1.0, 0.0, 2, 0.1, 1.0, false).is_ok());
    }

    #[test]
    fn diagonal_hamiltonian_passes_through() {
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(2.0, 0.0),
            C64::new(3.0, 0.0),
        ]));
        let model = MolecularModel::new(
            0.0,
            h,
            vec![
                BasisLabel::new("S2", 0),
                BasisLabel::new("S1", 0),
                BasisLabel::new("S1", 1),
            ],
            vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
        )
        .unwrap();
        let eig = eigensystem(&model, DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(eig.eigenvalues(), &[1.0, 2.0, 3.0]);
        let identity = DMatrix::<C64>::identity(3, 3);
        assert!((eig.eigenvectors() - identity).norm() < 1e-12);
    }

    #[test]
    fn random_hermitian_reconstructs() {
        // fixed pseudo-random Hermitian 6x6, checked by multiplying back
        let dim = 6;
        let mut h = DMatrix::<C64>::zeros(dim, dim);
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for i in 0..dim {
            for j in i..dim {
                if i == j {
                    h[(i, i)] = C64::new(next() * 4.0, 0.0);
                } else {
                    let value = C64::new(next(), next());
                    h[(i, j)] = value;
                    h[(j, i)] = value.conj();
                }
            }
        }
        let labels = (0..dim).map(|i| BasisLabel::new("S1", i)).collect();
        let mut dipoles = vec![C64::new(0.0, 0.0); dim];
        dipoles[0] = C64::new(1.0, 0.0);
        let model = MolecularModel::new(0.0, h.clone(), labels, dipoles).unwrap();
        let eig = eigensystem(&model, DEFAULT_DEGENERACY_TOL).unwrap();
        let diagonal = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            dim,
            eig.eigenvalues().iter().map(|&e| C64::new(e, 0.0)),
        ));
        let reconstruction = eig.eigenvectors() * diagonal * eig.eigenvectors().adjoint();
        assert!((reconstruction - h).norm() < 1e-10);
        for pair in eig.eigenvalues().windows(2) {
            assert!(pair[0] <= pair[1]);
        }
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.5, 0.0),
                C64::new(0.2, 0.0),
                C64::new(2.0, 0.0),
            ],
        );
        let err = MolecularModel::new(
            0.0,
            h,
            vec![BasisLabel::new("S2", 0), BasisLabel::new("S1", 0)],
            vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        )
        .unwrap_err();
        assert!(matches!(err, MoleculeError::NotHermitian { .. }));
    }

    #[test]
    fn dipoles_rotate_with_identity_eigenvectors() {
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(2.0, 0.0),
        ]));
        let dipoles = vec![C64::new(0.7, 0.0), C64::new(-0.3, 0.2)];
        let model = MolecularModel::new(
            0.0,
            h,
            vec![BasisLabel::new("S2", 0), BasisLabel::new("S1", 0)],
            dipoles.clone(),
        )
        .unwrap();
        let eig = eigensystem(&model, DEFAULT_DEGENERACY_TOL).unwrap();
        let td = transition_dipoles(&eig, &model);
        for (got, expected) in td.elements().iter().zip(&dipoles) {
            assert_relative_eq!(got.re, expected.re, epsilon = 1e-12);
            assert_relative_eq!(got.im, expected.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn uncoupled_model_keeps_dipole_on_bright_eigenstate() {
        let model = build_bright_dark_model(1.0, 0.0, 2, 0.4, 0.8, false).unwrap();
        let eig = eigensystem(&model, DEFAULT_DEGENERACY_TOL).unwrap();
        let td = transition_dipoles(&eig, &model);
        let nonzero: Vec<usize> = (0..td.dimension())
            .filter(|&j| td.element(j).norm() > 1e-12)
            .collect();
        assert_eq!(nonzero.len(), 1);
        assert_relative_eq!(td.element(nonzero[0]).norm(), 0.8, epsilon = 1e-12);
    }

    #[test]
    fn mixed_model_conserves_dipole_norm() {
        let model = build_bright_dark_model(1.0, 0.15, 3, 0.2, 0.9, true).unwrap();
        let eig = eigensystem(&model, DEFAULT_DEGENERACY_TOL).unwrap();
        let td = transition_dipoles(&eig, &model);
        let basis_norm: f64 = model.dipoles().iter().map(|d| d.norm_sqr()).sum();
        assert_relative_eq!(td.norm_sqr(), basis_norm, epsilon = 1e-10);
        for j in 0..td.dimension() {
            assert!(td.element(j).norm() > 1e-9, "eigenstate {j} stayed dark");
        }
    }

    #[test]
    fn resonant_grid_matches_cluster_energies() {
        let model = build_bright_dark_model(1.0, 0.1, 1, 0.0, 1.0, false).unwrap();
        let eig = eigensystem(&model, DEFAULT_DEGENERACY_TOL).unwrap();
        let grid = resonant_mode_grid(&eig, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(grid.n_modes(), 2);
        assert_relative_eq!(grid.frequency(0), 0.9, epsilon = 1e-12);
        assert_relative_eq!(grid.frequency(1), 1.1, epsilon = 1e-12);

        let single = build_bright_dark_model(2.0, 0.0, 0, 0.0, 1.0, false).unwrap();
        let eig = eigensystem(&single, DEFAULT_DEGENERACY_TOL).unwrap();
        let grid = resonant_mode_grid(&eig, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(grid.n_modes(), 1);
        assert_relative_eq!(grid.frequency(0), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn exact_degeneracy_shares_one_mode() {
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
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
        assert_eq!(eig.n_clusters(), 1);
        assert_eq!(eig.clusters()[0].members.len(), 2);
        let grid = resonant_mode_grid(&eig, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(grid.n_modes(), 1);
        assert_relative_eq!(grid.frequency(0), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn clustering_partitions_every_eigenstate() {
        let model = build_bright_dark_model(1.0, 0.05, 4, 0.3, 1.0, false).unwrap();
        let eig = eigensystem(&model, DEFAULT_DEGENERACY_TOL).unwrap();
        let mut seen = vec![false; eig.dimension()];
        for cluster in eig.clusters() {
            for &member in &cluster.members {
                assert!(!seen[member], "eigenstate {member} in two clusters");
                seen[member] = true;
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn grid_rejects_clusters_below_ground() {
        let model = build_bright_dark_model(1.0, 0.1, 1, 0.0, 1.0, false).unwrap();
        let eig = eigensystem(&model, DEFAULT_DEGENERACY_TOL).unwrap();
        let err = resonant_mode_grid(&eig, 5.0, 1.0, 0.0).unwrap_err();
        assert!(matches!(err, MoleculeError::ClusterBelowGround { .. }));
    }

    #[test]
    fn tag_projectors_partition_identity() {
        let model = build_bright_dark_model(1.0, 0.1, 2, 0.3, 1.0, false).unwrap();
        let eig = eigensystem(&model, DEFAULT_DEGENERACY_TOL).unwrap();
        let p2 = tag_projector(&eig, &model, "S2");
        let p1 = tag_projector(&eig, &model, "S1");
        let identity = DMatrix::<C64>::identity(3, 3);
        assert!((p2.clone() + p1.clone() - identity).norm() < 1e-12);
        assert!((&p2 * &p2 - p2.clone()).norm() < 1e-12);
        assert!(hermiticity_deviation(&p2) < 1e-12);
    }
}
