//! Radiation-field states on a discrete mode grid.
//!
//! Everything here works in a photon-number basis truncated at `n_cut`
//! quanta per mode. Natural units throughout: ħ = k_B = ε₀ = c = 1, so
//! energies, angular frequencies and temperatures share one unit.

use num_complex::Complex64 as C64;
use thiserror::Error;

/// Default ceiling on the number of enumerated number states, (n_cut+1)^N_max.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("a mode grid needs at least one mode")]
    NoModes,
    #[error(
        "mode frequencies must be positive and strictly increasing (mode {index} has {value})"
    )]
    BadFrequency { index: usize, value: f64 },
    #[error("cavity volume must be positive, got {0}")]
    BadVolume(f64),
    #[error("enumerating {required} number states exceeds the cap of {cap}; lower n_cut or the mode count")]
    EnumerationTooLarge { required: u128, cap: usize },
    #[error("expected one value per mode ({expected}), got {got}")]
    ModeCountMismatch { expected: usize, got: usize },
    #[error("coefficient norm {norm} exceeds 1")]
    NormExceedsUnity { norm: f64 },
    #[error("occupation {occupation} in mode {mode} exceeds the truncation n_cut = {n_cut}")]
    OccupationAboveCut {
        mode: usize,
        occupation: u32,
        n_cut: u32,
    },
    #[error("temperature must be non-negative, got {0}")]
    NegativeTemperature(f64),
}

/// The radiation modes k = 1..N_max: frequencies plus the shared cavity
/// geometry entering the field amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    frequencies: Vec<f64>,
    volume: f64,
    z: f64,
    polarization: String,
}

impl ModeGrid {
    /// Frequencies must be positive and strictly increasing.
    pub fn new(
        frequencies: Vec<f64>,
        volume: f64,
        z: f64,
        polarization: impl Into<String>,
    ) -> Result<Self, FieldError> {
        if frequencies.is_empty() {
            return Err(FieldError::NoModes);
        }
        let mut prev = 0.0;
        for (index, &value) in frequencies.iter().enumerate() {
            if !value.is_finite() || value <= prev {
                return Err(FieldError::BadFrequency { index, value });
            }
            prev = value;
        }
        if !volume.is_finite() || volume <= 0.0 {
            return Err(FieldError::BadVolume(volume));
        }
        Ok(Self {
            frequencies,
            volume,
            z,
            polarization: polarization.into(),
        })
    }

    pub fn n_modes(&self) -> usize {
        self.frequencies.len()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn frequency(&self, mode: usize) -> f64 {
        self.frequencies[mode]
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// Polarization label ε̂. Dipole couplings are already projected onto it,
    /// so this is bookkeeping only.
    pub fn polarization(&self) -> &str {
        &self.polarization
    }
}

/// Occupation multi-index **N** = (N_1, ..., N_max).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NumberState(Vec<u32>);

impl NumberState {
    pub fn new(occupations: Vec<u32>) -> Self {
        Self(occupations)
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    pub fn occupation(&self, mode: usize) -> u32 {
        self.0[mode]
    }

    pub fn n_modes(&self) -> usize {
        self.0.len()
    }

    /// Total photon number Σ_k N_k.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl std::fmt::Display for NumberState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

/// The truncated number-state basis: all (n_cut+1)^N_max occupation vectors
/// in lexicographic order, with mixed-radix index arithmetic for shifted
/// lookups.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberStateSpace {
    n_modes: usize,
    n_cut: u32,
    strides: Vec<usize>,
    states: Vec<NumberState>,
}

impl NumberStateSpace {
    fn build(n_modes: usize, n_cut: u32, cap: usize) -> Result<Self, FieldError> {
        let base = n_cut as u128 + 1;
        let mut required: u128 = 1;
        for _ in 0..n_modes {
            required = required.saturating_mul(base);
        }
        if required > cap as u128 {
            return Err(FieldError::EnumerationTooLarge { required, cap });
        }
        let len = required as usize;
        // last mode varies fastest
        let mut strides = vec![1usize; n_modes];
        for k in (0..n_modes.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * (n_cut as usize + 1);
        }
        let mut states = Vec::with_capacity(len);
        let mut current = vec![0u32; n_modes];
        loop {
            states.push(NumberState::new(current.clone()));
            let mut mode = n_modes;
            loop {
                if mode == 0 {
                    return Ok(Self {
                        n_modes,
                        n_cut,
                        strides,
                        states,
                    });
                }
                mode -= 1;
                if current[mode] < n_cut {
                    current[mode] += 1;
                    break;
                }
                current[mode] = 0;
            }
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_cut(&self) -> u32 {
        self.n_cut
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[NumberState] {
        &self.states
    }

    pub fn state(&self, index: usize) -> &NumberState {
        &self.states[index]
    }

    /// Position of `state` in lexicographic order, if within the truncation.
    pub fn index_of(&self, state: &NumberState) -> Option<usize> {
        if state.n_modes() != self.n_modes {
            return None;
        }
        let mut index = 0usize;
        for (k, &n) in state.occupations().iter().enumerate() {
            if n > self.n_cut {
                return None;
            }
            index += n as usize * self.strides[k];
        }
        Some(index)
    }

    /// Index of **N** − e_mode, or None when the mode is unoccupied.
    pub fn lowered(&self, index: usize, mode: usize) -> Option<usize> {
        if self.states[index].occupation(mode) == 0 {
            None
        } else {
            Some(index - self.strides[mode])
        }
    }

    /// Index of **N** + e_mode, or None when that would exceed n_cut.
    pub fn raised(&self, index: usize, mode: usize) -> Option<usize> {
        if self.states[index].occupation(mode) >= self.n_cut {
            None
        } else {
            Some(index + self.strides[mode])
        }
    }
}

/// All occupation vectors for `grid` with at most `n_cut` photons per mode,
/// in lexicographic order. Rejects enumerations larger than `cap`.
pub fn enumerate_number_states(
    grid: &ModeGrid,
    n_cut: u32,
    cap: usize,
) -> Result<NumberStateSpace, FieldError> {
    NumberStateSpace::build(grid.n_modes(), n_cut, cap)
}

/// Superposition coefficients c(**N**) over a truncated number-state space.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    space: NumberStateSpace,
    coefficients: Vec<C64>,
    delta_trunc: f64,
}

impl CoefficientTable {
    /// Wraps explicit coefficients; Σ|c|² may not exceed 1.
    pub fn from_coefficients(
        space: NumberStateSpace,
        coefficients: Vec<C64>,
    ) -> Result<Self, FieldError> {
        assert_eq!(space.len(), coefficients.len(), "one coefficient per state");
        let norm: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
        if norm > 1.0 + 1e-12 {
            return Err(FieldError::NormExceedsUnity { norm });
        }
        Ok(Self {
            space,
            coefficients,
            delta_trunc: 1.0 - norm,
        })
    }

    /// The pure number state |**N**⟩: c = 1 there, 0 elsewhere.
    pub fn number_state(space: NumberStateSpace, state: &NumberState) -> Result<Self, FieldError> {
        if state.n_modes() != space.n_modes() {
            return Err(FieldError::ModeCountMismatch {
                expected: space.n_modes(),
                got: state.n_modes(),
            });
        }
        for (mode, &occupation) in state.occupations().iter().enumerate() {
            if occupation > space.n_cut() {
                return Err(FieldError::OccupationAboveCut {
                    mode,
                    occupation,
                    n_cut: space.n_cut(),
                });
            }
        }
        let index = space.index_of(state).expect("state checked against cut");
        let mut coefficients = vec![C64::new(0.0, 0.0); space.len()];
        coefficients[index] = C64::new(1.0, 0.0);
        Ok(Self {
            space,
            coefficients,
            delta_trunc: 0.0,
        })
    }

    pub fn space(&self) -> &NumberStateSpace {
        &self.space
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn coefficient(&self, index: usize) -> C64 {
        self.coefficients[index]
    }

    /// Weight lost to the truncation: 1 − Σ|c|².
    pub fn delta_trunc(&self) -> f64 {
        self.delta_trunc
    }

    pub fn norm_sqr(&self) -> f64 {
        1.0 - self.delta_trunc
    }

    /// Per-mode mean occupation Σ_**N** |c(**N**)|² N_k over the truncated table.
    pub fn mean_occupations(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.space.n_modes()];
        for (index, c) in self.coefficients.iter().enumerate() {
            let w = c.norm_sqr();
            if w == 0.0 {
                continue;
            }
            for (k, &n) in self.space.state(index).occupations().iter().enumerate() {
                means[k] += w * n as f64;
            }
        }
        means
    }
}

// Factorials stay in f64 up to 20!, log-space above that.
const DIRECT_FACTORIAL_MAX: u32 = 20;

fn factorial(n: u32) -> f64 {
    (2..=n).map(|k| k as f64).product()
}

fn ln_factorial_table(n_cut: u32) -> Vec<f64> {
    let mut table = Vec::with_capacity(n_cut as usize + 1);
    let mut acc = 0.0f64;
    table.push(0.0);
    for n in 1..=n_cut {
        acc += (n as f64).ln();
        table.push(acc);
    }
    table
}

/// Single-mode coherent amplitude e^{−|α|²/2} α^N / √(N!).
fn coherent_component(alpha: C64, n: u32, ln_fact: &[f64]) -> C64 {
    let mag_sqr = alpha.norm_sqr();
    if mag_sqr == 0.0 {
        return if n == 0 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        };
    }
    if n <= DIRECT_FACTORIAL_MAX {
        alpha.powu(n) * ((-mag_sqr / 2.0).exp() / factorial(n).sqrt())
    } else {
        let ln_mag = -mag_sqr / 2.0 + n as f64 * alpha.norm().ln() - 0.5 * ln_fact[n as usize];
        C64::from_polar(ln_mag.exp(), n as f64 * alpha.arg())
    }
}

/// Product-coherent-state coefficients c(**N**) = Π_k e^{−|α_k|²/2} α_k^{N_k} / √(N_k!),
/// truncated at `n_cut` photons per mode. One α per grid mode.
pub fn coherent_coefficients(
    grid: &ModeGrid,
    alphas: &[C64],
    n_cut: u32,
    cap: usize,
) -> Result<CoefficientTable, FieldError> {
    if alphas.len() != grid.n_modes() {
        return Err(FieldError::ModeCountMismatch {
            expected: grid.n_modes(),
            got: alphas.len(),
        });
    }
    let space = enumerate_number_states(grid, n_cut, cap)?;
    let ln_fact = ln_factorial_table(n_cut);
    // per-mode component tables, then products over the enumeration
    let per_mode: Vec<Vec<C64>> = alphas
        .iter()
        .map(|&alpha| {
            (0..=n_cut)
                .map(|n| coherent_component(alpha, n, &ln_fact))
                .collect()
        })
        .collect();
    let coefficients: Vec<C64> = space
        .states()
        .iter()
        .map(|state| {
            state
                .occupations()
                .iter()
                .enumerate()
                .map(|(k, &n)| per_mode[k][n as usize])
                .product()
        })
        .collect();
    let norm: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
    Ok(CoefficientTable {
        space,
        coefficients,
        delta_trunc: 1.0 - norm,
    })
}

/// Planck mean occupation N̄ = 1/(e^{ω/T} − 1); zero at T = 0.
pub fn thermal_mean_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (omega / temperature).exp_m1()
}

/// Number-state probabilities of a blackbody field at temperature T.
#[derive(Debug, Clone)]
pub struct ThermalWeights {
    space: NumberStateSpace,
    probabilities: Vec<f64>,
    temperature: f64,
    mean_occupations: Vec<f64>,
    deficit: f64,
}

impl ThermalWeights {
    pub fn space(&self) -> &NumberStateSpace {
        &self.space
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.probabilities[index]
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Planck means N̄_k, untruncated.
    pub fn mean_occupations(&self) -> &[f64] {
        &self.mean_occupations
    }

    /// Weight lost to the truncation: 1 − Σ p.
    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    /// Σ_**N** p_**N** N_k over the truncated table.
    pub fn truncated_mean_occupations(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.space.n_modes()];
        for (index, &p) in self.probabilities.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (k, &n) in self.space.state(index).occupations().iter().enumerate() {
                means[k] += p * n as f64;
            }
        }
        means
    }

    /// Σ_**N** p_**N** [N_k ≥ 1]: the probability that mode k holds a photon.
    pub fn occupied_probabilities(&self) -> Vec<f64> {
        let mut probs = vec![0.0; self.space.n_modes()];
        for (index, &p) in self.probabilities.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (k, &n) in self.space.state(index).occupations().iter().enumerate() {
                if n >= 1 {
                    probs[k] += p;
                }
            }
        }
        probs
    }
}

/// Thermal number-state weights p_**N** = Π_k N̄_k^{N_k} / (1+N̄_k)^{1+N_k},
/// truncated at `n_cut` photons per mode.
pub fn thermal_weights(
    grid: &ModeGrid,
    temperature: f64,
    n_cut: u32,
    cap: usize,
) -> Result<ThermalWeights, FieldError> {
    if temperature < 0.0 {
        return Err(FieldError::NegativeTemperature(temperature));
    }
    let space = enumerate_number_states(grid, n_cut, cap)?;
    let mean_occupations: Vec<f64> = grid
        .frequencies()
        .iter()
        .map(|&omega| thermal_mean_occupation(omega, temperature))
        .collect();
    let per_mode: Vec<Vec<f64>> = mean_occupations
        .iter()
        .map(|&nbar| {
            (0..=n_cut)
                .map(|n| {
                    if nbar == 0.0 {
                        if n == 0 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        nbar.powi(n as i32) / (1.0 + nbar).powi(n as i32 + 1)
                    }
                })
                .collect()
        })
        .collect();
    let probabilities: Vec<f64> = space
        .states()
        .iter()
        .map(|state| {
            state
                .occupations()
                .iter()
                .enumerate()
                .map(|(k, &n)| per_mode[k][n as usize])
                .product()
        })
        .collect();
    let total: f64 = probabilities.iter().sum();
    Ok(ThermalWeights {
        space,
        probabilities,
        temperature,
        mean_occupations,
        deficit: 1.0 - total,
    })
}

/// Field amplitude ε(N_k, ω_k) = i √(ω_k N_k / V) e^{iω_k z} of a mode holding
/// N_k photons. Fractional N_k is allowed so mean occupations can stand in for
/// a sharp photon number.
pub fn field_amplitude(n_photons: f64, omega: f64, volume: f64, z: f64) -> C64 {
    debug_assert!(n_photons >= 0.0 && omega > 0.0 && volume > 0.0);
    let magnitude = (omega * n_photons / volume).sqrt();
    C64::new(0.0, magnitude) * C64::from_polar(1.0, omega * z)
}
