//! Coherence and dynamics metrics: l1 coherence, purity, observable time
//! series, discrete-spectrum frequency extraction, electronic population
//! ratios, and two-level Einstein-rate population dynamics.

use crate::absorption::{evolve_rho, AbsorptionError, MolecularDensityMatrix};
use crate::molecule::{tag_projector, EigenSystem, MolecularModel};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("density matrix has zero trace; nothing was excited")]
    ZeroTrace,
    #[error("time grid must be strictly increasing")]
    NonIncreasingGrid,
    #[error("channel '{name}' has {len} samples but the grid has {grid_len}")]
    ChannelLengthMismatch {
        name: String,
        len: usize,
        grid_len: usize,
    },
    #[error("no channel named '{0}'")]
    UnknownChannel(String),
    #[error(
        "frequency extraction needs a uniform time grid (max spacing deviation {deviation:e})"
    )]
    NonUniformGrid { deviation: f64 },
    #[error("frequency extraction needs at least {needed} samples, got {got}")]
    GridTooShort { needed: usize, got: usize },
    #[error("observable is {observable}x{observable} but the density matrix is {rho}x{rho}")]
    ObservableDimensionMismatch { observable: usize, rho: usize },
    #[error("population ratio undefined: the S1 manifold carries no weight (S2 = {s2:e})")]
    RatioUndefined { s2: f64 },
    #[error("populations must be non-negative and sum to one, got ({ground}, {excited})")]
    BadPopulations { ground: f64, excited: f64 },
    #[error("rate parameters must be non-negative (N̄ = {n_bar}, Γ = {gamma})")]
    BadRates { n_bar: f64, gamma: f64 },
    #[error(transparent)]
    Absorption(#[from] AbsorptionError),
}

/// A time grid with one or more named real channels of the same length.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    times: Vec<f64>,
    channels: Vec<(String, Vec<f64>)>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, channels: Vec<(String, Vec<f64>)>) -> Result<Self, AnalysisError> {
        let increasing = |w: &[f64]| w[1].partial_cmp(&w[0]) == Some(std::cmp::Ordering::Greater);
        if times.windows(2).any(|w| !increasing(w)) {
            return Err(AnalysisError::NonIncreasingGrid);
        }
        for (name, values) in &channels {
            if values.len() != times.len() {
                return Err(AnalysisError::ChannelLengthMismatch {
                    name: name.clone(),
                    len: values.len(),
                    grid_len: times.len(),
                });
            }
        }
        Ok(Self { times, channels })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn channels(&self) -> &[(String, Vec<f64>)] {
        &self.channels
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// CSV text: header `time,<channels...>`, full-precision decimal floats.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time");
        for (name, _) in &self.channels {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, t) in self.times.iter().enumerate() {
            out.push_str(&format!("{t:?}"));
            for (_, values) in &self.channels {
                out.push_str(&format!(",{:?}", values[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// Σ_{i≠j} |ρ_ij|, on the unit-trace view when `normalized` is set.
pub fn l1_coherence(rho: &MolecularDensityMatrix, normalized: bool) -> Result<f64, AnalysisError> {
    let matrix = if normalized {
        rho.normalized().map_err(|_| AnalysisError::ZeroTrace)?
    } else {
        rho.matrix().clone()
    };
    let mut total = 0.0;
    for i in 0..matrix.nrows() {
        for j in 0..matrix.ncols() {
            if i != j {
                total += matrix[(i, j)].norm();
            }
        }
    }
    Ok(total)
}

/// Tr(ρ̂²) on the unit-trace view; 1 for pure states, 1/d for the maximally
/// mixed state over d levels.
pub fn purity(rho: &MolecularDensityMatrix) -> Result<f64, AnalysisError> {
    let normalized = rho.normalized().map_err(|_| AnalysisError::ZeroTrace)?;
    // Hermitian: Tr ρ² = Σ |ρ_ij|²
    Ok(normalized.iter().map(|v| v.norm_sqr()).sum())
}

/// Tr(ρ(t)·observable) over the grid, with ρ(t) from free evolution.
pub fn observable_timeseries(
    rho0: &MolecularDensityMatrix,
    eig: &EigenSystem,
    observable: &DMatrix<C64>,
    times: &[f64],
) -> Result<TimeSeries, AnalysisError> {
    if observable.nrows() != rho0.dimension() || observable.ncols() != rho0.dimension() {
        return Err(AnalysisError::ObservableDimensionMismatch {
            observable: observable.nrows(),
            rho: rho0.dimension(),
        });
    }
    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        let rho_t = evolve_rho(rho0, eig, t - rho0.time())?;
        values.push(expectation(&rho_t, observable));
    }
    TimeSeries::new(times.to_vec(), vec![("expectation".into(), values)])
}

pub(crate) fn expectation(rho: &MolecularDensityMatrix, observable: &DMatrix<C64>) -> f64 {
    let mut total = C64::new(0.0, 0.0);
    for i in 0..rho.dimension() {
        for j in 0..rho.dimension() {
            total += rho.matrix()[(i, j)] * observable[(j, i)];
        }
    }
    total.re
}

/// Frequency-bin width of the discrete spectrum of `series`, in cycles per
/// time unit.
pub fn frequency_bin(series: &TimeSeries) -> Result<f64, AnalysisError> {
    let n = series.len();
    if n < 4 {
        return Err(AnalysisError::GridTooShort { needed: 4, got: n });
    }
    let dt = uniform_step(series.times())?;
    Ok(1.0 / (n as f64 * dt))
}

fn uniform_step(times: &[f64]) -> Result<f64, AnalysisError> {
    let dt = times[1] - times[0];
    let mut deviation = 0.0f64;
    for w in times.windows(2) {
        deviation = deviation.max(((w[1] - w[0]) - dt).abs());
    }
    if deviation > 1e-9 * dt.abs() {
        return Err(AnalysisError::NonUniformGrid { deviation });
    }
    Ok(dt)
}

/// Peak frequencies (cycles per time unit) of one channel's discrete spectrum.
///
/// The mean-subtracted channel is Blackman-windowed and transformed; a peak is
/// a local maximum of the amplitude spectrum above `threshold`, in channel
/// units. Resolution is one bin, 1/(n·dt); an energy gap ΔE appears at
/// ΔE/2π cycles.
pub fn dominant_frequencies(
    series: &TimeSeries,
    channel: &str,
    threshold: f64,
) -> Result<Vec<f64>, AnalysisError> {
    let values = series
        .channel(channel)
        .ok_or_else(|| AnalysisError::UnknownChannel(channel.into()))?;
    let n = series.len();
    if n < 8 {
        return Err(AnalysisError::GridTooShort { needed: 8, got: n });
    }
    let dt = uniform_step(series.times())?;
    let mean = values.iter().sum::<f64>() / n as f64;

    // Blackman window; coherent gain normalizes peak heights back to
    // channel-amplitude units
    let mut window_sum = 0.0;
    let mut buffer: Vec<C64> = (0..n)
        .map(|i| {
            let x = std::f64::consts::TAU * i as f64 / (n - 1) as f64;
            let w = 0.42 - 0.5 * x.cos() + 0.08 * (2.0 * x).cos();
            window_sum += w;
            C64::new((values[i] - mean) * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buffer);

    let amplitudes: Vec<f64> = buffer[..n / 2 + 1]
        .iter()
        .map(|v| 2.0 * v.norm() / window_sum)
        .collect();
    let bin = 1.0 / (n as f64 * dt);
    let mut peaks = Vec::new();
    for j in 1..amplitudes.len().saturating_sub(1) {
        if amplitudes[j] > threshold
            && amplitudes[j] >= amplitudes[j - 1]
            && amplitudes[j] >= amplitudes[j + 1]
        {
            // merge plateaus: keep only the first bin of an exact tie
            if j >= 2 && amplitudes[j] == amplitudes[j - 1] && amplitudes[j - 1] > threshold {
                continue;
            }
            peaks.push(j as f64 * bin);
        }
    }
    Ok(peaks)
}

/// Tr(ρ̂ P_S2) / Tr(ρ̂ P_S1) with the electronic-tag projectors taken into the
/// eigenbasis. Zero S1 weight is reported as [`AnalysisError::RatioUndefined`]
/// rather than a number.
pub fn electronic_population_ratio(
    rho: &MolecularDensityMatrix,
    eig: &EigenSystem,
    model: &MolecularModel,
) -> Result<f64, AnalysisError> {
    let normalized = rho.normalized().map_err(|_| AnalysisError::ZeroTrace)?;
    let normalized = MolecularDensityMatrix::from_matrix(normalized);
    let p2 = tag_projector(eig, model, "S2");
    let p1 = tag_projector(eig, model, "S1");
    let s2 = expectation(&normalized, &p2);
    let s1 = expectation(&normalized, &p1);
    if s1.abs() < 1e-14 {
        return Err(AnalysisError::RatioUndefined { s2 });
    }
    Ok(s2 / s1)
}

/// Two-level populations driven by a field of mean occupation N̄ with
/// spontaneous rate Γ: absorption at Γ N̄, emission at Γ (N̄ + 1).
#[derive(Debug, Clone, Copy)]
pub struct RatePopulations {
    ground: f64,
    excited: f64,
    omega: f64,
    n_bar: f64,
    gamma: f64,
}

impl RatePopulations {
    pub fn new(
        ground: f64,
        excited: f64,
        omega: f64,
        n_bar: f64,
        gamma: f64,
    ) -> Result<Self, AnalysisError> {
        if ground < 0.0 || excited < 0.0 || (ground + excited - 1.0).abs() > 1e-12 {
            return Err(AnalysisError::BadPopulations { ground, excited });
        }
        if n_bar < 0.0 || gamma < 0.0 {
            return Err(AnalysisError::BadRates { n_bar, gamma });
        }
        Ok(Self {
            ground,
            excited,
            omega,
            n_bar,
            gamma,
        })
    }

    pub fn ground(&self) -> f64 {
        self.ground
    }

    pub fn excited(&self) -> f64 {
        self.excited
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn n_bar(&self) -> f64 {
        self.n_bar
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Steady-state populations (P_g, P_e): the Boltzmann point
    /// P_e/P_g = N̄/(N̄+1).
    pub fn steady_state(&self) -> (f64, f64) {
        let total_rate = 2.0 * self.n_bar + 1.0;
        ((self.n_bar + 1.0) / total_rate, self.n_bar / total_rate)
    }
}

/// Closed-form solution of the two-level rate equations over the grid:
/// both populations relax exponentially at Γ(2N̄+1) toward the Boltzmann
/// steady state. Channels `p_ground` and `p_excited`.
pub fn einstein_rate_evolution(
    init: &RatePopulations,
    times: &[f64],
) -> Result<TimeSeries, AnalysisError> {
    let (g_ss, e_ss) = init.steady_state();
    let rate = init.gamma * (2.0 * init.n_bar + 1.0);
    let mut ground = Vec::with_capacity(times.len());
    let mut excited = Vec::with_capacity(times.len());
    for &t in times {
        let decay = (-rate * t).exp();
        ground.push(g_ss + (init.ground - g_ss) * decay);
        excited.push(e_ss + (init.excited - e_ss) * decay);
    }
    TimeSeries::new(
        times.to_vec(),
        vec![("p_ground".into(), ground), ("p_excited".into(), excited)],
    )
}
