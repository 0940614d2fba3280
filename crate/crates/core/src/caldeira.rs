//! High-temperature quantum Brownian motion: the closed-form
//! Ornstein-Uhlenbeck momentum propagator, the effective-temperature
//! law, the Maxwell-Boltzmann limit, and a Langevin Monte Carlo
//! estimator of the full reduced phase-space propagator.
//!
//! The model is the white-noise limit of an ohmic bath: friction `eta`
//! and noise strength `eta k T_b`. The momentum marginal propagates as an
//! OU process with `mean factor exp(-eta dt / m)` and variance
//! `m k T_b (1 - exp(-2 eta dt / m))`, so `T_e(dt) = T_b (1 - e^{-2 eta dt / m})`
//! and the thermalization time is `tau = m / (2 eta)`.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{map_indexed, pairwise_sum};
use crate::grid::UniformGrid;
use crate::states::GaussianWignerState;

#[derive(Debug, Error)]
pub enum CaldeiraError {
    #[error("parameter {name} must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("duration must be nonnegative, got {0}")]
    NegativeDuration(f64),
    #[error("momentum distribution is not normalized: integral = {0}")]
    NormalizationError(f64),
    #[error("Langevin step is too coarse: eta dt / m = {0}, the guard is 0.1")]
    UnstableStep(f64),
    #[error("ensemble is empty")]
    EmptyEnsemble,
}

/// Parameters of the high-temperature ohmic model.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CLParams {
    pub mass: f64,
    /// Friction coefficient (mass / time).
    pub eta: f64,
    /// Bath temperature.
    pub t_bath: f64,
    /// Boltzmann constant; 1 in natural units.
    pub k: f64,
    pub hbar: f64,
}

impl CLParams {
    pub fn new(mass: f64, eta: f64, t_bath: f64, k: f64, hbar: f64) -> Result<Self, CaldeiraError> {
        for (name, value) in
            [("mass", mass), ("eta", eta), ("t_bath", t_bath), ("k", k), ("hbar", hbar)]
        {
            if !(value > 0.0) || !value.is_finite() {
                return Err(CaldeiraError::NonPositiveParameter { name, value });
            }
        }
        Ok(Self { mass, eta, t_bath, k, hbar })
    }

    /// Thermalization time `tau = m / (2 eta)`.
    pub fn tau(&self) -> f64 {
        0.5 * self.mass / self.eta
    }

    /// Stationary momentum variance `m k T_b`.
    pub fn mkt(&self) -> f64 {
        self.mass * self.k * self.t_bath
    }

    /// The high-temperature approximation degrades once
    /// `hbar eta / (m k T_b)` grows past 0.1; returns a warning then.
    pub fn validity_warning(&self) -> Option<String> {
        let ratio = self.hbar * self.eta / self.mkt();
        (ratio > 0.1).then(|| {
            format!(
                "hbar*eta/(m k T_b) = {ratio:.3} > 0.1: the white-noise (high temperature) \
                 approximation is degrading"
            )
        })
    }
}

/// The closed-form reduced momentum propagator over a duration `dt`:
/// a Gaussian with decaying mean and saturating variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumKernel {
    /// `exp(-eta dt / m)`.
    pub mean_factor: f64,
    /// `m k T_b (1 - exp(-2 eta dt / m))`.
    pub variance: f64,
    pub dt: f64,
}

impl MomentumKernel {
    /// Transition density `K(p_b | p_a)`; the zero-duration kernel is a
    /// point mass (infinite on the diagonal, zero elsewhere).
    pub fn density(&self, p_b: f64, p_a: f64) -> f64 {
        let mean = p_a * self.mean_factor;
        if self.variance == 0.0 {
            return if p_b == mean { f64::INFINITY } else { 0.0 };
        }
        let z = p_b - mean;
        (-0.5 * z * z / self.variance).exp()
            / (2.0 * std::f64::consts::PI * self.variance).sqrt()
    }

    /// Chapman-Kolmogorov composition: `self` followed by `later`.
    pub fn then(&self, later: &MomentumKernel) -> MomentumKernel {
        MomentumKernel {
            mean_factor: self.mean_factor * later.mean_factor,
            variance: later.variance + later.mean_factor * later.mean_factor * self.variance,
            dt: self.dt + later.dt,
        }
    }
}

/// Build the OU momentum kernel for a duration `dt >= 0`.
pub fn momentum_kernel(params: &CLParams, dt: f64) -> Result<MomentumKernel, CaldeiraError> {
    if dt < 0.0 || !dt.is_finite() {
        return Err(CaldeiraError::NegativeDuration(dt));
    }
    let decay = (-params.eta * dt / params.mass).exp();
    Ok(MomentumKernel {
        mean_factor: decay,
        variance: params.mkt() * (1.0 - decay * decay),
        dt,
    })
}

/// Effective temperature `T_e(dt) = T_b (1 - exp(-2 eta dt / m))`,
/// monotone toward `T_b` with e-folding time `tau = m / (2 eta)`.
pub fn effective_temperature(params: &CLParams, dt: f64) -> Result<f64, CaldeiraError> {
    if dt < 0.0 || !dt.is_finite() {
        return Err(CaldeiraError::NegativeDuration(dt));
    }
    Ok(params.t_bath * (1.0 - (-2.0 * params.eta * dt / params.mass).exp()))
}

/// A one-dimensional momentum distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum MomentumMarginal {
    Gaussian { mean: f64, variance: f64 },
    Grid { axis: UniformGrid, density: Vec<f64> },
}

impl MomentumMarginal {
    pub fn norm(&self) -> f64 {
        match self {
            MomentumMarginal::Gaussian { .. } => 1.0,
            MomentumMarginal::Grid { axis, density } => {
                pairwise_sum(density) * axis.step()
            }
        }
    }
}

/// Propagate a momentum distribution by convolution with the OU kernel:
/// Gaussians stay Gaussian with `mean -> mean_factor * mean` and
/// `variance -> mean_factor^2 * variance + sigma^2`; grids convolve by
/// direct quadrature.
pub fn propagate_momentum_marginal(
    marginal: &MomentumMarginal,
    params: &CLParams,
    dt: f64,
) -> Result<MomentumMarginal, CaldeiraError> {
    let kernel = momentum_kernel(params, dt)?;
    let norm = marginal.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(CaldeiraError::NormalizationError(norm));
    }
    match marginal {
        MomentumMarginal::Gaussian { mean, variance } => Ok(MomentumMarginal::Gaussian {
            mean: mean * kernel.mean_factor,
            variance: kernel.mean_factor * kernel.mean_factor * variance + kernel.variance,
        }),
        MomentumMarginal::Grid { axis, density } => {
            if kernel.variance == 0.0 {
                return Ok(marginal.clone());
            }
            let n = axis.len();
            let dp = axis.step();
            let out: Vec<f64> = map_indexed(n, |ib| {
                let p_b = axis.value(ib);
                let mut acc = 0.0;
                for ia in 0..n {
                    let w = if ia == 0 || ia == n - 1 { 0.5 } else { 1.0 };
                    acc += w * kernel.density(p_b, axis.value(ia)) * density[ia];
                }
                acc * dp
            });
            Ok(MomentumMarginal::Grid { axis: axis.clone(), density: out })
        }
    }
}

/// Initial condition of a Langevin ensemble.
#[derive(Debug, Clone)]
pub enum InitialEnsemble {
    /// Every sample drawn from a Gaussian phase-space state.
    Gaussian(GaussianWignerState),
    /// Every sample starts at the same phase-space point.
    Point { x: f64, p: f64 },
}

/// Integration rule for the momentum update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepper {
    /// Sample the exact OU transition each step (no time-step bias in p).
    ExactOu,
    /// Euler-Maruyama, kept for convergence studies.
    EulerMaruyama,
}

/// A sampled ensemble of phase-space points after Langevin evolution.
#[derive(Debug, Clone)]
pub struct LangevinEnsemble {
    pub samples: Vec<[f64; 2]>,
    pub seed: u64,
    pub n_steps: usize,
    pub dt_step: f64,
}

impl LangevinEnsemble {
    pub fn momenta(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s[1]).collect()
    }

    pub fn positions(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s[0]).collect()
    }

    pub fn mean(&self) -> [f64; 2] {
        let n = self.samples.len() as f64;
        let mx = pairwise_sum(&self.positions()) / n;
        let mp = pairwise_sum(&self.momenta()) / n;
        [mx, mp]
    }

    pub fn covariance(&self) -> [[f64; 2]; 2] {
        let mean = self.mean();
        let n = self.samples.len() as f64;
        let xx: Vec<f64> =
            self.samples.iter().map(|s| (s[0] - mean[0]) * (s[0] - mean[0])).collect();
        let xp: Vec<f64> =
            self.samples.iter().map(|s| (s[0] - mean[0]) * (s[1] - mean[1])).collect();
        let pp: Vec<f64> =
            self.samples.iter().map(|s| (s[1] - mean[1]) * (s[1] - mean[1])).collect();
        let sxx = pairwise_sum(&xx) / (n - 1.0);
        let sxp = pairwise_sum(&xp) / (n - 1.0);
        let spp = pairwise_sum(&pp) / (n - 1.0);
        [[sxx, sxp], [sxp, spp]]
    }
}

/// Monte Carlo sampling of the reduced propagator: each sample follows
/// the momentum OU process coupled to the position by a midpoint rule
/// (`x += dt (p_old + p_new) / 2m` for the exact stepper; plain
/// symplectic Euler for Euler-Maruyama). Every sample derives its own
/// ChaCha stream from `(seed, index)`, so results are bitwise
/// independent of scheduling.
#[allow(clippy::too_many_arguments)]
pub fn langevin_sample(
    params: &CLParams,
    initial: &InitialEnsemble,
    t_a: f64,
    t_b: f64,
    n_steps: usize,
    n_samples: usize,
    seed: u64,
    stepper: Stepper,
) -> Result<LangevinEnsemble, CaldeiraError> {
    if t_b < t_a {
        return Err(CaldeiraError::NegativeDuration(t_b - t_a));
    }
    if n_samples == 0 {
        return Err(CaldeiraError::EmptyEnsemble);
    }
    let duration = t_b - t_a;
    let dt = if n_steps == 0 { 0.0 } else { duration / n_steps as f64 };
    let damping = params.eta * dt / params.mass;
    if duration > 0.0 && (n_steps == 0 || damping >= 0.1) {
        return Err(CaldeiraError::UnstableStep(damping));
    }
    let mkt = params.mkt();
    let theta = (-damping).exp();
    let sigma_exact = (mkt * (1.0 - theta * theta)).sqrt();
    let sigma_euler = (2.0 * params.eta * params.k * params.t_bath * dt).sqrt();
    let m = params.mass;

    // Cholesky factor of the initial covariance for Gaussian draws
    let init = match initial {
        InitialEnsemble::Gaussian(g) => {
            let l00 = g.cov[0][0].sqrt();
            let l10 = g.cov[0][1] / l00;
            let l11 = (g.cov[1][1] - l10 * l10).max(0.0).sqrt();
            Some((g.mean, l00, l10, l11))
        }
        InitialEnsemble::Point { .. } => None,
    };
    let point = match initial {
        InitialEnsemble::Point { x, p } => [*x, *p],
        InitialEnsemble::Gaussian(_) => [0.0, 0.0],
    };

    let samples: Vec<[f64; 2]> = map_indexed(n_samples, |idx| {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(idx as u64 + 1);
        let (mut x, mut p) = match &init {
            Some((mean, l00, l10, l11)) => {
                let z0: f64 = StandardNormal.sample(&mut rng);
                let z1: f64 = StandardNormal.sample(&mut rng);
                (mean[0] + l00 * z0, mean[1] + l10 * z0 + l11 * z1)
            }
            None => (point[0], point[1]),
        };
        for _ in 0..n_steps {
            match stepper {
                Stepper::ExactOu => {
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    let p_new = p * theta + sigma_exact * noise;
                    x += dt * (p + p_new) / (2.0 * m);
                    p = p_new;
                }
                Stepper::EulerMaruyama => {
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    x += dt * p / m;
                    p += -damping * p + sigma_euler * noise;
                }
            }
        }
        [x, p]
    });
    Ok(LangevinEnsemble { samples, seed, n_steps, dt_step: dt })
}

/// A normalized two-dimensional histogram over phase space; the shape of
/// a gridded state, but a classical density estimate rather than a
/// Wigner function (no admissibility constraints apply).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseSpaceHistogram {
    /// Bin centers.
    pub x_axis: UniformGrid,
    pub p_axis: UniformGrid,
    /// Row-major, x outer: `density[ix * n_p + ip]`, normalized so that
    /// `sum density * dx * dp = 1`.
    pub density: Vec<f64>,
}

impl PhaseSpaceHistogram {
    pub fn p_marginal(&self) -> Vec<f64> {
        let n_p = self.p_axis.len();
        let n_x = self.x_axis.len();
        (0..n_p)
            .map(|ip| {
                (0..n_x).map(|ix| self.density[ix * n_p + ip]).sum::<f64>() * self.x_axis.step()
            })
            .collect()
    }

    pub fn norm(&self) -> f64 {
        pairwise_sum(&self.density) * self.x_axis.step() * self.p_axis.step()
    }
}

/// Histogram estimate of the reduced propagator from an ensemble. Bin
/// ranges default to the sample extent padded by one bin.
pub fn estimate_phase_space_kernel(
    ensemble: &LangevinEnsemble,
    n_x: usize,
    n_p: usize,
    range: Option<([f64; 2], [f64; 2])>,
) -> Result<PhaseSpaceHistogram, CaldeiraError> {
    if ensemble.samples.is_empty() {
        return Err(CaldeiraError::EmptyEnsemble);
    }
    let (x_range, p_range) = match range {
        Some(r) => r,
        None => {
            let mut x_lo = f64::INFINITY;
            let mut x_hi = f64::NEG_INFINITY;
            let mut p_lo = f64::INFINITY;
            let mut p_hi = f64::NEG_INFINITY;
            for s in &ensemble.samples {
                x_lo = x_lo.min(s[0]);
                x_hi = x_hi.max(s[0]);
                p_lo = p_lo.min(s[1]);
                p_hi = p_hi.max(s[1]);
            }
            let pad_x = (x_hi - x_lo).max(1e-12) / n_x as f64;
            let pad_p = (p_hi - p_lo).max(1e-12) / n_p as f64;
            ([x_lo - pad_x, x_hi + pad_x], [p_lo - pad_p, p_hi + pad_p])
        }
    };
    let dx = (x_range[1] - x_range[0]) / n_x as f64;
    let dp = (p_range[1] - p_range[0]) / n_p as f64;
    let mut counts = vec![0.0_f64; n_x * n_p];
    for s in &ensemble.samples {
        let ix = (((s[0] - x_range[0]) / dx).floor() as isize).clamp(0, n_x as isize - 1) as usize;
        let ip = (((s[1] - p_range[0]) / dp).floor() as isize).clamp(0, n_p as isize - 1) as usize;
        counts[ix * n_p + ip] += 1.0;
    }
    let total = ensemble.samples.len() as f64;
    for c in counts.iter_mut() {
        *c /= total * dx * dp;
    }
    Ok(PhaseSpaceHistogram {
        x_axis: UniformGrid::new(x_range[0] + 0.5 * dx, dx, n_x).expect("histogram axis"),
        p_axis: UniformGrid::new(p_range[0] + 0.5 * dp, dp, n_p).expect("histogram axis"),
        density: counts,
    })
}

/// Two-sided Kolmogorov-Smirnov statistic of samples against a CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &z) in sorted.iter().enumerate() {
        let f = cdf(z);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// CDF of a normal distribution with the given mean and variance.
pub fn normal_cdf(mean: f64, variance: f64) -> impl Fn(f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    let normal = Normal::new(mean, variance.sqrt()).expect("valid normal");
    move |z| normal.cdf(z)
}
