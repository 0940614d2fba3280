//! Influence phases of harmonic environments coupled linearly to a
//! system of interest, evaluated on discretized path pairs.
//!
//! The influence functional is `F = exp(i Phi / hbar)` with complex
//! action-valued phase `Phi`. Its real part carries the effective
//! self-interaction and drive of the eliminated oscillator; the
//! imaginary part is the decoherence weight, nonnegative for admissible
//! initial states (`|F| <= 1`).
//!
//! Double-time integrals use the trapezoid rule with exact handling of
//! the triangular region `s < t` (half-weight diagonal). For a single
//! oscillator the `sin omega (t - s)` kernel separates, so the triangle
//! reduces to prefix sums; the naive double sums stay in use as the
//! independent route of the closed-form wave-packet phase and in tests.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{map_indexed, pairwise_sum, sum_indexed};
use crate::grid::UniformGrid;
use crate::quadrature::{cumulative_trapezoid, filon_sin_cos, trapezoid_weights};
use crate::states::{GaussianWignerState, GridWignerState, StateError};

#[derive(Debug, Error)]
pub enum InfluenceError {
    #[error("path arrays must share the time grid length {expected}, got {got}")]
    PathShape { expected: usize, got: usize },
    #[error("sampled coupling must match the path length {expected}, got {got}")]
    CouplingShape { expected: usize, got: usize },
    #[error("oscillator parameter {name} must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("packet width must be positive, got {0}")]
    NonPositiveWidth(f64),
    #[error("initial state is inadmissible: {0}")]
    InadmissibleInitialState(String),
    #[error("expectation underflowed (|E| = {0:e}); the influence phase log is undefined")]
    QuadratureUnderflow(f64),
    #[error("operation needs a {expected} initial state")]
    WrongInitial { expected: &'static str },
    #[error("kernel grid does not cover the paths: {0}")]
    GridMismatch(String),
    #[error("spectral integral did not converge under refinement")]
    DivergentIntegral,
    #[error("damping is negative beyond tolerance: Im Phi = {0}")]
    NegativeDamping(f64),
    #[error(transparent)]
    State(#[from] StateError),
}

/// A pair of system paths `x(t)`, `x'(t)` on a uniform time grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathPair {
    times: UniformGrid,
    x: Vec<f64>,
    x_prime: Vec<f64>,
}

impl PathPair {
    pub fn new(times: UniformGrid, x: Vec<f64>, x_prime: Vec<f64>) -> Result<Self, InfluenceError> {
        let n = times.len();
        if x.len() != n {
            return Err(InfluenceError::PathShape { expected: n, got: x.len() });
        }
        if x_prime.len() != n {
            return Err(InfluenceError::PathShape { expected: n, got: x_prime.len() });
        }
        Ok(Self { times, x, x_prime })
    }

    pub fn times(&self) -> &UniformGrid {
        &self.times
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn x_prime(&self) -> &[f64] {
        &self.x_prime
    }

    pub fn duration(&self) -> f64 {
        self.times.span()
    }

    /// The pair with the two paths exchanged.
    pub fn swapped(&self) -> Self {
        Self { times: self.times.clone(), x: self.x_prime.clone(), x_prime: self.x.clone() }
    }
}

/// Coupling energy `u * gamma(x)`: bilinear `gamma(x) = gamma x`, or
/// `gamma` precomposed with the two paths sample by sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Coupling {
    Bilinear(f64),
    Sampled { on_x: Vec<f64>, on_x_prime: Vec<f64> },
}

impl Coupling {
    /// Tabulate an arbitrary `gamma(x)` along both paths.
    pub fn from_fn(paths: &PathPair, gamma: impl Fn(f64) -> f64) -> Self {
        Coupling::Sampled {
            on_x: paths.x.iter().map(|&v| gamma(v)).collect(),
            on_x_prime: paths.x_prime.iter().map(|&v| gamma(v)).collect(),
        }
    }

    /// The sampled arrays `gamma_t(x)`, `gamma_t(x')`.
    fn resolve(&self, paths: &PathPair) -> Result<(Vec<f64>, Vec<f64>), InfluenceError> {
        match self {
            Coupling::Bilinear(g) => Ok((
                paths.x.iter().map(|&v| g * v).collect(),
                paths.x_prime.iter().map(|&v| g * v).collect(),
            )),
            Coupling::Sampled { on_x, on_x_prime } => {
                let n = paths.times.len();
                for arr in [on_x, on_x_prime] {
                    if arr.len() != n {
                        return Err(InfluenceError::CouplingShape { expected: n, got: arr.len() });
                    }
                }
                Ok((on_x.clone(), on_x_prime.clone()))
            }
        }
    }
}

/// Initial state of the eliminated oscillator.
#[derive(Debug, Clone)]
pub enum OscillatorInitial {
    Vacuum,
    Thermal { beta: f64 },
    Packet { u0: f64, p0: f64, delta: f64 },
    Gaussian(GaussianWignerState),
    Grid(GridWignerState),
}

/// One harmonic oscillator of the environment.
#[derive(Debug, Clone)]
pub struct OscillatorSpec {
    pub mass: f64,
    pub omega: f64,
    pub coupling: Coupling,
    pub initial: OscillatorInitial,
}

impl OscillatorSpec {
    pub fn new(
        mass: f64,
        omega: f64,
        coupling: Coupling,
        initial: OscillatorInitial,
    ) -> Result<Self, InfluenceError> {
        for (name, value) in [("mass", mass), ("omega", omega)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(InfluenceError::NonPositiveParameter { name, value });
            }
        }
        Ok(Self { mass, omega, coupling, initial })
    }
}

/// A complex influence phase in action units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfluencePhase {
    pub re: f64,
    pub im: f64,
}

impl InfluencePhase {
    /// Negative imaginary parts beyond rounding slack mean `|F| > 1` and
    /// are rejected.
    pub fn new(re: f64, im: f64) -> Result<Self, InfluenceError> {
        if im < -1e-10 * im.abs().max(1.0) {
            return Err(InfluenceError::NegativeDamping(im));
        }
        Ok(Self { re, im })
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// `|F| = exp(-Im Phi / hbar)`.
    pub fn abs_f(&self, hbar: f64) -> f64 {
        (-self.im / hbar).exp()
    }
}

/// Sampled couplings with the common quadrature pieces.
struct Resolved {
    dt: f64,
    t_a: f64,
    times: UniformGrid,
    weights: Vec<f64>,
    /// `gamma_s(x) + gamma_s(x')`
    sum: Vec<f64>,
    /// `gamma_t(x) - gamma_t(x')`
    diff: Vec<f64>,
}

impl Resolved {
    fn build(paths: &PathPair, coupling: &Coupling) -> Result<Self, InfluenceError> {
        let (g, g_prime) = coupling.resolve(paths)?;
        let n = paths.times.len();
        Ok(Self {
            dt: paths.times.step(),
            t_a: paths.times.start(),
            times: paths.times.clone(),
            weights: trapezoid_weights(n, paths.times.step()),
            sum: (0..n).map(|i| g[i] + g_prime[i]).collect(),
            diff: (0..n).map(|i| g[i] - g_prime[i]).collect(),
        })
    }

    /// `C = integral (gamma_t(x) - gamma_t(x')) cos omega (t - t_a) dt`
    /// and the matching sine moment `S`.
    fn drive_moments(&self, omega: f64) -> (f64, f64) {
        let mut c = 0.0;
        let mut s = 0.0;
        for i in 0..self.diff.len() {
            let phase = omega * (self.times.value(i) - self.t_a);
            c += self.weights[i] * self.diff[i] * phase.cos();
            s += self.weights[i] * self.diff[i] * phase.sin();
        }
        (c, s)
    }

    /// Triangle integral
    /// `iint_{s<t} (gamma_s(x)+gamma_s(x')) (gamma_t(x)-gamma_t(x')) sin omega (t-s) ds dt`
    /// via `sin omega (t-s) = sin t' cos s' - cos t' sin s'` and
    /// cumulative trapezoid prefix sums (half-weight diagonal; the
    /// diagonal itself vanishes with `sin 0`).
    fn self_interaction(&self, omega: f64) -> f64 {
        let n = self.sum.len();
        let cos_part: Vec<f64> = (0..n)
            .map(|i| self.sum[i] * (omega * (self.times.value(i) - self.t_a)).cos())
            .collect();
        let sin_part: Vec<f64> = (0..n)
            .map(|i| self.sum[i] * (omega * (self.times.value(i) - self.t_a)).sin())
            .collect();
        let prefix_cos = cumulative_trapezoid(&cos_part, self.dt);
        let prefix_sin = cumulative_trapezoid(&sin_part, self.dt);
        let mut acc = 0.0;
        for i in 0..n {
            let phase = omega * (self.times.value(i) - self.t_a);
            acc += self.weights[i]
                * self.diff[i]
                * (phase.sin() * prefix_cos[i] - phase.cos() * prefix_sin[i]);
        }
        acc
    }

    /// Naive full-square double sum `iint diff_s diff_t kernel(s, t)` for
    /// a kernel symmetric under `s <-> t`: diagonal plus twice the upper
    /// triangle. Small arrays; sequential on purpose.
    fn square_double_sum(&self, kernel: impl Fn(f64, f64) -> f64) -> f64 {
        let n = self.diff.len();
        let mut acc = 0.0;
        for i in 0..n {
            let t = self.times.value(i);
            let wd_i = self.weights[i] * self.diff[i];
            acc += wd_i * wd_i * kernel(t, t);
            let mut inner = 0.0;
            for j in 0..i {
                inner += self.weights[j] * self.diff[j] * kernel(self.times.value(j), t);
            }
            acc += 2.0 * wd_i * inner;
        }
        acc
    }
}

fn ground_state(mass: f64, omega: f64, hbar: f64) -> GaussianWignerState {
    GaussianWignerState::new(
        [0.0, 0.0],
        [[0.5 * hbar / (mass * omega), 0.0], [0.0, 0.5 * mass * hbar * omega]],
        hbar,
    )
    .expect("ground state is admissible")
}

/// Vacuum influence phase: the oscillator starts in its ground state.
///
/// `Re = (1/2 M omega) iint_{s<t} (g_s + g'_s)(g_t - g'_t) sin omega (t-s)`,
/// `Im = (1/4 M omega) iint (g_s - g'_s)(g_t - g'_t) cos omega (s-t)`.
pub fn phase_vacuum(
    paths: &PathPair,
    osc: &OscillatorSpec,
    _hbar: f64,
) -> Result<InfluencePhase, InfluenceError> {
    let r = Resolved::build(paths, &osc.coupling)?;
    let re = r.self_interaction(osc.omega) / (2.0 * osc.mass * osc.omega);
    // the cos kernel factorizes: iint cos omega (s-t) diff diff = C^2 + S^2
    let (c, s) = r.drive_moments(osc.omega);
    let im = (c * c + s * s) / (4.0 * osc.mass * osc.omega);
    InfluencePhase::new(re, im)
}

/// Thermal influence phase: same real part as the vacuum, imaginary part
/// scaled by `coth(beta hbar omega / 2)`.
pub fn phase_thermal(
    paths: &PathPair,
    osc: &OscillatorSpec,
    hbar: f64,
) -> Result<InfluencePhase, InfluenceError> {
    let beta = match osc.initial {
        OscillatorInitial::Thermal { beta } => beta,
        _ => return Err(InfluenceError::WrongInitial { expected: "thermal" }),
    };
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(InfluenceError::NonPositiveParameter { name: "beta", value: beta });
    }
    let vac = phase_vacuum(paths, osc, hbar)?;
    let coth = 1.0 / (0.5 * beta * hbar * osc.omega).tanh();
    InfluencePhase::new(vac.re, coth * vac.im)
}

/// Closed-form influence phase of a Gaussian wave packet initial state:
/// self-interaction, the two linear drive terms in `(u0, p0)`, and the
/// imaginary double integral with `cos omega (s - t)` and
/// `cos omega (s + t - 2 t_a)` kernels. The double sums are evaluated
/// directly, keeping this route independent of the factorized one in
/// [`phase_single_general`].
pub fn phase_gaussian_packet(
    paths: &PathPair,
    osc: &OscillatorSpec,
    hbar: f64,
) -> Result<InfluencePhase, InfluenceError> {
    let (u0, p0, delta) = match osc.initial {
        OscillatorInitial::Packet { u0, p0, delta } => (u0, p0, delta),
        _ => return Err(InfluenceError::WrongInitial { expected: "packet" }),
    };
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(InfluenceError::NonPositiveWidth(delta));
    }
    let r = Resolved::build(paths, &osc.coupling)?;
    let m_omega = osc.mass * osc.omega;
    let (c, s) = r.drive_moments(osc.omega);
    let re = r.self_interaction(osc.omega) / (2.0 * m_omega) - u0 * c - p0 * s / m_omega;

    let omega = osc.omega;
    let t_a = r.t_a;
    let diff_kernel = r.square_double_sum(|s_t, t_t| (omega * (s_t - t_t)).cos());
    let sum_kernel = r.square_double_sum(|s_t, t_t| (omega * (s_t + t_t - 2.0 * t_a)).cos());
    let spread = delta * delta;
    let conjugate = hbar * hbar / (4.0 * spread * m_omega * m_omega);
    let im =
        ((spread + conjugate) * diff_kernel + (spread - conjugate) * sum_kernel) / (4.0 * hbar);
    InfluencePhase::new(re, im)
}

/// Influence phase for an arbitrary admissible initial Wigner state of
/// the oscillator: the state-independent self-interaction plus
/// `-i hbar log` of the expectation of
/// `exp(-(i/hbar) (u_a C + p_a S / M omega))`. Evaluated in closed form
/// (log space) for Gaussian initial states, by direct quadrature for
/// grid states.
pub fn phase_single_general(
    paths: &PathPair,
    osc: &OscillatorSpec,
    hbar: f64,
) -> Result<InfluencePhase, InfluenceError> {
    let r = Resolved::build(paths, &osc.coupling)?;
    let m_omega = osc.mass * osc.omega;
    let re_self = r.self_interaction(osc.omega) / (2.0 * m_omega);
    let (c, s) = r.drive_moments(osc.omega);
    // wave vector of the expectation E[exp(-i (k_u u + k_p p))]
    let k_u = c / hbar;
    let k_p = s / (m_omega * hbar);

    let gaussian = match &osc.initial {
        OscillatorInitial::Vacuum => Some(ground_state(osc.mass, osc.omega, hbar)),
        OscillatorInitial::Thermal { beta } => {
            if !(*beta > 0.0) || !beta.is_finite() {
                return Err(InfluenceError::NonPositiveParameter { name: "beta", value: *beta });
            }
            Some(
                crate::states::thermal_oscillator(osc.mass, osc.omega, *beta, hbar)
                    .map_err(|e| InfluenceError::InadmissibleInitialState(e.to_string()))?,
            )
        }
        OscillatorInitial::Packet { u0, p0, delta } => Some(
            crate::states::gaussian_packet(*u0, *p0, *delta, hbar)
                .map_err(|e| InfluenceError::InadmissibleInitialState(e.to_string()))?,
        ),
        OscillatorInitial::Gaussian(g) => Some(*g),
        OscillatorInitial::Grid(_) => None,
    };

    let (re_exp, im) = match (gaussian, &osc.initial) {
        (Some(g), _) => {
            // log E = -i k . mean - k Sigma k / 2, exact for Gaussians
            let quad = g.cov[0][0] * k_u * k_u
                + 2.0 * g.cov[0][1] * k_u * k_p
                + g.cov[1][1] * k_p * k_p;
            (-(g.mean[0] * k_u + g.mean[1] * k_p) * hbar, 0.5 * hbar * quad)
        }
        (None, OscillatorInitial::Grid(grid)) => {
            let norm = grid.norm();
            if (norm - 1.0).abs() > 1e-4 || grid.purity() > 1.0 + 1e-4 {
                return Err(InfluenceError::InadmissibleInitialState(format!(
                    "norm {norm}, purity {}",
                    grid.purity()
                )));
            }
            let area = grid.cell_area();
            let n_x = grid.x_axis().len();
            let n_p = grid.p_axis().len();
            let terms: Vec<Complex64> = map_indexed(n_x, |iu| {
                let u = grid.x_axis().value(iu);
                let mut acc = Complex64::new(0.0, 0.0);
                for ip in 0..n_p {
                    let p = grid.p_axis().value(ip);
                    let phase = -(k_u * u + k_p * p);
                    acc += grid.value_at(iu, ip) * Complex64::new(phase.cos(), phase.sin());
                }
                acc * area
            });
            let mut expectation = Complex64::new(0.0, 0.0);
            for t in terms {
                expectation += t;
            }
            let modulus = expectation.norm();
            if modulus < 1e-300 {
                return Err(InfluenceError::QuadratureUnderflow(modulus));
            }
            // Phi_2 = -i hbar log E = hbar arg E - i hbar ln |E|
            (hbar * expectation.arg(), -hbar * modulus.ln())
        }
        _ => unreachable!(),
    };
    InfluencePhase::new(re_self + re_exp, im)
}

/// Dispatch on the initial-state variant: closed forms where they exist,
/// the general route otherwise.
pub fn phase_for(
    paths: &PathPair,
    osc: &OscillatorSpec,
    hbar: f64,
) -> Result<InfluencePhase, InfluenceError> {
    match osc.initial {
        OscillatorInitial::Vacuum => phase_vacuum(paths, osc, hbar),
        OscillatorInitial::Thermal { .. } => phase_thermal(paths, osc, hbar),
        OscillatorInitial::Packet { .. } => phase_gaussian_packet(paths, osc, hbar),
        OscillatorInitial::Gaussian(_) | OscillatorInitial::Grid(_) => {
            phase_single_general(paths, osc, hbar)
        }
    }
}

/// Total phase of independent oscillators: the phases add. Summation is
/// left to right, fixing the floating-point association.
pub fn phase_collection(
    paths: &PathPair,
    oscillators: &[OscillatorSpec],
    hbar: f64,
) -> Result<InfluencePhase, InfluenceError> {
    let mut re = 0.0;
    let mut im = 0.0;
    for osc in oscillators {
        let phi = phase_for(paths, osc, hbar)?;
        re += phi.re;
        im += phi.im;
    }
    InfluencePhase::new(re, im)
}

// ---------------------------------------------------------------------
// Continuum baths: spectral densities and memory kernels
// ---------------------------------------------------------------------

/// High-frequency regularization of the ohmic density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffShape {
    Exponential,
    Sharp,
}

/// One discrete bath line: weight `gamma^2 / (M omega)` at `omega`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpectralLine {
    pub omega: f64,
    pub weight: f64,
}

/// Bath spectral weight. `Lines` carries point masses (a sampled
/// continuum enters as lines weighted by `Gamma(omega) d omega`). The
/// ohmic form is `Gamma(omega) = (2 eta omega / pi) cutoff(omega/omega_c)`,
/// normalized so that its distributional limits carry friction `eta` and
/// white noise of strength `eta k T_b`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum SpectralDensity {
    Lines(Vec<SpectralLine>),
    Ohmic { eta: f64, cutoff: f64, shape: CutoffShape },
}

impl SpectralDensity {
    fn validate(&self) -> Result<(), InfluenceError> {
        match self {
            SpectralDensity::Lines(lines) => {
                for line in lines {
                    if !(line.omega > 0.0) || !line.omega.is_finite() {
                        return Err(InfluenceError::NonPositiveParameter {
                            name: "line omega",
                            value: line.omega,
                        });
                    }
                    if line.weight < 0.0 || !line.weight.is_finite() {
                        return Err(InfluenceError::NonPositiveParameter {
                            name: "line weight",
                            value: line.weight,
                        });
                    }
                }
                Ok(())
            }
            SpectralDensity::Ohmic { eta, cutoff, .. } => {
                for (name, value) in [("eta", *eta), ("cutoff", *cutoff)] {
                    if !(value > 0.0) || !value.is_finite() {
                        return Err(InfluenceError::NonPositiveParameter { name, value });
                    }
                }
                Ok(())
            }
        }
    }
}

/// Sampled dissipation and noise kernels
/// `A(t) = integral Gamma(omega) sin(omega t) d omega`,
/// `R(t) = integral (hbar Gamma / 4) coth(beta hbar omega / 2) cos(omega t) d omega`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemoryKernels {
    times: UniformGrid,
    a: Vec<f64>,
    r: Vec<f64>,
}

impl MemoryKernels {
    pub fn times(&self) -> &UniformGrid {
        &self.times
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    /// Linear interpolation at lag `t >= 0`.
    pub fn a_at(&self, t: f64) -> f64 {
        linear_at(&self.times, &self.a, t)
    }

    pub fn r_at(&self, t: f64) -> f64 {
        linear_at(&self.times, &self.r, t)
    }
}

fn linear_at(grid: &UniformGrid, values: &[f64], t: f64) -> f64 {
    match grid.locate(t) {
        Some((cell, frac)) => values[cell] * (1.0 - frac) + values[cell + 1] * frac,
        None => 0.0,
    }
}

fn coth(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 / z + z / 3.0
    } else {
        1.0 / z.tanh()
    }
}

/// Sample the memory kernels of a spectral density on `[0, t_max]`.
/// The ohmic integrals run by Filon quadrature on `[0, omega_max]`, the
/// envelope grid refined until both kernels converge.
pub fn kernels_from_spectral_density(
    density: &SpectralDensity,
    beta: f64,
    hbar: f64,
    t_max: f64,
    n_t: usize,
) -> Result<MemoryKernels, InfluenceError> {
    density.validate()?;
    for (name, value) in [("beta", beta), ("hbar", hbar), ("t_max", t_max)] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(InfluenceError::NonPositiveParameter { name, value });
        }
    }
    if n_t < 2 {
        return Err(InfluenceError::GridMismatch("kernel grid needs at least 2 nodes".into()));
    }
    let times =
        UniformGrid::new(0.0, t_max / (n_t - 1) as f64, n_t).expect("validated kernel grid");

    match density {
        SpectralDensity::Lines(lines) => {
            let mut a = vec![0.0; n_t];
            let mut r = vec![0.0; n_t];
            for line in lines {
                let noise = 0.25 * hbar * line.weight * coth(0.5 * beta * hbar * line.omega);
                for i in 0..n_t {
                    let t = times.value(i);
                    a[i] += line.weight * (line.omega * t).sin();
                    r[i] += noise * (line.omega * t).cos();
                }
            }
            Ok(MemoryKernels { times, a, r })
        }
        SpectralDensity::Ohmic { eta, cutoff, shape } => {
            let omega_max = match shape {
                CutoffShape::Exponential => 46.0 * cutoff,
                CutoffShape::Sharp => *cutoff,
            };
            let gamma_of = |omega: f64| -> f64 {
                let base = 2.0 * eta * omega / std::f64::consts::PI;
                match shape {
                    CutoffShape::Exponential => base * (-omega / cutoff).exp(),
                    CutoffShape::Sharp => base,
                }
            };
            // noise envelope; the omega -> 0 limit is eta / (pi beta)
            let noise_env = |omega: f64| -> f64 {
                if omega == 0.0 {
                    eta / (std::f64::consts::PI * beta)
                } else {
                    0.25 * hbar * gamma_of(omega) * coth(0.5 * beta * hbar * omega)
                }
            };

            // two uniform Filon segments: a fine one resolving the
            // thermal knee near omega ~ 1/(beta hbar), a coarse one
            // following the cutoff envelope
            let omega_split = (20.0 / (beta * hbar)).min(0.5 * omega_max);
            let segments: Vec<(f64, f64)> = if omega_split > omega_max / 64.0 {
                vec![(0.0, omega_max)]
            } else {
                vec![(0.0, omega_split), (omega_split, omega_max)]
            };
            let mut n_seg = 2049_usize;
            let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
            loop {
                let samples: Vec<(f64, f64, Vec<f64>, Vec<f64>)> = segments
                    .iter()
                    .map(|&(lo, hi)| {
                        let h = (hi - lo) / (n_seg - 1) as f64;
                        let gamma_samples: Vec<f64> =
                            (0..n_seg).map(|i| gamma_of(lo + h * i as f64)).collect();
                        let noise_samples: Vec<f64> =
                            (0..n_seg).map(|i| noise_env(lo + h * i as f64)).collect();
                        (lo, h, gamma_samples, noise_samples)
                    })
                    .collect();
                let pair: (Vec<f64>, Vec<f64>) = {
                    let ab: Vec<(f64, f64)> = map_indexed(n_t, |i| {
                        let t = times.value(i);
                        let mut a = 0.0;
                        let mut r = 0.0;
                        for (lo, h, gamma_samples, noise_samples) in &samples {
                            let (da, dr) = filon_sin_cos(gamma_samples, noise_samples, *lo, *h, t);
                            a += da;
                            r += dr;
                        }
                        (a, r)
                    });
                    (ab.iter().map(|v| v.0).collect(), ab.iter().map(|v| v.1).collect())
                };
                if let Some((pa, pr)) = &prev {
                    let scale_a = pair.0.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
                    let scale_r = pair.1.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
                    let da =
                        pair.0.iter().zip(pa).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
                            / scale_a;
                    let dr =
                        pair.1.iter().zip(pr).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
                            / scale_r;
                    if da < 1e-8 && dr < 1e-8 {
                        return Ok(MemoryKernels { times, a: pair.0, r: pair.1 });
                    }
                }
                if n_seg > (1 << 17) {
                    return Err(InfluenceError::DivergentIntegral);
                }
                prev = Some(pair);
                n_seg = 2 * (n_seg - 1) + 1;
            }
        }
    }
}

/// Continuum influence phase for bilinear coupling:
/// `Re = (1/2) iint_{s<t} A(t-s) (x_s + x'_s)(x_t - x'_t)`,
/// `Im = (1/hbar) iint R(t-s) (x_t - x'_t)(x_s - x'_s)`,
/// so that `F = exp(i Phi / hbar)` matches the bath exponent.
///
/// The double-time quadrature runs on a grid at least as fine as both
/// the paths and the kernel sampling; paths and kernels enter by linear
/// interpolation. Parallel over the outer time index with an ordered
/// reduction.
pub fn phase_continuum(
    paths: &PathPair,
    kernels: &MemoryKernels,
    hbar: f64,
) -> Result<InfluencePhase, InfluenceError> {
    let duration = paths.duration();
    if kernels.times.end() < duration * (1.0 - 1e-12) {
        return Err(InfluenceError::GridMismatch(format!(
            "kernels cover [0, {}], paths span {}",
            kernels.times.end(),
            duration
        )));
    }
    if kernels.times.step() > paths.times.step() * (1.0 + 1e-9) {
        return Err(InfluenceError::GridMismatch(format!(
            "kernel step {} is coarser than the path step {}",
            kernels.times.step(),
            paths.times.step()
        )));
    }
    // quadrature grid: kernel resolution, exact lag alignment
    let n_q = ((duration / kernels.times.step()).round() as usize).max(paths.times.len() - 1) + 1;
    let dt = duration / (n_q - 1) as f64;

    let path_at = |arr: &[f64], t: f64| -> f64 {
        match paths.times.locate(paths.times.start() + t) {
            Some((cell, frac)) => arr[cell] * (1.0 - frac) + arr[cell + 1] * frac,
            None => 0.0,
        }
    };
    let sum: Vec<f64> = (0..n_q)
        .map(|i| path_at(&paths.x, i as f64 * dt) + path_at(&paths.x_prime, i as f64 * dt))
        .collect();
    let diff: Vec<f64> = (0..n_q)
        .map(|i| path_at(&paths.x, i as f64 * dt) - path_at(&paths.x_prime, i as f64 * dt))
        .collect();
    let a_lag: Vec<f64> = (0..n_q).map(|l| kernels.a_at(l as f64 * dt)).collect();
    let r_lag: Vec<f64> = (0..n_q).map(|l| kernels.r_at(l as f64 * dt)).collect();
    let w = trapezoid_weights(n_q, dt);

    let re = 0.5
        * sum_indexed(n_q, |i| {
            // triangle: trapezoid over s in [0, t_i]
            let mut inner = 0.0;
            for j in 0..=i {
                let wj = if j == 0 || j == i { 0.5 * dt } else { dt };
                inner += wj * a_lag[i - j] * sum[j];
            }
            w[i] * diff[i] * inner
        });
    let im = sum_indexed(n_q, |i| {
        let mut inner = 0.0;
        for (j, &dj) in diff.iter().enumerate() {
            inner += w[j] * r_lag[i.abs_diff(j)] * dj;
        }
        w[i] * diff[i] * inner
    }) / hbar;
    InfluencePhase::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn smooth_random_paths(rng: &mut ChaCha12Rng, n: usize, t_max: f64) -> PathPair {
        let times = UniformGrid::new(0.0, t_max / (n - 1) as f64, n).unwrap();
        let mut build = |rng: &mut ChaCha12Rng| -> Vec<f64> {
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0);
            let w1: f64 = rng.random_range(0.5..3.0);
            let w2: f64 = rng.random_range(0.5..3.0);
            let ph: f64 = rng.random_range(0.0..6.28);
            (0..n)
                .map(|i| {
                    let t = times.value(i);
                    a * (w1 * t + ph).sin() + b * (w2 * t).cos()
                })
                .collect()
        };
        let x = build(rng);
        let x_prime = build(rng);
        PathPair::new(times, x, x_prime).unwrap()
    }

    fn vacuum_osc(mass: f64, omega: f64, gamma: f64) -> OscillatorSpec {
        OscillatorSpec::new(mass, omega, Coupling::Bilinear(gamma), OscillatorInitial::Vacuum)
            .unwrap()
    }

    #[test]
    fn uncoupled_limit_gives_unit_functional() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let paths = smooth_random_paths(&mut rng, 101, 2.0);
        let osc = vacuum_osc(1.0, 1.3, 0.0);
        let phi = phase_vacuum(&paths, &osc, 1.0).unwrap();
        assert_eq!(phi.re, 0.0);
        assert_eq!(phi.im, 0.0);
        assert_eq!(phi.abs_f(1.0), 1.0);
    }

    #[test]
    fn diagonal_paths_have_zero_phase() {
        let times = UniformGrid::new(0.0, 0.02, 101).unwrap();
        let x: Vec<f64> = (0..101).map(|i| (0.1 * i as f64).sin()).collect();
        let paths = PathPair::new(times, x.clone(), x).unwrap();
        let osc = vacuum_osc(1.0, 1.0, 0.7);
        let phi = phase_vacuum(&paths, &osc, 1.0).unwrap();
        assert_eq!(phi.re, 0.0);
        assert_eq!(phi.im, 0.0);
    }

    #[test]
    fn constant_paths_match_analytic_double_integral() {
        // bilinear coupling, x = x0 and x' = x0 + delta constant in time:
        // the elementary sin/cos integrals are closed forms
        let gamma = 0.8;
        let x0 = 0.4;
        let delta = 0.6;
        let omega: f64 = 1.7;
        let mass = 1.2;
        let t_max: f64 = 2.0;
        let n = 32_769;
        let times = UniformGrid::new(0.0, t_max / (n - 1) as f64, n).unwrap();
        let paths = PathPair::new(times, vec![x0; n], vec![x0 + delta; n]).unwrap();
        let osc = vacuum_osc(mass, omega, gamma);
        let phi = phase_vacuum(&paths, &osc, 1.0).unwrap();

        let g_sum = gamma * (2.0 * x0 + delta);
        let g_diff = -gamma * delta;
        let re_exact = g_sum * g_diff / (2.0 * mass * omega)
            * (t_max / omega - (omega * t_max).sin() / (omega * omega));
        let im_exact = g_diff * g_diff * (2.0 - 2.0 * (omega * t_max).cos())
            / (omega * omega)
            / (4.0 * mass * omega);
        assert_relative_eq!(phi.re, re_exact, epsilon = 1e-9);
        assert_relative_eq!(phi.im, im_exact, epsilon = 1e-9);
    }

    #[test]
    fn vacuum_im_is_nonnegative_and_matches_gram_route() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let paths = smooth_random_paths(&mut rng, 41, 1.5);
            let osc = vacuum_osc(1.0, rng.random_range(0.3..4.0), rng.random_range(-1.5..1.5));
            let phi = phase_vacuum(&paths, &osc, 1.0).unwrap();
            assert!(phi.im >= -1e-10, "negative damping {}", phi.im);
        }
        // Gram oracle on one pair: the discretized cos kernel is the PSD
        // rank-2 form v_c v_c^T + v_s v_s^T
        let paths = smooth_random_paths(&mut rng, 61, 2.0);
        let osc = vacuum_osc(1.3, 1.1, 0.9);
        let phi = phase_vacuum(&paths, &osc, 1.0).unwrap();
        let r = Resolved::build(&paths, &osc.coupling).unwrap();
        let gram = r.square_double_sum(|s, t| (osc.omega * (s - t)).cos());
        assert_relative_eq!(phi.im, gram / (4.0 * osc.mass * osc.omega), max_relative = 1e-10);
        assert!(gram >= 0.0);
    }

    #[test]
    fn swap_flips_re_and_keeps_im() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..50 {
            let paths = smooth_random_paths(&mut rng, 81, 2.0);
            let swapped = paths.swapped();
            let osc = vacuum_osc(1.0, 1.4, 0.8);
            let a = phase_vacuum(&paths, &osc, 1.0).unwrap();
            let b = phase_vacuum(&swapped, &osc, 1.0).unwrap();
            let scale = a.re.abs().max(a.im.abs()).max(1e-30);
            assert!((a.re + b.re).abs() <= 1e-10 * scale);
            assert!((a.im - b.im).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn packet_drive_terms_vanish_at_origin() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let paths = smooth_random_paths(&mut rng, 101, 2.0);
        let mut osc = vacuum_osc(1.0, 1.0, 0.7);
        osc.initial = OscillatorInitial::Packet { u0: 0.0, p0: 0.0, delta: 0.8 };
        let packet = phase_gaussian_packet(&paths, &osc, 1.0).unwrap();
        let vac = phase_vacuum(&paths, &osc, 1.0).unwrap();
        assert_relative_eq!(packet.re, vac.re, max_relative = 1e-12);
    }

    #[test]
    fn coherent_width_reduces_packet_to_vacuum() {
        // delta^2 = hbar / (2 M omega): the cos(s + t - 2 t_a) kernel
        // coefficient vanishes and Phi_G = Phi_vac
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let mass: f64 = 1.4;
        let omega: f64 = 0.9;
        let hbar: f64 = 1.0;
        let delta = (0.5 * hbar / (mass * omega)).sqrt();
        for _ in 0..100 {
            let paths = smooth_random_paths(&mut rng, 61, 1.7);
            let mut osc = vacuum_osc(mass, omega, 1.1);
            osc.initial = OscillatorInitial::Packet { u0: 0.0, p0: 0.0, delta };
            let packet = phase_gaussian_packet(&paths, &osc, hbar).unwrap();
            let vac = phase_vacuum(&paths, &osc, hbar).unwrap();
            let scale = vac.re.abs().max(vac.im.abs()).max(1e-30);
            assert!((packet.re - vac.re).abs() <= 1e-8 * scale);
            assert!((packet.im - vac.im).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn packet_matches_general_route_on_random_paths() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..100 {
            let paths = smooth_random_paths(&mut rng, 61, 2.0);
            let mut osc = vacuum_osc(1.2, 1.6, 0.9);
            osc.initial = OscillatorInitial::Packet {
                u0: rng.random_range(-1.0..1.0),
                p0: rng.random_range(-1.0..1.0),
                delta: rng.random_range(0.4..1.8),
            };
            let closed = phase_gaussian_packet(&paths, &osc, 1.0).unwrap();
            let general = phase_single_general(&paths, &osc, 1.0).unwrap();
            let scale = closed.re.abs().max(closed.im.abs()).max(1e-30);
            assert!((closed.re - general.re).abs() <= 1e-8 * scale);
            assert!((closed.im - general.im).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn thermal_scaling_and_limits() {
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        let paths = smooth_random_paths(&mut rng, 101, 2.0);
        let mut osc = vacuum_osc(1.0, 1.1, 0.8);
        let vac = phase_vacuum(&paths, &osc, 1.0).unwrap();

        // beta -> infinity reduces to the vacuum phase
        osc.initial = OscillatorInitial::Thermal { beta: 60.0 };
        let cold = phase_thermal(&paths, &osc, 1.0).unwrap();
        assert_relative_eq!(cold.im, vac.im, max_relative = 1e-10);
        assert_eq!(cold.re, vac.re);

        // exact coth ratio at any beta
        for &beta in &[0.1, 1.0, 10.0] {
            osc.initial = OscillatorInitial::Thermal { beta };
            let eq = phase_thermal(&paths, &osc, 1.0).unwrap();
            let coth = 1.0 / (0.5 * beta * osc.omega).tanh();
            assert_relative_eq!(eq.im / vac.im, coth, max_relative = 1e-10);
        }
    }

    #[test]
    fn thermal_matches_general_route() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let paths = smooth_random_paths(&mut rng, 81, 1.5);
        let mut osc = vacuum_osc(0.9, 1.3, 1.0);
        osc.initial = OscillatorInitial::Thermal { beta: 0.7 };
        let closed = phase_thermal(&paths, &osc, 1.0).unwrap();
        let general = phase_single_general(&paths, &osc, 1.0).unwrap();
        let scale = closed.re.abs().max(closed.im.abs());
        assert!((closed.re - general.re).abs() <= 1e-8 * scale);
        assert!((closed.im - general.im).abs() <= 1e-8 * scale);
    }

    #[test]
    fn general_route_accepts_grid_initial_state() {
        let mut rng = ChaCha12Rng::seed_from_u64(29);
        let paths = smooth_random_paths(&mut rng, 61, 1.5);
        let beta = 1.1;
        let thermal = crate::states::thermal_oscillator(1.0, 1.2, beta, 1.0).unwrap();
        let sx = thermal.cov[0][0].sqrt();
        let sp = thermal.cov[1][1].sqrt();
        let x_axis = UniformGrid::from_span(-8.0 * sx, 8.0 * sx, 201).unwrap();
        let p_axis = UniformGrid::from_span(-8.0 * sp, 8.0 * sp, 201).unwrap();
        let grid = thermal.render(&x_axis, &p_axis).unwrap();

        let mut osc = vacuum_osc(1.0, 1.2, 0.8);
        osc.initial = OscillatorInitial::Grid(grid);
        let from_grid = phase_single_general(&paths, &osc, 1.0).unwrap();
        osc.initial = OscillatorInitial::Thermal { beta };
        let closed = phase_thermal(&paths, &osc, 1.0).unwrap();
        let scale = closed.re.abs().max(closed.im.abs());
        assert!((from_grid.re - closed.re).abs() <= 1e-6 * scale);
        assert!((from_grid.im - closed.im).abs() <= 1e-6 * scale);
    }

    #[test]
    fn strongly_separated_paths_stay_finite_in_log_space() {
        let times = UniformGrid::new(0.0, 0.01, 201).unwrap();
        let paths = PathPair::new(times, vec![60.0; 201], vec![-60.0; 201]).unwrap();
        let mut osc = vacuum_osc(1.0, 1.0, 5.0);
        osc.initial = OscillatorInitial::Thermal { beta: 0.01 };
        let phi = phase_single_general(&paths, &osc, 1.0).unwrap();
        assert!(phi.im > 1e4 && phi.im.is_finite());
        assert_eq!(phi.abs_f(1.0), 0.0);
    }

    #[test]
    fn collection_adds_phases() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let paths = smooth_random_paths(&mut rng, 81, 2.0);
        let osc = vacuum_osc(1.0, 1.5, 0.6);
        let single = phase_collection(&paths, std::slice::from_ref(&osc), 1.0).unwrap();
        let direct = phase_vacuum(&paths, &osc, 1.0).unwrap();
        assert_eq!(single, direct);

        let doubled = phase_collection(&paths, &[osc.clone(), osc.clone()], 1.0).unwrap();
        assert_relative_eq!(doubled.re, 2.0 * direct.re, max_relative = 1e-14);
        assert_relative_eq!(doubled.im, 2.0 * direct.im, max_relative = 1e-14);
    }

    #[test]
    fn two_thermal_oscillators_match_displayed_double_sum() {
        // direct evaluation of the N-term closed form with naive double
        // sums, against phase_collection
        let mut rng = ChaCha12Rng::seed_from_u64(37);
        let paths = smooth_random_paths(&mut rng, 81, 1.8);
        let beta = 0.9;
        let params = [(1.0, 1.2, 0.7), (1.7, 0.6, -0.4)];
        let oscillators: Vec<OscillatorSpec> = params
            .iter()
            .map(|&(m, w, g)| {
                OscillatorSpec::new(m, w, Coupling::Bilinear(g), OscillatorInitial::Thermal {
                    beta,
                })
                .unwrap()
            })
            .collect();
        let total = phase_collection(&paths, &oscillators, 1.0).unwrap();

        let mut re = 0.0;
        let mut im = 0.0;
        let n = paths.times().len();
        let w = trapezoid_weights(n, paths.times().step());
        for &(mass, omega, g) in &params {
            for i in 0..n {
                let t = paths.times().value(i);
                let dt_i = g * (paths.x()[i] - paths.x_prime()[i]);
                for j in 0..n {
                    let s = paths.times().value(j);
                    let dt_j = g * (paths.x()[j] - paths.x_prime()[j]);
                    let st_j = g * (paths.x()[j] + paths.x_prime()[j]);
                    if j <= i {
                        let wj = if j == 0 || j == i {
                            0.5 * paths.times().step()
                        } else {
                            paths.times().step()
                        };
                        re += w[i] * wj * st_j * dt_i * (omega * (t - s)).sin()
                            / (2.0 * mass * omega);
                    }
                    im += w[i] * w[j] * dt_i * dt_j * (omega * (t - s)).cos()
                        * coth(0.5 * beta * omega)
                        / (4.0 * mass * omega);
                }
            }
        }
        assert_relative_eq!(total.re, re, max_relative = 1e-8);
        assert_relative_eq!(total.im, im, max_relative = 1e-8);
    }

    #[test]
    fn quadrature_is_second_order_on_smooth_paths() {
        // halving the step cuts the phase error by at least 3.5x
        let gamma = 0.8;
        let omega = 1.7;
        let mass = 1.2;
        let t_max = 2.0;
        let phi_at = |n: usize| {
            let times = UniformGrid::new(0.0, t_max / (n - 1) as f64, n).unwrap();
            let x: Vec<f64> = (0..n).map(|i| (1.1 * times.value(i)).sin()).collect();
            let xp: Vec<f64> = (0..n).map(|i| (0.7 * times.value(i)).cos()).collect();
            let paths = PathPair::new(times, x, xp).unwrap();
            phase_vacuum(&paths, &vacuum_osc(mass, omega, gamma), 1.0).unwrap()
        };
        let reference = phi_at(65_537);
        let coarse = phi_at(257);
        let fine = phi_at(513);
        let err_coarse = (coarse.re - reference.re).abs() + (coarse.im - reference.im).abs();
        let err_fine = (fine.re - reference.re).abs() + (fine.im - reference.im).abs();
        let ratio = err_coarse / err_fine;
        assert!(ratio >= 3.5, "convergence ratio {ratio}");
    }

    // -------------------------------------------------------------
    // memory kernels and the continuum phase
    // -------------------------------------------------------------

    #[test]
    fn kernel_a_vanishes_at_zero_lag() {
        let lines = SpectralDensity::Lines(vec![
            SpectralLine { omega: 1.0, weight: 0.5 },
            SpectralLine { omega: 2.5, weight: 0.1 },
        ]);
        let kernels = kernels_from_spectral_density(&lines, 1.0, 1.0, 3.0, 61).unwrap();
        assert_eq!(kernels.a()[0], 0.0);
        let ohmic =
            SpectralDensity::Ohmic { eta: 0.4, cutoff: 10.0, shape: CutoffShape::Exponential };
        let kernels = kernels_from_spectral_density(&ohmic, 5.0, 1.0, 2.0, 41).unwrap();
        assert!(kernels.a()[0].abs() < 1e-12);
    }

    #[test]
    fn single_line_reduces_to_one_oscillator_kernels() {
        let gamma: f64 = 0.8;
        let mass = 1.3;
        let omega0: f64 = 1.9;
        let beta = 1.1;
        let weight = gamma * gamma / (mass * omega0);
        let sd = SpectralDensity::Lines(vec![SpectralLine { omega: omega0, weight }]);
        let kernels = kernels_from_spectral_density(&sd, beta, 1.0, 4.0, 101).unwrap();
        for i in 0..kernels.times().len() {
            let t = kernels.times().value(i);
            assert_relative_eq!(kernels.a()[i], weight * (omega0 * t).sin(), epsilon = 1e-13);
            assert_relative_eq!(
                kernels.r()[i],
                0.25 * weight * (0.5 * beta * omega0).tanh().recip() * (omega0 * t).cos(),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn ohmic_high_t_noise_mass_matches_arctan_form() {
        // integral of R over [0, t_max] approaches
        // (eta k T_b / pi) arctan(omega_c t_max): half the white-noise
        // delta mass once omega_c t_max >> 1
        let eta = 0.7;
        let beta = 0.02; // high temperature
        let cutoff: f64 = 250.0;
        let t_max = 2.0;
        let n_t = 20_001;
        let sd = SpectralDensity::Ohmic { eta, cutoff, shape: CutoffShape::Exponential };
        let kernels = kernels_from_spectral_density(&sd, beta, 1.0, t_max, n_t).unwrap();
        let integral = crate::quadrature::trapezoid(kernels.r(), kernels.times().step());
        let expected = eta / beta * (cutoff * t_max).atan() / std::f64::consts::PI;
        assert_relative_eq!(integral, expected, max_relative = 1e-2);
        assert_relative_eq!(integral, 0.5 * eta / beta, max_relative = 1e-2);
    }

    #[test]
    fn continuum_phase_matches_thermal_for_single_line() {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        let paths = smooth_random_paths(&mut rng, 201, 2.0);
        let gamma: f64 = 0.9;
        let mass = 1.1;
        let omega0 = 1.4;
        let beta = 0.8;
        let weight = gamma * gamma / (mass * omega0);
        let sd = SpectralDensity::Lines(vec![SpectralLine { omega: omega0, weight }]);
        // kernels sampled exactly on the path grid
        let kernels = kernels_from_spectral_density(
            &sd,
            beta,
            1.0,
            paths.duration(),
            paths.times().len(),
        )
        .unwrap();
        let continuum = phase_continuum(&paths, &kernels, 1.0).unwrap();
        let osc = OscillatorSpec::new(
            mass,
            omega0,
            Coupling::Bilinear(gamma),
            OscillatorInitial::Thermal { beta },
        )
        .unwrap();
        let thermal = phase_thermal(&paths, &osc, 1.0).unwrap();
        let scale = thermal.re.abs().max(thermal.im.abs());
        assert!(
            (continuum.re - thermal.re).abs() <= 1e-6 * scale,
            "re {} vs {}",
            continuum.re,
            thermal.re
        );
        assert!(
            (continuum.im - thermal.im).abs() <= 1e-6 * scale,
            "im {} vs {}",
            continuum.im,
            thermal.im
        );
    }

    #[test]
    fn continuum_phase_vanishes_on_diagonal_paths() {
        let times = UniformGrid::new(0.0, 0.02, 101).unwrap();
        let x: Vec<f64> = (0..101).map(|i| (0.3 * i as f64).sin()).collect();
        let paths = PathPair::new(times, x.clone(), x).unwrap();
        let sd = SpectralDensity::Ohmic { eta: 0.5, cutoff: 20.0, shape: CutoffShape::Sharp };
        let kernels = kernels_from_spectral_density(&sd, 0.5, 1.0, 2.0, 501).unwrap();
        let phi = phase_continuum(&paths, &kernels, 1.0).unwrap();
        assert_eq!(phi.re, 0.0);
        assert_eq!(phi.im, 0.0);
    }

    #[test]
    fn ohmic_delta_limit_reproduces_white_noise_weight() {
        // Im Phi -> (eta k T_b / hbar) integral (x - x')^2 dt once the
        // cutoff runs past the path resolution. A reduced-size version;
        // the acceptance suite runs the full omega_c = 100 / dt case.
        let mut rng = ChaCha12Rng::seed_from_u64(43);
        let n = 33;
        let t_max = 0.5;
        let paths = smooth_random_paths(&mut rng, n, t_max);
        let dt_path = paths.times().step();
        let eta = 0.6;
        let beta = 0.01;
        let cutoff = 50.0 / dt_path;
        let sd = SpectralDensity::Ohmic { eta, cutoff, shape: CutoffShape::Exponential };
        let n_t = 8001;
        let kernels = kernels_from_spectral_density(&sd, beta, 1.0, t_max, n_t).unwrap();
        let phi = phase_continuum(&paths, &kernels, 1.0).unwrap();
        let diff_sq: Vec<f64> = (0..n)
            .map(|i| {
                let d = paths.x()[i] - paths.x_prime()[i];
                d * d
            })
            .collect();
        let target = eta / beta * crate::quadrature::trapezoid(&diff_sq, dt_path);
        assert_relative_eq!(phi.im, target, max_relative = 0.02);
    }

    #[test]
    fn kernel_grid_mismatch_is_rejected() {
        let times = UniformGrid::new(0.0, 0.1, 21).unwrap();
        let paths = PathPair::new(times, vec![1.0; 21], vec![0.0; 21]).unwrap();
        let sd = SpectralDensity::Lines(vec![SpectralLine { omega: 1.0, weight: 0.3 }]);
        // too short
        let short = kernels_from_spectral_density(&sd, 1.0, 1.0, 1.0, 51).unwrap();
        assert!(matches!(
            phase_continuum(&paths, &short, 1.0),
            Err(InfluenceError::GridMismatch(_))
        ));
        // too coarse
        let coarse = kernels_from_spectral_density(&sd, 1.0, 1.0, 2.0, 11).unwrap();
        assert!(matches!(
            phase_continuum(&paths, &coarse, 1.0),
            Err(InfluenceError::GridMismatch(_))
        ));
    }
}
