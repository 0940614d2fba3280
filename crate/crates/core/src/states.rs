//! Wigner distributions: exact Gaussian states, sampled phase-space
//! grids, position-basis density matrices, and the transform pair
//! between them.
//!
//! Conventions. A density matrix on `n` uniform position nodes with
//! spacing `dx` transforms to a Wigner grid whose x-axis has `2n - 1`
//! nodes with spacing `dx / 2` (the antidiagonal midpoints of rho). For
//! the transform pair to invert exactly, the momentum axis must satisfy
//! the Nyquist relation `dp * (2 dx) * n_p = 2 pi hbar`; the axis built
//! by [`nyquist_p_axis`] uses zero-padding factor 2 (`n_p = 2 n`), which
//! also suppresses aliasing when states approach the grid edge. Grid
//! values are stored row-major, x index outer, p index inner.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{map_indexed, pairwise_sum};
use crate::grid::{GridError, UniformGrid};

pub const NORM_TOL: f64 = 1e-6;
const PURITY_TOL: f64 = 1e-6;
const HERMITICITY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum StateError {
    #[error("packet width must be positive, got {0}")]
    NonPositiveWidth(f64),
    #[error("parameter {name} must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("covariance must be symmetric positive definite")]
    NotPositiveDefinite,
    #[error("state violates the uncertainty bound: det cov = {det}, (hbar/2)^2 = {bound}")]
    UncertaintyViolation { det: f64, bound: f64 },
    #[error("grid state is not normalized: integral = {0}")]
    NormalizationError(f64),
    #[error("grid state violates the purity bound: 2 pi hbar integral f^2 = {0}")]
    PurityViolation(f64),
    #[error("density matrix is not Hermitian: residue {0}")]
    NonHermitian(f64),
    #[error("axis is not usable: {0}")]
    NonUniformGrid(#[from] GridError),
    #[error("momentum axis is not Nyquist-compatible: dp * 2 dx * n_p / (2 pi hbar) = {0}")]
    NyquistMismatch(f64),
    #[error("Wigner x-axis must have an odd node count for the inverse transform, got {0}")]
    EvenNodeCount(usize),
    #[error("transform output has a non-negligible imaginary part: {0}")]
    ImaginaryResidue(f64),
    #[error("state contains non-finite values")]
    NonFinite,
    #[error("grid does not capture the state: norm on the grid is {0}")]
    GridTooSmall(f64),
}

/// A normalized Gaussian Wigner state: mean vector and 2x2 covariance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianWignerState {
    /// Mean `(x, p)`.
    pub mean: [f64; 2],
    /// Covariance `[[s_xx, s_xp], [s_xp, s_pp]]`.
    pub cov: [[f64; 2]; 2],
    pub hbar: f64,
}

impl GaussianWignerState {
    /// Admissibility slack on the pure-state boundary.
    pub fn uncertainty_slack(hbar: f64) -> f64 {
        1e-9 * (0.5 * hbar) * (0.5 * hbar)
    }

    pub fn new(mean: [f64; 2], cov: [[f64; 2]; 2], hbar: f64) -> Result<Self, StateError> {
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(StateError::NonPositiveParameter { name: "hbar", value: hbar });
        }
        if mean.iter().any(|v| !v.is_finite()) || cov.iter().flatten().any(|v| !v.is_finite()) {
            return Err(StateError::NonFinite);
        }
        let asym = (cov[0][1] - cov[1][0]).abs();
        let scale = cov[0][0].abs().max(cov[1][1].abs()).max(1e-300);
        if asym > 1e-12 * scale {
            return Err(StateError::NotPositiveDefinite);
        }
        let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
        if cov[0][0] <= 0.0 || cov[1][1] <= 0.0 || det <= 0.0 {
            return Err(StateError::NotPositiveDefinite);
        }
        let bound = (0.5 * hbar) * (0.5 * hbar);
        if det < bound - Self::uncertainty_slack(hbar) {
            return Err(StateError::UncertaintyViolation { det, bound });
        }
        Ok(Self { mean, cov, hbar })
    }

    pub fn det_cov(&self) -> f64 {
        self.cov[0][0] * self.cov[1][1] - self.cov[0][1] * self.cov[1][0]
    }

    /// Purity `Tr rho^2 = 2 pi hbar integral f^2 = hbar / (2 sqrt(det cov))`.
    pub fn purity(&self) -> f64 {
        0.5 * self.hbar / self.det_cov().sqrt()
    }

    /// Density value at `(x, p)`.
    pub fn value(&self, x: f64, p: f64) -> f64 {
        let dx = x - self.mean[0];
        let dp = p - self.mean[1];
        let det = self.det_cov();
        let quad = (self.cov[1][1] * dx * dx - 2.0 * self.cov[0][1] * dx * dp
            + self.cov[0][0] * dp * dp)
            / det;
        (-0.5 * quad).exp() / (2.0 * std::f64::consts::PI * det.sqrt())
    }

    /// Mean, covariance and norm (1 by construction).
    pub fn moments(&self) -> ([f64; 2], [[f64; 2]; 2], f64) {
        (self.mean, self.cov, 1.0)
    }

    /// Sample the closed form onto a grid. Fails if the grid does not
    /// capture the state to the normalization tolerance.
    pub fn render(
        &self,
        x_axis: &UniformGrid,
        p_axis: &UniformGrid,
    ) -> Result<GridWignerState, StateError> {
        let n_p = p_axis.len();
        let rows = map_indexed(x_axis.len(), |ix| {
            let x = x_axis.value(ix);
            (0..n_p).map(|ip| self.value(x, p_axis.value(ip))).collect::<Vec<f64>>()
        });
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        let norm = pairwise_sum(&values) * x_axis.step() * p_axis.step();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(StateError::GridTooSmall(norm));
        }
        GridWignerState::new(x_axis.clone(), p_axis.clone(), values, self.hbar)
    }
}

/// Minimum-uncertainty Gaussian wave packet centered at `(u0, p0)` with
/// position spread `delta`: `s_xx = delta^2`, `s_pp = hbar^2/(4 delta^2)`.
pub fn gaussian_packet(
    u0: f64,
    p0: f64,
    delta: f64,
    hbar: f64,
) -> Result<GaussianWignerState, StateError> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(StateError::NonPositiveWidth(delta));
    }
    let sxx = delta * delta;
    let spp = hbar * hbar / (4.0 * delta * delta);
    GaussianWignerState::new([u0, p0], [[sxx, 0.0], [0.0, spp]], hbar)
}

/// Thermal harmonic oscillator state at inverse temperature `beta`:
/// spreads grow from the ground-state values by `coth(beta hbar omega / 2)`.
pub fn thermal_oscillator(
    mass: f64,
    omega: f64,
    beta: f64,
    hbar: f64,
) -> Result<GaussianWignerState, StateError> {
    for (name, value) in [("mass", mass), ("omega", omega), ("beta", beta), ("hbar", hbar)] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(StateError::NonPositiveParameter { name, value });
        }
    }
    let tanh = (0.5 * beta * hbar * omega).tanh();
    let sxx = hbar / (2.0 * mass * omega * tanh);
    let spp = 0.5 * mass * hbar * omega / tanh;
    GaussianWignerState::new([0.0, 0.0], [[sxx, 0.0], [0.0, spp]], hbar)
}

/// A Wigner function sampled on a uniform phase-space grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridWignerState {
    x_axis: UniformGrid,
    p_axis: UniformGrid,
    /// Row-major, x outer, p inner: `values[ix * n_p + ip]`.
    values: Vec<f64>,
    hbar: f64,
}

impl GridWignerState {
    /// Validating constructor: finite values, unit norm, purity bound.
    /// Inadmissible data is rejected, never clamped.
    pub fn new(
        x_axis: UniformGrid,
        p_axis: UniformGrid,
        values: Vec<f64>,
        hbar: f64,
    ) -> Result<Self, StateError> {
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(StateError::NonPositiveParameter { name: "hbar", value: hbar });
        }
        assert_eq!(values.len(), x_axis.len() * p_axis.len(), "value buffer shape mismatch");
        if values.iter().any(|v| !v.is_finite()) {
            return Err(StateError::NonFinite);
        }
        let state = Self { x_axis, p_axis, values, hbar };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(StateError::NormalizationError(norm));
        }
        let purity = state.purity();
        if purity > 1.0 + PURITY_TOL {
            return Err(StateError::PurityViolation(purity));
        }
        Ok(state)
    }

    /// Internal constructor for solver pipelines whose outputs carry a
    /// quantified norm drift reported via diagnostics instead.
    pub(crate) fn from_parts_unchecked(
        x_axis: UniformGrid,
        p_axis: UniformGrid,
        values: Vec<f64>,
        hbar: f64,
    ) -> Self {
        assert_eq!(values.len(), x_axis.len() * p_axis.len(), "value buffer shape mismatch");
        Self { x_axis, p_axis, values, hbar }
    }

    pub fn x_axis(&self) -> &UniformGrid {
        &self.x_axis
    }

    pub fn p_axis(&self) -> &UniformGrid {
        &self.p_axis
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, ix: usize, ip: usize) -> f64 {
        self.values[ix * self.p_axis.len() + ip]
    }

    pub fn cell_area(&self) -> f64 {
        self.x_axis.step() * self.p_axis.step()
    }

    pub fn norm(&self) -> f64 {
        pairwise_sum(&self.values) * self.cell_area()
    }

    /// `2 pi hbar integral f^2 dx dp`; 1 for pure states, below 1 for
    /// mixtures, above 1 only for inadmissible data.
    pub fn purity(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        2.0 * std::f64::consts::PI * self.hbar * pairwise_sum(&sq) * self.cell_area()
    }

    /// Position marginal `integral f dp` on the x-axis.
    pub fn marginal_x(&self) -> Vec<f64> {
        let n_p = self.p_axis.len();
        (0..self.x_axis.len())
            .map(|ix| pairwise_sum(&self.values[ix * n_p..(ix + 1) * n_p]) * self.p_axis.step())
            .collect()
    }

    /// Momentum marginal `integral f dx` on the p-axis.
    pub fn marginal_p(&self) -> Vec<f64> {
        let n_p = self.p_axis.len();
        (0..n_p)
            .map(|ip| {
                let col: Vec<f64> =
                    (0..self.x_axis.len()).map(|ix| self.values[ix * n_p + ip]).collect();
                pairwise_sum(&col) * self.x_axis.step()
            })
            .collect()
    }

    /// Quadrature mean, covariance and norm.
    pub fn moments(&self) -> ([f64; 2], [[f64; 2]; 2], f64) {
        let area = self.cell_area();
        let n_p = self.p_axis.len();
        let mut norm = 0.0;
        let mut mx = 0.0;
        let mut mp = 0.0;
        for ix in 0..self.x_axis.len() {
            let x = self.x_axis.value(ix);
            for ip in 0..n_p {
                let w = self.values[ix * n_p + ip] * area;
                norm += w;
                mx += w * x;
                mp += w * self.p_axis.value(ip);
            }
        }
        mx /= norm;
        mp /= norm;
        let (mut sxx, mut sxp, mut spp) = (0.0, 0.0, 0.0);
        for ix in 0..self.x_axis.len() {
            let dx = self.x_axis.value(ix) - mx;
            for ip in 0..n_p {
                let dp = self.p_axis.value(ip) - mp;
                let w = self.values[ix * n_p + ip] * area;
                sxx += w * dx * dx;
                sxp += w * dx * dp;
                spp += w * dp * dp;
            }
        }
        ([mx, mp], [[sxx / norm, sxp / norm], [sxp / norm, spp / norm]], norm)
    }
}

/// Either carrier of a Wigner distribution.
#[derive(Debug, Clone)]
pub enum WignerState {
    Gaussian(GaussianWignerState),
    Grid(GridWignerState),
}

impl WignerState {
    /// Mean vector, covariance matrix and norm: echoed fields for
    /// Gaussians, quadrature moments for grids.
    pub fn moments(&self) -> ([f64; 2], [[f64; 2]; 2], f64) {
        match self {
            WignerState::Gaussian(g) => g.moments(),
            WignerState::Grid(g) => g.moments(),
        }
    }
}

impl From<GaussianWignerState> for WignerState {
    fn from(g: GaussianWignerState) -> Self {
        WignerState::Gaussian(g)
    }
}

impl From<GridWignerState> for WignerState {
    fn from(g: GridWignerState) -> Self {
        WignerState::Grid(g)
    }
}

/// A density matrix sampled on a uniform position grid.
#[derive(Debug, Clone)]
pub struct DensityMatrixGrid {
    x_axis: UniformGrid,
    /// Row-major `n x n`: `rho[j * n + k] = rho(x_j, x_k)`.
    rho: Vec<Complex64>,
}

impl DensityMatrixGrid {
    pub fn new(x_axis: UniformGrid, rho: Vec<Complex64>) -> Result<Self, StateError> {
        let n = x_axis.len();
        assert_eq!(rho.len(), n * n, "density matrix shape mismatch");
        let scale = rho.iter().map(|z| z.norm()).fold(1e-300, f64::max);
        let mut residue: f64 = 0.0;
        for j in 0..n {
            for k in j..n {
                residue = residue.max((rho[j * n + k] - rho[k * n + j].conj()).norm());
            }
        }
        if residue > HERMITICITY_TOL * scale.max(1.0) {
            return Err(StateError::NonHermitian(residue));
        }
        let out = Self { x_axis, rho };
        let trace = out.trace();
        if (trace - 1.0).abs() > NORM_TOL {
            return Err(StateError::NormalizationError(trace));
        }
        Ok(out)
    }

    /// Density matrix of a wave function sampled on the axis:
    /// `rho(x, x') = psi(x) conj(psi(x'))`, normalized on the grid.
    pub fn from_wavefunction(x_axis: UniformGrid, psi: &[Complex64]) -> Result<Self, StateError> {
        assert_eq!(psi.len(), x_axis.len());
        let norm_sq: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * x_axis.step();
        if norm_sq <= 0.0 || !norm_sq.is_finite() {
            return Err(StateError::NonFinite);
        }
        let scale = 1.0 / norm_sq;
        let n = x_axis.len();
        let mut rho = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            for k in 0..n {
                rho[j * n + k] = psi[j] * psi[k].conj() * scale;
            }
        }
        Self::new(x_axis, rho)
    }

    pub fn x_axis(&self) -> &UniformGrid {
        &self.x_axis
    }

    pub fn rho(&self) -> &[Complex64] {
        &self.rho
    }

    pub fn value(&self, j: usize, k: usize) -> Complex64 {
        self.rho[j * self.x_axis.len() + k]
    }

    pub fn trace(&self) -> f64 {
        let n = self.x_axis.len();
        (0..n).map(|j| self.rho[j * n + j].re).sum::<f64>() * self.x_axis.step()
    }

    /// `Tr rho^2` on the grid.
    pub fn purity(&self) -> f64 {
        let dx = self.x_axis.step();
        self.rho.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx * dx
    }
}

/// The Nyquist-matched momentum axis for a density matrix grid with `n`
/// nodes and spacing `dx`: `n_p = pad * n`, `dp = 2 pi hbar / (n_p 2 dx)`,
/// centered on zero with a half-step offset when needed to stay symmetric.
pub fn nyquist_p_axis(n: usize, dx: f64, hbar: f64, pad: usize) -> UniformGrid {
    let n_p = pad.max(1) * n;
    let dp = 2.0 * std::f64::consts::PI * hbar / (n_p as f64 * 2.0 * dx);
    let p_min = -0.5 * dp * (n_p as f64 - 1.0);
    UniformGrid::new(p_min, dp, n_p).expect("nyquist axis")
}

fn check_nyquist(dx_rho: f64, p_axis: &UniformGrid, hbar: f64) -> Result<(), StateError> {
    let ratio =
        p_axis.step() * 2.0 * dx_rho * p_axis.len() as f64 / (2.0 * std::f64::consts::PI * hbar);
    if (ratio - 1.0).abs() > 1e-6 {
        return Err(StateError::NyquistMismatch(ratio));
    }
    Ok(())
}

/// Forward transform: the Wigner function of a gridded density matrix,
/// with `hbar` fixing the phase-space scale.
///
/// `f(x_d, p) = (2 dx / 2 pi hbar) sum_j rho(x_j, x_{d-j}) e^{-i p (2j - d) dx / hbar}`
/// on the antidiagonal midpoints `x_d` (spacing `dx / 2`, `2n - 1` nodes).
/// The imaginary residue is checked against 1e-10 and discarded.
pub fn weyl_to_wigner(
    rho: &DensityMatrixGrid,
    p_axis: &UniformGrid,
    hbar: f64,
) -> Result<GridWignerState, StateError> {
    let n = rho.x_axis().len();
    let dx = rho.x_axis().step();
    check_nyquist(dx, p_axis, hbar)?;
    let n_d = 2 * n - 1;
    let n_p = p_axis.len();
    let x_out = UniformGrid::new(rho.x_axis().start(), 0.5 * dx, n_d).expect("wigner x-axis");
    let prefactor = 2.0 * dx / (2.0 * std::f64::consts::PI * hbar);

    let rows: Vec<(Vec<f64>, f64)> = map_indexed(n_d, |d| {
        let j_lo = d.saturating_sub(n - 1);
        let j_hi = d.min(n - 1);
        let mut row = vec![0.0; n_p];
        let mut max_imag: f64 = 0.0;
        for (ip, slot) in row.iter_mut().enumerate() {
            let p = p_axis.value(ip);
            let mut acc = Complex64::new(0.0, 0.0);
            for j in j_lo..=j_hi {
                let xi = (2.0 * j as f64 - d as f64) * dx;
                let phase = -p * xi / hbar;
                acc += rho.value(j, d - j) * Complex64::new(phase.cos(), phase.sin());
            }
            *slot = prefactor * acc.re;
            max_imag = max_imag.max((prefactor * acc.im).abs());
        }
        (row, max_imag)
    });

    let mut values = Vec::with_capacity(n_d * n_p);
    let mut max_imag: f64 = 0.0;
    for (row, imag) in rows {
        values.extend_from_slice(&row);
        max_imag = max_imag.max(imag);
    }
    let scale = values.iter().fold(1e-300_f64, |a, v| a.max(v.abs()));
    if max_imag > 1e-10 * scale.max(1.0) {
        return Err(StateError::ImaginaryResidue(max_imag));
    }
    GridWignerState::new(x_out, p_axis.clone(), values, hbar)
}

/// Inverse transform: the density matrix of a gridded Wigner function.
///
/// Requires the Wigner x-axis to carry the antidiagonal layout (odd node
/// count); the density matrix lives on every other node. Hermiticity is
/// restored by symmetrization after checking the residue against 1e-8.
pub fn wigner_to_weyl(f: &GridWignerState) -> Result<DensityMatrixGrid, StateError> {
    let n_f = f.x_axis().len();
    if n_f % 2 == 0 {
        return Err(StateError::EvenNodeCount(n_f));
    }
    let purity = f.purity();
    if purity > 1.0 + 1e-4 {
        return Err(StateError::PurityViolation(purity));
    }
    let n = n_f.div_ceil(2);
    let dx = 2.0 * f.x_axis().step();
    let hbar = f.hbar();
    check_nyquist(dx, f.p_axis(), hbar)?;
    let n_p = f.p_axis().len();
    let dp = f.p_axis().step();
    let x_axis = UniformGrid::new(f.x_axis().start(), dx, n).expect("rho axis");

    let rows: Vec<Vec<Complex64>> = map_indexed(n, |j| {
        let mut row = vec![Complex64::new(0.0, 0.0); n];
        for (k, slot) in row.iter_mut().enumerate() {
            let d = j + k;
            let xi = (j as f64 - k as f64) * dx;
            let mut acc = Complex64::new(0.0, 0.0);
            for ip in 0..n_p {
                let phase = f.p_axis().value(ip) * xi / hbar;
                acc += f.value_at(d, ip) * Complex64::new(phase.cos(), phase.sin());
            }
            *slot = acc * dp;
        }
        row
    });
    let mut rho: Vec<Complex64> = rows.into_iter().flatten().collect();
    let scale = rho.iter().map(|z| z.norm()).fold(1e-300, f64::max);
    let mut residue: f64 = 0.0;
    for j in 0..n {
        for k in j + 1..n {
            residue = residue.max((rho[j * n + k] - rho[k * n + j].conj()).norm());
        }
    }
    if residue > 1e-8 * scale.max(1.0) {
        return Err(StateError::NonHermitian(residue));
    }
    for j in 0..n {
        for k in j..n {
            let sym = 0.5 * (rho[j * n + k] + rho[k * n + j].conj());
            rho[j * n + k] = sym;
            rho[k * n + j] = sym.conj();
        }
    }
    DensityMatrixGrid::new(x_axis, rho)
}
