//! Classical dynamics of driven quadratic potentials: homogeneous basis
//! solutions, trajectories, the affine symplectic flow map, boundary
//! velocities of the two-point problem, and the classical action.
//!
//! The equation of motion is `m x'' + 2 c(t) x = -b(t)`. The homogeneous
//! basis is pinned to `x1(t_a) = 1, x1'(t_a) = 0` and `x2(t_a) = 0,
//! x2'(t_a) = 1`, which fixes the Wronskian to `W = x1' x2 - x2' x1 = -1`
//! and makes `f(t, t_a) = h(t, t_a) / W = x2(t)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::UniformGrid;
use crate::interp::hermite;
use crate::potential::{PotentialError, QuadraticPotential};
use crate::quadrature::{cumulative_trapezoid, simpson};

#[derive(Debug, Error)]
pub enum ClassicalError {
    #[error("time interval is empty or reversed: t_a = {t_a}, t_b = {t_b}")]
    NonPositiveInterval { t_a: f64, t_b: f64 },
    #[error("need at least 2 integration steps, got {0}")]
    TooFewSteps(usize),
    #[error(transparent)]
    CoefficientDomain(#[from] PotentialError),
    #[error("time {t} lies outside the solution grid [{lo}, {hi}]")]
    OutOfInterval { t: f64, lo: f64, hi: f64 },
    #[error("conjugate point: |h(t_a, t_b)| = {h_abs} below threshold {threshold}")]
    ConjugatePoint { h_abs: f64, threshold: f64 },
    #[error("trajectory grid is incompatible with the potential sampling")]
    GridMismatch,
}

/// Classic fixed-step RK4 over `[t_a, t_b]`, recording every node.
fn rk4_integrate<const N: usize>(
    t_a: f64,
    t_b: f64,
    n_steps: usize,
    y0: [f64; N],
    deriv: impl Fn(f64, &[f64; N]) -> [f64; N],
) -> Vec<[f64; N]> {
    let h = (t_b - t_a) / n_steps as f64;
    let mut out = Vec::with_capacity(n_steps + 1);
    let mut y = y0;
    out.push(y);
    for step in 0..n_steps {
        let t = t_a + h * step as f64;
        let k1 = deriv(t, &y);
        let mut y2 = y;
        for i in 0..N {
            y2[i] = y[i] + 0.5 * h * k1[i];
        }
        let k2 = deriv(t + 0.5 * h, &y2);
        for i in 0..N {
            y2[i] = y[i] + 0.5 * h * k2[i];
        }
        let k3 = deriv(t + 0.5 * h, &y2);
        for i in 0..N {
            y2[i] = y[i] + h * k3[i];
        }
        let k4 = deriv(t + h, &y2);
        for i in 0..N {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out.push(y);
    }
    out
}

fn check_interval(
    pot: &QuadraticPotential,
    t_a: f64,
    t_b: f64,
    n_steps: usize,
) -> Result<(), ClassicalError> {
    if !(t_b > t_a) {
        return Err(ClassicalError::NonPositiveInterval { t_a, t_b });
    }
    if n_steps < 2 {
        return Err(ClassicalError::TooFewSteps(n_steps));
    }
    pot.validate_interval(t_a, t_b)?;
    Ok(())
}

/// Sampled linearly independent solutions of `m x'' + 2 c(t) x = 0`.
#[derive(Debug, Clone)]
pub struct HomogeneousBasis {
    times: UniformGrid,
    x1: Vec<f64>,
    x1_dot: Vec<f64>,
    x2: Vec<f64>,
    x2_dot: Vec<f64>,
    wronskian: f64,
}

impl HomogeneousBasis {
    pub fn times(&self) -> &UniformGrid {
        &self.times
    }

    pub fn t_a(&self) -> f64 {
        self.times.start()
    }

    pub fn t_b(&self) -> f64 {
        self.times.end()
    }

    /// The Wronskian `x1' x2 - x2' x1`; -1 by construction.
    pub fn wronskian(&self) -> f64 {
        self.wronskian
    }

    fn sample(&self, field: &[f64], dot: &[f64], t: f64) -> Result<f64, ClassicalError> {
        let (cell, u) = self.times.locate(t).ok_or(ClassicalError::OutOfInterval {
            t,
            lo: self.t_a(),
            hi: self.t_b(),
        })?;
        let h = self.times.step();
        Ok(hermite(field[cell], dot[cell] * h, field[cell + 1], dot[cell + 1] * h, u))
    }

    pub fn x1_at(&self, t: f64) -> Result<f64, ClassicalError> {
        self.sample(&self.x1, &self.x1_dot, t)
    }

    pub fn x2_at(&self, t: f64) -> Result<f64, ClassicalError> {
        self.sample(&self.x2, &self.x2_dot, t)
    }

    /// `h(s, t) = x1(s) x2(t) - x2(s) x1(t)`.
    pub fn h(&self, s: f64, t: f64) -> Result<f64, ClassicalError> {
        Ok(self.x1_at(s)? * self.x2_at(t)? - self.x2_at(s)? * self.x1_at(t)?)
    }

    /// `f(t, t_a) = h(t, t_a) / W`, satisfying `f(t_a, t_a) = 0` and
    /// `f'(t_a) = 1`.
    pub fn f_function(&self, t: f64) -> Result<f64, ClassicalError> {
        Ok(self.h(t, self.t_a())? / self.wronskian)
    }

    /// Largest relative violation of Wronskian constancy over the grid.
    pub fn wronskian_drift(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.times.len() {
            let w = self.x1_dot[i] * self.x2[i] - self.x2_dot[i] * self.x1[i];
            worst = worst.max((w - self.wronskian).abs() / self.wronskian.abs());
        }
        worst
    }

    fn node_values(&self) -> (&[f64], &[f64], &[f64], &[f64]) {
        (&self.x1, &self.x1_dot, &self.x2, &self.x2_dot)
    }
}

/// Integrate the homogeneous basis of `m x'' + 2 c(t) x = 0`.
pub fn solve_homogeneous(
    pot: &QuadraticPotential,
    t_a: f64,
    t_b: f64,
    n_steps: usize,
) -> Result<HomogeneousBasis, ClassicalError> {
    check_interval(pot, t_a, t_b, n_steps)?;
    let m = pot.m;
    let c = &pot.c;
    // state: (x1, v1, x2, v2)
    let nodes = rk4_integrate(t_a, t_b, n_steps, [1.0, 0.0, 0.0, 1.0], |t, y| {
        let acc = -2.0 * c.eval_raw(t) / m;
        [y[1], acc * y[0], y[3], acc * y[2]]
    });
    let times = UniformGrid::new(t_a, (t_b - t_a) / n_steps as f64, n_steps + 1)
        .expect("validated interval");
    Ok(HomogeneousBasis {
        times,
        x1: nodes.iter().map(|y| y[0]).collect(),
        x1_dot: nodes.iter().map(|y| y[1]).collect(),
        x2: nodes.iter().map(|y| y[2]).collect(),
        x2_dot: nodes.iter().map(|y| y[3]).collect(),
        wronskian: -1.0,
    })
}

/// A sampled classical trajectory of `m x'' + 2 c(t) x = -b(t)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassicalTrajectory {
    pub times: UniformGrid,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub x_a: f64,
    pub p_a: f64,
}

impl ClassicalTrajectory {
    pub fn endpoint(&self) -> (f64, f64) {
        (*self.x.last().unwrap(), *self.p.last().unwrap())
    }
}

/// Integrate the driven equation of motion from `(x_a, p_a)`.
pub fn classical_trajectory(
    pot: &QuadraticPotential,
    x_a: f64,
    p_a: f64,
    t_a: f64,
    t_b: f64,
    n_steps: usize,
) -> Result<ClassicalTrajectory, ClassicalError> {
    check_interval(pot, t_a, t_b, n_steps)?;
    let m = pot.m;
    let nodes = rk4_integrate(t_a, t_b, n_steps, [x_a, p_a], |t, y| {
        [y[1] / m, -pot.b.eval_raw(t) - 2.0 * pot.c.eval_raw(t) * y[0]]
    });
    let times = UniformGrid::new(t_a, (t_b - t_a) / n_steps as f64, n_steps + 1)
        .expect("validated interval");
    Ok(ClassicalTrajectory {
        times,
        x: nodes.iter().map(|y| y[0]).collect(),
        p: nodes.iter().map(|y| y[1]).collect(),
        x_a,
        p_a,
    })
}

/// The classical flow `(x, p) -> M (x, p) + d` of a quadratic potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineSymplecticMap {
    /// Row-major 2x2 matrix.
    pub matrix: [[f64; 2]; 2],
    /// Drift vector `(x, p)`.
    pub drift: [f64; 2],
}

impl AffineSymplecticMap {
    pub fn identity() -> Self {
        Self { matrix: [[1.0, 0.0], [0.0, 1.0]], drift: [0.0, 0.0] }
    }

    pub fn det(&self) -> f64 {
        self.matrix[0][0] * self.matrix[1][1] - self.matrix[0][1] * self.matrix[1][0]
    }

    pub fn apply(&self, z: [f64; 2]) -> [f64; 2] {
        [
            self.matrix[0][0] * z[0] + self.matrix[0][1] * z[1] + self.drift[0],
            self.matrix[1][0] * z[0] + self.matrix[1][1] * z[1] + self.drift[1],
        ]
    }

    /// Exact inverse of the affine map.
    pub fn inverse(&self) -> Self {
        let det = self.det();
        let inv = [
            [self.matrix[1][1] / det, -self.matrix[0][1] / det],
            [-self.matrix[1][0] / det, self.matrix[0][0] / det],
        ];
        let d = [
            -(inv[0][0] * self.drift[0] + inv[0][1] * self.drift[1]),
            -(inv[1][0] * self.drift[0] + inv[1][1] * self.drift[1]),
        ];
        Self { matrix: inv, drift: d }
    }

    /// `self` after `earlier`: the composite map `z -> self(earlier(z))`.
    pub fn after(&self, earlier: &Self) -> Self {
        let a = &self.matrix;
        let b = &earlier.matrix;
        let matrix = [
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ];
        let drift = [
            a[0][0] * earlier.drift[0] + a[0][1] * earlier.drift[1] + self.drift[0],
            a[1][0] * earlier.drift[0] + a[1][1] * earlier.drift[1] + self.drift[1],
        ];
        Self { matrix, drift }
    }
}

/// Build the flow map by integrating the two unit initial conditions and
/// the driven zero trajectory in one pass (the initial-value route, valid
/// through conjugate points).
pub fn flow_map(
    pot: &QuadraticPotential,
    t_a: f64,
    t_b: f64,
    n_steps: usize,
) -> Result<AffineSymplecticMap, ClassicalError> {
    check_interval(pot, t_a, t_b, n_steps)?;
    let m = pot.m;
    // state: (x|e1, p|e1, x|e2, p|e2, x|drift, p|drift)
    let nodes = rk4_integrate(t_a, t_b, n_steps, [1.0, 0.0, 0.0, 1.0, 0.0, 0.0], |t, y| {
        let b = pot.b.eval_raw(t);
        let k = -2.0 * pot.c.eval_raw(t);
        [y[1] / m, k * y[0], y[3] / m, k * y[2], y[5] / m, k * y[4] - b]
    });
    let last = nodes.last().unwrap();
    Ok(AffineSymplecticMap {
        matrix: [[last[0], last[2]], [last[1], last[3]]],
        drift: [last[4], last[5]],
    })
}

/// Boundary velocities of the two-point problem `x(t_a) = x_a`,
/// `x(t_b) = x_b`, from the homogeneous basis. Refused near conjugate
/// points where `h(t_a, t_b)` vanishes.
pub fn bvp_boundary_velocities(
    basis: &HomogeneousBasis,
    pot: &QuadraticPotential,
    x_a: f64,
    x_b: f64,
) -> Result<(f64, f64), ClassicalError> {
    let (x1, x1_dot, x2, x2_dot) = basis.node_values();
    let n = basis.times.len();
    let last = n - 1;
    let h_ab = x2[last];
    let scale = x2.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())).max(basis.times.span());
    let threshold = 1e-9 * scale;
    if h_ab.abs() < threshold {
        return Err(ClassicalError::ConjugatePoint { h_abs: h_ab.abs(), threshold });
    }
    let w = basis.wronskian;
    let dh_dta = -x1[last];
    let dh_dtb = x2_dot[last];
    let m = pot.m;
    let step = basis.times.step();
    // h(s, t_b) and h(t_a, s) sampled over the grid
    let b_h_s_tb: Vec<f64> = (0..n)
        .map(|i| {
            let t = basis.times.value(i);
            pot.b.eval_raw(t) / m * (x1[i] * x2[last] - x2[i] * x1[last])
        })
        .collect();
    let b_h_ta_s: Vec<f64> = (0..n)
        .map(|i| {
            let t = basis.times.value(i);
            pot.b.eval_raw(t) / m * x2[i]
        })
        .collect();
    let int_s_tb = simpson(&b_h_s_tb, step);
    let int_ta_s = simpson(&b_h_ta_s, step);
    let v_a = (x_a * dh_dta - x_b * w + int_s_tb) / h_ab;
    let v_b = (x_a * w + x_b * dh_dtb - int_ta_s) / h_ab;
    let _ = x1_dot;
    Ok((v_a, v_b))
}

/// Classical action along a trajectory: Simpson quadrature of the
/// Lagrangian `m x'^2 / 2 - a - b x - c x^2`.
pub fn classical_action(
    pot: &QuadraticPotential,
    traj: &ClassicalTrajectory,
) -> Result<f64, ClassicalError> {
    pot.validate_interval(traj.times.start(), traj.times.end())
        .map_err(|_| ClassicalError::GridMismatch)?;
    let m = pot.m;
    let lagrangian: Vec<f64> = (0..traj.times.len())
        .map(|i| {
            let t = traj.times.value(i);
            let x = traj.x[i];
            let v = traj.p[i] / m;
            0.5 * m * v * v
                - pot.a.eval_raw(t)
                - pot.b.eval_raw(t) * x
                - pot.c.eval_raw(t) * x * x
        })
        .collect();
    Ok(simpson(&lagrangian, traj.times.step()))
}

/// Classical action in the boundary-term form built from the homogeneous
/// basis: boundary contributions, drive integrals against `h`, the
/// particular solution, and the `-integral of a(t)` offset.
pub fn classical_action_boundary(
    pot: &QuadraticPotential,
    basis: &HomogeneousBasis,
    x_a: f64,
    x_b: f64,
) -> Result<f64, ClassicalError> {
    let (x1, _, x2, x2_dot) = basis.node_values();
    let n = basis.times.len();
    let last = n - 1;
    let h_ab = x2[last];
    let scale = x2.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())).max(basis.times.span());
    let threshold = 1e-9 * scale;
    if h_ab.abs() < threshold {
        return Err(ClassicalError::ConjugatePoint { h_abs: h_ab.abs(), threshold });
    }
    let m = pot.m;
    let w = basis.wronskian;
    let step = basis.times.step();
    let dh_dta = -x1[last];
    let dh_dtb = x2_dot[last];

    let b_over_m: Vec<f64> = (0..n)
        .map(|i| pot.b.eval_raw(basis.times.value(i)) / m)
        .collect();
    let h_ta_s: Vec<f64> = x2.to_vec();
    let h_s_tb: Vec<f64> = (0..n).map(|i| x1[i] * x2[last] - x2[i] * x1[last]).collect();

    let int_ta_s = simpson(
        &b_over_m.iter().zip(&h_ta_s).map(|(b, h)| b * h).collect::<Vec<_>>(),
        step,
    );
    let int_s_tb = simpson(
        &b_over_m.iter().zip(&h_s_tb).map(|(b, h)| b * h).collect::<Vec<_>>(),
        step,
    );

    // particular solution via cumulative integrals
    let prefix = cumulative_trapezoid(
        &b_over_m.iter().zip(&h_ta_s).map(|(b, h)| b * h / w).collect::<Vec<_>>(),
        step,
    );
    let suffix_total = prefix.last().copied().unwrap_or(0.0);
    let suffix_from = |i: usize| -> f64 {
        // integral from t_i to t_b of (b/m) h(s, t_b)/W ds
        suffix_tail(&b_over_m, &h_s_tb, w, step, i)
    };
    let x_p: Vec<f64> = (0..n)
        .map(|i| {
            let h_t_tb = x1[i] * x2[last] - x2[i] * x1[last];
            let h_ta_t = x2[i];
            -(h_t_tb / h_ab) * prefix[i] - (h_ta_t / h_ab) * suffix_from(i)
        })
        .collect();
    let _ = suffix_total;
    let b_xp: Vec<f64> = (0..n)
        .map(|i| pot.b.eval_raw(basis.times.value(i)) * x_p[i])
        .collect();
    let a_vals: Vec<f64> = (0..n).map(|i| pot.a.eval_raw(basis.times.value(i))).collect();

    let boundary = m / h_ab
        * (0.5 * (x_b * x_b * dh_dtb - x_a * x_a * dh_dta) + w * x_a * x_b
            - x_b * int_ta_s
            - x_a * int_s_tb);
    Ok(boundary - 0.5 * simpson(&b_xp, step) - simpson(&a_vals, step))
}

fn suffix_tail(b_over_m: &[f64], h_s_tb: &[f64], w: f64, step: f64, from: usize) -> f64 {
    let n = b_over_m.len();
    let mut acc = 0.0;
    for i in from..n - 1 {
        let f0 = b_over_m[i] * h_s_tb[i] / w;
        let f1 = b_over_m[i + 1] * h_s_tb[i + 1] / w;
        acc += 0.5 * step * (f0 + f1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Coefficient;
    use approx::assert_relative_eq;

    fn constant_force(m: f64, b: f64) -> QuadraticPotential {
        QuadraticPotential::new(m, Coefficient::zero(), Coefficient::Const(b), Coefficient::zero())
            .unwrap()
    }

    #[test]
    fn free_particle_basis_is_linear() {
        let pot = QuadraticPotential::free(1.0);
        let basis = solve_homogeneous(&pot, 0.0, 2.0, 256).unwrap();
        assert_relative_eq!(basis.x1_at(1.7).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(basis.x2_at(1.7).unwrap(), 1.7, max_relative = 1e-12);
        assert_eq!(basis.wronskian(), -1.0);
        assert!(basis.wronskian_drift() < 1e-12);
    }

    #[test]
    fn harmonic_basis_matches_sin_cos_oracle() {
        // oracle: x1 = cos t, x2 = sin t for m = 1, c = 1/2 (omega = 1)
        let pot = QuadraticPotential::harmonic(1.0, 1.0);
        let basis = solve_homogeneous(&pot, 0.0, 3.5, 4096).unwrap();
        for &t in &[0.3, 1.0, 2.2, 3.5] {
            assert_relative_eq!(basis.x1_at(t).unwrap(), t.cos(), epsilon = 1e-9);
            assert_relative_eq!(basis.x2_at(t).unwrap(), t.sin(), epsilon = 1e-9);
        }
        // f(t, 0) = sin(t): f(0) = 0 and f'(0) = 1 by construction
        assert_relative_eq!(basis.f_function(0.0).unwrap(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(basis.f_function(1.0).unwrap(), 1.0_f64.sin(), epsilon = 1e-9);
    }

    #[test]
    fn f_function_harmonic_quarter_period_value() {
        // omega = 2: f = sin(2 t)/2, at t - t_a = pi/4 the value is 0.5
        let pot = QuadraticPotential::harmonic(1.0, 2.0);
        let basis = solve_homogeneous(&pot, 0.0, 1.0, 4096).unwrap();
        assert_relative_eq!(
            basis.f_function(std::f64::consts::FRAC_PI_4).unwrap(),
            0.5,
            epsilon = 1e-10
        );
    }

    #[test]
    fn f_function_free_particle_is_elapsed_time() {
        let pot = QuadraticPotential::free(1.0);
        let basis = solve_homogeneous(&pot, 0.0, 4.0, 64).unwrap();
        assert_relative_eq!(basis.f_function(3.0).unwrap(), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn parametric_wronskian_stays_constant() {
        // c(t) = m (1 + 0.1 t)^2 / 2 on [0, 1]
        let pot = QuadraticPotential::new(
            1.0,
            Coefficient::zero(),
            Coefficient::zero(),
            Coefficient::Poly(vec![0.5, 0.1, 0.005]),
        )
        .unwrap();
        let basis = solve_homogeneous(&pot, 0.0, 1.0, 10_000).unwrap();
        assert!(basis.wronskian_drift() < 1e-8, "drift {}", basis.wronskian_drift());
    }

    #[test]
    fn rejects_reversed_interval_and_uncovered_table() {
        let pot = QuadraticPotential::free(1.0);
        assert!(matches!(
            solve_homogeneous(&pot, 1.0, 0.5, 16),
            Err(ClassicalError::NonPositiveInterval { .. })
        ));
        let table_pot = QuadraticPotential::new(
            1.0,
            Coefficient::zero(),
            Coefficient::zero(),
            Coefficient::Table(crate::potential::CoefficientTable {
                t0: 0.0,
                dt: 0.1,
                values: vec![0.5; 6],
            }),
        )
        .unwrap();
        assert!(matches!(
            solve_homogeneous(&table_pot, 0.0, 1.0, 16),
            Err(ClassicalError::CoefficientDomain(_))
        ));
    }

    #[test]
    fn out_of_interval_query_is_typed() {
        let pot = QuadraticPotential::free(1.0);
        let basis = solve_homogeneous(&pot, 0.0, 1.0, 16).unwrap();
        assert!(matches!(
            basis.f_function(1.5),
            Err(ClassicalError::OutOfInterval { .. })
        ));
    }

    #[test]
    fn free_trajectory_is_uniform_motion() {
        let pot = QuadraticPotential::free(1.0);
        let traj = classical_trajectory(&pot, 0.0, 1.0, 0.0, 2.0, 128).unwrap();
        let (x_b, p_b) = traj.endpoint();
        assert_relative_eq!(x_b, 2.0, max_relative = 1e-12);
        assert_relative_eq!(p_b, 1.0, max_relative = 1e-12);
        assert_eq!(traj.x[0], 0.0);
        assert_eq!(traj.p[0], 1.0);
    }

    #[test]
    fn harmonic_quarter_period_rotates_phase_space() {
        let pot = QuadraticPotential::harmonic(1.0, 1.0);
        let traj = classical_trajectory(
            &pot,
            1.0,
            0.0,
            0.0,
            std::f64::consts::FRAC_PI_2,
            4096,
        )
        .unwrap();
        let (x_b, p_b) = traj.endpoint();
        assert_relative_eq!(x_b, 0.0, epsilon = 1e-10);
        assert_relative_eq!(p_b, -1.0, epsilon = 1e-10);
    }

    #[test]
    fn constant_force_closed_form() {
        // oracle: x = -b t^2 / (2m), p = -b t for x_a = p_a = 0
        let pot = constant_force(1.0, 1.0);
        let traj = classical_trajectory(&pot, 0.0, 0.0, 0.0, 1.0, 512).unwrap();
        let (x_b, p_b) = traj.endpoint();
        assert_relative_eq!(x_b, -0.5, epsilon = 1e-12);
        assert_relative_eq!(p_b, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn momentum_is_mass_times_velocity() {
        let pot = QuadraticPotential::harmonic(2.0, 1.3);
        let traj = classical_trajectory(&pot, 0.7, -0.4, 0.0, 2.0, 8192).unwrap();
        let dt = traj.times.step();
        for i in 1..traj.times.len() - 1 {
            let v = (traj.x[i + 1] - traj.x[i - 1]) / (2.0 * dt);
            assert_relative_eq!(traj.p[i] / pot.m, v, epsilon = 1e-6);
        }
    }

    #[test]
    fn free_flow_map_is_drift_matrix() {
        let pot = QuadraticPotential::free(1.0);
        let map = flow_map(&pot, 0.0, 3.0, 64).unwrap();
        assert_relative_eq!(map.matrix[0][0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(map.matrix[0][1], 3.0, max_relative = 1e-12);
        assert_relative_eq!(map.matrix[1][0], 0.0, epsilon = 1e-14);
        assert_relative_eq!(map.matrix[1][1], 1.0, max_relative = 1e-12);
        assert_eq!(map.drift, [0.0, 0.0]);
    }

    #[test]
    fn harmonic_flow_map_is_rotation() {
        // oracle: closed-form rotation entries for omega, m = 1
        let omega = 1.7;
        let dt = 0.9;
        let pot = QuadraticPotential::harmonic(1.0, omega);
        let map = flow_map(&pot, 0.0, dt, 8192).unwrap();
        let (s, c) = (omega * dt).sin_cos();
        assert_relative_eq!(map.matrix[0][0], c, epsilon = 1e-10);
        assert_relative_eq!(map.matrix[0][1], s / omega, epsilon = 1e-10);
        assert_relative_eq!(map.matrix[1][0], -omega * s, epsilon = 1e-10);
        assert_relative_eq!(map.matrix[1][1], c, epsilon = 1e-10);
        assert_relative_eq!(map.det(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_force_flow_map_oracle() {
        let pot = constant_force(1.0, 1.0);
        let map = flow_map(&pot, 0.0, 1.0, 512).unwrap();
        assert_relative_eq!(map.drift[0], -0.5, epsilon = 1e-12);
        assert_relative_eq!(map.drift[1], -1.0, epsilon = 1e-12);
        assert_relative_eq!(map.matrix[0][1], 1.0, max_relative = 1e-12);
    }

    #[test]
    fn flow_map_reproduces_trajectory_endpoints() {
        let pot = QuadraticPotential::new(
            0.7,
            Coefficient::Const(0.2),
            Coefficient::Poly(vec![0.3, -0.1]),
            Coefficient::Poly(vec![0.4, 0.05]),
        )
        .unwrap();
        let map = flow_map(&pot, 0.0, 1.5, 4096).unwrap();
        for &(x_a, p_a) in &[(0.0, 0.0), (1.0, -0.5), (-2.0, 0.3)] {
            let traj = classical_trajectory(&pot, x_a, p_a, 0.0, 1.5, 4096).unwrap();
            let (x_b, p_b) = traj.endpoint();
            let z = map.apply([x_a, p_a]);
            assert_relative_eq!(z[0], x_b, epsilon = 1e-10);
            assert_relative_eq!(z[1], p_b, epsilon = 1e-10);
        }
    }

    #[test]
    fn flow_maps_compose_over_subintervals() {
        let pot = QuadraticPotential::new(
            1.0,
            Coefficient::zero(),
            Coefficient::Const(0.3),
            Coefficient::Poly(vec![0.5, 0.2]),
        )
        .unwrap();
        let full = flow_map(&pot, 0.0, 2.0, 8192).unwrap();
        let first = flow_map(&pot, 0.0, 0.8, 4096).unwrap();
        let second = flow_map(&pot, 0.8, 2.0, 4096).unwrap();
        let composed = second.after(&first);
        for r in 0..2 {
            for c in 0..2 {
                assert_relative_eq!(composed.matrix[r][c], full.matrix[r][c], epsilon = 1e-7);
            }
            assert_relative_eq!(composed.drift[r], full.drift[r], epsilon = 1e-7);
        }
    }

    #[test]
    fn bvp_velocities_agree_with_ivp() {
        let pot = QuadraticPotential::new(
            1.3,
            Coefficient::zero(),
            Coefficient::Const(0.4),
            Coefficient::Const(0.6),
        )
        .unwrap();
        let t_b = 1.1;
        let basis = solve_homogeneous(&pot, 0.0, t_b, 8192).unwrap();
        let traj = classical_trajectory(&pot, 0.8, -0.3, 0.0, t_b, 8192).unwrap();
        let (x_b, p_b) = traj.endpoint();
        let (v_a, v_b) = bvp_boundary_velocities(&basis, &pot, 0.8, x_b).unwrap();
        assert_relative_eq!(v_a, -0.3 / pot.m, max_relative = 1e-6);
        assert_relative_eq!(v_b, p_b / pot.m, max_relative = 1e-6);
    }

    #[test]
    fn bvp_refuses_conjugate_points() {
        // harmonic half period: h(t_a, t_b) = sin(pi) = 0
        let pot = QuadraticPotential::harmonic(1.0, 1.0);
        let basis = solve_homogeneous(&pot, 0.0, std::f64::consts::PI, 8192).unwrap();
        assert!(matches!(
            bvp_boundary_velocities(&basis, &pot, 1.0, 0.5),
            Err(ClassicalError::ConjugatePoint { .. })
        ));
    }

    #[test]
    fn free_particle_action_closed_form() {
        // oracle: S = m (x_b - x_a)^2 / (2 dt) = 1
        let pot = QuadraticPotential::free(1.0);
        let traj = classical_trajectory(&pot, 0.0, 1.0, 0.0, 2.0, 1024).unwrap();
        assert_relative_eq!(classical_action(&pot, &traj).unwrap(), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn pure_offset_action_is_minus_a_dt() {
        let pot = QuadraticPotential::new(
            1.0,
            Coefficient::Const(2.5),
            Coefficient::zero(),
            Coefficient::zero(),
        )
        .unwrap();
        let traj = classical_trajectory(&pot, 0.3, 0.0, 0.0, 2.0, 128).unwrap();
        assert_relative_eq!(classical_action(&pot, &traj).unwrap(), -5.0, max_relative = 1e-12);
    }

    #[test]
    fn quadrature_action_matches_boundary_form() {
        // harmonic, plus a driven case with all coefficients active
        let harmonic = QuadraticPotential::harmonic(1.0, 1.0);
        let t_b = std::f64::consts::FRAC_PI_4;
        let traj = classical_trajectory(&harmonic, 1.0, 0.0, 0.0, t_b, 8192).unwrap();
        let basis = solve_homogeneous(&harmonic, 0.0, t_b, 8192).unwrap();
        let quad = classical_action(&harmonic, &traj).unwrap();
        let bound =
            classical_action_boundary(&harmonic, &basis, 1.0, traj.endpoint().0).unwrap();
        assert_relative_eq!(quad, bound, epsilon = 1e-8);

        let driven = QuadraticPotential::new(
            1.0,
            Coefficient::Const(0.1),
            Coefficient::Const(1.0),
            Coefficient::Const(0.3),
        )
        .unwrap();
        let traj = classical_trajectory(&driven, 0.4, 0.7, 0.0, 1.3, 16384).unwrap();
        let basis = solve_homogeneous(&driven, 0.0, 1.3, 16384).unwrap();
        let quad = classical_action(&driven, &traj).unwrap();
        let bound =
            classical_action_boundary(&driven, &basis, 0.4, traj.endpoint().0).unwrap();
        assert_relative_eq!(quad, bound, max_relative = 1e-7);
    }

    #[test]
    fn rk4_error_scales_as_fourth_order() {
        // step-halving ratio on a smooth parametric oscillator
        let pot = QuadraticPotential::new(
            1.0,
            Coefficient::zero(),
            Coefficient::zero(),
            Coefficient::Poly(vec![0.5, 0.3, 0.04]),
        )
        .unwrap();
        let reference = classical_trajectory(&pot, 1.0, 0.0, 0.0, 2.0, 65536).unwrap();
        let (x_ref, _) = reference.endpoint();
        let coarse = classical_trajectory(&pot, 1.0, 0.0, 0.0, 2.0, 64).unwrap();
        let fine = classical_trajectory(&pot, 1.0, 0.0, 0.0, 2.0, 128).unwrap();
        let err_coarse = (coarse.endpoint().0 - x_ref).abs();
        let err_fine = (fine.endpoint().0 - x_ref).abs();
        let ratio = err_coarse / err_fine;
        assert!((14.0..=18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn symplecticity_over_random_potentials() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let m = rng.random_range(0.2..3.0);
            let c0 = rng.random_range(-1.0..2.0);
            let c1 = rng.random_range(-0.5..0.5);
            let b0 = rng.random_range(-1.0..1.0);
            let pot = QuadraticPotential::new(
                m,
                Coefficient::zero(),
                Coefficient::Const(b0),
                Coefficient::Poly(vec![c0, c1]),
            )
            .unwrap();
            let map = flow_map(&pot, 0.0, 1.0, 10_000).unwrap();
            assert!((map.det() - 1.0).abs() <= 1e-8, "det deviation {}", map.det() - 1.0);
        }
    }
}
