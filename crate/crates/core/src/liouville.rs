//! Independent finite-time oracle for grid propagation: the phase-space
//! Liouville equation `df/dt + (p/m) df/dx - (b + 2 c x) df/dp = 0`
//! solved by Strang splitting of the x- and p-advections, each as a 1-D
//! semi-Lagrangian cubic step. The discretization family is deliberately
//! different from the characteristics path in [`crate::propagator`].

use crate::exec::map_indexed;
use crate::interp::cubic_1d;
use crate::potential::QuadraticPotential;
use crate::propagator::PropagatorError;
use crate::states::GridWignerState;

/// Left side of the stability bound
/// `dt * max(|p| / (m dx), |b + 2 c x| / dp) < 0.5` for one step.
fn advection_rate(state: &GridWignerState, pot: &QuadraticPotential, t_a: f64, t_b: f64) -> f64 {
    let p_max = state.p_axis().start().abs().max(state.p_axis().end().abs());
    let x_max = state.x_axis().start().abs().max(state.x_axis().end().abs());
    let mut force_max: f64 = 0.0;
    let samples = 129;
    for i in 0..samples {
        let t = t_a + (t_b - t_a) * i as f64 / (samples - 1) as f64;
        let b = pot.b.eval_raw(t);
        let c = pot.c.eval_raw(t);
        force_max = force_max.max((b.abs() + 2.0 * c.abs() * x_max).abs());
    }
    (p_max / (pot.m * state.x_axis().step())).max(force_max / state.p_axis().step())
}

/// Smallest step count satisfying the stability bound on `[t_a, t_b]`.
pub fn stable_step_count(
    state: &GridWignerState,
    pot: &QuadraticPotential,
    t_a: f64,
    t_b: f64,
) -> usize {
    let rate = advection_rate(state, pot, t_a, t_b);
    (((t_b - t_a) * rate / 0.5).ceil() as usize + 1).max(2)
}

/// `L1` distance `integral |f - g| dx dp` between two states on the same
/// grid.
pub fn l1_distance(a: &GridWignerState, b: &GridWignerState) -> f64 {
    assert_eq!(a.x_axis(), b.x_axis(), "grids must match");
    assert_eq!(a.p_axis(), b.p_axis(), "grids must match");
    let acc: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).sum();
    acc * a.cell_area()
}

/// Advect `values` along x by `shift(p) = p tau / m` (backward sampling),
/// one contiguous gather per momentum column.
fn advect_x<F: Fn(usize) -> f64 + Sync + Send>(
    values: &[f64],
    n_x: usize,
    n_p: usize,
    tau: f64,
    m: f64,
    dx: f64,
    p_of: &F,
) -> Vec<f64> {
    let columns: Vec<Vec<f64>> = map_indexed(n_p, |ip| {
        let shift = p_of(ip) * tau / (m * dx);
        let line: Vec<f64> = (0..n_x).map(|ix| values[ix * n_p + ip]).collect();
        (0..n_x).map(|ix| cubic_1d(&line, ix as f64 - shift)).collect()
    });
    let mut out = vec![0.0; n_x * n_p];
    for (ip, column) in columns.iter().enumerate() {
        for ix in 0..n_x {
            out[ix * n_p + ip] = column[ix];
        }
    }
    out
}

/// Advect along p by the force kick `-(b + 2 c x) tau`, one contiguous
/// row per position.
fn advect_p<F: Fn(usize) -> f64 + Sync + Send>(
    values: &[f64],
    n_x: usize,
    n_p: usize,
    tau: f64,
    b: f64,
    c: f64,
    dp: f64,
    x_of: &F,
) -> Vec<f64> {
    let rows: Vec<Vec<f64>> = map_indexed(n_x, |ix| {
        let force = -(b + 2.0 * c * x_of(ix));
        let shift = force * tau / dp;
        let row = &values[ix * n_p..(ix + 1) * n_p];
        (0..n_p).map(|ip| cubic_1d(row, ip as f64 - shift)).collect()
    });
    rows.into_iter().flatten().collect()
}

/// Solve the quadratic-potential Liouville equation on the grid by
/// second-order operator splitting (half x, full p at midpoint time,
/// half x per step).
pub fn liouville_oracle(
    state: &GridWignerState,
    pot: &QuadraticPotential,
    t_a: f64,
    t_b: f64,
    n_steps: usize,
) -> Result<GridWignerState, PropagatorError> {
    pot.validate_interval(t_a, t_b)?;
    let required = stable_step_count(state, pot, t_a, t_b);
    if n_steps < required {
        return Err(PropagatorError::StabilityViolation { required, got: n_steps });
    }
    let n_x = state.x_axis().len();
    let n_p = state.p_axis().len();
    let dx = state.x_axis().step();
    let dp = state.p_axis().step();
    let m = pot.m;
    let dt = (t_b - t_a) / n_steps as f64;
    let x_axis = state.x_axis().clone();
    let p_axis = state.p_axis().clone();
    let x_of = move |ix: usize| x_axis.value(ix);
    let p_axis2 = p_axis.clone();
    let p_of = move |ip: usize| p_axis2.value(ip);

    let mut values = state.values().to_vec();
    for step in 0..n_steps {
        let t_mid = t_a + dt * (step as f64 + 0.5);
        let b = pot.b.eval_raw(t_mid);
        let c = pot.c.eval_raw(t_mid);
        values = advect_x(&values, n_x, n_p, 0.5 * dt, m, dx, &p_of);
        values = advect_p(&values, n_x, n_p, dt, b, c, dp, &x_of);
        values = advect_x(&values, n_x, n_p, 0.5 * dt, m, dx, &p_of);
    }
    Ok(GridWignerState::from_parts_unchecked(
        state.x_axis().clone(),
        state.p_axis().clone(),
        values,
        state.hbar(),
    ))
}
