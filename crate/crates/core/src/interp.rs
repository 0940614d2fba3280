//! Cubic interpolation kernels: Catmull-Rom on sampled arrays (1-D and
//! tensor-product 2-D) and Hermite evaluation with known derivatives.

/// Catmull-Rom weights for fractional offset `u` in `[0, 1]`.
#[inline]
pub fn catmull_rom_weights(u: f64) -> [f64; 4] {
    let u2 = u * u;
    let u3 = u2 * u;
    [
        0.5 * (-u3 + 2.0 * u2 - u),
        0.5 * (3.0 * u3 - 5.0 * u2 + 2.0),
        0.5 * (-3.0 * u3 + 4.0 * u2 + u),
        0.5 * (u3 - u2),
    ]
}

/// Four-point cubic Lagrange weights for fractional offset `u` in
/// `[0, 1]` over the stencil `{-1, 0, 1, 2}`; exact on cubics.
#[inline]
pub fn cubic_lagrange_weights(u: f64) -> [f64; 4] {
    let um1 = u - 1.0;
    let um2 = u - 2.0;
    let up1 = u + 1.0;
    [
        -u * um1 * um2 / 6.0,
        up1 * um1 * um2 * 0.5,
        -up1 * u * um2 * 0.5,
        up1 * u * um1 / 6.0,
    ]
}

/// Snap positions a rounding error away from a node onto the node, so
/// exact maps (identity, whole-cell shifts) reproduce values bitwise.
#[inline]
fn snap(pos: f64) -> f64 {
    let r = pos.round();
    if (pos - r).abs() < 1e-9 {
        r
    } else {
        pos
    }
}

/// Sample a uniformly gridded array at fractional index `pos` with a
/// clamped 4-point cubic Lagrange stencil. Positions outside `[0, n-1]`
/// return zero (values beyond the grid carry no mass).
#[inline]
pub fn cubic_1d(values: &[f64], pos: f64) -> f64 {
    let n = values.len();
    let pos = snap(pos);
    if n == 0 || pos < 0.0 || pos > (n - 1) as f64 {
        return 0.0;
    }
    let cell = (pos.floor() as usize).min(n.saturating_sub(2));
    let u = pos - cell as f64;
    if u == 0.0 {
        return values[cell];
    }
    let w = cubic_lagrange_weights(u);
    let idx = |k: isize| -> usize { (cell as isize + k).clamp(0, n as isize - 1) as usize };
    w[0] * values[idx(-1)] + w[1] * values[idx(0)] + w[2] * values[idx(1)] + w[3] * values[idx(2)]
}

/// Bicubic sample of a row-major `n_x` x `n_y` array at fractional
/// indices `(px, py)`; zero outside the grid, clamped stencil inside.
#[inline]
pub fn cubic_2d(values: &[f64], n_x: usize, n_y: usize, px: f64, py: f64) -> f64 {
    let px = snap(px);
    let py = snap(py);
    if px < 0.0 || py < 0.0 || px > (n_x - 1) as f64 || py > (n_y - 1) as f64 {
        return 0.0;
    }
    let cx = (px.floor() as usize).min(n_x.saturating_sub(2));
    let cy = (py.floor() as usize).min(n_y.saturating_sub(2));
    let ux = px - cx as f64;
    let uy = py - cy as f64;
    if ux == 0.0 && uy == 0.0 {
        return values[cx * n_y + cy];
    }
    let wx = cubic_lagrange_weights(ux);
    let wy = cubic_lagrange_weights(uy);
    let ix = |k: isize| -> usize { (cx as isize + k).clamp(0, n_x as isize - 1) as usize };
    let iy = |k: isize| -> usize { (cy as isize + k).clamp(0, n_y as isize - 1) as usize };
    let mut acc = 0.0;
    for (a, &wxa) in wx.iter().enumerate() {
        let row = ix(a as isize - 1) * n_y;
        let mut line = 0.0;
        for (b, &wyb) in wy.iter().enumerate() {
            line += wyb * values[row + iy(b as isize - 1)];
        }
        acc += wxa * line;
    }
    acc
}

/// Cubic Hermite interpolation on `[0, 1]` with endpoint values and
/// derivatives scaled by the step (`m = f' * h`).
#[inline]
pub fn hermite(f0: f64, m0: f64, f1: f64, m1: f64, u: f64) -> f64 {
    let u2 = u * u;
    let u3 = u2 * u;
    (2.0 * u3 - 3.0 * u2 + 1.0) * f0
        + (u3 - 2.0 * u2 + u) * m0
        + (-2.0 * u3 + 3.0 * u2) * f1
        + (u3 - u2) * m1
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn catmull_rom_reproduces_nodes_and_partitions_unity() {
        let w0 = catmull_rom_weights(0.0);
        assert_eq!(w0, [0.0, 1.0, 0.0, 0.0]);
        let w1 = catmull_rom_weights(1.0);
        assert_eq!(w1, [0.0, 0.0, 1.0, 0.0]);
        for &u in &[0.1, 0.37, 0.99] {
            let w = catmull_rom_weights(u);
            assert_relative_eq!(w.iter().sum::<f64>(), 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn cubic_1d_is_exact_on_cubics() {
        let f = |x: f64| 1.5 + 0.3 * x - 0.05 * x * x + 0.002 * x * x * x;
        let values: Vec<f64> = (0..20).map(|i| f(i as f64)).collect();
        for &pos in &[2.5, 7.25, 15.9] {
            assert_relative_eq!(cubic_1d(&values, pos), f(pos), max_relative = 1e-13);
        }
    }

    #[test]
    fn near_node_positions_snap_to_node_values() {
        let values: Vec<f64> = (0..10).map(|i| (i as f64).exp()).collect();
        assert_eq!(cubic_1d(&values, 3.0 + 4e-10), values[3]);
        assert_eq!(cubic_1d(&values, 3.0 - 4e-10), values[3]);
    }

    #[test]
    fn cubic_1d_zero_outside() {
        let values = vec![1.0; 8];
        assert_eq!(cubic_1d(&values, -0.01), 0.0);
        assert_eq!(cubic_1d(&values, 7.01), 0.0);
        assert_eq!(cubic_1d(&values, 7.0), 1.0);
    }

    #[test]
    fn cubic_2d_matches_separable_product() {
        let n = 16;
        let values: Vec<f64> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (0.2 * i as f64).sin() * (0.15 * j as f64).cos()))
            .collect();
        // interior points: tensor interpolation equals product of 1-D results
        let row: Vec<f64> = (0..n).map(|i| (0.2 * i as f64).sin()).collect();
        let col: Vec<f64> = (0..n).map(|j| (0.15 * j as f64).cos()).collect();
        for &(px, py) in &[(3.3, 4.7), (8.5, 2.25)] {
            let product = cubic_1d(&row, px) * cubic_1d(&col, py);
            assert_relative_eq!(cubic_2d(&values, n, n, px, py), product, max_relative = 1e-12);
        }
    }

    #[test]
    fn hermite_reproduces_cubic_exactly() {
        // f(x) = x^3 - x on [2, 3], step 1
        let f = |x: f64| x * x * x - x;
        let df = |x: f64| 3.0 * x * x - 1.0;
        for &u in &[0.0, 0.3, 0.72, 1.0] {
            let got = hermite(f(2.0), df(2.0), f(3.0), df(3.0), u);
            assert_relative_eq!(got, f(2.0 + u), max_relative = 1e-13);
        }
    }
}
