//! Composite quadrature rules on uniform grids, plus Filon-Simpson rules
//! for the oscillatory spectral integrals behind the memory kernels.

/// Trapezoid rule over uniformly sampled values.
pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.5 * (values[0] + values[n - 1]);
    for v in &values[1..n - 1] {
        acc += v;
    }
    acc * step
}

/// Trapezoid node weights `step * (1/2, 1, ..., 1, 1/2)`.
pub fn trapezoid_weights(n: usize, step: f64) -> Vec<f64> {
    let mut w = vec![step; n];
    if n >= 2 {
        w[0] = 0.5 * step;
        w[n - 1] = 0.5 * step;
    }
    w
}

/// Cumulative trapezoid: `out[i] = integral from node 0 to node i`.
pub fn cumulative_trapezoid(values: &[f64], step: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for pair in values.windows(2) {
        acc += 0.5 * step * (pair[0] + pair[1]);
        out.push(acc);
    }
    out
}

/// Composite Simpson rule. Odd interval counts fall back to Simpson on
/// the leading part plus a 3/8 rule on the final three intervals.
pub fn simpson(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => trapezoid(values, step),
        3 => step / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        4 => step * 3.0 / 8.0 * (values[0] + 3.0 * values[1] + 3.0 * values[2] + values[3]),
        _ => {
            let intervals = n - 1;
            if intervals % 2 == 0 {
                let mut acc = values[0] + values[n - 1];
                for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
                    acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
                }
                acc * step / 3.0
            } else {
                simpson(&values[..n - 3], step) + simpson(&values[n - 4..], step)
            }
        }
    }
}

/// Filon-Simpson coefficients for oscillation parameter `theta = k * h`.
fn filon_coefficients(theta: f64) -> (f64, f64, f64) {
    let t = theta.abs();
    if t < 0.1 {
        let t2 = theta * theta;
        let alpha = theta * t2 * (2.0 / 45.0 + t2 * (-2.0 / 315.0 + t2 * (2.0 / 4725.0)));
        let beta = 2.0 / 3.0 + t2 * (2.0 / 15.0 + t2 * (-4.0 / 105.0 + t2 * (2.0 / 567.0)));
        let gamma = 4.0 / 3.0 + t2 * (-2.0 / 15.0 + t2 * (1.0 / 210.0 + t2 * (-1.0 / 11340.0)));
        (alpha, beta, gamma)
    } else {
        let (s, c) = theta.sin_cos();
        let t3 = theta * theta * theta;
        let alpha = (theta * theta + theta * s * c - 2.0 * s * s) / t3;
        let beta = 2.0 * (theta * (1.0 + c * c) - 2.0 * s * c) / t3;
        let gamma = 4.0 * (s - theta * c) / t3;
        (alpha, beta, gamma)
    }
}

/// `integral of f(x) cos(k x) dx` over a uniform grid with an odd number
/// of nodes (even interval count), by the composite Filon-Simpson rule.
/// Accurate for arbitrarily large `k` without resolving oscillations.
pub fn filon_cos(f: &[f64], x0: f64, h: f64, k: f64) -> f64 {
    filon(f, x0, h, k, false)
}

/// `integral of f(x) sin(k x) dx`; companion of [`filon_cos`].
pub fn filon_sin(f: &[f64], x0: f64, h: f64, k: f64) -> f64 {
    filon(f, x0, h, k, true)
}

/// Fused rule: `(integral f_s(x) sin(kx) dx, integral f_c(x) cos(kx) dx)`
/// over one shared grid, with a single `sin_cos` per node.
pub fn filon_sin_cos(f_sin: &[f64], f_cos: &[f64], x0: f64, h: f64, k: f64) -> (f64, f64) {
    let n = f_sin.len();
    assert_eq!(n, f_cos.len(), "Filon pair needs matching sample arrays");
    assert!(n >= 3 && n % 2 == 1, "Filon rule needs an odd node count >= 3");
    let (alpha, beta, gamma) = filon_coefficients(k * h);
    let mut even_s = 0.0;
    let mut odd_s = 0.0;
    let mut even_c = 0.0;
    let mut odd_c = 0.0;
    let mut end_sin = [0.0; 2];
    let mut end_cos = [0.0; 2];
    for i in 0..n {
        let (s, c) = (k * (x0 + h * i as f64)).sin_cos();
        if i == 0 {
            end_sin[0] = s;
            end_cos[0] = c;
        }
        if i == n - 1 {
            end_sin[1] = s;
            end_cos[1] = c;
        }
        if i % 2 == 0 {
            even_s += f_sin[i] * s;
            even_c += f_cos[i] * c;
        } else {
            odd_s += f_sin[i] * s;
            odd_c += f_cos[i] * c;
        }
    }
    even_s -= 0.5 * (f_sin[0] * end_sin[0] + f_sin[n - 1] * end_sin[1]);
    even_c -= 0.5 * (f_cos[0] * end_cos[0] + f_cos[n - 1] * end_cos[1]);
    let sin_integral = h
        * (alpha * (f_sin[0] * end_cos[0] - f_sin[n - 1] * end_cos[1])
            + beta * even_s
            + gamma * odd_s);
    let cos_integral = h
        * (alpha * (f_cos[n - 1] * end_sin[1] - f_cos[0] * end_sin[0])
            + beta * even_c
            + gamma * odd_c);
    (sin_integral, cos_integral)
}

fn filon(f: &[f64], x0: f64, h: f64, k: f64, sine: bool) -> f64 {
    let n = f.len();
    assert!(n >= 3 && n % 2 == 1, "Filon rule needs an odd node count >= 3");
    let (alpha, beta, gamma) = filon_coefficients(k * h);
    let phase = |i: usize| k * (x0 + h * i as f64);
    let mut even = 0.0;
    let mut odd = 0.0;
    if sine {
        for i in (0..n).step_by(2) {
            even += f[i] * phase(i).sin();
        }
        for i in (1..n).step_by(2) {
            odd += f[i] * phase(i).sin();
        }
        even -= 0.5 * (f[0] * phase(0).sin() + f[n - 1] * phase(n - 1).sin());
        h * (alpha * (f[0] * phase(0).cos() - f[n - 1] * phase(n - 1).cos())
            + beta * even
            + gamma * odd)
    } else {
        for i in (0..n).step_by(2) {
            even += f[i] * phase(i).cos();
        }
        for i in (1..n).step_by(2) {
            odd += f[i] * phase(i).cos();
        }
        even -= 0.5 * (f[0] * phase(0).cos() + f[n - 1] * phase(n - 1).cos());
        h * (alpha * (f[n - 1] * phase(n - 1).sin() - f[0] * phase(0).sin())
            + beta * even
            + gamma * odd)
    }
}
