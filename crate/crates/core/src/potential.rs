//! Time-dependent quadratic potentials `V(x,t) = a(t) + b(t) x + c(t) x^2`.
//!
//! Each coefficient is a constant, a polynomial in `t`, or a uniformly
//! sampled table interpolated with a C^1 cubic Hermite rule. Tables are
//! never extrapolated. The harmonic correspondence used throughout the
//! crate is `c = m omega^2 / 2`, so the equation of motion reads
//! `m x'' + 2 c(t) x = -b(t)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interp::catmull_rom_weights;

#[derive(Debug, Error, PartialEq)]
pub enum PotentialError {
    #[error("mass must be positive and finite, got {0}")]
    NonPositiveMass(f64),
    #[error("coefficient {name} undefined at t = {t}: table covers [{lo}, {hi}]")]
    CoefficientDomain { name: &'static str, t: f64, lo: f64, hi: f64 },
    #[error("coefficient table needs at least 2 samples")]
    EmptyTable,
    #[error("coefficient table step must be positive and finite, got {0}")]
    BadTableStep(f64),
    #[error("coefficient contains a non-finite value")]
    NonFiniteCoefficient,
}

/// Uniformly sampled coefficient table on `t0, t0 + dt, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl CoefficientTable {
    fn validate(&self) -> Result<(), PotentialError> {
        if self.values.len() < 2 {
            return Err(PotentialError::EmptyTable);
        }
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(PotentialError::BadTableStep(self.dt));
        }
        if !self.t0.is_finite() || self.values.iter().any(|v| !v.is_finite()) {
            return Err(PotentialError::NonFiniteCoefficient);
        }
        Ok(())
    }

    fn domain(&self) -> (f64, f64) {
        (self.t0, self.t0 + self.dt * (self.values.len() - 1) as f64)
    }

    /// Cubic Hermite evaluation; `t` must lie in the table domain (up to
    /// roundoff slack, handled by the caller). Stencil points past the
    /// ends use quadratic ghost extrapolation so the edge cells keep the
    /// interior order.
    fn eval(&self, t: f64) -> f64 {
        let n = self.values.len();
        let raw = ((t - self.t0) / self.dt).clamp(0.0, (n - 1) as f64);
        let cell = (raw.floor() as usize).min(n - 2);
        let u = raw - cell as f64;
        let w = catmull_rom_weights(u);
        let at = |k: isize| -> f64 {
            let i = cell as isize + k;
            if i < 0 {
                if n >= 3 {
                    3.0 * self.values[0] - 3.0 * self.values[1] + self.values[2]
                } else {
                    2.0 * self.values[0] - self.values[1]
                }
            } else if i as usize >= n {
                if n >= 3 {
                    3.0 * self.values[n - 1] - 3.0 * self.values[n - 2] + self.values[n - 3]
                } else {
                    2.0 * self.values[n - 1] - self.values[n - 2]
                }
            } else {
                self.values[i as usize]
            }
        };
        w[0] * at(-1) + w[1] * at(0) + w[2] * at(1) + w[3] * at(2)
    }
}

/// One coefficient of the quadratic potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coefficient {
    Const(f64),
    Poly(Vec<f64>),
    Table(CoefficientTable),
}

impl Coefficient {
    pub fn zero() -> Self {
        Coefficient::Const(0.0)
    }

    fn validate(&self, name: &'static str) -> Result<(), PotentialError> {
        match self {
            Coefficient::Const(v) => {
                if v.is_finite() {
                    Ok(())
                } else {
                    Err(PotentialError::NonFiniteCoefficient)
                }
            }
            Coefficient::Poly(cs) => {
                if cs.iter().all(|v| v.is_finite()) {
                    Ok(())
                } else {
                    Err(PotentialError::NonFiniteCoefficient)
                }
            }
            Coefficient::Table(table) => {
                table.validate().map_err(|e| match e {
                    PotentialError::CoefficientDomain { t, lo, hi, .. } => {
                        PotentialError::CoefficientDomain { name, t, lo, hi }
                    }
                    other => other,
                })
            }
        }
    }

    /// Whether the coefficient is defined on all of `[t_a, t_b]`.
    pub fn covers(&self, t_a: f64, t_b: f64) -> bool {
        match self {
            Coefficient::Const(_) | Coefficient::Poly(_) => true,
            Coefficient::Table(table) => {
                let (lo, hi) = table.domain();
                let eps = 1e-9 * table.dt.max(hi - lo);
                t_a >= lo - eps && t_b <= hi + eps
            }
        }
    }

    fn domain(&self) -> Option<(f64, f64)> {
        match self {
            Coefficient::Table(table) => Some(table.domain()),
            _ => None,
        }
    }

    pub fn eval(&self, t: f64, name: &'static str) -> Result<f64, PotentialError> {
        if !self.covers(t, t) {
            let (lo, hi) = self.domain().unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
            return Err(PotentialError::CoefficientDomain { name, t, lo, hi });
        }
        Ok(self.eval_raw(t))
    }

    /// Infallible evaluation for callers that have already validated the
    /// interval; table queries are clamped against roundoff overhang.
    pub(crate) fn eval_raw(&self, t: f64) -> f64 {
        match self {
            Coefficient::Const(v) => *v,
            Coefficient::Poly(cs) => {
                let mut acc = 0.0;
                for &c in cs.iter().rev() {
                    acc = acc * t + c;
                }
                acc
            }
            Coefficient::Table(table) => table.eval(t),
        }
    }
}

/// The quadratic potential specification `a(t) + b(t) x + c(t) x^2`, with
/// particle mass `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticPotential {
    pub m: f64,
    #[serde(default = "Coefficient::zero")]
    pub a: Coefficient,
    #[serde(default = "Coefficient::zero")]
    pub b: Coefficient,
    #[serde(default = "Coefficient::zero")]
    pub c: Coefficient,
}

impl QuadraticPotential {
    pub fn new(
        m: f64,
        a: Coefficient,
        b: Coefficient,
        c: Coefficient,
    ) -> Result<Self, PotentialError> {
        if !m.is_finite() || m <= 0.0 {
            return Err(PotentialError::NonPositiveMass(m));
        }
        a.validate("a")?;
        b.validate("b")?;
        c.validate("c")?;
        Ok(Self { m, a, b, c })
    }

    /// Free particle of mass `m`.
    pub fn free(m: f64) -> Self {
        Self::new(m, Coefficient::zero(), Coefficient::zero(), Coefficient::zero())
            .expect("free particle spec")
    }

    /// Harmonic oscillator `V = m omega^2 x^2 / 2`, i.e. `c = m omega^2 / 2`.
    pub fn harmonic(m: f64, omega: f64) -> Self {
        Self::new(
            m,
            Coefficient::zero(),
            Coefficient::zero(),
            Coefficient::Const(0.5 * m * omega * omega),
        )
        .expect("harmonic spec")
    }

    /// Re-validate deserialized specs (serde bypasses `new`).
    pub fn validate(&self) -> Result<(), PotentialError> {
        Self::new(self.m, self.a.clone(), self.b.clone(), self.c.clone()).map(|_| ())
    }

    pub fn value(&self, x: f64, t: f64) -> Result<f64, PotentialError> {
        Ok(self.a.eval(t, "a")? + self.b.eval(t, "b")? * x + self.c.eval(t, "c")? * x * x)
    }

    /// Check that all coefficients are defined on `[t_a, t_b]`.
    pub fn validate_interval(&self, t_a: f64, t_b: f64) -> Result<(), PotentialError> {
        for (coeff, name) in [(&self.a, "a"), (&self.b, "b"), (&self.c, "c")] {
            if !coeff.covers(t_a, t_b) {
                let (lo, hi) = coeff.domain().unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
                return Err(PotentialError::CoefficientDomain { name, t: t_a, lo, hi });
            }
        }
        Ok(())
    }

    /// Largest |c(t)| on the interval, estimated on a dense sample.
    pub fn max_abs_c(&self, t_a: f64, t_b: f64) -> f64 {
        let n = 257;
        (0..n)
            .map(|i| {
                let t = t_a + (t_b - t_a) * i as f64 / (n - 1) as f64;
                self.c.eval_raw(t).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Default RK4 resolution: 4096 steps per unit time, scaled up by the
    /// stiffest harmonic frequency present.
    pub fn default_steps(&self, t_a: f64, t_b: f64) -> usize {
        let rate = (2.0 * self.max_abs_c(t_a, t_b) / self.m).sqrt().max(1.0);
        let steps = (4096.0 * (t_b - t_a).abs() * rate).ceil() as usize;
        steps.clamp(64, 8_000_000)
    }
}
