//! Uniform one-dimensional grids used for time axes, phase-space axes and
//! sampled kernels.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid needs at least {min} nodes, got {got}")]
    TooFewNodes { min: usize, got: usize },
    #[error("grid step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("grid start must be finite, got {0}")]
    BadStart(f64),
}

/// A uniform axis `start, start + step, ..., start + (len-1) * step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    start: f64,
    step: f64,
    len: usize,
}

impl UniformGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self, GridError> {
        if len < 2 {
            return Err(GridError::TooFewNodes { min: 2, got: len });
        }
        if !step.is_finite() || step <= 0.0 {
            return Err(GridError::BadStep(step));
        }
        if !start.is_finite() {
            return Err(GridError::BadStart(start));
        }
        Ok(Self { start, step, len })
    }

    /// Axis spanning `[min, max]` inclusively with `len` nodes.
    pub fn from_span(min: f64, max: f64, len: usize) -> Result<Self, GridError> {
        if len < 2 {
            return Err(GridError::TooFewNodes { min: 2, got: len });
        }
        Self::new(min, (max - min) / (len - 1) as f64, len)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.start + self.step * (self.len - 1) as f64
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, i: usize) -> f64 {
        debug_assert!(i < self.len);
        self.start + self.step * i as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.value(i)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|i| self.value(i))
    }

    /// Whether `t` lies inside the axis, with a small roundoff margin.
    pub fn contains(&self, t: f64) -> bool {
        let eps = 1e-9 * self.step.max(self.span().abs());
        t >= self.start - eps && t <= self.end() + eps
    }

    pub fn span(&self) -> f64 {
        self.step * (self.len - 1) as f64
    }

    /// Cell index and fractional offset of `t`, clamped to valid cells.
    /// Returns `None` when `t` lies outside the axis.
    pub fn locate(&self, t: f64) -> Option<(usize, f64)> {
        if !self.contains(t) {
            return None;
        }
        let raw = (t - self.start) / self.step;
        let cell = (raw.floor() as isize).clamp(0, self.len as isize - 2) as usize;
        Some((cell, raw - cell as f64))
    }

    /// Index of the node nearest to `t` (no bounds requirement).
    pub fn nearest(&self, t: f64) -> usize {
        let raw = ((t - self.start) / self.step).round();
        raw.clamp(0.0, (self.len - 1) as f64) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_and_values() {
        let g = UniformGrid::from_span(0.0, 2.0, 5).unwrap();
        assert_eq!(g.step(), 0.5);
        assert_eq!(g.values(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(g.contains(2.0));
        assert!(!g.contains(2.1));
    }

    #[test]
    fn locate_clamps_to_last_cell() {
        let g = UniformGrid::from_span(0.0, 1.0, 3).unwrap();
        let (cell, frac) = g.locate(1.0).unwrap();
        assert_eq!(cell, 1);
        assert!((frac - 1.0).abs() < 1e-12);
        assert!(g.locate(1.5).is_none());
    }

    #[test]
    fn rejects_degenerate_axes() {
        assert!(UniformGrid::new(0.0, 0.0, 4).is_err());
        assert!(UniformGrid::new(0.0, 1.0, 1).is_err());
        assert!(UniformGrid::new(f64::NAN, 1.0, 4).is_err());
    }
}
