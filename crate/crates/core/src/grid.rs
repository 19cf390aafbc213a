//! Uniform grids on `[0, 1]` and the composite trapezium rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform partition of `[0, 1]` into `n` subintervals.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n: usize,
    h: f64,
    nodes: Vec<f64>,
}

impl Grid {
    /// Builds the grid `x_i = i·h`, `h = 1/n`. At least two subintervals are
    /// required so that the scheme has an interior node.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewSubintervals(n));
        }
        let h = 1.0 / n as f64;
        let mut nodes: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        // endpoints must be exact so kernel rows vanish at the boundary
        nodes[0] = 0.0;
        nodes[n] = 1.0;
        Ok(Self { n, h, nodes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Trapezium weights `ρ_j`: `1/2` at both ends, `1` inside.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let mut rho = vec![1.0; self.n + 1];
        rho[0] = 0.5;
        rho[self.n] = 0.5;
        rho
    }

    /// Quadrature weights `h·ρ_j`.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        self.trapezoid_weights()
            .into_iter()
            .map(|r| r * self.h)
            .collect()
    }

    /// Composite trapezium approximation of `∫₀¹ g(x) dx` from nodal values.
    pub fn integrate(&self, values: &GridFunction) -> Result<f64> {
        self.check_aligned(values)?;
        Ok(self.integrate_slice(values.values()))
    }

    pub(crate) fn integrate_slice(&self, values: &[f64]) -> f64 {
        let inner: f64 = values[1..self.n].iter().sum();
        self.h * (inner + 0.5 * (values[0] + values[self.n]))
    }

    pub(crate) fn check_aligned(&self, values: &GridFunction) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: values.len(),
            });
        }
        Ok(())
    }
}

/// Nodal values of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GridFunction(Vec<f64>);

impl GridFunction {
    /// Wraps nodal values; every entry must be finite.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEntry(i));
        }
        Ok(Self(values))
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        Self(values)
    }

    /// Samples `g` at every node of `grid`.
    pub fn sample(grid: &Grid, g: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid.nodes().iter().map(|&x| g(x)).collect())
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self(vec![0.0; grid.len()])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Discrete max norm.
    pub fn max_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `max_i |self_i − other_i|`.
    pub fn max_distance(&self, other: &GridFunction) -> f64 {
        max_abs_diff(&self.0, &other.0)
    }
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}
