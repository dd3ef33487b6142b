//! Uniform grids and sampled functions of time and space-time.
//!
//! Everything downstream (convolutions, half-order operators, actions,
//! solvers) works on these types. Grids are uniform by construction: the
//! fractional-derivative schemes require a constant step, and nothing in
//! this problem family benefits from grading.

use crate::error::{Error, Result};

/// Uniform discretization of the time interval `[0, t_final]` into `n`
/// sub-intervals (`n + 1` nodes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_final: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, n: usize) -> Result<Self> {
        if !t_final.is_finite() || t_final <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "t_final must be positive and finite, got {t_final}"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "interval count must be at least 2, got {n}"
            )));
        }
        Ok(Self { t_final, n })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// Number of sub-intervals.
    pub fn intervals(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.n + 1
    }

    pub fn step(&self) -> f64 {
        self.t_final / self.n as f64
    }

    /// Coordinate of node `k`; `node(n)` lands on `t_final` exactly.
    pub fn node(&self, k: usize) -> f64 {
        debug_assert!(k <= self.n);
        k as f64 * self.t_final / self.n as f64
    }
}

/// A real-valued function of time sampled at the nodes of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl Signal {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidArgument(format!(
                "signal needs {} values for this grid, got {}",
                grid.node_count(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self {
            values: vec![0.0; grid.node_count()],
            grid,
        }
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum nodewise distance to another signal on the same grid.
    pub fn sup_distance(&self, other: &Signal) -> Result<f64> {
        same_grid(self, other, "sup_distance")?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

/// Sample a function at every grid node.
pub fn sample<F: Fn(f64) -> f64>(f: F, grid: TimeGrid) -> Signal {
    let values = (0..grid.node_count()).map(|k| f(grid.node(k))).collect();
    Signal { grid, values }
}

/// Discrete derivative: second-order central differences at interior nodes,
/// one-sided second-order stencils at both endpoints. Exact on quadratics.
pub fn derivative(u: &Signal) -> Signal {
    let mut out = vec![0.0; u.values.len()];
    derivative_slice(&u.values, u.grid.step(), &mut out);
    Signal {
        grid: u.grid,
        values: out,
    }
}

/// Composite trapezoid value of the integral of `u` over `[0, t_final]`.
pub fn trapezoid(u: &Signal) -> f64 {
    trapezoid_slice(&u.values, u.grid.step())
}

pub(crate) fn same_grid(a: &Signal, b: &Signal, what: &str) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch(format!(
            "{what}: signals live on different grids ({:?} vs {:?})",
            a.grid, b.grid
        )));
    }
    Ok(())
}

pub(crate) fn derivative_slice(values: &[f64], h: f64, out: &mut [f64]) {
    let n = values.len() - 1;
    debug_assert!(n >= 2);
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    for k in 1..n {
        out[k] = (values[k + 1] - values[k - 1]) / (2.0 * h);
    }
    out[n] = (values[n - 2] - 4.0 * values[n - 1] + 3.0 * values[n]) / (2.0 * h);
}

/// Discrete second derivative: three-point central stencils inside,
/// four-point one-sided stencils at the ends (second-order throughout).
pub(crate) fn second_derivative_slice(values: &[f64], h: f64, out: &mut [f64]) {
    let n = values.len() - 1;
    debug_assert!(n >= 3);
    let h2 = h * h;
    out[0] = (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) / h2;
    for k in 1..n {
        out[k] = (values[k + 1] - 2.0 * values[k] + values[k - 1]) / h2;
    }
    out[n] = (2.0 * values[n] - 5.0 * values[n - 1] + 4.0 * values[n - 2] - values[n - 3]) / h2;
}

pub(crate) fn trapezoid_slice(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    let mut acc = 0.5 * (values[0] + values[n]);
    for v in &values[1..n] {
        acc += v;
    }
    acc * h
}

/// Trapezoid quadrature weights (`h/2` at the ends, `h` inside).
pub(crate) fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n + 1];
    w[0] = 0.5 * h;
    w[n] = 0.5 * h;
    w
}

/// Uniform discretization of `[0, l] x [0, t_final]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimeGrid {
    l: f64,
    nx: usize,
    time: TimeGrid,
}

impl SpaceTimeGrid {
    pub fn new(l: f64, nx: usize, time: TimeGrid) -> Result<Self> {
        if !l.is_finite() || l <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "length must be positive and finite, got {l}"
            )));
        }
        if nx < 2 {
            return Err(Error::InvalidArgument(format!(
                "space interval count must be at least 2, got {nx}"
            )));
        }
        Ok(Self { l, nx, time })
    }

    pub fn length(&self) -> f64 {
        self.l
    }

    pub fn space_intervals(&self) -> usize {
        self.nx
    }

    pub fn space_step(&self) -> f64 {
        self.l / self.nx as f64
    }

    pub fn node_x(&self, i: usize) -> f64 {
        debug_assert!(i <= self.nx);
        i as f64 * self.l / self.nx as f64
    }

    pub fn time(&self) -> TimeGrid {
        self.time
    }

    pub fn node_count(&self) -> usize {
        (self.nx + 1) * self.time.node_count()
    }
}

/// A real-valued function of space-time sampled on a [`SpaceTimeGrid`].
///
/// Storage is space-major: `values[i * (nt + 1) + k]` holds the value at
/// space node `i`, time node `k`, so the time history at a fixed `x` is
/// contiguous (temporal convolutions walk it constantly).
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: SpaceTimeGrid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: SpaceTimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidArgument(format!(
                "field needs {} values for this grid, got {}",
                grid.node_count(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: SpaceTimeGrid) -> Self {
        Self {
            values: vec![0.0; grid.node_count()],
            grid,
        }
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: SpaceTimeGrid, f: F) -> Self {
        let nt = grid.time.node_count();
        let mut values = Vec::with_capacity(grid.node_count());
        for i in 0..=grid.nx {
            let x = grid.node_x(i);
            for k in 0..nt {
                values.push(f(x, grid.time.node(k)));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> SpaceTimeGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.values[self.index(i, k)]
    }

    #[inline]
    pub fn index(&self, i: usize, k: usize) -> usize {
        debug_assert!(i <= self.grid.nx && k < self.grid.time.node_count());
        i * self.grid.time.node_count() + k
    }

    pub fn set_value(&mut self, i: usize, k: usize, v: f64) {
        let idx = self.index(i, k);
        self.values[idx] = v;
    }

    /// The time history at space node `i`, as a borrowed slice.
    pub fn time_slice(&self, i: usize) -> &[f64] {
        let nt = self.grid.time.node_count();
        &self.values[i * nt..(i + 1) * nt]
    }

    /// The spatial profile at time node `k` (copied; storage is space-major).
    pub fn space_profile(&self, k: usize) -> Vec<f64> {
        (0..=self.grid.nx).map(|i| self.value(i, k)).collect()
    }

    pub fn sup_distance(&self, other: &Field) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(
                "sup_distance: fields live on different grids".into(),
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}
