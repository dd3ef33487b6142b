//! Half-order Riemann-Liouville operators and the convolutional energy
//! identity that makes first-order (dissipative) terms variationally
//! accessible.
//!
//! Two genuinely different discretizations are provided and tested against
//! each other: a Grunwald-Letnikov scheme (binomial-series weights on the
//! uniform grid) and a direct product-integration quadrature that treats the
//! `(tau - s)^(-1/2)` kernel analytically on every sub-interval. The second
//! serves as the independent oracle for the first.

use crate::convolution::conv_value_at_t;
use crate::error::{Error, Result};
use crate::signals::{self, derivative_slice, Signal, TimeGrid};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Which discretization a half-order operator uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfSchemeKind {
    /// Binomial-series weights `w_0 = 1`, `w_k = w_{k-1} (k - 3/2) / k`.
    GrunwaldLetnikov,
    /// Product integration of the weakly singular kernel, exact on
    /// piecewise-linear data; the derivative variant differentiates the
    /// integral with the discrete derivative stencils.
    DirectQuadrature,
}

/// A half-order operator bound to a grid, with its weight tables precomputed.
#[derive(Debug, Clone)]
pub struct HalfOperatorScheme {
    kind: HalfSchemeKind,
    grid: TimeGrid,
    /// Coefficients of `(1 - z)^{1/2}`: `1` then strictly negative terms.
    derivative_weights: Vec<f64>,
    /// Coefficients of `(1 - z)^{-1/2}`: all positive.
    integral_weights: Vec<f64>,
}

impl HalfOperatorScheme {
    pub fn new(kind: HalfSchemeKind, grid: TimeGrid) -> Self {
        let n = grid.intervals();
        let mut dw = vec![0.0; n + 1];
        let mut iw = vec![0.0; n + 1];
        dw[0] = 1.0;
        iw[0] = 1.0;
        for k in 1..=n {
            let kf = k as f64;
            dw[k] = dw[k - 1] * (kf - 1.5) / kf;
            iw[k] = iw[k - 1] * (kf - 0.5) / kf;
        }
        Self {
            kind,
            grid,
            derivative_weights: dw,
            integral_weights: iw,
        }
    }

    pub fn kind(&self) -> HalfSchemeKind {
        self.kind
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn derivative_weights(&self) -> &[f64] {
        &self.derivative_weights
    }

    fn check(&self, u: &Signal, what: &str) -> Result<()> {
        if u.grid() != self.grid {
            return Err(Error::GridMismatch(format!(
                "{what}: signal grid differs from the scheme's grid"
            )));
        }
        Ok(())
    }
}

/// Half-order integral of `u`. Node 0 holds the limit value from the right,
/// which is zero for bounded `u`.
pub fn half_integral(u: &Signal, scheme: &HalfOperatorScheme) -> Result<Signal> {
    scheme.check(u, "half_integral")?;
    let values = match scheme.kind {
        HalfSchemeKind::GrunwaldLetnikov => gl_half_integral(u.values(), scheme),
        HalfSchemeKind::DirectQuadrature => direct_half_integral(u.values(), u.grid().step()),
    };
    Signal::new(u.grid(), values)
}

/// Half-order derivative of `u`.
///
/// Node 0 is flagged with a signed infinity when `u(0) != 0`: the half
/// derivative of a function with a nonzero initial value blows up like
/// `tau^(-1/2)` there. Interior nodes are always finite.
pub fn half_derivative(u: &Signal, scheme: &HalfOperatorScheme) -> Result<Signal> {
    scheme.check(u, "half_derivative")?;
    let mut values = raw_half_derivative(u.values(), scheme);
    values[0] = if u.value(0) == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(u.value(0))
    };
    Signal::new(u.grid(), values)
}

/// Both sides of the half-order energy identity
/// `[u^(1/2), u^(1/2)](t) = [u', u](t) + u(0) u(t)`.
///
/// The left side convolves the scheme's half-derivative values; the weakly
/// singular first and last sub-intervals use a product-integration rule that
/// treats the `s^(-1/2) (t-s)^(-1/2)` weight analytically (its full-interval
/// integral is the Beta value pi). The right side uses the plain discrete
/// derivative and trapezoid convolution.
pub fn half_energy_identity(u: &Signal, scheme: &HalfOperatorScheme) -> Result<(f64, f64)> {
    scheme.check(u, "half_energy_identity")?;
    let h = u.grid().step();
    let n = u.grid().intervals();
    let d = raw_half_derivative(u.values(), scheme);
    let lhs = energy_conv(&d, &d, u.value(0), u.value(0), h);

    let mut du = vec![0.0; n + 1];
    derivative_slice(u.values(), h, &mut du);
    let rhs = conv_value_at_t(&du, u.values(), h) + u.value(0) * u.value(n);
    Ok((lhs, rhs))
}

/// `|[f, g^(1/2)](t) - [f^(1/2), g](t)|` for signals with `f(0) = g(0) = 0`,
/// where the boundary terms of the half-order integration-by-parts formula
/// vanish and the two orderings must agree under refinement.
pub fn half_ibp_residual(f: &Signal, g: &Signal, scheme: &HalfOperatorScheme) -> Result<f64> {
    scheme.check(f, "half_ibp_residual")?;
    scheme.check(g, "half_ibp_residual")?;
    signals::same_grid(f, g, "half_ibp_residual")?;
    if f.value(0) != 0.0 || g.value(0) != 0.0 {
        return Err(Error::Precondition(
            "half_ibp_residual requires f(0) = g(0) = 0".into(),
        ));
    }
    let h = f.grid().step();
    let df = raw_half_derivative(f.values(), scheme);
    let dg = raw_half_derivative(g.values(), scheme);
    let lhs = conv_value_at_t(f.values(), &dg, h);
    let rhs = conv_value_at_t(&df, g.values(), h);
    Ok((lhs - rhs).abs())
}

/// Half-derivative values without the node-0 singularity flag (node 0 is
/// whatever the scheme produces; callers here never read it).
fn raw_half_derivative(u: &[f64], scheme: &HalfOperatorScheme) -> Vec<f64> {
    match scheme.kind {
        HalfSchemeKind::GrunwaldLetnikov => {
            let n = u.len() - 1;
            let h = scheme.grid.step();
            let w = &scheme.derivative_weights;
            let scale = 1.0 / h.sqrt();
            let mut out = vec![0.0; n + 1];
            for (k, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (j, wj) in w[..=k].iter().enumerate() {
                    acc += wj * u[k - j];
                }
                *o = scale * acc;
            }
            out
        }
        HalfSchemeKind::DirectQuadrature => {
            let h = scheme.grid.step();
            let integral = direct_half_integral(u, h);
            let mut out = vec![0.0; u.len()];
            derivative_slice(&integral, h, &mut out);
            out
        }
    }
}

fn gl_half_integral(u: &[f64], scheme: &HalfOperatorScheme) -> Vec<f64> {
    let n = u.len() - 1;
    let h = scheme.grid.step();
    let w = &scheme.integral_weights;
    let scale = h.sqrt();
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        let mut acc = 0.0;
        for (j, wj) in w[..=k].iter().enumerate() {
            acc += wj * u[k - j];
        }
        out[k] = scale * acc;
    }
    out
}

/// Product-integration half integral: interpolate `u` linearly on each
/// sub-interval and integrate against `(tau - s)^(-1/2)` in closed form.
/// Exact for piecewise-linear `u`.
fn direct_half_integral(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len() - 1;
    let mut out = vec![0.0; n + 1];
    for (k, o) in out.iter_mut().enumerate().skip(1) {
        let tau = k as f64 * h;
        let mut acc = 0.0;
        for j in 0..k {
            let sj = j as f64 * h;
            let a = tau - sj;
            let b = tau - (j + 1) as f64 * h;
            let i0 = 2.0 * (a.sqrt() - b.sqrt());
            let i1 = a * i0 - (2.0 / 3.0) * ((a * a * a).sqrt() - (b * b * b).sqrt());
            let slope = (u[j + 1] - u[j]) / h;
            acc += u[j] * i0 + slope * i1;
        }
        *o = acc / SQRT_PI;
    }
    out
}

/// Convolution at the final time of two half-derivative node sequences,
/// `a0`/`b0` being the initial values of the underlying signals (they fix
/// the analytic strength of the `s^(-1/2)` singularities at either end).
fn energy_conv(d_a: &[f64], d_b: &[f64], a0: f64, b0: f64, h: f64) -> f64 {
    let n = d_a.len() - 1;
    let sq = h.sqrt();
    let mut mid = 0.0;
    if n >= 3 {
        for j in 1..n {
            let w = if j == 1 || j == n - 1 { 0.5 * h } else { h };
            mid += w * d_a[j] * d_b[n - j];
        }
    }
    let first =
        sq * ((4.0 / 3.0) * (a0 / SQRT_PI) * d_b[n] + (2.0 / 3.0) * sq * d_a[1] * d_b[n - 1]);
    let last =
        sq * ((4.0 / 3.0) * d_a[n] * (b0 / SQRT_PI) + (2.0 / 3.0) * sq * d_b[1] * d_a[n - 1]);
    mid + first + last
}
