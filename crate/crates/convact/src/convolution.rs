//! Discrete temporal convolution and the identities the whole variational
//! construction rests on.
//!
//! The convolution `[f, g](t) = integral of f(s) g(t - s) over [0, t]` is
//! evaluated by composite trapezoid quadrature on each sub-interval of the
//! common grid. Because `g(kh - jh)` is itself a node value on a uniform
//! grid, no interpolation enters and commutativity holds to round-off.

use crate::error::Result;
use crate::signals::{self, derivative, Signal};

/// Result of a discrete convolution: its full trace `t' -> [f,g](t')` on the
/// grid plus the value at the final time.
#[derive(Debug, Clone)]
pub struct ConvKernelResult {
    pub value_at_t: f64,
    pub trace: Signal,
}

/// Trapezoid-quadrature convolution of two signals on the same grid.
///
/// `trace.values[k]` approximates the convolution at node `k`; node 0 is the
/// convolution over an empty interval and is exactly zero.
pub fn convolve(f: &Signal, g: &Signal) -> Result<ConvKernelResult> {
    signals::same_grid(f, g, "convolve")?;
    let grid = f.grid();
    let h = grid.step();
    let fv = f.values();
    let gv = g.values();
    let n = grid.intervals();
    let mut trace = vec![0.0; n + 1];
    for (k, tr) in trace.iter_mut().enumerate().skip(1) {
        *tr = conv_at_node(fv, gv, k, h);
    }
    let value_at_t = trace[n];
    Ok(ConvKernelResult {
        value_at_t,
        trace: Signal::new(grid, trace).expect("trace has grid length"),
    })
}

#[inline]
fn conv_at_node(f: &[f64], g: &[f64], k: usize, h: f64) -> f64 {
    let mut acc = 0.5 * (f[0] * g[k] + f[k] * g[0]);
    for j in 1..k {
        acc += f[j] * g[k - j];
    }
    acc * h
}

/// Trapezoid pairing at the final node only: `[f, g](t_final)`.
pub(crate) fn conv_value_at_t(f: &[f64], g: &[f64], h: f64) -> f64 {
    conv_at_node(f, g, f.len() - 1, h)
}

/// Max over grid nodes of `|[f,g](t_k) - [g,f](t_k)|`.
pub fn conv_commutativity_residual(f: &Signal, g: &Signal) -> Result<f64> {
    let fg = convolve(f, g)?;
    let gf = convolve(g, f)?;
    fg.trace.sup_distance(&gf.trace)
}

/// Residual of the convolutional integration-by-parts identity
/// `[v, u'](t) = v(0) u(t) - v(t) u(0) + [v', u](t)`,
/// with both derivatives taken discretely.
pub fn conv_ibp_residual(v: &Signal, u: &Signal) -> Result<f64> {
    signals::same_grid(v, u, "conv_ibp_residual")?;
    let n = v.grid().intervals();
    let lhs = convolve(v, &derivative(u))?.value_at_t;
    let boundary = v.value(0) * u.value(n) - v.value(n) * u.value(0);
    let rhs = boundary + convolve(&derivative(v), u)?.value_at_t;
    Ok((lhs - rhs).abs())
}

/// Sanity probe of the Titchmarsh property: a vanishing convolution forces
/// one factor to vanish. Returns `true` when the implication holds at the
/// given tolerance (`scale` is the larger supremum norm of the two inputs).
/// A probe, not a proof.
pub fn titchmarsh_probe(f: &Signal, g: &Signal, tol: f64) -> Result<bool> {
    let conv_max = convolve(f, g)?.trace.sup_norm();
    let scale = f.sup_norm().max(g.sup_norm());
    let threshold = tol * scale;
    if conv_max > threshold {
        return Ok(true); // antecedent fails, implication holds vacuously
    }
    Ok(f.sup_norm() <= threshold || g.sup_norm() <= threshold)
}
