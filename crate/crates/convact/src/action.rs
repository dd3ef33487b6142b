//! The convolution-based action functionals, their admissible sets, and
//! exact first variations of the discretized functionals.
//!
//! Discretization convention: factors that appear *differentiated* in a
//! quadratic term are sampled on cells (forward differences at midpoints,
//! paired by a midpoint convolution rule), while undifferentiated factors
//! keep their nodal values (paired by trapezoid convolution). This is the
//! discrete-mechanics staple for time and the linear-element staple for
//! space; it keeps every stationarity system solvable and second-order
//! consistent, including the natural initial and boundary conditions.
//!
//! Variations are exact gradients of the discrete functionals
//! (discretize-then-vary): for each quadratic term the symmetric bilinear
//! polarization is evaluated, so the solver's stationarity system is
//! *exactly* the condition that these variations vanish.
//!
//! The dissipative quadratic term is evaluated through the convolutional
//! identity that equates the half-derivative self-convolution with
//! `[u', u](t) + u(0) u(t)`; the `fractional` module verifies that identity
//! against its half-order schemes, which is what licenses its use here.

use crate::convolution::conv_value_at_t;
use crate::error::{Error, Result};
use crate::signals::{
    derivative_slice, second_derivative_slice, trapezoid_weights, Field, Signal, SpaceTimeGrid,
    TimeGrid,
};

/// Time-dependent forcing, either a named analytic preset or tabulated
/// samples (interpolated linearly off-grid).
#[derive(Debug, Clone)]
pub enum Forcing {
    Zero,
    Constant(f64),
    Sinusoid { amplitude: f64, omega: f64 },
    Tabulated(Signal),
}

impl Forcing {
    pub fn value_at(&self, s: f64) -> f64 {
        match self {
            Forcing::Zero => 0.0,
            Forcing::Constant(a) => *a,
            Forcing::Sinusoid { amplitude, omega } => amplitude * (omega * s).sin(),
            Forcing::Tabulated(sig) => {
                let grid = sig.grid();
                let h = grid.step();
                let n = grid.intervals();
                let x = (s / h).clamp(0.0, n as f64);
                let j = (x.floor() as usize).min(n - 1);
                let w = x - j as f64;
                (1.0 - w) * sig.value(j) + w * sig.value(j + 1)
            }
        }
    }

    pub fn sample(&self, grid: TimeGrid) -> Signal {
        match self {
            Forcing::Tabulated(sig) if sig.grid() == grid => sig.clone(),
            _ => crate::signals::sample(|s| self.value_at(s), grid),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Forcing::Zero => true,
            Forcing::Constant(a) => *a == 0.0,
            Forcing::Sinusoid { amplitude, .. } => *amplitude == 0.0,
            Forcing::Tabulated(sig) => sig.values().iter().all(|&v| v == 0.0),
        }
    }
}

/// Single-degree-of-freedom problem data: `m u'' + c u' + k u = f` with
/// initial displacement `u0`, initial velocity `v0`, and the impulse
/// amplitude `f0` of the Dirac force that feeds the initial momentum into
/// the action.
#[derive(Debug, Clone)]
pub struct SdofProblem {
    mass: f64,
    damping: f64,
    stiffness: f64,
    forcing: Forcing,
    u0: f64,
    v0: f64,
    f0: f64,
}

impl SdofProblem {
    pub fn new(
        mass: f64,
        damping: f64,
        stiffness: f64,
        forcing: Forcing,
        u0: f64,
        v0: f64,
        f0: f64,
    ) -> Result<Self> {
        if !mass.is_finite() || mass <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "mass must be positive, got {mass}"
            )));
        }
        if !damping.is_finite() || damping < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "damping must be nonnegative, got {damping}"
            )));
        }
        if !stiffness.is_finite() || stiffness < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "stiffness must be nonnegative, got {stiffness}"
            )));
        }
        for (name, v) in [("u0", u0), ("v0", v0), ("f0", f0)] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be finite")));
            }
        }
        Ok(Self {
            mass,
            damping,
            stiffness,
            forcing,
            u0,
            v0,
            f0,
        })
    }

    /// Construct with `f0` set to the natural impulse `m v0 + c u0`, the
    /// unique amplitude making stationarity consistent with the initial data.
    pub fn with_natural_impulse(
        mass: f64,
        damping: f64,
        stiffness: f64,
        forcing: Forcing,
        u0: f64,
        v0: f64,
    ) -> Result<Self> {
        let f0 = mass * v0 + damping * u0;
        Self::new(mass, damping, stiffness, forcing, u0, v0, f0)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn damping(&self) -> f64 {
        self.damping
    }
    pub fn stiffness(&self) -> f64 {
        self.stiffness
    }
    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }
    pub fn u0(&self) -> f64 {
        self.u0
    }
    pub fn v0(&self) -> f64 {
        self.v0
    }
    pub fn f0(&self) -> f64 {
        self.f0
    }
}

/// The impulse amplitude `m v0 + c u0` that the stationarity principle
/// requires of the Dirac force (reduces to `m v0` without damping).
pub fn natural_impulse_sdof(p: &SdofProblem) -> f64 {
    p.mass * p.v0 + p.damping * p.u0
}

/// One-dimensional bar problem data (elastic for `viscosity = 0`,
/// Kelvin-Voigt viscoelastic otherwise).
#[derive(Debug, Clone)]
pub struct BarProblem {
    density: f64,
    elastic_modulus: f64,
    viscosity: f64,
    grid: SpaceTimeGrid,
    forcing: Field,
    u0: Vec<f64>,
    v0: Vec<f64>,
    u_hat: Signal,
    traction: Signal,
    f_hat0: Vec<f64>,
    p_hat0: f64,
}

impl BarProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        density: f64,
        elastic_modulus: f64,
        viscosity: f64,
        grid: SpaceTimeGrid,
        forcing: Field,
        u0: Vec<f64>,
        v0: Vec<f64>,
        u_hat: Signal,
        traction: Signal,
        f_hat0: Vec<f64>,
        p_hat0: f64,
    ) -> Result<Self> {
        if !density.is_finite() || density <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "density must be positive, got {density}"
            )));
        }
        if !elastic_modulus.is_finite() || elastic_modulus <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "elastic modulus must be positive, got {elastic_modulus}"
            )));
        }
        if !viscosity.is_finite() || viscosity < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "viscosity must be nonnegative, got {viscosity}"
            )));
        }
        let nodes_x = grid.space_intervals() + 1;
        for (name, v) in [("u0", &u0), ("v0", &v0), ("f_hat0", &f_hat0)] {
            if v.len() != nodes_x {
                return Err(Error::InvalidArgument(format!(
                    "{name} needs {nodes_x} space-node values, got {}",
                    v.len()
                )));
            }
        }
        if u_hat.grid() != grid.time() || traction.grid() != grid.time() {
            return Err(Error::GridMismatch(
                "boundary histories must live on the problem's time grid".into(),
            ));
        }
        if forcing.grid() != grid {
            return Err(Error::GridMismatch(
                "distributed forcing must live on the problem's grid".into(),
            ));
        }
        if u0[0] != u_hat.value(0) {
            return Err(Error::InvalidArgument(format!(
                "incompatible data: u0(0) = {} but u_hat(0) = {}",
                u0[0],
                u_hat.value(0)
            )));
        }
        if viscosity == 0.0 && p_hat0 != 0.0 {
            return Err(Error::InvalidArgument(
                "an elastic bar admits no contact impulse: viscosity = 0 forces p_hat0 = 0".into(),
            ));
        }
        if viscosity > 0.0 && grid.space_intervals() < 3 {
            return Err(Error::InvalidArgument(
                "viscous impulse data needs at least 3 space intervals".into(),
            ));
        }
        Ok(Self {
            density,
            elastic_modulus,
            viscosity,
            grid,
            forcing,
            u0,
            v0,
            u_hat,
            traction,
            f_hat0,
            p_hat0,
        })
    }

    /// Construct with the impulse fields set to their natural values
    /// `f_hat0 = rho v0 - gamma u0''` and `p_hat0 = gamma u0'(l)`.
    #[allow(clippy::too_many_arguments)]
    pub fn with_natural_impulse(
        density: f64,
        elastic_modulus: f64,
        viscosity: f64,
        grid: SpaceTimeGrid,
        forcing: Field,
        u0: Vec<f64>,
        v0: Vec<f64>,
        u_hat: Signal,
        traction: Signal,
    ) -> Result<Self> {
        if viscosity > 0.0 && grid.space_intervals() < 3 {
            return Err(Error::InvalidArgument(
                "viscous impulse data needs at least 3 space intervals".into(),
            ));
        }
        let (f_hat0, p_hat0) =
            natural_impulse_from_parts(density, viscosity, grid.space_step(), &u0, &v0);
        Self::new(
            density,
            elastic_modulus,
            viscosity,
            grid,
            forcing,
            u0,
            v0,
            u_hat,
            traction,
            f_hat0,
            p_hat0,
        )
    }

    pub fn density(&self) -> f64 {
        self.density
    }
    pub fn elastic_modulus(&self) -> f64 {
        self.elastic_modulus
    }
    pub fn viscosity(&self) -> f64 {
        self.viscosity
    }
    pub fn grid(&self) -> SpaceTimeGrid {
        self.grid
    }
    pub fn forcing(&self) -> &Field {
        &self.forcing
    }
    pub fn u0(&self) -> &[f64] {
        &self.u0
    }
    pub fn v0(&self) -> &[f64] {
        &self.v0
    }
    pub fn u_hat(&self) -> &Signal {
        &self.u_hat
    }
    pub fn traction(&self) -> &Signal {
        &self.traction
    }
    pub fn f_hat0(&self) -> &[f64] {
        &self.f_hat0
    }
    pub fn p_hat0(&self) -> f64 {
        self.p_hat0
    }
}

/// The volume and contact impulse data required by stationarity:
/// `f_hat0(x) = rho v0(x) - gamma u0''(x)` and `p_hat0 = gamma u0'(l)`,
/// with the derivatives taken by the discrete space stencils.
pub fn natural_impulse_bar(p: &BarProblem) -> (Vec<f64>, f64) {
    natural_impulse_from_parts(p.density, p.viscosity, p.grid.space_step(), &p.u0, &p.v0)
}

fn natural_impulse_from_parts(
    density: f64,
    viscosity: f64,
    hx: f64,
    u0: &[f64],
    v0: &[f64],
) -> (Vec<f64>, f64) {
    let n = u0.len() - 1;
    if viscosity == 0.0 {
        return (v0.iter().map(|&v| density * v).collect(), 0.0);
    }
    let mut upp = vec![0.0; n + 1];
    second_derivative_slice(u0, hx, &mut upp);
    let f_hat0 = v0
        .iter()
        .zip(&upp)
        .map(|(&v, &w)| density * v - viscosity * w)
        .collect();
    let mut up = vec![0.0; n + 1];
    derivative_slice(u0, hx, &mut up);
    (f_hat0, viscosity * up[n])
}

/// An admissible variation for the single-degree-of-freedom actions: a
/// signal vanishing at the initial node. Nothing constrains the final node;
/// that freedom is what lets stationarity produce the initial conditions.
#[derive(Debug, Clone)]
pub struct SdofVariation {
    signal: Signal,
}

impl SdofVariation {
    pub fn new(signal: Signal) -> Result<Self> {
        if signal.value(0) != 0.0 {
            return Err(Error::Admissibility(format!(
                "variation must vanish at s = 0, got {}",
                signal.value(0)
            )));
        }
        Ok(Self { signal })
    }

    /// The nodal basis variation peaked at node `k >= 1`.
    pub fn nodal(grid: TimeGrid, k: usize) -> Result<Self> {
        if k == 0 || k > grid.intervals() {
            return Err(Error::InvalidArgument(format!(
                "nodal variation index must lie in 1..={}, got {k}",
                grid.intervals()
            )));
        }
        let mut sig = Signal::zeros(grid);
        sig.values_mut()[k] = 1.0;
        Ok(Self { signal: sig })
    }

    pub fn signal(&self) -> &Signal {
        &self.signal
    }
}

/// An admissible variation for the bar actions: a field vanishing on the
/// clamped end `x = 0` (all times) and at the initial time `s = 0` (all
/// nodes). The free end and the final time remain unconstrained.
#[derive(Debug, Clone)]
pub struct BarVariation {
    field: Field,
}

impl BarVariation {
    pub fn new(field: Field) -> Result<Self> {
        let grid = field.grid();
        for k in 0..grid.time().node_count() {
            if field.value(0, k) != 0.0 {
                return Err(Error::Admissibility(
                    "variation must vanish on the clamped end x = 0".into(),
                ));
            }
        }
        for i in 0..=grid.space_intervals() {
            if field.value(i, 0) != 0.0 {
                return Err(Error::Admissibility(
                    "variation must vanish at the initial time s = 0".into(),
                ));
            }
        }
        Ok(Self { field })
    }

    /// The nodal basis variation peaked at space node `i >= 1`, time node
    /// `k >= 1`.
    pub fn nodal(grid: SpaceTimeGrid, i: usize, k: usize) -> Result<Self> {
        if i == 0 || i > grid.space_intervals() || k == 0 || k >= grid.time().node_count() {
            return Err(Error::InvalidArgument(format!(
                "nodal variation index ({i}, {k}) outside the free range"
            )));
        }
        let mut f = Field::zeros(grid);
        f.set_value(i, k, 1.0);
        Ok(Self { field: f })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
}

// ---------------------------------------------------------------------------
// discrete quadrature primitives and form matrices
// ---------------------------------------------------------------------------

pub(crate) mod forms {
    /// Forward differences on cells: `(u[k+1] - u[k]) / h`, length `n`.
    pub fn cell_diff(values: &[f64], h: f64) -> Vec<f64> {
        values.windows(2).map(|w| (w[1] - w[0]) / h).collect()
    }

    /// Cell midpoint averages `(u[k] + u[k+1]) / 2`, length `n`.
    pub fn cell_avg(values: &[f64]) -> Vec<f64> {
        values.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Midpoint-rule convolution at the final time of two cell sequences:
    /// `h * sum_k a[k] b[n-1-k]`.
    pub fn midpoint_conv_at_t(a: &[f64], b: &[f64], h: f64) -> f64 {
        let n = a.len();
        let mut acc = 0.0;
        for k in 0..n {
            acc += a[k] * b[n - 1 - k];
        }
        acc * h
    }

    /// Matrix of the quadratic form `u -> [u', u'](t)` with cell differences
    /// and midpoint convolution; dense `(n+1) x (n+1)`, row-major.
    pub fn kinetic_matrix(n: usize, h: f64) -> Vec<f64> {
        let dim = n + 1;
        let mut m = vec![0.0; dim * dim];
        let inv_h = 1.0 / h;
        for k in 0..n {
            let kk = n - 1 - k;
            for (i, ai) in [(k, -inv_h), (k + 1, inv_h)] {
                for (j, bj) in [(kk, -inv_h), (kk + 1, inv_h)] {
                    m[i * dim + j] += h * ai * bj;
                }
            }
        }
        m
    }

    /// Matrix of the trapezoid convolution form `u -> [u, u](t)`:
    /// anti-diagonal quadrature weights.
    pub fn conv_weight_matrix(n: usize, h: f64) -> Vec<f64> {
        let dim = n + 1;
        let mut m = vec![0.0; dim * dim];
        for j in 0..dim {
            let w = if j == 0 || j == n { 0.5 * h } else { h };
            m[j * dim + (n - j)] = w;
        }
        m
    }

    /// Matrix of the dissipative quadratic form
    /// `u -> [u', u](t) + u(0) u(t)` (the convolutional equivalent of the
    /// half-derivative self-convolution), symmetrized.
    pub fn viscous_matrix(n: usize, h: f64) -> Vec<f64> {
        let dim = n + 1;
        let mut b = vec![0.0; dim * dim];
        let inv_h = 1.0 / h;
        for k in 0..n {
            let kk = n - 1 - k;
            for (i, ai) in [(k, -inv_h), (k + 1, inv_h)] {
                for (j, bj) in [(kk, 0.5), (kk + 1, 0.5)] {
                    b[i * dim + j] += h * ai * bj;
                }
            }
        }
        let mut g = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                g[i * dim + j] = 0.5 * (b[i * dim + j] + b[j * dim + i]);
            }
        }
        g[n] += 0.5; // (0, n) entry
        g[n * dim] += 0.5; // (n, 0) entry
        g
    }

    /// Linear-element stiffness in space: matrix of
    /// `u -> sum_cells hx ((u[c+1]-u[c])/hx)^2`.
    pub fn space_stiffness_matrix(nx: usize, hx: f64) -> Vec<f64> {
        let dim = nx + 1;
        let mut m = vec![0.0; dim * dim];
        let w = 1.0 / hx;
        for c in 0..nx {
            m[c * dim + c] += w;
            m[(c + 1) * dim + c + 1] += w;
            m[c * dim + c + 1] -= w;
            m[(c + 1) * dim + c] -= w;
        }
        m
    }
}

use forms::{cell_avg, cell_diff, midpoint_conv_at_t};

// ---------------------------------------------------------------------------
// single degree of freedom
// ---------------------------------------------------------------------------

fn check_sdof_admissible(p: &SdofProblem, u: &Signal) -> Result<()> {
    if u.value(0) != p.u0 {
        return Err(Error::Admissibility(format!(
            "trajectory must start at u0 = {}, got {}",
            p.u0,
            u.value(0)
        )));
    }
    Ok(())
}

/// Value of the convolved action
/// `(m/2)[u',u'] + (c/2)[u^(1/2),u^(1/2)] + (k/2)[u,u] - [f,u] - f0 u(t)`
/// on a trajectory from the admissible set (`u(0) = u0`).
pub fn action_sdof(p: &SdofProblem, u: &Signal) -> Result<f64> {
    check_sdof_admissible(p, u)?;
    let grid = u.grid();
    let h = grid.step();
    let n = grid.intervals();
    let du = cell_diff(u.values(), h);

    let mut total = 0.5 * p.mass * midpoint_conv_at_t(&du, &du, h);
    total += 0.5 * p.stiffness * conv_value_at_t(u.values(), u.values(), h);
    if p.damping != 0.0 {
        let au = cell_avg(u.values());
        let q = midpoint_conv_at_t(&du, &au, h) + u.value(0) * u.value(n);
        total += 0.5 * p.damping * q;
    }
    if !p.forcing.is_zero() {
        let f = p.forcing.sample(grid);
        total -= conv_value_at_t(f.values(), u.values(), h);
    }
    total -= p.f0 * u.value(n);
    Ok(total)
}

/// Exact directional derivative of the discrete action at `u` in an
/// admissible direction (the epsilon-coefficient of the quadratic
/// `action(u + eps eta)`).
pub fn variation_sdof(p: &SdofProblem, u: &Signal, eta: &SdofVariation) -> Result<f64> {
    variation_sdof_with_scale(p, u, eta).map(|(v, _)| v)
}

/// Variation together with the sum of the magnitudes of its constituent
/// terms, the scale used to normalize stationarity residuals.
pub(crate) fn variation_sdof_with_scale(
    p: &SdofProblem,
    u: &Signal,
    eta: &SdofVariation,
) -> Result<(f64, f64)> {
    check_sdof_admissible(p, u)?;
    let eta = eta.signal();
    crate::signals::same_grid(u, eta, "variation_sdof")?;
    let grid = u.grid();
    let h = grid.step();
    let n = grid.intervals();

    let du = cell_diff(u.values(), h);
    let de = cell_diff(eta.values(), h);

    let t_kin = 0.5 * p.mass * (midpoint_conv_at_t(&du, &de, h) + midpoint_conv_at_t(&de, &du, h));
    let t_stiff = 0.5
        * p.stiffness
        * (conv_value_at_t(u.values(), eta.values(), h)
            + conv_value_at_t(eta.values(), u.values(), h));
    let t_visc = if p.damping != 0.0 {
        let au = cell_avg(u.values());
        let ae = cell_avg(eta.values());
        0.5 * p.damping
            * (midpoint_conv_at_t(&du, &ae, h)
                + midpoint_conv_at_t(&de, &au, h)
                + u.value(0) * eta.value(n)
                + eta.value(0) * u.value(n))
    } else {
        0.0
    };
    let t_force = if p.forcing.is_zero() {
        0.0
    } else {
        let f = p.forcing.sample(grid);
        -conv_value_at_t(f.values(), eta.values(), h)
    };
    let t_dirac = -p.f0 * eta.value(n);

    let value = t_kin + t_stiff + t_visc + t_force + t_dirac;
    let scale = t_kin.abs() + t_stiff.abs() + t_visc.abs() + t_force.abs() + t_dirac.abs();
    Ok((value, scale))
}

/// The classical (non-convolved) action
/// `int (m/2) u'^2 - (k/2) u^2 ds - int f u ds`, provided for contrast: its
/// stationarity needs an end-time datum the convolved functional does not.
pub fn action_sdof_classical(p: &SdofProblem, u: &Signal) -> Result<f64> {
    if p.damping != 0.0 {
        return Err(Error::Precondition(
            "the classical action has no dissipative term; damping must be zero".into(),
        ));
    }
    let grid = u.grid();
    let h = grid.step();
    let n = grid.intervals();
    let du = cell_diff(u.values(), h);
    let w = trapezoid_weights(n, h);

    let kinetic: f64 = du.iter().map(|d| d * d).sum::<f64>() * h * 0.5 * p.mass;
    let potential: f64 = u
        .values()
        .iter()
        .zip(&w)
        .map(|(v, wj)| wj * v * v)
        .sum::<f64>()
        * 0.5
        * p.stiffness;
    let work: f64 = if p.forcing.is_zero() {
        0.0
    } else {
        let f = p.forcing.sample(grid);
        f.values()
            .iter()
            .zip(u.values())
            .zip(&w)
            .map(|((fv, uv), wj)| wj * fv * uv)
            .sum()
    };
    Ok(kinetic - potential - work)
}

// ---------------------------------------------------------------------------
// bar
// ---------------------------------------------------------------------------

fn check_bar_admissible(p: &BarProblem, u: &Field) -> Result<()> {
    if u.grid() != p.grid {
        return Err(Error::GridMismatch(
            "trajectory must live on the problem's grid".into(),
        ));
    }
    for k in 0..p.grid.time().node_count() {
        if u.value(0, k) != p.u_hat.value(k) {
            return Err(Error::Admissibility(format!(
                "trajectory must match the clamped-end history at time node {k}"
            )));
        }
    }
    for i in 0..=p.grid.space_intervals() {
        if u.value(i, 0) != p.u0[i] {
            return Err(Error::Admissibility(format!(
                "trajectory must match the initial displacement at space node {i}"
            )));
        }
    }
    Ok(())
}

/// Value of the bar action: kinetic, elastic and (for `gamma > 0`) viscous
/// convolved quadratic terms minus the work of distributed, impulsive and
/// boundary forces.
pub fn action_bar(p: &BarProblem, u: &Field) -> Result<f64> {
    check_bar_admissible(p, u)?;
    let grid = p.grid;
    let nx = grid.space_intervals();
    let nt = grid.time().intervals();
    let h = grid.time().step();
    let hx = grid.space_step();
    let wx = trapezoid_weights(nx, hx);

    let mut total = 0.0;
    // kinetic: nodal in space, cell differences in time
    for i in 0..=nx {
        let du = cell_diff(u.time_slice(i), h);
        total += 0.5 * p.density * wx[i] * midpoint_conv_at_t(&du, &du, h);
    }
    // elastic and viscous: cell differences in space
    let mut strain = vec![0.0; nt + 1];
    for c in 0..nx {
        let left = u.time_slice(c);
        let right = u.time_slice(c + 1);
        for k in 0..=nt {
            strain[k] = (right[k] - left[k]) / hx;
        }
        total += 0.5 * p.elastic_modulus * hx * conv_value_at_t(&strain, &strain, h);
        if p.viscosity != 0.0 {
            let ds = cell_diff(&strain, h);
            let avg = cell_avg(&strain);
            let q = midpoint_conv_at_t(&ds, &avg, h) + strain[0] * strain[nt];
            total += 0.5 * p.viscosity * hx * q;
        }
    }
    // external work: distributed, impulsive, boundary
    for i in 0..=nx {
        let ui = u.time_slice(i);
        total -= wx[i] * conv_value_at_t(p.forcing.time_slice(i), ui, h);
        total -= wx[i] * p.f_hat0[i] * ui[nt];
    }
    total -= conv_value_at_t(p.traction.values(), u.time_slice(nx), h);
    total -= p.p_hat0 * u.value(nx, nt);
    Ok(total)
}

/// Exact directional derivative of the discrete bar action at `u` in an
/// admissible direction.
pub fn variation_bar(p: &BarProblem, u: &Field, v: &BarVariation) -> Result<f64> {
    variation_bar_with_scale(p, u, v).map(|(val, _)| val)
}

pub(crate) fn variation_bar_with_scale(
    p: &BarProblem,
    u: &Field,
    v: &BarVariation,
) -> Result<(f64, f64)> {
    check_bar_admissible(p, u)?;
    let v = v.field();
    if v.grid() != p.grid {
        return Err(Error::GridMismatch(
            "variation must live on the problem's grid".into(),
        ));
    }
    let grid = p.grid;
    let nx = grid.space_intervals();
    let nt = grid.time().intervals();
    let h = grid.time().step();
    let hx = grid.space_step();
    let wx = trapezoid_weights(nx, hx);

    let mut t_kin = 0.0;
    for i in 0..=nx {
        let du = cell_diff(u.time_slice(i), h);
        let dv = cell_diff(v.time_slice(i), h);
        t_kin += 0.5
            * p.density
            * wx[i]
            * (midpoint_conv_at_t(&du, &dv, h) + midpoint_conv_at_t(&dv, &du, h));
    }

    let mut t_el = 0.0;
    let mut t_visc = 0.0;
    let mut su = vec![0.0; nt + 1];
    let mut sv = vec![0.0; nt + 1];
    for c in 0..nx {
        let (ul, ur) = (u.time_slice(c), u.time_slice(c + 1));
        let (vl, vr) = (v.time_slice(c), v.time_slice(c + 1));
        for k in 0..=nt {
            su[k] = (ur[k] - ul[k]) / hx;
            sv[k] = (vr[k] - vl[k]) / hx;
        }
        t_el += 0.5
            * p.elastic_modulus
            * hx
            * (conv_value_at_t(&su, &sv, h) + conv_value_at_t(&sv, &su, h));
        if p.viscosity != 0.0 {
            let dsu = cell_diff(&su, h);
            let dsv = cell_diff(&sv, h);
            let asu = cell_avg(&su);
            let asv = cell_avg(&sv);
            t_visc += 0.5
                * p.viscosity
                * hx
                * (midpoint_conv_at_t(&dsu, &asv, h)
                    + midpoint_conv_at_t(&dsv, &asu, h)
                    + su[0] * sv[nt]
                    + sv[0] * su[nt]);
        }
    }

    let mut t_force = 0.0;
    for i in 0..=nx {
        let vi = v.time_slice(i);
        t_force -= wx[i] * conv_value_at_t(p.forcing.time_slice(i), vi, h);
        t_force -= wx[i] * p.f_hat0[i] * vi[nt];
    }
    let t_trac =
        -conv_value_at_t(p.traction.values(), v.time_slice(nx), h) - p.p_hat0 * v.value(nx, nt);

    let value = t_kin + t_el + t_visc + t_force + t_trac;
    let scale = t_kin.abs() + t_el.abs() + t_visc.abs() + t_force.abs() + t_trac.abs();
    Ok((value, scale))
}
