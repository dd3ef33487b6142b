//! Stationary-trajectory solvers (Galerkin on the nodal basis of the
//! discrete actions) and the independent reference solutions used to verify
//! them.
//!
//! The solvers assemble the exact gradient of the discrete action over the
//! free nodes (everything not pinned by the admissible set: the initial
//! time, and for the bar the clamped end) and solve it with dense LU. Final
//! time and free end stay genuinely free; no end datum enters anywhere.

use crate::action::{
    forms, variation_bar_with_scale, variation_sdof_with_scale, BarProblem, BarVariation, Forcing,
    SdofProblem, SdofVariation,
};
use crate::error::{Error, Result};
use crate::linalg;
use crate::signals::{derivative_slice, sample, Field, Signal, TimeGrid};

/// Knobs for the dense solves.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Refuse dense factorizations above this many free nodes.
    pub max_free_nodes: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_free_nodes: 6000,
        }
    }
}

/// Outcome of a stationarity solve.
#[derive(Debug, Clone)]
pub struct StationaryReport<T> {
    pub solution: T,
    /// Max over the free nodal basis of the variation's magnitude,
    /// normalized by the gradient scale (see `certify_stationarity_*`).
    pub residual_sup: f64,
    /// Number of free nodal values solved for.
    pub system_size: usize,
    /// Ratio of extreme pivot magnitudes from the LU factorization; a cheap
    /// indicator, not a rigorous condition number.
    pub condition_estimate: f64,
}

pub fn solve_sdof(p: &SdofProblem, grid: TimeGrid) -> Result<StationaryReport<Signal>> {
    solve_sdof_with(p, grid, &SolverOptions::default())
}

/// Find the stationary trajectory of the discrete single-degree-of-freedom
/// action: node 0 is pinned to `u0`, nodes `1..=n` (the final node included)
/// are solved for.
pub fn solve_sdof_with(
    p: &SdofProblem,
    grid: TimeGrid,
    opts: &SolverOptions,
) -> Result<StationaryReport<Signal>> {
    let n = grid.intervals();
    if n < 8 {
        return Err(Error::Precondition(format!(
            "solve_sdof needs at least 8 intervals, got {n}"
        )));
    }
    if n > opts.max_free_nodes {
        return Err(Error::FreeNodeCap {
            free_nodes: n,
            cap: opts.max_free_nodes,
        });
    }
    let h = grid.step();
    let dim = n + 1;

    let kin = forms::kinetic_matrix(n, h);
    let conv = forms::conv_weight_matrix(n, h);
    let visc = if p.damping() != 0.0 {
        Some(forms::viscous_matrix(n, h))
    } else {
        None
    };
    let hess = |i: usize, j: usize| -> f64 {
        let mut v = p.mass() * kin[i * dim + j] + p.stiffness() * conv[i * dim + j];
        if let Some(g) = &visc {
            v += p.damping() * g[i * dim + j];
        }
        v
    };

    // gradient constant: external work and the Dirac impulse
    let mut g_lin = vec![0.0; dim];
    if !p.forcing().is_zero() {
        let f = p.forcing().sample(grid);
        for (i, gi) in g_lin.iter_mut().enumerate() {
            let w = if i == 0 || i == n { 0.5 * h } else { h };
            *gi -= w * f.value(n - i);
        }
    }
    g_lin[n] -= p.f0();

    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    for r in 0..n {
        let i = r + 1;
        for c in 0..n {
            a[r * n + c] = hess(i, c + 1);
        }
        b[r] = -g_lin[i] - hess(i, 0) * p.u0();
    }

    let lu = linalg::lu_factor(a, n)?;
    lu.solve_in_place(&mut b);

    let mut values = Vec::with_capacity(dim);
    values.push(p.u0());
    values.extend_from_slice(&b);
    let solution = Signal::new(grid, values)?;
    let residual_sup = certify_stationarity_sdof(p, &solution)?;
    Ok(StationaryReport {
        solution,
        residual_sup,
        system_size: n,
        condition_estimate: lu.condition_estimate,
    })
}

pub fn solve_bar(p: &BarProblem) -> Result<StationaryReport<Field>> {
    solve_bar_with(p, &SolverOptions::default())
}

/// Find the stationary field of the discrete bar action: the clamped-end
/// column is pinned to the Dirichlet history and the initial row to `u0`;
/// the free end and the final time are solved for.
pub fn solve_bar_with(p: &BarProblem, opts: &SolverOptions) -> Result<StationaryReport<Field>> {
    let grid = p.grid();
    let nx = grid.space_intervals();
    let nt = grid.time().intervals();
    let free = nx * nt;
    if free > opts.max_free_nodes {
        return Err(Error::FreeNodeCap {
            free_nodes: free,
            cap: opts.max_free_nodes,
        });
    }
    let h = grid.time().step();
    let hx = grid.space_step();
    let tdim = nt + 1;

    let kin = forms::kinetic_matrix(nt, h);
    let conv = forms::conv_weight_matrix(nt, h);
    let visc = if p.viscosity() != 0.0 {
        Some(forms::viscous_matrix(nt, h))
    } else {
        None
    };
    let stiff = forms::space_stiffness_matrix(nx, hx);
    let wx = crate::signals::trapezoid_weights(nx, hx);

    let tblock = |s_ij: f64, diag: bool, k: usize, m: usize, wxi: f64| -> f64 {
        let mut v = p.elastic_modulus() * s_ij * conv[k * tdim + m];
        if let Some(g) = &visc {
            v += p.viscosity() * s_ij * g[k * tdim + m];
        }
        if diag {
            v += p.density() * wxi * kin[k * tdim + m];
        }
        v
    };

    let xdim = nx + 1;
    let mut a = vec![0.0; free * free];
    let mut rhs = vec![0.0; free];
    let row_of = |i: usize, k: usize| (i - 1) * nt + (k - 1);

    for i in 1..=nx {
        for k in 1..=nt {
            let r = row_of(i, k);
            let j_lo = i.saturating_sub(1);
            let j_hi = (i + 1).min(nx);
            for j in j_lo..=j_hi {
                let s_ij = stiff[i * xdim + j];
                let diag = i == j;
                if s_ij == 0.0 && !diag {
                    continue;
                }
                for m in 0..=nt {
                    let v = tblock(s_ij, diag, k, m, wx[i]);
                    if v == 0.0 {
                        continue;
                    }
                    if j == 0 {
                        rhs[r] -= v * p.u_hat().value(m);
                    } else if m == 0 {
                        rhs[r] -= v * p.u0()[j];
                    } else {
                        a[r * free + row_of(j, m)] += v;
                    }
                }
            }
            // external work gradient
            let w_t = if k == nt { 0.5 * h } else { h };
            rhs[r] += wx[i] * w_t * p.forcing().value(i, nt - k);
            if k == nt {
                rhs[r] += wx[i] * p.f_hat0()[i];
            }
            if i == nx {
                rhs[r] += w_t * p.traction().value(nt - k);
                if k == nt {
                    rhs[r] += p.p_hat0();
                }
            }
        }
    }

    let lu = linalg::lu_factor(a, free)?;
    lu.solve_in_place(&mut rhs);

    let mut solution = Field::zeros(grid);
    for i in 0..=nx {
        solution.set_value(i, 0, p.u0()[i]);
    }
    for k in 0..=nt {
        solution.set_value(0, k, p.u_hat().value(k));
    }
    for i in 1..=nx {
        for k in 1..=nt {
            solution.set_value(i, k, rhs[row_of(i, k)]);
        }
    }
    let residual_sup = certify_stationarity_bar(p, &solution)?;
    Ok(StationaryReport {
        solution,
        residual_sup,
        system_size: free,
        condition_estimate: lu.condition_estimate,
    })
}

/// Max over the free nodal basis of `|variation(p, u, e_k)|`, normalized by
/// the largest term-magnitude sum encountered (the gradient scale). Zero
/// data and a zero trajectory certify as exactly stationary.
pub fn certify_stationarity_sdof(p: &SdofProblem, u: &Signal) -> Result<f64> {
    let grid = u.grid();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for k in 1..=grid.intervals() {
        let eta = SdofVariation::nodal(grid, k)?;
        let (value, s) = variation_sdof_with_scale(p, u, &eta)?;
        worst = worst.max(value.abs());
        scale = scale.max(s);
    }
    Ok(if scale > 0.0 { worst / scale } else { 0.0 })
}

/// Bar counterpart of [`certify_stationarity_sdof`].
pub fn certify_stationarity_bar(p: &BarProblem, u: &Field) -> Result<f64> {
    let grid = p.grid();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for i in 1..=grid.space_intervals() {
        for k in 1..=grid.time().intervals() {
            let v = BarVariation::nodal(grid, i, k)?;
            let (value, s) = variation_bar_with_scale(p, u, &v)?;
            worst = worst.max(value.abs());
            scale = scale.max(s);
        }
    }
    Ok(if scale > 0.0 { worst / scale } else { 0.0 })
}

// ---------------------------------------------------------------------------
// reference solutions
// ---------------------------------------------------------------------------

/// Independent reference for the single-degree-of-freedom initial value
/// problem: closed forms for free and sinusoidally forced motion (all
/// damping branches), explicit fourth-order integration at step `h/8`
/// otherwise, resampled to the grid.
pub fn reference_sdof(p: &SdofProblem, grid: TimeGrid) -> Signal {
    match p.forcing() {
        Forcing::Zero => {
            let f = homogeneous_closed_form(p.mass(), p.damping(), p.stiffness(), p.u0(), p.v0());
            sample(&*f, grid)
        }
        Forcing::Sinusoid { amplitude, omega } => {
            let (m, c, k) = (p.mass(), p.damping(), p.stiffness());
            let dk = k - m * omega * omega;
            let denom = dk * dk + (c * omega) * (c * omega);
            let scale = k.max(m * omega * omega).max(1.0);
            if denom <= 1e-14 * scale * scale {
                return rk4_reference(p, grid); // undamped resonance
            }
            let (a, w) = (*amplitude, *omega);
            let up = move |s: f64| a * (dk * (w * s).sin() - c * w * (w * s).cos()) / denom;
            let up0 = -a * c * w / denom;
            let dup0 = a * w * dk / denom;
            let hom = homogeneous_closed_form(m, c, k, p.u0() - up0, p.v0() - dup0);
            sample(|s| hom(s) + up(s), grid)
        }
        _ => rk4_reference(p, grid),
    }
}

fn homogeneous_closed_form(m: f64, c: f64, k: f64, u0: f64, v0: f64) -> Box<dyn Fn(f64) -> f64> {
    if k == 0.0 {
        if c == 0.0 {
            return Box::new(move |s| u0 + v0 * s);
        }
        let rate = c / m;
        return Box::new(move |s| u0 + (v0 / rate) * (1.0 - (-rate * s).exp()));
    }
    let disc = c * c - 4.0 * m * k;
    let scale = (c * c).max(4.0 * m * k);
    if disc.abs() <= 1e-12 * scale {
        let lam = -c / (2.0 * m);
        let b = v0 - lam * u0;
        Box::new(move |s| (u0 + b * s) * (lam * s).exp())
    } else if disc > 0.0 {
        let r1 = (-c + disc.sqrt()) / (2.0 * m);
        let r2 = (-c - disc.sqrt()) / (2.0 * m);
        let b = (v0 - r1 * u0) / (r2 - r1);
        let a = u0 - b;
        Box::new(move |s| a * (r1 * s).exp() + b * (r2 * s).exp())
    } else {
        let lam = -c / (2.0 * m);
        let wr = (-disc).sqrt() / (2.0 * m);
        let b = (v0 - lam * u0) / wr;
        Box::new(move |s| (lam * s).exp() * (u0 * (wr * s).cos() + b * (wr * s).sin()))
    }
}

fn rk4_reference(p: &SdofProblem, grid: TimeGrid) -> Signal {
    let n = grid.intervals();
    let sub = 8usize;
    let dt = grid.step() / sub as f64;
    let (m, c, k) = (p.mass(), p.damping(), p.stiffness());
    let accel = |s: f64, u: f64, v: f64| (p.forcing().value_at(s) - c * v - k * u) / m;
    let mut u = p.u0();
    let mut v = p.v0();
    let mut values = Vec::with_capacity(n + 1);
    values.push(u);
    for step in 0..n * sub {
        let s = step as f64 * dt;
        let (k1u, k1v) = (v, accel(s, u, v));
        let (k2u, k2v) = (
            v + 0.5 * dt * k1v,
            accel(s + 0.5 * dt, u + 0.5 * dt * k1u, v + 0.5 * dt * k1v),
        );
        let (k3u, k3v) = (
            v + 0.5 * dt * k2v,
            accel(s + 0.5 * dt, u + 0.5 * dt * k2u, v + 0.5 * dt * k2v),
        );
        let (k4u, k4v) = (v + dt * k3v, accel(s + dt, u + dt * k3u, v + dt * k3v));
        u += dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if (step + 1) % sub == 0 {
            values.push(u);
        }
    }
    Signal::new(grid, values).expect("resampled to grid length")
}

/// Truncated eigenfunction reference for the homogeneous fixed-free elastic
/// bar: modes `sin((2j-1) pi x / 2l)`, coefficients by discrete projection
/// of the initial data (the trapezoid projection is exactly orthogonal on
/// the uniform grid).
pub fn reference_bar_modal(p: &BarProblem) -> Result<Field> {
    if p.viscosity() != 0.0 {
        return Err(Error::Precondition(
            "modal reference covers the elastic bar only (viscosity = 0)".into(),
        ));
    }
    let homogeneous = p.u_hat().values().iter().all(|&v| v == 0.0)
        && p.traction().values().iter().all(|&v| v == 0.0)
        && p.forcing().values().iter().all(|&v| v == 0.0);
    if !homogeneous {
        return Err(Error::Precondition(
            "modal reference needs zero Dirichlet history, traction and forcing".into(),
        ));
    }
    let grid = p.grid();
    let nx = grid.space_intervals();
    let l = grid.length();
    let hx = grid.space_step();
    let wx = crate::signals::trapezoid_weights(nx, hx);
    let wave_speed = (p.elastic_modulus() / p.density()).sqrt();

    let mut field = Field::zeros(grid);
    for j in 1..=nx {
        let lam = (2 * j - 1) as f64 * std::f64::consts::PI / (2.0 * l);
        let omega = lam * wave_speed;
        let shape: Vec<f64> = (0..=nx).map(|i| (lam * grid.node_x(i)).sin()).collect();
        let mut a = 0.0;
        let mut b = 0.0;
        for i in 0..=nx {
            a += wx[i] * p.u0()[i] * shape[i];
            b += wx[i] * p.v0()[i] * shape[i];
        }
        a *= 2.0 / l;
        b *= 2.0 / l;
        if a == 0.0 && b == 0.0 {
            continue;
        }
        for i in 0..=nx {
            for k in 0..grid.time().node_count() {
                let s = grid.time().node(k);
                let add = shape[i] * (a * (omega * s).cos() + b / omega * (omega * s).sin());
                let cur = field.value(i, k);
                field.set_value(i, k, cur + add);
            }
        }
    }
    Ok(field)
}

/// Method-of-lines reference for the (visco)elastic bar: second-order
/// central differences in space with a ghost-node treatment of the free
/// end, implicit trapezoidal stepping at `h/4` resampled to the grid.
/// Unconditionally stable for `gamma >= 0`.
pub fn reference_bar_timestep(p: &BarProblem) -> Field {
    let grid = p.grid();
    let nx = grid.space_intervals();
    let nt = grid.time().intervals();
    let hx = grid.space_step();
    let h = grid.time().step();
    let sub = 4usize;
    let dt = h / sub as f64;
    let m = nx; // unknown space nodes 1..=nx
    let dim = 2 * m;

    // semi-discrete Laplacian on the unknowns (row i-1 for node i)
    let mut lap = vec![0.0; m * m];
    let inv_hx2 = 1.0 / (hx * hx);
    for i in 1..=nx {
        let r = i - 1;
        if i < nx {
            if i > 1 {
                lap[r * m + r - 1] += inv_hx2;
            }
            lap[r * m + r] -= 2.0 * inv_hx2;
            lap[r * m + r + 1] += inv_hx2;
        } else {
            // ghost node at the free end, boundary condition eliminated
            lap[r * m + r - 1] += 2.0 * inv_hx2;
            lap[r * m + r] -= 2.0 * inv_hx2;
        }
    }

    let (rho, e_mod, gamma) = (p.density(), p.elastic_modulus(), p.viscosity());
    let mut a = vec![0.0; dim * dim];
    for i in 0..m {
        a[i * dim + m + i] = 1.0;
        for j in 0..m {
            a[(m + i) * dim + j] = e_mod / rho * lap[i * m + j];
            a[(m + i) * dim + m + j] = gamma / rho * lap[i * m + j];
        }
    }

    let mut m1 = vec![0.0; dim * dim];
    let mut m2 = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let id = if i == j { 1.0 } else { 0.0 };
            m1[i * dim + j] = id - 0.5 * dt * a[i * dim + j];
            m2[i * dim + j] = id + 0.5 * dt * a[i * dim + j];
        }
    }
    let lu = linalg::lu_factor(m1, dim).expect("trapezoidal step matrix is regular");

    // boundary/forcing data at arbitrary times, interpolated linearly
    let u_hat_prime = {
        let mut d = vec![0.0; nt + 1];
        derivative_slice(p.u_hat().values(), h, &mut d);
        d
    };
    let interp = |vals: &[f64], s: f64| -> f64 {
        let x = (s / h).clamp(0.0, nt as f64);
        let j = (x.floor() as usize).min(nt - 1);
        let w = x - j as f64;
        (1.0 - w) * vals[j] + w * vals[j + 1]
    };
    let forcing_at = |i: usize, s: f64| interp(p.forcing().time_slice(i), s);
    let b_at = |s: f64, out: &mut [f64]| {
        for v in out.iter_mut() {
            *v = 0.0;
        }
        let uh = interp(p.u_hat().values(), s);
        let uhp = interp(&u_hat_prime, s);
        for i in 1..=nx {
            let r = m + i - 1;
            out[r] = forcing_at(i, s) / rho;
            if i == 1 {
                out[r] += (e_mod * uh + gamma * uhp) / (rho * hx * hx);
            }
            if i == nx {
                out[r] += 2.0 * interp(p.traction().values(), s) / (rho * hx);
            }
        }
    };

    let mut y = vec![0.0; dim];
    for i in 1..=nx {
        y[i - 1] = p.u0()[i];
        y[m + i - 1] = p.v0()[i];
    }
    let mut field = Field::zeros(grid);
    for i in 0..=nx {
        field.set_value(i, 0, p.u0()[i]);
    }
    for k in 0..=nt {
        field.set_value(0, k, p.u_hat().value(k));
    }

    let mut b0 = vec![0.0; dim];
    let mut b1 = vec![0.0; dim];
    let mut rhs = vec![0.0; dim];
    for step in 0..nt * sub {
        let s0 = step as f64 * dt;
        let s1 = s0 + dt;
        b_at(s0, &mut b0);
        b_at(s1, &mut b1);
        for i in 0..dim {
            let mut acc = 0.0;
            for j in 0..dim {
                acc += m2[i * dim + j] * y[j];
            }
            rhs[i] = acc + 0.5 * dt * (b0[i] + b1[i]);
        }
        lu.solve_in_place(&mut rhs);
        y.copy_from_slice(&rhs);
        if (step + 1) % sub == 0 {
            let k = (step + 1) / sub;
            for i in 1..=nx {
                field.set_value(i, k, y[i - 1]);
            }
        }
    }
    field
}

/// Natural-impulse consistency of a solved bar problem, used by the
/// experiment reports: sup over time of the free-end flux residual
/// `E u_x(l, s) + gamma u_xs(l, s) - p(s)` (discrete readings).
pub fn bar_flux_residual(p: &BarProblem, u: &Field) -> f64 {
    let grid = p.grid();
    let nx = grid.space_intervals();
    let nt = grid.time().intervals();
    let hx = grid.space_step();
    let h = grid.time().step();
    let mut ux_end = vec![0.0; nt + 1];
    let mut col = vec![0.0; nx + 1];
    let mut dcol = vec![0.0; nx + 1];
    for k in 0..=nt {
        for i in 0..=nx {
            col[i] = u.value(i, k);
        }
        derivative_slice(&col, hx, &mut dcol);
        ux_end[k] = dcol[nx];
    }
    let mut uxs_end = vec![0.0; nt + 1];
    derivative_slice(&ux_end, h, &mut uxs_end);
    let mut worst = 0.0f64;
    for k in 0..=nt {
        let r =
            p.elastic_modulus() * ux_end[k] + p.viscosity() * uxs_end[k] - p.traction().value(k);
        worst = worst.max(r.abs());
    }
    worst
}

/// `|gamma u_x(l, 0) - p_hat0|` for a solved bar problem (zero identically
/// in the elastic case).
pub fn bar_contact_impulse_residual(p: &BarProblem, u: &Field) -> f64 {
    let grid = p.grid();
    let nx = grid.space_intervals();
    let hx = grid.space_step();
    let col: Vec<f64> = (0..=nx).map(|i| u.value(i, 0)).collect();
    let mut dcol = vec![0.0; nx + 1];
    derivative_slice(&col, hx, &mut dcol);
    (p.viscosity() * dcol[nx] - p.p_hat0()).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::natural_impulse_sdof;
    use crate::signals::{sample, Signal, SpaceTimeGrid};
    use std::f64::consts::PI;

    fn tgrid(n: usize) -> TimeGrid {
        TimeGrid::new(1.0, n).unwrap()
    }

    fn free_sdof(m: f64, c: f64, k: f64, u0: f64, v0: f64) -> SdofProblem {
        SdofProblem::with_natural_impulse(m, c, k, Forcing::Zero, u0, v0).unwrap()
    }

    #[test]
    fn conservative_cosine_recovered() {
        let p = free_sdof(1.0, 0.0, 1.0, 1.0, 0.0);
        let g = tgrid(256);
        let rep = solve_sdof(&p, g).unwrap();
        let err = rep.solution.sup_distance(&sample(f64::cos, g)).unwrap();
        assert!(err < 1e-3, "sup err {err}");
        assert!(rep.residual_sup <= 1e-10, "residual {}", rep.residual_sup);
        assert_eq!(rep.system_size, 256);
    }

    #[test]
    fn free_particle_recovered() {
        let p = SdofProblem::new(1.0, 0.0, 0.0, Forcing::Zero, 0.0, 1.0, 1.0).unwrap();
        let g = tgrid(256);
        let rep = solve_sdof(&p, g).unwrap();
        let err = rep.solution.sup_distance(&sample(|s| s, g)).unwrap();
        assert!(err < 1e-3, "sup err {err}");
        // degenerate k = c = 0 stays solvable: the kinetic convolution form
        // is nondegenerate on the free nodes
        assert!(rep.condition_estimate.is_finite());
    }

    #[test]
    fn critically_damped_recovered() {
        let p = free_sdof(1.0, 2.0, 1.0, 1.0, 0.0);
        assert_eq!(p.f0(), 2.0);
        let g = tgrid(512);
        let rep = solve_sdof(&p, g).unwrap();
        let reference = sample(|s| (1.0 + s) * (-s).exp(), g);
        let err = rep.solution.sup_distance(&reference).unwrap();
        assert!(err < 5e-3, "sup err {err}");
    }

    #[test]
    fn grid_too_coarse_is_rejected() {
        let p = free_sdof(1.0, 0.0, 1.0, 1.0, 0.0);
        assert!(matches!(
            solve_sdof(&p, TimeGrid::new(1.0, 4).unwrap()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn free_node_cap_guard() {
        let p = free_sdof(1.0, 0.0, 1.0, 1.0, 0.0);
        let opts = SolverOptions { max_free_nodes: 10 };
        match solve_sdof_with(&p, tgrid(64), &opts) {
            Err(Error::FreeNodeCap { free_nodes, cap }) => {
                assert_eq!((free_nodes, cap), (64, 10));
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn certification_of_reference_and_perturbation() {
        let p = free_sdof(1.0, 0.0, 1.0, 1.0, 0.0);
        let g = tgrid(256);
        let reference = sample(f64::cos, g);
        let base = certify_stationarity_sdof(&p, &reference).unwrap();
        assert!(base <= 2e-3, "certified residual {base}");

        let mut perturbed = reference.values().to_vec();
        perturbed[128] += 1e-2;
        let perturbed = Signal::new(g, perturbed).unwrap();
        let worse = certify_stationarity_sdof(&p, &perturbed).unwrap();
        assert!(worse > base, "{worse} vs {base}");
    }

    #[test]
    fn certification_halves_under_refinement() {
        let p = free_sdof(1.0, 0.0, 1.0, 1.0, 0.0);
        let r1 = certify_stationarity_sdof(&p, &sample(f64::cos, tgrid(128))).unwrap();
        let r2 = certify_stationarity_sdof(&p, &sample(f64::cos, tgrid(256))).unwrap();
        assert!(r2 <= 0.5 * r1, "no halving: {r1} -> {r2}");
    }

    #[test]
    fn zero_data_yields_zero_trajectory() {
        let p = free_sdof(1.0, 0.5, 2.0, 0.0, 0.0);
        let rep = solve_sdof(&p, tgrid(64)).unwrap();
        assert!(rep.solution.sup_norm() == 0.0 || rep.solution.sup_norm() < 1e-14);
    }

    #[test]
    fn reference_closed_forms() {
        let g = tgrid(128);
        let cosine = reference_sdof(&free_sdof(1.0, 0.0, 1.0, 1.0, 0.0), g);
        assert!(cosine.sup_distance(&sample(f64::cos, g)).unwrap() < 1e-12);
        let sine = reference_sdof(&free_sdof(1.0, 0.0, 1.0, 0.0, 1.0), g);
        assert!(sine.sup_distance(&sample(f64::sin, g)).unwrap() < 1e-12);
        let crit = reference_sdof(&free_sdof(1.0, 2.0, 1.0, 1.0, 0.0), g);
        assert!(
            crit.sup_distance(&sample(|s| (1.0 + s) * (-s).exp(), g))
                .unwrap()
                < 1e-12
        );
    }

    #[test]
    fn reference_overdamped_and_underdamped_match_rk4() {
        let g = tgrid(128);
        for (c, k) in [(3.0, 1.0), (0.5, 4.0)] {
            let p = free_sdof(1.0, c, k, 1.0, -0.5);
            let closed = reference_sdof(&p, g);
            let forced = SdofProblem::new(
                1.0,
                c,
                k,
                Forcing::Tabulated(Signal::zeros(g)),
                1.0,
                -0.5,
                natural_impulse_sdof(&p),
            )
            .unwrap();
            let integrated = reference_sdof(&forced, g);
            let diff = closed.sup_distance(&integrated).unwrap();
            assert!(diff < 1e-8, "c={c} k={k}: {diff}");
        }
    }

    #[test]
    fn reference_sinusoidal_forcing() {
        let g = tgrid(128);
        let p = SdofProblem::with_natural_impulse(
            1.0,
            0.3,
            4.0,
            Forcing::Sinusoid {
                amplitude: 2.0,
                omega: 1.5,
            },
            0.2,
            -0.1,
        )
        .unwrap();
        let closed = reference_sdof(&p, g);
        let tabulated = SdofProblem::new(
            1.0,
            0.3,
            4.0,
            Forcing::Tabulated(sample(|s| 2.0 * (1.5 * s).sin(), g)),
            0.2,
            -0.1,
            p.f0(),
        )
        .unwrap();
        let integrated = reference_sdof(&tabulated, g);
        let diff = closed.sup_distance(&integrated).unwrap();
        // rk4 on linearly interpolated forcing limits the agreement
        assert!(diff < 1e-5, "{diff}");
    }

    // ----- bar -----

    fn bar_grid(nx: usize, nt: usize) -> SpaceTimeGrid {
        SpaceTimeGrid::new(1.0, nx, TimeGrid::new(1.0, nt).unwrap()).unwrap()
    }

    fn quiet_bar(
        rho: f64,
        e: f64,
        gamma: f64,
        grid: SpaceTimeGrid,
        u0: Vec<f64>,
        v0: Vec<f64>,
    ) -> BarProblem {
        BarProblem::with_natural_impulse(
            rho,
            e,
            gamma,
            grid,
            Field::zeros(grid),
            u0,
            v0,
            Signal::zeros(grid.time()),
            Signal::zeros(grid.time()),
        )
        .unwrap()
    }

    fn standing_wave_problem(nx: usize, nt: usize, gamma: f64) -> BarProblem {
        let g = bar_grid(nx, nt);
        let u0: Vec<f64> = (0..=nx).map(|i| (PI * g.node_x(i) / 2.0).sin()).collect();
        quiet_bar(1.0, 1.0, gamma, g, u0, vec![0.0; nx + 1])
    }

    #[test]
    fn elastic_standing_wave_recovered() {
        let p = standing_wave_problem(24, 48, 0.0);
        let rep = solve_bar(&p).unwrap();
        let exact = Field::from_fn(p.grid(), |x, s| (PI * x / 2.0).sin() * (PI * s / 2.0).cos());
        let err = rep.solution.sup_distance(&exact).unwrap();
        assert!(err < 2e-2, "sup err {err}");
        assert!(rep.residual_sup <= 1e-10, "residual {}", rep.residual_sup);
        assert_eq!(rep.system_size, 24 * 48);
    }

    #[test]
    fn all_zero_bar_data_gives_zero_field() {
        let g = bar_grid(8, 12);
        let p = quiet_bar(1.0, 1.0, 0.0, g, vec![0.0; 9], vec![0.0; 9]);
        let rep = solve_bar(&p).unwrap();
        assert!(rep.solution.values().iter().all(|&v| v.abs() < 1e-14));
    }

    #[test]
    fn viscoelastic_bar_matches_method_of_lines() {
        let p = standing_wave_problem(16, 48, 0.05);
        let rep = solve_bar(&p).unwrap();
        let reference = reference_bar_timestep(&p);
        let err = rep.solution.sup_distance(&reference).unwrap();
        assert!(err < 5e-2, "sup err {err}");
    }

    #[test]
    fn modal_reference_single_mode() {
        let p = standing_wave_problem(16, 32, 0.0);
        let modal = reference_bar_modal(&p).unwrap();
        let exact = Field::from_fn(p.grid(), |x, s| (PI * x / 2.0).sin() * (PI * s / 2.0).cos());
        let err = modal.sup_distance(&exact).unwrap();
        assert!(err < 1e-12, "single mode should be exact, got {err}");
    }

    #[test]
    fn modal_reference_zero_data() {
        let g = bar_grid(8, 8);
        let p = quiet_bar(1.0, 1.0, 0.0, g, vec![0.0; 9], vec![0.0; 9]);
        let modal = reference_bar_modal(&p).unwrap();
        assert!(modal.values().iter().all(|&v| v == 0.0));
        let stepped = reference_bar_timestep(&p);
        assert!(stepped.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn modal_reference_velocity_start() {
        let nx = 16;
        let g = bar_grid(nx, 32);
        let v0: Vec<f64> = (0..=nx).map(|i| (PI * g.node_x(i) / 2.0).sin()).collect();
        let p = quiet_bar(1.0, 1.0, 0.0, g, vec![0.0; nx + 1], v0);
        let modal = reference_bar_modal(&p).unwrap();
        let w1 = PI / 2.0;
        let exact = Field::from_fn(g, move |x, s| (PI * x / 2.0).sin() * (w1 * s).sin() / w1);
        assert!(modal.sup_distance(&exact).unwrap() < 1e-12);
    }

    #[test]
    fn modal_reference_rejects_viscosity() {
        let p = standing_wave_problem(8, 8, 0.05);
        assert!(reference_bar_modal(&p).is_err());
    }

    #[test]
    fn timestep_agrees_with_modal() {
        let p = standing_wave_problem(32, 128, 0.0);
        let modal = reference_bar_modal(&p).unwrap();
        let mol = reference_bar_timestep(&p);
        let err = modal.sup_distance(&mol).unwrap();
        assert!(err < 1e-3, "cross-oracle gap {err}");
    }

    #[test]
    fn strong_damping_decays_monotonically() {
        let nx = 16;
        let nt = 64;
        let p = standing_wave_problem(nx, nt, 10.0);
        let field = reference_bar_timestep(&p);
        let g = p.grid();
        let hx = g.space_step();
        let h = g.time().step();
        let wx = crate::signals::trapezoid_weights(nx, hx);
        let energy = |k: usize| -> f64 {
            let mut e = 0.0;
            for i in 0..=nx {
                let us = if k == 0 {
                    (field.value(i, 1) - field.value(i, 0)) / h
                } else if k == nt {
                    (field.value(i, nt) - field.value(i, nt - 1)) / h
                } else {
                    (field.value(i, k + 1) - field.value(i, k - 1)) / (2.0 * h)
                };
                let col: Vec<f64> = (0..=nx).map(|j| field.value(j, k)).collect();
                let mut d = vec![0.0; nx + 1];
                derivative_slice(&col, hx, &mut d);
                e += wx[i] * (p.density() * us * us + p.elastic_modulus() * d[i] * d[i]);
            }
            0.5 * e
        };
        let mut prev = energy(0);
        for k in 1..=nt {
            let cur = energy(k);
            assert!(
                cur <= prev + 1e-12,
                "energy rose at step {k}: {prev} -> {cur}"
            );
            prev = cur;
        }
    }

    #[test]
    fn bar_certification_against_exact_wave() {
        let p = standing_wave_problem(16, 32, 0.0);
        let exact = Field::from_fn(p.grid(), |x, s| (PI * x / 2.0).sin() * (PI * s / 2.0).cos());
        let res = certify_stationarity_bar(&p, &exact).unwrap();
        assert!(res < 2e-3, "residual {res}");
    }

    #[test]
    fn solver_oracle_convergence_orders() {
        // conservative case at least second order, damped at least first
        let order = |c: f64| {
            let p = free_sdof(1.0, c, 1.0, 1.0, 0.0);
            let err = |n: usize| {
                let g = tgrid(n);
                let rep = solve_sdof(&p, g).unwrap();
                rep.solution.sup_distance(&reference_sdof(&p, g)).unwrap()
            };
            (err(128) / err(256)).log2()
        };
        let conservative = order(0.0);
        let damped = order(2.0);
        assert!(conservative >= 2.0 - 0.2, "conservative order {conservative}");
        assert!(damped >= 1.0, "damped order {damped}");
    }

    #[test]
    fn natural_condition_recovery_under_refinement() {
        // discrete u'(0) of the solved conservative trajectory tends to
        // v0 = f0 / m; with damping, m u'(0) + c u0 tends to f0
        let run = |c: f64, n: usize| -> f64 {
            let p = free_sdof(1.0, c, 1.0, 1.0, 0.0);
            let rep = solve_sdof(&p, tgrid(n)).unwrap();
            let d = crate::signals::derivative(&rep.solution);
            (p.mass() * d.value(0) + p.damping() * p.u0() - p.f0()).abs()
        };
        for c in [0.0, 2.0] {
            let (e1, e2) = (run(c, 128), run(c, 256));
            assert!(e2 < e1, "c={c}: {e1} -> {e2}");
            assert!(e2 < 1e-3, "c={c}: {e2}");
        }
    }

    #[test]
    fn viscoelastic_flux_residuals_shrink() {
        let run = |nx: usize, nt: usize| -> (f64, f64) {
            let p = standing_wave_problem(nx, nt, 0.05);
            let rep = solve_bar(&p).unwrap();
            (
                bar_flux_residual(&p, &rep.solution),
                bar_contact_impulse_residual(&p, &rep.solution),
            )
        };
        let (flux1, contact1) = run(12, 36);
        let (flux2, contact2) = run(16, 48);
        assert!(
            flux2 < flux1,
            "flux residual did not shrink: {flux1} -> {flux2}"
        );
        assert!(contact1 < 5e-2 && contact2 < 5e-2, "{contact1}, {contact2}");
    }
}
