//! Batch experiment runner: identity suites, solver-versus-oracle studies,
//! convergence tables, and plot-data export.
//!
//! Configurations are single JSON documents with named analytic presets for
//! forcing and initial data (tabulated samples cover everything else), a
//! refinement grid list, and an output prefix. Reports are written as JSON
//! plus a long-format CSV; the CSV carries only the numeric metrics, so the
//! bytes are reproducible run to run.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::action::{forms, BarProblem, Forcing, SdofProblem};
use crate::convolution::{conv_commutativity_residual, conv_ibp_residual, convolve};
use crate::error::{Error, Result};
use crate::fractional::{
    half_energy_identity, half_ibp_residual, HalfOperatorScheme, HalfSchemeKind,
};
use crate::linalg;
use crate::signals::{
    derivative, sample, trapezoid_weights, Field, Signal, SpaceTimeGrid, TimeGrid,
};
use crate::solver::{
    bar_contact_impulse_residual, bar_flux_residual, reference_bar_modal, reference_bar_timestep,
    reference_sdof, solve_bar_with, solve_sdof_with, SolverOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Identities,
    Sdof,
    SdofDamped,
    Bar,
    BarViscoelastic,
    ClassicalContrast,
}

/// Refinement grids: interval counts for time-only experiments, or
/// `(nx, nt)` pairs for the bar.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridList {
    Time(Vec<usize>),
    SpaceTime(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingPreset {
    Zero,
    Constant { value: f64 },
    Sinusoid { amplitude: f64, omega: f64 },
    Samples { values: Vec<f64> },
}

impl ForcingPreset {
    fn build(&self, t_final: f64, what: &str) -> Result<Forcing> {
        Ok(match self {
            ForcingPreset::Zero => Forcing::Zero,
            ForcingPreset::Constant { value } => Forcing::Constant(*value),
            ForcingPreset::Sinusoid { amplitude, omega } => Forcing::Sinusoid {
                amplitude: *amplitude,
                omega: *omega,
            },
            ForcingPreset::Samples { values } => {
                if values.len() < 3 {
                    return Err(Error::Config(format!(
                        "{what}: tabulated forcing needs at least 3 samples"
                    )));
                }
                let grid = TimeGrid::new(t_final, values.len() - 1)?;
                Forcing::Tabulated(Signal::new(grid, values.clone())?)
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfilePreset {
    Zero,
    /// `sin(pi x / 2l)`: the first fixed-free eigenmode.
    SineQuarter,
    Linear {
        slope: f64,
    },
    Samples {
        values: Vec<f64>,
    },
}

impl ProfilePreset {
    fn build(&self, l: f64, nx: usize, what: &str) -> Result<Vec<f64>> {
        let x = |i: usize| i as f64 * l / nx as f64;
        Ok(match self {
            ProfilePreset::Zero => vec![0.0; nx + 1],
            ProfilePreset::SineQuarter => (0..=nx)
                .map(|i| (std::f64::consts::PI * x(i) / (2.0 * l)).sin())
                .collect(),
            ProfilePreset::Linear { slope } => (0..=nx).map(|i| slope * x(i)).collect(),
            ProfilePreset::Samples { values } => {
                if values.len() < 3 {
                    return Err(Error::Config(format!(
                        "{what}: tabulated profile needs at least 3 samples"
                    )));
                }
                // linear interpolation from the profile's own uniform grid
                (0..=nx)
                    .map(|i| {
                        let pos = x(i) / l * (values.len() - 1) as f64;
                        let j = (pos.floor() as usize).min(values.len() - 2);
                        let w = pos - j as f64;
                        (1.0 - w) * values[j] + w * values[j + 1]
                    })
                    .collect()
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdofConfig {
    pub m: f64,
    pub c: f64,
    pub k: f64,
    pub u0: f64,
    pub v0: f64,
    pub t_final: f64,
    #[serde(default = "default_forcing")]
    pub forcing: ForcingPreset,
    /// Dirac impulse amplitude; omitted means the natural value `m v0 + c u0`.
    #[serde(default)]
    pub f0: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarConfig {
    pub rho: f64,
    pub e_mod: f64,
    pub gamma: f64,
    pub l: f64,
    pub t_final: f64,
    pub u0: ProfilePreset,
    pub v0: ProfilePreset,
    #[serde(default = "default_forcing")]
    pub u_hat: ForcingPreset,
    #[serde(default = "default_forcing")]
    pub traction: ForcingPreset,
}

fn default_forcing() -> ForcingPreset {
    ForcingPreset::Zero
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Output prefix: artifacts land at `<out>/<label>_report.json` and
    /// `<out>/<label>_data.csv`.
    pub label: String,
    /// Reserved for future stochastic presets; carried into the report.
    #[serde(default)]
    pub seed: u64,
    pub grids: GridList,
    #[serde(default)]
    pub sdof: Option<SdofConfig>,
    #[serde(default)]
    pub bar: Option<BarConfig>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("parse error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.label.is_empty()
            || !self
                .label
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(Error::Config(format!(
                "label must be a nonempty [A-Za-z0-9_-]+ token, got {:?}",
                self.label
            )));
        }
        let needs_spacetime = matches!(
            self.kind,
            ExperimentKind::Bar | ExperimentKind::BarViscoelastic
        );
        match (&self.grids, needs_spacetime) {
            (GridList::Time(list), false) => {
                if list.is_empty() {
                    return Err(Error::Config("grids: list must be nonempty".into()));
                }
                if !list.windows(2).all(|w| w[1] > w[0]) {
                    return Err(Error::Config(
                        "grids: resolutions must be strictly increasing".into(),
                    ));
                }
                if list[0] < 2 {
                    return Err(Error::Config("grids: need at least 2 intervals".into()));
                }
            }
            (GridList::SpaceTime(list), true) => {
                if list.is_empty() {
                    return Err(Error::Config("grids: list must be nonempty".into()));
                }
                let increasing = list.windows(2).all(|w| {
                    w[1].0 >= w[0].0 && w[1].1 >= w[0].1 && w[1].0 * w[1].1 > w[0].0 * w[0].1
                });
                if !increasing {
                    return Err(Error::Config(
                        "grids: (nx, nt) pairs must be strictly increasing in resolution".into(),
                    ));
                }
            }
            (GridList::Time(_), true) => {
                return Err(Error::Config(
                    "grids: this experiment kind needs (nx, nt) pairs".into(),
                ))
            }
            (GridList::SpaceTime(_), false) => {
                return Err(Error::Config(
                    "grids: this experiment kind needs plain interval counts".into(),
                ))
            }
        }
        match self.kind {
            ExperimentKind::Sdof | ExperimentKind::SdofDamped => {
                let sdof = self
                    .sdof
                    .as_ref()
                    .ok_or_else(|| Error::Config("missing [sdof] section".into()))?;
                if self.kind == ExperimentKind::Sdof && sdof.c != 0.0 {
                    return Err(Error::Config(
                        "kind 'sdof' is the conservative case; use 'sdof_damped' for c > 0".into(),
                    ));
                }
                if self.kind == ExperimentKind::SdofDamped && sdof.c <= 0.0 {
                    return Err(Error::Config("kind 'sdof_damped' needs c > 0".into()));
                }
            }
            ExperimentKind::Bar | ExperimentKind::BarViscoelastic => {
                let bar = self
                    .bar
                    .as_ref()
                    .ok_or_else(|| Error::Config("missing [bar] section".into()))?;
                if self.kind == ExperimentKind::Bar && bar.gamma != 0.0 {
                    return Err(Error::Config(
                        "kind 'bar' is the elastic case; use 'bar_viscoelastic' for gamma > 0"
                            .into(),
                    ));
                }
                if self.kind == ExperimentKind::BarViscoelastic && bar.gamma <= 0.0 {
                    return Err(Error::Config(
                        "kind 'bar_viscoelastic' needs gamma > 0".into(),
                    ));
                }
            }
            ExperimentKind::Identities | ExperimentKind::ClassicalContrast => {}
        }
        Ok(())
    }
}

/// One refinement level: a resolution tag, its numeric metrics, and the
/// wall-clock cost. Metrics are a sorted map so emitted artifacts are
/// deterministic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub resolution: String,
    pub resolution_value: f64,
    pub metrics: BTreeMap<String, f64>,
    pub runtime_ms: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub label: String,
    pub seed: u64,
    pub rows: Vec<ExperimentRow>,
    /// Observed convergence orders between consecutive grids, per metric
    /// (empirical log ratios; only metrics positive on every row appear).
    pub orders: BTreeMap<String, Vec<f64>>,
}

impl ExperimentReport {
    pub fn metric_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .rows
            .iter()
            .flat_map(|r| r.metrics.keys().cloned())
            .collect();
        names.sort();
        names.dedup();
        names
    }
}

/// Execute the configured pipeline over every grid in the list, write the
/// JSON report and the CSV plot data under `out_dir`, and return the report.
pub fn run(
    config: &ExperimentConfig,
    out_dir: &Path,
    solver_opts: &SolverOptions,
    threads: usize,
) -> Result<ExperimentReport> {
    config.validate()?;
    let report = run_rows(config, solver_opts, threads.max(1))?;
    std::fs::create_dir_all(out_dir)?;
    let json_path = out_dir.join(format!("{}_report.json", config.label));
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Config(format!("report serialization failed: {e}")))?;
    write_atomically(&json_path, json.as_bytes())?;
    let csv_path = out_dir.join(format!("{}_data.csv", config.label));
    let names = report.metric_names();
    emit_plot_data(&report, &names, &csv_path)?;
    Ok(report)
}

/// Write the report's selected metrics as long-format CSV
/// (`experiment,resolution,metric,value`); an empty selection produces a
/// header-only file.
pub fn emit_plot_data(report: &ExperimentReport, metrics: &[String], path: &Path) -> Result<()> {
    let mut out = String::from("experiment,resolution,metric,value\n");
    for row in &report.rows {
        for name in metrics {
            if let Some(v) = row.metrics.get(name) {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    report.label, row.resolution, name, v
                ));
            }
        }
    }
    write_atomically(path, out.as_bytes())
}

fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = PathBuf::from(path);
    let mut name = tmp
        .file_name()
        .map(|s| s.to_os_string())
        .unwrap_or_default();
    name.push(".tmp");
    tmp.set_file_name(name);
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn run_rows(
    config: &ExperimentConfig,
    solver_opts: &SolverOptions,
    threads: usize,
) -> Result<ExperimentReport> {
    let jobs: Vec<GridJob> = match &config.grids {
        GridList::Time(list) => list.iter().map(|&n| GridJob::Time(n)).collect(),
        GridList::SpaceTime(list) => list
            .iter()
            .map(|&(nx, nt)| GridJob::SpaceTime(nx, nt))
            .collect(),
    };

    let mut results: Vec<Option<Result<ExperimentRow>>> = Vec::new();
    results.resize_with(jobs.len(), || None);
    if threads <= 1 || jobs.len() <= 1 {
        for (slot, job) in results.iter_mut().zip(&jobs) {
            *slot = Some(run_one(config, solver_opts, *job));
        }
    } else {
        std::thread::scope(|scope| {
            let chunk = jobs.len().div_ceil(threads);
            for (jobs_chunk, out_chunk) in jobs.chunks(chunk).zip(results.chunks_mut(chunk)) {
                scope.spawn(move || {
                    for (slot, job) in out_chunk.iter_mut().zip(jobs_chunk) {
                        *slot = Some(run_one(config, solver_opts, *job));
                    }
                });
            }
        });
    }

    let mut rows = Vec::with_capacity(results.len());
    for slot in results {
        rows.push(slot.expect("every job ran")?);
    }
    for row in &rows {
        if let Some((name, value)) = row.metrics.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Config(format!(
                "metric {name} is not finite at {} ({value})",
                row.resolution
            )));
        }
    }
    let orders = convergence_orders(&rows);
    Ok(ExperimentReport {
        kind: config.kind,
        label: config.label.clone(),
        seed: config.seed,
        rows,
        orders,
    })
}

#[derive(Clone, Copy)]
enum GridJob {
    Time(usize),
    SpaceTime(usize, usize),
}

fn run_one(
    config: &ExperimentConfig,
    solver_opts: &SolverOptions,
    job: GridJob,
) -> Result<ExperimentRow> {
    let start = Instant::now();
    let (resolution, resolution_value, metrics) = match (config.kind, job) {
        (ExperimentKind::Identities, GridJob::Time(n)) => {
            (format!("n={n}"), n as f64, identity_metrics(n)?)
        }
        (ExperimentKind::Sdof | ExperimentKind::SdofDamped, GridJob::Time(n)) => {
            let sdof = config.sdof.as_ref().expect("validated");
            (
                format!("n={n}"),
                n as f64,
                sdof_metrics(sdof, n, solver_opts)?,
            )
        }
        (ExperimentKind::Bar | ExperimentKind::BarViscoelastic, GridJob::SpaceTime(nx, nt)) => {
            let bar = config.bar.as_ref().expect("validated");
            (
                format!("nx={nx},nt={nt}"),
                nt as f64,
                bar_metrics(bar, nx, nt, solver_opts)?,
            )
        }
        (ExperimentKind::ClassicalContrast, GridJob::Time(n)) => (
            format!("n={n}"),
            n as f64,
            classical_contrast_metrics(config.sdof.as_ref(), n)?,
        ),
        _ => unreachable!("grid shape validated against kind"),
    };
    Ok(ExperimentRow {
        resolution,
        resolution_value,
        metrics,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

fn convergence_orders(rows: &[ExperimentRow]) -> BTreeMap<String, Vec<f64>> {
    let mut orders = BTreeMap::new();
    if rows.len() < 2 {
        return orders;
    }
    let names: Vec<String> = rows[0].metrics.keys().cloned().collect();
    for name in names {
        // orders only make sense for residual-type metrics that sit above
        // the round-off floor; counts and conditioning are excluded
        if name == "condition_estimate"
            || name == "residual_sup"
            || name.starts_with("classical_")
            || name.starts_with("convolved_")
        {
            continue;
        }
        let values: Option<Vec<f64>> = rows.iter().map(|r| r.metrics.get(&name).copied()).collect();
        let Some(values) = values else { continue };
        if values.iter().any(|&v| v <= 1e-13) {
            continue;
        }
        let mut seq = Vec::with_capacity(rows.len() - 1);
        for i in 0..rows.len() - 1 {
            let ratio = rows[i + 1].resolution_value / rows[i].resolution_value;
            seq.push((values[i] / values[i + 1]).ln() / ratio.ln());
        }
        orders.insert(name, seq);
    }
    orders
}

// ---------------------------------------------------------------------------
// per-kind pipelines
// ---------------------------------------------------------------------------

fn identity_metrics(n: usize) -> Result<BTreeMap<String, f64>> {
    let grid = TimeGrid::new(1.0, n)?;
    let one = sample(|_| 1.0, grid);
    let ramp = sample(|s| s, grid);
    let square = sample(|s| s * s, grid);
    let cos = sample(f64::cos, grid);
    let sin = sample(f64::sin, grid);
    let poly = sample(|s| 0.3 - 1.2 * s + 0.8 * s * s * s, grid);

    let mut m = BTreeMap::new();

    let commutativity = [(&one, &ramp), (&cos, &sin), (&poly, &square)]
        .into_iter()
        .map(|(f, g)| conv_commutativity_residual(f, g).map(f64::abs))
        .try_fold(0.0f64, |acc, r| r.map(|v| acc.max(v)))?;
    m.insert("commutativity".into(), commutativity);

    // bilinearity of the convolution in its first slot
    let combo = Signal::new(
        grid,
        cos.values()
            .iter()
            .zip(poly.values())
            .map(|(a, b)| 1.7 * a - 0.4 * b)
            .collect(),
    )?;
    let lhs = convolve(&combo, &sin)?;
    let r1 = convolve(&cos, &sin)?;
    let r2 = convolve(&poly, &sin)?;
    let mut bilinearity = 0.0f64;
    for k in 0..=n {
        let rhs = 1.7 * r1.trace.value(k) - 0.4 * r2.trace.value(k);
        bilinearity = bilinearity.max((lhs.trace.value(k) - rhs).abs());
    }
    m.insert("bilinearity".into(), bilinearity);

    m.insert("conv_ibp".into(), conv_ibp_residual(&cos, &sin)?);

    // the direct scheme computes the two orderings independently; the
    // binomial-weight pairing would be exactly transposed (residual zero)
    let direct = HalfOperatorScheme::new(HalfSchemeKind::DirectQuadrature, grid);
    m.insert(
        "half_ibp".into(),
        half_ibp_residual(&ramp, &square, &direct)?,
    );

    let scheme = HalfOperatorScheme::new(HalfSchemeKind::GrunwaldLetnikov, grid);
    let mut energy_gap = 0.0f64;
    for u in [&one, &ramp, &square, &cos] {
        let (lhs, rhs) = half_energy_identity(u, &scheme)?;
        energy_gap = energy_gap.max((lhs - rhs).abs());
    }
    m.insert("half_energy_gap".into(), energy_gap);
    Ok(m)
}

fn build_sdof(cfg: &SdofConfig) -> Result<SdofProblem> {
    let forcing = cfg.forcing.build(cfg.t_final, "sdof.forcing")?;
    match cfg.f0 {
        Some(f0) => SdofProblem::new(cfg.m, cfg.c, cfg.k, forcing, cfg.u0, cfg.v0, f0),
        None => SdofProblem::with_natural_impulse(cfg.m, cfg.c, cfg.k, forcing, cfg.u0, cfg.v0),
    }
}

fn sdof_metrics(
    cfg: &SdofConfig,
    n: usize,
    solver_opts: &SolverOptions,
) -> Result<BTreeMap<String, f64>> {
    let p = build_sdof(cfg)?;
    let grid = TimeGrid::new(cfg.t_final, n)?;
    let report = solve_sdof_with(&p, grid, solver_opts)?;
    let oracle = reference_sdof(&p, grid);
    let oracle_error = report.solution.sup_distance(&oracle)?;
    let d = derivative(&report.solution);
    let natural = (p.mass() * d.value(0) + p.damping() * p.u0() - p.f0()).abs();

    let mut m = BTreeMap::new();
    m.insert("residual_sup".into(), report.residual_sup);
    m.insert("oracle_error_sup".into(), oracle_error);
    m.insert("natural_condition_error".into(), natural);
    m.insert("condition_estimate".into(), report.condition_estimate);
    Ok(m)
}

fn build_bar(cfg: &BarConfig, nx: usize, nt: usize) -> Result<BarProblem> {
    let time = TimeGrid::new(cfg.t_final, nt)?;
    let grid = SpaceTimeGrid::new(cfg.l, nx, time)?;
    let u0 = cfg.u0.build(cfg.l, nx, "bar.u0")?;
    let v0 = cfg.v0.build(cfg.l, nx, "bar.v0")?;
    let u_hat = cfg.u_hat.build(cfg.t_final, "bar.u_hat")?.sample(time);
    let traction = cfg
        .traction
        .build(cfg.t_final, "bar.traction")?
        .sample(time);
    BarProblem::with_natural_impulse(
        cfg.rho,
        cfg.e_mod,
        cfg.gamma,
        grid,
        Field::zeros(grid),
        u0,
        v0,
        u_hat,
        traction,
    )
}

fn bar_metrics(
    cfg: &BarConfig,
    nx: usize,
    nt: usize,
    solver_opts: &SolverOptions,
) -> Result<BTreeMap<String, f64>> {
    let p = build_bar(cfg, nx, nt)?;
    let report = solve_bar_with(&p, solver_opts)?;
    let homogeneous = p.u_hat().values().iter().all(|&v| v == 0.0)
        && p.traction().values().iter().all(|&v| v == 0.0);
    let oracle = if p.viscosity() == 0.0 && homogeneous {
        reference_bar_modal(&p)?
    } else {
        reference_bar_timestep(&p)
    };
    let oracle_error = report.solution.sup_distance(&oracle)?;

    let mut m = BTreeMap::new();
    m.insert("residual_sup".into(), report.residual_sup);
    m.insert("oracle_error_sup".into(), oracle_error);
    m.insert(
        "neumann_residual".into(),
        bar_flux_residual(&p, &report.solution),
    );
    m.insert(
        "initial_traction_error".into(),
        bar_contact_impulse_residual(&p, &report.solution),
    );
    m.insert("condition_estimate".into(), report.condition_estimate);
    Ok(m)
}

/// The structural demonstration: without the convolution, the discrete
/// stationarity system of the classical action tests one fewer direction
/// than it has unknowns (variations must vanish at the final time), leaving
/// a rank deficiency of exactly one that only an end-time datum removes.
/// The convolved system is square and full-rank on the same grid.
fn classical_contrast_metrics(
    sdof: Option<&SdofConfig>,
    n: usize,
) -> Result<BTreeMap<String, f64>> {
    let (m_par, c_par, k_par, t_final) = match sdof {
        Some(cfg) => (cfg.m, cfg.c, cfg.k, cfg.t_final),
        None => (1.0, 0.0, 1.0, 1.0),
    };
    if c_par != 0.0 {
        return Err(Error::Config(
            "classical_contrast compares conservative functionals; set c = 0".into(),
        ));
    }
    let grid = TimeGrid::new(t_final, n)?;
    let h = grid.step();
    let dim = n + 1;

    // classical action: (m/2) int u'^2 - (k/2) int u^2
    let kin = forms::space_stiffness_matrix(n, h); // same cell structure in time
    let w = trapezoid_weights(n, h);
    let hcl = |i: usize, j: usize| -> f64 {
        let mut v = m_par * kin[i * dim + j];
        if i == j {
            v -= k_par * w[i];
        }
        v
    };
    // variations pinned at BOTH ends: rows e_1..e_{n-1}; unknowns u_1..u_n
    let mut classical = vec![0.0; (n - 1) * n];
    for r in 0..n - 1 {
        for c in 0..n {
            classical[r * n + c] = hcl(r + 1, c + 1);
        }
    }
    let rank_classical = linalg::rank(&classical, n - 1, n, 1e-10);

    // appending the end-condition row u_n = datum restores full rank
    let mut augmented = classical.clone();
    augmented.extend(std::iter::repeat_n(0.0, n));
    augmented[(n - 1) * n + (n - 1)] = 1.0;
    let rank_augmented = linalg::rank(&augmented, n, n, 1e-10);

    // the convolved system over the same unknowns is square: variations
    // e_1..e_n (final node free)
    let kin_conv = forms::kinetic_matrix(n, h);
    let conv_w = forms::conv_weight_matrix(n, h);
    let mut convolved = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            convolved[r * n + c] =
                m_par * kin_conv[(r + 1) * dim + c + 1] + k_par * conv_w[(r + 1) * dim + c + 1];
        }
    }
    let rank_convolved = linalg::rank(&convolved, n, n, 1e-10);

    let mut m = BTreeMap::new();
    m.insert("classical_unknowns".into(), n as f64);
    m.insert("classical_rank".into(), rank_classical as f64);
    m.insert("classical_deficiency".into(), (n - rank_classical) as f64);
    m.insert(
        "classical_rank_with_end_datum".into(),
        rank_augmented as f64,
    );
    m.insert("convolved_size".into(), n as f64);
    m.insert("convolved_rank".into(), rank_convolved as f64);
    Ok(m)
}
