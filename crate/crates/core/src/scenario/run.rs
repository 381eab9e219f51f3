//! Scenario execution.

use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{InitialState, PotentialConfig, ScenarioConfig, ScenarioKind};
use super::output::{num, write_bundle, Manifest, ResultBundle, Table};
use crate::bohm::{crossing_violations, integrate_ensemble, sample_initial_positions, Timeline, Trajectory, CROSSING_TOLERANCE};
use crate::euclid::{euclidean_kernel, euclidean_kernel_with, feynman_kac_evolve, KernelMethod};
use crate::evolution::{build_hamiltonian, evolve, harmonic_potential, propagate_exact, unitary_step, Hamiltonian};
use crate::measures::{hadamard_step, measure_vs_born_report_with_cap, VariantStatus};
use crate::pathsum::{path_sum_evolve_with_cap, short_time_kernel, time_sliced_propagate};
use crate::state::{born_distribution, gaussian_amplitude, ks_statistic, normalize, GridSpec, PhysicsParams, Space, WaveFunction};
use crate::{Error, Result};

/// A numerical failure together with whatever was produced before it.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub partial: Box<ResultBundle>,
    pub error: Error,
}

#[derive(Debug)]
pub enum ExecuteError {
    /// The scenario failed; the manifest on disk is flagged incomplete.
    Numerical { error: Error, manifest: Box<Manifest> },
    Io(std::io::Error),
}

impl std::fmt::Display for ExecuteError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExecuteError::Numerical { error, .. } => write!(f, "numerical failure: {error}"),
            ExecuteError::Io(e) => write!(f, "i/o failure: {e}"),
        }
    }
}

impl std::error::Error for ExecuteError {}

/// Runs a validated configuration.
pub fn run_scenario(cfg: &ScenarioConfig) -> std::result::Result<ResultBundle, RunFailure> {
    let mut bundle = ResultBundle::new(cfg);
    let outcome = match cfg.scenario {
        ScenarioKind::FreePacket => free_packet(cfg, &mut bundle),
        ScenarioKind::Harmonic => harmonic(cfg, &mut bundle),
        ScenarioKind::TwoSlitAnalog => two_slit(cfg, &mut bundle),
        ScenarioKind::PathsumCheck => pathsum_check(cfg, &mut bundle),
        ScenarioKind::MeasuresReport => measures_report(cfg, &mut bundle),
        ScenarioKind::EuclidGround => euclid_ground(cfg, &mut bundle),
    };
    match outcome {
        Ok(()) => Ok(bundle),
        Err(error) => Err(RunFailure { partial: Box::new(bundle), error }),
    }
}

/// Runs the scenario and writes its bundle into `dir`.
pub fn execute(cfg: &ScenarioConfig, dir: &Path) -> std::result::Result<Manifest, ExecuteError> {
    let start = Instant::now();
    let run = run_scenario(cfg);
    let elapsed = start.elapsed().as_secs_f64();
    match run {
        Ok(bundle) => write_bundle(&bundle, cfg, dir, elapsed, None).map(|(m, _)| m).map_err(ExecuteError::Io),
        Err(RunFailure { partial, error }) => {
            let (manifest, _) = write_bundle(&partial, cfg, dir, elapsed, Some(error.to_string())).map_err(ExecuteError::Io)?;
            Err(ExecuteError::Numerical { error, manifest: Box::new(manifest) })
        }
    }
}

fn missing(section: &str) -> Error {
    Error::InvalidParams(format!("configuration has no [{section}] section"))
}

struct Setup {
    grid: GridSpec,
    params: PhysicsParams,
    potential: Vec<f64>,
    h: Hamiltonian,
    psi0: WaveFunction,
}

fn setup(cfg: &ScenarioConfig) -> Result<Setup> {
    let grid = cfg.grid.ok_or_else(|| missing("grid"))?.spec()?;
    let params = cfg.physics.params()?;
    let potential = match cfg.potential.unwrap_or(PotentialConfig::Free) {
        PotentialConfig::Free => vec![0.0; grid.n_points()],
        PotentialConfig::Harmonic { omega, center } => harmonic_potential(&grid, params.mass(), omega, center),
    };
    let h = build_hamiltonian(grid, &potential, params)?;
    let psi0 = initial_state(grid, params, &cfg.initial_state.ok_or_else(|| missing("initial_state"))?)?;
    Ok(Setup { grid, params, potential, h, psi0 })
}

fn initial_state(grid: GridSpec, params: PhysicsParams, init: &InitialState) -> Result<WaveFunction> {
    let hbar = params.hbar();
    match *init {
        InitialState::Gaussian { center, width, momentum } => WaveFunction::gaussian(grid, center, width, momentum / hbar),
        InitialState::TwoGaussians { centers, widths, momenta, relative_phase } => {
            for w in widths {
                if !(w.is_finite() && w > 0.0) {
                    return Err(Error::InvalidArgument(format!("gaussian width must be positive, got {w}")));
                }
            }
            let phase = Complex64::from_polar(1.0, relative_phase);
            let psi = WaveFunction::from_grid_fn(grid, |x| {
                gaussian_amplitude(x, centers[0], widths[0], momenta[0] / hbar)
                    + phase * gaussian_amplitude(x, centers[1], widths[1], momenta[1] / hbar)
            })?;
            normalize(&psi)
        }
    }
}

struct Ensemble {
    timeline: Timeline,
    stride: usize,
    frames: usize,
    trajectories: Vec<Trajectory>,
    failures: usize,
}

fn run_ensemble(cfg: &ScenarioConfig, s: &Setup, bundle: &mut ResultBundle) -> Result<Ensemble> {
    let evo = cfg.evolution.as_ref().ok_or_else(|| missing("evolution"))?;
    let bohm = cfg.bohm.ok_or_else(|| missing("bohm"))?;
    let stride = (evo.dt / bohm.ode_dt).round() as usize;
    let timeline = Timeline::new(&s.h, &s.psi0, evo.t_span(), bohm.ode_dt)?;
    let frames = evo.steps;
    let initial = sample_initial_positions(&s.psi0, bohm.count, bohm.seed)?;
    let mut trajectories = Vec::with_capacity(initial.len());
    let mut failures = 0;
    for r in integrate_ensemble(&timeline, &initial) {
        match r {
            Ok(t) => trajectories.push(t),
            Err(e) => {
                failures += 1;
                if failures <= 5 {
                    bundle.notes.push(format!("trajectory failed: {e}"));
                }
            }
        }
    }
    Ok(Ensemble { timeline, stride, frames, trajectories, failures })
}

fn density_table(e: &Ensemble, grid: &GridSpec) -> Result<Table> {
    let mut t = Table::new("density", &["step", "time", "index", "x", "probability"]);
    let xs = grid.points();
    for f in 0..=e.frames {
        let k = f * e.stride;
        let born = born_distribution(&e.timeline.state(k))?;
        let time = num(e.timeline.time(k));
        for (j, p) in born.weights().iter().enumerate() {
            t.push(vec![f.to_string(), time.clone(), j.to_string(), num(xs[j]), num(*p)]);
        }
    }
    Ok(t)
}

/// Evenly spread subset of trajectories, ordered by initial position.
fn recorded(e: &Ensemble, count: usize) -> Vec<&Trajectory> {
    let mut order: Vec<&Trajectory> = e.trajectories.iter().collect();
    order.sort_by(|a, b| a.initial().total_cmp(&b.initial()));
    let n = order.len();
    if count >= n || n == 0 {
        return order;
    }
    if count == 1 {
        return vec![order[n / 2]];
    }
    (0..count).map(|i| order[i * (n - 1) / (count - 1)]).collect()
}

fn trajectory_tables(e: &Ensemble, record: usize, packet: Option<f64>) -> (Table, Table) {
    let mut paths = Table::new("trajectories", &["trajectory", "step", "time", "position", "unwrapped"]);
    let mut header = vec!["trajectory", "initial", "final", "mask_hits", "evaluations", "node_trap"];
    if packet.is_some() {
        header.push("packet");
    }
    let mut summary = Table::new("trajectory_summary", &header);
    for tr in recorded(e, record) {
        let id = tr.initial_seed_index().to_string();
        for f in 0..=e.frames {
            let k = f * e.stride;
            paths.push(vec![id.clone(), f.to_string(), num(tr.times()[k]), num(tr.positions()[k]), num(tr.unwrapped()[k])]);
        }
        let mut row = vec![
            id,
            num(tr.initial()),
            num(tr.final_position()),
            tr.mask_hits().to_string(),
            tr.evaluations().to_string(),
            tr.node_trap().to_string(),
        ];
        if let Some(axis) = packet {
            row.push(if tr.initial() < axis { "lower" } else { "upper" }.to_string());
        }
        summary.push(row);
    }
    (paths, summary)
}

fn equivariance_table(e: &Ensemble, bundle: &mut ResultBundle) -> Result<Table> {
    let mut t = Table::new("equivariance", &["step", "time", "ks", "samples"]);
    let mut max_ks = 0.0_f64;
    let mut final_ks = 0.0;
    for f in 0..=e.frames {
        let k = f * e.stride;
        let xs: Vec<f64> = e.trajectories.iter().map(|tr| tr.positions()[k]).collect();
        let ks = if xs.is_empty() { 1.0 } else { ks_statistic(&xs, &born_distribution(&e.timeline.state(k))?)? };
        max_ks = max_ks.max(ks);
        final_ks = ks;
        t.push(vec![f.to_string(), num(e.timeline.time(k)), num(ks), xs.len().to_string()]);
    }
    bundle.set("max_ks", max_ks);
    bundle.set("final_ks", final_ks);
    Ok(t)
}

fn ensemble_metrics(e: &Ensemble, bundle: &mut ResultBundle) {
    bundle.set("trajectories", e.trajectories.len() as f64);
    bundle.set("trajectory_failures", e.failures as f64);
    bundle.set("crossing_violations", crossing_violations(&e.trajectories, CROSSING_TOLERANCE) as f64);
    bundle.set("mask_hits", e.trajectories.iter().map(|t| t.mask_hits()).sum::<usize>() as f64);
    bundle.set("node_trapped", e.trajectories.iter().filter(|t| t.node_trap()).count() as f64);
}

fn bohm_outputs(cfg: &ScenarioConfig, s: &Setup, bundle: &mut ResultBundle, packet: Option<f64>) -> Result<Ensemble> {
    let e = run_ensemble(cfg, s, bundle)?;
    bundle.tables.push(density_table(&e, &s.grid)?);
    let record = cfg.bohm.map_or(0, |b| b.record_trajectories);
    let (paths, summary) = trajectory_tables(&e, record, packet);
    bundle.tables.push(paths);
    bundle.tables.push(summary);
    let eq = equivariance_table(&e, bundle)?;
    bundle.tables.push(eq);
    ensemble_metrics(&e, bundle);
    Ok(e)
}

fn l2_distance(a: &WaveFunction, b: &WaveFunction) -> f64 {
    let dx = a.space().cell_measure();
    (a.amplitudes().iter().zip(b.amplitudes().iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>() * dx).sqrt()
}

fn position_moments(psi: &WaveFunction, grid: &GridSpec) -> Result<(f64, f64)> {
    let born = born_distribution(psi)?;
    let xs = grid.points();
    let mean: f64 = born.weights().iter().zip(&xs).map(|(p, x)| p * x).sum();
    let var: f64 = born.weights().iter().zip(&xs).map(|(p, x)| p * (x - mean).powi(2)).sum();
    Ok((mean, var.sqrt()))
}

fn free_packet(cfg: &ScenarioConfig, bundle: &mut ResultBundle) -> Result<()> {
    let s = setup(cfg)?;
    let e = bohm_outputs(cfg, &s, bundle, None)?;
    let last = e.timeline.state(e.timeline.steps());
    let (_, w0) = position_moments(&s.psi0, &s.grid)?;
    let (_, w1) = position_moments(&last, &s.grid)?;
    bundle.set("width_ratio", w1 / w0);

    let evo = cfg.evolution.as_ref().ok_or_else(|| missing("evolution"))?;
    let t_span = evo.t_span();
    let reference = propagate_exact(&s.h, &s.psi0, t_span)?;
    let mut slicing = Table::new("slicing", &["slices", "dt", "status", "l2_error", "raw_norm"]);
    for &n in &evo.slices {
        let dt = t_span / n as f64;
        let k = short_time_kernel(s.grid, &s.potential, s.params, dt)?;
        match time_sliced_propagate(&k, &s.psi0, n) {
            Ok(out) => slicing.push(vec![
                n.to_string(),
                num(dt),
                "ok".into(),
                num(l2_distance(&out.psi, &reference)),
                num(out.raw_norm),
            ]),
            Err(Error::NormCollapse { norm }) => slicing.push(vec![n.to_string(), num(dt), "norm_collapse".into(), String::new(), num(norm)]),
            Err(Error::NormBlowup { norm }) => slicing.push(vec![n.to_string(), num(dt), "norm_blowup".into(), String::new(), num(norm)]),
            Err(err) => return Err(err),
        }
    }
    bundle.tables.push(slicing);
    Ok(())
}

fn harmonic(cfg: &ScenarioConfig, bundle: &mut ResultBundle) -> Result<()> {
    let s = setup(cfg)?;
    let e = bohm_outputs(cfg, &s, bundle, None)?;
    let (omega, center) = match cfg.potential {
        Some(PotentialConfig::Harmonic { omega, center }) => (omega, center),
        _ => return Err(Error::InvalidParams("harmonic scenario needs a harmonic potential".into())),
    };
    let (x0, _) = position_moments(&s.psi0, &s.grid)?;
    let p0 = match cfg.initial_state {
        Some(InitialState::Gaussian { momentum, .. }) => momentum,
        _ => 0.0,
    };
    let mut t = Table::new("observables", &["step", "time", "mean_x", "classical_x", "energy", "norm"]);
    let mut worst = 0.0_f64;
    for f in 0..=e.frames {
        let k = f * e.stride;
        let psi = e.timeline.state(k);
        let time = e.timeline.time(k);
        let (mean, _) = position_moments(&psi, &s.grid)?;
        let classical = center + (x0 - center) * (omega * time).cos() + p0 / (s.params.mass() * omega) * (omega * time).sin();
        worst = worst.max((mean - classical).abs());
        t.push(vec![f.to_string(), num(time), num(mean), num(classical), num(s.h.expectation(&psi)?), num(psi.norm())]);
    }
    bundle.tables.push(t);
    bundle.set("max_center_deviation", worst);
    Ok(())
}

/// Interior local maxima above `threshold` times the peak.
pub fn count_local_maxima(p: &[f64], threshold: f64) -> usize {
    let peak = p.iter().fold(0.0_f64, |m, &x| m.max(x));
    (1..p.len().saturating_sub(1)).filter(|&j| p[j] > threshold * peak && p[j] > p[j - 1] && p[j] >= p[j + 1]).count()
}

/// Relative height a maximum needs before it counts as a fringe.
pub const FRINGE_THRESHOLD: f64 = 0.01;

fn two_slit(cfg: &ScenarioConfig, bundle: &mut ResultBundle) -> Result<()> {
    let s = setup(cfg)?;
    let axis = 0.5 * (s.grid.x_min() + s.grid.x_max());
    let e = bohm_outputs(cfg, &s, bundle, Some(axis))?;
    let last = e.timeline.state(e.timeline.steps());
    let born = born_distribution(&last)?;
    let p = born.weights();
    let mut t = Table::new("final_distribution", &["index", "x", "probability"]);
    for (j, (&w, x)) in p.iter().zip(s.grid.points()).enumerate() {
        t.push(vec![j.to_string(), num(x), num(w)]);
    }
    bundle.tables.push(t);
    let symmetry = (0..p.len()).fold(0.0_f64, |m, j| m.max((p[j] - p[s.grid.mirror_index(j)]).abs()));
    let crossings = e
        .trajectories
        .iter()
        .filter(|tr| {
            let side = tr.initial() < axis;
            tr.positions().iter().any(|&x| (x < axis) != side)
        })
        .count();
    let lower = e.trajectories.iter().filter(|tr| tr.initial() < axis).count();
    bundle.set("interference_maxima", count_local_maxima(p, FRINGE_THRESHOLD) as f64);
    bundle.set("symmetry_defect", symmetry);
    bundle.set("axis_crossings", crossings as f64);
    bundle.set("lower_packet", lower as f64);
    bundle.set("upper_packet", (e.trajectories.len() - lower) as f64);
    Ok(())
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    (&a + a.adjoint()).map(|z| z * 0.5)
}

fn pathsum_check(cfg: &ScenarioConfig, bundle: &mut ResultBundle) -> Result<()> {
    let p = cfg.pathsum.ok_or_else(|| missing("pathsum"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let space = Space::finite(p.space_size)?;
    let h = Hamiltonian::from_matrix(space.clone(), random_hermitian(&mut rng, p.space_size), cfg.physics.params()?)?;
    let u = unitary_step(&h, 1.0)?;
    let amps: Vec<Complex64> = (0..p.space_size).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let psi = normalize(&WaveFunction::from_vec(space, amps)?)?;
    let by_paths = path_sum_evolve_with_cap(&u, &psi, p.s, p.cap)?;
    let by_matrix = evolve(&u, &psi, p.s)?;
    let mut t = Table::new("pathsum", &["index", "path_sum_re", "path_sum_im", "matrix_re", "matrix_im", "abs_deviation"]);
    let mut worst = 0.0_f64;
    for (r, (a, b)) in by_paths.amplitudes().iter().zip(by_matrix.amplitudes().iter()).enumerate() {
        let d = (a - b).norm();
        worst = worst.max(d);
        t.push(vec![r.to_string(), num(a.re), num(a.im), num(b.re), num(b.im), num(d)]);
    }
    bundle.tables.push(t);
    bundle.set("max_deviation", worst);
    bundle.set("space_size", p.space_size as f64);
    bundle.set("steps", p.s as f64);
    bundle.set("paths", (p.space_size as f64).powi(p.s as i32 + 1));
    Ok(())
}

fn measures_report(cfg: &ScenarioConfig, bundle: &mut ResultBundle) -> Result<()> {
    let m = cfg.measures.ok_or_else(|| missing("measures"))?;
    let u = hadamard_step();
    let psi = WaveFunction::from_vec(u.space().clone(), vec![Complex64::from_polar(1.0, m.phase), Complex64::new(0.0, 0.0)])?;
    let report = measure_vs_born_report_with_cap(&u, &psi, m.s, m.cap)?;
    let mut t = Table::new("measures", &["variant", "status", "normalization", "tv_distance", "steps", "space_size"]);
    let mut marginals = Table::new("marginals", &["distribution", "index", "probability"]);
    for (j, w) in report.born.weights().iter().enumerate() {
        marginals.push(vec!["born".into(), j.to_string(), num(*w)]);
    }
    for (rec, marginal) in report.records.iter().zip(&report.marginals) {
        let status = match rec.status {
            VariantStatus::Ok => "ok",
            VariantStatus::Degenerate => "degenerate",
        };
        t.push(vec![
            rec.variant.name().into(),
            status.into(),
            num(rec.normalization),
            rec.tv_distance.map(num).unwrap_or_default(),
            rec.steps.to_string(),
            rec.space_size.to_string(),
        ]);
        if let Some(d) = marginal {
            for (j, w) in d.weights().iter().enumerate() {
                marginals.push(vec![rec.variant.name().into(), j.to_string(), num(*w)]);
            }
        }
        bundle.set(&format!("tv_{}", rec.variant.name()), rec.tv_distance.unwrap_or(f64::NAN));
        bundle.set(&format!("z_{}", rec.variant.name()), rec.normalization);
    }
    bundle.tables.push(t);
    bundle.tables.push(marginals);
    Ok(())
}

fn euclid_ground(cfg: &ScenarioConfig, bundle: &mut ResultBundle) -> Result<()> {
    let s = setup(cfg)?;
    let ec = cfg.euclid.ok_or_else(|| missing("euclid"))?;
    let kernel = euclidean_kernel_with(&s.h, ec.dtau, ec.method)?;
    bundle.set("kernel_min_entry", kernel.min_entry());
    bundle.set("kernel_asymmetry", kernel.asymmetry());
    if ec.trotter_check {
        let other = match ec.method {
            KernelMethod::Eigen => euclidean_kernel_with(&s.h, ec.dtau, KernelMethod::Trotter)?,
            KernelMethod::Trotter => euclidean_kernel(&s.h, ec.dtau)?,
        };
        bundle.set("trotter_max_difference", (kernel.matrix() - other.matrix()).amax());
    }
    let rho0: Vec<f64> = born_distribution(&s.psi0)?.weights().to_vec();
    let run = feynman_kac_evolve(&kernel, &rho0, ec.steps)?;
    let estimates: Vec<f64> = run.ratios.iter().map(|r| -r.ln() / ec.dtau).collect();
    let mut t = Table::new("energies", &["step", "tau", "ratio", "estimate"]);
    for (j, (r, e)) in run.ratios.iter().zip(&estimates).enumerate() {
        t.push(vec![(j + 1).to_string(), num((j + 1) as f64 * ec.dtau), num(*r), num(*e)]);
    }
    bundle.tables.push(t);

    let eig = s.h.eigen()?;
    let e0 = eig.values()[0];
    let ground: Vec<f64> = eig.vectors().column(0).iter().map(|z| z.re).collect();
    let sign = if ground.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let mass: f64 = ground.iter().map(|g| (sign * g).abs()).sum();
    let rho_mass: f64 = run.rho.iter().map(|x| x.abs()).sum();
    let mut g = Table::new("ground_state", &["index", "x", "rho", "dense_ground"]);
    for (j, x) in s.grid.points().into_iter().enumerate() {
        g.push(vec![j.to_string(), num(x), num(run.rho[j] / rho_mass), num(sign * ground[j] / mass)]);
    }
    bundle.tables.push(g);

    let last = estimates[ec.steps - 1];
    bundle.set("energy_estimate", last);
    bundle.set("dense_min_eigenvalue", e0);
    bundle.set("relative_error", (last - e0).abs() / e0.abs().max(f64::MIN_POSITIVE));
    bundle.set("hbar", 1.0);
    let delta = (last - estimates[ec.steps - 2]).abs();
    if !(delta <= ec.tol) {
        return Err(Error::NotConverged { delta });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::config::{BohmConfig, EvolutionConfig, GridConfig};
    use crate::state::Boundary;

    fn small_packet() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::defaults(ScenarioKind::FreePacket);
        cfg.grid = Some(GridConfig { x_min: -12.0, x_max: 12.0, n_points: 128, boundary: Boundary::Periodic });
        cfg.evolution = Some(EvolutionConfig { dt: 0.1, steps: 4, slices: vec![2, 64] });
        cfg.bohm = Some(BohmConfig { count: 300, ode_dt: 0.05, seed: 4, record_trajectories: 7 });
        cfg
    }

    #[test]
    fn local_maxima() {
        assert_eq!(count_local_maxima(&[0.0, 1.0, 0.0, 2.0, 0.0], 0.0), 2);
        assert_eq!(count_local_maxima(&[0.0, 0.001, 0.0, 2.0, 0.0], FRINGE_THRESHOLD), 1);
        // plateaus count once, edges never
        assert_eq!(count_local_maxima(&[3.0, 1.0, 2.0, 2.0, 1.0, 5.0], 0.0), 1);
        assert_eq!(count_local_maxima(&[1.0, 2.0], 0.0), 0);
    }

    #[test]
    fn free_packet_tables_and_metrics() {
        let b = run_scenario(&small_packet()).unwrap();
        for name in ["density", "trajectories", "trajectory_summary", "equivariance", "slicing"] {
            assert!(b.table(name).is_some(), "{name}");
        }
        assert_eq!(b.table("trajectory_summary").unwrap().rows.len(), 7);
        assert_eq!(b.table("trajectories").unwrap().rows.len(), 7 * 5);
        assert_eq!(b.table("density").unwrap().rows.len(), 128 * 5);
        assert_eq!(b.metric("trajectories"), Some(300.0));
        assert_eq!(b.metric("crossing_violations"), Some(0.0));
        assert!(b.metric("width_ratio").unwrap() > 1.0);
        let slicing = b.table("slicing").unwrap();
        let status = slicing.column("status").unwrap();
        // 0.2 is above the matched step of this grid, 0.00625 far below it
        assert_eq!(slicing.rows[0][status], "ok");
        assert_eq!(slicing.rows[1][status], "norm_blowup");
        let seeds: Vec<&str> = b.table("trajectory_summary").unwrap().rows.iter().map(|r| r[0].as_str()).collect();
        assert!(seeds.windows(2).all(|w| w[0] != w[1]));
    }

    #[test]
    fn seed_changes_trajectories_only() {
        let a = run_scenario(&small_packet()).unwrap();
        let mut cfg = small_packet();
        cfg.set_seed(99);
        let b = run_scenario(&cfg).unwrap();
        assert_eq!(a.table("density"), b.table("density"));
        assert_ne!(a.table("trajectories"), b.table("trajectories"));
        assert_eq!(b.seed, Some(99));
    }

    #[test]
    fn pathsum_and_measures_defaults() {
        let p = run_scenario(&ScenarioConfig::defaults(ScenarioKind::PathsumCheck)).unwrap();
        assert!(p.metric("max_deviation").unwrap() < 1e-12);
        assert_eq!(p.metric("paths"), Some(243.0));
        let m = run_scenario(&ScenarioConfig::defaults(ScenarioKind::MeasuresReport)).unwrap();
        assert!((m.metric("tv_positive_real").unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(m.metric("tv_positive_imag").unwrap().is_nan());
        assert!((m.metric("z_modulus").unwrap() - 2.0).abs() < 1e-12);
        let t = m.table("measures").unwrap();
        assert_eq!(t.rows[1][t.column("status").unwrap()], "degenerate");
        assert_eq!(t.rows[1][t.column("tv_distance").unwrap()], "");
    }

    #[test]
    fn pathsum_cap_is_a_numerical_failure() {
        let mut cfg = ScenarioConfig::defaults(ScenarioKind::PathsumCheck);
        if let Some(p) = cfg.pathsum.as_mut() {
            p.cap = 10;
        }
        let err = run_scenario(&cfg).unwrap_err();
        assert!(matches!(err.error, Error::EnumerationCapExceeded { .. }));
    }

    #[test]
    fn unconverged_ground_state_keeps_partial_tables() {
        let mut cfg = ScenarioConfig::defaults(ScenarioKind::EuclidGround);
        if let Some(e) = cfg.euclid.as_mut() {
            e.steps = 4;
            e.tol = 1e-15;
        }
        let failure = run_scenario(&cfg).unwrap_err();
        assert!(matches!(failure.error, Error::NotConverged { .. }));
        assert_eq!(failure.partial.table("energies").unwrap().rows.len(), 4);
        assert!(failure.partial.metric("kernel_min_entry").unwrap() >= -1e-12);
    }

    #[test]
    fn execute_flags_incomplete_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ScenarioConfig::defaults(ScenarioKind::PathsumCheck);
        if let Some(p) = cfg.pathsum.as_mut() {
            p.cap = 10;
        }
        match execute(&cfg, dir.path()) {
            Err(ExecuteError::Numerical { manifest, .. }) => {
                assert!(!manifest.complete);
                assert!(manifest.error.as_deref().unwrap().contains("cap"));
            }
            other => panic!("{other:?}"),
        }
        assert!(dir.path().join(crate::scenario::MANIFEST_NAME).exists());
    }
}
