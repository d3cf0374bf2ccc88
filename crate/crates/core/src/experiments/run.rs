use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::artifacts::{relative_energy_csv, trajectory_csv, write_json, write_text};
use super::config::{ExperimentConfig, Model, PoolingChoice};
use super::initial::{initial_data, InitialData};
use crate::brenner::{self, run_brenner, BrennerParams, DissipationMagnitudes};
use crate::discretization::{build_grid, test_function_basis, FieldTrajectory, Grid};
use crate::error::{Error, Result};
use crate::euler::{run_euler, RunSettings};
use crate::ns_entropy::{self, run_ns_entropy, NsEntropyParams, NsField};
use crate::relative_energy::{weak_strong_monitor, WeakStrongStudy};
use crate::thermo::{ChiBattery, GasParams};
use crate::verifier::{dissipation_scaling_report, verify_rdmv, ScalingReport, VerificationReport};
use crate::young_measure::{build_empirical_measure, energy_defect, Pooling};

/// `Single` runs the first sweep value only.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Single,
    Sweep,
}

/// Grid, gas and sampled initial data of a configuration.
pub struct Setup {
    pub grid: Grid,
    pub gas: GasParams,
    pub data: InitialData,
}

fn ns_params(config: &ExperimentConfig, field: &NsField, gas: &GasParams, epsilon: f64) -> NsEntropyParams {
    let (lo, hi) = field.ratio_range();
    NsEntropyParams {
        epsilon,
        beta: config.ns.beta.unwrap_or_else(|| NsEntropyParams::beta_floor(gas)),
        mu: config.ns.mu,
        eta: config.ns.eta,
        c_star: config.ns.c_star.unwrap_or(lo),
        c_upper: config.ns.c_upper.unwrap_or(hi),
    }
}

fn brenner_params(config: &ExperimentConfig, data: &InitialData, gas: &GasParams, epsilon: f64) -> BrennerParams {
    let b = &config.brenner;
    BrennerParams {
        epsilon,
        kappa_coeff: b.kappa_coeff,
        mu_coeff: b.mu_coeff,
        eta: b.eta,
        s0: b.s0.unwrap_or_else(|| data.min_entropy(gas)),
        mu_model: b.mu_model,
        smoothness_bound: b.smoothness_bound,
    }
}

fn ns_field(data: &InitialData, gas: &GasParams) -> NsField {
    NsField::from_primitive(&data.rho, &data.u, &data.theta, gas)
}

fn as_ic_error(e: Error) -> Error {
    match e {
        Error::Domain(m) | Error::InvariantViolation(m) => Error::config("ic", m),
        other => other,
    }
}

/// Builds the grid and initial data and checks them against the model's requirements.
pub fn prepare(config: &ExperimentConfig) -> Result<Setup> {
    let gas = config.gas.build()?;
    let g = &config.grid;
    let grid = build_grid(g.dim, g.n, g.length, g.bc).map_err(|e| Error::config("grid", e.to_string()))?;
    let data = initial_data(&config.ic, &grid, &gas, config.seed)?;
    let eps = config.member_epsilons()[0];
    match config.model {
        Model::Euler => {}
        Model::NsEntropy => {
            let field = ns_field(&data, &gas);
            if let Some(i) = (0..field.len()).find(|&i| !(field.rho[i] > 0.0 && field.z[i] > 0.0)) {
                return Err(Error::config("ic", format!("rho and Z must be positive, cell {i} has rho = {}, Z = {}", field.rho[i], field.z[i])));
            }
            let params = ns_params(config, &field, &gas, eps);
            params.validate(&gas).map_err(|e| Error::config("ns", e.to_string()))?;
            ns_entropy::check_initial_data(&field, &params).map_err(as_ic_error)?;
        }
        Model::Brenner => {
            let params = brenner_params(config, &data, &gas, eps);
            params.validate().map_err(|e| Error::config("brenner", e.to_string()))?;
            brenner::check_initial_data(&data.conservative(&gas)?, &params, &gas, grid.bc()).map_err(as_ic_error)?;
        }
    }
    Ok(Setup { grid, gas, data })
}

struct Member {
    trajectory: FieldTrajectory,
    summary: MemberSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberSummary {
    pub epsilon: f64,
    pub trajectory_file: String,
    pub samples: usize,
    /// Largest per-step increase of the NS energy ledger.
    pub ns_ledger_max_increase: Option<f64>,
    /// NS `(min, max)` of `Z / rho` over the samples.
    pub ns_ratio_range: Option<(f64, f64)>,
    /// Largest `|integral E(t) - integral E(0)|` of a Brenner run.
    pub brenner_energy_drift: Option<f64>,
    /// Smallest per-step increment of `integral rho chi(s)` over the battery.
    pub brenner_min_entropy_increment: Option<f64>,
    pub brenner_magnitudes: Option<DissipationMagnitudes>,
    pub brenner_production_budget: Option<f64>,
}

fn run_member(config: &ExperimentConfig, setup: &Setup, battery: &ChiBattery, index: usize, epsilon: f64) -> Result<Member> {
    let settings = RunSettings { t_end: config.t_end, cfl: config.cfl, sample_dt: config.sample_dt() };
    let (grid, gas, data) = (&setup.grid, &setup.gas, &setup.data);
    let mut summary = MemberSummary {
        epsilon,
        trajectory_file: format!("trajectory_{index:02}.csv"),
        samples: 0,
        ns_ledger_max_increase: None,
        ns_ratio_range: None,
        brenner_energy_drift: None,
        brenner_min_entropy_increment: None,
        brenner_magnitudes: None,
        brenner_production_budget: None,
    };
    let trajectory = match config.model {
        Model::Euler => run_euler(grid, data.conservative(gas)?, gas, &settings)?,
        Model::NsEntropy => {
            let field = ns_field(data, gas);
            let params = ns_params(config, &field, gas, epsilon);
            let run = run_ns_entropy(grid, field, &params, gas, &settings)?;
            summary.ns_ledger_max_increase =
                Some(run.step_balance.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max));
            if let Some(aux) = &run.trajectory.aux {
                let mut range = (f64::INFINITY, f64::NEG_INFINITY);
                for (z, states) in aux.iter().zip(&run.trajectory.states) {
                    for (zi, s) in z.iter().zip(states) {
                        let q = zi / s.rho;
                        range = (range.0.min(q), range.1.max(q));
                    }
                }
                summary.ns_ratio_range = Some(range);
            }
            run.trajectory
        }
        Model::Brenner => {
            let params = brenner_params(config, data, gas, epsilon);
            let monitor: Vec<_> = battery.monotone().cloned().collect();
            let run = run_brenner(grid, data.conservative(gas)?, &params, gas, &settings, &monitor)?;
            let l = &run.ledger;
            let e0 = l.step_energy[0];
            summary.brenner_energy_drift = Some(l.step_energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max));
            summary.brenner_min_entropy_increment = Some(
                l.step_entropy.iter().flat_map(|s| s.windows(2).map(|w| w[1] - w[0])).fold(f64::INFINITY, f64::min),
            );
            summary.brenner_magnitudes = Some(l.magnitudes);
            summary.brenner_production_budget = Some(l.production_budget);
            run.trajectory
        }
    };
    summary.samples = trajectory.len();
    Ok(Member { trajectory, summary })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectSummary {
    pub member: usize,
    pub min_energy_defect: f64,
    pub max_energy_defect: f64,
    pub max_concentration: f64,
}

/// Contents of `report.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub model: Model,
    pub epsilons: Vec<f64>,
    pub members: Vec<MemberSummary>,
    pub verification: VerificationReport,
    pub defects: DefectSummary,
    pub dissipation_scaling: Option<ScalingReport>,
    /// Why no scaling fit was made, when it was not.
    pub dissipation_scaling_note: Option<String>,
    pub weak_strong: Option<WeakStrongStudy>,
    pub pass: bool,
}

/// Contents of `manifest.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub status: String,
    pub error: Option<String>,
    pub config: ExperimentConfig,
    pub artifacts: Vec<String>,
    pub wall_seconds: BTreeMap<String, f64>,
}

pub const REPORT_FILE: &str = "report.json";
pub const MEASURE_FILE: &str = "measure.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Runs the configured model over the sweep, writes every artifact to `out_dir`
/// and returns the report. On a solver failure the completed members and a failure
/// manifest are written before the error is returned.
pub fn run_experiment(config: &ExperimentConfig, mode: Mode, out_dir: &Path) -> Result<ExperimentReport> {
    fs::create_dir_all(out_dir)?;
    let mut manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        status: "running".into(),
        error: None,
        config: config.clone(),
        artifacts: Vec::new(),
        wall_seconds: BTreeMap::new(),
    };
    let result = execute(config, mode, out_dir, &mut manifest);
    match &result {
        Ok(_) => manifest.status = "ok".into(),
        Err(e) => {
            manifest.status = "failed".into();
            manifest.error = Some(e.to_string());
        }
    }
    write_json(out_dir, MANIFEST_FILE, &manifest)?;
    result
}

fn timed<T>(manifest: &mut Manifest, stage: &str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    manifest.wall_seconds.insert(stage.to_string(), start.elapsed().as_secs_f64());
    out
}

fn execute(config: &ExperimentConfig, mode: Mode, out_dir: &Path, manifest: &mut Manifest) -> Result<ExperimentReport> {
    config.validate()?;
    let setup = prepare(config)?;
    let gas = setup.gas;
    let mut epsilons = config.member_epsilons();
    if mode == Mode::Single {
        epsilons.truncate(1);
    }
    let shift = config.chi.shift.unwrap_or_else(|| setup.data.min_entropy(&gas));
    let window = config.chi.window.map(|w| (w[0], w[1]));
    let battery = ChiBattery::standard(shift, &config.chi.caps, config.chi.width, window)
        .map_err(|e| Error::config("chi", e.to_string()))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let results: Vec<Result<Member>> = timed(manifest, "solve", || {
        pool.install(|| {
            epsilons.par_iter().enumerate().map(|(i, &eps)| run_member(config, &setup, &battery, i, eps)).collect()
        })
    });
    let mut members = Vec::new();
    let mut failure = None;
    for r in results {
        match r {
            Ok(m) => {
                write_text(out_dir, &m.summary.trajectory_file, &trajectory_csv(&m.trajectory))?;
                manifest.artifacts.push(m.summary.trajectory_file.clone());
                members.push(m);
            }
            Err(e) => failure = failure.or(Some(e)),
        }
    }
    if let Some(e) = failure {
        return Err(e);
    }

    pool.install(|| analyse(config, &setup, &battery, &members, out_dir, manifest))
}

fn analyse(
    config: &ExperimentConfig,
    setup: &Setup,
    battery: &ChiBattery,
    members: &[Member],
    out_dir: &Path,
    manifest: &mut Manifest,
) -> Result<ExperimentReport> {
    let gas = &setup.gas;
    let family: Vec<&FieldTrajectory> = members.iter().map(|m| &m.trajectory).collect();
    let pooling = match config.verify.pooling {
        PoolingChoice::Reference => Pooling::Reference(family.len() - 1),
        PoolingChoice::Pooled => Pooling::Pooled,
    };
    let measure = timed(manifest, "measure", || build_empirical_measure(&family, config.coarse_n(), pooling))?;
    write_json(out_dir, MEASURE_FILE, &measure)?;
    manifest.artifacts.push(MEASURE_FILE.into());

    let defects = energy_defect(&family, &measure, gas, 0)?;
    let basis = test_function_basis(&measure.coarse, config.verify.k_space, config.verify.k_time, config.t_end);
    let verification = timed(manifest, "verify", || {
        verify_rdmv(&measure, &basis, battery, gas, &config.verify.tolerances, Some(&defects))
    })?;

    let epsilons: Vec<f64> = members.iter().map(|m| m.summary.epsilon).collect();
    let (mut scaling, mut scaling_note) = (None, None);
    if config.model == Model::Brenner {
        let mags: Vec<Vec<f64>> =
            members.iter().map(|m| m.summary.brenner_magnitudes.unwrap_or_default().as_array().to_vec()).collect();
        match dissipation_scaling_report(&DissipationMagnitudes::LABELS, &epsilons, &mags) {
            Ok(r) => scaling = Some(r),
            Err(e) => scaling_note = Some(e.to_string()),
        }
    }

    let mut weak_strong = None;
    if config.weak_strong.enabled {
        if let Some(strong) = config.ic.strong_solution(setup.grid.length()) {
            let series = timed(manifest, "weak_strong", || {
                family.iter().map(|t| weak_strong_monitor(t, &strong, gas)).collect::<Result<Vec<_>>>()
            })?;
            for (i, s) in series.iter().enumerate() {
                let name = format!("relative_energy_{i:02}.csv");
                write_text(out_dir, &name, &relative_energy_csv(s))?;
                manifest.artifacts.push(name);
            }
            weak_strong = Some(WeakStrongStudy::from_series(&series, config.weak_strong.model_error));
        }
    }

    let pass = verification.pass && scaling.as_ref().map_or(true, |s: &ScalingReport| s.pass.iter().all(|p| *p));
    let report = ExperimentReport {
        model: config.model,
        epsilons,
        members: members.iter().map(|m| m.summary.clone()).collect(),
        verification,
        defects: DefectSummary {
            member: defects.member,
            min_energy_defect: defects.min_energy_defect(),
            max_energy_defect: defects.max_energy_defect(),
            max_concentration: defects.max_concentration(),
        },
        dissipation_scaling: scaling,
        dissipation_scaling_note: scaling_note,
        weak_strong,
        pass,
    };
    write_json(out_dir, REPORT_FILE, &report)?;
    manifest.artifacts.push(REPORT_FILE.into());
    Ok(report)
}

/// Reads a `report.json` written by [`run_experiment`].
pub fn read_report(path: &Path) -> Result<ExperimentReport> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}
