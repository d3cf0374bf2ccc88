//! Acceptance suite: one pass/fail line per criterion, tolerances pinned below.
//! Runs as a plain binary (`harness = false`) so the lines always reach the output.

use std::f64::consts::PI;
use std::fs;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rdmv_core::brenner::{run_brenner, BrennerParams, BrennerRun, DissipationMagnitudes};
use rdmv_core::discretization::{build_grid, test_function_basis, BoundaryCondition, FieldTrajectory, Grid, ModelTag};
use rdmv_core::euler::{run_euler, step_euler, RiemannSolution, RunSettings};
use rdmv_core::experiments::{parse_config, run_experiment, Mode, MANIFEST_FILE};
use rdmv_core::ns_entropy::{run_ns_entropy, NsEntropyParams, NsField, NsRun};
use rdmv_core::relative_energy::{
    relative_energy_conservative, relative_energy_primitive, total_entropy, total_entropy_gradient, weak_strong_monitor,
    StrongSolution, TravelingContact, WeakStrongSeries,
};
use rdmv_core::thermo::{
    conservative_to_primitive, kinetic_energy_ext, primitive_to_conservative, renorm_total_entropy, ChiBattery,
    ConservativeState, Ext, GasParams, PrimitiveState, VACUUM_FLOOR,
};
use rdmv_core::verifier::{
    dissipation_scaling_report, minimum_principle_check, verify_rdmv, Tolerances, VerificationReport,
};
use rdmv_core::young_measure::{build_empirical_measure, energy_defect, EmpiricalYoungMeasure, Pooling};

const SEED: u64 = 20_240_611;
const RANDOM_PAIRS: usize = 10_000;

const ROUND_TRIP_TOL: f64 = 1e-12;
const CONVEXITY_TOL: f64 = 1e-12;
const AC1_BUDGET: Duration = Duration::from_secs(5);

const CONTACT_RATIO: (f64, f64) = (1.5, 2.5);
const SOD_L1_MAX: f64 = 0.02;
const AC2_BUDGET: Duration = Duration::from_secs(60);

const STEP_ENERGY_TOL: f64 = 1e-13;

const RATIO_TOL: f64 = 1e-10;
/// `C` of the `C dx t` bound on the entropy drift of the NS route (measured: about 3.0).
const NS_DRIFT_CONSTANT: f64 = 6.0;
const LEDGER_TOL: f64 = 1e-12;
const AC4_BUDGET: Duration = Duration::from_secs(300);

const BRENNER_ENERGY_TOL: f64 = 1e-10;
const BRENNER_ENTROPY_TOL: f64 = 1e-12;
const MIN_PRINCIPLE_FACTOR: f64 = 10.0;
const AC5_BUDGET: Duration = Duration::from_secs(300);

const NORMALIZATION_TOL: f64 = 1e-12;
const JENSEN_TOL: f64 = 1e-10;
const DEFECT_TOL: f64 = 1e-10;

const FORM_TOL: f64 = 1e-10;
const GRADIENT_TOL: f64 = 1e-6;
const GRADIENT_STEP: f64 = 1e-5;
const DIRAC_TOL: f64 = 1e-12;
const AC7_BUDGET: Duration = Duration::from_secs(300);

struct Outcome {
    id: &'static str,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn gas() -> GasParams {
    GasParams::from_gamma(1.4).unwrap()
}

fn contact_cells(grid: &Grid, gas: &GasParams, c: &TravelingContact, t: f64) -> Vec<ConservativeState> {
    grid.centers().iter().map(|&x| c.point(t, x).conservative(gas)).collect()
}

fn euler_contact(n: usize, t_end: f64, sample_dt: f64) -> FieldTrajectory {
    let gas = gas();
    let grid = build_grid(1, n, 1.0, BoundaryCondition::Periodic).unwrap();
    let c = TravelingContact::default();
    run_euler(&grid, contact_cells(&grid, &gas, &c, 0.0), &gas, &RunSettings { t_end, cfl: 0.45, sample_dt }).unwrap()
}

fn sod_states() -> (PrimitiveState, PrimitiveState) {
    let gas = gas();
    (PrimitiveState::new_1d(1.0, 0.0, 1.0, &gas).unwrap(), PrimitiveState::new_1d(0.125, 0.0, 0.8, &gas).unwrap())
}

fn euler_sod(n: usize) -> FieldTrajectory {
    let gas = gas();
    let grid = build_grid(1, n, 1.0, BoundaryCondition::SlipWall).unwrap();
    let (l, r) = sod_states();
    let init = grid
        .centers()
        .iter()
        .map(|x| primitive_to_conservative(if x[0] < 0.5 { &l } else { &r }, &gas).unwrap())
        .collect();
    run_euler(&grid, init, &gas, &RunSettings { t_end: 0.2, cfl: 0.45, sample_dt: 0.005 }).unwrap()
}

fn dirac_report(traj: &FieldTrajectory, battery: &ChiBattery) -> VerificationReport {
    let u = EmpiricalYoungMeasure::from_trajectory(traj);
    let basis = test_function_basis(&traj.grid, 6, 4, traj.horizon());
    verify_rdmv(&u, &basis, battery, &gas(), &Tolerances::default(), None).unwrap()
}

fn min_entropy(states: &[ConservativeState], gas: &GasParams) -> f64 {
    states
        .iter()
        .map(|s| rdmv_core::thermo::entropy_from_conservative(s, gas).finite().unwrap())
        .fold(f64::INFINITY, f64::min)
}

fn random_primitive(rng: &mut ChaCha8Rng, gas: &GasParams) -> PrimitiveState {
    let rho = 10f64.powf(rng.gen_range(-2.0..1.0));
    let theta = 10f64.powf(rng.gen_range(-1.0..1.0));
    let u = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
    PrimitiveState::new(rho, u, theta, gas).unwrap()
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let gas = GasParams::new(2.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let battery = ChiBattery::default_for(0.0);
    let mut round_trip = 0.0f64;
    let mut convexity = 0usize;
    let mut concavity = 0usize;
    for _ in 0..RANDOM_PAIRS {
        let p = random_primitive(&mut rng, &gas);
        let c = primitive_to_conservative(&p, &gas).unwrap();
        let back = conservative_to_primitive(&c, &gas, VACUUM_FLOOR).unwrap();
        let mut err = ((back.rho - p.rho) / p.rho).abs().max(((back.theta - p.theta) / p.theta).abs());
        for i in 0..3 {
            err = err.max((back.u[i] - p.u[i]).abs() / p.u[i].abs().max(1.0));
        }
        let again = primitive_to_conservative(&back, &gas).unwrap();
        err = err.max(again.max_abs_diff(&c) / c.energy.abs().max(1.0));
        round_trip = round_trip.max(err);

        let q = primitive_to_conservative(&random_primitive(&mut rng, &gas), &gas).unwrap();
        let lam: f64 = rng.gen_range(0.0..1.0);
        let mix = c * lam + q * (1.0 - lam);
        let ke = |s: &ConservativeState| kinetic_energy_ext(s.rho, &s.m).finite().unwrap();
        let rhs = lam * ke(&c) + (1.0 - lam) * ke(&q);
        if ke(&mix) > rhs + CONVEXITY_TOL * (1.0 + rhs.abs()) {
            convexity += 1;
        }
        for chi in battery.members() {
            let s = |x: &ConservativeState| renorm_total_entropy(x, chi, &gas).finite().unwrap();
            let rhs = lam * s(&c) + (1.0 - lam) * s(&q);
            if s(&mix) < rhs - CONVEXITY_TOL * (1.0 + rhs.abs()) {
                concavity += 1;
            }
        }
    }
    let chi = &battery.members()[0];
    let vacuum_cases = kinetic_energy_ext(0.0, &[0.0; 3]) == Ext::ZERO
        && kinetic_energy_ext(0.0, &[1.0, 0.0, 0.0]) == Ext::PosInf
        && renorm_total_entropy(&ConservativeState::new(0.0, [0.0; 3], 0.0), chi, &gas) == Ext::ZERO
        && renorm_total_entropy(&ConservativeState::new(0.0, [0.0; 3], 1.0), chi, &gas) == Ext::ZERO
        && renorm_total_entropy(&ConservativeState::new(0.0, [1.0, 0.0, 0.0], 1.0), chi, &gas) == Ext::NegInf
        && renorm_total_entropy(&ConservativeState::new(1.0, [2.0, 0.0, 0.0], 1.0), chi, &gas) == Ext::NegInf
        && renorm_total_entropy(&ConservativeState::new(1.0, [0.0; 3], 0.0), chi, &gas) == Ext::NegInf;
    let elapsed = start.elapsed();
    Outcome {
        id: "AC1",
        name: "thermodynamic core",
        pass: round_trip <= ROUND_TRIP_TOL && convexity == 0 && concavity == 0 && vacuum_cases && elapsed < AC1_BUDGET,
        detail: format!(
            "round trip {round_trip:.1e}, convexity violations {convexity}, concavity violations {concavity}, vacuum cases {}",
            if vacuum_cases { "exact" } else { "wrong" }
        ),
        elapsed,
    }
}

struct EulerRuns {
    contact_errors: Vec<f64>,
    sod_error: f64,
    contacts: Vec<FieldTrajectory>,
    sod: FieldTrajectory,
    elapsed: Duration,
}

fn euler_runs() -> EulerRuns {
    let start = Instant::now();
    let gas = gas();
    let c = TravelingContact::default();
    let mut contact_errors = Vec::new();
    for n in [100, 200, 400] {
        let grid = build_grid(1, n, 1.0, BoundaryCondition::Periodic).unwrap();
        let traj = run_euler(&grid, contact_cells(&grid, &gas, &c, 0.0), &gas, &RunSettings { t_end: 1.0, cfl: 0.45, sample_dt: 1.0 })
            .unwrap();
        let exact = contact_cells(&grid, &gas, &c, 1.0);
        contact_errors.push(grid.integrate(traj.states[1].iter().zip(&exact).map(|(a, b)| (a.rho - b.rho).abs())));
    }
    let sod = euler_sod(400);
    let (l, r) = sod_states();
    let sol = RiemannSolution::solve(&l, &r, &gas).unwrap();
    let k = sod.sample_near(0.2);
    let sod_error = sod.grid.integrate(
        sod.grid.centers().iter().zip(&sod.states[k]).map(|(x, s)| (s.rho - sol.sample((x[0] - 0.5) / 0.2).rho).abs()),
    );
    let contacts = vec![euler_contact(200, 0.5, 0.0125), euler_contact(400, 0.5, 0.0125)];
    EulerRuns { contact_errors, sod_error, contacts, sod, elapsed: start.elapsed() }
}

fn ac2(runs: &EulerRuns) -> Outcome {
    let ratios: Vec<f64> = runs.contact_errors.windows(2).map(|w| w[0] / w[1]).collect();
    let order_ok = ratios.iter().all(|r| (CONTACT_RATIO.0..=CONTACT_RATIO.1).contains(r));
    Outcome {
        id: "AC2",
        name: "Euler solver order",
        pass: order_ok && runs.sod_error < SOD_L1_MAX && runs.elapsed < AC2_BUDGET,
        detail: format!("contact L1 ratios {ratios:.3?}, Sod L1 {:.4}", runs.sod_error),
        elapsed: runs.elapsed,
    }
}

fn smooth_primitives(grid: &Grid) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let c = grid.centers();
    (
        c.iter().map(|x| 1.0 + 0.2 * (2.0 * PI * x[0]).sin()).collect(),
        c.iter().map(|x| 0.2 * (4.0 * PI * x[0]).sin()).collect(),
        c.iter().map(|x| 1.0 + 0.1 * (2.0 * PI * x[0]).cos()).collect(),
    )
}

struct NsRuns {
    members: Vec<(f64, NsRun, NsEntropyParams)>,
    battery: ChiBattery,
    elapsed: Duration,
}

fn ns_runs() -> NsRuns {
    let start = Instant::now();
    let gas = gas();
    let mut members = Vec::new();
    let mut battery = None;
    for (eps, n) in [(1e-2, 100), (3e-3, 200), (1e-3, 400)] {
        let grid = build_grid(1, n, 1.0, BoundaryCondition::Periodic).unwrap();
        let (rho, u, theta) = smooth_primitives(&grid);
        let field = NsField::from_primitive(&rho, &u, &theta, &gas);
        let (lo, hi) = field.ratio_range();
        let params = NsEntropyParams { epsilon: eps, beta: NsEntropyParams::beta_floor(&gas), mu: 1.0, eta: 0.0, c_star: lo, c_upper: hi };
        if battery.is_none() {
            let shift = min_entropy(&field.to_conservative(&gas), &gas);
            let k = gas.c_v() + 1.0;
            battery = Some(
                ChiBattery::standard(shift, &ChiBattery::DEFAULT_CAPS, ChiBattery::DEFAULT_WIDTH, Some((k * lo.ln(), k * hi.ln())))
                    .unwrap(),
            );
        }
        let run = run_ns_entropy(&grid, field, &params, &gas, &RunSettings { t_end: 0.2, cfl: 0.45, sample_dt: 0.005 }).unwrap();
        members.push((eps, run, params));
    }
    NsRuns { members, battery: battery.unwrap(), elapsed: start.elapsed() }
}

fn ac4(runs: &NsRuns) -> Outcome {
    let gas = gas();
    let mut ratio_ok = true;
    let mut drift_ratio = 0.0f64;
    let mut ledger_increase = f64::NEG_INFINITY;
    let mut residuals: Vec<[f64; 4]> = Vec::new();
    for (_, run, params) in &runs.members {
        let traj = &run.trajectory;
        let aux = traj.aux.as_ref().unwrap();
        for (z, states) in aux.iter().zip(&traj.states) {
            for (zi, s) in z.iter().zip(states) {
                let q = zi / s.rho;
                ratio_ok &= q >= params.c_star * (1.0 - RATIO_TOL) && q <= params.c_upper * (1.0 + RATIO_TOL);
            }
        }
        for chi in runs.battery.members() {
            let total = |k: usize| traj.grid.integrate(traj.states[k].iter().map(|s| renorm_total_entropy(s, chi, &gas).finite().unwrap()));
            let s0 = total(0);
            for k in 1..traj.len() {
                drift_ratio = drift_ratio.max((total(k) - s0).abs() / (traj.grid.dx() * traj.times[k]));
            }
        }
        let b = &run.step_balance;
        ledger_increase = ledger_increase.max(b.windows(2).map(|w| (w[1] - w[0]) / b[0].abs()).fold(f64::NEG_INFINITY, f64::max));
        let r = dirac_report(traj, &runs.battery);
        residuals.push([
            r.continuity.max_abs(),
            r.momentum.max_abs(),
            (-r.energy.worst_margin()).max(0.0),
            (-r.entropy.worst_margin()).max(0.0),
        ]);
    }
    let shrinking = (0..4).all(|j| {
        residuals.windows(2).all(|w| if j < 2 { w[1][j] < w[0][j] } else { w[1][j] <= w[0][j] })
    });
    let pass = ratio_ok
        && drift_ratio <= NS_DRIFT_CONSTANT
        && ledger_increase <= LEDGER_TOL
        && shrinking
        && runs.elapsed < AC4_BUDGET;
    Outcome {
        id: "AC4",
        name: "NS-entropy route",
        pass,
        detail: format!(
            "ratio bound {}, drift/(dx t) {drift_ratio:.3}, ledger max rel. increase {ledger_increase:.1e}, residuals [p4 p5 p6 p7] {}",
            if ratio_ok { "held" } else { "broken" },
            residuals.iter().map(|r| format!("[{:.2e} {:.2e} {:.1e} {:.2e}]", r[0], r[1], r[2], r[3])).collect::<Vec<_>>().join(" ")
        ),
        elapsed: runs.elapsed,
    }
}

const BRENNER_EPS: [f64; 4] = [1e-2, 3e-3, 1e-3, 3e-4];

struct BrennerRuns {
    acoustic: Vec<BrennerRun>,
    battery: ChiBattery,
    s0: f64,
    elapsed: Duration,
}

fn acoustic_cells(grid: &Grid, gas: &GasParams) -> Vec<ConservativeState> {
    let c0 = gas.gamma().sqrt();
    grid.centers()
        .iter()
        .map(|x| {
            let w = 0.05 * (2.0 * PI * x[0]).sin();
            let rho = 1.0 + w;
            let p = 1.0 + gas.gamma() * w;
            primitive_to_conservative(&PrimitiveState::new_1d(rho, c0 * w, p / rho, gas).unwrap(), gas).unwrap()
        })
        .collect()
}

fn brenner_runs() -> BrennerRuns {
    let start = Instant::now();
    let gas = gas();
    let grid = build_grid(1, 400, 1.0, BoundaryCondition::Periodic).unwrap();
    let init = acoustic_cells(&grid, &gas);
    let s0 = min_entropy(&init, &gas);
    let battery = ChiBattery::default_for(s0);
    let monitor: Vec<_> = battery.monotone().cloned().collect();
    let settings = RunSettings { t_end: 0.2, cfl: 0.45, sample_dt: 0.01 };
    let acoustic = BRENNER_EPS
        .iter()
        .map(|&eps| run_brenner(&grid, init.clone(), &BrennerParams::new(eps, s0), &gas, &settings, &monitor).unwrap())
        .collect();
    BrennerRuns { acoustic, battery, s0, elapsed: start.elapsed() }
}

fn ac5(runs: &BrennerRuns) -> Outcome {
    let gas = gas();
    let mut energy_drift = 0.0f64;
    let mut entropy_step = f64::INFINITY;
    let mut deficit = 0.0f64;
    let mut dx = 0.0;
    for run in &runs.acoustic {
        let l = &run.ledger;
        energy_drift = energy_drift.max(l.step_energy.iter().map(|e| (e - l.step_energy[0]).abs()).fold(0.0, f64::max));
        for series in &l.step_entropy {
            let scale = series[0].abs().max(1.0);
            entropy_step = entropy_step.min(series.windows(2).map(|w| (w[1] - w[0]) / scale).fold(f64::INFINITY, f64::min));
        }
        let u = EmpiricalYoungMeasure::from_trajectory(&run.trajectory);
        deficit = deficit.max(minimum_principle_check(&u, &gas, Some(runs.s0), VACUUM_FLOOR).1);
        dx = run.trajectory.grid.dx();
    }
    let mags: Vec<Vec<f64>> = runs.acoustic.iter().map(|r| r.ledger.magnitudes.as_array().to_vec()).collect();
    let scaling = dissipation_scaling_report(&DissipationMagnitudes::LABELS, &BRENNER_EPS, &mags).unwrap();
    let slopes_ok = scaling.pass.iter().all(|p| *p);
    let pass = energy_drift <= BRENNER_ENERGY_TOL
        && entropy_step >= -BRENNER_ENTROPY_TOL
        && deficit <= MIN_PRINCIPLE_FACTOR * dx
        && slopes_ok
        && runs.elapsed < AC5_BUDGET;
    Outcome {
        id: "AC5",
        name: "Brenner route",
        pass,
        detail: format!(
            "energy drift {energy_drift:.1e}, min entropy step {entropy_step:.1e}, min-principle deficit {deficit:.1e}, slopes {}",
            scaling.slopes.iter().map(|s| s.map_or("-".into(), |v| format!("{v:.2}"))).collect::<Vec<_>>().join(" ")
        ),
        elapsed: runs.elapsed,
    }
}

fn ac3(euler: &EulerRuns, ns: &NsRuns, brenner: &BrennerRuns) -> Outcome {
    let start = Instant::now();
    let gas = gas();
    let grid = build_grid(1, 200, 1.0, BoundaryCondition::Periodic).unwrap();
    let mut cells = contact_cells(&grid, &gas, &TravelingContact::default(), 0.0);
    let e0 = grid.integrate(cells.iter().map(|c| c.energy));
    let mut step_drift = 0.0f64;
    let mut t = 0.0;
    for _ in 0..200 {
        let before = grid.integrate(cells.iter().map(|c| c.energy));
        let (next, dt) = step_euler(&grid, &cells, &gas, 0.45, t, f64::INFINITY).unwrap();
        cells = next;
        t += dt;
        step_drift = step_drift.max((grid.integrate(cells.iter().map(|c| c.energy)) - before).abs() / e0);
    }
    let mut trajectories: Vec<&FieldTrajectory> = euler.contacts.iter().collect();
    trajectories.push(&euler.sod);
    trajectories.extend(ns.members.iter().map(|m| &m.1.trajectory));
    trajectories.extend(brenner.acoustic.iter().map(|r| &r.trajectory));
    let mut monotone = true;
    let mut p6 = true;
    for traj in &trajectories {
        let e: Vec<f64> = (0..traj.len()).map(|k| traj.balance_energy_at(k)).collect();
        monotone &= e.windows(2).all(|w| w[1] <= w[0] + STEP_ENERGY_TOL * e[0].abs().max(1.0) * 10.0);
        let battery = if traj.model == ModelTag::Brenner { &brenner.battery } else { &ns.battery };
        p6 &= dirac_report(traj, battery).energy.pass;
    }
    monotone &= brenner.acoustic.iter().all(|r| {
        let s = &r.ledger.step_energy;
        s.windows(2).all(|w| w[1] <= w[0] + BRENNER_ENERGY_TOL)
    });
    monotone &= ns.members.iter().all(|m| m.1.step_balance.windows(2).all(|w| w[1] <= w[0] + LEDGER_TOL * w[0].abs()));
    Outcome {
        id: "AC3",
        name: "conservation and energy admissibility",
        pass: step_drift <= STEP_ENERGY_TOL && monotone && p6,
        detail: format!(
            "periodic per-step energy drift {step_drift:.1e}, non-increasing on all runs: {monotone}, energy clause on {} trajectories: {}",
            trajectories.len(),
            if p6 { "pass" } else { "fail" }
        ),
        elapsed: start.elapsed(),
    }
}

fn ac6(euler: &EulerRuns, brenner: &BrennerRuns) -> Outcome {
    let start = Instant::now();
    let gas = gas();
    let family: Vec<&FieldTrajectory> = brenner.acoustic.iter().map(|r| &r.trajectory).collect();
    let u = build_empirical_measure(&family, 25, Pooling::Pooled).unwrap();
    let normalization = u.normalization_error();
    let mut jensen = 0.0f64;
    for row in &u.cells {
        for cell in row {
            let mean = cell.mean();
            let ke = |s: &ConservativeState| s.kinetic_energy().finite().unwrap();
            jensen = jensen.max(ke(&mean) - cell.expectation_finite(ke));
            for chi in brenner.battery.monotone() {
                let s = |x: &ConservativeState| renorm_total_entropy(x, chi, &gas).finite().unwrap();
                jensen = jensen.max(cell.expectation_finite(s) - s(&mean));
            }
        }
    }
    let defects = energy_defect(&family, &u, &gas, 0).unwrap();
    let min_defect = defects.member_energy_defects.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let mut weak_ok = true;
    let mut worst = 0.0f64;
    for traj in euler.contacts.iter().chain(std::iter::once(&euler.sod)) {
        let r = dirac_report(traj, &ChiBattery::default_for(0.0));
        weak_ok &= r.continuity.pass && r.momentum.pass;
        worst = worst.max(r.continuity.max_abs().max(r.momentum.max_abs()) / (r.dx + r.dt));
    }
    Outcome {
        id: "AC6",
        name: "Young measure",
        pass: normalization <= NORMALIZATION_TOL && jensen <= JENSEN_TOL && min_defect >= -DEFECT_TOL && weak_ok,
        detail: format!(
            "normalization {normalization:.1e}, Jensen gap {jensen:.1e}, min D {min_defect:.1e}, Dirac residual/(dx+dt) {worst:.3} (C = {})",
            Tolerances::default().weak_form_constant
        ),
        elapsed: start.elapsed(),
    }
}

fn ac7() -> Outcome {
    let start = Instant::now();
    let gas = GasParams::new(2.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let mut form_gap = 0.0f64;
    for _ in 0..RANDOM_PAIRS {
        let (p, r) = (random_primitive(&mut rng, &gas), random_primitive(&mut rng, &gas));
        let prim = relative_energy_primitive(&p, &r, &gas).unwrap();
        let cons = relative_energy_conservative(
            &primitive_to_conservative(&p, &gas).unwrap(),
            &primitive_to_conservative(&r, &gas).unwrap(),
            r.theta,
            &gas,
        )
        .unwrap()
        .finite()
        .unwrap();
        form_gap = form_gap.max((cons - prim).abs() / (1.0 + prim.abs()));
    }
    let mut grad_gap = 0.0f64;
    for _ in 0..1000 {
        let c = primitive_to_conservative(&random_primitive(&mut rng, &gas), &gas).unwrap();
        let g = total_entropy_gradient(&c, &gas).unwrap();
        let s = |x: ConservativeState| total_entropy(&x, &gas).finite().unwrap();
        // Steps are relative to the size of the state so that dilute states are resolved.
        let fd = |d: ConservativeState| {
            let h = GRADIENT_STEP * if d.energy != 0.0 { c.energy } else { c.rho };
            (s(c + d * h) - s(c - d * h)) / (2.0 * h)
        };
        let pairs = [
            (g.d_rho, fd(ConservativeState::new(1.0, [0.0; 3], 0.0))),
            (g.d_m[0], fd(ConservativeState::new(0.0, [1.0, 0.0, 0.0], 0.0))),
            (g.d_m[1], fd(ConservativeState::new(0.0, [0.0, 1.0, 0.0], 0.0))),
            (g.d_m[2], fd(ConservativeState::new(0.0, [0.0, 0.0, 1.0], 0.0))),
            (g.d_energy, fd(ConservativeState::new(0.0, [0.0; 3], 1.0))),
        ];
        for (a, b) in pairs {
            grad_gap = grad_gap.max((a - b).abs() / a.abs().max(1.0));
        }
    }

    let gas = self::gas();
    let contact = TravelingContact::default();
    let grid = build_grid(1, 400, 1.0, BoundaryCondition::Periodic).unwrap();
    let settings = RunSettings { t_end: 0.5, cfl: 0.45, sample_dt: 0.05 };
    let series: Vec<WeakStrongSeries> = BRENNER_EPS
        .iter()
        .map(|&eps| {
            let run = run_brenner(&grid, contact_cells(&grid, &gas, &contact, 0.0), &BrennerParams::new(eps, -10.0), &gas, &settings, &[])
                .unwrap();
            weak_strong_monitor(&run.trajectory, &contact, &gas).unwrap()
        })
        .collect();
    let decreasing = series.windows(2).all(|w| {
        w[1].max_relative_energy() < w[0].max_relative_energy() && (0..3).all(|j| w[1].max_l1()[j] < w[0].max_l1()[j])
    });
    let mut exact = FieldTrajectory::new(grid.clone(), ModelTag::Euler, 0.0);
    for k in 0..=10 {
        let t = 0.05 * k as f64;
        exact.push(t, contact_cells(&grid, &gas, &contact, t)).unwrap();
    }
    let dirac = weak_strong_monitor(&exact, &contact, &gas).unwrap().max_relative_energy();
    let elapsed = start.elapsed();
    Outcome {
        id: "AC7",
        name: "relative energy and weak-strong convergence",
        pass: form_gap <= FORM_TOL && grad_gap <= GRADIENT_TOL && decreasing && dirac <= DIRAC_TOL && elapsed < AC7_BUDGET,
        detail: format!(
            "form gap {form_gap:.1e}, gradient gap {grad_gap:.1e}, max relative energy {}, Dirac {dirac:.1e}",
            series.iter().map(|s| format!("{:.2e}", s.max_relative_energy())).collect::<Vec<_>>().join(" > ")
        ),
        elapsed,
    }
}

fn ac8(euler: &EulerRuns) -> Outcome {
    let start = Instant::now();
    let mut identical = rdmv_core::experiments::trajectory_csv(&euler_sod(400)) == rdmv_core::experiments::trajectory_csv(&euler.sod);
    let config = parse_config(
        r#"
model = "brenner"
t_end = 0.1
sample_dt = 0.01
epsilons = [3e-2, 5e-3, 9e-4]
workers = 3
seed = 11
[grid]
n = 128
[ic]
kind = "oscillatory"
amplitude = 0.02
"#,
    )
    .unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        run_experiment(&config, Mode::Sweep, d.path()).unwrap();
    }
    let mut compared = 0;
    for entry in fs::read_dir(dirs[0].path()).unwrap() {
        let name = entry.unwrap().file_name();
        if name == MANIFEST_FILE {
            continue;
        }
        identical &= fs::read(dirs[0].path().join(&name)).unwrap() == fs::read(dirs[1].path().join(&name)).unwrap();
        compared += 1;
    }
    Outcome {
        id: "AC8",
        name: "determinism",
        pass: identical && compared >= 5,
        detail: format!("{compared} sweep artifacts and the Sod trajectory byte-identical: {identical}"),
        elapsed: start.elapsed(),
    }
}

fn main() {
    let mut outcomes = vec![ac1()];
    let euler = euler_runs();
    outcomes.push(ac2(&euler));
    let ns = ns_runs();
    let brenner = brenner_runs();
    outcomes.push(ac3(&euler, &ns, &brenner));
    outcomes.push(ac4(&ns));
    outcomes.push(ac5(&brenner));
    outcomes.push(ac6(&euler, &brenner));
    outcomes.push(ac7());
    outcomes.push(ac8(&euler));
    let mut failed = 0;
    for o in &outcomes {
        println!(
            "{} {:<45} {}  {} ({:.2} s)",
            o.id,
            o.name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            o.elapsed.as_secs_f64()
        );
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
