use rdmv_core::discretization::{build_grid, BoundaryCondition, Grid};
use rdmv_core::euler::{run_euler, step_euler, RiemannSolution, RunSettings};
use rdmv_core::thermo::{primitive_to_conservative, ConservativeState, GasParams, PrimitiveState};
use std::f64::consts::PI;

fn contact_cells(grid: &Grid, gas: &GasParams, shift: f64) -> Vec<ConservativeState> {
    grid.centers()
        .iter()
        .map(|x| {
            let rho = 1.0 + 0.2 * (2.0 * PI * (x[0] - shift)).sin();
            primitive_to_conservative(&PrimitiveState::new_1d(rho, 1.0, 1.0 / rho, gas).unwrap(), gas).unwrap()
        })
        .collect()
}

fn contact_error(n: usize) -> f64 {
    let gas = GasParams::from_gamma(1.4).unwrap();
    let grid = build_grid(1, n, 1.0, BoundaryCondition::Periodic).unwrap();
    let settings = RunSettings { t_end: 1.0, cfl: 0.45, sample_dt: 1.0 };
    let traj = run_euler(&grid, contact_cells(&grid, &gas, 0.0), &gas, &settings).unwrap();
    let exact = contact_cells(&grid, &gas, 1.0);
    grid.integrate(traj.states[1].iter().zip(&exact).map(|(a, b)| (a.rho - b.rho).abs()))
}

#[test]
fn contact_error_is_first_order() {
    let e: Vec<f64> = [100, 200, 400].iter().map(|&n| contact_error(n)).collect();
    eprintln!("contact L1 errors: {e:?}");
    for w in e.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.5..=2.5).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn sod_matches_exact_solution() {
    let gas = GasParams::from_gamma(1.4).unwrap();
    let grid = build_grid(1, 400, 1.0, BoundaryCondition::SlipWall).unwrap();
    let left = PrimitiveState::new_1d(1.0, 0.0, 1.0, &gas).unwrap();
    let right = PrimitiveState::new_1d(0.125, 0.0, 0.8, &gas).unwrap();
    let init: Vec<_> = grid
        .centers()
        .iter()
        .map(|x| primitive_to_conservative(if x[0] < 0.5 { &left } else { &right }, &gas).unwrap())
        .collect();
    let settings = RunSettings { t_end: 0.2, cfl: 0.45, sample_dt: 0.2 };
    let traj = run_euler(&grid, init, &gas, &settings).unwrap();
    let sol = RiemannSolution::solve(&left, &right, &gas).unwrap();
    let err = grid.integrate(
        grid.centers().iter().zip(&traj.states[1]).map(|(x, s)| (s.rho - sol.sample((x[0] - 0.5) / 0.2).rho).abs()),
    );
    eprintln!("sod L1 density error: {err}");
    assert!(err < 0.02);
}

#[test]
fn periodic_step_conserves_totals() {
    let gas = GasParams::from_gamma(1.4).unwrap();
    let grid = build_grid(1, 128, 1.0, BoundaryCondition::Periodic).unwrap();
    let mut cells = contact_cells(&grid, &gas, 0.0);
    for c in cells.iter_mut().step_by(3) {
        c.energy *= 1.5;
    }
    let tot = |u: &[ConservativeState]| -> [f64; 3] {
        [u.iter().map(|c| c.rho).sum(), u.iter().map(|c| c.m[0]).sum(), u.iter().map(|c| c.energy).sum()]
    };
    let t0 = tot(&cells);
    for _ in 0..100 {
        cells = step_euler(&grid, &cells, &gas, 0.45, 0.0, 1.0).unwrap().0;
        let t1 = tot(&cells);
        for k in 0..3 {
            assert!((t1[k] - t0[k]).abs() <= 1e-13 * t0[k].abs().max(1.0));
        }
    }
}
