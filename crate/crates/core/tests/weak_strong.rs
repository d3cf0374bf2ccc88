use rdmv_core::brenner::{run_brenner, BrennerParams};
use rdmv_core::discretization::{build_grid, BoundaryCondition, FieldTrajectory, Grid, ModelTag};
use rdmv_core::euler::RunSettings;
use rdmv_core::relative_energy::{weak_strong_monitor, StrongSolution, TravelingContact, WeakStrongSeries};
use rdmv_core::thermo::{ConservativeState, GasParams};

fn gas() -> GasParams {
    GasParams::from_gamma(1.4).unwrap()
}

fn contact_initial(grid: &Grid, c: &TravelingContact, gas: &GasParams) -> Vec<ConservativeState> {
    grid.centers().iter().map(|&x| c.point(0.0, x).conservative(gas)).collect()
}

fn brenner_series(n: usize, eps: f64, t_end: f64) -> WeakStrongSeries {
    let gas = gas();
    let c = TravelingContact::default();
    let grid = build_grid(1, n, 1.0, BoundaryCondition::Periodic).unwrap();
    let params = BrennerParams::new(eps, -10.0);
    let settings = RunSettings { t_end, cfl: 0.45, sample_dt: t_end / 10.0 };
    let run = run_brenner(&grid, contact_initial(&grid, &c, &gas), &params, &gas, &settings, &[]).unwrap();
    weak_strong_monitor(&run.trajectory, &c, &gas).unwrap()
}

#[test]
fn brenner_sweep_converges_to_contact() {
    let series: Vec<WeakStrongSeries> = [1e-2, 3e-3, 1e-3, 3e-4].iter().map(|&e| brenner_series(400, e, 0.5)).collect();
    for w in series.windows(2) {
        assert!(w[1].max_relative_energy() < w[0].max_relative_energy());
        for j in 0..3 {
            assert!(w[1].max_l1()[j] < w[0].max_l1()[j]);
        }
    }
}

#[test]
fn contact_is_an_exact_euler_solution() {
    let gas = gas();
    let c = TravelingContact { amplitude: 0.3, wavenumber: 2.0, velocity: 0.8, pressure: 1.5, ..Default::default() };
    let h = 1e-5;
    let cons = |t: f64, x: f64| c.point(t, [x, 0.0]).conservative(&gas);
    let flux = |t: f64, x: f64| {
        let u = cons(t, x);
        let p = u.pressure(&gas).unwrap();
        let v = u.m[0] / u.rho;
        [u.m[0], u.m[0] * v + p, (u.energy + p) * v]
    };
    for &(t, x) in &[(0.0, 0.13), (0.4, 0.5), (1.3, 0.91)] {
        let dt = |f: fn(&ConservativeState) -> f64| (f(&cons(t + h, x)) - f(&cons(t - h, x))) / (2.0 * h);
        let dt_u = [dt(|u| u.rho), dt(|u| u.m[0]), dt(|u| u.energy)];
        let (fp, fm) = (flux(t, x + h), flux(t, x - h));
        for k in 0..3 {
            let res = dt_u[k] + (fp[k] - fm[k]) / (2.0 * h);
            assert!(res.abs() < 1e-7, "equation {k}: residual {res}");
        }
    }
}

#[test]
fn initial_perturbation_gives_quadratic_relative_energy() {
    let gas = gas();
    let c = TravelingContact::default();
    let grid = build_grid(1, 200, 1.0, BoundaryCondition::Periodic).unwrap();
    let e0 = |delta: f64| {
        let mut traj = FieldTrajectory::new(grid.clone(), ModelTag::Euler, 0.0);
        let states = grid
            .centers()
            .iter()
            .map(|&x| {
                let mut p = c.point(0.0, x);
                p.rho += delta * (2.0 * std::f64::consts::PI * x[0]).cos();
                p.conservative(&gas)
            })
            .collect();
        traj.push(0.0, states).unwrap();
        weak_strong_monitor(&traj, &c, &gas).unwrap().relative_energy[0]
    };
    let (a, b) = (e0(1e-2), e0(5e-3));
    assert!((a / b - 4.0).abs() < 0.05, "ratio {}", a / b);
}

#[test]
fn dirac_at_strong_solution_has_zero_relative_energy() {
    let gas = gas();
    let c = TravelingContact::default();
    let grid = build_grid(1, 100, 1.0, BoundaryCondition::Periodic).unwrap();
    let mut traj = FieldTrajectory::new(grid.clone(), ModelTag::Euler, 0.0);
    for k in 0..=10 {
        let t = 0.05 * k as f64;
        traj.push(t, grid.centers().iter().map(|&x| c.point(t, x).conservative(&gas)).collect()).unwrap();
    }
    let s = weak_strong_monitor(&traj, &c, &gas).unwrap();
    assert!(s.max_relative_energy() <= 1e-12);
}
