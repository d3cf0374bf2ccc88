use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flux::{euler_physical_flux, max_wave_speed, mirror, rusanov_combine, Flux};
use crate::discretization::{FieldTrajectory, Grid, ModelTag, Neighbor};
use crate::error::{Error, Result};
use crate::thermo::{conservative_to_primitive, ConservativeState, GasParams, VACUUM_FLOOR};

/// Grids with at least this many cells are updated in parallel.
pub(crate) const PAR_THRESHOLD: usize = 4096;

/// Number of dt halvings tried before a step is declared a blow-up.
pub const MAX_RETRIES: usize = 5;

pub(crate) fn map_cells<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    if n >= PAR_THRESHOLD {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// Time-stepping controls shared by the solvers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub t_end: f64,
    pub cfl: f64,
    pub sample_dt: f64,
}

impl RunSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Domain(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::Domain(format!("cfl must lie in (0, 1), got {}", self.cfl)));
        }
        if !(self.sample_dt > 0.0 && self.sample_dt <= self.t_end) {
            return Err(Error::Domain(format!("sample_dt must lie in (0, t_end], got {}", self.sample_dt)));
        }
        Ok(())
    }

    /// Sample instants `0, h, 2h, ...` ending exactly at `t_end`.
    pub fn sample_times(&self) -> Vec<f64> {
        let k = (self.t_end / self.sample_dt - 1e-9).ceil().max(1.0) as usize;
        let mut out: Vec<f64> = (0..k).map(|j| j as f64 * self.sample_dt).collect();
        out.push(self.t_end);
        out
    }
}

/// Semi-discrete right-hand side `-div F(U)` with Rusanov fluxes, and the largest wave speed.
pub fn euler_rhs(grid: &Grid, cells: &[ConservativeState], gas: &GasParams) -> Result<(Vec<ConservativeState>, f64)> {
    let n = cells.len();
    let dx = grid.dx();
    let mut rhs = vec![ConservativeState::ZERO; n];
    let mut lambda_max: f64 = 0.0;
    for axis in 0..grid.dim() {
        let flux = map_cells(n, |c| euler_physical_flux(&cells[c], gas, axis))?;
        let speed = map_cells(n, |c| max_wave_speed(&cells[c], gas, axis))?;
        lambda_max = speed.iter().copied().fold(lambda_max, f64::max);
        let face = |l: usize, r: usize| rusanov_combine(&flux[l], &flux[r], &cells[l], &cells[r], speed[l].max(speed[r]));
        let wall = |c: usize, ghost_left: bool| -> Result<Flux> {
            let g = mirror(&cells[c], axis);
            let fg = euler_physical_flux(&g, gas, axis)?;
            Ok(if ghost_left {
                rusanov_combine(&fg, &flux[c], &g, &cells[c], speed[c])
            } else {
                rusanov_combine(&flux[c], &fg, &cells[c], &g, speed[c])
            })
        };
        let left_faces = map_cells(n, |c| match grid.neighbor(c, axis, -1) {
            Neighbor::Cell(k) => Ok(face(k, c)),
            Neighbor::Wall => wall(c, true),
        })?;
        let div = map_cells(n, |c| {
            let right = match grid.neighbor(c, axis, 1) {
                Neighbor::Cell(k) => left_faces[k],
                Neighbor::Wall => wall(c, false)?,
            };
            Ok((right - left_faces[c]) * (1.0 / dx))
        })?;
        for (r, d) in rhs.iter_mut().zip(div) {
            *r = *r - d;
        }
    }
    Ok((rhs, lambda_max))
}

pub(crate) fn admissible(cells: &[ConservativeState], gas: &GasParams) -> bool {
    cells.iter().all(|c| c.rho >= 0.0 && conservative_to_primitive(c, gas, VACUUM_FLOOR).is_ok())
}

/// Stable step size `cfl * dx / (dim * max lambda)`.
pub fn euler_dt(grid: &Grid, cells: &[ConservativeState], gas: &GasParams, cfl: f64) -> Result<f64> {
    let mut lambda: f64 = 0.0;
    for axis in 0..grid.dim() {
        for c in cells {
            lambda = lambda.max(max_wave_speed(c, gas, axis)?);
        }
    }
    if !lambda.is_finite() {
        return Err(Error::BlowUp { time: f64::NAN, detail: "non-finite wave speed".into() });
    }
    Ok(if lambda > 0.0 { cfl * grid.dx() / (grid.dim() as f64 * lambda) } else { f64::INFINITY })
}

/// One SSP-RK2 step of fixed size; `None` if the result leaves the admissible set.
pub fn ssp_rk2_euler(
    grid: &Grid,
    cells: &[ConservativeState],
    gas: &GasParams,
    dt: f64,
) -> Result<Option<Vec<ConservativeState>>> {
    let (l0, _) = euler_rhs(grid, cells, gas)?;
    let u1: Vec<ConservativeState> = cells.iter().zip(&l0).map(|(u, l)| *u + *l * dt).collect();
    if !admissible(&u1, gas) {
        return Ok(None);
    }
    let (l1, _) = euler_rhs(grid, &u1, gas)?;
    let u2: Vec<ConservativeState> =
        cells.iter().zip(u1.iter().zip(&l1)).map(|(u, (v, l))| (*u + *v + *l * dt) * 0.5).collect();
    Ok(if admissible(&u2, gas) { Some(u2) } else { None })
}

/// One positivity-guarded step at time `t`, never longer than `dt_cap`.
/// Returns the new cells and the step actually taken.
pub fn step_euler(
    grid: &Grid,
    cells: &[ConservativeState],
    gas: &GasParams,
    cfl: f64,
    t: f64,
    dt_cap: f64,
) -> Result<(Vec<ConservativeState>, f64)> {
    let mut dt = euler_dt(grid, cells, gas, cfl)
        .map_err(|_| Error::BlowUp { time: t, detail: "non-finite wave speed".into() })?
        .min(dt_cap);
    if !(dt > 1e-14 * (1.0 + t)) {
        return Err(Error::BlowUp { time: t, detail: format!("time step underflow (dt = {dt:e})") });
    }
    for _ in 0..=MAX_RETRIES {
        if let Some(next) = ssp_rk2_euler(grid, cells, gas, dt)? {
            return Ok((next, dt));
        }
        dt *= 0.5;
    }
    Err(Error::BlowUp { time: t, detail: format!("positivity lost after {MAX_RETRIES} dt halvings") })
}

/// Integrates from `initial` to `settings.t_end`, storing the configured samples.
pub fn run_euler(
    grid: &Grid,
    initial: Vec<ConservativeState>,
    gas: &GasParams,
    settings: &RunSettings,
) -> Result<FieldTrajectory> {
    settings.validate()?;
    let mut traj = FieldTrajectory::new(grid.clone(), ModelTag::Euler, 0.0);
    let samples = settings.sample_times();
    let mut cells = initial;
    let mut t = 0.0;
    traj.push(0.0, cells.clone())?;
    for &target in &samples[1..] {
        while t < target {
            let (next, dt) = step_euler(grid, &cells, gas, settings.cfl, t, target - t)?;
            cells = next;
            t = if target - (t + dt) <= 1e-12 * target { target } else { t + dt };
        }
        traj.push(target, cells.clone())?;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{build_grid, BoundaryCondition};

    #[test]
    fn uniform_state_is_fixed_point() {
        let gas = GasParams::from_gamma(1.4).unwrap();
        for dim in [1, 2] {
            let g = build_grid(dim, 16, 1.0, BoundaryCondition::Periodic).unwrap();
            let u = ConservativeState::new(1.2, [0.3, -0.1, 0.0], 4.0);
            let cells = vec![u; g.num_cells()];
            let (next, _) = step_euler(&g, &cells, &gas, 0.45, 0.0, 1.0).unwrap();
            for c in next {
                assert!(c.max_abs_diff(&u) < 1e-14);
            }
        }
    }

    #[test]
    fn wall_runs_conserve_mass_and_energy() {
        let gas = GasParams::from_gamma(1.4).unwrap();
        let g = build_grid(1, 50, 1.0, BoundaryCondition::SlipWall).unwrap();
        let cells: Vec<_> = g
            .centers()
            .iter()
            .map(|x| {
                let rho = 1.0 + 0.5 * (x[0] > 0.5) as i32 as f64;
                ConservativeState::new_1d(rho, 0.3 * rho, 2.0 + rho)
            })
            .collect();
        let m0: f64 = cells.iter().map(|c| c.rho).sum();
        let e0: f64 = cells.iter().map(|c| c.energy).sum();
        let mut u = cells;
        for _ in 0..50 {
            u = step_euler(&g, &u, &gas, 0.45, 0.0, 1.0).unwrap().0;
        }
        let m1: f64 = u.iter().map(|c| c.rho).sum();
        let e1: f64 = u.iter().map(|c| c.energy).sum();
        assert!((m1 - m0).abs() < 1e-12 * m0);
        assert!((e1 - e0).abs() < 1e-12 * e0);
    }

    #[test]
    fn sample_times_end_exactly() {
        let s = RunSettings { t_end: 0.2, cfl: 0.45, sample_dt: 0.05 };
        let t = s.sample_times();
        assert_eq!(t.len(), 5);
        assert_eq!(*t.last().unwrap(), 0.2);
        let s = RunSettings { t_end: 0.2, cfl: 0.45, sample_dt: 0.2 };
        assert_eq!(s.sample_times(), vec![0.0, 0.2]);
    }
}
