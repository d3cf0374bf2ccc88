//! Vanishing-viscosity Navier-Stokes approximation with a transported entropy
//! variable `Z`, pressure `Z^gamma + eps Z^beta` and temperature `theta = Z^gamma / rho`.
//!
//! One-dimensional only. The hyperbolic part advects `rho` and `Z` with one and the
//! same Rusanov operator, so each update of `Z` is the same convex combination of
//! neighbours as the update of `rho` and the ratio `Z/rho` obeys a discrete maximum
//! principle. The viscous term is integrated implicitly; the recorded dissipation
//! is a lower bound of the kinetic energy it removes.

use serde::{Deserialize, Serialize};

use crate::discretization::{BoundaryCondition, FieldTrajectory, Grid, ModelTag};
use crate::error::{Error, Result};
use crate::euler::{RunSettings, MAX_RETRIES};
use crate::thermo::{ConservativeState, GasParams, VACUUM_FLOOR};

/// Slack on the ratio bound `c_star <= Z/rho <= c_upper`.
pub const RATIO_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NsEntropyParams {
    pub epsilon: f64,
    pub beta: f64,
    pub mu: f64,
    pub eta: f64,
    pub c_star: f64,
    pub c_upper: f64,
}

impl NsEntropyParams {
    /// Checks `epsilon >= 0`, `beta >= max(gamma, 4)`, `mu > 0`, `eta >= 0`, `0 < c_star <= c_upper`.
    pub fn validate(&self, gas: &GasParams) -> Result<()> {
        let floor = Self::beta_floor(gas);
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Domain(format!("epsilon must be nonnegative, got {}", self.epsilon)));
        }
        if !(self.beta >= floor) {
            return Err(Error::Domain(format!("beta = {} is below max(gamma, 4) = {floor}", self.beta)));
        }
        if !(self.mu > 0.0 && self.eta >= 0.0) {
            return Err(Error::Domain(format!("need mu > 0 and eta >= 0, got {} and {}", self.mu, self.eta)));
        }
        if !(self.c_star > 0.0 && self.c_star <= self.c_upper && self.c_upper.is_finite()) {
            return Err(Error::Domain(format!(
                "need 0 < c_star <= c_upper, got {} and {}",
                self.c_star, self.c_upper
            )));
        }
        Ok(())
    }

    pub fn beta_floor(gas: &GasParams) -> f64 {
        gas.gamma().max(4.0)
    }

    /// Effective one-dimensional viscosity `4 mu / 3 + eta`.
    pub fn nu(&self) -> f64 {
        4.0 * self.mu / 3.0 + self.eta
    }

    /// Total pressure `Z^gamma + eps Z^beta`.
    pub fn pressure(&self, z: f64, gas: &GasParams) -> f64 {
        z.powf(gas.gamma()) + self.epsilon * z.powf(self.beta)
    }

    /// Stored energy density `c_v Z^gamma + eps Z^beta / (beta - 1)` without the kinetic part.
    pub fn potential(&self, z: f64, gas: &GasParams) -> f64 {
        gas.c_v() * z.powf(gas.gamma()) + self.epsilon / (self.beta - 1.0) * z.powf(self.beta)
    }
}

/// Temperature `Z^gamma / rho`, zero at vacuum.
pub fn recover_theta(rho: f64, z: f64, gas: &GasParams) -> Result<f64> {
    if rho < 0.0 || z < 0.0 || rho.is_nan() || z.is_nan() {
        return Err(Error::Domain(format!("rho = {rho}, Z = {z} must be nonnegative")));
    }
    Ok(if rho <= VACUUM_FLOOR { 0.0 } else { z.powf(gas.gamma()) / rho })
}

/// Cell values `(rho, m, Z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NsField {
    pub rho: Vec<f64>,
    pub m: Vec<f64>,
    pub z: Vec<f64>,
}

impl NsField {
    /// From density, velocity and temperature: `Z = (rho theta)^(1/gamma)`.
    pub fn from_primitive(rho: &[f64], u: &[f64], theta: &[f64], gas: &GasParams) -> Self {
        NsField {
            rho: rho.to_vec(),
            m: rho.iter().zip(u).map(|(r, v)| r * v).collect(),
            z: rho.iter().zip(theta).map(|(r, t)| (r * t).powf(1.0 / gas.gamma())).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn velocity(&self) -> Vec<f64> {
        self.rho.iter().zip(&self.m).map(|(r, m)| if *r > VACUUM_FLOOR { m / r } else { 0.0 }).collect()
    }

    /// `(rho, m, 1/2 m^2/rho + c_v Z^gamma)` per cell.
    pub fn to_conservative(&self, gas: &GasParams) -> Vec<ConservativeState> {
        (0..self.len())
            .map(|i| {
                let kin = if self.rho[i] > 0.0 { 0.5 * self.m[i] * self.m[i] / self.rho[i] } else { 0.0 };
                ConservativeState::new_1d(self.rho[i], self.m[i], kin + gas.c_v() * self.z[i].powf(gas.gamma()))
            })
            .collect()
    }

    /// Smallest and largest `Z/rho`.
    pub fn ratio_range(&self) -> (f64, f64) {
        self.rho.iter().zip(&self.z).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (r, z)| {
            let q = z / r;
            (lo.min(q), hi.max(q))
        })
    }

    /// `integral [1/2 rho u^2 + c_v Z^gamma + eps Z^beta/(beta-1)]`.
    pub fn regularized_energy(&self, grid: &Grid, params: &NsEntropyParams, gas: &GasParams) -> f64 {
        grid.integrate((0..self.len()).map(|i| {
            let kin = if self.rho[i] > 0.0 { 0.5 * self.m[i] * self.m[i] / self.rho[i] } else { 0.0 };
            kin + params.potential(self.z[i], gas)
        }))
    }
}

fn require_1d(grid: &Grid) -> Result<()> {
    if grid.dim() != 1 {
        return Err(Error::UnsupportedDimension(grid.dim()));
    }
    Ok(())
}

/// Neighbour values with mirror ghosts at walls (`sign = -1` for momentum).
#[cfg(test)]
fn neighbors(v: &[f64], i: usize, bc: BoundaryCondition, sign: f64) -> (f64, f64) {
    let n = v.len();
    let left = if i > 0 {
        v[i - 1]
    } else if bc == BoundaryCondition::Periodic {
        v[n - 1]
    } else {
        sign * v[0]
    };
    let right = if i + 1 < n {
        v[i + 1]
    } else if bc == BoundaryCondition::Periodic {
        v[0]
    } else {
        sign * v[n - 1]
    };
    (left, right)
}

fn wave_speeds(f: &NsField, params: &NsEntropyParams, gas: &GasParams) -> Vec<f64> {
    let g = gas.gamma();
    (0..f.len())
        .map(|i| {
            let z = f.z[i];
            let c2 = (g * z.powf(g) + params.epsilon * params.beta * z.powf(params.beta)) / f.rho[i];
            (f.m[i] / f.rho[i]).abs() + c2.max(0.0).sqrt()
        })
        .collect()
}

/// Forward-Euler Rusanov update of `(rho, m, Z)`.
fn hyperbolic_euler_step(grid: &Grid, f: &NsField, params: &NsEntropyParams, gas: &GasParams, dt: f64) -> NsField {
    let n = f.len();
    let bc = grid.bc();
    let alpha = wave_speeds(f, params, gas);
    let u: Vec<f64> = f.m.iter().zip(&f.rho).map(|(m, r)| m / r).collect();
    let p: Vec<f64> = f.z.iter().map(|&z| params.pressure(z, gas)).collect();
    let cell = |i: usize| [f.rho[i], f.m[i], f.z[i], u[i], p[i], alpha[i]];
    let ghost = |i: usize| [f.rho[i], -f.m[i], f.z[i], -u[i], p[i], alpha[i]];
    let flux = |l: [f64; 6], r: [f64; 6]| -> [f64; 3] {
        let [rl, ml, zl, ul, pl, al] = l;
        let [rr, mr, zr, ur, pr, ar] = r;
        let a = al.max(ar);
        [
            0.5 * (rl * ul + rr * ur) - 0.5 * a * (rr - rl),
            0.5 * (ml * ul + pl + mr * ur + pr) - 0.5 * a * (mr - ml),
            0.5 * (zl * ul + zr * ur) - 0.5 * a * (zr - zl),
        ]
    };
    // faces[i] is the left face of cell i; faces[n] the right face of the last cell.
    let mut faces: Vec<[f64; 3]> = Vec::with_capacity(n + 1);
    faces.push(match bc {
        BoundaryCondition::Periodic => flux(cell(n - 1), cell(0)),
        BoundaryCondition::SlipWall => flux(ghost(0), cell(0)),
    });
    for i in 1..n {
        faces.push(flux(cell(i - 1), cell(i)));
    }
    faces.push(match bc {
        BoundaryCondition::Periodic => faces[0],
        BoundaryCondition::SlipWall => flux(cell(n - 1), ghost(n - 1)),
    });
    let k = dt / grid.dx();
    let mut out = f.clone();
    for i in 0..n {
        out.rho[i] -= k * (faces[i + 1][0] - faces[i][0]);
        out.m[i] -= k * (faces[i + 1][1] - faces[i][1]);
        out.z[i] -= k * (faces[i + 1][2] - faces[i][2]);
    }
    out
}

/// Solves `(rho_i + 2k) u_i - k u_{i-1} - k u_{i+1} = rhs_i` (walls: mirror ghosts `u = -u`).
fn solve_viscous(rho: &[f64], rhs: &[f64], k: f64, bc: BoundaryCondition) -> Vec<f64> {
    let n = rho.len();
    let mut diag: Vec<f64> = rho.iter().map(|r| r + 2.0 * k).collect();
    match bc {
        BoundaryCondition::SlipWall => {
            diag[0] += k;
            diag[n - 1] += k;
            thomas(&diag, -k, rhs)
        }
        BoundaryCondition::Periodic => {
            // Sherman-Morrison on the cyclic system with corner entries -k.
            let gamma = -diag[0];
            let mut d2 = diag.clone();
            d2[0] -= gamma;
            d2[n - 1] -= k * k / gamma;
            let y = thomas(&d2, -k, rhs);
            let mut w = vec![0.0; n];
            w[0] = gamma;
            w[n - 1] = -k;
            let q = thomas(&d2, -k, &w);
            let v0 = 1.0;
            let vn = -k / gamma;
            let factor = (v0 * y[0] + vn * y[n - 1]) / (1.0 + v0 * q[0] + vn * q[n - 1]);
            y.iter().zip(&q).map(|(a, b)| a - factor * b).collect()
        }
    }
}

/// Tridiagonal solve with constant off-diagonal `off`.
fn thomas(diag: &[f64], off: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = off / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - off * c[i - 1];
        c[i] = off / den;
        d[i] = (rhs[i] - off * d[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// `sum_f w_f ((u_R - u_L)/dx)^2 dx` with half weight on wall faces (ghost `-u`).
fn velocity_gradient_energy(u: &[f64], dx: f64, bc: BoundaryCondition) -> f64 {
    let n = u.len();
    let mut s: f64 = (1..n).map(|i| (u[i] - u[i - 1]).powi(2)).sum();
    match bc {
        BoundaryCondition::Periodic => s += (u[0] - u[n - 1]).powi(2),
        BoundaryCondition::SlipWall => s += 0.5 * ((2.0 * u[0]).powi(2) + (2.0 * u[n - 1]).powi(2)),
    }
    s / dx
}

/// Outcome of one step.
#[derive(Clone, Debug)]
pub struct NsStep {
    pub field: NsField,
    pub dt: f64,
    /// `eps * dt * integral S(u_x) u_x` of the implicit viscous update.
    pub dissipation: f64,
}

pub fn ns_dt(grid: &Grid, f: &NsField, params: &NsEntropyParams, gas: &GasParams, cfl: f64) -> f64 {
    let amax = wave_speeds(f, params, gas).into_iter().fold(0.0, f64::max);
    let mut dt = if amax > 0.0 { cfl * grid.dx() / amax } else { f64::INFINITY };
    if params.epsilon > 0.0 {
        dt = dt.min(grid.dx() * grid.dx() / (4.0 * params.epsilon * params.mu));
    }
    dt
}

fn check_ratio(f: &NsField, params: &NsEntropyParams, t: f64) -> Result<()> {
    let (lo, hi) = f.ratio_range();
    if lo < params.c_star - RATIO_TOL || hi > params.c_upper + RATIO_TOL {
        return Err(Error::InvariantViolation(format!(
            "Z/rho range [{lo}, {hi}] left [{}, {}] at t = {t}",
            params.c_star, params.c_upper
        )));
    }
    Ok(())
}

/// One step: SSP-RK2 Rusanov transport, then an implicit viscous momentum update.
pub fn step_ns_entropy(
    grid: &Grid,
    field: &NsField,
    params: &NsEntropyParams,
    gas: &GasParams,
    cfl: f64,
    t: f64,
    dt_cap: f64,
) -> Result<NsStep> {
    require_1d(grid)?;
    let mut dt = ns_dt(grid, field, params, gas, cfl).min(dt_cap);
    if !(dt > 1e-14 * (1.0 + t)) || !dt.is_finite() {
        return Err(Error::BlowUp { time: t, detail: format!("time step underflow (dt = {dt:e})") });
    }
    let positive = |f: &NsField| {
        f.rho.iter().all(|r| *r > 0.0 && r.is_finite())
            && f.z.iter().all(|z| *z > 0.0 && z.is_finite())
            && f.m.iter().all(|m| m.is_finite())
    };
    for _ in 0..=MAX_RETRIES {
        let u1 = hyperbolic_euler_step(grid, field, params, gas, dt);
        if !positive(&u1) {
            dt *= 0.5;
            continue;
        }
        let u2 = hyperbolic_euler_step(grid, &u1, params, gas, dt);
        let mut next = NsField {
            rho: field.rho.iter().zip(&u2.rho).map(|(a, b)| 0.5 * (a + b)).collect(),
            m: field.m.iter().zip(&u2.m).map(|(a, b)| 0.5 * (a + b)).collect(),
            z: field.z.iter().zip(&u2.z).map(|(a, b)| 0.5 * (a + b)).collect(),
        };
        if !positive(&next) {
            dt *= 0.5;
            continue;
        }
        let mut dissipation = 0.0;
        if params.epsilon > 0.0 {
            let k = dt * params.epsilon * params.nu() / (grid.dx() * grid.dx());
            let u = solve_viscous(&next.rho, &next.m, k, grid.bc());
            dissipation = dt * params.epsilon * params.nu() * velocity_gradient_energy(&u, grid.dx(), grid.bc());
            next.m = next.rho.iter().zip(&u).map(|(r, v)| r * v).collect();
        }
        check_ratio(&next, params, t + dt)?;
        return Ok(NsStep { field: next, dt, dissipation });
    }
    Err(Error::BlowUp { time: t, detail: format!("positivity lost after {MAX_RETRIES} dt halvings") })
}

/// Energy ledger sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NsLedgerEntry {
    pub t: f64,
    pub regularized_energy: f64,
    /// Accumulated `eps integral integral S(u_x) u_x`.
    pub dissipation: f64,
}

impl NsLedgerEntry {
    pub fn balance(&self) -> f64 {
        self.regularized_energy + self.dissipation
    }
}

#[derive(Clone, Debug)]
pub struct NsRun {
    pub trajectory: FieldTrajectory,
    pub ledger: Vec<NsLedgerEntry>,
    /// Ledger value after every step, for per-step monotonicity checks.
    pub step_balance: Vec<f64>,
}

/// Checks that the initial data are positive and satisfy `c_star rho <= Z <= c_upper rho`.
pub fn check_initial_data(field: &NsField, params: &NsEntropyParams) -> Result<()> {
    for i in 0..field.len() {
        if !(field.rho[i] > 0.0 && field.z[i] > 0.0) {
            return Err(Error::Domain(format!(
                "initial data must have rho > 0 and Z > 0 (cell {i}: rho = {}, Z = {})",
                field.rho[i], field.z[i]
            )));
        }
        let q = field.z[i] / field.rho[i];
        if q < params.c_star * (1.0 - 1e-12) || q > params.c_upper * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "initial Z/rho = {q} at cell {i} is outside [{}, {}]",
                params.c_star, params.c_upper
            )));
        }
    }
    Ok(())
}

pub fn run_ns_entropy(
    grid: &Grid,
    initial: NsField,
    params: &NsEntropyParams,
    gas: &GasParams,
    settings: &RunSettings,
) -> Result<NsRun> {
    require_1d(grid)?;
    settings.validate()?;
    params.validate(gas)?;
    if initial.len() != grid.num_cells() {
        return Err(Error::Mismatch(format!("{} cells for a grid of {}", initial.len(), grid.num_cells())));
    }
    check_initial_data(&initial, params)?;
    let mut traj = FieldTrajectory::new(grid.clone(), ModelTag::NsEntropy, params.epsilon);
    let mut aux = Vec::new();
    let mut balance = Vec::new();
    let mut ledger = Vec::new();
    let mut step_balance = Vec::new();
    let mut field = initial;
    let mut t = 0.0;
    let mut dissipated = 0.0;
    let mut record = |t: f64, f: &NsField, dissipated: f64, traj: &mut FieldTrajectory| -> Result<()> {
        traj.push(t, f.to_conservative(gas))?;
        let e = NsLedgerEntry { t, regularized_energy: f.regularized_energy(grid, params, gas), dissipation: dissipated };
        aux.push(f.z.clone());
        balance.push(e.balance());
        ledger.push(e);
        Ok(())
    };
    record(0.0, &field, 0.0, &mut traj)?;
    step_balance.push(field.regularized_energy(grid, params, gas));
    for &target in &settings.sample_times()[1..] {
        while t < target {
            let step = step_ns_entropy(grid, &field, params, gas, settings.cfl, t, target - t)?;
            field = step.field;
            dissipated += step.dissipation;
            step_balance.push(field.regularized_energy(grid, params, gas) + dissipated);
            t = if target - (t + step.dt) <= 1e-12 * target { target } else { t + step.dt };
        }
        record(target, &field, dissipated, &mut traj)?;
    }
    traj.aux = Some(aux);
    traj.balance_energy = Some(balance);
    Ok(NsRun { trajectory: traj, ledger, step_balance })
}
