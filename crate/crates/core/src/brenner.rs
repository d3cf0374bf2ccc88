//! Brenner's two-velocity model in vanishing-dissipation scaling, one-dimensional.
//!
//! With `kappa = k rho` and `mu = mu_c rho` the mass velocity is
//! `u_m = u - eps' d_x log rho` with the constant `eps' = eps k / c_v`, and the
//! dissipative right-hand side of `(rho, m, E)` splits exactly into
//!
//! * `eps' d_xx (rho, m, E)` (the heat flux is absorbed here because `eps' c_v = eps k`), and
//! * `(0, d_x(nu u_x), d_x(nu u u_x))` with `nu = (4/3) eps mu - eps' rho`.
//!
//! Both parts are written in flux form, so mass and total energy telescope. For
//! `nu >= 0` one explicit step is a convex combination of a neighbour average
//! (which cannot lower `sum rho chi(s)` for concave `S_chi`) and a pure viscous
//! heating that raises the internal energy cell by cell.

use serde::{Deserialize, Serialize};

use crate::discretization::{BoundaryCondition, FieldTrajectory, Grid, ModelTag};
use crate::error::{Error, Result};
use crate::euler::{ssp_rk2_euler, euler_dt, RunSettings, MAX_RETRIES};
use crate::thermo::{entropy_from_conservative, renorm_total_entropy, ChiSpec, ConservativeState, Ext, GasParams};

/// Shear viscosity law, each scaled by `mu_coeff`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MuModel {
    /// `mu = mu_c rho`.
    #[default]
    Rho,
    /// `mu = mu_c / theta`.
    InverseTheta,
    /// `mu = mu_c (rho + 1/theta)`.
    RhoPlusInverseTheta,
}

pub const DEFAULT_SMOOTHNESS_BOUND: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrennerParams {
    pub epsilon: f64,
    pub kappa_coeff: f64,
    pub mu_coeff: f64,
    pub eta: f64,
    /// Lower bound of the initial specific entropy.
    pub s0: f64,
    pub mu_model: MuModel,
    /// Largest admissible relative second difference of `rho` and `theta` in the initial data.
    pub smoothness_bound: f64,
}

impl BrennerParams {
    pub fn new(epsilon: f64, s0: f64) -> Self {
        BrennerParams {
            epsilon,
            kappa_coeff: 1.0,
            mu_coeff: 1.0,
            eta: 0.0,
            s0,
            mu_model: MuModel::Rho,
            smoothness_bound: DEFAULT_SMOOTHNESS_BOUND,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.eta != 0.0 {
            return Err(Error::Domain(format!("bulk viscosity must vanish, got eta = {}", self.eta)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Domain(format!("epsilon must be nonnegative, got {}", self.epsilon)));
        }
        if !(self.kappa_coeff > 0.0 && self.mu_coeff > 0.0) {
            return Err(Error::Domain("kappa_coeff and mu_coeff must be positive".into()));
        }
        if !self.s0.is_finite() {
            return Err(Error::Domain(format!("s0 must be finite, got {}", self.s0)));
        }
        Ok(())
    }

    /// Mass-diffusion coefficient `eps k / c_v`.
    pub fn mass_diffusion(&self, gas: &GasParams) -> f64 {
        self.epsilon * self.kappa_coeff / gas.c_v()
    }

    pub fn mu(&self, rho: f64, theta: f64) -> f64 {
        self.mu_coeff
            * match self.mu_model {
                MuModel::Rho => rho,
                MuModel::InverseTheta => 1.0 / theta,
                MuModel::RhoPlusInverseTheta => rho + 1.0 / theta,
            }
    }

    pub fn kappa(&self, rho: f64) -> f64 {
        self.kappa_coeff * rho
    }
}

fn require_1d(grid: &Grid) -> Result<()> {
    if grid.dim() != 1 {
        return Err(Error::UnsupportedDimension(grid.dim()));
    }
    Ok(())
}

/// Centred difference `(v_{i+1} - v_{i-1}) / (2 dx)`; at walls the ghost is `sign * v`.
fn centered_gradient(v: &[f64], dx: f64, bc: BoundaryCondition, sign: f64) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let l = if i > 0 {
                v[i - 1]
            } else if bc == BoundaryCondition::Periodic {
                v[n - 1]
            } else {
                sign * v[0]
            };
            let r = if i + 1 < n {
                v[i + 1]
            } else if bc == BoundaryCondition::Periodic {
                v[0]
            } else {
                sign * v[n - 1]
            };
            (r - l) / (2.0 * dx)
        })
        .collect()
}

/// `u_m = u - (eps k / c_v) d_x log rho` with centred differences.
pub fn mass_velocity(u: &[f64], rho: &[f64], params: &BrennerParams, gas: &GasParams, grid: &Grid) -> Result<Vec<f64>> {
    require_1d(grid)?;
    if let Some(cell) = rho.iter().position(|r| !(*r > 0.0)) {
        return Err(Error::SingularGradient { cell });
    }
    if params.epsilon == 0.0 {
        return Ok(u.to_vec());
    }
    let log_rho: Vec<f64> = rho.iter().map(|r| r.ln()).collect();
    let g = centered_gradient(&log_rho, grid.dx(), grid.bc(), 1.0);
    let k = params.mass_diffusion(gas);
    Ok(u.iter().zip(g).map(|(ui, gi)| ui - k * gi).collect())
}

/// Primitive fields needed by the dissipative terms.
struct Fields {
    rho: Vec<f64>,
    u: Vec<f64>,
    theta: Vec<f64>,
}

fn fields(cells: &[ConservativeState], gas: &GasParams, t: f64) -> Result<Fields> {
    let mut f = Fields { rho: Vec::with_capacity(cells.len()), u: Vec::new(), theta: Vec::new() };
    for (i, c) in cells.iter().enumerate() {
        let e = c.energy - 0.5 * c.m[0] * c.m[0] / c.rho;
        if !(c.rho > 0.0 && e > 0.0) {
            return Err(Error::BlowUp { time: t, detail: format!("cell {i} lost positivity (rho = {}, e = {e})", c.rho) });
        }
        f.rho.push(c.rho);
        f.u.push(c.m[0] / c.rho);
        f.theta.push(e / (gas.c_v() * c.rho));
    }
    Ok(f)
}

/// Face viscosities `nu_f = (4/3) eps mu_f - eps' rho_f`; `nu[i]` sits between cells `i - 1` and `i`
/// (index `n` is the right wall on walled grids).
fn face_viscosity(f: &Fields, params: &BrennerParams, gas: &GasParams, bc: BoundaryCondition) -> Vec<f64> {
    let n = f.rho.len();
    let lin = params.mass_diffusion(gas);
    let cell_nu = |i: usize| 4.0 / 3.0 * params.epsilon * params.mu(f.rho[i], f.theta[i]) - lin * f.rho[i];
    let mut nu = Vec::with_capacity(n + 1);
    match bc {
        BoundaryCondition::Periodic => nu.push(0.5 * (cell_nu(n - 1) + cell_nu(0))),
        BoundaryCondition::SlipWall => nu.push(cell_nu(0)),
    }
    for i in 1..n {
        nu.push(0.5 * (cell_nu(i - 1) + cell_nu(i)));
    }
    match bc {
        BoundaryCondition::Periodic => nu.push(nu[0]),
        BoundaryCondition::SlipWall => nu.push(cell_nu(n - 1)),
    }
    nu
}

/// Explicit step of the dissipative part.
fn dissipative_step(grid: &Grid, cells: &[ConservativeState], params: &BrennerParams, gas: &GasParams, dt: f64, t: f64) -> Result<Vec<ConservativeState>> {
    let n = cells.len();
    let dx = grid.dx();
    let bc = grid.bc();
    let f = fields(cells, gas, t)?;
    let nu = face_viscosity(&f, params, gas, bc);
    let lin = params.mass_diffusion(gas);
    let ghost = |i: usize| {
        let mut g = cells[i];
        g.m[0] = -g.m[0];
        g
    };
    // Dissipative flux (entering from the left) through face f: index f between cells f-1 and f.
    let flux = |l: ConservativeState, r: ConservativeState, ul: f64, ur: f64, nu_f: f64| {
        let grad = (r - l) * (lin / dx);
        let sigma = nu_f * (ur - ul) / dx;
        let mut out = grad;
        out.m[0] += sigma;
        out.energy += sigma * 0.5 * (ul + ur);
        out
    };
    let mut faces = Vec::with_capacity(n + 1);
    faces.push(match bc {
        BoundaryCondition::Periodic => flux(cells[n - 1], cells[0], f.u[n - 1], f.u[0], nu[0]),
        BoundaryCondition::SlipWall => flux(ghost(0), cells[0], -f.u[0], f.u[0], nu[0]),
    });
    for i in 1..n {
        faces.push(flux(cells[i - 1], cells[i], f.u[i - 1], f.u[i], nu[i]));
    }
    faces.push(match bc {
        BoundaryCondition::Periodic => faces[0],
        BoundaryCondition::SlipWall => flux(cells[n - 1], ghost(n - 1), f.u[n - 1], -f.u[n - 1], nu[n]),
    });
    Ok((0..n).map(|i| cells[i] + (faces[i + 1] - faces[i]) * (dt / dx)).collect())
}

/// Stable dissipative step size: each of the two parts kept at a quarter of its explicit limit.
fn dissipative_dt(grid: &Grid, cells: &[ConservativeState], params: &BrennerParams, gas: &GasParams, t: f64) -> Result<f64> {
    let dx2 = grid.dx() * grid.dx();
    let lin = params.mass_diffusion(gas);
    let mut dt = if lin > 0.0 { dx2 / (8.0 * lin) } else { f64::INFINITY };
    let f = fields(cells, gas, t)?;
    let nu = face_viscosity(&f, params, gas, grid.bc());
    let nu_max = nu.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let rho_min = f.rho.iter().copied().fold(f64::INFINITY, f64::min);
    if nu_max > 0.0 {
        dt = dt.min(rho_min * dx2 / (8.0 * nu_max));
    }
    Ok(dt)
}

/// Accumulated dissipation magnitudes of one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DissipationMagnitudes {
    /// `integral integral eps kappa |d_x log rho|`.
    pub mass_flux: f64,
    /// `integral integral eps kappa |u d_x log rho|`.
    pub momentum_correction: f64,
    /// `integral integral eps |S(u_x)|`.
    pub viscous_stress: f64,
    /// `integral integral eps kappa |d_x log theta|`.
    pub heat_flux: f64,
}

impl DissipationMagnitudes {
    pub fn as_array(&self) -> [f64; 4] {
        [self.mass_flux, self.momentum_correction, self.viscous_stress, self.heat_flux]
    }

    pub const LABELS: [&'static str; 4] = ["mass_flux", "momentum_correction", "viscous_stress", "heat_flux"];
}

/// Per-cell production terms of the renormalized entropy balance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductionTerms {
    /// `[viscous, heat, mass, curvature]` per cell.
    pub per_cell: Vec<[f64; 4]>,
    pub integrals: [f64; 4],
}

pub const PRODUCTION_TOL: f64 = 1e-12;

/// The four production terms `eps chi'/theta S:u_x`, `eps kappa chi' |d log theta|^2`,
/// `eps chi' kappa/c_v |d log rho|^2` and `-eps chi'' kappa/c_v |d s|^2`.
pub fn entropy_production_terms(
    grid: &Grid,
    cells: &[ConservativeState],
    params: &BrennerParams,
    gas: &GasParams,
    chi: &ChiSpec,
) -> Result<ProductionTerms> {
    require_1d(grid)?;
    let f = fields(cells, gas, f64::NAN)?;
    let (dx, bc) = (grid.dx(), grid.bc());
    let log_rho: Vec<f64> = f.rho.iter().map(|r| r.ln()).collect();
    let log_theta: Vec<f64> = f.theta.iter().map(|t| t.ln()).collect();
    let s: Vec<f64> = log_theta.iter().zip(&log_rho).map(|(lt, lr)| gas.c_v() * lt - lr).collect();
    let ux = centered_gradient(&f.u, dx, bc, -1.0);
    let gr = centered_gradient(&log_rho, dx, bc, 1.0);
    let gt = centered_gradient(&log_theta, dx, bc, 1.0);
    let gs = centered_gradient(&s, dx, bc, 1.0);
    let eps = params.epsilon;
    let mut per_cell = Vec::with_capacity(cells.len());
    let mut integrals = [0.0; 4];
    for i in 0..cells.len() {
        let (d1, d2) = (chi.deriv(s[i]), chi.second_deriv(s[i]));
        let kappa = params.kappa(f.rho[i]);
        let mu = params.mu(f.rho[i], f.theta[i]);
        let terms = [
            eps * d1 / f.theta[i] * (4.0 / 3.0) * mu * ux[i] * ux[i],
            eps * kappa * d1 * gt[i] * gt[i],
            eps * d1 * kappa / gas.c_v() * gr[i] * gr[i],
            -eps * d2 * kappa / gas.c_v() * gs[i] * gs[i],
        ];
        for (k, &v) in terms.iter().enumerate() {
            if v < -PRODUCTION_TOL {
                return Err(Error::InvariantViolation(format!("production term {k} = {v} < 0 at cell {i} for {chi}")));
            }
            integrals[k] += v * dx;
        }
        per_cell.push(terms);
    }
    Ok(ProductionTerms { per_cell, integrals })
}

/// Adds `dt` times the instantaneous magnitudes and budget integrand to the accumulators.
fn accumulate(grid: &Grid, cells: &[ConservativeState], params: &BrennerParams, gas: &GasParams, dt: f64, mags: &mut DissipationMagnitudes, budget: &mut f64) -> Result<()> {
    let f = fields(cells, gas, f64::NAN)?;
    let (dx, bc) = (grid.dx(), grid.bc());
    let log_rho: Vec<f64> = f.rho.iter().map(|r| r.ln()).collect();
    let log_theta: Vec<f64> = f.theta.iter().map(|t| t.ln()).collect();
    let ux = centered_gradient(&f.u, dx, bc, -1.0);
    let gr = centered_gradient(&log_rho, dx, bc, 1.0);
    let gt = centered_gradient(&log_theta, dx, bc, 1.0);
    let eps = params.epsilon;
    let w = dt * dx;
    for i in 0..cells.len() {
        let kappa = params.kappa(f.rho[i]);
        let stress = 4.0 / 3.0 * params.mu(f.rho[i], f.theta[i]) * ux[i];
        mags.mass_flux += w * eps * kappa * gr[i].abs();
        mags.momentum_correction += w * eps * kappa * (f.u[i] * gr[i]).abs();
        mags.viscous_stress += w * eps * stress.abs();
        mags.heat_flux += w * eps * kappa * gt[i].abs();
        *budget += w * eps * (stress * ux[i] / f.theta[i] + kappa * gt[i] * gt[i] + kappa / gas.c_v() * gr[i] * gr[i]);
    }
    Ok(())
}

/// Rejects vacuum, entropy below `s0`, and jumps (relative second differences above the bound).
pub fn check_initial_data(cells: &[ConservativeState], params: &BrennerParams, gas: &GasParams, bc: BoundaryCondition) -> Result<()> {
    let f = fields(cells, gas, 0.0).map_err(|_| Error::Domain("initial data must have rho > 0 and theta > 0".into()))?;
    for (i, c) in cells.iter().enumerate() {
        if let Ext::Finite(s) = entropy_from_conservative(c, gas) {
            if s < params.s0 - 1e-12 * (1.0 + params.s0.abs()) {
                return Err(Error::Domain(format!("initial entropy {s} at cell {i} is below s0 = {}", params.s0)));
            }
        }
    }
    let n = cells.len();
    for (name, v) in [("rho", &f.rho), ("theta", &f.theta)] {
        let scale = v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let end = if bc == BoundaryCondition::Periodic { n } else { n - 1 };
        let start = if bc == BoundaryCondition::Periodic { 0 } else { 1 };
        for i in start..end {
            let d2 = v[(i + 1) % n] - 2.0 * v[i] + v[(i + n - 1) % n];
            if d2.abs() > params.smoothness_bound * scale {
                return Err(Error::Domain(format!(
                    "initial {name} is not smooth at cell {i} (relative second difference {:.3e} exceeds {})",
                    d2.abs() / scale,
                    params.smoothness_bound
                )));
            }
        }
    }
    Ok(())
}

/// Outcome of one step.
pub struct BrennerStep {
    pub cells: Vec<ConservativeState>,
    pub dt: f64,
}

/// One Lie-split step: SSP-RK2 Rusanov transport, then one explicit dissipative update.
pub fn step_brenner(
    grid: &Grid,
    cells: &[ConservativeState],
    params: &BrennerParams,
    gas: &GasParams,
    cfl: f64,
    t: f64,
    dt_cap: f64,
) -> Result<BrennerStep> {
    require_1d(grid)?;
    let mut dt = euler_dt(grid, cells, gas, cfl)
        .map_err(|_| Error::BlowUp { time: t, detail: "non-finite wave speed".into() })?
        .min(dissipative_dt(grid, cells, params, gas, t)?)
        .min(dt_cap);
    if !(dt > 1e-14 * (1.0 + t)) {
        return Err(Error::BlowUp { time: t, detail: format!("time step underflow (dt = {dt:e})") });
    }
    for _ in 0..=MAX_RETRIES {
        if let Some(h) = ssp_rk2_euler(grid, cells, gas, dt)? {
            if let Ok(next) = dissipative_step(grid, &h, params, gas, dt, t) {
                if fields(&next, gas, t).is_ok() {
                    return Ok(BrennerStep { cells: next, dt });
                }
            }
        }
        dt *= 0.5;
    }
    Err(Error::BlowUp { time: t, detail: format!("positivity lost after {MAX_RETRIES} dt halvings") })
}

/// Whole-run ledgers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BrennerLedger {
    pub magnitudes: DissipationMagnitudes,
    /// Space-time integral of the production terms for `chi(s) = s`.
    pub production_budget: f64,
    /// `integral E` after every step (first entry: initial data).
    pub step_energy: Vec<f64>,
    /// `integral rho chi(s)` after every step, one series per monitored `chi`.
    pub step_entropy: Vec<Vec<f64>>,
}

pub struct BrennerRun {
    pub trajectory: FieldTrajectory,
    pub ledger: BrennerLedger,
}

fn total_entropy(grid: &Grid, cells: &[ConservativeState], chi: &ChiSpec, gas: &GasParams) -> f64 {
    grid.integrate(cells.iter().map(|c| match renorm_total_entropy(c, chi, gas) {
        Ext::Finite(v) => v,
        _ => f64::NEG_INFINITY,
    }))
}

pub fn run_brenner(
    grid: &Grid,
    initial: Vec<ConservativeState>,
    params: &BrennerParams,
    gas: &GasParams,
    settings: &RunSettings,
    monitor: &[ChiSpec],
) -> Result<BrennerRun> {
    require_1d(grid)?;
    settings.validate()?;
    params.validate()?;
    check_initial_data(&initial, params, gas, grid.bc())?;
    let mut traj = FieldTrajectory::new(grid.clone(), ModelTag::Brenner, params.epsilon);
    let mut ledger = BrennerLedger {
        magnitudes: DissipationMagnitudes::default(),
        production_budget: 0.0,
        step_energy: Vec::new(),
        step_entropy: vec![Vec::new(); monitor.len()],
    };
    let observe = |cells: &[ConservativeState], ledger: &mut BrennerLedger| {
        ledger.step_energy.push(grid.integrate(cells.iter().map(|c| c.energy)));
        for (series, chi) in ledger.step_entropy.iter_mut().zip(monitor) {
            series.push(total_entropy(grid, cells, chi, gas));
        }
    };
    let mut cells = initial;
    observe(&cells, &mut ledger);
    traj.push(0.0, cells.clone())?;
    let mut t = 0.0;
    for &target in &settings.sample_times()[1..] {
        while t < target {
            let step = step_brenner(grid, &cells, params, gas, settings.cfl, t, target - t)?;
            accumulate(grid, &cells, params, gas, step.dt, &mut ledger.magnitudes, &mut ledger.production_budget)?;
            cells = step.cells;
            observe(&cells, &mut ledger);
            t = if target - (t + step.dt) <= 1e-12 * target { target } else { t + step.dt };
        }
        traj.push(target, cells.clone())?;
    }
    Ok(BrennerRun { trajectory: traj, ledger })
}
