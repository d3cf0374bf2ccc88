//! Relative energy between candidate states and a smooth reference, and the
//! weak-strong convergence monitor built on it.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::FieldTrajectory;
use crate::error::{Error, Result};
use crate::thermo::{renorm_total_entropy, ChiSpec, ConservativeState, Ext, GasParams, PrimitiveState};
use crate::verifier::loglog_slope;
use crate::young_measure::{DefectLedger, EmpiricalYoungMeasure};

fn require_positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} = {v} must be positive")))
    }
}

/// `H(rho, theta) = c_v rho theta - theta_ref rho (c_v log theta - log rho)`.
pub fn ballistic_free_energy(rho: f64, theta: f64, theta_ref: f64, gas: &GasParams) -> Result<f64> {
    require_positive("rho", rho)?;
    require_positive("theta", theta)?;
    require_positive("theta_ref", theta_ref)?;
    let cv = gas.c_v();
    Ok(cv * rho * theta - theta_ref * rho * (cv * theta.ln() - rho.ln()))
}

/// `d H / d rho` at `(rho, theta)` with reference temperature `theta_ref`.
fn ballistic_free_energy_drho(rho: f64, theta: f64, theta_ref: f64, gas: &GasParams) -> f64 {
    let cv = gas.c_v();
    cv * theta - theta_ref * (cv * theta.ln() - rho.ln()) + theta_ref
}

/// `1/2 rho |u - u_ref|^2 + H(rho, theta) - dH/drho(ref) (rho - rho_ref) - H(ref)`, all at temperature `theta_ref`.
pub fn relative_energy_primitive(state: &PrimitiveState, reference: &PrimitiveState, gas: &GasParams) -> Result<f64> {
    require_positive("reference rho", reference.rho)?;
    require_positive("reference theta", reference.theta)?;
    let tr = reference.theta;
    let h = ballistic_free_energy(state.rho, state.theta, tr, gas)?;
    let h_ref = ballistic_free_energy(reference.rho, tr, tr, gas)?;
    let dh = ballistic_free_energy_drho(reference.rho, tr, tr, gas);
    let du2: f64 = (0..3).map(|i| (state.u[i] - reference.u[i]).powi(2)).sum();
    Ok(0.5 * state.rho * du2 + h - dh * (state.rho - reference.rho) - h_ref)
}

/// Un-normalized total entropy `S = rho s(rho, theta)` on the phase space, extended by
/// `0` at vacuum and `-inf` where the internal energy is not positive.
pub fn total_entropy(cons: &ConservativeState, gas: &GasParams) -> Ext {
    if cons.rho > 0.0 {
        let internal = cons.energy - 0.5 * cons.momentum_norm_sq() / cons.rho;
        if internal > 0.0 {
            let cv = gas.c_v();
            let theta = internal / (cv * cons.rho);
            return Ext::Finite(cons.rho * (cv * theta.ln() - cons.rho.ln()));
        }
        return Ext::NegInf;
    }
    if cons.rho == 0.0 && cons.m.iter().all(|&c| c == 0.0) && cons.energy >= 0.0 {
        Ext::ZERO
    } else {
        Ext::NegInf
    }
}

/// Partial derivatives of the total entropy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyGradient {
    pub d_rho: f64,
    pub d_m: [f64; 3],
    pub d_energy: f64,
}

/// `(d_rho S, grad_m S, d_E S)` at an interior state:
/// `d_E S = 1/theta`, `grad_m S = -u/theta`, `d_rho S = s + |u|^2/(2 theta) - c_v - 1`.
pub fn total_entropy_gradient(cons: &ConservativeState, gas: &GasParams) -> Result<EntropyGradient> {
    require_positive("rho", cons.rho)?;
    let cv = gas.c_v();
    let internal = cons.energy - 0.5 * cons.momentum_norm_sq() / cons.rho;
    if !(internal > 0.0) {
        return Err(Error::Domain(format!("internal energy {internal} must be positive")));
    }
    let theta = internal / (cv * cons.rho);
    let u = cons.velocity();
    let s = cv * theta.ln() - cons.rho.ln();
    let u2: f64 = u.iter().map(|v| v * v).sum();
    Ok(EntropyGradient {
        d_rho: s + 0.5 * u2 / theta - cv - 1.0,
        d_m: [-u[0] / theta, -u[1] / theta, -u[2] / theta],
        d_energy: 1.0 / theta,
    })
}

/// Bregman form `-theta_ref [S - S_ref - grad S_ref . (U - U_ref)]`; `+inf` where `S = -inf`.
pub fn relative_energy_conservative(
    cons: &ConservativeState,
    reference: &ConservativeState,
    theta_ref: f64,
    gas: &GasParams,
) -> Result<Ext> {
    require_positive("theta_ref", theta_ref)?;
    let g = total_entropy_gradient(reference, gas)?;
    let s_ref = total_entropy(reference, gas).finite().expect("interior reference has finite entropy");
    let linear = g.d_rho * (cons.rho - reference.rho)
        + (0..3).map(|i| g.d_m[i] * (cons.m[i] - reference.m[i])).sum::<f64>()
        + g.d_energy * (cons.energy - reference.energy);
    Ok(match total_entropy(cons, gas) {
        Ext::Finite(s) => Ext::Finite(-theta_ref * (s - s_ref - linear)),
        _ => Ext::PosInf,
    })
}

/// Values of a smooth reference solution at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrongPoint {
    pub rho: f64,
    pub u: [f64; 3],
    pub theta: f64,
}

impl StrongPoint {
    pub fn conservative(&self, gas: &GasParams) -> ConservativeState {
        let m = [self.rho * self.u[0], self.rho * self.u[1], self.rho * self.u[2]];
        let u2: f64 = self.u.iter().map(|v| v * v).sum();
        ConservativeState::new(self.rho, m, 0.5 * self.rho * u2 + gas.c_v() * self.rho * self.theta)
    }

    pub fn primitive(&self, gas: &GasParams) -> Result<PrimitiveState> {
        PrimitiveState::new(self.rho, self.u, self.theta, gas)
    }
}

/// First derivatives `[d_t, d_x, d_y]` of the reference fields.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrongDerivatives {
    pub rho: [f64; 3],
    /// `u[i][j]`: derivative `j` of velocity component `i`.
    pub u: [[f64; 3]; 3],
    pub theta: [f64; 3],
}

/// Positive `C^1` reference solution `(rho, u, theta)`.
pub trait StrongSolution: Sync {
    fn point(&self, t: f64, x: [f64; 2]) -> StrongPoint;

    /// Centered differences with step `1e-6` unless overridden.
    fn derivatives(&self, t: f64, x: [f64; 2]) -> StrongDerivatives {
        let h = 1e-6;
        let shifted = |j: usize, d: f64| match j {
            0 => self.point(t + d, x),
            1 => self.point(t, [x[0] + d, x[1]]),
            _ => self.point(t, [x[0], x[1] + d]),
        };
        let mut out = StrongDerivatives { rho: [0.0; 3], u: [[0.0; 3]; 3], theta: [0.0; 3] };
        for j in 0..3 {
            let (p, m) = (shifted(j, h), shifted(j, -h));
            out.rho[j] = (p.rho - m.rho) / (2.0 * h);
            out.theta[j] = (p.theta - m.theta) / (2.0 * h);
            for i in 0..3 {
                out.u[i][j] = (p.u[i] - m.u[i]) / (2.0 * h);
            }
        }
        out
    }
}

/// Contact discontinuity smoothed into a sine profile:
/// `rho = mean + amplitude sin(2 pi k (x - U t) / L)`, `u = U`, `p` constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TravelingContact {
    pub mean: f64,
    pub amplitude: f64,
    pub wavenumber: f64,
    pub velocity: f64,
    pub pressure: f64,
    pub length: f64,
}

impl Default for TravelingContact {
    fn default() -> Self {
        TravelingContact { mean: 1.0, amplitude: 0.2, wavenumber: 1.0, velocity: 1.0, pressure: 1.0, length: 1.0 }
    }
}

impl TravelingContact {
    pub fn validate(&self) -> Result<()> {
        require_positive("pressure", self.pressure)?;
        require_positive("length", self.length)?;
        if !(self.amplitude.abs() < self.mean) {
            return Err(Error::Domain(format!("|amplitude| = {} must be below mean = {}", self.amplitude.abs(), self.mean)));
        }
        Ok(())
    }

    fn phase(&self, t: f64, x: f64) -> f64 {
        2.0 * PI * self.wavenumber * (x - self.velocity * t) / self.length
    }
}

impl StrongSolution for TravelingContact {
    fn point(&self, t: f64, x: [f64; 2]) -> StrongPoint {
        let rho = self.mean + self.amplitude * self.phase(t, x[0]).sin();
        StrongPoint { rho, u: [self.velocity, 0.0, 0.0], theta: self.pressure / rho }
    }

    fn derivatives(&self, t: f64, x: [f64; 2]) -> StrongDerivatives {
        let p = self.point(t, x);
        let k = 2.0 * PI * self.wavenumber / self.length;
        let drho_dx = self.amplitude * k * self.phase(t, x[0]).cos();
        let rho = [-self.velocity * drho_dx, drho_dx, 0.0];
        let dtheta = |d: f64| -self.pressure / (p.rho * p.rho) * d;
        StrongDerivatives { rho, u: [[0.0; 3]; 3], theta: [dtheta(rho[0]), dtheta(rho[1]), 0.0] }
    }
}

/// `integral <U_t; E(. | strong(t))>` at every sample time of the measure.
pub fn relative_energy_series(u: &EmpiricalYoungMeasure, strong: &dyn StrongSolution, gas: &GasParams) -> Result<Vec<f64>> {
    (0..u.times.len())
        .into_par_iter()
        .map(|k| {
            let t = u.times[k];
            let mut acc = Ext::ZERO;
            for c in 0..u.coarse.num_cells() {
                let p = strong.point(t, u.coarse.cell_center(c));
                let r = p.conservative(gas);
                let cell = u.cell(k, c);
                for (a, &w) in cell.atoms.iter().zip(&cell.weights) {
                    let e = relative_energy_conservative(a, &r, p.theta, gas)?;
                    acc = acc.checked_add(e.scale(w * u.coarse.cell_volume())).unwrap_or(Ext::PosInf);
                }
            }
            Ok(match acc {
                Ext::Finite(v) => v,
                _ => f64::INFINITY,
            })
        })
        .collect()
}

/// Relative energy and L1 distances of one run against the reference solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakStrongSeries {
    pub epsilon: f64,
    pub times: Vec<f64>,
    pub relative_energy: Vec<f64>,
    pub l1_rho: Vec<f64>,
    pub l1_m: Vec<f64>,
    pub l1_energy: Vec<f64>,
}

impl WeakStrongSeries {
    pub fn max_relative_energy(&self) -> f64 {
        self.relative_energy.iter().copied().fold(0.0, f64::max)
    }

    /// Max-over-time `[rho, m, E]` distances.
    pub fn max_l1(&self) -> [f64; 3] {
        let mx = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
        [mx(&self.l1_rho), mx(&self.l1_m), mx(&self.l1_energy)]
    }
}

pub fn weak_strong_monitor(traj: &FieldTrajectory, strong: &dyn StrongSolution, gas: &GasParams) -> Result<WeakStrongSeries> {
    let u = EmpiricalYoungMeasure::from_trajectory(traj);
    let relative_energy = relative_energy_series(&u, strong, gas)?;
    let grid = &traj.grid;
    let dists: Vec<[f64; 3]> = traj
        .times
        .par_iter()
        .zip(&traj.states)
        .map(|(&t, states)| {
            let mut d = [0.0; 3];
            for (c, s) in states.iter().enumerate() {
                let r = strong.point(t, grid.cell_center(c)).conservative(gas);
                d[0] += (s.rho - r.rho).abs();
                d[1] += (0..3).map(|i| (s.m[i] - r.m[i]).powi(2)).sum::<f64>().sqrt();
                d[2] += (s.energy - r.energy).abs();
            }
            d.map(|v| v * grid.cell_volume())
        })
        .collect();
    Ok(WeakStrongSeries {
        epsilon: traj.epsilon,
        times: traj.times.clone(),
        relative_energy,
        l1_rho: dists.iter().map(|d| d[0]).collect(),
        l1_m: dists.iter().map(|d| d[1]).collect(),
        l1_energy: dists.iter().map(|d| d[2]).collect(),
    })
}

/// Smallest `C >= 0` with `E(t) <= E(0) exp(C t) + model_error` on the samples;
/// `None` when no finite `C` works (`E(0) = 0` and `E(t) > model_error`).
pub fn gronwall_constant(times: &[f64], energy: &[f64], model_error: f64) -> Option<f64> {
    let e0 = *energy.first()?;
    let mut c: f64 = 0.0;
    for (&t, &e) in times.iter().zip(energy).skip(1) {
        let excess = e - model_error;
        if excess <= e0 || t <= 0.0 {
            continue;
        }
        if e0 <= 0.0 {
            return None;
        }
        c = c.max((excess / e0).ln() / t);
    }
    Some(c)
}

/// Sweep summary of weak-strong series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakStrongStudy {
    pub epsilons: Vec<f64>,
    pub max_relative_energy: Vec<f64>,
    pub max_l1: Vec<[f64; 3]>,
    /// Log-log slope of the max relative energy against epsilon.
    pub decay_order: Option<f64>,
    pub l1_decay_orders: [Option<f64>; 3],
    pub gronwall: Vec<Option<f64>>,
    pub model_error: f64,
}

impl WeakStrongStudy {
    pub fn from_series(series: &[WeakStrongSeries], model_error: f64) -> Self {
        let epsilons: Vec<f64> = series.iter().map(|s| s.epsilon).collect();
        let max_relative_energy: Vec<f64> = series.iter().map(|s| s.max_relative_energy()).collect();
        let max_l1: Vec<[f64; 3]> = series.iter().map(|s| s.max_l1()).collect();
        let l1 = |j: usize| loglog_slope(&epsilons, &max_l1.iter().map(|d| d[j]).collect::<Vec<_>>()).ok();
        WeakStrongStudy {
            decay_order: loglog_slope(&epsilons, &max_relative_energy).ok(),
            l1_decay_orders: [l1(0), l1(1), l1(2)],
            gronwall: series.iter().map(|s| gronwall_constant(&s.times, &s.relative_energy, model_error)).collect(),
            epsilons,
            max_relative_energy,
            max_l1,
            model_error,
        }
    }
}

pub const WS3_GROUP_LABELS: [&str; 6] = ["entropy", "momentum", "pressure", "thermal", "density_temperature", "defect"];

/// Left side and the six right-side groups of the relative energy inequality,
/// accumulated from `0` to each sample time. Diagnostic only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ws3Ledger {
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    /// `groups[g][k]`; the defect group is an upper bound `integral |grad u| |mu_C proxy|`.
    pub groups: Vec<Vec<f64>>,
    /// Sum of the groups minus the left side.
    pub slack: Vec<f64>,
    pub chi_cap: f64,
}

/// Cap of the identity-like truncation used by the ledger: one unit above the largest
/// reference entropy on the samples.
pub fn ws3_chi(u: &EmpiricalYoungMeasure, strong: &dyn StrongSolution, gas: &GasParams) -> Result<ChiSpec> {
    let cv = gas.c_v();
    let mut smax = f64::NEG_INFINITY;
    for &t in &u.times {
        for x in u.coarse.centers() {
            let p = strong.point(t, x);
            smax = smax.max(cv * p.theta.ln() - p.rho.ln());
        }
    }
    ChiSpec::identity_truncation(smax.ceil() + 1.0)
}

pub fn ws3_ledger(
    u: &EmpiricalYoungMeasure,
    strong: &dyn StrongSolution,
    gas: &GasParams,
    defects: Option<&DefectLedger>,
) -> Result<Ws3Ledger> {
    let chi = ws3_chi(u, strong, gas)?;
    let (cv, gamma, vol) = (gas.c_v(), gas.gamma(), u.coarse.cell_volume());
    let nt = u.times.len();
    let rel = relative_energy_series(u, strong, gas)?;
    let rates: Vec<[f64; 6]> = (0..nt)
        .into_par_iter()
        .map(|k| {
            let t = u.times[k];
            let mut g = [0.0; 6];
            for c in 0..u.coarse.num_cells() {
                let x = u.coarse.cell_center(c);
                let p = strong.point(t, x);
                let d = strong.derivatives(t, x);
                let cell = u.cell(k, c);
                let log_term = cv * p.theta.ln() - p.rho.ln();
                let div_u = d.u[0][1] + d.u[1][2];
                let grad_u_norm = (0..3).flat_map(|i| (1..3).map(move |j| (i, j))).map(|(i, j)| d.u[i][j].powi(2)).sum::<f64>().sqrt();
                // d_t (rho theta) and grad (rho theta) of the reference.
                let prt = [0, 1, 2].map(|j| d.rho[j] * p.theta + p.rho * d.theta[j]);
                for (a, &w) in cell.atoms.iter().zip(&cell.weights) {
                    let v = a.velocity();
                    let s_chi = renorm_total_entropy(a, &chi, gas).finite().unwrap_or(0.0);
                    g[0] -= w * s_chi * (d.theta[0] + v[0] * d.theta[1] + v[1] * d.theta[2]);
                    let diff = [0, 1, 2].map(|i| a.rho * p.u[i] - a.m[i]);
                    for i in 0..3 {
                        g[1] += w * diff[i] * d.u[i][0];
                        for j in 0..2 {
                            g[1] += w * diff[i] * v[j] * d.u[i][j + 1];
                        }
                    }
                    let internal = a.internal_energy().unwrap_or(0.0);
                    g[2] -= w * (gamma - 1.0) * internal * div_u;
                    g[3] += w * log_term * (a.rho * d.theta[0] + a.m[0] * d.theta[1] + a.m[1] * d.theta[2]);
                    g[4] += w * ((p.rho - a.rho) * prt[0] - a.m[0] * prt[1] - a.m[1] * prt[2]) / p.rho;
                }
                if let Some(dl) = defects {
                    g[5] += grad_u_norm * dl.concentration[k][c].magnitude();
                }
            }
            g.map(|v| v * vol)
        })
        .collect();
    let mut groups = vec![vec![0.0; nt]; 6];
    for k in 1..nt {
        let h = u.times[k] - u.times[k - 1];
        for (j, g) in groups.iter_mut().enumerate() {
            g[k] = g[k - 1] + 0.5 * h * (rates[k - 1][j] + rates[k][j]);
        }
    }
    let e0 = u.total_energy(0);
    let lhs: Vec<f64> = (0..nt).map(|k| rel[k] - rel[0] + e0 - u.total_energy(k)).collect();
    let slack = (0..nt).map(|k| groups.iter().map(|g| g[k]).sum::<f64>() - lhs[k]).collect();
    Ok(Ws3Ledger { times: u.times.clone(), lhs, groups, slack, chi_cap: chi.cap() })
}
