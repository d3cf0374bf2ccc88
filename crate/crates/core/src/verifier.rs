//! Weak-formulation checks of a Young measure against the measure-valued Euler system:
//! continuity and momentum residuals, the energy inequality, renormalized entropy
//! inequalities for a battery of `chi`, the defect bound, the entropy minimum
//! principle, and the dissipation scaling fit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::{TestBasis, TestFunction};
use crate::error::{Error, Result};
use crate::thermo::{entropy_from_conservative, renorm_total_entropy, ChiBattery, ChiSpec, Ext, GasParams, VACUUM_FLOOR};
use crate::young_measure::{DefectLedger, EmpiricalYoungMeasure};

/// Constant `C` of the `C (dx + dt)` threshold for continuity and momentum residuals.
///
/// Twice the largest `|R| / (dx + dt)` of the default basis on the Euler scheme
/// started from the travelling contact `rho = 1 + 0.2 sin(2 pi x)`, `u = 1`, `p = 1`
/// at `n = 100`, `t_end = 0.5`, `sample_dt = 0.0125`. The calibration is re-measured
/// by the verifier integration tests.
pub const CALIBRATED_WEAK_FORM_CONSTANT: f64 = 1.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub weak_form_constant: f64,
    /// Energy margins must exceed `-energy_rel * e0`.
    pub energy_rel: f64,
    /// Entropy margins must exceed `-entropy_factor * dx * sup|phi|`.
    pub entropy_factor: f64,
    /// Largest admissible defect-to-dissipation ratio.
    #[serde(with = "json_f64")]
    pub defect_ceiling: f64,
    /// Entropy floor; defaults to the minimum initial entropy of non-vacuum atoms.
    pub s0: Option<f64>,
    /// Minimum-principle tolerance; defaults to `10 dx`.
    pub min_principle: Option<f64>,
    pub vacuum_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            weak_form_constant: CALIBRATED_WEAK_FORM_CONSTANT,
            energy_rel: 1e-10,
            entropy_factor: 5.0,
            defect_ceiling: f64::INFINITY,
            s0: None,
            min_principle: None,
            vacuum_floor: VACUUM_FLOOR,
        }
    }
}

pub(crate) mod json_f64 {
    //! Finite numbers as JSON numbers, non-finite ones as the strings "inf", "-inf", "nan".
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    fn to_repr(v: f64) -> Repr {
        if v.is_finite() {
            Repr::Num(v)
        } else if v.is_nan() {
            Repr::Str("nan".into())
        } else if v > 0.0 {
            Repr::Str("inf".into())
        } else {
            Repr::Str("-inf".into())
        }
    }

    fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::custom(format!("invalid number {other:?}"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            v.iter().map(|x| to_repr(*x)).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            Vec::<Repr>::deserialize(d)?.into_iter().map(from_repr).collect()
        }
    }
}


/// Residuals or margins of one clause with the tolerance used for each entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClauseReport {
    pub labels: Vec<String>,
    #[serde(with = "json_f64::vec")]
    pub residuals: Vec<f64>,
    #[serde(with = "json_f64::vec")]
    pub tolerances: Vec<f64>,
    pub pass: bool,
}

impl ClauseReport {
    /// Pass iff `|r| <= tol` for every entry.
    fn absolute(labels: Vec<String>, residuals: Vec<f64>, tolerances: Vec<f64>) -> Self {
        let pass = residuals.iter().zip(&tolerances).all(|(r, t)| r.abs() <= *t);
        ClauseReport { labels, residuals, tolerances, pass }
    }

    /// Pass iff `r >= -tol` for every entry.
    fn one_sided(labels: Vec<String>, residuals: Vec<f64>, tolerances: Vec<f64>) -> Self {
        let pass = residuals.iter().zip(&tolerances).all(|(r, t)| *r >= -*t);
        ClauseReport { labels, residuals, tolerances, pass }
    }

    pub fn max_abs(&self) -> f64 {
        self.residuals.iter().map(|r| r.abs()).fold(0.0, f64::max)
    }

    /// Most negative entry (or 0).
    pub fn worst_margin(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::min)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectBoundReport {
    /// Space-time mass of the concentration-defect estimate.
    #[serde(with = "json_f64")]
    pub defect_mass: f64,
    /// `integral_0^T integral (<U_0; E> - <U_t; E>)`.
    #[serde(with = "json_f64")]
    pub energy_loss: f64,
    /// Empirical constant `defect_mass / energy_loss`.
    #[serde(with = "json_f64")]
    pub ratio: f64,
    #[serde(with = "json_f64")]
    pub ceiling: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinPrincipleReport {
    #[serde(with = "json_f64")]
    pub s0: f64,
    #[serde(with = "json_f64")]
    pub deficit: f64,
    #[serde(with = "json_f64")]
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub dx: f64,
    pub dt: f64,
    pub continuity: ClauseReport,
    pub momentum: ClauseReport,
    pub energy: ClauseReport,
    pub entropy: ClauseReport,
    pub defect_bound: DefectBoundReport,
    pub min_principle: MinPrincipleReport,
    pub pass: bool,
}

impl VerificationReport {
    /// `(clause, pass)` in report order.
    pub fn clause_flags(&self) -> [(&'static str, bool); 6] {
        [
            ("continuity", self.continuity.pass),
            ("momentum", self.momentum.pass),
            ("energy", self.energy.pass),
            ("entropy", self.entropy.pass),
            ("defect_bound", self.defect_bound.pass),
            ("min_principle", self.min_principle.pass),
        ]
    }
}

/// Trapezoid weights on the sample times.
fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0; n];
    for k in 1..n {
        let h = times[k] - times[k - 1];
        w[k - 1] += 0.5 * h;
        w[k] += 0.5 * h;
    }
    w
}

/// Per `(time, cell)` moments needed by the clauses.
struct Moments {
    rho: Vec<Vec<f64>>,
    m: Vec<Vec<[f64; 3]>>,
    convective: Vec<Vec<[f64; 9]>>,
    pressure: Vec<Vec<f64>>,
}

fn moments(u: &EmpiricalYoungMeasure, gas: &GasParams) -> Moments {
    let nt = u.times.len();
    let mut out = Moments { rho: Vec::new(), m: Vec::new(), convective: Vec::new(), pressure: Vec::new() };
    for k in 0..nt {
        let row = &u.cells[k];
        out.rho.push(row.iter().map(|c| c.expectation_finite(|s| s.rho)).collect());
        out.m.push(row.iter().map(|c| c.mean().m).collect());
        out.convective.push(
            row.iter()
                .map(|c| {
                    let mut t = [0.0; 9];
                    for (a, &w) in c.atoms.iter().zip(&c.weights) {
                        if a.rho > 0.0 {
                            for i in 0..3 {
                                for j in 0..3 {
                                    t[3 * i + j] += w * a.m[i] * a.m[j] / a.rho;
                                }
                            }
                        }
                    }
                    t
                })
                .collect(),
        );
        out.pressure.push(row.iter().map(|c| c.expectation_finite(|s| s.pressure(gas).unwrap_or(0.0))).collect());
    }
    out
}

fn sup_gradient(phi: &TestFunction, u: &EmpiricalYoungMeasure, k: usize, c: usize) -> f64 {
    let g = phi.gradient(u.times[k], u.coarse.cell_center(c), u.coarse.length());
    (g[0] * g[0] + g[1] * g[1]).sqrt()
}

const GAUSS_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GAUSS_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// Weights `W[k][c]` with `integral q(t) d_t phi(t, x_c) dt = sum_k q_k W[k][c]` for `q` linear
/// between samples, and the same for both gradient components.
struct PhiWeights {
    dt: Vec<Vec<f64>>,
    grad: Vec<Vec<[f64; 2]>>,
    initial: Vec<f64>,
}

fn phi_weights(phi: &TestFunction, u: &EmpiricalYoungMeasure) -> PhiWeights {
    let (nt, nc, len) = (u.times.len(), u.coarse.num_cells(), u.coarse.length());
    let mut w = PhiWeights {
        dt: vec![vec![0.0; nc]; nt],
        grad: vec![vec![[0.0; 2]; nc]; nt],
        initial: (0..nc).map(|c| phi.value(0.0, u.coarse.cell_center(c), len)).collect(),
    };
    for j in 0..nt - 1 {
        let (t0, t1) = (u.times[j], u.times[j + 1]);
        let h = t1 - t0;
        for (xi, gw) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
            let lam = 0.5 * (1.0 + xi);
            let t = t0 + lam * h;
            let (a, b) = (0.5 * h * gw * (1.0 - lam), 0.5 * h * gw * lam);
            for c in 0..nc {
                let x = u.coarse.cell_center(c);
                let d = phi.time_derivative(t, x, len);
                let g = phi.gradient(t, x, len);
                w.dt[j][c] += a * d;
                w.dt[j + 1][c] += b * d;
                for ax in 0..2 {
                    w.grad[j][c][ax] += a * g[ax];
                    w.grad[j + 1][c][ax] += b * g[ax];
                }
            }
        }
    }
    w
}

fn continuity_residual(pw: &PhiWeights, u: &EmpiricalYoungMeasure, mo: &Moments) -> f64 {
    let mut r = 0.0;
    for k in 0..u.times.len() {
        for c in 0..u.coarse.num_cells() {
            let g = pw.grad[k][c];
            r += mo.rho[k][c] * pw.dt[k][c] + mo.m[k][c][0] * g[0] + mo.m[k][c][1] * g[1];
        }
    }
    for c in 0..u.coarse.num_cells() {
        r += mo.rho[0][c] * pw.initial[c];
    }
    r * u.coarse.cell_volume()
}

fn momentum_residual(a: usize, pw: &PhiWeights, u: &EmpiricalYoungMeasure, mo: &Moments) -> f64 {
    let mut r = 0.0;
    for k in 0..u.times.len() {
        for c in 0..u.coarse.num_cells() {
            let g = pw.grad[k][c];
            let conv = &mo.convective[k][c];
            r += mo.m[k][c][a] * pw.dt[k][c] + conv[3 * a] * g[0] + conv[3 * a + 1] * g[1] + mo.pressure[k][c] * g[a];
        }
    }
    for c in 0..u.coarse.num_cells() {
        r += mo.m[0][c][a] * pw.initial[c];
    }
    r * u.coarse.cell_volume()
}

/// `integral integral |grad phi| d|mu_C proxy|`.
fn defect_allowance(phi: &TestFunction, u: &EmpiricalYoungMeasure, defects: Option<&DefectLedger>, w: &[f64]) -> f64 {
    let Some(d) = defects else { return 0.0 };
    let vol = u.coarse.cell_volume();
    let mut total = 0.0;
    for (k, &wk) in w.iter().enumerate() {
        for c in 0..u.coarse.num_cells() {
            total += wk * vol * sup_gradient(phi, u, k, c) * d.concentration[k][c].magnitude();
        }
    }
    total
}

fn ext_to_f64(e: Ext) -> f64 {
    match e {
        Ext::Finite(v) => v,
        Ext::PosInf => f64::INFINITY,
        Ext::NegInf => f64::NEG_INFINITY,
    }
}

/// `<S_chi>` and `<S_chi u>` per `(time, cell)`; `None` marks an undefined expectation.
type EntropyMoments = Vec<Vec<Option<(Ext, [Ext; 2])>>>;

fn entropy_moments(chi: &ChiSpec, u: &EmpiricalYoungMeasure, gas: &GasParams) -> EntropyMoments {
    u.cells
        .iter()
        .map(|row| {
            row.iter()
                .map(|cell| {
                    let s = cell.expectation(|a| renorm_total_entropy(a, chi, gas))?;
                    let fx = cell.expectation(|a| renorm_total_entropy(a, chi, gas).scale(a.velocity()[0]))?;
                    let fy = cell.expectation(|a| renorm_total_entropy(a, chi, gas).scale(a.velocity()[1]))?;
                    Some((s, [fx, fy]))
                })
                .collect()
        })
        .collect()
}

/// Entropy margin `-integral <U_0; S_chi> phi(0) - integral integral (<S_chi> d_t phi + <S_chi u> . grad phi)`.
fn entropy_margin(pw: &PhiWeights, em: &EntropyMoments, u: &EmpiricalYoungMeasure) -> f64 {
    let vol = u.coarse.cell_volume();
    let mut acc = Ext::ZERO;
    for k in 0..u.times.len() {
        for c in 0..u.coarse.num_cells() {
            let Some((s, f)) = em[k][c] else { return f64::NAN };
            let g = pw.grad[k][c];
            let mut term = s.scale(-vol * pw.dt[k][c]).checked_add(f[0].scale(-vol * g[0]));
            term = term.and_then(|t| t.checked_add(f[1].scale(-vol * g[1])));
            if k == 0 {
                term = term.and_then(|t| t.checked_add(s.scale(-vol * pw.initial[c])));
            }
            match term.and_then(|t| acc.checked_add(t)) {
                Some(v) => acc = v,
                None => return f64::NAN,
            }
        }
    }
    ext_to_f64(acc)
}

/// Largest `(s0 - s)_+` over non-vacuum atoms; `s0` defaults to the smallest initial entropy.
pub fn minimum_principle_check(u: &EmpiricalYoungMeasure, gas: &GasParams, s0: Option<f64>, vacuum_floor: f64) -> (f64, f64) {
    let entropy = |s: &crate::thermo::ConservativeState| match entropy_from_conservative(s, gas) {
        Ext::Finite(v) => v,
        _ => f64::NEG_INFINITY,
    };
    let s0 = s0.unwrap_or_else(|| {
        u.cells[0].iter().flat_map(|c| c.atoms.iter()).filter(|a| a.rho > vacuum_floor).map(entropy).fold(f64::INFINITY, f64::min)
    });
    let mut deficit: f64 = 0.0;
    for row in &u.cells {
        for cell in row {
            for a in cell.atoms.iter().filter(|a| a.rho > vacuum_floor) {
                deficit = deficit.max(s0 - entropy(a));
            }
        }
    }
    (s0, deficit)
}

pub fn verify_rdmv(
    u: &EmpiricalYoungMeasure,
    basis: &TestBasis,
    battery: &ChiBattery,
    gas: &GasParams,
    tol: &Tolerances,
    defects: Option<&DefectLedger>,
) -> Result<VerificationReport> {
    let horizon = u.times.last().copied().unwrap_or(0.0);
    if (basis.horizon - horizon).abs() > 1e-9 * (1.0 + horizon) {
        return Err(Error::Mismatch(format!("basis horizon {} differs from measure horizon {horizon}", basis.horizon)));
    }
    if u.times.len() < 2 {
        return Err(Error::Mismatch("measure needs at least two sample times".into()));
    }
    if let Some(d) = defects {
        if d.concentration.len() != u.times.len() || d.concentration.iter().any(|r| r.len() != u.coarse.num_cells()) {
            return Err(Error::Mismatch("defect ledger does not match the measure".into()));
        }
    }
    let w = trapezoid_weights(&u.times);
    let dx = u.coarse.dx();
    let dt = u.times.windows(2).map(|p| p[1] - p[0]).fold(0.0, f64::max);
    let mo = moments(u, gas);
    let threshold = tol.weak_form_constant * (dx + dt);

    let cont: Vec<f64> = basis.scalar.par_iter().map(|phi| continuity_residual(&phi_weights(phi, u), u, &mo)).collect();
    let continuity = ClauseReport::absolute(
        basis.scalar.iter().map(|p| p.label()).collect(),
        cont,
        vec![threshold; basis.scalar.len()],
    );

    let mom: Vec<(f64, f64)> = basis
        .vector
        .par_iter()
        .map(|phi| {
            let r = momentum_residual(phi.component.unwrap_or(0), &phi_weights(phi, u), u, &mo);
            (r, threshold + defect_allowance(phi, u, defects, &w))
        })
        .collect();
    let momentum = ClauseReport::absolute(
        basis.vector.iter().map(|p| p.label()).collect(),
        mom.iter().map(|m| m.0).collect(),
        mom.iter().map(|m| m.1).collect(),
    );

    let energies: Vec<f64> = (0..u.times.len()).map(|k| u.total_energy(k)).collect();
    let e0 = energies[0];
    let energy = ClauseReport::one_sided(
        u.times.iter().map(|t| format!("t={t}")).collect(),
        energies.iter().map(|e| e0 - e).collect(),
        vec![tol.energy_rel * e0.abs().max(f64::MIN_POSITIVE); energies.len()],
    );

    let chis: Vec<&ChiSpec> = battery.monotone().collect();
    let moments_by_chi: Vec<EntropyMoments> = chis.par_iter().map(|chi| entropy_moments(chi, u, gas)).collect();
    let nonneg_weights: Vec<PhiWeights> = basis.nonnegative.par_iter().map(|phi| phi_weights(phi, u)).collect();
    let pairs: Vec<(usize, usize)> = (0..chis.len()).flat_map(|i| (0..nonneg_weights.len()).map(move |j| (i, j))).collect();
    let margins: Vec<f64> =
        pairs.par_iter().map(|&(i, j)| entropy_margin(&nonneg_weights[j], &moments_by_chi[i], u)).collect();
    let entropy = ClauseReport::one_sided(
        pairs.iter().map(|&(i, j)| format!("{} | {}", chis[i], basis.nonnegative[j].label())).collect(),
        margins,
        pairs.iter().map(|&(_, j)| tol.entropy_factor * dx * basis.nonnegative[j].sup_norm()).collect(),
    );

    let loss: f64 = energies.iter().zip(&w).map(|(e, wk)| wk * (e0 - e)).sum();
    let defect_mass = match defects {
        None => 0.0,
        Some(d) => d
            .concentration
            .iter()
            .zip(&w)
            .map(|(row, wk)| wk * u.coarse.cell_volume() * row.iter().map(|c| c.magnitude()).sum::<f64>())
            .sum(),
    };
    let ratio = if defect_mass == 0.0 {
        0.0
    } else if loss > 0.0 {
        defect_mass / loss
    } else {
        f64::INFINITY
    };
    let defect_bound = DefectBoundReport { defect_mass, energy_loss: loss, ratio, ceiling: tol.defect_ceiling, pass: ratio <= tol.defect_ceiling };

    let (s0, deficit) = minimum_principle_check(u, gas, tol.s0, tol.vacuum_floor);
    let mp_tol = tol.min_principle.unwrap_or(10.0 * dx);
    let min_principle = MinPrincipleReport { s0, deficit, tolerance: mp_tol, pass: deficit <= mp_tol };

    let pass = continuity.pass && momentum.pass && energy.pass && entropy.pass && defect_bound.pass && min_principle.pass;
    Ok(VerificationReport { dx, dt, continuity, momentum, energy, entropy, defect_bound, min_principle, pass })
}

/// Log-log fits of dissipation magnitudes against epsilon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub labels: Vec<String>,
    pub epsilons: Vec<f64>,
    /// `magnitudes[member][term]`.
    pub magnitudes: Vec<Vec<f64>>,
    /// `None` when a term vanishes identically on the fitted members.
    pub slopes: Vec<Option<f64>>,
    pub threshold: f64,
    pub pass: Vec<bool>,
}

pub const SCALING_SLOPE_THRESHOLD: f64 = 0.4;
/// Smallest span of `log10 eps` accepted for a fit.
pub const SCALING_MIN_DECADES: f64 = 1.5;

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() < 2 || x.len() != y.len() {
        return Err(Error::DegenerateFit(format!("need at least two paired points, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::DegenerateFit("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(sxy / sxx)
}

/// Fits each dissipation term against epsilon over the members with `epsilon > 0`.
pub fn dissipation_scaling_report(labels: &[&str], epsilons: &[f64], magnitudes: &[Vec<f64>]) -> Result<ScalingReport> {
    if epsilons.len() != magnitudes.len() {
        return Err(Error::Mismatch("one magnitude row per member is required".into()));
    }
    let fit: Vec<usize> = (0..epsilons.len()).filter(|&i| epsilons[i] > 0.0).collect();
    if fit.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 members with epsilon > 0, got {}", fit.len())));
    }
    let lo = fit.iter().map(|&i| epsilons[i]).fold(f64::INFINITY, f64::min);
    let hi = fit.iter().map(|&i| epsilons[i]).fold(0.0, f64::max);
    if (hi / lo).log10() < SCALING_MIN_DECADES - 1e-9 {
        return Err(Error::DegenerateFit(format!("epsilon range spans {:.2} decades", (hi / lo).log10())));
    }
    let mut slopes = Vec::new();
    let mut pass = Vec::new();
    for (j, _) in labels.iter().enumerate() {
        let y: Vec<f64> = fit.iter().map(|&i| magnitudes[i][j]).collect();
        if y.iter().all(|v| *v == 0.0) {
            slopes.push(None);
            pass.push(true);
            continue;
        }
        let x: Vec<f64> = fit.iter().map(|&i| epsilons[i]).collect();
        let s = loglog_slope(&x, &y)?;
        slopes.push(Some(s));
        pass.push(s >= SCALING_SLOPE_THRESHOLD);
    }
    Ok(ScalingReport {
        labels: labels.iter().map(|s| s.to_string()).collect(),
        epsilons: epsilons.to_vec(),
        magnitudes: magnitudes.to_vec(),
        slopes,
        threshold: SCALING_SLOPE_THRESHOLD,
        pass,
    })
}
