//! Empirical Young measures assembled from fine-grid solution families.
//!
//! A coarse space cell at a sample time carries the fine-cell states falling into
//! it as atoms with uniform weights (identical states merged). Pooling several
//! members gives each member the same total weight.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::discretization::{build_partition, FieldTrajectory, Grid};
use crate::error::{Error, Result};
use crate::thermo::{ConservativeState, Ext, GasParams};

/// Probability measure on `Q` attached to one coarse cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellMeasure {
    pub atoms: Vec<ConservativeState>,
    pub weights: Vec<f64>,
}

impl CellMeasure {
    pub fn dirac(state: ConservativeState) -> Self {
        CellMeasure { atoms: vec![state], weights: vec![1.0] }
    }

    fn from_weighted(samples: impl IntoIterator<Item = (ConservativeState, f64)>) -> Self {
        let mut index: HashMap<[u64; 5], usize> = HashMap::new();
        let mut out = CellMeasure { atoms: Vec::new(), weights: Vec::new() };
        for (s, w) in samples {
            let key = [s.rho.to_bits(), s.m[0].to_bits(), s.m[1].to_bits(), s.m[2].to_bits(), s.energy.to_bits()];
            match index.get(&key) {
                Some(&k) => out.weights[k] += w,
                None => {
                    index.insert(key, out.atoms.len());
                    out.atoms.push(s);
                    out.weights.push(w);
                }
            }
        }
        out
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `sum_i w_i g(X_i)` in extended arithmetic; `None` if both infinities occur.
    pub fn expectation(&self, g: impl Fn(&ConservativeState) -> Ext) -> Option<Ext> {
        let mut acc = Ext::ZERO;
        for (a, &w) in self.atoms.iter().zip(&self.weights) {
            acc = acc.checked_add(g(a).scale(w))?;
        }
        Some(acc)
    }

    pub fn expectation_finite(&self, g: impl Fn(&ConservativeState) -> f64) -> f64 {
        self.atoms.iter().zip(&self.weights).map(|(a, w)| w * g(a)).sum()
    }

    pub fn mean(&self) -> ConservativeState {
        self.atoms.iter().zip(&self.weights).fold(ConservativeState::ZERO, |acc, (a, &w)| acc + *a * w)
    }

    /// Trace of the covariance of `(rho, m, E)`.
    pub fn spread(&self) -> f64 {
        let mean = self.mean();
        self.atoms
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| {
                let d = *a - mean;
                w * (d.rho * d.rho + d.momentum_norm_sq() + d.energy * d.energy)
            })
            .sum::<f64>()
            .max(0.0)
    }

    /// Merges atoms into boxes of the given widths on `(rho, |m|, E)`; each box keeps
    /// its total weight at the weighted mean state, so first moments are unchanged.
    pub fn compress(&self, widths: [f64; 3]) -> CellMeasure {
        let mut order: Vec<[i64; 3]> = Vec::new();
        let mut bins: HashMap<[i64; 3], (ConservativeState, f64)> = HashMap::new();
        for (a, &w) in self.atoms.iter().zip(&self.weights) {
            let key = [
                (a.rho / widths[0]).floor() as i64,
                (a.momentum_norm_sq().sqrt() / widths[1]).floor() as i64,
                (a.energy / widths[2]).floor() as i64,
            ];
            let e = bins.entry(key).or_insert_with(|| {
                order.push(key);
                (ConservativeState::ZERO, 0.0)
            });
            e.0 += *a * w;
            e.1 += w;
        }
        CellMeasure::from_weighted(order.into_iter().map(|k| {
            let (sum, w) = bins[&k];
            (sum * (1.0 / w), w)
        }))
    }
}

/// How atoms are collected from a family of trajectories.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "member")]
pub enum Pooling {
    /// Atoms from one member (index into the family).
    Reference(usize),
    /// All members, each with equal total weight.
    Pooled,
}

/// Measure per sample time and coarse cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalYoungMeasure {
    pub coarse: Grid,
    pub times: Vec<f64>,
    /// `cells[k][c]`: time sample `k`, coarse cell `c`.
    pub cells: Vec<Vec<CellMeasure>>,
    /// Dissipation parameters of the contributing members.
    pub epsilons: Vec<f64>,
}

fn coarse_cell_of(fine: &Grid, coarse: &Grid, cell: usize) -> usize {
    let x = fine.cell_center(cell);
    let n = coarse.n();
    let idx = |v: f64| ((v / coarse.dx()).floor() as usize).min(n - 1);
    if coarse.dim() == 1 {
        idx(x[0])
    } else {
        coarse.index(idx(x[0]), idx(x[1]))
    }
}

/// Index of the member with the smallest epsilon (first one on ties).
pub fn smallest_epsilon_member(family: &[&FieldTrajectory]) -> usize {
    let mut best = 0;
    for (i, t) in family.iter().enumerate() {
        if t.epsilon < family[best].epsilon {
            best = i;
        }
    }
    best
}

pub fn build_empirical_measure(family: &[&FieldTrajectory], coarse_n: usize, pooling: Pooling) -> Result<EmpiricalYoungMeasure> {
    let first = family.first().ok_or_else(|| Error::Mismatch("empty trajectory family".into()))?;
    let grid0 = &first.grid;
    let coarse = build_partition(grid0.dim(), coarse_n, grid0.length(), grid0.bc())?;
    for t in family {
        if !t.grid.same_domain(grid0) {
            return Err(Error::Mismatch("trajectories live on different domains".into()));
        }
        if coarse_n == 0 || t.grid.n() % coarse_n != 0 {
            return Err(Error::Mismatch(format!("coarse size {coarse_n} does not divide member grid size {}", t.grid.n())));
        }
        if t.times.len() != first.times.len()
            || t.times.iter().zip(&first.times).any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + b.abs()))
        {
            return Err(Error::Mismatch("trajectories have different sample times".into()));
        }
    }
    let members: Vec<&FieldTrajectory> = match pooling {
        Pooling::Reference(i) => {
            vec![*family.get(i).ok_or_else(|| Error::Mismatch(format!("no member {i}")))?]
        }
        Pooling::Pooled => family.to_vec(),
    };
    let maps: Vec<Vec<usize>> =
        members.iter().map(|t| (0..t.grid.num_cells()).map(|c| coarse_cell_of(&t.grid, &coarse, c)).collect()).collect();
    let mut counts: Vec<Vec<usize>> = vec![vec![0; coarse.num_cells()]; members.len()];
    for (m, map) in maps.iter().enumerate() {
        for &c in map {
            counts[m][c] += 1;
        }
    }
    if let Some(c) = (0..coarse.num_cells()).find(|&c| counts.iter().any(|cm| cm[c] == 0)) {
        return Err(Error::EmptyCell(c));
    }
    let share = 1.0 / members.len() as f64;
    let mut cells = Vec::with_capacity(first.times.len());
    for k in 0..first.times.len() {
        let mut buckets: Vec<Vec<(ConservativeState, f64)>> = vec![Vec::new(); coarse.num_cells()];
        for (m, traj) in members.iter().enumerate() {
            for (f, &c) in maps[m].iter().enumerate() {
                buckets[c].push((traj.states[k][f], share / counts[m][c] as f64));
            }
        }
        cells.push(buckets.into_iter().map(CellMeasure::from_weighted).collect());
    }
    Ok(EmpiricalYoungMeasure {
        coarse,
        times: first.times.clone(),
        cells,
        epsilons: members.iter().map(|t| t.epsilon).collect(),
    })
}

impl EmpiricalYoungMeasure {
    /// Dirac measures of a single trajectory on its own grid.
    pub fn from_trajectory(traj: &FieldTrajectory) -> Self {
        EmpiricalYoungMeasure {
            coarse: traj.grid.clone(),
            times: traj.times.clone(),
            cells: traj.states.iter().map(|s| s.iter().map(|&x| CellMeasure::dirac(x)).collect()).collect(),
            epsilons: vec![traj.epsilon],
        }
    }

    pub fn cell(&self, k: usize, c: usize) -> &CellMeasure {
        &self.cells[k][c]
    }

    pub fn expectation(&self, k: usize, c: usize, g: impl Fn(&ConservativeState) -> Ext) -> Option<Ext> {
        self.cells[k][c].expectation(g)
    }

    pub fn measure_spread(&self, k: usize, c: usize) -> f64 {
        self.cells[k][c].spread()
    }

    /// `integral <U_{t_k}; g>` by midpoint quadrature on the coarse grid.
    pub fn integrate_finite(&self, k: usize, g: impl Fn(&ConservativeState) -> f64 + Copy) -> f64 {
        self.coarse.integrate(self.cells[k].iter().map(|m| m.expectation_finite(g)))
    }

    pub fn total_energy(&self, k: usize) -> f64 {
        self.integrate_finite(k, |s| s.energy)
    }

    /// Largest deviation of a per-cell total weight from 1.
    pub fn normalization_error(&self) -> f64 {
        self.cells.iter().flatten().map(|m| (m.total_weight() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn max_spread(&self, k: usize) -> f64 {
        (0..self.coarse.num_cells()).map(|c| self.measure_spread(k, c)).fold(0.0, f64::max)
    }

    pub fn compress(&self, widths: [f64; 3]) -> Self {
        let mut out = self.clone();
        for row in &mut out.cells {
            for m in row.iter_mut() {
                *m = m.compress(widths);
            }
        }
        out
    }
}

/// Concentration estimate in one coarse cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationEstimate {
    /// Frobenius norm of `avg(m (x) m / rho) - <U; m (x) m / rho>`.
    pub convective: f64,
    /// `|avg(p) - <U; p>|`.
    pub pressure: f64,
}

impl ConcentrationEstimate {
    pub fn magnitude(&self) -> f64 {
        self.convective + self.pressure
    }
}

/// Energy and concentration defect estimates of a family against a measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectLedger {
    pub times: Vec<f64>,
    /// `D(tau)` of the designated member.
    pub energy_defect: Vec<f64>,
    /// `D(tau)` of every member, in family order.
    pub member_energy_defects: Vec<Vec<f64>>,
    /// `concentration[k][c]` for the designated member.
    pub concentration: Vec<Vec<ConcentrationEstimate>>,
    pub member: usize,
}

impl DefectLedger {
    pub fn min_energy_defect(&self) -> f64 {
        self.energy_defect.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_energy_defect(&self) -> f64 {
        self.energy_defect.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_concentration(&self) -> f64 {
        self.concentration.iter().flatten().map(|c| c.magnitude()).fold(0.0, f64::max)
    }
}

fn convective(s: &ConservativeState) -> [f64; 9] {
    let mut out = [0.0; 9];
    if s.rho > 0.0 {
        for a in 0..3 {
            for b in 0..3 {
                out[3 * a + b] = s.m[a] * s.m[b] / s.rho;
            }
        }
    }
    out
}

fn pressure(s: &ConservativeState, gas: &GasParams) -> f64 {
    s.pressure(gas).unwrap_or(0.0)
}

/// `D(tau) = (member energy balance) - integral <U_tau; E>` for every member, with
/// concentration estimates for `member` (the coarsest configured one by convention).
pub fn energy_defect(
    family: &[&FieldTrajectory],
    measure: &EmpiricalYoungMeasure,
    gas: &GasParams,
    member: usize,
) -> Result<DefectLedger> {
    if member >= family.len() {
        return Err(Error::Mismatch(format!("no member {member}")));
    }
    let nt = measure.times.len();
    for t in family {
        if t.times.len() != nt || !t.grid.same_domain(&measure.coarse) {
            return Err(Error::Mismatch("family and measure do not share domain and samples".into()));
        }
    }
    let u_energy: Vec<f64> = (0..nt).map(|k| measure.total_energy(k)).collect();
    let member_energy_defects: Vec<Vec<f64>> =
        family.iter().map(|t| (0..nt).map(|k| t.balance_energy_at(k) - u_energy[k]).collect()).collect();

    let traj = family[member];
    let map: Vec<usize> = (0..traj.grid.num_cells()).map(|c| coarse_cell_of(&traj.grid, &measure.coarse, c)).collect();
    let nc = measure.coarse.num_cells();
    let mut counts = vec![0usize; nc];
    for &c in &map {
        counts[c] += 1;
    }
    let mut concentration = Vec::with_capacity(nt);
    for k in 0..nt {
        let mut conv = vec![[0.0; 9]; nc];
        let mut pres = vec![0.0; nc];
        for (f, &c) in map.iter().enumerate() {
            let s = &traj.states[k][f];
            let w = 1.0 / counts[c] as f64;
            for (acc, v) in conv[c].iter_mut().zip(convective(s)) {
                *acc += w * v;
            }
            pres[c] += w * pressure(s, gas);
        }
        let row = (0..nc)
            .map(|c| {
                let cm = measure.cell(k, c);
                let mut fro = 0.0;
                for j in 0..9 {
                    let d = conv[c][j] - cm.expectation_finite(|s| convective(s)[j]);
                    fro += d * d;
                }
                ConcentrationEstimate {
                    convective: fro.sqrt(),
                    pressure: (pres[c] - cm.expectation_finite(|s| pressure(s, gas))).abs(),
                }
            })
            .collect();
        concentration.push(row);
    }
    Ok(DefectLedger {
        times: measure.times.clone(),
        energy_defect: member_energy_defects[member].clone(),
        member_energy_defects,
        concentration,
        member,
    })
}
