use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::thermo::ConservativeState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelTag {
    Euler,
    NsEntropy,
    Brenner,
}

impl ModelTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelTag::Euler => "euler",
            ModelTag::NsEntropy => "ns-entropy",
            ModelTag::Brenner => "brenner",
        }
    }
}

/// Sampled solution `t -> (rho, m, E)(t, .)` on a fixed grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldTrajectory {
    pub grid: Grid,
    pub model: ModelTag,
    pub epsilon: f64,
    pub times: Vec<f64>,
    pub states: Vec<Vec<ConservativeState>>,
    /// Extra per-cell field per sample (the transported `Z` for the entropy-transport model).
    pub aux: Option<Vec<Vec<f64>>>,
    /// Per-sample total of the model's own energy balance: the stored energy plus
    /// everything already dissipated. `None` means `integral E` is the balance.
    pub balance_energy: Option<Vec<f64>>,
}

impl FieldTrajectory {
    pub fn new(grid: Grid, model: ModelTag, epsilon: f64) -> Self {
        FieldTrajectory { grid, model, epsilon, times: Vec::new(), states: Vec::new(), aux: None, balance_energy: None }
    }

    /// Appends a sample; times must start at 0 and increase strictly, states must lie in `Q`.
    pub fn push(&mut self, t: f64, states: Vec<ConservativeState>) -> Result<()> {
        if states.len() != self.grid.num_cells() {
            return Err(Error::Mismatch(format!(
                "sample has {} cells, grid has {}",
                states.len(),
                self.grid.num_cells()
            )));
        }
        match self.times.last() {
            None if t != 0.0 => return Err(Error::Mismatch(format!("first sample at t = {t}, expected 0"))),
            Some(&last) if t <= last => {
                return Err(Error::Mismatch(format!("sample time {t} does not exceed {last}")));
            }
            _ => {}
        }
        if let Some(bad) = states.iter().find(|s| !s.in_phase_space()) {
            return Err(Error::Domain(format!("state {bad:?} at t = {t} is outside Q")));
        }
        self.times.push(t);
        self.states.push(states);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self, k: usize) -> f64 {
        self.grid.integrate(self.states[k].iter().map(|s| s.rho))
    }

    pub fn total_momentum(&self, k: usize, axis: usize) -> f64 {
        self.grid.integrate(self.states[k].iter().map(|s| s.m[axis]))
    }

    pub fn total_energy(&self, k: usize) -> f64 {
        self.grid.integrate(self.states[k].iter().map(|s| s.energy))
    }

    /// Energy used for defect bookkeeping at sample `k`.
    pub fn balance_energy_at(&self, k: usize) -> f64 {
        match &self.balance_energy {
            Some(b) => b[k],
            None => self.total_energy(k),
        }
    }

    /// Index of the sample closest to `t`.
    pub fn sample_near(&self, t: f64) -> usize {
        let mut best = 0;
        for (k, &tk) in self.times.iter().enumerate() {
            if (tk - t).abs() < (self.times[best] - t).abs() {
                best = k;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{build_grid, BoundaryCondition};

    #[test]
    fn push_enforces_time_order_and_phase_space() {
        let g = build_grid(1, 4, 1.0, BoundaryCondition::Periodic).unwrap();
        let mut tr = FieldTrajectory::new(g, ModelTag::Euler, 0.0);
        let u = vec![ConservativeState::new_1d(1.0, 0.0, 2.0); 4];
        assert!(tr.push(0.1, u.clone()).is_err());
        tr.push(0.0, u.clone()).unwrap();
        assert!(tr.push(0.0, u.clone()).is_err());
        let mut bad = u.clone();
        bad[2].rho = -1.0;
        assert!(tr.push(0.5, bad).is_err());
        tr.push(0.5, u).unwrap();
        assert_eq!(tr.len(), 2);
        assert!((tr.total_energy(1) - 2.0).abs() < 1e-15);
        assert_eq!(tr.sample_near(0.4), 1);
    }
}
