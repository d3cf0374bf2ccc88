use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::config::{InitialCondition, Primitive};
use crate::discretization::Grid;
use crate::error::{Error, Result};
use crate::thermo::{primitive_to_conservative, ConservativeState, GasParams, PrimitiveState};

/// Cell-center values `(rho, u, theta)`, with `u` along the first axis.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialData {
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub theta: Vec<f64>,
}

impl InitialData {
    pub fn conservative(&self, gas: &GasParams) -> Result<Vec<ConservativeState>> {
        (0..self.rho.len())
            .map(|i| primitive_to_conservative(&PrimitiveState::new_1d(self.rho[i], self.u[i], self.theta[i], gas)?, gas))
            .collect()
    }

    /// Smallest specific entropy over cells with positive density.
    pub fn min_entropy(&self, gas: &GasParams) -> f64 {
        self.rho
            .iter()
            .zip(&self.theta)
            .filter(|(r, t)| **r > 0.0 && **t > 0.0)
            .map(|(r, t)| gas.c_v() * t.ln() - r.ln())
            .fold(f64::INFINITY, f64::min)
    }

    fn push(&mut self, p: Primitive, ic: &str) -> Result<()> {
        if !(p.rho >= 0.0 && p.p >= 0.0) || !p.u.is_finite() {
            return Err(Error::config(format!("ic.{ic}"), format!("rho = {}, p = {} must be nonnegative", p.rho, p.p)));
        }
        if p.rho == 0.0 && (p.p != 0.0 || p.u != 0.0) {
            return Err(Error::config(format!("ic.{ic}"), "vacuum cells need p = 0 and u = 0"));
        }
        self.rho.push(p.rho);
        self.u.push(p.u);
        self.theta.push(if p.rho > 0.0 { p.p / p.rho } else { 0.0 });
        Ok(())
    }
}

#[derive(Deserialize)]
struct TableRow {
    x: f64,
    rho: f64,
    u: f64,
    p: f64,
}

fn read_table(path: &Path) -> Result<Vec<TableRow>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| Error::config("ic.path", e.to_string()))?;
    let mut rows: Vec<TableRow> =
        reader.deserialize().collect::<std::result::Result<_, _>>().map_err(|e| Error::config("ic.path", e.to_string()))?;
    if rows.len() < 2 {
        return Err(Error::config("ic.path", "table needs at least two rows"));
    }
    rows.sort_by(|a, b| a.x.total_cmp(&b.x));
    Ok(rows)
}

fn interpolate(rows: &[TableRow], x: f64) -> Primitive {
    let j = rows.partition_point(|r| r.x <= x);
    let (a, b) = match j {
        0 => (&rows[0], &rows[0]),
        j if j == rows.len() => (&rows[j - 1], &rows[j - 1]),
        j => (&rows[j - 1], &rows[j]),
    };
    let w = if b.x > a.x { (x - a.x) / (b.x - a.x) } else { 0.0 };
    let lerp = |p: f64, q: f64| p + w * (q - p);
    Primitive { rho: lerp(a.rho, b.rho), u: lerp(a.u, b.u), p: lerp(a.p, b.p) }
}

/// Samples the initial condition at cell centers; `seed` drives the oscillatory phases.
pub fn initial_data(ic: &InitialCondition, grid: &Grid, gas: &GasParams, seed: u64) -> Result<InitialData> {
    let len = grid.length();
    let mut out = InitialData { rho: Vec::new(), u: Vec::new(), theta: Vec::new() };
    match ic {
        InitialCondition::Sod { left, right, interface } => {
            for x in grid.centers() {
                out.push(if x[0] < interface * len { *left } else { *right }, "sod")?;
            }
        }
        InitialCondition::Contact { mean, amplitude, wavenumber, velocity, pressure } => {
            for x in grid.centers() {
                let rho = mean + amplitude * (2.0 * PI * wavenumber * x[0] / len).sin();
                out.push(Primitive { rho, u: *velocity, p: *pressure }, "contact")?;
            }
        }
        InitialCondition::Oscillatory { base, amplitude, modes } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let phases: Vec<f64> = (0..*modes).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
            for x in grid.centers() {
                let f: f64 = phases
                    .iter()
                    .enumerate()
                    .map(|(k, ph)| (2.0 * PI * (k + 1) as f64 * x[0] / len + ph).sin() / (k + 1) as f64)
                    .sum();
                let q = 1.0 + amplitude * f;
                out.push(Primitive { rho: base.rho * q, u: base.u, p: base.p * q }, "oscillatory")?;
            }
        }
        InitialCondition::Acoustic { base, amplitude, wavenumber } => {
            if !(base.rho > 0.0 && base.p > 0.0) {
                return Err(Error::config("ic.base", "acoustic base state must be positive"));
            }
            let c0 = (gas.gamma() * base.p / base.rho).sqrt();
            for x in grid.centers() {
                let w = amplitude * (2.0 * PI * wavenumber * x[0] / len).sin();
                let p = Primitive { rho: base.rho * (1.0 + w), u: base.u + c0 * w, p: base.p * (1.0 + gas.gamma() * w) };
                out.push(p, "acoustic")?;
            }
        }
        InitialCondition::Table { path } => {
            let rows = read_table(path)?;
            for x in grid.centers() {
                out.push(interpolate(&rows, x[0]), "table")?;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{build_grid, BoundaryCondition};
    use std::io::Write;

    fn grid() -> Grid {
        build_grid(1, 16, 1.0, BoundaryCondition::Periodic).unwrap()
    }

    #[test]
    fn oscillatory_phases_follow_the_seed() {
        let gas = GasParams::from_gamma(1.4).unwrap();
        let ic = InitialCondition::Oscillatory { base: Primitive { rho: 1.0, u: 0.0, p: 1.0 }, amplitude: 0.1, modes: 3 };
        let a = initial_data(&ic, &grid(), &gas, 7).unwrap();
        assert_eq!(a, initial_data(&ic, &grid(), &gas, 7).unwrap());
        assert_ne!(a, initial_data(&ic, &grid(), &gas, 8).unwrap());
    }

    #[test]
    fn table_is_interpolated() {
        let gas = GasParams::from_gamma(1.4).unwrap();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "x,rho,u,p\n1.0,3.0,0.0,1.0\n0.0,1.0,0.0,1.0").unwrap();
        let d = initial_data(&InitialCondition::Table { path: f.path().to_path_buf() }, &grid(), &gas, 0).unwrap();
        assert!((d.rho[0] - (1.0 + 2.0 / 32.0)).abs() < 1e-14);
        assert!((d.theta[15] - 1.0 / d.rho[15]).abs() < 1e-14);
    }
}
