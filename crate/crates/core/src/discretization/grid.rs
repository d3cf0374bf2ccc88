use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryCondition {
    Periodic,
    SlipWall,
}

/// Uniform cell-centred grid on `[0, length]^dim`, cells indexed `i + n * j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
    bc: BoundaryCondition,
    dx: f64,
}

/// Neighbour of a cell across one of its faces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Neighbor {
    Cell(usize),
    Wall,
}

/// A cell face; `left`/`right` are `None` on a wall.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Face {
    pub axis: usize,
    pub left: Option<usize>,
    pub right: Option<usize>,
    pub center: [f64; 2],
}

impl Face {
    pub fn is_wall(&self) -> bool {
        self.left.is_none() || self.right.is_none()
    }
}

pub fn build_grid(dim: usize, n: usize, length: f64, bc: BoundaryCondition) -> Result<Grid> {
    if !(1..=2).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    if n < 4 {
        return Err(Error::InvalidGrid(format!("need at least 4 cells per axis, got {n}")));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
    }
    Ok(Grid { dim, n, length, bc, dx: length / n as f64 })
}

/// Coarse partition of the same domain; unlike [`build_grid`] it accepts any `n >= 1`.
pub fn build_partition(dim: usize, n: usize, length: f64, bc: BoundaryCondition) -> Result<Grid> {
    if n == 0 {
        return Err(Error::InvalidGrid("partition needs at least one cell".into()));
    }
    let g = build_grid(dim, n.max(4), length, bc)?;
    Ok(Grid { n, dx: length / n as f64, ..g })
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Volume of one cell, `dx^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.dx.powi(self.dim as i32)
    }

    pub fn num_cells(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.n * j
    }

    /// Per-axis integer coordinates of a cell.
    pub fn coords(&self, cell: usize) -> [usize; 2] {
        [cell % self.n, cell / self.n]
    }

    pub fn cell_center(&self, cell: usize) -> [f64; 2] {
        let [i, j] = self.coords(cell);
        let y = if self.dim == 2 { (j as f64 + 0.5) * self.dx } else { 0.0 };
        [(i as f64 + 0.5) * self.dx, y]
    }

    pub fn centers(&self) -> Vec<[f64; 2]> {
        (0..self.num_cells()).map(|c| self.cell_center(c)).collect()
    }

    /// Neighbour of `cell` along `axis` in direction `dir` (+1 or -1).
    pub fn neighbor(&self, cell: usize, axis: usize, dir: i32) -> Neighbor {
        let mut c = self.coords(cell);
        let k = c[axis] as i64 + dir as i64;
        let n = self.n as i64;
        if (0..n).contains(&k) {
            c[axis] = k as usize;
        } else {
            match self.bc {
                BoundaryCondition::Periodic => c[axis] = k.rem_euclid(n) as usize,
                BoundaryCondition::SlipWall => return Neighbor::Wall,
            }
        }
        Neighbor::Cell(self.index(c[0], c[1]))
    }

    /// All faces, axis by axis; periodic axes have `n` faces per line, walled axes `n + 1`.
    pub fn faces(&self) -> Vec<Face> {
        let lines = if self.dim == 2 { self.n } else { 1 };
        let mut out = Vec::new();
        for axis in 0..self.dim {
            for line in 0..lines {
                let cell_at = |k: usize| if axis == 0 { self.index(k, line) } else { self.index(line, k) };
                let nf = match self.bc {
                    BoundaryCondition::Periodic => self.n,
                    BoundaryCondition::SlipWall => self.n + 1,
                };
                for f in 0..nf {
                    let (left, right) = match self.bc {
                        BoundaryCondition::Periodic => (Some(cell_at((f + self.n - 1) % self.n)), Some(cell_at(f))),
                        BoundaryCondition::SlipWall => (
                            if f == 0 { None } else { Some(cell_at(f - 1)) },
                            if f == self.n { None } else { Some(cell_at(f)) },
                        ),
                    };
                    let along = f as f64 * self.dx;
                    let across = if self.dim == 2 { (line as f64 + 0.5) * self.dx } else { 0.0 };
                    let center = if axis == 0 { [along, across] } else { [across, along] };
                    out.push(Face { axis, left, right, center });
                }
            }
        }
        out
    }

    /// Midpoint (cell-average) quadrature of a sampled cell field.
    pub fn integrate(&self, values: impl IntoIterator<Item = f64>) -> f64 {
        values.into_iter().sum::<f64>() * self.cell_volume()
    }

    pub fn integrate_fn(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        self.integrate((0..self.num_cells()).map(|c| f(self.cell_center(c))))
    }

    /// Whether two grids cover the same domain with the same boundary treatment.
    pub fn same_domain(&self, other: &Grid) -> bool {
        self.dim == other.dim && self.bc == other.bc && (self.length - other.length).abs() <= 1e-12 * self.length
    }
}
