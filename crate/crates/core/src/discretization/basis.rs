//! Smooth test functions `phi(t, x) = w(t) * (offset + scale * f(x))` for weak residuals.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::grid::{BoundaryCondition, Grid};

/// One-dimensional spatial factor on `[0, L]`, with `xi = x / L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    One,
    Sin(u32),
    Cos(u32),
    /// `(2 xi - 1)^k`.
    Poly(u32),
    /// `xi (1 - xi) (2 xi - 1)^k`, zero at both ends.
    Bump(u32),
}

impl Profile {
    /// Value and derivative at `x`.
    pub fn eval(self, x: f64, length: f64) -> (f64, f64) {
        let xi = x / length;
        match self {
            Profile::One => (1.0, 0.0),
            Profile::Sin(k) => {
                let w = 2.0 * PI * k as f64 / length;
                ((w * x).sin(), w * (w * x).cos())
            }
            Profile::Cos(k) => {
                let w = 2.0 * PI * k as f64 / length;
                ((w * x).cos(), -w * (w * x).sin())
            }
            Profile::Poly(k) => {
                let y = 2.0 * xi - 1.0;
                let d = if k == 0 { 0.0 } else { k as f64 * y.powi(k as i32 - 1) * 2.0 / length };
                (y.powi(k as i32), d)
            }
            Profile::Bump(k) => {
                let y = 2.0 * xi - 1.0;
                let q = xi * (1.0 - xi);
                let yk = y.powi(k as i32);
                let dyk = if k == 0 { 0.0 } else { 2.0 * k as f64 * y.powi(k as i32 - 1) };
                (q * yk, ((1.0 - 2.0 * xi) * yk + q * dyk) / length)
            }
        }
    }

    /// Bound on `|f|` over the domain.
    pub fn sup(self) -> f64 {
        match self {
            Profile::Bump(_) => 0.25,
            _ => 1.0,
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::One => write!(f, "1"),
            Profile::Sin(k) => write!(f, "sin{k}"),
            Profile::Cos(k) => write!(f, "cos{k}"),
            Profile::Poly(k) => write!(f, "poly{k}"),
            Profile::Bump(k) => write!(f, "bump{k}"),
        }
    }
}

/// C^1 profile equal to 1 on `[0, tau - ramp]`, cosine ramp down to 0 at `tau`, 0 afterwards.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub tau: f64,
    pub ramp: f64,
}

impl TimeWindow {
    pub fn value(&self, t: f64) -> f64 {
        let a = self.tau - self.ramp;
        if t <= a {
            1.0
        } else if t >= self.tau {
            0.0
        } else {
            0.5 * (1.0 + (PI * (t - a) / self.ramp).cos())
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let a = self.tau - self.ramp;
        if t <= a || t >= self.tau {
            0.0
        } else {
            -0.5 * PI / self.ramp * (PI * (t - a) / self.ramp).sin()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    /// Spatial factors per axis; the second is `One` in 1D.
    pub space: [Profile; 2],
    pub time: TimeWindow,
    /// `None` for scalar test functions, `Some(axis)` for `phi * e_axis`.
    pub component: Option<usize>,
    pub offset: f64,
    pub scale: f64,
}

impl TestFunction {
    fn space_value(&self, x: [f64; 2], length: f64) -> (f64, [f64; 2]) {
        let (f0, d0) = self.space[0].eval(x[0], length);
        let (f1, d1) = self.space[1].eval(x[1], length);
        (self.offset + self.scale * f0 * f1, [self.scale * d0 * f1, self.scale * f0 * d1])
    }

    pub fn value(&self, t: f64, x: [f64; 2], length: f64) -> f64 {
        self.time.value(t) * self.space_value(x, length).0
    }

    pub fn gradient(&self, t: f64, x: [f64; 2], length: f64) -> [f64; 2] {
        let w = self.time.value(t);
        let g = self.space_value(x, length).1;
        [w * g[0], w * g[1]]
    }

    pub fn time_derivative(&self, t: f64, x: [f64; 2], length: f64) -> f64 {
        self.time.deriv(t) * self.space_value(x, length).0
    }

    /// Whether the spatial gradient vanishes identically.
    pub fn is_space_constant(&self) -> bool {
        self.scale == 0.0 || self.space.iter().all(|p| *p == Profile::One)
    }

    pub fn is_nonnegative(&self) -> bool {
        if self.component.is_some() {
            return false;
        }
        if self.space.iter().all(|p| *p == Profile::One) {
            return self.offset + self.scale >= 0.0;
        }
        self.offset >= self.scale.abs() * self.space[0].sup() * self.space[1].sup()
    }

    /// Upper bound of `|phi|`.
    pub fn sup_norm(&self) -> f64 {
        self.offset.abs() + self.scale.abs() * self.space[0].sup() * self.space[1].sup()
    }

    pub fn label(&self) -> String {
        let kind = match self.component {
            None => "s".to_string(),
            Some(a) => format!("v{a}"),
        };
        let space = if self.offset != 0.0 {
            format!("{}+{}*{}*{}", self.offset, self.scale, self.space[0], self.space[1])
        } else {
            format!("{}*{}", self.space[0], self.space[1])
        };
        format!("{kind}:{space}@tau={}", self.time.tau)
    }
}

/// Scalar, vector and nonnegative scalar test functions for one grid and horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestBasis {
    pub horizon: f64,
    pub scalar: Vec<TestFunction>,
    pub vector: Vec<TestFunction>,
    pub nonnegative: Vec<TestFunction>,
}

impl TestBasis {
    pub fn len(&self) -> usize {
        self.scalar.len() + self.vector.len() + self.nonnegative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub const DEFAULT_K_SPACE: usize = 6;
pub const DEFAULT_K_TIME: usize = 4;

fn scalar_profiles(bc: BoundaryCondition, k: usize) -> Vec<Profile> {
    let mut out = vec![Profile::One];
    let mut j = 1u32;
    while out.len() < k {
        match bc {
            BoundaryCondition::Periodic => {
                out.push(Profile::Sin(j));
                if out.len() < k {
                    out.push(Profile::Cos(j));
                }
            }
            BoundaryCondition::SlipWall => out.push(Profile::Poly(j)),
        }
        j += 1;
    }
    out
}

fn normal_profiles(bc: BoundaryCondition, k: usize) -> Vec<Profile> {
    match bc {
        BoundaryCondition::Periodic => scalar_profiles(bc, k),
        BoundaryCondition::SlipWall => (0..k as u32).map(Profile::Bump).collect(),
    }
}

/// The first `k` index pairs ordered by total degree.
fn pairs(k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut deg = 0;
    while out.len() < k {
        for i in (0..=deg).rev() {
            if out.len() < k {
                out.push((i, deg - i));
            }
        }
        deg += 1;
    }
    out
}

/// Builds the finite test basis: `k_space` spatial modes times a ladder of
/// `k_time` windows ending at `tau_j = j * horizon / k_time`.
pub fn test_function_basis(grid: &Grid, k_space: usize, k_time: usize, horizon: f64) -> TestBasis {
    let k_space = k_space.max(1);
    let k_time = k_time.max(1);
    let ramp = horizon / (2.0 * k_time as f64);
    let windows: Vec<TimeWindow> =
        (1..=k_time).map(|j| TimeWindow { tau: j as f64 * horizon / k_time as f64, ramp }).collect();
    let sp = scalar_profiles(grid.bc(), k_space);
    let np = normal_profiles(grid.bc(), k_space);

    let scalar_modes: Vec<[Profile; 2]> = if grid.dim() == 1 {
        sp.iter().map(|&p| [p, Profile::One]).collect()
    } else {
        pairs(k_space).into_iter().map(|(i, j)| [sp[i], sp[j]]).collect()
    };
    let mut vector_modes: Vec<(usize, [Profile; 2])> = Vec::new();
    if grid.dim() == 1 {
        vector_modes.extend(np.iter().map(|&p| (0, [p, Profile::One])));
    } else {
        for axis in 0..2 {
            for (i, j) in pairs(k_space) {
                let mut f = [sp[j], sp[j]];
                f[axis] = np[i];
                vector_modes.push((axis, f));
            }
        }
    }

    let mut basis = TestBasis { horizon, scalar: Vec::new(), vector: Vec::new(), nonnegative: Vec::new() };
    for &time in &windows {
        for &space in &scalar_modes {
            basis.scalar.push(TestFunction { space, time, component: None, offset: 0.0, scale: 1.0 });
            let constant = space.iter().all(|p| *p == Profile::One);
            let (offset, scale) = if constant { (0.0, 1.0) } else { (1.0, 0.5) };
            basis.nonnegative.push(TestFunction { space, time, component: None, offset, scale });
        }
        for &(axis, space) in &vector_modes {
            basis.vector.push(TestFunction { space, time, component: Some(axis), offset: 0.0, scale: 1.0 });
        }
    }
    basis
}

/// Per-cell face-difference divergence of the vector test function at time `t`.
/// Summed over cells it telescopes to the wall-face values.
pub fn discrete_divergence(grid: &Grid, phi: &TestFunction, t: f64) -> Vec<f64> {
    let axis = phi.component.unwrap_or(0);
    let half = 0.5 * grid.dx();
    grid.centers()
        .into_iter()
        .map(|c| {
            let mut hi = c;
            let mut lo = c;
            hi[axis] += half;
            lo[axis] -= half;
            (phi.value(t, hi, grid.length()) - phi.value(t, lo, grid.length())) / grid.dx()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::build_grid;

    #[test]
    fn constant_mode_has_zero_gradient() {
        let g = build_grid(1, 16, 1.0, BoundaryCondition::Periodic).unwrap();
        let b = test_function_basis(&g, 6, 4, 1.0);
        let phi = &b.scalar[0];
        assert!(phi.is_space_constant());
        for c in g.centers() {
            assert_eq!(phi.gradient(0.1, c, 1.0), [0.0, 0.0]);
        }
    }

    #[test]
    fn periodic_sine_matches_at_ends() {
        let (v0, _) = Profile::Sin(1).eval(0.0, 1.0);
        let (v1, _) = Profile::Sin(1).eval(1.0, 1.0);
        assert!((v0 - v1).abs() < 1e-15);
    }

    #[test]
    fn wall_vector_modes_vanish_on_walls() {
        for dim in [1, 2] {
            let g = build_grid(dim, 8, 2.0, BoundaryCondition::SlipWall).unwrap();
            let b = test_function_basis(&g, 6, 4, 1.0);
            for phi in &b.vector {
                for face in g.faces().iter().filter(|f| f.is_wall() && Some(f.axis) == phi.component) {
                    assert_eq!(phi.value(0.0, face.center, 2.0), 0.0);
                }
            }
        }
    }

    #[test]
    fn discrete_divergence_telescopes() {
        for bc in [BoundaryCondition::Periodic, BoundaryCondition::SlipWall] {
            for dim in [1, 2] {
                let g = build_grid(dim, 12, 1.0, bc).unwrap();
                let b = test_function_basis(&g, 6, 2, 1.0);
                for phi in &b.vector {
                    let total = g.integrate(discrete_divergence(&g, phi, 0.0));
                    assert!(total.abs() < 1e-12, "{} -> {total}", phi.label());
                }
            }
        }
    }

    #[test]
    fn profile_derivatives_match_differences() {
        for p in [Profile::Sin(2), Profile::Cos(1), Profile::Poly(3), Profile::Bump(0), Profile::Bump(2)] {
            for x in [0.1, 0.37, 0.8] {
                let h = 1e-6;
                let fd = (p.eval(x + h, 1.3).0 - p.eval(x - h, 1.3).0) / (2.0 * h);
                assert!((fd - p.eval(x, 1.3).1).abs() < 1e-6, "{p} at {x}");
            }
        }
    }

    #[test]
    fn time_windows_are_c1_and_vanish_at_horizon() {
        let g = build_grid(1, 8, 1.0, BoundaryCondition::Periodic).unwrap();
        let b = test_function_basis(&g, 2, 4, 0.8);
        for phi in &b.scalar {
            assert_eq!(phi.time.value(0.8), 0.0);
            assert_eq!(phi.time.value(0.0), 1.0);
            let a = phi.time.tau - phi.time.ramp;
            assert!(phi.time.deriv(a + 1e-12).abs() < 1e-9);
        }
        assert!(b.nonnegative.iter().all(|p| p.is_nonnegative()));
        assert_eq!(b.scalar.len(), 8);
    }
}
