//! Exact solution of the one-dimensional Riemann problem for a perfect gas.

use crate::error::{Error, Result};
use crate::thermo::{GasParams, PrimitiveState};

const TOL: f64 = 1e-12;
const MAX_ITER: usize = 200;

#[derive(Clone, Copy, Debug)]
struct Side {
    rho: f64,
    u: f64,
    p: f64,
    c: f64,
}

/// Star-region values of a solved Riemann problem, reusable for many samples.
#[derive(Clone, Debug)]
pub struct RiemannSolution {
    left: Side,
    right: Side,
    gamma: f64,
    gas: GasParams,
    pub p_star: f64,
    pub u_star: f64,
}

/// Pressure function `f_K(p)` and its derivative.
fn pressure_fn(p: f64, k: &Side, gamma: f64) -> (f64, f64) {
    if p > k.p {
        let a = 2.0 / ((gamma + 1.0) * k.rho);
        let b = (gamma - 1.0) / (gamma + 1.0) * k.p;
        let q = (a / (p + b)).sqrt();
        ((p - k.p) * q, q * (1.0 - 0.5 * (p - k.p) / (b + p)))
    } else {
        let e = (gamma - 1.0) / (2.0 * gamma);
        let r = p / k.p;
        (2.0 * k.c / (gamma - 1.0) * (r.powf(e) - 1.0), 1.0 / (k.rho * k.c) * r.powf(-(gamma + 1.0) / (2.0 * gamma)))
    }
}

impl RiemannSolution {
    pub fn solve(left: &PrimitiveState, right: &PrimitiveState, gas: &GasParams) -> Result<Self> {
        let gamma = gas.gamma();
        let side = |s: &PrimitiveState| -> Result<Side> {
            if !(s.rho > 0.0 && s.p > 0.0) {
                return Err(Error::Domain(format!("Riemann data must be non-vacuum, got rho = {}, p = {}", s.rho, s.p)));
            }
            Ok(Side { rho: s.rho, u: s.u[0], p: s.p, c: (gamma * s.p / s.rho).sqrt() })
        };
        let (l, r) = (side(left)?, side(right)?);
        let du = r.u - l.u;
        if 2.0 * (l.c + r.c) / (gamma - 1.0) <= du {
            return Err(Error::VacuumFormation);
        }
        // Two-rarefaction initial guess.
        let e = (gamma - 1.0) / (2.0 * gamma);
        let guess = ((l.c + r.c - 0.5 * (gamma - 1.0) * du) / (l.c / l.p.powf(e) + r.c / r.p.powf(e))).powf(1.0 / e);
        let mut p = guess.max(TOL);
        let mut converged = false;
        for _ in 0..MAX_ITER {
            let (fl, dl) = pressure_fn(p, &l, gamma);
            let (fr, dr) = pressure_fn(p, &r, gamma);
            let mut next = p - (fl + fr + du) / (dl + dr);
            if next <= 0.0 {
                next = 0.5 * p;
            }
            let change = 2.0 * (next - p).abs() / (next + p);
            p = next;
            if change < TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Domain("star-pressure iteration did not converge".into()));
        }
        let (fl, _) = pressure_fn(p, &l, gamma);
        let (fr, _) = pressure_fn(p, &r, gamma);
        let u_star = 0.5 * (l.u + r.u) + 0.5 * (fr - fl);
        Ok(RiemannSolution { left: l, right: r, gamma, gas: *gas, p_star: p, u_star })
    }

    /// Solution at the similarity coordinate `x / t`.
    pub fn sample(&self, xi: f64) -> PrimitiveState {
        let (rho, u, p) = self.sample_rup(xi);
        PrimitiveState::new_1d(rho, u, p / rho, &self.gas).expect("positive star states")
    }

    fn sample_rup(&self, xi: f64) -> (f64, f64, f64) {
        let g = self.gamma;
        let (ps, us) = (self.p_star, self.u_star);
        let gm = (g - 1.0) / (g + 1.0);
        if xi <= us {
            let k = self.left;
            if ps > k.p {
                let shock = k.u - k.c * ((g + 1.0) / (2.0 * g) * ps / k.p + (g - 1.0) / (2.0 * g)).sqrt();
                if xi <= shock {
                    (k.rho, k.u, k.p)
                } else {
                    (k.rho * (ps / k.p + gm) / (gm * ps / k.p + 1.0), us, ps)
                }
            } else {
                let head = k.u - k.c;
                let c_star = k.c * (ps / k.p).powf((g - 1.0) / (2.0 * g));
                let tail = us - c_star;
                if xi <= head {
                    (k.rho, k.u, k.p)
                } else if xi >= tail {
                    (k.rho * (ps / k.p).powf(1.0 / g), us, ps)
                } else {
                    let f = 2.0 / (g + 1.0) + gm / k.c * (k.u - xi);
                    let rho = k.rho * f.powf(2.0 / (g - 1.0));
                    let u = 2.0 / (g + 1.0) * (k.c + 0.5 * (g - 1.0) * k.u + xi);
                    (rho, u, k.p * f.powf(2.0 * g / (g - 1.0)))
                }
            }
        } else {
            let k = self.right;
            if ps > k.p {
                let shock = k.u + k.c * ((g + 1.0) / (2.0 * g) * ps / k.p + (g - 1.0) / (2.0 * g)).sqrt();
                if xi >= shock {
                    (k.rho, k.u, k.p)
                } else {
                    (k.rho * (ps / k.p + gm) / (gm * ps / k.p + 1.0), us, ps)
                }
            } else {
                let head = k.u + k.c;
                let c_star = k.c * (ps / k.p).powf((g - 1.0) / (2.0 * g));
                let tail = us + c_star;
                if xi >= head {
                    (k.rho, k.u, k.p)
                } else if xi <= tail {
                    (k.rho * (ps / k.p).powf(1.0 / g), us, ps)
                } else {
                    let f = 2.0 / (g + 1.0) - gm / k.c * (k.u - xi);
                    let rho = k.rho * f.powf(2.0 / (g - 1.0));
                    let u = 2.0 / (g + 1.0) * (-k.c + 0.5 * (g - 1.0) * k.u + xi);
                    (rho, u, k.p * f.powf(2.0 * g / (g - 1.0)))
                }
            }
        }
    }
}

/// Exact self-similar solution sampled at `x / t`.
pub fn riemann_exact_1d(
    left: &PrimitiveState,
    right: &PrimitiveState,
    gas: &GasParams,
    x_over_t: f64,
) -> Result<PrimitiveState> {
    Ok(RiemannSolution::solve(left, right, gas)?.sample(x_over_t))
}
