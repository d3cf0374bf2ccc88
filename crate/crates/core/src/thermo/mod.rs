//! Perfect-gas thermodynamics in conservative variables.
//!
//! The phase space is `Q = {(rho, m, E) : rho >= 0, E >= 0}`. Quantities that are
//! only defined for `rho > 0` carry explicit extended values ([`Ext`]) on the
//! boundary of `Q` instead of sentinel floats.

mod chi;

pub use chi::{build_chi, ChiBattery, ChiCandidate, ChiKind, ChiSpec, CHI_SAMPLE_RANGE, CHI_SAMPLE_STEP};

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Densities at or below this are treated as vacuum.
pub const VACUUM_FLOOR: f64 = 1e-12;

/// Relative slack allowed for `E - |m|^2 / (2 rho)` below zero before a state is rejected.
pub const INTERNAL_ENERGY_TOL: f64 = 1e-12;

/// Extended real number.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub enum Ext {
    NegInf,
    Finite(f64),
    PosInf,
}

impl Ext {
    pub const ZERO: Ext = Ext::Finite(0.0);

    pub fn finite(self) -> Option<f64> {
        match self {
            Ext::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Ext::Finite(_))
    }

    /// Sum of two extended values. `None` when the sum is `+inf - inf`.
    pub fn checked_add(self, other: Ext) -> Option<Ext> {
        match (self, other) {
            (Ext::Finite(a), Ext::Finite(b)) => Some(Ext::Finite(a + b)),
            (Ext::NegInf, Ext::PosInf) | (Ext::PosInf, Ext::NegInf) => None,
            (Ext::NegInf, _) | (_, Ext::NegInf) => Some(Ext::NegInf),
            (Ext::PosInf, _) | (_, Ext::PosInf) => Some(Ext::PosInf),
        }
    }

    /// Product with a real scalar, using the measure-theoretic convention `0 * inf = 0`.
    pub fn scale(self, a: f64) -> Ext {
        match self {
            Ext::Finite(v) => Ext::Finite(v * a),
            _ if a == 0.0 => Ext::ZERO,
            Ext::PosInf => {
                if a > 0.0 {
                    Ext::PosInf
                } else {
                    Ext::NegInf
                }
            }
            Ext::NegInf => {
                if a > 0.0 {
                    Ext::NegInf
                } else {
                    Ext::PosInf
                }
            }
        }
    }
}

impl Neg for Ext {
    type Output = Ext;
    fn neg(self) -> Ext {
        match self {
            Ext::NegInf => Ext::PosInf,
            Ext::PosInf => Ext::NegInf,
            Ext::Finite(v) => Ext::Finite(-v),
        }
    }
}

impl From<f64> for Ext {
    fn from(v: f64) -> Self {
        Ext::Finite(v)
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::NegInf => write!(f, "-inf"),
            Ext::PosInf => write!(f, "+inf"),
            Ext::Finite(v) => write!(f, "{v}"),
        }
    }
}

/// Specific heat and adiabatic exponent, tied by `gamma = 1 + 1/c_v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GasParamsRaw", into = "GasParamsRaw")]
pub struct GasParams {
    c_v: f64,
    gamma: f64,
}

#[derive(Serialize, Deserialize)]
struct GasParamsRaw {
    c_v: f64,
}

impl TryFrom<GasParamsRaw> for GasParams {
    type Error = Error;
    fn try_from(raw: GasParamsRaw) -> Result<Self> {
        GasParams::new(raw.c_v)
    }
}

impl From<GasParams> for GasParamsRaw {
    fn from(g: GasParams) -> Self {
        GasParamsRaw { c_v: g.c_v }
    }
}

impl GasParams {
    pub fn new(c_v: f64) -> Result<Self> {
        if !(c_v.is_finite() && c_v > 0.0) {
            return Err(Error::Domain(format!("c_v must be positive and finite, got {c_v}")));
        }
        Ok(GasParams { c_v, gamma: 1.0 + 1.0 / c_v })
    }

    /// Builds the parameters from the adiabatic exponent; `c_v = 1/(gamma - 1)`.
    pub fn from_gamma(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(Error::Domain(format!("gamma must exceed 1, got {gamma}")));
        }
        Self::new(1.0 / (gamma - 1.0))
    }

    pub fn c_v(&self) -> f64 {
        self.c_v
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// A point `(rho, m, E)` of the phase space. Unused momentum components are zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConservativeState {
    pub rho: f64,
    pub m: [f64; 3],
    pub energy: f64,
}

impl ConservativeState {
    pub const ZERO: ConservativeState = ConservativeState { rho: 0.0, m: [0.0; 3], energy: 0.0 };

    pub fn new(rho: f64, m: [f64; 3], energy: f64) -> Self {
        ConservativeState { rho, m, energy }
    }

    pub fn new_1d(rho: f64, m: f64, energy: f64) -> Self {
        ConservativeState { rho, m: [m, 0.0, 0.0], energy }
    }

    pub fn momentum_norm_sq(&self) -> f64 {
        self.m.iter().map(|c| c * c).sum()
    }

    /// Membership in `Q`: `rho >= 0` and `E >= 0`, all components finite.
    pub fn in_phase_space(&self) -> bool {
        self.rho >= 0.0
            && self.energy >= 0.0
            && self.rho.is_finite()
            && self.energy.is_finite()
            && self.m.iter().all(|c| c.is_finite())
    }

    /// `rho = 0` with nonzero momentum: infinite kinetic energy.
    pub fn is_non_physical(&self) -> bool {
        self.rho == 0.0 && self.m.iter().any(|&c| c != 0.0)
    }

    pub fn kinetic_energy(&self) -> Ext {
        kinetic_energy_ext(self.rho, &self.m)
    }

    /// Internal energy `E - |m|^2/(2 rho)`; `None` when the kinetic part is infinite.
    pub fn internal_energy(&self) -> Option<f64> {
        self.kinetic_energy().finite().map(|k| self.energy - k)
    }

    pub fn velocity(&self) -> [f64; 3] {
        if self.rho > 0.0 {
            [self.m[0] / self.rho, self.m[1] / self.rho, self.m[2] / self.rho]
        } else {
            [0.0; 3]
        }
    }

    /// Pressure `p = (E - kin)/c_v`, with 0 at exact vacuum.
    pub fn pressure(&self, gas: &GasParams) -> Option<f64> {
        self.internal_energy().map(|e| e / gas.c_v())
    }

    pub fn max_abs_diff(&self, other: &ConservativeState) -> f64 {
        let mut d = (self.rho - other.rho).abs().max((self.energy - other.energy).abs());
        for k in 0..3 {
            d = d.max((self.m[k] - other.m[k]).abs());
        }
        d
    }
}

impl Add for ConservativeState {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        ConservativeState {
            rho: self.rho + o.rho,
            m: [self.m[0] + o.m[0], self.m[1] + o.m[1], self.m[2] + o.m[2]],
            energy: self.energy + o.energy,
        }
    }
}

impl AddAssign for ConservativeState {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for ConservativeState {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        ConservativeState {
            rho: self.rho - o.rho,
            m: [self.m[0] - o.m[0], self.m[1] - o.m[1], self.m[2] - o.m[2]],
            energy: self.energy - o.energy,
        }
    }
}

impl Mul<f64> for ConservativeState {
    type Output = Self;
    fn mul(self, a: f64) -> Self {
        ConservativeState {
            rho: self.rho * a,
            m: [self.m[0] * a, self.m[1] * a, self.m[2] * a],
            energy: self.energy * a,
        }
    }
}

impl Mul<ConservativeState> for f64 {
    type Output = ConservativeState;
    fn mul(self, u: ConservativeState) -> ConservativeState {
        u * self
    }
}

/// Primitive description `(rho, u, theta, p, s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveState {
    pub rho: f64,
    pub u: [f64; 3],
    pub theta: f64,
    pub p: f64,
    pub s: Ext,
}

impl PrimitiveState {
    /// Builds a consistent primitive state from `(rho, u, theta)`.
    pub fn new(rho: f64, u: [f64; 3], theta: f64, gas: &GasParams) -> Result<Self> {
        if rho < 0.0 || theta < 0.0 || !rho.is_finite() || !theta.is_finite() {
            return Err(Error::Domain(format!("rho = {rho}, theta = {theta} must be nonnegative")));
        }
        Ok(PrimitiveState { rho, u, theta, p: rho * theta, s: specific_entropy(rho, theta, gas)? })
    }

    pub fn new_1d(rho: f64, u: f64, theta: f64, gas: &GasParams) -> Result<Self> {
        Self::new(rho, [u, 0.0, 0.0], theta, gas)
    }

    pub fn vacuum() -> Self {
        PrimitiveState { rho: 0.0, u: [0.0; 3], theta: 0.0, p: 0.0, s: Ext::NegInf }
    }

    pub fn is_vacuum(&self) -> bool {
        self.rho == 0.0 && self.theta == 0.0
    }

    pub fn sound_speed(&self, gas: &GasParams) -> f64 {
        (gas.gamma() * self.theta).sqrt()
    }
}

/// `m = rho u`, `E = rho |u|^2 / 2 + c_v rho theta`. Vacuum maps to the origin.
pub fn primitive_to_conservative(prim: &PrimitiveState, gas: &GasParams) -> Result<ConservativeState> {
    if prim.rho < 0.0 || prim.theta < 0.0 || !prim.rho.is_finite() || !prim.theta.is_finite() {
        return Err(Error::Domain(format!(
            "rho = {}, theta = {} must be nonnegative",
            prim.rho, prim.theta
        )));
    }
    if prim.rho == 0.0 {
        return Ok(ConservativeState::ZERO);
    }
    let u = prim.u;
    let m = [prim.rho * u[0], prim.rho * u[1], prim.rho * u[2]];
    let u2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    Ok(ConservativeState { rho: prim.rho, m, energy: 0.5 * prim.rho * u2 + gas.c_v() * prim.rho * prim.theta })
}

/// Inverse of [`primitive_to_conservative`] with a vacuum band `rho <= vacuum_floor`.
pub fn conservative_to_primitive(
    cons: &ConservativeState,
    gas: &GasParams,
    vacuum_floor: f64,
) -> Result<PrimitiveState> {
    if !cons.in_phase_space() {
        return Err(Error::Domain(format!("state {cons:?} is outside Q")));
    }
    let m_norm = cons.momentum_norm_sq().sqrt();
    if cons.rho <= vacuum_floor {
        if m_norm <= vacuum_floor {
            return Ok(PrimitiveState::vacuum());
        }
        return Err(Error::NonPhysicalState { rho: cons.rho, momentum: m_norm });
    }
    let kin = 0.5 * m_norm * m_norm / cons.rho;
    let mut internal = cons.energy - kin;
    if internal < 0.0 {
        if internal < -INTERNAL_ENERGY_TOL * (cons.energy + kin) {
            return Err(Error::NegativeInternalEnergy { rho: cons.rho, internal });
        }
        internal = 0.0;
    }
    let theta = internal / (gas.c_v() * cons.rho);
    let u = cons.velocity();
    Ok(PrimitiveState { rho: cons.rho, u, theta, p: cons.rho * theta, s: specific_entropy(cons.rho, theta, gas)? })
}

/// `|m|^2/(2 rho)` extended to `rho = 0` as 0 (if `m = 0`) or `+inf`.
pub fn kinetic_energy_ext(rho: f64, m: &[f64; 3]) -> Ext {
    let m2: f64 = m.iter().map(|c| c * c).sum();
    if rho > 0.0 {
        Ext::Finite(0.5 * m2 / rho)
    } else if rho == 0.0 && m2 == 0.0 {
        Ext::ZERO
    } else {
        Ext::PosInf
    }
}

/// `s = c_v log(theta) - log(rho)`.
///
/// `theta = 0` gives `-inf` (this includes the vacuum marker), `rho = 0` with
/// `theta > 0` gives `+inf`.
pub fn specific_entropy(rho: f64, theta: f64, gas: &GasParams) -> Result<Ext> {
    if rho < 0.0 || theta < 0.0 || rho.is_nan() || theta.is_nan() {
        return Err(Error::Domain(format!("rho = {rho}, theta = {theta} must be nonnegative")));
    }
    Ok(if theta == 0.0 {
        Ext::NegInf
    } else if rho == 0.0 {
        Ext::PosInf
    } else {
        Ext::Finite(gas.c_v() * theta.ln() - rho.ln())
    })
}

/// Specific entropy read off the conservative variables,
/// `c_v log((E - kin)/(c_v rho^gamma))`; `-inf` wherever that is not finite.
pub fn entropy_from_conservative(cons: &ConservativeState, gas: &GasParams) -> Ext {
    if cons.rho > 0.0 {
        let kin = 0.5 * cons.momentum_norm_sq() / cons.rho;
        let internal = cons.energy - kin;
        if internal > 0.0 {
            return Ext::Finite(gas.c_v() * (internal.ln() - gas.c_v().ln() - gas.gamma() * cons.rho.ln()));
        }
    }
    Ext::NegInf
}

/// Renormalized total entropy `S_chi(rho, m, E)`.
pub fn renorm_total_entropy(cons: &ConservativeState, chi: &ChiSpec, gas: &GasParams) -> Ext {
    if cons.rho > 0.0 {
        return match entropy_from_conservative(cons, gas) {
            Ext::Finite(s) => Ext::Finite(cons.rho * chi.eval(s)),
            _ => Ext::NegInf,
        };
    }
    if cons.rho == 0.0 && cons.m.iter().all(|&c| c == 0.0) && cons.energy >= 0.0 {
        Ext::ZERO
    } else {
        Ext::NegInf
    }
}
