//! TOML experiment configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::brenner::{MuModel, DEFAULT_SMOOTHNESS_BOUND};
use crate::discretization::{BoundaryCondition, DEFAULT_K_SPACE, DEFAULT_K_TIME};
use crate::error::{Error, Result};
use crate::relative_energy::TravelingContact;
use crate::thermo::{ChiBattery, GasParams};
use crate::verifier::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Euler,
    NsEntropy,
    Brenner,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasSection {
    pub c_v: Option<f64>,
    pub gamma: Option<f64>,
}

impl Default for GasSection {
    fn default() -> Self {
        GasSection { c_v: None, gamma: Some(1.4) }
    }
}

impl GasSection {
    pub fn build(&self) -> Result<GasParams> {
        match (self.c_v, self.gamma) {
            (Some(_), Some(_)) => Err(Error::config("gas", "give either c_v or gamma, not both")),
            (Some(c_v), None) => GasParams::new(c_v).map_err(|e| Error::config("gas.c_v", e.to_string())),
            (None, Some(g)) => GasParams::from_gamma(g).map_err(|e| Error::config("gas.gamma", e.to_string())),
            (None, None) => Err(Error::config("gas", "one of c_v or gamma is required")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    pub bc: BoundaryCondition,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { dim: 1, n: 200, length: 1.0, bc: BoundaryCondition::Periodic }
    }
}

/// Primitive triple `(rho, u, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Primitive {
    pub rho: f64,
    #[serde(default)]
    pub u: f64,
    pub p: f64,
}

fn sod_left() -> Primitive {
    Primitive { rho: 1.0, u: 0.0, p: 1.0 }
}

fn sod_right() -> Primitive {
    Primitive { rho: 0.125, u: 0.0, p: 0.1 }
}

fn half() -> f64 {
    0.5
}

fn one() -> f64 {
    1.0
}

fn base_state() -> Primitive {
    Primitive { rho: 1.0, u: 0.0, p: 1.0 }
}

fn default_amplitude() -> f64 {
    0.05
}

fn default_modes() -> usize {
    4
}

/// Named initial conditions, selected by `kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialCondition {
    /// Riemann data with the interface at `interface * length`.
    Sod {
        #[serde(default = "sod_left")]
        left: Primitive,
        #[serde(default = "sod_right")]
        right: Primitive,
        #[serde(default = "half")]
        interface: f64,
    },
    /// Sine density profile advected at constant velocity and pressure.
    Contact {
        #[serde(default = "one")]
        mean: f64,
        #[serde(default = "default_contact_amplitude")]
        amplitude: f64,
        #[serde(default = "one")]
        wavenumber: f64,
        #[serde(default = "one")]
        velocity: f64,
        #[serde(default = "one")]
        pressure: f64,
    },
    /// Base state times `1 + a sum_k sin(2 pi k x / L + phase_k) / k` in density and
    /// pressure, with phases drawn from the seeded generator.
    Oscillatory {
        #[serde(default = "base_state")]
        base: Primitive,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "default_modes")]
        modes: usize,
    },
    /// Right-moving linear acoustic wave of relative amplitude `amplitude`.
    Acoustic {
        #[serde(default = "base_state")]
        base: Primitive,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "one")]
        wavenumber: f64,
    },
    /// CSV with header `x,rho,u,p`, linearly interpolated to cell centers.
    Table { path: PathBuf },
}

fn default_contact_amplitude() -> f64 {
    0.2
}

impl InitialCondition {
    /// Reference solution when the data generate an exact smooth one.
    pub fn strong_solution(&self, length: f64) -> Option<TravelingContact> {
        match *self {
            InitialCondition::Contact { mean, amplitude, wavenumber, velocity, pressure } => {
                Some(TravelingContact { mean, amplitude, wavenumber, velocity, pressure, length })
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChiSection {
    /// Entropy shift of the battery; defaults to the minimum initial entropy.
    pub shift: Option<f64>,
    pub caps: Vec<f64>,
    pub width: f64,
    /// Non-monotone window `[lower, upper]` in `s`, monitored only.
    pub window: Option<[f64; 2]>,
}

impl Default for ChiSection {
    fn default() -> Self {
        ChiSection { shift: None, caps: ChiBattery::DEFAULT_CAPS.to_vec(), width: ChiBattery::DEFAULT_WIDTH, window: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoolingChoice {
    Reference,
    Pooled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    /// Coarse cells per axis, a divisor of `grid.n`; defaults to the largest divisor not above `n / 8`.
    pub coarse_n: Option<usize>,
    pub pooling: PoolingChoice,
    pub k_space: usize,
    pub k_time: usize,
    pub tolerances: Tolerances,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            coarse_n: None,
            pooling: PoolingChoice::Reference,
            k_space: DEFAULT_K_SPACE,
            k_time: DEFAULT_K_TIME,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NsSection {
    /// Defaults to `max(gamma, 4)`.
    pub beta: Option<f64>,
    pub mu: f64,
    pub eta: f64,
    /// Default to the extreme values of `Z/rho` on the initial data.
    pub c_star: Option<f64>,
    pub c_upper: Option<f64>,
}

impl Default for NsSection {
    fn default() -> Self {
        NsSection { beta: None, mu: 1.0, eta: 0.0, c_star: None, c_upper: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BrennerSection {
    pub kappa_coeff: f64,
    pub mu_coeff: f64,
    pub eta: f64,
    /// Defaults to the minimum initial entropy.
    pub s0: Option<f64>,
    pub mu_model: MuModel,
    pub smoothness_bound: f64,
}

impl Default for BrennerSection {
    fn default() -> Self {
        BrennerSection {
            kappa_coeff: 1.0,
            mu_coeff: 1.0,
            eta: 0.0,
            s0: None,
            mu_model: MuModel::Rho,
            smoothness_bound: DEFAULT_SMOOTHNESS_BOUND,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeakStrongSection {
    /// Compare against the exact solution of contact data.
    pub enabled: bool,
    /// Additive allowance of the Gronwall-shape fit.
    pub model_error: f64,
}

impl Default for WeakStrongSection {
    fn default() -> Self {
        WeakStrongSection { enabled: true, model_error: 0.0 }
    }
}

fn default_cfl() -> f64 {
    0.45
}

fn default_workers() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Model,
    #[serde(default)]
    pub gas: GasSection,
    #[serde(default)]
    pub grid: GridSection,
    pub ic: InitialCondition,
    /// Sweep values, strictly decreasing. Ignored by the Euler model.
    #[serde(default)]
    pub epsilons: Vec<f64>,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Defaults to `t_end / 20`.
    pub sample_dt: Option<f64>,
    #[serde(default)]
    pub chi: ChiSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub ns: NsSection,
    #[serde(default)]
    pub brenner: BrennerSection,
    #[serde(default)]
    pub weak_strong: WeakStrongSection,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn sample_dt(&self) -> f64 {
        self.sample_dt.unwrap_or(self.t_end / 20.0)
    }

    pub fn coarse_n(&self) -> usize {
        let n = self.grid.n;
        self.verify.coarse_n.unwrap_or_else(|| (1..=(n / 8).max(1)).rev().find(|d| n % d == 0).unwrap_or(1))
    }

    /// Sweep members; the Euler model has the single member `eps = 0`.
    pub fn member_epsilons(&self) -> Vec<f64> {
        if self.model == Model::Euler {
            vec![0.0]
        } else {
            self.epsilons.clone()
        }
    }

    /// Structural checks that do not need the initial data.
    pub fn validate(&self) -> Result<()> {
        self.gas.build()?;
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::config("t_end", format!("must be positive, got {}", self.t_end)));
        }
        let dt = self.sample_dt();
        if !(dt > 0.0 && dt <= self.t_end) {
            return Err(Error::config("sample_dt", format!("must lie in (0, t_end], got {dt}")));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::config("cfl", format!("must lie in (0, 1), got {}", self.cfl)));
        }
        if self.model != Model::Euler {
            if self.epsilons.is_empty() {
                return Err(Error::config("epsilons", "at least one value is required"));
            }
            if let Some(e) = self.epsilons.iter().find(|e| !(**e >= 0.0 && e.is_finite())) {
                return Err(Error::config("epsilons", format!("values must be nonnegative, got {e}")));
            }
            if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
                return Err(Error::config("epsilons", "values must be strictly decreasing"));
            }
        }
        if self.model != Model::Euler && self.grid.dim != 1 {
            return Err(Error::config("grid.dim", format!("{:?} runs are one-dimensional", self.model)));
        }
        if self.model == Model::Brenner && self.brenner.eta != 0.0 {
            return Err(Error::config("brenner.eta", format!("bulk viscosity must vanish, got {}", self.brenner.eta)));
        }
        if self.workers == 0 {
            return Err(Error::config("workers", "must be at least 1"));
        }
        if self.chi.width <= 0.0 || self.chi.caps.is_empty() {
            return Err(Error::config("chi", "need a positive width and at least one cap"));
        }
        let cn = self.coarse_n();
        if cn == 0 || self.grid.n % cn != 0 {
            return Err(Error::config("verify.coarse_n", format!("must divide grid.n = {}, got {cn}", self.grid.n)));
        }
        Ok(())
    }
}

/// Parses and validates a configuration, reporting the offending key path. The
/// initial data are sampled and checked against the model's admissibility conditions.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| Error::config("", e.to_string()))?;
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(if path == "." { String::new() } else { path }, e.into_inner().message().to_string())
    })?;
    config.validate()?;
    super::run::prepare(&config)?;
    Ok(config)
}
