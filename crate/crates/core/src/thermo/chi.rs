//! Entropy renormalization functions `chi`.
//!
//! Admissible members of the test battery are non-decreasing, concave and
//! bounded above by a finite cap. A window-shaped `chi` (zero on an interval,
//! linear decay outside) is concave and capped but not monotone; it is kept as a
//! separate kind that is only used for drift monitoring.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Validation samples `chi` on `[-R, R]` with this step.
pub const CHI_SAMPLE_RANGE: f64 = 20.0;
pub const CHI_SAMPLE_STEP: f64 = 1e-2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChiKind {
    /// `min(s - shift, cap)`.
    Truncation { shift: f64, cap: f64 },
    /// Truncation with a quadratic blend of total width `width` centred on the kink.
    SmoothTruncation { shift: f64, cap: f64, width: f64 },
    /// `-(lower - s)_+ - (s - upper)_+`.
    Window { lower: f64, upper: f64 },
    /// Piecewise-linear interpolation of `(s, chi)` knots, extended linearly.
    Table { knots: Vec<[f64; 2]> },
}

/// A validated renormalization function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSpec {
    kind: ChiKind,
    cap: f64,
    monotone: bool,
}

/// Shape requested from [`build_chi`].
pub enum ChiCandidate<'a> {
    Truncation,
    SmoothTruncation { width: f64 },
    Window { lower: f64, upper: f64 },
    /// Arbitrary function of `s - shift`, tabulated on the validation grid.
    Custom(&'a dyn Fn(f64) -> f64),
}

/// Validates a candidate and returns the corresponding [`ChiSpec`].
///
/// Windows are accepted as non-monotone; every other candidate must be
/// non-decreasing. All candidates must be concave and stay below the finite `cap`.
pub fn build_chi(candidate: ChiCandidate<'_>, shift: f64, cap: f64) -> Result<ChiSpec> {
    if !cap.is_finite() {
        return Err(Error::InadmissibleChi(format!("unbounded above: cap must be finite, got {cap}")));
    }
    if !shift.is_finite() {
        return Err(Error::InadmissibleChi(format!("shift must be finite, got {shift}")));
    }
    let (kind, monotone) = match candidate {
        ChiCandidate::Truncation => (ChiKind::Truncation { shift, cap }, true),
        ChiCandidate::SmoothTruncation { width } => {
            if !(width.is_finite() && width > 0.0) {
                return Err(Error::InadmissibleChi(format!("blend width must be positive, got {width}")));
            }
            (ChiKind::SmoothTruncation { shift, cap, width }, true)
        }
        ChiCandidate::Window { lower, upper } => {
            if !(lower.is_finite() && upper.is_finite() && lower <= upper) {
                return Err(Error::InadmissibleChi(format!("window [{lower}, {upper}] is not an interval")));
            }
            (ChiKind::Window { lower, upper }, false)
        }
        ChiCandidate::Custom(f) => {
            let knots: Vec<[f64; 2]> = sample_grid().map(|s| [s, f(s - shift)]).collect();
            if knots.iter().any(|k| !k[1].is_finite()) {
                return Err(Error::InadmissibleChi("candidate is not finite on the sample range".into()));
            }
            (ChiKind::Table { knots }, true)
        }
    };
    let spec = ChiSpec { kind, cap, monotone };
    spec.validate()?;
    Ok(spec)
}

fn sample_grid() -> impl Iterator<Item = f64> {
    let n = (2.0 * CHI_SAMPLE_RANGE / CHI_SAMPLE_STEP).round() as usize;
    (0..=n).map(move |j| -CHI_SAMPLE_RANGE + j as f64 * CHI_SAMPLE_STEP)
}

impl ChiSpec {
    pub fn identity_truncation(cap: f64) -> Result<Self> {
        build_chi(ChiCandidate::Truncation, 0.0, cap)
    }

    pub fn kind(&self) -> &ChiKind {
        &self.kind
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// Whether this member may be used in the entropy-inequality clause.
    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn eval(&self, s: f64) -> f64 {
        match &self.kind {
            ChiKind::Truncation { shift, cap } => (s - shift).min(*cap),
            ChiKind::SmoothTruncation { shift, cap, width } => {
                let (x, k, w) = (s - shift, *cap, 0.5 * width);
                if x <= k - w {
                    x
                } else if x >= k + w {
                    k
                } else {
                    let d = x - k + w;
                    x - d * d / (4.0 * w)
                }
            }
            ChiKind::Window { lower, upper } => -(lower - s).max(0.0) - (s - upper).max(0.0),
            ChiKind::Table { knots } => {
                let j = table_segment(knots, s);
                let ([s0, c0], [s1, c1]) = (knots[j], knots[j + 1]);
                (c0 + (c1 - c0) * (s - s0) / (s1 - s0)).min(self.cap)
            }
        }
    }

    /// Derivative; at kinks the left derivative of the concave function.
    pub fn deriv(&self, s: f64) -> f64 {
        match &self.kind {
            ChiKind::Truncation { shift, cap } => {
                if s - shift < *cap {
                    1.0
                } else {
                    0.0
                }
            }
            ChiKind::SmoothTruncation { shift, cap, width } => {
                let (x, k, w) = (s - shift, *cap, 0.5 * width);
                if x <= k - w {
                    1.0
                } else if x >= k + w {
                    0.0
                } else {
                    1.0 - (x - k + w) / (2.0 * w)
                }
            }
            ChiKind::Window { lower, upper } => {
                if s <= *lower {
                    1.0
                } else if s <= *upper {
                    0.0
                } else {
                    -1.0
                }
            }
            ChiKind::Table { .. } if self.eval(s) >= self.cap => 0.0,
            ChiKind::Table { knots } => {
                let j = table_segment(knots, s);
                (knots[j + 1][1] - knots[j][1]) / (knots[j + 1][0] - knots[j][0])
            }
        }
    }

    /// Second derivative away from kinks.
    pub fn second_deriv(&self, s: f64) -> f64 {
        match &self.kind {
            ChiKind::SmoothTruncation { shift, cap, width } => {
                let (x, k, w) = (s - shift, *cap, 0.5 * width);
                if x > k - w && x < k + w {
                    -1.0 / (2.0 * w)
                } else {
                    0.0
                }
            }
            _ => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let grid: Vec<f64> = sample_grid().collect();
        let vals: Vec<f64> = grid.iter().map(|&s| self.eval(s)).collect();
        let tol = |v: f64| 1e-12 * (1.0 + v.abs());
        if let ChiKind::Table { knots } = &self.kind {
            if let Some(k) = knots.iter().find(|k| k[1] > self.cap + tol(self.cap)) {
                return Err(Error::InadmissibleChi(format!(
                    "chi({}) = {} exceeds the cap {}",
                    k[0], k[1], self.cap
                )));
            }
        }
        for (j, &v) in vals.iter().enumerate() {
            if v > self.cap + tol(self.cap) {
                return Err(Error::InadmissibleChi(format!(
                    "chi({}) = {v} exceeds the cap {}",
                    grid[j], self.cap
                )));
            }
        }
        if self.monotone {
            for j in 1..vals.len() {
                if vals[j] < vals[j - 1] - tol(vals[j - 1]) || self.deriv(grid[j]) < -1e-12 {
                    return Err(Error::InadmissibleChi(format!("not non-decreasing near s = {}", grid[j])));
                }
            }
        }
        for stride in [1usize, 25, 200] {
            for j in stride..vals.len().saturating_sub(stride) {
                let mid = 0.5 * (vals[j - stride] + vals[j + stride]);
                if vals[j] < mid - tol(mid) {
                    return Err(Error::InadmissibleChi(format!("not concave near s = {}", grid[j])));
                }
            }
        }
        Ok(())
    }
}

fn table_segment(knots: &[[f64; 2]], s: f64) -> usize {
    let last = knots.len() - 2;
    match knots.binary_search_by(|k| k[0].total_cmp(&s)) {
        Ok(j) => j.min(last),
        Err(0) => 0,
        Err(j) => (j - 1).min(last),
    }
}

impl fmt::Display for ChiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ChiKind::Truncation { shift, cap } => write!(f, "truncation(shift={shift},cap={cap})"),
            ChiKind::SmoothTruncation { shift, cap, width } => {
                write!(f, "smooth-truncation(shift={shift},cap={cap},width={width})")
            }
            ChiKind::Window { lower, upper } => write!(f, "window({lower},{upper})"),
            ChiKind::Table { knots } => write!(f, "table({} knots,cap={})", knots.len(), self.cap),
        }
    }
}

/// The family of `chi` used by the verifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiBattery {
    members: Vec<ChiSpec>,
}

impl ChiBattery {
    pub const DEFAULT_CAPS: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];
    pub const DEFAULT_WIDTH: f64 = 1e-3;

    /// Smooth truncations at the given caps around `shift`, plus an optional window.
    pub fn standard(shift: f64, caps: &[f64], width: f64, window: Option<(f64, f64)>) -> Result<Self> {
        let mut members = caps
            .iter()
            .map(|&k| build_chi(ChiCandidate::SmoothTruncation { width }, shift, k))
            .collect::<Result<Vec<_>>>()?;
        if let Some((lower, upper)) = window {
            members.push(build_chi(ChiCandidate::Window { lower, upper }, 0.0, 0.0)?);
        }
        Ok(ChiBattery { members })
    }

    pub fn default_for(shift: f64) -> Self {
        Self::standard(shift, &Self::DEFAULT_CAPS, Self::DEFAULT_WIDTH, None)
            .expect("default battery is admissible")
    }

    pub fn from_members(members: Vec<ChiSpec>) -> Self {
        ChiBattery { members }
    }

    pub fn members(&self) -> &[ChiSpec] {
        &self.members
    }

    pub fn monotone(&self) -> impl Iterator<Item = &ChiSpec> {
        self.members.iter().filter(|c| c.is_monotone())
    }

    pub fn window(&self) -> Option<&ChiSpec> {
        self.members.iter().find(|c| !c.is_monotone())
    }
}
