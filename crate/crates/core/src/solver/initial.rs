use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::state_space::{FieldState, Grid};

/// Boundary samples above this fraction of the amplitude raise the warning flag.
const BOUNDARY_WARN_FRACTION: f64 = 1e-6;

/// Gaussian profile `A·exp(−(x − x₀)²/w²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianProfile {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl GaussianProfile {
    pub fn value(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.width;
        self.amplitude * (-z * z).exp()
    }

    pub fn slope(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.width;
        -2.0 * z / self.width * self.amplitude * (-z * z).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialKind {
    /// `u = w(x)`, `v = 0`
    GaussianBump(GaussianProfile),
    /// `u = w(x)`, `v = −w′(x)`: translates rightward at unit speed
    RightMovingPulse(GaussianProfile),
    /// `u = A·sin(mπx/L)`, `v = 0`
    SineMode { amplitude: f64, mode: u32 },
    ConstantOffset { value: f64 },
}

impl InitialKind {
    pub fn amplitude(&self) -> f64 {
        match self {
            InitialKind::GaussianBump(p) | InitialKind::RightMovingPulse(p) => p.amplitude,
            InitialKind::SineMode { amplitude, .. } => *amplitude,
            InitialKind::ConstantOffset { value } => *value,
        }
    }

    /// Same shape with the amplitude replaced.
    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        let mut out = *self;
        match &mut out {
            InitialKind::GaussianBump(p) | InitialKind::RightMovingPulse(p) => p.amplitude = amplitude,
            InitialKind::SineMode { amplitude: a, .. } => *a = amplitude,
            InitialKind::ConstantOffset { value } => *value = amplitude,
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub state: FieldState,
    /// set when a pulse is not negligible at a boundary node
    pub boundary_warning: bool,
}

pub fn make_initial(kind: &InitialKind, grid: &Grid) -> Result<InitialData> {
    let x = grid.nodes();
    let (u, v): (Vec<f64>, Vec<f64>) = match *kind {
        InitialKind::GaussianBump(p) => {
            check_profile(&p)?;
            (x.iter().map(|&x| p.value(x)).collect(), vec![0.0; x.len()])
        }
        InitialKind::RightMovingPulse(p) => {
            check_profile(&p)?;
            (
                x.iter().map(|&x| p.value(x)).collect(),
                x.iter().map(|&x| -p.slope(x)).collect(),
            )
        }
        InitialKind::SineMode { amplitude, mode } => {
            if mode == 0 {
                return Err(Error::Contract("sine_mode needs m >= 1".into()));
            }
            let k = mode as f64 * PI / grid.length();
            (x.iter().map(|&x| amplitude * (k * x).sin()).collect(), vec![0.0; x.len()])
        }
        InitialKind::ConstantOffset { value } => (vec![value; x.len()], vec![0.0; x.len()]),
    };
    let boundary_warning = match kind {
        InitialKind::GaussianBump(p) | InitialKind::RightMovingPulse(p) => {
            let n = u.len() - 1;
            let limit = BOUNDARY_WARN_FRACTION * p.amplitude.abs();
            [u[0], u[n], v[0], v[n]].iter().any(|b| b.abs() > limit)
        }
        _ => false,
    };
    Ok(InitialData {
        state: FieldState::new(u, v)?,
        boundary_warning,
    })
}

fn check_profile(p: &GaussianProfile) -> Result<()> {
    if !(p.amplitude.is_finite() && p.center.is_finite() && p.width.is_finite() && p.width > 0.0) {
        return Err(Error::Contract(format!("invalid pulse parameters {p:?}")));
    }
    Ok(())
}
