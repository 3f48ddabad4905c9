//! Exact solution of the transparent linear case by characteristics.

use super::{GaussianProfile, InitialKind};
use crate::error::{Error, Result};
use crate::nonlinearities::{FeedbackLaw, ForcingLaw};
use crate::state_space::{energy, FieldState, Grid};

/// Profile values at the domain ends must be below this fraction of the
/// amplitude for the left boundary to stay at rest.
const SUPPORT_TOL: f64 = 1e-10;

/// Checks that `(g, F, initial)` is a case the oracle solves exactly:
/// `g = id`, `F = 0`, a right-moving pulse supported inside `(0, L)`.
pub fn check_transparent_case(
    g: &FeedbackLaw,
    f: &ForcingLaw,
    initial: &InitialKind,
    grid: &Grid,
) -> Result<GaussianProfile> {
    let unit_gain = match g {
        FeedbackLaw::LinearGain { gain } => *gain == 1.0,
        _ => false,
    };
    let zero_forcing = match f {
        ForcingLaw::Zero => true,
        ForcingLaw::Linear { slope } => *slope == 0.0,
        _ => false,
    };
    if !unit_gain || !zero_forcing {
        return Err(Error::Contract(
            "characteristics oracle needs g = identity and F = zero".into(),
        ));
    }
    let InitialKind::RightMovingPulse(p) = *initial else {
        return Err(Error::Contract(
            "characteristics oracle needs right_moving_pulse initial data".into(),
        ));
    };
    check_support(&p, grid)?;
    Ok(p)
}

fn check_support(p: &GaussianProfile, grid: &Grid) -> Result<()> {
    let limit = SUPPORT_TOL * p.amplitude.abs();
    let ends = [p.value(0.0), p.value(grid.length()), p.slope(0.0), p.slope(grid.length())];
    if !(p.width > 0.0) || ends.iter().any(|e| e.abs() > limit) {
        return Err(Error::Contract(format!(
            "pulse {p:?} is not negligible at the boundaries"
        )));
    }
    Ok(())
}

/// `u(x, t) = w(x − t)`, `v = −w′(x − t)`, with `w` frozen at its value at
/// `0` for arguments left of the domain (nothing enters from `x = 0`).
pub fn characteristics_oracle(profile: &GaussianProfile, grid: &Grid, t: f64) -> Result<FieldState> {
    check_support(profile, grid)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Contract(format!("oracle time must be nonnegative, got {t}")));
    }
    let mut u = Vec::with_capacity(grid.n_nodes());
    let mut v = Vec::with_capacity(grid.n_nodes());
    for x in grid.nodes() {
        let xi = x - t;
        if xi >= 0.0 {
            u.push(profile.value(xi));
            v.push(-profile.slope(xi));
        } else {
            u.push(profile.value(0.0));
            v.push(0.0);
        }
    }
    FieldState::new(u, v)
}

/// Discrete energy of the oracle state.
pub fn oracle_energy(profile: &GaussianProfile, grid: &Grid, t: f64) -> Result<f64> {
    Ok(energy(&characteristics_oracle(profile, grid, t)?, grid)?.total)
}
