//! Checks of the energy and multiplier identities, the Lyapunov functional,
//! and decay envelopes on computed trajectories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearities::{lipschitz_constant, FeedbackLaw, ForcingLaw};
use crate::solver::{make_initial, simulate, InitialKind, SolverConfig, Trajectory};
use crate::state_space::{
    dist_to_stationary_sq, energy_unchecked, FieldState, Grid,
};

pub const DEFAULT_SLACK: f64 = 1.05;
pub const ABSOLUTE_FLOOR: f64 = 1e-12;
/// Relative floor below which `{E − E_S}⁺` is not used in log fits.
pub const FIT_FLOOR: f64 = 1e-10;

/// Affine weight `ρ(x) = ρ(0) + ρ′x`, positive and increasing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightRho {
    pub rho0: f64,
    pub rho_l: f64,
    pub length: f64,
}

impl WeightRho {
    pub fn new(rho0: f64, rho_l: f64, length: f64) -> Result<Self> {
        if !(rho0 > 0.0 && rho_l > rho0 && rho_l.is_finite() && length > 0.0 && length.is_finite()) {
            return Err(Error::Contract(format!(
                "weight needs 0 < rho(0) < rho(L), got ({rho0}, {rho_l}) on length {length}"
            )));
        }
        Ok(Self { rho0, rho_l, length })
    }

    pub fn slope(&self) -> f64 {
        (self.rho_l - self.rho0) / self.length
    }

    pub fn at(&self, x: f64) -> f64 {
        self.rho0 + self.slope() * x
    }

    pub fn sup(&self) -> f64 {
        self.rho_l
    }
}

/// Exponential envelope `{E(t) − E_S}⁺ ≤ M·e^{−μt}·{E(0) − E_S}⁺`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayEnvelope {
    pub mu: f64,
    pub prefactor: f64,
    pub e_s: f64,
}

impl DecayEnvelope {
    pub fn rhs(&self, t: f64, e0: f64) -> f64 {
        self.prefactor * (-self.mu * t).exp() * (e0 - self.e_s).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub mu_obs: f64,
    pub m_obs: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub holds: bool,
    /// min over samples of `slack·RHS + floor − LHS`
    pub worst_margin: f64,
    pub worst_time: f64,
    /// max over samples with `RHS > 0` of `LHS / RHS`
    pub worst_ratio: f64,
}

/// `[E(τ) − E(0)] − ∫F(v₀)v₀ + ∫g(v_L)v_L` at every step, trapezoid in time,
/// with `E` the energy of the sampled state.
pub fn energy_identity_residual(traj: &Trajectory) -> Vec<f64> {
    let e0 = traj.energies.first().map_or(0.0, |e| e.total);
    let mut out = Vec::with_capacity(traj.traces.len());
    let mut work = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (tr, e) in traj.traces.iter().zip(&traj.energies) {
        let power = tr.f_of_v0 * tr.v0 - tr.g_of_vl * tr.v_l;
        if let Some((t_prev, p_prev)) = prev {
            work += 0.5 * (tr.t - t_prev) * (power + p_prev);
        }
        prev = Some((tr.t, power));
        out.push(e.total - e0 - work);
    }
    out
}

pub fn max_abs(series: &[f64]) -> f64 {
    series.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `∫2ρ v ∂x u` with cell-midpoint quadrature.
fn cross_term(u: &[f64], v: &[f64], rho: &WeightRho, grid: &Grid) -> f64 {
    let dx = grid.dx();
    (0..grid.n_cells())
        .map(|j| {
            let xm = grid.x(j) + 0.5 * dx;
            rho.at(xm) * (u[j + 1] - u[j]) * (v[j] + v[j + 1])
        })
        .sum()
}

/// Largest `|R(τ)|` over the stored snapshot times, where
/// `R(τ) = ∫2ρ v ∂x u |₀^τ + ∫∫ρ′(v² + |∂x u|²) − ∫[ρ(v² + |∂x u|²)]₀^L`.
/// Interior integrals use only the stored snapshots; boundary integrals use
/// the per-step traces.
pub fn multiplier_identity_residual(traj: &Trajectory, rho: &WeightRho) -> Result<f64> {
    let grid = &traj.grid;
    if (rho.length - grid.length()).abs() > 1e-12 * grid.length() {
        return Err(Error::Contract("weight length differs from grid length".into()));
    }
    let first = traj
        .snapshots
        .first()
        .ok_or_else(|| Error::Contract("trajectory has no snapshots".into()))?;
    if first.step != 0 {
        return Err(Error::Contract("first snapshot must be the initial step".into()));
    }

    let mut boundary_cum = Vec::with_capacity(traj.traces.len());
    let mut acc = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for tr in &traj.traces {
        let b = rho.rho_l * (tr.v_l * tr.v_l + tr.dxu_l * tr.dxu_l)
            - rho.rho0 * (tr.v0 * tr.v0 + tr.dxu0 * tr.dxu0);
        if let Some((tp, bp)) = prev {
            acc += 0.5 * (tr.t - tp) * (b + bp);
        }
        prev = Some((tr.t, b));
        boundary_cum.push(acc);
    }

    let slope = rho.slope();
    let interior = |s: &FieldState| {
        let e = energy_unchecked(&s.u, &s.v, grid);
        2.0 * slope * (e.potential + e.kinetic)
    };
    let c0 = cross_term(&first.state.u, &first.state.v, rho, grid);
    let mut i_prev = interior(&first.state);
    let mut t_prev = first.t;
    let mut interior_cum = 0.0;
    let mut worst = 0.0f64;
    for snap in &traj.snapshots[1..] {
        let i_now = interior(&snap.state);
        interior_cum += 0.5 * (snap.t - t_prev) * (i_now + i_prev);
        i_prev = i_now;
        t_prev = snap.t;
        let c = cross_term(&snap.state.u, &snap.state.v, rho, grid);
        let r = c - c0 + interior_cum - boundary_cum[snap.step];
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// `Γ_ρ = 𝓔 + ∫ρ ∂x u v`, cross term by midpoint quadrature.
pub fn lyapunov_gamma(state: &FieldState, rho: &WeightRho, grid: &Grid) -> Result<f64> {
    state.conforms(grid)?;
    let e = energy_unchecked(&state.u, &state.v, grid).total;
    Ok(e + 0.5 * cross_term(&state.u, &state.v, rho, grid))
}

/// Least-squares fit of `log{E(t) − E_S}⁺` against `t` for `t ≥ t_min`,
/// stopping at the first sample where `{E − E_S}⁺` falls below
/// `floor·{E(0) − E_S}⁺`.
pub fn fit_decay_rate(
    times: &[f64],
    energies: &[f64],
    e_s: f64,
    floor: f64,
    t_min: f64,
) -> Result<DecayFit> {
    if times.len() != energies.len() || times.is_empty() {
        return Err(Error::Contract("times and energies must be nonempty and aligned".into()));
    }
    let excess0 = (energies[0] - e_s).max(0.0);
    if excess0 <= 0.0 {
        return Err(Error::FitUnavailable("initial energy is not above E_S".into()));
    }
    let threshold = floor * excess0;
    let mut pts = Vec::new();
    for (&t, &e) in times.iter().zip(energies) {
        if t < t_min {
            continue;
        }
        let excess = e - e_s;
        if !(excess >= threshold && excess > 0.0) {
            break;
        }
        pts.push((t, excess.ln()));
    }
    if pts.len() < 2 {
        return Err(Error::FitUnavailable(format!(
            "{} usable samples after t = {t_min}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if stt <= 0.0 {
        return Err(Error::FitUnavailable("degenerate time window".into()));
    }
    let slope = sty / stt;
    let intercept = my - slope * mt;
    let r_squared = if syy > 0.0 { (sty * sty / (stt * syy)).min(1.0) } else { 1.0 };
    Ok(DecayFit {
        mu_obs: -slope,
        m_obs: intercept.exp() / excess0,
        r_squared,
        window: (pts[0].0, pts[pts.len() - 1].0),
        points: pts.len(),
    })
}

/// Pointwise check of `{E(t) − E_S}⁺ ≤ slack·M·e^{−μt}{E(0) − E_S}⁺ + 1e-12`.
pub fn check_decay_bound(
    times: &[f64],
    energies: &[f64],
    envelope: &DecayEnvelope,
    slack: f64,
) -> BoundReport {
    let e0 = energies.first().copied().unwrap_or(0.0);
    let mut report = BoundReport {
        holds: true,
        worst_margin: f64::INFINITY,
        worst_time: times.first().copied().unwrap_or(0.0),
        worst_ratio: 0.0,
    };
    for (&t, &e) in times.iter().zip(energies) {
        let lhs = (e - envelope.e_s).max(0.0);
        let rhs = envelope.rhs(t, e0);
        let margin = slack * rhs + ABSOLUTE_FLOOR - lhs;
        if margin < report.worst_margin {
            report.worst_margin = margin;
            report.worst_time = t;
        }
        if lhs > 0.0 && rhs > 0.0 {
            report.worst_ratio = report.worst_ratio.max(lhs / rhs);
        }
    }
    if !report.worst_margin.is_finite() {
        report.worst_margin = 0.0;
    }
    report.holds = report.worst_margin >= 0.0;
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryLimit {
    pub u_infinity: f64,
    pub converged: bool,
    pub distance: f64,
    pub sup_deviation: f64,
}

/// Constant the final state is closest to in the energy norm, and whether the
/// state has reached it within `threshold`.
pub fn stationary_limit(traj: &Trajectory, threshold: f64) -> Result<StationaryLimit> {
    let state = traj
        .snapshots
        .last()
        .ok_or_else(|| Error::Contract("trajectory has no snapshots".into()))?
        .state
        .clone();
    state.conforms(&traj.grid)?;
    let u_infinity = (traj.grid.trapezoid(&state.u) + state.u[0]) / (traj.grid.length() + 1.0);
    let distance = dist_to_stationary_sq(&state, &traj.grid).sqrt();
    let sup_deviation = state.u.iter().fold(0.0f64, |m, u| m.max((u - u_infinity).abs()));
    Ok(StationaryLimit {
        u_infinity,
        converged: distance <= threshold && sup_deviation <= threshold,
        distance,
        sup_deviation,
    })
}

/// Scenario template for basin probing; the initial amplitude is varied.
#[derive(Debug, Clone)]
pub struct BasinProbe {
    pub initial: InitialKind,
    pub g: FeedbackLaw,
    pub f: ForcingLaw,
    pub grid: Grid,
    pub solver: SolverConfig,
    pub envelope: DecayEnvelope,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasinEstimate {
    pub amplitude: f64,
    /// true when the estimate sits at an end of the searched range
    pub open: bool,
}

impl BasinProbe {
    /// Whether the run at `amplitude` stays under the envelope.
    pub fn decays(&self, amplitude: f64) -> Result<bool> {
        let init = make_initial(&self.initial.with_amplitude(amplitude), &self.grid)?.state;
        match simulate(&init, &self.g, &self.f, &self.grid, &self.solver) {
            Ok(traj) => {
                let e = traj.total_energies();
                Ok(check_decay_bound(&traj.times, &e, &self.envelope, DEFAULT_SLACK).holds)
            }
            Err(Error::BlowUp { .. }) | Err(Error::BoundarySolve { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    }
}

/// Bisection over the initial amplitude for the largest run that still obeys
/// the envelope. Purely empirical.
pub fn probe_stability_basin(
    probe: &BasinProbe,
    amplitude_range: (f64, f64),
    n_bisect: usize,
) -> Result<BasinEstimate> {
    let (lo0, hi0) = amplitude_range;
    if !(lo0 > 0.0 && hi0 > lo0 && hi0.is_finite()) {
        return Err(Error::Contract(format!("invalid amplitude range ({lo0}, {hi0})")));
    }
    let lip = lipschitz_constant(&probe.f)?;
    if lip.q_local >= 0.5 {
        return Err(Error::HypothesisViolated(format!(
            "local Lipschitz constant {} is not below 1/2",
            lip.q_local
        )));
    }
    if probe.decays(hi0)? {
        return Ok(BasinEstimate { amplitude: hi0, open: true });
    }
    if !probe.decays(lo0)? {
        return Ok(BasinEstimate { amplitude: 0.0, open: true });
    }
    let (mut lo, mut hi) = (lo0, hi0);
    for _ in 0..n_bisect {
        let mid = (lo * hi).sqrt();
        if probe.decays(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(BasinEstimate { amplitude: lo, open: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::GaussianProfile;

    #[test]
    fn weight_validation() {
        assert!(WeightRho::new(1.0, 2.0, 1.0).is_ok());
        assert!(WeightRho::new(0.0, 2.0, 1.0).is_err());
        assert!(WeightRho::new(2.0, 1.0, 1.0).is_err());
        let r = WeightRho::new(1.0, 3.0, 2.0).unwrap();
        assert_eq!(r.slope(), 1.0);
        assert_eq!(r.at(1.0), 2.0);
    }

    #[test]
    fn fit_exact_exponential() {
        let t: Vec<f64> = (0..200).map(|k| k as f64 * 0.1).collect();
        let e: Vec<f64> = t.iter().map(|t| 2.0 * (-0.5 * t).exp()).collect();
        let fit = fit_decay_rate(&t, &e, 0.0, FIT_FLOOR, 0.0).unwrap();
        assert!((fit.mu_obs - 0.5).abs() < 1e-12);
        assert!((fit.m_obs - 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);

        let shifted: Vec<f64> = e.iter().map(|x| 5.0 + x).collect();
        let fit = fit_decay_rate(&t, &shifted, 5.0, FIT_FLOOR, 0.0).unwrap();
        assert!((fit.mu_obs - 0.5).abs() < 1e-9);
    }

    #[test]
    fn fit_requires_window() {
        let t = [0.0, 1.0, 2.0];
        let e = [1.0, 0.5, 0.25];
        assert!(matches!(
            fit_decay_rate(&t, &e, 0.0, FIT_FLOOR, 5.0),
            Err(Error::FitUnavailable(_))
        ));
        assert!(fit_decay_rate(&t, &[0.0; 3], 0.0, FIT_FLOOR, 0.0).is_err());
    }

    #[test]
    fn bound_check_on_zero_and_violations() {
        let env = DecayEnvelope { mu: 1.0, prefactor: 1.0, e_s: 0.0 };
        let t = [0.0, 1.0, 2.0];
        let r = check_decay_bound(&t, &[0.0; 3], &env, DEFAULT_SLACK);
        assert!(r.holds);
        let r = check_decay_bound(&t, &[1.0, 0.5, 0.5], &env, DEFAULT_SLACK);
        assert!(!r.holds);
        assert_eq!(r.worst_time, 2.0);
    }

    #[test]
    fn gamma_equals_energy_without_velocity() {
        let grid = Grid::new(1.0, 32).unwrap();
        let rho = WeightRho::new(0.5, 0.9, 1.0).unwrap();
        let s = FieldState::new(grid.nodes().iter().map(|x| x.sin()).collect(), vec![0.0; 33]).unwrap();
        let e = energy_unchecked(&s.u, &s.v, &grid).total;
        assert_eq!(lyapunov_gamma(&s, &rho, &grid).unwrap(), e);
        assert_eq!(lyapunov_gamma(&FieldState::zeros(&grid), &rho, &grid).unwrap(), 0.0);
    }

    #[test]
    fn identities_vanish_on_constant_trajectory() {
        let grid = Grid::new(1.0, 50).unwrap();
        let traj = simulate(
            &FieldState::constant(&grid, 1.5),
            &FeedbackLaw::identity(),
            &ForcingLaw::TanhAntidamping { q: 0.2 },
            &grid,
            &SolverConfig::with_t_final(1.0),
        )
        .unwrap();
        assert_eq!(max_abs(&energy_identity_residual(&traj)), 0.0);
        let rho = WeightRho::new(1.0, 2.0, 1.0).unwrap();
        assert!(multiplier_identity_residual(&traj, &rho).unwrap() <= 1e-13);
        let lim = stationary_limit(&traj, 1e-12).unwrap();
        assert!(lim.converged);
        assert!((lim.u_infinity - 1.5).abs() < 1e-14);
    }

    #[test]
    fn basin_rejects_large_local_slope() {
        let grid = Grid::new(1.0, 40).unwrap();
        let probe = BasinProbe {
            initial: InitialKind::GaussianBump(GaussianProfile { amplitude: 1.0, center: 0.5, width: 0.1 }),
            g: FeedbackLaw::identity(),
            f: ForcingLaw::TanhAntidamping { q: 0.6 },
            grid,
            solver: SolverConfig::with_t_final(1.0),
            envelope: DecayEnvelope { mu: 0.1, prefactor: 2.0, e_s: 0.0 },
        };
        assert!(matches!(
            probe_stability_basin(&probe, (0.1, 1.0), 4),
            Err(Error::HypothesisViolated(_))
        ));
    }
}
