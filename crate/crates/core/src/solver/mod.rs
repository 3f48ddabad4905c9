//! Time-domain integration of the wave equation with a dynamic boundary at
//! `x = 0` and nonlinear Neumann feedback at `x = L`.
//!
//! Interior nodes use the three-level leapfrog stencil. Both boundaries are
//! closed with a centered ghost point which, once eliminated through the wave
//! equation at the boundary node, leaves a lumped mass: `1 + dx/2` at `x = 0`
//! (the boundary's own inertia plus half a cell) and `dx/2` at `x = L`. The
//! boundary laws are evaluated at the centered velocity
//! `(uⁿ⁺¹ − uⁿ⁻¹)/(2dt)`, which makes each boundary update a scalar implicit
//! equation.
//!
//! With these masses the scheme conserves the staggered energy
//! `½‖δ‖²_M − (dt²/8)a(δ, δ) + ½a(ū, ū)` (with `δ = (uⁿ⁺¹ − uⁿ)/dt`,
//! `ū = (uⁿ⁺¹ + uⁿ)/2`) up to exactly the boundary work
//! `dt·{F(v₀)v₀ − g(v_N)v_N}`. Energies reported at integer steps are the mean
//! of the two adjacent staggered values, which turns the discrete balance into
//! the trapezoid rule in time.

mod boundary;
mod initial;
mod oracle;

pub use boundary::{solve_left, solve_right, ScalarRoot, SolveFailure};
pub use initial::{make_initial, GaussianProfile, InitialData, InitialKind};
pub use oracle::{characteristics_oracle, check_transparent_case, oracle_energy};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearities::{lipschitz_constant, FeedbackLaw, ForcingLaw};
use crate::state_space::{energy_unchecked, stiffness_unchecked, EnergyBreakdown, FieldState, Grid};

/// Abort threshold on `max|u|`.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

/// Closure at `x = 0`. `Neumann` replaces the dynamic condition by
/// `∂x u(0) = 0` and ignores `F`; it exists for conservation checks of the
/// interior scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeftBoundary {
    #[default]
    Dynamic,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub cfl_lambda: f64,
    pub t_final: f64,
    pub boundary_tol: f64,
    pub boundary_max_iter: usize,
    pub sample_stride: usize,
    pub left_boundary: LeftBoundary,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            cfl_lambda: 0.9,
            t_final: 1.0,
            boundary_tol: 1e-12,
            boundary_max_iter: 100,
            sample_stride: 1,
            left_boundary: LeftBoundary::Dynamic,
        }
    }
}

impl SolverConfig {
    pub fn with_t_final(t_final: f64) -> Self {
        Self { t_final, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_lambda > 0.0 && self.cfl_lambda <= 1.0) {
            return Err(Error::Contract(format!(
                "cfl_lambda must lie in (0, 1], got {}",
                self.cfl_lambda
            )));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::Contract(format!("t_final must be positive, got {}", self.t_final)));
        }
        if !(self.boundary_tol > 0.0) || self.boundary_max_iter == 0 || self.sample_stride == 0 {
            return Err(Error::Contract(
                "boundary_tol, boundary_max_iter and sample_stride must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Number of steps and the step size actually used: `dt ≤ λ·dx`, adjusted
    /// so that an integer number of steps lands on `t_final`.
    pub fn time_grid(&self, grid: &Grid) -> (usize, f64) {
        let nominal = self.cfl_lambda * grid.dx();
        let steps = ((self.t_final / nominal) - 1e-9).ceil().max(1.0) as usize;
        (steps, self.t_final / steps as f64)
    }
}

/// Boundary data at one time level.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: f64,
    pub u0: f64,
    pub v0: f64,
    pub dxu0: f64,
    pub v_l: f64,
    pub dxu_l: f64,
    pub g_of_vl: f64,
    pub f_of_v0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub state: FieldState,
}

/// Output of a run: per-step times, energies and traces; sampled states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub grid: Grid,
    pub dt: f64,
    pub times: Vec<f64>,
    /// energy of the sampled state `(uⁿ, vⁿ)` with centered velocity
    pub energies: Vec<EnergyBreakdown>,
    /// mean of the two adjacent staggered energies; satisfies the discrete
    /// balance with the trapezoid rule in time exactly
    pub scheme_energies: Vec<f64>,
    pub traces: Vec<TraceRecord>,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn total_energies(&self) -> Vec<f64> {
        self.energies.iter().map(|e| e.total).collect()
    }

    pub fn final_state(&self) -> &FieldState {
        &self.snapshots.last().expect("trajectory has at least one snapshot").state
    }

    pub fn initial_energy(&self) -> f64 {
        self.energies[0].total
    }
}

/// Boundary velocities produced by one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub v0: f64,
    pub v_l: f64,
    pub residual_l: f64,
}

/// One leapfrog step `(uⁿ⁻¹, uⁿ) ↦ uⁿ⁺¹` with fixed laws and step size.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    grid: Grid,
    g: &'a FeedbackLaw,
    f: &'a ForcingLaw,
    q_forcing: f64,
    dt: f64,
    lambda: f64,
    left_mass: f64,
    point_mass: f64,
    tol: f64,
    max_iter: usize,
    left: LeftBoundary,
}

impl<'a> Stepper<'a> {
    pub fn new(
        grid: &Grid,
        g: &'a FeedbackLaw,
        f: &'a ForcingLaw,
        dt: f64,
        config: &SolverConfig,
    ) -> Result<Self> {
        g.validate()?;
        f.validate()?;
        let lambda = dt / grid.dx();
        if !(lambda > 0.0 && lambda <= 1.0 + 1e-12) {
            return Err(Error::Contract(format!("CFL violated: dt/dx = {lambda}")));
        }
        let q_forcing = lipschitz_constant(f)?.q_global.unwrap_or(f64::INFINITY);
        let point_mass = match config.left_boundary {
            LeftBoundary::Dynamic => 1.0,
            LeftBoundary::Neumann => 0.0,
        };
        let left_mass = point_mass + 0.5 * grid.dx();
        if config.left_boundary == LeftBoundary::Dynamic && dt * q_forcing / 2.0 > 0.5 {
            return Err(Error::Contract(format!(
                "dt·q/2 = {} exceeds 0.5; left boundary fixed point would not contract",
                dt * q_forcing / 2.0
            )));
        }
        Ok(Self {
            grid: *grid,
            g,
            f,
            q_forcing,
            dt,
            lambda,
            left_mass,
            point_mass,
            tol: config.boundary_tol,
            max_iter: config.boundary_max_iter,
            left: config.left_boundary,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Writes `uⁿ⁺¹` into `next`. `guesses` are the previous boundary
    /// velocities, used to warm-start the scalar solves.
    pub fn step(
        &self,
        prev: &[f64],
        curr: &[f64],
        next: &mut [f64],
        guesses: (f64, f64),
        t: f64,
    ) -> Result<StepOutcome> {
        let n = self.grid.n_cells();
        let dx = self.grid.dx();
        let dt = self.dt;
        let l2 = self.lambda * self.lambda;
        for j in 1..n {
            next[j] = 2.0 * curr[j] - prev[j] + l2 * (curr[j + 1] - 2.0 * curr[j] + curr[j - 1]);
        }

        let base0 = 2.0 * curr[0] - prev[0] + dt * dt * ((curr[1] - curr[0]) / dx) / self.left_mass;
        let a0 = (base0 - prev[0]) / (2.0 * dt);
        let v0 = match self.left {
            LeftBoundary::Neumann => a0,
            LeftBoundary::Dynamic => {
                let b0 = dt / (2.0 * self.left_mass);
                solve_left(self.f, self.q_forcing, a0, b0, guesses.0, self.tol, self.max_iter)
                    .map_err(|e| Error::BoundarySolve { t, detail: e.detail })?
                    .value
            }
        };
        next[0] = prev[0] + 2.0 * dt * v0;

        let c = (curr[n] - prev[n]) / dt + self.lambda * (curr[n - 1] - curr[n]) / dx;
        let right = solve_right(self.g, self.lambda, c, guesses.1, self.tol * self.lambda, self.max_iter)
            .map_err(|e| Error::BoundarySolve { t, detail: e.detail })?;
        next[n] = prev[n] + 2.0 * dt * right.value;

        Ok(StepOutcome {
            v0,
            v_l: right.value,
            residual_l: right.residual,
        })
    }

    /// Initial acceleration used by the Taylor seed of `u⁻¹`.
    fn acceleration(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.grid.n_cells();
        let dx = self.grid.dx();
        let mut acc = vec![0.0; n + 1];
        for j in 1..n {
            acc[j] = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (dx * dx);
        }
        let forcing = match self.left {
            LeftBoundary::Dynamic => self.f.eval(v[0]),
            LeftBoundary::Neumann => 0.0,
        };
        acc[0] = ((u[1] - u[0]) / dx + forcing) / self.left_mass;
        acc[n] = ((u[n - 1] - u[n]) / dx - self.g.eval(v[n])) / (0.5 * dx);
        acc
    }

    /// Staggered energy between levels `curr` and `next`.
    fn half_step_energy(&self, curr: &[f64], next: &[f64]) -> EnergyBreakdown {
        let dt = self.dt;
        let dx = self.grid.dx();
        let delta: Vec<f64> = next.iter().zip(curr).map(|(a, b)| (a - b) / dt).collect();
        let mean: Vec<f64> = next.iter().zip(curr).map(|(a, b)| 0.5 * (a + b)).collect();
        let potential = 0.5 * stiffness_unchecked(&mean, &mean, dx);
        let kinetic = 0.5
            * (self.grid.trapezoid_product(&delta, &delta)
                - 0.25 * dt * dt * stiffness_unchecked(&delta, &delta, dx));
        let boundary = 0.5 * self.point_mass * delta[0] * delta[0];
        EnergyBreakdown::new(potential, kinetic.max(0.0), boundary)
    }
}

/// Callback receiving `(step, t, uⁿ, vⁿ)` at every time level.
pub type StepObserver<'o> = dyn FnMut(usize, f64, &[f64], &[f64]) + 'o;

pub fn simulate(
    initial: &FieldState,
    g: &FeedbackLaw,
    f: &ForcingLaw,
    grid: &Grid,
    config: &SolverConfig,
) -> Result<Trajectory> {
    simulate_observed(initial, g, f, grid, config, &mut |_, _, _, _| {})
}

/// Runs to `t_final`, calling `observer` with every full state. Energies and
/// traces are recorded at every step, states every `sample_stride` steps and
/// at the final step.
pub fn simulate_observed(
    initial: &FieldState,
    g: &FeedbackLaw,
    f: &ForcingLaw,
    grid: &Grid,
    config: &SolverConfig,
    observer: &mut StepObserver<'_>,
) -> Result<Trajectory> {
    config.validate()?;
    initial.conforms(grid)?;
    let (steps, dt) = config.time_grid(grid);
    let stepper = Stepper::new(grid, g, f, dt, config)?;
    let n = grid.n_cells();
    let dx = grid.dx();

    let acc = stepper.acceleration(&initial.u, &initial.v);
    let mut prev: Vec<f64> = (0..=n)
        .map(|j| initial.u[j] - dt * initial.v[j] + 0.5 * dt * dt * acc[j])
        .collect();
    let mut curr = initial.u.clone();
    let mut next = vec![0.0; n + 1];
    let mut velocity = vec![0.0; n + 1];

    let mut trajectory = Trajectory {
        grid: *grid,
        dt,
        times: Vec::with_capacity(steps + 1),
        energies: Vec::with_capacity(steps + 1),
        scheme_energies: Vec::with_capacity(steps + 1),
        traces: Vec::with_capacity(steps + 1),
        snapshots: Vec::new(),
    };
    let mut stagger_before = stepper.half_step_energy(&prev, &curr);
    let mut guesses = (initial.v[0], initial.v[n]);

    for step in 0..=steps {
        let t = step as f64 * dt;
        let out = stepper.step(&prev, &curr, &mut next, guesses, t)?;
        guesses = (out.v0, out.v_l);

        let peak = next.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !(peak <= BLOW_UP_THRESHOLD) {
            return Err(Error::BlowUp { t: t + dt, max_abs: peak });
        }

        for j in 0..=n {
            velocity[j] = (next[j] - prev[j]) / (2.0 * dt);
        }
        velocity[0] = out.v0;
        velocity[n] = out.v_l;

        let stagger_after = stepper.half_step_energy(&curr, &next);
        trajectory.times.push(t);
        trajectory
            .scheme_energies
            .push(0.5 * (stagger_before.total + stagger_after.total));
        let mut snapshot_energy = energy_unchecked(&curr, &velocity, grid);
        if stepper.point_mass == 0.0 {
            snapshot_energy = EnergyBreakdown::new(snapshot_energy.potential, snapshot_energy.kinetic, 0.0);
        }
        trajectory.energies.push(snapshot_energy);
        stagger_before = stagger_after;

        // ghost-point centered differences, written through the boundary
        // equations: ∂x u(0) = (u₁ − u₀)/dx − (dx/2)·ü₀ and
        // ∂x u(L) = (u_N − u_{N−1})/dx + (dx/2)·ü_N
        let acc0 = 2.0 * (out.v0 - (curr[0] - prev[0]) / dt) / dt;
        let dxu0 = match config.left_boundary {
            LeftBoundary::Dynamic => (curr[1] - curr[0]) / dx - 0.5 * dx * acc0,
            LeftBoundary::Neumann => 0.0,
        };
        let dxu_l = (curr[n] - curr[n - 1]) / dx
            + (out.v_l - (curr[n] - prev[n]) / dt) / stepper.lambda;
        let f_of_v0 = match config.left_boundary {
            LeftBoundary::Dynamic => f.eval(out.v0),
            LeftBoundary::Neumann => 0.0,
        };
        trajectory.traces.push(TraceRecord {
            t,
            u0: curr[0],
            v0: out.v0,
            dxu0,
            v_l: out.v_l,
            dxu_l,
            g_of_vl: g.eval(out.v_l),
            f_of_v0,
        });

        observer(step, t, &curr, &velocity);
        if step % config.sample_stride == 0 || step == steps {
            trajectory.snapshots.push(Snapshot {
                step,
                t,
                state: FieldState {
                    u: curr.clone(),
                    v: velocity.clone(),
                },
            });
        }

        std::mem::swap(&mut prev, &mut curr);
        std::mem::swap(&mut curr, &mut next);
    }
    Ok(trajectory)
}
