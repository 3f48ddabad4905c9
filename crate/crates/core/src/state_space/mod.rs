//! Discrete energy space `V × H`.
//!
//! A state is the pair `[u, v]` sampled on a uniform grid of `N + 1` nodes.
//! The boundary velocity `θ = ∂t u(0)` is stored as `v[0]` and enters every
//! `H`-norm twice: once through the trapezoid `L²` term and once as the
//! separate scalar component. Displacement norms likewise carry the point
//! evaluation `u(0)`.
//!
//! Quadrature: trapezoid rule for `L²` products, cell differences (midpoint
//! rule) for the stiffness form `a(·,·)`. Both match the finite-difference
//! solver's discrete energy.

mod pencil;

pub use pencil::EnergyPencil;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on `(0, L)` with nodes `x_j = j·dx`, `j = 0..=N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    length: f64,
    n_cells: usize,
    dx: f64,
}

#[derive(Serialize, Deserialize)]
struct GridSpec {
    length: f64,
    n_cells: usize,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;

    fn try_from(spec: GridSpec) -> Result<Self> {
        Grid::new(spec.length, spec.n_cells)
    }
}

impl From<Grid> for GridSpec {
    fn from(grid: Grid) -> Self {
        GridSpec {
            length: grid.length,
            n_cells: grid.n_cells,
        }
    }
}

impl Grid {
    pub const MIN_CELLS: usize = 4;

    pub fn new(length: f64, n_cells: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Contract(format!(
                "grid length must be positive and finite, got {length}"
            )));
        }
        if n_cells < Self::MIN_CELLS {
            return Err(Error::Contract(format!(
                "grid needs at least {} cells, got {n_cells}",
                Self::MIN_CELLS
            )));
        }
        Ok(Self {
            length,
            n_cells,
            dx: length / n_cells as f64,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|j| self.x(j)).collect()
    }

    /// Trapezoid weight of node `j`.
    pub fn weight(&self, j: usize) -> f64 {
        if j == 0 || j == self.n_cells {
            0.5 * self.dx
        } else {
            self.dx
        }
    }

    pub fn trapezoid(&self, f: &[f64]) -> f64 {
        let n = f.len() - 1;
        let inner: f64 = f[1..n].iter().sum();
        self.dx * (inner + 0.5 * (f[0] + f[n]))
    }

    pub(crate) fn trapezoid_product(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() - 1;
        let inner: f64 = a[1..n].iter().zip(&b[1..n]).map(|(x, y)| x * y).sum();
        self.dx * (inner + 0.5 * (a[0] * b[0] + a[n] * b[n]))
    }

    pub(crate) fn check_len(&self, what: &str, len: usize) -> Result<()> {
        if len != self.n_nodes() {
            return Err(Error::Contract(format!(
                "{what} has {len} samples, grid has {} nodes",
                self.n_nodes()
            )));
        }
        Ok(())
    }
}

/// Snapshot `[u, v]` of the energy space; `θ` is `v[0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl FieldState {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::Contract(format!(
                "u has {} samples but v has {}",
                u.len(),
                v.len()
            )));
        }
        if u.len() < Grid::MIN_CELLS + 1 {
            return Err(Error::Contract(format!(
                "state needs at least {} samples, got {}",
                Grid::MIN_CELLS + 1,
                u.len()
            )));
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::Contract("state contains non-finite samples".into()));
        }
        Ok(Self { u, v })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self {
            u: vec![c; grid.n_nodes()],
            v: vec![0.0; grid.n_nodes()],
        }
    }

    pub fn theta(&self) -> f64 {
        self.v[0]
    }

    pub fn conforms(&self, grid: &Grid) -> Result<()> {
        grid.check_len("u", self.u.len())?;
        grid.check_len("v", self.v.len())
    }
}

/// Energy split into its three nonnegative parts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub potential: f64,
    pub kinetic: f64,
    pub boundary_kinetic: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(potential: f64, kinetic: f64, boundary_kinetic: f64) -> Self {
        Self {
            potential,
            kinetic,
            boundary_kinetic,
            total: potential + kinetic + boundary_kinetic,
        }
    }

    /// Componentwise average of two breakdowns.
    pub fn midpoint(a: &Self, b: &Self) -> Self {
        Self::new(
            0.5 * (a.potential + b.potential),
            0.5 * (a.kinetic + b.kinetic),
            0.5 * (a.boundary_kinetic + b.boundary_kinetic),
        )
    }
}

/// The energy sublevel set `{𝓔 ≤ level}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SublevelSetSpec {
    level: f64,
}

impl SublevelSetSpec {
    pub fn new(level: f64) -> Result<Self> {
        if !(level.is_finite() && level >= 0.0) {
            return Err(Error::Contract(format!(
                "sublevel energy must be finite and nonnegative, got {level}"
            )));
        }
        Ok(Self { level })
    }

    pub fn level(&self) -> f64 {
        self.level
    }
}

pub(crate) fn stiffness_unchecked(u1: &[f64], u2: &[f64], dx: f64) -> f64 {
    let s: f64 = u1
        .windows(2)
        .zip(u2.windows(2))
        .map(|(a, b)| (a[1] - a[0]) * (b[1] - b[0]))
        .sum();
    s / dx
}

/// Discrete `a(u1, u2) = ∫ ∂x u1 ∂x u2` by cell differences.
pub fn bilinear_a(u1: &[f64], u2: &[f64], grid: &Grid) -> Result<f64> {
    grid.check_len("u1", u1.len())?;
    grid.check_len("u2", u2.len())?;
    Ok(stiffness_unchecked(u1, u2, grid.dx()))
}

pub(crate) fn energy_unchecked(u: &[f64], v: &[f64], grid: &Grid) -> EnergyBreakdown {
    EnergyBreakdown::new(
        0.5 * stiffness_unchecked(u, u, grid.dx()),
        0.5 * grid.trapezoid_product(v, v),
        0.5 * v[0] * v[0],
    )
}

/// `𝓔(u, v) = ½{a(u, u) + ‖v‖²_H}`.
pub fn energy(state: &FieldState, grid: &Grid) -> Result<EnergyBreakdown> {
    state.conforms(grid)?;
    Ok(energy_unchecked(&state.u, &state.v, grid))
}

/// Mean value of the displacement.
pub fn mean_functional(state: &FieldState, grid: &Grid) -> Result<f64> {
    state.conforms(grid)?;
    Ok(grid.trapezoid(&state.u) / grid.length())
}

/// `H`-norm squared of a velocity: `‖v‖²_{L²} + θ²`.
pub fn velocity_norm_sq(v: &[f64], grid: &Grid) -> f64 {
    grid.trapezoid_product(v, v) + v[0] * v[0]
}

/// Inner product of the discrete energy space.
pub fn inner_h(x: &FieldState, y: &FieldState, grid: &Grid) -> Result<f64> {
    x.conforms(grid)?;
    y.conforms(grid)?;
    Ok(grid.trapezoid_product(&x.u, &y.u)
        + x.u[0] * y.u[0]
        + stiffness_unchecked(&x.u, &y.u, grid.dx())
        + grid.trapezoid_product(&x.v, &y.v)
        + x.v[0] * y.v[0])
}

/// Removes the component along the constant direction `e = [1, 0]`.
///
/// `⟨X, e⟩ = ∫u + u(0)` and `‖e‖² = L + 1`; the stiffness part of `e` is zero
/// so the energy is untouched.
pub fn project_orthogonal_to_constants(state: &FieldState, grid: &Grid) -> Result<FieldState> {
    state.conforms(grid)?;
    let c = (grid.trapezoid(&state.u) + state.u[0]) / (grid.length() + 1.0);
    Ok(FieldState {
        u: state.u.iter().map(|x| x - c).collect(),
        v: state.v.clone(),
    })
}

/// Upper bound `sqrt(K·{𝓔(X) − E}⁺)` on the distance to the sublevel set.
pub fn dist_to_sublevel_bound(
    state: &FieldState,
    spec: &SublevelSetSpec,
    grid: &Grid,
    k: f64,
) -> Result<f64> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::Contract(format!("K must be positive, got {k}")));
    }
    let e = energy(state, grid)?.total;
    Ok((k * (e - spec.level()).max(0.0)).sqrt())
}

/// Exact distance to `{𝓔 ≤ E}` via the generalized eigen-decomposition of the
/// energy form against the norm form. Builds a dense pencil each call; reuse
/// an [`EnergyPencil`] for series.
pub fn dist_to_sublevel_exact(
    state: &FieldState,
    spec: &SublevelSetSpec,
    grid: &Grid,
) -> Result<f64> {
    state.conforms(grid)?;
    if energy_unchecked(&state.u, &state.v, grid).total <= spec.level() {
        return Ok(0.0);
    }
    EnergyPencil::new(grid)?.distance_to_sublevel(state, spec.level())
}

/// Exact distance to the stationary set `{𝓔 = 0} = {[c, 0]}`.
pub fn dist_to_stationary(state: &FieldState, grid: &Grid) -> Result<f64> {
    state.conforms(grid)?;
    Ok(dist_to_stationary_sq(state, grid).max(0.0).sqrt())
}

pub(crate) fn dist_to_stationary_sq(state: &FieldState, grid: &Grid) -> f64 {
    let u = &state.u;
    // min_c ‖u − c‖²_{L²} + |u(0) − c|² is a quadratic in c
    let mass = grid.length() + 1.0;
    let first = grid.trapezoid(u) + u[0];
    let second = grid.trapezoid_product(u, u) + u[0] * u[0];
    let offset = (second - first * first / mass).max(0.0);
    velocity_norm_sq(&state.v, grid) + stiffness_unchecked(u, u, grid.dx()) + offset
}
