use nalgebra::{DMatrix, DVector};

use super::{energy_unchecked, velocity_norm_sq, FieldState, Grid};
use crate::error::{Error, Result};

/// Generalized eigenvalues below this are treated as the constant-mode kernel.
const KERNEL_EPS: f64 = 1e-12;
const SECULAR_TOL: f64 = 1e-12;
const SECULAR_MAX_ITER: usize = 200;

/// Dense generalized eigen-decomposition of the energy form against the
/// energy-space norm form, restricted to the displacement block.
///
/// With `G = LLᵀ` the displacement Gram matrix (trapezoid mass + `u(0)`
/// evaluation + stiffness) and `Q = K/2` the potential-energy matrix, the
/// pencil `Qφ = κGφ` is reduced to the symmetric problem `L⁻¹QL⁻ᵀ w = κw`.
/// Coordinates `ξ = Wᵀ Lᵀ u` are then `G`-orthonormal and the energy is
/// `Σ κ ξ²`. The velocity block needs no decomposition: its energy form is
/// exactly half its norm form, so every velocity direction has `κ = ½`.
#[derive(Debug, Clone)]
pub struct EnergyPencil {
    grid: Grid,
    /// ascending
    kappa: Vec<f64>,
    /// columns are eigenvectors of the reduced problem, same order as `kappa`
    basis: DMatrix<f64>,
    chol_upper: DMatrix<f64>,
}

impl EnergyPencil {
    pub const MAX_CELLS: usize = 512;

    pub fn new(grid: &Grid) -> Result<Self> {
        let n_cells = grid.n_cells();
        if n_cells > Self::MAX_CELLS {
            return Err(Error::Contract(format!(
                "dense energy pencil limited to {} cells, got {n_cells}",
                Self::MAX_CELLS
            )));
        }
        let n = grid.n_nodes();
        let dx = grid.dx();
        let mut stiff = DMatrix::<f64>::zeros(n, n);
        for j in 0..n_cells {
            let k = 1.0 / dx;
            stiff[(j, j)] += k;
            stiff[(j + 1, j + 1)] += k;
            stiff[(j, j + 1)] -= k;
            stiff[(j + 1, j)] -= k;
        }
        let mut gram = stiff.clone();
        for j in 0..n {
            gram[(j, j)] += grid.weight(j);
        }
        gram[(0, 0)] += 1.0;
        let quad = stiff * 0.5;

        let chol = gram
            .cholesky()
            .ok_or_else(|| Error::Numeric("norm Gram matrix is not positive definite".into()))?;
        let lower = chol.l();
        let y = lower
            .solve_lower_triangular(&quad)
            .ok_or_else(|| Error::Numeric("triangular solve failed".into()))?;
        let mut reduced = lower
            .solve_lower_triangular(&y.transpose())
            .ok_or_else(|| Error::Numeric("triangular solve failed".into()))?;
        reduced = (&reduced + reduced.transpose()) * 0.5;

        let eig = reduced.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let kappa: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
        let basis = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        if !kappa.iter().all(|k| k.is_finite()) {
            return Err(Error::Numeric("eigen-solver produced non-finite values".into()));
        }

        Ok(Self {
            grid: *grid,
            kappa,
            basis,
            chol_upper: lower.transpose(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Displacement-block eigenvalues `κ`, ascending. The first is the
    /// constant mode (zero up to rounding).
    pub fn displacement_eigenvalues(&self) -> &[f64] {
        &self.kappa
    }

    /// Smallest Rayleigh quotient `𝓔(X)/‖X‖²` on the complement of constants:
    /// the first nonzero displacement eigenvalue, or `½` from the velocity
    /// block if that is smaller.
    pub fn min_restricted_quotient(&self) -> f64 {
        let first = self
            .kappa
            .iter()
            .copied()
            .find(|&k| k > KERNEL_EPS)
            .unwrap_or(0.5);
        first.min(0.5)
    }

    /// Displacement eigenvector `k` in nodal coordinates (`φ = L⁻ᵀ w`),
    /// normalized to unit norm-form.
    pub fn displacement_mode(&self, k: usize) -> Vec<f64> {
        let w = self.basis.column(k).into_owned();
        let phi = self
            .chol_upper
            .solve_upper_triangular(&w)
            .expect("Cholesky factor is nonsingular");
        phi.iter().copied().collect()
    }

    fn coordinates(&self, u: &[f64]) -> DVector<f64> {
        let u = DVector::from_column_slice(u);
        self.basis.transpose() * (&self.chol_upper * u)
    }

    /// Exact distance from `state` to `{𝓔 ≤ level}`.
    ///
    /// The nearest point is `η_i = ξ_i / (1 + σκ_i)` where the multiplier
    /// `σ ≥ 0` solves the secular equation `Σ κ_i ξ_i² / (1 + σκ_i)² = level`.
    pub fn distance_to_sublevel(&self, state: &FieldState, level: f64) -> Result<f64> {
        state.conforms(&self.grid)?;
        if !(level.is_finite() && level >= 0.0) {
            return Err(Error::Contract(format!("invalid sublevel {level}")));
        }
        let direct = energy_unchecked(&state.u, &state.v, &self.grid).total;
        if direct <= level {
            return Ok(0.0);
        }
        let xi = self.coordinates(&state.u);
        let vel_sq = velocity_norm_sq(&state.v, &self.grid);

        // (κ, ξ²) pairs outside the kernel, velocity block lumped as κ = ½
        let mut terms: Vec<(f64, f64)> = self
            .kappa
            .iter()
            .zip(xi.iter())
            .filter(|(k, _)| **k > KERNEL_EPS)
            .map(|(&k, &x)| (k, x * x))
            .collect();
        terms.push((0.5, vel_sq));

        let dist_sq_at = |sigma: f64| -> f64 {
            terms
                .iter()
                .map(|&(k, x2)| {
                    let s = sigma * k / (1.0 + sigma * k);
                    s * s * x2
                })
                .sum()
        };

        if level == 0.0 {
            let d: f64 = terms.iter().map(|&(_, x2)| x2).sum();
            return Ok(d.sqrt());
        }

        let secular = |sigma: f64| -> (f64, f64) {
            let mut f = -level;
            let mut df = 0.0;
            for &(k, x2) in &terms {
                let den = 1.0 + sigma * k;
                f += k * x2 / (den * den);
                df -= 2.0 * k * k * x2 / (den * den * den);
            }
            (f, df)
        };

        let pencil_energy: f64 = terms.iter().map(|&(k, x2)| k * x2).sum();
        if pencil_energy <= level {
            // direct and pencil energies disagree only at rounding level
            return Ok(0.0);
        }
        let kappa_min = terms
            .iter()
            .filter(|(_, x2)| *x2 > 0.0)
            .map(|&(k, _)| k)
            .fold(f64::INFINITY, f64::min);
        let mut lo = 0.0;
        let mut hi = ((pencil_energy / level).sqrt() - 1.0) / kappa_min;
        if !(hi.is_finite() && hi > 0.0) {
            return Err(Error::Numeric(format!("bad secular bracket [0, {hi}]")));
        }
        // guard against the bound landing exactly on the root from above
        while secular(hi).0 > 0.0 {
            hi *= 2.0;
        }

        let mut sigma = 0.5 * (lo + hi);
        for _ in 0..SECULAR_MAX_ITER {
            let (f, df) = secular(sigma);
            if f > 0.0 {
                lo = sigma;
            } else {
                hi = sigma;
            }
            let newton = sigma - f / df;
            let next = if df < 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            let step = (next - sigma).abs();
            sigma = next;
            if step <= SECULAR_TOL * sigma.max(1.0) || hi - lo <= SECULAR_TOL * hi.max(1.0) {
                return Ok(dist_sq_at(sigma).sqrt());
            }
        }
        Err(Error::Numeric(format!(
            "secular equation did not converge in {SECULAR_MAX_ITER} iterations"
        )))
    }

    /// Energy computed from pencil coordinates; equals the direct energy up to
    /// rounding. Used as an internal consistency check.
    pub fn energy_via_modes(&self, state: &FieldState) -> f64 {
        let xi = self.coordinates(&state.u);
        let pot: f64 = self.kappa.iter().zip(xi.iter()).map(|(k, x)| k * x * x).sum();
        pot + 0.5 * velocity_norm_sq(&state.v, &self.grid)
    }
}
