//! Scalar implicit solves for the two boundary velocities.

use crate::nonlinearities::{FeedbackLaw, ForcingLaw};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarRoot {
    pub value: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveFailure {
    pub detail: String,
}

/// Solves `v = a + b·F(v)`.
///
/// Plain fixed-point iteration is a contraction with factor `b·q < 1`; if it
/// stalls we fall back to bisection on `v − a − b·F(v)`, which is strictly
/// increasing for the same reason.
pub fn solve_left(
    law: &ForcingLaw,
    lipschitz: f64,
    a: f64,
    b: f64,
    guess: f64,
    tol: f64,
    max_iter: usize,
) -> Result<ScalarRoot, SolveFailure> {
    if matches!(law, ForcingLaw::Zero) {
        return Ok(ScalarRoot { value: a, iterations: 0, residual: 0.0 });
    }
    let residual = |v: f64| v - a - b * law.eval(v);

    let mut v = guess;
    let mut r = residual(v);
    if r.abs() <= tol {
        return Ok(ScalarRoot { value: v, iterations: 0, residual: r });
    }
    let mut best = r.abs();
    let mut stalled = 0;
    for it in 1..=max_iter {
        v = a + b * law.eval(v);
        r = residual(v);
        if !r.is_finite() {
            break;
        }
        if r.abs() <= tol {
            return Ok(ScalarRoot { value: v, iterations: it, residual: r });
        }
        if r.abs() < 0.5 * best {
            best = r.abs();
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= 3 {
                break;
            }
        }
    }

    let contraction = b * lipschitz;
    if !(contraction < 1.0) {
        return Err(SolveFailure {
            detail: format!("left boundary map is not a contraction (b·q = {contraction})"),
        });
    }
    // |v − a| = b|F(v)| ≤ bq|v| gives the bracket radius
    let radius = contraction * a.abs() / (1.0 - contraction) + tol + f64::EPSILON * a.abs();
    let (mut lo, mut hi) = (a - radius, a + radius);
    for it in 1..=max_iter {
        let mid = 0.5 * (lo + hi);
        let r = residual(mid);
        if r.abs() <= tol || hi - lo <= 4.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE) {
            return Ok(ScalarRoot { value: mid, iterations: it, residual: r });
        }
        if r > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(SolveFailure {
        detail: format!("left boundary solve exceeded {max_iter} iterations"),
    })
}

/// Solves `v + λ·g(v) = c`, strictly increasing in `v`. Since `g(v)` has the
/// sign of `v`, the root lies between `0` and `c`; Newton steps from `guess`
/// are accepted only inside the shrinking bracket.
pub fn solve_right(
    law: &FeedbackLaw,
    lambda: f64,
    c: f64,
    guess: f64,
    tol: f64,
    max_iter: usize,
) -> Result<ScalarRoot, SolveFailure> {
    let residual = |v: f64| v + lambda * law.eval(v) - c;
    let (mut lo, mut hi) = if c >= 0.0 { (0.0, c) } else { (c, 0.0) };
    let mut v = guess.clamp(lo, hi);
    let mut r = residual(v);
    if r.abs() <= tol {
        return Ok(ScalarRoot { value: v, iterations: 0, residual: r });
    }
    for it in 1..=max_iter {
        if r > 0.0 {
            hi = v;
        } else {
            lo = v;
        }
        let slope = 1.0 + lambda * law.derivative(v);
        let newton = v - r / slope;
        v = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        r = residual(v);
        if r.abs() <= tol || hi - lo <= 4.0 * f64::EPSILON * c.abs() {
            return Ok(ScalarRoot { value: v, iterations: it, residual: r });
        }
    }
    Err(SolveFailure {
        detail: format!("right boundary solve exceeded {max_iter} iterations (residual {r:e})"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn right_solve_linear_is_exact() {
        let g = FeedbackLaw::LinearGain { gain: 1.0 };
        let r = solve_right(&g, 0.9, 1.9, 0.0, 1e-14, 50).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn right_solve_deadzone_kink() {
        let g = FeedbackLaw::Deadzone { width: 0.5 };
        // inside the deadzone the root is c itself
        let r = solve_right(&g, 0.9, 0.3, 0.0, 1e-13, 100).unwrap();
        assert!((r.value - 0.3).abs() < 1e-13);
        // outside: v + 0.9(v − 0.5) = 2 → v = 2.45/1.9
        let r = solve_right(&g, 0.9, 2.0, 0.0, 1e-13, 100).unwrap();
        assert!((r.value - 2.45 / 1.9).abs() < 1e-12);
        let r = solve_right(&g, 0.9, -2.0, 5.0, 1e-13, 100).unwrap();
        assert!((r.value + 2.45 / 1.9).abs() < 1e-12);
    }

    #[test]
    fn right_solve_zero_rhs() {
        let g = FeedbackLaw::PowerSector { linear: 1.0, cubic: 3.0 };
        let r = solve_right(&g, 0.9, 0.0, 0.7, 1e-13, 100).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn left_solve_contracts() {
        let f = ForcingLaw::TanhAntidamping { q: 0.4 };
        let r = solve_left(&f, 0.4, 0.7, 0.01, 0.0, 1e-14, 100).unwrap();
        assert!((r.value - 0.7 - 0.01 * f.eval(r.value)).abs() < 1e-14);
        let f = ForcingLaw::PiecewiseLinear { inner: 0.3, outer: 5.0, knee: 0.1 };
        let r = solve_left(&f, 5.0, -3.0, 0.05, 0.0, 1e-13, 100).unwrap();
        assert!((r.value + 3.0 - 0.05 * f.eval(r.value)).abs() < 1e-13);
    }

    #[test]
    fn left_solve_bisection_fallback() {
        // strongly contracting but slow plain iteration: b·q = 0.95
        let f = ForcingLaw::Linear { slope: -1.0 };
        let r = solve_left(&f, 1.0, 1.0, 0.95, 0.0, 1e-13, 200).unwrap();
        assert!((r.value - 1.0 / 1.95).abs() < 1e-12);
    }
}
