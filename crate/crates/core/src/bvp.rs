//! Euler-Lagrange boundary-value problem for the optimal bias.
//!
//! The bias `b(theta)` of `ln T_est` that minimizes
//! `int p [b^2 + (b' + 1/theta)^2 / (v F)] dtheta` satisfies
//!
//! ```text
//! b'' + (p'/p - F'/F) b' - v F b = F'/(theta F) - p'/(theta p) + 1/theta^2
//! b'(a1) = -1/a1,  b'(a2) = -1/a2
//! ```
//!
//! On a log grid the equation is rewritten for `B(u) = b(e^u)` before it is
//! discretized. With `b' = B_u / theta` and `b'' = (B_uu - B_u) / theta^2`:
//!
//! ```text
//! B_uu + (theta (p'/p - F'/F) - 1) B_u - v F theta^2 B = theta F'/F - theta p'/p + 1
//! B_u(ln a1) = B_u(ln a2) = -1
//! ```
//!
//! Both forms are discretized with second-order central differences; the
//! Neumann conditions enter through ghost nodes, and the resulting
//! tridiagonal system is solved directly.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::grid::{Spacing, TemperatureGrid};
use crate::models::{FisherModel, Prior};
use crate::tridiag::Tridiagonal;

/// Default tolerance on the boundary-condition check.
pub const BC_TOLERANCE: f64 = 1e-8;
/// Default tolerance on the algebraic residual of the discrete system.
pub const RESIDUAL_TOLERANCE: f64 = 1e-6;
/// Doublings attempted by [`refine_until_converged`] before giving up.
pub const MAX_DOUBLINGS: usize = 12;

/// `y'' + drift y' - reaction y = source` on a uniform grid with spacing
/// `step`, with prescribed slopes at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct NeumannProblem {
    pub step: f64,
    pub drift: Vec<f64>,
    pub reaction: Vec<f64>,
    pub source: Vec<f64>,
    pub left_slope: f64,
    pub right_slope: f64,
}

impl NeumannProblem {
    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    fn stencil(&self, i: usize) -> (f64, f64, f64) {
        let h = self.step;
        let h2 = h * h;
        (
            1.0 / h2 - self.drift[i] / (2.0 * h),
            -2.0 / h2 - self.reaction[i],
            1.0 / h2 + self.drift[i] / (2.0 * h),
        )
    }

    /// Tridiagonal system with the ghost nodes
    /// `y[-1] = y[1] - 2h left_slope` and `y[m] = y[m-2] + 2h right_slope`
    /// folded into the first and last rows.
    pub fn assemble(&self) -> (Tridiagonal, Vec<f64>) {
        let m = self.len();
        let h = self.step;
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        let mut rhs = self.source.clone();
        for i in 0..m {
            let (lo, di, up) = self.stencil(i);
            diag[i] = di;
            if i == 0 {
                upper[i] = lo + up;
                rhs[i] += 2.0 * h * self.left_slope * lo;
            } else if i == m - 1 {
                lower[i] = lo + up;
                rhs[i] -= 2.0 * h * self.right_slope * up;
            } else {
                lower[i] = lo;
                upper[i] = up;
            }
        }
        (Tridiagonal { lower, diag, upper }, rhs)
    }

    pub fn solve(&self) -> Result<Vec<f64>> {
        if self.len() < 3 {
            return domain(format!(
                "boundary-value problem needs at least 3 nodes, got {}",
                self.len()
            ));
        }
        let (a, rhs) = self.assemble();
        a.solve(&rhs)
    }

    /// Componentwise relative backward error of `y` for the assembled system:
    /// `max_i |(A y - d)_i| / (|A| |y| + |d|)_i`. Independent of the grid
    /// step, so it measures the linear solve rather than roundoff in `1/h^2`.
    pub fn discrete_residual(&self, y: &[f64]) -> f64 {
        let (a, rhs) = self.assemble();
        let m = y.len();
        let ay = a.apply(y);
        (0..m)
            .map(|i| {
                let mut scale = a.diag[i].abs() * y[i].abs() + rhs[i].abs();
                if i > 0 {
                    scale += a.lower[i].abs() * y[i - 1].abs();
                }
                if i + 1 < m {
                    scale += a.upper[i].abs() * y[i + 1].abs();
                }
                if scale == 0.0 {
                    0.0
                } else {
                    (ay[i] - rhs[i]).abs() / scale
                }
            })
            .fold(0.0, f64::max)
    }

    /// ODE residual at nodes `2..m-2` from fourth-order central stencils,
    /// scaled by `max(1, |source|)`. Independent of the second-order scheme
    /// used by [`NeumannProblem::solve`].
    pub fn stencil_residual(&self, y: &[f64]) -> f64 {
        let m = self.len();
        let h = self.step;
        let mut worst: f64 = 0.0;
        for i in 2..m.saturating_sub(2) {
            let (ym2, ym1, y0, yp1, yp2) = (y[i - 2], y[i - 1], y[i], y[i + 1], y[i + 2]);
            let d2 = (-ym2 + 16.0 * ym1 - 30.0 * y0 + 16.0 * yp1 - yp2) / (12.0 * h * h);
            let d1 = (ym2 - 8.0 * ym1 + 8.0 * yp1 - yp2) / (12.0 * h);
            let r = d2 + self.drift[i] * d1 - self.reaction[i] * y0 - self.source[i];
            worst = worst.max(r.abs() / self.source[i].abs().max(1.0));
        }
        worst
    }

    /// Slopes `y'` at every node: central differences inside, and at the two
    /// ends the central difference through the ghost node implied by the
    /// end row of the ODE stencil.
    pub fn slopes(&self, y: &[f64]) -> Vec<f64> {
        let m = self.len();
        let h = self.step;
        let mut s = vec![0.0; m];
        for i in 1..m - 1 {
            s[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
        }
        let (lo, di, up) = self.stencil(0);
        let ghost = (self.source[0] - di * y[0] - up * y[1]) / lo;
        s[0] = (y[1] - ghost) / (2.0 * h);
        let (lo, di, up) = self.stencil(m - 1);
        let ghost = (self.source[m - 1] - di * y[m - 1] - lo * y[m - 2]) / up;
        s[m - 1] = (ghost - y[m - 2]) / (2.0 * h);
        s
    }
}

/// Optimal bias on a grid, with self-check diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasSolution {
    #[serde(skip)]
    pub grid: TemperatureGrid,
    pub v: u64,
    /// `b(theta_i)`.
    pub b: Vec<f64>,
    /// `b'(theta_i)` in temperature^-1.
    pub b_prime: Vec<f64>,
    /// Relative backward error of the discrete linear solve.
    pub residual_norm: f64,
    /// `max(|b'(a1) + 1/a1|, |b'(a2) + 1/a2|)`.
    pub bc_error: f64,
}

impl BiasSolution {
    pub fn grid(&self) -> &TemperatureGrid {
        &self.grid
    }
}

fn check_support(prior: &Prior, grid: &TemperatureGrid) -> Result<()> {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    if !close(prior.a1(), grid.a1()) || !close(prior.a2(), grid.a2()) {
        return domain(format!(
            "grid [{}, {}] does not span the prior support [{}, {}]",
            grid.a1(),
            grid.a2(),
            prior.a1(),
            prior.a2()
        ));
    }
    Ok(())
}

/// Discretized Euler-Lagrange problem for `(prior, model, v)` in the grid's
/// own coordinate.
pub fn euler_lagrange_problem(
    prior: &Prior,
    model: &FisherModel,
    v: u64,
    grid: &TemperatureGrid,
) -> Result<NeumannProblem> {
    if v == 0 {
        return domain("number of measurements v must be at least 1");
    }
    check_support(prior, grid)?;
    model.check_positive(grid.nodes())?;
    let v = v as f64;
    let m = grid.len();
    let mut drift = Vec::with_capacity(m);
    let mut reaction = Vec::with_capacity(m);
    let mut source = Vec::with_capacity(m);
    for &theta in grid.nodes() {
        let p = prior.density(theta);
        if !(p > 0.0 && p.is_finite()) {
            return domain(format!("prior density is not positive at theta = {theta}"));
        }
        let dlp = prior.log_derivative(theta);
        let dlf = model.log_derivative(theta);
        let f = model.fisher(theta);
        match grid.spacing() {
            Spacing::UniformInTheta => {
                drift.push(dlp - dlf);
                reaction.push(v * f);
                source.push(dlf / theta - dlp / theta + 1.0 / (theta * theta));
            }
            Spacing::UniformInLogTheta => {
                drift.push(theta * (dlp - dlf) - 1.0);
                reaction.push(v * f * theta * theta);
                source.push(theta * dlf - theta * dlp + 1.0);
            }
        }
    }
    let (left_slope, right_slope) = match grid.spacing() {
        Spacing::UniformInTheta => (-1.0 / grid.a1(), -1.0 / grid.a2()),
        Spacing::UniformInLogTheta => (-1.0, -1.0),
    };
    Ok(NeumannProblem {
        step: grid.step(),
        drift,
        reaction,
        source,
        left_slope,
        right_slope,
    })
}

/// Solves for the optimal bias on `grid`.
///
/// Fails if `F` is not positive at some node, if the system is singular, or
/// if the boundary or residual self-checks exceed [`BC_TOLERANCE`] /
/// [`RESIDUAL_TOLERANCE`].
pub fn solve_optimal_bias(
    prior: &Prior,
    model: &FisherModel,
    v: u64,
    grid: &TemperatureGrid,
) -> Result<BiasSolution> {
    let problem = euler_lagrange_problem(prior, model, v, grid)?;
    let b = problem.solve()?;
    let residual_norm = problem.discrete_residual(&b);
    let b_prime: Vec<f64> = problem
        .slopes(&b)
        .iter()
        .enumerate()
        .map(|(i, s)| s / grid.jacobian(i))
        .collect();
    let m = grid.len();
    let bc_error = (b_prime[0] + 1.0 / grid.a1())
        .abs()
        .max((b_prime[m - 1] + 1.0 / grid.a2()).abs());
    if residual_norm.is_nan() || residual_norm > RESIDUAL_TOLERANCE {
        return Err(Error::Inaccurate {
            what: "Euler-Lagrange residual",
            value: residual_norm,
            tolerance: RESIDUAL_TOLERANCE,
        });
    }
    if bc_error.is_nan() || bc_error > BC_TOLERANCE {
        return Err(Error::Inaccurate {
            what: "boundary-condition error",
            value: bc_error,
            tolerance: BC_TOLERANCE,
        });
    }
    Ok(BiasSolution {
        grid: grid.clone(),
        v,
        b,
        b_prime,
        residual_norm,
        bc_error,
    })
}

/// Residual of the continuous Euler-Lagrange equation for `sol`, measured
/// with fourth-order stencils at interior nodes.
pub fn euler_lagrange_residual(
    sol: &BiasSolution,
    prior: &Prior,
    model: &FisherModel,
    v: u64,
) -> Result<f64> {
    let problem = euler_lagrange_problem(prior, model, v, &sol.grid)?;
    Ok(problem.stencil_residual(&sol.b))
}

/// History of a grid-refinement run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    /// `(nodes, value)` for every grid tried, coarsest first.
    pub history: Vec<(usize, f64)>,
    /// Relative change between the last two values.
    pub relative_change: f64,
    /// Richardson extrapolation of the last two values assuming order 2.
    pub extrapolated: f64,
    /// Observed order from the last three values, when available.
    pub observed_order: Option<f64>,
}

impl ConvergenceReport {
    fn from_history(history: Vec<(usize, f64)>) -> Self {
        let n = history.len();
        let (fine, coarse) = (history[n - 1].1, history[n - 2].1);
        let observed_order = (n >= 3).then(|| {
            let older = history[n - 3].1;
            ((older - coarse) / (coarse - fine)).abs().log2()
        });
        ConvergenceReport {
            relative_change: ((fine - coarse) / fine).abs(),
            extrapolated: (4.0 * fine - coarse) / 3.0,
            observed_order,
            history,
        }
    }
}

/// Doubles the grid resolution (`m -> 2m - 1`) starting from `m0` nodes until
/// two successive values of `bound` agree to `rel_tol`.
pub fn refine_until_converged<F>(
    prior: &Prior,
    model: &FisherModel,
    v: u64,
    m0: usize,
    rel_tol: f64,
    spacing: Spacing,
    bound: F,
) -> Result<(BiasSolution, ConvergenceReport)>
where
    F: Fn(&BiasSolution) -> Result<f64>,
{
    if m0 < 65 {
        return domain(format!("initial grid needs at least 65 nodes, got {m0}"));
    }
    if rel_tol.is_nan() || rel_tol <= 0.0 {
        return domain(format!(
            "relative tolerance must be positive, got {rel_tol}"
        ));
    }
    let mut grid = TemperatureGrid::new(prior.a1(), prior.a2(), m0, spacing)?;
    let mut sol = solve_optimal_bias(prior, model, v, &grid)?;
    let mut history = vec![(grid.len(), bound(&sol)?)];
    for _ in 0..MAX_DOUBLINGS {
        grid = grid.refined();
        sol = solve_optimal_bias(prior, model, v, &grid)?;
        let value = bound(&sol)?;
        let previous = history[history.len() - 1].1;
        history.push((grid.len(), value));
        if (value - previous).abs() <= rel_tol * value.abs() {
            return Ok((sol, ConvergenceReport::from_history(history)));
        }
    }
    Err(Error::NotConverged {
        doublings: MAX_DOUBLINGS,
        values: history.into_iter().map(|(_, v)| v).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::InfoKind;

    /// `b(u) = -sinh(s (u - mid)) / (s cosh(s w))`, `s = sqrt(v c)`, for
    /// `F = c / theta^2` and a log-uniform prior on `[e^{mid-w}, e^{mid+w}]`.
    fn scale_invariant_bias(theta: f64, c: f64, v: f64, a1: f64, a2: f64) -> f64 {
        let s = (v * c).sqrt();
        let mid = 0.5 * (a1.ln() + a2.ln());
        let w = 0.5 * (a2.ln() - a1.ln());
        -(s * (theta.ln() - mid)).sinh() / (s * (s * w).cosh())
    }

    fn max_error(sol: &BiasSolution, c: f64, v: f64) -> f64 {
        let g = sol.grid();
        g.nodes()
            .iter()
            .zip(&sol.b)
            .map(|(&t, &b)| (b - scale_invariant_bias(t, c, v, g.a1(), g.a2())).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn constant_solution_for_constant_coefficients() {
        // F = c, drift forced to zero, source k, zero slopes: b = -k / (v c)
        let (c, v, k, m) = (3.0, 2.0, 0.7, 101);
        let problem = NeumannProblem {
            step: 1.0 / (m - 1) as f64,
            drift: vec![0.0; m],
            reaction: vec![v * c; m],
            source: vec![k; m],
            left_slope: 0.0,
            right_slope: 0.0,
        };
        let y = problem.solve().unwrap();
        for &b in &y {
            assert!((b + k / (v * c)).abs() < 1e-12);
        }
        assert!(problem.stencil_residual(&y) < 1e-12);
    }

    #[test]
    fn scale_invariant_closed_form() {
        let prior = Prior::log_uniform(0.1, 10.0).unwrap();
        let model = FisherModel::scale_invariant(4.0, InfoKind::Classical).unwrap();
        let grid = TemperatureGrid::log_uniform(0.1, 10.0, 4097).unwrap();
        for v in [1u64, 10] {
            let sol = solve_optimal_bias(&prior, &model, v, &grid).unwrap();
            assert!(max_error(&sol, 4.0, v as f64) < 1e-6, "v = {v}");
            assert!(sol.bc_error < BC_TOLERANCE);
        }
    }

    #[test]
    fn scale_invariant_source_vanishes() {
        let prior = Prior::log_uniform(0.1, 10.0).unwrap();
        let model = FisherModel::scale_invariant(4.0, InfoKind::Classical).unwrap();
        for spacing in [Spacing::UniformInTheta, Spacing::UniformInLogTheta] {
            let grid = TemperatureGrid::new(0.1, 10.0, 33, spacing).unwrap();
            let p = euler_lagrange_problem(&prior, &model, 1, &grid).unwrap();
            assert!(p.source.iter().all(|s| s.abs() < 1e-12));
        }
    }

    #[test]
    fn second_order_convergence() {
        let prior = Prior::log_uniform(0.1, 10.0).unwrap();
        let model = FisherModel::scale_invariant(4.0, InfoKind::Classical).unwrap();
        let errors: Vec<f64> = [129, 257, 513, 1025]
            .iter()
            .map(|&m| {
                let grid = TemperatureGrid::log_uniform(0.1, 10.0, m).unwrap();
                max_error(
                    &solve_optimal_bias(&prior, &model, 1, &grid).unwrap(),
                    4.0,
                    1.0,
                )
            })
            .collect();
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 4.0).abs() < 0.5, "ratio {ratio}");
        }
    }

    #[test]
    fn closed_form_stencil_residual() {
        let prior = Prior::log_uniform(0.1, 10.0).unwrap();
        let model = FisherModel::scale_invariant(4.0, InfoKind::Classical).unwrap();
        let grid = TemperatureGrid::log_uniform(0.1, 10.0, 4097).unwrap();
        let mut sol = solve_optimal_bias(&prior, &model, 1, &grid).unwrap();
        for (b, &t) in sol.b.iter_mut().zip(grid.nodes()) {
            *b = scale_invariant_bias(t, 4.0, 1.0, 0.1, 10.0);
        }
        assert!(euler_lagrange_residual(&sol, &prior, &model, 1).unwrap() <= 1e-8);
    }

    #[test]
    fn perturbed_solution_is_flagged() {
        let prior = Prior::log_uniform(0.1, 10.0).unwrap();
        let model = FisherModel::spin_gas(100, 1.0).unwrap();
        let grid = TemperatureGrid::log_uniform(0.1, 10.0, 513).unwrap();
        let mut sol = solve_optimal_bias(&prior, &model, 1, &grid).unwrap();
        for (i, b) in sol.b.iter_mut().enumerate() {
            // deterministic pseudo-noise in [-1, 1]
            let noise = ((i as f64 * 12.9898).sin() * 43758.5453).fract();
            *b += 1e-3 * noise;
        }
        assert!(euler_lagrange_residual(&sol, &prior, &model, 1).unwrap() > RESIDUAL_TOLERANCE);
    }

    #[test]
    fn log_and_theta_operators_agree() {
        // Apply both continuous operators to b(theta) = sin(theta) / theta
        // using exact derivatives; the log form is theta^2 times the theta form.
        let prior = Prior::log_uniform(0.1, 10.0).unwrap();
        let model = FisherModel::spin_gas(100, 1.0).unwrap();
        let lin = TemperatureGrid::new(0.1, 10.0, 101, Spacing::UniformInTheta).unwrap();
        let log = TemperatureGrid::log_uniform(0.1, 10.0, 101).unwrap();
        let pl = euler_lagrange_problem(&prior, &model, 3, &lin).unwrap();
        let pu = euler_lagrange_problem(&prior, &model, 3, &log).unwrap();
        let b = |t: f64| t.sin() / t;
        let db = |t: f64| t.cos() / t - t.sin() / (t * t);
        let d2b = |t: f64| -t.sin() / t - 2.0 * t.cos() / (t * t) + 2.0 * t.sin() / (t * t * t);
        let eval = |p: &NeumannProblem, i: usize, y: f64, y1: f64, y2: f64| {
            y2 + p.drift[i] * y1 - p.reaction[i] * y - p.source[i]
        };
        for (i, &t) in log.nodes().iter().enumerate() {
            let bu = t * db(t);
            let buu = t * db(t) + t * t * d2b(t);
            let ru = eval(&pu, i, b(t), bu, buu);
            // theta-form coefficients recomputed at this theta
            let dlp = prior.log_derivative(t);
            let dlf = model.log_derivative(t);
            let rt = d2b(t) + (dlp - dlf) * db(t)
                - 3.0 * model.fisher(t) * b(t)
                - (dlf / t - dlp / t + 1.0 / (t * t));
            assert!(
                (ru - t * t * rt).abs() <= 1e-8 * ru.abs().max(1.0),
                "theta = {t}"
            );
        }
        // spot-check that the theta grid uses the same coefficients
        let t = lin.nodes()[50];
        assert!((pl.reaction[50] - 3.0 * model.fisher(t)).abs() < 1e-12 * pl.reaction[50]);
    }

    #[test]
    fn log_and_theta_discretizations_agree() {
        // Richardson-extrapolated edge values of b from the two discretizations.
        let prior = Prior::log_uniform(0.5, 2.0).unwrap();
        let model = FisherModel::spin_gas(10, 1.0).unwrap();
        let edge_values = |spacing: Spacing| {
            let solve = |m: usize| {
                let g = TemperatureGrid::new(0.5, 2.0, m, spacing).unwrap();
                let s = solve_optimal_bias(&prior, &model, 2, &g).unwrap();
                (s.b[0], s.b[m - 1])
            };
            let (c0, c1) = solve(2049);
            let (f0, f1) = solve(4097);
            ((4.0 * f0 - c0) / 3.0, (4.0 * f1 - c1) / 3.0)
        };
        let (l0, l1) = edge_values(Spacing::UniformInTheta);
        let (u0, u1) = edge_values(Spacing::UniformInLogTheta);
        assert!((l0 - u0).abs() < 1e-8, "{l0} vs {u0}");
        assert!((l1 - u1).abs() < 1e-8, "{l1} vs {u1}");
    }

    #[test]
    fn solve_is_deterministic() {
        let prior = Prior::log_uniform(0.1, 10.0).unwrap();
        let model = FisherModel::spin_gas(100, 1.0).unwrap();
        let grid = TemperatureGrid::log_uniform(0.1, 10.0, 2049).unwrap();
        let a = solve_optimal_bias(&prior, &model, 1, &grid).unwrap();
        let b = solve_optimal_bias(&prior, &model, 1, &grid).unwrap();
        assert_eq!(a.b, b.b);
        assert_eq!(a.b_prime, b.b_prime);
    }

    #[test]
    fn rejects_bad_inputs() {
        let prior = Prior::log_uniform(0.1, 10.0).unwrap();
        let model = FisherModel::spin_gas(100, 1.0).unwrap();
        let grid = TemperatureGrid::log_uniform(0.1, 10.0, 65).unwrap();
        assert!(solve_optimal_bias(&prior, &model, 0, &grid).is_err());
        let off = TemperatureGrid::log_uniform(0.1, 5.0, 65).unwrap();
        assert!(solve_optimal_bias(&prior, &model, 1, &off).is_err());
        let dead = FisherModel::custom(InfoKind::Classical, "dead", |t| 1.0 - t, None);
        let err = solve_optimal_bias(&prior, &dead, 1, &grid).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn refinement_rejects_small_start() {
        let prior = Prior::log_uniform(0.1, 10.0).unwrap();
        let model = FisherModel::spin_gas(100, 1.0).unwrap();
        let r = refine_until_converged(&prior, &model, 1, 33, 1e-6, Spacing::default(), |s| {
            Ok(s.b[0])
        });
        assert!(r.is_err());
    }
}
