//! Optimal biased and Cramer-Rao-like bounds on the mean logarithmic error.
//!
//! For `v` repeated measurements with information `F` per measurement,
//!
//! ```text
//! OBB  = int p(theta) [b(theta)^2 + (b'(theta) + 1/theta)^2 / (v F(theta))] dtheta
//! CRLB = int p(theta) / (theta^2 v F(theta)) dtheta
//! ```
//!
//! where `b` is the optimal bias from [`crate::bvp`]. CRLB is the `b = 0`
//! value of the same functional, so `OBB <= CRLB` always. Both integrals use
//! composite Simpson quadrature on the solver grid.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bvp::{refine_until_converged, solve_optimal_bias, BiasSolution};
use crate::error::{domain, Error, Result};
use crate::exec::Execution;
use crate::grid::{Spacing, TemperatureGrid};
use crate::models::{FisherModel, InfoKind, ModelParams, ModelSpec, Prior};
use crate::quadrature::simpson;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundKind {
    #[serde(rename = "COBB")]
    Cobb,
    #[serde(rename = "CCRLB")]
    Ccrlb,
    #[serde(rename = "QOBB")]
    Qobb,
    #[serde(rename = "QCRLB")]
    Qcrlb,
}

impl BoundKind {
    pub const ALL: [BoundKind; 4] = [
        BoundKind::Cobb,
        BoundKind::Ccrlb,
        BoundKind::Qobb,
        BoundKind::Qcrlb,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::Cobb => "COBB",
            BoundKind::Ccrlb => "CCRLB",
            BoundKind::Qobb => "QOBB",
            BoundKind::Qcrlb => "QCRLB",
        }
    }

    pub fn info_kind(self) -> InfoKind {
        match self {
            BoundKind::Cobb | BoundKind::Ccrlb => InfoKind::Classical,
            BoundKind::Qobb | BoundKind::Qcrlb => InfoKind::Quantum,
        }
    }

    /// True for the bounds that require the optimal-bias solve.
    pub fn is_optimal_biased(self) -> bool {
        matches!(self, BoundKind::Cobb | BoundKind::Qobb)
    }

    pub fn optimal_biased(kind: InfoKind) -> Self {
        match kind {
            InfoKind::Classical => BoundKind::Cobb,
            InfoKind::Quantum => BoundKind::Qobb,
        }
    }

    pub fn cramer_rao_like(kind: InfoKind) -> Self {
        match kind {
            InfoKind::Classical => BoundKind::Ccrlb,
            InfoKind::Quantum => BoundKind::Qcrlb,
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown bound kind {s:?}")))
    }
}

/// One computed bound.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub value: f64,
    pub v: u64,
    pub model_params: ModelParams,
    pub a1: f64,
    pub a2: f64,
    pub grid_nodes: usize,
    /// Relative difference to the same bound on the nested coarser (or, for
    /// grids that cannot be coarsened, finer) grid.
    pub convergence_estimate: f64,
    /// The optimal bias behind an optimal biased bound; `None` for the
    /// Cramer-Rao-like kinds.
    #[serde(skip)]
    pub bias_solution: Option<Arc<BiasSolution>>,
}

/// Optimal-bias functional evaluated on the solution grid. The derivative at
/// the two end nodes is the exact boundary value `-1/theta`.
pub fn obb_functional(sol: &BiasSolution, prior: &Prior, model: &FisherModel) -> Result<f64> {
    let grid = sol.grid();
    let m = grid.len();
    let v = sol.v as f64;
    let integrand: Vec<f64> = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &theta)| {
            let b = sol.b[i];
            let shifted = if i == 0 || i == m - 1 {
                0.0
            } else {
                sol.b_prime[i] + 1.0 / theta
            };
            let spread = if shifted == 0.0 {
                0.0
            } else {
                shifted * shifted / (v * model.fisher(theta))
            };
            grid.jacobian(i) * prior.density(theta) * (b * b + spread)
        })
        .collect();
    simpson(&integrand, grid.step())
}

/// `int p / (theta^2 v F)` on `grid`.
pub fn crlb_functional(
    prior: &Prior,
    model: &FisherModel,
    v: u64,
    grid: &TemperatureGrid,
) -> Result<f64> {
    if v == 0 {
        return domain("number of measurements v must be at least 1");
    }
    model.check_positive(grid.nodes())?;
    let v = v as f64;
    let integrand: Vec<f64> = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &theta)| {
            grid.jacobian(i) * prior.density(theta) / (theta * theta * v * model.fisher(theta))
        })
        .collect();
    simpson(&integrand, grid.step())
}

fn companion_grid(grid: &TemperatureGrid) -> TemperatureGrid {
    grid.coarsened().unwrap_or_else(|| grid.refined())
}

fn relative_gap(a: f64, b: f64) -> f64 {
    ((a - b) / a).abs()
}

fn report(
    kind: BoundKind,
    value: f64,
    v: u64,
    model: &FisherModel,
    grid: &TemperatureGrid,
    convergence_estimate: f64,
    bias_solution: Option<Arc<BiasSolution>>,
) -> Result<BoundReport> {
    if !(value > 0.0 && value.is_finite()) {
        return domain(format!("{kind} evaluated to a non-positive value {value}"));
    }
    Ok(BoundReport {
        kind,
        value,
        v,
        model_params: model.params().clone(),
        a1: grid.a1(),
        a2: grid.a2(),
        grid_nodes: grid.len(),
        convergence_estimate,
        bias_solution,
    })
}

/// Optimal biased bound (COBB for classical models, QOBB for quantum ones).
pub fn obb(
    prior: &Prior,
    model: &FisherModel,
    v: u64,
    grid: &TemperatureGrid,
) -> Result<BoundReport> {
    let sol = solve_optimal_bias(prior, model, v, grid)?;
    let value = obb_functional(&sol, prior, model)?;
    let other = companion_grid(grid);
    let other_sol = solve_optimal_bias(prior, model, v, &other)?;
    let other_value = obb_functional(&other_sol, prior, model)?;
    report(
        BoundKind::optimal_biased(model.kind()),
        value,
        v,
        model,
        grid,
        relative_gap(value, other_value),
        Some(Arc::new(sol)),
    )
}

/// Optimal biased bound on a grid refined from `m0` nodes until successive
/// values agree to `rel_tol`. The reported value is the finest-grid value;
/// the convergence estimate is the last relative change.
pub fn obb_refined(
    prior: &Prior,
    model: &FisherModel,
    v: u64,
    m0: usize,
    rel_tol: f64,
    spacing: Spacing,
) -> Result<(BoundReport, crate::bvp::ConvergenceReport)> {
    let (sol, conv) = refine_until_converged(prior, model, v, m0, rel_tol, spacing, |s| {
        obb_functional(s, prior, model)
    })?;
    let value = conv.history[conv.history.len() - 1].1;
    let grid = sol.grid().clone();
    let r = report(
        BoundKind::optimal_biased(model.kind()),
        value,
        v,
        model,
        &grid,
        conv.relative_change,
        Some(Arc::new(sol)),
    )?;
    Ok((r, conv))
}

/// Cramer-Rao-like bound (CCRLB or QCRLB by model kind).
pub fn crlb_like(
    prior: &Prior,
    model: &FisherModel,
    v: u64,
    grid: &TemperatureGrid,
) -> Result<BoundReport> {
    let value = crlb_functional(prior, model, v, grid)?;
    let other_value = crlb_functional(prior, model, v, &companion_grid(grid))?;
    report(
        BoundKind::cramer_rao_like(model.kind()),
        value,
        v,
        model,
        grid,
        relative_gap(value, other_value),
        None,
    )
}

/// Computes `kind` for `model`, checking that the kind matches the model.
pub fn bound(
    kind: BoundKind,
    prior: &Prior,
    model: &FisherModel,
    v: u64,
    grid: &TemperatureGrid,
) -> Result<BoundReport> {
    if kind.info_kind() != model.kind() {
        return Err(Error::Config(format!(
            "{kind} requires a {:?} information model, got {:?}",
            kind.info_kind(),
            model.kind()
        )));
    }
    if kind.is_optimal_biased() {
        obb(prior, model, v, grid)
    } else {
        crlb_like(prior, model, v, grid)
    }
}

/// Integer parameter a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepVariable {
    /// Spin-gas particle count.
    #[serde(rename = "n")]
    Particles,
    /// Probe level count.
    #[serde(rename = "N")]
    Levels,
    /// Number of repeated measurements.
    #[serde(rename = "v")]
    Repetitions,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::Particles => "n",
            SweepVariable::Levels => "N",
            SweepVariable::Repetitions => "v",
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A one- or two-parameter family of bound evaluations. The optional
/// `series` variable selects a family of curves; `variable` runs along each
/// curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub model: ModelSpec,
    pub a1: f64,
    pub a2: f64,
    pub v: u64,
    pub grid_nodes: usize,
    pub spacing: Spacing,
    pub kinds: Vec<BoundKind>,
    pub variable: SweepVariable,
    pub values: Vec<u64>,
    pub series: Option<(SweepVariable, Vec<u64>)>,
}

/// A bound report tagged with its sweep coordinate.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub sweep_var: SweepVariable,
    pub sweep_value: u64,
    pub report: BoundReport,
}

fn assign(model: ModelSpec, v: u64, var: SweepVariable, value: u64) -> Result<(ModelSpec, u64)> {
    match (var, model) {
        (SweepVariable::Repetitions, m) => Ok((m, value)),
        (SweepVariable::Particles, ModelSpec::SpinGas { epsilon, .. }) => {
            Ok((ModelSpec::SpinGas { n: value, epsilon }, v))
        }
        (SweepVariable::Levels, ModelSpec::NLevel { epsilon, .. }) => Ok((
            ModelSpec::NLevel {
                levels: value,
                epsilon,
            },
            v,
        )),
        (var, m) => Err(Error::Config(format!(
            "sweep variable {var} does not apply to model {m:?}"
        ))),
    }
}

impl SweepSpec {
    /// Checks sweep-level consistency without evaluating anything.
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep value list is empty".into()));
        }
        if self.kinds.is_empty() {
            return Err(Error::Config("no bound kinds requested".into()));
        }
        let info = self.model.info_kind();
        if let Some(k) = self.kinds.iter().find(|k| k.info_kind() != info) {
            return Err(Error::Config(format!(
                "{k} requires a {:?} model but the probe is {:?}",
                k.info_kind(),
                info
            )));
        }
        assign(self.model, self.v, self.variable, self.values[0])?;
        if let Some((var, values)) = &self.series {
            if values.is_empty() {
                return Err(Error::Config("series value list is empty".into()));
            }
            if *var == self.variable {
                return Err(Error::Config(format!("series and sweep both vary {var}")));
            }
            assign(self.model, self.v, *var, values[0])?;
        }
        Ok(())
    }

    fn points(&self) -> Result<Vec<(ModelSpec, u64, u64)>> {
        let series: Vec<(ModelSpec, u64)> = match &self.series {
            Some((var, values)) => values
                .iter()
                .map(|&s| assign(self.model, self.v, *var, s))
                .collect::<Result<_>>()?,
            None => vec![(self.model, self.v)],
        };
        let mut points = Vec::with_capacity(series.len() * self.values.len());
        for (model, v) in series {
            for &x in &self.values {
                let (m, v) = assign(model, v, self.variable, x)?;
                points.push((m, v, x));
            }
        }
        Ok(points)
    }
}

/// Evaluates every requested kind at every sweep point. Rows are ordered by
/// series value, then sweep value, then the order of `spec.kinds`,
/// independent of `exec`.
pub fn sweep(spec: &SweepSpec, exec: Execution) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let prior = Prior::log_uniform(spec.a1, spec.a2)?;
    let grid = TemperatureGrid::new(spec.a1, spec.a2, spec.grid_nodes, spec.spacing)?;
    let points = spec.points()?;
    let per_point = exec.map(points.len(), |i| -> Result<Vec<SweepRow>> {
        let (model_spec, v, x) = points[i];
        let model = model_spec.fisher_model()?;
        spec.kinds
            .iter()
            .map(|&kind| {
                Ok(SweepRow {
                    sweep_var: spec.variable,
                    sweep_value: x,
                    report: bound(kind, &prior, &model, v, &grid)?,
                })
            })
            .collect()
    });
    let mut rows = Vec::with_capacity(points.len() * spec.kinds.len());
    for chunk in per_point {
        rows.extend(chunk?);
    }
    Ok(rows)
}

/// `count` integers log-spaced over `[start, stop]`, rounded and deduplicated.
pub fn log_spaced(start: u64, stop: u64, count: usize) -> Vec<u64> {
    if count <= 1 || start >= stop {
        return vec![start];
    }
    let (ls, le) = ((start as f64).ln(), (stop as f64).ln());
    let mut out: Vec<u64> = (0..count)
        .map(|i| {
            (ls + (le - ls) * i as f64 / (count - 1) as f64)
                .exp()
                .round() as u64
        })
        .collect();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spin(n: u64) -> FisherModel {
        FisherModel::spin_gas(n, 1.0).unwrap()
    }

    #[test]
    fn crlb_reduces_to_prior_mass() {
        // theta^2 F = 1 -> integrand is the prior itself
        let model = FisherModel::scale_invariant(1.0, InfoKind::Classical).unwrap();
        let prior = Prior::log_uniform(0.3, 7.0).unwrap();
        let grid = TemperatureGrid::log_uniform(0.3, 7.0, 257).unwrap();
        let r = crlb_like(&prior, &model, 1, &grid).unwrap();
        assert!((r.value - 1.0).abs() < 1e-13);
        assert_eq!(r.kind, BoundKind::Ccrlb);
        assert!(r.bias_solution.is_none());
    }

    #[test]
    fn obb_carries_its_solution() {
        let prior = Prior::log_uniform(0.1, 10.0).unwrap();
        let grid = TemperatureGrid::log_uniform(0.1, 10.0, 513).unwrap();
        let r = obb(&prior, &spin(100), 1, &grid).unwrap();
        assert_eq!(r.kind, BoundKind::Cobb);
        assert!(r.bias_solution.is_some());
        let q = obb(&prior, &FisherModel::n_level(3, 1.0).unwrap(), 1, &grid).unwrap();
        assert_eq!(q.kind, BoundKind::Qobb);
    }

    #[test]
    fn obb_never_exceeds_prior_log_variance() {
        // b = c - ln(theta) gives exactly the prior variance of ln(theta)
        let prior = Prior::log_uniform(0.1, 10.0).unwrap();
        let grid = TemperatureGrid::log_uniform(0.1, 10.0, 1025).unwrap();
        let var = (100f64).ln().powi(2) / 12.0;
        for n in [1, 10, 1000] {
            let r = obb(&prior, &spin(n), 1, &grid).unwrap();
            assert!(r.value < var, "n = {n}: {}", r.value);
        }
    }

    #[test]
    fn obb_approaches_crlb_for_many_measurements() {
        let prior = Prior::log_uniform(0.1, 10.0).unwrap();
        let grid = TemperatureGrid::log_uniform(0.1, 10.0, 2049).unwrap();
        let model = spin(100);
        let ratio = |v: u64| {
            let o = obb(&prior, &model, v, &grid).unwrap();
            let c = crlb_like(&prior, &model, v, &grid).unwrap();
            o.value / c.value
        };
        // Independent theta-space finite-difference solve (200001 nodes) gives
        // 0.955840 at v = 1e4; the residual gap comes from the boundary layers.
        let r4 = ratio(10_000);
        assert!((r4 - 0.955840).abs() < 2e-4, "ratio {r4}");
        let r6 = ratio(1_000_000);
        assert!(r6 > r4 && r6 < 1.0, "ratio {r6}");
    }

    #[test]
    fn kind_mismatch_is_a_config_error() {
        let prior = Prior::log_uniform(0.1, 10.0).unwrap();
        let grid = TemperatureGrid::log_uniform(0.1, 10.0, 65).unwrap();
        let err = bound(BoundKind::Qobb, &prior, &spin(10), 1, &grid).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn sweep_rejects_mismatched_kinds_and_variables() {
        let spec = SweepSpec {
            model: ModelSpec::SpinGas {
                n: 10,
                epsilon: 1.0,
            },
            a1: 0.1,
            a2: 10.0,
            v: 1,
            grid_nodes: 65,
            spacing: Spacing::default(),
            kinds: vec![BoundKind::Cobb, BoundKind::Qcrlb],
            variable: SweepVariable::Particles,
            values: vec![10, 20],
            series: None,
        };
        assert!(matches!(
            sweep(&spec, Execution::Sequential),
            Err(Error::Config(_))
        ));
        let spec = SweepSpec {
            kinds: vec![BoundKind::Cobb],
            variable: SweepVariable::Levels,
            ..spec
        };
        assert!(matches!(
            sweep(&spec, Execution::Sequential),
            Err(Error::Config(_))
        ));
        let spec = SweepSpec {
            variable: SweepVariable::Particles,
            values: vec![],
            ..spec
        };
        assert!(matches!(
            sweep(&spec, Execution::Sequential),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn single_point_sweep_matches_direct_calls() {
        let spec = SweepSpec {
            model: ModelSpec::SpinGas {
                n: 100,
                epsilon: 1.0,
            },
            a1: 0.1,
            a2: 10.0,
            v: 1,
            grid_nodes: 257,
            spacing: Spacing::default(),
            kinds: vec![BoundKind::Cobb, BoundKind::Ccrlb],
            variable: SweepVariable::Particles,
            values: vec![100],
            series: None,
        };
        let rows = sweep(&spec, Execution::Parallel).unwrap();
        let prior = Prior::log_uniform(0.1, 10.0).unwrap();
        let grid = TemperatureGrid::log_uniform(0.1, 10.0, 257).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(
            rows[0].report.value,
            obb(&prior, &spin(100), 1, &grid).unwrap().value
        );
        assert_eq!(
            rows[1].report.value,
            crlb_like(&prior, &spin(100), 1, &grid).unwrap().value
        );
    }

    #[test]
    fn log_spaced_endpoints() {
        let xs = log_spaced(10, 10_000, 20);
        assert_eq!(xs.len(), 20);
        assert_eq!(xs[0], 10);
        assert_eq!(xs[19], 10_000);
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
    }
}
