//! Probe likelihoods, Fisher-information functions and temperature priors.
//!
//! Units follow the usual thermometry convention `hbar = k_B = 1`, so
//! temperatures and energy gaps share a unit and the information is measured
//! in temperature^-2.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{domain, Result};

/// Scalar function of temperature shared across threads.
pub type ThetaFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Whether the information function is a classical or a quantum Fisher
/// information. The bound formulas are identical; the tag selects which pair
/// of bound kinds a model may be asked for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfoKind {
    Classical,
    Quantum,
}

/// Parameter record carried into reports and output tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<u64>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none", default)]
    pub levels: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub c: Option<f64>,
}

impl ModelParams {
    fn family(name: &str) -> Self {
        ModelParams {
            family: name.to_string(),
            n: None,
            levels: None,
            epsilon: None,
            c: None,
        }
    }
}

/// `ln(1/(4 cosh^2(y/2)))`, evaluated without overflow for any `y`.
fn ln_sech2_quarter(y: f64) -> f64 {
    let a = y.abs();
    -a - 2.0 * (-a).exp().ln_1p()
}

fn check_thermal_args(theta: f64, gap: f64) -> Result<()> {
    if !(theta > 0.0 && theta.is_finite()) {
        return domain(format!(
            "temperature must be positive and finite, got {theta}"
        ));
    }
    if !(gap > 0.0 && gap.is_finite()) {
        return domain(format!("energy gap must be positive and finite, got {gap}"));
    }
    Ok(())
}

/// Classical Fisher information of an `n`-spin gas from a total-energy
/// measurement: `n eps^2 / theta^4 / (4 cosh^2(eps / (2 theta)))`.
pub fn spin_gas_fisher(theta: f64, n: u64, gap: f64) -> Result<f64> {
    check_thermal_args(theta, gap)?;
    if n == 0 {
        return domain("particle count n must be at least 1");
    }
    Ok(n as f64 * thermal_info(theta, gap, 0.0))
}

/// `d/dtheta` of [`spin_gas_fisher`].
pub fn spin_gas_fisher_derivative(theta: f64, n: u64, gap: f64) -> Result<f64> {
    let f = spin_gas_fisher(theta, n, gap)?;
    Ok(f * thermal_log_derivative(theta, gap, 0.0))
}

/// Maximal quantum Fisher information of an `N`-level probe, attained by a
/// single ground state and an `(N-1)`-fold degenerate excited state:
/// `(N-1) eps^2 e^{eps/theta} / ((N-1+e^{eps/theta})^2 theta^4)`.
///
/// Evaluated in log space; returns a (possibly underflowed) finite value for
/// arbitrarily small temperatures.
pub fn nlevel_qfi(theta: f64, levels: u64, gap: f64) -> Result<f64> {
    check_thermal_args(theta, gap)?;
    if levels < 2 {
        return domain(format!("level count N must be at least 2, got {levels}"));
    }
    Ok(thermal_info(theta, gap, ((levels - 1) as f64).ln()))
}

/// `d/dtheta` of [`nlevel_qfi`].
pub fn nlevel_qfi_derivative(theta: f64, levels: u64, gap: f64) -> Result<f64> {
    let f = nlevel_qfi(theta, levels, gap)?;
    Ok(f * thermal_log_derivative(theta, gap, ((levels - 1) as f64).ln()))
}

// With x = eps/theta and k = N-1, k e^x / (k + e^x)^2 = 1 / (4 cosh^2((x - ln k)/2)),
// so both built-in probes share one closed form.
fn thermal_info(theta: f64, gap: f64, shift: f64) -> f64 {
    let x = gap / theta;
    (ln_sech2_quarter(x - shift) + 2.0 * gap.ln() - 4.0 * theta.ln()).exp()
}

fn thermal_log_derivative(theta: f64, gap: f64, shift: f64) -> f64 {
    let x = gap / theta;
    (x * (0.5 * (x - shift)).tanh() - 4.0) / theta
}

#[derive(Clone)]
enum Source {
    Thermal { scale: f64, gap: f64, shift: f64 },
    PowerLaw { c: f64 },
    Custom { f: ThetaFn, df: Option<ThetaFn> },
}

/// A positive information function `F(theta)` with its derivative.
#[derive(Clone)]
pub struct FisherModel {
    kind: InfoKind,
    params: ModelParams,
    source: Source,
}

impl fmt::Debug for FisherModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FisherModel")
            .field("kind", &self.kind)
            .field("params", &self.params)
            .finish()
    }
}

impl FisherModel {
    /// Classical information of the `n`-spin gas.
    pub fn spin_gas(n: u64, gap: f64) -> Result<Self> {
        spin_gas_fisher(1.0, n, gap)?;
        let mut params = ModelParams::family("spin_gas");
        params.n = Some(n);
        params.epsilon = Some(gap);
        Ok(FisherModel {
            kind: InfoKind::Classical,
            params,
            source: Source::Thermal {
                scale: n as f64,
                gap,
                shift: 0.0,
            },
        })
    }

    /// Quantum information of the optimal `N`-level probe.
    pub fn n_level(levels: u64, gap: f64) -> Result<Self> {
        nlevel_qfi(1.0, levels, gap)?;
        let mut params = ModelParams::family("n_level");
        params.levels = Some(levels);
        params.epsilon = Some(gap);
        Ok(FisherModel {
            kind: InfoKind::Quantum,
            params,
            source: Source::Thermal {
                scale: 1.0,
                gap,
                shift: ((levels - 1) as f64).ln(),
            },
        })
    }

    /// `F = c / theta^2`, the scale-invariant information for which the
    /// optimal bias has a closed form under a log-uniform prior.
    pub fn scale_invariant(c: f64, kind: InfoKind) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return domain(format!(
                "scale-invariant constant must be positive, got {c}"
            ));
        }
        let mut params = ModelParams::family("scale_invariant");
        params.c = Some(c);
        Ok(FisherModel {
            kind,
            params,
            source: Source::PowerLaw { c },
        })
    }

    /// User-supplied information function. Without `derivative`, `F'` is
    /// taken from a five-point central difference with step `theta * 1e-4`.
    pub fn custom(
        kind: InfoKind,
        label: &str,
        fisher: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: Option<ThetaFn>,
    ) -> Self {
        FisherModel {
            kind,
            params: ModelParams::family(label),
            source: Source::Custom {
                f: Arc::new(fisher),
                df: derivative,
            },
        }
    }

    pub fn kind(&self) -> InfoKind {
        self.kind
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn fisher(&self, theta: f64) -> f64 {
        match &self.source {
            Source::Thermal { scale, gap, shift } => scale * thermal_info(theta, *gap, *shift),
            Source::PowerLaw { c } => c / (theta * theta),
            Source::Custom { f, .. } => f(theta),
        }
    }

    pub fn fisher_derivative(&self, theta: f64) -> f64 {
        match &self.source {
            Source::Thermal { .. } | Source::PowerLaw { .. } => {
                self.fisher(theta) * self.log_derivative(theta)
            }
            Source::Custom { f, df } => match df {
                Some(df) => df(theta),
                None => five_point_derivative(f.as_ref(), theta),
            },
        }
    }

    /// `F'(theta) / F(theta)`, analytic for the built-in models so that it
    /// stays finite where `F` underflows.
    pub fn log_derivative(&self, theta: f64) -> f64 {
        match &self.source {
            Source::Thermal { gap, shift, .. } => thermal_log_derivative(theta, *gap, *shift),
            Source::PowerLaw { .. } => -2.0 / theta,
            Source::Custom { .. } => self.fisher_derivative(theta) / self.fisher(theta),
        }
    }

    /// Fails with a domain error naming the first node where `F` is not
    /// strictly positive.
    pub fn check_positive(&self, nodes: &[f64]) -> Result<()> {
        for &theta in nodes {
            let f = self.fisher(theta);
            if !(f > 0.0 && f.is_finite()) {
                return domain(format!(
                    "Fisher information is not positive at theta = {theta} (F = {f})"
                ));
            }
        }
        Ok(())
    }
}

fn five_point_derivative(f: &(dyn Fn(f64) -> f64 + Send + Sync), theta: f64) -> f64 {
    let h = theta * 1e-4;
    (f(theta - 2.0 * h) - 8.0 * f(theta - h) + 8.0 * f(theta + h) - f(theta + 2.0 * h)) / (12.0 * h)
}

#[derive(Clone)]
enum PriorFamily {
    LogUniform {
        log_ratio: f64,
    },
    Custom {
        density: ThetaFn,
        derivative: ThetaFn,
        // (theta, cumulative probability), increasing in both
        cdf: Arc<Vec<(f64, f64)>>,
    },
}

/// Normalized prior density on a finite temperature interval `[a1, a2]`.
#[derive(Clone)]
pub struct Prior {
    a1: f64,
    a2: f64,
    family: PriorFamily,
}

impl fmt::Debug for Prior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let family = match self.family {
            PriorFamily::LogUniform { .. } => "log_uniform",
            PriorFamily::Custom { .. } => "custom",
        };
        f.debug_struct("Prior")
            .field("a1", &self.a1)
            .field("a2", &self.a2)
            .field("family", &family)
            .finish()
    }
}

fn check_support(a1: f64, a2: f64) -> Result<()> {
    if !(a1 > 0.0 && a1.is_finite()) {
        return domain(format!("prior lower edge a1 must be positive, got {a1}"));
    }
    if !(a2 > a1 && a2.is_finite()) {
        return domain(format!(
            "prior upper edge a2 must exceed a1 = {a1}, got {a2}"
        ));
    }
    Ok(())
}

/// The scale prior `p(theta) = 1 / (theta ln(a2/a1))` on `[a1, a2]`.
pub fn log_uniform_prior(a1: f64, a2: f64) -> Result<Prior> {
    Prior::log_uniform(a1, a2)
}

const CUSTOM_PRIOR_NODES: usize = 8193;

impl Prior {
    pub fn log_uniform(a1: f64, a2: f64) -> Result<Self> {
        check_support(a1, a2)?;
        Ok(Prior {
            a1,
            a2,
            family: PriorFamily::LogUniform {
                log_ratio: (a2 / a1).ln(),
            },
        })
    }

    /// Arbitrary density with analytic derivative. The density must be
    /// positive on the support and integrate to one within `1e-9`.
    pub fn custom(
        a1: f64,
        a2: f64,
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        check_support(a1, a2)?;
        let density: ThetaFn = Arc::new(density);
        // Tabulate on a log-spaced grid: integrate p(theta) theta du.
        let m = CUSTOM_PRIOR_NODES;
        let (u1, u2) = (a1.ln(), a2.ln());
        let h = (u2 - u1) / (m - 1) as f64;
        let mut thetas = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        for i in 0..m {
            let theta = if i == m - 1 {
                a2
            } else {
                (u1 + h * i as f64).exp()
            };
            let p = density(theta);
            if !(p > 0.0 && p.is_finite()) {
                return domain(format!("prior density is not positive at theta = {theta}"));
            }
            thetas.push(theta);
            weights.push(p * theta);
        }
        let total = crate::quadrature::simpson(&weights, h)?;
        if (total - 1.0).abs() > 1e-9 {
            return domain(format!("prior density integrates to {total}, not 1"));
        }
        let mut cdf = Vec::with_capacity(m);
        let mut acc = 0.0;
        cdf.push((thetas[0], 0.0));
        for i in 1..m {
            acc += 0.5 * h * (weights[i - 1] + weights[i]);
            cdf.push((thetas[i], acc));
        }
        let norm = acc;
        for entry in cdf.iter_mut() {
            entry.1 /= norm;
        }
        Ok(Prior {
            a1,
            a2,
            family: PriorFamily::Custom {
                density,
                derivative: Arc::new(derivative),
                cdf: Arc::new(cdf),
            },
        })
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn is_log_uniform(&self) -> bool {
        matches!(self.family, PriorFamily::LogUniform { .. })
    }

    pub fn density(&self, theta: f64) -> f64 {
        match &self.family {
            PriorFamily::LogUniform { log_ratio } => 1.0 / (theta * log_ratio),
            PriorFamily::Custom { density, .. } => density(theta),
        }
    }

    pub fn density_derivative(&self, theta: f64) -> f64 {
        match &self.family {
            PriorFamily::LogUniform { log_ratio } => -1.0 / (theta * theta * log_ratio),
            PriorFamily::Custom { derivative, .. } => derivative(theta),
        }
    }

    /// `p'(theta) / p(theta)`.
    pub fn log_derivative(&self, theta: f64) -> f64 {
        match &self.family {
            PriorFamily::LogUniform { .. } => -1.0 / theta,
            PriorFamily::Custom { .. } => self.density_derivative(theta) / self.density(theta),
        }
    }

    /// Inverse CDF. Exact for the log-uniform family; piecewise-linear in the
    /// tabulated CDF otherwise.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match &self.family {
            PriorFamily::LogUniform { log_ratio } => {
                if u == 0.0 {
                    self.a1
                } else if u == 1.0 {
                    self.a2
                } else {
                    self.a1 * (u * log_ratio).exp()
                }
            }
            PriorFamily::Custom { cdf, .. } => {
                let idx = cdf.partition_point(|&(_, c)| c < u);
                if idx == 0 {
                    return self.a1;
                }
                if idx >= cdf.len() {
                    return self.a2;
                }
                let (t0, c0) = cdf[idx - 1];
                let (t1, c1) = cdf[idx];
                if c1 == c0 {
                    t0
                } else {
                    t0 + (t1 - t0) * (u - c0) / (c1 - c0)
                }
            }
        }
    }

    /// Same prior family on `[lambda a1, lambda a2]`. Only defined for the
    /// log-uniform family.
    pub fn rescaled(&self, lambda: f64) -> Result<Self> {
        match self.family {
            PriorFamily::LogUniform { .. } => {
                Prior::log_uniform(lambda * self.a1, lambda * self.a2)
            }
            PriorFamily::Custom { .. } => domain("only log-uniform priors can be rescaled"),
        }
    }
}

fn excitation_exponent(theta: f64, gap: f64) -> f64 {
    gap / theta
}

/// Total-energy distribution of `n` non-interacting spin-1/2 particles with
/// gap `eps`: `p(r|theta) = C(n,r) e^{-r eps/theta} / (1 + e^{-eps/theta})^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinGasLikelihood {
    n: u64,
    gap: f64,
}

impl SpinGasLikelihood {
    pub fn new(n: u64, gap: f64) -> Result<Self> {
        spin_gas_fisher(1.0, n, gap)?;
        Ok(SpinGasLikelihood { n, gap })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// Probability that a single spin is excited: `e^{-x} / (1 + e^{-x})`.
    pub fn excited_probability(&self, theta: f64) -> f64 {
        let e = (-excitation_exponent(theta, self.gap)).exp();
        e / (1.0 + e)
    }

    pub fn log_probability(&self, r: u64, theta: f64) -> Result<f64> {
        check_thermal_args(theta, self.gap)?;
        if r > self.n {
            return domain(format!("outcome r = {r} outside 0..={}", self.n));
        }
        let x = excitation_exponent(theta, self.gap);
        Ok(ln_binomial(self.n, r) - r as f64 * x - self.n as f64 * (-x).exp().ln_1p())
    }

    pub fn probability(&self, r: u64, theta: f64) -> Result<f64> {
        self.log_probability(r, theta).map(f64::exp)
    }

    pub fn fisher_model(&self) -> FisherModel {
        FisherModel::spin_gas(self.n, self.gap).expect("validated at construction")
    }
}

/// Single-energy-measurement likelihood `p(r | theta, n, eps)` of the spin gas.
pub fn spin_gas_likelihood(r: u64, theta: f64, n: u64, gap: f64) -> Result<f64> {
    SpinGasLikelihood::new(n, gap)?.probability(r, theta)
}

/// Energy measurement on the optimal `N`-level probe: two outcomes, ground
/// (`0`) and excited (`1`), the latter `(N-1)`-fold degenerate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NLevelLikelihood {
    levels: u64,
    gap: f64,
}

impl NLevelLikelihood {
    pub fn new(levels: u64, gap: f64) -> Result<Self> {
        nlevel_qfi(1.0, levels, gap)?;
        Ok(NLevelLikelihood { levels, gap })
    }

    pub fn levels(&self) -> u64 {
        self.levels
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// `ln(N - 1)`, the entropic offset of the degenerate excited level.
    pub fn degeneracy_log(&self) -> f64 {
        ((self.levels - 1) as f64).ln()
    }

    /// `(N-1) e^{-x} / (1 + (N-1) e^{-x})`.
    pub fn excited_probability(&self, theta: f64) -> f64 {
        let y = excitation_exponent(theta, self.gap) - self.degeneracy_log();
        if y >= 0.0 {
            let e = (-y).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + y.exp())
        }
    }

    pub fn probability(&self, outcome: u64, theta: f64) -> Result<f64> {
        check_thermal_args(theta, self.gap)?;
        let q = self.excited_probability(theta);
        match outcome {
            0 => Ok(1.0 - q),
            1 => Ok(q),
            _ => domain(format!("N-level outcome must be 0 or 1, got {outcome}")),
        }
    }

    pub fn fisher_model(&self) -> FisherModel {
        FisherModel::n_level(self.levels, self.gap).expect("validated at construction")
    }
}

/// Serializable choice of a built-in probe, as it appears in run
/// configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    SpinGas {
        n: u64,
        #[serde(default = "unit_gap")]
        epsilon: f64,
    },
    NLevel {
        #[serde(rename = "N")]
        levels: u64,
        #[serde(default = "unit_gap")]
        epsilon: f64,
    },
}

fn unit_gap() -> f64 {
    1.0
}

impl ModelSpec {
    pub fn info_kind(&self) -> InfoKind {
        match self {
            ModelSpec::SpinGas { .. } => InfoKind::Classical,
            ModelSpec::NLevel { .. } => InfoKind::Quantum,
        }
    }

    pub fn gap(&self) -> f64 {
        match *self {
            ModelSpec::SpinGas { epsilon, .. } | ModelSpec::NLevel { epsilon, .. } => epsilon,
        }
    }

    pub fn fisher_model(&self) -> Result<FisherModel> {
        match *self {
            ModelSpec::SpinGas { n, epsilon } => FisherModel::spin_gas(n, epsilon),
            ModelSpec::NLevel { levels, epsilon } => FisherModel::n_level(levels, epsilon),
        }
    }

    /// Same probe with the energy gap multiplied by `lambda`.
    pub fn rescaled(&self, lambda: f64) -> Self {
        match *self {
            ModelSpec::SpinGas { n, epsilon } => ModelSpec::SpinGas {
                n,
                epsilon: lambda * epsilon,
            },
            ModelSpec::NLevel { levels, epsilon } => ModelSpec::NLevel {
                levels,
                epsilon: lambda * epsilon,
            },
        }
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn spin_gas_fisher_reference_values() {
        // mpmath, 40 digits
        assert!(rel(spin_gas_fisher(1.0, 100, 1.0).unwrap(), 19.661193324148185) < 1e-14);
        assert!(rel(spin_gas_fisher(0.1, 1, 1.0).unwrap(), 0.45395807735951671) < 1e-13);
        assert!(
            rel(
                spin_gas_fisher(1e3, 1, 1.0).unwrap(),
                2.4999993750001042e-13
            ) < 1e-12
        );
    }

    #[test]
    fn spin_gas_fisher_rejects_bad_domain() {
        assert!(spin_gas_fisher(0.0, 1, 1.0).is_err());
        assert!(spin_gas_fisher(-1.0, 1, 1.0).is_err());
        assert!(spin_gas_fisher(1.0, 0, 1.0).is_err());
        assert!(spin_gas_fisher(1.0, 1, 0.0).is_err());
    }

    #[test]
    fn nlevel_qfi_reference_and_underflow() {
        let two_level = nlevel_qfi(1.0, 2, 1.0).unwrap();
        assert!(rel(two_level, 0.19661193324148185) < 1e-14);
        assert!(rel(two_level, spin_gas_fisher(1.0, 1, 1.0).unwrap()) < 1e-14);
        let cold = nlevel_qfi(0.01, 6, 1.0).unwrap();
        assert!((0.0..1e-30).contains(&cold));
        let frozen = nlevel_qfi(1e-4, 6, 1.0).unwrap();
        assert_eq!(frozen, 0.0);
        assert!(nlevel_qfi_derivative(1e-4, 6, 1.0).unwrap().is_finite());
        assert!(nlevel_qfi(1.0, 1, 1.0).is_err());
    }

    #[test]
    fn log_uniform_prior_values() {
        let p = log_uniform_prior(0.1, 10.0).unwrap();
        assert!(rel(p.density(1.0), 1.0 / (2.0 * 10f64.ln())) < 1e-15);
        let q = log_uniform_prior(0.1, 1.0).unwrap();
        assert!(rel(q.density(1.0), 1.0 / 10f64.ln()) < 1e-15);
        let r = log_uniform_prior(1.0, std::f64::consts::E).unwrap();
        assert!(rel(r.density(2.0), 0.5) < 1e-15);
        assert!(log_uniform_prior(0.0, 1.0).is_err());
        assert!(log_uniform_prior(1.0, 1.0).is_err());
    }

    #[test]
    fn log_uniform_quantile_edges() {
        let p = log_uniform_prior(0.1, 10.0).unwrap();
        assert!((p.quantile(0.5) - 1.0).abs() < 1e-15);
        assert_eq!(p.quantile(0.0), 0.1);
        assert_eq!(p.quantile(1.0), 10.0);
    }

    #[test]
    fn custom_prior_normalization_is_checked() {
        // p = 1 on [1, 2]
        let ok = Prior::custom(1.0, 2.0, |_| 1.0, |_| 0.0).unwrap();
        assert!((ok.quantile(0.25) - 1.25).abs() < 1e-6);
        assert!(Prior::custom(1.0, 2.0, |_| 2.0, |_| 0.0).is_err());
        assert!(Prior::custom(1.0, 2.0, |t| t - 1.5, |_| 1.0).is_err());
    }

    #[test]
    fn spin_gas_likelihood_values() {
        let p0 = spin_gas_likelihood(0, 1.0, 1, 1.0).unwrap();
        assert!(rel(p0, 0.73105857863000488) < 1e-14);
        let lik = SpinGasLikelihood::new(10, 1.0).unwrap();
        let total: f64 = (0..=10).map(|r| lik.probability(r, 0.7).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let hot = spin_gas_likelihood(4, 1e9, 4, 1.0).unwrap();
        assert!((hot - 0.0625).abs() < 1e-9);
        assert!(spin_gas_likelihood(5, 1.0, 4, 1.0).is_err());
    }

    #[test]
    fn spin_gas_likelihood_large_n_is_finite() {
        let lik = SpinGasLikelihood::new(1_000_000, 1.0).unwrap();
        let p = lik.probability(268_941, 1.0).unwrap();
        assert!(p > 0.0 && p < 1.0);
    }

    #[test]
    fn nlevel_excited_probability() {
        let lik = NLevelLikelihood::new(2, 1.0).unwrap();
        assert!(rel(lik.excited_probability(1.0), 0.26894142136999512) < 1e-14);
        let six = NLevelLikelihood::new(6, 1.0).unwrap();
        let e = (-1.0f64).exp();
        assert!(rel(six.excited_probability(1.0), 5.0 * e / (1.0 + 5.0 * e)) < 1e-14);
        assert!(six.probability(2, 1.0).is_err());
    }

    #[test]
    fn custom_model_finite_difference_fallback() {
        let m = FisherModel::custom(InfoKind::Classical, "cubic", |t| t * t * t, None);
        assert!(rel(m.fisher_derivative(2.0), 12.0) < 1e-9);
        assert!(m.check_positive(&[1.0, 2.0]).is_ok());
        let err = m.check_positive(&[-1.0]).unwrap_err();
        assert!(err.to_string().contains("theta = -1"));
    }
}
