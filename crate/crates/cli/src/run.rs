//! Dispatch of a resolved configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thermobound::mcverify::{run_trials, McOptions, TrialRecord};
use thermobound::{bound, sweep, BoundKind, Execution, Prior, Probe, TemperatureGrid};

use crate::config::{Command, Format, RunConfig};
use crate::output::{float, read_csv, write_csv, write_json, TableRow};
use crate::{plot, CliError};

/// Files produced by a run, in write order.
pub type Artifacts = Vec<PathBuf>;

fn place(out_dir: &Path, path: Option<&Path>, default: &str) -> PathBuf {
    match path {
        Some(p) if p.is_absolute() => p.to_path_buf(),
        Some(p) => out_dir.join(p),
        None => out_dir.join(default),
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Executes `config` (already resolved), writing artifacts under `out_dir`.
/// Relative paths in the config, including `plot.input`, are taken relative
/// to `out_dir`.
pub fn run(config: &RunConfig, out_dir: &Path, exec: Execution) -> Result<Artifacts, CliError> {
    match config.command {
        Command::Bound | Command::Sweep => run_table(config, out_dir, exec),
        Command::Verify => run_verify(config, out_dir, exec),
        Command::Plot => run_plot(config, out_dir),
    }
}

/// Bound rows for a `bound` or `sweep` configuration, in config order.
pub fn table(config: &RunConfig, exec: Execution) -> Result<Vec<TableRow>, CliError> {
    let spec = config
        .sweep_spec()
        .ok_or_else(|| CliError::Input("configuration has no model or prior".into()))?;
    let tagged = config.command == Command::Sweep;
    Ok(sweep(&spec, exec)?
        .iter()
        .map(|r| TableRow::from_sweep(r, tagged))
        .collect())
}

fn run_table(config: &RunConfig, out_dir: &Path, exec: Execution) -> Result<Artifacts, CliError> {
    let rows = table(config, exec)?;
    let fmt = config.output.format;
    let name = format!(
        "{}.{}",
        if config.command == Command::Sweep {
            "sweep"
        } else {
            "bound"
        },
        fmt.extension()
    );
    let bytes = match fmt {
        Format::Csv => write_csv(config, &rows)?,
        Format::Json => write_json(config, &rows),
    };
    // render before writing anything so a bad plot leaves no partial output
    let svg = match &config.output.plot_path {
        Some(p) => Some((place(out_dir, Some(p), ""), plot::render(&rows)?)),
        None => None,
    };
    let path = place(out_dir, config.output.path.as_deref(), &name);
    write(&path, &bytes)?;
    let mut written = vec![path];
    if let Some((p, svg)) = svg {
        write(&p, svg.as_bytes())?;
        written.push(p);
    }
    Ok(written)
}

fn run_plot(config: &RunConfig, out_dir: &Path) -> Result<Artifacts, CliError> {
    let input = config
        .plot
        .as_ref()
        .map(|p| place(out_dir, Some(&p.input), ""))
        .ok_or_else(|| CliError::Input("plot input missing".into()))?;
    let bytes = fs::read(&input).map_err(|e| CliError::io(&input, e))?;
    let (_, rows) = read_csv(&bytes)?;
    let svg = plot::render(&rows)?;
    let path = place(out_dir, config.output.plot_path.as_deref(), "plot.svg");
    write(&path, svg.as_bytes())?;
    Ok(vec![path])
}

/// Outcome of a Monte-Carlo check against the optimal biased bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub bound_kind: BoundKind,
    pub bound_value: f64,
    pub crlb_kind: BoundKind,
    pub crlb_value: f64,
    pub v: u64,
    pub trials: usize,
    pub seed: u64,
    pub empirical_mle: f64,
    pub standard_error: f64,
    /// `empirical_mle + 3 SE >= bound_value`.
    pub bound_respected: bool,
}

pub fn verify(
    config: &RunConfig,
    exec: Execution,
) -> Result<(Verification, Option<Vec<TrialRecord>>), CliError> {
    let (Some(model), Some(prior_cfg), Some(mc)) = (&config.model, &config.prior, &config.mc)
    else {
        return Err(CliError::Input("verify needs model, prior and mc".into()));
    };
    let probe = Probe::from_spec(model)?;
    let fisher = probe.fisher_model();
    let prior = Prior::log_uniform(prior_cfg.a1, prior_cfg.a2)?;
    let grid = TemperatureGrid::new(
        prior_cfg.a1,
        prior_cfg.a2,
        config.grid.m,
        config.grid.spacing,
    )?;
    let info = model.info_kind();
    let obb = bound(
        BoundKind::optimal_biased(info),
        &prior,
        &fisher,
        config.v,
        &grid,
    )?;
    let crlb = bound(
        BoundKind::cramer_rao_like(info),
        &prior,
        &fisher,
        config.v,
        &grid,
    )?;
    let opts = McOptions {
        grid_nodes: config.grid.m,
        estimator: mc.estimator,
        keep_records: mc.dump_path.is_some(),
        exec,
        ..McOptions::new(config.v, mc.trials, mc.seed)
    };
    let batch = run_trials(&probe, &prior, &opts)?;
    let result = Verification {
        bound_kind: obb.kind,
        bound_value: obb.value,
        crlb_kind: crlb.kind,
        crlb_value: crlb.value,
        v: config.v,
        trials: batch.trials,
        seed: batch.seed,
        empirical_mle: batch.empirical_mle,
        standard_error: batch.standard_error,
        bound_respected: batch.empirical_mle + 3.0 * batch.standard_error >= obb.value,
    };
    Ok((result, batch.records))
}

#[derive(Serialize)]
struct VerifyDocument<'a> {
    config: &'a RunConfig,
    result: &'a Verification,
}

fn verification_csv(config: &RunConfig, r: &Verification) -> Result<Vec<u8>, CliError> {
    let mut out = format!(
        "# config: {}\n",
        serde_json::to_string(config).expect("config serializes")
    )
    .into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record([
            "bound_kind",
            "bound_value",
            "crlb_kind",
            "crlb_value",
            "v",
            "trials",
            "seed",
            "empirical_mle",
            "standard_error",
            "bound_respected",
        ])?;
        w.write_record([
            r.bound_kind.to_string(),
            float(r.bound_value),
            r.crlb_kind.to_string(),
            float(r.crlb_value),
            r.v.to_string(),
            r.trials.to_string(),
            r.seed.to_string(),
            float(r.empirical_mle),
            float(r.standard_error),
            r.bound_respected.to_string(),
        ])?;
        w.flush().map_err(|e| CliError::io("<buffer>", e))?;
    }
    Ok(out)
}

fn dump_csv(records: &[TrialRecord]) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(["trial", "theta", "estimate", "outcomes"])?;
        for (i, r) in records.iter().enumerate() {
            let outcomes: Vec<String> = r.outcomes.iter().map(u64::to_string).collect();
            w.write_record([
                i.to_string(),
                float(r.theta),
                float(r.estimate),
                outcomes.join(";"),
            ])?;
        }
        w.flush().map_err(|e| CliError::io("<buffer>", e))?;
    }
    Ok(out)
}

fn run_verify(config: &RunConfig, out_dir: &Path, exec: Execution) -> Result<Artifacts, CliError> {
    let (result, records) = verify(config, exec)?;
    let fmt = config.output.format;
    let bytes = match fmt {
        Format::Csv => verification_csv(config, &result)?,
        Format::Json => {
            let mut b = serde_json::to_vec_pretty(&VerifyDocument {
                config,
                result: &result,
            })
            .expect("result serializes");
            b.push(b'\n');
            b
        }
    };
    let path = place(
        out_dir,
        config.output.path.as_deref(),
        &format!("verify.{}", fmt.extension()),
    );
    write(&path, &bytes)?;
    let mut written = vec![path];
    if let (Some(dump), Some(records)) = (
        config.mc.as_ref().and_then(|m| m.dump_path.as_ref()),
        records,
    ) {
        let p = place(out_dir, Some(dump), "");
        write(&p, &dump_csv(&records)?)?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolved(text: &str) -> RunConfig {
        RunConfig::from_json(text).unwrap().resolve().unwrap()
    }

    #[test]
    fn bound_smoke() {
        let cfg = resolved(
            r#"{"command":"bound","model":{"kind":"spin_gas","n":100},"prior":{"a1":0.1,"a2":10},"grid":{"m":257}}"#,
        );
        let rows = table(&cfg, Execution::Sequential).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].kind, BoundKind::Cobb);
        assert_eq!(rows[1].kind, BoundKind::Ccrlb);
        assert!(rows[0].value < rows[1].value);
        assert!(rows.iter().all(|r| r.sweep_var.is_none()));
    }

    #[test]
    fn verify_respects_bound() {
        let cfg = resolved(
            r#"{"command":"verify","model":{"kind":"n_level","N":2},"prior":{"a1":0.1,"a2":1},"v":3,
                "grid":{"m":513},"mc":{"trials":400,"seed":5}}"#,
        );
        let (r, records) = verify(&cfg, Execution::Parallel).unwrap();
        assert!(records.is_none());
        assert!(r.bound_respected);
        assert!(r.bound_value < r.crlb_value);
        assert_eq!(r.trials, 400);
    }

    #[test]
    fn relative_paths_land_in_output_dir() {
        let dir = Path::new("/tmp/out");
        assert_eq!(place(dir, None, "a.csv"), dir.join("a.csv"));
        assert_eq!(
            place(dir, Some(Path::new("b/c.svg")), ""),
            dir.join("b/c.svg")
        );
        assert_eq!(
            place(dir, Some(Path::new("/abs.csv")), ""),
            PathBuf::from("/abs.csv")
        );
    }
}
