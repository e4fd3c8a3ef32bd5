//! Table serialization.
//!
//! CSV layout: a `# config: <json>` comment line, a header row, then one row
//! per bound. Floats are written with 17 significant digits so a parsed table
//! is bit-identical to the one in memory.

use serde::Serialize;
use thermobound::{BoundKind, ModelParams, SweepRow};

use crate::config::RunConfig;
use crate::CliError;

pub const COLUMNS: [&str; 8] = [
    "kind",
    "sweep_var",
    "sweep_value",
    "value",
    "grid_nodes",
    "convergence_estimate",
    "v",
    "model_params_json",
];

const CONFIG_PREFIX: &str = "# config: ";

/// One output row. `sweep_var`/`sweep_value` are empty for single bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub kind: BoundKind,
    pub sweep_var: Option<String>,
    pub sweep_value: Option<u64>,
    pub value: f64,
    pub grid_nodes: usize,
    pub convergence_estimate: f64,
    pub v: u64,
    pub model_params: ModelParams,
}

impl TableRow {
    pub fn from_sweep(row: &SweepRow, tagged: bool) -> Self {
        let r = &row.report;
        TableRow {
            kind: r.kind,
            sweep_var: tagged.then(|| row.sweep_var.to_string()),
            sweep_value: tagged.then_some(row.sweep_value),
            value: r.value,
            grid_nodes: r.grid_nodes,
            convergence_estimate: r.convergence_estimate,
            v: r.v,
            model_params: r.model_params.clone(),
        }
    }
}

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn params_json(p: &ModelParams) -> String {
    serde_json::to_string(p).expect("model parameters serialize")
}

fn config_json(config: &RunConfig) -> String {
    serde_json::to_string(config).expect("config serializes")
}

pub fn write_csv(config: &RunConfig, rows: &[TableRow]) -> Result<Vec<u8>, CliError> {
    let mut out = format!("{CONFIG_PREFIX}{}\n", config_json(config)).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(COLUMNS)?;
        for r in rows {
            w.write_record([
                r.kind.as_str().to_string(),
                r.sweep_var.clone().unwrap_or_default(),
                r.sweep_value.map(|x| x.to_string()).unwrap_or_default(),
                float(r.value),
                r.grid_nodes.to_string(),
                float(r.convergence_estimate),
                r.v.to_string(),
                params_json(&r.model_params),
            ])?;
        }
        w.flush().map_err(|e| CliError::Io {
            path: "<buffer>".into(),
            source: e,
        })?;
    }
    Ok(out)
}

#[derive(Serialize)]
struct JsonTable<'a> {
    config: &'a RunConfig,
    rows: &'a [TableRow],
}

pub fn write_json(config: &RunConfig, rows: &[TableRow]) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&JsonTable { config, rows }).expect("table serializes");
    out.push(b'\n');
    out
}

fn bad(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Input(format!("line {line}: {}", msg.into()))
}

fn parse_field<T: std::str::FromStr>(s: &str, name: &str, line: usize) -> Result<T, CliError> {
    s.parse()
        .map_err(|_| bad(line, format!("bad {name} {s:?}")))
}

/// Parses a table written by [`write_csv`]. Returns the embedded config text
/// (if present) and the rows.
pub fn read_csv(bytes: &[u8]) -> Result<(Option<String>, Vec<TableRow>), CliError> {
    let text =
        std::str::from_utf8(bytes).map_err(|_| CliError::Input("table is not UTF-8".into()))?;
    let config = text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix(CONFIG_PREFIX))
        .map(str::to_string);
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(bytes);
    let header = reader.headers()?.clone();
    if header.iter().ne(COLUMNS) {
        return Err(CliError::Input(format!(
            "unexpected header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(i + 2, |p| p.line() as usize);
        let kind: BoundKind = rec[0]
            .parse()
            .map_err(|_| bad(line, format!("bad kind {:?}", &rec[0])))?;
        let sweep_var = (!rec[1].is_empty()).then(|| rec[1].to_string());
        let sweep_value = if rec[2].is_empty() {
            None
        } else {
            Some(parse_field(&rec[2], "sweep_value", line)?)
        };
        rows.push(TableRow {
            kind,
            sweep_var,
            sweep_value,
            value: parse_field(&rec[3], "value", line)?,
            grid_nodes: parse_field(&rec[4], "grid_nodes", line)?,
            convergence_estimate: parse_field(&rec[5], "convergence_estimate", line)?,
            v: parse_field(&rec[6], "v", line)?,
            model_params: serde_json::from_str(&rec[7]).map_err(|e| bad(line, e.to_string()))?,
        });
    }
    Ok((config, rows))
}
