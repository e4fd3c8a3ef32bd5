//! Self-contained SVG 1.1 line plots of sweep tables.
//!
//! One curve per (bound kind, fixed parameters). Optimal biased bounds are
//! solid, Cramer-Rao-like bounds dashed; curves sharing parameters share a
//! color. The x axis is logarithmic for particle/level sweeps and linear for
//! repetition sweeps; the y axis is always logarithmic.

use std::fmt::Write;

use crate::output::TableRow;
use crate::CliError;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["black", "red", "blue", "green", "orange", "purple"];

struct Curve {
    kind: thermobound::BoundKind,
    label: String,
    color: &'static str,
    points: Vec<(f64, f64)>,
}

#[derive(Clone, Copy)]
struct Axis {
    log: bool,
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
            (a.min(x), b.max(x))
        });
        if log {
            lo = lo.log10().floor();
            hi = hi.log10().ceil();
            if hi <= lo {
                hi = lo + 1.0;
            }
        } else if hi <= lo {
            lo -= 1.0;
            hi += 1.0;
        }
        Axis { log, lo, hi }
    }

    /// Position in [0, 1].
    fn unit(&self, x: f64) -> f64 {
        let t = if self.log { x.log10() } else { x };
        (t - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (lo, hi) = (self.lo as i32, self.hi as i32);
            return (lo..=hi)
                .map(|k| (10f64.powi(k), format!("1e{k}")))
                .collect();
        }
        let raw = (self.hi - self.lo) / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .into_iter()
            .map(|s| s * mag)
            .find(|&s| s >= raw)
            .unwrap_or(10.0 * mag);
        let mut t = (self.lo / step).ceil() * step;
        let mut out = Vec::new();
        while t <= self.hi + 1e-9 * step {
            out.push((t, format!("{}", (t / step).round() * step)));
            t += step;
        }
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn fixed_label(row: &TableRow, var: &str) -> String {
    let p = &row.model_params;
    let mut parts = Vec::new();
    if let Some(n) = p.n.filter(|_| var != "n") {
        parts.push(format!("n={n}"));
    }
    if let Some(n) = p.levels.filter(|_| var != "N") {
        parts.push(format!("N={n}"));
    }
    if var != "v" {
        parts.push(format!("v={}", row.v));
    }
    parts.join(", ")
}

fn curves(rows: &[TableRow], var: &str) -> Vec<Curve> {
    let mut labels: Vec<String> = Vec::new();
    let mut out: Vec<Curve> = Vec::new();
    for row in rows {
        let label = fixed_label(row, var);
        if !labels.contains(&label) {
            labels.push(label.clone());
        }
        let x = row.sweep_value.expect("checked by caller") as f64;
        match out
            .iter_mut()
            .find(|c| c.kind == row.kind && c.label == label)
        {
            Some(c) => c.points.push((x, row.value)),
            None => {
                let idx = labels.iter().position(|l| *l == label).unwrap_or(0);
                out.push(Curve {
                    kind: row.kind,
                    label,
                    color: PALETTE[idx % PALETTE.len()],
                    points: vec![(x, row.value)],
                });
            }
        }
    }
    for c in &mut out {
        c.points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    out
}

/// Renders `rows` (all tagged with the same sweep variable) as an SVG document.
pub fn render(rows: &[TableRow]) -> Result<String, CliError> {
    let first = rows
        .first()
        .ok_or_else(|| CliError::Input("cannot plot an empty table".into()))?;
    let var = first
        .sweep_var
        .clone()
        .ok_or_else(|| CliError::Input("table has no sweep variable to plot against".into()))?;
    if let Some(r) = rows
        .iter()
        .find(|r| r.sweep_var.as_deref() != Some(var.as_str()))
    {
        return Err(CliError::Input(format!(
            "mixed sweep variables {var:?} and {:?}",
            r.sweep_var.as_deref().unwrap_or("")
        )));
    }
    if let Some(r) = rows
        .iter()
        .find(|r| !(r.value > 0.0 && r.value.is_finite()))
    {
        return Err(CliError::Input(format!(
            "{} value {} cannot go on a log axis",
            r.kind, r.value
        )));
    }

    let curves = curves(rows, &var);
    let x_axis = Axis::fit(
        rows.iter().map(|r| r.sweep_value.unwrap_or(0) as f64),
        var != "v",
    );
    let y_axis = Axis::fit(rows.iter().map(|r| r.value), true);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let px = |x: f64| LEFT + x_axis.unit(x) * pw;
    let py = |y: f64| TOP + (1.0 - y_axis.unit(y)) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );

    for (x, label) in x_axis.ticks() {
        let gx = px(x);
        let _ = writeln!(
            s,
            r#"<line x1="{gx:.2}" y1="{:.2}" x2="{gx:.2}" y2="{:.2}" stroke="black"/>"#,
            TOP + ph,
            TOP + ph + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{gx:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
            TOP + ph + 20.0
        );
    }
    for (y, label) in y_axis.ticks() {
        let gy = py(y);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{gy:.2}" x2="{LEFT}" y2="{gy:.2}" stroke="black"/>"#,
            LEFT - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
            LEFT - 8.0,
            gy + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(&var)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">mean logarithmic error bound</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for c in &curves {
        let dash = if c.kind.is_optimal_biased() {
            ""
        } else {
            r#" stroke-dasharray="6 4""#
        };
        if let [(x, y)] = c.points[..] {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#,
                px(x),
                py(y),
                c.color
            );
        } else {
            let pts: Vec<String> = c
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
                c.color,
                pts.join(" ")
            );
        }
    }

    let lx = LEFT + pw + 15.0;
    for (i, c) in curves.iter().enumerate() {
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let dash = if c.kind.is_optimal_biased() {
            ""
        } else {
            r#" stroke-dasharray="6 4""#
        };
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="1.5"{dash}/>"#,
            lx + 25.0,
            c.color
        );
        let text = if c.label.is_empty() {
            c.kind.to_string()
        } else {
            format!("{} {}", c.kind, c.label)
        };
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 30.0,
            ly + 4.0,
            escape(&text)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
