//! Text persistence: datasets, checkpoints, histories, metrics, and grids.
//!
//! Every file is comma-separated text with a `#`-prefixed header block.
//! Floats are written with 17 significant digits, so parsing a rendered
//! file reproduces the exact 64-bit values, and re-rendering reproduces
//! the exact bytes.

use crate::{fmt_f64, CliError, CliResult};
use apnn_core::fv::SpaceTimeField;
use apnn_core::harness::{EvalMetrics, ExperimentPreset, Physics, TrainedModel};
use apnn_core::Grid1D;

fn parse_f64(s: &str, what: &str) -> CliResult<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CliError::Config(format!("{what}: '{s}' is not a number")))
}

fn parse_usize(s: &str, what: &str) -> CliResult<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| CliError::Config(format!("{what}: '{s}' is not a count")))
}

/// Pull the value of a `# name: value` header line.
fn header_value<'a>(lines: &[&'a str], name: &str) -> CliResult<&'a str> {
    let tag = format!("# {name}:");
    lines
        .iter()
        .find_map(|l| l.strip_prefix(tag.as_str()))
        .map(str::trim)
        .ok_or_else(|| CliError::Config(format!("missing '{tag}' header line")))
}

/// A reference solution on disk: identity header plus one row per lattice
/// point, snapshot-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFile {
    pub model: String,
    pub params: Vec<(String, f64)>,
    pub seed: u64,
    pub field: SpaceTimeField,
}

impl DatasetFile {
    pub fn new(preset: &ExperimentPreset, field: SpaceTimeField) -> Self {
        let (model, params) = match &preset.physics {
            Physics::Gt { params, .. } => (
                "gt".to_string(),
                vec![("epsilon".to_string(), params.epsilon), ("sigma".to_string(), params.sigma)],
            ),
            Physics::Sir { params, .. } => {
                let l = params.lambdas();
                let t = params.taus();
                (
                    "sir".to_string(),
                    vec![
                        ("beta".to_string(), params.beta),
                        ("gamma".to_string(), params.gamma),
                        ("lambda_sq".to_string(), l[0] * l[0]),
                        ("tau".to_string(), t[0]),
                    ],
                )
            }
        };
        DatasetFile { model, params, seed: preset.seed, field }
    }

    pub fn render(&self) -> String {
        let f = &self.field;
        let mut out = String::new();
        out.push_str("# apnn dataset\n");
        out.push_str(&format!("# model: {}\n", self.model));
        out.push_str(&format!(
            "# grid: {} {} {}\n",
            fmt_f64(f.grid.x_min),
            fmt_f64(f.grid.x_max),
            f.grid.n_cells
        ));
        out.push_str(&format!("# fields: {}\n", f.field_names.join(",")));
        let params: Vec<String> =
            self.params.iter().map(|(k, v)| format!("{k}={}", fmt_f64(*v))).collect();
        out.push_str(&format!("# params: {}\n", params.join(" ")));
        out.push_str(&format!("# seed: {}\n", self.seed));
        out.push_str(&format!("# columns: x,t,{}\n", f.field_names.join(",")));
        for s in 0..f.n_snapshots() {
            let t = fmt_f64(f.times[s]);
            for c in 0..f.grid.n_cells {
                out.push_str(&fmt_f64(f.grid.center(c)));
                out.push(',');
                out.push_str(&t);
                for fld in 0..f.n_fields() {
                    out.push(',');
                    out.push_str(&fmt_f64(f.at(s, fld)[c]));
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let lines: Vec<&str> = text.lines().collect();
        let header: Vec<&str> = lines.iter().copied().filter(|l| l.starts_with('#')).collect();
        let model = header_value(&header, "model")?.to_string();
        let grid_parts: Vec<&str> =
            header_value(&header, "grid")?.split_whitespace().collect();
        if grid_parts.len() != 3 {
            return Err(CliError::Config("grid header needs x_min x_max n_cells".into()));
        }
        let grid = Grid1D {
            x_min: parse_f64(grid_parts[0], "grid x_min")?,
            x_max: parse_f64(grid_parts[1], "grid x_max")?,
            n_cells: parse_usize(grid_parts[2], "grid n_cells")?,
        };
        let field_names: Vec<String> =
            header_value(&header, "fields")?.split(',').map(|s| s.trim().to_string()).collect();
        let mut params = Vec::new();
        for pair in header_value(&header, "params")?.split_whitespace() {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("bad params entry '{pair}'")))?;
            params.push((k.to_string(), parse_f64(v, k)?));
        }
        let seed = header_value(&header, "seed")?
            .parse::<u64>()
            .map_err(|_| CliError::Config("seed header is not an integer".into()))?;

        let n_fields = field_names.len();
        let rows: Vec<&str> =
            lines.iter().copied().filter(|l| !l.starts_with('#') && !l.trim().is_empty()).collect();
        if rows.is_empty() || rows.len() % grid.n_cells != 0 {
            return Err(CliError::Config(format!(
                "{} data rows do not fill a {}-cell lattice",
                rows.len(),
                grid.n_cells
            )));
        }
        let n_snapshots = rows.len() / grid.n_cells;
        let mut times = Vec::with_capacity(n_snapshots);
        let mut values = Vec::with_capacity(n_snapshots);
        for s in 0..n_snapshots {
            let mut snap = vec![vec![0.0; grid.n_cells]; n_fields];
            let mut t = 0.0;
            for c in 0..grid.n_cells {
                let row = rows[s * grid.n_cells + c];
                let cols: Vec<&str> = row.split(',').collect();
                if cols.len() != 2 + n_fields {
                    return Err(CliError::Config(format!(
                        "row '{row}' has {} columns, expected {}",
                        cols.len(),
                        2 + n_fields
                    )));
                }
                let row_t = parse_f64(cols[1], "time column")?;
                if c == 0 {
                    t = row_t;
                } else if row_t != t {
                    return Err(CliError::Config(
                        "rows of one snapshot carry different times".into(),
                    ));
                }
                for fld in 0..n_fields {
                    snap[fld][c] = parse_f64(cols[2 + fld], &field_names[fld])?;
                }
            }
            times.push(t);
            values.push(snap);
        }
        Ok(DatasetFile {
            model,
            params,
            seed,
            field: SpaceTimeField { grid, times, field_names, values },
        })
    }
}

/// Network parameters at the end of a run, with enough provenance to
/// rebuild the exact experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub preset: ExperimentPreset,
    pub seed: u64,
    pub params: Vec<f64>,
}

impl Checkpoint {
    /// `learnables` is the human-readable (name, physical value) list for
    /// the header; it is derived data and not read back.
    pub fn render(&self, learnables: &[(String, f64)]) -> String {
        let config =
            serde_json::to_string(&self.preset).expect("presets are always serializable");
        let mut out = String::new();
        out.push_str("# apnn checkpoint\n");
        out.push_str(&format!("# config: {config}\n"));
        out.push_str(&format!("# seed: {}\n", self.seed));
        let shown: Vec<String> =
            learnables.iter().map(|(k, v)| format!("{k}={}", fmt_f64(*v))).collect();
        out.push_str(&format!(
            "# learnables: {}\n",
            if shown.is_empty() { "none".to_string() } else { shown.join(" ") }
        ));
        out.push_str("# columns: value\n");
        for v in &self.params {
            out.push_str(&fmt_f64(*v));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let lines: Vec<&str> = text.lines().collect();
        let header: Vec<&str> = lines.iter().copied().filter(|l| l.starts_with('#')).collect();
        let preset: ExperimentPreset = serde_json::from_str(header_value(&header, "config")?)
            .map_err(|e| CliError::Config(format!("bad checkpoint config: {e}")))?;
        let seed = header_value(&header, "seed")?
            .parse::<u64>()
            .map_err(|_| CliError::Config("seed header is not an integer".into()))?;
        let params = lines
            .iter()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .map(|l| parse_f64(l, "parameter"))
            .collect::<CliResult<Vec<f64>>>()?;
        Ok(Checkpoint { preset, seed, params })
    }
}

/// Epoch table: one row per epoch with every loss part, the validation
/// loss when it was evaluated, and the learned physical parameters.
pub fn render_history(model: &TrainedModel) -> String {
    let n_eq = model.loss.residual_form().map_or(0, |f| f.n_equations());
    let mut cols = vec!["epoch".to_string(), "data".to_string(), "boundary".to_string()];
    for e in 0..n_eq {
        cols.push(format!("residual_{e}"));
    }
    cols.push("positivity".into());
    cols.push("total".into());
    cols.push("validation".into());
    for name in model.loss.learnable_names() {
        cols.push(name.to_string());
    }
    let mut out = String::new();
    out.push_str("# apnn history\n");
    out.push_str(&format!("# columns: {}\n", cols.join(",")));
    for rec in &model.history {
        let r = &rec.report;
        out.push_str(&rec.epoch.to_string());
        out.push(',');
        out.push_str(&fmt_f64(r.data));
        out.push(',');
        out.push_str(&fmt_f64(r.boundary));
        for e in 0..n_eq {
            out.push(',');
            out.push_str(&fmt_f64(r.residual[e]));
        }
        out.push(',');
        out.push_str(&fmt_f64(r.positivity));
        out.push(',');
        out.push_str(&fmt_f64(r.total));
        out.push(',');
        if let Some(v) = rec.validation {
            out.push_str(&fmt_f64(v));
        }
        for &x in &r.learnables {
            out.push(',');
            out.push_str(&fmt_f64(x));
        }
        out.push('\n');
    }
    out
}

/// Evaluation results as `key,value` rows.
pub fn render_metrics(metrics: &EvalMetrics) -> String {
    let mut out = String::new();
    out.push_str("# apnn metrics\n# columns: key,value\n");
    let mut push_all = |prefix: &str, errs: &[(String, f64)]| {
        for (name, e) in errs {
            out.push_str(&format!("{prefix}.{name},{}\n", fmt_f64(*e)));
        }
    };
    push_all("field_error", &metrics.field_errors);
    push_all("train_error", &metrics.train_window_errors);
    push_all("forecast_error", &metrics.forecast_window_errors);
    for l in &metrics.learnable_errors {
        out.push_str(&format!("learnable.{}.estimate,{}\n", l.name, fmt_f64(l.estimate)));
        out.push_str(&format!("learnable.{}.truth,{}\n", l.name, fmt_f64(l.truth)));
        out.push_str(&format!(
            "learnable.{}.relative_error,{}\n",
            l.name,
            fmt_f64(l.relative_error)
        ));
    }
    out
}

/// One field as long-form `(x, t, value)` rows for heatmap plotting.
pub fn render_grid(field: &SpaceTimeField, f: usize) -> String {
    let mut out = String::new();
    out.push_str(&format!("# apnn grid\n# field: {}\n# columns: x,t,value\n", field.field_names[f]));
    for s in 0..field.n_snapshots() {
        let t = fmt_f64(field.times[s]);
        for c in 0..field.grid.n_cells {
            out.push_str(&fmt_f64(field.grid.center(c)));
            out.push(',');
            out.push_str(&t);
            out.push(',');
            out.push_str(&fmt_f64(field.at(s, f)[c]));
            out.push('\n');
        }
    }
    out
}

/// Prediction and reference side by side along one snapshot.
pub fn render_slice(
    pred: &SpaceTimeField,
    truth: &SpaceTimeField,
    f: usize,
    snapshot: usize,
) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# apnn slice\n# field: {}\n# t: {}\n# columns: x,predicted,reference\n",
        truth.field_names[f],
        fmt_f64(truth.times[snapshot])
    ));
    for c in 0..truth.grid.n_cells {
        out.push_str(&fmt_f64(truth.grid.center(c)));
        out.push(',');
        out.push_str(&fmt_f64(pred.at(snapshot, f)[c]));
        out.push(',');
        out.push_str(&fmt_f64(truth.at(snapshot, f)[c]));
        out.push('\n');
    }
    out
}
