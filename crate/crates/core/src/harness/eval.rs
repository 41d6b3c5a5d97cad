//! Prediction on the reference lattice and error metrics against it.
//!
//! A trained network is sampled at every cell center and output time of the
//! reference solution, kinetic outputs are converted to the macroscopic
//! variables
//!
//! ```text
//! rho = f+ + f-,  j = (f+ - f-) / eps
//! ```
//!
//! and each field is scored by the relative L2 error
//!
//! ```text
//! e_U = ||U_NN - U|| / ||U||
//! ```
//!
//! accumulated over the whole lattice, and separately over the training
//! and forecast horizons when the preset splits time.

use crate::error::{Error, Result};
use crate::fv::SpaceTimeField;
use crate::models::gt_kinetic_to_macro_point;
use crate::nn::MlpWorkspace;
use serde::{Deserialize, Serialize};

use super::preset::{ModelKind, Physics};
use super::train::TrainedModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnableError {
    pub name: String,
    pub estimate: f64,
    pub truth: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    /// Relative L2 error per field over the full lattice.
    pub field_errors: Vec<(String, f64)>,
    /// Errors restricted to the training horizon, when one is configured.
    pub train_window_errors: Vec<(String, f64)>,
    /// Errors restricted to times after the training horizon.
    pub forecast_window_errors: Vec<(String, f64)>,
    pub learnable_errors: Vec<LearnableError>,
}

pub fn relative_error(estimate: f64, truth: f64) -> f64 {
    (estimate - truth).abs() / truth.abs()
}

/// Evaluate the network at every lattice point of `truth`, in the truth's
/// own field convention.
pub fn predict_field(model: &TrainedModel, truth: &SpaceTimeField) -> SpaceTimeField {
    let spec = model.loss.spec();
    let im = model.loss.input_map();
    let d = spec.input_dim;
    let theta = &model.params[..spec.n_params()];
    let kinetic_output = matches!(
        model.preset.kind,
        ModelKind::GtKineticPinn | ModelKind::GtDataOnlyDnn
    );
    let epsilon = match &model.preset.physics {
        Physics::Gt { params, .. } => params.epsilon,
        Physics::Sir { .. } => f64::NAN,
    };

    let mut ws: MlpWorkspace = spec.workspace();
    let (mut u, mut ux, mut ut) = (vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    let n_cells = truth.grid.n_cells;
    let mut values = Vec::with_capacity(truth.n_snapshots());
    for &t in &truth.times {
        let mut snap = vec![vec![0.0; n_cells]; truth.n_fields()];
        for c in 0..n_cells {
            im.embed(truth.grid.center(c), t, &mut u, &mut ux, &mut ut);
            spec.forward(theta, &u, &mut ws);
            let y = ws.output();
            if kinetic_output {
                let (rho, j) = gt_kinetic_to_macro_point(y[0], y[1], epsilon);
                snap[0][c] = rho;
                snap[1][c] = j;
            } else {
                for (f, row) in snap.iter_mut().enumerate() {
                    row[c] = y[f];
                }
            }
        }
        values.push(snap);
    }
    SpaceTimeField {
        grid: truth.grid,
        times: truth.times.clone(),
        field_names: truth.field_names.clone(),
        values,
    }
}

/// Relative L2 error per field, restricted to snapshots whose time passes
/// `keep`. A field that is identically zero in the window scores by the
/// absolute L2 norm of the prediction instead.
pub fn rel_errors_where(
    pred: &SpaceTimeField,
    truth: &SpaceTimeField,
    keep: impl Fn(f64) -> bool,
) -> Result<Vec<(String, f64)>> {
    if pred.times != truth.times
        || pred.field_names != truth.field_names
        || pred.grid != truth.grid
    {
        return Err(Error::ShapeMismatch(
            "prediction and reference lattices differ".into(),
        ));
    }
    let n_fields = truth.n_fields();
    let mut diff_sq = vec![0.0; n_fields];
    let mut ref_sq = vec![0.0; n_fields];
    let mut any = false;
    for (s, &t) in truth.times.iter().enumerate() {
        if !keep(t) {
            continue;
        }
        any = true;
        for f in 0..n_fields {
            for (a, b) in pred.at(s, f).iter().zip(truth.at(s, f)) {
                diff_sq[f] += (a - b) * (a - b);
                ref_sq[f] += b * b;
            }
        }
    }
    if !any {
        return Err(Error::InvalidConfig("no snapshots fall in the window".into()));
    }
    Ok(truth
        .field_names
        .iter()
        .zip(diff_sq.iter().zip(&ref_sq))
        .map(|(name, (&d, &r))| {
            let e = if r > 0.0 { (d / r).sqrt() } else { d.sqrt() };
            (name.clone(), e)
        })
        .collect())
}

pub fn evaluate(model: &TrainedModel, truth: &SpaceTimeField) -> Result<EvalMetrics> {
    let pred = predict_field(model, truth);
    let field_errors = rel_errors_where(&pred, truth, |_| true)?;
    let (train_window_errors, forecast_window_errors) = match model.preset.forecast_split {
        Some(split) => (
            rel_errors_where(&pred, truth, |t| t <= split)?,
            rel_errors_where(&pred, truth, |t| t > split)?,
        ),
        None => (Vec::new(), Vec::new()),
    };

    let names = model.loss.learnable_names();
    let estimates = model.learnables();
    let truths = model.preset.physics.learnable_truths();
    if names.len() != truths.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} learned parameters but {} reference values",
            names.len(),
            truths.len()
        )));
    }
    let learnable_errors = names
        .iter()
        .zip(estimates.iter().zip(&truths))
        .map(|(name, (&est, &tru))| LearnableError {
            name: name.to_string(),
            estimate: est,
            truth: tru,
            relative_error: relative_error(est, tru),
        })
        .collect();

    Ok(EvalMetrics { field_errors, train_window_errors, forecast_window_errors, learnable_errors })
}
