//! Full-batch training loop with three stopping rules.
//!
//! Every epoch evaluates the loss and its gradient over all training pools,
//! records the per-term report, then takes one Adam step. The validation
//! loss is evaluated every ten epochs whenever validation pools exist, as a
//! monitoring signal. The run ends at the epoch cap, or once the training
//! loss drops below the preset threshold, or, only when a patience is
//! configured, once the validation loss has not improved for `patience`
//! epochs. A non-finite loss aborts with the epoch at which it appeared.

use crate::error::{Error, Result};
use crate::fv::SpaceTimeField;
use crate::losses::{LossReport, ModelLoss};
use crate::nn::Adam;
use serde::{Deserialize, Serialize};

use super::preset::ExperimentPreset;

/// Epochs between validation evaluations.
const VALIDATION_EVERY: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Loss parts and learnable values at the start of the epoch.
    pub report: LossReport,
    /// Validation loss after this epoch's step, when evaluated.
    pub validation: Option<f64>,
}

/// A finished run: the loss it optimized, where it ended, and how it got
/// there.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub preset: ExperimentPreset,
    pub seed: u64,
    pub params: Vec<f64>,
    pub history: Vec<EpochRecord>,
    pub loss: ModelLoss,
}

impl TrainedModel {
    /// Physical values of the learned parameters at the end of the run.
    pub fn learnables(&self) -> Vec<f64> {
        self.loss.learnable_values(&self.params)
    }
}

pub fn train(
    preset: &ExperimentPreset,
    truth: &SpaceTimeField,
    seed: u64,
) -> Result<TrainedModel> {
    let (loss, mut params) = preset.build(truth, seed)?;
    let mut adam = Adam::new(preset.learning_rate, params.len());
    let mut history = Vec::with_capacity(preset.max_epochs.min(1 << 16));
    let mut best_val = f64::INFINITY;
    let mut stale = 0usize;

    for epoch in 1..=preset.max_epochs {
        let (report, grad) = loss.loss_and_grad(&params);
        let total = report.total;
        if !total.is_finite() {
            return Err(Error::Diverged { epoch, loss: total });
        }
        adam.step(&mut params, &grad);

        let mut validation = None;
        if epoch % VALIDATION_EVERY == 0 {
            if let Some(v) = loss.validation_loss(&params) {
                validation = Some(v);
                if v < best_val {
                    best_val = v;
                    stale = 0;
                } else {
                    stale += VALIDATION_EVERY;
                }
            }
        }
        history.push(EpochRecord { epoch, report, validation });

        if total < preset.loss_threshold {
            break;
        }
        if preset.patience.is_some_and(|p| stale >= p) {
            break;
        }
    }
    Ok(TrainedModel { preset: preset.clone(), seed, params, history, loss })
}

/// Trailing window-`w` moving average of the training loss, one value per
/// epoch from the first full window onward.
pub fn smoothed_training_loss(history: &[EpochRecord], w: usize) -> Vec<f64> {
    if w == 0 || history.len() < w {
        return Vec::new();
    }
    let totals: Vec<f64> = history.iter().map(|r| r.report.total).collect();
    let inv = 1.0 / w as f64;
    let mut out = Vec::with_capacity(totals.len() - w + 1);
    // Re-summed per window: O(n w), but history lengths make this cheap and
    // it avoids drift from a running sum.
    for k in w..=totals.len() {
        out.push(totals[k - w..k].iter().sum::<f64>() * inv);
    }
    out
}
