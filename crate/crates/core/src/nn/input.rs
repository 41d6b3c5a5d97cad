//! Input embeddings from physical coordinates `(x, t)` to network inputs.
//!
//! On a periodic domain the raw coordinate would force the network to learn
//! the periodicity; embedding `x` on a circle bakes it in exactly:
//!
//! ```text
//! u = (cos(w x), sin(w x), t),   w = 2 pi alpha / length
//! ```
//!
//! The embedding Jacobian columns seed the network's tangent streams, so
//! derivative outputs are with respect to the physical coordinates, not the
//! embedded ones.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InputMap {
    /// Raw `(x, t)`.
    Identity,
    /// Circle embedding with `alpha` full turns across a domain of the
    /// given length.
    Periodic { alpha: f64, length: f64 },
}

impl InputMap {
    pub fn dim(&self) -> usize {
        match self {
            InputMap::Identity => 2,
            InputMap::Periodic { .. } => 3,
        }
    }

    /// Fill the embedded input and its x- and t-derivatives.
    pub fn embed(&self, x: f64, t: f64, u: &mut [f64], ux: &mut [f64], ut: &mut [f64]) {
        match *self {
            InputMap::Identity => {
                u.copy_from_slice(&[x, t]);
                ux.copy_from_slice(&[1.0, 0.0]);
                ut.copy_from_slice(&[0.0, 1.0]);
            }
            InputMap::Periodic { alpha, length } => {
                let w = alpha * std::f64::consts::TAU / length;
                let (s, c) = (w * x).sin_cos();
                u.copy_from_slice(&[c, s, t]);
                ux.copy_from_slice(&[-w * s, w * c, 0.0]);
                ut.copy_from_slice(&[0.0, 0.0, 1.0]);
            }
        }
    }
}
