//! Dense networks with hand-rolled differentiation.
//!
//! Residual losses need the network's first derivatives with respect to its
//! two physical inputs, and the trainer needs exact gradients of everything
//! with respect to the weights. Both come from the same two-pass scheme:
//!
//! * forward: alongside the value stream `z`, two tangent streams propagate
//!   `zx = dz/dx` and `zt = dz/dt` through every layer. Tangents see the
//!   same weights but no biases, and pick up a factor `1 - z^2` at each
//!   tanh.
//! * reverse: one backward sweep turns cotangents of `(y, dy/dx, dy/dt)`
//!   into gradients for every weight and bias. The only subtlety is the
//!   second-order term through the activation slope,
//!
//! ```text
//! ga = s . gz - 2 z . s . (gzx . ax + gzt . at),   s = 1 - z^2
//! ```
//!
//! where `ax, at` are the stored pre-activation tangents.
//!
//! Everything is f64, allocation-free per sample, and deterministic: batch
//! sums are chunked in a fixed order regardless of thread count.

mod adam;
mod input;
mod mlp;
mod objective;
mod transform;

pub use adam::Adam;
pub use input::InputMap;
pub use mlp::{MlpSpec, MlpWorkspace};
pub use objective::{chunked_loss, chunked_loss_and_grad, CHUNK};
pub use transform::{sigmoid, softplus, softplus_inverse};
