//! Smooth positivity transform for learnable physical parameters.
//!
//! Parameters that must stay positive (relaxation rates, epidemic rates) are
//! trained in an unconstrained raw coordinate and mapped through softplus,
//! `xi = ln(1 + e^raw)`, whose chain factor is the sigmoid of the raw value.

/// `ln(1 + e^x)`, overflow-safe on both tails.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Inverse of [`softplus`] on `y > 0`: `ln(e^y - 1)`.
pub fn softplus_inverse(y: f64) -> f64 {
    debug_assert!(y > 0.0);
    y + (-(-y).exp_m1()).ln()
}

/// `d softplus / dx`, numerically stable on both tails.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
