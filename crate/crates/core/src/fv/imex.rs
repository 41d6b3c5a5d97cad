//! IMEX Runge-Kutta pair and spatial discretization options.
//!
//! The time integrator is the 3-stage, second-order ARS(2,2,2) pair
//! (gamma = 1 - 1/sqrt(2), delta = 1 - 1/(2 gamma)):
//!
//! ```text
//! explicit                     implicit
//! 0      |  0     0      0     0      |  0     0      0
//! gamma  | gamma  0      0     gamma  |  0    gamma   0
//! 1      | delta 1-delta 0     1      |  0   1-gamma gamma
//! -------+-------------------  -------+--------------------
//!        | delta 1-delta 0            |  0   1-gamma gamma
//! ```
//!
//! The weights equal the last row of each tableau, so the step value is the
//! final stage value (globally stiffly accurate): when the implicit part is
//! infinitely stiff the step lands exactly on the relaxed manifold. Every
//! stage on which stiff terms act has a nonzero implicit diagonal.

/// gamma = 1 - 1/sqrt(2).
pub const ARS_GAMMA: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
/// delta = 1 - 1/(2 gamma).
pub const ARS_DELTA: f64 = 1.0 - 0.5 / ARS_GAMMA;

pub const STAGES: usize = 3;

/// Explicit tableau (strictly lower triangular).
pub const A_EX: [[f64; STAGES]; STAGES] = [
    [0.0, 0.0, 0.0],
    [ARS_GAMMA, 0.0, 0.0],
    [ARS_DELTA, 1.0 - ARS_DELTA, 0.0],
];

/// Implicit tableau (diagonally implicit, first column zero).
pub const A_IM: [[f64; STAGES]; STAGES] = [
    [0.0, 0.0, 0.0],
    [0.0, ARS_GAMMA, 0.0],
    [0.0, 1.0 - ARS_GAMMA, ARS_GAMMA],
];

/// Interface reconstruction for the explicit density fluxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reconstruction {
    /// Second-order central average; no numerical dissipation. The right
    /// choice in the stiff regime, where upwind dissipation would scale
    /// like dx over the relaxation length and swamp the physical diffusion.
    Central,
    /// Slope-limited MUSCL (minmod) upwinding in the characteristic
    /// variables of the transport operator; for wave-dominated runs.
    MusclMinmod,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ImexConfig {
    /// Safety factor applied to the stability bound.
    pub cfl: f64,
    pub reconstruction: Reconstruction,
}

impl ImexConfig {
    pub const DEFAULT_CFL: f64 = 0.45;

    /// Relaxation scales at or above this are treated as wave-dominated.
    pub const HYPERBOLIC_THRESHOLD: f64 = 0.1;

    pub fn new(cfl: f64, reconstruction: Reconstruction) -> Self {
        Self { cfl, reconstruction }
    }

    /// Regime default for the Goldstein-Taylor model: upwinding when the
    /// relaxation scale is order one, central when it is small.
    pub fn default_gt(epsilon: f64) -> Self {
        let reconstruction = if epsilon >= Self::HYPERBOLIC_THRESHOLD {
            Reconstruction::MusclMinmod
        } else {
            Reconstruction::Central
        };
        Self { cfl: Self::DEFAULT_CFL, reconstruction }
    }

    /// Regime default for the SIR transport model, keyed on the largest
    /// relaxation time.
    pub fn default_sir(tau_max: f64) -> Self {
        let reconstruction = if tau_max >= Self::HYPERBOLIC_THRESHOLD {
            Reconstruction::MusclMinmod
        } else {
            Reconstruction::Central
        };
        Self { cfl: Self::DEFAULT_CFL, reconstruction }
    }
}

/// minmod slope limiter.
#[inline]
pub fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() <= b.abs() {
        a
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_order_conditions() {
        let c_ex: Vec<f64> = A_EX.iter().map(|r| r.iter().sum()).collect();
        let c_im: Vec<f64> = A_IM.iter().map(|r| r.iter().sum()).collect();
        // Abscissae agree between the two parts.
        for (a, b) in c_ex.iter().zip(&c_im) {
            assert!((a - b).abs() < 1e-15);
        }
        let w_ex = A_EX[STAGES - 1];
        let w_im = A_IM[STAGES - 1];
        // Consistency.
        assert!((w_ex.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((w_im.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        // Second order of each part and of the coupling.
        let dot = |w: &[f64; STAGES], c: &[f64]| -> f64 {
            w.iter().zip(c).map(|(a, b)| a * b).sum()
        };
        assert!((dot(&w_ex, &c_ex) - 0.5).abs() < 1e-15);
        assert!((dot(&w_im, &c_im) - 0.5).abs() < 1e-15);
        assert!((dot(&w_ex, &c_im) - 0.5).abs() < 1e-15);
        assert!((dot(&w_im, &c_ex) - 0.5).abs() < 1e-15);
        // Final abscissa 1: the step value is the last stage value.
        assert!((c_ex[STAGES - 1] - 1.0).abs() < 1e-15);
        assert!((c_im[STAGES - 1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn minmod_limits() {
        assert_eq!(minmod(1.0, 2.0), 1.0);
        assert_eq!(minmod(-3.0, -2.0), -2.0);
        assert_eq!(minmod(1.0, -1.0), 0.0);
        assert_eq!(minmod(0.0, 5.0), 0.0);
    }
}
