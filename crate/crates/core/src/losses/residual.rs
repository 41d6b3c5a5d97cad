//! PDE residuals evaluated on network outputs and their derivatives.
//!
//! Three residual forms, one per training mode:
//!
//! ```text
//! kinetic (non-AP):  R+- = e^2 dt f+-  +-  e dx f+-  -  (s/2)(f-+ - f+-)
//! macroscopic (AP):  Rr  = dt r + dx j
//!                    Rj  = e^2 dt j + dx r + s j
//! epidemic (AP):     R_c   = dt c + dx J_c - s_c(S, I)
//!                    R_Jc  = tau_c dt J_c + D_c dx c - g_c(U)
//! ```
//!
//! The macroscopic and epidemic forms are asymptotic preserving: setting the
//! relaxation scale to zero (with the diffusion coefficients `D_c` held
//! fixed) leaves exactly the residual of the limiting diffusion system,
//! whereas the kinetic form collapses to the equilibrium constraint
//! `f+ = f-` and loses the dynamics.
//!
//! Physical coefficients that are being inferred enter through a slice of
//! current values, and `pullback` returns their cotangents alongside those
//! of the network outputs, so inverse problems train the coefficients and
//! the weights through one gradient path.

use serde::{Deserialize, Serialize};

/// A physical coefficient: pinned, or read from the learnable slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Param {
    Fixed { value: f64 },
    Learned,
}

impl Param {
    #[inline]
    fn value(&self, xi: &[f64], cursor: &mut usize) -> f64 {
        match *self {
            Param::Fixed { value } => value,
            Param::Learned => {
                let v = xi[*cursor];
                *cursor += 1;
                v
            }
        }
    }

    fn is_learned(&self) -> bool {
        matches!(self, Param::Learned)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "kebab-case")]
pub enum ResidualForm {
    /// Two-speed kinetic system in `(f_plus, f_minus)`.
    GtKinetic { epsilon: f64, sigma: Param },
    /// Macroscopic system in `(rho, j)`.
    GtMacro { epsilon: f64, sigma: Param },
    /// Six-field epidemic transport system in `(S, I, R, J_S, J_I, J_R)`.
    /// The diffusion coefficients are carried independently of `lambda` and
    /// `tau` (physically `D_c = lambda_c^2 tau_c`) so that the
    /// zero-relaxation limit `tau = 0` with `D` held fixed is representable;
    /// there the flux residuals reduce exactly to `D_c dx c + J_c`.
    Sir { lambda: [f64; 3], tau: [f64; 3], diffusion: [f64; 3], beta: Param, gamma: Param },
}

impl ResidualForm {
    pub fn n_outputs(&self) -> usize {
        match self {
            ResidualForm::GtKinetic { .. } | ResidualForm::GtMacro { .. } => 2,
            ResidualForm::Sir { .. } => 6,
        }
    }

    pub fn n_equations(&self) -> usize {
        self.n_outputs()
    }

    pub fn n_learnable(&self) -> usize {
        self.learnable_names().len()
    }

    /// Names of the learned coefficients, in slice order.
    pub fn learnable_names(&self) -> Vec<&'static str> {
        let mut names = Vec::new();
        match self {
            ResidualForm::GtKinetic { sigma, .. } | ResidualForm::GtMacro { sigma, .. } => {
                if sigma.is_learned() {
                    names.push("sigma");
                }
            }
            ResidualForm::Sir { beta, gamma, .. } => {
                if beta.is_learned() {
                    names.push("beta");
                }
                if gamma.is_learned() {
                    names.push("gamma");
                }
            }
        }
        names
    }

    /// Fill `r` with the residuals at one point, given output values and
    /// their x- and t-derivatives, and learned coefficient values `xi`.
    pub fn residuals(&self, xi: &[f64], y: &[f64], yx: &[f64], yt: &[f64], r: &mut [f64]) {
        match *self {
            ResidualForm::GtKinetic { epsilon: e, sigma } => {
                let s = sigma.value(xi, &mut 0);
                let e2 = e * e;
                r[0] = e2 * yt[0] + e * yx[0] - 0.5 * s * (y[1] - y[0]);
                r[1] = e2 * yt[1] - e * yx[1] - 0.5 * s * (y[0] - y[1]);
            }
            ResidualForm::GtMacro { epsilon: e, sigma } => {
                let s = sigma.value(xi, &mut 0);
                r[0] = yt[0] + yx[1];
                r[1] = e * e * yt[1] + yx[0] + s * y[1];
            }
            ResidualForm::Sir { lambda: l, tau, diffusion: d, beta, gamma } => {
                let mut c = 0;
                let b = beta.value(xi, &mut c);
                let g = gamma.value(xi, &mut c);
                let infection = b * y[0] * y[1];
                let flux_infection = b * y[3] * y[1];
                r[0] = yt[0] + yx[3] + infection;
                r[1] = yt[1] + yx[4] - infection + g * y[1];
                r[2] = yt[2] + yx[5] - g * y[1];
                r[3] = tau[0] * yt[3] + d[0] * yx[0] + tau[0] * flux_infection + y[3];
                r[4] = tau[1] * yt[4] + d[1] * yx[1] - tau[1] * (l[1] / l[0]) * flux_infection
                    + tau[1] * g * y[4]
                    + y[4];
                r[5] = tau[2] * yt[5] + d[2] * yx[2] - tau[2] * (l[2] / l[1]) * g * y[4] + y[5];
            }
        }
    }

    /// Reverse-mode pullback: given residual cotangents `gr`, accumulate
    /// cotangents of the outputs, their derivatives, and the learned
    /// coefficients. All output buffers are accumulated into, not assigned.
    /// Derivative values are not needed: every residual is linear in them
    /// with coefficients that never depend on the outputs.
    #[allow(clippy::too_many_arguments)]
    pub fn pullback(
        &self,
        xi: &[f64],
        y: &[f64],
        gr: &[f64],
        gy: &mut [f64],
        gyx: &mut [f64],
        gyt: &mut [f64],
        gxi: &mut [f64],
    ) {
        match *self {
            ResidualForm::GtKinetic { epsilon: e, sigma } => {
                let s = sigma.value(xi, &mut 0);
                let e2 = e * e;
                gyt[0] += e2 * gr[0];
                gyx[0] += e * gr[0];
                gy[0] += 0.5 * s * gr[0];
                gy[1] -= 0.5 * s * gr[0];
                gyt[1] += e2 * gr[1];
                gyx[1] -= e * gr[1];
                gy[1] += 0.5 * s * gr[1];
                gy[0] -= 0.5 * s * gr[1];
                if sigma.is_learned() {
                    gxi[0] -= 0.5 * ((y[1] - y[0]) * gr[0] + (y[0] - y[1]) * gr[1]);
                }
            }
            ResidualForm::GtMacro { epsilon: e, sigma } => {
                let s = sigma.value(xi, &mut 0);
                gyt[0] += gr[0];
                gyx[1] += gr[0];
                gyt[1] += e * e * gr[1];
                gyx[0] += gr[1];
                gy[1] += s * gr[1];
                if sigma.is_learned() {
                    gxi[0] += y[1] * gr[1];
                }
            }
            ResidualForm::Sir { lambda: l, tau, diffusion: d, beta, gamma } => {
                let mut c = 0;
                let b = beta.value(xi, &mut c);
                let g = gamma.value(xi, &mut c);
                let ri = l[1] / l[0];
                let rr = l[2] / l[1];

                gyt[0] += gr[0];
                gyx[3] += gr[0];
                gy[0] += b * y[1] * gr[0];
                gy[1] += b * y[0] * gr[0];

                gyt[1] += gr[1];
                gyx[4] += gr[1];
                gy[0] -= b * y[1] * gr[1];
                gy[1] += (g - b * y[0]) * gr[1];

                gyt[2] += gr[2];
                gyx[5] += gr[2];
                gy[1] -= g * gr[2];

                gyt[3] += tau[0] * gr[3];
                gyx[0] += d[0] * gr[3];
                gy[3] += (tau[0] * b * y[1] + 1.0) * gr[3];
                gy[1] += tau[0] * b * y[3] * gr[3];

                gyt[4] += tau[1] * gr[4];
                gyx[1] += d[1] * gr[4];
                gy[3] -= tau[1] * ri * b * y[1] * gr[4];
                gy[1] -= tau[1] * ri * b * y[3] * gr[4];
                gy[4] += (tau[1] * g + 1.0) * gr[4];

                gyt[5] += tau[2] * gr[5];
                gyx[2] += d[2] * gr[5];
                gy[4] -= tau[2] * rr * g * gr[5];
                gy[5] += gr[5];

                let mut cursor = 0;
                if beta.is_learned() {
                    let si = y[0] * y[1];
                    let ji = y[3] * y[1];
                    gxi[cursor] +=
                        si * gr[0] - si * gr[1] + tau[0] * ji * gr[3] - tau[1] * ri * ji * gr[4];
                    cursor += 1;
                }
                if gamma.is_learned() {
                    gxi[cursor] += y[1] * gr[1] - y[1] * gr[2] + tau[1] * y[4] * gr[4]
                        - tau[2] * rr * y[4] * gr[5];
                }
            }
        }
    }
}
