//! Composite training objectives over data, residual, and boundary pools.
//!
//! A trained model minimizes a weighted sum of four parts, each normalized
//! by its own pool size:
//!
//! ```text
//! L = L_d + L_b + L_r + L_p
//!
//! L_d = (1/N_d) sum_i sum_{f in M_i} w_d^f (y_f(x_i, t_i) - d_{i,f})^2
//! L_b = (1/N_b) sum_k sum_f   w_b^f (y_f(x_max, t_k) - y_f(x_min, t_k))^2
//! L_r = (1/N_r) sum_i sum_e   w_r^e R_e(x_i, t_i)^2
//! L_p = (w_p/N_r) sum_i sum_{f in P} (|y_f| - y_f)^2
//! ```
//!
//! `M_i` is the per-point observation mask, so partially observed data is
//! first class: a point may pin any subset of the output fields. `P` is the
//! set of fields required to stay nonnegative; the hinge is smooth except at
//! zero and vanishes identically on the feasible side.
//!
//! Learned physical coefficients ride along at the end of the parameter
//! vector as raw values and are mapped through softplus before they enter a
//! residual, which keeps them positive without constraints:
//!
//! ```text
//! params = [theta | raw],   xi_k = softplus(raw_k),
//! dL/draw_k = dL/dxi_k * sigmoid(raw_k)
//! ```
//!
//! Every sum is accumulated in fixed chunk order, so losses and gradients
//! are bitwise reproducible regardless of thread count, and the reported
//! total is exactly the sum of the reported parts.

mod residual;

pub use residual::{Param, ResidualForm};

use crate::error::{Error, Result};
use crate::nn::{
    chunked_loss, chunked_loss_and_grad, sigmoid, softplus, softplus_inverse, InputMap, MlpSpec,
};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Weights for each loss part. Data and boundary weights are per output
/// field; residual weights are per equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub w_d: Vec<f64>,
    pub w_b: Vec<f64>,
    pub w_r: Vec<f64>,
    pub w_p: f64,
}

/// One observation: field values at a space-time point, restricted to the
/// listed field indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub x: f64,
    pub t: f64,
    pub fields: Vec<usize>,
    pub values: Vec<f64>,
}

/// Training and validation collocation sets. Boundary pools hold times at
/// which the two domain endpoints are compared.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SamplePools {
    pub data: Vec<DataPoint>,
    pub residual: Vec<[f64; 2]>,
    pub boundary: Vec<f64>,
    pub data_val: Vec<DataPoint>,
    pub residual_val: Vec<[f64; 2]>,
    pub boundary_val: Vec<f64>,
}

/// One evaluation of the objective, broken into its weighted parts.
/// `residual[e]` is the contribution of equation `e` after weighting, and
/// `total` is exactly `data + boundary + sum(residual) + positivity`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub data: f64,
    pub boundary: f64,
    pub residual: Vec<f64>,
    pub positivity: f64,
    pub total: f64,
    pub learnables: Vec<f64>,
}

/// A network, an optional physics residual, weights, and sample pools,
/// assembled into one differentiable objective. Without a residual form the
/// objective is data (and boundary) fitting alone.
#[derive(Debug, Clone)]
pub struct ModelLoss {
    spec: MlpSpec,
    input_map: InputMap,
    residual_form: Option<ResidualForm>,
    weights: LossWeights,
    positivity_fields: Vec<usize>,
    pools: SamplePools,
    domain: (f64, f64),
}

/// Widest output and input blocks ever needed, for stack scratch.
const MAX_OUT: usize = 8;
const MAX_IN: usize = 4;

fn check_points(points: &[DataPoint], n_out: usize, label: &str) -> Result<()> {
    for p in points {
        if p.fields.len() != p.values.len() {
            return Err(Error::ShapeMismatch(format!(
                "{label} point at ({}, {}) has {} field indices but {} values",
                p.x,
                p.t,
                p.fields.len(),
                p.values.len()
            )));
        }
        if p.fields.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "{label} point at ({}, {}) observes no fields",
                p.x, p.t
            )));
        }
        if let Some(&f) = p.fields.iter().find(|&&f| f >= n_out) {
            return Err(Error::InvalidConfig(format!(
                "{label} point observes field {f} but the model has {n_out} outputs"
            )));
        }
    }
    Ok(())
}

fn check_weights(w: &[f64], n: usize, label: &str) -> Result<()> {
    if w.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{label} has {} entries, expected {n}",
            w.len()
        )));
    }
    if let Some(&bad) = w.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidConfig(format!("{label} entry {bad} is not a finite nonnegative weight")));
    }
    Ok(())
}

impl ModelLoss {
    pub fn new(
        spec: MlpSpec,
        input_map: InputMap,
        residual_form: Option<ResidualForm>,
        weights: LossWeights,
        positivity_fields: Vec<usize>,
        pools: SamplePools,
        domain: (f64, f64),
    ) -> Result<Self> {
        if input_map.dim() != spec.input_dim {
            return Err(Error::ShapeMismatch(format!(
                "input map produces {} values but the network takes {}",
                input_map.dim(),
                spec.input_dim
            )));
        }
        let n_out = spec.output_dim;
        if let Some(form) = &residual_form {
            if form.n_outputs() != n_out {
                return Err(Error::ShapeMismatch(format!(
                    "residual form couples {} fields but the network has {} outputs",
                    form.n_outputs(),
                    n_out
                )));
            }
        }
        let n_eq = residual_form.as_ref().map_or(0, |f| f.n_equations());
        check_weights(&weights.w_d, n_out, "data weight vector")?;
        check_weights(&weights.w_b, n_out, "boundary weight vector")?;
        check_weights(&weights.w_r, n_eq, "residual weight vector")?;
        if !weights.w_p.is_finite() || weights.w_p < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "positivity weight {} is not a finite nonnegative weight",
                weights.w_p
            )));
        }
        if let Some(&f) = positivity_fields.iter().find(|&&f| f >= n_out) {
            return Err(Error::InvalidConfig(format!(
                "positivity constrains field {f} but the model has {n_out} outputs"
            )));
        }
        if !(domain.0 < domain.1) {
            return Err(Error::InvalidConfig(format!(
                "domain [{}, {}] is empty",
                domain.0, domain.1
            )));
        }
        check_points(&pools.data, n_out, "data")?;
        check_points(&pools.data_val, n_out, "validation data")?;
        debug_assert!(n_out <= MAX_OUT && spec.input_dim <= MAX_IN);
        Ok(Self { spec, input_map, residual_form, weights, positivity_fields, pools, domain })
    }

    pub fn spec(&self) -> MlpSpec {
        self.spec
    }

    pub fn input_map(&self) -> &InputMap {
        &self.input_map
    }

    pub fn residual_form(&self) -> Option<&ResidualForm> {
        self.residual_form.as_ref()
    }

    pub fn pools(&self) -> &SamplePools {
        &self.pools
    }

    pub fn n_learnable(&self) -> usize {
        self.residual_form.as_ref().map_or(0, |f| f.n_learnable())
    }

    pub fn learnable_names(&self) -> Vec<&'static str> {
        self.residual_form.as_ref().map_or_else(Vec::new, |f| f.learnable_names())
    }

    /// Network parameters plus trailing raw learnable coefficients.
    pub fn n_params_ext(&self) -> usize {
        self.spec.n_params() + self.n_learnable()
    }

    /// Current values of the learned coefficients (after softplus).
    pub fn learnable_values(&self, params_ext: &[f64]) -> Vec<f64> {
        params_ext[self.spec.n_params()..].iter().map(|&r| softplus(r)).collect()
    }

    /// Fresh parameter vector: Glorot-initialized network weights followed
    /// by raw values whose softplus equals the given coefficient guesses.
    pub fn init_params<R: Rng>(&self, rng: &mut R, guesses: &[f64]) -> Result<Vec<f64>> {
        if guesses.len() != self.n_learnable() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficient guesses for {} learned coefficients",
                guesses.len(),
                self.n_learnable()
            )));
        }
        if let Some(&g) = guesses.iter().find(|g| !g.is_finite() || **g <= 0.0) {
            return Err(Error::InvalidParam(format!("coefficient guess {g} must be positive")));
        }
        let mut p = self.spec.init_params(rng);
        p.extend(guesses.iter().map(|&g| softplus_inverse(g)));
        Ok(p)
    }

    /// Loss report and gradient with respect to the extended parameters.
    pub fn loss_and_grad(&self, params_ext: &[f64]) -> (LossReport, Vec<f64>) {
        let n_theta = self.spec.n_params();
        let n_ext = self.n_params_ext();
        assert_eq!(params_ext.len(), n_ext, "parameter vector length");
        let theta = &params_ext[..n_theta];
        let raw = &params_ext[n_theta..];
        let xi: Vec<f64> = raw.iter().map(|&r| softplus(r)).collect();

        let spec = self.spec;
        let im = &self.input_map;
        let d = spec.input_dim;
        let n_out = spec.output_dim;

        let mut grad = vec![0.0; n_ext];
        let mut add = |g: &[f64]| {
            for (a, b) in grad.iter_mut().zip(g) {
                *a += b;
            }
        };

        // Data misfit: value-only forward and backprop per observation.
        let n_d = self.pools.data.len();
        let inv_nd = if n_d == 0 { 0.0 } else { 1.0 / n_d as f64 };
        let c_d: Vec<f64> = self.weights.w_d.iter().map(|w| 2.0 * w * inv_nd).collect();
        let (data_sum, g_d) = chunked_loss_and_grad(
            n_d,
            n_ext,
            || spec.workspace(),
            |ws, i, g| {
                let p = &self.pools.data[i];
                let (mut u, mut ux, mut ut) = ([0.0; MAX_IN], [0.0; MAX_IN], [0.0; MAX_IN]);
                im.embed(p.x, p.t, &mut u[..d], &mut ux[..d], &mut ut[..d]);
                spec.forward(theta, &u[..d], ws);
                let mut gy = [0.0; MAX_OUT];
                let mut s = 0.0;
                let y = ws.output();
                for (&f, &v) in p.fields.iter().zip(&p.values) {
                    let err = y[f] - v;
                    s += self.weights.w_d[f] * err * err;
                    gy[f] = c_d[f] * err;
                }
                spec.backprop_value(theta, ws, &gy[..n_out], &mut g[..n_theta]);
                s
            },
        );
        add(&g_d);

        // Periodic mismatch between the two domain endpoints.
        let n_b = self.pools.boundary.len();
        let inv_nb = if n_b == 0 { 0.0 } else { 1.0 / n_b as f64 };
        let c_b: Vec<f64> = self.weights.w_b.iter().map(|w| 2.0 * w * inv_nb).collect();
        let (boundary_sum, g_b) = chunked_loss_and_grad(
            n_b,
            n_ext,
            || (spec.workspace(), spec.workspace()),
            |(wa, wb), k, g| {
                let t = self.pools.boundary[k];
                let (mut u, mut ux, mut ut) = ([0.0; MAX_IN], [0.0; MAX_IN], [0.0; MAX_IN]);
                im.embed(self.domain.1, t, &mut u[..d], &mut ux[..d], &mut ut[..d]);
                spec.forward(theta, &u[..d], wa);
                im.embed(self.domain.0, t, &mut u[..d], &mut ux[..d], &mut ut[..d]);
                spec.forward(theta, &u[..d], wb);
                let (mut gya, mut gyb) = ([0.0; MAX_OUT], [0.0; MAX_OUT]);
                let mut s = 0.0;
                for f in 0..n_out {
                    let e = wa.output()[f] - wb.output()[f];
                    s += self.weights.w_b[f] * e * e;
                    gya[f] = c_b[f] * e;
                    gyb[f] = -gya[f];
                }
                spec.backprop_value(theta, wa, &gya[..n_out], &mut g[..n_theta]);
                spec.backprop_value(theta, wb, &gyb[..n_out], &mut g[..n_theta]);
                s
            },
        );
        add(&g_b);

        // Physics residual and positivity share one tangent-forward pass per
        // collocation point. Per-equation square sums and the positivity sum
        // ride in extra gradient slots so the chunked fold keeps them in the
        // same deterministic order as the gradient itself.
        let n_eq = self.residual_form.as_ref().map_or(0, |f| f.n_equations());
        let mut residual_part = vec![0.0; n_eq];
        let mut positivity_part = 0.0;
        if let Some(form) = &self.residual_form {
            let n_r = self.pools.residual.len();
            let inv_nr = if n_r == 0 { 0.0 } else { 1.0 / n_r as f64 };
            let c_r: Vec<f64> = self.weights.w_r.iter().map(|w| 2.0 * w * inv_nr).collect();
            let c_p = 8.0 * self.weights.w_p * inv_nr;
            let (_, g_r) = chunked_loss_and_grad(
                n_r,
                n_ext + n_eq + 1,
                || spec.workspace(),
                |ws, i, g| {
                    let [x, t] = self.pools.residual[i];
                    let (mut u, mut ux, mut ut) = ([0.0; MAX_IN], [0.0; MAX_IN], [0.0; MAX_IN]);
                    im.embed(x, t, &mut u[..d], &mut ux[..d], &mut ut[..d]);
                    spec.forward_full(theta, &u[..d], &ux[..d], &ut[..d], ws);

                    let (gnet, acc) = g.split_at_mut(n_ext);
                    let mut r = [0.0; MAX_OUT];
                    let mut gr = [0.0; MAX_OUT];
                    let (mut gy, mut gyx, mut gyt) =
                        ([0.0; MAX_OUT], [0.0; MAX_OUT], [0.0; MAX_OUT]);
                    {
                        let (y, yx, yt) = (ws.output(), ws.output_dx(), ws.output_dt());
                        form.residuals(&xi, y, yx, yt, &mut r[..n_eq]);
                        for e in 0..n_eq {
                            acc[e] += r[e] * r[e];
                            gr[e] = c_r[e] * r[e];
                        }
                        form.pullback(
                            &xi,
                            y,
                            &gr[..n_eq],
                            &mut gy[..n_out],
                            &mut gyx[..n_out],
                            &mut gyt[..n_out],
                            &mut gnet[n_theta..],
                        );
                        for &f in &self.positivity_fields {
                            let v = y[f];
                            if v < 0.0 {
                                acc[n_eq] += 4.0 * v * v;
                                gy[f] += c_p * v;
                            }
                        }
                    }
                    spec.backprop_full(
                        theta,
                        ws,
                        &gy[..n_out],
                        &gyx[..n_out],
                        &gyt[..n_out],
                        &mut gnet[..n_theta],
                    );
                    0.0
                },
            );
            add(&g_r[..n_ext]);
            for e in 0..n_eq {
                residual_part[e] = self.weights.w_r[e] * g_r[n_ext + e] * inv_nr;
            }
            positivity_part = self.weights.w_p * g_r[n_ext + n_eq] * inv_nr;
        }

        // Chain the softplus map from raw storage to coefficient values.
        for (g, &r) in grad[n_theta..].iter_mut().zip(raw) {
            *g *= sigmoid(r);
        }

        let data = data_sum * inv_nd;
        let boundary = boundary_sum * inv_nb;
        let residual_total: f64 = residual_part.iter().sum();
        let total = data + boundary + residual_total + positivity_part;
        let report = LossReport {
            data,
            boundary,
            residual: residual_part,
            positivity: positivity_part,
            total,
            learnables: xi,
        };
        (report, grad)
    }

    /// Same objective on the held-out pools, value only. `None` when no
    /// validation points exist.
    pub fn validation_loss(&self, params_ext: &[f64]) -> Option<f64> {
        let pools = &self.pools;
        if pools.data_val.is_empty() && pools.residual_val.is_empty() && pools.boundary_val.is_empty()
        {
            return None;
        }
        let n_theta = self.spec.n_params();
        assert_eq!(params_ext.len(), self.n_params_ext(), "parameter vector length");
        let theta = &params_ext[..n_theta];
        let xi: Vec<f64> = params_ext[n_theta..].iter().map(|&r| softplus(r)).collect();
        let spec = self.spec;
        let im = &self.input_map;
        let d = spec.input_dim;

        let n_d = pools.data_val.len();
        let inv_nd = if n_d == 0 { 0.0 } else { 1.0 / n_d as f64 };
        let data = inv_nd
            * chunked_loss(
                n_d,
                || spec.workspace(),
                |ws, i| {
                    let p = &pools.data_val[i];
                    let (mut u, mut ux, mut ut) = ([0.0; MAX_IN], [0.0; MAX_IN], [0.0; MAX_IN]);
                    im.embed(p.x, p.t, &mut u[..d], &mut ux[..d], &mut ut[..d]);
                    spec.forward(theta, &u[..d], ws);
                    let y = ws.output();
                    p.fields
                        .iter()
                        .zip(&p.values)
                        .map(|(&f, &v)| {
                            let err = y[f] - v;
                            self.weights.w_d[f] * err * err
                        })
                        .sum()
                },
            );

        let n_b = pools.boundary_val.len();
        let inv_nb = if n_b == 0 { 0.0 } else { 1.0 / n_b as f64 };
        let boundary = inv_nb
            * chunked_loss(
                n_b,
                || spec.workspace(),
                |ws, k| {
                    let t = pools.boundary_val[k];
                    let (mut u, mut ux, mut ut) = ([0.0; MAX_IN], [0.0; MAX_IN], [0.0; MAX_IN]);
                    let mut ya = [0.0; MAX_OUT];
                    im.embed(self.domain.1, t, &mut u[..d], &mut ux[..d], &mut ut[..d]);
                    spec.forward(theta, &u[..d], ws);
                    ya[..spec.output_dim].copy_from_slice(ws.output());
                    im.embed(self.domain.0, t, &mut u[..d], &mut ux[..d], &mut ut[..d]);
                    spec.forward(theta, &u[..d], ws);
                    let yb = ws.output();
                    (0..spec.output_dim)
                        .map(|f| {
                            let e = ya[f] - yb[f];
                            self.weights.w_b[f] * e * e
                        })
                        .sum()
                },
            );

        let mut rp = 0.0;
        if let Some(form) = &self.residual_form {
            let n_r = pools.residual_val.len();
            let inv_nr = if n_r == 0 { 0.0 } else { 1.0 / n_r as f64 };
            let n_eq = form.n_equations();
            rp = inv_nr
                * chunked_loss(
                    n_r,
                    || spec.workspace(),
                    |ws, i| {
                        let [x, t] = pools.residual_val[i];
                        let (mut u, mut ux, mut ut) =
                            ([0.0; MAX_IN], [0.0; MAX_IN], [0.0; MAX_IN]);
                        im.embed(x, t, &mut u[..d], &mut ux[..d], &mut ut[..d]);
                        spec.forward_full(theta, &u[..d], &ux[..d], &ut[..d], ws);
                        let (y, yx, yt) = (ws.output(), ws.output_dx(), ws.output_dt());
                        let mut r = [0.0; MAX_OUT];
                        form.residuals(&xi, y, yx, yt, &mut r[..n_eq]);
                        let mut s = 0.0;
                        for e in 0..n_eq {
                            s += self.weights.w_r[e] * r[e] * r[e];
                        }
                        for &f in &self.positivity_fields {
                            let v = y[f];
                            if v < 0.0 {
                                s += self.weights.w_p * 4.0 * v * v;
                            }
                        }
                        s
                    },
                );
        }

        Some(data + boundary + rp)
    }
}
