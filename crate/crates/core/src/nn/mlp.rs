//! Multilayer perceptron with fused value/tangent propagation.
//!
//! Layer recursion, counting every weight layer:
//!
//! ```text
//! z^1 = W^1 u + b^1                      (affine in)
//! z^l = tanh(W^l z^{l-1} + b^l)          l = 2 .. L-1
//! z^L = W^L z^{L-1} + b^L                (affine out)
//! ```
//!
//! Weights are stored transposed (input-major), so the hot loops stream a
//! contiguous row per input component and fuse the three accumulations
//! (value, x tangent, t tangent) into one pass over it. Parameters live in a
//! single flat vector, `[Wt | b]` per layer in order, which is also the
//! gradient layout.

use crate::error::{Error, Result};
use crate::fastmath;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden_width: usize,
    /// Number of weight layers; the `depth - 2` interior ones are tanh.
    pub depth: usize,
    pub output_dim: usize,
}

impl MlpSpec {
    pub fn new(input_dim: usize, hidden_width: usize, depth: usize, output_dim: usize) -> Result<Self> {
        if input_dim == 0 || hidden_width == 0 || output_dim == 0 {
            return Err(Error::InvalidConfig("network dimensions must be positive".into()));
        }
        if depth < 2 {
            return Err(Error::InvalidConfig(format!(
                "depth counts weight layers and must be >= 2, got {depth}"
            )));
        }
        Ok(Self { input_dim, hidden_width, depth, output_dim })
    }

    #[inline]
    fn layer_dims(&self, l: usize) -> (usize, usize) {
        let n_in = if l == 0 { self.input_dim } else { self.hidden_width };
        let n_out = if l == self.depth - 1 { self.output_dim } else { self.hidden_width };
        (n_in, n_out)
    }

    #[inline]
    fn is_tanh(&self, l: usize) -> bool {
        l > 0 && l < self.depth - 1
    }

    pub fn n_params(&self) -> usize {
        (0..self.depth)
            .map(|l| {
                let (n_in, n_out) = self.layer_dims(l);
                n_in * n_out + n_out
            })
            .sum()
    }

    /// Glorot-uniform weights, zero biases; draw order is fixed by the
    /// storage layout, so a seed pins the whole initialization.
    pub fn init_params<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let mut p = vec![0.0; self.n_params()];
        let mut off = 0;
        for l in 0..self.depth {
            let (n_in, n_out) = self.layer_dims(l);
            let limit = (6.0 / (n_in + n_out) as f64).sqrt();
            for w in &mut p[off..off + n_in * n_out] {
                *w = rng.gen_range(-limit..=limit);
            }
            off += n_in * n_out + n_out;
        }
        p
    }

    pub fn workspace(&self) -> MlpWorkspace {
        let mut off = Vec::with_capacity(self.depth + 1);
        off.push(0);
        for l in 0..self.depth {
            off.push(off[l] + self.layer_dims(l).1);
        }
        let total = off[self.depth];
        let widest = self.hidden_width.max(self.output_dim).max(self.input_dim);
        MlpWorkspace {
            off,
            z: vec![0.0; total],
            s: vec![0.0; total],
            ax: vec![0.0; total],
            at: vec![0.0; total],
            u0: vec![0.0; self.input_dim],
            ux0: vec![0.0; self.input_dim],
            ut0: vec![0.0; self.input_dim],
            gz: vec![0.0; widest],
            gzx: vec![0.0; widest],
            gzt: vec![0.0; widest],
            gu: vec![0.0; widest],
            gux: vec![0.0; widest],
            gut: vec![0.0; widest],
        }
    }

    /// Value-only forward; output lands in `ws.output()`.
    pub fn forward(&self, params: &[f64], input: &[f64], ws: &mut MlpWorkspace) {
        ws.u0.copy_from_slice(input);
        let mut w_off = 0;
        for l in 0..self.depth {
            let (n_in, n_out) = self.layer_dims(l);
            let (lo, hi) = (ws.off[l], ws.off[l + 1]);
            let wt = &params[w_off..w_off + n_in * n_out];
            let b = &params[w_off + n_in * n_out..w_off + n_in * n_out + n_out];

            let (prev, cur) = ws.z.split_at_mut(lo);
            let a = &mut cur[..n_out];
            let u: &[f64] = if l == 0 { &ws.u0 } else { &prev[lo - n_in..lo] };
            a.copy_from_slice(b);
            for k in 0..n_in {
                let uk = u[k];
                let row = &wt[k * n_out..(k + 1) * n_out];
                for j in 0..n_out {
                    a[j] += row[j] * uk;
                }
            }
            let sl = &mut ws.s[lo..hi];
            if self.is_tanh(l) {
                for j in 0..n_out {
                    let t = fastmath::tanh(a[j]);
                    a[j] = t;
                    sl[j] = 1.0 - t * t;
                }
            } else {
                sl.fill(1.0);
            }
            w_off += n_in * n_out + n_out;
        }
    }

    /// Forward with both input tangents; afterwards `ws.output()`,
    /// `ws.output_dx()` and `ws.output_dt()` hold `y`, `dy/dx`, `dy/dt`.
    /// `input_dx` and `input_dt` are the derivatives of the embedded input
    /// with respect to the two physical coordinates.
    pub fn forward_full(
        &self,
        params: &[f64],
        input: &[f64],
        input_dx: &[f64],
        input_dt: &[f64],
        ws: &mut MlpWorkspace,
    ) {
        ws.u0.copy_from_slice(input);
        ws.ux0.copy_from_slice(input_dx);
        ws.ut0.copy_from_slice(input_dt);
        let mut w_off = 0;
        for l in 0..self.depth {
            let (n_in, n_out) = self.layer_dims(l);
            let (lo, hi) = (ws.off[l], ws.off[l + 1]);
            let wt = &params[w_off..w_off + n_in * n_out];
            let b = &params[w_off + n_in * n_out..w_off + n_in * n_out + n_out];

            let (zp, zc) = ws.z.split_at_mut(lo);
            let (axp, axc) = ws.ax.split_at_mut(lo);
            let (atp, atc) = ws.at.split_at_mut(lo);
            let a = &mut zc[..n_out];
            let axl = &mut axc[..n_out];
            let atl = &mut atc[..n_out];
            a.copy_from_slice(b);
            axl.fill(0.0);
            atl.fill(0.0);

            let sp = &ws.s[..lo];
            for k in 0..n_in {
                // Post-activation value and tangents of the previous layer;
                // tangents fold in the stored slope on the fly.
                let (uk, uxk, utk) = if l == 0 {
                    (ws.u0[k], ws.ux0[k], ws.ut0[k])
                } else {
                    let p = lo - n_in + k;
                    (zp[p], sp[p] * axp[p], sp[p] * atp[p])
                };
                let row = &wt[k * n_out..(k + 1) * n_out];
                for j in 0..n_out {
                    a[j] += row[j] * uk;
                    axl[j] += row[j] * uxk;
                    atl[j] += row[j] * utk;
                }
            }
            let sl = &mut ws.s[lo..hi];
            if self.is_tanh(l) {
                for j in 0..n_out {
                    let t = fastmath::tanh(a[j]);
                    a[j] = t;
                    sl[j] = 1.0 - t * t;
                }
            } else {
                sl.fill(1.0);
            }
            w_off += n_in * n_out + n_out;
        }
    }

    /// Reverse sweep after [`Self::forward_full`] on the same parameters and
    /// input. `gy`, `gyx`, `gyt` are the loss cotangents of the output value
    /// and its two derivatives; weight and bias gradients accumulate into
    /// `grad` (same layout as `params`, at least `n_params` long).
    pub fn backprop_full(
        &self,
        params: &[f64],
        ws: &mut MlpWorkspace,
        gy: &[f64],
        gyx: &[f64],
        gyt: &[f64],
        grad: &mut [f64],
    ) {
        let out_dim = self.output_dim;
        ws.gz[..out_dim].copy_from_slice(gy);
        ws.gzx[..out_dim].copy_from_slice(gyx);
        ws.gzt[..out_dim].copy_from_slice(gyt);

        let mut w_off = self.n_params();
        for l in (0..self.depth).rev() {
            let (n_in, n_out) = self.layer_dims(l);
            w_off -= n_in * n_out + n_out;
            let lo = ws.off[l];

            // Post cotangents -> pre-activation cotangents.
            if self.is_tanh(l) {
                for j in 0..n_out {
                    let (z, s) = (ws.z[lo + j], ws.s[lo + j]);
                    let (gz, gzx, gzt) = (ws.gz[j], ws.gzx[j], ws.gzt[j]);
                    ws.gz[j] = s * gz
                        - 2.0 * z * s * (gzx * ws.ax[lo + j] + gzt * ws.at[lo + j]);
                    ws.gzx[j] = s * gzx;
                    ws.gzt[j] = s * gzt;
                }
            }

            let wt = &params[w_off..w_off + n_in * n_out];
            let (gwt, gb) = grad[w_off..w_off + n_in * n_out + n_out].split_at_mut(n_in * n_out);
            for j in 0..n_out {
                gb[j] += ws.gz[j];
            }
            for k in 0..n_in {
                let (uk, uxk, utk) = if l == 0 {
                    (ws.u0[k], ws.ux0[k], ws.ut0[k])
                } else {
                    let p = lo - n_in + k;
                    (ws.z[p], ws.s[p] * ws.ax[p], ws.s[p] * ws.at[p])
                };
                let row = &wt[k * n_out..(k + 1) * n_out];
                let grow = &mut gwt[k * n_out..(k + 1) * n_out];
                let (mut du, mut dux, mut dut) = (0.0, 0.0, 0.0);
                for j in 0..n_out {
                    grow[j] += ws.gz[j] * uk + ws.gzx[j] * uxk + ws.gzt[j] * utk;
                    let w = row[j];
                    du += w * ws.gz[j];
                    dux += w * ws.gzx[j];
                    dut += w * ws.gzt[j];
                }
                ws.gu[k] = du;
                ws.gux[k] = dux;
                ws.gut[k] = dut;
            }
            std::mem::swap(&mut ws.gz, &mut ws.gu);
            std::mem::swap(&mut ws.gzx, &mut ws.gux);
            std::mem::swap(&mut ws.gzt, &mut ws.gut);
        }
    }

    /// Reverse sweep after [`Self::forward`]; value cotangent only.
    pub fn backprop_value(&self, params: &[f64], ws: &mut MlpWorkspace, gy: &[f64], grad: &mut [f64]) {
        ws.gz[..self.output_dim].copy_from_slice(gy);
        let mut w_off = self.n_params();
        for l in (0..self.depth).rev() {
            let (n_in, n_out) = self.layer_dims(l);
            w_off -= n_in * n_out + n_out;
            let lo = ws.off[l];
            if self.is_tanh(l) {
                for j in 0..n_out {
                    ws.gz[j] *= ws.s[lo + j];
                }
            }
            let wt = &params[w_off..w_off + n_in * n_out];
            let (gwt, gb) = grad[w_off..w_off + n_in * n_out + n_out].split_at_mut(n_in * n_out);
            for j in 0..n_out {
                gb[j] += ws.gz[j];
            }
            for k in 0..n_in {
                let uk = if l == 0 { ws.u0[k] } else { ws.z[lo - n_in + k] };
                let row = &wt[k * n_out..(k + 1) * n_out];
                let grow = &mut gwt[k * n_out..(k + 1) * n_out];
                let mut du = 0.0;
                for j in 0..n_out {
                    grow[j] += ws.gz[j] * uk;
                    du += row[j] * ws.gz[j];
                }
                ws.gu[k] = du;
            }
            std::mem::swap(&mut ws.gz, &mut ws.gu);
        }
    }
}

/// Per-thread scratch for one network shape. Forward passes fill the stored
/// state; the matching backprop must run before the next forward reuses it.
#[derive(Debug, Clone)]
pub struct MlpWorkspace {
    off: Vec<usize>,
    z: Vec<f64>,
    s: Vec<f64>,
    ax: Vec<f64>,
    at: Vec<f64>,
    u0: Vec<f64>,
    ux0: Vec<f64>,
    ut0: Vec<f64>,
    gz: Vec<f64>,
    gzx: Vec<f64>,
    gzt: Vec<f64>,
    gu: Vec<f64>,
    gux: Vec<f64>,
    gut: Vec<f64>,
}

impl MlpWorkspace {
    #[inline]
    pub fn output(&self) -> &[f64] {
        let last = self.off.len() - 1;
        &self.z[self.off[last - 1]..self.off[last]]
    }

    /// dy/dx of the last forward; valid because the output layer is affine,
    /// so its pre-activation tangent is the output tangent.
    #[inline]
    pub fn output_dx(&self) -> &[f64] {
        let last = self.off.len() - 1;
        &self.ax[self.off[last - 1]..self.off[last]]
    }

    #[inline]
    pub fn output_dt(&self) -> &[f64] {
        let last = self.off.len() - 1;
        &self.at[self.off[last - 1]..self.off[last]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec_small() -> MlpSpec {
        MlpSpec::new(2, 8, 4, 2).unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    // Scalar objective with fixed cotangent coefficients per output so both
    // value and derivative paths get exercised:
    // C = sum_o (A_o y_o + B_o yx_o + D_o yt_o)^2
    fn objective(spec: &MlpSpec, params: &[f64], ws: &mut MlpWorkspace) -> f64 {
        let (a, b, d) = (1.3, -0.7, 0.4);
        spec.forward_full(params, &[0.3, -0.2], &[1.0, 0.0], &[0.0, 1.0], ws);
        let (y, yx, yt) = (ws.output(), ws.output_dx(), ws.output_dt());
        (0..spec.output_dim)
            .map(|o| {
                let r = a * y[o] + b * yx[o] + d * yt[o];
                r * r
            })
            .sum()
    }

    #[test]
    fn parameter_count_and_init() {
        let spec = MlpSpec::new(2, 32, 3, 2).unwrap();
        assert_eq!(spec.n_params(), (2 * 32 + 32) + (32 * 32 + 32) + (32 * 2 + 2));
        let p1 = spec.init_params(&mut rng(7));
        let p2 = spec.init_params(&mut rng(7));
        assert_eq!(p1, p2, "same seed must reproduce the same network");
        // first-layer biases sit right after the first weight block
        assert!(p1[2 * 32..2 * 32 + 32].iter().all(|&b| b == 0.0));
        let limit0 = (6.0 / 34.0_f64).sqrt();
        assert!(p1[..64].iter().all(|&w| w.abs() <= limit0));
        assert!(p1[..64].iter().any(|&w| w != 0.0));
    }

    #[test]
    fn tanh_layers_sit_between_affine_ends() {
        let spec = MlpSpec::new(2, 8, 8, 2).unwrap();
        let flags: Vec<bool> = (0..8).map(|l| spec.is_tanh(l)).collect();
        assert_eq!(flags, [false, true, true, true, true, true, true, false]);
    }

    #[test]
    fn depth_two_network_is_exactly_linear() {
        // Both layers affine: y = W2 (W1 u + b1) + b2, checkable by hand.
        let spec = MlpSpec::new(2, 2, 2, 1).unwrap();
        // layout: Wt1 (2x2), b1 (2), Wt2 (2x1), b2 (1)
        // W1 = [[1, 2], [3, 4]] row-major (out x in) => Wt1 = [1, 3, 2, 4]
        let params = [1.0, 3.0, 2.0, 4.0, 0.5, -0.5, 2.0, -1.0, 0.25];
        let mut ws = spec.workspace();
        spec.forward_full(&params, &[1.0, -1.0], &[1.0, 0.0], &[0.0, 1.0], &mut ws);
        // z1 = (1*1 + 2*(-1) + 0.5, 3*1 + 4*(-1) - 0.5) = (-0.5, -1.5)
        // y = 2*(-0.5) - 1*(-1.5) + 0.25 = 0.75
        assert_eq!(ws.output(), &[0.75]);
        // dy/dx = W2 W1 e_x = 2*1 - 1*3 = -1 ; dy/dt = 2*2 - 1*4 = 0
        assert_eq!(ws.output_dx(), &[-1.0]);
        assert_eq!(ws.output_dt(), &[0.0]);
    }

    #[test]
    fn tangent_streams_match_finite_differences() {
        let spec = spec_small();
        let params = spec.init_params(&mut rng(3));
        let mut ws = spec.workspace();
        let (x, t, h) = (0.37, 0.81, 1e-6);
        spec.forward_full(&params, &[x, t], &[1.0, 0.0], &[0.0, 1.0], &mut ws);
        let yx: Vec<f64> = ws.output_dx().to_vec();
        let yt: Vec<f64> = ws.output_dt().to_vec();

        let eval = |x: f64, t: f64, ws: &mut MlpWorkspace| -> Vec<f64> {
            spec.forward(&params, &[x, t], ws);
            ws.output().to_vec()
        };
        let (xp, xm) = (eval(x + h, t, &mut ws), eval(x - h, t, &mut ws));
        let (tp, tm) = (eval(x, t + h, &mut ws), eval(x, t - h, &mut ws));
        for o in 0..spec.output_dim {
            let fdx = (xp[o] - xm[o]) / (2.0 * h);
            let fdt = (tp[o] - tm[o]) / (2.0 * h);
            assert!((yx[o] - fdx).abs() <= 1e-8 * (1.0 + fdx.abs()), "{} vs {}", yx[o], fdx);
            assert!((yt[o] - fdt).abs() <= 1e-8 * (1.0 + fdt.abs()), "{} vs {}", yt[o], fdt);
        }
    }

    #[test]
    fn value_paths_agree_bitwise() {
        let spec = spec_small();
        let params = spec.init_params(&mut rng(11));
        let mut w1 = spec.workspace();
        let mut w2 = spec.workspace();
        spec.forward(&params, &[0.1, 0.9], &mut w1);
        spec.forward_full(&params, &[0.1, 0.9], &[1.0, 0.0], &[0.0, 1.0], &mut w2);
        assert_eq!(w1.output(), w2.output());
    }

    #[test]
    fn full_gradient_matches_finite_differences() {
        let spec = spec_small();
        let mut params = spec.init_params(&mut rng(5));
        let mut ws = spec.workspace();

        let mut grad = vec![0.0; spec.n_params()];
        let (a, b, d) = (1.3, -0.7, 0.4);
        spec.forward_full(&params, &[0.3, -0.2], &[1.0, 0.0], &[0.0, 1.0], &mut ws);
        let (y, yx, yt) = (ws.output().to_vec(), ws.output_dx().to_vec(), ws.output_dt().to_vec());
        let mut gy = vec![0.0; 2];
        let mut gyx = vec![0.0; 2];
        let mut gyt = vec![0.0; 2];
        for o in 0..2 {
            let r = a * y[o] + b * yx[o] + d * yt[o];
            gy[o] = 2.0 * r * a;
            gyx[o] = 2.0 * r * b;
            gyt[o] = 2.0 * r * d;
        }
        spec.backprop_full(&params, &mut ws, &gy, &gyx, &gyt, &mut grad);

        let h = 1e-6;
        for k in 0..spec.n_params() {
            let orig = params[k];
            params[k] = orig + h;
            let cp = objective(&spec, &params, &mut ws);
            params[k] = orig - h;
            let cm = objective(&spec, &params, &mut ws);
            params[k] = orig;
            let fd = (cp - cm) / (2.0 * h);
            assert!(
                (grad[k] - fd).abs() <= 1e-8 + 1e-7 * fd.abs(),
                "param {k}: analytic {} vs fd {}",
                grad[k],
                fd
            );
        }
    }

    #[test]
    fn value_gradient_matches_finite_differences() {
        let spec = spec_small();
        let mut params = spec.init_params(&mut rng(9));
        let mut ws = spec.workspace();

        let eval = |p: &[f64], ws: &mut MlpWorkspace| -> f64 {
            spec.forward(p, &[-0.4, 0.6], ws);
            ws.output().iter().map(|y| y * y).sum()
        };
        let mut grad = vec![0.0; spec.n_params()];
        spec.forward(&params, &[-0.4, 0.6], &mut ws);
        let gy: Vec<f64> = ws.output().iter().map(|y| 2.0 * y).collect();
        spec.backprop_value(&params, &mut ws, &gy, &mut grad);

        let h = 1e-6;
        for k in (0..spec.n_params()).step_by(7) {
            let orig = params[k];
            params[k] = orig + h;
            let cp = eval(&params, &mut ws);
            params[k] = orig - h;
            let cm = eval(&params, &mut ws);
            params[k] = orig;
            let fd = (cp - cm) / (2.0 * h);
            assert!((grad[k] - fd).abs() <= 1e-8 + 1e-7 * fd.abs());
        }
    }

    #[test]
    fn gradients_accumulate_across_calls() {
        let spec = spec_small();
        let params = spec.init_params(&mut rng(2));
        let mut ws = spec.workspace();
        let gy = [0.3, -0.8];
        let mut once = vec![0.0; spec.n_params()];
        spec.forward(&params, &[0.2, 0.1], &mut ws);
        spec.backprop_value(&params, &mut ws, &gy, &mut once);
        let mut twice = vec![0.0; spec.n_params()];
        for _ in 0..2 {
            spec.forward(&params, &[0.2, 0.1], &mut ws);
            spec.backprop_value(&params, &mut ws, &gy, &mut twice);
        }
        for k in 0..spec.n_params() {
            assert!((twice[k] - 2.0 * once[k]).abs() <= 1e-15 * (1.0 + once[k].abs()));
        }
    }

    #[test]
    fn rejects_degenerate_shapes() {
        assert!(MlpSpec::new(0, 8, 3, 1).is_err());
        assert!(MlpSpec::new(2, 8, 1, 1).is_err());
    }
}
