//! Finite-volume IMEX stepper for the SIR transport system.
//!
//! Six coupled fields on a periodic line: densities `S, I, R` and their
//! fluxes `J_S, J_I, J_R`. Written per equation,
//!
//! ```text
//! d c /dt + d J_c /dx = s_c(S, I)
//! d J_c/dt + lambda_c^2 d c /dx = g_c(U) - J_c / tau_c
//! ```
//!
//! with epidemic sources `s = (-beta S I, beta S I - gamma I, gamma I)` and
//! flux couplings `g = (-beta J_S I, (l_I/l_S) beta J_S I - gamma J_I,
//! (l_R/l_I) gamma J_I)`. Densities advance explicitly in flux form, so total
//! population changes only through the (conservative) epidemic sources. The
//! flux equations are stiff when `tau_c` is small; they are solved implicitly,
//! and because each one is linear in its own flux given the stage densities,
//! the triangular coupling J_S -> J_I -> J_R reduces the stage to three
//! pointwise scalar divisions. As `tau_c -> 0` this projects each flux onto
//! Fick's law `J_c = -D_c d c/dx` with `D_c = lambda_c^2 tau_c`, so the time
//! step is bounded by transport or diffusion, never by the relaxation time.

use crate::fv::imex::{minmod, ImexConfig, Reconstruction, ARS_DELTA, ARS_GAMMA};
use crate::grid::Grid1D;
use crate::models::{sir_source, SirMacroState, SirParams, SIR_I, SIR_S};

pub struct SirStepper {
    p: SirParams,
    grid: Grid1D,
    cfg: ImexConfig,
    dx: f64,
    // explicit density slopes at stages 1 and 2, implicit flux slopes at 2
    ed1: [Vec<f64>; 3],
    ed2: [Vec<f64>; 3],
    ifl2: [Vec<f64>; 3],
    stage: SirMacroState,
    flux: Vec<f64>,
    w_plus: Vec<f64>,
    w_minus: Vec<f64>,
}

impl SirStepper {
    pub fn new(p: SirParams, grid: Grid1D, cfg: ImexConfig) -> Self {
        let n = grid.n_cells;
        Self {
            p,
            grid,
            cfg,
            dx: grid.dx(),
            ed1: std::array::from_fn(|_| vec![0.0; n]),
            ed2: std::array::from_fn(|_| vec![0.0; n]),
            ifl2: std::array::from_fn(|_| vec![0.0; n]),
            stage: SirMacroState::zeros(n),
            flux: vec![0.0; n],
            w_plus: vec![0.0; n],
            w_minus: vec![0.0; n],
        }
    }

    /// Largest stable time step: wave bound `dx / max lambda` against the
    /// explicit transport, diffusion bound `dx^2 / (2 max D)` against the
    /// relaxed limit dynamics. Neither involves `tau`.
    pub fn stable_dt(&self) -> f64 {
        let l_max = self.p.lambdas().iter().cloned().fold(0.0_f64, f64::max);
        let d_max = self.p.diffusions().iter().cloned().fold(0.0_f64, f64::max);
        let transport = self.dx / l_max;
        let parabolic = self.dx * self.dx / (2.0 * d_max);
        self.cfg.cfl * transport.max(parabolic)
    }

    /// One IMEX step of size `h` in place.
    pub fn step(&mut self, state: &mut SirMacroState, h: f64) {
        let n = self.grid.n_cells;
        let g = ARS_GAMMA;

        // The slope routine reads `self.stage`; stage 1 is the input state.
        // Copy once, then keep `stage` as the working set for the whole step.
        self.stage.clone_from(state);
        self.density_slopes_from_stage(true);

        // Stage 2: densities explicit, fluxes solved in triangular order.
        for c in 0..3 {
            for i in 0..n {
                self.stage.u[c][i] = state.u[c][i] + h * g * self.ed1[c][i];
            }
        }
        self.solve_stage_fluxes(state, h, g, false);
        for c in 0..3 {
            for i in 0..n {
                self.ifl2[c][i] = (self.stage.u[3 + c][i] - state.u[3 + c][i]) / (h * g);
            }
        }
        self.density_slopes_from_stage(false);

        // Stage 3 = step value.
        for c in 0..3 {
            for i in 0..n {
                self.stage.u[c][i] = state.u[c][i]
                    + h * (ARS_DELTA * self.ed1[c][i] + (1.0 - ARS_DELTA) * self.ed2[c][i]);
            }
        }
        self.solve_stage_fluxes(state, h, g, true);
        state.clone_from(&self.stage);
    }

    // Implicit flux solve at one stage. Given stage densities in
    // `self.stage.u[0..3]` and the previous step's fluxes in `base`, fills
    // `self.stage.u[3..6]`. `with_prefix` adds the accumulated stage-2
    // implicit slope (the second implicit row is [0, 1-g, g]).
    fn solve_stage_fluxes(&mut self, base: &SirMacroState, h: f64, a_ii: f64, with_prefix: bool) {
        let n = self.grid.n_cells;
        let p = &self.p;
        let ha = h * a_ii;
        let [tau_s, tau_i, tau_r] = p.taus();
        let [l_s, l_i, l_r] = p.lambdas();
        let prefix = h * (1.0 - ARS_GAMMA);

        for i in 0..n {
            let (l, r) = (self.grid.left(i), self.grid.right(i));
            let gx_s = (self.stage.u[SIR_S][r] - self.stage.u[SIR_S][l]) / (2.0 * self.dx);
            let gx_i = (self.stage.u[SIR_I][r] - self.stage.u[SIR_I][l]) / (2.0 * self.dx);
            let gx_r = (self.stage.u[2][r] - self.stage.u[2][l]) / (2.0 * self.dx);
            let dens_i = self.stage.u[SIR_I][i];

            let mut rhs = [base.u[3][i], base.u[4][i], base.u[5][i]];
            if with_prefix {
                for c in 0..3 {
                    rhs[c] += prefix * self.ifl2[c][i];
                }
            }

            let js = (rhs[0] - ha * l_s * l_s * gx_s) / (1.0 + ha * (p.beta * dens_i + 1.0 / tau_s));
            let ji = (rhs[1] + ha * ((l_i / l_s) * p.beta * js * dens_i - l_i * l_i * gx_i))
                / (1.0 + ha * (p.gamma + 1.0 / tau_i));
            let jr = (rhs[2] + ha * ((l_r / l_i) * p.gamma * ji - l_r * l_r * gx_r))
                / (1.0 + ha / tau_r);
            self.stage.u[3][i] = js;
            self.stage.u[4][i] = ji;
            self.stage.u[5][i] = jr;
        }
    }

    // Explicit density slopes -dJ_c/dx + s_c evaluated at the current stage.
    fn density_slopes_from_stage(&mut self, into_first: bool) {
        let n = self.grid.n_cells;
        for c in 0..3 {
            match self.cfg.reconstruction {
                Reconstruction::Central => {
                    for i in 0..n {
                        self.flux[i] =
                            0.5 * (self.stage.u[3 + c][i] + self.stage.u[3 + c][self.grid.right(i)]);
                    }
                }
                Reconstruction::MusclMinmod => {
                    // Characteristic split per species with speeds +-lambda_c:
                    // w+- = (c +- J/lambda)/2, interface flux lambda (w+_L - w-_R).
                    let lam = self.p.lambdas()[c];
                    for i in 0..n {
                        let d = self.stage.u[c][i];
                        let j = self.stage.u[3 + c][i];
                        self.w_plus[i] = 0.5 * (d + j / lam);
                        self.w_minus[i] = 0.5 * (d - j / lam);
                    }
                    for i in 0..n {
                        let (l, r) = (self.grid.left(i), self.grid.right(i));
                        let rr = self.grid.right(r);
                        let wp = self.w_plus[i]
                            + 0.5 * minmod(self.w_plus[i] - self.w_plus[l], self.w_plus[r] - self.w_plus[i]);
                        let wm = self.w_minus[r]
                            - 0.5
                                * minmod(
                                    self.w_minus[r] - self.w_minus[i],
                                    self.w_minus[rr] - self.w_minus[r],
                                );
                        self.flux[i] = lam * (wp - wm);
                    }
                }
            }
            let out = if into_first { &mut self.ed1[c] } else { &mut self.ed2[c] };
            for i in 0..n {
                let l = self.grid.left(i);
                out[i] = -(self.flux[i] - self.flux[l]) / self.dx;
            }
        }
        // Epidemic sources, shared products so S + I + R telescopes.
        for i in 0..n {
            let mut u = [0.0; 6];
            for f in 0..6 {
                u[f] = self.stage.u[f][i];
            }
            let src = sir_source(&u, &self.p);
            let out = if into_first { &mut self.ed1 } else { &mut self.ed2 };
            for c in 0..3 {
                out[c][i] += src[c];
            }
        }
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{InitialCondition, SIR_R};

    fn setup(lambda_sq: f64, tau: f64, n: usize) -> (SirParams, Grid1D, SirStepper, SirMacroState) {
        let p = SirParams::uniform(12.0, 6.0, lambda_sq, tau).unwrap();
        let grid = Grid1D::new(0.0, 20.0, n).unwrap();
        let ic = InitialCondition::SirTwoHotspots { x1: 5.0, x2: 15.0, alpha1: 0.01, alpha2: 1e-4 };
        let state = ic.sir_state(&p, &grid).unwrap();
        let tau_max = p.taus().iter().cloned().fold(0.0_f64, f64::max);
        let stepper = SirStepper::new(p, grid, ImexConfig::default_sir(tau_max));
        (p, grid, stepper, state)
    }

    #[test]
    fn disease_free_uniform_state_is_fixed() {
        let p = SirParams::uniform(12.0, 6.0, 1.0, 1.0).unwrap();
        let grid = Grid1D::new(0.0, 20.0, 100).unwrap();
        let mut st = SirStepper::new(p, grid, ImexConfig::default_sir(1.0));
        let mut state = SirMacroState::zeros(100);
        state.u[SIR_S].iter_mut().for_each(|v| *v = 1.0);
        let h = st.stable_dt();
        for _ in 0..10 {
            st.step(&mut state, h);
        }
        assert!(state.u[SIR_S].iter().all(|&v| v == 1.0));
        for f in 1..6 {
            assert!(state.u[f].iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn population_is_conserved_in_both_regimes() {
        for (lambda_sq, tau, t_end) in [(1.0, 1.0, 1.0), (1e3, 1e-3, 1.0)] {
            let (_, grid, mut st, mut state) = setup(lambda_sq, tau, 400);
            let dx = grid.dx();
            let total = |s: &SirMacroState| -> f64 {
                (0..grid.n_cells).map(|i| (s.u[0][i] + s.u[1][i] + s.u[2][i]) * dx).sum()
            };
            let before = total(&state);
            let h = st.stable_dt();
            let steps = (t_end / h).ceil() as usize;
            for _ in 0..steps {
                st.step(&mut state, h);
            }
            let after = total(&state);
            let rel = ((after - before) / before).abs();
            assert!(rel <= 1e-12, "population drift {rel:.3e} (lambda_sq={lambda_sq})");
        }
    }

    #[test]
    fn fluxes_relax_onto_ficks_law() {
        // Fixed diffusivity D = lambda^2 tau = 1 while tau shrinks: fluxes
        // must approach -D dc/dx, with a defect that is O(tau) because the
        // leading correction terms (recovery, infection coupling, flux time
        // derivative) all enter at first order in the relaxation time.
        let defect = |lambda_sq: f64, tau: f64| -> [f64; 3] {
            let (p, grid, mut st, mut state) = setup(lambda_sq, tau, 400);
            let h = st.stable_dt();
            let steps = (0.5 / h).ceil() as usize;
            for _ in 0..steps {
                st.step(&mut state, h);
            }
            let dx = grid.dx();
            let ds = p.diffusions();
            std::array::from_fn(|c| {
                let mut num = 0.0;
                let mut den = 0.0;
                for i in 0..grid.n_cells {
                    let gx = (state.u[c][grid.right(i)] - state.u[c][grid.left(i)]) / (2.0 * dx);
                    let want = -ds[c] * gx;
                    num += (state.u[3 + c][i] - want) * (state.u[3 + c][i] - want);
                    den += want * want;
                }
                (num / den).sqrt()
            })
        };
        let coarse = defect(1e3, 1e-3);
        let fine = defect(1e4, 1e-4);
        for c in 0..3 {
            assert!(coarse[c] <= 3e-2, "field {c}: Fick defect {:.3e}", coarse[c]);
            assert!(
                fine[c] < 0.5 * coarse[c],
                "field {c}: defect not shrinking with tau ({:.3e} vs {:.3e})",
                fine[c],
                coarse[c]
            );
        }
    }

    #[test]
    fn outbreak_grows_where_susceptibles_are_dense() {
        // beta/gamma = 2 > 1 with S near 1, so infections rise early while
        // total S falls and total R rises.
        let (_, grid, mut st, mut state) = setup(1.0, 1.0, 400);
        let dx = grid.dx();
        let sum = |v: &[f64]| -> f64 { v.iter().sum::<f64>() * dx };
        let (s0, i0, r0) = (sum(&state.u[0]), sum(&state.u[1]), sum(&state.u[2]));
        let h = st.stable_dt();
        let steps = (1.0 / h).ceil() as usize;
        for _ in 0..steps {
            st.step(&mut state, h);
        }
        assert!(sum(&state.u[SIR_I]) > 2.0 * i0, "epidemic failed to grow");
        assert!(sum(&state.u[SIR_S]) < s0);
        assert!(sum(&state.u[SIR_R]) > r0 && r0 == 0.0);
        assert!(state.u[SIR_I].iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn stepping_is_bitwise_deterministic() {
        let run = || {
            let (_, _, mut st, mut state) = setup(1e3, 1e-3, 200);
            let h = st.stable_dt();
            for _ in 0..50 {
                st.step(&mut state, h);
            }
            state
        };
        assert_eq!(run(), run());
    }
}
