//! Model definitions: parameters, states, sources and initial data.
//!
//! Two hyperbolic systems with stiff relaxation are covered.
//!
//! Goldstein-Taylor (GT), kinetic form in the two densities `f+`, `f-`:
//!
//! ```text
//! df+/dt + (1/eps) df+/dx = -(sigma / 2 eps^2) (f+ - f-)
//! df-/dt - (1/eps) df-/dx = +(sigma / 2 eps^2) (f+ - f-)
//! ```
//!
//! and macroscopic form in density and scaled flux,
//! `rho = f+ + f-`, `j = (f+ - f-)/eps`:
//!
//! ```text
//! drho/dt + dj/dx                        = 0
//! dj/dt + (1/eps^2) drho/dx              = -(sigma/eps^2) j
//! ```
//!
//! As `eps -> 0` the flux relaxes to the local equilibrium
//! `j = -(1/sigma) drho/dx` and the density solves the heat equation
//! `drho/dt = (1/sigma) d2rho/dx2`.
//!
//! SIR transport: densities S, I, R and compartment fluxes J_S, J_I, J_R:
//!
//! ```text
//! dS/dt   + dJ_S/dx          = -beta S I
//! dI/dt   + dJ_I/dx          =  beta S I - gamma I
//! dR/dt   + dJ_R/dx          =  gamma I
//! dJ_S/dt + lam_S^2 dS/dx    = -beta J_S I - J_S/tau_S
//! dJ_I/dt + lam_I^2 dI/dx    = (lam_I/lam_S) beta J_S I - gamma J_I - J_I/tau_I
//! dJ_R/dt + lam_R^2 dR/dx    = (lam_R/lam_I) gamma J_I - J_R/tau_R
//! ```
//!
//! With diffusion coefficients `D_c = lam_c^2 tau_c` held fixed, the limit
//! `tau_c -> 0` collapses the fluxes onto Fick's law `J_c = -D_c dc/dx`.
//!
//! Multiplying each flux equation by `tau_c` gives the compact vector form
//! `tau . dU/dt + D . dF(U)/dx = G(U)`, with `F(U)` swapping densities and
//! fluxes; [`sir_source`] evaluates that `G`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// Field order inside a [`SirMacroState`] and the compact vector form.
pub const SIR_S: usize = 0;
pub const SIR_I: usize = 1;
pub const SIR_R: usize = 2;
pub const SIR_JS: usize = 3;
pub const SIR_JI: usize = 4;
pub const SIR_JR: usize = 5;

pub const SIR_FIELD_NAMES: [&str; 6] = ["S", "I", "R", "J_S", "J_I", "J_R"];
pub const GT_MACRO_FIELD_NAMES: [&str; 2] = ["rho", "j"];
pub const GT_KINETIC_FIELD_NAMES: [&str; 2] = ["f_plus", "f_minus"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtParams {
    /// Relaxation scale; eps ~ 1 is the hyperbolic regime, eps << 1 diffusive.
    pub epsilon: f64,
    /// Relaxation rate in front of the stiff source.
    pub sigma: f64,
}

impl GtParams {
    pub fn new(epsilon: f64, sigma: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParam(format!("epsilon must be > 0, got {epsilon}")));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParam(format!("sigma must be > 0, got {sigma}")));
        }
        Ok(Self { epsilon, sigma })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SirParams {
    pub beta: f64,
    pub gamma: f64,
    pub lambda_s: f64,
    pub lambda_i: f64,
    pub lambda_r: f64,
    pub tau_s: f64,
    pub tau_i: f64,
    pub tau_r: f64,
}

impl SirParams {
    /// All compartments share one squared speed and one relaxation time.
    pub fn uniform(beta: f64, gamma: f64, lambda_sq: f64, tau: f64) -> Result<Self> {
        for (name, v) in [("beta", beta), ("gamma", gamma), ("lambda_sq", lambda_sq), ("tau", tau)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParam(format!("{name} must be > 0, got {v}")));
            }
        }
        let lambda = lambda_sq.sqrt();
        Ok(Self {
            beta,
            gamma,
            lambda_s: lambda,
            lambda_i: lambda,
            lambda_r: lambda,
            tau_s: tau,
            tau_i: tau,
            tau_r: tau,
        })
    }

    #[inline]
    pub fn d_s(&self) -> f64 {
        self.lambda_s * self.lambda_s * self.tau_s
    }

    #[inline]
    pub fn d_i(&self) -> f64 {
        self.lambda_i * self.lambda_i * self.tau_i
    }

    #[inline]
    pub fn d_r(&self) -> f64 {
        self.lambda_r * self.lambda_r * self.tau_r
    }

    pub fn taus(&self) -> [f64; 3] {
        [self.tau_s, self.tau_i, self.tau_r]
    }

    pub fn lambdas(&self) -> [f64; 3] {
        [self.lambda_s, self.lambda_i, self.lambda_r]
    }

    pub fn diffusions(&self) -> [f64; 3] {
        [self.d_s(), self.d_i(), self.d_r()]
    }
}

/// GT state in macroscopic variables, one value per grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GtMacroState {
    pub rho: Vec<f64>,
    pub j: Vec<f64>,
}

/// GT state in kinetic variables, one value per grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GtKineticState {
    pub f_plus: Vec<f64>,
    pub f_minus: Vec<f64>,
}

/// SIR state; `u[k]` is field `k` in the [`SIR_S`]..[`SIR_JR`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct SirMacroState {
    pub u: [Vec<f64>; 6],
}

impl SirMacroState {
    pub fn zeros(n: usize) -> Self {
        Self { u: std::array::from_fn(|_| vec![0.0; n]) }
    }
}

#[inline]
pub fn gt_kinetic_to_macro_point(f_plus: f64, f_minus: f64, epsilon: f64) -> (f64, f64) {
    (f_plus + f_minus, (f_plus - f_minus) / epsilon)
}

#[inline]
pub fn gt_macro_to_kinetic_point(rho: f64, j: f64, epsilon: f64) -> (f64, f64) {
    (0.5 * (rho + epsilon * j), 0.5 * (rho - epsilon * j))
}

pub fn gt_kinetic_to_macro(state: &GtKineticState, epsilon: f64) -> GtMacroState {
    let n = state.f_plus.len();
    let mut rho = Vec::with_capacity(n);
    let mut j = Vec::with_capacity(n);
    for k in 0..n {
        let (r, jj) = gt_kinetic_to_macro_point(state.f_plus[k], state.f_minus[k], epsilon);
        rho.push(r);
        j.push(jj);
    }
    GtMacroState { rho, j }
}

pub fn gt_macro_to_kinetic(state: &GtMacroState, epsilon: f64) -> GtKineticState {
    let n = state.rho.len();
    let mut f_plus = Vec::with_capacity(n);
    let mut f_minus = Vec::with_capacity(n);
    for k in 0..n {
        let (fp, fm) = gt_macro_to_kinetic_point(state.rho[k], state.j[k], epsilon);
        f_plus.push(fp);
        f_minus.push(fm);
    }
    GtKineticState { f_plus, f_minus }
}

/// Local equilibrium flux `j = -(1/sigma) drho/dx` from a sampled derivative.
pub fn gt_equilibrium_flux(drho_dx: &[f64], sigma: f64) -> Vec<f64> {
    drho_dx.iter().map(|d| -d / sigma).collect()
}

/// Source vector `G(U)` of the compact SIR form (flux rows scaled by tau).
#[inline]
pub fn sir_source(u: &[f64; 6], p: &SirParams) -> [f64; 6] {
    let (s, i, js, ji, jr) = (u[SIR_S], u[SIR_I], u[SIR_JS], u[SIR_JI], u[SIR_JR]);
    let infection = p.beta * s * i;
    let recovery = p.gamma * i;
    let flux_infection = p.beta * js * i;
    [
        -infection,
        infection - recovery,
        recovery,
        -p.tau_s * flux_infection - js,
        p.tau_i * (p.lambda_i / p.lambda_s) * flux_infection - p.tau_i * p.gamma * ji - ji,
        p.tau_r * (p.lambda_r / p.lambda_i) * p.gamma * ji - jr,
    ]
}

/// Exact solution of the diffusion limit `drho/dt = (1/sigma) d2rho/dx2`
/// for the cosine initial profile `rho(x,0) = 6 + 3 cos(3 pi x)`.
pub fn heat_analytic_cosine(x: f64, t: f64, sigma: f64) -> f64 {
    let k = 3.0 * std::f64::consts::PI;
    6.0 + 3.0 * (k * x).cos() * (-k * k * t / sigma).exp()
}

/// Initial data variants. GT variants evaluate to `(rho, j)`, the SIR
/// variant to all six fields; each is a closed form sampled pointwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialCondition {
    /// Two counter-propagating Gaussian kinetic densities: `f+` centered at
    /// -0.5, `f-` at +0.5, both with width `s`.
    GtGaussianPair { s: f64 },
    /// Double-Gaussian density with the flux already at local equilibrium,
    /// `j = -(1/sigma) drho/dx`.
    GtGaussianRhoEquilibrium { s: f64 },
    /// `rho = 6 + 3 cos(3 pi x)` with equilibrium flux.
    GtCosine,
    /// Two infection hot-spots `I = a1 exp(-(x-x1)^2) + a2 exp(-(x-x2)^2)`,
    /// `S = 1 - I`, `R = 0`, fluxes at Fick equilibrium `J_c = -D_c dc/dx`.
    SirTwoHotspots { x1: f64, x2: f64, alpha1: f64, alpha2: f64 },
}

impl InitialCondition {
    /// `(rho, j)` at position `x` for the GT variants.
    pub fn gt_point(&self, p: &GtParams, x: f64) -> Result<(f64, f64)> {
        match *self {
            InitialCondition::GtGaussianPair { s } => {
                let f_plus = gaussian(x, -0.5, s);
                let f_minus = gaussian(x, 0.5, s);
                Ok(gt_kinetic_to_macro_point(f_plus, f_minus, p.epsilon))
            }
            InitialCondition::GtGaussianRhoEquilibrium { s } => {
                let a = gaussian(x, 0.5, s);
                let b = gaussian(x, -0.5, s);
                let rho = a + b;
                // drho/dx = -((x-0.5) a + (x+0.5) b)/s^2; j = -(1/sigma) drho/dx.
                let j = ((x - 0.5) * a + (x + 0.5) * b) / (p.sigma * s * s);
                Ok((rho, j))
            }
            InitialCondition::GtCosine => {
                let k = 3.0 * std::f64::consts::PI;
                let rho = 6.0 + 3.0 * (k * x).cos();
                let j = 3.0 * k * (k * x).sin() / p.sigma;
                Ok((rho, j))
            }
            InitialCondition::SirTwoHotspots { .. } => Err(Error::InvalidConfig(
                "SIR initial condition used with the Goldstein-Taylor model".into(),
            )),
        }
    }

    /// All six SIR fields at position `x`.
    pub fn sir_point(&self, p: &SirParams, x: f64) -> Result<[f64; 6]> {
        match *self {
            InitialCondition::SirTwoHotspots { x1, x2, alpha1, alpha2 } => {
                let b1 = alpha1 * (-(x - x1) * (x - x1)).exp();
                let b2 = alpha2 * (-(x - x2) * (x - x2)).exp();
                let i = b1 + b2;
                let di_dx = -2.0 * ((x - x1) * b1 + (x - x2) * b2);
                let s = 1.0 - i;
                // S = 1 - I, so dS/dx = -dI/dx; R is flat.
                let j_s = p.d_s() * di_dx;
                let j_i = -p.d_i() * di_dx;
                Ok([s, i, 0.0, j_s, j_i, 0.0])
            }
            _ => Err(Error::InvalidConfig(
                "Goldstein-Taylor initial condition used with the SIR model".into(),
            )),
        }
    }

    /// Sample a GT variant at every cell center.
    pub fn gt_state(&self, p: &GtParams, grid: &Grid1D) -> Result<GtMacroState> {
        let n = grid.n_cells;
        let mut rho = Vec::with_capacity(n);
        let mut j = Vec::with_capacity(n);
        for k in 0..n {
            let (r, jj) = self.gt_point(p, grid.center(k))?;
            rho.push(r);
            j.push(jj);
        }
        Ok(GtMacroState { rho, j })
    }

    /// Sample the SIR variant at every cell center.
    pub fn sir_state(&self, p: &SirParams, grid: &Grid1D) -> Result<SirMacroState> {
        let mut state = SirMacroState::zeros(grid.n_cells);
        for k in 0..grid.n_cells {
            let point = self.sir_point(p, grid.center(k))?;
            for (f, v) in point.iter().enumerate() {
                state.u[f][k] = *v;
            }
        }
        Ok(state)
    }
}

#[inline]
fn gaussian(x: f64, center: f64, s: f64) -> f64 {
    let z = (x - center) / s;
    (-0.5 * z * z).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GT1: GtParams = GtParams { epsilon: 1.0, sigma: 1.0 };

    fn sir_unit() -> SirParams {
        SirParams::uniform(12.0, 6.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn kinetic_macro_hand_example() {
        let (rho, j) = gt_kinetic_to_macro_point(0.75, 0.25, 0.5);
        assert_eq!(rho, 1.0);
        assert_eq!(j, 1.0);
        let (fp, fm) = gt_macro_to_kinetic_point(rho, j, 0.5);
        assert_eq!(fp, 0.75);
        assert_eq!(fm, 0.25);
    }

    proptest! {
        #[test]
        fn kinetic_macro_round_trip(
            fp in -50.0..50.0f64,
            fm in -50.0..50.0f64,
            eps in 1e-6..2.0f64,
        ) {
            let (rho, j) = gt_kinetic_to_macro_point(fp, fm, eps);
            let (fp2, fm2) = gt_macro_to_kinetic_point(rho, j, eps);
            let scale = fp.abs().max(fm.abs()).max(1e-12);
            prop_assert!((fp2 - fp).abs() <= 1e-14 * scale);
            prop_assert!((fm2 - fm).abs() <= 1e-14 * scale);
        }

        #[test]
        fn sir_source_conserves_population(
            s in 0.0..2.0f64, i in 0.0..2.0f64, r in 0.0..2.0f64,
            js in -1.0..1.0f64, ji in -1.0..1.0f64, jr in -1.0..1.0f64,
        ) {
            let g = sir_source(&[s, i, r, js, ji, jr], &sir_unit());
            // The density sources transfer mass between compartments only:
            // the infection source is exactly the negation of G_S minus G_R.
            prop_assert_eq!(g[SIR_I], -g[SIR_S] - g[SIR_R]);
            prop_assert!((g[SIR_S] + g[SIR_I] + g[SIR_R]).abs() <= 1e-14 * (1.0 + g[SIR_S].abs()));
        }
    }

    #[test]
    fn sir_source_disease_free() {
        let g = sir_source(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], &sir_unit());
        assert_eq!(g, [0.0; 6]);
    }

    #[test]
    fn sir_source_matches_hand_expansion() {
        // Independent expansion of each component at a generic state.
        let p = sir_unit();
        let (s, i, r, js, ji, jr) = (0.7, 0.2, 0.1, 0.05, -0.03, 0.01);
        let g = sir_source(&[s, i, r, js, ji, jr], &p);
        let beta = 12.0;
        let gamma = 6.0;
        assert!((g[0] - (-beta * 0.7 * 0.2)).abs() < 1e-15);
        assert!((g[1] - (beta * 0.7 * 0.2 - gamma * 0.2)).abs() < 1e-15);
        assert!((g[2] - gamma * 0.2).abs() < 1e-15);
        // tau = 1, lambda ratios = 1.
        assert!((g[3] - (-beta * 0.05 * 0.2 - 0.05)).abs() < 1e-15);
        assert!((g[4] - (beta * 0.05 * 0.2 - gamma * (-0.03) - (-0.03))).abs() < 1e-15);
        assert!((g[5] - (gamma * (-0.03) - 0.01)).abs() < 1e-15);
    }

    #[test]
    fn gaussian_pair_peak_value() {
        // f+(x=-0.5) = 1/(0.15 sqrt(2 pi)).
        let ic = InitialCondition::GtGaussianPair { s: 0.15 };
        let (rho, j) = ic.gt_point(&GT1, -0.5).unwrap();
        let peak = 2.659_615_202_676_218;
        let far = peak * (-0.5f64 / 0.0225).exp(); // f- evaluated one unit away
        assert!((rho - (peak + far)).abs() < 1e-12);
        assert!((j - (peak - far)).abs() < 1e-12);
    }

    /// Central finite difference of the sampled rho profile.
    fn fd_drho(ic: &InitialCondition, p: &GtParams, x: f64, h: f64) -> f64 {
        let (rp, _) = ic.gt_point(p, x + h).unwrap();
        let (rm, _) = ic.gt_point(p, x - h).unwrap();
        (rp - rm) / (2.0 * h)
    }

    #[test]
    fn equilibrium_variants_satisfy_fick_relation() {
        let p4 = GtParams { epsilon: 1e-4, sigma: 4.0 };
        let cases = [
            (InitialCondition::GtGaussianRhoEquilibrium { s: 0.15 }, GT1),
            (InitialCondition::GtCosine, p4),
        ];
        for (ic, p) in cases {
            for &x in &[-0.8, -0.33, 0.0, 0.11, 0.5, 0.62, 0.97] {
                let (_, j) = ic.gt_point(&p, x).unwrap();
                let want = -fd_drho(&ic, &p, x, 1e-6) / p.sigma;
                assert!(
                    (j - want).abs() <= 1e-7 * j.abs().max(1.0),
                    "ic {ic:?} x={x}: j={j} fd={want}"
                );
            }
        }
    }

    #[test]
    fn fick_relation_fd_error_is_second_order() {
        let ic = InitialCondition::GtGaussianRhoEquilibrium { s: 0.15 };
        let x = 0.3;
        let (_, j) = ic.gt_point(&GT1, x).unwrap();
        let err = |h: f64| (-fd_drho(&ic, &GT1, x, h) - j).abs();
        let (e1, e2) = (err(1e-3), err(5e-4));
        let order = (e1 / e2).log2();
        assert!((1.7..2.3).contains(&order), "observed order {order}");
    }

    #[test]
    fn cosine_flux_closed_form() {
        let p = GtParams { epsilon: 1e-4, sigma: 4.0 };
        let k = 3.0 * std::f64::consts::PI;
        for &x in &[-0.7, 0.1, 0.44] {
            let (rho, j) = InitialCondition::GtCosine.gt_point(&p, x).unwrap();
            assert!((rho - (6.0 + 3.0 * (k * x).cos())).abs() < 1e-14);
            assert!((j - 9.0 * std::f64::consts::PI / 4.0 * (k * x).sin()).abs() < 1e-13);
        }
    }

    #[test]
    fn hotspots_values_and_fick_fluxes() {
        let ic = InitialCondition::SirTwoHotspots { x1: 5.0, x2: 15.0, alpha1: 0.01, alpha2: 0.0001 };
        let p = sir_unit();

        // At the first hot-spot the second bump contributes alpha2*e^-100.
        let u5 = ic.sir_point(&p, 5.0).unwrap();
        assert!((u5[SIR_I] - 0.01).abs() < 1e-17);
        assert_eq!(u5[SIR_S], 1.0 - u5[SIR_I]);
        assert_eq!(u5[SIR_R], 0.0);
        assert_eq!(u5[SIR_JR], 0.0);

        // One unit left of the peak: I = 0.01 e^-1 + 1e-4 e^-121.
        let u4 = ic.sir_point(&p, 4.0).unwrap();
        assert!((u4[SIR_I] - 3.678_794_411_714_423_3e-3).abs() < 1e-16);
        // dI/dx(4) = -2 (4-5) b1 = +2 b1; J_I = -D_I dI/dx with D = 1.
        assert!((u4[SIR_JI] - (-7.357_588_823_428_846_6e-3)).abs() < 1e-16);
        assert_eq!(u4[SIR_JS], -u4[SIR_JI]);

        // Fick relation against a finite difference of the sampled profile.
        for &x in &[3.0, 5.5, 14.0, 16.5] {
            let h = 1e-6;
            let up = ic.sir_point(&p, x + h).unwrap();
            let um = ic.sir_point(&p, x - h).unwrap();
            let u = ic.sir_point(&p, x).unwrap();
            let di = (up[SIR_I] - um[SIR_I]) / (2.0 * h);
            let ds = (up[SIR_S] - um[SIR_S]) / (2.0 * h);
            assert!((u[SIR_JI] + p.d_i() * di).abs() < 1e-9);
            assert!((u[SIR_JS] + p.d_s() * ds).abs() < 1e-9);
        }
    }

    #[test]
    fn heat_solution_solves_the_limit_pde() {
        // Independent oracle: FD residual of drho/dt - (1/sigma) d2rho/dx2.
        let sigma = 4.0;
        for &(x, t) in &[(0.3, 0.05), (-0.62, 0.01), (0.0, 0.1)] {
            let ht = 1e-6;
            let hx = 1e-4;
            let dt = (heat_analytic_cosine(x, t + ht, sigma) - heat_analytic_cosine(x, t - ht, sigma))
                / (2.0 * ht);
            let dxx = (heat_analytic_cosine(x + hx, t, sigma) - 2.0 * heat_analytic_cosine(x, t, sigma)
                + heat_analytic_cosine(x - hx, t, sigma))
                / (hx * hx);
            assert!((dt - dxx / sigma).abs() < 1e-4, "residual at ({x},{t})");
        }
    }

    #[test]
    fn heat_solution_boundary_cases() {
        let ic = InitialCondition::GtCosine;
        let p = GtParams { epsilon: 1e-6, sigma: 4.0 };
        for &x in &[-0.9, 0.2, 0.77] {
            let (rho0, _) = ic.gt_point(&p, x).unwrap();
            assert!((heat_analytic_cosine(x, 0.0, p.sigma) - rho0).abs() < 1e-14);
        }
        // All modes decay to the mean.
        assert_eq!(heat_analytic_cosine(0.123, 50.0, 4.0), 6.0);
    }

    #[test]
    fn equilibrium_flux_helper() {
        let j = gt_equilibrium_flux(&[2.0, -4.0, 0.0], 4.0);
        assert_eq!(j, vec![-0.5, 1.0, 0.0]);
    }

    #[test]
    fn ic_model_mismatch_is_rejected() {
        let sir_ic = InitialCondition::SirTwoHotspots { x1: 5.0, x2: 15.0, alpha1: 0.01, alpha2: 1e-4 };
        assert!(sir_ic.gt_point(&GT1, 0.0).is_err());
        assert!(InitialCondition::GtCosine.sir_point(&sir_unit(), 0.0).is_err());
    }

    #[test]
    fn param_validation() {
        assert!(GtParams::new(0.0, 1.0).is_err());
        assert!(GtParams::new(1.0, -2.0).is_err());
        assert!(SirParams::uniform(12.0, 6.0, 0.0, 1.0).is_err());
        let p = SirParams::uniform(12.0, 6.0, 1e3, 1e-3).unwrap();
        assert!((p.d_s() - 1.0).abs() < 1e-12);
    }
}
