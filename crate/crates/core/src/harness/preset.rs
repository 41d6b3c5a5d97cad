//! Frozen experiment configurations and their assembly into trainable losses.
//!
//! A preset pins everything a run needs: the physical regime, the ground
//! truth solve, how observations and collocation points are drawn, the
//! network shape, the loss weights, and the optimizer settings. Building a
//! preset is deterministic in its seed, with sub-seeds derived in a fixed
//! documented order (residual points, data points, residual split, data
//! split, network init), so two builds from the same seed are bit-identical.

use crate::error::{Error, Result};
use crate::fv::{solve_gt, solve_sir, ImexConfig, SpaceTimeField};
use crate::grid::Grid1D;
use crate::losses::{DataPoint, LossWeights, ModelLoss, Param, ResidualForm, SamplePools};
use crate::models::{gt_macro_to_kinetic_point, GtParams, InitialCondition, SirParams};
use crate::nn::{InputMap, MlpSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sampling::{
    sample_lattice_points, sample_residual_points, split_validation, DataStrategy, LatticeSample,
    ResidualStrategy,
};

/// What the network represents and which residuals constrain it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Kinetic pair (f+, f-) with the unscaled two-velocity residuals.
    GtKineticPinn,
    /// Macro pair (rho, j) with the diffusion-consistent residuals.
    GtMacroApnn,
    /// Kinetic pair fit to data alone, no physics.
    GtDataOnlyDnn,
    /// Six-field epidemic transport with the relaxation-consistent residuals.
    SirApnn,
}

/// Physical regime plus which of its parameters the run must infer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "kebab-case")]
pub enum Physics {
    Gt { params: GtParams, learn_sigma: bool },
    Sir { params: SirParams, learn_beta: bool, learn_gamma: bool },
}

impl Physics {
    /// True values of the learned parameters, in learnable order.
    pub fn learnable_truths(&self) -> Vec<f64> {
        match self {
            Physics::Gt { params, learn_sigma } => {
                if *learn_sigma { vec![params.sigma] } else { Vec::new() }
            }
            Physics::Sir { params, learn_beta, learn_gamma } => {
                let mut v = Vec::new();
                if *learn_beta {
                    v.push(params.beta);
                }
                if *learn_gamma {
                    v.push(params.gamma);
                }
                v
            }
        }
    }
}

/// Which truth fields a data point carries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ObservedFields {
    /// Observe the listed network output fields directly.
    Direct { fields: Vec<usize> },
    /// Observe both kinetic densities, converted from the macro truth:
    /// f+- = (rho +- eps j) / 2.
    KineticPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPreset {
    pub name: String,
    pub kind: ModelKind,
    pub physics: Physics,
    pub ic: InitialCondition,
    pub grid: Grid1D,
    pub t_end: f64,
    pub n_snapshots: usize,
    pub n_data: usize,
    pub data_strategy: DataStrategy,
    /// Time window observations are drawn from (often the full run).
    pub data_window: (f64, f64),
    pub observed: ObservedFields,
    pub n_residual: usize,
    pub residual_strategy: ResidualStrategy,
    /// Hold out one fifth of the data and residual pools for validation.
    pub split_validation: bool,
    pub mlp: MlpSpec,
    pub input_map: InputMap,
    pub weights: LossWeights,
    pub positivity_fields: Vec<usize>,
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Stop once the training loss drops below this.
    pub loss_threshold: f64,
    /// Stop after this many epochs without a new best validation loss.
    pub patience: Option<usize>,
    /// Initial guesses for the learned physical parameters, in order.
    pub guesses: Vec<f64>,
    pub seed: u64,
    /// Time separating the training horizon from the forecast horizon.
    pub forecast_split: Option<f64>,
}

impl ExperimentPreset {
    /// Solve the reference finite-volume problem this preset trains against.
    pub fn ground_truth(&self) -> Result<SpaceTimeField> {
        match &self.physics {
            Physics::Gt { params, .. } => solve_gt(
                params,
                &self.grid,
                ImexConfig::default_gt(params.epsilon),
                &self.ic,
                self.t_end,
                self.n_snapshots,
            ),
            Physics::Sir { params, .. } => solve_sir(
                params,
                &self.grid,
                ImexConfig::default_sir(params.taus().iter().cloned().fold(0.0, f64::max)),
                &self.ic,
                self.t_end,
                self.n_snapshots,
            ),
        }
    }

    /// The residual system this preset enforces, if any.
    pub fn residual_form(&self) -> Option<ResidualForm> {
        let learned = |v: f64, learn: bool| {
            if learn { Param::Learned } else { Param::Fixed { value: v } }
        };
        match (&self.kind, &self.physics) {
            (ModelKind::GtDataOnlyDnn, _) => None,
            (ModelKind::GtKineticPinn, Physics::Gt { params, learn_sigma }) => {
                Some(ResidualForm::GtKinetic {
                    epsilon: params.epsilon,
                    sigma: learned(params.sigma, *learn_sigma),
                })
            }
            (ModelKind::GtMacroApnn, Physics::Gt { params, learn_sigma }) => {
                Some(ResidualForm::GtMacro {
                    epsilon: params.epsilon,
                    sigma: learned(params.sigma, *learn_sigma),
                })
            }
            (ModelKind::SirApnn, Physics::Sir { params, learn_beta, learn_gamma }) => {
                Some(ResidualForm::Sir {
                    lambda: params.lambdas(),
                    tau: params.taus(),
                    diffusion: params.diffusions(),
                    beta: learned(params.beta, *learn_beta),
                    gamma: learned(params.gamma, *learn_gamma),
                })
            }
            _ => None,
        }
    }

    fn data_point(&self, truth: &SpaceTimeField, s: &LatticeSample) -> DataPoint {
        let value = |f: usize| truth.values[s.snapshot][f][s.cell];
        let (fields, values) = match &self.observed {
            ObservedFields::Direct { fields } => {
                (fields.clone(), fields.iter().map(|&f| value(f)).collect())
            }
            ObservedFields::KineticPair => {
                let eps = match &self.physics {
                    Physics::Gt { params, .. } => params.epsilon,
                    Physics::Sir { .. } => unreachable!("kinetic pairs are a two-velocity notion"),
                };
                let (fp, fm) = gt_macro_to_kinetic_point(value(0), value(1), eps);
                (vec![0, 1], vec![fp, fm])
            }
        };
        DataPoint { x: s.x, t: s.t, fields, values }
    }

    /// Assemble the trainable loss and its initial extended parameter vector.
    ///
    /// The boundary pools stay empty for every preset: the kinetic runs fit
    /// interior data only, and the epidemic runs enforce periodicity through
    /// the input embedding rather than through a boundary penalty.
    pub fn build(&self, truth: &SpaceTimeField, seed: u64) -> Result<(ModelLoss, Vec<f64>)> {
        let domain = (self.grid.x_min, self.grid.x_max);

        let residual = if self.n_residual == 0 {
            Vec::new()
        } else {
            sample_residual_points(
                domain,
                (0.0, self.t_end),
                self.n_residual,
                self.residual_strategy,
                seed,
            )?
        };
        let samples = sample_lattice_points(
            truth,
            self.n_data,
            self.data_strategy,
            self.data_window,
            seed.wrapping_add(1),
        )?;
        let data: Vec<DataPoint> = samples.iter().map(|s| self.data_point(truth, s)).collect();

        let mut pools = SamplePools::default();
        if self.split_validation {
            let (tr, va) = split_validation(&residual, seed.wrapping_add(2))?;
            pools.residual = tr;
            pools.residual_val = va;
            let (tr, va) = split_validation(&data, seed.wrapping_add(3))?;
            pools.data = tr;
            pools.data_val = va;
        } else {
            pools.residual = residual;
            pools.data = data;
        }

        let loss = ModelLoss::new(
            self.mlp,
            self.input_map,
            self.residual_form(),
            self.weights.clone(),
            self.positivity_fields.clone(),
            pools,
            domain,
        )?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(4));
        let params = loss.init_params(&mut rng, &self.guesses)?;
        Ok((loss, params))
    }
}

const GT_GRID: Grid1D = Grid1D { x_min: -1.0, x_max: 1.0, n_cells: 200 };
const SIR_GRID: Grid1D = Grid1D { x_min: 0.0, x_max: 20.0, n_cells: 400 };

fn weights(w_d: &[f64], w_b: &[f64], w_r: &[f64], w_p: f64) -> LossWeights {
    LossWeights { w_d: w_d.to_vec(), w_b: w_b.to_vec(), w_r: w_r.to_vec(), w_p }
}

fn gt_hyperbolic_base(name: &str, kind: ModelKind) -> ExperimentPreset {
    ExperimentPreset {
        name: name.into(),
        kind,
        physics: Physics::Gt {
            params: GtParams { epsilon: 1.0, sigma: 1.0 },
            learn_sigma: false,
        },
        ic: InitialCondition::GtGaussianPair { s: 0.15 },
        grid: GT_GRID,
        t_end: 0.9,
        n_snapshots: 60,
        n_data: 80,
        data_strategy: DataStrategy::UniformRandom,
        data_window: (0.0, 0.9),
        observed: ObservedFields::KineticPair,
        n_residual: 3600,
        residual_strategy: ResidualStrategy::UniformGrid,
        split_validation: false,
        mlp: MlpSpec::new(2, 32, 3, 2).unwrap(),
        input_map: InputMap::Identity,
        weights: weights(&[10.0, 10.0], &[0.0, 0.0], &[1.0, 1.0], 1.0),
        positivity_fields: vec![0, 1],
        learning_rate: 1e-3,
        max_epochs: 20_000,
        loss_threshold: 1e-5,
        patience: None,
        guesses: Vec::new(),
        seed: 11,
        forecast_split: None,
    }
}

fn gt_diffusive_forward_base(name: &str, kind: ModelKind) -> ExperimentPreset {
    ExperimentPreset {
        name: name.into(),
        kind,
        physics: Physics::Gt {
            params: GtParams { epsilon: 1e-5, sigma: 1.0 },
            learn_sigma: false,
        },
        ic: InitialCondition::GtGaussianRhoEquilibrium { s: 0.15 },
        t_end: 0.02,
        n_data: 160,
        // Measurements stop halfway through the horizon; the second half is
        // reached only through whichever physics the residual carries, which
        // is precisely what separates the two residual forms in this regime.
        data_window: (0.0, 0.01),
        n_residual: 2500,
        seed: 13,
        forecast_split: Some(0.01),
        ..gt_hyperbolic_base(name, kind)
    }
}

fn gt_inverse_base(name: &str, kind: ModelKind) -> ExperimentPreset {
    ExperimentPreset {
        name: name.into(),
        kind,
        physics: Physics::Gt {
            params: GtParams { epsilon: 1e-4, sigma: 4.0 },
            learn_sigma: true,
        },
        ic: InitialCondition::GtCosine,
        t_end: 0.1,
        // 120 output times over 200 cells: the 24000-sample lattice.
        n_snapshots: 120,
        n_data: 24_000,
        data_strategy: DataStrategy::UniformStride,
        data_window: (0.0, 0.1),
        n_residual: 24_000,
        // A fifth of each pool is held out and reported as a validation
        // loss, but never stops the run: coefficient recovery resumes after
        // long validation plateaus (the loss sits within 0.01% of its best
        // for thousands of epochs while the network builds structure), so a
        // plateau rule would cut training off mid-recovery.
        split_validation: true,
        patience: None,
        // The domain is periodic and the solution oscillates at exactly
        // three spatial periods, so the periodic feature map both enforces
        // the boundary condition and removes the low-frequency bias that
        // otherwise stalls the fit for thousands of epochs.
        mlp: MlpSpec::new(3, 32, 3, 2).unwrap(),
        input_map: InputMap::Periodic { alpha: 3.0, length: 2.0 },
        guesses: vec![1.0],
        seed: 17,
        ..gt_hyperbolic_base(name, kind)
    }
}

fn sir_base(name: &str, lambda_sq: f64, tau: f64, t_end: f64, n_residual: usize) -> ExperimentPreset {
    let w_r: &[f64] = if tau < 1.0 {
        &[1.0, 10.0, 1.0, 1.0, 10.0, 1.0]
    } else {
        &[1.0, 100.0, 10.0, 1.0, 100.0, 10.0]
    };
    ExperimentPreset {
        name: name.into(),
        kind: ModelKind::SirApnn,
        physics: Physics::Sir {
            params: SirParams::uniform(12.0, 6.0, lambda_sq, tau).unwrap(),
            learn_beta: true,
            learn_gamma: true,
        },
        ic: InitialCondition::SirTwoHotspots { x1: 5.0, x2: 15.0, alpha1: 0.01, alpha2: 0.0001 },
        grid: SIR_GRID,
        t_end,
        n_snapshots: 60,
        n_data: 20,
        data_strategy: DataStrategy::ProportionalToInfected,
        data_window: (0.0, t_end),
        observed: ObservedFields::Direct { fields: vec![0, 1, 2] },
        n_residual,
        residual_strategy: ResidualStrategy::UniformRandom,
        split_validation: true,
        mlp: MlpSpec::new(3, 32, 8, 6).unwrap(),
        input_map: InputMap::Periodic { alpha: 3.0, length: 20.0 },
        weights: weights(
            &[1.0, 100.0, 10.0, 0.0, 0.0, 0.0],
            &[1.0, 10.0, 1.0, 0.0, 0.0, 0.0],
            w_r,
            1.0,
        ),
        positivity_fields: vec![0, 1, 2],
        learning_rate: 1e-2,
        max_epochs: 20_000,
        loss_threshold: 1e-5,
        patience: None,
        guesses: vec![8.0, 3.0],
        seed: 19,
        forecast_split: None,
    }
}

fn sir_forward(
    mut p: ExperimentPreset,
    name: &str,
    n_data: usize,
    window_end: f64,
) -> ExperimentPreset {
    p.name = name.into();
    if let Physics::Sir { learn_beta, learn_gamma, .. } = &mut p.physics {
        *learn_beta = false;
        *learn_gamma = false;
    }
    p.guesses = Vec::new();
    p.n_data = n_data;
    p.data_strategy = DataStrategy::UniformRandom;
    p.data_window = (0.0, window_end);
    p.forecast_split = Some(window_end);
    p
}

/// Every shipped experiment, frozen to its published constants.
pub fn preset_catalog() -> Vec<ExperimentPreset> {
    let mut dnn = gt_hyperbolic_base("gt-hyperbolic-dnn", ModelKind::GtDataOnlyDnn);
    dnn.n_residual = 0;
    dnn.weights = weights(&[10.0, 10.0], &[0.0, 0.0], &[], 0.0);
    dnn.positivity_fields = Vec::new();

    let pinn = gt_hyperbolic_base("gt-hyperbolic-pinn", ModelKind::GtKineticPinn);

    let diff_pinn = gt_diffusive_forward_base("gt-diffusive-pinn", ModelKind::GtKineticPinn);
    let mut diff_apnn = gt_diffusive_forward_base("gt-diffusive-apnn", ModelKind::GtMacroApnn);
    diff_apnn.observed = ObservedFields::Direct { fields: vec![0, 1] };
    diff_apnn.positivity_fields = vec![0];

    let mut inv_pinn = gt_inverse_base("gt-diffusive-inverse-pinn", ModelKind::GtKineticPinn);
    inv_pinn.max_epochs = 5000;
    let mut inv_apnn = gt_inverse_base("gt-diffusive-inverse-apnn", ModelKind::GtMacroApnn);
    inv_apnn.observed = ObservedFields::Direct { fields: vec![0] };
    inv_apnn.positivity_fields = vec![0];

    let sir_inv_hyp = sir_base("sir-inverse-hyperbolic", 1.0, 1.0, 5.0, 23_600);
    // Parabolic runs carry a 40k residual pool, so each epoch costs nearly
    // twice its hyperbolic counterpart; the shorter cap keeps a full run
    // inside a two hour wall-clock envelope on one core.
    let mut sir_inv_par = sir_base("sir-inverse-parabolic", 1e3, 1e-3, 4.0, 40_000);
    sir_inv_par.max_epochs = 15_000;
    let sir_fwd_hyp = sir_forward(sir_inv_hyp.clone(), "sir-forward-hyperbolic", 8500, 2.5);
    let sir_fwd_par = sir_forward(sir_inv_par.clone(), "sir-forward-parabolic", 5300, 1.5);

    vec![
        dnn,
        pinn,
        diff_pinn,
        diff_apnn,
        inv_pinn,
        inv_apnn,
        sir_inv_hyp,
        sir_inv_par,
        sir_fwd_hyp,
        sir_fwd_par,
    ]
}

/// Look up a shipped preset by its name.
pub fn find_preset(name: &str) -> Result<ExperimentPreset> {
    preset_catalog()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::InvalidConfig(format!("no preset named '{name}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_names_are_unique_and_complete() {
        let names: Vec<String> = preset_catalog().into_iter().map(|p| p.name).collect();
        let expected = [
            "gt-hyperbolic-dnn",
            "gt-hyperbolic-pinn",
            "gt-diffusive-pinn",
            "gt-diffusive-apnn",
            "gt-diffusive-inverse-pinn",
            "gt-diffusive-inverse-apnn",
            "sir-inverse-hyperbolic",
            "sir-inverse-parabolic",
            "sir-forward-hyperbolic",
            "sir-forward-parabolic",
        ];
        assert_eq!(names, expected);
        assert!(find_preset("gt-hyperbolic-pinn").is_ok());
        assert!(find_preset("nonsense").is_err());
    }

    #[test]
    fn presets_round_trip_through_serialization() {
        for p in preset_catalog() {
            let json = serde_json::to_string(&p).unwrap();
            let back: ExperimentPreset = serde_json::from_str(&json).unwrap();
            assert_eq!(back, p);
        }
    }

    #[test]
    fn forward_and_inverse_pairs_differ_only_where_stated() {
        let cat = preset_catalog();
        let pinn = &cat[2];
        let apnn = &cat[3];
        // Identical setup except residual system, observation target, and
        // positivity scope.
        assert_eq!(pinn.n_data, apnn.n_data);
        assert_eq!(pinn.n_residual, apnn.n_residual);
        assert_eq!(pinn.t_end, apnn.t_end);
        assert_eq!(pinn.mlp, apnn.mlp);
        assert_eq!(pinn.physics, apnn.physics);
        assert!(matches!(pinn.residual_form(), Some(ResidualForm::GtKinetic { .. })));
        assert!(matches!(apnn.residual_form(), Some(ResidualForm::GtMacro { .. })));
        assert_eq!(apnn.positivity_fields, vec![0]);
    }

    #[test]
    fn builds_are_bit_reproducible() {
        let p = find_preset("gt-hyperbolic-pinn").unwrap();
        let truth = p.ground_truth().unwrap();
        let (la, pa) = p.build(&truth, 5).unwrap();
        let (lb, pb) = p.build(&truth, 5).unwrap();
        let (_, pc) = p.build(&truth, 6).unwrap();
        assert_eq!(pa, pb);
        assert_eq!(la.pools(), lb.pools());
        assert_ne!(pa, pc);
    }

    #[test]
    fn kinetic_observations_come_from_the_macro_truth() {
        let p = find_preset("gt-hyperbolic-pinn").unwrap();
        let truth = p.ground_truth().unwrap();
        let (loss, _) = p.build(&truth, p.seed).unwrap();
        assert_eq!(loss.pools().data.len(), 80);
        assert_eq!(loss.pools().residual.len(), 3600);
        for pt in &loss.pools().data {
            assert_eq!(pt.fields, vec![0, 1]);
            // rho = f+ + f-, so the pair must rebuild a lattice density.
            let rho = pt.values[0] + pt.values[1];
            assert!(rho.is_finite() && rho >= -1e-12);
        }
    }

    #[test]
    fn inverse_build_splits_both_pools_and_appends_the_guess() {
        let p = find_preset("gt-diffusive-inverse-apnn").unwrap();
        let truth = p.ground_truth().unwrap();
        assert_eq!(truth.n_snapshots() * truth.grid.n_cells, 24_000);
        let (loss, params) = p.build(&truth, p.seed).unwrap();
        assert_eq!(loss.pools().data.len(), 19_200);
        assert_eq!(loss.pools().data_val.len(), 4_800);
        // 24000 requested grid points round up to a 155 x 155 lattice.
        let n_res = 155 * 155;
        assert_eq!(loss.pools().residual.len(), n_res - n_res / 5);
        assert_eq!(loss.pools().residual_val.len(), n_res / 5);
        assert_eq!(params.len(), loss.spec().n_params() + 1);
        let xi = loss.learnable_values(&params);
        assert!((xi[0] - 1.0).abs() < 1e-12, "guessed sigma must round-trip");
        // Every observation is density-only.
        assert!(loss.pools().data.iter().all(|d| d.fields == vec![0]));
    }

    #[test]
    fn epidemic_data_is_infection_weighted_and_parameters_learned() {
        let p = find_preset("sir-inverse-hyperbolic").unwrap();
        let truth = p.ground_truth().unwrap();
        let (loss, params) = p.build(&truth, p.seed).unwrap();
        assert_eq!(loss.pools().data.len() + loss.pools().data_val.len(), 20);
        assert_eq!(
            loss.pools().residual.len() + loss.pools().residual_val.len(),
            23_600
        );
        assert_eq!(loss.n_learnable(), 2);
        let xi = loss.learnable_values(&params);
        assert!((xi[0] - 8.0).abs() < 1e-12 && (xi[1] - 3.0).abs() < 1e-12);
        assert_eq!(p.physics.learnable_truths(), vec![12.0, 6.0]);
    }

    #[test]
    fn every_preset_builds_against_its_own_ground_truth() {
        for p in preset_catalog() {
            if p.name.starts_with("sir") {
                // Exercised separately; the epidemic solves dominate runtime.
                continue;
            }
            let truth = p.ground_truth().unwrap();
            let built = p.build(&truth, p.seed);
            assert!(built.is_ok(), "{} failed: {:?}", p.name, built.err());
        }
    }
}
