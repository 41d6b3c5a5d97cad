//! Finite-volume reference solvers.
//!
//! Both models share the same skeleton: a periodic cell-centered grid, an
//! IMEX Runge-Kutta pair whose explicit part carries the transport in flux
//! form and whose implicit part absorbs the stiff relaxation, and a driver
//! that lands snapshots at exact requested times by subdividing each
//! snapshot interval into equal steps no larger than the stability bound.
//!
//! The solvers exist to manufacture training and evaluation data, so the
//! driver returns a dense space-time table rather than a final state.

mod gt;
mod imex;
mod sir;

pub use gt::GtStepper;
pub use imex::{ImexConfig, Reconstruction, ARS_DELTA, ARS_GAMMA, A_EX, A_IM, STAGES};
pub use sir::SirStepper;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::models::{
    GtParams, InitialCondition, SirParams, GT_MACRO_FIELD_NAMES, SIR_FIELD_NAMES,
};

/// Dense solver output: `values[snapshot][field][cell]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    pub grid: Grid1D,
    pub times: Vec<f64>,
    pub field_names: Vec<String>,
    pub values: Vec<Vec<Vec<f64>>>,
}

impl SpaceTimeField {
    pub fn n_snapshots(&self) -> usize {
        self.times.len()
    }

    pub fn n_fields(&self) -> usize {
        self.field_names.len()
    }

    pub fn field_index(&self, name: &str) -> Result<usize> {
        self.field_names
            .iter()
            .position(|f| f == name)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown field '{name}'")))
    }

    pub fn at(&self, snapshot: usize, field: usize) -> &[f64] {
        &self.values[snapshot][field]
    }

    /// Cell-sum integral of one field at one snapshot.
    pub fn integral(&self, snapshot: usize, field: usize) -> f64 {
        self.values[snapshot][field].iter().sum::<f64>() * self.grid.dx()
    }

    fn push_snapshot(&mut self, t: f64, fields: &[&[f64]]) -> Result<()> {
        for (name, f) in self.field_names.iter().zip(fields) {
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!(
                    "field '{name}' left the finite range by t = {t}"
                )));
            }
        }
        self.times.push(t);
        self.values.push(fields.iter().map(|f| f.to_vec()).collect());
        Ok(())
    }
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two points");
    let h = (b - a) / (n - 1) as f64;
    (0..n).map(|k| if k == n - 1 { b } else { a + k as f64 * h }).collect()
}

/// Relative l2 distance `||a - b|| / ||b||`.
pub fn l2_rel_error(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.iter().zip(b) {
        num += (x - y) * (x - y);
        den += y * y;
    }
    (num / den).sqrt()
}

fn solve<S>(
    mut field: SpaceTimeField,
    times: &[f64],
    dt_max: f64,
    mut snapshot: S,
) -> Result<SpaceTimeField>
where
    S: FnMut(&mut SpaceTimeField, f64, Option<(f64, usize)>) -> Result<()>,
{
    snapshot(&mut field, times[0], None)?;
    for w in times.windows(2) {
        let span = w[1] - w[0];
        let n_sub = (span / dt_max).ceil().max(1.0) as usize;
        let h = span / n_sub as f64;
        snapshot(&mut field, w[1], Some((h, n_sub)))?;
    }
    Ok(field)
}

/// Advance the Goldstein-Taylor model and record `n_snapshots` evenly spaced
/// states (macroscopic variables `rho`, `j`) from `t = 0` to `t_end`.
pub fn solve_gt(
    p: &GtParams,
    grid: &Grid1D,
    cfg: ImexConfig,
    ic: &InitialCondition,
    t_end: f64,
    n_snapshots: usize,
) -> Result<SpaceTimeField> {
    if !(t_end > 0.0) || n_snapshots < 2 {
        return Err(Error::InvalidConfig(
            "need t_end > 0 and at least two snapshots".into(),
        ));
    }
    let mut state = ic.gt_state(p, grid)?;
    let mut stepper = GtStepper::new(*p, *grid, cfg);
    let dt_max = stepper.stable_dt();
    let times = linspace(0.0, t_end, n_snapshots);
    let field = SpaceTimeField {
        grid: *grid,
        times: Vec::new(),
        field_names: GT_MACRO_FIELD_NAMES.iter().map(|s| s.to_string()).collect(),
        values: Vec::new(),
    };
    solve(field, &times, dt_max, |f, t, advance| {
        if let Some((h, n_sub)) = advance {
            for _ in 0..n_sub {
                stepper.step(&mut state, h);
            }
        }
        f.push_snapshot(t, &[&state.rho, &state.j])
    })
}

/// Advance the SIR transport system and record `n_snapshots` evenly spaced
/// states (all six fields) from `t = 0` to `t_end`.
pub fn solve_sir(
    p: &SirParams,
    grid: &Grid1D,
    cfg: ImexConfig,
    ic: &InitialCondition,
    t_end: f64,
    n_snapshots: usize,
) -> Result<SpaceTimeField> {
    if !(t_end > 0.0) || n_snapshots < 2 {
        return Err(Error::InvalidConfig(
            "need t_end > 0 and at least two snapshots".into(),
        ));
    }
    let mut state = ic.sir_state(p, grid)?;
    let mut stepper = SirStepper::new(*p, *grid, cfg);
    let dt_max = stepper.stable_dt();
    let times = linspace(0.0, t_end, n_snapshots);
    let field = SpaceTimeField {
        grid: *grid,
        times: Vec::new(),
        field_names: SIR_FIELD_NAMES.iter().map(|s| s.to_string()).collect(),
        values: Vec::new(),
    };
    solve(field, &times, dt_max, |f, t, advance| {
        if let Some((h, n_sub)) = advance {
            for _ in 0..n_sub {
                stepper.step(&mut state, h);
            }
        }
        let views: Vec<&[f64]> = state.u.iter().map(|v| v.as_slice()).collect();
        f.push_snapshot(t, &views)
    })
}

/// Restrict a fine-grid cell-average field onto a grid half its resolution.
pub fn restrict_by_two(fine: &[f64]) -> Vec<f64> {
    assert!(fine.len() % 2 == 0);
    fine.chunks_exact(2).map(|c| 0.5 * (c[0] + c[1])).collect()
}

/// Observed convergence order from errors at resolutions (n, 2n):
/// `log2(e_coarse / e_fine)`.
pub fn observed_order(e_coarse: f64, e_fine: f64) -> f64 {
    (e_coarse / e_fine).log2()
}
