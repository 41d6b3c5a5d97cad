use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform one-dimensional cell grid with periodic topology.
///
/// Cell `i` covers `[x_min + i*dx, x_min + (i+1)*dx)` and is represented by
/// its center `x_min + (i + 1/2)*dx`. Neighbour indices wrap around, so the
/// last cell is adjacent to the first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidParam(format!(
                "grid needs finite x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_cells < 2 {
            return Err(Error::InvalidParam(format!(
                "grid needs at least 2 cells, got {n_cells}"
            )));
        }
        Ok(Self { x_min, x_max, n_cells })
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_cells as f64
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    #[inline]
    pub fn center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.center(i)).collect()
    }

    /// Periodic left neighbour.
    #[inline]
    pub fn left(&self, i: usize) -> usize {
        if i == 0 {
            self.n_cells - 1
        } else {
            i - 1
        }
    }

    /// Periodic right neighbour.
    #[inline]
    pub fn right(&self, i: usize) -> usize {
        if i + 1 == self.n_cells {
            0
        } else {
            i + 1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centers_are_cell_midpoints() {
        let g = Grid1D::new(-1.0, 1.0, 4).unwrap();
        assert_eq!(g.dx(), 0.5);
        assert_eq!(g.center(0), -0.75);
        assert_eq!(g.center(3), 0.75);
    }

    #[test]
    fn neighbours_wrap() {
        let g = Grid1D::new(0.0, 20.0, 400).unwrap();
        assert_eq!(g.left(0), 399);
        assert_eq!(g.right(399), 0);
        assert_eq!(g.left(7), 6);
        assert_eq!(g.right(7), 8);
    }

    #[test]
    fn degenerate_grids_are_rejected() {
        assert!(Grid1D::new(1.0, 1.0, 10).is_err());
        assert!(Grid1D::new(0.0, -1.0, 10).is_err());
        assert!(Grid1D::new(0.0, 1.0, 1).is_err());
    }
}
