use super::law::poisson_count;
use super::{LevyLaw, RngStreams};
use crate::error::{invalid, Error, Result};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub size: f64,
}

/// Jump times in (0, T] and sizes of a compound Poisson path, per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpPath {
    horizon: f64,
    modes: Vec<Vec<Jump>>,
}

impl JumpPath {
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    /// Jumps of the 0-based mode `j`, sorted by time.
    pub fn jumps(&self, j: usize) -> &[Jump] {
        &self.modes[j]
    }

    /// L_k(T) as the time-ordered sum of the jump sizes.
    pub fn terminal_value(&self, j: usize) -> f64 {
        self.modes[j].iter().fold(0.0, |acc, jump| acc + jump.size)
    }
}

/// Draws one path for `modes` modes using the streams `(path, k)`.
pub fn sample_jump_path(
    law: &LevyLaw,
    horizon: f64,
    modes: usize,
    streams: &RngStreams,
    path: u64,
) -> Result<JumpPath> {
    law.validate()?;
    let LevyLaw::CompoundPoisson { intensity, jumps } = *law else {
        return Err(Error::Unsupported(format!("jump paths need a compound_poisson law, got {}", law.name())));
    };
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(invalid(format!("horizon must be nonnegative, got {horizon}")));
    }
    let modes = (0..modes)
        .map(|k| {
            let mut rng = streams.stream(path, k as u64);
            let count = poisson_count(intensity * horizon, &mut rng);
            let mut list: Vec<Jump> = (0..count)
                .map(|_| {
                    let u: f64 = rng.gen();
                    let time = horizon * (1.0 - u);
                    let size = jumps.sample(intensity, &mut rng);
                    Jump { time, size }
                })
                .collect();
            list.sort_by(|a, b| a.time.total_cmp(&b.time));
            list
        })
        .collect();
    Ok(JumpPath { horizon, modes })
}

/// Strictly increasing time points 0 = t_0 < t_1 < ... < t_N.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 || points[0] != 0.0 {
            return Err(invalid("time grid needs at least two points starting at 0"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) || points.iter().any(|t| !t.is_finite()) {
            return Err(invalid("time grid must be strictly increasing and finite"));
        }
        Ok(Self { points })
    }

    /// `steps` equal cells on [0, horizon]; t_n = n·(horizon/steps).
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if steps == 0 || !(horizon > 0.0) {
            return Err(invalid("uniform grid needs a positive horizon and step count"));
        }
        let dt = horizon / steps as f64;
        let mut points: Vec<f64> = (0..=steps).map(|n| n as f64 * dt).collect();
        points[steps] = horizon;
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn cells(&self) -> usize {
        self.points.len() - 1
    }

    pub fn end(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// 0-based index of the right-closed cell (t_{n−1}, t_n] containing `t`.
    pub fn cell_of(&self, t: f64) -> Option<usize> {
        if !(t > 0.0) || t > self.end() {
            return None;
        }
        let n = self.points.partition_point(|&p| p < t);
        Some(n - 1)
    }
}

/// Per-mode, per-cell sums of jump sizes over right-closed cells.
///
/// Sizes are added in time order, so refined and coarse grids agree bitwise
/// whenever partial sums are exactly representable (two-point jumps with an
/// intensity that is a power of four).
pub fn increments_from_path(path: &JumpPath, grid: &TimeGrid) -> Result<Vec<Vec<f64>>> {
    if grid.end() > path.horizon() {
        return Err(invalid(format!("grid ends at {} beyond the path horizon {}", grid.end(), path.horizon())));
    }
    Ok((0..path.mode_count())
        .map(|j| {
            let mut cells = vec![0.0; grid.cells()];
            for jump in path.jumps(j) {
                if let Some(n) = grid.cell_of(jump.time) {
                    cells[n] += jump.size;
                }
            }
            cells
        })
        .collect())
}
