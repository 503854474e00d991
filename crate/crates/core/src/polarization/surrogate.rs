use rayon::prelude::*;

use crate::riesz::{dist2, field, kernel, Configuration};

/// Weights below this (relative to the largest) are dropped from the
/// gradient sum.
const WEIGHT_FLOOR: f64 = 1e-18;

/// Softmin of the potential over a fixed witness grid,
/// `F(ω) = −(1/τ) log Σ_y exp(−τ f_ω(y))`.
///
/// `F` is smooth in the configuration and sits below the grid minimum by at
/// most `log |grid| / τ`.
pub struct Surrogate<'g> {
    grid: &'g [f64],
    dim: usize,
    s: f64,
    tau: f64,
}

impl<'g> Surrogate<'g> {
    /// `grid` holds the witness points as flat coordinates.
    pub fn new(grid: &'g [f64], dim: usize, s: f64, tau: f64) -> Self {
        debug_assert_eq!(grid.len() % dim, 0);
        Surrogate { grid, dim, s, tau }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    fn potentials(&self, config: &Configuration) -> Vec<f64> {
        let (m, s) = (self.dim, self.s);
        let coords = config.coords();
        self.grid
            .par_chunks_exact(m)
            .map(|y| field(y, coords, m, s))
            .collect()
    }

    pub fn value(&self, config: &Configuration) -> f64 {
        self.value_and_gradient(config).0
    }

    /// Surrogate value and its gradient in ambient coordinates (flat, same
    /// layout as the configuration).
    pub fn value_and_gradient(&self, config: &Configuration) -> (f64, Vec<f64>) {
        let m = self.dim;
        let vals = self.potentials(config);
        let fmin = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let mut grad = vec![0.0; config.coords().len()];
        if !fmin.is_finite() {
            return (fmin, grad);
        }
        let mut z = 0.0;
        let mut active = Vec::new();
        for (j, &f) in vals.iter().enumerate() {
            let e = (-self.tau * (f - fmin)).exp();
            z += e;
            if e > WEIGHT_FLOOR {
                active.push((j, e));
            }
        }
        let value = fmin - z.ln() / self.tau;
        let coords = config.coords();
        for (j, e) in active {
            let y = &self.grid[j * m..(j + 1) * m];
            let w = e / z;
            match m {
                2 => accumulate::<2>(&mut grad, y, coords, w, self.s),
                3 => accumulate::<3>(&mut grad, y, coords, w, self.s),
                _ => {
                    for (i, x) in coords.chunks_exact(m).enumerate() {
                        let d2 = dist2(y, x);
                        let c = w * self.s * kernel(d2, self.s) / d2;
                        for k in 0..m {
                            grad[i * m + k] += c * (y[k] - x[k]);
                        }
                    }
                }
            }
        }
        (value, grad)
    }
}

/// Adds `w·s·r^{−s−2}·(y − x_i)` to the gradient block of every point.
fn accumulate<const M: usize>(grad: &mut [f64], y: &[f64], coords: &[f64], w: f64, s: f64) {
    let y: [f64; M] = y.try_into().expect("point of the ambient dimension");
    for (g, x) in grad.chunks_exact_mut(M).zip(coords.chunks_exact(M)) {
        let mut diff = [0.0; M];
        let mut d2 = 0.0;
        for k in 0..M {
            diff[k] = y[k] - x[k];
            d2 += diff[k] * diff[k];
        }
        let c = w * s * kernel(d2, s) / d2;
        for k in 0..M {
            g[k] += c * diff[k];
        }
    }
}
