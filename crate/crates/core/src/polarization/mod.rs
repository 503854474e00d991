//! Outer maximization `M^s_N(A) = max_ω min_{y ∈ A} Σ_i |y − x_i|^{−s}`.
//!
//! Every strategy works on a fixed witness grid and hands its configurations
//! to the exact inner minimizer for scoring, so a reported value is always a
//! lower bound for `M^s_N(A)` up to the inner minimizer's accuracy.

mod grid;
mod surrogate;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::geometry::{angle_of, Point, SetDescriptor};
use crate::riesz::{dist2, field, kernel, NOISE, Configuration, InnerMinimizer, InnerOptions, PotentialMin};

pub use grid::{oracle_solve, solve_on_grid, ORACLE_MAX_GRID, ORACLE_MAX_N};
pub use surrogate::Surrogate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Gradient ascent on the softmin surrogate over a temperature schedule.
    SmoothedAscent,
    /// Move the least useful point toward the current argmin.
    Exchange,
    /// Single-point random moves with Metropolis acceptance and cooling.
    Anneal,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::SmoothedAscent, Strategy::Exchange, Strategy::Anneal];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::SmoothedAscent => "smoothed_ascent",
            Strategy::Exchange => "exchange",
            Strategy::Anneal => "anneal",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "smoothed_ascent" => Ok(Strategy::SmoothedAscent),
            "exchange" => Ok(Strategy::Exchange),
            "anneal" => Ok(Strategy::Anneal),
            _ => Err(Error::UnknownStrategy(s.to_string())),
        }
    }
}

/// How restarts pick their starting configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Restart 0 from the quasi-uniform sample, the others random.
    Mixed,
    Random,
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveOptions {
    pub restarts: usize,
    pub seed: u64,
    pub init: InitMode,
    /// Relative softmin temperatures: stage `k` uses `τ = t_k / v`, where `v`
    /// is the grid minimum at the start of the stage.
    pub temperatures: Vec<f64>,
    /// Iteration cap per ascent stage; exchange and anneal scale their step
    /// budgets from it.
    pub max_iters: usize,
    /// Witness grid size; `None` means `max(1024, 64·N)`.
    pub surrogate_grid: Option<usize>,
    pub inner: InnerOptions,
    /// Exact pattern-search polish runs when `N · m` is at most this.
    pub polish_max_dims: usize,
    /// Exact evaluations allowed in the polish.
    pub polish_evals: usize,
    /// Starting configuration for restart 0.
    #[serde(skip)]
    pub warm_start: Option<Configuration>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            restarts: 16,
            seed: 0,
            init: InitMode::Mixed,
            temperatures: vec![10.0, 30.0, 100.0, 300.0],
            max_iters: 200,
            surrogate_grid: None,
            inner: InnerOptions::default(),
            polish_max_dims: 48,
            polish_evals: 3000,
            warm_start: None,
        }
    }
}

impl SolveOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }
}

/// Seed of restart `index`: splitmix64 applied to
/// `seed + (index + 1)·0x9E3779B97F4A7C15`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Best configuration found, scored exactly.
#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub config: Configuration,
    /// Exact `M^s(ω; A)` of `config`.
    pub value: ExtReal,
    pub witness: Point,
    pub strategy: String,
    pub seed: u64,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
    /// Exact value reached by each restart, in restart order.
    pub restart_values: Vec<ExtReal>,
    /// Raw inner-grid minimum behind `value`, and the grid size.
    pub grid_value: ExtReal,
    pub grid_size: usize,
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// `(value, sorted points)` ordering used to reduce restarts: larger value
/// first, then the lexicographically smaller multiset.
fn beats(va: ExtReal, a: &Configuration, vb: ExtReal, b: &Configuration) -> bool {
    match va.total_cmp(&vb) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => {
            let (pa, pb) = (a.sorted_points(), b.sorted_points());
            pa.iter()
                .zip(&pb)
                .map(|(x, y)| lex_cmp(x, y))
                .find(|o| o.is_ne())
                .is_some_and(|o| o.is_lt())
        }
    }
}

/// `N` equally spaced points `R·(cos 2πk/N, sin 2πk/N)`.
pub fn equally_spaced_circle(n: usize, radius: f64) -> Vec<Point> {
    (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            vec![radius * t.cos(), radius * t.sin()]
        })
        .collect()
}

/// `M^s` of `N` equally spaced points on the unit circle, evaluated at the
/// midpoint angle `π/N`; equal to `M^s_N(S^1)`.
pub fn equally_spaced_value(n: usize, s: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mid = PI / n as f64;
    (0..n)
        .map(|j| {
            let mut theta = (mid - TAU * j as f64 / n as f64).abs() % TAU;
            if theta > PI {
                theta = TAU - theta;
            }
            (2.0 * (theta / 2.0).sin()).powf(-s)
        })
        .sum()
}

struct Run {
    config: Configuration,
    min: PotentialMin,
    iterations: usize,
    converged: bool,
}

struct Solver<'a> {
    set: &'a SetDescriptor,
    n: usize,
    s: f64,
    m: usize,
    spacing: f64,
    strategy: Strategy,
    opts: &'a SolveOptions,
    grid: Vec<f64>,
    inner: InnerMinimizer<'a>,
}

impl<'a> Solver<'a> {
    fn score(&self, cfg: &Configuration) -> PotentialMin {
        self.inner.minimize(cfg)
    }

    fn field(&self, cfg: &Configuration) -> Vec<f64> {
        let (m, s) = (self.m, self.s);
        self.grid
            .par_chunks_exact(m)
            .map(|y| field(y, cfg.coords(), m, s))
            .collect()
    }

    fn grid_point(&self, j: usize) -> &[f64] {
        &self.grid[j * self.m..(j + 1) * self.m]
    }

    fn initial(&self, restart: usize, rng: &mut ChaCha8Rng) -> Configuration {
        if restart == 0 {
            if let Some(w) = &self.opts.warm_start {
                return w.clone();
            }
        }
        let uniform = match self.opts.init {
            InitMode::Uniform => true,
            InitMode::Mixed => restart == 0,
            InitMode::Random => false,
        };
        let pts = if uniform {
            self.set.sample_points(self.n)
        } else {
            (0..self.n).map(|_| self.set.random_point(rng)).collect()
        };
        Configuration::from_points(self.m, &pts)
    }

    /// `project(x + step·v)` for one point.
    fn moved(&self, x: &[f64], v: &[f64], step: f64) -> Point {
        let p: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + step * b).collect();
        self.set.project(&p)
    }

    fn gaussian(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
    }

    fn run(&self, restart: usize) -> Run {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.opts.seed, restart as u64));
        let mut cfg = self.initial(restart, &mut rng);
        let mut best = (self.score(&cfg), cfg.clone());
        let keep = |c: &Configuration, best: &mut (PotentialMin, Configuration)| {
            let min = self.score(c);
            if min.value > best.0.value {
                *best = (min, c.clone());
            }
        };
        let (iterations, converged) = match self.strategy {
            Strategy::SmoothedAscent => {
                let mut stages = Vec::new();
                let out = self.smoothed_ascent(&mut cfg, |c| stages.push(c.clone()));
                for c in &stages {
                    keep(c, &mut best);
                }
                out
            }
            Strategy::Exchange => self.exchange(&mut cfg, &mut rng),
            Strategy::Anneal => self.anneal(&mut cfg, &mut rng),
        };
        keep(&cfg, &mut best);
        let (min, cfg) = best;
        let (cfg, min, polish_evals) = self.polish(cfg, min, &mut rng);
        Run {
            config: cfg,
            converged: converged && min.converged,
            min,
            iterations: iterations + polish_evals,
        }
    }

    /// Tangential part of a flat ambient vector field on the configuration.
    fn tangent_field(&self, cfg: &Configuration, g: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut out = Vec::with_capacity(g.len());
        for (i, x) in cfg.points().enumerate() {
            let (_, part) = self.set.project_with_part(x);
            out.extend(self.set.tangent(part, x, &g[i * m..(i + 1) * m]));
        }
        out
    }

    fn smoothed_ascent<F: FnMut(&Configuration)>(&self, cfg: &mut Configuration, mut stage_done: F) -> (usize, bool) {
        let m = self.m;
        let mut iterations = 0;
        let mut converged = true;
        let eta_min = 1e-6 * self.spacing;
        for &t in &self.opts.temperatures {
            let v = self.field(cfg).into_iter().fold(f64::INFINITY, f64::min);
            if !(v.is_finite() && v > 0.0) {
                break;
            }
            let sur = Surrogate::new(&self.grid, m, self.s, t / v);
            let (mut f, mut g) = sur.value_and_gradient(cfg);
            let mut eta = 0.5 * self.spacing;
            let mut k = 0;
            while eta > eta_min && k < self.opts.max_iters {
                k += 1;
                let dir = self.tangent_field(cfg, &g);
                let gmax = dir
                    .chunks_exact(m)
                    .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
                    .fold(0.0, f64::max);
                if !(gmax > 0.0) {
                    break;
                }
                let mut trial = Vec::with_capacity(cfg.coords().len());
                for (i, x) in cfg.points().enumerate() {
                    trial.extend(self.moved(x, &dir[i * m..(i + 1) * m], eta / gmax));
                }
                let trial = Configuration::from_flat(m, trial);
                let (ft, gt) = sur.value_and_gradient(&trial);
                if ft > f {
                    *cfg = trial;
                    f = ft;
                    g = gt;
                    eta = (1.5 * eta).min(self.spacing);
                } else {
                    eta *= 0.5;
                }
            }
            if eta > eta_min && k >= self.opts.max_iters {
                converged = false;
            }
            iterations += k;
            stage_done(cfg);
        }
        (iterations, converged)
    }

    /// Grid minimum after replacing point `i` by `c`, given the current grid
    /// field.
    fn swap_min(&self, cfg: &Configuration, vals: &[f64], i: usize, c: Option<&[f64]>) -> f64 {
        let (m, s) = (self.m, self.s);
        let old = cfg.point(i);
        self.grid
            .par_chunks_exact(m)
            .zip(vals.par_iter())
            .map(|(y, &f)| {
                let d_old = dist2(y, old);
                let add = match c {
                    Some(c) => {
                        let d = dist2(y, c);
                        if d == 0.0 {
                            return f64::INFINITY;
                        }
                        kernel(d, s)
                    }
                    None => 0.0,
                };
                if f.is_finite() {
                    f - kernel(d_old, s) + add
                } else {
                    // a hit somewhere; recompute without point i
                    let mut acc = add;
                    for (j, x) in cfg.points().enumerate() {
                        if j != i {
                            let d = dist2(y, x);
                            if d == 0.0 {
                                return f64::INFINITY;
                            }
                            acc += kernel(d, s);
                        }
                    }
                    acc
                }
            })
            .reduce(|| f64::INFINITY, f64::min)
    }

    fn exchange(&self, cfg: &mut Configuration, rng: &mut ChaCha8Rng) -> (usize, bool) {
        let max_steps = self.opts.max_iters * self.opts.temperatures.len().max(1);
        let r_min = 1e-6 * self.spacing;
        let mut r = self.spacing;
        let mut vals = self.field(cfg);
        let mut cur = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let mut steps = 0;
        while r > r_min && steps < max_steps {
            steps += 1;
            let w = argmin(&vals);
            // the point whose removal lowers the minimum least
            let mut mover = (f64::NEG_INFINITY, 0);
            for i in 0..self.n {
                let v = self.swap_min(cfg, &vals, i, None);
                if v > mover.0 {
                    mover = (v, i);
                }
            }
            let i = mover.1;
            let witness = self.grid_point(w).to_vec();
            let mut cands = vec![witness.clone()];
            for _ in 0..8 {
                let z = self.gaussian(rng);
                cands.push(self.moved(&witness, &z, r));
            }
            let mut best: Option<(f64, usize)> = None;
            for (k, c) in cands.iter().enumerate() {
                let v = self.swap_min(cfg, &vals, i, Some(c));
                if v > cur && best.is_none_or(|b| v > b.0) {
                    best = Some((v, k));
                }
            }
            match best {
                Some((_, k)) => {
                    cfg.point_mut(i).copy_from_slice(&cands[k]);
                    vals = self.field(cfg);
                    cur = vals.iter().copied().fold(f64::INFINITY, f64::min);
                    r = (1.5 * r).min(self.spacing);
                }
                None => r *= 0.5,
            }
        }
        (steps, r <= r_min)
    }

    fn anneal(&self, cfg: &mut Configuration, rng: &mut ChaCha8Rng) -> (usize, bool) {
        let steps = 10 * self.opts.max_iters * self.opts.temperatures.len().max(1);
        let mut vals = self.field(cfg);
        let mut cur = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let scale = if cur.is_finite() && cur > 0.0 { cur } else { 1.0 };
        let (t0, t1) = (1e-2 * scale, 1e-6 * scale);
        let (sig0, sig1) = (self.spacing, 1e-3 * self.spacing);
        let mut best = (cur, cfg.clone());
        let mut accepted = 0;
        for k in 0..steps {
            let frac = k as f64 / steps as f64;
            let temp = t0 * (t1 / t0).powf(frac);
            let sigma = sig0 * (sig1 / sig0).powf(frac);
            let i = rng.random_range(0..self.n);
            let z = self.gaussian(rng);
            let c = self.moved(cfg.point(i), &z, sigma);
            let v = self.swap_min(cfg, &vals, i, Some(&c));
            let u: f64 = rng.random();
            if v >= cur || u < ((v - cur) / temp).exp() {
                let old = cfg.point(i).to_vec();
                cfg.point_mut(i).copy_from_slice(&c);
                accepted += 1;
                if accepted % 64 == 0 {
                    vals = self.field(cfg);
                } else {
                    self.shift_field(&mut vals, cfg, &old, &c);
                }
                cur = vals.iter().copied().fold(f64::INFINITY, f64::min);
                if cur > best.0 {
                    best = (cur, cfg.clone());
                }
            }
        }
        *cfg = best.1;
        (steps, true)
    }

    /// Updates the grid field after a point moved from `old` to `new`;
    /// entries that were or become infinite are recomputed.
    fn shift_field(&self, vals: &mut [f64], cfg: &Configuration, old: &[f64], new: &[f64]) {
        let (m, s) = (self.m, self.s);
        self.grid
            .par_chunks_exact(m)
            .zip(vals.par_iter_mut())
            .for_each(|(y, f)| {
                let d_new = dist2(y, new);
                if f.is_finite() && d_new > 0.0 {
                    *f += kernel(d_new, s) - kernel(dist2(y, old), s);
                } else {
                    *f = field(y, cfg.coords(), m, s);
                }
            });
    }

    /// `c + factor·(x − c)` for every point, `c` the centroid, projected.
    fn homothety(&self, cfg: &Configuration, factor: f64) -> Configuration {
        let mut centroid = vec![0.0; self.m];
        for x in cfg.points() {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / self.n as f64;
            }
        }
        let mut coords = Vec::with_capacity(cfg.coords().len());
        for x in cfg.points() {
            let p: Vec<f64> = x.iter().zip(&centroid).map(|(v, c)| c + factor * (v - c)).collect();
            coords.extend(self.set.project(&p));
        }
        Configuration::from_flat(self.m, coords)
    }

    /// Gradient of `f(y) = Σ_i |y − x_i|^{−s}` with respect to the
    /// configuration, projected onto the tangent spaces at the points.
    fn witness_gradient(&self, cfg: &Configuration, y: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut g = vec![0.0; cfg.coords().len()];
        for (i, x) in cfg.points().enumerate() {
            let d2 = dist2(y, x);
            let c = self.s * kernel(d2, self.s) / d2;
            for k in 0..m {
                g[i * m + k] = c * (y[k] - x[k]);
            }
        }
        self.tangent_field(cfg, &g)
    }

    /// Exact local ascent for small `N·m`.
    ///
    /// First an ε-steepest ascent: the direction is the minimum-norm element
    /// of the convex hull of the witness gradients of all nearly active local
    /// minima, which is the steepest ascent direction of the maximin near a
    /// kink. Then a pattern search over single-point axis moves, random
    /// collective moves, rigid translations and homotheties about the
    /// centroid. Both accept only strict exact improvements.
    fn polish(&self, mut cfg: Configuration, mut cur: PotentialMin, rng: &mut ChaCha8Rng) -> (Configuration, PotentialMin, usize) {
        if self.n * self.m > self.opts.polish_max_dims || !cur.value.is_finite() {
            return (cfg, cur, 0);
        }
        let budget = self.opts.polish_evals;
        let mut evals = 0;
        let h_min = 1e-10 * self.spacing;
        let better = |a: &PotentialMin, b: &PotentialMin| a.value.to_f64() > b.value.to_f64() * (1.0 + NOISE);

        let mut mu = f64::NAN;
        while evals < budget {
            let (min, minima) = self.inner.local_minima(&cfg, 2 * self.opts.inner.candidates);
            evals += 1;
            if better(&min, &cur) {
                cur = min;
            }
            // contractions about the centroid, which the local model only
            // sees one small step at a time
            for factor in [0.5, 0.9] {
                let mut hit = false;
                while evals < budget {
                    let trial = self.homothety(&cfg, factor);
                    let min = self.score(&trial);
                    evals += 1;
                    if !better(&min, &cur) {
                        break;
                    }
                    cfg = trial;
                    cur = min;
                    hit = true;
                }
                if hit {
                    break;
                }
            }
            let v = cur.value.to_f64();
            // refined local minima plus the lowest grid points
            let vals = self.field(&cfg);
            let mut order: Vec<usize> = (0..vals.len()).collect();
            order.sort_by(|a, b| vals[*a].total_cmp(&vals[*b]).then(a.cmp(b)));
            order.truncate(MODEL_GRID_POINTS);
            let model: Vec<(f64, Vec<f64>)> = minima
                .iter()
                .map(|(val, y)| (*val, y.as_slice()))
                .chain(order.iter().map(|&j| (vals[j], self.grid_point(j))))
                .filter(|(val, _)| val.is_finite())
                .map(|(val, y)| (val, self.witness_gradient(&cfg, y)))
                .collect();
            let gmax = model
                .iter()
                .flat_map(|(_, g)| g.iter())
                .fold(0.0f64, |a, b| a.max(b.abs()));
            if model.is_empty() || !(gmax > 0.0) {
                break;
            }
            if mu.is_nan() {
                mu = 0.1 * self.spacing / gmax;
            }
            let mut accepted = false;
            while evals < budget && mu * gmax > h_min {
                let (d, predicted) = proximal_step(&model, mu);
                if !(predicted > v * NOISE) {
                    // an inexact dual at large μ; a shorter step fixes it
                    mu *= 0.25;
                    continue;
                }
                let mut coords = Vec::with_capacity(cfg.coords().len());
                for (i, x) in cfg.points().enumerate() {
                    coords.extend(self.moved(x, &d[i * self.m..(i + 1) * self.m], 1.0));
                }
                let trial = Configuration::from_flat(self.m, coords);
                let min = self.score(&trial);
                evals += 1;
                let gain = min.value.to_f64() - v;
                if better(&min, &cur) && gain >= 0.1 * predicted {
                    cfg = trial;
                    cur = min;
                    // extrapolate along the accepted step while it pays
                    let mut scale = 1.0;
                    while evals < budget {
                        scale *= 2.0;
                        let mut coords = Vec::with_capacity(cfg.coords().len());
                        for (i, x) in cfg.points().enumerate() {
                            coords.extend(self.moved(x, &d[i * self.m..(i + 1) * self.m], scale));
                        }
                        let next = Configuration::from_flat(self.m, coords);
                        let min = self.score(&next);
                        evals += 1;
                        if !better(&min, &cur) {
                            break;
                        }
                        cfg = next;
                        cur = min;
                    }
                    mu *= 2.0;
                    accepted = true;
                    break;
                }
                mu *= 0.25;
            }
            if !accepted {
                break;
            }
        }

        let mut h = 0.25 * self.spacing;
        let try_move = |trial: Configuration, cfg: &mut Configuration, cur: &mut PotentialMin, evals: &mut usize| {
            *evals += 1;
            let min = self.score(&trial);
            if better(&min, cur) {
                *cfg = trial;
                *cur = min;
                true
            } else {
                false
            }
        };
        while h > h_min && evals < budget {
            let mut improved = false;
            for i in 0..self.n {
                for k in 0..2 * self.m {
                    if evals >= budget {
                        break;
                    }
                    let mut e = vec![0.0; self.m];
                    e[k / 2] = if k % 2 == 0 { 1.0 } else { -1.0 };
                    let p = self.moved(cfg.point(i), &e, h);
                    if p.as_slice() == cfg.point(i) {
                        continue;
                    }
                    let mut trial = cfg.clone();
                    trial.point_mut(i).copy_from_slice(&p);
                    improved |= try_move(trial, &mut cfg, &mut cur, &mut evals);
                }
            }
            for _ in 0..8 {
                if evals >= budget {
                    break;
                }
                let mut coords = Vec::with_capacity(cfg.coords().len());
                for x in cfg.points() {
                    let z = self.gaussian(rng);
                    let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
                    coords.extend(self.moved(x, &z, h / norm));
                }
                improved |= try_move(Configuration::from_flat(self.m, coords), &mut cfg, &mut cur, &mut evals);
            }
            // rigid translations along the axes and homotheties about the
            // centroid, each repeated with doubled size while it succeeds
            for k in 0..2 * self.m + 2 {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let mut t = h;
                while evals < budget {
                    let trial = if k < 2 * self.m {
                        let mut e = vec![0.0; self.m];
                        e[k / 2] = sign;
                        let coords: Vec<f64> = cfg.points().flat_map(|x| self.moved(x, &e, t)).collect();
                        Configuration::from_flat(self.m, coords)
                    } else {
                        self.homothety(&cfg, 1.0 + sign * (t / self.spacing).min(0.5))
                    };
                    if !try_move(trial, &mut cfg, &mut cur, &mut evals) {
                        break;
                    }
                    improved = true;
                    t = (2.0 * t).min(self.spacing);
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
        (cfg, cur, evals)
    }
}

/// Grid points added to the local model of the polish.
const MODEL_GRID_POINTS: usize = 64;

/// Proximal step for the cutting-plane model `min_j (f_j + g_j·d)`:
/// maximizes `min_j (f_j + g_j·d) − |d|²/(2μ)` through its dual over the
/// simplex, `min_λ Σ λ_j f_j + (μ/2)|Σ λ_j g_j|²`, solved by pairwise
/// Frank–Wolfe with exact line search; `d = μ Σ λ_j g_j`. Returns `d` and the predicted model gain over
/// the smallest `f_j`.
fn proximal_step(model: &[(f64, Vec<f64>)], mu: f64) -> (Vec<f64>, f64) {
    let k = model.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut gram = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            let g = dot(&model[i].1, &model[j].1);
            gram[i * k + j] = g;
            gram[j * k + i] = g;
        }
    }
    let f: Vec<f64> = model.iter().map(|m| m.0).collect();
    let fmin = f.iter().copied().fold(f64::INFINITY, f64::min);
    let start = f.iter().position(|v| *v == fmin).unwrap_or(0);
    let mut lambda = vec![0.0; k];
    lambda[start] = 1.0;
    // gl = Gλ, kept up to date; pairwise Frank–Wolfe moves mass from the
    // worst support vertex to the best vertex
    let mut gl: Vec<f64> = (0..k).map(|i| gram[i * k + start]).collect();
    let tol = 1e-14 * fmin.abs().max(f64::MIN_POSITIVE);
    for _ in 0..50 * k.max(100) {
        let grad = |i: usize, gl: &[f64]| (f[i] - fmin) + mu * gl[i];
        let (mut j, mut a) = (0, usize::MAX);
        let (mut gj, mut ga) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..k {
            let g = grad(i, &gl);
            if g < gj {
                gj = g;
                j = i;
            }
            if lambda[i] > 0.0 && g > ga {
                ga = g;
                a = i;
            }
        }
        let slope = ga - gj;
        if a == j || slope <= tol {
            break;
        }
        let curv = mu * (gram[j * k + j] - 2.0 * gram[j * k + a] + gram[a * k + a]);
        let gamma = if curv > 0.0 { (slope / curv).min(lambda[a]) } else { lambda[a] };
        lambda[j] += gamma;
        lambda[a] -= gamma;
        if lambda[a] < 1e-300 {
            lambda[a] = 0.0;
        }
        for i in 0..k {
            gl[i] += gamma * (gram[i * k + j] - gram[i * k + a]);
        }
    }
    let n = model[0].1.len();
    let mut d = vec![0.0; n];
    for (l, (_, g)) in lambda.iter().zip(model) {
        if *l != 0.0 {
            for (dc, gc) in d.iter_mut().zip(g) {
                *dc += mu * l * gc;
            }
        }
    }
    let predicted = model
        .iter()
        .map(|(fj, g)| fj + dot(g, &d))
        .fold(f64::INFINITY, f64::min)
        - fmin;
    (d, predicted)
}

fn argmin(vals: &[f64]) -> usize {
    let mut best = 0;
    for (j, v) in vals.iter().enumerate() {
        if *v < vals[best] {
            best = j;
        }
    }
    best
}

/// Gaps between consecutive polar angles of planar points about the origin,
/// sorted ascending; they sum to `2π`. Coincident points give zero gaps.
pub fn angular_gaps(points: &[Point]) -> Vec<f64> {
    let mut angles: Vec<f64> = points.iter().map(|p| angle_of(p[0], p[1])).collect();
    angles.sort_by(f64::total_cmp);
    let n = angles.len();
    let mut gaps: Vec<f64> = (0..n)
        .map(|i| {
            if i + 1 < n {
                angles[i + 1] - angles[i]
            } else {
                angles[0] + std::f64::consts::TAU - angles[i]
            }
        })
        .collect();
    gaps.sort_by(f64::total_cmp);
    gaps
}

/// Best-found `N`-point configuration for `M^s_N(A)` with the given strategy.
///
/// Restarts run in parallel from seeds [`derive_seed`]`(opts.seed, r)`; the
/// result is the maximum by exact value, ties broken by the lexicographically
/// smallest sorted configuration, so it does not depend on thread count.
pub fn solve(set: &SetDescriptor, n: usize, s: f64, strategy: Strategy, opts: &SolveOptions) -> Result<SolveReport> {
    if n == 0 {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument(format!("s must be positive, got {s}")));
    }
    if let Some(w) = &opts.warm_start {
        if w.len() != n || w.dim() != set.ambient_dim() {
            return Err(Error::InvalidArgument("warm start does not match N and the set".into()));
        }
    }
    let grid_n = opts.surrogate_grid.unwrap_or_else(|| (64 * n).max(1024));
    let solver = Solver {
        set,
        n,
        s,
        m: set.ambient_dim(),
        spacing: set.spacing(n),
        opts,
        grid: set.sample_points(grid_n).concat(),
        inner: InnerMinimizer::new(set, s, n, opts.inner.clone()),
        strategy,
    };
    let runs: Vec<Run> = (0..opts.restarts.max(1)).into_par_iter().map(|r| solver.run(r)).collect();
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if beats(run.min.value, &run.config, runs[best].min.value, &runs[best].config) {
            best = i;
        }
    }
    let iterations = runs.iter().map(|r| r.iterations).sum();
    let restart_values = runs.iter().map(|r| r.min.value).collect();
    let run = &runs[best];
    Ok(SolveReport {
        config: run.config.clone(),
        value: run.min.value,
        witness: run.min.witness.clone(),
        strategy: strategy.name().to_string(),
        seed: opts.seed,
        iterations,
        restarts: runs.len(),
        converged: run.converged,
        restart_values,
        grid_value: run.min.grid_value,
        grid_size: run.min.grid_size,
    })
}
