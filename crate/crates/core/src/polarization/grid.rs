//! Maximin over a finite grid: exhaustive oracle and grid-restricted local
//! search. Both sum kernel values in sorted index order, so equal multisets
//! give bitwise equal values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{derive_seed, lex_cmp, SolveOptions, SolveReport, Strategy};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::geometry::Point;
use crate::riesz::{dist2, kernel, Configuration};

/// Largest grid accepted by [`oracle_solve`].
pub const ORACLE_MAX_GRID: usize = 64;
/// Largest configuration size accepted by [`oracle_solve`].
pub const ORACLE_MAX_N: usize = 4;

struct Table {
    g: usize,
    /// `k[y·g + x] = |y − x|^{−s}`, `+∞` on coincidence.
    k: Vec<f64>,
}

impl Table {
    fn new(grid: &[Point], s: f64) -> Self {
        let g = grid.len();
        let mut k = vec![0.0; g * g];
        for y in 0..g {
            for x in 0..g {
                let d2 = dist2(&grid[y], &grid[x]);
                k[y * g + x] = if d2 == 0.0 { f64::INFINITY } else { kernel(d2, s) };
            }
        }
        Table { g, k }
    }

    /// Min over the grid of the potential of a sorted index multiset, with
    /// the first minimizing grid index.
    fn value(&self, idx: &[usize]) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for y in 0..self.g {
            let row = &self.k[y * self.g..(y + 1) * self.g];
            let mut acc = 0.0;
            for &x in idx {
                acc += row[x];
            }
            if acc < best.0 {
                best = (acc, y);
            }
        }
        best
    }
}

fn check_grid(grid: &[Point], n: usize, s: f64) -> Result<usize> {
    if n == 0 {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("s must be positive, got {s}")));
    }
    let m = grid
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidArgument("empty grid".into()))?;
    if m == 0 || grid.iter().any(|p| p.len() != m) {
        return Err(Error::InvalidArgument("grid points must share one positive dimension".into()));
    }
    Ok(m)
}

fn grid_report(
    grid: &[Point],
    idx: &[usize],
    value: f64,
    witness: usize,
    strategy: &str,
    seed: u64,
    iterations: usize,
    restart_values: Vec<ExtReal>,
) -> SolveReport {
    let pts: Vec<Point> = idx.iter().map(|&i| grid[i].clone()).collect();
    SolveReport {
        config: Configuration::from_points(grid[0].len(), &pts),
        value: ExtReal::from(value),
        witness: grid[witness].clone(),
        strategy: strategy.to_string(),
        seed,
        iterations,
        restarts: restart_values.len(),
        converged: true,
        restart_values,
        grid_value: ExtReal::from(value),
        grid_size: grid.len(),
    }
}

fn sorted_points(grid: &[Point], idx: &[usize]) -> Vec<Point> {
    let mut pts: Vec<Point> = idx.iter().map(|&i| grid[i].clone()).collect();
    pts.sort_by(|a, b| lex_cmp(a, b));
    pts
}

/// Whether `(va, a)` beats `(vb, b)`: larger value, then lexicographically
/// smaller sorted point list.
fn beats(grid: &[Point], va: f64, a: &[usize], vb: f64, b: &[usize]) -> bool {
    match va.total_cmp(&vb) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => {
            let (pa, pb) = (sorted_points(grid, a), sorted_points(grid, b));
            pa.iter()
                .zip(&pb)
                .map(|(x, y)| lex_cmp(x, y))
                .find(|o| o.is_ne())
                .is_some_and(|o| o.is_lt())
        }
    }
}

/// Exact maximin over all `N`-point multisets of a grid, with the minimum
/// also taken over the grid.
///
/// Evaluation points that coincide with a configuration point give `+∞`;
/// the value is `+∞` only if every grid point does. Guarded to
/// `|grid| ≤ 64`, `N ≤ 4`.
pub fn oracle_solve(grid: &[Point], n: usize, s: f64) -> Result<SolveReport> {
    if grid.len() > ORACLE_MAX_GRID || n > ORACLE_MAX_N {
        return Err(Error::GuardExceeded { grid: grid.len(), n });
    }
    check_grid(grid, n, s)?;
    let table = Table::new(grid, s);
    let g = grid.len();
    let mut idx = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>, usize)> = None;
    let mut count = 0;
    loop {
        count += 1;
        let (v, w) = table.value(&idx);
        if best.as_ref().is_none_or(|b| beats(grid, v, &idx, b.0, &b.1)) {
            best = Some((v, idx.clone(), w));
        }
        // next nondecreasing index tuple
        let mut k = n;
        while k > 0 && idx[k - 1] == g - 1 {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        idx[k - 1] += 1;
        let fill = idx[k - 1];
        for slot in &mut idx[k..] {
            *slot = fill;
        }
    }
    let (v, idx, w) = best.expect("grid is nonempty");
    Ok(grid_report(grid, &idx, v, w, "oracle", 0, count, vec![ExtReal::from(v)]))
}

/// Pair moves are tried only while one sweep stays below this many
/// evaluations.
const PAIR_MOVE_LIMIT: usize = 250_000;

/// Steepest single-point exchange to a local maximum, falling back to
/// moving two points at once when no single move helps (ties between
/// witnesses block single moves at symmetric configurations); returns
/// sweeps.
fn local_search(table: &Table, idx: &mut Vec<usize>) -> usize {
    let n = idx.len();
    let g = table.g;
    let pairs = n * n.saturating_sub(1) / 2 * g * g <= PAIR_MOVE_LIMIT;
    let mut cur = table.value(idx).0;
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let mut best: Option<(f64, Vec<usize>)> = None;
        let consider = |trial: &mut Vec<usize>, best: &mut Option<(f64, Vec<usize>)>| {
            trial.sort_unstable();
            let v = table.value(trial).0;
            if v > cur && best.as_ref().is_none_or(|b| v > b.0) {
                *best = Some((v, trial.clone()));
            }
        };
        for i in 0..n {
            for h in 0..g {
                if h == idx[i] {
                    continue;
                }
                let mut trial = idx.clone();
                trial[i] = h;
                consider(&mut trial, &mut best);
            }
        }
        if best.is_none() && pairs {
            for i in 0..n {
                for j in i + 1..n {
                    for hi in 0..g {
                        for hj in 0..g {
                            let mut trial = idx.clone();
                            trial[i] = hi;
                            trial[j] = hj;
                            consider(&mut trial, &mut best);
                        }
                    }
                }
            }
        }
        match best {
            Some((v, trial)) => {
                *idx = trial;
                cur = v;
            }
            None => return sweeps,
        }
    }
}

/// Metropolis walk over single-point moves, keeping the best state.
fn anneal_walk(table: &Table, idx: &mut Vec<usize>, rng: &mut ChaCha8Rng, steps: usize) {
    let mut cur = table.value(idx).0;
    let mut best = (cur, idx.clone());
    let scale = if cur.is_finite() { cur } else { 1.0 };
    for k in 0..steps {
        let temp = scale * 0.05 * (1.0 - k as f64 / steps as f64) + f64::MIN_POSITIVE;
        let mut trial = idx.clone();
        let i = rng.random_range(0..trial.len());
        trial[i] = rng.random_range(0..table.g);
        trial.sort_unstable();
        let v = table.value(&trial).0;
        let accept = v >= cur || rng.random::<f64>() < ((v - cur) / temp).exp();
        if accept {
            *idx = trial;
            cur = v;
            if cur > best.0 {
                best = (cur, idx.clone());
            }
        }
    }
    *idx = best.1;
}

/// Maximin with configuration points and evaluation points both restricted
/// to a finite grid.
///
/// Every restart starts from a random grid multiset (restart 0 from evenly
/// strided grid indices) and climbs by steepest exchange;
/// `anneal` first runs a Metropolis walk. The search space is finite, so
/// `smoothed_ascent` and `exchange` coincide here.
pub fn solve_on_grid(
    grid: &[Point],
    n: usize,
    s: f64,
    strategy: Strategy,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    check_grid(grid, n, s)?;
    let table = Table::new(grid, s);
    let g = grid.len();
    let runs: Vec<(f64, Vec<usize>, usize, usize)> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, r as u64));
            let mut idx: Vec<usize> = if r == 0 {
                (0..n).map(|i| i * g / n).collect()
            } else {
                (0..n).map(|_| rng.random_range(0..g)).collect()
            };
            idx.sort_unstable();
            if strategy == Strategy::Anneal {
                anneal_walk(&table, &mut idx, &mut rng, 50 * g);
            }
            let sweeps = local_search(&table, &mut idx);
            let (v, w) = table.value(&idx);
            (v, idx, w, sweeps)
        })
        .collect();
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if beats(grid, run.0, &run.1, runs[best].0, &runs[best].1) {
            best = i;
        }
    }
    let iterations = runs.iter().map(|r| r.3).sum();
    let restart_values = runs.iter().map(|r| ExtReal::from(r.0)).collect();
    let (v, idx, w, _) = &runs[best];
    Ok(grid_report(grid, idx, *v, *w, strategy.name(), opts.seed, iterations, restart_values))
}
