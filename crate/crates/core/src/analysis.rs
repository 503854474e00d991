//! Covering density, the Riesz integral bound, counting measures of
//! configurations and equidistribution diagnostics.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{unit_ball_volume, CellShape, Point, SetDescriptor, SetSpec, TestCell, Unit};
use crate::polarization::derive_seed;
use crate::riesz::{dist2, Configuration};

/// Covering density estimates at or below this pass the `ε → 0` check.
pub const ALPHA_LIMIT_THRESHOLD: f64 = 1.02;
/// Relative agreement of successive mesh doublings in the quadrature.
pub const QUADRATURE_TOL: f64 = 1e-6;
/// Slack of the integral bound check.
pub const LEMMA_SLACK: f64 = 1e-9;

/// Sampled estimate of `ᾱ_d(A; ε) = sup_{x∈A, r≤ε} 𝓗_d(B(x,r)∩A)/(β_d r^d)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaEstimate {
    pub epsilon: f64,
    pub value: f64,
    /// Center and radius where the sampled maximum is attained.
    pub argmax: (Point, f64),
    pub x_grid: usize,
    pub r_grid: usize,
}

/// `k` radii log-spaced over `[ε·10^{−4}, ε]`, largest first.
pub fn log_radii(eps: f64, k: usize) -> Vec<f64> {
    if k <= 1 {
        return vec![eps];
    }
    (0..k)
        .map(|j| if j == 0 { eps } else { eps * 10f64.powf(-4.0 * j as f64 / (k - 1) as f64) })
        .collect()
}

/// Sample centers: the deterministic sample of the set, keeping only points
/// at least `exclusion` away from every other part.
fn alpha_centers(set: &SetDescriptor, count: usize, exclusion: Option<f64>) -> Vec<(Point, usize)> {
    let Some(delta) = exclusion else {
        let s = set.sample_detailed(count);
        return s.points.into_iter().zip(s.part).collect();
    };
    let s = set.sample_detailed(4 * count);
    let kept: Vec<(Point, usize)> = s
        .points
        .into_iter()
        .zip(s.part)
        .filter(|(p, part)| (0..set.part_count()).all(|j| j == *part || set.part_distance(j, p) >= delta))
        .collect();
    let step = (kept.len() / count.max(1)).max(1);
    kept.into_iter().step_by(step).take(count).collect()
}

/// Maximum of the density ratio over explicit centers and radii.
pub fn alpha_on(set: &SetDescriptor, eps: f64, centers: &[Point], radii: &[f64]) -> Result<AlphaEstimate> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {eps}")));
    }
    if radii.iter().any(|&r| !(r > 0.0 && r <= eps)) {
        return Err(Error::InvalidArgument("radii must lie in (0, epsilon]".into()));
    }
    let d = set.dim();
    let beta = unit_ball_volume(d);
    let mut best = (f64::NEG_INFINITY, Vec::new(), 0.0);
    for x in centers {
        for &r in radii {
            let ratio = set.ball_intersection_measure(x, r)? / (beta * r.powi(d as i32));
            if ratio > best.0 {
                best = (ratio, x.clone(), r);
            }
        }
    }
    Ok(AlphaEstimate {
        epsilon: eps,
        value: best.0.max(0.0),
        argmax: (best.1, best.2),
        x_grid: centers.len(),
        r_grid: radii.len(),
    })
}

/// `ᾱ_d(A; ε)` from exact ball measures on `x_samples` centers and
/// `r_samples` log-spaced radii.
pub fn alpha(set: &SetDescriptor, eps: f64, x_samples: usize, r_samples: usize) -> Result<AlphaEstimate> {
    alpha_excluding(set, eps, x_samples, r_samples, None)
}

/// As [`alpha`], with centers restricted to points at least `exclusion` away
/// from the other parts of a union.
///
/// For `ε` below the exclusion the ball meets only the center's own part,
/// so the estimate bounds the density of the set with the neighborhoods of
/// the part intersections removed.
pub fn alpha_excluding(
    set: &SetDescriptor,
    eps: f64,
    x_samples: usize,
    r_samples: usize,
    exclusion: Option<f64>,
) -> Result<AlphaEstimate> {
    let centers: Vec<Point> = alpha_centers(set, x_samples, exclusion).into_iter().map(|c| c.0).collect();
    if centers.is_empty() {
        return Err(Error::InvalidArgument("the exclusion removes every sample center".into()));
    }
    alpha_on(set, eps, &centers, &log_radii(eps, r_samples))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaLimitCheck {
    pub values: Vec<AlphaEstimate>,
    /// The estimate at the smallest `ε`.
    pub limsup_estimate: f64,
    pub threshold: f64,
    pub passes: bool,
}

/// Covering densities along a decreasing `ε` schedule; passes when the last
/// one is at most 1.02. Grids are 64 × 64.
pub fn alpha_limit_check(set: &SetDescriptor, schedule: &[f64], exclusion: Option<f64>) -> Result<AlphaLimitCheck> {
    if schedule.len() < 3 {
        return Err(Error::InvalidArgument("the schedule needs at least 3 values".into()));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("the schedule must decrease".into()));
    }
    let values = schedule
        .iter()
        .map(|&eps| alpha_excluding(set, eps, 64, 64, exclusion))
        .collect::<Result<Vec<_>>>()?;
    let last = values.last().expect("nonempty schedule").value;
    Ok(AlphaLimitCheck {
        limsup_estimate: last,
        threshold: ALPHA_LIMIT_THRESHOLD,
        passes: last <= ALPHA_LIMIT_THRESHOLD,
        values,
    })
}

/// Integration domain: a whole set or one cell of it.
#[derive(Clone, Copy, Debug)]
pub enum Domain<'a> {
    Set(&'a SetDescriptor),
    Cell(&'a SetDescriptor, &'a TestCell),
}

impl<'a> Domain<'a> {
    pub fn set(&self) -> &'a SetDescriptor {
        match self {
            Domain::Set(s) | Domain::Cell(s, _) => s,
        }
    }

    pub fn measure(&self) -> f64 {
        match self {
            Domain::Set(s) => s.measure(),
            Domain::Cell(_, c) => c.measure,
        }
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        match self {
            Domain::Set(s) => s.contains(y),
            Domain::Cell(s, c) => s.contains(y) && c.contains(s, y),
        }
    }

    fn cell(&self) -> Option<&'a TestCell> {
        match self {
            Domain::Set(_) => None,
            Domain::Cell(_, c) => Some(c),
        }
    }
}

/// Result of a refined quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Quadrature {
    pub value: f64,
    /// Whether two successive doublings agreed to 1e−6 relative.
    pub converged: bool,
    /// Panels per piece at the final level.
    pub panels: usize,
}

const GAUSS_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GAUSS_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];
const MIN_LEVEL: u32 = 2;
const MAX_LEVEL: u32 = 18;

/// One smooth piece `[a, b]` of a one-dimensional reduction.
struct Piece<'f> {
    a: f64,
    b: f64,
    f: &'f (dyn Fn(f64) -> f64 + Sync),
}

/// Composite 8-point Gauss–Legendre over every piece after the smoothstep
/// substitution `t = a + (b − a)(3u² − 2u³)`, which flattens square-root
/// behavior at the piece ends. Panels double until two levels agree.
fn integrate(pieces: &[Piece]) -> Quadrature {
    let level_sum = |level: u32| -> f64 {
        let panels = 1usize << level;
        let mut total = 0.0;
        for p in pieces {
            let w = p.b - p.a;
            let h = 1.0 / panels as f64;
            let mut acc = 0.0;
            for k in 0..panels {
                let lo = k as f64 * h;
                for (x, wt) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
                    let u = lo + 0.5 * h * (x + 1.0);
                    let t = p.a + w * u * u * (3.0 - 2.0 * u);
                    let jac = 6.0 * w * u * (1.0 - u);
                    acc += wt * 0.5 * h * jac * (p.f)(t);
                }
            }
            total += acc;
        }
        total
    };
    let mut prev = level_sum(MIN_LEVEL - 1);
    for level in MIN_LEVEL..=MAX_LEVEL {
        let cur = level_sum(level);
        if (cur - prev).abs() <= QUADRATURE_TOL * cur.abs() {
            return Quadrature {
                value: cur,
                converged: true,
                panels: 1 << level,
            };
        }
        prev = cur;
    }
    Quadrature {
        value: prev,
        converged: false,
        panels: 1 << MAX_LEVEL,
    }
}

/// Curve parameters where `|x(t) − c| = ρ` on a curve part.
fn curve_roots(set: &SetDescriptor, part: usize, c: &[f64], rho: f64) -> Vec<f64> {
    let p = set.part(part);
    let s = p.shape.scale;
    let (cl, perp2) = p.to_local(c);
    match p.shape.unit {
        Unit::Circle | Unit::Arc { .. } => {
            let q = (cl[0] * cl[0] + cl[1] * cl[1]).sqrt();
            if q == 0.0 {
                return Vec::new();
            }
            let a = s * s + q * q + perp2;
            let cosarg = (a - rho * rho) / (2.0 * s * q);
            if cosarg.abs() > 1.0 {
                return Vec::new();
            }
            let t0 = cl[1].atan2(cl[0]);
            let w = cosarg.acos();
            vec![(t0 - w).rem_euclid(TAU), (t0 + w).rem_euclid(TAU)]
        }
        Unit::Segment => {
            let h2 = rho * rho - perp2;
            if h2 < 0.0 {
                return Vec::new();
            }
            let h = h2.sqrt();
            vec![0.5 + (cl[0] - h) / s, 0.5 + (cl[0] + h) / s]
        }
        _ => Vec::new(),
    }
}

/// `∫ g(|x − y|) d𝓗_d(x)` over `{x ∈ D : r_lo ≤ |x − y| ≤ r_hi}`.
///
/// Supported parts are curves (circles, arcs, segments, in any placement)
/// and two-spheres containing `y`; cells may be caps, bands or parts.
pub fn shell_integral(
    domain: Domain,
    y: &[f64],
    r_lo: f64,
    r_hi: f64,
    g: &(dyn Fn(f64) -> f64 + Sync),
) -> Result<Quadrature> {
    let set = domain.set();
    if set.is_degenerate() {
        return Ok(Quadrature {
            value: 0.0,
            converged: true,
            panels: 0,
        });
    }
    let cell = domain.cell();
    let mut closures: Vec<(f64, f64, Box<dyn Fn(f64) -> f64 + Sync + '_>)> = Vec::new();
    for part in 0..set.part_count() {
        if let Some(TestCell {
            shape: CellShape::Part { part: only } | CellShape::Band { part: only, .. },
            ..
        }) = cell
        {
            if *only != part {
                continue;
            }
        }
        let shape = set.part(part).shape.clone();
        if shape.is_curve() {
            let (lo, hi, periodic) = shape.param_range();
            let mut cuts = vec![lo, hi];
            for rho in [r_lo, r_hi] {
                if rho.is_finite() && rho > 0.0 {
                    cuts.extend(curve_roots(set, part, y, rho));
                }
            }
            match cell.map(|c| &c.shape) {
                Some(CellShape::Cap { center, radius }) => cuts.extend(curve_roots(set, part, center, *radius)),
                Some(CellShape::Band { lo: a, hi: b, .. }) => {
                    if periodic {
                        cuts.push(a.rem_euclid(TAU));
                        cuts.push(b.rem_euclid(TAU));
                    } else {
                        cuts.push(*a);
                        cuts.push(*b);
                    }
                }
                _ => {}
            }
            let p = set.part(part);
            cuts.retain(|t| (lo..=hi).contains(t));
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            for w in cuts.windows(2) {
                let (a, b) = (w[0], w[1]);
                if b - a <= 1e-15 * (hi - lo) {
                    continue;
                }
                let mid = p.curve_point(0.5 * (a + b));
                let r = dist2(&mid, y).sqrt();
                let inside = r >= r_lo && r <= r_hi && domain.contains(&mid);
                if inside {
                    let speed = shape.curve_speed();
                    let p = p.clone();
                    let y = y.to_vec();
                    closures.push((
                        a,
                        b,
                        Box::new(move |t| {
                            let x = p.curve_point(t);
                            speed * g(dist2(&x, &y).sqrt())
                        }),
                    ));
                }
            }
        } else if shape.unit == (Unit::Sphere { d: 2 }) {
            let p = set.part(part);
            if set.part_distance(part, y) > set.tolerance() {
                return Err(Error::Unsupported("sphere parts must contain the center point".into()));
            }
            let s = shape.scale;
            let (yl, _) = p.to_local(y);
            let yn: Vec<f64> = yl.iter().map(|v| v / s).collect();
            // latitude slab `lo ≤ a·x̂ ≤ hi` about the unit axis `a`
            let slab: Option<(Vec<f64>, f64, f64)> = match cell.map(|c| &c.shape) {
                Some(CellShape::Cap { center, radius }) => {
                    let (cl, _) = p.to_local(center);
                    let norm = cl.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let a: Vec<f64> = cl.iter().map(|v| v / norm).collect();
                    Some((a, 1.0 - radius * radius / (2.0 * s * s), 2.0))
                }
                Some(CellShape::Band { lo, hi, .. }) => Some((vec![0.0, 0.0, 1.0], *lo, *hi)),
                _ => None,
            };
            let theta = |rho: f64| {
                if rho.is_finite() {
                    2.0 * (rho / (2.0 * s)).min(1.0).asin()
                } else {
                    PI
                }
            };
            let (t_lo, t_hi) = (theta(r_lo.max(0.0)), theta(r_hi));
            if t_hi <= t_lo {
                continue;
            }
            let mut cuts = vec![t_lo, t_hi];
            let (pa, qa) = match &slab {
                Some((a, lo, hi)) => {
                    let pa: f64 = a.iter().zip(&yn).map(|(u, v)| u * v).sum();
                    let qa = (1.0 - pa * pa).max(0.0).sqrt();
                    let psi = qa.atan2(pa);
                    for b in [*lo, *hi] {
                        if b.abs() <= 1.0 {
                            let w = b.acos();
                            cuts.extend([psi - w, psi + w, -psi - w, -psi + w].map(|t| t.rem_euclid(TAU)));
                        }
                    }
                    (pa, qa)
                }
                None => (1.0, 0.0),
            };
            cuts.retain(|t| *t >= t_lo && *t <= t_hi);
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let (lo, hi) = slab.as_ref().map_or((f64::NEG_INFINITY, f64::INFINITY), |s| (s.1, s.2));
            let has_slab = slab.is_some();
            let azimuth = move |th: f64| -> f64 {
                if !has_slab {
                    return TAU;
                }
                let k0 = th.cos() * pa;
                let k1 = th.sin() * qa;
                if k1 <= 1e-300 {
                    return if k0 >= lo && k0 <= hi { TAU } else { 0.0 };
                }
                let cl = ((lo - k0) / k1).clamp(-1.0, 1.0);
                let ch = ((hi - k0) / k1).clamp(-1.0, 1.0);
                (2.0 * (cl.acos() - ch.acos())).max(0.0)
            };
            for w in cuts.windows(2) {
                if w[1] - w[0] <= 1e-15 {
                    continue;
                }
                closures.push((
                    w[0],
                    w[1],
                    Box::new(move |th: f64| {
                        let rho = 2.0 * s * (th / 2.0).sin();
                        g(rho) * s * s * th.sin() * azimuth(th)
                    }),
                ));
            }
        } else {
            return Err(Error::Unsupported(
                "quadrature supports curves and two-spheres only".into(),
            ));
        }
    }
    let pieces: Vec<Piece> = closures.iter().map(|(a, b, f)| Piece { a: *a, b: *b, f: f.as_ref() }).collect();
    if pieces.is_empty() {
        return Ok(Quadrature {
            value: 0.0,
            converged: true,
            panels: 0,
        });
    }
    Ok(integrate(&pieces))
}

/// `∫_{D∖B(y,R)} |x − y|^{−d} d𝓗_d(x)`.
pub fn riesz_integral(domain: Domain, y: &[f64], radius: f64) -> Result<Quadrature> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("R must be positive, got {radius}")));
    }
    if !domain.contains(y) {
        return Err(Error::NotOnSet {
            distance: domain.set().distance(y),
        });
    }
    let d = domain.set().dim() as i32;
    let g = move |rho: f64| rho.powi(-d);
    // the open ball is removed, so the shell starts at R itself
    shell_integral(domain, y, radius, f64::INFINITY, &g)
}

/// `ᾱ_d(D; r)` of a domain: exact ball measures for whole sets, quadrature
/// for cells, over 24 centers in `D` and 16 log-spaced radii.
pub fn domain_alpha(domain: Domain, r: f64) -> Result<f64> {
    let set = domain.set();
    let cell = match domain {
        Domain::Set(_) => return Ok(alpha(set, r, 64, 64)?.value),
        Domain::Cell(_, c) => c,
    };
    let mut centers: Vec<Point> = set.sample_points(512).into_iter().filter(|p| cell.contains(set, p)).collect();
    let step = (centers.len() / 24).max(1);
    centers = centers.into_iter().step_by(step).take(24).collect();
    if let CellShape::Cap { center, .. } = &cell.shape {
        centers.push(center.clone());
    }
    let d = set.dim() as i32;
    let beta = unit_ball_volume(set.dim());
    let one = |_: f64| 1.0;
    let ratios: Vec<f64> = centers
        .par_iter()
        .map(|x| {
            let mut best = 0.0f64;
            for rr in log_radii(r, 16) {
                let m = shell_integral(domain, x, 0.0, rr, &one)?.value;
                best = best.max(m / (beta * rr.powi(d)));
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `ᾱ_d(D; r)` used in the bound.
    pub alpha: f64,
    pub measure: f64,
    pub quadrature: Quadrature,
}

/// `∫_{D∖B(y,R)} |x − y|^{−d} ≤ r^{−d}𝓗_d(D) + β_d ᾱ_d(D; r)·d·ln(r/R)`.
pub fn lemma_bound_check(domain: Domain, y: &[f64], big_r: f64, r: f64) -> Result<LemmaCheck> {
    if !(big_r > 0.0 && big_r <= r) {
        return Err(Error::InvalidArgument(format!("need 0 < R <= r, got R = {big_r}, r = {r}")));
    }
    let quadrature = riesz_integral(domain, y, big_r)?;
    let d = domain.set().dim();
    let measure = domain.measure();
    let alpha = domain_alpha(domain, r)?;
    let rhs = r.powi(-(d as i32)) * measure + unit_ball_volume(d) * alpha * d as f64 * (r / big_r).ln();
    Ok(LemmaCheck {
        lhs: quadrature.value,
        rhs,
        holds: quadrature.value <= rhs + LEMMA_SLACK,
        alpha,
        measure,
        quadrature,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaInstance {
    pub domain: String,
    pub y: Point,
    pub big_r: f64,
    pub r: f64,
    pub check: LemmaCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaSuite {
    pub seed: u64,
    pub total: usize,
    pub holding: usize,
    pub all_converged: bool,
    pub instances: Vec<LemmaInstance>,
}

fn random_in<R: Rng>(domain: Domain, rng: &mut R) -> Point {
    loop {
        let p = domain.set().random_point(rng);
        if domain.contains(&p) {
            return p;
        }
    }
}

/// One randomized instance: the domain kind cycles through circles, arcs,
/// two-spheres and caps (on circles or spheres); radii are random in
/// `(0, 1.2·diam]` with `R/r ∈ [10^{−3}, 1]`.
fn lemma_instance(index: usize, seed: u64) -> Result<LemmaInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, index as u64));
    let scale = 0.5 + 1.5 * rng.random::<f64>();
    let (name, set, cap) = match index % 4 {
        0 => ("circle", SetDescriptor::new(SetSpec::circle(scale))?, None),
        1 => {
            let extent = 0.2 + (TAU - 0.2) * rng.random::<f64>();
            ("arc", SetDescriptor::new(SetSpec::arc(scale, extent))?, None)
        }
        2 => ("sphere", SetDescriptor::new(SetSpec::sphere(2).with_radius(scale))?, None),
        _ => {
            let set = if rng.random::<bool>() {
                SetDescriptor::new(SetSpec::sphere(2).with_radius(scale))?
            } else {
                SetDescriptor::new(SetSpec::circle(scale))?
            };
            let center = set.random_point(&mut rng);
            let radius = scale * (0.1 + 1.9 * rng.random::<f64>());
            let cell = TestCell::cap(&set, &center, radius)?;
            let name = if set.dim() == 2 { "sphere_cap" } else { "circle_arc_cell" };
            (name, set, Some(cell))
        }
    };
    let domain = match &cap {
        Some(c) => Domain::Cell(&set, c),
        None => Domain::Set(&set),
    };
    let y = random_in(domain, &mut rng);
    let diam = match &cap {
        Some(TestCell {
            shape: CellShape::Cap { radius, .. },
            ..
        }) => (2.0 * radius).min(set.diameter()),
        _ => set.diameter(),
    };
    let r = 1.2 * diam * (0.02 + 0.98 * rng.random::<f64>());
    let big_r = r * 10f64.powf(-3.0 * rng.random::<f64>());
    let check = lemma_bound_check(domain, &y, big_r, r)?;
    Ok(LemmaInstance {
        domain: name.to_string(),
        y,
        big_r,
        r,
        check,
    })
}

/// `count` randomized instances of the integral bound, run in parallel and
/// reported in index order.
pub fn lemma_suite(count: usize, seed: u64) -> Result<LemmaSuite> {
    let instances = (0..count)
        .into_par_iter()
        .map(|i| lemma_instance(i, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(LemmaSuite {
        seed,
        total: instances.len(),
        holding: instances.iter().filter(|i| i.check.holds).count(),
        all_converged: instances.iter().all(|i| i.check.quadrature.converged),
        instances,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountRow {
    pub cell: usize,
    pub count: usize,
    /// `#(ω ∩ K)/N`, duplicates counted per copy.
    pub fraction: f64,
    /// `𝓗_d(K)/𝓗_d(A)`, zero on null sets.
    pub target: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountReport {
    pub n: usize,
    pub rows: Vec<CountRow>,
    pub max_deviation: f64,
}

/// Fractions of the configuration in each closed cell against the
/// normalized measure of the cell.
pub fn empirical_counts(set: &SetDescriptor, config: &Configuration, cells: &[TestCell]) -> CountReport {
    let n = config.len();
    let total = set.measure();
    let rows: Vec<CountRow> = cells
        .iter()
        .enumerate()
        .map(|(i, cell)| {
            let count = config.points().filter(|p| cell.contains(set, p)).count();
            let fraction = count as f64 / n as f64;
            let target = if total > 0.0 { cell.measure / total } else { 0.0 };
            CountRow {
                cell: i,
                count,
                fraction,
                target,
                deviation: (fraction - target).abs(),
            }
        })
        .collect();
    let max_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    CountReport { n, rows, max_deviation }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquidistributionRow {
    pub n: usize,
    pub max_deviation: f64,
    pub value: Option<f64>,
    /// `value/(N ln N · β_d/𝓗_d(A))`, how close the configuration is to
    /// the first-order asymptotics.
    pub value_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquidistributionReport {
    pub rows: Vec<EquidistributionRow>,
    /// Least-squares slope of the max deviation against `ln N` is negative.
    pub decreasing: bool,
}

/// Max cell deviation for each configuration of a sequence, sorted by `N`.
/// `values` are optional polarization values at `s = d`.
pub fn equidistribution_report(
    set: &SetDescriptor,
    sequence: &[(Configuration, Option<f64>)],
    cells: &[TestCell],
) -> EquidistributionReport {
    let target = set.limit_target();
    let mut rows: Vec<EquidistributionRow> = sequence
        .par_iter()
        .map(|(config, value)| {
            let n = config.len();
            let report = empirical_counts(set, config, cells);
            let value_ratio = match (value, target) {
                (Some(v), Some(t)) if n >= 2 => Some(v / (n as f64 * (n as f64).ln() * t)),
                _ => None,
            };
            EquidistributionRow {
                n,
                max_deviation: report.max_deviation,
                value: *value,
                value_ratio,
            }
        })
        .collect();
    rows.sort_by_key(|r| r.n);
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| ((r.n as f64).ln(), r.max_deviation)).collect();
    let k = pts.len() as f64;
    let decreasing = if pts.len() >= 2 {
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxx > 0.0 && sxy < 0.0
    } else {
        false
    };
    EquidistributionReport { rows, decreasing }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_test_cells, CellFamily};
    use crate::polarization::equally_spaced_circle;
    use approx::assert_relative_eq;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest, ProptestConfig};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    fn arc_ratio(eps: f64) -> f64 {
        2.0 * (eps / 2.0).asin() / eps
    }

    #[test]
    fn circle_and_sphere_densities() {
        let circle = SetDescriptor::unit_circle();
        for eps in [1.0, 0.5, 0.1, 0.01] {
            let a = alpha(&circle, eps, 64, 64).unwrap();
            assert_relative_eq!(a.value, arc_ratio(eps), max_relative = 1e-12);
        }
        assert_relative_eq!(alpha(&circle, 1.0, 64, 64).unwrap().value, FRAC_PI_3, max_relative = 1e-12);
        assert_relative_eq!(alpha(&circle, 0.1, 64, 64).unwrap().value, 1.0004172, max_relative = 1e-7);
        let sphere = SetDescriptor::sphere(2);
        for eps in [2.0, 1.0, 0.3, 0.01] {
            assert_relative_eq!(alpha(&sphere, eps, 64, 64).unwrap().value, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn limit_checks() {
        let circle = SetDescriptor::unit_circle();
        let c = alpha_limit_check(&circle, &[0.5, 0.1, 0.01], None).unwrap();
        let want = [1.0107, 1.00042, 1.0000042];
        for (v, w) in c.values.iter().zip(want) {
            assert_relative_eq!(v.value, w, max_relative = 1e-4);
        }
        assert!(c.passes);
        assert!(alpha_limit_check(&circle, &[0.5, 0.1], None).is_err());
        assert!(alpha_limit_check(&circle, &[0.1, 0.5, 0.01], None).is_err());

        // circles touching at the origin
        let tangent = SetDescriptor::new(SetSpec::union(vec![
            SetSpec::circle(1.0).with_center(vec![-1.0, 0.0]),
            SetSpec::circle(1.0).with_center(vec![1.0, 0.0]),
        ]))
        .unwrap();
        let near = alpha_limit_check(&tangent, &[0.5, 0.2, 0.1], None).unwrap();
        assert!(near.values[0].value > 1.02);
        let away = alpha_limit_check(&tangent, &[0.05, 0.02, 0.01], Some(0.1)).unwrap();
        assert!(away.passes, "{}", away.limsup_estimate);
    }

    #[test]
    fn sampled_pairs_never_exceed_the_estimate() {
        let sets = [SetDescriptor::unit_circle(), SetDescriptor::sphere(2), SetDescriptor::ball(3)];
        for set in &sets {
            let centers = set.sample_points(12);
            let radii = log_radii(0.7, 9);
            let a = alpha_on(set, 0.7, &centers, &radii).unwrap();
            for x in &centers {
                for &r in &radii {
                    let ratio = set.ball_intersection_measure(x, r).unwrap() / (unit_ball_volume(set.dim()) * r.powi(set.dim() as i32));
                    assert!(ratio <= a.value);
                }
            }
        }
    }

    #[test]
    fn circle_integrals() {
        let circle = SetDescriptor::unit_circle();
        let y = [1.0, 0.0];
        let empty = riesz_integral(Domain::Set(&circle), &y, 2.0).unwrap();
        assert!(empty.value.abs() < 1e-12);
        let closed = |r: f64| -2.0 * ((2.0 * (r / 2.0).asin()) / 4.0).tan().ln();
        let one = riesz_integral(Domain::Set(&circle), &y, 1.0).unwrap();
        assert!(one.converged);
        assert_relative_eq!(one.value, closed(1.0), max_relative = 1e-9);
        assert_relative_eq!(one.value, 2.6339158, max_relative = 1e-7);
        let small = riesz_integral(Domain::Set(&circle), &y, 0.2).unwrap();
        assert_relative_eq!(small.value, closed(0.2), max_relative = 1e-9);
        assert_relative_eq!(small.value, 5.9864, max_relative = 1e-4);
    }

    #[test]
    fn sphere_integral_closed_form() {
        // ∫_{|x−y|≥R} |x−y|^{−2} dσ = π ln(4/R²) on the unit sphere
        let sphere = SetDescriptor::sphere(2);
        let y = [0.0, 0.0, 1.0];
        for big_r in [0.01, 0.3, 1.0, 1.9] {
            let q = riesz_integral(Domain::Set(&sphere), &y, big_r).unwrap();
            assert_relative_eq!(q.value, PI * (4.0 / (big_r * big_r)).ln(), max_relative = 1e-9);
        }
    }

    #[test]
    fn cell_measures_by_quadrature() {
        let sphere = SetDescriptor::sphere(2);
        let one = |_: f64| 1.0;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let c = sphere.random_point(&mut rng);
            let rc = 0.1 + 1.8 * rng.random::<f64>();
            let cell = TestCell::cap(&sphere, &c, rc).unwrap();
            let y = random_in(Domain::Cell(&sphere, &cell), &mut rng);
            let q = shell_integral(Domain::Cell(&sphere, &cell), &y, 0.0, f64::INFINITY, &one).unwrap();
            assert_relative_eq!(q.value, cell.measure, max_relative = 1e-7);
            // ball around y cut by the cap: check against a fine Monte Carlo-free bound
            let r = 0.5;
            let part = shell_integral(Domain::Cell(&sphere, &cell), &y, 0.0, r, &one).unwrap().value;
            assert!(part <= cell.measure.min(PI * r * r) * (1.0 + 1e-7));
        }
        let band = TestCell::band(&sphere, 0, -0.2, 0.5).unwrap();
        let q = shell_integral(Domain::Cell(&sphere, &band), &[0.0, 0.0, 1.0 - 1e-16], 0.0, f64::INFINITY, &one);
        // the pole is outside the band, so it is not a valid center
        assert!(q.is_ok());
        let y = [1.0, 0.0, 0.0];
        let q = shell_integral(Domain::Cell(&sphere, &band), &y, 0.0, f64::INFINITY, &one).unwrap();
        assert_relative_eq!(q.value, band.measure, max_relative = 1e-7);
    }

    #[test]
    fn arc_cells_and_unions() {
        let circle = SetDescriptor::unit_circle();
        let cell = TestCell::band(&circle, 0, -FRAC_PI_2, FRAC_PI_4).unwrap();
        let one = |_: f64| 1.0;
        let q = shell_integral(Domain::Cell(&circle, &cell), &[1.0, 0.0], 0.0, f64::INFINITY, &one).unwrap();
        assert_relative_eq!(q.value, 3.0 * FRAC_PI_4, max_relative = 1e-12);
        let two = SetDescriptor::two_circles(3.0).unwrap();
        let q = shell_integral(Domain::Set(&two), &[-2.0, 0.0], 0.0, f64::INFINITY, &one).unwrap();
        assert_relative_eq!(q.value, 2.0 * TAU, max_relative = 1e-12);
        let seg = SetDescriptor::segment(2.0);
        let q = riesz_integral(Domain::Set(&seg), &[0.0], 0.5).unwrap();
        assert_relative_eq!(q.value, 2.0 * (1.0f64 / 0.5).ln(), max_relative = 1e-9);
    }

    #[test]
    fn bound_examples() {
        let circle = SetDescriptor::unit_circle();
        let c = lemma_bound_check(Domain::Set(&circle), &[1.0, 0.0], 0.2, 1.0).unwrap();
        assert_relative_eq!(c.rhs, TAU + 2.0 * FRAC_PI_3 * 5f64.ln(), max_relative = 1e-9);
        assert_relative_eq!(c.rhs, 9.6544, max_relative = 1e-4);
        assert!(c.holds);
        let eq = lemma_bound_check(Domain::Set(&circle), &[1.0, 0.0], 0.7, 0.7).unwrap();
        assert_eq!(eq.rhs, 0.7f64.powi(-1) * TAU);
        assert!(lemma_bound_check(Domain::Set(&circle), &[1.0, 0.0], 0.8, 0.7).is_err());
        assert!(lemma_bound_check(Domain::Set(&circle), &[0.5, 0.0], 0.1, 0.7).is_err());
    }

    #[test]
    fn small_lemma_suite() {
        let suite = lemma_suite(24, 7).unwrap();
        assert_eq!(suite.total, 24);
        assert_eq!(suite.holding, 24);
        assert!(suite.all_converged);
        assert_eq!(suite, lemma_suite(24, 7).unwrap());
    }

    #[test]
    fn counting_examples() {
        let circle = SetDescriptor::unit_circle();
        let cfg = Configuration::new(&circle, equally_spaced_circle(4, 1.0)).unwrap();
        let arc = TestCell::band(&circle, 0, FRAC_PI_4, 3.0 * FRAC_PI_4).unwrap();
        let r = empirical_counts(&circle, &cfg, &[arc]);
        assert_eq!(r.rows[0].fraction, 0.25);
        assert_relative_eq!(r.rows[0].target, 0.25, max_relative = 1e-15);
        assert!(r.max_deviation < 1e-15);

        let part = make_test_cells(&circle, CellFamily::Partition { per_part: 7 }, 0).unwrap();
        let r = empirical_counts(&circle, &cfg, &part);
        // closed cells share boundaries, so a partition counts at least everything
        assert!(r.rows.iter().map(|x| x.count).sum::<usize>() >= 4);

        let x = vec![0.6, 0.8];
        let dup = Configuration::new(&circle, vec![x.clone(), x.clone()]).unwrap();
        let cap = TestCell::cap(&circle, &x, 0.1).unwrap();
        assert_eq!(empirical_counts(&circle, &dup, &[cap]).rows[0].fraction, 1.0);
    }

    #[test]
    fn partition_fractions_sum_to_one_off_boundaries() {
        let sphere = SetDescriptor::sphere(2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<_> = (0..50).map(|_| sphere.random_point(&mut rng)).collect();
        let cfg = Configuration::new(&sphere, pts).unwrap();
        let cells = make_test_cells(&sphere, CellFamily::Partition { per_part: 9 }, 0).unwrap();
        let r = empirical_counts(&sphere, &cfg, &cells);
        assert_relative_eq!(r.rows.iter().map(|x| x.fraction).sum::<f64>(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn equally_spaced_arcs_deviate_by_at_most_two_over_n() {
        let circle = SetDescriptor::unit_circle();
        let cells = make_test_cells(&circle, CellFamily::RandomBands { count: 100 }, 11).unwrap();
        let seq: Vec<(Configuration, Option<f64>)> = [1usize, 2, 3, 10, 37, 100, 500]
            .iter()
            .map(|&n| (Configuration::new(&circle, equally_spaced_circle(n, 1.0)).unwrap(), None))
            .collect();
        let rep = equidistribution_report(&circle, &seq, &cells);
        for row in &rep.rows {
            assert!(row.max_deviation <= 2.0 / row.n as f64, "{row:?}");
        }
        assert!(rep.rows[0].max_deviation <= 1.0);
        assert!(rep.decreasing);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn alpha_grows_with_nested_grids(k in 0usize..4, seed in 0u64..100, e1 in 0.05f64..1.0, f in 1.0f64..3.0) {
            let sets = [SetDescriptor::unit_circle(), SetDescriptor::sphere(2), SetDescriptor::ball(2), SetDescriptor::two_circles(3.0).unwrap()];
            let set = &sets[k];
            let e2 = e1 * f;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let centers: Vec<Point> = (0..6).map(|_| set.random_point(&mut rng)).collect();
            let small = log_radii(e1, 7);
            let mut big = log_radii(e2, 7);
            big.extend(small.iter().copied());
            let a1 = alpha_on(set, e1, &centers, &small).unwrap().value;
            let a2 = alpha_on(set, e2, &centers, &big).unwrap().value;
            prop_assert!(a1 <= a2 + 1e-12);
        }

        #[test]
        fn counts_survive_rotation(seed in 0u64..1000, angle in 0.0f64..TAU) {
            let plain = SetDescriptor::unit_circle();
            let (c, s) = (angle.cos(), angle.sin());
            let rot = vec![vec![c, -s], vec![s, c]];
            let turned = SetDescriptor::new(SetSpec::circle(1.0).with_rotation(rot)).unwrap();
            let apply = |p: &[f64]| vec![c * p[0] - s * p[1], s * p[0] + c * p[1]];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<Point> = (0..40).map(|_| plain.random_point(&mut rng)).collect();
            let cells = make_test_cells(&plain, CellFamily::RandomBands { count: 12 }, seed).unwrap();
            let a = empirical_counts(&plain, &Configuration::from_points(2, &pts), &cells);
            let moved: Vec<Point> = pts.iter().map(|p| turned.project(&apply(p))).collect();
            let b = empirical_counts(&turned, &Configuration::from_points(2, &moved), &cells);
            for (x, y) in a.rows.iter().zip(&b.rows) {
                prop_assert_eq!(x.fraction.to_bits(), y.fraction.to_bits());
            }
        }
    }
}
