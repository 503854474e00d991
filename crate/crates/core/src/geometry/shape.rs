//! Primitive shapes in their natural coordinates.
//!
//! Every primitive is a unit shape times a positive scale factor. All geometry
//! is carried out on the unit shape, and lengths/measures are rescaled at the
//! boundary, so a scaled set goes through bit-identical code paths.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::beta::beta_reg;

/// Volume of the unit ball in `R^d`, computed with the exact two-step
/// recurrence `β_d = 2π/d · β_{d-2}` from `β_0 = 1`, `β_1 = 2`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => TAU / d as f64 * unit_ball_volume(d - 2),
    }
}

/// Surface measure of the unit sphere `S^d ⊂ R^{d+1}`.
pub fn unit_sphere_area(d: usize) -> f64 {
    (d + 1) as f64 * unit_ball_volume(d + 1)
}

/// Measure of a geodesic cap on the unit sphere `S^d`, parameterized by
/// `h = sin²(φ/2)` where `φ` is the angular radius. `h = 0` is a point and
/// `h = 1` the whole sphere. For a cap centered on the sphere the chord
/// radius is `r = 2 sin(φ/2)`, so `h = r²/4`.
pub fn cap_area(d: usize, h: f64) -> f64 {
    let h = h.clamp(0.0, 1.0);
    match d {
        0 => {
            if h >= 1.0 {
                2.0
            } else {
                1.0
            }
        }
        1 => 4.0 * h.sqrt().asin(),
        2 => 4.0 * PI * h,
        _ => {
            let total = unit_sphere_area(d);
            if h <= 0.5 {
                0.5 * total * beta_reg(d as f64 / 2.0, 0.5, 4.0 * h * (1.0 - h))
            } else {
                total - cap_area(d, 1.0 - h)
            }
        }
    }
}

/// Volume of `{x ∈ B(0, 1) : x·e ≥ t}` in `R^d` for `t ∈ [-1, 1]`.
fn solid_cap_volume(d: usize, t: f64) -> f64 {
    let t = t.clamp(-1.0, 1.0);
    let beta = unit_ball_volume(d);
    if t >= 0.0 {
        0.5 * beta * beta_reg((d as f64 + 1.0) / 2.0, 0.5, (1.0 - t * t).max(0.0))
    } else {
        beta - solid_cap_volume(d, -t)
    }
}

/// Volume of `B(0, 1) ∩ B(c, r)` in `R^d` where `|c| = q`.
fn ball_ball_volume(d: usize, q: f64, r: f64) -> f64 {
    let beta = unit_ball_volume(d);
    if r <= 0.0 || q >= 1.0 + r {
        return 0.0;
    }
    if q + r <= 1.0 {
        return beta * r.powi(d as i32);
    }
    if q + 1.0 <= r {
        return beta;
    }
    // Radical plane at distance `a` from the origin along the direction of c.
    let a = (q * q + 1.0 - r * r) / (2.0 * q);
    let own = solid_cap_volume(d, a);
    let other = r.powi(d as i32) * solid_cap_volume(d, (q - a) / r);
    own + other
}

/// `∫_{[p, q]} clamp(y, −h, h) dx` with `h(x) = sqrt(r² − x²)` and
/// `−r ≤ p ≤ q ≤ r`.
fn clamped_chord_integral(y: f64, p: f64, q: f64, r: f64) -> f64 {
    let prim = |x: f64| 0.5 * (x * (r * r - x * x).max(0.0).sqrt() + r * r * (x / r).clamp(-1.0, 1.0).asin());
    let w = (r * r - y * y).max(0.0).sqrt();
    let (ip, iq) = (p.max(-w), q.min(w));
    let inner_len = (iq - ip).max(0.0);
    let inner_h = if iq > ip { prim(iq) - prim(ip) } else { 0.0 };
    y.signum() * (prim(q) - prim(p) - inner_h) + y * inner_len
}

/// Area of `[x0, x1] × [y0, y1] ∩ B(0, r)`, exact.
fn disk_rect_area(x0: f64, x1: f64, y0: f64, y1: f64, r: f64) -> f64 {
    let (p, q) = (x0.max(-r), x1.min(r));
    if q <= p || y1 <= y0 || r <= 0.0 {
        return 0.0;
    }
    (clamped_chord_integral(y1, p, q, r) - clamped_chord_integral(y0, p, q, r)).max(0.0)
}

const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

/// Volume of `[lo, hi] ∩ B(c, r)` in R³: the exact slice areas integrated
/// over the first axis, split where a slice radius meets an edge or corner
/// distance of the slice rectangle.
fn cube_ball_volume_3(lo: &[f64], hi: &[f64], c: &[f64], r: f64) -> f64 {
    let (t0, t1) = ((lo[0] - c[0]).max(-r), (hi[0] - c[0]).min(r));
    if t1 <= t0 {
        return 0.0;
    }
    let (ax, bx, ay, by) = (lo[1] - c[1], hi[1] - c[1], lo[2] - c[2], hi[2] - c[2]);
    let mut cuts = vec![t0, t1, 0.0];
    for u in [ax.abs(), bx.abs()] {
        for v in [0.0, ay.abs(), by.abs()] {
            let rho2 = u * u + v * v;
            cuts.push((r * r - rho2).max(0.0).sqrt());
            cuts.push(-(r * r - rho2).max(0.0).sqrt());
        }
    }
    for v in [ay.abs(), by.abs()] {
        cuts.push((r * r - v * v).max(0.0).sqrt());
        cuts.push(-(r * r - v * v).max(0.0).sqrt());
    }
    cuts.retain(|t| *t >= t0 && *t <= t1);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let slice = |t: f64| disk_rect_area(ax, bx, ay, by, (r * r - t * t).max(0.0).sqrt());
    let mut total = 0.0;
    const PANELS: usize = 4;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = b - a;
        if len <= 0.0 {
            continue;
        }
        let h = 1.0 / PANELS as f64;
        for k in 0..PANELS {
            for (x, wt) in GL8 {
                // smoothstep substitution tames the square-root ends
                let u = (k as f64 + 0.5 * (x + 1.0)) * h;
                let t = a + len * u * u * (3.0 - 2.0 * u);
                total += wt * 0.5 * h * 6.0 * len * u * (1.0 - u) * slice(t);
            }
        }
    }
    total
}

/// Volume of `[lo, hi] ∩ B(c, sqrt(r2))`: exact in the plane, sliced
/// quadrature in R³, and bisection of the box clipped to the ball's
/// bounding box above.
fn box_ball_volume(lo: &[f64], hi: &[f64], c: &[f64], r2: f64, depth: usize) -> f64 {
    let d = lo.len();
    let r = r2.sqrt();
    match d {
        1 => return overlap(c[0] - r, c[0] + r, lo[0], hi[0]),
        2 => return disk_rect_area(lo[0] - c[0], hi[0] - c[0], lo[1] - c[1], hi[1] - c[1], r),
        3 => return cube_ball_volume_3(lo, hi, c, r),
        _ => {}
    }
    let lo: Vec<f64> = (0..d).map(|k| lo[k].max(c[k] - r)).collect();
    let hi: Vec<f64> = (0..d).map(|k| hi[k].min(c[k] + r)).collect();
    if (0..d).any(|k| hi[k] <= lo[k]) {
        return 0.0;
    }
    bisect_ball_volume(&lo, &hi, c, r2, depth)
}

fn bisect_ball_volume(lo: &[f64], hi: &[f64], c: &[f64], r2: f64, depth: usize) -> f64 {
    let d = lo.len();
    let mut near = 0.0;
    let mut far = 0.0;
    let mut ball_inside = true;
    let r = r2.sqrt();
    for k in 0..d {
        let nearest = c[k].clamp(lo[k], hi[k]);
        near += (c[k] - nearest).powi(2);
        let farthest = if (c[k] - lo[k]).abs() > (c[k] - hi[k]).abs() {
            lo[k]
        } else {
            hi[k]
        };
        far += (c[k] - farthest).powi(2);
        if c[k] - r < lo[k] || c[k] + r > hi[k] {
            ball_inside = false;
        }
    }
    let volume: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
    if near > r2 {
        return 0.0;
    }
    if far <= r2 {
        return volume;
    }
    if ball_inside {
        return unit_ball_volume(d) * r.powi(d as i32);
    }
    if depth == 0 {
        // corners plus midpoint
        let mut inside = 0usize;
        let total = (1usize << d) + 1;
        for mask in 0..(1usize << d) {
            let dist2: f64 = (0..d)
                .map(|k| {
                    let x = if mask >> k & 1 == 1 { hi[k] } else { lo[k] };
                    (x - c[k]).powi(2)
                })
                .sum();
            if dist2 <= r2 {
                inside += 1;
            }
        }
        let mid2: f64 = (0..d).map(|k| (0.5 * (lo[k] + hi[k]) - c[k]).powi(2)).sum();
        if mid2 <= r2 {
            inside += 1;
        }
        return volume * inside as f64 / total as f64;
    }
    let mut sum = 0.0;
    let mut a = vec![0.0; d];
    let mut b = vec![0.0; d];
    for mask in 0..(1usize << d) {
        for k in 0..d {
            let mid = 0.5 * (lo[k] + hi[k]);
            if mask >> k & 1 == 1 {
                a[k] = mid;
                b[k] = hi[k];
            } else {
                a[k] = lo[k];
                b[k] = mid;
            }
        }
        sum += bisect_ball_volume(&a, &b, c, r2, depth - 1);
    }
    sum
}

/// Overlap length of `[a, b]` with `[lo, hi]`.
pub(crate) fn overlap(a: f64, b: f64, lo: f64, hi: f64) -> f64 {
    (b.min(hi) - a.max(lo)).max(0.0)
}

/// Overlap of the angular interval `[a, b]` (length ≤ 2π) with `[0, extent]`
/// on the circle.
pub(crate) fn angular_overlap(a: f64, b: f64, extent: f64) -> f64 {
    (-2..=2)
        .map(|k| {
            let shift = TAU * k as f64;
            overlap(a + shift, b + shift, 0.0, extent)
        })
        .sum()
}

/// Angle of a planar vector in `[0, 2π)`; the origin maps to 0.
pub(crate) fn angle_of(x: f64, y: f64) -> f64 {
    if x == 0.0 && y == 0.0 {
        return 0.0;
    }
    let a = y.atan2(x);
    if a < 0.0 {
        let w = a + TAU;
        if w >= TAU {
            0.0
        } else {
            w
        }
    } else {
        a
    }
}

/// Half-width of the angular window `{θ : |ρu(θ) - c| ≤ r}` on a circle of
/// radius `ρ` when `|c| = q`. Returns `None` for an empty window and
/// `Some(π)` for the whole circle.
pub(crate) fn circle_window(rho: f64, q: f64, r: f64) -> Option<f64> {
    if r < 0.0 {
        return None;
    }
    if q == 0.0 {
        return if r >= rho { Some(PI) } else { None };
    }
    // sin²(α/2) = (r² − (q−ρ)²) / (4ρq), stable for small windows.
    let gap = q - rho;
    let num = (r - gap) * (r + gap);
    if num < 0.0 {
        return None;
    }
    let h = num / (4.0 * rho * q);
    if h >= 1.0 {
        return Some(PI);
    }
    Some(2.0 * h.sqrt().asin())
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Golden-ratio generalization used by the Kronecker lattices: the positive
/// root of `x^{k+1} = x + 1`.
fn kronecker_alphas(k: usize) -> Vec<f64> {
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (k as f64 + 1.0));
    }
    (1..=k).map(|j| phi.powi(-(j as i32)).fract()).collect()
}

fn kronecker_point(alphas: &[f64], i: usize) -> Vec<f64> {
    alphas
        .iter()
        .map(|a| (0.5 + a * (i as f64 + 1.0)).fract())
        .collect()
}

/// Generalized spiral on `S^2` (Rakhmanov–Saff–Zhou), `n` points.
pub(crate) fn generalized_spiral(n: usize) -> Vec<Vec<f64>> {
    if n == 1 {
        return vec![vec![0.0, 0.0, -1.0]];
    }
    let mut out = Vec::with_capacity(n);
    let mut phi = 0.0f64;
    let step = 3.6 / (n as f64).sqrt();
    for k in 0..n {
        let h = -1.0 + 2.0 * k as f64 / (n - 1) as f64;
        let h = h.clamp(-1.0, 1.0);
        let sin_theta = (1.0 - h * h).max(0.0).sqrt();
        if k == 0 || k == n - 1 {
            phi = 0.0;
        } else {
            phi = (phi + step / sin_theta) % TAU;
        }
        out.push(vec![sin_theta * phi.cos(), sin_theta * phi.sin(), h]);
    }
    out
}

/// Quasi-uniform points on `S^{d}` for `d ≥ 1`.
fn sphere_points(d: usize, n: usize) -> Vec<Vec<f64>> {
    match d {
        1 => (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        2 => generalized_spiral(n),
        _ => {
            let normal = Normal::standard();
            let alphas = kronecker_alphas(d + 1);
            (0..n)
                .map(|i| {
                    let u = kronecker_point(&alphas, i);
                    let mut v: Vec<f64> = u
                        .iter()
                        .map(|&p| normal.inverse_cdf(p.clamp(1e-12, 1.0 - 1e-12)))
                        .collect();
                    let len = norm2(&v).sqrt();
                    if len == 0.0 {
                        v = vec![0.0; d + 1];
                        v[0] = 1.0;
                    } else {
                        v.iter_mut().for_each(|x| *x /= len);
                    }
                    v
                })
                .collect()
        }
    }
}

/// Largest-remainder apportionment of `n` items by nonnegative weights.
/// Ties in the remainder go to the lower index.
pub(crate) fn apportion(n: usize, weights: &[f64]) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    if weights.is_empty() {
        return Vec::new();
    }
    if total <= 0.0 {
        let mut out = vec![0; weights.len()];
        out[0] = n;
        return out;
    }
    let quotas: Vec<f64> = weights.iter().map(|w| n as f64 * w / total).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// A unit primitive.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Unit {
    /// Unit circle in `R^2`, parameter `θ ∈ [0, 2π)`.
    Circle,
    /// Arc `{u(θ) : θ ∈ [0, extent]}` of the unit circle.
    Arc { extent: f64 },
    /// The interval `[-1/2, 1/2]`, parameter `t ∈ [0, 1]`.
    Segment,
    /// Closed unit ball in `R^d`, `d ≥ 2`.
    Ball { d: usize },
    /// `[0, 1]^d`.
    Cube { d: usize },
    /// Unit sphere `S^d ⊂ R^{d+1}`, `d ≥ 2`.
    Sphere { d: usize },
}

/// A primitive shape: a unit shape scaled by `scale`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Shape {
    pub unit: Unit,
    pub scale: f64,
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self.unit {
            Unit::Circle | Unit::Arc { .. } | Unit::Segment => 1,
            Unit::Ball { d } | Unit::Cube { d } | Unit::Sphere { d } => d,
        }
    }

    /// Dimension of the coordinate space the shape lives in.
    pub fn natural_dim(&self) -> usize {
        match self.unit {
            Unit::Circle | Unit::Arc { .. } => 2,
            Unit::Segment => 1,
            Unit::Ball { d } | Unit::Cube { d } => d,
            Unit::Sphere { d } => d + 1,
        }
    }

    pub fn is_curve(&self) -> bool {
        self.dim() == 1 && !matches!(self.unit, Unit::Cube { .. })
    }

    pub fn measure(&self) -> f64 {
        let unit = match self.unit {
            Unit::Circle => TAU,
            Unit::Arc { extent } => extent,
            Unit::Segment => 1.0,
            Unit::Ball { d } => unit_ball_volume(d),
            Unit::Cube { .. } => 1.0,
            Unit::Sphere { d } => unit_sphere_area(d),
        };
        unit * self.scale.powi(self.dim() as i32)
    }

    pub fn diameter(&self) -> f64 {
        let unit = match self.unit {
            Unit::Circle => 2.0,
            Unit::Arc { extent } => {
                if extent >= PI {
                    2.0
                } else {
                    2.0 * (extent / 2.0).sin()
                }
            }
            Unit::Segment => 1.0,
            Unit::Ball { .. } | Unit::Sphere { .. } => 2.0,
            Unit::Cube { d } => (d as f64).sqrt(),
        };
        unit * self.scale
    }

    /// Parameter range of a curve: `(lo, hi, periodic)`.
    pub fn param_range(&self) -> (f64, f64, bool) {
        match self.unit {
            Unit::Circle => (0.0, TAU, true),
            Unit::Arc { extent } => (0.0, extent, false),
            Unit::Segment => (0.0, 1.0, false),
            _ => (0.0, 0.0, false),
        }
    }

    /// Curve point at parameter `t`, in natural coordinates.
    pub fn curve_point(&self, t: f64) -> Vec<f64> {
        match self.unit {
            Unit::Circle | Unit::Arc { .. } => vec![self.scale * t.cos(), self.scale * t.sin()],
            Unit::Segment => vec![self.scale * (t - 0.5)],
            _ => unreachable!("curve_point on a non-curve"),
        }
    }

    /// Speed `|dx/dt|` of the curve parameterization.
    pub fn curve_speed(&self) -> f64 {
        self.scale
    }

    /// Parameter of the curve point nearest to `q` (natural coordinates),
    /// with the tie-break of [`Shape::project`].
    pub fn curve_param(&self, q: &[f64]) -> f64 {
        let u: Vec<f64> = q.iter().map(|x| x / self.scale).collect();
        match self.unit {
            Unit::Circle => angle_of(u[0], u[1]),
            Unit::Arc { extent } => {
                let a = angle_of(u[0], u[1]);
                if (u[0] == 0.0 && u[1] == 0.0) || a <= extent {
                    return a;
                }
                let d0 = (u[0] - 1.0).powi(2) + u[1].powi(2);
                let d1 = (u[0] - extent.cos()).powi(2) + (u[1] - extent.sin()).powi(2);
                if d1 < d0 {
                    extent
                } else {
                    0.0
                }
            }
            Unit::Segment => (u[0] + 0.5).clamp(0.0, 1.0),
            _ => unreachable!("curve_param on a non-curve"),
        }
    }

    /// Nearest point of the shape to `q` (natural coordinates).
    ///
    /// Ties go to the smallest parameter: the circle center projects to
    /// `θ = 0`, the sphere center to the first basis vector.
    pub fn project(&self, q: &[f64]) -> Vec<f64> {
        if self.is_curve() {
            return self.curve_point(self.curve_param(q));
        }
        let s = self.scale;
        match self.unit {
            Unit::Ball { .. } => {
                let r2 = norm2(q);
                if r2 <= s * s {
                    q.to_vec()
                } else {
                    let r = r2.sqrt();
                    q.iter().map(|x| x / r * s).collect()
                }
            }
            Unit::Cube { .. } => q.iter().map(|x| x.clamp(0.0, s)).collect(),
            Unit::Sphere { d } => {
                let r = norm2(q).sqrt();
                if r == 0.0 {
                    let mut p = vec![0.0; d + 1];
                    p[0] = s;
                    p
                } else {
                    q.iter().map(|x| x / r * s).collect()
                }
            }
            _ => unreachable!(),
        }
    }

    /// Projection of a tangent vector at the shape point `p` onto the tangent
    /// space (interior points of solids keep the full vector).
    pub fn tangent(&self, p: &[f64], v: &[f64]) -> Vec<f64> {
        match self.unit {
            Unit::Circle | Unit::Arc { .. } | Unit::Sphere { .. } => {
                let r2 = norm2(p);
                let dot: f64 = p.iter().zip(v).map(|(a, b)| a * b).sum();
                p.iter().zip(v).map(|(a, b)| b - dot / r2 * a).collect()
            }
            _ => v.to_vec(),
        }
    }

    /// Orthonormal search directions at the shape point `p`: the tangent
    /// space on spheres, the boundary tangent space plus the inward normal on
    /// the boundary of a ball, coordinate axes otherwise.
    pub fn search_frame(&self, p: &[f64]) -> Vec<Vec<f64>> {
        let k = self.natural_dim();
        let axes = (0..k).map(|i| {
            let mut e = vec![0.0; k];
            e[i] = 1.0;
            e
        });
        let r = norm2(p).sqrt();
        let normal: Option<Vec<f64>> = match self.unit {
            Unit::Sphere { .. } if r > 0.0 => Some(p.iter().map(|x| x / r).collect()),
            Unit::Ball { .. } if r >= self.scale * (1.0 - 1e-9) => Some(p.iter().map(|x| x / r).collect()),
            _ => None,
        };
        let Some(nu) = normal else {
            return axes.collect();
        };
        let mut frame: Vec<Vec<f64>> = vec![nu.clone()];
        for e in axes {
            let mut v = e;
            for b in &frame {
                let dot: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= dot * bi;
                }
            }
            let len = norm2(&v).sqrt();
            if len > 1e-6 {
                frame.push(v.into_iter().map(|x| x / len).collect());
            }
            if frame.len() == k {
                break;
            }
        }
        if matches!(self.unit, Unit::Ball { .. }) {
            frame[0] = nu.iter().map(|x| -x).collect();
        } else {
            frame.remove(0);
        }
        frame
    }

    /// `n` quasi-uniform points (natural coordinates) and the parameter of
    /// each point (curves) or 0.
    pub fn sample(&self, n: usize) -> Vec<Vec<f64>> {
        if n == 0 {
            return Vec::new();
        }
        let s = self.scale;
        let unit_points: Vec<Vec<f64>> = match self.unit {
            Unit::Circle | Unit::Arc { .. } | Unit::Segment => {
                return self
                    .curve_sample_params(n)
                    .into_iter()
                    .map(|t| self.curve_point(t))
                    .collect();
            }
            Unit::Sphere { d } => sphere_points(d, n),
            Unit::Cube { d } => {
                let alphas = kronecker_alphas(d);
                (0..n).map(|i| kronecker_point(&alphas, i)).collect()
            }
            Unit::Ball { d } => ball_shells(d, n),
        };
        unit_points
            .into_iter()
            .map(|p| p.into_iter().map(|x| x * s).collect())
            .collect()
    }

    /// Parameters of the curve sample: equal spacing starting at 0, closed
    /// curves without the duplicated endpoint.
    pub fn curve_sample_params(&self, n: usize) -> Vec<f64> {
        let (lo, hi, periodic) = self.param_range();
        if periodic {
            (0..n).map(|k| TAU * k as f64 / n as f64).collect()
        } else if n == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..n)
                .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
                .collect()
        }
    }

    /// Typical spacing of an `n`-point sample.
    pub fn spacing(&self, n: usize) -> f64 {
        let n = n.max(1) as f64;
        (self.measure() / n).powf(1.0 / self.dim() as f64)
    }

    /// A uniformly distributed random point (natural coordinates).
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let s = self.scale;
        let unit: Vec<f64> = match self.unit {
            Unit::Circle => {
                let t = rng.random::<f64>() * TAU;
                vec![t.cos(), t.sin()]
            }
            Unit::Arc { extent } => {
                let t = rng.random::<f64>() * extent;
                vec![t.cos(), t.sin()]
            }
            Unit::Segment => vec![rng.random::<f64>() - 0.5],
            Unit::Cube { d } => (0..d).map(|_| rng.random::<f64>()).collect(),
            Unit::Sphere { d } => random_direction(d + 1, rng),
            Unit::Ball { d } => {
                let dir = random_direction(d, rng);
                let rad = rng.random::<f64>().powf(1.0 / d as f64);
                dir.into_iter().map(|x| x * rad).collect()
            }
        };
        unit.into_iter().map(|x| x * s).collect()
    }

    /// `𝓗_d(B(c, r) ∩ shape)` where `c` is given in natural coordinates and
    /// `perp2` is the squared distance of the true center from the natural
    /// coordinate subspace.
    pub fn ball_measure(&self, c: &[f64], perp2: f64, r: f64) -> f64 {
        let s = self.scale;
        let r2 = r * r - perp2;
        if r2 < 0.0 {
            return 0.0;
        }
        let rr = r2.sqrt() / s;
        let u: Vec<f64> = c.iter().map(|x| x / s).collect();
        let unit_measure = match self.unit {
            Unit::Circle => match circle_window(1.0, norm2(&u).sqrt(), rr) {
                Some(alpha) => 2.0 * alpha,
                None => 0.0,
            },
            Unit::Arc { extent } => match circle_window(1.0, norm2(&u).sqrt(), rr) {
                Some(alpha) if alpha >= PI => extent,
                Some(alpha) => {
                    let mid = angle_of(u[0], u[1]);
                    angular_overlap(mid - alpha, mid + alpha, extent)
                }
                None => 0.0,
            },
            Unit::Segment => overlap(u[0] - rr, u[0] + rr, -0.5, 0.5),
            Unit::Sphere { d } => {
                let q = norm2(&u).sqrt();
                if q == 0.0 {
                    if rr >= 1.0 {
                        unit_sphere_area(d)
                    } else {
                        0.0
                    }
                } else {
                    let gap = q - 1.0;
                    let num = (rr - gap) * (rr + gap);
                    if num < 0.0 {
                        0.0
                    } else {
                        cap_area(d, num / (4.0 * q))
                    }
                }
            }
            Unit::Ball { d } => ball_ball_volume(d, norm2(&u).sqrt(), rr),
            Unit::Cube { d } => {
                let depth = (18 / d).max(2);
                box_ball_volume(&vec![0.0; d], &vec![1.0; d], &u, rr * rr, depth)
            }
        };
        unit_measure * s.powi(self.dim() as i32)
    }

    /// Scalar coordinate used for band cells: curve parameter, height for
    /// spheres, radius for balls, first coordinate for cubes.
    pub fn band_coordinate(&self, p: &[f64]) -> f64 {
        if self.is_curve() {
            return self.curve_param(p);
        }
        match self.unit {
            Unit::Sphere { d } => p[d] / self.scale,
            Unit::Ball { .. } => norm2(p).sqrt() / self.scale,
            Unit::Cube { .. } => p[0] / self.scale,
            _ => unreachable!(),
        }
    }

    /// Range of the band coordinate: `(lo, hi, periodic)`.
    pub fn band_range(&self) -> (f64, f64, bool) {
        if self.is_curve() {
            return self.param_range();
        }
        match self.unit {
            Unit::Sphere { .. } => (-1.0, 1.0, false),
            Unit::Ball { .. } | Unit::Cube { .. } => (0.0, 1.0, false),
            _ => unreachable!(),
        }
    }

    /// Measure of `{p : lo ≤ band_coordinate(p) ≤ hi}`.
    pub fn band_measure(&self, lo: f64, hi: f64) -> f64 {
        let sd = self.scale.powi(self.dim() as i32);
        let unit = match self.unit {
            Unit::Circle => (hi - lo).clamp(0.0, TAU),
            Unit::Arc { extent } => angular_overlap(lo, hi, extent),
            Unit::Segment => overlap(lo, hi, 0.0, 1.0),
            Unit::Sphere { d } => {
                // area below height z is the cap around the south pole
                let below = |z: f64| cap_area(d, (1.0 + z.clamp(-1.0, 1.0)) / 2.0);
                (below(hi) - below(lo)).max(0.0)
            }
            Unit::Ball { d } => {
                let a = lo.clamp(0.0, 1.0);
                let b = hi.clamp(0.0, 1.0);
                unit_ball_volume(d) * (b.powi(d as i32) - a.powi(d as i32)).max(0.0)
            }
            Unit::Cube { .. } => overlap(lo, hi, 0.0, 1.0),
        };
        unit * sd
    }

    /// Band boundaries splitting the shape into `k` cells of equal measure.
    pub fn equal_bands(&self, k: usize) -> Vec<f64> {
        let (lo, hi, _) = self.band_range();
        match self.unit {
            Unit::Sphere { d } if d == 2 => (0..=k)
                .map(|j| lo + (hi - lo) * j as f64 / k as f64)
                .collect(),
            Unit::Sphere { d } => {
                // invert the height distribution by bisection
                let total = unit_sphere_area(d);
                (0..=k)
                    .map(|j| {
                        if j == 0 {
                            return -1.0;
                        }
                        if j == k {
                            return 1.0;
                        }
                        let target = total * j as f64 / k as f64;
                        let (mut a, mut b) = (-1.0f64, 1.0f64);
                        for _ in 0..200 {
                            let m = 0.5 * (a + b);
                            if cap_area(d, (1.0 + m) / 2.0) < target {
                                a = m;
                            } else {
                                b = m;
                            }
                        }
                        0.5 * (a + b)
                    })
                    .collect()
            }
            Unit::Ball { d } => (0..=k)
                .map(|j| (j as f64 / k as f64).powf(1.0 / d as f64))
                .collect(),
            _ => (0..=k)
                .map(|j| lo + (hi - lo) * j as f64 / k as f64)
                .collect(),
        }
    }
}

fn random_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let r = norm2(&v).sqrt();
        if r > 1e-12 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

/// Concentric shells of the unit ball, including the boundary sphere.
fn ball_shells(d: usize, n: usize) -> Vec<Vec<f64>> {
    let shells = ((n as f64 / unit_ball_volume(d)).powf(1.0 / d as f64).round() as usize).max(1);
    let weights: Vec<f64> = (1..=shells).map(|j| (j as f64).powi(d as i32 - 1)).collect();
    let counts = apportion(n, &weights);
    let mut out = Vec::with_capacity(n);
    // outermost shell first so small samples still see the boundary
    for j in (1..=shells).rev() {
        let radius = j as f64 / shells as f64;
        for p in sphere_points(d - 1, counts[j - 1]) {
            out.push(p.into_iter().map(|x| x * radius).collect());
        }
    }
    out
}
