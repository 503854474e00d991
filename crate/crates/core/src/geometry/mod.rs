//! The compact-set catalog.
//!
//! A [`SetDescriptor`] is a validated, flattened view of a [`SetSpec`]: a list
//! of primitive parts, each with a rigid placement in `R^m`. Every quantity
//! downstream (measures, projections, samples, ball intersections) is
//! computed part by part.

mod cells;
mod shape;

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cells::{make_test_cells, CellFamily, CellShape, TestCell};
pub use shape::{cap_area, unit_ball_volume, unit_sphere_area};

pub(crate) use shape::{angle_of, apportion, Shape, Unit};

/// A point in the ambient space.
pub type Point = Vec<f64>;

/// Relative tolerance for "lies on the set" checks.
pub const ON_SET_TOL: f64 = 1e-12;

/// Catalog kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetKind {
    Circle,
    Arc,
    Segment,
    Ball,
    Cube,
    Sphere,
    Union,
    /// A set measured in a dimension above its own, hence of zero measure.
    Degenerate,
}

impl SetKind {
    pub fn name(self) -> &'static str {
        match self {
            SetKind::Circle => "circle",
            SetKind::Arc => "arc",
            SetKind::Segment => "segment",
            SetKind::Ball => "ball",
            SetKind::Cube => "cube",
            SetKind::Sphere => "sphere",
            SetKind::Union => "union",
            SetKind::Degenerate => "degenerate",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "circle" => SetKind::Circle,
            "arc" => SetKind::Arc,
            "segment" => SetKind::Segment,
            "ball" => SetKind::Ball,
            "cube" => SetKind::Cube,
            "sphere" => SetKind::Sphere,
            "union" => SetKind::Union,
            "degenerate" => SetKind::Degenerate,
            _ => return None,
        })
    }
}

/// Plain description of a catalog set, as written in config files.
///
/// Unused fields are `None`. `radius` applies to circles, arcs, balls and
/// spheres (default 1); `length` to segments (default 2) and cube sides
/// (default 1); `extent` is the angular extent of an arc. `center` and
/// `rotation` place the set rigidly in `R^ambient`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSpec {
    pub kind: SetKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<SetSpec>,
}

impl SetSpec {
    pub fn new(kind: SetKind) -> Self {
        SetSpec {
            kind,
            d: None,
            radius: None,
            extent: None,
            length: None,
            ambient: None,
            center: None,
            rotation: None,
            parts: Vec::new(),
        }
    }

    pub fn circle(radius: f64) -> Self {
        SetSpec {
            radius: Some(radius),
            ..SetSpec::new(SetKind::Circle)
        }
    }

    pub fn arc(radius: f64, extent: f64) -> Self {
        SetSpec {
            radius: Some(radius),
            extent: Some(extent),
            ..SetSpec::new(SetKind::Arc)
        }
    }

    pub fn segment(length: f64) -> Self {
        SetSpec {
            length: Some(length),
            ..SetSpec::new(SetKind::Segment)
        }
    }

    pub fn ball(d: usize) -> Self {
        SetSpec {
            d: Some(d),
            ..SetSpec::new(SetKind::Ball)
        }
    }

    pub fn cube(d: usize) -> Self {
        SetSpec {
            d: Some(d),
            ..SetSpec::new(SetKind::Cube)
        }
    }

    pub fn sphere(d: usize) -> Self {
        SetSpec {
            d: Some(d),
            ..SetSpec::new(SetKind::Sphere)
        }
    }

    pub fn union(parts: Vec<SetSpec>) -> Self {
        SetSpec {
            parts,
            ..SetSpec::new(SetKind::Union)
        }
    }

    pub fn degenerate(base: SetSpec, d: usize) -> Self {
        SetSpec {
            d: Some(d),
            parts: vec![base],
            ..SetSpec::new(SetKind::Degenerate)
        }
    }

    pub fn with_center(mut self, center: Vec<f64>) -> Self {
        self.center = Some(center);
        self
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = Some(radius);
        self
    }

    pub fn with_rotation(mut self, rotation: Vec<Vec<f64>>) -> Self {
        self.rotation = Some(rotation);
        self
    }

    pub fn with_ambient(mut self, m: usize) -> Self {
        self.ambient = Some(m);
        self
    }

    /// The image of the set under `x ↦ λx`.
    pub fn scaled(&self, lambda: f64) -> SetSpec {
        let mut out = self.clone();
        let default_radius = match self.kind {
            SetKind::Circle | SetKind::Arc | SetKind::Ball | SetKind::Sphere => Some(1.0),
            _ => None,
        };
        let default_length = match self.kind {
            SetKind::Segment => Some(2.0),
            SetKind::Cube => Some(1.0),
            _ => None,
        };
        out.radius = self.radius.or(default_radius).map(|r| r * lambda);
        out.length = self.length.or(default_length).map(|l| l * lambda);
        out.center = self
            .center
            .as_ref()
            .map(|c| c.iter().map(|x| x * lambda).collect());
        out.parts = self.parts.iter().map(|p| p.scaled(lambda)).collect();
        out
    }

    fn natural_ambient(&self) -> usize {
        let own = match self.kind {
            SetKind::Circle | SetKind::Arc => 2,
            SetKind::Segment => 1,
            SetKind::Ball | SetKind::Cube => self.d.unwrap_or(1),
            SetKind::Sphere => self.d.unwrap_or(1) + 1,
            SetKind::Union | SetKind::Degenerate => self
                .parts
                .iter()
                .map(SetSpec::natural_ambient)
                .max()
                .unwrap_or(1),
        };
        let placed = self
            .center
            .as_ref()
            .map(Vec::len)
            .unwrap_or(0)
            .max(self.rotation.as_ref().map(Vec::len).unwrap_or(0));
        own.max(placed).max(self.ambient.unwrap_or(0))
    }
}

/// Rigid placement `x ↦ Rx + t` of natural coordinates (zero-padded to `m`).
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Placement {
    /// Row-major `m × m` orthogonal matrix, `None` for the identity.
    rotation: Option<Vec<f64>>,
    translation: Vec<f64>,
}

impl Placement {
    /// `self ∘ inner`.
    fn compose(&self, inner: &Placement) -> Placement {
        let m = self.translation.len();
        let rotation = match (&self.rotation, &inner.rotation) {
            (None, None) => None,
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (Some(a), Some(b)) => {
                let mut c = vec![0.0; m * m];
                for i in 0..m {
                    for j in 0..m {
                        c[i * m + j] = (0..m).map(|k| a[i * m + k] * b[k * m + j]).sum();
                    }
                }
                Some(c)
            }
        };
        let mut translation = self.rotate(&inner.translation);
        for (t, s) in translation.iter_mut().zip(&self.translation) {
            *t += s;
        }
        Placement {
            rotation,
            translation,
        }
    }

    fn rotate(&self, x: &[f64]) -> Vec<f64> {
        let m = self.translation.len();
        match &self.rotation {
            None => {
                let mut out = vec![0.0; m];
                out[..x.len()].copy_from_slice(x);
                out
            }
            Some(r) => (0..m)
                .map(|i| (0..x.len()).map(|k| r[i * m + k] * x[k]).sum())
                .collect(),
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.rotate(x);
        for (a, b) in y.iter_mut().zip(&self.translation) {
            *a += b;
        }
        y
    }

    /// Inverse image, returned as the first `k` coordinates plus the squared
    /// norm of the rest.
    fn invert(&self, p: &[f64], k: usize) -> (Vec<f64>, f64) {
        let m = self.translation.len();
        let diff: Vec<f64> = p.iter().zip(&self.translation).map(|(a, b)| a - b).collect();
        let full: Vec<f64> = match &self.rotation {
            None => diff,
            Some(r) => (0..m)
                .map(|j| (0..m).map(|i| r[i * m + j] * diff[i]).sum())
                .collect(),
        };
        let perp2 = full[k..].iter().map(|x| x * x).sum();
        (full[..k].to_vec(), perp2)
    }
}

/// One primitive with its placement.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Part {
    pub shape: Shape,
    placement: Placement,
}

impl Part {
    pub fn to_world(&self, local: &[f64]) -> Point {
        self.placement.apply(local)
    }

    pub fn to_local(&self, p: &[f64]) -> (Vec<f64>, f64) {
        self.placement.invert(p, self.shape.natural_dim())
    }

    /// Nearest point and squared distance.
    pub fn project(&self, p: &[f64]) -> (Point, f64) {
        let (local, _) = self.to_local(p);
        let q = self.shape.project(&local);
        let world = self.to_world(&q);
        let d2 = world.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum();
        (world, d2)
    }

    pub fn ball_measure(&self, c: &[f64], r: f64) -> f64 {
        let (local, perp2) = self.to_local(c);
        self.shape.ball_measure(&local, perp2, r)
    }

    /// Tangential part of an ambient vector `v` at the part point `p`.
    pub fn tangent(&self, p: &[f64], v: &[f64]) -> Vec<f64> {
        let (local, _) = self.to_local(p);
        let origin = self.to_world(&vec![0.0; local.len()]);
        let shifted: Vec<f64> = v.iter().zip(&origin).map(|(a, b)| a + b).collect();
        let (lv, _) = self.to_local(&shifted);
        let t = self.shape.tangent(&local, &lv);
        let w = self.to_world(&t);
        w.iter().zip(&origin).map(|(a, b)| a - b).collect()
    }

    pub fn curve_point(&self, t: f64) -> Point {
        self.to_world(&self.shape.curve_point(t))
    }
}

/// A validated compact set from the catalog.
#[derive(Clone, Debug)]
pub struct SetDescriptor {
    spec: SetSpec,
    parts: Vec<Part>,
    d: usize,
    m: usize,
    degenerate: bool,
    diameter: f64,
}

impl PartialEq for SetDescriptor {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

fn validate_rotation(rot: &[Vec<f64>], m: usize) -> Result<Vec<f64>> {
    if rot.len() != m || rot.iter().any(|row| row.len() != m) {
        return Err(Error::InvalidSet(format!("rotation must be {m}×{m}")));
    }
    for i in 0..m {
        for j in 0..m {
            let dot: f64 = (0..m).map(|k| rot[k][i] * rot[k][j]).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            if (dot - want).abs() > 1e-9 {
                return Err(Error::InvalidSet("rotation is not orthogonal".into()));
            }
        }
    }
    Ok(rot.iter().flatten().copied().collect())
}

fn positive(value: Option<f64>, default: f64, what: &str) -> Result<f64> {
    let v = value.unwrap_or(default);
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidSet(format!("{what} must be positive, got {v}")));
    }
    Ok(v)
}

struct Built {
    parts: Vec<Part>,
    d: usize,
    degenerate: bool,
}

fn build(spec: &SetSpec, m: usize) -> Result<Built> {
    if let Some(a) = spec.ambient {
        if a != m {
            return Err(Error::InvalidSet(format!(
                "ambient dimension {a} does not match enclosing dimension {m}"
            )));
        }
    }
    let placement = Placement {
        rotation: match &spec.rotation {
            Some(r) => Some(validate_rotation(r, m)?),
            None => None,
        },
        translation: match &spec.center {
            Some(c) if c.len() == m => c.clone(),
            Some(c) => {
                return Err(Error::InvalidSet(format!(
                    "center has {} coordinates, ambient dimension is {m}",
                    c.len()
                )))
            }
            None => vec![0.0; m],
        },
    };
    let dim_of = |spec: &SetSpec| -> Result<usize> {
        match spec.d {
            Some(d) if d >= 1 => Ok(d),
            Some(_) => Err(Error::InvalidSet("d must be at least 1".into())),
            None => Err(Error::InvalidSet(format!("{} needs `d`", spec.kind.name()))),
        }
    };
    let shape = match spec.kind {
        SetKind::Circle => Some(Shape {
            unit: Unit::Circle,
            scale: positive(spec.radius, 1.0, "radius")?,
        }),
        SetKind::Arc => {
            let extent = spec
                .extent
                .ok_or_else(|| Error::InvalidSet("arc needs `extent`".into()))?;
            if !(extent > 0.0 && extent < 2.0 * PI) {
                return Err(Error::InvalidSet(format!(
                    "arc extent must lie in (0, 2π), got {extent}"
                )));
            }
            Some(Shape {
                unit: Unit::Arc { extent },
                scale: positive(spec.radius, 1.0, "radius")?,
            })
        }
        SetKind::Segment => Some(Shape {
            unit: Unit::Segment,
            scale: positive(spec.length, 2.0, "length")?,
        }),
        SetKind::Ball => {
            let d = dim_of(spec)?;
            let radius = positive(spec.radius, 1.0, "radius")?;
            Some(if d == 1 {
                Shape {
                    unit: Unit::Segment,
                    scale: 2.0 * radius,
                }
            } else {
                Shape {
                    unit: Unit::Ball { d },
                    scale: radius,
                }
            })
        }
        SetKind::Cube => Some(Shape {
            unit: Unit::Cube { d: dim_of(spec)? },
            scale: positive(spec.length, 1.0, "length")?,
        }),
        SetKind::Sphere => {
            let d = dim_of(spec)?;
            let radius = positive(spec.radius, 1.0, "radius")?;
            Some(if d == 1 {
                Shape {
                    unit: Unit::Circle,
                    scale: radius,
                }
            } else {
                Shape {
                    unit: Unit::Sphere { d },
                    scale: radius,
                }
            })
        }
        SetKind::Union | SetKind::Degenerate => None,
    };
    if let Some(shape) = shape {
        if shape.natural_dim() > m {
            return Err(Error::InvalidSet(format!(
                "{} needs ambient dimension at least {}",
                spec.kind.name(),
                shape.natural_dim()
            )));
        }
        let d = shape.dim();
        return Ok(Built {
            parts: vec![Part { shape, placement }],
            d,
            degenerate: false,
        });
    }
    if spec.kind == SetKind::Degenerate {
        if spec.parts.len() != 1 {
            return Err(Error::InvalidSet("degenerate needs exactly one base part".into()));
        }
        let d = dim_of(spec)?;
        let inner = build(&spec.parts[0], m)?;
        if d <= inner.d {
            return Err(Error::InvalidSet(format!(
                "degenerate dimension {d} must exceed the base dimension {}",
                inner.d
            )));
        }
        return Ok(Built {
            parts: place(inner.parts, &placement),
            d,
            degenerate: true,
        });
    }
    if spec.parts.is_empty() {
        return Err(Error::InvalidSet("union needs at least one part".into()));
    }
    let mut parts = Vec::new();
    let mut d = None;
    let mut degenerate = false;
    for part in &spec.parts {
        let inner = build(part, m)?;
        match d {
            None => d = Some(inner.d),
            Some(d0) if d0 != inner.d => {
                return Err(Error::InvalidSet(format!(
                    "union parts have different dimensions {d0} and {}",
                    inner.d
                )))
            }
            _ => {}
        }
        degenerate |= inner.degenerate;
        parts.extend(inner.parts);
    }
    Ok(Built {
        parts: place(parts, &placement),
        d: d.unwrap(),
        degenerate,
    })
}

fn place(parts: Vec<Part>, outer: &Placement) -> Vec<Part> {
    parts
        .into_iter()
        .map(|p| Part {
            placement: outer.compose(&p.placement),
            shape: p.shape,
        })
        .collect()
}

/// Sample points together with part membership.
#[derive(Clone, Debug)]
pub struct Sample {
    pub points: Vec<Point>,
    /// Index of the part each point belongs to.
    pub part: Vec<usize>,
    /// Curve parameter of each point (0 on parts of dimension ≥ 2).
    pub param: Vec<f64>,
    /// Grid spacing per part, in parameter units for curves and in length
    /// units otherwise.
    pub spacing: Vec<f64>,
}

impl SetDescriptor {
    pub fn new(spec: SetSpec) -> Result<Self> {
        let m = spec.natural_ambient();
        let built = build(&spec, m)?;
        let mut set = SetDescriptor {
            spec,
            parts: built.parts,
            d: built.d,
            m,
            degenerate: built.degenerate,
            diameter: 0.0,
        };
        set.check_overlaps()?;
        set.diameter = set.estimate_diameter();
        Ok(set)
    }

    pub fn circle(radius: f64) -> Self {
        Self::new(SetSpec::circle(radius)).expect("valid circle")
    }

    pub fn unit_circle() -> Self {
        Self::circle(1.0)
    }

    pub fn sphere(d: usize) -> Self {
        Self::new(SetSpec::sphere(d)).expect("valid sphere")
    }

    pub fn ball(d: usize) -> Self {
        Self::new(SetSpec::ball(d)).expect("valid ball")
    }

    pub fn segment(length: f64) -> Self {
        Self::new(SetSpec::segment(length)).expect("valid segment")
    }

    /// Two disjoint unit circles centered at `(±c, 0)`.
    pub fn two_circles(c: f64) -> Result<Self> {
        Self::new(SetSpec::union(vec![
            SetSpec::circle(1.0).with_center(vec![-c, 0.0]),
            SetSpec::circle(1.0).with_center(vec![c, 0.0]),
        ]))
    }

    fn check_overlaps(&self) -> Result<()> {
        for i in 0..self.parts.len() {
            let probe = self.parts[i].shape.sample(256);
            for j in 0..self.parts.len() {
                if i == j {
                    continue;
                }
                let scale = self.parts[j].shape.diameter().max(1.0);
                let hits = probe
                    .iter()
                    .map(|q| self.parts[i].to_world(q))
                    .filter(|p| self.parts[j].project(p).1.sqrt() <= 1e-9 * scale)
                    .count();
                if hits > 2 {
                    return Err(Error::InvalidSet(format!(
                        "parts {i} and {j} overlap in a set of positive measure"
                    )));
                }
            }
        }
        Ok(())
    }

    fn estimate_diameter(&self) -> f64 {
        if self.parts.len() == 1 {
            return self.parts[0].shape.diameter();
        }
        let pts = self.sample(512).points;
        let mut best = self
            .parts
            .iter()
            .map(|p| p.shape.diameter())
            .fold(0.0, f64::max);
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                best = best.max(dist2(a, b).sqrt());
            }
        }
        best
    }

    pub fn spec(&self) -> &SetSpec {
        &self.spec
    }

    /// Intrinsic dimension `d` used for measures.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Ambient dimension `m`.
    pub fn ambient_dim(&self) -> usize {
        self.m
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn part_count(&self) -> usize {
        self.parts.len()
    }

    pub(crate) fn part(&self, i: usize) -> &Part {
        &self.parts[i]
    }

    /// `(diameter)`, exact for single parts, sampled for unions.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Length scale `(𝓗_d(A)/n)^{1/d}` of an `n`-point configuration, with
    /// the base measure for degenerate sets.
    pub fn spacing(&self, n: usize) -> f64 {
        let total: f64 = self.parts.iter().map(|p| p.shape.measure()).sum();
        let dim = self.parts[0].shape.dim();
        (total / n.max(1) as f64).powf(1.0 / dim as f64)
    }

    /// Exact `𝓗_d(A)`.
    pub fn measure(&self) -> f64 {
        if self.degenerate {
            return 0.0;
        }
        self.parts.iter().map(|p| p.shape.measure()).sum()
    }

    pub fn part_measure(&self, i: usize) -> f64 {
        if self.degenerate {
            0.0
        } else {
            self.parts[i].shape.measure()
        }
    }

    /// `β_d / 𝓗_d(A)`, `None` when the measure vanishes.
    pub fn limit_target(&self) -> Option<f64> {
        let m = self.measure();
        if m > 0.0 {
            Some(unit_ball_volume(self.d) / m)
        } else {
            None
        }
    }

    /// Nearest point and the index of the part it lies on. Ties go to the
    /// lowest part index, then to the smallest parameter within the part.
    pub fn project_with_part(&self, p: &[f64]) -> (Point, usize) {
        let mut best: Option<(Point, f64, usize)> = None;
        for (i, part) in self.parts.iter().enumerate() {
            let (q, d2) = part.project(p);
            if best.as_ref().is_none_or(|b| d2 < b.1) {
                best = Some((q, d2, i));
            }
        }
        let (q, _, i) = best.expect("set has parts");
        (q, i)
    }

    /// Nearest point of the set.
    pub fn project(&self, p: &[f64]) -> Point {
        self.project_with_part(p).0
    }

    /// Euclidean distance from `p` to the set.
    pub fn distance(&self, p: &[f64]) -> f64 {
        let q = self.project(p);
        dist2(&q, p).sqrt()
    }

    pub fn part_distance(&self, i: usize, p: &[f64]) -> f64 {
        self.parts[i].project(p).1.sqrt()
    }

    /// Tolerance for "lies on the set".
    pub fn tolerance(&self) -> f64 {
        ON_SET_TOL * self.diameter.max(1.0)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.m && self.distance(p) <= self.tolerance()
    }

    pub(crate) fn check_on_set(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.m {
            return Err(Error::InvalidArgument(format!(
                "point has {} coordinates, set lives in R^{}",
                p.len(),
                self.m
            )));
        }
        let distance = self.distance(p);
        if distance > self.tolerance() {
            return Err(Error::NotOnSet { distance });
        }
        Ok(())
    }

    /// `n` quasi-uniform points with part bookkeeping.
    ///
    /// Points are apportioned to parts by measure (largest remainder), so a
    /// union of two equal circles with `n = 8` gets 4 + 4. Curves are sampled
    /// at equal parameter steps starting at 0, `S^2` by the generalized
    /// spiral, balls by concentric shells including the boundary, cubes and
    /// higher spheres by Kronecker lattices. The covering radius of the
    /// catalog samples stays below `2·(𝓗_d(A)/n)^{1/d}` once every part
    /// holds a few dozen points.
    pub fn sample_detailed(&self, n: usize) -> Sample {
        let weights: Vec<f64> = self.parts.iter().map(|p| p.shape.measure()).collect();
        let counts = apportion(n, &weights);
        let mut out = Sample {
            points: Vec::with_capacity(n),
            part: Vec::with_capacity(n),
            param: Vec::with_capacity(n),
            spacing: Vec::with_capacity(self.parts.len()),
        };
        for (i, (part, &count)) in self.parts.iter().zip(&counts).enumerate() {
            let shape = &part.shape;
            if shape.is_curve() {
                let params = shape.curve_sample_params(count);
                let (lo, hi, periodic) = shape.param_range();
                let step = if periodic {
                    (hi - lo) / count.max(1) as f64
                } else {
                    (hi - lo) / count.saturating_sub(1).max(1) as f64
                };
                out.spacing.push(step);
                for t in params {
                    out.points.push(part.curve_point(t));
                    out.part.push(i);
                    out.param.push(t);
                }
            } else {
                out.spacing.push(shape.spacing(count));
                for q in shape.sample(count) {
                    out.points.push(part.to_world(&q));
                    out.part.push(i);
                    out.param.push(0.0);
                }
            }
        }
        out
    }

    pub fn sample(&self, n: usize) -> Sample {
        self.sample_detailed(n)
    }

    /// Plain list of `n` quasi-uniform points.
    pub fn sample_points(&self, n: usize) -> Vec<Point> {
        self.sample_detailed(n).points
    }

    /// A random point, uniform with respect to `𝓗_d` on each part and parts
    /// chosen proportionally to measure.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let (q, _) = self.random_point_with_part(rng);
        q
    }

    pub(crate) fn random_point_with_part<R: Rng + ?Sized>(&self, rng: &mut R) -> (Point, usize) {
        let weights: Vec<f64> = self.parts.iter().map(|p| p.shape.measure()).collect();
        let total: f64 = weights.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut idx = self.parts.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            if u < *w {
                idx = i;
                break;
            }
            u -= w;
        }
        let part = &self.parts[idx];
        (part.to_world(&part.shape.random(rng)), idx)
    }

    /// `𝓗_d(B(c, r) ∩ A)` for an arbitrary center `c` (closed ball).
    pub fn ball_measure(&self, c: &[f64], r: f64) -> f64 {
        if self.degenerate {
            return 0.0;
        }
        self.parts.iter().map(|p| p.ball_measure(c, r)).sum()
    }

    /// `𝓗_d(B(x, r) ∩ A)` for a point `x` of `A`.
    pub fn ball_intersection_measure(&self, x: &[f64], r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
        }
        self.check_on_set(x)?;
        Ok(self.ball_measure(x, r))
    }

    /// Tangential component of `v` at the set point `p` on part `part`.
    pub(crate) fn tangent(&self, part: usize, p: &[f64], v: &[f64]) -> Vec<f64> {
        self.parts[part].tangent(p, v)
    }
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, TAU};

    fn two_circles() -> SetDescriptor {
        SetDescriptor::two_circles(3.0).unwrap()
    }

    fn catalog() -> Vec<SetDescriptor> {
        vec![
            SetDescriptor::unit_circle(),
            SetDescriptor::new(SetSpec::arc(1.5, 2.0)).unwrap(),
            SetDescriptor::segment(2.0),
            SetDescriptor::ball(2),
            SetDescriptor::ball(3),
            SetDescriptor::new(SetSpec::cube(2)).unwrap(),
            SetDescriptor::sphere(2),
            SetDescriptor::sphere(3),
            two_circles(),
        ]
    }

    #[test]
    fn measures() {
        assert_relative_eq!(SetDescriptor::unit_circle().measure(), TAU);
        assert_relative_eq!(SetDescriptor::sphere(2).measure(), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(two_circles().measure(), 2.0 * TAU);
        assert_relative_eq!(SetDescriptor::ball(3).measure(), 4.0 * PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(SetDescriptor::segment(2.0).measure(), 2.0);
        let degenerate =
            SetDescriptor::new(SetSpec::degenerate(SetSpec::arc(1.0, 1.0), 2)).unwrap();
        assert_eq!(degenerate.measure(), 0.0);
        assert_eq!(degenerate.limit_target(), None);
    }

    #[test]
    fn projections() {
        let c = SetDescriptor::unit_circle();
        assert_eq!(c.project(&[2.0, 0.0]), vec![1.0, 0.0]);
        assert_eq!(c.project(&[0.0, 0.0]), vec![1.0, 0.0]);
        let s = SetDescriptor::sphere(2);
        assert_eq!(s.project(&[0.0, 0.0, 3.0]), vec![0.0, 0.0, 1.0]);
        let b = SetDescriptor::ball(3);
        assert_eq!(b.project(&[0.1, 0.2, 0.3]), vec![0.1, 0.2, 0.3]);
        // equidistant from both circles: lowest part index wins
        let u = two_circles();
        let (q, part) = u.project_with_part(&[0.0, 0.0]);
        assert_eq!(part, 0);
        assert_relative_eq!(q[0], -2.0);
    }

    #[test]
    fn arc_projection_picks_nearest_endpoint() {
        let arc = SetDescriptor::new(SetSpec::arc(1.0, FRAC_PI_2)).unwrap();
        let q = arc.project(&[-1.0, -0.1]);
        assert_relative_eq!(q[1], 1.0, epsilon = 1e-15);
        let q = arc.project(&[-0.1, -1.0]);
        assert_relative_eq!(q[0], 1.0, epsilon = 1e-15);
        let q = arc.project(&[-1.0, 0.1]);
        assert_relative_eq!(q[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn circle_sample_starts_at_zero() {
        let s = SetDescriptor::unit_circle().sample(4);
        let angles: Vec<f64> = s.points.iter().map(|p| angle_of(p[0], p[1])).collect();
        for (a, want) in angles.iter().zip([0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2]) {
            assert_relative_eq!(*a, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn union_sample_is_proportional() {
        let s = two_circles().sample(8);
        assert_eq!(s.part.iter().filter(|&&p| p == 0).count(), 4);
        assert_eq!(s.part.iter().filter(|&&p| p == 1).count(), 4);
    }

    /// Farthest-point search over a dense grid of the sphere.
    fn covering_radius_s2(points: &[Point]) -> f64 {
        let dense = shape::generalized_spiral(40_000);
        dense
            .iter()
            .map(|y| {
                points
                    .iter()
                    .map(|p| dist2(p, y))
                    .fold(f64::INFINITY, f64::min)
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn spiral_covering_radius() {
        let pts = SetDescriptor::sphere(2).sample_points(1000);
        let rho = covering_radius_s2(&pts);
        assert!(rho <= 0.25, "covering radius {rho}");
        // documented constant: ρ ≤ 2 (4π/n)^{1/2}
        assert!(rho <= 2.0 * (4.0 * PI / 1000.0f64).sqrt());
    }

    #[test]
    fn catalog_samples_cover_with_documented_constant() {
        for set in catalog() {
            let n = 400;
            let pts = set.sample_points(n);
            assert_eq!(pts.len(), n);
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let bound = 2.0 * set.spacing(n);
            for _ in 0..2000 {
                let y = set.random_point(&mut rng);
                let nearest = pts
                    .iter()
                    .map(|p| dist2(p, &y))
                    .fold(f64::INFINITY, f64::min)
                    .sqrt();
                assert!(nearest <= bound, "{:?}: {nearest} > {bound}", set.spec().kind);
            }
        }
    }

    #[test]
    fn ball_intersection_closed_forms() {
        let c = SetDescriptor::unit_circle();
        let x = [1.0, 0.0];
        assert_relative_eq!(
            c.ball_intersection_measure(&x, 1.0).unwrap(),
            2.0 * PI / 3.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(c.ball_intersection_measure(&x, 2.0).unwrap(), TAU);
        let s = SetDescriptor::sphere(2);
        let y = [0.0, 0.0, 1.0];
        assert_relative_eq!(s.ball_intersection_measure(&y, 1.0).unwrap(), PI, max_relative = 1e-15);
        for r in [0.01, 0.3, 1.7, 2.0] {
            assert_relative_eq!(
                s.ball_intersection_measure(&y, r).unwrap(),
                PI * r * r,
                max_relative = 1e-12
            );
        }
        assert!(matches!(
            c.ball_intersection_measure(&[0.5, 0.0], 1.0),
            Err(Error::NotOnSet { .. })
        ));
    }

    /// Arc-length quadrature of the portion of the unit circle inside a ball.
    fn circle_quadrature(x: &[f64], r: f64) -> f64 {
        let n = 200_000;
        let h = TAU / n as f64;
        (0..n)
            .filter(|k| {
                let t = (*k as f64 + 0.5) * h;
                dist2(&[t.cos(), t.sin()], x) <= r * r
            })
            .count() as f64
            * h
    }

    /// Midpoint quadrature on the sphere in (z, φ) coordinates.
    fn sphere_quadrature(x: &[f64], r: f64) -> f64 {
        let n = 800;
        let mut area = 0.0;
        let dz = 2.0 / n as f64;
        let dphi = TAU / n as f64;
        for i in 0..n {
            let z = -1.0 + (i as f64 + 0.5) * dz;
            let s = (1.0 - z * z).sqrt();
            for j in 0..n {
                let phi = (j as f64 + 0.5) * dphi;
                if dist2(&[s * phi.cos(), s * phi.sin(), z], x) <= r * r {
                    area += dz * dphi;
                }
            }
        }
        area
    }

    #[test]
    fn ball_intersection_agrees_with_quadrature() {
        let c = SetDescriptor::unit_circle();
        for (x, r) in [([1.0, 0.0], 0.7), ([0.0, 1.0], 1.3), ([0.6, 0.8], 0.05)] {
            let exact = c.ball_intersection_measure(&x, r).unwrap();
            assert_relative_eq!(exact, 4.0 * (r / 2.0).asin(), max_relative = 1e-12);
            assert!((exact - circle_quadrature(&x, r)).abs() < 1e-4);
        }
        let s = SetDescriptor::sphere(2);
        let x = [0.0, 0.6, 0.8];
        for r in [0.5, 1.0, 1.9] {
            let exact = s.ball_intersection_measure(&x, r).unwrap();
            assert!((exact - sphere_quadrature(&x, r)).abs() < 2e-2, "r = {r}");
        }
    }

    #[test]
    fn ball_measure_saturates_at_diameter() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for set in catalog() {
            for _ in 0..5 {
                let x = set.random_point(&mut rng);
                let full = set.ball_measure(&x, set.diameter() * 1.0001);
                assert_relative_eq!(full, set.measure(), max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn union_validation() {
        let same = SetSpec::union(vec![SetSpec::circle(1.0), SetSpec::circle(1.0)]);
        assert!(SetDescriptor::new(same).is_err());
        let mixed = SetSpec::union(vec![SetSpec::circle(1.0), SetSpec::sphere(2)]);
        assert!(SetDescriptor::new(mixed).is_err());
        let tangent = SetSpec::union(vec![
            SetSpec::circle(1.0),
            SetSpec::circle(1.0).with_center(vec![2.0, 0.0]),
        ]);
        assert!(SetDescriptor::new(tangent).is_ok());
    }

    #[test]
    fn rotated_embedding() {
        // a circle in the (x, z) plane of R^3
        let spec = SetSpec::circle(1.0)
            .with_ambient(3)
            .with_rotation(vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 0.0, -1.0],
                vec![0.0, 1.0, 0.0],
            ])
            .with_center(vec![0.0, 0.0, 0.0]);
        let set = SetDescriptor::new(spec).unwrap();
        assert_eq!(set.ambient_dim(), 3);
        let q = set.project(&[0.0, 0.0, 5.0]);
        assert_relative_eq!(q[2], 1.0, epsilon = 1e-15);
        assert!(set.contains(&[0.0, 0.0, -1.0]));
        assert!(!set.contains(&[0.0, 1.0, 0.0]));
        assert_relative_eq!(set.ball_measure(&[0.0, 0.0, 1.0], 1.0), 2.0 * PI / 3.0, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn ball_measure_is_monotone_in_r(k in 0usize..9, seed in 0u64..1000, r1 in 0.0f64..3.0, dr in 0.0f64..1.0) {
            let set = &catalog()[k];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = set.random_point(&mut rng);
            let a = set.ball_measure(&x, r1);
            let b = set.ball_measure(&x, r1 + dr);
            prop_assert!(a <= b + 1e-9 * set.measure());
        }

        #[test]
        fn projection_is_nearest(k in 0usize..9, seed in 0u64..1000) {
            let set = &catalog()[k];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = set.ambient_dim();
            let p: Vec<f64> = (0..m).map(|_| rng.random::<f64>() * 6.0 - 3.0).collect();
            let q = set.project(&p);
            prop_assert!(set.contains(&q));
            let dq = dist2(&p, &q);
            for y in set.sample_points(1000) {
                prop_assert!(dq <= dist2(&p, &y) + 1e-12);
            }
        }
    }
}
