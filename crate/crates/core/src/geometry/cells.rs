//! Closed test cells `K ⊂ A` whose relative boundary is `𝓗_d`-null.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{dist2, Point, SetDescriptor, Unit};
use crate::error::{Error, Result};

/// Slack on cell boundaries, in units of the parameter (bands) or relative
/// to the radius (caps). Cells are closed, so boundary points count.
const BOUNDARY_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellShape {
    /// `A ∩ B̄(center, radius)`; an arc on circles, a cap on spheres.
    Cap { center: Point, radius: f64 },
    /// Points of one part whose band coordinate lies in `[lo, hi]`: curve
    /// parameter (periodic on circles), height on spheres, radius on balls,
    /// first coordinate on cubes.
    Band { part: usize, lo: f64, hi: f64 },
    /// A whole part of a union.
    Part { part: usize },
}

/// A closed cell with its exact measure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestCell {
    pub shape: CellShape,
    pub measure: f64,
}

impl TestCell {
    /// The cap `A ∩ B̄(center, radius)` around a point of `A`.
    pub fn cap(set: &SetDescriptor, center: &[f64], radius: f64) -> Result<Self> {
        let measure = set.ball_intersection_measure(center, radius)?;
        Ok(TestCell {
            shape: CellShape::Cap {
                center: center.to_vec(),
                radius,
            },
            measure,
        })
    }

    /// Geodesic cap of angular radius `angle` around a point on a circle or
    /// sphere part.
    pub fn cap_angle(set: &SetDescriptor, center: &[f64], angle: f64) -> Result<Self> {
        set.check_on_set(center)?;
        let (_, part) = set.project_with_part(center);
        let shape = &set.part(part).shape;
        match shape.unit {
            Unit::Circle | Unit::Arc { .. } | Unit::Sphere { .. } => {
                let chord = 2.0 * shape.scale * (angle.clamp(0.0, std::f64::consts::PI) / 2.0).sin();
                Self::cap(set, center, chord)
            }
            _ => Err(Error::InvalidArgument(
                "angular caps need a circle or sphere part".into(),
            )),
        }
    }

    pub fn band(set: &SetDescriptor, part: usize, lo: f64, hi: f64) -> Result<Self> {
        if part >= set.part_count() {
            return Err(Error::InvalidArgument(format!("no part {part}")));
        }
        if !(lo <= hi) {
            return Err(Error::InvalidArgument(format!("empty band [{lo}, {hi}]")));
        }
        let measure = if set.is_degenerate() {
            0.0
        } else {
            set.part(part).shape.band_measure(lo, hi)
        };
        Ok(TestCell {
            shape: CellShape::Band { part, lo, hi },
            measure,
        })
    }

    pub fn part(set: &SetDescriptor, part: usize) -> Result<Self> {
        if part >= set.part_count() {
            return Err(Error::InvalidArgument(format!("no part {part}")));
        }
        Ok(TestCell {
            shape: CellShape::Part { part },
            measure: set.part_measure(part),
        })
    }

    /// Closed membership test for a point of `A`.
    pub fn contains(&self, set: &SetDescriptor, y: &[f64]) -> bool {
        match &self.shape {
            CellShape::Cap { center, radius } => {
                dist2(center, y).sqrt() <= radius * (1.0 + BOUNDARY_SLACK) + f64::MIN_POSITIVE
            }
            CellShape::Part { part } => set.part_distance(*part, y) <= set.tolerance(),
            CellShape::Band { part, lo, hi } => {
                if set.part_distance(*part, y) > set.tolerance() {
                    return false;
                }
                let p = set.part(*part);
                let (local, _) = p.to_local(y);
                let c = p.shape.band_coordinate(&local);
                let (_, _, periodic) = p.shape.band_range();
                if periodic {
                    let width = hi - lo;
                    if width >= TAU {
                        return true;
                    }
                    let off = (c - lo).rem_euclid(TAU);
                    off <= width + BOUNDARY_SLACK || off >= TAU - BOUNDARY_SLACK
                } else {
                    c >= lo - BOUNDARY_SLACK && c <= hi + BOUNDARY_SLACK
                }
            }
        }
    }
}

/// Families of test cells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum CellFamily {
    /// Caps around random points with chord radius uniform in
    /// `[0.1, 0.9] × diam(part)`.
    RandomCaps { count: usize },
    /// Random bands (arcs on circles) on parts chosen by measure.
    RandomBands { count: usize },
    /// Each part cut into `per_part` bands of equal measure; a partition.
    Partition { per_part: usize },
    /// One cell per part of a union.
    Parts,
}

/// Builds a reproducible family of closed cells.
pub fn make_test_cells(set: &SetDescriptor, family: CellFamily, seed: u64) -> Result<Vec<TestCell>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match family {
        CellFamily::RandomCaps { count } | CellFamily::RandomBands { count } if count == 0 => {
            Err(Error::InvalidArgument("cell family needs at least one cell".into()))
        }
        CellFamily::RandomCaps { count } => (0..count)
            .map(|_| {
                let (center, part) = set.random_point_with_part(&mut rng);
                let diam = set.part(part).shape.diameter();
                let radius = diam * (0.1 + 0.8 * rng.random::<f64>());
                TestCell::cap(set, &center, radius)
            })
            .collect(),
        CellFamily::RandomBands { count } => (0..count)
            .map(|_| {
                let (_, part) = set.random_point_with_part(&mut rng);
                let shape = &set.part(part).shape;
                let (lo, hi, periodic) = shape.band_range();
                if periodic {
                    let start = rng.random::<f64>() * TAU;
                    let width = rng.random::<f64>() * TAU;
                    TestCell::band(set, part, start, start + width)
                } else {
                    let a = lo + (hi - lo) * rng.random::<f64>();
                    let b = lo + (hi - lo) * rng.random::<f64>();
                    TestCell::band(set, part, a.min(b), a.max(b))
                }
            })
            .collect(),
        CellFamily::Partition { per_part } => {
            if per_part == 0 {
                return Err(Error::InvalidArgument("partition needs at least one cell".into()));
            }
            let mut cells = Vec::new();
            for part in 0..set.part_count() {
                let edges = set.part(part).shape.equal_bands(per_part);
                for w in edges.windows(2) {
                    cells.push(TestCell::band(set, part, w[0], w[1])?);
                }
            }
            Ok(cells)
        }
        CellFamily::Parts => (0..set.part_count()).map(|i| TestCell::part(set, i)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SetSpec;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    #[test]
    fn arc_and_cap_measures() {
        let circle = SetDescriptor::unit_circle();
        let arc = TestCell::cap_angle(&circle, &[1.0, 0.0], FRAC_PI_2).unwrap();
        assert_relative_eq!(arc.measure, PI, max_relative = 1e-15);
        let band = TestCell::band(&circle, 0, -FRAC_PI_2, FRAC_PI_2).unwrap();
        assert_relative_eq!(band.measure, PI);

        let sphere = SetDescriptor::sphere(2);
        let north = [0.0, 0.0, 1.0];
        let hemi = TestCell::cap_angle(&sphere, &north, FRAC_PI_2).unwrap();
        assert_relative_eq!(hemi.measure, 2.0 * PI, max_relative = 1e-15);
        let third = TestCell::cap_angle(&sphere, &north, FRAC_PI_3).unwrap();
        assert_relative_eq!(third.measure, PI, max_relative = 1e-15);
    }

    #[test]
    fn partitions_sum_to_measure() {
        let sets = [
            SetDescriptor::unit_circle(),
            SetDescriptor::sphere(2),
            SetDescriptor::sphere(3),
            SetDescriptor::ball(3),
            SetDescriptor::new(SetSpec::cube(2)).unwrap(),
            SetDescriptor::new(SetSpec::arc(2.0, 1.0)).unwrap(),
            SetDescriptor::two_circles(3.0).unwrap(),
        ];
        for set in &sets {
            for k in [1, 3, 7] {
                let cells = make_test_cells(set, CellFamily::Partition { per_part: k }, 0).unwrap();
                let total: f64 = cells.iter().map(|c| c.measure).sum();
                assert_relative_eq!(total, set.measure(), max_relative = 1e-9);
                assert!(cells.iter().all(|c| c.measure >= 0.0 && c.measure <= set.measure()));
            }
        }
    }

    #[test]
    fn closed_cells_count_boundary_points() {
        let circle = SetDescriptor::unit_circle();
        let band = TestCell::band(&circle, 0, FRAC_PI_2, PI).unwrap();
        assert!(band.contains(&circle, &[0.0, 1.0]));
        assert!(band.contains(&circle, &[-1.0, 0.0]));
        assert!(!band.contains(&circle, &[1.0, 0.0]));
        let cap = TestCell::cap(&circle, &[1.0, 0.0], 2f64.sqrt()).unwrap();
        assert!(cap.contains(&circle, &[0.0, 1.0]));
    }

    #[test]
    fn wrapped_band_membership() {
        let circle = SetDescriptor::unit_circle();
        let band = TestCell::band(&circle, 0, 3.0 * FRAC_PI_2, 5.0 * FRAC_PI_2).unwrap();
        assert!(band.contains(&circle, &[1.0, 0.0]));
        assert!(!band.contains(&circle, &[-1.0, 0.0]));
        assert_relative_eq!(band.measure, PI);
    }

    #[test]
    fn random_families_are_reproducible() {
        let sphere = SetDescriptor::sphere(2);
        let a = make_test_cells(&sphere, CellFamily::RandomCaps { count: 10 }, 3).unwrap();
        let b = make_test_cells(&sphere, CellFamily::RandomCaps { count: 10 }, 3).unwrap();
        assert_eq!(a, b);
        assert!(make_test_cells(&sphere, CellFamily::RandomCaps { count: 0 }, 3).is_err());
    }
}
