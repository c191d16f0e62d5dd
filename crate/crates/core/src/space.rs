//! Feature spaces and points.
//!
//! A [`FeatureSpace`] is a hyperrectangle with named axes: every feature `i`
//! ranges over the closed interval `[lower[i], upper[i]]`. A [`Point`] is a
//! coordinate vector validated against its space once, at construction;
//! everything downstream may assume in-bounds inputs.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bounded, named feature domain: the cartesian product of per-feature
/// closed intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFeatureSpace", into = "RawFeatureSpace")]
pub struct FeatureSpace {
    names: Vec<String>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawFeatureSpace {
    names: Vec<String>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<RawFeatureSpace> for FeatureSpace {
    type Error = Error;
    fn try_from(raw: RawFeatureSpace) -> Result<Self> {
        FeatureSpace::new(raw.names, raw.lower, raw.upper)
    }
}

impl From<FeatureSpace> for RawFeatureSpace {
    fn from(s: FeatureSpace) -> Self {
        RawFeatureSpace {
            names: s.names,
            lower: s.lower,
            upper: s.upper,
        }
    }
}

impl FeatureSpace {
    /// Builds a feature space, validating that names are unique and non-empty
    /// and that every interval is non-degenerate (`lower[i] < upper[i]`).
    pub fn new(names: Vec<String>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::Parameter(
                "feature space must have dimension >= 1".into(),
            ));
        }
        if names.len() != lower.len() || names.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: names.len(),
                actual: lower.len().min(upper.len()),
            });
        }
        let mut seen = HashSet::new();
        for name in &names {
            if name.is_empty() {
                return Err(Error::Parameter("feature names must be non-empty".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Parameter(format!("duplicate feature name `{name}`")));
            }
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::Parameter(format!(
                    "feature `{}` has invalid bounds [{lo}, {hi}]",
                    names[i]
                )));
            }
        }
        Ok(Self {
            names,
            lower,
            upper,
        })
    }

    /// A space of `dim` features all bounded by the same interval, with
    /// generated names `x1..xdim`.
    pub fn uniform(dim: usize, lower: f64, upper: f64) -> Result<Arc<Self>> {
        let names = (1..=dim).map(|i| format!("x{i}")).collect();
        Ok(Arc::new(Self::new(
            names,
            vec![lower; dim],
            vec![upper; dim],
        )?))
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Width of feature `i`'s interval.
    pub fn range(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    /// Index of a feature by name.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Checks a raw coordinate vector, reporting the first offending entry.
    pub fn check(&self, coords: &[f64]) -> Result<()> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: coords.len(),
            });
        }
        for (i, &v) in coords.iter().enumerate() {
            if !v.is_finite() || v < self.lower[i] || v > self.upper[i] {
                return Err(Error::OutOfBounds {
                    name: self.names[i].clone(),
                    index: i,
                    value: v,
                    lower: self.lower[i],
                    upper: self.upper[i],
                });
            }
        }
        Ok(())
    }

    /// True when the two spaces have identical bounds (names may differ).
    /// Points from geometrically equal spaces are interchangeable.
    pub fn same_geometry(&self, other: &FeatureSpace) -> bool {
        self.lower == other.lower && self.upper == other.upper
    }

    /// The all-zeros point, if the origin lies inside the box.
    pub fn origin(self: &Arc<Self>) -> Result<Point> {
        Point::new(self, vec![0.0; self.dim()])
    }
}

/// A validated coordinate vector inside a [`FeatureSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    space: Arc<FeatureSpace>,
    coords: Vec<f64>,
}

// Reports carry points as bare coordinate arrays.
impl Serialize for Point {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.coords.serialize(serializer)
    }
}

impl Point {
    /// Validates `coords` against the space; points are immutable afterwards,
    /// so bounds need never be re-checked downstream.
    pub fn new(space: &Arc<FeatureSpace>, coords: Vec<f64>) -> Result<Self> {
        space.check(&coords)?;
        Ok(Self {
            space: Arc::clone(space),
            coords,
        })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn space(&self) -> &Arc<FeatureSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// A copy with coordinate `i` replaced by `value` (re-validated).
    pub fn with_coord(&self, i: usize, value: f64) -> Result<Self> {
        if i >= self.dim() {
            return Err(Error::Parameter(format!(
                "coordinate index {i} out of range for dimension {}",
                self.dim()
            )));
        }
        let mut coords = self.coords.clone();
        coords[i] = value;
        Self::new(&self.space, coords)
    }

    /// A copy with coordinate `i` shifted by `delta` (re-validated).
    pub fn shifted(&self, i: usize, delta: f64) -> Result<Self> {
        self.with_coord(i, self.coords[i] + delta)
    }
}

/// The straight-line interpolant between two points of the same space:
/// `baseline + t * (explicand - baseline)`.
///
/// `t = 0` yields the baseline, `t = 1` the explicand; by convexity of the
/// hyperrectangle the result is always in bounds.
pub fn path_point(baseline: &Point, explicand: &Point, t: f64) -> Result<Point> {
    require_same_space(baseline, explicand)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Parameter(format!(
            "path parameter t={t} outside [0, 1]"
        )));
    }
    let coords = path_coords(baseline.coords(), explicand.coords(), t);
    Point::new(baseline.space(), coords)
}

/// Raw interpolation used by the quadrature inner loops (no re-validation;
/// inputs are coords of already-validated points).
pub(crate) fn path_coords(baseline: &[f64], explicand: &[f64], t: f64) -> Vec<f64> {
    baseline
        .iter()
        .zip(explicand)
        .map(|(&b, &x)| b + t * (x - b))
        .collect()
}

pub(crate) fn require_same_space(a: &Point, b: &Point) -> Result<()> {
    if !a.space().same_geometry(b.space()) {
        return Err(Error::SpaceMismatch(format!(
            "bounds {:?}..{:?} vs {:?}..{:?}",
            a.space().lower(),
            a.space().upper(),
            b.space().lower(),
            b.space().upper()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit2() -> Arc<FeatureSpace> {
        FeatureSpace::uniform(2, 0.0, 5.0).unwrap()
    }

    #[test]
    fn rejects_inverted_bounds() {
        let err = FeatureSpace::new(vec!["a".into(), "b".into()], vec![0.0, 1.0], vec![1.0, 1.0])
            .unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
    }

    #[test]
    fn rejects_duplicate_names() {
        let err = FeatureSpace::new(vec!["a".into(), "a".into()], vec![0.0; 2], vec![1.0; 2])
            .unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
    }

    #[test]
    fn point_is_bounds_checked_at_construction() {
        let s = unit2();
        assert!(Point::new(&s, vec![1.0, 5.0]).is_ok());
        let err = Point::new(&s, vec![1.0, 5.1]).unwrap_err();
        match err {
            Error::OutOfBounds { name, index, .. } => {
                assert_eq!(name, "x2");
                assert_eq!(index, 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn path_point_endpoints_and_midpoint() {
        let s = unit2();
        let b = Point::new(&s, vec![0.0, 0.0]).unwrap();
        let x = Point::new(&s, vec![4.0, 1.0]).unwrap();
        assert_eq!(path_point(&b, &x, 0.5).unwrap().coords(), &[2.0, 0.5]);
        assert_eq!(path_point(&b, &x, 0.0).unwrap().coords(), b.coords());
        assert_eq!(path_point(&b, &x, 1.0).unwrap().coords(), x.coords());
    }

    #[test]
    fn path_point_affine_interpolation() {
        let s = unit2();
        let b = Point::new(&s, vec![1.0, 0.0]).unwrap();
        let x = Point::new(&s, vec![2.0, 2.0]).unwrap();
        assert_eq!(path_point(&b, &x, 0.25).unwrap().coords(), &[1.25, 0.5]);
    }

    #[test]
    fn path_point_rejects_t_outside_unit_interval() {
        let s = unit2();
        let b = Point::new(&s, vec![0.0, 0.0]).unwrap();
        let x = Point::new(&s, vec![1.0, 1.0]).unwrap();
        assert!(matches!(path_point(&b, &x, -0.1), Err(Error::Parameter(_))));
        assert!(matches!(path_point(&b, &x, 1.1), Err(Error::Parameter(_))));
    }

    #[test]
    fn serde_roundtrip_revalidates() {
        let s = FeatureSpace::new(
            vec!["u".into(), "v".into()],
            vec![-1.0, 0.0],
            vec![1.0, 2.0],
        )
        .unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let back: FeatureSpace = serde_json::from_str(&json).unwrap();
        assert_eq!(s, back);
        let bad = r#"{"names":["u"],"lower":[2.0],"upper":[1.0]}"#;
        assert!(serde_json::from_str::<FeatureSpace>(bad).is_err());
    }
}
