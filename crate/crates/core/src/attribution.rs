//! Baseline attribution engines: integrated gradients and exact baseline
//! Shapley values.
//!
//! Both engines satisfy the baseline-attribution contract: the attribution of
//! an explicand equal to the baseline is identically zero, and the sum of the
//! per-feature values tracks `f(explicand) - f(baseline)` (exactly for the
//! Shapley engine, up to quadrature error for integrated gradients; the
//! residual is recorded, never redistributed).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelHandle;
use crate::space::{path_coords, require_same_space, Point};

/// Largest feature count accepted by exact coalition enumeration.
pub const MAX_SHAPLEY_FEATURES: usize = 20;

/// Quadrature rule for the path integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureRule {
    /// Samples the open nodes `t = (k - 1/2) / n`; exact for integrands
    /// linear in `t` and never evaluates the segment endpoints.
    #[default]
    Midpoint,
    /// Closed trapezoid rule over `n` intervals (`n + 1` gradient calls).
    Trapezoid,
}

/// Configuration for the integrated-gradients quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IGConfig {
    /// Number of quadrature intervals (20..=100_000).
    pub steps: usize,
    pub rule: QuadratureRule,
}

impl Default for IGConfig {
    fn default() -> Self {
        Self {
            steps: 300,
            rule: QuadratureRule::Midpoint,
        }
    }
}

impl IGConfig {
    pub fn with_steps(steps: usize) -> Self {
        Self {
            steps,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(20..=100_000).contains(&self.steps) {
            return Err(Error::Config(format!(
                "quadrature steps {} outside the supported range [20, 100000]",
                self.steps
            )));
        }
        Ok(())
    }
}

/// Which attribution engine produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttributionMethod {
    #[serde(rename = "ig")]
    IntegratedGradients,
    #[serde(rename = "bshap")]
    BaselineShapley,
}

impl std::fmt::Display for AttributionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AttributionMethod::IntegratedGradients => f.write_str("IG"),
            AttributionMethod::BaselineShapley => f.write_str("BShap"),
        }
    }
}

/// Per-feature attributions for one (explicand, baseline, method) triple.
#[derive(Debug, Clone)]
pub struct AttributionResult {
    method: AttributionMethod,
    explicand: Point,
    baseline: Point,
    values: Vec<f64>,
    completeness_gap: f64,
}

impl AttributionResult {
    pub fn method(&self) -> AttributionMethod {
        self.method
    }

    pub fn explicand(&self) -> &Point {
        &self.explicand
    }

    pub fn baseline(&self) -> &Point {
        &self.baseline
    }

    /// Attribution of each feature.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `sum(values) - (f(explicand) - f(baseline))` as recorded when the
    /// attribution was computed.
    pub fn completeness_gap(&self) -> f64 {
        self.completeness_gap
    }

    /// Displacement-normalized attributions: `values[i] / (x_i - x'_i)`
    /// where the explicand strictly exceeds the baseline, `None` elsewhere
    /// (the normalization is undefined without a strict increase).
    pub fn normalized(&self) -> Vec<Option<f64>> {
        self.values
            .iter()
            .zip(self.explicand.coords().iter().zip(self.baseline.coords()))
            .map(|(&a, (&x, &b))| if x > b { Some(a / (x - b)) } else { None })
            .collect()
    }

    /// Normalized attribution of one feature; errors when the explicand does
    /// not strictly exceed the baseline there.
    pub fn normalized_at(&self, i: usize) -> Result<f64> {
        let x = self.explicand.coords()[i];
        let b = self.baseline.coords()[i];
        if x > b {
            Ok(self.values[i] / (x - b))
        } else {
            Err(Error::Parameter(format!(
                "normalized attribution of feature {i} undefined: explicand {x} \
                 does not strictly exceed baseline {b}"
            )))
        }
    }
}

/// Recomputes the completeness residual of a result against a model:
/// `sum(values) - (f(explicand) - f(baseline))`.
pub fn completeness_gap(result: &AttributionResult, model: &ModelHandle) -> Result<f64> {
    let fx = model.evaluate(result.explicand())?;
    let fb = model.evaluate(result.baseline())?;
    Ok(result.values().iter().sum::<f64>() - (fx - fb))
}

/// Dispatches to the configured engine.
pub fn attribute(
    method: AttributionMethod,
    model: &ModelHandle,
    explicand: &Point,
    baseline: &Point,
    ig: &IGConfig,
) -> Result<AttributionResult> {
    match method {
        AttributionMethod::IntegratedGradients => {
            integrated_gradients(model, explicand, baseline, ig)
        }
        AttributionMethod::BaselineShapley => baseline_shapley(model, explicand, baseline),
    }
}

/// Integrated gradients along the straight segment from baseline to
/// explicand:
///
/// `values[i] = (x_i - x'_i) * integral over [0,1] of df/dx_i(x' + t (x - x'))`
///
/// approximated by the configured quadrature. The completeness residual is
/// recorded on the result, not corrected.
pub fn integrated_gradients(
    model: &ModelHandle,
    explicand: &Point,
    baseline: &Point,
    config: &IGConfig,
) -> Result<AttributionResult> {
    config.validate()?;
    check_triple(model, explicand, baseline)?;

    let x = explicand.coords();
    let b = baseline.coords();
    let m = x.len();

    if x == b {
        // Degenerate segment: the zero-at-baseline contract applies exactly.
        return Ok(AttributionResult {
            method: AttributionMethod::IntegratedGradients,
            explicand: explicand.clone(),
            baseline: baseline.clone(),
            values: vec![0.0; m],
            completeness_gap: 0.0,
        });
    }

    let n = config.steps;
    let mut avg = vec![0.0; m];
    match config.rule {
        QuadratureRule::Midpoint => {
            for k in 1..=n {
                let t = (k as f64 - 0.5) / n as f64;
                let g = model.gradient_raw(&path_coords(b, x, t));
                for (a, gi) in avg.iter_mut().zip(&g) {
                    *a += gi;
                }
            }
            for a in &mut avg {
                *a /= n as f64;
            }
        }
        QuadratureRule::Trapezoid => {
            for k in 0..=n {
                let t = k as f64 / n as f64;
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                let g = model.gradient_raw(&path_coords(b, x, t));
                for (a, gi) in avg.iter_mut().zip(&g) {
                    *a += w * gi;
                }
            }
            for a in &mut avg {
                *a /= n as f64;
            }
        }
    }

    let values: Vec<f64> = avg
        .iter()
        .zip(x.iter().zip(b))
        .map(|(&a, (&xi, &bi))| (xi - bi) * a)
        .collect();

    let gap = values.iter().sum::<f64>() - (model.evaluate_raw(x) - model.evaluate_raw(b));

    Ok(AttributionResult {
        method: AttributionMethod::IntegratedGradients,
        explicand: explicand.clone(),
        baseline: baseline.clone(),
        values,
        completeness_gap: gap,
    })
}

/// A subset of the feature set `{0..universe}`, stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoalitionIndex {
    members: u32,
    universe: usize,
}

impl CoalitionIndex {
    pub fn empty(universe: usize) -> Self {
        Self {
            members: 0,
            universe,
        }
    }

    pub fn from_mask(members: u32, universe: usize) -> Self {
        debug_assert!(universe <= MAX_SHAPLEY_FEATURES);
        debug_assert_eq!(members >> universe, 0);
        Self { members, universe }
    }

    pub fn mask(&self) -> u32 {
        self.members
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn contains(&self, feature: usize) -> bool {
        self.members >> feature & 1 == 1
    }

    pub fn with(&self, feature: usize) -> Self {
        Self {
            members: self.members | 1 << feature,
            universe: self.universe,
        }
    }

    pub fn len(&self) -> usize {
        self.members.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.members == 0
    }

    /// Coordinates of the coalition's composite point: explicand values for
    /// members, baseline values elsewhere.
    pub fn blend(&self, explicand: &[f64], baseline: &[f64]) -> Vec<f64> {
        (0..self.universe)
            .map(|i| {
                if self.contains(i) {
                    explicand[i]
                } else {
                    baseline[i]
                }
            })
            .collect()
    }
}

/// Exact baseline Shapley attribution: the Shapley value of the coalition
/// game `v(S) = f(explicand on S, baseline elsewhere)`.
///
/// All `2^m` coalition values are evaluated once (memoized by bitmask), and
/// the factorial weights are exact 64-bit integers divided in floating point,
/// so the attribution sum telescopes to `f(x) - f(x')` up to rounding.
pub fn baseline_shapley(
    model: &ModelHandle,
    explicand: &Point,
    baseline: &Point,
) -> Result<AttributionResult> {
    check_triple(model, explicand, baseline)?;
    let m = explicand.dim();
    if m > MAX_SHAPLEY_FEATURES {
        return Err(Error::Capacity {
            dim: m,
            max: MAX_SHAPLEY_FEATURES,
        });
    }

    let x = explicand.coords();
    let b = baseline.coords();

    if x == b {
        return Ok(AttributionResult {
            method: AttributionMethod::BaselineShapley,
            explicand: explicand.clone(),
            baseline: baseline.clone(),
            values: vec![0.0; m],
            completeness_gap: 0.0,
        });
    }

    // v(S) for every coalition, each evaluated exactly once.
    let coalition_values: Vec<f64> = (0u32..1 << m)
        .map(|mask| model.evaluate_raw(&CoalitionIndex::from_mask(mask, m).blend(x, b)))
        .collect();

    // weight[s] = s! (m - 1 - s)! / m!
    let weights = shapley_weights(m);

    let mut values = vec![0.0; m];
    for mask in 0u32..1 << m {
        let s = mask.count_ones() as usize;
        if s == m {
            continue; // full coalition: no feature left to add
        }
        let v_s = coalition_values[mask as usize];
        let w = weights[s];
        for (i, value) in values.iter_mut().enumerate() {
            if mask >> i & 1 == 0 {
                let v_si = coalition_values[(mask | 1 << i) as usize];
                *value += w * (v_si - v_s);
            }
        }
    }

    let full = coalition_values[(1u32 << m) as usize - 1];
    let empty = coalition_values[0];
    let gap = values.iter().sum::<f64>() - (full - empty);

    Ok(AttributionResult {
        method: AttributionMethod::BaselineShapley,
        explicand: explicand.clone(),
        baseline: baseline.clone(),
        values,
        completeness_gap: gap,
    })
}

fn shapley_weights(m: usize) -> Vec<f64> {
    let factorial = |n: usize| -> u64 { (1..=n as u64).product() };
    let m_fact = factorial(m);
    (0..m)
        .map(|s| (factorial(s) * factorial(m - 1 - s)) as f64 / m_fact as f64)
        .collect()
}

fn check_triple(model: &ModelHandle, explicand: &Point, baseline: &Point) -> Result<()> {
    require_same_space(explicand, baseline)?;
    if explicand.dim() != model.arity() {
        return Err(Error::DimensionMismatch {
            expected: model.arity(),
            actual: explicand.dim(),
        });
    }
    if !model.space().same_geometry(explicand.space()) {
        return Err(Error::SpaceMismatch(format!(
            "model `{}` bounds differ from the attribution points",
            model.id()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::FeatureSpace;
    use std::sync::Arc;

    fn quad() -> ModelHandle {
        let s = FeatureSpace::uniform(2, 0.0, 2.0).unwrap();
        ModelHandle::with_analytic_gradient(
            "quad",
            &s,
            |x| 4.5 * x[0] - x[0] * x[0] + 4.0 * x[1] - x[1] * x[1],
            |x| vec![4.5 - 2.0 * x[0], 4.0 - 2.0 * x[1]],
        )
    }

    fn log2() -> ModelHandle {
        let s = FeatureSpace::uniform(2, 0.0, 5.0).unwrap();
        ModelHandle::with_analytic_gradient(
            "log",
            &s,
            |x| (1.0 + 10.0 * x[0] + 9.0 * x[1]).ln(),
            |x| {
                let d = 1.0 + 10.0 * x[0] + 9.0 * x[1];
                vec![10.0 / d, 9.0 / d]
            },
        )
    }

    fn pt(model: &ModelHandle, coords: &[f64]) -> Point {
        Point::new(model.space(), coords.to_vec()).unwrap()
    }

    #[test]
    fn ig_quadratic_is_exact_at_midpoint() {
        let model = quad();
        let b = pt(&model, &[0.0, 0.0]);
        let x = pt(&model, &[2.0, 2.0]);
        let r = integrated_gradients(&model, &x, &b, &IGConfig::default()).unwrap();
        assert!((r.values()[0] - 5.0).abs() < 1e-12, "{:?}", r.values());
        assert!((r.values()[1] - 4.0).abs() < 1e-12);
        assert!(r.completeness_gap().abs() < 1e-12);

        let b2 = pt(&model, &[1.0, 0.0]);
        let r2 = integrated_gradients(&model, &x, &b2, &IGConfig::default()).unwrap();
        assert!((r2.values()[0] - 1.5).abs() < 1e-12);
        assert!((r2.values()[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn ig_trapezoid_also_exact_for_linear_integrand() {
        let model = quad();
        let b = pt(&model, &[0.0, 0.0]);
        let x = pt(&model, &[2.0, 2.0]);
        let cfg = IGConfig {
            steps: 64,
            rule: QuadratureRule::Trapezoid,
        };
        let r = integrated_gradients(&model, &x, &b, &cfg).unwrap();
        assert!((r.values()[0] - 5.0).abs() < 1e-12);
        assert!((r.values()[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn ig_log_example_near_closed_form() {
        let model = log2();
        let b = pt(&model, &[0.0, 0.0]);
        let x = pt(&model, &[4.0, 1.0]);
        let exact = [40.0 / 49.0 * 50f64.ln(), 9.0 / 49.0 * 50f64.ln()];
        let r = integrated_gradients(&model, &x, &b, &IGConfig::default()).unwrap();
        assert!((r.values()[0] - exact[0]).abs() < 1e-3);
        assert!((r.values()[1] - exact[1]).abs() < 1e-3);
    }

    #[test]
    fn ig_zero_segment_returns_zeros() {
        let model = log2();
        let x = pt(&model, &[1.5, 2.5]);
        let r = integrated_gradients(&model, &x, &x.clone(), &IGConfig::default()).unwrap();
        assert_eq!(r.values(), &[0.0, 0.0]);
        assert_eq!(r.completeness_gap(), 0.0);
    }

    #[test]
    fn ig_rejects_bad_step_counts() {
        let model = log2();
        let b = pt(&model, &[0.0, 0.0]);
        let x = pt(&model, &[1.0, 1.0]);
        for steps in [0, 19, 100_001] {
            let cfg = IGConfig {
                steps,
                rule: QuadratureRule::Midpoint,
            };
            assert!(matches!(
                integrated_gradients(&model, &x, &b, &cfg),
                Err(Error::Config(_))
            ));
        }
    }

    #[test]
    fn bshap_harmonic_product_known_value() {
        let s = FeatureSpace::uniform(2, 0.0, 5.0).unwrap();
        let model = ModelHandle::new("h", &s, |x| {
            if x[0] + x[1] == 0.0 {
                0.0
            } else {
                x[0] * x[1] / (x[0] + x[1])
            }
        });
        let b = s.origin().unwrap();
        let x = Point::new(&s, vec![1.0, 1.0]).unwrap();
        let r = baseline_shapley(&model, &x, &b).unwrap();
        assert!((r.values()[0] - 0.25).abs() < 1e-15);
        assert!((r.values()[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn bshap_log_example_matches_two_player_enumeration() {
        let model = log2();
        let b = pt(&model, &[0.0, 0.0]);
        let x = pt(&model, &[4.0, 1.0]);
        let r = baseline_shapley(&model, &x, &b).unwrap();
        let bs1 = 0.5 * 41f64.ln() + 0.5 * 5f64.ln();
        let bs2 = 0.5 * 10f64.ln() + 0.5 * (50f64 / 41.0).ln();
        assert!((r.values()[0] - bs1).abs() < 1e-12);
        assert!((r.values()[1] - bs2).abs() < 1e-12);
        assert!(r.completeness_gap().abs() < 1e-12);
    }

    #[test]
    fn bshap_separable_linear_recovers_coefficients() {
        let s = FeatureSpace::uniform(2, 0.0, 2.0).unwrap();
        let model = ModelHandle::new("lin", &s, |x| 2.0 * x[0] + 3.0 * x[1]);
        let b = s.origin().unwrap();
        let x = Point::new(&s, vec![1.0, 1.0]).unwrap();
        let r = baseline_shapley(&model, &x, &b).unwrap();
        assert!((r.values()[0] - 2.0).abs() < 1e-15);
        assert!((r.values()[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn bshap_capped_linear_brute_force_value() {
        let s = FeatureSpace::uniform(2, 0.0, 5.0).unwrap();
        let model = ModelHandle::new("cap", &s, |x| (0.2 * x[0] + 0.1 * x[1]).min(0.3));
        let b = s.origin().unwrap();
        let x = Point::new(&s, vec![3.0, 1.0]).unwrap();
        let r = baseline_shapley(&model, &x, &b).unwrap();
        assert!((r.values()[0] - 0.25).abs() < 1e-15);
        assert!((r.values()[1] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn bshap_rejects_capacity_overflow() {
        let dim = MAX_SHAPLEY_FEATURES + 1;
        let s = FeatureSpace::uniform(dim, 0.0, 1.0).unwrap();
        let model = ModelHandle::new("big", &s, |x| x.iter().sum());
        let b = s.origin().unwrap();
        let x = Point::new(&s, vec![1.0; dim]).unwrap();
        assert!(matches!(
            baseline_shapley(&model, &x, &b),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn completeness_gap_recompute_matches_recorded() {
        let model = log2();
        let b = pt(&model, &[0.0, 0.0]);
        let x = pt(&model, &[4.0, 1.0]);
        let r = integrated_gradients(&model, &x, &b, &IGConfig::default()).unwrap();
        let gap = completeness_gap(&r, &model).unwrap();
        assert_eq!(gap, r.completeness_gap());
    }

    #[test]
    fn ig_gap_shrinks_with_steps_on_log_model() {
        let model = log2();
        let b = pt(&model, &[0.0, 0.0]);
        let x = pt(&model, &[4.0, 1.0]);
        let coarse = integrated_gradients(&model, &x, &b, &IGConfig::with_steps(50)).unwrap();
        let fine = integrated_gradients(&model, &x, &b, &IGConfig::with_steps(2000)).unwrap();
        assert!(fine.completeness_gap().abs() < coarse.completeness_gap().abs());
        assert!(coarse.completeness_gap().abs() < 0.1);
    }

    #[test]
    fn normalized_values_and_undefined_flags() {
        let model = quad();
        let b = pt(&model, &[0.0, 0.0]);
        let x = pt(&model, &[2.0, 2.0]);
        let r = integrated_gradients(&model, &x, &b, &IGConfig::default()).unwrap();
        let norm = r.normalized();
        assert!((norm[0].unwrap() - 2.5).abs() < 1e-12);
        assert!((norm[1].unwrap() - 2.0).abs() < 1e-12);

        // Explicand equal to baseline on feature 1: undefined there.
        let x2 = pt(&model, &[2.0, 0.0]);
        let r2 = integrated_gradients(&model, &x2, &b, &IGConfig::default()).unwrap();
        assert!(r2.normalized()[1].is_none());
        assert!(r2.normalized_at(0).is_ok());
        assert!(matches!(r2.normalized_at(1), Err(Error::Parameter(_))));
    }

    #[test]
    fn log_normalized_values_match_derived_constants() {
        let model = log2();
        let b = pt(&model, &[0.0, 0.0]);
        let x = pt(&model, &[4.0, 1.0]);
        let bs = baseline_shapley(&model, &x, &b).unwrap();
        let n = bs.normalized();
        assert!((n[0].unwrap() - 0.6653762473923011).abs() < 1e-12);
        assert!((n[1].unwrap() - 1.2505180158589422).abs() < 1e-12);
    }

    #[test]
    fn engines_reject_mismatched_spaces() {
        let model = quad();
        let other = FeatureSpace::uniform(2, 0.0, 3.0).unwrap();
        let b = Arc::clone(&other).origin().unwrap();
        let x = Point::new(&other, vec![1.0, 1.0]).unwrap();
        assert!(integrated_gradients(&model, &x, &b, &IGConfig::default()).is_err());
        assert!(baseline_shapley(&model, &x, &b).is_err());
    }

    #[test]
    fn coalition_blend_mixes_explicand_and_baseline() {
        let c = CoalitionIndex::from_mask(0b101, 3);
        assert_eq!(
            c.blend(&[1.0, 2.0, 3.0], &[9.0, 9.0, 9.0]),
            vec![1.0, 9.0, 3.0]
        );
        assert_eq!(c.len(), 2);
        assert!(c.contains(0) && !c.contains(1) && c.contains(2));
        assert_eq!(c.with(1).mask(), 0b111);
    }
}
