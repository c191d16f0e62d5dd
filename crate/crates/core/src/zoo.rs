//! Worked example models with closed-form attribution oracles.
//!
//! These four small functions exercise every monotonicity regime the
//! auditors care about, and each ships hand-derived closed forms for one or
//! both attribution methods. The oracles are independent of the engines and
//! serve as ground truth in the test suites.

use std::sync::Arc;

use crate::attribution::AttributionMethod;
use crate::error::{Error, Result};
use crate::model::{ModelHandle, ModelRegistry, MonotoneSpec};
use crate::space::{FeatureSpace, Point};

/// Closed-form attribution: `(explicand, baseline) -> values`.
pub type OracleFn = fn(&[f64], &[f64]) -> Result<Vec<f64>>;

/// A registered example: model, domain, monotonicity declaration, and the
/// closed-form oracles available for it.
#[derive(Debug, Clone)]
pub struct NamedExample {
    id: &'static str,
    model: ModelHandle,
    spec: MonotoneSpec,
    ig_oracle: Option<OracleFn>,
    bshap_oracle: Option<OracleFn>,
}

impl NamedExample {
    pub fn id(&self) -> &'static str {
        self.id
    }

    pub fn model(&self) -> &ModelHandle {
        &self.model
    }

    pub fn space(&self) -> &Arc<FeatureSpace> {
        self.model.space()
    }

    pub fn spec(&self) -> &MonotoneSpec {
        &self.spec
    }

    /// Closed-form attribution for `method`, or an oracle-unavailable error
    /// when no closed form covers the requested baseline.
    pub fn oracle(
        &self,
        method: AttributionMethod,
        explicand: &Point,
        baseline: &Point,
    ) -> Result<Vec<f64>> {
        let f = match method {
            AttributionMethod::IntegratedGradients => self.ig_oracle,
            AttributionMethod::BaselineShapley => self.bshap_oracle,
        };
        match f {
            Some(f) => f(explicand.coords(), baseline.coords()),
            None => Err(Error::OracleUnavailable(format!(
                "example `{}` has no {method} closed form",
                self.id
            ))),
        }
    }
}

/// Ids of all registered examples, in lookup order.
pub const EXAMPLE_IDS: [&str; 4] = [
    "harmonic_product",
    "capped_linear",
    "quadratic_separable",
    "log_diminishing",
];

/// Looks up a worked example by id.
pub fn get_example(id: &str) -> Result<NamedExample> {
    match id {
        "harmonic_product" => Ok(harmonic_product()),
        "capped_linear" => Ok(capped_linear()),
        "quadratic_separable" => Ok(quadratic_separable()),
        "log_diminishing" => Ok(log_diminishing()),
        other => Err(Error::UnknownExample {
            id: other.to_string(),
            available: EXAMPLE_IDS.join(", "),
        }),
    }
}

/// Closed-form attribution values for a named example.
pub fn oracle_attribution(
    id: &str,
    method: AttributionMethod,
    explicand: &Point,
    baseline: &Point,
) -> Result<Vec<f64>> {
    get_example(id)?.oracle(method, explicand, baseline)
}

/// Registers every example's model into a registry under its example id.
pub fn register_all(registry: &mut ModelRegistry) {
    for id in EXAMPLE_IDS {
        registry.register(get_example(id).expect("builtin example").model().clone());
    }
}

/// `f(x1, x2) = x1 x2 / (x1 + x2)` on `[0, 5]^2`, extended by continuity to
/// `f = 0` where `x1 + x2 = 0`.
///
/// Both features are individually monotone and the function is symmetric, so
/// no priority pairs are declared. This is the canonical function on which
/// raising a feature can *lower* its integrated-gradients attribution.
pub fn harmonic_product() -> NamedExample {
    let space = FeatureSpace::uniform(2, 0.0, 5.0).unwrap();
    let model = ModelHandle::with_analytic_gradient(
        "harmonic_product",
        &space,
        |x| {
            let s = x[0] + x[1];
            if s == 0.0 {
                0.0
            } else {
                x[0] * x[1] / s
            }
        },
        |x| {
            let s = x[0] + x[1];
            if s == 0.0 {
                // Measure-zero corner; the value is a documented convention.
                vec![0.0, 0.0]
            } else {
                vec![x[1] * x[1] / (s * s), x[0] * x[0] / (s * s)]
            }
        },
    );
    NamedExample {
        id: "harmonic_product",
        model,
        spec: MonotoneSpec::individual_only([0, 1]).unwrap(),
        ig_oracle: Some(harmonic_ig),
        bshap_oracle: Some(harmonic_bshap),
    }
}

fn require_zero_baseline(id: &str, baseline: &[f64]) -> Result<()> {
    if baseline.iter().any(|&b| b != 0.0) {
        return Err(Error::OracleUnavailable(format!(
            "`{id}` closed form is derived for the zero baseline only"
        )));
    }
    Ok(())
}

// Along the ray t -> t * (x1, x2) the partial df/dx1 = x2^2 / (x1 + x2)^2 is
// constant, so the path integral collapses to that constant.
fn harmonic_ig(x: &[f64], baseline: &[f64]) -> Result<Vec<f64>> {
    require_zero_baseline("harmonic_product", baseline)?;
    let s = x[0] + x[1];
    if s == 0.0 {
        return Ok(vec![0.0, 0.0]);
    }
    Ok(vec![
        x[0] * x[1] * x[1] / (s * s),
        x[1] * x[0] * x[0] / (s * s),
    ])
}

// Each feature alone contributes nothing (f(x1, 0) = f(0, x2) = 0), so both
// marginals equal f/2.
fn harmonic_bshap(x: &[f64], baseline: &[f64]) -> Result<Vec<f64>> {
    require_zero_baseline("harmonic_product", baseline)?;
    let s = x[0] + x[1];
    if s == 0.0 {
        return Ok(vec![0.0, 0.0]);
    }
    let half = x[0] * x[1] / (2.0 * s);
    Ok(vec![half, half])
}

/// `f(x1, x2) = min(0.2 x1 + 0.1 x2, 0.3)` on `[0, 5]^2`.
///
/// Strongly monotone in feature 1 over feature 2 (the slope in `x1` weakly
/// dominates everywhere, including past the cap where both vanish). Past the
/// cap, per-unit attributions become path-dependent: different explicands
/// with the same value can argue for different splits, so no single
/// attribution matches every intuition here.
pub fn capped_linear() -> NamedExample {
    let space = FeatureSpace::uniform(2, 0.0, 5.0).unwrap();
    let model = ModelHandle::with_analytic_gradient(
        "capped_linear",
        &space,
        |x| (0.2 * x[0] + 0.1 * x[1]).min(0.3),
        |x| {
            if 0.2 * x[0] + 0.1 * x[1] < 0.3 {
                vec![0.2, 0.1]
            } else {
                vec![0.0, 0.0]
            }
        },
    );
    NamedExample {
        id: "capped_linear",
        model,
        spec: MonotoneSpec::new([0, 1], vec![], vec![(0, 1)]).unwrap(),
        ig_oracle: Some(capped_ig),
        bshap_oracle: Some(capped_bshap),
    }
}

const CAP_W: [f64; 2] = [0.2, 0.1];
const CAP: f64 = 0.3;

// The weighted sum is affine along the segment, so the gradient is
// (0.2, 0.1) on the sub-cap part of the path and zero past the cap; the
// integral is the sub-cap fraction of the segment. Handles any baseline.
fn capped_ig(x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let z0 = CAP_W[0] * b[0] + CAP_W[1] * b[1];
    let z1 = CAP_W[0] * x[0] + CAP_W[1] * x[1];
    // Fraction of t in [0, 1] with z0 + t (z1 - z0) < CAP.
    let frac = if (z1 - z0).abs() == 0.0 {
        if z0 < CAP {
            1.0
        } else {
            0.0
        }
    } else {
        let t_cross = (CAP - z0) / (z1 - z0);
        if z1 > z0 {
            t_cross.clamp(0.0, 1.0)
        } else {
            1.0 - t_cross.clamp(0.0, 1.0)
        }
    };
    Ok(vec![
        (x[0] - b[0]) * CAP_W[0] * frac,
        (x[1] - b[1]) * CAP_W[1] * frac,
    ])
}

// Two-player game written out: each value is the average of the feature's
// marginal against the baseline and against the other feature present.
fn capped_bshap(x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let f = |u: f64, v: f64| (CAP_W[0] * u + CAP_W[1] * v).min(CAP);
    let v0 = f(b[0], b[1]);
    let v1 = f(x[0], b[1]);
    let v2 = f(b[0], x[1]);
    let v12 = f(x[0], x[1]);
    Ok(vec![
        0.5 * (v1 - v0) + 0.5 * (v12 - v2),
        0.5 * (v2 - v0) + 0.5 * (v12 - v1),
    ])
}

/// `f(x1, x2) = 4.5 x1 - x1^2 + 4 x2 - x2^2` on `[0, 2]^2`.
///
/// Individually monotone on the box (both slopes stay nonnegative) and
/// weakly monotone in feature 1 over feature 2: at equal coordinate values
/// the first slope exceeds the second by exactly 0.5. The priority does
/// *not* hold at unequal values, so no strong pair is declared.
pub fn quadratic_separable() -> NamedExample {
    let space = FeatureSpace::uniform(2, 0.0, 2.0).unwrap();
    let model = ModelHandle::with_analytic_gradient(
        "quadratic_separable",
        &space,
        |x| 4.5 * x[0] - x[0] * x[0] + 4.0 * x[1] - x[1] * x[1],
        |x| vec![4.5 - 2.0 * x[0], 4.0 - 2.0 * x[1]],
    );
    NamedExample {
        id: "quadratic_separable",
        model,
        spec: MonotoneSpec::new([0, 1], vec![(0, 1)], vec![]).unwrap(),
        ig_oracle: Some(quadratic_oracle),
        bshap_oracle: Some(quadratic_oracle),
    }
}

// Additively separable, so both methods coincide and reduce to per-feature
// differences; exact for any baseline.
fn quadratic_oracle(x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let part = |w: f64, u: f64, v: f64| (u - v) * (w - (u + v));
    Ok(vec![part(4.5, x[0], b[0]), part(4.0, x[1], b[1])])
}

/// `f(x1, x2) = ln(1 + 10 x1 + 9 x2)` on `[0, 5]^2`.
///
/// A diminishing-returns wrapper of a weighted sum: strongly monotone in
/// feature 1 over feature 2 because the weight 10 dominates 9 pointwise.
pub fn log_diminishing() -> NamedExample {
    let space = FeatureSpace::uniform(2, 0.0, 5.0).unwrap();
    let model = ModelHandle::with_analytic_gradient(
        "log_diminishing",
        &space,
        |x| (1.0 + 10.0 * x[0] + 9.0 * x[1]).ln(),
        |x| {
            let d = 1.0 + 10.0 * x[0] + 9.0 * x[1];
            vec![10.0 / d, 9.0 / d]
        },
    );
    NamedExample {
        id: "log_diminishing",
        model,
        spec: MonotoneSpec::new([0, 1], vec![], vec![(0, 1)]).unwrap(),
        ig_oracle: Some(log_ig),
        bshap_oracle: Some(log_bshap),
    }
}

const LOG_W: [f64; 2] = [10.0, 9.0];

// integral over [0,1] of w_i / (a + t d) dt = (w_i / d) ln((a + d) / a) with
// a = 1 + w.b and d = w.(x - b); exact for any baseline.
fn log_ig(x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let a = 1.0 + LOG_W[0] * b[0] + LOG_W[1] * b[1];
    let d = LOG_W[0] * (x[0] - b[0]) + LOG_W[1] * (x[1] - b[1]);
    let avg = if d.abs() < 1e-300 {
        1.0 / a
    } else {
        ((a + d) / a).ln() / d
    };
    Ok(vec![
        (x[0] - b[0]) * LOG_W[0] * avg,
        (x[1] - b[1]) * LOG_W[1] * avg,
    ])
}

fn log_bshap(x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let f = |u: f64, v: f64| (1.0 + LOG_W[0] * u + LOG_W[1] * v).ln();
    let v0 = f(b[0], b[1]);
    let v1 = f(x[0], b[1]);
    let v2 = f(b[0], x[1]);
    let v12 = f(x[0], x[1]);
    Ok(vec![
        0.5 * (v1 - v0) + 0.5 * (v12 - v2),
        0.5 * (v2 - v0) + 0.5 * (v12 - v1),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(ex: &NamedExample, coords: &[f64]) -> Point {
        Point::new(ex.space(), coords.to_vec()).unwrap()
    }

    #[test]
    fn unknown_id_lists_available_examples() {
        match get_example("nope") {
            Err(Error::UnknownExample { available, .. }) => {
                assert!(available.contains("log_diminishing"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn harmonic_oracles_match_published_forms() {
        let ex = get_example("harmonic_product").unwrap();
        let b = ex.space().origin().unwrap();
        let x = pt(&ex, &[2.0, 1.0]);
        let ig = ex
            .oracle(AttributionMethod::IntegratedGradients, &x, &b)
            .unwrap();
        assert!((ig[0] - 2.0 / 9.0).abs() < 1e-15);
        let x31 = pt(&ex, &[3.0, 1.0]);
        let ig31 = ex
            .oracle(AttributionMethod::IntegratedGradients, &x31, &b)
            .unwrap();
        assert!((ig31[0] - 0.1875).abs() < 1e-15);

        let bs = ex
            .oracle(AttributionMethod::BaselineShapley, &x, &b)
            .unwrap();
        assert!((bs[0] - 2.0 / 6.0).abs() < 1e-15);
        let bs11 = ex
            .oracle(
                AttributionMethod::BaselineShapley,
                &pt(&ex, &[1.0, 1.0]),
                &b,
            )
            .unwrap();
        assert!((bs11[0] - 0.25).abs() < 1e-15 && (bs11[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn harmonic_oracle_rejects_shifted_baseline() {
        let ex = get_example("harmonic_product").unwrap();
        let b = pt(&ex, &[1.0, 0.0]);
        let x = pt(&ex, &[2.0, 1.0]);
        assert!(matches!(
            ex.oracle(AttributionMethod::IntegratedGradients, &x, &b),
            Err(Error::OracleUnavailable(_))
        ));
    }

    #[test]
    fn log_ig_oracle_matches_derived_constants() {
        let ex = get_example("log_diminishing").unwrap();
        let b = ex.space().origin().unwrap();
        let x = pt(&ex, &[4.0, 1.0]);
        let ig = ex
            .oracle(AttributionMethod::IntegratedGradients, &x, &b)
            .unwrap();
        assert!((ig[0] - 3.193488167696446).abs() < 1e-12);
        assert!((ig[1] - 0.7185348377317003).abs() < 1e-12);
    }

    #[test]
    fn quadratic_oracle_matches_published_values() {
        let ex = get_example("quadratic_separable").unwrap();
        let b0 = ex.space().origin().unwrap();
        let x = pt(&ex, &[2.0, 2.0]);
        assert_eq!(
            ex.oracle(AttributionMethod::IntegratedGradients, &x, &b0)
                .unwrap(),
            vec![5.0, 4.0]
        );
        let b10 = pt(&ex, &[1.0, 0.0]);
        assert_eq!(
            ex.oracle(AttributionMethod::IntegratedGradients, &x, &b10)
                .unwrap(),
            vec![1.5, 4.0]
        );
    }

    #[test]
    fn oracles_satisfy_completeness_identically() {
        for id in EXAMPLE_IDS {
            let ex = get_example(id).unwrap();
            let b = ex.space().origin().unwrap();
            for coords in [[0.7, 0.3], [1.9, 0.2], [0.4, 1.6], [2.0, 2.0]] {
                let x = pt(&ex, &coords);
                let fx = ex.model().evaluate(&x).unwrap();
                let fb = ex.model().evaluate(&b).unwrap();
                for method in [
                    AttributionMethod::IntegratedGradients,
                    AttributionMethod::BaselineShapley,
                ] {
                    let vals = ex.oracle(method, &x, &b).unwrap();
                    let sum: f64 = vals.iter().sum();
                    assert!(
                        (sum - (fx - fb)).abs() < 1e-12,
                        "{id} {method} at {coords:?}: sum {sum} vs {}",
                        fx - fb
                    );
                }
            }
        }
    }

    #[test]
    fn capped_ig_oracle_handles_cap_crossing_paths() {
        let ex = get_example("capped_linear").unwrap();
        let b = ex.space().origin().unwrap();
        let x = pt(&ex, &[3.0, 1.0]);
        let ig = ex
            .oracle(AttributionMethod::IntegratedGradients, &x, &b)
            .unwrap();
        let t_cross: f64 = 3.0 / 7.0;
        assert!((ig[0] - 3.0 * 0.2 * t_cross).abs() < 1e-15);
        assert!((ig[1] - 1.0 * 0.1 * t_cross).abs() < 1e-15);
        // Entirely past the cap: no change, zero attribution.
        let b_hi = pt(&ex, &[2.0, 0.0]);
        let x_hi = pt(&ex, &[3.0, 2.0]);
        let flat = ex
            .oracle(AttributionMethod::IntegratedGradients, &x_hi, &b_hi)
            .unwrap();
        assert_eq!(flat, vec![0.0, 0.0]);
    }

    #[test]
    fn harmonic_origin_is_continuous_extension() {
        let ex = get_example("harmonic_product").unwrap();
        let origin = ex.space().origin().unwrap();
        assert_eq!(ex.model().evaluate(&origin).unwrap(), 0.0);
        let ig = ex
            .oracle(AttributionMethod::IntegratedGradients, &origin, &origin)
            .unwrap();
        assert_eq!(ig, vec![0.0, 0.0]);
    }

    #[test]
    fn register_all_exposes_every_example() {
        let mut reg = ModelRegistry::new();
        register_all(&mut reg);
        for id in EXAMPLE_IDS {
            assert!(reg.get(id).is_ok());
        }
    }
}
