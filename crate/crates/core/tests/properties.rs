//! Cross-module invariants: the baseline-attribution contract, engine
//! axioms (dummy, symmetry, linearity), quadrature behavior, and gradient
//! consistency.

use proptest::prelude::*;

use mono_attrib::attribution::{baseline_shapley, integrated_gradients, IGConfig, QuadratureRule};
use mono_attrib::monotonicity::{check_effective_weak_pairwise, ProbeConfig, Verdict};
use mono_attrib::space::path_point;
use mono_attrib::zoo;
use mono_attrib::{FeatureSpace, ModelHandle, Point};

proptest! {
    /// Interpolants of two in-bounds points never leave the box.
    #[test]
    fn path_points_stay_in_bounds(
        dims in 1usize..5,
        seed_a in prop::collection::vec(0.0f64..1.0, 5),
        seed_b in prop::collection::vec(0.0f64..1.0, 5),
        t in 0.0f64..=1.0,
    ) {
        let space = FeatureSpace::uniform(dims, -2.0, 3.0).unwrap();
        let coords = |u: &[f64]| -> Vec<f64> {
            (0..dims).map(|i| -2.0 + 5.0 * u[i]).collect()
        };
        let a = Point::new(&space, coords(&seed_a)).unwrap();
        let b = Point::new(&space, coords(&seed_b)).unwrap();
        let p = path_point(&a, &b, t).unwrap();
        space.check(p.coords()).unwrap();
    }

    /// Zero-at-baseline: an explicand equal to the baseline attributes zero
    /// under both engines, with zero completeness gap.
    #[test]
    fn bam_contract_zero_at_baseline(
        x in 0.0f64..5.0,
        y in 0.0f64..5.0,
        steps in 20usize..200,
    ) {
        let ex = zoo::get_example("log_diminishing").unwrap();
        let p = Point::new(ex.space(), vec![x, y]).unwrap();
        let ig = integrated_gradients(ex.model(), &p, &p, &IGConfig::with_steps(steps)).unwrap();
        prop_assert_eq!(ig.values(), &[0.0, 0.0]);
        prop_assert_eq!(ig.completeness_gap(), 0.0);
        let bs = baseline_shapley(ex.model(), &p, &p).unwrap();
        prop_assert_eq!(bs.values(), &[0.0, 0.0]);
    }

    /// A coordinate the model ignores receives zero attribution.
    #[test]
    fn dummy_feature_gets_zero(
        x in prop::collection::vec(0.0f64..2.0, 3),
        b in prop::collection::vec(0.0f64..2.0, 3),
    ) {
        let space = FeatureSpace::uniform(3, 0.0, 2.0).unwrap();
        let model = ModelHandle::with_analytic_gradient(
            "ignores_middle",
            &space,
            |v| 2.0 * v[0] + v[2] * v[2],
            |v| vec![2.0, 0.0, 2.0 * v[2]],
        );
        let xp = Point::new(&space, x).unwrap();
        let bp = Point::new(&space, b).unwrap();
        let ig = integrated_gradients(&model, &xp, &bp, &IGConfig::default()).unwrap();
        prop_assert!(ig.values()[1].abs() <= 1e-12);
        let bs = baseline_shapley(&model, &xp, &bp).unwrap();
        prop_assert!(bs.values()[1].abs() <= 1e-12);
    }

    /// Attributions are additive across models (both engines).
    #[test]
    fn linearity_over_models(
        x1 in 0.0f64..2.0,
        x2 in 0.0f64..2.0,
        b1 in 0.0f64..2.0,
        b2 in 0.0f64..2.0,
    ) {
        let space = FeatureSpace::uniform(2, 0.0, 2.0).unwrap();
        let f = ModelHandle::with_analytic_gradient(
            "f",
            &space,
            |v| (1.0 + 10.0 * v[0] + 9.0 * v[1]).ln(),
            |v| {
                let d = 1.0 + 10.0 * v[0] + 9.0 * v[1];
                vec![10.0 / d, 9.0 / d]
            },
        );
        let g = ModelHandle::with_analytic_gradient(
            "g",
            &space,
            |v| 4.5 * v[0] - v[0] * v[0] + 4.0 * v[1] - v[1] * v[1],
            |v| vec![4.5 - 2.0 * v[0], 4.0 - 2.0 * v[1]],
        );
        let sum = ModelHandle::with_analytic_gradient(
            "f_plus_g",
            &space,
            |v| {
                (1.0 + 10.0 * v[0] + 9.0 * v[1]).ln()
                    + 4.5 * v[0] - v[0] * v[0] + 4.0 * v[1] - v[1] * v[1]
            },
            |v| {
                let d = 1.0 + 10.0 * v[0] + 9.0 * v[1];
                vec![10.0 / d + 4.5 - 2.0 * v[0], 9.0 / d + 4.0 - 2.0 * v[1]]
            },
        );
        let xp = Point::new(&space, vec![x1, x2]).unwrap();
        let bp = Point::new(&space, vec![b1, b2]).unwrap();
        let cfg = IGConfig::default();
        let ig_f = integrated_gradients(&f, &xp, &bp, &cfg).unwrap();
        let ig_g = integrated_gradients(&g, &xp, &bp, &cfg).unwrap();
        let ig_sum = integrated_gradients(&sum, &xp, &bp, &cfg).unwrap();
        for i in 0..2 {
            prop_assert!(
                (ig_sum.values()[i] - (ig_f.values()[i] + ig_g.values()[i])).abs() <= 1e-9
            );
        }
        let bs_f = baseline_shapley(&f, &xp, &bp).unwrap();
        let bs_g = baseline_shapley(&g, &xp, &bp).unwrap();
        let bs_sum = baseline_shapley(&sum, &xp, &bp).unwrap();
        for i in 0..2 {
            prop_assert!(
                (bs_sum.values()[i] - (bs_f.values()[i] + bs_g.values()[i])).abs() <= 1e-9
            );
        }
    }

    /// Swapping the two coordinates of a symmetric model swaps the Shapley
    /// attributions exactly.
    #[test]
    fn bshap_symmetry_is_exact(
        x1 in 0.01f64..5.0,
        x2 in 0.01f64..5.0,
    ) {
        let ex = zoo::get_example("harmonic_product").unwrap();
        let b = ex.space().origin().unwrap();
        let p = Point::new(ex.space(), vec![x1, x2]).unwrap();
        let q = Point::new(ex.space(), vec![x2, x1]).unwrap();
        let r_p = baseline_shapley(ex.model(), &p, &b).unwrap();
        let r_q = baseline_shapley(ex.model(), &q, &b).unwrap();
        prop_assert_eq!(r_p.values()[0], r_q.values()[1]);
        prop_assert_eq!(r_p.values()[1], r_q.values()[0]);
    }
}

#[test]
fn bshap_symmetry_three_features() {
    let space = FeatureSpace::uniform(3, 0.0, 2.0).unwrap();
    let model = ModelHandle::new("sym01", &space, |v| {
        v[0].min(v[1]) + v[0] * v[1] + 0.5 * v[2]
    });
    let b = space.origin().unwrap();
    let p = Point::new(&space, vec![1.3, 0.4, 1.0]).unwrap();
    let q = Point::new(&space, vec![0.4, 1.3, 1.0]).unwrap();
    let r_p = baseline_shapley(&model, &p, &b).unwrap();
    let r_q = baseline_shapley(&model, &q, &b).unwrap();
    assert!((r_p.values()[0] - r_q.values()[1]).abs() <= 1e-12);
    assert!((r_p.values()[1] - r_q.values()[0]).abs() <= 1e-12);
    assert!((r_p.values()[2] - r_q.values()[2]).abs() <= 1e-12);
}

#[test]
fn repeated_evaluation_is_bit_identical() {
    let ex = zoo::get_example("log_diminishing").unwrap();
    let p = Point::new(ex.space(), vec![1.234, 4.321]).unwrap();
    let v1 = ex.model().evaluate(&p).unwrap();
    let v2 = ex.model().evaluate(&p).unwrap();
    assert_eq!(v1.to_bits(), v2.to_bits());

    let b = ex.space().origin().unwrap();
    let r1 = integrated_gradients(ex.model(), &p, &b, &IGConfig::default()).unwrap();
    let r2 = integrated_gradients(ex.model(), &p, &b, &IGConfig::default()).unwrap();
    assert_eq!(r1.values(), r2.values());
}

/// The sum-signature quadrature from the common one-sided approximation
/// (gradients at t = k/n); midpoint should beat it at equal cost.
fn right_riemann_ig(model: &ModelHandle, x: &Point, b: &Point, n: usize) -> Vec<f64> {
    let m = x.dim();
    let mut avg = vec![0.0; m];
    for k in 1..=n {
        let t = k as f64 / n as f64;
        let coords: Vec<f64> = b
            .coords()
            .iter()
            .zip(x.coords())
            .map(|(&bi, &xi)| bi + t * (xi - bi))
            .collect();
        let g = model.gradient_raw(&coords);
        for (a, gi) in avg.iter_mut().zip(&g) {
            *a += gi;
        }
    }
    avg.iter()
        .zip(x.coords().iter().zip(b.coords()))
        .map(|(&a, (&xi, &bi))| (xi - bi) * a / n as f64)
        .collect()
}

#[test]
fn midpoint_dominates_the_one_sided_sum_at_equal_cost() {
    let ex = zoo::get_example("log_diminishing").unwrap();
    let b = ex.space().origin().unwrap();
    let x = Point::new(ex.space(), vec![4.0, 1.0]).unwrap();
    let exact = ex
        .oracle(
            mono_attrib::attribution::AttributionMethod::IntegratedGradients,
            &x,
            &b,
        )
        .unwrap();

    let midpoint = integrated_gradients(ex.model(), &x, &b, &IGConfig::with_steps(300)).unwrap();
    let riemann = right_riemann_ig(ex.model(), &x, &b, 300);
    for i in 0..2 {
        let err_mid = (midpoint.values()[i] - exact[i]).abs();
        let err_rie = (riemann[i] - exact[i]).abs();
        assert!(
            err_mid < err_rie,
            "component {i}: midpoint {err_mid:.3e} vs one-sided {err_rie:.3e}"
        );
        assert!(err_rie < 0.2, "one-sided sum is still a sane cross-check");
    }
}

#[test]
fn trapezoid_and_midpoint_agree_on_smooth_models() {
    let ex = zoo::get_example("log_diminishing").unwrap();
    let b = ex.space().origin().unwrap();
    let x = Point::new(ex.space(), vec![3.0, 2.0]).unwrap();
    let mid = integrated_gradients(ex.model(), &x, &b, &IGConfig::with_steps(2000)).unwrap();
    let trap = integrated_gradients(
        ex.model(),
        &x,
        &b,
        &IGConfig {
            steps: 2000,
            rule: QuadratureRule::Trapezoid,
        },
    )
    .unwrap();
    for i in 0..2 {
        // Both rules carry O(n^-2) truncation here; they straddle the true
        // value with a 2:1 error ratio, so the gap is ~3x the midpoint error.
        assert!((mid.values()[i] - trap.values()[i]).abs() < 1e-4);
    }
}

/// Analytic gradients agree with central differences well inside the box
/// (`10 h^2` relative at `h = 1e-5`).
#[test]
fn gradient_consistency_on_analytic_models() {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(314);
    for id in ["harmonic_product", "log_diminishing", "quadratic_separable"] {
        let ex = zoo::get_example(id).unwrap();
        let model = ex.model();
        let fd = {
            let inner = model.clone();
            ModelHandle::new("fd", model.space(), move |c: &[f64]| inner.evaluate_raw(c))
        };
        for _ in 0..100 {
            let coords: Vec<f64> = (0..2)
                .map(|i| {
                    let lo = model.space().lower()[i] + 0.05 * model.space().range(i);
                    let hi = model.space().upper()[i] - 0.05 * model.space().range(i);
                    lo + (hi - lo) * rng.random::<f64>()
                })
                .collect();
            let analytic = model.gradient_raw(&coords);
            let numeric = fd.gradient_raw(&coords);
            for i in 0..2 {
                let denom = analytic[i].abs().max(1e-9);
                let rel = ((analytic[i] - numeric[i]) / denom).abs();
                assert!(rel <= 1e-9, "{id} at {coords:?}: relative error {rel:.3e}");
            }
        }
    }
}

#[test]
fn constructive_models_also_pass_the_weak_check() {
    use mono_attrib::additive::{build_model, Architecture};
    let space = mono_attrib::data::credit_feature_space();
    for seed in [1u64, 2, 3] {
        let model = build_model("m", &space, &Architecture::grouped(vec![0, 1, 2]), seed).unwrap();
        let report = check_effective_weak_pairwise(
            &model.handle(),
            &model.monotone_spec(),
            &ProbeConfig {
                samples: 3000,
                seed,
                ..ProbeConfig::default()
            },
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::NoViolationFound);
    }
}
