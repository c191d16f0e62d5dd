//! Audits whether an attribution method preserves the monotonicity axioms on
//! a given model.
//!
//! Four properties are probed, always relative to a declared
//! [`MonotoneSpec`]:
//!
//! - **DIM** (demand individual monotonicity): raising a monotone feature's
//!   value never lowers that feature's attribution.
//! - **AIM** (average individual monotonicity): a monotone feature's
//!   attribution is nonnegative whenever the explicand dominates the
//!   baseline.
//! - **AWPM** (average weak pairwise monotonicity): at equal coordinate
//!   values, the dominant feature's displacement-normalized attribution is
//!   at least the dominated one's.
//! - **ASPM** (average strong pairwise monotonicity): the same comparison at
//!   arbitrary coordinate values.
//!
//! Violations come with self-contained certificates; clean runs report
//! `no-violation-found` (sampling cannot prove the universally quantified
//! statements). Verdicts record the worst completeness residual seen so a
//! marginal certificate can be judged against quadrature noise.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attribution::{attribute, AttributionMethod, AttributionResult, IGConfig};
use crate::error::{Error, Result};
use crate::model::{ModelHandle, MonotoneSpec};
use crate::monotonicity::{
    check_effective_weak_pairwise, check_individual, check_strong_pairwise, FeatureOrPair,
    MonotonicityReport, ProbeConfig, Verdict,
};
use crate::sampling::{choose, sample_rng, uniform, uniform_point};
use crate::space::Point;

/// Default attribution-level violation tolerance.
pub const DEFAULT_AXIOM_TOLERANCE: f64 = 1e-7;

/// The four audited axioms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Axiom {
    Dim,
    Aim,
    Awpm,
    Aspm,
}

impl Axiom {
    pub const ALL: [Axiom; 4] = [Axiom::Dim, Axiom::Aim, Axiom::Awpm, Axiom::Aspm];
}

impl std::fmt::Display for Axiom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axiom::Dim => f.write_str("DIM"),
            Axiom::Aim => f.write_str("AIM"),
            Axiom::Awpm => f.write_str("AWPM"),
            Axiom::Aspm => f.write_str("ASPM"),
        }
    }
}

/// Configuration for sampled axiom checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheckConfig {
    pub samples: usize,
    /// Perturbation ladder for demand checks, as fractions of feature range.
    pub delta_fractions: Vec<f64>,
    pub seed: u64,
    /// Attribution-level tolerance. Must sit above the engine noise floor
    /// (for integrated gradients, the completeness residual at the
    /// configured step count); verdicts record the residual so this can be
    /// audited after the fact.
    pub tolerance: f64,
    pub ig: IGConfig,
    /// Cap on retained certificates (all violations still count).
    pub max_certificates: usize,
}

impl Default for AxiomCheckConfig {
    fn default() -> Self {
        Self {
            samples: 5000,
            delta_fractions: crate::monotonicity::DEFAULT_DELTA_FRACTIONS.to_vec(),
            seed: 0,
            tolerance: DEFAULT_AXIOM_TOLERANCE,
            ig: IGConfig::default(),
            max_certificates: 1000,
        }
    }
}

impl AxiomCheckConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        self.ig.validate()?;
        if self.delta_fractions.is_empty() {
            return Err(Error::Config("perturbation ladder is empty".into()));
        }
        for &d in &self.delta_fractions {
            if !(d > 0.0 && d <= 1.0) || !d.is_finite() {
                return Err(Error::Config(format!(
                    "perturbation fractions must lie in (0, 1], got {d}"
                )));
            }
        }
        if self.tolerance < 0.0 {
            return Err(Error::Config("tolerance must be nonnegative".into()));
        }
        if self.max_certificates == 0 {
            // A violated verdict must retain at least one certificate.
            return Err(Error::Config("max_certificates must be at least 1".into()));
        }
        Ok(())
    }
}

/// A self-contained axiom violation: enough data to recompute both
/// attributions and reproduce the margin.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomCertificate {
    pub case: u64,
    pub feature_or_pair: FeatureOrPair,
    pub explicand: Point,
    /// The raised explicand (demand checks only).
    pub perturbed: Option<Point>,
    /// Raw perturbation size (demand checks only).
    pub delta: Option<f64>,
    /// Attribution vector at `explicand`.
    pub attributions: Vec<f64>,
    /// Attribution vector at `perturbed` (demand checks only).
    pub perturbed_attributions: Option<Vec<f64>>,
    /// Displacement-normalized values (dominant, dominated) for pairwise
    /// checks.
    pub normalized: Option<(f64, f64)>,
    /// Amount by which the axiom inequality fails; strictly above tolerance.
    pub margin: f64,
    /// Worst completeness residual among the attributions involved.
    pub completeness_gap: f64,
}

/// Verdict of one (axiom, method) audit on one model/baseline.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomVerdict {
    pub axiom: Axiom,
    pub method: AttributionMethod,
    pub model_id: String,
    pub baseline: Point,
    /// Cases whose inequality was actually evaluated.
    pub checked: u64,
    /// Cases skipped because a normalization precondition failed.
    pub skipped: u64,
    /// Total violations found (may exceed the retained certificates).
    pub violations: u64,
    pub certificates: Vec<AxiomCertificate>,
    pub verdict: Verdict,
    /// Largest `|completeness gap|` observed across all attribution calls.
    pub max_completeness_gap: f64,
}

impl AxiomVerdict {
    pub fn is_violated(&self) -> bool {
        self.verdict == Verdict::Violated
    }

    /// Recomputes each retained certificate's margin from its stored points.
    pub fn reverify(&self, model: &ModelHandle, ig: &IGConfig) -> Result<Vec<f64>> {
        self.certificates
            .iter()
            .map(|cert| {
                reverify_certificate(self.axiom, self.method, model, &self.baseline, cert, ig)
            })
            .collect()
    }
}

/// Recomputes a certificate's margin from scratch.
pub fn reverify_certificate(
    axiom: Axiom,
    method: AttributionMethod,
    model: &ModelHandle,
    baseline: &Point,
    cert: &AxiomCertificate,
    ig: &IGConfig,
) -> Result<f64> {
    let at = |p: &Point| attribute(method, model, p, baseline, ig);
    match axiom {
        Axiom::Dim => {
            let feature = match cert.feature_or_pair {
                FeatureOrPair::Feature(i) => i,
                FeatureOrPair::Pair(..) => {
                    return Err(Error::Parameter("demand certificate names a pair".into()))
                }
            };
            let perturbed = cert.perturbed.as_ref().ok_or_else(|| {
                Error::Parameter("demand certificate lacks the raised point".into())
            })?;
            Ok(at(&cert.explicand)?.values()[feature] - at(perturbed)?.values()[feature])
        }
        Axiom::Aim => {
            let feature = match cert.feature_or_pair {
                FeatureOrPair::Feature(i) => i,
                FeatureOrPair::Pair(..) => {
                    return Err(Error::Parameter("average certificate names a pair".into()))
                }
            };
            Ok(-at(&cert.explicand)?.values()[feature])
        }
        Axiom::Awpm | Axiom::Aspm => {
            let (dominant, dominated) = match cert.feature_or_pair {
                FeatureOrPair::Pair(a, b) => (a, b),
                FeatureOrPair::Feature(_) => {
                    return Err(Error::Parameter(
                        "pairwise certificate names a feature".into(),
                    ))
                }
            };
            let r = at(&cert.explicand)?;
            Ok(r.normalized_at(dominated)? - r.normalized_at(dominant)?)
        }
    }
}

enum CaseOutcome {
    Clean(f64),
    Violation(Box<AxiomCertificate>, f64),
    Skipped,
}

fn assemble_verdict(
    axiom: Axiom,
    method: AttributionMethod,
    model: &ModelHandle,
    baseline: &Point,
    outcomes: Vec<CaseOutcome>,
    max_certificates: usize,
) -> AxiomVerdict {
    let mut checked = 0;
    let mut skipped = 0;
    let mut violations = 0;
    let mut max_gap = 0.0f64;
    let mut certificates = Vec::new();
    for outcome in outcomes {
        match outcome {
            CaseOutcome::Clean(gap) => {
                checked += 1;
                max_gap = max_gap.max(gap.abs());
            }
            CaseOutcome::Violation(cert, gap) => {
                checked += 1;
                violations += 1;
                max_gap = max_gap.max(gap.abs());
                if certificates.len() < max_certificates {
                    certificates.push(*cert);
                }
            }
            CaseOutcome::Skipped => skipped += 1,
        }
    }
    AxiomVerdict {
        axiom,
        method,
        model_id: model.id().to_string(),
        baseline: baseline.clone(),
        checked,
        skipped,
        violations,
        verdict: if violations > 0 {
            Verdict::Violated
        } else {
            Verdict::NoViolationFound
        },
        certificates,
        max_completeness_gap: max_gap,
    }
}

/// Evaluates one demand case: does raising `feature` by `delta` lower its
/// attribution by more than the tolerance?
pub fn probe_dim(
    method: AttributionMethod,
    model: &ModelHandle,
    baseline: &Point,
    explicand: &Point,
    feature: usize,
    delta: f64,
    config: &AxiomCheckConfig,
) -> Result<Option<AxiomCertificate>> {
    config.validate()?;
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::Parameter(format!(
            "demand perturbation must be strictly positive, got {delta}"
        )));
    }
    let raised = explicand.shifted(feature, delta)?;
    match dim_case(
        method, model, baseline, explicand, &raised, feature, delta, 0, config,
    )? {
        CaseOutcome::Violation(cert, _) => Ok(Some(*cert)),
        _ => Ok(None),
    }
}

#[allow(clippy::too_many_arguments)]
fn dim_case(
    method: AttributionMethod,
    model: &ModelHandle,
    baseline: &Point,
    explicand: &Point,
    raised: &Point,
    feature: usize,
    delta: f64,
    case: u64,
    config: &AxiomCheckConfig,
) -> Result<CaseOutcome> {
    let base = attribute(method, model, explicand, baseline, &config.ig)?;
    let bumped = attribute(method, model, raised, baseline, &config.ig)?;
    let gap = base
        .completeness_gap()
        .abs()
        .max(bumped.completeness_gap().abs());
    let margin = base.values()[feature] - bumped.values()[feature];
    if margin > config.tolerance {
        Ok(CaseOutcome::Violation(
            Box::new(AxiomCertificate {
                case,
                feature_or_pair: FeatureOrPair::Feature(feature),
                explicand: explicand.clone(),
                perturbed: Some(raised.clone()),
                delta: Some(delta),
                attributions: base.values().to_vec(),
                perturbed_attributions: Some(bumped.values().to_vec()),
                normalized: None,
                margin,
                completeness_gap: gap,
            }),
            gap,
        ))
    } else {
        Ok(CaseOutcome::Clean(gap))
    }
}

/// Sampled demand-individual-monotonicity audit. The raised explicand is
/// always derived from the sampled one by a single-coordinate increase.
pub fn check_dim(
    method: AttributionMethod,
    model: &ModelHandle,
    baseline: &Point,
    spec: &MonotoneSpec,
    config: &AxiomCheckConfig,
) -> Result<AxiomVerdict> {
    config.validate()?;
    spec.check_dim(model.arity())?;
    if spec.individual().is_empty() {
        return Err(Error::Parameter(
            "no individually monotone features declared".into(),
        ));
    }
    let space = model.space();
    let features: Vec<usize> = spec.individual().iter().copied().collect();

    let outcomes: Vec<CaseOutcome> = (0..config.samples as u64)
        .into_par_iter()
        .map(|case| {
            let mut rng = sample_rng(config.seed, case);
            let mut coords = uniform_point(&mut rng, space);
            let feature = choose(&mut rng, &features);
            let range = space.range(feature);
            let fits: Vec<f64> = config
                .delta_fractions
                .iter()
                .map(|&fr| fr * range)
                .filter(|&c| coords[feature] + c <= space.upper()[feature])
                .collect();
            let delta = if fits.is_empty() {
                let c_min = config
                    .delta_fractions
                    .iter()
                    .fold(f64::INFINITY, |a, &b| a.min(b))
                    * range;
                coords[feature] = uniform(
                    &mut rng,
                    space.lower()[feature],
                    space.upper()[feature] - c_min,
                );
                c_min
            } else {
                choose(&mut rng, &fits)
            };
            let explicand = Point::new(space, coords)?;
            let raised = explicand.shifted(feature, delta)?;
            dim_case(
                method, model, baseline, &explicand, &raised, feature, delta, case, config,
            )
        })
        .collect::<Result<_>>()?;

    Ok(assemble_verdict(
        Axiom::Dim,
        method,
        model,
        baseline,
        outcomes,
        config.max_certificates,
    ))
}

/// Evaluates one average-individual case: is the feature's attribution below
/// `-tolerance` although the explicand dominates the baseline?
pub fn probe_aim(
    method: AttributionMethod,
    model: &ModelHandle,
    baseline: &Point,
    explicand: &Point,
    feature: usize,
    config: &AxiomCheckConfig,
) -> Result<Option<AxiomCertificate>> {
    config.validate()?;
    for (i, (&x, &b)) in explicand.coords().iter().zip(baseline.coords()).enumerate() {
        if x < b {
            return Err(Error::Parameter(format!(
                "explicand must dominate the baseline componentwise; coordinate {i} has {x} < {b}"
            )));
        }
    }
    match aim_case(method, model, baseline, explicand, feature, 0, config)? {
        CaseOutcome::Violation(cert, _) => Ok(Some(*cert)),
        _ => Ok(None),
    }
}

fn aim_case(
    method: AttributionMethod,
    model: &ModelHandle,
    baseline: &Point,
    explicand: &Point,
    feature: usize,
    case: u64,
    config: &AxiomCheckConfig,
) -> Result<CaseOutcome> {
    let result = attribute(method, model, explicand, baseline, &config.ig)?;
    let gap = result.completeness_gap();
    let margin = -result.values()[feature];
    if margin > config.tolerance {
        Ok(CaseOutcome::Violation(
            Box::new(AxiomCertificate {
                case,
                feature_or_pair: FeatureOrPair::Feature(feature),
                explicand: explicand.clone(),
                perturbed: None,
                delta: None,
                attributions: result.values().to_vec(),
                perturbed_attributions: None,
                normalized: None,
                margin,
                completeness_gap: gap,
            }),
            gap,
        ))
    } else {
        Ok(CaseOutcome::Clean(gap))
    }
}

/// Sampled average-individual-monotonicity audit; explicands are drawn from
/// the dominance box `[baseline, upper]`.
pub fn check_aim(
    method: AttributionMethod,
    model: &ModelHandle,
    baseline: &Point,
    spec: &MonotoneSpec,
    config: &AxiomCheckConfig,
) -> Result<AxiomVerdict> {
    config.validate()?;
    spec.check_dim(model.arity())?;
    if spec.individual().is_empty() {
        return Err(Error::Parameter(
            "no individually monotone features declared".into(),
        ));
    }
    let space = model.space();
    if baseline
        .coords()
        .iter()
        .zip(space.upper())
        .all(|(&b, &u)| b >= u)
    {
        return Err(Error::Config(
            "baseline sits at the upper corner; the dominance box is empty".into(),
        ));
    }
    let features: Vec<usize> = spec.individual().iter().copied().collect();

    let outcomes: Vec<CaseOutcome> = (0..config.samples as u64)
        .into_par_iter()
        .map(|case| {
            let mut rng = sample_rng(config.seed, case);
            let coords: Vec<f64> = (0..space.dim())
                .map(|i| uniform(&mut rng, baseline.coords()[i], space.upper()[i]))
                .collect();
            let feature = choose(&mut rng, &features);
            let explicand = Point::new(space, coords)?;
            aim_case(method, model, baseline, &explicand, feature, case, config)
        })
        .collect::<Result<_>>()?;

    Ok(assemble_verdict(
        Axiom::Aim,
        method,
        model,
        baseline,
        outcomes,
        config.max_certificates,
    ))
}

/// Evaluates one pairwise normalized comparison at `explicand`.
#[allow(clippy::too_many_arguments)]
fn pairwise_case(
    method: AttributionMethod,
    model: &ModelHandle,
    baseline: &Point,
    explicand: &Point,
    pair: (usize, usize),
    case: u64,
    config: &AxiomCheckConfig,
) -> Result<CaseOutcome> {
    let (dominant, dominated) = pair;
    let x = explicand.coords();
    let b = baseline.coords();
    if x[dominant] <= b[dominant] || x[dominated] <= b[dominated] {
        return Ok(CaseOutcome::Skipped);
    }
    let result = attribute(method, model, explicand, baseline, &config.ig)?;
    let gap = result.completeness_gap();
    let norm_dominant = result.normalized_at(dominant)?;
    let norm_dominated = result.normalized_at(dominated)?;
    let margin = norm_dominated - norm_dominant;
    if margin > config.tolerance {
        Ok(CaseOutcome::Violation(
            Box::new(AxiomCertificate {
                case,
                feature_or_pair: FeatureOrPair::Pair(dominant, dominated),
                explicand: explicand.clone(),
                perturbed: None,
                delta: None,
                attributions: result.values().to_vec(),
                perturbed_attributions: None,
                normalized: Some((norm_dominant, norm_dominated)),
                margin,
                completeness_gap: gap,
            }),
            gap,
        ))
    } else {
        Ok(CaseOutcome::Clean(gap))
    }
}

/// One weak-premise comparison (requires equal pair coordinates).
pub fn probe_awpm(
    method: AttributionMethod,
    model: &ModelHandle,
    baseline: &Point,
    explicand: &Point,
    pair: (usize, usize),
    config: &AxiomCheckConfig,
) -> Result<Option<AxiomCertificate>> {
    config.validate()?;
    let x = explicand.coords();
    if x[pair.0] != x[pair.1] {
        return Err(Error::Parameter(format!(
            "weak premise requires equal pair coordinates, got {} and {}",
            x[pair.0], x[pair.1]
        )));
    }
    match pairwise_case(method, model, baseline, explicand, pair, 0, config)? {
        CaseOutcome::Violation(cert, _) => Ok(Some(*cert)),
        CaseOutcome::Skipped => Err(Error::Parameter(
            "normalization undefined: explicand must strictly exceed the baseline on both pair features".into(),
        )),
        CaseOutcome::Clean(_) => Ok(None),
    }
}

/// One strong-premise comparison (arbitrary pair coordinates).
pub fn probe_aspm(
    method: AttributionMethod,
    model: &ModelHandle,
    baseline: &Point,
    explicand: &Point,
    pair: (usize, usize),
    config: &AxiomCheckConfig,
) -> Result<Option<AxiomCertificate>> {
    config.validate()?;
    match pairwise_case(method, model, baseline, explicand, pair, 0, config)? {
        CaseOutcome::Violation(cert, _) => Ok(Some(*cert)),
        CaseOutcome::Skipped => Err(Error::Parameter(
            "normalization undefined: explicand must strictly exceed the baseline on both pair features".into(),
        )),
        CaseOutcome::Clean(_) => Ok(None),
    }
}

/// Sampled weak-pairwise audit over the effective weak pairs (declared weak
/// pairs plus strong pairs). The sampler forces the pair's coordinates to a
/// common value; samples where the normalization is undefined are skipped
/// and counted.
pub fn check_awpm(
    method: AttributionMethod,
    model: &ModelHandle,
    baseline: &Point,
    spec: &MonotoneSpec,
    config: &AxiomCheckConfig,
) -> Result<AxiomVerdict> {
    config.validate()?;
    spec.check_dim(model.arity())?;
    let pairs = spec.effective_weak_pairs();
    if pairs.is_empty() {
        return Err(Error::Parameter("no weak priority pairs declared".into()));
    }
    let space = model.space();

    let outcomes: Vec<CaseOutcome> = (0..config.samples as u64)
        .into_par_iter()
        .map(|case| {
            let mut rng = sample_rng(config.seed, case);
            let mut coords = uniform_point(&mut rng, space);
            let pair = choose(&mut rng, pairs.as_slice());
            let lo = space.lower()[pair.0].max(space.lower()[pair.1]);
            let hi = space.upper()[pair.0].min(space.upper()[pair.1]);
            if lo >= hi {
                return Ok(CaseOutcome::Skipped);
            }
            let v = uniform(&mut rng, lo, hi);
            coords[pair.0] = v;
            coords[pair.1] = v;
            let explicand = Point::new(space, coords)?;
            pairwise_case(method, model, baseline, &explicand, pair, case, config)
        })
        .collect::<Result<_>>()?;

    Ok(assemble_verdict(
        Axiom::Awpm,
        method,
        model,
        baseline,
        outcomes,
        config.max_certificates,
    ))
}

/// Sampled strong-pairwise audit; pair coordinates are drawn independently.
pub fn check_aspm(
    method: AttributionMethod,
    model: &ModelHandle,
    baseline: &Point,
    spec: &MonotoneSpec,
    config: &AxiomCheckConfig,
) -> Result<AxiomVerdict> {
    config.validate()?;
    spec.check_dim(model.arity())?;
    let pairs = spec.strong_pairs().to_vec();
    if pairs.is_empty() {
        return Err(Error::Parameter("no strong priority pairs declared".into()));
    }
    let space = model.space();

    let outcomes: Vec<CaseOutcome> = (0..config.samples as u64)
        .into_par_iter()
        .map(|case| {
            let mut rng = sample_rng(config.seed, case);
            let coords = uniform_point(&mut rng, space);
            let pair = choose(&mut rng, pairs.as_slice());
            let explicand = Point::new(space, coords)?;
            pairwise_case(method, model, baseline, &explicand, pair, case, config)
        })
        .collect::<Result<_>>()?;

    Ok(assemble_verdict(
        Axiom::Aspm,
        method,
        model,
        baseline,
        outcomes,
        config.max_certificates,
    ))
}

/// Dispatches one (axiom, method) audit.
pub fn check_axiom(
    axiom: Axiom,
    method: AttributionMethod,
    model: &ModelHandle,
    baseline: &Point,
    spec: &MonotoneSpec,
    config: &AxiomCheckConfig,
) -> Result<AxiomVerdict> {
    match axiom {
        Axiom::Dim => check_dim(method, model, baseline, spec, config),
        Axiom::Aim => check_aim(method, model, baseline, spec, config),
        Axiom::Awpm => check_awpm(method, model, baseline, spec, config),
        Axiom::Aspm => check_aspm(method, model, baseline, spec, config),
    }
}

/// Walks from an average-individual violation toward the baseline along the
/// violating feature, looking for a demand violation: the attribution is
/// zero when the feature sits at its baseline value and negative at the
/// witness, so some rung of the ladder must show a decrease.
pub fn dim_search_from_aim(
    method: AttributionMethod,
    model: &ModelHandle,
    baseline: &Point,
    aim_certificate: &AxiomCertificate,
    ladder: usize,
    config: &AxiomCheckConfig,
) -> Result<Option<AxiomCertificate>> {
    config.validate()?;
    let feature = match aim_certificate.feature_or_pair {
        FeatureOrPair::Feature(i) => i,
        FeatureOrPair::Pair(..) => {
            return Err(Error::Parameter(
                "demand search starts from an individual certificate".into(),
            ))
        }
    };
    if ladder < 1 {
        return Err(Error::Parameter(
            "ladder must have at least one step".into(),
        ));
    }
    let x_target = aim_certificate.explicand.coords()[feature];
    let x_base = baseline.coords()[feature];
    let span = x_target - x_base;
    if span <= 0.0 {
        return Ok(None);
    }
    let step = span / ladder as f64;

    let mut prev_point = aim_certificate.explicand.with_coord(feature, x_base)?;
    let mut prev_attr = attribute(method, model, &prev_point, baseline, &config.ig)?;
    for j in 1..=ladder {
        let point = aim_certificate
            .explicand
            .with_coord(feature, x_base + step * j as f64)?;
        let attr = attribute(method, model, &point, baseline, &config.ig)?;
        let margin = prev_attr.values()[feature] - attr.values()[feature];
        if margin > config.tolerance {
            let gap = prev_attr
                .completeness_gap()
                .abs()
                .max(attr.completeness_gap().abs());
            return Ok(Some(AxiomCertificate {
                case: j as u64,
                feature_or_pair: FeatureOrPair::Feature(feature),
                explicand: prev_point,
                perturbed: Some(point),
                delta: Some(step),
                attributions: prev_attr.values().to_vec(),
                perturbed_attributions: Some(attr.values().to_vec()),
                normalized: None,
                margin,
                completeness_gap: gap,
            }));
        }
        prev_point = point;
        prev_attr = attr;
    }
    Ok(None)
}

/// The full audit: the model's own monotonicity status, then all four axioms
/// for both attribution methods.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub model_id: String,
    pub baseline: Point,
    /// The model's own sampled monotonicity status; an attribution-level
    /// violation of an always-preserved axiom means the model, not the
    /// method, is broken.
    pub monotonicity: Vec<MonotonicityReport>,
    pub verdicts: Vec<AxiomVerdict>,
}

impl AuditReport {
    pub fn any_axiom_violation(&self) -> bool {
        self.verdicts.iter().any(AxiomVerdict::is_violated)
    }

    pub fn any_model_violation(&self) -> bool {
        self.monotonicity
            .iter()
            .any(MonotonicityReport::is_violated)
    }
}

/// Runs the monotonicity verifier and all eight (method, axiom) audits.
/// Cells whose premise set is empty (for example, no strong pairs declared)
/// are reported with zero checked cases.
pub fn audit_matrix(
    model: &ModelHandle,
    baseline: &Point,
    spec: &MonotoneSpec,
    config: &AxiomCheckConfig,
) -> Result<AuditReport> {
    config.validate()?;
    if spec.is_empty() {
        return Err(Error::Parameter("monotonicity declaration is empty".into()));
    }

    let probe = ProbeConfig {
        samples: config.samples,
        delta_fractions: config.delta_fractions.clone(),
        seed: config.seed,
        ..ProbeConfig::default()
    };
    let mut monotonicity = Vec::new();
    if !spec.individual().is_empty() {
        monotonicity.push(check_individual(model, spec, &probe)?);
    }
    if !spec.effective_weak_pairs().is_empty() {
        monotonicity.push(check_effective_weak_pairwise(model, spec, &probe)?);
    }
    if !spec.strong_pairs().is_empty() {
        monotonicity.push(check_strong_pairwise(model, spec, &probe)?);
    }

    let methods = [
        AttributionMethod::IntegratedGradients,
        AttributionMethod::BaselineShapley,
    ];
    let mut verdicts = Vec::with_capacity(8);
    for (mi, &method) in methods.iter().enumerate() {
        for (ai, &axiom) in Axiom::ALL.iter().enumerate() {
            let applicable = match axiom {
                Axiom::Dim | Axiom::Aim => !spec.individual().is_empty(),
                Axiom::Awpm => !spec.effective_weak_pairs().is_empty(),
                Axiom::Aspm => !spec.strong_pairs().is_empty(),
            };
            if !applicable {
                verdicts.push(AxiomVerdict {
                    axiom,
                    method,
                    model_id: model.id().to_string(),
                    baseline: baseline.clone(),
                    checked: 0,
                    skipped: 0,
                    violations: 0,
                    certificates: Vec::new(),
                    verdict: Verdict::NoViolationFound,
                    max_completeness_gap: 0.0,
                });
                continue;
            }
            let cell = AxiomCheckConfig {
                seed: config.seed.wrapping_add((mi * 4 + ai) as u64 + 1),
                ..config.clone()
            };
            verdicts.push(check_axiom(axiom, method, model, baseline, spec, &cell)?);
        }
    }

    Ok(AuditReport {
        model_id: model.id().to_string(),
        baseline: baseline.clone(),
        monotonicity,
        verdicts,
    })
}

/// One normalized pair comparison at a lattice point.
#[derive(Debug, Clone, Serialize)]
pub struct PairComparison {
    pub pair: (usize, usize),
    pub normalized_dominant: f64,
    pub normalized_dominated: f64,
    /// `normalized_dominated - normalized_dominant`; above tolerance means
    /// the strong-pairwise axiom fails at this point.
    pub margin: f64,
}

/// Audit of one lattice explicand.
#[derive(Debug, Clone, Serialize)]
pub struct GridPointAudit {
    /// Values taken by the varied features, in `dims` order.
    pub levels: Vec<f64>,
    pub explicand: Point,
    pub ig_values: Vec<f64>,
    pub bshap_values: Vec<f64>,
    pub ig_violations: Vec<PairComparison>,
    pub bshap_violations: Vec<PairComparison>,
}

/// Strong-pairwise audit of both methods over a lattice of explicands.
#[derive(Debug, Clone, Serialize)]
pub struct GridAuditReport {
    pub model_id: String,
    pub baseline: Point,
    pub dims: Vec<usize>,
    pub levels: Vec<f64>,
    pub points: Vec<GridPointAudit>,
    pub ig_violation_count: u64,
    pub bshap_violation_count: u64,
}

/// Audits the strong-pairwise axiom for both methods over every explicand on
/// a lattice: the features in `dims` sweep the given `levels`, all other
/// features stay at the baseline. Comparisons whose normalization is
/// undefined at a point are omitted there.
pub fn grid_audit(
    model: &ModelHandle,
    baseline: &Point,
    spec: &MonotoneSpec,
    dims: &[usize],
    levels: &[f64],
    config: &AxiomCheckConfig,
) -> Result<GridAuditReport> {
    config.validate()?;
    spec.check_dim(model.arity())?;
    if dims.is_empty() || levels.is_empty() {
        return Err(Error::Parameter(
            "grid needs at least one dim and one level".into(),
        ));
    }
    if spec.strong_pairs().is_empty() {
        return Err(Error::Parameter("no strong priority pairs declared".into()));
    }
    let space = model.space();
    for &d in dims {
        if d >= space.dim() {
            return Err(Error::Parameter(format!(
                "grid dim {d} out of range for {} features",
                space.dim()
            )));
        }
    }
    let n_points = levels.len().pow(dims.len() as u32);
    if n_points > 1_000_000 {
        return Err(Error::Config(format!(
            "lattice of {n_points} points is too large"
        )));
    }

    let mut points = Vec::with_capacity(n_points);
    let mut ig_violation_count = 0;
    let mut bshap_violation_count = 0;
    for ordinal in 0..n_points {
        let mut coords = baseline.coords().to_vec();
        let mut point_levels = Vec::with_capacity(dims.len());
        let mut rest = ordinal;
        for &d in dims {
            let level = levels[rest % levels.len()];
            rest /= levels.len();
            coords[d] = level;
            point_levels.push(level);
        }
        let explicand = Point::new(space, coords)?;

        let ig = attribute(
            AttributionMethod::IntegratedGradients,
            model,
            &explicand,
            baseline,
            &config.ig,
        )?;
        let bshap = attribute(
            AttributionMethod::BaselineShapley,
            model,
            &explicand,
            baseline,
            &config.ig,
        )?;

        let violations = |r: &AttributionResult| -> Vec<PairComparison> {
            spec.strong_pairs()
                .iter()
                .filter_map(|&(dominant, dominated)| {
                    let nd = r.normalized_at(dominant).ok()?;
                    let ns = r.normalized_at(dominated).ok()?;
                    let margin = ns - nd;
                    (margin > config.tolerance).then_some(PairComparison {
                        pair: (dominant, dominated),
                        normalized_dominant: nd,
                        normalized_dominated: ns,
                        margin,
                    })
                })
                .collect()
        };

        let ig_violations = violations(&ig);
        let bshap_violations = violations(&bshap);
        ig_violation_count += ig_violations.len() as u64;
        bshap_violation_count += bshap_violations.len() as u64;

        points.push(GridPointAudit {
            levels: point_levels,
            explicand,
            ig_values: ig.values().to_vec(),
            bshap_values: bshap.values().to_vec(),
            ig_violations,
            bshap_violations,
        });
    }

    Ok(GridAuditReport {
        model_id: model.id().to_string(),
        baseline: baseline.clone(),
        dims: dims.to_vec(),
        levels: levels.to_vec(),
        points,
        ig_violation_count,
        bshap_violation_count,
    })
}
