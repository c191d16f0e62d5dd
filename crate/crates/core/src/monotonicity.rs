//! Sampled monotonicity checks with concrete counterexample witnesses.
//!
//! Each check draws perturbation cases from the model's box, evaluates the
//! defining inequality of the property, and collects every failure as a
//! [`ViolationWitness`]. Sampling can falsify but never prove, so a clean
//! run reports `NoViolationFound` rather than "holds".

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelHandle, MonotoneSpec};
use crate::sampling::{choose, sample_rng, uniform, uniform_point};
use crate::space::{FeatureSpace, Point};

/// Default violation tolerance on differences of model values.
pub const DEFAULT_PROBE_TOLERANCE: f64 = 1e-9;

/// Default perturbation ladder, as fractions of each feature's range.
pub const DEFAULT_DELTA_FRACTIONS: [f64; 3] = [0.05, 0.25, 0.5];

/// Which monotonicity property a report concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonotonicityKind {
    Individual,
    WeakPairwise,
    StrongPairwise,
}

impl std::fmt::Display for MonotonicityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MonotonicityKind::Individual => f.write_str("individual"),
            MonotonicityKind::WeakPairwise => f.write_str("weak-pairwise"),
            MonotonicityKind::StrongPairwise => f.write_str("strong-pairwise"),
        }
    }
}

/// The feature (or ordered pair) a witness concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureOrPair {
    Feature(usize),
    Pair(usize, usize),
}

/// Configuration for sampled monotonicity probing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Number of random perturbation cases.
    pub samples: usize,
    /// Perturbation sizes, as strictly positive fractions of the relevant
    /// feature range.
    pub delta_fractions: Vec<f64>,
    pub seed: u64,
    /// Absolute tolerance separating violations from rounding noise.
    pub tolerance: f64,
    /// When set, additionally probes a full lattice with this many levels
    /// per feature.
    pub grid_resolution: Option<usize>,
    /// When set, individual checks also raise random subsets of the
    /// monotone features simultaneously.
    pub multi_coordinate: bool,
    /// Cap on retained witnesses (all violations still count toward the
    /// verdict).
    pub max_witnesses: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            delta_fractions: DEFAULT_DELTA_FRACTIONS.to_vec(),
            seed: 0,
            tolerance: DEFAULT_PROBE_TOLERANCE,
            grid_resolution: None,
            multi_coordinate: false,
            max_witnesses: 1000,
        }
    }
}

impl ProbeConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    fn validate(&self, space: &FeatureSpace) -> Result<()> {
        if self.delta_fractions.is_empty() {
            return Err(Error::Config("perturbation ladder is empty".into()));
        }
        for &d in &self.delta_fractions {
            if !d.is_finite() || d <= 0.0 {
                return Err(Error::Config(format!(
                    "perturbation fractions must be strictly positive, got {d}"
                )));
            }
            if d > 1.0 {
                return Err(Error::Config(format!(
                    "perturbation fraction {d} exceeds the feature range"
                )));
            }
        }
        if self.tolerance < 0.0 {
            return Err(Error::Config("tolerance must be nonnegative".into()));
        }
        if self.max_witnesses == 0 {
            // A violated verdict must retain at least one witness.
            return Err(Error::Config("max_witnesses must be at least 1".into()));
        }
        if let Some(r) = self.grid_resolution {
            if r < 2 {
                return Err(Error::Config("grid resolution must be at least 2".into()));
            }
            let cells = (r as f64).powi(space.dim() as i32);
            if cells > 1e6 {
                return Err(Error::Config(format!(
                    "lattice of {r}^{} points is too large; lower the resolution",
                    space.dim()
                )));
            }
        }
        Ok(())
    }
}

/// A concrete inequality violation: `f(x) > f(x_star) + tolerance` where
/// `x_star` is the point the property requires to score at least as high.
#[derive(Debug, Clone, Serialize)]
pub struct ViolationWitness {
    pub kind: MonotonicityKind,
    pub feature_or_pair: FeatureOrPair,
    /// Case index the witness came from (sample index, or lattice ordinal
    /// offset past the sample count).
    pub case: u64,
    /// Perturbation size in raw feature units.
    pub delta: f64,
    pub x: Point,
    pub x_star: Point,
    pub f_x: f64,
    pub f_x_star: f64,
    /// `f_x - f_x_star`; strictly greater than the tolerance.
    pub margin: f64,
}

impl ViolationWitness {
    /// Re-evaluates both points and confirms the margin still exceeds the
    /// tolerance (witnesses are re-checked before being reported).
    fn confirmed(self, model: &ModelHandle, tolerance: f64) -> Option<Self> {
        let f_x = model.evaluate(&self.x).ok()?;
        let f_x_star = model.evaluate(&self.x_star).ok()?;
        let margin = f_x - f_x_star;
        (margin > tolerance).then_some(Self {
            f_x,
            f_x_star,
            margin,
            ..self
        })
    }
}

/// Outcome of one property check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    NoViolationFound,
    Violated,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::NoViolationFound => f.write_str("no-violation-found"),
            Verdict::Violated => f.write_str("violated"),
        }
    }
}

/// Result of probing one monotonicity property.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub property: MonotonicityKind,
    /// Number of perturbation cases evaluated.
    pub checked: u64,
    /// Total violations encountered (may exceed the retained witness list).
    pub violations: u64,
    pub witnesses: Vec<ViolationWitness>,
    pub verdict: Verdict,
}

impl MonotonicityReport {
    fn from_outcomes(
        property: MonotonicityKind,
        checked: u64,
        mut found: Vec<ViolationWitness>,
        max_witnesses: usize,
    ) -> Self {
        let violations = found.len() as u64;
        found.truncate(max_witnesses);
        Self {
            property,
            checked,
            violations,
            witnesses: found,
            verdict: if violations > 0 {
                Verdict::Violated
            } else {
                Verdict::NoViolationFound
            },
        }
    }

    pub fn is_violated(&self) -> bool {
        self.verdict == Verdict::Violated
    }
}

/// Checks that raising any declared monotone feature never lowers the model
/// value (up to tolerance). Draws a random point, a random monotone feature,
/// and a random in-bounds increase per sample.
pub fn check_individual(
    model: &ModelHandle,
    spec: &MonotoneSpec,
    config: &ProbeConfig,
) -> Result<MonotonicityReport> {
    let space = model.space();
    config.validate(space)?;
    spec.check_dim(space.dim())?;
    if spec.individual().is_empty() {
        return Err(Error::Parameter(
            "no individually monotone features declared".into(),
        ));
    }
    let features: Vec<usize> = spec.individual().iter().copied().collect();

    let sampled: Vec<Option<ViolationWitness>> = (0..config.samples as u64)
        .into_par_iter()
        .map(|case| {
            let mut rng = sample_rng(config.seed, case);
            let mut coords = uniform_point(&mut rng, space);
            let probe_features: Vec<usize> = if config.multi_coordinate && features.len() > 1 {
                // Raise a random non-empty subset of the monotone features.
                let mut subset: Vec<usize> = features
                    .iter()
                    .copied()
                    .filter(|_| rng.random::<f64>() < 0.5)
                    .collect();
                if subset.is_empty() {
                    subset.push(choose(&mut rng, &features));
                }
                subset
            } else {
                vec![choose(&mut rng, &features)]
            };

            let mut star = coords.clone();
            let mut first_delta = 0.0;
            for &i in &probe_features {
                let range = space.range(i);
                let fits: Vec<f64> = config
                    .delta_fractions
                    .iter()
                    .map(|&fr| fr * range)
                    .filter(|&c| coords[i] + c <= space.upper()[i])
                    .collect();
                let c = if fits.is_empty() {
                    // Too close to the top; redraw the coordinate where the
                    // smallest rung fits.
                    let c_min = config
                        .delta_fractions
                        .iter()
                        .fold(f64::INFINITY, |a, &b| a.min(b))
                        * range;
                    coords[i] = uniform(&mut rng, space.lower()[i], space.upper()[i] - c_min);
                    star[i] = coords[i];
                    c_min
                } else {
                    choose(&mut rng, &fits)
                };
                star[i] = (coords[i] + c).min(space.upper()[i]);
                if first_delta == 0.0 {
                    first_delta = c;
                }
            }

            let f_x = model.evaluate_raw(&coords);
            let f_star = model.evaluate_raw(&star);
            let margin = f_x - f_star;
            if margin > config.tolerance {
                Some(ViolationWitness {
                    kind: MonotonicityKind::Individual,
                    // Multi-coordinate probes report the first raised feature;
                    // the two points carry the full perturbation.
                    feature_or_pair: FeatureOrPair::Feature(probe_features[0]),
                    case,
                    delta: first_delta,
                    x: Point::new(space, coords).ok()?,
                    x_star: Point::new(space, star).ok()?,
                    f_x,
                    f_x_star: f_star,
                    margin,
                })
            } else {
                None
            }
        })
        .collect();

    let mut found: Vec<ViolationWitness> = sampled.into_iter().flatten().collect();
    let mut checked = config.samples as u64;

    if let Some(resolution) = config.grid_resolution {
        let (extra_checked, grid_hits) =
            grid_individual(model, &features, config, resolution, checked)?;
        checked += extra_checked;
        found.extend(grid_hits);
    }

    let confirmed: Vec<ViolationWitness> = found
        .into_iter()
        .filter_map(|w| w.confirmed(model, config.tolerance))
        .collect();

    Ok(MonotonicityReport::from_outcomes(
        MonotonicityKind::Individual,
        checked,
        confirmed,
        config.max_witnesses,
    ))
}

/// Checks the equal-values priority inequality: with the pair's coordinates
/// set to a common value, moving the increase from the dominated feature to
/// the dominant one must not lower the model value.
pub fn check_weak_pairwise(
    model: &ModelHandle,
    spec: &MonotoneSpec,
    config: &ProbeConfig,
) -> Result<MonotonicityReport> {
    check_pairwise(
        model,
        spec.weak_pairs(),
        config,
        MonotonicityKind::WeakPairwise,
    )
}

/// Checks the unconditional priority inequality at independently drawn pair
/// coordinates.
pub fn check_strong_pairwise(
    model: &ModelHandle,
    spec: &MonotoneSpec,
    config: &ProbeConfig,
) -> Result<MonotonicityReport> {
    check_pairwise(
        model,
        spec.strong_pairs(),
        config,
        MonotonicityKind::StrongPairwise,
    )
}

/// Weak-premise check over the effective pair set (declared weak pairs plus
/// strong pairs, which imply the weak relation).
pub fn check_effective_weak_pairwise(
    model: &ModelHandle,
    spec: &MonotoneSpec,
    config: &ProbeConfig,
) -> Result<MonotonicityReport> {
    check_pairwise(
        model,
        &spec.effective_weak_pairs(),
        config,
        MonotonicityKind::WeakPairwise,
    )
}

fn check_pairwise(
    model: &ModelHandle,
    pairs: &[(usize, usize)],
    config: &ProbeConfig,
    kind: MonotonicityKind,
) -> Result<MonotonicityReport> {
    let space = model.space();
    config.validate(space)?;
    if pairs.is_empty() {
        return Err(Error::Parameter(format!(
            "no {kind} priority pairs declared"
        )));
    }
    for &(dominant, dominated) in pairs {
        let hi = dominant.max(dominated);
        if hi >= space.dim() {
            return Err(Error::Parameter(format!(
                "pair ({dominant}, {dominated}) names feature {hi} but the model has {} features",
                space.dim()
            )));
        }
        if kind == MonotonicityKind::WeakPairwise {
            let lo = space.lower()[dominant].max(space.lower()[dominated]);
            let hi_b = space.upper()[dominant].min(space.upper()[dominated]);
            if lo >= hi_b {
                return Err(Error::Config(format!(
                    "features {dominant} and {dominated} have disjoint ranges; the \
                     equal-values premise is unsatisfiable"
                )));
            }
        }
    }

    let sampled: Vec<Option<ViolationWitness>> = (0..config.samples as u64)
        .into_par_iter()
        .map(|case| {
            let mut rng = sample_rng(config.seed, case);
            let mut coords = uniform_point(&mut rng, space);
            let (dominant, dominated) = choose(&mut rng, pairs);
            let frac = choose(&mut rng, &config.delta_fractions);

            let delta = match kind {
                MonotonicityKind::WeakPairwise => {
                    let lo = space.lower()[dominant].max(space.lower()[dominated]);
                    let hi = space.upper()[dominant].min(space.upper()[dominated]);
                    let c = frac * (hi - lo);
                    let v = uniform(&mut rng, lo, hi - c);
                    coords[dominant] = v;
                    coords[dominated] = v;
                    c
                }
                _ => {
                    let c = frac * space.range(dominant).min(space.range(dominated));
                    coords[dominant] = uniform(
                        &mut rng,
                        space.lower()[dominant],
                        space.upper()[dominant] - c,
                    );
                    coords[dominated] = uniform(
                        &mut rng,
                        space.lower()[dominated],
                        space.upper()[dominated] - c,
                    );
                    c
                }
            };

            pair_case(
                model,
                kind,
                case,
                coords,
                dominant,
                dominated,
                delta,
                config.tolerance,
            )
        })
        .collect();

    let mut found: Vec<ViolationWitness> = sampled.into_iter().flatten().collect();
    let mut checked = config.samples as u64;

    if let Some(resolution) = config.grid_resolution {
        let (extra, hits) = grid_pairwise(model, pairs, config, kind, resolution, checked)?;
        checked += extra;
        found.extend(hits);
    }

    let confirmed: Vec<ViolationWitness> = found
        .into_iter()
        .filter_map(|w| w.confirmed(model, config.tolerance))
        .collect();

    Ok(MonotonicityReport::from_outcomes(
        kind,
        checked,
        confirmed,
        config.max_witnesses,
    ))
}

/// Evaluates one priority case: `x` raises the dominated feature by `delta`,
/// `x_star` raises the dominant one instead.
#[allow(clippy::too_many_arguments)]
fn pair_case(
    model: &ModelHandle,
    kind: MonotonicityKind,
    case: u64,
    base: Vec<f64>,
    dominant: usize,
    dominated: usize,
    delta: f64,
    tolerance: f64,
) -> Option<ViolationWitness> {
    let space = model.space();
    let mut lo = base.clone();
    lo[dominated] = (lo[dominated] + delta).min(space.upper()[dominated]);
    let mut hi = base;
    hi[dominant] = (hi[dominant] + delta).min(space.upper()[dominant]);

    let f_lo = model.evaluate_raw(&lo);
    let f_hi = model.evaluate_raw(&hi);
    let margin = f_lo - f_hi;
    if margin > tolerance {
        Some(ViolationWitness {
            kind,
            feature_or_pair: FeatureOrPair::Pair(dominant, dominated),
            case,
            delta,
            x: Point::new(space, lo).ok()?,
            x_star: Point::new(space, hi).ok()?,
            f_x: f_lo,
            f_x_star: f_hi,
            margin,
        })
    } else {
        None
    }
}

fn lattice_levels(space: &FeatureSpace, i: usize, resolution: usize) -> Vec<f64> {
    (0..resolution)
        .map(|j| space.lower()[i] + space.range(i) * j as f64 / (resolution - 1) as f64)
        .collect()
}

/// Cartesian lattice over the whole box.
fn lattice_points(space: &FeatureSpace, resolution: usize) -> Vec<Vec<f64>> {
    let per_axis: Vec<Vec<f64>> = (0..space.dim())
        .map(|i| lattice_levels(space, i, resolution))
        .collect();
    let mut points = vec![Vec::new()];
    for axis in &per_axis {
        let mut next = Vec::with_capacity(points.len() * axis.len());
        for p in &points {
            for &v in axis {
                let mut q = p.clone();
                q.push(v);
                next.push(q);
            }
        }
        points = next;
    }
    points
}

fn grid_individual(
    model: &ModelHandle,
    features: &[usize],
    config: &ProbeConfig,
    resolution: usize,
    case_offset: u64,
) -> Result<(u64, Vec<ViolationWitness>)> {
    let space = model.space();
    let mut hits = Vec::new();
    let mut case = case_offset;
    for coords in lattice_points(space, resolution) {
        for &i in features {
            for &frac in &config.delta_fractions {
                let c = frac * space.range(i);
                if coords[i] + c > space.upper()[i] {
                    continue;
                }
                let mut star = coords.clone();
                star[i] += c;
                let f_x = model.evaluate_raw(&coords);
                let f_star = model.evaluate_raw(&star);
                let margin = f_x - f_star;
                if margin > config.tolerance {
                    hits.push(ViolationWitness {
                        kind: MonotonicityKind::Individual,
                        feature_or_pair: FeatureOrPair::Feature(i),
                        case,
                        delta: c,
                        x: Point::new(space, coords.clone())?,
                        x_star: Point::new(space, star)?,
                        f_x,
                        f_x_star: f_star,
                        margin,
                    });
                }
                case += 1;
            }
        }
    }
    Ok((case - case_offset, hits))
}

fn grid_pairwise(
    model: &ModelHandle,
    pairs: &[(usize, usize)],
    config: &ProbeConfig,
    kind: MonotonicityKind,
    resolution: usize,
    case_offset: u64,
) -> Result<(u64, Vec<ViolationWitness>)> {
    let space = model.space();
    let mut hits = Vec::new();
    let mut case = case_offset;
    for coords in lattice_points(space, resolution) {
        for &(dominant, dominated) in pairs {
            for &frac in &config.delta_fractions {
                let mut base = coords.clone();
                let c = match kind {
                    MonotonicityKind::WeakPairwise => {
                        // Force equal values on the pair, anchored at the
                        // dominant feature's lattice level.
                        let v = coords[dominant];
                        let hi = space.upper()[dominant].min(space.upper()[dominated]);
                        let lo = space.lower()[dominant].max(space.lower()[dominated]);
                        let c = frac * (hi - lo);
                        if v < lo || v + c > hi {
                            continue;
                        }
                        base[dominant] = v;
                        base[dominated] = v;
                        c
                    }
                    _ => {
                        let c = frac * space.range(dominant).min(space.range(dominated));
                        if base[dominant] + c > space.upper()[dominant]
                            || base[dominated] + c > space.upper()[dominated]
                        {
                            continue;
                        }
                        c
                    }
                };
                if let Some(w) = pair_case(
                    model,
                    kind,
                    case,
                    base,
                    dominant,
                    dominated,
                    c,
                    config.tolerance,
                ) {
                    hits.push(w);
                }
                case += 1;
            }
        }
    }
    Ok((case - case_offset, hits))
}
