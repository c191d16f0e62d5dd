//! Constructively monotone additive models.
//!
//! A model is a sum of group subnets, per-feature subnets, and an intercept:
//!
//! `f(x) = sum_g link_g(w_g . x_g) + sum_j g_j(x_j) + intercept`
//!
//! Group weights are derived from unconstrained raw parameters as suffix
//! sums of squares, so they are always nonnegative and nonincreasing along
//! the group's priority order; the link is a nonnegative combination of the
//! identity and shifted softplus ramps, so its slope is nonnegative
//! everywhere. Consequently
//!
//! `df/dx_dominant = slope * w_dominant >= slope * w_dominated = df/dx_dominated >= 0`
//!
//! holds for every parameter setting: individual and strong pairwise
//! monotonicity on group features are structural, not penalized, and survive
//! any training step. Per-feature subnets are small tanh networks, free by
//! default and constrained to nonnegative slope when flagged monotone.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelHandle, MonotoneSpec};
use crate::space::{FeatureSpace, Point};

pub(crate) fn softplus(t: f64) -> f64 {
    if t > 30.0 {
        t
    } else {
        t.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Monotone scalar link: `s(z) = scale * z + sum_j coeffs[j] * softplus(z - knots[j])`
/// with `scale, coeffs >= 0` derived as squares of raw parameters.
#[derive(Debug, Clone)]
pub struct MonotoneLink {
    pub(crate) raw_scale: f64,
    pub(crate) raw_coeffs: Vec<f64>,
    pub(crate) knots: Vec<f64>,
    scale: f64,
    coeffs: Vec<f64>,
}

impl MonotoneLink {
    pub fn new(raw_scale: f64, raw_coeffs: Vec<f64>, knots: Vec<f64>) -> Result<Self> {
        if raw_coeffs.len() != knots.len() {
            return Err(Error::Parameter(format!(
                "{} link coefficients vs {} knots",
                raw_coeffs.len(),
                knots.len()
            )));
        }
        let mut link = Self {
            raw_scale,
            raw_coeffs,
            knots,
            scale: 0.0,
            coeffs: Vec::new(),
        };
        link.sync();
        Ok(link)
    }

    /// Recomputes the derived coefficients from the raw parameters.
    pub(crate) fn sync(&mut self) {
        self.scale = self.raw_scale * self.raw_scale;
        self.coeffs = self.raw_coeffs.iter().map(|r| r * r).collect();
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn value(&self, z: f64) -> f64 {
        let mut v = self.scale * z;
        for (c, k) in self.coeffs.iter().zip(&self.knots) {
            v += c * softplus(z - k);
        }
        v
    }

    /// `s'(z) = scale + sum_j coeffs[j] * sigmoid(z - knots[j]) >= 0`.
    pub fn slope(&self, z: f64) -> f64 {
        let mut d = self.scale;
        for (c, k) in self.coeffs.iter().zip(&self.knots) {
            d += c * sigmoid(z - k);
        }
        d
    }
}

/// A jointly monotone group of features: weighted sum through a monotone
/// link. `members` lists the features in priority order, dominant first; the
/// derived weights `w[i] = sum_{j >= i} raw[j]^2` are nonincreasing along
/// that order for any raw values.
#[derive(Debug, Clone)]
pub struct GroupSubnet {
    pub(crate) members: Vec<usize>,
    pub(crate) raw_weights: Vec<f64>,
    pub(crate) weights: Vec<f64>,
    pub(crate) link: MonotoneLink,
}

impl GroupSubnet {
    pub fn new(members: Vec<usize>, raw_weights: Vec<f64>, link: MonotoneLink) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Parameter("group has no members".into()));
        }
        if members.len() != raw_weights.len() {
            return Err(Error::Parameter(format!(
                "{} members vs {} raw weights",
                members.len(),
                raw_weights.len()
            )));
        }
        let mut g = Self {
            members,
            raw_weights,
            weights: Vec::new(),
            link,
        };
        g.sync();
        Ok(g)
    }

    pub(crate) fn sync(&mut self) {
        let k = self.raw_weights.len();
        let mut weights = vec![0.0; k];
        let mut acc = 0.0;
        for i in (0..k).rev() {
            acc += self.raw_weights[i] * self.raw_weights[i];
            weights[i] = acc;
        }
        self.weights = weights;
        self.link.sync();
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// Derived weights, aligned with `members`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn link(&self) -> &MonotoneLink {
        &self.link
    }

    pub(crate) fn z(&self, coords: &[f64]) -> f64 {
        self.members
            .iter()
            .zip(&self.weights)
            .map(|(&m, &w)| w * coords[m])
            .sum()
    }

    pub fn value(&self, coords: &[f64]) -> f64 {
        self.link.value(self.z(coords))
    }

    fn gradient_into(&self, coords: &[f64], out: &mut [f64]) {
        let slope = self.link.slope(self.z(coords));
        for (&m, &w) in self.members.iter().zip(&self.weights) {
            out[m] += slope * w;
        }
    }
}

/// One-feature subnet: two tanh units over the affinely rescaled input.
/// When `monotone` is set, the unit amplitudes and slopes are squares of the
/// stored parameters, forcing a nonnegative derivative.
#[derive(Debug, Clone)]
pub struct SingleSubnet {
    pub(crate) feature: usize,
    pub(crate) monotone: bool,
    /// `[a1, b1, c1, a2, b2, c2]` (raw).
    pub(crate) params: [f64; 6],
    pub(crate) shift: f64,
    pub(crate) scale: f64,
}

impl SingleSubnet {
    pub fn new(
        feature: usize,
        monotone: bool,
        params: [f64; 6],
        shift: f64,
        scale: f64,
    ) -> Result<Self> {
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::Parameter(format!(
                "input scale for feature {feature} must be positive, got {scale}"
            )));
        }
        Ok(Self {
            feature,
            monotone,
            params,
            shift,
            scale,
        })
    }

    pub fn feature(&self) -> usize {
        self.feature
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    fn unit(&self, u: usize) -> (f64, f64, f64) {
        let a = self.params[3 * u];
        let b = self.params[3 * u + 1];
        let c = self.params[3 * u + 2];
        if self.monotone {
            (a * a, b * b, c)
        } else {
            (a, b, c)
        }
    }

    pub(crate) fn normalized_input(&self, x: f64) -> f64 {
        (x - self.shift) / self.scale
    }

    pub fn value(&self, x: f64) -> f64 {
        let xn = self.normalized_input(x);
        (0..2)
            .map(|u| {
                let (a, b, c) = self.unit(u);
                a * (b * xn + c).tanh()
            })
            .sum()
    }

    pub fn slope(&self, x: f64) -> f64 {
        let xn = self.normalized_input(x);
        (0..2)
            .map(|u| {
                let (a, b, c) = self.unit(u);
                let t = (b * xn + c).tanh();
                a * b * (1.0 - t * t) / self.scale
            })
            .sum()
    }
}

/// Additive model over a disjoint, complete partition of the features into
/// groups and singles.
#[derive(Debug, Clone)]
pub struct AdditiveMonotoneModel {
    pub(crate) id: String,
    pub(crate) space: Arc<FeatureSpace>,
    pub(crate) groups: Vec<GroupSubnet>,
    pub(crate) singles: Vec<SingleSubnet>,
    pub(crate) intercept: f64,
}

impl AdditiveMonotoneModel {
    pub fn new(
        id: impl Into<String>,
        space: &Arc<FeatureSpace>,
        groups: Vec<GroupSubnet>,
        singles: Vec<SingleSubnet>,
        intercept: f64,
    ) -> Result<Self> {
        let mut covered = vec![false; space.dim()];
        let mut cover = |i: usize| -> Result<()> {
            if i >= covered.len() {
                return Err(Error::Parameter(format!(
                    "feature index {i} out of range for {} features",
                    covered.len()
                )));
            }
            if covered[i] {
                return Err(Error::Parameter(format!(
                    "feature {i} assigned to more than one subnet"
                )));
            }
            covered[i] = true;
            Ok(())
        };
        for g in &groups {
            for &m in g.members() {
                cover(m)?;
            }
        }
        for s in &singles {
            cover(s.feature())?;
        }
        if let Some(missing) = covered.iter().position(|&c| !c) {
            return Err(Error::Parameter(format!(
                "feature {missing} is not assigned to any subnet"
            )));
        }
        Ok(Self {
            id: id.into(),
            space: Arc::clone(space),
            groups,
            singles,
            intercept,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn space(&self) -> &Arc<FeatureSpace> {
        &self.space
    }

    pub fn groups(&self) -> &[GroupSubnet] {
        &self.groups
    }

    pub fn singles(&self) -> &[SingleSubnet] {
        &self.singles
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    /// The raw additive score `f(x)`.
    pub fn value(&self, coords: &[f64]) -> f64 {
        let mut v = self.intercept;
        for g in &self.groups {
            v += g.value(coords);
        }
        for s in &self.singles {
            v += s.value(coords[s.feature]);
        }
        v
    }

    /// Analytic gradient of `f`.
    pub fn gradient(&self, coords: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; coords.len()];
        for g in &self.groups {
            g.gradient_into(coords, &mut out);
        }
        for s in &self.singles {
            out[s.feature] += s.slope(coords[s.feature]);
        }
        out
    }

    /// Predicted probability `sigmoid(f(x))`.
    pub fn predict(&self, x: &Point) -> Result<f64> {
        if x.dim() != self.space.dim() || !self.space.same_geometry(x.space()) {
            return Err(Error::SpaceMismatch(format!(
                "model `{}` is bound to a different space than the point",
                self.id
            )));
        }
        Ok(sigmoid(self.value(x.coords())))
    }

    /// Wraps the model as a registered-gradient handle for the attribution
    /// engines and auditors.
    pub fn handle(&self) -> ModelHandle {
        let value_model = Arc::new(self.clone());
        let grad_model = Arc::clone(&value_model);
        ModelHandle::with_analytic_gradient(
            self.id.clone(),
            &self.space,
            move |x| value_model.value(x),
            move |x| grad_model.gradient(x),
        )
    }

    /// The monotonicity this architecture guarantees: every group feature
    /// (plus monotone-flagged singles) individually, and within each group
    /// every ordered pair along the priority order, strongly.
    pub fn monotone_spec(&self) -> MonotoneSpec {
        let mut individual = Vec::new();
        let mut strong = Vec::new();
        for g in &self.groups {
            individual.extend_from_slice(g.members());
            for i in 0..g.members().len() {
                for j in i + 1..g.members().len() {
                    strong.push((g.members()[i], g.members()[j]));
                }
            }
        }
        for s in &self.singles {
            if s.is_monotone() {
                individual.push(s.feature());
            }
        }
        MonotoneSpec::new(individual, Vec::new(), strong)
            .expect("structurally valid monotone declaration")
    }

    pub(crate) fn sync(&mut self) {
        for g in &mut self.groups {
            g.sync();
        }
    }
}

/// A weight-ordering fact backing one strong priority pair.
#[derive(Debug, Clone, Serialize)]
pub struct ChainCertificate {
    pub dominant: usize,
    pub dominated: usize,
    pub weight_dominant: f64,
    pub weight_dominated: f64,
}

/// Result of checking the structural monotonicity constraints.
#[derive(Debug, Clone, Serialize)]
pub struct ConstraintReport {
    pub certified: bool,
    pub issues: Vec<String>,
    /// For each certified pair, the weight inequality that makes
    /// `df/dx_dominant >= df/dx_dominated` hold pointwise (the shared link
    /// slope is nonnegative, so the weight ordering carries the derivative
    /// ordering).
    pub chains: Vec<ChainCertificate>,
}

/// Checks the derived parameters actually used in evaluation: group weights
/// nonnegative and nonincreasing, link coefficients nonnegative, monotone
/// singles with nonnegative slope terms. Reports failures instead of
/// erroring.
pub fn certify_constraints(model: &AdditiveMonotoneModel) -> ConstraintReport {
    let mut issues = Vec::new();
    let mut chains = Vec::new();
    for (gi, g) in model.groups().iter().enumerate() {
        let w = g.weights();
        for (i, &wi) in w.iter().enumerate() {
            if wi.is_nan() || wi < 0.0 {
                issues.push(format!("group {gi}: weight {i} is negative ({wi})"));
            }
        }
        for i in 1..w.len() {
            if w[i] > w[i - 1] {
                issues.push(format!(
                    "group {gi}: weight order broken at position {i} ({} > {})",
                    w[i],
                    w[i - 1]
                ));
            }
        }
        if g.link().scale().is_nan() || g.link().scale() < 0.0 {
            issues.push(format!("group {gi}: negative link scale"));
        }
        for (j, &c) in g.link().coeffs().iter().enumerate() {
            if c.is_nan() || c < 0.0 {
                issues.push(format!("group {gi}: negative link coefficient {j}"));
            }
        }
        for i in 0..g.members().len() {
            for j in i + 1..g.members().len() {
                chains.push(ChainCertificate {
                    dominant: g.members()[i],
                    dominated: g.members()[j],
                    weight_dominant: w[i],
                    weight_dominated: w[j],
                });
            }
        }
    }
    for s in model.singles() {
        if s.is_monotone() {
            for u in 0..2 {
                let (a, b, _) = s.unit(u);
                if a * b < 0.0 {
                    issues.push(format!(
                        "single {}: unit {u} has negative slope product",
                        s.feature()
                    ));
                }
            }
        }
    }
    ConstraintReport {
        certified: issues.is_empty(),
        issues,
        chains,
    }
}

/// Architecture description: which features form priority groups (dominant
/// first), which of the remaining per-feature subnets are constrained
/// monotone, and how many softplus units each group link carries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Architecture {
    pub groups: Vec<Vec<usize>>,
    #[serde(default)]
    pub monotone_singles: Vec<usize>,
    #[serde(default = "default_link_units")]
    pub link_units: usize,
}

fn default_link_units() -> usize {
    2
}

impl Architecture {
    /// One group, everything else free singles.
    pub fn grouped(members: Vec<usize>) -> Self {
        Self {
            groups: vec![members],
            monotone_singles: Vec::new(),
            link_units: 2,
        }
    }
}

/// Builds a model with seeded random raw parameters. The partition must be
/// valid (disjoint groups, indices in range); every remaining feature
/// becomes a single. Constraints hold immediately by construction.
pub fn build_model(
    id: impl Into<String>,
    space: &Arc<FeatureSpace>,
    arch: &Architecture,
    seed: u64,
) -> Result<AdditiveMonotoneModel> {
    let dim = space.dim();
    let mut in_group = vec![false; dim];
    for group in &arch.groups {
        if group.is_empty() {
            return Err(Error::Parameter("empty group in architecture".into()));
        }
        for &m in group {
            if m >= dim {
                return Err(Error::Parameter(format!(
                    "group names feature {m} but the space has {dim} features"
                )));
            }
            if in_group[m] {
                return Err(Error::Parameter(format!(
                    "feature {m} appears in more than one group"
                )));
            }
            in_group[m] = true;
        }
    }
    for &m in &arch.monotone_singles {
        if m >= dim {
            return Err(Error::Parameter(format!(
                "monotone single {m} out of range for {dim} features"
            )));
        }
        if in_group[m] {
            return Err(Error::Parameter(format!(
                "feature {m} is in a group and cannot be a monotone single"
            )));
        }
    }
    if arch.link_units == 0 {
        return Err(Error::Parameter(
            "links need at least one softplus unit".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();

    let mut groups = Vec::with_capacity(arch.groups.len());
    for members in &arch.groups {
        let raw_weights: Vec<f64> = members.iter().map(|_| draw(0.3, 0.8)).collect();
        let raw_scale = draw(0.5, 1.0);
        let raw_coeffs: Vec<f64> = (0..arch.link_units).map(|_| draw(0.3, 0.8)).collect();

        // Knots spread over the reachable z-range under the initial weights;
        // training may refit them to data quantiles before the first step.
        let mut probe = GroupSubnet::new(
            members.clone(),
            raw_weights.clone(),
            MonotoneLink::new(raw_scale, raw_coeffs.clone(), vec![0.0; arch.link_units])?,
        )?;
        probe.sync();
        let z_lo: f64 = members
            .iter()
            .zip(probe.weights())
            .map(|(&m, &w)| w * space.lower()[m])
            .sum();
        let z_hi: f64 = members
            .iter()
            .zip(probe.weights())
            .map(|(&m, &w)| w * space.upper()[m])
            .sum();
        let knots: Vec<f64> = (1..=arch.link_units)
            .map(|j| z_lo + (z_hi - z_lo) * j as f64 / (arch.link_units + 1) as f64)
            .collect();

        groups.push(GroupSubnet::new(
            members.clone(),
            raw_weights,
            MonotoneLink::new(raw_scale, raw_coeffs, knots)?,
        )?);
    }

    let mut singles = Vec::new();
    for (feature, &grouped) in in_group.iter().enumerate() {
        if grouped {
            continue;
        }
        let monotone = arch.monotone_singles.contains(&feature);
        let params = if monotone {
            [
                draw(0.3, 0.9),
                draw(0.7, 1.2),
                draw(-1.0, 1.0),
                draw(0.3, 0.9),
                draw(0.7, 1.2),
                draw(-1.0, 1.0),
            ]
        } else {
            [
                draw(-0.5, 0.5),
                draw(0.5, 1.5),
                draw(-1.0, 1.0),
                draw(-0.5, 0.5),
                draw(0.5, 1.5),
                draw(-1.0, 1.0),
            ]
        };
        singles.push(SingleSubnet::new(
            feature,
            monotone,
            params,
            space.lower()[feature],
            space.range(feature),
        )?);
    }

    AdditiveMonotoneModel::new(id, space, groups, singles, 0.0)
}

/// Versioned on-disk form: raw parameters and knots only; derived weights
/// are reconstructed on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDocument {
    pub version: u32,
    pub id: String,
    pub space: FeatureSpace,
    pub groups: Vec<GroupDocument>,
    pub singles: Vec<SingleDocument>,
    pub intercept: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupDocument {
    pub members: Vec<usize>,
    pub raw_weights: Vec<f64>,
    pub link_raw_scale: f64,
    pub link_raw_coeffs: Vec<f64>,
    pub knots: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingleDocument {
    pub feature: usize,
    pub monotone: bool,
    pub params: [f64; 6],
    pub shift: f64,
    pub scale: f64,
}

pub const MODEL_DOCUMENT_VERSION: u32 = 1;

impl AdditiveMonotoneModel {
    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            version: MODEL_DOCUMENT_VERSION,
            id: self.id.clone(),
            space: (**self.space()).clone(),
            groups: self
                .groups
                .iter()
                .map(|g| GroupDocument {
                    members: g.members.clone(),
                    raw_weights: g.raw_weights.clone(),
                    link_raw_scale: g.link.raw_scale,
                    link_raw_coeffs: g.link.raw_coeffs.clone(),
                    knots: g.link.knots.clone(),
                })
                .collect(),
            singles: self
                .singles
                .iter()
                .map(|s| SingleDocument {
                    feature: s.feature,
                    monotone: s.monotone,
                    params: s.params,
                    shift: s.shift,
                    scale: s.scale,
                })
                .collect(),
            intercept: self.intercept,
        }
    }

    pub fn from_document(doc: ModelDocument) -> Result<Self> {
        if doc.version != MODEL_DOCUMENT_VERSION {
            return Err(Error::Parameter(format!(
                "unsupported model document version {} (expected {MODEL_DOCUMENT_VERSION})",
                doc.version
            )));
        }
        let space = Arc::new(doc.space);
        let groups = doc
            .groups
            .into_iter()
            .map(|g| {
                GroupSubnet::new(
                    g.members,
                    g.raw_weights,
                    MonotoneLink::new(g.link_raw_scale, g.link_raw_coeffs, g.knots)?,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let singles = doc
            .singles
            .into_iter()
            .map(|s| SingleSubnet::new(s.feature, s.monotone, s.params, s.shift, s.scale))
            .collect::<Result<Vec<_>>>()?;
        AdditiveMonotoneModel::new(doc.id, &space, groups, singles, doc.intercept)
    }

    pub fn save_json(&self, path: &std::path::Path) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.to_document())?;
        std::fs::write(path, json).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load_json(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_document(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monotonicity::{check_individual, check_strong_pairwise, ProbeConfig, Verdict};

    fn space9() -> Arc<FeatureSpace> {
        crate::data::credit_feature_space()
    }

    fn arch9() -> Architecture {
        Architecture::grouped(vec![0, 1, 2])
    }

    #[test]
    fn build_registers_strong_pairs_from_the_group() {
        let model = build_model("m", &space9(), &arch9(), 7).unwrap();
        let spec = model.monotone_spec();
        assert_eq!(spec.strong_pairs(), &[(0, 1), (0, 2), (1, 2)]);
        assert!(spec.individual().contains(&0));
        assert!(!spec.individual().contains(&3));
    }

    #[test]
    fn two_groups_pair_only_within_each_group() {
        let space = FeatureSpace::uniform(4, 0.0, 2.0).unwrap();
        let arch = Architecture {
            groups: vec![vec![0, 1], vec![2, 3]],
            monotone_singles: vec![],
            link_units: 2,
        };
        let model = build_model("m", &space, &arch, 1).unwrap();
        assert_eq!(model.monotone_spec().strong_pairs(), &[(0, 1), (2, 3)]);
    }

    #[test]
    fn degenerate_one_feature_group_is_a_monotone_curve() {
        let space = FeatureSpace::uniform(1, 0.0, 3.0).unwrap();
        let arch = Architecture::grouped(vec![0]);
        let model = build_model("m", &space, &arch, 3).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=30 {
            let v = model.value(&[3.0 * k as f64 / 30.0]);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn overlapping_partition_is_rejected() {
        let space = FeatureSpace::uniform(3, 0.0, 1.0).unwrap();
        let arch = Architecture {
            groups: vec![vec![0, 1], vec![1, 2]],
            monotone_singles: vec![],
            link_units: 2,
        };
        assert!(matches!(
            build_model("m", &space, &arch, 0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn fresh_model_is_certified() {
        let model = build_model("m", &space9(), &arch9(), 11).unwrap();
        let report = certify_constraints(&model);
        assert!(report.certified, "{:?}", report.issues);
        assert_eq!(report.chains.len(), 3);
        for chain in &report.chains {
            assert!(chain.weight_dominant >= chain.weight_dominated);
        }
    }

    #[test]
    fn corrupted_weights_fail_certification() {
        let mut model = build_model("m", &space9(), &arch9(), 11).unwrap();
        model.groups[0].weights[1] = model.groups[0].weights[0] + 1.0;
        let report = certify_constraints(&model);
        assert!(!report.certified);
        assert!(report.issues[0].contains("weight order"));
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        let model = build_model("m", &space9(), &arch9(), 5).unwrap();
        let handle = model.handle();
        let fd = crate::model::ModelHandle::new("fd", model.space(), {
            let m = model.clone();
            move |x: &[f64]| m.value(x)
        });
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let coords: Vec<f64> = (0..model.space().dim())
                .map(|i| {
                    let lo = model.space().lower()[i] + 0.05 * model.space().range(i);
                    let hi = model.space().upper()[i] - 0.05 * model.space().range(i);
                    lo + (hi - lo) * rng.random::<f64>()
                })
                .collect();
            let analytic = handle.gradient_raw(&coords);
            let numeric = fd.gradient_raw(&coords);
            for (a, n) in analytic.iter().zip(&numeric) {
                let denom = a.abs().max(1e-6);
                assert!(
                    ((a - n) / denom).abs() < 1e-6,
                    "analytic {a} vs numeric {n} at {coords:?}"
                );
            }
        }
    }

    #[test]
    fn certified_model_is_clean_at_high_sample_count() {
        let model = build_model("m", &space9(), &arch9(), 31).unwrap();
        assert!(certify_constraints(&model).certified);
        let cfg = ProbeConfig {
            samples: 100_000,
            seed: 424_242,
            ..ProbeConfig::default()
        };
        let handle = model.handle();
        let spec = model.monotone_spec();
        assert_eq!(
            check_individual(&handle, &spec, &cfg).unwrap().violations,
            0
        );
        assert_eq!(
            check_strong_pairwise(&handle, &spec, &cfg)
                .unwrap()
                .violations,
            0
        );
    }

    #[test]
    fn additive_models_register_as_handles() {
        let mut registry = crate::model::ModelRegistry::new();
        let model = build_model("credit_m", &space9(), &arch9(), 1).unwrap();
        registry.register(model.handle());
        let fetched = registry.get("credit_m").unwrap();
        let origin = space9().origin().unwrap();
        assert_eq!(
            fetched.evaluate(&origin).unwrap(),
            model.value(origin.coords())
        );
    }

    #[test]
    fn random_draws_pass_the_monotonicity_verifier() {
        // Structural soundness over a handful of draws; the acceptance suite
        // runs the full 50-draw version.
        for seed in 0..5u64 {
            let model = build_model(format!("m{seed}"), &space9(), &arch9(), seed).unwrap();
            let handle = model.handle();
            let spec = model.monotone_spec();
            let cfg = ProbeConfig {
                samples: 2000,
                seed: seed ^ 0xABCD,
                ..ProbeConfig::default()
            };
            let ind = check_individual(&handle, &spec, &cfg).unwrap();
            assert_eq!(ind.verdict, Verdict::NoViolationFound, "seed {seed}");
            let strong = check_strong_pairwise(&handle, &spec, &cfg).unwrap();
            assert_eq!(strong.verdict, Verdict::NoViolationFound, "seed {seed}");
        }
    }

    #[test]
    fn document_round_trip_preserves_values() {
        let model = build_model("m", &space9(), &arch9(), 21).unwrap();
        let doc = model.to_document();
        let json = serde_json::to_string(&doc).unwrap();
        let back =
            AdditiveMonotoneModel::from_document(serde_json::from_str(&json).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let coords: Vec<f64> = (0..model.space().dim())
                .map(|i| model.space().lower()[i] + model.space().range(i) * rng.random::<f64>())
                .collect();
            assert_eq!(model.value(&coords), back.value(&coords));
        }
    }

    #[test]
    fn predict_is_a_probability() {
        let model = build_model("m", &space9(), &arch9(), 2).unwrap();
        let origin = model.space().origin().unwrap();
        let p = model.predict(&origin).unwrap();
        assert!((0.0..=1.0).contains(&p));

        let mut confident = model.clone();
        confident.intercept = 40.0;
        assert!(confident.predict(&origin).unwrap() > 0.999);

        let zero_model = AdditiveMonotoneModel::new(
            "flat",
            &space9(),
            vec![],
            (0..9)
                .map(|f| {
                    SingleSubnet::new(f, false, [0.0; 6], space9().lower()[f], space9().range(f))
                        .unwrap()
                })
                .collect(),
            0.0,
        )
        .unwrap();
        assert_eq!(zero_model.predict(&origin).unwrap(), 0.5);
    }
}
