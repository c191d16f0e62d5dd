//! Model handles, gradients, and monotonicity declarations.
//!
//! A [`ModelHandle`] wraps a pure scalar function over a [`FeatureSpace`],
//! optionally with a registered analytic gradient. Evaluation is
//! deterministic and side-effect free, so handles are safe to share across
//! threads.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{FeatureSpace, Point};

/// Default relative step for central differences.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Pure scalar evaluator over raw coordinates.
pub type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// Analytic gradient over raw coordinates.
pub type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// How a model's partial derivatives are obtained.
#[derive(Clone)]
pub enum GradientMode {
    /// A registered closed-form gradient.
    Analytic(GradFn),
    /// Symmetric central difference with step `h * max(1, |x_i|)`, shrunk
    /// near the bounds so probe points stay inside the box. At kinks this
    /// reports the average of the two one-sided slopes.
    CentralDifference { step: f64 },
}

impl fmt::Debug for GradientMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GradientMode::Analytic(_) => f.write_str("Analytic"),
            GradientMode::CentralDifference { step } => {
                write!(f, "CentralDifference {{ step: {step} }}")
            }
        }
    }
}

/// An evaluatable scalar model bound to a feature space.
#[derive(Clone)]
pub struct ModelHandle {
    id: String,
    space: Arc<FeatureSpace>,
    eval: EvalFn,
    gradient_mode: GradientMode,
}

impl fmt::Debug for ModelHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelHandle")
            .field("id", &self.id)
            .field("arity", &self.arity())
            .field("gradient_mode", &self.gradient_mode)
            .finish()
    }
}

impl ModelHandle {
    /// A model differentiated by central differences.
    pub fn new(
        id: impl Into<String>,
        space: &Arc<FeatureSpace>,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            id: id.into(),
            space: Arc::clone(space),
            eval: Arc::new(eval),
            gradient_mode: GradientMode::CentralDifference {
                step: DEFAULT_FD_STEP,
            },
        }
    }

    /// A model with a registered analytic gradient.
    pub fn with_analytic_gradient(
        id: impl Into<String>,
        space: &Arc<FeatureSpace>,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            id: id.into(),
            space: Arc::clone(space),
            eval: Arc::new(eval),
            gradient_mode: GradientMode::Analytic(Arc::new(gradient)),
        }
    }

    /// Replaces the gradient mode (e.g. to force finite differences with a
    /// custom step).
    pub fn with_gradient_mode(mut self, mode: GradientMode) -> Self {
        self.gradient_mode = mode;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn space(&self) -> &Arc<FeatureSpace> {
        &self.space
    }

    pub fn arity(&self) -> usize {
        self.space.dim()
    }

    pub fn gradient_mode(&self) -> &GradientMode {
        &self.gradient_mode
    }

    /// Evaluates `f` at a validated point of a geometrically equal space.
    pub fn evaluate(&self, x: &Point) -> Result<f64> {
        self.check_point(x)?;
        Ok((self.eval)(x.coords()))
    }

    /// Evaluates `f` on raw coordinates. Callers are responsible for keeping
    /// coordinates inside the box (interpolants and coalition mixes of
    /// validated points always are).
    pub fn evaluate_raw(&self, coords: &[f64]) -> f64 {
        (self.eval)(coords)
    }

    /// Gradient (analytic or central-difference) at a validated point.
    pub fn gradient(&self, x: &Point) -> Result<Vec<f64>> {
        self.check_point(x)?;
        Ok(self.gradient_raw(x.coords()))
    }

    /// Gradient on raw in-bounds coordinates.
    pub fn gradient_raw(&self, coords: &[f64]) -> Vec<f64> {
        match &self.gradient_mode {
            GradientMode::Analytic(g) => g(coords),
            GradientMode::CentralDifference { step } => self.central_difference(coords, *step),
        }
    }

    /// Symmetric central difference, per coordinate. The step is scale-aware
    /// (`h * max(1, |x_i|)`) and shrunk so both probes stay in bounds; at a
    /// bound the difference degrades to one-sided.
    fn central_difference(&self, coords: &[f64], step: f64) -> Vec<f64> {
        let lower = self.space.lower();
        let upper = self.space.upper();
        let mut work = coords.to_vec();
        let mut grad = Vec::with_capacity(coords.len());
        for i in 0..coords.len() {
            let x = coords[i];
            let h = step * x.abs().max(1.0);
            let hp = h.min(upper[i] - x).max(0.0);
            let hm = h.min(x - lower[i]).max(0.0);
            let d = if hp > 0.0 && hm > 0.0 {
                work[i] = x + hp;
                let fp = (self.eval)(&work);
                work[i] = x - hm;
                let fm = (self.eval)(&work);
                (fp - fm) / (hp + hm)
            } else if hp > 0.0 {
                work[i] = x + hp;
                let fp = (self.eval)(&work);
                work[i] = x;
                let f0 = (self.eval)(&work);
                (fp - f0) / hp
            } else if hm > 0.0 {
                work[i] = x;
                let f0 = (self.eval)(&work);
                work[i] = x - hm;
                let fm = (self.eval)(&work);
                (f0 - fm) / hm
            } else {
                0.0
            };
            work[i] = x;
            grad.push(d);
        }
        grad
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        if x.dim() != self.arity() {
            return Err(Error::DimensionMismatch {
                expected: self.arity(),
                actual: x.dim(),
            });
        }
        if !self.space.same_geometry(x.space()) {
            return Err(Error::SpaceMismatch(format!(
                "model `{}` is bound to different bounds than the point",
                self.id
            )));
        }
        Ok(())
    }
}

/// In-process registry of models keyed by id.
#[derive(Default)]
pub struct ModelRegistry {
    models: BTreeMap<String, ModelHandle>,
}

impl ModelRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers (or replaces) a model under its id.
    pub fn register(&mut self, model: ModelHandle) {
        self.models.insert(model.id().to_string(), model);
    }

    pub fn get(&self, id: &str) -> Result<&ModelHandle> {
        self.models
            .get(id)
            .ok_or_else(|| Error::UnknownModel(id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.models.keys().map(String::as_str)
    }
}

/// Declares which features of a model are monotone, and which ordered pairs
/// carry a priority relation (first index dominates the second).
///
/// Every feature named in a pair must also be individually monotone, pairs
/// never relate a feature to itself, and no pair repeats.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawMonotoneSpec", into = "RawMonotoneSpec")]
pub struct MonotoneSpec {
    individual: BTreeSet<usize>,
    weak_pairs: Vec<(usize, usize)>,
    strong_pairs: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct RawMonotoneSpec {
    #[serde(default)]
    individual: Vec<usize>,
    #[serde(default)]
    weak_pairs: Vec<(usize, usize)>,
    #[serde(default)]
    strong_pairs: Vec<(usize, usize)>,
}

impl TryFrom<RawMonotoneSpec> for MonotoneSpec {
    type Error = Error;
    fn try_from(raw: RawMonotoneSpec) -> Result<Self> {
        MonotoneSpec::new(raw.individual, raw.weak_pairs, raw.strong_pairs)
    }
}

impl From<MonotoneSpec> for RawMonotoneSpec {
    fn from(s: MonotoneSpec) -> Self {
        RawMonotoneSpec {
            individual: s.individual.into_iter().collect(),
            weak_pairs: s.weak_pairs,
            strong_pairs: s.strong_pairs,
        }
    }
}

impl MonotoneSpec {
    pub fn new(
        individual: impl IntoIterator<Item = usize>,
        weak_pairs: Vec<(usize, usize)>,
        strong_pairs: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let individual: BTreeSet<usize> = individual.into_iter().collect();
        for (label, pairs) in [("weak", &weak_pairs), ("strong", &strong_pairs)] {
            let mut seen = BTreeSet::new();
            for &(dominant, dominated) in pairs {
                if dominant == dominated {
                    return Err(Error::Parameter(format!(
                        "{label} pair ({dominant}, {dominated}) relates a feature to itself"
                    )));
                }
                if !seen.insert((dominant, dominated)) {
                    return Err(Error::Parameter(format!(
                        "duplicate {label} pair ({dominant}, {dominated})"
                    )));
                }
                for idx in [dominant, dominated] {
                    if !individual.contains(&idx) {
                        return Err(Error::Parameter(format!(
                            "feature {idx} appears in a {label} pair but is not \
                             declared individually monotone"
                        )));
                    }
                }
            }
        }
        Ok(Self {
            individual,
            weak_pairs,
            strong_pairs,
        })
    }

    /// Spec with individually monotone features only.
    pub fn individual_only(features: impl IntoIterator<Item = usize>) -> Result<Self> {
        Self::new(features, Vec::new(), Vec::new())
    }

    pub fn individual(&self) -> &BTreeSet<usize> {
        &self.individual
    }

    pub fn weak_pairs(&self) -> &[(usize, usize)] {
        &self.weak_pairs
    }

    pub fn strong_pairs(&self) -> &[(usize, usize)] {
        &self.strong_pairs
    }

    /// Pairs usable under the weak (equal-values) premise: the declared weak
    /// pairs plus every strong pair, since a stronger priority relation
    /// implies the weaker one.
    pub fn effective_weak_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = self.weak_pairs.clone();
        for &p in &self.strong_pairs {
            if !pairs.contains(&p) {
                pairs.push(p);
            }
        }
        pairs
    }

    pub fn is_empty(&self) -> bool {
        self.individual.is_empty()
    }

    /// Errors if any declared index is out of range for `dim` features.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        let max = self.individual.iter().max().copied().unwrap_or(0);
        if max >= dim {
            return Err(Error::Parameter(format!(
                "monotonicity declaration names feature {max} but the model has {dim} features"
            )));
        }
        Ok(())
    }
}
