//! Multi-objective primitives. Dominance and front partitioning live here,
//! next to the utopia distance and the transforms that map raw outputs into
//! maximize-space `[0,1]`.
//!
//! Every objective is maximized. Raw predictor outputs that should be
//! minimized (docking energies, synthetic accessibility) are mapped through
//! a [`Transform`] first, so larger transformed values are always better.

use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParetoError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("utopia component {index} is not strictly positive")]
    ZeroUtopia { index: usize },
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("invalid objective spec: {0}")]
    InvalidSpec(String),
}

/// A point in transformed objective space.
///
/// Values produced by [`ObjectiveSpec::apply`] or [`ObjectiveVector::clamped`]
/// are finite and lie in `[0,1]`; the plain constructor only checks that the
/// vector is non-empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveVector<T>(Vec<T>);

impl<T> ObjectiveVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self, ParetoError> {
        if values.is_empty() {
            return Err(ParetoError::EmptyInput);
        }
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

impl<T: Scalar> ObjectiveVector<T> {
    /// Clamps every component into `[0,1]`, rejecting NaN and infinities.
    pub fn clamped(values: Vec<T>) -> Result<Self, ParetoError> {
        if values.is_empty() {
            return Err(ParetoError::EmptyInput);
        }
        let values = values
            .into_iter()
            .map(|v| {
                if v.is_finite() {
                    Ok(clamp_unit(v))
                } else {
                    Err(ParetoError::NonFinite(v.to_f64().unwrap_or(f64::NAN)))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self(values))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![T::zero(); dim.max(1)])
    }

    pub fn ones(dim: usize) -> Self {
        Self(vec![T::one(); dim.max(1)])
    }

    /// Component-wise maximum of two vectors of equal dimension.
    pub fn elementwise_max(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| if b > a { b } else { a })
                .collect(),
        )
    }
}

impl<T> Deref for ObjectiveVector<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> AsRef<[T]> for ObjectiveVector<T> {
    fn as_ref(&self) -> &[T] {
        &self.0
    }
}

fn clamp_unit<T: Scalar>(v: T) -> T {
    v.max(T::zero()).min(T::one())
}

fn check_dims<A, B>(x: &[A], y: &[B]) -> Result<(), ParetoError> {
    if x.len() != y.len() {
        return Err(ParetoError::Dimension {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(())
}

/// Strict Pareto dominance: `x >= y` everywhere and `x > y` somewhere.
pub fn dominates<T: PartialOrd>(x: &[T], y: &[T]) -> Result<bool, ParetoError> {
    check_dims(x, y)?;
    Ok(dominates_unchecked(x, y))
}

/// Weak dominance: `x >= y` in every component.
pub fn weakly_dominates<T: PartialOrd>(x: &[T], y: &[T]) -> Result<bool, ParetoError> {
    check_dims(x, y)?;
    Ok(x.iter().zip(y).all(|(a, b)| a >= b))
}

pub(crate) fn dominates_unchecked<T: PartialOrd>(x: &[T], y: &[T]) -> bool {
    let mut strict = false;
    for (a, b) in x.iter().zip(y) {
        if a < b {
            return false;
        }
        if a > b {
            strict = true;
        } else if !(a >= b) {
            // unordered (NaN): treat as not dominating
            return false;
        }
    }
    strict
}

/// Splits a set of vectors into Pareto fronts of indices.
///
/// Front 0 holds the non-dominated members; front `k` holds those that are
/// non-dominated once fronts `0..k` are removed. Indices inside a front are
/// in ascending input order, so identical vectors stay together in a stable
/// order.
pub fn pareto_partition<T, V>(set: &[V]) -> Result<Vec<Vec<usize>>, ParetoError>
where
    T: PartialOrd,
    V: AsRef<[T]>,
{
    let first = set.first().ok_or(ParetoError::EmptyInput)?;
    let dim = first.as_ref().len();
    for v in set {
        if v.as_ref().len() != dim {
            return Err(ParetoError::Dimension {
                expected: dim,
                got: v.as_ref().len(),
            });
        }
    }

    let n = set.len();
    // dominated_by[i]: number of members dominating i; beats[i]: members i dominates
    let mut dominated_by = vec![0usize; n];
    let mut beats: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (set[i].as_ref(), set[j].as_ref());
            if dominates_unchecked(a, b) {
                beats[i].push(j);
                dominated_by[j] += 1;
            } else if dominates_unchecked(b, a) {
                beats[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }

    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &beats[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    Ok(fronts)
}

/// Per-member front rank (0-based) derived from [`pareto_partition`].
pub fn pareto_ranks<T, V>(set: &[V]) -> Result<Vec<usize>, ParetoError>
where
    T: PartialOrd,
    V: AsRef<[T]>,
{
    let fronts = pareto_partition(set)?;
    let mut ranks = vec![0; set.len()];
    for (rank, front) in fronts.iter().enumerate() {
        for &i in front {
            ranks[i] = rank;
        }
    }
    Ok(ranks)
}

/// Normalized distance to the utopia point,
/// `sqrt(sum_d (max(0, u_d - y_d) / u_d)^2)`.
///
/// Components where `y` exceeds the utopia contribute nothing.
pub fn r2_distance<T: Scalar>(y: &[T], utopia: &[T]) -> Result<T, ParetoError> {
    check_dims(utopia, y)?;
    let mut acc = T::zero();
    for (index, (&yd, &ud)) in y.iter().zip(utopia).enumerate() {
        if !(ud > T::zero()) {
            return Err(ParetoError::ZeroUtopia { index });
        }
        let gap = (ud - yd).max(T::zero()) / ud;
        acc = acc + gap * gap;
    }
    Ok(acc.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Maximize,
    Minimize,
}

/// Maps a raw predictor value into maximize-space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    /// `raw` when maximizing, `1 - raw` when minimizing.
    #[default]
    Identity,
    /// Docking energy in kcal/mol: `-raw / 20`.
    Docking,
    /// Synthetic accessibility on the 1..10 scale: `(10 - raw) / 9`.
    SyntheticAccessibility,
    /// `a * raw + b` with `a != 0`; the sign of `a` carries the direction.
    Affine { a: f64, b: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveDef {
    pub name: String,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default)]
    pub transform: Transform,
    #[serde(default = "default_utopia")]
    pub utopia: f64,
}

fn default_utopia() -> f64 {
    1.0
}

impl ObjectiveDef {
    pub fn new(name: impl Into<String>, direction: Direction, transform: Transform) -> Self {
        Self {
            name: name.into(),
            direction,
            transform,
            utopia: 1.0,
        }
    }

    /// Transforms one raw value, clamping the result into `[0,1]`.
    pub fn transform<T: Scalar>(&self, raw: T) -> Result<T, ParetoError> {
        if !raw.is_finite() {
            return Err(ParetoError::NonFinite(raw.to_f64().unwrap_or(f64::NAN)));
        }
        let v = match self.transform {
            Transform::Identity => match self.direction {
                Direction::Maximize => raw,
                Direction::Minimize => T::one() - raw,
            },
            Transform::Docking => -raw / T::lit(20.0),
            Transform::SyntheticAccessibility => (T::lit(10.0) - raw) / T::lit(9.0),
            Transform::Affine { a, b } => T::lit(a) * raw + T::lit(b),
        };
        Ok(clamp_unit(v))
    }
}

/// The ordered list of objectives a search optimizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub objectives: Vec<ObjectiveDef>,
}

impl ObjectiveSpec {
    pub fn new(objectives: Vec<ObjectiveDef>) -> Result<Self, ParetoError> {
        let spec = Self { objectives };
        spec.validate()?;
        Ok(spec)
    }

    /// `dim` identity-transformed maximize objectives.
    pub fn identity(dim: usize) -> Self {
        Self {
            objectives: (0..dim.max(1))
                .map(|i| {
                    ObjectiveDef::new(
                        format!("obj{}", i + 1),
                        Direction::Maximize,
                        Transform::Identity,
                    )
                })
                .collect(),
        }
    }

    /// Two activity probabilities plus two docking scores.
    pub fn dual_target_default() -> Self {
        Self {
            objectives: vec![
                ObjectiveDef::new("activity_1", Direction::Maximize, Transform::Identity),
                ObjectiveDef::new("activity_2", Direction::Maximize, Transform::Identity),
                ObjectiveDef::new("docking_1", Direction::Minimize, Transform::Docking),
                ObjectiveDef::new("docking_2", Direction::Minimize, Transform::Docking),
            ],
        }
    }

    pub fn validate(&self) -> Result<(), ParetoError> {
        if self.objectives.is_empty() {
            return Err(ParetoError::InvalidSpec(
                "at least one objective required".into(),
            ));
        }
        for o in &self.objectives {
            if let Transform::Affine { a, b } = o.transform {
                if a == 0.0 || !a.is_finite() || !b.is_finite() {
                    return Err(ParetoError::InvalidSpec(format!(
                        "objective {}: affine transform needs finite a != 0",
                        o.name
                    )));
                }
            }
            if !(o.utopia > 0.0) || !o.utopia.is_finite() {
                return Err(ParetoError::InvalidSpec(format!(
                    "objective {}: utopia must be finite and > 0",
                    o.name
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.objectives.len()
    }

    pub fn utopia<T: Scalar>(&self) -> ObjectiveVector<T> {
        ObjectiveVector(self.objectives.iter().map(|o| T::lit(o.utopia)).collect())
    }

    /// Transforms a full raw vector.
    pub fn apply<T: Scalar>(&self, raw: &[T]) -> Result<ObjectiveVector<T>, ParetoError> {
        check_dims(&self.objectives, raw)?;
        let values = self
            .objectives
            .iter()
            .zip(raw)
            .map(|(o, &r)| o.transform(r))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ObjectiveVector(values))
    }
}
