//! The system under audit, seen only through its input/output behaviour.

use std::collections::BTreeMap;
use std::error::Error as StdError;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::argument::InputClassSpec;
use crate::catalog::Catalog;

/// Default cosine threshold for keyword similarity.
pub const DEFAULT_SIMILARITY_THRESHOLD: f64 = 0.8;

/// A query to the recommender: a user and the movie they are looking at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InputPoint {
    pub user_id: u32,
    pub movie_id: u32,
}

impl InputPoint {
    pub fn new(user_id: u32, movie_id: u32) -> InputPoint {
        InputPoint { user_id, movie_id }
    }
}

impl fmt::Display for InputPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(user {}, movie {})", self.user_id, self.movie_id)
    }
}

/// A ranked list of recommended movie ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OutputValue(pub Vec<u32>);

impl OutputValue {
    pub fn movie_ids(&self) -> &[u32] {
        &self.0
    }
}

#[derive(Debug, Error)]
#[error("evaluation failed for input {input}: {source}")]
pub struct EvaluationError {
    pub input: InputPoint,
    #[source]
    pub source: Box<dyn StdError + Send + Sync>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("movie {0} is not in the catalog")]
pub struct UnknownInput(pub u32);

/// An opaque trained function together with the inputs it was trained on.
pub trait LearningSystem: Send + Sync {
    fn evaluate(&self, input: &InputPoint) -> Result<OutputValue, Box<dyn StdError + Send + Sync>>;

    /// The input half of the training data.
    fn input_dataset(&self) -> Vec<InputPoint>;
}

/// Wraps a [`LearningSystem`] so that each input is evaluated at most once
/// per session; later calls return the first answer.
pub struct SuspectSystem {
    inner: Box<dyn LearningSystem>,
    cache: RwLock<BTreeMap<InputPoint, OutputValue>>,
    calls: AtomicUsize,
}

impl SuspectSystem {
    pub fn new(inner: impl LearningSystem + 'static) -> SuspectSystem {
        SuspectSystem {
            inner: Box::new(inner),
            cache: RwLock::new(BTreeMap::new()),
            calls: AtomicUsize::new(0),
        }
    }

    pub fn evaluate(&self, input: &InputPoint) -> Result<OutputValue, EvaluationError> {
        if let Some(hit) = self.cache.read().expect("cache lock poisoned").get(input) {
            return Ok(hit.clone());
        }
        // The write lock is held across the call so concurrent misses on the
        // same input still reach the wrapped system only once.
        let mut cache = self.cache.write().expect("cache lock poisoned");
        if let Some(hit) = cache.get(input) {
            return Ok(hit.clone());
        }
        self.calls.fetch_add(1, Ordering::Relaxed);
        let output = self
            .inner
            .evaluate(input)
            .map_err(|source| EvaluationError { input: *input, source })?;
        cache.insert(*input, output.clone());
        Ok(output)
    }

    pub fn input_dataset(&self) -> Vec<InputPoint> {
        self.inner.input_dataset()
    }

    /// Number of calls that reached the wrapped system.
    pub fn underlying_calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

impl fmt::Debug for SuspectSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SuspectSystem")
            .field("underlying_calls", &self.underlying_calls())
            .finish_non_exhaustive()
    }
}

/// A sparse vector with non-zero entries keyed by dimension.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector(BTreeMap<usize, f64>);

impl SparseVector {
    /// Entries with value zero are dropped.
    pub fn from_entries(entries: impl IntoIterator<Item = (usize, f64)>) -> SparseVector {
        SparseVector(entries.into_iter().filter(|&(_, v)| v != 0.0).collect())
    }

    pub fn from_dense(values: &[f64]) -> SparseVector {
        SparseVector::from_entries(values.iter().copied().enumerate())
    }

    pub fn nnz(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (small, large) = if self.0.len() <= other.0.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.0.iter().filter_map(|(k, v)| large.0.get(k).map(|w| v * w)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.0.values().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> SparseVector {
        SparseVector::from_entries(self.0.iter().map(|(&k, &v)| (k, v * factor)))
    }
}

/// `⟨v1,v2⟩ / (‖v1‖‖v2‖)`, or 0 when either vector is zero.
pub fn cosine_similarity(v1: &SparseVector, v2: &SparseVector) -> f64 {
    let (n1, n2) = (v1.norm(), v2.norm());
    if n1 == 0.0 || n2 == 0.0 {
        return 0.0;
    }
    v1.dot(v2) / (n1 * n2)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("similarity threshold must lie in [0, 1], got {0}")]
pub struct InvalidThreshold(pub String);

/// When two inputs count as similar.
#[derive(Debug, Clone, PartialEq)]
pub enum SimilaritySpec {
    /// Same user, and keyword cosine of the two movies at least `threshold`.
    SameUserKeywordCosine { threshold: f64 },
    /// Both inputs fall in exactly the same subset of `classes`.
    SameClass { classes: Vec<InputClassSpec> },
}

impl SimilaritySpec {
    pub fn keyword_cosine(threshold: f64) -> Result<SimilaritySpec, InvalidThreshold> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(InvalidThreshold(threshold.to_string()));
        }
        Ok(SimilaritySpec::SameUserKeywordCosine { threshold })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SimilaritySpec::SameUserKeywordCosine { .. } => "same_user_keyword_cosine",
            SimilaritySpec::SameClass { .. } => "same_class",
        }
    }
}

impl Default for SimilaritySpec {
    fn default() -> Self {
        SimilaritySpec::SameUserKeywordCosine {
            threshold: DEFAULT_SIMILARITY_THRESHOLD,
        }
    }
}

/// Decides whether two inputs are similar under `spec`.
pub fn similar(
    spec: &SimilaritySpec,
    x1: &InputPoint,
    x2: &InputPoint,
    catalog: &Catalog,
) -> Result<bool, UnknownInput> {
    match spec {
        SimilaritySpec::SameUserKeywordCosine { threshold } => {
            let v1 = catalog.keyword_vector(x1.movie_id).ok_or(UnknownInput(x1.movie_id))?;
            let v2 = catalog.keyword_vector(x2.movie_id).ok_or(UnknownInput(x2.movie_id))?;
            Ok(x1.user_id == x2.user_id && cosine_similarity(v1, v2) >= *threshold)
        }
        SimilaritySpec::SameClass { classes } => {
            let m1 = catalog.get(x1.movie_id).ok_or(UnknownInput(x1.movie_id))?;
            let m2 = catalog.get(x2.movie_id).ok_or(UnknownInput(x2.movie_id))?;
            Ok(classes.iter().all(|c| c.contains(m1) == c.contains(m2)))
        }
    }
}
