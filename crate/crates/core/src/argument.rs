//! Black-box arguments, topics and the attack relation between arguments.
//!
//! A black-box argument `⟨x, c⟩` claims that the audited system's output on
//! input `x` is described by the atom `c`. Two arguments attack each other
//! when their inputs are similar but their conclusions differ.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, MovieRecord};
use crate::policy::Atom;
use crate::recommender::DescriptionMap;
use crate::system::{similar, InputPoint, SimilaritySpec, SuspectSystem, UnknownInput};

/// Default cap on sampled users per movie when grounding an input class.
pub const DEFAULT_MAX_USERS_PER_MOVIE: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlackBoxArgument {
    pub support: InputPoint,
    pub conclusion: Atom,
}

impl BlackBoxArgument {
    pub fn new(support: InputPoint, conclusion: Atom) -> Self {
        BlackBoxArgument { support, conclusion }
    }
}

impl fmt::Display for BlackBoxArgument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}>", self.support, self.conclusion)
    }
}

/// Movie attributes a class predicate can test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Column {
    MovieId,
    Title,
    Genres,
    Keywords,
    DirectorGender,
    ProductionType,
}

impl Column {
    pub fn name(self) -> &'static str {
        match self {
            Column::MovieId => "movie_id",
            Column::Title => "title",
            Column::Genres => "genres",
            Column::Keywords => "keywords",
            Column::DirectorGender => "director_gender",
            Column::ProductionType => "production_type",
        }
    }

    fn parse(name: &str) -> Option<Column> {
        [
            Column::MovieId,
            Column::Title,
            Column::Genres,
            Column::Keywords,
            Column::DirectorGender,
            Column::ProductionType,
        ]
        .into_iter()
        .find(|c| c.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PredicateOp {
    Equals,
    Contains,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad class predicate '{input}': {reason}")]
pub struct PredicateError {
    pub input: String,
    pub reason: String,
}

/// A test on one movie column: `<column> == "<literal>"` or
/// `<column> contains "<literal>"`.
///
/// On the set-valued columns (`genres`, `keywords`) `contains` is membership
/// and `==` requires the set to be exactly the literal. On scalar columns
/// `==` is string equality and `contains` is substring search.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeaturePredicate {
    pub column: Column,
    pub op: PredicateOp,
    pub value: String,
}

impl FeaturePredicate {
    pub fn matches(&self, movie: &MovieRecord) -> bool {
        let set = match self.column {
            Column::Genres => Some(&movie.genres),
            Column::Keywords => Some(&movie.keywords),
            _ => None,
        };
        if let Some(set) = set {
            return match self.op {
                PredicateOp::Contains => set.contains(&self.value),
                PredicateOp::Equals => set.len() == 1 && set.contains(&self.value),
            };
        }
        let scalar = match self.column {
            Column::MovieId => movie.movie_id.to_string(),
            Column::Title => movie.title.clone(),
            Column::DirectorGender => movie.director_gender.code().to_string(),
            Column::ProductionType => movie.production_type.name().to_string(),
            Column::Genres | Column::Keywords => unreachable!(),
        };
        match self.op {
            PredicateOp::Equals => scalar == self.value,
            PredicateOp::Contains => scalar.contains(&self.value),
        }
    }
}

impl fmt::Display for FeaturePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.op {
            PredicateOp::Equals => "==",
            PredicateOp::Contains => "contains",
        };
        write!(f, "{} {} \"{}\"", self.column.name(), op, self.value)
    }
}

impl FromStr for FeaturePredicate {
    type Err = PredicateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fail = |reason: &str| PredicateError {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let s = s.trim();
        let (column, rest) = s
            .split_once(char::is_whitespace)
            .ok_or_else(|| fail("expected '<column> == \"<literal>\"' or '<column> contains \"<literal>\"'"))?;
        let column = Column::parse(column).ok_or_else(|| fail("unknown column"))?;
        let rest = rest.trim_start();
        let (op, literal) = if let Some(lit) = rest.strip_prefix("==") {
            (PredicateOp::Equals, lit)
        } else if let Some(lit) = rest.strip_prefix("contains") {
            (PredicateOp::Contains, lit)
        } else {
            return Err(fail("expected '==' or 'contains'"));
        };
        let value = literal
            .trim()
            .strip_prefix('"')
            .and_then(|l| l.strip_suffix('"'))
            .filter(|v| !v.contains('"'))
            .ok_or_else(|| fail("literal must be double-quoted"))?;
        Ok(FeaturePredicate {
            column,
            op,
            value: value.to_string(),
        })
    }
}

/// A conjunction of feature predicates; the empty conjunction admits every input.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct InputClassSpec {
    predicates: Vec<FeaturePredicate>,
}

impl InputClassSpec {
    pub fn new(predicates: Vec<FeaturePredicate>) -> Self {
        let mut seen = BTreeSet::new();
        let predicates = predicates.into_iter().filter(|p| seen.insert(p.clone())).collect();
        InputClassSpec { predicates }
    }

    /// Parses `p1 && p2 && ...`.
    pub fn parse_conjunction(s: &str) -> Result<Self, PredicateError> {
        let predicates = s
            .split("&&")
            .map(str::parse)
            .collect::<Result<Vec<FeaturePredicate>, _>>()?;
        Ok(InputClassSpec::new(predicates))
    }

    pub fn predicates(&self) -> &[FeaturePredicate] {
        &self.predicates
    }

    pub fn contains(&self, movie: &MovieRecord) -> bool {
        self.predicates.iter().all(|p| p.matches(movie))
    }

    /// True iff `self` imposes strictly more predicates than `other`, so its
    /// inputs are a subset of `other`'s.
    pub fn is_strict_refinement_of(&self, other: &InputClassSpec) -> bool {
        let mine: BTreeSet<_> = self.predicates.iter().collect();
        let theirs: BTreeSet<_> = other.predicates.iter().collect();
        mine.len() > theirs.len() && mine.is_superset(&theirs)
    }
}

impl fmt::Display for InputClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.predicates.is_empty() {
            return f.write_str("all inputs");
        }
        for (i, p) in self.predicates.iter().enumerate() {
            if i > 0 {
                f.write_str(" && ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// A dialogue topic: a class of acceptable inputs and the descriptors that
/// count as relevant answers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Topic {
    pub label: String,
    pub input_class: InputClassSpec,
    pub descriptors: BTreeSet<Atom>,
}

impl Topic {
    pub fn new(label: impl Into<String>, input_class: InputClassSpec, descriptors: BTreeSet<Atom>) -> Self {
        Topic {
            label: label.into(),
            input_class,
            descriptors,
        }
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// True iff the argument's support lies in the topic's class and its
/// conclusion is one of the topic's descriptors.
pub fn related_to(arg: &BlackBoxArgument, topic: &Topic, catalog: &Catalog) -> Result<bool, UnknownInput> {
    let movie = catalog
        .get(arg.support.movie_id)
        .ok_or(UnknownInput(arg.support.movie_id))?;
    Ok(topic.input_class.contains(movie) && topic.descriptors.contains(&arg.conclusion))
}

/// `a1` attacks `a2` iff their supports are similar and conclusions differ.
pub fn attacks(
    a1: &BlackBoxArgument,
    a2: &BlackBoxArgument,
    spec: &SimilaritySpec,
    catalog: &Catalog,
) -> Result<bool, UnknownInput> {
    let similar = similar(spec, &a1.support, &a2.support, catalog)?;
    Ok(similar && a1.conclusion != a2.conclusion)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingLimits {
    pub max_users_per_movie: usize,
}

impl Default for SamplingLimits {
    fn default() -> Self {
        SamplingLimits {
            max_users_per_movie: DEFAULT_MAX_USERS_PER_MOVIE,
        }
    }
}

/// The grounded inputs of a topic's class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicSample {
    /// Sampled inputs ordered by `(movie_id, user_id)`.
    pub inputs: Vec<InputPoint>,
    /// Number of dataset inputs in the class before the per-movie cap.
    pub matching: usize,
}

/// Grounds a topic's input class in the system's dataset: every dataset
/// input whose movie is in the class, keeping the lowest user ids per movie
/// up to the sampling cap.
pub fn sample_topic_inputs(
    system: &SuspectSystem,
    topic: &Topic,
    catalog: &Catalog,
    sampling: SamplingLimits,
) -> Result<TopicSample, UnknownInput> {
    let mut candidates = Vec::new();
    for x in system.input_dataset() {
        let movie = catalog.get(x.movie_id).ok_or(UnknownInput(x.movie_id))?;
        if topic.input_class.contains(movie) {
            candidates.push(x);
        }
    }
    candidates.sort_by_key(|x| (x.movie_id, x.user_id));
    candidates.dedup();
    let matching = candidates.len();
    let mut inputs = Vec::new();
    let mut current = None;
    let mut taken = 0;
    for x in candidates {
        if current != Some(x.movie_id) {
            current = Some(x.movie_id);
            taken = 0;
        }
        if taken < sampling.max_users_per_movie {
            inputs.push(x);
            taken += 1;
        }
    }
    Ok(TopicSample { inputs, matching })
}

/// The argument generator: every argument `⟨x, c⟩` related to `topic` with
/// `x` a sampled input and `c` a descriptor of the system's output on `x`.
///
/// Arguments come in `(movie_id, user_id)` order, and by descriptor within
/// one input. Inputs whose descriptors all fall outside the topic contribute
/// nothing.
pub fn generate_arguments(
    system: &SuspectSystem,
    describe: &dyn DescriptionMap,
    topic: &Topic,
    catalog: &Catalog,
    sampling: SamplingLimits,
) -> Result<Vec<BlackBoxArgument>, crate::Error> {
    let sample = sample_topic_inputs(system, topic, catalog, sampling)?;
    let mut out = Vec::new();
    for x in sample.inputs {
        let y = system.evaluate(&x)?;
        let descriptors = describe.describe(&y).map_err(|source| crate::Error::Description {
            input: x,
            message: source.to_string(),
        })?;
        out.extend(
            descriptors
                .into_iter()
                .filter(|c| topic.descriptors.contains(c))
                .map(|c| BlackBoxArgument::new(x, c)),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{DirectorGender, ProductionType};

    fn atom(s: &str) -> Atom {
        Atom::parse(s).unwrap()
    }

    fn movie(id: u32, genres: &[&str], keywords: &[&str], gender: DirectorGender) -> MovieRecord {
        MovieRecord {
            movie_id: id,
            title: format!("Movie {id}"),
            genres: genres.iter().map(|s| s.to_string()).collect(),
            keywords: keywords.iter().map(|s| s.to_string()).collect(),
            director_gender: gender,
            production_type: ProductionType::Independent,
        }
    }

    fn catalog() -> Catalog {
        Catalog::new([
            movie(1, &["Action", "Drama"], &["a", "b"], DirectorGender::Female),
            movie(2, &["Comedy"], &["a", "b"], DirectorGender::Male),
            movie(3, &["Action"], &["z"], DirectorGender::Female),
        ])
        .unwrap()
    }

    fn topic(class: &str, descriptors: &[&str]) -> Topic {
        let input_class = if class.is_empty() {
            InputClassSpec::default()
        } else {
            InputClassSpec::parse_conjunction(class).unwrap()
        };
        Topic::new("t", input_class, descriptors.iter().map(|d| atom(d)).collect())
    }

    #[test]
    fn predicate_parsing() {
        let p: FeaturePredicate = "director_gender == \"F\"".parse().unwrap();
        assert_eq!(p.column, Column::DirectorGender);
        assert_eq!(p.op, PredicateOp::Equals);
        assert_eq!(p.to_string(), "director_gender == \"F\"");
        let p: FeaturePredicate = "  genres   contains   \"Action\" ".parse().unwrap();
        assert_eq!(p.to_string(), "genres contains \"Action\"");
        assert!("budget == \"1\"".parse::<FeaturePredicate>().is_err());
        assert!("genres ~ \"x\"".parse::<FeaturePredicate>().is_err());
        assert!("genres == Action".parse::<FeaturePredicate>().is_err());
        assert!("genres".parse::<FeaturePredicate>().is_err());
    }

    #[test]
    fn predicate_semantics() {
        let m = movie(7, &["Action", "Drama"], &["heist"], DirectorGender::Female);
        let check = |s: &str| s.parse::<FeaturePredicate>().unwrap().matches(&m);
        assert!(check("genres contains \"Action\""));
        assert!(!check("genres == \"Action\""));
        assert!(check("keywords == \"heist\""));
        assert!(check("director_gender == \"F\""));
        assert!(check("production_type == \"independent\""));
        assert!(check("title contains \"ovie\""));
        assert!(check("movie_id == \"7\""));
    }

    #[test]
    fn refinement_is_strict_superset() {
        let w = InputClassSpec::parse_conjunction("director_gender == \"F\"").unwrap();
        let wa = InputClassSpec::parse_conjunction("director_gender == \"F\" && genres contains \"Action\"").unwrap();
        assert!(wa.is_strict_refinement_of(&w));
        assert!(!w.is_strict_refinement_of(&wa));
        assert!(!w.is_strict_refinement_of(&w));
        assert!(w.is_strict_refinement_of(&InputClassSpec::default()));
    }

    #[test]
    fn relatedness() {
        let cat = catalog();
        let t = topic("director_gender == \"F\"", &["highVariety"]);
        let arg = |m, c: &str| BlackBoxArgument::new(InputPoint::new(1, m), atom(c));
        assert!(related_to(&arg(1, "highVariety"), &t, &cat).unwrap());
        assert!(!related_to(&arg(1, "lowVariety"), &t, &cat).unwrap());
        assert!(!related_to(&arg(2, "highVariety"), &t, &cat).unwrap());
        assert_eq!(related_to(&arg(9, "highVariety"), &t, &cat), Err(UnknownInput(9)));
    }

    #[test]
    fn attack_relation() {
        let cat = catalog();
        let spec = SimilaritySpec::default();
        let a = BlackBoxArgument::new(InputPoint::new(1, 1), atom("highVariety"));
        let b = BlackBoxArgument::new(InputPoint::new(1, 1), atom("mediumVariety"));
        let c = BlackBoxArgument::new(InputPoint::new(1, 2), atom("highVariety"));
        let d = BlackBoxArgument::new(InputPoint::new(2, 2), atom("lowVariety"));
        assert!(attacks(&a, &b, &spec, &cat).unwrap());
        assert!(attacks(&b, &a, &spec, &cat).unwrap());
        assert!(!attacks(&a, &c, &spec, &cat).unwrap());
        assert!(!attacks(&a, &a, &spec, &cat).unwrap());
        assert!(!attacks(&a, &d, &spec, &cat).unwrap());
        // movies 1 and 2 share keywords, so same-user different conclusions clash
        assert!(attacks(&b, &c, &spec, &cat).unwrap());
    }
}
