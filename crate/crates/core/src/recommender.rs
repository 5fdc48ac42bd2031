//! A deterministic content-then-rating recommender used as the demo suspect.
//!
//! For an input `(user, movie)` every other movie is scored by keyword cosine
//! to the input movie and the 20 best are kept. Those are re-ranked by mean
//! rating across all users (0 when unrated) and the first 10 returned. Every
//! tie is broken by ascending movie id.
//!
//! The output is then summarised by a [`VarietyDescriber`], which maps the
//! number of distinct genres among the recommendations to one of
//! `highVariety`, `mediumVariety` or `lowVariety`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::error::Error as StdError;
use std::sync::Arc;

use thiserror::Error;

use crate::catalog::{Catalog, Ratings};
use crate::policy::Atom;
use crate::system::{cosine_similarity, InputPoint, LearningSystem, OutputValue, UnknownInput};

/// Content-based candidates kept before rating-based re-ranking.
pub const CANDIDATE_POOL: usize = 20;
/// Length of every recommendation list.
pub const RECOMMENDATION_LEN: usize = 10;

pub const HIGH_VARIETY: &str = "highVariety";
pub const MEDIUM_VARIETY: &str = "mediumVariety";
pub const LOW_VARIETY: &str = "lowVariety";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecommendError {
    #[error("movie {0} is not in the catalog")]
    UnknownMovie(u32),
    #[error("catalog has {0} movies, at least {min} are needed", min = RECOMMENDATION_LEN + 1)]
    InsufficientCatalog(usize),
}

pub fn recommend(
    catalog: &Catalog,
    ratings: &Ratings,
    _user_id: u32,
    movie_id: u32,
) -> Result<OutputValue, RecommendError> {
    let query = catalog
        .keyword_vector(movie_id)
        .ok_or(RecommendError::UnknownMovie(movie_id))?;
    if catalog.len() < RECOMMENDATION_LEN + 1 {
        return Err(RecommendError::InsufficientCatalog(catalog.len()));
    }

    let mut candidates: Vec<(f64, u32)> = catalog
        .movies()
        .filter(|m| m.movie_id != movie_id)
        .map(|m| {
            let v = catalog.keyword_vector(m.movie_id).expect("catalog vector");
            (cosine_similarity(query, v), m.movie_id)
        })
        .collect();
    candidates.sort_by(|a, b| descending(a.0, b.0).then(a.1.cmp(&b.1)));
    candidates.truncate(CANDIDATE_POOL);

    let mut ranked: Vec<(f64, u32)> = candidates
        .into_iter()
        .map(|(_, id)| (ratings.mean_rating(id).unwrap_or(0.0), id))
        .collect();
    ranked.sort_by(|a, b| descending(a.0, b.0).then(a.1.cmp(&b.1)));
    Ok(OutputValue(
        ranked.into_iter().take(RECOMMENDATION_LEN).map(|(_, id)| id).collect(),
    ))
}

fn descending(a: f64, b: f64) -> Ordering {
    b.total_cmp(&a)
}

/// Genre-count cut-offs for the variety descriptors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DescriptorThresholds {
    /// At least this many distinct genres is `highVariety`.
    pub high_min_genres: usize,
    /// At most this many distinct genres is `lowVariety`.
    pub low_max_genres: usize,
}

impl DescriptorThresholds {
    pub fn new(high_min_genres: usize, low_max_genres: usize) -> Result<Self, InvalidThresholds> {
        if low_max_genres >= high_min_genres {
            return Err(InvalidThresholds {
                high_min_genres,
                low_max_genres,
            });
        }
        Ok(DescriptorThresholds {
            high_min_genres,
            low_max_genres,
        })
    }
}

impl Default for DescriptorThresholds {
    fn default() -> Self {
        DescriptorThresholds {
            high_min_genres: 10,
            low_max_genres: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("low_max_genres ({low_max_genres}) must be below high_min_genres ({high_min_genres})")]
pub struct InvalidThresholds {
    pub high_min_genres: usize,
    pub low_max_genres: usize,
}

/// Summarises a recommendation list by how many distinct genres it covers.
pub fn describe_output(
    catalog: &Catalog,
    output: &OutputValue,
    thresholds: &DescriptorThresholds,
) -> Result<Atom, UnknownInput> {
    let mut genres = BTreeSet::new();
    for &id in output.movie_ids() {
        let movie = catalog.get(id).ok_or(UnknownInput(id))?;
        genres.extend(movie.genres.iter().map(String::as_str));
    }
    let count = genres.len();
    let name = if count >= thresholds.high_min_genres {
        HIGH_VARIETY
    } else if count <= thresholds.low_max_genres {
        LOW_VARIETY
    } else {
        MEDIUM_VARIETY
    };
    Ok(Atom::parse(name).expect("descriptor names are valid atoms"))
}

/// Translates raw outputs into descriptor atoms of the policy language.
pub trait DescriptionMap: Send + Sync {
    fn describe(&self, output: &OutputValue) -> Result<BTreeSet<Atom>, Box<dyn StdError + Send + Sync>>;

    /// Every atom `describe` can return.
    fn range(&self) -> BTreeSet<Atom>;
}

/// The genre-variety description map.
#[derive(Debug, Clone)]
pub struct VarietyDescriber {
    catalog: Arc<Catalog>,
    thresholds: DescriptorThresholds,
}

impl VarietyDescriber {
    pub fn new(catalog: Arc<Catalog>, thresholds: DescriptorThresholds) -> Self {
        VarietyDescriber { catalog, thresholds }
    }
}

impl DescriptionMap for VarietyDescriber {
    fn describe(&self, output: &OutputValue) -> Result<BTreeSet<Atom>, Box<dyn StdError + Send + Sync>> {
        Ok(BTreeSet::from([describe_output(
            &self.catalog,
            output,
            &self.thresholds,
        )?]))
    }

    fn range(&self) -> BTreeSet<Atom> {
        [HIGH_VARIETY, MEDIUM_VARIETY, LOW_VARIETY]
            .into_iter()
            .map(|s| Atom::parse(s).expect("descriptor names are valid atoms"))
            .collect()
    }
}

/// [`recommend`] packaged as a [`LearningSystem`] trained on the rated pairs.
#[derive(Debug, Clone)]
pub struct ToyRecommender {
    catalog: Arc<Catalog>,
    ratings: Arc<Ratings>,
}

impl ToyRecommender {
    pub fn new(catalog: Arc<Catalog>, ratings: Arc<Ratings>) -> Self {
        ToyRecommender { catalog, ratings }
    }
}

impl LearningSystem for ToyRecommender {
    fn evaluate(&self, input: &InputPoint) -> Result<OutputValue, Box<dyn StdError + Send + Sync>> {
        Ok(recommend(&self.catalog, &self.ratings, input.user_id, input.movie_id)?)
    }

    fn input_dataset(&self) -> Vec<InputPoint> {
        self.ratings.rated_inputs().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{DirectorGender, MovieRecord, ProductionType, RatingRecord};

    fn movie(id: u32, genres: &[&str], keywords: &[&str]) -> MovieRecord {
        MovieRecord {
            movie_id: id,
            title: format!("m{id}"),
            genres: genres.iter().map(|s| s.to_string()).collect(),
            keywords: keywords.iter().map(|s| s.to_string()).collect(),
            director_gender: DirectorGender::Unknown,
            production_type: ProductionType::Studio,
        }
    }

    fn genre_catalog(genres_per_movie: &[&[&str]]) -> Catalog {
        Catalog::new(
            genres_per_movie
                .iter()
                .enumerate()
                .map(|(i, g)| movie(i as u32 + 1, g, &["k"])),
        )
        .unwrap()
    }

    fn output(ids: impl IntoIterator<Item = u32>) -> OutputValue {
        OutputValue(ids.into_iter().collect())
    }

    #[test]
    fn describe_twelve_genres_is_high() {
        let names = ["A", "B", "C", "D", "E", "F", "G", "H", "I", "J", "K", "L"];
        let mut rows: Vec<Vec<&str>> = names.iter().take(9).map(|g| vec![*g]).collect();
        rows.push(vec!["J", "K", "L"]);
        let rows: Vec<&[&str]> = rows.iter().map(Vec::as_slice).collect();
        let cat = genre_catalog(&rows);
        let got = describe_output(&cat, &output(1..=10), &DescriptorThresholds::default()).unwrap();
        assert_eq!(got.text(), HIGH_VARIETY);
    }

    #[test]
    fn describe_single_genre_is_low() {
        let cat = genre_catalog(&[&["Drama"] as &[&str]; 10]);
        let got = describe_output(&cat, &output(1..=10), &DescriptorThresholds::default()).unwrap();
        assert_eq!(got.text(), LOW_VARIETY);
    }

    #[test]
    fn describe_seven_genres_is_medium() {
        let rows: [&[&str]; 10] = [
            &["A"],
            &["B"],
            &["C"],
            &["D"],
            &["E"],
            &["F"],
            &["G"],
            &["A"],
            &["B", "C"],
            &["G"],
        ];
        let cat = genre_catalog(&rows);
        let got = describe_output(&cat, &output(1..=10), &DescriptorThresholds::default()).unwrap();
        assert_eq!(got.text(), MEDIUM_VARIETY);
    }

    #[test]
    fn describe_boundaries_partition_counts() {
        let t = DescriptorThresholds::default();
        let all: Vec<String> = (0..14).map(|i| format!("g{i}")).collect();
        for count in 1..=14 {
            let genres: Vec<&str> = all[..count].iter().map(String::as_str).collect();
            let cat = Catalog::new([movie(1, &genres, &["k"])]).unwrap();
            let got = describe_output(&cat, &output([1]), &t).unwrap();
            let expected = match count {
                0..=5 => LOW_VARIETY,
                6..=9 => MEDIUM_VARIETY,
                _ => HIGH_VARIETY,
            };
            assert_eq!(got.text(), expected, "count {count}");
        }
        assert_eq!(
            describe_output(&genre_catalog(&[&["A"]]), &output([7]), &t),
            Err(UnknownInput(7))
        );
    }

    #[test]
    fn thresholds_must_be_ordered() {
        assert!(DescriptorThresholds::new(10, 5).is_ok());
        assert!(DescriptorThresholds::new(5, 5).is_err());
    }

    #[test]
    fn recommend_errors() {
        let cat = genre_catalog(&[&["A"] as &[&str]; 5]);
        let r = Ratings::default();
        assert_eq!(recommend(&cat, &r, 1, 1), Err(RecommendError::InsufficientCatalog(5)));
        assert_eq!(recommend(&cat, &r, 1, 99), Err(RecommendError::UnknownMovie(99)));
    }

    #[test]
    fn recommend_ranks_pool_by_mean_rating() {
        // movie 1 shares keyword "x" with 2..=21; 22..=25 share nothing
        let mut movies = vec![movie(1, &["A"], &["x"])];
        movies.extend((2..=21).map(|i| movie(i, &["A"], &["x", &format!("k{i}")])));
        movies.extend((22..=25).map(|i| movie(i, &["A"], &["y"])));
        let cat = Catalog::new(movies).unwrap();
        let ratings = Ratings::new((2..=25).map(|m| RatingRecord {
            user_id: 1,
            movie_id: m,
            rating: if m >= 22 { 5.0 } else { 0.5 + (m % 5) as f64 },
        }))
        .unwrap();
        let out = recommend(&cat, &ratings, 1, 1).unwrap();
        assert_eq!(out.movie_ids().len(), RECOMMENDATION_LEN);
        assert!(!out.movie_ids().contains(&1));
        assert!(out.movie_ids().iter().all(|&m| m < 22), "{out:?}");
        // rating 4.5 for m % 5 == 4, then 3.5 for m % 5 == 3, ties by id
        assert_eq!(out.movie_ids(), &[4, 9, 14, 19, 3, 8, 13, 18, 2, 7]);
    }
}
