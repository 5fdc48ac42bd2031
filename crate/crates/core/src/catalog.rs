//! Movie metadata and user ratings for the demo recommender.
//!
//! `movies.csv` columns: `movie_id,title,genres,keywords,director_gender,production_type`,
//! with `genres` and `keywords` pipe-separated, `director_gender` one of
//! `F`, `M`, `U` and `production_type` one of `independent`, `studio`.
//!
//! `ratings.csv` columns: `user_id,movie_id,rating` with ratings in `[0.5, 5.0]`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::system::{InputPoint, SparseVector};

pub const MOVIES_HEADER: [&str; 6] = [
    "movie_id",
    "title",
    "genres",
    "keywords",
    "director_gender",
    "production_type",
];
pub const RATINGS_HEADER: [&str; 3] = ["user_id", "movie_id", "rating"];

pub const MIN_RATING: f64 = 0.5;
pub const MAX_RATING: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("{file}: line {line}: {message}")]
    Format {
        file: &'static str,
        line: u64,
        message: String,
    },
    #[error("{file}: duplicate key {key}")]
    DuplicateKey { file: &'static str, key: String },
    #[error("movies: catalog is empty")]
    EmptyCatalog,
    #[error("ratings: line {line}: movie {movie_id} is not in the catalog")]
    UnknownMovie { line: u64, movie_id: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DirectorGender {
    Female,
    Male,
    Unknown,
}

impl DirectorGender {
    pub fn code(self) -> &'static str {
        match self {
            DirectorGender::Female => "F",
            DirectorGender::Male => "M",
            DirectorGender::Unknown => "U",
        }
    }
}

impl FromStr for DirectorGender {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "F" => Ok(DirectorGender::Female),
            "M" => Ok(DirectorGender::Male),
            "U" => Ok(DirectorGender::Unknown),
            _ => Err(format!("director_gender must be F, M or U, got '{s}'")),
        }
    }
}

impl fmt::Display for DirectorGender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProductionType {
    Independent,
    Studio,
}

impl ProductionType {
    pub fn name(self) -> &'static str {
        match self {
            ProductionType::Independent => "independent",
            ProductionType::Studio => "studio",
        }
    }
}

impl FromStr for ProductionType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "independent" => Ok(ProductionType::Independent),
            "studio" => Ok(ProductionType::Studio),
            _ => Err(format!("production_type must be independent or studio, got '{s}'")),
        }
    }
}

impl fmt::Display for ProductionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MovieRecord {
    pub movie_id: u32,
    pub title: String,
    pub genres: BTreeSet<String>,
    pub keywords: BTreeSet<String>,
    pub director_gender: DirectorGender,
    pub production_type: ProductionType,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatingRecord {
    pub user_id: u32,
    pub movie_id: u32,
    pub rating: f64,
}

/// Movies keyed by id, with binary keyword vectors over the catalog's
/// keyword vocabulary.
#[derive(Debug, Clone)]
pub struct Catalog {
    movies: BTreeMap<u32, MovieRecord>,
    keyword_vectors: BTreeMap<u32, SparseVector>,
}

impl Catalog {
    pub fn new(records: impl IntoIterator<Item = MovieRecord>) -> Result<Catalog, DataError> {
        let mut movies = BTreeMap::new();
        for record in records {
            let id = record.movie_id;
            if movies.insert(id, record).is_some() {
                return Err(DataError::DuplicateKey {
                    file: "movies",
                    key: format!("movie_id {id}"),
                });
            }
        }
        if movies.is_empty() {
            return Err(DataError::EmptyCatalog);
        }
        let vocabulary: BTreeMap<&str, usize> = movies
            .values()
            .flat_map(|m: &MovieRecord| m.keywords.iter().map(String::as_str))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(i, k)| (k, i))
            .collect();
        let keyword_vectors = movies
            .values()
            .map(|m| {
                let v = SparseVector::from_entries(m.keywords.iter().map(|k| (vocabulary[k.as_str()], 1.0)));
                (m.movie_id, v)
            })
            .collect();
        Ok(Catalog {
            movies,
            keyword_vectors,
        })
    }

    pub fn from_csv(source: &str) -> Result<Catalog, DataError> {
        let mut reader = reader(source);
        check_header(&mut reader, "movies", &MOVIES_HEADER)?;
        let mut records = Vec::new();
        for row in reader.records() {
            let row = row.map_err(|e| csv_error("movies", e))?;
            let line = row.position().map_or(0, |p| p.line());
            let bad = |message: String| DataError::Format {
                file: "movies",
                line,
                message,
            };
            if row.len() != MOVIES_HEADER.len() {
                return Err(bad(format!(
                    "expected {} columns, found {}",
                    MOVIES_HEADER.len(),
                    row.len()
                )));
            }
            let movie_id = row[0]
                .parse()
                .map_err(|_| bad(format!("movie_id must be a non-negative integer, got '{}'", &row[0])))?;
            let genres = split_list(&row[2]);
            let keywords = split_list(&row[3]);
            if genres.is_empty() {
                return Err(bad("genres must not be empty".into()));
            }
            if keywords.is_empty() {
                return Err(bad("keywords must not be empty".into()));
            }
            records.push(MovieRecord {
                movie_id,
                title: row[1].to_string(),
                genres,
                keywords,
                director_gender: row[4].parse().map_err(bad)?,
                production_type: row[5].parse().map_err(bad)?,
            });
        }
        Catalog::new(records)
    }

    pub fn get(&self, movie_id: u32) -> Option<&MovieRecord> {
        self.movies.get(&movie_id)
    }

    pub fn contains(&self, movie_id: u32) -> bool {
        self.movies.contains_key(&movie_id)
    }

    pub fn len(&self) -> usize {
        self.movies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.movies.is_empty()
    }

    /// Movies in ascending id order.
    pub fn movies(&self) -> impl Iterator<Item = &MovieRecord> + '_ {
        self.movies.values()
    }

    pub fn keyword_vector(&self, movie_id: u32) -> Option<&SparseVector> {
        self.keyword_vectors.get(&movie_id)
    }
}

/// Ratings keyed by `(user_id, movie_id)`.
#[derive(Debug, Clone, Default)]
pub struct Ratings {
    by_pair: BTreeMap<(u32, u32), f64>,
}

impl Ratings {
    pub fn new(records: impl IntoIterator<Item = RatingRecord>) -> Result<Ratings, DataError> {
        let mut by_pair = BTreeMap::new();
        for r in records {
            if by_pair.insert((r.user_id, r.movie_id), r.rating).is_some() {
                return Err(DataError::DuplicateKey {
                    file: "ratings",
                    key: format!("(user_id {}, movie_id {})", r.user_id, r.movie_id),
                });
            }
        }
        Ok(Ratings { by_pair })
    }

    /// Parses ratings, rejecting rows that point at movies outside `catalog`.
    pub fn from_csv(source: &str, catalog: &Catalog) -> Result<Ratings, DataError> {
        let mut reader = reader(source);
        check_header(&mut reader, "ratings", &RATINGS_HEADER)?;
        let mut records = Vec::new();
        for row in reader.records() {
            let row = row.map_err(|e| csv_error("ratings", e))?;
            let line = row.position().map_or(0, |p| p.line());
            let bad = |message: String| DataError::Format {
                file: "ratings",
                line,
                message,
            };
            if row.len() != RATINGS_HEADER.len() {
                return Err(bad(format!("expected 3 columns, found {}", row.len())));
            }
            let user_id = row[0]
                .parse()
                .map_err(|_| bad(format!("user_id must be a non-negative integer, got '{}'", &row[0])))?;
            let movie_id = row[1]
                .parse()
                .map_err(|_| bad(format!("movie_id must be a non-negative integer, got '{}'", &row[1])))?;
            let rating: f64 = row[2]
                .parse()
                .map_err(|_| bad(format!("rating must be a number, got '{}'", &row[2])))?;
            if !(MIN_RATING..=MAX_RATING).contains(&rating) {
                return Err(bad(format!("rating {rating} outside [{MIN_RATING}, {MAX_RATING}]")));
            }
            if !catalog.contains(movie_id) {
                return Err(DataError::UnknownMovie { line, movie_id });
            }
            records.push(RatingRecord {
                user_id,
                movie_id,
                rating,
            });
        }
        Ratings::new(records)
    }

    pub fn get(&self, user_id: u32, movie_id: u32) -> Option<f64> {
        self.by_pair.get(&(user_id, movie_id)).copied()
    }

    pub fn len(&self) -> usize {
        self.by_pair.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_pair.is_empty()
    }

    /// Mean rating over all users, summed in ascending user order.
    pub fn mean_rating(&self, movie_id: u32) -> Option<f64> {
        let (sum, count) = self
            .by_pair
            .iter()
            .filter(|((_, m), _)| *m == movie_id)
            .fold((0.0, 0usize), |(s, c), (_, r)| (s + r, c + 1));
        (count > 0).then(|| sum / count as f64)
    }

    /// Users who rated `movie_id`, ascending.
    pub fn raters(&self, movie_id: u32) -> Vec<u32> {
        self.by_pair
            .keys()
            .filter(|(_, m)| *m == movie_id)
            .map(|&(u, _)| u)
            .collect()
    }

    /// Every rated `(user, movie)` pair, ordered by user then movie.
    pub fn rated_inputs(&self) -> impl Iterator<Item = InputPoint> + '_ {
        self.by_pair
            .keys()
            .map(|&(user_id, movie_id)| InputPoint { user_id, movie_id })
    }
}

/// Loads and validates both tables.
pub fn load_catalog(movies_source: &str, ratings_source: &str) -> Result<(Catalog, Ratings), DataError> {
    let catalog = Catalog::from_csv(movies_source)?;
    let ratings = Ratings::from_csv(ratings_source, &catalog)?;
    Ok((catalog, ratings))
}

fn reader(source: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source.as_bytes())
}

fn check_header(reader: &mut csv::Reader<&[u8]>, file: &'static str, expected: &[&str]) -> Result<(), DataError> {
    let header = reader.headers().map_err(|e| csv_error(file, e))?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(DataError::Format {
            file,
            line: 1,
            message: format!("header must be exactly '{}'", expected.join(",")),
        });
    }
    Ok(())
}

fn csv_error(file: &'static str, e: csv::Error) -> DataError {
    DataError::Format {
        file,
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}

fn split_list(field: &str) -> BTreeSet<String> {
    field
        .split('|')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}
