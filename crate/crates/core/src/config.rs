//! Audit configuration.
//!
//! A line-based format: `[section]` headers followed by `key = value` lines.
//! Blank lines and lines starting with `#` are ignored. Keys in `[bindings]`
//! and `[descriptors]` are policy atoms; everything else is a fixed key.
//!
//! ```text
//! [similarity]
//! kind = keyword_cosine
//! threshold = 0.8
//!
//! [descriptors]
//! highVariety = V
//! mediumVariety = V
//! lowVariety = V
//!
//! [bindings]
//! woman(director(x)) = director_gender == "F"
//!
//! [thresholds]
//! high_min_genres = 10
//! low_max_genres = 5
//!
//! [sampling]
//! max_users_per_movie = 5
//!
//! [semantics]
//! default = stable
//! max_extensions = 10000
//!
//! [topics]
//! tp_mode = group
//! ```
//!
//! For `kind = same_class`, each `class = <predicate> && ...` line adds one
//! class to the membership signature.

use std::collections::BTreeMap;
use std::str::FromStr;

use thiserror::Error;

use crate::af::{Semantics, Solver, DEFAULT_MAX_EXTENSIONS};
use crate::argument::{FeaturePredicate, InputClassSpec, SamplingLimits};
use crate::investigation::{AuditSettings, DescriptorMode, TopicStrategy};
use crate::policy::{Atom, Program};
use crate::recommender::DescriptorThresholds;
use crate::system::SimilaritySpec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("config line {line}: {message}")]
pub struct ConfigError {
    /// 1-based; 0 for problems not tied to one line.
    pub line: usize,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub similarity: SimilaritySpec,
    pub descriptor_groups: BTreeMap<Atom, String>,
    pub bindings: BTreeMap<Atom, FeaturePredicate>,
    pub thresholds: DescriptorThresholds,
    pub sampling: SamplingLimits,
    pub semantics: Semantics,
    pub max_extensions: usize,
    pub tp_mode: DescriptorMode,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            similarity: SimilaritySpec::default(),
            descriptor_groups: BTreeMap::new(),
            bindings: BTreeMap::new(),
            thresholds: DescriptorThresholds::default(),
            sampling: SamplingLimits::default(),
            semantics: Semantics::Stable,
            max_extensions: DEFAULT_MAX_EXTENSIONS,
            tp_mode: DescriptorMode::default(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Similarity,
    Descriptors,
    Bindings,
    Thresholds,
    Sampling,
    Semantics,
    Topics,
}

impl Section {
    fn parse(name: &str) -> Option<Section> {
        Some(match name {
            "similarity" => Section::Similarity,
            "descriptors" => Section::Descriptors,
            "bindings" => Section::Bindings,
            "thresholds" => Section::Thresholds,
            "sampling" => Section::Sampling,
            "semantics" => Section::Semantics,
            "topics" => Section::Topics,
            _ => return None,
        })
    }
}

fn number<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError::at(line, format!("{key} must be a number, got '{value}'")))
}

impl AuditConfig {
    pub fn parse(source: &str) -> Result<AuditConfig, ConfigError> {
        let mut config = AuditConfig::default();
        let mut section = None;
        let mut kind: Option<(usize, String)> = None;
        let mut threshold: Option<(usize, f64)> = None;
        let mut classes = Vec::new();
        let mut high = config.thresholds.high_min_genres;
        let mut low = config.thresholds.low_max_genres;

        for (i, raw) in source.lines().enumerate() {
            let line = i + 1;
            let text = raw.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            if let Some(name) = text.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
                section = Some(
                    Section::parse(name.trim())
                        .ok_or_else(|| ConfigError::at(line, format!("unknown section [{}]", name.trim())))?,
                );
                continue;
            }
            let Some(section) = section else {
                return Err(ConfigError::at(line, "entry before any [section] header"));
            };
            // Binding keys are atoms, which may not contain '=', so the first
            // '=' always ends the key.
            let (key, value) = text
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| ConfigError::at(line, "expected 'key = value'"))?;
            let unknown = || ConfigError::at(line, format!("unknown key '{key}'"));
            match section {
                Section::Similarity => match key {
                    "kind" => kind = Some((line, value.to_string())),
                    "threshold" => threshold = Some((line, number(line, key, value)?)),
                    "class" => classes.push(
                        InputClassSpec::parse_conjunction(value).map_err(|e| ConfigError::at(line, e.to_string()))?,
                    ),
                    _ => return Err(unknown()),
                },
                Section::Descriptors => {
                    let atom = Atom::parse(key).map_err(|e| ConfigError::at(line, e.to_string()))?;
                    if value.is_empty() {
                        return Err(ConfigError::at(line, "descriptor group name is empty"));
                    }
                    if config.descriptor_groups.insert(atom, value.to_string()).is_some() {
                        return Err(ConfigError::at(line, format!("descriptor '{key}' listed twice")));
                    }
                }
                Section::Bindings => {
                    let atom = Atom::parse(key).map_err(|e| ConfigError::at(line, e.to_string()))?;
                    let predicate: FeaturePredicate =
                        value.parse().map_err(|e| ConfigError::at(line, format!("{e}")))?;
                    if config.bindings.insert(atom, predicate).is_some() {
                        return Err(ConfigError::at(line, format!("binding for '{key}' listed twice")));
                    }
                }
                Section::Thresholds => match key {
                    "high_min_genres" => high = number(line, key, value)?,
                    "low_max_genres" => low = number(line, key, value)?,
                    _ => return Err(unknown()),
                },
                Section::Sampling => match key {
                    "max_users_per_movie" => {
                        let n: usize = number(line, key, value)?;
                        if n == 0 {
                            return Err(ConfigError::at(line, "max_users_per_movie must be positive"));
                        }
                        config.sampling.max_users_per_movie = n;
                    }
                    _ => return Err(unknown()),
                },
                Section::Semantics => match key {
                    "default" => {
                        config.semantics = value.parse().map_err(|e| ConfigError::at(line, format!("{e}")))?;
                    }
                    "max_extensions" => config.max_extensions = number(line, key, value)?,
                    _ => return Err(unknown()),
                },
                Section::Topics => match key {
                    "tp_mode" => config.tp_mode = value.parse().map_err(|e: String| ConfigError::at(line, e))?,
                    _ => return Err(unknown()),
                },
            }
        }

        config.thresholds = DescriptorThresholds::new(high, low).map_err(|e| ConfigError::at(0, e.to_string()))?;
        config.similarity = match kind.as_ref().map(|(l, k)| (*l, k.as_str())) {
            None | Some((_, "keyword_cosine")) => {
                let (line, t) = threshold.unwrap_or((0, 0.8));
                SimilaritySpec::keyword_cosine(t).map_err(|e| ConfigError::at(line, e.to_string()))?
            }
            Some((line, "same_class")) => {
                if classes.is_empty() {
                    return Err(ConfigError::at(
                        line,
                        "same_class similarity needs at least one 'class' line",
                    ));
                }
                SimilaritySpec::SameClass { classes }
            }
            Some((line, other)) => {
                return Err(ConfigError::at(
                    line,
                    format!("similarity kind must be keyword_cosine or same_class, got '{other}'"),
                ))
            }
        };
        Ok(config)
    }

    /// Checks the references into `policy`: every body atom needs a binding
    /// and every clause head needs a descriptor group. Bindings for atoms the
    /// policy never mentions are allowed, so one config serves several policies.
    pub fn validate(&self, policy: &Program) -> Result<(), ConfigError> {
        self.topic_strategy()
            .validate(policy)
            .map_err(|e| ConfigError::at(0, e.to_string()))
    }

    pub fn topic_strategy(&self) -> TopicStrategy {
        TopicStrategy {
            bindings: self.bindings.clone(),
            descriptor_groups: self.descriptor_groups.clone(),
            mode: self.tp_mode,
        }
    }

    pub fn settings(&self) -> AuditSettings {
        AuditSettings {
            similarity: self.similarity.clone(),
            semantics: self.semantics,
            solver: Solver {
                max_extensions: self.max_extensions,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::parse_policy;

    const FULL: &str = r#"
# audit settings
[similarity]
kind = keyword_cosine
threshold = 0.75

[descriptors]
highVariety = V
lowVariety = V

[bindings]
woman(director(x)) = director_gender == "F"
action(genre(x)) = genres contains "Action"

[thresholds]
high_min_genres = 9
low_max_genres = 4

[sampling]
max_users_per_movie = 3

[semantics]
default = preferred
max_extensions = 50

[topics]
tp_mode = head_only
"#;

    #[test]
    fn parses_every_section() {
        let c = AuditConfig::parse(FULL).unwrap();
        assert_eq!(c.similarity, SimilaritySpec::keyword_cosine(0.75).unwrap());
        assert_eq!(c.descriptor_groups.len(), 2);
        assert_eq!(
            c.bindings[&Atom::parse("action(genre(x))").unwrap()].to_string(),
            "genres contains \"Action\""
        );
        assert_eq!(c.thresholds, DescriptorThresholds::new(9, 4).unwrap());
        assert_eq!(c.sampling.max_users_per_movie, 3);
        assert_eq!(c.semantics, Semantics::Preferred);
        assert_eq!(c.max_extensions, 50);
        assert_eq!(c.tp_mode, DescriptorMode::HeadOnly);
    }

    #[test]
    fn empty_config_uses_defaults() {
        assert_eq!(AuditConfig::parse("").unwrap(), AuditConfig::default());
    }

    #[test]
    fn same_class_similarity() {
        let c = AuditConfig::parse(
            "[similarity]\nkind = same_class\nclass = director_gender == \"F\"\nclass = genres contains \"Action\" && production_type == \"studio\"\n",
        )
        .unwrap();
        match c.similarity {
            SimilaritySpec::SameClass { classes } => assert_eq!(classes.len(), 2),
            other => panic!("{other:?}"),
        }
        assert!(AuditConfig::parse("[similarity]\nkind = same_class\n").is_err());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("key = 1\n", 1),
            ("[nope]\n", 1),
            ("[sampling]\n\nmax_users_per_movie = many\n", 3),
            ("[semantics]\ndefault = ideal\n", 2),
            ("[bindings]\nw = director_gender is \"F\"\n", 2),
            ("[similarity]\nthreshold = 1.5\n", 2),
            ("[similarity]\nkind = euclid\n", 2),
            ("[topics]\ntp_mode = all\n", 2),
            ("[descriptors]\nh = V\nh = W\n", 3),
            ("[sampling]\nmax_users_per_movie\n", 2),
        ];
        for (src, line) in cases {
            let err = AuditConfig::parse(src).unwrap_err();
            assert_eq!(err.line, line, "{src:?}: {err}");
        }
        assert_eq!(
            AuditConfig::parse("[thresholds]\nhigh_min_genres = 3\n")
                .unwrap_err()
                .line,
            0
        );
    }

    #[test]
    fn validate_against_policy() {
        let policy = parse_policy("highVariety(x) <- woman(director(x)), action(genre(x)).").unwrap();
        let c = AuditConfig::parse(FULL).unwrap();
        assert!(c.validate(&policy).is_ok());

        let missing = parse_policy("highVariety(x) <- woman(director(x)), drama(genre(x)).").unwrap();
        assert!(c.validate(&missing).unwrap_err().message.contains("drama"));

        let narrow = parse_policy("highVariety(x) <- woman(director(x)).").unwrap();
        assert!(c.validate(&narrow).is_ok());
        assert!(c.validate(&Program::new(Vec::new())).is_ok());

        let no_group = parse_policy("fair(x) <- woman(director(x)), action(genre(x)).").unwrap();
        assert!(c.validate(&no_group).is_err());
    }
}
