//! Investigator and suspect agents, and the interrogation built on them.
//!
//! The investigator turns each policy clause into topics: one per non-empty
//! subset of the clause body, with the subset's bound predicates as the
//! input class and the head's descriptor group as the accepted descriptors.
//! For every topic it runs a dialogue with the suspect, extracts the
//! argumentation graph, and classifies the topic from the extensions:
//!
//! * sceptical: every descriptor is concluded in every extension;
//! * credulous: every descriptor is concluded in some extension;
//! * rejected: otherwise, including when there are no extensions at all.
//!
//! The verdict aggregates the per-topic statuses together with a check that
//! the policy stays consistent once the topic's descriptors are asserted.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::af::{ArgId, Extension, Semantics, Solver};
use crate::argument::{
    generate_arguments, sample_topic_inputs, BlackBoxArgument, FeaturePredicate, InputClassSpec, SamplingLimits, Topic,
    TopicSample,
};
use crate::catalog::Catalog;
use crate::dialogue::{extract_af, run_dialogue, validate_dialogue, AgentId, Dialogue, ExtractedAf, Role};
use crate::policy::{is_consistent, Atom, Program};
use crate::recommender::DescriptionMap;
use crate::system::{SimilaritySpec, SuspectSystem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopicError {
    #[error("body atom {0} has no binding")]
    MissingBinding(Atom),
    #[error("clause head {0} matches no descriptor group")]
    MissingDescriptorGroup(Atom),
}

/// Which descriptors a topic accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DescriptorMode {
    /// Every descriptor in the head's group.
    #[default]
    Group,
    /// Only the descriptor matching the clause head.
    HeadOnly,
}

impl DescriptorMode {
    pub fn name(self) -> &'static str {
        match self {
            DescriptorMode::Group => "group",
            DescriptorMode::HeadOnly => "head_only",
        }
    }
}

impl FromStr for DescriptorMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "group" => Ok(DescriptorMode::Group),
            "head_only" => Ok(DescriptorMode::HeadOnly),
            _ => Err(format!("descriptor mode must be group or head_only, got '{s}'")),
        }
    }
}

/// How the investigator derives topics from the policy.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TopicStrategy {
    /// Grounds each clause-body atom as a predicate on inputs.
    pub bindings: BTreeMap<Atom, FeaturePredicate>,
    /// Descriptor atom to group name.
    pub descriptor_groups: BTreeMap<Atom, String>,
    pub mode: DescriptorMode,
}

impl TopicStrategy {
    /// The descriptor a clause head stands for: the atom itself if it is a
    /// known descriptor, otherwise the descriptor with the head's predicate
    /// name and polarity, so `highVariety(x)` maps to `highVariety`.
    pub fn descriptor_for_head(&self, head: &Atom) -> Option<&Atom> {
        if let Some((atom, _)) = self.descriptor_groups.get_key_value(head) {
            return Some(atom);
        }
        self.descriptor_groups
            .keys()
            .find(|d| d.predicate() == head.predicate() && d.is_negated() == head.is_negated())
    }

    /// Checks that every body atom is bound and every head has a group.
    pub fn validate(&self, policy: &Program) -> Result<(), TopicError> {
        for clause in policy.clauses() {
            if let Some(missing) = clause.body().iter().find(|a| !self.bindings.contains_key(a)) {
                return Err(TopicError::MissingBinding(missing.clone()));
            }
        }
        for clause in policy.clauses() {
            self.descriptors_for_head(clause.head())?;
        }
        Ok(())
    }

    fn descriptors_for_head(&self, head: &Atom) -> Result<(BTreeSet<Atom>, String), TopicError> {
        let descriptor = self
            .descriptor_for_head(head)
            .ok_or_else(|| TopicError::MissingDescriptorGroup(head.clone()))?;
        let group = &self.descriptor_groups[descriptor];
        Ok(match self.mode {
            DescriptorMode::Group => (
                self.descriptor_groups
                    .iter()
                    .filter(|(_, g)| *g == group)
                    .map(|(a, _)| a.clone())
                    .collect(),
                group.clone(),
            ),
            DescriptorMode::HeadOnly => (BTreeSet::from([descriptor.clone()]), descriptor.to_string()),
        })
    }
}

/// The topic generator over a whole policy.
///
/// Per clause, one topic for each non-empty subset of the body (every
/// subset is ordered by size, then lexicographically by body position);
/// a fact yields one topic over all inputs. Clauses are taken in order.
pub fn generate_topics(policy: &Program, strategy: &TopicStrategy) -> Result<Vec<Topic>, TopicError> {
    strategy.validate(policy)?;
    let mut topics = Vec::new();
    for clause in policy.clauses() {
        let (descriptors, descriptor_label) = strategy.descriptors_for_head(clause.head())?;
        let body = clause.body();
        let subsets: Vec<Vec<usize>> = if body.is_empty() {
            vec![Vec::new()]
        } else {
            (1..=body.len()).flat_map(|k| combinations(body.len(), k)).collect()
        };
        for subset in subsets {
            let atoms: Vec<&Atom> = subset.iter().map(|&i| &body[i]).collect();
            let class = InputClassSpec::new(atoms.iter().map(|a| strategy.bindings[*a].clone()).collect());
            let class_label = if atoms.is_empty() {
                "all inputs".to_string()
            } else {
                atoms.iter().map(ToString::to_string).collect::<Vec<_>>().join(" & ")
            };
            topics.push(Topic::new(
                format!("({class_label}, {descriptor_label})"),
                class,
                descriptors.clone(),
            ));
        }
    }
    Ok(topics)
}

/// All `k`-element index subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(current.clone());
        let Some(i) = (0..k).rev().find(|&i| current[i] != i + n - k) else {
            return out;
        };
        current[i] += 1;
        for j in i + 1..k {
            current[j] = current[j - 1] + 1;
        }
    }
}

pub struct InvestigatorAgent {
    pub id: AgentId,
    pub policy: Program,
    pub strategy: TopicStrategy,
}

impl InvestigatorAgent {
    pub fn new(policy: Program, strategy: TopicStrategy) -> Self {
        InvestigatorAgent {
            id: AgentId::new("investigator", Role::Investigator),
            policy,
            strategy,
        }
    }

    pub fn topics(&self) -> Result<Vec<Topic>, TopicError> {
        generate_topics(&self.policy, &self.strategy)
    }
}

/// Wraps the audited system with a description map and an argument
/// generator so it can take part in a dialogue.
pub struct SuspectAgent {
    pub id: AgentId,
    pub policy: Program,
    pub system: Arc<SuspectSystem>,
    pub describe: Arc<dyn DescriptionMap>,
    pub catalog: Arc<Catalog>,
    pub sampling: SamplingLimits,
}

impl SuspectAgent {
    pub fn new(
        policy: Program,
        system: Arc<SuspectSystem>,
        describe: Arc<dyn DescriptionMap>,
        catalog: Arc<Catalog>,
        sampling: SamplingLimits,
    ) -> Self {
        SuspectAgent {
            id: AgentId::new("suspect", Role::Suspect),
            policy,
            system,
            describe,
            catalog,
            sampling,
        }
    }

    /// The argument generator.
    pub fn arguments_for(&self, topic: &Topic) -> Result<Vec<BlackBoxArgument>, crate::Error> {
        generate_arguments(
            &self.system,
            self.describe.as_ref(),
            topic,
            &self.catalog,
            self.sampling,
        )
    }

    pub fn sample(&self, topic: &Topic) -> Result<TopicSample, crate::Error> {
        Ok(sample_topic_inputs(&self.system, topic, &self.catalog, self.sampling)?)
    }
}

/// Everything fixed for one interrogation besides the agents.
#[derive(Debug, Clone)]
pub struct AuditSettings {
    pub similarity: SimilaritySpec,
    pub semantics: Semantics,
    pub solver: Solver,
}

impl Default for AuditSettings {
    fn default() -> Self {
        AuditSettings {
            similarity: SimilaritySpec::default(),
            semantics: Semantics::Stable,
            solver: Solver::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Sceptical,
    Credulous,
    Rejected,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Sceptical => "sceptical",
            Status::Credulous => "credulous",
            Status::Rejected => "rejected",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A topic's classification with the conclusion sets behind it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicStatus {
    pub value: Status,
    /// Conclusions present in every extension (empty when there are none).
    pub intersection: BTreeSet<Atom>,
    /// Conclusions present in some extension.
    pub union: BTreeSet<Atom>,
    pub num_extensions: usize,
    /// Whether the credulous condition holds, recorded even when sceptical.
    pub credulous_holds: bool,
}

/// Classifies a topic from the extensions of its dialogue's graph.
///
/// An empty extension list classifies as rejected: there is no evidence to
/// accept anything.
pub fn classify_topic(extensions: &[Extension], conclusion_of: &BTreeMap<ArgId, Atom>, topic: &Topic) -> TopicStatus {
    let concluded = |e: &Extension| -> BTreeSet<Atom> {
        e.members()
            .iter()
            .filter_map(|id| conclusion_of.get(id))
            .cloned()
            .collect()
    };
    let per_extension: Vec<BTreeSet<Atom>> = extensions.iter().map(concluded).collect();
    let union: BTreeSet<Atom> = per_extension.iter().flatten().cloned().collect();
    let intersection: BTreeSet<Atom> = match per_extension.split_first() {
        None => BTreeSet::new(),
        Some((first, rest)) => first
            .iter()
            .filter(|c| rest.iter().all(|s| s.contains(*c)))
            .cloned()
            .collect(),
    };
    let nonempty = !extensions.is_empty();
    let credulous_holds = nonempty && topic.descriptors.is_subset(&union);
    let sceptical = nonempty && topic.descriptors.is_subset(&intersection);
    let value = if sceptical {
        Status::Sceptical
    } else if credulous_holds {
        Status::Credulous
    } else {
        Status::Rejected
    };
    TopicStatus {
        value,
        intersection,
        union,
        num_extensions: extensions.len(),
        credulous_holds,
    }
}

/// How the suspect argues about a topic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArguesMode {
    Sceptically,
    Credulously,
    Empty,
}

/// The full record of one topic's dialogue and its evaluation.
#[derive(Debug, Clone)]
pub struct TopicOutcome {
    pub topic: Topic,
    pub sample: TopicSample,
    pub dialogue: Dialogue,
    pub af: ExtractedAf,
    pub extensions: Vec<Extension>,
    pub status: TopicStatus,
}

impl TopicOutcome {
    pub fn mode(&self) -> ArguesMode {
        match self.status.value {
            Status::Sceptical => ArguesMode::Sceptically,
            Status::Credulous => ArguesMode::Credulously,
            Status::Rejected => ArguesMode::Empty,
        }
    }
}

/// Runs the dialogue on `topic`, extracts its graph, solves it under the
/// configured semantics and classifies the topic.
pub fn argues_status(
    suspect: &SuspectAgent,
    investigator: &InvestigatorAgent,
    topic: &Topic,
    settings: &AuditSettings,
) -> Result<TopicOutcome, crate::Error> {
    let sample = suspect.sample(topic)?;
    let dialogue = run_dialogue(investigator, suspect, topic)?;
    validate_dialogue(&dialogue, &suspect.catalog).map_err(crate::Error::MalformedDialogue)?;
    let af = extract_af(&dialogue, &settings.similarity, &suspect.catalog)?;
    let extensions = settings.solver.extensions(&af.graph, settings.semantics)?;
    let status = classify_topic(&extensions, af.graph.conclusion_of(), topic);
    Ok(TopicOutcome {
        topic: topic.clone(),
        sample,
        dialogue,
        af,
        extensions,
        status,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictValue {
    StrongBelief,
    CredulousBelief,
    StrongDisbelief,
    Mixed,
}

impl VerdictValue {
    pub fn name(self) -> &'static str {
        match self {
            VerdictValue::StrongBelief => "strong_belief",
            VerdictValue::CredulousBelief => "credulous_belief",
            VerdictValue::StrongDisbelief => "strong_disbelief",
            VerdictValue::Mixed => "mixed",
        }
    }
}

impl fmt::Display for VerdictValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Combines per-topic `(status, consistent)` pairs into a verdict.
pub fn decide_verdict(results: &[(Status, bool)]) -> VerdictValue {
    let all = |ok: &dyn Fn(Status) -> bool| results.iter().all(|&(s, consistent)| consistent && ok(s));
    if all(&|s| s == Status::Sceptical) {
        VerdictValue::StrongBelief
    } else if all(&|s| s != Status::Rejected) {
        VerdictValue::CredulousBelief
    } else if all(&|s| s == Status::Rejected) {
        VerdictValue::StrongDisbelief
    } else {
        VerdictValue::Mixed
    }
}

#[derive(Debug, Clone)]
pub struct TopicVerdict {
    pub outcome: TopicOutcome,
    pub consistent: bool,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub value: VerdictValue,
    pub semantics: Semantics,
    pub topics: Vec<TopicVerdict>,
    pub non_monotonicity: NonMonotonicityReport,
}

impl Verdict {
    pub fn statuses(&self) -> Vec<(Topic, Status)> {
        self.topics
            .iter()
            .map(|t| (t.outcome.topic.clone(), t.outcome.status.value))
            .collect()
    }
}

/// Questions the suspect on every generated topic and aggregates the results.
pub fn interrogate(
    investigator: &InvestigatorAgent,
    suspect: &SuspectAgent,
    settings: &AuditSettings,
) -> Result<Verdict, crate::Error> {
    let mut topics = Vec::new();
    for topic in investigator.topics()? {
        let outcome = argues_status(suspect, investigator, &topic, settings)?;
        let consistent = is_consistent(&investigator.policy, &topic.descriptors);
        topics.push(TopicVerdict { outcome, consistent });
    }
    let results: Vec<(Status, bool)> = topics.iter().map(|t| (t.outcome.status.value, t.consistent)).collect();
    let statuses: Vec<(Topic, Status)> = topics
        .iter()
        .map(|t| (t.outcome.topic.clone(), t.outcome.status.value))
        .collect();
    Ok(Verdict {
        value: decide_verdict(&results),
        semantics: settings.semantics,
        topics,
        non_monotonicity: check_nonmonotonicity(&statuses),
    })
}

/// One side of a non-monotonicity witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessTopic {
    /// 1-based position in the generated topic list.
    pub topic: usize,
    pub label: String,
    pub status: Status,
}

/// Two topics, one strictly contained in the other, with different statuses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessPair {
    pub smaller: WitnessTopic,
    pub larger: WitnessTopic,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NonMonotonicityReport {
    /// Pairs where the descriptor set strictly grows.
    pub descriptor_mode: Vec<WitnessPair>,
    /// Pairs with equal descriptors where the input class is strictly refined;
    /// `smaller` is the refined (finer) class.
    pub input_refinement_mode: Vec<WitnessPair>,
    /// Set iff `descriptor_mode` is non-empty.
    pub non_monotonic: bool,
}

/// Finds status changes between nested topics.
pub fn check_nonmonotonicity(statuses: &[(Topic, Status)]) -> NonMonotonicityReport {
    let side = |i: usize| WitnessTopic {
        topic: i + 1,
        label: statuses[i].0.label.clone(),
        status: statuses[i].1,
    };
    let mut report = NonMonotonicityReport::default();
    for (i, (t1, s1)) in statuses.iter().enumerate() {
        for (j, (t2, s2)) in statuses.iter().enumerate() {
            if s1 == s2 {
                continue;
            }
            let d1 = &t1.descriptors;
            let d2 = &t2.descriptors;
            if d1.len() < d2.len() && d1.is_subset(d2) {
                report.descriptor_mode.push(WitnessPair {
                    smaller: side(i),
                    larger: side(j),
                });
            }
            if d1 == d2 && t1.input_class.is_strict_refinement_of(&t2.input_class) {
                report.input_refinement_mode.push(WitnessPair {
                    smaller: side(i),
                    larger: side(j),
                });
            }
        }
    }
    report.non_monotonic = !report.descriptor_mode.is_empty();
    report
}
