//! Information-seeking dialogues between an investigator and a suspect.
//!
//! A dialogue is a participant set and an ordered list of moves. It is
//! well-formed when
//!
//! 1. the first move opens a topic,
//! 2. moves `2 ..= t - |I|` are assertions,
//! 3. every asserted argument is related to the opened topic,
//! 4. the last `|I|` moves are closes, and
//! 5. the last move has the same sender as the first.
//!
//! Every sender must also be a participant. [`validate_dialogue`] reports
//! every violated condition instead of stopping at the first.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::af::{ArgGraph, ArgId};
use crate::argument::{attacks, related_to, BlackBoxArgument, FeaturePredicate, InputClassSpec, Topic};
use crate::catalog::Catalog;
use crate::investigation::{InvestigatorAgent, SuspectAgent};
use crate::policy::Atom;
use crate::system::{SimilaritySpec, UnknownInput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Investigator,
    Suspect,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgentId {
    pub name: String,
    pub role: Role,
}

impl AgentId {
    pub fn new(name: impl Into<String>, role: Role) -> Self {
        AgentId {
            name: name.into(),
            role,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MoveKind {
    Open(Topic),
    Assert(BlackBoxArgument),
    Close,
}

impl MoveKind {
    pub fn name(&self) -> &'static str {
        match self {
            MoveKind::Open(_) => "open",
            MoveKind::Assert(_) => "assert",
            MoveKind::Close => "close",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    /// Name of the sending agent.
    pub sender: String,
    pub kind: MoveKind,
}

impl Move {
    pub fn open(sender: &AgentId, topic: Topic) -> Move {
        Move {
            sender: sender.name.clone(),
            kind: MoveKind::Open(topic),
        }
    }

    pub fn assert(sender: &AgentId, argument: BlackBoxArgument) -> Move {
        Move {
            sender: sender.name.clone(),
            kind: MoveKind::Assert(argument),
        }
    }

    pub fn close(sender: &AgentId) -> Move {
        Move {
            sender: sender.name.clone(),
            kind: MoveKind::Close,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dialogue {
    pub participants: Vec<AgentId>,
    pub moves: Vec<Move>,
}

impl Dialogue {
    /// The topic opened by the first move, if it is an open move.
    pub fn topic(&self) -> Option<&Topic> {
        match self.moves.first().map(|m| &m.kind) {
            Some(MoveKind::Open(topic)) => Some(topic),
            _ => None,
        }
    }

    /// Asserted arguments with their 1-based move indices.
    pub fn assertions(&self) -> impl Iterator<Item = (usize, &BlackBoxArgument)> + '_ {
        self.moves.iter().enumerate().filter_map(|(i, m)| match &m.kind {
            MoveKind::Assert(arg) => Some((i + 1, arg)),
            _ => None,
        })
    }
}

/// Runs the two-party protocol: the investigator opens `topic`, the suspect
/// asserts every argument its generator produces, then the suspect and the
/// investigator close in that order.
pub fn run_dialogue(
    investigator: &InvestigatorAgent,
    suspect: &SuspectAgent,
    topic: &Topic,
) -> Result<Dialogue, crate::Error> {
    let arguments = suspect.arguments_for(topic)?;
    let mut moves = Vec::with_capacity(arguments.len() + 3);
    moves.push(Move::open(&investigator.id, topic.clone()));
    moves.extend(arguments.into_iter().map(|a| Move::assert(&suspect.id, a)));
    moves.push(Move::close(&suspect.id));
    moves.push(Move::close(&investigator.id));
    Ok(Dialogue {
        participants: vec![investigator.id.clone(), suspect.id.clone()],
        moves,
    })
}

/// A dialogue in which `agent` questions itself: it opens, asserts its own
/// arguments and closes alone.
pub fn run_self_reflective(agent: &SuspectAgent, topic: &Topic) -> Result<Dialogue, crate::Error> {
    let arguments = agent.arguments_for(topic)?;
    let mut moves = Vec::with_capacity(arguments.len() + 2);
    moves.push(Move::open(&agent.id, topic.clone()));
    moves.extend(arguments.into_iter().map(|a| Move::assert(&agent.id, a)));
    moves.push(Move::close(&agent.id));
    Ok(Dialogue {
        participants: vec![agent.id.clone()],
        moves,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    NoParticipants,
    SenderIsParticipant,
    OpensFirst,
    AssertsInBetween,
    ArgumentRelated,
    ClosesLast,
    LastSenderOpened,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::NoParticipants => "the dialogue has at least one participant",
            Condition::SenderIsParticipant => "every sender is a participant",
            Condition::OpensFirst => "the first move is an open move",
            Condition::AssertsInBetween => "moves 2..t-|I| are assert moves",
            Condition::ArgumentRelated => "asserted arguments are related to the topic",
            Condition::ClosesLast => "the last |I| moves are close moves",
            Condition::LastSenderOpened => "the last move is sent by the opener",
        })
    }
}

/// One failed well-formedness condition at a 1-based move index
/// (0 when the condition concerns the dialogue as a whole).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub index: usize,
    pub condition: Condition,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "move {}: {} ({})", self.index, self.condition, self.detail)
    }
}

/// Checks well-formedness, collecting every violation.
pub fn validate_dialogue(d: &Dialogue, catalog: &Catalog) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    let mut flag = |index: usize, condition: Condition, detail: String| {
        violations.push(Violation {
            index,
            condition,
            detail,
        })
    };

    let k = d.participants.len();
    let t = d.moves.len();
    if k == 0 {
        flag(0, Condition::NoParticipants, "participant set is empty".into());
    }
    for (i, m) in d.moves.iter().enumerate() {
        if !d.participants.iter().any(|p| p.name == m.sender) {
            flag(
                i + 1,
                Condition::SenderIsParticipant,
                format!("unknown sender '{}'", m.sender),
            );
        }
    }

    let topic = d.topic();
    match d.moves.first() {
        None => flag(1, Condition::OpensFirst, "dialogue has no moves".into()),
        Some(m) if topic.is_none() => flag(1, Condition::OpensFirst, format!("found {}", m.kind.name())),
        Some(_) => {}
    }

    let closes_from = t.saturating_sub(k).max(1);
    for (i, m) in d.moves.iter().enumerate().skip(1) {
        let index = i + 1;
        if i < closes_from {
            if !matches!(m.kind, MoveKind::Assert(_)) {
                flag(index, Condition::AssertsInBetween, format!("found {}", m.kind.name()));
            }
        } else if !matches!(m.kind, MoveKind::Close) {
            flag(index, Condition::ClosesLast, format!("found {}", m.kind.name()));
        }
    }
    if t < k + 1 && k > 0 {
        flag(
            t,
            Condition::ClosesLast,
            format!("{t} moves cannot hold an open and {k} closes"),
        );
    }

    if let Some(topic) = topic {
        for (index, arg) in d.assertions() {
            match related_to(arg, topic, catalog) {
                Ok(true) => {}
                Ok(false) => flag(index, Condition::ArgumentRelated, format!("{arg} is outside the topic")),
                Err(e) => flag(index, Condition::ArgumentRelated, e.to_string()),
            }
        }
    }

    if let (Some(first), Some(last)) = (d.moves.first(), d.moves.last()) {
        if first.sender != last.sender {
            flag(
                t,
                Condition::LastSenderOpened,
                format!("opened by '{}', closed by '{}'", first.sender, last.sender),
            );
        }
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DialogueError {
    #[error("dialogue has no participants")]
    NoParticipants,
    #[error("bad transcript: {0}")]
    Transcript(String),
}

/// True iff the dialogue has a single participant.
pub fn is_self_reflective(d: &Dialogue) -> Result<bool, DialogueError> {
    match d.participants.len() {
        0 => Err(DialogueError::NoParticipants),
        n => Ok(n == 1),
    }
}

/// The argumentation graph of a dialogue.
///
/// Arguments are named `1..=n` by assertion order; the move index each
/// argument was asserted at is kept alongside.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedAf {
    pub graph: ArgGraph,
    pub arguments: Vec<BlackBoxArgument>,
    pub move_indices: Vec<usize>,
}

impl ExtractedAf {
    /// The same graph with arguments named by move index.
    pub fn by_move_index(&self) -> ArgGraph {
        let rename = |id: &ArgId| -> ArgId {
            let ordinal: usize = id.as_str().parse().expect("ordinal ids");
            ArgId::from(self.move_indices[ordinal - 1])
        };
        let conclusions = self
            .graph
            .conclusion_of()
            .iter()
            .map(|(id, c)| (rename(id), c.clone()))
            .collect();
        ArgGraph::new(
            self.graph.arg_ids().iter().map(rename),
            self.graph.attack_pairs().map(|(a, b)| (rename(a), rename(b))),
        )
        .expect("renaming preserves endpoints")
        .with_conclusions(conclusions)
    }

    pub fn argument(&self, id: &ArgId) -> Option<&BlackBoxArgument> {
        let ordinal: usize = id.as_str().parse().ok()?;
        self.arguments.get(ordinal.checked_sub(1)?)
    }
}

/// Builds the graph whose arguments are the dialogue's assertions and whose
/// attacks are all ordered pairs related by [`attacks`].
pub fn extract_af(d: &Dialogue, spec: &SimilaritySpec, catalog: &Catalog) -> Result<ExtractedAf, UnknownInput> {
    let (move_indices, arguments): (Vec<usize>, Vec<BlackBoxArgument>) =
        d.assertions().map(|(i, a)| (i, a.clone())).unzip();
    let ids: Vec<ArgId> = (1..=arguments.len()).map(ArgId::from).collect();
    let mut pairs = Vec::new();
    for (i, a) in arguments.iter().enumerate() {
        for (j, b) in arguments.iter().enumerate() {
            if attacks(a, b, spec, catalog)? {
                pairs.push((ids[i].clone(), ids[j].clone()));
            }
        }
    }
    let conclusions: BTreeMap<ArgId, Atom> = ids
        .iter()
        .cloned()
        .zip(arguments.iter().map(|a| a.conclusion.clone()))
        .collect();
    let graph = ArgGraph::new(ids, pairs)
        .expect("attack endpoints are declared")
        .with_conclusions(conclusions);
    Ok(ExtractedAf {
        graph,
        arguments,
        move_indices,
    })
}

#[derive(Serialize, Deserialize)]
struct TranscriptWire {
    participants: Vec<AgentId>,
    moves: Vec<MoveWire>,
}

#[derive(Serialize, Deserialize)]
struct MoveWire {
    index: usize,
    sender: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    topic: Option<TopicWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    argument: Option<BlackBoxArgument>,
}

#[derive(Serialize, Deserialize)]
struct TopicWire {
    label: String,
    input_class: Vec<String>,
    descriptors: Vec<Atom>,
}

/// Serialises a dialogue as a pretty-printed JSON transcript with 1-based
/// move indices.
pub fn transcript_json(d: &Dialogue) -> String {
    let wire = TranscriptWire {
        participants: d.participants.clone(),
        moves: d
            .moves
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let (topic, argument) = match &m.kind {
                    MoveKind::Open(t) => (
                        Some(TopicWire {
                            label: t.label.clone(),
                            input_class: t.input_class.predicates().iter().map(ToString::to_string).collect(),
                            descriptors: t.descriptors.iter().cloned().collect(),
                        }),
                        None,
                    ),
                    MoveKind::Assert(a) => (None, Some(a.clone())),
                    MoveKind::Close => (None, None),
                };
                MoveWire {
                    index: i + 1,
                    sender: m.sender.clone(),
                    kind: m.kind.name().to_string(),
                    topic,
                    argument,
                }
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&wire).expect("transcript serialises");
    out.push('\n');
    out
}

/// Reads a transcript written by [`transcript_json`].
pub fn parse_transcript(json: &str) -> Result<Dialogue, DialogueError> {
    let bad = |m: String| DialogueError::Transcript(m);
    let wire: TranscriptWire = serde_json::from_str(json).map_err(|e| bad(e.to_string()))?;
    let mut moves = Vec::with_capacity(wire.moves.len());
    for (i, m) in wire.moves.into_iter().enumerate() {
        if m.index != i + 1 {
            return Err(bad(format!("move {} has index {}", i + 1, m.index)));
        }
        let kind = match (m.kind.as_str(), m.topic, m.argument) {
            ("open", Some(t), None) => {
                let predicates = t
                    .input_class
                    .iter()
                    .map(|p| p.parse::<FeaturePredicate>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| bad(e.to_string()))?;
                MoveKind::Open(Topic::new(
                    t.label,
                    InputClassSpec::new(predicates),
                    t.descriptors.into_iter().collect(),
                ))
            }
            ("assert", None, Some(a)) => MoveKind::Assert(a),
            ("close", None, None) => MoveKind::Close,
            (kind, _, _) => return Err(bad(format!("move {}: bad payload for kind '{kind}'", i + 1))),
        };
        moves.push(Move { sender: m.sender, kind });
    }
    Ok(Dialogue {
        participants: wire.participants,
        moves,
    })
}
