//! Abstract argumentation frameworks and their semantics.
//!
//! An [`ArgGraph`] is a set of opaque argument identifiers and an attack
//! relation over them. Extensions are computed for four semantics:
//!
//! * grounded, by iterating the characteristic function from the empty set;
//! * complete, stable and preferred, by backtracking over three-valued
//!   labellings (`in`, `out`, `undec`) with constraint propagation.
//!
//! [`brute_force`] enumerates all subsets and checks each semantics'
//! defining predicate directly. It shares no code with the labelling search
//! and serves as the test oracle for it.
//!
//! All outputs use a canonical order: each extension's members ascending,
//! and lists of extensions sorted lexicographically.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::policy::Atom;

/// Default bound on the number of extensions a single query may produce.
pub const DEFAULT_MAX_EXTENSIONS: usize = 10_000;

/// Largest graph [`brute_force`] accepts.
pub const BRUTE_FORCE_MAX_ARGS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AfError {
    #[error("attack ({0}, {1}) mentions an undeclared argument")]
    UndeclaredArgument(String, String),
    #[error("syntax error on line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("more than {0} extensions")]
    ExtensionOverflow(usize),
    #[error("brute force supports at most {max} arguments, graph has {actual}")]
    TooLarge { max: usize, actual: usize },
    #[error("unknown semantics '{0}' (expected grounded, stable, complete or preferred)")]
    UnknownSemantics(String),
}

/// An argument identifier.
///
/// Identifiers are compared numerically when both are integers, so `2`
/// sorts before `10`; integers sort before other identifiers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ArgId(String);

impl ArgId {
    pub fn new(id: impl Into<String>) -> ArgId {
        ArgId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn numeric(&self) -> Option<u128> {
        if self.0.bytes().all(|b| b.is_ascii_digit()) {
            self.0.parse().ok()
        } else {
            None
        }
    }
}

impl Ord for ArgId {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.numeric(), other.numeric()) {
            (Some(a), Some(b)) => a.cmp(&b).then_with(|| self.0.cmp(&other.0)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for ArgId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ArgId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ArgId {
    fn from(s: &str) -> Self {
        ArgId::new(s)
    }
}

impl From<String> for ArgId {
    fn from(s: String) -> Self {
        ArgId(s)
    }
}

impl From<usize> for ArgId {
    fn from(n: usize) -> Self {
        ArgId::new(n.to_string())
    }
}

/// A set of arguments selected by a semantics.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Extension(BTreeSet<ArgId>);

impl Extension {
    pub fn new(members: impl IntoIterator<Item = ArgId>) -> Extension {
        Extension(members.into_iter().collect())
    }

    pub fn members(&self) -> &BTreeSet<ArgId> {
        &self.0
    }

    pub fn contains(&self, id: &ArgId) -> bool {
        self.0.contains(id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset(&self, other: &Extension) -> bool {
        self.0.is_subset(&other.0)
    }
}

impl<T: Into<ArgId>> FromIterator<T> for Extension {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        Extension(iter.into_iter().map(Into::into).collect())
    }
}

/// Renders as `[1,5,7]`.
impl fmt::Display for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, id) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{id}")?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Semantics {
    Grounded,
    Stable,
    Complete,
    Preferred,
}

impl Semantics {
    pub const ALL: [Semantics; 4] = [
        Semantics::Grounded,
        Semantics::Stable,
        Semantics::Complete,
        Semantics::Preferred,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Semantics::Grounded => "grounded",
            Semantics::Stable => "stable",
            Semantics::Complete => "complete",
            Semantics::Preferred => "preferred",
        }
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Semantics {
    type Err = AfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Semantics::ALL
            .into_iter()
            .find(|sem| sem.name() == s)
            .ok_or_else(|| AfError::UnknownSemantics(s.to_string()))
    }
}

/// An abstract argumentation framework.
///
/// Arguments are stored in canonical id order, so internal indices follow
/// that order too.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArgGraph {
    ids: Vec<ArgId>,
    index: BTreeMap<ArgId, usize>,
    attacks: BTreeSet<(usize, usize)>,
    attackers: Vec<Vec<usize>>,
    targets: Vec<Vec<usize>>,
    conclusion_of: BTreeMap<ArgId, Atom>,
}

impl ArgGraph {
    /// Builds a graph; duplicate ids and duplicate attacks collapse.
    pub fn new<I, A, X, Y>(ids: I, attacks: A) -> Result<ArgGraph, AfError>
    where
        I: IntoIterator,
        I::Item: Into<ArgId>,
        A: IntoIterator<Item = (X, Y)>,
        X: Into<ArgId>,
        Y: Into<ArgId>,
    {
        let ids: Vec<ArgId> = ids
            .into_iter()
            .map(Into::into)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: BTreeMap<ArgId, usize> = ids.iter().cloned().enumerate().map(|(i, id)| (id, i)).collect();
        let mut pairs = BTreeSet::new();
        for (from, to) in attacks {
            let (from, to): (ArgId, ArgId) = (from.into(), to.into());
            match (index.get(&from), index.get(&to)) {
                (Some(&a), Some(&b)) => {
                    pairs.insert((a, b));
                }
                _ => return Err(AfError::UndeclaredArgument(from.0, to.0)),
            }
        }
        let n = ids.len();
        let mut attackers = vec![Vec::new(); n];
        let mut targets = vec![Vec::new(); n];
        for &(a, b) in &pairs {
            targets[a].push(b);
            attackers[b].push(a);
        }
        Ok(ArgGraph {
            ids,
            index,
            attacks: pairs,
            attackers,
            targets,
            conclusion_of: BTreeMap::new(),
        })
    }

    /// Attaches a conclusion to each argument that has one.
    pub fn with_conclusions(mut self, conclusions: BTreeMap<ArgId, Atom>) -> ArgGraph {
        self.conclusion_of = conclusions
            .into_iter()
            .filter(|(id, _)| self.index.contains_key(id))
            .collect();
        self
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Argument ids in canonical order.
    pub fn arg_ids(&self) -> &[ArgId] {
        &self.ids
    }

    pub fn contains(&self, id: &ArgId) -> bool {
        self.index.contains_key(id)
    }

    /// Attack pairs in canonical order.
    pub fn attack_pairs(&self) -> impl Iterator<Item = (&ArgId, &ArgId)> + '_ {
        self.attacks.iter().map(|&(a, b)| (&self.ids[a], &self.ids[b]))
    }

    pub fn num_attacks(&self) -> usize {
        self.attacks.len()
    }

    pub fn attacks(&self, from: &ArgId, to: &ArgId) -> bool {
        match (self.index.get(from), self.index.get(to)) {
            (Some(&a), Some(&b)) => self.attacks.contains(&(a, b)),
            _ => false,
        }
    }

    pub fn attackers_of(&self, id: &ArgId) -> impl Iterator<Item = &ArgId> + '_ {
        let idx = self.index.get(id).copied();
        idx.into_iter()
            .flat_map(move |i| self.attackers[i].iter().map(|&a| &self.ids[a]))
    }

    pub fn conclusion_of(&self) -> &BTreeMap<ArgId, Atom> {
        &self.conclusion_of
    }

    /// True iff every attack has its reverse and no argument attacks itself.
    pub fn is_symmetric_irreflexive(&self) -> bool {
        self.attacks
            .iter()
            .all(|&(a, b)| a != b && self.attacks.contains(&(b, a)))
    }

    fn members_of(&self, set: &Extension) -> Vec<bool> {
        let mut member = vec![false; self.len()];
        for id in set.members() {
            if let Some(&i) = self.index.get(id) {
                member[i] = true;
            }
        }
        member
    }

    fn extension_of(&self, member: impl Fn(usize) -> bool) -> Extension {
        Extension(
            (0..self.len())
                .filter(|&i| member(i))
                .map(|i| self.ids[i].clone())
                .collect(),
        )
    }
}

/// True iff no attack has both endpoints in `set`.
pub fn conflict_free(set: &Extension, g: &ArgGraph) -> bool {
    let member = g.members_of(set);
    !g.attacks.iter().any(|&(a, b)| member[a] && member[b])
}

/// True iff every attacker of `arg` is attacked by some member of `set`.
pub fn defends(g: &ArgGraph, set: &Extension, arg: &ArgId) -> bool {
    let member = g.members_of(set);
    let Some(&target) = g.index.get(arg) else {
        return false;
    };
    g.attackers[target]
        .iter()
        .all(|&b| g.attackers[b].iter().any(|&c| member[c]))
}

/// Least fixpoint of the characteristic function.
///
/// Each pass adds every argument whose attackers are all attacked by the
/// current set; the characteristic function is monotone, so the set only grows.
#[allow(clippy::needless_range_loop)]
pub fn grounded(g: &ArgGraph) -> Extension {
    let n = g.len();
    let mut inside = vec![false; n];
    let mut defeated = vec![false; n];
    loop {
        let mut changed = false;
        for a in 0..n {
            if !inside[a] && g.attackers[a].iter().all(|&b| defeated[b]) {
                inside[a] = true;
                changed = true;
                for &t in &g.targets[a] {
                    defeated[t] = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    g.extension_of(|i| inside[i])
}

/// Extension enumerator with a bound on the result size.
#[derive(Debug, Clone, Copy)]
pub struct Solver {
    pub max_extensions: usize,
}

impl Default for Solver {
    fn default() -> Self {
        Solver {
            max_extensions: DEFAULT_MAX_EXTENSIONS,
        }
    }
}

impl Solver {
    pub fn new(max_extensions: usize) -> Solver {
        Solver { max_extensions }
    }

    /// All extensions of `g` under `semantics`, in canonical order.
    pub fn extensions(&self, g: &ArgGraph, semantics: Semantics) -> Result<Vec<Extension>, AfError> {
        match semantics {
            Semantics::Grounded => Ok(vec![grounded(g)]),
            Semantics::Stable => self.labellings(g, false),
            Semantics::Complete => self.labellings(g, true),
            Semantics::Preferred => {
                let complete = self.labellings(g, true)?;
                Ok(maximal(complete))
            }
        }
    }

    fn labellings(&self, g: &ArgGraph, allow_undec: bool) -> Result<Vec<Extension>, AfError> {
        let mut search = LabellingSearch {
            g,
            allow_undec,
            cap: self.max_extensions,
            found: Vec::new(),
        };
        let mut labels = vec![Label::Unset; g.len()];
        if search.propagate(&mut labels) {
            search.descend(labels)?;
        }
        let mut out: Vec<Extension> = search
            .found
            .iter()
            .map(|labels| g.extension_of(|i| labels[i] == Label::In))
            .collect();
        out.sort();
        Ok(out)
    }
}

pub fn stable(g: &ArgGraph) -> Result<Vec<Extension>, AfError> {
    Solver::default().extensions(g, Semantics::Stable)
}

pub fn complete(g: &ArgGraph) -> Result<Vec<Extension>, AfError> {
    Solver::default().extensions(g, Semantics::Complete)
}

pub fn preferred(g: &ArgGraph) -> Result<Vec<Extension>, AfError> {
    Solver::default().extensions(g, Semantics::Preferred)
}

/// The ⊆-maximal members of `sets`, in canonical order.
fn maximal(sets: Vec<Extension>) -> Vec<Extension> {
    let mut out: Vec<Extension> = sets
        .iter()
        .filter(|s| !sets.iter().any(|t| t != *s && s.is_subset(t)))
        .cloned()
        .collect();
    out.sort();
    out.dedup();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Label {
    Unset,
    In,
    Out,
    Undec,
}

struct LabellingSearch<'g> {
    g: &'g ArgGraph,
    allow_undec: bool,
    cap: usize,
    found: Vec<Vec<Label>>,
}

impl LabellingSearch<'_> {
    fn descend(&mut self, labels: Vec<Label>) -> Result<(), AfError> {
        let Some(next) = self.pick(&labels) else {
            if self.is_legal(&labels) {
                if self.found.len() == self.cap {
                    return Err(AfError::ExtensionOverflow(self.cap));
                }
                self.found.push(labels);
            }
            return Ok(());
        };
        let choices: &[Label] = if self.allow_undec {
            &[Label::In, Label::Out, Label::Undec]
        } else {
            &[Label::In, Label::Out]
        };
        for &choice in choices {
            let mut branch = labels.clone();
            branch[next] = choice;
            if self.propagate(&mut branch) {
                self.descend(branch)?;
            }
        }
        Ok(())
    }

    /// The unlabelled argument with the most labelled neighbours.
    fn pick(&self, labels: &[Label]) -> Option<usize> {
        (0..labels.len())
            .filter(|&a| labels[a] == Label::Unset)
            .max_by_key(|&a| {
                let degree = self.g.attackers[a].len() + self.g.targets[a].len();
                (degree, std::cmp::Reverse(a))
            })
    }

    /// Applies forced labels until a fixpoint. Returns false on a conflict.
    fn propagate(&self, labels: &mut [Label]) -> bool {
        let g = self.g;
        loop {
            let mut changed = false;
            for a in 0..labels.len() {
                let attackers = &g.attackers[a];
                let any_in = attackers.iter().any(|&b| labels[b] == Label::In);
                let all_out = attackers.iter().all(|&b| labels[b] == Label::Out);
                match labels[a] {
                    Label::Unset => {
                        if any_in {
                            labels[a] = Label::Out;
                            changed = true;
                        } else if all_out {
                            labels[a] = Label::In;
                            changed = true;
                        }
                    }
                    Label::In => {
                        for &b in attackers.iter().chain(&g.targets[a]) {
                            match labels[b] {
                                Label::Unset => {
                                    labels[b] = Label::Out;
                                    changed = true;
                                }
                                Label::Out => {}
                                Label::In | Label::Undec => return false,
                            }
                        }
                    }
                    Label::Out => {
                        if any_in {
                            continue;
                        }
                        let mut open = attackers.iter().filter(|&&b| matches!(labels[b], Label::Unset));
                        match (open.next(), open.next()) {
                            (None, _) => return false,
                            (Some(&b), None) => {
                                labels[b] = Label::In;
                                changed = true;
                            }
                            _ => {}
                        }
                    }
                    Label::Undec => {
                        if any_in || all_out {
                            return false;
                        }
                        let undec_possible = attackers
                            .iter()
                            .any(|&b| matches!(labels[b], Label::Unset | Label::Undec));
                        if !undec_possible {
                            return false;
                        }
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn is_legal(&self, labels: &[Label]) -> bool {
        (0..labels.len()).all(|a| {
            let attackers = &self.g.attackers[a];
            let any_in = attackers.iter().any(|&b| labels[b] == Label::In);
            let all_out = attackers.iter().all(|&b| labels[b] == Label::Out);
            match labels[a] {
                Label::In => all_out,
                Label::Out => any_in,
                Label::Undec => self.allow_undec && !any_in && !all_out,
                Label::Unset => false,
            }
        })
    }
}

/// Enumerates every subset of the arguments and keeps those satisfying the
/// semantics' defining predicate. Limited to [`BRUTE_FORCE_MAX_ARGS`].
pub fn brute_force(g: &ArgGraph, semantics: Semantics) -> Result<Vec<Extension>, AfError> {
    let n = g.len();
    if n > BRUTE_FORCE_MAX_ARGS {
        return Err(AfError::TooLarge {
            max: BRUTE_FORCE_MAX_ARGS,
            actual: n,
        });
    }
    let mut attacked_by = vec![0u32; n];
    let mut attackers_of = vec![0u32; n];
    for (a, b) in g.attack_pairs() {
        let (a, b) = (g.index[a], g.index[b]);
        attacked_by[a] |= 1 << b;
        attackers_of[b] |= 1 << a;
    }
    let all: u32 = (1u32 << n) - 1;
    let range = |s: u32| (0..n).filter(move |&i| s >> i & 1 == 1);
    let conflict_free = |s: u32| range(s).all(|i| attacked_by[i] & s == 0);
    let hit = |s: u32| range(s).fold(0u32, |acc, i| acc | attacked_by[i]);
    let defended = |s: u32| {
        let h = hit(s);
        (0..n)
            .filter(|&i| attackers_of[i] & !h == 0)
            .fold(0u32, |acc, i| acc | 1 << i)
    };
    let subsets = 0..=all;
    let complete: Vec<u32> = subsets
        .clone()
        .filter(|&s| conflict_free(s) && defended(s) == s)
        .collect();
    let masks: Vec<u32> = match semantics {
        Semantics::Complete => complete,
        Semantics::Stable => subsets.filter(|&s| conflict_free(s) && (hit(s) | s) == all).collect(),
        Semantics::Preferred => complete
            .iter()
            .copied()
            .filter(|&s| !complete.iter().any(|&t| t != s && s & t == s))
            .collect(),
        Semantics::Grounded => complete
            .iter()
            .copied()
            .filter(|&s| complete.iter().all(|&t| s & t == s))
            .collect(),
    };
    let mut out: Vec<Extension> = masks.into_iter().map(|s| g.extension_of(|i| s >> i & 1 == 1)).collect();
    out.sort();
    Ok(out)
}

/// Parses the `arg(a).` / `att(a,b).` interchange format. `%` starts a
/// comment that runs to the end of the line.
pub fn parse_apx(text: &str) -> Result<ArgGraph, AfError> {
    let mut args = Vec::new();
    let mut attacks = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split_once('%').map_or(raw, |(code, _)| code).trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: &str| AfError::Syntax {
            line: n + 1,
            message: format!("{message}: '{line}'"),
        };
        let body = line
            .strip_suffix('.')
            .and_then(|l| l.strip_suffix(')'))
            .ok_or_else(|| syntax("expected a statement ending in ')."))?;
        let (head, inner) = body.split_once('(').ok_or_else(|| syntax("expected '('"))?;
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if let Some(bad) = parts.iter().find(|p| !valid_apx_id(p)) {
            return Err(syntax(&format!("bad argument identifier '{bad}'")));
        }
        match (head.trim(), parts.as_slice()) {
            ("arg", [id]) => args.push(ArgId::new(*id)),
            ("att", [a, b]) => attacks.push((ArgId::new(*a), ArgId::new(*b))),
            _ => return Err(syntax("expected arg(<id>) or att(<id>,<id>)")),
        }
    }
    ArgGraph::new(args, attacks)
}

fn valid_apx_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Arguments in id order, then attacks in lexicographic order.
pub fn emit_apx(g: &ArgGraph) -> String {
    let mut out = String::new();
    for id in g.arg_ids() {
        out.push_str(&format!("arg({id}).\n"));
    }
    for (a, b) in g.attack_pairs() {
        out.push_str(&format!("att({a},{b}).\n"));
    }
    out
}

/// Renders `g` as a DOT digraph. Members of `highlight` are drawn filled.
pub fn emit_dot(g: &ArgGraph, highlight: Option<&Extension>) -> String {
    if g.is_empty() {
        return "digraph af { }\n".to_string();
    }
    let mut out = String::from("digraph af {\n");
    for id in g.arg_ids() {
        let mut attrs = Vec::new();
        if let Some(c) = g.conclusion_of.get(id) {
            attrs.push(format!("label=\"{id}: {}\"", c.to_string().replace('"', "\\\"")));
        }
        if highlight.is_some_and(|h| h.contains(id)) {
            attrs.push("style=filled".to_string());
            attrs.push("fillcolor=lightgray".to_string());
        }
        if attrs.is_empty() {
            out.push_str(&format!("  {};\n", dot_id(id)));
        } else {
            out.push_str(&format!("  {} [{}];\n", dot_id(id), attrs.join(", ")));
        }
    }
    for (a, b) in g.attack_pairs() {
        out.push_str(&format!("  {} -> {};\n", dot_id(a), dot_id(b)));
    }
    out.push_str("}\n");
    out
}

fn dot_id(id: &ArgId) -> String {
    let s = id.as_str();
    let numeral = s.bytes().all(|b| b.is_ascii_digit());
    let ident = s.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if numeral || ident {
        s.to_string()
    } else {
        format!("\"{s}\"")
    }
}
