#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use argaudit::af::{conflict_free, ArgGraph, ArgId, Extension};
use argaudit::catalog::{load_catalog, Catalog};
use argaudit::config::AuditConfig;
use argaudit::investigation::{InvestigatorAgent, SuspectAgent};
use argaudit::policy::{parse_policy, Atom, Clause, Program};
use argaudit::recommender::{ToyRecommender, VarietyDescriber};
use argaudit::system::SuspectSystem;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub struct World {
    pub catalog: Arc<Catalog>,
    pub config: AuditConfig,
    pub investigator: InvestigatorAgent,
    pub suspect: SuspectAgent,
}

pub fn world() -> World {
    let (catalog, ratings) = load_catalog(&read_fixture("movies.csv"), &read_fixture("ratings.csv")).unwrap();
    let policy = parse_policy(&read_fixture("policy.pol")).unwrap();
    let config = AuditConfig::parse(&read_fixture("audit.conf")).unwrap();
    let catalog = Arc::new(catalog);
    let system = SuspectSystem::new(ToyRecommender::new(Arc::clone(&catalog), Arc::new(ratings)));
    let describe = VarietyDescriber::new(Arc::clone(&catalog), config.thresholds);
    World {
        investigator: InvestigatorAgent::new(policy.clone(), config.topic_strategy()),
        suspect: SuspectAgent::new(
            policy,
            Arc::new(system),
            Arc::new(describe),
            Arc::clone(&catalog),
            config.sampling,
        ),
        catalog,
        config,
    }
}

/// The worked example's graph: the printed attack list, duplicates included.
pub fn reference_graph() -> ArgGraph {
    let listed = [
        (2, 8),
        (8, 2),
        (2, 9),
        (9, 2),
        (2, 6),
        (6, 2),
        (2, 3),
        (3, 2),
        (3, 6),
        (6, 3),
        (3, 8),
        (8, 3),
        (3, 2),
        (2, 3),
        (4, 6),
        (6, 4),
        (6, 3),
        (3, 6),
        (6, 8),
        (8, 6),
        (6, 4),
        (4, 6),
        (6, 2),
        (2, 6),
        (8, 6),
        (6, 8),
        (8, 3),
        (3, 8),
        (8, 10),
        (10, 8),
        (9, 2),
        (2, 9),
        (10, 8),
        (8, 10),
    ];
    ArgGraph::new(1..=10usize, listed).unwrap()
}

pub fn ext(ids: &[usize]) -> Extension {
    ids.iter().copied().collect()
}

/// A random graph on `n` arguments where each ordered pair (self-attacks
/// included) is an attack with probability `density`.
pub fn random_graph(rng: &mut impl Rng, n: usize, density: f64) -> ArgGraph {
    let mut attacks = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if rng.gen_bool(density) {
                attacks.push((a, b));
            }
        }
    }
    ArgGraph::new(0..n, attacks).unwrap()
}

/// The ⊆-maximal conflict-free sets, by exhaustive search.
pub fn maximal_conflict_free(g: &ArgGraph) -> Vec<Extension> {
    let ids = g.arg_ids();
    let n = ids.len();
    let sets: Vec<Extension> = (0u32..1 << n)
        .map(|mask| {
            (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| ids[i].clone())
                .collect::<Extension>()
        })
        .filter(|s| conflict_free(s, g))
        .collect();
    let mut maximal: Vec<Extension> = sets
        .iter()
        .filter(|s| !sets.iter().any(|t| t.len() > s.len() && s.is_subset(t)))
        .cloned()
        .collect();
    maximal.sort();
    maximal
}

/// A random program over at most `max_atoms` atoms (strong negations count
/// as atoms of their own) with at most `max_clauses` clauses.
pub fn random_program(rng: &mut impl Rng, max_atoms: usize, max_clauses: usize) -> Program {
    const POOL: [&str; 8] = ["a", "~a", "b", "~b", "c", "~c", "d", "~d"];
    let n = rng.gen_range(1..=max_atoms.min(POOL.len()));
    let atoms: Vec<Atom> = POOL[..n].iter().map(|s| Atom::parse(s).unwrap()).collect();
    let clauses = (0..rng.gen_range(0..=max_clauses))
        .map(|_| {
            let head = atoms[rng.gen_range(0..n)].clone();
            let body: Vec<Atom> = (0..rng.gen_range(0..=3))
                .map(|_| atoms[rng.gen_range(0..n)].clone())
                .collect();
            Clause::new(head, body)
        })
        .collect();
    Program::new(clauses)
}

/// Every set of atoms closed under the clauses, then the ⊆-minimal ones.
pub fn brute_minimal_models(program: &Program) -> Vec<BTreeSet<Atom>> {
    let atoms: Vec<&Atom> = program.language().iter().collect();
    let models: Vec<BTreeSet<Atom>> = (0u32..1 << atoms.len())
        .map(|mask| {
            (0..atoms.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| atoms[i].clone())
                .collect::<BTreeSet<Atom>>()
        })
        .filter(|m| {
            program
                .clauses()
                .iter()
                .all(|c| !c.body().iter().all(|b| m.contains(b)) || m.contains(c.head()))
        })
        .collect();
    models
        .iter()
        .filter(|m| !models.iter().any(|o| o.len() < m.len() && o.is_subset(m)))
        .cloned()
        .collect()
}

pub fn brute_consistent(program: &Program, extra: &[Atom]) -> bool {
    let minimal = brute_minimal_models(&program.with_facts(extra));
    assert_eq!(minimal.len(), 1, "a definite program has exactly one minimal model");
    minimal[0].iter().all(|a| !minimal[0].contains(&a.complement()))
}

pub fn arg(id: usize) -> ArgId {
    ArgId::from(id)
}
