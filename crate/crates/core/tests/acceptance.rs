//! Acceptance checks, one PASS/FAIL line each. Run with
//! `cargo test --test acceptance`.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use argaudit::af::{brute_force, grounded, Semantics, Solver};
use argaudit::argument::{BlackBoxArgument, InputClassSpec, Topic};
use argaudit::catalog::load_catalog;
use argaudit::cli;
use argaudit::dialogue::{extract_af, run_dialogue, validate_dialogue, Condition, Dialogue, Move};
use argaudit::investigation::generate_topics;
use argaudit::policy::{is_consistent, least_model, parse_policy, Atom};
use common::{ext, World};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
type Mutation = (&'static str, fn(&mut Dialogue), Vec<(usize, Condition)>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    ensure(elapsed < limit, || format!("{what} took {elapsed:?}, limit {limit:?}"))
}

fn golden_af() -> Outcome {
    let start = Instant::now();
    let g = common::reference_graph();
    let solver = Solver::default();
    let gr = grounded(&g);
    let stable = solver.extensions(&g, Semantics::Stable).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(g.num_attacks() == 18, || {
        format!("{} distinct attacks, expected 18", g.num_attacks())
    })?;
    ensure(gr == ext(&[1, 5, 7]), || format!("grounded {gr}"))?;
    let want = vec![
        ext(&[1, 2, 4, 5, 7, 10]),
        ext(&[1, 3, 4, 5, 7, 9, 10]),
        ext(&[1, 4, 5, 7, 8, 9]),
        ext(&[1, 5, 6, 7, 9, 10]),
    ];
    ensure(stable == want, || format!("stable {stable:?}"))?;
    within(elapsed, Duration::from_secs(1), "solving")?;
    Ok(format!(
        "grounded [1,5,7], 4 stable extensions as printed; 34 listed attacks, 18 distinct ({elapsed:.1?})"
    ))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let solver = Solver::default();
    let densities = [0.1, 0.3, 0.5];
    let start = Instant::now();
    let mut extensions = 0;
    for i in 0..500 {
        let n = rng.gen_range(0..=10);
        let g = common::random_graph(&mut rng, n, densities[i % 3]);
        for sem in Semantics::ALL {
            let got = solver.extensions(&g, sem).map_err(|e| e.to_string())?;
            let want = brute_force(&g, sem).map_err(|e| e.to_string())?;
            ensure(got == want, || {
                format!("instance {i} ({sem}): solver {got:?}, brute force {want:?}")
            })?;
            extensions += got.len();
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(60), "500 instances")?;
    Ok(format!(
        "500 instances x 4 semantics agree, {extensions} extensions compared ({elapsed:.1?})"
    ))
}

/// A well-formed dialogue over the whole catalog in which the suspect
/// asserts random descriptors for the rated inputs of one to three users.
fn random_dialogue(w: &World, inputs: &[argaudit::system::InputPoint], rng: &mut ChaCha8Rng) -> Dialogue {
    let group = ["highVariety", "mediumVariety", "lowVariety"].map(|a| Atom::parse(a).unwrap());
    let users: BTreeSet<u32> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(1..=12)).collect();
    let mut chosen: Vec<_> = inputs.iter().filter(|x| users.contains(&x.user_id)).copied().collect();
    chosen.shuffle(rng);
    chosen.truncate(rng.gen_range(2..=16));
    let topic = Topic::new(
        "(everything, V)",
        InputClassSpec::new(Vec::new()),
        group.iter().cloned().collect(),
    );
    let inv = &w.investigator.id;
    let sus = &w.suspect.id;
    let mut moves = vec![Move::open(inv, topic)];
    for x in chosen {
        let conclusion = group.choose(rng).unwrap().clone();
        moves.push(Move::assert(sus, BlackBoxArgument::new(x, conclusion)));
    }
    moves.push(Move::close(sus));
    moves.push(Move::close(inv));
    Dialogue {
        participants: vec![inv.clone(), sus.clone()],
        moves,
    }
}

fn symmetric_property() -> Outcome {
    let w = common::world();
    let (_, ratings) = load_catalog(
        &common::read_fixture("movies.csv"),
        &common::read_fixture("ratings.csv"),
    )
    .map_err(|e| e.to_string())?;
    let inputs: Vec<_> = ratings.rated_inputs().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let solver = Solver::default();
    let (mut attacks, mut extensions) = (0, 0);
    for i in 0..200 {
        let d = random_dialogue(&w, &inputs, &mut rng);
        validate_dialogue(&d, &w.catalog).map_err(|v| format!("dialogue {i} malformed: {v:?}"))?;
        let af = extract_af(&d, &w.config.similarity, &w.catalog).map_err(|e| e.to_string())?;
        let g = &af.graph;
        ensure(g.is_symmetric_irreflexive(), || {
            format!("dialogue {i}: asymmetric graph")
        })?;
        let maximal = common::maximal_conflict_free(g);
        for sem in [Semantics::Stable, Semantics::Preferred] {
            let brute = brute_force(g, sem).map_err(|e| e.to_string())?;
            let solved = solver.extensions(g, sem).map_err(|e| e.to_string())?;
            ensure(brute == maximal && solved == maximal, || {
                format!("dialogue {i} ({sem}): brute {brute:?}, solver {solved:?}, maximal cf {maximal:?}")
            })?;
        }
        attacks += g.num_attacks();
        extensions += maximal.len();
    }
    Ok(format!(
        "200 extracted graphs ({attacks} attacks, {extensions} extensions): stable = preferred = maximal conflict-free"
    ))
}

fn conditions(d: &Dialogue, w: &World) -> Vec<(usize, Condition)> {
    match validate_dialogue(d, &w.catalog) {
        Ok(()) => Vec::new(),
        Err(v) => v.into_iter().map(|v| (v.index, v.condition)).collect(),
    }
}

fn dialogue_protocol() -> Outcome {
    let w = common::world();
    let topics = w.investigator.topics().map_err(|e| e.to_string())?;
    let mut mutations = 0;
    for (i, topic) in topics.iter().enumerate() {
        let d = run_dialogue(&w.investigator, &w.suspect, topic).map_err(|e| e.to_string())?;
        ensure(conditions(&d, &w).is_empty(), || {
            format!("topic {}: {:?}", i + 1, conditions(&d, &w))
        })?;
        // moves: open, n asserts, close by the suspect, close by the opener
        let n = d.moves.len();
        ensure(n >= 4, || format!("topic {}: only {n} moves", i + 1))?;
        let cases: [Mutation; 3] = [
            (
                "drop a close",
                |d| {
                    let n = d.moves.len();
                    d.moves.remove(n - 2);
                },
                vec![(n - 2, Condition::ClosesLast)],
            ),
            (
                "assert after a close",
                |d| {
                    let n = d.moves.len();
                    d.moves.swap(n - 3, n - 2);
                },
                vec![(n - 2, Condition::AssertsInBetween), (n - 1, Condition::ClosesLast)],
            ),
            (
                "final close by the suspect",
                |d| {
                    let n = d.moves.len();
                    d.moves.swap(n - 2, n - 1);
                },
                vec![(n, Condition::LastSenderOpened)],
            ),
        ];
        for (name, mutate, want) in cases {
            let mut m = d.clone();
            mutate(&mut m);
            let got = conditions(&m, &w);
            ensure(got == want, || {
                format!("topic {}, {name}: {got:?}, expected {want:?}", i + 1)
            })?;
            mutations += 1;
        }
    }
    Ok(format!(
        "{} topic dialogues well-formed; {mutations} mutations each raise the expected violation",
        topics.len()
    ))
}

fn topic_counts() -> Outcome {
    let w = common::world();
    let strategy = w.config.topic_strategy();
    let running = w.investigator.topics().map_err(|e| e.to_string())?.len();
    ensure(running == 7, || format!("running example gives {running} topics"))?;
    let two = parse_policy(
        "highVariety(x) <- woman(director(x)), independent(type(x)), action(genre(x)).\n\
         lowVariety(x) <- woman(director(x)), action(genre(x)).\n",
    )
    .map_err(|e| e.to_string())?;
    let synthetic = generate_topics(&two, &strategy).map_err(|e| e.to_string())?.len();
    ensure(synthetic == 10, || {
        format!("two-clause policy gives {synthetic} topics")
    })?;
    Ok("running example: 7 topics; two clauses with bodies of 2 and 3 atoms: 10 topics".into())
}

fn logic_engine() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let start = Instant::now();
    let mut inconsistent = 0;
    for i in 0..100 {
        let p = common::random_program(&mut rng, 8, 12);
        let minimal = common::brute_minimal_models(&p);
        ensure(minimal.len() == 1, || {
            format!("program {i}: {} minimal models", minimal.len())
        })?;
        let lm = least_model(&p);
        ensure(lm == minimal[0], || {
            format!("program {i}: least model {lm:?}, brute force {:?}", minimal[0])
        })?;
        let language: Vec<Atom> = p.language().iter().cloned().collect();
        let extra: Vec<Atom> = match language.is_empty() {
            true => Vec::new(),
            false => (0..rng.gen_range(0..=2))
                .map(|_| language.choose(&mut rng).unwrap().clone())
                .collect(),
        };
        let got = is_consistent(&p, &extra);
        ensure(got == common::brute_consistent(&p, &extra), || {
            format!("program {i}: is_consistent {got}")
        })?;
        inconsistent += usize::from(!got);
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(10), "100 programs")?;
    Ok(format!(
        "100 programs: least model and consistency agree with brute force ({inconsistent} inconsistent; {elapsed:.1?})"
    ))
}

fn run_audit(out: &std::path::Path) -> Result<Duration, String> {
    let f = |n: &str| common::fixture(n).to_str().unwrap().to_owned();
    let args = [
        "argaudit".to_owned(),
        "audit".into(),
        "--policy".into(),
        f("policy.pol"),
        "--movies".into(),
        f("movies.csv"),
        "--ratings".into(),
        f("ratings.csv"),
        "--config".into(),
        f("audit.conf"),
        "--out".into(),
        out.to_str().unwrap().to_owned(),
    ];
    let (mut stdout, mut stderr) = (Vec::new(), Vec::new());
    let start = Instant::now();
    let code = cli::run(args, &mut stdout, &mut stderr);
    let elapsed = start.elapsed();
    ensure(code == 0, || {
        format!("audit exited {code}: {}", String::from_utf8_lossy(&stderr))
    })?;
    Ok(elapsed)
}

fn dir_contents(dir: &std::path::Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| e.to_string())? {
        let entry = entry.map_err(|e| e.to_string())?;
        let name = entry.file_name().to_string_lossy().into_owned();
        files.push((name, fs::read(entry.path()).map_err(|e| e.to_string())?));
    }
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let golden = dir_contents(&common::fixture("golden"))?;
    let scratch = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut slowest = Duration::ZERO;
    for run in 1..=3 {
        let out = scratch.path().join(format!("run{run}"));
        let elapsed = run_audit(&out)?;
        within(elapsed, Duration::from_secs(10), &format!("run {run}"))?;
        slowest = slowest.max(elapsed);
        let produced = dir_contents(&out)?;
        let names = |v: &[(String, Vec<u8>)]| v.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>();
        ensure(names(&produced) == names(&golden), || {
            format!("run {run} wrote {:?}", names(&produced))
        })?;
        for ((name, a), (_, b)) in produced.iter().zip(&golden) {
            ensure(a == b, || format!("run {run}: {name} differs from the golden copy"))?;
        }
    }
    Ok(format!(
        "3 runs byte-identical to the {} golden files (slowest {slowest:.1?})",
        golden.len()
    ))
}

fn witness_pairs(report: &serde_json::Value) -> Vec<(u64, u64)> {
    report["non_monotonicity"]["input_refinement_mode"]
        .as_array()
        .map(|pairs| {
            pairs
                .iter()
                .filter_map(|p| Some((p["smaller"]["topic"].as_u64()?, p["larger"]["topic"].as_u64()?)))
                .collect()
        })
        .unwrap_or_default()
}

fn refinement_witness() -> Outcome {
    let scratch = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_audit(scratch.path())?;
    let parse = |text: String| serde_json::from_str::<serde_json::Value>(&text).map_err(|e| e.to_string());
    let fresh = parse(fs::read_to_string(scratch.path().join("report.json")).map_err(|e| e.to_string())?)?;
    let golden = parse(common::read_fixture("golden/report.json"))?;
    let oracle = parse(common::read_fixture("expected.json"))?;
    let got = witness_pairs(&fresh);
    ensure(!got.is_empty(), || "no input-refinement witness".into())?;
    ensure(got == witness_pairs(&golden), || {
        format!("witnesses {got:?} differ from the golden report")
    })?;
    let independent: Vec<(u64, u64)> = oracle["input_refinement_mode"]
        .as_array()
        .into_iter()
        .flatten()
        .filter_map(|p| Some((p[0].as_u64()?, p[1].as_u64()?)))
        .collect();
    ensure(got == independent, || {
        format!("witnesses {got:?}, independent oracle {independent:?}")
    })?;
    let first = &fresh["non_monotonicity"]["input_refinement_mode"][0];
    Ok(format!(
        "{} input-refinement witnesses, as in the golden report and the oracle; e.g. topic {} {} refines topic {} {}",
        got.len(),
        first["smaller"]["topic"],
        first["smaller"]["status"].as_str().unwrap_or("?"),
        first["larger"]["topic"],
        first["larger"]["status"].as_str().unwrap_or("?"),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("golden AF", golden_af),
        ("oracle equivalence", oracle_equivalence),
        ("symmetric AF property", symmetric_property),
        ("dialogue protocol", dialogue_protocol),
        ("topic generation count", topic_counts),
        ("logic engine", logic_engine),
        ("end-to-end determinism", determinism),
        ("non-monotonicity witness", refinement_witness),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
