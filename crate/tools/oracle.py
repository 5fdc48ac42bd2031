#!/usr/bin/env python3
"""Independent re-implementation of the audit pipeline over the fixture.

Shares no code with the Rust crate. Reads the fixture inputs and prints the
expected outcome per topic (status, argument count, extension count) plus the
verdict and the non-monotonicity witnesses as JSON.

Stable extensions are enumerated per connected component of the attack
graph by brute force, so every component must stay small.

usage: oracle.py <fixture dir> [--out expected.json]
"""

import argparse
import csv
import itertools
import json
import math
import os
import sys

POOL = 20
TOP = 10


def read_movies(path):
    movies = {}
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            mid = int(row["movie_id"])
            movies[mid] = {
                "id": mid,
                "title": row["title"],
                "genres": frozenset(g for g in row["genres"].split("|") if g),
                "keywords": frozenset(k for k in row["keywords"].split("|") if k),
                "director_gender": row["director_gender"],
                "production_type": row["production_type"],
            }
    return movies


def read_ratings(path):
    ratings = {}
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            ratings[(int(row["user_id"]), int(row["movie_id"]))] = float(row["rating"])
    return ratings


def split_top_level(text, sep):
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    return parts


def read_policy(path):
    text = ""
    with open(path, encoding="utf-8") as f:
        for line in f:
            text += line.split("%", 1)[0]
    text = "".join(text.split())
    clauses = []
    for raw in split_top_level(text, "."):
        if not raw:
            continue
        if "<-" in raw:
            head, body = raw.split("<-", 1)
            body_atoms = []
            for a in split_top_level(body, ","):
                if a not in body_atoms:
                    body_atoms.append(a)
        else:
            head, body_atoms = raw, []
        clauses.append((head, body_atoms))
    return clauses


def read_config(path):
    cfg = {"threshold": 0.8, "groups": {}, "bindings": {}, "high": 10, "low": 5, "cap": 5,
           "semantics": "stable", "mode": "group"}
    section = None
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("["):
                section = line[1:-1].strip()
                continue
            key, value = (s.strip() for s in line.split("=", 1))
            if section == "similarity" and key == "threshold":
                cfg["threshold"] = float(value)
            elif section == "similarity" and key == "kind":
                assert value == "keyword_cosine", "oracle supports keyword_cosine only"
            elif section == "descriptors":
                cfg["groups"][key] = value
            elif section == "bindings":
                cfg["bindings"]["".join(key.split())] = parse_predicate(value)
            elif section == "thresholds":
                cfg["high" if key == "high_min_genres" else "low"] = int(value)
            elif section == "sampling":
                cfg["cap"] = int(value)
            elif section == "semantics" and key == "default":
                cfg["semantics"] = value
            elif section == "topics":
                cfg["mode"] = value
    return cfg


def parse_predicate(text):
    for op in ("==", "contains"):
        if f" {op} " in f" {text} ":
            col, lit = text.split(op, 1)
            lit = lit.strip()
            assert lit.startswith('"') and lit.endswith('"')
            return (col.strip(), op, lit[1:-1])
    raise ValueError(text)


def predicate_holds(pred, movie):
    col, op, lit = pred
    if col in ("genres", "keywords"):
        values = movie[col]
        return lit in values if op == "contains" else values == frozenset([lit])
    scalar = str(movie["id"]) if col == "movie_id" else movie[col]
    return lit in scalar if op == "contains" else scalar == lit


def cosine(a, b):
    if not a or not b:
        return 0.0
    return len(a & b) / (math.sqrt(len(a)) * math.sqrt(len(b)))


def mean_rating(ratings, movie_id):
    values = [r for (u, m), r in sorted(ratings.items()) if m == movie_id]
    if not values:
        return 0.0
    total = 0.0
    for v in values:
        total += v
    return total / len(values)


def recommend(movies, ratings, movie_id):
    query = movies[movie_id]["keywords"]
    pool = sorted(
        (m for m in movies if m != movie_id),
        key=lambda m: (-cosine(query, movies[m]["keywords"]), m),
    )[:POOL]
    return sorted(pool, key=lambda m: (-mean_rating(ratings, m), m))[:TOP]


def describe(movies, output, high, low):
    genres = set()
    for m in output:
        genres |= movies[m]["genres"]
    n = len(genres)
    if n >= high:
        return "highVariety"
    if n <= low:
        return "lowVariety"
    return "mediumVariety"


def predicate_name(atom):
    neg = atom.startswith("~") or atom.startswith("-")
    core = atom.lstrip("~-")
    return neg, core.split("(", 1)[0]


def topics(clauses, cfg):
    out = []
    for head, body in clauses:
        descriptor = head if head in cfg["groups"] else next(
            d for d in sorted(cfg["groups"]) if predicate_name(d) == predicate_name(head))
        group = cfg["groups"][descriptor]
        if cfg["mode"] == "group":
            descs = frozenset(d for d, g in cfg["groups"].items() if g == group)
            dlabel = group
        else:
            descs = frozenset([descriptor])
            dlabel = descriptor
        subsets = [()] if not body else [
            c for k in range(1, len(body) + 1) for c in itertools.combinations(range(len(body)), k)]
        for s in subsets:
            atoms = [body[i] for i in s]
            preds = frozenset(cfg["bindings"][a] for a in atoms)
            label = " & ".join(atoms) if atoms else "all inputs"
            out.append({"label": f"({label}, {dlabel})", "preds": preds, "descs": descs})
    return out


def sample(movies, ratings, topic, cap):
    chosen = []
    by_movie = {}
    for (u, m) in ratings:
        if all(predicate_holds(p, movies[m]) for p in topic["preds"]):
            by_movie.setdefault(m, []).append(u)
    for m in sorted(by_movie):
        for u in sorted(by_movie[m])[:cap]:
            chosen.append((u, m))
    return chosen


def stable_by_components(args, attacks):
    """Per component, the list of stable extensions (as sets of indices)."""
    n = len(args)
    adj = {i: set() for i in range(n)}
    for a, b in attacks:
        adj[a].add(b)
        adj[b].add(a)
    seen, comps = set(), []
    for i in range(n):
        if i in seen:
            continue
        stack, comp = [i], []
        seen.add(i)
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        comps.append(sorted(comp))
    result = []
    for comp in comps:
        assert len(comp) <= 20, "component too large for brute force"
        exts = []
        for r in range(len(comp) + 1):
            for subset in itertools.combinations(comp, r):
                s = set(subset)
                if any((a, b) in attacks for a in s for b in s):
                    continue
                if all(any((a, b) in attacks for a in s) for b in comp if b not in s):
                    exts.append(s)
        result.append(exts)
    return result


def least_model(rules):
    model = set()
    changed = True
    while changed:
        changed = False
        for head, body in rules:
            if head not in model and all(b in model for b in body):
                model.add(head)
                changed = True
    return model


def complement(atom):
    return atom[1:] if atom.startswith("~") else "~" + atom


def consistent(clauses, descs):
    model = least_model(list(clauses) + [(d, []) for d in descs])
    return not any(complement(a) in model for a in model)


def audit(fixture_dir):
    movies = read_movies(os.path.join(fixture_dir, "movies.csv"))
    ratings = read_ratings(os.path.join(fixture_dir, "ratings.csv"))
    clauses = read_policy(os.path.join(fixture_dir, "policy.pol"))
    cfg = read_config(os.path.join(fixture_dir, "audit.conf"))
    assert cfg["semantics"] == "stable", "oracle implements stable semantics only"

    outputs = {}
    results = []
    for t in topics(clauses, cfg):
        inputs = sample(movies, ratings, t, cfg["cap"])
        args = []
        for (u, m) in inputs:
            if m not in outputs:
                outputs[m] = describe(movies, recommend(movies, ratings, m), cfg["high"], cfg["low"])
            if outputs[m] in t["descs"]:
                args.append((u, m, outputs[m]))
        attacks = set()
        for i, (u1, m1, c1) in enumerate(args):
            for j, (u2, m2, c2) in enumerate(args):
                similar = u1 == u2 and cosine(movies[m1]["keywords"], movies[m2]["keywords"]) >= cfg["threshold"]
                if similar and c1 != c2:
                    attacks.add((i, j))
        comps = stable_by_components(args, attacks)
        count = 1
        for exts in comps:
            count *= len(exts)
        if count == 0:
            union, inter = set(), set()
        else:
            union = {args[i][2] for exts in comps for e in exts for i in e}
            inter = set()
            for exts in comps:
                concl = [{args[i][2] for i in e} for e in exts]
                inter |= set.intersection(*concl) if concl else set()
        if count > 0 and t["descs"] <= inter:
            status = "sceptical"
        elif count > 0 and t["descs"] <= union:
            status = "credulous"
        else:
            status = "rejected"
        results.append({
            "label": t["label"],
            "status": status,
            "consistent": consistent(clauses, t["descs"]),
            "num_arguments": len(args),
            "num_attacks": len(attacks),
            "num_extensions": count,
            "preds": t["preds"],
            "descs": t["descs"],
        })

    flags = [(r["status"], r["consistent"]) for r in results]
    if all(c and s == "sceptical" for s, c in flags):
        verdict = "strong_belief"
    elif all(c and s != "rejected" for s, c in flags):
        verdict = "credulous_belief"
    elif all(c and s == "rejected" for s, c in flags):
        verdict = "strong_disbelief"
    else:
        verdict = "mixed"

    descriptor_mode, refinement_mode = [], []
    for i, a in enumerate(results):
        for j, b in enumerate(results):
            if a["status"] == b["status"]:
                continue
            if a["descs"] < b["descs"]:
                descriptor_mode.append([i + 1, j + 1])
            if a["descs"] == b["descs"] and a["preds"] > b["preds"]:
                refinement_mode.append([i + 1, j + 1])

    return {
        "verdict": verdict,
        "topics": [{k: v for k, v in r.items() if k not in ("preds", "descs")} for r in results],
        "descriptor_mode": descriptor_mode,
        "input_refinement_mode": refinement_mode,
        "recommendations": {
            str(m): {
                "movies": recommend(movies, ratings, m),
                "descriptor": describe(movies, recommend(movies, ratings, m), cfg["high"], cfg["low"]),
            }
            for m in sorted(movies)
        },
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("fixture_dir")
    parser.add_argument("--out")
    ns = parser.parse_args()
    text = json.dumps(audit(ns.fixture_dir), indent=2) + "\n"
    if ns.out:
        with open(ns.out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
