#!/usr/bin/env python3
"""Writes the audit fixture (movies.csv, ratings.csv) deterministically.

The catalog is built in three tiers so that the recommender's output
variety is predictable from a query's keywords:

* ids 21-30, top rated, genre-diverse, keyword "spectacle". A query
  sharing that keyword gets nine of them back: highVariety.
* ids 1-10, mid rated, five genres between them, keywords "hometown" and
  "ensemble". Queries tagged "ensemble" see only 28-30 from the top tier
  (which also carry "ensemble"), so they get those three plus seven
  mid-tier films: mediumVariety.
* ids 11-20, lowest rated, keyword "hometown". These queries see the
  mid tier plus the lowest-id top-tier film (a drama): lowVariety.

Films 11 and 12 are directed by women and share five private keywords
(cosine 5/6), but 11 is tagged "hometown" (low) and 12 "ensemble"
(medium), so a user who rated both yields mutually attacking arguments.
Film 22, also by a woman, is top tier (high). Together they give the
woman-director topic exactly 10 sampled inputs.

The result is checked against oracle.py before anything is written.

usage: make_fixture.py <fixture dir>
"""

import csv
import os
import random
import shutil
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
import oracle  # noqa: E402

SEED = 7
NUM_USERS = 12

TOP_GENRES = {
    21: ["Drama"],
    22: ["Action", "Adventure"],
    23: ["Animation", "Family"],
    24: ["Crime", "Thriller"],
    25: ["Documentary"],
    26: ["Fantasy", "Horror"],
    27: ["History", "War"],
    28: ["Mystery"],
    29: ["Science Fiction"],
    30: ["Western"],
}
MID_GENRES = ["Drama", "Romance", "Comedy", "Family", "Music"]
LOW_GENRES = ["Action", "Comedy", "Horror", "Thriller", "Crime", "Drama"]
PRIVATE = ["lighthouse", "fog", "letters", "grief", "sisters"]

WOMEN = {11, 12, 22}
INDEPENDENT = {3, 15, 22, 23}
ACTION_LOW = {12, 15, 16}

ADJECTIVES = ["Quiet", "Last", "Silver", "Broken", "Hidden", "Long", "Red", "Northern", "Paper", "Iron"]
NOUNS = ["Harbor", "Signal", "Orchard", "Engine", "Lantern", "Frontier", "Garden", "Tide", "Bridge", "Crown"]


def build(rng):
    titles = [f"The {a} {n}" for a in ADJECTIVES for n in NOUNS]
    rng.shuffle(titles)
    movies = []
    for mid in range(1, 31):
        if mid <= 10:
            genres = [MID_GENRES[(mid - 1) % 5]]
            keywords = ["hometown", "ensemble"]
        elif mid <= 20:
            genres = [rng.choice(LOW_GENRES)]
            if mid in ACTION_LOW:
                genres = sorted(set(genres) | {"Action"})
            keywords = ["hometown"]
            if mid == 11:
                keywords = ["hometown"] + PRIVATE
            elif mid == 12:
                keywords = ["ensemble"] + PRIVATE
        else:
            genres = TOP_GENRES[mid]
            keywords = ["spectacle"] + (["ensemble"] if mid >= 28 else [])
        if mid in WOMEN:
            gender = "F"
        else:
            gender = rng.choices("MU", weights=[5, 1])[0]
        movies.append({
            "movie_id": mid,
            "title": titles[mid - 1],
            "genres": "|".join(sorted(genres)),
            "keywords": "|".join(sorted(keywords)),
            "director_gender": gender,
            "production_type": "independent" if mid in INDEPENDENT else "studio",
        })

    raters = {}
    users = list(range(1, NUM_USERS + 1))
    # the conflicting pair: every rater of 12 also rated 11
    raters[11] = sorted(rng.sample(users, 5))
    raters[12] = sorted(rng.sample(raters[11], 3))
    raters[22] = sorted(rng.sample(users, 2))
    for mid in range(1, 31):
        if mid not in raters:
            raters[mid] = sorted(rng.sample(users, rng.randint(2, 6)))

    ratings = []
    for mid in range(1, 31):
        scale = [4.5, 5.0] if mid > 20 else [3.0, 3.5, 4.0] if mid <= 10 else [0.5, 1.0, 1.5, 2.0, 2.5]
        for user in raters[mid]:
            ratings.append({"user_id": user, "movie_id": mid, "rating": rng.choice(scale)})
    ratings.sort(key=lambda r: (r["user_id"], r["movie_id"]))
    return movies, ratings


def write(dirpath, movies, ratings):
    with open(os.path.join(dirpath, "movies.csv"), "w", newline="", encoding="utf-8") as f:
        w = csv.DictWriter(f, fieldnames=list(movies[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(movies)
    with open(os.path.join(dirpath, "ratings.csv"), "w", newline="", encoding="utf-8") as f:
        w = csv.DictWriter(f, fieldnames=["user_id", "movie_id", "rating"], lineterminator="\n")
        w.writeheader()
        for r in ratings:
            w.writerow({**r, "rating": f"{r['rating']:.1f}"})


def check(result):
    by_label = {t["label"]: t for t in result["topics"]}
    women = by_label["(woman(director(x)), V)"]
    assert women["num_arguments"] == 10, women
    assert women["num_attacks"] > 0, women
    assert women["status"] == "credulous", women
    assert by_label["(woman(director(x)) & action(genre(x)), V)"]["status"] == "rejected"
    assert result["verdict"] == "mixed"
    assert result["input_refinement_mode"]
    assert {t["status"] for t in result["topics"]} == {"sceptical", "credulous", "rejected"}


def main():
    target = sys.argv[1]
    movies, ratings = build(random.Random(SEED))
    scratch = tempfile.mkdtemp()
    try:
        for name in ("policy.pol", "audit.conf"):
            shutil.copy(os.path.join(target, name), scratch)
        write(scratch, movies, ratings)
        result = oracle.audit(scratch)
    finally:
        shutil.rmtree(scratch)
    for t in result["topics"]:
        print(f"{t['status']:>9}  {t['num_arguments']:>3} args  {t['num_attacks']:>3} attacks  {t['label']}")
    print(result["verdict"])
    check(result)
    write(target, movies, ratings)


if __name__ == "__main__":
    main()
