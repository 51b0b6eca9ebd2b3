#!/usr/bin/env python3
# Copyright 2026 The Sketchguess Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates the bundled lexicon, corpora and raw test fixture.

Output is deterministic; rerunning must leave the tree unchanged.
"""

import json
import math
import os
import random

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
LEX = os.path.join(ROOT, "data", "lexicon")
CORPUS = os.path.join(ROOT, "data", "corpus")
FIXTURES = os.path.join(ROOT, "tests", "fixtures")

# child, parent
TAXONOMY = [
    ("organism", "entity"), ("animal", "organism"), ("mammal", "animal"),
    ("feline", "mammal"), ("cat", "feline"), ("lion", "feline"), ("tiger", "feline"),
    ("kitten", "cat"), ("canine", "mammal"), ("dog", "canine"), ("puppy", "dog"),
    ("wolf", "canine"), ("ungulate", "mammal"), ("giraffe", "ungulate"),
    ("horse", "ungulate"), ("cow", "ungulate"), ("sheep", "ungulate"),
    ("rodent", "mammal"), ("mouse", "rodent"), ("rabbit", "mammal"),
    ("elephant", "mammal"), ("bird", "animal"), ("fish", "animal"), ("snake", "animal"),
    ("person", "organism"), ("man", "person"), ("woman", "person"),
    ("plant", "organism"), ("tree", "plant"), ("flower", "plant"),
    ("artifact", "entity"), ("weapon", "artifact"), ("gun", "weapon"),
    ("firearm", "gun"), ("revolver", "firearm"), ("pistol", "firearm"),
    ("rifle", "firearm"), ("sword", "weapon"), ("knife", "weapon"),
    ("structure", "artifact"), ("building", "structure"), ("house", "building"),
    ("hut", "building"), ("castle", "building"), ("tower", "structure"),
    ("vehicle", "artifact"), ("bicycle", "vehicle"), ("car", "vehicle"),
    ("truck", "vehicle"), ("aircraft", "vehicle"), ("airplane", "aircraft"),
    ("jet", "airplane"), ("helicopter", "aircraft"),
    ("container", "artifact"), ("box", "container"), ("pot", "container"),
    ("cup", "container"), ("furniture", "artifact"), ("table", "furniture"),
    ("chair", "furniture"), ("glasses", "artifact"), ("hat", "artifact"),
    ("ball", "artifact"), ("phenomenon", "entity"), ("rainbow", "phenomenon"),
    ("cloud", "phenomenon"), ("material", "entity"), ("gold", "material"),
    ("shape", "entity"), ("circle", "shape"), ("line", "shape"), ("arc", "shape"),
    ("square", "shape"), ("triangle", "shape"), ("part", "entity"), ("face", "part"),
    ("head", "part"), ("neck", "part"), ("wheel", "part"), ("door", "part"),
    ("window", "part"), ("roof", "part"), ("end", "part"), ("sky", "entity"),
    ("sun", "entity"), ("star", "entity"), ("moon", "entity"),
]

SYNSETS = [
    ["house", "home"], ["bicycle", "bike"], ["airplane", "plane", "aeroplane"],
    ["revolver", "six-shooter"], ["kitten", "kitty"], ["dog", "hound"],
    ["rabbit", "bunny"], ["car", "automobile"], ["cup", "mug"],
]

OTHER_WORDS = [
    "a", "an", "the", "of", "at", "is", "it", "its", "looks", "like", "big", "small", "red",
    "little", "cute", "flying", "maybe", "kind", "i", "think", "with", "and", "on", "in",
    "two", "long", "tall", "green", "blue", "yellow", "running", "some", "sort", "or",
]

PLURAL_EXCEPTIONS = {"mouse": "mice", "sheep": "sheep", "fish": "fish", "man": "men",
                     "woman": "women", "knife": "knives", "glasses": "glasses"}


def nouns():
    seen = []
    for child, parent in TAXONOMY:
        for w in (child, parent):
            if w not in seen:
                seen.append(w)
    for s in SYNSETS:
        for w in s:
            if w not in seen:
                seen.append(w)
    return seen


def plural(word):
    if word in PLURAL_EXCEPTIONS:
        return PLURAL_EXCEPTIONS[word]
    if word.endswith(("s", "x", "ch", "sh")):
        return word + "es"
    if word.endswith("y") and word[-2] not in "aeiou":
        return word[:-1] + "ies"
    return word + "s"


def write(path, text):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", newline="\n") as f:
        f.write(text)


def write_lexicon():
    ns = nouns()
    vocab = sorted(set(ns + OTHER_WORDS))
    write(os.path.join(LEX, "words.txt"), "".join(w + "\n" for w in vocab))
    pos = [(w, "NOUN") for w in ns] + [(w, "OTHER") for w in OTHER_WORDS]
    write(os.path.join(LEX, "pos.tsv"), "".join(f"{w}\t{t}\n" for w, t in sorted(pos)))
    write(os.path.join(LEX, "plurals.tsv"),
          "".join(f"{w}\t{plural(w)}\n" for w in sorted(ns) if plural(w) != w))
    write(os.path.join(LEX, "synsets.tsv"), "".join("\t".join(s) + "\n" for s in SYNSETS))
    write(os.path.join(LEX, "taxonomy.tsv"), "".join(f"{c}\t{p}\n" for c, p in TAXONOMY))

    rng = random.Random(16)
    emb_words = sorted(w for w in ns if w != "entity")
    lines = [f"{len(emb_words)} 16 1\n"]
    for w in emb_words:
        v = [rng.gauss(0.0, 1.0) for _ in range(16)]
        lines.append(w + " " + " ".join(repr(round(x, 6)) for x in v) + "\n")
    write(os.path.join(LEX, "embeddings.txt"), "".join(lines))


def record_line(rid, category, subject, strokes, guesses):
    obj = {"id": rid, "category": category, "subject": subject,
           "strokes": strokes, "guesses": guesses}
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def pt(x, y):
    return [round(min(max(x, 0.0), 1.0), 4), round(min(max(y, 0.0), 1.0), 4)]


def scribble(rng, x0, y0, size=0.12, n=4):
    return [pt(x0 + rng.uniform(0, size), y0 + rng.uniform(0, size)) for _ in range(n)]


def random_strokes(rng, n):
    out = []
    for _ in range(n):
        x, y = rng.uniform(0.1, 0.8), rng.uniform(0.1, 0.8)
        out.append([pt(x + rng.uniform(-0.1, 0.2), y + rng.uniform(-0.1, 0.2))
                    for _ in range(rng.randint(2, 5))])
    return out


# Large first strokes crossing the centre; each category has its own shape.
def key_stroke(category, rng):
    j = lambda: rng.uniform(-0.02, 0.02)
    if category == "cat":
        return [pt(0.2 + j(), 0.5 + j()), pt(0.5, 0.5 + j()), pt(0.8 + j(), 0.5 + j())]
    if category == "dog":
        return [pt(0.5 + j(), 0.2 + j()), pt(0.5 + j(), 0.5), pt(0.5 + j(), 0.8 + j())]
    if category == "house":
        return [pt(0.2 + j(), 0.8 + j()), pt(0.5, 0.5), pt(0.8 + j(), 0.2 + j())]
    if category == "bicycle":
        return [pt(0.2 + j(), 0.2 + j()), pt(0.5, 0.5), pt(0.8 + j(), 0.8 + j())]
    c = 0.5 + j()
    return [pt(c + 0.25 * math.cos(a * math.pi / 4), c + 0.25 * math.sin(a * math.pi / 4))
            for a in range(9)]


DETAIL_REGION = {"cat": (0.75, 0.75), "dog": (0.75, 0.05), "house": (0.05, 0.75),
                 "bicycle": (0.4, 0.05), "airplane": (0.05, 0.4)}
FIRST_GUESS = {"cat": "rabbit", "dog": "horse", "house": "box", "bicycle": "glasses",
               "airplane": "bird"}


def write_separable(name="separable", seed=20, prefix="sep"):
    rng = random.Random(seed)
    lines = []
    transitions = [2, 3, 4, 3]
    n = 6
    for category in ["airplane", "bicycle", "cat", "dog", "house"]:
        for v, g in enumerate(transitions):
            strokes = []
            for _ in range(g - 1):
                strokes.append(scribble(rng, 0.02, 0.02, size=0.1, n=3))
            strokes.append(key_stroke(category, rng))
            rx, ry = DETAIL_REGION[category]
            while len(strokes) < n:
                strokes.append(scribble(rng, rx + rng.uniform(0, 0.05), ry + rng.uniform(0, 0.05),
                                        size=0.15, n=3))
            guesses = [""] * (g - 1) + [FIRST_GUESS[category]] + [category] * (n - g)
            lines.append(record_line(f"{prefix}-{category}-{v}", category, f"u{v}", strokes,
                                     guesses))
    write(os.path.join(CORPUS, f"{name}.jsonl"), "".join(lines))


MINI_CATEGORIES = ["airplane", "bicycle", "cat", "dog", "giraffe", "house", "rainbow",
                   "revolver"]
CONFUSERS = {"airplane": ["bird", "jet", "helicopter"], "bicycle": ["glasses", "wheel", "car"],
             "cat": ["rabbit", "mouse", "tiger"], "dog": ["horse", "wolf", "cow"],
             "giraffe": ["tree", "horse", "neck"], "house": ["box", "hut", "castle"],
             "rainbow": ["arc", "cloud", "sun"], "revolver": ["pistol", "gun", "rifle"]}


def write_mini():
    rng = random.Random(40)
    # Unique-guess counts for the 20 sequences with guesses: 10 x 1, 4 x 2,
    # 3 x 3, 3 x 4; the other 20 never elicit a guess.
    uniques = [1] * 10 + [2] * 4 + [3] * 3 + [4] * 3 + [0] * 20
    rng.shuffle(uniques)
    lines = []
    for i, u in enumerate(uniques):
        category = MINI_CATEGORIES[i % 8]
        n = rng.randint(max(u, 1) + 2, 9)
        strokes = random_strokes(rng, n)
        if u == 0:
            guesses = [""] * n
        else:
            words = CONFUSERS[category][: u - 1] + [category]
            first = rng.randint(1, n - u + 1)
            guesses = [""] * (first - 1)
            for w in words:
                guesses.append(w)
            while len(guesses) < n:
                guesses.append(guesses[-1])
        lines.append(record_line(f"mini-{i:02d}", category, f"subj{i % 5}", strokes, guesses))
    write(os.path.join(CORPUS, "mini.jsonl"), "".join(lines))


RAW_GUESSES = [
    "Girafe", "A BIG cat", "pot of gold at end of rainbow", "  ", "kitty cat", "revolvr",
    "its a house", "firearm", "Dog", "horse", "Plane", "bicycel", "caz", "the sun", "RAINBOW",
    "some kind of tree", "xylophonist", "glases", "a little puppy", "two wheels", "bunny",
    "flying bird", "maybe a gun", "Castle", "house", "hosue", "airplan", "big red arc",
    "cute kitten", "snak", "qqq", "is it a box",
]


def write_raw_fixture():
    rng = random.Random(30)
    lines = []
    for i in range(30):
        category = MINI_CATEGORIES[i % 8]
        n = rng.randint(2, 7)
        strokes = random_strokes(rng, n)
        if i % 10 == 9:
            guesses = [rng.choice(["", "  "]) for _ in range(n)]
        else:
            guesses = []
            for _ in range(n):
                guesses.append(rng.choice(RAW_GUESSES) if rng.random() < 0.45 else "")
            if all(g.strip() == "" for g in guesses):
                guesses[-1] = category
        lines.append(record_line(f"raw-{i:02d}", category, f"s{i % 4}", strokes, guesses))
    write(os.path.join(FIXTURES, "raw30.jsonl"), "".join(lines))


if __name__ == "__main__":
    write_lexicon()
    write_separable()
    # Same construction, fresh draws: held out from every training run.
    write_separable("separable-holdout", 21, "hold")
    write_mini()
    write_raw_fixture()
