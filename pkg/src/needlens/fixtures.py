"""Seeded synthetic fixtures: a 50-document demo dataset and a survey-scale
dataset (1,045 users, 3,812 documents over the four waves)."""

from __future__ import annotations

import json
import random
from pathlib import Path

from .waves import WAVES

_WIRE = {"M3": "3m", "M6": "6m", "M12": "12m", "M24": "24m"}

# theme -> phrase fragments built around the seed-lexicon trigger keywords
THEMES = {
    "food": [
        "struggling to buy food and groceries this week",
        "food shopping and supplies were hard to find",
        "meals and food delivery slots kept disappearing",
        "worried about food supplies and empty shelves",
    ],
    "mental": [
        "feeling anxious and stressed most days",
        "my anxiety and stress levels keep rising",
        "feeling lonely and the isolation makes depression worse",
        "mental health is suffering and counselling waiting lists are long",
        "stressed and depressed about everything lately",
    ],
    "work": [
        "worried about my job and lost income",
        "work dried up and the furlough money barely covers rent",
        "employment feels uncertain and money is tight",
        "my business closed and redundancy looms",
    ],
    "exercise": [
        "started walking and running outdoors for fitness",
        "missing the gym but keeping up exercise at home",
        "daily exercise and outdoor activity keeps me sane",
        "fitness classes moved online and walking helps",
    ],
    "social": [
        "missing family and friends and social contact",
        "video meeting with family keeps the community feeling alive",
        "grateful for friends checking in and neighbourly visits",
        "happy to see family again after months apart",
    ],
    "health": [
        "cannot get a gp appointment for my medication",
        "hospital treatment was cancelled and medicine ran short",
        "the doctor postponed my appointment again",
        "waiting for nhs treatment and repeat medication",
    ],
}


def _make_users(rng: random.Random, n_users: int) -> list[dict]:
    users = []
    for i in range(n_users):
        age = rng.randint(18, 85)
        gender = rng.choices(["female", "male", ""], weights=[48, 48, 4])[0]
        imd = rng.choice([""] + [str(d) for d in range(1, 11)])
        users.append({"user_id": f"p{i + 1:04d}", "age": str(age), "gender": gender, "imd_decile": imd})
    return users


def _registry_csv(users: list[dict]) -> str:
    lines = ["user_id,age,gender,imd_decile"]
    for u in users:
        lines.append(f"{u['user_id']},{u['age']},{u['gender']},{u['imd_decile']}")
    return "\n".join(lines) + "\n"


def _make_doc(rng: random.Random, wave: str) -> str:
    # wave-dependent theme mix loosely tracks the shift from supply and
    # anxiety concerns toward work, social and fitness topics
    weights = {
        "M3": {"food": 4, "mental": 4, "health": 2, "work": 1, "exercise": 1, "social": 1},
        "M6": {"food": 2, "mental": 3, "health": 2, "work": 4, "exercise": 2, "social": 2},
        "M12": {"food": 1, "mental": 3, "health": 2, "work": 2, "exercise": 3, "social": 3},
        "M24": {"food": 1, "mental": 2, "health": 2, "work": 1, "exercise": 3, "social": 4},
    }[wave]
    themes = list(weights)
    n_sentences = rng.randint(1, 3)
    parts = []
    for _ in range(n_sentences):
        theme = rng.choices(themes, weights=[weights[t] for t in themes])[0]
        parts.append(rng.choice(THEMES[theme]))
    return ". ".join(p.capitalize() for p in parts) + "."


def _write_dataset(out_dir: Path, users: list[dict], docs: list[dict]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "registry.csv").write_text(_registry_csv(users), encoding="utf-8")
    with open(out_dir / "feedback.jsonl", "w", encoding="utf-8") as fh:
        for d in docs:
            fh.write(json.dumps(d, sort_keys=True) + "\n")


def make_demo(out_dir, seed: int = 0, n_users: int = 20, n_docs: int = 50) -> tuple[int, int]:
    """Small end-to-end fixture used by the demo command and the tests."""
    rng = random.Random(seed)
    users = _make_users(rng, n_users)
    docs = []
    for i in range(n_docs):
        user = rng.choice(users)
        wave = rng.choice(WAVES)
        docs.append(
            {
                "doc_id": f"demo{i + 1:04d}",
                "user_id": user["user_id"],
                "wave": _WIRE[wave],
                "text": _make_doc(rng, wave),
            }
        )
    _write_dataset(Path(out_dir), users, docs)
    return len(users), len(docs)


def make_scale(out_dir, seed: int = 0, n_users: int = 1045, n_docs: int = 3812) -> tuple[int, int]:
    """Survey-scale fixture: each user answers at up to four follow-up
    points; documents are trimmed to exactly n_docs."""
    rng = random.Random(seed)
    users = _make_users(rng, n_users)
    pairs = [(u, w) for u in users for w in WAVES]
    rng.shuffle(pairs)
    pairs = pairs[:n_docs]
    docs = []
    for i, (user, wave) in enumerate(pairs):
        docs.append(
            {
                "doc_id": f"s{i + 1:05d}",
                "user_id": user["user_id"],
                "wave": _WIRE[wave],
                "text": _make_doc(rng, wave),
            }
        )
    _write_dataset(Path(out_dir), users, docs)
    return len(users), len(docs)
