#!/usr/bin/env python3
# Copyright 2023 Canonical Ltd.
# See LICENSE file for licensing details.

import json
import os
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import List, Optional

import numpy as np

from cli import main

TRAIN_ENV = "CLICKBAIT17_TRAIN"
VALIDATION_ENV = "CLICKBAIT17_VALIDATION"

CLICKBAIT_OPENERS = [
    "You won't believe",
    "This is why",
    "Here's what happens when",
    "Nobody expected",
    "What this",
]
CLICKBAIT_ENDINGS = ["did next", "is going viral...", "will shock you!", "#amazing", "?"]
NEWS_OPENERS = ["Council approves", "Police arrest", "Minister announces", "Court rejects"]
NEWS_ENDINGS = ["after long debate", "in the city centre", "on Monday", ": report"]
SUBJECTS = ["dog", "budget", "nurse", "storm", "bakery", "senator", "band", "river", "train"]
CHALLENGE_FORMAT = "%a %b %d %H:%M:%S %z %Y"


def corpus_dir(variable: str) -> Optional[Path]:
    """Directory named by an environment variable, when it holds a challenge corpus."""
    value = os.environ.get(variable)
    if not value:
        return None
    path = Path(value)
    if not (path / "instances.jsonl").exists() or not (path / "truth.jsonl").exists():
        return None
    return path


def write_corpus(directory: Path, posts: int = 120, seed: int = 0) -> None:
    """Writes a labeled corpus in the challenge layout, with image text sidecars.

    Absences vary across posts: some have no image, no keywords, no captions or an empty
    description, so every sentinel path of the catalog is exercised.
    """
    rng = np.random.default_rng(seed)
    start = datetime(2017, 3, 1, 6, 0, tzinfo=timezone.utc)
    (directory / "media").mkdir(parents=True, exist_ok=True)

    instances, truth = [], []
    for index in range(posts):
        clickbait = bool(rng.random() < 0.3)
        subject = SUBJECTS[int(rng.integers(len(SUBJECTS)))]
        if clickbait:
            title = f"{rng.choice(CLICKBAIT_OPENERS)} {subject} {rng.choice(CLICKBAIT_ENDINGS)}"
        else:
            title = f"{rng.choice(NEWS_OPENERS)} {subject} plan {rng.choice(NEWS_ENDINGS)}"
        record = {
            "id": str(800000 + index),
            "postText": [title],
            "postTimestamp": (start + timedelta(minutes=97 * index)).strftime(CHALLENGE_FORMAT),
            "postMedia": [],
            "targetTitle": f"The {subject} story everyone is talking about",
            "targetDescription": "" if index % 7 == 0 else f"Details on the {subject}.",
            "targetKeywords": "" if index % 5 == 0 else f"{subject}, local, news",
            "targetParagraphs": _paragraphs(subject, int(rng.integers(0, 6))),
            "targetCaptions": [] if index % 3 else [f"A photo of the {subject}"],
        }
        if index % 4 == 0:
            image = f"media/photo_{index}.jpg"
            record["postMedia"] = [image]
            if index % 8 == 0:
                (directory / f"{image}.txt").write_text(f"WOW {subject.upper()} 100%")
        instances.append(record)
        label = "clickbait" if clickbait else "no-clickbait"
        truth.append({"id": record["id"], "truthClass": label})

    _write_lines(directory / "instances.jsonl", instances)
    _write_lines(directory / "truth.jsonl", truth)


def _paragraphs(subject: str, count: int) -> List[str]:
    return [f"Paragraph {number} about the {subject}, with facts." for number in range(count)]


def _write_lines(path: Path, records: List[dict]) -> None:
    with open(path, "w", encoding="utf-8") as file:
        for record in records:
            file.write(json.dumps(record) + "\n")


def run(command: str, out: Path, *flags: str) -> int:
    """Runs one CLI stage against an output directory."""
    return main([command, "--out", str(out), "--log-level", "WARNING", *flags])


def run_pipeline(corpus: Path, out: Path, *flags: str) -> None:
    """Runs every stage on a labeled corpus, asserting that each one succeeds."""
    inputs = [
        "--instances",
        str(corpus / "instances.jsonl"),
        "--truth",
        str(corpus / "truth.jsonl"),
    ]
    stages = [
        ("extract", inputs),
        ("rank", []),
        ("train", ["--features", "top:10"]),
        ("predict", []),
        ("evaluate", ["--features", "top:10"]),
        ("stats", inputs),
        ("compare", []),
    ]
    for command, stage_flags in stages:
        assert run(command, out, *stage_flags, *flags) == 0, f"{command} failed"
