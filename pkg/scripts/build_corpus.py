"""Regenerate the golden corpus under corpus/v1 from the CLI.

Run once and commit the output; tests/test_corpus.py replays every entry
and compares bytes.
"""

import json
import sys
from pathlib import Path

from normsched.cli import main

ROOT = Path(__file__).resolve().parent.parent / "corpus" / "v1"

ENTRIES = [
    {"name": "jp_0", "gen": ["--family", "jp", "--p", "0"], "solve": []},
    {"name": "jp_1", "gen": ["--family", "jp", "--p", "1"], "solve": ["--method", "grid", "--grid-k", "2"]},
    {"name": "random_5_2_42", "gen": ["--family", "random", "--n", "5", "--max-release", "2", "--seed", "42"],
     "solve": ["--method", "grid", "--grid-k", "2"], "exact_total": "15"},
    {"name": "random_4_1_1", "gen": ["--family", "random", "--n", "4", "--max-release", "1", "--seed", "1"],
     "solve": []},
    {"name": "random_4_1_3", "gen": ["--family", "random", "--n", "4", "--max-release", "1", "--seed", "3"],
     "solve": []},
    {"name": "pp_0", "gen": ["--family", "pp", "--p", "0"], "gantt": "txt"},
    {"name": "pp_1", "gen": ["--family", "pp", "--p", "1"], "gantt": "txt"},
    {"name": "pp_2", "gen": ["--family", "pp", "--p", "2"], "gantt": "svg"},
    {"name": "theorem_1_l8", "gen": ["--family", "theorem", "--p", "1", "--chain-length", "8"]},
]


def build(root: Path = ROOT) -> None:
    root.mkdir(parents=True, exist_ok=True)
    for e in ENTRIES:
        src = root / f"{e['name']}.json"
        assert main(["gen", *e["gen"], "-o", str(src)]) == 0
        if "solve" in e:
            assert main(["solve", "--input", str(src), *e["solve"], "-o", str(root / f"{e['name']}.solution.json")]) == 0
        if "gantt" in e:
            fmt = "ascii" if e["gantt"] == "txt" else "svg"
            assert main(["gantt", "--schedule", str(src), "--format", fmt,
                         "-o", str(root / f"{e['name']}.gantt.{e['gantt']}")]) == 0
    (root / "manifest.json").write_text(json.dumps(ENTRIES, indent=2) + "\n")


if __name__ == "__main__":
    build(Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT)
