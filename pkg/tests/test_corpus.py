import json
import sys
from pathlib import Path

import pytest

from normsched.cli import main

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus" / "v1"
sys.path.insert(0, str(ROOT / "scripts"))
from build_corpus import build  # noqa: E402

MANIFEST = json.loads((CORPUS / "manifest.json").read_text())


@pytest.fixture(scope="module")
def rebuilt(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    build(out)
    return out


@pytest.mark.parametrize("name", sorted(p.name for p in CORPUS.iterdir()))
def test_regeneration_is_byte_identical(rebuilt, name):
    assert (rebuilt / name).read_bytes() == (CORPUS / name).read_bytes()


@pytest.mark.parametrize("entry", MANIFEST, ids=[e["name"] for e in MANIFEST])
def test_pipeline_verifies_and_lints_clean(entry, capsys):
    target = CORPUS / (f"{entry['name']}.solution.json" if "solve" in entry else f"{entry['name']}.json")
    assert main(["verify", "--schedule", str(target)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["feasible"]
    if "solve" in entry:
        assert main(["lint", "--schedule", str(target)]) == 0
        capsys.readouterr()
        if "exact_total" in entry:
            assert json.loads(target.read_text())["total"] == entry["exact_total"]
