import subprocess
import sys

import pytest

from fragpsm.cli import main
from fragpsm.harness import load_trace


def test_list_properties(capsys):
    assert main(["list-properties"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 20
    assert sum(ln.split("\t")[3] == "extension" for ln in lines) == 3


def test_unknown_property_is_usage_error(capsys):
    assert main(["verify", "--property", "NoSuchProp"]) == 2
    assert "unknown property" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["verify", "--model", "custom", "--all"],
    ["verify", "--toggle", "P3", "--property", "IntegrityFrameFrag"],
])
def test_toggle_misuse(argv):
    assert main(argv) == 2


def test_tiny_state_cap_is_reported(capsys):
    assert main(["verify", "--property", "IntegrityFrameFrag", "--state-cap", "10"]) == 2
    assert "resource limit" in capsys.readouterr().err


def test_verify_writes_replayable_trace(tmp_path, capsys):
    rc = main(["verify", "--property", "IntegritySequenceNumberFrag", "--depth", "14", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "Falsified\tdepth=14\tas expected" in out
    tf = load_trace(tmp_path / "IntegritySequenceNumberFrag.trace")
    tf.replay()
    assert (tmp_path / "verify.tsv").read_text().startswith("IntegritySequenceNumberFrag\tFalsified")


def test_custom_toggle_verifies(capsys):
    assert main(["verify", "--model", "custom", "--toggle", "P3", "--property",
                 "Integrity of Sequence Number for Fragmentation", "--depth", "10"]) == 0
    assert "VerifiedWithinBound" in capsys.readouterr().out


def test_scenario_writes_two_traces(tmp_path):
    assert main(["scenario", "queue_leak", "--out", str(tmp_path)]) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["queue_leak.P2.trace", "queue_leak.base.trace"]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "fragpsm", "list-properties"], capture_output=True, text=True)
    assert r.returncode == 0 and len(r.stdout.splitlines()) == 20
