import json
import os
import subprocess
import sys

SCRIPTS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "scripts")


def run(name, *args):
    return subprocess.run(
        [sys.executable, os.path.join(SCRIPTS, name), *args],
        capture_output=True, text=True, check=True, timeout=300,
    ).stdout


def test_worked_example():
    out = run("worked_example.py", "--dot")
    assert "leaf [0.0, 4.0, 5.0]" in out and "leaf [9.0, 13.0]" in out
    assert "deviation sum 4.1602" in out and "digraph stree" in out


def test_text_clusters():
    out = run("text_clusters.py")
    assert out.count("cluster ") >= 2
    assert "0.0000  The goalkeeper" in out


def test_scale_smoke_small():
    out = json.loads(run("scale_smoke.py", "--n", "500", "--json"))
    assert out["n"] == 500 and out["height"] >= 1
