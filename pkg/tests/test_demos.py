import py_compile
import subprocess
import sys
from pathlib import Path

import pytest

DEMOS = sorted((Path(__file__).resolve().parent.parent / "demos").glob("*.py"))


def test_demos_exist():
    assert len(DEMOS) == 5


@pytest.mark.parametrize("demo", DEMOS, ids=lambda p: p.name)
def test_demo_compiles(demo):
    py_compile.compile(str(demo), doraise=True)


def test_geometry_demo_runs():
    res = subprocess.run([sys.executable, str(DEMOS[0])],
                         capture_output=True, text=True, timeout=300)
    assert res.returncode == 0, res.stderr
    assert "boundary areas" in res.stdout
