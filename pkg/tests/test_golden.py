"""Golden-file pins: one fixed CLI configuration per subcommand.

Each case reruns the exact invocation recorded in tests/golden/regenerate.py
and compares the output bytes against the committed files.  A mismatch means
the on-disk format, the draw order, or the numerics changed; regenerate only
after confirming the change is intentional.
"""

from pathlib import Path

import pytest

from blockspec.cli import run
from tests.golden.regenerate import CASES

GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.mark.parametrize("argv,outputs", CASES, ids=[c[0][0] for c in CASES])
def test_golden_output(tmp_path, monkeypatch, argv, outputs):
    monkeypatch.chdir(tmp_path)
    assert run(argv) == 0
    for name in outputs:
        produced = (tmp_path / name).read_bytes()
        expected = (GOLDEN_DIR / name).read_bytes()
        assert produced == expected, f"{name} deviates from golden copy"
