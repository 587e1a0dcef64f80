"""The ten acceptance criteria at their stated tolerances and runtime budgets."""

import pytest

from frachaos import acceptance, cli


@pytest.mark.parametrize("check", acceptance.CRITERIA, ids=[c.__name__ for c in acceptance.CRITERIA])
def test_criterion(check):
    result = check(0)
    print()
    print(result.line())
    assert result.passed, result.line()
    assert result.seconds <= result.budget, f"runtime {result.seconds:.1f}s exceeds {result.budget:.0f}s"


def test_validate_command(tmp_path):
    cfg = tmp_path / "v.cfg"
    cfg.write_text("hurst = 0.3\n")
    assert cli.main(["validate", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    summary = (tmp_path / "validation.txt").read_text().splitlines()
    assert summary[:2] == ["verdict: pass", "passed: 10/10"]
    wick = [line for line in summary if "Wick exponential" in line][0]
    assert wick.startswith("[PASS]")
