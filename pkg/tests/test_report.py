import re

import pytest

from adascale.errors import ArgumentError
from adascale.metrics import MetricCell
from adascale.report import ExperimentReport, render_report


def _report():
    r = ExperimentReport("demo", ("No", "AS"), ("Lasso", "SCAD"), ("rpe",))
    r.cells[("No", "Lasso", "rpe")] = MetricCell(1.23456, 0.1, 3)
    r.cells[("No", "SCAD", "rpe")] = MetricCell(1.5, 0.25, 3)
    r.cells[("AS", "Lasso", "rpe")] = MetricCell(1.1, 0.05, 3)
    r.skips[("AS", "SCAD")] = "did not converge"
    return r


def test_one_by_one_markdown():
    r = ExperimentReport("x", ("No",), ("Lasso",), ("rpe",))
    r.cells[("No", "Lasso", "rpe")] = MetricCell(1.0, 0.0, 1)
    md = render_report(r)
    mean_block = md.split("## rpe (mean)")[1].split("##")[0]
    rows = [ln for ln in mean_block.splitlines() if ln.startswith("| ")]
    assert rows == ["| scaler | Lasso |", "| No | 1.0000 |"]


def test_csv_and_markdown_share_numbers():
    r = _report()
    nums = lambda text: sorted(re.findall(r"\d+\.\d{4}", text))
    assert nums(render_report(r, "markdown")) == nums(render_report(r, "csv"))


def test_slash_exactly_for_skips():
    r = _report()
    md = render_report(r)
    assert md.count("| / |") == 2  # mean and sd tables
    assert "| AS | 1.1000 | / |" in md
    assert "did not converge" in md
    assert "AS,/" not in render_report(r, "csv").replace("1.1000,/", "")


def test_four_decimals():
    assert "1.2346" in render_report(_report())


def test_unknown_format():
    with pytest.raises(ArgumentError):
        render_report(_report(), "html")


def test_completeness_invariant():
    r = _report()
    assert r.is_complete()
    del r.skips[("AS", "SCAD")]
    assert not r.is_complete()
