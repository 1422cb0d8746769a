"""Tests for the sweep harness and figure rendering."""

import numpy as np
import pytest

from crowdagg import DataError
from crowdagg.figures import render_component_figure, render_sweep_figure
from crowdagg.simulate import random_planted_mixture
from crowdagg.sweep import SweepSpec, read_sweep_csv, run_cell, run_sweep, write_sweep_csv


@pytest.fixture(scope="module")
def truth():
    _, _, z, _ = random_planted_mixture(60, 3, 2, seed=0)
    return z


def tiny_spec(truth, **overrides):
    defaults = dict(
        truth=truth,
        models=("mv", "bnc"),
        axis="T",
        values=(2, 4),
        seeds=(0, 1, 2),
        ratio=(1, 1, 1),
        annotations_each=3,
        num_annotators=12,
        num_components=2,
        max_iter=30,
    )
    defaults.update(overrides)
    return SweepSpec(**defaults)


class TestSweep:
    def test_row_count_and_order(self, truth):
        rows = run_sweep(tiny_spec(truth))
        assert len(rows) == 2 * 2 * 3  # grid x models x seeds
        assert [r["T"] for r in rows] == [2] * 6 + [4] * 6
        assert [r["model"] for r in rows[:6]] == ["mv"] * 3 + ["bnc"] * 3
        assert [r["seed"] for r in rows[:3]] == [0, 1, 2]

    def test_seed_offsets_by_grid_index(self, truth):
        rows = run_sweep(tiny_spec(truth))
        assert [r["seed"] for r in rows[6:9]] == [1, 2, 3]

    def test_rows_reproducible_from_recorded_parameters(self, truth):
        rows = run_sweep(tiny_spec(truth))
        probe = rows[10]  # a bnc cell on the second grid point
        again = run_cell(
            truth,
            model=probe["model"],
            ratio=tuple(int(v) for v in probe["R"].split(":")),
            annotations_each=probe["T"],
            num_annotators=probe["L"],
            num_components=probe["K"],
            seed=probe["seed"],
            max_iter=30,
        )
        assert again == probe

    def test_parallel_matches_serial(self, truth):
        spec = tiny_spec(truth, seeds=(0,), values=(2, 3))
        assert run_sweep(spec, workers=2) == run_sweep(spec, workers=1)

    def test_kl_only_for_mixture_model(self, truth):
        spec = tiny_spec(truth, models=("mv", "bnc", "bmmb"), values=(3,), seeds=(0,))
        rows = run_sweep(spec)
        by_model = {r["model"]: r for r in rows}
        assert by_model["mv"]["kl"] == "" and by_model["mv"]["recovery"] == ""
        assert by_model["bnc"]["kl"] == "" and by_model["bnc"]["recovery"] != ""
        assert by_model["bmmb"]["kl"] != ""

    def test_axis_override(self, truth):
        rows = run_sweep(tiny_spec(truth, axis="R", values=((2, 1, 0),), seeds=(0,)))
        assert rows[0]["R"] == "2:1:0"
        assert rows[0]["T"] == 3  # non-swept parameters keep their fixed values

    def test_sweep_spec_validation(self, truth):
        with pytest.raises(DataError):
            tiny_spec(truth, axis="Q")
        with pytest.raises(DataError):
            tiny_spec(truth, models=("svm",))
        with pytest.raises(DataError):
            tiny_spec(truth, seeds=())

    def test_csv_round_trip(self, truth, tmp_path):
        spec = tiny_spec(truth, seeds=(0,))
        rows = run_sweep(spec)
        path = tmp_path / "sweep.csv"
        write_sweep_csv(path, rows, spec)
        text = path.read_text()
        assert text.startswith("# axis=T")
        assert "# fixed: R=1:1:1" in text
        back = read_sweep_csv(path)
        assert len(back) == len(rows)
        assert back[0]["model"] == rows[0]["model"]
        assert float(back[0]["f1_micro"]) == pytest.approx(rows[0]["f1_micro"])


class TestFigures:
    def test_sweep_figure_written(self, truth, tmp_path):
        rows = run_sweep(tiny_spec(truth, seeds=(0,)))
        out = tmp_path / "sweep.png"
        render_sweep_figure(rows, "T", out)
        assert out.stat().st_size > 0

    def test_metric_without_rows_raises(self, truth, tmp_path):
        rows = run_sweep(tiny_spec(truth, models=("mv",), seeds=(0,)))
        with pytest.raises(DataError):
            render_sweep_figure(rows, "T", tmp_path / "x.png", metric="kl")

    def test_component_figure_written(self, tmp_path):
        out = tmp_path / "components.pdf"
        render_component_figure(
            [0.6, 0.3, 0.1],
            np.array([[0.9, 0.1], [0.2, 0.8], [0.5, 0.5]]),
            out,
            label_names=["first", "second"],
        )
        assert out.stat().st_size > 0
