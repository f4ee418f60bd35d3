import json

import numpy as np
import pytest

from docross.model import ModelParams
from docross.sweep import (
    SweepSpec,
    SweepSpecError,
    figure2_trajectories,
    merge,
    preset,
    run_sweep,
)


def _t_spec(**kw):
    base = dict(axis="T", lo=2.0, hi=12.0, n_points=11, fixed=ModelParams(1, 1, 1, 1),
                observables=("P31_numeric", "P31_full", "P31_avg", "table_analytic"))
    base.update(kw)
    return SweepSpec(**base)


def test_t_axis_columns_and_consistency():
    res = run_sweep(_t_spec())
    assert res.columns[:3] == ["P31_numeric", "P31_full", "P31_avg"]
    assert "table_analytic.P31" in res.columns
    assert np.allclose(res.column("P31_full"), res.column("table_analytic.P31"), atol=1e-12)
    assert np.array_equal(res.axis_values, np.linspace(2, 12, 11))


def test_failed_points_keep_rows():
    # T below tau = 1 cannot host both crossings
    res = run_sweep(_t_spec(lo=0.5, hi=3.0, n_points=6))
    assert len(res.rows) == 6
    bad = res.failed
    assert bad and all(r[0] <= 1.0 for r in bad)
    assert all(r[1]["P31_full"] is None for r in bad)
    good = [r for r in res.rows if not r[2]]
    assert all(r[1]["P31_numeric"] is not None for r in good)
    line = [ln for ln in res.to_csv().splitlines() if ln.startswith("0.5,")][0]
    assert "WindowTooShort" in line


def test_output_is_deterministic():
    a, b = run_sweep(_t_spec()), run_sweep(_t_spec(workers=4))
    assert a.to_csv() == b.to_csv()
    assert a.to_json() == b.to_json()


def test_csv_and_json_layout(tmp_path):
    res = run_sweep(_t_spec(observables=("P31_full",), n_points=3))
    lines = res.to_csv().splitlines()
    assert lines[0] == "T,P31_full,error"
    assert float(lines[1].split(",")[1]) == res.column("P31_full")[0]
    data = json.loads(res.to_json())
    assert data["metadata"]["spec"]["axis"] == "T"
    assert data["rows"][2]["T"] == 12.0 and data["rows"][2]["error"] is None
    path = tmp_path / "out.json"
    res.write(path, "json")
    assert path.read_text() == res.to_json()


def test_delta_axis_numeric_per_point():
    spec = SweepSpec("delta", 0.5, 2.0, 4, ModelParams(1, 1, 1, 1, -5.0, 5.0),
                     ("P31_numeric", "P31_analytic"))
    res = run_sweep(spec)
    assert not res.failed
    assert np.max(np.abs(res.column("P31_numeric") - res.column("P31_analytic"))) < 0.1


def test_coupling_axis_log_spacing():
    spec = SweepSpec("coupling", 0.1, 2.0, 5, ModelParams(1, 1, 1, 1, -8.0, 8.0),
                     ("P31_avg_leading",), spacing="log")
    res = run_sweep(spec)
    assert np.allclose(res.axis_values, np.geomspace(0.1, 2.0, 5))
    assert not res.failed


def test_time_axis():
    spec = SweepSpec("time", 5.0, 15.0, 21, ModelParams(1, 1, 1, 1), ("P31_numeric", "P31_analytic", "P31_avg"))
    res = run_sweep(spec)
    assert not res.failed
    assert np.max(np.abs(res.column("P31_numeric") - res.column("P31_analytic"))) < 0.01


@pytest.mark.parametrize("change", [
    dict(axis="energy"),
    dict(spacing="cubic"),
    dict(n_points=1),
    dict(lo=5.0, hi=2.0),
    dict(observables=("P31_avg_asymptotic",)),
])
def test_invalid_specs(change):
    with pytest.raises(SweepSpecError):
        run_sweep(_t_spec(**change))


def test_delta_axis_requires_symmetric_window():
    spec = SweepSpec("delta", 0.5, 2.0, 4, ModelParams(1, 1, 1, 1), ("P31_full",))
    with pytest.raises(SweepSpecError):
        run_sweep(spec)


def test_merge_labels_columns():
    a = run_sweep(_t_spec(observables=("P31_full",), n_points=3))
    b = run_sweep(_t_spec(observables=("P31_full",), n_points=3, fixed=ModelParams(2, 2, 1, 1)))
    m = merge([a, b], ["w1", "w2"])
    assert m.columns == ["P31_full@w1", "P31_full@w2"]
    assert np.array_equal(m.column("P31_full@w2"), b.column("P31_full"))
    with pytest.raises(ValueError):
        merge([a, run_sweep(_t_spec(observables=("P31_full",), n_points=4))], ["x", "y"])


def test_presets_resolve_fast_oscillation():
    for name in ("fig3", "fig4", "fig5"):
        for spec in preset(name):
            spec.check()
            assert spec.n_points >= 301
    assert [s.fixed.omega12 for s in preset("fig5")] == [1.0, 3.0, 10.0]
    with pytest.raises(KeyError):
        preset("fig9")


def test_preset_units_scale_with_beta():
    spec = preset("fig3", beta=4.0)[0]
    assert spec.fixed.omega12 == 2.0 and spec.hi == 15.0


def test_figure2_trajectories_share_grid():
    times = np.linspace(-10, 20, 301)
    diab, adia = figure2_trajectories(times=times)
    assert np.array_equal(diab.t, adia.t)
    assert np.allclose(diab.populations.sum(axis=1), 1, atol=1e-9)
    assert np.allclose(adia.populations.sum(axis=1), 1, atol=1e-9)
    assert diab.populations[0, 0] > 0.95
