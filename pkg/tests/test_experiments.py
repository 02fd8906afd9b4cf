import math

import pytest

from subsetcodec import counting
from subsetcodec.experiments import (
    CSV_HEADER, SweepConfig, SweepPoint, estimate_expected_omega, level_for_rate,
    locate_transition, run_ambiguity_sweep,
)


def test_level_for_rate():
    assert level_for_rate(16, 1.0) == 65536
    assert level_for_rate(10, 0.0) == 1
    assert level_for_rate(4, -1.0) == 1


def test_sweep_is_deterministic_and_thread_invariant():
    cfg = dict(scheme="unconstrained", n=10, rates=[0.4, 0.8], trials=40, seed=99, p=0.3)
    a = run_ambiguity_sweep(SweepConfig(**cfg)).to_csv()
    b = run_ambiguity_sweep(SweepConfig(**cfg)).to_csv()
    c = run_ambiguity_sweep(SweepConfig(**cfg, threads=2)).to_csv()
    assert a == b == c
    assert a.splitlines()[0] == ",".join(CSV_HEADER)
    assert a != run_ambiguity_sweep(SweepConfig(**{**cfg, "seed": 100})).to_csv()


def test_strategies_give_identical_sweeps():
    cfg = dict(scheme="constrained", n=10, rates=[0.5, 1.0], trials=30, seed=5)
    assert (run_ambiguity_sweep(SweepConfig(**cfg, strategy="exhaustive")).to_csv()
            == run_ambiguity_sweep(SweepConfig(**cfg, strategy="mitm")).to_csv())


def test_every_scheme_runs():
    configs = [
        SweepConfig("multi", 8, [(0.5, 0.5)], 10, 1),
        SweepConfig("kary", 8, [(0.9, 0.8)], 10, 1, probs=[0.5, 0.25, 0.25]),
        SweepConfig("side_info", 8, [0.7], 10, 1, crossover=0.2),
        SweepConfig("side_info", 8, [0.7], 10, 1,
                    joint=[[0.4, 0.1, 0.0], [0.0, 0.1, 0.4]]),
    ]
    for cfg in configs:
        pt = run_ambiguity_sweep(cfg).points[0]
        assert pt.frac_unique + pt.frac_ambiguous <= 1.0
        assert pt.mean_omega >= 1.0 or cfg.scheme == "side_info"


def test_multi_csv_joins_rates_and_levels():
    res = run_ambiguity_sweep(SweepConfig("multi", 6, [(0.5, 1.0)], 5, 1))
    row = res.to_csv().splitlines()[1].split(",")
    assert row[2] == "0.5/1" and row[3] == "8/64"


def test_timing_column():
    off = run_ambiguity_sweep(SweepConfig("constrained", 6, [0.5], 5, 1))
    assert off.to_csv().splitlines()[1].endswith(",NA")
    on = run_ambiguity_sweep(SweepConfig("constrained", 6, [0.5], 5, 1, record_timing=True))
    assert on.points[0].mean_decode_ns > 0


def test_infeasible_point_is_noted():
    res = run_ambiguity_sweep(SweepConfig("unconstrained", 60, [0.5], 1, 1))
    pt = res.points[0]
    assert math.isnan(pt.mean_omega) and pt.note.startswith("infeasible")
    assert "nan" in res.to_csv()
    huge = run_ambiguity_sweep(SweepConfig("constrained", 16, [0.5, 5.0], 2, 1))
    assert not huge.points[0].note and huge.points[1].note.startswith("infeasible")


@pytest.mark.parametrize("bad", [
    dict(scheme="constrained", n=8, rates=[], trials=5, seed=1),
    dict(scheme="constrained", n=8, rates=[0.5], trials=0, seed=1),
    dict(scheme="nope", n=8, rates=[0.5], trials=5, seed=1),
    dict(scheme="kary", n=8, rates=[(0.5,)], trials=5, seed=1, probs=[0.2, 0.3, 0.5]),
    dict(scheme="side_info", n=8, rates=[0.5], trials=5, seed=1),
    dict(scheme="side_info", n=8, rates=[0.5], trials=5, seed=1, joint=[[0.5, 0.5]]),
    dict(scheme="constrained", n=8, rates=[(0.5, 0.5)], trials=5, seed=1),
])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        SweepConfig(**bad)


def test_from_dict_rejects_unknown_keys():
    with pytest.raises(ValueError):
        SweepConfig.from_dict({"scheme": "constrained", "n": 4, "rates": [1], "trials": 1,
                               "seed": 1, "colour": "red"})


def test_write_creates_sidecar(tmp_path):
    res = run_ambiguity_sweep(SweepConfig("constrained", 6, [0.5, 1.0], 5, 1))
    out = tmp_path / "s.csv"
    res.write(str(out))
    assert out.read_text() == res.to_csv()
    assert (tmp_path / "s.meta.json").exists()


def test_expected_omega_estimate_agrees_with_exact():
    mean, se = estimate_expected_omega("constrained", 8, 0.5, level=16, trials=20_000, seed=3)
    exact = float(counting.expected_omega_constrained(4, 4, 16).value)
    assert abs(mean - exact) < 4 * se
    mean, se = estimate_expected_omega("unconstrained", 6, 0.3, rate=0.5, trials=20_000, seed=4)
    exact = float(counting.expected_omega_unconstrained(6, 0.3, level_for_rate(6, 0.5)).value)
    assert abs(mean - exact) < 4 * se
    with pytest.raises(ValueError):
        estimate_expected_omega("multi", 4, 0.5, rate=1.0)


def _pt(r, amb):
    return SweepPoint(r, (1,), 10, 1.0, 0.0, amb, 1 - amb)


def test_locate_transition_interpolates():
    tr = locate_transition([_pt(0.5, 1.0), _pt(0.6, 0.8), _pt(0.7, 0.2), _pt(0.8, 0.0)])
    assert tr.rate == pytest.approx(0.65) and tr.uncertainty == pytest.approx(0.1)
    with pytest.raises(ValueError):
        locate_transition([_pt(0.5, 0.3), _pt(0.6, 0.1)])


def test_locate_transition_uses_total_rate_for_rows():
    tr = locate_transition([_pt((0.3, 0.3), 0.9), _pt((0.5, 0.5), 0.1)])
    assert tr.rate == pytest.approx(0.8)
