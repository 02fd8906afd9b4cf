import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subsetcodec import counting as ct
from subsetcodec.instance import SourceSequence, WeightSet, canonical_binary


def _lambda_brute(n, L):
    out = {}
    for v in itertools.product(range(1, L + 1), repeat=n):
        out[sum(v)] = out.get(sum(v), 0) + 1
    return out


def test_small_lambda_table():
    assert ct.lambda_table(2, 2).counts == {2: 1, 3: 2, 4: 1}
    assert ct.lambda_table(1, 5).counts == {s: 1 for s in range(1, 6)}
    assert ct.lambda_table(3, 1).counts == {3: 1}


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(1, 6))
def test_lambda_matches_enumeration(n, L):
    assert ct.lambda_table(n, L).counts == _lambda_brute(n, L)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 9), st.integers(1, 25), st.data())
def test_dp_equals_inclusion_exclusion(n, L, data):
    s = data.draw(st.integers(n, n * L))
    assert ct.lambda_table(n, L)[s] == ct.lambda_inclusion_exclusion(n, L, s)


def test_table_outside_range_and_errors():
    t = ct.lambda_table(3, 4)
    assert t[2] == 0 and t[13] == 0 and t.total == 64
    with pytest.raises(ValueError):
        ct.lambda_inclusion_exclusion(3, 4, 13)
    with pytest.raises(ct.GuardError):
        ct.lambda_table(1000, 1000)


@pytest.mark.parametrize("a,b,L", [(1, 1, 5), (2, 3, 4), (4, 4, 7), (3, 1, 10)])
def test_pair_sum_identity(a, b, L):
    ta, tb = ct.lambda_table(a, L), ct.lambda_table(b, L)
    direct = sum(ta[s] * tb[s] for s in range(1, L * max(a, b) + 1))
    assert ct.pair_sum_count(a, b, L) == direct


def test_slab_volume():
    assert ct.slab_volume(1, 0.0, 0.5) == pytest.approx(0.5)
    assert ct.slab_volume(2, 0.0, 1.0) == pytest.approx(0.5)
    assert ct.slab_volume(3, -1, 10) == pytest.approx(1.0)
    assert ct.slab_volume_exact(3, 0, Fraction(3, 2)) == Fraction(1, 2)
    with pytest.raises(ValueError):
        ct.slab_volume(2, 1.0, 0.5)


def test_slab_volume_monte_carlo():
    rng = np.random.Generator(np.random.Philox(5))
    s = rng.random((200_000, 5)).sum(axis=1)
    mc = np.mean((s >= 1.7) & (s <= 2.9))
    assert ct.slab_volume(5, 1.7, 2.9) == pytest.approx(mc, abs=0.005)


def test_lattice_bounds():
    grid = np.linspace(0.05, 0.95, 19)
    for n, L in ((4, 50), (2, 1000), (3, 20), (1, 10)):
        assert ct.lattice_volume_bounds_check(n, L, grid).all_hold


def test_closed_small_cases():
    assert ct.expected_omega_constrained(1, 1, 1).value == 2
    assert ct.expected_omega_constrained(1, 1, 2).value == Fraction(3, 2)
    assert ct.expected_omega_constrained(5, 0, 9).value == 1
    assert ct.expected_omega_unconstrained(2, 0.5, 1).value == Fraction(3, 2)


def test_table_equals_closed():
    for args in ((4, 5, 9), (6, 6, 30)):
        assert (ct.expected_omega_constrained(*args, method="table").value
                == ct.expected_omega_constrained(*args, method="closed").value)
    assert (ct.expected_omega_unconstrained(6, 0.3, 8, method="table").value
            == ct.expected_omega_unconstrained(6, 0.3, 8, method="closed").value)


def _all_weight_vectors(n, L):
    return np.array(list(itertools.product(range(1, L + 1), repeat=n)), dtype=np.int64)


@pytest.mark.parametrize("n,n_plus,L", [(4, 2, 3), (5, 2, 3), (6, 3, 2)])
def test_constrained_exact_average_over_every_weight_vector(n, n_plus, L):
    W = _all_weight_vectors(n, L)
    omega = ct.omega_constrained_batch(W, canonical_binary(n, n_plus))
    assert Fraction(int(omega.sum()), len(W)) == ct.expected_omega_constrained(
        n_plus, n - n_plus, L).value


@pytest.mark.parametrize("n,p,L", [(4, Fraction(1, 2), 3), (5, Fraction(1, 3), 2)])
def test_unconstrained_exact_average_over_weights_and_sources(n, p, L):
    W = _all_weight_vectors(n, L)
    total = Fraction(0)
    for bits in itertools.product((0, 1), repeat=n):
        k = sum(bits)
        plus = np.tile(np.array(bits, dtype=np.int64), (len(W), 1))
        mean = Fraction(int(ct.omega_unconstrained_batch(W, plus).sum()), len(W))
        total += p**k * (1 - p) ** (n - k) * mean
    assert total == ct.expected_omega_unconstrained(n, p, L).value


def test_brute_force_matches_batch():
    rng = np.random.Generator(np.random.Philox(9))
    for _ in range(20):
        w = WeightSet.from_rows(rng.integers(1, 6, size=7), 5)
        seq = SourceSequence.binary(np.where(rng.random(7) < 0.5, 1, -1))
        plus = (seq.array > 0).astype(np.int64)[None, :]
        assert ct.brute_force_omega_constrained(w, seq) == ct.omega_constrained_batch(w.weights, seq)[0]
        assert ct.brute_force_omega_unconstrained(w, seq) == ct.omega_unconstrained_batch(w.weights, plus)[0]


def test_omega_json():
    js = ct.expected_omega_constrained(1, 1, 2).to_json()
    assert js["value"] == 1.5 and js["exact"] == "3/2" and js["scheme"] == "constrained"


def test_dominance_gap_matches_direct_formula():
    r = 0.7
    w = np.array([0.5, 1.0, 3.0, 10.0])
    direct = (-math.expm1(-r)) ** 2 / r**2 - (1 + math.exp(-2 * r) - 2 * math.exp(-r) * np.cos(w)) / (r**2 + w**2)
    assert np.allclose(ct.dominance_gap(r, w), direct, atol=1e-14)


@pytest.mark.parametrize("r", [0.01, 0.1, 1.0, 10.0])
def test_saddle_dominance(r):
    rep = ct.saddle_dominance_check(r, np.linspace(-30, 30, 6001))
    assert rep.passed and rep.gap_at_zero < 1e-12 and rep.min_gap > 0
    with pytest.raises(ValueError):
        ct.saddle_dominance_check(0.0, [1.0])
