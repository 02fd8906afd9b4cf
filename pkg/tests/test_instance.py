import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from subsetcodec.instance import (
    SourceSequence, WeightSet, canonical_binary, check_range, composition_of,
    derive_seed, sample_weight_rows, sample_weights, subset_sum_value,
)


def test_string_round_trip():
    s = SourceSequence.from_string("+-+")
    assert s.symbols == (1, -1, 1) and s.is_binary
    assert s.to_string() == "+-+"
    k = SourceSequence.from_string("1321", 3)
    assert k.k == 3 and k.to_string() == "1321"


@pytest.mark.parametrize("bad", [((0, 1), None), ((1, 4), 3), ((), None)])
def test_rejects_bad_symbols(bad):
    with pytest.raises(ValueError):
        SourceSequence(*bad)


def test_composition():
    c = composition_of(SourceSequence.from_string("++-+"))
    assert (c.n_plus, c.n_minus, c.magnetization) == (3, 1, 2)
    assert composition_of(SourceSequence.kary([1, 3, 3], 3)).counts == {1: 1, 2: 0, 3: 2}
    assert canonical_binary(4, 1).to_string() == "+---"


def test_weightset_validation_and_json():
    w = WeightSet.from_rows([[1, 2], [3, 1]], 3, seed=7)
    assert w.m == 2 and w.levels == (3, 3)
    back = WeightSet.from_json(json.dumps(w.to_json()))
    assert np.array_equal(back.weights, w.weights) and back.levels == w.levels
    with pytest.raises(ValueError):
        WeightSet.from_rows([0, 2], 2)
    with pytest.raises(ValueError):
        WeightSet.from_rows([5], 4)
    with pytest.raises(ValueError):
        w.weights[0, 0] = 9  # read-only


def test_sampling_is_reproducible_and_in_range():
    a = sample_weights(50, 7, 11)
    b = sample_weights(50, 7, 11)
    assert np.array_equal(a.weights, b.weights)
    assert a.weights.min() >= 1 and a.weights.max() <= 7
    assert not np.array_equal(a.weights, sample_weights(50, 7, 12).weights)
    rows = sample_weight_rows(30, (2, 1000), 5)
    assert rows.weights[0].max() <= 2 and rows.weights[1].max() <= 1000


def test_uniformity_of_weights():
    w = sample_weights(60_000, 6, 3).weights[0]
    freq = np.bincount(w, minlength=7)[1:] / len(w)
    assert np.allclose(freq, 1 / 6, atol=0.01)


def test_derived_seeds_differ():
    seeds = {derive_seed(1, g, t) for g in range(10) for t in range(100)}
    assert len(seeds) == 1000
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)


def test_range_guard():
    check_range(10, 2**40)
    with pytest.raises(OverflowError):
        check_range(2**3, 2**60)


@given(st.lists(st.sampled_from([-1, 1]), min_size=1, max_size=20), st.integers(0, 2**31))
def test_subset_sum_matches_numpy(signs, seed):
    w = sample_weights(len(signs), 1000, seed)
    seq = SourceSequence.binary(signs)
    assert subset_sum_value(seq, w) == int(np.dot(w.weights[0], signs))
