"""Cardinality-constrained subset-sum search.

Both decoders reduce to: find 0/1 vectors x (x_i = 1 where sigma_i = +1) with
``sum_i x_i a^k_i == T_k`` for every weight row k, where the number of ones
among positions carrying each label must lie in that label's allowed set.
``allowed=None`` lifts the cardinality constraint.

Witnesses are always the lexicographically smallest solutions (x_0 most
significant), so results do not depend on enumeration order.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .counting import GuardError

EXHAUSTIVE_GUARD = 2**26
HALF_GUARD = 2**24  # entries per meet-in-the-middle half table
EXPAND_GUARD = 5 * 10**7  # row-0 matches expanded when several rows must agree
_CHUNK = 1 << 16


@dataclass(frozen=True)
class SearchResult:
    count: int
    witnesses: tuple[tuple[int, ...], ...]  # 0/1 vectors, lexicographic order


def _lex_keys(bits: np.ndarray) -> np.ndarray:
    n = bits.shape[1]
    weights = np.left_shift(np.int64(1), np.arange(n - 1, -1, -1, dtype=np.int64))
    return bits @ weights


def _keys_to_bits(keys: Sequence[int], n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple((int(k) >> (n - 1 - i)) & 1 for i in range(n)) for k in keys)


def _merge_smallest(best: np.ndarray, new: np.ndarray, limit: int) -> np.ndarray:
    if limit <= 0:
        return best
    return np.unique(np.concatenate([best, new]))[:limit]


def _prepare(rows: np.ndarray, targets: Sequence[int]) -> np.ndarray | None:
    rows = np.atleast_2d(np.asarray(rows, dtype=np.int64))
    t = np.asarray([int(x) for x in targets], dtype=np.int64)
    if len(t) != rows.shape[0]:
        raise ValueError("one target per weight row")
    return t


def _allowed_mask(counts: np.ndarray, allowed) -> np.ndarray:
    ok = np.ones(len(counts), dtype=bool)
    for g, values in enumerate(allowed):
        ok &= np.isin(counts[:, g], np.fromiter(values, dtype=np.int64))
    return ok


def _label_matrix(labels, n: int, allowed=None) -> tuple[np.ndarray, int]:
    if labels is None:
        lab, n_labels = np.zeros(n, dtype=np.int64), 1
    else:
        lab = np.asarray(labels, dtype=np.int64)
        n_labels = int(lab.max()) + 1
    if allowed is not None:
        # a label absent from the positions still constrains its (zero) count
        if len(allowed) < n_labels:
            raise ValueError("one allowed-count set per label required")
        n_labels = len(allowed)
    return lab, n_labels


def exhaustive_search(rows, targets, labels=None, allowed=None,
                      max_witnesses: int = 2) -> SearchResult:
    """Explicit enumeration of every candidate vector."""
    rows = np.atleast_2d(np.asarray(rows, dtype=np.int64))
    t = _prepare(rows, targets)
    n = rows.shape[1]
    lab, n_labels = _label_matrix(labels, n, allowed)
    count = 0
    best = np.empty(0, dtype=np.int64)

    if allowed is not None and n_labels == 1 and len(allowed[0]) == 1:
        # single cardinality: walk k-subsets only
        (k,) = tuple(allowed[0])
        if not 0 <= k <= n:
            return SearchResult(0, ())
        if math.comb(n, k) > 10**8:
            raise GuardError(f"C({n},{k}) exceeds the exhaustive guard")
        combos = itertools.combinations(range(n), k)
        while True:
            block = list(itertools.islice(combos, _CHUNK))
            if not block:
                break
            idx = np.asarray(block, dtype=np.int64).reshape(len(block), k)
            bits = np.zeros((len(block), n), dtype=np.int64)
            np.put_along_axis(bits, idx, 1, axis=1)
            hit = np.all(bits @ rows.T == t, axis=1)
            count += int(hit.sum())
            best = _merge_smallest(best, _lex_keys(bits[hit]), max_witnesses)
        return SearchResult(count, _keys_to_bits(best, n))

    if 2**n > EXHAUSTIVE_GUARD:
        raise GuardError(f"2^{n} candidates exceed the exhaustive guard")
    onehot = np.eye(n_labels, dtype=np.int64)[lab]
    cols = np.arange(n, dtype=np.int64)
    for start in range(0, 1 << n, _CHUNK):
        masks = np.arange(start, min(start + _CHUNK, 1 << n), dtype=np.int64)
        bits = (masks[:, None] >> cols) & 1
        hit = np.all(bits @ rows.T == t, axis=1)
        if allowed is not None:
            hit &= _allowed_mask(bits @ onehot, allowed)
        count += int(hit.sum())
        best = _merge_smallest(best, _lex_keys(bits[hit]), max_witnesses)
    return SearchResult(count, _keys_to_bits(best, n))


@dataclass
class _Half:
    keys: np.ndarray  # lexicographic key within the half
    sums: np.ndarray  # (size, m) partial sums
    groups: dict  # count vector -> indices sorted by (row-0 sum, key)


def _half_table(rows: np.ndarray, lab: np.ndarray, n_labels: int) -> _Half:
    h = rows.shape[1]
    if 2**h > HALF_GUARD:
        raise GuardError(f"half table of 2^{h} entries exceeds the guard")
    masks = np.arange(1 << h, dtype=np.int64)
    # bit (h-1-i) of the mask is position i, so mask order is lexicographic
    bits = (masks[:, None] >> np.arange(h - 1, -1, -1, dtype=np.int64)) & 1
    sums = bits @ rows.T
    counts = bits @ np.eye(n_labels, dtype=np.int64)[lab]
    code = counts @ ((h + 1) ** np.arange(n_labels, dtype=np.int64))
    order = np.lexsort((masks, sums[:, 0], code))
    groups = {}
    code_sorted = code[order]
    bounds = np.flatnonzero(np.diff(code_sorted)) + 1
    for part in np.split(order, bounds):
        groups[tuple(int(c) for c in counts[part[0]])] = part
    return _Half(masks, sums, groups)


def _pair_allowed(ca, cb, allowed) -> bool:
    return all(a + b in values for a, b, values in zip(ca, cb, allowed))


def mitm_search(rows, targets, labels=None, allowed=None,
                max_witnesses: int = 2) -> SearchResult:
    """Meet-in-the-middle over the first/second half of the positions.

    Each half is tabulated once, grouped by its per-label count vector and
    sorted by partial sum; compatible group pairs are joined with binary
    search on the first weight row.  Counting is exact: the number of matches
    is read off the search ranges without materializing them (one row) or by
    expanding row-0 matches and filtering on the remaining rows.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.int64))
    t = _prepare(rows, targets)
    n = rows.shape[1]
    if n == 1:
        return exhaustive_search(rows, targets, labels, allowed, max_witnesses)
    lab, n_labels = _label_matrix(labels, n, allowed)
    if allowed is not None:
        allowed = [set(int(v) for v in a) for a in allowed]
    h = n // 2
    A = _half_table(rows[:, :h], lab[:h], n_labels)
    B = _half_table(rows[:, h:], lab[h:], n_labels)
    shift = n - h
    m = rows.shape[0]

    count = 0
    best = np.empty(0, dtype=np.int64)
    for ca, ia in A.groups.items():
        sa = A.sums[ia, 0]
        for cb, ib in B.groups.items():
            if allowed is not None and not _pair_allowed(ca, cb, allowed):
                continue
            need = t[0] - B.sums[ib, 0]
            left = np.searchsorted(sa, need, side="left")
            right = np.searchsorted(sa, need, side="right")
            width = right - left
            has = width > 0
            if not has.any():
                continue
            if m == 1:
                count += int(width.sum())
                if max_witnesses > 0:
                    # within a sum range A entries are key-sorted: take the first few
                    take = np.minimum(width[has], max_witnesses)
                    b_idx = np.repeat(ib[has], take)
                    offs = np.arange(take.sum()) - np.repeat(np.cumsum(take) - take, take)
                    a_idx = ia[np.repeat(left[has], take) + offs]
                    keys = (A.keys[a_idx] << shift) | B.keys[b_idx]
                    best = _merge_smallest(best, keys, max_witnesses)
                continue
            total = int(width.sum())
            if total > EXPAND_GUARD:
                raise GuardError("too many first-row matches to verify")
            b_idx = np.repeat(ib[has], width[has])
            offs = np.arange(total) - np.repeat(np.cumsum(width[has]) - width[has], width[has])
            a_idx = ia[np.repeat(left[has], width[has]) + offs]
            ok = np.all(A.sums[a_idx, 1:] + B.sums[b_idx, 1:] == t[1:], axis=1)
            count += int(ok.sum())
            if max_witnesses > 0 and ok.any():
                keys = (A.keys[a_idx[ok]] << shift) | B.keys[b_idx[ok]]
                best = _merge_smallest(best, keys, max_witnesses)
    return SearchResult(count, _keys_to_bits(best, n))


STRATEGIES = {"exhaustive": exhaustive_search, "mitm": mitm_search}


def search(strategy: str, rows, targets, labels=None, allowed=None,
           max_witnesses: int = 2) -> SearchResult:
    try:
        fn = STRATEGIES[strategy]
    except KeyError:
        raise ValueError(f"unknown strategy {strategy!r}; use 'exhaustive' or 'mitm'")
    return fn(rows, targets, labels, allowed, max_witnesses)
