"""Source sequences, compositions and random weight instances.

Binary sequences use the spin alphabet {-1, +1}; K-ary sequences use
{1, ..., K}.  Weight sets are drawn from a counter-based generator (Philox)
so a given ``(seed, n, L)`` always yields the same integers.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

# |E| <= N * L must stay representable as a signed 64-bit integer.
INT64_GUARD = 2**62

BINARY = 2  # alphabet tag for the {-1, +1} spin alphabet


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SourceSequence:
    """A length-N source string.

    ``k is None`` marks the binary spin alphabet; otherwise symbols lie in
    ``1..k``.
    """

    symbols: tuple[int, ...]
    k: int | None = None

    def __post_init__(self):
        if len(self.symbols) < 1:
            raise ValueError("sequence must have length >= 1")
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))
        if self.k is None:
            bad = [s for s in self.symbols if s not in (-1, 1)]
        else:
            if self.k < 2:
                raise ValueError("K-ary alphabet needs K >= 2")
            bad = [s for s in self.symbols if not 1 <= s <= self.k]
        if bad:
            raise ValueError(f"symbols {sorted(set(bad))} outside the alphabet")

    @classmethod
    def binary(cls, symbols: Iterable[int]) -> "SourceSequence":
        return cls(tuple(symbols), None)

    @classmethod
    def kary(cls, symbols: Iterable[int], k: int) -> "SourceSequence":
        return cls(tuple(symbols), k)

    @classmethod
    def from_string(cls, text: str, k: int | None = None) -> "SourceSequence":
        """Parse ``'+-+'`` (binary) or a digit string such as ``'1223'``."""
        text = text.strip()
        if k is None and set(text) <= {"+", "-"}:
            return cls(tuple(1 if c == "+" else -1 for c in text), None)
        if not text.isdigit():
            raise ValueError(f"cannot parse sequence {text!r}")
        symbols = tuple(int(c) for c in text)
        return cls(symbols, k if k is not None else max(symbols))

    def to_string(self) -> str:
        if self.k is None:
            return "".join("+" if s > 0 else "-" for s in self.symbols)
        if self.k > 9:
            raise ValueError("digit serialization supports K <= 9")
        return "".join(str(s) for s in self.symbols)

    @property
    def is_binary(self) -> bool:
        return self.k is None

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.symbols, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class Composition:
    """Symbol occurrence counts of a sequence."""

    counts: dict[int, int]
    n: int

    @property
    def n_plus(self) -> int:
        return self.counts.get(1, 0)

    @property
    def n_minus(self) -> int:
        return self.counts.get(-1, 0)

    @property
    def magnetization(self) -> int:
        return self.n_plus - self.n_minus


def composition_of(seq: SourceSequence) -> Composition:
    counts = Counter(seq.symbols)
    if seq.is_binary:
        keys: Sequence[int] = (1, -1)
    else:
        keys = range(1, seq.k + 1)
    return Composition({s: counts.get(s, 0) for s in keys}, len(seq))


def canonical_binary(n: int, n_plus: int) -> SourceSequence:
    """The sequence with +1 on the first ``n_plus`` positions."""
    if not 0 <= n_plus <= n:
        raise ValueError("need 0 <= n_plus <= n")
    return SourceSequence.binary([1] * n_plus + [-1] * (n - n_plus))


@dataclass(frozen=True)
class WeightSet:
    """Integer weights a_i^k in {1..L_k}, stored as an (m, N) array."""

    weights: np.ndarray = field(repr=False)
    levels: tuple[int, ...]
    seed: int | None = None

    def __post_init__(self):
        w = np.asarray(self.weights)
        if w.ndim == 1:
            w = w[None, :]
        if w.ndim != 2 or w.shape[1] < 1:
            raise ValueError("weights must be a nonempty vector or matrix")
        levels = tuple(int(x) for x in self.levels)
        if len(levels) != w.shape[0]:
            raise ValueError("one level per weight row required")
        if any(level < 1 for level in levels):
            raise ValueError("levels must be >= 1")
        for row, level in zip(w, levels):
            if row.min() < 1 or row.max() > level:
                raise ValueError(f"weights must lie in 1..{level}")
        object.__setattr__(self, "weights", _frozen(w.astype(np.int64)))
        object.__setattr__(self, "levels", levels)

    @classmethod
    def from_rows(cls, rows, levels=None, seed=None) -> "WeightSet":
        w = np.atleast_2d(np.asarray(rows, dtype=np.int64))
        if levels is None:
            levels = tuple(int(r.max()) for r in w)
        elif np.isscalar(levels):
            levels = (int(levels),) * w.shape[0]
        return cls(w, tuple(levels), seed)

    @property
    def n(self) -> int:
        return self.weights.shape[1]

    @property
    def m(self) -> int:
        return self.weights.shape[0]

    @property
    def level(self) -> int:
        if self.m != 1:
            raise AttributeError("multi-row weight set has one level per row")
        return self.levels[0]

    def row(self, k: int = 0) -> np.ndarray:
        return self.weights[k]

    def to_json(self) -> dict:
        out: dict = {"n": self.n}
        if self.m == 1:
            out["L"] = self.levels[0]
            out["weights"] = [int(x) for x in self.weights[0]]
        else:
            out["L_list"] = list(self.levels)
            out["weights"] = [[int(x) for x in row] for row in self.weights]
        out["seed"] = self.seed
        return out

    @classmethod
    def from_json(cls, obj: dict | str) -> "WeightSet":
        if isinstance(obj, str):
            obj = json.loads(obj)
        rows = obj["weights"]
        levels = obj.get("L_list", obj.get("L"))
        ws = cls.from_rows(rows, levels, obj.get("seed"))
        if "n" in obj and int(obj["n"]) != ws.n:
            raise ValueError("'n' disagrees with the weight vector length")
        return ws


def _philox(seed: int | Sequence[int]) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def derive_seed(master_seed: int, *indices: int) -> int:
    """64-bit seed for the stream indexed by ``(master_seed, *indices)``."""
    ss = np.random.SeedSequence([int(master_seed), *map(int, indices)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def sample_weight_rows(n: int, levels: Sequence[int], seed: int) -> WeightSet:
    """i.i.d. uniform weights, row k drawn from ``1..levels[k]``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    levels = tuple(int(x) for x in levels)
    if not levels or any(level < 1 for level in levels):
        raise ValueError("levels must be >= 1")
    if any(level >= INT64_GUARD for level in levels):
        raise OverflowError("level too large for 64-bit sampling")
    rng = _philox(int(seed))
    rows = np.stack([rng.integers(1, level, size=n, endpoint=True) for level in levels])
    return WeightSet(rows, levels, int(seed))


def sample_weights(n: int, level: int, seed: int) -> WeightSet:
    return sample_weight_rows(n, (level,), seed)


def check_range(n: int, level: int) -> None:
    if n * level >= INT64_GUARD:
        raise OverflowError(f"N*L = {n * level} exceeds the 64-bit guard 2**62")


def subset_sum_value(seq: SourceSequence, weights: WeightSet, row: int = 0) -> int:
    """E(sigma) = sum_i a_i sigma_i for one weight row."""
    if not seq.is_binary:
        raise ValueError("subset sums are defined for binary sequences")
    if len(seq) != weights.n:
        raise ValueError(f"sequence length {len(seq)} != weight count {weights.n}")
    check_range(weights.n, weights.levels[row])
    return int(np.dot(weights.row(row), seq.array))
