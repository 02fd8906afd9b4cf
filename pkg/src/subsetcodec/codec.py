"""Subset-sum compression schemes.

Five codecs share one decoding primitive (``_search``):

* constrained   -- (M, E); decoder searches the announced composition class
* unconstrained -- E only; decoder searches all 2^N sign vectors
* multi         -- (M, E_1..E_m) from m independent weight rows
* side_info     -- E only; decoder searches sequences jointly typical with
                   its side information tau
* kary          -- counts N_1..N_{K-1} and stage sums E_1..E_{K-1}; decoded
                   stage by stage with the constrained binary decoder
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _search
from .instance import SourceSequence, WeightSet, check_range, composition_of

SCHEMES = ("constrained", "unconstrained", "multi", "side_info", "kary")
UNIQUE, AMBIGUOUS, NOT_FOUND = "unique", "ambiguous", "not_found"


@dataclass(frozen=True)
class EncodedMessage:
    scheme: str
    n: int
    sums: tuple[int, ...]
    m: int | None = None  # magnetization, constrained and multi
    counts: tuple[int, ...] | None = None  # N_1..N_{K-1}, kary
    k: int | None = None  # alphabet size, kary

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        object.__setattr__(self, "sums", tuple(int(e) for e in self.sums))
        if self.m is not None and (abs(self.m) > self.n or (self.n + self.m) % 2):
            raise ValueError(f"M={self.m} inconsistent with N={self.n}")
        if self.counts is not None:
            object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
            if any(c < 0 for c in self.counts) or sum(self.counts) > self.n:
                raise ValueError("symbol counts inconsistent with N")

    @property
    def e(self) -> int:
        return self.sums[0]

    def to_json(self) -> dict:
        out: dict = {"scheme": self.scheme, "N": self.n}
        if self.m is not None:
            out["M"] = self.m
        if self.scheme in ("constrained", "unconstrained", "side_info"):
            out["E"] = self.sums[0]
        else:
            out["E_list"] = list(self.sums)
        if self.counts is not None:
            out["counts"] = list(self.counts)
            out["K"] = self.k
        return out

    @classmethod
    def from_json(cls, obj: dict | str) -> "EncodedMessage":
        if isinstance(obj, str):
            obj = json.loads(obj)
        sums = obj["E_list"] if "E_list" in obj else [obj["E"]]
        return cls(obj["scheme"], int(obj["N"]), tuple(sums), obj.get("M"),
                   obj.get("counts"), obj.get("K"))


@dataclass(frozen=True)
class DecodeOutcome:
    kind: str
    count: int
    witnesses: tuple[SourceSequence, ...] = ()
    exact: bool = True  # False when count is a bound rather than the solution count

    @property
    def sequence(self) -> SourceSequence | None:
        return self.witnesses[0] if self.kind == UNIQUE else None

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind, "count": self.count, "exact": self.exact}
        if self.kind == UNIQUE:
            out["sequence"] = self.witnesses[0].to_string()
        elif self.witnesses:
            out["witnesses"] = [w.to_string() for w in self.witnesses]
        return out


def _outcome(result: _search.SearchResult, max_witnesses: int) -> DecodeOutcome:
    seqs = tuple(SourceSequence.binary([2 * b - 1 for b in x]) for x in result.witnesses)
    if result.count == 0:
        return DecodeOutcome(NOT_FOUND, 0)
    if result.count == 1:
        return DecodeOutcome(UNIQUE, 1, seqs[:1])
    return DecodeOutcome(AMBIGUOUS, result.count, seqs[:max_witnesses])


def _check_binary(seq: SourceSequence, weights: WeightSet) -> None:
    if not seq.is_binary:
        raise ValueError("binary scheme needs a {-1,+1} sequence")
    if len(seq) != weights.n:
        raise ValueError(f"sequence length {len(seq)} != weight count {weights.n}")


def _row_sums(seq: SourceSequence, weights: WeightSet) -> tuple[int, ...]:
    for level in weights.levels:
        check_range(weights.n, level)
    return tuple(int(x) for x in weights.weights @ seq.array)


def _half_targets(sums: Sequence[int], rows: np.ndarray) -> list[int] | None:
    """Subset-sum targets (E_k + sum a^k) / 2, or None if parity or range rule it out."""
    out = []
    for e, row in zip(sums, rows):
        total = int(row.sum())
        if (e + total) % 2 or abs(e) > total:
            return None
        out.append((e + total) // 2)
    return out


def _check_msg(msg: EncodedMessage, scheme: str, weights: WeightSet) -> None:
    if msg.scheme != scheme:
        raise ValueError(f"expected a {scheme} message, got {msg.scheme}")
    if msg.n != weights.n:
        raise ValueError(f"message N={msg.n} but weights have N={weights.n}")


# --------------------------------------------------------------------------
# constrained / unconstrained / multi


def encode_constrained(seq: SourceSequence, weights: WeightSet) -> EncodedMessage:
    _check_binary(seq, weights)
    comp = composition_of(seq)
    return EncodedMessage("constrained", len(seq), _row_sums(seq, weights)[:1], comp.magnetization)


def _decode_composition(msg: EncodedMessage, rows: np.ndarray, strategy: str,
                        max_witnesses: int) -> DecodeOutcome:
    targets = _half_targets(msg.sums, rows)
    if targets is None:
        return DecodeOutcome(NOT_FOUND, 0)
    n_plus = (msg.n + msg.m) // 2
    res = _search.search(strategy, rows, targets, None, [{n_plus}], max_witnesses)
    return _outcome(res, max_witnesses)


def decode_constrained(msg: EncodedMessage, weights: WeightSet, strategy: str = "mitm",
                       max_witnesses: int = 2) -> DecodeOutcome:
    _check_msg(msg, "constrained", weights)
    if msg.m is None:
        raise ValueError("constrained message lacks M")
    return _decode_composition(msg, weights.weights[:1], strategy, max_witnesses)


def encode_unconstrained(seq: SourceSequence, weights: WeightSet) -> EncodedMessage:
    _check_binary(seq, weights)
    return EncodedMessage("unconstrained", len(seq), _row_sums(seq, weights)[:1])


def decode_unconstrained(msg: EncodedMessage, weights: WeightSet, strategy: str = "mitm",
                         max_witnesses: int = 2) -> DecodeOutcome:
    _check_msg(msg, "unconstrained", weights)
    rows = weights.weights[:1]
    targets = _half_targets(msg.sums, rows)
    if targets is None:
        return DecodeOutcome(NOT_FOUND, 0)
    res = _search.search(strategy, rows, targets, None, None, max_witnesses)
    return _outcome(res, max_witnesses)


def encode_multi(seq: SourceSequence, weights: WeightSet) -> EncodedMessage:
    _check_binary(seq, weights)
    comp = composition_of(seq)
    return EncodedMessage("multi", len(seq), _row_sums(seq, weights), comp.magnetization)


def decode_multi(msg: EncodedMessage, weights: WeightSet, strategy: str = "mitm",
                 max_witnesses: int = 2) -> DecodeOutcome:
    _check_msg(msg, "multi", weights)
    if len(msg.sums) != weights.m:
        raise ValueError(f"{len(msg.sums)} sums for {weights.m} weight rows")
    return _decode_composition(msg, weights.weights, strategy, max_witnesses)


# --------------------------------------------------------------------------
# side information


@dataclass(frozen=True)
class JointDistribution:
    """P(sigma, tau): rows sigma in (-1, +1), columns indexed by ``tau_symbols``."""

    matrix: np.ndarray = field(repr=False)
    tau_symbols: tuple[int, ...] = (-1, 1)
    eps: float | None = None  # max-norm typicality radius; None means 2/N

    def __post_init__(self):
        P = np.array(self.matrix, dtype=float)
        if P.shape != (2, len(self.tau_symbols)):
            raise ValueError("joint matrix must be 2 x len(tau_symbols)")
        if np.any(P < 0) or abs(P.sum() - 1.0) > 1e-12:
            raise ValueError("joint probabilities must be nonnegative and sum to 1")
        P.setflags(write=False)
        object.__setattr__(self, "matrix", P)
        object.__setattr__(self, "tau_symbols", tuple(int(t) for t in self.tau_symbols))

    @classmethod
    def binary_symmetric(cls, crossover: float, p: float = 0.5, eps: float | None = None):
        """sigma ~ Bernoulli(p) on {-1,+1}; tau flips sigma with prob ``crossover``."""
        q, c = 1.0 - p, crossover
        return cls(np.array([[q * (1 - c), q * c], [p * c, p * (1 - c)]]), (-1, 1), eps)

    def radius(self, n: int) -> float:
        return 2.0 / n if self.eps is None else float(self.eps)

    def sample(self, n: int, rng: np.random.Generator) -> tuple[SourceSequence, np.ndarray]:
        cells = rng.choice(self.matrix.size, size=n, p=self.matrix.ravel())
        sigma = np.where(cells // self.matrix.shape[1] == 1, 1, -1)
        tau = np.asarray(self.tau_symbols)[cells % self.matrix.shape[1]]
        return SourceSequence.binary(sigma), tau

    def allowed_counts(self, tau: Sequence[int]) -> tuple[np.ndarray, list[set[int]]]:
        """Label per position and, per tau symbol, the admissible number of +1s.

        The max-norm condition on the 2 x K' type matrix splits over columns,
        so the typical set is a product of per-column cardinality sets.
        """
        tau = np.asarray(tau)
        n = len(tau)
        index = {t: j for j, t in enumerate(self.tau_symbols)}
        try:
            labels = np.array([index[int(t)] for t in tau], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"side symbol {exc.args[0]} not in {self.tau_symbols}")
        eps = self.radius(n) + 1e-12
        allowed = []
        for j in range(len(self.tau_symbols)):
            nb = int(np.count_nonzero(labels == j))
            ok = {c for c in range(nb + 1)
                  if abs(c / n - self.matrix[1, j]) <= eps
                  and abs((nb - c) / n - self.matrix[0, j]) <= eps}
            allowed.append(ok)
        return labels, allowed

    def is_typical(self, sigma: SourceSequence, tau: Sequence[int]) -> bool:
        labels, allowed = self.allowed_counts(tau)
        plus = sigma.array > 0
        return all(int(np.count_nonzero(plus & (labels == j))) in ok
                   for j, ok in enumerate(allowed))

    def to_json(self) -> dict:
        return {"matrix": self.matrix.tolist(), "tau_symbols": list(self.tau_symbols),
                "eps": self.eps}

    @classmethod
    def from_json(cls, obj: dict | str) -> "JointDistribution":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(np.asarray(obj["matrix"]), tuple(obj.get("tau_symbols", (-1, 1))),
                   obj.get("eps"))


def encode_side_info(seq: SourceSequence, weights: WeightSet) -> EncodedMessage:
    _check_binary(seq, weights)
    return EncodedMessage("side_info", len(seq), _row_sums(seq, weights)[:1])


def decode_side_info(msg: EncodedMessage, weights: WeightSet, tau: Sequence[int],
                     joint: JointDistribution, strategy: str = "mitm",
                     max_witnesses: int = 2) -> DecodeOutcome:
    _check_msg(msg, "side_info", weights)
    if len(tau) != msg.n:
        raise ValueError("side sequence length differs from N")
    labels, allowed = joint.allowed_counts(tau)
    if any(not ok for ok in allowed):
        return DecodeOutcome(NOT_FOUND, 0)
    rows = weights.weights[:1]
    targets = _half_targets(msg.sums, rows)
    if targets is None:
        return DecodeOutcome(NOT_FOUND, 0)
    res = _search.search(strategy, rows, targets, labels, allowed, max_witnesses)
    return _outcome(res, max_witnesses)


# --------------------------------------------------------------------------
# K-ary alphabets via K-1 binary stages

# Ambiguous stages are followed into every branch up to this many witnesses;
# beyond it the count becomes a product bound (exact=False).
KARY_BRANCH_LIMIT = 256


def encode_kary(seq: SourceSequence, weights: WeightSet) -> EncodedMessage:
    """Stage s sends E_s = sum_{sigma_i = s} a^s_i - sum_{sigma_i > s} a^s_i."""
    if seq.is_binary:
        raise ValueError("kary scheme needs a sequence over 1..K")
    k = seq.k
    if weights.m != k - 1:
        raise ValueError(f"K={k} needs {k - 1} weight rows, got {weights.m}")
    if len(seq) != weights.n:
        raise ValueError(f"sequence length {len(seq)} != weight count {weights.n}")
    x = seq.array
    sums = []
    for s in range(1, k):
        check_range(weights.n, weights.levels[s - 1])
        sign = np.where(x == s, 1, np.where(x > s, -1, 0))
        sums.append(int(weights.row(s - 1) @ sign))
    counts = tuple(int(np.count_nonzero(x == s)) for s in range(1, k))
    return EncodedMessage("kary", len(seq), tuple(sums), None, counts, k)


def decode_kary(msg: EncodedMessage, weights: WeightSet, strategy: str = "mitm",
                max_witnesses: int = 2,
                branch_limit: int = KARY_BRANCH_LIMIT) -> DecodeOutcome:
    """Staged decoding; stage s fixes the positions of symbol s.

    Every solution of an ambiguous stage is followed, so the reported count is
    the exact number of sequences matching the whole message unless some stage
    has more than ``branch_limit`` solutions, in which case the product of
    per-stage counts along the first branch is reported with ``exact=False``.
    """
    _check_msg(msg, "kary", weights)
    k = msg.k
    if msg.counts is None or k is None or len(msg.counts) != k - 1:
        raise ValueError("kary message needs K and K-1 counts")
    if weights.m != k - 1:
        raise ValueError(f"K={k} needs {k - 1} weight rows")
    n = msg.n
    keep = max(max_witnesses, 1)
    found: list[tuple[int, ...]] = []
    exact = True

    def stage(s: int, free: np.ndarray, assigned: np.ndarray) -> int:
        nonlocal exact
        if s == k:
            out = assigned.copy()
            out[free] = k
            found.append(tuple(int(v) for v in out))
            found.sort()
            del found[keep:]
            return 1
        need = msg.counts[s - 1]
        if len(free) == 0:
            return stage(s + 1, free, assigned) if need == 0 and msg.sums[s - 1] == 0 else 0
        rows = weights.weights[s - 1:s, free]
        targets = _half_targets(msg.sums[s - 1:s], rows)
        if targets is None:
            return 0
        res = _search.search(strategy, rows, targets, None, [{need}],
                             max_witnesses=branch_limit)
        if res.count > branch_limit:
            exact = False
            return res.count * max(branch(s, free, assigned, res.witnesses[0]), 1)
        return sum(branch(s, free, assigned, w) for w in res.witnesses)

    def branch(s, free, assigned, witness) -> int:
        w = np.asarray(witness, dtype=bool)
        nxt = assigned.copy()
        nxt[free[w]] = s
        return stage(s + 1, free[~w], nxt)

    total = stage(1, np.arange(n), np.zeros(n, dtype=np.int64))
    if total == 0:
        return DecodeOutcome(NOT_FOUND, 0)
    seqs = tuple(SourceSequence.kary(a, k) for a in found)
    if total == 1 and exact:
        return DecodeOutcome(UNIQUE, 1, seqs[:1])
    return DecodeOutcome(AMBIGUOUS, total, seqs[:max_witnesses], exact)


# --------------------------------------------------------------------------


def codeword_length_bits(msg: EncodedMessage, levels: Sequence[int]) -> float:
    """Fixed-length codeword size: log2(N+1) per count plus log2(2 N L + 1) per sum."""
    n = msg.n
    levels = [int(x) for x in levels]
    if len(levels) != len(msg.sums):
        raise ValueError("one level per transmitted sum")
    sums = sum(math.log2(2 * n * level + 1) for level in levels)
    if msg.scheme in ("constrained", "multi"):
        return math.log2(n + 1) + sums
    if msg.scheme == "kary":
        return len(msg.counts) * math.log2(n + 1) + sums
    return sums


def encode(scheme: str, seq: SourceSequence, weights: WeightSet) -> EncodedMessage:
    return {
        "constrained": encode_constrained,
        "unconstrained": encode_unconstrained,
        "multi": encode_multi,
        "side_info": encode_side_info,
        "kary": encode_kary,
    }[scheme](seq, weights)


def decode(msg: EncodedMessage, weights: WeightSet, strategy: str = "mitm",
           max_witnesses: int = 2, tau=None, joint: JointDistribution | None = None
           ) -> DecodeOutcome:
    if msg.scheme == "constrained":
        return decode_constrained(msg, weights, strategy, max_witnesses)
    if msg.scheme == "unconstrained":
        return decode_unconstrained(msg, weights, strategy, max_witnesses)
    if msg.scheme == "multi":
        return decode_multi(msg, weights, strategy, max_witnesses)
    if msg.scheme == "side_info":
        if tau is None or joint is None:
            raise ValueError("side_info decoding needs tau and the joint distribution")
        return decode_side_info(msg, weights, tau, joint, strategy, max_witnesses)
    return decode_kary(msg, weights, strategy, max_witnesses)
