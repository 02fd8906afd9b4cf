"""Exact counting oracles.

Lambda(n, L, s) is the number of vectors in {1..L}^n summing to s.  Everything
here is exact (Python integers and ``Fraction``); the Monte Carlo helpers at
the bottom are vectorized brute force over explicit enumerations.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .instance import SourceSequence, WeightSet, composition_of, subset_sum_value

TABLE_GUARD = 10**8  # n * n * L cells
CONSTRAINED_ENUM_GUARD = 10**8
UNCONSTRAINED_ENUM_GUARD = 2**26
_CHUNK = 1 << 16


class GuardError(ValueError):
    """An exact computation was refused because it exceeds its size guard."""


# --------------------------------------------------------------------------
# Lambda tables


@dataclass(frozen=True)
class CountTable:
    n: int
    L: int
    values: tuple[int, ...] = field(repr=False)  # values[s - n] for s in n..nL

    @property
    def counts(self) -> dict[int, int]:
        return {s: c for s, c in enumerate(self.values, start=self.n)}

    def __getitem__(self, s: int) -> int:
        if self.n <= s <= self.n * self.L:
            return self.values[s - self.n]
        return 0

    @property
    def total(self) -> int:
        return sum(self.values)


def _check_table(n: int, L: int) -> None:
    if n < 1 or L < 1:
        raise ValueError("need n >= 1 and L >= 1")
    if n * n * L > TABLE_GUARD:
        raise GuardError(f"Lambda table with n={n}, L={L} exceeds {TABLE_GUARD} cells")


def lambda_rows(n_max: int, L: int) -> list[CountTable]:
    """Tables for n = 1..n_max from one pass of the sliding-window recurrence."""
    _check_table(n_max, L)
    row = [1] * L  # n = 1, s = 1..L
    tables = [CountTable(1, L, tuple(row))]
    for m in range(2, n_max + 1):
        # Lambda^m_s = sum_{j=1..L} Lambda^{m-1}_{s-j}, s = m..mL
        prefix = [0]
        for c in row:
            prefix.append(prefix[-1] + c)
        width = len(row)  # entries of the previous row, indices s' = m-1 .. (m-1)L
        new = []
        for s in range(m, m * L + 1):
            hi = min(s - 1, (m - 1) * L) - (m - 1)
            lo = max(s - L, m - 1) - (m - 1)
            new.append(prefix[hi + 1] - prefix[lo] if hi >= lo and lo < width else 0)
        row = new
        tables.append(CountTable(m, L, tuple(row)))
    return tables


def lambda_table(n: int, L: int) -> CountTable:
    return lambda_rows(n, L)[-1]


def _comb(a: int, b: int) -> int:
    if a < 0 or b < 0 or a < b:
        return 0
    return math.comb(a, b)


def _lambda_ie(n: int, L: int, s: int) -> int:
    """Alternating-sum count, zero outside n..nL."""
    if not n <= s <= n * L:
        return 0
    # shift parts to 0..L-1: count of beta with sum s - n, each beta_i < L
    total = 0
    for j in range(0, n + 1):
        if s - j * L - 1 < n - 1:
            break
        total += (-1) ** j * math.comb(n, j) * _comb(s - j * L - 1, n - 1)
    return total


def lambda_inclusion_exclusion(n: int, L: int, s: int) -> int:
    if n < 1 or L < 1:
        raise ValueError("need n >= 1 and L >= 1")
    if not n <= s <= n * L:
        raise ValueError(f"s={s} outside {n}..{n * L}")
    return _lambda_ie(n, L, s)


def pair_sum_count(a: int, b: int, L: int) -> int:
    """sum_s Lambda^a_s Lambda^b_s via the reflection alpha -> L + 1 - alpha.

    Equal sums of an a-vector and a b-vector correspond to (a+b)-vectors
    summing to b(L + 1), so this is a single Lambda value.
    """
    if a == 0 or b == 0:
        return 0
    return _lambda_ie(a + b, L, b * (L + 1))


# --------------------------------------------------------------------------
# Slab volumes (Irwin-Hall CDF) and the lattice-volume bounds


def _irwin_hall_cdf(m: int, x: Fraction) -> Fraction:
    if x <= 0:
        return Fraction(0)
    if x >= m:
        return Fraction(1)
    total = Fraction(0)
    for j in range(0, int(math.floor(x)) + 1):
        total += (-1) ** j * math.comb(m, j) * (x - j) ** m
    return total / math.factorial(m)


def slab_volume_exact(m: int, a, b) -> Fraction:
    if m < 1:
        raise ValueError("dimension must be >= 1")
    a, b = Fraction(a), Fraction(b)
    if a > b:
        raise ValueError("need a <= b")
    a = min(max(a, Fraction(0)), Fraction(m))
    b = min(max(b, Fraction(0)), Fraction(m))
    return _irwin_hall_cdf(m, b) - _irwin_hall_cdf(m, a)


def slab_volume(m: int, a: float, b: float) -> float:
    """Volume of {y in [0,1]^m : a <= sum(y) <= b}.

    The alternating Irwin-Hall sum is evaluated in exact rationals, so there
    is no cancellation loss at large m.
    """
    return float(slab_volume_exact(m, a, b))


@dataclass(frozen=True)
class BoundsReport:
    n: int
    L: int
    points: tuple[tuple[float, int, float, float, float], ...]  # zeta, s, lower, count, upper
    all_hold: bool
    max_log_discrepancy: float  # max |ln(count / (L^{n-1} * slab volume))|
    worst_ratio: float


def lattice_volume_bounds_check(n: int, L: int, zeta_grid: Sequence[float]) -> BoundsReport:
    """Sandwich Lambda^n_s between shrunk- and expanded-slab lattice volumes."""
    _check_table(n, L)
    table = lambda_table(n, L)
    points = []
    ok = True
    worst, worst_ratio = 0.0, 1.0
    for zeta in zeta_grid:
        s = int(round(zeta * n * L))
        count = table[s]
        if n == 1:
            # no slab: the count is 1 inside 1..L and 0 outside
            points.append((float(zeta), s, float(count), float(count), float(count)))
            continue
        z = Fraction(s, n * L)
        base = L ** (n - 1)
        lo_b, hi_b = n * z - 1, n * z
        d = Fraction(n, L)
        lower = base * slab_volume_exact(n - 1, min(lo_b + d, hi_b - d), hi_b - d)
        upper = base * slab_volume_exact(n - 1, lo_b - d, hi_b + d)
        approx = base * slab_volume_exact(n - 1, lo_b, hi_b)
        ok &= lower <= count <= upper
        if count > 0 and approx > 0:
            ratio = Fraction(count) / approx
            dev = abs(math.log(ratio))
            if dev > worst:
                worst, worst_ratio = dev, float(ratio)
        points.append((float(zeta), s, float(lower), float(count), float(upper)))
    return BoundsReport(n, L, tuple(points), bool(ok), worst, worst_ratio)


# --------------------------------------------------------------------------
# Exact expected solution counts


@dataclass(frozen=True)
class ExpectedOmega:
    value: Fraction
    scheme: str
    params: dict
    method: str

    def __float__(self) -> float:
        return float(self.value)

    def to_json(self) -> dict:
        return {"scheme": self.scheme, "params": self.params,
                "value": float(self.value), "exact": str(self.value), "method": self.method}


def _pick_method(method: str, n_max: int, L: int) -> str:
    if method not in ("auto", "table", "closed"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        return "table" if n_max * n_max * L <= TABLE_GUARD else "closed"
    return method


def expected_omega_constrained(n_plus: int, n_minus: int, L: int,
                               method: str = "auto") -> ExpectedOmega:
    """<Omega> = 1 + sum_n L^{-2n} C(N+,n) C(N-,n) sum_s (Lambda^n_s)^2, exactly."""
    if min(n_plus, n_minus) < 0 or L < 1:
        raise ValueError("need N+, N- >= 0 and L >= 1")
    top = min(n_plus, n_minus)
    method = _pick_method(method, max(top, 1), L)
    if method == "table" and top > 0:
        squares = [sum(c * c for c in t.values) for t in lambda_rows(top, L)]
    else:
        squares = [pair_sum_count(n, n, L) for n in range(1, top + 1)]
    value = Fraction(1)
    for n, sq in enumerate(squares, start=1):
        value += Fraction(math.comb(n_plus, n) * math.comb(n_minus, n) * sq, L ** (2 * n))
    params = {"n_plus": n_plus, "n_minus": n_minus, "L": L}
    return ExpectedOmega(value, "constrained", params, method)


def _as_fraction(p) -> Fraction:
    if isinstance(p, Fraction):
        return p
    if isinstance(p, float):
        return Fraction(repr(p))
    return Fraction(p)


def expected_omega_unconstrained(n: int, p, L: int, method: str = "auto") -> ExpectedOmega:
    """Exact <Omega> of the unconstrained scheme for a memoryless source.

    Terms with r = 0 or r = k vanish: a one-signed set of positive weights
    never sums to zero.
    """
    if n < 1 or L < 1:
        raise ValueError("need N >= 1 and L >= 1")
    pf = _as_fraction(p)
    if not 0 <= pf <= 1:
        raise ValueError("p outside [0, 1]")
    qf = 1 - pf
    method = _pick_method(method, n, L)
    if method == "table":
        rows = lambda_rows(n, L)

        def cross(r, k):
            a, b = rows[r - 1], rows[k - r - 1]
            return sum(a[s] * b[s] for s in range(max(r, k - r), L * min(r, k - r) + 1))
    else:
        def cross(r, k):
            return pair_sum_count(r, k - r, L)

    value = Fraction(1)
    for k in range(1, n + 1):
        inner = Fraction(0)
        for r in range(1, k):
            c = cross(r, k)
            if c:
                inner += math.comb(k, r) * pf**r * qf ** (k - r) * c
        value += math.comb(n, k) * inner / Fraction(L) ** k
    params = {"n": n, "p": float(pf), "L": L}
    return ExpectedOmega(value, "unconstrained", params, method)


# --------------------------------------------------------------------------
# Brute-force solution counts


def _combination_chunks(n: int, k: int, chunk: int = _CHUNK):
    """Yield (rows, k) int arrays of k-subsets of range(n) in lexicographic order."""
    it = itertools.combinations(range(n), k)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.asarray(block, dtype=np.int64).reshape(len(block), k)


def _mask_chunks(n: int, chunk: int = _CHUNK):
    """Yield 0/1 matrices of all n-bit masks, bit i at column i."""
    cols = np.arange(n, dtype=np.int64)
    for start in range(0, 1 << n, chunk):
        masks = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        yield (masks[:, None] >> cols) & 1


def brute_force_omega_constrained(weights: WeightSet, seq: SourceSequence, row: int = 0) -> int:
    """Number of equal-composition sequences sharing E with ``seq``."""
    comp = composition_of(seq)
    n, k = len(seq), comp.n_plus
    if math.comb(n, k) > CONSTRAINED_ENUM_GUARD:
        raise GuardError(f"C({n},{k}) exceeds the enumeration guard")
    target = subset_sum_value(seq, weights, row)
    w = weights.row(row)
    # sum over + positions of a_i equals (E + sum a) / 2
    half = (target + int(w.sum())) // 2
    if k == 0:
        return 1
    count = 0
    for idx in _combination_chunks(n, k):
        count += int(np.count_nonzero(w[idx].sum(axis=1) == half))
    return count


def brute_force_omega_unconstrained(weights: WeightSet, seq: SourceSequence, row: int = 0) -> int:
    """Number of sign vectors (any composition) sharing E with ``seq``."""
    n = len(seq)
    if 2**n > UNCONSTRAINED_ENUM_GUARD:
        raise GuardError(f"2^{n} exceeds the enumeration guard")
    target = subset_sum_value(seq, weights, row)
    w = weights.row(row)
    count = 0
    for bits in _mask_chunks(n):
        count += int(np.count_nonzero(2 * (bits @ w) - int(w.sum()) == target))
    return count


def omega_constrained_batch(W: np.ndarray, seq: SourceSequence) -> np.ndarray:
    """Brute-force Omega for each weight row of ``W`` (trials x N), fixed ``seq``."""
    W = np.asarray(W, dtype=np.int64)
    n, k = len(seq), composition_of(seq).n_plus
    if math.comb(n, k) > 10**6:
        raise GuardError("batched enumeration limited to 1e6 composition mates")
    idx = np.array(list(itertools.combinations(range(n), k)), dtype=np.int64).reshape(math.comb(n, k), k)
    mates = np.zeros((len(idx), n), dtype=np.int64)
    np.put_along_axis(mates, idx, 1, axis=1)
    plus = (seq.array > 0).astype(np.int64)
    out = np.empty(len(W), dtype=np.int64)
    step = max(1, 4_000_000 // len(mates))
    for start in range(0, len(W), step):
        block = W[start:start + step]
        sums = block @ mates.T
        out[start:start + step] = (sums == (block @ plus)[:, None]).sum(axis=1)
    return out


def omega_unconstrained_batch(W: np.ndarray, plus: np.ndarray) -> np.ndarray:
    """Brute-force Omega per trial; ``plus`` holds each trial's 0/1 indicator of +1."""
    W = np.asarray(W, dtype=np.int64)
    plus = np.asarray(plus, dtype=np.int64)
    n = W.shape[1]
    if 2**n > 2**20:
        raise GuardError("batched enumeration limited to N <= 20")
    masks = np.arange(1 << n, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(n)) & 1
    out = np.empty(len(W), dtype=np.int64)
    step = max(1, 4_000_000 // len(bits))
    for start in range(0, len(W), step):
        block = W[start:start + step]
        sums = block @ bits.T
        target = (block * plus[start:start + step]).sum(axis=1)
        out[start:start + step] = (sums == target[:, None]).sum(axis=1)
    return out


# --------------------------------------------------------------------------
# Modulus dominance along the vertical contour


@dataclass(frozen=True)
class DominanceReport:
    r: float
    min_gap: float  # smallest gap over omega != 0
    argmin_omega: float
    gap_at_zero: float  # |gap| at omega = 0 (nan if 0 not on the grid)
    violations: int

    @property
    def passed(self) -> bool:
        zero_ok = math.isnan(self.gap_at_zero) or self.gap_at_zero < 1e-12
        return self.violations == 0 and zero_ok


def dominance_gap(r: float, omega) -> np.ndarray:
    """(1-e^{-r})^2/r^2 - (1 + e^{-2r} - 2 e^{-r} cos w)/(r^2 + w^2).

    Written over the common denominator, with 1 - cos w = 2 sin^2(w/2), to
    avoid cancellation at small w.
    """
    w = np.asarray(omega, dtype=float)
    er = math.exp(-r)
    num = w * w * (-math.expm1(-r)) ** 2 - 4.0 * r * r * er * np.sin(0.5 * w) ** 2
    return num / (r * r * (r * r + w * w))


def saddle_dominance_check(r: float, omega_grid) -> DominanceReport:
    if r <= 0:
        raise ValueError("r must be positive")
    w = np.asarray(omega_grid, dtype=float)
    gap = dominance_gap(r, w)
    zero = w == 0
    at_zero = float(np.abs(gap[zero]).max()) if zero.any() else math.nan
    rest = gap[~zero]
    if rest.size:
        i = int(np.argmin(rest))
        min_gap, arg = float(rest[i]), float(w[~zero][i])
    else:
        min_gap, arg = math.nan, math.nan
    violations = int(np.count_nonzero(rest <= 0))
    return DominanceReport(float(r), min_gap, arg, at_zero, violations)
