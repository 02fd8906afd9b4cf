"""Monte Carlo rate sweeps.

Every trial draws from its own stream, seeded by (master seed, grid index,
trial index), so results do not depend on worker count or scheduling.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .codec import (
    AMBIGUOUS, NOT_FOUND, SCHEMES, UNIQUE, JointDistribution, decode, encode,
)
from .counting import GuardError, omega_constrained_batch, omega_unconstrained_batch
from .instance import (
    SourceSequence, canonical_binary, derive_seed, sample_weight_rows,
)

CSV_HEADER = ["scheme", "N", "R", "L", "trials", "mean_omega", "se_omega",
              "frac_ambiguous", "frac_unique", "mean_decode_ns"]


def level_for_rate(n: int, rate: float) -> int:
    """L = max(1, round(2^{N R}))."""
    return max(1, int(round(2.0 ** (n * rate))))


@dataclass
class SweepConfig:
    scheme: str
    n: int
    rates: list  # floats, or per-row / per-stage tuples for multi and kary
    trials: int
    seed: int
    strategy: str = "mitm"
    p: float = 0.5
    probs: list[float] | None = None  # kary source
    crossover: float | None = None  # side_info: binary symmetric joint
    joint: list[list[float]] | None = None  # side_info: explicit 2 x K' matrix
    tau_symbols: list[int] | None = None  # side_info: column labels (default -1,+1 or 0..K'-1)
    eps: float | None = None  # side_info typicality radius (None: 2/N)
    typical_only: bool = True  # side_info: redraw atypical (sigma, tau) pairs
    record_timing: bool = False
    threads: int = 1
    output: str | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.rates:
            raise ValueError("rate grid is empty")
        if self.n < 1:
            raise ValueError("N must be >= 1")
        vector = self.scheme in ("multi", "kary")
        rates = []
        for r in self.rates:
            if vector:
                r = tuple(float(x) for x in (r if isinstance(r, (list, tuple)) else [r]))
            elif isinstance(r, (list, tuple)):
                raise ValueError(f"{self.scheme} takes scalar rates")
            else:
                r = float(r)
            rates.append(r)
        self.rates = rates
        if self.scheme == "kary":
            if self.probs is None:
                raise ValueError("kary sweeps need a probability vector")
            k = len(self.probs)
            if any(len(r) != k - 1 for r in rates):
                raise ValueError(f"kary rates need K-1 = {k - 1} entries")
        if self.scheme == "side_info":
            if self.crossover is None and self.joint is None:
                raise ValueError("side_info sweeps need a crossover or a joint matrix")
            self.joint_distribution()

    @classmethod
    def from_dict(cls, obj: dict) -> "SweepConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)

    def joint_distribution(self) -> JointDistribution:
        if self.joint is not None:
            matrix = np.asarray(self.joint, dtype=float)
            symbols = self.tau_symbols
            if symbols is None:
                symbols = (-1, 1) if matrix.shape[-1] == 2 else range(matrix.shape[-1])
            return JointDistribution(matrix, tuple(symbols), self.eps)
        return JointDistribution.binary_symmetric(self.crossover, self.p, self.eps)


@dataclass
class SweepPoint:
    rate: float | tuple
    levels: tuple[int, ...]
    trials: int
    mean_omega: float
    se_omega: float
    frac_ambiguous: float
    frac_unique: float
    mean_decode_ns: float | None = None
    exact_counts: bool = True
    note: str = ""

    @property
    def x(self) -> float:
        """Scalar position on the rate axis: R, or the sum of the row rates."""
        return float(sum(self.rate)) if isinstance(self.rate, tuple) else float(self.rate)


@dataclass
class SweepResult:
    config: SweepConfig
    points: list[SweepPoint]
    metadata: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for pt in self.points:
            rate = "/".join(f"{r:g}" for r in pt.rate) if isinstance(pt.rate, tuple) else f"{pt.rate:g}"
            writer.writerow([
                self.config.scheme, self.config.n, rate, "/".join(map(str, pt.levels)),
                pt.trials, _fmt(pt.mean_omega), _fmt(pt.se_omega),
                _fmt(pt.frac_ambiguous), _fmt(pt.frac_unique),
                "NA" if pt.mean_decode_ns is None else f"{pt.mean_decode_ns:.0f}",
            ])
        return buf.getvalue()

    def metadata_json(self) -> dict:
        meta = {"config": asdict(self.config), "version": __version__,
                "notes": {i: pt.note for i, pt in enumerate(self.points) if pt.note}}
        meta.update(self.metadata)
        return meta

    def write(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())
        with open(_meta_path(path), "w") as fh:
            json.dump(self.metadata_json(), fh, indent=2, sort_keys=True)


def _meta_path(path: str) -> str:
    return (path[:-4] if path.endswith(".csv") else path) + ".meta.json"


def _fmt(x: float) -> str:
    return "nan" if x is None or math.isnan(x) else f"{x:.10g}"


# --------------------------------------------------------------------------
# one trial


def _levels(config: SweepConfig, rate) -> tuple[int, ...]:
    if isinstance(rate, tuple):
        return tuple(level_for_rate(config.n, r) for r in rate)
    return (level_for_rate(config.n, rate),)


def _kary_canonical(n: int, probs: Sequence[float]) -> SourceSequence:
    counts = [int(round(p * n)) for p in probs[:-1]]
    counts.append(n - sum(counts))
    if counts[-1] < 0:
        raise ValueError("rounded symbol counts exceed N")
    symbols = [s for s, c in enumerate(counts, start=1) for _ in range(c)]
    return SourceSequence.kary(symbols, len(probs))


def _draw_source(config: SweepConfig, rng: np.random.Generator):
    scheme, n = config.scheme, config.n
    if scheme in ("constrained", "multi"):
        return canonical_binary(n, int(round(config.p * n))), None
    if scheme == "unconstrained":
        return SourceSequence.binary(np.where(rng.random(n) < config.p, 1, -1)), None
    if scheme == "kary":
        return _kary_canonical(n, config.probs), None
    joint = config.joint_distribution()
    for _ in range(10_000):
        sigma, tau = joint.sample(n, rng)
        if not config.typical_only or joint.is_typical(sigma, tau):
            return sigma, tau
    raise RuntimeError("could not draw a jointly typical pair")


def run_trial(config: SweepConfig, grid_index: int, trial: int) -> tuple[int, str, bool, int]:
    """Encode/decode one fresh instance; returns (omega, kind, exact, decode ns)."""
    rate = config.rates[grid_index]
    levels = _levels(config, rate)
    if config.scheme == "kary":
        rows = levels
    elif config.scheme == "multi":
        rows = levels
    else:
        rows = levels[:1]
    weights = sample_weight_rows(config.n, rows, derive_seed(config.seed, grid_index, trial, 0))
    rng = np.random.Generator(np.random.Philox(derive_seed(config.seed, grid_index, trial, 1)))
    seq, tau = _draw_source(config, rng)
    msg = encode(config.scheme, seq, weights)
    joint = config.joint_distribution() if config.scheme == "side_info" else None
    t0 = time.perf_counter_ns()
    out = decode(msg, weights, config.strategy, 1, tau=tau, joint=joint)
    ns = time.perf_counter_ns() - t0
    return out.count, out.kind, out.exact, ns


def _run_block(args) -> list[tuple[int, str, bool, int]]:
    config, g, start, stop = args
    return [run_trial(config, g, t) for t in range(start, stop)]


def _trials(config: SweepConfig, g: int, pool) -> list[tuple[int, str, bool, int]]:
    if pool is None:
        return _run_block((config, g, 0, config.trials))
    step = max(1, config.trials // (4 * config.threads))
    blocks = [(config, g, s, min(s + step, config.trials)) for s in range(0, config.trials, step)]
    out = []
    for part in pool.map(_run_block, blocks):
        out.extend(part)
    return out


def run_ambiguity_sweep(config: SweepConfig) -> SweepResult:
    """Estimate mean Omega and the ambiguity fraction at each grid rate."""
    points = []
    pool = ProcessPoolExecutor(config.threads) if config.threads > 1 else None
    try:
        for g, rate in enumerate(config.rates):
            try:
                levels = _levels(config, rate)
                rows = _trials(config, g, pool)
            except (GuardError, OverflowError) as exc:
                points.append(SweepPoint(rate, (), config.trials, math.nan, math.nan,
                                         math.nan, math.nan, None, False, f"infeasible: {exc}"))
                continue
            omega = np.array([r[0] for r in rows], dtype=float)
            kinds = [r[1] for r in rows]
            n_found = sum(k == NOT_FOUND for k in kinds)
            note = f"{n_found} not_found trials" if n_found else ""
            points.append(SweepPoint(
                rate, levels, config.trials, float(omega.mean()),
                float(omega.std(ddof=1) / math.sqrt(len(omega))) if len(omega) > 1 else 0.0,
                sum(k == AMBIGUOUS for k in kinds) / len(kinds),
                sum(k == UNIQUE for k in kinds) / len(kinds),
                float(np.mean([r[3] for r in rows])) if config.record_timing else None,
                all(r[2] for r in rows), note,
            ))
    finally:
        if pool is not None:
            pool.shutdown()
    return SweepResult(config, points)


# --------------------------------------------------------------------------


def estimate_expected_omega(scheme: str, n: int, p: float, rate: float | None = None,
                            trials: int = 10_000, seed: int = 0,
                            level: int | None = None) -> tuple[float, float]:
    """Sample mean and standard error of brute-force Omega over weight draws.

    Constrained trials fix the canonical sequence with round(pN) leading +1s;
    unconstrained trials also draw the source sequence i.i.d. Bernoulli(p).
    """
    if level is None:
        if rate is None:
            raise ValueError("give a rate or a level")
        level = level_for_rate(n, rate)
    rng = np.random.Generator(np.random.Philox(int(seed)))
    W = rng.integers(1, level, size=(trials, n), endpoint=True)
    if scheme == "constrained":
        omega = omega_constrained_batch(W, canonical_binary(n, int(round(p * n))))
    elif scheme == "unconstrained":
        plus = (rng.random((trials, n)) < p).astype(np.int64)
        omega = omega_unconstrained_batch(W, plus)
    else:
        raise ValueError("expected-omega estimation covers constrained and unconstrained")
    omega = omega.astype(float)
    se = float(omega.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return float(omega.mean()), se


@dataclass(frozen=True)
class Transition:
    rate: float
    uncertainty: float


def locate_transition(sweep: SweepResult | Sequence[SweepPoint]) -> Transition:
    """Linear interpolation of the first downward crossing of frac_ambiguous = 1/2."""
    points = sweep.points if isinstance(sweep, SweepResult) else list(sweep)
    pts = sorted((p for p in points if not math.isnan(p.frac_ambiguous)), key=lambda p: p.x)
    for a, b in zip(pts, pts[1:]):
        fa, fb = a.frac_ambiguous, b.frac_ambiguous
        if fa >= 0.5 > fb:
            r = a.x + (fa - 0.5) / (fa - fb) * (b.x - a.x)
            return Transition(r, b.x - a.x)
    raise ValueError("no crossing of frac_ambiguous = 1/2 in the sweep range")
