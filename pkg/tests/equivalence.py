"""Random codec instances and the exhaustive-vs-MITM comparison used by several tests."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from subsetcodec.codec import EncodedMessage, JointDistribution, DecodeOutcome, decode, encode
from subsetcodec.instance import SourceSequence, WeightSet


@dataclass
class Instance:
    scheme: str
    weights: WeightSet
    seq: SourceSequence
    msg: EncodedMessage
    truthful: bool
    tau: np.ndarray | None = None
    joint: JointDistribution | None = None


def _level(rng, n: int) -> int:
    return max(1, int(2.0 ** (rng.uniform(0.0, 1.3) * n)))


def random_instances(scheme: str, count: int, rng: np.random.Generator, n_max: int = 16):
    for _ in range(count):
        n = int(rng.integers(1, n_max + 1))
        tau = joint = None
        if scheme == "kary":
            k = int(rng.integers(2, 5))
            seq = SourceSequence.kary(rng.integers(1, k + 1, size=n), k)
            rows = k - 1
        else:
            rows = int(rng.integers(1, 4)) if scheme == "multi" else 1
            if scheme == "side_info":
                eps = [None, 0.5 / n, 1.0][int(rng.integers(3))]
                joint = JointDistribution.binary_symmetric(
                    float(rng.uniform(0.05, 0.45)), float(rng.uniform(0.2, 0.8)), eps)
                seq, tau = joint.sample(n, rng)
            else:
                seq = SourceSequence.binary(np.where(rng.random(n) < 0.5, 1, -1))
        levels = [_level(rng, n) for _ in range(rows)]
        weights = WeightSet.from_rows([rng.integers(1, lv, size=n, endpoint=True) for lv in levels],
                                      levels)
        msg = encode(scheme, seq, weights)
        truthful = rng.random() < 0.8
        if not truthful:
            shift = rng.integers(-3, 4, size=len(msg.sums))
            msg = EncodedMessage(msg.scheme, msg.n, tuple(np.add(msg.sums, shift)), msg.m,
                                 msg.counts, msg.k)
        if joint is not None:
            # an atypical source lies outside the decoder's candidate set
            truthful = truthful and joint.is_typical(seq, tau)
        yield Instance(scheme, weights, seq, msg, truthful, tau, joint)


def strategy_outcomes_agree(inst: Instance) -> tuple[bool, DecodeOutcome]:
    a = decode(inst.msg, inst.weights, "exhaustive", 3, inst.tau, inst.joint)
    b = decode(inst.msg, inst.weights, "mitm", 3, inst.tau, inst.joint)
    return a == b, b
