"""Self-check suites behind ``subsetcodec verify``.

Each suite returns a list of ``Check`` records; a suite passes when every
check does.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import counting, ratefuncs
from .experiments import estimate_expected_omega


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}" + (f"  ({self.detail})" if self.detail else "")


def suite_lambda(n_max: int = 12, l_max: int = 64) -> list[Check]:
    """DP table against inclusion-exclusion, totals and reflection symmetry."""
    mismatches, bad_total, bad_reflect = [], [], []
    for L in range(1, l_max + 1):
        for row in counting.lambda_rows(n_max, L)[1:]:
            n = row.n
            for s, c in row.counts.items():
                if c != counting.lambda_inclusion_exclusion(n, L, s):
                    mismatches.append((n, L, s))
                if c != row[n * (L + 1) - s]:
                    bad_reflect.append((n, L, s))
            if row.total != L ** n:
                bad_total.append((n, L))
    return [
        Check("lambda DP == inclusion-exclusion", not mismatches, f"{len(mismatches)} mismatches"),
        Check("sum_s Lambda = L^n", not bad_total, f"{len(bad_total)} bad totals"),
        Check("reflection s -> n(L+1)-s", not bad_reflect, f"{len(bad_reflect)} asymmetric"),
    ]


def suite_appendix_a() -> list[Check]:
    out = []
    grid = np.linspace(0.02, 0.98, 49)
    for n, L in ((4, 50), (2, 1000)):
        rep = counting.lattice_volume_bounds_check(n, L, grid)
        out.append(Check(f"lattice/slab sandwich n={n} L={L}", rep.all_hold,
                         f"worst count/volume ratio {rep.worst_ratio:.4f}"))
    return out


def suite_appendix_b(points: int = 10_000) -> list[Check]:
    out = []
    for r in (0.01, 0.1, 1.0, 10.0):
        grid = np.linspace(-50.0, 50.0, points + 1)  # odd length puts 0 on the grid
        rep = counting.saddle_dominance_check(r, grid)
        out.append(Check(f"saddle dominance r={r:g}", rep.passed,
                         f"min gap {rep.min_gap:.3e} at w={rep.argmin_omega:.3g}, "
                         f"|gap(0)|={rep.gap_at_zero:.1e}"))
    return out


def _omega_check(label: str, exact: float, trials: int, seed: int, scheme: str,
                 n: int, p: float, L: int) -> Check:
    mean, se = estimate_expected_omega(scheme, n, p, level=L, trials=trials, seed=seed)
    z = abs(mean - exact) / se if se > 0 else (0.0 if mean == exact else math.inf)
    return Check(label, z < 4.0, f"exact {exact:.5f}, MC {mean:.5f} +- {se:.5f}, z={z:.2f}")


def suite_omega(trials: int = 100_000, seed: int = 20240) -> list[Check]:
    """Exact expected Omega against brute-force Monte Carlo means."""
    out = [
        Check("<Omega>(N+=1, N-=1, L=1) == 2",
              counting.expected_omega_constrained(1, 1, 1).value == 2),
        Check("<Omega>(N+=1, N-=1, L=2) == 3/2",
              counting.expected_omega_constrained(1, 1, 2).value == counting.Fraction(3, 2)),
    ]
    for i, L in enumerate((4, 16, 64)):
        exact = float(counting.expected_omega_constrained(4, 4, L).value)
        out.append(_omega_check(f"constrained N=8 p=1/2 L={L}", exact, trials, seed + i,
                                "constrained", 8, 0.5, L))
    exact = float(counting.expected_omega_unconstrained(6, 0.5, 8).value)
    out.append(_omega_check("unconstrained N=6 p=1/2 L=8", exact, trials, seed + 10,
                            "unconstrained", 6, 0.5, 8))
    return out


def suite_ratefuncs() -> list[Check]:
    out = []
    zs = np.linspace(0.02, 0.98, 25)
    diff = max(abs(ratefuncs.phi(z).phi_value - ratefuncs.phi_legendre(z)) for z in zs)
    out.append(Check("Phi saddle == Legendre transform", diff < 1e-8, f"max diff {diff:.1e}"))
    betas = np.linspace(0.05, 0.95, 19)
    diff = float(np.max(np.abs(ratefuncs.psi_values(betas) - ratefuncs.phi_values(betas)[0])))
    out.append(Check("psi(beta) == Phi(beta)", diff < 1e-8, f"max diff {diff:.1e}"))
    rc = ratefuncs.critical_rate_unconstrained(0.5)
    out.append(Check("R_c(1/2) == 1", abs(rc - 1.0) < 1e-6, f"R_c={rc:.10f}"))
    ok = all(ratefuncs.binary_entropy(p) <= ratefuncs.critical_rate_unconstrained(p) <= 1.0
             for p in (0.1, 0.3))
    out.append(Check("h(p) <= R_c(p) <= 1", ok))
    g = max(abs(ratefuncs.composition_growth_exponent(p) - ratefuncs.binary_entropy(p))
            for p in np.linspace(0.1, 0.9, 9))
    out.append(Check("composition growth == h(p)", g < 1e-8, f"max diff {g:.1e}"))
    return out


SUITES: dict[str, Callable[[], list[Check]]] = {
    "lambda": suite_lambda,
    "appendixA": suite_appendix_a,
    "appendixB": suite_appendix_b,
    "omega": suite_omega,
    "ratefuncs": suite_ratefuncs,
}


def run_suite(name: str) -> list[Check]:
    if name == "all":
        return [c for fn in SUITES.values() for c in fn()]
    try:
        return SUITES[name]()
    except KeyError:
        raise ValueError(f"unknown suite {name!r}") from None
