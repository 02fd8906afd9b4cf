"""Closed-form rate functions and critical rates.

Units: ``phi``, ``psi``, ``xi`` and ``relative_entropy`` return nats;
``binary_entropy``, rates and critical rates are in bits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

INF = math.inf

# Below this t the stationarity map 1/t - 1/(e^t - 1) is evaluated by its series.
_SERIES_T = 1e-4
_BISECT_RTOL = 1e-12
_BISECT_MAXITER = 400


def _check_prob(x: float, name: str = "p") -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0 or math.isnan(x):
        raise ValueError(f"{name}={x} outside [0, 1]")
    return x


def _h_bits(p):
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -(p * np.log2(p)) - (1 - p) * np.log2(1 - p)
    out = np.where((p == 0) | (p == 1), 0.0, out)
    return out


def binary_entropy(p: float) -> float:
    """h(p) in bits, with 0 log 0 = 0."""
    return float(_h_bits(_check_prob(p)))


def entropy(probs: Sequence[float]) -> float:
    """Shannon entropy of a probability vector, in bits."""
    p = np.asarray(probs, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def relative_entropy(beta: float, p: float) -> float:
    """Binary divergence D(beta||p) in nats; +inf off the support."""
    beta = _check_prob(beta, "beta")
    p = _check_prob(p)
    total = 0.0
    for b, q in ((beta, p), (1.0 - beta, 1.0 - p)):
        if b == 0.0:
            continue
        if q == 0.0:
            return INF
        total += b * math.log(b / q)
    return max(total, 0.0)


def conditional_entropy(joint) -> float:
    """H(X|Y) in bits for a joint matrix with rows X and columns Y."""
    P = np.asarray(joint, dtype=float)
    return entropy(P.ravel()) - entropy(P.sum(axis=0))


# --------------------------------------------------------------------------
# Phi: Cramer rate function of the mean of uniform[0,1] variables.


def _stationarity(t):
    """1/t - 1/(e^t - 1), decreasing from 1/2 (t -> 0) to 0 (t -> inf)."""
    t = np.asarray(t, dtype=float)
    small = t < _SERIES_T
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        direct = 1.0 / t - 1.0 / np.expm1(t)
    series = 0.5 - t / 12.0 + t**3 / 720.0
    return np.where(small, series, direct)


def _objective(t, zeta):
    """ln t - ln(1 - e^{-t}) - zeta t, continuous at t = 0."""
    t = np.asarray(t, dtype=float)
    small = t < _SERIES_T
    ts = np.where(small, 1.0, t)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.log(ts) - np.log(-np.expm1(-ts))
    series = np.log1p(t / 2.0 + t * t / 12.0)
    return np.where(small, series, direct) - zeta * t


def _stationarity_slope(t):
    t = np.asarray(t, dtype=float)
    small = t < _SERIES_T
    ts = np.where(small, 1.0, t)
    with np.errstate(over="ignore"):
        em = np.expm1(-ts)
        direct = -1.0 / ts**2 + np.exp(-ts) / em**2
    return np.where(small, -1.0 / 12.0 + t * t / 240.0, direct)


def _solve_t(zeta: np.ndarray) -> np.ndarray:
    """Stationary t of each zeta in (0, 1/2], kept inside a shrinking bracket.

    Each step takes the Newton proposal when it lands strictly inside the
    current bracket and bisects otherwise.
    """
    zeta = np.asarray(zeta, dtype=float)
    lo = np.zeros_like(zeta)
    hi = np.where(zeta < 0.5, 2.0 / np.maximum(zeta, 1e-300), 0.0)
    # starting points from the two asymptotes g ~ 1/t and g ~ 1/2 - t/12
    t = np.where(zeta < 0.25, 1.0 / np.maximum(zeta, 1e-300), 12.0 * (0.5 - zeta))
    t = np.minimum(t, hi)
    active = np.ones(zeta.shape, dtype=bool)
    for _ in range(_BISECT_MAXITER):
        g = _stationarity(t) - zeta
        # g is decreasing: g > 0 means the root lies to the right
        lo = np.where(g > 0, t, lo)
        hi = np.where(g > 0, hi, t)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = t - g / _stationarity_slope(t)
        inside = (newton > lo) & (newton < hi) & np.isfinite(newton)
        t_new = np.where(inside, newton, 0.5 * (lo + hi))
        # |g| at rounding level means t cannot be resolved further (near zeta = 1/2)
        hit = np.abs(g) <= 2e-16
        t_new = np.where(hit | ~active, t, t_new)
        active &= ~(hit | (np.abs(t_new - t) <= _BISECT_RTOL * t_new)
                    | (hi - lo <= _BISECT_RTOL * hi))
        t = t_new
        if not active.any():
            break
    return t


@dataclass(frozen=True)
class SaddleSolution:
    zeta: float
    t_star: float
    phi_value: float


def phi_values(zeta) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized Phi: returns (values, t_star) for an array of zeta in (0,1).

    Values above 1/2 are mirrored, Phi(zeta) = Phi(1 - zeta).  Entries at 0 or
    1 give +inf.
    """
    zeta = np.asarray(zeta, dtype=float)
    z = np.minimum(zeta, 1.0 - zeta)
    edge = z <= 0.0
    zc = np.where(edge, 0.25, z)
    t = _solve_t(zc)
    t = np.where(zc >= 0.5, 0.0, t)
    val = np.maximum(_objective(t, zc), 0.0)
    val = np.where(zc >= 0.5, 0.0, val)
    return np.where(edge, INF, val), np.where(edge, INF, t)


def phi(zeta: float) -> SaddleSolution:
    """Phi(zeta) = max_{t>=0} [ln t - ln(1-e^{-t}) - zeta t] (nats)."""
    zeta = float(zeta)
    if not 0.0 < zeta < 1.0:
        raise ValueError(f"zeta={zeta} outside (0, 1)")
    val, t = phi_values(np.array([zeta]))
    return SaddleSolution(zeta, float(t[0]), float(val[0]))


def phi_legendre(zeta: float) -> float:
    """Phi via the Legendre transform sup_s [s zeta - ln((e^s - 1)/s)].

    Independent of the bisection route; used as a cross-check.
    """

    def neg(s):
        if abs(s) < 1e-8:
            log_mgf = s / 2.0
        elif s > 0:
            log_mgf = s + math.log(-math.expm1(-s)) - math.log(s)
        else:
            log_mgf = math.log(-math.expm1(s)) - math.log(-s)
        return -(s * zeta - log_mgf)

    span = 4.0 / min(zeta, 1.0 - zeta)
    res = minimize_scalar(neg, bounds=(-span, span), method="bounded",
                          options={"xatol": 1e-12, "maxiter": 2000})
    return -float(res.fun)


# --------------------------------------------------------------------------
# psi, xi, critical rate of the unconstrained scheme


def _psi_objective(x, beta):
    return beta * phi_values(x / beta)[0] + (1.0 - beta) * phi_values(x / (1.0 - beta))[0]


def psi_values(beta, tol: float = 1e-10) -> np.ndarray:
    """Vectorized psi over an array of beta in [0, 1] (nats)."""
    beta = np.asarray(beta, dtype=float)
    edge = (beta <= 0.0) | (beta >= 1.0)
    b = np.where(edge, 0.5, beta)
    lo = np.zeros_like(b)
    hi = np.minimum(b, 1.0 - b)
    # ternary search; the objective is convex in x
    while np.any(hi - lo > tol):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        left = _psi_objective(m1, b) < _psi_objective(m2, b)
        hi = np.where(left, m2, hi)
        lo = np.where(left, lo, m1)
    val = np.maximum(_psi_objective(0.5 * (lo + hi), b), 0.0)
    return np.where(edge, INF, val)


def psi(beta: float) -> float:
    """psi(beta) = min_x [beta Phi(x/beta) + (1-beta) Phi(x/(1-beta))] (nats)."""
    beta = _check_prob(beta, "beta")
    return float(psi_values(np.array([beta]))[0])


def _divergence_values(beta: np.ndarray, p: float) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(beta > 0, beta * np.log(beta / p), 0.0)
        b = np.where(beta < 1, (1 - beta) * np.log((1 - beta) / (1 - p)), 0.0)
    return np.maximum(a + b, 0.0)


def xi(p: float, grid_step: float = 1e-3, tol: float = 1e-9) -> float:
    """xi(p) = min_beta [D(beta||p) + psi(beta)] (nats).

    The objective is not known to be unimodal in beta, so the whole of [0,1]
    is scanned on a coarse grid first; the best cell is then refined by
    successively finer local grids down to ``tol``.
    """
    p = _check_prob(p)
    if p in (0.0, 1.0):
        return INF
    n = int(round(1.0 / grid_step))
    betas = np.linspace(0.0, 1.0, n + 1)
    vals = _divergence_values(betas, p) + psi_values(betas)
    i = int(np.argmin(vals))
    best = float(vals[i])
    lo, hi = betas[max(i - 1, 0)], betas[min(i + 1, n)]
    while hi - lo > tol:
        local = np.linspace(max(lo, 1e-15), min(hi, 1.0 - 1e-15), 41)
        lv = _divergence_values(local, p) + psi_values(local)
        j = int(np.argmin(lv))
        best = min(best, float(lv[j]))
        lo, hi = local[max(j - 1, 0)], local[min(j + 1, 40)]
    return best


def critical_rate_unconstrained(p: float, **kw) -> float:
    """R_c = log2(1 + e^{-xi(p)}) in bits; -inf when xi is infinite."""
    x = xi(p, **kw)
    if math.isinf(x):
        return -INF
    return math.log2(1.0 + math.exp(-x))


# --------------------------------------------------------------------------
# Constrained scheme and K-ary allocation


def _composition_growth(p: float) -> tuple[float, float]:
    q = 1.0 - p
    top = min(p, q)

    def neg(alpha):
        return -(p * float(_h_bits(alpha / p)) + q * float(_h_bits(alpha / q)))

    res = minimize_scalar(neg, bounds=(0.0, top), method="bounded",
                          options={"xatol": 1e-12, "maxiter": 1000})
    return -float(res.fun), float(res.x)


def composition_growth_exponent(p: float) -> float:
    """sup_{0<alpha<min(p,q)} [p h(alpha/p) + q h(alpha/q)] in bits; equals h(p)."""
    p = _check_prob(p)
    if p in (0.0, 1.0):
        raise ValueError("composition growth exponent needs 0 < p < 1")
    return _composition_growth(p)[0]


@dataclass(frozen=True)
class RateAllocation:
    stage_rates: tuple[float, ...]

    @property
    def total(self) -> float:
        return math.fsum(self.stage_rates)


def kary_rate_allocation(probs: Sequence[float]) -> RateAllocation:
    """Per-stage thresholds of the staged K-ary code (bits/symbol).

    Stage s needs (1 - p_1 - ... - p_{s-1}) h(p_s / (1 - p_1 - ... - p_{s-1})).
    """
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or len(p) < 2:
        raise ValueError("need a probability vector of length K >= 2")
    if np.any(p < 0) or abs(math.fsum(p) - 1.0) > 1e-12:
        raise ValueError("probabilities must be nonnegative and sum to 1")
    rates = []
    remaining = 1.0
    for ps in map(float, p[:-1]):
        if remaining <= 0.0:
            rates.append(0.0)
            continue
        rates.append(remaining * float(_h_bits(min(ps / remaining, 1.0))))
        remaining -= ps
    return RateAllocation(tuple(rates))


# --------------------------------------------------------------------------

RATE_FUNCTIONS: dict[str, Callable[[float], float]] = {
    "h": binary_entropy,
    "phi": lambda z: phi(z).phi_value,
    "psi": psi,
    "xi": xi,
    "Rc": critical_rate_unconstrained,
}


def tabulate(name: str, grid: Sequence[float]) -> list[tuple[float, float]]:
    """Evaluate one of h, phi, psi, xi, Rc over a grid."""
    try:
        f = RATE_FUNCTIONS[name]
    except KeyError:
        raise ValueError(f"unknown rate function {name!r}; choose from {sorted(RATE_FUNCTIONS)}")
    return [(float(x), f(x)) for x in grid]
