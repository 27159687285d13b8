"""Pair-number statistics and polarization coincidence probabilities for
threshold detectors with per-photon efficiency alpha."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
from scipy.special import gammaln, logsumexp

from .errors import AlphaOutOfRange, BothZero, TruncationFailure
from .jsa import as_matrix
from .matcalc import log_sech

LOG_SPACE_FROM = 20


def detection_prob(x, alpha: float):
    """D_x = 1 - (1 - alpha)^x."""
    if not 0.0 <= alpha <= 1.0:
        raise AlphaOutOfRange(f"alpha must lie in [0, 1], got {alpha}")
    x = np.asarray(x)
    out = -np.expm1(x * np.log1p(-alpha)) if alpha < 1 else (x > 0).astype(float)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class DetectorModel:
    alpha: float
    s_max: int = 40
    tail_tol: float = 1e-10

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise AlphaOutOfRange(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.s_max < 1:
            raise ValueError("s_max must be positive")


@dataclass(frozen=True)
class PairDistribution:
    probs: np.ndarray
    truncation_mass: float

    @property
    def s_max(self) -> int:
        return self.probs.size - 1

    def mean(self) -> float:
        return float(np.arange(self.probs.size) @ self.probs)


def _ascending_partitions(n):
    # Kelleher's accelerated ascending composition generator
    a = [0] * (n + 1)
    k = 1
    y = n - 1
    while k != 0:
        x = a[k - 1] + 1
        k -= 1
        while 2 * x <= y:
            a[k] = x
            y -= x
            k += 1
        l = k + 1
        while x <= y:
            a[k] = x
            a[l] = y
            yield a[:k + 2]
            x += 1
            y -= 1
        a[k] = x + y
        y = x + y - 1
        yield a[:k + 1]


@lru_cache(maxsize=None)
def integer_partitions(s: int) -> tuple:
    """All partitions of s as multiplicity tuples (q_1, ..., q_s)."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    if s == 0:
        return ((),)
    out = []
    for parts in _ascending_partitions(s):
        q = [0] * s
        for u in parts:
            q[u - 1] += 1
        out.append(tuple(q))
    return tuple(out)


@lru_cache(maxsize=None)
def _partition_array(s: int) -> np.ndarray:
    arr = np.array(integer_partitions(s), dtype=np.int64).reshape(-1, s)
    arr.setflags(write=False)
    return arr


def _tanh2_spectrum(betaJ):
    s = sla.svdvals(as_matrix(betaJ))
    return np.tanh(s) ** 2, 2 * float(np.sum(log_sech(s)))


def _power_sums(t2, s_max):
    u = np.arange(1, s_max + 1)
    return np.array([np.sum(t2 ** k) for k in u]) if t2.size else np.zeros(s_max)


def pair_probability(betaJ, s: int) -> float:
    """P_s from the sum over integer partitions of s."""
    t2, log_w2 = _tanh2_spectrum(betaJ)
    if s == 0:
        return math.exp(log_w2)
    p = _power_sums(t2, s)
    q = _partition_array(s)
    u = np.arange(1, s + 1)
    if s <= LOG_SPACE_FROM:
        terms = np.prod((p / u) ** q / np.exp(gammaln(q + 1)), axis=1)
        return float(math.exp(log_w2) * np.sum(terms))
    with np.errstate(divide="ignore"):
        logp = np.log(p / u)
    contrib = np.where(q > 0, q * logp, 0.0) - gammaln(q + 1)
    return float(math.exp(log_w2 + logsumexp(np.sum(contrib, axis=1))))


def pair_distribution(betaJ, s_max: int = 40) -> PairDistribution:
    """P_0 ... P_smax from the power-sum recursion s P_s = sum_u p_u P_{s-u}.

    Equivalent to the partition sum (both expand det(1 - z tanh^2 Q)^-1) but
    O(s_max^2); every term is nonnegative.
    """
    t2, log_w2 = _tanh2_spectrum(betaJ)
    p = _power_sums(t2, s_max)
    probs = np.zeros(s_max + 1)
    probs[0] = math.exp(log_w2)
    for s in range(1, s_max + 1):
        probs[s] = np.dot(p[:s], probs[s - 1::-1]) / s
    mass = max(0.0, 1.0 - float(np.sum(probs)))
    return PairDistribution(probs=probs, truncation_mass=mass)


def adaptive_distribution(betaJ, tail_tol: float = 1e-10, s_start: int = 40, s_limit: int = 5000):
    """Grow s_max until the truncated mass falls below ``tail_tol``."""
    s_max = s_start
    while True:
        dist = pair_distribution(betaJ, s_max)
        if dist.truncation_mass <= tail_tol or s_max >= s_limit:
            return dist
        s_max = min(2 * s_max, s_limit)


def coincidence_from_distribution(dist: PairDistribution, alpha: float, dist_V=None):
    """(P_HH, P_HV) from pair distributions of the H and V polarizations."""
    D = detection_prob(np.arange(dist.probs.size), alpha)
    p_hh = float(np.sum(D[1:] ** 2 * dist.probs[1:]))
    single_h = float(np.sum(D[1:] * dist.probs[1:]))
    if dist_V is None:
        single_v = single_h
    else:
        Dv = detection_prob(np.arange(dist_V.probs.size), alpha)
        single_v = float(np.sum(Dv[1:] * dist_V.probs[1:]))
    return p_hh, single_h * single_v


def coincidence_probs(betaJ, det: DetectorModel, betaJ_V=None):
    """(P_HH, P_HV) from the truncated pair-number sums.

    ``betaJ_V`` gives the V polarization its own squeezing matrix; by default
    both polarizations share ``betaJ``.
    """
    dist = pair_distribution(betaJ, det.s_max)
    _check_tail(dist, det)
    dist_v = None
    if betaJ_V is not None:
        dist_v = pair_distribution(betaJ_V, det.s_max)
        _check_tail(dist_v, det)
    return coincidence_from_distribution(dist, det.alpha, dist_v)


def _check_tail(dist, det):
    if dist.truncation_mass > det.tail_tol:
        raise TruncationFailure(
            f"tail mass {dist.truncation_mass:.3e} above {det.tail_tol:.1e} at s_max={det.s_max}")


def perfect_efficiency_probs(betaJ):
    """alpha = 1: P_HH = 1 - detW^2, P_HV = (1 - detW^2)^2."""
    _, log_w2 = _tanh2_spectrum(betaJ)
    p = -math.expm1(log_w2)
    return p, p * p


def low_efficiency_probs(betaJ, alpha: float):
    """Leading order in alpha: alpha^2 (N + N^2 + tr sinh^4 Q) and alpha^2 N^2."""
    s = sla.svdvals(as_matrix(betaJ))
    sh2 = np.sinh(s) ** 2
    N = float(np.sum(sh2))
    return alpha ** 2 * (N + N ** 2 + float(np.sum(sh2 ** 2))), alpha ** 2 * N ** 2


def weak_window_probs(N_J: float, alpha: float):
    """Coincidences to second order in the mean pair number N_J."""
    if N_J > 0.1:
        warnings.warn(f"weak-window expansion used with N_J={N_J:.3g} > 0.1", stacklevel=2)
    d1 = detection_prob(1, alpha)
    d2 = detection_prob(2, alpha)
    return d1 ** 2 * N_J + (d2 ** 2 / 2 - d1 ** 2) * N_J ** 2, d1 ** 2 * N_J ** 2


def takesue_probs(mu: float, alpha: float):
    """Two-mode reference with mean photon number mu per pulse, small alpha."""
    return alpha ** 2 * (mu / 2 + mu ** 2 / 2), alpha ** 2 * mu ** 2 / 4


def visibility(P_HH: float, P_HV: float) -> float:
    total = P_HH + P_HV
    if total == 0:
        raise BothZero("visibility undefined when both probabilities vanish")
    return (P_HH - P_HV) / total
