"""Whittaker-Shannon modes, time-window partitions, continuous-time
covariances and weak-squeezing quantities."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import WindowOutOfRange, ZeroState
from .jsa import BetaMatrix, as_matrix
from .matcalc import MomentSet, Regime, disentangle

# sinc tails beyond this many tau are dropped in covariance sums
SINC_CUTOFF = 200


def ws_mode(n, tau: float, t):
    """chi_n(t) = sinc(pi (t - n tau) / tau) / sqrt(tau)."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    x = (np.asarray(t, dtype=float) - np.asarray(n) * tau) / tau
    return np.sinc(x) / math.sqrt(tau)


def sinc_basis(indices, tau: float, t, cutoff: float = SINC_CUTOFF) -> np.ndarray:
    """Matrix of chi_n(t) with shape (len(t), len(indices)); tails past ``cutoff`` tau are zeroed."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    x = t[:, None] / tau - np.asarray(indices)[None, :]
    out = np.sinc(x) / math.sqrt(tau)
    out[np.abs(x) > cutoff] = 0.0
    return out


def round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


@dataclass(frozen=True)
class WindowSpec:
    t_J: float
    d_J: int
    n_J: int

    def __post_init__(self):
        if int(self.d_J) != self.d_J or self.d_J < 1:
            raise ValueError("d_J must be a positive integer")

    @classmethod
    def at(cls, t_J: float, d_J: int, tau: float) -> "WindowSpec":
        return cls(t_J=float(t_J), d_J=int(d_J), n_J=round_half_away(t_J / tau))

    @property
    def first(self) -> int:
        return self.n_J - (self.d_J - 1) // 2

    @property
    def last(self) -> int:
        return self.n_J + self.d_J // 2

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.first, self.last + 1)


def window_partition(beta: BetaMatrix, spec: WindowSpec):
    """Return (beta^J, neglected_mass).

    neglected_mass is the squared weight of entries coupling the window to
    the outside, relative to all entries in rows or columns of the window.
    """
    lo = spec.first - beta.n_min
    hi = spec.last - beta.n_min + 1
    if lo < 0 or hi > beta.size:
        raise WindowOutOfRange(
            f"window [{spec.first}, {spec.last}] outside beta range [{beta.n_min}, {beta.n_max}]")
    b = beta.values
    sub = b[lo:hi, lo:hi]
    mask = np.zeros(beta.size, dtype=bool)
    mask[lo:hi] = True
    touching = mask[:, None] | mask[None, :]
    inside = mask[:, None] & mask[None, :]
    w = np.abs(b) ** 2
    total = float(np.sum(w[touching]))
    outside = float(np.sum(w[touching & ~inside]))
    neglected = outside / total if total > 0 else 0.0
    betaJ = BetaMatrix(values=sub.copy(), beta_circ=beta.beta_circ, n_min=spec.first, tau=beta.tau)
    return betaJ, neglected


def covariance(moments: MomentSet, indices, tau: float, t, t2) -> dict:
    """Continuous-time moments sum_nm chi_n(t) X_nm chi_m(t2) for each moment matrix.

    Returns a dict keyed ``N``, ``M`` (degenerate) or ``Na``, ``Nb``, ``Mab``.
    Scalar t, t2 give scalars; arrays broadcast to an outer grid.
    """
    scalar = np.ndim(t) == 0 and np.ndim(t2) == 0
    X1 = sinc_basis(indices, tau, t)
    X2 = sinc_basis(indices, tau, t2)
    if moments.regime is Regime.DEGENERATE:
        mats = {"N": moments.Nd, "M": moments.Md}
    else:
        mats = {"Na": moments.Na, "Nb": moments.Nb, "Mab": moments.Mab}
    out = {}
    for key, X in mats.items():
        val = X1 @ X @ X2.T
        out[key] = complex(val[0, 0]) if scalar else val
    return out


def pair_count(betaJ) -> float:
    """Mean pair number N_J = tr sinh^2 Q."""
    s = sla.svdvals(as_matrix(betaJ))
    return float(np.sum(np.sinh(s) ** 2))


def two_photon_amplitudes(betaJ):
    """Unit-norm two-photon amplitudes T / ||T||, the norm ||T||^2 and detW."""
    ds = disentangle(betaJ)
    norm = float(np.sum(np.abs(ds.T) ** 2))
    if norm == 0.0:
        raise ZeroState("two-photon component vanishes")
    return ds.T / math.sqrt(norm), norm, ds.detW
