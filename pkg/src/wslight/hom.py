"""Hong-Ou-Mandel interference of nondegenerate squeezed light with an
integer-step delay of the idler arm and perfect detectors."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .errors import CWNotSupported, ExcessiveShift, SingularDeterminant
from .jsa import (STANDARD, JointAmplitude, SamplingGrid, as_matrix, build_beta, minimal_bandlimit,
                  minimal_grid, oversample)
from .matcalc import disentangle, log_det_sech, log_sech
from .wsdecomp import WindowSpec

MAX_DROPPED = 1e-6
CLAMP_TOL = 1e-10
# extra fine-grid modes kept beyond a CW window on each side, in units of the base tau
CW_MARGIN = 12
PLATEAU_SLOPE = 1e-4
PLATEAU_RUN = 5


def shift_T(T, q: int, max_dropped: float = MAX_DROPPED):
    """Column shift T'_{n,m} = T_{n,m+q}; returns (T', dropped squared-mass fraction)."""
    T = as_matrix(T)
    d = T.shape[1]
    out = np.zeros_like(T)
    q = int(q)
    if q >= 0:
        out[:, :d - q] = T[:, q:]
        lost = T[:, :q]
    else:
        out[:, -q:] = T[:, :d + q]
        lost = T[:, d + q:]
    total = float(np.sum(np.abs(T) ** 2))
    dropped = float(np.sum(np.abs(lost) ** 2)) / total if total > 0 else 0.0
    if dropped > max_dropped:
        raise ExcessiveShift(f"shift q={q} drops {dropped:.2e} of the squared mass")
    return out, dropped


def _clamp(p):
    if -CLAMP_TOL < p < 0:
        return 0.0
    if 1 < p < 1 + CLAMP_TOL:
        return 1.0
    return p


def hom_probability(TshiftJ, detWJ: float) -> float:
    """Coincidence probability 1 + W^2 (1 - 2 det(I - lam^H lam)^(-1/2))."""
    T = as_matrix(TshiftJ)
    lam = (T + T.T) / 2
    A = np.eye(lam.shape[0]) - lam.conj().T @ lam
    try:
        L = sla.cholesky(A, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularDeterminant("I - lam^H lam is not positive definite") from exc
    logdet = 2 * float(np.sum(np.log(np.diag(L).real)))
    w2 = detWJ * detWJ
    return _clamp(1 + w2 - 2 * w2 * math.exp(-logdet / 2))


def hom_max(beta, detW: Optional[float] = None, cw: bool = False) -> float:
    """Large-delay coincidence probability of a finite pulse held entirely in ``beta``.

    The limit assumes T vanishes far from the pulse, which a CW kernel
    never does; ``cw=True`` raises CWNotSupported.
    """
    if cw:
        raise CWNotSupported("large-delay closed form needs a finite pulse; use the curve plateau")
    b = as_matrix(beta)
    s = sla.svdvals(b)
    if detW is None:
        detW = math.exp(float(np.sum(log_sech(s))))
    logdet = float(np.sum(np.log1p(-np.tanh(s) ** 2 / 4)))
    w2 = detW * detW
    return _clamp(1 + w2 - 2 * w2 * math.exp(-logdet))


@dataclass(frozen=True)
class HomCurve:
    q: np.ndarray
    delays: np.ndarray
    probs: np.ndarray
    p_min: float
    p_max: float
    visibility: float
    tau: float
    oversample_factor: int = 1
    plateau_found: Optional[bool] = None

    @property
    def normalized(self) -> np.ndarray:
        return self.probs / self.p_max

    @property
    def delays_base(self) -> np.ndarray:
        """Delays in units of the base (minimal-bandlimit) tau."""
        return self.q / self.oversample_factor


def find_plateau(probs, rel_slope: float = PLATEAU_SLOPE, run: int = PLATEAU_RUN):
    """Mean of the outermost run of points whose relative slope stays below ``rel_slope``.

    Searches both ends of the curve and returns (value, found).
    """
    p = np.asarray(probs, dtype=float)
    vals = []
    for seq in (p, p[::-1]):
        slope = np.abs(np.diff(seq)) / np.maximum(np.abs(seq[:-1]), np.finfo(float).tiny)
        if slope.size >= run and np.all(slope[:run] < rel_slope):
            vals.append(float(np.mean(seq[:run + 1])))
    if vals:
        return float(np.mean(vals)), True
    return float(np.max(p)), False


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def hom_dip_curve(model: JointAmplitude, beta_circ: complex, window: Optional[WindowSpec] = None,
                  oversample_k: int = 1, q_range=(-20, 20), bandlimit: str = STANDARD,
                  workers: Optional[int] = None) -> HomCurve:
    """Coincidence probability over integer delays q in ``q_range`` (inclusive).

    ``beta_circ`` is given at the minimal bandlimit and rescaled to the
    oversampled grid. ``window`` (in working-grid units) is required for CW
    models; pulsed models default to a window holding the entire pulse.
    """
    q_lo, q_hi = int(q_range[0]), int(q_range[1])
    qs = np.arange(q_lo, q_hi + 1)
    qpad = int(max(abs(q_lo), abs(q_hi)))
    k = int(oversample_k)

    if model.is_cw:
        if window is None:
            raise ValueError("CW models need an explicit window")
        base = SamplingGrid(omega=minimal_bandlimit(model, bandlimit))
        fine, scale = oversample(model, base, k)
        margin = CW_MARGIN * k
        grid = fine.with_range(window.first - qpad - margin, window.last + qpad + margin)
    else:
        base = minimal_grid(model, bandlimit)
        fine, scale = oversample(model, base, k)
        grid = fine.with_range(fine.n_min - qpad, fine.n_max + qpad)
    beta = build_beta(model, beta_circ * scale, grid)
    T = disentangle(beta).T

    if window is None:
        sel = slice(None)
        betaJ = beta.values
    else:
        lo = window.first - grid.n_min
        hi = window.last - grid.n_min + 1
        if lo < 0 or hi > grid.size:
            raise ValueError("window does not fit in the sampled grid")
        sel = slice(lo, hi)
        betaJ = beta.values[sel, sel]
    detWJ = math.exp(log_det_sech(betaJ))

    # a CW kernel never decays at the grid edge; the margin keeps the window block in range
    max_dropped = 1.0 if model.is_cw else MAX_DROPPED

    def point(q):
        Ts, _ = shift_T(T, q, max_dropped)
        return hom_probability(Ts[sel, sel], detWJ)

    probs = np.array(_map(point, list(qs), workers))
    p_min = float(np.min(probs))
    if model.is_cw:
        p_max, found = find_plateau(probs)
    else:
        p_max, found = hom_max(betaJ, detWJ), None
    vis = (p_max - p_min) / p_max if p_max > 0 else 0.0
    return HomCurve(q=qs, delays=qs * grid.tau, probs=probs, p_min=p_min, p_max=p_max,
                    visibility=vis, tau=grid.tau, oversample_factor=k, plateau_found=found)

