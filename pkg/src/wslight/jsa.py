"""Joint-amplitude models and their Whittaker-Shannon sampling.

Times are in arbitrary but consistent units. The double Gaussian is

    gbar(t1, t2) = exp(-pi (t1 - t2)^2 / (4 T_c^2)) exp(-pi (t1 + t2)^2 / (4 T_p^2)) / sqrt(T_p T_c)

and its CW limit drops the pulse envelope together with the divergent
prefactor, leaving a unit-peak diagonal kernel.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np

from .errors import AllZeroWindow

STANDARD = "standard"
CAPTION = "caption"
BANDLIMITS = (STANDARD, CAPTION)

# default pulsed sampling range in units of T_p
PULSE_EXTENT = 4.0


class AmplitudeKind(enum.Enum):
    DOUBLE_GAUSSIAN_PULSED = "pulsed"
    DOUBLE_GAUSSIAN_CW = "cw"
    TABULATED_SYMMETRIC = "tabulated"


@dataclass(frozen=True)
class JointAmplitude:
    kind: AmplitudeKind
    T_c: float
    T_p: float = math.inf
    symmetric: bool = True
    times: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    values: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.T_c > 0:
            raise ValueError(f"T_c must be positive, got {self.T_c}")
        if self.kind is AmplitudeKind.DOUBLE_GAUSSIAN_PULSED:
            if not (math.isfinite(self.T_p) and self.T_p >= self.T_c):
                raise ValueError(f"pulsed model needs finite T_p >= T_c, got T_p={self.T_p}")
        if self.kind is AmplitudeKind.TABULATED_SYMMETRIC:
            if self.times is None or self.values is None:
                raise ValueError("tabulated model needs times and values")
            v = np.asarray(self.values)
            if v.shape != (len(self.times), len(self.times)):
                raise ValueError("values must be square over the time table")
            if not np.allclose(v, v.T, rtol=1e-12, atol=1e-14):
                raise ValueError("tabulated amplitude is not symmetric")

    @property
    def is_cw(self) -> bool:
        return self.kind is AmplitudeKind.DOUBLE_GAUSSIAN_CW

    @property
    def ratio(self) -> float:
        """T_p / T_c (infinite for CW)."""
        return self.T_p / self.T_c


def double_gaussian(T_p: float, T_c: float = 1.0) -> JointAmplitude:
    return JointAmplitude(AmplitudeKind.DOUBLE_GAUSSIAN_PULSED, T_c=float(T_c), T_p=float(T_p))


def double_gaussian_cw(T_c: float = 1.0) -> JointAmplitude:
    return JointAmplitude(AmplitudeKind.DOUBLE_GAUSSIAN_CW, T_c=float(T_c))


def tabulated_symmetric(times, values, T_c: float, T_p: float = math.inf) -> JointAmplitude:
    """Symmetric amplitude given on a regular square time grid, bilinearly interpolated."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=complex)
    return JointAmplitude(AmplitudeKind.TABULATED_SYMMETRIC, T_c=float(T_c), T_p=float(T_p),
                          times=times, values=values)


def evaluate_jta(model: JointAmplitude, t1, t2):
    """Joint temporal amplitude gbar(t1, t2), broadcasting over array inputs."""
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    diff = np.exp(-np.pi * (t1 - t2) ** 2 / (4 * model.T_c ** 2))
    if model.kind is AmplitudeKind.DOUBLE_GAUSSIAN_CW:
        return diff + 0j
    if model.kind is AmplitudeKind.DOUBLE_GAUSSIAN_PULSED:
        env = np.exp(-np.pi * (t1 + t2) ** 2 / (4 * model.T_p ** 2))
        return diff * env / math.sqrt(model.T_p * model.T_c) + 0j
    return _interp_table(model, t1, t2)


def _interp_table(model, t1, t2):
    from scipy.interpolate import RegularGridInterpolator

    pts = np.stack(np.broadcast_arrays(t1, t2), axis=-1)
    out = np.zeros(pts.shape[:-1], dtype=complex)
    for part, unit in ((model.values.real, 1.0), (model.values.imag, 1j)):
        f = RegularGridInterpolator((model.times, model.times), part,
                                    bounds_error=False, fill_value=0.0)
        out = out + unit * f(pts)
    return out


def evaluate_jsa(model: JointAmplitude, w1, w2):
    """Joint spectral amplitude of the pulsed double Gaussian."""
    if model.kind is not AmplitudeKind.DOUBLE_GAUSSIAN_PULSED:
        raise ValueError("spectral form is only available for the pulsed double Gaussian")
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    Tp, Tc = model.T_p, model.T_c
    pref = math.sqrt(Tp * Tc / math.pi ** 2)
    return pref * np.exp(-Tc ** 2 * (w1 - w2) ** 2 / (4 * np.pi)) \
        * np.exp(-Tp ** 2 * (w1 + w2) ** 2 / (4 * np.pi)) + 0j


@dataclass(frozen=True)
class SamplingGrid:
    """Whittaker-Shannon grid. ``omega`` is the working bandlimit, already
    multiplied by ``oversample_factor``; ``tau`` is derived from it."""

    omega: float
    oversample_factor: int = 1
    n_min: int = 0
    n_max: int = 0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("bandlimit must be positive")
        if int(self.oversample_factor) != self.oversample_factor or self.oversample_factor < 1:
            raise ValueError("oversample_factor must be a positive integer")
        if self.n_max < self.n_min:
            raise ValueError("empty index range")

    @property
    def tau(self) -> float:
        return 2 * math.pi / self.omega

    @property
    def base_omega(self) -> float:
        return self.omega / self.oversample_factor

    @property
    def base_tau(self) -> float:
        return 2 * math.pi / self.base_omega

    @property
    def index_range(self) -> tuple[int, int]:
        return (self.n_min, self.n_max)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    @property
    def size(self) -> int:
        return self.n_max - self.n_min + 1

    @property
    def times(self) -> np.ndarray:
        return self.indices * self.tau

    def with_range(self, n_min: int, n_max: int) -> "SamplingGrid":
        return replace(self, n_min=int(n_min), n_max=int(n_max))


def minimal_bandlimit(model: JointAmplitude, bandlimit: str = STANDARD) -> float:
    """Minimal bandlimit: 2 pi / T_c by default, 2 sqrt(pi) / T_c for ``caption``."""
    if bandlimit == STANDARD:
        return 2 * math.pi / model.T_c
    if bandlimit == CAPTION:
        return 2 * math.sqrt(math.pi) / model.T_c
    raise ValueError(f"unknown bandlimit preset {bandlimit!r}")


def minimal_grid(model: JointAmplitude, bandlimit: str = STANDARD, n_range=None) -> SamplingGrid:
    """Grid at the minimal bandlimit. Pulsed models default to |n tau| <= 4 T_p."""
    omega = minimal_bandlimit(model, bandlimit)
    if n_range is None:
        if not math.isfinite(model.T_p):
            raise ValueError("CW or unbounded models need an explicit index range")
        n = int(math.ceil(PULSE_EXTENT * model.T_p / (2 * math.pi / omega)))
        n_range = (-n, n)
    return SamplingGrid(omega=omega, oversample_factor=1, n_min=int(n_range[0]), n_max=int(n_range[1]))


def sampled_peak(model: JointAmplitude, grid: SamplingGrid) -> float:
    """Largest |gbar| over the sampled window."""
    t = grid.times
    g = evaluate_jta(model, t[:, None], t[None, :])
    return float(np.max(np.abs(g)))


def sample_r_matrix(model: JointAmplitude, grid: SamplingGrid) -> np.ndarray:
    """r_nm = gbar(n tau, m tau) / max |gbar| over the window."""
    t = grid.times
    g = evaluate_jta(model, t[:, None], t[None, :])
    peak = np.max(np.abs(g))
    if not peak > np.finfo(float).tiny:
        raise AllZeroWindow("joint amplitude vanishes on every grid point")
    return g / peak


class Oversampled(NamedTuple):
    grid: SamplingGrid
    beta_circ_scale: float


def oversample(model: JointAmplitude, grid: SamplingGrid, k: int) -> Oversampled:
    """Refine ``grid`` by an integer factor.

    Returns the fine grid and the factor by which beta_circ rescales: with
    beta_nm = beta tau gbar(n tau, m tau), the fine-grid maximum is
    (tau'/tau) (peak'/peak) times the coarse one, i.e. about 1/k when the
    peak is sampled on both grids.
    """
    k = int(k)
    if k < 1:
        raise ValueError("oversampling factor must be >= 1")
    if k == 1:
        return Oversampled(grid, 1.0)
    fine = SamplingGrid(omega=grid.omega * k, oversample_factor=grid.oversample_factor * k,
                        n_min=grid.n_min * k, n_max=grid.n_max * k)
    peak_ratio = sampled_peak(model, fine) / sampled_peak(model, grid)
    return Oversampled(fine, peak_ratio / k)


@dataclass(frozen=True)
class BetaMatrix:
    """Squeezing matrix beta_nm on the contiguous index block starting at n_min."""

    values: np.ndarray
    beta_circ: complex
    n_min: int = 0
    tau: Optional[float] = None

    @property
    def size(self) -> int:
        return self.values.shape[0]

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_min + self.size)

    @property
    def n_max(self) -> int:
        return self.n_min + self.size - 1


def beta_matrix(r, beta_circ: complex, grid: Optional[SamplingGrid] = None) -> BetaMatrix:
    r = np.asarray(r, dtype=complex)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ValueError("r must be a square matrix")
    if np.max(np.abs(r), initial=0.0) > 1 + 1e-12:
        raise ValueError("|r_nm| exceeds 1")
    n_min = grid.n_min if grid is not None else 0
    tau = grid.tau if grid is not None else None
    return BetaMatrix(values=complex(beta_circ) * r, beta_circ=complex(beta_circ), n_min=n_min, tau=tau)


def build_beta(model: JointAmplitude, beta_circ: complex, grid: SamplingGrid) -> BetaMatrix:
    return beta_matrix(sample_r_matrix(model, grid), beta_circ, grid)


def as_matrix(beta) -> np.ndarray:
    """Plain complex 2-D array from a BetaMatrix, array or scalar."""
    if isinstance(beta, BetaMatrix):
        beta = beta.values
    return np.atleast_2d(np.asarray(beta, dtype=complex))
