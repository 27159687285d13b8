"""Homodyne detection of degenerate squeezed light: CW variance spectrum,
total-charge variance extrema and optimal local-oscillator waveforms.

Variances are normalized to shot noise (vacuum = 1). The quadrature is
x = sum_j xi_j^* A_j + h.c. for LO coefficients xi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonPositive, OmegaOutOfBand
from .jsa import SamplingGrid
from .matcalc import MomentSet, Regime, polar_decompose, symmetrize
from .wsdecomp import sinc_basis

DEGENERATE_GAP = 1e-12


@dataclass(frozen=True)
class SpectralVariancePoint:
    theta: float
    omega: float
    variance: float


def cw_variance_spectrum(betaJ, theta, omega, grid: SamplingGrid):
    """Time-averaged spectral variance sigma^2_CW(theta, omega) over the window.

    ``theta`` and ``omega`` broadcast against each other; the result is a
    float for scalar inputs.
    """
    b = symmetrize(betaJ)
    theta, omega = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(omega, dtype=float))
    if np.any(np.abs(omega) >= math.pi / grid.tau):
        raise OmegaOutOfBand("|omega| must stay below half the working bandlimit")
    pf = polar_decompose(b)
    S2 = pf.q_fun(lambda x: np.sinh(x) ** 2)
    SC = pf.q_fun(lambda x: np.sinh(x) * np.cosh(x)) @ pf.U
    d = b.shape[0]
    n = np.arange(d)
    # tr(E X) = e^H X e and tr(E^T X) = e^T X conj(e) with e_n = exp(i n omega tau)
    e = np.exp(1j * np.multiply.outer(omega * grid.tau, n))
    ec = e.conj()
    t1 = np.einsum("...i,ij,...j->...", ec, S2, e)
    t2 = np.einsum("...i,ij,...j->...", e, S2, ec)
    t3 = np.einsum("...i,ij,...j->...", e, SC, ec)
    val = 1.0 + (t1.real + t2.real + 2 * np.real(np.exp(2j * theta) * t3)) / d
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class ChargeVarianceResult:
    lambda_min: float
    lambda_max: float
    sigma2_min: float
    sigma2_max: float
    phi_min: np.ndarray
    phi_max: np.ndarray
    degenerate_spectrum: bool = False

    def lo_coeffs(self, which: str = "min") -> np.ndarray:
        phi = self.phi_min if which == "min" else self.phi_max
        d = phi.size // 2
        return phi[:d] + 1j * phi[d:]


def charge_matrix(moments: MomentSet) -> np.ndarray:
    """Real symmetric block matrix K with sigma^2 = 1 + 2 Phi^T K Phi."""
    if moments.regime is not Regime.DEGENERATE:
        raise ValueError("charge variance needs degenerate moments")
    N, M = moments.Nd, moments.Md
    top = np.hstack([N.real + M.real, N.imag + M.imag])
    bottom = np.hstack([M.imag - N.imag, N.real - M.real])
    K = np.vstack([top, bottom])
    return (K + K.T) / 2


def charge_variance_extrema(moments: MomentSet) -> ChargeVarianceResult:
    K = charge_matrix(moments)
    w, v = np.linalg.eigh(K)
    lo, hi = float(w[0]), float(w[-1])
    degenerate = (hi - lo) < DEGENERATE_GAP or (
        w.size > 1 and (w[1] - w[0] < DEGENERATE_GAP or w[-1] - w[-2] < DEGENERATE_GAP))
    return ChargeVarianceResult(
        lambda_min=lo, lambda_max=hi,
        sigma2_min=1 + 2 * lo, sigma2_max=1 + 2 * hi,
        phi_min=v[:, 0].copy(), phi_max=v[:, -1].copy(),
        degenerate_spectrum=bool(degenerate),
    )


def charge_variance(moments: MomentSet, lo_coeffs) -> float:
    """Variance for a fixed LO, coefficients normalized internally."""
    xi = np.asarray(lo_coeffs, dtype=complex).ravel()
    xi = xi / np.linalg.norm(xi)
    phi = np.concatenate([xi.real, xi.imag])
    return float(1 + 2 * phi @ charge_matrix(moments) @ phi)


def optimal_lo_waveform(result: ChargeVarianceResult, grid: SamplingGrid, t, n_min=None, which="min"):
    """LO waveform xi(t) = sum_j (phi_R,j + i phi_I,j) chi_j(t).

    Window indices start at ``n_min`` (defaults to the grid's first index).
    """
    c = result.lo_coeffs(which)
    start = grid.n_min if n_min is None else n_min
    idx = np.arange(start, start + c.size)
    X = sinc_basis(idx, grid.tau, t)
    out = X @ c
    return complex(out[0]) if np.ndim(t) == 0 else out


def variance_db(sigma2):
    s = np.asarray(sigma2, dtype=float)
    if np.any(s <= 0):
        raise NonPositive("variance must be positive to express in dB")
    out = 10 * np.log10(s)
    return float(out) if out.ndim == 0 else out
