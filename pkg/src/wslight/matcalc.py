"""Polar factors, Hermitian matrix functions, disentangling matrices,
Bogoliubov transforms and second-order moments of squeezed vacuum.

For beta = A diag(s) B^H (SVD) we use U = A B^H, P = B diag(s) B^H and
Q = A diag(s) A^H, so that beta = U P = Q U.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg as sla

from .errors import AsymmetricBeta, NonFinite, NotHermitian
from .jsa import as_matrix

HERMITIAN_TOL = 1e-10
SYMMETRY_TOL = 1e-10


class Regime(enum.Enum):
    DEGENERATE = "degenerate"
    NONDEGENERATE = "nondegenerate"


@dataclass(frozen=True)
class PolarFactors:
    U: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    left: np.ndarray
    right: np.ndarray
    sigma: np.ndarray

    def q_fun(self, f: Callable) -> np.ndarray:
        """f(Q) using the left singular vectors as eigenbasis."""
        return hermitian_matfun(self.Q, f, eig=(self.sigma, self.left))

    def p_fun(self, f: Callable) -> np.ndarray:
        return hermitian_matfun(self.P, f, eig=(self.sigma, self.right))


def polar_decompose(beta) -> PolarFactors:
    b = as_matrix(beta)
    if b.shape[0] != b.shape[1]:
        raise ValueError("beta must be square")
    if not np.all(np.isfinite(b)):
        raise NonFinite("beta has NaN or Inf entries")
    A, s, Bh = sla.svd(b, lapack_driver="gesvd")
    B = Bh.conj().T
    U = A @ Bh
    P = (B * s) @ Bh
    Q = (A * s) @ A.conj().T
    return PolarFactors(U=U, P=_herm(P), Q=_herm(Q), left=A, right=B, sigma=s)


def _herm(X):
    return (X + X.conj().T) / 2


def _check_hermitian(H):
    scale = max(1.0, np.linalg.norm(H))
    if np.linalg.norm(H - H.conj().T) > HERMITIAN_TOL * scale:
        raise NotHermitian("matrix is not Hermitian within tolerance")


def hermitian_matfun(H, f: Callable, eig: Optional[tuple] = None) -> np.ndarray:
    """Apply scalar ``f`` to the eigenvalues of Hermitian ``H``.

    ``eig`` may supply a known (eigenvalues, eigenvectors) pair to skip the
    eigensolver.
    """
    H = np.atleast_2d(np.asarray(H))
    if eig is None:
        _check_hermitian(H)
        w, V = np.linalg.eigh(_herm(H))
    else:
        w, V = eig
    fw = np.asarray(f(w))
    return (V * fw) @ V.conj().T


def _sech(x):
    return 1.0 / np.cosh(x)


def log_sech(x):
    # -ln cosh x without overflow
    x = np.abs(x)
    return -(x + np.log1p(np.exp(-2 * x)) - np.log(2.0))


def _sinh2(x):
    return np.sinh(x) ** 2


def _sinh_cosh(x):
    return np.sinh(x) * np.cosh(x)


@dataclass(frozen=True)
class DisentangledSet:
    W: np.ndarray
    detW: float
    T: np.ndarray
    L: np.ndarray
    Y: np.ndarray
    V: np.ndarray
    polar: PolarFactors

    @property
    def log_detW(self) -> float:
        return float(np.sum(log_sech(self.polar.sigma)))


def log_det_sech(beta) -> float:
    """ln det(sech Q) from the singular values of beta."""
    s = sla.svdvals(as_matrix(beta))
    return float(np.sum(log_sech(s)))


def disentangle(beta) -> DisentangledSet:
    pf = polar_decompose(beta)
    W = pf.q_fun(_sech)
    T = pf.q_fun(np.tanh) @ pf.U
    L = pf.q_fun(log_sech)
    Y = pf.p_fun(log_sech).T
    V = (pf.U.conj().T @ pf.q_fun(np.tanh)).T
    detW = float(np.exp(np.sum(log_sech(pf.sigma))))
    return DisentangledSet(W=W, detW=detW, T=T, L=L, Y=Y, V=V, polar=pf)


def bogoliubov(beta):
    """(muA, nuA, muB, nuB) with A -> muA A + nuA B^dag and B -> muB B + nuB A^dag."""
    pf = polar_decompose(beta)
    muA = pf.q_fun(np.cosh)
    nuA = pf.q_fun(np.sinh) @ pf.U
    muB = (pf.U.conj().T @ muA @ pf.U).T
    nuB = nuA.T
    return muA, nuA, muB, nuB


@dataclass(frozen=True)
class MomentSet:
    regime: Regime
    Na: Optional[np.ndarray] = None
    Nb: Optional[np.ndarray] = None
    Mab: Optional[np.ndarray] = None
    Nd: Optional[np.ndarray] = None
    Md: Optional[np.ndarray] = None

    @property
    def N(self) -> np.ndarray:
        return self.Nd if self.regime is Regime.DEGENERATE else self.Na

    @property
    def M(self) -> np.ndarray:
        return self.Md if self.regime is Regime.DEGENERATE else self.Mab

    @property
    def size(self) -> int:
        return self.N.shape[0]


def symmetrize(beta) -> np.ndarray:
    """(beta + beta^T)/2 if beta is symmetric within tolerance, else AsymmetricBeta."""
    b = as_matrix(beta)
    scale = max(np.linalg.norm(b), np.finfo(float).tiny)
    if np.linalg.norm(b - b.T) > SYMMETRY_TOL * scale:
        raise AsymmetricBeta("degenerate regime needs a symmetric beta")
    return (b + b.T) / 2


def moments(beta, regime: Regime = Regime.NONDEGENERATE) -> MomentSet:
    """Second-order moments of the squeezed vacuum.

    Nondegenerate: Na = <A_n^dag A_m>, Nb = <B_n^dag B_m>, Mab = <A_n B_m>.
    Degenerate:    Nd = <A_n^dag A_m>, Md = <A_n A_m>.
    """
    regime = Regime(regime)
    if regime is Regime.DEGENERATE:
        b = symmetrize(beta)
        pf = polar_decompose(b)
        M = pf.q_fun(_sinh_cosh) @ pf.U
        return MomentSet(regime, Nd=pf.p_fun(_sinh2), Md=(M + M.T) / 2)
    pf = polar_decompose(beta)
    return MomentSet(
        regime,
        Na=pf.q_fun(_sinh2).T,
        # idler photons live in the right polar factor
        Nb=pf.p_fun(_sinh2),
        Mab=pf.q_fun(_sinh_cosh) @ pf.U,
    )
