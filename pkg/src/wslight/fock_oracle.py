"""Brute-force squeezed vacuum on a truncated multimode Fock space.

This module is the reference the analytic code is tested against, so it
only uses the generator exponential and direct operator application. It
shares result containers with the analytic modules but none of their
numerics.

States are stored as occupation arrays (one row per basis state) plus
amplitudes. Occupations are encoded as mixed-radix integers, with mode 0
most significant, so sorting the codes orders the basis lexicographically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .coincidence import PairDistribution
from .errors import LeakageExceeded
from .matcalc import MomentSet, Regime

LEAKAGE_TOL = 1e-8
# generators up to this dimension are exponentiated densely
DENSE_LIMIT = 2000
MAX_ENUMERATION = 5_000_000


@dataclass(frozen=True)
class FockSpace:
    n_modes: int
    cutoff: int
    basis: np.ndarray
    codes: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def radix(self) -> np.ndarray:
        return _radix(self.n_modes, self.cutoff)

    def lookup(self, occ) -> np.ndarray:
        """Basis index of each occupation row, -1 where absent."""
        occ = np.atleast_2d(occ)
        ok = np.all((occ >= 0) & (occ <= self.cutoff), axis=1)
        c = occ @ self.radix
        pos = np.searchsorted(self.codes, c)
        pos = np.minimum(pos, self.dim - 1)
        found = ok & (self.codes[pos] == c)
        return np.where(found, pos, -1)


def _radix(n_modes, cutoff):
    # base cutoff + 2 leaves room for one raising step past the cutoff
    base = cutoff + 2
    return base ** np.arange(n_modes - 1, -1, -1, dtype=np.int64)


def fock_space(n_modes: int, cutoff: int, keep: Optional[Callable] = None) -> FockSpace:
    """Number basis with at most ``cutoff`` photons per mode.

    ``keep`` filters the occupation array (rows) down to a conserved sector.
    """
    if (cutoff + 1) ** n_modes > MAX_ENUMERATION:
        raise ValueError("truncated space too large for the oracle")
    occ = np.indices((cutoff + 1,) * n_modes).reshape(n_modes, -1).T.astype(np.int64)
    if keep is not None:
        occ = occ[keep(occ)]
    codes = occ @ _radix(n_modes, cutoff)
    order = np.argsort(codes)
    return FockSpace(n_modes=n_modes, cutoff=cutoff, basis=occ[order], codes=codes[order])


def charge_sector(n_signal: int, charge: int = 0):
    """Rows with (signal photons) - (idler photons) == charge."""
    return lambda occ: occ[:, :n_signal].sum(axis=1) - occ[:, n_signal:].sum(axis=1) == charge


def parity_sector(parity: int = 0):
    return lambda occ: occ.sum(axis=1) % 2 == parity


def pair_generator(space: FockSpace, beta, n_signal: int, regime: Regime) -> sp.csr_matrix:
    """Anti-Hermitian generator sum beta_ij X_i^dag Y_j^dag - h.c.

    Nondegenerate: X = signal mode i, Y = idler mode j.
    Degenerate: X = Y = mode, with the conventional factor 1/2.
    """
    beta = np.atleast_2d(np.asarray(beta, dtype=complex))
    rows, cols, vals = [], [], []
    occ = space.basis
    deg = Regime(regime) is Regime.DEGENERATE
    for i, j in product(range(beta.shape[0]), range(beta.shape[1])):
        c = beta[i, j] * (0.5 if deg else 1.0)
        if c == 0:
            continue
        mi, mj = (i, j) if deg else (i, n_signal + j)
        tgt = occ.copy()
        tgt[:, mi] += 1
        amp = np.sqrt(tgt[:, mi].astype(float))
        tgt[:, mj] += 1
        amp = amp * np.sqrt(tgt[:, mj].astype(float))
        idx = space.lookup(tgt)
        ok = idx >= 0
        rows.append(idx[ok])
        cols.append(np.nonzero(ok)[0])
        vals.append(c * amp[ok])
    if not rows:
        return sp.csr_matrix((space.dim, space.dim), dtype=complex)
    X = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(space.dim, space.dim)).tocsr()
    return (X - X.conj().T).tocsr()


def evolve(G: sp.csr_matrix, vec: np.ndarray) -> np.ndarray:
    """exp(G) vec: dense expm for small spaces, expm_multiply on the sparse generator otherwise."""
    if G.shape[0] <= DENSE_LIMIT:
        return sla.expm(G.toarray()) @ vec
    return expm_multiply(G.tocsc(), vec)


@dataclass(frozen=True)
class FockState:
    n_modes_signal: int
    n_modes_idler: int
    regime: Regime
    space: FockSpace
    amplitudes: np.ndarray
    leakage: float

    @property
    def cutoff(self) -> int:
        return self.space.cutoff

    @property
    def occupations(self) -> np.ndarray:
        return self.space.basis

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @property
    def interior_norm2(self) -> float:
        """Population away from the truncation boundary; equals norm2 - leakage."""
        edge = np.any(self.space.basis == self.cutoff, axis=1)
        return float(np.sum(np.abs(self.amplitudes[~edge]) ** 2))


def build_squeezed_state(beta, cutoff: int = 8, regime=Regime.NONDEGENERATE,
                         leakage_tol: float = LEAKAGE_TOL) -> FockState:
    """exp(G)|vac> on the truncated space.

    The truncated generator is still anti-Hermitian, so the state keeps unit
    norm. ``leakage`` is the population on boundary states (some mode at the
    cutoff), which bounds the truncation error. Keeping that population in
    the state is markedly more accurate than projecting it out.
    """
    regime = Regime(regime)
    beta = np.atleast_2d(np.asarray(beta, dtype=complex))
    if regime is Regime.DEGENERATE:
        n_sig, n_idl = beta.shape[0], 0
        space = fock_space(n_sig, cutoff, parity_sector(0))
    else:
        n_sig, n_idl = beta.shape
        space = fock_space(n_sig + n_idl, cutoff, charge_sector(n_sig, 0))
    G = pair_generator(space, beta, n_sig, regime)
    vac = np.zeros(space.dim, dtype=complex)
    vac[0] = 1.0
    psi = evolve(G, vac)
    edge = np.any(space.basis == cutoff, axis=1)
    leakage = float(np.sum(np.abs(psi[edge]) ** 2))
    if leakage > leakage_tol:
        raise LeakageExceeded(f"boundary population {leakage:.2e} exceeds {leakage_tol:.1e}; raise the cutoff")
    return FockState(n_sig, n_idl, regime, space, psi, leakage)


# sparse-state algebra: (occupations, amplitudes) pairs, free of any basis

def _lower(occ, amps, mode):
    n = occ[:, mode]
    keep = n > 0
    out = occ[keep].copy()
    out[:, mode] -= 1
    return out, amps[keep] * np.sqrt(n[keep])


def _raise(occ, amps, mode):
    out = occ.copy()
    out[:, mode] += 1
    return out, amps * np.sqrt(out[:, mode].astype(float))


def _codes(occ):
    base = int(occ.max(initial=0)) + 2
    return occ @ (base ** np.arange(occ.shape[1] - 1, -1, -1, dtype=np.int64))


def _inner(left, right) -> complex:
    """<left|right> for two sparse states with unique rows."""
    (o1, a1), (o2, a2) = left, right
    if o1.shape[0] == 0 or o2.shape[0] == 0:
        return 0j
    base = int(max(o1.max(initial=0), o2.max(initial=0))) + 2
    r = base ** np.arange(o1.shape[1] - 1, -1, -1, dtype=np.int64)
    _, i1, i2 = np.intersect1d(o1 @ r, o2 @ r, return_indices=True)
    return complex(np.vdot(a1[i1], a2[i2]))


def _combine(parts):
    occ = np.concatenate([p[0] for p in parts])
    amps = np.concatenate([p[1] for p in parts])
    if occ.shape[0] == 0:
        return occ, amps
    _, first, inv = np.unique(_codes(occ), return_index=True, return_inverse=True)
    out = np.zeros(first.size, dtype=complex)
    np.add.at(out, inv.ravel(), amps)
    return occ[first], out


def _support(state: FockState):
    nz = state.amplitudes != 0
    return state.occupations[nz], state.amplitudes[nz]


def oracle_moments(state: FockState) -> MomentSet:
    """Second-order moments by direct operator application."""
    psi = _support(state)
    norm = state.norm2
    if state.regime is Regime.DEGENERATE:
        d = state.n_modes_signal
        low = [_lower(*psi, i) for i in range(d)]
        N = np.array([[_inner(low[n], low[m]) for m in range(d)] for n in range(d)])
        M = np.array([[_inner(psi, _lower(*low[m], n)) for m in range(d)] for n in range(d)])
        return MomentSet(Regime.DEGENERATE, Nd=N / norm, Md=M / norm)
    da, db = state.n_modes_signal, state.n_modes_idler
    lowA = [_lower(*psi, i) for i in range(da)]
    lowB = [_lower(*psi, da + j) for j in range(db)]
    Na = np.array([[_inner(lowA[n], lowA[m]) for m in range(da)] for n in range(da)])
    Nb = np.array([[_inner(lowB[n], lowB[m]) for m in range(db)] for n in range(db)])
    Mab = np.array([[_inner(psi, _lower(*lowB[m], n)) for m in range(db)] for n in range(da)])
    return MomentSet(Regime.NONDEGENERATE, Na=Na / norm, Nb=Nb / norm, Mab=Mab / norm)


def signal_number(space: FockSpace, n_signal: int) -> np.ndarray:
    return space.basis[:, :n_signal].sum(axis=1)


def projectors(space: FockSpace, n_signal: int, s_max: int) -> np.ndarray:
    """Diagonals of the projectors onto total signal number s = 0..s_max, one row per s."""
    ns = signal_number(space, n_signal)
    return (ns[None, :] == np.arange(s_max + 1)[:, None]).astype(float)


def projector_defects(space: FockSpace, n_signal: int):
    """(orthogonality defect, completeness defect) of the signal-number projectors.

    The projectors are diagonal in the number basis, so products and sums are
    taken on their diagonals.
    """
    s_top = int(signal_number(space, n_signal).max(initial=0))
    P = projectors(space, n_signal, s_top)
    gram = P[:, None, :] * P[None, :, :]
    expect = np.eye(len(P))[:, :, None] * P[:, None, :]
    ortho = float(np.max(np.abs(gram - expect), initial=0.0))
    comp = float(np.max(np.abs(P.sum(axis=0) - 1.0), initial=0.0))
    return ortho, comp


def oracle_pair_probs(state: FockState, s_max: int) -> PairDistribution:
    """Probability of s signal photons by projection, s = 0..s_max."""
    ortho, comp = projector_defects(state.space, state.n_modes_signal)
    if max(ortho, comp) > 1e-10:
        raise RuntimeError("signal-number projectors are not an orthogonal resolution of identity")
    ns = signal_number(state.space, state.n_modes_signal)
    pop = np.abs(state.amplitudes) ** 2
    probs = np.array([float(np.sum(pop[ns == s])) for s in range(s_max + 1)])
    return PairDistribution(probs=probs, truncation_mass=max(0.0, 1.0 - float(np.sum(probs))))


def _bs_terms(n, sign):
    # ((C^dag + sign D^dag)/sqrt 2)^n = sum_k coef C^dag^k D^dag^(n-k)
    pref = 2.0 ** (-n / 2)
    return [(k, n - k, pref * math.comb(n, k) * sign ** (n - k)) for k in range(n + 1)]


def oracle_hom(state: FockState, q: int, leakage_tol: float = LEAKAGE_TOL,
               min_amplitude: float = 1e-14) -> float:
    """Coincidence probability behind a 50:50 beam splitter with idler delayed by q steps.

    The idler mode j is relabelled to j - q, each pair of equal labels is
    mixed on the beam splitter, and the output state is expanded
    explicitly in the C/D number basis.
    """
    if state.regime is not Regime.NONDEGENERATE:
        raise ValueError("HOM oracle needs a nondegenerate state")
    if state.leakage > leakage_tol:
        raise LeakageExceeded("state leakage above tolerance")
    da, db = state.n_modes_signal, state.n_modes_idler
    labels = sorted(set(range(da)) | {j - q for j in range(db)})
    pos = {lab: i for i, lab in enumerate(labels)}
    L = len(labels)
    out: dict = {}
    for occ, amp in zip(*_support(state)):
        if abs(amp) < min_amplitude:
            continue
        factors = []
        norm = 1.0
        for i in range(da):
            n = int(occ[i])
            norm *= math.factorial(n)
            factors.append((pos[i], _bs_terms(n, +1)))
        for j in range(db):
            n = int(occ[da + j])
            norm *= math.factorial(n)
            factors.append((pos[j - q], _bs_terms(n, -1)))
        base = amp / math.sqrt(norm)
        for combo in product(*(f[1] for f in factors)):
            c = [0] * L
            d = [0] * L
            coef = base
            for (p, _), (kc, kd, w) in zip(factors, combo):
                c[p] += kc
                d[p] += kd
                coef *= w
            key = (tuple(c), tuple(d))
            out[key] = out.get(key, 0j) + coef
    total = pc = pd = pcd = 0.0
    for (c, d), a in out.items():
        amp = a * math.sqrt(math.prod(math.factorial(x) for x in c + d))
        w = abs(amp) ** 2
        total += w
        if not any(c):
            pc += w
        if not any(d):
            pd += w
        if not any(c) and not any(d):
            pcd += w
    return (total - pc - pd + pcd) / total


def oracle_quadrature_variance(state: FockState, lo_coeffs) -> float:
    """Variance of x = sum_j xi_j^* A_j + h.c., vacuum-normalized to 1."""
    if state.regime is not Regime.DEGENERATE:
        raise ValueError("quadrature oracle needs a degenerate state")
    xi = np.asarray(lo_coeffs, dtype=complex).ravel()
    xi = xi / np.linalg.norm(xi)
    psi = _support(state)
    parts = []
    for j, c in enumerate(xi):
        o, a = _lower(*psi, j)
        parts.append((o, np.conj(c) * a))
        o, a = _raise(*psi, j)
        parts.append((o, c * a))
    xpsi = _combine(parts)
    norm = state.norm2
    second = float(np.vdot(xpsi[1], xpsi[1]).real) / norm
    first = _inner(psi, xpsi).real / norm
    return second - first ** 2


def _embed(space: FockSpace, sparse_state):
    occ, amps = sparse_state
    vec = np.zeros(space.dim, dtype=complex)
    idx = space.lookup(occ)
    ok = idx >= 0
    vec[idx[ok]] = amps[ok]
    return vec


def transformed_annihilator(beta, r: int, cutoff: int = 8):
    """Rows (mu_r., nu_r.) of S^dag A_r S = sum_s mu_rs A_s + nu_rs B_s^dag, read off as
    mu_rs = <0|S^dag A_r S|1_As> and nu_rs = <1_Bs|S^dag A_r S|0>."""
    beta = np.atleast_2d(np.asarray(beta, dtype=complex))
    da, db = beta.shape
    spaces = {c: fock_space(da + db, cutoff, charge_sector(da, c)) for c in (-1, 0, 1)}
    gens = {c: pair_generator(s, beta, da, Regime.NONDEGENERATE) for c, s in spaces.items()}

    def basis_vec(space, occ):
        v = np.zeros(space.dim, dtype=complex)
        v[space.lookup(np.array(occ))[0]] = 1.0
        return v

    def apply_lower(space_from, space_to, vec, mode):
        o, a = _lower(space_from.basis, vec, mode)
        return _embed(space_to, (o, a))

    vac_occ = [0] * (da + db)
    psi0 = evolve(gens[0], basis_vec(spaces[0], vac_occ))
    phi = apply_lower(spaces[0], spaces[-1], psi0, r)
    back = evolve(-gens[-1], phi)
    nu = np.empty(db, dtype=complex)
    for s in range(db):
        occ = list(vac_occ)
        occ[da + s] = 1
        nu[s] = np.vdot(basis_vec(spaces[-1], occ), back)
    mu = np.empty(da, dtype=complex)
    for s in range(da):
        occ = list(vac_occ)
        occ[s] = 1
        v = evolve(gens[1], basis_vec(spaces[1], occ))
        w = evolve(-gens[0], apply_lower(spaces[1], spaces[0], v, r))
        mu[s] = w[spaces[0].lookup(np.array(vac_occ))[0]]
    return mu, nu
