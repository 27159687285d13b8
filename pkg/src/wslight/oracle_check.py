"""Cross-checks of the analytic modules against the Fock-space oracle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import coincidence, fock_oracle, hom, homodyne, matcalc
from .errors import LeakageExceeded
from .matcalc import Regime

# a degenerate pair puts both photons into the same mode family
DEGENERATE_CUTOFF_FACTOR = 2
CUTOFF_STEP = 2
CUTOFF_RETRIES = 3


@dataclass(frozen=True)
class CheckRow:
    name: str
    max_abs_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.max_abs_error <= self.tolerance)


def random_betas(seed: int, count: int = 20, beta_circ_max: float = 0.3, dims=(1, 3)):
    """Complex Gaussian matrices rescaled so max |beta_nm| = beta_circ ~ U(0.05, beta_circ_max)."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        d = int(rng.integers(dims[0], dims[1] + 1))
        bc = rng.uniform(min(0.05, beta_circ_max), beta_circ_max)
        z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        out.append(bc * z / np.max(np.abs(z)))
    return out


def _symmetric_pair(seed, beta_circ):
    rng = np.random.default_rng(seed + 1)
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    z = (z + z.T) / 2
    return beta_circ * z / np.max(np.abs(z))


def _err(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0))


def _state(beta, cutoff, regime=Regime.NONDEGENERATE):
    """Squeezed state at the first cutoff (in steps of CUTOFF_STEP) whose leakage passes."""
    for attempt in range(CUTOFF_RETRIES + 1):
        try:
            return fock_oracle.build_squeezed_state(beta, cutoff + attempt * CUTOFF_STEP, regime=regime)
        except LeakageExceeded:
            if attempt == CUTOFF_RETRIES:
                raise


def hom_analytic(beta, q: int) -> float:
    """hom_probability for a small beta embedded in a zero-padded index set."""
    d = beta.shape[0]
    pad = abs(q)
    ds = matcalc.disentangle(beta)
    T = np.zeros((d + 2 * pad, d + 2 * pad), dtype=complex)
    T[pad:pad + d, pad:pad + d] = ds.T
    Ts, _ = hom.shift_T(T, q)
    return hom.hom_probability(Ts, ds.detW)


def run_checks(seed: int = 20240601, count: int = 20, cutoff: int = 8, beta_circ_max: float = 0.3,
               corrupt: bool = False, zero: bool = False) -> list[CheckRow]:
    """Every oracle comparison; ``corrupt`` perturbs the analytic input as a negative control."""
    betas = random_betas(seed, count, beta_circ_max)
    sym = _symmetric_pair(seed, beta_circ_max)
    if zero:
        betas = [0 * b for b in betas]
        sym = 0 * sym

    def analytic(b):
        return b * 1.05 + 0.01 if corrupt else b

    rows = []
    e_mom = e_pair = e_proj = 0.0
    for b in betas:
        st = _state(b, cutoff)
        om = fock_oracle.oracle_moments(st)
        m = matcalc.moments(analytic(b))
        e_mom = max(e_mom, _err(om.Na, m.Na), _err(om.Nb, m.Nb), _err(om.Mab, m.Mab))
        dist = fock_oracle.oracle_pair_probs(st, 4)
        ref = [coincidence.pair_probability(analytic(b), s) for s in range(5)]
        e_pair = max(e_pair, _err(dist.probs, ref))
        e_proj = max(e_proj, *fock_oracle.projector_defects(st.space, st.n_modes_signal))
    rows.append(CheckRow("moments_nondegenerate", e_mom, 1e-6))
    rows.append(CheckRow("pair_probabilities_s<=4", e_pair, 1e-6))
    rows.append(CheckRow("projector_orthogonality_completeness", e_proj, 1e-10))

    st = _state(sym, cutoff)
    rows.append(CheckRow("vacuum_overlap_detW",
                         _err(st.amplitudes[0], matcalc.disentangle(analytic(sym)).detW), 1e-6))
    e_hom = max(_err(fock_oracle.oracle_hom(st, q), hom_analytic(analytic(sym), q)) for q in (0, 3))
    rows.append(CheckRow("hom_q0_q3", e_hom, 1e-5))
    rows.append(CheckRow("hom_large_delay_max",
                         _err(fock_oracle.oracle_hom(st, 5), hom.hom_max(analytic(sym))), 1e-6))

    mu, nu = fock_oracle.transformed_annihilator(sym, 0, cutoff)
    muA, nuA, _, _ = matcalc.bogoliubov(analytic(sym))
    rows.append(CheckRow("bogoliubov_rows", max(_err(mu, muA[0]), _err(nu, nuA[0])), 1e-6))

    dcut = cutoff * DEGENERATE_CUTOFF_FACTOR
    sd = _state(sym, dcut, Regime.DEGENERATE)
    od = fock_oracle.oracle_moments(sd)
    md = matcalc.moments(analytic(sym), Regime.DEGENERATE)
    rows.append(CheckRow("moments_degenerate", max(_err(od.Nd, md.Nd), _err(od.Md, md.Md)), 1e-6))
    res = homodyne.charge_variance_extrema(md)
    var = fock_oracle.oracle_quadrature_variance(sd, res.lo_coeffs("min"))
    rows.append(CheckRow("quadrature_variance_optimal_lo", _err(var, res.sigma2_min), 1e-5))
    return rows
