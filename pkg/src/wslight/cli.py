"""Command-line front end.

    wslight {decompose,homodyne,coincidence,hom,oracle-check}
            [--config PATH] [--preset NAME] [--out DIR] [--threads N] [--seed N]

Exit status: 0 on success, 1 on validation or tolerance failure, 2 on IO failure.
Windows (t_J, d_J) are given on the minimal-bandlimit grid; with
oversampling k the working window holds k * d_J modes over the same span.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import coincidence, hom, homodyne, jsa, matcalc, oracle_check
from .config import PRESETS, RunConfig, load_preset, parse_config
from .errors import WSLightError
from .output import write_table
from .wsdecomp import WindowSpec, pair_count, window_partition

log = logging.getLogger("wslight")

SPECTRAL_POINTS = 81
TEMPORAL_POINTS = 81


class ToleranceFailure(WSLightError):
    pass


def _model(cfg: RunConfig, ratio=None) -> jsa.JointAmplitude:
    if ratio is not None:
        return jsa.double_gaussian(ratio * cfg.T_c, cfg.T_c)
    if cfg.kind == "cw":
        return jsa.double_gaussian_cw(cfg.T_c)
    return jsa.double_gaussian(cfg.T_p, cfg.T_c)


def _working_window(cfg: RunConfig, grid: jsa.SamplingGrid):
    if cfg.d_J == 0:
        return None
    return WindowSpec.at(cfg.t_J, cfg.d_J * grid.oversample_factor, grid.tau)


def window_beta(cfg: RunConfig, model, beta_circ: float):
    """(beta^J, working grid, window or None, neglected mass) for the configured scenario."""
    base = jsa.SamplingGrid(omega=jsa.minimal_bandlimit(model, cfg.bandlimit))
    fine, scale = jsa.oversample(model, base, cfg.oversample)
    window = _working_window(cfg, fine)
    if model.is_cw:
        grid = fine.with_range(window.first, window.last)
        return jsa.build_beta(model, beta_circ * scale, grid), grid, window, 0.0
    pulse = jsa.minimal_grid(model, cfg.bandlimit)
    lo, hi = pulse.n_min * cfg.oversample, pulse.n_max * cfg.oversample
    if window is not None:
        lo, hi = min(lo, window.first), max(hi, window.last)
    grid = fine.with_range(lo, hi)
    beta = jsa.build_beta(model, beta_circ * scale, grid)
    if window is None:
        return beta, grid, None, 0.0
    betaJ, neglected = window_partition(beta, window)
    return betaJ, grid, window, neglected


def _pmap(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _label(x: float) -> str:
    return format(x, ".6g")


def cmd_decompose(cfg: RunConfig, out: Path, threads: int = 1):
    model = _model(cfg)
    digest = cfg.digest()
    written = []
    omega = jsa.minimal_bandlimit(model, cfg.bandlimit)
    if not model.is_cw:
        w = np.linspace(-0.5, 0.5, SPECTRAL_POINTS)
        W1, W2 = np.meshgrid(w, w, indexing="ij")
        g = np.abs(jsa.evaluate_jsa(model, W1 * omega, W2 * omega)) ** 2
        written.append(write_table(out / "jsa_spectral", {
            "w1_over_Omega": W1.ravel(), "w2_over_Omega": W2.ravel(),
            "abs_gamma_sq_normalized": (g / g.max()).ravel()}, digest, cfg.format))
        span = 1.5 * model.T_p
        unit, unit_name = model.T_p, "Tp"
    else:
        span = 5 * model.T_c
        unit, unit_name = model.T_c, "Tc"
    t = np.linspace(-span, span, TEMPORAL_POINTS)
    T1, T2 = np.meshgrid(t, t, indexing="ij")
    g = np.abs(jsa.evaluate_jta(model, T1, T2)) ** 2
    written.append(write_table(out / "jta_temporal", {
        f"t1_over_{unit_name}": (T1 / unit).ravel(), f"t2_over_{unit_name}": (T2 / unit).ravel(),
        "abs_gbar_sq_normalized": (g / g.max()).ravel()}, digest, cfg.format))

    beta, grid, window, neglected = window_beta(cfg, model, 1.0)
    if model.is_cw:
        r, idx = beta.values, beta.indices
    else:
        r = jsa.sample_r_matrix(model, grid)
        idx = grid.indices
    N, M = np.meshgrid(idx, idx, indexing="ij")
    written.append(write_table(out / "r_matrix", {
        "n": N.ravel(), "m": M.ravel(), "r_re": r.real.ravel(), "r_im": r.imag.ravel()},
        digest, cfg.format))
    if window is not None:
        written.append(write_table(out / "window", {
            "t_J": [window.t_J], "d_J": [window.d_J], "n_J": [window.n_J],
            "first": [window.first], "last": [window.last], "neglected_mass": [neglected]},
            digest, cfg.format))
    return written


def _strength_columns(cfg, model, tag, threads):
    def point(bc):
        betaJ, grid, _, _ = window_beta(cfg, model, bc)
        res = homodyne.charge_variance_extrema(matcalc.moments(betaJ, matcalc.Regime.DEGENERATE))
        row = [homodyne.variance_db(res.sigma2_min), homodyne.variance_db(res.sigma2_max)]
        if model.is_cw:
            spec = homodyne.cw_variance_spectrum(betaJ, [math.pi / 2, 0.0], 0.0, grid)
            row += list(homodyne.variance_db(spec))
        return row

    rows = np.array(_pmap(point, list(cfg.beta_sweep), threads))
    cols = {f"db_min_{tag}": rows[:, 0], f"db_max_{tag}": rows[:, 1]}
    if model.is_cw:
        cols[f"db_spectral_min_{tag}"] = rows[:, 2]
        cols[f"db_spectral_max_{tag}"] = rows[:, 3]
    return cols


def cmd_homodyne(cfg: RunConfig, out: Path, threads: int = 1):
    if cfg.d_J == 0:
        raise WSLightError("homodyne runs need a finite window (window.d_J > 0)")
    digest = cfg.digest()
    written = []
    model = _model(cfg)
    if cfg.omega:
        betaJ, grid, _, _ = window_beta(cfg, model, cfg.beta_circ)
        w = np.asarray(cfg.omega) * grid.base_omega
        cols = {"omega_over_Omega": np.asarray(cfg.omega), "omega": w}
        for th in cfg.theta:
            cols[f"sigma2_theta={_label(th)}"] = np.atleast_1d(
                homodyne.cw_variance_spectrum(betaJ, th, w, grid))
        written.append(write_table(out / "spectrum", cols, digest, cfg.format))
    if cfg.beta_sweep:
        cols = {"beta_circ": np.asarray(cfg.beta_sweep)}
        for ratio in cfg.ratios:
            cols.update(_strength_columns(cfg, _model(cfg, ratio), f"ratio{_label(ratio)}", threads))
        if cfg.include_cw or (cfg.kind == "cw" and not cfg.ratios):
            cols.update(_strength_columns(cfg, jsa.double_gaussian_cw(cfg.T_c), "cw", threads))
        written.append(write_table(out / "strength", cols, digest, cfg.format))
    return written


def _distribution(betaJ, cfg):
    dist = coincidence.adaptive_distribution(betaJ, cfg.tail_tol, s_start=cfg.s_max)
    if dist.truncation_mass > cfg.tail_tol:
        raise coincidence.TruncationFailure(
            f"pair distribution tail {dist.truncation_mass:.2e} above {cfg.tail_tol:.1e}")
    return dist


def cmd_coincidence(cfg: RunConfig, out: Path, threads: int = 1):
    digest = cfg.digest()
    model = _model(cfg)
    betas = list(cfg.beta_sweep) or [cfg.beta_circ]

    def point(bc):
        betaJ, _, _, _ = window_beta(cfg, model, bc)
        return betaJ, _distribution(betaJ, cfg)

    results = _pmap(point, betas, threads)
    written = []
    s_top = cfg.s_max
    cols = {"s": np.arange(s_top + 1)}
    for bc, (_, dist) in zip(betas, results):
        p = np.zeros(s_top + 1)
        n = min(s_top + 1, dist.probs.size)
        p[:n] = dist.probs[:n]
        cols[f"P_beta={_label(bc)}"] = p
    written.append(write_table(out / "pair_probs", cols, digest, cfg.format))

    summary = {k: [] for k in ("beta_circ", "N_J", "mean_pairs", "sum_P", "s_max_used",
                               "detW_sq", "P_HH_alpha1", "one_minus_detW_sq",
                               "P_HH_case1", "P_HV_case1", "V_case1",
                               "P_HH_case2", "P_HV_case2", "V_case2")}
    for bc, (betaJ, dist) in zip(betas, results):
        hh1, hv1 = coincidence.coincidence_from_distribution(dist, 1.0)
        hh2, hv2 = coincidence.coincidence_from_distribution(dist, cfg.low_alpha)
        summary["beta_circ"].append(bc)
        summary["N_J"].append(pair_count(betaJ))
        summary["mean_pairs"].append(dist.mean())
        summary["sum_P"].append(float(np.sum(dist.probs)))
        summary["s_max_used"].append(dist.s_max)
        summary["detW_sq"].append(float(dist.probs[0]))
        summary["P_HH_alpha1"].append(hh1)
        summary["one_minus_detW_sq"].append(1 - float(dist.probs[0]))
        summary["P_HH_case1"].append(hh1)
        summary["P_HV_case1"].append(hv1)
        summary["V_case1"].append(coincidence.visibility(hh1, hv1) if hh1 + hv1 > 0 else float("nan"))
        summary["P_HH_case2"].append(hh2)
        summary["P_HV_case2"].append(hv2)
        summary["V_case2"].append(coincidence.visibility(hh2, hv2) if hh2 + hv2 > 0 else float("nan"))
    written.append(write_table(out / "visibility_vs_beta", summary, digest, cfg.format))

    if cfg.alpha_sweep:
        betaJ, _, _, _ = window_beta(cfg, model, cfg.beta_circ)
        dist = _distribution(betaJ, cfg)
        rows = [coincidence.coincidence_from_distribution(dist, a) for a in cfg.alpha_sweep]
        hh = np.array([r[0] for r in rows])
        hv = np.array([r[1] for r in rows])
        written.append(write_table(out / "visibility_vs_alpha", {
            "alpha": np.asarray(cfg.alpha_sweep), "P_HH": hh, "P_HV": hv,
            "V": (hh - hv) / (hh + hv)}, digest, cfg.format))
    return written


def _hom_window(cfg, model):
    if cfg.d_J == 0:
        return None
    tau = 2 * math.pi / (jsa.minimal_bandlimit(model, cfg.bandlimit) * cfg.oversample)
    return WindowSpec.at(cfg.t_J, cfg.d_J * cfg.oversample, tau)


def cmd_hom(cfg: RunConfig, out: Path, threads: int = 1):
    digest = cfg.digest()
    written = []
    model = _model(cfg)
    betas = list(cfg.beta_sweep) or [cfg.beta_circ]
    window = _hom_window(cfg, model)

    def curve(bc, m=model):
        return hom.hom_dip_curve(m, bc, window, cfg.oversample, (cfg.q_min, cfg.q_max),
                                 cfg.bandlimit, workers=threads)

    curves = [curve(bc) for bc in betas]
    cols = {"q": curves[0].q, "tau_H_over_tau": curves[0].delays_base}
    for bc, c in zip(betas, curves):
        cols[f"P_norm_beta={_label(bc)}"] = c.normalized
    written.append(write_table(out / "dip", cols, digest, cfg.format))
    written.append(write_table(out / "dip_summary", {
        "beta_circ": betas, "p_min": [c.p_min for c in curves], "p_max": [c.p_max for c in curves],
        "visibility": [c.visibility for c in curves]}, digest, cfg.format))

    if cfg.ratios:
        vis = {"beta_circ": betas}
        for ratio in cfg.ratios:
            m = _model(cfg, ratio)
            vis[f"V_ratio={_label(ratio)}"] = [curve(bc, m).visibility for bc in betas]
        written.append(write_table(out / "visibility", vis, digest, cfg.format))
    return written


def cmd_oracle_check(cfg: RunConfig, out: Path, threads: int = 1):
    rows = oracle_check.run_checks(seed=cfg.seed, count=cfg.count, cutoff=cfg.cutoff,
                                   beta_circ_max=cfg.oracle_beta_max, corrupt=cfg.corrupt)
    path = write_table(out / "oracle_report", {
        "check": [r.name for r in rows],
        "max_abs_error": [r.max_abs_error for r in rows],
        "tolerance": [r.tolerance for r in rows],
        "passed": [r.passed for r in rows]}, cfg.digest(), cfg.format)
    for r in rows:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:40s} err={r.max_abs_error:.3e} tol={r.tolerance:.0e}")
    failed = [r.name for r in rows if not r.passed]
    if failed:
        raise ToleranceFailure(f"oracle comparisons failed: {', '.join(failed)}")
    return [path]


COMMANDS = {
    "decompose": cmd_decompose,
    "homodyne": cmd_homodyne,
    "coincidence": cmd_coincidence,
    "hom": cmd_hom,
    "oracle-check": cmd_oracle_check,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI run configuration")
    common.add_argument("--preset", choices=PRESETS, help="named figure preset (config overrides it)")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    common.add_argument("--seed", type=int, help="override the oracle seed")
    parser = argparse.ArgumentParser(prog="wslight", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_preset(args.preset) if args.preset else RunConfig()
    if args.config is not None:
        cfg = parse_config(args.config.read_text(), base=cfg)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        written = COMMANDS[args.command](cfg, args.out, args.threads)
    except OSError as exc:
        log.error("IO failure: %s", exc)
        return 2
    except (WSLightError, ValueError) as exc:
        log.error("%s", exc)
        return 1
    for p in written:
        log.info("wrote %s", p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
