"""Acceptance criteria for the whole toolkit, runnable from tests or the CLI.

Each criterion returns a CriterionResult; independent oracles (grid
search, random-allocation sampling, Monte Carlo cross-checks) live here
next to the checks that use them, never sharing code with the solvers
they validate.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import analysis as an
from . import downlink as dl
from . import region as rg
from . import sensing as sn
from . import uplink as ul
from .channel import SimConfig
from .numerics import waterfill

__all__ = ["CriterionResult", "run_all", "CRITERIA"]

DEFAULT_SEED = 1234


@dataclass(frozen=True)
class CriterionResult:
    name: str
    passed: bool
    value: float
    detail: str
    elapsed: float


def _paper_cfg(seed, trials=100_000) -> SimConfig:
    return SimConfig(M=2, N=2, K=2, L=4, rho_target=0.7, rho_cu=0.8,
                     trials=trials, seed=seed)


# ---------------------------------------------------------------------------
# Independent oracles
# ---------------------------------------------------------------------------

def _wf_objective(gains, noise, alloc):
    return np.sum(np.log2(1.0 + gains * alloc / noise), axis=-1)


def grid_search_waterfill(gains, noise, budget, resolution=1e-3):
    """Best objective over a simplex grid of allocations.

    Exhaustive at the requested resolution for two modes; for three or
    more modes the full 1e-3 grid is infeasible (1.7e8 points at M = 4),
    so the search proceeds coarse to fine: each stage shrinks the step
    eightfold and scans a window around the incumbent.  The objective is
    concave, so the refinement reaches the best grid point of the final
    resolution.
    """
    gains = np.asarray(gains, dtype=float)
    noise = np.asarray(noise, dtype=float)
    m = gains.size
    if budget == 0.0:
        return 0.0
    target_step = resolution * budget

    if m == 2:
        x = np.arange(0.0, budget + target_step / 2, target_step)
        allocs = np.stack([x, budget - x], axis=1)
        return float(np.max(_wf_objective(gains, noise, allocs)))

    center = np.full(m, budget / m)
    step = budget / 10.0
    best_val = -np.inf
    first = True
    while True:
        # concavity keeps the refined optimum within two previous steps
        half = budget if first else 16.0 * step
        first = False
        axes = []
        for i in range(m - 1):
            lo = max(0.0, center[i] - half)
            hi = min(budget, center[i] + half)
            axes.append(np.arange(lo, hi + step / 2, step))
        mesh = np.meshgrid(*axes, indexing="ij")
        cand = np.stack([g.ravel() for g in mesh], axis=1)
        last = budget - cand.sum(axis=1)
        keep = last >= -1e-12
        cand = np.column_stack([cand[keep], np.maximum(last[keep], 0.0)])
        vals = _wf_objective(gains, noise, cand)
        idx = int(np.argmax(vals))
        best_val = max(best_val, float(vals[idx]))
        center = cand[idx]
        if step <= target_step:
            return best_val
        step = max(step / 8.0, target_step)


def _random_simplex(rng, count, dim, budget):
    w = rng.dirichlet(np.ones(dim), size=count)
    return w * budget


# ---------------------------------------------------------------------------
# Criteria
# ---------------------------------------------------------------------------

def criterion_waterfill_oracle(seed=DEFAULT_SEED):
    """Solver objective >= 1e-3 grid-search objective - 1e-6 bits."""
    start = time.time()
    rng = np.random.default_rng((seed, 101))
    worst = np.inf
    for i in range(100):
        m = int(rng.integers(2, 5))
        gains = rng.uniform(0.1, 5.0, m)
        noise = rng.uniform(0.5, 3.0, m)
        budget = float(rng.uniform(0.2, 10.0))
        sol = waterfill(gains, noise, budget)
        solver = float(_wf_objective(gains, noise, sol.allocation))
        oracle = grid_search_waterfill(gains, noise, budget)
        worst = min(worst, solver - oracle)
    elapsed = time.time() - start
    passed = worst >= -1e-6 and elapsed < 10.0
    return CriterionResult("waterfill_oracle", passed, worst,
                           f"worst solver-grid margin {worst:.3e} bits", elapsed)


def criterion_dual_mac_optimality(seed=DEFAULT_SEED):
    """dl_sum_rate >= best of 1e4 random simplex allocations - 1e-6."""
    start = time.time()
    cfg = _paper_cfg(seed)
    rng = np.random.default_rng((seed, 102))
    root = cfg.r_cu().sqrt()
    worst = np.inf
    p_c = 10.0
    for i in range(100):
        w = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
        h = root @ (w / np.sqrt(2.0))
        solver = dl.dl_sum_rate(h, p_c)
        allocs = _random_simplex(rng, 10_000, 2, p_c)
        h1, h2 = h[:, 0], h[:, 1]
        a = float(np.real(h1.conj() @ h1))
        b = float(np.real(h2.conj() @ h2))
        gamma = a * b - abs(h1.conj() @ h2) ** 2
        det = (1.0 + allocs[:, 0] * a + allocs[:, 1] * b
               + allocs[:, 0] * allocs[:, 1] * gamma)
        worst = min(worst, solver - float(np.max(np.log2(det))))
    elapsed = time.time() - start
    passed = worst >= -1e-6 and elapsed < 30.0
    return CriterionResult("dual_mac_optimality", passed, worst,
                           f"worst solver-random margin {worst:.3e} bits", elapsed)


def criterion_ecr_constant(seed=DEFAULT_SEED):
    """Closed-form high-SNR constant vs Wishart log-det Monte Carlo."""
    start = time.time()
    rng = np.random.default_rng((seed, 103))
    results = []
    for m, k in ((2, 2), (2, 1)):
        h = (rng.standard_normal((100_000, m, k))
             + 1j * rng.standard_normal((100_000, m, k))) / np.sqrt(2.0)
        gram = np.einsum("tik,til->tkl", h.conj(), h)
        sign, ld = np.linalg.slogdet(gram)
        mc = float(np.mean(ld)) / math.log(2.0)
        closed = dl.ed_closed_form_iid(m, k)
        results.append((closed, mc))
    err = max(abs(c - m) for c, m in results)
    elapsed = time.time() - start
    ok_values = (abs(results[0][0] - (-0.2228)) < 5e-4
                 and abs(results[1][0] - 0.6100) < 5e-4)
    passed = err <= 0.02 and ok_values and elapsed < 30.0
    return CriterionResult(
        "ecr_constant", passed, err,
        f"(2,2): {results[0][0]:.4f} vs MC {results[0][1]:.4f}; "
        f"(2,1): {results[1][0]:.4f} vs MC {results[1][1]:.4f}", elapsed)


# Grid placement for the diversity fits: the outage window [1e-4, 1e-1]
# is mandated, and the asymptotic decay is only approached at its deep
# end, so the SNR grids sit over the deepest decade of that window.
_DL_DIVERSITY_GRID_DB = np.arange(21.0, 24.01, 0.5)
_UL_DIVERSITY_GRID_DB = np.arange(22.5, 25.51, 0.5)
_DIVERSITY_EVENTS = 8000
_DIVERSITY_CAP = 60_000_000


def criterion_dl_diversity(seed=DEFAULT_SEED):
    """Downlink outage decay order = MK = 4 within +-0.5."""
    start = time.time()
    cfg = _paper_cfg(seed)
    ops = [dl.dl_outage_prob(cfg, 5.0, 10 ** (g / 10.0),
                             min_events=_DIVERSITY_EVENTS,
                             max_trials=_DIVERSITY_CAP).mean
           for g in _DL_DIVERSITY_GRID_DB]
    fit = an.fit_diversity(_DL_DIVERSITY_GRID_DB, ops)
    div = -fit.slope
    elapsed = time.time() - start
    passed = abs(div - 4.0) <= 0.5 and elapsed < 600.0
    return CriterionResult("dl_diversity", passed, div,
                           f"fitted {div:.3f}, r2 {fit.r_squared:.4f}", elapsed)


def criterion_ul_diversity(seed=DEFAULT_SEED):
    """Uplink outage decay order = NK = 4 within +-0.5."""
    start = time.time()
    cfg = _paper_cfg(seed)
    profile = ul.sensing_profile(cfg.r_target().matrix, cfg.N, cfg.L, 10.0)
    ops = [ul.ul_outage_prob(cfg, 5.0, 10 ** (g / 10.0), profile,
                             min_events=_DIVERSITY_EVENTS,
                             max_trials=_DIVERSITY_CAP).mean
           for g in _UL_DIVERSITY_GRID_DB]
    fit = an.fit_diversity(_UL_DIVERSITY_GRID_DB, ops)
    div = -fit.slope
    elapsed = time.time() - start
    passed = abs(div - 4.0) <= 0.5 and elapsed < 600.0
    return CriterionResult("ul_diversity", passed, div,
                           f"fitted {div:.3f}, r2 {fit.r_squared:.4f}", elapsed)


def criterion_ecr_slopes(seed=DEFAULT_SEED):
    """Downlink and uplink ECR gain over a 10 dB step = K log2(10) +- 2%."""
    start = time.time()
    cfg = _paper_cfg(seed)
    target = 2.0 * math.log2(10.0)
    d = dl.dl_ecr(cfg, 1e4).mean - dl.dl_ecr(cfg, 1e3).mean
    profile = ul.sensing_profile(cfg.r_target().matrix, cfg.N, cfg.L, 10.0)
    u = (ul.ul_ecr(cfg, 1e4, profile).mean
         - ul.ul_ecr(cfg, 1e3, profile).mean)
    err = max(abs(d - target), abs(u - target)) / target
    elapsed = time.time() - start
    passed = err <= 0.02 and elapsed < 300.0
    return CriterionResult("ecr_slopes", passed, err,
                           f"dl step {d:.4f}, ul step {u:.4f}, "
                           f"target {target:.4f}", elapsed)


def criterion_ecr_asymptote(seed=DEFAULT_SEED):
    """i.i.d. downlink ECR at 40 dB matches its high-SNR line within 0.1."""
    start = time.time()
    cfg = SimConfig(M=2, N=2, K=2, L=4, rho_target=0.7, rho_cu=0.0,
                    trials=100_000, seed=seed)
    mc = dl.dl_ecr(cfg, 1e4).mean
    line = dl.dl_ecr_asymptote(1e4, 2, dl.ed_closed_form_iid(2, 2))
    gap = abs(mc - line)
    elapsed = time.time() - start
    return CriterionResult("ecr_asymptote", gap <= 0.1, gap,
                           f"MC {mc:.4f} vs line {line:.4f}", elapsed)


def criterion_sr_brute_force(seed=DEFAULT_SEED):
    """Closed-form sensing rates beat 1e4 random feasible waveforms."""
    start = time.time()
    cfg = _paper_cfg(seed)
    rt = cfg.r_target().matrix
    p_s = 10.0
    sr_u, _ = sn.ul_sr(rt, cfg.N, cfg.L, p_s)
    sigma = dl.estimate_mean_covariance(cfg, p_c=cfg.p_c)
    s2 = sn.sigma2_effective(rt, sigma)
    scenario_d = sn.SensingScenario(r_target=rt, n_rx=cfg.N, n_slots=cfg.L,
                                    sigma2=s2, p_s=p_s)
    sr_d, _ = sn.dl_sr(scenario_d)
    scenario_u = sn.SensingScenario(r_target=rt, n_rx=cfg.N, n_slots=cfg.L,
                                    sigma2=1.0, p_s=p_s)

    rng = np.random.default_rng((seed, 108))
    worst = np.inf
    for _ in range(10_000):
        s = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
        s *= math.sqrt(p_s / np.sum(np.abs(s) ** 2))
        worst = min(worst,
                    sr_d - sn.sensing_mi(scenario_d, s) / cfg.L,
                    sr_u - sn.sensing_mi(scenario_u, s) / cfg.L)
    hand_gap = abs(sr_u - 2.3137)
    elapsed = time.time() - start
    passed = worst >= -1e-9 and hand_gap <= 1e-3 and elapsed < 60.0
    return CriterionResult("sr_brute_force", passed, worst,
                           f"worst margin {worst:.3e}; ul_sr {sr_u:.5f} "
                           f"(hand 2.3137)", elapsed)


def criterion_sr_slopes(seed=DEFAULT_SEED):
    """Sensing-rate slopes NM/L = 1, split baseline 0.5, high-SNR form."""
    start = time.time()
    cfg = _paper_cfg(seed)
    rt = cfg.r_target().matrix
    sigma = dl.estimate_mean_covariance(cfg, p_c=cfg.p_c)
    s2 = sn.sigma2_effective(rt, sigma)
    grid_db = np.arange(30.0, 50.01, 2.5)
    dl_vals, ul_vals, fd_vals = [], [], []
    for g in grid_db:
        p_s = 10 ** (g / 10.0)
        scen = sn.SensingScenario(r_target=rt, n_rx=cfg.N, n_slots=cfg.L,
                                  sigma2=s2, p_s=p_s)
        dl_vals.append(sn.dl_sr(scen)[0])
        ul_vals.append(sn.ul_sr(rt, cfg.N, cfg.L, p_s)[0])
        fd_vals.append(sn.fdsac_sr(rt, cfg.N, cfg.L, p_s, 0.5))
    win = (30.0, 50.0)
    s_dl = an.fit_highsnr_slope(grid_db, dl_vals, win).slope
    s_ul = an.fit_highsnr_slope(grid_db, ul_vals, win).slope
    s_fd = an.fit_highsnr_slope(grid_db, fd_vals, win).slope
    scen40 = sn.SensingScenario(r_target=rt, n_rx=cfg.N, n_slots=cfg.L,
                                sigma2=s2, p_s=1e4)
    approx, valid = sn.sr_highsnr(rt, cfg.N, cfg.L, 1e4, sigma2=s2)
    gap = abs(approx - sn.dl_sr(scen40)[0])
    err = max(abs(s_dl - 1.0), abs(s_ul - 1.0), abs(s_fd - 0.5) * 2.0)
    elapsed = time.time() - start
    passed = (abs(s_dl - 1.0) <= 0.02 and abs(s_ul - 1.0) <= 0.02
              and abs(s_fd - 0.5) <= 0.02 and valid and gap <= 0.05)
    return CriterionResult("sr_slopes", passed, err,
                           f"dl {s_dl:.4f}, ul {s_ul:.4f}, fdsac {s_fd:.4f}, "
                           f"highsnr gap {gap:.4f}", elapsed)


def criterion_sr_orderings(seed=DEFAULT_SEED):
    """Sensing-rate crossover (downlink) and uniform dominance (uplink)."""
    start = time.time()
    cfg = _paper_cfg(seed)
    rt = cfg.r_target().matrix
    sigma = dl.estimate_mean_covariance(cfg, p_c=cfg.p_c)
    s2 = sn.sigma2_effective(rt, sigma)
    grid_db = np.arange(0.0, 30.01, 5.0)
    ok = True
    notes = []
    for g in grid_db:
        p_s = 10 ** (g / 10.0)
        scen = sn.SensingScenario(r_target=rt, n_rx=cfg.N, n_slots=cfg.L,
                                  sigma2=s2, p_s=p_s)
        d_isac = sn.dl_sr(scen)[0]
        u_isac = sn.ul_sr(rt, cfg.N, cfg.L, p_s)[0]
        fdsac = sn.fdsac_sr(rt, cfg.N, cfg.L, p_s, 0.5)
        if g <= 5.0 and not fdsac > d_isac:
            ok = False
            notes.append(f"low-SNR crossover violated at {g} dB")
        if g >= 25.0 and not d_isac > fdsac:
            ok = False
            notes.append(f"high-SNR crossover violated at {g} dB")
        if not u_isac > fdsac:
            ok = False
            notes.append(f"uplink dominance violated at {g} dB")
    elapsed = time.time() - start
    return CriterionResult("sr_orderings", ok, float(ok),
                           "; ".join(notes) or "all orderings hold", elapsed)


def criterion_regions(seed=DEFAULT_SEED):
    """Region containment at p_c = 5 dB, p_s = 10 dB."""
    start = time.time()
    cfg = _paper_cfg(seed)
    p_c, p_s = 10 ** 0.5, 10.0
    d_isac = rg.dl_isac_region(cfg, p_c, p_s)
    d_fdsac = rg.dl_fdsac_region(cfg, p_c, p_s)
    slack = 3.0 * max(p.cr_se for p in d_isac.corners + d_fdsac.corners)
    dl_ok, dl_gap = rg.region_contains(d_isac, d_fdsac, cr_slack=slack)

    u_isac = rg.ul_isac_region(cfg, p_c, p_s)
    u_fdsac = rg.ul_fdsac_region(cfg, p_c, p_s)
    max_ecr = max(p.cr for p in u_fdsac.corners)
    trimmed = tuple(p for p in u_fdsac.corners if p.cr < 0.98 * max_ecr)
    inner = rg.RateRegion(corners=trimmed, sweep_param="alpha",
                          grid=u_fdsac.grid[:len(trimmed)],
                          sweep_points=trimmed)
    slack_u = 3.0 * max(p.cr_se for p in u_isac.corners + u_fdsac.corners)
    ul_ok, ul_gap = rg.region_contains(u_isac, inner, cr_slack=slack_u)
    elapsed = time.time() - start
    passed = dl_ok and ul_ok and elapsed < 900.0
    return CriterionResult("regions", passed, max(dl_gap, ul_gap),
                           f"dl contained {dl_ok} (gap {dl_gap:.3g}); "
                           f"ul contained {ul_ok} below 98% max ECR "
                           f"(gap {ul_gap:.3g})", elapsed)


def criterion_determinism(seed=DEFAULT_SEED):
    """Identical (config, seed) reruns produce byte-identical CSV."""
    import os
    import tempfile

    from . import cli

    start = time.time()
    raw = {"trials": 5000, "seed": seed, "max_trials": 100_000,
           "sweep_db": [0.0, 10.0, 20.0]}
    cfg, params = cli.parse_config(raw)
    outputs = []
    with tempfile.TemporaryDirectory() as tmp:
        for i in range(2):
            path = os.path.join(tmp, f"run{i}.csv")
            spec = cli.ExperimentSpec(name="op_vs_snr", config=cfg,
                                      params=params, output_path=path)
            status = cli.run(spec)
            assert status == 0
            with open(path, "rb") as fh:
                outputs.append(fh.read())
    same = outputs[0] == outputs[1] and len(outputs[0]) > 0
    elapsed = time.time() - start
    return CriterionResult("determinism", bool(same), float(same),
                           "byte-identical rerun" if same else "outputs differ",
                           elapsed)


CRITERIA = (
    criterion_waterfill_oracle,
    criterion_dual_mac_optimality,
    criterion_ecr_constant,
    criterion_dl_diversity,
    criterion_ul_diversity,
    criterion_ecr_slopes,
    criterion_ecr_asymptote,
    criterion_sr_brute_force,
    criterion_sr_slopes,
    criterion_sr_orderings,
    criterion_regions,
    criterion_determinism,
)


def run_all(seed=DEFAULT_SEED):
    """Run every criterion, printing one pass/fail line per criterion."""
    results = []
    for fn in CRITERIA:
        res = fn(seed=seed)
        results.append(res)
        status = "PASS" if res.passed else "FAIL"
        print(f"[{status}] {res.name}: {res.detail} ({res.elapsed:.1f}s)")
    return results
