# ssr_core/selftest.py
"""Acceptance checks runnable from the command line (`ssr_cli.py selftest`)."""
from __future__ import annotations

import logging
import time
from typing import Callable, List, Tuple

import numpy as np
import pandas as pd

from . import asymptotics, formation, locc, schmidt, teleport
from .data_io import load_fixture
from .fock import BlockedDensity, BlockedPureState, SectorSpace, random_spaces, random_state, tensor_product
from .parallel import spawn_seeds

logger = logging.getLogger(__name__)

Check = Tuple[bool, str]


def _coherent_pair() -> BlockedPureState:
    return load_fixture("phi_plus")


def rank2_example() -> BlockedDensity:
    """1/2 (|01>+|10>)(<01|+<10|)/2 + 1/2 |01><01| on one mode per side."""
    one = SectorSpace((1, 1))
    return BlockedDensity.mixture([(0.5, _coherent_pair()),
                                   (0.5, BlockedPureState(1, one, one, {0: [[1.0]]}))])


# ==== checks ====

def check_siv_normalization(quick: bool, seed: int) -> Check:
    v1 = schmidt.siv(_coherent_pair())
    v0 = schmidt.siv(load_fixture("singlet_const"))
    return abs(v1 - 1.0) <= 1e-12 and abs(v0) <= 1e-12, f"V(phi+)={v1!r} V(singlet)={v0!r}"


def check_teleport_formula(quick: bool, seed: int) -> Check:
    n_max, m_max = (3, 12) if quick else (8, 40)
    grid = [(n, m) for n in range(n_max + 1) for m in range(n, m_max + 1)]
    worst_p, worst_f = 0.0, 1.0
    for (n, m), child in zip(grid, spawn_seeds(seed, len(grid))):
        inst = teleport.TeleportInstance(teleport.random_alpha(n, child), m)
        outs = teleport.run_teleport(inst)
        worst_p = max(worst_p, abs(teleport.exact_success(outs) - teleport.success_probability(n, m)))
        worst_f = min([worst_f] + [o.post_fidelity for o in outs if o.success])
    return worst_p <= 1e-12 and worst_f >= 1 - 1e-10, f"max |dp|={worst_p:.3g} min fidelity={worst_f:.15f}"


def check_siv_monotone(quick: bool, seed: int) -> Check:
    df = locc.siv_monotone_harness(100 if quick else 1000, seed, max_dim=12)
    return bool(df["ok"].all()), f"min slack={df['slack'].min():.3g} over {len(df)} pairs"


def check_conversion_oracle(quick: bool, seed: int) -> Check:
    df = locc.conversion_oracle_harness(20 if quick else 200, seed, max_dim=8)
    return bool(df["ok"].all()), f"{int(df['convertible'].sum())}/{len(df)} convertible, all consistent={bool(df['ok'].all())}"


def check_distillation(quick: bool, seed: int) -> Check:
    p0, delta = 1 / 3, 3.0
    rates = [asymptotics.distill_rate(asymptotics.n_copy_spectrum(p0, n), delta) for n in (64, 128, 256)]
    spec = asymptotics.n_copy_spectrum(p0, 256)
    h = schmidt.binary_entropy(p0)
    fit = asymptotics.gaussian_fit(spec)
    ok = (all(a.ebits_per_copy <= b.ebits_per_copy for a, b in zip(rates, rates[1:]))
          and h - rates[-1].ebits_per_copy <= 0.15
          and rates[-1].truncation_loss <= 0.01
          and all(r.convertible for r in rates)
          and asymptotics.dilute_check(spec, delta, 0)
          and abs(fit.variance - 256 * p0 * (1 - p0)) <= 1e-9
          and abs(fit.mean - 256 * p0) <= 1e-9)
    return ok, f"rates={[round(r.ebits_per_copy, 4) for r in rates]} H={h:.4f}"


def check_data_hiding(quick: bool, seed: int) -> Check:
    plus, minus = load_fixture("phi_plus"), load_fixture("phi_minus")
    hidden = locc.data_hiding_distance(plus, minus, trials=500, seed=seed)
    open_ = locc.data_hiding_distance(plus, minus, trials=100, seed=seed, ssr=False)
    return hidden <= 1e-10 and open_ > 0.4, f"ssr={hidden:.3g} unrestricted={open_:.3g}"


def check_formation_example(quick: bool, seed: int) -> Check:
    rho = load_fixture("mixed_rho")
    restarts = 4 if quick else None
    ef = formation.formation_measure(rho, "eoe", restarts=restarts, seed=seed)
    vf = formation.formation_measure(rho, "siv", restarts=restarts, seed=seed)
    dist = max(ef.best_ensemble.trace_distance(rho), vf.best_ensemble.trace_distance(rho))
    rho2 = rank2_example()
    gaps = {}
    for which in ("eoe", "siv"):
        grid = formation.grid_oracle_rank2(rho2, 1, which, resolution=120 if quick else 200)
        opt = formation.formation_measure(rho2, which, k=2, restarts=restarts, seed=seed)
        gaps[which] = abs(grid.value - opt.value)
    ok = (abs(ef.value - 0.5) <= 1e-6 and abs(vf.value - 0.5) <= 1e-6 and dist <= 1e-8
          and max(gaps.values()) <= (2e-3 if quick else 1e-4))
    return ok, (f"E_F={ef.value:.8f} V_F={vf.value:.8f} "
                f"grid gap eoe={gaps['eoe']:.3g} siv={gaps['siv']:.3g}")


def check_projection_bound(quick: bool, seed: int) -> Check:
    worst = -np.inf
    for n_copies in range(1, (3 if quick else 6) + 1):
        df = formation.projection_bound_table(n_copies, seed=seed + n_copies)
        if (df["rank"] > n_copies + 1).any():
            return False, f"rank above N+1 at N={n_copies}"
        worst = max(worst, float((df["eoe"] - df["bound"]).max()))
    return worst <= 1e-9, f"max eoe - log2(N+1) = {worst:.3g}"


def check_qubit_corollary(quick: bool, seed: int) -> Check:
    rng = np.random.default_rng(seed)
    p = rng.uniform(0.0, 1.0, size=10_000)
    p = p[(p > 0) & (p < 1)]
    gap = schmidt.binary_entropy(p) - 4 * p * (1 - p)
    half = schmidt.binary_entropy(0.5) - 1.0
    split = asymptotics.qubit_corollary_split(1 / 3, 100)
    acct = max(abs(split.total_eoe - split.expected_eoe), abs(split.total_siv - split.expected_siv))
    return bool(gap.min() >= -1e-12 and abs(half) <= 1e-12 and acct <= 1e-9), f"min H-V={gap.min():.3g}"


def check_additivity(quick: bool, seed: int) -> Check:
    worst = 0.0
    for child in spawn_seeds(seed, 10 if quick else 100):
        rng = np.random.default_rng(child)
        a = random_state(*random_spaces(rng, 6), seed=rng)
        b = random_state(*random_spaces(rng, 6), seed=rng)
        ab = tensor_product(a, b)
        worst = max(worst,
                    abs(schmidt.entropy_of_entanglement(ab) - schmidt.entropy_of_entanglement(a)
                        - schmidt.entropy_of_entanglement(b)),
                    abs(schmidt.siv(ab) - schmidt.siv(a) - schmidt.siv(b)))
    return worst <= 1e-9, f"max deviation={worst:.3g}"


CHECKS: List[Tuple[str, Callable[[bool, int], Check]]] = [
    ("siv_normalization", check_siv_normalization),
    ("teleport_formula", check_teleport_formula),
    ("siv_monotone", check_siv_monotone),
    ("conversion_oracle", check_conversion_oracle),
    ("distillation", check_distillation),
    ("data_hiding", check_data_hiding),
    ("formation_example", check_formation_example),
    ("projection_bound", check_projection_bound),
    ("qubit_corollary", check_qubit_corollary),
    ("additivity", check_additivity),
]


def run_selftest(quick: bool = False, seed: int = 0) -> pd.DataFrame:
    rows = []
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            passed, detail = fn(quick, seed)
        except Exception as e:  # laporkan sebagai gagal, lanjut ke cek berikutnya
            logger.exception("check %s raised", name)
            passed, detail = False, f"{type(e).__name__}: {e}"
        dt = time.perf_counter() - t0
        logger.info("selftest %s: %s in %.2fs", name, "ok" if passed else "FAILED", dt)
        rows.append({"check": name, "passed": bool(passed), "detail": detail})
    return pd.DataFrame(rows, columns=["check", "passed", "detail"])
