# ssr_core/formation.py
"""
Formation measures of mixed states: the least ensemble-averaged EoE or SiV
over decompositions whose members each sit in one global sector.

Inside a sector with eigen-decomposition rho_N = sum_j lam_j |v_j><v_j|, every
K-member decomposition is psi~_i = sum_j U_ij sqrt(lam_j) v_j for a K x r
isometry U. U is the unitary polar factor of an unconstrained complex matrix,
so the search runs with L-BFGS-B over 2Kr real parameters.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import log2
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.linalg import eigh, polar
from scipy.optimize import minimize
from scipy.special import entr

from .config_util import current
from .errors import DomainError, RankExceedsK, ZeroProjection
from .fock import (BlockedDensity, BlockedPureState, SectorSpace, _ginibre, density_tensor_product,
                   from_vector, occupation_strings, qubit_modes_space, sector_layout, trace_distance)
from .parallel import parallel_map
from .schmidt import LN2, dense_entropy, entropy_of_entanglement, schmidt_block_decompose, siv

logger = logging.getLogger(__name__)

MEASURES = ("eoe", "siv")
RANK_CUTOFF = 1e-12
MEMBER_CUTOFF = 1e-14
# projected-gradient stop for L-BFGS-B
GTOL = 1e-9


# =========================
# TYPES
# =========================

@dataclass(frozen=True, eq=False)
class EnsembleDecomposition:
    members: Tuple[Tuple[float, BlockedPureState], ...]

    def reconstruct(self) -> BlockedDensity:
        return BlockedDensity.mixture(self.members)

    def trace_distance(self, rho: BlockedDensity) -> float:
        return trace_distance(self.reconstruct(), rho)

    def average(self, which: str) -> float:
        fn = entropy_of_entanglement if which == "eoe" else siv
        return float(sum(p * fn(s) for p, s in self.members))

    def to_items(self) -> List[Tuple[float, BlockedPureState]]:
        return list(self.members)


@dataclass(frozen=True, eq=False)
class FormationResult:
    value: float
    best_ensemble: Optional[EnsembleDecomposition]
    restarts: int
    converged: bool
    sector_values: Dict[int, float] = field(default_factory=dict)
    isometries: Dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {"value": self.value, "converged": self.converged, "restarts": self.restarts,
                "sector_values": {str(n): v for n, v in self.sector_values.items()}}


# =========================
# OBJECTIVES
# =========================

Layout = List[Tuple[int, int, int, int]]


def _eoe_objective(layout: Layout) -> Callable[[np.ndarray], float]:
    """sum_i p_i E(psi_i) for the rows of X (unnormalised members)."""
    def f(x: np.ndarray) -> float:
        k = x.shape[0]
        acc = 0.0
        probs = np.zeros(k)
        for _, off, da, db in layout:
            xb = x[:, off:off + da * db].reshape(k, da, db)
            s2 = np.linalg.svd(xb, compute_uv=False) ** 2
            acc += float(entr(s2).sum())
            probs += s2.sum(axis=1)
        return (acc - float(entr(probs).sum())) / LN2
    return f


def _siv_objective(layout: Layout) -> Callable[[np.ndarray], float]:
    ns = np.array([n for n, _, _, _ in layout], dtype=float)
    spans = [(off, off + da * db) for _, off, da, db in layout]

    def f(x: np.ndarray) -> float:
        a2 = np.abs(x) ** 2
        w = np.stack([a2[:, lo:hi].sum(axis=1) for lo, hi in spans], axis=1)
        p = w.sum(axis=1)
        first = w @ ns
        second = w @ (ns ** 2)
        live = p > 1e-300
        return float(4.0 * (second.sum() - np.sum(first[live] ** 2 / p[live])))
    return f


def _isometry(z: np.ndarray, k: int, r: int) -> np.ndarray:
    m = z[:k * r].reshape(k, r) + 1j * z[k * r:].reshape(k, r)
    u, _ = polar(m)
    return u


def _params(u: np.ndarray) -> np.ndarray:
    return np.concatenate([u.real.reshape(-1), u.imag.reshape(-1)])


# =========================
# PER-SECTOR SEARCH
# =========================

class _SectorFit(NamedTuple):
    value: float
    isometry: np.ndarray
    converged: bool


def _sector_basis(rho_n: np.ndarray) -> np.ndarray:
    """Rows sqrt(lam_j) v_j^T for the nonzero eigenpairs."""
    lam, vecs = eigh(rho_n)
    keep = lam > RANK_CUTOFF
    return (np.sqrt(lam[keep])[:, None] * vecs[:, keep].T).astype(complex)


def _resolve_k(k: Optional[int], r: int, rule: str) -> int:
    if k is None:
        return r * r if rule == "rank_squared" else r
    if k < r:
        raise RankExceedsK(f"ensemble size K={k} is below sector rank {r}")
    return int(k)


def _fit_sector(basis: np.ndarray, objective: Callable[[np.ndarray], float], k: int,
                restarts: int, seeds: Sequence[np.random.SeedSequence], max_iters: int, ftol: float,
                warm: Optional[np.ndarray]) -> _SectorFit:
    r = basis.shape[0]
    if r == 1:
        u = np.zeros((k, 1), dtype=complex)
        u[0, 0] = 1.0
        return _SectorFit(objective(u @ basis), u, True)

    def f(z: np.ndarray) -> float:
        return objective(_isometry(z, k, r) @ basis)

    starts: List[np.ndarray] = []
    eig_start = np.zeros((k, r), dtype=complex)
    eig_start[:r, :r] = np.eye(r)
    starts.append(_params(eig_start))
    if warm is not None:
        w = np.zeros((k, r), dtype=complex)
        rows = min(k, warm.shape[0])
        w[:rows] = warm[:rows]
        starts.append(_params(w))
    for child in seeds[:max(0, restarts - len(starts))]:
        rng = np.random.default_rng(child)
        starts.append(_params(_ginibre(rng, (k, r))))

    def run(z0: np.ndarray) -> Tuple[float, np.ndarray, bool]:
        f0 = f(z0)
        res = minimize(f, z0, method="L-BFGS-B", options={"maxiter": max_iters, "ftol": ftol, "gtol": GTOL})
        if res.fun <= f0:
            return float(res.fun), res.x, bool(res.success)
        return f0, z0, bool(res.success)

    outs = parallel_map(run, starts)
    best = min(range(len(outs)), key=lambda i: (outs[i][0], i))
    for i, (val, _, ok) in enumerate(outs):
        logger.debug("restart %d: value=%.12g converged=%s", i, val, ok)
    val, z, ok = outs[best]
    return _SectorFit(val, _isometry(z, k, r), ok)


# =========================
# PUBLIC OPERATIONS
# =========================

def formation_measure(rho: BlockedDensity, which: str = "eoe", k: Optional[int] = None,
                      restarts: Optional[int] = None, seed=None, max_iters: Optional[int] = None,
                      tol: Optional[float] = None, respect_ssr: bool = True,
                      warm_start: Optional[FormationResult] = None) -> FormationResult:
    """Upper bound on the formation measure with its certificate ensemble."""
    if which not in MEASURES:
        raise DomainError(f"measure must be one of {MEASURES}, got {which!r}")
    cfg = current()["formation"]
    restarts = int(cfg["restarts"] if restarts is None else restarts)
    max_iters = int(cfg["max_iters"] if max_iters is None else max_iters)
    ftol = float(cfg["tol"] if tol is None else tol)
    if restarts < 1:
        raise DomainError(f"restarts must be >= 1, got {restarts}")
    if not respect_ssr:
        return _unrestricted_eoe(rho, which, k, restarts, seed, max_iters, ftol, cfg["k_rule"])

    sector_seeds = np.random.SeedSequence(seed).spawn(len(rho.sectors))
    members: List[Tuple[float, BlockedPureState]] = []
    sector_values: Dict[int, float] = {}
    isometries: Dict[int, np.ndarray] = {}
    converged = True
    for (n_total, (q, rho_n)), ss in zip(rho.sectors.items(), sector_seeds):
        layout, _ = sector_layout(rho.alice, rho.bob, n_total)
        basis = _sector_basis(rho_n)
        r = basis.shape[0]
        kk = _resolve_k(k, r, cfg["k_rule"])
        objective = _eoe_objective(layout) if which == "eoe" else _siv_objective(layout)
        warm = warm_start.isometries.get(n_total) if warm_start is not None else None
        fit = _fit_sector(basis, objective, kk, restarts, ss.spawn(restarts), max_iters, ftol, warm)
        converged = converged and fit.converged
        isometries[n_total] = fit.isometry
        sector_members = _members(fit.isometry @ basis, rho.alice, rho.bob, n_total)
        sector_values[n_total] = EnsembleDecomposition(tuple(sector_members)).average(which)
        members.extend((q * p, s) for p, s in sector_members)
        logger.info("sector N=%d rank=%d K=%d: %s=%.10g", n_total, r, kk, which, sector_values[n_total])

    ens = EnsembleDecomposition(tuple(members))
    return FormationResult(ens.average(which), ens, restarts, converged, sector_values, isometries)


def _members(x: np.ndarray, alice: SectorSpace, bob: SectorSpace, n_total: int) -> List[Tuple[float, BlockedPureState]]:
    out = []
    for row in x:
        p = float(np.vdot(row, row).real)
        if p > MEMBER_CUTOFF:
            out.append((p, from_vector(row / np.sqrt(p), alice, bob, n_total)))
    total = sum(p for p, _ in out)
    return [(p / total, s) for p, s in out]


def _unrestricted_eoe(rho: BlockedDensity, which: str, k, restarts, seed, max_iters, ftol, rule) -> FormationResult:
    if which != "eoe":
        raise DomainError("the unrestricted formation measure is defined for eoe only")
    full = rho.to_full_density()
    basis = _sector_basis(full)
    r = basis.shape[0]
    kk = _resolve_k(k, r, rule)
    layout = [(0, 0, rho.alice.total_dim, rho.bob.total_dim)]
    seeds = np.random.SeedSequence(seed).spawn(restarts)
    fit = _fit_sector(basis, _eoe_objective(layout), kk, restarts, seeds, max_iters, ftol, None)
    da, db = rho.alice.total_dim, rho.bob.total_dim
    value = 0.0
    for row in fit.isometry @ basis:
        p = float(np.vdot(row, row).real)
        if p > MEMBER_CUTOFF:
            value += p * dense_entropy(row.reshape(da, db))
    return FormationResult(value, None, restarts, fit.converged, {}, {-1: fit.isometry})


class GridOracle(NamedTuple):
    value: float
    theta: float
    phi: float


def grid_oracle_rank2(rho: BlockedDensity, n_total: int, which: str, resolution: int = 200) -> GridOracle:
    """Brute-force minimum over two-member decompositions of a rank-2 sector."""
    if which not in MEASURES:
        raise DomainError(f"measure must be one of {MEASURES}, got {which!r}")
    if n_total not in rho.sectors:
        raise DomainError(f"sector {n_total} is not populated")
    basis = _sector_basis(rho.sectors[n_total][1])
    if basis.shape[0] != 2:
        raise DomainError(f"sector {n_total} has rank {basis.shape[0]}, expected 2")
    layout, _ = sector_layout(rho.alice, rho.bob, n_total)
    objective = _eoe_objective(layout) if which == "eoe" else _siv_objective(layout)
    best = GridOracle(float("inf"), 0.0, 0.0)
    for theta in np.linspace(0.0, np.pi / 2, resolution):
        c, s = np.cos(theta), np.sin(theta)
        for phi in np.linspace(0.0, 2 * np.pi, resolution, endpoint=False):
            e = np.exp(1j * phi)
            u = np.array([[c, s * e], [-s, c * e]])
            val = objective(u @ basis)
            if val < best.value:
                best = GridOracle(val, float(theta), float(phi))
    return best


# ==== separable projection ====

class ProjectionBound(NamedTuple):
    schmidt_rank: int
    eoe: float
    bound: float
    per_copy: float


def _qubit_product_amplitudes(qubits: Sequence[np.ndarray], space: SectorSpace) -> Dict[int, np.ndarray]:
    """Per-sector amplitudes of a product of single-mode states, in occupation-string order."""
    m = len(qubits)
    out = {}
    for n in space.sectors():
        strings = occupation_strings(m, n)
        out[n] = np.array([np.prod([qubits[i][b] for i, b in enumerate(t)]) for t in strings], dtype=complex)
    return out


def projection_entanglement_bound(product_states: Sequence[Tuple[np.ndarray, np.ndarray]],
                                  n_sector: int) -> ProjectionBound:
    """Project a product of N qubit-mode pairs onto global sector n_sector."""
    big_n = len(product_states)
    if big_n < 1:
        raise DomainError("need at least one qubit-mode pair")
    space = qubit_modes_space(big_n)
    if not 0 <= n_sector <= 2 * big_n:
        raise ZeroProjection(f"sector {n_sector} is outside 0..{2 * big_n}")
    a_amp = _qubit_product_amplitudes([np.asarray(a, dtype=complex) for a, _ in product_states], space)
    b_amp = _qubit_product_amplitudes([np.asarray(b, dtype=complex) for _, b in product_states], space)
    blocks = {}
    for x in range(max(0, n_sector - big_n), min(n_sector, big_n) + 1):
        blocks[x] = np.outer(a_amp[x], b_amp[n_sector - x])
    state = BlockedPureState(n_sector, space, space, blocks)
    if state.norm() ** 2 < MEMBER_CUTOFF:
        raise ZeroProjection(f"sector {n_sector} component vanishes")
    state = BlockedPureState(n_sector, space, space, {n: b / state.norm() for n, b in blocks.items()})
    sb = schmidt_block_decompose(state)
    rank = sum(b.rank for b in sb.entries.values())
    eoe = entropy_of_entanglement(sb)
    if rank > big_n + 1 or eoe > log2(max(rank, 1)) + 1e-9:
        raise RuntimeError(f"projection bound violated: rank={rank}, eoe={eoe}")
    return ProjectionBound(rank, eoe, log2(big_n + 1), eoe / big_n)


def random_product_pairs(n_copies: int, seed=None) -> List[Tuple[np.ndarray, np.ndarray]]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_copies):
        a, b = _ginibre(rng, 2), _ginibre(rng, 2)
        out.append((a / np.linalg.norm(a), b / np.linalg.norm(b)))
    return out


def projection_bound_table(n_copies: int, seed=None) -> pd.DataFrame:
    pairs = random_product_pairs(n_copies, seed)
    rows = []
    for n in range(2 * n_copies + 1):
        pb = projection_entanglement_bound(pairs, n)
        rows.append({"sector": n, "rank": pb.schmidt_rank, "eoe": pb.eoe, "bound": pb.bound,
                     "per_copy": pb.per_copy})
    return pd.DataFrame(rows, columns=["sector", "rank", "eoe", "bound", "per_copy"])


# ==== additivity ====

class AdditivityProbe(NamedTuple):
    v1: float
    v2: float
    ratio: float


def vf_additivity_probe(rho: BlockedDensity, **opts) -> AdditivityProbe:
    v1 = formation_measure(rho, "siv", **opts).value
    v2 = formation_measure(density_tensor_product(rho, rho), "siv", **opts).value
    ratio = v2 / (2.0 * v1) if abs(v1) > 1e-12 else float("nan")
    return AdditivityProbe(v1, v2, ratio)
