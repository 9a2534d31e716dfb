# ssr_core/teleport.py
"""
Teleportation of sum_j alpha_j |j>_A |N-j>_C through the resource
sum_i |i>_Abar |M-i>_B / sqrt(M+1), with Alice measuring her total number
n and a Fourier basis inside each sector.

Registers are unary spaces. Alice holds (A, Abar), Bob's side of the joint
state is (C, B); C is a passive register that never acts.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd

from .config_util import tol
from .errors import DomainError, InvalidState, ZeroProbability
from .fock import (BlockedPureState, LocalPOVM, _ginibre, apply_local, product_space, tensor_product,
                   unary_space)
from .locc import apply_povm_outcome

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TeleportInstance:
    alpha: np.ndarray
    m_resource: int

    def __post_init__(self):
        a = np.array(self.alpha, dtype=complex).reshape(-1)
        if a.size == 0:
            raise InvalidState("alpha must have at least one amplitude")
        if abs(np.vdot(a, a).real - 1.0) > tol("normalization"):
            raise InvalidState(f"alpha has norm^2 {np.vdot(a, a).real!r}")
        if int(self.m_resource) < 0:
            raise DomainError(f"M must be >= 0, got {self.m_resource}")
        a.setflags(write=False)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "m_resource", int(self.m_resource))

    @property
    def n_particles(self) -> int:
        return self.alpha.size - 1


@dataclass(frozen=True, eq=False)
class TeleportOutcome:
    n: int
    k: int
    prob: float
    post_fidelity: float
    success: bool
    n_low: int
    n_high: int
    # Bob-Charlie amplitudes after correction and relabeling, indexed by j
    post_alpha: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {"n": self.n, "k": self.k, "prob": self.prob, "fidelity": self.post_fidelity,
                "success": self.success}


def random_alpha(n_particles: int, seed=None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    a = _ginibre(rng, n_particles + 1)
    return a / np.linalg.norm(a)


def input_from_alpha(alpha, m_resource: int) -> TeleportInstance:
    return TeleportInstance(np.asarray(alpha, dtype=complex), m_resource)


# ==== states ====

def input_state(alpha: np.ndarray) -> BlockedPureState:
    """sum_j alpha_j |j>_A |N-j>_C."""
    big_n = len(alpha) - 1
    u = unary_space(big_n)
    return BlockedPureState(big_n, u, u, {j: [[a]] for j, a in enumerate(alpha) if a != 0})


def resource_state(m_resource: int) -> BlockedPureState:
    u = unary_space(m_resource)
    amp = 1.0 / np.sqrt(m_resource + 1)
    return BlockedPureState(m_resource, u, u, {i: [[amp]] for i in range(m_resource + 1)})


def sector_bounds(n: int, big_n: int, m: int) -> Tuple[int, int]:
    return max(0, n - m), min(n, big_n)


def _pairs(total: int, first_max: int, second_max: int) -> List[Tuple[int, int]]:
    lo, hi = max(0, total - second_max), min(total, first_max)
    return [(x, total - x) for x in range(lo, hi + 1)]


# ==== measurement ====

def bell_basis(n: int, big_n: int, m: int) -> List[np.ndarray]:
    """chi_k^(n), k = 0..D-1, over Alice's sector-n basis |l, n-l>, l ascending."""
    if not 0 <= n <= big_n + m:
        raise DomainError(f"sector n={n} outside 0..{big_n + m}")
    lo, hi = sector_bounds(n, big_n, m)
    d = hi - lo + 1
    ls = np.arange(lo, hi + 1)
    return [np.exp(2j * np.pi * ls * k / d) / np.sqrt(d) for k in range(d)]


def measurement_povm(big_n: int, m: int) -> LocalPOVM:
    """Alice's projectors |chi_k^(n)><chi_k^(n)| on (A, Abar); block-diagonal in n."""
    space = product_space(unary_space(big_n), unary_space(m))
    elements = []
    for n in space.sectors():
        for chi in bell_basis(n, big_n, m):
            elements.append({n: np.outer(chi, chi.conj())})
    return LocalPOVM(space, tuple(elements))


def _correction_phases(bs: np.ndarray, n: int, k: int, d: int, m: int) -> np.ndarray:
    return np.exp(2j * np.pi * (bs - (m - n)) * k / d)


def bob_correction(n: int, k: int, big_n: int, m: int, sector: Optional[int] = None) -> Dict[int, np.ndarray]:
    """Diagonal phase on Bob's (C, B) sectors depending only on B's number b.

    With ``sector`` given only that Bob sector is built.
    """
    lo, hi = sector_bounds(n, big_n, m)
    d = hi - lo + 1
    space = product_space(unary_space(big_n), unary_space(m))
    ops = {}
    for s in (space.sectors() if sector is None else [sector]):
        bs = np.array([b for _, b in _pairs(s, big_n, m)])
        ops[s] = np.diag(_correction_phases(bs, n, k, d, m))
    return ops


def _relabel(bob_amps: np.ndarray, n: int, big_n: int, m: int) -> np.ndarray:
    """Bob's (c, b) amplitudes to Bob-Charlie amplitudes indexed by j = b - (M - n)."""
    post = np.zeros(big_n + 1, dtype=complex)
    for (c, b), amp in zip(_pairs(big_n + m - n, big_n, m), bob_amps):
        j = b - (m - n)
        if 0 <= j <= big_n and c == big_n - j:
            post[j] += amp
        elif abs(amp) > tol("svd_cutoff"):
            raise InvalidState(f"amplitude on unexpected label c={c}, b={b}")
    return post


def run_teleport(instance: TeleportInstance) -> List[TeleportOutcome]:
    alpha = instance.alpha
    big_n, m = instance.n_particles, instance.m_resource
    joint = tensor_product(input_state(alpha), resource_state(m))
    elements = iter(measurement_povm(big_n, m).elements)
    outcomes: List[TeleportOutcome] = []
    for n in range(big_n + m + 1):
        lo, hi = sector_bounds(n, big_n, m)
        success = lo == 0 and hi == big_n
        chis = bell_basis(n, big_n, m)
        bob_sector = big_n + m - n
        for k, chi in enumerate(chis):
            element = next(elements)
            try:
                prob, post = apply_povm_outcome(joint, element)
            except ZeroProbability:
                outcomes.append(TeleportOutcome(n, k, 0.0, 0.0, success, lo, hi,
                                                np.zeros(big_n + 1, dtype=complex)))
                continue
            post = apply_local(post, bob_ops=bob_correction(n, k, big_n, m, sector=bob_sector))
            # block n is chi (x) v after the projection
            amps = _relabel(chi.conj() @ post.block(n), n, big_n, m)
            nrm = np.linalg.norm(amps)
            amps = amps / nrm if nrm > 0 else amps
            fid = float(abs(np.vdot(alpha, amps)) ** 2) if nrm > 0 else 0.0
            outcomes.append(TeleportOutcome(n, k, prob, fid, success, lo, hi, amps))
    logger.debug("teleport N=%d M=%d: %d outcomes", big_n, m, len(outcomes))
    return outcomes


def truncated_alpha(alpha: np.ndarray, lo: int, hi: int) -> np.ndarray:
    out = np.zeros_like(np.asarray(alpha, dtype=complex))
    out[lo:hi + 1] = alpha[lo:hi + 1]
    nrm = np.linalg.norm(out)
    return out / nrm if nrm > 0 else out


def exact_success(outcomes: Iterable[TeleportOutcome]) -> float:
    return float(sum(o.prob for o in outcomes if o.success))


def success_probability(big_n: int, m: int) -> float:
    if big_n < 0 or m < 0:
        raise DomainError(f"N and M must be >= 0, got N={big_n}, M={m}")
    return max(0.0, 1.0 - big_n / (m + 1))


def minimal_resource(big_n: int, target_success: float) -> int:
    t = Fraction(str(target_success))
    if not 0 < t < 1:
        raise DomainError(f"target success must lie in (0, 1), got {target_success!r}")
    return max(0, ceil(Fraction(big_n) / (1 - t) - 1))


def scaling_table(n_list: Iterable[int], target_success: float) -> pd.DataFrame:
    rows = []
    for big_n in n_list:
        m = minimal_resource(int(big_n), target_success)
        rows.append({"n": int(big_n), "target": float(target_success), "m_min": m,
                     "success": success_probability(int(big_n), m)})
    return pd.DataFrame(rows, columns=["n", "target", "m_min", "success"])


def sample_teleport(instance: TeleportInstance, shots: int, seed=None,
                    outcomes: Optional[List[TeleportOutcome]] = None) -> pd.DataFrame:
    """Monte Carlo draw of outcomes from the exact distribution."""
    if shots < 1:
        raise DomainError(f"shots must be >= 1, got {shots}")
    outcomes = outcomes if outcomes is not None else run_teleport(instance)
    probs = np.array([o.prob for o in outcomes])
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(outcomes), size=shots, p=probs / probs.sum())
    counts = np.bincount(picks, minlength=len(outcomes))
    return pd.DataFrame({
        "n": [o.n for o in outcomes],
        "k": [o.k for o in outcomes],
        "prob": probs,
        "count": counts,
        "frequency": counts / shots,
        "success": [o.success for o in outcomes],
    })
