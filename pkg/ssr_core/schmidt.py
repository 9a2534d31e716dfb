# ssr_core/schmidt.py
"""
Sector-wise Schmidt decomposition and the two pure-state resources:
entropy of entanglement (EoE, bits) and superselection-induced variance (SiV).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from math import log
from typing import Dict, Iterable, Mapping, Tuple, Union

import numpy as np
from scipy.linalg import svdvals
from scipy.special import entr

from .config_util import tol
from .fock import BlockedPureState

logger = logging.getLogger(__name__)

LN2 = log(2.0)


# ==== blok koefisien ====

@dataclass(frozen=True)
class ExplicitBlock:
    values: np.ndarray

    def __post_init__(self):
        v = np.sort(np.clip(np.asarray(self.values, dtype=float).reshape(-1), 0.0, None))[::-1]
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def weight(self) -> float:
        return float(self.values.sum())

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.values))

    def segments(self) -> Iterable[Tuple[float, float]]:
        """(value, multiplicity) pairs, nonincreasing."""
        return [(float(x), 1.0) for x in self.values if x > 0]

    def entropy_bits(self) -> float:
        return float(entr(self.values).sum() / LN2)


@dataclass(frozen=True)
class UniformBlock:
    """`count` equal coefficients summing to `weight`; count kept as a natural log."""
    log_count: float
    weight: float

    @staticmethod
    def of_count(count: float, weight: float) -> "UniformBlock":
        return UniformBlock(log(count), weight)

    @property
    def count(self) -> float:
        return float(np.exp(self.log_count))

    @property
    def log2_count(self) -> float:
        return self.log_count / LN2

    def segments(self) -> Iterable[Tuple[float, float]]:
        if self.weight <= 0:
            return []
        c = self.count
        return [(self.weight / c, c)]

    def entropy_bits(self) -> float:
        w = self.weight
        if w <= 0:
            return 0.0
        return w * self.log2_count - w * np.log2(w)


Block = Union[ExplicitBlock, UniformBlock]


@dataclass(frozen=True)
class SchmidtBlocks:
    """Per-sector Schmidt coefficients, keyed by Alice's local number n."""
    entries: Mapping[int, Block]

    def __post_init__(self):
        object.__setattr__(self, "entries", dict(sorted((int(n), b) for n, b in dict(self.entries).items())))

    @staticmethod
    def explicit(values: Mapping[int, Iterable[float]]) -> "SchmidtBlocks":
        return SchmidtBlocks({n: ExplicitBlock(np.asarray(list(v), dtype=float)) for n, v in values.items()})

    def weights(self) -> Dict[int, float]:
        return {n: b.weight for n, b in self.entries.items()}

    def total(self) -> float:
        return float(sum(self.weights().values()))

    def sectors(self) -> list:
        return list(self.entries)

    def block(self, n: int) -> Block:
        return self.entries.get(n, ExplicitBlock(np.zeros(0)))

    def segments(self, n: int):
        return list(self.block(n).segments())

    @property
    def is_explicit(self) -> bool:
        return all(isinstance(b, ExplicitBlock) for b in self.entries.values())

    def values(self, n: int) -> np.ndarray:
        b = self.block(n)
        if not isinstance(b, ExplicitBlock):
            raise TypeError(f"sector {n} is a compressed uniform block")
        return b.values


@dataclass(frozen=True)
class ResourcePair:
    eoe: float
    siv: float
    mean_local_number: float

    def to_dict(self) -> dict:
        return {"eoe": self.eoe, "siv": self.siv, "mean_local_number": self.mean_local_number}


# =========================
# OPERATIONS
# =========================

def schmidt_block_decompose(state: BlockedPureState) -> SchmidtBlocks:
    cutoff = tol("svd_cutoff")
    entries = {}
    for n, b in state.blocks.items():
        s = svdvals(b)
        s = s[s >= cutoff]
        if s.size:
            entries[n] = ExplicitBlock(s ** 2)
    return SchmidtBlocks(entries)


def entropy_of_entanglement(blocks: Union[SchmidtBlocks, BlockedPureState]) -> float:
    if isinstance(blocks, BlockedPureState):
        blocks = schmidt_block_decompose(blocks)
    return float(max(0.0, sum(b.entropy_bits() for b in blocks.entries.values())))


def _number_moments(weights: Mapping[int, float]) -> Tuple[float, float]:
    ns = np.array(list(weights.keys()), dtype=float)
    ps = np.array(list(weights.values()), dtype=float)
    total = ps.sum()
    if total <= 0:
        return 0.0, 0.0
    ps = ps / total
    mean = float(ps @ ns)
    var = float(ps @ (ns - mean) ** 2)
    return mean, var


def _sector_weights(state_or_blocks: Union[SchmidtBlocks, BlockedPureState], party: str) -> Dict[int, float]:
    if isinstance(state_or_blocks, BlockedPureState):
        w = {n: p for n, p in state_or_blocks.weights().items() if p > 0}
        if party == "bob":
            return {state_or_blocks.n_total - n: p for n, p in w.items()}
        return w
    if party == "bob":
        raise ValueError("Bob's marginal needs the state (n_total is not stored on SchmidtBlocks)")
    return {n: p for n, p in state_or_blocks.weights().items() if p > 0}


def siv(state_or_blocks: Union[SchmidtBlocks, BlockedPureState], party: str = "alice") -> float:
    """4 x variance of the local particle number."""
    if party not in ("alice", "bob"):
        raise ValueError(f"party must be 'alice' or 'bob', got {party!r}")
    _, var = _number_moments(_sector_weights(state_or_blocks, party))
    return 4.0 * max(0.0, var)


def local_number_distribution(blocks: Union[SchmidtBlocks, BlockedPureState]) -> np.ndarray:
    """p_n for n = 0..max populated sector."""
    if isinstance(blocks, BlockedPureState):
        blocks = schmidt_block_decompose(blocks)
    w = blocks.weights()
    if not w:
        return np.zeros(1)
    p = np.zeros(max(w) + 1)
    for n, x in w.items():
        p[n] = x
    return p / p.sum()


def resource_pair(state_or_blocks: Union[SchmidtBlocks, BlockedPureState]) -> ResourcePair:
    blocks = (schmidt_block_decompose(state_or_blocks)
              if isinstance(state_or_blocks, BlockedPureState) else state_or_blocks)
    mean, _ = _number_moments(blocks.weights())
    return ResourcePair(entropy_of_entanglement(blocks), siv(blocks), mean)


def binary_entropy(p):
    """H(p) in bits; accepts scalars or arrays."""
    p = np.asarray(p, dtype=float)
    h = (entr(p) + entr(1.0 - p)) / LN2
    return float(h) if h.ndim == 0 else h


def dense_entropy(matrix: np.ndarray) -> float:
    """EoE of an arbitrary bipartite amplitude matrix (no sector structure)."""
    s = svdvals(np.asarray(matrix, dtype=complex))
    lam = s ** 2
    total = lam.sum()
    if total <= 0:
        return 0.0
    return float(entr(lam / total).sum() / LN2)
