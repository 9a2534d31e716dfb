# ssr_core/asymptotics.py
"""
N-copy spectra of a two-coefficient state, typical-set truncation and the
distillation / dilution bookkeeping, all on the (n, count, weight) spectrum.
Counts C(N, n) and weights c_n stay in natural-log domain.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from math import ceil, floor, log, sqrt
from typing import Iterable, NamedTuple

import numpy as np
import pandas as pd
from scipy.special import gammaln, logsumexp
from scipy.stats import norm

from .errors import DomainError, EmptyTypicalSet
from .fock import BlockedPureState, SectorSpace
from .locc import ssr_convertible
from .schmidt import (LN2, SchmidtBlocks, UniformBlock, binary_entropy, entropy_of_entanglement,
                      resource_pair, siv)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CopySpectrum:
    """c_n = p0^n p1^(N-n) C(N, n); sector key is n."""
    n_copies: int
    p0: float
    log_weights: np.ndarray
    log_counts: np.ndarray

    @property
    def p1(self) -> float:
        return 1.0 - self.p0

    @property
    def ns(self) -> np.ndarray:
        return np.arange(self.n_copies + 1)

    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def log2_counts(self) -> np.ndarray:
        return self.log_counts / LN2

    def blocks(self) -> SchmidtBlocks:
        return SchmidtBlocks({int(n): UniformBlock(float(lc), float(w))
                              for n, lc, w in zip(self.ns, self.log_counts, self.weights())})

    def moments(self):
        c = self.weights()
        mean = float(c @ self.ns)
        return mean, float(c @ (self.ns - mean) ** 2)


class TypicalSet(NamedTuple):
    sectors: np.ndarray
    mass: float
    min_log_count: float  # log2
    max_log_count: float  # log2

    @property
    def size(self) -> int:
        return int(self.sectors.size)


def n_copy_spectrum(p0: float, n_copies: int) -> CopySpectrum:
    p0 = float(p0)
    if not 0.0 < p0 < 1.0:
        raise DomainError(f"p0 must lie in (0, 1), got {p0!r}")
    if int(n_copies) < 1:
        raise DomainError(f"n_copies must be >= 1, got {n_copies!r}")
    big_n = int(n_copies)
    ns = np.arange(big_n + 1, dtype=float)
    log_counts = gammaln(big_n + 1) - gammaln(ns + 1) - gammaln(big_n - ns + 1)
    log_w = ns * np.log(p0) + (big_n - ns) * np.log1p(-p0) + log_counts
    log_w = log_w - logsumexp(log_w)
    return CopySpectrum(big_n, p0, log_w, log_counts)


def typical_set(spec: CopySpectrum, delta: float, fallback: bool = True) -> TypicalSet:
    """Sectors within delta standard deviations of N p0."""
    if not delta > 0:
        raise DomainError(f"delta must be > 0, got {delta!r}")
    sigma = sqrt(spec.n_copies * spec.p0 * spec.p1)
    centre = spec.n_copies * spec.p0
    ns = spec.ns
    members = ns[np.abs(ns - centre) <= delta * sigma]
    if members.size == 0:
        if not fallback:
            raise EmptyTypicalSet(f"no sector within {delta} sigma of {centre}")
        members = np.array([int(round(centre))])
    mass = float(np.exp(logsumexp(spec.log_weights[members])))
    l2 = spec.log2_counts()[members]
    return TypicalSet(members, min(mass, 1.0), float(l2.min()), float(l2.max()))


def _truncated(spec: CopySpectrum, ts: TypicalSet) -> np.ndarray:
    lw = spec.log_weights[ts.sectors]
    return np.exp(lw - logsumexp(lw))


def _uniform_blocks(sectors: Iterable[int], log_counts: Iterable[float], weights: Iterable[float]) -> SchmidtBlocks:
    return SchmidtBlocks({int(n): UniformBlock(float(lc), float(w))
                          for n, lc, w in zip(sectors, log_counts, weights)})


class DistillResult(NamedTuple):
    ebits_per_copy: float
    residual_siv: float
    truncation_loss: float
    ebits: int
    convertible: bool


def distill_rate(spec: CopySpectrum, delta: float) -> DistillResult:
    ts = typical_set(spec, delta)
    ebits = int(floor(ts.min_log_count + 1e-9))
    ctil = _truncated(spec, ts)
    residual = siv(_uniform_blocks(ts.sectors, spec.log_counts[ts.sectors], ctil))
    source = _uniform_blocks(ts.sectors, spec.log_counts[ts.sectors], ctil)
    target = _uniform_blocks(ts.sectors, [ebits * LN2] * ts.size, ctil)
    ok = ssr_convertible(source, [(1.0, target)])
    logger.debug("distill N=%d: |S|=%d ebits=%d loss=%.3g", spec.n_copies, ts.size, ebits, 1 - ts.mass)
    return DistillResult(ebits / spec.n_copies, residual, 1.0 - ts.mass, ebits, bool(ok))


def dilute_check(spec: CopySpectrum, delta: float, pad_bits: int = 0, count_rule: str = "max") -> bool:
    """Uniform resource of 2^(ceil(log2 C) + pad_bits) per sector converts to the truncated copies."""
    if pad_bits < 0:
        raise DomainError(f"pad_bits must be >= 0, got {pad_bits}")
    if count_rule not in ("max", "min"):
        raise DomainError(f"count_rule must be 'max' or 'min', got {count_rule!r}")
    ts = typical_set(spec, delta)
    ref = ts.max_log_count if count_rule == "max" else ts.min_log_count
    bits = int(ceil(ref - 1e-9)) + int(pad_bits)
    ctil = _truncated(spec, ts)
    source = _uniform_blocks(ts.sectors, [bits * LN2] * ts.size, ctil)
    target = _uniform_blocks(ts.sectors, spec.log_counts[ts.sectors], ctil)
    return bool(ssr_convertible(source, [(1.0, target)]))


class GaussianFit(NamedTuple):
    mean: float
    variance: float
    max_abs_dev: float


def gaussian_fit(spec: CopySpectrum) -> GaussianFit:
    if spec.n_copies < 16:
        logger.warning("gaussian_fit on N=%d copies; the normal approximation is poor", spec.n_copies)
    mean, var = spec.moments()
    dens = norm.pdf(spec.ns, loc=mean, scale=sqrt(var))
    return GaussianFit(mean, var, float(np.max(np.abs(spec.weights() - dens))))


# ==== corollary + remainder ====

def _singlet_constant() -> BlockedPureState:
    h = 1 / sqrt(2)
    two = SectorSpace((1, 2, 1))
    return BlockedPureState(2, two, two, {1: np.array([[0, h], [h, 0]])})


def _coherent_pair() -> BlockedPureState:
    h = 1 / sqrt(2)
    one = SectorSpace((1, 1))
    return BlockedPureState(1, one, one, {0: np.array([[h]]), 1: np.array([[h]])})


class CorollarySplit(NamedTuple):
    singlets: float
    coherent_pairs: float
    total_eoe: float
    total_siv: float
    expected_eoe: float
    expected_siv: float


def qubit_corollary_split(p0: float, n_copies: int) -> CorollarySplit:
    """N[E-V] constant-number singlets plus N*V coherent pairs."""
    if not 0.0 < p0 < 1.0:
        raise DomainError(f"p0 must lie in (0, 1), got {p0!r}")
    e, v = binary_entropy(p0), 4.0 * p0 * (1.0 - p0)
    singlets, pairs = n_copies * (e - v), n_copies * v
    rs, rp = resource_pair(_singlet_constant()), resource_pair(_coherent_pair())
    return CorollarySplit(singlets, pairs,
                          singlets * rs.eoe + pairs * rp.eoe,
                          singlets * rs.siv + pairs * rp.siv,
                          n_copies * e, n_copies * v)


class RemainderEntropy(NamedTuple):
    eoe: float
    bound: float
    per_copy: float


def remainder_entropy(spec: CopySpectrum, delta: float) -> RemainderEntropy:
    """EoE of sum_n c~_n^(1/2) |n>|N-n> over the typical set, against log2 |S|."""
    ts = typical_set(spec, delta)
    ctil = _truncated(spec, ts)
    e = entropy_of_entanglement(SchmidtBlocks.explicit({int(n): [c] for n, c in zip(ts.sectors, ctil)}))
    return RemainderEntropy(e, float(np.log2(ts.size)), e / spec.n_copies)


# ==== tabel ====

def rate_table(p0: float, copies_list: Iterable[int], delta: float) -> pd.DataFrame:
    rows = []
    h = binary_entropy(p0)
    for big_n in copies_list:
        spec = n_copy_spectrum(p0, big_n)
        d = distill_rate(spec, delta)
        rem = remainder_entropy(spec, delta)
        rows.append({
            "n_copies": int(big_n),
            "ebits_per_copy": d.ebits_per_copy,
            "entropy": h,
            "gap": h - d.ebits_per_copy,
            "residual_siv": d.residual_siv,
            "siv_total": big_n * 4.0 * p0 * (1.0 - p0),
            "truncation_loss": d.truncation_loss,
            "distill_ok": d.convertible,
            "dilute_ok": dilute_check(spec, delta, 0),
            "remainder_eoe": rem.eoe,
            "remainder_bound": rem.bound,
        })
    return pd.DataFrame(rows)


def spectrum_frame(spec: CopySpectrum) -> pd.DataFrame:
    return pd.DataFrame({"n": spec.ns, "c_n": spec.weights(), "log2_count": spec.log2_counts()})
