# ssr_core/fock.py
"""
Sector-blocked data model for particle-number superselected bipartite systems.

A local space is described only by its sector dimensions d_n (n = local
particle number). A pure state lives in one global sector N and is stored as
one amplitude matrix per Alice sector n, of shape d^A_n x d^B_{N-n}. Missing
blocks are exact zeros.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from math import comb
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np

from .config_util import tol
from .errors import EmptySector, InvalidState, ZeroState, DomainError

logger = logging.getLogger(__name__)

Blocks = Dict[int, np.ndarray]


# =========================
# SECTOR SPACE
# =========================

@dataclass(frozen=True)
class SectorSpace:
    dims: Tuple[int, ...]

    def __post_init__(self):
        try:
            dims = tuple(int(d) for d in self.dims)
        except (TypeError, ValueError):
            raise InvalidState(f"sector dims must be integers, got {self.dims!r}")
        if any(isinstance(d, bool) or d != i for d, i in zip(self.dims, dims)):
            raise InvalidState(f"sector dims must be whole numbers, got {self.dims!r}")
        if not dims or any(d < 0 for d in dims):
            raise InvalidState(f"sector dims must be nonnegative, got {dims}")
        if sum(dims) <= 0:
            raise InvalidState("at least one sector must be nonempty")
        object.__setattr__(self, "dims", dims)

    @property
    def n_max(self) -> int:
        return len(self.dims) - 1

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    def dim(self, n: int) -> int:
        return self.dims[n] if 0 <= n < len(self.dims) else 0

    def sectors(self) -> List[int]:
        return [n for n, d in enumerate(self.dims) if d > 0]

    def offset(self, n: int) -> int:
        return sum(self.dims[:n])

    def number_diagonal(self) -> np.ndarray:
        """Diagonal of the local number operator in the stacked sector basis."""
        return np.repeat(np.arange(len(self.dims), dtype=float), self.dims)


def qubit_modes_space(m: int) -> SectorSpace:
    if m < 0:
        raise DomainError(f"mode count must be >= 0, got {m}")
    return SectorSpace(tuple(comb(m, n) for n in range(m + 1)))


def unary_space(n_max: int) -> SectorSpace:
    if n_max < 0:
        raise DomainError(f"n_max must be >= 0, got {n_max}")
    return SectorSpace((1,) * (n_max + 1))


def occupation_strings(m: int, n: int) -> List[Tuple[int, ...]]:
    """Basis of sector n of m two-level modes, lexicographic (the stored order)."""
    return [t for t in itertools.product((0, 1), repeat=m) if sum(t) == n]


def product_space(a: SectorSpace, b: SectorSpace) -> SectorSpace:
    dims = [0] * (a.n_max + b.n_max + 1)
    for x, da in enumerate(a.dims):
        for y, db in enumerate(b.dims):
            dims[x + y] += da * db
    return SectorSpace(tuple(dims))


def _pair_offset(a: SectorSpace, b: SectorSpace, x: int, y: int) -> int:
    """Offset of the (x, y) factor pair inside product sector x + y."""
    n = x + y
    return sum(a.dim(x2) * b.dim(n - x2) for x2 in range(x))


def admissible_sectors(alice: SectorSpace, bob: SectorSpace, n_total: int) -> List[int]:
    return [n for n in range(0, min(alice.n_max, n_total) + 1)
            if alice.dim(n) > 0 and bob.dim(n_total - n) > 0]


def sector_layout(alice: SectorSpace, bob: SectorSpace, n_total: int) -> Tuple[List[Tuple[int, int, int, int]], int]:
    """[(n_alice, offset, d_A, d_B)], total dim of global sector n_total.

    Basis order: ascending n_alice, then Alice index, then Bob index.
    """
    out, off = [], 0
    for n in admissible_sectors(alice, bob, n_total):
        da, db = alice.dim(n), bob.dim(n_total - n)
        out.append((n, off, da, db))
        off += da * db
    return out, off


# =========================
# PURE STATES
# =========================

@dataclass(frozen=True, eq=False)
class BlockedPureState:
    n_total: int
    alice: SectorSpace
    bob: SectorSpace
    blocks: Mapping[int, np.ndarray]

    def __post_init__(self):
        if int(self.n_total) < 0:
            raise InvalidState(f"n_total must be >= 0, got {self.n_total}")
        object.__setattr__(self, "n_total", int(self.n_total))
        clean: Blocks = {}
        for n, b in dict(self.blocks).items():
            n = int(n)
            arr = np.array(b, dtype=complex)
            shape = (self.alice.dim(n), self.bob.dim(self.n_total - n))
            if shape[0] == 0 or shape[1] == 0 or n > self.n_total:
                if arr.size and np.any(arr != 0):
                    raise InvalidState(f"block {n} is not admissible for n_total={self.n_total}")
                continue
            if arr.shape != shape:
                raise InvalidState(f"block {n} has shape {arr.shape}, expected {shape}")
            arr.setflags(write=False)
            clean[n] = arr
        object.__setattr__(self, "blocks", dict(sorted(clean.items())))

    def block(self, n: int) -> np.ndarray:
        b = self.blocks.get(n)
        if b is None:
            return np.zeros((self.alice.dim(n), self.bob.dim(self.n_total - n)), dtype=complex)
        return b

    def weights(self) -> Dict[int, float]:
        return {n: float(np.vdot(b, b).real) for n, b in self.blocks.items()}

    def norm(self) -> float:
        return float(np.sqrt(sum(self.weights().values())))

    @property
    def is_normalized(self) -> bool:
        return abs(sum(self.weights().values()) - 1.0) <= tol("normalization")

    def require_normalized(self) -> "BlockedPureState":
        if not self.is_normalized:
            raise InvalidState(f"state norm^2 = {self.norm() ** 2!r}, expected 1")
        return self

    def same_spaces(self, other: "BlockedPureState") -> bool:
        return self.alice == other.alice and self.bob == other.bob

    def allclose(self, other: "BlockedPureState", atol: float = 1e-12) -> bool:
        if not self.same_spaces(other) or self.n_total != other.n_total:
            return False
        return bool(np.allclose(to_vector(self), to_vector(other), atol=atol, rtol=0.0))


def normalize(state: BlockedPureState) -> BlockedPureState:
    nrm = state.norm()
    if nrm < tol("zero_norm"):
        raise ZeroState(f"state norm {nrm!r} is below {tol('zero_norm')}")
    return BlockedPureState(state.n_total, state.alice, state.bob,
                            {n: b / nrm for n, b in state.blocks.items()})


def to_vector(state: BlockedPureState) -> np.ndarray:
    layout, total = sector_layout(state.alice, state.bob, state.n_total)
    vec = np.zeros(total, dtype=complex)
    for n, off, da, db in layout:
        if n in state.blocks:
            vec[off:off + da * db] = state.blocks[n].reshape(-1)
    return vec


def from_vector(vec: np.ndarray, alice: SectorSpace, bob: SectorSpace, n_total: int) -> BlockedPureState:
    layout, total = sector_layout(alice, bob, n_total)
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    if vec.size != total:
        raise InvalidState(f"vector length {vec.size} does not match sector dim {total}")
    blocks = {}
    for n, off, da, db in layout:
        b = vec[off:off + da * db].reshape(da, db)
        if np.any(b != 0):
            blocks[n] = b
    return BlockedPureState(n_total, alice, bob, blocks)


def to_full_matrix(state: BlockedPureState) -> np.ndarray:
    """Amplitudes embedded in the full (unrestricted) Alice x Bob product space."""
    out = np.zeros((state.alice.total_dim, state.bob.total_dim), dtype=complex)
    for n, b in state.blocks.items():
        r0 = state.alice.offset(n)
        c0 = state.bob.offset(state.n_total - n)
        out[r0:r0 + b.shape[0], c0:c0 + b.shape[1]] = b
    return out


def full_space_index(alice: SectorSpace, bob: SectorSpace, n_total: int) -> np.ndarray:
    """Flat full-space positions (row-major Alice x Bob) of the sector basis vectors."""
    layout, total = sector_layout(alice, bob, n_total)
    idx = np.empty(total, dtype=int)
    for n, off, da, db in layout:
        rows = alice.offset(n) + np.arange(da)
        cols = bob.offset(n_total - n) + np.arange(db)
        idx[off:off + da * db] = (rows[:, None] * bob.total_dim + cols[None, :]).reshape(-1)
    return idx


def inner(a: BlockedPureState, b: BlockedPureState) -> complex:
    if not a.same_spaces(b):
        raise InvalidState("states live on different sector spaces")
    if a.n_total != b.n_total:
        return 0j
    return complex(sum(np.vdot(a.blocks[n], b.blocks[n]) for n in a.blocks if n in b.blocks))


def fidelity(a: BlockedPureState, b: BlockedPureState) -> float:
    num = abs(inner(a, b)) ** 2
    den = (a.norm() ** 2) * (b.norm() ** 2)
    return float(num / den) if den > 0 else 0.0


def apply_local(state: BlockedPureState,
                alice_ops: Optional[Mapping[int, np.ndarray]] = None,
                bob_ops: Optional[Mapping[int, np.ndarray]] = None) -> BlockedPureState:
    """Sector-wise A (x) B; a missing sector operator acts as identity."""
    alice_ops = alice_ops or {}
    bob_ops = bob_ops or {}
    out = {}
    for n, b in state.blocks.items():
        m = state.n_total - n
        x = b
        if n in alice_ops:
            x = np.asarray(alice_ops[n]) @ x
        if m in bob_ops:
            x = x @ np.asarray(bob_ops[m]).T
        out[n] = x
    return BlockedPureState(state.n_total, state.alice, state.bob, out)


def swap_parties(state: BlockedPureState) -> BlockedPureState:
    blocks = {state.n_total - n: b.T for n, b in state.blocks.items()}
    return BlockedPureState(state.n_total, state.bob, state.alice, blocks)


# ==== tensor product (konvolusi sektor) ====

def _product_embedding(alice1: SectorSpace, bob1: SectorSpace, n1_total: int,
                       alice2: SectorSpace, bob2: SectorSpace, n2_total: int):
    alice_p, bob_p = product_space(alice1, alice2), product_space(bob1, bob2)
    n_total = n1_total + n2_total
    layout_p, total_p = sector_layout(alice_p, bob_p, n_total)
    offsets_p = {n: (off, da, db) for n, off, da, db in layout_p}
    layout1, total1 = sector_layout(alice1, bob1, n1_total)
    layout2, total2 = sector_layout(alice2, bob2, n2_total)
    index = np.empty(total1 * total2, dtype=int)
    for x, off1, da1, db1 in layout1:
        for y, off2, da2, db2 in layout2:
            offp, _, dbp = offsets_p[x + y]
            arow = _pair_offset(alice1, alice2, x, y)
            bcol = _pair_offset(bob1, bob2, n1_total - x, n2_total - y)
            i, k, j, l = np.meshgrid(np.arange(da1), np.arange(db1), np.arange(da2), np.arange(db2),
                                     indexing="ij")
            src1 = off1 + i * db1 + k
            src2 = off2 + j * db2 + l
            dst = offp + (arow + i * da2 + j) * dbp + (bcol + k * db2 + l)
            index[(src1 * total2 + src2).reshape(-1)] = dst.reshape(-1)
    return alice_p, bob_p, n_total, index, total_p


def tensor_product(a: BlockedPureState, b: BlockedPureState) -> BlockedPureState:
    alice_p, bob_p, n_total, index, total_p = _product_embedding(
        a.alice, a.bob, a.n_total, b.alice, b.bob, b.n_total)
    vec = np.zeros(total_p, dtype=complex)
    vec[index] = np.kron(to_vector(a), to_vector(b))
    return from_vector(vec, alice_p, bob_p, n_total)


# =========================
# RANDOM INSTANCES
# =========================

def _ginibre(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_state(alice: SectorSpace, bob: SectorSpace, n_total: int, seed=None) -> BlockedPureState:
    sectors = admissible_sectors(alice, bob, n_total)
    if not sectors:
        raise EmptySector(f"no admissible block for n_total={n_total}")
    rng = np.random.default_rng(seed)
    blocks = {n: _ginibre(rng, (alice.dim(n), bob.dim(n_total - n))) for n in sectors}
    return normalize(BlockedPureState(n_total, alice, bob, blocks))


def random_spaces(rng: np.random.Generator, max_dim: int) -> Tuple[SectorSpace, SectorSpace, int]:
    """Random (alice, bob, n_total) whose global sector has dimension in [2, max_dim]."""
    for _ in range(200):
        alice = SectorSpace(tuple(rng.integers(1, 4, size=rng.integers(2, 4))))
        bob = SectorSpace(tuple(rng.integers(1, 4, size=rng.integers(2, 4))))
        n_total = int(rng.integers(0, alice.n_max + bob.n_max + 1))
        _, dim = sector_layout(alice, bob, n_total)
        if 2 <= dim <= max_dim:
            return alice, bob, n_total
    return SectorSpace((1, 1)), SectorSpace((1, 1)), 1


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(_ginibre(rng, (d, d)))
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph[None, :]


def random_sector_unitary(space: SectorSpace, seed=None) -> Dict[int, np.ndarray]:
    rng = np.random.default_rng(seed)
    return {n: haar_unitary(space.dim(n), rng) for n in space.sectors()}


# =========================
# LOCAL POVM
# =========================

@dataclass(frozen=True, eq=False)
class LocalPOVM:
    """Sector-block-diagonal POVM; a sector missing from an element is a zero block."""
    space: SectorSpace
    elements: Tuple[Mapping[int, np.ndarray], ...]

    def __post_init__(self):
        elems = []
        for e in self.elements:
            clean = {}
            for n, m in dict(e).items():
                n = int(n)
                arr = np.array(m, dtype=complex)
                d = self.space.dim(n)
                if arr.shape != (d, d) or d == 0:
                    raise InvalidState(f"POVM block {n} has shape {arr.shape}, expected {(d, d)}")
                arr.setflags(write=False)
                clean[n] = arr
            elems.append(dict(sorted(clean.items())))
        if not elems:
            raise InvalidState("POVM needs at least one element")
        object.__setattr__(self, "elements", tuple(elems))

    def __len__(self) -> int:
        return len(self.elements)

    def completeness_residual(self) -> float:
        worst = 0.0
        for n in self.space.sectors():
            d = self.space.dim(n)
            acc = np.zeros((d, d), dtype=complex)
            for e in self.elements:
                if n in e:
                    acc += e[n].conj().T @ e[n]
            worst = max(worst, float(np.max(np.abs(acc - np.eye(d)))))
        return worst

    @property
    def is_complete(self) -> bool:
        return self.completeness_residual() <= tol("completeness")


def _inv_sqrt_psd(s: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(s)
    return (v * (1.0 / np.sqrt(w))[None, :]) @ v.conj().T


def random_povm(space: SectorSpace, k: int, seed=None) -> LocalPOVM:
    if k < 1:
        raise DomainError(f"POVM needs k >= 1 elements, got {k}")
    rng = np.random.default_rng(seed)
    elements: List[Dict[int, np.ndarray]] = [dict() for _ in range(k)]
    for n in space.sectors():
        d = space.dim(n)
        gs = [_ginibre(rng, (d, d)) for _ in range(k)]
        s = sum(g.conj().T @ g for g in gs)
        s_inv = _inv_sqrt_psd(s)
        for e, g in zip(elements, gs):
            e[n] = g @ s_inv
    return LocalPOVM(space, tuple(elements))


def sector_projectors(space: SectorSpace) -> LocalPOVM:
    return LocalPOVM(space, tuple({n: np.eye(space.dim(n))} for n in space.sectors()))


def identity_povm(space: SectorSpace) -> LocalPOVM:
    return LocalPOVM(space, ({n: np.eye(space.dim(n)) for n in space.sectors()},))


# =========================
# DENSITY OPERATORS
# =========================

@dataclass(frozen=True, eq=False)
class BlockedDensity:
    """Density operator block-diagonal in the global particle number.

    `sectors[N] = (q_N, rho_N)` with rho_N of unit trace on the sector-N layout.
    """
    alice: SectorSpace
    bob: SectorSpace
    sectors: Mapping[int, Tuple[float, np.ndarray]]

    def __post_init__(self):
        clean = {}
        for n_total, (q, rho) in dict(self.sectors).items():
            n_total = int(n_total)
            q = float(q)
            if q < 0:
                raise InvalidState(f"sector {n_total} has negative weight {q}")
            if q == 0:
                continue
            _, dim = sector_layout(self.alice, self.bob, n_total)
            arr = np.array(rho, dtype=complex)
            if dim == 0 or arr.shape != (dim, dim):
                raise InvalidState(f"sector {n_total} matrix has shape {arr.shape}, expected {(dim, dim)}")
            arr.setflags(write=False)
            clean[n_total] = (q, arr)
        if not clean:
            raise InvalidState("density has no populated sector")
        object.__setattr__(self, "sectors", dict(sorted(clean.items())))
        self.validate()

    def validate(self) -> None:
        total = sum(q for q, _ in self.sectors.values())
        if abs(total - 1.0) > tol("normalization"):
            raise InvalidState(f"sector weights sum to {total!r}")
        for n_total, (_, rho) in self.sectors.items():
            if np.linalg.norm(rho - rho.conj().T) >= tol("hermitian"):
                raise InvalidState(f"sector {n_total} matrix is not Hermitian")
            if abs(np.trace(rho).real - 1.0) > tol("normalization"):
                raise InvalidState(f"sector {n_total} matrix trace is {np.trace(rho).real!r}")
            if np.linalg.eigvalsh(rho).min() < -tol("psd"):
                raise InvalidState(f"sector {n_total} matrix is not PSD")

    @staticmethod
    def from_pure(state: BlockedPureState) -> "BlockedDensity":
        v = to_vector(normalize(state))
        return BlockedDensity(state.alice, state.bob, {state.n_total: (1.0, np.outer(v, v.conj()))})

    @staticmethod
    def mixture(components: Iterable[Tuple[float, BlockedPureState]]) -> "BlockedDensity":
        acc: Dict[int, np.ndarray] = {}
        alice = bob = None
        for p, st in components:
            if alice is None:
                alice, bob = st.alice, st.bob
            elif st.alice != alice or st.bob != bob:
                raise InvalidState("mixture components live on different spaces")
            v = to_vector(st)
            acc[st.n_total] = acc.get(st.n_total, 0) + float(p) * np.outer(v, v.conj())
        if alice is None:
            raise InvalidState("empty mixture")
        return _density_from_unnormalized(alice, bob, acc)

    def weight(self, n_total: int) -> float:
        return self.sectors[n_total][0] if n_total in self.sectors else 0.0

    def to_full_density(self) -> np.ndarray:
        dim = self.alice.total_dim * self.bob.total_dim
        out = np.zeros((dim, dim), dtype=complex)
        for n_total, (q, rho) in self.sectors.items():
            idx = full_space_index(self.alice, self.bob, n_total)
            out[np.ix_(idx, idx)] += q * rho
        return out


def _density_from_unnormalized(alice: SectorSpace, bob: SectorSpace,
                               acc: Mapping[int, np.ndarray]) -> BlockedDensity:
    traces = {n: float(np.trace(m).real) for n, m in acc.items()}
    total = sum(traces.values())
    if total <= 0:
        raise ZeroState("density has zero trace")
    sectors = {}
    for n, m in acc.items():
        if traces[n] <= 0:
            continue
        rho = m / traces[n]
        sectors[n] = (traces[n] / total, (rho + rho.conj().T) / 2)
    return BlockedDensity(alice, bob, sectors)


def density_tensor_product(a: BlockedDensity, b: BlockedDensity) -> BlockedDensity:
    acc: Dict[int, np.ndarray] = {}
    alice_p = bob_p = None
    for n1, (q1, r1) in a.sectors.items():
        for n2, (q2, r2) in b.sectors.items():
            alice_p, bob_p, n_total, index, total_p = _product_embedding(
                a.alice, a.bob, n1, b.alice, b.bob, n2)
            m = acc.setdefault(n_total, np.zeros((total_p, total_p), dtype=complex))
            m[np.ix_(index, index)] += q1 * q2 * np.kron(r1, r2)
    return _density_from_unnormalized(alice_p, bob_p, acc)


def trace_distance(a: BlockedDensity, b: BlockedDensity) -> float:
    if a.alice != b.alice or a.bob != b.bob:
        raise InvalidState("densities live on different spaces")
    dist = 0.0
    for n_total in set(a.sectors) | set(b.sectors):
        _, dim = sector_layout(a.alice, a.bob, n_total)
        ma = a.sectors[n_total][0] * a.sectors[n_total][1] if n_total in a.sectors else np.zeros((dim, dim))
        mb = b.sectors[n_total][0] * b.sectors[n_total][1] if n_total in b.sectors else np.zeros((dim, dim))
        dist += float(np.abs(np.linalg.eigvalsh(ma - mb)).sum())
    return 0.5 * dist

