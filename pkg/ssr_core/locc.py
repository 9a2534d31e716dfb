# ssr_core/locc.py
"""
Pure-state conversion under the particle-number superselection rule.

A source converts to a target ensemble iff every Alice sector keeps its
weight and the sector's Schmidt vector is majorized by the probability-mixed
target vectors. `build_protocol` makes this constructive for a single target.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .config_util import current, tol
from .errors import InvalidState, NotConvertible, TotalMismatch, ZeroProbability
from .fock import (BlockedPureState, LocalPOVM, SectorSpace, _ginibre, apply_local, fidelity,
                   haar_unitary, normalize, random_povm, random_spaces, random_state,
                   tensor_product, to_full_matrix)
from .parallel import parallel_map, spawn_seeds
from .schmidt import SchmidtBlocks, entropy_of_entanglement, schmidt_block_decompose, siv

logger = logging.getLogger(__name__)

Segments = List[Tuple[float, float]]


# =========================
# MAJORIZATION
# =========================

def _curve(segs: Iterable[Tuple[float, float]]):
    segs = sorted(((float(v), float(c)) for v, c in segs if v > 0 and c > 0), key=lambda s: -s[0])
    vals = np.array([v for v, _ in segs], dtype=float)
    cnts = np.array([c for _, c in segs], dtype=float)
    knots = np.concatenate([[0.0], np.cumsum(cnts)])
    sums = np.concatenate([[0.0], np.cumsum(vals * cnts)])
    return vals, knots, sums


def _partial_sums(curve, ks: np.ndarray) -> np.ndarray:
    """Sum of the k largest entries, linear between integer knots."""
    vals, knots, sums = curve
    if vals.size == 0:
        return np.zeros_like(ks)
    j = np.clip(np.searchsorted(knots, ks, side="right") - 1, 0, vals.size - 1)
    width = knots[j + 1] - knots[j]
    return sums[j] + np.minimum(np.maximum(ks - knots[j], 0.0), width) * vals[j]


def majorization_slack(x: Iterable[Tuple[float, float]], y: Iterable[Tuple[float, float]]) -> Tuple[float, float]:
    """(min_k [Y(k) - X(k)], total(y) - total(x)) for piecewise-uniform vectors."""
    cx, cy = _curve(x), _curve(y)
    ks = np.union1d(cx[1], cy[1])
    gap = _partial_sums(cy, ks) - _partial_sums(cx, ks)
    return float(gap.min()), float(cy[2][-1] - cx[2][-1])


def _vector_segments(v) -> Segments:
    return [(float(x), 1.0) for x in np.asarray(v, dtype=float).reshape(-1)]


def majorizes(x, y) -> bool:
    """True iff x is majorized by y (x is flatter)."""
    slack, total_gap = majorization_slack(_vector_segments(x), _vector_segments(y))
    if abs(total_gap) > tol("total_mismatch"):
        raise TotalMismatch(f"totals differ by {total_gap!r}")
    return slack >= -tol("majorization")


def _mix_segments(parts: Sequence[Tuple[float, Segments]]) -> Segments:
    """Elementwise sum of p * (sorted vector), each given as piecewise-uniform segments."""
    curves = [(p, _curve(s)) for p, s in parts if p > 0]
    curves = [(p, c) for p, c in curves if c[0].size]
    if not curves:
        return []
    knots = np.unique(np.concatenate([c[1] for _, c in curves]))
    out: Segments = []
    for a, b in zip(knots[:-1], knots[1:]):
        mid = 0.5 * (a + b)
        v = 0.0
        for p, (vals, ks, _) in curves:
            if mid < ks[-1]:
                v += p * vals[np.searchsorted(ks, mid, side="right") - 1]
        if v > 0:
            out.append((v, float(b - a)))
    return out


# =========================
# CONVERTIBILITY
# =========================

@dataclass(frozen=True)
class ConversionTarget:
    prob: float
    blocks: SchmidtBlocks

    @staticmethod
    def of_state(prob: float, state: BlockedPureState) -> "ConversionTarget":
        return ConversionTarget(float(prob), schmidt_block_decompose(state))


def _as_blocks(x: Union[SchmidtBlocks, BlockedPureState]) -> SchmidtBlocks:
    return schmidt_block_decompose(x) if isinstance(x, BlockedPureState) else x


def _as_targets(targets) -> List[ConversionTarget]:
    out = []
    for t in targets:
        if isinstance(t, ConversionTarget):
            out.append(t)
        else:
            p, s = t
            out.append(ConversionTarget(float(p), _as_blocks(s)))
    total = sum(t.prob for t in out)
    if not out or abs(total - 1.0) > tol("normalization"):
        raise InvalidState(f"target probabilities sum to {total!r}")
    return out


def sector_slack(source, targets) -> pd.DataFrame:
    """Per Alice sector: weights, weight gap and minimum partial-sum slack."""
    src = _as_blocks(source)
    tgts = _as_targets(targets)
    sectors = sorted(set(src.entries).union(*(t.blocks.entries for t in tgts)))
    rows = []
    for n in sectors:
        x = src.segments(n)
        y = _mix_segments([(t.prob, t.blocks.segments(n)) for t in tgts])
        slack, gap = majorization_slack(x, y)
        sw = sum(v * c for v, c in x)
        tw = sum(v * c for v, c in y)
        ok = abs(sw - tw) <= tol("total_mismatch") and slack >= -tol("majorization")
        rows.append({"n": n, "source_weight": sw, "target_weight": tw, "weight_gap": gap,
                     "min_slack": slack, "majorized": bool(ok)})
    return pd.DataFrame(rows, columns=["n", "source_weight", "target_weight", "weight_gap",
                                       "min_slack", "majorized"])


def ssr_convertible(source, targets) -> bool:
    return bool(sector_slack(source, targets)["majorized"].all())


# =========================
# PROTOCOL CONSTRUCTION
# =========================

class OutcomeAction(NamedTuple):
    target: int
    bob: Dict[int, np.ndarray]  # Bob sector -> unitary; missing means identity


@dataclass(frozen=True, eq=False)
class ConversionProtocol:
    povm: LocalPOVM
    outcome_map: Tuple[OutcomeAction, ...]
    probs: Tuple[float, ...]

    def __len__(self) -> int:
        return len(self.outcome_map)


def _t_transform_mixture(x: np.ndarray, y: np.ndarray) -> List[Tuple[float, np.ndarray]]:
    """Permutations P_j and weights t_j with x ~= sum_j t_j y[P_j] (x majorized by y, both sorted)."""
    r = x.size
    eps = 1e-15 * max(1.0, float(y.sum()))
    cur = y.astype(float).copy()
    mix: Dict[Tuple[int, ...], float] = {tuple(range(r)): 1.0}
    for _ in range(2 * r):
        diff = cur - x
        above = np.nonzero(diff > eps)[0]
        if above.size == 0:
            break
        j = int(above[-1])
        below = np.nonzero(diff[j + 1:] < -eps)[0]
        if below.size == 0:
            break
        k = j + 1 + int(below[0])
        delta = min(cur[j] - x[j], x[k] - cur[k])
        spread = cur[j] - cur[k]
        if spread <= eps:
            break
        t = 1.0 - delta / spread
        q = np.arange(r)
        q[j], q[k] = k, j
        nxt: Dict[Tuple[int, ...], float] = {}
        for perm, w in mix.items():
            p = np.asarray(perm)
            nxt[perm] = nxt.get(perm, 0.0) + w * t
            key = tuple(p[q])
            nxt[key] = nxt.get(key, 0.0) + w * (1.0 - t)
        mix = {k2: w for k2, w in nxt.items() if w > 1e-15}
        cur[j] -= delta
        cur[k] += delta
    total = sum(mix.values())
    return [(w / total, np.asarray(p)) for p, w in mix.items()]


def _sector_pieces(src: np.ndarray, tgt: np.ndarray) -> List[Tuple[float, np.ndarray, np.ndarray]]:
    """[(t_j, Alice Kraus op, Bob unitary)] converting one sector block into another."""
    da, db = src.shape
    r = min(da, db)
    u, s, vh = np.linalg.svd(src)
    u2, s2, vh2 = np.linalg.svd(tgt)
    x = s ** 2 / max((s ** 2).sum(), 1e-300)
    y = s2 ** 2 / max((s2 ** 2).sum(), 1e-300)
    pieces = _t_transform_mixture(x, y)
    # normalise against the reconstructed vector so completeness is exact
    xhat = np.zeros(r)
    for t, perm in pieces:
        xhat += t * y[perm]
    out = []
    for t, perm in pieces:
        d = np.full(da, np.sqrt(t))
        live = xhat > 0
        d[:r][live] = np.sqrt(t * y[perm][live] / xhat[live])
        kraus = (u * d[None, :]) @ u.conj().T
        pa = np.concatenate([perm, np.arange(r, da)])
        pb = np.concatenate([perm, np.arange(r, db)])
        w_alice = u2[:, pa] @ u.conj().T
        v_bob = vh2.T[:, pb] @ vh.conj()
        out.append((t, w_alice @ kraus, v_bob))
    return out


def build_protocol(source: BlockedPureState, target: BlockedPureState) -> ConversionProtocol:
    if not source.same_spaces(target) or source.n_total != target.n_total:
        raise NotConvertible("source and target live on different spaces or global sectors")
    source.require_normalized()
    target.require_normalized()
    if not ssr_convertible(source, [(1.0, target)]):
        raise NotConvertible("sector weights or per-sector majorization fail")

    alice = source.alice
    n_total = source.n_total
    per_sector: Dict[int, List[Tuple[float, np.ndarray, Optional[np.ndarray]]]] = {}
    for n in alice.sectors():
        if n in source.blocks and n in target.blocks:
            per_sector[n] = _sector_pieces(source.blocks[n], target.blocks[n])
        else:
            per_sector[n] = [(1.0, np.eye(alice.dim(n), dtype=complex), None)]

    # common refinement of the cumulative piece probabilities
    cuts = {0.0, 1.0}
    for pieces in per_sector.values():
        cuts.update(np.cumsum([t for t, _, _ in pieces])[:-1].tolist())
    cuts = np.array(sorted(cuts))
    elements, actions, probs = [], [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        w = float(b - a)
        if w < 1e-15:
            continue
        mid = 0.5 * (a + b)
        elem: Dict[int, np.ndarray] = {}
        bob_ops: Dict[int, np.ndarray] = {}
        for n, pieces in per_sector.items():
            edges = np.cumsum([t for t, _, _ in pieces])
            j = min(int(np.searchsorted(edges, mid, side="right")), len(pieces) - 1)
            t, op, vb = pieces[j]
            elem[n] = np.sqrt(w / t) * op
            if vb is not None:
                bob_ops[n_total - n] = vb
        elements.append(elem)
        actions.append(OutcomeAction(0, bob_ops))
        probs.append(w)
    logger.debug("protocol: %d elements over %d sectors", len(elements), len(per_sector))
    return ConversionProtocol(LocalPOVM(alice, tuple(elements)), tuple(actions), tuple(probs))


def apply_povm_outcome(state: BlockedPureState, element: Mapping[int, np.ndarray]) -> Tuple[float, BlockedPureState]:
    blocks = {}
    for n, b in state.blocks.items():
        if n not in element:
            continue
        m = np.asarray(element[n], dtype=complex)
        if m.shape != (state.alice.dim(n), state.alice.dim(n)):
            raise InvalidState(f"element block {n} has shape {m.shape}")
        blocks[n] = m @ b
    post = BlockedPureState(state.n_total, state.alice, state.bob, blocks)
    prob = post.norm() ** 2
    if prob < tol("zero_norm"):
        raise ZeroProbability(f"outcome probability {prob!r}")
    return float(prob), normalize(post)


def verify_protocol(source: BlockedPureState, protocol: ConversionProtocol,
                    targets: Sequence[BlockedPureState]) -> pd.DataFrame:
    rows = []
    for i, (elem, act) in enumerate(zip(protocol.povm.elements, protocol.outcome_map)):
        try:
            prob, post = apply_povm_outcome(source, elem)
            fid = fidelity(apply_local(post, bob_ops=act.bob), targets[act.target])
        except ZeroProbability:
            prob, fid = 0.0, float("nan")
        rows.append({"outcome": i, "target": act.target, "prob": prob, "fidelity": fid})
    return pd.DataFrame(rows, columns=["outcome", "target", "prob", "fidelity"])


# =========================
# SiV MONOTONICITY
# =========================

class MonotoneCheck(NamedTuple):
    lhs: float
    rhs: float
    ok: bool


def siv_monotone_check(state: BlockedPureState, povm: LocalPOVM) -> MonotoneCheck:
    lhs = 0.0
    for elem in povm.elements:
        w = {n: float(np.linalg.norm(elem[n] @ b) ** 2) for n, b in state.blocks.items() if n in elem}
        mass = sum(w.values())
        lhs += sum(n * n * x for n, x in w.items())
        if mass > tol("zero_norm"):
            lhs -= sum(n * x for n, x in w.items()) ** 2 / mass
    rhs = siv(state) / 4.0
    return MonotoneCheck(float(lhs), float(rhs), bool(lhs <= rhs + 1e-9))


# =========================
# DATA HIDING
# =========================

def _unit_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    g = _ginibre(rng, (d, d))
    h = (g + g.conj().T) / 2
    return h / np.max(np.abs(np.linalg.eigvalsh(h)))


def _sector_hermitian(rng: np.random.Generator, space: SectorSpace) -> np.ndarray:
    out = np.zeros((space.total_dim, space.total_dim), dtype=complex)
    for n in space.sectors():
        o, d = space.offset(n), space.dim(n)
        g = _ginibre(rng, (d, d))
        out[o:o + d, o:o + d] = (g + g.conj().T) / 2
    return out / np.max(np.abs(np.linalg.eigvalsh(out)))


def _fixed_observables(space: SectorSpace, ssr: bool) -> List[np.ndarray]:
    """Identity, centred number observable, and a coherence flip when one exists."""
    d = space.total_dim
    obs = [np.eye(d, dtype=complex)]
    if space.n_max > 0:
        obs.append(np.diag(2.0 * space.number_diagonal() / space.n_max - 1.0).astype(complex))
    flip = np.zeros((d, d), dtype=complex)
    if ssr:
        for n in space.sectors():
            if space.dim(n) >= 2:
                o = space.offset(n)
                flip[o, o + 1] = flip[o + 1, o] = 1.0
    elif d >= 2:
        flip[0, 1] = flip[1, 0] = 1.0
    if np.any(flip):
        obs.append(flip)
    return obs


def _expectation(psi: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sum(psi.conj() * (a @ psi @ b.T)).real)


def data_hiding_distance(s1: BlockedPureState, s2: BlockedPureState, trials: Optional[int] = None,
                         seed=None, ssr: bool = True,
                         reference: Optional[BlockedPureState] = None) -> float:
    """Largest |<A(x)B>_1 - <A(x)B>_2| over sampled unit-norm local observables.

    With `ssr` the observables are sector-block-diagonal. A shared `reference`
    state is appended to both inputs before sampling.
    """
    if not s1.same_spaces(s2):
        raise InvalidState("states live on different spaces")
    if reference is not None:
        s1, s2 = tensor_product(s1, reference), tensor_product(s2, reference)
    trials = current()["hiding"]["trials"] if trials is None else int(trials)
    psi1, psi2 = to_full_matrix(s1), to_full_matrix(s2)
    alice, bob = s1.alice, s1.bob

    best = 0.0
    for a in _fixed_observables(alice, ssr):
        for b in _fixed_observables(bob, ssr):
            best = max(best, abs(_expectation(psi1, a, b) - _expectation(psi2, a, b)))
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        if ssr:
            a, b = _sector_hermitian(rng, alice), _sector_hermitian(rng, bob)
        else:
            a, b = _unit_hermitian(rng, alice.total_dim), _unit_hermitian(rng, bob.total_dim)
        best = max(best, abs(_expectation(psi1, a, b) - _expectation(psi2, a, b)))
    return float(best)


# =========================
# RANDOM HARNESSES
# =========================

def majorizing_target(state: BlockedPureState, seed=None, spread: float = 0.5) -> BlockedPureState:
    """A random target with the same sector weights whose Schmidt vectors majorize the source's."""
    rng = np.random.default_rng(seed)
    blocks = {}
    for n, b in state.blocks.items():
        da, db = b.shape
        lam = np.linalg.svd(b, compute_uv=False) ** 2
        y = lam.copy()
        if y.size > 1:
            delta = spread * rng.random() * y[-1]
            y[0] += delta
            y[-1] -= delta
        ua, vb = haar_unitary(da, rng), haar_unitary(db, rng)
        r = y.size
        blocks[n] = (ua[:, :r] * np.sqrt(y)[None, :]) @ vb[:r, :]
    return BlockedPureState(state.n_total, state.alice, state.bob, blocks)


def siv_monotone_harness(trials: int, seed=0, max_dim: int = 12) -> pd.DataFrame:
    def one(child: np.random.SeedSequence):
        rng = np.random.default_rng(child)
        alice, bob, n_total = random_spaces(rng, max_dim)
        state = random_state(alice, bob, n_total, seed=rng)
        povm = random_povm(alice, int(rng.integers(1, 5)), seed=rng)
        return siv_monotone_check(state, povm)

    checks = parallel_map(one, spawn_seeds(seed, trials))
    df = pd.DataFrame([c._asdict() for c in checks], columns=["lhs", "rhs", "ok"])
    df.insert(0, "trial", range(len(df)))
    df["slack"] = df["rhs"] - df["lhs"]
    return df


def conversion_oracle_harness(pairs: int, seed=0, max_dim: int = 8) -> pd.DataFrame:
    """Criterion verdict vs explicit protocol construction on random pairs."""
    def one(child: np.random.SeedSequence) -> dict:
        rng = np.random.default_rng(child)
        alice, bob, n_total = random_spaces(rng, max_dim)
        source = random_state(alice, bob, n_total, seed=rng)
        if rng.random() < 0.5:
            target = majorizing_target(source, seed=rng)
        else:
            target = random_state(alice, bob, n_total, seed=rng)
        verdict = ssr_convertible(source, [(1.0, target)])
        ws, wt = source.weights(), target.weights()
        weights_equal = all(abs(ws.get(n, 0.0) - wt.get(n, 0.0)) <= tol("total_mismatch")
                            for n in set(ws) | set(wt))
        row = {"convertible": verdict, "weights_equal": weights_equal, "n_elements": 0,
               "min_fidelity": float("nan"), "completeness": float("nan"), "ok": False}
        try:
            proto = build_protocol(source, target)
        except NotConvertible:
            row["ok"] = not verdict
            return row
        report = verify_protocol(source, proto, [target])
        live = report[report["prob"] > 0]
        row.update(n_elements=len(proto), min_fidelity=float(live["fidelity"].min()),
                   completeness=proto.povm.completeness_residual())
        row["ok"] = bool(verdict and row["min_fidelity"] >= 1 - 1e-9 and row["completeness"] <= 1e-9
                         and entropy_of_entanglement(source) >= entropy_of_entanglement(target) - 1e-9)
        return row

    rows = parallel_map(one, spawn_seeds(seed, pairs))
    df = pd.DataFrame(rows, columns=["convertible", "weights_equal", "n_elements",
                                     "min_fidelity", "completeness", "ok"])
    df.insert(0, "trial", range(len(df)))
    return df
