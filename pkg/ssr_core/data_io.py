# ssr_core/data_io.py
from __future__ import annotations
import hashlib, json, os, tempfile
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np

from .errors import ChecksumMismatch, InvalidState
from .fock import BlockedDensity, BlockedPureState, LocalPOVM, SectorSpace

SCHEMA = 1

# ==== Konfigurasi lokasi penyimpanan ====
# Bisa diganti lewat env SSR_DATA_DIR (mis. untuk fixture hasil generate ulang)
DATA_DIR = Path(os.environ.get("SSR_DATA_DIR", Path(__file__).resolve().parents[1] / "data"))
FIXTURES_DIR = DATA_DIR / "fixtures"
CHECKSUMS = "checksums.json"

FIXTURES = {
    "biased_pair":   "biased_pair.json",    # sqrt(1/6)|01> + sqrt(5/6)|10>
    "phi_plus":      "phi_plus.json",
    "phi_minus":     "phi_minus.json",
    "mixed_rho":     "mixed_rho.json",      # E_F = V_F = 1/2
    "singlet_const": "singlet_const.json",  # |01,10> + |10,01>
    "product_01":    "product_01.json",
}

Document = Union[BlockedPureState, BlockedDensity, LocalPOVM]


# ==== complex <-> [re, im] ====
def _enc_matrix(m: np.ndarray) -> List[List[List[float]]]:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _dec_matrix(raw: Any) -> np.ndarray:
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise InvalidState("matrix entries must be [re, im] pairs")
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise InvalidState(f"matrix must be rows of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _whole(raw: Any) -> int:
    v = int(raw)
    if isinstance(raw, bool) or v != raw:
        raise ValueError(f"expected a whole number, got {raw!r}")
    return v


def _dims(raw: Any, key: str) -> SectorSpace:
    if not isinstance(raw, list):
        raise InvalidState(f"'{key}' must be a list of integers")
    return SectorSpace(tuple(raw))


# ==== state ====
def state_to_dict(state: BlockedPureState) -> Dict[str, Any]:
    return {
        "schema": SCHEMA,
        "n_total": state.n_total,
        "alice_dims": list(state.alice.dims),
        "bob_dims": list(state.bob.dims),
        "blocks": [{"n_alice": n, "amplitudes": _enc_matrix(b)} for n, b in state.blocks.items()],
    }


def state_from_dict(doc: Dict[str, Any]) -> BlockedPureState:
    try:
        alice = _dims(doc["alice_dims"], "alice_dims")
        bob = _dims(doc["bob_dims"], "bob_dims")
        blocks = {_whole(b["n_alice"]): _dec_matrix(b["amplitudes"]) for b in doc["blocks"]}
        return BlockedPureState(_whole(doc["n_total"]), alice, bob, blocks)
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidState(f"malformed state document: {e}")


# ==== density ====
def density_to_dict(rho: BlockedDensity) -> Dict[str, Any]:
    return {
        "schema": SCHEMA,
        "alice_dims": list(rho.alice.dims),
        "bob_dims": list(rho.bob.dims),
        "sectors": [{"n_total": n, "weight": q, "matrix": _enc_matrix(m)} for n, (q, m) in rho.sectors.items()],
    }


def density_from_dict(doc: Dict[str, Any]) -> BlockedDensity:
    try:
        alice = _dims(doc["alice_dims"], "alice_dims")
        bob = _dims(doc["bob_dims"], "bob_dims")
        sectors = {_whole(s["n_total"]): (float(s["weight"]), _dec_matrix(s["matrix"])) for s in doc["sectors"]}
        return BlockedDensity(alice, bob, sectors)
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidState(f"malformed density document: {e}")


# ==== POVM ====
def povm_to_dict(povm: LocalPOVM) -> Dict[str, Any]:
    return {
        "schema": SCHEMA,
        "dims": list(povm.space.dims),
        "elements": [{"sectors": [{"n": n, "matrix": _enc_matrix(m)} for n, m in e.items()]}
                     for e in povm.elements],
    }


def povm_from_dict(doc: Dict[str, Any]) -> LocalPOVM:
    try:
        space = _dims(doc["dims"], "dims")
        elements = tuple({_whole(s["n"]): _dec_matrix(s["matrix"]) for s in e["sectors"]} for e in doc["elements"])
        return LocalPOVM(space, elements)
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidState(f"malformed POVM document: {e}")


# ==== weighted state lists (targets, ensembles) ====
def weighted_states_to_dict(items: List[Tuple[float, BlockedPureState]], key: str) -> Dict[str, Any]:
    return {"schema": SCHEMA, key: [{"prob": float(p), "state": state_to_dict(s)} for p, s in items]}


def weighted_states_from_dict(doc: Dict[str, Any], key: str) -> List[Tuple[float, BlockedPureState]]:
    if "blocks" in doc:
        return [(1.0, state_from_dict(doc))]
    try:
        return [(float(it["prob"]), state_from_dict(it["state"])) for it in doc[key]]
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidState(f"malformed '{key}' document: {e}")


# ==== generic ====
def to_dict(obj: Document) -> Dict[str, Any]:
    if isinstance(obj, BlockedPureState):
        return state_to_dict(obj)
    if isinstance(obj, BlockedDensity):
        return density_to_dict(obj)
    if isinstance(obj, LocalPOVM):
        return povm_to_dict(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def from_dict(doc: Dict[str, Any]) -> Document:
    if not isinstance(doc, dict):
        raise InvalidState("document must be a JSON object")
    if "blocks" in doc:
        return state_from_dict(doc)
    if "elements" in doc:
        return povm_from_dict(doc)
    if "sectors" in doc:
        return density_from_dict(doc)
    raise InvalidState("unknown document kind (expected blocks, sectors or elements)")


def dumps(obj_or_doc: Union[Document, Dict[str, Any]]) -> str:
    doc = obj_or_doc if isinstance(obj_or_doc, dict) else to_dict(obj_or_doc)
    return json.dumps(doc, ensure_ascii=False, indent=2)


def loads(text: str) -> Document:
    try:
        return from_dict(json.loads(text))
    except json.JSONDecodeError as e:
        raise InvalidState(f"invalid JSON: {e}")


def read_json(path: Union[str, Path]) -> Dict[str, Any]:
    p = Path(path)
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InvalidState(f"file not found: {p}")
    except json.JSONDecodeError as e:
        raise InvalidState(f"invalid JSON in {p}: {e}")


def read_document(path: Union[str, Path]) -> Document:
    return from_dict(read_json(path))


def read_state(path: Union[str, Path]) -> BlockedPureState:
    obj = read_document(path)
    if not isinstance(obj, BlockedPureState):
        raise InvalidState(f"{path} is not a pure state document")
    return obj


def read_density(path: Union[str, Path]) -> BlockedDensity:
    doc = read_json(path)
    if "blocks" in doc:
        return BlockedDensity.from_pure(state_from_dict(doc))
    return density_from_dict(doc)


def read_povm(path: Union[str, Path]) -> LocalPOVM:
    obj = read_document(path)
    if not isinstance(obj, LocalPOVM):
        raise InvalidState(f"{path} is not a POVM document")
    return obj


# ==== Helper aman untuk tulis file (atomic write) ====
def write_text_atomic(text: str, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_fd, tmp_path = tempfile.mkstemp(prefix=path.name + ".", dir=str(path.parent))
    try:
        with os.fdopen(tmp_fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp_path, path)
    finally:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
    return path


def write_document(obj_or_doc: Union[Document, Dict[str, Any]], path: Union[str, Path]) -> Path:
    return write_text_atomic(dumps(obj_or_doc) + "\n", path)


# ==== fixtures + checksum ====
def sha256_file(path: Union[str, Path]) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def fixture_path(name: str, fixtures_dir: Union[str, Path, None] = None) -> Path:
    base = Path(fixtures_dir) if fixtures_dir else FIXTURES_DIR
    return base / FIXTURES.get(name, name if name.endswith(".json") else f"{name}.json")


def load_checksums(fixtures_dir: Union[str, Path, None] = None) -> Dict[str, str]:
    base = Path(fixtures_dir) if fixtures_dir else FIXTURES_DIR
    p = base / CHECKSUMS
    if not p.exists():
        return {}
    return json.loads(p.read_text(encoding="utf-8"))


def write_checksums(fixtures_dir: Union[str, Path, None] = None) -> Dict[str, str]:
    base = Path(fixtures_dir) if fixtures_dir else FIXTURES_DIR
    sums = {fname: sha256_file(base / fname) for fname in sorted(FIXTURES.values()) if (base / fname).exists()}
    write_text_atomic(json.dumps(sums, indent=2) + "\n", base / CHECKSUMS)
    return sums


def load_fixture(name: str, fixtures_dir: Union[str, Path, None] = None) -> Document:
    return read_document(fixture_path(name, fixtures_dir))


def verify_fixture(name: str, fixtures_dir: Union[str, Path, None] = None) -> Document:
    """Checksum check plus serializer round trip; returns the loaded object."""
    path = fixture_path(name, fixtures_dir)
    sums = load_checksums(fixtures_dir)
    expected = sums.get(path.name)
    if expected is None:
        raise ChecksumMismatch(f"no checksum recorded for {path.name}")
    got = sha256_file(path)
    if got != expected:
        raise ChecksumMismatch(f"{path.name}: sha256 {got} != recorded {expected}")
    obj = read_document(path)
    again = loads(dumps(obj))
    if dumps(again) != dumps(obj):
        raise ChecksumMismatch(f"{path.name} does not round-trip through the serializer")
    return obj


# ==== input lain ====
def resolve_input(path: Union[str, Path]) -> Path:
    """Path as given, else relative to DATA_DIR, else a fixture name."""
    p = Path(path)
    if p.exists():
        return p
    for cand in (DATA_DIR / p, FIXTURES_DIR / p.name, fixture_path(str(path))):
        if cand.exists():
            return cand
    raise InvalidState(f"file not found: {path}")


def read_alpha(path: Union[str, Path]) -> np.ndarray:
    """Teleport input amplitudes: a list of reals or [re, im] pairs, or {"alpha": [...]}."""
    raw = read_json(path)
    if isinstance(raw, dict):
        raw = raw.get("alpha")
    if not isinstance(raw, list) or not raw:
        raise InvalidState(f"{path}: expected a nonempty list of amplitudes")
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise InvalidState(f"{path}: amplitudes must be numbers or [re, im] pairs")
    if arr.ndim == 1:
        return arr.astype(complex)
    if arr.ndim == 2 and arr.shape[1] == 2:
        return arr[:, 0] + 1j * arr[:, 1]
    raise InvalidState(f"{path}: amplitudes have shape {arr.shape}")
