# ssr_core/config_util.py
from __future__ import annotations
import copy, json, logging, os, tempfile
from pathlib import Path
from typing import Optional

logger = logging.getLogger(__name__)

_DEFAULT_CONFIG = {
    "tolerance": {
        "normalization": 1e-12,
        "psd": 1e-10,
        "hermitian": 1e-12,
        "completeness": 1e-10,
        "majorization": 1e-8,
        "total_mismatch": 1e-8,
        "svd_cutoff": 1e-12,
        "zero_norm": 1e-14,
    },
    "formation": {
        "restarts": 32,
        "max_iters": 200,
        "tol": 1e-10,
        "k_rule": "rank_squared",
    },
    "hiding": {
        "trials": 500,
    },
    "runtime": {
        "threads": 0,
    },
}

_K_RULES = {"rank_squared", "rank"}


def _positive_float(v, fallback: float) -> float:
    try:
        x = float(v)
    except (TypeError, ValueError):
        return fallback
    return x if 0.0 < x < 1.0 else fallback


def _nonneg_int(v, fallback: int, minimum: int = 0) -> int:
    try:
        x = int(v)
    except (TypeError, ValueError):
        return fallback
    return x if x >= minimum else fallback


def validate_cfg(cfg: Optional[dict]) -> dict:
    out = copy.deepcopy(_DEFAULT_CONFIG)
    for key, section in (cfg or {}).items():
        if isinstance(section, dict) and isinstance(out.get(key), dict):
            out[key].update(section)
        else:
            out[key] = section
    # tolerance
    for name, default in _DEFAULT_CONFIG["tolerance"].items():
        out["tolerance"][name] = _positive_float(out["tolerance"].get(name), default)
    # formation
    f = out["formation"]
    f["restarts"] = _nonneg_int(f.get("restarts"), 32, minimum=1)
    f["max_iters"] = _nonneg_int(f.get("max_iters"), 200, minimum=1)
    f["tol"] = _positive_float(f.get("tol"), 1e-10)
    if f.get("k_rule") not in _K_RULES:
        f["k_rule"] = "rank_squared"
    # hiding
    out["hiding"]["trials"] = _nonneg_int(out["hiding"].get("trials"), 500, minimum=1)
    # runtime
    out["runtime"]["threads"] = _nonneg_int(out["runtime"].get("threads"), 0)
    return out


def default_config() -> dict:
    return copy.deepcopy(_DEFAULT_CONFIG)


def user_config_path() -> Path:
    try:
        from platformdirs import user_config_dir
        return Path(user_config_dir("ssr-toolkit", "ssr-toolkit")) / "config.json"
    except Exception:
        return Path.home() / ".ssr_toolkit" / "config.json"


def resolve_config_path(explicit: Optional[str] = None) -> Optional[Path]:
    """--config, lalu SSR_CONFIG, lalu data/config.json, lalu folder user."""
    candidates = []
    if explicit:
        candidates.append(Path(explicit))
    env = os.environ.get("SSR_CONFIG")
    if env:
        candidates.append(Path(env))
    candidates.append(Path("data") / "config.json")
    candidates.append(user_config_path())
    for p in candidates:
        if p.exists():
            return p
    return None


def load_config(path: Optional[Path]) -> dict:
    try:
        if path is not None and path.exists():
            raw = json.loads(path.read_text(encoding="utf-8"))
            return validate_cfg(raw)
    except Exception:
        logger.warning("config %s unreadable, using defaults", path)
    return default_config()


def save_config(cfg: dict, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_fd, tmp_path = tempfile.mkstemp(prefix="config.json.", dir=str(path.parent))
    try:
        with os.fdopen(tmp_fd, "w", encoding="utf-8") as f:
            json.dump(validate_cfg(cfg), f, ensure_ascii=False, indent=2)
        os.replace(tmp_path, path)
    finally:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)


# ==== Konfigurasi aktif (global proses) ====
_ACTIVE: dict = default_config()


def use_config(cfg: Optional[dict]) -> dict:
    global _ACTIVE
    _ACTIVE = validate_cfg(cfg)
    return _ACTIVE


def current() -> dict:
    return _ACTIVE


def tol(name: str) -> float:
    return float(_ACTIVE["tolerance"][name])


def thread_count() -> int:
    env = os.environ.get("SSR_TOOLKIT_THREADS")
    n = _nonneg_int(env, _ACTIVE["runtime"]["threads"]) if env not in (None, "") else _ACTIVE["runtime"]["threads"]
    return n if n > 0 else (os.cpu_count() or 1)
