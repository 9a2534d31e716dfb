# ssr_core/exports.py
from __future__ import annotations
import json, math
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from .data_io import SCHEMA

FLOAT_FORMAT = "%.12g"


def _normalize_for_csv(df: pd.DataFrame) -> pd.DataFrame:
    if df is None:
        return pd.DataFrame()
    out = df.copy()
    # bool -> true/false supaya stabil lintas versi pandas
    for c in out.columns:
        if out[c].dtype == bool:
            out[c] = out[c].map({True: "true", False: "false"})
    return out


def frame_to_csv(df: pd.DataFrame) -> str:
    return _normalize_for_csv(df).to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


# ==== JSON ====
def _jsonable(v: Any) -> Any:
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        x = float(v)
        return None if math.isnan(x) or math.isinf(x) else x
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def to_json_text(payload: Dict[str, Any]) -> str:
    body = {"schema": SCHEMA}
    body.update(payload)
    return json.dumps(_jsonable(body), sort_keys=True, indent=2, ensure_ascii=False)


def frame_records(df: pd.DataFrame) -> List[Dict[str, Any]]:
    return [_jsonable(r) for r in df.to_dict(orient="records")]
