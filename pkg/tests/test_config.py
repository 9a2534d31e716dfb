import json
import logging
import os
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from ssr_core import config_util
from ssr_core.config_util import (current, default_config, load_config, resolve_config_path, save_config,
                                  thread_count, tol, use_config, validate_cfg)
from ssr_core.exports import frame_records, frame_to_csv, to_json_text
from ssr_core.parallel import parallel_map, spawn_seeds


class TestValidate:
    def test_defaults_fill_gaps(self):
        cfg = validate_cfg({"tolerance": {"psd": 1e-9}})
        assert cfg["tolerance"]["psd"] == 1e-9
        assert cfg["tolerance"]["majorization"] == 1e-8
        assert cfg["formation"]["restarts"] == 32

    def test_bad_values_fall_back(self):
        cfg = validate_cfg({
            "tolerance": {"psd": -1, "normalization": "abc", "majorization": 2.0},
            "formation": {"restarts": 0, "max_iters": "x", "k_rule": "bogus"},
            "hiding": {"trials": -5},
            "runtime": {"threads": -2},
        })
        assert cfg["tolerance"]["psd"] == 1e-10
        assert cfg["tolerance"]["normalization"] == 1e-12
        assert cfg["tolerance"]["majorization"] == 1e-8
        assert cfg["formation"]["restarts"] == 32
        assert cfg["formation"]["max_iters"] == 200
        assert cfg["formation"]["k_rule"] == "rank_squared"
        assert cfg["hiding"]["trials"] == 500
        assert cfg["runtime"]["threads"] == 0

    def test_unknown_keys_kept(self):
        cfg = validate_cfg({"notes": {"owner": "lab"}, "formation": {"k_rule": "rank", "extra": 1}})
        assert cfg["notes"] == {"owner": "lab"}
        assert cfg["formation"]["k_rule"] == "rank"
        assert cfg["formation"]["extra"] == 1

    def test_none(self):
        assert validate_cfg(None) == default_config()

    def test_shipped_file_is_default(self):
        shipped = json.loads((Path(__file__).resolve().parents[1] / "data" / "config.json").read_text(encoding="utf-8"))
        assert validate_cfg(shipped) == default_config()


class TestFiles:
    def test_save_load(self, tmp_path):
        p = tmp_path / "sub" / "config.json"
        cfg = default_config()
        cfg["formation"]["restarts"] = 7
        save_config(cfg, p)
        assert load_config(p)["formation"]["restarts"] == 7
        assert [f.name for f in p.parent.iterdir()] == ["config.json"]

    def test_unreadable_file(self, tmp_path, caplog):
        p = tmp_path / "config.json"
        p.write_text("{oops", encoding="utf-8")
        with caplog.at_level(logging.WARNING, logger="ssr_core.config_util"):
            assert load_config(p) == default_config()
        assert "unreadable" in caplog.text

    def test_missing_path(self):
        assert load_config(None) == default_config()

    def test_resolution_order(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        monkeypatch.delenv("SSR_CONFIG", raising=False)
        monkeypatch.setattr(config_util, "user_config_path", lambda: tmp_path / "user" / "config.json")
        assert resolve_config_path() is None

        (tmp_path / "data").mkdir()
        local = tmp_path / "data" / "config.json"
        local.write_text("{}", encoding="utf-8")
        assert resolve_config_path().resolve() == local.resolve()

        env = tmp_path / "env.json"
        env.write_text("{}", encoding="utf-8")
        monkeypatch.setenv("SSR_CONFIG", str(env))
        assert resolve_config_path() == env

        explicit = tmp_path / "explicit.json"
        explicit.write_text("{}", encoding="utf-8")
        assert resolve_config_path(str(explicit)) == explicit
        # an explicit file that does not exist is skipped
        assert resolve_config_path(str(tmp_path / "gone.json")) == env


class TestActive:
    def test_use_config(self):
        use_config({"tolerance": {"psd": 1e-6}})
        assert tol("psd") == 1e-6
        assert current()["tolerance"]["svd_cutoff"] == 1e-12

    def test_thread_count(self, monkeypatch):
        monkeypatch.setenv("SSR_TOOLKIT_THREADS", "3")
        assert thread_count() == 3
        monkeypatch.setenv("SSR_TOOLKIT_THREADS", "0")
        assert thread_count() == (os.cpu_count() or 1)
        monkeypatch.delenv("SSR_TOOLKIT_THREADS")
        use_config({"runtime": {"threads": 2}})
        assert thread_count() == 2


class TestExports:
    def test_csv_bools_and_floats(self):
        df = pd.DataFrame({"n": [1, 2], "ok": [True, False], "x": [1 / 3, 2.0]})
        assert frame_to_csv(df) == "n,ok,x\n1,true,0.333333333333\n2,false,2\n"

    def test_json_text(self):
        text = to_json_text({"b": float("nan"), "a": np.int64(3), "c": 1 + 2j, "d": np.array([True])})
        doc = json.loads(text)
        assert doc == {"schema": 1, "a": 3, "b": None, "c": [1.0, 2.0], "d": [True]}
        assert list(doc) == ["a", "b", "c", "d", "schema"]
        assert to_json_text({"x": 0.1}) == to_json_text({"x": 0.1})

    def test_frame_records(self):
        df = pd.DataFrame({"n": [0], "v": [np.inf]})
        assert frame_records(df) == [{"n": 0, "v": None}]


class TestParallel:
    def test_order_preserved(self, monkeypatch):
        monkeypatch.setenv("SSR_TOOLKIT_THREADS", "4")
        assert parallel_map(lambda x: x * x, range(20)) == [x * x for x in range(20)]

    def test_seeds_stable(self):
        a = [np.random.default_rng(s).random() for s in spawn_seeds(42, 5)]
        b = [np.random.default_rng(s).random() for s in spawn_seeds(42, 5)]
        assert a == b
        assert len(set(a)) == 5

    @pytest.mark.parametrize("threads", ["1", "4"])
    def test_results_do_not_depend_on_threads(self, monkeypatch, threads):
        monkeypatch.setenv("SSR_TOOLKIT_THREADS", threads)
        out = parallel_map(lambda s: np.random.default_rng(s).random(), spawn_seeds(7, 6))
        ref = [np.random.default_rng(s).random() for s in spawn_seeds(7, 6)]
        assert out == ref
