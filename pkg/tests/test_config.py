import pytest

from lkb.config import auto_nlist, load_config
from lkb.errors import ConfigError


def test_defaults_load_without_sources():
    cfg = load_config(env={})
    assert cfg["splitter.chunk_size"] == 500
    assert cfg["splitter.overlap"] == 50
    assert cfg["embedder.dim"] == 64
    assert cfg["retrieval.k"] == 4
    assert cfg["retrieval.budget"] == 2048
    assert cfg["index.mode"] == "flat"
    assert cfg["llm.mock"] is True


def test_file_overrides_defaults(tmp_path):
    path = tmp_path / "lkb.conf"
    path.write_text("# comment\nindex.nlist=100\nretrieval.k=7\n\n", encoding="utf-8")
    cfg = load_config(path=str(path), env={})
    assert cfg["index.nlist"] == 100
    assert cfg["retrieval.k"] == 7


def test_env_overrides_file(tmp_path):
    path = tmp_path / "lkb.conf"
    path.write_text("retrieval.k=7\n", encoding="utf-8")
    cfg = load_config(path=str(path), env={"LKB_RETRIEVAL_K": "9"})
    assert cfg["retrieval.k"] == 9


def test_explicit_override_beats_env(tmp_path):
    cfg = load_config(env={"LKB_RETRIEVAL_K": "9"}, overrides={"retrieval.k": "11"})
    assert cfg["retrieval.k"] == 11


def test_unknown_keys_rejected(tmp_path):
    path = tmp_path / "lkb.conf"
    path.write_text("index.nprobes=3\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="nprobes"):
        load_config(path=str(path), env={})


def test_type_errors_reported():
    with pytest.raises(ConfigError, match="retrieval.k"):
        load_config(env={"LKB_RETRIEVAL_K": "many"})


def test_range_validation():
    with pytest.raises(ConfigError):
        load_config(env={"LKB_SPLITTER_OVERLAP": "500"})  # == chunk_size
    with pytest.raises(ConfigError):
        load_config(env={"LKB_INDEX_PQ_BITS": "20"})
    with pytest.raises(ConfigError):
        load_config(env={"LKB_EMBEDDER_KIND": "remote"})  # needs a url


def test_bool_parsing():
    assert load_config(env={"LKB_LLM_MOCK": "off"})["llm.mock"] is False
    assert load_config(env={"LKB_LLM_MOCK": "1"})["llm.mock"] is True
    with pytest.raises(ConfigError):
        load_config(env={"LKB_LLM_MOCK": "maybe"})


def test_auto_nlist_clamps():
    assert auto_nlist(1) == 1
    assert auto_nlist(100) == 10
    assert auto_nlist(10_000) == 100
    assert auto_nlist(100_000_000) == 4096
