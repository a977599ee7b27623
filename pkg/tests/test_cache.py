import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bpn_ext.cache import ENV_VAR, FORMAT_VERSION, CacheEntry, SliceCache, resolve_cache_dir

KEY = {"p": 2, "m": 1, "n": 1, "s": 3, "t": -5, "w": 16}


def test_put_get(tmp_path):
    cache = SliceCache(tmp_path)
    assert cache.get(KEY) is None
    cache.put(KEY, 4)
    assert cache.get(KEY) == 4
    assert not list(tmp_path.rglob("*.tmp"))


def test_ensure_computes_once(tmp_path):
    cache = SliceCache(tmp_path)
    calls = []
    for _ in range(3):
        assert cache.ensure(KEY, lambda: calls.append(1) or 7) == 7
    assert len(calls) == 1


def test_corrupt_entry_warns(tmp_path, caplog):
    cache = SliceCache(tmp_path)
    cache.put(KEY, 4)
    path = cache.path_for(KEY)
    raw = json.loads(path.read_text())
    raw["payload"] = 5
    path.write_text(json.dumps(raw))
    assert cache.get(KEY) is None
    assert "corrupt" in caplog.text


def test_version_mismatch_invalidates(tmp_path, caplog):
    cache = SliceCache(tmp_path)
    path = cache.path_for(KEY)
    path.parent.mkdir(parents=True)
    path.write_text(CacheEntry(KEY, 4, FORMAT_VERSION + 1).dumps())
    assert cache.get(KEY) is None
    assert "stale" in caplog.text


def test_resolution_order(tmp_path, monkeypatch):
    monkeypatch.setenv(ENV_VAR, str(tmp_path / "env"))
    assert resolve_cache_dir(str(tmp_path / "flag")) == tmp_path / "flag"
    assert resolve_cache_dir(None) == tmp_path / "env"
    monkeypatch.delenv(ENV_VAR)
    monkeypatch.setenv("XDG_CACHE_HOME", str(tmp_path / "xdg"))
    assert resolve_cache_dir(None) == tmp_path / "xdg" / "bpn-ext"


payloads = st.recursive(
    st.none() | st.booleans() | st.integers() | st.text(),
    lambda inner: st.lists(inner, max_size=4) | st.dictionaries(st.text(max_size=5), inner, max_size=4),
    max_leaves=10,
)


@given(payloads)
def test_entry_round_trip(payload):
    entry = CacheEntry(KEY, payload)
    text = entry.dumps()
    back = CacheEntry.loads(text)
    assert back == entry and back.dumps() == text


def test_checksum_mismatch_raises():
    raw = json.loads(CacheEntry(KEY, [1, 2]).dumps())
    raw["payload"] = [1, 3]
    with pytest.raises(ValueError):
        CacheEntry.loads(json.dumps(raw))
