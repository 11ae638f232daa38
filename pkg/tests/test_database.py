"""Tests for the sqlite correlator cache."""

import numpy as np
import pytest

from database import (
    CacheKey,
    cache_stats,
    coupling_key,
    decode_payload,
    encode_payload,
    init_database,
    load_correlators,
    load_many,
    store_correlators,
    store_many,
)


@pytest.fixture
def conn(tmp_path):
    connection = init_database(str(tmp_path / 'cache'))
    yield connection
    connection.close()


class TestCacheKey:

    def test_coupling_key_is_twelve_digits(self):
        assert coupling_key(0.1 + 0.2) == coupling_key(0.3)
        assert coupling_key(0.9995) != coupling_key(0.9990)

    def test_for_point(self):
        key = CacheKey.for_point(64, 0.5, 'ns-even', engine_version='9.9')
        assert key.as_row() == (64, '0.5', 'ns-even', '9.9')


class TestPayload:

    def test_header_mismatch_is_a_miss(self):
        payload = encode_payload(4, 0.5, 'ns-even', np.array([1.0, 0.3, 0.1, 0.3]))
        assert decode_payload(payload, 4, 0.6, 'ns-even') is None
        assert decode_payload(payload, 4, 0.5, 'odd-ring') is None
        np.testing.assert_array_equal(decode_payload(payload, 4, 0.5, 'ns-even'), [1.0, 0.3, 0.1, 0.3])

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            encode_payload(4, 0.5, 'ns-even', np.ones(3))


class TestStore:

    def test_store_and_load(self, conn):
        key = CacheKey.for_point(4, 0.5, 'ns-even')
        xx = np.array([1.0, 0.25, 0.125, 0.25])
        store_correlators(conn, key, 0.5, xx)
        np.testing.assert_array_equal(load_correlators(conn, key, 0.5), xx)

    def test_engine_version_separates_entries(self, conn):
        store_correlators(conn, CacheKey.for_point(4, 0.5, 'ns-even', engine_version='0.1'), 0.5, np.ones(4))
        assert load_correlators(conn, CacheKey.for_point(4, 0.5, 'ns-even'), 0.5) is None

    def test_batch_round_trip(self, conn):
        entries = [(4, lam, 'ns-even', np.full(4, lam)) for lam in (0.1, 0.2, 0.3)]
        assert store_many(conn, entries) == 3
        hits = load_many(conn, [(4, 0.2, 'ns-even'), (4, 0.25, 'ns-even'), (4, 0.3, 'ns-even')])
        assert sorted(hits) == [0, 2]
        np.testing.assert_array_equal(hits[2], np.full(4, 0.3))

    def test_replace_on_rewrite(self, conn):
        key = CacheKey.for_point(4, 0.5, 'ns-even')
        store_correlators(conn, key, 0.5, np.ones(4))
        store_correlators(conn, key, 0.5, np.zeros(4))
        np.testing.assert_array_equal(load_correlators(conn, key, 0.5), np.zeros(4))
        assert sum(cache_stats(conn).values()) == 1

    def test_reopen_keeps_entries(self, tmp_path):
        cache_dir = str(tmp_path / 'cache')
        first = init_database(cache_dir)
        store_many(first, [(4, 0.5, 'ns-even', np.ones(4))])
        first.close()
        second = init_database(cache_dir)
        assert load_many(second, [(4, 0.5, 'ns-even')])[0].tolist() == [1.0, 1.0, 1.0, 1.0]
        second.close()
