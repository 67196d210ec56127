import json

import pytest

from snaproute.elevation import (
    FallbackProvider,
    FlatProvider,
    RemoteProvider,
    SyntheticProvider,
    make_provider,
)
from snaproute.errors import InvalidInput, RemoteUnavailable
from snaproute.geo import GeoPoint, LocalFrame


FRAME = LocalFrame(origin=GeoPoint(40.0, 23.0))


class CountingFetch:
    def __init__(self, fn=None, fail=False):
        self.calls = []
        self.fn = fn or (lambda lat, lon: 100.0 + lat)
        self.fail = fail

    def __call__(self, coords):
        self.calls.append(list(coords))
        if self.fail:
            raise RemoteUnavailable("synthetic outage")
        return [self.fn(lat, lon) for lat, lon in coords]


class TestFlat:
    def test_constant(self):
        p = FlatProvider(120.0)
        assert p.elevation_at(GeoPoint(40.0, 23.0)) == 120.0
        assert p.elevation_at(GeoPoint(-10.0, 100.0)) == 120.0


class TestSynthetic:
    def test_plane_east_slope(self):
        p = SyntheticProvider(FRAME, "plane", z0=100.0, slope_x=0.01)
        east_1km = FRAME.to_geo(type("P", (), {"x": 1000.0, "y": 0.0})())
        assert p.elevation_at(east_1km) == pytest.approx(110.0, abs=1e-6)

    def test_unknown_surface(self):
        with pytest.raises(InvalidInput):
            SyntheticProvider(FRAME, "volcano")


class TestRemote:
    def test_cache_hit_avoids_network(self, tmp_path):
        fetch = CountingFetch()
        p = RemoteProvider("http://example/api", cache_path=tmp_path / "c.jsonl", fetch=fetch)
        g = GeoPoint(40.0, 23.0)
        v1 = p.elevation_at(g)
        v2 = p.elevation_at(g)
        assert v1 == v2
        assert len(fetch.calls) == 1

    def test_batch_order_preserved_and_equals_singles(self, tmp_path):
        fetch = CountingFetch(fn=lambda lat, lon: lat * 10 + lon)
        p = RemoteProvider("http://example/api", cache_path=tmp_path / "c.jsonl", fetch=fetch)
        pts = [GeoPoint(40.0, 23.0), GeoPoint(40.1, 23.1), GeoPoint(39.9, 22.9)]
        batch = p.batch_elevations(pts)
        p2 = RemoteProvider("http://example/api", fetch=CountingFetch(fn=lambda lat, lon: lat * 10 + lon))
        singles = [p2.elevation_at(q) for q in pts]
        assert batch == singles

    def test_empty_batch(self):
        p = RemoteProvider("http://example/api", fetch=CountingFetch())
        assert p.batch_elevations([]) == []

    def test_600_points_two_requests(self):
        fetch = CountingFetch()
        p = RemoteProvider("http://example/api", fetch=fetch)
        pts = [GeoPoint(30.0 + i * 1e-4, 20.0) for i in range(600)]
        p.batch_elevations(pts)
        assert len(fetch.calls) == 2
        assert len(fetch.calls[0]) == 512
        assert len(fetch.calls[1]) == 88

    def test_failure_raises_whole_batch(self):
        p = RemoteProvider("http://example/api", fetch=CountingFetch(fail=True))
        with pytest.raises(RemoteUnavailable):
            p.batch_elevations([GeoPoint(40.0, 23.0), GeoPoint(41.0, 23.0)])

    def test_disk_cache_round_trip(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        fetch = CountingFetch()
        p1 = RemoteProvider("http://example/api", cache_path=path, fetch=fetch)
        g = GeoPoint(40.123456, 23.654321)
        v1 = p1.elevation_at(g)
        # a fresh provider reads from disk, no network
        fetch2 = CountingFetch(fail=True)
        p2 = RemoteProvider("http://example/api", cache_path=path, fetch=fetch2)
        assert p2.elevation_at(g) == v1
        assert fetch2.calls == []
        records = [json.loads(line) for line in path.read_text().splitlines()]
        assert records[0]["elevation"] == v1

    def test_warm_cache_identical_to_cold(self, tmp_path):
        pts = [GeoPoint(40.0 + i * 0.01, 23.0 - i * 0.01) for i in range(20)]
        fetch = CountingFetch(fn=lambda lat, lon: 1000 * lat - 7 * lon)
        p = RemoteProvider("http://example/api", cache_path=tmp_path / "c.jsonl", fetch=fetch)
        cold = p.batch_elevations(pts)
        warm = p.batch_elevations(pts)
        assert cold == warm
        assert len(fetch.calls) == 1


class TestFallback:
    def test_explicit_fallback_flagged(self):
        failing = RemoteProvider("http://example/api", fetch=CountingFetch(fail=True))
        p = FallbackProvider(failing, FlatProvider(55.0))
        assert p.elevation_at(GeoPoint(40.0, 23.0)) == 55.0
        assert p.fallback_used is True

    def test_no_silent_fallback_without_wrapper(self):
        failing = RemoteProvider("http://example/api", fetch=CountingFetch(fail=True))
        with pytest.raises(RemoteUnavailable):
            failing.elevation_at(GeoPoint(40.0, 23.0))


class TestMakeProvider:
    def test_flat(self):
        p = make_provider({"kind": "flat", "z0": 12.0})
        assert isinstance(p, FlatProvider)
        assert p.z0 == 12.0

    def test_synthetic_needs_frame(self):
        with pytest.raises(InvalidInput):
            make_provider({"kind": "synthetic", "surface": "plane"})

    def test_remote_with_fallback(self):
        p = make_provider(
            {"kind": "remote", "endpoint": "http://example/api", "fallback": {"kind": "flat", "z0": 1.0}}
        )
        assert isinstance(p, FallbackProvider)

    def test_unknown_kind(self):
        with pytest.raises(InvalidInput):
            make_provider({"kind": "sonar"})

    def test_none_is_flat_zero(self):
        p = make_provider(None)
        assert p.elevation_at(GeoPoint(0.0, 0.0)) == 0.0
