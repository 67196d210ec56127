"""Terrain elevation sources for converting above-ground altitudes to
absolute flight altitudes.

Three providers: a flat plane, analytic synthetic surfaces for testing, and
a remote HTTP API with a JSON-lines disk cache. Remote failures raise
``RemoteUnavailable``; falling back to flat terrain only happens when the
caller configured an explicit fallback, never silently.
"""

from __future__ import annotations

import json
import logging
import math
import os
import threading
from pathlib import Path
from typing import Callable, Sequence

from .errors import InvalidInput, RemoteUnavailable
from .geo import GeoPoint, LocalFrame

log = logging.getLogger(__name__)

# Cache keys round coordinates to about 0.1 m.
CACHE_DECIMALS = 6
# Remote APIs accept at most this many locations per request.
MAX_BATCH = 512


class ElevationProvider:
    """Ground elevation in metres AMSL at a geographic point."""

    def elevation_at(self, p: GeoPoint) -> float:
        raise NotImplementedError

    def batch_elevations(self, points: Sequence[GeoPoint]) -> list[float]:
        """Order-preserving batch lookup, equal to per-point queries."""
        return [self.elevation_at(p) for p in points]


class FlatProvider(ElevationProvider):
    def __init__(self, z0: float = 0.0):
        self.z0 = float(z0)

    def elevation_at(self, p: GeoPoint) -> float:
        return self.z0


class SyntheticProvider(ElevationProvider):
    """Analytic surfaces evaluated in a local frame.

    surfaces:
      plane: z0 + slope_x * x_east + slope_y * y_north
      ridge: z0 + amplitude * sin(2*pi*x_east/wavelength)
    """

    def __init__(self, frame: LocalFrame, surface: str = "plane", **params):
        self.frame = frame
        self.surface = surface
        self.params = params
        if surface not in ("plane", "ridge"):
            raise InvalidInput(f"unknown synthetic surface {surface!r}")

    def elevation_at(self, p: GeoPoint) -> float:
        local = self.frame.to_local(p)
        q = self.params
        if self.surface == "plane":
            return (
                q.get("z0", 0.0)
                + q.get("slope_x", 0.0) * local.x
                + q.get("slope_y", 0.0) * local.y
            )
        return q.get("z0", 0.0) + q.get("amplitude", 10.0) * math.sin(
            2.0 * math.pi * local.x / q.get("wavelength", 500.0)
        )


def _cache_key(p: GeoPoint) -> tuple[float, float]:
    return (round(p.lat, CACHE_DECIMALS), round(p.lon, CACHE_DECIMALS))


class RemoteProvider(ElevationProvider):
    """HTTP elevation API with an on-disk JSON-lines cache.

    The wire format is a GET with ``locations=lat,lon|lat,lon|...`` returning
    ``{"results": [{"elevation": <m>}, ...]}``. The API key is read from the
    environment variable named by ``api_key_env`` and sent as a ``key`` query
    parameter. A custom ``fetch`` callable may replace the HTTP transport
    (tests use this for instrumentation).
    """

    def __init__(
        self,
        endpoint: str,
        api_key_env: str = "ELEVATION_API_KEY",
        cache_path: "str | Path | None" = None,
        fetch: "Callable[[list[tuple[float, float]]], list[float]] | None" = None,
        timeout: float = 10.0,
    ):
        self.endpoint = endpoint
        self.api_key_env = api_key_env
        self.cache_path = Path(cache_path) if cache_path else None
        self.timeout = timeout
        self._fetch = fetch or self._fetch_http
        self._cache: dict[tuple[float, float], float] = {}
        self._lock = threading.Lock()
        if self.cache_path and self.cache_path.exists():
            self._load_cache()

    def _load_cache(self) -> None:
        with open(self.cache_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                    self._cache[(round(rec["lat"], CACHE_DECIMALS), round(rec["lon"], CACHE_DECIMALS))] = float(
                        rec["elevation"]
                    )
                except (ValueError, KeyError):
                    log.warning("skipping corrupt cache line in %s", self.cache_path)

    def _append_cache(self, records: list[tuple[float, float, float]]) -> None:
        if not self.cache_path:
            return
        self.cache_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.cache_path, "a", encoding="utf-8") as fh:
            for lat, lon, elev in records:
                fh.write(json.dumps({"lat": lat, "lon": lon, "elevation": elev}) + "\n")

    def _fetch_http(self, coords: list[tuple[float, float]]) -> list[float]:
        import requests

        locations = "|".join(f"{lat},{lon}" for lat, lon in coords)
        params = {"locations": locations}
        key = os.environ.get(self.api_key_env)
        if key:
            params["key"] = key
        try:
            resp = requests.get(self.endpoint, params=params, timeout=self.timeout)
            resp.raise_for_status()
            payload = resp.json()
            results = payload["results"]
            if len(results) != len(coords):
                raise RemoteUnavailable(
                    f"elevation API returned {len(results)} results for {len(coords)} points"
                )
            return [float(r["elevation"]) for r in results]
        except RemoteUnavailable:
            raise
        except Exception as e:
            raise RemoteUnavailable(f"elevation API request failed: {e}") from e

    def elevation_at(self, p: GeoPoint) -> float:
        return self.batch_elevations([p])[0]

    def batch_elevations(self, points: Sequence[GeoPoint]) -> list[float]:
        keys = [_cache_key(p) for p in points]
        with self._lock:
            missing = [k for k in dict.fromkeys(keys) if k not in self._cache]
        fetched: dict[tuple[float, float], float] = {}
        for start in range(0, len(missing), MAX_BATCH):
            chunk = missing[start : start + MAX_BATCH]
            values = self._fetch(chunk)
            if len(values) != len(chunk):
                raise RemoteUnavailable("elevation transport returned a short batch")
            for k, v in zip(chunk, values):
                fetched[k] = float(v)
        if fetched:
            with self._lock:
                new_records = [(k[0], k[1], v) for k, v in fetched.items() if k not in self._cache]
                self._cache.update(fetched)
                self._append_cache(new_records)
        with self._lock:
            return [self._cache[k] for k in keys]


class FallbackProvider(ElevationProvider):
    """Explicit wrapper: use the primary source, fall back on remote failure.

    The fallback is never silent: every use is logged and recorded in
    ``fallback_used``.
    """

    def __init__(self, primary: ElevationProvider, fallback: ElevationProvider):
        self.primary = primary
        self.fallback = fallback
        self.fallback_used = False

    def elevation_at(self, p: GeoPoint) -> float:
        return self.batch_elevations([p])[0]

    def batch_elevations(self, points: Sequence[GeoPoint]) -> list[float]:
        try:
            return self.primary.batch_elevations(points)
        except RemoteUnavailable as e:
            self.fallback_used = True
            log.warning("remote elevation unavailable (%s); using configured fallback", e)
            return self.fallback.batch_elevations(points)


def make_provider(config: dict | None, frame: LocalFrame | None = None) -> ElevationProvider:
    """Build a provider from its JSON configuration.

    kinds: {"kind": "flat", "z0": 120}
           {"kind": "synthetic", "surface": "plane", "z0": 100, "slope_x": 0.01}
           {"kind": "remote", "endpoint": ..., "api_key_env": ...,
            "cache_path": ..., "fallback": {...optional nested config...}}
    """
    if config is None:
        return FlatProvider(0.0)
    kind = config.get("kind")
    if kind == "flat":
        return FlatProvider(config.get("z0", 0.0))
    if kind == "synthetic":
        if frame is None:
            raise InvalidInput("synthetic elevation needs the mission frame")
        params = {k: v for k, v in config.items() if k not in ("kind", "surface")}
        return SyntheticProvider(frame, config.get("surface", "plane"), **params)
    if kind == "remote":
        if "endpoint" not in config:
            raise InvalidInput("remote elevation config needs an endpoint")
        provider: ElevationProvider = RemoteProvider(
            endpoint=config["endpoint"],
            api_key_env=config.get("api_key_env", "ELEVATION_API_KEY"),
            cache_path=config.get("cache_path"),
        )
        if "fallback" in config:
            provider = FallbackProvider(provider, make_provider(config["fallback"], frame))
        return provider
    raise InvalidInput(f"unknown elevation provider kind {kind!r}")
