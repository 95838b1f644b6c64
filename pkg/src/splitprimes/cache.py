"""Append-only on-disk memo of Frobenius traces.

One record per line, ``p,A,B,ap`` in decimal, keyed by (p, A mod p,
B mod p).  Appends are flushed immediately, so a crash can leave at most
one partial trailing line; that line is cut off on the next open.
"""
from __future__ import annotations

import logging
import os
import threading
from pathlib import Path

from .traces import hasse_ok

ENV_VAR = "SPLITPRIMES_CACHE"

log = logging.getLogger(__name__)


def default_cache_path() -> Path | None:
    v = os.environ.get(ENV_VAR)
    return Path(v) if v else None


class ApCache:
    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)
        self._data: dict[tuple[int, int, int], int] = {}
        self.rejected: list[str] = []
        self._lock = threading.Lock()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.touch(exist_ok=True)
        self._load()

    @staticmethod
    def _key(p: int, A: int, B: int) -> tuple[int, int, int]:
        return p, A % p, B % p

    def _load(self) -> None:
        raw = self.path.read_bytes()
        good_end = 0
        pos = 0
        while pos < len(raw):
            nl = raw.find(b"\n", pos)
            if nl < 0:
                break  # unterminated tail
            line = raw[pos:nl].decode("ascii", "replace").strip()
            pos = nl + 1
            try:
                p, A, B, a = (int(t) for t in line.split(","))
            except ValueError:
                if pos >= len(raw):
                    break  # garbled final record: treat as a torn write
                self.rejected.append(line)
                log.warning("unparsable cache record rejected: %r", line)
                good_end = pos
                continue
            good_end = pos
            if p < 2 or not hasse_ok(a, p):
                self.rejected.append(line)
                log.warning("cache record violates the Hasse bound, rejected: %r", line)
                continue
            self._data[self._key(p, A, B)] = a
        if good_end < len(raw):
            log.warning("truncating corrupt cache tail in %s (%d bytes)", self.path, len(raw) - good_end)
            with open(self.path, "r+b") as fh:
                fh.truncate(good_end)

    def __len__(self) -> int:
        return len(self._data)

    def get(self, p: int, A: int, B: int) -> int | None:
        return self._data.get(self._key(p, A, B))

    def put(self, p: int, A: int, B: int, a: int) -> None:
        if not hasse_ok(a, p):
            raise ValueError(f"a_p={a} violates the Hasse bound at p={p}")
        key = self._key(p, A, B)
        with self._lock:
            old = self._data.get(key)
            if old is not None:
                if old != a:
                    raise ValueError(f"cache already holds a_p={old} for {key}, refusing {a}")
                return
            with open(self.path, "a", encoding="ascii") as fh:
                fh.write(f"{p},{A},{B},{a}\n")
                fh.flush()
            self._data[key] = a
