"""Exact prime counting by segmented sieving, with a small persistent cache."""

from __future__ import annotations

import hashlib
import logging
import math
import os
import tempfile
import threading
from bisect import bisect_right
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DomainError, LimitExceeded, MontgomeryVaughanViolation
from .numeric_core import Interval, as_interval, certified_floor

log = logging.getLogger(__name__)

PI_CAP = 10**10
DENSE_MAX = 1 << 24
CACHE_ENV = "HARMONIC_LI_CACHE"
CACHE_MAGIC = "harmonic-li-picache"
CACHE_VERSION = "v1"


# --------------------------------------------------------------------------
# Sieving primitives
# --------------------------------------------------------------------------

def primes_up_to(n: int) -> np.ndarray:
    """All primes ``<= n`` as an int64 array (odd-only sieve)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    size = (n - 1) // 2  # index i represents 2*i + 3
    sieve = np.ones(size, dtype=bool)
    for i in range((math.isqrt(n) - 3) // 2 + 1):
        if sieve[i]:
            p = 2 * i + 3
            sieve[(p * p - 3) // 2 :: p] = False
    odd = 2 * np.flatnonzero(sieve).astype(np.int64) + 3
    return np.concatenate((np.array([2], dtype=np.int64), odd))


def count_primes_in_range(lo: int, hi: int, base_primes: np.ndarray) -> int:
    """Number of primes ``p`` with ``lo <= p < hi``; ``base_primes`` must cover ``sqrt(hi)``."""
    if hi <= lo or hi <= 2:
        return 0
    count = 1 if lo <= 2 < hi else 0
    start = max(lo, 3)
    if start % 2 == 0:
        start += 1
    if start >= hi:
        return count
    size = (hi - start + 1) // 2  # odd numbers start, start+2, ... < hi
    seg = np.ones(size, dtype=bool)
    limit = math.isqrt(hi - 1)
    for p in base_primes[1 : np.searchsorted(base_primes, limit, side="right")]:
        p = int(p)
        first = max(p * p, -(-start // p) * p)
        if first % 2 == 0:
            first += p
        if first < hi:
            seg[(first - start) // 2 :: p] = False
    if start == 1:
        seg[0] = False
    return count + int(np.count_nonzero(seg))


def _count_chunk(args: tuple[int, int, int]) -> int:
    lo, hi, segment = args
    base = primes_up_to(math.isqrt(hi) + 1)
    total = 0
    for a in range(lo, hi, segment):
        total += count_primes_in_range(a, min(a + segment, hi), base)
    return total


# --------------------------------------------------------------------------
# Configuration and cache
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SieveConfig:
    segment_size: int = 1 << 20
    parallel_segments: int = 0  # 0 means one worker per CPU for large ranges

    def __post_init__(self) -> None:
        if self.segment_size < 1 << 10:
            raise DomainError("segment_size must be >= 1024")
        if self.parallel_segments < 0:
            raise DomainError("parallel_segments must be >= 0")

    def workers(self) -> int:
        return self.parallel_segments or (os.cpu_count() or 1)


@dataclass
class PrimeCountCache:
    """Checkpoints ``(threshold, pi(threshold))`` in ascending threshold order."""

    limit: int = 0
    entries: list[tuple[int, int]] = field(default_factory=list)

    def body(self) -> str:
        return "".join(f"{x},{c}\n" for x, c in self.entries)

    @property
    def source_hash(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.limit}\n".encode("ascii"))
        h.update(self.body().encode("ascii"))
        return h.hexdigest()

    def add(self, threshold: int, count: int) -> None:
        i = bisect_right(self.entries, (threshold, math.inf))
        if i and self.entries[i - 1][0] == threshold:
            return
        self.entries.insert(i, (threshold, count))
        self.limit = max(self.limit, threshold)

    def floor_entry(self, x: int) -> tuple[int, int] | None:
        """Largest checkpoint with threshold ``<= x``."""
        i = bisect_right(self.entries, (x, math.inf))
        return self.entries[i - 1] if i else None

    def validate(self) -> None:
        prev_x, prev_c = -1, 0
        for x, c in self.entries:
            if x <= prev_x or c < prev_c or c < 0:
                raise ValueError("cache entries are not monotone")
            prev_x, prev_c = x, c

    def save(self, path: str | os.PathLike) -> None:
        """Atomic write: temp file in the same directory, then rename."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        text = f"{CACHE_MAGIC} {CACHE_VERSION} {self.limit} {self.source_hash}\n" + self.body()
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @classmethod
    def load(cls, path: str | os.PathLike) -> "PrimeCountCache | None":
        """Read a cache file; ``None`` if it is missing, malformed or fails its checksum."""
        try:
            lines = Path(path).read_text(encoding="ascii").splitlines()
        except (OSError, UnicodeDecodeError):
            return None
        if not lines:
            return None
        head = lines[0].split()
        if len(head) != 4 or head[0] != CACHE_MAGIC or head[1] != CACHE_VERSION:
            log.warning("ignoring prime cache %s: bad header", path)
            return None
        try:
            cache = cls(int(head[2]), [tuple(int(v) for v in ln.split(",")) for ln in lines[1:] if ln])
            cache.validate()
        except ValueError:
            log.warning("ignoring prime cache %s: malformed body", path)
            return None
        if cache.source_hash != head[3]:
            log.warning("ignoring prime cache %s: checksum mismatch, re-sieving", path)
            return None
        return cache


# --------------------------------------------------------------------------
# Counter
# --------------------------------------------------------------------------

def _floor_threshold(x) -> int:
    if isinstance(x, bool):
        raise TypeError("bool is not a threshold")
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return math.floor(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise DomainError("threshold must be finite")
        return math.floor(x)
    return certified_floor(as_interval(x))


class PrimeCounter:
    """``pi(x)`` for ``0 <= x <= 10**10``.

    Up to 2^24 a dense prime table answers queries by binary search; above
    that, counts are extended from the nearest cached checkpoint with a
    segmented odd-only sieve.
    """

    def __init__(self, cache_path: str | os.PathLike | None = None, config: SieveConfig | None = None):
        self.config = config or SieveConfig()
        self.cache_path = Path(cache_path) if cache_path else None
        self._lock = threading.Lock()
        self._dense = np.zeros(0, dtype=np.int64)
        self._dense_limit = 1
        self.cache = PrimeCountCache()
        if self.cache_path is not None:
            loaded = PrimeCountCache.load(self.cache_path)
            if loaded is not None:
                self.cache = loaded
            elif self.cache_path.exists():
                self.verify_and_rebuild()

    # -- dense range -------------------------------------------------------
    def _ensure_dense(self, n: int) -> None:
        if n <= self._dense_limit:
            return
        with self._lock:
            if n <= self._dense_limit:
                return
            limit = min(DENSE_MAX, max(1 << 16, 1 << (n - 1).bit_length()))
            self._dense = primes_up_to(limit)
            self._dense_limit = limit

    def _dense_pi(self, n: int) -> int:
        self._ensure_dense(n)
        return int(np.searchsorted(self._dense, n, side="right"))

    # -- segmented range ---------------------------------------------------
    def _count_between(self, lo: int, hi: int) -> int:
        """Primes in ``(lo, hi]``."""
        a, b = lo + 1, hi + 1
        seg = self.config.segment_size
        span = b - a
        workers = self.config.workers()
        if workers > 1 and span > 8 * seg:
            step = -(-span // (4 * workers))
            step = -(-step // seg) * seg
            chunks = [(x, min(x + step, b), seg) for x in range(a, b, step)]
            with ProcessPoolExecutor(max_workers=workers) as pool:
                return sum(pool.map(_count_chunk, chunks))
        return _count_chunk((a, b, seg))

    def _sparse_pi(self, n: int) -> int:
        entry = self.cache.floor_entry(n)
        if entry is None or entry[0] < DENSE_MAX:
            entry = (DENSE_MAX, self._dense_pi(DENSE_MAX))
        x0, c0 = entry
        if x0 == n:
            return c0
        count = c0 + self._count_between(x0, n)
        with self._lock:
            self.cache.add(n, count)
        return count

    # -- public ------------------------------------------------------------
    def pi(self, x) -> int:
        n = _floor_threshold(x)
        if n < 0:
            raise DomainError("pi needs x >= 0")
        if n > PI_CAP:
            raise LimitExceeded(f"x={n} exceeds the sieve cap {PI_CAP}")
        if n < 2:
            return 0
        if n <= DENSE_MAX:
            count = self._dense_pi(n)
            return count
        return self._sparse_pi(n)

    def pi_batch(self, thresholds) -> list[int]:
        ns = [_floor_threshold(x) for x in thresholds]
        if not ns:
            return []
        if any(b < a for a, b in zip(ns, ns[1:])):
            raise DomainError("thresholds must be ascending")
        if ns[-1] > PI_CAP:
            raise LimitExceeded(f"x={ns[-1]} exceeds the sieve cap {PI_CAP}")
        if ns[0] < 0:
            raise DomainError("pi needs x >= 0")
        dense = [n for n in ns if n <= DENSE_MAX]
        out: list[int] = []
        if dense:
            self._ensure_dense(max(dense[-1], 2))
            out.extend(int(c) for c in np.searchsorted(self._dense, np.asarray(dense, dtype=np.int64), side="right"))
        for n in ns[len(dense):]:
            out.append(self._sparse_pi(n))
        return out

    def prime_density(self, x) -> Interval:
        X = as_interval(x)
        if not X.is_positive():
            raise DomainError("prime_density needs x > 0")
        return Interval(self.pi(x)) / X

    def persist(self) -> None:
        if self.cache_path is not None:
            with self._lock:
                self.cache.save(self.cache_path)

    def verify_and_rebuild(self) -> None:
        """Discard the cache and re-sieve every checkpoint from scratch."""
        old = [x for x, _ in self.cache.entries]
        self.cache = PrimeCountCache()
        for x in old:
            self.pi(x)
        self.persist()

    def reproduce(self) -> bool:
        """Re-sieve every cached checkpoint independently and compare."""
        for x, c in self.cache.entries:
            if _count_chunk((0, x + 1, self.config.segment_size)) != c:
                return False
        return True


_DEFAULT: PrimeCounter | None = None
_DEFAULT_LOCK = threading.Lock()


def default_counter() -> PrimeCounter:
    """Process-wide counter, cached at ``$HARMONIC_LI_CACHE`` when set."""
    global _DEFAULT
    with _DEFAULT_LOCK:
        if _DEFAULT is None:
            _DEFAULT = PrimeCounter(os.environ.get(CACHE_ENV) or None)
        return _DEFAULT


def set_default_counter(counter: PrimeCounter) -> None:
    global _DEFAULT
    with _DEFAULT_LOCK:
        _DEFAULT = counter


def pi(x) -> int:
    """Number of primes ``<= x``."""
    return default_counter().pi(x)


def pi_batch(thresholds) -> list[int]:
    return default_counter().pi_batch(thresholds)


def prime_density(x) -> Interval:
    """Enclosure of ``pi(x) / x``."""
    return default_counter().prime_density(x)


@dataclass(frozen=True)
class GapCheck:
    x: object
    y: object
    count: int
    bound: Interval
    margin: Interval


def mv_gap_check(x, y, counter: PrimeCounter | None = None) -> GapCheck:
    """Check ``0 <= pi(y) - pi(x) < 2(y - x)/log(y - x)`` and return its margin."""
    counter = counter or default_counter()
    X, Y = as_interval(x), as_interval(y)
    if not X.is_positive() or not (Y - X).certainly_gt(1):
        raise DomainError("need y > x > 0 and y - x > 1")
    count = counter.pi(y) - counter.pi(x)
    diff = Y - X
    bound = diff * 2 / diff.log()
    margin = bound - count
    if count < 0 or not margin.is_positive():
        raise MontgomeryVaughanViolation(f"pi({y}) - pi({x}) = {count} vs bound {bound}")
    return GapCheck(x, y, count, bound, margin)
