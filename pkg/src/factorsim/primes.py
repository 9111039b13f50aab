"""Exact prime infrastructure.

``PrimeTable`` is an odd-only, bit-packed Eratosthenes sieve with per-block
prime counts, so ``pi`` and ``nth_prime`` are cheap for arguments up to the
sieve limit.  ``PiOracle`` answers ``pi(x)`` for any ``x``: from the table
when possible and from the Lucy (Legendre-style ``S(v)``) recurrence
otherwise, memoising the large answers and optionally persisting them.
"""

from __future__ import annotations

import math
import threading
from pathlib import Path

import numpy as np

from .errors import CapacityExceededError, InvalidArgumentError, ParseError

# odds per sieving segment
SEGMENT_ODDS = 1 << 20
# odds per cumulative-count block (64 packed bytes)
BLOCK_ODDS = 512
BLOCK_BYTES = BLOCK_ODDS // 8
SUBLINEAR_THRESHOLD = 10**8

_POPCOUNT = np.array([bin(b).count("1") for b in range(256)], dtype=np.int64)


def small_primes(limit: int) -> np.ndarray:
    """Plain (unsegmented) sieve; primes <= limit as int64."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    return np.flatnonzero(flags).astype(np.int64)


def sieve_window(lo: int, hi: int, base: np.ndarray | None = None) -> np.ndarray:
    """Primes in [lo, hi) by sieving only that window.

    ``base`` must contain every prime up to isqrt(hi - 1); it is computed
    when omitted.
    """
    lo = max(lo, 2)
    if hi <= lo:
        return np.zeros(0, dtype=np.int64)
    root = math.isqrt(hi - 1)
    if base is None:
        base = small_primes(root)
    flags = np.ones(hi - lo, dtype=bool)
    for p in base:
        p = int(p)
        if p > root:
            break
        start = max(p * p, -(-lo // p) * p)
        if start >= hi:
            continue
        flags[start - lo :: p] = False
    return np.flatnonzero(flags).astype(np.int64) + lo


class PrimeTable:
    """Bit-packed odd-only sieve up to ``limit`` with block prime counts.

    Bit ``i`` (little-endian within each byte) marks whether ``2*i + 1`` is
    prime.  ``cumulative_blocks[b]`` counts odd primes with bit index below
    ``b * BLOCK_ODDS``.
    """

    def __init__(self, limit: int, bitset: np.ndarray, cumulative_blocks: np.ndarray):
        self.limit = limit
        self.bitset = bitset
        self.cumulative_blocks = cumulative_blocks
        self._rows = bitset.reshape(-1, BLOCK_BYTES)
        self._primes: np.ndarray | None = None
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        return f"PrimeTable(limit={self.limit}, count={self.count})"

    @property
    def count(self) -> int:
        """Number of primes <= limit."""
        return int(self.cumulative_blocks[-1]) + (1 if self.limit >= 2 else 0)

    def is_prime(self, n: int) -> bool:
        n = int(n)
        if n < 0 or n > self.limit:
            raise CapacityExceededError(f"{n} outside sieved range [0, {self.limit}]")
        if n < 3:
            return n == 2
        if n % 2 == 0:
            return False
        i = n >> 1
        return bool((self.bitset[i >> 3] >> (i & 7)) & 1)

    def pi(self, x: int) -> int:
        """Exact count of primes <= x for x <= limit."""
        x = int(x)
        if x < 2:
            return 0
        if x > self.limit:
            raise CapacityExceededError(f"pi({x}) beyond sieve limit {self.limit}")
        return int(self.pi_many(np.array([x]))[0])

    def pi_many(self, xs) -> np.ndarray:
        """Vectorised ``pi`` over an array of arguments, all <= limit."""
        xs = np.asarray(xs, dtype=np.int64)
        if xs.size and int(xs.max()) > self.limit:
            raise CapacityExceededError(f"pi({int(xs.max())}) beyond sieve limit {self.limit}")
        out = np.zeros(xs.shape, dtype=np.int64)
        ok = xs >= 2
        if not ok.any():
            return out
        # odds 1, 3, ..., x occupy bit indices 0 .. (x-1)//2
        upto = (xs[ok] - 1) // 2 + 1
        blk = upto // BLOCK_ODDS
        rem = upto % BLOCK_ODDS
        rows = self._rows[np.minimum(blk, len(self._rows) - 1)]
        full = rem // 8
        pc = _POPCOUNT[rows]
        pc[np.arange(BLOCK_BYTES)[None, :] >= full[:, None]] = 0
        tail = rows[np.arange(len(rows)), np.minimum(full, BLOCK_BYTES - 1)].astype(np.int64)
        tail &= (1 << (rem % 8)) - 1
        counts = self.cumulative_blocks[blk] + pc.sum(axis=1) + _POPCOUNT[tail]
        out[ok] = counts + 1  # the prime 2
        return out

    def nth_prime(self, n: int) -> int:
        """The n-th prime (1-based) within the sieved range."""
        n = int(n)
        if n < 1:
            raise InvalidArgumentError("nth_prime needs n >= 1")
        if n == 1:
            if self.limit < 2:
                raise CapacityExceededError("sieve too small for the first prime")
            return 2
        if n > self.count:
            raise CapacityExceededError(
                f"nth_prime({n}) needs a sieve beyond {self.limit} (holds {self.count} primes)"
            )
        target = n - 1  # rank among odd primes
        blk = int(np.searchsorted(self.cumulative_blocks, target, side="left")) - 1
        before = int(self.cumulative_blocks[blk])
        bits = np.unpackbits(self._rows[blk], bitorder="little")
        idx = np.flatnonzero(bits)[target - before - 1]
        return 2 * (blk * BLOCK_ODDS + int(idx)) + 1

    def primes(self, lo: int = 2, hi: int | None = None) -> np.ndarray:
        """Primes p with lo <= p < hi (hi defaults to limit + 1)."""
        if hi is None:
            hi = self.limit + 1
        if hi - 1 > self.limit:
            raise CapacityExceededError(f"primes below {hi} exceed sieve limit {self.limit}")
        lo = max(int(lo), 0)
        hi = int(hi)
        if hi <= lo:
            return np.zeros(0, dtype=np.int64)
        if self._primes is not None:
            arr = self._primes
            return arr[np.searchsorted(arr, lo) : np.searchsorted(arr, hi)]
        i0 = lo // 2
        i1 = (hi - 1 + 1) // 2  # bit indices of odds < hi
        b0, b1 = i0 // 8, -(-i1 // 8)
        bits = np.unpackbits(self.bitset[b0:b1], bitorder="little")
        idx = np.flatnonzero(bits).astype(np.int64) + 8 * b0
        vals = 2 * idx + 1
        vals = vals[(vals >= lo) & (vals < hi)]
        if lo <= 2 < hi:
            vals = np.concatenate([[2], vals])
        return vals

    def all_primes(self) -> np.ndarray:
        """Every prime <= limit, materialised once and cached."""
        with self._lock:
            if self._primes is None:
                self._primes = self.primes(2, self.limit + 1)
        return self._primes


def sieve(limit: int, segment_odds: int = SEGMENT_ODDS) -> PrimeTable:
    """Build a ``PrimeTable`` for all integers <= limit.

    Sieving runs over segments of ``segment_odds`` odd numbers; only the
    packed bits (one per odd number) are retained.
    """
    limit = int(limit)
    if limit < 2:
        raise InvalidArgumentError(f"sieve limit must be >= 2, got {limit}")
    n_odds = (limit + 1) // 2
    padded = -(-n_odds // BLOCK_ODDS) * BLOCK_ODDS
    # segments must tile whole packed bytes
    segment_odds = max(BLOCK_ODDS, segment_odds // BLOCK_ODDS * BLOCK_ODDS)
    bitset = np.zeros(padded // 8, dtype=np.uint8)
    base = small_primes(math.isqrt(limit))[1:]  # odd base primes

    for i0 in range(0, padded, segment_odds):
        i1 = min(i0 + segment_odds, padded)
        seg = np.ones(i1 - i0, dtype=bool)
        # mask numbers beyond limit and the non-prime 1
        last_valid = n_odds - i0
        if last_valid < len(seg):
            seg[max(last_valid, 0) :] = False
        if i0 == 0:
            seg[0] = False
        lo_num = 2 * i0 + 1
        hi_num = 2 * i1 + 1
        for p in base:
            p = int(p)
            p2 = p * p
            if p2 >= hi_num:
                break
            if p2 >= lo_num:
                start = p2
            else:
                start = -(-lo_num // p) * p
                if start % 2 == 0:
                    start += p
            seg[(start - lo_num) // 2 :: p] = False
        bitset[i0 // 8 : i1 // 8] = np.packbits(seg, bitorder="little")

    per_block = _POPCOUNT[bitset.reshape(-1, BLOCK_BYTES)].sum(axis=1)
    cumulative = np.zeros(len(per_block) + 1, dtype=np.int64)
    np.cumsum(per_block, out=cumulative[1:])
    # the trailing entry doubles as a sentinel row for queries at block ends
    bitset = np.concatenate([bitset, np.zeros(BLOCK_BYTES, dtype=np.uint8)])
    return PrimeTable(limit, bitset, cumulative)


def lucy_pi(n: int) -> int:
    """Exact pi(n) by the Lucy recurrence, O(n^(3/4)) operations.

    ``small[v]`` holds S(v) for v <= sqrt(n) and ``large[i]`` holds S(n // i);
    after processing every prime p <= sqrt(n), S(v) = pi(v).
    """
    n = int(n)
    if n < 2:
        return 0
    if n < 4:
        return n - 1
    r = math.isqrt(n)
    small = np.arange(-1, r, dtype=np.int64)  # small[v] = v - 1
    idx = np.arange(1, r + 1, dtype=np.int64)
    large = np.empty(r + 1, dtype=np.int64)
    large[0] = 0
    large[1:] = n // idx - 1
    for p in range(2, r + 1):
        if small[p] == small[p - 1]:
            continue
        sp = int(small[p - 1])
        p2 = p * p
        imax = min(r, n // p2)
        d = idx[:imax] * p
        inner = d <= r
        sub = np.empty(imax, dtype=np.int64)
        sub[inner] = large[d[inner]]
        sub[~inner] = small[n // d[~inner]]
        large[1 : imax + 1] -= sub - sp
        if p2 <= r:
            v = np.arange(p2, r + 1, dtype=np.int64)
            small[p2 : r + 1] -= small[v // p] - sp
    return int(large[1])


class PiOracle:
    """Exact prime counting for arbitrary arguments.

    Arguments within ``table.limit`` are answered by the sieve; larger ones go
    through ``lucy_pi`` and are memoised in ``large_cache``.  When
    ``cache_path`` is set, the cache is loaded lazily on first large query and
    can be written back with ``save``.
    """

    def __init__(self, table: PrimeTable, cache_path: str | Path | None = None):
        self.table = table
        self.large_cache: dict[int, int] = {}
        self.cache_path = Path(cache_path) if cache_path else None
        self._loaded = self.cache_path is None
        self._lock = threading.Lock()

    @classmethod
    def for_limit(
        cls,
        limit: int,
        threshold: int = SUBLINEAR_THRESHOLD,
        cache_path: str | Path | None = None,
    ) -> "PiOracle":
        """Oracle whose sieve covers min(limit, threshold)."""
        return cls(sieve(max(2, min(int(limit), threshold))), cache_path)

    def pi(self, x: int) -> int:
        x = int(x)
        if x < 2:
            return 0
        if x <= self.table.limit:
            return self.table.pi(x)
        self._ensure_loaded()
        with self._lock:
            hit = self.large_cache.get(x)
        if hit is not None:
            return hit
        value = lucy_pi(x)
        with self._lock:
            self.large_cache[x] = value
        return value

    __call__ = pi

    def pi_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64)
        inside = xs <= self.table.limit
        out = np.empty(xs.shape, dtype=np.int64)
        out[inside] = self.table.pi_many(xs[inside])
        for k in np.flatnonzero(~inside):
            out.flat[k] = self.pi(int(xs.flat[k]))
        return out

    def nth_prime(self, n: int) -> int:
        return self.table.nth_prime(n)

    def is_prime(self, n: int) -> bool:
        n = int(n)
        if n <= self.table.limit:
            return self.table.is_prime(n)
        if n < 2:
            return False
        root = math.isqrt(n)
        if root > self.table.limit:
            raise CapacityExceededError(f"cannot test {n}: sieve limit {self.table.limit} below sqrt")
        for p in self.table.primes(2, root + 1):
            if n % int(p) == 0:
                return False
        return True

    def _ensure_loaded(self) -> None:
        if self._loaded:
            return
        with self._lock:
            if not self._loaded:
                if self.cache_path.exists():
                    self.large_cache.update(load_cache(self.cache_path))
                self._loaded = True

    def save(self, path: str | Path | None = None) -> Path:
        path = Path(path) if path else self.cache_path
        if path is None:
            raise InvalidArgumentError("no cache path configured")
        self._ensure_loaded()
        with self._lock:
            items = sorted(self.large_cache.items())
        write_cache(path, items)
        return path


def load_cache(path: str | Path) -> dict[int, int]:
    """Read a ``x<TAB>pi`` cache file; malformed or unsorted lines raise."""
    out: dict[int, int] = {}
    prev = -1
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0].isdigit() or not parts[1].isdigit():
                raise ParseError(f"{path}:{lineno}: expected 'x<TAB>pi', got {line!r}")
            x, count = int(parts[0]), int(parts[1])
            if x <= prev:
                raise ParseError(f"{path}:{lineno}: cache not sorted ascending")
            prev = x
            out[x] = count
    return out


def write_cache(path: str | Path, items) -> None:
    """Write (x, pi) pairs or a mapping, sorted by x, via a temp file."""
    if hasattr(items, "items"):
        items = items.items()
    items = sorted(items)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        for x, count in items:
            fh.write(f"{x}\t{count}\n")
    tmp.replace(path)


_DEFAULT: PiOracle | None = None


def default_oracle() -> PiOracle:
    """Process-wide oracle over a 2**20 sieve, built on first use."""
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = PiOracle.for_limit(1 << 20)
    return _DEFAULT


def pi_exact(x: int, oracle: PiOracle | None = None) -> int:
    """Exact number of primes <= x."""
    return (oracle or default_oracle()).pi(x)


def nth_prime(n: int, oracle: PiOracle | None = None) -> int:
    return (oracle or default_oracle()).nth_prime(n)
