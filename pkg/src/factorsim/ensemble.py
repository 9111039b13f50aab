"""The factorization ensemble F(j).

F(j) holds every pair of primes x <= y whose product lies in the window
[p_j**2, p_{j+1}**2), i.e. every semiprime N_k with pi(isqrt(N_k)) = j.
Entries are kept column-wise in numpy arrays ordered by (x, y).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import CapacityExceededError, InvalidArgumentError
from .primes import PiOracle, sieve_window, small_primes

# largest y-window sieved in one piece
WINDOW_BUDGET = 1 << 26
CSV_HEADER = ("x", "y", "n_k", "pi_x", "pi_y")


@dataclass(frozen=True)
class EnsembleEntry:
    x: int
    y: int
    n_k: int
    pi_x: int
    pi_y: int


@dataclass(frozen=True)
class CardinalityEstimate:
    estimate: float
    prime_sum: float
    sqrt_n: int


@dataclass(frozen=True, eq=False)
class Ensemble:
    j: int
    p_j: int
    p_j1: int
    x: np.ndarray
    y: np.ndarray
    pi_x: np.ndarray
    pi_y: np.ndarray
    per_x_counts: dict[int, int] = field(repr=False)

    @property
    def n_k(self) -> np.ndarray:
        return self.x * self.y

    @property
    def size(self) -> int:
        return int(self.x.size)

    def __len__(self) -> int:
        return self.size

    @property
    def lower(self) -> int:
        """Smallest admissible product, p_j**2."""
        return self.p_j * self.p_j

    @property
    def upper(self) -> int:
        """Exclusive upper bound, p_{j+1}**2."""
        return self.p_j1 * self.p_j1

    def __getitem__(self, k: int) -> EnsembleEntry:
        x, y = int(self.x[k]), int(self.y[k])
        return EnsembleEntry(x, y, x * y, int(self.pi_x[k]), int(self.pi_y[k]))

    def __iter__(self) -> Iterator[EnsembleEntry]:
        for k in range(self.size):
            yield self[k]

    @property
    def entries(self) -> list[EnsembleEntry]:
        return list(self)

    def __contains__(self, pair) -> bool:
        x, y = sorted(int(v) for v in pair)
        lo = np.searchsorted(self.x, x, side="left")
        hi = np.searchsorted(self.x, x, side="right")
        k = lo + np.searchsorted(self.y[lo:hi], y)
        return bool(k < hi and self.y[k] == y)

    def rows_for(self, x: int) -> slice:
        """Index range of the entries whose smaller factor is x."""
        lo = int(np.searchsorted(self.x, x, side="left"))
        hi = int(np.searchsorted(self.x, x, side="right"))
        return slice(lo, hi)

    def distinct_x(self) -> np.ndarray:
        return np.fromiter(self.per_x_counts, dtype=np.int64, count=len(self.per_x_counts))

    def to_csv(self, fh=None) -> str | None:
        """Write ``x,y,n_k,pi_x,pi_y`` rows; returns the text when fh is None."""
        sink = io.StringIO() if fh is None else fh
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        n_k = self.n_k
        for k in range(self.size):
            writer.writerow((self.x[k], self.y[k], n_k[k], self.pi_x[k], self.pi_y[k]))
        return sink.getvalue() if fh is None else None


def build_ensemble(j: int, oracle: PiOracle, window_budget: int = WINDOW_BUDGET) -> Ensemble:
    """Enumerate F(j) exactly.

    For each prime x <= p_j the admissible cofactors form the window
    [max(x, ceil(p_j**2 / x)), ceil(p_{j+1}**2 / x)); windows inside the
    oracle's sieve are sliced from it, the rest are sieved on their own and
    ranked from an exact pi at the window start.
    """
    j = int(j)
    if j < 1:
        raise InvalidArgumentError(f"ensemble index must be >= 1, got {j}")
    table = oracle.table
    p_j = oracle.nth_prime(j)
    p_j1 = oracle.nth_prime(j + 1)
    lo, hi = p_j * p_j, p_j1 * p_j1

    xs_all = table.primes(2, p_j + 1)
    base = None
    cols_x, cols_y, cols_px, cols_py = [], [], [], []
    counts: dict[int, int] = {}
    for rank, x in enumerate(xs_all, start=1):
        x = int(x)
        y_lo = max(x, -(-lo // x))
        y_hi = -(-hi // x)
        if y_hi <= y_lo:
            continue
        if y_hi - 1 <= table.limit:
            ys = table.primes(y_lo, y_hi)
            pis = table.pi_many(ys) if ys.size else ys
        else:
            if y_hi - y_lo > window_budget:
                raise CapacityExceededError(
                    f"y-window of {y_hi - y_lo} for x={x} exceeds budget {window_budget}"
                )
            if base is None:
                base = small_primes(math.isqrt(hi // 2) + 1)
            ys = sieve_window(y_lo, y_hi, base)
            pis = oracle.pi(y_lo - 1) + np.arange(1, ys.size + 1, dtype=np.int64)
        if ys.size == 0:
            continue
        counts[x] = int(ys.size)
        cols_x.append(np.full(ys.size, x, dtype=np.int64))
        cols_y.append(ys.astype(np.int64))
        cols_px.append(np.full(ys.size, rank, dtype=np.int64))
        cols_py.append(np.asarray(pis, dtype=np.int64))

    def cat(parts):
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)

    return Ensemble(j, p_j, p_j1, cat(cols_x), cat(cols_y), cat(cols_px), cat(cols_py), counts)


def membership(n: int, j: int, oracle: PiOracle) -> tuple[int, int] | None:
    """The prime pair (x, y) with x*y = n if n is a semiprime in F(j)."""
    n, j = int(n), int(j)
    if n < 4:
        return None
    if oracle.pi(math.isqrt(n)) != j:
        return None
    root = math.isqrt(n)
    table = oracle.table
    if root > table.limit:
        raise CapacityExceededError(f"trial division of {n} needs primes up to {root}")
    for p in table.primes(2, root + 1):
        p = int(p)
        if n % p == 0:
            q = n // p
            return (p, q) if oracle.is_prime(q) else None
    return None


def cardinality_estimate(j: int, oracle: PiOracle) -> CardinalityEstimate:
    """Asymptotic size of F(j) with N = p_j**2.

    ``estimate`` is sqrt(N) * (log log sqrt(N) + 1); ``prime_sum`` is the
    companion sum of sqrt(N)/p over primes p <= sqrt(N).
    """
    if j < 2:
        raise InvalidArgumentError("cardinality estimate needs j >= 2")
    root = oracle.nth_prime(j)
    estimate = root * (math.log(math.log(root)) + 1.0)
    ps = oracle.table.primes(2, root + 1).astype(float)
    return CardinalityEstimate(estimate, float(np.sum(root / ps)), root)


def coprime_statistics(e: Ensemble) -> list[tuple[int, int, float]]:
    """Per distinct x: (x, observed cofactor count, predicted sqrt(N)/x)."""
    if e.size == 0:
        raise InvalidArgumentError("statistics of an empty ensemble")
    root = e.p_j
    return [(x, c, root / x) for x, c in e.per_x_counts.items()]
