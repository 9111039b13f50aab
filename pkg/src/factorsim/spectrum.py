"""Arithmetic spectrum of F(j) and the quantum condition of the simulator.

Every pair (x, y) of the ensemble carries the energy E = pi(x) pi(y) / j**2
and the canonical pair

    p = (pi(y) - pi(x)) / 2j,    q = (pi(y) + pi(x)) / 2j,

so that q**2 - p**2 = E exactly.  The radial problem lives on rho = q**2 in
[E, rho_m]; its solution is

    R_E(rho) = rho**(-1/4) Re{ exp(-i rho/2) [U(a, 3/2, i rho) + D0 M(a, 3/2, i rho)] }

with a = 3/4 - iE/4 and D0 = -U(a, 3/2, iE) / M(a, 3/2, iE) fixing R_E(E) = 0.
The second boundary R_E(rho_m) = 0 becomes the ratio condition evaluated by
``quantum_condition``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .ensemble import Ensemble
from .errors import (
    DomainError,
    EmptyEnsembleError,
    InvalidArgumentError,
    NoSolutionError,
    PairNotInEnsembleError,
)
from .primes import PiOracle
from .specfun import DEFAULT_PARAMS, HypergeomParams, alpha, kummer_m, tricomi_u

B_PARAM = 1.5
E_LO = 1e-3
RE_TOLERANCE = 1e-4
ROOT_CSV_HEADER = ("E_root", "re_ratio", "im_ratio", "residual_at_rho_m")


@dataclass(frozen=True)
class SpectralContext:
    N: int
    j: int
    gamma: float
    x_m: int
    q_m: float
    rho_m: float
    e_max: float

    @property
    def sqrt_n(self) -> float:
        return math.sqrt(self.N)


@dataclass(frozen=True)
class EnergyValue:
    numerator: int
    denominator: int
    real_value: float

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)


def _index_of(n: int, oracle: PiOracle) -> int:
    return oracle.pi(math.isqrt(n))


def energy(x: int, y: int, j: int, oracle: PiOracle) -> EnergyValue:
    """E = pi(x) pi(y) / j**2 for a pair of F(j)."""
    x, y = sorted((int(x), int(y)))
    j = int(j)
    if j < 1 or x < 2 or not (oracle.is_prime(x) and oracle.is_prime(y)):
        raise PairNotInEnsembleError(f"({x}, {y}) is not a prime pair")
    if _index_of(x * y, oracle) != j:
        raise PairNotInEnsembleError(f"{x}*{y} lies outside the window of j={j}")
    num = oracle.pi(x) * oracle.pi(y)
    den = j * j
    return EnergyValue(num, den, num / den)


def canonical_pq(x: int, y: int, j: int, oracle: PiOracle) -> tuple[Fraction, Fraction]:
    px, py = oracle.pi(int(x)), oracle.pi(int(y))
    return Fraction(py - px, 2 * j), Fraction(py + px, 2 * j)


def build_context(N: int, ensemble: Ensemble | None, oracle: PiOracle) -> SpectralContext:
    """Boundary data for N, taking x_m as the smallest factor present in F(j).

    With ``ensemble=None`` (too large to enumerate) x_m is taken as 2.
    """
    N = int(N)
    j = _index_of(N, oracle)
    if ensemble is None:
        x_m = 2
    else:
        if j != ensemble.j:
            raise InvalidArgumentError(f"N={N} belongs to j={j}, ensemble is j={ensemble.j}")
        if ensemble.size == 0:
            raise EmptyEnsembleError(f"F({j}) is empty")
        x_m = int(ensemble.x[0])
    q_m = (oracle.pi(N // x_m) + oracle.pi(x_m)) / (2 * j)
    if x_m <= 3:
        e_max = 2 * oracle.pi(N // 3) / (j * j)
    else:
        e_max = oracle.pi(x_m) * oracle.pi(N // x_m) / (j * j)
    return SpectralContext(N, j, j / math.sqrt(N), x_m, q_m, q_m * q_m, e_max)


def u_regular(N: int, x: float, ctx: SpectralContext) -> float:
    """gamma * log(sqrt(N) / x), the smooth part of sqrt(E - 1)."""
    root = math.sqrt(N)
    if not 0 < x <= root:
        raise DomainError(f"x={x} outside (0, sqrt(N)]")
    return ctx.gamma * math.log(root / x)


def _d0(E: float, p: HypergeomParams) -> complex:
    a = alpha(E)
    return -tricomi_u(a, B_PARAM, 1j * E, p) / kummer_m(a, B_PARAM, 1j * E, p)


def wavefunction(E: float, rho: float, ctx: SpectralContext, params: HypergeomParams = DEFAULT_PARAMS) -> float:
    if not 0 < rho <= ctx.rho_m:
        raise DomainError(f"rho={rho} outside (0, rho_m]")
    a = alpha(E)
    z = 1j * rho
    inner = tricomi_u(a, B_PARAM, z, params) + _d0(E, params) * kummer_m(a, B_PARAM, z, params)
    return rho**-0.25 * (np.exp(-0.5j * rho) * inner).real


def quantum_condition(E: float, ctx: SpectralContext, params: HypergeomParams = DEFAULT_PARAMS) -> complex:
    """M(i rho_m) U(iE) / (M(iE) U(i rho_m)); equals 1 at an eigenvalue."""
    if E <= 0:
        raise DomainError("quantum condition needs E > 0")
    a = alpha(E)
    zm, ze = 1j * ctx.rho_m, 1j * E
    num = kummer_m(a, B_PARAM, zm, params) * tricomi_u(a, B_PARAM, ze, params)
    den = kummer_m(a, B_PARAM, ze, params) * tricomi_u(a, B_PARAM, zm, params)
    return num / den


def quantum_condition_reciprocal(E: float, ctx: SpectralContext, params: HypergeomParams = DEFAULT_PARAMS) -> complex:
    """The inverted ratio, evaluated independently of ``quantum_condition``."""
    if E <= 0:
        raise DomainError("quantum condition needs E > 0")
    a = alpha(E)
    zm, ze = 1j * ctx.rho_m, 1j * E
    num = kummer_m(a, B_PARAM, ze, params) * tricomi_u(a, B_PARAM, zm, params)
    den = kummer_m(a, B_PARAM, zm, params) * tricomi_u(a, B_PARAM, ze, params)
    return num / den


@dataclass(frozen=True)
class RootRecord:
    E_root: float
    re_ratio: float
    im_ratio: float
    residual_at_rho_m: float


def _bisect(f, lo: float, hi: float, flo: float, tol: float) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def scan_roots(
    ctx: SpectralContext,
    params: HypergeomParams = DEFAULT_PARAMS,
    grid: int = 1000,
    tol: float = 1e-10,
    e_lo: float = E_LO,
    re_tol: float = RE_TOLERANCE,
    keep_spurious: bool = False,
) -> list[RootRecord]:
    """Sign changes of Im(ratio) on a uniform grid, refined by bisection.

    Roots whose real part misses 1 by more than ``re_tol`` (relative) are
    the spurious Im = 0 crossings and are dropped unless ``keep_spurious``.
    """
    if grid < 2:
        raise InvalidArgumentError("grid needs at least two points")
    if ctx.e_max <= e_lo:
        return []

    def im(E):
        return quantum_condition(E, ctx, params).imag

    es = np.linspace(e_lo, ctx.e_max, grid)
    vals = np.array([im(E) for E in es])
    out = []
    for k in range(grid - 1):
        if vals[k] == 0:
            root = float(es[k])
        elif vals[k] * vals[k + 1] < 0:
            root = _bisect(im, float(es[k]), float(es[k + 1]), vals[k], tol)
        else:
            continue
        r = quantum_condition(root, ctx, params)
        if not keep_spurious and abs(r.real - 1.0) > re_tol:
            continue
        res = wavefunction(root, ctx.rho_m, ctx, params)
        out.append(RootRecord(root, r.real, r.imag, float(res)))
    return out


def scan_eigenvalues(
    ctx: SpectralContext,
    params: HypergeomParams = DEFAULT_PARAMS,
    grid: int = 1000,
    tol: float = 1e-10,
    e_lo: float = E_LO,
    re_tol: float = RE_TOLERANCE,
) -> list[float]:
    return [r.E_root for r in scan_roots(ctx, params, grid, tol, e_lo, re_tol)]


def roots_to_csv(records: list[RootRecord], fh=None) -> str | None:
    sink = io.StringIO() if fh is None else fh
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(ROOT_CSV_HEADER)
    for r in records:
        writer.writerow([repr(r.E_root), repr(r.re_ratio), repr(r.im_ratio), repr(r.residual_at_rho_m)])
    return sink.getvalue() if fh is None else None


def _delta0_raw(E: float, p: HypergeomParams) -> float:
    # tan(delta0) = exp(3 pi E / 8) Re D0, kept in log form
    d = _d0(E, p).real
    if d == 0:
        return 0.0
    mag = math.log(abs(d)) + 3 * math.pi * E / 8
    sign = math.copysign(1.0, d)
    if mag > 40:
        return sign * (0.5 * math.pi - math.exp(-mag))
    return math.atan(sign * math.exp(mag))


def phase_delta0(E, params: HypergeomParams = DEFAULT_PARAMS):
    """delta0(E); for an array of energies the branch is unwrapped along
    increasing E starting from the smallest one."""
    arr = np.atleast_1d(np.asarray(E, dtype=float))
    if np.any(arr <= 0):
        raise DomainError("phase needs E > 0")
    if np.ndim(E) == 0:
        return _delta0_raw(float(arr[0]), params)
    order = np.argsort(arr, kind="stable")
    raw = np.array([_delta0_raw(float(e), params) for e in arr[order]])
    out = np.empty_like(raw)
    out[order] = np.unwrap(raw, period=math.pi)
    return out


def invert_energy(E: EnergyValue, N: int, oracle: PiOracle) -> tuple[int, int]:
    """Recover (x, N/x) from the exact numerator pi(x) pi(N/x).

    Only primes x whose rank pi(x) divides the numerator need a pi(N/x)
    lookup; among the matching candidates the one dividing N is returned.
    """
    N = int(N)
    target = int(E.numerator)
    root = math.isqrt(N)
    if target < 1 or N < 4:
        raise NoSolutionError(f"no pair for numerator {target}")
    xs = oracle.table.primes(2, root + 1) if root <= oracle.table.limit else None
    if xs is None:
        raise InvalidArgumentError(f"sqrt(N)={root} beyond the oracle's sieve")
    for rank, x in enumerate(xs.tolist(), start=1):
        if target % rank:
            continue
        if oracle.pi(N // x) == target // rank and N % x == 0:
            return x, N // x
    raise NoSolutionError(f"N={N} has no factor pair with pi(x)pi(N/x)={target}")
