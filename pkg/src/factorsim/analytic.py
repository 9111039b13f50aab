"""Analytic number theory support: li, zeta on the real axis, Riemann R,
the zeta-zero fluctuation sum and the E decomposition residual."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.special import expi

from .errors import AccuracyError, DomainError, InvalidArgumentError, MonotonicityError, ParseError

EULER_GAMMA = 0.5772156649015329

# Bernoulli numbers B_2, B_4, ..., B_20
_BERNOULLI = (
    1 / 6,
    -1 / 30,
    1 / 42,
    -1 / 30,
    5 / 66,
    -691 / 2730,
    7 / 6,
    -3617 / 510,
    43867 / 798,
    -174611 / 330,
)


def zeta_real(s: float, n: int = 12) -> float:
    """Riemann zeta for real s > 1 by Euler-Maclaurin summation.

    Direct terms up to n - 1, then the integral, half-term and ten Bernoulli
    corrections at n.  Relative error is below 1e-15 for s >= 1.5.
    """
    if s <= 1:
        raise DomainError(f"zeta_real needs s > 1, got {s}")
    if s > 60:
        # 2**-60 is already below double resolution against 1
        return 1.0 + 2.0**-s + 3.0**-s
    total = math.fsum(k**-s for k in range(1, n))
    total += n ** (1 - s) / (s - 1) + 0.5 * n**-s
    rising = s  # s (s+1) ... (s+2m-2)
    fact = 2.0  # (2m)!
    for m, b in enumerate(_BERNOULLI, start=1):
        total += b / fact * rising * n ** (-s - 2 * m + 1)
        rising *= (s + 2 * m - 1) * (s + 2 * m)
        fact *= (2 * m + 1) * (2 * m + 2)
    return total


@dataclass
class GramSeriesParams:
    max_terms: int = 500
    tolerance: float = 1e-16
    zeta_values: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.zeta_values is None:
            # zeta_values[n] = zeta(n + 1); index 0 unused
            self.zeta_values = np.array(
                [np.inf] + [zeta_real(n + 1) for n in range(1, self.max_terms + 1)]
            )


_DEFAULT_GRAM: GramSeriesParams | None = None


def _gram_params(params: GramSeriesParams | None) -> GramSeriesParams:
    global _DEFAULT_GRAM
    if params is not None:
        return params
    if _DEFAULT_GRAM is None:
        _DEFAULT_GRAM = GramSeriesParams()
    return _DEFAULT_GRAM


def li(x):
    """Logarithmic integral (principal value from 0), for x > 1."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 1):
        raise DomainError("li is defined here for x > 1 only")
    out = expi(np.log(arr))
    return float(out) if np.ndim(out) == 0 else out


def gram_series(w, params: GramSeriesParams | None = None):
    """R(e**w) = 1 + sum_n w**n / (n * n! * zeta(n+1)).

    Accepts real or complex scalars/arrays.  Terms are summed until the last
    one drops below ``tolerance`` times the running total.
    """
    p = _gram_params(params)
    w = np.asarray(w)
    total = np.ones(w.shape, dtype=w.dtype if np.iscomplexobj(w) else float)
    power = np.ones_like(total)  # w**n / n!
    for n in range(1, p.max_terms + 1):
        power = power * w / n
        term = power / (n * p.zeta_values[n])
        total = total + term
        if np.all(np.abs(term) <= p.tolerance * np.maximum(np.abs(total), 1e-300)) and n > np.max(
            np.abs(w), initial=0.0
        ):
            return total[()] if total.ndim == 0 else total
    raise AccuracyError(f"Gram series did not converge in {p.max_terms} terms")


def riemann_r(x, params: GramSeriesParams | None = None):
    """Riemann's R function.

    Real x > 1 uses the Gram series in ln x.  Complex x uses its principal
    logarithm; for points given as exp(w) off the principal strip (such as
    x**rho on the explicit-formula path) call ``riemann_r_exp`` with w.
    """
    if np.iscomplexobj(x):
        return riemann_r_exp(np.log(np.asarray(x, dtype=complex)), params)
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 1):
        raise DomainError("riemann_r real branch needs x > 1")
    out = gram_series(np.log(arr), params)
    return float(out) if np.ndim(out) == 0 else out


# --- R(e**w) for complex w with large |w| ---------------------------------
#
# The Gram series cancels catastrophically once |w| is large, so we use
# R(e**w) = sum_n mu(n)/n Ei(w/n).  Terms with |w/n| >= HEAD_RATIO are summed
# directly; the remainder n > K expands Ei(v) = gamma + log v + sum v**k/(k k!)
# and uses the exact sums sum mu(n)/n = 0 and sum mu(n) log(n)/n = -1.

GRAM_RADIUS = 4.0
HEAD_RATIO = 8.0
_TAIL_POWERS = 60
_TAIL_SPAN = 256
_ASYMPTOTIC_EI = 32.0


class _MobiusTails:
    """Cumulative Moebius sums needed by the remainder expansion."""

    def __init__(self):
        self.kmax = 0

    def ensure(self, kmax: int) -> None:
        if kmax <= self.kmax:
            return
        kmax = max(kmax, 2 * self.kmax, 256)
        nmax = _TAIL_SPAN * kmax
        mu = _mobius(nmax)
        n = np.arange(nmax + 1, dtype=float)
        n[0] = 1.0
        w = mu / n
        w[0] = 0.0
        # prefix sums up to K for mu/n and mu log n / n
        self.m = np.cumsum(w)[: kmax + 1]
        self.l = np.cumsum(w * np.log(n))[: kmax + 1]
        # tail[k, K] = sum_{n > K} mu(n) / n**(k+1)
        tail = np.zeros((_TAIL_POWERS + 1, kmax + 1))
        logn = np.log(n)
        for k in range(1, _TAIL_POWERS + 1):
            terms = w * np.exp(-k * logn)
            if k <= 2:
                tail[k] = 1.0 / zeta_real(k + 1) - np.cumsum(terms)[: kmax + 1]
            else:
                rev = np.cumsum(terms[::-1])[::-1]  # rev[K] = sum_{n >= K}
                tail[k] = rev[1 : kmax + 2]
        self.tail = tail
        self.kmax = kmax


def _mobius(n: int) -> np.ndarray:
    mu = np.ones(n + 1, dtype=np.int8)
    mu[0] = 0
    composite = np.zeros(n + 1, dtype=bool)
    for p in range(2, n + 1):
        if composite[p]:
            continue
        composite[2 * p :: p] = True
        mu[p::p] *= -1
        if p * p <= n:
            mu[p * p :: p * p] = 0
    return mu


_TAILS = _MobiusTails()


def _ei(v: np.ndarray) -> np.ndarray:
    """Exponential integral of complex v, asymptotic series for large |v|."""
    out = np.empty(v.shape, dtype=complex)
    big = np.abs(v) >= _ASYMPTOTIC_EI
    if big.any():
        vb = v[big]
        inv = 1.0 / vb
        term = np.ones_like(vb)
        acc = np.ones_like(vb)
        for k in range(1, 30):
            term = term * k * inv
            acc += term
        out[big] = np.exp(vb) * inv * acc + 1j * math.pi * np.sign(vb.imag)
    if (~big).any():
        out[~big] = expi(v[~big])
    return out


def riemann_r_exp(w, params: GramSeriesParams | None = None):
    """R(e**w) continued analytically in w (no branch reduction of w)."""
    w = np.asarray(w, dtype=complex)
    flat = w.ravel()
    out = np.empty(flat.shape, dtype=complex)
    small = np.abs(flat) <= GRAM_RADIUS
    if small.any():
        out[small] = gram_series(flat[small], params)
    idx = np.flatnonzero(~small)
    if idx.size:
        ks = np.maximum(1, (np.abs(flat[idx]) / HEAD_RATIO).astype(np.int64))
        _TAILS.ensure(int(ks.max()))
        mu = _mobius_cached(int(ks.max()))
        for i, k in zip(idx, ks):
            out[i] = _r_large(flat[i], int(k), mu)
    return out.reshape(w.shape)[()] if w.ndim == 0 else out.reshape(w.shape)


_MU_CACHE: np.ndarray = np.zeros(1, dtype=np.int8)


def _mobius_cached(n: int) -> np.ndarray:
    global _MU_CACHE
    if _MU_CACHE.size <= n:
        _MU_CACHE = _mobius(max(n, 2 * _MU_CACHE.size))
    return _MU_CACHE


def _r_large(w: complex, k: int, mu: np.ndarray) -> complex:
    n = np.flatnonzero(mu[1 : k + 1]) + 1
    head = np.sum(mu[n] / n * _ei(w / n))
    t = _TAILS
    rem = -(EULER_GAMMA + np.log(w)) * t.m[k] + 1.0 + t.l[k]
    power = 1.0 + 0j
    for p in range(1, _TAIL_POWERS + 1):
        power *= w / p
        term = power / p * t.tail[p, k]
        rem += term
        if abs(term) < 1e-17 * (1.0 + abs(rem)) and p > HEAD_RATIO:
            break
    return complex(head + rem)


# --- zeros and the fluctuation term --------------------------------------


@dataclass(frozen=True)
class ZetaZeros:
    imaginary_parts: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.imaginary_parts, dtype=float)
        if arr.size and (np.any(arr <= 0) or np.any(np.diff(arr) <= 0)):
            raise MonotonicityError("zero ordinates must be positive and strictly increasing")
        object.__setattr__(self, "imaginary_parts", arr)

    def __len__(self) -> int:
        return int(self.imaginary_parts.size)

    def first(self, m: int) -> "ZetaZeros":
        return ZetaZeros(self.imaginary_parts[:m])


def load_zeros(path: str | Path) -> ZetaZeros:
    values = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text:
                continue
            try:
                v = float(text)
            except ValueError:
                raise ParseError(f"{path}:{lineno}: not a number: {text!r}") from None
            if not v > 0 or not math.isfinite(v):
                raise ParseError(f"{path}:{lineno}: ordinate must be positive, got {text!r}")
            if values and v <= values[-1]:
                raise MonotonicityError(f"{path}:{lineno}: ordinates not increasing")
            values.append(v)
    return ZetaZeros(np.array(values, dtype=float))


DEFAULT_ZERO_COUNT = 30


def default_zeros(m: int = DEFAULT_ZERO_COUNT) -> ZetaZeros:
    """First m ordinates from the bundled table (100 available)."""
    ref = resources.files("factorsim") / "data" / "zeta_zeros.txt"
    with resources.as_file(ref) as path:
        zeros = load_zeros(path)
    if m > len(zeros):
        raise InvalidArgumentError(f"bundled table holds {len(zeros)} zeros, asked for {m}")
    return zeros.first(m)


def fluctuation_f(x, zeros: ZetaZeros, params: GramSeriesParams | None = None):
    """f(x) = sum over rho of R(x**rho), conjugate pairs folded: 2 sum Re."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 1):
        raise DomainError("fluctuation_f needs x > 1")
    if len(zeros) == 0:
        out = np.zeros(arr.shape)
    else:
        rho = 0.5 + 1j * zeros.imaginary_parts
        w = np.log(arr)[..., None] * rho
        out = 2.0 * riemann_r_exp(w, params).real.sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def epsilon_fl(x, y, j: int, zeros: ZetaZeros, params: GramSeriesParams | None = None):
    """Oscillatory part of E(x, y): -(f(x)R(y) + f(y)R(x) - f(x)f(y)) / j**2."""
    fx, fy = fluctuation_f(x, zeros, params), fluctuation_f(y, zeros, params)
    rx, ry = riemann_r(x, params), riemann_r(y, params)
    return -(fx * ry + fy * rx - fx * fy) / (j * j)


def pi_explicit(x, zeros: ZetaZeros, params: GramSeriesParams | None = None):
    """Truncated explicit formula R(x) - f(x)."""
    return riemann_r(x, params) - fluctuation_f(x, zeros, params)
