"""Complex special functions behind the quantum condition.

Kummer's M(a, b, z) (written F in the physics literature), Tricomi's
U(a, b, z), log-Gamma and the Coulomb phase arg Gamma(3/4 - iE/4).

M is evaluated three ways depending on |z|:

* Maclaurin series near the origin,
* Taylor-series continuation of Kummer's equation
  ``z w'' + (b - z) w' - a w = 0`` along the ray to z (no cancellation on
  the imaginary axis, unlike the plain series at |z| ~ 30),
* the two-exponential asymptotic expansion beyond ``asymptotic_switch_radius``.

U uses its connection formula through two M's at moderate |z| and its own
asymptotic series beyond the switch radius.  When the connection formula
cancels badly (large |Im a|) and Re z >= 0, U is instead carried inward from
the asymptotic region with the same Taylor stepping; for Re z < 0 it goes
through the reflection U(b-a, b, -z), which lands in the right half-plane.
Everything that can grow like exp(pi |Im a| / 2) is combined in log form
before exponentiating.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import AccuracyError, BranchError, InvalidArgumentError, PoleError

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


@dataclass(frozen=True)
class HypergeomParams:
    a: complex = 0.75
    b: complex = 1.5
    series_tolerance: float = 1e-16
    series_max_terms: int = 4000
    asymptotic_switch_radius: float = 30.0

    def __post_init__(self):
        if self.series_tolerance <= 0:
            raise InvalidArgumentError("series_tolerance must be positive")
        if self.asymptotic_switch_radius <= 0:
            raise InvalidArgumentError("asymptotic_switch_radius must be positive")


DEFAULT_PARAMS = HypergeomParams()


def _is_nonpositive_int(z: complex) -> bool:
    z = complex(z)
    return z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real)


def log_gamma(z: complex) -> complex:
    """log Gamma(z) on the branch continuous off the negative real axis.

    Lanczos (g=7, 9 terms) for Re z >= 7; smaller real parts are shifted up
    with log Gamma(z) = log Gamma(z + m) - sum log(z + k), which keeps the
    same branch as the standard ``loggamma``.
    """
    z = complex(z)
    if _is_nonpositive_int(z):
        raise PoleError(f"Gamma has a pole at {z.real:g}")
    shift = 0j
    while z.real < 7.0:
        shift += cmath.log(z)
        z += 1.0
    zm = z - 1.0
    acc = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        acc += _LANCZOS[i] / (zm + i)
    t = zm + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (zm + 0.5) * cmath.log(t) - t + cmath.log(acc) - shift


def _rgamma_log(z: complex) -> complex | None:
    """-log Gamma(z), or None where 1/Gamma vanishes."""
    if _is_nonpositive_int(z):
        return None
    return -log_gamma(z)


def coulomb_phase(E: float) -> float:
    """delta_C = arg Gamma(3/4 - iE/4), continuous in E."""
    return log_gamma(complex(0.75, -0.25 * float(E))).imag


# --- Kummer M ---------------------------------------------------------------

_DIRECT_RADIUS = 4.0


def _maclaurin(a: complex, b: complex, z: complex, p: HypergeomParams) -> tuple[complex, complex]:
    """M and dM/dz from the defining series."""
    term = 1 + 0j
    total = 1 + 0j
    deriv = 0j
    for n in range(p.series_max_terms):
        # term = (a)_n / (b)_n z^n / n!; derivative picks up n / z
        nxt = term * (a + n) / (b + n) * z / (n + 1)
        deriv += nxt * (n + 1)
        total += nxt
        term = nxt
        if abs(nxt) <= p.series_tolerance * abs(total) and n > abs(a * z):
            return total, (deriv / z if z != 0 else a / b)
        if term == 0:
            return total, (deriv / z if z != 0 else a / b)
    raise AccuracyError("Kummer series did not converge")


def _continue(
    a: complex, b: complex, z0: complex, w: complex, dw: complex, z1: complex, p: HypergeomParams
) -> tuple[complex, complex]:
    """Carry (w, w') of Kummer's equation from z0 to z1 by Taylor steps."""
    z = z0
    while z != z1:
        gap = z1 - z
        step = min(abs(gap), 0.5 * abs(z), 2.0)
        h = gap if step >= abs(gap) else gap / abs(gap) * step
        c0, c1 = w, dw
        val = c0 + c1 * h
        der = c1
        hp = h  # h**(n+1) while computing c_{n+2}
        n = 0
        while True:
            c2 = ((n + a) * c0 - (n + 1) * (n + b - z) * c1) / (z * (n + 1) * (n + 2))
            der += (n + 2) * c2 * hp
            hp *= h
            add = c2 * hp
            val += add
            if abs(add) <= p.series_tolerance * abs(val) and abs(c1 * hp) <= p.series_tolerance * (
                abs(val) + abs(der)
            ):
                break
            c0, c1 = c1, c2
            n += 1
            if n > p.series_max_terms:
                raise AccuracyError("Taylor continuation did not converge")
        w, dw = val, der
        z = z + h if step < abs(gap) else z1
    return w, dw


def _asymptotic_sum(x: complex, y: complex, inv: complex, tol: float, max_terms: int):
    """sum_s (x)_s (y)_s / s! * inv**s, stopped at tolerance or smallest term.

    Returns (sum, last_term_magnitude_relative).
    """
    term = 1 + 0j
    total = 1 + 0j
    prev = math.inf
    for s in range(max_terms):
        term = term * (x + s) * (y + s) / (s + 1) * inv
        mag = abs(term)
        if mag > prev:
            return total, prev / max(abs(total), 1e-300)
        total += term
        prev = mag
        if mag <= tol * abs(total):
            return total, mag / abs(total)
    return total, prev / max(abs(total), 1e-300)


# the asymptotic branch is only used when its smallest term is below this
_ASYMPTOTIC_ACCEPT = 1e-13


def _kummer_asymptotic(a: complex, b: complex, z: complex, p: HypergeomParams):
    """Large-|z| expansion of M (both exponential branches)."""
    logz = cmath.log(z)
    sign = 1.0 if z.imag >= 0 else -1.0
    lgb = log_gamma(b)
    s1, e1 = _asymptotic_sum(1 - a, b - a, 1 / z, p.series_tolerance, p.series_max_terms)
    s2, e2 = _asymptotic_sum(a, a - b + 1, -1 / z, p.series_tolerance, p.series_max_terms)
    total = 0j
    ra = _rgamma_log(a)
    if ra is not None:
        total += cmath.exp(lgb + ra + z + (a - b) * logz) * s1
    rba = _rgamma_log(b - a)
    if rba is not None:
        total += cmath.exp(lgb + rba + sign * 1j * math.pi * a - a * logz) * s2
    return total, max(e1 if ra is not None else 0.0, e2 if rba is not None else 0.0)


def _check_b(b: complex) -> None:
    if _is_nonpositive_int(b):
        raise PoleError("Kummer M undefined for b a nonpositive integer")


def kummer_m(a: complex, b: complex, z: complex, p: HypergeomParams = DEFAULT_PARAMS) -> complex:
    """Kummer's confluent hypergeometric function M(a, b, z)."""
    return _kummer_with_derivative(complex(a), complex(b), complex(z), p)[0]


def kummer_m_prime(a: complex, b: complex, z: complex, p: HypergeomParams = DEFAULT_PARAMS) -> complex:
    """dM/dz, equal to (a/b) M(a+1, b+1, z)."""
    return _kummer_with_derivative(complex(a), complex(b), complex(z), p)[1]


def _kummer_with_derivative(a: complex, b: complex, z: complex, p: HypergeomParams):
    _check_b(b)
    if z == 0:
        return 1 + 0j, a / b
    r = abs(z)
    if r >= p.asymptotic_switch_radius:
        val, err = _kummer_asymptotic(a, b, z, p)
        if err <= _ASYMPTOTIC_ACCEPT:
            dval, derr = _kummer_asymptotic(a + 1, b + 1, z, p)
            return val, a / b * dval
    start = min(_DIRECT_RADIUS, _DIRECT_RADIUS / max(1.0, math.sqrt(abs(a))))
    if r <= start:
        return _maclaurin(a, b, z, p)
    z0 = z / r * start
    w, dw = _maclaurin(a, b, z0, p)
    return _continue(a, b, z0, w, dw, z, p)


# --- Tricomi U --------------------------------------------------------------


def _check_u_args(b: complex, z: complex) -> None:
    if complex(b).imag == 0 and complex(b).real == math.floor(complex(b).real):
        raise InvalidArgumentError("integer b needs the logarithmic limit case, which is not supported")
    if z == 0:
        raise InvalidArgumentError("U is singular at z = 0")
    if z.imag == 0 and z.real < 0:
        raise BranchError("z on the negative real axis: choose a side of the branch cut")


def _tricomi_asymptotic(a: complex, b: complex, z: complex, p: HypergeomParams):
    s, err = _asymptotic_sum(a, a - b + 1, -1 / z, p.series_tolerance, p.series_max_terms)
    return cmath.exp(-a * cmath.log(z)) * s, err


def _tricomi_connection(a: complex, b: complex, z: complex, p: HypergeomParams):
    """U from two M's; also returns the cancellation factor of the sum."""
    t1 = t2 = 0j
    r1 = _rgamma_log(a - b + 1)
    if r1 is not None:
        t1 = cmath.exp(log_gamma(1 - b) + r1) * kummer_m(a, b, z, p)
    r2 = _rgamma_log(a)
    if r2 is not None:
        t2 = cmath.exp(log_gamma(b - 1) + r2 + (1 - b) * cmath.log(z)) * kummer_m(
            a - b + 1, 2 - b, z, p
        )
    total = t1 + t2
    return total, (abs(t1) + abs(t2)) / max(abs(total), 1e-300)


# connection results losing more digits than this are recomputed
_MAX_CANCELLATION = 1e4
_FAR_LIMIT = 1e8


def _tricomi_inward(a: complex, b: complex, z: complex, p: HypergeomParams) -> complex:
    """U carried inward along the ray from where its asymptotic series holds."""
    r = max(abs(z), p.asymptotic_switch_radius)
    while True:
        far = z / abs(z) * r
        val, err = _tricomi_asymptotic(a, b, far, p)
        dval, derr = _tricomi_asymptotic(a + 1, b + 1, far, p)
        if max(err, derr) <= _ASYMPTOTIC_ACCEPT:
            break
        r *= 2
        if r > _FAR_LIMIT:
            raise AccuracyError(f"no asymptotic region for U({a}, {b}, .) along this ray")
    if far == z:
        return val
    return _continue(a, b, far, val, -a * dval, z, p)[0]


def _tricomi_reflected(a: complex, b: complex, z: complex, p: HypergeomParams):
    """U for Re z < 0 through M(a, b, z) and U(b-a, b, -z).

    U(a,b,z) = e^{s pi i a} Gamma(b-a) [M(a,b,z)/Gamma(b)
               - e^{s pi i (b-a)} e^z U(b-a, b, -z) / Gamma(a)],
    with s = +1 below the real axis and -1 above, so -z = e^{s pi i} z stays
    on the principal sheet.  In the left half-plane the M term dominates,
    so this does not cancel the way the two-M formula does.
    """
    if _is_nonpositive_int(b - a):
        return None
    s = 1.0 if z.imag <= 0 else -1.0
    pre = s * 1j * math.pi * a + log_gamma(b - a)
    t1 = cmath.exp(pre - log_gamma(b)) * kummer_m(a, b, z, p)
    t2 = 0j
    ra = _rgamma_log(a)
    if ra is not None:
        t2 = cmath.exp(pre + s * 1j * math.pi * (b - a) + ra + z) * tricomi_u(b - a, b, -z, p)
    total = t1 - t2
    return total, (abs(t1) + abs(t2)) / max(abs(total), 1e-300)


# relative rounding level used to turn a cancellation factor into an error estimate
_ROUNDING = 1e-15


def tricomi_u(a: complex, b: complex, z: complex, p: HypergeomParams = DEFAULT_PARAMS) -> complex:
    """Tricomi's U(a, b, z), principal branches of z**(1-b) and z**(-a)."""
    a, b, z = complex(a), complex(b), complex(z)
    _check_u_args(b, z)
    candidates = []
    if abs(z) >= p.asymptotic_switch_radius:
        val, err = _tricomi_asymptotic(a, b, z, p)
        if err <= _ASYMPTOTIC_ACCEPT:
            return val
        candidates.append((err, val))
    val, cancel = _tricomi_connection(a, b, z, p)
    if cancel <= _MAX_CANCELLATION:
        return val
    if z.real >= 0:
        return _tricomi_inward(a, b, z, p)
    candidates.append((cancel * _ROUNDING, val))
    refl = _tricomi_reflected(a, b, z, p)
    if refl is not None:
        candidates.append((refl[1] * _ROUNDING, refl[0]))
    return min(candidates, key=lambda c: c[0])[1]


def tricomi_u_prime(a: complex, b: complex, z: complex, p: HypergeomParams = DEFAULT_PARAMS) -> complex:
    """dU/dz = -a U(a+1, b+1, z)."""
    return -complex(a) * tricomi_u(complex(a) + 1, complex(b) + 1, z, p)


def tricomi_u_series_path(a, b, z, p: HypergeomParams = DEFAULT_PARAMS) -> complex:
    """U through the connection formula regardless of |z| (cross-checks)."""
    a, b, z = complex(a), complex(b), complex(z)
    _check_u_args(b, z)
    return _tricomi_connection(a, b, z, p)[0]


def tricomi_u_asymptotic_path(a, b, z, p: HypergeomParams = DEFAULT_PARAMS) -> complex:
    """U through its asymptotic series regardless of |z| (cross-checks)."""
    a, b, z = complex(a), complex(b), complex(z)
    _check_u_args(b, z)
    return _tricomi_asymptotic(a, b, z, p)[0]


def kummer_m_series_path(a, b, z, p: HypergeomParams = DEFAULT_PARAMS) -> complex:
    """M by series plus continuation regardless of |z| (cross-checks)."""
    a, b, z = complex(a), complex(b), complex(z)
    _check_b(b)
    big = HypergeomParams(a, b, p.series_tolerance, p.series_max_terms, math.inf)
    return _kummer_with_derivative(a, b, z, big)[0]


def kummer_m_asymptotic_path(a, b, z, p: HypergeomParams = DEFAULT_PARAMS) -> complex:
    a, b, z = complex(a), complex(b), complex(z)
    _check_b(b)
    return _kummer_asymptotic(a, b, z, p)[0]


def alpha(E: float) -> complex:
    """First Kummer parameter of the simulator, 3/4 - iE/4."""
    return complex(0.75, -0.25 * float(E))
