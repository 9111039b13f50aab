"""Semiclassical spectrum E = C gamma**(-kappa) and the prediction pi(x|N).

kappa is the normalised eigenvalue index k/|F|.  Empirically kappa(x) is a
step function of the smaller factor x; it is approximated by the inverse of
a parabola u = alpha1 kappa - alpha2 kappa**2 through two anchor primes.
Feeding u(N, x) = gamma log(sqrt(N)/x) through that inverse gives

    pi(x|N) = gamma x (1 + u) C gamma**(-kappa(x)),

with C fixed so the formula is exact at x0.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .analytic import ZetaZeros, li, riemann_r
from .ensemble import Ensemble
from .errors import DomainError, InvalidArgumentError, SingularSystemError
from .primes import PiOracle
from .spectrum import SpectralContext, u_regular

KappaMode = Literal["empirical", "asymptotic"]
DOMAIN_FACTOR = 10.0
SERIES_CSV_HEADER = ("x", "pi_exact", "pi_sim", "R", "Li")


@dataclass(frozen=True)
class FitModel:
    alpha1: float
    alpha2: float
    p1: int
    p2: int
    c_const: float = math.nan
    x0: int = 3
    kappa_mode: KappaMode = "empirical"

    def u_of_kappa(self, kappa):
        return self.alpha1 * kappa - self.alpha2 * kappa * kappa

    @property
    def apex(self) -> float:
        return self.alpha1 / (2 * self.alpha2)


@dataclass(frozen=True)
class PredictionSeries:
    rows: list[tuple[int, int, float, float, float]]
    j: int
    N: int
    fit: FitModel | None = None
    zeros_count: int = 0
    domain_factor: float = DOMAIN_FACTOR

    def to_csv(self, fh=None) -> str | None:
        sink = io.StringIO() if fh is None else fh
        f = self.fit
        sink.write(
            f"# N={self.N} j={self.j} alpha1={f.alpha1:.12g} alpha2={f.alpha2:.12g} "
            f"C={f.c_const:.12g} zeros={self.zeros_count} p1={f.p1} p2={f.p2} x0={f.x0} "
            f"mode={f.kappa_mode} domain=sqrt(N)/{self.domain_factor:g}\n"
        )
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(SERIES_CSV_HEADER)
        for x, pe, ps, r, lv in self.rows:
            writer.writerow((x, pe, repr(ps), repr(r), repr(lv)))
        return sink.getvalue() if fh is None else None


def _step(x: int, ensemble: Ensemble) -> tuple[float, float]:
    """(top, bottom) of the kappa step belonging to smaller factor x."""
    if int(x) not in ensemble.per_x_counts:
        raise InvalidArgumentError(f"x={x} is not a smaller factor in F({ensemble.j})")
    sl = ensemble.rows_for(int(x))
    size = ensemble.size
    return 1.0 - sl.start / size, 1.0 - sl.stop / size


def kappa_empirical(x: int, ensemble: Ensemble) -> float:
    """1 - (#entries whose smaller factor precedes x) / |F|."""
    return _step(x, ensemble)[0]


def _solve(k1: float, u1: float, k2: float, u2: float) -> tuple[float, float]:
    a = np.array([[k1, -k1 * k1], [k2, -k2 * k2]])
    det = np.linalg.det(a)
    if abs(det) < 1e-14:
        raise SingularSystemError(f"anchors give kappa={k1} and kappa={k2}")
    a1, a2 = np.linalg.solve(a, [u1, u2])
    return float(a1), float(a2)


def _context_parts(ensemble: Ensemble | None, ctx: SpectralContext | None) -> tuple[float, float]:
    if ctx is not None:
        return ctx.sqrt_n, ctx.gamma
    if ensemble is None:
        raise InvalidArgumentError("need an ensemble or a context")
    return float(ensemble.p_j), ensemble.j / ensemble.p_j


def fit_u_of_kappa(
    ensemble: Ensemble | None,
    p1: int = 2,
    p2: int = 3,
    mode: KappaMode = "empirical",
    ctx: SpectralContext | None = None,
    oracle: PiOracle | None = None,
) -> FitModel:
    """Fit u = alpha1 kappa - alpha2 kappa**2 through the anchors p1 < p2.

    Empirical: p1 sits at the top of its kappa step (nothing before it
    counted) and p2 at the bottom of its step (its own entries counted),
    the two Lagrange conditions.  Asymptotic: closed forms in nu and tau
    with |F| ~ sqrt(N) log log sqrt(N); needs only ``ctx`` (or the
    ensemble's p_j) plus primes between the anchors.
    """
    p1, p2 = int(p1), int(p2)
    if not p1 < p2:
        raise InvalidArgumentError("anchors need p1 < p2")
    root, gamma = _context_parts(ensemble, ctx)
    if mode == "empirical":
        if ensemble is None:
            raise InvalidArgumentError("empirical fit needs the enumerated ensemble")
        k1 = _step(p1, ensemble)[0]
        k2 = _step(p2, ensemble)[1]
        a1, a2 = _solve(k1, gamma * math.log(root / p1), k2, gamma * math.log(root / p2))
    elif mode == "asymptotic":
        if oracle is not None:
            ps = oracle.table.primes(p1, p2 + 1)
        elif ensemble is not None:
            xs = ensemble.distinct_x()
            ps = xs[(xs >= p1) & (xs <= p2)]
        else:
            raise InvalidArgumentError("asymptotic fit needs primes between the anchors")
        size = root * math.log(math.log(root))
        nu = float(np.sum(1.0 / ps.astype(float))) * root / size
        if nu == 1.0 or nu == 0.0:
            raise SingularSystemError(f"nu={nu} makes the asymptotic system singular")
        tau = gamma / nu * (1 - nu) * math.log(p2 / p1)
        a2 = (1 - tau) / (1 - nu)
        a1 = 1 + a2 + gamma * math.log(p2 / p1)
    else:
        raise InvalidArgumentError(f"unknown kappa mode {mode!r}")
    if a2 == 0:
        raise SingularSystemError("alpha2 = 0, parabola degenerates")
    return FitModel(a1, a2, p1, p2, kappa_mode=mode)


def kappa_of_u(u, fit: FitModel):
    """Branch of the inverse parabola with kappa(0) = 0."""
    h = fit.apex
    disc = h * h - np.asarray(u, dtype=float) / fit.alpha2
    if np.any(disc < 0):
        raise DomainError("u beyond the apex of the fitted parabola")
    out = h - np.sqrt(disc)
    return float(out) if np.ndim(out) == 0 else out


def constant_c(fit: FitModel, ctx: SpectralContext, oracle: PiOracle, x0: int = 3) -> float:
    """C = pi(x0) / (x0 (1 + u(N, x0))) * gamma**(kappa(x0) - 1)."""
    u0 = u_regular(ctx.N, x0, ctx)
    if u0 <= -1:
        raise DomainError("1 + u(N, x0) must be positive")
    k0 = kappa_of_u(u0, fit)
    return oracle.pi(x0) / (x0 * (1 + u0)) * ctx.gamma ** (k0 - 1)


def calibrate(fit: FitModel, ctx: SpectralContext, oracle: PiOracle, x0: int = 3) -> FitModel:
    """Copy of ``fit`` carrying C for anchor x0."""
    return replace(fit, c_const=constant_c(fit, ctx, oracle, x0), x0=int(x0))


def _need_c(fit: FitModel) -> None:
    if math.isnan(fit.c_const):
        raise InvalidArgumentError("fit has no constant C; call calibrate first")


def semiclassical_energy(x: float, fit: FitModel, ctx: SpectralContext) -> float:
    _need_c(fit)
    k = kappa_of_u(u_regular(ctx.N, x, ctx), fit)
    return fit.c_const * ctx.gamma ** (-k)


def prediction_bound(ctx: SpectralContext, domain_factor: float = DOMAIN_FACTOR) -> float:
    return ctx.sqrt_n / domain_factor


def predict_pi(x: float, fit: FitModel, ctx: SpectralContext, domain_factor: float = DOMAIN_FACTOR) -> float:
    """pi(x|N) = gamma x (1 + u) E(x), for x up to sqrt(N)/domain_factor."""
    if not 0 < x <= prediction_bound(ctx, domain_factor):
        raise DomainError(f"x={x} outside the prediction domain (0, sqrt(N)/{domain_factor:g}]")
    u = u_regular(ctx.N, x, ctx)
    return ctx.gamma * x * (1 + u) * semiclassical_energy(x, fit, ctx)


def build_series(
    ctx: SpectralContext,
    fit: FitModel,
    ensemble: Ensemble | None,
    zeros: ZetaZeros | None,
    x_max: int,
    oracle: PiOracle,
    domain_factor: float = DOMAIN_FACTOR,
) -> PredictionSeries:
    """One row per prime x <= x_max: (x, pi(x), pi(x|N), R(x), Li(x)).

    ``ensemble`` is accepted for provenance only; ``zeros`` is recorded in
    the header (R and Li do not depend on it).
    """
    _need_c(fit)
    if x_max > prediction_bound(ctx, domain_factor):
        raise DomainError(f"x_max={x_max} beyond sqrt(N)/{domain_factor:g}")
    rows = []
    if x_max >= 2:
        for x in oracle.table.primes(2, int(x_max) + 1).tolist():
            pe = oracle.pi(x)
            rows.append((x, pe, predict_pi(x, fit, ctx, domain_factor), float(riemann_r(float(x))), float(li(float(x)))))
    m = len(zeros.imaginary_parts) if zeros is not None else 0
    return PredictionSeries(rows, ctx.j, ctx.N, fit, m, domain_factor)
