"""Command-line interface: ``factorsim <command> --j J | --N N [options]``.

Exit status: 0 on success, 1 when the command ran but found nothing
(no inversion, no roots), 2 on bad input, capacity or I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .analytic import default_zeros, load_zeros
from .ensemble import build_ensemble, cardinality_estimate, coprime_statistics
from .errors import CapacityExceededError, FactorSimError, NoSolutionError
from .primes import SUBLINEAR_THRESHOLD, PiOracle
from .semiclassical import DOMAIN_FACTOR, build_series, calibrate, fit_u_of_kappa, kappa_empirical, prediction_bound
from .spectrum import (
    EnergyValue,
    build_context,
    invert_energy,
    quantum_condition,
    roots_to_csv,
    scan_roots,
    u_regular,
    wavefunction,
)

CACHE_ENV = "FACTORSIM_CACHE_DIR"
CACHE_FILE = "pi_cache.tsv"
DEFAULT_BUDGET = 10**8
# sieve cap for the in-memory table; larger arguments go through lucy_pi
TABLE_CAP = 1 << 24

EXIT_OK, EXIT_EMPTY, EXIT_ERROR = 0, 1, 2


@dataclass
class RunConfig:
    N: int | None = None
    j: int | None = None
    zeros_path: str | None = None
    anchors: tuple[int, int] = (2, 3)
    x0: int = 3
    domain_factor: float = DOMAIN_FACTOR
    tolerances: dict = field(default_factory=dict)
    output: str | None = None
    format: str = "csv"
    mode: str | None = None
    budget: int = DEFAULT_BUDGET


def _cache_path() -> Path | None:
    d = os.environ.get(CACHE_ENV)
    return Path(d) / CACHE_FILE if d else None


def _prime_bound(j: int) -> int:
    # p_j < j (log j + log log j) for j >= 6
    if j < 6:
        return 16
    return int(j * (math.log(j) + math.log(math.log(j)))) + 2


class Problem:
    """Resolved (N, j) plus an oracle large enough for them."""

    def __init__(self, cfg: RunConfig):
        cache = _cache_path()
        if cfg.j is not None:
            j = int(cfg.j)
            if j < 1:
                raise FactorSimError("--j must be >= 1")
            small = PiOracle.for_limit(_prime_bound(j + 1))
            p_j, p_j1 = small.nth_prime(j), small.nth_prime(j + 1)
            N = cfg.N if cfg.N is not None else p_j * p_j
        else:
            N = int(cfg.N)
            if N < 4:
                raise FactorSimError("--N must be >= 4")
            # Bertrand: p_{j+1} < 2 p_j
            small = PiOracle.for_limit(2 * math.isqrt(N) + 2)
            j = small.pi(math.isqrt(N))
            p_j1 = small.nth_prime(j + 1)
        upper = p_j1 * p_j1
        self.oracle = PiOracle.for_limit(min(upper // 2 + 1, TABLE_CAP, SUBLINEAR_THRESHOLD), cache_path=cache)
        self.N, self.j = int(N), j
        if self.oracle.pi(math.isqrt(self.N)) != j:
            raise FactorSimError(f"N={self.N} does not lie in the window of j={j}")
        self.cfg = cfg
        self._ensemble = None

    def estimated_size(self) -> float:
        p = self.oracle.nth_prime(self.j)
        return p * (math.log(math.log(p)) + 1) if p > 2 else 2.0

    def ensemble(self):
        if self._ensemble is None:
            est = self.estimated_size()
            if est > self.cfg.budget:
                raise CapacityExceededError(
                    f"estimated |F({self.j})| ~ {est:.3g} exceeds budget {self.cfg.budget}; "
                    "use --mode asymptotic"
                )
            self._ensemble = build_ensemble(self.j, self.oracle)
        return self._ensemble

    def context(self):
        return build_context(self.N, self.ensemble(), self.oracle)

    def mode(self) -> str:
        if self.cfg.mode:
            return self.cfg.mode
        return "empirical" if self.estimated_size() <= self.cfg.budget else "asymptotic"

    def fit(self):
        mode = self.mode()
        ctx = self.context() if mode == "empirical" else build_context(self.N, None, self.oracle)
        ens = self.ensemble() if mode == "empirical" else None
        p1, p2 = self.cfg.anchors
        fit = fit_u_of_kappa(ens, p1, p2, mode, ctx=ctx, oracle=self.oracle)
        return ctx, calibrate(fit, ctx, self.oracle, self.cfg.x0)

    def finish(self) -> None:
        if self.oracle.cache_path is not None and self.oracle.large_cache:
            self.oracle.save()


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)


def _table(header, rows, cfg: RunConfig, meta: dict | None = None) -> str:
    if cfg.format == "json":
        doc = dict(meta or {})
        doc["rows"] = [dict(zip(header, r)) for r in rows]
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_ensemble(cfg: RunConfig, prob: Problem) -> int:
    e = prob.ensemble()
    est = cardinality_estimate(e.j, prob.oracle).estimate if e.j >= 2 else float("nan")
    if cfg.format == "json":
        meta = {"j": e.j, "N": prob.N, "size": e.size, "estimate": est, "per_x_counts": e.per_x_counts}
        rows = [(r.x, r.y, r.n_k, r.pi_x, r.pi_y) for r in e]
        _emit(_table(("x", "y", "n_k", "pi_x", "pi_y"), rows, cfg, meta), cfg)
    else:
        _emit(e.to_csv(), cfg)
    print(f"j={e.j} size={e.size} estimate={est:.2f}", file=sys.stderr)
    for x, c in list(e.per_x_counts.items())[:5]:
        print(f"x={x} count={c}", file=sys.stderr)
    return EXIT_OK


def cmd_stats(cfg: RunConfig, prob: Problem) -> int:
    e = prob.ensemble()
    est = cardinality_estimate(e.j, prob.oracle)
    rows = [(x, c, round(p, 6)) for x, c, p in coprime_statistics(e)]
    meta = {"j": e.j, "N": prob.N, "size": e.size, "estimate": est.estimate, "prime_sum": est.prime_sum}
    text = _table(("x", "observed", "predicted"), rows, cfg, meta)
    if cfg.format == "csv":
        text = f"# j={e.j} size={e.size} estimate={est.estimate:.6f} prime_sum={est.prime_sum:.6f}\n" + text
    _emit(text, cfg)
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig, prob: Problem) -> int:
    e, ctx = prob.ensemble(), prob.context()
    j2 = e.j * e.j
    kap = {x: kappa_empirical(x, e) for x in e.per_x_counts}
    rows = []
    for r in e:
        E = r.pi_x * r.pi_y / j2
        u = u_regular(prob.N, r.x, ctx) if r.x <= ctx.sqrt_n else float("nan")
        rows.append((r.x, r.y, r.pi_x * r.pi_y, j2, repr(E), repr(u), repr(1 + u * u), repr(kap[r.x])))
    meta = {"N": prob.N, "j": e.j, "gamma": ctx.gamma, "q_m": ctx.q_m, "e_max": ctx.e_max}
    _emit(_table(("x", "y", "numerator", "denominator", "E", "u", "E_regular", "kappa"), rows, cfg, meta), cfg)
    return EXIT_OK


def cmd_scan(cfg: RunConfig, prob: Problem, grid: int, keep_spurious: bool, report: str | None) -> int:
    ctx = prob.context()
    tol = cfg.tolerances.get("root", 1e-10)
    re_tol = cfg.tolerances.get("re", 1e-4)
    recs = scan_roots(ctx, grid=grid, tol=tol, re_tol=re_tol, keep_spurious=keep_spurious)
    if cfg.format == "json":
        _emit(json.dumps({"N": prob.N, "j": ctx.j, "e_max": ctx.e_max, "roots": [asdict(r) for r in recs]}, indent=1) + "\n", cfg)
    else:
        _emit(roots_to_csv(recs), cfg)
    if report:
        # exploratory: distance of each arithmetic energy to the nearest root
        e = prob.ensemble()
        roots = [r.E_root for r in recs]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("x", "y", "E", "nearest_root", "distance"))
        for r in e:
            E = r.pi_x * r.pi_y / (e.j * e.j)
            near = min(roots, key=lambda t: abs(t - E)) if roots else float("nan")
            w.writerow((r.x, r.y, repr(E), repr(near), repr(abs(near - E))))
        Path(report).write_text(buf.getvalue())
    print(f"roots={len(recs)} e_max={ctx.e_max:.6f} rho_m={ctx.rho_m:.6f}", file=sys.stderr)
    return EXIT_OK if recs else EXIT_EMPTY


def cmd_fit(cfg: RunConfig, prob: Problem) -> int:
    ctx, fit = prob.fit()
    doc = {
        "N": prob.N, "j": prob.j, "alpha1": fit.alpha1, "alpha2": fit.alpha2, "C": fit.c_const,
        "p1": fit.p1, "p2": fit.p2, "x0": fit.x0, "mode": fit.kappa_mode, "gamma": ctx.gamma,
    }
    if cfg.format == "json":
        _emit(json.dumps(doc, indent=1) + "\n", cfg)
    else:
        _emit(_table(("key", "value"), [(k, v) for k, v in doc.items()], cfg), cfg)
    return EXIT_OK


def cmd_predict(cfg: RunConfig, prob: Problem, x_max: int | None) -> int:
    ctx, fit = prob.fit()
    zeros = load_zeros(cfg.zeros_path) if cfg.zeros_path else default_zeros()
    bound = int(prediction_bound(ctx, cfg.domain_factor))
    series = build_series(ctx, fit, None, zeros, bound if x_max is None else x_max, prob.oracle, cfg.domain_factor)
    if cfg.format == "json":
        meta = {"N": prob.N, "j": prob.j, "alpha1": fit.alpha1, "alpha2": fit.alpha2, "C": fit.c_const,
                "zeros": series.zeros_count, "domain_factor": cfg.domain_factor}
        _emit(_table(("x", "pi_exact", "pi_sim", "R", "Li"), series.rows, cfg, meta), cfg)
    else:
        _emit(series.to_csv(), cfg)
    return EXIT_OK


def cmd_invert(cfg: RunConfig, prob: Problem, numerator: int) -> int:
    if numerator < 1:
        raise FactorSimError("--numerator must be positive")
    den = prob.j * prob.j
    try:
        x, y = invert_energy(EnergyValue(numerator, den, numerator / den), prob.N, prob.oracle)
    except NoSolutionError as exc:
        print(f"no solution: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    if cfg.format == "json":
        _emit(json.dumps({"x": x, "y": y}) + "\n", cfg)
    else:
        _emit(f"{x} {y}\n", cfg)
    return EXIT_OK


def cmd_qc(cfg: RunConfig, prob: Problem, E: float) -> int:
    ctx = prob.context()
    r = quantum_condition(E, ctx)
    res = wavefunction(E, ctx.rho_m, ctx)
    doc = {"E": E, "re_ratio": r.real, "im_ratio": r.imag, "residual_at_rho_m": float(res), "rho_m": ctx.rho_m}
    if cfg.format == "json":
        _emit(json.dumps(doc, indent=1) + "\n", cfg)
    else:
        _emit(_table(tuple(doc), [tuple(repr(v) for v in doc.values())], cfg), cfg)
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_mutually_exclusive_group(required=True)
    g.add_argument("--j", type=int, help="ensemble index; N defaults to p_j**2")
    g.add_argument("--N", type=int, help="number under study")
    common.add_argument("--p1", type=int, default=2)
    common.add_argument("--p2", type=int, default=3)
    common.add_argument("--x0", type=int, default=3)
    common.add_argument("--zeros", help="file of zeta zero ordinates, one per line")
    common.add_argument("--domain-factor", type=float, default=DOMAIN_FACTOR)
    common.add_argument("--mode", choices=("empirical", "asymptotic"))
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="max estimated |F| to enumerate")
    common.add_argument("--output", "-o")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = argparse.ArgumentParser(prog="factorsim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("ensemble", parents=[common], help="export F(j)")
    sub.add_parser("stats", parents=[common], help="cardinality and per-x counts")
    sub.add_parser("spectrum", parents=[common], help="E_k versus u export")
    s = sub.add_parser("scan", parents=[common], help="quantum-condition roots")
    s.add_argument("--grid", type=int, default=1000)
    s.add_argument("--root-tol", type=float, default=1e-10)
    s.add_argument("--re-tol", type=float, default=1e-4)
    s.add_argument("--all", action="store_true", help="keep crossings with Re(ratio) != 1")
    s.add_argument("--report", help="write energy-to-root distances here")
    sub.add_parser("fit", parents=[common], help="alpha1, alpha2 and C")
    pr = sub.add_parser("predict", parents=[common], help="pi(x|N) series")
    pr.add_argument("--x-max", type=int)
    inv = sub.add_parser("invert", parents=[common], help="factors from pi(x)pi(y)")
    inv.add_argument("--numerator", type=int, required=True)
    q = sub.add_parser("qc", parents=[common], help="one quantum-condition evaluation")
    q.add_argument("--E", type=float, required=True)
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    cfg = RunConfig(
        N=args.N, j=args.j, zeros_path=args.zeros, anchors=(args.p1, args.p2), x0=args.x0,
        domain_factor=args.domain_factor, output=args.output, format=args.format,
        mode=args.mode, budget=args.budget,
    )
    if args.command == "scan":
        cfg.tolerances = {"root": args.root_tol, "re": args.re_tol}
    try:
        prob = Problem(cfg)
        cmd = args.command
        if cmd == "ensemble":
            status = cmd_ensemble(cfg, prob)
        elif cmd == "stats":
            status = cmd_stats(cfg, prob)
        elif cmd == "spectrum":
            status = cmd_spectrum(cfg, prob)
        elif cmd == "scan":
            status = cmd_scan(cfg, prob, args.grid, args.all, args.report)
        elif cmd == "fit":
            status = cmd_fit(cfg, prob)
        elif cmd == "predict":
            status = cmd_predict(cfg, prob, args.x_max)
        elif cmd == "invert":
            status = cmd_invert(cfg, prob, args.numerator)
        else:
            status = cmd_qc(cfg, prob, args.E)
        prob.finish()
        return status
    except (FactorSimError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
