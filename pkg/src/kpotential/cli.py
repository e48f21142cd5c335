"""Command-line front end.

    kpotential [--n N] [--gamma G] [--tol T] [--rmax R] [--points P]
               [--format csv|json] [--out PATH] COMMAND ...

Commands: ``verify``, ``kernel``, ``potential``, ``invert``, ``measure``.
Exit status is 0 on success, 1 when a check fails and 2 for usage or
parameter errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass

import numpy as np

from .potentials import (
    PotentialKind,
    bessel_kernel_profile,
    potential_apply_spectral,
    potential_apply_subordinated,
)
from .radial import FrameworkParams, RadialProfile, default_grid, make_params
from .semigroups import SemigroupKind, kernel_profile
from .specfun import DomainError, QuadratureConfig, QuadratureError
from .verify import run_suite
from .wavelets import (
    RouteMismatchError,
    _check_theta,
    c_constant,
    design_measure,
    inversion_sweep,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MEASURE_THETAS = (0.5, 1.0, 1.5)


@dataclass(frozen=True)
class RunConfig:
    n: int = 2
    gamma: float = 0.5
    tol: float = 1e-8
    rmax: float = 20.0
    points: int = 200
    output_format: str = "csv"
    output_path: str = "-"

    def __post_init__(self):
        make_params(self.n, self.gamma)
        if self.points < 16:
            raise DomainError(f"--points must be >= 16, got {self.points}")
        if not self.rmax > 0:
            raise DomainError(f"--rmax must be positive, got {self.rmax}")
        if not 0 < self.tol < 1:
            raise DomainError(f"--tol must lie in (0, 1), got {self.tol}")
        if self.output_format not in ("csv", "json"):
            raise DomainError(f"unknown format {self.output_format!r}")

    @property
    def params(self) -> FrameworkParams:
        return make_params(self.n, self.gamma)

    @property
    def cfg(self) -> QuadratureConfig:
        return QuadratureConfig(abs_tol=self.tol, rel_tol=self.tol)

    def grid(self) -> np.ndarray:
        return default_grid(self.points, min(1e-3, 1e-3 * self.rmax), self.rmax)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def render_csv(meta: dict, header: list, rows) -> str:
    lines = [f"# {k}: {json.dumps(v, sort_keys=True)}" for k, v in meta.items()]
    lines.append(",".join(header))
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def render_json(obj: dict) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def _emit(config: RunConfig, text: str) -> None:
    if config.output_path in ("", "-"):
        sys.stdout.write(text)
    else:
        with open(config.output_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _meta(config: RunConfig, **extra) -> dict:
    d = asdict(config)
    d.pop("output_path")
    d["nu"] = config.params.nu
    d.update(extra)
    return d


def _table(config: RunConfig, meta: dict, header: list, columns: list) -> None:
    if config.output_format == "json":
        _emit(config, render_json({"config": meta, "columns": dict(zip(header, columns))}))
    else:
        _emit(config, render_csv(meta, header, zip(*columns)))


# ---------------------------------------------------------------------------
# commands


def cmd_verify(config: RunConfig, args) -> int:
    only = set(args.only.split(",")) if args.only else None
    results = run_suite(config.params, config.tol, only)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        line = f"{status}  {r.name:<{width}}  deviation={r.deviation:.3e}  gate={r.gate:.1e}  ({r.seconds:.1f}s)"
        if r.error:
            line += f"  {r.error}"
        print(line)
    failed = [r.name for r in results if not r.passed]
    summary = f"{len(results) - len(failed)}/{len(results)} checks passed"
    print(summary)
    if config.output_path not in ("", "-"):
        meta = _meta(config)
        header = ["check", "deviation", "gate", "passed", "seconds", "error"]
        rows = [[r.name, r.deviation, r.gate, r.passed, round(r.seconds, 3), r.error] for r in results]
        if config.output_format == "json":
            _emit(config, render_json({"config": meta, "checks": [dict(zip(header, row)) for row in rows]}))
        else:
            _emit(config, render_csv(meta, header, rows))
    return EXIT_FAIL if failed else EXIT_OK


def cmd_kernel(config: RunConfig, args) -> int:
    p, cfg = config.params, config.cfg
    if args.kind == "heat":
        prof = kernel_profile(SemigroupKind.heat(), args.t, p, cfg)
    elif args.kind == "poisson":
        prof = kernel_profile(SemigroupKind.poisson(), args.t, p, cfg)
    elif args.kind == "beta":
        if args.beta is None:
            raise DomainError("kernel beta needs --beta")
        prof = kernel_profile(SemigroupKind.with_beta(args.beta), args.t, p, cfg)
    else:
        prof = bessel_kernel_profile(args.alpha, p, cfg)
    r = np.concatenate([[0.0], config.grid()])
    values = prof(r)
    meta = _meta(config, kernel=args.kind, t=args.t, beta=args.beta, alpha=args.alpha)
    _table(config, meta, ["r", "kernel"], [r, values])
    return EXIT_OK


_PROFILES = {
    "exp": lambda: RadialProfile(lambda r: np.exp(-r), label="exp(-r)"),
    "rexp": lambda: RadialProfile(lambda r: r * np.exp(-r), label="r exp(-r)"),
}


def _potential_kind(args) -> PotentialKind:
    if args.kind == "biparam":
        if args.beta is None:
            raise DomainError("biparam needs --beta")
        return PotentialKind.biparam(args.alpha, args.beta)
    return getattr(PotentialKind, args.kind)(args.alpha)


def cmd_potential(config: RunConfig, args) -> int:
    p, cfg = config.params, config.cfg
    kind = _potential_kind(args)
    f = _PROFILES[args.profile]()
    if args.route == "spectral":
        out = potential_apply_spectral(kind, f, p, cfg)
    else:
        beta = args.beta if (args.kind == "riesz" and args.beta is not None) else 2.0
        out = potential_apply_subordinated(kind, f, p, cfg, beta=beta)
    r = config.grid()
    meta = _meta(config, potential=str(kind), profile=f.label, route=args.route)
    _table(config, meta, ["r", "f", "potential"], [r, f(r), out(r)])
    return EXIT_OK


def _parse_eps(text: str) -> list:
    try:
        eps = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise DomainError(f"--eps must be a comma-separated list of numbers, got {text!r}") from None
    if not eps or min(eps) <= 0:
        raise DomainError("--eps values must be positive")
    return eps


def cmd_invert(config: RunConfig, args) -> int:
    p, cfg = config.params, config.cfg
    kind = _potential_kind(args)
    beta = args.beta if args.beta is not None else 2.0
    mu = design_measure(args.moments)
    rep = inversion_sweep(
        kind, _PROFILES["exp"](), mu, _parse_eps(args.eps), p, cfg, beta=beta, grid=config.grid()
    )
    if config.output_format == "json":
        _emit(config, rep.to_json() + "\n")
        return EXIT_OK
    meta = _meta(
        config,
        potential=str(kind),
        semigroup_beta=rep.beta,
        theta=rep.theta,
        atoms=[list(a) for a in mu.atoms],
        certified_moments=mu.certified_moments,
        c_constant=rep.c_constant,
        converged=rep.converged,
        route_gap=rep.route_gap,
        target=rep.target,
    )
    header = ["eps", "sup_error", "shortcut_sup_error", "l2_error"]
    _emit(config, render_csv(meta, header, zip(rep.epsilons, rep.sup_errors, rep.shortcut_sup_errors, rep.l2_errors)))
    return EXIT_OK


def _c_or_reason(theta: float, mu) -> tuple:
    try:
        _check_theta(theta, mu)
    except DomainError as exc:
        return None, str(exc)
    return c_constant(theta, mu), ""


def cmd_measure(config: RunConfig, args) -> int:
    mu = design_measure(args.moments)
    thetas = MEASURE_THETAS
    if args.theta is not None:
        thetas = tuple(float(x) for x in args.theta.split(","))
        for th in thetas:
            _check_theta(th, mu)  # explicit requests must be admissible
    residuals = [mu.moment(i) for i in range(mu.certified_moments + 1)]
    tag = f"(1 - exp(-t))^{mu.certified_moments + 1}"
    constants = {th: _c_or_reason(th, mu) for th in thetas}
    if config.output_format == "json":
        _emit(config, render_json({
            "atoms": [list(a) for a in mu.atoms],
            "certified_moments": mu.certified_moments,
            "moment_residuals": residuals,
            "laplace_transform": tag,
            "c_constant": {repr(th): (c if c is not None else None) for th, (c, _) in constants.items()},
        }))
        return EXIT_OK
    lines = [f"# measure with vanishing moments 0..{mu.certified_moments}", "weight,location"]
    lines += [f"{_fmt(w)},{_fmt(s)}" for w, s in mu.atoms]
    lines.append("# moment residuals: " + ", ".join(f"m{i}={v:.1e}" for i, v in enumerate(residuals)))
    lines.append(f"# laplace transform: {tag}")
    for th, (c, why) in constants.items():
        lines.append(f"# C({th:g}) = {c!r}" if c is not None else f"# C({th:g}) not available: {why}")
    _emit(config, "\n".join(lines) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kpotential", description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2, help="dimension (default 2)")
    ap.add_argument("--gamma", type=float, default=0.5, help="sum of multiplicities (default 0.5)")
    ap.add_argument("--tol", type=float, default=1e-8, help="quadrature tolerance (default 1e-8)")
    ap.add_argument("--rmax", type=float, default=20.0, help="largest grid radius (default 20)")
    ap.add_argument("--points", type=int, default=200, help="grid points, at least 16 (default 200)")
    ap.add_argument("--format", dest="output_format", choices=("csv", "json"), default="csv")
    ap.add_argument("--out", dest="output_path", default="-", help="output file (default stdout)")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the invariant suite")
    v.add_argument("--only", help="comma-separated check names")
    v.set_defaults(handler=cmd_verify)

    k = sub.add_parser("kernel", help="tabulate a semigroup or Bessel kernel")
    k.add_argument("kind", choices=("heat", "poisson", "beta", "bessel-g"))
    k.add_argument("--t", type=float, default=1.0)
    k.add_argument("--beta", type=float)
    k.add_argument("--alpha", type=float, default=1.0, help="order of the Bessel kernel")
    k.set_defaults(handler=cmd_kernel)

    for name, handler, text in (
        ("potential", cmd_potential, "tabulate a potential of a test profile"),
        ("invert", cmd_invert, "run a truncated wavelet inversion sweep"),
    ):
        s = sub.add_parser(name, help=text)
        s.add_argument("kind", choices=("riesz", "bessel", "flett", "biparam"))
        s.add_argument("--alpha", type=float, required=True)
        s.add_argument("--beta", type=float, help="biparam beta, or the Riesz semigroup")
        s.set_defaults(handler=handler)
        if name == "potential":
            s.add_argument("--profile", choices=sorted(_PROFILES), default="exp")
            s.add_argument("--route", choices=("spectral", "subordinated"), default="spectral")
        else:
            s.add_argument("--moments", type=int, default=0, help="vanishing moments of the measure")
            s.add_argument("--eps", default="1,0.5,0.25,0.125,0.0625")

    m = sub.add_parser("measure", help="design a wavelet measure and print C(theta)")
    m.add_argument("--moments", type=int, default=0)
    m.add_argument("--theta", help="comma-separated theta values (default 0.5,1,1.5)")
    m.set_defaults(handler=cmd_measure)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        config = RunConfig(
            args.n, args.gamma, args.tol, args.rmax, args.points, args.output_format, args.output_path
        )
        return args.handler(config, args)
    except DomainError as exc:
        print(f"kpotential: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, RouteMismatchError) as exc:
        print(f"kpotential: check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
