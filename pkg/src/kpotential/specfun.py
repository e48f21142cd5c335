"""Special functions and semi-infinite quadrature.

Everything above this module evaluates integrals over (0, inf) of the form
``int f(u) du`` where ``f`` may carry an integrable algebraic singularity at
the origin and decays exponentially, algebraically, or by oscillation at
infinity.  The integrator here is a geometric segment decomposition
``[0, s], [s, 2s], [2s, 4s], ...`` with adaptive Gauss-Legendre bisection in
every segment and a Gauss-Jacobi panel at the origin.

Integrands are vectorized: ``f`` receives a 1-D array of abscissae and
returns an array whose leading axis matches it.  Any trailing shape is
integrated component-wise, which is how a whole evaluation grid is pushed
through one quadrature.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special

__all__ = [
    "DomainError",
    "QuadratureError",
    "QuadratureConfig",
    "DEFAULT_CFG",
    "GOLDEN_CFG",
    "eval_gamma",
    "eval_normalized_bessel",
    "normalized_bessel_series",
    "bessel_crossover",
    "integrate_semi_infinite",
    "integrate_interval",
    "richardson_zero_limit",
]


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class QuadratureError(ArithmeticError):
    """A quadrature failed to certify its tolerance."""


TAIL_HINTS = ("exponential", "power", "oscillatory")


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and tail model for :func:`integrate_semi_infinite`.

    ``tail`` is one of ``"exponential"``, ``"power"`` or ``"oscillatory"``;
    a power tail needs ``tail_exponent`` (the integrand behaves like
    ``u**tail_exponent`` with ``tail_exponent < -1``).
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_segments: int = 200
    tail: str = "exponential"
    tail_exponent: float | None = None

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("abs_tol and rel_tol must be positive")
        if self.max_segments < 1:
            raise DomainError("max_segments must be >= 1")
        if self.tail not in TAIL_HINTS:
            raise DomainError(f"unknown tail hint {self.tail!r}")
        if self.tail == "power":
            if self.tail_exponent is None or not self.tail_exponent < -1:
                raise DomainError("power tail needs tail_exponent < -1")

    def with_tail(self, tail: str, exponent: float | None = None) -> "QuadratureConfig":
        return QuadratureConfig(self.abs_tol, self.rel_tol, self.max_segments, tail, exponent)

    def scaled(self, factor: float) -> "QuadratureConfig":
        """Same config with both tolerances multiplied by ``factor``."""
        return QuadratureConfig(
            self.abs_tol * factor, self.rel_tol * factor, self.max_segments,
            self.tail, self.tail_exponent,
        )


GOLDEN_CFG = QuadratureConfig(abs_tol=1e-10, rel_tol=1e-10)
DEFAULT_CFG = QuadratureConfig(abs_tol=1e-8, rel_tol=1e-8)


# ---------------------------------------------------------------------------
# Gamma


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def eval_gamma(x: float) -> float:
    """Gamma function on the real line minus the poles 0, -1, -2, ...

    Negative arguments go through the reflection formula so that only
    positive-argument evaluations are ever made.
    """
    x = float(x)
    if _is_nonpositive_integer(x):
        raise DomainError(f"Gamma has a pole at {x:g}")
    if x > 0:
        return math.gamma(x)
    # Gamma(x) Gamma(1-x) = pi / sin(pi x)
    return math.pi / (math.sin(math.pi * x) * math.gamma(1.0 - x))


# ---------------------------------------------------------------------------
# Normalized Bessel function  J~_nu(x) = (x/2)^(-nu) J_nu(x)


_SERIES_TERMS = 40


def normalized_bessel_series(nu: float, x) -> np.ndarray:
    """Power series of ``J~_nu``; accurate for moderate ``x`` only."""
    x = np.asarray(x, dtype=float)
    q = -0.25 * x * x
    term = np.full_like(x, 1.0 / special.gamma(nu + 1.0))
    total = term.copy()
    for m in range(1, _SERIES_TERMS):
        term = term * q / (m * (nu + m))
        total = total + term
    return total


def _bessel_far(nu: float, x: np.ndarray) -> np.ndarray:
    return special.jv(nu, x) * np.power(0.5 * x, -nu)


@lru_cache(maxsize=None)
def bessel_crossover(nu: float) -> float:
    """Radius where the power series hands over to ``scipy.special.jv``.

    The largest candidate radius at which both branches agree to 1e-12
    relative over a small neighbourhood is chosen; ``lru_cache`` makes the
    calibration happen once per order.
    """
    for xc in (4.0, 3.0, 2.0, 1.5, 1.0, 0.5, 0.25):
        probe = xc * np.array([0.9, 0.95, 1.0])
        a = normalized_bessel_series(nu, probe)
        b = _bessel_far(nu, probe)
        scale = np.maximum(np.abs(b), 1e-3 / special.gamma(nu + 1.0))
        if np.all(np.abs(a - b) <= 1e-12 * scale):
            return xc
    return 0.25


def eval_normalized_bessel(nu: float, x):
    """``J~_nu(x) = sum_m (-1)^m x^(2m) / (4^m m! Gamma(nu+m+1))``.

    Vectorized over ``x >= 0``.  Small arguments use the series, larger ones
    ``(x/2)^(-nu) J_nu(x)`` from scipy (whose large-argument branch is the
    Hankel asymptotic expansion).
    """
    if not nu > -1:
        raise DomainError(f"normalized Bessel needs nu > -1, got {nu}")
    scalar = np.ndim(x) == 0
    x = np.abs(np.asarray(x, dtype=float))
    xc = bessel_crossover(float(nu))
    out = np.empty_like(x)
    near = x < xc
    if np.any(near):
        out[near] = normalized_bessel_series(nu, x[near])
    far = ~near
    if np.any(far):
        out[far] = _bessel_far(nu, x[far])
    return float(out) if scalar else out


# ---------------------------------------------------------------------------
# Quadrature

_PANEL_ORDER = 16
_MAX_DEPTH = 48
_MAX_PANELS = 20000
_STALL_DEPTH = 6
_STALL_RATIO = 0.4
_STALL_NOISE = 1e-4
_EPS = np.finfo(float).eps
_node_lock = threading.Lock()


@lru_cache(maxsize=None)
def _legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    with _node_lock:
        x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=256)
def _jacobi(n: int, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    # weight (1 + x)^sigma on [-1, 1]
    with _node_lock:
        x, w = special.roots_jacobi(n, 0.0, sigma)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _rule(a: float, b: float, n: int, sigma: float | None):
    """Nodes and weights for ``int_a^b f``; Jacobi-weighted if ``sigma`` set.

    With ``sigma`` the rule integrates ``u^sigma * smooth`` exactly for
    polynomial ``smooth`` and assumes ``a == 0``; the weights already divide
    by ``u^sigma`` so they apply to the raw integrand.
    """
    half = 0.5 * (b - a)
    if sigma is None:
        x, w = _legendre(n)
        return a + half * (x + 1.0), half * w
    x, w = _jacobi(n, sigma)
    u = half * (x + 1.0)
    return u, half ** (sigma + 1.0) * w / u**sigma


def _singular_order(sigma: float | None) -> float | None:
    if sigma is None:
        return None
    if sigma >= 0 and float(sigma).is_integer():
        return None
    if sigma <= -1:
        raise DomainError(f"non-integrable endpoint singularity of order {sigma}")
    return float(sigma)


def _panel(f, a, b, n, sigma):
    m = 0.5 * (a + b)
    uc, wc = _rule(a, b, n, sigma)
    ul, wl = _rule(a, m, n, sigma)
    ur, wr = _rule(m, b, n, None)
    vals = np.asarray(f(np.concatenate([uc, ul, ur])), dtype=float)
    vc, vl, vr = vals[:n], vals[n:2 * n], vals[2 * n:]
    coarse = np.tensordot(wc, vc, axes=1)
    left = np.tensordot(wl, vl, axes=1)
    right = np.tensordot(wr, vr, axes=1)
    mass = np.tensordot(np.abs(wl), np.abs(vl), axes=1) + np.tensordot(np.abs(wr), np.abs(vr), axes=1)
    return coarse, left + right, mass


def _adaptive(f, a, b, cfg, sigma, abs_budget, max_width=None):
    """Adaptive bisection on ``[a, b]``; returns (integral, abs-mass)."""
    total = 0.0
    mass = 0.0
    width = b - a
    pieces = 1 if not max_width else max(1, int(math.ceil(width / max_width)))
    if pieces > _MAX_PANELS:
        raise QuadratureError(f"[{a:.3g}, {b:.3g}] needs more than {_MAX_PANELS} panels")
    edges = np.linspace(a, b, pieces + 1)
    edges[0], edges[-1] = a, b
    stack = [(float(edges[i]), float(edges[i + 1]), 0, math.inf) for i in range(pieces - 1, -1, -1)]
    count = 0
    while stack:
        count += 1
        if count > _MAX_PANELS:
            raise QuadratureError(f"[{a:.3g}, {b:.3g}] needs more than {_MAX_PANELS} panels")
        lo, hi, depth, parent = stack.pop()
        s = sigma if lo == 0.0 else None
        coarse, fine, m = _panel(f, lo, hi, _PANEL_ORDER, s)
        err = np.abs(fine - coarse)
        tol = np.maximum(abs_budget * (hi - lo) / width, np.maximum(cfg.rel_tol, 64 * _EPS) * m)
        worst = float(np.max(err))
        # a resolved smooth integrand gains many digits per bisection; an
        # error that only halves is noise in the integrand and cannot improve.
        # Under-resolved panels (error comparable to the panel's mass, as with
        # many oscillations per panel) and panels at the lower limit, where an
        # endpoint singularity legitimately converges slowly, are exempt.
        stalled = (
            depth >= _STALL_DEPTH
            and worst > _STALL_RATIO * parent
            and worst <= _STALL_NOISE * float(np.max(m))
            and lo > a
        )
        if depth >= _MAX_DEPTH or stalled or np.all(err <= tol):
            total = total + fine
            mass = mass + m
        else:
            mid = 0.5 * (lo + hi)
            stack.append((mid, hi, depth + 1, worst))
            stack.append((lo, mid, depth + 1, worst))
    return total, mass


def integrate_interval(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    cfg: QuadratureConfig = GOLDEN_CFG,
    *,
    singularity: float | None = None,
    max_width: float | None = None,
):
    """Adaptive Gauss-Legendre on a finite interval.

    ``singularity`` is the order ``s`` of an endpoint factor ``(u-a)^s``
    (only meaningful for ``a == 0``).
    """
    if b <= a:
        return 0.0
    sigma = _singular_order(singularity) if a == 0.0 else None
    val, _ = _adaptive(f, float(a), float(b), cfg, sigma, cfg.abs_tol, max_width)
    return val if np.ndim(val) else float(val)


def integrate_semi_infinite(
    f: Callable[[np.ndarray], np.ndarray],
    cfg: QuadratureConfig = GOLDEN_CFG,
    *,
    singularity: float | None = None,
    lower: float = 0.0,
    scale: float = 1.0,
    min_upper: float = 0.0,
    upper: float = math.inf,
    max_width: float | None = None,
):
    """``int_lower^inf f(u) du`` by geometric segments.

    Segments are ``[0, scale]`` followed by ``[scale 2^k, scale 2^(k+1)]``
    (or ``[lower 2^k, lower 2^(k+1)]`` when ``lower > 0``).  The tail is
    closed according to ``cfg.tail``:

    * ``exponential`` -- stop once a segment carries (absolute) mass below
      a tenth of the tolerance and mass is decreasing;
    * ``power`` -- add the geometric-series tail ``c_k r / (1 - r)`` with
      ``r = 2^(p+1)`` after each segment and stop when the corrected total
      (or its Aitken extrapolation, which absorbs lower-order tail terms)
      settles;
    * ``oscillatory`` -- after each segment ``[b, 2b]`` form the estimate
      ``S(b) + int_b^2b f(u) w((u - b)/b) du`` with ``w`` a smooth step from
      1 to 0; the error of this windowed truncation falls faster than any
      power of (frequency times ``b``), so stop when two consecutive
      estimates agree to tolerance.

    ``upper`` is a hard cut-off supplied by a caller that knows the
    integrand is negligible beyond it; ``max_width`` bounds the initial panel
    width (oscillatory integrands).

    Raises :class:`QuadratureError` when ``cfg.max_segments`` segments do
    not certify the tail.
    """
    sigma = _singular_order(singularity)
    # tail tests are meaningless while segments are still tiny
    settle = max(min_upper, scale)
    if lower > 0:
        a = float(lower)
        total = 0.0
    else:
        a = min(float(scale), upper)
        total, _ = _adaptive(f, 0.0, a, cfg, sigma, cfg.abs_tol, max_width)
        if a >= upper:
            return _finish(total)

    ratio = None
    if cfg.tail == "power":
        ratio = 2.0 ** (cfg.tail_exponent + 1.0)
    prev_mass = None
    prev_small = False
    prev_corrected = None
    settled = 0
    history = []
    prev_acc = None
    acc_settled = 0
    prev_window = None
    for _ in range(cfg.max_segments):
        b = min(2.0 * a, upper)
        if cfg.tail == "oscillatory" and b < upper:
            c, cw, mass = _windowed_segment(f, a, b, cfg, max_width)
            window = total + cw
        else:
            c, mass = _adaptive(f, a, b, cfg, None, cfg.abs_tol, max_width)
        total = total + c
        if b >= upper:
            return _finish(total)
        tol = np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(total))
        if b >= settle:
            if np.all(mass <= 0.1 * tol) and (prev_mass is None or np.all(mass <= prev_mass + tol)):
                return _finish(total)
            if cfg.tail == "oscillatory":
                close = prev_window is not None and bool(np.all(np.abs(window - prev_window) <= tol))
                if close and prev_small:
                    return _finish(window)
                prev_small = close
                prev_window = window
            elif cfg.tail == "power":
                corrected = total + c * ratio / (1.0 - ratio)
                tolc = np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(corrected))
                if prev_corrected is not None:
                    if np.all(np.abs(corrected - prev_corrected) <= tolc):
                        settled += 1
                        if settled >= 2:
                            return _finish(corrected)
                    else:
                        settled = 0
                history.append(corrected)
                # lower-order terms of the tail leave a geometric error in the
                # corrected sums; Aitken's delta-squared removes it
                if len(history) >= 3:
                    acc = _aitken(*history[-3:])
                    if acc is not None:
                        if prev_acc is not None and np.all(np.abs(acc - prev_acc) <= tolc):
                            acc_settled += 1
                            if acc_settled >= 2:
                                return _finish(acc)
                        else:
                            acc_settled = 0
                        prev_acc = acc
                prev_corrected = corrected
        prev_mass = mass
        a = b
    raise QuadratureError(
        f"tail not certified after {cfg.max_segments} segments (reached u = {a:.3g})"
    )


def _aitken(x0, x1, x2):
    d1 = x1 - x0
    d2 = x2 - x1
    den = d2 - d1
    with np.errstate(divide="ignore", invalid="ignore"):
        acc = x2 - d2 * d2 / den
    # fall back to the plain value where the sequence is already flat
    acc = np.where(np.abs(den) > 0, acc, x2)
    if not np.all(np.isfinite(acc)):
        return None
    return acc


def _smooth_step_down(t):
    # C-infinity step: 1 at t <= 0, 0 at t >= 1
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return b / (a + b)


def _windowed_segment(f, a, b, cfg, max_width):
    """Plain and windowed integrals of ``f`` over ``[a, b]`` in one pass."""

    def both(u):
        u = np.asarray(u, dtype=float)
        v = np.asarray(f(u), dtype=float)
        w = _smooth_step_down((u - a) / (b - a)).reshape((-1,) + (1,) * (v.ndim - 1))
        return np.stack([v, v * w], axis=-1)

    c, mass = _adaptive(both, a, b, cfg, None, cfg.abs_tol, max_width)
    return c[..., 0], c[..., 1], mass[..., 0]


def _finish(total):
    return total if np.ndim(total) else float(total)


def richardson_zero_limit(hs, values, order: int = 1) -> tuple[float, float]:
    """Extrapolate ``values(h)`` to ``h -> 0`` for ``h`` halving each step.

    Assumes an error expansion in integer powers ``h^order, h^(order+1), ...``.
    Returns the extrapolated value and the difference between the last two
    diagonal entries (an error estimate).
    """
    hs = [float(h) for h in hs]
    table = [list(map(float, values))]
    for j in range(1, len(hs)):
        prev = table[-1]
        row = []
        for i in range(len(prev) - 1):
            q = (hs[i] / hs[i + 1]) ** (order + j - 1)
            row.append(prev[i + 1] + (prev[i + 1] - prev[i]) / (q - 1.0))
        table.append(row)
    diag = [row[-1] for row in table]
    err = abs(diag[-1] - diag[-2]) if len(diag) > 1 else float("inf")
    return diag[-1], err
