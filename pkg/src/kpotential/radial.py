"""Radial reduction of the (k,1)-generalized Fourier transform.

On radial data the transform is the Hankel-type integral

    H f(s) = int_0^inf f(u) J~_nu(2 sqrt(u s)) u^nu du,   nu = n + 2 gamma - 2,

with the spherical constant fixed to 1.  Under that convention ``H`` is an
involution, ``e^{-r}`` is a fixed point, and a kernel of unit mass has
``radial_mass == Gamma(nu + 1)`` (equivalently ``H kernel (0) == 1``).

Integrals are taken in ``x = sqrt(u)``, where the Bessel phase ``2 x sqrt(s)``
is linear and the weight becomes ``2 x^(2 nu + 1)``.
"""
from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .specfun import (
    DEFAULT_CFG,
    DomainError,
    QuadratureConfig,
    eval_gamma,
    eval_normalized_bessel,
    integrate_interval,
    integrate_semi_infinite,
)

__all__ = [
    "FrameworkParams",
    "make_params",
    "Decay",
    "RadialProfile",
    "SpectralProfile",
    "default_grid",
    "hankel_apply",
    "multiplier_apply",
    "multiplier_family",
    "radial_mass",
    "unit_mass",
    "with_spectrum",
    "strip_spectrum",
    "sup_norm",
]


@dataclass(frozen=True)
class FrameworkParams:
    """Dimension ``n`` and ``gamma`` (the sum of the multiplicities)."""

    n: int
    gamma: float

    @property
    def nu(self) -> float:
        """Hankel order ``n + 2 gamma - 2``."""
        return self.n + 2.0 * self.gamma - 2.0

    @property
    def dh(self) -> float:
        """Homogeneity degree ``n + 2 gamma - 1`` of the radial measure."""
        return self.nu + 1.0


def make_params(n: int, gamma: float) -> FrameworkParams:
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    if gamma < 0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    if n + 2.0 * gamma <= 1.0:
        raise DomainError(f"n + 2 gamma must exceed 1 (nu > -1), got n={n}, gamma={gamma}")
    return FrameworkParams(int(n), float(gamma))


@dataclass(frozen=True)
class Decay:
    """Decay model of a profile at infinity.

    ``kind`` is ``exponential`` (``|f| <~ exp(-value * r**stretch)``),
    ``power`` (``value`` = exponent, the profile behaves like ``r**value``)
    or ``compact`` (``value`` = support radius).
    """

    kind: str
    value: float
    stretch: float = 1.0

    @classmethod
    def exponential(cls, rate: float = 1.0, stretch: float = 1.0) -> "Decay":
        return cls("exponential", float(rate), float(stretch))

    def cutoff(self, tol: float, nu: float = 0.0) -> float:
        """Radius beyond which ``f`` no longer matters for ``int f(u) u^nu du``.

        Exponential bounds are read as ``exp(-rate r^stretch)``; power
        bounds as ``r^exponent`` with unit constant (profiles are O(1)).
        """
        if self.kind == "compact":
            return self.value
        if self.kind == "exponential" and self.value > 0:
            level = np.log(1.0 / tol) + 10.0
            r = (level / self.value) ** (1.0 / self.stretch)
            # the weight u^nu delays the cut-off; a few fixed-point steps
            for _ in range(4):
                r = ((level + max(nu + 1.0, 0.0) * np.log(max(r, 1.0))) / self.value) ** (
                    1.0 / self.stretch
                )
            return r
        if self.kind == "power":
            q = self.value + nu + 1.0
            if q < -0.5:
                return (1e-2 * tol) ** (1.0 / q)
        return np.inf

    @classmethod
    def power(cls, exponent: float) -> "Decay":
        return cls("power", float(exponent))

    @classmethod
    def compact(cls, radius: float) -> "Decay":
        return cls("compact", float(radius))


class RadialProfile:
    """Lazily evaluated radial function ``r -> f(r)`` with memoized values.

    ``func`` must accept a 1-D float array.  ``singularity`` is the order
    ``p`` of an integrable ``r^p`` behaviour at the origin.  ``spectrum``,
    when known, is the profile's Hankel transform; operators that act by
    multipliers use it instead of transforming the profile numerically.
    ``exact`` is False for profiles produced by quadrature.
    """

    def __init__(
        self,
        func: Callable[[np.ndarray], np.ndarray],
        decay: Decay = Decay.exponential(),
        label: str = "",
        singularity: float = 0.0,
        spectrum: "SpectralProfile | None" = None,
        exact: bool = True,
    ):
        self._func = func
        self.exact = exact
        self.decay = decay
        self.label = label
        self.singularity = float(singularity)
        self.spectrum = spectrum
        self._memo: dict[float, float] = {}
        self._lock = threading.Lock()

    def __call__(self, r):
        scalar = np.ndim(r) == 0
        r = np.atleast_1d(np.asarray(r, dtype=float))
        keys = r.tolist()
        memo = self._memo
        with self._lock:
            missing = [k for k in dict.fromkeys(keys) if k not in memo]
        if missing:
            vals = np.asarray(self._func(np.array(missing)), dtype=float)
            with self._lock:
                memo.update(zip(missing, vals.tolist()))
        out = np.array([memo[k] for k in keys])
        return float(out[0]) if scalar else out

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.label!r})"


class SpectralProfile(RadialProfile):
    """A profile read on the spectral side ``s = |xi|``."""


def strip_spectrum(f: RadialProfile) -> RadialProfile:
    """Copy of ``f`` without its spectrum, forcing numerical transforms."""
    return type(f)(f, f.decay, f.label, f.singularity, None, f.exact)


def default_grid(points: int = 200, rmin: float = 1e-3, rmax: float = 20.0) -> np.ndarray:
    return np.geomspace(rmin, rmax, points)


def sup_norm(values) -> float:
    return float(np.max(np.abs(values)))


# ---------------------------------------------------------------------------
# Bessel blocks.  Quadrature panels are deterministic (dyadic bisections of
# fixed segments), so repeated transforms at the same evaluation points hit
# the same (nodes, points) pairs; caching the J~ matrix per pair removes most
# Bessel evaluations from nested quadratures.

_BLOCK_BUDGET = 6_000_000  # float64 entries (~48 MB)
_PERIOD_FRACTION = 0.25


class _BlockCache:
    def __init__(self, budget: int):
        self.budget = budget
        self.size = 0
        self._data: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def get(self, nu: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        key = (nu, x.tobytes(), y.tobytes())
        with self._lock:
            block = self._data.get(key)
            if block is not None:
                self._data.move_to_end(key)
                return block
        block = eval_normalized_bessel(nu, 2.0 * np.multiply.outer(x, y))
        block.setflags(write=False)
        with self._lock:
            if key not in self._data:
                self._data[key] = block
                self.size += block.size
                while self.size > self.budget and len(self._data) > 1:
                    _, old = self._data.popitem(last=False)
                    self.size -= old.size
        return block


_blocks = _BlockCache(_BLOCK_BUDGET)


_PROBE_LIMIT = 1e8
_EPS = np.finfo(float).eps


def _noise_radius(g, limit: float, noise: float, nu: float, start: float = 1.0) -> float:
    """First radius past which a computed profile no longer contributes.

    The profile is probed on doubling blocks.  A block is quiet when its
    weighted contribution is below ``noise`` or its values sit at the
    rounding floor of the largest value seen; integration stops at the
    first of two consecutive quiet blocks, since past that point a growing
    weight would only amplify rounding.  Renewed growth below ``noise``
    marks the error floor and also ends the probe.
    """
    quiet = 0
    peak = float(np.max(np.abs(g(np.linspace(0.0, start, 9)))))
    prev = peak
    lo = start
    while lo < limit:
        top = float(np.max(np.abs(g(np.geomspace(lo, 2.0 * lo, 9)[1:]))))
        if top > prev and prev < noise:
            # a decaying profile that grows again has hit its error floor
            return lo
        peak = max(peak, top)
        prev = top
        if top * (2.0 * lo) ** (nu + 1.0) < noise or top < 64.0 * _EPS * peak:
            quiet += 1
            if quiet == 2:
                return lo / 2.0
        else:
            quiet = 0
        lo *= 2.0
    return limit


def _transform_at(
    g: Callable[[np.ndarray], np.ndarray],
    points: np.ndarray,
    nu: float,
    cfg: QuadratureConfig,
    singularity: float,
    decay: Decay,
    weights: Callable[[np.ndarray], np.ndarray] | None = None,
    exact: bool = True,
) -> np.ndarray:
    """``int_0^inf g(u) J~_nu(2 sqrt(u p)) u^nu du`` for every ``p`` in ``points``.

    ``g`` is a profile-like callable.  When ``weights`` is given, ``g`` is
    replaced by the rows of ``weights(u)`` (shape ``(len(u), K)``) and the
    result has shape ``(K, len(points))``.
    """
    points = np.asarray(points, dtype=float)
    y = np.sqrt(points)
    sigma = 2.0 * (singularity + nu) + 1.0
    out_shape = (len(points),) if weights is None else None

    def integrand_for(yv):
        def h(x):
            u = x * x
            base = 2.0 * x ** (2.0 * nu + 1.0)
            block = _blocks.get(nu, x, yv)
            if weights is None:
                return (base * g(u))[:, None] * block
            w = weights(u) * base[:, None]
            return w[:, :, None] * block[:, None, :]
        return h

    def run(yv, tail_cfg, min_upper=0.0):
        h = integrand_for(yv)
        ymax = float(np.max(yv))
        # panels no wider than a fraction of the Bessel period keep the
        # per-node phase rounding averaged out
        width = None
        if ymax > 0 and cfg.rel_tol <= 1e-12:
            width = _PERIOD_FRACTION * np.pi / ymax
        if decay.kind == "compact":
            return integrate_interval(
                h, 0.0, float(np.sqrt(decay.value)), tail_cfg, singularity=sigma, max_width=width
            )
        scale = 1.0
        if decay.kind == "exponential" and decay.value > 0:
            scale = min(1.0, decay.value ** (-0.5 / decay.stretch))
        upper = float(np.sqrt(tail_radius))
        return integrate_semi_infinite(
            h, tail_cfg, singularity=sigma, scale=scale, min_upper=min_upper,
            upper=upper, max_width=width,
        )

    if decay.kind == "power":
        # declared power envelopes carry no constant, so they cannot size
        # the tail; exact profiles rely on the tail closure, computed ones
        # are cut where they reach their noise level
        tail_radius = np.inf
        if not exact:
            probe = g
            if weights is not None:
                def probe(u):
                    return np.max(np.abs(weights(u)), axis=1)
            tail_radius = _noise_radius(probe, _PROBE_LIMIT, cfg.abs_tol, nu)
    else:
        tail_radius = decay.cutoff(min(cfg.abs_tol, cfg.rel_tol), nu)

    zero = y == 0.0
    pos = ~zero
    if weights is None:
        result = np.zeros(out_shape)
    else:
        result = None
    pieces = []
    if np.any(zero):
        if decay.kind == "power":
            # non-oscillating: integrand ~ x^(2p + 2 nu + 1)
            zcfg = cfg.with_tail("power", 2.0 * decay.value + 2.0 * nu + 1.0)
        else:
            zcfg = cfg.with_tail("exponential")
        pieces.append((zero, run(y[zero], zcfg)))
    if np.any(pos):
        if decay.kind == "power":
            # the oscillatory tail rule needs the phase to have wound up;
            # band the points so small-frequency ones do not drag the rest
            ocfg = cfg.with_tail("oscillatory")
            idx = np.flatnonzero(pos)
            order = idx[np.argsort(y[idx])]
            start = 0
            while start < len(order):
                lo = y[order[start]]
                stop = start
                while stop < len(order) and y[order[stop]] <= 16.0 * lo:
                    stop += 1
                band = np.zeros_like(pos)
                band[order[start:stop]] = True
                pieces.append((band, run(y[band], ocfg, 2.0 * np.pi / lo)))
                start = stop
        else:
            pieces.append((pos, run(y[pos], cfg.with_tail("exponential"))))
    for mask, vals in pieces:
        vals = np.asarray(vals)
        if weights is None:
            result[mask] = vals
        else:
            if result is None:
                result = np.zeros(vals.shape[:-1] + (len(points),))
            result[..., mask] = vals
    return result


def hankel_apply(
    f: RadialProfile,
    params: FrameworkParams,
    cfg: QuadratureConfig = DEFAULT_CFG,
    *,
    decay: Decay | None = None,
) -> SpectralProfile:
    """Hankel transform of order ``nu`` as a lazily evaluated spectral profile.

    Always integrates ``f`` numerically; ``f.spectrum`` is ignored.
    ``decay`` sets the metadata of the result (defaults to exponential).
    """
    nu = params.nu

    def func(s):
        return _transform_at(f, s, nu, cfg, f.singularity, f.decay, exact=f.exact)

    return SpectralProfile(func, decay or Decay.exponential(), label=f"H[{f.label}]", exact=False)


def multiplier_apply(
    f: RadialProfile,
    m: Callable[[np.ndarray], np.ndarray],
    params: FrameworkParams,
    cfg: QuadratureConfig = DEFAULT_CFG,
    *,
    m_singularity: float = 0.0,
    decay: Decay | None = None,
    label: str = "",
) -> RadialProfile:
    """``H[s -> m(s) (H f)(s)]``: convolution with the kernel whose spectrum is ``m``.

    Uses ``f.spectrum`` when present, otherwise ``hankel_apply(f)``.
    ``m_singularity`` declares an integrable ``s^p`` singularity of ``m`` at 0.
    """
    F = f.spectrum if f.spectrum is not None else hankel_apply(f, params, cfg)
    sing = m_singularity + F.singularity

    def g(s):
        return m(s) * F(s)

    spec = SpectralProfile(g, F.decay, label=f"m*{F.label}", singularity=sing, exact=F.exact)

    def func(r):
        return _transform_at(spec, r, params.nu, cfg, sing, F.decay, exact=F.exact)

    return RadialProfile(
        func, decay or f.decay, label=label or f"M[{f.label}]", spectrum=spec, exact=False
    )


def multiplier_family(
    f: RadialProfile,
    ms: Callable[[np.ndarray], np.ndarray],
    params: FrameworkParams,
    cfg: QuadratureConfig = DEFAULT_CFG,
    *,
    m_singularity: float = 0.0,
) -> Callable[[np.ndarray], np.ndarray]:
    """Apply ``K`` multipliers at once.

    ``ms(s)`` returns shape ``(len(s), K)``; the returned callable maps
    ``r`` (1-D) to an array of shape ``(K, len(r))``.  One quadrature pass
    serves the whole family, which is what time-subordination integrals need.
    """
    F = f.spectrum if f.spectrum is not None else hankel_apply(f, params, cfg)
    sing = m_singularity + F.singularity

    def weights(s):
        return ms(s) * F(s)[:, None]

    def evaluate(r):
        return _transform_at(None, r, params.nu, cfg, sing, F.decay, weights=weights, exact=F.exact)

    return evaluate


def radial_mass(f: RadialProfile, params: FrameworkParams, cfg: QuadratureConfig = DEFAULT_CFG) -> float:
    """``int_0^inf f(u) u^nu du`` (integration against the radial weight)."""
    nu = params.nu
    sigma = nu + f.singularity

    def h(u):
        return f(u) * u**nu

    if f.decay.kind == "compact":
        return integrate_interval(h, 0.0, f.decay.value, cfg, singularity=sigma)
    if f.decay.kind == "power":
        return integrate_semi_infinite(
            h, cfg.with_tail("power", f.decay.value + nu), singularity=sigma
        )
    scale = min(1.0, 1.0 / f.decay.value) if f.decay.value > 0 else 1.0
    return integrate_semi_infinite(h, cfg.with_tail("exponential"), singularity=sigma, scale=scale)


def with_spectrum(
    f: RadialProfile, params: FrameworkParams, cfg: QuadratureConfig = DEFAULT_CFG
) -> RadialProfile:
    """``f`` itself if it carries a spectrum, else a copy carrying ``hankel_apply(f)``.

    Callers that apply many multipliers to the same profile use this so the
    transform (and its memo) is shared.
    """
    if f.spectrum is not None:
        return f
    return type(f)(f, f.decay, f.label, f.singularity, hankel_apply(f, params, cfg), f.exact)


def unit_mass(params: FrameworkParams) -> float:
    """Radial mass of a kernel whose spectrum equals 1 at the origin."""
    return eval_gamma(params.nu + 1.0)
