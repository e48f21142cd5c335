"""Heat, Poisson and beta semigroups on radial profiles.

Each semigroup acts by a spectral multiplier ``exp(-t s^(beta/2))``: heat is
``beta = 2``, Poisson is ``beta = 1``.  Kernels are given in closed form for
heat and Poisson; the general beta kernel is a numerical Hankel transform of
the multiplier, computed once at ``t = 1`` and rescaled.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .radial import (
    Decay,
    FrameworkParams,
    RadialProfile,
    SpectralProfile,
    hankel_apply,
    multiplier_apply,
    multiplier_family,
    with_spectrum,
)
from .specfun import DEFAULT_CFG, DomainError, QuadratureConfig, eval_gamma, integrate_semi_infinite

__all__ = [
    "SemigroupKind",
    "semigroup_multiplier",
    "kernel_profile",
    "semigroup_apply",
    "semigroup_family",
    "subordinate_poisson_from_heat",
    "subordinator_density",
    "time_integral",
    "beta_kernel_tail",
]


@dataclass(frozen=True)
class SemigroupKind:
    tag: str
    beta: float | None = None

    def __post_init__(self):
        if self.tag not in ("heat", "poisson", "beta"):
            raise DomainError(f"unknown semigroup {self.tag!r}")
        if self.tag == "beta":
            if self.beta is None or not self.beta > 0:
                raise DomainError(f"beta semigroup needs beta > 0, got {self.beta}")
        elif self.beta is not None:
            raise DomainError(f"{self.tag} semigroup takes no beta")

    @classmethod
    def heat(cls) -> "SemigroupKind":
        return cls("heat")

    @classmethod
    def poisson(cls) -> "SemigroupKind":
        return cls("poisson")

    @classmethod
    def with_beta(cls, beta: float) -> "SemigroupKind":
        return cls("beta", float(beta))

    @property
    def exponent(self) -> float:
        """Power ``b`` of ``s`` in the multiplier ``exp(-t s^b)``."""
        if self.tag == "heat":
            return 1.0
        if self.tag == "poisson":
            return 0.5
        return 0.5 * self.beta

    def canonical(self) -> "SemigroupKind":
        """beta(1) is Poisson and beta(2) is heat."""
        if self.tag == "beta" and self.beta == 1.0:
            return SemigroupKind.poisson()
        if self.tag == "beta" and self.beta == 2.0:
            return SemigroupKind.heat()
        return self

    def __str__(self) -> str:
        return f"beta({self.beta:g})" if self.tag == "beta" else self.tag


def _check_time(t):
    if not t > 0:
        raise DomainError(f"time must be positive, got {t}")


def semigroup_multiplier(kind: SemigroupKind, t: float) -> Callable[[np.ndarray], np.ndarray]:
    _check_time(t)
    b = kind.exponent
    if b == 1.0:
        return lambda s: np.exp(-t * np.asarray(s, dtype=float))
    if b == 0.5:
        return lambda s: np.exp(-t * np.sqrt(np.asarray(s, dtype=float)))
    return lambda s: np.exp(-t * np.asarray(s, dtype=float) ** b)


def _spectrum(kind: SemigroupKind, t: float) -> SpectralProfile:
    b = kind.exponent
    return SpectralProfile(
        semigroup_multiplier(kind, t), Decay.exponential(t, b), label=f"{kind} multiplier t={t:g}"
    )


def poisson_constant(params: FrameworkParams) -> float:
    """``4^(nu+1) Gamma(nu + 3/2) / sqrt(pi)``."""
    nu = params.nu
    return 4.0 ** (nu + 1.0) * eval_gamma(nu + 1.5) / math.sqrt(math.pi)


# ---------------------------------------------------------------------------
# beta kernel at t = 1


def beta_kernel_tail(r, beta: float, nu: float, terms: int = 60):
    """Large-``r`` expansion of the ``t = 1`` beta kernel.

    Term-wise transform of ``exp(-u^b) = sum (-u^b)^k / k!`` with
    ``H[u^a](r) = Gamma(nu + 1 + a) / Gamma(-a) * r^(-nu - 1 - a)``.  The
    series converges for ``beta < 1`` and is asymptotic for ``1 < beta < 2``;
    it is summed up to its smallest term.  Returns ``(value, error)`` arrays.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    b = 0.5 * beta
    rows = []
    for k in range(1, terms + 1):
        a = k * b
        if abs(a - round(a)) < 1e-12:
            continue  # 1/Gamma(-a) vanishes
        sine = math.sin(math.pi * a)
        logc = math.lgamma(nu + 1.0 + a) + math.lgamma(1.0 + a) - math.lgamma(k + 1.0)
        sign = (-1.0) ** (k + 1) * math.copysign(1.0, sine)
        rows.append(sign * np.exp(logc - (nu + 1.0 + a) * np.log(r)) * abs(sine) / math.pi)
    if not rows:
        return np.zeros_like(r), np.zeros_like(r)
    table = np.array(rows)
    # truncate before the smallest term (optimal for asymptotic series)
    stop = np.argmin(np.abs(table), axis=0)
    keep = np.arange(len(rows))[:, None] < stop[None, :]
    value = np.sum(np.where(keep, table, 0.0), axis=0)
    smallest = np.abs(table[stop, np.arange(len(r))])
    err = smallest + 16.0 * np.finfo(float).eps * np.sum(np.abs(table) * keep, axis=0)
    return value, err


class _BetaUnit:
    """The ``t = 1`` beta kernel, memoized, series for large ``r``."""

    def __init__(self, beta: float, params: FrameworkParams, cfg: QuadratureConfig):
        self.beta = beta
        self.nu = params.nu
        self.cfg = cfg
        spec = SpectralProfile(
            lambda u: np.exp(-np.asarray(u, dtype=float) ** (0.5 * beta)),
            Decay.exponential(1.0, 0.5 * beta),
        )
        self._quad = hankel_apply(spec, params, cfg)
        self.profile = RadialProfile(self._eval, self.decay, label=f"W(beta={beta:g}, t=1)", exact=False)

    @property
    def decay(self) -> Decay:
        b = 0.5 * self.beta
        if float(b).is_integer():
            return Decay.exponential(1.0, 1.0)
        return Decay.power(-(self.nu + 1.0) - b)

    def _eval(self, r):
        r = np.asarray(r, dtype=float)
        out = np.empty_like(r)
        need = np.ones(r.shape, dtype=bool)
        big = r > 1.0
        if np.any(big) and not float(0.5 * self.beta).is_integer():
            val, err = beta_kernel_tail(r[big], self.beta, self.nu)
            ok = err <= 0.01 * self.cfg.abs_tol + 0.01 * self.cfg.rel_tol * np.abs(val)
            idx = np.flatnonzero(big)[ok]
            out[idx] = val[ok]
            need[idx] = False
        if np.any(need):
            out[need] = self._quad(r[need])
        return out


_units: dict = {}
_units_lock = threading.Lock()


def _beta_unit(beta: float, params: FrameworkParams, cfg: QuadratureConfig) -> RadialProfile:
    key = (float(beta), params.nu, cfg)
    with _units_lock:
        unit = _units.get(key)
        if unit is None:
            unit = _units[key] = _BetaUnit(float(beta), params, cfg).profile
    return unit


def kernel_profile(
    kind: SemigroupKind, t: float, params: FrameworkParams, cfg: QuadratureConfig = DEFAULT_CFG
) -> RadialProfile:
    """Radial kernel whose spectrum is ``semigroup_multiplier(kind, t)``."""
    _check_time(t)
    nu = params.nu
    kind = kind.canonical()
    spectrum = _spectrum(kind, t)
    if kind.tag == "heat":
        scale = t ** (-(nu + 1.0))
        return RadialProfile(
            lambda r: scale * np.exp(-np.asarray(r, dtype=float) / t),
            Decay.exponential(1.0 / t),
            label=f"heat kernel t={t:g}",
            spectrum=spectrum,
        )
    if kind.tag == "poisson":
        c = poisson_constant(params)
        return RadialProfile(
            lambda r: c * t / (t * t + 4.0 * np.asarray(r, dtype=float)) ** (nu + 1.5),
            Decay.power(-(nu + 1.5)),
            label=f"poisson kernel t={t:g}",
            spectrum=spectrum,
        )
    beta = kind.beta
    unit = _beta_unit(beta, params, cfg)
    amp = t ** (-2.0 * (nu + 1.0) / beta)
    stretch = t ** (-2.0 / beta)

    def func(r):
        return amp * unit(np.asarray(r, dtype=float) * stretch)

    return RadialProfile(func, unit.decay, label=f"{kind} kernel t={t:g}", spectrum=spectrum, exact=False)


def _output_decay(kind: SemigroupKind, t: float, f: RadialProfile, nu: float) -> Decay:
    d = f.decay
    if kind.exponent == 1.0:
        if d.kind == "exponential" and d.stretch == 1.0 and d.value > 0:
            return Decay.exponential(d.value / (1.0 + t * d.value))
        return d
    tail = -(nu + 1.0) - kind.exponent
    if d.kind == "power":
        return Decay.power(max(d.value, tail))
    return Decay.power(tail)


def semigroup_apply(
    kind: SemigroupKind,
    t: float,
    f: RadialProfile,
    params: FrameworkParams,
    cfg: QuadratureConfig = DEFAULT_CFG,
) -> RadialProfile:
    """Semigroup at time ``t`` applied to ``f``; ``t = 0`` returns ``f``."""
    if t == 0:
        return f
    return multiplier_apply(
        f,
        semigroup_multiplier(kind, t),
        params,
        cfg,
        decay=_output_decay(kind, t, f, params.nu),
        label=f"{kind}(t={t:g})[{f.label}]",
    )


def semigroup_family(
    kind: SemigroupKind,
    f: RadialProfile,
    params: FrameworkParams,
    cfg: QuadratureConfig = DEFAULT_CFG,
    *,
    damping: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """``(ts, r) -> values`` of shape ``(len(ts), len(r))``.

    Evaluates the semigroup at many times in one quadrature pass.  ``f``
    should carry its spectrum (see :func:`with_spectrum`) so repeated calls
    share it.  ``damping(s, ts)``, if given, multiplies the multipliers.
    """
    b = kind.exponent

    def evaluate(ts, r):
        ts = np.asarray(ts, dtype=float)
        r = np.atleast_1d(np.asarray(r, dtype=float))

        def ms(s):
            m = np.exp(-np.multiply.outer(np.asarray(s, dtype=float) ** b, ts))
            if damping is not None:
                m = m * damping(s, ts)
            return m

        return multiplier_family(f, ms, params, cfg)(r)

    return evaluate


def time_integral(
    family: Callable[[np.ndarray, np.ndarray], np.ndarray],
    weight: Callable[[np.ndarray], np.ndarray],
    cfg: QuadratureConfig,
    *,
    singularity: float | None = None,
    tail: QuadratureConfig | None = None,
    scale: float = 1.0,
    lower: float = 0.0,
) -> Callable[[np.ndarray], np.ndarray]:
    """``r -> int weight(t) family(t, r) dt`` over ``(lower, inf)``.

    ``singularity`` is the order of a ``t^p`` factor of ``weight`` at 0,
    ``tail`` a config carrying the tail hint for large ``t``.
    """
    tail = tail or cfg.with_tail("exponential")

    def func(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))

        def h(ts):
            return weight(ts)[:, None] * family(ts, r)

        return np.asarray(
            integrate_semi_infinite(h, tail, singularity=singularity, scale=scale, lower=lower)
        )

    return func


def subordinator_density(u):
    """Density of the one-sided 1/2-stable law with Laplace transform ``exp(-sqrt(w))``."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    up = u[pos]
    out[pos] = np.exp(-0.25 / up) / (2.0 * math.sqrt(math.pi) * up**1.5)
    return out


def subordinate_poisson_from_heat(
    f: RadialProfile, t: float, params: FrameworkParams, cfg: QuadratureConfig = DEFAULT_CFG
) -> RadialProfile:
    """Poisson semigroup as a mixture of heat semigroups.

    ``P^t f = int_0^inf H^(u t^2) f eta(u) du`` with ``eta`` the 1/2-stable
    subordinator density.  For large ``u`` the heat term decays like
    ``u^-(nu+1)``, which sets the power tail of the ``u`` integral.
    """
    _check_time(t)
    g = with_spectrum(f, params, cfg)
    heat = semigroup_family(SemigroupKind.heat(), g, params, cfg)

    def family(us, r):
        return heat(us * t * t, r)

    tail = cfg.with_tail("power", -(params.nu + 2.5))
    func = time_integral(family, subordinator_density, cfg, tail=tail)
    return RadialProfile(
        func,
        _output_decay(SemigroupKind.poisson(), t, f, params.nu),
        label=f"subordinated poisson(t={t:g})[{f.label}]",
        exact=False,
    )
