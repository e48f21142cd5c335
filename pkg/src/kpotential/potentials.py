"""Riesz, Bessel, Flett and bi-parametric potentials.

Every potential is a spectral multiplier and also a time average of a
semigroup:

    riesz(a)       s^-a                    1/G(2a/b) int t^(2a/b-1) B_b^t dt
    bessel(a)      (1+s)^(-a/2)            1/G(a/2)  int t^(a/2-1) e^-t H^t dt
    flett(a)       (1+sqrt s)^-a           1/G(a)    int t^(a-1)   e^-t P^t dt
    biparam(a, b)  (1+s^(b/2))^(-a/b)      1/G(a/b)  int t^(a/b-1) e^-t B_b^t dt

(H heat, P Poisson, B_b the beta semigroup).  Both routes are implemented
independently so they can be checked against each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .radial import (
    Decay,
    FrameworkParams,
    RadialProfile,
    SpectralProfile,
    multiplier_apply,
    with_spectrum,
)
from .semigroups import SemigroupKind, semigroup_family, time_integral
from .specfun import (
    DEFAULT_CFG,
    GOLDEN_CFG,
    DomainError,
    QuadratureConfig,
    eval_gamma,
    eval_normalized_bessel,
    integrate_semi_infinite,
    richardson_zero_limit,
)

__all__ = [
    "PotentialKind",
    "potential_multiplier",
    "potential_apply_spectral",
    "potential_apply_subordinated",
    "bessel_kernel_profile",
    "riesz_kernel_check",
]

_TAGS = ("riesz", "bessel", "flett", "biparam")


@dataclass(frozen=True)
class PotentialKind:
    tag: str
    alpha: float
    beta: float | None = None

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise DomainError(f"unknown potential {self.tag!r}")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if self.tag == "biparam":
            if self.beta is None or not self.beta > 0:
                raise DomainError(f"biparam needs beta > 0, got {self.beta}")
        elif self.beta is not None:
            raise DomainError(f"{self.tag} takes no beta")

    @classmethod
    def riesz(cls, alpha: float) -> "PotentialKind":
        return cls("riesz", float(alpha))

    @classmethod
    def bessel(cls, alpha: float) -> "PotentialKind":
        return cls("bessel", float(alpha))

    @classmethod
    def flett(cls, alpha: float) -> "PotentialKind":
        return cls("flett", float(alpha))

    @classmethod
    def biparam(cls, alpha: float, beta: float) -> "PotentialKind":
        return cls("biparam", float(alpha), float(beta))

    def validate(self, params: FrameworkParams) -> None:
        if self.tag == "riesz" and not self.alpha < params.dh:
            raise DomainError(
                f"riesz potential needs 0 < alpha < nu + 1 = {params.dh:g}, got {self.alpha:g}"
            )

    def __str__(self) -> str:
        if self.tag == "biparam":
            return f"biparam({self.alpha:g},{self.beta:g})"
        return f"{self.tag}({self.alpha:g})"


def potential_multiplier(kind: PotentialKind) -> Callable[[np.ndarray], np.ndarray]:
    a = kind.alpha
    if kind.tag == "riesz":
        return lambda s: np.asarray(s, dtype=float) ** (-a)
    if kind.tag == "bessel":
        return lambda s: (1.0 + np.asarray(s, dtype=float)) ** (-0.5 * a)
    if kind.tag == "flett":
        return lambda s: (1.0 + np.sqrt(np.asarray(s, dtype=float))) ** (-a)
    b = kind.beta
    return lambda s: (1.0 + np.asarray(s, dtype=float) ** (0.5 * b)) ** (-a / b)


def _output_decay(kind: PotentialKind, f: RadialProfile, nu: float) -> Decay:
    # decay of the kernel, unless f decays more slowly
    if kind.tag == "riesz":
        tail = Decay.power(kind.alpha - nu - 1.0)
    elif kind.tag == "bessel" or (kind.tag == "biparam" and kind.beta == 2.0):
        tail = Decay.exponential(2.0, 0.5)
    elif kind.tag == "flett":
        tail = Decay.power(-(nu + 1.5))
    else:
        tail = Decay.power(-(nu + 1.0) - 0.5 * kind.beta)
    d = f.decay
    if d.kind == "power" and (tail.kind != "power" or d.value > tail.value):
        return d
    return tail


def potential_apply_spectral(
    kind: PotentialKind,
    f: RadialProfile,
    params: FrameworkParams,
    cfg: QuadratureConfig = DEFAULT_CFG,
) -> RadialProfile:
    """Potential of ``f`` as ``H[m (H f)]``."""
    kind.validate(params)
    return multiplier_apply(
        f,
        potential_multiplier(kind),
        params,
        cfg,
        m_singularity=-kind.alpha if kind.tag == "riesz" else 0.0,
        decay=_output_decay(kind, f, params.nu),
        label=f"{kind}[{f.label}]",
    )


def _subordination(kind: PotentialKind, params: FrameworkParams, riesz_beta: float):
    """Semigroup, time exponent ``p`` (weight ``t^(p-1)``), damping flag."""
    a = kind.alpha
    if kind.tag == "bessel":
        return SemigroupKind.heat(), 0.5 * a, True
    if kind.tag == "flett":
        return SemigroupKind.poisson(), a, True
    if kind.tag == "biparam":
        return SemigroupKind.with_beta(kind.beta), a / kind.beta, True
    return SemigroupKind.with_beta(riesz_beta), 2.0 * a / riesz_beta, False


def potential_apply_subordinated(
    kind: PotentialKind,
    f: RadialProfile,
    params: FrameworkParams,
    cfg: QuadratureConfig = DEFAULT_CFG,
    *,
    beta: float = 2.0,
) -> RadialProfile:
    """Potential of ``f`` as a Gamma-weighted time integral of a semigroup.

    ``beta`` selects the semigroup of the Riesz representation (ignored for
    the other kinds).  The damped integrals (Bessel, Flett, bi-parametric)
    have an exponential tail in ``t``; the Riesz one has the power tail
    ``t^(p - 1 - 2(nu+1)/beta)`` set by the decay of the semigroup.
    """
    kind.validate(params)
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    semigroup, p, damped = _subordination(kind, params, beta)
    g = with_spectrum(f, params, cfg)
    family = semigroup_family(semigroup, g, params, cfg)
    norm = 1.0 / eval_gamma(p)

    if damped:
        def weight(t):
            return norm * t ** (p - 1.0) * np.exp(-t)

        tail = cfg.with_tail("exponential")
    else:
        def weight(t):
            return norm * t ** (p - 1.0)

        tail = cfg.with_tail("power", p - 1.0 - 2.0 * params.dh / beta)

    func = time_integral(family, weight, cfg, singularity=p - 1.0, tail=tail)
    return RadialProfile(
        func,
        _output_decay(kind, f, params.nu),
        label=f"{kind} subordinated[{f.label}]",
        exact=False,
    )


def bessel_kernel_profile(
    alpha: float, params: FrameworkParams, cfg: QuadratureConfig = DEFAULT_CFG
) -> RadialProfile:
    """Kernel ``g^alpha(r) = 1/G(alpha/2) int e^-t e^(-r/t) t^(alpha/2 - nu - 2) dt``.

    Near the origin ``g^alpha ~ r^(alpha/2 - nu - 1)`` when that exponent is
    negative; the profile declares it as its singularity.  The known
    spectrum ``(1+s)^(-alpha/2)`` is attached.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    nu = params.nu
    q = 0.5 * alpha - nu - 2.0
    norm = 1.0 / eval_gamma(0.5 * alpha)

    def func(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        zero = r == 0.0
        out[zero] = np.inf if q <= -1.0 else norm * eval_gamma(q + 1.0)
        rp = r[~zero]
        if rp.size:
            # t = sqrt(r) v puts every peak at v = 1
            root = np.sqrt(rp)

            def h(v):
                v = np.asarray(v, dtype=float)[:, None]
                return np.exp(-root * (v + 1.0 / v)) * v**q

            vals = integrate_semi_infinite(h, cfg.with_tail("exponential"))
            out[~zero] = norm * root ** (q + 1.0) * np.asarray(vals)
        return out

    spectrum = SpectralProfile(
        lambda s: (1.0 + np.asarray(s, dtype=float)) ** (-0.5 * alpha),
        Decay.power(-0.5 * alpha),
        label=f"bessel multiplier {alpha:g}",
    )
    return RadialProfile(
        func,
        Decay.exponential(2.0, 0.5),
        label=f"g^{alpha:g}",
        singularity=min(0.0, 0.5 * alpha - nu - 1.0),
        spectrum=spectrum,
        exact=False,
    )


def riesz_kernel_check(
    alpha: float,
    params: FrameworkParams,
    cfg: QuadratureConfig = GOLDEN_CFG,
    s_values=(0.5, 1.0, 2.0, 4.0),
    levels: int = 6,
) -> float:
    """Max relative deviation of ``H[c r^(alpha - nu - 1)](s)`` from ``s^-alpha``.

    ``c = G(nu + 1 - alpha) / G(alpha)``.  The transform converges only
    conditionally, so it is taken as the limit ``eps -> 0`` of
    ``int c u^(alpha-1) e^(-eps u) J~(2 sqrt(us)) du``.  The regularized value
    has an expansion in integer powers of ``eps/s`` (plus terms of order
    ``exp(-s/eps)``, negligible for ``eps <= s/40``), which Richardson
    extrapolation removes.
    """
    PotentialKind.riesz(alpha).validate(params)
    nu = params.nu
    c = eval_gamma(nu + 1.0 - alpha) / eval_gamma(alpha)
    worst = 0.0
    for s in s_values:
        y = math.sqrt(s)
        hs = [s / (40.0 * 2.0**k) for k in range(levels)]
        values = []
        for eps in hs:
            def h(x, eps=eps):
                return c * 2.0 * x ** (2.0 * alpha - 1.0) * np.exp(-eps * x * x) * eval_normalized_bessel(
                    nu, 2.0 * x * y
                )

            values.append(
                integrate_semi_infinite(
                    h, cfg.with_tail("exponential"), singularity=2.0 * alpha - 1.0,
                    scale=min(1.0, 1.0 / y), max_width=0.25 * math.pi / y,
                )
            )
        limit, _ = richardson_zero_limit(hs, values, order=1)
        worst = max(worst, abs(limit * s**alpha - 1.0))
    return worst
