"""Analytic helpers for symmetric Levy laws and Levy-flight search tuning."""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate

from .errors import ParameterDomainError

# the integrand envelope exp(-gamma q^alpha) is cut where it drops below this
ENVELOPE_CUTOFF = 1e-12
QUAD_EPSABS = 1e-8
# beyond this many cosine half-periods the QAWO Fourier rule is used instead
MAX_SPLIT_PIECES = 64


@dataclass(frozen=True)
class SearchGeometry:
    """Mean target spacing ``lam`` and sensing radius ``r_v``, both in metres."""

    lam: float
    r_v: float

    def __post_init__(self):
        if not self.lam > 0 or not self.r_v > 0:
            raise ParameterDomainError("lam and r_v must both be positive")

    @property
    def ratio(self) -> float:
        return self.lam / self.r_v


def _check_alpha_gamma(alpha: float, gamma: float) -> None:
    if not 0.0 < alpha <= 2.0:
        raise ParameterDomainError(f"alpha must lie in (0, 2], got {alpha}")
    if not gamma > 0.0:
        raise ParameterDomainError(f"gamma must be positive, got {gamma}")


def integration_limit(alpha: float, gamma: float) -> float:
    """Upper limit where exp(-gamma q^alpha) falls to ``ENVELOPE_CUTOFF``."""
    return (-math.log(ENVELOPE_CUTOFF) / gamma) ** (1.0 / alpha)


def levy_pdf(alpha: float, gamma: float, l: float) -> float:
    """Density of the symmetric Levy law at ``l``.

    Evaluates (1/pi) * integral_0^inf exp(-gamma q^alpha) cos(q l) dq. The
    range is truncated where the envelope is negligible. For moderate
    ``|l|`` the interval is split at the zeros of cos(q l) and each lobe is
    integrated separately; for strongly oscillating cases QUADPACK's
    Fourier-weighted rule takes over.
    """
    _check_alpha_gamma(alpha, gamma)
    upper = integration_limit(alpha, gamma)
    al = abs(float(l))

    def envelope(q: float) -> float:
        return math.exp(-gamma * q ** alpha)

    half_periods = al * upper / math.pi
    if half_periods > MAX_SPLIT_PIECES:
        value, _ = integrate.quad(envelope, 0.0, upper, weight="cos", wvar=al,
                                  epsabs=QUAD_EPSABS, limit=500)
        return max(value / math.pi, 0.0)

    def integrand(q: float) -> float:
        return math.exp(-gamma * q ** alpha) * math.cos(q * al)

    edges = [0.0]
    if al > 0.0:
        k = 0
        while True:
            zero = (k + 0.5) * math.pi / al
            if zero >= upper:
                break
            edges.append(zero)
            k += 1
    edges.append(upper)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        piece, _ = integrate.quad(integrand, lo, hi, epsabs=QUAD_EPSABS / len(edges), limit=200)
        total += piece
    return max(total / math.pi, 0.0)


def tail_approx(alpha: float, l: float) -> float:
    """Large-``l`` power-law approximation ``l**-alpha`` (scale fixed at 1)."""
    if not l > 0:
        raise ParameterDomainError(f"l must be positive, got {l}")
    return l ** -alpha


def mean_flights(geom: SearchGeometry, alpha: float) -> float:
    """Mean number of flights between successive target sites."""
    if not 0.0 < alpha <= 2.0:
        raise ParameterDomainError(f"alpha must lie in (0, 2], got {alpha}")
    return geom.ratio ** ((alpha - 1.0) / 2.0)


def optimal_beta(geom: SearchGeometry) -> float:
    ratio = geom.ratio
    if not ratio > 1.0:
        raise ParameterDomainError(f"lam / r_v must exceed 1, got {ratio}")
    return 1.0 / math.log(ratio) ** 2


def optimal_alpha(geom: SearchGeometry) -> float:
    """Most efficient stability exponent, ``2 - 1 / ln(lam / r_v)**2``."""
    return 2.0 - optimal_beta(geom)
