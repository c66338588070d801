"""Per-hop SINR law when the aggregate interference is generalized Gamma.

The hop SINR is Gamma_h = Omega g / (sigma^2 + Y) with g ~ Gamma(m, 1/m).
Conditioning on Y gives

    F(u) = E[ P(m, alpha u (sigma^2 + Y)) ],   alpha = m / Omega,

which is evaluated by quadrature over the Gamma variate S = (Y/a)^p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special as sc

from .gga import fit_gga
from .interference import FixedField, RandomField, aggregate_moments_random
from .specialfn import GGDist, QuadratureSpec, gg_moment, integrate_semi_infinite


@dataclass(frozen=True)
class HopConfig:
    """One hop: Nakagami signal, noise, and an interference description.

    Random-track hops carry the fitted ``gg``; a GGDist may also be given
    without a field, which models one GG interferer exactly.
    """

    signal_m: int
    signal_omega: float
    noise_power: float
    field: RandomField | FixedField | None = None
    gg: GGDist | None = None

    def __post_init__(self):
        if int(self.signal_m) != self.signal_m or self.signal_m < 1:
            raise ValueError("signal m must be a positive integer")
        if not self.signal_omega > 0:
            raise ValueError("signal Omega must be positive")
        if self.noise_power < 0:
            raise ValueError("noise power must be >= 0")
        if isinstance(self.field, RandomField) and self.gg is None:
            raise ValueError("random-field hops need a fitted GGDist (use HopConfig.fitted)")
        if self.field is None and self.gg is None:
            raise ValueError("hop needs an interference description")

    @property
    def alpha(self) -> float:
        return self.signal_m / self.signal_omega

    @property
    def is_fixed(self) -> bool:
        return isinstance(self.field, FixedField)

    @classmethod
    def fitted(cls, signal_m: int, signal_omega: float, noise_power: float,
               field: RandomField, quad: QuadratureSpec | None = None) -> "HopConfig":
        gg = fit_gga(aggregate_moments_random(field, quad)).params
        return cls(signal_m, signal_omega, noise_power, field, gg)


@dataclass(frozen=True)
class SeriesOrder:
    """Truncation order of the small-u CDF series, one per hop."""

    sr: int = 3
    rd: int = 3

    def __post_init__(self):
        if self.sr < 0 or self.rd < 0:
            raise ValueError("series orders must be >= 0")


@dataclass(frozen=True)
class SeriesValue:
    value: np.ndarray
    out_of_range: np.ndarray

    @property
    def any_clamped(self) -> bool:
        return bool(np.any(self.out_of_range))


def _as_grid(u):
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(u_arr < 0):
        raise ValueError("SINR argument must be >= 0")
    return u_arr


def _unwrap(u, out):
    return float(out[0]) if np.ndim(u) == 0 else out


def _gg_expectation(gg: GGDist, h: Callable[[np.ndarray], np.ndarray],
                    quad: QuadratureSpec) -> np.ndarray:
    """E[h(Y)] for Y ~ GG; h maps a 1-D array of y to shape (len(y), n)."""
    k, p = gg.gamma_shape, gg.p
    if k >= 1.0:
        lg = sc.gammaln(k)

        def f(s):
            w = np.exp((k - 1.0) * np.log(s) - s - lg)
            return h(gg.a * s ** (1.0 / p)) * w[:, None]

        return integrate_semi_infinite(f, quad, scale=k).value
    # s = v^(1/k) removes the s^(k-1) singularity at the origin
    lg1 = sc.gammaln(k + 1.0)

    def f(v):
        s = v ** (1.0 / k)
        w = np.exp(-s - lg1)
        return h(gg.a * s ** (1.0 / p)) * w[:, None]

    return integrate_semi_infinite(f, quad, scale=1.0).value


def hop_cdf_gga(u, hop: HopConfig, quad: QuadratureSpec | None = None):
    """CDF of the hop SINR at u (scalar or array)."""
    quad = quad or QuadratureSpec()
    grid = _as_grid(u)
    m, sig2, al = hop.signal_m, hop.noise_power, hop.alpha
    pos = grid > 0
    out = np.zeros_like(grid)
    if np.any(pos):
        ug = grid[pos]
        out[pos] = _gg_expectation(
            hop.gg, lambda y: sc.gammainc(m, al * np.outer(sig2 + y, ug)), quad)
    return _unwrap(u, np.clip(out, 0.0, 1.0))


def hop_ccdf_gga(u, hop: HopConfig, quad: QuadratureSpec | None = None):
    """Complementary CDF, accurate where the CDF is close to one."""
    quad = quad or QuadratureSpec()
    grid = _as_grid(u)
    m, sig2, al = hop.signal_m, hop.noise_power, hop.alpha
    out = _gg_expectation(hop.gg, lambda y: sc.gammaincc(m, al * np.outer(sig2 + y, grid)), quad)
    return _unwrap(u, np.clip(out, 0.0, 1.0))


def hop_pdf_gga(u, hop: HopConfig, quad: QuadratureSpec | None = None):
    """Density of the hop SINR at u (scalar or array)."""
    quad = quad or QuadratureSpec()
    grid = _as_grid(u)
    m, sig2, al = hop.signal_m, hop.noise_power, hop.alpha
    lgm = math.lgamma(m)
    pos = grid > 0
    out = np.zeros_like(grid)
    if m == 1 and np.any(~pos):
        out[~pos] = al * float(_gg_expectation(hop.gg, lambda y: (sig2 + y)[:, None], quad)[0])
    if np.any(pos):
        ug = grid[pos]

        def h(y):
            z = sig2 + y
            w = al * np.outer(z, ug)
            with np.errstate(divide="ignore"):
                logv = m * np.log(al * z)[:, None] + (m - 1) * np.log(ug)[None, :] - w - lgm
            return np.exp(logv)

        out[pos] = _gg_expectation(hop.gg, h, quad)
    return _unwrap(u, np.maximum(out, 0.0))


def hop_moments_gg(hop: HopConfig, k):
    """E[Y^k] under the hop's fitted GG law."""
    if hop.gg is None:
        raise ValueError("hop has no GG interference law")
    return gg_moment(hop.gg, k)


def noise_plus_interference_moments(sigma2: float, y_moment: Callable[[int], float], order: int) -> list[float]:
    """E[(sigma^2 + Y)^j] for j = 0..order from raw moments of Y."""
    ym = [1.0] + [float(y_moment(h)) for h in range(1, order + 1)]
    out = []
    for j in range(order + 1):
        out.append(math.fsum(math.comb(j, h) * sigma2 ** (j - h) * ym[h] for h in range(j + 1)))
    return out


def series_cdf(u, m: int, alpha: float, z_moments: list[float], order: int) -> SeriesValue:
    """Small-u expansion of E[P(m, alpha u Z)] truncated after order+1 terms.

    Uses P(m, x) = x^m / Gamma(m) * sum_n (-x)^n / (n! (m + n)) and takes the
    expectation term by term; needs E[Z^j] for j up to m + order.
    """
    grid = _as_grid(u)
    x = alpha * grid
    total = np.zeros_like(grid)
    for n in range(order + 1):
        j = m + n
        coef = (-1) ** n * z_moments[j] / (math.factorial(m - 1) * math.factorial(n) * j)
        total = total + coef * x ** j
    bad = (total < 0) | (total > 1)
    return SeriesValue(np.clip(total, 0.0, 1.0), bad)


def hop_cdf_highsinr(u, hop: HopConfig, order: int = 3) -> SeriesValue:
    """Truncated small-u CDF series for a GG-interference hop."""
    if hop.gg is None:
        raise ValueError("hop has no GG interference law")
    zm = noise_plus_interference_moments(hop.noise_power, lambda h: gg_moment(hop.gg, h),
                                         hop.signal_m + order)
    return series_cdf(u, hop.signal_m, hop.alpha, zm, order)
