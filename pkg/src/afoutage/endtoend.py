"""End-to-end SINR of an AF link and the relay-selection outage.

For Gamma = Gs Gd / (Gs + Gd + 1),

    F(x) = F_s(x) + int_0^inf F_d(x + x(x+1)/t) f_s(t + x) dt,

integrated after t = x s / (1 - s) with every threshold handled in one
vector-valued quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .hopdist_fixed import hop_cdf_fixed, hop_pdf_fixed
from .hopdist_random import (
    HopConfig,
    SeriesOrder,
    SeriesValue,
    hop_cdf_gga,
    hop_pdf_gga,
    noise_plus_interference_moments,
    series_cdf,
)
from .specialfn import QuadratureError, QuadratureSpec, gg_moment, integrate_interval

HopFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class RelayLink:
    hop_sr: HopConfig
    hop_rd: HopConfig


@dataclass(frozen=True)
class SystemConfig:
    links: tuple[RelayLink, ...]
    thresholds: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))
        if not self.links:
            raise ValueError("need at least one relay link")
        if not self.thresholds or any(not t > 0 for t in self.thresholds):
            raise ValueError("thresholds must be positive")


@dataclass
class OutageCurve:
    method: str
    thresholds: np.ndarray
    values: np.ndarray
    stderr: np.ndarray | None = None
    warnings: list[str] = field(default_factory=list)


class LinkEvaluationError(RuntimeError):
    def __init__(self, link_index: int, cause: Exception):
        super().__init__(f"link {link_index}: {cause}")
        self.link_index = link_index
        self.cause = cause


def rate_to_threshold(rate):
    """gamma_th = 2^(2R) - 1 for a target rate R in bit/s/Hz."""
    return np.expm1(2.0 * np.asarray(rate, dtype=float) * math.log(2.0))


def hop_functions(hop: HopConfig, quad: QuadratureSpec | None = None) -> tuple[HopFn, HopFn]:
    """(cdf, pdf) callables for a hop on either track."""
    if hop.is_fixed:
        return (lambda u: hop_cdf_fixed(u, hop)), (lambda u: hop_pdf_fixed(u, hop))
    return (lambda u: hop_cdf_gga(u, hop, quad)), (lambda u: hop_pdf_gga(u, hop, quad))


def e2e_cdf(x, link: RelayLink | None, hop_cdf_d: HopFn, hop_pdf_s: HopFn,
            quad: QuadratureSpec | None = None, hop_cdf_s: HopFn | None = None):
    """Exact end-to-end CDF at x (scalar or array).

    ``hop_cdf_s`` defaults to the first-hop CDF implied by ``link``; the
    callables let either track (or test doubles) plug in.
    """
    quad = quad or QuadratureSpec(abs_tol=1e-14)
    grid = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(grid < 0):
        raise ValueError("threshold must be >= 0")
    if hop_cdf_s is None:
        if link is None:
            raise ValueError("need hop_cdf_s or a link")
        hop_cdf_s = hop_functions(link.hop_sr, quad)[0]
    out = np.zeros_like(grid)
    pos = grid > 0
    if np.any(pos):
        xs = grid[pos]
        fs = np.asarray(hop_cdf_s(xs), dtype=float)

        def integrand(s):
            one_minus = 1.0 - s
            t = np.outer(s / one_minus, xs)                 # (n, k)
            v = xs + (xs + 1.0) * np.outer(one_minus / s, np.ones_like(xs))
            fd = np.asarray(hop_cdf_d(v.ravel()), dtype=float).reshape(v.shape)
            ps = np.asarray(hop_pdf_s((t + xs).ravel()), dtype=float).reshape(t.shape)
            jac = np.outer(1.0 / one_minus ** 2, xs)
            return fd * ps * jac

        res = integrate_interval(integrand, 0.0, 1.0, quad, pieces=8)
        out[pos] = fs + res.value
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if np.ndim(x) == 0 else out


def e2e_cdf_link(x, link: RelayLink, quad: QuadratureSpec | None = None):
    cdf_s, pdf_s = hop_functions(link.hop_sr, quad)
    cdf_d, _ = hop_functions(link.hop_rd, quad)
    return e2e_cdf(x, link, cdf_d, pdf_s, quad, hop_cdf_s=cdf_s)


def e2e_lb(x, link: RelayLink | None = None, hop_cdfs: tuple[HopFn, HopFn] | None = None,
           quad: QuadratureSpec | None = None):
    """Lower bound 1 - (1 - F_s)(1 - F_d)."""
    if hop_cdfs is None:
        hop_cdfs = (hop_functions(link.hop_sr, quad)[0], hop_functions(link.hop_rd, quad)[0])
    grid = np.atleast_1d(np.asarray(x, dtype=float))
    fs, fd = (np.asarray(h(grid), dtype=float) for h in hop_cdfs)
    out = np.clip(fs + fd - fs * fd, 0.0, 1.0)
    return float(out[0]) if np.ndim(x) == 0 else out


def _gg_series(grid, hop: HopConfig, order: int, dominant: bool) -> SeriesValue:
    sig2 = 0.0 if dominant else hop.noise_power
    zm = noise_plus_interference_moments(sig2, lambda h: gg_moment(hop.gg, h), hop.signal_m + order)
    return series_cdf(grid, hop.signal_m, hop.alpha, zm, order)


def e2e_asymptotic_gga(x, link: RelayLink, orders: SeriesOrder = SeriesOrder(),
                       dominant: bool = False) -> SeriesValue:
    """Small-x expansion F_s + F_d - F_s F_d with truncated hop series.

    ``dominant=True`` drops the noise terms (interference-limited route);
    Rayleigh hops need nothing special since m = 1 is handled directly.
    """
    grid = np.atleast_1d(np.asarray(x, dtype=float))
    fs = _gg_series(grid, link.hop_sr, orders.sr, dominant)
    fd = _gg_series(grid, link.hop_rd, orders.rd, dominant)
    val = np.clip(fs.value + fd.value - fs.value * fd.value, 0.0, 1.0)
    return SeriesValue(val, fs.out_of_range | fd.out_of_range)


def e2e_asymptotic_gga_expanded(x, link: RelayLink, n2: int, n4: int) -> np.ndarray:
    """1 - Q_s Q_d with each complementary hop CDF Taylor-expanded separately in
    exp(-alpha x Y) (order n2) and exp(-alpha x sigma^2) (order n4).

    Reproduces the doubly truncated product form; it is exact in the limit
    only when n2 and n4 reach m - 1, which the collected series avoids needing.
    """
    grid = np.atleast_1d(np.asarray(x, dtype=float))

    def q(hop: HopConfig):
        m, al, sig2 = hop.signal_m, hop.alpha, hop.noise_power
        total = np.zeros_like(grid)
        for r2 in range(m):
            for r3 in range(r2 + 1):
                for a in range(n2 + 1):
                    for b in range(n4 + 1):
                        coef = ((-1) ** (a + b) * sig2 ** (r2 - r3 + b) * al ** (a + r2 + b)
                                * gg_moment(hop.gg, a + r3)
                                / (math.factorial(a) * math.factorial(b) * math.factorial(r3)
                                   * math.factorial(r2 - r3)))
                        total = total + coef * grid ** (a + r2 + b)
        return total

    return 1.0 - q(link.hop_sr) * q(link.hop_rd)


def selection_product(per_link: Sequence[np.ndarray]) -> np.ndarray:
    """Outage of best-relay selection: product of the per-link CDFs."""
    out = np.ones_like(np.asarray(per_link[0], dtype=float))
    for v in per_link:
        out = out * np.asarray(v, dtype=float)
    return out


METHODS = ("exact", "lower_bound", "asymptotic", "closed_form")


def link_cdf(link: RelayLink, thresholds, method: str, quad: QuadratureSpec | None = None,
             orders: SeriesOrder = SeriesOrder()) -> tuple[np.ndarray, list[str]]:
    """Per-link CDF on a grid for one of METHODS."""
    grid = np.asarray(thresholds, dtype=float)
    fixed = link.hop_sr.is_fixed and link.hop_rd.is_fixed
    if method == "exact":
        return e2e_cdf_link(grid, link, quad), []
    if method == "lower_bound":
        return e2e_lb(grid, link, quad=quad), []
    if method == "asymptotic":
        if fixed:
            from .hopdist_fixed import e2e_asymptotic_fixed
            sv = e2e_asymptotic_fixed(grid, link, orders)
        else:
            sv = e2e_asymptotic_gga(grid, link, orders)
        warn = [f"series clamped at {g:.6g}" for g, bad in zip(grid, sv.out_of_range) if bad]
        return sv.value, warn
    if method == "closed_form":
        if not fixed:
            raise ValueError("closed_form is available for fixed interferers only")
        from .hopdist_fixed import e2e_cdf_dominant_fixed
        warn = []
        if link.hop_sr.noise_power > 0 or link.hop_rd.noise_power > 0:
            warn.append("closed form neglects noise")
        return e2e_cdf_dominant_fixed(grid, link), warn
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def selection_outage(system: SystemConfig, method: str, quad: QuadratureSpec | None = None,
                     orders: SeriesOrder = SeriesOrder()) -> OutageCurve:
    """Relay-selection outage over the system's threshold grid."""
    grid = np.asarray(system.thresholds)
    values, warnings = [], []
    for j, link in enumerate(system.links):
        try:
            v, w = link_cdf(link, grid, method, quad, orders)
        except (QuadratureError, ArithmeticError, ValueError) as exc:
            raise LinkEvaluationError(j, exc) from exc
        values.append(v)
        warnings.extend(f"link {j}: {msg}" for msg in w)
    return OutageCurve(method, grid, selection_product(values), None, warnings)
