"""Generalized-Gamma moment matching for aggregate interference.

The fit works with k = d/p and q = 1/p, for which the GG raw moments are
E[Y^c] = a^c Gamma(k + c q) / Gamma(k).  The two scale-free ratios
m1^2/m2 and m1 m2/m3 pin down (k, q); the mean then fixes a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sc

from .interference import MomentTriple
from .specialfn import GGDist, gg_moment


class GGAFitError(ValueError):
    """Moment matching failed.  ``report`` holds the best iterate when one exists."""

    def __init__(self, message, report: "FitReport | None" = None):
        super().__init__(message)
        self.report = report


class DegenerateMomentsError(GGAFitError):
    pass


@dataclass(frozen=True)
class FitReport:
    params: GGDist
    residuals: tuple[float, float, float]
    iterations: int
    converged: bool


def gga_residual(params: GGDist, moments: MomentTriple) -> tuple[float, float, float]:
    """Relative mismatch |E[Y^k] - m_k| / m_k for k = 1, 2, 3."""
    target = moments.as_tuple()
    return tuple(abs(gg_moment(params, k) - t) / t for k, t in zip((1, 2, 3), target))


def _equations(x, log_r1, log_r2):
    k, q = math.exp(x[0]), math.exp(x[1])
    l0, l1, l2, l3 = sc.gammaln([k, k + q, k + 2 * q, k + 3 * q])
    g = np.array([2 * l1 - l0 - l2 - log_r1,
                  l1 + l2 - l0 - l3 - log_r2])
    p0, p1, p2, p3 = sc.digamma([k, k + q, k + 2 * q, k + 3 * q])
    jac = np.array([
        [k * (2 * p1 - p0 - p2), q * (2 * p1 - 2 * p2)],
        [k * (p1 + p2 - p0 - p3), q * (p1 + 2 * p2 - 3 * p3)],
    ])
    return g, jac


def _params_from(x, m1) -> GGDist:
    k, q = math.exp(x[0]), math.exp(x[1])
    a = math.exp(math.log(m1) + sc.gammaln(k) - sc.gammaln(k + q))
    return GGDist(a, k / q, 1.0 / q)


def _newton(x, log_r1, log_r2, tol, max_iter):
    g, jac = _equations(x, log_r1, log_r2)
    norm = float(np.max(np.abs(g)))
    it = 0
    while norm > tol and it < max_iter:
        it += 1
        try:
            step = np.linalg.solve(jac, -g)
        except np.linalg.LinAlgError:
            break
        # cap the step in log space, then backtrack
        big = np.max(np.abs(step))
        if big > 2.0:
            step *= 2.0 / big
        t = 1.0
        while t > 1e-8:
            x_new = x + t * step
            if np.all(np.abs(x_new) < 700):
                g_new, jac_new = _equations(x_new, log_r1, log_r2)
                n_new = float(np.max(np.abs(g_new)))
                if np.isfinite(n_new) and n_new < norm:
                    break
            t *= 0.5
        else:
            break
        x, g, jac, norm = x_new, g_new, jac_new, n_new
    return x, norm, it


def fit_gga(moments: MomentTriple, tol: float = 1e-10, max_iter: int = 200) -> FitReport:
    """Match a GGDist to three raw moments.

    Raises DegenerateMomentsError when m2 <= m1^2 or m3 <= m1 m2, and
    GGAFitError when no start point converges.
    """
    m1, m2, m3 = moments.as_tuple()
    var_rel = m2 / m1 ** 2 - 1.0
    if not var_rel > 1e-12 or not m3 > m1 * m2 * (1 + 1e-12):
        raise DegenerateMomentsError(f"moments {moments} have no spread; GG fit undefined")
    log_r1 = 2 * math.log(m1) - math.log(m2)
    log_r2 = math.log(m1) + math.log(m2) - math.log(m3)

    k0 = 1.0 / var_rel
    starts = [(k0, 1.0), (k0, 0.5), (k0, 2.0), (1.0, 1.0), (k0 * 4, 4.0), (k0 / 4, 0.25)]
    candidates = []
    total_iter = 0
    best = None
    for k_init, q_init in starts:
        x, norm, it = _newton(np.log([k_init, q_init]), log_r1, log_r2, tol, max_iter)
        total_iter += it
        try:
            params = _params_from(x, m1)
        except (ValueError, OverflowError):
            continue
        res = gga_residual(params, moments)
        rep = FitReport(params, res, total_iter, norm <= tol)
        if best is None or norm < best[0]:
            best = (norm, rep)
        if norm <= tol:
            candidates.append(rep)
            if res[2] <= 1e-8:
                break
    if not candidates:
        raise GGAFitError("GG moment equations did not converge", best[1] if best else None)
    chosen = min(candidates, key=lambda r: r.residuals[2])
    return FitReport(chosen.params, chosen.residuals, total_iter, True)


def gg_moments(dist: GGDist) -> MomentTriple:
    return MomentTriple(*(gg_moment(dist, k) for k in (1, 2, 3)))
