"""Special functions and quadrature used by the outage formulas.

Everything here is a pure function of its arguments.  Array arguments are
accepted wherever the underlying formula vectorizes cleanly; the Gauss
hypergeometric function is scalar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special as sc


class QuadratureError(RuntimeError):
    """Adaptive quadrature hit its subdivision budget before converging."""

    def __init__(self, message, value, error):
        super().__init__(message)
        self.value = value
        self.error = error


class HypergeometricError(ArithmeticError):
    pass


@dataclass(frozen=True)
class GGDist:
    """Generalized Gamma law with density p x^(d-1) exp(-(x/a)^p) / (a^d Gamma(d/p))."""

    a: float
    d: float
    p: float

    def __post_init__(self):
        if not (self.a > 0 and self.d > 0 and self.p > 0):
            raise ValueError(f"GGDist parameters must be positive, got {self}")

    @property
    def gamma_shape(self) -> float:
        # (Y/a)^p ~ Gamma(d/p, 1)
        return self.d / self.p


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-300
    max_subdivisions: int = 4000
    tail_cutoff_mass: float = 1e-14

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if not 0 < self.tail_cutoff_mass < 1:
            raise ValueError("tail_cutoff_mass must lie in (0, 1)")


@dataclass(frozen=True)
class QuadResult:
    value: float | np.ndarray
    error: float | np.ndarray
    evaluations: int


# --------------------------------------------------------------------------
# Gamma-family scalars
# --------------------------------------------------------------------------

def ln_gamma(x):
    """Natural log of the Gamma function for x > 0."""
    if np.ndim(x) == 0:
        x = float(x)
        if not x > 0:
            raise ValueError(f"ln_gamma requires x > 0, got {x}")
        return math.lgamma(x)
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("ln_gamma requires x > 0")
    return sc.gammaln(x)


def lower_incomplete_gamma_regularized(s, x):
    """P(s, x) = gamma(s, x) / Gamma(s), the Gamma(s, 1) CDF at x."""
    s_arr = np.asarray(s, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if np.any(~(s_arr > 0)) or np.any(~(x_arr >= 0)):
        raise ValueError("lower_incomplete_gamma_regularized requires s > 0 and x >= 0")
    out = sc.gammainc(s_arr, x_arr)
    return float(out) if out.ndim == 0 else out


def beta(a, b):
    """Euler Beta function B(a, b) for positive arguments."""
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    if np.any(~(a_arr > 0)) or np.any(~(b_arr > 0)):
        raise ValueError("beta requires positive arguments")
    out = sc.beta(a_arr, b_arr)
    return float(out) if out.ndim == 0 else out


def gg_moment(dist: GGDist, c):
    """Raw moment E[Y^c] of a generalized Gamma variate."""
    c = np.asarray(c, dtype=float)
    if np.any(c < 0):
        raise ValueError("moment order must be >= 0")
    k = dist.gamma_shape
    out = np.exp(c * math.log(dist.a) + sc.gammaln(k + c / dist.p) - sc.gammaln(k))
    return float(out) if out.ndim == 0 else out


def gg_logpdf(dist: GGDist, x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = x / dist.a
        out = (math.log(dist.p) - math.log(dist.a) - sc.gammaln(dist.gamma_shape)
               + (dist.d - 1.0) * np.log(z) - z ** dist.p)
    out = np.where(x > 0, out, -np.inf)
    if dist.d == 1.0:
        out = np.where(x == 0, math.log(dist.p) - math.log(dist.a) - sc.gammaln(1.0 / dist.p), out)
    elif dist.d < 1.0:
        out = np.where(x == 0, np.inf, out)
    return out


def gg_pdf(dist: GGDist, x):
    """Generalized Gamma density; zero for x < 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("gg_pdf requires x >= 0")
    out = np.exp(gg_logpdf(dist, x))
    return float(out) if out.ndim == 0 else out


def gg_cdf(dist: GGDist, x):
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    out = sc.gammainc(dist.gamma_shape, (x / dist.a) ** dist.p)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# Gauss hypergeometric function
# --------------------------------------------------------------------------

_SERIES_MAX_TERMS = 200_000
_DIRECT_MAX_TERMS = 20_000


def _is_nonpos_int(v: float) -> bool:
    return v <= 0 and v == math.floor(v)


def _gamma_ratio(num, den) -> float:
    """prod Gamma(num) / prod Gamma(den); a pole in den gives 0."""
    for v in den:
        if _is_nonpos_int(v):
            return 0.0
    for v in num:
        if _is_nonpos_int(v):
            raise HypergeometricError(f"Gamma pole at {v}")
    log_mag = sum(sc.gammaln(v) for v in num) - sum(sc.gammaln(v) for v in den)
    sign = np.prod([sc.gammasgn(v) for v in num]) * np.prod([sc.gammasgn(v) for v in den])
    return float(sign * math.exp(log_mag))


def _series(a, b, c, z, terms=None, max_terms=_SERIES_MAX_TERMS):
    """Maclaurin series; returns (value, trustworthy)."""
    total = 1.0
    term = 1.0
    biggest = 1.0
    n = 0
    limit = max_terms if terms is None else terms
    small = 0
    converged = terms is not None
    while n < limit:
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        total += term
        n += 1
        biggest = max(biggest, abs(term))
        if term == 0.0:
            converged = True
            break
        if terms is None and abs(term) <= 1e-17 * abs(total):
            small += 1
            if small >= 2:
                converged = True
                break
        else:
            small = 0
    # more than ~5 digits lost to cancellation is not acceptable
    return total, converged and biggest <= 1e5 * abs(total)


def _direct_terms_estimate(a, b, z) -> float:
    if abs(z) <= 0.5:
        return 0.0
    return 40.0 / -math.log(abs(z)) + abs(a) + abs(b)


def _terminating(a, b, c, z) -> float:
    n = int(round(-a)) if _is_nonpos_int(a) else int(round(-b))
    if _is_nonpos_int(a) and _is_nonpos_int(b):
        n = min(int(round(-a)), int(round(-b)))
    return _series(a, b, c, z, terms=n)[0]


def _checked_series(a, b, c, z) -> float:
    value, _ = _series(a, b, c, z)
    return value


def _one_minus_z(a, b, c, z, w=None) -> float:
    """Evaluate via the 1 - z connection formulas, including integer c - a - b."""
    if w is None:
        w = 1.0 - z
    m = c - a - b
    m_int = round(m)
    if m < 0:
        # Euler transformation flips the sign of c - a - b.
        return w ** m * gauss_2f1(c - a, c - b, c, z, one_minus_z=w)
    if abs(m - m_int) > 1e-12:
        t1 = _gamma_ratio([c, m], [c - a, c - b])
        t2 = _gamma_ratio([c, -m], [a, b])
        out = 0.0
        if t1 != 0.0:
            out += t1 * _checked_series(a, b, a + b - c + 1.0, w)
        if t2 != 0.0:
            out += t2 * w ** m * _checked_series(c - a, c - b, c - a - b + 1.0, w)
        return out
    m = int(m_int)
    # logarithmic case, c = a + b + m with m >= 0
    finite = 0.0
    if m > 0:
        pref = _gamma_ratio([m, c], [a + m, b + m])
        term = 1.0
        acc = 1.0
        for n in range(1, m):
            term *= (a + n - 1) * (b + n - 1) / (n * (n - m)) * w
            acc += term
        finite = pref * acc
    pref2 = _gamma_ratio([c], [a, b])
    if pref2 == 0.0:
        return finite
    lw = math.log(w)
    psi1 = sc.psi(1.0)
    psim = sc.psi(m + 1.0)
    psia = sc.psi(a + m)
    psib = sc.psi(b + m)
    coef = 1.0 / math.factorial(m)
    total = 0.0
    n = 0
    small = 0
    while n < _SERIES_MAX_TERMS:
        t = coef * (lw - psi1 - psim + psia + psib)
        total += t
        if t == 0.0 or abs(t) <= 1e-17 * abs(total):
            small += 1
            if small >= 2 and n > 2:
                break
        else:
            small = 0
        coef *= (a + m + n) * (b + m + n) / ((n + 1) * (n + m + 1)) * w
        psi1 += 1.0 / (n + 1)
        psim += 1.0 / (n + m + 1)
        psia += 1.0 / (a + m + n)
        psib += 1.0 / (b + m + n)
        n += 1
    else:
        raise HypergeometricError(f"2F1({a},{b};{c};{z}) log series did not converge")
    return finite - (-w) ** m * pref2 * total


def gauss_2f1(a: float, b: float, c: float, z: float, *, one_minus_z: float | None = None) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; z) for real z <= 1.

    Uses the Maclaurin series for |z| <= 1/2, the Pfaff transformation for
    z < -1/2 and the 1 - z connection formulas (with the logarithmic limits
    when c - a - b is an integer) for 1/2 < z < 1.

    Callers that know 1 - z more accurately than z itself (arguments very
    close to 1) should pass it as ``one_minus_z``; it then overrides z.
    """
    w = None
    if one_minus_z is not None:
        w = float(one_minus_z)
        if w < 0.0 or math.isnan(w):
            raise HypergeometricError(f"1 - z = {w} is negative")
        z = 1.0 - w
    a, b, c, z = float(a), float(b), float(c), float(z)
    if _is_nonpos_int(c):
        raise HypergeometricError(f"c = {c} is a nonpositive integer")
    if z > 1.0 or math.isnan(z):
        raise HypergeometricError(f"z = {z} outside (-inf, 1]")
    if z == 0.0 or a == 0.0 or b == 0.0:
        return 1.0
    if z == 1.0:
        if c - a - b <= 0:
            raise HypergeometricError("2F1 diverges at z = 1 when c - a - b <= 0")
        return _gamma_ratio([c, c - a - b], [c - a, c - b])
    if _is_nonpos_int(a) or _is_nonpos_int(b):
        return _terminating(a, b, c, z)
    if z >= -0.5 and _direct_terms_estimate(a, b, z) < _DIRECT_MAX_TERMS:
        # Direct summation is used whenever it converges without heavy
        # cancellation; otherwise fall through to a transformation.
        value, ok = _series(a, b, c, z, max_terms=_DIRECT_MAX_TERMS)
        if ok:
            return value
    if z < 0.0:
        wz = z / (z - 1.0)
        # prefer a form that terminates
        if _is_nonpos_int(c - b) or not _is_nonpos_int(c - a):
            return (1.0 - z) ** (-a) * gauss_2f1(a, c - b, c, wz)
        return (1.0 - z) ** (-b) * gauss_2f1(c - a, b, c, wz)
    if z <= 0.5:
        value, _ = _series(a, b, c, z)
        return value
    return _one_minus_z(a, b, c, z, w)


# --------------------------------------------------------------------------
# Adaptive Gauss-Kronrod quadrature (vector-valued integrands)
# --------------------------------------------------------------------------

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes sit at the odd Kronrod positions
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[[13, 11, 9]] = _WG[:3]


def _gk15(f, lo, hi):
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = center[:, None] + half[:, None] * NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float)
    fx = fx.reshape((lo.size, NODES.size) + fx.shape[1:])
    extra = (1,) * (fx.ndim - 2)
    h = half.reshape((-1,) + extra)
    kron = h * np.einsum("ij...,j->i...", fx, KRONROD_WEIGHTS)
    gauss = h * np.einsum("ij...,j->i...", fx, GAUSS_WEIGHTS)
    return kron, np.abs(kron - gauss)


def integrate_interval(f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                       spec: QuadratureSpec | None = None, *, pieces: int = 4) -> QuadResult:
    """Adaptive 15-point Gauss-Kronrod integration of f over [lo, hi].

    ``f`` receives a 1-D array of abscissae and returns either an array of the
    same length or an array of shape (len(x), ...) for vector-valued
    integrands.  Each output component must meet
    err <= max(abs_tol, rel_tol * |value|).
    """
    spec = spec or QuadratureSpec()
    edges = np.linspace(lo, hi, pieces + 1)
    los, his = edges[:-1], edges[1:]
    vals, errs = _gk15(f, los, his)
    evaluations = 15 * los.size
    while True:
        total = vals.sum(axis=0)
        err = errs.sum(axis=0)
        tol = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(total))
        if np.all(err <= tol):
            break
        if los.size >= spec.max_subdivisions:
            raise QuadratureError(
                f"quadrature did not converge in {los.size} subintervals "
                f"(max error ratio {np.max(err / tol):.3g})", total, err)
        ratio = errs / tol
        if ratio.ndim > 1:
            ratio = ratio.reshape(ratio.shape[0], -1).max(axis=1)
        split = ratio >= 1.0 / los.size
        width = his - los
        if np.any(split & (width <= 1e-15 * max(abs(lo), abs(hi), 1e-300))):
            raise QuadratureError("quadrature subdivision reached roundoff level", total, err)
        mids = 0.5 * (los[split] + his[split])
        new_lo = np.concatenate([los[split], mids])
        new_hi = np.concatenate([mids, his[split]])
        nv, ne = _gk15(f, new_lo, new_hi)
        evaluations += 15 * new_lo.size
        keep = ~split
        los = np.concatenate([los[keep], new_lo])
        his = np.concatenate([his[keep], new_hi])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
    if np.ndim(total) == 0:
        return QuadResult(float(total), float(err), evaluations)
    return QuadResult(total, err, evaluations)


def integrate_semi_infinite(f: Callable[[np.ndarray], np.ndarray],
                            spec: QuadratureSpec | None = None, *,
                            lower: float = 0.0, scale: float = 1.0, pieces: int = 8) -> QuadResult:
    """Integrate f over (lower, inf) through x = lower + scale * t / (1 - t)."""
    if not scale > 0:
        raise ValueError("scale must be positive")

    def mapped(t):
        one_minus = 1.0 - t
        x = lower + scale * t / one_minus
        jac = scale / (one_minus * one_minus)
        fx = np.asarray(f(x), dtype=float)
        return fx * jac.reshape((-1,) + (1,) * (fx.ndim - 1))

    return integrate_interval(mapped, 0.0, 1.0, spec, pieces=pieces)
