"""Path loss and aggregate interference power.

A random field places a Poisson number of interferers uniformly on a disc
around the receiver; a fixed field lists interferers with known distances.
Each interferer contributes K*P*eta(l)*g with unit-mean Gamma fading g.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np
from scipy import special as sc
from scipy import stats

from .specialfn import QuadratureSpec, integrate_interval


class EmptyFieldError(ValueError):
    """Aggregate interference is identically zero, so its moments are degenerate."""


@dataclass(frozen=True)
class PathLoss:
    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("path-loss exponent must be positive")


def path_loss(l, pl: PathLoss):
    """Non-singular attenuation 1 / (l**beta + 1)."""
    l_arr = np.asarray(l, dtype=float)
    if np.any(l_arr < 0):
        raise ValueError("distance must be nonnegative")
    out = 1.0 / (l_arr ** pl.beta + 1.0)
    return float(out) if out.ndim == 0 else out


def disc_distance_pdf(radius: float) -> Callable[[np.ndarray], np.ndarray]:
    """Distance density 2l/L^2 of a point uniform on a disc of radius L."""
    return lambda l: 2.0 * l / radius ** 2


@dataclass(frozen=True)
class RandomField:
    lambda_mean: float
    disc_radius: float
    power_product: float
    fading_m: int
    pathloss: PathLoss
    # Optional replacement for the uniform-disc distance law on (0, disc_radius).
    distance_pdf: Callable | None = dc_field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.lambda_mean < 0:
            raise ValueError("mean interferer count must be >= 0")
        if not (self.disc_radius > 0 and self.power_product > 0):
            raise ValueError("disc radius and power product must be positive")
        if int(self.fading_m) != self.fading_m or self.fading_m < 1:
            raise ValueError("interferer fading m must be a positive integer")


@dataclass(frozen=True)
class Interferer:
    distance: float
    power_product: float
    fading_m: int

    def __post_init__(self):
        if self.distance < 0 or not self.power_product > 0:
            raise ValueError("invalid interferer distance or power")
        if int(self.fading_m) != self.fading_m or self.fading_m < 1:
            raise ValueError("interferer fading m must be a positive integer")


@dataclass(frozen=True)
class FixedField:
    interferers: tuple[Interferer, ...]
    pathloss: PathLoss

    def __post_init__(self):
        object.__setattr__(self, "interferers", tuple(self.interferers))
        if not self.interferers:
            raise ValueError("a fixed field needs at least one interferer")

    @property
    def omegas(self) -> np.ndarray:
        """Mean received power K*P*eta(l) of each interferer."""
        return np.array([it.power_product * path_loss(it.distance, self.pathloss)
                         for it in self.interferers])

    @property
    def shapes(self) -> np.ndarray:
        return np.array([it.fading_m for it in self.interferers], dtype=int)

    @classmethod
    def identical(cls, count: int, distance: float, power_product: float, fading_m: int,
                  pathloss: PathLoss) -> "FixedField":
        return cls(tuple(Interferer(distance, power_product, fading_m) for _ in range(count)), pathloss)


@dataclass(frozen=True)
class MomentTriple:
    m1: float
    m2: float
    m3: float

    def __post_init__(self):
        if not self.m1 > 0:
            raise ValueError("first moment must be positive")
        slack = 1e-12
        if self.m2 < self.m1 ** 2 * (1 - slack) or self.m3 < self.m1 * self.m2 * (1 - slack):
            raise ValueError(f"moments violate m2 >= m1^2 or m3 >= m1*m2: {self}")

    def scaled(self, s: float) -> "MomentTriple":
        return MomentTriple(self.m1 * s, self.m2 * s ** 2, self.m3 * s ** 3)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.m1, self.m2, self.m3)


def per_interferer_fading_moment(m: int, k: int) -> float:
    """E[g^k] for g ~ Gamma(m, 1/m)."""
    if m < 1 or k not in (1, 2, 3):
        raise ValueError("need m >= 1 and k in {1, 2, 3}")
    out = 1.0
    for j in range(1, k):
        out *= (m + j) / m
    return out


def eta_moment(k: int, field: RandomField, quad: QuadratureSpec | None = None) -> float:
    """Average of eta(l)^k over the field's distance law on (0, L)."""
    quad = quad or QuadratureSpec(rel_tol=1e-12)
    pdf = field.distance_pdf or disc_distance_pdf(field.disc_radius)
    beta_ = field.pathloss.beta
    res = integrate_interval(lambda l: pdf(l) / (l ** beta_ + 1.0) ** k,
                             0.0, field.disc_radius, quad, pieces=8)
    return res.value


def poisson_pmf(i, lambda_mean: float):
    i_arr = np.asarray(i)
    if np.any(i_arr < 0):
        raise ValueError("count must be >= 0")
    if lambda_mean == 0:
        out = (i_arr == 0).astype(float)
    else:
        out = np.exp(i_arr * math.log(lambda_mean) - lambda_mean - sc.gammaln(i_arr + 1.0))
    return float(out) if out.ndim == 0 else out


def poisson_truncation(lambda_mean: float, tail_mass: float) -> int:
    """Smallest N with P(I > N) < tail_mass."""
    if not 0 < tail_mass < 1:
        raise ValueError("tail mass must lie in (0, 1)")
    if lambda_mean == 0:
        return 0
    dist = stats.poisson(lambda_mean)
    n = max(int(dist.isf(tail_mass)) - 2, 0)
    while dist.sf(n) >= tail_mass:
        n += 1
    while n > 0 and dist.sf(n - 1) < tail_mass:
        n -= 1
    return n


def _mu(field: RandomField, quad) -> tuple[float, float, float]:
    kp, m = field.power_product, field.fading_m
    return tuple(kp ** k * eta_moment(k, field, quad) * per_interferer_fading_moment(m, k)
                 for k in (1, 2, 3))


def aggregate_moments_random(field: RandomField, quad: QuadratureSpec | None = None) -> MomentTriple:
    """First three raw moments of the compound-Poisson aggregate power."""
    if field.lambda_mean == 0:
        raise EmptyFieldError("field has no interferers (lambda = 0)")
    lam = field.lambda_mean
    mu1, mu2, mu3 = _mu(field, quad)
    m1 = lam * mu1
    m2 = lam * mu2 + m1 ** 2
    m3 = lam * mu3 + 3 * lam ** 2 * mu1 * mu2 + m1 ** 3
    return MomentTriple(m1, m2, m3)


def aggregate_moments_poisson_series(field: RandomField, quad: QuadratureSpec | None = None) -> MomentTriple:
    """Same moments by conditioning on the interferer count and summing a
    truncated Poisson series.  Slower; kept as an independent cross-check."""
    if field.lambda_mean == 0:
        raise EmptyFieldError("field has no interferers (lambda = 0)")
    quad = quad or QuadratureSpec(rel_tol=1e-12)
    mu1, mu2, mu3 = _mu(field, quad)
    n = np.arange(poisson_truncation(field.lambda_mean, quad.tail_cutoff_mass) + 1, dtype=float)
    w = poisson_pmf(n, field.lambda_mean)
    c1 = n * mu1
    c2 = n * mu2 + n * (n - 1) * mu1 ** 2
    c3 = n * mu3 + 3 * n * (n - 1) * mu1 * mu2 + n * (n - 1) * (n - 2) * mu1 ** 3
    return MomentTriple(float(w @ c1), float(w @ c2), float(w @ c3))


def aggregate_moments_fixed(field: FixedField) -> MomentTriple:
    """Raw moments of a sum of independent Gamma(m_i, Omega_i/m_i) variates."""
    om, sh = field.omegas, field.shapes
    k1 = float(np.sum(om))
    k2 = float(np.sum(om ** 2 / sh))
    k3 = float(np.sum(2 * om ** 3 / sh ** 2))
    return MomentTriple(k1, k2 + k1 ** 2, k3 + 3 * k2 * k1 + k1 ** 3)


def field_mean(field: RandomField | FixedField, quad: QuadratureSpec | None = None) -> float:
    if isinstance(field, FixedField):
        return float(np.sum(field.omegas))
    if field.lambda_mean == 0:
        return 0.0
    return field.lambda_mean * field.power_product * eta_moment(1, field, quad)
