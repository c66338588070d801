"""Power-domain Monte Carlo simulator for relay-selection outage.

Every trial draws fresh interference for each hop of each relay, forms the
hop SINRs, the end-to-end SINR of each relay and finally the best relay.
Trials are processed in fixed-size batches; batch ``b`` uses the stream
spawned from ``SeedSequence(seed)`` at index ``b``, so results depend only on
(seed, trials, batch, config).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .endtoend import SystemConfig
from .hopdist_random import HopConfig
from .interference import FixedField, RandomField, path_loss
from .specialfn import GGDist


@dataclass(frozen=True)
class McSpec:
    trials: int
    seed: int = 0
    batch: int = 50_000

    def __post_init__(self):
        if self.trials < 1 or self.batch < 1:
            raise ValueError("trials and batch must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class McEstimate:
    """Outage estimates on a threshold grid from one set of trials."""

    thresholds: np.ndarray
    counts: np.ndarray
    trials: int
    seed: int

    @property
    def outage(self) -> np.ndarray:
        return self.counts / self.trials

    @property
    def stderr(self) -> np.ndarray:
        p = self.outage
        return np.sqrt(p * (1.0 - p) / self.trials)


def sample_fading_power(m: int, size, rng: np.random.Generator) -> np.ndarray:
    """Unit-mean Gamma(m, 1/m) power gains."""
    if m < 1:
        raise ValueError("fading m must be >= 1")
    return rng.gamma(m, 1.0 / m, size)


def _sample_random(field: RandomField, n: int, rng) -> np.ndarray:
    if field.distance_pdf is not None:
        raise ValueError("simulation supports the uniform-disc distance law only")
    counts = rng.poisson(field.lambda_mean, n)
    total = int(counts.sum())
    if total == 0:
        return np.zeros(n)
    dist = field.disc_radius * np.sqrt(rng.random(total))
    power = field.power_product * path_loss(dist, field.pathloss) * sample_fading_power(
        field.fading_m, total, rng)
    owner = np.repeat(np.arange(n), counts)
    return np.bincount(owner, weights=power, minlength=n)


def _sample_fixed(field: FixedField, n: int, rng) -> np.ndarray:
    y = np.zeros(n)
    for om, m in zip(field.omegas, field.shapes):
        y += om * sample_fading_power(int(m), n, rng)
    return y


def sample_interference(field: RandomField | FixedField | GGDist, n: int,
                        rng: np.random.Generator) -> np.ndarray:
    """n independent draws of the aggregate interference power."""
    if isinstance(field, RandomField):
        return _sample_random(field, n, rng)
    if isinstance(field, FixedField):
        return _sample_fixed(field, n, rng)
    if isinstance(field, GGDist):
        return field.a * rng.gamma(field.gamma_shape, 1.0, n) ** (1.0 / field.p)
    raise TypeError(f"cannot sample interference from {type(field).__name__}")


def _inverse_hop_sinr(hop: HopConfig, n: int, rng) -> np.ndarray:
    # 1/Gamma_h = (sigma^2 + Y) / (Omega g); stays finite when Y = sigma^2 = 0
    source = hop.field if hop.field is not None else hop.gg
    z = hop.noise_power + sample_interference(source, n, rng)
    return z / (hop.signal_omega * sample_fading_power(hop.signal_m, n, rng))


def sample_best_sinr(system: SystemConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    """Largest end-to-end SINR over the relays for n trials."""
    best = np.zeros(n)
    for link in system.links:
        rs = _inverse_hop_sinr(link.hop_sr, n, rng)
        rd = _inverse_hop_sinr(link.hop_rd, n, rng)
        inv = rs + rd + rs * rd
        with np.errstate(divide="ignore"):
            best = np.maximum(best, 1.0 / inv)
    return best


def estimate_outage(system: SystemConfig, mc: McSpec) -> McEstimate:
    """Fraction of trials whose best relay falls below each threshold."""
    grid = np.asarray(system.thresholds, dtype=float)
    order = np.argsort(grid)
    counts = np.zeros(grid.size, dtype=np.int64)
    n_batches = math.ceil(mc.trials / mc.batch)
    streams = np.random.SeedSequence(mc.seed).spawn(n_batches)
    for b, ss in enumerate(streams):
        n = min(mc.batch, mc.trials - b * mc.batch)
        best = np.sort(sample_best_sinr(system, n, np.random.Generator(np.random.PCG64(ss))))
        counts[order] += np.searchsorted(best, grid[order], side="left")
    return McEstimate(grid, counts, mc.trials, mc.seed)
