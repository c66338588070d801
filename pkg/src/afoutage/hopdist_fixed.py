"""Exact hop SINR laws for fixed interferers and the fixed-track closed forms.

The aggregate interference of a fixed field is a sum of independent
Gamma(m_i, Omega_i/m_i) variates.  With integer shapes and distinct rates
lambda_i = m_i/Omega_i its density is a finite mixture

    f_Y(y) = sum_i sum_{r<=m_i} c_{i,r} y^(r-1) exp(-lambda_i y),

obtained from the partial fractions of prod_i (1 + s/lambda_i)^(-m_i).

Conditioned on Y, the hop outage event {Gamma_h <= u} has the probability
that a Poisson(alpha u (sigma^2 + Y)) count reaches m.  The noise part is
Poisson and each Gamma component contributes a negative binomial, which
gives finite sums with no subtractive cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import special as sc
from scipy import stats

from .hopdist_random import (
    HopConfig,
    SeriesOrder,
    SeriesValue,
    noise_plus_interference_moments,
    series_cdf,
)
from .interference import FixedField, Interferer
from .specialfn import beta as beta_fn, gauss_2f1


class CoincidentRatesError(ValueError):
    """Two interferers share a rate m/Omega, so the partial fractions have a repeated pole.

    Merge them with ``merge_coincident`` (shapes add) or use the i.i.d. path.
    """


_ORIGIN_TERMS = 80


@dataclass(frozen=True)
class OriginSeries:
    """f(x) = exp(log_c) x^(M-1) sum_k e_k (lam_max x)^k / Gamma(M + k), valid for all x."""

    log_c: float
    total_shape: int
    lam_max: float
    coeffs: np.ndarray

    @classmethod
    def from_components(cls, components: list[tuple[float, int]]) -> "OriginSeries":
        lam_max = max(lam for lam, _ in components)
        e = np.zeros(_ORIGIN_TERMS)
        e[0] = 1.0
        k = np.arange(_ORIGIN_TERMS)
        for lam, m in components:
            # (1 + (lam/lam_max) tau)^(-m) as a power series in tau
            f = np.exp(sc.gammaln(m + k) - sc.gammaln(m) - sc.gammaln(k + 1)) * (-lam / lam_max) ** k
            e = np.convolve(e, f)[:_ORIGIN_TERMS]
        log_c = float(sum(m * math.log(lam) for lam, m in components))
        return cls(log_c, int(sum(m for _, m in components)), lam_max, e)

    def _terms(self, x, extra: int):
        x = np.asarray(x, dtype=float)[..., None]
        k = np.arange(_ORIGIN_TERMS)
        with np.errstate(divide="ignore"):
            logmag = (self.log_c + sc.xlogy(self.total_shape - 1 + extra + k, x) + k * math.log(self.lam_max)
                      - sc.gammaln(self.total_shape + extra + k))
        return self.coeffs * np.exp(logmag)

    def pdf_terms(self, x):
        return self._terms(x, 0)

    def cdf_terms(self, x):
        return self._terms(x, 1)


@dataclass(frozen=True)
class GammaMixture:
    """f(x) = sum_t coeffs[t] x^(powers[t]-1) exp(-rates[t] x).

    With mixed signs the terms cancel near the origin, where the optional
    ``origin`` series takes over.
    """

    rates: np.ndarray
    powers: np.ndarray
    coeffs: np.ndarray
    origin: OriginSeries | None = None

    @property
    def weights(self) -> np.ndarray:
        # mass carried by each term: c Gamma(r) / rate^r
        return self.coeffs * np.exp(sc.gammaln(self.powers) - self.powers * np.log(self.rates))

    def _pick(self, mix_terms, origin_terms):
        a = mix_terms.sum(axis=-1)
        if origin_terms is None:
            return a
        # the representation with the smaller absolute term sum has less rounding
        use_origin = np.abs(origin_terms).sum(axis=-1) < np.abs(mix_terms).sum(axis=-1)
        return np.where(use_origin, origin_terms.sum(axis=-1), a)

    def pdf(self, x):
        x_arr = np.maximum(np.asarray(x, dtype=float), 0.0)
        with np.errstate(divide="ignore"):
            logt = (np.log(np.abs(self.coeffs)) + sc.xlogy(self.powers - 1, x_arr[..., None])
                    - self.rates * x_arr[..., None])
        terms = np.sign(self.coeffs) * np.exp(logt)
        orig = None if self.origin is None else self.origin.pdf_terms(x_arr)
        out = np.where(np.asarray(x, dtype=float) >= 0, self._pick(terms, orig), 0.0)
        return float(out) if out.ndim == 0 else out

    def cdf(self, x):
        x_arr = np.maximum(np.asarray(x, dtype=float), 0.0)
        terms = self.weights * sc.gammainc(self.powers, self.rates * x_arr[..., None])
        orig = None if self.origin is None else self.origin.cdf_terms(x_arr)
        # near the origin the mixture sum of CDF pieces cancels like the pdf does
        mix_abs = np.abs(self.weights) * sc.gammainc(self.powers, self.rates * x_arr[..., None])
        out = terms.sum(axis=-1)
        if orig is not None:
            use_origin = np.abs(orig).sum(axis=-1) < mix_abs.sum(axis=-1)
            out = np.where(use_origin, orig.sum(axis=-1), out)
        out = np.clip(out, 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def moment(self, k: int) -> float:
        return float(np.sum(self.weights * np.exp(sc.gammaln(self.powers + k) - sc.gammaln(self.powers)
                                                  - k * np.log(self.rates))))

    def laplace_moment(self, h: int, s):
        """E[Y^h exp(-s Y)] for s >= 0."""
        s_arr = np.asarray(s, dtype=float)[..., None]
        logt = (np.log(np.abs(self.coeffs)) + sc.gammaln(h + self.powers)
                - (h + self.powers) * np.log(s_arr + self.rates))
        out = (np.sign(self.coeffs) * np.exp(logt)).sum(axis=-1)
        return float(out) if out.ndim == 0 else out

    def negbin_tail(self, k: int, s):
        """P(M >= k) where M | Y ~ Poisson(s Y)."""
        s_arr = np.asarray(s, dtype=float)
        if k <= 0:
            return np.ones_like(s_arr)
        prob = s_arr[..., None] / (s_arr[..., None] + self.rates)
        return (self.weights * sc.betainc(k, self.powers, prob)).sum(axis=-1)

    def negbin_pmf(self, k: int, s):
        """P(M = k) where M | Y ~ Poisson(s Y)."""
        s_arr = np.asarray(s, dtype=float)[..., None]
        r = self.powers
        with np.errstate(divide="ignore"):
            logp = (sc.gammaln(k + r) - sc.gammaln(k + 1) - sc.gammaln(r)
                    + sc.xlogy(k, s_arr) + r * np.log(self.rates) - (k + r) * np.log(s_arr + self.rates))
        return (self.weights * np.exp(logp)).sum(axis=-1)


@dataclass(frozen=True)
class IidField:
    count: int
    fading_m: int
    omega: float

    def __post_init__(self):
        if self.count < 1 or self.fading_m < 1 or int(self.fading_m) != self.fading_m:
            raise ValueError("i.i.d. field needs count >= 1 and integer m >= 1")
        if not self.omega > 0:
            raise ValueError("interferer power must be positive")

    @property
    def shape(self) -> int:
        return self.count * self.fading_m

    @property
    def rate(self) -> float:
        return self.fading_m / self.omega

    @property
    def scale(self) -> float:
        return self.omega / self.fading_m

    def mixture(self) -> GammaMixture:
        k, lam = self.shape, self.rate
        logc = k * math.log(lam) - math.lgamma(k)
        return GammaMixture(np.array([lam]), np.array([k]), np.array([math.exp(logc)]))

    @classmethod
    def from_fixed(cls, field: FixedField) -> "IidField | None":
        om, sh = field.omegas, field.shapes
        if np.all(om == om[0]) and np.all(sh == sh[0]):
            return cls(len(sh), int(sh[0]), float(om[0]))
        return None


def _rates_shapes(field: FixedField):
    return [(Fraction(int(m)) / Fraction(float(om)), int(m)) for om, m in zip(field.omegas, field.shapes)]


def merge_coincident(field: FixedField) -> FixedField:
    """Combine interferers with equal rate m/Omega into one with summed shape and power."""
    groups: dict[Fraction, list[int]] = {}
    for idx, (rate, _) in enumerate(_rates_shapes(field)):
        groups.setdefault(rate, []).append(idx)
    merged = []
    om = field.omegas
    for idxs in groups.values():
        first = field.interferers[idxs[0]]
        if len(idxs) == 1:
            merged.append(first)
            continue
        m_tot = sum(field.interferers[i].fading_m for i in idxs)
        om_tot = float(sum(om[i] for i in idxs))
        scale = om_tot / om[idxs[0]]
        merged.append(Interferer(first.distance, first.power_product * scale, m_tot))
    return FixedField(tuple(merged), field.pathloss)


def _partial_fractions(components: list[tuple[Fraction, int]]) -> list[tuple[Fraction, int, Fraction]]:
    """(rate, r, c) with density sum c x^(r-1) e^(-rate x), in exact rationals."""
    rates = [lam for lam, _ in components]
    if len(set(rates)) != len(rates):
        raise CoincidentRatesError(
            "interferers with equal m/Omega give repeated poles; merge them with "
            "merge_coincident() or describe the field as IidField")
    const = Fraction(1)
    for lam, m in components:
        const *= lam ** m
    out = []
    for i, (lam_i, m_i) in enumerate(components):
        # Taylor coefficients of prod_{j != i} (delta_j + e)^(-m_j) around e = 0
        series = [Fraction(0)] * m_i
        series[0] = Fraction(1)
        lead = Fraction(1)
        for j, (lam_j, m_j) in enumerate(components):
            if j == i:
                continue
            delta = lam_j - lam_i
            lead /= delta ** m_j
            factor = [Fraction((-1) ** n * math.comb(m_j + n - 1, n)) / delta ** n for n in range(m_i)]
            series = [sum(series[a] * factor[n - a] for a in range(n + 1)) for n in range(m_i)]
        for r in range(1, m_i + 1):
            a_ir = const * lead * series[m_i - r]
            out.append((lam_i, r, a_ir / math.factorial(r - 1)))
    return out


def gamma_sum_partial_fractions(field: FixedField) -> GammaMixture:
    """Density of the aggregate power of a fixed field as a GammaMixture.

    Requires distinct rates m_i/Omega_i; raises CoincidentRatesError otherwise.
    """
    comps = _rates_shapes(field)
    terms = _partial_fractions(comps)
    origin = None
    if len(comps) > 1:
        origin = OriginSeries.from_components([(float(lam), m) for lam, m in comps])
    return GammaMixture(np.array([float(t[0]) for t in terms]),
                        np.array([t[1] for t in terms]),
                        np.array([float(t[2]) for t in terms]), origin)


@lru_cache(maxsize=256)
def interference_mixture(field: FixedField) -> GammaMixture:
    """Mixture for a hop's field: the i.i.d. law when all interferers match."""
    iid = IidField.from_fixed(field)
    if iid is not None:
        return iid.mixture()
    return gamma_sum_partial_fractions(field)


def _hop_mixture(hop: HopConfig) -> GammaMixture:
    if not isinstance(hop.field, FixedField):
        raise ValueError("hop does not carry a fixed interferer field")
    return interference_mixture(hop.field)


def _grid(u):
    g = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(g < 0):
        raise ValueError("SINR argument must be >= 0")
    return g


def _unwrap(u, out):
    return float(out[0]) if np.ndim(u) == 0 else out


def hop_cdf_fixed(u, hop: HopConfig):
    """Exact CDF of the hop SINR with fixed interferers."""
    grid = _grid(u)
    mix = _hop_mixture(hop)
    m = hop.signal_m
    s = hop.alpha * grid
    noise_mean = s * hop.noise_power
    out = stats.poisson.sf(m - 1, noise_mean)
    for j in range(m):
        out = out + stats.poisson.pmf(j, noise_mean) * mix.negbin_tail(m - j, s)
    out = np.where(grid > 0, out, 0.0)
    return _unwrap(u, np.clip(out, 0.0, 1.0))


def hop_ccdf_fixed(u, hop: HopConfig):
    """1 - CDF as the finite sum over f < m (the textbook closed form)."""
    grid = _grid(u)
    mix = _hop_mixture(hop)
    m, sig2 = hop.signal_m, hop.noise_power
    s = hop.alpha * grid
    total = np.zeros_like(grid)
    for f in range(m):
        inner = np.zeros_like(grid)
        for h in range(f + 1):
            inner = inner + math.comb(f, h) * sig2 ** (f - h) * mix.laplace_moment(h, s)
        total = total + s ** f / math.factorial(f) * inner
    return _unwrap(u, np.clip(np.exp(-s * sig2) * total, 0.0, 1.0))


def hop_pdf_fixed(u, hop: HopConfig):
    """Exact density of the hop SINR with fixed interferers."""
    grid = _grid(u)
    mix = _hop_mixture(hop)
    m, sig2, al = hop.signal_m, hop.noise_power, hop.alpha
    s = al * grid
    noise_mean = s * sig2
    pos = grid > 0
    # density = (m/u) P(N = m) with N | Y ~ Poisson(s (sigma^2 + Y))
    pm = np.zeros_like(grid)
    for h in range(m + 1):
        pm = pm + stats.poisson.pmf(m - h, noise_mean) * mix.negbin_pmf(h, s)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(pos, m * pm / np.where(pos, grid, 1.0), 0.0)
    if m == 1:
        out = np.where(pos, out, al * (sig2 + mix.moment(1)))
    return _unwrap(u, np.maximum(out, 0.0))


def hop_interference_moment(hop: HopConfig, k: int) -> float:
    return _hop_mixture(hop).moment(k)


def hop_cdf_fixed_highsinr(u, hop: HopConfig, order: int = 3) -> SeriesValue:
    """Small-u CDF series using the exact mixture moments."""
    mix = _hop_mixture(hop)
    zm = noise_plus_interference_moments(hop.noise_power, mix.moment, hop.signal_m + order)
    return series_cdf(u, hop.signal_m, hop.alpha, zm, order)


# --------------------------------------------------------------------------
# End-to-end forms.  ``link`` is any object with hop_sr and hop_rd.
# --------------------------------------------------------------------------

def _split(link):
    return link.hop_sr, link.hop_rd


def _x_grid(x):
    g = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(g < 0):
        raise ValueError("threshold must be >= 0")
    return g


def _log_dominant_integral(p, A, B, mu, C, D, nu):
    """log of int_0^inf t^(p-1) (A t + B)^(-mu) (C t + D)^(-nu) dt."""
    zeta = A * D / (B * C)
    log_pref = (-mu * math.log(B) - nu * math.log(D) + p * (math.log(D) - math.log(C))
                + sc.betaln(p, mu + nu - p))
    return log_pref + math.log(gauss_2f1(mu, p, mu + nu, 1.0 - zeta, one_minus_z=zeta))


def _dominant_ccdf_scalar(x, ms, al_s, mix_s: GammaMixture, md, al_d, mix_d: GammaMixture):
    """P(Gamma_e2e > x) with zero noise, via 2F1 closed forms."""
    terms = []
    lx, lx1 = math.log(x), math.log1p(x)
    for f in range(md):
        for lam_d, r_d, c_d in zip(mix_d.rates, mix_d.powers, mix_d.coeffs):
            C = al_d * x + lam_d
            D = al_d * x * (x + 1.0)
            nu = f + r_d
            log_d = (f * math.log(al_d) - math.lgamma(f + 1) + math.log(abs(c_d))
                     + math.lgamma(nu) + f * lx)
            for lam_s, r_s, c_s in zip(mix_s.rates, mix_s.powers, mix_s.coeffs):
                B = al_s * x + lam_s
                mu = ms + r_s
                log_s = ms * math.log(al_s) - math.lgamma(ms) + math.log(abs(c_s)) + math.lgamma(mu)
                sign = math.copysign(1.0, c_d) * math.copysign(1.0, c_s)
                for j1 in range(ms):
                    for j2 in range(f + 1):
                        lw = (math.log(math.comb(ms - 1, j1)) + (ms - 1 - j1) * lx
                              + math.log(math.comb(f, j2)) + (f - j2) * lx1)
                        li = _log_dominant_integral(j1 + j2 + r_d + 1, al_s, B, mu, C, D, nu)
                        terms.append(sign * math.exp(log_d + log_s + lw + li))
    return math.fsum(terms)


def e2e_cdf_dominant_fixed(x, link):
    """End-to-end CDF with noise neglected at both hops (closed form with 2F1).

    Works for any fixed fields whose mixtures exist (distinct rates or
    i.i.d.).  Noise powers in the link are ignored.
    """
    hs, hd = _split(link)
    mix_s, mix_d = _hop_mixture(hs), _hop_mixture(hd)
    grid = _x_grid(x)
    out = np.array([0.0 if xv == 0 else
                    1.0 - _dominant_ccdf_scalar(xv, hs.signal_m, hs.alpha, mix_s,
                                                hd.signal_m, hd.alpha, mix_d)
                    for xv in grid])
    return _unwrap(x, np.clip(out, 0.0, 1.0))


def _iid_pair(link):
    hs, hd = _split(link)
    iid_s, iid_d = IidField.from_fixed(hs.field), IidField.from_fixed(hd.field)
    if iid_s is None or iid_d is None:
        raise ValueError("both hops need i.i.d. fixed interferers")
    return hs, hd, iid_s, iid_d


def e2e_cdf_dominant_iid(x, link):
    """I.i.d. dominant-interference closed form (noise neglected)."""
    hs, hd, fs, fd = _iid_pair(link)
    ms, md = hs.signal_m, hd.signal_m
    om_s, om_d = hs.signal_omega, hd.signal_omega
    ks, kd = fs.shape, fd.shape
    th_i, th_v = fs.scale, fd.scale
    kap_s = om_s / (ms * th_i)   # rate / alpha on the first hop
    kap_d = om_d / (md * th_v)
    grid = _x_grid(x)
    out = np.zeros_like(grid)
    for n, xv in enumerate(grid):
        if xv == 0:
            continue
        lx, lx1 = math.log(xv), math.log1p(xv)
        lks, lkd = math.log(kap_s + xv), math.log(kap_d + xv)
        # complementary first-hop CDF (zero noise)
        first = math.fsum(
            math.exp(math.lgamma(f1 + ks) - math.lgamma(f1 + 1) - math.lgamma(ks)
                     + ks * math.log(kap_s) + f1 * lx - (f1 + ks) * lks)
            for f1 in range(ms))
        log1820 = (ks * math.log(kap_s) + math.log(beta_fn(1, ks)) - sc.betaln(ks, ms)
                   + (ms - 1) * lx - (ks + ms - 1) * lks
                   + math.log(gauss_2f1(1, 1 - ms, ks + 1, -kap_s / xv)))
        zeta = xv * (xv + 1.0) / ((kap_s + xv) * (kap_d + xv))
        last = []
        for f2 in range(md):
            for s1 in range(f2 + 1):
                for s2 in range(ms):
                    pexp = kd + s1 + s2 + 1
                    log19 = (math.lgamma(f2 + kd) + kd * math.log(kap_d) + ks * math.log(kap_s)
                             + math.lgamma(ks + ms) - math.lgamma(kd) - math.lgamma(ks)
                             - math.lgamma(s1 + 1) - math.lgamma(s2 + 1) - math.lgamma(f2 - s1 + 1)
                             - math.lgamma(ms - s2)
                             + sc.betaln(pexp, f2 + ks + ms - s1 - s2 - 1))
                    log21 = ((s2 + 1) * lx1 + (ms + s1) * lx - (ks + ms) * lks - pexp * lkd
                             + math.log(gauss_2f1(ks + ms, pexp, f2 + ks + ms + kd, 1.0 - zeta,
                                                  one_minus_z=zeta)))
                    last.append(math.exp(log19 + log21))
        out[n] = 1.0 - first + math.exp(log1820) - math.fsum(last)
    return _unwrap(x, np.clip(out, 0.0, 1.0))


def e2e_cdf_rayleigh_iid(x, link):
    """Single-2F1 closed form for Rayleigh signals and i.i.d. dominant interferers."""
    hs, hd, fs, fd = _iid_pair(link)
    if hs.signal_m != 1 or hd.signal_m != 1:
        raise ValueError("Rayleigh closed form needs m = 1 on both hops")
    om_s, om_d = hs.signal_omega, hd.signal_omega
    ks, kd = fs.shape, fd.shape
    th_i, th_v = fs.scale, fd.scale
    grid = _x_grid(x)
    out = np.zeros_like(grid)
    for n, xv in enumerate(grid):
        if xv == 0:
            continue
        phi22 = th_i * th_v * xv * (xv + 1.0) / ((om_s + th_i * xv) * (om_d + th_v * xv))
        lead = (math.log(ks) + kd * math.log(om_d) + ks * math.log(om_s) + sc.betaln(kd + 1, ks)
                - kd * math.log(th_v * xv + om_d) - ks * math.log(th_i * xv + om_s))
        hyp = gauss_2f1(kd + 1, ks + 1, ks + kd + 1, 1.0 - phi22, one_minus_z=phi22)
        out[n] = 1.0 - math.exp(lead) * phi22 * hyp
    return _unwrap(x, np.clip(out, 0.0, 1.0))


def e2e_cdf_rayleigh_highsinr(x, link):
    """Large-Omega limit of the Rayleigh closed form."""
    hs, hd, fs, fd = _iid_pair(link)
    grid = _x_grid(x)
    qs = (fs.scale * grid / hs.signal_omega + 1.0) ** (-fs.shape)
    qd = (fd.scale * grid / hd.signal_omega + 1.0) ** (-fd.shape)
    return _unwrap(x, -np.expm1(np.log(qs) + np.log(qd)))


def e2e_lb_fixed(x, link):
    """1 - (1 - F_s)(1 - F_d) from the exact hop CDFs."""
    hs, hd = _split(link)
    fs, fd = hop_cdf_fixed(_x_grid(x), hs), hop_cdf_fixed(_x_grid(x), hd)
    return _unwrap(x, np.clip(fs + fd - fs * fd, 0.0, 1.0))


def e2e_lb_iid(x, link):
    """Closed-form lower bound for i.i.d. fixed interferers with noise."""
    hs, hd, fs, fd = _iid_pair(link)
    ms, md = hs.signal_m, hd.signal_m
    ks, kd = fs.shape, fd.shape
    th_i, th_v = fs.scale, fd.scale
    sig_s, sig_d = hs.noise_power, hd.noise_power
    al_s, al_d = hs.alpha, hd.alpha
    grid = _x_grid(x)
    out = np.zeros_like(grid)
    for n, xv in enumerate(grid):
        if xv == 0:
            continue
        log12 = (-kd * math.log(th_v) - ks * math.log(th_i) - al_d * sig_d * xv - al_s * sig_s * xv
                 - math.lgamma(kd) - math.lgamma(ks))
        acc = []
        for v1 in range(ms):
            for v2 in range(md):
                for s1 in range(v1 + 1):
                    for s2 in range(v2 + 1):
                        term13 = (al_d ** v2 * al_s ** v1 * sig_d ** (v2 - s2) * sig_s ** (v1 - s1)
                                  * math.exp(math.lgamma(kd + s2) + math.lgamma(ks + s1)
                                             - math.lgamma(s1 + 1) - math.lgamma(s2 + 1)
                                             - math.lgamma(v1 - s1 + 1) - math.lgamma(v2 - s2 + 1)))
                        log14 = ((-kd - s2) * math.log(al_d * xv + 1.0 / th_v)
                                 + (-ks - s1) * math.log(1.0 / th_i + al_s * xv))
                        acc.append(term13 * xv ** (v1 + v2) * math.exp(log14 + log12))
        out[n] = 1.0 - math.fsum(acc)
    return _unwrap(x, np.clip(out, 0.0, 1.0))


def _asymptotic(grid, hs, hd, ymom_s, ymom_d, orders: SeriesOrder) -> SeriesValue:
    zs = noise_plus_interference_moments(hs.noise_power, ymom_s, hs.signal_m + orders.sr)
    zd = noise_plus_interference_moments(hd.noise_power, ymom_d, hd.signal_m + orders.rd)
    fs = series_cdf(grid, hs.signal_m, hs.alpha, zs, orders.sr)
    fd = series_cdf(grid, hd.signal_m, hd.alpha, zd, orders.rd)
    val = fs.value + fd.value - fs.value * fd.value
    return SeriesValue(np.clip(val, 0.0, 1.0), fs.out_of_range | fd.out_of_range)


def e2e_asymptotic_fixed(x, link, orders: SeriesOrder = SeriesOrder()) -> SeriesValue:
    """Small-x expansion of the end-to-end CDF from the hop series."""
    hs, hd = _split(link)
    return _asymptotic(_x_grid(x), hs, hd, _hop_mixture(hs).moment, _hop_mixture(hd).moment, orders)


def e2e_asymptotic_iid(x, link, orders: SeriesOrder = SeriesOrder()) -> SeriesValue:
    hs, hd, fs, fd = _iid_pair(link)

    def gamma_moments(field: IidField):
        return lambda k: math.exp(math.lgamma(field.shape + k) - math.lgamma(field.shape)
                                  + k * math.log(field.scale))

    return _asymptotic(_x_grid(x), hs, hd, gamma_moments(fs), gamma_moments(fd), orders)
