"""Acceptance checks.  Each check prints a PASS/FAIL line; the terminal
summary rolls them up to one line per criterion.

Checks that are known not to hold for this model are kept at their stated
tolerance and marked strict xfail, so they turn red if they start passing.
"""

import csv
import io
from functools import cache

import mpmath as mp
import numpy as np
import pytest
from scipy import integrate, optimize, stats

import afoutage.hopdist_fixed as hf
from afoutage import cli
from afoutage.endtoend import RelayLink, SystemConfig
from afoutage.gga import fit_gga
from afoutage.hopdist_random import HopConfig
from afoutage.interference import FixedField, Interferer, PathLoss, aggregate_moments_random
from afoutage.montecarlo import McSpec, estimate_outage, sample_interference
from afoutage.scenario import PRESET_NAMES, evaluate_method, figure_preset
from afoutage.specialfn import beta, gg_cdf, lower_incomplete_gamma_regularized

RANDOM_PRESETS = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6")
FIXED_PRESETS = ("fig7", "fig8", "fig9", "fig10")
MC_TRIALS = 1_000_000

gap = pytest.mark.xfail(strict=True, reason="model gap, see notes")


@cache
def curves(name: str, method: str) -> tuple[np.ndarray, ...]:
    out = []
    for scn in figure_preset(name):
        res = evaluate_method(scn, method)
        assert res.values is not None, res.error
        out.append(res.values)
    return tuple(out)


def exact(name):
    return curves(name, "gga_exact" if figure_preset(name)[0].track == "random" else "fixed_exact")


def mc_agreement(values, est, k=3.0) -> np.ndarray:
    # k binomial standard errors; the analytic p guards cells where the estimate is 0 or 1
    n = est.trials
    se = np.maximum(est.stderr, np.sqrt(values * (1 - values) / n))
    return np.abs(values - est.outage) <= k * se


# -- criterion 1 / 2: Monte Carlo oracle ---------------------------------------

def _oracle_fraction(name, systems, k=3.0):
    fracs = []
    for scn, vals, system in zip(figure_preset(name), exact(name), systems):
        est = estimate_outage(system, McSpec(MC_TRIALS, scn.mc.seed))
        fracs.append(float(np.mean(mc_agreement(vals, est, k))))
    return fracs


@pytest.mark.parametrize("name", [pytest.param(n, marks=gap) for n in RANDOM_PRESETS])
def test_criterion_1_random_track_vs_monte_carlo(name, verdict):
    fracs = _oracle_fraction(name, [s.system() for s in figure_preset(name)])
    assert verdict(f"criterion 1 {name}", min(fracs) >= 0.95,
                   f"fraction of grid within 3 s.e. per curve {np.round(fracs, 3).tolist()}")


def _gg_only(scn):
    # the same hops with interference drawn from the fitted law itself
    link = scn.link()
    hops = [HopConfig(h.signal_m, h.signal_omega, h.noise_power, gg=h.gg)
            for h in (link.hop_sr, link.hop_rd)]
    return SystemConfig((RelayLink(*hops),) * scn.relays, tuple(scn.thresholds))


@pytest.mark.parametrize("name", RANDOM_PRESETS)
def test_criterion_1_analytic_pipeline_vs_gg_simulator(name, verdict):
    # same model on both sides, so every point must agree; 4.5 s.e. keeps the
    # family-wise false-alarm rate small over ~300 correlated comparisons
    fracs = _oracle_fraction(name, [_gg_only(s) for s in figure_preset(name)], k=4.5)
    assert verdict(f"criterion 1 {name} (GG-law simulator)", min(fracs) == 1.0,
                   f"fraction within 4.5 s.e. {np.round(fracs, 3).tolist()}")


@pytest.mark.parametrize("name", FIXED_PRESETS)
def test_criterion_2_fixed_track_vs_monte_carlo(name, verdict):
    fracs = _oracle_fraction(name, [s.system() for s in figure_preset(name)])
    assert verdict(f"criterion 2 {name}", min(fracs) >= 0.95,
                   f"fraction within 3 s.e. {np.round(fracs, 3).tolist()}")


# -- criterion 3: bound ordering and tightening --------------------------------

@pytest.mark.parametrize("name", PRESET_NAMES)
def test_criterion_3_bound_below_exact(name, verdict):
    worst = min(float(np.min(e - lb)) for e, lb in zip(exact(name), curves(name, "lower_bound")))
    assert verdict(f"criterion 3 {name} ordering", worst >= -1e-9, f"min(exact - bound) = {worst:.3g}")


@pytest.mark.parametrize("low, high", [("fig3", "fig4"), ("fig9", "fig10")])
def test_criterion_3_bound_tightens_with_sinr(low, high, verdict):
    def mean_gap(name):
        return np.array([np.mean(e - lb) for e, lb in zip(exact(name), curves(name, "lower_bound"))])

    g15, g20 = mean_gap(low), mean_gap(high)
    assert verdict(f"criterion 3 {low}->{high} gap", np.all(g20 < g15),
                   f"mean gap 15 dB {np.round(g15, 5).tolist()} vs 20 dB {np.round(g20, 5).tolist()}")


# -- criterion 4: asymptote at low thresholds ---------------------------------

@pytest.mark.parametrize("name", [pytest.param(n, marks=gap) for n in PRESET_NAMES])
def test_criterion_4_asymptote_at_low_threshold(name, verdict):
    mask = figure_preset(name)[0].grid_db <= -10.0
    errs = [np.max(np.abs(a[mask] / e[mask] - 1))
            for a, e in zip(curves(name, "asymptotic"), exact(name))]
    assert verdict(f"criterion 4 {name}", max(errs) <= 0.05,
                   f"max relative error per curve {np.round(errs, 4).tolist()}")


# -- criterion 5: dominant-interference closed form ---------------------------

def _closed_form_errors():
    return [c / e - 1 for c, e in zip(curves("fig11", "closed_form_dominant"), exact("fig11"))]


@gap
def test_criterion_5_closed_form_at_high_inr(verdict):
    errs = [float(np.max(np.abs(r))) for r in _closed_form_errors()]
    detail = ", ".join(f"INR {s.inr_db:.0f} dB: {r:.4f}" for s, r in zip(figure_preset("fig11"), errs))
    assert np.all(np.isfinite(errs))
    assert verdict("criterion 5 fig11 INR 20 dB", errs[2] <= 0.05, f"max relative error {detail}")


def test_criterion_5_error_is_the_neglected_noise(verdict):
    # at small thresholds dropping sigma^2 scales the outage by (1 + 1/INR)^(-J m_d)
    scns = figure_preset("fig11")
    errs = _closed_form_errors()
    got = np.array([-r[0] for r in errs])
    want = np.array([1 - (1 + 10 ** (-s.inr_db / 10)) ** (-s.relays * s.signal_m[1]) for s in scns])
    shrinking = all(np.all(np.abs(b) <= np.abs(a) + 1e-12) for a, b in zip(errs, errs[1:]))
    ok = shrinking and np.allclose(got, want, rtol=0.05)
    assert verdict("criterion 5 noise-neglect signature", ok,
                   f"error at lowest threshold {np.round(got, 4).tolist()} vs {np.round(want, 4).tolist()}")


# -- criterion 6: specialization identities -----------------------------------

def iid_rayleigh(sinr_db, mi=2, mv=3, count=10):
    hops = []
    for mint in (mi, mv):
        f = FixedField.identical(count, 2.0, 1.0, mint, PathLoss(3.0))
        hops.append(HopConfig(1, 10 ** (sinr_db / 10) * float(f.omegas.sum()), 0.0, f))
    return RelayLink(*hops)


GRID = 10 ** (np.arange(-10.0, 21.0, 2.0) / 10)


def test_criterion_6_general_form_reduces_to_rayleigh(verdict):
    diffs = [float(np.max(np.abs(hf.e2e_cdf_dominant_iid(GRID, link) - hf.e2e_cdf_rayleigh_iid(GRID, link))))
             for link in (iid_rayleigh(s, mi, mv) for s in (10.0, 20.0, 30.0, 40.0)
                          for mi, mv in ((1, 1), (2, 3), (6, 7)))]
    assert verdict("criterion 6 m=1 reduction", max(diffs) <= 1e-9, f"max abs diff {max(diffs):.3g}")


def _highsinr_errors(sinr_db):
    link = iid_rayleigh(sinr_db)
    return np.abs(hf.e2e_cdf_rayleigh_highsinr(GRID, link) / hf.e2e_cdf_rayleigh_iid(GRID, link) - 1)


@gap
def test_criterion_6_high_sinr_limit_within_one_percent(verdict):
    worst = {s: float(np.max(_highsinr_errors(s))) for s in (30.0, 40.0, 50.0)}
    assert verdict("criterion 6 high-SINR limit", max(worst.values()) <= 0.01,
                   "max relative error " + ", ".join(f"{s:.0f} dB: {v:.4f}" for s, v in worst.items()))


def test_criterion_6_high_sinr_limit_converges(verdict):
    errs = [_highsinr_errors(s) for s in (30.0, 40.0, 50.0, 60.0)]
    maxima = [float(np.max(e)) for e in errs]
    ok = all(b < a for a, b in zip(maxima, maxima[1:])) and maxima[2] <= 0.01 and errs[0][0] <= 0.01
    assert verdict("criterion 6 high-SINR convergence", ok,
                   f"max error at 30/40/50/60 dB {np.round(maxima, 4).tolist()}")


# -- criterion 7: GGA quality ------------------------------------------------

def _random_fields():
    seen = {}
    for name in RANDOM_PRESETS:
        for scn in figure_preset(name):
            for hop in (0, 1):
                f = scn.interference_field(hop)
                seen[(f.lambda_mean, f.disc_radius, f.pathloss.beta, f.fading_m)] = f
    return seen


def test_criterion_7_fit_residuals(verdict):
    worst = max(max(fit_gga(aggregate_moments_random(f)).residuals) for f in _random_fields().values())
    assert verdict("criterion 7 fit residuals", worst <= 1e-8, f"max relative residual {worst:.3g}")


@gap
def test_criterion_7_kolmogorov_distance(verdict):
    rng = np.random.default_rng(2024)
    n = 1_000_000
    dists = {}
    for key, f in _random_fields().items():
        y = np.sort(sample_interference(f, n, rng))
        cdf = gg_cdf(fit_gga(aggregate_moments_random(f)).params, y)
        dists[key] = max(np.max(np.arange(1, n + 1) / n - cdf), np.max(cdf - np.arange(n) / n))
    worst = max(dists.values())
    assert verdict("criterion 7 Kolmogorov distance", worst <= 0.02,
                   f"range {min(dists.values()):.3f}..{worst:.3f} over {len(dists)} fields")


# -- criterion 8: sum of Gammas ------------------------------------------------

def _percentile(mix, q):
    hi = 1.0
    while mix.cdf(hi) < q:
        hi *= 2
    return optimize.brentq(lambda x: mix.cdf(x) - q, 0.0, hi, xtol=1e-12)


def _field(pairs):
    return FixedField(tuple(Interferer(1.0, 2.0 * om, m) for om, m in pairs), PathLoss(1.0))


@pytest.mark.parametrize("seed", range(8))
def test_criterion_8_mixture_equals_convolution(seed, verdict):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(2, 6))
    rates = np.cumprod(rng.uniform(1.3, 2.5, n)) * rng.uniform(0.3, 1.0)
    ms = rng.integers(1, 4, n)
    pairs = [(float(m / r), int(m)) for r, m in zip(rates, ms)]
    sup = 0.0
    # induction: each prefix mixture convolved with the next Gamma is the next mixture
    for k in range(2, n + 1):
        prev = hf.gamma_sum_partial_fractions(_field(pairs[: k - 1]))
        cur = hf.gamma_sum_partial_fractions(_field(pairs[:k]))
        om, m = pairs[k - 1]
        comp = stats.gamma(m, scale=om / m)
        grid = np.linspace(0, _percentile(cur, 0.9999), 50)[1:]
        conv = np.array([integrate.quad(lambda t: prev.pdf(t) * comp.pdf(x - t), 0, x,
                                        epsabs=1e-14, epsrel=1e-12, limit=200)[0] for x in grid])
        sup = max(sup, float(np.max(np.abs(cur.pdf(grid) - conv))))
    mix = hf.gamma_sum_partial_fractions(_field(pairs))
    mass = integrate.quad(mix.pdf, 0, np.inf, epsabs=1e-13, limit=400)[0]
    ok = sup <= 1e-8 and abs(mass - 1) <= 1e-10
    assert verdict(f"criterion 8 field {seed} ({n} components)", ok,
                   f"sup-norm {sup:.2e}, mass error {abs(mass - 1):.2e}")


# -- criterion 9: special functions -------------------------------------------

def _harvest_2f1(monkeypatch):
    seen = []
    real = hf.gauss_2f1

    def spy(a, b, c, z, *, one_minus_z=None):
        seen.append((a, b, c, z, one_minus_z))
        return real(a, b, c, z, one_minus_z=one_minus_z)

    monkeypatch.setattr(hf, "gauss_2f1", spy)
    for scn in figure_preset("fig11"):
        link = scn.link()
        hf.e2e_cdf_dominant_fixed(GRID, link)
        hf.e2e_cdf_dominant_iid(GRID, link)
    for s in (10.0, 30.0, 50.0):
        link = iid_rayleigh(s)
        hf.e2e_cdf_rayleigh_iid(GRID, link)
        hf.e2e_cdf_dominant_iid(GRID, link)
    monkeypatch.setattr(hf, "gauss_2f1", real)
    return sorted(set(seen), key=repr)


def test_criterion_9_hypergeometric_on_harvested_arguments(monkeypatch, verdict):
    args = _harvest_2f1(monkeypatch)
    worst = 0.0
    with mp.workdps(60):
        for a, b, c, z, w in args:
            zz = 1 - mp.mpf(w) if w is not None else mp.mpf(z)
            ref = mp.hyp2f1(a, b, c, zz)
            got = hf.gauss_2f1(a, b, c, z, one_minus_z=w)
            worst = max(worst, float(abs(got - ref) / max(1, abs(ref))))
    assert verdict("criterion 9 2F1", worst <= 1e-10,
                   f"{len(args)} harvested arguments, max relative error {worst:.2e}")


def test_criterion_9_incomplete_gamma_and_beta(verdict):
    rng = np.random.default_rng(9)
    worst = 0.0
    with mp.workdps(40):
        for s, x in zip(rng.integers(1, 40, 200), rng.uniform(0, 80, 200)):
            ref = mp.gammainc(int(s), 0, x, regularized=True)
            worst = max(worst, abs(lower_incomplete_gamma_regularized(int(s), float(x)) - float(ref)))
        for a, b in zip(rng.uniform(0.2, 30, 200), rng.uniform(0.2, 30, 200)):
            ref = mp.beta(a, b)
            worst = max(worst, abs(beta(float(a), float(b)) / float(ref) - 1))
    assert verdict("criterion 9 incomplete gamma and Beta", worst <= 1e-12, f"max error {worst:.2e}")


# -- criterion 10: qualitative orderings --------------------------------------

def _rel_change(a, b):
    return float(np.max(np.abs(b / a - 1)))


@pytest.mark.parametrize("name", ["fig7", pytest.param("fig1", marks=gap)])
def test_criterion_10_interferer_fading_insensitivity(name, verdict):
    c = exact(name)   # curves ordered m_I = (1,1), (2,3), (6,7)
    r = _rel_change(c[1], c[2])
    assert verdict(f"criterion 10 {name} m_I (2,3)->(6,7)", r <= 0.10, f"max relative change {r:.3f}")


@gap
def test_criterion_10_random_inr_worsens_non_rayleigh(verdict):
    lo, hi = exact("fig2"), exact("fig3")
    worst = min(float(np.min(hi[k] - lo[k])) for k in (1, 2))
    assert verdict("criterion 10 random INR 0->20 dB worsens m>1", worst >= 0,
                   f"most negative change {worst:.4f}")


@gap
def test_criterion_10_random_inr_rayleigh_stable(verdict):
    r = _rel_change(exact("fig2")[0], exact("fig3")[0])
    assert verdict("criterion 10 random INR 0->20 dB Rayleigh", r < 0.10, f"max relative change {r:.3f}")


@pytest.mark.parametrize("curve", [0, pytest.param(1, marks=gap), pytest.param(2, marks=gap)])
def test_criterion_10_fixed_inr_stable(curve, verdict):
    r = _rel_change(exact("fig8")[curve], exact("fig9")[curve])
    sid = figure_preset("fig8")[curve].scenario_id.split("/")[1]
    assert verdict(f"criterion 10 fixed INR 0->20 dB {sid}", r < 0.10, f"max relative change {r:.3f}")


# -- criterion 11: determinism ------------------------------------------------

def test_criterion_11_mc_csv_is_byte_identical(tmp_path, verdict):
    cfg = tmp_path / "fig2.json"
    cfg.write_text(figure_preset("fig2")[0].to_json())
    outs = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in outs:
        assert cli.main(["mc", "--config", str(cfg), "--out", str(p)]) == 0
    a, b = (p.read_bytes() for p in outs)
    rows = list(csv.DictReader(io.StringIO(a.decode())))
    assert verdict("criterion 11 mc determinism", a == b and len(rows) == 16,
                   f"{len(a)} bytes, {len(rows)} rows, identical={a == b}")
