"""Scenario configuration, SINR/INR calibration, figure presets and CSV output."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property
from typing import Iterable

import numpy as np

from .endtoend import (
    LinkEvaluationError,
    RelayLink,
    SystemConfig,
    e2e_cdf_link,
    e2e_lb,
    link_cdf,
    rate_to_threshold,
    selection_product,
)
from .hopdist_fixed import (
    IidField,
    e2e_cdf_dominant_fixed,
    e2e_cdf_dominant_iid,
    e2e_cdf_rayleigh_highsinr,
)
from .hopdist_random import HopConfig, SeriesOrder
from .interference import FixedField, PathLoss, RandomField, field_mean
from .montecarlo import McSpec, estimate_outage
from .specialfn import QuadratureSpec

TRACKS = ("random", "fixed")
RUN_METHODS = ("gga_exact", "fixed_exact", "lower_bound", "asymptotic",
               "closed_form_dominant", "rayleigh_highsinr", "mc")
CSV_COLUMNS = ("scenario_id", "track", "method", "gamma_th_db", "outage", "stderr", "warnings")
DEFAULT_GRID_DB = tuple(float(v) for v in range(-10, 21, 2))


class ConfigError(ValueError):
    pass


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(v):
    return 10.0 * np.log10(np.asarray(v, dtype=float))


def calibrate_hop(mean_interference: float, target_sinr: float, target_inr: float) -> tuple[float, float]:
    """(signal Omega, noise power) giving the requested linear SINR and INR."""
    if not mean_interference > 0:
        raise ConfigError("mean interference power must be positive")
    if not (target_sinr > 0 and target_inr > 0):
        raise ConfigError("SINR and INR targets must be positive (linear)")
    noise = mean_interference / target_inr
    return target_sinr * (noise + mean_interference), noise


@dataclass(frozen=True)
class Ratios:
    """Per-hop offsets: hop SINR = SINR / b, hop INR = INR / c."""

    b_s: float = 1.0
    b_d: float = 10.0
    c_s: float = 1.0
    c_d: float = 1.0


@dataclass(frozen=True)
class RandomFieldSpec:
    lambda_mean: float = 50.0
    disc_radius: float = 10.0
    power_product: float = 1.0


@dataclass(frozen=True)
class FixedFieldSpec:
    count: int = 10
    distance: float = 2.0
    power_product: float = 1.0


@dataclass(frozen=True)
class Scenario:
    scenario_id: str
    track: str
    signal_m: tuple[int, int]
    interferer_m: tuple[int, int]
    sinr_db: float
    inr_db: float
    relays: int = 2
    pathloss_beta: float = 3.0
    ratios: Ratios = Ratios()
    field: RandomFieldSpec | FixedFieldSpec | None = None
    thresholds_db: tuple[float, ...] | None = DEFAULT_GRID_DB
    rates: tuple[float, ...] | None = None
    series_orders: SeriesOrder = SeriesOrder()
    quadrature: QuadratureSpec = QuadratureSpec()
    mc: McSpec = McSpec(trials=1_000_000, seed=1)

    def __post_init__(self):
        if self.track not in TRACKS:
            raise ConfigError(f"track must be one of {TRACKS}")
        if self.relays < 1:
            raise ConfigError("need at least one relay")
        for name in ("signal_m", "interferer_m"):
            pair = tuple(getattr(self, name))
            if len(pair) != 2 or any(int(v) != v or v < 1 for v in pair):
                raise ConfigError(f"{name} must be two positive integers")
            object.__setattr__(self, name, tuple(int(v) for v in pair))
        if not (math.isfinite(self.sinr_db) and math.isfinite(self.inr_db)):
            raise ConfigError("SINR/INR targets must be finite")
        if self.field is None:
            object.__setattr__(self, "field", RandomFieldSpec() if self.track == "random" else FixedFieldSpec())
        want = RandomFieldSpec if self.track == "random" else FixedFieldSpec
        if not isinstance(self.field, want):
            raise ConfigError(f"{self.track} track needs a {want.__name__}")
        if (self.thresholds_db is None) == (self.rates is None):
            raise ConfigError("give exactly one of thresholds_db and rates")
        grid = self.thresholds_db if self.rates is None else self.rates
        grid = tuple(float(v) for v in grid)
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("threshold grid must be nonempty and strictly ascending")
        if self.rates is not None and grid[0] <= 0:
            raise ConfigError("rates must be positive")
        object.__setattr__(self, "rates" if self.rates is not None else "thresholds_db", grid)

    # -- derived quantities -------------------------------------------------
    @property
    def thresholds(self) -> np.ndarray:
        if self.rates is not None:
            return rate_to_threshold(self.rates)
        return db_to_linear(self.thresholds_db)

    @property
    def grid_db(self) -> np.ndarray:
        if self.rates is not None:
            return linear_to_db(self.thresholds)
        return np.asarray(self.thresholds_db, dtype=float)

    def interference_field(self, hop: int) -> RandomField | FixedField:
        m = self.interferer_m[hop]
        pl = PathLoss(self.pathloss_beta)
        f = self.field
        if self.track == "random":
            return RandomField(f.lambda_mean, f.disc_radius, f.power_product, m, pl)
        return FixedField.identical(f.count, f.distance, f.power_product, m, pl)

    def hop(self, hop: int) -> HopConfig:
        fld = self.interference_field(hop)
        b = self.ratios.b_s if hop == 0 else self.ratios.b_d
        c = self.ratios.c_s if hop == 0 else self.ratios.c_d
        sinr = float(db_to_linear(self.sinr_db)) / b
        inr = float(db_to_linear(self.inr_db)) / c
        omega, noise = calibrate_hop(field_mean(fld, self.quadrature), sinr, inr)
        m = self.signal_m[hop]
        if self.track == "random":
            return HopConfig.fitted(m, omega, noise, fld, self.quadrature)
        return HopConfig(m, omega, noise, fld)

    @cached_property
    def _link(self) -> RelayLink:
        return RelayLink(self.hop(0), self.hop(1))

    def link(self) -> RelayLink:
        """The calibrated relay link shared by all relays (built once)."""
        return self._link

    def system(self) -> SystemConfig:
        link = self.link()
        return SystemConfig((link,) * self.relays, tuple(self.thresholds))

    # -- serialization ------------------------------------------------------
    def to_dict(self) -> dict:
        d = {
            "scenario_id": self.scenario_id,
            "track": self.track,
            "relays": self.relays,
            "signal_m": list(self.signal_m),
            "interferer_m": list(self.interferer_m),
            "sinr_db": self.sinr_db,
            "inr_db": self.inr_db,
            "pathloss_beta": self.pathloss_beta,
            "ratios": asdict(self.ratios),
            "field": asdict(self.field),
            "series_orders": asdict(self.series_orders),
            "quadrature": asdict(self.quadrature),
            "mc": asdict(self.mc),
        }
        if self.rates is not None:
            d["rates"] = list(self.rates)
        else:
            d["thresholds_db"] = list(self.thresholds_db)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        d = dict(d)
        known = {"scenario_id", "track", "relays", "signal_m", "interferer_m", "sinr_db", "inr_db",
                 "pathloss_beta", "ratios", "field", "series_orders", "quadrature", "mc",
                 "thresholds_db", "rates"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        for key in ("scenario_id", "track", "signal_m", "interferer_m", "sinr_db", "inr_db"):
            if key not in d:
                raise ConfigError(f"missing required key {key!r}")
        if "thresholds_db" in d and "rates" in d:
            raise ConfigError("thresholds_db and rates are mutually exclusive")
        track = d["track"]
        try:
            kw = dict(
                scenario_id=str(d["scenario_id"]), track=track,
                signal_m=tuple(d["signal_m"]), interferer_m=tuple(d["interferer_m"]),
                sinr_db=float(d["sinr_db"]), inr_db=float(d["inr_db"]),
                relays=int(d.get("relays", 2)), pathloss_beta=float(d.get("pathloss_beta", 3.0)),
                ratios=Ratios(**d.get("ratios", {})),
                series_orders=SeriesOrder(**d.get("series_orders", {})),
                quadrature=QuadratureSpec(**d.get("quadrature", {})),
                mc=McSpec(**d.get("mc", {"trials": 1_000_000, "seed": 1})),
            )
            if "field" in d:
                spec_cls = RandomFieldSpec if track == "random" else FixedFieldSpec
                kw["field"] = spec_cls(**d["field"])
            if "rates" in d:
                kw["rates"], kw["thresholds_db"] = tuple(d["rates"]), None
            elif "thresholds_db" in d:
                kw["thresholds_db"] = tuple(d["thresholds_db"])
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        return cls(**kw)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        return cls.from_dict(json.loads(text))


def load_scenarios(path: str) -> list[Scenario]:
    """A config file holds one scenario object or a list of them."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    items = data if isinstance(data, list) else [data]
    return [Scenario.from_dict(item) for item in items]


# --------------------------------------------------------------------------
# Figure presets
# --------------------------------------------------------------------------

_SIGNAL_CURVES = (((1, 1), (1, 1)), ((2, 3), (2, 3)), ((4, 5), (6, 7)))
_RANDOM_FIGS = {
    # name: (sinr_db, inr_db, lambda, L, beta)
    "fig2": (15.0, 0.0, 50.0, 10.0, 3.0),
    "fig3": (15.0, 20.0, 50.0, 10.0, 3.0),
    "fig4": (20.0, 20.0, 50.0, 10.0, 3.0),
    "fig5": (15.0, 0.0, 50.0, 10.0, 5.0),
    "fig6": (15.0, 0.0, 50.0, 20.0, 3.0),
}
_FIXED_FIGS = {"fig8": (15.0, 0.0), "fig9": (15.0, 20.0), "fig10": (20.0, 20.0)}
PRESET_NAMES = tuple(f"fig{i}" for i in range(1, 12))


def _tag(sig, intf) -> str:
    return f"s{sig[0]}-{sig[1]}_i{intf[0]}-{intf[1]}"


def figure_preset(name: str) -> list[Scenario]:
    """Scenarios (one per curve) reproducing a figure's settings."""
    if name == "fig1":
        return [Scenario(f"fig1/{_tag((4, 5), i)}", "random", (4, 5), i, 15.0, 0.0,
                         field=RandomFieldSpec(50.0, 10.0))
                for i in ((1, 1), (2, 3), (6, 7))]
    if name in _RANDOM_FIGS:
        sinr, inr, lam, radius, beta = _RANDOM_FIGS[name]
        return [Scenario(f"{name}/{_tag(s, i)}", "random", s, i, sinr, inr, pathloss_beta=beta,
                         field=RandomFieldSpec(lam, radius))
                for s, i in _SIGNAL_CURVES]
    if name == "fig7":
        return [Scenario(f"fig7/{_tag((4, 5), i)}", "fixed", (4, 5), i, 15.0, 0.0)
                for i in ((1, 1), (2, 3), (6, 7))]
    if name in _FIXED_FIGS:
        sinr, inr = _FIXED_FIGS[name]
        return [Scenario(f"{name}/{_tag(s, i)}", "fixed", s, i, sinr, inr) for s, i in _SIGNAL_CURVES]
    if name == "fig11":
        return [Scenario(f"fig11/inr{int(inr)}", "fixed", (2, 3), (2, 3), 10.0, inr)
                for inr in (10.0, 15.0, 20.0)]
    raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")


def figure_methods(name: str) -> tuple[str, ...]:
    if name in ("fig1",) or name in _RANDOM_FIGS:
        return ("gga_exact", "lower_bound", "asymptotic", "mc")
    if name == "fig11":
        return ("fixed_exact", "closed_form_dominant", "mc")
    return ("fixed_exact", "lower_bound", "asymptotic", "mc")


# --------------------------------------------------------------------------
# Running methods and writing CSV
# --------------------------------------------------------------------------

@dataclass
class MethodResult:
    method: str
    values: np.ndarray | None
    stderr: np.ndarray | None = None
    warnings: list[str] = field(default_factory=list)
    error: str | None = None


def _per_link(scn: Scenario, fn) -> np.ndarray:
    # all relays share one parameter set, so one link CDF serves every factor
    return selection_product([fn(scn.link(), scn.thresholds)] * scn.relays)


def _fixed_closed(link: RelayLink, x):
    iid = IidField.from_fixed(link.hop_sr.field) and IidField.from_fixed(link.hop_rd.field)
    return e2e_cdf_dominant_iid(x, link) if iid else e2e_cdf_dominant_fixed(x, link)


def evaluate_method(scn: Scenario, method: str, mc: McSpec | None = None) -> MethodResult:
    """Selection outage of one method over the scenario grid; errors are captured."""
    if method not in RUN_METHODS:
        return MethodResult(method, None, error=f"unknown method {method!r}")
    try:
        if method == "mc":
            est = estimate_outage(scn.system(), mc or scn.mc)
            return MethodResult(method, est.outage, est.stderr)
        quad = scn.quadrature
        if method == "gga_exact":
            if scn.track != "random":
                raise ConfigError("gga_exact applies to the random track; use fixed_exact")
            return MethodResult(method, _per_link(scn, lambda l, x: e2e_cdf_link(x, l, quad)))
        if method == "fixed_exact":
            if scn.track != "fixed":
                raise ConfigError("fixed_exact applies to the fixed track; use gga_exact")
            return MethodResult(method, _per_link(scn, lambda l, x: e2e_cdf_link(x, l, quad)))
        if method == "lower_bound":
            return MethodResult(method, _per_link(scn, lambda l, x: e2e_lb(x, l, quad=quad)))
        if method == "asymptotic":
            link = scn.link()
            v, warn = link_cdf(link, scn.thresholds, "asymptotic", quad, scn.series_orders)
            return MethodResult(method, selection_product([v] * scn.relays), warnings=warn)
        if scn.track != "fixed":
            raise ConfigError(f"{method} applies to the fixed track only")
        warn = []
        if method == "closed_form_dominant":
            if scn.link().hop_sr.noise_power > 0:
                warn.append("noise neglected")
            return MethodResult(method, _per_link(scn, lambda l, x: _fixed_closed(l, x)), warnings=warn)
        # rayleigh_highsinr
        if scn.signal_m != (1, 1):
            raise ConfigError("rayleigh_highsinr needs Rayleigh signals (signal_m = [1, 1])")
        return MethodResult(method, _per_link(scn, lambda l, x: e2e_cdf_rayleigh_highsinr(x, l)))
    except (ConfigError, LinkEvaluationError, ArithmeticError, ValueError, RuntimeError) as exc:
        return MethodResult(method, None, error=f"{type(exc).__name__}: {exc}")


def result_rows(scn: Scenario, results: Iterable[MethodResult]) -> list[dict]:
    rows = []
    grid_db = scn.grid_db
    for res in results:
        for k, gdb in enumerate(grid_db):
            if res.values is None:
                out, se, warn = "", "", res.error or "failed"
            else:
                out = repr(float(res.values[k]))
                se = "" if res.stderr is None else repr(float(res.stderr[k]))
                warn = "; ".join(w for w in res.warnings if _applies(w, scn.thresholds[k]))
            rows.append({"scenario_id": scn.scenario_id, "track": scn.track, "method": res.method,
                         "gamma_th_db": float(gdb), "outage": out, "stderr": se, "warnings": warn})
    return rows


def _applies(warning: str, threshold: float) -> bool:
    # clamping warnings name their threshold; others apply to every row
    if "clamped at " not in warning:
        return True
    return math.isclose(float(warning.rsplit("clamped at ", 1)[1]), threshold, rel_tol=1e-5)


def write_csv(rows: list[dict], sink) -> None:
    """Rows sorted by (scenario_id, method, gamma_th_db), floats in repr form."""
    ordered = sorted(rows, key=lambda r: (r["scenario_id"], r["method"], r["gamma_th_db"]))
    writer = csv.DictWriter(sink, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in ordered:
        writer.writerow({**r, "gamma_th_db": repr(r["gamma_th_db"])})


def run(scenarios: Scenario | list[Scenario], methods: Iterable[str], sink=None,
        mc: McSpec | None = None) -> tuple[list[MethodResult], bool]:
    """Evaluate methods for each scenario and write one CSV to sink.

    Returns the results and whether everything failed.
    """
    scns = [scenarios] if isinstance(scenarios, Scenario) else list(scenarios)
    methods = list(methods)
    all_rows, all_results = [], []
    for scn in scns:
        results = [evaluate_method(scn, m, mc) for m in methods]
        all_results.extend(results)
        all_rows.extend(result_rows(scn, results))
    if sink is not None:
        write_csv(all_rows, sink)
    total_failure = all(r.values is None for r in all_results)
    return all_results, total_failure


def csv_text(scenarios, methods, mc: McSpec | None = None) -> str:
    buf = io.StringIO()
    run(scenarios, methods, buf, mc)
    return buf.getvalue()


def with_mc(scn: Scenario, trials: int | None = None, seed: int | None = None) -> Scenario:
    mc = scn.mc
    mc = replace(mc, trials=trials if trials is not None else mc.trials,
                 seed=seed if seed is not None else mc.seed)
    return replace(scn, mc=mc)
