"""Experiment driver: exponent fits, QTI scans, Sibony sweeps and reporting.

Every experiment produces a list of ``Row`` records (one per computed bound)
and a list of fitted series.  ``run_experiment`` writes them as CSV and a
JSON summary that validates against ``report_schema.json``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import stats

from .bounds import CERTIFIED, LOWER, UPPER, Bound
from .domains import Ball, GMinus, GPlain, Punctured, normal_point
from .errors import ArgumentError, ComputationError, LabError
from .lower import ball_lempert, projection_lower, sqrt_trick_kr_lower, sqrt_trick_lower
from .sibony import sibony_lower
from .upper import (kobayashi_royden_upper, kr_decomposed_upper, lempert_chain_upper,
                    lempert_upper)

__all__ = ["EXPERIMENTS", "ExperimentConfig", "SeriesFit", "Row", "fit_exponent", "eps_grid",
           "delta_for", "qti_ratio_scan", "compute", "run_experiment", "rows_to_csv",
           "report_schema", "expected_ell_slope", "expected_chain_slope"]

EXPERIMENTS = ("exponents", "qti", "kr-gap", "sibony", "minus-model", "punctured-demo")
CSV_COLUMNS = ("experiment", "mu", "eps", "delta", "quantity", "direction", "grade", "value",
               "family", "slope-contrib")
SLOPE_TOL = 0.05
R2_MIN = 0.99

_DEFAULT_MUS = {
    "exponents": (0.4, 0.75, 1.0, 1.5, 2.0),
    "qti": (2.0,),
    "kr-gap": (2.0,),
    "sibony": (2.0,),
    "minus-model": (2.0,),
    "punctured-demo": (2.0,),
}


# --------------------------------------------------------------------------
# configuration


_RULE = re.compile(r"^\s*(?:eps\s*/\s*(?P<div>[0-9.eE+-]+)|(?P<mul>[0-9.eE+-]+)\s*\*\s*eps|"
                   r"(?P<num>[0-9.eE+-]+))\s*$")


def _rule_fraction(rule: str) -> float:
    """'eps/2', '0.25*eps' or a bare fraction '0.5' -> delta / eps."""
    m = _RULE.match(str(rule))
    if not m:
        raise ArgumentError(f"cannot parse delta rule {rule!r}")
    try:
        if m.group("div"):
            r = 1.0 / float(m.group("div"))
        else:
            r = float(m.group("mul") or m.group("num"))
    except (ValueError, ZeroDivisionError):
        raise ArgumentError(f"cannot parse delta rule {rule!r}") from None
    if not (0.0 < r < 1.0):
        raise ArgumentError(f"delta rule {rule!r} must give 0 < delta < eps")
    return r


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    mus: tuple = ()
    eps_min: float = 1e-6
    eps_max: float = 1e-2
    eps_count: int = 9
    delta_rule: str = "eps/2"
    seed: int = 0
    out: str | None = None
    fmt: str = "csv"  # csv | json | both
    certified_only: bool = False
    pairs: int = 20  # punctured-demo sample size

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ArgumentError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        mus = tuple(float(m) for m in (self.mus or _DEFAULT_MUS[self.experiment]))
        object.__setattr__(self, "mus", mus)
        if not (0 < self.eps_min < self.eps_max < 1):
            raise ArgumentError("need 0 < eps_min < eps_max < 1")
        if int(self.eps_count) < 2:
            raise ArgumentError("eps_count must be at least 2")
        if self.fmt not in ("csv", "json", "both"):
            raise ArgumentError("format must be csv, json or both")
        _rule_fraction(self.delta_rule)

    @property
    def grid(self) -> np.ndarray:
        return eps_grid(self.eps_min, self.eps_max, self.eps_count)

    def delta(self, eps: float) -> float:
        return delta_for(eps, self.delta_rule)

    def to_json(self):
        d = asdict(self)
        d["mus"] = list(self.mus)
        return d


def eps_grid(eps_min: float = 1e-6, eps_max: float = 1e-2, count: int = 9) -> np.ndarray:
    """Log-spaced, strictly decreasing from eps_max to eps_min."""
    g = np.logspace(math.log10(eps_max), math.log10(eps_min), int(count))
    if not np.all(np.diff(g) < 0):
        raise ArgumentError("eps grid is not strictly decreasing")
    return g


def delta_for(eps: float, rule: str = "eps/2") -> float:
    return _rule_fraction(rule) * eps


# --------------------------------------------------------------------------
# fitting


@dataclass(frozen=True)
class SeriesFit:
    slope: float
    intercept: float
    stderr: float
    r2: float
    count: int
    contributions: tuple = ()  # additive per-point shares of the slope

    def to_json(self):
        return {"slope": self.slope, "intercept": self.intercept, "stderr": self.stderr,
                "r2": self.r2, "count": self.count}


def fit_exponent(series) -> SeriesFit:
    """Least squares of log(value) against log(eps)."""
    pts = [(float(e), float(v)) for e, v in series]
    if len(pts) < 3:
        raise ArgumentError("need at least 3 points")
    if any(not (e > 0) or not (v > 0) for e, v in pts):
        raise ArgumentError("eps and values must be positive")
    x = np.log([e for e, _ in pts])
    y = np.log([v for _, v in pts])
    res = stats.linregress(x, y)
    xc, yc = x - x.mean(), y - y.mean()
    sxx = float(xc @ xc)
    ss_tot = float(yc @ yc)
    ss_res = float(np.sum((y - (res.intercept + res.slope * x)) ** 2))
    if ss_tot > 0:
        r2 = 1.0 - ss_res / ss_tot
    else:
        # a constant series is fitted exactly by slope 0
        r2 = 1.0 if ss_res == 0 else float("nan")
    slope = float(res.slope) if ss_tot > 0 else 0.0
    contrib = tuple(float(v) for v in xc * yc / sxx)
    return SeriesFit(slope, float(res.intercept), float(res.stderr), float(r2), len(pts), contrib)


def expected_ell_slope(mu: float) -> float:
    """Exponent of ell(p_delta, p_eps) at fixed delta/eps: 1 - (1 - 1/(2 mu))_+."""
    return 1.0 - max(0.0, 1.0 - 1.0 / (2 * mu))


def expected_chain_slope(mu: float) -> float:
    """Exponent of ell^(m), m >= 2: 1 - (1 - 1/mu)_+."""
    return 1.0 - max(0.0, 1.0 - 1.0 / mu)


# --------------------------------------------------------------------------
# rows and series


@dataclass
class Row:
    experiment: str
    mu: float
    eps: float
    delta: float | None
    quantity: str
    direction: str
    grade: str
    value: float
    family: str
    series: str | None = None
    slope_contrib: float | None = None

    def csv_fields(self):
        def num(v):
            return "" if v is None else format(float(v), ".17g")
        return [self.experiment, num(self.mu), num(self.eps), num(self.delta), self.quantity,
                self.direction, self.grade, num(self.value), self.family, num(self.slope_contrib)]


def _row(exp, mu, eps, delta, b: Bound, series=None, value=None, family=None):
    return Row(exp, mu, eps, delta, b.label(), b.direction, b.grade,
               float(b.value if value is None else value), family or b.family or "", series)


@dataclass
class Result:
    config: ExperimentConfig
    rows: list = field(default_factory=list)
    fits: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    def check(self, name, passed, value=None, detail=""):
        self.checks.append({"name": name, "pass": bool(passed),
                            "value": None if value is None else float(value), "detail": detail})

    def fit(self, series, expected=None, tol=SLOPE_TOL, r2_min=R2_MIN, informational=False):
        rows = [r for r in self.rows if r.series == series]
        f = fit_exponent([(r.eps, r.value) for r in rows])
        for r, c in zip(rows, f.contributions):
            r.slope_contrib = c
        ok = None
        if expected is not None and not informational:
            ok = bool(abs(f.slope - expected) <= tol and f.r2 >= r2_min)
        self.fits.append({"series": series, **f.to_json(), "expected": expected, "tolerance": tol,
                          "r2_min": r2_min, "pass": ok})
        return f

    def sandwich(self):
        """Every certified lower row against every upper row for the same (mu, eps, delta, quantity)."""
        by = {}
        for r in self.rows:
            by.setdefault((r.mu, r.eps, r.delta), []).append(r)
        bad = 0
        for rs in by.values():
            for lo in rs:
                if lo.direction != LOWER or lo.grade != CERTIFIED:
                    continue
                for up in rs:
                    if up.direction == UPPER and _same_invariant(lo, up) and \
                            lo.value > up.value + 1e-9:
                        bad += 1
        return bad


def _same_invariant(lo: Row, up: Row) -> bool:
    """Lower on ell^(a) vs upper on ell^(b) is a theorem when b <= a (ell^(inf) bounds all)."""
    def parse(label):
        m = re.match(r"^(ell|kappa)(?:\^\((\d+|inf)\))?$", label)
        if not m:
            return label, 1
        k = m.group(2)
        return m.group(1), (math.inf if k == "inf" else int(k or 1))
    (ql, ml), (qu, mu_) = parse(lo.quantity), parse(up.quantity)
    if lo.quantity == "kappa_hat":
        ql, ml = "kappa", math.inf
    if up.quantity == "kappa_hat":
        qu, mu_ = "kappa", math.inf
    return ql == qu and mu_ <= ml


# --------------------------------------------------------------------------
# experiments


def _lower_ell(dom, delta, eps):
    if dom.mu > 0.5:
        return sqrt_trick_lower(dom, delta, eps)
    return projection_lower(dom, normal_point(dom, delta), normal_point(dom, eps))


def _exponents(cfg, res):
    for mu in cfg.mus:
        dom = GPlain(mu, 2)
        for eps in cfg.grid:
            d = cfg.delta(eps)
            z, w = normal_point(dom, d), normal_point(dom, eps)
            up = lempert_upper(dom, z, w, strategy="explicit-family")
            lo = _lower_ell(dom, d, eps)
            ch = lempert_chain_upper(dom, z, w, m=2, strategy="explicit-family")
            res.rows.append(_row("exponents", mu, eps, d, up, series=f"ell-upper mu={mu:g}"))
            res.rows.append(_row("exponents", mu, eps, d, lo, series=f"ell-lower mu={mu:g}"))
            res.rows.append(Row("exponents", mu, eps, d, "ell^(2)", UPPER, ch.grade,
                                ch.aggregate_ell, "+".join(b.family or "" for b in ch.legs),
                                f"ell2-upper mu={mu:g}"))
        res.fit(f"ell-upper mu={mu:g}", expected_ell_slope(mu))
        res.fit(f"ell-lower mu={mu:g}", expected_ell_slope(mu))
        res.fit(f"ell2-upper mu={mu:g}", expected_chain_slope(mu))


def qti_ratio_scan(mu: float, grid=None, delta_rule: str = "eps/2"):
    """Rows (eps, certified ell lower, ell^(2) chain upper, ratio) on G_mu.

    The ratio lower / upper exceeding any constant as eps -> 0 is the
    failure of the quasi triangle inequality through the chain midpoint.
    """
    grid = eps_grid() if grid is None else np.asarray(grid, dtype=float)
    dom = GPlain(mu, 2)
    table = []
    for eps in grid:
        d = delta_for(eps, delta_rule)
        try:
            lo = _lower_ell(dom, d, eps)
            ch = lempert_chain_upper(dom, normal_point(dom, d), normal_point(dom, eps), m=2)
        except LabError as exc:
            raise ComputationError(f"qti scan failed at eps={eps:.6g}: {exc}") from exc
        table.append({"eps": float(eps), "delta": d, "lower": lo, "chain": ch,
                      "ratio": lo.value / ch.aggregate_ell})
    return table


def _qti(cfg, res):
    for mu in cfg.mus:
        table = qti_ratio_scan(mu, cfg.grid, cfg.delta_rule)
        dom = GPlain(mu, 2)
        for t in table:
            eps, d, lo, ch = t["eps"], t["delta"], t["lower"], t["chain"]
            up1 = lempert_upper(dom, normal_point(dom, d), normal_point(dom, eps),
                                strategy="explicit-family")
            res.rows.append(_row("qti", mu, eps, d, lo))
            res.rows.append(_row("qti", mu, eps, d, up1))
            res.rows.append(Row("qti", mu, eps, d, "ell^(2)", UPPER, ch.grade, ch.aggregate_ell,
                                "+".join(b.family or "" for b in ch.legs)))
            grade = CERTIFIED if lo.certified and ch.grade == CERTIFIED else "numeric"
            res.rows.append(Row("qti", mu, eps, d, "ratio", "ratio", grade, t["ratio"],
                                "lower/chain", f"ratio mu={mu:g}"))
        expected = -1.0 / (2 * mu) if mu > 1 else None
        res.fit(f"ratio mu={mu:g}", expected, informational=expected is None)
        r = [t["ratio"] for t in table]
        growth = r[-1] / r[0]
        if mu > 1:
            res.check(f"ratio growth mu={mu:g}", growth >= 3, growth,
                      "ratio(eps_min) / ratio(eps_max) >= 3")
        else:
            res.check(f"ratio bounded mu={mu:g}", max(r) / min(r) <= 2.0, max(r) / min(r),
                      "ratio stays within a factor 2 on the grid")


def _kr_gap(cfg, res):
    for mu in cfg.mus:
        dom = GPlain(mu, 2)
        for eps in cfg.grid:
            p = normal_point(dom, eps)
            lo = sqrt_trick_kr_lower(dom, eps)
            up1 = kobayashi_royden_upper(dom, p, [1, 0], strategy="explicit-family")
            up2 = kr_decomposed_upper(dom, p, [1, 0], m=2, strategy="paper")
            res.rows.append(_row("kr-gap", mu, eps, None, lo, series=f"kappa-lower mu={mu:g}"))
            res.rows.append(_row("kr-gap", mu, eps, None, up1))
            res.rows.append(_row("kr-gap", mu, eps, None, up2, series=f"kappa2-upper mu={mu:g}"))
        res.fit(f"kappa-lower mu={mu:g}", -(1 - 1 / (2 * mu)))
        res.fit(f"kappa2-upper mu={mu:g}", -(1 - 1 / mu))


def _sibony(cfg, res):
    for mu in cfg.mus:
        dom = GPlain(mu, 2)
        for eps in cfg.grid:
            glued = sibony_lower(mu, eps, [1, 0], candidates=("glued",), seed=cfg.seed)
            best = sibony_lower(mu, eps, [1, 0], seed=cfg.seed)
            up = kobayashi_royden_upper(dom, normal_point(dom, eps), [1, 0],
                                        strategy="explicit-family")
            res.rows.append(_row("sibony", mu, eps, None, glued, series=f"S-glued mu={mu:g}"))
            res.rows.append(_row("sibony", mu, eps, None, best, series=f"S-best mu={mu:g}"))
            res.rows.append(_row("sibony", mu, eps, None, up))
            res.check(f"S <= kappa mu={mu:g} eps={eps:.3g}", best.value <= up.value, best.value)
        res.fit(f"S-glued mu={mu:g}", -(1 - 1 / mu))
        res.fit(f"S-best mu={mu:g}", -(1 - 1 / mu), informational=True)


def _minus(cfg, res):
    for mu in cfg.mus:
        dom = GMinus(mu, 2)
        for eps in cfg.grid:
            d = cfg.delta(eps)
            z, w = normal_point(dom, d), normal_point(dom, eps)
            tight = lempert_chain_upper(dom, z, w, m=2, strategy="explicit-family")
            paper = lempert_chain_upper(dom, z, w, m=2, strategy="paper")
            for ch, tag in ((tight, "explicit"), (paper, "paper")):
                res.rows.append(Row("minus-model", mu, eps, d, "ell^(2)", UPPER, ch.grade,
                                    ch.aggregate_ell, "+".join(b.family or "" for b in ch.legs),
                                    f"minus-chain-{tag} mu={mu:g}"))
            lo = projection_lower(dom, z, w)
            res.rows.append(_row("minus-model", mu, eps, d, lo))
            p = normal_point(dom, eps)
            for strat in ("paper", "best-of"):
                k2 = kr_decomposed_upper(dom, p, [1, 0], m=2, strategy=strat)
                res.rows.append(_row("minus-model", mu, eps, None, k2,
                                     series=f"minus-kappa2-{strat} mu={mu:g}"))
        res.fit(f"minus-chain-explicit mu={mu:g}", expected_chain_slope(mu))
        res.fit(f"minus-chain-expected mu={mu:g}", expected_chain_slope(mu), informational=True)
        res.fit(f"minus-kappa2-expected mu={mu:g}", -(1 - 1 / mu), informational=True)
        res.fit(f"minus-kappa2-best-of mu={mu:g}", -(1 - 1 / mu), informational=True)


def _punctured(cfg, res):
    """ell on B^2 minus the origin against the ball.

    Two comparisons per pair: the default strategy on the punctured ball
    against the closed-form ball value, and polynomial optimization on the
    punctured ball against the same optimization on the full ball.
    """
    rng = np.random.default_rng(cfg.seed)
    ball = Ball(2)
    dom = Punctured(ball, ((0.0, 0.0),))
    worst_exact = worst_opt = 0.0
    for k in range(cfg.pairs):
        P = rng.normal(size=(2, 4))
        P = P[:, :2] + 1j * P[:, 2:]
        P *= (rng.uniform(0.1, 0.7, size=2) / np.linalg.norm(P, axis=1))[:, None]
        z, w = P
        exact = ball_lempert(z, w)
        b = lempert_upper(dom, z, w, strategy="best-of", seed=cfg.seed + k)
        opt_p = lempert_upper(dom, z, w, strategy="poly-opt", restarts=4, seed=cfg.seed + k)
        opt_b = lempert_upper(ball, z, w, strategy="poly-opt", restarts=4, seed=cfg.seed + k)
        for bound in (b, opt_p):
            res.rows.append(Row("punctured-demo", 0.0, float(k), None, "ell", UPPER, bound.grade,
                                bound.value, bound.family or ""))
        res.rows.append(Row("punctured-demo", 0.0, float(k), None, "ell", LOWER, CERTIFIED,
                            exact, "ball"))
        worst_exact = max(worst_exact, abs(b.value - exact))
        worst_opt = max(worst_opt, abs(opt_p.value - opt_b.value))
    res.check("punctured within 1e-3 of ball", worst_exact <= 1e-3, worst_exact,
              "max |punctured upper - closed-form ball value|")
    res.check("punctured optimizer matches full-ball optimizer", worst_opt <= 1e-3, worst_opt,
              "max |poly-opt on B^2 minus 0 - poly-opt on B^2|")


_RUNNERS = {"exponents": _exponents, "qti": _qti, "kr-gap": _kr_gap, "sibony": _sibony,
            "minus-model": _minus, "punctured-demo": _punctured}


def compute(config: ExperimentConfig, res: Result | None = None) -> Result:
    """Run the experiment in memory (deterministic given the seed)."""
    res = Result(config) if res is None else res
    _RUNNERS[config.experiment](config, res)
    if config.certified_only:
        res.rows = [r for r in res.rows if r.grade == CERTIFIED]
    bad = res.sandwich()
    res.check("sandwich", bad == 0, bad, "certified lower <= upper on matching rows")
    return res


# --------------------------------------------------------------------------
# reporting


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_COLUMNS)
    for r in rows:
        wr.writerow(r.csv_fields())
    return buf.getvalue()


def summary(res: Result) -> dict:
    fits_ok = all(f["pass"] is not False for f in res.fits)
    checks_ok = all(c["pass"] for c in res.checks)
    return {"experiment": res.config.experiment, "config": res.config.to_json(),
            "rows": len(res.rows), "fits": res.fits, "checks": res.checks,
            "pass": bool(fits_ok and checks_ok)}


def report_schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("report_schema.json").read_text())


def _write(path: Path, text: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def run_experiment(config: ExperimentConfig) -> dict:
    """Compute and write ``<out>.csv`` and/or ``<out>.json``; returns the summary dict.

    On a computation failure the rows gathered so far are still written.
    """
    out = Path(config.out or f"{config.experiment}-report")
    res = Result(config)
    try:
        compute(config, res)
    except LabError as exc:
        if config.fmt in ("csv", "both"):
            _write(out.with_suffix(".csv"), rows_to_csv(res.rows))
        raise ComputationError(f"{config.experiment} failed: {exc}") from exc
    summ = summary(res)
    if config.fmt in ("csv", "both"):
        _write(out.with_suffix(".csv"), rows_to_csv(res.rows))
        summ["csv"] = str(out.with_suffix(".csv"))
    if config.fmt in ("json", "both"):
        _write(out.with_suffix(".json"), json.dumps(summ, indent=2, sort_keys=True) + "\n")
    return summ
