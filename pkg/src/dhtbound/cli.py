"""Command-line driver: Gaussian sweeps, single Gaussian points, discrete scenario files.

Exit codes: 0 on success, 2 for invalid input, 3 when an evaluation fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import bounds as bd
from .errors import EvaluationError, ValidationError
from .gaussian import centralized_gaussian, new_gaussian, rw_gaussian, sigma_hat_sq
from .optimize import OptimizerConfig
from .scenario_io import LoadedScenario, load_scenario

log = logging.getLogger("dhtbound")

PRESETS = {
    # rho0 runs over 60 evenly spaced interior points of (rho1, 1)
    "fig2": {"rho1": 0.7, "rate": 0.5, "points": 60, "normalize": True},
    "fig3": {"rho1": 0.25, "rate": 0.2, "points": 60, "normalize": True},
}
GAUSSIAN_BOUNDS = ("rw", "new", "centralized")
DISCRETE_BOUNDS = ("g", "addsub", "rw", "corollary1", "ac", "centralized", "chain", "jaug")
UPPER_BOUNDS = ("g", "addsub", "rw", "corollary1")
LARGE_FACTOR = 2.0
ORDER_TOL = 1e-6
WORKERS = 4


@dataclass
class RunConfig:
    mode: str = "gaussian-sweep"
    rho1: float | None = None
    rate: float | None = None
    rho0: list[float] = field(default_factory=list)
    bounds: tuple[str, ...] = ()
    seed: int = 0
    units: str = "nats"
    normalize: bool = False
    out: str | None = None
    plot_data: str | None = None
    scenario: str | None = None
    terminal: bd.Terminal = "centralized"
    oracle: bool = False
    starts: int | None = None
    preset: str | None = None

    def optimizer(self) -> OptimizerConfig:
        cfg = OptimizerConfig(seed=self.seed, verify_oracle=self.oracle)
        if self.starts is not None:
            cfg = replace(cfg, n_starts=self.starts)
        return cfg


# formatting ---------------------------------------------------------------------


def fmt(x) -> str:
    """12 significant digits, '.' decimal; infinities spelled out."""
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def to_units(x: float, units: str) -> float:
    return x / math.log(2.0) if units == "bits" else x


def write_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[c]) for c in columns])
    return buf.getvalue()


# Gaussian sweeps ------------------------------------------------------------------


def parse_range(text: str) -> list[float]:
    """``a:b:n`` -> n evenly spaced values from a to b inclusive."""
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise ValidationError(f"--rho0-range expects a:b:n, got {text!r}") from None
    if n < 2:
        raise ValidationError("--rho0-range needs at least 2 steps")
    return list(np.linspace(a, b, n))


def preset_grid(rho1: float, points: int) -> list[float]:
    return list(np.linspace(rho1, 1.0, points + 2)[1:-1])


def _gaussian_point(rho0: float, rho1: float, rate: float, units: str, normalize: bool) -> dict:
    d = new_gaussian(rho0, rho1, rate)
    rw = rw_gaussian(rho0, rho1, rate)
    cen = centralized_gaussian(rho0, rho1)
    s, binding = sigma_hat_sq(rho0, rho1, rate)
    row = {
        "rho0": rho0, "rho1": rho1, "R": to_units(rate, units), "rho": d.rho,
        "rw_bound": to_units(rw, units), "new_bound": to_units(d.value, units),
        "centralized": to_units(cen, units), "active_branch": d.active_branch,
        "centralized_large": "1" if cen > LARGE_FACTOR * rw else "0",
        "delta": d.delta, "sigma_hat_sq": s, "binding": binding,
        "term_new": to_units(d.term_new, units), "term_rw": to_units(d.term_rw, units),
    }
    if normalize:
        scale = (rho0 - rho1) ** 2
        for c in ("rw_bound", "new_bound", "centralized"):
            row[c + "_norm"] = row[c] / scale
    return row


def sweep_columns(bounds: Sequence[str], normalize: bool) -> list[str]:
    names = {"rw": "rw_bound", "new": "new_bound", "centralized": "centralized"}
    chosen = [names[b] for b in GAUSSIAN_BOUNDS if b in bounds]
    cols = ["rho0", "rho1", "R", "rho"] + chosen + ["active_branch", "centralized_large"]
    if normalize:
        cols += [c + "_norm" for c in chosen]
    return cols


def run_gaussian_sweep(cfg: RunConfig) -> list[dict]:
    """Evaluate every sweep point (validated up front), returned in sweep order."""
    if cfg.rho1 is None or cfg.rate is None or not cfg.rho0:
        raise ValidationError("gaussian modes need rho1, rate and at least one rho0")
    if cfg.mode == "gaussian-sweep" and len(cfg.rho0) < 2:
        raise ValidationError("a sweep needs at least 2 points")
    if not (0 <= cfg.rho1 < 1) or cfg.rate < 0 or not math.isfinite(cfg.rate):
        raise ValidationError(f"invalid rho1={cfg.rho1} or rate={cfg.rate}")
    for r0 in cfg.rho0:
        if not (cfg.rho1 < r0 < 1):
            raise ValidationError(f"rho0={r0} leaves region D1 (need {cfg.rho1} < rho0 < 1)")
    with ThreadPoolExecutor(max_workers=WORKERS) as pool:
        return list(pool.map(
            lambda r0: _gaussian_point(float(r0), cfg.rho1, cfg.rate, cfg.units, cfg.normalize), cfg.rho0
        ))


def emit_plot_data(csv_text: str, normalize: bool, config_note: str = "") -> str:
    """Whitespace-delimited columns rho0, rho, rw, new, centralized with a comment header."""
    rows = list(csv.DictReader(io.StringIO(csv_text)))
    if not rows:
        raise ValidationError("plot data requested from an empty CSV")
    suffix = "_norm" if normalize else ""
    picks = ["rho0", "rho", "rw_bound" + suffix, "new_bound" + suffix, "centralized" + suffix]
    missing = [c for c in picks if c not in rows[0]]
    if missing:
        raise ValidationError(f"CSV lacks columns needed for plot data: {missing}")
    lines = [
        "# columns: rho0 rho rw new centralized",
        f"# source columns: {' '.join(picks)}",
        f"# normalized by (rho0 - rho1)^2: {'yes' if normalize else 'no'}",
    ]
    if config_note:
        lines.append(f"# config: {config_note}")
    lines += [" ".join(r[c] for c in picks) for r in rows]
    return "\n".join(lines) + "\n"


# discrete scenarios -----------------------------------------------------------------


@dataclass
class DiscreteReport:
    rows: list[dict]
    warnings: list[str]

    def value(self, bound: str, aux: str = "-") -> float:
        for r in self.rows:
            if r["bound"] == bound and r["aux"] == aux:
                return r["value"]
        raise KeyError((bound, aux))


def _evaluate(op: str, fn):
    try:
        return fn(), "ok", ""
    except ValidationError as exc:
        return math.nan, "invalid", str(exc)
    except EvaluationError as exc:
        raise EvaluationError(f"{op}: {exc}") from exc


def run_discrete(cfg: RunConfig, loaded: LoadedScenario) -> DiscreteReport:
    """Evaluate the selected bounds for each named receiver, chain and augmentation."""
    scn = loaded.scenario
    ocfg = cfg.optimizer()
    sel = set(cfg.bounds or DISCRETE_BOUNDS)
    rows: list[dict] = []
    warnings: list[str] = []

    def add(bound, aux, value, status, detail=""):
        rows.append({"bound": bound, "aux": aux, "value": value, "status": status, "detail": detail})

    def note_oracle(name, aux, res):
        orc = res.diagnostics.get("oracle")
        if orc and orc.get("ok") is False:
            warnings.append(f"{name}[{aux}]: inner values fall short of the grid oracle by {orc['max_shortfall']:.3g}")

    if "centralized" in sel:
        add("centralized", "-", bd.centralized_bound(scn), "ok")
    ac = math.nan
    if "ac" in sel:
        ac, st, msg = _evaluate("ac_lower_bound", lambda: bd.ac_lower_bound(scn, ocfg).value)
        add("ac", "-", ac, st, msg)

    for name, aux in loaded.aux.items():
        vals = {}
        if "g" in sel:
            def g_fn():
                pz, qz = aux.x_kernels(scn)
                r = bd.g_bound(scn, pz, qz, ocfg)
                note_oracle("g", name, r)
                return r.value
            vals["g"] = _evaluate(f"g_bound[{name}]", g_fn)
        if "addsub" in sel:
            def a_fn():
                r = bd.addsub_upper_bound(scn, aux, cfg.terminal, ocfg)
                note_oracle("addsub", name, r)
                return r.value
            vals["addsub"] = _evaluate(f"addsub_upper_bound[{name}]", a_fn)
        if "rw" in sel:
            vals["rw"] = _evaluate(f"rw_bound[{name}]", lambda: bd.rw_bound(scn, aux, ocfg).value)
        if "corollary1" in sel:
            vals["corollary1"] = _evaluate(
                f"corollary1_bound[{name}]", lambda: bd.corollary1_bound(scn, aux, ocfg).value
            )
        for b, (v, st, msg) in vals.items():
            add(b, name, v, st, msg)
        ok = {b: v for b, (v, st, _) in vals.items() if st == "ok"}
        for b in ("addsub", "corollary1", "rw"):
            if b in ok and not math.isnan(ac) and ac > ok[b] + ORDER_TOL:
                warnings.append(f"ordering violated for aux {name}: ac {ac:.9g} > {b} {ok[b]:.9g}")
        if "corollary1" in ok and "rw" in ok and ok["corollary1"] > ok["rw"] + ORDER_TOL:
            warnings.append(f"ordering violated for aux {name}: corollary1 {ok['corollary1']:.9g} > rw {ok['rw']:.9g}")

    if "chain" in sel:
        for name, chain in loaded.chains.items():
            v, st, msg = _evaluate(
                f"chain_bound[{name}]", lambda: bd.chain_bound(scn, chain, cfg.terminal, ocfg).value
            )
            add("chain", name, v, st, msg)
    if "jaug" in sel:
        for name, ja in loaded.j_augment.items():
            v, st, msg = _evaluate(
                f"j_augmented_bound[{name}]",
                lambda: bd.j_augmented_bound(
                    scn, ja.p_j_given_xyz, ja.q_j_given_xyz, loaded.aux[ja.aux], cfg.terminal, ocfg
                ).value,
            )
            add("jaug", name, v, st, msg)
            if st == "ok" and not math.isnan(ac) and ac > v + ORDER_TOL:
                warnings.append(f"ordering violated for augmentation {name}: ac {ac:.9g} > jaug {v:.9g}")

    for b in UPPER_BOUNDS:
        vals = [r["value"] for r in rows if r["bound"] == b and r["aux"] != "-" and r["status"] == "ok"]
        if len(loaded.aux) > 1 and vals:
            add(b, "min", min(vals), "ok", "minimum over receivers")

    for r in rows:
        r["value"] = to_units(r["value"], cfg.units)
    return DiscreteReport(rows, warnings)


def format_report(rep: DiscreteReport, units: str) -> str:
    out = [f"{'bound':<12} {'aux':<12} {'value [' + units + ']':>20}  status"]
    for r in rep.rows:
        line = f"{r['bound']:<12} {r['aux']:<12} {fmt(r['value']):>20}  {r['status']}"
        if r["status"] != "ok":
            line += f"  ({r['detail']})"
        out.append(line)
    for w in rep.warnings:
        out.append(f"WARNING: {w}")
    return "\n".join(out) + "\n"


# entry point ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dhtbound", description="Exponent bounds for distributed hypothesis testing.")
    p.add_argument("--mode", choices=["gaussian-sweep", "gaussian-point", "discrete"], default="gaussian-sweep")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--rho1", type=float)
    p.add_argument("--rho0", type=float, help="single rho0 for gaussian-point mode")
    p.add_argument("--rate", type=float, help="rate in nats per symbol")
    p.add_argument("--rho0-range", help="a:b:n sweep of rho0")
    p.add_argument("--bounds", help="comma-separated subset of bounds to evaluate")
    p.add_argument("--units", choices=["nats", "bits"], default="nats")
    p.add_argument("--normalize", action="store_true", help="add columns divided by (rho0 - rho1)^2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scenario", help="scenario JSON file for discrete mode")
    p.add_argument("--out", help="CSV output path (stdout when omitted)")
    p.add_argument("--plot-data", help="also write whitespace-delimited plot data here")
    p.add_argument("--terminal", default="centralized", help="centralized, zero, or a number in nats")
    p.add_argument("--starts", type=int, help="multi-start budget for the optimizers")
    p.add_argument("--oracle", action="store_true", help="audit inner values against the grid oracle")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(mode=ns.mode, seed=ns.seed, units=ns.units, normalize=ns.normalize, out=ns.out,
                    plot_data=ns.plot_data, scenario=ns.scenario, oracle=ns.oracle, starts=ns.starts,
                    preset=ns.preset)
    if ns.preset:
        pr = PRESETS[ns.preset]
        cfg.mode = "gaussian-sweep"
        cfg.rho1, cfg.rate = pr["rho1"], pr["rate"]
        cfg.rho0 = preset_grid(pr["rho1"], pr["points"])
        cfg.normalize = cfg.normalize or pr["normalize"]
    if ns.rho1 is not None:
        cfg.rho1 = ns.rho1
    if ns.rate is not None:
        cfg.rate = ns.rate
    if ns.rho0_range:
        cfg.rho0 = parse_range(ns.rho0_range)
    if ns.rho0 is not None:
        cfg.rho0 = [ns.rho0]
    allowed = DISCRETE_BOUNDS if cfg.mode == "discrete" else GAUSSIAN_BOUNDS
    if ns.bounds:
        chosen = tuple(b.strip() for b in ns.bounds.split(",") if b.strip())
        unknown = [b for b in chosen if b not in allowed]
        if unknown:
            raise ValidationError(f"unknown bounds {unknown}; choose from {', '.join(allowed)}")
        cfg.bounds = chosen
    else:
        cfg.bounds = allowed
    if ns.terminal in ("centralized", "zero"):
        cfg.terminal = ns.terminal
    else:
        try:
            cfg.terminal = float(ns.terminal)
        except ValueError:
            raise ValidationError(f"--terminal must be centralized, zero or a number, got {ns.terminal!r}") from None
    return cfg


def _write(text: str, path: str | None):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(cfg: RunConfig) -> int:
    if cfg.mode == "discrete":
        if not cfg.scenario:
            raise ValidationError("discrete mode needs --scenario")
        loaded = load_scenario(cfg.scenario)
        rep = run_discrete(cfg, loaded)
        sys.stdout.write(format_report(rep, cfg.units))
        for w in rep.warnings:
            log.warning(w)
        if cfg.out:
            _write(write_csv(rep.rows, ["bound", "aux", "value", "status", "detail"]), cfg.out)
        return 0

    rows = run_gaussian_sweep(cfg)
    cols = sweep_columns(cfg.bounds, cfg.normalize)
    if cfg.mode == "gaussian-point":
        cols += ["delta", "sigma_hat_sq", "binding", "term_new", "term_rw"]
    text = write_csv(rows, cols)
    _write(text, cfg.out)
    if cfg.plot_data:
        note = f"rho1={fmt(cfg.rho1)} R={fmt(cfg.rate)} units={cfg.units} points={len(rows)}"
        _write(emit_plot_data(text, cfg.normalize, note), cfg.plot_data)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return run(config_from_args(ns))
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except EvaluationError as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
