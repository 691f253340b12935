"""Command-line front end: ``equilab <command> [--config PATH] [--out DIR] ...``.

Every command validates its JSON configuration, runs, and writes
``results.csv`` (or ``results.json`` with ``--format json``), ``fit.json``
and ``plotdata.dat`` into ``--out``.  Exit codes: 0 success, 2 invalid input,
3 numerical failure.
"""

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import jsonschema
import numpy as np

from . import __version__
from .exceptions import EquilabError

log = logging.getLogger("equilab")

# schemas --------------------------------------------------------------------

_NUM = {"type": "number"}
_VEC = {"type": "array", "items": _NUM, "minItems": 1}
_MAT = {"type": "array", "items": _VEC, "minItems": 1}
_GRID = {
    "oneOf": [
        {"type": "array", "items": _NUM, "minItems": 3},
        {
            "type": "object",
            "properties": {"start": _NUM, "stop": _NUM, "num": {"type": "integer", "minimum": 3},
                           "spacing": {"enum": ["log", "linear"]}},
            "required": ["start", "stop", "num"],
            "additionalProperties": False,
        },
    ]
}
_MEASURE = {"type": "object", "properties": {"type": {"type": "string"}}, "required": ["type"]}
_LATTICE = {"type": "object", "properties": {"basis": _MAT}, "additionalProperties": False}
_DILATION = {
    "type": "object",
    "properties": {"center": _VEC, "rotation": _MAT, "omega": _MAT, "b0": _VEC, "b1": _VEC},
    "additionalProperties": False,
}
_COEFF = {"oneOf": [_NUM, {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}]}
_OBSERVABLE = {
    "type": "object",
    "properties": {"modes": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
                   "coefficients": {"type": "array", "items": _COEFF}},
    "required": ["modes", "coefficients"],
    "additionalProperties": False,
}


def _schema(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


SCHEMAS = {
    "fourier-decay": _schema({"measure": _MEASURE, "direction": _VEC, "t_grid": _GRID,
                              "window": {"type": "integer", "minimum": 1}},
                             ["measure", "direction", "t_grid"]),
    "torus-rate": _schema({"measure": _MEASURE, "lattice": _LATTICE, "dilation": _DILATION,
                           "observable": _OBSERVABLE, "t_grid": _GRID, "s": _NUM,
                           "window": {"type": "integer", "minimum": 1}},
                          ["measure", "observable", "t_grid"]),
    "ray-test": _schema({"measure": _MEASURE, "lattice": _LATTICE,
                         "rays": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}},
                                  "minItems": 1},
                         "t_grid": _GRID, "stall_level": _NUM, "decay_ratio": _NUM},
                        ["measure", "rays", "t_grid"]),
    "lifted-circle": _schema({"observable": _OBSERVABLE, "t_grid": _GRID,
                              "window": {"type": "integer", "minimum": 1}},
                             ["observable", "t_grid"]),
    "hyperbolic-average": _schema({
        "W": {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3},
        "sigma": {"type": "number", "exclusiveMinimum": 0},
        "p": {"oneOf": [{"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3}, _MAT]},
        "t_grid": _GRID,
        "observable_id": {"enum": ["bump"]},
        "observable": _schema({"center": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                               "radius": _NUM, "kappa": _NUM, "theta_c": _NUM}),
        "group_file": {"type": "string"},
        "order": {"type": "integer", "minimum": 16},
        "panel_length": {"type": "number", "exclusiveMinimum": 0},
        "positive_time": {"type": "boolean"},
        "quadrature_error": {"type": "boolean"},
        "fit_window": {"type": "number", "exclusiveMinimum": 0},
        "tv_times": {"type": "array", "items": _NUM},
        "tv_points": {"type": "integer", "minimum": 1000},
    }, ["W", "sigma", "t_grid"]),
    "ode-check": _schema({"suite": {"enum": ["lemma64", "lemma61", "lemma62", "all"]},
                          "instances": {"type": "integer", "minimum": 1}}),
    "lemma-check": _schema({"instances": {"type": "integer", "minimum": 1}}),
    "report": _schema({"runs": {"type": "array", "items": {"type": "string"}, "minItems": 1}},
                      ["runs"]),
}

DEFAULTS = {
    "ode-check": {"suite": "lemma64", "instances": 50},
    "lemma-check": {"instances": 50},
}


class ConfigError(Exception):
    pass


def load_config(command, path):
    cfg = dict(DEFAULTS.get(command, {}))
    if path is not None:
        try:
            with open(path) as fh:
                cfg.update(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    elif command not in DEFAULTS:
        raise ConfigError(f"{command} needs --config")
    try:
        jsonschema.validate(cfg, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config for {command}: {exc.message}") from exc
    return cfg


def make_grid(spec):
    if isinstance(spec, list):
        grid = np.asarray(spec, dtype=float)
    elif spec.get("spacing", "linear") == "log":
        grid = np.logspace(np.log10(spec["start"]), np.log10(spec["stop"]), spec["num"])
    else:
        grid = np.linspace(spec["start"], spec["stop"], spec["num"])
    if np.any(np.diff(grid) <= 0):
        raise ValueError("t_grid must be increasing")
    return grid


def pmap(func, items, jobs):
    """Ordered map, optionally over a process pool."""
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items))


# commands -------------------------------------------------------------------
# Each returns (header, rows, fit, plot) with plot an (n, 2) array.


def _torus_setup(cfg, dim):
    from .torus import DilationFamily, TorusLattice

    lat = TorusLattice(cfg.get("lattice", {}).get("basis"), dim)
    dil = DilationFamily.from_dict(cfg.get("dilation", {}), dim)
    return lat, dil


def cmd_fourier_decay(cfg, args):
    from .measures import decay_exponent_fit, measure_from_dict

    m = measure_from_dict(cfg["measure"])
    t = make_grid(cfg["t_grid"])
    fit = decay_exponent_fit(m, cfg["direction"], t, cfg.get("window", 5))
    vals = fit.series
    rows = [(ti, v.real, v.imag, abs(v)) for ti, v in zip(t, vals)]
    return ("t", "re_hat", "im_hat", "abs_hat"), rows, fit.to_dict(), np.column_stack([t, np.abs(vals)])


def _disc_at(m, lat, dil, f, t):
    from .torus import discrepancy_series

    return discrepancy_series(m, lat, dil, f, t)


def cmd_torus_rate(cfg, args):
    from .fitting import fit_decay
    from .measures import measure_from_dict
    from .torus import TorusObservable

    m = measure_from_dict(cfg["measure"])
    lat, dil = _torus_setup(cfg, m.dim)
    f = TorusObservable.from_dict(cfg["observable"], lat)
    t = make_grid(cfg["t_grid"])
    if t.max() / t.min() < 100:
        raise ValueError("grid must span at least two decades")
    disc = np.array(pmap(partial(_disc_at, m, lat, dil, f), t, args.jobs))
    fit = fit_decay(t, disc, mode="loglog", window=cfg.get("window", 5))
    s = -2.0 * fit.slope if cfg.get("s") is None else float(cfg["s"])
    l1 = f.l1_norm()
    fit.window.update(l1_norm=l1, s=s, constant=float(np.max(np.abs(disc) * t ** (s / 2)) / l1))
    rows = [(ti, d.real, d.imag, abs(d)) for ti, d in zip(t, disc)]
    return ("t", "re_disc", "im_disc", "abs_disc"), rows, fit.to_dict(), np.column_stack([t, np.abs(disc)])


def cmd_ray_test(cfg, args):
    from .measures import measure_from_dict
    from .torus import integral_ray_decay_test

    m = measure_from_dict(cfg["measure"])
    lat, _ = _torus_setup(cfg, m.dim)
    t = make_grid(cfg["t_grid"])
    verdicts = integral_ray_decay_test(m, lat, cfg["rays"], t, cfg.get("stall_level", 0.1),
                                       cfg.get("decay_ratio", 0.1))
    rows = [(" ".join(map(str, v.mode)), ti, mag) for v in verdicts for ti, mag in zip(v.t, v.magnitudes)]
    fit = {"verdicts": [{"mode": list(v.mode), "verdict": v.verdict} for v in verdicts]}
    return ("ray", "t", "abs_hat"), rows, fit, np.column_stack([t, verdicts[0].magnitudes])


def cmd_lifted_circle(cfg, args):
    from .torus import TorusLattice, TorusObservable, lifted_circle_rate_fit

    f = TorusObservable.from_dict(cfg["observable"], TorusLattice(dim=3))
    t = make_grid(cfg["t_grid"])
    fit = lifted_circle_rate_fit(f, t, cfg.get("window", 5))
    disc = fit.series
    rows = [(ti, d.real, d.imag, abs(d)) for ti, d in zip(t, disc)]
    return ("t", "re_disc", "im_disc", "abs_disc"), rows, fit.to_dict(), np.column_stack([t, np.abs(disc)])


LAMBDA1_NOTE = ("decay rate e^{-t/2} presumes the first nonzero Laplace eigenvalue of the "
                "surface exceeds 1/4 (for the Bolza surface it is about 3.84; external input)")


def _average_at(tc, f, error, t):
    from .translates import translate_average

    return translate_average(tc, f, t, error)


def cmd_hyperbolic_average(cfg, args):
    from .fuchsian import (BundleObservable, FuchsianGroup, cell_histogram, cell_masses,
                           geodesic_circle_points, total_variation)
    from .sl2 import LieVector, as_sl2, from_iwasawa
    from .translates import TranslateConfig, envelope_fit

    group = (FuchsianGroup.from_json(cfg["group_file"]) if "group_file" in cfg
             else FuchsianGroup.bolza())
    p = cfg.get("p", [0.0, 1.0, 0.0])
    p = from_iwasawa(*p) if np.ndim(p) == 1 else as_sl2(p)
    obs = cfg.get("observable", {})
    center = complex(*obs.get("center", [0.0, 1.0]))
    f = BundleObservable(group, center, obs.get("radius", 1.5), obs.get("kappa", 1.0),
                         obs.get("theta_c", 0.0))
    tc = TranslateConfig(LieVector(*cfg["W"]), cfg["sigma"], p, cfg.get("order", 16), group,
                         cfg.get("positive_time", False), cfg.get("panel_length", 2.0))
    t = make_grid(cfg["t_grid"])
    want_err = cfg.get("quadrature_error", False)
    out = pmap(partial(_average_at, tc, f, want_err), t, args.jobs)
    vals = np.array([v for v, _ in out])
    errs = np.array([e for _, e in out])
    mean = f.mean()
    report = envelope_fit(t, vals, mean, cfg.get("fit_window", 3.5),
                          diagnostics={"order": tc.order, "panel_length": tc.panel_length})
    fit = report.to_dict()
    fit.update(mean=mean, regime=tc.regime, assumption=LAMBDA1_NOTE, group=group.name)
    if cfg.get("tv_times"):
        n = cfg.get("tv_points", 400_000)
        s = (np.arange(n) + 0.5) / n * np.pi
        masses = cell_masses(group)
        fit["total_variation"] = [
            {"t": float(tt), "tv": total_variation(cell_histogram(geodesic_circle_points(p, tt, s, group)),
                                                   masses)}
            for tt in cfg["tv_times"]]
    rows = [(ti, v.real, v.imag, abs(v - mean), e) for ti, v, e in zip(t, vals, errs)]
    return (("t", "re_k", "im_k", "abs_disc", "quad_err"), rows, fit,
            np.column_stack([t, np.abs(vals - mean)]))


def _suite_rows(records):
    rows = [(r["kind"], r.get("instance", ""), r["error"], r["tol"], int(r["passed"])) for r in records]
    summary = {}
    for r in records:
        s = summary.setdefault(r["kind"], {"passed": 0, "total": 0, "max_error": 0.0})
        s["passed"] += int(r["passed"])
        s["total"] += 1
        s["max_error"] = max(s["max_error"], r["error"])
    plot = np.column_stack([np.arange(len(records)), [r["error"] for r in records]])
    return ("check", "instance", "error", "tol", "passed"), rows, {"summary": summary}, plot


def cmd_ode_check(cfg, args):
    from .checks import lemma61_suite, lemma62_suite, lemma64_suite

    suite = args.suite or cfg["suite"]
    n = cfg["instances"]
    seed = args.seed
    records = []
    if suite in ("lemma64", "all"):
        records += lemma64_suite(n, seed)
    if suite in ("lemma61", "all"):
        records += lemma61_suite(min(n, 30) if suite == "all" else n, seed)
    if suite in ("lemma62", "all"):
        records += lemma62_suite(n, seed)
    return _suite_rows(records)


def cmd_lemma_check(cfg, args):
    from .checks import lie_identity_suite

    return _suite_rows(lie_identity_suite(cfg["instances"], args.seed))


def cmd_report(cfg, args):
    rows, runs = [], {}
    for d in cfg["runs"]:
        try:
            with open(os.path.join(d, "fit.json")) as fh:
                fit = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"cannot read fit.json in {d}: {exc}") from exc
        runs[d] = fit
        key = next((k for k in ("slope", "envelope_slope") if k in fit), None)
        if key is not None:
            rows.append((d, key, fit[key]))
        elif "summary" in fit:
            for kind, s in fit["summary"].items():
                rows.append((d, kind + " passed", s["passed"] / s["total"]))
        elif "verdicts" in fit:
            for v in fit["verdicts"]:
                rows.append((d, "ray " + " ".join(map(str, v["mode"])), v["verdict"]))
    plot = np.column_stack([np.arange(len(rows)),
                            [r[2] if isinstance(r[2], (int, float)) else np.nan for r in rows]])
    return ("run", "quantity", "value"), rows, {"runs": runs}, plot


COMMANDS = {
    "fourier-decay": cmd_fourier_decay,
    "torus-rate": cmd_torus_rate,
    "ray-test": cmd_ray_test,
    "lifted-circle": cmd_lifted_circle,
    "hyperbolic-average": cmd_hyperbolic_average,
    "ode-check": cmd_ode_check,
    "lemma-check": cmd_lemma_check,
    "report": cmd_report,
}

# output ---------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def render_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def render_json(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def render_plot(plot):
    lines = ["# x y"]
    lines += [f"{_fmt(float(x))} {_fmt(float(y))}" for x, y in np.asarray(plot, float)]
    return "\n".join(lines) + "\n"


def write_atomic(path, text):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_outputs(out, fmt, header, rows, fit, plot):
    os.makedirs(out, exist_ok=True)
    if fmt == "json":
        table = render_json([dict(zip(header, r)) for r in rows])
        name = "results.json"
    else:
        table, name = render_csv(header, rows), "results.csv"
    texts = {name: table, "fit.json": render_json(fit), "plotdata.dat": render_plot(plot)}
    for fname, text in texts.items():
        write_atomic(os.path.join(out, fname), text)


# entry point ----------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="equilab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON configuration file")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--format", choices=["csv", "json"], default="csv")
        if name == "ode-check":
            sp.add_argument("--suite", choices=["lemma64", "lemma61", "lemma62", "all"])
    return parser


def main(argv=None):
    logging.basicConfig(level=os.environ.get("EQUILAB_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("equilab: --jobs must be positive", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.command, args.config)
        log.info("running %s", args.command)
        header, rows, fit, plot = COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"equilab: {exc}", file=sys.stderr)
        return 2
    except EquilabError as exc:
        print(f"equilab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, TypeError) as exc:
        print(f"equilab {args.command}: invalid input: {exc}", file=sys.stderr)
        return 2
    write_outputs(args.out, args.format, header, rows, fit, plot)
    if isinstance(fit, dict) and "summary" in fit:
        failed = sum(s["total"] - s["passed"] for s in fit["summary"].values())
        for kind, s in fit["summary"].items():
            print(f"{kind}: {s['passed']}/{s['total']} passed (max error {s['max_error']:.2e})")
        if failed:
            return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
