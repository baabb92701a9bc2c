"""Command-line driver: one subcommand per workflow, JSON config, CSV/JSON artifacts.

Every run prints a one-line JSON summary on stdout.  Exit status is 0 on
success, 2 on any validation or I/O error, and 3 when ``--strict`` is given
and a verdict came out inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from rimtrace import _backend
from rimtrace.conformal import ChartError, build_chart, domain_seminorms, verify_chain_rule
from rimtrace.corpus import UnknownEntry, corpus_all, corpus_get
from rimtrace.extension import DEFAULT_C, arc_extend, poisson_extend, poisson_extend_dtheta
from rimtrace.seminorms import chain_rule_system, check_equivalence, coeff_sums, composition_residual
from rimtrace.seminorms import seminorms as series_seminorms
from rimtrace.seminorms import trace_seminorms
from rimtrace.series import ArcTrace, BoundaryTrace, PowerSeries, trace_from_series
from rimtrace.smoothness import (
    arc_classify,
    arc_convergence_check,
    arc_decay_check,
    classify_Ap,
    default_schedule,
    radial_sweep,
)

ENV_OUT_DIR = "RIMTRACE_OUT_DIR"
EXIT_OK, EXIT_INVALID, EXIT_INCONCLUSIVE = 0, 2, 3


class CliError(Exception):
    """Validation or I/O failure; ``kind`` tags the summary line."""

    def __init__(self, kind: str, message: str, extra: Optional[dict] = None):
        super().__init__(message)
        self.kind = kind
        self.extra = extra or {}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message)


# -- value parsers (accept CLI strings and JSON config values alike) -----------


def _split(v) -> list:
    if isinstance(v, str):
        return [x for x in v.replace(";", ",").split(",") if x.strip()]
    if isinstance(v, (list, tuple)):
        return list(v)
    return [v]


def p_int(v) -> int:
    if isinstance(v, bool) or (isinstance(v, float) and not v.is_integer()):
        raise ValueError(f"expected an integer, got {v!r}")
    return int(v)


def p_float(v) -> float:
    if isinstance(v, bool):
        raise ValueError(f"expected a number, got {v!r}")
    return float(v)


def p_bool(v) -> bool:
    if isinstance(v, bool):
        return v
    if isinstance(v, str) and v.lower() in ("1", "true", "yes", "0", "false", "no"):
        return v.lower() in ("1", "true", "yes")
    raise ValueError(f"expected a boolean, got {v!r}")


def p_ints(v) -> list:
    return [p_int(x) for x in _split(v)]


def p_floats(v) -> list:
    return [p_float(x) for x in _split(v)]


def p_pair(v) -> list:
    out = p_floats(v)
    if len(out) != 2:
        raise ValueError(f"expected two numbers, got {v!r}")
    return out


def p_points(v) -> list:
    """Complex points as 're,im;re,im' or a JSON list of [re, im] pairs."""
    if isinstance(v, str):
        groups = [g for g in v.split(";") if g.strip()]
        pts = [p_pair(g) for g in groups]
    else:
        pts = [p_pair(g) for g in v]
    if not pts:
        raise ValueError("no evaluation points given")
    return pts


def p_str(v) -> str:
    if not isinstance(v, str):
        raise ValueError(f"expected a string, got {v!r}")
    return v


def p_class(v):
    """Class filter: an integer, 'cap', or 'lo,hi'."""
    parts = _split(v)
    conv = [x.strip() if isinstance(x, str) and x.strip() == "cap" else p_int(x) for x in parts]
    if len(conv) == 1:
        return conv[0]
    if len(conv) == 2:
        return conv
    raise ValueError(f"bad class filter {v!r}")


# -- parameter tables ------------------------------------------------------------

REQUIRED = object()


class Param:
    def __init__(self, flag: str, parse: Callable, default, help: str):
        self.flag = flag
        self.parse = parse
        self.default = default
        self.help = help

    @property
    def dest(self) -> str:
        return self.flag.lstrip("-").replace("-", "_")


COMMON = [
    Param("--degree", p_int, None, "truncation degree for corpus generators"),
]

COMMANDS = {
    "extend": (
        "Poisson extension of a trace, series rim trace or arc trace at given points.",
        "CSV columns: re_z, im_z, re_value, im_value",
        [
            Param("--spec", p_str, REQUIRED, "function spec: corpus:NAME, inline JSON or a JSON file"),
            Param("--z", p_points, REQUIRED, "points 're,im;re,im;...'"),
            Param("--order", p_int, 0, "angular derivative order"),
            Param("--m", p_int, 1024, "rim grid size for series specs"),
            Param("--c", p_float, DEFAULT_C, "quadrature resolution constant"),
        ],
    ),
    "sweep": (
        "Radial sweep of angular derivatives of a series.",
        "CSV columns: order, radius, sup_error",
        [
            Param("--spec", p_str, REQUIRED, "series spec"),
            Param("--orders", p_ints, [0, 1, 2], "derivative orders"),
            Param("--j-range", p_ints, [3, 14], "schedule 1 - 2^-j for j in [j0, j1]"),
            Param("--radii", p_floats, None, "explicit radius schedule (overrides --j-range)"),
            Param("--m", p_int, None, "grid size"),
            Param("--assert-closed-disk", p_bool, False, "trust rim values of a radius-1 series"),
        ],
    ),
    "classify": (
        "Heuristic A^p classification of a series from interior growth.",
        "CSV columns: order, radius, sup_norm, resolved",
        [
            Param("--spec", p_str, REQUIRED, "series spec"),
            Param("--p-max", p_int, 4, "highest order examined"),
            Param("--alpha-div", p_float, 0.1, "slope threshold for divergence"),
            Param("--residual-tol", p_float, 0.1, "RMS residual threshold for a divergent fit"),
            Param("--fit-points", p_int, 6, "resolved radii used by the fit"),
            Param("--j-range", p_ints, [3, 14], "schedule 1 - 2^-j for j in [j0, j1]"),
            Param("--arc", p_pair, None, "classify near the open arc (a, b) instead of the full rim; write --arc=-0.5,0.5 for a negative a"),
        ],
    ),
    "arc-decay": (
        "Decay of the arc extension's angular derivative on a compact window off the arc.",
        "CSV columns: radius, sup, bound (bound empty unless order = 1)",
        [
            Param("--spec", p_str, REQUIRED, "arc spec"),
            Param("--window", p_pair, REQUIRED, "compact window 'theta1,theta2' off the arc"),
            Param("--order", p_int, 1, "angular derivative order"),
            Param("--radii", p_floats, [0.9, 0.99, 0.999, 0.9999], "radius schedule"),
            Param("--n-theta", p_int, 64, "sample angles in the window"),
        ],
    ),
    "arc-converge": (
        "Convergence of arc-extension derivatives to the data on a window inside the arc.",
        "CSV columns: order, radius, sup_error",
        [
            Param("--spec", p_str, REQUIRED, "arc spec with endpoint derivatives"),
            Param("--window", p_pair, REQUIRED, "compact window 'c,d' inside the arc"),
            Param("--orders", p_ints, [0, 1], "derivative orders"),
            Param("--p", p_int, None, "completion order (default: available endpoint data)"),
            Param("--radii", p_floats, [0.9, 0.99, 0.999], "radius schedule"),
            Param("--m", p_int, 1024, "completion trace grid size"),
            Param("--n-theta", p_int, 64, "sample angles in the window"),
        ],
    ),
    "seminorms": (
        "Semi-norms |f|_l of a series (and the equivalence check), or |g|_l of a trace.",
        "CSV columns: order, seminorm",
        [
            Param("--spec", p_str, REQUIRED, "series or trace spec"),
            Param("--p", p_int, 3, "highest order"),
            Param("--m", p_int, None, "grid size"),
            Param("--check", p_bool, False, "run the semi-norm equivalence check (series only)"),
        ],
    ),
    "chain-polys": (
        "Chain-rule polynomial system P_{k,l}, Q_{k,l} with coefficient sums.",
        "no CSV; JSON only",
        [Param("--p", p_int, REQUIRED, "highest order")],
    ),
    "conformal-verify": (
        "Accept or reject a disk map and check the boundary chain rule for F.",
        "CSV columns: t, re_gamma, im_gamma, re_dgamma, im_dgamma",
        [
            Param("--phi", p_str, REQUIRED, "disk map series spec"),
            Param("--F", p_str, '{"coeffs": [0, 0, 1]}', "function on the domain (series spec)"),
            Param("--h", p_float, 1e-4, "finite-difference step"),
            Param("--m", p_int, 1024, "boundary grid size"),
            Param("--segments", p_int, 4096, "segments for the self-intersection check"),
            Param("--p", p_int, None, "also report domain semi-norms of F up to this order"),
        ],
    ),
    "corpus": (
        "List or dump the reference corpus.",
        "no CSV; JSON registry dump",
        [
            Param("--kind", p_str, None, "filter by kind: series, trace, arc, chart"),
            Param("--cls", p_class, None, "filter by class: integer, 'cap' or 'lo,hi'"),
            Param("--name", p_str, None, "single entry by name"),
        ],
    ),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rimtrace", description=__doc__.splitlines()[0], allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    for name, (desc, columns, params) in COMMANDS.items():
        sp = sub.add_parser(name, help=desc, description=desc, epilog=columns, allow_abbrev=False)
        for prm in params + COMMON:
            # a bare boolean flag means true; an explicit value is still accepted
            extra = {"nargs": "?", "const": True} if prm.parse is p_bool else {}
            sp.add_argument(prm.flag, dest=prm.dest, default=None, help=prm.help, **extra)
        sp.add_argument("--config", default=None, help="JSON config file (keys as flag names with underscores)")
        sp.add_argument("--out", default=None, help="artifact base path; .csv/.json written as applicable")
        sp.add_argument("--out-dir", default=None, help=f"directory for default-named artifacts (env {ENV_OUT_DIR})")
        sp.add_argument("--strict", action="store_true", help="exit 3 on inconclusive verdicts")
    return parser


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    """defaults < config file < explicit flags; every value validated up front."""
    params = COMMANDS[command][2] + COMMON
    by_dest = {p.dest: p for p in params}
    raw = {}
    if args.config is not None:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise CliError("io", f"cannot read config {args.config}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise CliError("config", f"config is not valid JSON: {exc.msg}") from exc
        if not isinstance(cfg, dict):
            raise CliError("config", "config must be a JSON object")
        if cfg.pop("command", command) != command:
            raise CliError("config", "config is for a different subcommand")
        unknown = sorted(set(cfg) - set(by_dest))
        if unknown:
            raise CliError("config", f"unknown config keys: {unknown}")
        raw.update(cfg)
    for dest in by_dest:
        v = getattr(args, dest)
        if v is not None:
            raw[dest] = v
    out = {"command": command}
    for dest, prm in by_dest.items():
        if dest in raw and raw[dest] is not None:
            try:
                out[dest] = prm.parse(raw[dest])
            except (TypeError, ValueError) as exc:
                raise CliError("validation", f"{prm.flag}: {exc}") from exc
        elif prm.default is REQUIRED:
            raise CliError("validation", f"{prm.flag} is required")
        else:
            out[dest] = prm.default
    return out


# -- spec loading ----------------------------------------------------------------


def load_spec(text: str, degree: Optional[int] = None):
    """corpus:NAME, inline JSON object, or path to a JSON file."""
    if text.startswith("corpus:"):
        try:
            return corpus_get(text[len("corpus:") :]).build(degree)
        except UnknownEntry as exc:
            raise CliError("spec", exc.args[0]) from exc
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CliError("spec", f"malformed inline spec: {exc.msg}") from exc
    else:
        try:
            with open(text) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise CliError("io", f"cannot read spec {text}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise CliError("spec", f"spec file is not valid JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise CliError("spec", "spec must be a JSON object")
    try:
        if "coeffs" in data:
            return PowerSeries.from_json(data)
        if "arc" in data:
            return ArcTrace.from_json(data)
        if "samples" in data:
            return BoundaryTrace.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError("spec", f"malformed spec: {exc}") from exc
    raise CliError("spec", "spec needs 'coeffs' (series), 'samples' (trace) or 'arc' (arc trace)")


def _expect(obj, cls, what: str):
    if not isinstance(obj, cls):
        raise CliError("spec", f"this command needs a {what} spec, got {type(obj).__name__}")
    return obj


# -- output ----------------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(x, complex):
        return [_jsonable(x.real), _jsonable(x.imag)]
    return x


def _csv(header: list, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _artifact_base(args, command: str) -> Optional[Path]:
    if args.out is not None:
        base = Path(args.out)
        return base.with_suffix("") if base.suffix in (".csv", ".json") else base
    out_dir = args.out_dir or os.environ.get(ENV_OUT_DIR)
    if out_dir:
        return Path(out_dir) / command
    return None


def write_artifacts(base: Optional[Path], config: dict, payload: dict, csv_text: Optional[str]) -> list:
    if base is None:
        return []
    written = []
    try:
        base.parent.mkdir(parents=True, exist_ok=True)
        doc = {"config": _jsonable(config), "backend": _backend.name, **_jsonable(payload)}
        path = base.with_name(base.name + ".json")
        path.write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n")
        written.append(str(path))
        if csv_text is not None:
            path = base.with_name(base.name + ".csv")
            path.write_text(csv_text)
            written.append(str(path))
    except OSError as exc:
        raise CliError("io", f"cannot write artifacts under {base}: {exc.strerror}") from exc
    return written


# -- subcommands: each returns (summary, payload, csv_text, inconclusive) ----------


def cmd_extend(cfg):
    src = load_spec(cfg["spec"], cfg["degree"])
    z = np.array([complex(re, im) for re, im in cfg["z"]])
    l = cfg["order"]
    if isinstance(src, PowerSeries):
        src = trace_from_series(src, 1.0, cfg["m"])
    if isinstance(src, ArcTrace):
        vals = np.atleast_1d(arc_extend(src, l, z, cfg["c"]))
        payload_extra = {}
    elif l == 0:
        vals = np.atleast_1d(poisson_extend(src, z, cfg["c"]))
        payload_extra = {}
    else:
        est = poisson_extend_dtheta(src, l, z, cfg["c"])
        vals = np.atleast_1d(est.value)
        payload_extra = {"two_way_discrepancy": est.discrepancy}
    rows = [(p.real, p.imag, v.real, v.imag) for p, v in zip(z, vals)]
    text = _csv(["re_z", "im_z", "re_value", "im_value"], rows)
    values = [[float(v.real), float(v.imag)] for v in vals]
    summary = {"points": len(values), "value": values[0] if len(values) == 1 else values, **payload_extra}
    return summary, {"values": values, **payload_extra}, text, False


def _schedule(cfg) -> list:
    if cfg.get("radii") is not None:
        return cfg["radii"]
    j = cfg["j_range"]
    if len(j) != 2:
        raise CliError("validation", "--j-range needs two integers")
    return list(default_schedule(tuple(j)))


def cmd_sweep(cfg):
    f = _expect(load_spec(cfg["spec"], cfg["degree"]), PowerSeries, "series")
    rep = radial_sweep(f, cfg["orders"], _schedule(cfg), cfg["m"], cfg["assert_closed_disk"])
    summary = {"orders": rep.orders, "verdicts": {str(k): v for k, v in rep.verdicts.items()}}
    return summary, rep.to_json(), rep.to_csv(), any(v == "inconclusive" for v in rep.verdicts.values())


def cmd_classify(cfg):
    f = _expect(load_spec(cfg["spec"], cfg["degree"]), PowerSeries, "series")
    radii = _schedule(cfg)
    if cfg["arc"] is not None:
        res = arc_classify(f, tuple(cfg["arc"]), cfg["p_max"], radii)
        ev = res.evidence[0]
        verdicts = res.verdicts[0]
        summary = {"arc": cfg["arc"], "verdicts": verdicts}
        inconclusive = "inconclusive" in verdicts
        payload = res.to_json()
    else:
        res = classify_Ap(
            f, cfg["p_max"], cfg["alpha_div"], tuple(cfg["j_range"]), cfg["residual_tol"], cfg["fit_points"], radii
        )
        ev = res.evidence
        summary = {"p_hat": res.p_hat, "capped": res.capped, "inconclusive": res.inconclusive}
        inconclusive = res.inconclusive > 0 or res.p_hat is None
        payload = res.to_json()
    rows = [(e.order, r, s, int(ok)) for e in ev for r, s, ok in zip(res.radii, e.sup_norms, e.resolved)]
    return summary, payload, _csv(["order", "radius", "sup_norm", "resolved"], rows), inconclusive


def cmd_arc_decay(cfg):
    u = _expect(load_spec(cfg["spec"], cfg["degree"]), ArcTrace, "arc")
    rep = arc_decay_check(u, tuple(cfg["window"]), cfg["order"], cfg["radii"], cfg["n_theta"])
    bounds = rep.bounds if rep.bounds is not None else [None] * len(rep.radii)
    text = _csv(["radius", "sup", "bound"], zip(rep.radii, rep.sups, bounds))
    summary = {"violations": rep.violations, "decreasing": rep.decreasing, "final_sup": rep.sups[-1]}
    return summary, rep.to_json(), text, not rep.decreasing


def cmd_arc_converge(cfg):
    u = _expect(load_spec(cfg["spec"], cfg["degree"]), ArcTrace, "arc")
    reports = [
        arc_convergence_check(u, l, tuple(cfg["window"]), cfg["radii"], cfg["p"], cfg["m"], cfg["n_theta"])
        for l in cfg["orders"]
    ]
    rows = [(rep.order, r, e) for rep in reports for r, e in zip(rep.radii, rep.sup_errors)]
    summary = {
        "verdicts": {str(rep.order): rep.verdict for rep in reports},
        "final_errors": {str(rep.order): rep.sup_errors[-1] for rep in reports},
    }
    payload = {"reports": [rep.to_json() for rep in reports]}
    inconclusive = any(rep.verdict == "inconclusive" for rep in reports)
    return summary, payload, _csv(["order", "radius", "sup_error"], rows), inconclusive


def cmd_seminorms(cfg):
    src = load_spec(cfg["spec"], cfg["degree"])
    if isinstance(src, PowerSeries):
        vec = series_seminorms(src, cfg["p"], cfg["m"])
    elif isinstance(src, BoundaryTrace):
        if cfg["check"]:
            raise CliError("validation", "--check needs a series spec")
        vec = trace_seminorms(src, cfg["p"])
    else:
        raise CliError("spec", "seminorms needs a series or trace spec")
    summary = {"values": list(vec.values), "proxy": vec.proxy}
    payload = {"seminorms": vec.to_json()}
    if cfg["check"]:
        rep = check_equivalence(src, cfg["p"], cfg["m"])
        summary.update(holds=rep.holds, min_residual=rep.min_residual)
        payload["equivalence"] = rep.to_json()
    text = _csv(["order", "seminorm"], enumerate(vec.values))
    return summary, payload, text, False


def cmd_chain_polys(cfg):
    p = cfg["p"]
    if p < 1:
        raise CliError("validation", "--p must be at least 1")
    system = chain_rule_system(p)
    a, b = coeff_sums(system)
    residual_zero = all(poly.is_zero() for poly in composition_residual(system).values())
    payload = {
        "system": system.to_json(),
        "a": {f"{k},{l}": v for (k, l), v in a.items()},
        "b": {f"{k},{l}": v for (k, l), v in b.items()},
        "composition_residual_zero": residual_zero,
    }
    summary = {"p": p, "P_1_1": system.P[(1, 1)].to_json(), "composition_residual_zero": residual_zero}
    return summary, payload, None, False


def cmd_conformal_verify(cfg):
    phi = _expect(load_spec(cfg["phi"], cfg["degree"]), PowerSeries, "series")
    F = _expect(load_spec(cfg["F"], cfg["degree"]), PowerSeries, "series")
    try:
        chart = build_chart(phi, cfg["m"], cfg["segments"])
    except ChartError as exc:
        raise CliError("chart", str(exc), {"witness": exc.witness}) from exc
    disc = verify_chain_rule(F, chart, cfg["h"])
    summary = {"accepted": True, "chain_rule_discrepancy": disc}
    payload = {"certificate": chart.map.certificate.to_json(), "chain_rule_discrepancy": disc}
    if cfg["p"] is not None:
        vec = domain_seminorms(F, chart, cfg["p"])
        payload["domain_seminorms"] = vec.to_json()
        summary["domain_seminorms"] = list(vec.values)
    return summary, payload, chart.to_csv(), False


def cmd_corpus(cfg):
    if cfg["name"] is not None:
        try:
            entries = [corpus_get(cfg["name"])]
        except UnknownEntry as exc:
            raise CliError("spec", exc.args[0]) from exc
    else:
        entries = corpus_all(cfg["kind"], cfg["cls"])
    payload = {"entries": [e.to_json() for e in entries]}
    return {"count": len(entries), "names": [e.name for e in entries]}, payload, None, False


HANDLERS = {
    "extend": cmd_extend,
    "sweep": cmd_sweep,
    "classify": cmd_classify,
    "arc-decay": cmd_arc_decay,
    "arc-converge": cmd_arc_converge,
    "seminorms": cmd_seminorms,
    "chain-polys": cmd_chain_polys,
    "conformal-verify": cmd_conformal_verify,
    "corpus": cmd_corpus,
}


def _emit(summary: dict) -> None:
    print(json.dumps(_jsonable(summary), sort_keys=True, allow_nan=False))


def run(argv=None) -> int:
    command = None
    try:
        args = build_parser().parse_args(argv)
        command = args.command
        if command is None:
            raise CliError("usage", f"a subcommand is required: {', '.join(COMMANDS)}")
        cfg = resolve_config(command, args)
        summary, payload, text, inconclusive = HANDLERS[command](cfg)
        written = write_artifacts(_artifact_base(args, command), cfg, payload, text)
    except CliError as exc:
        _emit({"command": command, "status": "error", "error": exc.kind, "message": str(exc), **exc.extra})
        print(f"rimtrace: {exc.kind} error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, KeyError) as exc:
        msg = exc.args[0] if exc.args else type(exc).__name__
        _emit({"command": command, "status": "error", "error": "validation", "message": str(msg)})
        print(f"rimtrace: validation error: {msg}", file=sys.stderr)
        return EXIT_INVALID
    status = "inconclusive" if inconclusive else "ok"
    _emit({"command": command, "status": status, **summary, "artifacts": written})
    return EXIT_INCONCLUSIVE if (inconclusive and args.strict) else EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
