"""Command-line front end.

Every command writes a self-describing report (json or csv) carrying the
resolved inputs, their sha256 digest and the tool version.

Exit status: 0 success, 1 a scenario failed, 2 input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import measure as ms
from . import operator as op
from . import verify
from .measure import RadialMeasure

COMMANDS = ("moments", "carleson", "apply", "norm-profile", "tail-blocks", "scenario", "report-all")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

# params each command accepts, with defaults
PARAMS = {
    "moments": {"N": 16, "method": "auto"},
    "carleson": {"s": 1.0, "alpha": None, "grid_j": 20},
    "apply": {"N": 64, "scheme": "derivative", "coeffs": None, "seed": 0, "method": "fast"},
    "norm-profile": {"N": 4096, "scheme": "derivative", "tol": 1e-8},
    "tail-blocks": {"N": 1024, "scheme": "derivative", "grid_j": 8, "tol": 1e-8},
    "scenario": {"id": None, "N": None, "p": None, "q": None, "scheme": None, "grid_j": None, "trials": None, "seed": None},
    "report-all": {},
}

# scenario config key for each cli param
_SCENARIO_KEYS = {"grid_j": "jmax"}


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    measure_path: str | None = None
    params: dict = field(default_factory=dict)
    output: dict = field(default_factory=lambda: {"format": "json", "path": None})

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise InputError("run config must be an object")
        extra = set(d) - {"command", "measure_path", "params", "output"}
        if extra:
            raise InputError(f"unknown run config key(s): {sorted(extra)}")
        if "command" not in d:
            raise InputError("run config is missing 'command'")
        out = d.get("output", {}) or {}
        if not isinstance(out, dict) or set(out) - {"format", "path"}:
            raise InputError("output must be an object with 'format' and 'path'")
        return cls(
            command=d["command"],
            measure_path=d.get("measure_path"),
            params=dict(d.get("params", {}) or {}),
            output={"format": out.get("format", "json"), "path": out.get("path")},
        )

    def validated(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        allowed = PARAMS[self.command]
        extra = set(self.params) - set(allowed)
        if extra:
            raise InputError(f"unknown param(s) for {self.command}: {sorted(extra)}")
        if self.output.get("format") not in ("json", "csv"):
            raise InputError("output format must be json or csv")
        params = {**allowed, **{k: v for k, v in self.params.items() if v is not None}}
        _check_params(self.command, params)
        return RunConfig(self.command, self.measure_path, params, dict(self.output))


def _need(cond, msg):
    if not cond:
        raise InputError(msg)


def _is_int(x):
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


def _is_real(x):
    return isinstance(x, (int, float, np.integer, np.floating)) and not isinstance(x, bool) and math.isfinite(x)


def _check_params(command, p):
    if p.get("N") is not None:
        _need(_is_int(p["N"]) and p["N"] >= 1, "N must be a positive integer")
    if p.get("scheme") is not None:
        _need(p["scheme"] in op.SCHEMES, f"scheme must be one of {op.SCHEMES}")
    if p.get("grid_j") is not None:
        _need(_is_int(p["grid_j"]) and 2 <= p["grid_j"] <= 40, "grid_j must be an integer in [2, 40]")
    for key in ("s", "p", "q", "tol"):
        if p.get(key) is not None:
            _need(_is_real(p[key]) and p[key] > 0, f"{key} must be a positive real")
    if p.get("alpha") is not None:
        _need(_is_real(p["alpha"]) and p["alpha"] >= 0, "alpha must be a nonnegative real")
    if p.get("trials") is not None:
        _need(_is_int(p["trials"]) and p["trials"] >= 1, "trials must be a positive integer")
    if p.get("seed") is not None:
        _need(_is_int(p["seed"]) and p["seed"] >= 0, "seed must be a nonnegative integer")
    if command == "moments":
        _need(p["method"] in ("auto", "closed", "quadrature"), "method must be auto, closed or quadrature")
    if command == "apply":
        _need(p["method"] in ("fast", "naive"), "method must be fast or naive")
        if p["coeffs"] is not None:
            _need(len(p["coeffs"]) <= p["N"], "coeffs longer than N")
    if command == "norm-profile":
        _need(p["N"] >= 128 and p["N"] & (p["N"] - 1) == 0, "norm-profile N must be a power of two >= 128")
    if command == "scenario":
        _need(p["id"] is not None, "scenario id is required")


# ---------------------------------------------------------------------------
# serialization


def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def dump_json(obj, indent=0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dump_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(dump_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dump_json(v, indent + 1) for v in obj) + "\n" + end + "]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, float, bool, np.number, np.bool_)):
        return _num(obj)
    return json.dumps(str(obj))


def _cell(v):
    if isinstance(v, (int, float, bool, np.number, np.bool_)):
        return _num(v)
    if v is None:
        return ""
    if isinstance(v, (list, tuple, dict)):
        return dump_json(v).replace("\n", " ")
    return str(v)


def dump_csv(report) -> str:
    buf = io.StringIO()
    buf.write(f"# tool=dhlab version={report['version']} command={report['command']}\n")
    buf.write(f"# inputs_digest={report['inputs_digest']} status={report['status']}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(report["columns"])
    for row in report["rows"]:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _emit(report, output):
    text = dump_json(report) + "\n" if output["format"] == "json" else dump_csv(report)
    if output.get("path"):
        Path(output["path"]).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def load_measure(path) -> RadialMeasure:
    if path is None:
        raise InputError("--measure is required for this command")
    try:
        spec = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read measure file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not a valid measure file ({exc.msg} at line {exc.lineno})") from None
    try:
        return RadialMeasure.from_dict(spec)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def _cmd_moments(m, p):
    mu = ms.moments(m, p["N"], p["method"])
    rows = [[n, float(v)] for n, v in enumerate(mu.values)]
    return "ok", {"source": mu.source}, ["n", "moment"], rows


def _cmd_carleson(m, p):
    grid = ms.dyadic_grid(p["grid_j"])
    if p["alpha"] is None:
        rep = ms.carleson_constant(m, p["s"], grid)
    else:
        rep = ms.log_carleson_constant(m, p["s"], p["alpha"], grid)
    label = f"{p['s']:g}-Carleson" if rep.log_alpha == 0 else f"{p['alpha']:g}-logarithmic {p['s']:g}-Carleson"
    verdict = ("not " + label) if rep.vanishing == "growing" else ("vanishing " + label if rep.vanishing == "decaying" else label)
    summary = {
        "verdict": verdict,
        "trend": rep.vanishing,
        "constant": rep.constant,
        "exponent_estimate": rep.exponent_estimate,
    }
    rows = [[j, float(t), float(r)] for j, (t, r) in enumerate(zip(rep.grid, rep.ratios), start=1)]
    return "ok", summary, ["j", "t", "ratio"], rows


def _cmd_apply(m, p):
    N = p["N"]
    if p["coeffs"] is None:
        a = np.random.default_rng(p["seed"]).standard_normal(N)
    else:
        a = np.zeros(N)
        a[: len(p["coeffs"])] = p["coeffs"]
    H = op.build(ms.moments(m, 2 * N - 1), N, p["scheme"])
    b = op.apply(H, a, p["method"])
    rows = [[n, float(x), float(y)] for n, (x, y) in enumerate(zip(a, b))]
    return "ok", {"output_norm": float(np.linalg.norm(b))}, ["n", "input", "output"], rows


def _cmd_norm_profile(m, p):
    orders = [64 << i for i in range(int(math.log2(p["N"] // 64)) + 1)]
    prof = op.norm_profile(m, p["scheme"], orders, p["tol"])
    ratios = [math.nan] + list(prof.ratios)
    rows = [[n, v, r] for n, v, r in zip(prof.orders, prof.norms, ratios)]
    return "ok", {"growth_verdict": prof.growth_verdict}, ["N", "norm", "ratio"], rows


def _cmd_tail_blocks(m, p):
    r_list = ms.dyadic_grid(p["grid_j"])
    res = op.tail_block_norm(m, p["scheme"], p["N"], r_list, p["tol"])
    first = res[0][1]
    rows = [[j, r, v, v / first if first > 0 else math.nan] for j, (r, v) in enumerate(res, start=1)]
    norms = [v for _, v in res]
    summary = {"strictly_decreasing": bool(np.all(np.diff(norms) < 0)), "final_over_initial": rows[-1][3]}
    return "ok", summary, ["j", "r", "norm", "over_initial"], rows


def _outcome_rows(o: verify.VerificationOutcome, measure="-"):
    return [[o.scenario_id, measure, o.status, name, value] for name, value in o.metrics]


def _scenario_config(p, measures=None):
    sid = p["id"]
    defaults = verify.scenario_defaults(sid)
    cfg = {}
    for key in ("N", "p", "q", "scheme", "grid_j", "trials", "seed"):
        if p.get(key) is None:
            continue
        target = _SCENARIO_KEYS.get(key, key)
        if target not in defaults:
            raise InputError(f"scenario {sid} does not take --{key.replace('_', '-')}")
        cfg[target] = p[key]
    if measures is not None:
        cfg["measures"] = measures
    return cfg


def _cmd_scenario(m, p, measure_name="measure"):
    try:
        verify.scenario_defaults(p["id"])
    except verify.UnknownScenarioError:
        raise InputError(f"unknown scenario {p['id']!r}; known: {sorted(verify.SCENARIOS)}") from None
    cfg = _scenario_config(p, None if m is None else {measure_name: m})
    o = verify.run_scenario(p["id"], cfg)
    status = {True: "pass", False: "fail", None: "informational"}[o.passed]
    summary = {"scenario": o.scenario_id, "passed": o.passed, "tolerance": o.tolerance, "scenario_digest": o.inputs_digest}
    return status, summary, ["scenario", "measure", "status", "metric", "value"], _outcome_rows(o, measure_name if m else "-")


def _headline(o):
    """One representative metric per outcome for the summary table."""
    for name, value in o.metrics:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return name, value
    return (o.metrics[0] if o.metrics else ("", None))


def report_all(corpus_dir) -> tuple[str, dict, list, list]:
    """Scenario x measure table over every ``*.json`` measure file in a directory.

    Failures are recorded per cell; the sweep never aborts.
    """
    d = Path(corpus_dir)
    if not d.is_dir():
        raise InputError(f"{corpus_dir} is not a directory")
    files = sorted(d.glob("*.json"))
    rows = []
    measures = {}
    for path in files:
        try:
            measures[path.stem] = load_measure(path)
        except InputError as exc:
            rows += [[sid, path.stem, "input-error", "error", str(exc)] for sid in verify.SCENARIOS]
    if measures:
        for sid, (_, defaults) in verify.SCENARIOS.items():
            targets = [("-", None)] if not defaults["measures"] else list(measures.items())
            for name, m in targets:
                try:
                    o = verify.run_scenario(sid, None if m is None else {"measures": {name: m}})
                    rows.append([sid, name, o.status, *_headline(o)])
                except Exception as exc:  # isolate every cell
                    rows.append([sid, name, "error", "error", f"{type(exc).__name__}: {exc}"])
    states = {r[2] for r in rows}
    if states & {"input-error", "error"}:
        status = "input-error"
    elif "fail" in states:
        status = "fail"
    else:
        status = "pass"
    counts = {s: sum(r[2] == s for r in rows) for s in sorted(states)}
    return status, {"files": [p.name for p in files], "counts": counts}, ["scenario", "measure", "status", "metric", "value"], rows


_HANDLERS = {
    "moments": _cmd_moments,
    "carleson": _cmd_carleson,
    "apply": _cmd_apply,
    "norm-profile": _cmd_norm_profile,
    "tail-blocks": _cmd_tail_blocks,
}


def _inputs(cfg: RunConfig, m: RadialMeasure | None):
    inputs = {"command": cfg.command, "params": verify._jsonable(cfg.params)}
    if m is not None:
        inputs["measure"] = m.to_dict()
    elif cfg.measure_path:
        inputs["measure_path"] = str(cfg.measure_path)
    return inputs


def execute(config: RunConfig) -> int:
    """Run one command and emit its report; returns the exit status."""
    try:
        cfg = config.validated()
        if cfg.command == "report-all":
            if cfg.measure_path is None:
                raise InputError("report-all needs a corpus directory")
            m = None
            status, summary, columns, rows = report_all(cfg.measure_path)
        elif cfg.command == "scenario":
            m = load_measure(cfg.measure_path) if cfg.measure_path else None
            name = Path(cfg.measure_path).stem if cfg.measure_path else "measure"
            status, summary, columns, rows = _cmd_scenario(m, cfg.params, name)
        else:
            m = load_measure(cfg.measure_path)
            status, summary, columns, rows = _HANDLERS[cfg.command](m, cfg.params)
    except (InputError, ValueError) as exc:
        print(f"dhlab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    inputs = _inputs(cfg, m)
    report = {
        "tool": "dhlab",
        "version": __version__,
        "command": cfg.command,
        "status": status,
        "inputs": inputs,
        "inputs_digest": verify.digest(inputs),
        "summary": summary,
        "columns": columns,
        "rows": rows,
    }
    _emit(report, cfg.output)
    if status == "input-error":
        return EXIT_INPUT
    return EXIT_FAIL if status == "fail" else EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _coeff_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("coefficients must be comma-separated reals") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dhlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"dhlab {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--measure", help="measure spec file (json)")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    def add(name, help, *flags):
        p = sub.add_parser(name, parents=[common], help=help)
        for f in flags:
            f(p)
        return p

    N = lambda p: p.add_argument("--N", type=int)
    scheme = lambda p: p.add_argument("--scheme", choices=op.SCHEMES)
    grid = lambda p: p.add_argument("--grid-j", dest="grid_j", type=int)
    seed = lambda p: p.add_argument("--seed", type=int)

    add("moments", "moment sequence", N, lambda p: p.add_argument("--method", choices=("auto", "closed", "quadrature")))
    add(
        "carleson",
        "Carleson tail ratios",
        lambda p: p.add_argument("--s", type=float),
        lambda p: p.add_argument("--alpha", type=float),
        grid,
    )
    add(
        "apply",
        "apply the truncated matrix to a vector",
        N,
        scheme,
        seed,
        lambda p: p.add_argument("--coeffs", type=_coeff_list, help="comma-separated input; random if omitted"),
        lambda p: p.add_argument("--method", choices=("fast", "naive")),
    )
    add("norm-profile", "spectral norms over doubling orders", N, scheme)
    add("tail-blocks", "norms of tail-restricted matrices", N, scheme, grid)
    sc = add(
        "scenario",
        "run a named verification scenario",
        N,
        scheme,
        grid,
        seed,
        lambda p: p.add_argument("--p", type=float),
        lambda p: p.add_argument("--q", type=float),
        lambda p: p.add_argument("--trials", type=int),
    )
    sc.add_argument("id", help=", ".join(verify.SCENARIOS))
    ra = sub.add_parser("report-all", parents=[common], help="run the scenario catalog over a corpus directory")
    ra.add_argument("corpus_dir")
    run = sub.add_parser("run", help="execute a RunConfig file")
    run.add_argument("config")
    return parser


def _config_from_args(args) -> RunConfig:
    if args.command == "run":
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot load run config {args.config}: {exc}") from None
        return RunConfig.from_dict(data)
    skip = {"command", "measure", "out", "format", "corpus_dir"}
    params = {k: v for k, v in vars(args).items() if k not in skip and v is not None}
    measure = args.corpus_dir if args.command == "report-all" else args.measure
    return RunConfig(args.command, measure, params, {"format": args.format, "path": args.out})


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_INPUT
    try:
        cfg = _config_from_args(args)
    except InputError as exc:
        print(f"dhlab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return execute(cfg)


if __name__ == "__main__":
    sys.exit(main())
