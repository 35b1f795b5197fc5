"""Command-line interface.

Exit codes: 0 success, 1 usage or input error, 2 verification or scan failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from ._arith import encode_value, format_number, to_fraction
from .bounds import (
    BoundReport,
    berry_esseen_interval_bound,
    best_bound,
    iterated_bound,
    lev_bound,
    triple_bound,
)
from .constants import (
    C1_TARGET,
    C2_TARGET,
    C3_STRETCH,
    C3_TARGET,
    DEFAULT_RESOLUTION,
    DEFAULT_ROUNDS,
    NU_TARGET,
    NU_TARGET_GATE,
    certify_all,
    default_chain,
)
from .dist import (
    EXACT,
    FLOAT,
    IntegerDistribution,
    ModularDistribution,
    convolve,
    max_concentration,
    self_convolve,
    uniform_on,
)
from .oracle import (
    BudgetExceeded,
    SCAN_BUDGET,
    ScanRecord,
    general3_stress,
    leader_radcliffe_scan,
    records_to_csv,
    summarize,
    triple_formula_scan,
)

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
EXACT_MODULUS_LIMIT = 10**4


class UsageError(Exception):
    pass


class InputError(UsageError):
    """Malformed input, located by line and column."""

    def __init__(self, source: str, line: int, col: int, msg: str):
        super().__init__(f"{source}:{line}:{col}: {msg}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    parameters: dict = field(default_factory=dict)
    output_format: str = "table"
    seed: int | None = None
    precision: str = EXACT

    def header(self) -> dict:
        return {"program": "anticoncentration", "version": __version__,
                "config": encode_value(asdict(self))}


# ----------------------------------------------------------------- output

def _cell(v) -> str:
    if isinstance(v, (dict, list)):
        return json.dumps(encode_value(v), sort_keys=True)
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    return format_number(v)


def _csv_cell(v) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        return repr(v)
    return _cell(v)


def render(config: RunConfig, rows: list[dict], summary: dict | None = None) -> str:
    header = config.header()
    fmt = config.output_format
    if fmt == "json":
        doc = {"header": header, "results": encode_value(rows)}
        if summary is not None:
            doc["summary"] = encode_value(summary)
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if fmt == "jsonl":
        lines = [json.dumps({"header": header}, sort_keys=True)]
        lines += [json.dumps(encode_value(r), sort_keys=True) for r in rows]
        if summary is not None:
            lines.append(json.dumps({"summary": encode_value(summary)}, sort_keys=True))
        return "\n".join(lines) + "\n"
    head = "# " + json.dumps(header, sort_keys=True)
    cols = list(dict.fromkeys(k for r in rows for k in r))
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_csv_cell(r.get(c)) for c in cols])
        text = head + "\n" + buf.getvalue()
        if summary is not None:
            text += "# summary " + json.dumps(encode_value(summary), sort_keys=True) + "\n"
        return text
    cells = [[_cell(r.get(c)) for c in cols] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(cols)]
    out = [head]
    if cols:
        out.append("  ".join(c.ljust(wd) for c, wd in zip(cols, widths)).rstrip())
        out.append("  ".join("-" * wd for wd in widths))
        out += ["  ".join(v.ljust(wd) for v, wd in zip(row, widths)).rstrip() for row in cells]
    if summary is not None:
        out.append("summary: " + ", ".join(f"{k}={_cell(v)}" for k, v in summary.items()))
    return "\n".join(out) + "\n"


# ----------------------------------------------------------------- inputs

def parse_set(text: str) -> list[int]:
    out = []
    col = 1
    for tok in text.split(","):
        stripped = tok.strip()
        try:
            out.append(int(stripped))
        except ValueError:
            raise InputError("--set", 1, col, f"not an integer: {stripped!r}") from None
        col += len(tok) + 1
    return out


def parse_weights(path: str) -> dict[int, Fraction]:
    """Read ``point weight`` pairs, one per line; ``#`` starts a comment."""
    weights: dict[int, Fraction] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        parts = body.split()
        if len(parts) != 2:
            col = len(body) - len(body.lstrip()) + 1
            raise InputError(path, lineno, col, "expected '<point> <weight>'")
        col_pt = body.index(parts[0]) + 1
        col_w = body.index(parts[1], col_pt - 1 + len(parts[0])) + 1
        try:
            point = int(parts[0])
        except ValueError:
            raise InputError(path, lineno, col_pt, f"bad point {parts[0]!r}") from None
        try:
            w = to_fraction(parts[1])
        except (ValueError, ZeroDivisionError):
            raise InputError(path, lineno, col_w, f"bad weight {parts[1]!r}") from None
        if w < 0:
            raise InputError(path, lineno, col_w, "negative weight")
        if point in weights:
            raise InputError(path, lineno, col_pt, f"duplicate point {point}")
        weights[point] = w
    if not weights:
        raise UsageError(f"{path}: no weights found")
    return weights


def _build_distribution(args, backend: str):
    if args.weights:
        table = parse_weights(args.weights)
        if sum(table.values()) != 1:
            raise UsageError(f"{args.weights}: weights sum to {sum(table.values())}, not 1")
        if args.mod is not None:
            cells = [Fraction(0)] * args.mod
            for x, w in table.items():
                if not 0 <= x < args.mod:
                    raise UsageError(f"point {x} is not a residue mod {args.mod}")
                cells[x] = w
            d = ModularDistribution(args.mod, cells, EXACT)
        else:
            lo = min(table)
            cells = [Fraction(0)] * (max(table) - lo + 1)
            for x, w in table.items():
                cells[x - lo] = w
            d = IntegerDistribution(lo, cells, EXACT)
        return d if backend == EXACT else d.to_float()
    pts = parse_set(args.set)
    return uniform_on(pts, args.mod, backend)


# --------------------------------------------------------------- commands

def cmd_exact(args, config: RunConfig):
    if args.mod is not None and args.mod < 2:
        raise UsageError("--mod must be >= 2")
    backend = args.backend
    if backend is None:
        backend = EXACT if args.mod is None or args.mod <= EXACT_MODULUS_LIMIT else FLOAT
    config.precision = backend
    if args.ell < 1:
        raise UsageError("--ell must be >= 1")
    try:
        d = _build_distribution(args, backend)
        total = self_convolve(d, args.ell, args.method)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    res = max_concentration(total)
    rows = [{"quantity": "max_probability", "value": res.max_probability},
            {"quantity": "argmax", "value": list(res.argmax_points)}]
    if args.show_dist:
        pts = range(total.modulus) if isinstance(total, ModularDistribution) else total.points
        rows += [{"quantity": f"P[Y={x}]", "value": total.weight(x)} for x in pts]
    return rows, None, EXIT_OK


def _c3_from(args) -> Fraction:
    if args.c3 is not None:
        return to_fraction(args.c3)
    return default_chain()["C3"].value


def _report_row(r: BoundReport) -> dict:
    return {"bound": r.bound_name, "value": r.value, "applicable": r.applicable,
            "reason": r.reason_if_not, "intermediates": r.intermediates}


def _error_row(name: str, msg: str) -> dict:
    return {"bound": name, "value": None, "applicable": False, "reason": msg, "intermediates": {}}


def cmd_bound(args, config: RunConfig):
    which = ["berry-esseen", "triple", "lev", "iterated"] if args.which == "all" else [args.which]
    need = {
        "berry-esseen": ("n", "ell"),
        "triple": ("n",),
        "lev": ("p", "n", "ell"),
        "iterated": ("lambda_", "ell", "p"),
    }
    rows = []
    for name in which:
        missing = [k for k in need[name] if getattr(args, k) is None]
        if missing:
            flags = ", ".join("--" + k.rstrip("_") for k in missing)
            rows.append(_error_row(name, f"missing {flags}"))
            continue
        try:
            if name == "berry-esseen":
                r = berry_esseen_interval_bound(args.n, args.ell)
            elif name == "triple":
                r = triple_bound(args.n)
            elif name == "lev":
                r = lev_bound(args.p, args.n, args.ell)
            else:
                r = iterated_bound(args.lambda_, args.ell, args.p, _c3_from(args))
            rows.append(_report_row(r))
        except ValueError as exc:
            rows.append(_error_row(name, str(exc)))
    summary = None
    if args.which == "all":
        if args.n is None or args.ell is None:
            rows.append(_error_row("best", "missing --n or --ell"))
        else:
            lam = None if args.lambda_ is None else to_fraction(args.lambda_)
            uniform = lam is None or lam == Fraction(1, args.n)
            try:
                best = best_bound(args.p, args.n, args.ell, lam, _c3_from(args), uniform=uniform)
                rows.append(_report_row(best))
                summary = {"winner": best.intermediates["winner"], "value": best.value}
            except ValueError as exc:
                rows.append(_error_row("best", str(exc)))
    return rows, summary, EXIT_OK


def cmd_certify(args, config: RunConfig):
    chain = certify_all(args.resolution, args.rounds)
    wanted = {"c1": ["C1"], "c2": ["C1", "C2"], "c3": ["C1", "C2", "C3"],
              "nu": ["C1", "C2", "C3", "nu"], "all": ["C1", "C2", "C3", "nu"]}[args.constant]
    targets = {"C1": C1_TARGET, "C2": C2_TARGET, "C3": C3_TARGET}
    rows, failed = [], False
    for name in wanted:
        c = chain[name]
        row = c.to_dict()
        row["value"] = c.value
        if name in targets:
            met = c.value <= targets[name]
            row["target"] = f"<= {format_number(targets[name])}"
        else:
            required = chain["C3"].value <= NU_TARGET_GATE
            met = c.value >= NU_TARGET or not required
            row["target"] = f">= {format_number(NU_TARGET)}" + ("" if required else " (informational)")
        row["target_met"] = met
        failed |= not (met and c.verified)
        rows.append(row)
    summary = {"all_verified": all(chain[n].verified for n in wanted), "targets_met": not failed}
    if "C3" in wanted:
        summary["c3_stretch_1_minus_2.27e-12_met"] = chain["C3"].value <= C3_STRETCH
    return rows, summary, EXIT_FAIL if failed else EXIT_OK


def cmd_scan(args, config: RunConfig):
    try:
        if args.mode == "triple-formula":
            records = triple_formula_scan(args.n_max)
        elif args.mode == "leader-radcliffe":
            if args.n is None or args.ell is None or args.window is None:
                raise UsageError("leader-radcliffe needs --n, --ell and --window")
            records = leader_radcliffe_scan(args.n, args.ell, args.window, args.budget)
        else:
            if args.p is None or args.lambda_ is None:
                raise UsageError("general3 needs --p and --lambda")
            seed = 0 if args.seed is None else args.seed
            records = general3_stress(args.p, args.lambda_, args.trials, seed, _c3_from(args),
                                      args.max_k)
    except BudgetExceeded as exc:
        raise UsageError(f"budget exceeded: requires {exc.required} (budget {exc.budget});"
                         f" rerun with --budget {exc.required}") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    summary = summarize(records)
    status = EXIT_OK if summary["failed"] == 0 else EXIT_FAIL
    return records, summary, status


def _random_float_law(p: int, seed: int) -> ModularDistribution:
    rng = np.random.default_rng(seed)
    w = rng.random(p)
    return ModularDistribution(p, w / w.sum(), FLOAT)


def _timed(fn, repeats: int):
    best, out = float("inf"), None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cmd_bench(args, config: RunConfig):
    if not 2 <= args.p <= 10**6:
        raise UsageError("--p must lie in [2, 1e6]")
    if args.ell < 1:
        raise UsageError("--ell must be >= 1")
    config.precision = FLOAT
    seed = 0 if args.seed is None else args.seed
    d = _random_float_law(args.p, seed)
    methods = ["naive", "transform"]
    results = {}
    for m in methods:
        conv_t, conv = _timed(lambda: convolve(d, d, m), args.repeats)
        self_t, full = _timed(lambda: self_convolve(d, args.ell, m), args.repeats)
        results[m] = (conv_t, self_t, conv.as_array(), full.as_array())
    diff_conv = float(np.max(np.abs(results["naive"][2] - results["transform"][2])))
    diff_full = float(np.max(np.abs(results["naive"][3] - results["transform"][3])))
    max_diff = max(diff_conv, diff_full)
    if max_diff > 1e-9:
        sys.stderr.write(f"transform and naive disagree: max-norm {max_diff:.3g} > 1e-9\n")
        return [], {"max_abs_diff": max_diff, "agree": False}, EXIT_FAIL
    shown = methods if args.method == "both" else [args.method]
    rows = [{"method": m, "p": args.p, "ell": args.ell,
             "convolve_seconds": results[m][0], "self_convolve_seconds": results[m][1],
             "max_abs_diff": max_diff} for m in shown]
    return rows, {"agree": True, "max_abs_diff": max_diff}, EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["table", "json", "jsonl", "csv"], default="table",
                        help="output format (default: table)")
    common.add_argument("--seed", type=int, default=None)

    parser = _Parser(prog="anticoncentration",
                     description="Exact concentration probabilities and anticoncentration bounds.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("exact", parents=[common], help="exact l-fold concentration")
    dom = p.add_mutually_exclusive_group(required=True)
    dom.add_argument("--mod", type=int, help="work in Z_mod")
    dom.add_argument("--int", action="store_true", help="work in Z")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--set", help="comma-separated support points (uniform law)")
    src.add_argument("--weights", help="file of '<point> <weight>' lines")
    p.add_argument("--ell", type=int, default=1)
    p.add_argument("--backend", choices=[EXACT, FLOAT], default=None)
    p.add_argument("--method", choices=["naive", "kronecker", "transform"], default=None)
    p.add_argument("--show-dist", action="store_true")

    p = sub.add_parser("bound", parents=[common], help="evaluate closed-form bounds")
    p.add_argument("--which", choices=["berry-esseen", "triple", "lev", "iterated", "all"],
                   default="all")
    p.add_argument("--n", type=int)
    p.add_argument("--ell", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--lambda", dest="lambda_", type=str)
    p.add_argument("--c3", type=str, help="rational C3 (default: certified value)")

    p = sub.add_parser("certify", parents=[common], help="certify C1, C2, C3 and nu")
    p.add_argument("--constant", choices=["c1", "c2", "c3", "nu", "all"], default="all")
    p.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION)
    p.add_argument("--rounds", type=int, default=DEFAULT_ROUNDS)

    p = sub.add_parser("scan", parents=[common], help="brute-force oracle scans")
    p.add_argument("--mode", choices=["leader-radcliffe", "general3", "triple-formula"],
                   required=True)
    p.add_argument("--n-max", type=int, default=60)
    p.add_argument("--n", type=int)
    p.add_argument("--ell", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--lambda", dest="lambda_", type=str)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--max-k", type=int, default=3)
    p.add_argument("--c3", type=str)
    p.add_argument("--budget", type=int, default=SCAN_BUDGET)

    p = sub.add_parser("bench", parents=[common], help="time float convolution methods")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--ell", type=int, default=2)
    p.add_argument("--method", choices=["naive", "transform", "both"], default="both")
    p.add_argument("--repeats", type=int, default=3)
    return parser


COMMANDS = {"exact": cmd_exact, "bound": cmd_bound, "certify": cmd_certify,
            "scan": cmd_scan, "bench": cmd_bench}


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "format", "seed")}
    if "lambda_" in params:
        params["lambda"] = params.pop("lambda_")
    config = RunConfig(args.command, params, args.format, args.seed)
    try:
        rows, summary, status = COMMANDS[args.command](args, config)
    except UsageError as exc:
        sys.stderr.write(f"anticoncentration {args.command}: {exc}\n")
        return EXIT_USAGE
    if rows and isinstance(rows[0], ScanRecord):
        if config.output_format == "csv":
            text = "# " + json.dumps(config.header(), sort_keys=True) + "\n" + records_to_csv(rows)
            text += "# summary " + json.dumps(summary, sort_keys=True) + "\n"
            stdout.write(text)
            return status
        if config.output_format == "json":
            config.output_format = "jsonl"
        rows = [r.to_dict() if config.output_format == "jsonl" else
                {"experiment": r.experiment, "instance": r.instance, "exact": r.exact_value,
                 "bound": r.bound_value, "pass": r.passed, "seed": r.seed} for r in rows]
    stdout.write(render(config, rows, summary))
    return status


if __name__ == "__main__":
    sys.exit(main())
