"""Command-line harness: exact values, bounds, simulation, verification,
scaling sweeps, and observation traces.

Subcommands: ``exact``, ``simulate``, ``verify``, ``scaling``, ``trace``,
``bounds``.  Outputs (text, CSV, or JSON) embed the tool version, the
effective configuration, the seed, and the exact command line, so every
file is reproducible from its own header.  Exit codes: 0 success, 1 usage
error, 2 verification failure, 3 resource guard.
"""
from __future__ import annotations

import argparse
import decimal
import json
import math
import os
import shlex
import sys
from fractions import Fraction

from . import __version__
from .exact import (
    best_epsilon,
    bound_report,
    exact_tables,
    lower_bound_tau_p,
    success_probability_exact,
)
from .graph import PathPower
from .observer import Observer
from .oracle import ResourceGuardError
from .simulate import simulate
from .strategies import KINDS, Strategy, default_threshold
from .verify import verify_all

SEED_ENV_VAR = "STOPFLOW_SEED"

SIMULATE_CSV_HEADER = "n,k,strategy,trials,wins,estimate,stderr,ci_lo,ci_hi,seed"
SCALING_CSV_HEADER = "n,k,p_exact,p_decimal,scaled,upper_bound,lower_bound,best_epsilon"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we own the exit codes
        raise UsageError(message)


def fraction_decimal(value: Fraction, digits: int = 20) -> str:
    """Decimal rendering with the stated number of significant digits."""
    with decimal.localcontext() as ctx:
        ctx.prec = digits
        ctx.rounding = decimal.ROUND_HALF_EVEN
        return str(decimal.Decimal(value.numerator) / decimal.Decimal(value.denominator))


def parse_grid(spec: str, what: str) -> list[int]:
    """Parse '12', '10..200', or '10..200:10' into a list of values."""
    try:
        if ".." not in spec:
            return [int(spec)]
        lo_part, rest = spec.split("..", 1)
        step = 1
        if ":" in rest:
            hi_part, step_part = rest.split(":", 1)
            step = int(step_part)
        else:
            hi_part = rest
        lo, hi = int(lo_part), int(hi_part)
        if step < 1 or hi < lo:
            raise ValueError
        return list(range(lo, hi + 1, step))
    except ValueError:
        raise UsageError(f"bad {what} specification {spec!r}; expected N, A..B, or A..B:STEP")


def _require(args, name: str):
    value = getattr(args, name.replace("-", "_"), None)
    if value is None:
        raise UsageError(f"missing required option --{name}")
    return value


def _to_int(value, what: str) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise UsageError(f"bad integer for {what}: {value!r}")


def _to_float(value, what: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise UsageError(f"bad number for {what}: {value!r}")


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return _to_int(args.seed, "--seed")
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        return _to_int(env, SEED_ENV_VAR)
    return 0


def _resolve_strategy(args, n: int, seed: int) -> Strategy:
    kind = _require(args, "strategy")
    if kind not in KINDS:
        raise UsageError(f"unknown strategy {kind!r}; expected one of {', '.join(KINDS)}")
    if kind == "tau_p_star":
        p = _to_float(_require(args, "p"), "--p")
        if not 0.0 <= p <= 1.0:
            raise UsageError(f"--p must lie in [0, 1], got {p}")
        return Strategy.tau_p_star(p, rng_seed=seed)
    if kind == "classical_threshold":
        r = _require(args, "r")
        r_val = default_threshold(n) if r == "auto" else _to_int(r, "--r")
        if r_val < 0:
            raise UsageError(f"--r must be >= 0, got {r_val}")
        return Strategy.classical_threshold(r_val)
    return Strategy(kind=kind)


# ---------------------------------------------------------------------------
# Output plumbing
# ---------------------------------------------------------------------------

def _command_line(args) -> str:
    return "stopflow " + " ".join(shlex.quote(a) for a in args._argv)


def _provenance_comments(args, config: dict) -> list[str]:
    lines = [f"# stopflow {__version__}"]
    for key in sorted(config):
        lines.append(f"# config {key}={config[key]}")
    lines.append(f"# command {_command_line(args)}")
    return lines


def _json_envelope(args, config: dict, payload: dict) -> str:
    doc = {
        "tool": {"name": "stopflow", "version": __version__},
        "command": _command_line(args),
        "config": config,
    }
    doc.update(payload)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_exact(args) -> int:
    n = _to_int(_require(args, "n"), "--n")
    k = _to_int(_require(args, "k"), "--k")
    tabs = exact_tables(n, k)
    prob = tabs.probability
    config = {"mode": "exact", "n": n, "k": k, "format": args.format}

    if args.format == "json":
        payload = {
            "report": {
                "n": n,
                "k": k,
                "probability_fraction": str(prob),
                "probability_decimal": fraction_decimal(prob),
                "per_m": [
                    {
                        "m": m,
                        "arrangements": tabs.W[m],
                        "term_fraction": str(Fraction(tabs.W[m], m * math.comb(n, m))),
                    }
                    for m in sorted(tabs.W)
                ],
            }
        }
        _emit(args, _json_envelope(args, config, payload))
        return 0

    if args.format == "csv":
        lines = _provenance_comments(args, config)
        lines.append(f"# probability {prob} = {fraction_decimal(prob)}")
        lines.append("m,arrangements,term_fraction,term_decimal")
        for m in sorted(tabs.W):
            term = Fraction(tabs.W[m], m * math.comb(n, m))
            lines.append(f"{m},{tabs.W[m]},{term},{fraction_decimal(term)}")
        _emit(args, "\n".join(lines) + "\n")
        return 0

    lines = [f"P[win] for n={n}, k={k}: {prob} = {fraction_decimal(prob)}", "", "m  arrangements  term"]
    for m in sorted(tabs.W):
        term = Fraction(tabs.W[m], m * math.comb(n, m))
        lines.append(f"{m:>3}  {tabs.W[m]:>12}  {term} = {fraction_decimal(term)}")
    _emit(args, "\n".join(lines) + "\n")
    return 0


def _report_row(rep) -> str:
    return ",".join(
        str(v)
        for v in (
            rep.n, rep.k, rep.strategy, rep.trials, rep.wins,
            rep.estimate, rep.stderr, rep.ci_lo, rep.ci_hi, rep.seed,
        )
    )


def cmd_simulate(args) -> int:
    n = _to_int(_require(args, "n"), "--n")
    k = _to_int(_require(args, "k"), "--k")
    trials = _to_int(args.trials, "--trials")
    if trials < 1:
        raise UsageError(f"--trials must be >= 1, got {trials}")
    threads = _to_int(args.threads, "--threads")
    seed = _resolve_seed(args)
    strategy = _resolve_strategy(args, n, seed)
    PathPower(n, k)  # validate early so bad (n, k) is a usage error

    rep = simulate(n, k, strategy, trials, seed, threads=threads)
    config = {
        "mode": "simulate",
        "n": n,
        "k": k,
        "strategy": strategy.describe(),
        "trials": trials,
        "seed": seed,
        "threads": threads,
        "format": args.format,
    }

    if args.format == "json":
        payload = {
            "report": {
                "n": rep.n,
                "k": rep.k,
                "strategy": rep.strategy,
                "trials": rep.trials,
                "wins": rep.wins,
                "estimate": rep.estimate,
                "stderr": rep.stderr,
                "ci_lo": rep.ci_lo,
                "ci_hi": rep.ci_hi,
                "seed": rep.seed,
                "wall_time": rep.wall_time,
            }
        }
        _emit(args, _json_envelope(args, config, payload))
        return 0

    if args.format == "csv":
        lines = _provenance_comments(args, config)
        lines.append(SIMULATE_CSV_HEADER)
        lines.append(_report_row(rep))
        _emit(args, "\n".join(lines) + "\n")
        return 0

    _emit(
        args,
        (
            f"strategy {rep.strategy} on n={rep.n}, k={rep.k}: "
            f"{rep.wins}/{rep.trials} wins, estimate {rep.estimate:.6f} "
            f"(stderr {rep.stderr:.6f}, 95% CI [{rep.ci_lo:.6f}, {rep.ci_hi:.6f}], seed {rep.seed})\n"
        ),
    )
    return 0


def cmd_verify(args) -> int:
    n_max = _to_int(args.n_max, "--n-max")
    bounds_n = _to_int(args.bounds_n, "--bounds-n")
    report = verify_all(n_max=n_max, skip_dp=args.skip_dp, bounds_max_n=bounds_n)
    config = {
        "mode": "verify",
        "n_max": n_max,
        "skip_dp": args.skip_dp,
        "bounds_n": bounds_n,
        "format": args.format,
    }

    if args.format == "json":
        _emit(args, _json_envelope(args, config, {"report": report.to_dict()}))
    else:
        lines = []
        for check in report.checks:
            status = "PASS" if check.passed else "FAIL"
            lines.append(f"{status}  {check.name}: {check.detail}")
        lines.append("verdict: " + ("all checks passed" if report.passed else "FAILURES present"))
        _emit(args, "\n".join(lines) + "\n")
    return 0 if report.passed else 2


def cmd_scaling(args) -> int:
    k_grid = parse_grid(_require(args, "k"), "--k")
    n_grid = parse_grid(_require(args, "n"), "--n")
    epsilon = None if args.epsilon is None else _to_float(args.epsilon, "--epsilon")
    config = {
        "mode": "scaling",
        "k": args.k,
        "n": args.n,
        "epsilon": "grid-best" if epsilon is None else epsilon,
        "format": args.format,
    }

    rows = []
    skipped = []
    for k in k_grid:
        for n in n_grid:
            if k >= n:
                skipped.append((n, k, "k >= n"))
                continue
            p = success_probability_exact(n, k)
            scaled = n ** (1.0 / (k + 1)) * float(p)
            rep = bound_report(n, k, epsilon) if k < n - 2 else None
            rows.append(
                {
                    "n": n,
                    "k": k,
                    "p_exact": str(p),
                    "p_decimal": fraction_decimal(p),
                    "scaled": scaled,
                    "upper_bound": rep.upper if rep else 0.5,
                    "lower_bound": rep.lower if rep else "",
                    "best_epsilon": rep.epsilon if rep else "",
                }
            )

    if args.format == "json":
        payload = {"rows": rows, "skipped": [{"n": n, "k": k, "reason": r} for n, k, r in skipped]}
        _emit(args, _json_envelope(args, config, payload))
        return 0

    lines = _provenance_comments(args, config) if args.format == "csv" else []
    if args.format == "csv":
        lines.append(SCALING_CSV_HEADER)
        for n, k, reason in skipped:
            lines.append(f"# skipped n={n} k={k} ({reason})")
        for row in rows:
            lines.append(
                ",".join(
                    str(row[key])
                    for key in (
                        "n", "k", "p_exact", "p_decimal", "scaled",
                        "upper_bound", "lower_bound", "best_epsilon",
                    )
                )
            )
    else:
        for n, k, reason in skipped:
            lines.append(f"skipped n={n} k={k} ({reason})")
        for row in rows:
            lines.append(
                f"n={row['n']} k={row['k']} p={row['p_exact']} ({row['p_decimal']}) "
                f"scaled={row['scaled']:.6f} upper={row['upper_bound']} lower={row['lower_bound']}"
            )
    _emit(args, "\n".join(lines) + "\n")
    return 0


def _read_permutations(args, n: int) -> list[tuple[int, ...]]:
    specs = []
    if args.perm is not None:
        specs.append(args.perm)
    if args.perm_file is not None:
        with open(args.perm_file, encoding="utf-8") as fh:
            specs.extend(line for line in (ln.strip() for ln in fh) if line and not line.startswith("#"))
    if not specs:
        raise UsageError("trace needs --perm or --perm-file")
    perms = []
    for spec in specs:
        try:
            perm = tuple(int(tok) for tok in spec.split())
        except ValueError:
            raise UsageError(f"malformed permutation {spec!r}")
        if sorted(perm) != list(range(1, n + 1)):
            raise UsageError(f"permutation {spec!r} is not a permutation of 1..{n}")
        perms.append(perm)
    return perms


def _trace_one(g: PathPower, perm: tuple[int, ...]) -> dict:
    obs = Observer(g)
    steps = []
    stop_index = None
    for pos in perm:
        event = obs.observe(pos)
        comps = [
            {"offsets": list(view.offsets), "inner_missing": view.inner_missing}
            for view in obs.components()
        ]
        fires = stop_index is None and event.condition_met and event.is_max
        if fires:
            stop_index = event.t
        steps.append(
            {
                "t": event.t,
                "vertex": pos,
                "components": comps,
                "component_count": event.component_count,
                "pending_inner": event.pending_inner,
                "slack": event.slack,
                "is_max": event.is_max,
                "condition_met": event.condition_met,
                "stop": fires,
            }
        )
    if stop_index is None:
        stop_index = g.n
    chosen = perm[stop_index - 1]
    return {"permutation": list(perm), "steps": steps, "stop_index": stop_index,
            "chosen": chosen, "win": chosen == 1}


def cmd_trace(args) -> int:
    n = _to_int(_require(args, "n"), "--n")
    k = _to_int(_require(args, "k"), "--k")
    g = PathPower(n, k)
    traces = [_trace_one(g, perm) for perm in _read_permutations(args, n)]
    config = {"mode": "trace", "n": n, "k": k, "format": args.format}

    if args.format == "json":
        _emit(args, _json_envelope(args, config, {"traces": traces}))
        return 0

    lines = []
    for trace in traces:
        lines.append("order: " + " ".join(str(v) for v in trace["permutation"]))
        for step in trace["steps"]:
            comps = " ".join(
                "(" + ",".join(str(o) for o in comp["offsets"]) + ")"
                for comp in step["components"]
            )
            mark = "  <-- stop" if step["stop"] else ""
            lines.append(
                f"t={step['t']}: arrives v{step['vertex']}  "
                f"c={step['component_count']} b={step['pending_inner']} slack={step['slack']} "
                f"max={'yes' if step['is_max'] else 'no'} "
                f"cond={'yes' if step['condition_met'] else 'no'}  comps={comps}{mark}"
            )
        outcome = "WIN" if trace["win"] else "LOSS"
        lines.append(f"stopped at t={trace['stop_index']} on v{trace['chosen']}: {outcome}")
        lines.append("")
    _emit(args, "\n".join(lines))
    return 0


def cmd_bounds(args) -> int:
    n = _to_int(_require(args, "n"), "--n")
    k = _to_int(_require(args, "k"), "--k")
    epsilon = None if args.epsilon is None else _to_float(args.epsilon, "--epsilon")
    rep = bound_report(n, k, epsilon)
    config = {"mode": "bounds", "n": n, "k": k,
              "epsilon": "grid-best" if epsilon is None else epsilon, "format": args.format}

    if args.format == "json":
        payload = {
            "report": {
                "n": rep.n,
                "k": rep.k,
                "epsilon": rep.epsilon,
                "p": rep.p,
                "lower": rep.lower,
                "upper": rep.upper,
                "asymptotic_constant": rep.asymptotic_constant,
            }
        }
        _emit(args, _json_envelope(args, config, payload))
        return 0

    _emit(
        args,
        (
            f"bounds for n={rep.n}, k={rep.k}:\n"
            f"  lower (rejection rule, epsilon={rep.epsilon}, p={rep.p:.6f}): {rep.lower:.6f}\n"
            f"  upper (Beta integral): {rep.upper:.6f}\n"
            f"  scaled-limit constant: {rep.asymptotic_constant:.6f}\n"
        ),
    )
    return 0


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------

def _add_shared(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--n", help="vertex count, or a grid A..B or A..B:STEP where allowed")
    sub.add_argument("--k", help="power, or a grid where allowed")
    sub.add_argument("--seed", help=f"64-bit master seed (fallback: ${SEED_ENV_VAR}, then 0)")
    sub.add_argument("--trials", default="10000", help="Monte Carlo trial count")
    sub.add_argument("--strategy", help="one of " + ", ".join(KINDS))
    sub.add_argument("--p", help="coin bias for tau_p_star")
    sub.add_argument("--epsilon", help="epsilon for the analytic lower bound")
    sub.add_argument("--r", help="rejection count for classical_threshold, or 'auto'")
    sub.add_argument("--out", help="write output to this path instead of stdout")
    sub.add_argument("--format", choices=("csv", "json", "text"), default="text")
    sub.add_argument("--threads", default="1", help="worker processes for simulation")
    sub.add_argument("--config", help="flat key=value file with defaults for these flags")


def _build_parser() -> _Parser:
    parser = _Parser(prog="stopflow", description=__doc__)
    parser.add_argument("--version", action="version", version=f"stopflow {__version__}")
    subs = parser.add_subparsers(dest="mode", required=True)

    sub = subs.add_parser("exact", help="exact success probability and its per-m breakdown")
    _add_shared(sub)
    sub.set_defaults(func=cmd_exact)

    sub = subs.add_parser("simulate", help="Monte Carlo estimate for one strategy")
    _add_shared(sub)
    sub.set_defaults(func=cmd_simulate)

    sub = subs.add_parser("verify", help="run the oracle verification suite")
    _add_shared(sub)
    sub.add_argument("--n-max", default="8", help="enumerate arrival orders up to this n")
    sub.add_argument("--skip-dp", action="store_true", help="skip backward-induction checks")
    sub.add_argument("--bounds-n", default="200", help="largest n for the bounds sandwich")
    sub.set_defaults(func=cmd_verify)

    sub = subs.add_parser("scaling", help="exact values and bounds over an n-grid")
    _add_shared(sub)
    sub.set_defaults(func=cmd_scaling)

    sub = subs.add_parser("trace", help="step-by-step observation trace of arrival orders")
    _add_shared(sub)
    sub.add_argument("--perm", help="whitespace-separated 1-based vertex indices")
    sub.add_argument("--perm-file", help="file with one permutation per line")
    sub.set_defaults(func=cmd_trace)

    sub = subs.add_parser("bounds", help="analytic lower/upper bounds for one (n, k)")
    _add_shared(sub)
    sub.set_defaults(func=cmd_bounds)

    return parser


def _load_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, value = line.split("=", 1)
                values[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}")
    return values


_CONFIG_FLAG_KEYS = {
    "n", "k", "seed", "trials", "strategy", "p", "epsilon", "r",
    "out", "format", "threads", "n_max", "bounds_n", "perm", "perm_file",
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        args._argv = argv
        if args.config:
            file_values = _load_config_file(args.config)
            unknown = set(file_values) - _CONFIG_FLAG_KEYS
            if unknown:
                raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
            given = {tok.split("=", 1)[0].lstrip("-").replace("-", "_")
                     for tok in argv if tok.startswith("--")}
            for key, value in file_values.items():
                if key not in given and hasattr(args, key):
                    setattr(args, key, value)
            if args.format not in ("csv", "json", "text"):
                raise UsageError(f"bad format {args.format!r}")
        return args.func(args)
    except UsageError as exc:
        print(f"stopflow: usage error: {exc}", file=sys.stderr)
        return 1
    except ResourceGuardError as exc:
        print(f"stopflow: resource guard: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"stopflow: error: {exc}", file=sys.stderr)
        return 1


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
