"""Command-line front end.

Subcommands ``validate``, ``bounds``, ``recover``, ``attack`` and ``sweep``
each read a TOML run configuration (see :mod:`optrecover.config`).  Exit
status: 0 success, 1 invalid configuration or failed precondition,
2 invariant violation, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

from . import adversary, banach, records
from .applications import Heat, analyze, rate_experiment, solve_backward, synthesize
from .bounds import recovery_report, sandwich
from .config import RunConfig, load_config
from .exceptions import ConfigError, HorizonError, NotCertifiableError, UncertifiedTailError
from .spectral import NoisyObservation, validate
from .truncation import apply, select_n, worst_case_error

__all__ = [
    "EXIT_OK",
    "EXIT_INVALID",
    "EXIT_INVARIANT",
    "EXIT_IO",
    "CommandResult",
    "cmd_validate",
    "cmd_bounds",
    "cmd_recover",
    "cmd_attack",
    "cmd_sweep",
    "main",
]

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INVARIANT = 2
EXIT_IO = 3

# brute-force support reaches this far past the truncation level by default
ORACLE_SPREAD = 64


@dataclass
class CommandResult:
    """Exit code, human-readable lines and the files written."""

    code: int = EXIT_OK
    lines: list = field(default_factory=list)
    files: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    def say(self, msg: str):
        self.lines.append(msg)


def _out(cfg: RunConfig) -> Path:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    return cfg.out_dir


def cmd_validate(cfg: RunConfig) -> CommandResult:
    """Check the problem's sequences and certify the ``L_q`` constants.

    Certification failures count against a clean report only when the
    configuration requests ``L_q`` output (``run.q`` non-empty).
    """
    res = CommandResult()
    problem = cfg.problem
    issues = validate(problem)
    for v in issues:
        res.say(f"violation {v.code} at k={v.index}: {v.detail}")
    try:
        consts = banach.certify_constants(problem, cfg.horizon)
        res.say(
            f"constants c1={consts.c1:.6g} c2={consts.c2:.6g} up to N={consts.horizon} "
            f"(tail {consts.tail_method}, {'bounded' if consts.bounded else 'growing'})"
        )
    except NotCertifiableError as exc:
        res.say(f"lq constants not certifiable: {exc}")
        if cfg.q:
            issues.append(exc)
    res.code = EXIT_OK if not issues else EXIT_INVALID
    res.say("clean" if not issues else f"{len(issues)} problem(s) found")
    return res


def cmd_bounds(cfg: RunConfig) -> CommandResult:
    """One sandwich row per δ at the configured level rule; writes ``bounds.csv``."""
    res = CommandResult()
    problem = cfg.problem
    recs = []
    for delta in sorted(cfg.deltas, reverse=True):
        n = select_n(problem, delta, cfg.strategy)
        recs.append(sandwich(problem, delta, n, c=cfg.matched_noise_c).to_record())
    cols = list(recs[0])
    path = records.write_csv(_out(cfg) / "bounds.csv", cols, ([r[c] for c in cols] for r in recs))
    res.files.append(path)
    res.rows = recs
    for r in recs:
        if r["lower_R_N_delta"] > r["upper_truncation"] * (1 + cfg.tolerance):
            res.code = EXIT_INVARIANT
            res.say(f"lower bound exceeds truncation error at delta={r['delta']}")
    res.say(f"wrote {path} ({len(recs)} rows)")
    return res


def cmd_recover(cfg: RunConfig, input_path: Optional[Path] = None) -> CommandResult:
    """Recover ``A f`` from the data file and write the estimate plus a report.

    Signals (``.csv``) produce ``recovered.csv``; coefficient records produce
    ``recovered.json``.  The report goes to ``recovery_report.json``.
    """
    res = CommandResult()
    path = input_path or cfg.input
    if path is None:
        raise ConfigError("no input file: pass one on the command line or set 'run.input'")
    if len(cfg.deltas) != 1:
        raise ConfigError("recover needs exactly one noise level ('run.delta')")
    delta = cfg.deltas[0]
    data = records.read_input(path)
    out = _out(cfg)
    is_signal = isinstance(data, banach.GridFunction)
    coeffs = analyze(data) if is_signal else data

    problem = cfg.problem
    if isinstance(cfg.app, Heat):
        est, report = solve_backward(cfg.app.hp, NoisyObservation(coeffs, delta), cfg.strategy)
    else:
        n = select_n(problem, delta, cfg.strategy)
        est = apply(problem, NoisyObservation(coeffs, delta), n)
        report = recovery_report(problem, delta, n, cfg.strategy.name)

    if is_signal:
        target = records.write_signal(out / "recovered.csv", synthesize(est, data))
    else:
        target = records.write_coefficients(out / "recovered.json", est)
    side = records.write_json(out / "recovery_report.json", report.to_record())
    res.files += [target, side]
    res.rows = [report.to_record()]
    res.say(f"n={report.n} (N_delta={report.n_delta}) total={report.total:.6g} -> {target}")
    return res


def cmd_attack(
    cfg: RunConfig,
    formula: Callable = worst_case_error,
) -> CommandResult:
    """Attack the truncation method and compare with the closed-form error.

    For each δ: the extremal pair, the brute-force oracle over supports up to
    the horizon, and ``trials`` random feasible instances.  The verdict is
    PASS when oracle and extremal pair reproduce ``formula`` within the
    tolerance and no instance exceeds it.  ``formula`` is a hook for negative
    controls; it must return an object with a ``total`` attribute.
    """
    res = CommandResult()
    problem = cfg.problem
    tol = cfg.tolerance
    recs, witnesses = [], []
    ok = True
    for j, delta in enumerate(sorted(cfg.deltas, reverse=True)):
        n = select_n(problem, delta, cfg.strategy)
        total = formula(problem, delta, n).total
        horizon = cfg.horizon if cfg.horizon is not None else n + ORACLE_SPREAD
        horizon = min(max(horizon, n), problem.last_index)
        pair = adversary.extremal_pair(problem, delta, n)
        pair_err = adversary.empirical_error(problem, pair, n)
        oracle = adversary.brute_force_worst_case(problem, delta, n, horizon, seed=cfg.seed)
        rand = adversary.random_attack(problem, delta, n, cfg.trials, seed=(cfg.seed, j))
        rand_max = max(rand, default=0.0)
        checks = {
            "oracle_equal": abs(oracle.value - total) <= tol * total,
            "pair_equal": abs(pair_err - total) <= tol * total,
            "pair_feasible": pair.is_feasible(problem, delta),
            "oracle_confirmed": oracle.sampled_max <= total * (1 + tol),
            "random_dominated": rand_max <= total * (1 + tol),
        }
        passed = all(checks.values())
        ok &= passed
        failed = ";".join(k for k, v in checks.items() if not v)
        recs.append([delta, n, total, oracle.value, pair_err, oracle.sampled_max, rand_max,
                     abs(oracle.value - total) / total, "PASS" if passed else "FAIL", failed])
        witnesses.append({"delta": delta, "n": n, "pair": pair.to_record(),
                          "oracle_witness": oracle.witness.to_record()})
    out = _out(cfg)
    cols = ["delta", "n", "formula", "oracle", "extremal", "oracle_sampled_max", "random_max",
            "oracle_gap", "verdict", "failed"]
    res.files.append(records.write_csv(out / "attack.csv", cols, recs))
    res.files.append(records.write_json(out / "witnesses.json", witnesses))
    res.rows = [dict(zip(cols, r)) for r in recs]
    res.code = EXIT_OK if ok else EXIT_INVARIANT
    res.say(f"verdict {'PASS' if ok else 'FAIL'} over {len(recs)} noise level(s)")
    return res


def cmd_sweep(cfg: RunConfig) -> CommandResult:
    """Rate experiment; writes ``sweep.csv``, ``sweep_plot.csv`` and ``sweep_fit.json``.

    A single δ yields a table without a fitted slope and the ``no-fit`` flag.
    Rows violating ``lower <= total`` or ``empirical_max <= total`` turn the
    exit status into 2.
    """
    res = CommandResult()
    table = rate_experiment(
        cfg.app, cfg.deltas, trials=cfg.trials, seed=cfg.seed, q=cfg.q,
        strategy=cfg.strategy, n_samples=cfg.samples, fit=len(cfg.deltas) >= 2,
        horizon=cfg.horizon,
    )
    out = _out(cfg)
    res.files.append(records.write_csv(out / "sweep.csv", table.columns, table.records()))

    # plot data: one (series, x, y) line per point, log axes left to the plotter
    x_name = "delta" if table.axis == "log_delta" else "log_inv_delta"
    plot = []
    for r in table.rows:
        x = r.delta if x_name == "delta" else math.log(1.0 / r.delta)
        for series, y in (("total", r.total), ("lower", r.lower), ("empirical_max", r.empirical_max)):
            plot.append([series, x, y])
        for cell in r.lq:
            for kind, y in (("lq_lower", cell.lower), ("lq_upper", cell.upper), ("lq_empirical", cell.empirical)):
                plot.append([f"{kind}_{records.format_value(cell.q)}", x, y])
    plot.sort(key=lambda p: p[0])
    res.files.append(records.write_csv(out / "sweep_plot.csv", ["series", x_name, "y"], plot))
    fit = {
        "label": table.label,
        "axis": table.axis,
        "slope": table.slope,
        "intercept": table.intercept,
        "residual": table.residual,
        "flags": sorted(table.flags),
    }
    res.files.append(records.write_json(out / "sweep_fit.json", fit))
    res.rows = [dict(zip(table.columns, r)) for r in table.records()]

    tol = cfg.tolerance
    for r in table.rows:
        if r.lower > r.total * (1 + tol) or r.empirical_max > r.total * (1 + tol):
            res.code = EXIT_INVARIANT
            res.say(f"row delta={r.delta}: bound ordering violated")
    slope = "none (single delta)" if table.slope is None else f"{table.slope:.6g}"
    res.say(f"{table.label}: slope {slope} against {table.axis}")
    return res


# --------------------------------------------------------------------------


def _parse_q(text: str) -> list:
    return [v for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="optrecover", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("validate", "bounds", "recover", "attack", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path, metavar="PATH")
        p.add_argument("--seed", type=int, metavar="U64")
        p.add_argument("--out", type=Path, metavar="DIR")
        p.add_argument("--q", type=_parse_q, metavar="LIST", help="comma-separated, e.g. 2,4,inf")
        p.add_argument("--trials", type=int, metavar="N")
        p.add_argument("--horizon", type=int, metavar="N")
        p.add_argument("--match-const", type=float, metavar="REAL")
        if name == "recover":
            p.add_argument("input", nargs="?", type=Path, help="signal CSV or coefficient JSON")
    return parser


_COMMANDS = {
    "validate": cmd_validate,
    "bounds": cmd_bounds,
    "attack": cmd_attack,
    "sweep": cmd_sweep,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config).with_overrides(
            seed=args.seed, out_dir=args.out, q=args.q, trials=args.trials,
            horizon=args.horizon, match_const=args.match_const,
        )
        if args.command == "recover":
            res = cmd_recover(cfg, args.input)
        else:
            res = _COMMANDS[args.command](cfg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, HorizonError, UncertifiedTailError, NotCertifiableError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    for line in res.lines:
        print(line)
    return res.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
