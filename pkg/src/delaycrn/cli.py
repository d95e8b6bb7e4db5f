"""Command-line front end: analyze, simulate, equilibrium, chain-expand, verify.

Exit codes are a total function of outcome: 0 success, 2 parse or option
errors, 3 analysis failures (not weakly reversible, not complex balanced,
no Newton convergence), 4 integration failures (message carries the
failure time), 5 a verification suite assertion failed.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .analysis import (
    chain_convergence_study,
    classify_omega_limit,
    verify_class_count,
    verify_wr_existence,
)
from .dsl import parse_network_file
from .engine import SimConfig, chain_initial_state, expand_chain, simulate
from .equilibrium import find_complex_balanced_equilibrium, in_class_equilibrium
from .errors import (
    ConvergenceError,
    IntegrationError,
    NetworkSyntaxError,
    NetworkValidationError,
    NotComplexBalancedError,
    NotWeaklyReversibleError,
)
from .functionals import class_key, trajectory_functionals
from .histories import parse_history_spec
from .reporting import (
    chain_block,
    class_count_block,
    equilibrium_block,
    existence_block,
    fmt_float,
    fmt_vec,
    kv_block,
    structure_block,
    verdict_block,
    write_json,
    write_text,
    write_trajectory_csv,
)
from .structure import analyze_structure

__all__ = ["main", "build_parser"]

SUITES = ("classes", "existence", "chain", "lyapunov")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="delaycrn",
        description="mass-action reaction networks with delays: "
        "structure, simulation, equilibria, verification",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def net_out(sp):
        sp.add_argument("--net", required=True, help="network description file")
        sp.add_argument("--out", help="directory for report/CSV output")

    sp = sub.add_parser("analyze", help="structural analysis and balance check")
    net_out(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("simulate", help="integrate from an initial history")
    net_out(sp)
    sp.add_argument(
        "--history",
        action="append",
        required=True,
        help="per-species entries 'const c | affine(a,b) | sqrtaffine(a,b) "
        "| zero | table(path)' separated by ';'",
    )
    sp.add_argument("--h", type=float, default=0.01, help="step size")
    sp.add_argument("--t-end", type=float, default=100.0, help="horizon")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("equilibrium", help="complex-balanced and in-class equilibria")
    net_out(sp)
    sp.add_argument("--history", action="append", help="pick the class of this history")
    sp.add_argument("--tol", type=float, help="balance residual tolerance")
    sp.set_defaults(func=cmd_equilibrium)

    sp = sub.add_parser("chain-expand", help="replace constant delays by stage chains")
    net_out(sp)
    sp.add_argument("--n", type=int, required=True, help="stages per delayed reaction")
    sp.add_argument("--history", action="append", help="also map this history to a chain state")
    sp.set_defaults(func=cmd_chain_expand)

    sp = sub.add_parser("verify", help="run a verification suite")
    sp.add_argument("suite", choices=SUITES)
    net_out(sp)
    sp.add_argument("--history", action="append", help="history sample (repeatable)")
    sp.add_argument("--h", type=float, help="step size (suite-specific default)")
    sp.add_argument("--t-end", type=float, help="horizon (suite-specific default)")
    sp.add_argument("--n-schedule", default="8,32,128", help="comma-separated stage counts")
    sp.add_argument("--tol", type=float, help="assertion tolerance")
    sp.set_defaults(func=cmd_verify)

    return p


def _ensure_out(path):
    if path:
        os.makedirs(path, exist_ok=True)
    return path


def _histories(args, net, minimum=1):
    specs = args.history or []
    if len(specs) < minimum:
        raise ValueError(f"'{args.command}' needs at least {minimum} --history")
    base = os.path.dirname(os.path.abspath(args.net))
    return [parse_history_spec(s, net.n, net.max_delay, base) for s in specs]


def _schedule(args):
    try:
        values = tuple(int(tok) for tok in args.n_schedule.split(",") if tok.strip())
    except ValueError:
        raise ValueError(f"bad --n-schedule {args.n_schedule!r}; want e.g. 8,32,128")
    if not values or any(v < 1 for v in values):
        raise ValueError(f"--n-schedule entries must be >= 1, got {args.n_schedule!r}")
    return values


def cmd_analyze(args, net) -> int:
    info = analyze_structure(net)
    text = structure_block(net, info)
    try:
        result = find_complex_balanced_equilibrium(net, info)
        text += equilibrium_block(result, net)
    except (NotWeaklyReversibleError, NotComplexBalancedError) as exc:
        text += kv_block(
            "equilibrium",
            [("complex balanced", "false"), ("reason", str(exc))],
        )
    print(text, end="")
    out = _ensure_out(args.out)
    if out:
        write_text(os.path.join(out, "analyze.txt"), text)
    return 0


def cmd_simulate(args, net) -> int:
    theta = _histories(args, net)[0]
    cfg = SimConfig(h=args.h, t_end=args.t_end)
    traj = simulate(net, theta, cfg)
    info = analyze_structure(net)

    x_bar = None
    try:
        rep = find_complex_balanced_equilibrium(net, info)
        x_bar = in_class_equilibrium(net, rep.point, class_key(net, info, theta), info)
    except (NotWeaklyReversibleError, NotComplexBalancedError, ConvergenceError):
        pass  # no predicted equilibrium: still simulate, skip V and the verdict
    trace = trajectory_functionals(net, info, traj, x_bar=x_bar)
    verdict = None
    if x_bar is not None:
        try:
            verdict = classify_omega_limit(traj, x_bar)
        except ValueError:
            pass  # predicted equilibrium too close to the boundary thresholds

    text = kv_block(
        "simulate",
        [
            ("network", net.content_hash()),
            ("history", args.history[0]),
            ("h", fmt_float(cfg.h)),
            ("t_end", fmt_float(cfg.t_end)),
            ("final state", fmt_vec(traj.states[-1])),
            ("clamped negatives", traj.clamp_count),
        ],
    )
    if verdict is not None:
        text += verdict_block(verdict, net.species_names)
    print(text, end="")

    out = _ensure_out(args.out)
    if out:
        write_trajectory_csv(
            os.path.join(out, "trajectory.csv"),
            trace.times,
            traj.states,
            net.species_names,
            lyapunov=trace.lyapunov,
            keys=trace.keys,
        )
        write_text(os.path.join(out, "report.txt"), text)
        write_json(
            os.path.join(out, "run.json"),
            {
                "command": "simulate",
                "network_hash": net.content_hash(),
                "species": net.species_names,
                "config": {"h": cfg.h, "t_end": cfg.t_end, "eps_neg": cfg.eps_neg},
                "history": args.history[0],
                "clamp_count": traj.clamp_count,
                "verdict": None if verdict is None else verdict.kind,
                "files": ["trajectory.csv", "report.txt"],
            },
        )
    return 0


def cmd_equilibrium(args, net) -> int:
    info = analyze_structure(net)
    tol = 1e-10 if args.tol is None else args.tol
    result = find_complex_balanced_equilibrium(net, info, tol=tol)
    text = equilibrium_block(result, net)
    if args.history:
        theta = _histories(args, net)[0]
        key = class_key(net, info, theta)
        diag: dict = {}
        point = in_class_equilibrium(net, result.point, key, info, tol=tol, diagnostics=diag)
        text += kv_block(
            "in-class equilibrium",
            [
                ("history", args.history[0]),
                ("class key", key.pretty()),
                ("point", fmt_vec(point)),
                ("newton iterations", diag["iterations"]),
                ("residual", fmt_float(diag["residual"])),
            ],
        )
    print(text, end="")
    out = _ensure_out(args.out)
    if out:
        write_text(os.path.join(out, "equilibrium.txt"), text)
    return 0


def cmd_chain_expand(args, net) -> int:
    expanded = expand_chain(net, args.n)
    text = expanded.pretty()
    if not text.endswith("\n"):
        text += "\n"
    blocks = ""
    if args.history:
        theta = _histories(args, net)[0]
        z0 = chain_initial_state(net, theta, args.n)
        blocks = kv_block(
            "chain initial state",
            [(name, fmt_float(v)) for name, v in zip(expanded.species_names, z0)],
        )
    print(text + blocks, end="")
    out = _ensure_out(args.out)
    if out:
        write_text(os.path.join(out, "chain.crn"), text)
        if blocks:
            write_text(os.path.join(out, "chain_state.txt"), blocks)
    return 0


def cmd_verify(args, net) -> int:
    info = analyze_structure(net)
    out = _ensure_out(args.out)
    checks: list[tuple[str, bool, str]] = []
    csv_rows = None

    if args.suite == "classes":
        report = verify_class_count(net, _histories(args, net), info)
        text = class_count_block(report)
        checks = [
            (
                "distinct keys equal distinct projections",
                report.distinct_keys == report.distinct_projections,
                f"{report.distinct_keys} vs {report.distinct_projections}",
            ),
            ("key groups match projection groups", report.consistent, ""),
        ]
    elif args.suite == "existence":
        theta = _histories(args, net)[0]
        cfg = SimConfig(
            h=0.01 if args.h is None else args.h,
            t_end=200.0 if args.t_end is None else args.t_end,
        )
        report = verify_wr_existence(net, theta, _schedule(args), cfg, info)
        text = existence_block(report)
        rhs_tol = 1e-8 if args.tol is None else args.tol
        worst = max(row.rhs_norm for row in report.rows)
        checks = [
            (
                "candidates solve the delayed field",
                worst <= rhs_tol,
                f"max rhs {fmt_float(worst)} tol {fmt_float(rhs_tol)}",
            ),
            ("class key error non-increasing in N", report.key_errors_decreasing, ""),
            ("x_bar(N) converged", report.converged, ""),
        ]
        csv_rows = ("existence.csv", ["N", "rhs_norm", "key_error"], [
            [row.n_stages, fmt_float(row.rhs_norm), fmt_float(row.key_error)]
            for row in report.rows
        ])
    elif args.suite == "chain":
        theta = _histories(args, net)[0]
        cfg = SimConfig(
            h=0.01 if args.h is None else args.h,
            t_end=20.0 if args.t_end is None else args.t_end,
        )
        study = chain_convergence_study(net, theta, _schedule(args), cfg)
        text = chain_block(study)
        halved = len(study.rows) < 2 or study.rows[-1].error < 0.5 * study.rows[0].error
        checks = [
            (
                "errors monotone non-increasing",
                study.monotone_nonincreasing,
                " ".join(fmt_float(r.error) for r in study.rows),
            ),
            ("last error below half of first", halved, ""),
        ]
        csv_rows = ("chain_errors.csv", ["N", "error"], [
            [row.n_stages, fmt_float(row.error)] for row in study.rows
        ])
    else:  # lyapunov
        thetas = _histories(args, net)
        rep = find_complex_balanced_equilibrium(net, info)
        cfg = SimConfig(
            h=0.01 if args.h is None else args.h,
            t_end=100.0 if args.t_end is None else args.t_end,
        )
        slack = 1e-8 if args.tol is None else args.tol
        pairs = []
        for i, theta in enumerate(thetas):
            x_bar = in_class_equilibrium(net, rep.point, class_key(net, info, theta), info)
            traj = simulate(net, theta, cfg)
            trace = trajectory_functionals(net, info, traj, x_bar=x_bar)
            increments = np.diff(trace.lyapunov)
            worst_inc = float(increments.max()) if increments.size else 0.0
            pairs.append(
                (
                    f"history {i}",
                    f"V(0) {fmt_float(trace.lyapunov[0])} "
                    f"V(end) {fmt_float(trace.lyapunov[-1])} "
                    f"max increment {fmt_float(worst_inc)}",
                )
            )
            checks.append(
                (
                    f"V non-increasing for history {i}",
                    worst_inc <= slack,
                    f"max positive increment {fmt_float(worst_inc)} <= {fmt_float(slack)}",
                )
            )
        text = kv_block("lyapunov", pairs)

    lines = [
        f"{name}: {'pass' if ok else 'FAIL'}" + (f" ({detail})" if detail else "")
        for name, ok, detail in checks
    ]
    print(text + "\n".join(lines))
    if out:
        write_text(
            os.path.join(out, f"verify_{args.suite}.txt"), text + "\n".join(lines) + "\n"
        )
        if csv_rows is not None:
            name, header, rows = csv_rows
            body = ",".join(header) + "\n" + "\n".join(",".join(str(c) for c in r) for r in rows)
            write_text(os.path.join(out, name), body + "\n")
    for name, ok, detail in checks:
        if not ok:
            print(
                f"verify failed: {name}" + (f" ({detail})" if detail else ""),
                file=sys.stderr,
            )
            return 5
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        net = parse_network_file(args.net)
        return args.func(args, net)
    except NetworkSyntaxError as exc:
        print(f"error: parse failed: {exc}", file=sys.stderr)
        return 2
    except (NetworkValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NotWeaklyReversibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NotComplexBalancedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except IntegrationError as exc:
        print(f"error: integration failed: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
