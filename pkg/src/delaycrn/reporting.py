"""Deterministic text, CSV, and JSON rendering of analysis results.

Numbers are always written through repr() so identical inputs give
byte-identical files; nothing here reads the clock.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .analysis import (
    ChainStudy,
    ClassCountReport,
    OmegaLimitVerdict,
    WrExistenceReport,
)
from .equilibrium import EquilibriumResult
from .network import ReactionNetwork
from .structure import StoichInfo

__all__ = [
    "fmt_float",
    "fmt_vec",
    "kv_block",
    "structure_block",
    "equilibrium_block",
    "verdict_block",
    "class_count_block",
    "existence_block",
    "chain_block",
    "write_text",
    "write_json",
    "write_trajectory_csv",
]


def fmt_float(x) -> str:
    return repr(float(x))


def fmt_vec(v) -> str:
    return "(" + ", ".join(fmt_float(x) for x in np.atleast_1d(np.asarray(v))) + ")"


def kv_block(title: str, pairs) -> str:
    lines = [f"== {title} =="]
    lines.extend(f"{k}: {v}" for k, v in pairs)
    return "\n".join(lines) + "\n"


def structure_block(net: ReactionNetwork, info: StoichInfo) -> str:
    basis = ", ".join(fmt_vec(v) for v in info.ortho_basis) or "(none)"
    classes = "; ".join(
        "{" + ", ".join(info.complexes[i].pretty(net.species_names) for i in cls) + "}"
        for cls in info.linkage_classes
    )
    return kv_block(
        "structure",
        [
            ("species", " ".join(net.species_names)),
            ("reactions", net.r),
            ("complexes", len(info.complexes)),
            ("linkage classes", classes),
            ("stoichiometric rank", info.rank),
            ("S-perp basis", basis),
            ("weakly reversible", str(info.weakly_reversible).lower()),
            ("deficiency", info.deficiency),
        ],
    )


def equilibrium_block(result: EquilibriumResult, net: ReactionNetwork) -> str:
    return kv_block(
        "equilibrium",
        [
            ("complex balanced", str(result.complex_balanced).lower()),
            ("representative", fmt_vec(result.point)),
            ("balance residual", fmt_float(result.residual)),
            ("class key", result.class_key.pretty()),
        ],
    )


def verdict_block(verdict: OmegaLimitVerdict, names) -> str:
    w = verdict.witness
    pairs = [
        ("verdict", verdict.kind),
        ("checkpoint", fmt_float(verdict.at_time)),
        ("window min", fmt_vec(w.species_min)),
        ("window max", fmt_vec(w.species_max)),
        ("distance to equilibrium", fmt_float(w.distance)),
        ("lyapunov V", fmt_float(w.lyapunov)),
    ]
    return kv_block("omega-limit", pairs)


def class_count_block(report: ClassCountReport) -> str:
    pairs = [
        ("samples", len(report.keys)),
        ("distinct keys", report.distinct_keys),
        ("distinct projections", report.distinct_projections),
        ("keys consistent with projections", str(report.consistent).lower()),
        ("max in-group projection spread", fmt_float(report.max_group_spread)),
    ]
    for gi, group in enumerate(report.key_groups):
        pairs.append(
            (f"class {gi}", f"key {report.keys[group[0]].pretty()} members {list(group)}")
        )
    return kv_block("class-count", pairs)


def existence_block(report: WrExistenceReport) -> str:
    pairs = [
        ("target key", report.theta_key.pretty()),
        ("key errors decreasing", str(report.key_errors_decreasing).lower()),
        ("x_bar converged", str(report.converged).lower()),
        ("x_bar", fmt_vec(report.x_bar)),
    ]
    for row in report.rows:
        pairs.append(
            (
                f"N={row.n_stages}",
                f"x_bar {fmt_vec(row.x_bar)} rhs {fmt_float(row.rhs_norm)} "
                f"key error {fmt_float(row.key_error)}",
            )
        )
    return kv_block("wr-existence", pairs)


def chain_block(study: ChainStudy) -> str:
    pairs = [
        ("horizon", fmt_float(study.t_end)),
        ("monotone non-increasing", str(study.monotone_nonincreasing).lower()),
    ]
    pairs.extend((f"N={row.n_stages}", fmt_float(row.error)) for row in study.rows)
    return kv_block("chain-convergence", pairs)


def write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_trajectory_csv(path, times, states, names, lyapunov=None, keys=None) -> None:
    """Rows of t, species values, optional V, optional conserved C_i."""
    times = np.asarray(times)
    states = np.asarray(states)
    header = ["t"] + list(names)
    if lyapunov is not None:
        header.append("V")
    if keys is not None:
        keys = np.asarray(keys)
        header.extend(f"C_{i + 1}" for i in range(keys.shape[1]))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i, t in enumerate(times):
            row = [fmt_float(t)] + [fmt_float(v) for v in states[i]]
            if lyapunov is not None:
                row.append(fmt_float(lyapunov[i]))
            if keys is not None:
                row.extend(fmt_float(v) for v in keys[i])
            writer.writerow(row)
