"""Report rendering and deterministic file output."""

import json

import numpy as np

from delaycrn import find_complex_balanced_equilibrium, parse_network
from delaycrn.reporting import (
    equilibrium_block,
    fmt_float,
    fmt_vec,
    kv_block,
    structure_block,
    write_json,
    write_text,
    write_trajectory_csv,
)
from delaycrn.structure import analyze_structure

from conftest import REF_TEXT


def test_fmt_float_round_trips_exactly():
    for x in (0.1, 1.0 / 3.0, 2.25, 1e-17, 123456.789):
        assert float(fmt_float(x)) == x
    assert fmt_float(0.5) == "0.5"


def test_fmt_vec():
    assert fmt_vec(np.array([0.5, 1.5])) == "(0.5, 1.5)"


def test_kv_block_layout():
    assert kv_block("title", [("a", 1), ("b", "x")]) == "== title ==\na: 1\nb: x\n"


def test_structure_block_content():
    net = parse_network(REF_TEXT)
    text = structure_block(net, analyze_structure(net))
    assert "species: X1 X2" in text
    assert "weakly reversible: true" in text
    assert "deficiency: 0" in text
    assert "2 X1" in text and "X1 + X2" in text


def test_equilibrium_block_content():
    net = parse_network(REF_TEXT)
    res = find_complex_balanced_equilibrium(net)
    text = equilibrium_block(res, net)
    assert "complex balanced: true" in text
    assert "representative: (" in text
    assert "class key: [" in text


def test_write_text_and_json(tmp_path):
    p = tmp_path / "a.txt"
    write_text(p, "hello\n")
    assert p.read_text() == "hello\n"

    q = tmp_path / "a.json"
    write_json(q, {"b": 1.5, "a": [1, 2]})
    raw = q.read_text()
    assert raw.endswith("\n")
    assert raw.index('"a"') < raw.index('"b"')  # keys sorted
    assert json.loads(raw) == {"b": 1.5, "a": [1, 2]}


def test_trajectory_csv_shape_and_determinism(tmp_path):
    times = np.array([0.0, 0.5, 1.0])
    states = np.array([[1.0, 2.0], [0.9, 2.1], [0.8, 2.2]])
    lyap = np.array([3.0, 2.0, 1.0])
    keys = np.array([[5.0], [5.0], [5.0]])

    p1 = tmp_path / "t1.csv"
    p2 = tmp_path / "t2.csv"
    for p in (p1, p2):
        write_trajectory_csv(p, times, states, ["X1", "X2"], lyapunov=lyap, keys=keys)
    body = p1.read_bytes()
    assert body == p2.read_bytes()  # byte-identical on identical input

    lines = body.decode().splitlines()
    assert lines[0] == "t,X1,X2,V,C_1"
    assert lines[1] == "0.0,1.0,2.0,3.0,5.0"
    assert len(lines) == 4


def test_trajectory_csv_without_optional_columns(tmp_path):
    p = tmp_path / "t.csv"
    write_trajectory_csv(
        p, np.array([0.0]), np.array([[1.0, 2.0]]), ["X1", "X2"]
    )
    assert p.read_text().splitlines()[0] == "t,X1,X2"
