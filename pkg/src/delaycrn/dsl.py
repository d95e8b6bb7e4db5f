"""Parser for the line-oriented reaction-network text format.

Format by example::

    # species are declared before use
    species X1 X2
    reaction 2 X1 -> X1 + X2 ; rate 1 ; delay uniform(0,1)
    reaction X1 + X2 -> 2 X1 ; rate 1 ; delay none

A ``<->`` arrow expands into two reactions; ``rate2`` / ``delay2`` give the
reverse direction its own rate and kernel (defaulting to the forward ones).
``0`` denotes the zero complex. Kernels: ``none``, ``const(tau)``,
``uniform(a,b)``, ``table(path)`` with paths resolved against ``base_dir``.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass

from .errors import NetworkSyntaxError, NetworkValidationError
from .kernels import NO_DELAY, DelayKernel, PointMassKernel, TableKernel, UniformKernel
from .network import Complex, Reaction, ReactionNetwork, SpeciesId

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<arrow><->|->)
      | (?P<num>(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)
      | (?P<ident>[A-Za-z_]\w*)
      | (?P<sym>[;,+()])
    """,
    re.X,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # 'arrow' | 'num' | 'ident' | 'sym'
    text: str
    col: int  # 1-based


_TABLE_RE = re.compile(r"\btable\s*\(")


def _extract_table_paths(line: str, lineno: int) -> tuple[str, dict[int, str]]:
    """Blank out table(...) payloads so arbitrary path characters never reach
    the tokenizer; returns the cleaned line and paths keyed by the 1-based
    column of the opening parenthesis."""
    paths: dict[int, str] = {}
    out = line
    for m in _TABLE_RE.finditer(line):
        open_idx = m.end() - 1
        close_idx = line.find(")", m.end())
        if close_idx < 0:
            raise NetworkSyntaxError("unterminated table(...) path", lineno, open_idx + 1)
        paths[open_idx + 1] = line[m.end():close_idx].strip()
        out = out[: m.end()] + " " * (close_idx - m.end()) + out[close_idx:]
    return out, paths


def _tokenize(line: str, lineno: int) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(line):
        m = _TOKEN_RE.match(line, pos)
        if m is None:
            raise NetworkSyntaxError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    return tokens


class _LineParser:
    def __init__(self, raw: str, tokens: list[_Token], lineno: int,
                 table_paths: dict[int, str] | None = None):
        self.raw = raw
        self.tokens = tokens
        self.lineno = lineno
        self.table_paths = table_paths or {}
        self.i = 0

    def error(self, message: str, token: _Token | None = None):
        col = token.col if token is not None else (
            self.tokens[self.i].col if self.i < len(self.tokens) else len(self.raw) + 1
        )
        raise NetworkSyntaxError(message, self.lineno, col)

    def peek(self) -> _Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self, kind: str | None = None, text: str | None = None) -> _Token:
        tok = self.peek()
        if tok is None:
            want = text or kind or "token"
            self.error(f"unexpected end of line, expected {want}")
        if kind is not None and tok.kind != kind:
            self.error(f"expected {text or kind}, got {tok.text!r}", tok)
        if text is not None and tok.text != text:
            self.error(f"expected {text!r}, got {tok.text!r}", tok)
        self.i += 1
        return tok

    def at_end(self) -> bool:
        return self.i >= len(self.tokens)


def _parse_number(parser: _LineParser, what: str) -> float:
    tok = parser.take("num")
    try:
        return float(tok.text)
    except ValueError:  # pragma: no cover - regex should prevent this
        parser.error(f"bad {what} {tok.text!r}", tok)


def _parse_complex(parser: _LineParser, species_index: dict[str, int], n: int) -> Complex:
    coeffs = [0] * n
    first = parser.peek()
    if first is not None and first.kind == "num" and first.text == "0":
        nxt = parser.tokens[parser.i + 1] if parser.i + 1 < len(parser.tokens) else None
        if nxt is None or nxt.kind != "ident":
            parser.take("num")
            return Complex(tuple(coeffs))
    while True:
        coeff = 1
        tok = parser.peek()
        if tok is None:
            parser.error("expected a complex term")
        if tok.kind == "num":
            if not re.fullmatch(r"\d+", tok.text) or int(tok.text) < 1:
                parser.error(f"stoichiometric coefficient must be a positive integer, got {tok.text!r}", tok)
            coeff = int(tok.text)
            parser.take("num")
        tok = parser.peek()
        if tok is None or tok.kind != "ident":
            parser.error("expected a species name")
        if tok.text not in species_index:
            parser.error(f"unknown species {tok.text!r}", tok)
        coeffs[species_index[tok.text]] += coeff
        parser.take("ident")
        tok = parser.peek()
        if tok is not None and tok.kind == "sym" and tok.text == "+":
            parser.take("sym", "+")
            continue
        return Complex(tuple(coeffs))


def _parse_kernel(parser: _LineParser, base_dir: str) -> DelayKernel:
    tok = parser.take("ident")
    name = tok.text
    try:
        if name == "none":
            return NO_DELAY
        if name == "const":
            parser.take("sym", "(")
            tau = _parse_number(parser, "delay")
            parser.take("sym", ")")
            return PointMassKernel(tau)
        if name == "uniform":
            parser.take("sym", "(")
            a = _parse_number(parser, "kernel bound")
            parser.take("sym", ",")
            b = _parse_number(parser, "kernel bound")
            parser.take("sym", ")")
            return UniformKernel(a, b)
        if name == "table":
            open_tok = parser.take("sym", "(")
            path = parser.table_paths.get(open_tok.col, "")
            parser.take("sym", ")")
            if not path:
                parser.error("empty table(...) path", open_tok)
            resolved = path if os.path.isabs(path) else os.path.join(base_dir, path)
            try:
                kernel = TableKernel.from_csv(resolved)
            except OSError as exc:
                parser.error(f"cannot read kernel table {path!r}: {exc}", tok)
            return kernel
    except NetworkValidationError as exc:
        parser.error(str(exc), tok)
    parser.error(f"unknown kernel {name!r} (expected none/const/uniform/table)", tok)


def parse_network(text: str, base_dir: str = ".") -> ReactionNetwork:
    """Parse network source text; raise :class:`NetworkSyntaxError` on any problem.

    Species order follows declaration order; a reversible arrow expands into
    the forward reaction followed by the reverse one.
    """
    species: list[SpeciesId] = []
    species_index: dict[str, int] = {}
    # complexes are parsed with the final species count, so collect raw parts first
    reaction_lines: list[tuple[int, list[_Token], str, dict[int, str]]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        line, table_paths = _extract_table_paths(line, lineno)
        tokens = _tokenize(line, lineno)
        if not tokens:
            continue
        head = tokens[0]
        if head.kind != "ident" or head.text not in ("species", "reaction"):
            raise NetworkSyntaxError(
                f"expected 'species' or 'reaction', got {head.text!r}", lineno, head.col
            )
        if head.text == "species":
            parser = _LineParser(line, tokens, lineno)
            parser.take("ident", "species")
            if parser.at_end():
                parser.error("expected at least one species name")
            while not parser.at_end():
                tok = parser.take("ident")
                if tok.text in species_index:
                    parser.error(f"duplicate species declaration {tok.text!r}", tok)
                species_index[tok.text] = len(species)
                species.append(SpeciesId(len(species), tok.text))
        else:
            reaction_lines.append((lineno, tokens, line, table_paths))

    if not species:
        raise NetworkSyntaxError("network declares no species", 1, 1)

    n = len(species)
    reactions: list[Reaction] = []
    for lineno, tokens, line, table_paths in reaction_lines:
        parser = _LineParser(line, tokens, lineno, table_paths)
        parser.take("ident", "reaction")
        source = _parse_complex(parser, species_index, n)
        arrow = parser.take("arrow")
        product = _parse_complex(parser, species_index, n)
        parser.take("sym", ";")
        rate_kw = parser.take("ident", "rate")
        rate = _parse_number(parser, "rate")
        if rate <= 0:
            parser.error(f"rate must be positive, got {rate!r}", rate_kw)
        rate2 = None
        if parser.peek() is not None and parser.peek().text == ",":
            parser.take("sym", ",")
            kw = parser.take("ident", "rate2")
            if arrow.text != "<->":
                parser.error("rate2 is only meaningful for a reversible '<->' reaction", kw)
            rate2 = _parse_number(parser, "rate2")
            if rate2 <= 0:
                parser.error(f"rate2 must be positive, got {rate2!r}", kw)
        parser.take("sym", ";")
        parser.take("ident", "delay")
        kernel = _parse_kernel(parser, base_dir)
        kernel2 = None
        if parser.peek() is not None and parser.peek().text == ",":
            parser.take("sym", ",")
            kw = parser.take("ident", "delay2")
            if arrow.text != "<->":
                parser.error("delay2 is only meaningful for a reversible '<->' reaction", kw)
            kernel2 = _parse_kernel(parser, base_dir)
        if not parser.at_end():
            parser.error(f"unexpected trailing input {parser.peek().text!r}")

        try:
            reactions.append(Reaction(source, product, rate, kernel))
            if arrow.text == "<->":
                reactions.append(
                    Reaction(product, source, rate2 if rate2 is not None else rate,
                             kernel2 if kernel2 is not None else kernel)
                )
        except NetworkValidationError as exc:
            raise NetworkSyntaxError(str(exc), lineno, 1)

    try:
        return ReactionNetwork(tuple(species), tuple(reactions))
    except NetworkValidationError as exc:
        raise NetworkSyntaxError(str(exc), 1, 1)


def parse_network_file(path: str) -> ReactionNetwork:
    """Parse a network file; table(...) paths resolve relative to the file."""
    with open(path) as fh:
        text = fh.read()
    return parse_network(text, base_dir=os.path.dirname(os.path.abspath(path)))
