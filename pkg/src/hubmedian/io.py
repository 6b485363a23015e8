"""Instance and solution file formats, plus the random instance generator.

Canonical format (UTF-8 text, whitespace separated, ``.usaphmp``):

    line 1:            n p
    line 2:            chi alpha delta
    lines 3 .. n+2:    row i of the distance matrix (n reals)
    lines n+3 .. 2n+2: row i of the flow matrix (n reals)

Coordinate format (``.coords``) replaces the distance block with n lines of
``x y``; distances are Euclidean.  The canonical format exists because some
benchmark families (internet delays) have asymmetric, non-Euclidean
distances that coordinates cannot express.

Comment lines start with ``#``; they and blank lines are ignored.  Parsing
is otherwise strict: wrong token counts, non-numeric tokens, negative or
non-finite entries, and trailing content are errors naming the line.

Solution files: line 1 ``n p``; line 2 the p hub indices; line 3 the n
allocation entries.  All indices in files are 1-based.
"""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Iterator

import numpy as np

from .model import Instance, Solution
from .rng import derive_stream

CANONICAL = "canonical"
COORDINATE = "coordinate"

_SUFFIXES = {".usaphmp": CANONICAL, ".coords": COORDINATE}

COORD_RANGE = 100000.0  # generated coordinates are uniform in [0, COORD_RANGE]^2
FLOW_RANGE = 100  # generated flows are uniform integers in [0, FLOW_RANGE]


class ParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


def _read_text(source) -> str:
    if isinstance(source, Path):
        raise TypeError("pass file contents or a stream; use load_instance for paths")
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def _logical_lines(text: str) -> Iterator[tuple[int, str]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, stripped


class _Lines:
    def __init__(self, text: str):
        self._it = _logical_lines(text)
        self.lineno = 0

    def next(self, what: str) -> str:
        for lineno, line in self._it:
            self.lineno = lineno
            return line
        raise ParseError(f"unexpected end of file, expected {what}")

    def expect_end(self):
        for lineno, line in self._it:
            raise ParseError(f"unexpected trailing content: {line[:40]!r}", lineno)


def _row(lines: _Lines, count: int, what: str, nonnegative: bool = True) -> np.ndarray:
    line = lines.next(what)
    tokens = line.split()
    if len(tokens) != count:
        raise ParseError(f"expected {count} values for {what}, got {len(tokens)}", lines.lineno)
    try:
        row = np.array(tokens, dtype=np.float64)
    except ValueError:
        raise ParseError(f"non-numeric token in {what}", lines.lineno) from None
    if not np.isfinite(row).all():
        raise ParseError(f"non-finite value in {what}", lines.lineno)
    if nonnegative and (row < 0).any():
        raise ParseError(f"negative value in {what}", lines.lineno)
    return row


def parse_instance(source, format: str = CANONICAL, name: str = "") -> Instance:
    """Parse a canonical or coordinate instance from text, bytes or a stream."""
    if format not in (CANONICAL, COORDINATE):
        raise ValueError(f"unknown format {format!r}")
    lines = _Lines(_read_text(source))

    header = lines.next("header 'n p'").split()
    if len(header) != 2:
        raise ParseError(f"expected 'n p', got {len(header)} tokens", lines.lineno)
    try:
        n, p = int(header[0]), int(header[1])
    except ValueError:
        raise ParseError("n and p must be integers", lines.lineno) from None
    if n < 1:
        raise ParseError(f"node count must be positive, got {n}", lines.lineno)
    if not 1 <= p <= n:
        raise ParseError(f"hub count p={p} outside [1, {n}]", lines.lineno)

    factors = _row(lines, 3, "cost factors 'chi alpha delta'")
    if (factors <= 0).any():
        raise ParseError("cost factors must be positive", lines.lineno)
    chi, alpha, delta = (float(v) for v in factors)

    if format == CANONICAL:
        dist = np.empty((n, n))
        for i in range(n):
            dist[i] = _row(lines, n, f"distance row {i + 1}")
            if dist[i, i] != 0.0:
                raise ParseError(f"distance diagonal entry {i + 1} must be zero", lines.lineno)
    else:
        coords = np.empty((n, 2))
        for i in range(n):
            coords[i] = _row(lines, 2, f"coordinate pair {i + 1}", nonnegative=False)
        dist = euclidean_distances(coords)

    flow = np.empty((n, n))
    for i in range(n):
        flow[i] = _row(lines, n, f"flow row {i + 1}")
    lines.expect_end()

    return Instance(n=n, p=p, dist=dist, flow=flow, chi=chi, alpha=alpha, delta=delta, name=name)


def euclidean_distances(coords: np.ndarray) -> np.ndarray:
    """Pairwise Euclidean distances; exactly symmetric with a zero diagonal."""
    dx = coords[:, 0][:, None] - coords[:, 0][None, :]
    dy = coords[:, 1][:, None] - coords[:, 1][None, :]
    return np.sqrt(dx * dx + dy * dy)


def serialize_instance(inst: Instance) -> bytes:
    """Canonical-format bytes; floats printed with round-trip precision."""
    out = [f"{inst.n} {inst.p}", f"{inst.chi!r} {inst.alpha!r} {inst.delta!r}"]
    for matrix in (inst.dist, inst.flow):
        for row in matrix.tolist():
            out.append(" ".join(map(repr, row)))
    out.append("")
    return "\n".join(out).encode("utf-8")


def format_for_path(path) -> str:
    suffix = Path(path).suffix.lower()
    try:
        return _SUFFIXES[suffix]
    except KeyError:
        raise ValueError(
            f"cannot infer format from suffix {suffix!r}; expected .usaphmp or .coords"
        ) from None


def load_instance(path, format: str | None = None) -> Instance:
    """Read an instance file; format defaults by suffix (.usaphmp / .coords)."""
    path = Path(path)
    fmt = format or format_for_path(path)
    return parse_instance(path.read_bytes(), format=fmt, name=path.stem)


def save_instance(path, inst: Instance) -> None:
    Path(path).write_bytes(serialize_instance(inst))


def urand_coordinates(n: int, p: int, seed: int) -> np.ndarray:
    """The (n, 2) coordinate array the generator draws for (n, p, seed):
    the stream's first 2n uniforms as x0 y0 x1 y1 ..., scaled to
    [0, COORD_RANGE]."""
    return derive_stream(seed, n, p).random_block(2 * n).reshape(n, 2) * COORD_RANGE


def generate_urand(n: int, p: int, seed: int,
                   factors: tuple[float, float, float]) -> Instance:
    """Random Euclidean instance, reproducible from (n, p, seed, factors).

    Draw order on the SplitMix64 stream derived from (seed, n, p): first 2n
    uniforms for the coordinates (see urand_coordinates); then n*n uniforms
    mapped to integer flows in [0, FLOW_RANGE] row-major, with the diagonal
    zeroed afterwards.
    """
    if n < 1:
        raise ValueError(f"node count must be positive, got {n}")
    if not 1 <= p <= n:
        raise ValueError(f"hub count p={p} outside [1, {n}]")
    stream = derive_stream(seed, n, p)
    coords = stream.random_block(2 * n).reshape(n, 2) * COORD_RANGE
    flow = stream.randint_block(n * n, FLOW_RANGE + 1).astype(np.float64).reshape(n, n)
    np.fill_diagonal(flow, 0.0)
    chi, alpha, delta = factors
    return Instance(
        n=n, p=p, dist=euclidean_distances(coords), flow=flow,
        chi=chi, alpha=alpha, delta=delta,
        name=f"urand-n{n}-p{p}-s{seed}",
    )


def read_solution(source) -> tuple[int, int, Solution]:
    """Parse a solution file; returns (n, p, solution) with 0-based arrays."""
    lines = _Lines(_read_text(source))
    header = lines.next("header 'n p'").split()
    if len(header) != 2:
        raise ParseError(f"expected 'n p', got {len(header)} tokens", lines.lineno)
    try:
        n, p = int(header[0]), int(header[1])
    except ValueError:
        raise ParseError("n and p must be integers", lines.lineno) from None
    if n < 1 or not 1 <= p <= n:
        raise ParseError(f"bad sizes n={n}, p={p}", lines.lineno)

    hub_row = _int_row(lines, p, "hub indices")
    alloc_row = _int_row(lines, n, "allocation entries")
    lines.expect_end()
    for label, row in (("hub index", hub_row), ("allocation entry", alloc_row)):
        if (row < 1).any() or (row > n).any():
            raise ParseError(f"{label} outside [1, {n}]")
    hub = np.zeros(n, dtype=bool)
    hub[hub_row - 1] = True
    return n, p, Solution(hub=hub, alloc=alloc_row - 1)


def _int_row(lines: _Lines, count: int, what: str) -> np.ndarray:
    row = _row(lines, count, what)
    if (row != np.floor(row)).any():
        raise ParseError(f"non-integer token in {what}", lines.lineno)
    return row.astype(np.int64)


def write_solution(sol: Solution, p: int | None = None) -> bytes:
    """Solution file bytes (1-based indices)."""
    hubs = sol.hubs
    n = sol.hub.shape[0]
    lines = [
        f"{n} {p if p is not None else hubs.size}",
        " ".join(str(int(h) + 1) for h in hubs),
        " ".join(str(int(a) + 1) for a in sol.alloc),
        "",
    ]
    return "\n".join(lines).encode("utf-8")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
