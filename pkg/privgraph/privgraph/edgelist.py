"""
Edge-list text format.

    # comment
    n 5
    0 1 2.5
    1 3 1

The header `n <vertex-count>` comes first; each further line is `u v w` with
0-based vertices and a decimal weight. Saved weights use 17 significant digits
so a load reproduces them bit for bit.
"""
from __future__ import annotations

import csv
import logging
import math
from pathlib import Path
from typing import Dict, Iterable, Sequence, Tuple, Union

from .errors import DomainError, EdgeListError, SourceLine
from .graph import Graph, edge_id

logger = logging.getLogger(__name__)

SIGNED_MARKER = "# signed: weights may be negative"


def _fail(message: str, path: str, line_no: int) -> EdgeListError:
    return EdgeListError(message, loc=SourceLine(path, line_no))


def parse_graph(text: str, source: str = "<text>", allow_negative: bool = False) -> Graph:
    n = None
    weights: Dict[int, float] = {}
    signed = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line == SIGNED_MARKER:
                signed = True
            continue
        fields = line.split()
        if n is None:
            if len(fields) != 2 or fields[0] != "n":
                raise _fail(f"expected header 'n <vertex-count>', got {line!r}", source, line_no)
            try:
                n = int(fields[1])
            except ValueError:
                raise _fail(f"vertex count is not an integer: {fields[1]!r}", source, line_no) from None
            if n < 0:
                raise _fail(f"vertex count must be non-negative, got {n}", source, line_no)
            continue
        if len(fields) != 3:
            raise _fail(f"expected 'u v w', got {line!r}", source, line_no)
        try:
            u, v = int(fields[0]), int(fields[1])
            w = float(fields[2])
        except ValueError:
            raise _fail(f"malformed edge line {line!r}", source, line_no) from None
        if not math.isfinite(w):
            raise _fail(f"non-finite weight {fields[2]!r}", source, line_no)
        if w < 0 and not allow_negative:
            raise _fail(f"negative weight {w} on edge {{{u},{v}}}", source, line_no)
        try:
            e = edge_id(u, v, n)
        except DomainError as exc:
            raise _fail(exc.message, source, line_no) from None
        if e in weights:
            raise _fail(f"duplicate edge {{{u},{v}}}", source, line_no)
        weights[e] = w
    if n is None:
        raise EdgeListError(f"missing header 'n <vertex-count>' in {source}")
    return Graph(n=n, weights=weights, signed=signed or any(w < 0 for w in weights.values()))


def load_graph(path: Union[str, Path], allow_negative: bool = False) -> Graph:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise EdgeListError(f"cannot read edge list {path}: {exc}") from exc
    G = parse_graph(text, source=str(path), allow_negative=allow_negative)
    logger.debug("loaded %s: n=%d, %d stored edges", path, G.n, G.stored_count)
    return G


def format_graph(G: Graph) -> str:
    lines = []
    if G.signed:
        lines.append(SIGNED_MARKER)
    lines.append(f"n {G.n}")
    for u, v, w in G.edges():
        lines.append(f"{u} {v} {w:.17g}")
    return "\n".join(lines) + "\n"


def save_graph(G: Graph, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_graph(G), encoding="utf-8")


def write_values_csv(path: Union[str, Path], header: Sequence[str], rows: Iterable[Tuple]) -> None:
    """CSV whose last column is a float, e.g. (u, v, value) or (t, u, value)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(list(header))
        for *keys, value in rows:
            writer.writerow([*keys, f"{value:.17g}"])
