"""Text formats for networks, cascade corpora, inferred edges and curves.

Cascade file::

    0,siteA
    1,siteB
                        <- one blank line ends the node header
    0,0.0;1,1.0         <- one cascade per line, node,time pairs

Network file: one ``src,dst`` per line, optionally preceded by a
``# nodes=N`` comment so isolated nodes survive a round trip.
"""
from __future__ import annotations

import math
import os
import tempfile
from pathlib import Path

from .core import Cascade, CascadeSet, DirectedNetwork


class FormatError(ValueError):
    def __init__(self, message: str, path=None, lineno: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)
        self.path = path
        self.lineno = lineno


def atomic_write(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_lines(path) -> list[str]:
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    text = text.replace("\r\n", "\n")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def format_time(t: float) -> str:
    return repr(float(t))


# -- cascades -----------------------------------------------------------------

def format_cascades(corpus: CascadeSet) -> str:
    labels = corpus.node_labels or [str(i) for i in range(corpus.n)]
    out = [f"{i},{label}" for i, label in enumerate(labels)]
    out.append("")
    for c in corpus:
        out.append(";".join(f"{int(u)},{format_time(t)}" for u, t in zip(c.nodes, c.times)))
    return "\n".join(out) + "\n"


def write_cascades(path, corpus: CascadeSet):
    atomic_write(path, format_cascades(corpus))


def _parse_int(text: str, what: str, path, lineno: int) -> int:
    try:
        value = int(text)
    except ValueError:
        raise FormatError(f"bad {what} {text!r}", path, lineno) from None
    if value < 0:
        raise FormatError(f"negative {what} {value}", path, lineno)
    return value


def parse_cascade_lines(lines: list[str], path=None) -> CascadeSet:
    header: dict[int, str] = {}
    sep = None
    for lineno, line in enumerate(lines, start=1):
        if line.strip() == "":
            sep = lineno
            break
        if ";" in line:
            raise FormatError("cascade line before the blank header separator", path, lineno)
        node, _, label = line.partition(",")
        if not _:
            raise FormatError("header line must be 'node_id,label'", path, lineno)
        nid = _parse_int(node.strip(), "node id", path, lineno)
        if nid in header:
            raise FormatError(f"node {nid} declared twice", path, lineno)
        header[nid] = label
    if sep is None:
        raise FormatError("missing blank line between node header and cascades", path,
                          len(lines) or None)
    n = max(header) + 1 if header else 0
    labels = None
    if header:
        if len(header) != n:
            missing = min(set(range(n)) - set(header))
            raise FormatError(f"node ids must be dense; {missing} is missing", path, sep)
        labels = [header[i] for i in range(n)]

    cascades = []
    for lineno in range(sep + 1, len(lines) + 1):
        line = lines[lineno - 1]
        if line.strip() == "":
            raise FormatError("blank line inside the cascade section", path, lineno)
        hits: dict[int, float] = {}
        for pair in line.split(";"):
            node, comma, stamp = pair.partition(",")
            if not comma:
                raise FormatError(f"expected node,time but got {pair!r}", path, lineno)
            nid = _parse_int(node.strip(), "node id", path, lineno)
            if nid >= n:
                raise FormatError(f"node {nid} not declared in the header", path, lineno)
            try:
                t = float(stamp)
            except ValueError:
                raise FormatError(f"bad time {stamp!r}", path, lineno) from None
            if not math.isfinite(t):
                raise FormatError(f"time must be finite, got {stamp!r}", path, lineno)
            if t < 0:
                raise FormatError(f"negative time {stamp!r}", path, lineno)
            if nid in hits:
                raise FormatError(f"node {nid} appears twice in one cascade", path, lineno)
            hits[nid] = t
        try:
            cascades.append(Cascade.from_mapping(hits))
        except ValueError as err:
            raise FormatError(str(err), path, lineno) from None
    return CascadeSet(n, cascades, labels)


def parse_cascade_file(path) -> CascadeSet:
    return parse_cascade_lines(_read_lines(path), path)


def parse_cascade_text(text: str) -> CascadeSet:
    lines = text.replace("\r\n", "\n").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return parse_cascade_lines(lines)


# -- networks -----------------------------------------------------------------

def format_network(network: DirectedNetwork) -> str:
    lines = [f"# nodes={network.n}"]
    lines += [f"{u},{v}" for u, v in network.sorted_edges()]
    return "\n".join(lines) + "\n"


def write_network(path, network: DirectedNetwork):
    atomic_write(path, format_network(network))


def _parse_edge_lines(path, min_fields: int):
    n_declared = None
    rows = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            key, _, value = stripped[1:].strip().partition("=")
            if key.strip() == "nodes":
                n_declared = _parse_int(value.strip(), "node count", path, lineno)
            continue
        fields = stripped.split(",")
        if len(fields) < min_fields:
            raise FormatError(f"expected at least {min_fields} comma-separated fields", path, lineno)
        u = _parse_int(fields[0].strip(), "node id", path, lineno)
        v = _parse_int(fields[1].strip(), "node id", path, lineno)
        if u == v:
            raise FormatError(f"self-loop {u},{v}", path, lineno)
        rows.append((lineno, u, v, fields[2:]))
    return n_declared, rows


def read_network(path, n: int | None = None) -> DirectedNetwork:
    n_declared, rows = _parse_edge_lines(path, 2)
    edges = set()
    for lineno, u, v, _ in rows:
        if (u, v) in edges:
            raise FormatError(f"duplicate edge {u},{v}", path, lineno)
        edges.add((u, v))
    size = n if n is not None else n_declared
    if size is None:
        size = 1 + max((max(u, v) for u, v in edges), default=-1)
    try:
        return DirectedNetwork(size, frozenset(edges))
    except ValueError as err:
        raise FormatError(str(err), path) from None


# -- inferred edges -----------------------------------------------------------

def format_inferred(rows) -> str:
    """``rows`` are (src, dst, delta, iteration) in selection order."""
    return "".join(f"{u},{v},{format_time(d)},{it}\n" for u, v, d, it in rows)


def write_inferred(path, rows):
    atomic_write(path, format_inferred(rows))


def read_inferred(path) -> list[tuple[int, int, float, int]]:
    _, rows = _parse_edge_lines(path, 2)
    out = []
    for lineno, u, v, rest in rows:
        try:
            delta = float(rest[0]) if rest else math.nan
            it = int(rest[1]) if len(rest) > 1 else len(out)
        except ValueError:
            raise FormatError("bad delta/iteration columns", path, lineno) from None
        out.append((u, v, delta, it))
    return out


# -- key=value ----------------------------------------------------------------

def format_kv(items) -> str:
    return "".join(f"{k}={v}\n" for k, v in items)


def parse_kv(text: str, path=None) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, eq, value = stripped.partition("=")
        if not eq:
            raise FormatError("expected key=value", path, lineno)
        out[key.strip()] = value.strip()
    return out


def format_csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_time(x) if isinstance(x, float) else str(x) for x in row))
    return "\n".join(lines) + "\n"
