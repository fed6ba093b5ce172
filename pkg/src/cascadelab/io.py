"""
Reading and writing graphs, vote logs and result tables.

Supported graph inputs:

* Digg-2009 friends CSV, header ``mutual,friend_date,user_id,friend_id``.
  ``user_id`` is a fan of ``friend_id`` (edge ``friend_id -> user_id``);
  ``mutual == 1`` adds the reverse edge as well.
* Whitespace-separated ``source target`` edge lists (``#`` comments and an
  optional ``source target`` header line are skipped).
* ``.npz`` archives written by :func:`save_graph`, which keep the id map.

Vote inputs are CSV with header ``vote_date,voter_id,story_id`` and an
optional ``submitter_id`` column.
"""

from __future__ import annotations

import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from .errors import ParseError
from .graph import DirectedGraph, load_graph, load_votes

DIGG_FRIEND_COLUMNS = ("mutual", "friend_date", "user_id", "friend_id")
VOTE_COLUMNS = ("vote_date", "voter_id", "story_id")


def _open_text(path):
    return open(path, "r", encoding="utf-8", newline="")


def _digg_records(reader, header, first_line):
    try:
        cols = [header.index(c) for c in DIGG_FRIEND_COLUMNS]
    except ValueError:
        raise ParseError(f"friends header must contain {DIGG_FRIEND_COLUMNS}", 1) from None
    i_mut, _, i_user, i_friend = cols
    for line, row in enumerate(reader, start=first_line):
        if not row:
            continue
        try:
            mutual, user, friend = row[i_mut].strip(), row[i_user].strip(), row[i_friend].strip()
        except IndexError:
            raise ParseError(f"expected {len(header)} columns, got {len(row)}", line) from None
        if mutual not in ("0", "1"):
            raise ParseError(f"mutual must be 0 or 1, got {mutual!r}", line)
        if not user or not friend:
            raise ParseError("empty user id", line)
        yield friend, user
        if mutual == "1":
            yield user, friend


def _edge_list_records(lines, first_line):
    for line, raw in enumerate(lines, start=first_line):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'source target', got {text!r}", line)
        if line == first_line and parts == ["source", "target"]:
            continue
        yield parts[0], parts[1]


def read_graph(path) -> DirectedGraph:
    """Load a follower graph, choosing the parser from the file contents."""
    path = Path(path)
    if path.suffix == ".npz":
        return load_npz(path)
    with _open_text(path) as fh:
        head = fh.readline()
        fh.seek(0)
        if "user_id" in head and "friend_id" in head:
            reader = csv.reader(fh)
            header = [h.strip() for h in next(reader)]
            records = _digg_records(reader, header, 2)
        else:
            records = _edge_list_records(fh, 1)
        # the record generators raise ParseError with file line numbers
        return load_graph(records)


def write_edge_list(graph: DirectedGraph, path) -> None:
    """Write ``source target`` lines using external ids, with a header line."""
    src, dst = graph.edges()
    ids = graph.ids
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("source target\n")
        for u, v in zip(src.tolist(), dst.tolist()):
            fh.write(f"{ids[u]} {ids[v]}\n")


def save_graph(graph: DirectedGraph, path) -> None:
    """Store the graph and its id map in one ``.npz`` archive."""
    src, dst = graph.edges()
    np.savez_compressed(
        path, src=src, dst=dst,
        ids=np.array(graph.ids, dtype=object).astype(str),
        notes=json.dumps(dict(graph.notes)),
    )


def load_npz(path) -> DirectedGraph:
    with np.load(path, allow_pickle=False) as z:
        ids = tuple(z["ids"].tolist())
        notes = json.loads(str(z["notes"])) if "notes" in z else {}
        graph = DirectedGraph.from_arrays(len(ids), z["src"], z["dst"], ids=ids)
    return DirectedGraph(graph.ids, graph.fan_ptr, graph.fan_idx,
                         graph.friend_ptr, graph.friend_idx, notes)


def read_votes(path) -> dict:
    """Load a votes CSV into ``{story id: VoteLog}``."""
    with _open_text(path) as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError("empty votes file", 1) from None
        try:
            cols = [header.index(c) for c in VOTE_COLUMNS]
        except ValueError:
            raise ParseError(f"votes header must contain {VOTE_COLUMNS}", 1) from None
        i_sub = header.index("submitter_id") if "submitter_id" in header else None
        submitters = {}
        records = []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rec = tuple(row[i].strip() for i in cols)
            except IndexError:
                raise ParseError(f"expected {len(header)} columns, got {len(row)}", line) from None
            try:
                float(rec[0])
            except ValueError:
                raise ParseError(f"vote_date is not numeric: {rec[0]!r}", line) from None
            records.append(rec)
            if i_sub is not None and row[i_sub].strip():
                submitters.setdefault(rec[2], row[i_sub].strip())
    if not records:
        raise ParseError("votes file has no records", None)
    return load_votes(records, first_line=2, submitters=submitters or None)


def write_votes(logs, path) -> None:
    """Write vote logs back out in the votes CSV layout."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(VOTE_COLUMNS + ("submitter_id",))
        for log in logs:
            for voter, t in log.votes:
                w.writerow([repr(float(t)) if not float(t).is_integer() else int(t),
                            voter, log.story, log.submitter or ""])


def write_csv(rows, header, out=None) -> None:
    """Write rows with a header to a path, a text stream, or stdout."""
    if out is None or out == "-":
        _write_rows(sys.stdout, rows, header)
    elif isinstance(out, (str, os.PathLike)):
        with open(out, "w", encoding="utf-8", newline="") as fh:
            _write_rows(fh, rows, header)
    else:
        _write_rows(out, rows, header)


def _write_rows(fh, rows, header):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])


def _fmt(x):
    if isinstance(x, float):
        if x != x:
            return ""
        return repr(x)
    if isinstance(x, np.floating):
        return repr(float(x))
    if isinstance(x, np.integer):
        return int(x)
    return x


def read_csv(path_or_text):
    """Parse a CSV written by :func:`write_csv` into a list of dicts."""
    if isinstance(path_or_text, str) and "\n" in path_or_text:
        fh = io.StringIO(path_or_text)
    else:
        fh = _open_text(path_or_text)
    with fh:
        return list(csv.DictReader(fh))
