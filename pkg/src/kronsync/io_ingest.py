"""Reading MATPOWER cases and graph documents; writing result files."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import re
import tempfile
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import jsonschema
import numpy as np

from .errors import InputError, InvalidBranch, ParseError, SchemaError
from .graph_core import PowerGraph

SCHEMA_VERSION = 1


class Convention(str, Enum):
    """How a branch's series impedance r + jx becomes an edge weight."""

    REACTANCE = "reactance"    # 1 / x, the lossless line
    ADMITTANCE = "admittance"  # -Im(1 / (r + jx)) = x / (r^2 + x^2)

    def weight(self, r: float, x: float) -> float:
        if self is Convention.REACTANCE:
            return 1.0 / x
        return x / (r * r + x * x)


# reproduces the published 30-bus baseline; see the README
DEFAULT_CONVENTION = Convention.ADMITTANCE


@dataclass(frozen=True)
class Branch:
    f_bus: int
    t_bus: int
    r: float
    x: float
    status: int
    line: int


@dataclass(frozen=True)
class CaseFile:
    base_mva: float
    bus_ids: tuple
    bus_types: tuple
    branches: tuple
    gen_buses: tuple

    def to_graph(self, convention: Convention | str = DEFAULT_CONVENTION,
                 m: float = 1.0, d: float = 1.0) -> PowerGraph:
        conv = Convention(convention)
        index = {b: i for i, b in enumerate(self.bus_ids)}
        edges = []
        for br in self.branches:
            if br.status <= 0:
                continue
            if br.x <= 0:
                raise InvalidBranch(f"branch {br.f_bus}-{br.t_bus} has reactance {br.x} <= 0", br.line)
            edges.append((index[br.f_bus], index[br.t_bus], conv.weight(br.r, br.x)))
        gens = []
        for b in self.gen_buses:
            if index[b] not in gens:
                gens.append(index[b])
        return PowerGraph(len(self.bus_ids), tuple(edges), tuple(gens), m, d,
                          bus_ids=self.bus_ids)


_BLOCK = re.compile(r"mpc\.(\w+)\s*=\s*\[")
_SCALAR = re.compile(r"mpc\.baseMVA\s*=\s*([^;]+);")


def _strip_comment(line: str) -> str:
    return line.split("%", 1)[0]


def _read_blocks(text: str) -> dict[str, list[tuple[int, list[float]]]]:
    lines = text.splitlines()
    blocks: dict = {}
    i = 0
    while i < len(lines):
        code = _strip_comment(lines[i])
        m = _BLOCK.search(code)
        if not m:
            i += 1
            continue
        name, start = m.group(1), i + 1
        rest = code[m.end():]
        rows: list = []
        pending = rest
        width = None
        closed = False
        while True:
            if "]" in pending:
                pending = pending.split("]", 1)[0]
                closed = True
            for chunk in pending.split(";"):
                tokens = chunk.replace(",", " ").split()
                if not tokens:
                    continue
                try:
                    vals = [float(t) for t in tokens]
                except ValueError:
                    raise ParseError(f"non-numeric entry in mpc.{name}", i + 1)
                if width is None:
                    width = len(vals)
                elif len(vals) != width:
                    raise ParseError(f"row of mpc.{name} has {len(vals)} columns, expected {width}", i + 1)
                rows.append((i + 1, vals))
            if closed:
                break
            i += 1
            if i >= len(lines):
                raise ParseError(f"mpc.{name} block opened here is never closed", start)
            pending = _strip_comment(lines[i])
        blocks[name] = rows
        i += 1
    return blocks


def parse_matpower_case(text: str) -> CaseFile:
    blocks = _read_blocks(text)
    for name in ("bus", "gen", "branch"):
        if name not in blocks:
            raise ParseError(f"missing mpc.{name} matrix")
        if not blocks[name]:
            raise ParseError(f"mpc.{name} matrix is empty")
    m = _SCALAR.search(text)
    base = float(m.group(1)) if m else 100.0

    bus_ids, types = [], []
    for line, row in blocks["bus"]:
        if len(row) < 2:
            raise ParseError("bus row needs at least 2 columns", line)
        bus_ids.append(int(row[0]))
        types.append(int(row[1]))
    if len(set(bus_ids)) != len(bus_ids):
        raise ParseError("duplicate bus ids")
    known = set(bus_ids)

    def bus(v, line):
        b = int(v)
        if b != v or b not in known:
            raise ParseError(f"reference to unknown bus {v:g}", line)
        return b

    gens = []
    for line, row in blocks["gen"]:
        if len(row) < 8:
            raise ParseError("gen row needs at least 8 columns", line)
        if row[7] > 0:
            gens.append(bus(row[0], line))
    if not gens:
        raise ParseError("no in-service generators")

    branches = []
    for line, row in blocks["branch"]:
        if len(row) < 11:
            raise ParseError("branch row needs at least 11 columns", line)
        branches.append(Branch(bus(row[0], line), bus(row[1], line), row[2], row[3],
                               int(row[10]), line))
    return CaseFile(base, tuple(bus_ids), tuple(types), tuple(branches), tuple(gens))


def parse_matpower(text: str, convention: Convention | str = DEFAULT_CONVENTION,
                   m: float = 1.0, d: float = 1.0) -> PowerGraph:
    """Lossless network from a MATPOWER case; parallel branches add up."""
    return parse_matpower_case(text).to_graph(convention, m, d)


def case30_text() -> str:
    return resources.files("kronsync").joinpath("data/case30.m").read_text()


def load_case30(convention: Convention | str = DEFAULT_CONVENTION) -> PowerGraph:
    return parse_matpower(case30_text(), convention)


GRAPH_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "n", "edges", "generators"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "n": {"type": "integer", "minimum": 2},
        "edges": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["i", "j", "weight"],
                "additionalProperties": False,
                "properties": {
                    "i": {"type": "integer", "minimum": 0},
                    "j": {"type": "integer", "minimum": 0},
                    "weight": {"type": "number", "minimum": 0},
                },
            },
        },
        "generators": {"type": "array", "minItems": 1,
                       "items": {"type": "integer", "minimum": 0}},
        "injections": {"type": "array", "items": {"type": "number"}},
        "m": {"type": "number", "exclusiveMinimum": 0},
        "d": {"type": "number", "exclusiveMinimum": 0},
        "bus_ids": {"type": "array"},
    },
}


def _json_path(error: jsonschema.ValidationError) -> str:
    path = "$"
    for part in error.absolute_path:
        path += f"[{part}]" if isinstance(part, int) else f".{part}"
    return path


def parse_graph_json(text: str) -> PowerGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno)
    return graph_from_document(doc)


def graph_from_document(doc: Mapping) -> PowerGraph:
    validator = jsonschema.Draft202012Validator(GRAPH_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        raise SchemaError(errors[0].message, _json_path(errors[0]))
    n = doc["n"]
    for idx, e in enumerate(doc["edges"]):
        if e["i"] >= n or e["j"] >= n:
            raise SchemaError(f"node index out of range for n={n}", f"$.edges[{idx}]")
    return PowerGraph(
        n, tuple((e["i"], e["j"], e["weight"]) for e in doc["edges"]),
        tuple(doc["generators"]), doc.get("m", 1.0), doc.get("d", 1.0),
        tuple(doc["injections"]) if "injections" in doc else None,
        tuple(doc["bus_ids"]) if "bus_ids" in doc else None)


def graph_document(g: PowerGraph) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "n": g.n,
        "edges": [{"i": i, "j": j, "weight": w} for i, j, w in g.edges],
        "generators": list(g.generators),
        "m": g.m,
        "d": g.d,
    }
    if g.injections is not None:
        doc["injections"] = list(g.injections)
    if g.bus_ids is not None:
        doc["bus_ids"] = list(g.bus_ids)
    return doc


def serialize_graph(g: PowerGraph) -> str:
    # repr-based float formatting round-trips exactly
    return json.dumps(graph_document(g), indent=2) + "\n"


def load_graph(source: str | os.PathLike, convention: Convention | str = DEFAULT_CONVENTION) -> PowerGraph:
    """Graph from a path (``.m`` or ``.json``) or the bundled name ``case30``."""
    if str(source) == "case30":
        return load_case30(convention)
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}")
    if path.suffix == ".json":
        return parse_graph_json(text)
    return parse_matpower(text, convention)


def _atomic_write(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        os.unlink(tmp)
        raise InputError(f"cannot write {path}: {exc.strerror}")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return v


def _check_finite(obj, where="$"):
    if isinstance(obj, float) and not math.isfinite(obj):
        raise InputError(f"non-finite value at {where}")
    if isinstance(obj, Mapping):
        for k, v in obj.items():
            _check_finite(v, f"{where}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _check_finite(v, f"{where}[{i}]")


def _plain(obj):
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def write_json(data: Mapping, path) -> None:
    doc = {"schema_version": SCHEMA_VERSION, **_plain(dict(data))}
    _check_finite(doc)
    _atomic_write(path, json.dumps(doc, indent=2, allow_nan=False) + "\n")


def write_csv(rows: Iterable[Mapping], columns: list[str], path) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in columns])
    _atomic_write(path, buf.getvalue())


MONTECARLO_COLUMNS = ["sample_index", "strategy", "norm_omega_tilde", "norm_omega", "seed",
                      "u0_hash", "failed"]
SWEEP_COLUMNS = ["gamma", "psi", "feasible", "r_tot_reduced", "objective"]


def write_results(results, fmt: str, path) -> None:
    """Write an ``OptimizationResult``, ``MonteCarloReport``, sweep result list
    or plain mapping as ``csv`` or ``json``."""
    if fmt not in ("csv", "json"):
        raise InputError(f"unknown result format {fmt!r}")
    if hasattr(results, "as_dict") and hasattr(results, "x_star"):
        if fmt == "json":
            write_json(results.as_dict(), path)
        else:
            rows = [{"i": i, "j": j, "x": x}
                    for (i, j), x in zip(results.candidate_edges, results.x_star)]
            write_csv(rows, ["i", "j", "x"], path)
        return
    if hasattr(results, "rows") and hasattr(results, "summary"):
        if fmt == "csv":
            write_csv(results.rows(), MONTECARLO_COLUMNS, path)
        else:
            write_json(results.summary(), path)
        return
    if isinstance(results, (list, tuple)) and all(hasattr(p, "psi") for p in results):
        rows = [{"gamma": p.gamma, "psi": p.psi, "feasible": p.feasible,
                 "r_tot_reduced": p.r_tot_reduced, "objective": p.objective} for p in results]
        if fmt == "csv":
            write_csv(rows, SWEEP_COLUMNS, path)
        else:
            for r in rows:
                for c in ("r_tot_reduced", "objective"):
                    if not math.isfinite(r[c]):
                        r[c] = None
            write_json({"points": rows}, path)
        return
    if isinstance(results, Mapping):
        if fmt == "json":
            write_json(results, path)
        else:
            cols = list(results)
            write_csv([results], cols, path)
        return
    raise InputError(f"cannot serialize {type(results).__name__}")
