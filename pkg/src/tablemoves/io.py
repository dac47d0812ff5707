"""Reading problems and writing results as JSON or CSV.

Problem files carry two or three margins and optionally a cost, given as
a matrix or by name (``euclidean`` for ``|i - j|``, ``sqrt`` for
``sqrt(|i - j|)``).

JSON::

    {"mu": [...], "nu": [...], "zeta": [...], "cost": "sqrt" | [[...], ...]}

CSV: one margin per line, then either one line holding a cost name or the
``n`` rows of the cost matrix. With more than three lines the last ``n``
are taken as the matrix.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError, ValidationError
from .tables import CostMatrix, ProbabilityVector

COST_NAMES = {"euclidean": CostMatrix.euclidean, "sqrt": CostMatrix.sqrt_distance}
SIG_DIGITS = 12


@dataclass(frozen=True, eq=False)
class Problem:
    margins: tuple
    cost: CostMatrix | None = None

    @property
    def mu(self):
        return self.margins[0]

    @property
    def nu(self):
        return self.margins[1]

    @property
    def n(self) -> int:
        return self.margins[0].n


def _vector(values, name: str) -> np.ndarray:
    try:
        arr = np.asarray(values, dtype=np.float64)
    except (TypeError, ValueError):
        raise InputError(name, "expected a list of numbers") from None
    if arr.ndim != 1 or arr.size == 0:
        raise InputError(name, "expected a non-empty list of numbers")
    return arr


def _margin(values, name: str) -> ProbabilityVector:
    arr = _vector(values, name)
    try:
        return ProbabilityVector(arr)
    except ValidationError as exc:
        raise InputError(name, str(exc)) from None


def make_cost(spec, n: int, name: str = "cost") -> CostMatrix:
    if isinstance(spec, str):
        try:
            return COST_NAMES[spec.strip().lower()](n)
        except KeyError:
            raise InputError(name, f"unknown cost name {spec!r}; use one of {sorted(COST_NAMES)}") from None
    try:
        arr = np.asarray(spec, dtype=np.float64)
    except (TypeError, ValueError):
        raise InputError(name, "expected a cost name or a square matrix of numbers") from None
    if arr.shape != (n, n):
        raise InputError(name, f"expected a {n}x{n} matrix, got shape {arr.shape}")
    try:
        return CostMatrix(arr)
    except ValidationError as exc:
        raise InputError(name, str(exc)) from None


def problem_from_dict(obj) -> Problem:
    if not isinstance(obj, dict):
        raise InputError("problem", "expected a JSON object")
    for key in ("mu", "nu"):
        if key not in obj:
            raise InputError(key, "missing")
    names = ["mu", "nu"] + (["zeta"] if "zeta" in obj else [])
    margins = tuple(_margin(obj[k], k) for k in names)
    sizes = {m.n for m in margins}
    if len(sizes) != 1:
        raise InputError(names[-1], f"margins have different lengths {[m.n for m in margins]}")
    cost = make_cost(obj["cost"], margins[0].n) if obj.get("cost") is not None else None
    return Problem(margins, cost)


def _csv_rows(text: str) -> list[list[str]]:
    rows = [[c.strip() for c in r] for r in csv.reader(io.StringIO(text))]
    return [r for r in rows if r and any(r) and not r[0].startswith("#")]


def _floats(row, name):
    try:
        return [float(c) for c in row if c != ""]
    except ValueError:
        raise InputError(name, f"non-numeric entry in {row}") from None


def problem_from_csv(text: str) -> Problem:
    rows = _csv_rows(text)
    if len(rows) < 2:
        raise InputError("margins", "need at least two margin lines")
    cost_spec = None
    if len(rows[-1]) == 1 and rows[-1][0].lower() in COST_NAMES:
        cost_spec = rows[-1][0]
        rows = rows[:-1]
    n = len(_floats(rows[0], "mu"))
    if cost_spec is None and len(rows) > 3:
        cost_spec = [_floats(r, "cost") for r in rows[-n:]]
        rows = rows[:-n]
    if len(rows) not in (2, 3):
        raise InputError("margins", f"expected 2 or 3 margin lines, found {len(rows)}")
    obj = dict(zip(("mu", "nu", "zeta"), (_floats(r, k) for r, k in zip(rows, ("mu", "nu", "zeta")))))
    obj["cost"] = cost_spec
    return problem_from_dict(obj)


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError("input", f"cannot read {path}: {exc.strerror}") from None


def _guess_format(path, text: str) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in (".json", ".csv"):
        return suffix[1:]
    return "json" if text.lstrip().startswith(("{", "[")) else "csv"


def _load_json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(what, f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def read_problem(path) -> Problem:
    text = _read_text(path)
    if _guess_format(path, text) == "json":
        return problem_from_dict(_load_json(text, "problem"))
    return problem_from_csv(text)


def read_json(path, what: str = "config") -> dict:
    obj = _load_json(_read_text(path), what)
    if not isinstance(obj, dict):
        raise InputError(what, "expected a JSON object")
    return obj


def read_table(path) -> np.ndarray:
    """A coupling given as a JSON matrix (bare or under ``"coupling"``) or CSV rows."""
    text = _read_text(path)
    if _guess_format(path, text) == "json":
        obj = _load_json(text, "coupling")
        if isinstance(obj, dict):
            if "coupling" not in obj:
                raise InputError("coupling", "missing")
            obj = obj["coupling"]
        data = obj
    else:
        data = [_floats(r, "coupling") for r in _csv_rows(text)]
    try:
        arr = np.asarray(data, dtype=np.float64)
    except (TypeError, ValueError):
        raise InputError("coupling", "expected a square matrix of numbers") from None
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InputError("coupling", f"expected a square matrix, got shape {arr.shape}")
    return arr


def read_sample(path):
    """``{"x": [...], "y": [...]}``, ``{"row_counts": [...], "col_counts": [...]}`` or two CSV lines."""
    from .homophily import BivariateSample

    text = _read_text(path)
    if _guess_format(path, text) == "json":
        obj = _load_json(text, "sample")
        if not isinstance(obj, dict):
            raise InputError("sample", "expected a JSON object")
        if "row_counts" in obj or "col_counts" in obj:
            for key in ("row_counts", "col_counts"):
                if key not in obj:
                    raise InputError(key, "missing")
            try:
                return BivariateSample.from_counts(obj["row_counts"], obj["col_counts"], obj.get("values"))
            except (ValidationError, ValueError, TypeError) as exc:
                raise InputError("row_counts", str(exc)) from None
        for key in ("x", "y"):
            if key not in obj:
                raise InputError(key, "missing")
        x, y = _vector(obj["x"], "x"), _vector(obj["y"], "y")
    else:
        rows = _csv_rows(text)
        if len(rows) != 2:
            raise InputError("sample", f"expected two lines (x and y), found {len(rows)}")
        x, y = np.array(_floats(rows[0], "x")), np.array(_floats(rows[1], "y"))
    try:
        return BivariateSample(x, y)
    except (ValidationError, ValueError) as exc:
        raise InputError("y", str(exc)) from None


# --------------------------------------------------------------------------
# output


def round_sig(x: float, digits: int = SIG_DIGITS) -> float:
    if x == 0 or not math.isfinite(x):
        return float(x)
    return float(f"{x:.{digits}g}")


def canonical(obj):
    """Round every float to 12 significant digits, recursively."""
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return canonical(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round_sig(float(obj))
    return obj


def dumps_json(obj) -> str:
    return json.dumps(canonical(obj), sort_keys=True, indent=2) + "\n"


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{SIG_DIGITS}g}"
    return str(x)


def matrix_csv(table) -> str:
    return "".join(",".join(_fmt(v) for v in row) + "\n" for row in np.asarray(table))


def slices_csv(table3) -> str:
    """Three-way table as ``z`` blocks separated by comment lines."""
    t = np.asarray(table3)
    parts = []
    for k in range(t.shape[2]):
        parts.append(f"# z={k}\n" + matrix_csv(t[:, :, k]))
    return "".join(parts)


def slices_json(table3) -> list:
    t = np.asarray(table3)
    return [t[:, :, k].tolist() for k in range(t.shape[2])]


def rows_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: _fmt(v) for k, v in r.items()})
    return buf.getvalue()


def write_problem(problem: Problem, fmt: str = "json") -> str:
    names = ("mu", "nu", "zeta")
    if fmt == "json":
        obj = {k: m.values.tolist() for k, m in zip(names, problem.margins)}
        if problem.cost is not None:
            obj["cost"] = problem.cost.entries.tolist()
        return dumps_json(obj)
    out = "".join(",".join(_fmt(v) for v in m.values) + "\n" for m in problem.margins)
    if problem.cost is not None:
        out += matrix_csv(problem.cost.entries)
    return out
