"""Check reports and their byte-stable JSON/CSV serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np


@dataclass
class CheckReport:
    """Outcome of an inequality or property check.

    ``empirical_constant`` is the largest LHS/RHS ratio seen. The verdict is a
    pass iff there are no violations and the constant does not exceed ``cap``
    (no cap means report-only).
    """

    check: str
    variant: str = ""
    dim: int = 0
    depth: int = 0
    empirical_constant: float = 0.0
    worst_region: str | None = None
    violations: list[str] = field(default_factory=list)
    params: dict[str, Any] = field(default_factory=dict)
    cap: float | None = None
    lhs: Any = field(default=None, repr=False, compare=False)
    rhs: Any = field(default=None, repr=False, compare=False)

    @property
    def passed(self) -> bool:
        if self.violations:
            return False
        if self.cap is not None and not self.empirical_constant <= self.cap:
            return False
        return math.isfinite(self.empirical_constant)

    def to_dict(self) -> dict[str, Any]:
        return {
            "check": self.check,
            "variant": self.variant,
            "dim": self.dim,
            "depth": self.depth,
            "empirical_constant": self.empirical_constant,
            "worst_region": self.worst_region,
            "violations": list(self.violations),
            "params": self.params,
            "cap": self.cap,
            "passed": self.passed,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> CheckReport:
        return cls(
            check=d["check"],
            variant=d.get("variant", ""),
            dim=d.get("dim", 0),
            depth=d.get("depth", 0),
            empirical_constant=float(d.get("empirical_constant", 0.0)),
            worst_region=d.get("worst_region"),
            violations=list(d.get("violations", [])),
            params=d.get("params", {}),
            cap=d.get("cap"),
        )


@dataclass
class CharacteristicReport:
    value: float
    argmax: str
    p: float

    @property
    def passed(self) -> bool:
        return math.isfinite(self.value)

    def to_dict(self) -> dict[str, Any]:
        return {"value": self.value, "argmax": self.argmax, "p": self.p, "violations": []}


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    return obj


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _encode(obj: Any, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_fmt_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, list):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _encode(v, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, k in enumerate(sorted(obj)):
            if i:
                out.append(", ")
            out.append(json.dumps(k, ensure_ascii=True))
            out.append(": ")
            _encode(obj[k], out)
        out.append("}")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(obj: Any) -> str:
    out: list[str] = []
    _encode(_plain(obj), out)
    return "".join(out) + "\n"


SCALING_HEADER = ["alpha", "a2d", "a2r", "norm", "ratio", "slope"]


def rows_to_csv(rows: list[dict[str, Any]], header: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt_float(float(row[h])) if isinstance(row[h], (float, np.floating))
                         else row[h] for h in header])
    return buf.getvalue()


def emit(report: Any, format: str = "json") -> bytes:
    """Serialize a report deterministically (sorted keys, 17 significant digits)."""
    if format == "json":
        return to_json(report).encode()
    if format == "csv":
        if hasattr(report, "rows") and hasattr(report, "header"):
            return rows_to_csv(report.rows, report.header).encode()
        d = _plain(report)
        if isinstance(d, dict):
            keys = sorted(k for k, v in d.items() if not isinstance(v, (dict, list)))
            return rows_to_csv([{k: d[k] for k in keys}], keys).encode()
        raise TypeError("csv emission needs a table or a flat record")
    raise ValueError(f"unsupported format {format!r}")


def read_json(data: bytes | str) -> Any:
    if isinstance(data, bytes):
        data = data.decode()
    return json.loads(data)


def read_csv(data: bytes | str) -> tuple[list[str], list[dict[str, str]]]:
    if isinstance(data, bytes):
        data = data.decode()
    reader = csv.reader(io.StringIO(data))
    header = next(reader)
    return header, [dict(zip(header, row)) for row in reader]
