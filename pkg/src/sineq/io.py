"""JSON/CSV serialization and the run manifest embedded in every output."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from . import __version__
from .errors import DomainError


def load_json_arg(value: str) -> tuple[dict[str, Any], str]:
    """Parse an inline JSON object or the contents of a file; return it with its source text."""
    text = value
    if not value.lstrip().startswith("{"):
        path = Path(value)
        if not path.is_file():
            raise DomainError(f"neither inline JSON nor a readable file: {value!r}")
        text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"malformed JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise DomainError("expected a JSON object")
    return data, text


def digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _clean(obj: Any) -> Any:
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return obj
    if isinstance(obj, Mapping):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item"):
        return _clean(obj.item())
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def fmt_float(x: Any) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def csv_text(columns: Sequence[str], rows: Iterable[Mapping[str, Any]], manifest: Mapping[str, Any]) -> str:
    """CSV with a ``# manifest: {...}`` header line and 17-significant-digit floats."""
    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(_clean(manifest), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt_float(row.get(c, "")) for c in columns])
    return buf.getvalue()


def make_manifest(command: str, params: Mapping[str, Any], seed: int | None, inputs: Mapping[str, str]) -> dict[str, Any]:
    """Manifest of everything that determines an output; no clock values."""
    return {
        "command": command,
        "params": _clean(dict(params)),
        "seed": seed,
        "tool_version": __version__,
        "input_digests": {k: digest(v) for k, v in sorted(inputs.items())},
    }


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
