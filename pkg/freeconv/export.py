"""
CSV and JSON writers.

Floats are always written with 17 significant digits so every double
round-trips exactly; the JSON renderer is deterministic (insertion-ordered
keys, no locale or platform dependence).
"""

import json
import logging
import math
import os
from typing import Any, Iterable, Optional, TextIO

import pandas as pd
from pydantic import BaseModel

from freeconv.density import DensityGrid, grid_metadata
from freeconv.oracles import EmpiricalSpectrum
from freeconv.schemas import CheckResult

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def _render_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    if "e" not in text and "." not in text and "n" not in text:
        text += ".0"
    return text


def render_json(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """Serialize dicts, lists, pydantic models and scalars with lossless floats."""
    if isinstance(obj, BaseModel):
        obj = obj.model_dump(mode="python")
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {render_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(render_json(v, indent, _level + 1) for v in obj) + "]"
        items = [inner + render_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _render_float(obj)
    if hasattr(obj, "item"):
        return render_json(obj.item(), indent, _level)
    return json.dumps(str(obj))


def write_json(obj: Any, path: Optional[str] = None, stream: Optional[TextIO] = None) -> str:
    text = render_json(obj) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        logger.info(f"wrote {path}")
    elif stream is not None:
        stream.write(text)
    return text


def sidecar_path(path: str) -> str:
    root, _ = os.path.splitext(path)
    return root + ".json"


def density_frame(grid: DensityGrid) -> pd.DataFrame:
    return pd.DataFrame({"x": grid.xs, "rho": grid.rho, "cdf": grid.cdf})


def write_density(grid: DensityGrid, path: Optional[str] = None, stream: Optional[TextIO] = None) -> None:
    """CSV `x,rho,cdf` plus the metadata sidecar next to it."""
    df = density_frame(grid)
    if path:
        df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        logger.info(f"wrote {len(df)} rows to {path}")
        write_json(grid_metadata(grid), sidecar_path(path))
    else:
        df.to_csv(stream, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        logger.info(f"density metadata: {render_json(grid_metadata(grid), indent=0)}")


def write_spectrum(spectrum: EmpiricalSpectrum, path: str) -> None:
    """CSV `eigenvalue` plus the {n_matrix, n_samples, seed} sidecar."""
    pd.DataFrame({"eigenvalue": spectrum.eigenvalues}).to_csv(
        path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )
    write_json(spectrum.metadata(), sidecar_path(path))


def results_frame(rows: Iterable[CheckResult]) -> pd.DataFrame:
    return pd.DataFrame([r.model_dump() for r in rows], columns=list(CheckResult.model_fields))


def format_results(rows: Iterable[CheckResult]) -> str:
    """Pass/fail table for terminal output."""
    df = results_frame(rows)
    if df.empty:
        return "(no checks)"
    df["status"] = df["passed"].map({True: "PASS", False: "FAIL"})
    cols = ["suite", "check", "measured", "tolerance", "status"]
    return df[cols].to_string(index=False, float_format=lambda v: f"{v:.3e}")
