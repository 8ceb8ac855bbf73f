from __future__ import annotations

import io
import logging
from pathlib import Path
from typing import Iterable

import pandas as pd

from src.bound import BoundResult
from src.config import TABLE1_ROWS, TABLE2_ROWS, ProblemConfig
from .manifest import RunManifest, atomic_write, canonical_json

logger = logging.getLogger(__name__)

TABLE1_COLUMNS = ["alphaTilde", "absRho", "m1", "m2", "uStarStar"]
TABLE2_COLUMNS = ["alphaTilde", "absRho", "u", "gainUpperBound", "loss", "ratio"]
CSV_FLOAT_FORMAT = "%.8g"


def table1_row(result: BoundResult, cfg: ProblemConfig) -> dict:
    return {
        "alphaTilde": cfg.alpha_tilde,
        "absRho": abs(cfg.rho),
        "m1": result.m1,
        "m2": result.m2,
        "uStarStar": result.u_star_star,
    }


def table2_row(result: BoundResult, cfg: ProblemConfig) -> dict:
    return {
        "alphaTilde": cfg.alpha_tilde,
        "absRho": abs(cfg.rho),
        "u": result.u,
        "gainUpperBound": result.gain_upper_bound,
        "loss": result.loss,
        "ratio": result.ratio,
    }


def table1_reference() -> pd.DataFrame:
    return pd.DataFrame(TABLE1_ROWS, columns=TABLE1_COLUMNS)


def table2_reference() -> pd.DataFrame:
    return pd.DataFrame(TABLE2_ROWS, columns=TABLE2_COLUMNS)


def with_reference(frame: pd.DataFrame, reference: pd.DataFrame, keys: Iterable[str], value: str) -> pd.DataFrame:
    """Attach the tabulated ``value`` and the relative error of the computed one."""
    keys = list(keys)
    ref = reference[keys + [value]].rename(columns={value: f"{value}Reference"})
    merged = frame.merge(ref, on=keys, how="left")
    merged[f"{value}RelErr"] = (merged[value] - merged[f"{value}Reference"]) / merged[f"{value}Reference"]
    return merged


def write_csv(frame: pd.DataFrame, path: str | Path, manifest: RunManifest) -> Path:
    """CSV with 8 significant digits, preceded by a ``# manifest:`` comment line."""
    out = Path(path)
    buf = io.StringIO()
    buf.write(f"# manifest: {canonical_json(manifest.to_dict())}\n")
    frame.to_csv(buf, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    atomic_write(out, buf.getvalue())
    logger.info("[saved] %s", out)
    return out

