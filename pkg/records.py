"""
Result documents and file formats

JSON run documents with a fixed top-level schema, plot-ready CSV series,
metadata sidecars and the optional key = value config file.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import asdict, dataclass, field, is_dataclass
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from dotenv import dotenv_values


VERSION = "0.1.0"
CSV_VALUE_COLUMNS = ("price", "value")
SIDECAR_SUFFIX = ".meta.json"
PARAMETER_ALIASES = {"format": "fmt"}

MODEL_REFS = {
    "wiener": "geometric Brownian motion with constant drift and variance",
    "jls": "log-periodic crash hazard with martingale pre-crash drift",
    "ticks": "one-tick non-arbitrage mixture of regular and big-player regimes",
    "ecology": "Zipf fund sizes with square-root impact cost equalization",
    "kinematic": "constant-acceleration displacement over uniform intervals",
    "twopop": "informed / noise trader volatility decomposition",
    "garch": "GARCH conditional variance recursion",
    "tail": "Hill estimator on the top order statistics",
    "regimes": "log-binned density slopes per segment",
}


class MalformedInputError(ValueError):
    """An input file does not follow the CSV contract."""


def to_jsonable(value: Any) -> Any:
    """Convert dataclasses, numpy values and non-finite floats to plain JSON types."""

    if is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(asdict(value))
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(item) for item in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        number = float(value)
        return number if math.isfinite(number) else None
    return value


@dataclass
class RunDocument:
    seed: int
    config: dict[str, Any]
    results: dict[str, Any]
    version: str = VERSION

    def to_dict(self) -> dict[str, Any]:
        return to_jsonable(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


@dataclass
class SeriesTable:
    """Two-column series written as ``t,<column>``."""

    times: np.ndarray
    values: np.ndarray
    column: str = "value"
    extra: dict[str, np.ndarray] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"t": self.times, self.column: self.values})
        for name, values in self.extra.items():
            frame[name] = values
        return frame


def write_series_csv(table: SeriesTable, out: str | Path | None) -> None:
    """Write a series with round-trip float precision to ``out`` or stdout."""

    frame = table.to_frame()
    target = sys.stdout if out in (None, "-") else out
    frame.to_csv(target, index=False, float_format="%.17g", lineterminator="\n")


def sidecar_path(out: str | Path) -> Path:
    path = Path(out)
    return path.with_name(path.name + SIDECAR_SUFFIX)


def write_document(document: RunDocument, out: str | Path | None) -> None:
    text = document.to_json() + "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    Path(out).write_text(text, encoding="utf-8")


def read_series_csv(source: str | Path) -> SeriesTable:
    """
    Read a ``t,price`` or ``t,value`` CSV from a path or ``-`` for stdin.

    Extra columns after the value column are ignored.
    """

    try:
        frame = pd.read_csv(
            sys.stdin if str(source) == "-" else source, float_precision="round_trip"
        )
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as error:
        raise MalformedInputError(f"cannot parse {source}: {error}") from error

    columns = list(frame.columns)
    if len(columns) < 2 or columns[0] != "t" or columns[1] not in CSV_VALUE_COLUMNS:
        raise MalformedInputError(
            f"{source}: header must start with t,price or t,value; got {','.join(map(str, columns))}"
        )
    data = frame.iloc[:, :2]
    if data.isna().any().any():
        raise MalformedInputError(f"{source}: missing or non-numeric values")
    try:
        data = data.astype(np.float64)
    except ValueError as error:
        raise MalformedInputError(f"{source}: non-numeric values") from error
    return SeriesTable(
        times=data["t"].to_numpy(),
        values=data[columns[1]].to_numpy(),
        column=str(columns[1]),
    )


def load_config_file(path: str | Path) -> dict[str, Any]:
    """
    Parse a ``key = value`` config file into a click default map.

    Dotted keys address subcommands, so ``simulate.wiener.mu = 0.1`` sets the
    ``--mu`` default of ``simulate wiener`` while ``seed = 7`` sets a group
    option.
    """

    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    defaults: dict[str, Any] = {}
    for key, value in dotenv_values(path).items():
        if value is None:
            continue
        *scopes, name = key.strip().replace("-", "_").split(".")
        name = PARAMETER_ALIASES.get(name, name)
        target = defaults
        for scope in scopes:
            target = target.setdefault(scope, {})
        target[name] = value
    return defaults
