"""Dataset ingestion and report/table serialization for the CLI.

Tabular files are RFC-4180-style CSV with a mandatory header row, UTF-8
encoded. Machine-readable numbers are written with ``repr`` so they
round-trip exactly; human tables use four decimal places. JSON reports embed
a schema version and validate against ``schemas/report.schema.json``.

Reproducibility: report timestamps honor the ``SOURCE_DATE_EPOCH``
convention (pin it to make fit/compare reports byte-stable); the simulation
table files contain no timestamps at all.
"""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import os
from pathlib import Path

import numpy as np

from bellshrink import __version__
from bellshrink.errors import SchemaError, ValidationError
from bellshrink.glm import Dataset
from bellshrink.shrinkage import EstimatorKind

SCHEMA_VERSION = "1"
SCHEMA_PATH = Path(__file__).parent / "schemas" / "report.schema.json"


def fmt(x) -> str:
    """Exact round-trip text for one CSV cell."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def generated_at() -> str | None:
    """ISO timestamp, taken from SOURCE_DATE_EPOCH when set (reproducible runs)."""
    sde = os.environ.get("SOURCE_DATE_EPOCH", "").strip()
    if sde:
        try:
            stamp = _dt.datetime.fromtimestamp(int(sde), tz=_dt.timezone.utc)
        except (ValueError, OverflowError, OSError) as exc:
            raise ValidationError(f"invalid SOURCE_DATE_EPOCH {sde!r}: {exc}") from None
    else:
        stamp = _dt.datetime.now(tz=_dt.timezone.utc)
    return stamp.replace(microsecond=0).isoformat()


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def parse_dataset(
    path,
    response_column: str,
    feature_columns: list[str] | None = None,
    intercept: bool = False,
) -> Dataset:
    """Load a CSV into a :class:`Dataset`.

    ``feature_columns`` defaults to every non-response column in file order.
    The response must be integer-valued and nonnegative; any non-numeric cell
    in a selected column rejects the file, naming the offending line (the
    header is line 1).
    """
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"input file not found: {path}")
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file (header row required)") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            raise SchemaError(f"{path}: duplicate column names in header")
        if response_column not in header:
            raise SchemaError(f"{path}: response column {response_column!r} not in header {header}")
        if feature_columns is None:
            feature_columns = [h for h in header if h != response_column]
        missing = [c for c in feature_columns if c not in header]
        if missing:
            raise SchemaError(f"{path}: feature columns not in header: {missing}")
        if response_column in feature_columns:
            raise SchemaError(f"{path}: response column {response_column!r} also listed as a feature")
        col_of = {name: header.index(name) for name in header}
        y_idx = col_of[response_column]
        f_idx = [col_of[c] for c in feature_columns]

        ys: list[int] = []
        rows: list[list[float]] = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(cell.strip() == "" for cell in row):
                continue
            if len(row) != len(header):
                raise ValidationError(
                    f"{path}: line {line_no} has {len(row)} fields, expected {len(header)}"
                )
            try:
                y_val = float(row[y_idx])
            except ValueError:
                raise ValidationError(
                    f"{path}: line {line_no}: non-numeric response {row[y_idx]!r}"
                ) from None
            if not np.isfinite(y_val) or y_val != int(y_val):
                raise ValidationError(
                    f"{path}: line {line_no}: response must be an integer count, got {row[y_idx]!r}"
                )
            if y_val < 0:
                raise ValidationError(f"{path}: line {line_no}: negative response {row[y_idx]!r}")
            feats = []
            for j, name in zip(f_idx, feature_columns):
                try:
                    val = float(row[j])
                except ValueError:
                    raise ValidationError(
                        f"{path}: line {line_no}: non-numeric value {row[j]!r} in column {name!r}"
                    ) from None
                if not np.isfinite(val):
                    raise ValidationError(f"{path}: line {line_no}: non-finite value in column {name!r}")
                feats.append(val)
            ys.append(int(y_val))
            rows.append(feats)
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    x = np.asarray(rows, dtype=np.float64)
    names = list(feature_columns)
    if intercept:
        x = np.column_stack([np.ones(x.shape[0]), x])
        names = ["(intercept)"] + names
    return Dataset(X=x, y=np.asarray(ys, dtype=np.int64), names=names)


def write_dataset_csv(path, x: np.ndarray, y: np.ndarray, names: list[str], response_name: str = "y") -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow([response_name] + list(names))
        for i in range(x.shape[0]):
            writer.writerow([fmt(int(y[i]))] + [fmt(v) for v in x[i]])


def write_json(path, payload: dict) -> None:
    text = json.dumps(payload, indent=2, ensure_ascii=False, allow_nan=False) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def load_schema() -> dict:
    return json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))


_CANONICAL_ORDER = (EstimatorKind.MLE, EstimatorKind.LTE, EstimatorKind.AULTE, EstimatorKind.MAULTE)


def ordered_kinds(kinds) -> list[EstimatorKind]:
    return [k for k in _CANONICAL_ORDER if k in set(kinds)]


def simulation_rows_to_csv(path, rows) -> None:
    """Wide table: one line per cell with MSE/spread/SB columns per estimator."""
    kinds = ordered_kinds(rows[0].config.estimators)
    header = ["rho", "n", "p", "n_reps", "seed", "status", "n_ok", "n_failed"]
    for kind in kinds:
        header += [f"mse_{kind.value}", f"se_{kind.value}", f"sb_{kind.value}"]
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            cfg = row.config
            cells = [fmt(cfg.rho), fmt(cfg.n), fmt(cfg.p), fmt(cfg.n_reps), fmt(cfg.seed), row.status]
            if row.status == "ok":
                res = row.result
                cells += [fmt(res.n_ok), fmt(res.n_failed)]
                for kind in kinds:
                    s = res.stats[kind]
                    cells += [fmt(s.sim_mse), fmt(s.mse_spread), fmt(s.sim_sb)]
            else:
                cells += ["", ""] + ["", "", ""] * len(kinds)
            writer.writerow(cells)


def simulation_rows_to_payload(rows, config_echo: dict) -> dict:
    """JSON document for a simulation run (no timestamps: byte-stable)."""
    kinds = ordered_kinds(rows[0].config.estimators)
    out_rows = []
    for row in rows:
        cfg = row.config
        entry = {
            "rho": cfg.rho,
            "n": cfg.n,
            "p": cfg.p,
            "n_reps": cfg.n_reps,
            "seed": int(cfg.seed),
            "status": row.status,
        }
        if row.status == "ok":
            res = row.result
            entry["n_ok"] = res.n_ok
            entry["n_failed"] = res.n_failed
            entry["estimators"] = {
                kind.value: {
                    "mse": res.stats[kind].sim_mse,
                    "se": res.stats[kind].mse_spread,
                    "sb": res.stats[kind].sim_sb,
                }
                for kind in kinds
            }
        else:
            entry["error"] = row.error
        out_rows.append(entry)
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": "bellshrink",
        "tool_version": __version__,
        "command": "simulate",
        "config": config_echo,
        "rows": out_rows,
    }
