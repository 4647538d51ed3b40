"""Reading and validating sweep CSVs and their meta.json sidecar.

The renderer never computes SNR values; everything plotted traces back to
a CSV cell or a meta.json field. Validation is therefore strict: a file
that does not carry the full sweep schema is rejected with a SchemaError
naming the offending column or row instead of being silently coerced.
"""

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

REQUIRED_COLUMNS = (
    "scenario",
    "strategy",
    "N",
    "mean_snr_linear",
    "mean_snr_db",
    "stderr_linear",
    "n_trials",
    "seed",
    "walltime_s",
)


class SchemaError(ValueError):
    """The CSV (or a row in it) does not match the sweep schema."""


@dataclass(frozen=True)
class SweepPoint:
    scenario: str
    strategy: str
    n: int
    mean_snr_linear: float
    mean_snr_db: float
    stderr_linear: float
    n_trials: int
    seed: int
    walltime_s: float

    @property
    def is_valid(self):
        """Rows from failed runs carry NaN means; they render as gaps."""
        return math.isfinite(self.mean_snr_linear)


def _parse_row(row, index, name):
    missing = [c for c in REQUIRED_COLUMNS if row.get(c) in (None, "")]
    if missing:
        raise SchemaError(
            f"{name}: row {index} is truncated, no value for "
            + ", ".join(missing)
        )
    try:
        return SweepPoint(
            scenario=row["scenario"],
            strategy=row["strategy"],
            n=int(row["N"]),
            mean_snr_linear=float(row["mean_snr_linear"]),
            mean_snr_db=float(row["mean_snr_db"]),
            stderr_linear=float(row["stderr_linear"]),
            n_trials=int(row["n_trials"]),
            seed=int(row["seed"]),
            walltime_s=float(row["walltime_s"]),
        )
    except ValueError as err:
        raise SchemaError(f"{name}: row {index}: {err}") from None


def read_sweep(path):
    """Parse one sweep CSV into a list of SweepPoint, schema-checked."""
    path = Path(path)
    name = path.name
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{name}: empty file, no header")
        missing = [c for c in REQUIRED_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise SchemaError(
                f"{name}: missing required columns: " + ", ".join(missing)
            )
        points = [_parse_row(row, i, name) for i, row in enumerate(reader, start=2)]
    if not points:
        raise SchemaError(f"{name}: no data rows")
    return points


def load_meta(csv_dir):
    """Load meta.json if present; scenarios without one get no reference lines."""
    path = Path(csv_dir) / "meta.json"
    if not path.exists():
        return {}
    return json.loads(path.read_text(encoding="utf-8"))


def reference_lines_for(meta, scenario):
    """Asymptote values recorded for a scenario, keyed by limit name.

    meta.json also records estimation diagnostics next to the limits
    (sample counts, the trace-overlap estimate); only *_limit entries are
    drawable y-values.
    """
    entry = meta.get(scenario, {})
    lines = entry.get("reference_lines", {})
    return {k: float(v) for k, v in lines.items() if k.endswith("_limit")}
