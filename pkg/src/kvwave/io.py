"""CSV writers for traces, spectra, resolvent profiles and sweeps.

Every file has a header row, uses ``.`` as decimal separator and writes
floats with 17 significant digits so values round-trip exactly.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

__all__ = [
    "fmt",
    "write_rows",
    "write_energy_csv",
    "write_spectrum_csv",
    "write_resolvent_csv",
    "read_csv",
]


def fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % (x + 0.0)  # folds -0.0 into 0


def write_rows(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def write_energy_csv(trace, path) -> Path:
    return write_rows(path, ("t", "E", "dE"), zip(trace.t, trace.E, trace.dE))


def write_spectrum_csv(report, path) -> Path:
    ev = report.eigenvalues
    return write_rows(path, ("re", "im"), zip(ev.real, ev.imag))


def write_resolvent_csv(profile, path) -> Path:
    return write_rows(
        path, ("lambda", "norm", "flag"), zip(profile.lambdas, profile.norms, profile.flags)
    )


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]
