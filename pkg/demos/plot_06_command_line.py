"""
Running experiments from a config file
======================================

The ``kvwave`` command reads an INI description and writes CSV files plus
a ``verdict:`` line; the same entry point is callable from Python.
"""

import tempfile
from pathlib import Path

from kvwave.cli import main

CONFIG = """\
[system]
length = 1
wave_speed_sq = 1
case = C1

[damping_b]
value = 1
left = 0.1
right = 0.2

[coupling_c]
value = 2
left = 0.4
right = 0.6

[damping_d]
value = 1
left = 0.7
right = 0.9

[numerics]
n = 80

[sweep]
parameter = c0
values = 2.5 4.5 7.5
"""

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "c1.ini"
    path.write_text(CONFIG)
    for command in ("spectrum", "sweep"):
        code = main([command, "--config", str(path), "--out", tmp])
        print("exit code", code)
    print((Path(tmp) / "sweep.csv").read_text())
