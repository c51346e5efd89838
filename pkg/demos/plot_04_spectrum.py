"""
Eigenvalues near the imaginary axis
===================================

Strong stability means no eigenvalue sits on the imaginary axis.  The
damped modes move left, but modes living away from the damping keep real
parts that are tiny rather than zero, which is why the decay is only
polynomial.  Eigenvalues are flagged as lying on the axis only above a
relative threshold.
"""

import numpy as np

from kvwave import assemble_generator, build_grid, eigenvalues, reference_config, undamped_config

for cfg in (reference_config("C1"), reference_config("C3"), undamped_config()):
    g = assemble_generator(cfg, build_grid(cfg, 120))
    rep = eigenvalues(g)
    close = rep.nearest_to_axis(3)
    print(f"{cfg.case_label.value} damped={not cfg.profile_b.is_zero}: "
          f"max Re = {rep.max_real_part:.2e}, strictly negative = {rep.strictly_negative}")
    print("   closest to the axis:", np.array2string(close, precision=3))
