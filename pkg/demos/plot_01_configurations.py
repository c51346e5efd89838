"""
Damping and coupling layouts
============================

A configuration is an interval of length L with three piecewise-constant
coefficients: a Kelvin-Voigt damping b acting on the first wave, a
damping d acting on the second, and a coupling c between them.  Each one
is a single value on an open interval.  Which results apply depends on how
the three intervals are ordered, so configurations carry a case label that
is checked on construction.
"""

from kvwave import CoefficientProfile, SystemConfig, check_ssc, reference_config, validate_config
from kvwave.errors import IntervalOrderViolation

# Three built-in layouts, one per case.
for case in ("C1", "C2", "C3"):
    cfg = reference_config(case)
    print(case, cfg.profile_b, cfg.profile_c, cfg.profile_d, sep="\n    ")

# %%
# Validation is strict: the intervals must appear in the order the case
# prescribes.  Moving the second damping in front of the coupling breaks C1.
b = CoefficientProfile(1.0, 0.1, 0.2)
c = CoefficientProfile(2.0, 0.4, 0.6)
try:
    validate_config(SystemConfig(1.0, 1.0, b, c, CoefficientProfile(1.0, 0.3, 0.35), "C1"))
except IntervalOrderViolation as exc:
    print("rejected:", exc)

# %%
# Strong stability in cases C1 and C3 needs the coupling to be small
# compared with the width of its support.  The report carries the bound,
# the actual |c0| and the margin between them.
for c0 in (2.5, 4.5, 7.5):
    cfg = reference_config("C1").with_profile("c", CoefficientProfile(c0, 0.4, 0.6))
    r = check_ssc(cfg)
    print(f"c0 = {c0}: threshold {r.threshold:g}, satisfied {r.satisfied}, margin {r.margin:+g}")

# C2 puts the coupling outside both damped regions and needs no condition.
print(check_ssc(reference_config("C2")))
