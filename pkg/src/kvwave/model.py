"""Problem instances for the locally damped, locally coupled wave pair.

The system on (0, L) with Dirichlet ends is::

    u_tt - (a u_x + b u_tx)_x + c y_t = 0
    y_tt - (y_x + d y_tx)_x - c u_t = 0

where ``b`` and ``d`` are Kelvin-Voigt damping coefficients and ``c`` is a
coupling coefficient, each the indicator of a single interval times an
amplitude.  Three geometries are supported:

* ``C1``: b-support, then c-support, then d-support, pairwise disjoint;
* ``C2``: b-support, then d-support, then c-support;
* ``C3``: b-support, then c-support, and no damping on the second wave.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    CaseMismatch,
    ConfigError,
    IntervalOrderViolation,
    NegativeDamping,
    OutOfDomain,
    SscInapplicable,
    ZeroCoupling,
)

__all__ = [
    "Case",
    "CoefficientProfile",
    "SystemConfig",
    "SscReport",
    "validate_config",
    "eval_coefficient",
    "check_ssc",
    "reference_config",
    "undamped_config",
]


class Case(str, enum.Enum):
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"


@dataclass(frozen=True)
class CoefficientProfile:
    """``value`` times the indicator of the open interval ``(left, right)``.

    A profile with ``value == 0`` is the zero profile; its interval is
    normalized to ``(0, 0)``.
    """

    value: float = 0.0
    left: float = 0.0
    right: float = 0.0

    def __post_init__(self):
        if self.value == 0.0:
            object.__setattr__(self, "value", 0.0)
            object.__setattr__(self, "left", 0.0)
            object.__setattr__(self, "right", 0.0)

    @classmethod
    def zero(cls) -> "CoefficientProfile":
        return cls()

    @property
    def is_zero(self) -> bool:
        return self.value == 0.0

    @property
    def width(self) -> float:
        return self.right - self.left


@dataclass(frozen=True)
class SystemConfig:
    length: float
    wave_speed_sq: float
    profile_b: CoefficientProfile
    profile_c: CoefficientProfile
    profile_d: CoefficientProfile = field(default_factory=CoefficientProfile)
    case_label: Case = Case.C1
    # Zero profiles are tolerated (e.g. the undamped reference problem).
    allow_degenerate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "case_label", Case(self.case_label))

    def with_profile(self, name: str, profile: CoefficientProfile) -> "SystemConfig":
        return replace(self, **{f"profile_{name}": profile})


@dataclass(frozen=True)
class SscReport:
    case_label: Case
    threshold: float
    actual: float
    satisfied: bool
    margin: float


def _check_profile_domain(name: str, p: CoefficientProfile, length: float):
    if p.is_zero:
        return
    if not (math.isfinite(p.value) and math.isfinite(p.left) and math.isfinite(p.right)):
        raise ConfigError(f"profile {name} has non-finite entries")
    if p.left < 0 or p.right > length:
        raise OutOfDomain(
            f"support of {name} ({p.left}, {p.right}) is not inside [0, {length}]"
        )
    if not p.left < p.right:
        raise IntervalOrderViolation(f"{name}1 < {name}2 fails: {p.left} >= {p.right}")


_CHAINS = {
    Case.C1: ("b", "c", "d"),
    Case.C2: ("b", "d", "c"),
    Case.C3: ("b", "c"),
}


def validate_config(cfg: SystemConfig) -> SystemConfig:
    """Return ``cfg`` unchanged if it satisfies the geometry of its case.

    Raises a :class:`~kvwave.errors.ConfigError` subclass naming the first
    violated condition otherwise.  Comparisons are strict and use no
    tolerance.
    """
    if not (cfg.length > 0 and math.isfinite(cfg.length)):
        raise ConfigError(f"length must be positive, got {cfg.length}")
    if not (cfg.wave_speed_sq > 0 and math.isfinite(cfg.wave_speed_sq)):
        raise ConfigError(f"wave_speed_sq must be positive, got {cfg.wave_speed_sq}")

    profiles = {"b": cfg.profile_b, "c": cfg.profile_c, "d": cfg.profile_d}
    for name in ("b", "d"):
        if profiles[name].value < 0:
            raise NegativeDamping(f"damping {name}0 = {profiles[name].value} < 0")
    for name, p in profiles.items():
        _check_profile_domain(name, p, cfg.length)

    case = cfg.case_label
    if case is Case.C3 and not cfg.profile_d.is_zero:
        raise CaseMismatch("case C3 requires the d profile to vanish identically")
    if not cfg.allow_degenerate:
        if cfg.profile_b.is_zero:
            raise NegativeDamping("b0 must be positive")
        if cfg.profile_c.is_zero:
            raise ZeroCoupling("c0 must be nonzero")
        if case is not Case.C3 and cfg.profile_d.is_zero:
            raise NegativeDamping(f"d0 must be positive in case {case.value}")

    # Walk 0 < p1 < p2 < q1 < q2 < ... < L over the nonzero profiles.
    prev_name, prev_val = "0", 0.0
    for name in _CHAINS[case]:
        p = profiles[name]
        if p.is_zero:
            continue
        for sym, val in ((f"{name}1", p.left), (f"{name}2", p.right)):
            if not prev_val < val:
                raise IntervalOrderViolation(
                    f"{prev_name} < {sym} fails in case {case.value}: {prev_val} >= {val}"
                )
            prev_name, prev_val = sym, val
    if not prev_val < cfg.length:
        raise IntervalOrderViolation(
            f"{prev_name} < L fails in case {case.value}: {prev_val} >= {cfg.length}"
        )
    return cfg


def eval_coefficient(p: CoefficientProfile, x, length: float | None = None):
    """Evaluate the profile at ``x`` (scalar or array).

    The support is open, so both endpoints evaluate to zero.  When ``length``
    is given, points outside ``[0, length]`` raise :class:`OutOfDomain`.
    """
    xa = np.asarray(x, dtype=float)
    if length is not None and (np.any(xa < 0) or np.any(xa > length)):
        raise OutOfDomain(f"x outside [0, {length}]")
    out = np.where((xa > p.left) & (xa < p.right), p.value, 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def check_ssc(cfg: SystemConfig) -> SscReport:
    """Evaluate the smallness condition on ``|c0|`` for strong stability."""
    c = cfg.profile_c
    actual = abs(c.value)
    case = cfg.case_label
    if case is Case.C2:
        threshold = math.inf
    else:
        if case is Case.C3 and cfg.wave_speed_sq != 1.0:
            raise SscInapplicable(
                f"the C3 condition assumes a = 1, got a = {cfg.wave_speed_sq}"
            )
        width = c.width
        if width <= 0:
            threshold = math.inf
        elif case is Case.C1:
            threshold = min(math.sqrt(cfg.wave_speed_sq), 1.0) / width
        else:
            threshold = 1.0 / width
    return SscReport(
        case_label=case,
        threshold=threshold,
        actual=actual,
        satisfied=actual < threshold,
        margin=threshold - actual,
    )


def reference_config(case: str | Case) -> SystemConfig:
    """The three reference instances on the unit interval with ``a = 1``."""
    case = Case(case)
    b = CoefficientProfile(1.0, 0.1, 0.2)
    if case is Case.C1:
        c = CoefficientProfile(2.0, 0.4, 0.6)
        d = CoefficientProfile(1.0, 0.7, 0.9)
    elif case is Case.C2:
        d = CoefficientProfile(1.0, 0.3, 0.4)
        c = CoefficientProfile(2.0, 0.6, 0.8)
    else:
        c = CoefficientProfile(2.0, 0.4, 0.6)
        d = CoefficientProfile.zero()
    return validate_config(SystemConfig(1.0, 1.0, b, c, d, case))


def undamped_config(length: float = 1.0, wave_speed_sq: float = 1.0) -> SystemConfig:
    """Two decoupled, undamped waves (every coefficient profile zero)."""
    z = CoefficientProfile.zero()
    return validate_config(
        SystemConfig(length, wave_speed_sq, z, z, z, Case.C1, allow_degenerate=True)
    )
