"""Command-line front end: ``python -m kvwave simulate|spectrum|resolvent|sweep``.

Experiments are described by an INI file::

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

    [damping_d]          ; omit for case C3
    value = 1
    left = 0.7
    right = 0.9

plus optional ``[numerics]``, ``[resolvent]``, ``[initial]``, ``[output]``
and ``[sweep]`` sections (see ``SCHEMA``).  Unknown sections or keys are
errors.  Every command prints a line starting with ``verdict:`` and exits
with 0 (success), 1 (a stability check failed) or 2 (usage or computation
error).
"""

from __future__ import annotations

import argparse
import configparser
import math
import re
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import io
from .discretize import assemble_generator, build_grid
from .errors import (
    KVWaveError,
    NumericallySingular,
    ParseError,
    SscInapplicable,
    ValidationError,
)
from .evolve import default_dt, fit_decay_exponent, make_initial_data, simulate
from .model import (
    Case,
    CoefficientProfile,
    SystemConfig,
    check_ssc,
    validate_config,
)
from .spectra import (
    eigenvalues,
    resolution_limit,
    resolvent_norm,
    resolvent_sweep,
)

__all__ = [
    "ExperimentConfig",
    "CommandResult",
    "parse_config",
    "cmd_simulate",
    "cmd_spectrum",
    "cmd_resolvent",
    "cmd_sweep",
    "main",
]

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2

_PROFILE_KEYS = {"value": float, "left": float, "right": float}


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(",", " ").split())


SCHEMA = {
    "system": {"length": float, "wave_speed_sq": float, "case": str, "allow_degenerate": _bool},
    "damping_b": _PROFILE_KEYS,
    "coupling_c": _PROFILE_KEYS,
    "damping_d": _PROFILE_KEYS,
    "numerics": {"n": int, "dt": float, "T": float, "sample_every": int,
                 "window_fraction": float},
    "resolvent": {"lambda_lo": float, "lambda_hi": float, "points": int,
                  "refine_peaks": _bool},
    "initial": {"kind": str, "k_u": int, "k_y": int, "center": float, "width": float,
                "block": str, "path": str},
    "output": {"directory": str},
    "sweep": {"parameter": str, "values": _floats, "measure": str},
}
_REQUIRED = {"system": ("length", "wave_speed_sq", "case")}
_SWEEP_PARAMETERS = ("c0", "b0", "d0", "n")
_SWEEP_MEASURES = ("none", "decay", "resolvent")

#: Upper tolerances on the fitted resolvent exponent, by case.
ELL_BOUNDS = {Case.C1: 0.8, Case.C3: 2.4}
ELL_THEORY = {Case.C1: 0.5, Case.C3: 2.0}
ALPHA_THEORY = {Case.C1: 4.0, Case.C3: 1.0}


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemConfig
    n: int = 200
    dt: float | None = None
    T: float = 100.0
    sample_every: int = 10
    window_fraction: float = 0.5
    lambda_lo: float = 2.0
    lambda_hi: float | None = None
    points: int = 40
    refine_peaks: bool = True
    initial_kind: str = "gaussian"
    initial_params: dict = field(default_factory=dict)
    output: Path = Path(".")
    sweep_parameter: str | None = None
    sweep_values: tuple = ()
    sweep_measure: str = "none"


@dataclass
class CommandResult:
    code: int
    verdict: str
    files: dict
    data: dict = field(default_factory=dict)


def _line_of(text: str, section: str, key: str | None = None) -> int | None:
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"^\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return lineno
            continue
        if current == section and key is not None:
            m = re.match(r"^([^=:]+?)\s*[=:]", line)
            if m and m.group(1).strip().lower() == key.lower():
                return lineno
    return None


def parse_config(text: str, base_dir=None) -> ExperimentConfig:
    """Parse and validate an INI experiment description."""
    cp = configparser.ConfigParser(
        strict=True, interpolation=None, inline_comment_prefixes=("#", ";"),
        default_section="\0defaults",
    )
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.DuplicateOptionError as exc:
        raise ParseError(f"duplicate key {exc.option!r} in [{exc.section}]", exc.lineno) from exc
    except configparser.DuplicateSectionError as exc:
        raise ParseError(f"duplicate section [{exc.section}]", exc.lineno) from exc
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError("key outside of any section", exc.lineno) from exc
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ParseError("malformed line", lineno) from exc

    raw: dict = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ParseError(f"unknown section [{section}]", _line_of(text, section))
        raw[section] = {}
        for key, value in cp.items(section):
            conv = SCHEMA[section].get(key)
            lineno = _line_of(text, section, key)
            if conv is None:
                raise ParseError(f"unknown key {key!r} in [{section}]", lineno)
            try:
                raw[section][key] = conv(value)
            except ValueError as exc:
                raise ParseError(f"bad value for {key!r} in [{section}]: {exc}", lineno) from exc
    for section, keys in _REQUIRED.items():
        for key in keys:
            if key not in raw.get(section, {}):
                raise ParseError(f"missing required key {key!r} in [{section}]")

    def profile(section):
        vals = raw.get(section)
        if vals is None:
            return CoefficientProfile.zero()
        missing = set(_PROFILE_KEYS) - set(vals)
        if missing:
            raise ParseError(f"[{section}] lacks {sorted(missing)}", _line_of(text, section))
        return CoefficientProfile(vals["value"], vals["left"], vals["right"])

    sysv = raw["system"]
    try:
        case = Case(sysv["case"].strip().upper())
    except ValueError as exc:
        raise ParseError(f"unknown case {sysv['case']!r}", _line_of(text, "system", "case")) from exc
    system = SystemConfig(
        length=sysv["length"],
        wave_speed_sq=sysv["wave_speed_sq"],
        profile_b=profile("damping_b"),
        profile_c=profile("coupling_c"),
        profile_d=profile("damping_d"),
        case_label=case,
        allow_degenerate=sysv.get("allow_degenerate", False),
    )
    try:
        validate_config(system)
    except KVWaveError as exc:
        raise ValidationError(f"{type(exc).__name__}: {exc}") from exc

    base = Path(base_dir) if base_dir is not None else Path(".")
    num = raw.get("numerics", {})
    res = raw.get("resolvent", {})
    ini = dict(raw.get("initial", {}))
    out = raw.get("output", {})
    sw = raw.get("sweep", {})

    kind = ini.pop("kind", "gaussian")
    if kind not in ("sine_mode", "gaussian", "file"):
        raise ValidationError(f"unknown initial kind {kind!r}")
    if "path" in ini:
        ini["path"] = str(base / ini["path"])

    cfg = ExperimentConfig(
        system=system,
        n=num.get("n", 200),
        dt=num.get("dt"),
        T=num.get("T", 100.0),
        sample_every=num.get("sample_every", 10),
        window_fraction=num.get("window_fraction", 0.5),
        lambda_lo=res.get("lambda_lo", 2.0),
        lambda_hi=res.get("lambda_hi"),
        points=res.get("points", 40),
        refine_peaks=res.get("refine_peaks", True),
        initial_kind=kind,
        initial_params=ini,
        output=base / out.get("directory", "."),
        sweep_parameter=sw.get("parameter"),
        sweep_values=sw.get("values", ()),
        sweep_measure=sw.get("measure", "none"),
    )
    _check_numerics(cfg)
    return cfg


def _check_numerics(cfg: ExperimentConfig):
    positive = {"n": cfg.n, "T": cfg.T, "sample_every": cfg.sample_every,
                "lambda_lo": cfg.lambda_lo, "points": cfg.points}
    if cfg.dt is not None:
        positive["dt"] = cfg.dt
    if cfg.lambda_hi is not None:
        positive["lambda_hi"] = cfg.lambda_hi
    for key, val in positive.items():
        if not val > 0:
            raise ValidationError(f"{key} must be positive, got {val}")
    if cfg.n < 2:
        raise ValidationError(f"n must be at least 2, got {cfg.n}")
    if not 0 < cfg.window_fraction < 1:
        raise ValidationError(f"window_fraction must lie in (0, 1), got {cfg.window_fraction}")
    if cfg.lambda_hi is not None and not cfg.lambda_lo < cfg.lambda_hi:
        raise ValidationError("lambda_lo must be smaller than lambda_hi")
    if cfg.sweep_parameter is not None and cfg.sweep_parameter not in _SWEEP_PARAMETERS:
        raise ValidationError(
            f"sweep parameter must be one of {_SWEEP_PARAMETERS}, got {cfg.sweep_parameter!r}"
        )
    if cfg.sweep_measure not in _SWEEP_MEASURES:
        raise ValidationError(
            f"sweep measure must be one of {_SWEEP_MEASURES}, got {cfg.sweep_measure!r}"
        )


# ---------------------------------------------------------------------------
# commands


def _generator(cfg: ExperimentConfig):
    return assemble_generator(cfg.system, build_grid(cfg.system, cfg.n))


def _ssc_satisfied(system: SystemConfig):
    try:
        return check_ssc(system).satisfied
    except SscInapplicable:
        return None


def _theory(table, system: SystemConfig):
    """Theoretical exponent when its hypotheses hold, else ``None``."""
    if system.case_label in table and _ssc_satisfied(system):
        return table[system.case_label]
    return None


def _out_dir(cfg: ExperimentConfig, out_dir) -> Path:
    path = Path(out_dir) if out_dir is not None else cfg.output
    path.mkdir(parents=True, exist_ok=True)
    return path


def _run_decay(cfg: ExperimentConfig, g=None):
    g = g if g is not None else _generator(cfg)
    s0 = make_initial_data(g, cfg.initial_kind, **cfg.initial_params)
    dt = cfg.dt if cfg.dt is not None else default_dt(g)
    trace = simulate(g, s0, dt, cfg.T, cfg.sample_every)
    return g, trace, fit_decay_exponent(trace, cfg.window_fraction)


def _lambda_grid(cfg: ExperimentConfig, g) -> np.ndarray:
    hi = cfg.lambda_hi if cfg.lambda_hi is not None else resolution_limit(g)
    if not cfg.lambda_lo < hi:
        raise ValidationError(f"empty frequency range [{cfg.lambda_lo}, {hi}]")
    return np.geomspace(cfg.lambda_lo, hi, cfg.points)


def cmd_simulate(cfg: ExperimentConfig, out_dir=None) -> CommandResult:
    """Energy trace and tail decay fit; writes energy.csv and decay_fit.txt."""
    out = _out_dir(cfg, out_dir)
    g, trace, fit = _run_decay(cfg)
    alpha_th = _theory(ALPHA_THEORY, cfg.system)

    E0 = trace.E[0]
    monotone = bool(np.all(np.diff(trace.E) <= 1e-13 * E0))
    identity_ok = trace.max_identity_defect <= 1e-10
    sel = (trace.t >= fit.window[0]) & (trace.t <= fit.window[1])
    bound_ratio = math.nan
    if alpha_th is not None:
        bound_ratio = float(np.max(trace.E[sel] * trace.t[sel] ** alpha_th) / trace.domain_norm_sq)

    ok = monotone and identity_ok and (alpha_th is None or fit.alpha >= alpha_th)
    theory = "none" if alpha_th is None else io.fmt(alpha_th)
    verdict = (
        f"verdict: energy decay: {'PASS' if ok else 'FAIL'} "
        f"(alpha = {fit.alpha:.6g}, theory >= {theory}, "
        f"non-increasing = {monotone}, identity defect = {trace.max_identity_defect:.3g})"
    )
    energy_csv = io.write_energy_csv(trace, out / "energy.csv")
    lines = [
        ("alpha", fit.alpha),
        ("intercept", fit.intercept),
        ("residual", fit.residual),
        ("window_lo", fit.window[0]),
        ("window_hi", fit.window[1]),
        ("domain_norm_sq", fit.domain_norm_sq),
        ("alpha_theory", theory),
        ("bound_ratio_max", bound_ratio),
        ("max_identity_defect", trace.max_identity_defect),
    ]
    fit_txt = out / "decay_fit.txt"
    fit_txt.write_text("".join(f"{k} = {io.fmt(v)}\n" for k, v in lines), encoding="utf-8")
    return CommandResult(
        EXIT_OK if ok else EXIT_FAIL, verdict,
        {"energy": energy_csv, "decay_fit": fit_txt},
        {"trace": trace, "fit": fit, "bound_ratio": bound_ratio},
    )


def cmd_spectrum(cfg: ExperimentConfig, out_dir=None) -> CommandResult:
    """Eigenvalues of the generator; checks for spectrum on the imaginary axis."""
    out = _out_dir(cfg, out_dir)
    g = _generator(cfg)
    report = eigenvalues(g)
    finite = True
    for mu in report.nearest_to_axis(10):
        try:
            resolvent_norm(g, abs(mu.imag))
        except NumericallySingular:
            finite = False
            break
    ok = report.strictly_negative and finite
    verdict = (
        f"verdict: strong stability: {'PASS' if ok else 'FAIL'} "
        f"(max Re lambda = {report.max_real_part:.6g})"
    )
    path = io.write_spectrum_csv(report, out / "spectrum.csv")
    return CommandResult(
        EXIT_OK if ok else EXIT_FAIL, verdict, {"spectrum": path},
        {"report": report, "resolvent_finite": finite},
    )


def cmd_resolvent(cfg: ExperimentConfig, out_dir=None) -> CommandResult:
    """Resolvent norms along the imaginary axis and their growth exponent."""
    out = _out_dir(cfg, out_dir)
    g = _generator(cfg)
    profile = resolvent_sweep(g, _lambda_grid(cfg, g), refine_peaks=cfg.refine_peaks)
    path = io.write_resolvent_csv(profile, out / "resolvent.csv")

    resolved = profile.lambdas <= profile.resolution_limit
    finite = bool(np.all(np.isfinite(profile.norms[resolved])))
    bound = ELL_BOUNDS.get(cfg.system.case_label) if _theory(ELL_THEORY, cfg.system) else None
    ell = profile.fitted_ell
    ok = finite and (bound is None or (math.isfinite(ell) and ell <= bound))
    fit_line = f"ell_est = {ell:.6g} (theory: 0.5 for C1, 2 for C3)"
    verdict = (
        f"verdict: resolvent growth: {'PASS' if ok else 'FAIL'} "
        f"(ell_est = {ell:.6g}, bound = {'none' if bound is None else bound}, "
        f"finite on resolved range = {finite})"
    )
    return CommandResult(
        EXIT_OK if ok else EXIT_FAIL, verdict, {"resolvent": path},
        {"profile": profile, "fit_line": fit_line},
    )


def _swept_config(cfg: ExperimentConfig, parameter: str, value: float) -> ExperimentConfig:
    system = cfg.system
    if parameter == "n":
        return replace(cfg, n=int(value))
    name = {"c0": "c", "b0": "b", "d0": "d"}[parameter]
    p = getattr(system, f"profile_{name}")
    system = system.with_profile(name, replace(p, value=float(value)))
    try:
        validate_config(system)
    except KVWaveError as exc:
        raise ValidationError(f"{parameter} = {value}: {type(exc).__name__}: {exc}") from exc
    return replace(cfg, system=system)


def cmd_sweep(cfg: ExperimentConfig, parameter: str | None = None, values=None,
              out_dir=None) -> CommandResult:
    """One row per parameter value: value, fitted exponent, smallness-condition flag."""
    parameter = parameter or cfg.sweep_parameter
    values = tuple(values) if values is not None else tuple(cfg.sweep_values)
    if parameter not in _SWEEP_PARAMETERS:
        raise ValidationError(f"sweep parameter must be one of {_SWEEP_PARAMETERS}")
    if not values:
        raise ValidationError("sweep needs at least one value")
    out = _out_dir(cfg, out_dir)
    metric = {"none": "metric", "decay": "alpha", "resolvent": "ell"}[cfg.sweep_measure]

    rows = []
    for value in values:
        sub = _swept_config(cfg, parameter, value)
        ssc = _ssc_satisfied(sub.system)
        if cfg.sweep_measure == "decay":
            m = _run_decay(sub)[2].alpha
        elif cfg.sweep_measure == "resolvent":
            g = _generator(sub)
            m = resolvent_sweep(g, _lambda_grid(sub, g), refine_peaks=sub.refine_peaks).fitted_ell
        else:
            m = math.nan
        rows.append((value if parameter != "n" else int(value), m,
                     "NA" if ssc is None else ssc))
    path = io.write_rows(out / "sweep.csv", ("value", metric, "ssc_satisfied"), rows)
    verdict = f"verdict: sweep: PASS ({len(rows)} values of {parameter})"
    return CommandResult(EXIT_OK, verdict, {"sweep": path}, {"rows": rows})


_COMMANDS = {
    "simulate": cmd_simulate,
    "spectrum": cmd_spectrum,
    "resolvent": cmd_resolvent,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="kvwave",
        description="Stability experiments for coupled waves with local Kelvin-Voigt damping.",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="INI experiment file")
    parser.add_argument("--out", default=None, help="output directory (overrides [output])")
    parser.add_argument("--quiet", action="store_true", help="print only the verdict line")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK

    try:
        path = Path(args.config)
        cfg = parse_config(path.read_text(encoding="utf-8"), base_dir=path.parent)
        result = _COMMANDS[args.command](cfg, out_dir=args.out)
    except (KVWaveError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR

    if not args.quiet:
        for name, file in result.files.items():
            print(f"wrote {name}: {file}")
        if "fit_line" in result.data:
            print(result.data["fit_line"])
    print(result.verdict)
    return result.code


if __name__ == "__main__":
    sys.exit(main())
