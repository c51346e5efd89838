"""Numerical checks for locally coupled wave equations with local Kelvin-Voigt damping.

Submodules:

* :mod:`kvwave.model` -- coefficient profiles, case geometries, smallness conditions
* :mod:`kvwave.discretize` -- structure-preserving generator and energy matrices
* :mod:`kvwave.evolve` -- Crank-Nicolson time stepping and decay fits
* :mod:`kvwave.spectra` -- eigenvalues, weighted resolvent norms, growth exponents
* :mod:`kvwave.cli` -- the command-line front end (``python -m kvwave``)
"""

from .discretize import (
    DiscreteGenerator,
    Grid,
    StateVector,
    apply_generator,
    assemble_generator,
    build_grid,
    dissipation_rate,
    domain_norm_sq,
    energy,
    energy_norm,
)
from .evolve import (
    CrankNicolson,
    DecayFit,
    EnergyTrace,
    cn_step,
    fit_decay_exponent,
    make_initial_data,
    simulate,
)
from .model import (
    Case,
    CoefficientProfile,
    SscReport,
    SystemConfig,
    check_ssc,
    eval_coefficient,
    reference_config,
    undamped_config,
    validate_config,
)
from .spectra import (
    ResolventProfile,
    SpectrumReport,
    eigenvalues,
    fit_resolvent_exponent,
    resolution_limit,
    resolvent_norm,
    resolvent_sweep,
)

__version__ = "0.1.0"
