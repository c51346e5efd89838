"""Flux-form finite differences for the damped, coupled wave generator.

The state ``(u, v, y, z)`` lives on the ``n`` interior nodes of a uniform
grid with Dirichlet ends.  Derivatives live on the ``n + 1`` midpoints via the
forward difference ``D``; every second-order term is written as
``-D^T diag(kappa_mid) D``, so discrete summation by parts holds exactly and
the energy balance of the continuous problem carries over to the matrices::

    M A + A^T M = -2 blockdiag(0, h D^T B D, 0, h D^T Dd D)

with ``M`` the energy (mass) matrix of the discrete energy norm.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, ResolutionTooCoarse
from .model import SystemConfig, eval_coefficient

__all__ = [
    "Grid",
    "StateVector",
    "DiscreteGenerator",
    "build_grid",
    "assemble_generator",
    "energy",
    "dissipation_rate",
    "apply_generator",
    "energy_norm",
    "domain_norm_sq",
]

#: Profiles whose support holds fewer midpoints than this raise a warning.
MIN_MIDPOINTS_PER_SUPPORT = 4


@dataclass(frozen=True, eq=False)
class Grid:
    length: float
    n: int
    h: float
    nodes: np.ndarray
    midpoints: np.ndarray
    under_resolved: tuple = ()


def build_grid(cfg: SystemConfig, n: int) -> Grid:
    """Uniform grid with ``n`` interior nodes on ``(0, cfg.length)``."""
    n = int(n)
    if n < 2:
        raise ValueError(f"need at least 2 interior nodes, got {n}")
    h = cfg.length / (n + 1)
    nodes = h * np.arange(1, n + 1)
    midpoints = h * (np.arange(n + 1) + 0.5)

    under = []
    for name in ("b", "c", "d"):
        p = getattr(cfg, f"profile_{name}")
        if p.is_zero:
            continue
        count = int(np.count_nonzero((midpoints > p.left) & (midpoints < p.right)))
        if count == 0:
            raise ResolutionTooCoarse(
                f"support ({p.left}, {p.right}) of {name} contains no midpoint at n={n}"
            )
        if count < MIN_MIDPOINTS_PER_SUPPORT:
            under.append(name)
    if under:
        warnings.warn(
            f"coefficient supports {under} hold fewer than "
            f"{MIN_MIDPOINTS_PER_SUPPORT} midpoints at n={n}",
            stacklevel=2,
        )
    return Grid(cfg.length, n, h, nodes, midpoints, tuple(under))


@dataclass(frozen=True)
class StateVector:
    """Nodal samples of ``(u, u_t, y, y_t)``; boundary zeros are implicit."""

    u: np.ndarray
    v: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        blocks = [np.asarray(b) for b in (self.u, self.v, self.y, self.z)]
        if len({b.shape for b in blocks}) != 1 or blocks[0].ndim != 1:
            raise DimensionMismatch("the four state blocks must be 1d of equal length")
        for name, b in zip("uvyz", blocks):
            object.__setattr__(self, name, b)

    @property
    def n(self) -> int:
        return self.u.size

    def to_flat(self) -> np.ndarray:
        return np.concatenate([self.u, self.v, self.y, self.z])

    @classmethod
    def from_flat(cls, s) -> "StateVector":
        s = np.asarray(s)
        if s.ndim != 1 or s.size % 4:
            raise DimensionMismatch(f"flat state of length {s.size} is not 4n")
        return cls(*np.split(s, 4))

    @classmethod
    def zeros(cls, n: int, dtype=float) -> "StateVector":
        return cls.from_flat(np.zeros(4 * n, dtype=dtype))


def _forward_difference(n: int, h: float) -> sp.csr_matrix:
    # (n+1) x n, (Dw)_{j+1/2} = (w_{j+1} - w_j)/h with w_0 = w_{n+1} = 0
    return sp.diags([np.full(n, 1.0 / h), np.full(n, -1.0 / h)], [0, -1],
                    shape=(n + 1, n), format="csr")


@dataclass(frozen=True, eq=False)
class DiscreteGenerator:
    """Assembled generator ``A`` and energy matrix ``M`` (both sparse, 4n x 4n).

    Instances hash by identity, so they can key factorization caches.
    """

    A: sp.csr_matrix
    M: sp.csr_matrix
    D: sp.csr_matrix
    grid: Grid
    cfg: SystemConfig
    b_mid: np.ndarray
    c_nodes: np.ndarray
    d_mid: np.ndarray

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def h(self) -> float:
        return self.grid.h

    @cached_property
    def A_dense(self) -> np.ndarray:
        return self.A.toarray()

    @cached_property
    def M_dense(self) -> np.ndarray:
        return self.M.toarray()

    def as_flat(self, s) -> np.ndarray:
        flat = s.to_flat() if isinstance(s, StateVector) else np.asarray(s)
        if flat.shape != (4 * self.n,):
            raise DimensionMismatch(
                f"state of shape {flat.shape} does not match 4n = {4 * self.n}"
            )
        return flat


def assemble_generator(cfg: SystemConfig, grid: Grid) -> DiscreteGenerator:
    n, h = grid.n, grid.h
    D = _forward_difference(n, h)
    Dt = D.T.tocsr()

    b_mid = eval_coefficient(cfg.profile_b, grid.midpoints)
    d_mid = eval_coefficient(cfg.profile_d, grid.midpoints)
    c_nodes = eval_coefficient(cfg.profile_c, grid.nodes)

    def flux(kappa):
        return -(Dt @ sp.diags(kappa) @ D)

    ones_mid = np.ones(n + 1)
    La = flux(cfg.wave_speed_sq * ones_mid)
    L1 = flux(ones_mid)
    Lb = flux(b_mid)
    Ld = flux(d_mid)
    C = sp.diags(c_nodes)
    I = sp.identity(n)

    A = sp.bmat(
        [
            [None, I, None, None],
            [La, Lb, None, -C],
            [None, None, None, I],
            [None, C, L1, Ld],
        ],
        format="csr",
    )
    A.eliminate_zeros()
    DtD = (Dt @ D).tocsr()
    M = sp.block_diag(
        [cfg.wave_speed_sq * h * DtD, h * I, h * DtD, h * I], format="csr"
    )
    return DiscreteGenerator(A, M, D, grid, cfg, b_mid, c_nodes, d_mid)


def energy_norm(g: DiscreteGenerator, s) -> float:
    """``||s||_M``, the discrete energy-space norm (twice the energy, rooted)."""
    flat = g.as_flat(s)
    return float(np.sqrt(max(np.vdot(flat, g.M @ flat).real, 0.0)))


def energy(g: DiscreteGenerator, s) -> float:
    """Discrete energy ``0.5 * s^H M s``, summed block by block."""
    flat = g.as_flat(s)
    u, v, y, z = np.split(flat, 4)
    h, D = g.h, g.D
    total = (
        h * np.sum(np.abs(v) ** 2)
        + g.cfg.wave_speed_sq * h * np.sum(np.abs(D @ u) ** 2)
        + h * np.sum(np.abs(z) ** 2)
        + h * np.sum(np.abs(D @ y) ** 2)
    )
    return 0.5 * float(total)


def dissipation_rate(g: DiscreteGenerator, s) -> float:
    """Energy loss rate ``-h sum b |Dv|^2 - h sum d |Dz|^2`` (never positive)."""
    flat = g.as_flat(s)
    _, v, _, z = np.split(flat, 4)
    h, D = g.h, g.D
    return 0.0 - h * float(  # 0.0 - keeps an undamped state's rate at +0.0
        np.sum(g.b_mid * np.abs(D @ v) ** 2) + np.sum(g.d_mid * np.abs(D @ z) ** 2)
    )


def apply_generator(g: DiscreteGenerator, s):
    """``A s``; returns the same kind (flat array or StateVector) as given."""
    out = g.A @ g.as_flat(s)
    if isinstance(s, StateVector):
        return StateVector.from_flat(out)
    return out


def domain_norm_sq(g: DiscreteGenerator, s) -> float:
    """Graph-norm surrogate ``||s||_M^2 + ||A s||_M^2``."""
    flat = g.as_flat(s)
    return energy_norm(g, flat) ** 2 + energy_norm(g, g.A @ flat) ** 2
