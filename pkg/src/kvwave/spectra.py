"""Spectrum and resolvent of the discrete generator along the imaginary axis.

All operator norms are taken in the energy norm ``||x||_M = sqrt(x^H M x)``.
With the Cholesky factorization ``M = L L^T`` the weighted resolvent norm is
the plain 2-norm of ``L^T (i lam - A)^{-1} L^{-T}``, i.e. the reciprocal of the
smallest singular value of ``W(lam) = i lam I - L^T A L^{-T}``.

Two evaluation routes are provided: a dense SVD of ``W(lam)`` for small
grids and, for large ones, Lanczos on the normal operator of the resolvent
applied through a sparse LU of ``i lam I - A``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .discretize import DiscreteGenerator
from .errors import (
    BadParameters,
    EmptyGrid,
    InsufficientSpan,
    NumericallySingular,
    TooLargeForDense,
)
from .model import Case

__all__ = [
    "DENSE_THRESHOLD",
    "SpectrumReport",
    "ResolventProfile",
    "eigenvalues",
    "axis_flags",
    "resolution_limit",
    "resolvent_norm",
    "resolvent_sweep",
    "fit_resolvent_exponent",
    "resonance_frequencies",
    "weighted_resolvent_norm",
]

#: Largest ``n`` (interior nodes) handled by dense linear algebra by default.
DENSE_THRESHOLD = 400
#: An eigenvalue is "on the axis" if Re > AXIS_TOL * max(1, |Im|).
AXIS_TOL = 1e-8
#: sigma_min / sigma_max below this many machine epsilons counts as singular.
SINGULAR_EPS_FACTOR = 20.0
#: Dense eigensolves for locating resonances are cheap well beyond DENSE_THRESHOLD.
RESONANCE_DENSE_THRESHOLD = 1000
#: Fraction of the grid Nyquist frequency regarded as resolved.
RESOLUTION_FRACTION = 0.3


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    max_real_part: float
    min_abs_real_part: float
    n: int
    case_label: Case

    @property
    def on_axis(self) -> np.ndarray:
        return axis_flags(self.eigenvalues)

    @property
    def strictly_negative(self) -> bool:
        """True when every eigenvalue has a negative real part and none is flagged."""
        return bool(self.max_real_part < 0 and not self.on_axis.any())

    def nearest_to_axis(self, k: int = 10) -> np.ndarray:
        idx = np.argsort(np.abs(self.eigenvalues.real), kind="stable")[:k]
        return self.eigenvalues[idx]


@dataclass(frozen=True)
class ResolventProfile:
    lambdas: np.ndarray
    norms: np.ndarray
    flags: tuple
    fitted_ell: float
    fit_window: tuple
    resolution_limit: float

    @property
    def points(self):
        return list(zip(self.lambdas.tolist(), self.norms.tolist()))

    @property
    def finite(self) -> np.ndarray:
        return np.isfinite(self.norms)

    def envelope(self) -> np.ndarray:
        """Running maximum of the finite norms (``nan`` before the first one)."""
        vals = np.where(self.finite, self.norms, -np.inf)
        env = np.maximum.accumulate(vals)
        return np.where(np.isfinite(env), env, np.nan)


def axis_flags(ev: np.ndarray) -> np.ndarray:
    ev = np.asarray(ev)
    return ev.real > AXIS_TOL * np.maximum(1.0, np.abs(ev.imag))


def resolution_limit(g: DiscreteGenerator) -> float:
    return RESOLUTION_FRACTION * math.sqrt(g.cfg.wave_speed_sq) / g.h


def eigenvalues(g: DiscreteGenerator, dense_threshold: int = DENSE_THRESHOLD) -> SpectrumReport:
    """All ``4n`` eigenvalues of ``A`` by a dense nonsymmetric eigensolve."""
    if g.n > dense_threshold:
        raise TooLargeForDense(
            f"n = {g.n} exceeds the dense threshold {dense_threshold}; "
            "use resolvent_sweep instead"
        )
    ev = sla.eigvals(g.A_dense, check_finite=False)
    order = np.lexsort((ev.real, ev.imag))
    ev = ev[order]
    return SpectrumReport(
        eigenvalues=ev,
        max_real_part=float(ev.real.max()),
        min_abs_real_part=float(np.abs(ev.real).min()),
        n=g.n,
        case_label=g.cfg.case_label,
    )


# ---------------------------------------------------------------------------
# weighted factors of M, cached per generator (generators hash by identity)


class _Weighting:
    """Sparse Cholesky factor ``L`` of the block-diagonal ``M``."""

    def __init__(self, g: DiscreteGenerator):
        n, h = g.n, g.h
        # D^T D = tridiag(-1, 2, -1) / h^2; banded Cholesky in upper form.
        ab = np.zeros((2, n))
        ab[0, 1:] = -1.0 / h**2
        ab[1, :] = 2.0 / h**2
        cu = sla.cholesky_banded(ab, lower=False)  # DtD = U^T U
        U = sp.diags([cu[1], cu[0, 1:]], [0, 1], shape=(n, n), format="csr")
        R = U.T.tocsr()
        a = g.cfg.wave_speed_sq
        sqh = math.sqrt(h)
        eye = sp.identity(n, format="csr")
        self.L = sp.block_diag(
            [math.sqrt(a * h) * R, sqh * eye, sqh * R, sqh * eye], format="csr"
        )
        self.LT = self.L.T.tocsr()
        self._L_lu = spla.splu(self.L.tocsc())
        self._LT_lu = spla.splu(self.LT.tocsc())

    @staticmethod
    def _solve(lu, x):
        if x.dtype.kind == "c":
            return lu.solve(np.ascontiguousarray(x.real)) + 1j * lu.solve(
                np.ascontiguousarray(x.imag)
            )
        return lu.solve(x)

    def solve_L(self, x):
        return self._solve(self._L_lu, x)

    def solve_LT(self, x):
        return self._solve(self._LT_lu, x)


@lru_cache(maxsize=4)
def _weighting(g: DiscreteGenerator) -> _Weighting:
    return _Weighting(g)


@lru_cache(maxsize=2)
def _weighted_dense(g: DiscreteGenerator) -> np.ndarray:
    """Dense ``L^T A L^{-T}``."""
    L = _weighting(g).L.toarray()
    At = L.T @ g.A_dense
    # X L^T = At  <=>  L X^T = At^T
    return sla.solve_triangular(L, At.T, lower=True).T


@lru_cache(maxsize=4)
def _weighted_generator_norm(g: DiscreteGenerator) -> float:
    """``||A||`` in the energy norm, by Lanczos on the weighted normal operator."""
    w = _weighting(g)
    A, AT = g.A.tocsr(), g.A.T.tocsr()

    def matvec(x):
        y = w.LT @ (A @ w.solve_LT(x))
        return w.solve_L(AT @ (w.L @ y))

    N = spla.LinearOperator((4 * g.n, 4 * g.n), matvec=matvec, dtype=float)
    mu = spla.eigsh(N, k=1, which="LM", v0=np.ones(4 * g.n), tol=1e-6,
                    return_eigenvectors=False)[0]
    return math.sqrt(abs(mu))


def _is_singular(sigma_min: float, sigma_max: float) -> bool:
    return not sigma_min > SINGULAR_EPS_FACTOR * np.finfo(float).eps * sigma_max


def _norm_from_weighted(Aw: np.ndarray, lam: float) -> float:
    W = -Aw.astype(complex)
    W[np.diag_indices_from(W)] += 1j * lam
    s = sla.svdvals(W, check_finite=False)
    if _is_singular(s[-1], s[0]):
        raise NumericallySingular(
            f"i*{lam} is numerically an eigenvalue "
            f"(sigma_min/sigma_max = {s[-1] / s[0]:.2e})"
        )
    return float(1.0 / s[-1])


def weighted_resolvent_norm(A, M, lam: float) -> float:
    """``||(i lam I - A)^{-1}||`` in the norm induced by an SPD matrix ``M`` (dense)."""
    A = np.asarray(A.toarray() if sp.issparse(A) else A, dtype=float)
    M = np.asarray(M.toarray() if sp.issparse(M) else M, dtype=float)
    L = sla.cholesky(M, lower=True)
    Aw = sla.solve_triangular(L, (L.T @ A).T, lower=True).T
    return _norm_from_weighted(Aw, float(lam))


def _dense_norm(g: DiscreteGenerator, lam: float) -> float:
    return _norm_from_weighted(_weighted_dense(g), lam)


def _iterative_norm(g: DiscreteGenerator, lam: float, tol: float = 1e-10) -> float:
    w = _weighting(g)
    B = (1j * lam * sp.identity(4 * g.n, format="csc") - g.A).tocsc()
    try:
        lu = spla.splu(B)
    except RuntimeError as exc:
        raise NumericallySingular(f"factorization of i*{lam} - A failed: {exc}") from exc

    def matvec(x):
        y = w.LT @ lu.solve(w.solve_LT(x.astype(complex)))  # W^{-1} x
        return w.solve_L(lu.solve(w.L @ y, trans="H"))  # W^{-H} W^{-1} x

    N = spla.LinearOperator((4 * g.n, 4 * g.n), matvec=matvec, dtype=complex)
    v0 = np.ones(4 * g.n, dtype=complex)
    mu = spla.eigsh(N, k=1, which="LM", v0=v0, tol=tol, return_eigenvectors=False)[0]
    norm = math.sqrt(abs(mu))
    if not math.isfinite(norm) or _is_singular(1.0 / norm, lam + _weighted_generator_norm(g)):
        raise NumericallySingular(f"i*{lam} is numerically an eigenvalue (norm {norm:.3e})")
    return norm


def resolvent_norm(g: DiscreteGenerator, lam: float, method: str = "auto",
                   dense_threshold: int = DENSE_THRESHOLD) -> float:
    """``||(i lam I - A)^{-1}||`` in the energy norm.

    ``method`` is ``"dense"`` (SVD), ``"iterative"`` (sparse LU + Lanczos) or
    ``"auto"`` (dense for ``n <= dense_threshold``).
    """
    lam = float(lam)
    if method == "auto":
        method = "dense" if g.n <= dense_threshold else "iterative"
    if method == "dense":
        return _dense_norm(g, lam)
    if method == "iterative":
        return _iterative_norm(g, lam)
    raise BadParameters(f"unknown method {method!r}")


def resonance_frequencies(g: DiscreteGenerator, lo: float, hi: float,
                          dense_threshold: int = RESONANCE_DENSE_THRESHOLD) -> np.ndarray:
    """Imaginary parts in ``[lo, hi]`` of the eigenvalues of ``A``, ascending.

    These are the frequencies at which the resolvent norm peaks.  Uses a
    dense eigensolve up to ``dense_threshold`` interior nodes and a sequence
    of shift-invert Arnoldi solves along the band beyond that (much slower).
    """
    if g.n <= dense_threshold:
        ev = sla.eigvals(g.A_dense, check_finite=False)
    else:
        ev = _band_eigenvalues(g, lo, hi)
    im = np.sort(ev.imag[(ev.imag >= lo) & (ev.imag <= hi)])
    if im.size == 0:
        return im
    keep = np.concatenate([[True], np.diff(im) > 1e-9 * np.maximum(1.0, im[1:])])
    return im[keep]


def _band_eigenvalues(g: DiscreteGenerator, lo: float, hi: float, k: int = 12) -> np.ndarray:
    A = g.A.astype(complex).tocsc()
    found = []
    center = lo
    # Each solve returns the k eigenvalues nearest i*center; the next center
    # is the median of those found above it so consecutive windows overlap.
    while center <= hi:
        try:
            ev = spla.eigs(A, k=k, sigma=1j * center, which="LM",
                           return_eigenvectors=False, tol=1e-12)
        except spla.ArpackNoConvergence as exc:
            ev = np.asarray(exc.eigenvalues)
        found.append(ev)
        above = np.sort(ev.imag[ev.imag > center])
        if above.size < 2:
            center += max(1.0, 0.05 * center)
        else:
            center = max(above[above.size // 2], center + 1e-3)
    return np.concatenate(found)


def resolvent_sweep(g: DiscreteGenerator, lambdas, refine_peaks: bool = False,
                    fit_window: tuple | None = None, method: str = "auto",
                    dense_threshold: int = DENSE_THRESHOLD) -> ResolventProfile:
    """Resolvent norms over an increasing list of positive frequencies.

    Frequencies where the shifted operator is numerically singular are kept
    with norm ``inf`` and flag ``"singular"``.  With ``refine_peaks`` the grid
    is augmented by the resonance frequencies (imaginary parts of the
    eigenvalues) inside the resolved part of the sweep range, so that the
    running-max envelope sees the peak heights and not just their shoulders.
    """
    lams = np.asarray(lambdas, dtype=float).ravel()
    if lams.size == 0:
        raise EmptyGrid("no frequencies given")
    if np.any(lams <= 0) or np.any(np.diff(lams) <= 0):
        raise BadParameters("frequencies must be positive and strictly increasing")
    limit = resolution_limit(g)
    if lams[-1] > limit:
        warnings.warn(
            f"frequencies above the resolution limit {limit:.4g} are not trustworthy",
            stacklevel=2,
        )

    kinds = {float(x): "grid" for x in lams}
    if refine_peaks:
        hi = min(lams[-1], limit)
        if hi > lams[0]:
            for x in resonance_frequencies(g, lams[0], hi):
                kinds.setdefault(float(x), "peak")
    grid = np.array(sorted(kinds))

    norms = np.empty(grid.size)
    flags = []
    for i, lam in enumerate(grid):
        try:
            norms[i] = resolvent_norm(g, lam, method=method, dense_threshold=dense_threshold)
            flags.append(kinds[lam] if lam <= limit else "unresolved")
        except NumericallySingular:
            norms[i] = np.inf
            flags.append("singular")

    if fit_window is None:
        fit_window = (float(grid[0]), float(min(grid[-1], limit)))
    profile = ResolventProfile(grid, norms, tuple(flags), math.nan, tuple(fit_window), limit)
    try:
        ell = fit_resolvent_exponent(profile)
    except InsufficientSpan:
        ell = math.nan
    return ResolventProfile(grid, norms, tuple(flags), ell, tuple(fit_window), limit)


def fit_resolvent_exponent(p: ResolventProfile, min_points: int = 10,
                           min_decades: float = 1.0) -> float:
    """Growth exponent of the resolvent envelope.

    Least-squares slope of ``log(running max of norm)`` against ``log lam``
    over the finite points inside ``p.fit_window``.
    """
    lo, hi = p.fit_window
    sel = np.isfinite(p.norms) & (p.lambdas >= lo) & (p.lambdas <= hi) & (p.norms > 0)
    lam = p.lambdas[sel]
    if lam.size < min_points or math.log10(lam[-1] / lam[0]) < min_decades - 1e-12:
        raise InsufficientSpan(
            f"{lam.size} points spanning "
            f"{math.log10(lam[-1] / lam[0]) if lam.size > 1 else 0:.2f} decades in the fit window"
        )
    env = np.maximum.accumulate(p.norms[sel])
    slope, _ = np.polyfit(np.log(lam), np.log(env), 1)
    return float(slope)
