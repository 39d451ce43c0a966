"""Nystrom discretization of the LTV operator ``P_r`` and its spectrum.

The kernel follows the Weyl correspondence

    h_r(t, t') = (1/2pi) int p_r((t + t')/2, omega) exp(i omega (t - t')) domega

sampled at the midpoints of a uniform grid on ``[-extent, extent]`` and
scaled by ``dt``.  The eigenvalues of ``P_r^* P_r`` are the squared
singular values of that matrix.  Only symbols even in ``omega`` are
accepted, which keeps the kernel real and symmetric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError, NumericError, TruncationError
from .ltv import count_integral
from .quadrature import QuadratureConfig
from .spectral import SpectralChannel
from .symbols import DECAY_FLOOR, GaussianSymbol, WeylSymbolModel
from .tables import SweepTable

__all__ = [
    "DiscretizedOperator",
    "EigenSpectrum",
    "default_grid",
    "build_kernel",
    "eigen_spectrum",
    "eigen_count",
    "szego_convergence_study",
]

# Largest |p_r| allowed on the grid ends, relative to the symbol peak.
BOUNDARY_MASS = 1e-9
# Dense eigensolver cost grows as N^3; larger grids are refused.
MAX_POINTS = 8192


@dataclass(frozen=True)
class DiscretizedOperator:
    kernel_matrix: np.ndarray
    t_grid: np.ndarray
    spread: float

    @property
    def n_points(self) -> int:
        return self.t_grid.size

    @property
    def dt(self) -> float:
        return float(self.t_grid[1] - self.t_grid[0])


@dataclass(frozen=True)
class EigenSpectrum:
    """Eigenvalues of ``P_r^* P_r``, largest first."""

    eigenvalues: np.ndarray
    spread: float
    n_points: int
    dt: float

    def to_spectral_channel(self, noise_variance: float) -> SpectralChannel:
        """The discretized channel ``Y_k = X_k + Z_k`` as a vector channel."""
        return SpectralChannel(self.eigenvalues, noise_variance)

    def to_dict(self) -> dict:
        return {"eigenvalues": self.eigenvalues.tolist(), "spread": self.spread,
                "n_points": self.n_points, "dt": self.dt}


def default_grid(model: WeylSymbolModel) -> tuple[int, float]:
    """``(n_points, extent)`` resolving the symbol down to ``1e-12``.

    The extent is the spread time support; the spacing is the Nyquist step
    ``pi / (r W)`` for the spread omega support ``r W``, which keeps the
    midpoint rule free of aliasing for the kernel-times-eigenfunction
    products.  This gives ``N ~ 2 r^2 T W / pi`` points.
    """
    T0, W0 = model.symbol.support_box(DECAY_FLOOR ** 2)
    r = model.spread
    extent = r * T0
    dt = math.pi / (r * W0)
    n = max(16, int(math.ceil(2 * extent / dt)))
    return n, extent


def build_kernel(model: WeylSymbolModel, n_points: int | None = None,
                 extent: float | None = None) -> DiscretizedOperator:
    """Nystrom matrix ``K_ij = h_r(t_i, t_j) dt`` of ``P_r``.

    Raises
    ------
    InvalidInputError
        Symbol not even in omega (complex kernel), or ``n_points`` outside
        ``[16, MAX_POINTS]``.
    TruncationError
        ``|p_r|`` at ``t = +-extent`` exceeds ``1e-9`` of its peak.
    """
    sym = model.symbol
    if not sym.is_even_in_omega():
        raise InvalidInputError("symbol is not even in omega; its kernel would be complex")
    n_def, ext_def = default_grid(model)
    n = n_def if n_points is None else int(n_points)
    extent = ext_def if extent is None else float(extent)
    if not 16 <= n <= MAX_POINTS:
        raise InvalidInputError(f"n_points must lie in [16, {MAX_POINTS}], got {n}")
    if not extent > 0:
        raise InvalidInputError("extent must be positive")

    _, W = model.support_box(DECAY_FLOOR ** 2)
    w_scan = np.linspace(-W, W, 513)
    rim = max(np.abs(model.value(np.full_like(w_scan, s * extent), w_scan)).max()
              for s in (-1.0, 1.0))
    if rim > BOUNDARY_MASS * sym.peak:
        raise TruncationError(
            f"extent {extent:.6g} too small: boundary symbol mass {rim / sym.peak:.3g} of peak")

    dt = 2 * extent / n
    t = -extent + (np.arange(n) + 0.5) * dt
    r = model.spread
    if isinstance(sym, GaussianSymbol):
        tau = 0.5 * (t[:, None] + t[None, :])
        lag = t[:, None] - t[None, :]
        K = sym.kernel(tau, lag, r) * dt
    else:
        # On a uniform grid the midpoint depends on i + j and the lag on |i - j|.
        tau_vals = -extent + (np.arange(2 * n - 1) / 2 + 0.5) * dt
        lag_vals = np.arange(n) * dt
        table = sym.kernel(tau_vals, lag_vals, r)
        i = np.arange(n)
        K = table[i[:, None] + i[None, :], np.abs(i[:, None] - i[None, :])] * dt
    if not np.all(np.isfinite(K)):
        raise NumericError("non-finite kernel entries")
    return DiscretizedOperator(K, t, r)


def eigen_spectrum(op: DiscretizedOperator, top_k: int | None = None) -> EigenSpectrum:
    """Top ``top_k`` eigenvalues of ``K^T K``, clamped at 0 and sorted non-increasing."""
    K = op.kernel_matrix
    n = K.shape[0]
    top_k = n if top_k is None else int(top_k)
    if not 1 <= top_k <= n:
        raise InvalidInputError(f"top_k must lie in [1, {n}], got {top_k}")
    try:
        # K is symmetric, so its singular values are |eigenvalues|; squaring
        # afterwards keeps small eigenvalues accurate.
        mu = np.linalg.eigvalsh(0.5 * (K + K.T))
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed: {exc}") from exc
    lam = np.sort(mu * mu)[::-1][:top_k]
    return EigenSpectrum(np.maximum(lam, 0.0), op.spread, n, op.dt)


def eigen_count(spectrum: EigenSpectrum, snr: float) -> int:
    """``K(r, snr)``: number of eigenvalues strictly above ``1/snr``."""
    if not snr > 0:
        raise InvalidInputError("snr must be positive")
    return int(np.count_nonzero(spectrum.eigenvalues > 1.0 / snr))


def szego_convergence_study(model: WeylSymbolModel, snr: float, r_values,
                            quad: QuadratureConfig | None = None,
                            n_points=None, extent=None) -> SweepTable:
    """Eigenvalue count against the phase-space area over a range of spreads.

    For each ``r`` the operator is rebuilt on a grid scaled to the spread
    (or the given overrides, a scalar or one value per ``r``) and the row
    holds ``K``, the integral count ``K_check`` and ``|K - K_check| / r^2``.
    """
    r_values = np.asarray(r_values, dtype=float).ravel()
    if r_values.size == 0 or np.any(r_values < 1) or np.any(np.diff(r_values) <= 0):
        raise InvalidInputError("r_values must be non-empty, increasing and >= 1")

    def per_r(opt, i):
        if opt is None or np.isscalar(opt):
            return opt
        return list(opt)[i]

    table = SweepTable("r", ["r", "K", "K_check", "gap_normalized", "K_normalized",
                             "K_check_normalized", "n_points", "extent"])
    table.meta.update(snr=float(snr), symbol=model.symbol.to_dict())
    for i, r in enumerate(r_values):
        m = model.with_spread(r)
        op = build_kernel(m, per_r(n_points, i), per_r(extent, i))
        K = eigen_count(eigen_spectrum(op), snr)
        K_check = count_integral(m, snr, quad)
        table.append(r=float(r), K=K, K_check=K_check,
                     gap_normalized=abs(K - K_check) / r ** 2,
                     K_normalized=K / r ** 2, K_check_normalized=K_check / r ** 2,
                     n_points=op.n_points, extent=float(op.t_grid[-1] + 0.5 * op.dt))
    return table
