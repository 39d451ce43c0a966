"""Real Weyl symbols ``p(t, omega)`` of linear time-varying filters.

A :class:`WeylSymbolModel` bundles a symbol with the spreading factor ``r``
(``p_r(t, omega) = p(t/r, omega/r)``) and the two-sided noise PSD
``theta^2``.  Two symbol kinds are supported:

* :class:`GaussianSymbol` -- ``exp(-(t^2/gamma^2 + gamma^2 omega^2)/2)``,
  everything closed form.
* :class:`TabulatedSymbol` -- samples on a rectangular grid, bilinearly
  interpolated and zero outside the grid.

The level-set integrators only need vectorized *sections*: for a fixed
``t`` the map ``omega -> |p_r(t, omega)|^2``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import InvalidInputError

__all__ = [
    "GaussianSymbol",
    "TabulatedSymbol",
    "WeylSymbolModel",
    "NonFlatWarning",
    "check_non_flat",
    "symbol_from_dict",
    "load_symbol",
]

# Effective support threshold: the symbol is treated as zero below this.
DECAY_FLOOR = 1e-12


class NonFlatWarning(UserWarning):
    """|p|^2 appears to have a level set of positive area."""


class GaussianSymbol:
    """Bivariate Gaussian symbol with shear parameter ``gamma``."""

    kind = "gaussian"

    def __init__(self, gamma: float = 1.0):
        gamma = float(gamma)
        if not np.isfinite(gamma) or gamma <= 0:
            raise InvalidInputError(f"gamma must be positive, got {gamma}")
        self.gamma = gamma

    def __repr__(self):
        return f"GaussianSymbol(gamma={self.gamma!r})"

    @property
    def peak(self) -> float:
        return 1.0

    def value(self, t, omega):
        t = np.asarray(t, dtype=float)
        omega = np.asarray(omega, dtype=float)
        g = self.gamma
        return np.exp(-0.5 * ((t / g) ** 2 + (g * omega) ** 2))

    def section(self, t: float):
        """``omega -> |p(t, omega)|^2`` for fixed ``t``."""
        g = self.gamma
        a = math.exp(-((t / g) ** 2))
        g2 = g * g
        return lambda omega: a * np.exp(-g2 * np.square(omega))

    def support_box(self, level: float) -> tuple[float, float]:
        """Half-widths of a box holding ``{|p|^2 >= level}``."""
        if level >= 1.0:
            return 0.0, 0.0
        rho = math.sqrt(-math.log(level))
        return self.gamma * rho, rho / self.gamma

    def t_breaks(self) -> np.ndarray:
        return np.empty(0)

    def omega_breaks(self) -> np.ndarray:
        return np.empty(0)

    def is_even_in_omega(self) -> bool:
        return True

    def kernel(self, tau, x, spread: float):
        """``h_r(t, t')`` at midpoint ``tau`` and lag ``x = t - t'``.

        The omega integral of the Gaussian is done in closed form.
        """
        g, r = self.gamma, float(spread)
        tau = np.asarray(tau, dtype=float)
        x = np.asarray(x, dtype=float)
        amp = r / (g * math.sqrt(2 * math.pi))
        return amp * np.exp(-0.5 * (tau / (r * g)) ** 2 - 0.5 * (r * x / g) ** 2)

    def to_dict(self) -> dict:
        return {"kind": "gaussian", "gamma": self.gamma}


class TabulatedSymbol:
    """Grid samples ``values[i, j] = p(t_axis[i], omega_axis[j])``.

    Bilinear interpolation between nodes, zero outside the grid.  The
    values must be non-negative and decay to ``<= 1e-12`` of the peak on
    the grid boundary.
    """

    kind = "tabulated"

    def __init__(self, t_axis, omega_axis, values):
        t_axis = np.asarray(t_axis, dtype=float).ravel()
        omega_axis = np.asarray(omega_axis, dtype=float).ravel()
        values = np.asarray(values, dtype=float)
        if t_axis.size < 2 or omega_axis.size < 2:
            raise InvalidInputError("each axis needs at least two nodes")
        if np.any(np.diff(t_axis) <= 0) or np.any(np.diff(omega_axis) <= 0):
            raise InvalidInputError("axes must be strictly increasing")
        if values.shape != (t_axis.size, omega_axis.size):
            raise InvalidInputError(
                f"values shape {values.shape} does not match axes "
                f"({t_axis.size}, {omega_axis.size})")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise InvalidInputError("symbol values must be finite and non-negative")
        top = values.max()
        if top <= 0:
            raise InvalidInputError("symbol is identically zero")
        rim = max(values[0].max(), values[-1].max(), values[:, 0].max(), values[:, -1].max())
        if rim > DECAY_FLOOR * top:
            raise InvalidInputError(
                f"symbol does not decay at the grid boundary (rim/peak = {rim / top:.3g})")
        self.t_axis = t_axis
        self.omega_axis = omega_axis
        self.values = values
        self._peak = float(top)

    def __repr__(self):
        return f"TabulatedSymbol(grid={self.values.shape})"

    @property
    def peak(self) -> float:
        return self._peak

    def _row(self, t: float):
        ta = self.t_axis
        if t < ta[0] or t > ta[-1]:
            return None
        i = min(int(np.searchsorted(ta, t, side="right")) - 1, ta.size - 2)
        w = (t - ta[i]) / (ta[i + 1] - ta[i])
        return (1.0 - w) * self.values[i] + w * self.values[i + 1]

    def value(self, t, omega):
        t, omega = np.broadcast_arrays(np.asarray(t, dtype=float),
                                       np.asarray(omega, dtype=float))
        out = np.zeros(t.shape)
        flat_t, flat_w, flat_o = t.ravel(), omega.ravel(), out.reshape(-1)
        for idx, (tt, ww) in enumerate(zip(flat_t, flat_w)):
            row = self._row(tt)
            if row is not None:
                flat_o[idx] = np.interp(ww, self.omega_axis, row, left=0.0, right=0.0)
        return out if out.ndim else float(out)

    def section(self, t: float):
        row = self._row(t)
        if row is None:
            return lambda omega: np.zeros(np.shape(omega))
        axis = self.omega_axis
        return lambda omega: np.square(np.interp(omega, axis, row, left=0.0, right=0.0))

    def support_box(self, level: float) -> tuple[float, float]:
        return (max(abs(self.t_axis[0]), abs(self.t_axis[-1])),
                max(abs(self.omega_axis[0]), abs(self.omega_axis[-1])))

    def t_breaks(self) -> np.ndarray:
        return self.t_axis

    def omega_breaks(self) -> np.ndarray:
        return self.omega_axis

    def is_even_in_omega(self, rtol: float = 1e-12) -> bool:
        axis = self.omega_axis
        scale = max(abs(axis[0]), abs(axis[-1]))
        if not np.allclose(axis, -axis[::-1], rtol=0, atol=rtol * scale):
            return False
        return np.allclose(self.values, self.values[:, ::-1], rtol=0, atol=rtol * self._peak)

    def kernel(self, tau, x, spread: float):
        """Numerical omega integral ``(1/2pi) int p_r(tau, w) cos(w x) dw``."""
        tau = np.asarray(tau, dtype=float).ravel()
        x = np.asarray(x, dtype=float).ravel()
        r = float(spread)
        w_max = r * max(abs(self.omega_axis[0]), abs(self.omega_axis[-1]))
        x_max = max(np.abs(x).max(initial=0.0), 1e-300)
        # Resolve both the tabulation and the cosine oscillation.
        dw = min(r * np.diff(self.omega_axis).min() / 4, math.pi / (16 * x_max))
        n = int(math.ceil(2 * w_max / dw)) | 1
        w = np.linspace(-w_max, w_max, n)
        weights = np.full(n, (w[1] - w[0]) / 3.0)
        weights[1:-1:2] *= 4
        weights[2:-1:2] *= 2
        rows = np.empty((tau.size, n))
        for i, tt in enumerate(tau):
            row = self._row(tt / r)
            rows[i] = 0.0 if row is None else np.interp(w / r, self.omega_axis, row,
                                                        left=0.0, right=0.0)
        return (rows * weights) @ np.cos(np.outer(w, x)) / (2 * math.pi)

    def to_dict(self) -> dict:
        return {"kind": "tabulated", "t_axis": self.t_axis.tolist(),
                "omega_axis": self.omega_axis.tolist(), "values": self.values.tolist()}


@dataclass(frozen=True)
class WeylSymbolModel:
    """Symbol, spreading factor ``r >= 1`` and noise PSD ``theta^2``."""

    symbol: GaussianSymbol | TabulatedSymbol
    spread: float = 1.0
    noise_psd: float = 1.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        r = float(self.spread)
        if not np.isfinite(r) or r < 1:
            raise InvalidInputError(f"spread r must be >= 1, got {self.spread}")
        theta2 = float(self.noise_psd)
        if not np.isfinite(theta2) or theta2 <= 0:
            raise InvalidInputError(f"noise_psd must be positive, got {self.noise_psd}")
        object.__setattr__(self, "spread", r)
        object.__setattr__(self, "noise_psd", theta2)

    @classmethod
    def gaussian(cls, gamma: float = 1.0, spread: float = 1.0,
                 noise_psd: float = 1.0) -> "WeylSymbolModel":
        return cls(GaussianSymbol(gamma), spread, noise_psd)

    @property
    def peak_sq(self) -> float:
        """``M = max |p|^2``."""
        return self.symbol.peak ** 2

    def with_spread(self, spread: float) -> "WeylSymbolModel":
        return WeylSymbolModel(self.symbol, spread, self.noise_psd)

    def value(self, t, omega):
        """Spread symbol ``p_r(t, omega)``."""
        r = self.spread
        return self.symbol.value(np.asarray(t) / r, np.asarray(omega) / r)

    def section(self, t: float):
        """``omega -> |p_r(t, omega)|^2``."""
        r = self.spread
        inner = self.symbol.section(t / r)
        return lambda omega: inner(np.asarray(omega) / r)

    def support_box(self, level: float) -> tuple[float, float]:
        bt, bw = self.symbol.support_box(level)
        return self.spread * bt, self.spread * bw

    def t_breaks(self) -> np.ndarray:
        return self.spread * self.symbol.t_breaks()

    def omega_breaks(self) -> np.ndarray:
        return self.spread * self.symbol.omega_breaks()

    def to_dict(self) -> dict:
        d = self.symbol.to_dict()
        d.update(spread=self.spread, noise_psd=self.noise_psd)
        return d


def check_non_flat(symbol, rtol: float = 1e-6, fraction: float = 0.01) -> bool:
    """Heuristic non-flatness test on the grid samples of ``|p|^2``.

    Warns with :class:`NonFlatWarning` when some positive level ``c`` has
    more than ``fraction`` of all grid nodes within ``rtol * c`` of it.
    Returns True when no such level was found.  Gaussian symbols are
    non-flat by construction.
    """
    if not isinstance(symbol, TabulatedSymbol):
        return True
    u = np.sort(np.square(symbol.values).ravel())
    M = u[-1]
    u_pos = u[u > DECAY_FLOOR * M]
    if u_pos.size == 0:
        return True
    width = rtol * u_pos
    hi = np.searchsorted(u, u_pos + width, side="right")
    lo = np.searchsorted(u, u_pos - width, side="left")
    worst = int((hi - lo).max())
    if worst > fraction * u.size:
        warnings.warn(
            f"|p|^2 looks flat: {worst} of {u.size} grid nodes share one level",
            NonFlatWarning, stacklevel=2)
        return False
    return True


def symbol_from_dict(d: dict):
    """Build a symbol from ``{"kind": "gaussian", "gamma": g}`` or a grid dict."""
    kind = d.get("kind")
    if kind is None:
        kind = "tabulated" if "values" in d else "gaussian"
    if kind == "gaussian":
        return GaussianSymbol(d.get("gamma", 1.0))
    if kind == "tabulated":
        try:
            sym = TabulatedSymbol(d["t_axis"], d["omega_axis"], d["values"])
        except KeyError as exc:
            raise InvalidInputError(f"tabulated symbol is missing {exc.args[0]!r}") from None
        check_non_flat(sym)
        return sym
    raise InvalidInputError(f"unknown symbol kind {kind!r}")


def load_symbol(path, t_axis_path=None, omega_axis_path=None):
    """Read a symbol from JSON, or from a CSV grid plus two axis files."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        with open(path) as fh:
            return symbol_from_dict(json.load(fh))
    if t_axis_path is None or omega_axis_path is None:
        raise InvalidInputError("a CSV symbol grid needs --t-axis and --omega-axis files")
    values = np.loadtxt(path, delimiter=",", ndmin=2)
    t_axis = np.loadtxt(t_axis_path, delimiter=",").ravel()
    omega_axis = np.loadtxt(omega_axis_path, delimiter=",").ravel()
    sym = TabulatedSymbol(t_axis, omega_axis, values)
    check_non_flat(sym)
    return sym
