"""Continuous-time LTV channel quantities on the time-frequency plane.

All integrals run over the super-level set ``{|p_r|^2 >= 1/snr}`` and are
evaluated by :mod:`cnode.quadrature`.  The module is parameterized by
``snr = sigma^2 / theta^2`` with ``sigma^2 = 2 pi nu``; use
:func:`solve_water_level` to go from an energy budget to ``nu``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize

from .exceptions import ConvergenceError, InvalidInputError
from .quadrature import QuadratureConfig, superlevel_integrals
from .symbols import GaussianSymbol, WeylSymbolModel

__all__ = [
    "ContinuousReport",
    "cup_function",
    "water_budget",
    "solve_water_level",
    "capacity_from_water_level",
    "capacity_integral",
    "count_integral",
    "node_integral",
    "mmse_integral",
    "continuous_report",
    "averaged_limits",
    "lemma1_derivative_check",
    "continuous_cnode_check",
    "gaussian_closed_form",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ContinuousReport:
    capacity: float
    count: float
    node: float
    mmse: float
    water_level: float
    snr: float

    def to_dict(self) -> dict:
        return asdict(self)


def _check_snr(snr) -> float:
    snr = float(snr)
    if not math.isfinite(snr) or snr <= 0:
        raise InvalidInputError(f"snr must be positive and finite, got {snr}")
    return snr


def cup_function(model: WeylSymbolModel, t, omega):
    """``N_r(t, omega) = theta^2 / (2 pi |p_r(t, omega)|^2)``; ``inf`` where ``p_r = 0``."""
    p2 = np.square(np.asarray(model.value(t, omega), dtype=float))
    with np.errstate(divide="ignore"):
        out = np.where(p2 > 0, model.noise_psd / (TWO_PI * np.where(p2 > 0, p2, 1.0)), np.inf)
    return out if out.ndim else float(out)


def _integrals(model, snr, names, quad):
    """Raw plane integrals over ``{u >= 1/snr}`` for the requested names."""
    fs = {
        "area": None,
        "log": lambda u: np.log(snr * u),
        "mmse": lambda u: 1.0 - 1.0 / (snr * u),
    }
    res = superlevel_integrals(model, 1.0 / snr, {n: fs[n] for n in names}, quad)
    return {n: r.value for n, r in res.items()}


def capacity_integral(model: WeylSymbolModel, snr: float,
                      quad: QuadratureConfig | None = None) -> float:
    """``(1/4pi) iint_{|p_r|^2 >= 1/snr} ln(snr |p_r|^2)``, in nats."""
    snr = _check_snr(snr)
    return _integrals(model, snr, ["log"], quad)["log"] / (2 * TWO_PI)


def count_integral(model: WeylSymbolModel, snr: float,
                   quad: QuadratureConfig | None = None) -> float:
    """Normalized area ``(1/2pi) |{|p_r|^2 >= 1/snr}|``."""
    snr = _check_snr(snr)
    return _integrals(model, snr, ["area"], quad)["area"] / TWO_PI


def node_integral(model: WeylSymbolModel, snr: float,
                  quad: QuadratureConfig | None = None) -> float:
    return count_integral(model, snr, quad) / _check_snr(snr)


def mmse_integral(model: WeylSymbolModel, snr: float,
                  quad: QuadratureConfig | None = None) -> float:
    """``(1/2pi) iint snr^-1 (1 - 1/(snr |p_r|^2))^+``."""
    snr = _check_snr(snr)
    return _integrals(model, snr, ["mmse"], quad)["mmse"] / (TWO_PI * snr)


def continuous_report(model: WeylSymbolModel, snr: float,
                      quad: QuadratureConfig | None = None) -> ContinuousReport:
    """Capacity, count, NODE and MMSE at one ``snr``, sharing the level-set geometry."""
    snr = _check_snr(snr)
    raw = _integrals(model, snr, ["area", "log", "mmse"], quad)
    count = raw["area"] / TWO_PI
    return ContinuousReport(
        capacity=raw["log"] / (2 * TWO_PI),
        count=count,
        node=count / snr,
        mmse=raw["mmse"] / (TWO_PI * snr),
        water_level=snr * model.noise_psd / TWO_PI,
        snr=snr,
    )


def water_budget(model: WeylSymbolModel, nu: float,
                 quad: QuadratureConfig | None = None) -> float:
    """``S(nu) = iint (nu - N_r)^+ dt domega``."""
    nu = float(nu)
    theta2 = model.noise_psd
    level = theta2 / (TWO_PI * nu)
    f = lambda u: nu - theta2 / (TWO_PI * u)  # noqa: E731
    return superlevel_integrals(model, level, {"s": f}, quad)["s"].value


def solve_water_level(model: WeylSymbolModel, budget: float,
                      quad: QuadratureConfig | None = None) -> float:
    """Water level ``nu`` with ``iint (nu - N_r)^+ = S``.

    ``S(nu)`` is continuous, zero at ``nu_min = theta^2/(2 pi M)`` and
    strictly increasing above it, so a bracket is grown geometrically and
    then closed with Brent's bracketing method.
    """
    quad = quad or QuadratureConfig()
    S = float(budget)
    if not math.isfinite(S) or S <= 0:
        raise InvalidInputError(f"energy budget must be positive, got {budget}")
    nu_min = model.noise_psd / (TWO_PI * model.peak_sq)
    g = lambda nu: water_budget(model, nu, quad) - S  # noqa: E731
    lo, hi = nu_min, 2.0 * nu_min
    for _ in range(200):
        if g(hi) >= 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ConvergenceError("could not bracket the water level")
    nu, info = optimize.brentq(g, lo, hi, xtol=1e-300, rtol=max(quad.tolerance, 4e-16),
                               full_output=True, disp=False)
    if not info.converged:
        raise ConvergenceError(f"water-level search failed: {info.flag}")
    return float(nu)


def capacity_from_water_level(model: WeylSymbolModel, nu: float,
                              quad: QuadratureConfig | None = None) -> float:
    """Capacity from the cup-function integrand ``(1/2pi) iint 1/2 ln(1 + (nu-N)^+/N)``."""
    nu = float(nu)
    theta2 = model.noise_psd
    level = theta2 / (TWO_PI * nu)

    def f(u):
        cup = theta2 / (TWO_PI * u)
        return 0.5 * np.log1p(np.maximum(nu - cup, 0.0) / cup)

    return superlevel_integrals(model, level, {"c": f}, quad)["c"].value / TWO_PI


def averaged_limits(model: WeylSymbolModel, snr: float,
                    quad: QuadratureConfig | None = None) -> dict:
    """``lim node(r, snr)/r^2`` and ``lim mmse(r, snr)/r^2``.

    Both integrals scale exactly as ``r^2``, so the limits are the integrals
    of the unspread symbol.
    """
    rep = continuous_report(model.with_spread(1.0), snr, quad)
    return {"node_bar": rep.node, "mmse_bar": rep.mmse}


def lemma1_derivative_check(model: WeylSymbolModel, snr: float, h: float | None = None,
                            quad: QuadratureConfig | None = None) -> dict:
    """Central difference of ``J(s) = iint_{u >= 1/s} ln(s u)`` against ``|{u >= 1/s}| / s``.

    ``h`` is an absolute step in ``s`` (default ``1e-4 * snr``) and the whole
    stencil must lie above ``1/M``.
    """
    snr = _check_snr(snr)
    h = 1e-4 * snr if h is None else float(h)
    edge = 1.0 / model.peak_sq
    if not h > 0 or snr - h <= edge:
        raise InvalidInputError(
            f"stencil [{snr - h}, {snr + h}] must lie above 1/M = {edge}")
    J = lambda s: _integrals(model, s, ["log"], quad)["log"]  # noqa: E731
    numeric = (J(snr + h) - J(snr - h)) / (2 * h)
    analytic = _integrals(model, snr, ["area"], quad)["area"] / snr
    return {"numeric": numeric, "analytic": analytic, "h": h}


def continuous_cnode_check(model: WeylSymbolModel, snr: float, h: float | None = None,
                           quad: QuadratureConfig | None = None) -> dict:
    """``d(capacity_integral)/dsnr`` by central differences against ``node_integral / 2``."""
    snr = _check_snr(snr)
    h = 1e-3 * snr if h is None else float(h)
    if not h > 0 or snr - h <= 1.0 / model.peak_sq:
        raise InvalidInputError("stencil must lie above 1/M")
    numeric = (capacity_integral(model, snr + h, quad)
               - capacity_integral(model, snr - h, quad)) / (2 * h)
    return {"numeric": numeric, "analytic": 0.5 * node_integral(model, snr, quad), "h": h}


def gaussian_closed_form(snr: float, spread: float = 1.0, noise_psd: float = 1.0) -> dict:
    """Exact integrals for the Gaussian symbol (any ``gamma``).

    With ``L = ln snr`` and ``snr >= 1``: count ``r^2 L/2``, capacity
    ``r^2 L^2/8``, node ``r^2 L/(2 snr)``, mmse
    ``r^2/2 (L/snr - (1 - 1/snr)/snr)`` and energy budget
    ``theta^2 r^2/2 (snr L - snr + 1)``.  All vanish for ``snr <= 1``.
    """
    snr = _check_snr(snr)
    r2 = float(spread) ** 2
    if snr <= 1.0:
        zero = {"capacity": 0.0, "count": 0.0, "node": 0.0, "mmse": 0.0, "budget": 0.0}
        zero.update(water_level=snr * noise_psd / TWO_PI, snr=snr)
        return zero
    L = math.log(snr)
    return {
        "capacity": r2 * L * L / 8.0,
        "count": r2 * L / 2.0,
        "node": r2 * L / (2.0 * snr),
        "mmse": 0.5 * r2 * (L / snr - (1.0 - 1.0 / snr) / snr),
        "budget": 0.5 * noise_psd * r2 * (snr * L - snr + 1.0),
        "water_level": snr * noise_psd / TWO_PI,
        "snr": snr,
    }


def is_gaussian(model: WeylSymbolModel) -> bool:
    return isinstance(model.symbol, GaussianSymbol)
