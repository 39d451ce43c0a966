"""Finite-dimensional vector Gaussian channel ``y = Hx + n``.

Everything here works on the sorted eigenvalues of ``H^T H``.  Subchannel
``k`` carries noise variance ``theta^2 / lambda_k`` after matched
filtering, and a subchannel is *active* at a given ``snr`` iff
``lambda_k > 1/snr`` (strict).  The count of active subchannels is ``K``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InfeasibleSnrError, InvalidInputError, NoSignalPathError

__all__ = [
    "ChannelSpec",
    "SpectralChannel",
    "WaterfillSolution",
    "MmseReport",
    "DerivativeCheck",
    "spectrum",
    "active_count",
    "is_feasible",
    "waterfill",
    "capacity_from_snr",
    "node",
    "mmse",
    "capacity_derivative_check",
    "gaussian_mutual_information",
]

# Relative slack when comparing snr against the feasibility edge 1/lambda_0;
# 1/lambda_0 computed in floating point may land a few ulps below the edge.
_FEASIBILITY_RTOL = 1e-12


@dataclass(frozen=True)
class ChannelSpec:
    """Real square channel matrix together with the noise variance."""

    matrix: np.ndarray
    noise_variance: float

    def __post_init__(self):
        H = np.asarray(self.matrix, dtype=float)
        if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] < 1:
            raise InvalidInputError(
                f"channel matrix must be square with L >= 1, got shape {H.shape}")
        if not np.all(np.isfinite(H)):
            raise InvalidInputError("channel matrix has non-finite entries")
        theta2 = float(self.noise_variance)
        if not np.isfinite(theta2) or theta2 <= 0:
            raise InvalidInputError(
                f"noise_variance must be positive and finite, got {self.noise_variance}")
        object.__setattr__(self, "matrix", H)
        object.__setattr__(self, "noise_variance", theta2)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def to_dict(self) -> dict:
        return {"matrix": self.matrix.tolist(), "noise_variance": self.noise_variance}


@dataclass(frozen=True)
class SpectralChannel:
    """Eigenvalues of ``H^T H`` sorted non-increasing, plus ``theta^2``."""

    eigenvalues: np.ndarray
    noise_variance: float

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float).ravel()
        if lam.size < 1 or not np.all(np.isfinite(lam)):
            raise InvalidInputError("eigenvalues must be a non-empty finite array")
        if np.any(lam < 0):
            raise InvalidInputError("eigenvalues must be non-negative")
        if np.any(np.diff(lam) > 0):
            raise InvalidInputError("eigenvalues must be sorted non-increasing")
        theta2 = float(self.noise_variance)
        if not np.isfinite(theta2) or theta2 <= 0:
            raise InvalidInputError("noise_variance must be positive and finite")
        lam.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "noise_variance", theta2)

    @classmethod
    def from_unsorted(cls, eigenvalues, noise_variance: float) -> "SpectralChannel":
        lam = np.maximum(np.asarray(eigenvalues, dtype=float).ravel(), 0.0)
        return cls(np.sort(lam)[::-1], noise_variance)

    @property
    def size(self) -> int:
        return self.eigenvalues.size

    @property
    def subchannel_noise(self) -> np.ndarray:
        """``theta^2 / lambda_k``, with an exact ``inf`` where ``lambda_k = 0``."""
        lam = self.eigenvalues
        out = np.full(lam.shape, np.inf)
        pos = lam > 0
        out[pos] = self.noise_variance / lam[pos]
        return out

    @property
    def min_feasible_snr(self) -> float:
        lam0 = self.eigenvalues[0]
        return np.inf if lam0 == 0 else 1.0 / lam0

    def to_dict(self) -> dict:
        return {"eigenvalues": self.eigenvalues.tolist(),
                "noise_variance": self.noise_variance}


@dataclass(frozen=True)
class WaterfillSolution:
    water_level: float
    active_count: int
    powers: np.ndarray
    snr: float
    budget: float

    def to_dict(self) -> dict:
        return {"water_level": self.water_level, "active_count": self.active_count,
                "powers": self.powers.tolist(), "snr": self.snr, "budget": self.budget}


@dataclass(frozen=True)
class MmseReport:
    """MMSE, NODE and the Fisher-information term ``node - mmse``."""

    mmse: float
    node: float
    fisher_term: float
    snr: float
    active_count: int = 0

    def to_dict(self) -> dict:
        return {"mmse": self.mmse, "node": self.node, "fisher_term": self.fisher_term,
                "snr": self.snr, "active_count": self.active_count}


@dataclass(frozen=True)
class DerivativeCheck:
    analytic: float
    numeric: float
    jump_adjacent: bool
    h: float = field(default=np.nan)

    def to_dict(self) -> dict:
        return {"analytic": self.analytic, "numeric": self.numeric,
                "jump_adjacent": self.jump_adjacent, "h": self.h}


def spectrum(channel: ChannelSpec) -> SpectralChannel:
    """Eigenvalues of ``H^T H`` (counting multiplicity), largest first.

    Tiny negative values returned by the symmetric eigensolver are clamped
    to zero.
    """
    if not isinstance(channel, ChannelSpec):
        channel = ChannelSpec(*channel)
    H = channel.matrix
    lam = np.linalg.eigvalsh(H.T @ H)
    return SpectralChannel.from_unsorted(lam, channel.noise_variance)


def active_count(spec: SpectralChannel, snr: float) -> int:
    """Number of eigenvalues strictly above ``1/snr``."""
    if snr <= 0:
        return 0
    return int(np.count_nonzero(spec.eigenvalues > 1.0 / snr))


def is_feasible(spec: SpectralChannel, snr: float) -> bool:
    lam0 = spec.eigenvalues[0]
    return lam0 > 0 and snr * lam0 >= 1.0 - _FEASIBILITY_RTOL


def _check_snr(snr) -> float:
    snr = float(snr)
    if not np.isfinite(snr) or snr <= 0:
        raise InvalidInputError(f"snr must be positive and finite, got {snr}")
    return snr


def waterfill(spec: SpectralChannel, budget: float, rtol: float = 1e-12,
              max_iter: int = 400) -> WaterfillSolution:
    """Solve ``sum_k (sigma^2 - nu_k^2)^+ = S`` for the water level.

    Monotone bisection on the height ``x = sigma^2 - nu_0^2`` in ``[0, S]``;
    stops once the energy residual drops below ``rtol * S`` or the bracket
    collapses to adjacent floats.  Working with heights above ``nu_0^2``
    keeps the powers accurate when ``S`` is tiny next to the noise levels.
    """
    S = float(budget)
    if not np.isfinite(S) or S <= 0:
        raise InvalidInputError(f"energy budget must be positive, got {budget}")
    if spec.eigenvalues[0] == 0:
        raise NoSignalPathError("all eigenvalues are zero; no signal path")

    nu2 = spec.subchannel_noise
    depth = nu2 - nu2[0]

    def excess(x):
        return np.maximum(x - depth, 0.0).sum() - S

    lo, hi = 0.0, S
    x = hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        x = mid
        resid = excess(mid)
        if abs(resid) <= rtol * S:
            break
        if resid > 0:
            hi = mid
        else:
            lo = mid
    powers = np.maximum(x - depth, 0.0)
    level = nu2[0] + x
    return WaterfillSolution(
        water_level=float(level),
        active_count=int(np.count_nonzero(depth < x)),
        powers=powers,
        snr=float(level / spec.noise_variance),
        budget=S,
    )


def capacity_from_snr(spec: SpectralChannel, snr: float) -> float:
    """``C(snr) = 1/2 sum_{k<K} ln(snr lambda_k)`` in nats.

    Raises
    ------
    InfeasibleSnrError
        If ``snr < 1/lambda_0``.
    """
    snr = _check_snr(snr)
    if not is_feasible(spec, snr):
        raise InfeasibleSnrError(
            f"snr={snr} is below the smallest feasible value {spec.min_feasible_snr}")
    K = active_count(spec, snr)
    if K == 0:
        return 0.0
    return 0.5 * float(np.sum(np.log(snr * spec.eigenvalues[:K])))


def node(spec: SpectralChannel, snr: float) -> float:
    """Normalized optimal detection error ``K(snr)/snr``; 0 when infeasible."""
    snr = _check_snr(snr)
    if not is_feasible(spec, snr):
        return 0.0
    return active_count(spec, snr) / snr


def mmse(spec: SpectralChannel, snr: float) -> MmseReport:
    """MMSE in estimating ``HX`` under the capacity-achieving Gaussian input.

    ``mmse = sum_{k<K} (1 - 1/(snr lambda_k)) / snr`` and the remainder
    ``node - mmse`` is ``sum_{k<K} 1/(snr lambda_k) / snr``.
    """
    snr = _check_snr(snr)
    K = active_count(spec, snr) if is_feasible(spec, snr) else 0
    if K == 0:
        return MmseReport(0.0, 0.0, 0.0, snr, 0)
    inv = 1.0 / (snr * spec.eigenvalues[:K])
    fisher = float(np.sum(inv)) / snr
    node_value = K / snr
    mmse_value = float(np.sum(1.0 - inv)) / snr
    return MmseReport(mmse_value, node_value, fisher, snr, K)


def capacity_derivative_check(spec: SpectralChannel, snr: float,
                              h: float | None = None) -> DerivativeCheck:
    """Compare ``dC/dsnr`` by central differences against ``node/2``.

    ``h`` defaults to ``1e-6 * snr``, clipped so that ``snr - h`` stays
    feasible.  An explicit ``h`` that leaves the feasible region is an error.
    """
    snr = _check_snr(snr)
    if not is_feasible(spec, snr):
        raise InfeasibleSnrError(f"snr={snr} is infeasible")
    edge = spec.min_feasible_snr
    if h is None:
        h = min(1e-6 * snr, 0.5 * (snr - edge))
        if not h > 0:
            raise InvalidInputError(
                f"snr={snr} sits on the feasibility edge; no feasible stencil")
    else:
        h = float(h)
        if not h > 0:
            raise InvalidInputError("step h must be positive")
        if not is_feasible(spec, snr - h):
            raise InvalidInputError(
                f"stencil [{snr - h}, {snr + h}] leaves the feasible region")
    numeric = (capacity_from_snr(spec, snr + h) - capacity_from_snr(spec, snr - h)) / (2 * h)
    jump = active_count(spec, snr - h) != active_count(spec, snr + h)
    return DerivativeCheck(0.5 * node(spec, snr), float(numeric), bool(jump), float(h))


def gaussian_mutual_information(spec: SpectralChannel, input_powers) -> float:
    """``1/2 sum_k ln(1 + p_k lambda_k / theta^2)`` for independent Gaussian inputs."""
    p = np.asarray(input_powers, dtype=float).ravel()
    if p.shape != spec.eigenvalues.shape:
        raise InvalidInputError(
            f"expected {spec.size} input powers, got {p.size}")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise InvalidInputError("input powers must be finite and non-negative")
    return 0.5 * float(np.sum(np.log1p(p * spec.eigenvalues / spec.noise_variance)))
