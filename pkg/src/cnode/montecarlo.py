"""Monte-Carlo check of the matched-filter receiver for ``y = Hx + n``.

Trials are split into fixed-size blocks, each with its own PCG64 stream
spawned from ``SeedSequence(seed)``, and reduced in block order.  The
result therefore depends only on ``(channel, config)``, never on how the
blocks are scheduled.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import InvalidInputError
from .spectral import ChannelSpec, active_count, is_feasible, mmse, spectrum

__all__ = ["SimConfig", "SimReport", "simulate_matched_filter", "error_whiteness_test",
           "BLOCK_SIZE"]

BLOCK_SIZE = 10_000
MIN_WHITENESS_TRIALS = 10_000


@dataclass(frozen=True)
class SimConfig:
    """Monte-Carlo settings.

    ``input_mode`` is ``"capacity_achieving"`` (independent Gaussian
    coefficients with waterfilling powers) or ``"fixed_coefficients"``, in
    which case ``coefficients`` gives the deterministic ``a_k``.
    """

    trials: int
    seed: int
    snr: float
    input_mode: str = "capacity_achieving"
    coefficients: tuple | None = None

    def __post_init__(self):
        if int(self.trials) < 1:
            raise InvalidInputError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise InvalidInputError("seed must be a 64-bit unsigned integer")
        if not float(self.snr) > 0:
            raise InvalidInputError("snr must be positive")
        if self.input_mode not in ("capacity_achieving", "fixed_coefficients"):
            raise InvalidInputError(f"unknown input_mode {self.input_mode!r}")
        if self.input_mode == "fixed_coefficients":
            if self.coefficients is None:
                raise InvalidInputError("fixed_coefficients mode needs coefficients")
            object.__setattr__(self, "coefficients",
                               tuple(float(c) for c in self.coefficients))
        object.__setattr__(self, "trials", int(self.trials))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "snr", float(self.snr))

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        mode = d.get("input_mode", "capacity_achieving")
        coeffs = None
        if isinstance(mode, dict):
            coeffs = mode.get("fixed_coefficients") or mode.get("values")
            mode = "fixed_coefficients"
        coeffs = d.get("coefficients", coeffs)
        return cls(d["trials"], d.get("seed", 0), d["snr"], mode, coeffs)

    def to_dict(self) -> dict:
        d = {"trials": self.trials, "seed": self.seed, "snr": self.snr,
             "input_mode": self.input_mode}
        if self.coefficients is not None:
            d["coefficients"] = list(self.coefficients)
        return d


@dataclass
class SimReport:
    """Sample statistics of one Monte-Carlo run.

    ``empirical_node_proxy`` is ``K * mean(active error variance) / sigma^2``,
    a sample-based stand-in for the spectral NODE ``K / snr``.
    """

    empirical_error_variances: np.ndarray
    error_variance_stderr: np.ndarray
    empirical_mmse: float
    empirical_mmse_stderr: float
    analytic_mmse: float
    empirical_node_proxy: float
    analytic_node: float
    active_count: int
    noise_variance: float
    trials: int
    seed: int
    error_samples: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "empirical_error_variances": self.empirical_error_variances.tolist(),
            "error_variance_stderr": self.error_variance_stderr.tolist(),
            "empirical_mmse": self.empirical_mmse,
            "empirical_mmse_stderr": self.empirical_mmse_stderr,
            "analytic_mmse": self.analytic_mmse,
            "empirical_node_proxy": self.empirical_node_proxy,
            "analytic_node": self.analytic_node,
            "active_count": self.active_count,
            "noise_variance": self.noise_variance,
            "trials": self.trials,
            "seed": self.seed,
        }

    def dump_samples(self, path):
        """Write the per-trial detection errors as CSV (one column per subchannel)."""
        if self.error_samples is None:
            raise InvalidInputError("report was produced without stored samples")
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"e{k}" for k in range(self.error_samples.shape[1])])
            for row in self.error_samples:
                w.writerow([format(x, ".17g") for x in row])


def simulate_matched_filter(channel: ChannelSpec, config: SimConfig,
                            keep_samples: bool = True) -> SimReport:
    """Simulate ``y = Hx + n`` and the matched-filter bank ``<y, g_k>``.

    With ``H = G diag(sqrt(lambda)) F^T`` the input is ``x = F a``.  Per trial
    the detection errors ``e_k = <y, g_k> - sqrt(lambda_k) a_k`` are recorded.
    The MMSE estimate of ``HX''`` (``X'' = X / sigma``) from ``y / theta`` is the
    linear conditional-mean estimator built from the input covariance in the
    original coordinates; its squared error is compared with the closed form.
    """
    if not isinstance(channel, ChannelSpec):
        raise InvalidInputError("channel must be a ChannelSpec")
    H = channel.matrix
    L = channel.size
    theta2 = channel.noise_variance
    theta = math.sqrt(theta2)
    snr = config.snr
    sigma2 = snr * theta2

    G, s, Ft = np.linalg.svd(H)
    F = Ft.T
    lam = s * s
    spec = spectrum(channel)
    feasible = is_feasible(spec, snr)
    K = active_count(spec, snr) if feasible else 0

    if config.input_mode == "capacity_achieving":
        # Normalized coefficient variances 1 - 1/(snr lambda_k) on the active set.
        q = np.zeros(L)
        act = lam > 1.0 / snr if feasible else np.zeros(L, bool)
        q[act] = 1.0 - 1.0 / (snr * lam[act])
        coeff_std = np.sqrt(sigma2 * q)
        fixed = None
    else:
        fixed = np.asarray(config.coefficients, dtype=float)
        if fixed.shape != (L,):
            raise InvalidInputError(f"need {L} coefficients, got {fixed.size}")
        q = np.zeros(L)
        coeff_std = None

    # Conditional-mean estimator of v = H x'' from y'' = sqrt(snr) v + n''.
    cov_x = F @ np.diag(q) @ F.T
    cov_v = H @ cov_x @ H.T
    W = math.sqrt(snr) * np.linalg.solve(snr * cov_v + np.eye(L), cov_v).T

    ss = np.random.SeedSequence(config.seed)
    n_blocks = -(-config.trials // BLOCK_SIZE)
    streams = ss.spawn(n_blocks)
    samples = np.empty((config.trials, L)) if keep_samples else None
    sum_e = np.zeros(L)
    sum_e2 = np.zeros(L)
    sum_se = 0.0
    sum_se2 = 0.0
    done = 0
    for b, child in enumerate(streams):
        m = min(BLOCK_SIZE, config.trials - done)
        rng = np.random.Generator(np.random.PCG64(child))
        if fixed is None:
            a = rng.standard_normal((m, L)) * coeff_std
        else:
            a = np.broadcast_to(fixed, (m, L))
        noise = rng.standard_normal((m, L)) * theta
        x = a @ F.T
        y = x @ H.T + noise
        b_hat = y @ G
        e = b_hat - a * s
        if samples is not None:
            samples[done:done + m] = e
        sum_e += e.sum(axis=0)
        sum_e2 += (e * e).sum(axis=0)
        v = (x / math.sqrt(sigma2)) @ H.T
        v_hat = (y / theta) @ W.T
        se = ((v - v_hat) ** 2).sum(axis=1)
        sum_se += se.sum()
        sum_se2 += (se * se).sum()
        done += m

    n = config.trials
    mean_e = sum_e / n
    denom = max(n - 1, 1)
    var_e = np.maximum((sum_e2 - n * mean_e ** 2) / denom, 0.0)
    var_stderr = var_e * math.sqrt(2.0 / denom)
    mse = sum_se / n
    mse_var = max((sum_se2 - n * mse * mse) / denom, 0.0)
    active = slice(0, K) if K > 0 else slice(0, L)
    report = mmse(spec, snr)
    return SimReport(
        empirical_error_variances=var_e,
        error_variance_stderr=var_stderr,
        empirical_mmse=float(mse),
        empirical_mmse_stderr=math.sqrt(mse_var / n),
        analytic_mmse=report.mmse,
        empirical_node_proxy=K * float(var_e[active].mean()) / sigma2,
        analytic_node=report.node,
        active_count=K,
        noise_variance=theta2,
        trials=n,
        seed=config.seed,
        error_samples=samples,
    )


def error_whiteness_test(report: SimReport) -> dict:
    """Largest off-diagonal sample correlation among the detection errors.

    Returns ``max_offdiag_corr``, the bound ``4/sqrt(trials)`` and ``passed``.
    """
    if report.error_samples is None:
        raise InvalidInputError("whiteness test needs stored error samples")
    n = report.error_samples.shape[0]
    if n < MIN_WHITENESS_TRIALS:
        raise InvalidInputError(
            f"whiteness test needs >= {MIN_WHITENESS_TRIALS} trials, got {n}")
    L = report.error_samples.shape[1]
    if L < 2:
        worst = 0.0
    else:
        C = np.corrcoef(report.error_samples, rowvar=False)
        worst = float(np.abs(C[~np.eye(L, dtype=bool)]).max())
    bound = 4.0 / math.sqrt(n)
    return {"max_offdiag_corr": worst, "bound": bound, "passed": worst < bound}
